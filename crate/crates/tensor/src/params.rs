use std::collections::HashMap;
use std::fmt::Write as _;

use crate::{Mat, TensorError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub usize);

/// Named trainable matrices in registration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Mat>,
    index: HashMap<String, ParamId>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `name`; panics if it is already registered.
    pub fn add(&mut self, name: &str, value: Mat) -> ParamId {
        assert!(!self.index.contains_key(name), "parameter `{name}` registered twice");
        let id = ParamId(self.values.len());
        self.names.push(name.to_string());
        self.values.push(value);
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Mat {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Mat {
        &mut self.values[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn num_scalars(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    /// Text checkpoint: per parameter a `param <name> <rows> <cols>` line and
    /// one line of values per row. Values print in shortest round-trip form,
    /// so reading back is exact.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, v) in self.names.iter().zip(&self.values) {
            let _ = writeln!(out, "param {name} {} {}", v.nrows(), v.ncols());
            for row in v.rows() {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TensorError> {
        let mut store = Self::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, msg: String| TensorError::Checkpoint { line: line + 1, msg };
        while let Some((n, header)) = lines.next() {
            let f: Vec<&str> = header.split_whitespace().collect();
            let [kw, name, rows, cols] = f[..] else {
                return Err(err(n, "expected `param <name> <rows> <cols>`".into()));
            };
            if kw != "param" {
                return Err(err(n, format!("expected `param`, found `{kw}`")));
            }
            let rows: usize = rows.parse().map_err(|_| err(n, format!("bad row count `{rows}`")))?;
            let cols: usize = cols.parse().map_err(|_| err(n, format!("bad column count `{cols}`")))?;
            if store.id(name).is_some() {
                return Err(err(n, format!("duplicate parameter `{name}`")));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (m, line) = lines.next().ok_or_else(|| err(n, format!("`{name}` truncated")))?;
                let before = data.len();
                for cell in line.split_whitespace() {
                    data.push(cell.parse::<f64>().map_err(|_| err(m, format!("bad value `{cell}`")))?);
                }
                if data.len() - before != cols {
                    return Err(err(m, format!("expected {cols} values")));
                }
            }
            let v = Mat::from_shape_vec((rows, cols), data).expect("row lengths checked");
            store.add(name, v);
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn text_round_trip_is_exact() {
        let mut s = ParamStore::new();
        s.add("w", array![[0.1, -1.0 / 3.0], [1e-300, 12345.678901234567]]);
        s.add("b", Mat::zeros((1, 3)));
        s.add("empty", Mat::zeros((0, 2)));
        let back = ParamStore::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.name(ParamId(1)), "b");
        assert_eq!(back.num_scalars(), 7);
    }

    #[test]
    fn malformed_checkpoints() {
        assert!(matches!(ParamStore::from_text("param w 1 2\n1.0\n"), Err(TensorError::Checkpoint { line: 2, .. })));
        assert!(ParamStore::from_text("param w 2 1\n1.0\n").is_err());
        assert!(ParamStore::from_text("weights w 1 1\n1\n").is_err());
        assert!(ParamStore::from_text("param w 1 1\nx\n").is_err());
    }

    #[test]
    #[should_panic]
    fn duplicate_registration_panics() {
        let mut s = ParamStore::new();
        s.add("w", Mat::zeros((1, 1)));
        s.add("w", Mat::zeros((1, 1)));
    }
}
