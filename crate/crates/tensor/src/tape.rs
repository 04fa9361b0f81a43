use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::{s, Array2, Axis, Zip};
use rand::Rng;

use crate::params::{ParamId, ParamStore};
use crate::sparse::Csr;
use crate::{Mat, TensorError};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    MulCol(Var, Var),
    MulConst(Var, Arc<Mat>),
    Scale(Var, f64),
    Relu(Var),
    LeakyRelu(Var, f64),
    Tanh(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    GatherRows(Var, Arc<[usize]>),
    ScatterAddRows(Var, Arc<[usize]>),
    SegmentMean(Var, Arc<[usize]>, Vec<f64>),
    /// Winning input row for each (segment, column).
    SegmentMax(Var, Array2<usize>),
    SegmentSoftmax(Var, Arc<[usize]>, usize),
    SpMM(Arc<Csr>, Var),
    LogSoftmax(Var),
    Nll(Var, Arc<[usize]>),
    Sum(Var),
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Mat,
    needs_grad: bool,
}

/// Gradients of one backward pass, keyed by parameter.
#[derive(Clone, Debug, Default)]
pub struct Gradients {
    by_param: BTreeMap<ParamId, Mat>,
}

impl Gradients {
    pub fn get(&self, id: ParamId) -> Option<&Mat> {
        self.by_param.get(&id)
    }

    /// The gradient of `id`, zero when the loss does not depend on it.
    pub fn get_or_zero(&self, id: ParamId, store: &ParamStore) -> Mat {
        self.by_param.get(&id).cloned().unwrap_or_else(|| Mat::zeros(store.value(id).dim()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Mat)> {
        self.by_param.iter().map(|(k, v)| (*k, v))
    }
}

/// Records operations for one forward pass; [`Tape::backward`] consumes it.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
}

fn shape_err(op: &'static str, a: &Mat, b: &Mat) -> TensorError {
    TensorError::Shape { op, lhs: a.dim(), rhs: b.dim() }
}

fn check_segments(op: &'static str, seg: &[usize], rows: usize, n_seg: usize) -> Result<(), TensorError> {
    if seg.len() != rows {
        return Err(TensorError::Domain { op, msg: format!("{} segment ids for {rows} rows", seg.len()) });
    }
    if let Some(&bad) = seg.iter().find(|&&s| s >= n_seg) {
        return Err(TensorError::Domain { op, msg: format!("segment id {bad} out of range {n_seg}") });
    }
    Ok(())
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Mat {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.value(v)[[0, 0]]
    }

    fn push(&mut self, op: Op, value: Mat, inputs: &[Var]) -> Var {
        let needs_grad = matches!(op, Op::Param(_)) || inputs.iter().any(|i| self.nodes[i.0].needs_grad);
        self.nodes.push(Node { op, value, needs_grad });
        Var(self.nodes.len() - 1)
    }

    /// A constant input; no gradient flows into it.
    pub fn constant(&mut self, value: Mat) -> Var {
        self.push(Op::Leaf, value, &[])
    }

    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        self.push(Op::Param(id), store.value(id).clone(), &[])
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.ncols() != y.nrows() {
            return Err(shape_err("matmul", x, y));
        }
        let v = x.dot(y);
        Ok(self.push(Op::MatMul(a, b), v, &[a, b]))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<(), TensorError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.dim() != y.dim() {
            return Err(shape_err(op, x, y));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.same_shape("add", a, b)?;
        let v = self.value(a) + self.value(b);
        Ok(self.push(Op::Add(a, b), v, &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.same_shape("sub", a, b)?;
        let v = self.value(a) - self.value(b);
        Ok(self.push(Op::Sub(a, b), v, &[a, b]))
    }

    /// Adds the `1×d` row `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (x, y) = (self.value(a), self.value(b));
        if y.nrows() != 1 || x.ncols() != y.ncols() {
            return Err(shape_err("add_row", x, y));
        }
        let v = x + y;
        Ok(self.push(Op::AddRow(a, b), v, &[a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.same_shape("mul", a, b)?;
        let v = self.value(a) * self.value(b);
        Ok(self.push(Op::Mul(a, b), v, &[a, b]))
    }

    /// Scales row `i` of `a` by `c[i, 0]`.
    pub fn mul_col(&mut self, a: Var, c: Var) -> Result<Var, TensorError> {
        let (x, y) = (self.value(a), self.value(c));
        if y.ncols() != 1 || x.nrows() != y.nrows() {
            return Err(shape_err("mul_col", x, y));
        }
        let v = x * y;
        Ok(self.push(Op::MulCol(a, c), v, &[a, c]))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let v = self.value(a) * k;
        self.push(Op::Scale(a, k), v, &[a])
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(|x| x.max(0.0));
        self.push(Op::Relu(a), v, &[a])
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let v = self.value(a).mapv(|x| if x > 0.0 { x } else { slope * x });
        self.push(Op::LeakyRelu(a, slope), v, &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(f64::tanh);
        self.push(Op::Tanh(a), v, &[a])
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, TensorError> {
        let first = parts.first().ok_or(TensorError::Domain { op: "concat_cols", msg: "no inputs".into() })?;
        let rows = self.value(*first).nrows();
        for p in parts {
            if self.value(*p).nrows() != rows {
                return Err(shape_err("concat_cols", self.value(*first), self.value(*p)));
            }
        }
        let views: Vec<_> = parts.iter().map(|p| self.value(*p).view()).collect();
        let v = ndarray::concatenate(Axis(1), &views).expect("row counts checked");
        Ok(self.push(Op::ConcatCols(parts.to_vec()), v, parts))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, TensorError> {
        let first = parts.first().ok_or(TensorError::Domain { op: "concat_rows", msg: "no inputs".into() })?;
        let cols = self.value(*first).ncols();
        for p in parts {
            if self.value(*p).ncols() != cols {
                return Err(shape_err("concat_rows", self.value(*first), self.value(*p)));
            }
        }
        let views: Vec<_> = parts.iter().map(|p| self.value(*p).view()).collect();
        let v = ndarray::concatenate(Axis(0), &views).expect("column counts checked");
        Ok(self.push(Op::ConcatRows(parts.to_vec()), v, parts))
    }

    /// Row `k` of the result is row `idx[k]` of `a`.
    pub fn gather_rows(&mut self, a: Var, idx: Arc<[usize]>) -> Result<Var, TensorError> {
        let x = self.value(a);
        if let Some(&bad) = idx.iter().find(|&&i| i >= x.nrows()) {
            return Err(TensorError::Domain { op: "gather_rows", msg: format!("row {bad} of {}", x.nrows()) });
        }
        let v = x.select(Axis(0), &idx);
        Ok(self.push(Op::GatherRows(a, idx), v, &[a]))
    }

    /// Row `idx[k]` of the `n`-row result accumulates row `k` of `a`.
    pub fn scatter_add_rows(&mut self, a: Var, idx: Arc<[usize]>, n: usize) -> Result<Var, TensorError> {
        let x = self.value(a);
        check_segments("scatter_add_rows", &idx, x.nrows(), n)?;
        let mut v = Mat::zeros((n, x.ncols()));
        for (k, &i) in idx.iter().enumerate() {
            v.row_mut(i).scaled_add(1.0, &x.row(k));
        }
        Ok(self.push(Op::ScatterAddRows(a, idx), v, &[a]))
    }

    /// Column-wise mean of the rows in each segment. Empty segments give 0.
    pub fn segment_mean(&mut self, a: Var, seg: Arc<[usize]>, n_seg: usize) -> Result<Var, TensorError> {
        let x = self.value(a);
        check_segments("segment_mean", &seg, x.nrows(), n_seg)?;
        let mut counts = vec![0.0; n_seg];
        let mut v = Mat::zeros((n_seg, x.ncols()));
        for (k, &s) in seg.iter().enumerate() {
            counts[s] += 1.0;
            v.row_mut(s).scaled_add(1.0, &x.row(k));
        }
        for (s, &c) in counts.iter().enumerate() {
            if c > 0.0 {
                v.row_mut(s).mapv_inplace(|e| e / c);
            }
        }
        Ok(self.push(Op::SegmentMean(a, seg, counts), v, &[a]))
    }

    /// Column-wise max of the rows in each segment. Every segment must be
    /// non-empty; ties go to the first row.
    pub fn segment_max(&mut self, a: Var, seg: Arc<[usize]>, n_seg: usize) -> Result<Var, TensorError> {
        let x = self.value(a);
        check_segments("segment_max", &seg, x.nrows(), n_seg)?;
        let d = x.ncols();
        let mut v = Mat::from_elem((n_seg, d), f64::NEG_INFINITY);
        let mut arg = Array2::from_elem((n_seg, d), usize::MAX);
        for (k, &s) in seg.iter().enumerate() {
            for j in 0..d {
                if arg[[s, j]] == usize::MAX || x[[k, j]] > v[[s, j]] {
                    v[[s, j]] = x[[k, j]];
                    arg[[s, j]] = k;
                }
            }
        }
        if arg.iter().any(|&k| k == usize::MAX) && d > 0 {
            return Err(TensorError::Domain { op: "segment_max", msg: "empty segment".into() });
        }
        Ok(self.push(Op::SegmentMax(a, arg), v, &[a]))
    }

    pub fn row_mean(&mut self, a: Var) -> Result<Var, TensorError> {
        let n = self.value(a).nrows();
        self.segment_mean(a, vec![0; n].into(), 1)
    }

    pub fn row_max(&mut self, a: Var) -> Result<Var, TensorError> {
        let n = self.value(a).nrows();
        if n == 0 {
            return Err(TensorError::Domain { op: "row_max", msg: "no rows".into() });
        }
        self.segment_max(a, vec![0; n].into(), 1)
    }

    /// Softmax of each column within each segment.
    pub fn segment_softmax(&mut self, a: Var, seg: Arc<[usize]>, n_seg: usize) -> Result<Var, TensorError> {
        let x = self.value(a);
        check_segments("segment_softmax", &seg, x.nrows(), n_seg)?;
        let d = x.ncols();
        let mut mx = Mat::from_elem((n_seg, d), f64::NEG_INFINITY);
        for (k, &s) in seg.iter().enumerate() {
            for j in 0..d {
                mx[[s, j]] = mx[[s, j]].max(x[[k, j]]);
            }
        }
        let mut v = Mat::zeros(x.dim());
        let mut sum = Mat::zeros((n_seg, d));
        for (k, &s) in seg.iter().enumerate() {
            for j in 0..d {
                let e = (x[[k, j]] - mx[[s, j]]).exp();
                v[[k, j]] = e;
                sum[[s, j]] += e;
            }
        }
        for (k, &s) in seg.iter().enumerate() {
            for j in 0..d {
                v[[k, j]] /= sum[[s, j]];
            }
        }
        Ok(self.push(Op::SegmentSoftmax(a, seg, n_seg), v, &[a]))
    }

    /// `m · a` for a constant sparse `m`.
    pub fn spmm(&mut self, m: Arc<Csr>, a: Var) -> Result<Var, TensorError> {
        let x = self.value(a);
        if m.shape().1 != x.nrows() {
            return Err(TensorError::Shape { op: "spmm", lhs: m.shape(), rhs: x.dim() });
        }
        let v = m.matmul(x);
        Ok(self.push(Op::SpMM(m, a), v, &[a]))
    }

    /// Inverted dropout: zeroes each entry with probability `rate` and scales
    /// survivors by `1/(1-rate)`. Identity when `!train` or `rate == 0`.
    pub fn dropout(&mut self, a: Var, rate: f64, train: bool, rng: &mut impl Rng) -> Var {
        if !train || rate <= 0.0 {
            return a;
        }
        let keep = 1.0 - rate;
        let mask = self.value(a).mapv(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 });
        self.mul_const(a, Arc::new(mask)).expect("mask has the input's shape")
    }

    pub fn mul_const(&mut self, a: Var, c: Arc<Mat>) -> Result<Var, TensorError> {
        let x = self.value(a);
        if x.dim() != c.dim() {
            return Err(shape_err("mul_const", x, &c));
        }
        let v = x * &*c;
        Ok(self.push(Op::MulConst(a, c), v, &[a]))
    }

    pub fn log_softmax(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut v = x.clone();
        for mut row in v.rows_mut() {
            let m = row.fold(f64::NEG_INFINITY, |acc, &e| acc.max(e));
            let lse = m + row.iter().map(|&e| (e - m).exp()).sum::<f64>().ln();
            row.mapv_inplace(|e| e - lse);
        }
        self.push(Op::LogSoftmax(a), v, &[a])
    }

    /// Mean over rows of `-logp[i, target[i]]`.
    pub fn nll(&mut self, logp: Var, targets: Arc<[usize]>) -> Result<Var, TensorError> {
        let x = self.value(logp);
        if targets.len() != x.nrows() || x.nrows() == 0 {
            return Err(TensorError::Domain { op: "nll", msg: format!("{} targets for {} rows", targets.len(), x.nrows()) });
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= x.ncols()) {
            return Err(TensorError::Domain { op: "nll", msg: format!("target {bad} out of range {}", x.ncols()) });
        }
        let total: f64 = targets.iter().enumerate().map(|(i, &t)| -x[[i, t]]).sum();
        let v = Mat::from_elem((1, 1), total / targets.len() as f64);
        Ok(self.push(Op::Nll(logp, targets), v, &[logp]))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = Mat::from_elem((1, 1), self.value(a).sum());
        self.push(Op::Sum(a), v, &[a])
    }

    /// Reverse pass from the `1×1` node `loss`. The tape can be differentiated
    /// once.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients, TensorError> {
        if self.consumed {
            return Err(TensorError::TapeConsumed);
        }
        let dim = self.value(loss).dim();
        if dim != (1, 1) {
            return Err(TensorError::NotScalar(dim));
        }
        self.consumed = true;
        let mut grads: Vec<Option<Mat>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Mat::ones((1, 1)));
        let mut out = Gradients::default();
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if !self.nodes[i].needs_grad {
                continue;
            }
            let node = &self.nodes[i];
            let mut send = |v: Var, d: Mat| {
                if !self.nodes[v.0].needs_grad {
                    return;
                }
                match &mut grads[v.0] {
                    Some(acc) => *acc += &d,
                    slot @ None => *slot = Some(d),
                }
            };
            let val = |v: Var| &self.nodes[v.0].value;
            match &node.op {
                Op::Leaf => {}
                Op::Param(id) => match out.by_param.get_mut(id) {
                    Some(acc) => *acc += &g,
                    None => {
                        out.by_param.insert(*id, g);
                    }
                },
                Op::MatMul(a, b) => {
                    send(*a, g.dot(&val(*b).t()));
                    send(*b, val(*a).t().dot(&g));
                }
                Op::Add(a, b) => {
                    send(*a, g.clone());
                    send(*b, g);
                }
                Op::Sub(a, b) => {
                    send(*a, g.clone());
                    send(*b, -g);
                }
                Op::AddRow(a, b) => {
                    send(*b, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    send(*a, g);
                }
                Op::Mul(a, b) => {
                    send(*a, &g * val(*b));
                    send(*b, &g * val(*a));
                }
                Op::MulCol(a, c) => {
                    send(*c, (&g * val(*a)).sum_axis(Axis(1)).insert_axis(Axis(1)));
                    send(*a, &g * val(*c));
                }
                Op::MulConst(a, c) => send(*a, &g * &**c),
                Op::Scale(a, k) => send(*a, g * *k),
                Op::Relu(a) => {
                    let mut d = g;
                    Zip::from(&mut d).and(val(*a)).for_each(|d, &x| {
                        if x <= 0.0 {
                            *d = 0.0
                        }
                    });
                    send(*a, d);
                }
                Op::LeakyRelu(a, slope) => {
                    let mut d = g;
                    Zip::from(&mut d).and(val(*a)).for_each(|d, &x| {
                        if x <= 0.0 {
                            *d *= slope
                        }
                    });
                    send(*a, d);
                }
                Op::Tanh(a) => {
                    let mut d = g;
                    Zip::from(&mut d).and(&node.value).for_each(|d, &y| *d *= 1.0 - y * y);
                    send(*a, d);
                }
                Op::ConcatCols(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let w = val(*p).ncols();
                        send(*p, g.slice(s![.., off..off + w]).to_owned());
                        off += w;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let h = val(*p).nrows();
                        send(*p, g.slice(s![off..off + h, ..]).to_owned());
                        off += h;
                    }
                }
                Op::GatherRows(a, idx) => {
                    let mut d = Mat::zeros(val(*a).dim());
                    for (k, &r) in idx.iter().enumerate() {
                        d.row_mut(r).scaled_add(1.0, &g.row(k));
                    }
                    send(*a, d);
                }
                Op::ScatterAddRows(a, idx) => send(*a, g.select(Axis(0), idx)),
                Op::SegmentMean(a, seg, counts) => {
                    let mut d = Mat::zeros(val(*a).dim());
                    for (k, &s) in seg.iter().enumerate() {
                        d.row_mut(k).scaled_add(1.0 / counts[s], &g.row(s));
                    }
                    send(*a, d);
                }
                Op::SegmentMax(a, arg) => {
                    let mut d = Mat::zeros(val(*a).dim());
                    for ((s, j), &k) in arg.indexed_iter() {
                        d[[k, j]] += g[[s, j]];
                    }
                    send(*a, d);
                }
                Op::SegmentSoftmax(a, seg, n_seg) => {
                    let y = &node.value;
                    let mut dot = Mat::zeros((*n_seg, y.ncols()));
                    for (k, &s) in seg.iter().enumerate() {
                        for j in 0..y.ncols() {
                            dot[[s, j]] += y[[k, j]] * g[[k, j]];
                        }
                    }
                    let mut d = Mat::zeros(y.dim());
                    for (k, &s) in seg.iter().enumerate() {
                        for j in 0..y.ncols() {
                            d[[k, j]] = y[[k, j]] * (g[[k, j]] - dot[[s, j]]);
                        }
                    }
                    send(*a, d);
                }
                Op::SpMM(m, a) => send(*a, m.t_matmul(&g)),
                Op::LogSoftmax(a) => {
                    let y = &node.value;
                    let mut d = g.clone();
                    for (mut drow, (grow, yrow)) in d.rows_mut().into_iter().zip(g.rows().into_iter().zip(y.rows())) {
                        let total = grow.sum();
                        Zip::from(&mut drow).and(&yrow).for_each(|dv, &yv| *dv -= yv.exp() * total);
                    }
                    send(*a, d);
                }
                Op::Nll(a, targets) => {
                    let x = val(*a);
                    let mut d = Mat::zeros(x.dim());
                    let k = g[[0, 0]] / targets.len() as f64;
                    for (i, &t) in targets.iter().enumerate() {
                        d[[i, t]] -= k;
                    }
                    send(*a, d);
                }
                Op::Sum(a) => send(*a, Mat::from_elem(val(*a).dim(), g[[0, 0]])),
            }
        }
        Ok(out)
    }
}
