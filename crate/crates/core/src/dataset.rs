//! Labelled graph collections and their on-disk layout: a directory holding
//! `graphs.gdoc` (graph document), `labels.tsv` (`id<TAB>class`) and, for
//! generated corpora, `truth.tsv` (`id<TAB>class<TAB>kind<TAB>atoms`).

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::graph::{parse_graphs, serialize_graphs, GraphError, LabeledGraph, VertexId};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Graph { path: String, source: GraphError },
    #[error("{path} line {line}: {msg}")]
    Format { path: String, line: usize, msg: String },
}

/// Graphs with class indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<LabeledGraph>,
    pub labels: Vec<usize>,
}

/// A planted substructure: its kind and the atoms it occupies.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TruthRecord {
    pub graph: String,
    pub class: usize,
    pub kind: String,
    pub atoms: BTreeSet<VertexId>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1).max(2)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.num_classes()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            graphs: idx.iter().map(|&i| self.graphs[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn labels_tsv(&self) -> String {
        let mut out = String::new();
        for (g, l) in self.graphs.iter().zip(&self.labels) {
            let _ = writeln!(out, "{}\t{l}", g.id());
        }
        out
    }

    /// Pairs each graph with its class from `labels.tsv` content.
    pub fn from_parts(name: &str, graphs: Vec<LabeledGraph>, labels_tsv: &str, path: &str) -> Result<Self, DatasetError> {
        let mut map: HashMap<&str, usize> = HashMap::new();
        for (n, line) in labels_tsv.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fmt = |msg: String| DatasetError::Format { path: path.to_string(), line: n + 1, msg };
            let (id, class) = line.split_once('\t').ok_or_else(|| fmt("expected `id<TAB>class`".into()))?;
            let class = class.trim().parse().map_err(|_| fmt(format!("bad class `{class}`")))?;
            map.insert(id, class);
        }
        let labels = graphs
            .iter()
            .map(|g| {
                map.get(g.id()).copied().ok_or_else(|| DatasetError::Format {
                    path: path.to_string(),
                    line: 0,
                    msg: format!("no label for graph `{}`", g.id()),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { name: name.to_string(), graphs, labels })
    }

    pub fn write_dir(&self, dir: &Path, truth: &[TruthRecord]) -> Result<(), DatasetError> {
        let io = |p: &Path, e| DatasetError::Io { path: p.display().to_string(), source: e };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| io(&p, e))
        };
        write("graphs.gdoc", serialize_graphs(&self.graphs))?;
        write("labels.tsv", self.labels_tsv())?;
        if !truth.is_empty() {
            let mut t = String::new();
            for r in truth {
                let atoms: Vec<String> = r.atoms.iter().map(|a| a.to_string()).collect();
                let _ = writeln!(t, "{}\t{}\t{}\t{}", r.graph, r.class, r.kind, atoms.join(","));
            }
            write("truth.tsv", t)?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, DatasetError> {
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| DatasetError::Io { path: p.display().to_string(), source: e })
        };
        let gpath = dir.join("graphs.gdoc").display().to_string();
        let graphs = parse_graphs(&read("graphs.gdoc")?).map_err(|e| DatasetError::Graph { path: gpath, source: e })?;
        let name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::from_parts(&name, graphs, &read("labels.tsv")?, &dir.join("labels.tsv").display().to_string())
    }
}

pub fn read_truth(dir: &Path) -> Result<Vec<TruthRecord>, DatasetError> {
    let p = dir.join("truth.tsv");
    let path = p.display().to_string();
    let text = fs::read_to_string(&p).map_err(|e| DatasetError::Io { path: path.clone(), source: e })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let fmt = |msg: &str| DatasetError::Format { path: path.clone(), line: n + 1, msg: msg.into() };
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 4 {
                return Err(fmt("expected four fields"));
            }
            let atoms = f[3]
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| fmt("bad atom id")))
                .collect::<Result<_, _>>()?;
            Ok(TruthRecord {
                graph: f[0].into(),
                class: f[1].parse().map_err(|_| fmt("bad class"))?,
                kind: f[2].into(),
                atoms,
            })
        })
        .collect()
}
