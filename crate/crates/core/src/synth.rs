//! Synthetic molecule corpora with planted, class-determining substructures.
//!
//! - `ring-class`: an aromatic six-ring (class 1) or a saturated six-ring
//!   (class 0). Atom types are the same in both classes; only bond labels
//!   differ, so the class cannot be read from atom labels alone.
//! - `fused-class`: two aromatic six-rings sharing a bond (class 1) or joined
//!   by a single bond (class 0).
//! - `triangle-ilp`: an all-carbon three-ring (class 1) or four-ring
//!   (class 0) on a carbon tree.
//!
//! Sizes follow a uniform target of 18..=30 atoms (mean about 24).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, TruthRecord};
use crate::graph::{GraphBuilder, LabelSymbol, LabeledGraph, VertexId};
use crate::seed::derive_seed;

pub const MIN_ATOMS: usize = 18;
pub const MAX_ATOMS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    RingClass,
    FusedClass,
    TriangleIlp,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::RingClass, Task::FusedClass, Task::TriangleIlp];

    pub fn name(self) -> &'static str {
        match self {
            Task::RingClass => "ring-class",
            Task::FusedClass => "fused-class",
            Task::TriangleIlp => "triangle-ilp",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown task `{0}` (expected ring-class, fused-class or triangle-ilp)")]
pub struct UnknownTask(pub String);

impl FromStr for Task {
    type Err = UnknownTask;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| UnknownTask(s.to_string()))
    }
}

/// A generated dataset with its planting record.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub task: Task,
    pub dataset: Dataset,
    pub truth: Vec<TruthRecord>,
}

#[derive(Clone, Copy, PartialEq)]
enum Decor {
    Chain,
    Hydroxyl,
    Carbonyl,
    Amine,
    Ring5,
}

struct Mol {
    b: GraphBuilder,
    types: Vec<&'static str>,
    degree: Vec<usize>,
    max_degree: Vec<usize>,
    planted: Vec<(String, BTreeSet<VertexId>)>,
}

impl Mol {
    fn new(id: &str) -> Self {
        Self { b: GraphBuilder::new(id), types: Vec::new(), degree: Vec::new(), max_degree: Vec::new(), planted: Vec::new() }
    }

    fn len(&self) -> usize {
        self.types.len()
    }

    /// Atom ids start at 1.
    fn atom(&mut self, ty: &'static str, max_degree: usize) -> VertexId {
        self.types.push(ty);
        self.degree.push(0);
        self.max_degree.push(max_degree);
        let id = self.types.len() as VertexId;
        self.b.add_vertex(id, [LabelSymbol::base(ty)]);
        id
    }

    fn bond(&mut self, u: VertexId, v: VertexId, ty: &str) {
        self.degree[u as usize - 1] += 1;
        self.degree[v as usize - 1] += 1;
        self.b.add_edge(u, v, [LabelSymbol::base(ty)]);
    }

    fn ring(&mut self, n: usize, bond: &str, max_degree: usize) -> Vec<VertexId> {
        let atoms: Vec<VertexId> = (0..n).map(|_| self.atom("c", max_degree)).collect();
        for i in 0..n {
            self.bond(atoms[i], atoms[(i + 1) % n], bond);
        }
        atoms
    }

    fn plant(&mut self, kind: &str, atoms: impl IntoIterator<Item = VertexId>) {
        self.planted.push((kind.to_string(), atoms.into_iter().collect()));
    }

    /// Carbons that can take one more substituent.
    fn open_carbons(&self) -> Vec<VertexId> {
        (0..self.len())
            .filter(|&i| self.types[i] == "c" && self.degree[i] < self.max_degree[i])
            .map(|i| i as VertexId + 1)
            .collect()
    }

    fn decorate(&mut self, rng: &mut impl Rng, target: usize, kinds: &[(Decor, u32)]) {
        let mut ring5_used = false;
        while self.len() < target {
            let open = self.open_carbons();
            let Some(&at) = open.choose(rng) else { break };
            let room = target - self.len();
            let choice = kinds
                .choose_weighted(rng, |(k, w)| if *k == Decor::Ring5 && (ring5_used || room < 5) { 0 } else { *w })
                .map(|(k, _)| *k)
                .unwrap_or(Decor::Chain);
            match choice {
                Decor::Chain => {
                    let mut prev = at;
                    for _ in 0..rng.gen_range(1..=3.min(room)) {
                        let c = self.atom("c", 3);
                        self.bond(prev, c, "1");
                        prev = c;
                    }
                }
                Decor::Hydroxyl => {
                    let o = self.atom("o3", 1);
                    self.bond(at, o, "1");
                    self.plant("hydroxyl", [at, o]);
                }
                Decor::Carbonyl => {
                    let o = self.atom("o2", 1);
                    self.bond(at, o, "2");
                    self.plant("carbonyl", [at, o]);
                }
                Decor::Amine => {
                    let n = self.atom("n3", 1);
                    self.bond(at, n, "1");
                    self.plant("amine", [n]);
                }
                Decor::Ring5 => {
                    ring5_used = true;
                    let r = self.ring(5, "1", 3);
                    self.bond(at, r[0], "1");
                    self.plant("ring5", r);
                }
            }
        }
    }

    fn finish(self) -> (LabeledGraph, Vec<(String, BTreeSet<VertexId>)>) {
        (self.b.build().expect("generated graph is valid"), self.planted)
    }
}

const RICH: [(Decor, u32); 5] =
    [(Decor::Chain, 12), (Decor::Hydroxyl, 2), (Decor::Carbonyl, 2), (Decor::Amine, 2), (Decor::Ring5, 3)];
const CARBON_ONLY: [(Decor, u32); 1] = [(Decor::Chain, 1)];

fn molecule(task: Task, class: usize, id: &str, rng: &mut impl Rng) -> (LabeledGraph, Vec<(String, BTreeSet<VertexId>)>) {
    let target = rng.gen_range(MIN_ATOMS..=MAX_ATOMS);
    let mut m = Mol::new(id);
    match (task, class) {
        (Task::RingClass, 1) => {
            let r = m.ring(6, "ar", 3);
            m.plant("benzene_ring", r);
        }
        (Task::RingClass, _) => {
            let r = m.ring(6, "1", 3);
            m.plant("ring6", r);
        }
        (Task::FusedClass, 1) => {
            // Atoms 1..=6 and 5,6,7..=10 share the 5-6 bond.
            let a = m.ring(6, "ar", 3);
            let extra: Vec<VertexId> = (0..4).map(|_| m.atom("c", 3)).collect();
            m.bond(a[5], extra[0], "ar");
            m.bond(extra[0], extra[1], "ar");
            m.bond(extra[1], extra[2], "ar");
            m.bond(extra[2], extra[3], "ar");
            m.bond(extra[3], a[4], "ar");
            m.plant("benzene_ring", a.iter().copied());
            m.plant("benzene_ring", [a[4], a[5]].into_iter().chain(extra));
            m.plant("fused", (1..=10).collect::<Vec<_>>());
        }
        (Task::FusedClass, _) => {
            let a = m.ring(6, "ar", 3);
            let b = m.ring(6, "ar", 3);
            m.bond(a[3], b[0], "1");
            m.plant("benzene_ring", a.iter().copied());
            m.plant("benzene_ring", b.iter().copied());
            m.plant("connected", a.into_iter().chain(b));
        }
        (Task::TriangleIlp, 1) => {
            let r = m.ring(3, "1", 4);
            m.plant("ring3", r);
        }
        (Task::TriangleIlp, _) => {
            let r = m.ring(4, "1", 4);
            m.plant("ring4", r);
        }
    }
    let kinds: &[(Decor, u32)] = if task == Task::TriangleIlp { &CARBON_ONLY } else { &RICH };
    m.decorate(rng, target, kinds);
    m.finish()
}

/// `n` graphs, `ceil(n/2)` of class 1 and `floor(n/2)` of class 0 in shuffled
/// order. Graph ids are `m0001`, `m0002`, ...
pub fn generate(task: Task, n: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, task.name()));
    let mut classes: Vec<usize> = (0..n).map(|i| usize::from(i < n.div_ceil(2))).collect();
    classes.shuffle(&mut rng);
    let mut graphs = Vec::with_capacity(n);
    let mut truth = Vec::new();
    for (i, &class) in classes.iter().enumerate() {
        let id = format!("m{:04}", i + 1);
        let (g, planted) = molecule(task, class, &id, &mut rng);
        for (kind, atoms) in planted {
            truth.push(TruthRecord { graph: id.clone(), class, kind, atoms });
        }
        graphs.push(g);
    }
    Corpus { task, dataset: Dataset { name: task.name().to_string(), graphs, labels: classes }, truth }
}

/// `datasets` independent corpora named `<task>-01`, `<task>-02`, ...
pub fn generate_suite(task: Task, datasets: usize, graphs: usize, seed: u64) -> Vec<Corpus> {
    (1..=datasets)
        .map(|d| {
            let name = format!("{}-{d:02}", task.name());
            let mut c = generate(task, graphs, derive_seed(seed, &name));
            c.dataset.name = name;
            c
        })
        .collect()
}
