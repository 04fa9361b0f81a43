use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::modes::ModeSet;
use super::{Arg, Literal, Value};
use crate::chem::{Catalog, StructureAnalysis};
use crate::graph::{LabelSymbol, LabeledGraph, VertexId};

/// Ground facts about one molecule, grouped by predicate and sorted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactStore {
    mol: Arc<str>,
    preds: BTreeMap<(Arc<str>, usize), Vec<Vec<Value>>>,
}

impl FactStore {
    pub fn new(mol: &str) -> Self {
        Self { mol: mol.into(), preds: BTreeMap::new() }
    }

    pub fn mol(&self) -> &str {
        &self.mol
    }

    pub fn add(&mut self, pred: &str, args: Vec<Value>) {
        self.preds.entry((pred.into(), args.len())).or_default().push(args);
    }

    /// Sorts each predicate's facts and drops duplicates.
    pub fn finish(mut self) -> Self {
        for facts in self.preds.values_mut() {
            facts.sort();
            facts.dedup();
        }
        self
    }

    pub fn facts(&self, pred: &str, arity: usize) -> &[Vec<Value>] {
        self.preds.get(&(Arc::from(pred), arity)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.preds.keys().map(|(p, n)| (&**p, *n))
    }

    pub fn len(&self) -> usize {
        self.preds.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every atom occurring in any fact, list members included.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for facts in self.preds.values() {
            for f in facts {
                for v in f {
                    match v {
                        Value::Atom(a) => {
                            out.insert(&**a);
                        }
                        Value::List(items) => out.extend(items.iter().map(|s| &**s)),
                    }
                }
            }
        }
        out
    }

    /// Facts in `pred(args).` form, one per line.
    pub fn to_prolog(&self) -> String {
        let mut out = String::new();
        for ((p, _), facts) in &self.preds {
            for f in facts {
                let lit = Literal::new(p, f.iter().cloned().map(Arg::Const).collect());
                out.push_str(&format!("{lit}.\n"));
            }
        }
        out
    }
}

fn first_base(labels: &crate::graph::LabelSet) -> Option<&str> {
    labels.iter().find(|s| !s.is_relation()).map(LabelSymbol::name)
}

fn id_list(atoms: &BTreeSet<VertexId>) -> Value {
    Value::list(atoms.iter().map(|a| a.to_string()))
}

/// The background facts for a molecule: `bond/6` in both orientations,
/// `has_struc/4` for every detected structure, and `fused/5` and
/// `connected/5` in both argument orders.
pub fn molecule_facts(g: &LabeledGraph, analysis: &StructureAnalysis) -> FactStore {
    let mol = Value::atom(g.id());
    let mut store = FactStore::new(g.id());
    for (a, b) in g.edge_indices() {
        let (Some(ta), Some(tb)) = (first_base(g.labels_at(a)), first_base(g.labels_at(b))) else { continue };
        let Some(bt) = g.edge_labels_at(a, b).and_then(first_base) else { continue };
        let (u, v) = (g.vertices()[a].to_string(), g.vertices()[b].to_string());
        for (x, y, tx, ty) in [(&u, &v, ta, tb), (&v, &u, tb, ta)] {
            store.add(
                "bond",
                vec![mol.clone(), Value::atom(x), Value::atom(y), Value::atom(tx), Value::atom(ty), Value::atom(bt)],
            );
        }
    }
    let s = &analysis.structures;
    for d in s {
        store.add(
            "has_struc",
            vec![mol.clone(), id_list(&d.atoms), Value::atom(&d.length.to_string()), Value::atom(&d.struc_type)],
        );
    }
    for (pred, pairs) in [("fused", &analysis.fused), ("connected", &analysis.connected)] {
        for &(i, j) in pairs {
            for (x, y) in [(i, j), (j, i)] {
                store.add(
                    pred,
                    vec![
                        mol.clone(),
                        Value::atom(&s[x].struc_type),
                        id_list(&s[x].atoms),
                        Value::atom(&s[y].struc_type),
                        id_list(&s[y].atoms),
                    ],
                );
            }
        }
    }
    store.finish()
}

/// A labelled training instance: `class(mol, class)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Example {
    pub mol: String,
    pub class: String,
}

/// Modes plus one fact store per molecule.
#[derive(Clone, Debug)]
pub struct Background {
    pub modes: ModeSet,
    stores: Vec<FactStore>,
    index: HashMap<String, usize>,
}

impl Background {
    pub fn new(modes: ModeSet, stores: Vec<FactStore>) -> Self {
        let index = stores.iter().enumerate().map(|(i, s)| (s.mol().to_string(), i)).collect();
        Self { modes, stores, index }
    }

    /// Detects structures in every graph and builds its facts.
    pub fn from_graphs<'a>(
        modes: ModeSet,
        graphs: impl IntoIterator<Item = &'a LabeledGraph>,
        catalog: &Catalog,
        max_ring_len: usize,
    ) -> Self {
        let stores = graphs
            .into_iter()
            .map(|g| molecule_facts(g, &StructureAnalysis::new(g, catalog, max_ring_len)))
            .collect();
        Self::new(modes, stores)
    }

    pub fn store(&self, mol: &str) -> Option<&FactStore> {
        self.index.get(mol).map(|&i| &self.stores[i])
    }

    pub fn stores(&self) -> &[FactStore] {
        &self.stores
    }

    /// Predicate names and constants occurring anywhere in the background.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = BTreeSet::new();
        for s in &self.stores {
            out.extend(s.predicates().map(|(p, _)| p.to_string()));
            out.extend(s.atoms().into_iter().map(str::to_string));
        }
        out.extend(self.modes.body.iter().map(|m| m.pred.to_string()));
        out.insert(self.modes.head.pred.to_string());
        out
    }
}

/// Caps the number of unification attempts a single query may make.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryBudget {
    pub max_nodes: u64,
}

impl Default for QueryBudget {
    fn default() -> Self {
        Self { max_nodes: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Outcome {
    Found(Vec<Option<Value>>),
    NotFound,
    Exhausted,
}

fn arg_fixed(a: &Arg, bound: &[bool]) -> bool {
    match a {
        Arg::Const(_) => true,
        Arg::Var(v) => bound[*v],
    }
}

/// Groups literals into components linked by variables not bound up front,
/// each ordered so that literals sharing already-fixed arguments come first.
fn plan(body: &[Literal], bound: &[bool], store: &FactStore) -> Vec<Vec<usize>> {
    let n = body.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (i, l) in body.iter().enumerate() {
        for v in l.vars() {
            if bound[v] {
                continue;
            }
            match owner.get(&v) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
                None => {
                    owner.insert(v, i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups
        .into_values()
        .map(|members| {
            let mut fixed = bound.to_vec();
            let mut left = members;
            let mut order = Vec::with_capacity(left.len());
            while !left.is_empty() {
                let score = |i: usize, fixed: &[bool]| {
                    let l = &body[i];
                    let k = l.args.iter().filter(|a| arg_fixed(a, fixed)).count();
                    (k, std::cmp::Reverse(store.facts(&l.pred, l.args.len()).len()), std::cmp::Reverse(i))
                };
                let (pos, _) = left.iter().enumerate().max_by_key(|(_, &i)| score(i, &fixed)).unwrap();
                let i = left.remove(pos);
                for v in body[i].vars() {
                    fixed[v] = true;
                }
                order.push(i);
            }
            order
        })
        .collect()
}

struct Search<'a> {
    body: &'a [Literal],
    store: &'a FactStore,
    binding: Vec<Option<Value>>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// `Some(true)` on success, `Some(false)` on failure, `None` when the
    /// budget runs out.
    fn solve(&mut self, order: &[usize]) -> Option<bool> {
        let Some((&first, rest)) = order.split_first() else { return Some(true) };
        let lit = &self.body[first];
        let facts = self.store.facts(&lit.pred, lit.args.len());
        let mut trail: Vec<usize> = Vec::new();
        for fact in facts {
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            let mut ok = true;
            for (a, val) in lit.args.iter().zip(fact) {
                match a {
                    Arg::Const(c) => {
                        if c != val {
                            ok = false;
                            break;
                        }
                    }
                    Arg::Var(v) => match &self.binding[*v] {
                        Some(b) => {
                            if b != val {
                                ok = false;
                                break;
                            }
                        }
                        None => {
                            self.binding[*v] = Some(val.clone());
                            trail.push(*v);
                        }
                    },
                }
            }
            if ok {
                match self.solve(rest) {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
            }
            for v in trail.drain(..) {
                self.binding[v] = None;
            }
        }
        Some(false)
    }
}

/// First substitution satisfying `body` in `store`, extending `initial`.
/// Independent parts of the body are solved separately, so the result is
/// the first solution of each part under the fixed fact order.
pub(crate) fn first_solution(
    body: &[Literal],
    initial: Vec<Option<Value>>,
    store: &FactStore,
    budget: QueryBudget,
) -> Outcome {
    let bound: Vec<bool> = initial.iter().map(Option::is_some).collect();
    let mut search = Search { body, store, binding: initial, nodes: 0, budget: budget.max_nodes };
    for component in plan(body, &bound, store) {
        match search.solve(&component) {
            Some(true) => {}
            Some(false) => return Outcome::NotFound,
            None => return Outcome::Exhausted,
        }
    }
    Outcome::Found(search.binding)
}

/// Number of variables referenced by a clause's literals.
pub(crate) fn var_count<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> usize {
    lits.into_iter().flat_map(|l| l.vars()).max().map_or(0, |m| m + 1)
}
