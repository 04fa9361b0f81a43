//! Ring perception, functional-group matching and the composite structure
//! relations (`has_struc`, `fused`, `connected`) over molecular graphs.
//!
//! Atom types are read from a vertex's base labels and bond types from an
//! edge's base labels. Element tests strip hybridisation suffixes, so `car`,
//! `c2` and `C` are all carbon.

mod catalog;

use std::collections::BTreeSet;

pub use catalog::{
    AtomTest, BondRule, Catalog, CatalogEntry, CatalogError, GroupPattern, HeteroRule, Matcher, PatternAtom,
    PatternBond, RingRule,
};

use crate::graph::{LabelSymbol, LabeledGraph, VertexId};

/// Rings longer than this are not reported by default.
pub const DEFAULT_MAX_RING_LEN: usize = 8;

/// Bond labels treated as aromatic.
pub const AROMATIC_BOND_LABELS: [&str; 2] = ["ar", "7"];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectedStructure {
    /// Structure type, e.g. `benzene_ring` or `hydroxyl`.
    pub struc_type: String,
    /// Relation label contributed to enrichment, e.g. `Benzene/6`.
    pub label: LabelSymbol,
    pub atoms: BTreeSet<VertexId>,
    pub length: usize,
    /// Canonical vertex sequence for rings.
    pub cycle: Option<Vec<VertexId>>,
}

/// Element symbol of an atom type: lower-cased, trailing digits removed and an
/// aromatic `ar` suffix dropped (`car` → `c`, `o2` → `o`, `N` → `n`).
pub fn element_of(atom_type: &str) -> String {
    let lower = atom_type.to_ascii_lowercase();
    let mut s = lower.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
    if s.len() > 2 && s.ends_with("ar") {
        s.truncate(s.len() - 2);
    }
    if s == "npl" {
        s.truncate(1);
    }
    s
}

fn base_labels(set: &BTreeSet<LabelSymbol>) -> impl Iterator<Item = &str> {
    set.iter().filter(|s| !s.is_relation()).map(LabelSymbol::name)
}

fn atom_element(g: &LabeledGraph, idx: usize) -> String {
    base_labels(g.labels_at(idx)).next().map(element_of).unwrap_or_default()
}

fn bond_has(g: &LabeledGraph, a: usize, b: usize, want: &str) -> bool {
    g.edge_labels_at(a, b).is_some_and(|l| base_labels(l).any(|t| t == want))
}

fn bond_is_aromatic(g: &LabeledGraph, a: usize, b: usize) -> bool {
    AROMATIC_BOND_LABELS.iter().any(|t| bond_has(g, a, b, t))
}

/// Lexicographically smallest rotation or reflection of `cycle`.
pub fn canonical_cycle(cycle: &[VertexId]) -> Vec<VertexId> {
    let n = cycle.len();
    let mut best: Option<Vec<VertexId>> = None;
    for start in 0..n {
        for dir in [1isize, -1] {
            let cand: Vec<VertexId> = (0..n)
                .map(|k| cycle[((start as isize + dir * k as isize).rem_euclid(n as isize)) as usize])
                .collect();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

/// Every simple cycle with 3..=`max_len` vertices, as canonical index
/// sequences, sorted.
pub fn simple_cycles(g: &LabeledGraph, max_len: usize) -> Vec<Vec<usize>> {
    assert!(max_len >= 3, "max ring length must be at least 3");
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(max_len);
    let mut on_path = vec![false; n];

    fn extend(
        g: &LabeledGraph,
        start: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let last = *path.last().unwrap();
        for &w in g.neighbours_of_index(last) {
            if w == start && path.len() >= 3 && path[1] < last {
                out.push(path.clone());
            } else if w > start && !on_path[w] && path.len() < max_len {
                on_path[w] = true;
                path.push(w);
                extend(g, start, max_len, path, on_path, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }

    for s in 0..n {
        path.push(s);
        on_path[s] = true;
        extend(g, s, max_len, &mut path, &mut on_path, &mut out);
        on_path[s] = false;
        path.pop();
    }
    out.sort();
    out
}

fn ring_matches(g: &LabeledGraph, cycle: &[usize], rule: &RingRule) -> bool {
    let n = cycle.len();
    if rule.size.is_some_and(|s| s != n) {
        return false;
    }
    if let Some(h) = &rule.hetero {
        let elements: Vec<String> = cycle.iter().map(|&i| atom_element(g, i)).collect();
        let ok = match h {
            HeteroRule::None => elements.iter().all(|e| e == "c"),
            HeteroRule::Exactly { element, count } => {
                elements.iter().filter(|e| *e == element).count() == *count
                    && elements.iter().all(|e| e == element || e == "c")
            }
        };
        if !ok {
            return false;
        }
    }
    let ring_bonds = || (0..n).map(|k| (cycle[k], cycle[(k + 1) % n]));
    match rule.bonds {
        None => true,
        Some(BondRule::Single) => ring_bonds().all(|(a, b)| bond_has(g, a, b, "1")),
        Some(BondRule::Aromatic) => {
            if ring_bonds().all(|(a, b)| bond_is_aromatic(g, a, b)) {
                return true;
            }
            // Kekulé form: only single/double bonds, no two doubles sharing an atom,
            // and ⌊n/2⌋ doubles.
            let mut doubles = Vec::with_capacity(n);
            for (a, b) in ring_bonds() {
                match (bond_has(g, a, b, "1"), bond_has(g, a, b, "2")) {
                    (true, false) => doubles.push(false),
                    (false, true) => doubles.push(true),
                    _ => return false,
                }
            }
            let adjacent = (0..n).any(|k| doubles[k] && doubles[(k + 1) % n]);
            !adjacent && doubles.iter().filter(|d| **d).count() == n / 2
        }
    }
}

/// Simple cycles of length 3..=`max_len`, each classified by the first ring
/// entry of `catalog` it satisfies. Cycles no entry accepts are omitted.
pub fn detect_rings(g: &LabeledGraph, catalog: &Catalog, max_len: usize) -> Vec<DetectedStructure> {
    let rules: Vec<(&CatalogEntry, &RingRule)> = catalog
        .entries()
        .iter()
        .filter_map(|e| match &e.matcher {
            Matcher::Ring(r) => Some((e, r)),
            _ => None,
        })
        .collect();
    let mut out = Vec::new();
    for cycle in simple_cycles(g, max_len) {
        let Some((entry, _)) = rules.iter().find(|(_, r)| ring_matches(g, &cycle, r)) else { continue };
        let ids: Vec<VertexId> = cycle.iter().map(|&i| g.vertices()[i]).collect();
        let n = ids.len();
        out.push(DetectedStructure {
            struc_type: entry.type_name(n),
            label: LabelSymbol::relation(&entry.label_name(n), n as u32),
            atoms: ids.iter().copied().collect(),
            length: n,
            cycle: Some(ids),
        });
    }
    out
}

fn atom_matches(g: &LabeledGraph, idx: usize, atom: &PatternAtom) -> bool {
    if atom.degree.is_some_and(|d| g.degree_at(idx) != d) {
        return false;
    }
    base_labels(g.labels_at(idx)).any(|t| {
        atom.alternatives.iter().any(|test| match test {
            AtomTest::Any => true,
            AtomTest::Element(e) => element_of(t) == *e,
            AtomTest::Type(ty) => t.eq_ignore_ascii_case(ty),
        })
    })
}

/// All distinct atom sets onto which `pattern` maps injectively, preserving
/// pattern bonds (the match need not be induced).
pub fn match_pattern(g: &LabeledGraph, pattern: &GroupPattern) -> BTreeSet<BTreeSet<usize>> {
    let k = pattern.atoms.len();
    let mut found = BTreeSet::new();
    let mut assign: Vec<usize> = Vec::with_capacity(k);

    fn search(g: &LabeledGraph, p: &GroupPattern, assign: &mut Vec<usize>, found: &mut BTreeSet<BTreeSet<usize>>) {
        let pos = assign.len();
        if pos == p.atoms.len() {
            found.insert(assign.iter().copied().collect());
            return;
        }
        let anchor = p.bonds.iter().find_map(|b| match (b.a, b.b) {
            (a, b) if b == pos && a < pos => Some(assign[a]),
            (a, b) if a == pos && b < pos => Some(assign[b]),
            _ => None,
        });
        let candidates: Vec<usize> = match anchor {
            Some(v) => g.neighbours_of_index(v).to_vec(),
            None => (0..g.vertex_count()).collect(),
        };
        for c in candidates {
            if assign.contains(&c) || !atom_matches(g, c, &p.atoms[pos]) {
                continue;
            }
            let bonds_ok = p.bonds.iter().all(|b| {
                let other = if b.a == pos && b.b < pos {
                    b.b
                } else if b.b == pos && b.a < pos {
                    b.a
                } else {
                    return true;
                };
                let o = assign[other];
                g.edge_labels_at(c, o).is_some() && b.bond.as_deref().is_none_or(|t| bond_has(g, c, o, t))
            });
            if bonds_ok {
                assign.push(c);
                search(g, p, assign, found);
                assign.pop();
            }
        }
    }

    if k > 0 {
        search(g, pattern, &mut assign, &mut found);
    }
    found
}

/// Every catalog group pattern match, once per distinct atom set, in catalog
/// order.
pub fn detect_functional_groups(g: &LabeledGraph, catalog: &Catalog) -> Vec<DetectedStructure> {
    let mut out = Vec::new();
    for entry in catalog.entries() {
        let Matcher::Group(p) = &entry.matcher else { continue };
        for set in match_pattern(g, p) {
            let atoms: BTreeSet<VertexId> = set.iter().map(|&i| g.vertices()[i]).collect();
            let n = atoms.len();
            out.push(DetectedStructure {
                struc_type: entry.type_name(n),
                label: LabelSymbol::relation(&entry.label_name(n), n as u32),
                atoms,
                length: n,
                cycle: None,
            });
        }
    }
    out
}

/// Rings followed by functional groups.
pub fn detect_structures(g: &LabeledGraph, catalog: &Catalog, max_len: usize) -> Vec<DetectedStructure> {
    let mut all = detect_rings(g, catalog, max_len);
    all.extend(detect_functional_groups(g, catalog));
    all
}

pub type StrucTuple = (BTreeSet<VertexId>, usize, String);
pub type StrucPair = (String, BTreeSet<VertexId>, String, BTreeSet<VertexId>);

/// `has_struc`: every detected structure as (atoms, length, type).
pub fn has_struc(g: &LabeledGraph, catalog: &Catalog, max_len: usize) -> BTreeSet<StrucTuple> {
    detect_structures(g, catalog, max_len)
        .into_iter()
        .map(|s| (s.atoms, s.length, s.struc_type))
        .collect()
}

/// Index pairs `(i, j)`, `i < j`, of structures sharing at least one atom.
pub fn fused_pairs(structures: &[DetectedStructure]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..structures.len() {
        for j in i + 1..structures.len() {
            if !structures[i].atoms.is_disjoint(&structures[j].atoms) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Index pairs `(i, j)`, `i < j`, of atom-disjoint structures joined by at
/// least one bond.
pub fn connected_pairs(g: &LabeledGraph, structures: &[DetectedStructure]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..structures.len() {
        for j in i + 1..structures.len() {
            let (a, b) = (&structures[i].atoms, &structures[j].atoms);
            if a.is_disjoint(b) && a.iter().any(|&u| b.iter().any(|&v| g.has_edge(u, v))) {
                out.push((i, j));
            }
        }
    }
    out
}

fn pairs_to_tuples(structures: &[DetectedStructure], pairs: &[(usize, usize)]) -> BTreeSet<StrucPair> {
    pairs
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (&structures[i], &structures[j]);
            (a.struc_type.clone(), a.atoms.clone(), b.struc_type.clone(), b.atoms.clone())
        })
        .collect()
}

pub fn fused(g: &LabeledGraph, catalog: &Catalog, max_len: usize) -> BTreeSet<StrucPair> {
    let s = detect_structures(g, catalog, max_len);
    pairs_to_tuples(&s, &fused_pairs(&s))
}

pub fn connected(g: &LabeledGraph, catalog: &Catalog, max_len: usize) -> BTreeSet<StrucPair> {
    let s = detect_structures(g, catalog, max_len);
    pairs_to_tuples(&s, &connected_pairs(g, &s))
}

/// All detections for one molecule, computed once.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureAnalysis {
    pub structures: Vec<DetectedStructure>,
    pub fused: Vec<(usize, usize)>,
    pub connected: Vec<(usize, usize)>,
}

impl StructureAnalysis {
    pub fn new(g: &LabeledGraph, catalog: &Catalog, max_len: usize) -> Self {
        let structures = detect_structures(g, catalog, max_len);
        let fused = fused_pairs(&structures);
        let connected = connected_pairs(g, &structures);
        Self { structures, fused, connected }
    }
}
