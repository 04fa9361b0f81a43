use std::collections::{BTreeSet, HashMap};

use crate::graph::LabelSymbol;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("catalog entry `{entry}` names unknown parent `{parent}`")]
    UnknownParent { entry: String, parent: String },
    #[error("catalog hierarchy has a cycle through `{0}`")]
    Cycle(String),
    #[error("duplicate catalog entry `{0}`")]
    Duplicate(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeteroRule {
    /// Every ring atom is carbon.
    None,
    /// Exactly `count` atoms of `element`, all others carbon.
    Exactly { element: String, count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BondRule {
    /// All bonds aromatic, or a Kekulé pattern of non-adjacent double bonds.
    Aromatic,
    /// All bonds single.
    Single,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RingRule {
    pub size: Option<usize>,
    pub hetero: Option<HeteroRule>,
    pub bonds: Option<BondRule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomTest {
    Any,
    Element(String),
    Type(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternAtom {
    pub alternatives: Vec<AtomTest>,
    pub degree: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternBond {
    pub a: usize,
    pub b: usize,
    pub bond: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPattern {
    pub atoms: Vec<PatternAtom>,
    pub bonds: Vec<PatternBond>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Matcher {
    Abstract,
    Ring(RingRule),
    Group(GroupPattern),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: String,
    pub label: String,
    pub matcher: Matcher,
    pub parents: Vec<String>,
}

impl CatalogEntry {
    pub fn is_size_template(&self) -> bool {
        self.name.contains("{n}")
    }

    /// Structure-type name for an instance of `len` atoms.
    pub fn type_name(&self, len: usize) -> String {
        self.name.replace("{n}", &len.to_string())
    }

    pub fn label_name(&self, len: usize) -> String {
        self.label.replace("{n}", &len.to_string())
    }
}

/// A list of structure definitions with parent links forming an acyclic
/// hierarchy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    by_name: HashMap<String, usize>,
}

const DEFAULT_CATALOG: &str = include_str!("../../data/default.catalog");

fn parse_atom(tok: &str) -> Result<PatternAtom, String> {
    let (tests, degree) = match tok.split_once('^') {
        Some((t, d)) => (t, Some(d.parse::<usize>().map_err(|_| format!("bad degree in `{tok}`"))?)),
        None => (tok, None),
    };
    let alternatives = tests
        .split('|')
        .map(|t| match t {
            "" => Err(format!("empty atom test in `{tok}`")),
            "*" => Ok(AtomTest::Any),
            t if t.starts_with('#') => Ok(AtomTest::Element(t[1..].to_ascii_lowercase())),
            t => Ok(AtomTest::Type(t.to_ascii_lowercase())),
        })
        .collect::<Result<_, _>>()?;
    Ok(PatternAtom { alternatives, degree })
}

fn parse_bond(tok: &str, n_atoms: usize) -> Result<PatternBond, String> {
    let bad = || format!("bad bond `{tok}`");
    let (pair, bond) = match tok.split_once(':') {
        Some((p, b)) => (p, Some(b.to_string())),
        None => (tok, None),
    };
    let (a, b) = pair.split_once('-').ok_or_else(bad)?;
    let a: usize = a.parse().map_err(|_| bad())?;
    let b: usize = b.parse().map_err(|_| bad())?;
    if a >= n_atoms || b >= n_atoms || a == b {
        return Err(bad());
    }
    Ok(PatternBond { a, b, bond })
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            // `#` also introduces element tests, so it is a comment only at line start.
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |msg: String| CatalogError::Parse { line, msg };
            let mut toks = trimmed.split_whitespace();
            let name = toks.next().unwrap().to_string();
            let kind = toks.next().ok_or_else(|| err("missing kind".into()))?;
            let mut params: HashMap<&str, &str> = HashMap::new();
            for t in toks {
                let (k, v) = t.split_once('=').ok_or_else(|| err(format!("expected key=value, found `{t}`")))?;
                if params.insert(k, v).is_some() {
                    return Err(err(format!("repeated key `{k}`")));
                }
            }
            let mut take = |k: &str| params.remove(k);
            let label = take("label").unwrap_or(&name).to_string();
            let parents = take("parents")
                .map(|p| p.split(',').map(str::to_string).collect())
                .unwrap_or_default();
            let matcher = match kind {
                "class" => Matcher::Abstract,
                "ring" => {
                    let size = take("size")
                        .map(|s| s.parse::<usize>().map_err(|_| err(format!("bad size `{s}`"))))
                        .transpose()?;
                    let hetero = match take("hetero") {
                        None => None,
                        Some("none") => Some(HeteroRule::None),
                        Some(h) => {
                            let (e, c) = h.split_once(':').ok_or_else(|| err(format!("bad hetero `{h}`")))?;
                            let count = c.parse().map_err(|_| err(format!("bad hetero `{h}`")))?;
                            Some(HeteroRule::Exactly { element: e.to_ascii_lowercase(), count })
                        }
                    };
                    let bonds = match take("bonds") {
                        None => None,
                        Some("aromatic") => Some(BondRule::Aromatic),
                        Some("single") => Some(BondRule::Single),
                        Some(b) => return Err(err(format!("bad bonds rule `{b}`"))),
                    };
                    Matcher::Ring(RingRule { size, hetero, bonds })
                }
                "group" => {
                    let atoms: Vec<PatternAtom> = take("atoms")
                        .ok_or_else(|| err("group needs atoms=".into()))?
                        .split(',')
                        .map(parse_atom)
                        .collect::<Result<_, _>>()
                        .map_err(err)?;
                    let bonds = match take("bonds") {
                        Some(b) => b.split(',').map(|t| parse_bond(t, atoms.len())).collect::<Result<_, _>>().map_err(err)?,
                        None => Vec::new(),
                    };
                    Matcher::Group(GroupPattern { atoms, bonds })
                }
                other => return Err(err(format!("unknown kind `{other}`"))),
            };
            if let Some(k) = params.keys().next() {
                return Err(err(format!("unknown key `{k}`")));
            }
            entries.push(CatalogEntry { name, label, matcher, parents });
        }
        Self::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<CatalogEntry>) -> Result<Self, CatalogError> {
        let mut by_name = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if by_name.insert(e.name.clone(), i).is_some() {
                return Err(CatalogError::Duplicate(e.name.clone()));
            }
        }
        for e in &entries {
            if let Some(p) = e.parents.iter().find(|p| !by_name.contains_key(*p)) {
                return Err(CatalogError::UnknownParent { entry: e.name.clone(), parent: p.clone() });
            }
        }
        let cat = Self { entries, by_name };
        // Depth-first colouring to reject cycles.
        let mut state = vec![0u8; cat.entries.len()];
        fn visit(cat: &Catalog, i: usize, state: &mut [u8]) -> Result<(), CatalogError> {
            match state[i] {
                1 => return Err(CatalogError::Cycle(cat.entries[i].name.clone())),
                2 => return Ok(()),
                _ => {}
            }
            state[i] = 1;
            for p in &cat.entries[i].parents {
                visit(cat, cat.by_name[p], state)?;
            }
            state[i] = 2;
            Ok(())
        }
        for i in 0..cat.entries.len() {
            visit(&cat, i, &mut state)?;
        }
        Ok(cat)
    }

    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CATALOG).expect("built-in catalog parses")
    }

    pub fn builtin_text() -> &'static str {
        DEFAULT_CATALOG
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.by_name.get(name).map(|&i| &self.entries[i])
    }

    /// Finds the entry that produced structure type `type_name`, resolving
    /// size templates such as `ring{n}`.
    pub fn entry_for_type(&self, type_name: &str) -> Option<&CatalogEntry> {
        self.get(type_name).or_else(|| {
            self.entries.iter().find(|e| {
                e.is_size_template() && {
                    let (pre, post) = e.name.split_once("{n}").unwrap();
                    type_name
                        .strip_prefix(pre)
                        .and_then(|r| r.strip_suffix(post))
                        .is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
                }
            })
        })
    }

    /// Transitive ancestors of `name`, nearest first, without duplicates.
    pub fn ancestors(&self, name: &str) -> Vec<&CatalogEntry> {
        let mut out: Vec<&CatalogEntry> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut frontier: Vec<&str> = self.entry_for_type(name).map(|e| e.parents.iter().map(String::as_str).collect()).unwrap_or_default();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for p in frontier {
                if seen.insert(p) {
                    let e = self.get(p).expect("parents resolve");
                    out.push(e);
                    next.extend(e.parents.iter().map(String::as_str));
                }
            }
            frontier = next;
        }
        out
    }

    /// Relation labels every concrete entry can produce, with size templates
    /// expanded over `3..=max_ring_len`.
    pub fn relation_symbols(&self, max_ring_len: usize) -> Vec<LabelSymbol> {
        let mut out = Vec::new();
        for e in &self.entries {
            match &e.matcher {
                Matcher::Abstract => {}
                Matcher::Group(p) => out.push(LabelSymbol::relation(&e.label_name(p.atoms.len()), p.atoms.len() as u32)),
                Matcher::Ring(r) => match r.size {
                    Some(n) => out.push(LabelSymbol::relation(&e.label_name(n), n as u32)),
                    None => out.extend((3..=max_ring_len).map(|n| LabelSymbol::relation(&e.label_name(n), n as u32))),
                },
            }
        }
        out
    }
}
