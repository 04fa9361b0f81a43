use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bottom::{build_bottom_clause, BottomClause};
use super::facts::{first_solution, var_count, Background, Example, FactStore, Outcome, QueryBudget};
use super::modes::{ArgMode, ModeSet};
use super::sample::{redundant, sample_clause, ClauseSampler};
use super::{is_vertex_type, Arg, Clause, IlpError, Literal, Value};
use crate::graph::{LabelSymbol, VertexId};
use crate::prolog::{self, Term};

#[derive(Clone, Debug, PartialEq)]
pub struct LearnConfig {
    pub max_draws: usize,
    pub depth: usize,
    pub sampler: ClauseSampler,
    pub seed: u64,
    pub budget: QueryBudget,
    /// Relation names are `<prefix>_<i>`.
    pub prefix: String,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            max_draws: 100,
            depth: 2,
            sampler: ClauseSampler::default(),
            seed: 0,
            budget: QueryBudget::default(),
            prefix: "newr".into(),
        }
    }
}

/// `NewR(x) :- Cp(x)` built from a drawn `class(x, c) :- Cp(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedRelation {
    pub name: String,
    /// The class constant of the clause the relation came from.
    pub class: String,
    /// The drawn clause, variables renumbered by first occurrence; variable 0
    /// is the molecule.
    pub clause: Clause,
    /// Vertex-typed body variables, in order of first occurrence.
    pub vars: Vec<usize>,
}

impl LearnedRelation {
    fn from_clause(name: String, clause: &Clause) -> Self {
        let clause = renumber(clause);
        let class = match clause.head.args.get(1) {
            Some(Arg::Const(v)) => v.as_atom().unwrap_or_default().to_string(),
            _ => String::new(),
        };
        let vars = clause.vertex_vars();
        Self { name, class, clause, vars }
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn symbol(&self) -> LabelSymbol {
        LabelSymbol::relation(&self.name, self.arity() as u32)
    }

    /// `name(Mol, x1, .., xn) :- body.`
    pub fn definition(&self) -> Clause {
        let mut args = vec![Arg::Var(0)];
        args.extend(self.vars.iter().map(|&v| Arg::Var(v)));
        Clause { head: Literal::new(&self.name, args), body: self.clause.body.clone(), var_types: self.clause.var_types.clone() }
    }
}

/// Renumbers variables by first occurrence, head first.
fn renumber(c: &Clause) -> Clause {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut types = Vec::new();
    let mut lit = |l: &Literal| Literal {
        pred: l.pred.clone(),
        args: l
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => Arg::Var(*map.entry(*v).or_insert_with(|| {
                    types.push(c.var_types.get(*v).cloned().unwrap_or_else(|| Arc::from("")));
                    types.len() - 1
                })),
                other => other.clone(),
            })
            .collect(),
    };
    let head = lit(&c.head);
    let body = c.body.iter().map(&mut lit).collect();
    Clause { head, body, var_types: types }
}

/// Whether the body of `c` holds in `e`'s molecule with the head's first
/// argument bound to the molecule. Budget exhaustion counts as not covered.
pub(crate) fn covers(c: &Clause, e: &Example, bg: &Background, budget: QueryBudget) -> bool {
    let Some(store) = bg.store(&e.mol) else { return false };
    let n = var_count(std::iter::once(&c.head).chain(&c.body));
    let mut init = vec![None; n];
    if let Some(Arg::Var(v)) = c.head.args.first() {
        init[*v] = Some(Value::atom(&e.mol));
    }
    matches!(first_solution(&c.body, init, store, budget), Outcome::Found(_))
}

/// Covered examples split by whether their class matches the clause head's
/// class constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Coverage {
    pub pos: usize,
    pub neg: usize,
}

pub fn clause_coverage(c: &Clause, examples: &[Example], bg: &Background) -> Coverage {
    let class = match c.head.args.get(1) {
        Some(Arg::Const(v)) => v.as_atom().map(str::to_string),
        _ => None,
    };
    let mut cov = Coverage::default();
    for e in examples {
        if covers(c, e, bg, QueryBudget::default()) {
            if class.as_deref() == Some(e.class.as_str()) {
                cov.pos += 1;
            } else {
                cov.neg += 1;
            }
        }
    }
    cov
}

/// The relation-learning loop: draw an example with replacement, saturate,
/// sample a clause, and keep it as a new relation unless it is
/// subsumption-equivalent to an earlier one. Every iteration consumes a draw.
/// Clauses without vertex-typed variables cannot label vertices and are not
/// kept.
pub fn learn_rels(bg: &Background, examples: &[Example], cfg: &LearnConfig) -> Result<Vec<LearnedRelation>, IlpError> {
    if examples.is_empty() || cfg.max_draws == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let reserved = bg.symbols();
    let mut bottoms: HashMap<usize, BottomClause> = HashMap::new();
    let mut drawn: Vec<Clause> = Vec::new();
    let mut out = Vec::new();
    let mut i = 1usize;
    let mut draws = 0usize;
    while draws < cfg.max_draws {
        let ei = rng.gen_range(0..examples.len());
        if !bottoms.contains_key(&ei) {
            bottoms.insert(ei, build_bottom_clause(bg, &examples[ei], cfg.depth)?);
        }
        let bottom = &bottoms[&ei];
        let c = sample_clause(bottom, &cfg.sampler, bg, examples, &mut rng);
        if !c.vertex_vars().is_empty() && !redundant(&c, &drawn) {
            let name = loop {
                let n = format!("{}_{i}", cfg.prefix);
                if !reserved.contains(&n) {
                    break n;
                }
                i += 1;
            };
            out.push(LearnedRelation::from_clause(name, &c));
            drawn.push(c);
            i += 1;
        }
        draws += 1;
    }
    Ok(out)
}

/// Evaluates `r` on one molecule and returns the vertices bound to its
/// vertex-typed variables in the first solution, atom sets expanded.
pub fn eval_relation_on_graph(r: &LearnedRelation, store: &FactStore, budget: QueryBudget) -> Option<BTreeSet<VertexId>> {
    let n = var_count(std::iter::once(&r.clause.head).chain(&r.clause.body));
    let mut init = vec![None; n.max(1)];
    init[0] = Some(Value::atom(store.mol()));
    match first_solution(&r.clause.body, init, store, budget) {
        Outcome::Found(binding) => {
            let mut out = BTreeSet::new();
            for &v in &r.vars {
                match &binding[v] {
                    Some(Value::Atom(a)) => out.extend(a.parse::<VertexId>().ok()),
                    Some(Value::List(items)) => out.extend(items.iter().filter_map(|s| s.parse::<VertexId>().ok())),
                    None => {}
                }
            }
            (!out.is_empty()).then_some(out)
        }
        Outcome::NotFound => None,
        Outcome::Exhausted => {
            log::warn!("relation {} exceeded its search budget on {}", r.name, store.mol());
            None
        }
    }
}

/// Relation definitions followed by `relation_class/2` facts.
pub fn write_relations(rels: &[LearnedRelation]) -> String {
    let mut out = String::new();
    for r in rels {
        let _ = writeln!(out, "{}", r.definition());
    }
    for r in rels {
        let _ = writeln!(out, "relation_class({},{}).", r.name, Value::atom(&r.class));
    }
    out
}

fn term_to_arg(t: &Term, vars: &mut Vec<String>, line: usize) -> Result<Arg, IlpError> {
    let bad = || IlpError::RelationFile { line, msg: format!("unsupported term `{t}`") };
    Ok(match t {
        Term::Var(name) => Arg::Var(match vars.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                vars.push(name.clone());
                vars.len() - 1
            }
        }),
        Term::Atom(a) => Arg::Const(Value::atom(a)),
        Term::List(items) => Arg::Const(Value::list(
            items.iter().map(|i| match i {
                Term::Atom(a) => Ok(a.as_str()),
                _ => Err(bad()),
            }).collect::<Result<Vec<_>, _>>()?,
        )),
        Term::Compound(..) => return Err(bad()),
    })
}

/// Reads a file produced by [`write_relations`]. Variable types come from the
/// body modes.
pub fn parse_relations(text: &str, modes: &ModeSet) -> Result<Vec<LearnedRelation>, IlpError> {
    let sentences = prolog::parse_program(text).map_err(|e| IlpError::RelationFile { line: e.line, msg: e.msg })?;
    let mut classes: HashMap<String, String> = HashMap::new();
    let mut rels = Vec::new();
    for s in &sentences {
        let err = |msg: String| IlpError::RelationFile { line: s.line, msg };
        let Some(head) = &s.head else { return Err(err("unexpected directive".into())) };
        if head.functor() == Some(("relation_class", 2)) && s.body.is_empty() {
            let args = head.args();
            match (&args[0], &args[1]) {
                (Term::Atom(n), Term::Atom(c)) => classes.insert(n.clone(), c.clone()),
                _ => return Err(err(format!("bad fact `{head}`"))),
            };
            continue;
        }
        let Some((name, _)) = head.functor() else { return Err(err(format!("bad head `{head}`"))) };
        let Some(Term::Var(mol)) = head.args().first() else {
            return Err(err("relation head must start with the molecule variable".into()));
        };
        let mut names = vec![mol.clone()];
        let mut body = Vec::new();
        for t in &s.body {
            let Some((p, _)) = t.functor() else { return Err(err(format!("bad literal `{t}`"))) };
            let args = t.args().iter().map(|a| term_to_arg(a, &mut names, s.line)).collect::<Result<Vec<_>, _>>()?;
            body.push(Literal::new(p, args));
        }
        let head_args = head.args().iter().map(|a| term_to_arg(a, &mut names, s.line)).collect::<Result<Vec<_>, _>>()?;
        let mut var_types: Vec<Arc<str>> = vec![Arc::from(""); names.len()];
        var_types[0] = modes.head.args[0].ty.clone();
        for l in &body {
            let mode = modes
                .body_mode(&l.pred, l.args.len())
                .ok_or_else(|| err(format!("no mode for {}/{}", l.pred, l.args.len())))?;
            for (m, a) in mode.args.iter().zip(&l.args) {
                if let (Arg::Var(v), true) = (a, m.mode != ArgMode::Constant) {
                    var_types[*v] = m.ty.clone();
                }
            }
        }
        let vars: Vec<usize> = head_args[1..]
            .iter()
            .map(|a| match a {
                Arg::Var(v) if is_vertex_type(&var_types[*v]) => Ok(*v),
                _ => Err(err(format!("head argument `{a:?}` is not a vertex-typed variable"))),
            })
            .collect::<Result<_, _>>()?;
        rels.push(LearnedRelation {
            name: name.to_string(),
            class: String::new(),
            clause: Clause { head: Literal::new(&modes.head.pred, vec![Arg::Var(0)]), body, var_types },
            vars,
        });
    }
    for r in &mut rels {
        if let Some(c) = classes.get(&r.name) {
            r.class = c.clone();
            r.clause.head.args.push(Arg::Const(Value::atom(c)));
        }
    }
    Ok(rels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::Catalog;
    use crate::graph::fixtures::benzene;
    use crate::ilp::modes::default_modes;
    use crate::ilp::theta_subsumes;

    fn bg_for(graphs: &[crate::graph::LabeledGraph]) -> Background {
        Background::from_graphs(default_modes(), graphs, &Catalog::builtin(), 8)
    }

    #[test]
    fn zero_draws_and_empty_examples() {
        let bg = bg_for(&[benzene()]);
        let ex = vec![Example { mol: "benzene".into(), class: "pos".into() }];
        assert!(learn_rels(&bg, &ex, &LearnConfig { max_draws: 0, ..Default::default() }).unwrap().is_empty());
        assert!(learn_rels(&bg, &[], &LearnConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn single_example_draws_are_mostly_redundant() {
        let bg = bg_for(&[benzene()]);
        let ex = vec![Example { mol: "benzene".into(), class: "pos".into() }];
        let cfg = LearnConfig { max_draws: 50, seed: 4, sampler: ClauseSampler { max_body: 1, ..Default::default() }, ..Default::default() };
        let rels = learn_rels(&bg, &ex, &cfg).unwrap();
        // Single-literal bodies over benzene: bond(A,B,C,'C','C',1), the same
        // with bond type 2, and has_struc for the ring.
        assert!(rels.len() <= 3 && !rels.is_empty(), "{}", rels.len());
        for (i, a) in rels.iter().enumerate() {
            for b in &rels[i + 1..] {
                assert!(!(theta_subsumes(&a.clause, &b.clause) && theta_subsumes(&b.clause, &a.clause)));
            }
        }
    }

    #[test]
    fn head_only_clause_covers_everything() {
        let g = benzene();
        let bg = bg_for(std::slice::from_ref(&g));
        let ex = vec![
            Example { mol: "benzene".into(), class: "pos".into() },
            Example { mol: "benzene".into(), class: "neg".into() },
        ];
        let b = build_bottom_clause(&bg, &ex[0], 2).unwrap();
        assert_eq!(clause_coverage(&b.clause.head_only(), &ex, &bg), Coverage { pos: 1, neg: 1 });
        let mut impossible = b.clause.head_only();
        impossible.body.push(Literal::new(
            "has_struc",
            vec![Arg::Var(0), Arg::Var(1), Arg::Var(2), Arg::Const(Value::atom("no_such_structure"))],
        ));
        assert_eq!(clause_coverage(&impossible, &ex, &bg), Coverage { pos: 0, neg: 0 });
    }

    #[test]
    fn benzene_relation_evaluates_to_ring() {
        let g = benzene();
        let bg = bg_for(std::slice::from_ref(&g));
        let text = "newr_1(A,B) :- has_struc(A,B,C,benzene_ring).\nrelation_class(newr_1,pos).\n";
        let rels = parse_relations(text, &default_modes()).unwrap();
        assert_eq!(rels[0].arity(), 1);
        assert_eq!(rels[0].class, "pos");
        let store = bg.store("benzene").unwrap();
        let h = eval_relation_on_graph(&rels[0], store, QueryBudget::default());
        assert_eq!(h, Some((1..=6).collect()));
        assert_eq!(h, eval_relation_on_graph(&rels[0], store, QueryBudget::default()));
        let none = parse_relations("newr_2(A,B) :- has_struc(A,B,C,pyrrole_ring).", &default_modes()).unwrap();
        assert_eq!(eval_relation_on_graph(&none[0], store, QueryBudget::default()), None);
    }

    #[test]
    fn relations_round_trip_through_text() {
        let g = crate::chem::fixtures::indole();
        let bg = bg_for(std::slice::from_ref(&g));
        let ex = vec![Example { mol: "indole".into(), class: "pos".into() }];
        let rels = learn_rels(&bg, &ex, &LearnConfig { max_draws: 30, seed: 1, ..Default::default() }).unwrap();
        assert!(!rels.is_empty());
        let text = write_relations(&rels);
        let back = parse_relations(&text, &default_modes()).unwrap();
        assert_eq!(back, rels);
        assert!(parse_relations("newr_1(A,B) :- unknown(A,B).", &default_modes()).is_err());
    }

    #[test]
    fn names_are_fresh() {
        let bg = bg_for(&[benzene()]);
        let ex = vec![Example { mol: "benzene".into(), class: "pos".into() }];
        let cfg = LearnConfig { max_draws: 10, prefix: "bond".into(), ..Default::default() };
        for r in learn_rels(&bg, &ex, &cfg).unwrap() {
            assert!(!bg.symbols().contains(&r.name));
        }
    }
}
