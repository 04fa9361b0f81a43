use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use super::facts::{Background, Example};
use super::modes::{ArgMode, STAR_RECALL_CAP};
use super::{Arg, Clause, IlpError, Literal, Value};

/// The most specific clause for one example, within the mode language.
#[derive(Clone, Debug, PartialEq)]
pub struct BottomClause {
    pub clause: Clause,
    pub example: Example,
    pub depth: usize,
}

/// Saturates `e` against its molecule's facts for `depth` layers and
/// variabilises the result: equal (type, value) pairs share a variable and
/// `#` arguments stay constant. The head variable `A` is the molecule.
pub fn build_bottom_clause(bg: &Background, e: &Example, depth: usize) -> Result<BottomClause, IlpError> {
    if depth == 0 {
        return Err(IlpError::ZeroDepth);
    }
    let store = bg.store(&e.mol).ok_or_else(|| IlpError::UnknownMolecule(e.mol.clone()))?;
    let head_mode = &bg.modes.head;
    if head_mode.args.len() != 2 {
        return Err(IlpError::Modes("head mode must have the form class(+mol,#class)".into()));
    }
    let head_ground = [Value::atom(&e.mol), Value::atom(&e.class)];

    let mut available: HashMap<Arc<str>, HashSet<Value>> = HashMap::new();
    for (m, v) in head_mode.args.iter().zip(&head_ground) {
        if m.mode != ArgMode::Constant {
            available.entry(m.ty.clone()).or_default().insert(v.clone());
        }
    }

    let mut ground: Vec<(usize, &[Value])> = Vec::new();
    let mut seen: HashSet<(usize, &[Value])> = HashSet::new();
    let mut per_input: HashMap<(usize, Vec<&Value>), usize> = HashMap::new();
    for _layer in 0..depth {
        let mut fresh: Vec<(Arc<str>, Value)> = Vec::new();
        let before = ground.len();
        for (mi, mode) in bg.modes.body.iter().enumerate() {
            let mut taken = 0usize;
            for fact in store.facts(&mode.pred, mode.args.len()) {
                let inputs_ok = mode
                    .args
                    .iter()
                    .zip(fact)
                    .all(|(a, v)| a.mode != ArgMode::Input || available.get(&a.ty).is_some_and(|s| s.contains(v)));
                if !inputs_ok || seen.contains(&(mi, fact.as_slice())) {
                    continue;
                }
                match mode.recall {
                    None => {
                        if taken >= STAR_RECALL_CAP {
                            break;
                        }
                    }
                    Some(r) => {
                        let key: Vec<&Value> =
                            mode.args.iter().zip(fact).filter(|(a, _)| a.mode == ArgMode::Input).map(|(_, v)| v).collect();
                        let c = per_input.entry((mi, key)).or_default();
                        if *c >= r {
                            continue;
                        }
                        *c += 1;
                    }
                }
                taken += 1;
                seen.insert((mi, fact.as_slice()));
                ground.push((mi, fact.as_slice()));
                for (a, v) in mode.args.iter().zip(fact) {
                    if a.mode == ArgMode::Output {
                        fresh.push((a.ty.clone(), v.clone()));
                    }
                }
            }
        }
        for (ty, v) in fresh {
            available.entry(ty).or_default().insert(v);
        }
        if ground.len() == before {
            break;
        }
    }

    let mut vars: HashMap<(Arc<str>, Value), usize> = HashMap::new();
    let mut var_types: Vec<Arc<str>> = Vec::new();
    let mut var_of = |ty: &Arc<str>, v: &Value, var_types: &mut Vec<Arc<str>>| -> usize {
        *vars.entry((ty.clone(), v.clone())).or_insert_with(|| {
            var_types.push(ty.clone());
            var_types.len() - 1
        })
    };
    let head_args = head_mode
        .args
        .iter()
        .zip(&head_ground)
        .map(|(m, v)| match m.mode {
            ArgMode::Constant => Arg::Const(v.clone()),
            _ => Arg::Var(var_of(&m.ty, v, &mut var_types)),
        })
        .collect();
    let head = Literal::new(&head_mode.pred, head_args);
    let body = ground
        .iter()
        .map(|&(mi, fact)| {
            let mode = &bg.modes.body[mi];
            let args = mode
                .args
                .iter()
                .zip(fact)
                .map(|(m, v)| match m.mode {
                    ArgMode::Constant => Arg::Const(v.clone()),
                    _ => Arg::Var(var_of(&m.ty, v, &mut var_types)),
                })
                .collect();
            Literal::new(&mode.pred, args)
        })
        .collect();
    Ok(BottomClause { clause: Clause { head, body, var_types }, example: e.clone(), depth })
}

/// Whether each input variable of every body literal is bound by the head
/// or by an output of an earlier literal.
pub(crate) fn chaining_closed(clause: &Clause, bg_modes: &super::modes::ModeSet) -> bool {
    let mut bound: BTreeSet<usize> = clause.head.vars().collect();
    for lit in &clause.body {
        let Some(mode) = bg_modes.body_mode(&lit.pred, lit.args.len()) else { return false };
        for (m, a) in mode.args.iter().zip(&lit.args) {
            if m.mode == ArgMode::Input {
                if let Arg::Var(v) = a {
                    if !bound.contains(v) {
                        return false;
                    }
                }
            }
        }
        bound.extend(lit.vars());
    }
    true
}
