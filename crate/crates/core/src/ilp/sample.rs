use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::Rng;

use super::bottom::{chaining_closed, BottomClause};
use super::facts::{Background, Example, QueryBudget};
use super::learn::covers;
use super::modes::{ArgMode, ModeSet};
use super::{subsume::theta_subsumes, Arg, Clause};

/// Rejection attempts before falling back to repairing the last draw.
const MAX_ATTEMPTS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub enum SamplerKind {
    /// Uniform over chaining-closed subsets of the bottom clause's body.
    Uniform,
    /// Draws `candidates` uniform clauses, scores each by
    /// `max(pos - neg, 1)` on `sample_size` examples, and picks one with
    /// probability proportional to its score.
    Utility { candidates: usize, sample_size: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClauseSampler {
    pub kind: SamplerKind,
    pub max_body: usize,
}

impl Default for ClauseSampler {
    fn default() -> Self {
        Self { kind: SamplerKind::Uniform, max_body: 4 }
    }
}

impl ClauseSampler {
    pub fn utility() -> Self {
        Self { kind: SamplerKind::Utility { candidates: 20, sample_size: 20 }, max_body: 4 }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn with_body(bottom: &Clause, picks: &[usize]) -> Clause {
    Clause {
        head: bottom.head.clone(),
        body: picks.iter().map(|&i| bottom.body[i].clone()).collect(),
        var_types: bottom.var_types.clone(),
    }
}

/// Keeps, in order, the picked literals whose inputs are already bound.
fn repair(bottom: &Clause, picks: &[usize], modes: &ModeSet) -> Vec<usize> {
    let mut bound: Vec<usize> = bottom.head.vars().collect();
    let mut kept = Vec::new();
    for &i in picks {
        let lit = &bottom.body[i];
        let Some(mode) = modes.body_mode(&lit.pred, lit.args.len()) else { continue };
        let ok = mode.args.iter().zip(&lit.args).all(|(m, a)| match a {
            Arg::Var(v) if m.mode == ArgMode::Input => bound.contains(v),
            _ => true,
        });
        if ok {
            bound.extend(lit.vars());
            kept.push(i);
        }
    }
    kept
}

/// A uniform draw over chaining-closed body subsets of size at most
/// `max_body`: a size `k` with probability proportional to `C(n, k)`, then a
/// uniform `k`-subset, rejecting subsets that break chaining.
pub fn sample_uniform(bottom: &Clause, modes: &ModeSet, max_body: usize, rng: &mut impl Rng) -> Clause {
    let n = bottom.body.len();
    let kmax = max_body.min(n);
    if kmax == 0 {
        return bottom.head_only();
    }
    let sizes = WeightedIndex::new((0..=kmax).map(|k| binomial(n, k))).expect("positive weights");
    let mut picks = Vec::new();
    for _ in 0..MAX_ATTEMPTS {
        let k = sizes.sample(rng);
        picks = index::sample(rng, n, k).into_vec();
        picks.sort_unstable();
        let c = with_body(bottom, &picks);
        if chaining_closed(&c, modes) {
            return c;
        }
    }
    with_body(bottom, &repair(bottom, &picks, modes))
}

/// Draws a clause that θ-subsumes `bottom`.
pub fn sample_clause(
    bottom: &BottomClause,
    sampler: &ClauseSampler,
    bg: &Background,
    examples: &[Example],
    rng: &mut impl Rng,
) -> Clause {
    match sampler.kind {
        SamplerKind::Uniform => sample_uniform(&bottom.clause, &bg.modes, sampler.max_body, rng),
        SamplerKind::Utility { candidates, sample_size } => {
            let cands: Vec<Clause> =
                (0..candidates.max(1)).map(|_| sample_uniform(&bottom.clause, &bg.modes, sampler.max_body, rng)).collect();
            if examples.is_empty() {
                return cands.into_iter().next().unwrap();
            }
            let probe: Vec<&Example> = (0..sample_size.max(1)).map(|_| &examples[rng.gen_range(0..examples.len())]).collect();
            let weights: Vec<f64> = cands
                .iter()
                .map(|c| {
                    let class = c.head.args.get(1);
                    let (mut pos, mut neg) = (0i64, 0i64);
                    for e in &probe {
                        if covers(c, e, bg, QueryBudget::default()) {
                            let is_pos = matches!(class, Some(Arg::Const(v)) if v.as_atom() == Some(e.class.as_str()));
                            if is_pos {
                                pos += 1;
                            } else {
                                neg += 1;
                            }
                        }
                    }
                    (pos - neg).max(1) as f64
                })
                .collect();
            let pick = WeightedIndex::new(&weights).expect("positive weights").sample(rng);
            cands.into_iter().nth(pick).unwrap()
        }
    }
}

/// Whether `c` is subsumption-equivalent to some clause in `drawn`.
pub fn redundant(c: &Clause, drawn: &[Clause]) -> bool {
    drawn.iter().any(|d| theta_subsumes(c, d) && theta_subsumes(d, c))
}
