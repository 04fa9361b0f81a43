use super::facts::var_count;
use super::{Arg, Clause, Literal};

fn bind<'a>(a: &Arg, target: &'a Arg, theta: &mut [Option<&'a Arg>], trail: &mut Vec<usize>) -> bool {
    match a {
        Arg::Const(_) => a == target,
        Arg::Var(v) => match theta[*v] {
            Some(t) => t == target,
            None => {
                theta[*v] = Some(target);
                trail.push(*v);
                true
            }
        },
    }
}

fn match_literal<'a>(l: &Literal, target: &'a Literal, theta: &mut [Option<&'a Arg>], trail: &mut Vec<usize>) -> bool {
    l.pred == target.pred
        && l.args.len() == target.args.len()
        && l.args.iter().zip(&target.args).all(|(a, t)| bind(a, t, theta, trail))
}

fn search<'a>(order: &[(usize, Vec<usize>)], c1: &Clause, c2: &'a Clause, theta: &mut [Option<&'a Arg>]) -> bool {
    let Some(((i, cands), rest)) = order.split_first() else { return true };
    let mut trail = Vec::new();
    for &j in cands {
        if match_literal(&c1.body[*i], &c2.body[j], theta, &mut trail) && search(rest, c1, c2, theta) {
            return true;
        }
        for v in trail.drain(..) {
            theta[v] = None;
        }
    }
    false
}

/// Whether some substitution θ maps `c1` into `c2`: heads equal and every
/// body literal of `c1θ` present in `c2`. Variables of `c2` are treated as
/// constants.
pub fn theta_subsumes(c1: &Clause, c2: &Clause) -> bool {
    let n = var_count(std::iter::once(&c1.head).chain(&c1.body));
    let mut theta: Vec<Option<&Arg>> = vec![None; n];
    let mut trail = Vec::new();
    if !match_literal(&c1.head, &c2.head, &mut theta, &mut trail) {
        return false;
    }
    // Fewest candidates first.
    let mut order: Vec<(usize, Vec<usize>)> = c1
        .body
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let cands = c2
                .body
                .iter()
                .enumerate()
                .filter(|(_, t)| {
                    t.pred == l.pred
                        && t.args.len() == l.args.len()
                        && l.args.iter().zip(&t.args).all(|(a, b)| !matches!(a, Arg::Const(_)) || a == b)
                })
                .map(|(j, _)| j)
                .collect::<Vec<_>>();
            (i, cands)
        })
        .collect();
    if order.iter().any(|(_, c)| c.is_empty()) {
        return false;
    }
    order.sort_by_key(|(i, c)| (c.len(), *i));
    search(&order, c1, c2, &mut theta)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::ilp::Value;
    use rand::{Rng, SeedableRng};

    fn c(s: &str) -> Arg {
        Arg::Const(Value::atom(s))
    }
    fn v(i: usize) -> Arg {
        Arg::Var(i)
    }
    fn clause(head: Vec<Arg>, body: Vec<(&str, Vec<Arg>)>) -> Clause {
        Clause {
            head: Literal::new("class", head),
            body: body.into_iter().map(|(p, a)| Literal::new(p, a)).collect(),
            var_types: Vec::new(),
        }
    }

    #[test]
    fn identity_and_subset() {
        let big = clause(vec![v(0), c("pos")], vec![("p", vec![v(0), v(1)]), ("q", vec![v(1), c("a")])]);
        let small = clause(vec![v(0), c("pos")], vec![("p", vec![v(0), v(1)])]);
        assert!(theta_subsumes(&small, &big));
        assert!(!theta_subsumes(&big, &small));
        assert!(theta_subsumes(&big, &big));
    }

    #[test]
    fn constant_clash() {
        let a = clause(vec![v(0), c("pos")], vec![("bond", vec![v(0), v(1), v(2), c("c"), c("c"), c("1")])]);
        let b = clause(vec![v(0), c("pos")], vec![("bond", vec![v(0), v(3), v(4), c("c"), c("o"), c("2")])]);
        assert!(!theta_subsumes(&a, &b));
        let other_class = clause(vec![v(0), c("neg")], vec![("bond", vec![v(0), v(1), v(2), c("c"), c("c"), c("1")])]);
        assert!(!theta_subsumes(&a, &other_class));
    }

    #[test]
    fn variables_may_collapse() {
        // p(X,Y), p(Y,Z) maps onto p(A,A).
        let path = clause(vec![v(0), c("pos")], vec![("p", vec![v(1), v(2)]), ("p", vec![v(2), v(3)])]);
        let lp = clause(vec![v(0), c("pos")], vec![("p", vec![v(1), v(1)])]);
        assert!(theta_subsumes(&path, &lp));
        assert!(!theta_subsumes(&lp, &path));
    }

    /// Exhaustive oracle: try every map from `c1`'s variables to the terms of
    /// `c2` and test literal-set inclusion directly.
    pub(crate) fn brute_force(c1: &Clause, c2: &Clause) -> bool {
        let mut terms: Vec<Arg> = Vec::new();
        for l in std::iter::once(&c2.head).chain(&c2.body) {
            for a in &l.args {
                if !terms.contains(a) {
                    terms.push(a.clone());
                }
            }
        }
        let vars: Vec<usize> = {
            let mut vs: Vec<usize> = std::iter::once(&c1.head).chain(&c1.body).flat_map(|l| l.vars()).collect();
            vs.sort_unstable();
            vs.dedup();
            vs
        };
        if terms.is_empty() {
            return vars.is_empty() && c1.head == c2.head && c1.body.iter().all(|l| c2.body.contains(l));
        }
        let apply = |l: &Literal, assign: &[usize]| Literal {
            pred: l.pred.clone(),
            args: l
                .args
                .iter()
                .map(|a| match a {
                    Arg::Var(x) => terms[assign[vars.iter().position(|y| y == x).unwrap()]].clone(),
                    other => other.clone(),
                })
                .collect(),
        };
        let mut assign = vec![0usize; vars.len()];
        loop {
            if apply(&c1.head, &assign) == c2.head && c1.body.iter().all(|l| c2.body.contains(&apply(l, &assign))) {
                return true;
            }
            let mut k = 0;
            loop {
                if k == assign.len() {
                    return false;
                }
                assign[k] += 1;
                if assign[k] < terms.len() {
                    break;
                }
                assign[k] = 0;
                k += 1;
            }
        }
    }

    /// Random clause with at most `max_lits` literals in total (head included).
    pub(crate) fn random_clause(rng: &mut impl Rng, max_lits: usize) -> Clause {
        let n_body = rng.gen_range(0..max_lits);
        let arg = |rng: &mut dyn rand::RngCore| {
            if rng.gen_bool(0.75) {
                Arg::Var(rng.gen_range(1..5))
            } else {
                Arg::Const(Value::atom(["a", "b"][rng.gen_range(0..2)]))
            }
        };
        let body = (0..n_body)
            .map(|_| {
                let (p, k) = [("p", 2), ("q", 1), ("r", 2)][rng.gen_range(0..3)];
                let mut args = vec![Arg::Var(0)];
                args.extend((1..=k).map(|_| arg(rng)));
                Literal::new(p, args)
            })
            .collect();
        Clause { head: Literal::new("class", vec![Arg::Var(0), c("pos")]), body, var_types: Vec::new() }
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut positives = 0;
        for _ in 0..400 {
            let a = random_clause(&mut rng, 4);
            let b = random_clause(&mut rng, 6);
            let fast = theta_subsumes(&a, &b);
            assert_eq!(fast, brute_force(&a, &b), "{a} vs {b}");
            positives += fast as usize;
        }
        assert!(positives > 20, "oracle test too one-sided: {positives}");
    }

    #[test]
    fn reflexive_and_transitive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let (a, b, c) = (random_clause(&mut rng, 3), random_clause(&mut rng, 4), random_clause(&mut rng, 6));
            assert!(theta_subsumes(&a, &a));
            if theta_subsumes(&a, &b) && theta_subsumes(&b, &c) {
                assert!(theta_subsumes(&a, &c));
            }
        }
    }
}
