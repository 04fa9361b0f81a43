//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vegnn_core::chem::{Catalog, DEFAULT_MAX_RING_LEN};
use vegnn_core::enrich::{Enricher, RelationSet};
use vegnn_core::graph::{parse_graph, parse_graphs, LabelSymbol};
use vegnn_core::ilp::{
    class_name, clause_coverage, default_modes, learn_rels, theta_subsumes, Arg, Background, Clause, Example, LearnConfig, Literal,
    Value,
};
use vegnn_core::synth::{generate, generate_suite, Task};
use vegnn_gnn::{readout, Batch, Conv, GnnConfig, GnnError, GraphTensor, Init, Mlp, Model, SagPool, Variant};
use vegnn_tensor::{check_gradients, ParamStore, Tape, TensorError, Var};
use vegnn_train::{
    median_seed_gain, parse_records_tsv, run_experiment1, run_experiment2, wilcoxon_signed_rank, Augmentation, ExperimentConfig,
    TrainConfig, GNN, VEGNN,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, d: usize, p: f64) -> GraphTensor {
    let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0));
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    GraphTensor { x, edges }
}

/// One-hot rows, as produced by label encoding.
fn labelled_graph(rng: &mut ChaCha8Rng, n: usize, d: usize, p: f64) -> GraphTensor {
    let mut g = random_graph(rng, n, d, p);
    g.x = Array2::from_shape_fn((n, d), |_| 0.0);
    for r in 0..n {
        g.x[[r, rng.gen_range(0..d)]] = 1.0;
    }
    g
}

fn permute(g: &GraphTensor, perm: &[usize]) -> GraphTensor {
    // Row i of the input becomes row perm[i].
    let mut x = g.x.clone();
    for (i, &p) in perm.iter().enumerate() {
        x.row_mut(p).assign(&g.x.row(i));
    }
    let edges = g.edges.iter().map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b]))).collect();
    GraphTensor { x, edges }
}

fn to_tensor_error(e: GnnError) -> TensorError {
    match e {
        GnnError::Tensor(e) => e,
        other => TensorError::Domain { op: "layer", msg: other.to_string() },
    }
}

/// `sum(out ⊙ w)` for a fixed random `w`, so every output entry matters.
fn weighted_sum(t: &mut Tape, out: Var, seed: u64) -> Result<Var, TensorError> {
    let (r, c) = t.value(out).dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Array2::from_shape_fn((r, c), |_| rng.gen_range(-1.0..1.0));
    let y = t.mul_const(out, Arc::new(w))?;
    Ok(t.sum(y))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (d, m) = (4, 4);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for trial in 0..20u64 {
        let n = rng.gen_range(1..=10);
        let g = random_graph(&mut rng, n, d, 0.35);
        let topo = Batch::new(&[&g]).topo;
        let mut components: Vec<(&str, f64)> = Vec::new();
        for v in Variant::ALL {
            let mut store = ParamStore::new();
            let input = store.add("input", g.x.clone());
            let mut init = Init { store: &mut store, seed: trial, prefix: "conv".into() };
            let conv = Conv::new(v, &mut init, d, d, m, (2, 2), 0.2);
            let check = check_gradients(&store, 1e-5, |t: &mut Tape, s| {
                let h = t.param(s, input);
                let out = conv.forward(t, s, h, &topo)?;
                weighted_sum(t, out, trial)
            })
            .unwrap();
            components.push((v.name(), check.max_rel_error));
        }
        let mut store = ParamStore::new();
        let input = store.add("input", g.x.clone());
        let mut init = Init { store: &mut store, seed: trial, prefix: "pool".into() };
        let pool = SagPool::new(&mut init, d, 0.5);
        let check = check_gradients(&store, 1e-5, |t: &mut Tape, s| {
            let h = t.param(s, input);
            let p = pool.forward(t, s, h, &topo).map_err(to_tensor_error)?;
            weighted_sum(t, p.h, trial)
        })
        .unwrap();
        components.push(("sag_pool", check.max_rel_error));

        let check = check_gradients(&store, 1e-5, |t: &mut Tape, s| {
            let h = t.param(s, input);
            let r = readout(t, h, &topo).map_err(to_tensor_error)?;
            weighted_sum(t, r, trial)
        })
        .unwrap();
        components.push(("readout", check.max_rel_error));

        let mut store = ParamStore::new();
        let emb = store.add("embedding", Array2::from_shape_fn((3, 2 * m), |_| rng.gen_range(-1.0..1.0)));
        let mut init = Init { store: &mut store, seed: trial, prefix: "mlp".into() };
        let mlp = Mlp::new(&mut init, m, 2, 0.5);
        // Zero biases put a dropped-out row exactly on a ReLU kink.
        let ids: Vec<_> = store.ids().collect();
        for id in ids {
            store.value_mut(id).mapv_inplace(|x| x + rng.gen_range(-0.1..0.1));
        }
        // A fixed dropout mask: the generator restarts on every evaluation.
        let check = check_gradients(&store, 1e-5, |t: &mut Tape, s| {
            let x = t.param(s, emb);
            let mut mask_rng = ChaCha8Rng::seed_from_u64(trial);
            let out = mlp.forward(t, s, x, true, &mut mask_rng)?;
            weighted_sum(t, out, trial)
        })
        .unwrap();
        components.push(("mlp", check.max_rel_error));
        for (name, e) in components {
            let w = worst.entry(name).or_insert(0.0);
            *w = w.max(e);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let max = worst.values().cloned().fold(0.0, f64::max);
    let detail: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    outcome(max < 1e-4 && secs < 120.0, format!("max relative error {max:.2e} over 20 graphs ({}); {secs:.1}s", detail.join(", ")))
}

fn run_cli(args: &[&str]) -> i32 {
    vegnn_cli::main_with_args(std::iter::once("vegnn").chain(args.iter().copied()))
}

const INDOLE: &str = "graph indole
v 1 C
v 2 C
v 3 C
v 4 C
v 5 C
v 6 C
v 7 N
v 8 C
v 9 C
e 1 2 1
e 2 3 2
e 3 4 1
e 4 5 2
e 5 6 1
e 6 1 2
e 2 7 1
e 7 8 1
e 8 9 2
e 9 3 1
";

fn criterion_2(dir: &Path) -> Outcome {
    let b6 = LabelSymbol::relation("Benzene", 6);
    let p5 = LabelSymbol::relation("Pyrrole", 5);
    let c = LabelSymbol::base("C");
    let n = LabelSymbol::base("N");
    let set = |xs: &[&LabelSymbol]| xs.iter().map(|s| (*s).clone()).collect::<BTreeSet<_>>();
    let mut want = BTreeMap::new();
    for v in [1, 4, 5, 6] {
        want.insert(v, set(&[&c, &b6]));
    }
    for v in [8, 9] {
        want.insert(v, set(&[&c, &p5]));
    }
    want.insert(7, set(&[&n, &p5]));
    for v in [2, 3] {
        want.insert(v, set(&[&c, &b6, &p5]));
    }

    let g = parse_graph(INDOLE).unwrap();
    let cat = Catalog::builtin();
    let rs = RelationSet::from_symbols([b6.clone(), p5.clone()]).unwrap();
    let enriched = Enricher::new(&cat).enrich_graph(&g, &rs);
    let got: BTreeMap<u64, BTreeSet<LabelSymbol>> =
        enriched.vertices().iter().map(|&v| (v as u64, enriched.labels(v).unwrap().clone())).collect();
    let want_u: BTreeMap<u64, BTreeSet<LabelSymbol>> = want.iter().map(|(k, v)| (*k as u64, v.clone())).collect();
    let lib_ok = got == want_u && enriched.edges().count() == g.edges().count();

    // The same through the command line with the default catalog.
    let doc = dir.join("indole.gdoc");
    std::fs::write(&doc, INDOLE).unwrap();
    let out = dir.join("indole.enriched.gdoc");
    let code = run_cli(&["enrich", doc.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    let cli_graph = parse_graph(&std::fs::read_to_string(&out).unwrap_or_default()).ok();
    let cli_ok = code == 0
        && cli_graph.is_some_and(|h| h.vertices().iter().all(|&v| want_u.get(&(v as u64)) == h.labels(v).ok()) && h.vertex_count() == 9);

    let facts = dir.join("b2.pl");
    std::fs::write(&facts, "bond(m1,27,24,o2,car,1).\n").unwrap();
    let ingested = dir.join("b2.gdoc");
    let code = run_cli(&["ingest", facts.to_str().unwrap(), "-o", ingested.to_str().unwrap()]);
    let gs = parse_graphs(&std::fs::read_to_string(&ingested).unwrap_or_default()).unwrap_or_default();
    let ingest_ok = code == 0
        && gs.len() == 1
        && gs[0].id() == "m1"
        && gs[0].vertices() == [24, 27]
        && gs[0].labels(27).ok() == Some(&set(&[&LabelSymbol::base("o2")]))
        && gs[0].labels(24).ok() == Some(&set(&[&LabelSymbol::base("car")]))
        && gs[0].edge_labels(27, 24) == Some(&set(&[&LabelSymbol::base("1")]));
    outcome(
        lib_ok && cli_ok && ingest_ok,
        format!("enrichment of the 9 label sets {}; command line {}; bond fact ingestion {}", ok(lib_ok), ok(cli_ok), ok(ingest_ok)),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "exact"
    } else {
        "MISMATCH"
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for v in Variant::ALL {
        let model = Model::new(GnnConfig::new(v, 8), 5, 5, 17);
        for _ in 0..100 {
            let n = rng.gen_range(1..=16);
            let g = labelled_graph(&mut rng, n, 5, 0.25);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let a = model.log_probs(&Batch::new(&[&g])).unwrap();
            let b = model.log_probs(&Batch::new(&[&permute(&g, &perm)])).unwrap();
            let d = (&a - &b).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            worst = worst.max(d);
        }
    }
    outcome(worst < 1e-6, format!("max |f(g) - f(pi g)| = {worst:.2e} over 100 pairs per variant"))
}

fn random_literal(rng: &mut ChaCha8Rng, vars: usize) -> Literal {
    let preds = [("p", 1), ("q", 2), ("r", 2), ("s", 3)];
    let (p, arity) = preds[rng.gen_range(0..preds.len())];
    let args = (0..arity)
        .map(|_| if rng.gen_bool(0.75) { Arg::Var(rng.gen_range(0..vars)) } else { Arg::Const(Value::atom(["a", "b"][rng.gen_range(0..2)])) })
        .collect();
    Literal::new(p, args)
}

fn clause(head_class: &str, body: Vec<Literal>) -> Clause {
    let mut c = Clause { head: Literal::new("class", vec![Arg::Var(0), Arg::Const(Value::atom(head_class))]), body, var_types: vec![] };
    let n = std::iter::once(&c.head).chain(&c.body).flat_map(|l| l.vars()).max().map_or(0, |m| m + 1);
    c.var_types = vec!["".into(); n];
    c
}

fn apply(l: &Literal, theta: &[Arg]) -> Literal {
    Literal::new(&l.pred, l.args.iter().map(|a| match a {
        Arg::Var(v) => theta[*v].clone(),
        c => c.clone(),
    }).collect())
}

/// Tries every map from the variables of `c1` to the terms of `c2`.
fn subsumes_by_enumeration(c1: &Clause, c2: &Clause) -> bool {
    let mut terms: BTreeSet<Arg> = BTreeSet::new();
    for l in std::iter::once(&c2.head).chain(&c2.body) {
        terms.extend(l.args.iter().cloned());
    }
    let terms: Vec<Arg> = terms.into_iter().collect();
    let n = std::iter::once(&c1.head).chain(&c1.body).flat_map(|l| l.vars()).max().map_or(0, |m| m + 1);
    let target: BTreeSet<Literal> = c2.body.iter().cloned().collect();
    let total = terms.len().pow(n as u32);
    (0..total).any(|mut code| {
        let theta: Vec<Arg> = (0..n)
            .map(|_| {
                let t = terms[code % terms.len()].clone();
                code /= terms.len();
                t
            })
            .collect();
        apply(&c1.head, &theta) == c2.head && c1.body.iter().all(|l| target.contains(&apply(l, &theta)))
    })
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut agree, mut positives) = (0, 0);
    for i in 0..500 {
        // At most 6 literals per clause, head included.
        let c1 = clause("pos", (0..rng.gen_range(0..=5)).map(|_| random_literal(&mut rng, 4)).collect());
        let c2 = if i % 2 == 0 {
            // An instance of c1 plus noise, so positives are common.
            let theta: Vec<Arg> = (0..4).map(|v| if v == 0 { Arg::Var(0) } else { Arg::Var(rng.gen_range(0..4)) }).collect();
            let mut body: Vec<Literal> = c1.body.iter().map(|l| apply(l, &theta)).collect();
            body.truncate(5);
            while body.len() < 5 && rng.gen_bool(0.5) {
                body.push(random_literal(&mut rng, 4));
            }
            if rng.gen_bool(0.2) && !body.is_empty() {
                body.remove(rng.gen_range(0..body.len()));
            }
            body.shuffle(&mut rng);
            clause(if rng.gen_bool(0.9) { "pos" } else { "neg" }, body)
        } else {
            clause("pos", (0..rng.gen_range(0..=5)).map(|_| random_literal(&mut rng, 4)).collect())
        };
        let fast = theta_subsumes(&c1, &c2);
        let slow = subsumes_by_enumeration(&c1, &c2);
        agree += usize::from(fast == slow);
        positives += usize::from(slow);
    }
    outcome(agree == 500, format!("{agree}/500 agree with exhaustive substitution search ({positives} subsuming pairs)"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 1..=10usize {
        for _ in 0..200 {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0..10) as f64).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0..10) as f64).collect();
            let w = wilcoxon_signed_rank(&a, &b).unwrap();
            worst = worst.max((w.p - sign_flip_p(&a, &b)).abs());
            cases += 1;
        }
    }
    let equal = wilcoxon_signed_rank(&[0.7, 0.8, 0.9], &[0.7, 0.8, 0.9]).unwrap().p;
    outcome(worst < 1e-9 && equal == 1.0, format!("max |p - oracle| = {worst:.1e} over {cases} pairs with n <= 10; all-equal p = {equal}"))
}

/// Independent two-sided p: ranks by sorting integer magnitudes, ties
/// averaged, then all 2^n sign patterns.
fn sign_flip_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<i64> = a.iter().zip(b).map(|(x, y)| (x - y) as i64).filter(|&d| d != 0).collect();
    if d.is_empty() {
        return 1.0;
    }
    let mut mags: Vec<i64> = d.iter().map(|x| x.abs()).collect();
    mags.sort_unstable();
    let rank_of = |m: i64| {
        let lo = mags.iter().position(|&x| x == m).unwrap();
        let hi = mags.iter().rposition(|&x| x == m).unwrap();
        (lo + hi + 2) as f64 / 2.0
    };
    let ranks: Vec<f64> = d.iter().map(|x| rank_of(x.abs())).collect();
    let total: f64 = ranks.iter().sum();
    let plus: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0).map(|(_, r)| r).sum();
    let observed = plus.min(total - plus);
    let n = d.len();
    let hits = (0u32..1 << n)
        .filter(|mask| {
            let p: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            p.min(total - p) <= observed + 1e-9
        })
        .count();
    hits as f64 / (1u64 << n) as f64
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let corpus = generate(Task::TriangleIlp, 100, 606);
    let cat = Catalog::builtin();
    let bg = Background::from_graphs(default_modes(), &corpus.dataset.graphs, &cat, DEFAULT_MAX_RING_LEN);
    let examples: Vec<Example> = corpus
        .dataset
        .graphs
        .iter()
        .zip(&corpus.dataset.labels)
        .map(|(g, &l)| Example { mol: g.id().to_string(), class: class_name(l) })
        .collect();
    let cfg = LearnConfig { max_draws: 200, depth: 2, seed: 6, ..LearnConfig::default() };
    let rels = learn_rels(&bg, &examples, &cfg).unwrap();
    let perfect: Vec<String> = rels
        .iter()
        .filter(|r| {
            let own = examples.iter().filter(|e| e.class == r.class).count();
            let cov = clause_coverage(&r.clause, &examples, &bg);
            own > 0 && cov.pos == own && cov.neg == 0
        })
        .map(|r| r.clause.to_string())
        .collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        !perfect.is_empty() && secs < 300.0,
        format!(
            "{} of {} relations cover all of their class and nothing else{}; {secs:.1}s",
            perfect.len(),
            rels.len(),
            perfect.first().map(|c| format!(", e.g. {c}")).unwrap_or_default()
        ),
    )
}

/// Reduced training budget used for the experiment criteria.
fn desk_config(seeds: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        train: TrainConfig { max_epochs: 150, patience: 25, lr: 5e-3, ..TrainConfig::default() },
        m_set: vec![8, 32],
        seeds,
        ..ExperimentConfig::default()
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let suite: Vec<_> = generate_suite(Task::RingClass, 10, 200, 7).into_iter().map(|c| c.dataset).collect();
    let cat = Catalog::builtin();
    let rs = RelationSet::from_catalog(&cat, DEFAULT_MAX_RING_LEN);
    let report = run_experiment1(&suite, &rs, &cat, &desk_config(vec![0, 1, 2])).unwrap();
    let table = report.table();
    print!("{table}");
    let gains: Vec<(Variant, f64)> = Variant::ALL.iter().map(|&v| (v, median_seed_gain(&report.records, v, VEGNN, GNN))).collect();
    let winners = gains.iter().filter(|(_, g)| *g >= 0.05).count();
    let secs = start.elapsed().as_secs_f64();
    let shaped = table.contains("Higher/Lower/Equal (p-value)") && report.comparisons.len() == 5;
    let detail: Vec<String> = gains.iter().map(|(v, g)| format!("{v} {:+.1}", 100.0 * g)).collect();
    outcome(
        winners >= 4 && shaped && report.failures.is_empty() && secs < 3600.0,
        format!("{winners}/5 variants gain >= 5 points ({}); {secs:.0}s", detail.join(", ")),
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let suite: Vec<_> = generate_suite(Task::FusedClass, 10, 200, 8).into_iter().map(|c| c.dataset).collect();
    let cat = Catalog::builtin();
    let rs = RelationSet::from_catalog(&cat, DEFAULT_MAX_RING_LEN);
    let cfg = desk_config(vec![0]);
    let learned = run_experiment2(&suite, &rs, &cat, &cfg, &[10], Augmentation::Learned).unwrap();
    let table = learned.table();
    print!("{table}");
    let changed = learned.comparisons.iter().filter(|(_, _, c)| c.equal < c.datasets.len()).count();
    let shaped = table.contains("|R'| = 10") && learned.comparisons.len() == 5;
    let inert = run_experiment2(&suite, &rs, &cat, &cfg, &[10], Augmentation::Inert).unwrap();
    let worst_drop = inert
        .comparisons
        .iter()
        .map(|(_, _, c)| median(c.acc_b.clone()) - median(c.acc_a.clone()))
        .fold(f64::NEG_INFINITY, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        shaped && changed > 0 && worst_drop <= 0.01 && learned.failures.is_empty() && inert.failures.is_empty(),
        format!(
            "learned relations change {changed}/5 tabulations; inert control worst median drop {:.1} points; {secs:.0}s",
            100.0 * worst_drop.max(0.0)
        ),
    )
}

fn criterion_9(dir: &Path) -> Outcome {
    let config = dir.join("small.toml");
    std::fs::write(&config, "[train]\nmax_epochs = 20\npatience = 5\nlr = 0.005\n").unwrap();
    let run = |name: &str| {
        let out = dir.join(name);
        let code = run_cli(&[
            "experiment", "1", "--synth", "ring-class", "--datasets", "2", "--graphs", "60", "--variant", "gcn,sage", "--m", "4,8",
            "--seeds", "0,1", "--seed", "9", "--config", config.to_str().unwrap(), "-o", out.to_str().unwrap(),
        ]);
        let records = std::fs::read_to_string(out.join("records.tsv")).unwrap_or_default();
        let table = std::fs::read_to_string(out.join("table.txt")).unwrap_or_default();
        (code, records, table)
    };
    let (c1, r1, t1) = run("run1");
    let (c2, r2, t2) = run("run2");
    let a = parse_records_tsv(&r1).unwrap_or_default();
    let b = parse_records_tsv(&r2).unwrap_or_default();
    let max_diff = a.iter().zip(&b).map(|(x, y)| (x.test_acc - y.test_acc).abs().max((x.val_acc - y.val_acc).abs())).fold(0.0, f64::max);
    let pass = c1 == 0 && c2 == 0 && !a.is_empty() && a.len() == b.len() && max_diff <= 1e-12 && t1 == t2 && r1 == r2 && !t1.is_empty();
    outcome(pass, format!("{} records, max accuracy difference {max_diff:.1e}, tables byte-identical: {}", a.len(), t1 == t2))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut bad_size = 0;
    let mut bad_edges = 0;
    for i in 0..1000u64 {
        let n = rng.gen_range(1..=30);
        let density = rng.gen_range(0.05..0.5);
        let g = random_graph(&mut rng, n, 6, density);
        let original: BTreeSet<(usize, usize)> = g.edges.iter().copied().collect();
        let batch = Batch::new(&[&g]);
        let mut store = ParamStore::new();
        let mut init = Init { store: &mut store, seed: i, prefix: "pool".into() };
        let pool = SagPool::new(&mut init, 6, 0.5);
        let mut t = Tape::new();
        let h = t.constant(batch.x.clone());
        let p = pool.forward(&mut t, &store, h, &batch.topo).unwrap();
        bad_size += usize::from(p.kept.len() != n.div_ceil(2) || t.value(p.h).nrows() != n.div_ceil(2));
        bad_edges += p.topo.edges.iter().filter(|&&(a, b)| {
            let (u, v) = (p.kept[a], p.kept[b]);
            !original.contains(&(u.min(v), u.max(v)))
        }).count();
    }
    outcome(bad_size == 0 && bad_edges == 0, format!("1000 graphs: {bad_size} wrong sizes, {bad_edges} edges outside the original graph"))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "gradient fidelity", Box::new(criterion_1)),
        (2, "enrichment and ingestion examples", Box::new(|| criterion_2(dir.path()))),
        (3, "permutation invariance", Box::new(criterion_3)),
        (4, "subsumption oracle", Box::new(criterion_4)),
        (5, "Wilcoxon exactness", Box::new(criterion_5)),
        (6, "relation recovery", Box::new(criterion_6)),
        (7, "VEGNN vs. GNN on ring-class", Box::new(criterion_7)),
        (8, "added relations on fused-class", Box::new(criterion_8)),
        (9, "determinism", Box::new(|| criterion_9(dir.path()))),
        (10, "pooling contract", Box::new(criterion_10)),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (k, name, f) in &criteria {
        if only.as_ref().is_some_and(|o| !o.contains(k)) {
            continue;
        }
        let o = f();
        println!("criterion {k:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(*k);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
