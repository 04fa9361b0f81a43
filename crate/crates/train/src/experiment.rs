use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vegnn_core::chem::{Catalog, DEFAULT_MAX_RING_LEN};
use vegnn_core::dataset::Dataset;
use vegnn_core::enrich::{EnrichOptions, Enricher, RelationSet};
use vegnn_core::graph::LabeledGraph;
use vegnn_core::ilp::{class_name, default_modes, learn_rels, parse_relations, Background, Example, LearnConfig, LearnedRelation};
use vegnn_core::seed::derive_seed;
use vegnn_gnn::{GnnConfig, Variant};

use crate::encode::{encode_dataset, EncodedDataset};
use crate::select::select_m;
use crate::split::{split_dataset, Split};
use crate::train::TrainConfig;
use crate::wilcoxon::{wilcoxon_signed_rank, Wilcoxon};
use crate::TrainError;

/// Accuracies closer than this count as equal.
const ACC_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// `seed` is replaced per job.
    pub train: TrainConfig,
    /// `variant` and `m` are replaced per job.
    pub gnn: GnnConfig,
    pub m_set: Vec<usize>,
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub expand_hierarchy: bool,
    pub max_ring_len: usize,
    pub ilp_depth: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            gnn: GnnConfig::new(Variant::Gcn, 8),
            m_set: vec![8, 128],
            variants: Variant::ALL.to_vec(),
            seeds: vec![0],
            jobs: 1,
            expand_hierarchy: false,
            max_ring_len: DEFAULT_MAX_RING_LEN,
            ilp_depth: 2,
        }
    }
}

impl ExperimentConfig {
    fn enrich_options(&self) -> EnrichOptions {
        EnrichOptions { expand_hierarchy: self.expand_hierarchy, max_ring_len: self.max_ring_len, ..EnrichOptions::default() }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, TrainError> {
        rayon::ThreadPoolBuilder::new().num_threads(self.jobs.max(1)).build().map_err(|e| TrainError::Pool(e.to_string()))
    }
}

/// One selected model's outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub variant: Variant,
    pub system: String,
    pub seed: u64,
    pub m_star: usize,
    pub val_acc: f64,
    pub test_acc: f64,
    pub best_epoch: usize,
    pub epochs: usize,
}

const RECORD_HEADER: &str = "dataset\tvariant\tsystem\tseed\tm_star\tval_acc\ttest_acc\tbest_epoch\tepochs";

pub fn records_tsv(records: &[RunRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.dataset, r.variant, r.system, r.seed, r.m_star, r.val_acc, r.test_acc, r.best_epoch, r.epochs
        );
    }
    out
}

pub fn parse_records_tsv(text: &str) -> Result<Vec<RunRecord>, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h == RECORD_HEADER => {}
        _ => return Err("line 1: missing results header".into()),
    }
    lines
        .map(|(i, l)| {
            let f: Vec<&str> = l.split('\t').collect();
            let err = |what: &str| format!("line {}: {what}", i + 1);
            if f.len() != 9 {
                return Err(err("expected 9 fields"));
            }
            let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| err(what));
            let int = |s: &str, what: &str| s.parse::<usize>().map_err(|_| err(what));
            Ok(RunRecord {
                dataset: f[0].to_string(),
                variant: f[1].parse().map_err(|_| err("unknown variant"))?,
                system: f[2].to_string(),
                seed: f[3].parse().map_err(|_| err("bad seed"))?,
                m_star: int(f[4], "bad m")?,
                val_acc: num(f[5], "bad val_acc")?,
                test_acc: num(f[6], "bad test_acc")?,
                best_epoch: int(f[7], "bad best_epoch")?,
                epochs: int(f[8], "bad epochs")?,
            })
        })
        .collect()
}

/// Per-dataset accuracies of system A against system B.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonResult {
    pub datasets: Vec<String>,
    pub acc_a: Vec<f64>,
    pub acc_b: Vec<f64>,
    pub higher: usize,
    pub lower: usize,
    pub equal: usize,
    pub wilcoxon: Wilcoxon,
}

impl ComparisonResult {
    /// `higher/lower/equal (p)`.
    pub fn cell(&self) -> String {
        format!("{}/{}/{} ({})", self.higher, self.lower, self.equal, format_p(self.wilcoxon.p))
    }
}

pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "< 0.001".into()
    } else {
        format!("{p:.3}")
    }
}

pub fn compare(datasets: Vec<String>, acc_a: Vec<f64>, acc_b: Vec<f64>) -> Result<ComparisonResult, TrainError> {
    if acc_a.len() != acc_b.len() || datasets.len() != acc_a.len() {
        return Err(TrainError::LengthMismatch(acc_a.len(), acc_b.len()));
    }
    let (mut higher, mut lower, mut equal) = (0, 0, 0);
    for (a, b) in acc_a.iter().zip(&acc_b) {
        if (a - b).abs() <= ACC_EPS {
            equal += 1;
        } else if a > b {
            higher += 1;
        } else {
            lower += 1;
        }
    }
    let wilcoxon = wilcoxon_signed_rank(&acc_a, &acc_b)?;
    Ok(ComparisonResult { datasets, acc_a, acc_b, higher, lower, equal, wilcoxon })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Test accuracy per dataset, median over seeds, for one variant and system.
fn median_by_dataset(records: &[RunRecord], variant: Variant, system: &str) -> BTreeMap<String, (usize, f64)> {
    let mut by: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.variant == variant && r.system == system) {
        by.entry(r.dataset.clone()).or_default().push(r.test_acc);
    }
    by.into_iter().map(|(d, xs)| (d, (xs.len(), median(xs)))).collect()
}

/// Compares `system_a` with `system_b` on every dataset where both have
/// `seeds` records, in dataset-name order.
pub fn compare_records(records: &[RunRecord], variant: Variant, system_a: &str, system_b: &str, seeds: usize) -> Result<ComparisonResult, TrainError> {
    let a = median_by_dataset(records, variant, system_a);
    let b = median_by_dataset(records, variant, system_b);
    let mut names = Vec::new();
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for (d, &(na, va)) in &a {
        if let Some(&(nb, vb)) = b.get(d) {
            if na == seeds && nb == seeds {
                names.push(d.clone());
                xa.push(va);
                xb.push(vb);
            }
        }
    }
    compare(names, xa, xb)
}

/// Median over seeds of `mean_d acc_a(d) - mean_d acc_b(d)`.
pub fn median_seed_gain(records: &[RunRecord], variant: Variant, system_a: &str, system_b: &str) -> f64 {
    let mut per_seed: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.variant == variant) {
        let e = per_seed.entry(r.seed).or_default();
        if r.system == system_a {
            e.0.push(r.test_acc);
        } else if r.system == system_b {
            e.1.push(r.test_acc);
        }
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    median(per_seed.values().filter(|(a, b)| !a.is_empty() && !b.is_empty()).map(|(a, b)| mean(a) - mean(b)).collect())
}

fn pad_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> =
            r.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = if c + 1 == r.len() { 0 } else { widths[c] })).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

/// One row per variant: `higher/lower/equal (p)` of A against B.
pub fn comparison_table(title: &str, rows: &[(Variant, ComparisonResult)]) -> String {
    let mut t = vec![vec!["".into(), format!("Accuracy ({title})")], vec!["Variant".into(), "Higher/Lower/Equal (p-value)".into()]];
    t.extend(rows.iter().map(|(v, c)| vec![v.to_string(), c.cell()]));
    pad_table(&t)
}

/// One row per variant and one column per budget.
pub fn budget_table(title: &str, budgets: &[usize], cells: &[(Variant, usize, ComparisonResult)]) -> String {
    let mut t = vec![
        vec!["".to_string(), format!("Accuracy ({title})")],
        std::iter::once("Variant".to_string()).chain(budgets.iter().map(|b| format!("|R'| = {b}"))).collect(),
    ];
    let mut variants: Vec<Variant> = Vec::new();
    for (v, _, _) in cells {
        if !variants.contains(v) {
            variants.push(*v);
        }
    }
    for v in variants {
        let mut row = vec![v.to_string()];
        for b in budgets {
            row.push(cells.iter().find(|(cv, cb, _)| *cv == v && cb == b).map_or("-".into(), |(_, _, c)| c.cell()));
        }
        t.push(row);
    }
    pad_table(&t)
}

fn split_seed(seed: u64, dataset: &str) -> u64 {
    derive_seed(seed, &format!("split/{dataset}"))
}

/// Shared by every system compared on the same dataset and variant, so
/// systems with identical inputs train identically.
fn train_seed(seed: u64, dataset: &str, variant: Variant) -> u64 {
    derive_seed(seed, &format!("train/{dataset}/{variant}"))
}

struct Job<'a> {
    data: &'a EncodedDataset,
    split: &'a Split,
    seed: u64,
    variant: Variant,
    system: String,
}

fn run_jobs(cfg: &ExperimentConfig, jobs: &[Job]) -> Result<(Vec<RunRecord>, Vec<String>), TrainError> {
    let results: Vec<Result<RunRecord, String>> = cfg.pool()?.install(|| {
        jobs.par_iter()
            .map(|j| {
                let train = TrainConfig { seed: train_seed(j.seed, &j.data.name, j.variant), ..cfg.train.clone() };
                let gnn = GnnConfig { variant: j.variant, ..cfg.gnn.clone() };
                let s = select_m(&train, &gnn, &cfg.m_set, j.data, j.split)
                    .map_err(|e| format!("{}/{}/{}/seed {}: {e}", j.data.name, j.variant, j.system, j.seed))?;
                log::info!("{} {} {} seed {}: m*={} test={:.4}", j.data.name, j.variant, j.system, j.seed, s.m_star, s.test_acc);
                let val_acc = s.val_acc.iter().find(|(m, _)| *m == s.m_star).map_or(0.0, |p| p.1);
                Ok(RunRecord {
                    dataset: j.data.name.clone(),
                    variant: j.variant,
                    system: j.system.clone(),
                    seed: j.seed,
                    m_star: s.m_star,
                    val_acc,
                    test_acc: s.test_acc,
                    best_epoch: s.trained.best_epoch,
                    epochs: s.trained.history.len(),
                })
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::warn!("{e}");
                failures.push(e);
            }
        }
    }
    Ok((records, failures))
}

fn enrich_all(graphs: &[LabeledGraph], rs: &RelationSet, enricher: &Enricher) -> Vec<LabeledGraph> {
    graphs.iter().map(|g| enricher.enrich_graph(g, rs)).collect()
}

#[derive(Clone, Debug)]
pub struct Experiment1Report {
    pub records: Vec<RunRecord>,
    pub comparisons: Vec<(Variant, ComparisonResult)>,
    pub failures: Vec<String>,
}

impl Experiment1Report {
    pub fn table(&self) -> String {
        comparison_table("VEGNN vs. GNN", &self.comparisons)
    }
}

pub const GNN: &str = "gnn";
pub const VEGNN: &str = "vegnn";

/// GNN on the raw graphs against VEGNN on the graphs enriched with `rs`,
/// per dataset, variant and seed.
pub fn run_experiment1(suite: &[Dataset], rs: &RelationSet, catalog: &Catalog, cfg: &ExperimentConfig) -> Result<Experiment1Report, TrainError> {
    let enricher = Enricher::with_options(catalog, cfg.enrich_options());
    let mut prepared = Vec::new();
    for ds in suite {
        let raw = encode_dataset(&ds.name, &ds.graphs, &ds.labels, &[])?;
        let enriched = encode_dataset(&ds.name, &enrich_all(&ds.graphs, rs, &enricher), &ds.labels, &rs.symbols())?;
        let splits = cfg.seeds.iter().map(|&s| split_dataset(&ds.labels, split_seed(s, &ds.name))).collect::<Result<Vec<_>, _>>()?;
        prepared.push((raw, enriched, splits));
    }
    let mut jobs = Vec::new();
    for (raw, enriched, splits) in &prepared {
        for (&seed, split) in cfg.seeds.iter().zip(splits) {
            for &variant in &cfg.variants {
                jobs.push(Job { data: raw, split, seed, variant, system: GNN.into() });
                jobs.push(Job { data: enriched, split, seed, variant, system: VEGNN.into() });
            }
        }
    }
    let (records, failures) = run_jobs(cfg, &jobs)?;
    let comparisons = cfg
        .variants
        .iter()
        .map(|&v| Ok((v, compare_records(&records, v, VEGNN, GNN, cfg.seeds.len())?)))
        .collect::<Result<_, TrainError>>()?;
    Ok(Experiment1Report { records, comparisons, failures })
}

/// Where the extra relations of Experiment 2 come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Augmentation {
    /// Learned from the train and validation graphs of each dataset.
    Learned,
    /// Relations that hold in no graph; a control for inert columns.
    Inert,
}

/// `k` relations over structure types no graph contains.
pub fn inert_relations(k: usize) -> Vec<LearnedRelation> {
    let text: String = (1..=k).map(|i| format!("inert_{i}(A,B) :- has_struc(A,B,C,absent_structure_{i}).\n")).collect();
    parse_relations(&text, &default_modes()).expect("inert relations parse")
}

#[derive(Clone, Debug)]
pub struct Experiment2Report {
    pub budgets: Vec<usize>,
    pub records: Vec<RunRecord>,
    pub comparisons: Vec<(Variant, usize, ComparisonResult)>,
    /// `(dataset, seed, budget, relations obtained)`.
    pub relation_counts: Vec<(String, u64, usize, usize)>,
    pub failures: Vec<String>,
}

impl Experiment2Report {
    pub fn table(&self) -> String {
        budget_table("VEGNN' vs. VEGNN", &self.budgets, &self.comparisons)
    }
}

pub fn augmented_system(budget: usize) -> String {
    format!("vegnn+{budget}")
}

/// VEGNN with `rs ∪ R′` against VEGNN with `rs`, one `R′` per dataset, seed
/// and budget. Learned `R′` comes from that seed's train and validation
/// graphs with `budget` sampling draws.
pub fn run_experiment2(
    suite: &[Dataset],
    rs: &RelationSet,
    catalog: &Catalog,
    cfg: &ExperimentConfig,
    budgets: &[usize],
    augmentation: Augmentation,
) -> Result<Experiment2Report, TrainError> {
    let enricher = Enricher::with_options(catalog, cfg.enrich_options());
    let modes = default_modes();
    let mut base = Vec::new();
    let mut augmented: Vec<(usize, u64, usize, EncodedDataset)> = Vec::new();
    let mut relation_counts = Vec::new();
    for (di, ds) in suite.iter().enumerate() {
        let enriched = encode_dataset(&ds.name, &enrich_all(&ds.graphs, rs, &enricher), &ds.labels, &rs.symbols())?;
        let splits = cfg.seeds.iter().map(|&s| split_dataset(&ds.labels, split_seed(s, &ds.name))).collect::<Result<Vec<_>, _>>()?;
        let bg = match augmentation {
            Augmentation::Learned => Some(Background::from_graphs(modes.clone(), &ds.graphs, catalog, cfg.max_ring_len)),
            Augmentation::Inert => None,
        };
        for (&seed, split) in cfg.seeds.iter().zip(&splits) {
            let examples: Vec<Example> = split
                .train_val()
                .into_iter()
                .map(|i| Example { mol: ds.graphs[i].id().to_string(), class: class_name(ds.labels[i]) })
                .collect();
            for &budget in budgets {
                let learned = match &bg {
                    Some(bg) => {
                        let lc = LearnConfig {
                            max_draws: budget,
                            depth: cfg.ilp_depth,
                            seed: derive_seed(seed, &format!("ilp/{}", ds.name)),
                            ..LearnConfig::default()
                        };
                        learn_rels(bg, &examples, &lc)?
                    }
                    None => inert_relations(budget),
                };
                relation_counts.push((ds.name.clone(), seed, budget, learned.len()));
                let all = rs.with_learned(learned)?;
                let data = encode_dataset(&ds.name, &enrich_all(&ds.graphs, &all, &enricher), &ds.labels, &all.symbols())?;
                augmented.push((di, seed, budget, data));
            }
        }
        base.push((enriched, splits));
    }
    let split_of = |di: usize, seed: u64| {
        let k = cfg.seeds.iter().position(|&s| s == seed).expect("known seed");
        &base[di].1[k]
    };
    let mut jobs = Vec::new();
    for (di, (enriched, splits)) in base.iter().enumerate() {
        for (&seed, split) in cfg.seeds.iter().zip(splits) {
            for &variant in &cfg.variants {
                jobs.push(Job { data: enriched, split, seed, variant, system: VEGNN.into() });
                for (_, _, budget, data) in augmented.iter().filter(|a| a.0 == di && a.1 == seed) {
                    jobs.push(Job { data, split: split_of(di, seed), seed, variant, system: augmented_system(*budget) });
                }
            }
        }
    }
    let (records, failures) = run_jobs(cfg, &jobs)?;
    let mut comparisons = Vec::new();
    for &v in &cfg.variants {
        for &b in budgets {
            comparisons.push((v, b, compare_records(&records, v, &augmented_system(b), VEGNN, cfg.seeds.len())?));
        }
    }
    Ok(Experiment2Report { budgets: budgets.to_vec(), records, comparisons, relation_counts, failures })
}
