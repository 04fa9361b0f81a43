//! The `vegnn` command line: ingestion, enrichment, relation learning,
//! training, evaluation, comparison, experiments and synthetic corpora.

mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use vegnn_core::chem::Catalog;
use vegnn_core::dataset::Dataset;
use vegnn_core::enrich::{EnrichOptions, Enricher, RelationSet};
use vegnn_core::graph::{ingest_facts, parse_graphs, serialize_graphs, LabelSymbol, LabeledGraph, Vocabulary};
use vegnn_core::ilp::{class_name, default_modes, learn_rels, parse_relations, write_relations, Background, Example, LearnConfig};
use vegnn_core::seed::derive_seed;
use vegnn_core::synth::{generate, generate_suite, Task};
use vegnn_gnn::{GnnConfig, GraphTensor, Model, Variant};
use vegnn_train::{
    accuracy, compare_records, encode_dataset, parse_records_tsv, records_tsv, run_experiment1, run_experiment2, select_m,
    split_dataset, Augmentation, Examples, ExperimentConfig, TrainConfig, TrainError,
};

pub use manifest::{write_atomic, FileDigest, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or unreadable input; exit code 2.
    #[error("{0}")]
    Input(String),
    /// Failure while running; exit code 1.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Split(_) | TrainError::Config(_) | TrainError::EmptyPartition(_) => input(e),
            other => internal(other),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "vegnn", version, about = "Graph neural networks on vertex-enriched molecular graphs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Root of all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// TOML file with `[train]`, `[gnn]` and experiment keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Structure catalog; the built-in one when absent.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Worker threads for experiments.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Also label vertices with catalog ancestors of detected structures.
    #[arg(long, global = true)]
    pub expand_hierarchy: bool,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert `bond/6` facts into a graph document.
    Ingest {
        facts: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Add relation labels to every vertex of a graph document.
    Enrich {
        graphs: PathBuf,
        /// Learned relations to apply after the catalog relations.
        #[arg(long)]
        relations: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Learn relations from a labelled dataset directory.
    LearnRels {
        dataset: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_draws: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Split a dataset, pick `m` on validation accuracy and save the model.
    Train {
        dataset: PathBuf,
        #[arg(long, default_value = "gcn")]
        variant: Variant,
        /// Candidate widths; the config's `m_set` when absent.
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        /// Train on the graphs as given, without enrichment.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        relations: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Accuracy of a saved model on a dataset directory.
    Eval { model: PathBuf, dataset: PathBuf },
    /// Tabulate two results files against each other.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        system_a: Option<String>,
        #[arg(long)]
        system_b: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run Experiment 1 (VEGNN vs. GNN) or 2 (added relations vs. VEGNN).
    Experiment {
        #[arg(value_enum)]
        which: Which,
        /// Dataset directories.
        #[arg(long)]
        data: Vec<PathBuf>,
        /// Generate the suite instead of reading it.
        #[arg(long)]
        synth: Option<Task>,
        #[arg(long, default_value_t = 10)]
        datasets: usize,
        #[arg(long, default_value_t = 200)]
        graphs: usize,
        #[arg(long, value_delimiter = ',')]
        variant: Vec<Variant>,
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        /// Run seeds; `--seed` alone when absent.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "100,500,1000")]
        budgets: Vec<usize>,
        /// Use relations that hold nowhere instead of learned ones.
        #[arg(long)]
        inert: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write a synthetic labelled corpus.
    Synth {
        task: Task,
        #[arg(long, default_value_t = 200)]
        graphs: usize,
        #[arg(long, default_value_t = 1)]
        datasets: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Which {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn load_catalog(common: &Common) -> Result<(Catalog, String), CliError> {
    match &common.catalog {
        Some(p) => {
            let text = read_text(p)?;
            let cat = Catalog::parse(&text).map_err(|e| input(format!("{}: {e}", p.display())))?;
            Ok((cat, text))
        }
        None => Ok((Catalog::builtin(), Catalog::builtin_text().to_string())),
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => toml::from_str(&read_text(p)?).map_err(|e| input(format!("{}: {e}", p.display())))?,
        None => ExperimentConfig::default(),
    };
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    cfg.expand_hierarchy |= common.expand_hierarchy;
    cfg.train.seed = common.seed;
    cfg.train.validate()?;
    Ok(cfg)
}

fn read_dataset(dir: &Path) -> Result<Dataset, CliError> {
    Dataset::read_dir(dir).map_err(input)
}

fn relation_set(catalog: &Catalog, cfg: &ExperimentConfig, relations: Option<&Path>) -> Result<(RelationSet, Option<String>), CliError> {
    let rs = RelationSet::from_catalog(catalog, cfg.max_ring_len);
    match relations {
        None => Ok((rs, None)),
        Some(p) => {
            let text = read_text(p)?;
            let learned = parse_relations(&text, &default_modes()).map_err(|e| input(format!("{}: {e}", p.display())))?;
            Ok((rs.with_learned(learned).map_err(input)?, Some(text)))
        }
    }
}

fn enrich_options(cfg: &ExperimentConfig) -> EnrichOptions {
    EnrichOptions { expand_hierarchy: cfg.expand_hierarchy, max_ring_len: cfg.max_ring_len, ..EnrichOptions::default() }
}

/// What `train` leaves next to the model so `eval` can rebuild the inputs.
#[derive(Serialize, Deserialize, Debug)]
struct Setup {
    variant: Variant,
    m_star: usize,
    raw: bool,
    expand_hierarchy: bool,
    max_ring_len: usize,
    relations: Option<String>,
    catalog: String,
    vocabulary: Vec<String>,
    val_acc: f64,
    test_acc: f64,
}

/// Drops labels outside `vocab`, so unseen relation symbols do not block
/// encoding.
fn restrict(g: &LabeledGraph, vocab: &Vocabulary) -> LabeledGraph {
    let psi = g.label_sets().iter().map(|s| s.iter().filter(|l| vocab.index_of(l).is_some()).cloned().collect()).collect();
    g.with_vertex_labels(psi)
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let start = Instant::now();
    let common = &cli.common;
    let mut m = RunManifest::new(argv, common.seed);
    let default_manifest: Option<PathBuf>;
    match &cli.command {
        Command::Ingest { facts, out } => {
            m.command = "ingest".into();
            let text = read_text(facts)?;
            m.add_input(facts, text.as_bytes());
            let graphs = ingest_facts(&text).map_err(|e| input(format!("{}: {e}", facts.display())))?;
            write_out(out, &serialize_graphs(&graphs))?;
            m.outputs.push(out.display().to_string());
            default_manifest = Some(sidecar(out));
        }
        Command::Enrich { graphs, relations, out } => {
            m.command = "enrich".into();
            let (catalog, cat_text) = load_catalog(common)?;
            m.set_catalog(&cat_text);
            let cfg = load_config(common)?;
            let text = read_text(graphs)?;
            m.add_input(graphs, text.as_bytes());
            let gs = parse_graphs(&text).map_err(|e| input(format!("{}: {e}", graphs.display())))?;
            let (rs, rel_text) = relation_set(&catalog, &cfg, relations.as_deref())?;
            if let (Some(p), Some(t)) = (relations, &rel_text) {
                m.add_input(p, t.as_bytes());
            }
            let enricher = Enricher::with_options(&catalog, enrich_options(&cfg));
            let enriched: Vec<LabeledGraph> = gs.iter().map(|g| enricher.enrich_graph(g, &rs)).collect();
            write_out(out, &serialize_graphs(&enriched))?;
            m.config = serde_json::to_value(&cfg).map_err(internal)?;
            m.outputs.push(out.display().to_string());
            default_manifest = Some(sidecar(out));
        }
        Command::LearnRels { dataset, max_draws, depth, out } => {
            m.command = "learn-rels".into();
            let (catalog, cat_text) = load_catalog(common)?;
            m.set_catalog(&cat_text);
            let cfg = load_config(common)?;
            let ds = read_dataset(dataset)?;
            m.add_dataset(dataset);
            let bg = Background::from_graphs(default_modes(), &ds.graphs, &catalog, cfg.max_ring_len);
            let examples: Vec<Example> =
                ds.graphs.iter().zip(&ds.labels).map(|(g, &l)| Example { mol: g.id().to_string(), class: class_name(l) }).collect();
            let lc = LearnConfig { max_draws: *max_draws, depth: *depth, seed: common.seed, ..LearnConfig::default() };
            let rels = learn_rels(&bg, &examples, &lc).map_err(internal)?;
            log::info!("learned {} relations", rels.len());
            write_out(out, &write_relations(&rels))?;
            m.config = serde_json::json!({ "max_draws": max_draws, "depth": depth, "max_ring_len": cfg.max_ring_len });
            m.outputs.push(out.display().to_string());
            default_manifest = Some(sidecar(out));
        }
        Command::Train { dataset, variant, m: widths, raw, relations, out } => {
            m.command = "train".into();
            let (catalog, cat_text) = load_catalog(common)?;
            m.set_catalog(&cat_text);
            let cfg = load_config(common)?;
            let ds = read_dataset(dataset)?;
            m.add_dataset(dataset);
            let (rs, rel_text) = relation_set(&catalog, &cfg, relations.as_deref())?;
            let (graphs, symbols) = if *raw {
                (ds.graphs.clone(), Vec::new())
            } else {
                let enricher = Enricher::with_options(&catalog, enrich_options(&cfg));
                (ds.graphs.iter().map(|g| enricher.enrich_graph(g, &rs)).collect(), rs.symbols())
            };
            let data = encode_dataset(&ds.name, &graphs, &ds.labels, &symbols)?;
            let split = split_dataset(&ds.labels, derive_seed(common.seed, &format!("split/{}", ds.name)))?;
            let train = TrainConfig { seed: derive_seed(common.seed, &format!("train/{}/{variant}", ds.name)), ..cfg.train.clone() };
            let ms = if widths.is_empty() { cfg.m_set.clone() } else { widths.clone() };
            let gnn = GnnConfig { variant: *variant, ..cfg.gnn.clone() };
            let sel = select_m(&train, &gnn, &ms, &data, &split)?;
            create_dir(out)?;
            write_out(&out.join("model.txt"), &sel.trained.model.to_text())?;
            let val_acc = sel.val_acc.iter().find(|p| p.0 == sel.m_star).map_or(0.0, |p| p.1);
            let setup = Setup {
                variant: *variant,
                m_star: sel.m_star,
                raw: *raw,
                expand_hierarchy: cfg.expand_hierarchy,
                max_ring_len: cfg.max_ring_len,
                relations: rel_text,
                catalog: cat_text,
                vocabulary: data.vocab.symbols().iter().map(ToString::to_string).collect(),
                val_acc,
                test_acc: sel.test_acc,
            };
            write_out(&out.join("setup.json"), &serde_json::to_string_pretty(&setup).map_err(internal)?)?;
            let hist: String = std::iter::once("epoch\ttrain_loss\tval_loss\tval_acc\n".to_string())
                .chain(sel.trained.history.iter().map(|h| format!("{}\t{}\t{}\t{}\n", h.epoch, h.train_loss, h.val_loss, h.val_acc)))
                .collect();
            write_out(&out.join("history.tsv"), &hist)?;
            println!("m*\t{}\nval_acc\t{val_acc}\ntest_acc\t{}", sel.m_star, sel.test_acc);
            m.config = serde_json::to_value(&cfg).map_err(internal)?;
            m.outputs.extend(["model.txt", "setup.json", "history.tsv"].map(|f| out.join(f).display().to_string()));
            default_manifest = Some(out.join("manifest.json"));
        }
        Command::Eval { model, dataset } => {
            m.command = "eval".into();
            let setup: Setup = serde_json::from_str(&read_text(&model.join("setup.json"))?).map_err(input)?;
            let net = Model::from_text(&read_text(&model.join("model.txt"))?).map_err(input)?;
            let catalog = Catalog::parse(&setup.catalog).map_err(input)?;
            m.set_catalog(&setup.catalog);
            let ds = read_dataset(dataset)?;
            m.add_dataset(dataset);
            let mut vocab = Vocabulary::new();
            for s in &setup.vocabulary {
                vocab.push(LabelSymbol::parse(s).map_err(input)?);
            }
            let cfg = ExperimentConfig { expand_hierarchy: setup.expand_hierarchy, max_ring_len: setup.max_ring_len, ..Default::default() };
            let graphs: Vec<LabeledGraph> = if setup.raw {
                ds.graphs.clone()
            } else {
                let mut rs = RelationSet::from_catalog(&catalog, setup.max_ring_len);
                if let Some(t) = &setup.relations {
                    rs = rs.with_learned(parse_relations(t, &default_modes()).map_err(input)?).map_err(input)?;
                }
                let enricher = Enricher::with_options(&catalog, enrich_options(&cfg));
                ds.graphs.iter().map(|g| enricher.enrich_graph(g, &rs)).collect()
            };
            let tensors = graphs.iter().map(|g| GraphTensor::from_graph(&restrict(g, &vocab), &vocab)).collect::<Result<Vec<_>, _>>().map_err(input)?;
            let idx: Vec<usize> = (0..tensors.len()).collect();
            let acc = accuracy(&net, &Examples::select(&tensors, &ds.labels, &idx))?;
            println!("accuracy\t{acc}");
            default_manifest = None;
        }
        Command::Compare { a, b, system_a, system_b, out } => {
            m.command = "compare".into();
            let ta = read_text(a)?;
            let tb = read_text(b)?;
            m.add_input(a, ta.as_bytes());
            m.add_input(b, tb.as_bytes());
            let ra = parse_records_tsv(&ta).map_err(|e| input(format!("{}: {e}", a.display())))?;
            let rb = parse_records_tsv(&tb).map_err(|e| input(format!("{}: {e}", b.display())))?;
            let table = compare_files(&ra, &rb, system_a.as_deref(), system_b.as_deref())?;
            print!("{table}");
            if let Some(o) = out {
                write_out(o, &table)?;
                m.outputs.push(o.display().to_string());
            }
            default_manifest = out.as_ref().map(|o| sidecar(o));
        }
        Command::Experiment { which, data, synth, datasets, graphs, variant, m: widths, seeds, budgets, inert, out } => {
            m.command = format!("experiment {}", if *which == Which::One { 1 } else { 2 });
            let (catalog, cat_text) = load_catalog(common)?;
            m.set_catalog(&cat_text);
            let mut cfg = load_config(common)?;
            if !variant.is_empty() {
                cfg.variants = variant.clone();
            }
            if !widths.is_empty() {
                cfg.m_set = widths.clone();
            }
            cfg.seeds = if seeds.is_empty() { vec![common.seed] } else { seeds.clone() };
            let suite: Vec<Dataset> = match synth {
                Some(task) => generate_suite(*task, *datasets, *graphs, common.seed).into_iter().map(|c| c.dataset).collect(),
                None => {
                    if data.is_empty() {
                        return Err(input("give dataset directories with --data or a task with --synth"));
                    }
                    data.iter()
                        .map(|d| {
                            m.add_dataset(d);
                            read_dataset(d)
                        })
                        .collect::<Result<_, _>>()?
                }
            };
            let rs = RelationSet::from_catalog(&catalog, cfg.max_ring_len);
            create_dir(out)?;
            let (records, table, extra, failures) = match which {
                Which::One => {
                    let r = run_experiment1(&suite, &rs, &catalog, &cfg)?;
                    (r.records.clone(), r.table(), None, r.failures)
                }
                Which::Two => {
                    let aug = if *inert { Augmentation::Inert } else { Augmentation::Learned };
                    let r = run_experiment2(&suite, &rs, &catalog, &cfg, budgets, aug)?;
                    let counts: String = std::iter::once("dataset\tseed\tbudget\trelations\n".to_string())
                        .chain(r.relation_counts.iter().map(|(d, s, b, n)| format!("{d}\t{s}\t{b}\t{n}\n")))
                        .collect();
                    (r.records.clone(), r.table(), Some(counts), r.failures)
                }
            };
            write_out(&out.join("records.tsv"), &records_tsv(&records))?;
            write_out(&out.join("table.txt"), &table)?;
            m.outputs.extend(["records.tsv", "table.txt"].map(|f| out.join(f).display().to_string()));
            if let Some(c) = extra {
                write_out(&out.join("relations.tsv"), &c)?;
                m.outputs.push(out.join("relations.tsv").display().to_string());
            }
            for f in &failures {
                eprintln!("failed: {f}");
            }
            print!("{table}");
            m.config = serde_json::json!({ "experiment": cfg, "budgets": budgets, "inert": inert, "synth": synth.map(|t| t.name()), "datasets": datasets, "graphs": graphs });
            default_manifest = Some(out.join("manifest.json"));
        }
        Command::Synth { task, graphs, datasets, out } => {
            m.command = "synth".into();
            if *graphs < 3 || *datasets == 0 {
                return Err(input("--graphs must be at least 3 and --datasets positive"));
            }
            let corpora = if *datasets == 1 { vec![generate(*task, *graphs, common.seed)] } else { generate_suite(*task, *datasets, *graphs, common.seed) };
            for c in &corpora {
                let dir = if *datasets == 1 { out.clone() } else { out.join(&c.dataset.name) };
                c.dataset.write_dir(&dir, &c.truth).map_err(internal)?;
                m.outputs.push(dir.display().to_string());
            }
            m.config = serde_json::json!({ "task": task.name(), "graphs": graphs, "datasets": datasets });
            default_manifest = Some(out.join("manifest.json"));
        }
    }
    m.elapsed_secs = start.elapsed().as_secs_f64();
    if let Some(path) = common.manifest.clone().or(default_manifest) {
        write_out(&path, &m.to_json())?;
    }
    Ok(())
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn only_system(records: &[vegnn_train::RunRecord], chosen: Option<&str>, file: &str) -> Result<String, CliError> {
    if let Some(s) = chosen {
        return Ok(s.to_string());
    }
    let mut systems: Vec<&str> = records.iter().map(|r| r.system.as_str()).collect();
    systems.sort_unstable();
    systems.dedup();
    match systems.as_slice() {
        [one] => Ok(one.to_string()),
        [] => Err(input(format!("{file} has no records"))),
        many => Err(input(format!("{file} holds systems {}; pick one with --system-{}", many.join(", "), &file[..1]))),
    }
}

/// Table of file A's system against file B's, one row per variant.
pub fn compare_files(
    a: &[vegnn_train::RunRecord],
    b: &[vegnn_train::RunRecord],
    system_a: Option<&str>,
    system_b: Option<&str>,
) -> Result<String, CliError> {
    let sa = only_system(a, system_a, "a")?;
    let sb = only_system(b, system_b, "b")?;
    let tag = |r: &vegnn_train::RunRecord, side: &str| vegnn_train::RunRecord { system: side.to_string(), ..r.clone() };
    let mut all: Vec<vegnn_train::RunRecord> = a.iter().filter(|r| r.system == sa).map(|r| tag(r, "A")).collect();
    all.extend(b.iter().filter(|r| r.system == sb).map(|r| tag(r, "B")));
    let mut variants: Vec<Variant> = Vec::new();
    for r in &all {
        if !variants.contains(&r.variant) {
            variants.push(r.variant);
        }
    }
    variants.sort_by_key(|v| Variant::ALL.iter().position(|x| x == v));
    let mut rows = Vec::new();
    for v in variants {
        let seeds = |side: &str| {
            let mut s: Vec<u64> = all.iter().filter(|r| r.variant == v && r.system == side).map(|r| r.seed).collect();
            s.sort_unstable();
            s.dedup();
            s.len()
        };
        if seeds("A") != seeds("B") {
            return Err(input(format!("{v}: the files hold different numbers of seeds")));
        }
        rows.push((v, compare_records(&all, v, "A", "B", seeds("A"))?));
    }
    Ok(vegnn_train::comparison_table(&format!("{sa} vs. {sb}"), &rows))
}
