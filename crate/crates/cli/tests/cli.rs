use std::fs;
use std::path::Path;

use vegnn_cli::main_with_args;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("vegnn").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(run(&["synth", "no-such-task", "-o", p(&out)]), 2);
    assert_eq!(run(&["enrich", p(&dir.path().join("missing.gdoc")), "-o", p(&out)]), 2);
    assert_eq!(run(&["synth", "ring-class", "--graphs", "2", "-o", p(&out)]), 2);
    assert_eq!(run(&["not-a-command"]), 2);
    let facts = dir.path().join("bad.pl");
    fs::write(&facts, "bond(m1,1,2,c,c,1).\nbond(m1,2,3,c,c,1).\nbond(m1,oops).\n").unwrap();
    assert_eq!(run(&["ingest", p(&facts), "-o", p(&out)]), 2);
}

#[test]
fn synth_writes_balanced_datasets_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite");
    assert_eq!(run(&["synth", "fused-class", "--graphs", "30", "--datasets", "2", "--seed", "4", "-o", p(&out)]), 0);
    for name in ["fused-class-01", "fused-class-02"] {
        let ds = vegnn_core::dataset::Dataset::read_dir(&out.join(name)).unwrap();
        assert_eq!(ds.class_counts(), vec![15, 15]);
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["seed"], 4);
}

#[test]
fn learn_rels_with_no_draws_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tri");
    assert_eq!(run(&["synth", "triangle-ilp", "--graphs", "20", "-o", p(&data)]), 0);
    let rels = dir.path().join("rels.pl");
    assert_eq!(run(&["learn-rels", p(&data), "--max-draws", "0", "-o", p(&rels)]), 0);
    assert!(fs::read_to_string(&rels).unwrap().trim().is_empty());
    assert!(dir.path().join("rels.pl.manifest.json").exists());

    assert_eq!(run(&["learn-rels", p(&data), "--max-draws", "20", "-o", p(&rels)]), 0);
    let text = fs::read_to_string(&rels).unwrap();
    let n = text.lines().filter(|l| l.starts_with("newr_")).count();
    assert!(n > 0 && n <= 20, "{text}");
}

#[test]
fn train_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("rings");
    assert_eq!(run(&["synth", "ring-class", "--graphs", "40", "-o", p(&data)]), 0);
    let config = dir.path().join("c.toml");
    fs::write(&config, "[train]\nmax_epochs = 5\npatience = 2\n").unwrap();
    let model = dir.path().join("model");
    assert_eq!(run(&["train", p(&data), "--variant", "sage", "--m", "4", "--config", p(&config), "-o", p(&model)]), 0);
    for f in ["model.txt", "setup.json", "history.tsv", "manifest.json"] {
        assert!(model.join(f).exists(), "{f}");
    }
    assert_eq!(run(&["eval", p(&model), p(&data)]), 0);
    assert_eq!(run(&["eval", p(&dir.path().join("nope")), p(&data)]), 2);
}

#[test]
fn comparing_a_file_with_itself_is_all_equal() {
    let dir = tempfile::tempdir().unwrap();
    let records = "dataset\tvariant\tsystem\tseed\tm_star\tval_acc\ttest_acc\tbest_epoch\tepochs\n\
                   d1\tgcn\tgnn\t0\t8\t0.7\t0.6\t3\t10\n\
                   d2\tgcn\tgnn\t0\t8\t0.8\t0.9\t4\t10\n";
    let a = dir.path().join("a.tsv");
    fs::write(&a, records).unwrap();
    let parsed = vegnn_train::parse_records_tsv(records).unwrap();
    let table = vegnn_cli::compare_files(&parsed, &parsed, None, None).unwrap();
    assert!(table.contains("0/0/2"), "{table}");
    assert!(table.contains("(1.000)"), "{table}");
    let out = dir.path().join("t.txt");
    assert_eq!(run(&["compare", p(&a), p(&a), "-o", p(&out)]), 0);
    assert_eq!(fs::read_to_string(out).unwrap(), table);
}
