use std::path::Path;
use std::process::{Command, Output};

use relpred::eval::{evaluate, Scorer};
use relpred::prior::{PriorConfig, PriorMode, PriorModel};
use relpred::{KnowledgeGraph, Split, TypeCatalog};

fn relpred(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relpred"))
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(cwd: &Path, args: &[&str]) -> String {
    let out = relpred(cwd, args);
    assert!(
        out.status.success(),
        "relpred {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const DATA: [&str; 6] = [
    "--train",
    "syn/train.txt",
    "--valid",
    "syn/valid.txt",
    "--test",
    "syn/test.txt",
];

fn with_data<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(DATA.iter()).chain(tail).copied().collect()
}

fn synth(dir: &Path) {
    ok(
        dir,
        &[
            "synth",
            "--entities",
            "30",
            "--relations",
            "3",
            "--types",
            "6",
            "--seed",
            "5",
            "--out",
            "syn",
        ],
    );
}

#[test]
fn synth_then_import_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let stdout = ok(
        dir.path(),
        &with_data(&["import"], &["--types", "syn/types.txt", "--out", "imp"]),
    );
    let first = stdout.lines().next().unwrap();
    assert!(first.starts_with("3 relations, "), "{first}");
    let stats = std::fs::read_to_string(dir.path().join("imp/stats.csv")).unwrap();
    assert!(stats.starts_with("entities,relations,train,valid,test,typed_entities,types\n"));
    assert!(dir.path().join("imp/catalog.json").exists());
}

#[test]
fn untrained_checkpoint_evaluates_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    ok(
        dir.path(),
        &with_data(
            &["train"],
            &["--steps", "0", "--dim", "4", "--seed", "2", "--out", "tr"],
        ),
    );
    assert_eq!(
        std::fs::read_to_string(dir.path().join("tr/losses.csv")).unwrap(),
        "step,loss\n"
    );
    let args = with_data(
        &["eval"],
        &["--checkpoint", "tr/model.ckpt", "--likelihood-only", "--csv"],
    );
    let a = ok(dir.path(), &args);
    let b = ok(dir.path(), &args);
    assert_eq!(a, b);
    assert!(a.starts_with("scope,slice,MR,Hits@1,Hits@10,count,zero_prior_count\n"));
}

#[test]
fn prior_only_on_deterministic_synth_ranks_gold_first() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let csv = ok(
        dir.path(),
        &with_data(&["eval"], &["--types", "syn/types.txt", "--prior-only", "--csv"]),
    );
    let overall = csv.lines().nth(1).unwrap();
    assert!(overall.starts_with("overall,all,1.0000,100.00,100.00,"), "{overall}");

    let h = ok(
        dir.path(),
        &with_data(
            &["eval"],
            &["--types", "syn/types.txt", "--prior-only", "--mode", "h", "--csv"],
        ),
    );
    assert_eq!(h, library_prior_csv(&dir.path().join("syn"), PriorMode::HeadOnly));
}

fn library_prior_csv(syn: &Path, mode: PriorMode) -> String {
    let mut g = KnowledgeGraph::new();
    for split in Split::ALL {
        g.load_triples(syn.join(format!("{split}.txt")), split).unwrap();
    }
    let mut c = TypeCatalog::new();
    c.load_fb15k_types(syn.join("types.txt"), &g).unwrap();
    let config = PriorConfig {
        mode,
        ..PriorConfig::with_eta(0.1)
    };
    let prior = PriorModel::build(&g, &c, config);
    evaluate(&g, &Scorer::prior_only(&prior), Split::Test)
        .unwrap()
        .to_csv(&g)
}

#[test]
fn exported_prior_matches_rebuilt_prior() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    ok(
        dir.path(),
        &with_data(
            &["build-prior"],
            &["--types", "syn/types.txt", "--eta", "0.2", "--out", "pr"],
        ),
    );
    let sizes = std::fs::read_to_string(dir.path().join("pr/set_sizes.csv")).unwrap();
    assert_eq!(sizes.lines().count(), 4);
    let common = ["--types", "syn/types.txt", "--prior-only", "--csv", "--mode", "t"];
    let from_file: Vec<&str> = common
        .iter()
        .copied()
        .chain(["--prior-model", "pr/prior.json"])
        .collect();
    let rebuilt: Vec<&str> = common.iter().copied().chain(["--eta", "0.2"]).collect();
    assert_eq!(
        ok(dir.path(), &with_data(&["eval"], &from_file)),
        ok(dir.path(), &with_data(&["eval"], &rebuilt))
    );
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = relpred(
        dir.path(),
        &["eval", "--train", "absent.txt", "--types", "t.txt", "--prior-only"],
    );
    assert_eq!(missing.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&missing.stderr);
    assert!(stderr.lines().any(|l| l.starts_with("error[io]: ")), "{stderr}");

    let unknown = relpred(dir.path(), &["eval", "--no-such-flag"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).starts_with("error[usage]: "));

    synth(dir.path());
    let no_source = relpred(dir.path(), &with_data(&["eval"], &["--likelihood-only"]));
    assert_eq!(no_source.status.code(), Some(6));

    std::fs::write(dir.path().join("bad.ckpt"), b"not a checkpoint").unwrap();
    let bad = relpred(
        dir.path(),
        &with_data(&["eval"], &["--checkpoint", "bad.ckpt", "--likelihood-only"]),
    );
    assert_eq!(bad.status.code(), Some(5));
}

#[test]
fn resume_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    ok(
        dir.path(),
        &with_data(
            &["train"],
            &["--steps", "20", "--dim", "4", "--model", "transe", "--out", "tr"],
        ),
    );
    ok(
        dir.path(),
        &with_data(
            &["eval"],
            &[
                "--types",
                "syn/types.txt",
                "--checkpoint",
                "tr/model.ckpt",
                "--dump-ranks",
                "--out",
                "ev",
            ],
        ),
    );
    // replay from another working directory
    let elsewhere = tempfile::tempdir().unwrap();
    let from = dir.path().join("ev");
    let into = dir.path().join("ev2");
    ok(
        elsewhere.path(),
        &[
            "--resume-from",
            from.to_str().unwrap(),
            "--into",
            into.to_str().unwrap(),
        ],
    );
    for f in ["report.csv", "ranks.tsv"] {
        assert_eq!(
            std::fs::read(from.join(f)).unwrap(),
            std::fs::read(into.join(f)).unwrap(),
            "{f}"
        );
    }

    ok(
        elsewhere.path(),
        &[
            "--resume-from",
            dir.path().join("tr").to_str().unwrap(),
            "--into",
            into.join("tr").to_str().unwrap(),
        ],
    );
    for f in ["model.ckpt", "losses.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("tr").join(f)).unwrap(),
            std::fs::read(into.join("tr").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn thread_count_does_not_change_training() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    for n in ["1", "3"] {
        let out = format!("tr{n}");
        ok(
            dir.path(),
            &with_data(
                &["--threads", n, "train"],
                &["--model", "quate", "--dim", "4", "--steps", "30", "--out", &out],
            ),
        );
    }
    for f in ["model.ckpt", "losses.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("tr1").join(f)).unwrap(),
            std::fs::read(dir.path().join("tr3").join(f)).unwrap(),
            "{f}"
        );
    }
}
