//! End-to-end runs of the `maxcosine` binary.

use std::path::Path;
use std::process::{Command, Output};

use maxcosine::data::write_tsv;
use maxcosine::numerics::Rng;
use maxcosine::synthetic::{random_library, random_pairs};

fn maxcosine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxcosine"))
        .args(args)
        .env_remove("MAXCOSINE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_lists_every_flag() {
    let out = maxcosine(&["train", "--help"]);
    assert!(out.status.success());
    let help = stdout(&out);
    for key in maxcosine::config::KEYS {
        let flag = format!("--{}", key.replace('_', "-"));
        assert!(help.contains(&flag), "train --help lacks {flag}");
    }
    assert!(help.contains("--config"));
}

#[test]
fn gradcheck_passes_at_desk_scale() {
    let out = maxcosine(&["gradcheck", "--arch", "base", "--pairs", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn train_predict_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut rng = Rng::new(31);
    let lib = random_library(80, 8, &mut rng);
    let pairs = random_pairs(20, &lib, (3, 6), &mut rng);
    lib.write_text(d.join("emb.txt")).unwrap();
    write_tsv(d.join("train.tsv"), &pairs).unwrap();
    std::fs::write(
        d.join("run.conf"),
        "# memorization run\nhidden = 16\ndropout = 0\nbatch_size = 5\nepochs = 150\n",
    )
    .unwrap();

    let out = maxcosine(&[
        "train",
        "--config",
        s(&d.join("run.conf")),
        "--train",
        s(&d.join("train.tsv")),
        "--val",
        s(&d.join("train.tsv")),
        "--embeddings",
        s(&d.join("emb.txt")),
        "--out-dir",
        s(&d.join("run")),
        "--seed",
        "4",
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let metrics = std::fs::read_to_string(d.join("run/metrics.tsv")).unwrap();
    assert_eq!(metrics.lines().count(), 150);
    assert!(metrics.lines().all(|l| l.split('\t').count() == 3));
    let ckpt = d.join("run/model.ckpt");
    let best = maxcosine::Checkpoint::load(&ckpt).unwrap();
    assert_eq!(best.meta.val_accuracy, Some(1.0), "memorization run did not reach 100%");

    for p in &pairs[..5] {
        let out = maxcosine(&[
            "predict",
            "--model",
            s(&ckpt),
            "--premise",
            &p.premise.join(" "),
            "--hypothesis",
            &p.hypothesis.join(" "),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains(&format!("label\t{}", p.label.name())), "{}", stdout(&out));
    }

    let out = maxcosine(&["eval", "--model", s(&ckpt), "--data", s(&d.join("train.tsv"))]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("accuracy"), "{}", stdout(&out));

    // Same words, wrong dimension.
    random_library(80, 5, &mut rng).write_text(d.join("emb5.txt")).unwrap();
    let out = maxcosine(&[
        "eval",
        "--model",
        s(&ckpt),
        "--data",
        s(&d.join("train.tsv")),
        "--embeddings",
        s(&d.join("emb5.txt")),
    ]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("dimension"), "{err}");
}

#[test]
fn ensemble_manifest_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut rng = Rng::new(32);
    let lib = random_library(40, 4, &mut rng);
    write_tsv(d.join("train.tsv"), &random_pairs(12, &lib, (2, 5), &mut rng)).unwrap();
    lib.write_binary(d.join("emb.bin")).unwrap();
    let out = maxcosine(&[
        "ensemble-train",
        "--train",
        s(&d.join("train.tsv")),
        "--val",
        s(&d.join("train.tsv")),
        "--embeddings",
        s(&d.join("emb.bin")),
        "--hidden",
        "4",
        "--epochs",
        "2",
        "--seeds",
        "5,6,7",
        "--out-dir",
        s(&d.join("ens")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = d.join("ens/ensemble.manifest");
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let out = maxcosine(&["eval", "--model", s(&manifest), "--data", s(&d.join("train.tsv"))]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = maxcosine(&["predict", "--model", s(&manifest), "--premise", "w1 w2", "--hypothesis", "w3"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn match_and_convert() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("e.txt"), "cat 1 0\ndog 0.9 0.1\ncar 0 1\n").unwrap();
    let out = maxcosine(&["match", "--embeddings", s(&d.join("e.txt")), "--premise", "A dog and a car", "--hypothesis", "cat"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("cat -> dog ("), "{}", stdout(&out));

    let out = maxcosine(&["embed-convert", "--input", s(&d.join("e.txt")), "--output", s(&d.join("e.bin")), "--to", "binary"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = maxcosine(&["embed-convert", "--input", s(&d.join("e.bin")), "--output", s(&d.join("back.txt")), "--to", "text"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let back = std::fs::read_to_string(d.join("back.txt")).unwrap();
    assert!(back.lines().next().unwrap().starts_with("cat 1 0"), "{back}");
}

#[test]
fn bad_config_fails_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "hiden = 3\n").unwrap();
    let out = maxcosine(&["train", "--config", s(&conf)]);
    assert!(!out.status.success());
    assert_eq!(stderr(&out).trim().lines().count(), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("hiden"));
}
