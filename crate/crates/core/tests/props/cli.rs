use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use super::Prop;

pub const ALL: &[Prop] =
    &[("cli::byte_identical_reruns", byte_identical_reruns), ("cli::worker_count_independence", worker_count_independence)];

/// Runs the binary in `dir` with a clean environment.
pub fn wqed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wqed"))
        .args(args)
        .current_dir(dir)
        .env_remove("WQED_WORKERS")
        .env_remove("WQED_CACHE_DIR")
        .output()
        .expect("binary runs")
}

/// A small run of every subcommand.
pub const RUNS: &[&[&str]] = &[
    &["couplings", "--n", "8", "--xi", "2", "--dimerization", "-0.2"],
    &["phase-diagram", "--n", "8", "--theta-grid", "7", "--mu-grid", "9", "--boundary", "pbc"],
    &["mag-curve", "--n", "8", "--bandgap", "upper", "--xi", "3", "--theta", "-0.75pi", "--mu-grid", "12"],
    &["correlations", "--n", "10", "--theta", "0.3pi", "--format", "json"],
    &["bond-order", "--n", "8", "--boundary", "pbc", "--format", "gnuplot-dat"],
    &["berry", "--n", "6", "--boundary", "pbc", "--dimerization", "0.2", "--nodes", "32"],
    &["adiabatic", "--n", "6", "--n-up", "4", "--xi", "2", "--dimerization", "-0.2", "--times", "5,20", "--gamma", "0.001"],
    &["exact", "--model", "xx-finite", "--n", "40", "--dimerization", "0.3"],
];

/// Every output of one run, with the manifest timestamp removed.
pub fn snapshot(dir: &Path, args: &[&str]) -> BTreeMap<String, String> {
    let out = wqed(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut text = fs::read_to_string(&path).unwrap();
        if name == "manifest.json" {
            let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert!(v.as_object_mut().unwrap().remove("timestamp").is_some());
            text = v.to_string();
        }
        files.insert(name, text);
    }
    files
}

fn compare(extra_a: &[&str], extra_b: &[&str]) {
    for args in RUNS {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let run_a: Vec<&str> = args.iter().chain(extra_a).copied().collect();
        let run_b: Vec<&str> = args.iter().chain(extra_b).copied().collect();
        let (sa, sb) = (snapshot(a.path(), &run_a), snapshot(b.path(), &run_b));
        assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>(), "{args:?}");
        for (name, text) in &sa {
            assert!(text == &sb[name], "{args:?}: {name} differs");
        }
    }
}

fn byte_identical_reruns() {
    compare(&[], &[]);
}

fn worker_count_independence() {
    compare(&["--workers", "1"], &["--workers", "4"]);
}
