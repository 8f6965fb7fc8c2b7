use std::path::Path;
use std::process::{Command, Output};

use hcbound::report::ReportBundle;

fn hcbound(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcbound"))
        .args(args)
        .env("HC_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8(b.to_vec()).unwrap()
}

fn bundle(path: &Path) -> ReportBundle {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn closed_bounds_for_every_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("closed.json");
    let o = hcbound(
        &["bound", "--scheme", "closed", "--lattice", "all", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", text(&o.stderr));
    let b = bundle(&out);
    assert_eq!(b.schema_version, 1);
    let want = [0.3924, 0.4279, 0.3253, 0.3826, 0.2858];
    assert_eq!(b.reports.len(), 5);
    for (r, w) in b.reports.iter().zip(want) {
        assert!((r.value_nats - w).abs() < 5e-4, "{}: {}", r.lattice, r.value_nats);
    }
    assert!(text(&o.stdout).contains("square-moore"));
}

#[test]
fn block_bound_is_deterministic_and_cache_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hcbound(
            &["bound", "--scheme", "block", "--n", "3", "--starts", "4", "--out", out.to_str().unwrap()],
            &cache,
        );
        assert!(o.status.success(), "{}", text(&o.stderr));
        (bundle(&out), text(&o.stderr))
    };
    let (cold, _) = run("cold.json");
    assert!(cache.join("family-n3-d4weak.hcfam").exists());
    let (warm, _) = run("warm.json");
    assert_eq!(cold.without_timing(), warm.without_timing());
    assert!((cold.reports[0].value_nats - 0.4014).abs() < 5e-4);

    std::fs::write(cache.join("family-n3-d4weak.hcfam"), b"HCFAM garbage").unwrap();
    let (rebuilt, stderr) = run("rebuilt.json");
    assert!(stderr.contains("warning"), "{stderr}");
    assert_eq!(rebuilt.without_timing(), cold.without_timing());
    let (again, stderr) = run("again.json");
    assert!(!stderr.contains("warning"));
    assert_eq!(again.without_timing(), cold.without_timing());
}

#[test]
fn four_by_four_needs_long() {
    let dir = tempfile::tempdir().unwrap();
    let o = hcbound(&["bound", "--scheme", "block", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("--long"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[run]\nscheme = \"closed\"\ncolour = \"red\"\n").unwrap();
    for args in [
        vec!["bound", "--config", cfg.to_str().unwrap()],
        vec!["bound", "--lattice", "hexagonal"],
        vec!["bound", "--scheme", "equalized", "--lattice", "kagome"],
        vec!["reduce", "--n", "6"],
        vec!["strip", "--boundary", "open"],
        vec!["sample", "--lattice", "square", "--params", "0.1,0.2"],
        vec!["bogus-command"],
    ] {
        let o = hcbound(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", text(&o.stderr));
    }
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("r.json");
    std::fs::write(
        &cfg,
        format!(
            "[run]\nscheme = \"three-hex\"\nlattice = \"triangular\"\n[optimizer]\nstarts = 3\nseed = 5\n[output]\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = hcbound(&["bound", "--config", cfg.to_str().unwrap(), "--lattice", "honeycomb"], dir.path());
    assert!(o.status.success(), "{}", text(&o.stderr));
    let b = bundle(&out);
    assert_eq!(b.reports[0].lattice, "honeycomb");
    assert_eq!(b.reports[0].scheme, "three-hex");
    assert_eq!(b.provenance.settings.starts, 3);
    assert_eq!(b.provenance.seed, 5);
    assert!((b.reports[0].value_nats - 0.4304).abs() < 1e-3);
}

#[test]
fn reduce_prints_counts_and_writes_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = hcbound(&["reduce", "--n", "1"], dir.path());
    assert!(o.status.success());
    let s = text(&o.stdout);
    assert!(s.contains("masks                  2"), "{s}");
    assert!(s.contains("(1 free)"), "{s}");
    let o = hcbound(
        &["reduce", "--n", "3", "--cache-dir", dir.path().join("flag").to_str().unwrap()],
        dir.path(),
    );
    let s = text(&o.stdout);
    assert!(s.contains("102 (101 free)") && s.contains("47 (46 free)"), "{s}");
    assert!(dir.path().join("flag/family-n3-d4weak.hcfam").exists());
    assert!(dir.path().join("flag/family-n3-d4.hcfam").exists());
}

#[test]
fn profile_csv_has_ten_rows_per_generator() {
    let dir = tempfile::tempdir().unwrap();
    let o = hcbound(&["profile", "--n", "3", "--generators", "1,2,3"], dir.path());
    assert!(o.status.success(), "{}", text(&o.stderr));
    let csv = text(&o.stdout);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,probability,generator"));
    let rows: Vec<(usize, f64, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect();
    assert_eq!(rows.len(), 30);
    for g in ["1x1", "2x2", "3x3"] {
        let sel: Vec<_> = rows.iter().filter(|r| r.2 == g).collect();
        assert_eq!(sel.iter().map(|r| r.0).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());
        assert!((sel.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert!(text(&o.stderr).contains("between k = 3 and k = 4"));
}

#[test]
fn strip_and_sample_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = hcbound(&["strip", "--max-width", "4", "--boundary", "both"], dir.path());
    assert!(o.status.success());
    let csv = text(&o.stdout);
    assert!(csv.starts_with("width,boundary,entropy\n1,free,0.4812118250596"));
    assert_eq!(csv.lines().count(), 9);

    let out = dir.path().join("s.json");
    let o = hcbound(
        &["sample", "--lattice", "kagome", "--width", "60", "--seed", "3", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", text(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["hard_core"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    for row in v["rows"].as_array().unwrap() {
        for key in ["stage", "analytic", "empirical", "stderr", "n_sites"] {
            assert!(row.get(key).is_some());
        }
    }
}

/// `verify` runs every check; the width-12 free-boundary strip check fails, so
/// the exit code is 1.
#[test]
fn verify_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = hcbound(&["verify"], dir.path());
    let s = text(&o.stdout);
    assert!(s.contains("PASS  [blocking constant] c_lower = 15/8"), "{s}");
    assert!(s.contains("(0.21367, 8/31)"));
    assert!(s.contains("[one-dimensional entropy]"));
    let fails: Vec<&str> = s.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "{fails:?}");
    assert!(fails[0].contains("width 12, free boundary"));
    assert_eq!(o.status.code(), Some(1));
}
