//! End-to-end checks of the binary: exit codes, output files, and the
//! printed tables.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn butterfly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_butterfly"))
        .args(args)
        .output()
        .expect("the binary must run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn unknown_scheme_is_a_config_error() {
    let out = butterfly(&["simulate", "--scheme", "warp_drive"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("unknown scheme"));
}

#[test]
fn partial_cache_without_fraction_is_a_config_error() {
    let out = butterfly(&["simulate", "--scheme", "cache_partial"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("caching fraction"));
}

#[test]
fn zero_trials_is_a_config_error() {
    let out = butterfly(&["simulate", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("trials must be at least 1"));
}

#[test]
fn malformed_power_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    for bad in ["40:100", "100:40:10", "40:100:abc", "40:100:0"] {
        let out = butterfly(&[
            "simulate",
            "--scheme",
            "no_cache",
            "--pdb",
            bad,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "grid {bad:?}: {}", stderr(&out));
    }
}

#[test]
fn narrow_power_grid_is_rejected_for_slope_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = butterfly(&[
        "simulate",
        "--scheme",
        "no_cache",
        "--pdb",
        "40:60:10",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("slope runs need at least"));
}

#[test]
fn mismatched_topology_is_a_config_error() {
    let out = butterfly(&["simulate", "--scheme", "cache", "--topology", "mimo"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("does not match"));
}

#[test]
fn degenerate_channel_file_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.json");
    let unit = "[1.0, 0.0]";
    let mut text = String::from("{\n  \"variant\": \"single\",\n  \"center_antennas\": 1,\n");
    text.push_str("  \"seed\": 0,\n  \"h_min\": 0.5,\n  \"h_max\": 2.0,\n");
    text.push_str("  \"to_r2\": {");
    for (i, s) in ["S1", "S2", "S3", "S4"].iter().enumerate() {
        let comma = if i > 0 { ", " } else { "" };
        text.push_str(&format!("{comma}\"{s}\": [{unit}]"));
    }
    text.push_str("},\n  \"from_r2\": {");
    for (i, d) in ["D1", "D2", "D3", "D4"].iter().enumerate() {
        let comma = if i > 0 { ", " } else { "" };
        text.push_str(&format!("{comma}\"{d}\": [{unit}]"));
    }
    text.push_str("},\n  \"side\": {");
    let links = [
        "S1->R1", "S4->R1", "S2->R3", "S3->R3", "R1->D2", "R1->D3", "R3->D1", "R3->D4",
    ];
    for (i, link) in links.iter().enumerate() {
        let comma = if i > 0 { ", " } else { "" };
        text.push_str(&format!("{comma}\"{link}\": {unit}"));
    }
    text.push_str("}\n}\n");
    fs::write(&path, text).unwrap();

    let out = butterfly(&["verify", "--channels", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("degenerate"));
}

#[test]
fn healthy_emitted_channel_file_passes_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let run = butterfly(&[
        "simulate",
        "--scheme",
        "mimo",
        "--seed",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    for name in [
        "rates-3.csv",
        "dof-3.json",
        "channels-3.json",
        "report-3.json",
        "beamformer-3.json",
    ] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }

    let channels = out_dir.join("channels-3.json");
    let check = butterfly(&["verify", "--channels", channels.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0), "stderr: {}", stderr(&check));
    assert!(stdout(&check).contains("ok"));
}

#[test]
fn verification_battery_passes_and_fails_by_tolerance() {
    let ok = butterfly(&["verify", "--trials", "25", "--seed", "5"]);
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", stderr(&ok));
    let text = stdout(&ok);
    for needle in [
        "residual(cache)",
        "residual(mimo)",
        "nullspace census: rank 7, dim=2",
        "cross-check principal angle",
        "genie bound=2",
        "relay power within",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in:\n{text}");
    }
    assert!(!text.contains("FAIL"));

    // An unreachable residual tolerance turns the same battery into a
    // verification failure.
    let bad = butterfly(&[
        "verify",
        "--trials",
        "25",
        "--seed",
        "5",
        "--tol-residual",
        "1e-30",
    ]);
    assert_eq!(bad.status.code(), Some(4), "stderr: {}", stderr(&bad));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn feasibility_table_lists_the_counting_argument() {
    for invocation in [vec!["feasibility"], vec!["verify", "--feasibility"]] {
        let out = butterfly(&invocation);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        let rows: Vec<Vec<String>> = text
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().map(String::from).collect())
            .collect();
        assert!(rows.contains(&vec![
            "2".into(),
            "yes".into(),
            "6".into(),
            "8".into(),
            "no".into()
        ]));
        assert!(rows.contains(&vec![
            "3".into(),
            "no".into(),
            "9".into(),
            "8".into(),
            "yes".into()
        ]));
    }
}

#[test]
fn bound_reports_the_preset_cut() {
    let out = butterfly(&["bound", "--scheme", "no_cache", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("forward 1 reverse 1 total 2"));
    assert!(text.contains("measured slope (no_cache)"));
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out_a = dir.path().join("a");
    fs::write(
        &cfg,
        format!(
            "scheme = \"cache\"\npdb = \"40:100:10\"\nseed = 4\ntrials = 1\nout = \"{}\"\n",
            out_a.display()
        ),
    )
    .unwrap();

    let run = butterfly(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    assert!(out_a.join("rates-4.csv").exists());

    let out_b = dir.path().join("b");
    let over = butterfly(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert!(over.status.success(), "stderr: {}", stderr(&over));
    assert!(out_b.join("rates-6.csv").exists());
    assert!(!out_b.join("rates-4.csv").exists());
}

#[test]
fn invalid_cut_in_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cut.toml");
    fs::write(
        &cfg,
        "scheme = \"no_cache\"\n[cut]\nleft = [\"S1\", \"R1\", \"S4\"]\nright = [\"S2\", \"R3\", \"S3\"]\nbridge = []\n",
    )
    .unwrap();
    let out = butterfly(&["bound", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn preset_recipes_parse_and_run() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    for preset in ["thm1", "thm2", "cor1", "thm3", "cor2"] {
        let cfg = manifest.join("presets").join(format!("{preset}.toml"));
        let out_dir = dir.path().join(preset);
        let run = butterfly(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--trials",
            "1",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(run.status.success(), "{preset}: {}", stderr(&run));
        assert!(out_dir.join("rates-7.csv").exists(), "{preset} wrote no sweep");
    }
}
