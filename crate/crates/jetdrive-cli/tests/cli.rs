//! End-to-end checks of the command-line binary: output shape, exit
//! codes, and byte-for-byte determinism of the emitted artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetdrive"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

#[test]
fn pads_table_covers_all_three_schemes() {
    let out = run(&["pads", "--nozzles", "1000", "--table"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1001 pads"), "{text}");
    assert!(text.contains("65 pads"), "{text}");
    assert!(text.contains("31 pads"), "{text}");
    assert!(text.contains("[10, 10, 10]"), "{text}");
    assert!(text.contains("1024 cells"), "{text}");
}

#[test]
fn pads_single_scheme_and_explicit_axes() {
    let out = run(&["pads", "--nozzles", "100", "--dims", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("21 pads"));

    let out = run(&["pads", "--nozzles", "125", "--dims", "2", "--axes", "16,8"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("25 pads"));
}

#[test]
fn pads_usage_and_capacity_errors() {
    // No dims, axes or table: usage error.
    let out = run(&["pads", "--nozzles", "5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["pads", "--nozzles", "125", "--dims", "2", "--axes", "11,11"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("topology"), "{}", stderr(&out));
}

#[test]
fn compare_prints_reduction_and_speedup() {
    let out = run(&[
        "compare",
        "--nozzles",
        "125",
        "--axes2d",
        "16,8",
        "--axes3d",
        "5,5,5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("76.7%"), "{text}");
    assert!(text.contains("4.39x speedup"), "{text}");
    assert!(text.contains("25  ->  16"), "{text}");

    let out = run(&["compare", "--nozzles", "125", "--axes2d", "16,8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn crossover_lists_crossings_and_reference_readings() {
    let out = run(&["crossover", "--max", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("4.000000"), "{text}");
    assert!(text.contains("5.196152"), "{text}");
    assert!(text.contains("11.390625"), "{text}");
    assert!(text.contains("10 and 30"), "{text}");
    // Five table rows plus headers.
    assert_eq!(text.lines().count(), 5 + 6, "{text}");
}

#[test]
fn simulate_black_page_fires_every_pixel() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("black.pbm");
    write(&job, "P1\n2 4\n1 1\n1 1\n1 1\n1 1\n");
    let report = dir.path().join("report.json");
    let out = run(&[
        "simulate",
        "--job",
        job.to_str().unwrap(),
        "--axes",
        "2,2",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["drops_fired"], 8);
    assert_eq!(json["drops_ejected"], 8);
    assert_eq!(json["frames"], 2);
    // Two 2D frames of 4 slots x 3 us each.
    assert_eq!(json["elapsed"], 24_000_000);
    assert_eq!(json["page_mode"], "Binary");
}

#[test]
fn simulate_white_page_fires_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("white.pbm");
    write(&job, "P1\n3 2\n0 0 0\n0 0 0\n");
    let report = dir.path().join("report.json");
    let out = run(&[
        "simulate",
        "--job",
        job.to_str().unwrap(),
        "--axes",
        "1,2",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["drops_fired"], 0);
    assert!(json["elapsed"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_gray_page_reports_gray_mode() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("shade.pgm");
    write(&job, "P2\n2 2\n255\n255 130\n127 0\n");
    let report = dir.path().join("report.json");
    let out = run(&[
        "simulate",
        "--job",
        job.to_str().unwrap(),
        "--axes",
        "2,2",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["page_mode"], "Gray");
    assert_eq!(json["ink_pixels"], 2);
    assert_eq!(json["drops_fired"], 2);
    assert_eq!(json["drops_ejected"], 2);
}

#[test]
fn simulate_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("page.pbm");
    write(&job, "P1\n3 8\n1 0 1\n0 1 0\n1 1 1\n0 0 0\n1 0 0\n0 1 1\n1 1 0\n0 0 1\n");
    let mut artifacts = Vec::new();
    for pass in 0..2 {
        let vcd = dir.path().join(format!("{pass}.vcd"));
        let report = dir.path().join(format!("{pass}.json"));
        let out = run(&[
            "simulate",
            "--job",
            job.to_str().unwrap(),
            "--axes",
            "2,2,2",
            "--vcd",
            vcd.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        artifacts.push((
            std::fs::read(&vcd).unwrap(),
            std::fs::read(&report).unwrap(),
            stdout(&out),
        ));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "VCD outputs differ");
    assert_eq!(artifacts[0].1, artifacts[1].1, "reports differ");
    assert_eq!(artifacts[0].2, artifacts[1].2, "stdout differs");
    assert!(!artifacts[0].0.is_empty());
}

#[test]
fn simulate_input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pbm");
    write(&bad, "GIF89a");
    let out = run(&["simulate", "--job", bad.to_str().unwrap(), "--axes", "2,2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("raster"), "{}", stderr(&out));

    let missing = dir.path().join("nope.pbm");
    let out = run(&["simulate", "--job", missing.to_str().unwrap(), "--axes", "2,2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("page.pbm");
    write(&job, "P1\n1 1\n1\n");

    let cfg = dir.path().join("typo.toml");
    write(&cfg, "[timing]\npulse = 1.0\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "simulate",
        "--job",
        job.to_str().unwrap(),
        "--axes",
        "1,1",
    ]);
    assert_eq!(out.status.code(), Some(4));

    let cfg = dir.path().join("strategy.toml");
    write(&cfg, "[factorization]\nstrategy = \"fibonacci\"\n");
    let out = run(&["--config", cfg.to_str().unwrap(), "pads", "--nozzles", "9", "--dims", "2"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn breakdown_config_exits_5_and_names_the_driver() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("dot.pbm");
    write(&job, "P1\n1 1\n1\n");
    let cfg = dir.path().join("hot.toml");
    write(&cfg, "[electrical]\nnominal_drive = 9.5\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "simulate",
        "--job",
        job.to_str().unwrap(),
        "--axes",
        "1,1",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("driver"), "{}", stderr(&out));
}

#[test]
fn chunked_config_still_passes_the_production_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("band.pbm");
    write(&job, "P1\n2 8\n1 1\n1 1\n1 1\n1 1\n1 1\n1 1\n1 1\n1 1\n");
    let cfg = dir.path().join("chunked.toml");
    write(
        &cfg,
        "[timing]\nmax_parallel_fires = 2\nsettle_time = 1e-7\npipelined_registration = true\n",
    );
    let report = dir.path().join("report.json");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "simulate",
        "--job",
        job.to_str().unwrap(),
        "--axes",
        "2,2,2",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["drops_fired"], 16);
}

#[test]
fn pow2_strategy_changes_the_factorization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pow2.toml");
    write(&cfg, "[factorization]\nstrategy = \"pow2\"\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "pads",
        "--nozzles",
        "125",
        "--dims",
        "2",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("[16, 8]"), "{}", stdout(&out));
}

#[test]
fn help_lists_subcommands() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for cmd in ["pads", "compare", "crossover", "simulate"] {
        assert!(text.contains(cmd), "{text}");
    }
}
