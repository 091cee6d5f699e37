use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hfsem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfsem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(dir: &Path, command: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(format!("{command}_report.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn empty_label_file_gives_empty_table_and_warning() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("labels.csv"), "").unwrap();
    let cfg = write_config(dir.path(), "out = \"out\"\n[inputs]\nlabels = \"labels.csv\"\n");
    let o = hfsem(&["aggregate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    assert_eq!(std::fs::read_to_string(out.join("indicators.csv")).unwrap().trim(), "fips");
    let r = report(&out, "aggregate");
    assert_eq!(r["status"], "ok");
    assert!(r["warnings"][0].as_str().unwrap().contains("empty"));
    assert!(r["timestamp"].is_string());
    assert_eq!(r["inputs"][0]["sha256"], "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

#[test]
fn missing_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("labels.csv"), "tweet_id,day,geoid,label\n1,2015-01-01,01001020100,high\n").unwrap();
    let cfg = write_config(dir.path(), "out = \"out\"\n[inputs]\nlabels = \"labels.csv\"\n");
    let o = hfsem(&["aggregate", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("question"), "{}", stderr(&o));
    assert_eq!(report(&dir.path().join("out"), "aggregate")["status"], "failed");
}

#[test]
fn bad_rows_fail_and_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("labels.csv"),
        "tweet_id,day,geoid,question,label\n1,2015-01-01,01001020100,hope,high\n2,2015-01-01,01001020100,hope,very\n",
    )
    .unwrap();
    let cfg = write_config(dir.path(), "out = \"out\"\n[inputs]\nlabels = \"labels.csv\"\n");
    let o = hfsem(&["aggregate", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    let r = report(&dir.path().join("out"), "aggregate");
    assert_eq!(r["details"]["row_errors"][0]["line"], 3);
    assert_eq!(r["counts"]["accepted"], 1);
}

#[test]
fn simulate_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hfsem(&["simulate", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn correlate_needs_shared_counties() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ind.csv"), "fips,hope\n01001,0.5\n01003,0.2\n01005,0.1\n").unwrap();
    std::fs::write(
        dir.path().join("climate.csv"),
        "fips,heat,fire,drought,inland,coastal,wind\n02001,1,2,3,4,5,6\n",
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        "out = \"out\"\n[inputs]\nindicators = \"ind.csv\"\nclimate = \"climate.csv\"\n",
    );
    let o = hfsem(&["correlate", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
}

fn simulate_small(dir: &Path, out: &str, seed: &str, threads: &str) -> PathBuf {
    let cfg = write_config(
        dir,
        &format!(
            "out = \"{out}\"\n[inputs]\nlabels = \"{out}/labels.csv\"\nclimate = \"{out}/climate.csv\"\ngeometry = \"counties.geojson\"\n[simulate]\ncounties = 120\nrecords_per_question = 30\n"
        ),
    );
    let c = cfg.to_str().unwrap();
    for (cmd, extra) in [
        ("simulate", vec!["--seed", seed]),
        ("aggregate", vec![]),
        ("correlate", vec![]),
        ("fit", vec![]),
        ("scores", vec![]),
    ] {
        let mut args = vec![cmd, "--config", c, "--threads", threads];
        args.extend(extra);
        let o = hfsem(&args);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
    }
    dir.join(out)
}

fn write_geometry(dir: &Path) {
    let features: Vec<String> = ["01001", "01003", "99999"]
        .iter()
        .map(|g| format!(r#"{{"type":"Feature","properties":{{"GEOID":"{g}"}},"geometry":null}}"#))
        .collect();
    std::fs::write(
        dir.join("counties.geojson"),
        format!(r#"{{"type":"FeatureCollection","features":[{}]}}"#, features.join(",")),
    )
    .unwrap();
}

#[test]
fn closed_loop_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_geometry(dir.path());
    let a = simulate_small(dir.path(), "a", "11", "1");
    let b = simulate_small(dir.path(), "b", "11", "4");
    for f in [
        "labels.csv",
        "climate.csv",
        "observations.csv",
        "truth.json",
        "indicators.csv",
        "correlations.csv",
        "fit.json",
        "fit.txt",
        "scores.csv",
        "scores.geojson",
    ] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let r = report(&a, "scores");
    assert_eq!(r["counts"]["geometry_gaps"], 1);
    let header = std::fs::read_to_string(a.join("scores.csv")).unwrap();
    assert!(header.starts_with("fips,climate_risk,"));

    let c = simulate_small(dir.path(), "c", "12", "1");
    assert_ne!(
        std::fs::read(a.join("labels.csv")).unwrap(),
        std::fs::read(c.join("labels.csv")).unwrap()
    );
}

#[test]
fn nonconvergence_exits_nonzero_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    write_geometry(dir.path());
    let out = simulate_small(dir.path(), "o", "5", "1");
    let cfg = write_config(
        dir.path(),
        "out = \"o\"\n[inputs]\nclimate = \"o/climate.csv\"\n[fit]\nmax_iterations = 2\n",
    );
    let c = cfg.to_str().unwrap();
    let o = hfsem(&["fit", "--config", c]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(report(&out, "fit")["status"], "not_converged");
    let s = hfsem(&["scores", "--config", c]);
    assert!(!s.status.success());
    let o = hfsem(&["fit", "--config", c, "--allow-nonconverged"]);
    assert!(o.status.success());
    assert!(report(&out, "fit")["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w.as_str().unwrap().contains("allow-nonconverged")));
}
