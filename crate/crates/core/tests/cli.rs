use std::path::Path;
use std::process::{Command, Output};

use rcmplex::{PointConfiguration, SimplicialComplex};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcmplex")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sample_writes_a_reproducible_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--out", "a", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["sample", "--out", "b", "--seed", "3", "--threads", "2"], dir.path());
    assert!(o.status.success());
    let a = std::fs::read_to_string(dir.path().join("a/configuration.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/configuration.json")).unwrap();
    assert_eq!(a, b);
    assert!(!PointConfiguration::from_json(&a).unwrap().is_empty());

    let o = run(&["sample", "--out", "c", "--set", "model.gamma=0"], dir.path());
    assert!(o.status.success());
    let c = std::fs::read_to_string(dir.path().join("c/configuration.json")).unwrap();
    assert!(PointConfiguration::from_json(&c).unwrap().is_empty());
}

#[test]
fn bad_configs_fail_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["build", "--out", "x", "--set", "model.radius=2"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("radius"), "{}", stderr(&o));
    assert!(!dir.path().join("x").exists());

    std::fs::write(dir.path().join("broken.toml"), "schema = 1\n[model]\ndimension = = 2\n").unwrap();
    let o = run(&["sample", "--config", "broken.toml", "--out", "y"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(!dir.path().join("y").exists());

    let o = run(&["nerve", "--out", "z"], dir.path());
    assert!(!o.status.success());
    assert!(!dir.path().join("z").exists());
}

#[test]
fn build_functional_and_render_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["build", "--config", "preset:fig1a", "--out", "built", "--render"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let built = dir.path().join("built");
    let complex = SimplicialComplex::from_json(&std::fs::read_to_string(built.join("complex.json")).unwrap()).unwrap();
    assert!(complex.f(2) > 0, "fig1a should have filled triangles");
    assert!(std::fs::read_to_string(built.join("complex.svg")).unwrap().contains("<polygon"));

    let cfg = "schema = 1\nfunctionals = [\"euler\", \"betti:0\", \"f:2\"]\n[input]\ncomplex = \"built/complex.json\"\n";
    std::fs::write(dir.path().join("eval.toml"), cfg).unwrap();
    let o = run(&["functional", "--config", "eval.toml", "--out", "eval"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(&format!("f:2 = {}", complex.f(2))), "{}", stdout(&o));

    let cfg = "schema = 1\n[input]\nconfiguration = \"built/configuration.json\"\ncomplex = \"built/complex.json\"\n";
    std::fs::write(dir.path().join("draw.toml"), cfg).unwrap();
    let o = run(&["render", "--config", "draw.toml", "--out", "drawn"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("drawn/complex.svg")).unwrap(),
        std::fs::read_to_string(built.join("complex.svg")).unwrap()
    );
}

#[test]
fn nerve_reports_betti_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["nerve", "--config", "preset:ring6", "--out", "ring", "--render"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("nerve Betti numbers: b0=1 b1=1"), "{text}");
    assert!(text.contains("pixel Betti numbers at 256 per unit: b0=1 b1=1"), "{text}");
    assert!(dir.path().join("ring/nerve.svg").exists());

    let o = run(&["nerve", "--config", "preset:fig2-like", "--out", "fig2", "--set", "nerve.raster_resolution=64"], dir.path());
    assert!(stdout(&o).contains("nerve Betti numbers: b0=6 b1=3"), "{}", stdout(&o));
}

#[test]
fn experiments_write_their_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["experiment", "--config", "preset:clt-beta0", "--out", "clt", "--set", "experiment.replications=30",
          "--set", "experiment.sides=[4.0, 8.0]"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("clt");
    for f in ["per_replication.csv", "summary.csv", "covariance.json", "report.json", "hist_8_betti_0.svg"] {
        assert!(out.join(f).exists(), "missing {f}: {:?}", std::fs::read_dir(&out).unwrap().collect::<Vec<_>>());
    }
    assert!(!out.join(".staging").exists());

    let o = run(
        &["experiment", "--config", "preset:stabilization", "--out", "stab", "--set", "experiment.replications=10",
          "--set", "experiment.sides=[4.0, 6.0]"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("stab/stabilization.json").exists());
}
