use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cvxgauss_cli::report::Table;
use cvxgauss_cli::{run, Command as Sub, Report, RunConfig};

const G1_1: f64 = 0.241_970_724_519_143_37;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn cli(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvxgauss"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn report(out: &Path) -> Report {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn ibp_on_halfspace_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "half.toml",
        "seed = 3\n[model]\ndim = 3\n[body]\nshape = \"halfspace\"\nnormal = [1, 0, 0]\noffset = 1\n\
         [directions]\nk = [[1, 0, 0]]\nh = [1, 0, 0]\n[budgets]\nsamples = 1000000\n",
    );
    let out = dir.path().join("out");
    let o = cli(&["ibp"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r.results.len(), 1);
    assert!((r.results[0].lhs - G1_1).abs() < 3e-3 && (r.results[0].rhs - G1_1).abs() < 1e-9);
    assert_eq!(r.seed, 3);
    assert!(out.join("timing.json").exists());
    let csv = std::fs::read_to_string(out.join("ibp.csv")).unwrap();
    assert!(csv.starts_with("check,k,lhs,se_lhs,rhs,se_rhs,verdict\n"), "{csv}");
}

#[test]
fn perimeter_on_ball_lists_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ball.json",
        r#"{"seed": 1, "model": {"dim": 2}, "body": {"shape": "ball", "radius": 1.0},
            "budgets": {"content_samples": 4000000}}"#,
    );
    let out = dir.path().join("out");
    let o = cli(&["perimeter"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!((r.results[0].lhs - 0.60653).abs() < 1e-4);
    let table = std::fs::read_to_string(out.join("perimeter.csv")).unwrap();
    assert!(table.contains("area_formula,") && table.contains("minkowski_content,"), "{table}");
}

#[test]
fn empty_polytope_names_the_face_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"seed": 1, "model": {"dim": 2}, "body": {"shape": "polytope", "faces": []}}"#,
    );
    let o = cli(&["perimeter"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("body.faces"), "{err}");
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn schema_errors_carry_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "seed = 1\n[model]\ndim = 2\n[body]\nshape = \"ball\"\nradius = 1\n[budgets]\nsamples = \"lots\"\n",
    );
    let o = cli(&["ibp"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budgets.samples"));
}

#[test]
fn noise_dominated_run_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "noisy.toml",
        "seed = 1\n[model]\ndim = 3\n[body]\nshape = \"halfspace\"\nnormal = [1, 0, 0]\noffset = 1\n\
         [directions]\nk = [[0, 1, 0]]\nh = [1, 0, 0]\n[budgets]\nsamples = 20000\n",
    );
    let out = dir.path().join("out");
    let o = cli(&["ibp"], &cfg, &out);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn seed_override_changes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ball.toml",
        "seed = 1\n[model]\ndim = 2\n[body]\nshape = \"ball\"\nradius = 1\n[directions]\nk = [[1, 0]]\n[budgets]\nsamples = 50000\n",
    );
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    cli(&["ibp"], &cfg, &a);
    cli(&["ibp"], &cfg, &b);
    cli(&["ibp", "--seed", "2"], &cfg, &c);
    let (ra, rc) = (report(&a), report(&c));
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(b.join("report.json")).unwrap());
    assert_eq!(rc.seed, 2);
    assert_ne!(ra.config_hash, rc.config_hash);
    assert_ne!(ra.results[0].lhs, rc.results[0].lhs);
}

fn cfg(text: &str) -> RunConfig {
    RunConfig::parse(text, true).unwrap()
}

fn table<'a>(tables: &'a [Table], name: &str) -> &'a Table {
    tables.iter().find(|t| t.name == name).unwrap()
}

#[test]
fn subspace_study_is_non_decreasing() {
    let c = cfg(
        "seed = 2\n[model]\ndim = 3\n[body]\nshape = \"ellipsoid\"\nsemiaxes = [1, 0.7, 0.5]\n\
         [budgets]\nsubspace_samples = 4000\n[study]\nframes = [[2], [2, 0], [2, 0, 1]]\n",
    );
    let o = run(Sub::ConvergeSubspace, &c).unwrap();
    assert_eq!(o.exit_code(), 0, "{:?}", o.results);
    let v = table(&o.tables, "subspace").column("value").unwrap();
    assert!(v.windows(2).all(|w| w[0] <= w[1]), "{v:?}");
}

#[test]
fn samples_study_scales_as_inverse_root() {
    let c = cfg(
        "seed = 2\n[model]\ndim = 2\n[body]\nshape = \"ball\"\nradius = 1\n[psi]\nkind = \"coordinate\"\nindex = 0\n\
         [directions]\nk = [[1, 0]]\n[study]\nsample_grid = [20000, 80000, 320000]\n",
    );
    let o = run(Sub::ConvergeSamples, &c).unwrap();
    assert_eq!(o.exit_code(), 0, "{:?}", o.results);
    let se = table(&o.tables, "converge_samples").column("std_error").unwrap();
    for w in se.windows(2) {
        assert!((w[0] / w[1] - 2.0).abs() < 0.4, "{se:?}");
    }
}

#[test]
fn epsilon_study_intercept_on_halfspace() {
    let c = cfg(
        "seed = 2\n[model]\ndim = 2\n[body]\nshape = \"halfspace\"\nnormal = [1, 0]\noffset = 1\n\
         [budgets]\ncontent_samples = 2000000\n",
    );
    let o = run(Sub::ConvergeEpsilon, &c).unwrap();
    let t = table(&o.tables, "converge_epsilon");
    let (eps, val, se) = (t.column("epsilon").unwrap(), t.column("value").unwrap(), t.column("std_error").unwrap());
    assert_eq!(*eps.last().unwrap(), 0.0);
    let (v, s) = (*val.last().unwrap(), *se.last().unwrap());
    assert!((v - G1_1).abs() <= (3.0 * s).max(0.02 * G1_1), "{v} +- {s}");
}

#[test]
fn dimension_study_reports_differences() {
    let c = cfg("seed = 2\n[model]\ndim = 3\n[body]\nshape = \"kl_ellipsoid\"\nradius = 0.6\n[study]\ndims = [1, 2, 3]\n");
    let o = run(Sub::ConvergeDim, &c).unwrap();
    let t = table(&o.tables, "converge_dim");
    assert_eq!(t.rows.len(), 3);
    let d = t.column("difference").unwrap();
    assert!(d[0].is_nan() && d[1].is_finite() && d[2].is_finite());
}

#[test]
fn gradcheck_and_density_pass_on_a_polytope() {
    let c = cfg(
        "seed = 4\n[model]\ndim = 3\n[body]\nshape = \"polytope\"\n\
         faces = [{normal = [1, 0, 0], offset = 1}, {normal = [-1, 0, 0], offset = 1},\n\
                  {normal = [0, 1, 0], offset = 1}, {normal = [0, -1, 0], offset = 1},\n\
                  {normal = [0, 0, 1], offset = 1}, {normal = [0, 0, -1], offset = 1},\n\
                  {normal = [1, 1, 1], offset = 2}]\n\
         [budgets]\nboundary_points = 40\ndensity_samples = 4000\n",
    );
    let o = run(Sub::Gradcheck, &c).unwrap();
    assert_eq!(o.exit_code(), 0, "{:?}", o.results);
    let o = run(Sub::Density, &c).unwrap();
    assert_eq!(o.exit_code(), 0, "{:?}", o.results);
}

#[test]
fn surface_matches_area_formula_in_three_dimensions() {
    let c = cfg("seed = 2\n[model]\ndim = 3\n[body]\nshape = \"ball\"\nradius = 1\n[budgets]\nsubspace_samples = 4000\n");
    let o = run(Sub::Surface, &c).unwrap();
    assert_eq!(o.exit_code(), 0, "{:?}", o.results);
    assert!(o.results.iter().any(|r| r.name.ends_with("=area_formula")));
}
