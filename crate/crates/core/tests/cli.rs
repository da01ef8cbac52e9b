use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autoresonance"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn connect_prints_json() {
    let o = run(&["connect", "--alpha", "0.5", "--phi", "0"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["p_re"].as_f64().unwrap() - 0.4791661973142996).abs() < 1e-12);
    assert!((v["p_im"].as_f64().unwrap() - 0.9816719442305404).abs() < 1e-12);
    assert_eq!(v["branch_j"], 2);
    assert_eq!(v["special"], false);
}

#[test]
fn connect_variant_aliases() {
    let a = run(&["connect", "--alpha", "0.5", "--phi", "1.0", "--variant", "theorem2"]);
    let b = run(&["connect", "--alpha", "0.5", "--phi", "1.0", "--variant", "ln2"]);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn negative_rho2_is_a_validation_error() {
    let o = run(&["connect", "--alpha", "0.5", "--phi", "0", "--variant", "plain"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho^2"));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(
        run(&["simulate", "--eps", "-1", "--theta0", "-2", "--theta1", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["portrait", "--t", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--eps", "x"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_and_config_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# short run\neps = 0.01\ntheta0 = -2\ntheta1 = -1.5\nphi_re = 0.02\n",
    )
    .unwrap();
    let out = dir.path().join("traj.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--theta1",
        "-1.9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,re,im,abs2"));
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(last[0], -1.9);
    assert!((last[3] - (last[1] * last[1] + last[2] * last[2])).abs() < 1e-15);
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate", "--eps", "0.05", "--theta0", "-2", "--theta1", "0", "--phi-re", "0.02",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn painleve_csv() {
    let o = run(&["painleve", "--alpha", "0.5", "--phi", "0", "--z0", "-30", "--z1", "0"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("z,v,dv\n"));
    let first: Vec<f64> = s
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(first[0], -30.0);
}

#[test]
fn match_report_has_all_keys() {
    let o = run(&[
        "match",
        "--eps",
        "0.01",
        "--theta0",
        "-3",
        "--theta1",
        "1.6",
        "--alpha10",
        "0.5",
        "--phi10",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in [
        "eps",
        "alpha10",
        "phi10",
        "p_re",
        "p_im",
        "special",
        "rho2",
        "upsilon",
        "A00_pred",
        "phi00_pred",
        "j_pred",
        "theta_capture",
        "A00_meas",
        "phi00_meas",
        "j_meas",
        "variant_resolution",
        "residuals",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v.as_object().unwrap().len(), 17);
    assert_eq!(v["j_pred"], v["j_meas"]);
}

#[test]
fn portrait_and_figures_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let o = run(&["portrait", "--T", "0", "--svg", svg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("record,level,index,re,im\n"));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let figs = dir.path().join("figs");
    let o = run(&["figures", "--which", "fig2", "--outdir", figs.to_str().unwrap()]);
    assert!(o.status.success());
    for name in ["fig2_theta0_-2.00.csv", "fig2_theta0_-2.01.csv", "fig2.svg"] {
        assert!(figs.join(name).exists(), "{name}");
    }
}
