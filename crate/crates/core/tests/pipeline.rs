use std::path::PathBuf;
use std::process::Command;

use holobench::banachspace::DiscreteSpace;
use holobench::dnnbuilder::{build_poly_network, Activation, PolyBuildOptions};
use holobench::harness::{
    check_manifest, evaluate_l2_error, export_network, fit_rate, import_network, load_config, parse_config,
    read_results_csv, run_experiment, save_results, DeltaPolicy, ExperimentConfig,
};
use holobench::models::{ModelSpec, PolyTerm};
use holobench::multiindex::{IndexSet, MultiIndex};
use holobench::polybasis::{eval_tensor, sample_points, BasisFamily, SamplePoint};
use holobench::theory::Anisotropy;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn quick() -> ExperimentConfig {
    load_config(&config("rational_relu_quick.json")).unwrap()
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let cfg = quick();
    let a = run_experiment(&cfg).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(|| run_experiment(&cfg)).unwrap();
    assert_eq!(a, b);
    assert!(a.failures.is_empty());
    let mut other = cfg.clone();
    other.seed += 1;
    let c = run_experiment(&other).unwrap();
    assert_ne!(a.rows[0].error, c.rows[0].error);
}

#[test]
fn results_round_trip_through_disk() {
    let cfg = quick();
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    assert_eq!(parse_config(&text).unwrap(), cfg);

    let rec = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = save_results(&rec, dir.path()).unwrap();
    let manifest = files.last().unwrap();
    let value = check_manifest(manifest).unwrap();
    assert_eq!(value["config_hash"], serde_json::json!(cfg.hash()));
    assert_eq!(read_results_csv(&dir.path().join("results.csv")).unwrap(), rec.rows);
}

#[test]
fn config_rejects_unknown_fields_and_bad_values() {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(config("rational_relu_quick.json")).unwrap()).unwrap();
    v["m_schedule"] = serde_json::json!([]);
    assert!(parse_config(&v.to_string()).is_err());
    v["m_schedule"] = serde_json::json!([40]);
    v["p"] = serde_json::json!(1.5);
    assert!(parse_config(&v.to_string()).is_err());
}

#[test]
fn exported_networks_reproduce_forward_passes() {
    let (net, _) = build_poly_network(
        BasisFamily::Legendre,
        &MultiIndex::from_dense(&[2, 1]),
        1e-3,
        &[1, 2],
        Activation::Tanh,
        &PolyBuildOptions::default(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    export_network(&net, &path).unwrap();
    let back = import_network(&path).unwrap();
    for y in sample_points(BasisFamily::Legendre, 50, 2, 8) {
        let (a, b) = (net.forward_point(&y.coords).unwrap(), back.forward_point(&y.coords).unwrap());
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }
}

/// A polynomial in span{Ψ_0, Ψ_e1} is recovered exactly from the known set {0, e1}.
#[test]
fn known_set_recovers_its_own_span() {
    let mut cfg = load_config(&config("diffusion_known_hilbert.json")).unwrap();
    assert_eq!(cfg.regime.anisotropy, Anisotropy::Known);
    let (zero, e1) = (MultiIndex::zero(), MultiIndex::unit(1));
    cfg.model = ModelSpec::Polynomial {
        terms: vec![
            PolyTerm { index: zero.clone(), coeffs: vec![1.5, -0.5] },
            PolyTerm { index: e1.clone(), coeffs: vec![0.25, 2.0] },
        ],
    };
    cfg.index_set.explicit_s = Some(IndexSet::new([zero, e1]));
    cfg.m_schedule = vec![20, 40, 80];
    cfg.eval_points = 200;
    let rec = run_experiment(&cfg).unwrap();
    assert!(rec.failures.is_empty(), "{:?}", rec.failures);
    for row in &rec.rows {
        assert!(row.error < 1e-8, "m={}: {}", row.m, row.error);
    }
}

#[test]
fn noise_raises_the_error() {
    let mut cfg = quick();
    cfg.m_schedule = vec![80];
    let clean = run_experiment(&cfg).unwrap().rows[0].error;
    cfg.noise = 0.1;
    let noisy = run_experiment(&cfg).unwrap().rows[0].error;
    assert!(noisy > clean, "{noisy} vs {clean}");
}

#[test]
fn fixed_delta_is_reported_in_details() {
    let cfg = quick();
    assert!(matches!(cfg.delta_policy, DeltaPolicy::Fixed { .. }));
    let rec = run_experiment(&cfg).unwrap();
    assert_eq!(rec.details.len(), rec.rows.len());
    assert!(rec.details.iter().all(|d| d.solver.converged));
}

/// ‖Ψ_{e1}‖ = 1 exactly, so the Monte Carlo estimate must sit within a few
/// standard errors of 1.
#[test]
fn l2_error_matches_the_exact_norm() {
    let nu = MultiIndex::unit(1);
    for family in [BasisFamily::Legendre, BasisFamily::Chebyshev] {
        let pts = sample_points(family, 20_000, 1, 9);
        let f = |y: &SamplePoint| Ok(vec![eval_tensor(family, &nu, y)?]);
        let g = |_: &SamplePoint| Ok(vec![0.0]);
        let (est, se) = evaluate_l2_error(&f, &g, &pts, &DiscreteSpace::hilbert(1).unwrap()).unwrap();
        assert!((est - 1.0).abs() < 4.0 * se, "{family:?}: {est} ± {se}");
        assert!(se < 0.02);
    }
}

#[test]
fn rate_fit_recovers_a_power_law_under_noise() {
    let ms: Vec<f64> = (0..8).map(|i| 50.0 * 2f64.powi(i)).collect();
    let wobble = [1.05, 0.97, 1.02, 0.95, 1.04, 0.99, 1.01, 0.98];
    let es: Vec<f64> = ms.iter().zip(wobble).map(|(m, w)| 3.0 * m.powf(-1.5) * w).collect();
    let fit = fit_rate(&ms, &es).unwrap();
    assert!((fit.slope + 1.5).abs() < 0.05, "{fit:?}");
    assert!(fit.r2 > 0.99);
    assert!(fit_rate(&ms[..2], &es[..2]).is_err());
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holobench"))
}

#[test]
fn cli_selftest_and_emulate() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    let out = bin()
        .args(["emulate", "--family", "chebyshev", "--nu", "1,2", "--delta", "0.01", "--activation", "relu", "--out"])
        .arg(&net)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(cert["grid_error"].as_f64().unwrap() <= 0.01);
    assert!(import_network(&net).is_ok());
}

#[test]
fn cli_run_then_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(config("rational_relu_quick.json"))
        .args(["--seed", "11", "--out"])
        .arg(dir.path())
        .env("HOLOBENCH_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin().args(["rates", "--results"]).arg(dir.path().join("results.csv")).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("slope -"));
    let manifest = check_manifest(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest["seed"], serde_json::json!(11));
}
