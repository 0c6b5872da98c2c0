use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use holobench::dnnbuilder::{build_poly_network, Activation, PolyBuildOptions};
use holobench::harness::{self, export_network, fit_rate, load_config, read_results_csv, run_experiment, save_results};
use holobench::multiindex::MultiIndex;
use holobench::polybasis::BasisFamily;
use holobench::sensing::{estimate_rip_constant, full_case_stability};
use holobench::banachspace::WeightVector;
use holobench::{selftest, Result};

#[derive(Parser)]
#[command(name = "holobench", version, about = "Learning holomorphic operators with sparse polynomial networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment config and write results.csv plus manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the log-log rate of a results CSV.
    Rates {
        #[arg(long)]
        results: PathBuf,
    },
    /// Build one polynomial network and write it as JSON.
    Emulate {
        #[arg(long, default_value = "legendre")]
        family: BasisFamily,
        /// Dense multi-index, e.g. "1,2".
        #[arg(long)]
        nu: String,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value = "relu")]
        activation: Activation,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical RIP and least-squares stability of a config's matrices.
    DiagnoseRip {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Analytic example checks.
    Selftest,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    harness::init_threads()?;
    match cli.cmd {
        Cmd::Run { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("results"));
            let rec = run_experiment(&cfg)?;
            let files = save_results(&rec, &dir)?;
            println!("{:>6} {:>12} {:>10} {:>8} {:>6} {:>9}", "m", "error", "se", "width", "depth", "size");
            for r in &rec.rows {
                println!("{:>6} {:>12.4e} {:>10.2e} {:>8} {:>6} {:>9}", r.m, r.error, r.se, r.width, r.depth, r.size);
            }
            for f in &rec.failures {
                println!("m={} failed: {}", f.m, f.reason);
            }
            if let Some(fit) = &rec.fit {
                println!("slope {:.3} (r² {:.3})", fit.slope, fit.r2);
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(if rec.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Cmd::Rates { results } => {
            let rows = read_results_csv(&results)?;
            let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
            let es: Vec<f64> = rows.iter().map(|r| r.error).collect();
            let fit = fit_rate(&ms, &es)?;
            println!("slope {:.4}  intercept {:.4}  r² {:.4}", fit.slope, fit.intercept, fit.r2);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Emulate {
            family,
            nu,
            delta,
            activation,
            out,
        } => {
            let dense = nu
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<u32>, _>>()
                .map_err(|e| holobench::Error::Parse(format!("bad multi-index {nu:?}: {e}")))?;
            let theta: Vec<usize> = (1..=dense.len()).collect();
            let index = MultiIndex::from_dense(&dense);
            let (net, cert) = build_poly_network(family, &index, delta, &theta, activation, &PolyBuildOptions::default())?;
            export_network(&net, &out)?;
            println!("{}", serde_json::to_string_pretty(&cert)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::DiagnoseRip { config, trials } => {
            let cfg = load_config(&config)?;
            println!("{:>6} {:>6} {:>8} {:>10} {:>10}", "m", "N", "k", "rip_est", "sigma_min");
            for &m in &cfg.m_schedule {
                let (a, set, k) = harness::diagnostic_matrix(&cfg, m)?;
                let w = WeightVector::intrinsic(cfg.family, &set);
                let rip = estimate_rip_constant(&a, k, &w, trials, cfg.seed)
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|e| e.to_string());
                let smin = full_case_stability(&a)
                    .map(|s| format!("{:.4}", s.sigma_min))
                    .unwrap_or_else(|_| "-".into());
                println!("{:>6} {:>6} {:>8.2} {:>10} {:>10}", m, set.len(), k, rip, smin);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selftest => {
            let results = selftest::run_all();
            let mut ok = true;
            for (name, res) in &results {
                match res {
                    Ok(()) => println!("PASS {name}"),
                    Err(e) => {
                        ok = false;
                        println!("FAIL {name}: {e}");
                    }
                }
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
