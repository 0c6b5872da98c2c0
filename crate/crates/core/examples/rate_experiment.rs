//! Runs an experiment config end to end and writes results.csv and the manifest.
//!
//! cargo run --release --example rate_experiment -- examples/configs/rational_relu_quick.json /tmp/out

use std::path::PathBuf;

use holobench::harness::{load_config, run_experiment, save_results};

fn main() -> holobench::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/rational_relu_quick.json"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("holobench-rate"));

    let cfg = load_config(&config)?;
    let rec = run_experiment(&cfg)?;
    for r in &rec.rows {
        println!("m = {:>5}  error = {:.3e} ± {:.1e}  width = {}", r.m, r.error, r.se, r.width);
    }
    if let (Some(fit), Some(overlay)) = (&rec.fit, &rec.overlay) {
        println!("observed slope {:.3}, theory exponent {:.3}", fit.slope, overlay.exponent);
    }
    for f in save_results(&rec, &out)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
