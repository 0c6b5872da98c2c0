//! Builds networks for one tensor polynomial with each activation and prints
//! the certified sup-norm error and the architecture.

use holobench::dnnbuilder::{build_poly_network, Activation, PolyBuildOptions};
use holobench::multiindex::MultiIndex;
use holobench::polybasis::BasisFamily;

fn main() -> holobench::Result<()> {
    let nu = MultiIndex::from_dense(&[3, 1]);
    let opts = PolyBuildOptions::default();
    println!("{:<8} {:>8} {:>11} {:>6} {:>6} {:>7}", "act", "δ", "grid err", "width", "depth", "size");
    for activation in [Activation::Relu, Activation::Tanh, Activation::Repu { power: 2 }] {
        // RePU networks are exact, so one δ suffices
        let deltas: &[f64] = if matches!(activation, Activation::Repu { .. }) { &[1e-2] } else { &[1e-2, 1e-4] };
        for &delta in deltas {
            let (_, cert) = build_poly_network(BasisFamily::Legendre, &nu, delta, &[1, 2], activation, &opts)?;
            println!(
                "{:<8} {:>8.0e} {:>11.2e} {:>6} {:>6} {:>7}",
                activation.name(),
                cert.delta,
                cert.grid_error,
                cert.width,
                cert.depth,
                cert.size
            );
        }
    }
    Ok(())
}
