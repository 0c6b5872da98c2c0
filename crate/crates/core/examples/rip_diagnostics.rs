//! Empirical weighted RIP constants and least-squares stability as m grows.

use std::sync::Arc;

use holobench::banachspace::WeightVector;
use holobench::multiindex::hci_index_set;
use holobench::polybasis::{sample_points, BasisFamily};
use holobench::sensing::{assemble_exact, estimate_rip_constant, full_case_stability};

fn main() -> holobench::Result<()> {
    let family = BasisFamily::Chebyshev;
    let set = Arc::new(hci_index_set(5)?);
    let w = WeightVector::intrinsic(family, &set);
    let k = 8.0;
    println!("N = {}, k = {k}", set.len());
    println!("{:>6} {:>10} {:>10}", "m", "rip est", "σ_min");
    for m in [50, 100, 200, 400, 800] {
        let a = assemble_exact(&sample_points(family, m, 5, m as u64), &set, family)?;
        let rip = estimate_rip_constant(&a.entries, k, &w, 50, 3)?;
        let sigma = full_case_stability(&a.entries)?.sigma_min;
        println!("{m:>6} {rip:>10.4} {sigma:>10.4}");
    }
    Ok(())
}
