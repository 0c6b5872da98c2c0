//! Closed-form parameters for each learning regime.

use holobench::dnnbuilder::Activation;
use holobench::theory::{
    architecture_bounds, full_case_sample_complexity, lambda_param, rate_exponent, sparsity_k, Anisotropy, Codomain,
    Regime,
};

fn main() -> holobench::Result<()> {
    let p = 0.5;
    let (m, eps) = (1000.0, 0.01);
    for anisotropy in [Anisotropy::Unknown, Anisotropy::Known] {
        for codomain in [Codomain::Hilbert, Codomain::Banach] {
            let regime = Regime::new(anisotropy, codomain, Activation::Relu);
            let arch = architecture_bounds(m, p, &regime)?;
            // the known-anisotropy estimator is least squares
            let lambda = lambda_param(m, eps, &regime).map_or("-".to_string(), |l| format!("{l:.4}"));
            println!(
                "{:<16} rate m^{:+.3}  k = {:.3}  λ = {:>6}  width ≲ {:.2e}  depth ≲ {:.2e}",
                regime.label(),
                rate_exponent(p, &regime)?,
                sparsity_k(m, eps, &regime)?.k,
                lambda,
                arch.width,
                arch.depth
            );
        }
    }
    println!("\nsamples for σ_min² ≥ 0.6 with |S|_u = k at ε = 0.1:");
    for k in [5.0, 10.0, 20.0, 50.0] {
        println!("  k = {k:>4}: m = {}", full_case_sample_complexity(k, 0.4, 0.1)?);
    }
    Ok(())
}
