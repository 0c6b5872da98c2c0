//! Recovers a planted block-sparse coefficient array from Monte Carlo samples
//! with the square-root LASSO, in a Hilbert and in an ℓ¹ block norm.

use std::sync::Arc;

use holobench::banachspace::{block_vector_from_fn, BlockNorm, DiscreteSpace, WeightVector};
use holobench::multiindex::hci_index_set;
use holobench::polybasis::{sample_points, BasisFamily};
use holobench::sensing::assemble_exact;
use holobench::solvers::{solve_srlasso, SolverOptions};
use holobench::theory::{lambda_from_l, log_factor, LogFactor};

fn main() -> holobench::Result<()> {
    let family = BasisFamily::Legendre;
    let set = Arc::new(hci_index_set(6)?);
    let m = 120;
    let points = sample_points(family, m, 6, 42);
    let a = assemble_exact(&points, &set, family)?;
    let u = WeightVector::intrinsic(family, &set);
    let lambda = lambda_from_l(m as f64, log_factor(m as f64, 0.5, LogFactor::PlainLog)?);
    println!("N = {}, m = {m}, λ = {lambda:.4}", set.len());

    for norm in [BlockNorm::L2, BlockNorm::L1] {
        let space = DiscreteSpace::new(4, norm)?;
        let truth = block_vector_from_fn(space.clone(), set.clone(), |i, c| match i {
            0 => 1.0,
            3 => 0.5 * (c as f64 + 1.0),
            10 => -0.25,
            _ => 0.0,
        });
        let f = &a.entries * truth.coeffs();
        let (z, rep) = solve_srlasso(&a, &f, &u, lambda, &space, &SolverOptions::default())?;
        let err = (z.coeffs() - truth.coeffs()).norm() / truth.coeffs().norm();
        println!(
            "{norm:?}: relative error {err:.2e} after {} iterations (converged: {})",
            rep.iterations, rep.converged
        );
    }
    Ok(())
}
