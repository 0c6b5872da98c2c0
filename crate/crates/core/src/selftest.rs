//! Quick analytic checks exposed through the CLI.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::banachspace::{DiscreteSpace, WeightVector};
use crate::dnnbuilder::{build_poly_network, build_product_repu, Activation, PolyBuildOptions, ValidationSpec};
use crate::error::{Error, Result};
use crate::models::{check_polyellipse, diffusion_solution, DiffusionConfig, Profile};
use crate::multiindex::{hci_index_set, MultiIndex};
use crate::polybasis::{eval_univariate, gauss_rule, BasisFamily, SamplePoint};
use crate::solvers::{solve_srlasso_raw, SolverOptions};
use crate::theory::{full_case_sample_complexity, log_factor, LogFactor};

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(what()))
    }
}

fn hci_sizes() -> Result<()> {
    let sizes: Vec<usize> = (1..=4).map(|n| hci_index_set(n).map(|s| s.len())).collect::<Result<_>>()?;
    check(sizes == [1, 3, 7, 19], || format!("sizes {sizes:?}"))
}

fn legendre_values() -> Result<()> {
    let v = eval_univariate(BasisFamily::Legendre, 2, 1.0)?;
    check((v - 5f64.sqrt()).abs() < 1e-14, || format!("P2(1) = {v}"))
}

fn quadrature_orthonormality() -> Result<()> {
    for family in [BasisFamily::Legendre, BasisFamily::Chebyshev] {
        let (x, w) = gauss_rule(family, 8)?;
        for a in 0..6 {
            for b in 0..6 {
                let s: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&y, &wt)| wt * eval_univariate(family, a, y).unwrap() * eval_univariate(family, b, y).unwrap())
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                check((s - want).abs() < 1e-12, || format!("{family:?} <{a},{b}> = {s}"))?;
            }
        }
    }
    Ok(())
}

fn repu_product() -> Result<()> {
    let net = build_product_repu(2, 3)?;
    let x = [1.5, -2.0, 0.25];
    let v = net.forward(&x)[0];
    check((v + 0.75).abs() < 1e-12, || format!("product {v}"))
}

fn relu_certificate() -> Result<()> {
    let opts = PolyBuildOptions {
        validation: ValidationSpec {
            points_per_dim: 101,
            ..ValidationSpec::default()
        },
        ..PolyBuildOptions::default()
    };
    let (_, cert) = build_poly_network(
        BasisFamily::Legendre,
        &MultiIndex::from_dense(&[2, 1]),
        1e-2,
        &[1, 2],
        Activation::Relu,
        &opts,
    )?;
    check(cert.certified(), || format!("grid error {}", cert.grid_error))
}

fn sr_lasso_scalar() -> Result<()> {
    let one = DMatrix::from_element(1, 1, 1.0);
    let two = DMatrix::from_element(1, 1, 2.0);
    let space = DiscreteSpace::hilbert(1)?;
    let u = WeightVector::ones(1);
    let (z, _) = solve_srlasso_raw(&one, &two, &u, 0.5, &space, &SolverOptions::default(), None)?;
    check((z[(0, 0)] - 2.0).abs() < 1e-6, || format!("λ=0.5 gives {}", z[(0, 0)]))?;
    let (z, _) = solve_srlasso_raw(&one, &two, &u, 2.0, &space, &SolverOptions::default(), None)?;
    check(z[(0, 0)].abs() < 1e-6, || format!("λ=2 gives {}", z[(0, 0)]))
}

fn diffusion_parabola() -> Result<()> {
    let cfg = DiffusionConfig::new(
        1023,
        Profile::Constant { value: 1.0 },
        vec![0.1],
        Profile::Constant { value: 1.0 },
    )?;
    let u = diffusion_solution(&SamplePoint::new(vec![0.0])?, &cfg)?;
    check((u[511] - 0.125).abs() < 1e-6, || format!("u(1/2) = {}", u[511]))
}

fn theory_values() -> Result<()> {
    let m = 3f64.exp();
    let l = log_factor(m, (-1f64).exp(), LogFactor::UnknownRegime)?;
    check((l - 82.0).abs() < 1e-9, || format!("L = {l}"))?;
    let s = full_case_sample_complexity(10.0, 0.4, 0.1)?;
    check(s == 493.0, || format!("m = {s}"))?;
    check(check_polyellipse(&[2.0], &[1.0], 0.25)? && !check_polyellipse(&[2.0], &[1.0], 0.2)?, || {
        "polyellipse".into()
    })
}

fn index_set_roundtrip() -> Result<()> {
    let set = Arc::new(hci_index_set(4)?);
    let back = crate::multiindex::IndexSet::from_text(&set.to_text())?;
    check(back == *set, || "text round trip".into())
}

type Check = (&'static str, fn() -> Result<()>);

const CHECKS: &[Check] = &[
    ("hyperbolic cross sizes", hci_sizes),
    ("normalized Legendre values", legendre_values),
    ("quadrature orthonormality", quadrature_orthonormality),
    ("RePU product network", repu_product),
    ("ReLU emulation certificate", relu_certificate),
    ("scalar SR-LASSO", sr_lasso_scalar),
    ("diffusion parabola", diffusion_parabola),
    ("closed-form parameters", theory_values),
    ("index set text format", index_set_roundtrip),
];

pub fn run_all() -> Vec<(&'static str, Result<()>)> {
    CHECKS.iter().map(|(name, f)| (*name, f())).collect()
}
