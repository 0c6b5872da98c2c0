//! Training problems for the coefficient head: the weighted square-root
//! LASSO `𝒢(z) = λ‖z‖_{1,u;V} + ‖Az − f‖_{2;V}` and blockwise least squares.
//!
//! The SR-LASSO is solved with a restarted primal-dual hybrid gradient
//! method on the saddle form `min_z max_y ⟨Az, y⟩ + λ‖z‖_{1,u;V} − ⟨f, y⟩`
//! subject to `‖y‖_{2;V*} ≤ 1`. Both proximal maps are closed form up to a
//! scalar root find for the ℓ¹/ℓ^∞ dual balls. Gram norms are handled by
//! the change of variables `z ↦ zL` with `G = LLᵀ`.
//!
//! Restarts follow the usual sufficient-decay test on the fixed-point
//! residual; at each restart the primal weight is moved toward the ratio of
//! dual to primal movement. Without this the dual iterate crawls whenever
//! the optimal residual is tiny, as in noiseless recovery.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::banachspace::{BlockNorm, BlockVector, DiscreteSpace, WeightVector};
use crate::error::{invalid, Error, Result};
use crate::sensing::{spectral_norm, MeasurementMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepParams {
    /// `τσ = (0.95/‖A‖₂)²` with the ratio `σ/τ` re-estimated at each restart.
    Auto,
    /// Fixed steps; `τσ‖A‖₂² < 1` is required.
    Fixed { tau: f64, sigma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub step: StepParams,
    pub record_history: bool,
    /// Least squares with non-Hilbert blocks: minimize the ℓ²-of-V-norms
    /// residual iteratively instead of returning the channelwise solution.
    pub banach_iterative_ls: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            rel_tol: 1e-9,
            step: StepParams::Auto,
            record_history: false,
            banach_iterative_ls: false,
        }
    }
}

impl SolverOptions {
    fn check(&self) -> Result<()> {
        if self.max_iters == 0 {
            return invalid("max_iters must be at least 1");
        }
        if !(self.rel_tol > 0.0) {
            return invalid("rel_tol must be positive");
        }
        Ok(())
    }

    /// Options for a reference run with ten times the budget and a tighter tolerance.
    pub fn reference(&self) -> Self {
        Self {
            max_iters: self.max_iters.saturating_mul(10),
            rel_tol: self.rel_tol * 0.1,
            record_history: false,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub final_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `𝒢(ẑ) − 𝒢(z_ref)` against a longer reference solve; a proxy for
    /// `E_opt`, filled in by [`eopt_certify`].
    pub eopt_proxy: Option<f64>,
    /// Objective of the returned iterate after each iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<f64>>,
    /// Objective of the raw primal iterate after each iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_history: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn write_history_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["iteration", "objective", "raw_objective"])?;
        let h = self.history.as_deref().unwrap_or(&[]);
        let raw = self.raw_history.as_deref().unwrap_or(&[]);
        for (i, v) in h.iter().enumerate() {
            let r = raw.get(i).map_or(String::new(), |x| format!("{x:?}"));
            wr.write_record([i.to_string(), format!("{v:?}"), r])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn check_shapes(a: &DMatrix<f64>, f: &DMatrix<f64>, z: Option<&DMatrix<f64>>, space: &DiscreteSpace) -> Result<()> {
    if f.nrows() != a.nrows() || f.ncols() != space.dim() {
        return Err(Error::Shape(format!(
            "data is {}x{}, expected {}x{}",
            f.nrows(),
            f.ncols(),
            a.nrows(),
            space.dim()
        )));
    }
    if let Some(z) = z {
        if z.nrows() != a.ncols() || z.ncols() != space.dim() {
            return Err(Error::Shape(format!(
                "coefficients are {}x{}, expected {}x{}",
                z.nrows(),
                z.ncols(),
                a.ncols(),
                space.dim()
            )));
        }
    }
    Ok(())
}

/// `λ Σ_j u_j ‖z_j‖_V + ‖Az − f‖_{2;V}`.
pub fn objective_srlasso(
    a: &DMatrix<f64>,
    f: &DMatrix<f64>,
    z: &DMatrix<f64>,
    lambda: f64,
    u: &WeightVector,
    space: &DiscreteSpace,
) -> Result<f64> {
    check_shapes(a, f, Some(z), space)?;
    if u.len() != z.nrows() {
        return Err(Error::DimensionMismatch {
            expected: z.nrows(),
            found: u.len(),
        });
    }
    if !(lambda >= 0.0) {
        return invalid("lambda must be nonnegative");
    }
    let r = a * z - f;
    Ok(objective_parts(space, z, &r, lambda, u.values()))
}

fn objective_parts(space: &DiscreteSpace, z: &DMatrix<f64>, resid: &DMatrix<f64>, lambda: f64, u: &[f64]) -> f64 {
    let reg: f64 = if lambda == 0.0 {
        0.0
    } else {
        space.row_norms(z).iter().zip(u).map(|(n, w)| n * w).sum()
    };
    lambda * reg + space.l2_of_blocks(resid)
}

/// SR-LASSO on a measurement matrix; the solution is labelled by its index set.
pub fn solve_srlasso(
    a: &MeasurementMatrix,
    f: &DMatrix<f64>,
    u: &WeightVector,
    lambda: f64,
    space: &DiscreteSpace,
    opts: &SolverOptions,
) -> Result<(BlockVector, SolveReport)> {
    let (z, rep) = solve_srlasso_raw(&a.entries, f, u, lambda, space, opts, None)?;
    Ok((BlockVector::new(space.clone(), a.index_set.clone(), z)?, rep))
}

/// SR-LASSO on plain matrices, optionally warm-started at `init`.
pub fn solve_srlasso_raw(
    a: &DMatrix<f64>,
    f: &DMatrix<f64>,
    u: &WeightVector,
    lambda: f64,
    space: &DiscreteSpace,
    opts: &SolverOptions,
    init: Option<&DMatrix<f64>>,
) -> Result<(DMatrix<f64>, SolveReport)> {
    opts.check()?;
    check_shapes(a, f, init, space)?;
    if !(lambda > 0.0) {
        return invalid("lambda must be positive; use solve_leastsquares for lambda = 0");
    }
    if u.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: u.len(),
        });
    }
    primal_dual(a, f, u.values(), lambda, space, opts, init)
}

/// Dual-norm geometry of a block norm without Gram matrix.
#[derive(Clone, Copy)]
enum Geometry {
    L2,
    L1,
    Linf,
}

fn pdhg_geometry(space: &DiscreteSpace) -> Geometry {
    if space.gram().is_some() {
        return Geometry::L2;
    }
    match space.norm_kind() {
        BlockNorm::L2 => Geometry::L2,
        BlockNorm::L1 => Geometry::L1,
        BlockNorm::Linf => Geometry::Linf,
    }
}

fn primal_dual(
    a: &DMatrix<f64>,
    f: &DMatrix<f64>,
    u: &[f64],
    lambda: f64,
    space: &DiscreteSpace,
    opts: &SolverOptions,
    init: Option<&DMatrix<f64>>,
) -> Result<(DMatrix<f64>, SolveReport)> {
    // work in coordinates where the block norm is a plain ℓ^q norm
    let chol = space.gram_factor();
    let to_work = |x: &DMatrix<f64>| match chol {
        Some(l) => x * l,
        None => x.clone(),
    };
    let f_w = to_work(f);
    let z0 = init.map(to_work).unwrap_or_else(|| DMatrix::zeros(a.ncols(), space.dim()));
    let geo = pdhg_geometry(space);
    let work_space = match chol {
        Some(_) => DiscreteSpace::hilbert(space.dim())?,
        None => space.clone(),
    };

    let (zw, mut report) = pdhg(a, &f_w, u, lambda, geo, &work_space, opts, z0)?;
    let z = match chol {
        Some(l) => {
            // z = z_w L⁻¹, i.e. Lᵀ zᵀ = z_wᵀ
            let zt = l
                .transpose()
                .solve_upper_triangular(&zw.transpose())
                .ok_or_else(|| Error::InvalidArgument("singular Gram factor".into()))?;
            zt.transpose()
        }
        None => zw,
    };
    report.final_objective = objective_parts(space, &z, &(a * &z - f), lambda, u);
    Ok((z, report))
}

const ROUNDING_SLACK: f64 = 64.0;

#[allow(clippy::too_many_arguments)]
fn pdhg(
    a: &DMatrix<f64>,
    f: &DMatrix<f64>,
    u: &[f64],
    lambda: f64,
    geo: Geometry,
    space: &DiscreteSpace,
    opts: &SolverOptions,
    z0: DMatrix<f64>,
) -> Result<(DMatrix<f64>, SolveReport)> {
    let (m, k) = f.shape();
    let norm_a = spectral_norm(a).max(f64::MIN_POSITIVE);
    let eta = 0.95 / norm_a;
    let (mut tau, mut sigma, adaptive) = match opts.step {
        StepParams::Auto => (eta, eta, true),
        StepParams::Fixed { tau, sigma } => {
            if !(tau > 0.0 && sigma > 0.0) || tau * sigma * norm_a * norm_a >= 1.0 {
                return invalid("fixed steps must satisfy tau*sigma*||A||^2 < 1");
            }
            (tau, sigma, false)
        }
    };
    // restart state: primal weight ω = σ/τ, anchor point and its residual
    let mut omega = 1.0f64;
    let mut since_restart = 0usize;
    let mut start_residual = f64::INFINITY;
    let mut prev_residual = f64::INFINITY;

    let mut z = z0;
    let mut az = a * &z;
    let mut y = DMatrix::<f64>::zeros(m, k);
    let mut aty = DMatrix::<f64>::zeros(z.nrows(), k);

    let f_norm = f.norm();
    let mut best_z = z.clone();
    let mut best_obj = objective_parts(space, &z, &(&az - f), lambda, u);
    let mut anchor_z = z.clone();
    let mut anchor_y = y.clone();
    let mut history = opts.record_history.then(Vec::new);
    let mut raw_history = opts.record_history.then(Vec::new);
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=opts.max_iters {
        iterations = it;
        // primal: z⁺ = prox_{τG}(z − τAᵀy)
        let mut z_new = &z - &aty * tau;
        prox_group(&mut z_new, u, tau * lambda, geo);
        let az_new = a * &z_new;
        // dual: y⁺ = Π_{B*}(y + σ(A(2z⁺ − z) − f))
        let mut y_new = &y + (&az_new * 2.0 - &az - f) * sigma;
        project_dual_ball(&mut y_new, geo);
        let aty_new = a.tr_mul(&y_new);

        let dz = &z - &z_new;
        let dy = &y - &y_new;
        let p = (&dz / tau - (&aty - &aty_new)).norm();
        let d = (&dy / sigma - (&az - &az_new)).norm();
        let p_scale = aty_new.norm().max(dz.norm() / tau).max(f64::MIN_POSITIVE);
        let d_scale = az_new.norm().max(f_norm).max(dy.norm() / sigma).max(f64::MIN_POSITIVE);
        // rounding in z and y is amplified by 1/τ and 1/σ; below that floor
        // the residuals carry no information
        let p_floor = ROUNDING_SLACK * f64::EPSILON * (z_new.norm() / tau + aty_new.norm());
        let d_floor = ROUNDING_SLACK * f64::EPSILON * (y_new.norm() / sigma + az_new.norm() + f_norm);
        let (pr, dr) = ((p - p_floor).max(0.0) / p_scale, (d - d_floor).max(0.0) / d_scale);

        // fixed-point residual in the ω-weighted norm drives the restarts
        let fp = (omega * dz.norm_squared() + dy.norm_squared() / omega).sqrt();

        let obj = objective_parts(space, &z_new, &(&az_new - f), lambda, u);
        if obj < best_obj {
            best_obj = obj;
            best_z.copy_from(&z_new);
        }
        if let Some(h) = history.as_mut() {
            h.push(best_obj);
        }
        if let Some(h) = raw_history.as_mut() {
            h.push(obj);
        }

        z = z_new;
        az = az_new;
        y = y_new;
        aty = aty_new;

        if pr <= opts.rel_tol && dr <= opts.rel_tol {
            converged = true;
            break;
        }
        if adaptive {
            since_restart += 1;
            if since_restart == 1 {
                start_residual = fp;
            }
            let restart = since_restart > 1
                && (fp <= 0.2 * start_residual
                    || (fp <= 0.8 * start_residual && fp > prev_residual)
                    || since_restart >= 10_000);
            prev_residual = fp;
            if restart {
                let step_z = (&z - &anchor_z).norm();
                let step_y = (&y - &anchor_y).norm();
                if step_z > 0.0 && step_y > 0.0 {
                    omega = (0.5 * (step_y / step_z).ln() + 0.5 * omega.ln()).exp().clamp(1e-8, 1e8);
                    tau = eta / omega;
                    sigma = eta * omega;
                }
                anchor_z.copy_from(&z);
                anchor_y.copy_from(&y);
                since_restart = 0;
            }
        }
    }
    // the last iterate is kept when it ties the incumbent
    let final_obj = objective_parts(space, &z, &(&az - f), lambda, u);
    let out = if final_obj <= best_obj { z } else { best_z };
    Ok((
        out,
        SolveReport {
            final_objective: final_obj.min(best_obj),
            iterations,
            converged,
            eopt_proxy: None,
            history,
            raw_history,
            warnings: Vec::new(),
        },
    ))
}

/// Rowwise proximal map of `t_j‖·‖` with `t_j = scale·u_j`.
fn prox_group(z: &mut DMatrix<f64>, u: &[f64], scale: f64, geo: Geometry) {
    let k = z.ncols();
    let mut buf = vec![0.0; k];
    for (j, &w) in u.iter().enumerate() {
        let t = scale * w;
        for c in 0..k {
            buf[c] = z[(j, c)];
        }
        match geo {
            Geometry::L2 => {
                let n = buf.iter().map(|x| x * x).sum::<f64>().sqrt();
                let s = if n > t { 1.0 - t / n } else { 0.0 };
                buf.iter_mut().for_each(|x| *x *= s);
            }
            Geometry::L1 => buf.iter_mut().for_each(|x| *x = x.signum() * (x.abs() - t).max(0.0)),
            Geometry::Linf => {
                // v − Π_{‖·‖₁ ≤ t}(v)
                let theta = l1_threshold(&buf, t);
                buf.iter_mut().for_each(|x| *x = x.signum() * x.abs().min(theta));
            }
        }
        for c in 0..k {
            z[(j, c)] = buf[c];
        }
    }
}

/// Threshold `θ` with `‖soft(v, θ)‖₁ = t`, or 0 when `‖v‖₁ ≤ t`.
fn l1_threshold(v: &[f64], t: f64) -> f64 {
    let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    if a.iter().sum::<f64>() <= t {
        return 0.0;
    }
    a.sort_by(|x, y| y.total_cmp(x));
    let mut s = 0.0;
    let mut theta = 0.0;
    for (r, &ar) in a.iter().enumerate() {
        s += ar;
        let cand = (s - t) / (r + 1) as f64;
        if cand < ar {
            theta = cand;
        } else {
            break;
        }
    }
    theta.max(0.0)
}

/// Projection onto `{y : Σ_i ‖y_i‖_*² ≤ 1}` where `‖·‖_*` is the dual block norm.
fn project_dual_ball(y: &mut DMatrix<f64>, geo: Geometry) {
    match geo {
        Geometry::L2 => {
            let n = y.norm();
            if n > 1.0 {
                *y /= n;
            }
        }
        Geometry::L1 | Geometry::Linf => project_mixed_ball(y, geo),
    }
}

/// Mixed-ball projection for ℓ¹ blocks (dual ℓ^∞) or ℓ^∞ blocks (dual ℓ¹).
///
/// With radii `t_i` the blockwise projections are clipping (ℓ^∞ ball) or
/// soft thresholding (ℓ¹ ball). Optimality couples them through one
/// multiplier `μ`: `Σ_k (|y_ik| − t_i)_+ = μ t_i` for clipping and
/// `‖soft(y_i, μ t_i)‖₁ = t_i` for thresholding, with `Σ t_i² = 1`.
fn project_mixed_ball(y: &mut DMatrix<f64>, geo: Geometry) {
    let (m, k) = y.shape();
    let sorted: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut a: Vec<f64> = y.row(i).iter().map(|x| x.abs()).collect();
            a.sort_by(|x, z| z.total_cmp(x));
            a
        })
        .collect();
    let dual_norm = |a: &[f64]| match geo {
        Geometry::L1 => a.first().copied().unwrap_or(0.0),
        _ => a.iter().sum::<f64>(),
    };
    if sorted.iter().map(|a| dual_norm(a).powi(2)).sum::<f64>() <= 1.0 {
        return;
    }
    let radius = |a: &[f64], mu: f64| -> f64 {
        let mut s = 0.0;
        for r in 0..a.len() {
            s += a[r];
            let next = a.get(r + 1).copied().unwrap_or(0.0);
            let rf = (r + 1) as f64;
            match geo {
                Geometry::L1 => {
                    let t = s / (rf + mu);
                    if t >= next {
                        return t;
                    }
                }
                _ => {
                    let t = s / (1.0 + rf * mu);
                    if mu * t >= next {
                        return t;
                    }
                }
            }
        }
        0.0
    };
    let total = |mu: f64| sorted.iter().map(|a| radius(a, mu).powi(2)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while total(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mu = hi;
    for i in 0..m {
        let t = radius(&sorted[i], mu);
        for c in 0..k {
            let v = y[(i, c)];
            y[(i, c)] = match geo {
                Geometry::L1 => v.signum() * v.abs().min(t),
                _ => v.signum() * (v.abs() - mu * t).max(0.0),
            };
        }
    }
}

/// Blockwise least squares `min ‖Az − f‖_{2;V}`.
///
/// Hilbert blocks (with or without Gram) give `z = A⁺f` channel by channel.
/// For ℓ¹/ℓ^∞ blocks the channelwise solution is returned with a warning,
/// unless `opts.banach_iterative_ls` asks for the iterative minimizer.
pub fn solve_leastsquares(
    a: &MeasurementMatrix,
    f: &DMatrix<f64>,
    space: &DiscreteSpace,
    opts: &SolverOptions,
) -> Result<(BlockVector, SolveReport)> {
    let (z, rep) = solve_leastsquares_raw(&a.entries, f, space, opts)?;
    Ok((BlockVector::new(space.clone(), a.index_set.clone(), z)?, rep))
}

pub fn solve_leastsquares_raw(
    a: &DMatrix<f64>,
    f: &DMatrix<f64>,
    space: &DiscreteSpace,
    opts: &SolverOptions,
) -> Result<(DMatrix<f64>, SolveReport)> {
    opts.check()?;
    check_shapes(a, f, None, space)?;
    let u = vec![1.0; a.ncols()];
    if !space.is_hilbert() && opts.banach_iterative_ls {
        let init = channelwise_ls(a, f).0;
        // λ = 0 objective with the same splitting; the regularizer prox is the identity
        let (z, mut rep) = pdhg(a, f, &u, 0.0, pdhg_geometry(space), space, opts, init)?;
        rep.warnings.push("iterative least squares for a non-Hilbert block norm".into());
        return Ok((z, rep));
    }
    let (z, mut warnings) = channelwise_ls(a, f);
    if !space.is_hilbert() {
        warnings.push(
            "channelwise least squares does not minimize the residual for a non-Hilbert block norm".into(),
        );
    }
    let obj = space.l2_of_blocks(&(a * &z - f));
    Ok((
        z,
        SolveReport {
            final_objective: obj,
            iterations: 1,
            converged: true,
            eopt_proxy: None,
            history: None,
            raw_history: None,
            warnings,
        },
    ))
}

/// `A⁺f` by Householder QR, falling back to the SVD minimum-norm solution
/// when `A` is rank deficient or has more columns than rows.
fn channelwise_ls(a: &DMatrix<f64>, f: &DMatrix<f64>) -> (DMatrix<f64>, Vec<String>) {
    let (m, n) = a.shape();
    if n == 0 {
        return (DMatrix::zeros(0, f.ncols()), Vec::new());
    }
    if m >= n {
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = r.diagonal().amax();
        let diag_min = r.diagonal().iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        if diag_min > 1e-12 * diag_max {
            let qtf = qr.q().tr_mul(f);
            if let Some(z) = r.solve_upper_triangular(&qtf) {
                return (z, Vec::new());
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max() * m.max(n) as f64;
    let z = svd.solve(f, tol).expect("both factors requested");
    (z, vec!["rank-deficient matrix: minimum-norm least-squares solution".into()])
}

/// `max(0, 𝒢(z) − 𝒢(z_ref))` where `z_ref` comes from a reference solve
/// warm-started at `z` with `reference_opts` (use `λ = 0` for least squares).
pub fn eopt_certify(
    a: &DMatrix<f64>,
    f: &DMatrix<f64>,
    z: &DMatrix<f64>,
    lambda: f64,
    u: &WeightVector,
    space: &DiscreteSpace,
    reference_opts: &SolverOptions,
) -> Result<f64> {
    let g = objective_srlasso(a, f, z, lambda, u, space)?;
    let g_ref = if lambda > 0.0 {
        let (zr, _) = solve_srlasso_raw(a, f, u, lambda, space, reference_opts, Some(z))?;
        objective_srlasso(a, f, &zr, lambda, u, space)?
    } else {
        let (zr, _) = solve_leastsquares_raw(a, f, space, reference_opts)?;
        objective_srlasso(a, f, &zr, 0.0, u, space)?
    };
    Ok((g - g_ref.min(g)).max(0.0))
}

/// `0 < λ ≤ (1+ρ)²/((3+ρ)γ)·k^{-1/2}`.
pub fn lambda_admissible(lambda: f64, rho: f64, gamma: f64, k: f64) -> bool {
    lambda > 0.0 && lambda <= (1.0 + rho).powi(2) / ((3.0 + rho) * gamma) / k.sqrt()
}


#[cfg(test)]
mod convergence_tests {
    use super::*;
    use rand::Rng as _;

    fn random_problem(m: usize, n: usize, k: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut r = crate::rng::rng(seed);
        let a = DMatrix::from_fn(m, n, |_, _| r.gen_range(-1.0..1.0) / (m as f64).sqrt());
        let f = DMatrix::from_fn(m, k, |_, _| r.gen_range(-1.0..1.0));
        (a, f)
    }

    #[test]
    fn perturbations_do_not_improve() {
        let (a, f) = random_problem(20, 30, 3, 7);
        let u = WeightVector::new((1..=30).map(|j| 1.0 + 0.1 * j as f64).collect()).unwrap();
        let gram = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let spaces = [
            DiscreteSpace::hilbert(3).unwrap(),
            DiscreteSpace::new(3, BlockNorm::L1).unwrap(),
            DiscreteSpace::new(3, BlockNorm::Linf).unwrap(),
            DiscreteSpace::with_gram(gram).unwrap(),
        ];
        let mut r = crate::rng::rng(99);
        for space in spaces {
            let (z, rep) = solve_srlasso_raw(&a, &f, &u, 0.05, &space, &SolverOptions::default(), None).unwrap();
            let g = objective_srlasso(&a, &f, &z, 0.05, &u, &space).unwrap();
            assert!((g - rep.final_objective).abs() <= 1e-12);
            for _ in 0..200 {
                let dz = DMatrix::from_fn(30, 3, |_, _| r.gen_range(-1e-4..1e-4));
                let gp = objective_srlasso(&a, &f, &(&z + dz), 0.05, &u, &space).unwrap();
                assert!(gp >= g - 1e-9, "{gp} < {g}");
            }
        }
    }
}
