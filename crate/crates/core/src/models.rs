//! Test functions: a 1-D parametric diffusion problem, synthetic
//! holomorphic maps, coarse-grid projection, reference coefficients by
//! tensor quadrature, and the polyellipse admissibility check.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banachspace::{BlockNorm, BlockVector, DiscreteSpace};
use crate::error::{invalid, Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::polybasis::{eval_tensor, eval_univariate_all, gauss_rule, BasisFamily, SamplePoint};
use crate::rng;

/// Largest tensor quadrature accepted by [`reference_coefficients`].
pub const MAX_QUAD_DIM: usize = 6;
pub const MAX_QUAD_ORDER: usize = 20;

/// Monotone profile on `[0,1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile {
    Constant { value: f64 },
    /// `start + (end − start)·x`.
    Linear { start: f64, end: f64 },
    /// `scale·exp(rate·x)`.
    Exp { scale: f64, rate: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::Linear { start, end } => start + (end - start) * x,
            Profile::Exp { scale, rate } => scale * (rate * x).exp(),
        }
    }

    /// Every profile is monotone, so the minimum sits at an endpoint.
    pub fn min(&self) -> f64 {
        self.eval(0.0).min(self.eval(1.0))
    }
}

/// Amplitude sequences `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Amplitudes {
    Explicit { values: Vec<f64> },
    /// `scale·(j+1)^{-beta}`, `j = 1..=d`.
    Algebraic { beta: f64, scale: f64, d: usize },
    /// `scale·theta^j`, `j = 1..=d`.
    Geometric { theta: f64, scale: f64, d: usize },
}

impl Amplitudes {
    pub fn values(&self) -> Result<Vec<f64>> {
        let b: Vec<f64> = match self {
            Amplitudes::Explicit { values } => values.clone(),
            Amplitudes::Algebraic { beta, scale, d } => {
                (1..=*d).map(|j| scale * ((j + 1) as f64).powf(-beta)).collect()
            }
            Amplitudes::Geometric { theta, scale, d } => {
                if !(*theta > 0.0 && *theta < 1.0) {
                    return invalid("geometric ratio must lie in (0,1)");
                }
                (1..=*d).map(|j| scale * theta.powi(j as i32)).collect()
            }
        };
        if b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return invalid("amplitudes must be finite and nonnegative");
        }
        Ok(b)
    }
}

/// `−(a(x,y)u')' = F` on `(0,1)`, `u(0) = u(1) = 0`, with
/// `a(x,y) = a0(x) + Σ_j y_j b_j sin(jπx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    /// Interior nodes of the fine grid.
    pub grid_size: usize,
    pub a0: Profile,
    pub b: Vec<f64>,
    pub forcing: Profile,
}

impl DiffusionConfig {
    pub fn new(grid_size: usize, a0: Profile, b: Vec<f64>, forcing: Profile) -> Result<Self> {
        let cfg = Self {
            grid_size,
            a0,
            b,
            forcing,
        };
        cfg.ellipticity_margin()?;
        Ok(cfg)
    }

    pub fn active_dims(&self) -> usize {
        self.b.len()
    }

    /// `r = min_x a0(x) − Σ_j b_j`, which must be positive.
    pub fn ellipticity_margin(&self) -> Result<f64> {
        if self.grid_size == 0 {
            return invalid("grid needs at least one interior node");
        }
        if self.b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return invalid("amplitudes must be finite and nonnegative");
        }
        let r = self.a0.min() - self.b.iter().sum::<f64>();
        if !(r > 0.0) {
            return Err(Error::Model(format!("coefficient not uniformly elliptic: margin {r}")));
        }
        Ok(r)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = 1.0 / (self.grid_size + 1) as f64;
        (1..=self.grid_size).map(|i| i as f64 * h).collect()
    }

    fn coefficient(&self, x: f64, y: &[f64]) -> f64 {
        use std::f64::consts::PI;
        self.a0.eval(x)
            + self
                .b
                .iter()
                .zip(y)
                .enumerate()
                .map(|(j, (b, yj))| yj * b * ((j + 1) as f64 * PI * x).sin())
                .sum::<f64>()
    }
}

/// Interior values of the second-order finite-difference solution.
pub fn diffusion_solution(y: &SamplePoint, cfg: &DiffusionConfig) -> Result<Vec<f64>> {
    cfg.ellipticity_margin()?;
    let d = cfg.active_dims();
    if y.dim() < d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: y.dim(),
        });
    }
    let yv = &y.coords[..d];
    let k = cfg.grid_size;
    let h = 1.0 / (k + 1) as f64;
    // fluxes at midpoints x_{i+1/2}, i = 0..=k
    let a: Vec<f64> = (0..=k).map(|i| cfg.coefficient((i as f64 + 0.5) * h, yv)).collect();
    if let Some(bad) = a.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Model(format!("nonpositive diffusion coefficient {bad}")));
    }
    let h2 = h * h;
    let diag: Vec<f64> = (0..k).map(|i| a[i] + a[i + 1]).collect();
    let off: Vec<f64> = (0..k.saturating_sub(1)).map(|i| -a[i + 1]).collect();
    let rhs: Vec<f64> = (1..=k).map(|i| h2 * cfg.forcing.eval(i as f64 * h)).collect();
    Ok(thomas(&off, &diag, &off, rhs))
}

/// Tridiagonal solve with sub-diagonal `lower`, diagonal `diag`, super-diagonal `upper`.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], mut rhs: Vec<f64>) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut b0 = diag[0];
    if n > 1 {
        c[0] = upper[0] / b0;
    }
    rhs[0] /= b0;
    for i in 1..n {
        b0 = diag[i] - lower[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / b0;
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / b0;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    rhs
}

pub fn write_solution_csv<W: Write>(cfg: &DiffusionConfig, u: &[f64], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "u"])?;
    for (x, v) in cfg.nodes().iter().zip(u) {
        wr.write_record([format!("{x:?}"), format!("{v:?}")])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HolomorphicKind {
    Diffusion,
    Rational,
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolomorphicParams {
    pub kind: HolomorphicKind,
    pub b: Vec<f64>,
    pub eps: f64,
    /// Claimed summability exponent of `b`.
    pub p: f64,
    /// Constant term of the rational denominator `c₀ − Σ b_j y_j`.
    #[serde(default = "default_c0")]
    pub c0: f64,
    /// Number of output components `K`; component `k` is `g^{k+1}`.
    #[serde(default = "one")]
    pub output_dim: usize,
}

fn default_c0() -> f64 {
    2.0
}

fn one() -> usize {
    1
}

impl HolomorphicParams {
    pub fn validate(&self) -> Result<()> {
        if self.b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return invalid("amplitudes must be finite and nonnegative");
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return invalid("summability exponent must lie in (0,1]");
        }
        if !self.b.iter().map(|x| x.powf(self.p)).sum::<f64>().is_finite() {
            return invalid("amplitudes not p-summable");
        }
        if !(self.eps > 0.0) {
            return invalid("epsilon must be positive");
        }
        if self.output_dim == 0 {
            return invalid("output dimension must be positive");
        }
        if self.kind == HolomorphicKind::Rational {
            let margin = self.c0 - self.b.iter().sum::<f64>();
            if !(margin > 0.0) {
                return Err(Error::Model(format!("rational map has a pole on the cube: margin {margin}")));
            }
        }
        if self.kind == HolomorphicKind::Diffusion {
            return invalid("the diffusion kind is evaluated through DiffusionConfig");
        }
        Ok(())
    }
}

/// Rational `1/(c₀ − Σ b_j y_j)` or exponential `exp(Σ b_j y_j − Σ|b_j|)`;
/// block component `k` is the `(k+1)`-th power of the scalar map.
pub fn synthetic_holomorphic(y: &SamplePoint, params: &HolomorphicParams) -> Result<Vec<f64>> {
    params.validate()?;
    let d = params.b.len();
    if y.dim() < d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: y.dim(),
        });
    }
    let s: f64 = params.b.iter().zip(&y.coords).map(|(b, y)| b * y).sum();
    let g = match params.kind {
        HolomorphicKind::Rational => 1.0 / (params.c0 - s),
        _ => (s - params.b.iter().sum::<f64>()).exp(),
    };
    Ok((1..=params.output_dim as i32).map(|k| g.powi(k)).collect())
}

/// Decimation from a fine grid with `k_fine` interior nodes to a nested coarse
/// grid, with piecewise-linear re-embedding `E`; `P_K = E∘R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseProjector {
    pub k_fine: usize,
    pub k_coarse: usize,
}

impl CoarseProjector {
    pub fn new(k_fine: usize, k_coarse: usize) -> Result<Self> {
        if k_coarse == 0 || k_coarse > k_fine {
            return invalid(format!("coarse size {k_coarse} must lie in 1..={k_fine}"));
        }
        if (k_fine + 1) % (k_coarse + 1) != 0 {
            return invalid(format!("grids with {k_fine} and {k_coarse} interior nodes are not nested"));
        }
        Ok(Self { k_fine, k_coarse })
    }

    fn ratio(&self) -> usize {
        (self.k_fine + 1) / (self.k_coarse + 1)
    }

    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        let r = self.ratio();
        (1..=self.k_coarse).map(|i| v[i * r - 1]).collect()
    }

    /// Linear interpolation of coarse nodal values (zero boundary values).
    pub fn embed(&self, c: &[f64]) -> Vec<f64> {
        let r = self.ratio();
        let at = |i: usize| if i == 0 || i > self.k_coarse { 0.0 } else { c[i - 1] };
        (1..=self.k_fine)
            .map(|f| {
                let (i, rem) = (f / r, f % r);
                if rem == 0 {
                    at(i)
                } else {
                    let t = rem as f64 / r as f64;
                    (1.0 - t) * at(i) + t * at(i + 1)
                }
            })
            .collect()
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.embed(&self.restrict(v))
    }

    /// Dense matrix of `P_K` on the fine grid.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.k_fine, self.k_fine);
        let mut e = vec![0.0; self.k_fine];
        for c in 0..self.k_fine {
            e[c] = 1.0;
            let col = self.project(&e);
            p.set_column(c, &DVector::from_vec(col));
            e[c] = 0.0;
        }
        p
    }

    /// `π_K = max(‖P_K‖_{V→V}, 1)` for a Hilbert norm on the fine grid:
    /// best ratio over 200 random probes, refined by power iteration.
    pub fn pi_estimate(&self, space: &DiscreteSpace, seed: u64) -> Result<f64> {
        if space.dim() != self.k_fine || !space.is_hilbert() {
            return invalid("π estimate needs a Hilbert norm on the fine grid");
        }
        if self.k_coarse == self.k_fine {
            return Ok(1.0);
        }
        // ‖P‖_G = ‖Lᵀ P L^{-T}‖₂ with G = LLᵀ
        let p = self.matrix();
        let op = match space.gram_factor() {
            Some(l) => {
                let linv_t = l
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidArgument("singular Gram factor".into()))?
                    .transpose();
                l.transpose() * p * linv_t
            }
            None => p,
        };
        let mut r = rng::rng(seed);
        let mut best = 1.0f64;
        let mut start = DVector::from_element(self.k_fine, 1.0);
        for _ in 0..200 {
            let v = DVector::from_fn(self.k_fine, |_, _| StandardNormal.sample(&mut r));
            let ratio = (&op * &v).norm() / v.norm();
            if ratio > best {
                best = ratio;
                start = v;
            }
        }
        let mut v = start.normalize();
        for _ in 0..200 {
            let w = op.tr_mul(&(&op * &v));
            let nw = w.norm();
            if nw == 0.0 {
                break;
            }
            v = w / nw;
            best = best.max((&op * &v).norm());
        }
        Ok(best.max(1.0))
    }
}

/// Coarse values of `v_fine` and `π_K` for the plain ℓ² norm.
pub fn project_coarse(v_fine: &[f64], k_coarse: usize, seed: u64) -> Result<(Vec<f64>, f64)> {
    let proj = CoarseProjector::new(v_fine.len(), k_coarse)?;
    let pi = proj.pi_estimate(&DiscreteSpace::hilbert(v_fine.len())?, seed)?;
    Ok((proj.restrict(v_fine), pi))
}

/// `Σ_j ((ρ_j + ρ_j⁻¹)/2 − 1) b_j ≤ ε`.
pub fn check_polyellipse(rho: &[f64], b: &[f64], eps: f64) -> Result<bool> {
    if rho.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            found: rho.len(),
        });
    }
    if let Some(r) = rho.iter().find(|r| !(**r >= 1.0)) {
        return invalid(format!("polyellipse parameters must be at least 1, got {r}"));
    }
    let lhs: f64 = rho.iter().zip(b).map(|(r, b)| ((r + 1.0 / r) / 2.0 - 1.0) * b).sum();
    Ok(lhs <= eps)
}

/// `c_ν = ∫ f Ψ_ν dϱ` on the first `d_active` coordinates by a `quad_order`-point
/// tensor Gauss rule.
pub fn reference_coefficients(
    f: &(dyn Fn(&SamplePoint) -> Result<Vec<f64>> + Sync),
    set: &Arc<IndexSet>,
    d_active: usize,
    quad_order: usize,
    family: BasisFamily,
    space: &DiscreteSpace,
) -> Result<BlockVector> {
    if d_active > MAX_QUAD_DIM || quad_order > MAX_QUAD_ORDER {
        return Err(Error::CostGuard(format!(
            "tensor quadrature of order {quad_order} in {d_active} dimensions exceeds {MAX_QUAD_ORDER}^{MAX_QUAD_DIM}"
        )));
    }
    if set.max_dim() > d_active {
        return invalid(format!("index set uses coordinate {} beyond d = {d_active}", set.max_dim()));
    }
    let (nodes, weights) = gauss_rule(family, quad_order)?;
    let max_deg = set
        .iter()
        .flat_map(|nu| nu.entries().iter().map(|&(_, v)| v))
        .max()
        .unwrap_or(0);
    // Ψ_k(node) for every node, reused across dimensions
    let table: Vec<Vec<f64>> = nodes.iter().map(|&y| eval_univariate_all(family, max_deg, y)).collect();
    let total = quad_order.pow(d_active as u32);
    let (n, k) = (set.len(), space.dim());
    let chunk = 256;
    let partials: Vec<DMatrix<f64>> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| -> Result<DMatrix<f64>> {
            let mut acc = DMatrix::zeros(n, k);
            let mut idx = vec![0usize; d_active];
            for flat in c * chunk..((c + 1) * chunk).min(total) {
                let mut rest = flat;
                let mut w = 1.0;
                for slot in idx.iter_mut() {
                    *slot = rest % quad_order;
                    rest /= quad_order;
                    w *= weights[*slot];
                }
                let y = SamplePoint {
                    coords: idx.iter().map(|&i| nodes[i]).collect(),
                };
                let fy = f(&y)?;
                if fy.len() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        found: fy.len(),
                    });
                }
                for (row, nu) in set.iter().enumerate() {
                    let psi: f64 = nu.entries().iter().map(|&(j, v)| table[idx[j - 1]][v as usize]).product();
                    for (col, fv) in fy.iter().enumerate() {
                        acc[(row, col)] += w * psi * fv;
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let coeffs = partials.into_iter().fold(DMatrix::zeros(n, k), |a, b| a + b);
    BlockVector::new(space.clone(), set.clone(), coeffs)
}

/// A test function as configured for an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Diffusion {
        grid_size: usize,
        /// Coarse grid for the training data; defaults to the fine grid.
        #[serde(default)]
        coarse_size: Option<usize>,
        a0: Profile,
        forcing: Profile,
        b: Amplitudes,
    },
    Rational {
        c0: f64,
        b: Amplitudes,
        #[serde(default = "one")]
        output_dim: usize,
    },
    Exponential {
        b: Amplitudes,
        #[serde(default = "one")]
        output_dim: usize,
    },
    /// `Σ c_ν Ψ_ν` in the experiment's basis family.
    Polynomial { terms: Vec<PolyTerm> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub index: MultiIndex,
    pub coeffs: Vec<f64>,
}

/// A validated model ready for evaluation.
#[derive(Clone, Debug)]
pub enum Model {
    Diffusion {
        cfg: DiffusionConfig,
        proj: CoarseProjector,
    },
    Synthetic(HolomorphicParams),
    Polynomial {
        family: BasisFamily,
        terms: Vec<PolyTerm>,
    },
}

impl Model {
    /// `eps` and `p` label the holomorphy class; only the synthetic maps check them.
    pub fn from_spec(spec: &ModelSpec, family: BasisFamily, eps: f64, p: f64) -> Result<Self> {
        Ok(match spec {
            ModelSpec::Diffusion {
                grid_size,
                coarse_size,
                a0,
                forcing,
                b,
            } => {
                let cfg = DiffusionConfig::new(*grid_size, *a0, b.values()?, *forcing)?;
                let proj = CoarseProjector::new(*grid_size, coarse_size.unwrap_or(*grid_size))?;
                Model::Diffusion { cfg, proj }
            }
            ModelSpec::Rational { c0, b, output_dim } => {
                let params = HolomorphicParams {
                    kind: HolomorphicKind::Rational,
                    b: b.values()?,
                    eps,
                    p,
                    c0: *c0,
                    output_dim: *output_dim,
                };
                params.validate()?;
                Model::Synthetic(params)
            }
            ModelSpec::Exponential { b, output_dim } => {
                let params = HolomorphicParams {
                    kind: HolomorphicKind::Exponential,
                    b: b.values()?,
                    eps,
                    p,
                    c0: default_c0(),
                    output_dim: *output_dim,
                };
                params.validate()?;
                Model::Synthetic(params)
            }
            ModelSpec::Polynomial { terms } => {
                let k = terms.first().map_or(0, |t| t.coeffs.len());
                if k == 0 || terms.iter().any(|t| t.coeffs.len() != k) {
                    return invalid("polynomial terms need equally many, and at least one, coefficients");
                }
                Model::Polynomial {
                    family,
                    terms: terms.clone(),
                }
            }
        })
    }

    pub fn active_dims(&self) -> usize {
        match self {
            Model::Diffusion { cfg, .. } => cfg.active_dims(),
            Model::Synthetic(p) => p.b.len(),
            Model::Polynomial { terms, .. } => terms.iter().map(|t| t.index.max_dim()).max().unwrap_or(0),
        }
    }

    /// Dimension `K` of the values used for training.
    pub fn output_dim(&self) -> usize {
        match self {
            Model::Diffusion { proj, .. } => proj.k_coarse,
            Model::Synthetic(p) => p.output_dim,
            Model::Polynomial { terms, .. } => terms[0].coeffs.len(),
        }
    }

    /// `V_K` carrying the training values. Diffusion values are nodal values
    /// on the coarse grid, normed as functions on `(0,1)`.
    pub fn space(&self, norm: BlockNorm) -> Result<DiscreteSpace> {
        let space = DiscreteSpace::new(self.output_dim(), norm)?;
        match self {
            Model::Diffusion { proj, .. } => space.with_cell(1.0 / (proj.k_coarse + 1) as f64),
            _ => Ok(space),
        }
    }

    /// Holomorphy amplitudes `b`; empty for explicit polynomials.
    pub fn amplitudes(&self) -> &[f64] {
        match self {
            Model::Diffusion { cfg, .. } => &cfg.b,
            Model::Synthetic(p) => &p.b,
            Model::Polynomial { .. } => &[],
        }
    }

    /// Training values: the coarse-grid restriction for the diffusion model.
    pub fn eval(&self, y: &SamplePoint) -> Result<Vec<f64>> {
        match self {
            Model::Diffusion { cfg, proj } => Ok(proj.restrict(&diffusion_solution(y, cfg)?)),
            Model::Synthetic(p) => synthetic_holomorphic(y, p),
            Model::Polynomial { family, terms } => {
                let mut out = vec![0.0; terms[0].coeffs.len()];
                for t in terms {
                    let psi = eval_tensor(*family, &t.index, y)?;
                    out.iter_mut().zip(&t.coeffs).for_each(|(o, c)| *o += c * psi);
                }
                Ok(out)
            }
        }
    }

    /// `‖f(y) − P_K f(y)‖_V` on the fine grid; zero for synthetic maps.
    pub fn discretization_error(&self, y: &SamplePoint, norm: BlockNorm) -> Result<f64> {
        match self {
            Model::Diffusion { cfg, proj } => {
                let u = diffusion_solution(y, cfg)?;
                let pu = proj.project(&u);
                let fine = DiscreteSpace::new(proj.k_fine, norm)?.with_cell(1.0 / (proj.k_fine + 1) as f64)?;
                fine.block_norm(&u.iter().zip(&pu).map(|(a, b)| a - b).collect::<Vec<_>>())
            }
            Model::Synthetic(_) | Model::Polynomial { .. } => Ok(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::hci_index_set_with_dim;

    fn unit_cfg(k: usize, forcing: Profile) -> DiffusionConfig {
        DiffusionConfig::new(k, Profile::Constant { value: 1.0 }, vec![0.3, 0.2], forcing).unwrap()
    }

    #[test]
    fn nominal_solution_is_the_parabola() {
        let cfg = unit_cfg(1023, Profile::Constant { value: 1.0 });
        let u = diffusion_solution(&SamplePoint::new(vec![0.0, 0.0]).unwrap(), &cfg).unwrap();
        assert!((u[511] - 0.125).abs() <= 1e-6, "{}", u[511]);
        for (x, v) in cfg.nodes().iter().zip(&u) {
            assert!((v - x * (1.0 - x) / 2.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn linear_in_forcing_and_depends_on_y() {
        let c1 = unit_cfg(63, Profile::Constant { value: 1.0 });
        let c2 = unit_cfg(63, Profile::Constant { value: 2.0 });
        let y = SamplePoint::new(vec![0.7, -0.4]).unwrap();
        let (u1, u2) = (diffusion_solution(&y, &c1).unwrap(), diffusion_solution(&y, &c2).unwrap());
        for (a, b) in u1.iter().zip(&u2) {
            assert!((2.0 * a - b).abs() <= 1e-12);
        }
        let y1 = SamplePoint::new(vec![0.9, 0.0]).unwrap();
        let u0 = diffusion_solution(&SamplePoint::new(vec![0.0, 0.0]).unwrap(), &c1).unwrap();
        let uy = diffusion_solution(&y1, &c1).unwrap();
        assert!(u0.iter().zip(&uy).any(|(a, b)| (a - b).abs() > 1e-6));
    }

    #[test]
    fn second_order_convergence() {
        let y = SamplePoint::new(vec![0.0, 0.0]).unwrap();
        let forcing = Profile::Exp { scale: 1.0, rate: 1.0 };
        let sols: Vec<Vec<f64>> = [31, 63, 127]
            .iter()
            .map(|&k| diffusion_solution(&y, &unit_cfg(k, forcing)).unwrap())
            .collect();
        // compare at the nodes of the coarsest grid, x = i/32
        let diff = |a: &[f64], ra: usize, b: &[f64], rb: usize| {
            (1..=31).map(|i| (a[i * ra - 1] - b[i * rb - 1]).abs()).fold(0.0, f64::max)
        };
        let d1 = diff(&sols[0], 1, &sols[1], 2);
        let d2 = diff(&sols[1], 2, &sols[2], 4);
        let ratio = d1 / d2;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn ellipticity_rejected() {
        let r = DiffusionConfig::new(15, Profile::Constant { value: 1.0 }, vec![0.6, 0.5], Profile::Constant { value: 1.0 });
        assert!(matches!(r, Err(Error::Model(_))));
    }

    #[test]
    fn synthetic_examples() {
        let rational = |b: Vec<f64>| HolomorphicParams {
            kind: HolomorphicKind::Rational,
            b,
            eps: 0.5,
            p: 0.5,
            c0: 2.0,
            output_dim: 1,
        };
        let y = SamplePoint::new(vec![1.0]).unwrap();
        assert_eq!(synthetic_holomorphic(&y, &rational(vec![0.0])).unwrap(), vec![0.5]);
        assert_eq!(synthetic_holomorphic(&y, &rational(vec![1.0])).unwrap(), vec![1.0]);
        assert!(synthetic_holomorphic(&y, &rational(vec![2.5])).is_err());
        let mut e = rational(vec![0.0, 0.0]);
        e.kind = HolomorphicKind::Exponential;
        let y2 = SamplePoint::new(vec![0.3, -0.9]).unwrap();
        assert_eq!(synthetic_holomorphic(&y2, &e).unwrap(), vec![1.0]);
    }

    #[test]
    fn projection_examples() {
        let v: Vec<f64> = (1..=31).map(|i| (i as f64 * 0.37).sin()).collect();
        let (same, pi) = project_coarse(&v, 31, 1).unwrap();
        assert_eq!(same, v);
        assert_eq!(pi, 1.0);
        let p = CoarseProjector::new(31, 7).unwrap();
        // a ramp vanishing at the left end is reproduced where it is piecewise linear
        let ramp: Vec<f64> = (1..=31).map(|i| i as f64 / 32.0).collect();
        let pr = p.project(&ramp);
        for i in 0..28 {
            assert!((pr[i] - ramp[i]).abs() <= 1e-14);
        }
        let hat: Vec<f64> = (1..=31).map(|i| (i as f64 / 32.0).min(1.0 - i as f64 / 32.0)).collect();
        for (a, b) in p.project(&hat).iter().zip(&hat) {
            assert!((a - b).abs() <= 1e-14);
        }
        let pi = p.pi_estimate(&DiscreteSpace::hilbert(31).unwrap(), 3).unwrap();
        assert!(pi >= 1.0);
        assert!(CoarseProjector::new(31, 6).is_err());
    }

    #[test]
    fn polyellipse_examples() {
        assert!(check_polyellipse(&[1.0, 1.0], &[3.0, 7.0], 0.0).unwrap());
        assert!(check_polyellipse(&[2.0], &[1.0], 0.25).unwrap());
        assert!(!check_polyellipse(&[2.0], &[1.0], 0.2).unwrap());
        assert!(check_polyellipse(&[0.5], &[1.0], 1.0).is_err());
    }

    #[test]
    fn reference_coefficients_recover_basis_functions() {
        let set = Arc::new(hci_index_set_with_dim(3, 2).unwrap());
        let space = DiscreteSpace::hilbert(1).unwrap();
        for family in [BasisFamily::Legendre, BasisFamily::Chebyshev] {
            for mu in set.iter() {
                let m = mu.clone();
                let f = move |y: &SamplePoint| Ok(vec![eval_tensor(family, &m, y)?]);
                let c = reference_coefficients(&f, &set, 2, 8, family, &space).unwrap();
                for (row, nu) in set.iter().enumerate() {
                    let want = if nu == mu { 1.0 } else { 0.0 };
                    assert!((c.coeffs()[(row, 0)] - want).abs() <= 1e-10);
                }
            }
        }
        let ones = |_: &SamplePoint| Ok(vec![1.0]);
        let c = reference_coefficients(&ones, &set, 2, 4, BasisFamily::Legendre, &space).unwrap();
        assert_eq!(set.position(&MultiIndex::zero()), Some(0));
        assert!((c.coeffs()[(0, 0)] - 1.0).abs() <= 1e-14);
        assert!(matches!(
            reference_coefficients(&ones, &set, 7, 4, BasisFamily::Legendre, &space),
            Err(Error::CostGuard(_))
        ));
    }
}
