//! Measurement matrices, block-operator action, synthetic data and empirical
//! RIP/stability diagnostics.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banachspace::{BlockVector, DiscreteSpace, WeightVector};
use crate::dnnbuilder::Network;
use crate::error::{Error, Result};
use crate::multiindex::IndexSet;
use crate::polybasis::{eval_univariate_all, BasisFamily, SamplePoint};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    ExactPolynomial,
    /// `gap = ‖A − A'‖₂` as measured at assembly.
    NetworkEmulated { delta: f64, gap: f64 },
}

#[derive(Clone, Debug)]
pub struct MeasurementMatrix {
    pub entries: DMatrix<f64>,
    pub provenance: Provenance,
    pub family: BasisFamily,
    pub index_set: Arc<IndexSet>,
    pub points: Arc<Vec<SamplePoint>>,
    pub seed: Option<u64>,
}

impl MeasurementMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    /// CSV of the entries plus a JSON sidecar describing their origin.
    pub fn export<W1: Write, W2: Write>(&self, csv_out: W1, sidecar: W2) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(csv_out);
        for i in 0..self.rows() {
            wr.write_record(self.entries.row(i).iter().map(|v| format!("{v:?}")))?;
        }
        wr.flush()?;
        let meta = serde_json::json!({
            "provenance": self.provenance,
            "family": self.family,
            "seed": self.seed,
            "rows": self.rows(),
            "cols": self.cols(),
            "index_set": self.index_set.members(),
        });
        serde_json::to_writer_pretty(sidecar, &meta)?;
        Ok(())
    }
}

/// `A_{ij} = Ψ_{ν_j}(y_i)/√m`, columns in index-set order.
pub fn assemble_exact(points: &[SamplePoint], set: &Arc<IndexSet>, family: BasisFamily) -> Result<MeasurementMatrix> {
    let m = points.len();
    let dim = set.max_dim();
    if let Some(p) = points.iter().find(|p| p.dim() < dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    let max_deg: Vec<u32> = (1..=dim)
        .map(|j| set.iter().map(|nu| nu.get(j)).max().unwrap_or(0))
        .collect();
    let scale = 1.0 / (m as f64).sqrt();
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| {
            // one recurrence sweep per coordinate, then products
            let tables: Vec<Vec<f64>> = (0..dim)
                .map(|j| eval_univariate_all(family, max_deg[j], p.coords[j]))
                .collect();
            set.iter()
                .map(|nu| nu.entries().iter().map(|&(j, v)| tables[j - 1][v as usize]).product::<f64>() * scale)
                .collect()
        })
        .collect();
    Ok(MeasurementMatrix {
        entries: DMatrix::from_fn(m, set.len(), |i, j| rows[i][j]),
        provenance: Provenance::ExactPolynomial,
        family,
        index_set: set.clone(),
        points: Arc::new(points.to_vec()),
        seed: None,
    })
}

/// `A'_{ij} = Φ_{ν_j}(y_i)/√m` from per-index networks, checked against the
/// exact matrix: `‖A − A'‖₂ ≤ √N·δ` must hold.
pub fn assemble_emulated(
    networks: &[Network],
    points: &[SamplePoint],
    set: &Arc<IndexSet>,
    family: BasisFamily,
    delta: f64,
) -> Result<MeasurementMatrix> {
    if networks.len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            found: networks.len(),
        });
    }
    let m = points.len();
    let scale = 1.0 / (m as f64).sqrt();
    let cols: Vec<Vec<f64>> = networks
        .par_iter()
        .map(|net| {
            points
                .iter()
                .map(|p| net.forward_point(&p.coords).map(|v| v[0] * scale))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let entries = DMatrix::from_fn(m, set.len(), |i, j| cols[j][i]);
    let exact = assemble_exact(points, set, family)?;
    let gap = spectral_norm(&(&exact.entries - &entries));
    let bound = (set.len() as f64).sqrt() * delta;
    if gap > bound {
        return Err(Error::EmulationBound { measured: gap, bound });
    }
    Ok(MeasurementMatrix {
        entries,
        provenance: Provenance::NetworkEmulated { delta, gap },
        family,
        index_set: set.clone(),
        points: exact.points,
        seed: None,
    })
}

/// `(Az)_i = Σ_j a_ij z_j` on `N×K` block coefficients.
pub fn apply_block(a: &DMatrix<f64>, v: &BlockVector) -> Result<DMatrix<f64>> {
    if a.ncols() != v.len() {
        return Err(Error::Shape(format!("matrix has {} columns, vector has {} blocks", a.ncols(), v.len())));
    }
    Ok(a * v.coeffs())
}

/// Training data `(f(y_i) + n_i)/√m` together with the noise that was added.
#[derive(Clone, Debug)]
pub struct DataVector {
    /// `m×K`, row `i` is the scaled block `(f(y_i) + n_i)/√m`.
    pub blocks: DMatrix<f64>,
    /// `m×K` unscaled noise `n_i`.
    pub noise: DMatrix<f64>,
    /// `(1/m Σ ‖n_i‖_V²)^{1/2}`.
    pub e_samp: f64,
}

/// Samples `f` at `points` and adds noise of V-norm exactly `eta` per sample.
pub fn synthesize_data(
    f: &(dyn Fn(&SamplePoint) -> Result<Vec<f64>> + Sync),
    points: &[SamplePoint],
    eta: f64,
    seed: u64,
    space: &DiscreteSpace,
) -> Result<DataVector> {
    if !(eta >= 0.0) {
        return Err(Error::InvalidArgument("noise level must be nonnegative".into()));
    }
    let m = points.len();
    let k = space.dim();
    let values: Vec<Vec<f64>> = points.par_iter().map(f).collect::<Result<_>>()?;
    if let Some(v) = values.iter().find(|v| v.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: v.len(),
        });
    }
    let mut noise = DMatrix::zeros(m, k);
    if eta > 0.0 {
        let mut r = rng::rng(seed);
        for i in 0..m {
            let mut g: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut r)).collect();
            let mut nrm = space.norm_unchecked(g.iter().copied());
            while nrm == 0.0 {
                g = (0..k).map(|_| StandardNormal.sample(&mut r)).collect();
                nrm = space.norm_unchecked(g.iter().copied());
            }
            for c in 0..k {
                noise[(i, c)] = eta * g[c] / nrm;
            }
        }
    }
    let scale = 1.0 / (m as f64).sqrt();
    let blocks = DMatrix::from_fn(m, k, |i, c| (values[i][c] + noise[(i, c)]) * scale);
    let e_samp = if m == 0 {
        0.0
    } else {
        (space.row_norms(&noise).iter().map(|x| x * x).sum::<f64>() / m as f64).sqrt()
    };
    Ok(DataVector { blocks, noise, e_samp })
}

pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOLERANCE: f64 = 1e-10;

/// `‖A‖₂` by power iteration on `AᵀA` (200 iterations, relative tolerance 1e-10).
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let n = a.ncols();
    // deterministic start with no exact zeros
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919) % 13) as f64);
    v.normalize_mut();
    let mut est = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = a.tr_mul(&(a * &v));
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw.sqrt();
        v = w / nw;
        if (next - est).abs() <= POWER_TOLERANCE * next {
            est = next;
            break;
        }
        est = next;
    }
    est
}

/// Empirical weighted RIP constant: the largest `|σ²−1|` over extreme
/// singular values of `A_S` for random maximal supports `S` with `|S|_w ≤ k`.
/// A lower bound on the true constant.
pub fn estimate_rip_constant(a: &DMatrix<f64>, k: f64, w: &WeightVector, trials: usize, seed: u64) -> Result<f64> {
    let n = a.ncols();
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: w.len(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let cost: Vec<f64> = w.values().iter().map(|x| x * x).collect();
    if cost.iter().all(|&c| c > k) {
        return Err(Error::EmptySparsity(k));
    }
    let worst = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::child(seed, &[t as u64]);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut r);
            // the permutation does not depend on k, so supports grow with k
            let mut used = 0.0;
            let mut support = Vec::new();
            for j in order {
                if used + cost[j] <= k {
                    used += cost[j];
                    support.push(j);
                }
            }
            support.sort_unstable();
            support_rip(a, &support)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// `max |σ² − 1|` over the singular values of the columns `support` of `a`.
pub fn support_rip(a: &DMatrix<f64>, support: &[usize]) -> f64 {
    if support.is_empty() {
        return 0.0;
    }
    let sub = a.select_columns(support);
    let gram = sub.tr_mul(&sub);
    let eig = gram.symmetric_eigenvalues();
    eig.iter().map(|&l| (l - 1.0).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullCaseStability {
    pub sigma_min: f64,
    /// `γ = 1/σ_min`: the robust null space property holds with `ρ = 0`.
    pub gamma: f64,
}

pub fn full_case_stability(a: &DMatrix<f64>) -> Result<FullCaseStability> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Underdetermined { m, n });
    }
    let sv = a.clone().svd(false, false).singular_values;
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(FullCaseStability {
        sigma_min,
        gamma: 1.0 / sigma_min,
    })
}
