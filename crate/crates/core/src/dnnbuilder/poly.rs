//! Networks emulating `Ψ_ν`, their a posteriori certificates, and stacking
//! into `Φ_Λ`.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::product::{build_product_approx, build_product_repu, ProductInfo};
use super::{Activation, Network, SparseMatrix};
use crate::error::{invalid, Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::polybasis::{factor_bound, intrinsic_weight, roots_and_scale, univariate_unchecked, BasisFamily};
use crate::rng;

/// Accuracy demanded of RePU builds, which are exact up to rounding,
/// relative to `‖Ψ_ν‖_∞`.
pub const REPU_TOLERANCE: f64 = 1e-10;

/// How emulation errors are measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationSpec {
    /// Tensor-grid resolution per active coordinate.
    pub points_per_dim: usize,
    /// Largest tensor grid evaluated exhaustively.
    pub max_grid_points: usize,
    /// Random points used when the tensor grid would be larger.
    pub sampled_points: usize,
    pub seed: u64,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        Self {
            points_per_dim: 201,
            max_grid_points: 10_000_000,
            sampled_points: 1_000_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Active coordinates (1-based, within the full parameter point).
    pub active_dims: Vec<usize>,
    pub points_per_dim: usize,
    pub total_points: usize,
    /// Random validation instead of a full tensor grid.
    pub sampled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmulationCertificate {
    pub index: MultiIndex,
    pub family: BasisFamily,
    pub activation: Activation,
    pub delta: f64,
    pub grid_error: f64,
    pub grid: GridSpec,
    pub n_factors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<ProductInfo>,
    pub width: usize,
    pub depth: usize,
    pub size: usize,
}

impl EmulationCertificate {
    pub fn certified(&self) -> bool {
        self.grid_error <= self.delta
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyBuildOptions {
    pub validation: ValidationSpec,
    /// Skip validation (the certificate then reports a grid error of NaN).
    pub validate: bool,
    /// Pad the factor list with ones up to this count.
    pub pad_factors_to: Option<usize>,
}

impl Default for PolyBuildOptions {
    fn default() -> Self {
        Self {
            validation: ValidationSpec::default(),
            validate: true,
            pad_factors_to: None,
        }
    }
}

/// Network `Φ_{ν,δ}` on the coordinates `theta` with `‖Ψ_ν − Φ∘T_Θ‖_∞ ≤ δ`,
/// checked on a grid over the active coordinates.
///
/// `Ψ_ν` is written as a product of affine factors `c_i(y_i − r_j)` over the
/// roots of each univariate factor; the factors feed a product network.
pub fn build_poly_network(
    family: BasisFamily,
    nu: &MultiIndex,
    delta: f64,
    theta: &[usize],
    activation: Activation,
    opts: &PolyBuildOptions,
) -> Result<(Network, EmulationCertificate)> {
    let is_repu = matches!(activation, Activation::Repu { .. });
    if !is_repu && !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0,1), got {delta}"));
    }
    let n = theta.len();
    // (input position, scale, root, bound) per affine factor
    let mut factors = Vec::new();
    for &(j, v) in nu.entries() {
        let pos = theta.iter().position(|&t| t == j).ok_or_else(|| Error::DimensionMismatch {
            expected: j,
            found: n,
        })?;
        let (roots, scale) = roots_and_scale(family, v)?;
        let mb = factor_bound(family, v)?;
        factors.extend(roots.into_iter().map(|r| (pos, scale, r, mb)));
    }
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    let mut bounds = Vec::new();
    let want = factors.len().max(opts.pad_factors_to.unwrap_or(0));
    if want > 0 {
        for slot in spread(factors, want.next_power_of_two()) {
            match slot {
                Some((pos, scale, r, mb)) => {
                    weights.push((bias.len(), pos, scale));
                    bias.push(-scale * r);
                    bounds.push(mb);
                }
                None => {
                    bias.push(1.0);
                    bounds.push(1.0);
                }
            }
        }
    }
    let nf = bias.len();
    let (net, product) = if nf == 0 {
        // Ψ_0 ≡ 1; the zero weights are kept so the input is still read
        let w = SparseMatrix::from_triplets(1, n, (0..n).map(|i| (0, i, 0.0)));
        (Network::affine(activation, w, vec![1.0]), None)
    } else {
        let factors = Network::affine(activation, SparseMatrix::from_triplets(nf, n, weights), bias);
        match activation {
            Activation::Repu { power } => (factors.then(&build_product_repu(power, nf)?)?, None),
            _ => {
                let (p, info) = build_product_approx(activation, nf, &bounds, delta)?;
                (factors.then(&p)?, Some(info))
            }
        }
    };
    let net = net.with_theta(theta.to_vec());
    let target = if is_repu {
        REPU_TOLERANCE * intrinsic_weight(family, nu)
    } else {
        delta
    };

    let active: Vec<usize> = nu.support().collect();
    let (grid_error, grid) = if opts.validate {
        measure_error(family, nu, &net, theta, &active, &opts.validation)
    } else {
        (
            f64::NAN,
            GridSpec {
                active_dims: active.clone(),
                points_per_dim: 0,
                total_points: 0,
                sampled: false,
            },
        )
    };
    let stats = net.stats();
    let cert = EmulationCertificate {
        index: nu.clone(),
        family,
        activation,
        delta: target,
        grid_error,
        grid,
        n_factors: nf,
        product,
        width: stats.width,
        depth: stats.depth,
        size: stats.size,
    };
    if opts.validate && !(grid_error <= target) {
        return Err(Error::BuildRejected {
            measured: grid_error,
            delta: target,
        });
    }
    Ok((net, cert))
}

/// Places sorted factors on the leaves of a binary product tree so that every
/// subtree gets roots spread across the whole interval. Products of clustered
/// roots vary wildly in size over `[-1,1]` and the squaring identity then
/// loses digits.
fn spread<T>(mut items: Vec<T>, slots: usize) -> Vec<Option<T>> {
    if slots == 1 {
        return vec![items.pop()];
    }
    let (mut even, mut odd) = (Vec::new(), Vec::new());
    for (i, x) in items.into_iter().enumerate() {
        if i % 2 == 0 { even.push(x) } else { odd.push(x) }
    }
    let mut out = spread(even, slots / 2);
    out.extend(spread(odd, slots / 2));
    out
}

/// Builds `Φ_{ν,δ}` for every `ν ∈ Λ` in parallel, in `Λ` order.
pub fn build_poly_networks(
    family: BasisFamily,
    set: &IndexSet,
    delta: f64,
    theta: &[usize],
    activation: Activation,
    opts: &PolyBuildOptions,
) -> Result<Vec<(Network, EmulationCertificate)>> {
    set.members()
        .par_iter()
        .map(|nu| build_poly_network(family, nu, delta, theta, activation, opts))
        .collect()
}

/// Sup of `|Ψ_ν − Φ|` over a tensor grid (or random points) in the active
/// coordinates; inactive coordinates are held at 0, which the network ignores.
fn measure_error(
    family: BasisFamily,
    nu: &MultiIndex,
    net: &Network,
    theta: &[usize],
    active: &[usize],
    spec: &ValidationSpec,
) -> (f64, GridSpec) {
    let l0 = active.len();
    let g = spec.points_per_dim.max(2);
    let full = (g as f64).powi(l0 as i32);
    let sampled = full > spec.max_grid_points as f64;
    let total = if sampled { spec.sampled_points } else { full as usize };
    let pos: Vec<usize> = active
        .iter()
        .map(|j| theta.iter().position(|t| t == j).expect("support inside theta"))
        .collect();
    let degs: Vec<u32> = active.iter().map(|&j| nu.get(j)).collect();
    let n = theta.len();
    let chunk = 4096;
    let err = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut r = rng::child(spec.seed, &[c as u64]);
            let mut x = vec![0.0; n];
            let mut worst = 0.0f64;
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                let mut rest = idx;
                let mut exact = 1.0;
                for (a, &p) in pos.iter().enumerate() {
                    let y = if sampled {
                        r.gen_range(-1.0..=1.0)
                    } else {
                        let i = rest % g;
                        rest /= g;
                        -1.0 + 2.0 * i as f64 / (g - 1) as f64
                    };
                    x[p] = y;
                    exact *= univariate_unchecked(family, degs[a], y);
                }
                let e = (net.forward(&x)[0] - exact).abs();
                worst = worst.max(if e.is_nan() { f64::INFINITY } else { e });
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    (
        err,
        GridSpec {
            active_dims: active.to_vec(),
            points_per_dim: if sampled { 0 } else { g },
            total_points: total,
            sampled,
        },
    )
}

/// Stacks per-ν networks sharing Θ into `Φ_Λ : R^n → R^N`, padding shallower
/// networks with identity layers.
pub fn stack_networks(nets: &[Network]) -> Result<Network> {
    let first = nets.first().ok_or_else(|| Error::InvalidArgument("nothing to stack".into()))?;
    if nets.iter().any(|n| n.activation != first.activation) {
        return invalid("mixed activations");
    }
    if nets.iter().any(|n| n.theta != first.theta || n.input_dim() != first.input_dim()) {
        return invalid("networks read different coordinates");
    }
    let depth = nets.iter().map(Network::depth).max().unwrap_or(0);
    let padded: Vec<Network> = nets.par_iter().map(|n| n.pad_to_depth(depth)).collect::<Result<_>>()?;
    let refs: Vec<&Network> = padded.iter().collect();
    let body = Network::parallel(&refs)?;
    // copy the shared input once per network
    let n = first.input_dim();
    let copies = nets.len();
    let dup = Network::affine(
        first.activation,
        SparseMatrix::from_triplets(n * copies, n, (0..copies).flat_map(|c| (0..n).map(move |i| (c * n + i, i, 1.0)))),
        vec![0.0; n * copies],
    );
    let mut out = dup.then(&body)?;
    out.theta = first.theta.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> PolyBuildOptions {
        PolyBuildOptions {
            validation: ValidationSpec {
                points_per_dim: 101,
                ..ValidationSpec::default()
            },
            ..PolyBuildOptions::default()
        }
    }

    #[test]
    fn constant_network() {
        let (net, cert) = build_poly_network(
            BasisFamily::Legendre,
            &MultiIndex::zero(),
            1e-3,
            &[1, 2],
            Activation::Relu,
            &quick(),
        )
        .unwrap();
        assert_eq!(net.forward(&[0.3, -0.2]), vec![1.0]);
        assert_eq!(cert.grid_error, 0.0);
    }

    #[test]
    fn support_outside_theta_rejected() {
        let r = build_poly_network(
            BasisFamily::Legendre,
            &MultiIndex::unit(3),
            1e-3,
            &[1, 2],
            Activation::Relu,
            &quick(),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn relu_chebyshev_certificate() {
        let nu = MultiIndex::from_dense(&[1, 2]);
        let (_, cert) =
            build_poly_network(BasisFamily::Chebyshev, &nu, 1e-3, &[1, 2], Activation::Relu, &quick()).unwrap();
        assert!(cert.certified(), "{cert:?}");
    }

    #[test]
    fn stacking_matches_components() {
        let theta = vec![1, 2];
        let set = crate::multiindex::hci_index_set(2).unwrap();
        for act in [Activation::Relu, Activation::Tanh, Activation::Repu { power: 2 }] {
            let built = build_poly_networks(BasisFamily::Legendre, &set, 1e-2, &theta, act, &quick()).unwrap();
            let nets: Vec<Network> = built.into_iter().map(|(n, _)| n).collect();
            let stack = stack_networks(&nets).unwrap();
            for x in [[0.0, 0.0], [0.5, -0.7], [-1.0, 1.0]] {
                let out = stack.forward(&x);
                for (j, n) in nets.iter().enumerate() {
                    assert!((out[j] - n.forward(&x)[0]).abs() <= 1e-12, "{act:?}");
                }
            }
        }
    }
}
