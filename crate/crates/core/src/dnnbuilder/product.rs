//! Multiplication networks: exact two-factor products with RePU, approximate
//! ones with ReLU and tanh, and binary product trees over `n` factors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Activation, Layer, Network, SparseMatrix};
use crate::error::{invalid, Result};

/// Construction details recorded alongside a product network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductInfo {
    pub n_factors: usize,
    /// Leaves of the binary tree (next power of two).
    pub leaves: usize,
    /// `M = ∏ M_i`.
    pub bound: f64,
    /// Error budget of each two-factor multiply on `[-1,1]²`.
    pub node_budget: f64,
    /// A priori error bound of each multiply as constructed.
    pub node_error: f64,
    /// Hidden layers per multiply.
    pub node_depth: usize,
    /// Finite-difference step of the tanh squaring unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tanh_step: Option<f64>,
}

fn dense_row(values: &[f64]) -> SparseMatrix {
    SparseMatrix::from_triplets(1, values.len(), values.iter().enumerate().map(|(j, &v)| (0, j, v)))
}

/// Shifts `b_k` and coefficients `α_k` with `Σ α_k (z + b_k)^ℓ = z^deg`.
fn power_representation(power: u32, deg: u32) -> Vec<(f64, f64)> {
    match (power, deg) {
        (2, 2) => vec![(0.0, 1.0)],
        (2, 1) => vec![(1.0, 0.25), (-1.0, -0.25)],
        _ => {
            let l = power as usize;
            let shifts: Vec<f64> = (0..=l).map(|k| k as f64 - l as f64 / 2.0).collect();
            // row j: coefficient of z^j in (z+b)^ℓ is C(ℓ,j) b^{ℓ-j}
            let mut binom = vec![1.0f64; l + 1];
            for j in 1..=l {
                binom[j] = binom[j - 1] * (l + 1 - j) as f64 / j as f64;
            }
            let a = DMatrix::from_fn(l + 1, l + 1, |j, k| binom[j] * shifts[k].powi((l - j) as i32));
            let mut rhs = DVector::zeros(l + 1);
            rhs[deg as usize] = 1.0;
            let coef = a.lu().solve(&rhs).expect("distinct shifts give an invertible system");
            shifts.into_iter().zip(coef.iter().copied()).collect()
        }
    }
}

/// Depth-1 RePU network computing `z^deg` (`deg ∈ {1,2}`) exactly, using
/// `(z+b)^ℓ = σ_ℓ(z+b) + (−1)^ℓ σ_ℓ(−z−b)`.
pub(crate) fn repu_monomial_block(power: u32, deg: u32) -> Network {
    let rep = power_representation(power, deg);
    let sign = if power % 2 == 0 { 1.0 } else { -1.0 };
    let h = 2 * rep.len();
    let w0 = SparseMatrix::from_triplets(h, 1, (0..rep.len()).flat_map(|k| [(2 * k, 0, 1.0), (2 * k + 1, 0, -1.0)]));
    let b0: Vec<f64> = rep.iter().flat_map(|&(b, _)| [b, -b]).collect();
    let w1 = dense_row(&rep.iter().flat_map(|&(_, a)| [a, sign * a]).collect::<Vec<_>>());
    Network::from_layers(Activation::Repu { power }, vec![Layer::new(w0, b0), Layer::new(w1, vec![0.0])])
        .expect("chained")
}

/// `xy = ((x+y)² − (x−y)²)/4` with exact RePU squaring units.
pub fn mult2_repu(power: u32) -> Result<Network> {
    if power < 2 {
        return invalid("RePU power must be at least 2");
    }
    let sq = repu_monomial_block(power, 2);
    Ok(two_squares(&sq, Activation::Repu { power }, 1.0, 0.25))
}

/// `(x, y) ↦ c·(S(s(x+y)) − S(s(x−y)))` with two copies of the squaring unit `S`.
fn two_squares(sq: &Network, act: Activation, s: f64, c: f64) -> Network {
    let pre = Network::affine(
        act,
        SparseMatrix::from_triplets(2, 2, [(0, 0, s), (0, 1, s), (1, 0, s), (1, 1, -s)]),
        vec![0.0; 2],
    );
    let both = Network::parallel(&[sq, sq]).expect("equal depth");
    let post = Network::affine(act, dense_row(&[c, -c]), vec![0.0]);
    pre.then(&both).and_then(|n| n.then(&post)).expect("dims chain")
}

/// ReLU approximation of `t²` on `[-1,1]` with `m` sawtooth levels and
/// error at most `2^{-2m-2}`; depth `m + 1`.
pub fn relu_square(m: usize) -> Network {
    let act = Activation::Relu;
    // |t| = σ(t) + σ(−t)
    let mut layers = vec![Layer::new(SparseMatrix::from_triplets(2, 1, [(0, 0, 1.0), (1, 0, -1.0)]), vec![0.0; 2])];
    if m == 0 {
        layers.push(Layer::new(dense_row(&[1.0, 1.0]), vec![0.0]));
        return Network::from_layers(act, layers).expect("chained");
    }
    // state after each level: [acc, σ(v), σ(v−½), σ(v−1)] with the hat
    // g(v) = 2σ(v) − 4σ(v−½) + 2σ(v−1) and acc_s = acc_{s−1} − g_s/4^s
    let hat_bias = vec![0.0, 0.0, -0.5, -1.0];
    layers.push(Layer::new(
        SparseMatrix::from_triplets(4, 2, (0..4).flat_map(|r| [(r, 0, 1.0), (r, 1, 1.0)])),
        hat_bias.clone(),
    ));
    let hat = [2.0, -4.0, 2.0];
    for s in 2..=m {
        let q = 4f64.powi(s as i32 - 1);
        let mut t = vec![(0, 0, 1.0)];
        for (c, &h) in hat.iter().enumerate() {
            t.push((0, c + 1, -h / q));
            for r in 1..4 {
                t.push((r, c + 1, h));
            }
        }
        layers.push(Layer::new(SparseMatrix::from_triplets(4, 4, t), hat_bias.clone()));
    }
    let q = 4f64.powi(m as i32);
    layers.push(Layer::new(dense_row(&[1.0, -hat[0] / q, -hat[1] / q, -hat[2] / q]), vec![0.0]));
    Network::from_layers(act, layers).expect("chained")
}

/// ReLU product of two numbers in `[-1,1]` with error at most `2^{-2m-1}`.
pub fn mult2_relu(m: usize) -> Network {
    two_squares(&relu_square(m), Activation::Relu, 0.5, 1.0)
}

/// Point of maximal `|tanh''|`, where `tanh b = 1/√3`.
fn tanh_anchor() -> (f64, f64) {
    let b = (1.0 / 3f64.sqrt()).atanh();
    let t = b.tanh();
    (b, -2.0 * t * (1.0 - t * t))
}

/// tanh product of two numbers in `[-1,1]` from the central difference
/// `t² ≈ (tanh(b+ht) + tanh(b−ht) − 2 tanh b)/(h² tanh''(b))`; the constant
/// terms cancel in `S(a) − S(c)`, leaving one hidden layer of four units.
pub fn mult2_tanh(h: f64) -> Network {
    let (b, d2) = tanh_anchor();
    let s = 0.5 * h;
    // a = (x+y)/2, c = (x−y)/2
    let w0 = SparseMatrix::from_triplets(
        4,
        2,
        [
            (0, 0, s),
            (0, 1, s),
            (1, 0, -s),
            (1, 1, -s),
            (2, 0, s),
            (2, 1, -s),
            (3, 0, -s),
            (3, 1, s),
        ],
    );
    let c = 1.0 / (h * h * d2);
    let w1 = dense_row(&[c, c, -c, -c]);
    Network::from_layers(Activation::Tanh, vec![Layer::new(w0, vec![b; 4]), Layer::new(w1, vec![0.0])])
        .expect("chained")
}

/// Sup error of the tanh squaring unit over `[-1.02, 1.02]`.
fn tanh_square_error(h: f64) -> f64 {
    let (b, d2) = tanh_anchor();
    let c = 1.0 / (h * h * d2);
    let tb = b.tanh();
    (0..=2048)
        .map(|i| {
            let t = -1.02 + 2.04 * i as f64 / 2048.0;
            let v = ((b + h * t).tanh() + (b - h * t).tanh() - 2.0 * tb) * c;
            (v - t * t).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest step `h = 2^{-k/4}` whose multiply error `2·err_sq(h)` meets
/// `budget`; if none does, the most accurate step.
fn tune_tanh_step(budget: f64) -> (f64, f64) {
    let mut best = (1.0, f64::INFINITY);
    for k in 0..=120 {
        let h = 2f64.powf(-(k as f64) / 4.0);
        let e = 2.0 * tanh_square_error(h);
        if e <= budget {
            return (h, e);
        }
        if e < best.1 {
            best = (h, e);
        }
    }
    best
}

/// Binary tree of `mult2` units over `leaves` inputs (a power of two).
fn product_tree(mult2: &Network, leaves: usize) -> Network {
    debug_assert!(leaves.is_power_of_two());
    let mut net = Network::identity(mult2.activation, leaves);
    let mut width = leaves;
    while width > 1 {
        let copies: Vec<&Network> = std::iter::repeat(mult2).take(width / 2).collect();
        let stage = Network::parallel(&copies).expect("equal depth");
        net = net.then(&stage).expect("dims chain");
        width /= 2;
    }
    net
}

/// Affine map `R^n → R^{leaves}` sending `x_i ↦ x_i / M_i` and filling the
/// remaining slots with the constant 1.
fn scale_and_pad(act: Activation, bounds: &[f64], leaves: usize) -> Network {
    let n = bounds.len();
    let w = SparseMatrix::from_triplets(leaves, n, bounds.iter().enumerate().map(|(i, &m)| (i, i, 1.0 / m)));
    let b = (0..leaves).map(|i| if i < n { 0.0 } else { 1.0 }).collect();
    Network::affine(act, w, b)
}

/// Exact RePU product of `n_factors` numbers.
pub fn build_product_repu(power: u32, n_factors: usize) -> Result<Network> {
    if power < 2 {
        return invalid("RePU power must be at least 2");
    }
    if n_factors == 0 {
        return invalid("need at least one factor");
    }
    let act = Activation::Repu { power };
    if n_factors == 1 {
        return Ok(Network::identity(act, 1));
    }
    let leaves = n_factors.next_power_of_two();
    let pad = scale_and_pad(act, &vec![1.0; n_factors], leaves);
    pad.then(&product_tree(&mult2_repu(power)?, leaves))
}

/// ReLU or tanh network with `sup_{|x_i|≤M_i} |∏x_i − Φ(x)| ≤ δ` by
/// construction (tanh: up to the tuned node error, see [`ProductInfo`]).
pub fn build_product_approx(
    activation: Activation,
    n_factors: usize,
    bounds: &[f64],
    delta: f64,
) -> Result<(Network, ProductInfo)> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0,1), got {delta}"));
    }
    if n_factors == 0 || bounds.len() != n_factors {
        return invalid("need one positive bound per factor");
    }
    if bounds.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
        return invalid("factor bounds must be positive");
    }
    if matches!(activation, Activation::Repu { .. }) {
        return invalid("RePU products are exact; use build_product_repu");
    }
    let bound: f64 = bounds.iter().product();
    if n_factors == 1 {
        let info = ProductInfo {
            n_factors,
            leaves: 1,
            bound,
            node_budget: delta,
            node_error: 0.0,
            node_depth: 0,
            tanh_step: None,
        };
        return Ok((Network::identity(activation, 1), info));
    }
    let leaves = n_factors.next_power_of_two();
    // errors add along the tree: (leaves−1) multiplies, then scaled by M
    let node_budget = delta / (bound * leaves as f64);
    let (mult2, node_error, node_depth, tanh_step) = match activation {
        Activation::Relu => {
            let m = ((1.0 / node_budget).log2() - 1.0) / 2.0;
            let m = m.ceil().max(0.0) as usize;
            (mult2_relu(m), 2f64.powi(-2 * m as i32 - 1), m + 1, None)
        }
        Activation::Tanh => {
            let (h, e) = tune_tanh_step(node_budget);
            (mult2_tanh(h), e, 1, Some(h))
        }
        Activation::Repu { .. } => unreachable!(),
    };
    let pre = scale_and_pad(activation, bounds, leaves);
    let post = Network::affine(activation, dense_row(&[bound]), vec![0.0]);
    let net = pre.then(&product_tree(&mult2, leaves))?.then(&post)?;
    Ok((
        net,
        ProductInfo {
            n_factors,
            leaves,
            bound,
            node_budget,
            node_error,
            node_depth,
            tanh_step,
        },
    ))
}
