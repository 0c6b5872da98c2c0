//! Closed-form parameter choices and bounds: the log factor `L`, sparsity
//! `k`, `λ`, emulation accuracy `δ`, sample complexities, rNSP error
//! constants, algebraic rates, architecture bound shapes, and selection of
//! the index set `S` in the known-anisotropy setting.
//!
//! Unknown universal constants enter as explicit parameters (default 1).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::banachspace::BlockVector;
use crate::dnnbuilder::Activation;
use crate::error::{invalid, Error, Result};
use crate::multiindex::{addable, anchored_closure, IndexSet, MultiIndex};

/// Smallest δ handed to the network builders.
pub const DELTA_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anisotropy {
    Known,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codomain {
    Hilbert,
    Banach,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub anisotropy: Anisotropy,
    pub codomain: Codomain,
    pub activation: Activation,
    #[serde(default = "unit")]
    pub c0: f64,
}

fn unit() -> f64 {
    1.0
}

impl Regime {
    pub fn new(anisotropy: Anisotropy, codomain: Codomain, activation: Activation) -> Self {
        Self {
            anisotropy,
            codomain,
            activation,
            c0: 1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match (self.anisotropy, self.codomain) {
            (Anisotropy::Unknown, Codomain::Banach) => "unknown-banach",
            (Anisotropy::Unknown, Codomain::Hilbert) => "unknown-hilbert",
            (Anisotropy::Known, Codomain::Banach) => "known-banach",
            (Anisotropy::Known, Codomain::Hilbert) => "known-hilbert",
        }
    }
}

/// Which log factor a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogFactor {
    /// `ln⁴m + ln(1/ε)`.
    UnknownRegime,
    /// `ln m + ln(1/ε)`.
    KnownRegime,
    /// `ln m`, for small-m experiments where `ln⁴m` swamps `m`.
    PlainLog,
}

impl LogFactor {
    pub fn for_regime(regime: &Regime) -> Self {
        match regime.anisotropy {
            Anisotropy::Unknown => LogFactor::UnknownRegime,
            Anisotropy::Known => LogFactor::KnownRegime,
        }
    }
}

fn check_m_eps(m: f64, eps: f64) -> Result<()> {
    if !(m >= 3.0) {
        return invalid(format!("m must be at least 3, got {m}"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("failure probability must lie in (0,1), got {eps}"));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("p must lie in (0,1), got {p}"));
    }
    Ok(())
}

/// The regime's `L(m, ε)` (natural logarithms).
pub fn log_factor_l(m: f64, eps: f64, regime: &Regime) -> Result<f64> {
    log_factor(m, eps, LogFactor::for_regime(regime))
}

pub fn log_factor(m: f64, eps: f64, kind: LogFactor) -> Result<f64> {
    check_m_eps(m, eps)?;
    let lm = m.ln();
    Ok(match kind {
        LogFactor::UnknownRegime => lm.powi(4) + (1.0 / eps).ln(),
        LogFactor::KnownRegime => lm + (1.0 / eps).ln(),
        LogFactor::PlainLog => lm,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sparsity {
    pub k: f64,
    /// `k < 1`: the bounds fall back to the trivial case.
    pub below_one: bool,
}

/// `k` from `m` and a given `L`: `√(m/(c₀L))`, `m/(c₀L)` or `m/(11L)`.
pub fn sparsity_from_l(m: f64, l: f64, regime: &Regime) -> Sparsity {
    let k = match (regime.anisotropy, regime.codomain) {
        (Anisotropy::Unknown, Codomain::Banach) => (m / (regime.c0 * l)).sqrt(),
        (Anisotropy::Unknown, Codomain::Hilbert) => m / (regime.c0 * l),
        (Anisotropy::Known, _) => m / (11.0 * l),
    };
    Sparsity { k, below_one: k < 1.0 }
}

pub fn sparsity_k(m: f64, eps: f64, regime: &Regime) -> Result<Sparsity> {
    Ok(sparsity_from_l(m, log_factor_l(m, eps, regime)?, regime))
}

/// `n = ⌈m/(c₀L)⌉`, the order of the hyperbolic cross.
pub fn hci_order(m: f64, l: f64, c0: f64) -> usize {
    (m / (c0 * l)).ceil().max(1.0) as usize
}

/// `λ = 1/(6√(m/L))`.
pub fn lambda_from_l(m: f64, l: f64) -> f64 {
    1.0 / (6.0 * (m / l).sqrt())
}

pub fn lambda_param(m: f64, eps: f64, regime: &Regime) -> Result<f64> {
    if regime.anisotropy == Anisotropy::Known {
        return Err(Error::NotApplicable(
            "the known-anisotropy estimator is least squares and has no λ".into(),
        ));
    }
    Ok(lambda_from_l(m, log_factor_l(m, eps, regime)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaValue {
    pub delta: f64,
    /// The formula fell below [`DELTA_FLOOR`].
    pub floored: bool,
}

/// Emulation accuracy δ for `k`, `N = |Λ|` and `p`.
pub fn emulation_delta(k: f64, n: usize, p: f64, regime: &Regime) -> Result<DeltaValue> {
    check_p(p)?;
    if !(k > 0.0) || n == 0 {
        return invalid("k must be positive and N at least 1");
    }
    let nn = n as f64;
    let e = 0.5 - 1.0 / p;
    let raw = match (regime.anisotropy, regime.codomain) {
        (Anisotropy::Unknown, Codomain::Banach) => {
            (2.0 / (3.0 * (3.0 + 4.0 * k) * nn.sqrt())).min(k.powf(e) / nn)
        }
        (Anisotropy::Unknown, Codomain::Hilbert) => {
            (2.0 / (3.0 * (3.0 + 4.0 * k.sqrt()) * nn.sqrt())).min(k.powf(e) / nn.sqrt())
        }
        (Anisotropy::Known, _) => (3f64.sqrt() / (2.0 * 5f64.sqrt() * k.sqrt())).min(k.powf(e)),
    };
    Ok(DeltaValue {
        delta: raw.max(DELTA_FLOOR),
        floored: raw < DELTA_FLOOR,
    })
}

/// `⌈c₀δ⁻²k(ln²(k/δ)ln²(en) + ln(2/ε))⌉`.
pub fn wrip_sample_complexity(k: f64, delta: f64, eps: f64, n: f64, c0: f64) -> Result<f64> {
    if !(k > 0.0 && n > 0.0 && c0 > 0.0) || !(delta > 0.0 && delta < 1.0) || !(eps > 0.0 && eps < 1.0) {
        return invalid("wRIP sample complexity needs positive k, n, c0 and δ, ε in (0,1)");
    }
    let v = c0 / (delta * delta) * k * ((k / delta).ln().powi(2) * (std::f64::consts::E * n).ln().powi(2) + (2.0 / eps).ln());
    Ok(v.ceil())
}

/// `1/((1−δ)ln(1−δ) + δ)`.
pub fn full_case_prefactor(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid("δ must lie in (0,1)");
    }
    Ok(1.0 / ((1.0 - delta) * (1.0 - delta).ln() + delta))
}

/// `⌈k ln(k/ε) / ((1−δ)ln(1−δ) + δ)⌉`.
pub fn full_case_sample_complexity(k: f64, delta: f64, eps: f64) -> Result<f64> {
    if !(k > 0.0 && eps > 0.0) {
        return invalid("k and ε must be positive");
    }
    Ok((full_case_prefactor(delta)? * k * (k / eps).ln()).ceil())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnspConstants {
    pub c1: f64,
    pub c2: f64,
    pub c1_prime: f64,
    pub c2_prime: f64,
}

pub fn rnsp_error_constants(rho: f64, gamma: f64) -> Result<RnspConstants> {
    if !(0.0..1.0).contains(&rho) || !(gamma > 0.0) {
        return invalid("need 0 ≤ ρ < 1 and γ > 0");
    }
    let d = 1.0 - rho;
    Ok(RnspConstants {
        c1: (1.0 + rho) / d,
        c2: 2.0 * gamma / d,
        c1_prime: (1.0 + rho).powi(2) / d,
        c2_prime: (3.0 + rho) * gamma / d,
    })
}

/// `(1+ρ)²/((3+ρ)γ)·k^{-1/2}`, the largest admissible λ.
pub fn lambda_upper_bound(rho: f64, gamma: f64, k: f64) -> f64 {
    (1.0 + rho).powi(2) / ((3.0 + rho) * gamma) / k.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxBound {
    pub value: f64,
    /// Exponent of `m/L`.
    pub exponent: f64,
    /// Power of `m` multiplying the sampling and optimization errors.
    pub theta: f64,
}

pub fn rate_exponent(p: f64, regime: &Regime) -> Result<f64> {
    check_p(p)?;
    Ok(match (regime.anisotropy, regime.codomain) {
        (Anisotropy::Unknown, Codomain::Banach) => 0.5 * (0.5 - 1.0 / p),
        (Anisotropy::Known, Codomain::Banach) => 1.0 - 1.0 / p,
        (_, Codomain::Hilbert) => 0.5 - 1.0 / p,
    })
}

pub fn noise_power(regime: &Regime) -> f64 {
    match (regime.anisotropy, regime.codomain) {
        (Anisotropy::Unknown, Codomain::Banach) => 0.25,
        (Anisotropy::Known, Codomain::Banach) => 0.5,
        (_, Codomain::Hilbert) => 0.0,
    }
}

/// `C·π_K·(m/L)^{exponent}` with the regime's exponent.
pub fn approx_error_bound(m: f64, eps: f64, p: f64, regime: &Regime, pi_k: f64, c: f64) -> Result<ApproxBound> {
    let exponent = rate_exponent(p, regime)?;
    let l = log_factor_l(m, eps, regime)?;
    Ok(ApproxBound {
        value: c * pi_k.max(1.0) * (m / l).powf(exponent),
        exponent,
        theta: noise_power(regime),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureShape {
    pub width: f64,
    pub depth: f64,
}

/// Width and depth bounds with all constants set to 1.
pub fn architecture_bounds(m: f64, p: f64, regime: &Regime) -> Result<ArchitectureShape> {
    if !(m >= 3.0) {
        return invalid("m must be at least 3");
    }
    check_p(p)?;
    let (l2, ln) = (m.log2(), m.ln());
    let relu = matches!(regime.activation, Activation::Relu);
    Ok(match regime.anisotropy {
        Anisotropy::Unknown => ArchitectureShape {
            width: m.powf(3.0 + l2),
            depth: if relu { ln * (ln * ln + ln / p + m) } else { l2 },
        },
        Anisotropy::Known => ArchitectureShape {
            width: m * m,
            depth: if relu { ln * (ln / p + m) } else { l2 },
        },
    })
}

/// `ρ*_j` with `(ρ+ρ⁻¹)/2 − 1 = ε τ_j / b_j` and `τ_j = 2^{-j}`, which
/// spends at most the budget `ε`.
pub fn surrogate_rho(b: &[f64], eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return invalid("ε must be positive");
    }
    b.iter()
        .enumerate()
        .map(|(i, &bj)| {
            if !(bj > 0.0 && bj.is_finite()) {
                return invalid(format!("surrogate scoring needs b_{} > 0", i + 1));
            }
            let t = 1.0 + eps * 0.5f64.powi(i as i32 + 1) / bj;
            Ok(t + (t * t - 1.0).sqrt())
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum SelectionStrategy {
    /// Largest coefficient norms of reference coefficients over a candidate set.
    Oracle(BlockVector),
    /// Smallest `Σ_j ν_j ln ρ*_j` over multi-indices in `b.len()` coordinates.
    Surrogate,
}

/// Anchored set of at most `n` indices chosen from the holomorphy
/// parameters (surrogate) or from reference coefficients (oracle).
///
/// The `n` best-scoring indices are closed under the anchored property; when
/// the closure overflows, fewer leading indices are used. If even the best
/// single index overflows, the set is grown greedily from `{0}` by the best
/// addable index.
pub fn known_set_selection(b: &[f64], eps: f64, n: usize, strategy: &SelectionStrategy) -> Result<IndexSet> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    match strategy {
        SelectionStrategy::Surrogate => {
            let rho = surrogate_rho(b, eps)?;
            let logs: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
            let score = |nu: &MultiIndex| nu.entries().iter().map(|&(j, v)| v as f64 * logs[j - 1]).sum::<f64>();
            let cands = surrogate_candidates(&logs, n);
            select(&cands, n, b.len(), &score, None)
        }
        SelectionStrategy::Oracle(coeffs) => {
            let norms = coeffs.block_norms();
            let members = coeffs.index_set().members();
            let lookup: std::collections::HashMap<&MultiIndex, f64> = members.iter().zip(norms.iter().copied()).collect();
            // larger norms first; indices outside the candidate set rank last
            let score = |nu: &MultiIndex| -lookup.get(nu).copied().unwrap_or(-1.0);
            let universe: HashSet<&MultiIndex> = members.iter().collect();
            let dims = coeffs.index_set().max_dim().max(1);
            select(members, n, dims, &score, Some(&universe))
        }
    }
}

/// Every index whose score is within that of the `n`-th unit-step best;
/// enough to contain the `n` smallest scores.
fn surrogate_candidates(logs: &[f64], n: usize) -> Vec<MultiIndex> {
    // a lower set of size n contains the n smallest scores, so grow one greedily
    let mut set = vec![MultiIndex::zero()];
    let mut seen: HashSet<MultiIndex> = set.iter().cloned().collect();
    let mut frontier: Vec<MultiIndex> = (1..=logs.len()).map(MultiIndex::unit).collect();
    let score = |nu: &MultiIndex| nu.entries().iter().map(|&(j, v)| v as f64 * logs[j - 1]).sum::<f64>();
    while set.len() < n && !frontier.is_empty() {
        frontier.sort_by(|a, b| score(a).total_cmp(&score(b)).then(a.cmp(b)));
        let best = frontier.remove(0);
        if !seen.insert(best.clone()) {
            continue;
        }
        for j in 1..=logs.len() {
            let next = best.add_unit(j);
            if !seen.contains(&next) {
                frontier.push(next);
            }
        }
        set.push(best);
    }
    set
}

fn select(
    candidates: &[MultiIndex],
    n: usize,
    dims: usize,
    score: &dyn Fn(&MultiIndex) -> f64,
    universe: Option<&HashSet<&MultiIndex>>,
) -> Result<IndexSet> {
    let mut ranked: Vec<MultiIndex> = candidates.to_vec();
    ranked.sort_by(|a, b| score(a).total_cmp(&score(b)).then(a.cmp(b)));
    ranked.dedup();
    for take in (1..=n.min(ranked.len())).rev() {
        let closed = anchored_closure(&IndexSet::new(ranked[..take].iter().cloned()));
        if closed.len() <= n {
            return Ok(fill_greedy(closed, n, dims, score, universe));
        }
    }
    Ok(fill_greedy(IndexSet::new([MultiIndex::zero()]), n, dims, score, universe))
}

fn fill_greedy(
    mut set: IndexSet,
    n: usize,
    dims: usize,
    score: &dyn Fn(&MultiIndex) -> f64,
    universe: Option<&HashSet<&MultiIndex>>,
) -> IndexSet {
    while set.len() < n {
        let mut next: Vec<MultiIndex> = addable(&set, dims)
            .into_iter()
            .filter(|nu| universe.is_none_or(|u| u.contains(nu)))
            .collect();
        if next.is_empty() {
            break;
        }
        next.sort_by(|a, b| score(a).total_cmp(&score(b)).then(a.cmp(b)));
        let mut members = set.members().to_vec();
        members.push(next.swap_remove(0));
        set = IndexSet::new(members);
    }
    set
}
