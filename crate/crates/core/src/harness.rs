//! Experiment runner: sampling, index-set choice, network construction,
//! matrix assembly, training of the head, error evaluation, rate fits and
//! persistence of results.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::banachspace::{BlockNorm, DiscreteSpace, WeightVector};
use crate::dnnbuilder::{
    build_poly_networks, stack_networks, Activation, Network, PolyBuildOptions, ValidationSpec, REPU_TOLERANCE,
};
use crate::error::{invalid, Error, Result};
use crate::models::{reference_coefficients, Model, ModelSpec};
use crate::multiindex::{hci_index_set_with_dim, hci_size_bound, IndexSet};
use crate::polybasis::{sample_points, BasisFamily, SamplePoint};
use crate::rng::derive_seed;
use crate::sensing::{assemble_emulated, synthesize_data, Provenance};
use crate::solvers::{eopt_certify, solve_leastsquares_raw, solve_srlasso_raw, SolverOptions};
use crate::theory::{
    self, emulation_delta, hci_order, known_set_selection, lambda_from_l, log_factor, sparsity_from_l, Anisotropy,
    Codomain, LogFactor, Regime, SelectionStrategy,
};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const RESULTS_SCHEMA_VERSION: u32 = 1;
pub const RESULTS_CSV: &str = "results.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Largest hyperbolic-cross size bound built without a dimension cap.
const HCI_GUARD: f64 = 2e5;
/// Largest stacked feature count evaluated as one network.
const MAX_FEATURES: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DeltaPolicy {
    /// δ from the regime's formula with the run's `k` and `N`.
    TheoremFormula,
    Fixed { delta: f64 },
    /// RePU networks are exact; δ is the rounding tolerance.
    ExactRepu,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Selection {
    Surrogate,
    /// Largest reference coefficients, computed by tensor quadrature.
    Oracle { quad_order: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSetSpec {
    /// Restrict the hyperbolic cross to the first `max_dim` coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    /// Fixed `S` for the known-anisotropy pipeline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_s: Option<IndexSet>,
    #[serde(default = "default_selection")]
    pub selection: Selection,
}

fn default_selection() -> Selection {
    Selection::Surrogate
}

impl Default for IndexSetSpec {
    fn default() -> Self {
        Self {
            max_dim: None,
            explicit_s: None,
            selection: Selection::Surrogate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub regime: Regime,
    pub model: ModelSpec,
    pub family: BasisFamily,
    pub m_schedule: Vec<usize>,
    /// `ε` in the log factor.
    #[serde(default = "half")]
    pub failure_prob: f64,
    /// `ε` of the holomorphy class, used for surrogate set selection.
    #[serde(default = "half")]
    pub holomorphy_eps: f64,
    pub p: f64,
    /// Replaces the regime's log factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_factor: Option<LogFactor>,
    #[serde(default)]
    pub index_set: IndexSetSpec,
    /// Per-sample noise level `η` in the block norm.
    #[serde(default)]
    pub noise: f64,
    /// Defaults to ℓ² (Hilbert) or ℓ¹ (Banach).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_norm: Option<BlockNorm>,
    pub delta_policy: DeltaPolicy,
    pub seed: u64,
    #[serde(default = "default_eval_points")]
    pub eval_points: usize,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub certify_eopt: bool,
    #[serde(default = "yes")]
    pub certify_networks: bool,
    #[serde(default)]
    pub validation: ValidationSpec,
    #[serde(default)]
    pub export_networks: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn half() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

fn default_eval_points() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Schema {
                expected: CONFIG_SCHEMA_VERSION,
                found: self.schema_version,
            });
        }
        if self.m_schedule.is_empty() || self.m_schedule.iter().any(|&m| m < 3) {
            return invalid("m schedule must be nonempty with every m ≥ 3");
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return invalid("p must lie in (0,1)");
        }
        if !(self.failure_prob > 0.0 && self.failure_prob < 1.0) {
            return invalid("failure probability must lie in (0,1)");
        }
        if !(self.noise >= 0.0) {
            return invalid("noise must be nonnegative");
        }
        if self.eval_points < 100 {
            return invalid("at least 100 evaluation points are needed");
        }
        if !(self.regime.c0 > 0.0) {
            return invalid("c0 must be positive");
        }
        match self.delta_policy {
            DeltaPolicy::ExactRepu if !matches!(self.regime.activation, Activation::Repu { .. }) => {
                return invalid("exact-repu policy needs a RePU activation");
            }
            DeltaPolicy::Fixed { delta } if !(delta > 0.0 && delta < 1.0) => {
                return invalid("fixed δ must lie in (0,1)");
            }
            _ => {}
        }
        if self.regime.codomain == Codomain::Hilbert && self.block_norm.is_some_and(|b| b != BlockNorm::L2) {
            return invalid("Hilbert codomain needs the l2 block norm");
        }
        Ok(())
    }

    pub fn block_norm(&self) -> BlockNorm {
        self.block_norm.unwrap_or(match self.regime.codomain {
            Codomain::Hilbert => BlockNorm::L2,
            Codomain::Banach => BlockNorm::L1,
        })
    }

    pub fn log_kind(&self) -> LogFactor {
        self.log_factor.unwrap_or_else(|| LogFactor::for_regime(&self.regime))
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Parse("config lacks schema_version".into()))?;
    if found != CONFIG_SCHEMA_VERSION as u64 {
        return Err(Error::Schema {
            expected: CONFIG_SCHEMA_VERSION,
            found: found as u32,
        });
    }
    let cfg: ExperimentConfig = serde_json::from_value(value)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), cfg)?;
    Ok(())
}

/// One CSV row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultRow {
    pub m: usize,
    pub error: f64,
    pub se: f64,
    pub e_samp: f64,
    pub e_disc: f64,
    pub eopt_proxy: Option<f64>,
    pub width: usize,
    pub depth: usize,
    pub size: usize,
    pub seconds: f64,
}

/// Wall-clock time is not part of the result.
impl PartialEq for ResultRow {
    fn eq(&self, o: &Self) -> bool {
        let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.m == o.m
            && same(self.error, o.error)
            && same(self.se, o.se)
            && same(self.e_samp, o.e_samp)
            && same(self.e_disc, o.e_disc)
            && self.eopt_proxy.map(f64::to_bits) == o.eopt_proxy.map(f64::to_bits)
            && (self.width, self.depth, self.size) == (o.width, o.depth, o.size)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowSeeds {
    pub points: u64,
    pub noise: u64,
    pub eval: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub method: String,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Everything derived for one `m`, kept in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowDetail {
    pub m: usize,
    pub seeds: RowSeeds,
    pub log_factor: LogFactor,
    pub log_override: bool,
    pub l: f64,
    /// `⌈m/(c₀L)⌉`.
    pub n: usize,
    pub theta_len: usize,
    pub index_set_size: usize,
    pub k: f64,
    pub k_below_one: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub delta: f64,
    pub delta_floored: bool,
    /// Accuracy the `‖A − A'‖₂ ≤ √N δ` check uses.
    pub delta_effective: f64,
    pub a_gap: f64,
    pub max_certificate_error: f64,
    pub sampled_validation: bool,
    pub pi_k: f64,
    pub solver: SolverSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Theory curve `C·π_K·(m/L)^{exponent}` with `C` fitted to the measured errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryOverlay {
    pub exponent: f64,
    pub noise_power: f64,
    pub fitted_c: f64,
    pub bounds: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub m: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
    pub details: Vec<RowDetail>,
    pub failures: Vec<Failure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlay: Option<TheoryOverlay>,
    #[serde(skip)]
    pub networks: Vec<(usize, Network)>,
}

/// Row timing aside, two records agree when rows, details and fits agree.
impl PartialEq for ResultRecord {
    fn eq(&self, o: &Self) -> bool {
        self.config_hash == o.config_hash
            && self.rows == o.rows
            && self.details == o.details
            && self.failures == o.failures
            && self.fit == o.fit
            && self.overlay == o.overlay
    }
}

struct RowOutcome {
    row: ResultRow,
    detail: RowDetail,
    network: Network,
}

/// Runs every `m` of the schedule; a failing `m` is recorded and skipped.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    cfg.validate()?;
    let model = Model::from_spec(&cfg.model, cfg.family, cfg.holomorphy_eps, cfg.p)?;
    let outcomes: Vec<(usize, Result<RowOutcome>)> =
        cfg.m_schedule.par_iter().map(|&m| (m, run_row(cfg, &model, m))).collect();

    let mut rows = Vec::new();
    let mut details = Vec::new();
    let mut failures = Vec::new();
    let mut networks = Vec::new();
    for (m, out) in outcomes {
        match out {
            Ok(o) => {
                rows.push(o.row);
                details.push(o.detail);
                if cfg.export_networks {
                    networks.push((m, o.network));
                }
            }
            Err(e) => failures.push(Failure { m, reason: e.to_string() }),
        }
    }
    let fit = if rows.len() >= 3 && rows.iter().all(|r| r.error > 0.0) {
        let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
        let es: Vec<f64> = rows.iter().map(|r| r.error).collect();
        fit_rate(&ms, &es).ok()
    } else {
        None
    };
    let overlay = theory_overlay(cfg, &rows, &details)?;
    Ok(ResultRecord {
        schema_version: RESULTS_SCHEMA_VERSION,
        config: cfg.clone(),
        config_hash: cfg.hash(),
        rows,
        details,
        failures,
        fit,
        overlay,
        networks,
    })
}

fn theory_overlay(cfg: &ExperimentConfig, rows: &[ResultRow], details: &[RowDetail]) -> Result<Option<TheoryOverlay>> {
    let exponent = theory::rate_exponent(cfg.p, &cfg.regime)?;
    let shapes: Vec<f64> = details.iter().map(|d| d.pi_k * (d.m as f64 / d.l).powf(exponent)).collect();
    let logs: Vec<f64> = rows
        .iter()
        .zip(&shapes)
        .filter(|(r, s)| r.error > 0.0 && **s > 0.0 && s.is_finite())
        .map(|(r, s)| (r.error / s).ln())
        .collect();
    if logs.is_empty() {
        return Ok(None);
    }
    let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    Ok(Some(TheoryOverlay {
        exponent,
        noise_power: theory::noise_power(&cfg.regime),
        fitted_c: c,
        bounds: details.iter().zip(&shapes).map(|(d, s)| (d.m, c * s)).collect(),
    }))
}

/// The index set, Θ, `n` and `k` for one `m`.
struct Plan {
    set: Arc<IndexSet>,
    theta: Vec<usize>,
    n: usize,
    l: f64,
    k: theory::Sparsity,
    lambda: Option<f64>,
}

fn plan(cfg: &ExperimentConfig, model: &Model, m: usize) -> Result<Plan> {
    let mf = m as f64;
    let l = log_factor(mf, cfg.failure_prob, cfg.log_kind())?;
    let n = hci_order(mf, l, cfg.regime.c0);
    let k = sparsity_from_l(mf, l, &cfg.regime);
    let (set, lambda) = match cfg.regime.anisotropy {
        Anisotropy::Unknown => {
            let dim = cfg.index_set.max_dim.map_or(n, |d| d.min(n));
            if dim == n && hci_size_bound(n) > HCI_GUARD {
                return Err(Error::CostGuard(format!(
                    "hyperbolic cross of order {n} without a dimension cap"
                )));
            }
            (hci_index_set_with_dim(n, dim)?, Some(lambda_from_l(mf, l)))
        }
        Anisotropy::Known => {
            let s = match (&cfg.index_set.explicit_s, &cfg.index_set.selection) {
                (Some(s), _) => s.clone(),
                (None, Selection::Surrogate) => {
                    known_set_selection(model.amplitudes(), cfg.holomorphy_eps, n, &SelectionStrategy::Surrogate)?
                }
                (None, Selection::Oracle { quad_order }) => {
                    let d = model.active_dims();
                    let universe = Arc::new(hci_index_set_with_dim(n, d)?);
                    let space = model.space(cfg.block_norm())?;
                    let f = |y: &SamplePoint| model.eval(y);
                    let coeffs = reference_coefficients(&f, &universe, d, *quad_order, cfg.family, &space)?;
                    known_set_selection(model.amplitudes(), cfg.holomorphy_eps, n, &SelectionStrategy::Oracle(coeffs))?
                }
            };
            (s, None)
        }
    };
    let theta_len = n.max(set.max_dim()).max(1);
    Ok(Plan {
        set: Arc::new(set),
        theta: (1..=theta_len).collect(),
        n,
        l,
        k,
        lambda,
    })
}

fn run_row(cfg: &ExperimentConfig, model: &Model, m: usize) -> Result<RowOutcome> {
    let start = Instant::now();
    let seeds = RowSeeds {
        points: derive_seed(cfg.seed, &[m as u64, 1]),
        noise: derive_seed(cfg.seed, &[m as u64, 2]),
        eval: derive_seed(cfg.seed, &[m as u64, 3]),
    };
    let plan = plan(cfg, model, m)?;
    let big_n = plan.set.len();
    if big_n > MAX_FEATURES {
        return Err(Error::CostGuard(format!("{big_n} basis functions")));
    }

    let (delta, floored, delta_eff) = match cfg.delta_policy {
        DeltaPolicy::TheoremFormula => {
            let d = emulation_delta(plan.k.k.max(f64::MIN_POSITIVE), big_n, cfg.p, &cfg.regime)?;
            (d.delta, d.floored, d.delta)
        }
        DeltaPolicy::Fixed { delta } => (delta, false, delta),
        DeltaPolicy::ExactRepu => (REPU_TOLERANCE, false, REPU_TOLERANCE),
    };
    let delta_eff = if matches!(cfg.regime.activation, Activation::Repu { .. }) {
        let sup = WeightVector::intrinsic(cfg.family, &plan.set).values().iter().fold(1.0f64, |a, &b| a.max(b));
        delta_eff.max(REPU_TOLERANCE * sup)
    } else {
        delta_eff
    };
    // ReLU and tanh builds need δ < 1; RePU builds ignore it
    let build_delta = delta.min(0.5);

    let opts = PolyBuildOptions {
        validation: cfg.validation.clone(),
        validate: cfg.certify_networks,
        pad_factors_to: None,
    };
    let built = build_poly_networks(cfg.family, &plan.set, build_delta, &plan.theta, cfg.regime.activation, &opts)?;
    let max_cert = built.iter().map(|(_, c)| c.grid_error).fold(0.0, f64::max);
    let sampled = built.iter().any(|(_, c)| c.grid.sampled);
    let nets: Vec<Network> = built.into_iter().map(|(n, _)| n).collect();

    let dim = plan.theta.len().max(model.active_dims());
    let points = sample_points(cfg.family, m, dim, seeds.points);
    let a = assemble_emulated(&nets, &points, &plan.set, cfg.family, delta_eff)?;
    let a_gap = match a.provenance {
        Provenance::NetworkEmulated { gap, .. } => gap,
        Provenance::ExactPolynomial => 0.0,
    };

    let space = model.space(cfg.block_norm())?;
    let f = |y: &SamplePoint| model.eval(y);
    let data = synthesize_data(&f, &points, cfg.noise, seeds.noise, &space)?;

    let u = WeightVector::intrinsic(cfg.family, &plan.set);
    let (z, report, method) = match plan.lambda {
        Some(lambda) => {
            let (z, r) = solve_srlasso_raw(&a.entries, &data.blocks, &u, lambda, &space, &cfg.solver, None)?;
            (z, r, "sr-lasso")
        }
        None => {
            let (z, r) = solve_leastsquares_raw(&a.entries, &data.blocks, &space, &cfg.solver)?;
            (z, r, "least-squares")
        }
    };
    let eopt = if cfg.certify_eopt {
        Some(eopt_certify(
            &a.entries,
            &data.blocks,
            &z,
            plan.lambda.unwrap_or(0.0),
            &u,
            &space,
            &cfg.solver.reference(),
        )?)
    } else {
        None
    };

    let network = stack_networks(&nets)?.attach_head(z)?;
    let stats = network.stats();
    let eval = sample_points(cfg.family, cfg.eval_points, dim, seeds.eval);
    let approx = |y: &SamplePoint| network.forward_point(&y.coords);
    let (error, se) = evaluate_l2_error(&f, &approx, &eval, &space)?;
    let e_disc = eval
        .par_iter()
        .map(|y| model.discretization_error(y, cfg.block_norm()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let pi_k = match model {
        Model::Diffusion { proj, .. } => {
            proj.pi_estimate(&DiscreteSpace::hilbert(proj.k_fine)?, derive_seed(cfg.seed, &[0, 4]))?
        }
        _ => 1.0,
    };

    let detail = RowDetail {
        m,
        seeds,
        log_factor: cfg.log_kind(),
        log_override: cfg.log_factor.is_some_and(|k| k != LogFactor::for_regime(&cfg.regime)),
        l: plan.l,
        n: plan.n,
        theta_len: plan.theta.len(),
        index_set_size: big_n,
        k: plan.k.k,
        k_below_one: plan.k.below_one,
        lambda: plan.lambda,
        delta,
        delta_floored: floored,
        delta_effective: delta_eff,
        a_gap,
        max_certificate_error: max_cert,
        sampled_validation: sampled,
        pi_k,
        solver: SolverSummary {
            method: method.into(),
            iterations: report.iterations,
            converged: report.converged,
            objective: report.final_objective,
            warnings: report.warnings.clone(),
        },
        failure: None,
    };
    let row = ResultRow {
        m,
        error,
        se,
        e_samp: data.e_samp,
        e_disc,
        eopt_proxy: eopt,
        width: stats.width,
        depth: stats.depth,
        size: stats.size,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(RowOutcome { row, detail, network })
}

/// Monte Carlo `‖f − g‖_{L²_ϱ(V)}` over the points `eval`, with the
/// delta-method standard error of the square root of the mean.
pub fn evaluate_l2_error(
    f_true: &(dyn Fn(&SamplePoint) -> Result<Vec<f64>> + Sync),
    f_approx: &(dyn Fn(&SamplePoint) -> Result<Vec<f64>> + Sync),
    eval: &[SamplePoint],
    space: &DiscreteSpace,
) -> Result<(f64, f64)> {
    if eval.is_empty() {
        return invalid("no evaluation points");
    }
    let sq: Vec<f64> = eval
        .par_iter()
        .map(|y| {
            let (a, b) = (f_true(y)?, f_approx(y)?);
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: a.len(),
                    found: b.len(),
                });
            }
            let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            Ok(space.block_norm(&diff)?.powi(2))
        })
        .collect::<Result<_>>()?;
    let n = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = if sq.len() > 1 {
        sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let est = mean.sqrt();
    let se = if est > 0.0 { (var / n).sqrt() / (2.0 * est) } else { 0.0 };
    Ok((est, se))
}

/// Least-squares line through `(ln m, ln error)`.
pub fn fit_rate(ms: &[f64], errors: &[f64]) -> Result<RateFit> {
    if ms.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            expected: ms.len(),
            found: errors.len(),
        });
    }
    if ms.len() < 3 {
        return invalid("a rate fit needs at least 3 points");
    }
    if ms.iter().chain(errors).any(|v| !(*v > 0.0)) {
        return invalid("rate fits need positive m and errors");
    }
    let x: Vec<f64> = ms.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return invalid("all m are equal");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { slope, intercept, r2 })
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    config_hash: &'a str,
    seed: u64,
    files: Vec<String>,
    config: &'a ExperimentConfig,
    details: &'a [RowDetail],
    failures: &'a [Failure],
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<&'a RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    overlay: Option<&'a TheoryOverlay>,
}

/// Writes `results.csv`, the manifest and, when requested, one network per `m`.
/// Returns the files written, manifest last.
pub fn save_results(record: &ResultRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let csv_path = dir.join(RESULTS_CSV);
    write_results_csv(&record.rows, File::create(&csv_path)?)?;
    files.push(RESULTS_CSV.to_string());
    for (m, net) in &record.networks {
        let name = format!("network_m{m}.json");
        export_network(net, &dir.join(&name))?;
        files.push(name);
    }
    let manifest = Manifest {
        schema_version: RESULTS_SCHEMA_VERSION,
        config_hash: &record.config_hash,
        seed: record.config.seed,
        files: files.clone(),
        config: &record.config,
        details: &record.details,
        failures: &record.failures,
        fit: record.fit.as_ref(),
        overlay: record.overlay.as_ref(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join(MANIFEST_JSON))?), &manifest)?;
    let mut out: Vec<PathBuf> = files.iter().map(|f| dir.join(f)).collect();
    out.push(dir.join(MANIFEST_JSON));
    Ok(out)
}

pub fn write_results_csv<W: std::io::Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Reads the manifest's schema version, failing on a mismatch.
pub fn check_manifest(path: &Path) -> Result<serde_json::Value> {
    let v: serde_json::Value = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let found = v.get("schema_version").and_then(|x| x.as_u64()).unwrap_or(0) as u32;
    if found != RESULTS_SCHEMA_VERSION {
        return Err(Error::Schema {
            expected: RESULTS_SCHEMA_VERSION,
            found,
        });
    }
    Ok(v)
}

pub fn export_network(net: &Network, path: &Path) -> Result<()> {
    net.write_json(BufWriter::new(File::create(path)?))
}

pub fn import_network(path: &Path) -> Result<Network> {
    Network::read_json(BufReader::new(File::open(path)?))
}

/// Caps the global thread pool at `HOLOBENCH_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HOLOBENCH_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("HOLOBENCH_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

/// Exact measurement matrix for the first `m` of a config: used by the RIP diagnostics.
pub fn diagnostic_matrix(cfg: &ExperimentConfig, m: usize) -> Result<(DMatrix<f64>, Arc<IndexSet>, f64)> {
    cfg.validate()?;
    let model = Model::from_spec(&cfg.model, cfg.family, cfg.holomorphy_eps, cfg.p)?;
    let plan = plan(cfg, &model, m)?;
    let dim = plan.theta.len().max(model.active_dims());
    let points = sample_points(cfg.family, m, dim, derive_seed(cfg.seed, &[m as u64, 1]));
    let a = crate::sensing::assemble_exact(&points, &plan.set, cfg.family)?;
    Ok((a.entries, plan.set, plan.k.k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_rate_examples() {
        let ms = [10.0, 20.0, 40.0, 80.0];
        let f = fit_rate(&ms, &ms.map(|m| 1.0 / m)).unwrap();
        assert!((f.slope + 1.0).abs() <= 1e-12);
        assert_eq!(fit_rate(&ms, &[0.3; 4]).unwrap().slope, 0.0);
        assert!(fit_rate(&ms, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(fit_rate(&ms[..2], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn l2_error_of_a_constant_offset() {
        let pts = sample_points(BasisFamily::Legendre, 200, 2, 3);
        let space = DiscreteSpace::hilbert(2).unwrap();
        let f = |y: &SamplePoint| Ok(vec![y.coords[0], 1.0]);
        let g = |y: &SamplePoint| Ok(vec![y.coords[0] + 3.0, 5.0]);
        let (e, se) = evaluate_l2_error(&f, &f, &pts, &space).unwrap();
        assert_eq!((e, se), (0.0, 0.0));
        let (e, se) = evaluate_l2_error(&f, &g, &pts, &space).unwrap();
        assert!((e - 5.0).abs() <= 1e-12 && se <= 1e-12);
    }
}
