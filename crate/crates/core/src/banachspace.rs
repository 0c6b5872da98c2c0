//! The discretized codomain `V_K`, block vectors over an index set, weighted
//! `ℓ^p_w(Λ;V)` quasinorms and best weighted k-term selection.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::multiindex::IndexSet;
use crate::polybasis::{intrinsic_weight, BasisFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockNorm {
    L1,
    L2,
    Linf,
}

impl std::str::FromStr for BlockNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Self::L1),
            "l2" => Ok(Self::L2),
            "linf" => Ok(Self::Linf),
            other => Err(Error::Parse(format!("unknown block norm {other:?}"))),
        }
    }
}

/// `V_K` with one of the supported block norms. With a Gram matrix `G`
/// the ℓ² norm becomes `√(vᵀGv)`.
///
/// A cell weight `h` turns the ℓ¹ and ℓ² norms into lumped quadratures of
/// function-space norms on a uniform grid, `(h Σ|v_i|^q)^{1/q}`; ℓ^∞ ignores it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct DiscreteSpace {
    k: usize,
    norm: BlockNorm,
    gram: Option<Gram>,
    cell: f64,
}

#[derive(Clone, Debug)]
struct Gram {
    matrix: DMatrix<f64>,
    /// Lower Cholesky factor `L` with `G = L Lᵀ`.
    chol_l: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    k: usize,
    norm: BlockNorm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gram: Option<Vec<Vec<f64>>>,
    #[serde(default = "unit_cell", skip_serializing_if = "is_unit_cell")]
    cell: f64,
}

fn unit_cell() -> f64 {
    1.0
}

fn is_unit_cell(h: &f64) -> bool {
    *h == 1.0
}

impl TryFrom<SpaceRepr> for DiscreteSpace {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        let space = match r.gram {
            None => DiscreteSpace::new(r.k, r.norm)?,
            Some(rows) => {
                let k = rows.len();
                if rows.iter().any(|row| row.len() != k) {
                    return Err(Error::Shape("gram matrix must be square".into()));
                }
                let g = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
                DiscreteSpace::with_gram(g)?
            }
        };
        space.with_cell(r.cell)
    }
}

impl From<DiscreteSpace> for SpaceRepr {
    fn from(s: DiscreteSpace) -> Self {
        SpaceRepr {
            k: s.k,
            norm: s.norm,
            gram: s.gram.map(|g| {
                (0..s.k).map(|i| g.matrix.row(i).iter().copied().collect()).collect()
            }),
            cell: s.cell,
        }
    }
}

impl DiscreteSpace {
    pub fn new(k: usize, norm: BlockNorm) -> Result<Self> {
        if k == 0 {
            return invalid("V_K must have positive dimension");
        }
        Ok(Self {
            k,
            norm,
            gram: None,
            cell: 1.0,
        })
    }

    pub fn hilbert(k: usize) -> Result<Self> {
        Self::new(k, BlockNorm::L2)
    }

    /// ℓ² in the inner product of a symmetric positive-definite `gram`.
    pub fn with_gram(gram: DMatrix<f64>) -> Result<Self> {
        let k = gram.nrows();
        if k == 0 || gram.ncols() != k {
            return Err(Error::Shape("gram matrix must be square and nonempty".into()));
        }
        let asym = (&gram - gram.transpose()).amax();
        if asym > 1e-12 * gram.amax().max(1.0) {
            return invalid("gram matrix is not symmetric");
        }
        let chol = Cholesky::new(gram.clone()).ok_or_else(|| Error::InvalidArgument("gram matrix is not positive definite".into()))?;
        Ok(Self {
            k,
            norm: BlockNorm::L2,
            gram: Some(Gram {
                matrix: gram,
                chol_l: chol.l(),
            }),
            cell: 1.0,
        })
    }

    pub fn with_cell(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return invalid(format!("cell weight must be positive, got {h}"));
        }
        self.cell = h;
        Ok(self)
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    /// Factor `h^{1/q}` between the configured norm and the plain one.
    pub fn scale(&self) -> f64 {
        match self.norm {
            BlockNorm::L1 => self.cell,
            BlockNorm::L2 => self.cell.sqrt(),
            BlockNorm::Linf => 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn norm_kind(&self) -> BlockNorm {
        self.norm
    }

    pub fn is_hilbert(&self) -> bool {
        self.norm == BlockNorm::L2
    }

    pub fn gram(&self) -> Option<&DMatrix<f64>> {
        self.gram.as_ref().map(|g| &g.matrix)
    }

    /// Lower Cholesky factor of the Gram matrix, if any.
    pub fn gram_factor(&self) -> Option<&DMatrix<f64>> {
        self.gram.as_ref().map(|g| &g.chol_l)
    }

    pub fn block_norm(&self, block: &[f64]) -> Result<f64> {
        if block.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: block.len(),
            });
        }
        Ok(self.norm_unchecked(block.iter().copied()))
    }

    pub(crate) fn norm_unchecked(&self, block: impl Iterator<Item = f64> + Clone) -> f64 {
        let plain = match (&self.gram, self.norm) {
            (Some(g), _) => {
                let v = DVector::from_iterator(self.k, block);
                let w = g.chol_l.tr_mul(&v);
                w.norm()
            }
            (None, BlockNorm::L2) => block.map(|x| x * x).sum::<f64>().sqrt(),
            (None, BlockNorm::L1) => block.map(f64::abs).sum(),
            (None, BlockNorm::Linf) => block.map(f64::abs).fold(0.0, f64::max),
        };
        plain * self.scale()
    }

    /// V-norm of every row of an `n×K` coefficient matrix.
    pub fn row_norms(&self, rows: &DMatrix<f64>) -> Vec<f64> {
        assert_eq!(rows.ncols(), self.k, "row length must equal K");
        (0..rows.nrows())
            .map(|i| self.norm_unchecked(rows.row(i).iter().copied()))
            .collect()
    }

    /// `‖X‖_{2;V} = (Σ_i ‖x_i‖_V²)^{1/2}` over the rows of `rows`.
    pub fn l2_of_blocks(&self, rows: &DMatrix<f64>) -> f64 {
        self.row_norms(rows).iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Positive weights aligned with an index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return invalid("weights must be positive and finite");
        }
        Ok(Self { values })
    }

    pub fn ones(n: usize) -> Self {
        Self { values: vec![1.0; n] }
    }

    /// Intrinsic weights `u_ν = ‖Ψ_ν‖_∞` on `set`.
    pub fn intrinsic(family: BasisFamily, set: &IndexSet) -> Self {
        Self {
            values: set.iter().map(|nu| intrinsic_weight(family, nu)).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Element of `V_K^N`: one length-K block per member of the index set.
#[derive(Clone, Debug)]
pub struct BlockVector {
    space: DiscreteSpace,
    index_set: Arc<IndexSet>,
    coeffs: DMatrix<f64>,
}

impl BlockVector {
    /// `coeffs` is `N×K`, row `j` holding the block of the `j`-th index.
    pub fn new(space: DiscreteSpace, index_set: Arc<IndexSet>, coeffs: DMatrix<f64>) -> Result<Self> {
        if coeffs.nrows() != index_set.len() || coeffs.ncols() != space.dim() {
            return Err(Error::Shape(format!(
                "coefficients are {}x{}, expected {}x{}",
                coeffs.nrows(),
                coeffs.ncols(),
                index_set.len(),
                space.dim()
            )));
        }
        Ok(Self {
            space,
            index_set,
            coeffs,
        })
    }

    pub fn zeros(space: DiscreteSpace, index_set: Arc<IndexSet>) -> Self {
        let coeffs = DMatrix::zeros(index_set.len(), space.dim());
        Self {
            space,
            index_set,
            coeffs,
        }
    }

    pub fn space(&self) -> &DiscreteSpace {
        &self.space
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index_set
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> DMatrix<f64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.nrows() == 0
    }

    pub fn block(&self, j: usize) -> Vec<f64> {
        self.coeffs.row(j).iter().copied().collect()
    }

    pub fn block_norms(&self) -> Vec<f64> {
        self.space.row_norms(&self.coeffs)
    }

    /// Copy keeping only the blocks at `positions`.
    pub fn restricted(&self, positions: &[usize]) -> Self {
        let mut out = Self::zeros(self.space.clone(), self.index_set.clone());
        for &j in positions {
            out.coeffs.row_mut(j).copy_from(&self.coeffs.row(j));
        }
        out
    }

    /// CSV with one row per block and K columns, in index-set order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for i in 0..self.coeffs.nrows() {
            wr.write_record(self.coeffs.row(i).iter().map(|c| format!("{c:?}")))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(space: DiscreteSpace, index_set: Arc<IndexSet>, r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut vals = Vec::new();
        let mut rows = 0;
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    found: rec.len(),
                });
            }
            for s in rec.iter() {
                vals.push(s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
            }
            rows += 1;
        }
        let coeffs = DMatrix::from_row_slice(rows, space.dim(), &vals);
        Self::new(space, index_set, coeffs)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 2.0) {
        return invalid(format!("p must lie in (0,2], got {p}"));
    }
    Ok(())
}

/// `(Σ_ν w_ν^{2-p} ‖v_ν‖_V^p)^{1/p}`.
pub fn weighted_lpw_norm(v: &BlockVector, p: f64, w: &WeightVector) -> Result<f64> {
    check_p(p)?;
    if w.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            found: w.len(),
        });
    }
    let s: f64 = v
        .block_norms()
        .iter()
        .zip(w.values())
        .map(|(&n, &wi)| wi.powf(2.0 - p) * n.powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}

/// `|S|_w = Σ_{ν∈S} w_ν²` where `w` is aligned with `universe`.
pub fn weighted_cardinality(set: &IndexSet, universe: &IndexSet, w: &WeightVector) -> Result<f64> {
    if w.len() != universe.len() {
        return Err(Error::DimensionMismatch {
            expected: universe.len(),
            found: w.len(),
        });
    }
    set.iter()
        .map(|nu| {
            universe
                .position(nu)
                .map(|i| w.values()[i].powi(2))
                .ok_or_else(|| Error::InvalidArgument(format!("no weight for index {nu:?}")))
        })
        .sum()
}

pub const EXACT_KTERM_LIMIT: usize = 20;

#[derive(Clone, Debug)]
pub struct BestTerm {
    pub set: IndexSet,
    /// Positions of the selected blocks within the input index set.
    pub positions: Vec<usize>,
    /// `σ_k(v)_{p,w;V}`.
    pub residual: f64,
    /// True when the selection came from the greedy heuristic.
    pub greedy: bool,
}

/// Best weighted `(k,w)`-term approximation of `v` in `ℓ^p_w(Λ;V)`.
///
/// Exact for `|Λ| ≤ 20` by subset enumeration; above that a greedy
/// knapsack heuristic is used and flagged.
pub fn best_kterm(v: &BlockVector, k: f64, w: &WeightVector, p: f64) -> Result<BestTerm> {
    check_p(p)?;
    if k.is_nan() || k < 0.0 {
        return invalid("k must be nonnegative");
    }
    let n = v.len();
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: w.len(),
        });
    }
    let norms = v.block_norms();
    let ws = w.values();
    // contribution of each block to ‖·‖^p and its cost |{ν}|_w
    let gain: Vec<f64> = (0..n).map(|i| ws[i].powf(2.0 - p) * norms[i].powf(p)).collect();
    let cost: Vec<f64> = ws.iter().map(|x| x * x).collect();

    let (positions, greedy) = if n <= EXACT_KTERM_LIMIT {
        (exact_knapsack(&gain, &cost, k), false)
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        let score = |i: usize| ws[i].powf((2.0 - p) / p - 2.0) * norms[i];
        order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
        let mut used = 0.0;
        let mut picked = Vec::new();
        for i in order {
            if used + cost[i] > k {
                break;
            }
            used += cost[i];
            picked.push(i);
        }
        picked.sort_unstable();
        (picked, true)
    };
    // sum the tail directly rather than total - kept, which cancels
    let mut in_set = vec![false; n];
    positions.iter().for_each(|&i| in_set[i] = true);
    let tail: f64 = (0..n).filter(|&i| !in_set[i]).map(|i| gain[i]).sum();
    let members = v.index_set().members();
    Ok(BestTerm {
        set: IndexSet::new(positions.iter().map(|&i| members[i].clone())),
        positions,
        residual: tail.powf(1.0 / p),
        greedy,
    })
}

fn exact_knapsack(gain: &[f64], cost: &[f64], k: f64) -> Vec<usize> {
    let n = gain.len();
    let size = 1usize << n;
    let mut g = vec![0.0f64; size];
    let mut c = vec![0.0f64; size];
    let mut best_mask = 0usize;
    let mut best = 0.0f64;
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let prev = mask & (mask - 1);
        g[mask] = g[prev] + gain[low];
        c[mask] = c[prev] + cost[low];
        if c[mask] <= k && g[mask] > best {
            best = g[mask];
            best_mask = mask;
        }
    }
    (0..n).filter(|&i| best_mask >> i & 1 == 1).collect()
}

/// `b̃_i = sup_{j≥i} |b_j|`.
pub fn monotone_majorant(b: &[f64]) -> Result<Vec<f64>> {
    if b.is_empty() {
        return invalid("empty sequence");
    }
    let mut out = vec![0.0; b.len()];
    let mut run = 0.0f64;
    for i in (0..b.len()).rev() {
        run = run.max(b[i].abs());
        out[i] = run;
    }
    Ok(out)
}

/// `N×K` helper: build a block vector over `set` from closure values.
pub fn block_vector_from_fn(
    space: DiscreteSpace,
    set: Arc<IndexSet>,
    mut f: impl FnMut(usize, usize) -> f64,
) -> BlockVector {
    let coeffs = DMatrix::from_fn(set.len(), space.dim(), |i, j| f(i, j));
    BlockVector {
        space,
        index_set: set,
        coeffs,
    }
}
