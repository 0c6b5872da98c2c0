//! Feed-forward networks that emulate the orthonormal polynomials.
//!
//! A [`Network`] is a chain of affine layers with the activation applied
//! between consecutive layers (never after the last one). Depth counts the
//! hidden layers, width is the largest layer output including the output
//! layer, and size counts nonzero weights and biases.
//!
//! Networks are assembled from small blocks with [`Network::then`]
//! (composition, the outer affine maps are merged), [`Network::parallel`]
//! (block-diagonal, equal depth) and [`Network::pad_to_depth`].

mod poly;
mod product;
pub mod sparse;

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banachspace::BlockVector;
use crate::error::{invalid, Error, Result};

pub use poly::{
    build_poly_network, build_poly_networks, stack_networks, EmulationCertificate, GridSpec, PolyBuildOptions,
    ValidationSpec, REPU_TOLERANCE,
};
pub use product::{
    build_product_approx, build_product_repu, mult2_relu, mult2_repu, mult2_tanh, relu_square, ProductInfo,
};
pub use sparse::SparseMatrix;

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

/// Scale of the tanh identity block `x ≈ tanh(αx)/α`. A power of two so the
/// rescaling is exact; the cubic error term `α²x³/3` is below `1e-20` for
/// `|x| ≤ 10³`.
pub const TANH_IDENTITY_ALPHA: f64 = 1.0 / (1u64 << 36) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Repu { power: u32 },
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Repu { power } => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.powi(power as i32)
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    pub fn name(self) -> String {
        match self {
            Activation::Relu => "relu".into(),
            Activation::Repu { power } => format!("repu{power}"),
            Activation::Tanh => "tanh".into(),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;
    /// `relu`, `tanh`, `repu` (power 2) or `repuL` for power `L`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "repu" => Ok(Activation::Repu { power: 2 }),
            _ => {
                let power = s
                    .strip_prefix("repu")
                    .and_then(|p| p.parse::<u32>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown activation {s:?}")))?;
                if power < 2 {
                    return invalid("RePU power must be at least 2");
                }
                Ok(Activation::Repu { power })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: SparseMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(weights: SparseMatrix, bias: Vec<f64>) -> Self {
        assert_eq!(weights.rows, bias.len(), "bias length must match output size");
        Self { weights, bias }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows
    }

    /// `other ∘ self` as a single affine map.
    fn followed_by(&self, other: &Layer) -> Layer {
        let w = other.weights.mul(&self.weights);
        let shift = other.weights.mul_vec(&self.bias);
        let bias = shift.iter().zip(&other.bias).map(|(a, b)| a + b).collect();
        Layer::new(w, bias)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub activation: Activation,
    pub layers: Vec<Layer>,
    /// Input coordinates (1-based) read from a full parameter point.
    pub theta: Vec<usize>,
    /// Output head `Z` (`N×K`); the network then returns `Zᵀ Φ(y)`.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "head_serde")]
    pub head: Option<DMatrix<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureStats {
    pub width: usize,
    pub depth: usize,
    pub size: usize,
}

/// `(y_j)_{j∈Θ}` in Θ order.
pub fn restrict(theta: &[usize], y: &[f64]) -> Result<Vec<f64>> {
    theta
        .iter()
        .map(|&j| {
            if j == 0 || j > y.len() {
                Err(Error::DimensionMismatch {
                    expected: j,
                    found: y.len(),
                })
            } else {
                Ok(y[j - 1])
            }
        })
        .collect()
}

impl Network {
    /// Depth-0 network computing `W x + b`.
    pub fn affine(activation: Activation, weights: SparseMatrix, bias: Vec<f64>) -> Self {
        Self {
            activation,
            layers: vec![Layer::new(weights, bias)],
            theta: Vec::new(),
            head: None,
        }
    }

    pub fn identity(activation: Activation, dim: usize) -> Self {
        Self::affine(activation, SparseMatrix::identity(dim), vec![0.0; dim])
    }

    pub fn from_layers(activation: Activation, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return invalid("a network needs at least one layer");
        }
        for w in layers.windows(2) {
            if w[0].output_dim() != w[1].input_dim() {
                return Err(Error::DimensionMismatch {
                    expected: w[0].output_dim(),
                    found: w[1].input_dim(),
                });
            }
        }
        Ok(Self {
            activation,
            layers,
            theta: Vec::new(),
            head: None,
        })
    }

    pub fn with_theta(mut self, theta: Vec<usize>) -> Self {
        self.theta = theta;
        self
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    /// Output dimension before the head.
    pub fn feature_dim(&self) -> usize {
        self.layers.last().expect("nonempty").output_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.head.as_ref().map_or(self.feature_dim(), |z| z.ncols())
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// `then ∘ self`; the last affine map of `self` is merged into the first of `then`.
    pub fn then(&self, then: &Network) -> Result<Network> {
        if self.activation != then.activation {
            return invalid("cannot compose networks with different activations");
        }
        if self.feature_dim() != then.input_dim() || self.head.is_some() {
            return Err(Error::DimensionMismatch {
                expected: then.input_dim(),
                found: self.feature_dim(),
            });
        }
        let n = self.layers.len();
        let mut layers = self.layers[..n - 1].to_vec();
        layers.push(self.layers[n - 1].followed_by(&then.layers[0]));
        layers.extend_from_slice(&then.layers[1..]);
        Ok(Network {
            activation: self.activation,
            layers,
            theta: self.theta.clone(),
            head: then.head.clone(),
        })
    }

    /// Block-diagonal combination on concatenated inputs; depths must agree.
    pub fn parallel(nets: &[&Network]) -> Result<Network> {
        let first = nets.first().ok_or_else(|| Error::InvalidArgument("nothing to combine".into()))?;
        if nets.iter().any(|n| n.activation != first.activation) {
            return invalid("mixed activations");
        }
        if nets.iter().any(|n| n.depth() != first.depth()) {
            return invalid("parallel combination needs equal depths");
        }
        let layers = (0..first.layers.len())
            .map(|l| {
                let ws: Vec<&SparseMatrix> = nets.iter().map(|n| &n.layers[l].weights).collect();
                let bias = nets.iter().flat_map(|n| n.layers[l].bias.iter().copied()).collect();
                Layer::new(SparseMatrix::block_diag(&ws), bias)
            })
            .collect();
        Ok(Network {
            activation: first.activation,
            layers,
            theta: Vec::new(),
            head: None,
        })
    }

    /// Identity map on `dim` values realized with `depth` hidden layers.
    pub fn identity_block(activation: Activation, dim: usize, depth: usize) -> Network {
        let one = match activation {
            Activation::Relu => {
                // x = σ(x) − σ(−x)
                let w0 = SparseMatrix::from_triplets(2, 1, [(0, 0, 1.0), (1, 0, -1.0)]);
                let w1 = SparseMatrix::from_triplets(1, 2, [(0, 0, 1.0), (0, 1, -1.0)]);
                Network::from_layers(activation, vec![Layer::new(w0, vec![0.0; 2]), Layer::new(w1, vec![0.0])])
                    .expect("chained")
            }
            Activation::Tanh => {
                let a = TANH_IDENTITY_ALPHA;
                let w0 = SparseMatrix::from_triplets(1, 1, [(0, 0, a)]);
                let w1 = SparseMatrix::from_triplets(1, 1, [(0, 0, 1.0 / a)]);
                Network::from_layers(activation, vec![Layer::new(w0, vec![0.0]), Layer::new(w1, vec![0.0])])
                    .expect("chained")
            }
            Activation::Repu { power } => product::repu_monomial_block(power, 1),
        };
        let mut net = Network::identity(activation, dim);
        if depth == 0 {
            return net;
        }
        let copies: Vec<&Network> = std::iter::repeat(&one).take(dim).collect();
        let layer = Network::parallel(&copies).expect("equal depth copies");
        for _ in 0..depth {
            net = net.then(&layer).expect("dims chain");
        }
        net
    }

    /// Appends identity layers until the depth equals `depth`.
    pub fn pad_to_depth(&self, depth: usize) -> Result<Network> {
        let d = self.depth();
        if depth < d {
            return invalid(format!("cannot reduce depth {d} to {depth}"));
        }
        if depth == d {
            return Ok(self.clone());
        }
        let pad = Network::identity_block(self.activation, self.feature_dim(), depth - d);
        let mut out = self.then(&pad)?;
        out.theta = self.theta.clone();
        Ok(out)
    }

    /// Sets the head `Z` (`N×K`): the network then computes `Zᵀ Φ(y)`.
    pub fn attach_head(&self, z: DMatrix<f64>) -> Result<Network> {
        if z.nrows() != self.feature_dim() {
            return Err(Error::Shape(format!(
                "head has {} rows but the network has {} outputs",
                z.nrows(),
                self.feature_dim()
            )));
        }
        let mut out = self.clone();
        out.head = Some(z);
        Ok(out)
    }

    /// Head taken from solver coefficients: block `j` becomes row `j` of `Z`.
    pub fn attach_block_vector(&self, z: &BlockVector) -> Result<Network> {
        self.attach_head(z.coeffs().clone())
    }

    /// Features `Φ(x)` for an input already restricted to Θ.
    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_dim(), "input dimension");
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            layer.weights.affine_into(&cur, &layer.bias, &mut next);
            if l < last {
                for v in next.iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Forward pass on an input already restricted to Θ, head included.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let phi = self.features(x);
        match &self.head {
            None => phi,
            Some(z) => (0..z.ncols())
                .map(|k| z.column(k).iter().zip(&phi).map(|(a, b)| a * b).sum())
                .collect(),
        }
    }

    /// Forward pass on a full parameter point, applying `T_Θ` first.
    pub fn forward_point(&self, y: &[f64]) -> Result<Vec<f64>> {
        let x = restrict(&self.theta, y)?;
        Ok(self.forward(&x))
    }

    /// Forward passes for many full points in parallel; row `i` is point `i`.
    pub fn forward_points(&self, ys: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let rows: Vec<Vec<f64>> = ys.par_iter().map(|y| self.forward_point(y)).collect::<Result<_>>()?;
        let k = self.output_dim();
        Ok(DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]))
    }

    /// Width, depth and number of nonzero parameters. With a head, the
    /// output layer is `Zᵀ` composed with the last affine map.
    pub fn stats(&self) -> ArchitectureStats {
        let last = self.layers.len() - 1;
        let mut size = 0;
        let mut width = 0;
        for layer in &self.layers[..last] {
            size += layer.weights.nnz() + layer.bias.iter().filter(|&&b| b != 0.0).count();
            width = width.max(layer.output_dim());
        }
        let out = &self.layers[last];
        match &self.head {
            None => {
                size += out.weights.nnz() + out.bias.iter().filter(|&&b| b != 0.0).count();
                width = width.max(out.output_dim());
            }
            Some(z) => {
                let zt = SparseMatrix::from_triplets(
                    z.ncols(),
                    z.nrows(),
                    (0..z.nrows()).flat_map(|i| (0..z.ncols()).map(move |k| (k, i, z[(i, k)]))),
                );
                let folded = out.followed_by(&Layer::new(zt, vec![0.0; z.ncols()]));
                size += folded.weights.nnz() + folded.bias.iter().filter(|&&b| b != 0.0).count();
                width = width.max(folded.output_dim());
            }
        }
        ArchitectureStats {
            width,
            depth: self.depth(),
            size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return invalid("a network needs at least one layer");
        }
        for l in &self.layers {
            l.weights.validate()?;
            if l.bias.len() != l.weights.rows {
                return Err(Error::Shape("bias length differs from layer output".into()));
            }
        }
        for w in self.layers.windows(2) {
            if w[0].output_dim() != w[1].input_dim() {
                return Err(Error::DimensionMismatch {
                    expected: w[0].output_dim(),
                    found: w[1].input_dim(),
                });
            }
        }
        if !self.theta.is_empty() && self.theta.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: self.theta.len(),
            });
        }
        if let Some(z) = &self.head {
            if z.nrows() != self.feature_dim() {
                return Err(Error::Shape("head rows differ from network outputs".into()));
            }
        }
        Ok(())
    }

    /// Writes the portable JSON form.
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        let doc = NetworkDoc {
            schema_version: NETWORK_SCHEMA_VERSION,
            network: self.clone(),
        };
        serde_json::to_writer(w, &doc)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Network> {
        let doc: NetworkDoc = serde_json::from_reader(r)?;
        if doc.schema_version != NETWORK_SCHEMA_VERSION {
            return Err(Error::Schema {
                expected: NETWORK_SCHEMA_VERSION,
                found: doc.schema_version,
            });
        }
        doc.network.validate()?;
        Ok(doc.network)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    schema_version: u32,
    #[serde(flatten)]
    network: Network,
}

mod head_serde {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Option<DMatrix<f64>>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Option<Vec<Vec<f64>>> = z
            .as_ref()
            .map(|z| (0..z.nrows()).map(|i| z.row(i).iter().copied().collect()).collect());
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DMatrix<f64>>, D::Error> {
        let rows: Option<Vec<Vec<f64>>> = Option::deserialize(d)?;
        rows.map(|rows| {
            let k = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != k) {
                return Err(serde::de::Error::custom("ragged head matrix"));
            }
            Ok(DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]))
        })
        .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restrict_examples() {
        assert_eq!(restrict(&[1, 2], &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(restrict(&[2], &[1.0, 2.0]).unwrap(), vec![2.0]);
        assert!(restrict(&[], &[1.0]).unwrap().is_empty());
        assert!(restrict(&[3], &[1.0]).is_err());
    }

    #[test]
    fn single_affine_stats() {
        let w = SparseMatrix::from_triplets(1, 2, [(0, 0, 1.0), (0, 1, 2.0)]);
        let net = Network::affine(Activation::Relu, w, vec![0.5]);
        assert_eq!(net.stats(), ArchitectureStats { width: 1, depth: 0, size: 3 });
    }

    #[test]
    fn identity_blocks_are_exact() {
        for act in [Activation::Relu, Activation::Tanh, Activation::Repu { power: 2 }, Activation::Repu { power: 3 }] {
            let net = Network::identity_block(act, 2, 3);
            assert_eq!(net.depth(), 3);
            for x in [-7.5, -1.0, 0.0, 0.3, 2.0] {
                let out = net.forward(&[x, -x]);
                assert!((out[0] - x).abs() <= 1e-12 * x.abs().max(1.0), "{act:?} {x} {out:?}");
                assert!((out[1] + x).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn activation_parsing() {
        assert_eq!("repu".parse::<Activation>().unwrap(), Activation::Repu { power: 2 });
        assert_eq!("ReLU".parse::<Activation>().unwrap(), Activation::Relu);
        assert_eq!("repu3".parse::<Activation>().unwrap(), Activation::Repu { power: 3 });
        assert!("repu1".parse::<Activation>().is_err());
        assert!("sigmoid".parse::<Activation>().is_err());
    }
}
