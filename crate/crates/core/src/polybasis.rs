//! Orthonormal Legendre and Chebyshev polynomials on `[-1,1]`, their tensor
//! products, root factorizations and sampling from the matching measures.
//!
//! Measures are probability measures: `dy/2` for Legendre and
//! `dy/(π√(1-y²))` for Chebyshev. Values are always computed with the
//! three-term recurrence; the root form only feeds the network builders.

use std::f64::consts::{E, PI, SQRT_2};
use std::io::{Read, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::multiindex::MultiIndex;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Legendre,
    Chebyshev,
}

impl std::str::FromStr for BasisFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" | "uniform" => Ok(Self::Legendre),
            "chebyshev" | "arcsine" => Ok(Self::Chebyshev),
            other => Err(Error::Parse(format!("unknown basis family {other:?}"))),
        }
    }
}

/// Active coordinates `y_1..y_n` of a parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub coords: Vec<f64>,
}

impl SamplePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_domain(&coords)?;
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

fn check_domain(coords: &[f64]) -> Result<()> {
    for (i, &c) in coords.iter().enumerate() {
        if !(-1.0..=1.0).contains(&c) {
            return Err(Error::Domain { coord: i + 1, value: c });
        }
    }
    Ok(())
}

/// `Ψ_ν(y)` for the orthonormal univariate polynomial.
pub fn eval_univariate(family: BasisFamily, nu: u32, y: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::Domain { coord: 1, value: y });
    }
    Ok(univariate_unchecked(family, nu, y))
}

pub(crate) fn univariate_unchecked(family: BasisFamily, nu: u32, y: f64) -> f64 {
    if nu == 0 {
        return 1.0;
    }
    match family {
        BasisFamily::Legendre => {
            let (mut p0, mut p1) = (1.0, y);
            for k in 1..nu {
                let k = k as f64;
                let p2 = ((2.0 * k + 1.0) * y * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            (2.0 * nu as f64 + 1.0).sqrt() * p1
        }
        BasisFamily::Chebyshev => {
            let (mut t0, mut t1) = (1.0, y);
            for _ in 1..nu {
                let t2 = 2.0 * y * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            SQRT_2 * t1
        }
    }
}

/// All values `Ψ_0(y), ..., Ψ_deg(y)` in one recurrence sweep.
pub fn eval_univariate_all(family: BasisFamily, deg: u32, y: f64) -> Vec<f64> {
    let mut raw = Vec::with_capacity(deg as usize + 1);
    raw.push(1.0);
    if deg >= 1 {
        raw.push(y);
    }
    for k in 1..deg as usize {
        let next = match family {
            BasisFamily::Legendre => {
                let kf = k as f64;
                ((2.0 * kf + 1.0) * y * raw[k] - kf * raw[k - 1]) / (kf + 1.0)
            }
            BasisFamily::Chebyshev => 2.0 * y * raw[k] - raw[k - 1],
        };
        raw.push(next);
    }
    for (k, v) in raw.iter_mut().enumerate().skip(1) {
        *v *= match family {
            BasisFamily::Legendre => (2.0 * k as f64 + 1.0).sqrt(),
            BasisFamily::Chebyshev => SQRT_2,
        };
    }
    raw
}

/// `Ψ_ν(y) = ∏_k Ψ_{ν_k}(y_k)`.
pub fn eval_tensor(family: BasisFamily, nu: &MultiIndex, y: &SamplePoint) -> Result<f64> {
    if nu.max_dim() > y.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu.max_dim(),
            found: y.dim(),
        });
    }
    let mut v = 1.0;
    for &(j, k) in nu.entries() {
        v *= eval_univariate(family, k, y.coords[j - 1])?;
    }
    Ok(v)
}

/// `u_ν = ‖Ψ_ν‖_∞`.
pub fn intrinsic_weight(family: BasisFamily, nu: &MultiIndex) -> f64 {
    match family {
        BasisFamily::Legendre => nu
            .entries()
            .iter()
            .map(|&(_, v)| (2.0 * v as f64 + 1.0).sqrt())
            .product(),
        BasisFamily::Chebyshev => 2f64.powf(nu.l0() as f64 / 2.0),
    }
}

/// Leading coefficient of the (non-normalized) degree-`nu` polynomial:
/// `2^{-ν}(2ν)!/(ν!)²` for Legendre, `2^{ν-1}` for Chebyshev.
pub fn leading_coefficient(family: BasisFamily, nu: u32) -> f64 {
    match family {
        BasisFamily::Legendre => (1..=nu).map(|k| (2.0 * k as f64 - 1.0) / k as f64).product(),
        BasisFamily::Chebyshev => {
            if nu == 0 {
                1.0
            } else {
                2f64.powi(nu as i32 - 1)
            }
        }
    }
}

/// Roots (ascending) and per-factor scale `c` with `Ψ_ν(y) = ∏_j c·(y - r_j)`.
pub fn roots_and_scale(family: BasisFamily, nu: u32) -> Result<(Vec<f64>, f64)> {
    if nu == 0 {
        return invalid("degree 0 has no roots");
    }
    let n = nu as usize;
    let nf = nu as f64;
    let (roots, lead) = match family {
        BasisFamily::Legendre => {
            let mut roots = jacobi_eigen(n).0;
            roots.sort_by(f64::total_cmp);
            let lead = (2.0 * nf + 1.0).sqrt() * leading_coefficient(family, nu);
            (roots, lead)
        }
        BasisFamily::Chebyshev => {
            let mut roots: Vec<f64> = (1..=n)
                .map(|j| ((2 * j - 1) as f64 * PI / (2.0 * nf)).cos())
                .collect();
            roots.sort_by(f64::total_cmp);
            (roots, SQRT_2 * leading_coefficient(family, nu))
        }
    };
    Ok((roots, lead.powf(1.0 / nf)))
}

/// Bound `M̃` on `sup_{|y|≤1} |c·(y - r)|` for any factor of `Ψ_ν`.
///
/// For Legendre this is the bound `2(√(2ν+1))^{1/ν}(e2^ν/(π√(2ν)))^{1/ν}`;
/// for Chebyshev it is `2c` with the exact scale.
pub fn factor_bound(family: BasisFamily, nu: u32) -> Result<f64> {
    if nu == 0 {
        return invalid("degree 0 has no factors");
    }
    let nf = nu as f64;
    Ok(match family {
        BasisFamily::Legendre => {
            2.0 * (2.0 * nf + 1.0).sqrt().powf(1.0 / nf)
                * (E * 2f64.powf(nf) / (PI * (2.0 * nf).sqrt())).powf(1.0 / nf)
        }
        BasisFamily::Chebyshev => 2.0 * roots_and_scale(family, nu)?.1,
    })
}

/// Legendre Jacobi matrix eigenpairs: nodes and first eigenvector components.
fn jacobi_eigen(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(q, q);
    for i in 1..q {
        let k = i as f64;
        let b = k / (4.0 * k * k - 1.0).sqrt();
        j[(i - 1, i)] = b;
        j[(i, i - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let nodes = eig.eigenvalues.iter().copied().collect();
    let first = (0..q).map(|c| eig.eigenvectors[(0, c)]).collect();
    (nodes, first)
}

/// `q`-point Gauss rule for the family's probability measure, nodes ascending.
pub fn gauss_rule(family: BasisFamily, q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if q == 0 {
        return invalid("quadrature order must be positive");
    }
    let mut pairs: Vec<(f64, f64)> = match family {
        BasisFamily::Legendre => {
            let (nodes, first) = jacobi_eigen(q);
            nodes.into_iter().zip(first.into_iter().map(|v| v * v)).collect()
        }
        BasisFamily::Chebyshev => (1..=q)
            .map(|j| (((2 * j - 1) as f64 * PI / (2.0 * q as f64)).cos(), 1.0 / q as f64))
            .collect(),
    };
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// `m` i.i.d. draws from the family's product measure on `[-1,1]^n`.
pub fn sample_points(family: BasisFamily, m: usize, n: usize, seed: u64) -> Vec<SamplePoint> {
    let mut r = rng::rng(seed);
    sample_points_with(family, m, n, &mut r)
}

pub fn sample_points_with(family: BasisFamily, m: usize, n: usize, r: &mut rng::Rng) -> Vec<SamplePoint> {
    (0..m)
        .map(|_| SamplePoint {
            coords: (0..n)
                .map(|_| match family {
                    BasisFamily::Legendre => r.gen_range(-1.0..=1.0),
                    BasisFamily::Chebyshev => (PI * r.gen::<f64>()).cos(),
                })
                .collect(),
        })
        .collect()
}

/// Writes one point per row, no header.
pub fn write_points_csv<W: Write>(points: &[SamplePoint], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for p in points {
        wr.write_record(p.coords.iter().map(|c| format!("{c:?}")))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_points_csv<R: Read>(r: R) -> Result<Vec<SamplePoint>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let coords = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        out.push(SamplePoint::new(coords)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_values() {
        let v = eval_univariate(BasisFamily::Legendre, 1, 0.5).unwrap();
        assert_abs_diff_eq!(v, 3f64.sqrt() * 0.5, epsilon = 1e-15);
        let v = eval_univariate(BasisFamily::Chebyshev, 2, 0.0).unwrap();
        assert_abs_diff_eq!(v, -SQRT_2, epsilon = 1e-15);
        assert_eq!(eval_univariate(BasisFamily::Legendre, 0, 0.3).unwrap(), 1.0);
        assert!(eval_univariate(BasisFamily::Legendre, 1, 1.5).is_err());

        let nu = MultiIndex::from_dense(&[1, 2]);
        let y = SamplePoint::new(vec![0.5, 0.0]).unwrap();
        let v = eval_tensor(BasisFamily::Legendre, &nu, &y).unwrap();
        assert_abs_diff_eq!(v, 3f64.sqrt() * 0.5 * 5f64.sqrt() * -0.5, epsilon = 1e-14);
        let short = SamplePoint::new(vec![0.5]).unwrap();
        assert!(matches!(
            eval_tensor(BasisFamily::Legendre, &nu, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn weights() {
        let nu = MultiIndex::from_dense(&[1, 2]);
        assert_abs_diff_eq!(intrinsic_weight(BasisFamily::Legendre, &nu), 15f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(intrinsic_weight(BasisFamily::Chebyshev, &nu), 2.0, epsilon = 1e-14);
        assert_eq!(intrinsic_weight(BasisFamily::Legendre, &MultiIndex::zero()), 1.0);
    }

    #[test]
    fn root_examples() {
        let (r, _) = roots_and_scale(BasisFamily::Chebyshev, 2).unwrap();
        assert_abs_diff_eq!(r[1], (PI / 4.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(r[0], -(PI / 4.0).cos(), epsilon = 1e-15);
        let (r, _) = roots_and_scale(BasisFamily::Legendre, 2).unwrap();
        assert_abs_diff_eq!(r[1], 1.0 / 3f64.sqrt(), epsilon = 1e-14);
        assert!(roots_and_scale(BasisFamily::Legendre, 0).is_err());
    }

    #[test]
    fn factor_bounds_dominate_scale() {
        for fam in [BasisFamily::Legendre, BasisFamily::Chebyshev] {
            for nu in 1..=30 {
                let (roots, c) = roots_and_scale(fam, nu).unwrap();
                let worst = roots.iter().map(|r| c * (1.0 + r.abs())).fold(0.0, f64::max);
                assert!(factor_bound(fam, nu).unwrap() >= worst * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn gauss_weights_sum_to_one() {
        for fam in [BasisFamily::Legendre, BasisFamily::Chebyshev] {
            let (_, w) = gauss_rule(fam, 12).unwrap();
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let pts = sample_points(BasisFamily::Chebyshev, 5, 3, 9);
        let mut buf = Vec::new();
        write_points_csv(&pts, &mut buf).unwrap();
        assert_eq!(read_points_csv(buf.as_slice()).unwrap(), pts);
    }
}
