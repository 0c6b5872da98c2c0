//! Gauss rules and the orthonormality of the tensor Legendre and Chebyshev bases.

use nalgebra::DMatrix;

use holobench::multiindex::hci_index_set;
use holobench::polybasis::{eval_tensor, gauss_rule, intrinsic_weight, BasisFamily, SamplePoint};

fn main() -> holobench::Result<()> {
    let set = hci_index_set(5)?;
    let set: Vec<_> = set.iter().filter(|nu| nu.max_dim() <= 2).cloned().collect();
    for family in [BasisFamily::Legendre, BasisFamily::Chebyshev] {
        let (x, w) = gauss_rule(family, 8)?;
        let mut gram = DMatrix::<f64>::zeros(set.len(), set.len());
        for (xi, wi) in x.iter().zip(&w) {
            for (xj, wj) in x.iter().zip(&w) {
                let y = SamplePoint::new(vec![*xi, *xj])?;
                let v: Vec<f64> = set.iter().map(|nu| eval_tensor(family, nu, &y).unwrap()).collect();
                gram += DMatrix::from_fn(v.len(), v.len(), |a, b| wi * wj * v[a] * v[b]);
            }
        }
        let dev = (gram - DMatrix::identity(set.len(), set.len())).amax();
        println!("{family:?}: {} functions, max |G − I| = {dev:.1e}", set.len());
        for nu in &set {
            println!("  ν = {:?}  ‖Ψ_ν‖_∞ = {:.4}", nu.to_dense(2), intrinsic_weight(family, nu));
        }
    }
    Ok(())
}
