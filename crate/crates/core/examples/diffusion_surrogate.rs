//! Solves the parametric diffusion problem at a few parameter points and
//! prints the solution profile and the coarse-grid discretization error.

use holobench::banachspace::BlockNorm;
use holobench::models::{Amplitudes, Model, ModelSpec, Profile};
use holobench::polybasis::{sample_points, BasisFamily};

fn main() -> holobench::Result<()> {
    let spec = ModelSpec::Diffusion {
        grid_size: 63,
        coarse_size: Some(15),
        a0: Profile::Constant { value: 1.0 },
        forcing: Profile::Constant { value: 1.0 },
        b: Amplitudes::Algebraic { beta: 3.0, scale: 1.0, d: 4 },
    };
    let model = Model::from_spec(&spec, BasisFamily::Legendre, 0.5, 0.4)?;
    for y in sample_points(BasisFamily::Legendre, 3, 4, 1) {
        let u = model.eval(&y)?;
        let peak = u.iter().cloned().fold(f64::MIN, f64::max);
        println!(
            "y = [{}]  max u = {peak:.5}  E_disc(ℓ²) = {:.2e}",
            y.coords.iter().map(|v| format!("{v:+.2}")).collect::<Vec<_>>().join(", "),
            model.discretization_error(&y, BlockNorm::L2)?
        );
    }
    Ok(())
}
