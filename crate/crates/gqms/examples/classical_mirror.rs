//! The Ornstein-Uhlenbeck mirror: map quantum drift/diffusion data to the
//! classical SDE dX = (AX + b)dt + B dW and compare invariant-measure and
//! irreducibility verdicts.
//!
//! Run with `cargo run --example classical_mirror`.

use gqms::classical;
use gqms::invariant;
use gqms::linalg::{RMatrix, RVector};
use gqms::model::DriftDiffusion;

fn main() -> gqms::Result<()> {
    let cases = [
        (
            "damped mode",
            DriftDiffusion::new(
                -RMatrix::identity(2, 2),
                RMatrix::identity(2, 2).scale(2.0),
                RVector::zeros(2),
                1e-9,
            )?,
        ),
        (
            "thermal mode",
            DriftDiffusion::new(
                -RMatrix::identity(2, 2),
                RMatrix::identity(2, 2).scale(6.0),
                RVector::zeros(2),
                1e-9,
            )?,
        ),
        (
            "harmonic oscillator",
            DriftDiffusion::new(
                RMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
                RMatrix::zeros(2, 2),
                RVector::zeros(2),
                1e-9,
            )?,
        ),
    ];

    println!(
        "{:<20} {:>9} {:>9} {:>11} {:>11}",
        "model", "qu.exists", "cl.exists", "qu.irred", "cl.irred"
    );
    for (name, dd) in &cases {
        let verdict = invariant::decide_existence(dd, 1e-9)?;
        let quantum_irr = invariant::is_irreducible(dd, 1e-9)?;
        let mirror = classical::quantum_classical_correspondence(dd)?;
        let rep = classical::ou_invariant_exists(&mirror, 1e-9)?;
        let classical_irr = classical::ou_irreducible(&mirror, 1e-9);
        println!(
            "{name:<20} {:>9} {:>9} {:>11} {:>11}",
            verdict.exists, rep.exists, quantum_irr, classical_irr
        );
    }

    // Classical characteristic coefficient relaxing to its stationary value.
    let model = classical::OuModel::new(
        RMatrix::from_element(1, 1, -1.0),
        RMatrix::from_element(1, 1, 2.0f64.sqrt()),
        RVector::zeros(1),
    )?;
    let z = RVector::from_vec(vec![1.0]);
    let x = RVector::from_vec(vec![0.5]);
    println!("\nscalar OU with stationary variance 1: T_t(e^{{izX}})(x)");
    for &t in &[0.0, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let c = classical::ou_char_coefficient(&model, &z, &x, t)?;
        println!(
            "  t = {t:>5.1}: modulus {:.8} (limit {:.8})",
            c.norm(),
            (-0.5f64).exp()
        );
    }

    // Classical structure theorem on a planted drift.
    let mut a = RMatrix::zeros(4, 4);
    a[(1, 2)] = -2.0;
    a[(2, 1)] = 2.0;
    a[(3, 3)] = -0.8;
    let model = classical::OuModel::new(a, RMatrix::zeros(4, 4), RVector::zeros(4))?;
    let nf = classical::classical_normal_form(&model, 1e-9)?;
    println!(
        "\nclassical normal form: kernel dim {}, rotations {:?}, stable spectrum abscissa {:.3}",
        nf.kernel_dim,
        nf.phi,
        -gqms::dynamics::decay_rate_estimate(&nf.a_minus)
    );
    Ok(())
}
