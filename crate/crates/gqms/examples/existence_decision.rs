//! Decide existence of a normal invariant state for the canonical one-mode
//! models and print the reason when the decision is negative.
//!
//! Run with `cargo run --example existence_decision`.

use gqms::invariant;
use gqms::linalg::{RMatrix, RVector};
use gqms::model::DriftDiffusion;

fn model(name: &str, z: RMatrix, c: RMatrix, zeta: RVector) -> (String, DriftDiffusion) {
    (
        name.to_string(),
        DriftDiffusion::new(z, c, zeta, 1e-9).expect("valid data"),
    )
}

fn main() -> gqms::Result<()> {
    let rotation = RMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let models = [
        model(
            "harmonic oscillator",
            rotation.clone(),
            RMatrix::zeros(2, 2),
            RVector::zeros(2),
        ),
        model(
            "damped mode",
            -RMatrix::identity(2, 2),
            RMatrix::identity(2, 2).scale(2.0),
            RVector::zeros(2),
        ),
        model(
            "thermal mode",
            -RMatrix::identity(2, 2),
            RMatrix::identity(2, 2).scale(6.0),
            RVector::zeros(2),
        ),
        model(
            "driven free mode",
            RMatrix::zeros(2, 2),
            RMatrix::zeros(2, 2),
            RVector::from_vec(vec![1.0, 0.0]),
        ),
        model(
            "noisy rotation",
            rotation,
            RMatrix::identity(2, 2).scale(2.0),
            RVector::zeros(2),
        ),
        model(
            "free particle",
            RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            RMatrix::zeros(2, 2),
            RVector::zeros(2),
        ),
    ];

    println!("{:<22} {:>7} {:>6}  reason", "model", "exists", "d0");
    for (name, dd) in &models {
        let verdict = invariant::decide_existence(dd, 1e-9)?;
        let d0 = verdict
            .normal_form
            .as_ref()
            .map(|nf| nf.d0.to_string())
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<22} {:>7} {:>6}  {}",
            name,
            verdict.exists,
            d0,
            verdict.reason.as_str()
        );
        if let Some(nf) = &verdict.normal_form {
            if nf.d0 > 0 {
                println!("{:<22} oscillator angles: {:?}", "", nf.phi);
            }
        }
    }
    Ok(())
}
