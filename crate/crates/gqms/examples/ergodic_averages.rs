//! Ergodic means: rotating components of the mean average out while the
//! stable factor converges to its stationary Gaussian parameters.
//!
//! Run with `cargo run --example ergodic_averages`.

use gqms::dynamics;
use gqms::linalg::{self, RMatrix, RVector};
use gqms::model::DriftDiffusion;

fn main() -> gqms::Result<()> {
    // Pure oscillator: the averaged mean obeys |avg| <= 2|m0| / (phi T).
    let phi = 1.0;
    let osc = DriftDiffusion::new(
        RMatrix::from_row_slice(2, 2, &[0.0, -phi, phi, 0.0]),
        RMatrix::zeros(2, 2),
        RVector::zeros(2),
        1e-9,
    )?;
    let m0 = RVector::from_vec(vec![1.0, 0.0]);
    let s0 = RMatrix::identity(2, 2);
    println!("{:>8} {:>14} {:>14}", "T", "|avg mean|", "2|m0|/(phi T)");
    for &big_t in &[10.0, 100.0, 1000.0] {
        let steps = (big_t * 100.0) as usize;
        let out = dynamics::ergodic_mean(&osc, &m0, &s0, big_t, steps, 1e-9)?;
        println!(
            "{big_t:>8.0} {:>14.6e} {:>14.6e}",
            out.avg_mean.norm(),
            2.0 * m0.norm() / (phi * big_t)
        );
    }

    // Oscillator (x) thermal mode: the stable factor averages to (m_inf, S_inf).
    let mut z = RMatrix::zeros(4, 4);
    z[(0, 2)] = -1.0;
    z[(2, 0)] = 1.0;
    z[(1, 1)] = -1.0;
    z[(3, 3)] = -1.0;
    let mut c = RMatrix::zeros(4, 4);
    c[(1, 1)] = 6.0;
    c[(3, 3)] = 6.0;
    let dd = DriftDiffusion::new(z, c, RVector::from_vec(vec![0.0, 0.4, 0.0, -0.2]), 1e-9)?;
    let m0 = RVector::from_vec(vec![1.0, 2.0, -1.0, 0.5]);
    let s0 = RMatrix::identity(4, 4).scale(2.0);
    let out = dynamics::ergodic_mean(&dd, &m0, &s0, 400.0, 20_000, 1e-9)?;
    println!("\nproduct model, T = 400:");
    println!("  averaged mean:   {:?}", out.avg_mean.as_slice());
    println!("  predicted limit: {:?}", out.predicted_mean.as_slice());
    println!(
        "  stable-factor covariance average error: {:.3e}",
        linalg::fro(&(&out.avg_covariance_stable - &out.predicted_covariance))
    );
    Ok(())
}
