//! Closed-form moment evolution: a driven lossy mode relaxing to its
//! stationary Gaussian state, plus the stationarity check.
//!
//! Run with `cargo run --example moment_dynamics`.

use gqms::dynamics;
use gqms::invariant;
use gqms::linalg::{self, RMatrix, RVector};
use gqms::model::DriftDiffusion;

fn main() -> gqms::Result<()> {
    // Lossy mode with a coherent drive.
    let dd = DriftDiffusion::new(
        -RMatrix::identity(2, 2),
        RMatrix::identity(2, 2).scale(2.0),
        RVector::from_vec(vec![1.0, -0.5]),
        1e-9,
    )?;

    let verdict = invariant::decide_existence(&dd, 1e-9)?;
    let nf = verdict.normal_form.expect("stable model");
    let st = invariant::stationary_gaussian(&nf.z_minus, &nf.c_minus, &nf.zeta_minus, 1e-9)?;
    let m_inf = nf.m.transpose() * &st.mean;
    let s_inf = nf.m.transpose() * &st.covariance * &nf.m;
    println!(
        "stationary mean (original frame):  ({:+.6}, {:+.6})",
        m_inf[0], m_inf[1]
    );
    println!(
        "stationary covariance diagonal:    ({:.6}, {:.6})",
        s_inf[(0, 0)],
        s_inf[(1, 1)]
    );

    let m0 = RVector::from_vec(vec![2.0, 1.0]);
    let s0 = RMatrix::identity(2, 2).scale(3.0);
    let grid: Vec<f64> = (0..=8).map(|k| k as f64).collect();
    let traj = dynamics::evolve_moments(&dd, &m0, &s0, &grid, 1e-9)?;

    println!(
        "\n{:>4} {:>12} {:>12} {:>12} {:>14}",
        "t", "m_x", "m_y", "s_xx", "|m - m_inf|"
    );
    for (k, &t) in traj.times.iter().enumerate() {
        let gap = (&traj.means[k] - &m_inf).norm();
        println!(
            "{t:>4.1} {:>12.6} {:>12.6} {:>12.6} {gap:>14.3e}",
            traj.means[k][0],
            traj.means[k][1],
            traj.covariances[k][(0, 0)],
        );
    }

    // Starting at the fixed point nothing moves.
    let fixed = dynamics::evolve_moments(&dd, &m_inf, &s_inf, &[10.0], 1e-9)?;
    println!(
        "\ndrift after T = 10 from the stationary pair: {:.2e}",
        (&fixed.means[0] - &m_inf).norm() + linalg::fro(&(&fixed.covariances[0] - &s_inf))
    );
    Ok(())
}
