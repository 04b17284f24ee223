//! Spectral-gap diagnostics: the KMS gap criterion on stable models and the
//! finite-dimensional equality between the Poincare-form gap and the observed
//! decay rate for contraction semigroups commuting with a projector.
//!
//! Run with `cargo run --example spectral_gaps`.

use gqms::dynamics;
use gqms::invariant;
use gqms::linalg::RMatrix;
use gqms::model;
use gqms::sampling;

fn main() -> gqms::Result<()> {
    // KMS gap on the thermal mode: Sigma = 3I, f(3) = sqrt(8).
    let z = -RMatrix::identity(2, 2);
    let sigma = RMatrix::identity(2, 2).scale(3.0);
    let rep = dynamics::kms_gap_condition(&z, &sigma, 1e-9)?;
    println!(
        "thermal mode: KMS gap condition holds = {}, witness min eigenvalue = {:.6}",
        rep.holds, rep.witness_min_eig
    );

    // Random faithful one-mode models always satisfy the criterion.
    let mut rng = sampling::rng(11);
    let mut shown = 0;
    while shown < 4 {
        let spec = sampling::random_gksl(&mut rng, 1, 2, 0.7, 0.2, 0.45, 1.0, 0.3);
        let Ok(dd) = model::assemble(&spec) else {
            continue;
        };
        let Ok(verdict) = invariant::decide_existence(&dd, 1e-9) else {
            continue;
        };
        let Some(nf) = verdict.normal_form else {
            continue;
        };
        if nf.d0 != 0 {
            continue;
        }
        let desc = invariant::invariant_set_descriptor(&dd, 1e-9, 12)?;
        if !desc.faithful {
            continue;
        }
        let rep = dynamics::kms_gap_condition(&nf.z_minus, &desc.stationary.covariance, 1e-9)?;
        println!(
            "random one-mode model: nu = {:.4}, decay rate = {:.4}, KMS gap holds = {}",
            desc.symplectic_eigenvalues[0],
            dynamics::decay_rate_estimate(&nf.z_minus),
            rep.holds
        );
        shown += 1;
    }

    // Appendix-style gap equality on contraction generators.
    println!(
        "\n{:>4} {:>6} {:>12} {:>12} {:>10}",
        "n", "rank", "gap_form", "gap_decay", "diff"
    );
    for (n, rank) in [(6, 0), (8, 3), (12, 5), (20, 9)] {
        let (a, e) = sampling::random_commuting_contraction(&mut rng, n, rank);
        let rep = dynamics::semigroup_gap_finite(&a, &e, 1e-9)?;
        println!(
            "{n:>4} {rank:>6} {:>12.6} {:>12.6} {:>10.2e}",
            rep.gap_form,
            rep.gap_decay,
            (rep.gap_form - rep.gap_decay).abs()
        );
    }
    Ok(())
}
