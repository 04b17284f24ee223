//! Environment-induced decoherence at the characteristic-function level: the
//! evolved Weyl amplitude approaches the decoherence factor times a unitary
//! phase, and the defect decays at the rate of the stable block.
//!
//! Run with `cargo run --example decoherence`.

use gqms::dynamics;
use gqms::linalg::{RMatrix, RVector};
use gqms::model::DriftDiffusion;
use gqms::spectral;

fn main() -> gqms::Result<()> {
    // Oscillator (angle 1) times a damped mode, written mode-blockwise:
    // coordinates are ordered (x_osc, x_damp, y_osc, y_damp).
    let z = {
        let mut z = RMatrix::zeros(4, 4);
        z[(0, 2)] = -1.0;
        z[(2, 0)] = 1.0;
        z[(1, 1)] = -1.0;
        z[(3, 3)] = -1.0;
        z
    };
    let c = {
        let mut c = RMatrix::zeros(4, 4);
        c[(1, 1)] = 2.0;
        c[(3, 3)] = 2.0;
        c
    };
    let dd = DriftDiffusion::new(z, c, RVector::zeros(4), 1e-9)?;
    let split = spectral::invariant_splitting(&dd.z, 1e-9)?;
    println!("decoherence-free frequencies: {:?}", split.angles);

    let probe = RVector::from_vec(vec![0.6, 1.0, -0.4, 0.8]);
    let a_inf = dynamics::decoherence_factor(&dd, &split, &probe)?;
    println!(
        "asymptotic decoherence factor A(z2, inf) = {:.6} + {:.6}i",
        a_inf.re, a_inf.im
    );

    println!("\n{:>5} {:>14} {:>14}", "t", "|amplitude|", "eid defect");
    for &t in &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let w = dynamics::weyl_symbol(&dd, &probe, t)?;
        let defect = dynamics::eid_defect(&dd, &split, &probe, t)?;
        println!("{t:>5.1} {:>14.8} {defect:>14.3e}", w.amplitude.norm());
    }

    // Probes inside the decoherence-free subspace never decohere.
    let free = split.v0_basis.column(0).into_owned();
    let defect = dynamics::eid_defect(&dd, &split, &free, 7.0)?;
    let w = dynamics::weyl_symbol(&dd, &free, 7.0)?;
    println!(
        "\nV0 probe: |amplitude| = {:.12}, defect = {defect:.2e}",
        w.amplitude.norm()
    );
    Ok(())
}
