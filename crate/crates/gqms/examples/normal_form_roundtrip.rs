//! Plant a model with known oscillator angles and a known stable block, hide
//! it behind a random symplectic frame and a Weyl displacement, then recover
//! the structure with the existence decision.
//!
//! Run with `cargo run --example normal_form_roundtrip`.

use gqms::invariant;
use gqms::linalg;
use gqms::model;
use gqms::sampling::{self, PlantedDrive};
use gqms::symplectic::is_symplectic;

fn main() -> gqms::Result<()> {
    let mut rng = sampling::rng(2024);
    let planted_angles = [2.2, 0.7, 0.0];
    let planted =
        sampling::planted_model(&mut rng, &planted_angles, 2, PlantedDrive::benign(), 0.5)?;

    println!("planted angles:   {:?}", planted.angles);
    println!("stable modes:     {}", planted.stable_modes);
    println!(
        "frame residual:   {:.2e} (conjugation is symplectic: {})",
        linalg::fro(&planted.conjugation),
        is_symplectic(&planted.conjugation, 1e-9)?
    );

    let verdict = invariant::decide_existence(&planted.dd, 1e-9)?;
    assert!(verdict.exists);
    let nf = verdict.normal_form.expect("attached on success");
    println!("recovered angles: {:?}", nf.phi);
    println!(
        "recovered d0:     {} (+ {} stable modes)",
        nf.d0,
        nf.stable_modes()
    );
    println!(
        "zero-angle drive: {:.2e} (must vanish for existence)",
        nf.zeta0_obstruction
    );

    // The recovered M really conjugates the data into block form.
    let conj = nf.conjugated(&planted.dd)?;
    let mut max_cross = 0.0f64;
    for &i in &nf.oscillator_indices() {
        for &j in &nf.stable_indices() {
            max_cross = max_cross
                .max(conj.z[(i, j)].abs())
                .max(conj.z[(j, i)].abs());
        }
    }
    println!("largest drift cross-block entry after conjugation: {max_cross:.2e}");

    // Centering: w_center lives in normal coordinates; M' w_center displaces
    // the original model so that the whole oscillator drive disappears.
    let w_orig = nf.m.transpose() * &nf.w_center;
    let centered = model::displace_weyl(&planted.dd, &w_orig)?;
    let verdict2 = invariant::decide_existence(&centered, 1e-9)?;
    let nf2 = verdict2.normal_form.expect("still exists");
    println!("oscillator drive after centering: {:.2e}", nf2.zeta0.norm());
    Ok(())
}
