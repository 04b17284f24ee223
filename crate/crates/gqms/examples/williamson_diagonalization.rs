//! Williamson normal form of a random admissible covariance: Sigma = M' D M
//! with M symplectic, cross-checked against the spectral oracle (symplectic
//! eigenvalues are the positive imaginary parts of Sp(J Sigma)).
//!
//! Run with `cargo run --example williamson_diagonalization`.

use gqms::linalg;
use gqms::sampling;
use gqms::symplectic::{self, standard_form};

fn main() -> gqms::Result<()> {
    let mut rng = sampling::rng(5);
    let d = 3;
    let sigma = sampling::random_spd(&mut rng, 2 * d, 1.0);

    let w = symplectic::williamson(&sigma, 1e-9)?;
    println!("symplectic eigenvalues: {:?}", w.symplectic_eigenvalues);

    let j = standard_form(d)?;
    let sympl_res = linalg::fro(&(w.m.transpose() * &j * &w.m - &j));
    let recon_res = linalg::fro(&(w.m.transpose() * &w.d * &w.m - &sigma));
    println!("symplectic residual |M'JM - J|     = {sympl_res:.3e}");
    println!("reconstruction residual |M'DM - S| = {recon_res:.3e}");

    let mut oracle: Vec<f64> = (&j * &sigma)
        .complex_eigenvalues()
        .iter()
        .map(|l| l.im)
        .filter(|&x| x > 0.0)
        .collect();
    oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
    println!("spectral oracle (Im Sp(J Sigma)):  {oracle:?}");

    // A covariance is a quantum state covariance iff all nu >= 1.
    let admissible = w.symplectic_eigenvalues.iter().all(|&nu| nu >= 1.0 - 1e-12);
    println!("admissible as a state covariance: {admissible}");
    Ok(())
}
