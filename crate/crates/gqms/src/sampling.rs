//! Seeded random generators for models and transformations.
//!
//! Everything takes an explicit RNG so tests and examples stay reproducible.
//! The planted-model builder assembles data directly in normal form (known
//! angles, known stable block) and hides it behind a random symplectic
//! conjugation and a Weyl displacement; analyzers are expected to recover the
//! planted structure exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{self, CMatrix, CVector, RMatrix, RVector, C64};
use crate::model::{assemble, DriftDiffusion, GkslSpec};
use crate::symplectic::standard_form;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller on open-interval uniforms.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> RMatrix {
    RMatrix::from_fn(rows, cols, |_, _| scale * normal(rng))
}

pub fn gaussian_vector(rng: &mut impl Rng, len: usize, scale: f64) -> RVector {
    RVector::from_fn(len, |_, _| scale * normal(rng))
}

pub fn gaussian_complex_matrix(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    scale: f64,
) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(scale * normal(rng), scale * normal(rng))
    })
}

pub fn gaussian_complex_vector(rng: &mut impl Rng, len: usize, scale: f64) -> CVector {
    CVector::from_fn(len, |_, _| {
        C64::new(scale * normal(rng), scale * normal(rng))
    })
}

/// Random symmetric positive definite matrix A A' + floor I.
pub fn random_spd(rng: &mut impl Rng, n: usize, floor: f64) -> RMatrix {
    let a = gaussian_matrix(rng, n, n, 1.0 / (n as f64).sqrt());
    &a * a.transpose() + RMatrix::identity(n, n).scale(floor)
}

/// Random symplectic matrix exp(J S) with S symmetric of the given spread.
pub fn random_symplectic(rng: &mut impl Rng, d: usize, spread: f64) -> RMatrix {
    let n = 2 * d;
    let s_raw = gaussian_matrix(rng, n, n, spread / (n as f64).sqrt());
    let s = (&s_raw + s_raw.transpose()).scale(0.5);
    let j = standard_form(d).expect("valid mode count");
    (j * s).exp()
}

/// Random orthonormal columns (n x k).
pub fn random_orthonormal(rng: &mut impl Rng, n: usize, k: usize) -> RMatrix {
    let a = gaussian_matrix(rng, n, k, 1.0);
    linalg::range(&a, 1e-12)
}

/// Random orthogonal projector of the given rank.
pub fn random_projector(rng: &mut impl Rng, n: usize, rank: usize) -> RMatrix {
    if rank == 0 {
        return RMatrix::zeros(n, n);
    }
    let b = random_orthonormal(rng, n, rank);
    &b * b.transpose()
}

/// Random GKSL coefficient data with the given scales.
#[allow(clippy::too_many_arguments)]
pub fn random_gksl(
    rng: &mut impl Rng,
    d: usize,
    m: usize,
    hamiltonian_scale: f64,
    squeeze_scale: f64,
    gain_scale: f64,
    loss_scale: f64,
    drive_scale: f64,
) -> GkslSpec {
    let omega_raw = gaussian_complex_matrix(rng, d, d, hamiltonian_scale);
    let omega = (&omega_raw + omega_raw.adjoint()).scale(0.5);
    let kappa_raw = gaussian_complex_matrix(rng, d, d, squeeze_scale);
    let kappa = (&kappa_raw + kappa_raw.transpose()).scale(0.5);
    let zeta = gaussian_complex_vector(rng, d, drive_scale);
    let u = gaussian_complex_matrix(rng, m, d, gain_scale);
    let v = gaussian_complex_matrix(rng, m, d, loss_scale);
    GkslSpec::new(omega, kappa, zeta, u, v, 1e-9).expect("symmetrized by construction")
}

/// Random GKSL data whose drift is strictly stable (spectral abscissa at most
/// -min_rate), found by rejection with gradually strengthened damping.
pub fn random_stable_gksl(rng: &mut impl Rng, d: usize, min_rate: f64) -> GkslSpec {
    let mut loss = 1.0;
    loop {
        let spec = random_gksl(rng, d, d, 0.7, 0.25, 0.2, loss, 0.5);
        let dd = assemble(&spec).expect("assembly of valid coefficients");
        if linalg::spectral_abscissa(&dd.z) <= -min_rate {
            return spec;
        }
        loss *= 1.2;
    }
}

/// Pure-loss GKSL data (no gain, no squeezing): the steady state is the
/// vacuum, so the stationary covariance is the identity and never faithful.
pub fn random_pure_loss_gksl(rng: &mut impl Rng, d: usize, min_rate: f64) -> GkslSpec {
    let mut loss = 1.0;
    loop {
        let omega_raw = gaussian_complex_matrix(rng, d, d, 0.7);
        let omega = (&omega_raw + omega_raw.adjoint()).scale(0.5);
        let v = gaussian_complex_matrix(rng, d, d, loss);
        let spec = GkslSpec::new(
            omega,
            CMatrix::zeros(d, d),
            CVector::zeros(d),
            CMatrix::zeros(d, d),
            v,
            1e-9,
        )
        .expect("valid coefficients");
        let dd = assemble(&spec).expect("assembly of valid coefficients");
        if linalg::spectral_abscissa(&dd.z) <= -min_rate {
            return spec;
        }
        loss *= 1.2;
    }
}

/// A model assembled in normal form and hidden behind a random change of
/// frame; carries the planted ground truth.
#[derive(Debug, Clone)]
pub struct PlantedModel {
    pub dd: DriftDiffusion,
    /// Planted oscillator angles (signed), descending.
    pub angles: Vec<f64>,
    pub stable_modes: usize,
    pub conjugation: RMatrix,
    pub displacement: RVector,
}

/// Options controlling the displacement structure of a planted model.
#[derive(Debug, Clone, Copy)]
pub struct PlantedDrive {
    /// Random drive on rotating oscillator modes (removable by a Weyl
    /// displacement, existence preserved).
    pub rotating: bool,
    /// Random drive on zero-angle oscillator modes (obstructs existence).
    pub zero_modes: bool,
    /// Random drive on the stable block.
    pub stable: bool,
}

impl PlantedDrive {
    pub fn none() -> Self {
        Self {
            rotating: false,
            zero_modes: false,
            stable: false,
        }
    }

    pub fn benign() -> Self {
        Self {
            rotating: true,
            zero_modes: false,
            stable: true,
        }
    }
}

/// Builds Z, C, zeta in normal form with the given signed angles and a random
/// admissible strictly stable block, then conjugates by a random symplectic
/// transformation and applies a random Weyl displacement.
pub fn planted_model(
    rng: &mut impl Rng,
    angles: &[f64],
    stable_modes: usize,
    drive: PlantedDrive,
    spread: f64,
) -> Result<PlantedModel> {
    let d0 = angles.len();
    let d = d0 + stable_modes;
    assert!(d >= 1, "planted model needs at least one mode");
    let n = 2 * d;

    let mut z = RMatrix::zeros(n, n);
    let mut c = RMatrix::zeros(n, n);
    let mut zeta = RVector::zeros(n);

    let mut sorted_angles: Vec<f64> = angles.to_vec();
    sorted_angles.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (k, &phi) in sorted_angles.iter().enumerate() {
        z[(k, d + k)] = -phi;
        z[(d + k, k)] = phi;
        let driven = if phi == 0.0 {
            drive.zero_modes
        } else {
            drive.rotating
        };
        if driven {
            zeta[k] = normal(rng);
            zeta[d + k] = normal(rng);
        }
    }

    if stable_modes > 0 {
        let spec = random_stable_gksl(rng, stable_modes, 0.2);
        let block = assemble(&spec)?;
        let idx: Vec<usize> = (d0..d).chain(d + d0..2 * d).collect();
        for (bi, &gi) in idx.iter().enumerate() {
            for (bj, &gj) in idx.iter().enumerate() {
                z[(gi, gj)] = block.z[(bi, bj)];
                c[(gi, gj)] = block.c[(bi, bj)];
            }
            if drive.stable {
                zeta[gi] = block.zeta[bi] + normal(rng);
            }
        }
    }

    let conjugation = random_symplectic(rng, d, spread);
    let base = DriftDiffusion::new(z, c, zeta, 1e-8)?;
    let conjugated = crate::model::conjugate_symplectic(&base, &conjugation)?;
    let displacement = gaussian_vector(rng, n, 0.7);
    let dd = crate::model::displace_weyl(&conjugated, &displacement)?;

    Ok(PlantedModel {
        dd,
        angles: sorted_angles,
        stable_modes,
        conjugation,
        displacement,
    })
}

/// Random contraction generator A = S - Q (S skew, Q PSD) commuting with a
/// random rank-`rank` orthogonal projector E, both built in a common
/// eigenbasis.
pub fn random_commuting_contraction(
    rng: &mut impl Rng,
    n: usize,
    rank: usize,
) -> (RMatrix, RMatrix) {
    let basis = random_orthonormal(rng, n, n);
    fn block(rng: &mut impl Rng, k: usize) -> RMatrix {
        if k == 0 {
            return RMatrix::zeros(0, 0);
        }
        let s_raw = gaussian_matrix(rng, k, k, 0.6);
        let s = (&s_raw - s_raw.transpose()).scale(0.5);
        let q_raw = gaussian_matrix(rng, k, k, 0.8 / (k as f64).sqrt());
        let q = &q_raw * q_raw.transpose() + RMatrix::identity(k, k).scale(0.05);
        s - q
    }
    let a1 = block(rng, rank);
    let a2 = block(rng, n - rank);
    let mut a_blocks = RMatrix::zeros(n, n);
    a_blocks.view_mut((0, 0), (rank, rank)).copy_from(&a1);
    a_blocks
        .view_mut((rank, rank), (n - rank, n - rank))
        .copy_from(&a2);
    let mut e_blocks = RMatrix::zeros(n, n);
    for k in 0..rank {
        e_blocks[(k, k)] = 1.0;
    }
    let a = &basis * a_blocks * basis.transpose();
    let e = &basis * e_blocks * basis.transpose();
    (a, e)
}
