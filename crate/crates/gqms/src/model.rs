//! Phase-space data of a Gaussian quantum Markov semigroup.
//!
//! A semigroup is specified either by GKSL coefficients (quadratic Hamiltonian
//! plus linear jump operators) or directly by its drift matrix Z, diffusion
//! matrix C and displacement vector zeta. [`assemble`] produces the latter
//! from the former; the admissibility constraint C + i(Z'J + JZ) >= 0 is what
//! keeps the evolved covariances physical.

use crate::error::{GqmsError, Result};
use crate::linalg::{self, CMatrix, CVector, RVector};
use crate::symplectic::{
    self, embed_real_linear, embed_vector, standard_form, PhaseMatrix, RealLinearOp,
};

/// GKSL coefficient data: Hamiltonian part (Omega Hermitian, kappa symmetric,
/// zeta linear drive) and jump-operator part (U, V of shape m x d, m <= 2d).
#[derive(Debug, Clone)]
pub struct GkslSpec {
    pub omega: CMatrix,
    pub kappa: CMatrix,
    pub zeta: CVector,
    pub u: CMatrix,
    pub v: CMatrix,
}

impl GkslSpec {
    /// Validates shapes and Hermiticity/symmetry at tolerance, then stores the
    /// exactly symmetrized coefficients.
    pub fn new(
        omega: CMatrix,
        kappa: CMatrix,
        zeta: CVector,
        u: CMatrix,
        v: CMatrix,
        tol: f64,
    ) -> Result<Self> {
        let d = omega.nrows();
        if d == 0 {
            return Err(GqmsError::Shape("mode count must be at least 1".into()));
        }
        if omega.ncols() != d || kappa.shape() != (d, d) || zeta.len() != d {
            return Err(GqmsError::Shape(
                "Omega, kappa, zeta must share the mode dimension".into(),
            ));
        }
        let m = u.nrows();
        if u.ncols() != d || v.shape() != (m, d) {
            return Err(GqmsError::Shape(
                "U and V must be m x d with equal m".into(),
            ));
        }
        if m > 2 * d {
            return Err(GqmsError::Shape(format!(
                "at most 2d = {} jump operators are supported, got {m}",
                2 * d
            )));
        }
        linalg::ensure_finite_c(&omega, "Omega")?;
        linalg::ensure_finite_c(&kappa, "kappa")?;
        linalg::ensure_finite_c(&u, "U")?;
        linalg::ensure_finite_c(&v, "V")?;
        let omega = linalg::hermitize_checked(&omega, tol)?;
        let kappa_res = linalg::fro_c(&(&kappa - kappa.transpose()));
        if kappa_res > tol * (1.0 + linalg::fro_c(&kappa)) {
            return Err(GqmsError::NotHermitian {
                residual: kappa_res,
            });
        }
        let kappa = (&kappa + kappa.transpose()).scale(0.5);
        Ok(Self {
            omega,
            kappa,
            zeta,
            u,
            v,
        })
    }

    pub fn modes(&self) -> usize {
        self.omega.nrows()
    }
}

/// Drift Z, diffusion C and displacement zeta on phase space R^{2d}.
#[derive(Debug, Clone)]
pub struct DriftDiffusion {
    pub z: PhaseMatrix,
    pub c: PhaseMatrix,
    pub zeta: RVector,
}

impl DriftDiffusion {
    /// Validates shapes, symmetry and positive semidefiniteness of C.
    pub fn new(z: PhaseMatrix, c: PhaseMatrix, zeta: RVector, tol: f64) -> Result<Self> {
        let d = symplectic::mode_count(&z)?;
        if c.shape() != (2 * d, 2 * d) || zeta.len() != 2 * d {
            return Err(GqmsError::Shape(format!(
                "C must be {n}x{n} and zeta of length {n}",
                n = 2 * d
            )));
        }
        linalg::ensure_finite(&z, "Z")?;
        linalg::ensure_finite(&c, "C")?;
        if !zeta.iter().all(|x| x.is_finite()) {
            return Err(GqmsError::Domain("zeta contains non-finite entries".into()));
        }
        let c = linalg::symmetrize_checked(&c, tol.max(1e-7))?;
        let min_eig = linalg::sym_eigenvalues(&c)[0];
        if min_eig < -tol * linalg::scale_of(&c) {
            return Err(GqmsError::NotPositiveSemidefinite { min_eig });
        }
        Ok(Self { z, c, zeta })
    }

    pub fn modes(&self) -> usize {
        self.z.nrows() / 2
    }

    /// The Hermitian matrix C + i(Z'J + JZ) whose positivity is the
    /// admissibility constraint.
    pub fn admissibility_matrix(&self) -> CMatrix {
        let j = standard_form(self.modes()).expect("valid mode count");
        let skew = self.z.transpose() * &j + &j * &self.z;
        let mut h = linalg::to_complex(&self.c);
        for i in 0..h.nrows() {
            for jx in 0..h.ncols() {
                h[(i, jx)] += linalg::C64::new(0.0, skew[(i, jx)]);
            }
        }
        h
    }
}

/// Assembles (Z, C, zeta) from GKSL coefficients:
///   Z z = [(U'conj(U) - V'conj(V))/2 + i Omega] z + [(U'V - V'U)/2 + i kappa] conj(z)
///   C z = (U'conj(U) + V'conj(V)) z + (U'V + V'U) conj(z)
/// with zeta embedded as (Re zeta; Im zeta).
pub fn assemble(spec: &GkslSpec) -> Result<DriftDiffusion> {
    let ut = spec.u.transpose();
    let vt = spec.v.transpose();
    let uu = &ut * spec.u.conjugate();
    let vv = &vt * spec.v.conjugate();
    let uv = &ut * &spec.v;
    let vu = &vt * &spec.u;
    let i = linalg::C64::new(0.0, 1.0);

    let z_op = RealLinearOp::new(
        (&uu - &vv).scale(0.5) + spec.omega.map(|x| x * i),
        (&uv - &vu).scale(0.5) + spec.kappa.map(|x| x * i),
    )?;
    let c_op = RealLinearOp::new(&uu + &vv, &uv + &vu)?;

    let z = embed_real_linear(&z_op);
    let c = embed_real_linear(&c_op);
    let zeta = embed_vector(&spec.zeta);

    let dd = DriftDiffusion::new(z, c, zeta, 1e-7)?;
    // Guaranteed by construction; checked so rounding pathologies surface here.
    let min_eig = linalg::hermitian_min_eig(&dd.admissibility_matrix());
    let scale = linalg::scale_of(&dd.c) + 2.0 * linalg::fro(&dd.z);
    if min_eig < -1e-9 * scale {
        return Err(GqmsError::NotAdmissible { min_eig });
    }
    Ok(dd)
}

/// True iff the smallest eigenvalue of C + i(Z'J + JZ) is at least
/// -tol * (1 + |C| + 2|Z|).
pub fn validate_admissibility(dd: &DriftDiffusion, tol: f64) -> bool {
    let min_eig = linalg::hermitian_min_eig(&dd.admissibility_matrix());
    let scale = linalg::scale_of(&dd.c) + 2.0 * linalg::fro(&dd.z);
    min_eig >= -tol * scale
}

/// Conjugates the semigroup data by a symplectic M:
/// (M Z M^{-1}, M^{-T} C M^{-1}, M^{-T} zeta).
pub fn conjugate_symplectic(dd: &DriftDiffusion, m: &PhaseMatrix) -> Result<DriftDiffusion> {
    if m.shape() != dd.z.shape() {
        return Err(GqmsError::Shape(
            "conjugating matrix has wrong dimension".into(),
        ));
    }
    if !symplectic::is_symplectic(m, 1e-8)? {
        let d = dd.modes();
        let j = standard_form(d)?;
        return Err(GqmsError::NotSymplectic {
            residual: linalg::fro(&(m.transpose() * &j * m - &j)),
        });
    }
    let m_inv = symplectic::symplectic_inverse(m)?;
    let m_inv_t = m_inv.transpose();
    DriftDiffusion::new(
        m * &dd.z * &m_inv,
        &m_inv_t * &dd.c * &m_inv,
        &m_inv_t * &dd.zeta,
        1e-7,
    )
}

/// Conjugates by the Weyl displacement w: Z and C unchanged,
/// zeta -> zeta - 2 Z' w.
pub fn displace_weyl(dd: &DriftDiffusion, w: &RVector) -> Result<DriftDiffusion> {
    if w.len() != dd.zeta.len() {
        return Err(GqmsError::Shape(
            "displacement vector has wrong length".into(),
        ));
    }
    Ok(DriftDiffusion {
        z: dd.z.clone(),
        c: dd.c.clone(),
        zeta: &dd.zeta - (dd.z.transpose() * w).scale(2.0),
    })
}
