//! Real-symplectic linear algebra on phase space.
//!
//! Phase-space coordinates are ordered (x_1..x_d, y_1..y_d), so the canonical
//! symplectic form is J = [[0, I], [-I, 0]] and mode j occupies coordinates
//! (j, d + j). Complex vectors z = x + iy in C^d are identified with (x; y)
//! in R^{2d}; a real-linear map A z = A1 z + A2 conj(z) embeds into a real
//! 2d x 2d matrix through [`embed_real_linear`].

use crate::error::{GqmsError, Result};
use crate::linalg::{self, CMatrix, RMatrix, RVector};

/// Real 2d x 2d matrix acting on phase space.
pub type PhaseMatrix = RMatrix;

/// Mode count of a phase matrix, rejecting odd or empty dimensions.
pub fn mode_count(m: &PhaseMatrix) -> Result<usize> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n || !n.is_multiple_of(2) {
        return Err(GqmsError::Shape(format!(
            "phase matrix must be square with even dimension, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(n / 2)
}

/// Canonical symplectic form J = [[0, I], [-I, 0]] for d modes.
pub fn standard_form(d: usize) -> Result<PhaseMatrix> {
    if d == 0 {
        return Err(GqmsError::Shape("mode count must be at least 1".into()));
    }
    let mut j = RMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        j[(k, d + k)] = 1.0;
        j[(d + k, k)] = -1.0;
    }
    Ok(j)
}

/// Tests M' J M = J at relative tolerance tol * (1 + |M|^2).
pub fn is_symplectic(m: &PhaseMatrix, tol: f64) -> Result<bool> {
    let d = mode_count(m)?;
    let j = standard_form(d)?;
    let nm = linalg::fro(m);
    let residual = linalg::fro(&(m.transpose() * &j * m - &j));
    Ok(residual <= tol * (1.0 + nm * nm))
}

/// Tests membership in the symplectic Lie algebra: Z' J + J Z = 0 at relative
/// tolerance tol * (1 + |Z|).
pub fn is_hamiltonian_generator(z: &PhaseMatrix, tol: f64) -> Result<bool> {
    let d = mode_count(z)?;
    let j = standard_form(d)?;
    let residual = linalg::fro(&(z.transpose() * &j + &j * z));
    Ok(residual <= tol * (1.0 + linalg::fro(z)))
}

/// Inverse of a symplectic matrix, using M^{-1} = -J M' J.
pub fn symplectic_inverse(m: &PhaseMatrix) -> Result<PhaseMatrix> {
    let d = mode_count(m)?;
    let j = standard_form(d)?;
    Ok(-(&j * m.transpose() * &j))
}

/// A real-linear operator on C^d in the split form A z = A1 z + A2 conj(z).
#[derive(Debug, Clone)]
pub struct RealLinearOp {
    pub a1: CMatrix,
    pub a2: CMatrix,
}

impl RealLinearOp {
    pub fn new(a1: CMatrix, a2: CMatrix) -> Result<Self> {
        if a1.nrows() != a1.ncols() || a1.shape() != a2.shape() {
            return Err(GqmsError::Shape(format!(
                "real-linear op parts must be square of equal size, got {:?} and {:?}",
                a1.shape(),
                a2.shape()
            )));
        }
        linalg::ensure_finite_c(&a1, "A1")?;
        linalg::ensure_finite_c(&a2, "A2")?;
        Ok(Self { a1, a2 })
    }

    /// Composition (self after other) on the (A1, A2) representation:
    /// C1 = A1 B1 + A2 conj(B2), C2 = A1 B2 + A2 conj(B1).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.a1.shape() != other.a1.shape() {
            return Err(GqmsError::Shape(
                "composing real-linear ops of different size".into(),
            ));
        }
        Self::new(
            &self.a1 * &other.a1 + &self.a2 * other.a2.conjugate(),
            &self.a1 * &other.a2 + &self.a2 * other.a1.conjugate(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.a1.shape() != other.a1.shape() {
            return Err(GqmsError::Shape(
                "adding real-linear ops of different size".into(),
            ));
        }
        Self::new(&self.a1 + &other.a1, &self.a2 + &other.a2)
    }
}

/// Real 2d x 2d representation of a real-linear operator:
/// [[Re A1 + Re A2, Im A2 - Im A1], [Im A1 + Im A2, Re A1 - Re A2]].
pub fn embed_real_linear(op: &RealLinearOp) -> PhaseMatrix {
    let d = op.a1.nrows();
    let mut m = RMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let a1 = op.a1[(i, j)];
            let a2 = op.a2[(i, j)];
            m[(i, j)] = a1.re + a2.re;
            m[(i, j + d)] = a2.im - a1.im;
            m[(i + d, j)] = a1.im + a2.im;
            m[(i + d, j + d)] = a1.re - a2.re;
        }
    }
    m
}

/// Real embedding of a complex vector: z = x + iy -> (x; y).
pub fn embed_vector(z: &nalgebra::DVector<linalg::C64>) -> RVector {
    let d = z.len();
    let mut v = RVector::zeros(2 * d);
    for k in 0..d {
        v[k] = z[k].re;
        v[d + k] = z[k].im;
    }
    v
}

/// Williamson normal form of a symmetric positive-definite covariance:
/// Sigma = M' D M with M symplectic and D = diag(nu_1..nu_d, nu_1..nu_d).
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition {
    pub m: PhaseMatrix,
    pub d: PhaseMatrix,
    /// Symplectic eigenvalues, descending, one per mode.
    pub symplectic_eigenvalues: Vec<f64>,
}

/// Computes the Williamson decomposition.
///
/// Route: S = Sigma^{1/2}; K = S J S is skew-symmetric and invertible; its
/// real Schur form under an orthogonal Q is block diagonal with 2x2 blocks
/// nu_j [[0, 1], [-1, 0]] (skewness is preserved by the orthogonal
/// congruence, so the quasi-triangular form has zero diagonal and paired
/// off-diagonal entries). With D read off the blocks,
/// M = P D_int^{-1/2} Q' S is symplectic and reconstructs Sigma = M' D M,
/// where P reorders the interleaved mode pairs into (x.., y..) layout.
pub fn williamson(sigma: &PhaseMatrix, tol: f64) -> Result<WilliamsonDecomposition> {
    let d = mode_count(sigma)?;
    let n = 2 * d;
    let sym = linalg::symmetrize_checked(sigma, tol.max(1e-7))?;
    let eigs = linalg::sym_eigenvalues(&sym);
    let min_eig = eigs[0];
    if min_eig <= tol * linalg::fro(&sym) {
        return Err(GqmsError::NotPositiveDefinite { min_eig });
    }

    let s = linalg::spd_sqrt(&sym, tol)?;
    let j = standard_form(d)?;
    let k0 = &s * &j * &s;
    let k = (&k0 - k0.transpose()).scale(0.5);

    let (q, _) = k.clone().schur().unpack();
    let mut q = q;
    // Skewness of Q' K Q is exact by construction; read the 2x2 blocks.
    let t = q.transpose() * &k * &q;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(d);
    for block in 0..d {
        let i = 2 * block;
        let off = t[(i, i + 1)];
        if off.abs() <= tol * linalg::fro(&k) {
            return Err(GqmsError::Domain(
                "williamson: degenerate 2x2 block in the canonical form of S J S".into(),
            ));
        }
        if off < 0.0 {
            // Flip the orientation of the block so it matches nu * [[0,1],[-1,0]].
            let col = -q.column(i + 1);
            q.set_column(i + 1, &col);
        }
        pairs.push((off.abs(), block));
    }
    // Descending symplectic eigenvalues, stable over the original block order.
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let mut q_sorted = RMatrix::zeros(n, n);
    let mut nus = Vec::with_capacity(d);
    for (slot, (nu, block)) in pairs.iter().enumerate() {
        q_sorted.set_column(2 * slot, &q.column(2 * block));
        q_sorted.set_column(2 * slot + 1, &q.column(2 * block + 1));
        nus.push(*nu);
    }

    // M = P D_int^{-1/2} Q' S with P: interleaved (x_j, y_j) -> (x.., y..).
    let mut m = RMatrix::zeros(n, n);
    let qt_s = q_sorted.transpose() * &s;
    for mode in 0..d {
        let w = 1.0 / nus[mode].sqrt();
        for c in 0..n {
            m[(mode, c)] = w * qt_s[(2 * mode, c)];
            m[(d + mode, c)] = w * qt_s[(2 * mode + 1, c)];
        }
    }

    let mut dm = RMatrix::zeros(n, n);
    for mode in 0..d {
        dm[(mode, mode)] = nus[mode];
        dm[(d + mode, d + mode)] = nus[mode];
    }

    let recon = linalg::fro(&(m.transpose() * &dm * &m - &sym));
    if recon > 1e-8 * linalg::fro(&sym) {
        return Err(GqmsError::Domain(format!(
            "williamson: reconstruction residual {recon:.3e} exceeds tolerance"
        )));
    }
    if !is_symplectic(&m, 1e-9)? {
        return Err(GqmsError::NotSymplectic {
            residual: linalg::fro(&(m.transpose() * &j * &m - &j)),
        });
    }

    Ok(WilliamsonDecomposition {
        m,
        d: dm,
        symplectic_eigenvalues: nus,
    })
}
