//! Dense linear-algebra helpers shared across the crate.
//!
//! Everything here works at desk scale (matrix dimensions in the tens), so the
//! simplest numerically sound route is preferred throughout: SVD for rank and
//! subspace questions, symmetric eigendecompositions for Hermitian spectra,
//! and the vectorized (Kronecker) linear system for Lyapunov equations.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{GqmsError, Result};

pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;
pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative tolerance for "equals zero" decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative cutoff for singular values in rank decisions.
pub const RANK_CUT: f64 = 1e-9;

/// Relative tolerance for locating eigenvalues on the imaginary axis and for
/// clustering nearby eigenvalues.
///
/// This is deliberately looser than [`DEFAULT_TOL`]: an eigenvalue carrying a
/// nontrivial Jordan block splits under a backward perturbation of size eps
/// by O(sqrt(eps)), so on-axis decisions made at 1e-9 would misread rounded
/// defective data. Rank decisions are perturbation-stable and keep the tight
/// cutoff.
pub const EIG_CLASS_TOL: f64 = 1e-6;

pub fn fro(m: &RMatrix) -> f64 {
    m.norm()
}

pub fn fro_c(m: &CMatrix) -> f64 {
    m.norm()
}

/// Checks all entries finite.
pub fn ensure_finite(m: &RMatrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GqmsError::Domain(format!(
            "{what} contains non-finite entries"
        )))
    }
}

pub fn ensure_finite_c(m: &CMatrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        Ok(())
    } else {
        Err(GqmsError::Domain(format!(
            "{what} contains non-finite entries"
        )))
    }
}

/// Symmetry check with exact symmetrization on success.
pub fn symmetrize_checked(m: &RMatrix, tol: f64) -> Result<RMatrix> {
    let residual = fro(&(m - m.transpose()));
    if residual > tol * (1.0 + fro(m)) {
        return Err(GqmsError::NotSymmetric { residual });
    }
    Ok((m + m.transpose()).scale(0.5))
}

/// Hermitian check with exact Hermitization on success.
pub fn hermitize_checked(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let residual = fro_c(&(m - m.adjoint()));
    if residual > tol * (1.0 + fro_c(m)) {
        return Err(GqmsError::NotHermitian { residual });
    }
    Ok((m + m.adjoint()).scale(0.5))
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Real symmetric eigenvalues, ascending.
pub fn sym_eigenvalues(m: &RMatrix) -> RVector {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    RVector::from_vec(ev)
}

/// Eigenvalues of a complex Hermitian matrix, ascending, computed through the
/// real symmetric embedding [[X, -Y], [Y, X]] (each eigenvalue doubled there).
pub fn hermitian_eigenvalues(h: &CMatrix) -> RVector {
    let n = h.nrows();
    let mut e = RMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let x = h[(i, j)].re;
            let y = h[(i, j)].im;
            e[(i, j)] = x;
            e[(i + n, j + n)] = x;
            e[(i, j + n)] = -y;
            e[(i + n, j)] = y;
        }
    }
    let ev = sym_eigenvalues(&((&e + e.transpose()).scale(0.5)));
    // Keep one copy of each doubled eigenvalue.
    RVector::from_iterator(n, (0..n).map(|k| ev[2 * k]))
}

pub fn hermitian_min_eig(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).min()
}

/// One-sided Jacobi (Hestenes) singular value decomposition m = U diag(s) V'.
///
/// Orthogonalizes the columns by plane rotations until convergence; singular
/// values come out with high relative accuracy and the singular vectors stay
/// numerically orthogonal, which the rank/subspace decisions downstream rely
/// on. Sorting is descending; U has a zero column wherever the singular value
/// vanishes.
pub struct Svd {
    pub u: RMatrix,
    pub sigma: Vec<f64>,
    pub v: RMatrix,
}

pub fn jacobi_svd(m: &RMatrix) -> Svd {
    let c = m.ncols();
    let mut a = m.clone();
    let mut v = RMatrix::identity(c, c);
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..c {
            for j in (i + 1)..c {
                let ai = a.column(i);
                let aj = a.column(j);
                let alpha = ai.dot(&ai);
                let beta = aj.dot(&aj);
                let gamma = ai.dot(&aj);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = cos * t;
                for r in 0..a.nrows() {
                    let x = a[(r, i)];
                    let y = a[(r, j)];
                    a[(r, i)] = cos * x - sin * y;
                    a[(r, j)] = sin * x + cos * y;
                }
                for r in 0..c {
                    let x = v[(r, i)];
                    let y = v[(r, j)];
                    v[(r, i)] = cos * x - sin * y;
                    v[(r, j)] = sin * x + cos * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..c).collect();
    let norms: Vec<f64> = (0..c).map(|k| a.column(k).norm()).collect();
    order.sort_by(|&p, &q| norms[q].partial_cmp(&norms[p]).unwrap().then(p.cmp(&q)));
    let mut u = RMatrix::zeros(m.nrows(), c);
    let mut v_sorted = RMatrix::zeros(c, c);
    let mut sigma = Vec::with_capacity(c);
    for (slot, &k) in order.iter().enumerate() {
        sigma.push(norms[k]);
        if norms[k] > 0.0 {
            u.set_column(slot, &(a.column(k) / norms[k]));
        }
        v_sorted.set_column(slot, &v.column(k));
    }
    Svd {
        u,
        sigma,
        v: v_sorted,
    }
}

pub struct SvdC {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

pub fn jacobi_svd_c(m: &CMatrix) -> SvdC {
    let c = m.ncols();
    let mut a = m.clone();
    let mut v = CMatrix::identity(c, c);
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..c {
            for j in (i + 1)..c {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for r in 0..a.nrows() {
                    alpha += a[(r, i)].norm_sqr();
                    beta += a[(r, j)].norm_sqr();
                    gamma += a[(r, i)].conj() * a[(r, j)];
                }
                let gnorm = gamma.norm();
                if gnorm <= eps * (alpha * beta).sqrt() || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                rotated = true;
                // Phase-align column j so the coupling becomes real, then
                // rotate as in the real case; the phase folds into V.
                let phase = gamma / gnorm;
                let zeta = (beta - alpha) / (2.0 * gnorm);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = cos * t;
                let pc = phase.conj();
                for r in 0..a.nrows() {
                    let x = a[(r, i)];
                    let y = a[(r, j)] * pc;
                    a[(r, i)] = x * cos - y * sin;
                    a[(r, j)] = x * sin + y * cos;
                }
                for r in 0..c {
                    let x = v[(r, i)];
                    let y = v[(r, j)] * pc;
                    v[(r, i)] = x * cos - y * sin;
                    v[(r, j)] = x * sin + y * cos;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..c).collect();
    let norms: Vec<f64> = (0..c).map(|k| a.column(k).norm()).collect();
    order.sort_by(|&p, &q| norms[q].partial_cmp(&norms[p]).unwrap().then(p.cmp(&q)));
    let mut u = CMatrix::zeros(m.nrows(), c);
    let mut v_sorted = CMatrix::zeros(c, c);
    let mut sigma = Vec::with_capacity(c);
    for (slot, &k) in order.iter().enumerate() {
        sigma.push(norms[k]);
        if norms[k] > 0.0 {
            u.set_column(slot, &(a.column(k).map(|x| x / C64::new(norms[k], 0.0))));
        }
        v_sorted.set_column(slot, &v.column(k));
    }
    SvdC {
        u,
        sigma,
        v: v_sorted,
    }
}

fn rank_from_sigma(sigma: &[f64], rel_cut: f64) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel_cut * smax).count()
}

/// Orthonormal basis of the right null space (columns), singular values below
/// rel_cut * sigma_max counted as zero.
pub fn kernel(m: &RMatrix, rel_cut: f64) -> RMatrix {
    let n = m.ncols();
    if m.nrows() == 0 || fro(m) == 0.0 {
        return RMatrix::identity(n, n);
    }
    let svd = jacobi_svd(m);
    let r = rank_from_sigma(&svd.sigma, rel_cut);
    svd.v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the column space.
pub fn range(m: &RMatrix, rel_cut: f64) -> RMatrix {
    if m.nrows() == 0 || fro(m) == 0.0 {
        return RMatrix::zeros(m.nrows(), 0);
    }
    let svd = jacobi_svd(m);
    let r = rank_from_sigma(&svd.sigma, rel_cut);
    svd.u.columns(0, r).into_owned()
}

pub fn rank(m: &RMatrix, rel_cut: f64) -> usize {
    if fro(m) == 0.0 {
        return 0;
    }
    rank_from_sigma(&jacobi_svd(m).sigma, rel_cut)
}

pub fn rank_c(m: &CMatrix, rel_cut: f64) -> usize {
    if fro_c(m) == 0.0 {
        return 0;
    }
    rank_from_sigma(&jacobi_svd_c(m).sigma, rel_cut)
}

/// Orthonormal basis of the right null space of a complex matrix.
pub fn kernel_c(m: &CMatrix, rel_cut: f64) -> CMatrix {
    let n = m.ncols();
    if m.nrows() == 0 || fro_c(m) == 0.0 {
        return CMatrix::identity(n, n);
    }
    let svd = jacobi_svd_c(m);
    let r = rank_from_sigma(&svd.sigma, rel_cut);
    svd.v.columns(r, n - r).into_owned()
}

/// Rank with an absolute singular-value threshold.
pub fn rank_c_abs(m: &CMatrix, abs_cut: f64) -> usize {
    if fro_c(m) == 0.0 {
        return 0;
    }
    jacobi_svd_c(m)
        .sigma
        .iter()
        .filter(|&&s| s > abs_cut)
        .count()
}

/// Null-space basis with an absolute singular-value threshold.
pub fn kernel_c_abs(m: &CMatrix, abs_cut: f64) -> CMatrix {
    let n = m.ncols();
    if m.nrows() == 0 || fro_c(m) == 0.0 {
        return CMatrix::identity(n, n);
    }
    let svd = jacobi_svd_c(m);
    let r = svd.sigma.iter().filter(|&&s| s > abs_cut).count();
    svd.v.columns(r, n - r).into_owned()
}

/// Real-matrix variant of [`kernel_c_abs`].
pub fn kernel_abs(m: &RMatrix, abs_cut: f64) -> RMatrix {
    let n = m.ncols();
    if m.nrows() == 0 || fro(m) == 0.0 {
        return RMatrix::identity(n, n);
    }
    let svd = jacobi_svd(m);
    let r = svd.sigma.iter().filter(|&&s| s > abs_cut).count();
    svd.v.columns(r, n - r).into_owned()
}

/// Column-space basis with an absolute singular-value threshold.
pub fn range_abs(m: &RMatrix, abs_cut: f64) -> RMatrix {
    if m.nrows() == 0 || fro(m) == 0.0 {
        return RMatrix::zeros(m.nrows(), 0);
    }
    let svd = jacobi_svd(m);
    let r = svd.sigma.iter().filter(|&&s| s > abs_cut).count();
    svd.u.columns(0, r).into_owned()
}

pub fn from_columns(nrows: usize, cols: &[RVector]) -> RMatrix {
    let mut m = RMatrix::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Kernel of the vertically stacked system { m_k x = 0 }, each block
/// normalized so no single block dominates the cutoff.
pub fn stacked_kernel(blocks: &[RMatrix], rel_cut: f64) -> RMatrix {
    let n = blocks[0].ncols();
    let mut rows: Vec<RMatrix> = Vec::new();
    for b in blocks {
        let s = fro(b);
        if s > 0.0 {
            rows.push(b.unscale(s));
        }
    }
    if rows.is_empty() {
        return RMatrix::identity(n, n);
    }
    let total: usize = rows.iter().map(|b| b.nrows()).sum();
    let mut stack = RMatrix::zeros(total, n);
    let mut at = 0;
    for b in &rows {
        stack.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    kernel(&stack, rel_cut)
}

pub fn stacked_kernel_c(blocks: &[CMatrix], rel_cut: f64) -> CMatrix {
    let n = blocks[0].ncols();
    let mut rows: Vec<CMatrix> = Vec::new();
    for b in blocks {
        let s = fro_c(b);
        if s > 0.0 {
            rows.push(b.unscale(s));
        }
    }
    if rows.is_empty() {
        return CMatrix::identity(n, n);
    }
    let total: usize = rows.iter().map(|b| b.nrows()).sum();
    let mut stack = CMatrix::zeros(total, n);
    let mut at = 0;
    for b in &rows {
        stack.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    kernel_c(&stack, rel_cut)
}

/// Symmetric positive-semidefinite square root; rejects matrices with
/// eigenvalues below -tol * scale.
pub fn spd_sqrt(m: &RMatrix, tol: f64) -> Result<RMatrix> {
    let sym = symmetrize_checked(m, tol.max(1e-7))?;
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    let min_eig = eig.eigenvalues.min();
    if min_eig < -tol * scale {
        return Err(GqmsError::NotPositiveSemidefinite { min_eig });
    }
    let d = RVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
    );
    Ok(&eig.eigenvectors * RMatrix::from_diagonal(&d) * eig.eigenvectors.transpose())
}

/// Solves the continuous Lyapunov equation
///     a' x + x a + q = 0
/// (a' is the transpose of `a`) through the vectorized linear system.
pub fn solve_lyapunov(a: &RMatrix, q: &RMatrix) -> Result<RMatrix> {
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(GqmsError::Shape(format!(
            "lyapunov: a is {}x{}, q is {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    if n == 0 {
        return Ok(RMatrix::zeros(0, 0));
    }
    let at = a.transpose();
    let id = RMatrix::identity(n, n);
    // vec(a' x) = (I kron a') vec x, vec(x a) = (a' kron I) vec x.
    let big = id.kronecker(&at) + at.kronecker(&id);
    let rhs = RVector::from_column_slice(q.as_slice()).scale(-1.0);
    let sol = big.lu().solve(&rhs).ok_or(GqmsError::SingularSolve {
        what: "continuous Lyapunov equation",
    })?;
    let x = RMatrix::from_column_slice(n, n, sol.as_slice());
    Ok((&x + x.transpose()).scale(0.5))
}

/// Moore-Penrose pseudoinverse with relative cutoff.
pub fn pinv(m: &RMatrix, rel_cut: f64) -> RMatrix {
    if fro(m) == 0.0 {
        return RMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = jacobi_svd(m);
    let cut = rel_cut * svd.sigma[0];
    let d = RVector::from_iterator(
        svd.sigma.len(),
        svd.sigma
            .iter()
            .map(|&s| if s > cut { 1.0 / s } else { 0.0 }),
    );
    &svd.v * RMatrix::from_diagonal(&d) * svd.u.transpose()
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa(m: &RMatrix) -> f64 {
    if m.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Residual norm of the subspace containment span(inner) within span(outer);
/// both arguments must have orthonormal columns.
pub fn containment_residual(inner: &RMatrix, outer: &RMatrix) -> f64 {
    if inner.ncols() == 0 {
        return 0.0;
    }
    let proj = outer * (outer.transpose() * inner);
    fro(&(inner - proj))
}

/// Relative rounding of a scale factor: 1 + Frobenius norm.
pub fn scale_of(m: &RMatrix) -> f64 {
    1.0 + fro(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_of_singular_matrix() {
        let m = RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let k = kernel(&m, RANK_CUT);
        assert_eq!(k.ncols(), 1);
        assert_relative_eq!(k[(1, 0)].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kernel_of_zero_matrix_is_everything() {
        let m = RMatrix::zeros(3, 3);
        assert_eq!(kernel(&m, RANK_CUT).ncols(), 3);
    }

    #[test]
    fn lyapunov_scalar_case() {
        // -2 sigma + 2 = 0 -> sigma = 1 on each diagonal entry.
        let a = RMatrix::from_diagonal_element(2, 2, -1.0);
        let q = RMatrix::from_diagonal_element(2, 2, 2.0);
        let x = solve_lyapunov(&a, &q).unwrap();
        assert_relative_eq!(x[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[(1, 1)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_residual_random() {
        let a = RMatrix::from_row_slice(3, 3, &[-2.0, 1.0, 0.3, 0.0, -1.0, 0.5, -0.2, 0.1, -3.0]);
        let q = {
            let r = RMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, 2.0, -0.1, 0.0, -0.1, 0.5]);
            &r * r.transpose()
        };
        let x = solve_lyapunov(&a, &q).unwrap();
        let res = a.transpose() * &x + &x * &a + &q;
        assert!(fro(&res) <= 1e-12 * (fro(&q) + fro(&a) * fro(&x)));
    }

    #[test]
    fn hermitian_eigenvalues_match_known() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(2.0, 0.0),
            ],
        );
        let ev = hermitian_eigenvalues(&h);
        assert_relative_eq!(ev[0], (3.0 - 5.0f64.sqrt()) / 2.0, epsilon = 1e-10);
        assert_relative_eq!(ev[1], (3.0 + 5.0f64.sqrt()) / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn spd_sqrt_squares_back() {
        let m = RMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = spd_sqrt(&m, DEFAULT_TOL).unwrap();
        assert!(fro(&(&s * &s - &m)) < 1e-12);
    }

    #[test]
    fn spd_sqrt_rejects_indefinite() {
        let m = RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(spd_sqrt(&m, DEFAULT_TOL).is_err());
    }
}
