//! Spectral classification of the drift matrix and the invariant splitting
//! into the decoherence-free subspace V0 (imaginary spectrum) and the stable
//! subspace V- (spectrum with negative real part).

use nalgebra::Complex;

use crate::error::{GqmsError, Result};
use crate::linalg::{self, CMatrix, RMatrix, RVector, C64, EIG_CLASS_TOL, RANK_CUT};
use crate::symplectic::{self, PhaseMatrix};

/// Spectrum of Z partitioned by the sign of the real part.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<C64>,
    pub class_negative: Vec<usize>,
    pub class_imaginary: Vec<usize>,
    pub class_positive: Vec<usize>,
    pub satisfies_h2: bool,
    pub imaginary_semisimple: bool,
}

/// Absolute tolerance used for on-axis decisions and eigenvalue clustering.
pub fn class_tolerance(z: &RMatrix, tol: f64) -> f64 {
    tol.max(EIG_CLASS_TOL) * (1.0 + linalg::fro(z))
}

/// Classifies Sp(Z) against the splitting {Re < 0} u {Re = 0} u {Re > 0} and
/// checks semisimplicity of the on-axis eigenvalues (geometric multiplicity
/// from a rank computation equals the cluster size).
pub fn classify_spectrum(z: &PhaseMatrix, tol: f64) -> Result<SpectrumReport> {
    symplectic::mode_count(z)?;
    linalg::ensure_finite(z, "Z")?;
    let eigenvalues: Vec<C64> = z.complex_eigenvalues().iter().copied().collect();
    let ctol = class_tolerance(z, tol);

    let mut class_negative = Vec::new();
    let mut class_imaginary = Vec::new();
    let mut class_positive = Vec::new();
    for (k, l) in eigenvalues.iter().enumerate() {
        if l.re.abs() <= ctol {
            class_imaginary.push(k);
        } else if l.re < 0.0 {
            class_negative.push(k);
        } else {
            class_positive.push(k);
        }
    }
    let satisfies_h2 = class_positive.is_empty();

    let clusters = cluster_imaginary(&eigenvalues, &class_imaginary, ctol);
    let n = z.nrows();
    let zc = linalg::to_complex(z);
    let mut imaginary_semisimple = true;
    for cl in &clusters {
        if cl.phi < 0.0 {
            continue; // conjugate cluster carries the same structure
        }
        // The kernel cutoff matches the clustering tolerance: eigenvalues
        // merged into one cluster must also merge into one kernel, otherwise
        // a pair of nearby frequencies would masquerade as a Jordan block.
        let shifted = &zc - CMatrix::identity(n, n).map(|e| e * C64::new(0.0, cl.phi));
        let geometric = n - linalg::rank_c_abs(&shifted, ctol);
        if geometric != cl.members.len() {
            imaginary_semisimple = false;
            break;
        }
    }

    Ok(SpectrumReport {
        eigenvalues,
        class_negative,
        class_imaginary,
        class_positive,
        satisfies_h2,
        imaginary_semisimple,
    })
}

#[derive(Debug, Clone)]
pub(crate) struct ImaginaryCluster {
    /// Signed cluster frequency (mean imaginary part, snapped to 0 when the
    /// whole cluster sits within tolerance of the origin).
    pub phi: f64,
    pub members: Vec<usize>,
}

fn cluster_imaginary(eigenvalues: &[C64], imaginary: &[usize], ctol: f64) -> Vec<ImaginaryCluster> {
    let mut idx: Vec<usize> = imaginary.to_vec();
    idx.sort_by(|&a, &b| eigenvalues[a].im.partial_cmp(&eigenvalues[b].im).unwrap());
    let mut clusters: Vec<ImaginaryCluster> = Vec::new();
    for k in idx {
        let im = eigenvalues[k].im;
        match clusters.last_mut() {
            Some(cl) if (im - cl.phi).abs() <= ctol => {
                cl.members.push(k);
                // Running mean keeps the representative centered.
                let s: f64 = cl.members.iter().map(|&i| eigenvalues[i].im).sum();
                cl.phi = s / cl.members.len() as f64;
            }
            _ => clusters.push(ImaginaryCluster {
                phi: im,
                members: vec![k],
            }),
        }
    }
    for cl in &mut clusters {
        if cl.phi.abs() <= ctol {
            cl.phi = 0.0;
        }
    }
    clusters
}

/// Per-frequency eigenstructure on the imaginary axis: the complex kernel of
/// (Z - i phi) for phi > 0 and the real kernel of Z for phi = 0.
#[derive(Debug, Clone)]
pub(crate) struct ModeCluster {
    pub phi: f64,
    /// Complex kernel basis (orthonormal columns) for phi > 0, empty for phi = 0.
    pub kernel: CMatrix,
    /// Real kernel basis for phi = 0, empty otherwise.
    pub real_kernel: RMatrix,
}

/// Kernels of the positive-frequency clusters plus the zero cluster.
pub(crate) fn imaginary_mode_clusters(z: &PhaseMatrix, tol: f64) -> Result<Vec<ModeCluster>> {
    let report = classify_spectrum(z, tol)?;
    let ctol = class_tolerance(z, tol);
    let clusters = cluster_imaginary(&report.eigenvalues, &report.class_imaginary, ctol);
    let n = z.nrows();
    let zc = linalg::to_complex(z);
    let mut out = Vec::new();
    for cl in clusters {
        if cl.phi < 0.0 {
            continue;
        }
        if cl.phi == 0.0 {
            let k = linalg::kernel_abs(z, ctol);
            out.push(ModeCluster {
                phi: 0.0,
                kernel: CMatrix::zeros(n, 0),
                real_kernel: k,
            });
        } else {
            let shifted = &zc - CMatrix::identity(n, n).map(|e| e * C64::new(0.0, cl.phi));
            let k = linalg::kernel_c_abs(&shifted, ctol);
            out.push(ModeCluster {
                phi: cl.phi,
                kernel: k,
                real_kernel: RMatrix::zeros(n, 0),
            });
        }
    }
    // Descending frequency; deterministic ordering for everything downstream.
    out.sort_by(|a, b| b.phi.partial_cmp(&a.phi).unwrap());
    Ok(out)
}

/// Bases of the splitting R^{2d} = V0 + V- together with the oscillation
/// frequencies carried by V0.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// Orthonormal basis of V0 (columns).
    pub v0_basis: RMatrix,
    /// Orthonormal basis of V- (columns).
    pub vminus_basis: RMatrix,
    /// Non-negative frequencies, one per oscillator pair, descending.
    pub angles: Vec<f64>,
    /// Number of oscillator pairs (= angles.len()).
    pub d0: usize,
}

impl SpectralSplit {
    /// Decomposes z = z0 + zminus along the splitting.
    pub fn split_vector(&self, z: &RVector) -> Result<(RVector, RVector)> {
        let n = z.len();
        let k0 = self.v0_basis.ncols();
        let km = self.vminus_basis.ncols();
        if k0 + km != n {
            return Err(GqmsError::Shape(
                "splitting bases do not span the space".into(),
            ));
        }
        let mut t = RMatrix::zeros(n, n);
        t.columns_mut(0, k0).copy_from(&self.v0_basis);
        t.columns_mut(k0, km).copy_from(&self.vminus_basis);
        let coeff = t.lu().solve(z).ok_or(GqmsError::SingularSolve {
            what: "splitting decomposition",
        })?;
        let z0 = &self.v0_basis * coeff.rows(0, k0);
        let zm = &self.vminus_basis * coeff.rows(k0, km);
        Ok((z0, zm))
    }

    /// Drift restricted to V- in the orthonormal coordinates of vminus_basis.
    pub fn zminus_coords(&self, z: &PhaseMatrix) -> RMatrix {
        self.vminus_basis.transpose() * z * &self.vminus_basis
    }
}

/// Computes the invariant splitting. Requires H2 and semisimple on-axis
/// eigenvalues; V0 collects eigenvector real/imaginary parts per frequency,
/// V- is the range of the real spectral polynomial that annihilates V0.
pub fn invariant_splitting(z: &PhaseMatrix, tol: f64) -> Result<SpectralSplit> {
    let report = classify_spectrum(z, tol)?;
    if !report.satisfies_h2 {
        return Err(GqmsError::Hypothesis(
            "H2: Sp(Z) must have no positive real part",
        ));
    }
    if !report.imaginary_semisimple {
        return Err(GqmsError::Hypothesis(
            "imaginary eigenvalues must have equal algebraic and geometric multiplicity",
        ));
    }
    let n = z.nrows();
    let clusters = imaginary_mode_clusters(z, tol)?;

    let mut v0_cols: Vec<RVector> = Vec::new();
    let mut angles: Vec<f64> = Vec::new();
    for cl in &clusters {
        if cl.phi == 0.0 {
            for c in cl.real_kernel.column_iter() {
                v0_cols.push(c.into_owned());
            }
            angles.extend(std::iter::repeat_n(0.0, cl.real_kernel.ncols() / 2));
        } else {
            for c in cl.kernel.column_iter() {
                v0_cols.push(c.map(|x| x.re));
                v0_cols.push(c.map(|x| x.im));
                angles.push(cl.phi);
            }
        }
    }
    let raw_v0 = linalg::from_columns(n, &v0_cols);
    let v0_basis = if v0_cols.is_empty() {
        RMatrix::zeros(n, 0)
    } else {
        linalg::range(&raw_v0, RANK_CUT)
    };
    if v0_basis.ncols() != v0_cols.len() {
        return Err(GqmsError::Domain(format!(
            "splitting failure: V0 candidate columns are rank deficient ({} of {})",
            v0_basis.ncols(),
            v0_cols.len()
        )));
    }

    // V- is what survives the annihilating polynomial of V0: one factor per
    // distinct frequency. Applying the factors one at a time and
    // re-orthonormalizing the surviving range keeps every rank decision at a
    // healthy single-factor gap instead of letting the product's singular
    // values collapse multiplicatively. The cutoff matches the eigenvalue
    // clustering tolerance: a direction whose frequency sits within the
    // cluster radius of the factor's frequency is annihilated with it.
    let dim_minus = n - v0_basis.ncols();
    let ctol = class_tolerance(z, tol);
    let znorm = linalg::fro(z).max(1.0);
    let cut = 4.0 * ctol * (1.0 + znorm);
    let mut vminus_basis = RMatrix::identity(n, n);
    for cl in &clusters {
        let factor = if cl.phi == 0.0 {
            z.clone()
        } else {
            z * z + RMatrix::identity(n, n).scale(cl.phi * cl.phi)
        };
        vminus_basis = linalg::range_abs(&(factor * vminus_basis), cut);
    }
    if dim_minus == 0 {
        vminus_basis = RMatrix::zeros(n, 0);
    } else if vminus_basis.ncols() != dim_minus {
        return Err(GqmsError::Domain(format!(
            "splitting failure: annihilator range has dimension {}, eigenvalue count expects {}",
            vminus_basis.ncols(),
            dim_minus
        )));
    }
    angles.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let d0 = angles.len();
    Ok(SpectralSplit {
        v0_basis,
        vminus_basis,
        angles,
        d0,
    })
}

/// Largest Z-invariant subspace of ker(C), computed as the kernel of the
/// stacked observability-style system {C Z^k x = 0, k = 0..2d-1}.
pub fn df_subspace_general(z: &PhaseMatrix, c: &PhaseMatrix, tol: f64) -> Result<RMatrix> {
    symplectic::mode_count(z)?;
    if c.shape() != z.shape() {
        return Err(GqmsError::Shape("C must match Z in shape".into()));
    }
    let c = linalg::symmetrize_checked(c, tol.max(1e-7))?;
    let n = z.nrows();
    let zs = z / linalg::fro(z).max(1.0);
    let mut blocks = Vec::with_capacity(n);
    let mut power = RMatrix::identity(n, n);
    for _ in 0..n {
        blocks.push(&c * &power);
        power = &power * &zs;
    }
    Ok(linalg::stacked_kernel(&blocks, tol.max(RANK_CUT)))
}

/// Checks the identification of the decoherence-free subspace with V0:
/// C must vanish on V0 and the largest Z-invariant subspace of ker C must
/// equal span(V0).
pub fn check_perif(
    z: &PhaseMatrix,
    c: &PhaseMatrix,
    split: &SpectralSplit,
    tol: f64,
) -> Result<bool> {
    let cv0 = linalg::fro(&(c * &split.v0_basis));
    if cv0 > tol.max(1e-8) * linalg::scale_of(c) {
        return Ok(false);
    }
    let df = df_subspace_general(z, c, tol)?;
    let t = tol.max(1e-7);
    let a = linalg::containment_residual(&split.v0_basis, &df);
    let b = linalg::containment_residual(&df, &split.v0_basis);
    Ok(a <= t * (1.0 + split.v0_basis.ncols() as f64) && b <= t * (1.0 + df.ncols() as f64))
}

/// Complex eigenvalues of Z as a plain helper for reports.
pub fn eigenvalues(z: &PhaseMatrix) -> Vec<Complex<f64>> {
    z.complex_eigenvalues().iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;

    fn rotation() -> RMatrix {
        RMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    fn block_diag(a: &RMatrix, b: &RMatrix) -> RMatrix {
        let n = a.nrows() + b.nrows();
        let mut m = RMatrix::zeros(n, n);
        m.view_mut((0, 0), a.shape()).copy_from(a);
        m.view_mut(a.shape(), b.shape()).copy_from(b);
        m
    }

    #[test]
    fn classify_rotation_generator() {
        let r = classify_spectrum(&rotation(), DEFAULT_TOL).unwrap();
        assert!(r.satisfies_h2);
        assert!(r.imaginary_semisimple);
        assert_eq!(r.class_imaginary.len(), 2);
        let mut ims: Vec<f64> = r.eigenvalues.iter().map(|l| l.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-10 && (ims[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn classify_jordan_block() {
        let z = RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let r = classify_spectrum(&z, DEFAULT_TOL).unwrap();
        assert!(r.satisfies_h2);
        assert!(!r.imaginary_semisimple);
    }

    #[test]
    fn classify_stable() {
        let z = -RMatrix::identity(2, 2);
        let r = classify_spectrum(&z, DEFAULT_TOL).unwrap();
        assert!(r.satisfies_h2);
        assert!(r.class_imaginary.is_empty());
        assert!(r.imaginary_semisimple);
    }

    #[test]
    fn splitting_pure_rotation() {
        let s = invariant_splitting(&rotation(), DEFAULT_TOL).unwrap();
        assert_eq!(s.v0_basis.ncols(), 2);
        assert_eq!(s.vminus_basis.ncols(), 0);
        assert_eq!(s.angles, vec![1.0]);
    }

    #[test]
    fn splitting_stable_case() {
        let s = invariant_splitting(&(-RMatrix::identity(2, 2)), DEFAULT_TOL).unwrap();
        assert_eq!(s.v0_basis.ncols(), 0);
        assert_eq!(s.vminus_basis.ncols(), 2);
        assert!(s.angles.is_empty());
    }

    #[test]
    fn splitting_block_diagonal() {
        let z = block_diag(&rotation(), &(-RMatrix::identity(2, 2)));
        let s = invariant_splitting(&z, DEFAULT_TOL).unwrap();
        assert_eq!(s.d0, 1);
        assert!((s.angles[0] - 1.0).abs() < 1e-10);
        // V- is the last two coordinates.
        for c in s.vminus_basis.column_iter() {
            assert!(c[0].abs() < 1e-10 && c[1].abs() < 1e-10);
        }
        // Z-invariance of both spans.
        let proj0 = &s.v0_basis * s.v0_basis.transpose();
        let res0 = (&z * &s.v0_basis) - &proj0 * (&z * &s.v0_basis);
        assert!(linalg::fro(&res0) < 1e-9);
    }

    #[test]
    fn splitting_rejects_jordan() {
        let z = RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            invariant_splitting(&z, DEFAULT_TOL),
            Err(GqmsError::Hypothesis(_))
        ));
    }

    #[test]
    fn df_subspace_examples() {
        // C = 0: everything.
        let z = rotation();
        let c = RMatrix::zeros(2, 2);
        assert_eq!(df_subspace_general(&z, &c, DEFAULT_TOL).unwrap().ncols(), 2);
        // C positive definite: nothing.
        let c = RMatrix::identity(2, 2);
        assert_eq!(df_subspace_general(&z, &c, DEFAULT_TOL).unwrap().ncols(), 0);
        // Block case: first two coordinates.
        let zb = block_diag(&rotation(), &(-RMatrix::identity(2, 2)));
        let cb = block_diag(&RMatrix::zeros(2, 2), &RMatrix::identity(2, 2).scale(2.0));
        let df = df_subspace_general(&zb, &cb, DEFAULT_TOL).unwrap();
        assert_eq!(df.ncols(), 2);
        for col in df.column_iter() {
            assert!(col[2].abs() < 1e-10 && col[3].abs() < 1e-10);
        }
    }

    #[test]
    fn perif_examples() {
        // Damped mode: trivially true (V0 empty).
        let z = -RMatrix::identity(2, 2);
        let c = RMatrix::identity(2, 2).scale(2.0);
        let s = invariant_splitting(&z, DEFAULT_TOL).unwrap();
        assert!(check_perif(&z, &c, &s, DEFAULT_TOL).unwrap());

        // Oscillator (x) damped mode: true.
        let zb = block_diag(&rotation(), &(-RMatrix::identity(2, 2)));
        let cb = block_diag(&RMatrix::zeros(2, 2), &RMatrix::identity(2, 2).scale(2.0));
        let sb = invariant_splitting(&zb, DEFAULT_TOL).unwrap();
        assert!(check_perif(&zb, &cb, &sb, DEFAULT_TOL).unwrap());

        // Rotation with full-rank noise: false.
        let z = rotation();
        let c = RMatrix::identity(2, 2).scale(2.0);
        let s = invariant_splitting(&z, DEFAULT_TOL).unwrap();
        assert!(!check_perif(&z, &c, &s, DEFAULT_TOL).unwrap());
    }
}
