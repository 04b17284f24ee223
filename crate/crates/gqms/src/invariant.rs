//! Existence of a normal invariant state, the symplectic normal form, the
//! stationary Gaussian parameters, and the structural flags derived from them
//! (faithfulness, irreducibility, ground state, recurrence).
//!
//! The existence decision runs four checks in order: (a) no spectrum of Z in
//! the open right half-plane, (b) semisimple on-axis eigenvalues, (c) the
//! decoherence-free subspace V0 sits inside ker C, (d) after moving to normal
//! coordinates the displacement has no component along zero-frequency modes.
//! When (a)-(c) hold a symplectic M is constructed that block-diagonalizes
//! the data into oscillator modes [[0, -Phi], [Phi, 0]] and a strictly stable
//! remainder.

use nalgebra::Complex;

use crate::error::{GqmsError, Result};
use crate::linalg::{self, CMatrix, RMatrix, RVector, C64, RANK_CUT};
use crate::model::{self, DriftDiffusion};
use crate::spectral::{self, class_tolerance};
use crate::symplectic::{self, standard_form, PhaseMatrix};

/// Symplectic normal form of admissible drift/diffusion data.
///
/// `m` is symplectic and the conjugated data (M Z M^{-1}, M^{-T} C M^{-1},
/// M^{-T} zeta) splits into oscillator modes 1..d0 (drift `[[0,-Phi],[Phi,0]]`,
/// no diffusion) and a strictly stable remainder on modes d0+1..d. The signed
/// angles in `phi` carry the orientation of each oscillator plane: a negative
/// entry means the plane rotates against the canonical orientation (the
/// number-operator convention), which is what rules out a ground state.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub m: PhaseMatrix,
    pub m_inv: PhaseMatrix,
    pub d0: usize,
    /// Signed oscillator angles, descending, length d0.
    pub phi: Vec<f64>,
    pub z_minus: PhaseMatrix,
    pub c_minus: PhaseMatrix,
    /// Conjugated displacement on the oscillator block (before centering).
    pub zeta0: RVector,
    /// Conjugated displacement on the stable block.
    pub zeta_minus: RVector,
    /// Weyl displacement (normal coordinates) cancelling the displacement on
    /// all nonzero-angle oscillator modes.
    pub w_center: RVector,
    /// Norm of the zero-angle component of zeta0 that no displacement can
    /// remove; existence requires this to vanish.
    pub zeta0_obstruction: f64,
}

impl NormalForm {
    pub fn modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn stable_modes(&self) -> usize {
        self.modes() - self.d0
    }

    /// Oscillator coordinate indices in normal coordinates.
    pub fn oscillator_indices(&self) -> Vec<usize> {
        let d = self.modes();
        (0..self.d0).chain(d..d + self.d0).collect()
    }

    /// Stable coordinate indices in normal coordinates.
    pub fn stable_indices(&self) -> Vec<usize> {
        let d = self.modes();
        (self.d0..d).chain(d + self.d0..2 * d).collect()
    }

    /// The conjugated data in normal coordinates.
    pub fn conjugated(&self, dd: &DriftDiffusion) -> Result<DriftDiffusion> {
        model::conjugate_symplectic(dd, &self.m)
    }
}

/// Why the existence decision came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExistenceReason {
    H2Violated,
    ImaginaryNotSemisimple,
    V0NotInKerC,
    CenterDisplacementObstruction,
    Ok,
}

impl ExistenceReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExistenceReason::H2Violated => "H2_violated",
            ExistenceReason::ImaginaryNotSemisimple => "imaginary_not_semisimple",
            ExistenceReason::V0NotInKerC => "V0_not_in_kerC",
            ExistenceReason::CenterDisplacementObstruction => "center_displacement_obstruction",
            ExistenceReason::Ok => "ok",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExistenceVerdict {
    pub exists: bool,
    pub reason: ExistenceReason,
    pub normal_form: Option<NormalForm>,
}

/// Mean and covariance of a Gaussian state on k modes.
#[derive(Debug, Clone)]
pub struct GaussianParams {
    pub mean: RVector,
    pub covariance: RMatrix,
}

impl GaussianParams {
    pub fn new(mean: RVector, covariance: RMatrix, tol: f64) -> Result<Self> {
        if mean.len() != covariance.nrows() {
            return Err(GqmsError::Shape(
                "mean and covariance dimensions differ".into(),
            ));
        }
        if mean.is_empty() {
            return Ok(Self { mean, covariance });
        }
        let d = symplectic::mode_count(&covariance)?;
        let covariance = linalg::symmetrize_checked(&covariance, tol.max(1e-7))?;
        let j = standard_form(d)?;
        let mut h = linalg::to_complex(&covariance);
        for i in 0..h.nrows() {
            for jx in 0..h.ncols() {
                h[(i, jx)] += C64::new(0.0, j[(i, jx)]);
            }
        }
        let min_eig = linalg::hermitian_min_eig(&h);
        if min_eig < -tol.max(1e-8) * linalg::scale_of(&covariance) {
            return Err(GqmsError::NotAdmissible { min_eig });
        }
        Ok(Self { mean, covariance })
    }

    pub fn empty() -> Self {
        Self {
            mean: RVector::zeros(0),
            covariance: RMatrix::zeros(0, 0),
        }
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }
}

struct ModePair {
    u: RVector,
    v: RVector,
    phi: f64,
}

fn omega(j: &RMatrix, x: &RVector, y: &RVector) -> f64 {
    (x.transpose() * j * y)[(0, 0)]
}

/// Removes the symplectic components of `x` along the already-fixed pairs.
fn omega_project(j: &RMatrix, pairs: &[ModePair], x: &RVector) -> RVector {
    let mut out = x.clone();
    for _ in 0..2 {
        for p in pairs {
            let a = omega(j, &out, &p.v);
            let b = omega(j, &p.u, &out);
            out -= &p.u * a + &p.v * b;
        }
    }
    out
}

/// One exact symplectic Gram-Schmidt sweep over assembled pairs. Eigenvector
/// pairs taken from a merged near-degenerate cluster carry cross-pairings at
/// the size of the frequency gap; sweeping restores the canonical relations
/// to machine precision while moving each vector by at most that gap.
fn resymplectify(j: &RMatrix, pairs: &mut [ModePair], block: &str) -> Result<()> {
    for k in 0..pairs.len() {
        let (done, rest) = pairs.split_at_mut(k);
        let pk = &mut rest[0];
        pk.u = omega_project(j, done, &pk.u);
        pk.v = omega_project(j, done, &pk.v);
        let p = omega(j, &pk.u, &pk.v);
        if p.abs() < 1e-10 {
            return Err(GqmsError::SymplecticCompletion {
                block: block.to_string(),
                reason: "pairing degenerated during re-orthogonalization".into(),
            });
        }
        // Restore the unit pairing through v alone; rescaling u would skew
        // the balanced oscillator action Zu = phi v, Zv = -phi u.
        pk.v /= p;
    }
    Ok(())
}

/// Symplectic Gram-Schmidt on a set of real vectors spanning a J-nondegenerate
/// subspace; returns canonical pairs with omega(u, v) = 1.
fn symplectic_pairs(
    j: &RMatrix,
    columns: Vec<RVector>,
    prior: &[ModePair],
    phi: f64,
    block: &str,
) -> Result<Vec<ModePair>> {
    let mut work: Vec<RVector> = columns.iter().map(|c| omega_project(j, prior, c)).collect();
    let mut pairs: Vec<ModePair> = Vec::new();
    while work.len() > 1 {
        // Pivot on the largest pairing among the remaining vectors.
        let u_idx = work
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let u = work.remove(u_idx);
        let norm = u.norm();
        if norm < 1e-10 {
            continue;
        }
        let u = u / norm;
        let (v_idx, pairing) = work
            .iter()
            .enumerate()
            .map(|(i, w)| (i, omega(j, &u, w)))
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .ok_or_else(|| GqmsError::SymplecticCompletion {
                block: block.to_string(),
                reason: "no partner vector left".into(),
            })?;
        if pairing.abs() < 1e-10 {
            return Err(GqmsError::SymplecticCompletion {
                block: block.to_string(),
                reason: "symplectic form is degenerate on the block".into(),
            });
        }
        let v = work.remove(v_idx) / pairing;
        let pair = ModePair { u, v, phi };
        for w in work.iter_mut() {
            let projected = omega_project(j, std::slice::from_ref(&pair), w);
            *w = projected;
        }
        pairs.push(pair);
    }
    if let Some(last) = work.last() {
        if last.norm() > 1e-7 {
            return Err(GqmsError::SymplecticCompletion {
                block: block.to_string(),
                reason: "odd leftover direction, block dimension is not even".into(),
            });
        }
    }
    Ok(pairs)
}

/// Builds the symplectic normal form. Preconditions: H2, semisimple on-axis
/// spectrum, V0 inside ker C, and the drift Hamiltonian on V0 (all checked;
/// the last one is automatic for admissible data).
pub fn normal_form(dd: &DriftDiffusion, tol: f64) -> Result<NormalForm> {
    let d = dd.modes();
    let n = 2 * d;
    let j = standard_form(d)?;
    let split = spectral::invariant_splitting(&dd.z, tol)?;

    let cv0 = linalg::fro(&(&dd.c * &split.v0_basis));
    if cv0 > tol.max(1e-8) * linalg::scale_of(&dd.c) {
        return Err(GqmsError::Hypothesis("V0 must be contained in ker C"));
    }
    let skew = dd.z.transpose() * &j + &j * &dd.z;
    let skew_v0 = linalg::fro(&(&skew * &split.v0_basis));
    if skew_v0 > tol.max(1e-7) * (1.0 + 2.0 * linalg::fro(&dd.z)) {
        return Err(GqmsError::SymplecticCompletion {
            block: "V0".into(),
            reason: "drift is not Hamiltonian on V0 (inadmissible data)".into(),
        });
    }

    // Oscillator pairs, one per on-axis frequency, orientation from the sign
    // of the pairing form (i/2) w* J w on each eigenvector.
    let clusters = spectral::imaginary_mode_clusters(&dd.z, tol)?;
    let jc = linalg::to_complex(&j);
    let mut osc: Vec<ModePair> = Vec::new();
    for cl in &clusters {
        if cl.phi == 0.0 {
            let cols: Vec<RVector> = cl
                .real_kernel
                .column_iter()
                .map(|c| c.into_owned())
                .collect();
            let zero_pairs = symplectic_pairs(&j, cols, &osc, 0.0, "zero-angle")?;
            osc.extend(zero_pairs);
        } else {
            let w = &cl.kernel;
            let k = w.ncols();
            let gram_raw = (w.adjoint() * &jc * w).map(|x| x * C64::new(0.0, 0.5));
            let gram = (&gram_raw + gram_raw.adjoint()).scale(0.5);
            let eig = gram.symmetric_eigen();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
            for &idx in &order {
                let lambda = eig.eigenvalues[idx];
                if lambda.abs() < 1e-8 {
                    return Err(GqmsError::SymplecticCompletion {
                        block: format!("angle {:.6}", cl.phi),
                        reason: "degenerate symplectic pairing on the eigenspace".into(),
                    });
                }
                let wv = w * eig.eigenvectors.column(idx);
                let wv = wv.map(|x| x / C64::new(lambda.abs().sqrt(), 0.0));
                let a = wv.map(|x| x.re);
                let b = wv.map(|x| x.im);
                let (u, v, phi) = if lambda > 0.0 {
                    (b, a, cl.phi)
                } else {
                    (a, b, -cl.phi)
                };
                osc.push(ModePair { u, v, phi });
            }
        }
    }
    osc.sort_by(|a, b| b.phi.partial_cmp(&a.phi).unwrap());
    let d0 = osc.len();

    // Stable pairs from the V- basis.
    let stable_cols: Vec<RVector> = split
        .vminus_basis
        .column_iter()
        .map(|c| c.into_owned())
        .collect();
    let stable = symplectic_pairs(&j, stable_cols, &osc, f64::NAN, "stable")?;
    if d0 + stable.len() != d {
        return Err(GqmsError::SymplecticCompletion {
            block: "stable".into(),
            reason: format!("found {} stable pairs, expected {}", stable.len(), d - d0),
        });
    }

    let mut all_pairs: Vec<ModePair> = osc.into_iter().chain(stable).collect();
    resymplectify(&j, &mut all_pairs, "assembled basis")?;

    let mut t = RMatrix::zeros(n, n);
    for (k, p) in all_pairs.iter().enumerate() {
        t.set_column(k, &p.u);
        t.set_column(d + k, &p.v);
    }
    let t_res = linalg::fro(&(t.transpose() * &j * &t - &j));
    let t_norm = linalg::fro(&t);
    if t_res > 1e-9 * (1.0 + t_norm * t_norm) {
        return Err(GqmsError::SymplecticCompletion {
            block: "assembled basis".into(),
            reason: format!("basis fails the symplectic identity by {t_res:.3e}"),
        });
    }
    let m = -(&j * t.transpose() * &j);
    let id_res = linalg::fro(&(&m * &t - RMatrix::identity(n, n)));
    if id_res > 1e-8 * (1.0 + t_norm * t_norm) {
        return Err(GqmsError::SymplecticCompletion {
            block: "assembled basis".into(),
            reason: format!("inverse residual {id_res:.3e}"),
        });
    }

    // Conjugated data: Z~ = M Z T, C~ = T' C T, zeta~ = T' zeta.
    let z_t = &m * &dd.z * &t;
    let c_t = t.transpose() * &dd.c * &t;
    let zeta_t = t.transpose() * &dd.zeta;

    let osc_idx = {
        let mut v: Vec<usize> = (0..d0).collect();
        v.extend(d..d + d0);
        v
    };
    let stab_idx = {
        let mut v: Vec<usize> = (d0..d).collect();
        v.extend(d + d0..2 * d);
        v
    };
    let z_minus = z_t.select_rows(&stab_idx).select_columns(&stab_idx);
    let c_minus_raw = c_t.select_rows(&stab_idx).select_columns(&stab_idx);
    let c_minus = (&c_minus_raw + c_minus_raw.transpose()).scale(0.5);
    let zeta0 = RVector::from_iterator(2 * d0, osc_idx.iter().map(|&i| zeta_t[i]));
    let zeta_minus = RVector::from_iterator(2 * (d - d0), stab_idx.iter().map(|&i| zeta_t[i]));

    // Structural residuals of the conjugated matrices.
    let cross = z_t.select_rows(&osc_idx).select_columns(&stab_idx);
    let cross2 = z_t.select_rows(&stab_idx).select_columns(&osc_idx);
    let scale_z = (1.0 + linalg::fro(&dd.z)) * (1.0 + t_norm * t_norm);
    if linalg::fro(&cross) > 1e-6 * scale_z || linalg::fro(&cross2) > 1e-6 * scale_z {
        return Err(GqmsError::Domain(
            "normal form: conjugated drift has non-negligible cross blocks".into(),
        ));
    }
    let z0 = z_t.select_rows(&osc_idx).select_columns(&osc_idx);
    let mut z0_model = RMatrix::zeros(2 * d0, 2 * d0);
    for (k, p) in all_pairs.iter().take(d0).enumerate() {
        z0_model[(k, d0 + k)] = -p.phi;
        z0_model[(d0 + k, k)] = p.phi;
    }
    if linalg::fro(&(&z0 - &z0_model)) > 1e-6 * scale_z {
        return Err(GqmsError::Domain(
            "normal form: oscillator block deviates from [[0,-Phi],[Phi,0]]".into(),
        ));
    }
    let c_osc = c_t.select_rows(&osc_idx);
    if linalg::fro(&c_osc) > 1e-6 * (1.0 + linalg::fro(&dd.c)) * (1.0 + t_norm * t_norm) {
        return Err(GqmsError::Domain(
            "normal form: conjugated diffusion does not vanish on the oscillator block".into(),
        ));
    }

    // Centering displacement w = (1/2) (Z0')^+ zeta0 in normal coordinates:
    // w_x = -(1/2) Phi^+ zeta0_y, w_y = (1/2) Phi^+ zeta0_x. What remains of
    // zeta0 after displacing by w is exactly its zero-angle component.
    let mut w_center = RVector::zeros(n);
    let mut residual = RVector::zeros(2 * d0);
    for (k, p) in all_pairs.iter().take(d0).enumerate() {
        if p.phi != 0.0 {
            w_center[k] = -0.5 * zeta0[d0 + k] / p.phi;
            w_center[d + k] = 0.5 * zeta0[k] / p.phi;
        } else {
            residual[k] = zeta0[k];
            residual[d0 + k] = zeta0[d0 + k];
        }
    }
    let zeta0_obstruction = residual.norm();

    let phi: Vec<f64> = all_pairs.iter().take(d0).map(|p| p.phi).collect();
    Ok(NormalForm {
        m,
        m_inv: t,
        d0,
        phi,
        z_minus,
        c_minus,
        zeta0,
        zeta_minus,
        w_center,
        zeta0_obstruction,
    })
}

/// Decides whether the semigroup admits a normal invariant state.
///
/// Requires admissible data; the verdict carries the failed condition or the
/// normal form on success.
pub fn decide_existence(dd: &DriftDiffusion, tol: f64) -> Result<ExistenceVerdict> {
    if !model::validate_admissibility(dd, tol.max(1e-8)) {
        let min_eig = linalg::hermitian_min_eig(&dd.admissibility_matrix());
        return Err(GqmsError::NotAdmissible { min_eig });
    }
    let report = spectral::classify_spectrum(&dd.z, tol)?;
    if !report.satisfies_h2 {
        return Ok(ExistenceVerdict {
            exists: false,
            reason: ExistenceReason::H2Violated,
            normal_form: None,
        });
    }
    if !report.imaginary_semisimple {
        return Ok(ExistenceVerdict {
            exists: false,
            reason: ExistenceReason::ImaginaryNotSemisimple,
            normal_form: None,
        });
    }
    let split = spectral::invariant_splitting(&dd.z, tol)?;
    let cv0 = linalg::fro(&(&dd.c * &split.v0_basis));
    if cv0 > tol.max(1e-8) * linalg::scale_of(&dd.c) {
        return Ok(ExistenceVerdict {
            exists: false,
            reason: ExistenceReason::V0NotInKerC,
            normal_form: None,
        });
    }
    let nf = normal_form(dd, tol)?;
    if nf.zeta0_obstruction > tol.max(1e-8) * (1.0 + dd.zeta.norm()) {
        return Ok(ExistenceVerdict {
            exists: false,
            reason: ExistenceReason::CenterDisplacementObstruction,
            normal_form: None,
        });
    }
    Ok(ExistenceVerdict {
        exists: true,
        reason: ExistenceReason::Ok,
        normal_form: Some(nf),
    })
}

/// Stationary Gaussian parameters of a strictly stable block:
/// Z' m = zeta (the unique fixed point of the mean flow) and the Lyapunov
/// equation Z' S + S Z + C = 0.
pub fn stationary_gaussian(
    z_minus: &PhaseMatrix,
    c_minus: &PhaseMatrix,
    zeta_minus: &RVector,
    tol: f64,
) -> Result<GaussianParams> {
    if z_minus.nrows() == 0 {
        return Ok(GaussianParams::empty());
    }
    symplectic::mode_count(z_minus)?;
    let abscissa = linalg::spectral_abscissa(z_minus);
    if abscissa >= -class_tolerance(z_minus, tol) {
        return Err(GqmsError::Unstable { abscissa });
    }
    let mean = z_minus
        .transpose()
        .lu()
        .solve(zeta_minus)
        .ok_or(GqmsError::SingularSolve {
            what: "stationary mean",
        })?;
    let covariance = linalg::solve_lyapunov(z_minus, c_minus)?;
    let lyap_res =
        linalg::fro(&(z_minus.transpose() * &covariance + &covariance * z_minus + c_minus));
    let lyap_scale = linalg::fro(c_minus) + linalg::fro(z_minus) * linalg::fro(&covariance);
    if lyap_res > tol.max(1e-10) * (1.0 + lyap_scale) {
        return Err(GqmsError::Domain(format!(
            "stationary covariance residual {lyap_res:.3e} exceeds tolerance"
        )));
    }
    GaussianParams::new(mean, covariance, tol)
}

/// Faithfulness of the stationary state: Sigma + iJ strictly positive.
pub fn is_faithful(stationary: &GaussianParams, tol: f64) -> bool {
    if stationary.mean.is_empty() {
        return true;
    }
    let d = stationary.modes();
    let j = standard_form(d).expect("valid mode count");
    let mut h = linalg::to_complex(&stationary.covariance);
    for i in 0..h.nrows() {
        for jx in 0..h.ncols() {
            h[(i, jx)] += C64::new(0.0, j[(i, jx)]);
        }
    }
    linalg::hermitian_min_eig(&h) > tol * linalg::scale_of(&stationary.covariance)
}

/// Irreducibility via the complex Hermitian C_Z = C + i(Z'J + JZ): the
/// semigroup is irreducible iff ker(C_Z) contains no nontrivial Z-invariant
/// subspace (over C^{2d}).
pub fn is_irreducible(dd: &DriftDiffusion, tol: f64) -> Result<bool> {
    let n = dd.z.nrows();
    let cz = dd.admissibility_matrix();
    let zc = linalg::to_complex(&dd.z) / Complex::new(linalg::fro(&dd.z).max(1.0), 0.0);
    let mut blocks = Vec::with_capacity(n);
    let mut power = CMatrix::identity(n, n);
    for _ in 0..n {
        blocks.push(&cz * &power);
        power = &power * &zc;
    }
    let kernel = linalg::stacked_kernel_c(&blocks, tol.max(RANK_CUT));
    Ok(kernel.ncols() == 0)
}

/// Structure of the set of normal invariant states.
#[derive(Debug, Clone)]
pub struct InvariantSetDescriptor {
    pub d0: usize,
    /// Signed oscillator angles, descending.
    pub angles: Vec<f64>,
    pub zero_angle_count: usize,
    /// Integer relation among the angles with entries bounded by the search
    /// limit, when one exists.
    pub rational_dependence_witness: Option<Vec<i64>>,
    /// Stationary Gaussian parameters of the stable factor.
    pub stationary: GaussianParams,
    /// Symplectic eigenvalues of the stationary covariance, descending.
    pub symplectic_eigenvalues: Vec<f64>,
    pub faithful: bool,
    pub irreducible: bool,
}

impl InvariantSetDescriptor {
    pub fn rational_dependence_flag(&self) -> bool {
        self.rational_dependence_witness.is_some()
    }
}

/// Searches for a nonzero integer vector n with |n_j| <= n_max and
/// |sum n_j phi_j| <= tol * (1 + max |phi|); enumeration by increasing
/// max-norm shells, first nonzero entry positive, so the reported witness is
/// minimal and deterministic.
pub fn rational_dependence(angles: &[f64], n_max: i64, tol: f64) -> Option<Vec<i64>> {
    let k = angles.len();
    if k == 0 {
        return None;
    }
    let scale = 1.0 + angles.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let threshold = tol.max(1e-12) * scale;
    // Keep the exhaustive search at desk scale.
    let mut effective = n_max;
    while effective > 1 && ((2 * effective + 1) as f64).powi(k as i32) > 4e6 {
        effective -= 1;
    }
    canonical_min_witness(angles, effective, threshold)
}

fn canonical_min_witness(angles: &[f64], n_max: i64, threshold: f64) -> Option<Vec<i64>> {
    let k = angles.len();
    for shell in 1..=n_max {
        let mut n = vec![-shell; k];
        loop {
            let linf = n.iter().map(|x| x.abs()).max().unwrap();
            if linf == shell {
                let first = n.iter().find(|&&x| x != 0).copied().unwrap();
                if first > 0 {
                    let s: f64 = n.iter().zip(angles).map(|(&c, &p)| c as f64 * p).sum();
                    if s.abs() <= threshold {
                        return Some(n);
                    }
                }
            }
            let mut i = k;
            let mut done = true;
            while i > 0 {
                i -= 1;
                if n[i] < shell {
                    n[i] += 1;
                    for v in n.iter_mut().skip(i + 1) {
                        *v = -shell;
                    }
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
    }
    None
}

/// Composes the full structural description of the invariant-state set.
pub fn invariant_set_descriptor(
    dd: &DriftDiffusion,
    tol: f64,
    n_max: i64,
) -> Result<InvariantSetDescriptor> {
    let verdict = decide_existence(dd, tol)?;
    let nf = verdict.normal_form.ok_or(GqmsError::Hypothesis(
        "invariant-set descriptor requires a normal invariant state",
    ))?;
    let stationary = if nf.stable_modes() > 0 {
        stationary_gaussian(&nf.z_minus, &nf.c_minus, &nf.zeta_minus, tol)?
    } else {
        GaussianParams::empty()
    };
    let symplectic_eigenvalues = if stationary.mean.is_empty() {
        Vec::new()
    } else {
        symplectic::williamson(&stationary.covariance, tol)?.symplectic_eigenvalues
    };
    let faithful = is_faithful(&stationary, tol);
    let irreducible = is_irreducible(dd, tol)?;
    let zero_angle_count = nf.phi.iter().filter(|&&p| p == 0.0).count();
    let witness = rational_dependence(&nf.phi, n_max, tol.max(1e-9));
    Ok(InvariantSetDescriptor {
        d0: nf.d0,
        angles: nf.phi.clone(),
        zero_angle_count,
        rational_dependence_witness: witness,
        stationary,
        symplectic_eigenvalues,
        faithful,
        irreducible,
    })
}

/// Ground-state test for purely Hamiltonian data (C = 0): a normal invariant
/// state must exist and every recovered oscillator angle must be nonnegative.
pub fn ground_state_flag(dd: &DriftDiffusion, tol: f64) -> Result<bool> {
    if linalg::fro(&dd.c) > tol.max(1e-9) * linalg::scale_of(&dd.c) {
        return Err(GqmsError::Hypothesis("ground-state test requires C = 0"));
    }
    let verdict = decide_existence(dd, tol)?;
    if !verdict.exists {
        return Ok(false);
    }
    let nf = verdict
        .normal_form
        .expect("normal form attached on success");
    Ok(nf.phi.iter().all(|&p| p >= -tol))
}

/// Recurrence/transience summary at the Gaussian-parameter level.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    /// Number of symplectic eigenvalues of the stationary covariance equal to
    /// one (pure directions), the support defect of the stable factor.
    pub positive_recurrent_dim_defect: usize,
    /// Phase-space dimensions carried by the pure directions.
    pub transient_dim: usize,
    /// The null-recurrent space is always trivial here.
    pub null_recurrent_trivial: bool,
}

pub fn recurrence_classification(descriptor: &InvariantSetDescriptor) -> RecurrenceReport {
    let defect = descriptor
        .symplectic_eigenvalues
        .iter()
        .filter(|&&nu| (nu - 1.0).abs() <= 1e-6 * (1.0 + nu))
        .count();
    RecurrenceReport {
        positive_recurrent_dim_defect: defect,
        transient_dim: 2 * defect,
        null_recurrent_trivial: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;
    use approx::assert_relative_eq;

    fn rotation(phi: f64) -> RMatrix {
        RMatrix::from_row_slice(2, 2, &[0.0, -phi, phi, 0.0])
    }

    fn oscillator_dd(phi: f64) -> DriftDiffusion {
        DriftDiffusion::new(
            rotation(phi),
            RMatrix::zeros(2, 2),
            RVector::zeros(2),
            DEFAULT_TOL,
        )
        .unwrap()
    }

    fn damped_dd() -> DriftDiffusion {
        DriftDiffusion::new(
            -RMatrix::identity(2, 2),
            RMatrix::identity(2, 2).scale(2.0),
            RVector::zeros(2),
            DEFAULT_TOL,
        )
        .unwrap()
    }

    fn thermal_dd() -> DriftDiffusion {
        DriftDiffusion::new(
            -RMatrix::identity(2, 2),
            RMatrix::identity(2, 2).scale(6.0),
            RVector::zeros(2),
            DEFAULT_TOL,
        )
        .unwrap()
    }

    #[test]
    fn oscillator_exists_with_angle_one() {
        let verdict = decide_existence(&oscillator_dd(1.0), DEFAULT_TOL).unwrap();
        assert!(verdict.exists);
        let nf = verdict.normal_form.unwrap();
        assert_eq!(nf.d0, 1);
        assert_relative_eq!(nf.phi[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn reversed_oscillator_recovers_negative_angle() {
        // H = -N rotates the plane against the canonical orientation.
        let dd = oscillator_dd(-1.0);
        let verdict = decide_existence(&dd, DEFAULT_TOL).unwrap();
        assert!(verdict.exists);
        let nf = verdict.normal_form.unwrap();
        assert_relative_eq!(nf.phi[0], -1.0, epsilon = 1e-9);
        assert!(!ground_state_flag(&dd, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn zeta_drift_obstruction() {
        let dd = DriftDiffusion::new(
            RMatrix::zeros(2, 2),
            RMatrix::zeros(2, 2),
            RVector::from_vec(vec![1.0, 0.0]),
            DEFAULT_TOL,
        )
        .unwrap();
        let verdict = decide_existence(&dd, DEFAULT_TOL).unwrap();
        assert!(!verdict.exists);
        assert_eq!(
            verdict.reason,
            ExistenceReason::CenterDisplacementObstruction
        );
        assert!(!ground_state_flag(&dd, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn damped_mode_exists_and_is_stable_case() {
        let verdict = decide_existence(&damped_dd(), DEFAULT_TOL).unwrap();
        assert!(verdict.exists);
        let nf = verdict.normal_form.unwrap();
        assert_eq!(nf.d0, 0);
        let st =
            stationary_gaussian(&nf.z_minus, &nf.c_minus, &nf.zeta_minus, DEFAULT_TOL).unwrap();
        assert_relative_eq!(st.covariance, RMatrix::identity(2, 2), epsilon = 1e-9);
    }

    #[test]
    fn jordan_block_reported() {
        let dd = DriftDiffusion::new(
            RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            RMatrix::zeros(2, 2),
            RVector::zeros(2),
            DEFAULT_TOL,
        )
        .unwrap();
        let verdict = decide_existence(&dd, DEFAULT_TOL).unwrap();
        assert!(!verdict.exists);
        assert_eq!(verdict.reason, ExistenceReason::ImaginaryNotSemisimple);
        assert!(!ground_state_flag(&dd, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn rotation_with_noise_fails_kernel_condition() {
        let dd = DriftDiffusion::new(
            rotation(1.0),
            RMatrix::identity(2, 2).scale(2.0),
            RVector::zeros(2),
            DEFAULT_TOL,
        )
        .unwrap();
        let verdict = decide_existence(&dd, DEFAULT_TOL).unwrap();
        assert!(!verdict.exists);
        assert_eq!(verdict.reason, ExistenceReason::V0NotInKerC);
    }

    #[test]
    fn stationary_examples() {
        // Z = -I, C = 2I: the vacuum, Sigma = I.
        let st = stationary_gaussian(
            &(-RMatrix::identity(2, 2)),
            &RMatrix::identity(2, 2).scale(2.0),
            &RVector::zeros(2),
            DEFAULT_TOL,
        )
        .unwrap();
        assert_relative_eq!(st.covariance, RMatrix::identity(2, 2), epsilon = 1e-10);

        // Thermal: C = 6I gives Sigma = 3I.
        let st = stationary_gaussian(
            &(-RMatrix::identity(2, 2)),
            &RMatrix::identity(2, 2).scale(6.0),
            &RVector::zeros(2),
            DEFAULT_TOL,
        )
        .unwrap();
        assert_relative_eq!(
            st.covariance,
            RMatrix::identity(2, 2).scale(3.0),
            epsilon = 1e-10
        );

        // Mean: Z'm = zeta with Z = -I gives m = -zeta.
        let st = stationary_gaussian(
            &(-RMatrix::identity(2, 2)),
            &RMatrix::identity(2, 2).scale(2.0),
            &RVector::from_vec(vec![2.0, 0.0]),
            DEFAULT_TOL,
        )
        .unwrap();
        assert_relative_eq!(st.mean, RVector::from_vec(vec![-2.0, 0.0]), epsilon = 1e-12);
    }

    #[test]
    fn stationary_rejects_unstable_block() {
        let r = stationary_gaussian(
            &RMatrix::zeros(2, 2),
            &RMatrix::zeros(2, 2),
            &RVector::zeros(2),
            DEFAULT_TOL,
        );
        assert!(matches!(r, Err(GqmsError::Unstable { .. })));
    }

    #[test]
    fn faithfulness_examples() {
        let pure =
            GaussianParams::new(RVector::zeros(2), RMatrix::identity(2, 2), DEFAULT_TOL).unwrap();
        assert!(!is_faithful(&pure, DEFAULT_TOL));
        let thermal = GaussianParams::new(
            RVector::zeros(2),
            RMatrix::identity(2, 2).scale(3.0),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(is_faithful(&thermal, DEFAULT_TOL));
        let pure4 =
            GaussianParams::new(RVector::zeros(4), RMatrix::identity(4, 4), DEFAULT_TOL).unwrap();
        assert!(!is_faithful(&pure4, DEFAULT_TOL));
    }

    #[test]
    fn irreducibility_examples() {
        assert!(!is_irreducible(&damped_dd(), DEFAULT_TOL).unwrap());
        assert!(is_irreducible(&thermal_dd(), DEFAULT_TOL).unwrap());
        assert!(!is_irreducible(&oscillator_dd(1.0), DEFAULT_TOL).unwrap());
    }

    #[test]
    fn descriptor_thermal_mode() {
        let desc = invariant_set_descriptor(&thermal_dd(), DEFAULT_TOL, 12).unwrap();
        assert_eq!(desc.d0, 0);
        assert!(desc.faithful);
        assert!(desc.irreducible);
        assert!(!desc.rational_dependence_flag());
        let rec = recurrence_classification(&desc);
        assert_eq!(rec.positive_recurrent_dim_defect, 0);
    }

    #[test]
    fn descriptor_damped_mode_defect() {
        let desc = invariant_set_descriptor(&damped_dd(), DEFAULT_TOL, 12).unwrap();
        assert!(!desc.faithful);
        assert!(!desc.irreducible);
        let rec = recurrence_classification(&desc);
        assert_eq!(rec.positive_recurrent_dim_defect, 1);
        assert_eq!(rec.transient_dim, 2);
        assert!(rec.null_recurrent_trivial);
    }

    #[test]
    fn normal_form_is_idempotent_on_block_data() {
        // Input already in normal form: recovered blocks match verbatim up to
        // sign/permutation conventions.
        let mut z = RMatrix::zeros(4, 4);
        z[(0, 2)] = -1.3;
        z[(2, 0)] = 1.3;
        z[(1, 1)] = -0.7;
        z[(3, 3)] = -0.7;
        let mut c = RMatrix::zeros(4, 4);
        c[(1, 1)] = 2.0;
        c[(3, 3)] = 2.0;
        let dd = DriftDiffusion::new(z, c, RVector::zeros(4), DEFAULT_TOL).unwrap();
        let nf = normal_form(&dd, DEFAULT_TOL).unwrap();
        assert_eq!(nf.d0, 1);
        assert_relative_eq!(nf.phi[0], 1.3, epsilon = 1e-10);
        let mut eig: Vec<f64> = nf
            .z_minus
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(eig[0], -0.7, epsilon = 1e-10);
        assert_relative_eq!(eig[1], -0.7, epsilon = 1e-10);
        assert_relative_eq!(linalg::fro(&nf.c_minus), 8.0f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn w_center_cancels_the_rotating_drive() {
        // Driven oscillator: the drive sits in range(Z0), so a displacement
        // removes it and the invariant state survives.
        let dd = DriftDiffusion::new(
            rotation(1.0),
            RMatrix::zeros(2, 2),
            RVector::from_vec(vec![1.0, 0.0]),
            DEFAULT_TOL,
        )
        .unwrap();
        let verdict = decide_existence(&dd, DEFAULT_TOL).unwrap();
        assert!(verdict.exists);
        let nf = verdict.normal_form.unwrap();
        assert!(nf.zeta0_obstruction < 1e-12);
        // Displacing the original data by M' w_center kills the drive.
        let w_orig = nf.m.transpose() * &nf.w_center;
        let centered = crate::model::displace_weyl(&dd, &w_orig).unwrap();
        let nf2 = decide_existence(&centered, DEFAULT_TOL)
            .unwrap()
            .normal_form
            .unwrap();
        assert!(nf2.zeta0.norm() < 1e-10);
    }

    #[test]
    fn recurrence_vacuous_for_pure_oscillator() {
        let desc = invariant_set_descriptor(&oscillator_dd(1.0), DEFAULT_TOL, 12).unwrap();
        let rec = recurrence_classification(&desc);
        assert_eq!(rec.positive_recurrent_dim_defect, 0);
        assert_eq!(rec.transient_dim, 0);
    }

    #[test]
    fn rational_dependence_pair() {
        let w = rational_dependence(&[1.0, 2.0], 12, 1e-9).unwrap();
        assert_eq!(w, vec![2, -1]);
        assert!(rational_dependence(&[1.0, std::f64::consts::SQRT_2], 12, 1e-9).is_none());
    }

    #[test]
    fn ground_state_examples() {
        assert!(ground_state_flag(&oscillator_dd(1.0), DEFAULT_TOL).unwrap());
        let noisy = damped_dd();
        assert!(ground_state_flag(&noisy, DEFAULT_TOL).is_err());
    }
}
