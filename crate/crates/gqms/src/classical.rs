//! Classical Ornstein-Uhlenbeck mirror: dX = (A X + b) dt + B dW.
//!
//! The analyzer mirrors the quantum one with A' in place of Z and B B' in
//! place of C, minus the symplectic structure: the invariant-measure
//! criterion is a controllability/stability containment, irreducibility is
//! the unobservable-subspace test on ker(B B'), and the structure theorem
//! uses a plain (non-symplectic) basis completion.

use crate::error::{GqmsError, Result};
use crate::linalg::{self, RMatrix, RVector, C64, RANK_CUT};
use crate::model::DriftDiffusion;
use crate::spectral::{self, class_tolerance};

/// Coefficients of the linear SDE dX = (A X + b) dt + B dW.
#[derive(Debug, Clone)]
pub struct OuModel {
    pub a: RMatrix,
    pub b_mat: RMatrix,
    pub drift: RVector,
}

impl OuModel {
    pub fn new(a: RMatrix, b_mat: RMatrix, drift: RVector) -> Result<Self> {
        let d = a.nrows();
        if d == 0 || a.ncols() != d {
            return Err(GqmsError::Shape("A must be square and nonempty".into()));
        }
        if b_mat.nrows() != d || drift.len() != d {
            return Err(GqmsError::Shape(
                "B and b must match the dimension of A".into(),
            ));
        }
        linalg::ensure_finite(&a, "A")?;
        linalg::ensure_finite(&b_mat, "B")?;
        if !drift.iter().all(|x| x.is_finite()) {
            return Err(GqmsError::Domain("b contains non-finite entries".into()));
        }
        Ok(Self { a, b_mat, drift })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn diffusion(&self) -> RMatrix {
        &self.b_mat * self.b_mat.transpose()
    }
}

/// Running flow data for the classical semigroup (mirrors the quantum one
/// with the exponentials on the other side).
struct OuFlow {
    a: RMatrix,
    q: RMatrix,
    b: RVector,
    e: RMatrix,
    g: RMatrix,
    i: RVector,
    step_cache: Option<(f64, RMatrix, RMatrix, RVector)>,
}

impl OuFlow {
    fn new(model: &OuModel) -> Self {
        let d = model.dim();
        Self {
            a: model.a.clone(),
            q: model.diffusion(),
            b: model.drift.clone(),
            e: RMatrix::identity(d, d),
            g: RMatrix::zeros(d, d),
            i: RVector::zeros(d),
            step_cache: None,
        }
    }

    fn advance(&mut self, dt: f64) -> Result<()> {
        if dt < 0.0 || !dt.is_finite() {
            return Err(GqmsError::Domain(
                "time increments must be finite and nonnegative".into(),
            ));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let rate = linalg::fro(&self.a);
        let steps = ((dt * rate / 0.5).ceil() as usize).max(1);
        let h = dt / steps as f64;
        for _ in 0..steps {
            self.step(h);
        }
        Ok(())
    }

    fn step_blocks(&mut self, h: f64) -> (RMatrix, RMatrix, RVector) {
        if let Some((hc, e_h, g_h, i_h)) = &self.step_cache {
            if *hc == h {
                return (e_h.clone(), g_h.clone(), i_h.clone());
            }
        }
        let d = self.a.nrows();
        let mut aug = RMatrix::zeros(2 * d + 1, 2 * d + 1);
        aug.view_mut((0, 0), (d, d)).copy_from(&self.a);
        aug.view_mut((0, d), (d, d)).copy_from(&self.q);
        aug.view_mut((d, d), (d, d))
            .copy_from(&(-self.a.transpose()));
        for r in 0..d {
            aug[(r, 2 * d)] = self.b[r];
        }
        let f = (aug * h).exp();
        let e_h = f.view((0, 0), (d, d)).into_owned();
        let upper_mid = f.view((0, d), (d, d)).into_owned();
        let i_h = RVector::from_iterator(d, (0..d).map(|r| f[(r, 2 * d)]));
        let g_h_raw = upper_mid * e_h.transpose();
        let g_h = (&g_h_raw + g_h_raw.transpose()).scale(0.5);
        self.step_cache = Some((h, e_h.clone(), g_h.clone(), i_h.clone()));
        (e_h, g_h, i_h)
    }

    fn step(&mut self, h: f64) {
        let (e_h, g_h, i_h) = self.step_blocks(h);
        self.g += &self.e * g_h * self.e.transpose();
        self.g = (&self.g + self.g.transpose()).scale(0.5);
        self.i += &self.e * i_h;
        self.e = &e_h * &self.e;
    }
}

/// Action of the OU semigroup on the exponential function e^{i<z, .>} at x:
/// exp(i int <z, e^{sA} b> ds - 1/2 int <z, e^{sA} B B' e^{sA'} z> ds)
/// times e^{i <z, e^{tA} x>}.
pub fn ou_char_coefficient(model: &OuModel, z: &RVector, x: &RVector, t: f64) -> Result<C64> {
    if t < 0.0 {
        return Err(GqmsError::Domain(
            "ou_char_coefficient requires t >= 0".into(),
        ));
    }
    if z.len() != model.dim() || x.len() != model.dim() {
        return Err(GqmsError::Shape(
            "argument vectors must match the model dimension".into(),
        ));
    }
    let mut flow = OuFlow::new(model);
    flow.advance(t)?;
    let quad = (z.transpose() * &flow.g * z)[(0, 0)].max(0.0);
    let phase = z.dot(&flow.i) + z.dot(&(&flow.e * x));
    Ok(C64::from_polar((-0.5 * quad).exp(), phase))
}

/// Orthonormal basis of the stable subspace S- of A (range of the spectral
/// projector for { Re < 0 }), built from the real annihilating polynomial of
/// the non-stable spectrum.
pub fn stable_subspace(a: &RMatrix, tol: f64) -> RMatrix {
    let d = a.nrows();
    let ctol = class_tolerance(a, tol);
    let eigs = a.complex_eigenvalues();
    let stable_count = eigs.iter().filter(|l| l.re < -ctol).count();
    if stable_count == 0 {
        return RMatrix::zeros(d, 0);
    }
    if stable_count == d {
        return RMatrix::identity(d, d);
    }
    // Cluster the non-stable eigenvalues and annihilate each cluster with the
    // matching real factor raised to the cluster size.
    let mut nonstable: Vec<C64> = eigs.iter().filter(|l| l.re >= -ctol).copied().collect();
    nonstable.sort_by(|p, q| (p.im, p.re).partial_cmp(&(q.im, q.re)).unwrap());
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for l in nonstable {
        match clusters.last_mut() {
            Some((rep, count)) if (l - *rep).norm() <= 2.0 * ctol => {
                *count += 1;
            }
            _ => clusters.push((l, 1)),
        }
    }
    let norm_a = linalg::fro(a).max(1.0);
    let mut q = RMatrix::identity(d, d);
    for (rep, count) in clusters {
        if rep.im < -ctol {
            continue; // conjugate pair handled by its positive partner
        }
        let factor = if rep.im.abs() <= ctol {
            (a - RMatrix::identity(d, d).scale(rep.re)) / norm_a
        } else {
            let quad = a * a - (a * (2.0 * rep.re)) + RMatrix::identity(d, d).scale(rep.norm_sqr());
            quad / (norm_a * norm_a)
        };
        for _ in 0..count {
            q = &q * &factor;
        }
    }
    let basis = linalg::range(&q, RANK_CUT);
    if basis.ncols() != stable_count {
        // Rank decision disagreed with the eigenvalue count; fall back to the
        // count-aware truncation of the dominant directions.
        let svd = linalg::jacobi_svd(&q);
        let mut out = RMatrix::zeros(d, stable_count);
        for k in 0..stable_count.min(svd.u.ncols()) {
            out.set_column(k, &svd.u.column(k));
        }
        return out;
    }
    basis
}

/// Invariant-measure report carrying both equivalent criteria.
#[derive(Debug, Clone)]
pub struct OuInvariantReport {
    pub exists: bool,
    /// Controllability span contained in the stable subspace.
    pub condition_controllability: bool,
    /// Numerical convergence of int e^{sA} BB' e^{sA'} ds.
    pub condition_integral: bool,
    pub sigma_inf: Option<RMatrix>,
}

/// Decides existence of an invariant measure: the span of
/// [B, AB, ..., A^{d-1}B] must sit inside S-; equivalently the covariance
/// integral converges, in which case it solves the stable-block Lyapunov
/// equation.
pub fn ou_invariant_exists(model: &OuModel, tol: f64) -> Result<OuInvariantReport> {
    let d = model.dim();
    let a_scaled = &model.a / linalg::fro(&model.a).max(1.0);
    let mut reach = RMatrix::zeros(d, d * model.b_mat.ncols().max(1));
    let mut power_b = model.b_mat.clone();
    let mut col = 0;
    for _ in 0..d {
        for c in power_b.column_iter() {
            if col < reach.ncols() {
                reach.set_column(col, &c);
                col += 1;
            }
        }
        power_b = &a_scaled * power_b;
    }
    let ctr = linalg::range(&reach, RANK_CUT);
    let stable = stable_subspace(&model.a, tol);
    let residual = linalg::containment_residual(&ctr, &stable);
    let condition_controllability = residual <= tol.max(1e-7) * (1.0 + ctr.ncols() as f64);

    // Independent route: does the covariance integral settle?
    let ctol = class_tolerance(&model.a, tol);
    let alpha = model
        .a
        .complex_eigenvalues()
        .iter()
        .filter(|l| l.re < -ctol)
        .map(|l| -l.re)
        .fold(f64::INFINITY, f64::min);
    let horizon = if alpha.is_finite() {
        (30.0 / alpha).min(1e4)
    } else {
        10.0
    };
    let mut flow = OuFlow::new(model);
    flow.advance(horizon)?;
    let g1 = flow.g.clone();
    flow.advance(horizon)?;
    let g2 = flow.g.clone();
    let condition_integral = linalg::fro(&(&g2 - &g1)) <= tol.max(1e-6) * (1.0 + linalg::fro(&g1));

    let exists = condition_controllability;
    let sigma_inf = if exists {
        if stable.ncols() == 0 {
            Some(RMatrix::zeros(d, d))
        } else {
            let a_s = stable.transpose() * &model.a * &stable;
            let b_s = stable.transpose() * &model.b_mat;
            let q_s = &b_s * b_s.transpose();
            let x = linalg::solve_lyapunov(&a_s.transpose(), &q_s)?;
            Some(&stable * x * stable.transpose())
        }
    } else {
        None
    };
    Ok(OuInvariantReport {
        exists,
        condition_controllability,
        condition_integral,
        sigma_inf,
    })
}

/// L-irreducibility: no nontrivial A'-invariant subspace inside ker(B B').
pub fn ou_irreducible(model: &OuModel, tol: f64) -> bool {
    let d = model.dim();
    let bbt = model.diffusion();
    let at = model.a.transpose();
    let at_scaled = &at / linalg::fro(&at).max(1.0);
    let mut blocks = Vec::with_capacity(d);
    let mut power = RMatrix::identity(d, d);
    for _ in 0..d {
        blocks.push(&bbt * &power);
        power = &power * &at_scaled;
    }
    linalg::stacked_kernel(&blocks, tol.max(RANK_CUT)).ncols() == 0
}

/// The classical mirror of quantum drift/diffusion data: A = Z', B B' = C
/// (B recovered as the symmetric PSD square root), b = -zeta. The drift-sign
/// bridge makes the stationary means of the two pictures agree.
pub fn quantum_classical_correspondence(dd: &DriftDiffusion) -> Result<OuModel> {
    let b = linalg::spd_sqrt(&dd.c, 1e-9)?;
    OuModel::new(dd.z.transpose(), b, -&dd.zeta)
}

/// Classical structure data: an invertible (not symplectic) change of basis
/// splitting A into a kernel block, planar rotations and a stable block.
#[derive(Debug, Clone)]
pub struct ClassicalNormalForm {
    pub m: RMatrix,
    /// dim ker A.
    pub kernel_dim: usize,
    /// Rotating plane count.
    pub d0: usize,
    /// Rotation frequencies, positive, descending.
    pub phi: Vec<f64>,
    pub a_minus: RMatrix,
    pub b_minus: RVector,
    /// Norm of the kernel-block component of the transformed drift vector;
    /// an absolutely continuous invariant measure requires it to vanish.
    pub kernel_drift_obstruction: f64,
}

/// Builds the classical normal form (plain basis completion, no symplectic
/// constraints). Requires no spectrum in the open right half-plane and
/// semisimple on-axis eigenvalues.
pub fn classical_normal_form(model: &OuModel, tol: f64) -> Result<ClassicalNormalForm> {
    let a = &model.a;
    let d = a.nrows();
    let report = spectral::classify_spectrum(a, tol)?;
    if !report.satisfies_h2 {
        return Err(GqmsError::Hypothesis(
            "classical normal form requires Sp(A) with Re <= 0",
        ));
    }
    if !report.imaginary_semisimple {
        return Err(GqmsError::Hypothesis(
            "classical normal form requires semisimple on-axis eigenvalues",
        ));
    }
    let clusters = spectral::imaginary_mode_clusters(a, tol)?;
    let mut kernel_cols: Vec<RVector> = Vec::new();
    let mut rot_pairs: Vec<(RVector, RVector, f64)> = Vec::new();
    for cl in &clusters {
        if cl.phi == 0.0 {
            for c in cl.real_kernel.column_iter() {
                kernel_cols.push(c.into_owned());
            }
        } else {
            for w in cl.kernel.column_iter() {
                let re = w.map(|x| x.re);
                let im = w.map(|x| x.im);
                // (u, v) = (Im w, Re w) realizes the block [[0,-phi],[phi,0]].
                rot_pairs.push((im, re, cl.phi));
            }
        }
    }
    rot_pairs.sort_by(|p, q| q.2.partial_cmp(&p.2).unwrap());
    let kernel_dim = kernel_cols.len();
    let d0 = rot_pairs.len();
    let stable = stable_subspace(a, tol);
    let k_stable = stable.ncols();
    if kernel_dim + 2 * d0 + k_stable != d {
        return Err(GqmsError::Domain(format!(
            "classical splitting dimensions {} + {} + {} do not fill {d}",
            kernel_dim,
            2 * d0,
            k_stable
        )));
    }
    let mut t = RMatrix::zeros(d, d);
    let mut col = 0;
    for k in kernel_cols {
        t.set_column(col, &k);
        col += 1;
    }
    for (u, _, _) in &rot_pairs {
        t.set_column(col, u);
        col += 1;
    }
    for (_, v, _) in &rot_pairs {
        t.set_column(col, v);
        col += 1;
    }
    for c in stable.column_iter() {
        t.set_column(col, &c);
        col += 1;
    }
    let m = t.clone().try_inverse().ok_or(GqmsError::SingularSolve {
        what: "classical basis inversion",
    })?;
    let a_tilde = &m * a * &t;
    let b_tilde = &m * &model.drift;
    let stable_idx: Vec<usize> = (kernel_dim + 2 * d0..d).collect();
    let a_minus = a_tilde.select_rows(&stable_idx).select_columns(&stable_idx);
    let b_minus = RVector::from_iterator(k_stable, stable_idx.iter().map(|&i| b_tilde[i]));
    let kernel_drift_obstruction =
        RVector::from_iterator(kernel_dim, (0..kernel_dim).map(|i| b_tilde[i])).norm();
    Ok(ClassicalNormalForm {
        m,
        kernel_dim,
        d0,
        phi: rot_pairs.iter().map(|p| p.2).collect(),
        a_minus,
        b_minus,
        kernel_drift_obstruction,
    })
}
