//! Time evolution of Gaussian parameters and Weyl-symbol amplitudes, the
//! asymptotic decoherence factor, ergodic averages, and the two spectral-gap
//! diagnostics.
//!
//! All time integrals run through one augmented matrix exponential per step,
//!
//! ```text
//! exp(h [[Z', C, zeta], [0, -Z, 0], [0, 0, 0]])
//! ```
//!
//! which yields e^{hZ'}, int_0^h e^{sZ'} C e^{sZ} ds and
//! int_0^h e^{sZ'} zeta ds exactly. Steps are kept short enough
//! (h |Z|_F <= 1/2) that the block exponential never mixes widely separated
//! e^{+}/e^{-} scales; the running quantities are then extended by the
//! semigroup identities, so long horizons stay accurate even when Z has
//! fast-decaying directions.

use crate::error::{GqmsError, Result};
use crate::invariant::{self, GaussianParams};
use crate::linalg::{self, RMatrix, RVector, C64};
use crate::model::DriftDiffusion;
use crate::spectral::SpectralSplit;
use crate::symplectic::{williamson, PhaseMatrix};

/// Running flow quantities at the current time.
#[derive(Debug, Clone)]
pub struct MomentFlow {
    z: RMatrix,
    c: RMatrix,
    zeta: RVector,
    /// Current time.
    pub t: f64,
    /// e^{tZ}.
    pub e: RMatrix,
    /// int_0^t e^{sZ'} C e^{sZ} ds.
    pub g: RMatrix,
    /// int_0^t e^{sZ'} zeta ds.
    pub i: RVector,
    /// Single-step blocks (e^{hZ}, G_h, I_h) for the last step size; uniform
    /// grids then pay for one exponential instead of one per step.
    step_cache: Option<(f64, RMatrix, RMatrix, RVector)>,
}

impl MomentFlow {
    pub fn new(dd: &DriftDiffusion) -> Self {
        let n = dd.z.nrows();
        Self {
            z: dd.z.clone(),
            c: dd.c.clone(),
            zeta: dd.zeta.clone(),
            t: 0.0,
            e: RMatrix::identity(n, n),
            g: RMatrix::zeros(n, n),
            i: RVector::zeros(n),
            step_cache: None,
        }
    }

    /// Advances the flow by dt >= 0, substepping as needed.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        if dt < 0.0 || !dt.is_finite() {
            return Err(GqmsError::Domain(
                "time increments must be finite and nonnegative".into(),
            ));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let rate = linalg::fro(&self.z);
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
        let n = self.z.nrows();
        let mut aug = RMatrix::zeros(2 * n + 1, 2 * n + 1);
        aug.view_mut((0, 0), (n, n)).copy_from(&self.z.transpose());
        aug.view_mut((0, n), (n, n)).copy_from(&self.c);
        aug.view_mut((n, n), (n, n)).copy_from(&(-&self.z));
        for r in 0..n {
            aug[(r, 2 * n)] = self.zeta[r];
        }
        let f = (aug * h).exp();
        let e_zt_h = f.view((0, 0), (n, n)).into_owned();
        let upper_mid = f.view((0, n), (n, n)).into_owned();
        let i_h = RVector::from_iterator(n, (0..n).map(|r| f[(r, 2 * n)]));

        let e_h = e_zt_h.transpose();
        let g_h_raw = upper_mid * &e_h;
        let g_h = (&g_h_raw + g_h_raw.transpose()).scale(0.5);
        self.step_cache = Some((h, e_h.clone(), g_h.clone(), i_h.clone()));
        (e_h, g_h, i_h)
    }

    fn step(&mut self, h: f64) {
        let (e_h, g_h, i_h) = self.step_blocks(h);
        let et = self.e.transpose();
        self.g += &et * g_h * &self.e;
        self.g = (&self.g + self.g.transpose()).scale(0.5);
        self.i += &et * i_h;
        self.e = &self.e * e_h;
        self.t += h;
    }

    /// Mean at the current time for initial mean m0: e^{tZ'} m0 - I_t.
    pub fn mean(&self, m0: &RVector) -> RVector {
        self.e.transpose() * m0 - &self.i
    }

    /// Covariance at the current time for initial covariance s0:
    /// e^{tZ'} S0 e^{tZ} + G_t.
    pub fn covariance(&self, s0: &RMatrix) -> RMatrix {
        let s = self.e.transpose() * s0 * &self.e + &self.g;
        (&s + s.transpose()).scale(0.5)
    }
}

/// Flow quantities at a single time.
pub fn flow_at(dd: &DriftDiffusion, t: f64) -> Result<MomentFlow> {
    let mut flow = MomentFlow::new(dd);
    flow.advance(t)?;
    Ok(flow)
}

/// Moment trajectory along an increasing time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub means: Vec<RVector>,
    pub covariances: Vec<RMatrix>,
}

/// Evolves (m, Sigma) along `t_grid` in closed form.
pub fn evolve_moments(
    dd: &DriftDiffusion,
    m0: &RVector,
    sigma0: &RMatrix,
    t_grid: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    // Validates the admissible-covariance condition Sigma + iJ >= 0.
    GaussianParams::new(m0.clone(), sigma0.clone(), tol)?;
    if t_grid.is_empty() {
        return Err(GqmsError::Domain("time grid must be nonempty".into()));
    }
    if t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GqmsError::Domain(
            "time grid must be nonnegative and increasing".into(),
        ));
    }
    let mut flow = MomentFlow::new(dd);
    let mut times = Vec::with_capacity(t_grid.len());
    let mut means = Vec::with_capacity(t_grid.len());
    let mut covariances = Vec::with_capacity(t_grid.len());
    let mut prev = 0.0;
    for &t in t_grid {
        flow.advance(t - prev)?;
        prev = t;
        times.push(t);
        means.push(flow.mean(m0));
        covariances.push(flow.covariance(sigma0));
    }
    Ok(Trajectory {
        times,
        means,
        covariances,
    })
}

/// Evolved Weyl symbol: amplitude and flowed phase-space argument.
#[derive(Debug, Clone)]
pub struct WeylSymbol {
    pub z: RVector,
    pub amplitude: C64,
    pub evolved_z: RVector,
}

/// Amplitude exp(-q_t(z)/2 + i l_t(z)) with q_t(z) = <z, G_t z> and
/// l_t(z) = <I_t, z>, together with e^{tZ} z.
pub fn weyl_symbol(dd: &DriftDiffusion, z: &RVector, t: f64) -> Result<WeylSymbol> {
    if t < 0.0 {
        return Err(GqmsError::Domain("weyl_symbol requires t >= 0".into()));
    }
    if z.len() != dd.z.nrows() {
        return Err(GqmsError::Shape(
            "phase-space argument has wrong length".into(),
        ));
    }
    let flow = flow_at(dd, t)?;
    Ok(weyl_symbol_from_flow(&flow, z))
}

fn weyl_symbol_from_flow(flow: &MomentFlow, z: &RVector) -> WeylSymbol {
    // G_t is positive semidefinite, so clamp rounding noise to keep |amp| <= 1.
    let q = (z.transpose() * &flow.g * z)[(0, 0)].max(0.0);
    let ell = flow.i.dot(z);
    let amplitude = C64::from_polar((-0.5 * q).exp(), ell);
    WeylSymbol {
        z: z.clone(),
        amplitude,
        evolved_z: &flow.e * z,
    }
}

/// Asymptotic decoherence factor A(z2, infinity) for the stable component z2
/// of z: quadratic part from the stable-block Lyapunov Gram matrix, linear
/// part from -<zeta, Z^{-1} z2> restricted to V-.
pub fn decoherence_factor(dd: &DriftDiffusion, split: &SpectralSplit, z: &RVector) -> Result<C64> {
    let (_, z2) = split.split_vector(z)?;
    let km = split.vminus_basis.ncols();
    if km == 0 || z2.norm() == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let zb = split.zminus_coords(&dd.z);
    let abscissa = linalg::spectral_abscissa(&zb);
    if abscissa >= 0.0 {
        return Err(GqmsError::Unstable { abscissa });
    }
    let cb_raw = split.vminus_basis.transpose() * &dd.c * &split.vminus_basis;
    let cb = (&cb_raw + cb_raw.transpose()).scale(0.5);
    let c2 = split.vminus_basis.transpose() * &z2;
    let gram = linalg::solve_lyapunov(&zb, &cb)?;
    let quad = (c2.transpose() * &gram * &c2)[(0, 0)].max(0.0);
    let y = zb.lu().solve(&c2).ok_or(GqmsError::SingularSolve {
        what: "decoherence linear term",
    })?;
    let lin = -dd.zeta.dot(&(&split.vminus_basis * y));
    Ok(C64::from_polar((-0.5 * quad).exp(), lin))
}

/// Characteristic-function decoherence defect
/// |amp(z, t) - A(z2, infinity) amp_V0(z1, t)|; tends to zero as t grows.
pub fn eid_defect(dd: &DriftDiffusion, split: &SpectralSplit, z: &RVector, t: f64) -> Result<f64> {
    let (z1, _) = split.split_vector(z)?;
    let flow = flow_at(dd, t)?;
    let full = weyl_symbol_from_flow(&flow, z).amplitude;
    let a_inf = decoherence_factor(dd, split, z)?;
    let phase_v0 = C64::from_polar(1.0, flow.i.dot(&z1));
    Ok((full - a_inf * phase_v0).norm())
}

/// Spectral abscissa of the stable block, negated: the slowest decay rate.
pub fn decay_rate_estimate(z_minus: &RMatrix) -> f64 {
    -linalg::spectral_abscissa(z_minus)
}

/// Time-averaged moments over [0, T] against their predicted limits.
#[derive(Debug, Clone)]
pub struct ErgodicMeans {
    pub avg_mean: RVector,
    pub avg_covariance: RMatrix,
    /// Predicted limit of the averaged mean (original coordinates): kernel
    /// components of the initial mean survive, rotating components average to
    /// their displaced centers, stable components go to the stationary mean.
    pub predicted_mean: RVector,
    /// Predicted limit of the averaged covariance on the stable factor, in
    /// normal coordinates (the oscillator factor keeps rotating and has no
    /// single limit).
    pub predicted_covariance: RMatrix,
    /// Time-averaged covariance transported to the same stable-factor
    /// coordinates, for direct comparison with `predicted_covariance`.
    pub avg_covariance_stable: RMatrix,
}

/// Trapezoid time average of the moment trajectory over [0, T] with n_steps
/// uniform intervals, plus the predicted limits from the normal form.
pub fn ergodic_mean(
    dd: &DriftDiffusion,
    m0: &RVector,
    sigma0: &RMatrix,
    big_t: f64,
    n_steps: usize,
    tol: f64,
) -> Result<ErgodicMeans> {
    if big_t <= 0.0 || n_steps < 2 {
        return Err(GqmsError::Domain(
            "ergodic averaging needs T > 0 and n_steps >= 2".into(),
        ));
    }
    GaussianParams::new(m0.clone(), sigma0.clone(), tol)?;
    let verdict = invariant::decide_existence(dd, tol)?;
    let nf = verdict.normal_form.ok_or(GqmsError::Hypothesis(
        "ergodic averaging requires a normal invariant state",
    ))?;

    let n = dd.z.nrows();
    let h = big_t / n_steps as f64;
    let mut flow = MomentFlow::new(dd);
    let mut sum_mean = flow.mean(m0).scale(0.5);
    let mut sum_cov = flow.covariance(sigma0).scale(0.5);
    for k in 1..=n_steps {
        flow.advance(h)?;
        let w = if k == n_steps { 0.5 } else { 1.0 };
        sum_mean += flow.mean(m0).scale(w);
        sum_cov += flow.covariance(sigma0).scale(w);
    }
    let avg_mean = sum_mean.scale(h / big_t);
    let avg_covariance = sum_cov.scale(h / big_t);

    // Predicted averaged mean in normal coordinates.
    let t_basis = &nf.m_inv;
    let m0_tilde = t_basis.transpose() * m0;
    let d = nf.modes();
    let d0 = nf.d0;
    let mut pred_tilde = RVector::zeros(n);
    for k in 0..d0 {
        let phi = nf.phi[k];
        if phi == 0.0 {
            pred_tilde[k] = m0_tilde[k];
            pred_tilde[d + k] = m0_tilde[d + k];
        } else {
            // Fixed point of the rotating-block mean flow Z0' m = zeta0.
            pred_tilde[k] = -nf.zeta0[d0 + k] / phi;
            pred_tilde[d + k] = nf.zeta0[k] / phi;
        }
    }
    let stab_idx = nf.stable_indices();
    let predicted_covariance;
    if nf.stable_modes() > 0 {
        let st = invariant::stationary_gaussian(&nf.z_minus, &nf.c_minus, &nf.zeta_minus, tol)?;
        for (slot, &idx) in stab_idx.iter().enumerate() {
            pred_tilde[idx] = st.mean[slot];
        }
        predicted_covariance = st.covariance;
    } else {
        predicted_covariance = RMatrix::zeros(0, 0);
    }
    let predicted_mean = nf.m.transpose() * pred_tilde;

    let avg_tilde = t_basis.transpose() * &avg_covariance * t_basis;
    let avg_covariance_stable = avg_tilde.select_rows(&stab_idx).select_columns(&stab_idx);

    Ok(ErgodicMeans {
        avg_mean,
        avg_covariance,
        predicted_mean,
        predicted_covariance,
        avg_covariance_stable,
    })
}

/// csch(arccoth(x)) for x > 1, through the numerically direct composition.
pub fn csch_arccoth(x: f64) -> Result<f64> {
    if x <= 1.0 + 1e-12 {
        return Err(GqmsError::Domain(format!(
            "csch(arccoth(x)) requires x > 1, got {x}"
        )));
    }
    let y = 0.5 * ((x + 1.0) / (x - 1.0)).ln();
    Ok(1.0 / y.sinh())
}

/// KMS spectral-gap condition for a stable block with faithful stationary
/// covariance.
#[derive(Debug, Clone)]
pub struct KmsGapReport {
    pub holds: bool,
    pub witness_min_eig: f64,
}

/// Evaluates the positivity of -(Z' F + F Z) with F = M' f(D) M taken from
/// the symplectic diagonalization Sigma = M' D M and f = csch(arccoth(.)).
pub fn kms_gap_condition(
    z_minus: &PhaseMatrix,
    sigma_inf: &RMatrix,
    tol: f64,
) -> Result<KmsGapReport> {
    if z_minus.shape() != sigma_inf.shape() {
        return Err(GqmsError::Shape(
            "Z and Sigma must have matching shapes".into(),
        ));
    }
    let w = williamson(sigma_inf, tol)?;
    let d = w.symplectic_eigenvalues.len();
    for &nu in &w.symplectic_eigenvalues {
        if nu <= 1.0 + 1e-12 {
            return Err(GqmsError::Hypothesis(
                "KMS gap condition requires a faithful stationary state (all nu > 1)",
            ));
        }
    }
    let mut fd = RMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        let f = csch_arccoth(w.symplectic_eigenvalues[k])?;
        fd[(k, k)] = f;
        fd[(d + k, d + k)] = f;
    }
    let big_f = w.m.transpose() * fd * &w.m;
    let witness_raw = -(z_minus.transpose() * &big_f + &big_f * z_minus);
    let witness = (&witness_raw + witness_raw.transpose()).scale(0.5);
    let min_eig = linalg::sym_eigenvalues(&witness)[0];
    Ok(KmsGapReport {
        holds: min_eig > tol * linalg::scale_of(&witness),
        witness_min_eig: min_eig,
    })
}

/// Finite-dimensional semigroup gap: quadratic-form route against sampled
/// decay route.
#[derive(Debug, Clone)]
pub struct SemigroupGapReport {
    pub gap_form: f64,
    pub gap_decay: f64,
}

/// For a contraction generator A commuting with an orthogonal projector E,
/// compares the Poincare-form gap (smallest eigenvalue of the symmetric part
/// of -A restricted to range(I - E)) with the decay rate observed from
/// operator norms of e^{tA} on that subspace over a sampled time grid.
pub fn semigroup_gap_finite(a: &RMatrix, e: &RMatrix, tol: f64) -> Result<SemigroupGapReport> {
    let n = a.nrows();
    if a.ncols() != n || e.shape() != (n, n) {
        return Err(GqmsError::Shape(
            "A and E must be square of equal size".into(),
        ));
    }
    let tol = tol.max(1e-9);
    let sym_e = linalg::symmetrize_checked(e, tol.max(1e-8))?;
    let idem = linalg::fro(&(&sym_e * &sym_e - &sym_e));
    if idem > tol * linalg::scale_of(&sym_e) {
        return Err(GqmsError::Domain(format!(
            "E is not idempotent (residual {idem:.3e})"
        )));
    }
    let comm = linalg::fro(&(a * &sym_e - &sym_e * a));
    if comm > tol.max(1e-8) * linalg::scale_of(a) * linalg::scale_of(&sym_e) {
        return Err(GqmsError::Domain(format!(
            "A does not commute with the projector (residual {comm:.3e})"
        )));
    }
    let sym_a = (a + a.transpose()).scale(0.5);
    let dissip = linalg::sym_eigenvalues(&sym_a).max();
    if dissip > tol * linalg::scale_of(a) {
        return Err(GqmsError::Domain(format!(
            "e^(tA) is not a contraction semigroup (max symmetric eigenvalue {dissip:.3e})"
        )));
    }
    // Orthonormal basis of range(I - E) = ker E.
    let basis = linalg::kernel(&sym_e, 0.5);
    if basis.ncols() == 0 {
        return Err(GqmsError::Domain(
            "projector leaves no orthogonal directions".into(),
        ));
    }
    let restricted = basis.transpose() * (-&sym_a) * &basis;
    let gap_form = linalg::sym_eigenvalues(&restricted)[0];

    let grid = [1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0];
    let mut gap_decay = f64::INFINITY;
    for &t in &grid {
        let et = (a * t).exp();
        let q = basis.transpose() * et * &basis;
        let smax = linalg::jacobi_svd(&q).sigma[0];
        if smax > 0.0 {
            gap_decay = gap_decay.min(-smax.ln() / t);
        }
    }
    Ok(SemigroupGapReport {
        gap_form,
        gap_decay,
    })
}
