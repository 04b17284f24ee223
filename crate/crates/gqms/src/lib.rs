//! Numerical analysis of Gaussian quantum Markov semigroups on finitely many
//! bosonic modes, specified by a drift matrix Z, a diffusion matrix C and a
//! displacement vector zeta (or by GKSL coefficients that assemble into
//! them).
//!
//! The toolkit decides whether a semigroup admits a normal invariant state,
//! constructs the symplectic normal form splitting the dynamics into
//! harmonic-oscillator modes and a strictly stable part, characterizes the
//! invariant-state set (stationary Gaussian parameters, faithfulness,
//! irreducibility, ground states, recurrence), simulates moment and
//! characteristic-function dynamics including decoherence defects and ergodic
//! averages, evaluates spectral-gap criteria, and mirrors everything on
//! classical Ornstein-Uhlenbeck semigroups for comparison.
//!
//! Entry points: [`model::assemble`] / [`model::DriftDiffusion`] for the
//! data, [`invariant::decide_existence`] for the structure theorem,
//! [`dynamics::evolve_moments`] for simulation, [`classical`] for the
//! commutative mirror, and [`report`] for the file-based pipeline used by the
//! `gqms` binary. The `examples/` directory walks through each capability.
//!
//! ```
//! use gqms::invariant;
//! use gqms::model::DriftDiffusion;
//! use nalgebra::{DMatrix, DVector};
//!
//! // One lossy mode: Z = -I, C = 2I relaxes to the vacuum.
//! let dd = DriftDiffusion::new(
//!     -DMatrix::identity(2, 2),
//!     DMatrix::identity(2, 2).scale(2.0),
//!     DVector::zeros(2),
//!     1e-9,
//! )?;
//! let verdict = invariant::decide_existence(&dd, 1e-9)?;
//! assert!(verdict.exists);
//! let normal_form = verdict.normal_form.unwrap();
//! assert_eq!(normal_form.d0, 0); // no oscillator factor, purely stable
//! # Ok::<(), gqms::GqmsError>(())
//! ```

pub mod classical;
pub mod dynamics;
pub mod error;
pub mod invariant;
pub mod linalg;
pub mod model;
pub mod report;
pub mod sampling;
pub mod spectral;
pub mod symplectic;

pub use error::{GqmsError, Result};
