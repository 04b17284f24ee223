//! Model files, analysis reports and the batch/evolve pipelines behind the
//! command-line interface.
//!
//! Model files are JSON with complex entries written as [re, im] pairs.
//! Reports are JSON with a fixed field order; identical inputs produce
//! byte-identical reports.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classical;
use crate::dynamics;
use crate::error::{GqmsError, Result};
use crate::invariant::{self};
use crate::linalg::{self, CMatrix, CVector, RMatrix, RVector, C64};
use crate::model::{self, DriftDiffusion, GkslSpec};
use crate::spectral;

/// Analysis options shared by the CLI subcommands.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub tol: f64,
    pub n_max: i64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            n_max: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Metadata {
    pub name: String,
    #[serde(default)]
    pub description: String,
}

/// Complex scalar in file form: [re, im].
pub type ComplexEntry = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GkslData {
    pub omega: Vec<Vec<ComplexEntry>>,
    pub kappa: Vec<Vec<ComplexEntry>>,
    pub zeta: Vec<ComplexEntry>,
    pub u: Vec<Vec<ComplexEntry>>,
    pub v: Vec<Vec<ComplexEntry>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseSpaceData {
    pub z: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub zeta: Vec<f64>,
}

/// On-disk model description; exactly one of `gksl`/`phase_space` is present.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelFile {
    pub metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gksl: Option<GkslData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_space: Option<PhaseSpaceData>,
}

fn complex_matrix(
    rows: &[Vec<ComplexEntry>],
    field: &str,
    want_cols: Option<usize>,
) -> Result<CMatrix> {
    let r = rows.len();
    let c = rows
        .first()
        .map(|row| row.len())
        .unwrap_or_else(|| want_cols.unwrap_or(0));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(GqmsError::ModelSchema {
                field: format!("{field}[{i}]"),
                reason: format!("expected {c} entries, found {}", row.len()),
            });
        }
    }
    if let Some(w) = want_cols {
        if r > 0 && c != w {
            return Err(GqmsError::ModelSchema {
                field: field.into(),
                reason: format!("expected {w} columns, found {c}"),
            });
        }
    }
    Ok(CMatrix::from_fn(r, c, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn real_matrix(rows: &[Vec<f64>], field: &str) -> Result<RMatrix> {
    let r = rows.len();
    let c = rows.first().map(|row| row.len()).unwrap_or(0);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(GqmsError::ModelSchema {
                field: format!("{field}[{i}]"),
                reason: format!("expected {c} entries, found {}", row.len()),
            });
        }
    }
    Ok(RMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl ModelFile {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: ModelFile = serde_json::from_str(&text)?;
        Ok(file)
    }

    /// Validates the schema and produces the drift/diffusion data.
    pub fn to_drift_diffusion(&self, tol: f64) -> Result<DriftDiffusion> {
        match (&self.gksl, &self.phase_space) {
            (Some(_), Some(_)) => Err(GqmsError::ModelSchema {
                field: "gksl/phase_space".into(),
                reason: "exactly one of gksl and phase_space must be present, found both".into(),
            }),
            (None, None) => Err(GqmsError::ModelSchema {
                field: "gksl/phase_space".into(),
                reason: "exactly one of gksl and phase_space must be present, found neither".into(),
            }),
            (Some(g), None) => {
                let omega = complex_matrix(&g.omega, "gksl.omega", None)?;
                let d = omega.nrows();
                if omega.ncols() != d || d == 0 {
                    return Err(GqmsError::ModelSchema {
                        field: "gksl.omega".into(),
                        reason: "must be square and nonempty".into(),
                    });
                }
                let kappa = complex_matrix(&g.kappa, "gksl.kappa", Some(d))?;
                let u = complex_matrix(&g.u, "gksl.u", Some(d))?;
                let v = complex_matrix(&g.v, "gksl.v", Some(d))?;
                if g.zeta.len() != d {
                    return Err(GqmsError::ModelSchema {
                        field: "gksl.zeta".into(),
                        reason: format!("expected {d} entries, found {}", g.zeta.len()),
                    });
                }
                let zeta = CVector::from_fn(d, |i, _| C64::new(g.zeta[i][0], g.zeta[i][1]));
                let spec = GkslSpec::new(omega, kappa, zeta, u, v, tol.max(1e-7))?;
                model::assemble(&spec)
            }
            (None, Some(p)) => {
                let z = real_matrix(&p.z, "phase_space.z")?;
                let n = z.nrows();
                if n == 0 || z.ncols() != n || n % 2 != 0 {
                    return Err(GqmsError::ModelSchema {
                        field: "phase_space.z".into(),
                        reason: format!(
                            "must be square with even dimension, found {n}x{}",
                            z.ncols()
                        ),
                    });
                }
                let c = real_matrix(&p.c, "phase_space.c")?;
                if c.shape() != (n, n) {
                    return Err(GqmsError::ModelSchema {
                        field: "phase_space.c".into(),
                        reason: format!("must be {n}x{n}"),
                    });
                }
                if p.zeta.len() != n {
                    return Err(GqmsError::ModelSchema {
                        field: "phase_space.zeta".into(),
                        reason: format!("expected {n} entries, found {}", p.zeta.len()),
                    });
                }
                let zeta = RVector::from_vec(p.zeta.clone());
                DriftDiffusion::new(z, c, zeta, tol.max(1e-7))
            }
        }
    }
}

/// A report field that is either computed or marked inapplicable together
/// with the violated precondition.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Flagged<T> {
    Value(T),
    NotApplicable { not_applicable: String },
}

impl<T> Flagged<T> {
    pub fn na(reason: &str) -> Self {
        Flagged::NotApplicable {
            not_applicable: reason.to_string(),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Flagged::Value(v) => Some(v),
            Flagged::NotApplicable { .. } => None,
        }
    }
}

fn matrix_rows(m: &RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<ComplexEntry>,
    pub negative: usize,
    pub imaginary: usize,
    pub positive: usize,
    pub satisfies_h2: bool,
    pub imaginary_semisimple: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExistenceSummary {
    pub exists: bool,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NormalFormSummary {
    pub d0: usize,
    pub angles: Vec<f64>,
    pub m: Vec<Vec<f64>>,
    pub w_center: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StationarySummary {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub symplectic_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RationalDependenceSummary {
    pub found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FlagSummary {
    pub faithful: Flagged<bool>,
    pub irreducible: Flagged<bool>,
    pub ground_state: Flagged<bool>,
    pub rational_dependence: Flagged<RationalDependenceSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RecurrenceSummary {
    pub positive_recurrent_dim_defect: usize,
    pub transient_dim: usize,
    pub null_recurrent_trivial: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KmsSummary {
    pub holds: bool,
    pub witness_min_eig: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GapSummary {
    pub kms: Flagged<KmsSummary>,
    pub decay_rate: Flagged<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassicalSummary {
    pub invariant_measure_exists: bool,
    pub condition_controllability: bool,
    pub condition_integral: bool,
    pub irreducible: bool,
}

/// Full machine-readable analysis result for one model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnalysisReport {
    pub model_name: String,
    pub admissible: bool,
    pub spectrum: Flagged<SpectrumSummary>,
    pub existence: Flagged<ExistenceSummary>,
    pub normal_form: Flagged<NormalFormSummary>,
    pub stationary: Flagged<StationarySummary>,
    pub flags: FlagSummary,
    pub recurrence: Flagged<RecurrenceSummary>,
    pub gap: GapSummary,
    pub classical_mirror: Flagged<ClassicalSummary>,
}

/// Runs the full analysis pipeline on already-validated data.
pub fn analyze(name: &str, dd: &DriftDiffusion, opts: AnalysisOptions) -> Result<AnalysisReport> {
    let tol = opts.tol;
    let admissible = model::validate_admissibility(dd, tol.max(1e-8));
    if !admissible {
        let na = "admissibility: C + i(Z'J + JZ) has a negative eigenvalue";
        return Ok(AnalysisReport {
            model_name: name.to_string(),
            admissible,
            spectrum: Flagged::na(na),
            existence: Flagged::na(na),
            normal_form: Flagged::na(na),
            stationary: Flagged::na(na),
            flags: FlagSummary {
                faithful: Flagged::na(na),
                irreducible: Flagged::na(na),
                ground_state: Flagged::na(na),
                rational_dependence: Flagged::na(na),
            },
            recurrence: Flagged::na(na),
            gap: GapSummary {
                kms: Flagged::na(na),
                decay_rate: Flagged::na(na),
            },
            classical_mirror: Flagged::na(na),
        });
    }

    let spec_report = spectral::classify_spectrum(&dd.z, tol)?;
    let spectrum = SpectrumSummary {
        eigenvalues: spec_report
            .eigenvalues
            .iter()
            .map(|l| [l.re, l.im])
            .collect(),
        negative: spec_report.class_negative.len(),
        imaginary: spec_report.class_imaginary.len(),
        positive: spec_report.class_positive.len(),
        satisfies_h2: spec_report.satisfies_h2,
        imaginary_semisimple: spec_report.imaginary_semisimple,
    };

    let verdict = invariant::decide_existence(dd, tol)?;
    let existence = ExistenceSummary {
        exists: verdict.exists,
        reason: verdict.reason.as_str().to_string(),
    };

    let no_state = "existence: no normal invariant state";
    let (normal_form, stationary, flags, recurrence, gap_kms, gap_rate) = match &verdict.normal_form
    {
        Some(nf) => {
            let descriptor = invariant::invariant_set_descriptor(dd, tol, opts.n_max)?;
            let nf_summary = NormalFormSummary {
                d0: nf.d0,
                angles: nf.phi.clone(),
                m: matrix_rows(&nf.m),
                w_center: nf.w_center.iter().copied().collect(),
            };
            let stationary = if nf.stable_modes() > 0 {
                Flagged::Value(StationarySummary {
                    mean: descriptor.stationary.mean.iter().copied().collect(),
                    covariance: matrix_rows(&descriptor.stationary.covariance),
                    symplectic_eigenvalues: descriptor.symplectic_eigenvalues.clone(),
                })
            } else {
                Flagged::na("stable factor is trivial (d0 = d)")
            };
            let ground_state = if linalg::fro(&dd.c) <= tol.max(1e-9) * linalg::scale_of(&dd.c) {
                Flagged::Value(invariant::ground_state_flag(dd, tol)?)
            } else {
                Flagged::na("requires purely Hamiltonian data (C = 0)")
            };
            let flags = FlagSummary {
                faithful: Flagged::Value(descriptor.faithful),
                irreducible: Flagged::Value(descriptor.irreducible),
                ground_state,
                rational_dependence: Flagged::Value(RationalDependenceSummary {
                    found: descriptor.rational_dependence_flag(),
                    witness: descriptor.rational_dependence_witness.clone(),
                }),
            };
            let recurrence_report = invariant::recurrence_classification(&descriptor);
            let recurrence = RecurrenceSummary {
                positive_recurrent_dim_defect: recurrence_report.positive_recurrent_dim_defect,
                transient_dim: recurrence_report.transient_dim,
                null_recurrent_trivial: recurrence_report.null_recurrent_trivial,
            };
            let (gap_kms, gap_rate) = if nf.stable_modes() > 0 {
                let rate = dynamics::decay_rate_estimate(&nf.z_minus);
                let kms = if descriptor.faithful {
                    let rep = dynamics::kms_gap_condition(
                        &nf.z_minus,
                        &descriptor.stationary.covariance,
                        tol,
                    )?;
                    Flagged::Value(KmsSummary {
                        holds: rep.holds,
                        witness_min_eig: rep.witness_min_eig,
                    })
                } else {
                    Flagged::na(
                        "faithfulness: stationary covariance has a symplectic eigenvalue at 1",
                    )
                };
                (kms, Flagged::Value(rate))
            } else {
                let na = "stable factor is trivial (d0 = d)";
                (Flagged::na(na), Flagged::na(na))
            };
            (
                Flagged::Value(nf_summary),
                stationary,
                flags,
                Flagged::Value(recurrence),
                gap_kms,
                gap_rate,
            )
        }
        None => (
            Flagged::na(no_state),
            Flagged::na(no_state),
            FlagSummary {
                faithful: Flagged::na(no_state),
                irreducible: Flagged::na(no_state),
                ground_state: if linalg::fro(&dd.c) <= tol.max(1e-9) * linalg::scale_of(&dd.c) {
                    Flagged::Value(false)
                } else {
                    Flagged::na("requires purely Hamiltonian data (C = 0)")
                },
                rational_dependence: Flagged::na(no_state),
            },
            Flagged::na(no_state),
            Flagged::na(no_state),
            Flagged::na(no_state),
        ),
    };

    let classical_mirror = {
        let model = classical::quantum_classical_correspondence(dd)?;
        let rep = classical::ou_invariant_exists(&model, tol)?;
        Flagged::Value(ClassicalSummary {
            invariant_measure_exists: rep.exists,
            condition_controllability: rep.condition_controllability,
            condition_integral: rep.condition_integral,
            irreducible: classical::ou_irreducible(&model, tol),
        })
    };

    Ok(AnalysisReport {
        model_name: name.to_string(),
        admissible,
        spectrum: Flagged::Value(spectrum),
        existence: Flagged::Value(existence),
        normal_form,
        stationary,
        flags,
        recurrence,
        gap: GapSummary {
            kms: gap_kms,
            decay_rate: gap_rate,
        },
        classical_mirror,
    })
}

/// Loads a model file and runs the analysis pipeline.
pub fn run_analyze(path: &Path, opts: AnalysisOptions) -> Result<AnalysisReport> {
    let file = ModelFile::from_path(path)?;
    let dd = file.to_drift_diffusion(opts.tol)?;
    analyze(&file.metadata.name, &dd, opts)
}

pub fn report_to_json(report: &AnalysisReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// Human-readable one-screen rendering of a report.
pub fn report_to_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: String| {
        out.push_str(&line);
        out.push('\n');
    };
    push(&mut out, format!("model: {}", report.model_name));
    push(&mut out, format!("admissible: {}", report.admissible));
    if let Flagged::Value(s) = &report.spectrum {
        push(
            &mut out,
            format!(
                "spectrum: {} negative / {} imaginary / {} positive, H2 {}, semisimple {}",
                s.negative, s.imaginary, s.positive, s.satisfies_h2, s.imaginary_semisimple
            ),
        );
    }
    if let Flagged::Value(e) = &report.existence {
        push(
            &mut out,
            format!("invariant state exists: {} ({})", e.exists, e.reason),
        );
    }
    if let Flagged::Value(nf) = &report.normal_form {
        push(
            &mut out,
            format!("normal form: d0 = {}, angles = {:?}", nf.d0, nf.angles),
        );
    }
    if let Flagged::Value(st) = &report.stationary {
        push(
            &mut out,
            format!(
                "stationary symplectic eigenvalues: {:?}",
                st.symplectic_eigenvalues
            ),
        );
    }
    push(
        &mut out,
        format!(
            "faithful: {:?}, irreducible: {:?}",
            report.flags.faithful, report.flags.irreducible
        ),
    );
    if let Flagged::Value(c) = &report.classical_mirror {
        push(
            &mut out,
            format!(
                "classical mirror: invariant measure {}, irreducible {}",
                c.invariant_measure_exists, c.irreducible
            ),
        );
    }
    out
}

/// Options for the trajectory export.
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub m0: RVector,
    pub sigma0: RMatrix,
    pub horizon: f64,
    pub steps: usize,
    pub probe: Option<RVector>,
    pub precision: usize,
    pub tol: f64,
}

/// Runs the moment evolution and writes a comma-delimited table: time, mean
/// components, covariance upper triangle, and (when the model admits an
/// invariant state) the decoherence defect of the probe vector.
pub fn run_evolve(path: &Path, opts: &EvolveOptions) -> Result<String> {
    let file = ModelFile::from_path(path)?;
    let dd = file.to_drift_diffusion(opts.tol)?;
    let n = dd.z.nrows();
    if opts.m0.len() != n || opts.sigma0.shape() != (n, n) {
        return Err(GqmsError::Shape(format!(
            "initial condition must have dimension {n} to match the model"
        )));
    }
    if opts.steps == 0 {
        return Err(GqmsError::Domain("steps must be at least 1".into()));
    }
    let grid: Vec<f64> = (0..=opts.steps)
        .map(|k| opts.horizon * k as f64 / opts.steps as f64)
        .collect();
    let traj = dynamics::evolve_moments(&dd, &opts.m0, &opts.sigma0, &grid, opts.tol)?;

    // Decoherence defect column only when the splitting machinery applies.
    let split = match invariant::decide_existence(&dd, opts.tol) {
        Ok(v) if v.exists => Some(spectral::invariant_splitting(&dd.z, opts.tol)?),
        _ => None,
    };
    let probe = opts
        .probe
        .clone()
        .unwrap_or_else(|| RVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }));
    if probe.len() != n {
        return Err(GqmsError::Shape(format!(
            "probe vector must have dimension {n}"
        )));
    }

    let p = opts.precision;
    let mut header: Vec<String> = vec!["t".into()];
    for i in 0..n {
        header.push(format!("m{i}"));
    }
    for i in 0..n {
        for j in i..n {
            header.push(format!("s{i}{j}"));
        }
    }
    if split.is_some() {
        header.push("eid_defect".into());
    }
    let mut lines = vec![header.join(",")];
    for (k, &t) in traj.times.iter().enumerate() {
        let mut row: Vec<String> = vec![format!("{t:.p$e}")];
        for i in 0..n {
            row.push(format!("{:.p$e}", traj.means[k][i]));
        }
        for i in 0..n {
            for j in i..n {
                row.push(format!("{:.p$e}", traj.covariances[k][(i, j)]));
            }
        }
        if let Some(s) = &split {
            let defect = dynamics::eid_defect(&dd, s, &probe, t)?;
            row.push(format!("{defect:.p$e}"));
        }
        lines.push(row.join(","));
    }
    lines.push(String::new());
    Ok(lines.join("\n"))
}

/// One row of the batch summary table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub exists: String,
    pub d0: String,
    pub faithful: String,
    pub irreducible: String,
    pub gap_holds: String,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub rows: Vec<SummaryRow>,
    pub failures: Vec<(String, String)>,
    pub report_paths: Vec<PathBuf>,
}

fn flag_cell<T: std::fmt::Display>(f: &Flagged<T>) -> String {
    match f {
        Flagged::Value(v) => v.to_string(),
        Flagged::NotApplicable { .. } => "n/a".into(),
    }
}

/// Analyzes every `.json` model in a directory (sorted by file name), writing
/// one report per model plus `summary.csv`. Per-model failures are recorded
/// and do not abort the batch.
pub fn run_batch(dir: &Path, out_dir: &Path, opts: AnalysisOptions) -> Result<BatchOutcome> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    entries.sort();
    fs::create_dir_all(out_dir)?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut report_paths = Vec::new();
    for path in entries {
        let display = path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .to_string();
        match run_analyze(&path, opts) {
            Ok(report) => {
                let stem = path
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .to_string();
                let out_path = out_dir.join(format!("{stem}.report.json"));
                fs::write(&out_path, report_to_json(&report)?)?;
                let exists = report
                    .existence
                    .value()
                    .map(|e| e.exists.to_string())
                    .unwrap_or_else(|| "n/a".into());
                let d0 = report
                    .normal_form
                    .value()
                    .map(|nf| nf.d0.to_string())
                    .unwrap_or_else(|| "n/a".into());
                let gap_holds = match &report.gap.kms {
                    Flagged::Value(k) => k.holds.to_string(),
                    Flagged::NotApplicable { .. } => "n/a".into(),
                };
                rows.push(SummaryRow {
                    name: report.model_name.clone(),
                    exists,
                    d0,
                    faithful: flag_cell(&report.flags.faithful),
                    irreducible: flag_cell(&report.flags.irreducible),
                    gap_holds,
                });
                report_paths.push(out_path);
            }
            Err(err) => failures.push((display, err.to_string())),
        }
    }

    let mut csv = String::from("name,exists,d0,faithful,irreducible,gap_holds\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.name, r.exists, r.d0, r.faithful, r.irreducible, r.gap_holds
        ));
    }
    if !failures.is_empty() {
        csv.push_str("# failures\n");
        for (file, err) in &failures {
            csv.push_str(&format!("# {file}: {err}\n"));
        }
    }
    fs::write(out_dir.join("summary.csv"), csv)?;
    Ok(BatchOutcome {
        rows,
        failures,
        report_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn damped_model_json() -> &'static str {
        r#"{
            "metadata": {"name": "damped", "description": "one lossy mode"},
            "gksl": {
                "omega": [[[0.0, 0.0]]],
                "kappa": [[[0.0, 0.0]]],
                "zeta": [[0.0, 0.0]],
                "u": [[[0.0, 0.0]]],
                "v": [[[1.4142135623730951, 0.0]]]
            }
        }"#
    }

    #[test]
    fn model_file_round_trip() {
        let file: ModelFile = serde_json::from_str(damped_model_json()).unwrap();
        let dd = file.to_drift_diffusion(1e-9).unwrap();
        assert_eq!(dd.modes(), 1);
        let text = serde_json::to_string(&file).unwrap();
        let again: ModelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file, again);
    }

    #[test]
    fn rejects_both_and_neither() {
        let both = r#"{
            "metadata": {"name": "x"},
            "gksl": {"omega": [[[0.0,0.0]]], "kappa": [[[0.0,0.0]]], "zeta": [[0.0,0.0]], "u": [], "v": []},
            "phase_space": {"z": [[0.0,0.0],[0.0,0.0]], "c": [[0.0,0.0],[0.0,0.0]], "zeta": [0.0,0.0]}
        }"#;
        let f: ModelFile = serde_json::from_str(both).unwrap();
        assert!(f.to_drift_diffusion(1e-9).is_err());
        let neither = r#"{"metadata": {"name": "x"}}"#;
        let f: ModelFile = serde_json::from_str(neither).unwrap();
        assert!(f.to_drift_diffusion(1e-9).is_err());
    }

    #[test]
    fn rejects_odd_dimension() {
        let odd = r#"{
            "metadata": {"name": "odd"},
            "phase_space": {"z": [[0.0]], "c": [[0.0]], "zeta": [0.0]}
        }"#;
        let f: ModelFile = serde_json::from_str(odd).unwrap();
        let err = f.to_drift_diffusion(1e-9).unwrap_err();
        assert!(err.to_string().contains("phase_space.z"));
    }

    #[test]
    fn inadmissible_model_reports_na_everywhere_and_round_trips() {
        let dd = crate::model::DriftDiffusion {
            z: nalgebra::DMatrix::identity(2, 2).scale(-1.0),
            c: nalgebra::DMatrix::zeros(2, 2),
            zeta: nalgebra::DVector::zeros(2),
        };
        let report = analyze("bad", &dd, AnalysisOptions::default()).unwrap();
        assert!(!report.admissible);
        assert!(matches!(report.spectrum, Flagged::NotApplicable { .. }));
        assert!(matches!(
            report.flags.faithful,
            Flagged::NotApplicable { .. }
        ));
        let json = report_to_json(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn pure_oscillator_report_round_trips_with_partial_na() {
        let z = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let dd = crate::model::DriftDiffusion::new(
            z,
            nalgebra::DMatrix::zeros(2, 2),
            nalgebra::DVector::zeros(2),
            1e-9,
        )
        .unwrap();
        let report = analyze("oscillator", &dd, AnalysisOptions::default()).unwrap();
        assert!(report.existence.value().unwrap().exists);
        assert!(matches!(report.stationary, Flagged::NotApplicable { .. }));
        assert!(matches!(report.gap.kms, Flagged::NotApplicable { .. }));
        assert_eq!(report.flags.ground_state, Flagged::Value(true));
        let json = report_to_json(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn analysis_report_round_trips() {
        let file: ModelFile = serde_json::from_str(damped_model_json()).unwrap();
        let dd = file.to_drift_diffusion(1e-9).unwrap();
        let report = analyze("damped", &dd, AnalysisOptions::default()).unwrap();
        let json = report_to_json(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
        assert!(report.existence.value().unwrap().exists);
        assert_eq!(report.flags.faithful, Flagged::Value(false));
    }
}
