//! The serialized result document. Field order is fixed by the struct
//! definitions and maps are avoided, so serialization is deterministic;
//! the timestamp is the only field that varies between identical runs.

use serde::Serialize;

use vqsd::circuit::PovmSet;
use vqsd::classify::{CrossValidationOutcome, Metrics, RocCurve};
use vqsd::discrimination::CertificateReport;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub artifact_version: String,
    pub mode: String,
    pub seed: u64,
    /// Wall-clock seconds since the Unix epoch; excluded from determinism
    /// comparisons.
    pub timestamp_unix_s: u64,
    pub config: serde_json::Value,
}

impl RunMetadata {
    pub fn new(mode: &str, seed: u64, config: serde_json::Value) -> Self {
        let timestamp_unix_s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            artifact_version: ARTIFACT_VERSION.to_string(),
            mode: mode.to_string(),
            seed,
            timestamp_unix_s,
            config,
        }
    }
}

/// Dense complex matrix as separate real/imaginary row-major arrays.
#[derive(Debug, Serialize)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &vqsd::qmath::ComplexMatrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let mut re = vec![vec![0.0; cols]; rows];
        let mut im = vec![vec![0.0; cols]; rows];
        for i in 0..rows {
            for j in 0..cols {
                re[i][j] = m[(i, j)].re;
                im[i][j] = m[(i, j)].im;
            }
        }
        Self { re, im }
    }

    pub fn from_povm(povm: &PovmSet) -> Vec<Self> {
        povm.elements().iter().map(Self::from_matrix).collect()
    }
}

#[derive(Debug, Serialize)]
pub struct BaselineDoc {
    /// Analytic two-state optimum; absent for more than two states.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub helstrom_bound: Option<f64>,
    pub pgm_error: f64,
    /// Grid-search oracle; only for single-qubit two-state ensembles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force_error: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CertificateDoc {
    pub pairwise_residual_max: f64,
    pub dual_min_eigenvalue: f64,
    pub tol: f64,
    pub pass: bool,
}

impl From<&CertificateReport> for CertificateDoc {
    fn from(r: &CertificateReport) -> Self {
        Self {
            pairwise_residual_max: r.pairwise_residual_max,
            dual_min_eigenvalue: r.dual_min_eigenvalue,
            tol: r.tol,
            pass: r.pass,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MetricsDoc {
    pub accuracy: f64,
    pub per_class_auc: Vec<f64>,
    pub mean_auc: f64,
}

impl From<&Metrics> for MetricsDoc {
    fn from(m: &Metrics) -> Self {
        Self {
            accuracy: m.accuracy,
            per_class_auc: m.per_class_auc.clone(),
            mean_auc: m.mean_auc,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RocDoc {
    pub class: usize,
    pub auc: f64,
    /// `[fpr, tpr]` pairs.
    pub points: Vec<[f64; 2]>,
}

impl RocDoc {
    pub fn new(class: usize, curve: &RocCurve) -> Self {
        Self {
            class,
            auc: curve.auc,
            points: curve.points.iter().map(|&(f, t)| [f, t]).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FoldDoc {
    pub fold: usize,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub metrics: MetricsDoc,
}

#[derive(Debug, Serialize)]
pub struct ClassificationDoc {
    pub folds: Vec<FoldDoc>,
    pub mean: MetricsDoc,
    pub mean_roc: Vec<RocDoc>,
}

impl ClassificationDoc {
    pub fn from_outcome(outcome: &CrossValidationOutcome) -> Self {
        let folds = outcome
            .folds
            .iter()
            .enumerate()
            .map(|(fold, f)| FoldDoc {
                fold,
                final_cost: f.trace.final_cost,
                iterations: f.trace.iterations,
                converged: f.trace.converged,
                metrics: MetricsDoc::from(&f.metrics),
            })
            .collect();
        let mean_roc = outcome
            .mean_rocs
            .iter()
            .enumerate()
            .map(|(class, curve)| RocDoc::new(class, curve))
            .collect();
        Self {
            folds,
            mean: MetricsDoc::from(&outcome.mean_metrics),
            mean_roc,
        }
    }
}

/// Everything a run emits, serialized as `result.json`.
#[derive(Debug, Serialize)]
pub struct ResultDocument {
    pub run_metadata: RunMetadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baselines: Option<BaselineDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
    /// Trained POVM elements, one matrix per outcome.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm: Option<Vec<MatrixDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_history: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationDoc>,
}
