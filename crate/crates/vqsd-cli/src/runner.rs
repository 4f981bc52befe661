//! Experiment orchestration and file emission.
//!
//! Output files are written by a single coordinator after all computation,
//! atomically (temp file in the target directory, then rename). CSV files
//! carry a header row, use `.` as the decimal separator, and print doubles
//! with Rust's shortest round-trip formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use vqsd::circuit::{povm_elements, PovmCircuitSpec, PovmSet};
use vqsd::classify::{cross_validate, CrossValidationOutcome, FeatureMapConfig};
use vqsd::discrimination::{
    brute_force_two_state, error_probability, helstrom, optimality_certificate,
    pretty_good_measurement, LabeledEnsemble,
};
use vqsd::encoding::{encoder_by_name, load_iris, EncodingFunction};
use vqsd::training::{best_trace, train_on_ensemble_restarts, TrainConfig, DEFAULT_RESTARTS};

use crate::config::{resolve_seed, ResolvedExperiment};
use crate::document::{
    BaselineDoc, CertificateDoc, ClassificationDoc, MatrixDoc, ResultDocument, RunMetadata,
};
use crate::CliError;

/// Grid resolution of the brute-force baseline.
pub const BRUTE_FORCE_GRID: usize = 400;

/// Certificate tolerance reported for trained circuits.
pub const TRAINED_CERTIFICATE_TOL: f64 = 1e-5;

/// A completed run: the document and every file written.
pub struct RunArtifacts {
    pub document_path: PathBuf,
    pub files: Vec<PathBuf>,
    pub document: ResultDocument,
}

fn atomic_write(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::Io)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content).map_err(CliError::Io)?;
    fs::rename(&tmp, path).map_err(CliError::Io)?;
    Ok(())
}

fn write_document(out_dir: &Path, document: &ResultDocument) -> Result<PathBuf, CliError> {
    let path = out_dir.join("result.json");
    let json = serde_json::to_string_pretty(document)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    atomic_write(&path, &(json + "\n"))?;
    Ok(path)
}

fn cost_history_csv(history: &[f64]) -> String {
    let mut csv = String::from("iteration,cost\n");
    for (i, c) in history.iter().enumerate() {
        let _ = writeln!(csv, "{},{}", i + 1, c);
    }
    csv
}

fn baselines_for(ensemble: &LabeledEnsemble) -> Result<BaselineDoc, CliError> {
    let two_state = ensemble.len() == 2;
    let helstrom_bound = if two_state {
        Some(
            helstrom(
                &ensemble.states()[0],
                &ensemble.states()[1],
                ensemble.priors()[0],
                ensemble.priors()[1],
            )
            .map_err(|e| CliError::Config(e.to_string()))?
            .bound,
        )
    } else {
        None
    };
    let brute_force_error = if two_state && ensemble.dim() == 2 {
        Some(
            brute_force_two_state(
                &ensemble.states()[0],
                &ensemble.states()[1],
                ensemble.priors()[0],
                ensemble.priors()[1],
                BRUTE_FORCE_GRID,
            )
            .map_err(|e| CliError::Config(e.to_string()))?,
        )
    } else {
        None
    };
    let pgm = pretty_good_measurement(ensemble).map_err(|e| CliError::Config(e.to_string()))?;
    let pgm_error =
        error_probability(ensemble, &pgm).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(BaselineDoc {
        helstrom_bound,
        pgm_error,
        brute_force_error,
    })
}

/// Train on the configured ensemble, evaluate baselines and the optimality
/// certificate, and write `result.json` plus `cost_history.csv`.
pub fn run_discriminate(resolved: &ResolvedExperiment) -> Result<RunArtifacts, CliError> {
    let traces = train_on_ensemble_restarts(&resolved.ensemble, &resolved.train, resolved.restarts)
        .map_err(|e| CliError::Training(e.to_string()))?;
    let best = best_trace(&traces);
    let povm: PovmSet = povm_elements(&resolved.circuit, &best.final_theta)
        .map_err(|e| CliError::Training(e.to_string()))?;
    let certificate = optimality_certificate(&resolved.ensemble, &povm, TRAINED_CERTIFICATE_TOL)
        .map_err(|e| CliError::Training(e.to_string()))?;
    let baselines = baselines_for(&resolved.ensemble)?;

    let document = ResultDocument {
        run_metadata: RunMetadata::new("discriminate", resolved.seed, resolved.config_echo.clone()),
        final_cost: Some(best.final_cost),
        converged: Some(best.converged),
        baselines: Some(baselines),
        certificate: Some(CertificateDoc::from(&certificate)),
        povm: Some(MatrixDoc::from_povm(&povm)),
        cost_history: Some(best.cost_history.clone()),
        classification: None,
    };

    let document_path = write_document(&resolved.out_dir, &document)?;
    let history_path = resolved.out_dir.join("cost_history.csv");
    atomic_write(&history_path, &cost_history_csv(&best.cost_history))?;

    Ok(RunArtifacts {
        document_path: document_path.clone(),
        files: vec![document_path, history_path],
        document,
    })
}

/// Evaluate the analytic baselines only, without training.
pub fn run_baselines(resolved: &ResolvedExperiment) -> Result<RunArtifacts, CliError> {
    let baselines = baselines_for(&resolved.ensemble)?;
    let document = ResultDocument {
        run_metadata: RunMetadata::new("baselines", resolved.seed, resolved.config_echo.clone()),
        final_cost: None,
        converged: None,
        baselines: Some(baselines),
        certificate: None,
        povm: None,
        cost_history: None,
        classification: None,
    };
    let document_path = write_document(&resolved.out_dir, &document)?;
    Ok(RunArtifacts {
        document_path: document_path.clone(),
        files: vec![document_path],
        document,
    })
}

/// Arguments of the classification pipeline after flag parsing.
pub struct ClassifyArgs {
    pub data: Option<PathBuf>,
    pub n_target: usize,
    pub encoding: String,
    pub layers: usize,
    pub folds: usize,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Number of Iris classes / labeled outcomes.
const IRIS_CLASSES: usize = 3;
const IRIS_ANCILLAS: usize = 2;

fn default_iris_path() -> PathBuf {
    let local = PathBuf::from("data/iris.csv");
    if local.exists() {
        return local;
    }
    // Fall back to the copy shipped in the repository, for runs from
    // anywhere inside the workspace.
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/iris.csv")
}

/// Stratified cross-validated Iris classification; writes metrics JSON,
/// per-class mean-ROC CSVs, and per-fold prediction CSVs.
pub fn run_classify_iris(args: &ClassifyArgs) -> Result<RunArtifacts, CliError> {
    let encoder: &'static dyn EncodingFunction =
        encoder_by_name(&args.encoding).ok_or_else(|| {
            CliError::Config(format!(
                "unknown encoding {:?} (available: {})",
                args.encoding,
                vqsd::encoding::encoder_names().join(", ")
            ))
        })?;
    let data_path = args.data.clone().unwrap_or_else(default_iris_path);
    let dataset = load_iris(&data_path).map_err(|e| {
        CliError::Config(format!("cannot load Iris data {}: {e}", data_path.display()))
    })?;

    let (target_qubits, n_target) = match args.n_target {
        // A single-target measurement reads the second qubit of the
        // two-qubit feature state.
        1 => (vec![1], 1),
        2 => (vec![0, 1], 2),
        other => {
            return Err(CliError::Config(format!(
                "n_target must be 1 or 2, got {other}"
            )))
        }
    };
    let circuit = PovmCircuitSpec::try_new(n_target, IRIS_ANCILLAS, IRIS_CLASSES, target_qubits)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let seed = resolve_seed(args.seed, None)?;
    let mut train = TrainConfig::new(circuit.clone());
    train.seed = seed;
    if args.folds < 2 {
        return Err(CliError::Config("need at least two folds".into()));
    }

    let feature_config = FeatureMapConfig {
        encoder,
        layers: args.layers,
    };
    let outcome: CrossValidationOutcome = cross_validate(
        &dataset,
        &feature_config,
        &circuit,
        &train,
        DEFAULT_RESTARTS,
        args.folds,
        seed,
    )
    .map_err(|e| CliError::Training(e.to_string()))?;

    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let config_echo = serde_json::json!({
        "mode": "classify-iris",
        "data": data_path.display().to_string(),
        "n_target": n_target,
        "n_ancilla": IRIS_ANCILLAS,
        "encoding": encoder.name(),
        "layers": args.layers,
        "folds": args.folds,
        "restarts": DEFAULT_RESTARTS,
        "seed": seed,
        "output": out_dir.display().to_string(),
    });

    let document = ResultDocument {
        run_metadata: RunMetadata::new("classify-iris", seed, config_echo),
        final_cost: None,
        converged: None,
        baselines: None,
        certificate: None,
        povm: None,
        cost_history: None,
        classification: Some(ClassificationDoc::from_outcome(&outcome)),
    };
    let document_path = write_document(&out_dir, &document)?;
    let mut files = vec![document_path.clone()];

    for (class, curve) in outcome.mean_rocs.iter().enumerate() {
        let mut csv = String::from("fpr,tpr\n");
        for &(f, t) in &curve.points {
            let _ = writeln!(csv, "{f},{t}");
        }
        let path = out_dir.join(format!("roc_class{class}.csv"));
        atomic_write(&path, &csv)?;
        files.push(path);
    }

    for (fold, fold_outcome) in outcome.folds.iter().enumerate() {
        let mut csv = String::from("index,truth,predicted,p0,p1,p2\n");
        for record in &fold_outcome.predictions {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                record.index,
                record.truth,
                record.predicted,
                record.probabilities[0],
                record.probabilities[1],
                record.probabilities[2],
            );
        }
        let path = out_dir.join(format!("predictions_fold{fold}.csv"));
        atomic_write(&path, &csv)?;
        files.push(path);
    }

    Ok(RunArtifacts {
        document_path,
        files,
        document,
    })
}
