//! Experiment configuration: JSON schema, named state constructors, presets,
//! and resolution into library types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use vqsd::circuit::PovmCircuitSpec;
use vqsd::discrimination::LabeledEnsemble;
use vqsd::encoding::{rho_zeta, MixedStateSpec, PauliAxis};
use vqsd::qmath::{Complex64, ComplexMatrix, DensityMatrix, PureState, C_ZERO};
use vqsd::training::{TrainConfig, DEFAULT_RESTARTS};

use crate::CliError;

/// Seed used when neither the environment, the flags, nor the config set one.
pub const DEFAULT_SEED: u64 = 42;

/// Environment variable that overrides every other seed source.
pub const SEED_ENV_VAR: &str = "VQSD_SEED";

const DEFAULT_OUTPUT_DIR: &str = "out";

/// A named state constructor. The `kind` tag selects the builder; parameters
/// vary per kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    /// Tensor product of single-qubit basis states, one character per qubit
    /// out of `0`, `1`, `+`, `-`.
    Ket { value: String },
    /// One of `phi_plus`, `phi_minus`, `psi_plus`, `psi_minus`.
    Bell { value: String },
    /// Mixed single-qubit state along a Bloch axis with mixing angle in
    /// radians, produced by the purification circuit.
    RhoZeta { axis: String, angle: f64 },
    /// Explicit density matrix as separate real and imaginary parts.
    Density { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

fn single_qubit(symbol: char) -> Result<PureState, CliError> {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match symbol {
        '0' => vec![Complex64::new(1.0, 0.0), C_ZERO],
        '1' => vec![C_ZERO, Complex64::new(1.0, 0.0)],
        '+' => vec![Complex64::new(inv, 0.0), Complex64::new(inv, 0.0)],
        '-' => vec![Complex64::new(inv, 0.0), Complex64::new(-inv, 0.0)],
        other => {
            return Err(CliError::Config(format!(
                "unknown ket symbol {other:?} (expected 0, 1, + or -)"
            )))
        }
    };
    PureState::try_new(1, amps).map_err(|e| CliError::Config(e.to_string()))
}

impl StateSpec {
    pub fn build(&self) -> Result<DensityMatrix, CliError> {
        match self {
            StateSpec::Ket { value } => {
                if value.is_empty() {
                    return Err(CliError::Config("empty ket string".into()));
                }
                let mut chars = value.chars();
                let mut state = single_qubit(chars.next().unwrap())?;
                for c in chars {
                    state = state.tensor(&single_qubit(c)?);
                }
                Ok(state.to_density())
            }
            StateSpec::Bell { value } => {
                let inv = std::f64::consts::FRAC_1_SQRT_2;
                let amps = match value.as_str() {
                    "phi_plus" => [inv, 0.0, 0.0, inv],
                    "phi_minus" => [inv, 0.0, 0.0, -inv],
                    "psi_plus" => [0.0, inv, inv, 0.0],
                    "psi_minus" => [0.0, inv, -inv, 0.0],
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown Bell state {other:?}"
                        )))
                    }
                };
                let amps = amps.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                PureState::try_new(2, amps)
                    .map(|s| s.to_density())
                    .map_err(|e| CliError::Config(e.to_string()))
            }
            StateSpec::RhoZeta { axis, angle } => {
                let axis = PauliAxis::parse(axis).map_err(|e| CliError::Config(e.to_string()))?;
                rho_zeta(&MixedStateSpec {
                    axis,
                    angle: *angle,
                })
                .map_err(|e| CliError::Config(e.to_string()))
            }
            StateSpec::Density { re, im } => {
                let n = re.len();
                if im.len() != n
                    || re.iter().any(|row| row.len() != n)
                    || im.iter().any(|row| row.len() != n)
                {
                    return Err(CliError::Config(
                        "density matrix re/im parts must be square and equally sized".into(),
                    ));
                }
                let mut m = ComplexMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = Complex64::new(re[i][j], im[i][j]);
                    }
                }
                DensityMatrix::try_new(m).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }
}

/// POVM circuit shape overrides; everything optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_target: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_ancilla: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_qubits: Option<Vec<usize>>,
}

/// Optimizer overrides; unset fields keep the library defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_half_life: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

/// One discrimination experiment as written in a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Declared mode; validated against the invoked subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub states: Vec<StateSpec>,
    /// A-priori probabilities, one per state; equal when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let content = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&content)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

/// The built-in experiment presets.
pub const PRESET_NAMES: [&str; 4] = ["fig4a", "fig4b", "fig4c", "fig4d"];

/// Look up a built-in preset configuration by name.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let pi = std::f64::consts::PI;
    let rho = |axis: &str, angle: f64| StateSpec::RhoZeta {
        axis: axis.into(),
        angle,
    };
    let ket = |value: &str| StateSpec::Ket {
        value: value.into(),
    };
    let (states, n_target, n_ancilla) = match name {
        "fig4a" => (vec![rho("z", pi / 5.0), rho("x", pi / 6.0)], 1, 1),
        "fig4b" => (vec![ket("0"), ket("1"), ket("+")], 1, 2),
        "fig4c" => (
            vec![rho("z", pi / 5.0), rho("x", pi / 6.0), rho("y", pi / 8.0)],
            1,
            2,
        ),
        "fig4d" => (
            vec![
                ket("00"),
                ket("++"),
                StateSpec::Bell {
                    value: "phi_plus".into(),
                },
                StateSpec::Bell {
                    value: "psi_plus".into(),
                },
            ],
            2,
            2,
        ),
        _ => return None,
    };
    Some(ExperimentConfig {
        mode: None,
        states,
        priors: None,
        circuit: Some(CircuitConfig {
            n_target: Some(n_target),
            n_ancilla: Some(n_ancilla),
            target_qubits: None,
        }),
        train: None,
        seed: None,
        output: None,
    })
}

/// A config resolved against flags, environment, and defaults; everything the
/// runners need, plus a lossless echo for the result document.
pub struct ResolvedExperiment {
    pub ensemble: LabeledEnsemble,
    pub circuit: PovmCircuitSpec,
    pub train: TrainConfig,
    pub restarts: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub config_echo: serde_json::Value,
}

/// Seed precedence: `VQSD_SEED` environment variable, then the `--seed` flag,
/// then the config value, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, CliError> {
    if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
        return raw.parse().map_err(|_| {
            CliError::Config(format!("{SEED_ENV_VAR}={raw:?} is not a 64-bit integer"))
        });
    }
    Ok(flag.or(config).unwrap_or(DEFAULT_SEED))
}

pub fn resolve_experiment(
    config: &ExperimentConfig,
    expected_mode: &str,
    seed_flag: Option<u64>,
    out_flag: Option<&Path>,
) -> Result<ResolvedExperiment, CliError> {
    if let Some(mode) = &config.mode {
        if mode != expected_mode {
            return Err(CliError::Config(format!(
                "config declares mode {mode:?} but the {expected_mode:?} command was invoked"
            )));
        }
    }
    if config.states.len() < 2 {
        return Err(CliError::Config(
            "need at least two states to discriminate".into(),
        ));
    }

    let states: Vec<DensityMatrix> = config
        .states
        .iter()
        .map(StateSpec::build)
        .collect::<Result<_, _>>()?;
    let dim = states[0].dim();
    if states.iter().any(|s| s.dim() != dim) {
        return Err(CliError::Config(
            "all states must share one dimension".into(),
        ));
    }

    let l = states.len();
    let priors = match &config.priors {
        Some(p) => p.clone(),
        None => vec![1.0 / l as f64; l],
    };
    let ensemble = LabeledEnsemble::try_new(states, priors.clone())
        .map_err(|e| CliError::Config(e.to_string()))?;

    let circuit_cfg = config.circuit.clone().unwrap_or_default();
    let n_target = circuit_cfg
        .n_target
        .unwrap_or_else(|| dim.trailing_zeros() as usize);
    if 1usize << n_target != dim {
        return Err(CliError::Config(format!(
            "circuit n_target {n_target} does not match state dimension {dim}"
        )));
    }
    let n_ancilla = circuit_cfg
        .n_ancilla
        .unwrap_or_else(|| (l as f64).log2().ceil() as usize);
    let target_qubits = circuit_cfg
        .target_qubits
        .unwrap_or_else(|| (0..n_target).collect());
    let circuit = PovmCircuitSpec::try_new(n_target, n_ancilla, l, target_qubits)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let seed = resolve_seed(seed_flag, config.seed)?;
    let overrides = config.train.clone().unwrap_or_default();
    let mut train = TrainConfig::new(circuit.clone());
    train.seed = seed;
    if let Some(v) = overrides.learning_rate {
        train.learning_rate = v;
    }
    if let Some(v) = overrides.lr_half_life {
        train.lr_half_life = v;
    }
    if let Some(v) = overrides.beta1 {
        train.beta1 = v;
    }
    if let Some(v) = overrides.beta2 {
        train.beta2 = v;
    }
    if let Some(v) = overrides.epsilon {
        train.epsilon = v;
    }
    if let Some(v) = overrides.max_iterations {
        train.max_iterations = v;
    }
    if let Some(v) = overrides.convergence_tol {
        train.convergence_tol = v;
    }
    if let Some(v) = overrides.fd_step {
        train.fd_step = v;
    }
    if let Some(v) = overrides.init_scale {
        train.init_scale = v;
    }
    train
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let restarts = overrides.restarts.unwrap_or(DEFAULT_RESTARTS);
    if restarts == 0 {
        return Err(CliError::Config("restarts must be at least 1".into()));
    }

    let out_dir = out_flag
        .map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    // Echo the fully resolved configuration so a run can be reproduced from
    // its result document alone.
    let mut resolved = config.clone();
    resolved.mode = Some(expected_mode.to_string());
    resolved.priors = Some(priors);
    resolved.circuit = Some(CircuitConfig {
        n_target: Some(n_target),
        n_ancilla: Some(n_ancilla),
        target_qubits: Some(circuit.target_qubits().to_vec()),
    });
    resolved.train = Some(TrainOverrides {
        learning_rate: Some(train.learning_rate),
        lr_half_life: Some(train.lr_half_life),
        beta1: Some(train.beta1),
        beta2: Some(train.beta2),
        epsilon: Some(train.epsilon),
        max_iterations: Some(train.max_iterations),
        convergence_tol: Some(train.convergence_tol),
        fd_step: Some(train.fd_step),
        init_scale: Some(train.init_scale),
        restarts: Some(restarts),
    });
    resolved.seed = Some(seed);
    resolved.output = Some(out_dir.clone());
    let config_echo =
        serde_json::to_value(&resolved).map_err(|e| CliError::Config(e.to_string()))?;

    Ok(ResolvedExperiment {
        ensemble,
        circuit,
        train,
        restarts,
        seed,
        out_dir,
        config_echo,
    })
}
