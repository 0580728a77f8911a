use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use ppda_core::dataio::{self, load_bundle, save_bundle, window_traces};
use ppda_core::fixtures;
use ppda_core::pipeline::{Augmenter, Subject};
use ppda_core::policy::{AugMode, PolicyConfig, PolicyState, SamplingMode, ScaleOrWarp, SubPolicy};
use ppda_core::synthesize_bundle;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{FixtureKind, RunArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Core(#[from] ppda_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Protocol(_) => 4,
            CliError::Core(e) => match e {
                ppda_core::Error::Io(_) => 3,
                ppda_core::Error::Frame(_) => 4,
                _ => 2,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Reads a file, mapping failures to an I/O error that names the path.
fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(CliError::io(path))
}

/// Loading errors from the core library carry no path; add it.
fn with_path<T>(path: &Path, r: ppda_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        ppda_core::Error::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Config(format!("{}: {other}", path.display())),
    })
}

pub fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s = rand::random();
            log::info!("no --seed given; generated seed {s}");
            s
        }
    }
}

pub fn load_policy(path: Option<&Path>) -> CliResult<PolicyConfig> {
    match path {
        None => Ok(PolicyConfig::default()),
        Some(p) => with_path(p, PolicyConfig::from_json(&read(p)?)),
    }
}

pub fn policy_hash(cfg: &PolicyConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_json().as_bytes()))
}

fn log_run(seed: u64, cfg: &PolicyConfig) {
    log::info!(
        "ppda {} seed={seed} mode={} policy=sha256:{}",
        env!("CARGO_PKG_VERSION"),
        cfg.mode,
        policy_hash(cfg)
    );
}

/// Everything a batch-producing command needs.
pub struct Prepared {
    pub augmenter: Augmenter,
    pub state: PolicyState,
}

fn read_labels(path: Option<&Path>, len: usize) -> CliResult<Vec<u32>> {
    let Some(path) = path else {
        return Ok(vec![0; len]);
    };
    let labels = read(path)?
        .split_whitespace()
        .map(|tok| {
            tok.parse::<u32>()
                .map_err(|_| CliError::Config(format!("{}: bad label `{tok}`", path.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if labels.len() != len {
        return Err(CliError::Config(format!(
            "{}: {} labels for {len} samples",
            path.display(),
            labels.len()
        )));
    }
    Ok(labels)
}

pub fn prepare(run: &RunArgs) -> CliResult<Prepared> {
    let mut cfg = load_policy(run.policy.as_deref())?;
    if let Some(mode) = run.mode {
        cfg.mode = mode.into();
    }
    let seed = resolve_seed(run.seed);
    log_run(seed, &cfg);
    let state = PolicyState::from_config(&cfg)?;
    let augmenter = if let Some(traces_path) = &run.traces {
        if cfg.mode != AugMode::Stda {
            return Err(CliError::Config(
                "--traces needs --mode stda; simulation mode works from bundles".into(),
            ));
        }
        let traces = with_path(traces_path, dataio::read_traces(traces_path))?;
        let len = traces.first().map_or(0, |t| t.len());
        let labels = read_labels(run.labels.as_deref(), len)?;
        let windows = window_traces(&traces, &labels, run.window, run.stride)?;
        Augmenter::from_windows(cfg, windows, run.batch, seed)?
    } else {
        if run.bundles.is_empty() {
            return Err(CliError::Config("give at least one --bundle or --traces".into()));
        }
        let subjects = run
            .bundles
            .iter()
            .map(|p| {
                let doc = with_path(p, load_bundle(p))?;
                let len = doc.bundle.dynamics.len();
                Ok(Subject {
                    labels: doc.labels.unwrap_or_else(|| vec![0; len]),
                    bundle: doc.bundle,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let mode = cfg.mode;
        Augmenter::from_subjects(cfg, mode, subjects, run.window, run.stride, run.batch, seed)?
    };
    if augmenter.num_windows() == 0 {
        return Err(CliError::Config(format!(
            "no windows: recordings are shorter than --window {}",
            run.window
        )));
    }
    log::info!(
        "{} windows, {} batches per epoch, {} sub-policies",
        augmenter.num_windows(),
        augmenter.batches_per_epoch(),
        state.len()
    );
    Ok(Prepared { augmenter, state })
}

pub fn simulate(bundle: &Path, out: &Path, seed: Option<u64>) -> CliResult<()> {
    let seed = resolve_seed(seed);
    log::info!("ppda {} simulate seed={seed}", env!("CARGO_PKG_VERSION"));
    let doc = with_path(bundle, load_bundle(bundle))?;
    let traces = synthesize_bundle(&doc.bundle, seed)?;
    std::fs::write(out, dataio::traces_to_string(&traces)).map_err(CliError::io(out))?;
    log::info!("wrote {} sensors x {} samples to {}", traces.len(), doc.bundle.dynamics.len(), out.display());
    Ok(())
}

pub fn augment(run: &RunArgs, batches: Option<u64>, out: &Path) -> CliResult<()> {
    let Prepared { augmenter, state } = prepare(run)?;
    let count = batches.unwrap_or(augmenter.batches_per_epoch() as u64);
    let file = File::create(out).map_err(CliError::io(out))?;
    let mut w = BufWriter::new(file);
    augmenter.write_batches(&mut w, &state, count).map_err(|e| match e {
        ppda_core::Error::Io(source) => CliError::Io {
            path: out.to_path_buf(),
            source,
        },
        other => other.into(),
    })?;
    w.flush().map_err(CliError::io(out))?;
    log::info!("wrote {count} batches to {}", out.display());
    Ok(())
}

/// Weights saved between runs.
#[derive(Debug, Serialize, Deserialize)]
pub struct SavedWeights {
    pub policy_sha256: String,
    pub weights: Vec<f64>,
}

pub fn policy_inspect(policy: Option<&Path>, state_path: Option<&Path>, top: usize) -> CliResult<()> {
    let cfg = load_policy(policy)?;
    let mut state = PolicyState::from_config(&cfg)?;
    if let Some(path) = state_path {
        let saved: SavedWeights = serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if saved.policy_sha256 != policy_hash(&cfg) {
            log::warn!("{} was saved for a different policy file", path.display());
        }
        state = PolicyState::with_weights(
            state.subpolicies().to_vec(),
            saved.weights,
            state.sampling(),
            state.learning_rate(),
            state.floor(),
        )?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let k = state.len();
    let io_err = CliError::io("<stdout>");
    let result = (|| -> io::Result<()> {
        if state.is_uniform(1e-12) {
            writeln!(out, "{k} sub-policies, uniform {:.7}", 1.0 / k as f64)?;
        } else {
            writeln!(out, "{k} sub-policies")?;
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| state.probabilities()[b].total_cmp(&state.probabilities()[a]));
            for &i in order.iter().take(top) {
                writeln!(out, "{i:>6} {:.7} {}", state.probabilities()[i], state.subpolicies()[i])?;
            }
        }
        Ok(())
    })();
    result.map_err(io_err)
}

pub fn policy_init(out: Option<&Path>, mode: AugMode, binary: bool) -> CliResult<()> {
    let mut cfg = PolicyConfig {
        mode,
        ..Default::default()
    };
    if binary {
        cfg.sampling = SamplingMode::Binary;
        cfg.binary_augmentation = Some(SubPolicy {
            amplitude: Some(ScaleOrWarp::Scale(1)),
            speed: Some(ScaleOrWarp::Scale(2)),
            placement: Some(0),
            hardware: Some(1),
        });
    }
    let text = cfg.to_json() + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(CliError::io(path)),
        None => io::stdout().write_all(text.as_bytes()).map_err(CliError::io("<stdout>")),
    }
}

pub fn fixture(kind: FixtureKind, out: &Path, len: usize, rate: f64, subject: &str, seed: u64) -> CliResult<()> {
    if len < 3 {
        return Err(CliError::Config("--len must be at least 3".into()));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(CliError::Config("--rate must be positive".into()));
    }
    let (mut bundle, labels) = match kind {
        FixtureKind::Walking => fixtures::walking_arm_bundle(subject, rate, len, (2.0 * rate) as usize),
        FixtureKind::Static => (fixtures::upright_bundle(rate, len), vec![0; len]),
        FixtureKind::Posed => {
            let mut rng = ppda_core::noise::rng_from_seed(seed);
            (fixtures::static_bundle(&mut rng, len), vec![0; len])
        }
        FixtureKind::Spin => (fixtures::spin_bundle(1.0, 0.2, rate, len), vec![0; len]),
        FixtureKind::Bend => (fixtures::lateral_bend_bundle(0.5, 40, rate, len), vec![0; len]),
    };
    bundle.subject_id = subject.to_string();
    with_path(out, save_bundle(out, &bundle, Some(&labels)))
}
