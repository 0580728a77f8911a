//! Windowing subjects into mini-batches and augmenting them in parallel.

use std::io::Write;
use std::ops::Range;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataio::frame::{write_message, BatchFrame};
use crate::dataio::window::labelled_spans;
use crate::error::{Error, Result};
use crate::kinematics::synthesize_bundle;
use crate::model::MotionBundle;
use crate::noise::{derive_seed, rng_from_seed};
use crate::policy::{apply, AugMode, AugmentInput, PolicyConfig, PolicyState, Seeds, SimulationWindow};
use crate::stda::SignalWindow;

#[derive(Debug, Clone)]
struct SpanRef {
    subject: usize,
    span: Range<usize>,
    label: u32,
}

#[derive(Debug, Clone)]
enum Source {
    Simulation {
        subjects: Vec<MotionBundle>,
        /// Other subjects, per subject, for placement swaps.
        donors: Vec<Vec<MotionBundle>>,
        spans: Vec<SpanRef>,
    },
    Signals(Vec<SignalWindow>),
}

/// Produces augmented mini-batches from a fixed set of windows.
///
/// Batch `b` belongs to epoch `b / batches_per_epoch`; each epoch visits the
/// windows in a fresh seeded order. Every random choice is derived from the
/// run seed and the batch index, so a batch can be regenerated on its own.
#[derive(Debug, Clone)]
pub struct Augmenter {
    cfg: PolicyConfig,
    mode: AugMode,
    seed: u64,
    window_len: usize,
    batch_size: usize,
    source: Source,
}

/// One labelled recording.
#[derive(Debug, Clone)]
pub struct Subject {
    pub bundle: MotionBundle,
    pub labels: Vec<u32>,
}

impl Augmenter {
    /// Windows every subject. In signal mode the subjects are synthesized
    /// once with their own hardware and the windows are cut from those traces.
    pub fn from_subjects(
        cfg: PolicyConfig,
        mode: AugMode,
        subjects: Vec<Subject>,
        window: usize,
        stride: usize,
        batch_size: usize,
        seed: u64,
    ) -> Result<Self> {
        check_batch(batch_size, window)?;
        if let Some(first) = subjects.first() {
            if let Some(other) = subjects.iter().find(|s| s.bundle.channels() != first.bundle.channels()) {
                return Err(Error::InvalidModel(format!(
                    "subject `{}` has {} channels, `{}` has {}",
                    other.bundle.subject_id,
                    other.bundle.channels(),
                    first.bundle.subject_id,
                    first.bundle.channels()
                )));
            }
        }
        let mut spans = Vec::new();
        for (i, s) in subjects.iter().enumerate() {
            if s.labels.len() != s.bundle.dynamics.len() {
                return Err(Error::LengthMismatch {
                    field: format!("labels of `{}`", s.bundle.subject_id),
                    expected: s.bundle.dynamics.len(),
                    found: s.labels.len(),
                });
            }
            for (span, label) in labelled_spans(&s.labels, window, stride)? {
                spans.push(SpanRef { subject: i, span, label });
            }
        }
        let source = match mode {
            AugMode::Ppda => {
                let bundles: Vec<MotionBundle> = subjects.into_iter().map(|s| s.bundle).collect();
                let swaps = cfg.placement.iter().any(|p| p.swap_subjects);
                let donors = (0..bundles.len())
                    .map(|i| {
                        if !swaps {
                            return Vec::new();
                        }
                        bundles
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != i)
                            .map(|(_, b)| b.clone())
                            .collect()
                    })
                    .collect();
                Source::Simulation {
                    subjects: bundles,
                    donors,
                    spans,
                }
            }
            AugMode::Stda => {
                let traces = subjects
                    .par_iter()
                    .enumerate()
                    .map(|(i, s)| synthesize_bundle(&s.bundle, derive_seed(seed, "baseline", i as u64)))
                    .collect::<Result<Vec<_>>>()?;
                let windows = spans
                    .into_iter()
                    .map(|r| SignalWindow::from_traces(&traces[r.subject], r.span, r.label))
                    .collect::<Result<Vec<_>>>()?;
                Source::Signals(windows)
            }
        };
        Ok(Augmenter {
            cfg,
            mode,
            seed,
            window_len: window,
            batch_size,
            source,
        })
    }

    /// Signal mode over windows that are already cut.
    pub fn from_windows(cfg: PolicyConfig, windows: Vec<SignalWindow>, batch_size: usize, seed: u64) -> Result<Self> {
        let window_len = windows.first().map_or(1, SignalWindow::len);
        check_batch(batch_size, window_len)?;
        if windows
            .iter()
            .any(|w| w.len() != window_len || w.channels() != windows[0].channels())
        {
            return Err(Error::param("windows", "all windows must share one shape"));
        }
        Ok(Augmenter {
            cfg,
            mode: AugMode::Stda,
            seed,
            window_len,
            batch_size,
            source: Source::Signals(windows),
        })
    }

    pub fn mode(&self) -> AugMode {
        self.mode
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.cfg
    }

    pub fn num_windows(&self) -> usize {
        match &self.source {
            Source::Simulation { spans, .. } => spans.len(),
            Source::Signals(w) => w.len(),
        }
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.num_windows().div_ceil(self.batch_size)
    }

    fn epoch_order(&self, epoch: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.num_windows()).collect();
        order.shuffle(&mut rng_from_seed(derive_seed(self.seed, "shuffle", epoch)));
        order
    }

    /// Samples a sub-policy for batch `index` and returns its index with the
    /// augmented frame.
    pub fn batch(&self, state: &PolicyState, index: u64) -> Result<BatchFrame> {
        let per_epoch = self.batches_per_epoch() as u64;
        if per_epoch == 0 {
            return Ok(BatchFrame::from_windows(&[], 0)?);
        }
        let order = self.epoch_order(index / per_epoch);
        let start = (index % per_epoch) as usize * self.batch_size;
        let members = &order[start..(start + self.batch_size).min(order.len())];
        let sp_index = state.sample(derive_seed(self.seed, "policy", index));
        let sp = *state.subpolicy(sp_index).expect("sampled index is in range");
        let batch_seed = derive_seed(self.seed, "batch", index);
        let windows = members
            .par_iter()
            .enumerate()
            .map(|(pos, &w)| {
                let seeds = Seeds {
                    window: derive_seed(batch_seed, "window", pos as u64),
                    batch: batch_seed,
                };
                let out = match &self.source {
                    Source::Simulation {
                        subjects,
                        donors,
                        spans,
                    } => {
                        let r = &spans[w];
                        let sim = SimulationWindow {
                            bundle: &subjects[r.subject],
                            span: r.span.clone(),
                            label: r.label,
                            donors: &donors[r.subject],
                        };
                        apply(&sp, AugmentInput::Simulation(&sim), self.mode, &self.cfg, seeds)?
                    }
                    Source::Signals(windows) => {
                        apply(&sp, AugmentInput::Signal(&windows[w]), self.mode, &self.cfg, seeds)?
                    }
                };
                Ok(out.fit_length(self.window_len))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BatchFrame::from_windows(&windows, sp_index as u32)?)
    }

    /// Writes batches `0..count` as length-prefixed frames.
    pub fn write_batches(&self, w: &mut impl Write, state: &PolicyState, count: u64) -> Result<()> {
        for b in 0..count {
            write_message(w, &self.batch(state, b)?.encode())?;
        }
        Ok(())
    }
}

fn check_batch(batch_size: usize, window: usize) -> Result<()> {
    if batch_size == 0 {
        return Err(Error::param("batch", "batch size must be >= 1"));
    }
    if window == 0 {
        return Err(Error::param("window", "window size must be >= 1"));
    }
    Ok(())
}
