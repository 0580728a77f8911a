use std::ops::Range;

use rand::Rng;

use super::{AugMode, PolicyConfig, RotationScope, ScaleOrWarp, SubPolicy};
use crate::error::{Error, Result};
use crate::kinematics::synthesize_imu;
use crate::model::MotionBundle;
use crate::noise::{derive_seed, rng_from_seed};
use crate::ppda::{
    amplitude_scale_by, amplitude_warp_with, apply_placement_offsets, placement_swap,
    sample_placement_offsets, speed_resample, HardwareDraw, PlacementOffset, SpeedChange,
};
use crate::quat::Mat3;
use crate::stda::{
    draw_scale_factor, jitter, magnitude_scale_by, magnitude_warp_with, make_magnitude_curve,
    make_time_warp, rotate_with, time_scale, time_warp_with, RotationAngles, SignalWindow, WarpCurve,
};

/// Seeds for one augmented window. `batch` is shared by every window of a
/// mini-batch; `window` is unique to the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub window: u64,
    pub batch: u64,
}

impl From<u64> for Seeds {
    fn from(seed: u64) -> Self {
        Seeds {
            window: seed,
            batch: seed,
        }
    }
}

/// A span of a subject's recording, to be augmented and re-synthesized.
#[derive(Debug, Clone)]
pub struct SimulationWindow<'a> {
    pub bundle: &'a MotionBundle,
    pub span: Range<usize>,
    pub label: u32,
    /// Subjects whose placements may be borrowed.
    pub donors: &'a [MotionBundle],
}

#[derive(Debug, Clone, Copy)]
pub enum AugmentInput<'a> {
    Signal(&'a SignalWindow),
    Simulation(&'a SimulationWindow<'a>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MagnitudeDraw {
    Scale(f64),
    Warp(WarpCurve),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StdaDraw {
    pub magnitude: Option<MagnitudeDraw>,
    pub time: Option<SpeedChange>,
    pub rotation: Option<RotationAngles>,
    /// `(σ, seed)` of the additive noise.
    pub jitter: Option<(f64, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementDraw {
    /// Index into the donor list whose placement is worn.
    pub donor: Option<usize>,
    pub offsets: Vec<PlacementOffset>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PpdaDraw {
    pub amplitude: Option<MagnitudeDraw>,
    pub speed: Option<SpeedChange>,
    pub placement: Option<PlacementDraw>,
    pub hardware: Option<HardwareDraw>,
    /// Joints the amplitude change applies to; `None` means all.
    pub joint_mask: Option<Vec<usize>>,
}

fn draw_magnitude(choice: ScaleOrWarp, cfg: &PolicyConfig, len: usize, seed: u64) -> Result<MagnitudeDraw> {
    Ok(match choice {
        ScaleOrWarp::Scale(i) => MagnitudeDraw::Scale(draw_scale_factor(cfg.amplitude.scale_sigma[i], seed)?),
        ScaleOrWarp::Warp(i) => {
            let w = cfg.amplitude.warp[i];
            MagnitudeDraw::Warp(make_magnitude_curve(len, w.sigma, w.knots, seed)?)
        }
    })
}

fn draw_speed(choice: ScaleOrWarp, cfg: &PolicyConfig, len: usize, seed: u64) -> Result<SpeedChange> {
    Ok(match choice {
        ScaleOrWarp::Scale(i) => {
            let [lo, hi] = cfg.speed.scale_ranges[i];
            let beta = if lo == hi { lo } else { rng_from_seed(seed).random_range(lo..=hi) };
            SpeedChange::Uniform(beta)
        }
        ScaleOrWarp::Warp(i) => {
            let w = cfg.speed.warp[i];
            SpeedChange::Warp(make_time_warp(len, w.knots, w.max_speed_ratio, seed)?)
        }
    })
}

/// Draws every random quantity of a signal-mode sub-policy for a window of
/// `len` samples.
pub fn draw_stda(sp: &SubPolicy, cfg: &PolicyConfig, len: usize, seeds: Seeds) -> Result<StdaDraw> {
    sp.validate(cfg)?;
    let seed = seeds.window;
    let magnitude = sp
        .amplitude
        .map(|c| draw_magnitude(c, cfg, len, derive_seed(seed, "magnitude", 0)))
        .transpose()?;
    let time = sp
        .speed
        .map(|c| draw_speed(c, cfg, len, derive_seed(seed, "time", 0)))
        .transpose()?;
    let rotation = sp
        .placement
        .map(|i| {
            let base = match cfg.rotation_scope {
                RotationScope::Window => seeds.window,
                RotationScope::Batch => seeds.batch,
            };
            RotationAngles::sample(cfg.placement[i].rotation_range_deg.to_radians(), derive_seed(base, "rotation", 0))
        })
        .transpose()?;
    let jitter = sp
        .hardware
        .map(|i| (cfg.hardware.noise_sigma[i], derive_seed(seed, "jitter", 0)));
    Ok(StdaDraw {
        magnitude,
        time,
        rotation,
        jitter,
    })
}

fn source_span(sim: &SimulationWindow<'_>, speed: Option<&SpeedChange>) -> Range<usize> {
    let len = sim.span.len();
    let needed = match speed {
        Some(SpeedChange::Uniform(beta)) if *beta > 1.0 => ((len - 1) as f64 * beta).ceil() as usize + 1,
        _ => len,
    };
    let end = (sim.span.start + needed).min(sim.bundle.dynamics.len()).max(sim.span.end);
    sim.span.start..end
}

fn check_span(sim: &SimulationWindow<'_>) -> Result<()> {
    let total = sim.bundle.dynamics.len();
    if sim.span.end > total || sim.span.start >= sim.span.end {
        return Err(Error::IndexOutOfRange {
            index: sim.span.end,
            len: total,
        });
    }
    Ok(())
}

/// Draws every random quantity of a simulation-mode sub-policy for one window.
///
/// When a uniform speed-up needs samples past the window, the amplitude curve
/// covers the extended source span.
pub fn draw_ppda(sp: &SubPolicy, cfg: &PolicyConfig, sim: &SimulationWindow<'_>, seeds: Seeds) -> Result<PpdaDraw> {
    sp.validate(cfg)?;
    check_span(sim)?;
    let seed = seeds.window;
    let len = sim.span.len();
    let speed = sp
        .speed
        .map(|c| draw_speed(c, cfg, len, derive_seed(seed, "speed", 0)))
        .transpose()?;
    let source_len = source_span(sim, speed.as_ref()).len();
    let amplitude = sp
        .amplitude
        .map(|c| draw_magnitude(c, cfg, source_len, derive_seed(seed, "amplitude", 0)))
        .transpose()?;
    let placement = sp
        .placement
        .map(|i| {
            let option = &cfg.placement[i];
            let placement_seed = derive_seed(seed, "placement", 0);
            let donor = if option.swap_subjects && !sim.donors.is_empty() {
                Some(rng_from_seed(derive_seed(placement_seed, "donor", 0)).random_range(0..sim.donors.len()))
            } else {
                None
            };
            let offsets = sample_placement_offsets(sim.bundle.placement.len(), &option.perturb, placement_seed)?;
            Ok::<_, Error>(PlacementDraw { donor, offsets })
        })
        .transpose()?;
    let hardware = sp
        .hardware
        .map(|i| {
            HardwareDraw::sample(
                sim.bundle.placement.sensors().iter().map(|s| s.sensor_id.as_str()),
                cfg.hardware.noise_sigma[i],
                cfg.hardware.bias_range,
                derive_seed(seed, "hardware", 0),
            )
        })
        .transpose()?;
    Ok(PpdaDraw {
        amplitude,
        speed,
        placement,
        hardware,
        joint_mask: cfg.joint_mask.clone(),
    })
}

/// Magnitude, then time, then rotation, then jitter. Time scaling changes
/// the window length; callers that batch windows fit it back.
pub fn apply_stda(draw: &StdaDraw, x: &SignalWindow) -> Result<SignalWindow> {
    let mut out = match &draw.magnitude {
        Some(MagnitudeDraw::Scale(alpha)) => magnitude_scale_by(x, *alpha),
        Some(MagnitudeDraw::Warp(curve)) => magnitude_warp_with(x, curve)?,
        None => x.clone(),
    };
    match &draw.time {
        Some(SpeedChange::Uniform(beta)) => out = time_scale(&out, *beta)?,
        Some(SpeedChange::Warp(curve)) => out = time_warp_with(&out, curve)?,
        None => {}
    }
    if let Some(angles) = &draw.rotation {
        let r: Mat3 = angles.matrix();
        out = rotate_with(&out, &r)?;
    }
    if let Some((sigma, seed)) = draw.jitter {
        out = jitter(&out, sigma, seed)?;
    }
    Ok(out)
}

/// Amplitude, then speed, then placement, then hardware, then synthesis of
/// the window with the window seed.
pub fn apply_ppda(draw: &PpdaDraw, sim: &SimulationWindow<'_>, seeds: Seeds) -> Result<SignalWindow> {
    check_span(sim)?;
    let len = sim.span.len();
    let mask = draw.joint_mask.as_deref();
    let source = source_span(sim, draw.speed.as_ref());
    let mut dynamics = sim.bundle.dynamics.slice(source);
    match &draw.amplitude {
        Some(MagnitudeDraw::Scale(alpha)) => dynamics = amplitude_scale_by(&dynamics, *alpha, mask)?,
        Some(MagnitudeDraw::Warp(curve)) => dynamics = amplitude_warp_with(&dynamics, curve, mask)?,
        None => {}
    }
    if let Some(change) = &draw.speed {
        dynamics = speed_resample(&dynamics, change)?;
    }
    if dynamics.len() > len {
        dynamics = dynamics.slice(0..len);
    }
    let mut bundle = MotionBundle {
        subject_id: sim.bundle.subject_id.clone(),
        body: sim.bundle.body.clone(),
        dynamics,
        placement: sim.bundle.placement.clone(),
        hardware: sim.bundle.hardware.clone(),
    };
    if let Some(p) = &draw.placement {
        if let Some(d) = p.donor {
            let donor = sim.donors.get(d).ok_or(Error::IndexOutOfRange {
                index: d,
                len: sim.donors.len(),
            })?;
            bundle = placement_swap(&bundle, donor)?;
        }
        bundle.placement = apply_placement_offsets(&bundle.placement, &p.offsets)?;
    }
    if let Some(h) = &draw.hardware {
        bundle.hardware = h.apply(&bundle.hardware)?;
    }
    let traces = synthesize_imu(&bundle.body, &bundle.dynamics, &bundle.placement, &bundle.hardware, seeds.window)?;
    SignalWindow::from_traces(&traces, 0..len, sim.label)
}

/// Draws and applies `sp`. The input kind must match `mode`.
pub fn apply(
    sp: &SubPolicy,
    input: AugmentInput<'_>,
    mode: AugMode,
    cfg: &PolicyConfig,
    seeds: impl Into<Seeds>,
) -> Result<SignalWindow> {
    let seeds = seeds.into();
    match (mode, input) {
        (AugMode::Stda, AugmentInput::Signal(x)) => apply_stda(&draw_stda(sp, cfg, x.len(), seeds)?, x),
        (AugMode::Ppda, AugmentInput::Simulation(sim)) => apply_ppda(&draw_ppda(sp, cfg, sim, seeds)?, sim, seeds),
        (AugMode::Stda, AugmentInput::Simulation(_)) => Err(Error::ModeMismatch(
            "signal-mode augmentation needs a signal window".into(),
        )),
        (AugMode::Ppda, AugmentInput::Signal(_)) => Err(Error::ModeMismatch(
            "simulation-mode augmentation needs a motion bundle".into(),
        )),
    }
}
