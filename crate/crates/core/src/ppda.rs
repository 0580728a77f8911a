//! Physically plausible augmentations: transforms on the simulation
//! parameters (dynamics, placement, hardware) that are then re-synthesized.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AxisErrors, HardwareProfile, MotionBundle, MotionSequence, PlacementMap, SensorHardware};
use crate::noise::rng_from_seed;
use crate::quat::{axis_angle_compose, axis_angle_decompose, slerp, Axis, Quaternion, Vec3};
use crate::stda::{draw_scale_factor, make_magnitude_curve, WarpCurve, WarpMode};

/// Scales every masked joint's rotation angle by one `α ~ N(1, σ²)`.
///
/// `joint_mask = None` means all joints. Root translation is untouched.
pub fn amplitude_scale(
    d: &MotionSequence,
    sigma: f64,
    seed: u64,
    joint_mask: Option<&[usize]>,
) -> Result<MotionSequence> {
    let alpha = draw_scale_factor(sigma, seed)?;
    amplitude_scale_by(d, alpha, joint_mask)
}

pub fn amplitude_scale_by(
    d: &MotionSequence,
    alpha: f64,
    joint_mask: Option<&[usize]>,
) -> Result<MotionSequence> {
    if !alpha.is_finite() {
        return Err(Error::param("alpha", "non-finite scale factor"));
    }
    if alpha == 1.0 {
        return Ok(d.clone());
    }
    scale_angles(d, |_| alpha, joint_mask)
}

/// Scales joint angles by a smooth random curve shared across joints.
pub fn amplitude_warp(
    d: &MotionSequence,
    sigma: f64,
    knots: usize,
    seed: u64,
    joint_mask: Option<&[usize]>,
) -> Result<MotionSequence> {
    let curve = make_magnitude_curve(d.len(), sigma, knots, seed)?;
    amplitude_warp_with(d, &curve, joint_mask)
}

pub fn amplitude_warp_with(
    d: &MotionSequence,
    curve: &WarpCurve,
    joint_mask: Option<&[usize]>,
) -> Result<MotionSequence> {
    if curve.mode() != WarpMode::Magnitude {
        return Err(Error::param("curve", "expected a magnitude curve"));
    }
    if curve.len() != d.len() {
        return Err(Error::LengthMismatch {
            field: "amplitude curve".into(),
            expected: d.len(),
            found: curve.len(),
        });
    }
    if curve.values().iter().all(|&v| v == 1.0) {
        return Ok(d.clone());
    }
    let values = curve.values();
    scale_angles(d, |t| values[t], joint_mask)
}

fn scale_angles(
    d: &MotionSequence,
    factor: impl Fn(usize) -> f64,
    joint_mask: Option<&[usize]>,
) -> Result<MotionSequence> {
    let joints = d.num_joints();
    let selected: Vec<usize> = match joint_mask {
        None => (0..joints).collect(),
        Some(mask) => {
            if let Some(&bad) = mask.iter().find(|&&j| j >= joints) {
                return Err(Error::param(
                    "joint_mask",
                    format!("joint {bad} out of range for {joints} joints"),
                ));
            }
            mask.to_vec()
        }
    };
    let mut orient = d.joint_orient().to_vec();
    let mut clamped = 0usize;
    for (t, row) in orient.iter_mut().enumerate() {
        let f = factor(t);
        if f == 1.0 {
            continue;
        }
        for &j in &selected {
            let (theta, axis) = axis_angle_decompose(&row[j])?;
            let scaled = f * theta;
            if !(0.0..=PI).contains(&scaled) {
                clamped += 1;
            }
            row[j] = axis_angle_compose(scaled.clamp(0.0, PI), axis)?;
        }
    }
    if clamped > 0 {
        log::debug!("amplitude transform clamped {clamped} joint angles to [0, π]");
    }
    Ok(MotionSequence::from_parts_aligned(
        d.sample_rate_hz(),
        d.root_translation().to_vec(),
        orient,
    ))
}

/// Playback-speed change for the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeedChange {
    /// Source index `t·β`, held at the last sample once it runs past the end.
    Uniform(f64),
    /// Source index `w(t)`.
    Warp(WarpCurve),
}

/// Resamples the dynamics at new source times, keeping the length.
///
/// Joint quaternions are interpolated with slerp, root translation linearly.
pub fn speed_resample(d: &MotionSequence, change: &SpeedChange) -> Result<MotionSequence> {
    let n = d.len();
    let last = (n - 1) as f64;
    let sources: Vec<f64> = match change {
        SpeedChange::Uniform(beta) => {
            if !(beta.is_finite() && *beta > 0.0) {
                return Err(Error::param("beta", format!("{beta} must be > 0")));
            }
            if *beta == 1.0 {
                return Ok(d.clone());
            }
            (0..n).map(|t| (t as f64 * beta).min(last)).collect()
        }
        SpeedChange::Warp(curve) => {
            if curve.mode() != WarpMode::Time {
                return Err(Error::param("warp", "expected a time warp"));
            }
            if curve.len() != n {
                return Err(Error::LengthMismatch {
                    field: "speed warp".into(),
                    expected: n,
                    found: curve.len(),
                });
            }
            curve.values().to_vec()
        }
    };
    let joints = d.num_joints();
    let mut translation = Vec::with_capacity(n);
    let mut orient = Vec::with_capacity(n);
    for s in sources {
        let s = s.clamp(0.0, last);
        let i0 = s.floor() as usize;
        let frac = s - i0 as f64;
        if frac == 0.0 || i0 + 1 >= n {
            translation.push(d.root_translation()[i0]);
            orient.push(d.joint_orient()[i0].clone());
            continue;
        }
        let (p0, p1) = (d.root_translation()[i0], d.root_translation()[i0 + 1]);
        translation.push([
            p0[0] + frac * (p1[0] - p0[0]),
            p0[1] + frac * (p1[1] - p0[1]),
            p0[2] + frac * (p1[2] - p0[2]),
        ]);
        orient.push(
            (0..joints)
                .map(|j| slerp(&d.orient(i0, j), &d.orient(i0 + 1, j), frac))
                .collect(),
        );
    }
    Ok(MotionSequence::from_parts_aligned(
        d.sample_rate_hz(),
        translation,
        orient,
    ))
}

/// Ranges for [`placement_perturb`]. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlacementPerturbation {
    /// Per-axis orientation offset, sampled from `U[−r, r]`.
    pub orient_range_deg: Vec3,
    /// Extra misalignment about the sensor x axis.
    pub axial_range_deg: Option<f64>,
    /// Axes eligible for a discrete 180° flip.
    pub flip_axes: Vec<Axis>,
    /// Chance that each eligible axis flips.
    pub flip_probability: f64,
}

impl Default for PlacementPerturbation {
    fn default() -> Self {
        PlacementPerturbation {
            orient_range_deg: [25.0; 3],
            axial_range_deg: None,
            flip_axes: Vec::new(),
            flip_probability: 0.5,
        }
    }
}

impl PlacementPerturbation {
    pub fn none() -> Self {
        PlacementPerturbation {
            orient_range_deg: [0.0; 3],
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ranges_ok = self
            .orient_range_deg
            .iter()
            .chain(self.axial_range_deg.iter())
            .all(|r| r.is_finite() && *r >= 0.0);
        if !ranges_ok {
            return Err(Error::param("placement range", "ranges must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return Err(Error::param("flip_probability", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One sensor's sampled placement change.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlacementOffset {
    /// Euler offsets (x, y, z) in degrees, composed intrinsic z·y·x.
    pub euler_deg: Vec3,
    pub axial_deg: f64,
    pub flips: Vec<Axis>,
}

impl PlacementOffset {
    pub fn quaternion(&self) -> Quaternion {
        let [x, y, z] = self.euler_deg.map(f64::to_radians);
        let mut q = Quaternion::from_euler_zyx(x, y, z);
        if self.axial_deg != 0.0 {
            q = q * Quaternion::about_axis(Axis::X, self.axial_deg.to_radians());
        }
        for &axis in &self.flips {
            q = q * Quaternion::half_turn(axis);
        }
        q
    }

    fn is_identity(&self) -> bool {
        self.euler_deg == [0.0; 3] && self.axial_deg == 0.0 && self.flips.is_empty()
    }
}

fn symmetric(rng: &mut impl Rng, range: f64) -> f64 {
    if range == 0.0 {
        0.0
    } else {
        rng.random_range(-range..=range)
    }
}

/// Draws one offset per sensor, in placement order.
pub fn sample_placement_offsets(
    sensors: usize,
    cfg: &PlacementPerturbation,
    seed: u64,
) -> Result<Vec<PlacementOffset>> {
    cfg.validate()?;
    let mut rng = rng_from_seed(seed);
    Ok((0..sensors)
        .map(|_| {
            let euler_deg = cfg.orient_range_deg.map(|r| symmetric(&mut rng, r));
            let axial_deg = cfg.axial_range_deg.map_or(0.0, |r| symmetric(&mut rng, r));
            let flips = cfg
                .flip_axes
                .iter()
                .copied()
                .filter(|_| rng.random_bool(cfg.flip_probability))
                .collect();
            PlacementOffset {
                euler_deg,
                axial_deg,
                flips,
            }
        })
        .collect())
}

/// `rel_orient ← rel_orient ⊗ offset`, per sensor. Positions are unchanged.
pub fn apply_placement_offsets(p: &PlacementMap, offsets: &[PlacementOffset]) -> Result<PlacementMap> {
    if offsets.len() != p.len() {
        return Err(Error::LengthMismatch {
            field: "placement offsets".into(),
            expected: p.len(),
            found: offsets.len(),
        });
    }
    let mut out = p.clone();
    for (s, off) in out.sensors_mut().iter_mut().zip(offsets) {
        if !off.is_identity() {
            s.rel_orient = (s.rel_orient * off.quaternion()).normalized();
        }
    }
    Ok(out)
}

pub fn placement_perturb(p: &PlacementMap, cfg: &PlacementPerturbation, seed: u64) -> Result<PlacementMap> {
    let offsets = sample_placement_offsets(p.len(), cfg, seed)?;
    apply_placement_offsets(p, &offsets)
}

/// `bundle_a` wearing `bundle_b`'s sensors.
///
/// Sensors are matched by id; each of `bundle_b`'s sensors is re-attached to
/// the joint of the same name in `bundle_a.body`.
pub fn placement_swap(bundle_a: &MotionBundle, bundle_b: &MotionBundle) -> Result<MotionBundle> {
    let mut unmatched = Vec::new();
    let mut sensors = Vec::with_capacity(bundle_a.placement.len());
    for sa in bundle_a.placement.sensors() {
        let Some(sb) = bundle_b.placement.get(&sa.sensor_id) else {
            unmatched.push(format!("{} (missing from donor)", sa.sensor_id));
            continue;
        };
        let joint_name = &bundle_b.body.joints()[sb.joint].name;
        match bundle_a.body.index_of(joint_name) {
            Some(joint) => {
                let mut s = sb.clone();
                s.joint = joint;
                sensors.push(s);
            }
            None => unmatched.push(format!("{} (joint `{joint_name}`)", sa.sensor_id)),
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::UnmatchedSensors(unmatched));
    }
    Ok(MotionBundle {
        placement: PlacementMap::new(sensors)?,
        ..bundle_a.clone()
    })
}

/// Per-sensor biases drawn for [`hardware_perturb`].
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareDraw {
    pub sigma: f64,
    /// `(accel bias, gyro bias)` per sensor id.
    pub biases: BTreeMap<String, (Vec3, Vec3)>,
}

impl HardwareDraw {
    pub fn sample<'a>(
        sensor_ids: impl IntoIterator<Item = &'a str>,
        sigma: f64,
        bias_range: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::param("sigma", "must be finite and >= 0"));
        }
        if !(bias_range.is_finite() && bias_range >= 0.0) {
            return Err(Error::param("bias_range", "must be finite and >= 0"));
        }
        let mut rng = rng_from_seed(seed);
        let mut biases = BTreeMap::new();
        let mut ids: Vec<&str> = sensor_ids.into_iter().collect();
        ids.sort_unstable();
        for id in ids {
            let accel = [(); 3].map(|_| symmetric(&mut rng, bias_range));
            let gyro = [(); 3].map(|_| symmetric(&mut rng, bias_range));
            biases.insert(id.to_owned(), (accel, gyro));
        }
        Ok(HardwareDraw { sigma, biases })
    }

    /// Replaces noise and bias of every drawn sensor.
    pub fn apply(&self, h: &HardwareProfile) -> Result<HardwareProfile> {
        let mut out = h.clone();
        for (id, (accel, gyro)) in &self.biases {
            out.set(
                id.clone(),
                SensorHardware {
                    accel: AxisErrors {
                        sigma: [self.sigma; 3],
                        bias: *accel,
                    },
                    gyro: AxisErrors {
                        sigma: [self.sigma; 3],
                        bias: *gyro,
                    },
                },
            )?;
        }
        Ok(out)
    }
}

/// Sets noise σ on every axis and draws a fresh constant bias per axis from
/// `U[−bias_range, bias_range]`, for every sensor listed in `h`.
pub fn hardware_perturb(h: &HardwareProfile, sigma: f64, bias_range: f64, seed: u64) -> Result<HardwareProfile> {
    let ids: Vec<&str> = h.sensors().keys().map(String::as_str).collect();
    HardwareDraw::sample(ids, sigma, bias_range, seed)?.apply(h)
}
