//! Simulation parameter sets: body, dynamics, placement and hardware.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::quat::{hemisphere_align_in_place, Quaternion, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    /// `None` for the root.
    pub parent: Option<usize>,
    /// Offset from the parent joint, in the parent's rest frame (meters).
    pub bone_offset: Vec3,
}

impl Joint {
    pub fn new(name: impl Into<String>, parent: Option<usize>, bone_offset: Vec3) -> Self {
        Joint {
            name: name.into(),
            parent,
            bone_offset,
        }
    }
}

/// A topologically sorted joint tree with exactly one root.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    joints: Vec<Joint>,
}

impl Skeleton {
    pub fn new(joints: Vec<Joint>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::InvalidModel("skeleton has no joints".into()));
        }
        let mut names = BTreeSet::new();
        for (i, j) in joints.iter().enumerate() {
            match (i, j.parent) {
                (0, None) => {}
                (0, Some(_)) => {
                    return Err(Error::InvalidModel(format!(
                        "joint 0 (`{}`) must be the root",
                        j.name
                    )))
                }
                (_, None) => {
                    return Err(Error::InvalidModel(format!(
                        "joint {i} (`{}`) is a second root",
                        j.name
                    )))
                }
                (_, Some(p)) if p >= i => {
                    return Err(Error::InvalidModel(format!(
                        "joint {i} (`{}`) has parent {p}; parents must precede children",
                        j.name
                    )))
                }
                _ => {}
            }
            if j.bone_offset.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "joint `{}` has a non-finite bone offset",
                    j.name
                )));
            }
            if !names.insert(j.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate joint name `{}`", j.name)));
            }
        }
        Ok(Skeleton { joints })
    }

    /// A single root joint at the origin.
    pub fn single() -> Self {
        Skeleton {
            joints: vec![Joint::new("root", None, [0.0; 3])],
        }
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }
}

/// Joint orientations (relative to parent) and root translation over time.
///
/// Each joint's quaternion track is kept hemisphere-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    sample_rate_hz: f64,
    root_translation: Vec<Vec3>,
    /// `joint_orient[t][j]`
    joint_orient: Vec<Vec<Quaternion>>,
}

impl MotionSequence {
    pub fn new(
        sample_rate_hz: f64,
        root_translation: Vec<Vec3>,
        joint_orient: Vec<Vec<Quaternion>>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::param("sample_rate_hz", "must be positive and finite"));
        }
        if root_translation.len() != joint_orient.len() {
            return Err(Error::LengthMismatch {
                field: "root_translation".into(),
                expected: joint_orient.len(),
                found: root_translation.len(),
            });
        }
        if joint_orient.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        let joints = joint_orient[0].len();
        let mut orient = Vec::with_capacity(joint_orient.len());
        for (t, row) in joint_orient.into_iter().enumerate() {
            if row.len() != joints {
                return Err(Error::LengthMismatch {
                    field: format!("joint_orient[{t}]"),
                    expected: joints,
                    found: row.len(),
                });
            }
            let row = row
                .into_iter()
                .map(|q| q.checked_unit())
                .collect::<Result<Vec<_>>>()?;
            orient.push(row);
        }
        if root_translation.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("root_translation", "non-finite value"));
        }
        Ok(MotionSequence::from_parts_aligned(sample_rate_hz, root_translation, orient))
    }

    /// A motionless sequence: identity joints, zero translation.
    pub fn constant(sample_rate_hz: f64, len: usize, joints: usize) -> Self {
        MotionSequence {
            sample_rate_hz,
            root_translation: vec![[0.0; 3]; len],
            joint_orient: vec![vec![Quaternion::IDENTITY; joints]; len],
        }
    }

    /// Builds from already-normalized parts and re-aligns every joint track.
    pub(crate) fn from_parts_aligned(
        sample_rate_hz: f64,
        root_translation: Vec<Vec3>,
        mut joint_orient: Vec<Vec<Quaternion>>,
    ) -> Self {
        let joints = joint_orient.first().map_or(0, Vec::len);
        let mut track = vec![Quaternion::IDENTITY; joint_orient.len()];
        for j in 0..joints {
            for (t, row) in joint_orient.iter().enumerate() {
                track[t] = row[j];
            }
            hemisphere_align_in_place(&mut track);
            for (t, row) in joint_orient.iter_mut().enumerate() {
                row[j] = track[t];
            }
        }
        MotionSequence {
            sample_rate_hz,
            root_translation,
            joint_orient,
        }
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.joint_orient.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joint_orient.is_empty()
    }

    pub fn num_joints(&self) -> usize {
        self.joint_orient.first().map_or(0, Vec::len)
    }

    pub fn root_translation(&self) -> &[Vec3] {
        &self.root_translation
    }

    pub fn joint_orient(&self) -> &[Vec<Quaternion>] {
        &self.joint_orient
    }

    pub fn orient(&self, t: usize, joint: usize) -> Quaternion {
        self.joint_orient[t][joint]
    }

    pub fn joint_track(&self, joint: usize) -> Vec<Quaternion> {
        self.joint_orient.iter().map(|row| row[joint]).collect()
    }

    /// The samples in `range`, clamped to the sequence.
    pub fn slice(&self, range: Range<usize>) -> MotionSequence {
        let end = range.end.min(self.len());
        let start = range.start.min(end);
        MotionSequence {
            sample_rate_hz: self.sample_rate_hz,
            root_translation: self.root_translation[start..end].to_vec(),
            joint_orient: self.joint_orient[start..end].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorPlacement {
    pub sensor_id: String,
    pub joint: usize,
    /// Position relative to the joint, in the joint frame (meters).
    pub rel_pos: Vec3,
    /// Sensor orientation relative to the joint frame.
    pub rel_orient: Quaternion,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlacementMap {
    sensors: Vec<SensorPlacement>,
}

impl PlacementMap {
    pub fn new(sensors: Vec<SensorPlacement>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        let mut out = Vec::with_capacity(sensors.len());
        for mut s in sensors {
            if !ids.insert(s.sensor_id.clone()) {
                return Err(Error::InvalidModel(format!(
                    "duplicate sensor id `{}`",
                    s.sensor_id
                )));
            }
            if s.rel_pos.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "sensor `{}` has a non-finite position",
                    s.sensor_id
                )));
            }
            s.rel_orient = s.rel_orient.checked_unit()?;
            out.push(s);
        }
        Ok(PlacementMap { sensors: out })
    }

    pub fn sensors(&self) -> &[SensorPlacement] {
        &self.sensors
    }

    pub(crate) fn sensors_mut(&mut self) -> &mut [SensorPlacement] {
        &mut self.sensors
    }

    pub fn get(&self, sensor_id: &str) -> Option<&SensorPlacement> {
        self.sensors.iter().find(|s| s.sensor_id == sensor_id)
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn validate_against(&self, body: &Skeleton) -> Result<()> {
        for s in &self.sensors {
            if s.joint >= body.len() {
                return Err(Error::UnknownJoint {
                    sensor: s.sensor_id.clone(),
                    joint: s.joint,
                });
            }
        }
        Ok(())
    }
}

/// Per-axis white-noise standard deviation and constant bias.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisErrors {
    pub sigma: Vec3,
    pub bias: Vec3,
}

impl AxisErrors {
    pub fn validate(&self, what: &str) -> Result<()> {
        if self.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidModel(format!("{what}: sigma must be finite and >= 0")));
        }
        if self.bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidModel(format!("{what}: bias must be finite")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SensorHardware {
    pub accel: AxisErrors,
    pub gyro: AxisErrors,
}

/// Noise and bias per sensor. Sensors without an entry are ideal.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HardwareProfile {
    sensors: BTreeMap<String, SensorHardware>,
}

impl HardwareProfile {
    pub fn new(sensors: BTreeMap<String, SensorHardware>) -> Result<Self> {
        for (id, hw) in &sensors {
            hw.accel.validate(&format!("{id}.accel"))?;
            hw.gyro.validate(&format!("{id}.gyro"))?;
        }
        Ok(HardwareProfile { sensors })
    }

    pub fn ideal() -> Self {
        HardwareProfile::default()
    }

    pub fn get(&self, sensor_id: &str) -> SensorHardware {
        self.sensors.get(sensor_id).copied().unwrap_or_default()
    }

    pub fn sensors(&self) -> &BTreeMap<String, SensorHardware> {
        &self.sensors
    }

    pub fn set(&mut self, sensor_id: impl Into<String>, hw: SensorHardware) -> Result<()> {
        let id = sensor_id.into();
        hw.accel.validate(&format!("{id}.accel"))?;
        hw.gyro.validate(&format!("{id}.gyro"))?;
        self.sensors.insert(id, hw);
        Ok(())
    }
}

/// Simulated triaxial accelerometer (m/s²) and gyroscope (rad/s) readings.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace {
    pub sensor_id: String,
    pub sample_rate_hz: f64,
    pub accel: Vec<Vec3>,
    pub gyro: Vec<Vec3>,
}

impl SensorTrace {
    pub fn len(&self) -> usize {
        self.accel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accel.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.accel.len() != self.gyro.len() {
            return Err(Error::LengthMismatch {
                field: format!("{}.gyro", self.sensor_id),
                expected: self.accel.len(),
                found: self.gyro.len(),
            });
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::param("sample_rate_hz", "must be positive and finite"));
        }
        if self.accel.iter().chain(&self.gyro).flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "trace `{}` has non-finite samples",
                self.sensor_id
            )));
        }
        Ok(())
    }
}

/// The four parameter sets describing one subject/session.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionBundle {
    pub subject_id: String,
    pub body: Skeleton,
    pub dynamics: MotionSequence,
    pub placement: PlacementMap,
    pub hardware: HardwareProfile,
}

impl MotionBundle {
    pub fn new(
        subject_id: impl Into<String>,
        body: Skeleton,
        dynamics: MotionSequence,
        placement: PlacementMap,
        hardware: HardwareProfile,
    ) -> Result<Self> {
        let bundle = MotionBundle {
            subject_id: subject_id.into(),
            body,
            dynamics,
            placement,
            hardware,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dynamics.num_joints() != self.body.len() {
            return Err(Error::LengthMismatch {
                field: "dynamics.joint_orient (joints)".into(),
                expected: self.body.len(),
                found: self.dynamics.num_joints(),
            });
        }
        self.placement.validate_against(&self.body)
    }

    /// A copy with dynamics restricted to `range`.
    pub fn restricted(&self, range: Range<usize>) -> MotionBundle {
        MotionBundle {
            dynamics: self.dynamics.slice(range),
            ..self.clone()
        }
    }

    /// Channel count of a synthesized window (six per sensor).
    pub fn channels(&self) -> usize {
        6 * self.placement.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skeleton_rejects_bad_topology() {
        assert!(Skeleton::new(vec![]).is_err());
        assert!(Skeleton::new(vec![Joint::new("a", Some(0), [0.0; 3])]).is_err());
        assert!(Skeleton::new(vec![
            Joint::new("a", None, [0.0; 3]),
            Joint::new("b", None, [0.0; 3]),
        ])
        .is_err());
        assert!(Skeleton::new(vec![
            Joint::new("a", None, [0.0; 3]),
            Joint::new("b", Some(1), [0.0; 3]),
        ])
        .is_err());
        assert!(Skeleton::new(vec![
            Joint::new("a", None, [0.0; 3]),
            Joint::new("b", Some(0), [f64::NAN, 0.0, 0.0]),
        ])
        .is_err());
        let ok = Skeleton::new(vec![
            Joint::new("a", None, [0.0; 3]),
            Joint::new("b", Some(0), [0.0, 1.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(ok.index_of("b"), Some(1));
    }

    #[test]
    fn motion_sequence_aligns_hemispheres() {
        let q = Quaternion::new(0.6, 0.8, 0.0, 0.0);
        let m = MotionSequence::new(
            100.0,
            vec![[0.0; 3]; 3],
            vec![vec![-q], vec![q], vec![-q]],
        )
        .unwrap();
        assert_eq!(m.joint_track(0), vec![q, q, q]);
    }

    #[test]
    fn motion_sequence_validates_shapes() {
        let id = Quaternion::IDENTITY;
        assert!(MotionSequence::new(100.0, vec![[0.0; 3]; 2], vec![vec![id]; 3]).is_err());
        assert!(MotionSequence::new(0.0, vec![[0.0; 3]; 3], vec![vec![id]; 3]).is_err());
        assert!(MotionSequence::new(
            100.0,
            vec![[0.0; 3]; 2],
            vec![vec![id], vec![id, id]]
        )
        .is_err());
        assert!(MotionSequence::new(
            100.0,
            vec![[0.0; 3]; 1],
            vec![vec![Quaternion::new(2.0, 0.0, 0.0, 0.0)]]
        )
        .is_err());
    }

    #[test]
    fn bundle_checks_sensor_joints() {
        let placement = PlacementMap::new(vec![SensorPlacement {
            sensor_id: "s".into(),
            joint: 3,
            rel_pos: [0.0; 3],
            rel_orient: Quaternion::IDENTITY,
        }])
        .unwrap();
        let err = MotionBundle::new(
            "x",
            Skeleton::single(),
            MotionSequence::constant(100.0, 5, 1),
            placement,
            HardwareProfile::ideal(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownJoint { joint: 3, .. }));
    }

    #[test]
    fn hardware_rejects_negative_sigma() {
        let mut hw = HardwareProfile::ideal();
        let bad = SensorHardware {
            accel: AxisErrors {
                sigma: [-1.0, 0.0, 0.0],
                bias: [0.0; 3],
            },
            ..Default::default()
        };
        assert!(hw.set("s", bad).is_err());
        assert_eq!(hw.get("missing"), SensorHardware::default());
    }
}
