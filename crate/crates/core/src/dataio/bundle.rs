//! Motion bundles as JSON documents.
//!
//! ```json
//! {
//!   "subject_id": "s01",
//!   "skeleton": { "joints": [ { "name": "pelvis", "parent": null, "bone_offset": [0, 0, 0] } ] },
//!   "dynamics": {
//!     "sample_rate_hz": 100.0,
//!     "root_translation": [[0, 0, 1], ...],
//!     "joint_orient": [[[1, 0, 0, 0]], ...]
//!   },
//!   "placement": { "sensors": [ { "sensor_id": "hip", "joint": 0,
//!                                 "rel_pos": [0, 0, 0], "rel_orient": [1, 0, 0, 0] } ] },
//!   "hardware": { "sensors": { "hip": { "accel": { "sigma": [0, 0, 0], "bias": [0, 0, 0] },
//!                                       "gyro":  { "sigma": [0, 0, 0], "bias": [0, 0, 0] } } } },
//!   "labels": [0, ...]
//! }
//! ```
//!
//! Quaternions are `[w, x, y, z]`. `labels`, when present, has one entry per
//! time step. Floats are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AxisErrors, HardwareProfile, Joint, MotionBundle, MotionSequence, PlacementMap, SensorHardware,
    SensorPlacement, Skeleton,
};
use crate::quat::{Quaternion, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    name: String,
    parent: Option<usize>,
    bone_offset: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkeletonDoc {
    joints: Vec<JointDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DynamicsDoc {
    sample_rate_hz: f64,
    root_translation: Vec<Vec3>,
    joint_orient: Vec<Vec<[f64; 4]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorDoc {
    sensor_id: String,
    joint: usize,
    rel_pos: Vec3,
    rel_orient: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementDoc {
    sensors: Vec<SensorDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisDoc {
    sigma: Vec3,
    bias: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorHardwareDoc {
    accel: AxisDoc,
    gyro: AxisDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct HardwareDoc {
    sensors: BTreeMap<String, SensorHardwareDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleDoc {
    subject_id: String,
    skeleton: SkeletonDoc,
    dynamics: DynamicsDoc,
    placement: PlacementDoc,
    hardware: HardwareDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<u32>>,
}

/// A bundle with its optional per-sample activity labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledBundle {
    pub bundle: MotionBundle,
    pub labels: Option<Vec<u32>>,
}

fn quat(q: [f64; 4], field: impl Fn() -> String) -> Result<Quaternion> {
    let [w, x, y, z] = q;
    Quaternion::unit(w, x, y, z).map_err(|e| Error::Schema(format!("{}: {e}", field())))
}

fn in_field<T>(r: Result<T>, field: &str) -> Result<T> {
    r.map_err(|e| match e {
        e @ (Error::LengthMismatch { .. } | Error::Schema(_)) => e,
        other => Error::Schema(format!("{field}: {other}")),
    })
}

impl BundleDoc {
    fn into_bundle(self) -> Result<LabelledBundle> {
        let joints = self
            .skeleton
            .joints
            .into_iter()
            .map(|j| Joint::new(j.name, j.parent, j.bone_offset))
            .collect();
        let body = in_field(Skeleton::new(joints), "skeleton.joints")?;

        let d = self.dynamics;
        let orient = d
            .joint_orient
            .into_iter()
            .enumerate()
            .map(|(t, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, q)| quat(q, || format!("dynamics.joint_orient[{t}][{j}]")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if d.root_translation.len() != orient.len() {
            return Err(Error::LengthMismatch {
                field: "dynamics.root_translation".into(),
                expected: orient.len(),
                found: d.root_translation.len(),
            });
        }
        let dynamics = in_field(
            MotionSequence::new(d.sample_rate_hz, d.root_translation, orient),
            "dynamics",
        )?;

        let sensors = self
            .placement
            .sensors
            .into_iter()
            .enumerate()
            .map(|(k, s)| {
                Ok(SensorPlacement {
                    rel_orient: quat(s.rel_orient, || format!("placement.sensors[{k}].rel_orient"))?,
                    sensor_id: s.sensor_id,
                    joint: s.joint,
                    rel_pos: s.rel_pos,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let placement = in_field(PlacementMap::new(sensors), "placement.sensors")?;

        let hw = self
            .hardware
            .sensors
            .into_iter()
            .map(|(id, h)| {
                let axis = |a: AxisDoc| AxisErrors {
                    sigma: a.sigma,
                    bias: a.bias,
                };
                (
                    id,
                    SensorHardware {
                        accel: axis(h.accel),
                        gyro: axis(h.gyro),
                    },
                )
            })
            .collect();
        let hardware = in_field(HardwareProfile::new(hw), "hardware.sensors")?;

        if let Some(labels) = &self.labels {
            if labels.len() != dynamics.len() {
                return Err(Error::LengthMismatch {
                    field: "labels".into(),
                    expected: dynamics.len(),
                    found: labels.len(),
                });
            }
        }
        let bundle = in_field(
            MotionBundle::new(self.subject_id, body, dynamics, placement, hardware),
            "bundle",
        )?;
        Ok(LabelledBundle {
            bundle,
            labels: self.labels,
        })
    }

    fn from_bundle(b: &MotionBundle, labels: Option<&[u32]>) -> Self {
        let q = |q: &Quaternion| [q.w, q.x, q.y, q.z];
        let axis = |a: &AxisErrors| AxisDoc {
            sigma: a.sigma,
            bias: a.bias,
        };
        BundleDoc {
            subject_id: b.subject_id.clone(),
            skeleton: SkeletonDoc {
                joints: b
                    .body
                    .joints()
                    .iter()
                    .map(|j| JointDoc {
                        name: j.name.clone(),
                        parent: j.parent,
                        bone_offset: j.bone_offset,
                    })
                    .collect(),
            },
            dynamics: DynamicsDoc {
                sample_rate_hz: b.dynamics.sample_rate_hz(),
                root_translation: b.dynamics.root_translation().to_vec(),
                joint_orient: b
                    .dynamics
                    .joint_orient()
                    .iter()
                    .map(|row| row.iter().map(q).collect())
                    .collect(),
            },
            placement: PlacementDoc {
                sensors: b
                    .placement
                    .sensors()
                    .iter()
                    .map(|s| SensorDoc {
                        sensor_id: s.sensor_id.clone(),
                        joint: s.joint,
                        rel_pos: s.rel_pos,
                        rel_orient: q(&s.rel_orient),
                    })
                    .collect(),
            },
            hardware: HardwareDoc {
                sensors: b
                    .hardware
                    .sensors()
                    .iter()
                    .map(|(id, h)| {
                        (
                            id.clone(),
                            SensorHardwareDoc {
                                accel: axis(&h.accel),
                                gyro: axis(&h.gyro),
                            },
                        )
                    })
                    .collect(),
            },
            labels: labels.map(<[u32]>::to_vec),
        }
    }
}

pub fn bundle_from_str(text: &str) -> Result<LabelledBundle> {
    let doc: BundleDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    doc.into_bundle()
}

pub fn bundle_to_string(bundle: &MotionBundle, labels: Option<&[u32]>) -> Result<String> {
    if let Some(l) = labels {
        if l.len() != bundle.dynamics.len() {
            return Err(Error::LengthMismatch {
                field: "labels".into(),
                expected: bundle.dynamics.len(),
                found: l.len(),
            });
        }
    }
    serde_json::to_string(&BundleDoc::from_bundle(bundle, labels)).map_err(|e| Error::Schema(e.to_string()))
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<LabelledBundle> {
    bundle_from_str(&std::fs::read_to_string(path)?)
}

pub fn save_bundle(path: impl AsRef<Path>, bundle: &MotionBundle, labels: Option<&[u32]>) -> Result<()> {
    std::fs::write(path, bundle_to_string(bundle, labels)?)?;
    Ok(())
}
