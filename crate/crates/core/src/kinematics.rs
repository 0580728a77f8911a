//! Skeleton forward kinematics and analytic virtual-IMU synthesis.

use crate::error::{Error, Result};
use crate::model::{AxisErrors, HardwareProfile, MotionBundle, MotionSequence, PlacementMap, Skeleton, SensorTrace};
use crate::noise::{Modality, NoiseStream};
use crate::quat::{add3, hemisphere_align_in_place, scale3, sub3, Quaternion, Vec3};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.80665;

/// Gravity in the world frame (z up).
pub const GRAVITY_WORLD: Vec3 = [0.0, 0.0, -GRAVITY];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPose {
    pub position: Vec3,
    pub orientation: Quaternion,
}

/// World pose of every joint at time index `t`.
pub fn forward_kinematics(
    skel: &Skeleton,
    motion: &MotionSequence,
    t: usize,
) -> Result<Vec<JointPose>> {
    if t >= motion.len() {
        return Err(Error::IndexOutOfRange {
            index: t,
            len: motion.len(),
        });
    }
    if motion.num_joints() != skel.len() {
        return Err(Error::LengthMismatch {
            field: "joint_orient (joints)".into(),
            expected: skel.len(),
            found: motion.num_joints(),
        });
    }
    Ok(poses_at(skel, motion, t))
}

fn poses_at(skel: &Skeleton, motion: &MotionSequence, t: usize) -> Vec<JointPose> {
    let mut poses: Vec<JointPose> = Vec::with_capacity(skel.len());
    for (j, joint) in skel.joints().iter().enumerate() {
        let local = motion.orient(t, j);
        let pose = match joint.parent {
            None => JointPose {
                position: motion.root_translation()[t],
                orientation: local,
            },
            Some(p) => {
                let parent = poses[p];
                JointPose {
                    position: add3(parent.position, parent.orientation.rotate(joint.bone_offset)),
                    orientation: parent.orientation * local,
                }
            }
        };
        poses.push(pose);
    }
    poses
}

/// Synthesizes accelerometer and gyroscope traces for every placed sensor.
///
/// Gyro is `2·vec(q⁻¹ ⊗ q̇)` with central differences (one-sided at the ends).
/// Accel is specific force in the sensor frame, `Rᵀ(p̈ − g)`, with `p̈` from
/// second-order central differences; at the two boundary samples the
/// dynamic part copies the nearest interior value (in the sensor frame).
/// Bias and white noise from `hw` are added last.
pub fn synthesize_imu(
    skel: &Skeleton,
    motion: &MotionSequence,
    placement: &PlacementMap,
    hw: &HardwareProfile,
    seed: u64,
) -> Result<Vec<SensorTrace>> {
    let len = motion.len();
    if len < 3 {
        return Err(Error::TooShort { needed: 3, got: len });
    }
    if motion.num_joints() != skel.len() {
        return Err(Error::LengthMismatch {
            field: "joint_orient (joints)".into(),
            expected: skel.len(),
            found: motion.num_joints(),
        });
    }
    placement.validate_against(skel)?;

    let poses: Vec<Vec<JointPose>> = (0..len).map(|t| poses_at(skel, motion, t)).collect();
    let dt = motion.dt();

    placement
        .sensors()
        .iter()
        .map(|s| {
            let mut pos = Vec::with_capacity(len);
            let mut orient = Vec::with_capacity(len);
            for frame in &poses {
                let jp = frame[s.joint];
                pos.push(add3(jp.position, jp.orientation.rotate(s.rel_pos)));
                orient.push(jp.orientation * s.rel_orient);
            }
            hemisphere_align_in_place(&mut orient);

            let mut gyro = angular_rate(&orient, dt);
            let mut accel = specific_force(&pos, &orient, dt);

            let errors = hw.get(&s.sensor_id);
            apply_errors(&mut accel, &errors.accel, &NoiseStream::new(seed, &s.sensor_id, Modality::Accel));
            apply_errors(&mut gyro, &errors.gyro, &NoiseStream::new(seed, &s.sensor_id, Modality::Gyro));

            Ok(SensorTrace {
                sensor_id: s.sensor_id.clone(),
                sample_rate_hz: motion.sample_rate_hz(),
                accel,
                gyro,
            })
        })
        .collect()
}

/// Synthesizes every sensor of a bundle.
pub fn synthesize_bundle(bundle: &MotionBundle, seed: u64) -> Result<Vec<SensorTrace>> {
    synthesize_imu(
        &bundle.body,
        &bundle.dynamics,
        &bundle.placement,
        &bundle.hardware,
        seed,
    )
}

fn angular_rate(orient: &[Quaternion], dt: f64) -> Vec<Vec3> {
    let n = orient.len();
    (0..n)
        .map(|t| {
            let q_dot = if t == 0 {
                orient[1].sub(&orient[0]).scale(1.0 / dt)
            } else if t == n - 1 {
                orient[n - 1].sub(&orient[n - 2]).scale(1.0 / dt)
            } else {
                orient[t + 1].sub(&orient[t - 1]).scale(0.5 / dt)
            };
            scale3((orient[t].inverse() * q_dot).vector(), 2.0)
        })
        .collect()
}

fn specific_force(pos: &[Vec3], orient: &[Quaternion], dt: f64) -> Vec<Vec3> {
    let n = pos.len();
    let inv_dt2 = 1.0 / (dt * dt);
    let mut dynamic: Vec<Vec3> = vec![[0.0; 3]; n];
    for t in 1..n - 1 {
        let p_ddot = scale3(
            add3(sub3(pos[t + 1], scale3(pos[t], 2.0)), pos[t - 1]),
            inv_dt2,
        );
        dynamic[t] = orient[t].rotate_inverse(p_ddot);
    }
    dynamic[0] = dynamic[1];
    dynamic[n - 1] = dynamic[n - 2];
    dynamic
        .into_iter()
        .zip(orient)
        .map(|(a, q)| add3(a, q.rotate_inverse(scale3(GRAVITY_WORLD, -1.0))))
        .collect()
}

fn apply_errors(samples: &mut [Vec3], errors: &AxisErrors, noise: &NoiseStream) {
    let noisy = errors.sigma.iter().any(|&s| s > 0.0);
    let draws = if noisy { noise.track(samples.len()) } else { Vec::new() };
    for (t, v) in samples.iter_mut().enumerate() {
        for axis in 0..3 {
            v[axis] += errors.bias[axis];
            if noisy && errors.sigma[axis] > 0.0 {
                v[axis] += errors.sigma[axis] * draws[t][axis];
            }
        }
    }
}
