//! Synthetic motion bundles with known closed-form behaviour.
//!
//! These stand in for identified subject data in tests, benchmarks and
//! demos.

use std::f64::consts::PI;

use rand::Rng;

use crate::model::{HardwareProfile, Joint, MotionBundle, MotionSequence, PlacementMap, SensorPlacement, Skeleton};
use crate::quat::{Axis, Quaternion};

fn random_unit(rng: &mut impl Rng) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return q.scale(1.0 / n);
        }
    }
}

/// One wrist sensor on the root joint, slightly tilted.
pub fn wrist_placement() -> PlacementMap {
    PlacementMap::new(vec![SensorPlacement {
        sensor_id: "wrist".into(),
        joint: 0,
        rel_pos: [0.02, 0.0, 0.01],
        rel_orient: Quaternion::from_euler_zyx(0.1, 0.0, 0.2),
    }])
    .expect("valid placement")
}

/// A random chain held in a random constant pose, with 1–3 randomly placed
/// ideal sensors.
pub fn static_bundle(rng: &mut impl Rng, len: usize) -> MotionBundle {
    let joints = rng.random_range(1..6);
    let mut skel = vec![Joint::new("j0", None, [0.0; 3])];
    for j in 1..joints {
        let parent = rng.random_range(0..j);
        let offset = [(); 3].map(|_| rng.random_range(-0.5..0.5));
        skel.push(Joint::new(format!("j{j}"), Some(parent), offset));
    }
    let body = Skeleton::new(skel).expect("valid skeleton");
    let pose: Vec<Quaternion> = (0..joints).map(|_| random_unit(rng)).collect();
    let root = [(); 3].map(|_| rng.random_range(-1.0..1.0));
    let dynamics =
        MotionSequence::new(100.0, vec![root; len], vec![pose; len]).expect("valid dynamics");
    let sensors = (0..rng.random_range(1..4))
        .map(|k| SensorPlacement {
            sensor_id: format!("s{k}"),
            joint: rng.random_range(0..joints),
            rel_pos: [(); 3].map(|_| rng.random_range(-0.1..0.1)),
            rel_orient: random_unit(rng),
        })
        .collect();
    MotionBundle::new(
        "static",
        body,
        dynamics,
        PlacementMap::new(sensors).expect("valid placement"),
        HardwareProfile::ideal(),
    )
    .expect("consistent bundle")
}

/// A single upright segment at rest with one ideal sensor `"imu"`.
pub fn upright_bundle(rate_hz: f64, len: usize) -> MotionBundle {
    let placement = PlacementMap::new(vec![SensorPlacement {
        sensor_id: "imu".into(),
        joint: 0,
        rel_pos: [0.0; 3],
        rel_orient: Quaternion::IDENTITY,
    }])
    .expect("valid placement");
    MotionBundle::new(
        "upright",
        Skeleton::single(),
        MotionSequence::constant(rate_hz, len, 1),
        placement,
        HardwareProfile::ideal(),
    )
    .expect("consistent bundle")
}

/// Root spinning about world z at `omega` rad/s; one ideal sensor at
/// `(radius, 0, 0)` on the root.
pub fn spin_bundle(omega: f64, radius: f64, rate_hz: f64, len: usize) -> MotionBundle {
    let orient = (0..len)
        .map(|t| vec![Quaternion::about_axis(Axis::Z, omega * t as f64 / rate_hz)])
        .collect();
    let dynamics = MotionSequence::new(rate_hz, vec![[0.0; 3]; len], orient).expect("valid dynamics");
    let placement = PlacementMap::new(vec![SensorPlacement {
        sensor_id: "imu".into(),
        joint: 0,
        rel_pos: [radius, 0.0, 0.0],
        rel_orient: Quaternion::IDENTITY,
    }])
    .expect("valid placement");
    MotionBundle::new("spin", Skeleton::single(), dynamics, placement, HardwareProfile::ideal())
        .expect("consistent bundle")
}

/// Torso bending sideways about x with angle `A(1 − cos(2πt/period))/2`.
///
/// The sensor sits at the rotation centre, so it reads gravity only:
/// `accel = (0, g·sin φ, g·cos φ)`. The y channel peaks at `t = period/2`.
pub fn lateral_bend_bundle(amplitude: f64, period: usize, rate_hz: f64, len: usize) -> MotionBundle {
    let orient = (0..len)
        .map(|t| {
            let phase = 2.0 * PI * t as f64 / period as f64;
            vec![Quaternion::about_axis(Axis::X, 0.5 * amplitude * (1.0 - phase.cos()))]
        })
        .collect();
    let dynamics = MotionSequence::new(rate_hz, vec![[0.0; 3]; len], orient).expect("valid dynamics");
    let placement = PlacementMap::new(vec![SensorPlacement {
        sensor_id: "torso".into(),
        joint: 0,
        rel_pos: [0.0; 3],
        rel_orient: Quaternion::IDENTITY,
    }])
    .expect("valid placement");
    MotionBundle::new("bend", Skeleton::single(), dynamics, placement, HardwareProfile::ideal())
        .expect("consistent bundle")
}

/// A three-joint arm (shoulder, elbow, wrist) swinging periodically while the
/// pelvis walks forward; two sensors. Labels alternate every `segment`
/// samples between class 0 and class 1.
pub fn walking_arm_bundle(subject: &str, rate_hz: f64, len: usize, segment: usize) -> (MotionBundle, Vec<u32>) {
    let body = Skeleton::new(vec![
        Joint::new("pelvis", None, [0.0; 3]),
        Joint::new("shoulder", Some(0), [0.0, 0.2, 0.5]),
        Joint::new("elbow", Some(1), [0.0, 0.0, -0.3]),
        Joint::new("wrist", Some(2), [0.0, 0.0, -0.25]),
    ])
    .expect("valid skeleton");
    let mut trans = Vec::with_capacity(len);
    let mut orient = Vec::with_capacity(len);
    for t in 0..len {
        let s = t as f64 / rate_hz;
        let fast = if (t / segment.max(1)).is_multiple_of(2) { 1.0 } else { 1.8 };
        let phase = 2.0 * PI * fast * s;
        trans.push([1.2 * s, 0.0, 1.0 + 0.02 * (2.0 * phase).sin()]);
        orient.push(vec![
            Quaternion::about_axis(Axis::Z, 0.05 * phase.sin()),
            Quaternion::about_axis(Axis::Y, 0.5 * phase.sin()),
            Quaternion::about_axis(Axis::Y, 0.3 + 0.25 * (phase + 0.4).sin()),
            Quaternion::from_euler_zyx(0.1 * phase.cos(), 0.0, 0.0),
        ]);
    }
    let dynamics = MotionSequence::new(rate_hz, trans, orient).expect("valid dynamics");
    let placement = PlacementMap::new(vec![
        SensorPlacement {
            sensor_id: "wrist".into(),
            joint: 3,
            rel_pos: [0.0, 0.03, -0.02],
            rel_orient: Quaternion::from_euler_zyx(0.0, 0.2, PI / 2.0),
        },
        SensorPlacement {
            sensor_id: "hip".into(),
            joint: 0,
            rel_pos: [0.1, 0.15, 0.0],
            rel_orient: Quaternion::IDENTITY,
        },
    ])
    .expect("valid placement");
    let labels = (0..len).map(|t| ((t / segment.max(1)) % 2) as u32).collect();
    let bundle = MotionBundle::new(subject, body, dynamics, placement, HardwareProfile::ideal())
        .expect("consistent bundle");
    (bundle, labels)
}
