//! Virtual IMU synthesis and augmentation for wearable activity recognition.
//!
//! The engine simulates accelerometer and gyroscope signals from a
//! parametric human-motion model (body, dynamics, placement, hardware) and
//! produces augmented training batches two ways:
//!
//! * [`stda`]: classical signal-space transforms applied to recorded windows.
//! * [`ppda`]: physically plausible transforms applied to the simulation
//!   parameters, followed by re-synthesis.
//!
//! [`policy`] samples one augmentation sub-policy per mini-batch and adapts
//! the sampling probabilities from reported rewards. [`dataio`] holds the
//! bundle documents, CSV traces, windowing and the binary batch frames.

pub mod dataio;
pub mod error;
pub mod fixtures;
pub mod kinematics;
pub mod model;
pub mod noise;
pub mod pipeline;
pub mod policy;
pub mod ppda;
pub mod quat;
pub mod spline;
pub mod stda;

pub use ndarray;

pub use error::{Error, FrameError, Result};
pub use kinematics::{forward_kinematics, synthesize_bundle, synthesize_imu, JointPose, GRAVITY};
pub use model::{
    AxisErrors, HardwareProfile, Joint, MotionBundle, MotionSequence, PlacementMap,
    SensorHardware, SensorPlacement, SensorTrace, Skeleton,
};
pub use policy::{AugMode, PolicyConfig, PolicyState, SubPolicy};
pub use quat::{Quaternion, Vec3};
pub use stda::{SignalWindow, WarpCurve};
