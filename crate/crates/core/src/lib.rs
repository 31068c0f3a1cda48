//! Kinematics, multiplexed-drive scheduling and simulation for a
//! cable-driven three-finger hand whose nine tendon shafts share three
//! motors through a rotating selector.
//!
//! The kinematic layer is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, with `*32` variants for `f32`.

// NaN must fail range checks, so `!(x > 0.0)` is deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curves;
pub mod hand_model;
pub mod kinematics;
pub mod scalar;
pub mod scheduler;
pub mod sim;
pub mod tdmm;

pub use hand_model::{
    reduction_ratio, validate_config, ConfigErrors, DrivenJoint, FingerJoint, GearTrain, HandConfig, HandState,
    JointId, ShaftMap, TimingModel,
};
pub use scalar::Scalar;
pub use scheduler::{
    makespan, oracle_optimal, plan_interleaved, plan_sequential, MotionDemand, PlanError, Schedule,
};
pub use sim::{encoder_read, parse_script, run_script, RunOptions, Runtime, TelemetryRecord};
pub use tdmm::{disengage, engage, motor_run, rotate_spindle, TdmmError};

/// Scalar used by the concrete aliases.
pub type Real = f64;

pub type FingerGeometry = hand_model::FingerGeometry<Real>;
pub type FingerPose = kinematics::FingerPose<Real>;
pub type FingerWheels = kinematics::FingerWheels<Real>;
pub type CableDisplacement = kinematics::CableDisplacement<Real>;
pub type LinearFit = kinematics::LinearFit<Real>;

pub type FingerGeometry32 = hand_model::FingerGeometry<f32>;
pub type FingerPose32 = kinematics::FingerPose<f32>;
pub type FingerWheels32 = kinematics::FingerWheels<f32>;
