//! State machine of the multiplexed drive: spindle repositioning, plug
//! engagement and release, and torque transfer from a motor to a winding
//! wheel through the reduction gears.
//!
//! Every transition checks its precondition before touching the state, so a
//! rejected transition leaves the [`HandState`] unchanged. Worm drives are
//! treated as self-locking: a released shaft keeps its angle until it is
//! engaged again.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hand_model::{Engagement, HandConfig, HandState, PoseError, NUM_MOTORS};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TdmmError {
    #[error("spindle jam: rotation requested while motors {0:?} are engaged")]
    RotateWhileEngaged(Vec<usize>),
    #[error("spindle position {position} out of range (0..{count})")]
    BadPosition { position: usize, count: usize },
    #[error("motor {0} does not exist")]
    BadMotor(usize),
    #[error("motor {0} is already engaged")]
    AlreadyEngaged(usize),
    #[error("motor {0} is not engaged")]
    NotEngaged(usize),
    #[error("motor run of {0} deg is not finite")]
    NonFinite(f64),
    #[error(transparent)]
    Pose(#[from] PoseError),
}

/// Plug/slot misalignment sampled at engagement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignmentError {
    /// Degrees at the motor.
    pub motor_side: f64,
    /// Degrees at the winding wheel, `motor_side / k`.
    pub wheel_side: f64,
}

impl AlignmentError {
    pub fn from_motor_side(motor_side: f64, k: f64) -> Self {
        Self { motor_side, wheel_side: motor_side / k }
    }
}

/// Signed shortest spindle travel from `from` to `to`, degrees.
///
/// Half-turn ties go in the positive direction.
pub fn spindle_travel_deg(from: usize, to: usize, num_positions: usize) -> f64 {
    let n = num_positions as i64;
    let mut steps = (to as i64 - from as i64).rem_euclid(n);
    if 2 * steps > n {
        steps -= n;
    }
    steps as f64 * (360.0 / num_positions as f64)
}

/// Moves the motor group to `target`. Returns the elapsed time.
pub fn rotate_spindle(state: &mut HandState, target: usize, config: &HandConfig) -> Result<f64, TdmmError> {
    let count = config.shaft_map.num_positions;
    if target >= count {
        return Err(TdmmError::BadPosition { position: target, count });
    }
    if !state.engaged.is_empty() {
        return Err(TdmmError::RotateWhileEngaged(state.engaged.iter().map(|e| e.motor).collect()));
    }
    let travel = spindle_travel_deg(state.spindle_position, target, count);
    state.spindle_position = target;
    Ok(travel.abs() / config.timing.spindle_speed)
}

/// Lifts the plug of `motor` into the shaft slot at the current position.
///
/// The misalignment is drawn uniformly from `[-max, +max]` at the motor and
/// taken up by the first non-zero run of this engagement.
pub fn engage<R: Rng + ?Sized>(
    state: &mut HandState,
    motor: usize,
    config: &HandConfig,
    rng: &mut R,
) -> Result<(f64, AlignmentError), TdmmError> {
    if motor >= NUM_MOTORS {
        return Err(TdmmError::BadMotor(motor));
    }
    if state.is_engaged(motor) {
        return Err(TdmmError::AlreadyEngaged(motor));
    }
    let max = config.alignment_error_max_deg;
    let motor_side = if max > 0.0 { rng.gen_range(-max..=max) } else { 0.0 };
    let error = AlignmentError::from_motor_side(motor_side, config.k());

    let shaft = config.shaft_map.shaft_for(motor, state.spindle_position);
    let at = state.engaged.partition_point(|e| e.motor < motor);
    state.engaged.insert(
        at,
        Engagement { motor, shaft, pending_offset_deg: Some(error.wheel_side) },
    );
    Ok((config.timing.settle_time, error))
}

/// Drops the plug of `motor`; its shaft holds position from here on.
///
/// De-energizing the coil releases the plug immediately, so no time elapses.
pub fn disengage(state: &mut HandState, motor: usize, _config: &HandConfig) -> Result<f64, TdmmError> {
    let idx = state
        .engaged
        .iter()
        .position(|e| e.motor == motor)
        .ok_or(TdmmError::NotEngaged(motor))?;
    state.engaged.remove(idx);
    Ok(0.0)
}

/// Turns `motor` by `motor_degrees`; the engaged wheel turns by
/// `motor_degrees / k`, plus any pending misalignment on the first run.
pub fn motor_run(
    state: &mut HandState,
    motor: usize,
    motor_degrees: f64,
    config: &HandConfig,
) -> Result<f64, TdmmError> {
    if !motor_degrees.is_finite() {
        return Err(TdmmError::NonFinite(motor_degrees));
    }
    let idx = state
        .engaged
        .iter()
        .position(|e| e.motor == motor)
        .ok_or(TdmmError::NotEngaged(motor))?;
    if motor_degrees == 0.0 {
        return Ok(0.0);
    }

    let mut next = state.clone();
    let engagement = &mut next.engaged[idx];
    let offset = engagement.pending_offset_deg.take().unwrap_or(0.0);
    let shaft = engagement.shaft;
    next.wheel_angles[shaft] += motor_degrees / config.k() + offset;
    next.refresh_joints(config)?;
    *state = next;
    Ok(motor_degrees.abs() / config.timing.motor_speed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    RotateSpindle,
    Engage,
    Disengage,
    MotorRun,
}

/// One line of the event log.
///
/// `amount_deg` is the motor rotation for `motor_run` and the signed spindle
/// travel for `rotate_spindle`; `motor` and `shaft` are null for spindle
/// moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngagementEvent {
    pub kind: EventKind,
    pub motor: Option<usize>,
    pub shaft: Option<usize>,
    pub amount_deg: f64,
    pub t_start_s: f64,
    pub duration_s: f64,
}

/// Serializes events as JSON lines.
pub fn write_event_log<W: std::io::Write>(events: &[EngagementEvent], mut out: W) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Re-applies a logged event sequence to `state`.
pub fn replay<R: Rng + ?Sized>(
    state: &mut HandState,
    events: &[EngagementEvent],
    config: &HandConfig,
    rng: &mut R,
) -> Result<(), TdmmError> {
    let n = config.shaft_map.num_positions;
    for e in events {
        let motor = e.motor.unwrap_or(usize::MAX);
        match e.kind {
            EventKind::RotateSpindle => {
                let steps = (e.amount_deg / config.shaft_map.spacing_deg()).round() as i64;
                let target = (state.spindle_position as i64 + steps).rem_euclid(n as i64) as usize;
                rotate_spindle(state, target, config)?;
            }
            EventKind::Engage => {
                engage(state, motor, config, rng)?;
            }
            EventKind::Disengage => {
                disengage(state, motor, config)?;
            }
            EventKind::MotorRun => {
                motor_run(state, motor, e.amount_deg, config)?;
            }
        }
    }
    Ok(())
}
