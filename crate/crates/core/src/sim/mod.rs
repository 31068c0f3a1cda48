//! Event-driven simulation of the hand executing schedules and scripts.
//!
//! Within a phase the spindle travels first, all motors of the phase engage
//! on arrival, then the runs start together after the settle time. Wheels
//! are interpolated linearly while a run is in progress; the discrete
//! [`tdmm`] transition is applied when a run finishes. Disturbances decay
//! analytically after release, so the trajectory does not depend on the
//! step size.

pub mod encoder;
pub mod script;
pub mod telemetry;

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hand_model::{DrivenJoint, FingerJoint, HandConfig, HandState, JointId, NUM_FINGERS, NUM_SHAFTS};
use crate::kinematics;
use crate::scheduler::{self, MotionDemand, MotorRun, Phase, PlanError, PlanOrigin, Schedule};
use crate::tdmm::{self, EngagementEvent, EventKind, TdmmError};

pub use encoder::{encoder_read, Encoder};
pub use script::{parse_script, Script, ScriptCommand, ScriptError, ScriptLine};
pub use telemetry::{write_csv, TelemetryRecord};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x7d3d_2024;

/// Residual below which a released disturbance is dropped, degrees.
const DISTURBANCE_FLOOR_DEG: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlanMode {
    Sequential,
    Interleaved { chunk_deg: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub mode: PlanMode,
    pub seed: u64,
    /// Re-read the encoders after each phase and trim out misalignment
    /// before releasing the plugs.
    pub closed_loop: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { mode: PlanMode::Sequential, seed: DEFAULT_SEED, closed_loop: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Tdmm(#[from] TdmmError),
    #[error("step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("disturbance: {0}")]
    Disturbance(String),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<SimError>,
    },
}

/// External joint offset, held between `applied_at` and `released_at` and
/// decaying exponentially after release.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disturbance {
    pub finger: usize,
    pub joint: FingerJoint,
    pub offset_deg: f64,
    pub applied_at: f64,
    pub released_at: f64,
}

impl Disturbance {
    /// Offset contributed at time `t` with reset rate `rate` (1/s).
    pub fn offset_at(&self, t: f64, rate: f64) -> f64 {
        if t < self.applied_at {
            0.0
        } else if t <= self.released_at {
            self.offset_deg
        } else {
            // rate may be infinite: exp(-inf) = 0
            self.offset_deg * (-rate * (t - self.released_at)).exp()
        }
    }

    fn active_at(&self, t: f64) -> bool {
        self.applied_at <= t && t < self.released_at
    }
}

#[derive(Clone, Debug)]
enum Task {
    Command { line: usize, command: ScriptCommand },
    Phase(Phase),
    Hold { seconds: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Stage {
    Arrive,
    StartRuns,
    Running,
    Release,
}

#[derive(Clone, Debug)]
struct Moving {
    motor: usize,
    shaft: usize,
    motor_deg: f64,
    from_deg: f64,
    offset_deg: f64,
    t0: f64,
    t1: f64,
    done: bool,
}

#[derive(Clone, Debug)]
struct PhaseRun {
    phase: Phase,
    start: f64,
    /// Wheel angles the main runs aim for.
    intended: [f64; NUM_SHAFTS],
    target: usize,
    travel_deg: f64,
    arrive: f64,
    runs_from: f64,
    end: f64,
    stage: Stage,
    moving: Vec<Moving>,
    trimmed: bool,
}

#[derive(Clone, Debug)]
enum Active {
    Phase(Box<PhaseRun>),
    Hold { until: f64 },
}

/// Drives a [`HandState`] through queued phases, waits and disturbances.
pub struct Runtime<'c> {
    config: &'c HandConfig,
    options: RunOptions,
    state: HandState,
    rng: ChaCha8Rng,
    encoder: Encoder,
    queue: VecDeque<Task>,
    active: Option<Active>,
    disturbances: Vec<Disturbance>,
    events: Vec<EngagementEvent>,
    line: Option<usize>,
}

impl<'c> Runtime<'c> {
    pub fn new(config: &'c HandConfig, options: RunOptions) -> Self {
        Self::with_state(config, options, HandState::new())
    }

    pub fn with_state(config: &'c HandConfig, options: RunOptions, state: HandState) -> Self {
        Self {
            config,
            options,
            state,
            rng: ChaCha8Rng::seed_from_u64(options.seed),
            encoder: Encoder::new(config.timing.encoder_bits),
            queue: VecDeque::new(),
            active: None,
            disturbances: Vec::new(),
            events: Vec::new(),
            line: None,
        }
    }

    pub fn state(&self) -> &HandState {
        &self.state
    }

    pub fn clock(&self) -> f64 {
        self.state.clock
    }

    pub fn events(&self) -> &[EngagementEvent] {
        &self.events
    }

    pub fn disturbances(&self) -> &[Disturbance] {
        &self.disturbances
    }

    pub fn is_idle(&self) -> bool {
        self.active.is_none() && self.queue.is_empty() && self.pending_disturbance_end().is_none()
    }

    pub fn enqueue_schedule(&mut self, schedule: &Schedule) {
        self.queue.extend(schedule.phases.iter().cloned().map(Task::Phase));
    }

    pub fn enqueue_script(&mut self, script: &Script) {
        self.queue.extend(
            script
                .lines
                .iter()
                .map(|l| Task::Command { line: l.line, command: l.command.clone() }),
        );
    }

    pub fn enqueue_wait(&mut self, seconds: f64) {
        self.queue.push_back(Task::Hold { seconds });
    }

    /// Adds a disturbance; overlapping one on the same joint is rejected.
    pub fn apply_disturbance(&mut self, d: Disturbance) -> Result<(), SimError> {
        if d.finger >= NUM_FINGERS {
            return Err(SimError::Disturbance(format!("finger {} does not exist", d.finger)));
        }
        if !d.offset_deg.is_finite() || !d.applied_at.is_finite() || !(d.released_at >= d.applied_at) {
            return Err(SimError::Disturbance("offset and times must be finite and ordered".into()));
        }
        let overlaps = self.disturbances.iter().any(|o| {
            o.finger == d.finger
                && o.joint == d.joint
                && o.applied_at < d.released_at.max(d.applied_at + f64::MIN_POSITIVE)
                && d.applied_at < o.released_at
        });
        if overlaps {
            return Err(SimError::Disturbance(format!(
                "finger {} {} already has an active disturbance",
                d.finger, d.joint
            )));
        }
        self.disturbances.push(d);
        self.refresh()
    }

    /// Releases the disturbance currently held on a joint; it starts decaying now.
    pub fn release_disturbance(&mut self, finger: usize, joint: FingerJoint) -> Result<(), SimError> {
        let now = self.state.clock;
        let d = self
            .disturbances
            .iter_mut()
            .find(|d| d.finger == finger && d.joint == joint && d.active_at(now))
            .ok_or_else(|| SimError::Disturbance(format!("no active disturbance on finger {finger} {joint}")))?;
        d.released_at = now.max(d.applied_at);
        self.refresh()
    }

    /// Advances the clock by `dt`.
    pub fn step(&mut self, dt: f64) -> Result<(), SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::BadStep(dt));
        }
        self.advance_to(self.state.clock + dt)
    }

    /// Processes every event up to `t` and leaves the clock at `t`.
    pub fn advance_to(&mut self, t: f64) -> Result<(), SimError> {
        self.process(Some(t))?;
        if t > self.state.clock {
            self.state.clock = t;
        }
        self.refresh()
    }

    /// Processes every queued task; the clock stops at the last event.
    pub fn run_until_idle(&mut self) -> Result<(), SimError> {
        self.process(None)?;
        self.refresh()
    }

    /// Samples the state every `sample_period` until idle.
    ///
    /// The first record is the current state; sampling stops at the first
    /// grid time at which nothing is left to do.
    pub fn sample_until_idle(&mut self) -> Result<Vec<TelemetryRecord>, SimError> {
        let period = self.config.timing.sample_period;
        let t0 = self.state.clock;
        let mut records = vec![self.record()];
        let mut i: u64 = 0;
        while !self.is_idle() {
            i += 1;
            self.advance_to(t0 + i as f64 * period)?;
            records.push(self.record());
        }
        Ok(records)
    }

    pub fn record(&self) -> TelemetryRecord {
        let mut joints = [[0.0; 4]; NUM_FINGERS];
        for (j, p) in joints.iter_mut().zip(&self.state.joint_angles) {
            *j = p.to_array();
        }
        let mut codes = [0; NUM_SHAFTS];
        for (c, &w) in codes.iter_mut().zip(&self.state.wheel_angles) {
            *c = self.encoder.read(w);
        }
        TelemetryRecord {
            t: self.state.clock,
            spindle_position: self.state.spindle_position,
            engaged: self.state.engaged.iter().map(|e| (e.motor, e.shaft)).collect(),
            wheel_angles: self.state.wheel_angles,
            joint_angles: joints,
            encoder_codes: codes,
        }
    }

    fn pending_disturbance_end(&self) -> Option<f64> {
        let now = self.state.clock;
        self.disturbances
            .iter()
            .filter(|d| d.released_at > now && d.released_at.is_finite())
            .map(|d| d.released_at)
            .reduce(f64::min)
    }

    fn with_line(&self, e: SimError) -> SimError {
        match (self.line, e) {
            (_, e @ SimError::AtLine { .. }) => e,
            (Some(line), e) => SimError::AtLine { line, source: Box::new(e) },
            (None, e) => e,
        }
    }

    fn process(&mut self, until: Option<f64>) -> Result<(), SimError> {
        self.process_inner(until).map_err(|e| self.with_line(e))
    }

    fn process_inner(&mut self, until: Option<f64>) -> Result<(), SimError> {
        loop {
            if self.active.is_none() {
                match self.queue.pop_front() {
                    Some(task) => {
                        self.start_task(task)?;
                        continue;
                    }
                    None => {
                        // let a held disturbance run out when draining
                        if until.is_none() {
                            if let Some(end) = self.pending_disturbance_end() {
                                self.state.clock = end;
                            }
                        }
                        return Ok(());
                    }
                }
            }
            let next = self.next_event_time();
            if until.is_some_and(|t| next > t) {
                return Ok(());
            }
            if next > self.state.clock {
                self.state.clock = next;
            }
            self.fire()?;
        }
    }

    fn next_event_time(&self) -> f64 {
        match self.active.as_ref().expect("active task") {
            Active::Hold { until } => *until,
            Active::Phase(p) => match p.stage {
                Stage::Arrive => p.arrive,
                Stage::StartRuns => p.runs_from,
                Stage::Running => p
                    .moving
                    .iter()
                    .filter(|m| !m.done)
                    .map(|m| m.t1)
                    .reduce(f64::min)
                    .unwrap_or(p.end),
                Stage::Release => p.end,
            },
        }
    }

    fn start_task(&mut self, task: Task) -> Result<(), SimError> {
        let now = self.state.clock;
        match task {
            Task::Hold { seconds } => {
                self.active = Some(Active::Hold { until: now + seconds });
            }
            Task::Phase(phase) => {
                let count = self.config.shaft_map.num_positions;
                if phase.position >= count {
                    return Err(TdmmError::BadPosition { position: phase.position, count }.into());
                }
                let travel_deg = tdmm::spindle_travel_deg(self.state.spindle_position, phase.position, count);
                let t = &self.config.timing;
                let arrive = now + travel_deg.abs() / t.spindle_speed;
                let runs_from = arrive + t.settle_time;
                let end = now + scheduler::phase_duration(travel_deg, &phase.runs, self.config);
                self.active = Some(Active::Phase(Box::new(PhaseRun {
                    target: phase.position,
                    phase,
                    start: now,
                    intended: self.state.wheel_angles,
                    travel_deg,
                    arrive,
                    runs_from,
                    end,
                    stage: Stage::Arrive,
                    moving: Vec::new(),
                    trimmed: false,
                })));
            }
            Task::Command { line, command } => {
                self.line = Some(line);
                self.start_command(command)?;
            }
        }
        Ok(())
    }

    fn start_command(&mut self, command: ScriptCommand) -> Result<(), SimError> {
        let mut targets: Vec<(JointId, f64)> = Vec::new();
        match command {
            ScriptCommand::Wait(s) => {
                self.queue.push_front(Task::Hold { seconds: s });
                return Ok(());
            }
            ScriptCommand::Disturb { finger, joint, deg, duration } => {
                let now = self.state.clock;
                self.apply_disturbance(Disturbance {
                    finger,
                    joint,
                    offset_deg: deg,
                    applied_at: now,
                    released_at: now + duration,
                })?;
                self.queue.push_front(Task::Hold { seconds: duration });
                return Ok(());
            }
            ScriptCommand::Move { finger, joint, deg } => targets.push((JointId::new(finger, joint), deg)),
            ScriptCommand::Pose(values) => targets.extend(JointId::all().zip(values)),
        }

        let demand = self.demand_for(&targets)?;
        let origin = PlanOrigin {
            spindle_position: self.state.spindle_position,
            wheel_angles: self.state.wheel_angles,
        };
        let schedule = match self.options.mode {
            PlanMode::Sequential => scheduler::plan_sequential_from(&demand, self.config, &origin)?,
            PlanMode::Interleaved { chunk_deg } => {
                scheduler::plan_interleaved_from(&demand, self.config, chunk_deg, &origin)?
            }
        };
        for phase in schedule.phases.into_iter().rev() {
            self.queue.push_front(Task::Phase(phase));
        }
        Ok(())
    }

    /// Wheel rotations that bring each joint to its target. Differences below
    /// half an encoder step are not actuated.
    fn demand_for(&self, targets: &[(JointId, f64)]) -> Result<MotionDemand, SimError> {
        let g = &self.config.geometry;
        let deadband = self.encoder.lsb_deg() / 2.0;
        let mut demand = MotionDemand::zero();
        for &(joint, value) in targets {
            let wheel = match joint.joint {
                DrivenJoint::Pip => kinematics::inverse_pip(value, g.r2, g.r3),
                DrivenJoint::Pitch => kinematics::inverse_pitch(value, g.r_pitch, g.r3),
                DrivenJoint::Roll => Ok(kinematics::inverse_roll(value, g.r3, g.r_roll)),
            }
            .map_err(|source| PlanError::Unreachable {
                joint,
                source: source_at(joint.joint.pose_joint(), source),
            })?;
            let shaft = self
                .config
                .shaft_map
                .shaft_of(joint)
                .ok_or(PlanError::UnassignedShaft(usize::MAX))?;
            let d = wheel - self.state.wheel_angles[shaft];
            if d.abs() > deadband {
                demand.0[shaft] = d;
            }
        }
        Ok(demand)
    }

    fn fire(&mut self) -> Result<(), SimError> {
        let now = self.state.clock;
        let mut run = match self.active.take().expect("active task") {
            Active::Hold { .. } => return Ok(()),
            Active::Phase(run) => run,
        };
        let result = self.fire_phase(&mut run, now);
        if result.is_ok() && !(run.stage == Stage::Release && run.moving.is_empty()) {
            self.active = Some(Active::Phase(run));
        }
        result
    }

    fn fire_phase(&mut self, run: &mut PhaseRun, now: f64) -> Result<(), SimError> {
        let config = self.config;
        let speed = config.timing.motor_speed;
        match run.stage {
            Stage::Arrive => {
                let start = run.start;
                tdmm::rotate_spindle(&mut self.state, run.target, config)?;
                if run.travel_deg != 0.0 {
                    self.log(EventKind::RotateSpindle, None, None, run.travel_deg, start, now - start);
                }
                for r in &run.phase.runs {
                    let (settle, _) = tdmm::engage(&mut self.state, r.motor, config, &mut self.rng)?;
                    self.log(EventKind::Engage, Some(r.motor), Some(r.shaft), 0.0, now, settle);
                }
                run.stage = Stage::StartRuns;
            }
            Stage::StartRuns => {
                run.moving = self.start_runs(&run.phase.runs, now, run.end)?;
                for m in &run.moving {
                    run.intended[m.shaft] = m.from_deg + m.motor_deg / config.k();
                }
                run.stage = Stage::Running;
            }
            Stage::Running => {
                if let Some(i) = earliest_unfinished(&run.moving) {
                    let m = &mut run.moving[i];
                    self.state.wheel_angles[m.shaft] = m.from_deg;
                    let motor = m.motor;
                    let deg = m.motor_deg;
                    m.done = true;
                    tdmm::motor_run(&mut self.state, motor, deg, config)?;
                    return Ok(());
                }
                let trims = if self.options.closed_loop && !run.trimmed { self.trims(&run.phase.runs, &run.intended) } else { Vec::new() };
                run.trimmed = true;
                if trims.is_empty() {
                    run.stage = Stage::Release;
                    run.moving.clear();
                    return self.release(&run.phase.runs, now);
                }
                let slowest = trims.iter().map(|r| r.motor_deg.abs() / speed).fold(0.0, f64::max);
                run.end = now + slowest;
                run.moving = self.start_runs(&trims, now, run.end)?;
            }
            Stage::Release => {
                run.moving.clear();
                self.release(&run.phase.runs, now)?;
            }
        }
        Ok(())
    }

    fn start_runs(&mut self, runs: &[MotorRun], now: f64, end: f64) -> Result<Vec<Moving>, SimError> {
        let speed = self.config.timing.motor_speed;
        let mut moving = Vec::with_capacity(runs.len());
        for r in runs {
            let e = self.state.engagement(r.motor).ok_or(TdmmError::NotEngaged(r.motor))?.clone();
            let duration = r.motor_deg.abs() / speed;
            self.log(EventKind::MotorRun, Some(r.motor), Some(r.shaft), r.motor_deg, now, duration);
            moving.push(Moving {
                motor: r.motor,
                shaft: e.shaft,
                motor_deg: r.motor_deg,
                from_deg: self.state.wheel_angles[e.shaft],
                offset_deg: if r.motor_deg != 0.0 { e.pending_offset_deg.unwrap_or(0.0) } else { 0.0 },
                t0: now,
                t1: (now + duration).min(end),
                done: false,
            });
        }
        Ok(moving)
    }

    /// Corrective runs that null the measured error of each engaged wheel.
    fn trims(&self, runs: &[MotorRun], intended: &[f64; NUM_SHAFTS]) -> Vec<MotorRun> {
        let k = self.config.k();
        let lsb = self.encoder.lsb_deg();
        let mut out = Vec::new();
        for r in runs {
            let Some(e) = self.state.engagement(r.motor) else { continue };
            let intended = intended[e.shaft];
            let measured = self.encoder.dequantize(self.encoder.read(self.state.wheel_angles[e.shaft]));
            let err = encoder::angle_diff_deg(intended, measured);
            if err.abs() > lsb {
                out.push(MotorRun { motor: r.motor, shaft: e.shaft, motor_deg: err * k });
            }
        }
        out
    }

    fn release(&mut self, runs: &[MotorRun], now: f64) -> Result<(), SimError> {
        for r in runs {
            let elapsed = tdmm::disengage(&mut self.state, r.motor, self.config)?;
            self.log(EventKind::Disengage, Some(r.motor), Some(r.shaft), 0.0, now, elapsed);
        }
        self.active = None;
        Ok(())
    }

    fn log(&mut self, kind: EventKind, motor: Option<usize>, shaft: Option<usize>, amount: f64, t: f64, d: f64) {
        self.events.push(EngagementEvent { kind, motor, shaft, amount_deg: amount, t_start_s: t, duration_s: d });
    }

    /// Interpolates runs in progress, applies disturbances and recomputes joints.
    fn refresh(&mut self) -> Result<(), SimError> {
        let now = self.state.clock;
        if let Some(Active::Phase(run)) = &self.active {
            let k = self.config.k();
            for m in run.moving.iter().filter(|m| !m.done) {
                let span = m.t1 - m.t0;
                let frac = if span > 0.0 { ((now - m.t0) / span).clamp(0.0, 1.0) } else { 0.0 };
                let offset = if now > m.t0 { m.offset_deg } else { 0.0 };
                self.state.wheel_angles[m.shaft] = m.from_deg + offset + m.motor_deg / k * frac;
            }
        }

        let rate = self.config.magnet_reset_rate;
        self.disturbances
            .retain(|d| now <= d.released_at || d.offset_at(now, rate).abs() >= DISTURBANCE_FLOOR_DEG);
        let mut offsets = [[0.0; 4]; NUM_FINGERS];
        for d in &self.disturbances {
            offsets[d.finger][d.joint.index()] += d.offset_at(now, rate);
        }
        self.state.disturbance = offsets;
        self.state.refresh_joints(self.config).map_err(|e| self.with_line(TdmmError::from(e).into()))
    }
}

fn source_at(joint: FingerJoint, e: kinematics::KinematicError) -> kinematics::KinematicError {
    match e {
        e @ kinematics::KinematicError::Joint { .. } => e,
        e => kinematics::KinematicError::Joint { joint, source: Box::new(e) },
    }
}

fn earliest_unfinished(moving: &[Moving]) -> Option<usize> {
    moving
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.done)
        .min_by(|a, b| a.1.t1.total_cmp(&b.1.t1))
        .map(|(i, _)| i)
}

/// Outcome of running a script to completion.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub telemetry: Vec<TelemetryRecord>,
    pub events: Vec<EngagementEvent>,
    pub final_state: HandState,
}

/// Runs `script` from the rest pose, sampling every `sample_period`.
pub fn run_script(script: &Script, config: &HandConfig, options: RunOptions) -> Result<RunOutcome, SimError> {
    let mut rt = Runtime::new(config, options);
    rt.enqueue_script(script);
    let telemetry = rt.sample_until_idle()?;
    Ok(RunOutcome { telemetry, events: rt.events, final_state: rt.state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::plan_sequential;

    fn quiet() -> HandConfig {
        HandConfig { alignment_error_max_deg: 0.0, ..HandConfig::default() }
    }

    fn disturbance(offset_deg: f64, released_at: f64) -> Disturbance {
        Disturbance { finger: 0, joint: FingerJoint::Pip, offset_deg, applied_at: 0.0, released_at }
    }

    #[test]
    fn idle_step_only_moves_the_clock() {
        let c = HandConfig::default();
        let mut rt = Runtime::new(&c, RunOptions::default());
        let before = rt.state().clone();
        rt.step(0.37).unwrap();
        let mut after = rt.state().clone();
        assert_eq!(after.clock, 0.37);
        after.clock = 0.0;
        assert_eq!(after, before);
        assert!(rt.events().is_empty());
    }

    #[test]
    fn step_must_be_positive() {
        let c = HandConfig::default();
        let mut rt = Runtime::new(&c, RunOptions::default());
        assert!(matches!(rt.step(0.0), Err(SimError::BadStep(_))));
        assert!(matches!(rt.step(-1.0), Err(SimError::BadStep(_))));
        assert!(matches!(rt.step(f64::NAN), Err(SimError::BadStep(_))));
    }

    #[test]
    fn released_offset_halves_after_ln2() {
        let c = HandConfig { magnet_reset_rate: 1.0, ..HandConfig::default() };
        let mut rt = Runtime::new(&c, RunOptions::default());
        rt.apply_disturbance(disturbance(10.0, 0.0)).unwrap();
        assert_eq!(rt.state().joint_angles[0].theta2, 10.0);
        rt.step(std::f64::consts::LN_2).unwrap();
        assert!((rt.state().joint_angles[0].theta2 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn fifteen_degrees_decays_within_five_time_constants() {
        let c = HandConfig::default();
        let mut rt = Runtime::new(&c, RunOptions::default());
        rt.apply_disturbance(disturbance(15.0, 0.0)).unwrap();
        rt.step(5.0 / c.magnet_reset_rate).unwrap();
        let residual = rt.state().joint_angles[0].theta2;
        assert!(residual > 0.0 && residual < 0.11, "{residual}");
    }

    #[test]
    fn infinite_rate_restores_on_next_step() {
        let c = HandConfig { magnet_reset_rate: f64::INFINITY, ..HandConfig::default() };
        let mut rt = Runtime::new(&c, RunOptions::default());
        rt.apply_disturbance(Disturbance { released_at: 10.0, ..disturbance(20.0, 10.0) }).unwrap();
        rt.release_disturbance(0, FingerJoint::Pip).unwrap();
        rt.step(1e-3).unwrap();
        assert_eq!(rt.state().joint_angles[0].theta2, 0.0);
        assert!(rt.disturbances().is_empty());
    }

    #[test]
    fn dip_disturbance_stays_local() {
        let c = HandConfig::default();
        let mut rt = Runtime::new(&c, RunOptions::default());
        rt.apply_disturbance(Disturbance { joint: FingerJoint::Dip, ..disturbance(12.0, 1.0) }).unwrap();
        let p = rt.state().joint_angles[0];
        assert_eq!(p.theta1, 12.0);
        assert_eq!([p.theta2, p.theta3, p.phi3], [0.0; 3]);
        assert_eq!(rt.state().joint_angles[1], Default::default());
    }

    #[test]
    fn overlapping_disturbance_rejected() {
        let c = HandConfig::default();
        let mut rt = Runtime::new(&c, RunOptions::default());
        rt.apply_disturbance(disturbance(5.0, 1.0)).unwrap();
        let second = Disturbance { applied_at: 0.5, released_at: 2.0, ..disturbance(3.0, 2.0) };
        assert!(matches!(rt.apply_disturbance(second), Err(SimError::Disturbance(_))));
        // other joints are independent
        rt.apply_disturbance(Disturbance { joint: FingerJoint::Roll, ..second }).unwrap();
    }

    #[test]
    fn runtime_finishes_at_the_planned_makespan() {
        let c = quiet();
        let d = MotionDemand([10.0, 5.0, -20.0, 3.0, 0.0, 1.0, 2.0, 0.0, 7.0]);
        let s = plan_sequential(&d, &c).unwrap();
        let mut rt = Runtime::new(&c, RunOptions { closed_loop: false, ..Default::default() });
        rt.enqueue_schedule(&s);
        rt.run_until_idle().unwrap();
        assert_eq!(rt.clock(), s.makespan_s);
        assert_eq!(rt.state().wheel_angles, d.0);
        assert!(rt.state().engaged.is_empty());
    }

    #[test]
    fn one_step_equals_two_steps_across_a_phase_boundary() {
        let c = HandConfig::default();
        let d = MotionDemand([10.0, 5.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let s = plan_sequential(&d, &c).unwrap();
        let boundary = s.phases[0].duration_s;
        let t = boundary + 0.1;

        let mut one = Runtime::new(&c, RunOptions::default());
        one.enqueue_schedule(&s);
        one.step(t).unwrap();
        let mut two = Runtime::new(&c, RunOptions::default());
        two.enqueue_schedule(&s);
        two.step(boundary - 0.01).unwrap();
        two.step(t - (boundary - 0.01)).unwrap();
        assert_eq!(one.state().wheel_angles, two.state().wheel_angles);
        assert_eq!(one.events(), two.events());
    }

    #[test]
    fn empty_script_gives_one_record() {
        let out = run_script(&Script::default(), &HandConfig::default(), RunOptions::default()).unwrap();
        assert_eq!(out.telemetry.len(), 1);
        assert_eq!(out.telemetry[0].t, 0.0);
        assert!(out.events.is_empty());
    }

    #[test]
    fn move_reaches_target() {
        let c = HandConfig::default();
        let script = parse_script("move f0 pip 42.21").unwrap();
        let out = run_script(&script, &c, RunOptions::default()).unwrap();
        let th2 = out.final_state.joint_angles[0].theta2;
        assert!((th2 - 42.21).abs() < 0.30, "{th2}");
        let last = out.telemetry.last().unwrap();
        assert_eq!(last.joint_angles[0][1], th2);
        assert!(out.telemetry.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn unreachable_target_names_joint_and_line() {
        let c = HandConfig::default();
        let script = parse_script("wait 0.1\nmove f1 pip 200").unwrap();
        let e = run_script(&script, &c, RunOptions::default()).unwrap_err().to_string();
        assert!(e.starts_with("line 2: f1_pip target unreachable: pip range"), "{e}");
    }

    #[test]
    fn same_seed_same_telemetry() {
        let c = HandConfig::default();
        let script = parse_script("pose 30 10 5 20 0 -10 45 20 0\ndisturb 2 dip 15 0.2\nwait 0.3").unwrap();
        let a = run_script(&script, &c, RunOptions::default()).unwrap();
        let b = run_script(&script, &c, RunOptions::default()).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_csv(&a.telemetry, &mut ca).unwrap();
        write_csv(&b.telemetry, &mut cb).unwrap();
        assert_eq!(ca, cb);
        let other = run_script(&script, &c, RunOptions { seed: 9, ..Default::default() }).unwrap();
        assert_ne!(other.final_state.wheel_angles, a.final_state.wheel_angles);
    }
}
