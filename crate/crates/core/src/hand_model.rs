//! Configuration and state types shared by every other module.
//!
//! A [`HandConfig`] describes one hand: three identical fingers, the gear
//! train between each drive motor and its winding wheel, the map from
//! spindle position to engaged shafts, and the timing constants of the
//! drive box. [`validate_config`] checks every invariant and reports all
//! violations at once, each tagged with the path of the offending field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::kinematics::{self, FingerPose, FingerWheels, KinematicError};
use crate::scalar::Scalar;

/// Number of output shafts (and cables) in the drive box.
pub const NUM_SHAFTS: usize = 9;
/// Number of drive motors carried by the spindle.
pub const NUM_MOTORS: usize = 3;
/// Number of fingers.
pub const NUM_FINGERS: usize = 3;
/// Largest wheel-side alignment error a configuration may imply, degrees.
pub const MAX_WHEEL_ALIGNMENT_ERROR_DEG: f64 = 0.5;

/// Actively driven joints of one finger, one cable each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrivenJoint {
    Pip,
    Pitch,
    Roll,
}

impl DrivenJoint {
    pub const ALL: [DrivenJoint; 3] = [DrivenJoint::Pip, DrivenJoint::Pitch, DrivenJoint::Roll];

    pub fn name(self) -> &'static str {
        match self {
            DrivenJoint::Pip => "pip",
            DrivenJoint::Pitch => "pitch",
            DrivenJoint::Roll => "roll",
        }
    }

    /// The pose component this cable drives.
    pub fn pose_joint(self) -> FingerJoint {
        match self {
            DrivenJoint::Pip => FingerJoint::Pip,
            DrivenJoint::Pitch => FingerJoint::Pitch,
            DrivenJoint::Roll => FingerJoint::Roll,
        }
    }
}

impl fmt::Display for DrivenJoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DrivenJoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pip" => Ok(DrivenJoint::Pip),
            "pitch" | "mcp_pitch" => Ok(DrivenJoint::Pitch),
            "roll" | "mcp_roll" => Ok(DrivenJoint::Roll),
            other => Err(format!("unknown driven joint `{other}` (expected pip, pitch or roll)")),
        }
    }
}

/// Every pose component of a finger, in telemetry column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FingerJoint {
    Dip,
    Pip,
    Pitch,
    Roll,
}

impl FingerJoint {
    pub const ALL: [FingerJoint; 4] = [
        FingerJoint::Dip,
        FingerJoint::Pip,
        FingerJoint::Pitch,
        FingerJoint::Roll,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FingerJoint::Dip => "dip",
            FingerJoint::Pip => "pip",
            FingerJoint::Pitch => "pitch",
            FingerJoint::Roll => "roll",
        }
    }
}

impl fmt::Display for FingerJoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FingerJoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dip" => Ok(FingerJoint::Dip),
            other => other
                .parse::<DrivenJoint>()
                .map(DrivenJoint::pose_joint)
                .map_err(|_| format!("unknown joint `{other}` (expected dip, pip, pitch or roll)")),
        }
    }
}

/// A driven joint of a particular finger, written `f<finger>_<joint>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct JointId {
    pub finger: usize,
    pub joint: DrivenJoint,
}

impl JointId {
    pub fn new(finger: usize, joint: DrivenJoint) -> Self {
        Self { finger, joint }
    }

    /// All nine driven joints, finger-major.
    pub fn all() -> impl Iterator<Item = JointId> {
        (0..NUM_FINGERS).flat_map(|f| DrivenJoint::ALL.into_iter().map(move |j| JointId::new(f, j)))
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}_{}", self.finger, self.joint)
    }
}

impl FromStr for JointId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (finger, joint) = s
            .strip_prefix('f')
            .and_then(|rest| rest.split_once('_'))
            .ok_or_else(|| format!("joint id `{s}` is not of the form f<finger>_<joint>"))?;
        let finger = finger
            .parse::<usize>()
            .map_err(|_| format!("joint id `{s}` has a non-numeric finger index"))?;
        Ok(JointId::new(finger, joint.parse()?))
    }
}

impl TryFrom<String> for JointId {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<JointId> for String {
    fn from(value: JointId) -> Self {
        value.to_string()
    }
}

/// Geometry of one finger. All lengths in millimetres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct FingerGeometry<T> {
    /// DIP rolling-joint radius.
    pub r1: T,
    /// PIP rolling-joint radius.
    pub r2: T,
    /// MCP-pitch rolling-joint radius.
    pub r_pitch: T,
    /// MCP-roll joint radius.
    pub r_roll: T,
    /// Winding-wheel radius.
    pub r3: T,
    /// Proximal, intermediate and distal phalanx lengths.
    pub link_lengths: [T; 3],
    /// Symmetric MCP-roll range, degrees.
    #[serde(default = "default_roll_limit")]
    pub roll_limit_deg: T,
}

fn default_roll_limit<T: Scalar>() -> T {
    T::lit(45.0)
}

impl<T: Scalar> Default for FingerGeometry<T> {
    fn default() -> Self {
        Self {
            r1: T::lit(5.0),
            r2: T::lit(5.0),
            r_pitch: T::lit(5.0),
            r_roll: T::lit(8.0),
            r3: T::lit(8.0),
            link_lengths: [T::lit(50.0), T::lit(30.0), T::lit(25.0)],
            roll_limit_deg: default_roll_limit(),
        }
    }
}

/// Tooth counts of the two-stage reduction between motor and worm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GearTrain {
    pub z1: u32,
    pub z2: u32,
    pub z3: u32,
    pub z4: u32,
}

impl Default for GearTrain {
    fn default() -> Self {
        Self { z1: 12, z2: 40, z3: 12, z4: 120 }
    }
}

impl GearTrain {
    /// Exact reduction ratio `(z2*z4)/(z1*z3)`; `None` if a tooth count is zero.
    pub fn ratio_exact(&self) -> Option<Ratio<u64>> {
        let den = u64::from(self.z1) * u64::from(self.z3);
        if den == 0 {
            return None;
        }
        Some(Ratio::new(u64::from(self.z2) * u64::from(self.z4), den))
    }
}

/// Reduction ratio k of a gear train (motor degrees per wheel degree).
pub fn reduction_ratio(gears: &GearTrain) -> f64 {
    (f64::from(gears.z2) * f64::from(gears.z4)) / (f64::from(gears.z1) * f64::from(gears.z3))
}

/// Which shaft each motor reaches at each spindle position, and which joint
/// each shaft drives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShaftMap {
    pub num_shafts: usize,
    pub num_positions: usize,
    pub motor_offsets: Vec<usize>,
    pub joint_assignment: BTreeMap<JointId, usize>,
}

impl Default for ShaftMap {
    fn default() -> Self {
        let joint_assignment = JointId::all()
            .map(|j| (j, j.finger * 3 + DrivenJoint::ALL.iter().position(|&d| d == j.joint).unwrap()))
            .collect();
        Self {
            num_shafts: NUM_SHAFTS,
            num_positions: 9,
            motor_offsets: vec![0, 3, 6],
            joint_assignment,
        }
    }
}

impl ShaftMap {
    /// Shaft reached by `motor` when the spindle sits at `position`.
    pub fn shaft_for(&self, motor: usize, position: usize) -> usize {
        (self.motor_offsets[motor] + position) % self.num_shafts
    }

    /// Motor that reaches `shaft` at `position`, if any.
    pub fn motor_for(&self, shaft: usize, position: usize) -> Option<usize> {
        (0..self.motor_offsets.len()).find(|&m| self.shaft_for(m, position) == shaft)
    }

    /// Shafts engaged at `position`, indexed by motor.
    pub fn engaged_shafts(&self, position: usize) -> Vec<usize> {
        (0..self.motor_offsets.len()).map(|m| self.shaft_for(m, position)).collect()
    }

    /// Angular spacing between adjacent spindle positions, degrees.
    pub fn spacing_deg(&self) -> f64 {
        360.0 / self.num_positions as f64
    }

    pub fn shaft_of(&self, joint: JointId) -> Option<usize> {
        self.joint_assignment.get(&joint).copied()
    }

    pub fn joint_on(&self, shaft: usize) -> Option<JointId> {
        self.joint_assignment
            .iter()
            .find_map(|(&j, &s)| (s == shaft).then_some(j))
    }
}

/// Drive-box speeds and sampling constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingModel {
    /// Spindle angular speed, deg/s.
    pub spindle_speed: f64,
    /// Plug lift plus coil energize time, s.
    pub settle_time: f64,
    /// Drive motor speed at the motor shaft, deg/s.
    pub motor_speed: f64,
    pub encoder_bits: u32,
    /// Telemetry sampling period, s.
    pub sample_period: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            spindle_speed: 180.0,
            settle_time: 0.05,
            motor_speed: 2000.0,
            encoder_bits: 14,
            sample_period: 0.01,
        }
    }
}

/// Complete parameterization of the hand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandConfig {
    pub geometry: FingerGeometry<f64>,
    pub gears: GearTrain,
    pub shaft_map: ShaftMap,
    pub timing: TimingModel,
    /// Largest plug/slot misalignment at the motor, degrees.
    pub alignment_error_max_deg: f64,
    /// First-order self-reset rate of the magnetic joints, 1/s.
    pub magnet_reset_rate: f64,
}

impl Default for HandConfig {
    fn default() -> Self {
        Self {
            geometry: FingerGeometry::default(),
            gears: GearTrain::default(),
            shaft_map: ShaftMap::default(),
            timing: TimingModel::default(),
            alignment_error_max_deg: 10.0,
            magnet_reset_rate: 2.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigLoadError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
}

impl HandConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigLoadError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigLoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigLoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reduction ratio of the configured gear train.
    pub fn k(&self) -> f64 {
        reduction_ratio(&self.gears)
    }

    /// Wheel-side bound on the alignment error, degrees.
    pub fn wheel_alignment_error_max(&self) -> f64 {
        self.alignment_error_max_deg / self.k()
    }
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.path, self.message)
    }
}

/// Every invariant a configuration failed.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<Violation>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation { path: path.into(), message: message.into() });
    }

    /// `value > 0`; NaN fails.
    fn positive(&mut self, path: &str, value: f64) {
        if !(value > 0.0) {
            self.push(path, "must be positive");
        }
    }

    fn positive_finite(&mut self, path: &str, value: f64) {
        if !(value > 0.0) {
            self.push(path, "must be positive");
        } else if !value.is_finite() {
            self.push(path, "must be finite");
        }
    }
}

/// Returns `config` unchanged if every invariant holds, otherwise the full
/// list of violations.
pub fn validate_config(config: HandConfig) -> Result<HandConfig, ConfigErrors> {
    let mut r = Report::default();

    let g = &config.geometry;
    for (name, v) in [
        ("r1", g.r1),
        ("r2", g.r2),
        ("r_pitch", g.r_pitch),
        ("r_roll", g.r_roll),
        ("r3", g.r3),
        ("roll_limit_deg", g.roll_limit_deg),
    ] {
        r.positive_finite(&format!("geometry.{name}"), v);
    }
    for (i, &len) in g.link_lengths.iter().enumerate() {
        r.positive_finite(&format!("geometry.link_lengths[{i}]"), len);
    }

    let gears = &config.gears;
    let mut gears_ok = true;
    for (name, z) in [("z1", gears.z1), ("z2", gears.z2), ("z3", gears.z3), ("z4", gears.z4)] {
        if z == 0 {
            r.push(format!("gears.{name}"), "must be positive");
            gears_ok = false;
        }
    }
    if gears_ok && reduction_ratio(gears) <= 1.0 {
        r.push("gears", format!("reduction ratio {} must exceed 1", reduction_ratio(gears)));
        gears_ok = false;
    }

    validate_shaft_map(&config.shaft_map, &mut r);

    let t = &config.timing;
    r.positive_finite("timing.spindle_speed", t.spindle_speed);
    r.positive_finite("timing.settle_time", t.settle_time);
    r.positive_finite("timing.motor_speed", t.motor_speed);
    r.positive_finite("timing.sample_period", t.sample_period);
    if !(1..=24).contains(&t.encoder_bits) {
        r.push("timing.encoder_bits", "must be between 1 and 24");
    }

    if !(config.alignment_error_max_deg >= 0.0 && config.alignment_error_max_deg.is_finite()) {
        r.push("alignment_error_max_deg", "must be non-negative and finite");
    } else if gears_ok {
        let wheel = config.wheel_alignment_error_max();
        if wheel > MAX_WHEEL_ALIGNMENT_ERROR_DEG {
            r.push(
                "alignment_error_max_deg",
                format!(
                    "implies a wheel-side error of {wheel:.4} deg, above the {MAX_WHEEL_ALIGNMENT_ERROR_DEG} deg limit"
                ),
            );
        }
    }
    r.positive("magnet_reset_rate", config.magnet_reset_rate);

    if r.0.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(r.0))
    }
}

fn validate_shaft_map(map: &ShaftMap, r: &mut Report) {
    if map.num_shafts != NUM_SHAFTS {
        r.push("shaft_map.num_shafts", format!("must be {NUM_SHAFTS}"));
        return;
    }
    if map.num_positions == 0 {
        r.push("shaft_map.num_positions", "must be positive");
        return;
    }
    if map.motor_offsets.len() != NUM_MOTORS {
        r.push("shaft_map.motor_offsets", format!("must list exactly {NUM_MOTORS} offsets"));
        return;
    }
    let residues: BTreeSet<usize> = map.motor_offsets.iter().map(|o| o % map.num_shafts).collect();
    if residues.len() != NUM_MOTORS {
        r.push("shaft_map.motor_offsets", "offsets not distinct");
        return;
    }
    for p in 0..map.num_positions {
        let set: BTreeSet<usize> = map.engaged_shafts(p).into_iter().collect();
        if set.len() != NUM_MOTORS {
            r.push("shaft_map", format!("engaged shafts overlap at position {p}"));
        }
    }
    let reachable: BTreeSet<usize> = (0..map.num_positions).flat_map(|p| map.engaged_shafts(p)).collect();
    for s in 0..map.num_shafts {
        if !reachable.contains(&s) {
            r.push("shaft_map", format!("shaft {s} is not reachable from any position"));
        }
    }

    let ja = &map.joint_assignment;
    for (joint, &shaft) in ja {
        if joint.finger >= NUM_FINGERS {
            r.push(format!("shaft_map.joint_assignment.{joint}"), "finger index out of range");
        }
        if shaft >= map.num_shafts {
            r.push(format!("shaft_map.joint_assignment.{joint}"), "shaft index out of range");
        }
    }
    for joint in JointId::all() {
        if !ja.contains_key(&joint) {
            r.push("shaft_map.joint_assignment", format!("missing joint {joint}"));
        }
    }
    let shafts: BTreeSet<usize> = ja.values().copied().collect();
    if shafts.len() != ja.len() {
        r.push("shaft_map.joint_assignment", "is not a bijection (shaft used twice)");
    }
}

/// A wheel angle that leaves its finger's kinematic range.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("finger {finger} {source}")]
pub struct PoseError {
    pub finger: usize,
    #[source]
    pub source: KinematicError,
}

/// One motor currently coupled to a shaft.
#[derive(Clone, Debug, PartialEq)]
pub struct Engagement {
    pub motor: usize,
    pub shaft: usize,
    /// Wheel-side misalignment still to be taken up by the first run.
    pub pending_offset_deg: Option<f64>,
}

/// Full simulation state of the hand.
#[derive(Clone, Debug, PartialEq)]
pub struct HandState {
    pub clock: f64,
    pub spindle_position: usize,
    /// Sorted by motor.
    pub engaged: Vec<Engagement>,
    /// Winding-wheel angle per shaft, degrees.
    pub wheel_angles: [f64; NUM_SHAFTS],
    pub joint_angles: [FingerPose<f64>; NUM_FINGERS],
    /// Disturbance offset per finger and [`FingerJoint`], degrees.
    pub disturbance: [[f64; 4]; NUM_FINGERS],
}

impl HandState {
    /// Straight fingers, spindle at position 0, nothing engaged.
    pub fn new() -> Self {
        Self {
            clock: 0.0,
            spindle_position: 0,
            engaged: Vec::new(),
            wheel_angles: [0.0; NUM_SHAFTS],
            joint_angles: [FingerPose::default(); NUM_FINGERS],
            disturbance: [[0.0; 4]; NUM_FINGERS],
        }
    }

    pub fn engagement(&self, motor: usize) -> Option<&Engagement> {
        self.engaged.iter().find(|e| e.motor == motor)
    }

    pub fn is_engaged(&self, motor: usize) -> bool {
        self.engagement(motor).is_some()
    }

    /// Wheel angles of one finger's three cables.
    pub fn finger_wheels(&self, map: &ShaftMap, finger: usize) -> FingerWheels<f64> {
        let w = |j| map.shaft_of(JointId::new(finger, j)).map_or(0.0, |s| self.wheel_angles[s]);
        FingerWheels {
            pip: w(DrivenJoint::Pip),
            pitch: w(DrivenJoint::Pitch),
            roll: w(DrivenJoint::Roll),
        }
    }

    /// Joint angles implied by the wheel angles, without disturbance.
    ///
    /// A pull-only cable unwound past zero is slack and leaves its joint at
    /// rest, so negative PIP and pitch wheel angles map to a straight joint.
    pub fn kinematic_pose(
        &self,
        config: &HandConfig,
        finger: usize,
    ) -> Result<FingerPose<f64>, KinematicError> {
        let mut wheels = self.finger_wheels(&config.shaft_map, finger);
        wheels.pip = wheels.pip.max(0.0);
        wheels.pitch = wheels.pitch.max(0.0);
        kinematics::forward_finger(wheels, &config.geometry)
    }

    /// Recomputes `joint_angles` from the wheel angles plus disturbance.
    pub fn refresh_joints(&mut self, config: &HandConfig) -> Result<(), PoseError> {
        let mut poses = self.joint_angles;
        for (finger, pose) in poses.iter_mut().enumerate() {
            let mut p = self
                .kinematic_pose(config, finger)
                .map_err(|source| PoseError { finger, source })?;
            let d = &self.disturbance[finger];
            p.theta1 += d[FingerJoint::Dip.index()];
            p.theta2 += d[FingerJoint::Pip.index()];
            p.theta3 += d[FingerJoint::Pitch.index()];
            p.phi3 += d[FingerJoint::Roll.index()];
            *pose = p;
        }
        self.joint_angles = poses;
        Ok(())
    }
}

impl Default for HandState {
    fn default() -> Self {
        Self::new()
    }
}
