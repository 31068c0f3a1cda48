//! Line-oriented motion scripts.
//!
//! ```text
//! # comment
//! pose <9 targets: f0 pip pitch roll, f1 ..., f2 ...>   (deg)
//! move <finger> <pip|pitch|roll> <deg>
//! wait <s>
//! disturb <finger> <dip|pip|pitch|roll> <deg> <duration_s>
//! ```
//!
//! Fingers are written `0`..`2` or `f0`..`f2`. A `disturb` holds the offset
//! for its duration, then releases it and the script continues.

use std::fmt;

use crate::hand_model::{DrivenJoint, FingerJoint, NUM_FINGERS, NUM_SHAFTS};

#[derive(Clone, Debug, PartialEq)]
pub enum ScriptCommand {
    Pose([f64; NUM_SHAFTS]),
    Move { finger: usize, joint: DrivenJoint, deg: f64 },
    Wait(f64),
    Disturb { finger: usize, joint: FingerJoint, deg: f64, duration: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScriptLine {
    /// 1-based.
    pub line: usize,
    pub command: ScriptCommand,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Script {
    pub lines: Vec<ScriptLine>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn number(tok: &str, what: &str) -> Result<f64, String> {
    let v: f64 = tok.parse().map_err(|_| format!("{what} `{tok}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what} must be finite"))
    }
}

fn finger(tok: &str) -> Result<usize, String> {
    let digits = tok.strip_prefix('f').unwrap_or(tok);
    match digits.parse::<usize>() {
        Ok(f) if f < NUM_FINGERS => Ok(f),
        _ => Err(format!("finger `{tok}` must be 0-{}", NUM_FINGERS - 1)),
    }
}

fn arity(toks: &[&str], n: usize, usage: &str) -> Result<(), String> {
    if toks.len() == n + 1 {
        Ok(())
    } else {
        Err(format!("expected `{usage}`"))
    }
}

fn parse_line(toks: &[&str]) -> Result<ScriptCommand, String> {
    match toks[0] {
        "pose" => {
            arity(toks, NUM_SHAFTS, "pose <9 joint targets>")?;
            let mut targets = [0.0; NUM_SHAFTS];
            for (t, tok) in targets.iter_mut().zip(&toks[1..]) {
                *t = number(tok, "target")?;
            }
            Ok(ScriptCommand::Pose(targets))
        }
        "move" => {
            arity(toks, 3, "move <finger> <pip|pitch|roll> <deg>")?;
            Ok(ScriptCommand::Move {
                finger: finger(toks[1])?,
                joint: toks[2].parse()?,
                deg: number(toks[3], "target")?,
            })
        }
        "wait" => {
            arity(toks, 1, "wait <s>")?;
            let s = number(toks[1], "duration")?;
            if s < 0.0 {
                return Err("wait duration must be non-negative".into());
            }
            Ok(ScriptCommand::Wait(s))
        }
        "disturb" => {
            arity(toks, 4, "disturb <finger> <joint> <deg> <duration_s>")?;
            let duration = number(toks[4], "duration")?;
            if duration <= 0.0 {
                return Err("disturbance duration must be positive".into());
            }
            Ok(ScriptCommand::Disturb {
                finger: finger(toks[1])?,
                joint: toks[2].parse()?,
                deg: number(toks[3], "offset")?,
                duration,
            })
        }
        other => Err(format!("unknown command `{other}`")),
    }
}

pub fn parse_script(text: &str) -> Result<Script, ScriptError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let command = parse_line(&toks).map_err(|message| ScriptError { line: i + 1, message })?;
        lines.push(ScriptLine { line: i + 1, command });
    }
    Ok(Script { lines })
}
