//! Sampled simulation state and its CSV form.

use std::io::Write;

use serde::Serialize;

use crate::hand_model::{NUM_FINGERS, NUM_SHAFTS};

/// One sample of the simulated hand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TelemetryRecord {
    pub t: f64,
    pub spindle_position: usize,
    /// (motor, shaft), sorted by motor.
    pub engaged: Vec<(usize, usize)>,
    pub wheel_angles: [f64; NUM_SHAFTS],
    /// Per finger: theta1 (DIP), theta2 (PIP), theta3 (MCP pitch), phi3 (MCP roll).
    pub joint_angles: [[f64; 4]; NUM_FINGERS],
    pub encoder_codes: [u32; NUM_SHAFTS],
}

pub fn csv_header() -> Vec<String> {
    let mut h = vec!["t_s".to_string(), "spindle_pos".into(), "engaged".into()];
    h.extend((0..NUM_SHAFTS).map(|i| format!("wheel_{i}")));
    for f in 0..NUM_FINGERS {
        for name in ["th1", "th2", "th3", "phi3"] {
            h.push(format!("f{f}_{name}"));
        }
    }
    h.extend((0..NUM_SHAFTS).map(|i| format!("enc_{i}")));
    h
}

fn num(v: f64) -> String {
    // avoid "-0.000000"
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

impl TelemetryRecord {
    pub fn csv_row(&self) -> Vec<String> {
        let engaged = self
            .engaged
            .iter()
            .map(|(m, s)| format!("{m}:{s}"))
            .collect::<Vec<_>>()
            .join(";");
        let mut row = vec![num(self.t), self.spindle_position.to_string(), engaged];
        row.extend(self.wheel_angles.iter().map(|&w| num(w)));
        row.extend(self.joint_angles.iter().flatten().map(|&a| num(a)));
        row.extend(self.encoder_codes.iter().map(u32::to_string));
        row
    }
}

pub fn write_csv<W: Write>(records: &[TelemetryRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
