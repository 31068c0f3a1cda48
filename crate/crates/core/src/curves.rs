//! Joint-versus-wheel curves and their straight-line fits.

use std::io::Write;

use serde::Serialize;

use crate::hand_model::FingerGeometry;
use crate::kinematics::{self, FingerWheels, KinematicError, LinearFit};

/// Rows per emitted curve, including the zero row.
pub const CURVE_ROWS: usize = 101;
/// Samples per linear fit.
pub const FIT_SAMPLES: usize = 100;
/// Upper end of the joint range each flexion fit covers, degrees.
pub const FIT_RANGE_DEG: f64 = 90.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveFits {
    pub theta1: LinearFit<f64>,
    pub theta2: LinearFit<f64>,
    pub theta3: LinearFit<f64>,
    pub phi3: LinearFit<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curves {
    /// `[phi1, theta1, theta2, theta3]`, degrees.
    pub flexion: Vec<[f64; 4]>,
    /// `[phi2, phi3]`, degrees.
    pub roll: Vec<[f64; 2]>,
    pub fits: CurveFits,
}

/// End of the prefix of `[0, hi]` on which `pred` holds: scans for the
/// first failing grid point, then bisects. `pred(0)` must hold.
fn last_true(hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    const GRID: usize = 2000;
    let Some(first_bad) = (1..=GRID).map(|i| hi * i as f64 / GRID as f64).find(|&x| !pred(x)) else {
        return hi;
    };
    let (mut lo, mut hi) = (first_bad - hi / GRID as f64, first_bad);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// DIP, PIP and MCP pitch angles with the PIP and pitch wheels both at `phi`.
fn flexion(phi: f64, g: &FingerGeometry<f64>) -> Result<[f64; 3], KinematicError> {
    let p = kinematics::forward_finger(FingerWheels { pip: phi, pitch: phi, roll: 0.0 }, g)?;
    Ok([p.theta1, p.theta2, p.theta3])
}

/// Largest wheel angle the PIP cable can take before the coupled DIP joint
/// leaves its range, degrees.
pub fn flexion_limit_deg(g: &FingerGeometry<f64>) -> f64 {
    let hi = kinematics::inverse_pip(180.0, g.r2, g.r3).unwrap_or(360.0);
    last_true(hi, |phi| {
        kinematics::forward_finger(FingerWheels { pip: phi, pitch: 0.0, roll: 0.0 }, g).is_ok()
    })
}

fn fit_over(hi: f64, f: impl Fn(f64) -> f64) -> Result<LinearFit<f64>, KinematicError> {
    let samples: Vec<(f64, f64)> = (0..FIT_SAMPLES)
        .map(|i| {
            let phi = hi * i as f64 / (FIT_SAMPLES - 1) as f64;
            (phi, f(phi))
        })
        .collect();
    kinematics::fit_linear_map(&samples)
}

/// Fits of each joint against its wheel angle, each over the wheel range
/// that takes that joint from 0 to 90 degrees (or to the end of its range).
pub fn curve_fits(g: &FingerGeometry<f64>) -> Result<CurveFits, KinematicError> {
    let limit = flexion_limit_deg(g);
    let idx_ok = |i: usize| move |phi: f64| flexion(phi, g).map(|t| t[i] <= FIT_RANGE_DEG).unwrap_or(false);
    let dip_hi = last_true(limit, idx_ok(0));
    let pip_hi = kinematics::inverse_pip(FIT_RANGE_DEG, g.r2, g.r3)?;
    let pitch_hi = kinematics::inverse_pitch(FIT_RANGE_DEG, g.r_pitch, g.r3)?;
    let roll_hi = kinematics::inverse_roll(g.roll_limit_deg, g.r3, g.r_roll);

    let pip = |phi: f64| {
        kinematics::cable_displacement(phi, g.r3)
            .and_then(|dx| kinematics::pip_angle(dx, g.r2))
            .unwrap_or(f64::NAN)
    };
    let pitch = |phi: f64| {
        kinematics::cable_displacement(phi, g.r3)
            .and_then(|dx| kinematics::mcp_pitch_angle(dx, g.r_pitch))
            .unwrap_or(f64::NAN)
    };
    Ok(CurveFits {
        theta1: fit_over(dip_hi, |phi| flexion(phi, g).map_or(f64::NAN, |t| t[0]))?,
        theta2: fit_over(pip_hi, pip)?,
        theta3: fit_over(pitch_hi, pitch)?,
        phi3: fit_over(roll_hi, |phi| kinematics::mcp_roll_angle(phi, g.r3, g.r_roll))?,
    })
}

pub fn compute_curves(g: &FingerGeometry<f64>) -> Result<Curves, KinematicError> {
    let limit = flexion_limit_deg(g);
    // the last row lands exactly on `hi`, which may sit at a domain edge
    let step = |hi: f64, i: usize| if i + 1 == CURVE_ROWS { hi } else { hi * i as f64 / (CURVE_ROWS - 1) as f64 };
    let flexion = (0..CURVE_ROWS)
        .map(|i| {
            let phi = step(limit, i);
            flexion(phi, g).map(|[t1, t2, t3]| [phi, t1, t2, t3])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let roll_hi = kinematics::inverse_roll(g.roll_limit_deg, g.r3, g.r_roll);
    let roll = (0..CURVE_ROWS)
        .map(|i| {
            let phi = step(roll_hi, i);
            [phi, kinematics::mcp_roll_angle(phi, g.r3, g.r_roll)]
        })
        .collect();
    Ok(Curves { flexion, roll, fits: curve_fits(g)? })
}

fn write_rows<W: Write, const N: usize>(header: [&str; N], rows: &[[f64; N]], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:.6}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_flexion_csv<W: Write>(curves: &Curves, out: W) -> csv::Result<()> {
    write_rows(["phi1_deg", "theta1_deg", "theta2_deg", "theta3_deg"], &curves.flexion, out)
}

pub fn write_roll_csv<W: Write>(curves: &Curves, out: W) -> csv::Result<()> {
    write_rows(["phi2_deg", "phi3_deg"], &curves.roll, out)
}

/// One line per fit: `name slope=.. intercept=.. r2=..`.
pub fn fit_summary(fits: &CurveFits) -> String {
    [("theta1", &fits.theta1), ("theta2", &fits.theta2), ("theta3", &fits.theta3), ("phi3", &fits.phi3)]
        .iter()
        .map(|(name, f)| format!("{name} slope={:.6} intercept={:.6} r2={:.6}\n", f.slope, f.intercept, f.r_squared))
        .collect()
}
