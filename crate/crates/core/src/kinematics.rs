//! Closed-form tendon kinematics of one finger.
//!
//! The PIP joint is a rolling joint pulled by a drive cable wound on a wheel
//! of radius `r3`. The DIP joint is not driven; a coupling cable makes it
//! follow the PIP joint. The MCP pitch joint uses the same rolling-joint
//! form as the PIP joint, and the MCP roll joint is an equal-arc-length map.
//!
//! Angles are degrees at every public boundary. Inputs outside a map's
//! domain are errors; nothing is clamped.

use serde::Serialize;

use crate::hand_model::{FingerGeometry, FingerJoint};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum KinematicError {
    #[error("{quantity} = {value} is outside [{min}, {max}]")]
    Domain {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("{joint} range: {source}")]
    Joint {
        joint: FingerJoint,
        #[source]
        source: Box<KinematicError>,
    },
    #[error("linear fit needs at least two samples with distinct inputs")]
    DegenerateFit,
}

impl KinematicError {
    fn domain<T: Scalar>(quantity: &'static str, value: T, min: T, max: T) -> Self {
        KinematicError::Domain {
            quantity,
            value: value.widen(),
            min: min.widen(),
            max: max.widen(),
        }
    }

    fn at(self, joint: FingerJoint) -> Self {
        KinematicError::Joint { joint, source: Box::new(self) }
    }

    /// The finger joint an error was raised for, if known.
    pub fn joint(&self) -> Option<FingerJoint> {
        match self {
            KinematicError::Joint { joint, .. } => Some(*joint),
            _ => None,
        }
    }
}

pub type Result<T, E = KinematicError> = std::result::Result<T, E>;

/// Cable length changes produced by one finger's three wheels, mm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CableDisplacement<T> {
    pub dx2: T,
    pub dx1: T,
    pub dx_pitch: T,
}

/// Pose of one finger, degrees.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FingerPose<T> {
    /// DIP
    pub theta1: T,
    /// PIP
    pub theta2: T,
    /// MCP pitch
    pub theta3: T,
    /// MCP roll
    pub phi3: T,
}

impl<T: Copy> FingerPose<T> {
    pub fn get(&self, joint: FingerJoint) -> T {
        match joint {
            FingerJoint::Dip => self.theta1,
            FingerJoint::Pip => self.theta2,
            FingerJoint::Pitch => self.theta3,
            FingerJoint::Roll => self.phi3,
        }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.theta1, self.theta2, self.theta3, self.phi3]
    }
}

/// Winding-wheel angles of one finger's three drive cables, degrees.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FingerWheels<T> {
    pub pip: T,
    pub pitch: T,
    pub roll: T,
}

/// Ordinary least-squares line `theta = slope * phi + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

fn check<T: Scalar>(quantity: &'static str, value: T, min: T, max: T) -> Result<T> {
    if value >= min && value <= max {
        Ok(value)
    } else {
        Err(KinematicError::domain(quantity, value, min, max))
    }
}

/// `2*asin(u)` for the rolling-joint form `u = x/r - (x/2r)^2`, x in [0, 2r].
fn rolling_joint_angle<T: Scalar>(quantity: &'static str, x: T, r: T) -> Result<T> {
    check(quantity, x, T::zero(), two::<T>() * r)?;
    let ratio = x / r;
    let half = ratio / two();
    // u <= 1 holds exactly; min() only absorbs rounding at x = 2r.
    let u = (ratio - half * half).min(T::one());
    Ok((two::<T>() * u.asin()).to_degrees())
}

/// Drive-cable shortening for a wheel rotation: `dx2 = phi * r3`.
pub fn cable_displacement<T: Scalar>(phi1_deg: T, r3: T) -> Result<T> {
    if !(phi1_deg >= T::zero()) {
        return Err(KinematicError::domain("phi1", phi1_deg, T::zero(), T::infinity()));
    }
    Ok(phi1_deg.to_radians() * r3)
}

/// Virtual-link length of the PIP joint, `sqrt(r2^2 + (2 r2 - dx2)^2)`.
pub fn pip_link_length<T: Scalar>(dx2: T, r2: T) -> Result<T> {
    check("dx2", dx2, T::zero(), two::<T>() * r2)?;
    let d = two::<T>() * r2 - dx2;
    Ok((r2 * r2 + d * d).sqrt())
}

/// Rotation of the proximal virtual link, `asin((5 r2^2 - l2^2) / (4 r2^2))`, degrees.
pub fn pip_half_angle<T: Scalar>(l2: T, r2: T) -> Result<T> {
    let r2sq = r2 * r2;
    let arg = (T::lit(5.0) * r2sq - l2 * l2) / (T::lit(4.0) * r2sq);
    check("(5r2^2 - l2^2)/(4r2^2)", arg, -T::one(), T::one())?;
    Ok(arg.asin().to_degrees())
}

/// PIP angle from drive-cable shortening, degrees.
pub fn pip_angle<T: Scalar>(dx2: T, r2: T) -> Result<T> {
    rolling_joint_angle("dx2", dx2, r2)
}

/// Coupling-cable length change, `2 l2 sin(alpha2)`.
pub fn coupling_displacement<T: Scalar>(l2: T, alpha2_deg: T) -> Result<T> {
    check("alpha2", alpha2_deg, T::zero(), T::lit(90.0))?;
    Ok(two::<T>() * l2 * alpha2_deg.to_radians().sin())
}

/// DIP angle from coupling-cable length change, degrees.
pub fn dip_angle<T: Scalar>(dx1: T, r1: T) -> Result<T> {
    rolling_joint_angle("dx1", dx1, r1)
}

/// MCP pitch angle; same rolling-joint form as the PIP joint.
pub fn mcp_pitch_angle<T: Scalar>(dx_pitch: T, r_pitch: T) -> Result<T> {
    rolling_joint_angle("dx_pitch", dx_pitch, r_pitch)
}

/// MCP roll angle by equal arc length, `phi3 = phi2 * r3 / r_roll`.
pub fn mcp_roll_angle<T: Scalar>(phi2_deg: T, r3: T, r_roll: T) -> T {
    phi2_deg * r3 / r_roll
}

/// Cable displacements and pose for one finger's wheel angles.
///
/// Each pose component depends only on its own wheel; the DIP joint is
/// derived from the PIP cable through the coupling cable.
pub fn forward_finger_detailed<T: Scalar>(
    wheels: FingerWheels<T>,
    geometry: &FingerGeometry<T>,
) -> Result<(CableDisplacement<T>, FingerPose<T>)> {
    let g = geometry;

    let dx2 = cable_displacement(wheels.pip, g.r3).map_err(|e| e.at(FingerJoint::Pip))?;
    let theta2 = pip_angle(dx2, g.r2).map_err(|e| e.at(FingerJoint::Pip))?;
    let l2 = pip_link_length(dx2, g.r2).map_err(|e| e.at(FingerJoint::Pip))?;
    // theta2 = 2*alpha2; taking alpha2 from theta2 keeps it exactly 0 at dx2 = 0
    let alpha2 = theta2 / two();
    let dx1 = coupling_displacement(l2, alpha2).map_err(|e| e.at(FingerJoint::Dip))?;
    let theta1 = dip_angle(dx1, g.r1).map_err(|e| e.at(FingerJoint::Dip))?;

    let dx_pitch = cable_displacement(wheels.pitch, g.r3).map_err(|e| e.at(FingerJoint::Pitch))?;
    let theta3 = mcp_pitch_angle(dx_pitch, g.r_pitch).map_err(|e| e.at(FingerJoint::Pitch))?;

    let phi3 = mcp_roll_angle(wheels.roll, g.r3, g.r_roll);
    check("phi3", phi3, -g.roll_limit_deg, g.roll_limit_deg).map_err(|e| e.at(FingerJoint::Roll))?;

    Ok((
        CableDisplacement { dx2, dx1, dx_pitch },
        FingerPose { theta1, theta2, theta3, phi3 },
    ))
}

pub fn forward_finger<T: Scalar>(wheels: FingerWheels<T>, geometry: &FingerGeometry<T>) -> Result<FingerPose<T>> {
    forward_finger_detailed(wheels, geometry).map(|(_, pose)| pose)
}

/// Inverse of the rolling-joint form: cable shortening for angle `theta`.
fn rolling_joint_displacement<T: Scalar>(quantity: &'static str, theta_deg: T, r: T) -> Result<T> {
    check(quantity, theta_deg, T::zero(), T::lit(180.0))?;
    let s = (theta_deg.to_radians() / two()).sin().min(T::one());
    Ok(two::<T>() * r * (T::one() - (T::one() - s).sqrt()))
}

/// Wheel angle that produces PIP angle `theta2`, degrees.
pub fn inverse_pip<T: Scalar>(theta2_deg: T, r2: T, r3: T) -> Result<T> {
    let dx2 = rolling_joint_displacement("theta2", theta2_deg, r2)?;
    Ok((dx2 / r3).to_degrees())
}

/// Wheel angle that produces MCP pitch angle `theta3`, degrees.
pub fn inverse_pitch<T: Scalar>(theta3_deg: T, r_pitch: T, r3: T) -> Result<T> {
    let dx = rolling_joint_displacement("theta3", theta3_deg, r_pitch)?;
    Ok((dx / r3).to_degrees())
}

/// Wheel angle that produces MCP roll angle `phi3`, degrees.
pub fn inverse_roll<T: Scalar>(phi3_deg: T, r3: T, r_roll: T) -> T {
    phi3_deg * r_roll / r3
}

/// Ordinary least squares over `(phi, theta)` samples.
///
/// A target with zero variance is fitted exactly by a flat line and gets
/// R² = 1.
pub fn fit_linear_map<T: Scalar>(samples: &[(T, T)]) -> Result<LinearFit<T>> {
    if samples.len() < 2 {
        return Err(KinematicError::DegenerateFit);
    }
    let n = T::from_usize(samples.len()).unwrap();
    let (sx, sy) = samples
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for &(x, y) in samples {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if !(sxx > T::zero()) {
        return Err(KinematicError::DegenerateFit);
    }

    let y0 = samples[0].1;
    if samples.iter().all(|&(_, y)| y == y0) {
        return Ok(LinearFit { slope: T::zero(), intercept: y0, r_squared: T::one() });
    }

    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (mut ss_res, mut ss_tot) = (T::zero(), T::zero());
    for &(x, y) in samples {
        let e = y - (intercept + slope * x);
        ss_res = ss_res + e * e;
        ss_tot = ss_tot + (y - my) * (y - my);
    }
    let r_squared = (T::one() - ss_res / ss_tot).max(T::zero()).min(T::one());
    Ok(LinearFit { slope, intercept, r_squared })
}

/// Fingertip position in the finger base frame, mm.
///
/// The straight finger lies along +z. Flexion rotates the planar
/// proximal-intermediate-distal chain toward +x, and the MCP roll angle
/// rotates that plane about z.
pub fn fingertip_position<T: Scalar>(pose: &FingerPose<T>, geometry: &FingerGeometry<T>) -> [T; 3] {
    let cumulative = [
        pose.theta3,
        pose.theta3 + pose.theta2,
        pose.theta3 + pose.theta2 + pose.theta1,
    ];
    let (mut x, mut z) = (T::zero(), T::zero());
    for (len, angle) in geometry.link_lengths.iter().zip(cumulative) {
        let a = angle.to_radians();
        x = x + *len * a.sin();
        z = z + *len * a.cos();
    }
    let roll = pose.phi3.to_radians();
    [x * roll.cos(), x * roll.sin(), z]
}
