//! Absolute magnetic encoder on each worm-wheel shaft.
//!
//! Code 0 is the straight-finger wheel angle. Angles wrap every turn.

use crate::scalar::Scalar;

/// Resolution of the drive box encoders.
pub const DEFAULT_ENCODER_BITS: u32 = 14;

/// Wraps an angle into `[0, 360)`.
pub fn wrap_deg<T: Scalar>(angle: T) -> T {
    let full = T::lit(360.0);
    let mut w = angle % full;
    if w < T::zero() {
        w = w + full;
    }
    // -tiny % 360 + 360 rounds to exactly 360
    if w >= full {
        w = T::zero();
    }
    w
}

/// Signed difference `a - b` folded into `(-180, 180]`.
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = wrap_deg(a - b);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Encoder {
    bits: u32,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new(DEFAULT_ENCODER_BITS)
    }
}

impl Encoder {
    pub fn new(bits: u32) -> Self {
        assert!((1..=24).contains(&bits), "encoder resolution must be 1..=24 bits");
        Self { bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Codes per turn.
    pub fn counts(&self) -> u32 {
        1 << self.bits
    }

    /// Angle of one code step, degrees.
    pub fn lsb_deg(&self) -> f64 {
        360.0 / f64::from(self.counts())
    }

    /// `round(wrap(angle) / 360 * counts) mod counts`.
    pub fn read<T: Scalar>(&self, angle_deg: T) -> u32 {
        let counts = self.counts();
        let scaled = wrap_deg(angle_deg) / T::lit(360.0) * T::from_u32(counts).unwrap();
        let code = scaled.round().to_u32().unwrap_or(0);
        code % counts
    }

    /// Angle represented by a code, degrees in `[0, 360)`.
    pub fn dequantize(&self, code: u32) -> f64 {
        f64::from(code % self.counts()) * self.lsb_deg()
    }
}

/// 14-bit read of a wheel angle.
pub fn encoder_read(angle_deg: f64) -> u32 {
    Encoder::default().read(angle_deg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(encoder_read(0.0), 0);
        assert_eq!(encoder_read(180.0), 8192);
        assert_eq!(encoder_read(360.0), 0);
        assert_eq!(encoder_read(-90.0), 12288);
        assert_eq!(encoder_read(720.0 + 90.0), 4096);
        // rounds up past the last code back to zero
        assert_eq!(encoder_read(359.999), 0);
    }

    #[test]
    fn wrap_handles_tiny_negatives() {
        assert_eq!(wrap_deg(-1e-300f64), 0.0);
        assert_eq!(wrap_deg(-360.0f64), 0.0);
        assert_eq!(wrap_deg(370.0f64), 10.0);
    }

    #[test]
    fn diff_is_signed_and_short() {
        assert_eq!(angle_diff_deg(10.0, 350.0), 20.0);
        assert_eq!(angle_diff_deg(350.0, 10.0), -20.0);
        assert_eq!(angle_diff_deg(-0.5, 0.0), -0.5);
    }

    #[test]
    fn other_resolutions() {
        let e = Encoder::new(12);
        assert_eq!(e.counts(), 4096);
        assert_eq!(e.read(90.0f32), 1024);
        assert_eq!(e.dequantize(1024), 90.0);
    }
}
