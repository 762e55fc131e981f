//! Shift-add CORDIC in vectoring mode: magnitude of an I/Q pair and the
//! four-quadrant arctangent used by the phase stage.
//!
//! Angles are binary: an `i32` where `2^31` corresponds to π, so the full
//! circle wraps with ordinary two's-complement overflow.

use std::f64::consts::PI;

/// `round(atan(2^-i) / π · 2^31)`.
const ATAN_TABLE: [i64; 32] = [
    536870912, 316933406, 167458907, 85004756, //
    42667331, 21354465, 10679838, 5340245, //
    2670163, 1335087, 667544, 333772, //
    166886, 83443, 41722, 20861, //
    10430, 5215, 2608, 1304, //
    652, 326, 163, 81, //
    41, 20, 10, 5, //
    3, 1, 1, 0,
];

const HALF_TURN: i64 = 1 << 31;

/// Bit width of the arctangent inputs after block scaling. The larger input
/// is left-aligned so its MSB sits at bit `ATAN_INPUT_BITS - 2`.
pub const ATAN_INPUT_BITS: u32 = 30;

const ATAN_ITERATIONS: usize = 30;

/// Converts a binary angle to radians in (−π, π].
pub fn angle_to_rad(angle: i32) -> f64 {
    if angle == i32::MIN {
        PI
    } else {
        angle as f64 * (PI / HALF_TURN as f64)
    }
}

/// Four-quadrant arctangent of `y / x` as a binary angle.
///
/// Inputs must be below `2^(ATAN_INPUT_BITS - 1)` in magnitude; callers
/// block-scale first. `(0, 0)` maps to 0.
pub fn atan2(y: i64, x: i64) -> i32 {
    debug_assert!(x.unsigned_abs() < 1 << (ATAN_INPUT_BITS - 1));
    debug_assert!(y.unsigned_abs() < 1 << (ATAN_INPUT_BITS - 1));
    let (mut x, mut y) = (x, y);
    let mut z = 0i64;
    // Pre-rotate by π into the right half plane where the iteration converges.
    if x < 0 {
        x = -x;
        y = -y;
        z = HALF_TURN;
    }
    for (i, &a) in ATAN_TABLE.iter().enumerate().take(ATAN_ITERATIONS) {
        let (dx, dy) = (y >> i, x >> i);
        if y > 0 {
            x += dx;
            y -= dy;
            z += a;
        } else if y < 0 {
            x -= dx;
            y += dy;
            z -= a;
        } else {
            break;
        }
    }
    z as i32
}

/// CORDIC gain after `iterations` micro-rotations.
fn cordic_gain(iterations: u32) -> f64 {
    (0..iterations)
        .map(|i| (1.0 + 4f64.powi(-(i as i32))).sqrt())
        .product()
}

/// Vectoring-mode magnitude with gain compensation.
#[derive(Debug, Clone, Copy)]
pub struct MagnitudeCordic {
    iterations: u32,
    /// 1/gain in Q30.
    inv_gain_q30: i64,
}

const MAG_GUARD_BITS: u32 = 14;

impl MagnitudeCordic {
    pub fn new(iterations: u32) -> Self {
        let iterations = iterations.clamp(1, 31);
        Self {
            iterations,
            inv_gain_q30: ((1u64 << 30) as f64 / cordic_gain(iterations)).round() as i64,
        }
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    /// `sqrt(i² + q²)`, rounded to the nearest code.
    pub fn eval(&self, i: i16, q: i16) -> u16 {
        let mut x = (i as i64).abs() << MAG_GUARD_BITS;
        let mut y = (q as i64) << MAG_GUARD_BITS;
        for k in 0..self.iterations {
            let (dx, dy) = (y >> k, x >> k);
            // Every micro-rotation must run: the gain correction assumes all of them.
            if y >= 0 {
                x += dx;
                y -= dy;
            } else {
                x -= dx;
                y += dy;
            }
        }
        let scaled = (x * self.inv_gain_q30 + (1 << 29)) >> 30;
        let out = (scaled + (1 << (MAG_GUARD_BITS - 1))) >> MAG_GUARD_BITS;
        out.clamp(0, u16::MAX as i64) as u16
    }
}

/// Magnitude with the default 16 micro-rotations.
pub fn magnitude(i: i16, q: i16) -> u16 {
    MagnitudeCordic::new(16).eval(i, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn atan_table_matches_float() {
        for (i, &a) in ATAN_TABLE.iter().enumerate() {
            let want = (2f64.powi(-(i as i32))).atan() / PI * HALF_TURN as f64;
            assert!((a as f64 - want).abs() <= 0.5, "i={i}");
        }
    }

    #[test]
    fn magnitude_basics() {
        assert_eq!(magnitude(0, 0), 0);
        assert!((magnitude(3, 4) as i32 - 5).abs() <= 1);
        assert!((magnitude(-3, -4) as i32 - 5).abs() <= 1);
        assert_eq!(magnitude(i16::MIN, i16::MIN), 46341);
    }

    #[test]
    fn magnitude_sweep_against_hypot() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = MagnitudeCordic::new(16);
        for _ in 0..1024 {
            let (i, q): (i16, i16) = (rng.random(), rng.random());
            let want = (i as f64).hypot(q as f64);
            let got = m.eval(i, q) as f64;
            assert!((got - want).abs() <= 4.0, "({i},{q}) {got} vs {want}");
            if want > 0.0 {
                assert!((got - want).abs() / want <= 2f64.powi(-15) + 0.5 / want);
            }
        }
    }

    #[test]
    fn atan2_axes_and_diagonals() {
        let k = 1 << 27;
        assert_eq!(atan2(0, k), 0);
        assert_eq!(angle_to_rad(atan2(0, -k)), PI);
        for (y, x, want) in [
            (k, k, PI / 4.0),
            (k, 0, PI / 2.0),
            (-k, 0, -PI / 2.0),
            (k, -k, 3.0 * PI / 4.0),
            (-k, -k, -3.0 * PI / 4.0),
        ] {
            let got = angle_to_rad(atan2(y, x));
            assert!((got - want).abs() < 1e-7, "({y},{x}) {got}");
        }
    }

    #[test]
    fn atan2_matches_float_sweep() {
        for k in 0..720 {
            let t = (k as f64 + 0.37) * PI / 360.0 - PI;
            let r = (1u64 << 28) as f64 * 1.7;
            let (y, x) = ((r * t.sin()) as i64, (r * t.cos()) as i64);
            let got = angle_to_rad(atan2(y, x));
            let want = (y as f64).atan2(x as f64);
            assert!((got - want).abs() < 1e-7, "t={t} {got} vs {want}");
        }
    }
}
