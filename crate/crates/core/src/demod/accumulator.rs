use super::cordic::{self, ATAN_INPUT_BITS};

/// Per-channel correlation state for one flux-ramp period.
///
/// The pre-adder subtracts `dc_estimate` (the mean of the previous ramp's
/// correlated span) before the sine/cosine products are accumulated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RampAccumulator {
    pub acc_sin: i64,
    pub acc_cos: i64,
    pub dc_estimate: i32,
    pub sample_sum: i64,
    pub sample_count: u32,
    /// `2^(width-1)`; any accumulator magnitude at or above this is an overflow.
    limit: i64,
}

/// Result of closing a ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RampPhase {
    /// Binary angle, `2^31` = π.
    pub angle: i32,
    /// Bit index of the larger accumulator's MSB; −1 when both were zero.
    pub magnitude_class: i32,
}

impl RampPhase {
    pub fn radians(&self) -> f64 {
        cordic::angle_to_rad(self.angle)
    }
}

impl RampAccumulator {
    pub fn new(accumulator_width_bits: u32) -> Self {
        assert!((2..=63).contains(&accumulator_width_bits));
        Self {
            acc_sin: 0,
            acc_cos: 0,
            dc_estimate: 0,
            sample_sum: 0,
            sample_count: 0,
            limit: 1i64 << (accumulator_width_bits - 1),
        }
    }

    /// Adds one sample: `acc += ((sample - dc) · weight >> frac_bits) · ref`.
    ///
    /// Panics on accumulator overflow; configuration validation rules it out,
    /// so reaching it is a bug.
    pub fn accumulate_sample(
        &mut self,
        sample: i32,
        sine: i32,
        cosine: i32,
        weight: i64,
        frac_bits: u32,
    ) {
        let diff = (sample - self.dc_estimate) as i64;
        let windowed = (diff * weight) >> frac_bits;
        self.acc_sin += windowed * sine as i64;
        self.acc_cos += windowed * cosine as i64;
        assert!(
            self.acc_sin.abs() < self.limit && self.acc_cos.abs() < self.limit,
            "correlation accumulator overflow"
        );
        self.sample_sum += sample as i64;
        self.sample_count += 1;
    }

    /// Block-scales both accumulators, takes the arctangent of cos over sin,
    /// then clears the correlation and rotates the DC estimate.
    pub fn finalize_ramp(&mut self) -> RampPhase {
        let phase = block_scaled_phase(self.acc_sin, self.acc_cos);
        if self.sample_count > 0 {
            let n = self.sample_count as i64;
            // Mean rounded half up.
            self.dc_estimate = (2 * self.sample_sum + n).div_euclid(2 * n) as i32;
        }
        self.discard_partial();
        phase
    }

    /// Drops the in-progress ramp, keeping the current DC estimate.
    pub fn discard_partial(&mut self) {
        self.acc_sin = 0;
        self.acc_cos = 0;
        self.sample_sum = 0;
        self.sample_count = 0;
    }
}

/// Phase of `(acc_sin, acc_cos)` after aligning the larger magnitude's MSB to
/// the arctangent input width. Both values receive the same shift, so the
/// result is invariant under a common power-of-two scale.
pub fn block_scaled_phase(acc_sin: i64, acc_cos: i64) -> RampPhase {
    let peak = acc_sin.unsigned_abs().max(acc_cos.unsigned_abs());
    if peak == 0 {
        return RampPhase {
            angle: 0,
            magnitude_class: -1,
        };
    }
    let msb = 63 - peak.leading_zeros() as i32;
    let shift = msb - (ATAN_INPUT_BITS as i32 - 2);
    let align = |v: i64| {
        if shift >= 0 {
            v >> shift
        } else {
            v << -shift
        }
    };
    RampPhase {
        angle: cordic::atan2(align(acc_cos), align(acc_sin)),
        magnitude_class: msb,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demod::nco::{NcoState, SineTable};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn sample_at_dc_estimate_leaves_accumulators() {
        let mut a = RampAccumulator::new(48);
        a.dc_estimate = 123;
        a.accumulate_sample(123, 30000, -20000, 1 << 16, 16);
        assert_eq!((a.acc_sin, a.acc_cos), (0, 0));
        assert_eq!(a.sample_count, 1);
    }

    #[test]
    fn zero_ramp_is_degenerate() {
        let mut a = RampAccumulator::new(48);
        for _ in 0..100 {
            a.accumulate_sample(0, 32767, 0, 1 << 16, 16);
        }
        assert_eq!((a.acc_sin, a.acc_cos), (0, 0));
        let p = a.finalize_ramp();
        assert_eq!(p.angle, 0);
        assert_eq!(p.magnitude_class, -1);
    }

    #[test]
    fn axis_and_diagonal() {
        let k = 1_234_567_891;
        assert_eq!(block_scaled_phase(k, 0).radians(), 0.0);
        assert!((block_scaled_phase(k, k).radians() - PI / 4.0).abs() < 1e-8);
        assert!((block_scaled_phase(7, 7).radians() - PI / 4.0).abs() < 1e-8);
    }

    #[test]
    fn block_scaling_shift_sweep() {
        let cases = [
            (123_456_789_012i64, -98_765_432_109i64),
            (-3, 5),
            (1 << 40, 1),
            (-987_654, -1_234_567),
        ];
        for (s, c) in cases {
            let base = block_scaled_phase(s, c);
            let want = (c as f64).atan2(s as f64);
            assert!((base.radians() - want).abs() < 1e-7, "({s},{c})");
            for k in 0..=8 {
                let scaled = block_scaled_phase(s << k, c << k);
                assert_eq!(scaled.angle, base.angle, "k={k}");
                assert_eq!(scaled.magnitude_class, base.magnitude_class + k);
            }
        }
    }

    #[test]
    fn full_ramp_correlation_gain() {
        // 400 samples, 16 periods, A = 0.4 full scale.
        let table = SineTable::new(16);
        let (n, periods, amp) = (400usize, 16.0, 0.4 * 32767.0);
        for phi in [0.3, -2.0, 2.9] {
            let mut nco = NcoState::for_frequency(periods, n as f64, 32);
            let mut a = RampAccumulator::new(48);
            for k in 0..n {
                let x = (amp * (TAU * periods * k as f64 / n as f64 + phi).sin()).round() as i32;
                let (s, c) = nco.step(&table);
                a.accumulate_sample(x, s, c, 1 << 16, 16);
            }
            let gain = n as f64 * amp / 2.0 * 32767.0;
            let (want_s, want_c) = (gain * phi.cos(), gain * phi.sin());
            assert!(
                (a.acc_sin as f64 - want_s).abs() < 1e-3 * gain,
                "{} vs {want_s}",
                a.acc_sin
            );
            assert!((a.acc_cos as f64 - want_c).abs() < 1e-3 * gain);
            assert!((a.finalize_ramp().radians() - phi).abs() < 1e-4);
        }
    }

    #[test]
    fn dc_estimate_rotates_on_finalize() {
        let mut a = RampAccumulator::new(48);
        for x in [10, 11, 12, 14] {
            a.accumulate_sample(x, 0, 0, 1 << 16, 16);
        }
        a.finalize_ramp();
        assert_eq!(a.dc_estimate, 12); // 11.75 rounds to 12
        for x in [-10, -11] {
            a.accumulate_sample(x, 0, 0, 1 << 16, 16);
        }
        a.finalize_ramp();
        assert_eq!(a.dc_estimate, -10); // -10.5 rounds half up
        assert_eq!(a.sample_count, 0);
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn overflow_is_a_hard_fault() {
        let mut a = RampAccumulator::new(24);
        for _ in 0..1000 {
            a.accumulate_sample(32767, 32767, 32767, 1 << 16, 16);
        }
    }
}
