//! Multi-channel direct-digital-synthesis oscillator.
//!
//! One read-only sine table is shared by every channel; each channel owns a
//! phase accumulator and increment. The table is addressed by the top
//! `table_bits` of the accumulator, and the cosine is read a quarter turn ahead.

use std::f64::consts::TAU;

#[derive(Debug, Clone)]
pub struct SineTable {
    bits: u32,
    full_scale: i32,
    values: Vec<i32>,
}

impl SineTable {
    /// Table with `2^bits` entries and a signed amplitude of `bits` bits.
    pub fn new(bits: u32) -> Self {
        assert!((2..=24).contains(&bits), "table width {bits} out of range");
        let size = 1usize << bits;
        let full_scale = (1i32 << (bits - 1)) - 1;
        let values = (0..size)
            .map(|k| (full_scale as f64 * (TAU * k as f64 / size as f64).sin()).round() as i32)
            .collect();
        Self {
            bits,
            full_scale,
            values,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn full_scale(&self) -> i32 {
        self.full_scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(sin, cos)` at a table address.
    pub fn lookup(&self, address: usize) -> (i32, i32) {
        let mask = self.values.len() - 1;
        let quarter = self.values.len() / 4;
        (
            self.values[address & mask],
            self.values[(address + quarter) & mask],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NcoState {
    pub phase: u64,
    pub increment: u64,
    phase_bits: u32,
}

impl NcoState {
    pub fn new(increment: u64, phase_bits: u32) -> Self {
        assert!((1..=62).contains(&phase_bits));
        Self {
            phase: 0,
            increment: increment & mask(phase_bits),
            phase_bits,
        }
    }

    /// Increment for a tone of `freq_hz` at `sample_rate_hz`,
    /// `round(f/f_s · 2^phase_bits) mod 2^phase_bits`.
    pub fn for_frequency(freq_hz: f64, sample_rate_hz: f64, phase_bits: u32) -> Self {
        let inc = (freq_hz / sample_rate_hz * (1u64 << phase_bits) as f64).round();
        Self::new(
            inc.rem_euclid((1u64 << phase_bits) as f64) as u64,
            phase_bits,
        )
    }

    pub fn phase_bits(&self) -> u32 {
        self.phase_bits
    }

    /// Sync reset.
    pub fn reset(&mut self) {
        self.phase = 0;
    }

    /// Emits `(sine, cosine)` for the current phase, then advances.
    pub fn step(&mut self, table: &SineTable) -> (i32, i32) {
        debug_assert!(self.phase_bits >= table.bits());
        let address = (self.phase >> (self.phase_bits - table.bits())) as usize;
        self.phase = (self.phase + self.increment) & mask(self.phase_bits);
        table.lookup(address)
    }
}

fn mask(bits: u32) -> u64 {
    (1u64 << bits) - 1
}
