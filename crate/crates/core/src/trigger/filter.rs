/// Two recursive moving-average windows of `length` samples on one delay
/// line, separated by `gap` samples. The output is the recent window's sum
/// minus the older window's sum, an edge-sensitive trapezoidal response.
#[derive(Debug, Clone)]
pub struct MawFilter {
    length: usize,
    gap: usize,
    /// Last `2·length + gap` inputs; `ring[head]` is the oldest.
    ring: Vec<i64>,
    head: usize,
    sum_recent: i64,
    sum_older: i64,
}

impl MawFilter {
    pub fn new(length: usize, gap: usize) -> Self {
        assert!(length >= 1);
        Self {
            length,
            gap,
            ring: vec![0; 2 * length + gap],
            head: 0,
            sum_recent: 0,
            sum_older: 0,
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Input `j` samples before the one about to be written (1-based).
    fn delayed(&self, j: usize) -> i64 {
        let s = self.ring.len();
        self.ring[(self.head + s - j) % s]
    }

    /// Feeds one sample and returns `sum(recent) − sum(older)`.
    pub fn update(&mut self, x: i64) -> i64 {
        let (l, g) = (self.length, self.gap);
        let leaving_recent = self.delayed(l);
        let entering_older = self.delayed(l + g);
        let leaving_older = self.ring[self.head];
        self.sum_recent += x - leaving_recent;
        self.sum_older += entering_older - leaving_older;
        self.ring[self.head] = x;
        self.head = (self.head + 1) % self.ring.len();
        self.sum_recent - self.sum_older
    }

    /// Filter output in input units: the sum difference over the window length.
    pub fn output(&self, diff: i64) -> f64 {
        diff as f64 / self.length as f64
    }

    pub fn sums(&self) -> (i64, i64) {
        (self.sum_recent, self.sum_older)
    }
}

/// Local-maximum test on three consecutive filter outputs. Fires for the
/// middle one when its magnitude reaches `threshold`, strictly exceeds the
/// one before and is not exceeded by the one after, so a plateau fires on
/// its first sample.
pub fn three_point_decision(prev2: f64, prev1: f64, current: f64, threshold: f64) -> bool {
    let (a, b, c) = (prev2.abs(), prev1.abs(), current.abs());
    b >= threshold && a < b && b >= c
}
