//! Butterworth filters as cascaded biquads, run forward and backward for
//! zero phase and doubled slope.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 3], // a[0] == 1
}

impl Biquad {
    fn run(&self, x: &mut [f64]) {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + z1;
            z1 = self.b[1] * input - self.a[1] * y + z2;
            z2 = self.b[2] * input - self.a[2] * y;
            *v = y;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    LowPass,
    HighPass,
}

/// Digital Butterworth filter (bilinear transform with prewarping).
#[derive(Debug, Clone)]
pub struct Butterworth {
    sections: Vec<Biquad>,
}

impl Butterworth {
    pub fn new(kind: FilterKind, order: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Self {
        assert!(order >= 1);
        assert!(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0);
        let k = 2.0 * sample_rate_hz;
        let wc = k * (PI * cutoff_hz / sample_rate_hz).tan();
        let mut sections = Vec::with_capacity(order.div_ceil(2));

        for i in 0..order / 2 {
            // Analog pole pair on the circle of radius wc.
            let theta = PI * (2 * i + order + 1) as f64 / (2 * order) as f64;
            let re = wc * theta.cos();
            let mag2 = wc * wc;
            let a0 = k * k - 2.0 * re * k + mag2;
            let a1 = 2.0 * mag2 - 2.0 * k * k;
            let a2 = k * k + 2.0 * re * k + mag2;
            let b = match kind {
                FilterKind::LowPass => [mag2, 2.0 * mag2, mag2],
                FilterKind::HighPass => [k * k, -2.0 * k * k, k * k],
            };
            sections.push(Biquad {
                b: [b[0] / a0, b[1] / a0, b[2] / a0],
                a: [1.0, a1 / a0, a2 / a0],
            });
        }
        if order % 2 == 1 {
            let a0 = k + wc;
            let a1 = wc - k;
            let b = match kind {
                FilterKind::LowPass => [wc, wc, 0.0],
                FilterKind::HighPass => [k, -k, 0.0],
            };
            sections.push(Biquad {
                b: [b[0] / a0, b[1] / a0, 0.0],
                a: [1.0, a1 / a0, 0.0],
            });
        }
        Self { sections }
    }

    pub fn filter(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.run(x);
        }
    }

    /// Zero-phase filtering: forward pass, then a pass over the reversed signal.
    pub fn filtfilt(&self, x: &mut [f64]) {
        self.filter(x);
        x.reverse();
        self.filter(x);
        x.reverse();
    }
}

/// Butterworth order whose forward-backward response falls 60 dB between its
/// -10 dB and -70 dB points over `60 / slope` octaves.
///
/// For power gain `1 / (1 + r^(2n))^2` the two points sit at
/// `r^(2n) = 10^0.5 - 1` and `10^3.5 - 1`.
pub fn order_for_slope(slope_db_per_octave: f64) -> usize {
    let span = ((10f64.powf(3.5) - 1.0) / (10f64.powf(0.5) - 1.0)).log2();
    let per_order = 60.0 * 2.0 / span;
    (slope_db_per_octave / per_order).round().max(1.0) as usize
}
