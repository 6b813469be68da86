use rustfft::num_complex::Complex;

use super::FftPair;
use crate::error::{Error, Result};

/// Autocorrelation values for lags `1..=max_lag` (index 0 holds lag 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    pub values: Vec<f64>,
    /// Set when the input had no energy; `values` are then all zero.
    pub degenerate: bool,
}

impl Autocorrelation {
    pub fn at_lag(&self, lag: usize) -> f64 {
        self.values[lag - 1]
    }

    pub fn max_lag(&self) -> usize {
        self.values.len()
    }
}

fn cross_correlate(fft: &FftPair, a: &[f64], x: &[f64], max_lag: usize) -> Vec<f64> {
    let mut fa = fft.forward_real(a);
    let fx = fft.forward_real(x);
    for (p, q) in fa.iter_mut().zip(&fx) {
        *p = p.conj() * q;
    }
    fft.inverse(&mut fa);
    let scale = 1.0 / fft.len() as f64;
    fa[1..=max_lag].iter().map(|c: &Complex<f64>| c.re * scale).collect()
}

/// Energy-normalized autocorrelation with equal-length windows.
///
/// For window length `W = len - max_lag`,
/// `r(m) = sum x(n) x(n+m) / sqrt(sum x(n)^2 * sum x(n+m)^2)` over `n < W`.
pub fn normalized_autocorrelation(x: &[f64], max_lag: usize) -> Result<Autocorrelation> {
    if max_lag == 0 || x.len() < 2 * max_lag {
        return Err(Error::FrameTooShort {
            len: x.len(),
            needed: 2 * max_lag.max(1),
        });
    }
    let w = x.len() - max_lag;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in x {
        acc += v * v;
        prefix.push(acc);
    }
    let e0 = prefix[w];
    if e0 == 0.0 && acc == 0.0 {
        return Ok(Autocorrelation {
            values: vec![0.0; max_lag],
            degenerate: true,
        });
    }
    let fft = FftPair::new(x.len().next_power_of_two());
    let cc = cross_correlate(&fft, &x[..w], x, max_lag);
    let values = cc
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let m = i + 1;
            let em = prefix[m + w] - prefix[m];
            let denom = (e0 * em).sqrt();
            if denom > 0.0 {
                (c / denom).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(Autocorrelation {
        values,
        degenerate: false,
    })
}

/// Autocorrelation normalized by its zero-lag value, `r(m) / r(0)`, summing
/// over the overlapping part only. Values taper with lag as `(N - m) / N` for
/// a stationary input.
pub fn zero_lag_autocorrelation(x: &[f64], max_lag: usize) -> Result<Autocorrelation> {
    if max_lag == 0 || x.len() <= max_lag {
        return Err(Error::FrameTooShort {
            len: x.len(),
            needed: max_lag + 1,
        });
    }
    let r0: f64 = x.iter().map(|v| v * v).sum();
    if r0 == 0.0 {
        return Ok(Autocorrelation {
            values: vec![0.0; max_lag],
            degenerate: true,
        });
    }
    let fft = FftPair::new((2 * x.len()).next_power_of_two());
    let values = cross_correlate(&fft, x, x, max_lag)
        .into_iter()
        .map(|c| (c / r0).clamp(-1.0, 1.0))
        .collect();
    Ok(Autocorrelation {
        values,
        degenerate: false,
    })
}
