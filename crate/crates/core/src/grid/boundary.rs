use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Samples on the unit circle at `theta_j = 2 pi j / n`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryValues {
    Real(Vec<f64>),
    Unit(Vec<Complex64>),
}

/// Uniformly sampled boundary data with lazily computed Fourier modes.
///
/// Mode `k` is `(1/n) sum_j s_j e^{-i k theta_j}`, stored in FFT order, so
/// samples of `cos(theta)` carry `1/2` at `k = 1` and `k = -1`.
#[derive(Debug, Clone)]
pub struct BoundarySignal {
    values: BoundaryValues,
    modes: OnceLock<Vec<Complex64>>,
}

pub(crate) const UNIT_TOLERANCE: f64 = 1e-10;

impl BoundarySignal {
    pub fn from_real(values: Vec<f64>) -> Result<Self> {
        check_len(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPhase("non-finite boundary sample".into()));
        }
        Ok(Self { values: BoundaryValues::Real(values), modes: OnceLock::new() })
    }

    pub fn from_unit(values: Vec<Complex64>) -> Result<Self> {
        check_len(values.len())?;
        if let Some(v) = values.iter().find(|v| (v.norm() - 1.0).abs() > UNIT_TOLERANCE) {
            return Err(Error::InvalidPhase(format!("boundary sample {v} is not unit modulus")));
        }
        Ok(Self { values: BoundaryValues::Unit(values), modes: OnceLock::new() })
    }

    /// Samples `f(theta_j)` for a real function.
    pub fn sample_real(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_real(thetas(n).map(f).collect())
    }

    /// Samples `g(theta_j)` for a circle-valued function.
    pub fn sample_unit(n: usize, g: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::from_unit(thetas(n).map(g).collect())
    }

    /// Rebuilds real samples from a full set of FFT-ordered modes.
    pub fn from_modes_real(modes: &[Complex64]) -> Result<Self> {
        check_len(modes.len())?;
        let mut buf = modes.to_vec();
        FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
        Self::from_real(buf.iter().map(|c| c.re).collect())
    }

    pub fn len(&self) -> usize {
        match &self.values {
            BoundaryValues::Real(v) => v.len(),
            BoundaryValues::Unit(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> &BoundaryValues {
        &self.values
    }

    pub fn real_values(&self) -> Option<&[f64]> {
        match &self.values {
            BoundaryValues::Real(v) => Some(v),
            BoundaryValues::Unit(_) => None,
        }
    }

    pub fn unit_values(&self) -> Option<&[Complex64]> {
        match &self.values {
            BoundaryValues::Unit(v) => Some(v),
            BoundaryValues::Real(_) => None,
        }
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.len() as f64
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> {
        thetas(self.len())
    }

    /// All modes in FFT order (index `k` for `k < n/2`, `k + n` for negative `k`).
    pub fn fourier_modes(&self) -> &[Complex64] {
        self.modes.get_or_init(|| {
            let mut buf: Vec<Complex64> = match &self.values {
                BoundaryValues::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                BoundaryValues::Unit(v) => v.clone(),
            };
            let n = buf.len();
            FftPlanner::new().plan_fft_forward(n).process(&mut buf);
            let scale = 1.0 / n as f64;
            buf.iter_mut().for_each(|c| *c *= scale);
            buf
        })
    }

    /// Mode with signed frequency `k`, zero when `|k|` exceeds the band.
    pub fn mode(&self, k: i64) -> Complex64 {
        let n = self.len() as i64;
        if k.abs() > n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.fourier_modes()[k.rem_euclid(n) as usize]
    }

    /// Spectral derivative in `theta` of a real periodic signal. The
    /// Nyquist mode is dropped since its derivative is not resolved.
    pub fn derivative(&self) -> Result<BoundarySignal> {
        if self.real_values().is_none() {
            return Err(Error::InvalidPhase("spectral derivative needs a real signal".into()));
        }
        let n = self.len();
        let modes: Vec<Complex64> = self
            .fourier_modes()
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let k = signed_frequency(idx, n);
                if 2 * k.unsigned_abs() as usize == n {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, k as f64)
                }
            })
            .collect();
        BoundarySignal::from_modes_real(&modes)
    }

    /// Mean value over the circle (mode zero).
    pub fn mean(&self) -> Complex64 {
        self.fourier_modes()[0]
    }
}

/// Forces the Fourier modes of `signal` and returns a copy carrying them.
pub fn boundary_transform(signal: &BoundarySignal) -> BoundarySignal {
    signal.fourier_modes();
    signal.clone()
}

/// Frequency of FFT slot `idx` for length `n`.
pub fn signed_frequency(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

fn thetas(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
}

fn check_len(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidPhase(format!("boundary signal needs at least 4 samples, got {n}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_has_two_half_modes() {
        let s = BoundarySignal::sample_real(64, f64::cos).unwrap();
        for k in -32i64..32 {
            let expected = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((s.mode(k) - Complex64::new(expected, 0.0)).norm() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn modes_round_trip() {
        let s = BoundarySignal::sample_real(48, |t| (3.0 * t).sin() + 0.2 * t.cos().exp()).unwrap();
        let back = BoundarySignal::from_modes_real(s.fourier_modes()).unwrap();
        for (a, b) in s.real_values().unwrap().iter().zip(back.real_values().unwrap()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let s = BoundarySignal::sample_real(32, |t| (2.0 * t).sin()).unwrap();
        let d = s.derivative().unwrap();
        for (j, v) in d.real_values().unwrap().iter().enumerate() {
            assert!((v - 2.0 * (2.0 * s.theta(j)).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_unit_samples() {
        assert!(BoundarySignal::from_unit(vec![Complex64::new(1.1, 0.0); 8]).is_err());
    }
}
