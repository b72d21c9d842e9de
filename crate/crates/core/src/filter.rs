//! Second-order low-pass model of the classical accelerometer's bandwidth.
//!
//! `H(s) = 1 / (1 + s/(q·ω0) + s²/ω0²)`, integrated as the ODE
//! `ÿ = ω0²(x − y) − (ω0/q)·ẏ` with RK4 substeps. The input is interpolated
//! between samples with a Catmull-Rom cubic so that the second derivative of the
//! output is not polluted by interpolation kinks.

use alloc::vec::Vec;

use crate::error::{ensure_positive, Error, Result};
use crate::math::{ceil, sqrt};

/// Largest `ω0·h` per RK4 substep.
const MAX_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SecondOrderLowpass {
    /// Natural frequency, rad/s.
    pub omega0: f64,
    /// Quality factor.
    pub q: f64,
}

impl SecondOrderLowpass {
    pub fn new(omega0: f64, q: f64) -> Result<Self> {
        ensure_positive("omega0", omega0)?;
        ensure_positive("q", q)?;
        Ok(Self { omega0, q })
    }

    /// Filter whose Taylor inverse is `a = y + d1·ẏ + d2·ÿ`, i.e.
    /// `H(s) = 1/(1 + d1·s + d2·s²)`: `ω0 = 1/√d2`, `q = 1/(d1·ω0)`.
    pub fn from_taylor(d1: f64, d2: f64) -> Result<Self> {
        ensure_positive("eta_prime", d1)?;
        ensure_positive("eta_dprime", d2)?;
        let omega0 = 1.0 / sqrt(d2);
        Self::new(omega0, 1.0 / (d1 * omega0))
    }

    /// −3 dB frequency in Hz.
    pub fn cutoff_hz(&self) -> f64 {
        let c = 1.0 / (self.q * self.q) - 2.0;
        let u = 0.5 * (-c + sqrt(c * c + 4.0));
        self.omega0 * sqrt(u) / (2.0 * core::f64::consts::PI)
    }

    /// Magnitude of the frequency response at `omega` rad/s.
    pub fn gain(&self, omega: f64) -> f64 {
        let x = omega / self.omega0;
        let re = 1.0 - x * x;
        let im = x / self.q;
        1.0 / sqrt(re * re + im * im)
    }

    pub fn check_rate(&self, rate: f64) -> Result<()> {
        ensure_positive("rate", rate)?;
        if rate < 2.0 * self.cutoff_hz() {
            return Err(Error::RateTooLow {
                rate,
                reason: "must be at least twice the filter's -3 dB frequency",
            });
        }
        Ok(())
    }

    /// Filter a uniformly sampled signal, starting from rest at `x[0]`.
    pub fn apply(&self, x: &[f64], rate: f64) -> Result<Vec<f64>> {
        self.check_rate(rate)?;
        let n = x.len();
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return Ok(out);
        }
        let dt = 1.0 / rate;
        let sub = ceil(self.omega0 * dt / MAX_STEP).max(1.0);
        let h = dt / sub;
        let sub = sub as usize;
        let w2 = self.omega0 * self.omega0;
        let damp = self.omega0 / self.q;
        let at = |j: isize| x[j.clamp(0, n as isize - 1) as usize];

        let (mut y, mut v) = (x[0], 0.0);
        out.push(y);
        for j in 0..n - 1 {
            let jj = j as isize;
            let seg = CatmullRom::new(at(jj - 1), at(jj), at(jj + 1), at(jj + 2));
            let f = |u: f64, y: f64, v: f64| (v, w2 * (seg.eval(u) - y) - damp * v);
            for s in 0..sub {
                let u0 = s as f64 / sub as f64;
                let du = 1.0 / sub as f64;
                let (k1y, k1v) = f(u0, y, v);
                let (k2y, k2v) = f(u0 + 0.5 * du, y + 0.5 * h * k1y, v + 0.5 * h * k1v);
                let (k3y, k3v) = f(u0 + 0.5 * du, y + 0.5 * h * k2y, v + 0.5 * h * k2v);
                let (k4y, k4v) = f(u0 + du, y + h * k3y, v + h * k3v);
                y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            }
            out.push(y);
        }
        Ok(out)
    }
}

struct CatmullRom {
    c: [f64; 4],
}

impl CatmullRom {
    fn new(p0: f64, p1: f64, p2: f64, p3: f64) -> Self {
        Self {
            c: [
                p1,
                0.5 * (p2 - p0),
                0.5 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3),
                0.5 * (-p0 + 3.0 * p1 - 3.0 * p2 + p3),
            ],
        }
    }

    #[inline]
    fn eval(&self, u: f64) -> f64 {
        let c = &self.c;
        c[0] + u * (c[1] + u * (c[2] + u * c[3]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn table_filter() -> SecondOrderLowpass {
        SecondOrderLowpass::from_taylor(5.002e-4, 2.068e-7).unwrap()
    }

    #[test]
    fn derived_parameters() {
        let f = table_filter();
        assert!((f.omega0 - 2199.0).abs() < 1.0, "{}", f.omega0);
        assert!((f.q - 0.909).abs() < 1e-3, "{}", f.q);
        // at the -3 dB point the gain is 1/√2
        let fc = f.cutoff_hz();
        assert!((f.gain(2.0 * PI * fc) - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((f.gain(f.omega0) - f.q).abs() < 1e-12);
        assert!(f.check_rate(1000.0).is_ok());
        assert!(matches!(f.check_rate(500.0), Err(Error::RateTooLow { .. })));
    }

    #[test]
    fn unit_dc_gain() {
        let x = vec![0.731; 200];
        let y = table_filter().apply(&x, 1000.0).unwrap();
        for v in y {
            assert!((v - 0.731).abs() < 1e-15);
        }
    }

    #[test]
    fn step_settles() {
        let f = table_filter();
        let rate = 20_000.0;
        let mut x = vec![0.0; 400];
        for v in x.iter_mut().skip(10) {
            *v = 1.0;
        }
        let y = f.apply(&x, rate).unwrap();
        let settle = (10.0 / f.omega0 * rate).ceil() as usize;
        for v in &y[10 + settle..] {
            assert!((v - 1.0).abs() < 0.01, "{v}");
        }
    }

    #[test]
    fn sine_at_natural_frequency() {
        let f = table_filter();
        let rate = 100_000.0;
        let n = 20_000;
        let x: Vec<f64> = (0..n).map(|j| (f.omega0 * j as f64 / rate).sin()).collect();
        let y = f.apply(&x, rate).unwrap();
        let peak = y[n / 2..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - f.q).abs() < 2e-3 * f.q, "{peak} vs {}", f.q);
    }

    #[test]
    fn low_frequency_gain_matches_response() {
        let f = table_filter();
        let rate = 1000.0;
        let w = 2.0 * PI * 40.0;
        let n = 4000;
        let x: Vec<f64> = (0..n).map(|j| (w * j as f64 / rate).sin()).collect();
        let y = f.apply(&x, rate).unwrap();
        let peak = y[n / 2..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // sample peaks undershoot the continuous peak by at most 1 - cos(w·dt/2)
        let expect = f.gain(w);
        assert!(peak <= expect * (1.0 + 1e-4) && peak > expect * (1.0 - 0.02), "{peak} vs {expect}");
    }
}
