//! Triangular interferometer weighting and its derivative kernels.
//!
//! Over the interferometer window `[0, 2T]` sampled at `rate`, with `m = T·rate`:
//!
//! * `g[j] = (m − |j − m|) / m²` is the unit-sum triangle (zero at both ends);
//! * `g1 = −dg/dt` (central difference), so `Σ g1·a` is the triangle-weighted
//!   mean of `da/dt`, exactly `β` on a ramp `β·t`;
//! * `g2 = d²g/dt²` (second difference), which collapses to
//!   `{+1, −2, +1} / T²` at `t = 0, T, 2T` and returns `γ` on `½·γ·t²`.
//!
//! `g1` and `g2` get a final mean-subtraction pass so that constants are
//! annihilated to rounding level.

use alloc::vec::Vec;

use crate::error::{ensure_positive, Error, Result};
use crate::math::round;
use crate::synth::SensorStream;

/// Kernel weights for one pulse separation and sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    pub rate: f64,
    pub pulse_separation: f64,
    /// Triangle, unit sum.
    pub g: Vec<f64>,
    /// First-derivative weights, 1/s.
    pub g1: Vec<f64>,
    /// Second-derivative weights, 1/s².
    pub g2: Vec<f64>,
}

/// Kernel-weighted quantities of one cycle window.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CycleAverages {
    pub a_z: f64,
    /// Weighted mean of da_z/dt.
    pub a_z_rate: f64,
    /// Weighted mean of d²a_z/dt².
    pub a_z_curvature: f64,
    pub a_x: f64,
    pub a_y: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
}

impl KernelSet {
    pub fn build(pulse_separation: f64, rate: f64) -> Result<Self> {
        ensure_positive("pulse_separation", pulse_separation)?;
        ensure_positive("rate", rate)?;
        let exact = pulse_separation * rate;
        let m = round(exact);
        if (exact - m).abs() > 1e-6 * exact.max(1.0) {
            return Err(Error::InvalidParameter {
                name: "pulse_separation",
                reason: "must be a whole number of sample periods",
            });
        }
        if 2.0 * m < 4.0 {
            return Err(Error::RateTooLow {
                rate,
                reason: "interferometer window must span at least 4 samples",
            });
        }
        let m = m as usize;
        let n = 2 * m + 1;
        let dt = 1.0 / rate;
        let mf = m as f64;
        let g: Vec<f64> = (0..n)
            .map(|j| (m - j.abs_diff(m)) as f64 / (mf * mf))
            .collect();
        let at = |j: isize| -> f64 {
            if j < 0 || j as usize >= n {
                0.0
            } else {
                g[j as usize]
            }
        };
        let mut g1: Vec<f64> = (0..n as isize)
            .map(|j| -(at(j + 1) - at(j - 1)) / (2.0 * dt))
            .collect();
        let mut g2: Vec<f64> = (0..n as isize)
            .map(|j| (at(j + 1) - 2.0 * at(j) + at(j - 1)) / (dt * dt))
            .collect();
        remove_mean(&mut g1);
        remove_mean(&mut g2);
        Ok(Self { rate, pulse_separation, g, g1, g2 })
    }

    /// Number of samples in the window, `2·T·rate + 1`.
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// Reduce the window starting at sample `start` of `stream`.
    pub fn reduce_at(&self, stream: &SensorStream, start: usize) -> Result<CycleAverages> {
        let end = start + self.len();
        if end > stream.len() {
            return Err(Error::WindowOutOfBounds {
                start: start as i64,
                end: end as i64,
                len: stream.len(),
            });
        }
        let r = start..end;
        let az = &stream.az[r.clone()];
        Ok(CycleAverages {
            a_z: dot(&self.g, az),
            a_z_rate: dot(&self.g1, az),
            a_z_curvature: dot(&self.g2, az),
            a_x: dot(&self.g, &stream.ax[r.clone()]),
            a_y: dot(&self.g, &stream.ay[r.clone()]),
            omega_x: dot(&self.g, &stream.wx[r.clone()]),
            omega_y: dot(&self.g, &stream.wy[r.clone()]),
            omega_z: dot(&self.g, &stream.wz[r]),
        })
    }
}

/// Kernel-weighted cycle quantities for the window beginning at time `cycle_start`.
pub fn cycle_reduce(stream: &SensorStream, kernels: &KernelSet, cycle_start: f64) -> Result<CycleAverages> {
    let t0 = stream.t.first().copied().unwrap_or(0.0);
    let offset = round((cycle_start - t0) * stream.rate);
    if offset < 0.0 {
        return Err(Error::WindowOutOfBounds {
            start: offset as i64,
            end: offset as i64 + kernels.len() as i64,
            len: stream.len(),
        });
    }
    kernels.reduce_at(stream, offset as usize)
}

#[inline]
fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Subtract the mean using a compensated sum.
fn remove_mean(w: &mut [f64]) {
    let mean = kahan_sum(w) / w.len() as f64;
    for v in w.iter_mut() {
        *v -= mean;
    }
}

fn kahan_sum(w: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for &x in w {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}
