//! Synthetic truth trajectories and the classical accelerometer's view of them.
//!
//! Every channel is a sum of independent parts (see [`ChannelModel`]): a mean,
//! white noise drawn per sample, noise drawn once per cycle and held, and
//! band-limited sums of sinusoids. Draws come from [`NoiseStream`] with one
//! sub-stream per channel, indexed by absolute sample (or cycle) number, so any
//! window of a stream can be regenerated on its own and matches the full stream
//! bit for bit.
//!
//! The CA reading of the vertical axis is
//!
//! ```text
//! a_CA = (F[a_z] − η_x·a_x − η_y·a_y − b(t)) / η + δa
//! ```
//!
//! where `F` is the low-pass whose Taylor inverse carries the coefficients
//! `η′, η″` (see [`TruthParams::ca_filter`]). With this convention the truth
//! values of `b, η, η′, η″, η_x, η_y` are exactly the coefficients an estimator
//! of `a_QA ≈ η·a_CA + η′·a′ + η″·a″ + η_x·a_x + η_y·a_y + b` should converge to.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};
use crate::filter::SecondOrderLowpass;
use crate::math::{round, sin, sqrt};
use crate::rng::{channel, NoiseStream};

/// One band of sinusoids with random frequencies in `[f_min, f_max]` and
/// random phases; the band's total rms is `rms`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct HarmonicBand {
    pub rms: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub components: u32,
}

/// Statistical model of one channel. All parts add.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ChannelModel {
    pub mean: f64,
    /// Std of independent per-sample draws.
    pub white: f64,
    /// Std of draws held constant over each cycle period.
    pub held: f64,
    pub bands: Vec<HarmonicBand>,
}

impl ChannelModel {
    pub fn white(std: f64) -> Self {
        Self { white: std, ..Self::default() }
    }

    pub fn held(std: f64) -> Self {
        Self { held: std, ..Self::default() }
    }

    pub fn constant(mean: f64) -> Self {
        Self { mean, ..Self::default() }
    }

    pub fn is_zero(&self) -> bool {
        self.mean == 0.0 && self.white == 0.0 && self.held == 0.0 && self.bands.iter().all(|b| b.rms == 0.0)
    }

    /// Std of one cycle-rate draw (white and held parts merge when sampled once per cycle).
    pub fn cycle_std(&self) -> f64 {
        let bands: f64 = self.bands.iter().map(|b| b.rms * b.rms).sum();
        sqrt(self.white * self.white + self.held * self.held + bands)
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        ensure_finite(name, self.mean)?;
        ensure_non_negative(name, self.white)?;
        ensure_non_negative(name, self.held)?;
        for b in &self.bands {
            ensure_non_negative(name, b.rms)?;
            ensure_non_negative(name, b.f_min)?;
            ensure_finite(name, b.f_max)?;
            if b.f_max < b.f_min {
                return Err(Error::InvalidParameter { name, reason: "harmonic band has f_max < f_min" });
            }
            if b.components == 0 && b.rms > 0.0 {
                return Err(Error::InvalidParameter { name, reason: "harmonic band needs at least one component" });
            }
        }
        Ok(())
    }
}

/// Ground truth for a synthetic run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct TruthParams {
    /// CA bias `b` at t = 0, m/s².
    pub bias: f64,
    /// Linear bias drift, m/s² per s.
    pub bias_drift: f64,
    /// CA scale factor `η`.
    pub scale: f64,
    /// First-order filter coefficient `η′`, s. Zero disables the filter.
    pub eta_prime: f64,
    /// Second-order filter coefficient `η″`, s².
    pub eta_dprime: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    /// Change of `η_x` applied from `eta_x_step_time` on.
    pub eta_x_step: f64,
    pub eta_x_step_time: f64,
    /// Mean transverse launch velocities of the atoms, m/s.
    pub v_x0: f64,
    pub v_y0: f64,
    pub accel_z: ChannelModel,
    pub accel_x: ChannelModel,
    pub accel_y: ChannelModel,
    pub omega_x: ChannelModel,
    pub omega_y: ChannelModel,
    pub omega_z: ChannelModel,
    /// Uncorrelated CA noise `δa`.
    pub ca_noise: ChannelModel,
}

impl Default for TruthParams {
    fn default() -> Self {
        Self {
            bias: 0.0,
            bias_drift: 0.0,
            scale: 1.0,
            eta_prime: 0.0,
            eta_dprime: 0.0,
            eta_x: 0.0,
            eta_y: 0.0,
            eta_x_step: 0.0,
            eta_x_step_time: 0.0,
            v_x0: 0.0,
            v_y0: 0.0,
            accel_z: ChannelModel::default(),
            accel_x: ChannelModel::default(),
            accel_y: ChannelModel::default(),
            omega_x: ChannelModel::default(),
            omega_y: ChannelModel::default(),
            omega_z: ChannelModel::default(),
            ca_noise: ChannelModel::default(),
        }
    }
}

/// Truth coefficient values in force at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthCoefficients {
    pub bias: f64,
    pub scale: f64,
    pub eta_prime: f64,
    pub eta_dprime: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub v_x0: f64,
    pub v_y0: f64,
}

impl TruthParams {
    /// White acceleration and CA noise, no filter or transverse coupling.
    pub fn white(sigma_a: f64, sigma_delta_a: f64, scale: f64, bias: f64) -> Self {
        Self {
            scale,
            bias,
            accel_z: ChannelModel::white(sigma_a),
            ca_noise: ChannelModel::white(sigma_delta_a),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("bias", self.bias)?;
        ensure_finite("bias_drift", self.bias_drift)?;
        ensure_positive("scale", self.scale)?;
        ensure_non_negative("eta_prime", self.eta_prime)?;
        ensure_non_negative("eta_dprime", self.eta_dprime)?;
        if (self.eta_prime > 0.0) != (self.eta_dprime > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eta_dprime",
                reason: "filter needs both eta_prime and eta_dprime > 0, or both 0",
            });
        }
        for (name, v) in [
            ("eta_x", self.eta_x),
            ("eta_y", self.eta_y),
            ("eta_x_step", self.eta_x_step),
            ("eta_x_step_time", self.eta_x_step_time),
            ("v_x0", self.v_x0),
            ("v_y0", self.v_y0),
        ] {
            ensure_finite(name, v)?;
        }
        self.accel_z.validate("accel_z")?;
        self.accel_x.validate("accel_x")?;
        self.accel_y.validate("accel_y")?;
        self.omega_x.validate("omega_x")?;
        self.omega_y.validate("omega_y")?;
        self.omega_z.validate("omega_z")?;
        self.ca_noise.validate("ca_noise")
    }

    /// The CA bandwidth model, if enabled. The physical filter coefficients are
    /// `η′/η` and `η″/η` so that the scaled Taylor inverse recovers `η′, η″`.
    pub fn ca_filter(&self) -> Result<Option<SecondOrderLowpass>> {
        if self.eta_prime == 0.0 && self.eta_dprime == 0.0 {
            return Ok(None);
        }
        SecondOrderLowpass::from_taylor(self.eta_prime / self.scale, self.eta_dprime / self.scale).map(Some)
    }

    pub fn bias_at(&self, t: f64) -> f64 {
        self.bias + self.bias_drift * t
    }

    pub fn eta_x_at(&self, t: f64) -> f64 {
        if self.eta_x_step != 0.0 && t >= self.eta_x_step_time {
            self.eta_x + self.eta_x_step
        } else {
            self.eta_x
        }
    }

    pub fn coefficients_at(&self, t: f64) -> TruthCoefficients {
        TruthCoefficients {
            bias: self.bias_at(t),
            scale: self.scale,
            eta_prime: self.eta_prime,
            eta_dprime: self.eta_dprime,
            eta_x: self.eta_x_at(t),
            eta_y: self.eta_y,
            v_x0: self.v_x0,
            v_y0: self.v_y0,
        }
    }

    /// CA reading from a (filtered) vertical acceleration and the transverse channels.
    #[inline]
    pub fn ca_reading(&self, t: f64, filtered_z: f64, ax: f64, ay: f64, noise: f64) -> f64 {
        (filtered_z - self.eta_x_at(t) * ax - self.eta_y * ay - self.bias_at(t)) / self.scale + noise
    }
}

/// Uniformly sampled 3-axis acceleration and angular velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorStream {
    pub rate: f64,
    pub t: Vec<f64>,
    pub ax: Vec<f64>,
    pub ay: Vec<f64>,
    pub az: Vec<f64>,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
    pub wz: Vec<f64>,
}

impl SensorStream {
    /// `n` zero samples starting at absolute sample `first`.
    pub fn zeros(rate: f64, first: u64, n: usize) -> Self {
        Self {
            rate,
            t: (0..n).map(|j| (first + j as u64) as f64 / rate).collect(),
            ax: vec![0.0; n],
            ay: vec![0.0; n],
            az: vec![0.0; n],
            wx: vec![0.0; n],
            wy: vec![0.0; n],
            wz: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Absolute index of the first sample, `t[0]·rate` rounded.
    pub fn first_index(&self) -> u64 {
        self.t.first().map_or(0, |t0| round(t0 * self.rate).max(0.0) as u64)
    }

    pub fn channels(&self) -> [&[f64]; 6] {
        [&self.ax, &self.ay, &self.az, &self.wx, &self.wy, &self.wz]
    }

    /// Check equal channel lengths, finite values and uniform sampling.
    pub fn validate(&self) -> Result<()> {
        ensure_positive("rate", self.rate)?;
        for c in self.channels() {
            if c.len() != self.t.len() {
                return Err(Error::LengthMismatch { left: self.t.len(), right: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("stream sample"));
            }
        }
        let dt = 1.0 / self.rate;
        for w in self.t.windows(2) {
            let step = w[1] - w[0];
            if !step.is_finite() || (step - dt).abs() > 1e-6 * dt.max(w[1].abs() * 1e-9) + 1e-9 * dt {
                return Err(Error::InvalidParameter { name: "t", reason: "samples are not uniformly spaced at `rate`" });
            }
        }
        Ok(())
    }
}

/// A [`ChannelModel`] with its harmonic components drawn.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedChannel {
    channel: u64,
    mean: f64,
    white: f64,
    held: f64,
    /// (amplitude, angular frequency, phase)
    tones: Vec<(f64, f64, f64)>,
}

impl ResolvedChannel {
    pub(crate) fn new(model: &ChannelModel, seed: u64, channel: u64) -> Self {
        let mut tones = Vec::new();
        for (k, band) in model.bands.iter().enumerate() {
            if band.rms == 0.0 || band.components == 0 {
                continue;
            }
            let amp = band.rms * sqrt(2.0 / band.components as f64);
            let mut rng = NoiseStream::new(seed, channel::HARMONIC_BASE + 8 * channel + k as u64);
            for _ in 0..band.components {
                let f = band.f_min + (band.f_max - band.f_min) * rng.uniform();
                let phase = 2.0 * PI * rng.uniform();
                tones.push((amp, 2.0 * PI * f, phase));
            }
        }
        Self { channel, mean: model.mean, white: model.white, held: model.held, tones }
    }

    /// Value at one cycle-rate draw (white and held draws share the index).
    pub(crate) fn cycle_value(&self, seed: u64, cycle: u64, t: f64) -> f64 {
        let mut v = self.mean + self.tone_sum(t);
        if self.white > 0.0 || self.held > 0.0 {
            let std = sqrt(self.white * self.white + self.held * self.held);
            v += std * NoiseStream::at(seed, self.channel, cycle).normal();
        }
        v
    }

    /// Fill `out` with samples `start..start + out.len()`; held draws change
    /// every `per_cycle` samples.
    pub(crate) fn fill(&self, seed: u64, start: u64, rate: f64, per_cycle: u64, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.mean + self.tone_sum((start + j as u64) as f64 / rate);
        }
        if self.white > 0.0 {
            let mut rng = NoiseStream::at(seed, self.channel, start);
            for o in out.iter_mut() {
                *o += self.white * rng.normal();
            }
        }
        if self.held > 0.0 {
            // held draws live on their own sub-stream so they stay independent of the white part
            let ch = self.channel + channel::HELD_OFFSET;
            let mut current = u64::MAX;
            let mut value = 0.0;
            for (j, o) in out.iter_mut().enumerate() {
                let c = (start + j as u64) / per_cycle;
                if c != current {
                    current = c;
                    value = self.held * NoiseStream::at(seed, ch, c).normal();
                }
                *o += value;
            }
        }
    }

    #[inline]
    fn tone_sum(&self, t: f64) -> f64 {
        self.tones.iter().map(|&(a, w, p)| a * sin(w * t + p)).sum()
    }
}

/// Resolved truth channels, in `ax, ay, az, wx, wy, wz` order, plus CA noise.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedTruth {
    pub(crate) channels: [ResolvedChannel; 6],
    pub(crate) ca_noise: ResolvedChannel,
}

impl ResolvedTruth {
    pub(crate) fn new(p: &TruthParams, seed: u64) -> Self {
        Self {
            channels: [
                ResolvedChannel::new(&p.accel_x, seed, channel::ACCEL_X),
                ResolvedChannel::new(&p.accel_y, seed, channel::ACCEL_Y),
                ResolvedChannel::new(&p.accel_z, seed, channel::ACCEL_Z),
                ResolvedChannel::new(&p.omega_x, seed, channel::OMEGA_X),
                ResolvedChannel::new(&p.omega_y, seed, channel::OMEGA_Y),
                ResolvedChannel::new(&p.omega_z, seed, channel::OMEGA_Z),
            ],
            ca_noise: ResolvedChannel::new(&p.ca_noise, seed, channel::CA_NOISE),
        }
    }

    pub(crate) fn window(&self, seed: u64, start: u64, len: usize, rate: f64, per_cycle: u64) -> SensorStream {
        let mut s = SensorStream::zeros(rate, start, len);
        let outs: [&mut Vec<f64>; 6] = [&mut s.ax, &mut s.ay, &mut s.az, &mut s.wx, &mut s.wy, &mut s.wz];
        for (ch, out) in self.channels.iter().zip(outs) {
            ch.fill(seed, start, rate, per_cycle, out);
        }
        s
    }
}

fn samples_per_cycle(rate: f64, cycle_time: f64) -> Result<u64> {
    ensure_positive("rate", rate)?;
    ensure_positive("cycle_time", cycle_time)?;
    let n = round(rate * cycle_time);
    if n < 1.0 || (n - rate * cycle_time).abs() > 1e-6 * n {
        return Err(Error::InvalidParameter { name: "cycle_time", reason: "must be a whole number of sample periods" });
    }
    Ok(n as u64)
}

/// Truth stream of `duration` seconds at `rate`. Held parts change every `cycle_time`.
pub fn gen_truth_stream(params: &TruthParams, duration: f64, rate: f64, cycle_time: f64, seed: u64) -> Result<SensorStream> {
    params.validate()?;
    ensure_positive("duration", duration)?;
    let per_cycle = samples_per_cycle(rate, cycle_time)?;
    let n = round(duration * rate) as usize;
    Ok(ResolvedTruth::new(params, seed).window(seed, 0, n, rate, per_cycle))
}

/// Apply `H(s) = 1/(1 + s/(q·ω0) + s²/ω0²)` to the `a_z` channel; other channels pass through.
pub fn second_order_lowpass(stream: &SensorStream, omega0: f64, q: f64) -> Result<SensorStream> {
    let f = SecondOrderLowpass::new(omega0, q)?;
    let mut out = stream.clone();
    out.az = f.apply(&stream.az, stream.rate)?;
    Ok(out)
}

/// The CA's imperfect view of a truth stream: filter, inverse affine map with
/// transverse coupling, then uncorrelated noise. Only `a_z` changes.
pub fn apply_ca_model(truth: &SensorStream, params: &TruthParams, cycle_time: f64, seed: u64) -> Result<SensorStream> {
    params.validate()?;
    truth.validate()?;
    let per_cycle = samples_per_cycle(truth.rate, cycle_time)?;
    let mut out = truth.clone();
    if let Some(f) = params.ca_filter()? {
        out.az = f.apply(&truth.az, truth.rate)?;
    }
    let mut noise = vec![0.0; truth.len()];
    ResolvedChannel::new(&params.ca_noise, seed, channel::CA_NOISE).fill(
        seed,
        truth.first_index(),
        truth.rate,
        per_cycle,
        &mut noise,
    );
    for j in 0..out.len() {
        out.az[j] = params.ca_reading(out.t[j], out.az[j], truth.ax[j], truth.ay[j], noise[j]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
    }

    #[test]
    fn zero_params_give_zero_stream() {
        let s = gen_truth_stream(&TruthParams::default(), 1.0, 1000.0, 0.1, 3).unwrap();
        assert_eq!(s.len(), 1000);
        for c in s.channels() {
            assert!(c.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn white_std_and_determinism() {
        let p = TruthParams { accel_z: ChannelModel::white(0.38), ..TruthParams::default() };
        let s = gen_truth_stream(&p, 1000.0, 1000.0, 0.1, 11).unwrap();
        assert_eq!(s.len(), 1_000_000);
        let sd = std(&s.az);
        assert!((sd - 0.38).abs() < 0.002, "{sd}");
        let again = gen_truth_stream(&p, 1000.0, 1000.0, 0.1, 11).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn channels_are_decorrelated() {
        let p = TruthParams {
            accel_z: ChannelModel::white(1.0),
            accel_x: ChannelModel::white(1.0),
            omega_y: ChannelModel::white(1.0),
            ..TruthParams::default()
        };
        let s = gen_truth_stream(&p, 100.0, 1000.0, 0.1, 5).unwrap();
        let n = s.len() as f64;
        let corr = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n;
        assert!(corr(&s.az, &s.ax).abs() < 3.0 / n.sqrt());
        assert!(corr(&s.az, &s.wy).abs() < 3.0 / n.sqrt());
        let other = gen_truth_stream(&p, 100.0, 1000.0, 0.1, 6).unwrap();
        assert!(corr(&s.az, &other.az).abs() < 3.0 / n.sqrt());
    }

    #[test]
    fn window_matches_full_stream() {
        let p = TruthParams {
            accel_z: ChannelModel {
                mean: 0.1,
                white: 0.2,
                held: 0.3,
                bands: vec![HarmonicBand { rms: 0.5, f_min: 0.1, f_max: 2.0, components: 8 }],
            },
            omega_x: ChannelModel::held(5e-3),
            ..TruthParams::default()
        };
        let full = gen_truth_stream(&p, 2.0, 1000.0, 0.1, 9).unwrap();
        let w = ResolvedTruth::new(&p, 9).window(9, 737, 150, 1000.0, 100);
        assert_eq!(&w.az[..], &full.az[737..887]);
        assert_eq!(&w.wx[..], &full.wx[737..887]);
        assert_eq!(&w.t[..], &full.t[737..887]);
    }

    #[test]
    fn held_draws_are_constant_per_cycle() {
        let p = TruthParams { omega_y: ChannelModel::held(0.013), ..TruthParams::default() };
        let s = gen_truth_stream(&p, 1.0, 1000.0, 0.1, 2).unwrap();
        for c in s.wy.chunks(100) {
            assert!(c.iter().all(|&v| v == c[0]));
        }
        assert_ne!(s.wy[0], s.wy[100]);
    }

    #[test]
    fn harmonic_band_rms() {
        let p = TruthParams {
            accel_x: ChannelModel {
                bands: vec![HarmonicBand { rms: 0.3, f_min: 0.5, f_max: 2.0, components: 12 }],
                ..ChannelModel::default()
            },
            ..TruthParams::default()
        };
        let s = gen_truth_stream(&p, 2000.0, 100.0, 0.1, 4).unwrap();
        let rms = (s.ax.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt();
        assert!((rms - 0.3).abs() < 0.01, "{rms}");
    }

    #[test]
    fn ca_model_identity_and_affine() {
        let p = TruthParams { accel_z: ChannelModel::white(0.38), ..TruthParams::default() };
        let truth = gen_truth_stream(&p, 1.0, 1000.0, 0.1, 1).unwrap();
        let ca = apply_ca_model(&truth, &p, 0.1, 1).unwrap();
        assert_eq!(ca, truth);

        let p = TruthParams { bias: 2e-5, scale: 1.001, accel_z: ChannelModel::constant(0.7), ..TruthParams::default() };
        let truth = gen_truth_stream(&p, 0.1, 1000.0, 0.1, 1).unwrap();
        let ca = apply_ca_model(&truth, &p, 0.1, 1).unwrap();
        for v in &ca.az {
            assert_eq!(*v, (0.7 - 2e-5) / 1.001);
        }
        // exact affine inverse
        for (c, t) in ca.az.iter().zip(&truth.az) {
            assert!((1.001 * c + 2e-5 - t).abs() < 1e-15);
        }
    }

    #[test]
    fn ca_noise_level() {
        let p = TruthParams { ca_noise: ChannelModel::white(4.8e-5), ..TruthParams::default() };
        let truth = gen_truth_stream(&p, 1000.0, 1000.0, 0.1, 8).unwrap();
        let ca = apply_ca_model(&truth, &p, 0.1, 8).unwrap();
        let sd = std(&ca.az);
        assert!((sd - 4.8e-5).abs() < 4.8e-5 * 0.005, "{sd}");
    }

    #[test]
    fn lowpass_passes_other_channels() {
        let p = TruthParams {
            accel_z: ChannelModel::white(1.0),
            accel_x: ChannelModel::white(1.0),
            ..TruthParams::default()
        };
        let s = gen_truth_stream(&p, 0.5, 10_000.0, 0.1, 1).unwrap();
        let f = second_order_lowpass(&s, 2199.0, 0.909).unwrap();
        assert_eq!(f.ax, s.ax);
        assert_ne!(f.az, s.az);
        assert!(second_order_lowpass(&gen_truth_stream(&p, 0.5, 500.0, 0.1, 1).unwrap(), 2199.0, 0.909).is_err());
    }

    #[test]
    fn validation() {
        let mut p = TruthParams::default();
        p.scale = 0.0;
        assert!(p.validate().is_err());
        let mut p = TruthParams::default();
        p.eta_prime = 1e-4;
        assert!(p.validate().is_err());
        let mut p = TruthParams::default();
        p.accel_z.white = f64::NAN;
        assert!(p.validate().is_err());
        assert!(gen_truth_stream(&TruthParams::default(), 1.0, 1000.0, 0.1005, 1).is_err());
    }
}
