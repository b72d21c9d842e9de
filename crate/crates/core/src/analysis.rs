//! Stability figures: Allan deviation, white-noise extrapolation, residuals and
//! convergence classification.

use alloc::vec::Vec;

use crate::error::{ensure_finite, Error, Result};
use crate::math::{exp, ln, sqrt};

/// Shortest series accepted by [`allan_deviation`].
pub const MIN_ALLAN_SAMPLES: usize = 32;

/// Overlapping Allan deviation at octave-spaced averaging times.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AllanCurve {
    /// Averaging times `m·Tc`, s.
    pub taus: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Number of overlapping differences behind each point.
    pub counts: Vec<usize>,
    /// Series length.
    pub n_samples: usize,
    pub cycle_time: f64,
}

impl AllanCurve {
    /// Averaging factor `m` of point `k`.
    pub fn factor(&self, k: usize) -> usize {
        1 << k
    }

    fn above(&self, tau_min: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.taus.len())
            .filter(move |&k| self.taus[k] >= tau_min && self.sigma[k] > 0.0)
            .map(move |k| (self.taus[k], self.sigma[k], self.n_samples as f64 / self.factor(k) as f64))
    }
}

/// Overlapping Allan deviation of a series sampled every `cycle_time`, at
/// `m = 1, 2, 4, …` up to a quarter of the series.
pub fn allan_deviation(series: &[f64], cycle_time: f64) -> Result<AllanCurve> {
    let n = series.len();
    if n < MIN_ALLAN_SAMPLES {
        return Err(Error::SeriesTooShort { len: n, min: MIN_ALLAN_SAMPLES });
    }
    for &v in series {
        ensure_finite("series", v)?;
    }
    // centre before the prefix sums to keep precision on offset series
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut cs = Vec::with_capacity(n + 1);
    cs.push(0.0);
    let mut acc = 0.0;
    for &v in series {
        acc += v - mean;
        cs.push(acc);
    }
    let mut curve = AllanCurve { taus: Vec::new(), sigma: Vec::new(), counts: Vec::new(), n_samples: n, cycle_time };
    let mut m = 1;
    while m <= n / 4 {
        let count = n - 2 * m + 1;
        let mf = m as f64;
        let mut sum = 0.0;
        for k in 0..count {
            let a = (cs[k + m] - cs[k]) / mf;
            let b = (cs[k + 2 * m] - cs[k + m]) / mf;
            sum += (b - a) * (b - a);
        }
        curve.taus.push(mf * cycle_time);
        curve.sigma.push(sqrt(0.5 * sum / count as f64));
        curve.counts.push(count);
        m *= 2;
    }
    Ok(curve)
}

/// Fit `σ = A/√τ` over `τ ≥ tau_min` and return the level at one cycle, `A/√Tc`.
///
/// The fit is done on `ln σ` with weights `n/m`, proportional to the inverse
/// variance of each point.
pub fn fit_white_level(curve: &AllanCurve, tau_min: f64) -> Result<f64> {
    let pts: Vec<_> = curve.above(tau_min).collect();
    let candidates = curve.taus.iter().filter(|&&t| t >= tau_min).count();
    if candidates < 3 {
        return Err(Error::InsufficientPoints { found: candidates, min: 3 });
    }
    if pts.is_empty() {
        return Ok(0.0);
    }
    let (mut sw, mut s) = (0.0, 0.0);
    for (tau, sigma, w) in pts {
        s += w * (ln(sigma) + 0.5 * ln(tau));
        sw += w;
    }
    Ok(exp(s / sw) / sqrt(curve.cycle_time))
}

/// Weighted log-log slope of the curve over `τ ≥ tau_min`.
pub fn loglog_slope(curve: &AllanCurve, tau_min: f64) -> Result<f64> {
    let pts: Vec<_> = curve.above(tau_min).collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints { found: pts.len(), min: 3 });
    }
    let xs: Vec<f64> = pts.iter().map(|p| ln(p.0)).collect();
    let ys: Vec<f64> = pts.iter().map(|p| ln(p.1)).collect();
    let ws: Vec<f64> = pts.iter().map(|p| p.2).collect();
    Ok(weighted_line(&xs, &ys, &ws).1)
}

/// Weighted least-squares line, returns `(intercept, slope)`.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (my - slope * mx, slope)
}

/// Ordinary least-squares line, returns `(intercept, slope)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 2 });
    }
    let w = alloc::vec![1.0; x.len()];
    Ok(weighted_line(x, y, &w))
}

/// Jump at `t_step` between straight lines fitted separately before and after it.
pub fn piecewise_jump(t: &[f64], y: &[f64], t_step: f64) -> Result<f64> {
    if t.len() != y.len() {
        return Err(Error::LengthMismatch { left: t.len(), right: y.len() });
    }
    let split = t.partition_point(|&v| v < t_step);
    let (a0, a1) = linear_fit(&t[..split], &y[..split])?;
    let (b0, b1) = linear_fit(&t[split..], &y[split..])?;
    Ok((b0 + b1 * t_step) - (a0 + a1 * t_step))
}

/// Sample standard deviation of `a − b`, skipping pairs where either is not finite
/// (dropped cycles are recorded as NaN).
pub fn residual_std(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let d: Vec<f64> = a.iter().zip(b).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(x, y)| x - y).collect();
    std_dev(&d)
}

/// Sample standard deviation.
pub fn std_dev(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 2 });
    }
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    Ok(sqrt(x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)))
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Median; NaN for an empty slice.
pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation from the median (unscaled).
pub fn mad(x: &[f64]) -> f64 {
    let m = median(x);
    let d: Vec<f64> = x.iter().map(|v| (v - m).abs()).collect();
    median(&d)
}

/// `√(total² − component²)`.
pub fn quadrature_subtract(total: f64, component: f64) -> Result<f64> {
    let (t, c) = (total.abs(), component.abs());
    if c > t {
        return Err(Error::InconsistentBudget { total, component });
    }
    Ok(sqrt(t * t - c * c))
}

/// Least-squares fit of `y = √(k·x² + c²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFit {
    pub k: f64,
    pub c2: f64,
    /// Coefficient of determination of the fitted curve against `y`.
    pub r2: f64,
}

/// Fit `y² = k·x² + c²` (linear in `x²`) and score the fit on `y`.
pub fn fit_quadrature_model(x: &[f64], y: &[f64]) -> Result<QuadratureFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 3 });
    }
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let y2: Vec<f64> = y.iter().map(|v| v * v).collect();
    let (c2, k) = linear_fit(&x2, &y2)?;
    let my = mean(y);
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..x.len() {
        let pred = sqrt((k * x2[i] + c2).max(0.0));
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(QuadratureFit { k, c2, r2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Converged,
    Diverged,
}

impl Convergence {
    pub fn is_converged(self) -> bool {
        self == Convergence::Converged
    }
}

/// Diverged when the mean `|b̂ − b|` over the final quarter exceeds a quarter fringe.
pub fn classify_convergence(trace: &[f64], truth_b: f64, fringe: f64) -> Convergence {
    if trace.is_empty() {
        return Convergence::Diverged;
    }
    let tail = &trace[trace.len() - trace.len().div_ceil(4)..];
    let err = tail.iter().map(|b| (b - truth_b).abs()).sum::<f64>() / tail.len() as f64;
    if err.is_finite() && err <= 0.25 * fringe {
        Convergence::Converged
    } else {
        Convergence::Diverged
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NoiseStream;

    fn white(n: usize, std: f64, seed: u64) -> Vec<f64> {
        let mut r = NoiseStream::new(seed, 1);
        (0..n).map(|_| std * r.normal()).collect()
    }

    #[test]
    fn constant_series() {
        let c = allan_deviation(&[3.0; 100], 0.1).unwrap();
        assert!(c.sigma.iter().all(|&s| s == 0.0));
        assert_eq!(fit_white_level(&c, 0.0).unwrap(), 0.0);
        assert!(allan_deviation(&[0.0; 31], 0.1).is_err());
    }

    #[test]
    fn white_noise_scaling() {
        let n = 200_000;
        let x = white(n, 2.0, 3);
        let c = allan_deviation(&x, 0.1).unwrap();
        for (k, &s) in c.sigma.iter().enumerate() {
            let m = c.factor(k);
            if m <= n / 100 {
                let expect = 2.0 / (m as f64).sqrt();
                assert!((s - expect).abs() < 0.1 * expect, "m={m}: {s} vs {expect}");
            }
        }
        let level = fit_white_level(&c, 0.0).unwrap();
        assert!((level - 2.0).abs() < 0.05 * 2.0, "{level}");
        let slope = loglog_slope(&c, 0.0).unwrap();
        assert!((slope + 0.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn drift_grows_linearly() {
        let d = 1e-3;
        let x: Vec<f64> = (0..4096).map(|i| d * i as f64).collect();
        let c = allan_deviation(&x, 1.0).unwrap();
        for (k, &s) in c.sigma.iter().enumerate() {
            let tau = c.factor(k) as f64;
            let expect = d * tau / 2f64.sqrt();
            assert!((s - expect).abs() < 1e-9 * expect.max(1.0), "{s} vs {expect}");
        }
    }

    #[test]
    fn exact_model_fit() {
        let tc = 0.1;
        let a = 3e-5;
        let taus: Vec<f64> = (0..12).map(|k| (1 << k) as f64 * tc).collect();
        let curve = AllanCurve {
            sigma: taus.iter().map(|t| a / t.sqrt()).collect(),
            counts: alloc::vec![100; 12],
            taus,
            n_samples: 10_000,
            cycle_time: tc,
        };
        let level = fit_white_level(&curve, 1.0).unwrap();
        assert!((level - a / tc.sqrt()).abs() < 1e-12 * level);
        assert!(matches!(fit_white_level(&curve, 100.0), Err(Error::InsufficientPoints { .. })));
    }

    #[test]
    fn scale_equivariance_and_self_concatenation() {
        let x = white(50_000, 1.0, 8);
        let c = allan_deviation(&x, 0.1).unwrap();
        let l1 = fit_white_level(&c, 1.0).unwrap();
        let y: Vec<f64> = x.iter().map(|v| 7.5 * v).collect();
        let l2 = fit_white_level(&allan_deviation(&y, 0.1).unwrap(), 1.0).unwrap();
        assert!((l2 - 7.5 * l1).abs() < 1e-9 * l2);
        let mut xx = x.clone();
        xx.extend_from_slice(&x);
        let l3 = fit_white_level(&allan_deviation(&xx, 0.1).unwrap(), 1.0).unwrap();
        assert!((l3 - l1).abs() < 0.1 * l1, "{l3} vs {l1}");
    }

    #[test]
    fn residuals() {
        let a = white(100_000, 3.0, 1);
        let b = white(100_000, 4.0, 2);
        assert_eq!(residual_std(&a, &a).unwrap(), 0.0);
        let r = residual_std(&a, &b).unwrap();
        assert!((r - 5.0).abs() < 0.05 * 5.0);
        let mut c = a.clone();
        c[3] = f64::NAN;
        assert!(residual_std(&c, &b).unwrap().is_finite());
        assert!(residual_std(&a, &b[1..]).is_err());
    }

    #[test]
    fn quadrature() {
        let total = (4.9e-5f64.powi(2) + 3.0e-5f64.powi(2)).sqrt();
        assert!((total - 5.75e-5).abs() < 0.01e-5);
        assert!((quadrature_subtract(total, 3.0e-5).unwrap() - 4.9e-5).abs() < 1e-15);
        assert_eq!(quadrature_subtract(2.0, 0.0).unwrap(), 2.0);
        assert_eq!(quadrature_subtract(2.0, 2.0).unwrap(), 0.0);
        assert!(quadrature_subtract(1.0, 2.0).is_err());
    }

    #[test]
    fn quadrature_model_fit() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.004).collect();
        let y: Vec<f64> = x.iter().map(|v| (4.0e-6 * v * v / 1e-4 + 2.5e-9f64).sqrt()).collect();
        let f = fit_quadrature_model(&x, &y).unwrap();
        assert!(f.r2 > 0.999_999);
        assert!((f.c2 - 2.5e-9).abs() < 1e-15);
    }

    #[test]
    fn convergence() {
        let fringe = 9.75e-4;
        assert_eq!(classify_convergence(&[2e-5; 100], 2e-5, fringe), Convergence::Converged);
        let drift: Vec<f64> = (0..100).map(|i| i as f64 * 2.0 * fringe / 100.0).collect();
        assert_eq!(classify_convergence(&drift, 0.0, fringe), Convergence::Diverged);
        assert_eq!(classify_convergence(&[f64::NAN; 10], 0.0, fringe), Convergence::Diverged);
    }

    #[test]
    fn kink() {
        let t: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|&v| 0.1 * v + if v >= 100.0 { 3.0 } else { 0.0 }).collect();
        assert!((piecewise_jump(&t, &y, 100.0).unwrap() - 3.0).abs() < 1e-9);
        assert!((median(&[3.0, 1.0, 2.0]) - 2.0).abs() < 1e-15);
        assert_eq!(mad(&[1.0, 2.0, 3.0, 4.0, 100.0]), 1.0);
    }
}
