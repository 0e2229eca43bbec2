//! Time-reversal refocusing: the mirror coupling matrix, transverse profiles
//! of the refocused field, arrival times and dispersion kernels, and the
//! resolution metrics of a focal spot.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::power::PowerEvolution;
use crate::special::{sinc, sinc_half_max_root};
use crate::waveguide::{eval_mode, ModeSet};

/// Mirror `[d_M - lambda^alpha_M d1~, d_M + lambda^alpha_M d2~]`, with
/// `lambda` the carrier wavelength in the ocean layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorSpec {
    pub center: f64,
    pub d_tilde_1: f64,
    pub d_tilde_2: f64,
    pub alpha_m: f64,
}

impl MirrorSpec {
    /// Mirror centered at `10` with half-extent factors `5` (depth `20`).
    pub fn reference(alpha_m: f64) -> Self {
        Self { center: 10.0, d_tilde_1: 5.0, d_tilde_2: 5.0, alpha_m }
    }

    pub fn bounds(&self, wavelength: f64) -> (f64, f64) {
        let s = wavelength.powf(self.alpha_m);
        (self.center - s * self.d_tilde_1, self.center + s * self.d_tilde_2)
    }

    /// `(d1~ + d2~) / d`, the amplitude of the limiting profile.
    pub fn aperture_ratio(&self, depth: f64) -> f64 {
        (self.d_tilde_1 + self.d_tilde_2) / depth
    }

    pub fn validate(&self, depth: f64, wavelength: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&self.alpha_m) {
            return Err(Error::InvalidConfig(format!("alpha_m must lie in [0, 1], got {}", self.alpha_m)));
        }
        if !(self.d_tilde_1 >= 0.0 && self.d_tilde_2 >= 0.0) {
            return Err(Error::InvalidConfig("mirror half-extents must be nonnegative".into()));
        }
        let (d1, d2) = self.bounds(wavelength);
        if !(d1 >= 0.0 && d2 <= depth && d1 <= d2) {
            return Err(Error::MirrorOutsideOcean { d1, d2, depth });
        }
        Ok((d1, d2))
    }
}

/// `int_{d1}^{d2} cos(c x) dx`.
fn cos_integral(c: f64, d1: f64, d2: f64) -> f64 {
    let w = d2 - d1;
    w * (c * (d1 + d2) / 2.0).cos() * sinc(c * w / 2.0)
}

/// `M_jl = int_{d1}^{d2} phi_j phi_l dx` over the mirror, from the exact
/// antiderivative of the sine products.
pub fn mirror_matrix(ms: &ModeSet, mirror: &MirrorSpec) -> Result<DMatrix<f64>> {
    let d = ms.depth();
    let (d1, d2) = mirror.validate(d, ms.config.ocean_wavelength())?;
    let n = ms.len();
    Ok(DMatrix::from_fn(n, n, |j, l| {
        let (a, b) = (&ms.modes[j], &ms.modes[l]);
        let (p, q) = (a.sigma / d, b.sigma / d);
        0.5 * a.amp * b.amp * (cos_integral(p - q, d1, d2) - cos_integral(p + q, d1, d2))
    }))
}

/// The closed form printed with the product-to-sum expansion, which drops the
/// factor `1/2` and so equals `2 M`.
pub fn mirror_matrix_closed_form(ms: &ModeSet, mirror: &MirrorSpec) -> Result<DMatrix<f64>> {
    let d = ms.depth();
    let (d1, d2) = mirror.validate(d, ms.config.ocean_wavelength())?;
    let n = ms.len();
    let (mid, half) = ((d2 + d1) / (2.0 * d), (d2 - d1) / (2.0 * d));
    Ok(DMatrix::from_fn(n, n, |j, l| {
        let (a, b) = (&ms.modes[j], &ms.modes[l]);
        let (m, p) = (a.sigma - b.sigma, a.sigma + b.sigma);
        (d2 - d1) * a.amp * b.amp * ((m * mid).cos() * sinc(m * half) - (p * mid).cos() * sinc(p * half))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `H` as defined, with the global factor `1/4`.
    Raw,
    /// `2 lambda^(1 - alpha_M) / theta` times `H`, which tends to
    /// `((d1~ + d2~) / d) sinc(2 pi x)` in a homogeneous waveguide. The factor
    /// `2` accounts for the closed-form mirror convention.
    #[default]
    ApertureScaled,
    /// Continuum kernel `int_0^1 T_1 cos(2 pi u x) du`.
    Continuum,
}

/// Transverse profile sampled at `x0 + (lambda / theta) x_tilde`.
///
/// The physical values are `values[i] * exp(log_scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefocusProfile {
    pub x_tilde: Vec<f64>,
    pub values: Vec<f64>,
    pub log_scale: f64,
    pub distance: f64,
    pub normalization: Normalization,
}

impl RefocusProfile {
    pub fn scaled_values(&self) -> Vec<f64> {
        let s = self.log_scale.exp();
        self.values.iter().map(|v| v * s).collect()
    }
}

/// Symmetric grid of `points` offsets on `[-half_width, half_width]`.
pub fn x_tilde_grid(half_width: f64, points: usize) -> Vec<f64> {
    let n = points.max(2) - 1;
    (0..=n).map(|i| -half_width + 2.0 * half_width * i as f64 / n as f64).collect()
}

/// Default grid: `[-3, 3]` at 601 points.
pub fn default_x_tilde() -> Vec<f64> {
    x_tilde_grid(3.0, 601)
}

fn normalization_factor(ms: &ModeSet, mirror: &MirrorSpec, norm: Normalization) -> f64 {
    match norm {
        Normalization::Raw | Normalization::Continuum => 1.0,
        Normalization::ApertureScaled => {
            2.0 * ms.config.ocean_wavelength().powf(1.0 - mirror.alpha_m) / ms.config.theta()
        }
    }
}

fn check_source(ms: &ModeSet, x0: f64) -> Result<()> {
    if !(x0 > 0.0 && x0 < ms.depth()) {
        return Err(Error::InvalidConfig(format!("source depth {x0} must lie inside (0, {})", ms.depth())));
    }
    Ok(())
}

/// `sum_l w_l phi_l(x0) phi_l(x0 + (lambda / theta) x~)`, in parallel over
/// the offsets. Points above the surface are rejected.
fn mode_sum(ms: &ModeSet, weights: &[f64], x0: f64, x_tilde: &[f64]) -> Result<Vec<f64>> {
    let step = ms.config.ocean_wavelength() / ms.config.theta();
    if let Some(x) = x_tilde.iter().map(|t| x0 + step * t).find(|x| *x < 0.0) {
        return Err(Error::InvalidConfig(format!("profile point {x} lies above the surface")));
    }
    let d = ms.depth();
    let at_source: Vec<f64> = ms.modes.iter().zip(weights).map(|(m, w)| w * eval_mode(m, d, x0)).collect();
    Ok(x_tilde
        .par_iter()
        .map(|t| {
            let x = x0 + step * t;
            ms.modes.iter().zip(&at_source).map(|(m, a)| a * eval_mode(m, d, x)).sum()
        })
        .collect())
}

/// `(1/4) sum_j M_jj phi_j(x0) phi_j(x)` in a homogeneous waveguide.
pub fn homogeneous_profile(
    ms: &ModeSet,
    mirror: &MirrorSpec,
    x0: f64,
    x_tilde: &[f64],
    norm: Normalization,
) -> Result<RefocusProfile> {
    check_source(ms, x0)?;
    let m = mirror_matrix(ms, mirror)?;
    let f = normalization_factor(ms, mirror, norm);
    let w: Vec<f64> = (0..ms.len()).map(|j| 0.25 * f * m[(j, j)]).collect();
    Ok(RefocusProfile {
        x_tilde: x_tilde.to_vec(),
        values: mode_sum(ms, &w, x0, x_tilde)?,
        log_scale: 0.0,
        distance: 0.0,
        normalization: norm,
    })
}

/// `(1/4) sum_{j,l} M_jj T_j^l(L) phi_l(x0) phi_l(x)` after a random section
/// of length `distance`.
pub fn random_profile(
    ms: &ModeSet,
    mirror: &MirrorSpec,
    power: &PowerEvolution,
    distance: f64,
    x0: f64,
    x_tilde: &[f64],
    norm: Normalization,
) -> Result<RefocusProfile> {
    check_source(ms, x0)?;
    if power.n() != ms.len() {
        return Err(Error::InvalidConfig(format!("power evolution has {} modes, waveguide {}", power.n(), ms.len())));
    }
    let i = power.checkpoint(distance)?;
    let m = mirror_matrix(ms, mirror)?;
    let f = normalization_factor(ms, mirror, norm);
    let t = &power.matrices[i];
    let w: Vec<f64> =
        (0..ms.len()).map(|l| 0.25 * f * (0..ms.len()).map(|j| m[(j, j)] * t[(j, l)]).sum::<f64>()).collect();
    Ok(RefocusProfile {
        x_tilde: x_tilde.to_vec(),
        values: mode_sum(ms, &w, x0, x_tilde)?,
        log_scale: power.log_scale[i],
        distance,
        normalization: norm,
    })
}

/// `sup |discrete - ratio * continuum| / sup |ratio * continuum|` on the
/// common grid, with both amplitudes restored.
pub fn continuum_discrepancy(discrete: &RefocusProfile, continuum: &RefocusProfile, ratio: f64) -> Result<f64> {
    if discrete.x_tilde.len() != continuum.x_tilde.len()
        || discrete.x_tilde.iter().zip(&continuum.x_tilde).any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::InvalidConfig("profiles are sampled on different grids".into()));
    }
    // common scale first, so that long distances do not underflow
    let rel = (discrete.log_scale - continuum.log_scale).exp();
    let mut err = 0.0f64;
    let mut size = 0.0f64;
    for (d, c) in discrete.values.iter().zip(&continuum.values) {
        err = err.max((d * rel - ratio * c).abs());
        size = size.max((ratio * c).abs());
    }
    Ok(err / size)
}

/// `t_jm = t1 + (beta'_m - beta'_j) L` for all ordered pairs.
pub fn arrival_times(ms: &ModeSet, distance: f64, t1: f64) -> Result<DMatrix<f64>> {
    let slow: Vec<f64> = (1..=ms.len()).map(|j| ms.beta_derivatives(j).map(|d| d.0)).collect::<Result<_>>()?;
    let n = ms.len();
    Ok(DMatrix::from_fn(n, n, |j, m| if j == m { t1 } else { t1 + (slow[m] - slow[j]) * distance }))
}

/// Pulse envelope on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub omega0: f64,
    #[serde(default = "default_q")]
    pub q: f64,
}

fn default_q() -> f64 {
    0.5
}

impl PulseSpec {
    /// `exp(-t^2 / 2)` on `n` samples centered at `t = 0`.
    pub fn gaussian(n: usize, sample_rate: f64, omega0: f64) -> Self {
        let samples = (0..n).map(|i| (-(pulse_time(i, n, sample_rate)).powi(2) / 2.0).exp()).collect();
        Self { samples, sample_rate, omega0, q: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() || self.samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("pulse samples must be finite and nonempty".into()));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidConfig(format!("bandwidth exponent must lie in (0, 1), got {}", self.q)));
        }
        Ok(())
    }

    pub fn time(&self, i: usize) -> f64 {
        pulse_time(i, self.samples.len(), self.sample_rate)
    }
}

fn pulse_time(i: usize, n: usize, rate: f64) -> f64 {
    (i as f64 - (n / 2) as f64) / rate
}

/// Applies the multiplier `exp(i phi w^2 / 2)` to the spectrum of `samples`.
pub fn quadratic_phase_filter(samples: &[Complex64], sample_rate: f64, phi: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    if phi != 0.0 {
        let dw = 2.0 * PI * sample_rate / n as f64;
        for (k, v) in buf.iter_mut().enumerate() {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = kk * dw;
            *v *= Complex64::from_polar(1.0, phi * w * w / 2.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= inv);
    buf
}

/// `K_{j,m,L} * f`, the pulse dispersed by the group velocity dispersion
/// mismatch `(beta''_j - beta''_m) L`. The diagonal kernel is the identity.
pub fn dispersion_kernel(ms: &ModeSet, j: usize, m: usize, distance: f64, pulse: &PulseSpec) -> Result<Vec<Complex64>> {
    pulse.validate()?;
    let input: Vec<Complex64> = pulse.samples.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    if j == m {
        ms.mode(j)?;
        return Ok(input);
    }
    let (_, bj) = ms.beta_derivatives(j)?;
    let (_, bm) = ms.beta_derivatives(m)?;
    Ok(quadratic_phase_filter(&input, pulse.sample_rate, (bj - bm) * distance))
}

/// Resolution metrics of a focal spot, in units of `lambda / theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefocusMetrics {
    /// Value at the offset nearest zero, amplitude restored.
    pub peak: f64,
    pub log_abs_peak: f64,
    pub fwhm: f64,
    /// Offset of the first zero crossing (or first minimum) to the right.
    pub first_null: f64,
    pub fwhm_over_sinc: f64,
}

/// FWHM of `sinc(2 pi x)`: `2 y / (2 pi)` with `sin(y)/y = 1/2`.
pub fn sinc_fwhm() -> f64 {
    sinc_half_max_root() / PI
}

fn crossing(x: &[f64], v: &[f64], from: usize, level: f64, step: isize) -> Option<f64> {
    let mut i = from as isize;
    loop {
        let k = i + step;
        if k < 0 || k as usize >= v.len() {
            return None;
        }
        let (a, b) = (v[i as usize] - level, v[k as usize] - level);
        if b <= 0.0 {
            let t = a / (a - b);
            let (xa, xb) = (x[i as usize], x[k as usize]);
            return Some(xa + t * (xb - xa));
        }
        i = k;
    }
}

pub fn refocus_metrics(profile: &RefocusProfile) -> Result<RefocusMetrics> {
    let x = &profile.x_tilde;
    if x.len() < 5 {
        return Err(Error::LobeNotResolved("fewer than 5 grid points".into()));
    }
    let c = x.iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|p| p.0).unwrap_or(0);
    let peak_raw = profile.values[c];
    if peak_raw == 0.0 || !peak_raw.is_finite() {
        return Err(Error::LobeNotResolved("zero or non-finite peak".into()));
    }
    // work on the sign-normalized profile so that metrics are scale free
    let v: Vec<f64> = profile.values.iter().map(|y| y / peak_raw).collect();
    let right = crossing(x, &v, c, 0.5, 1)
        .ok_or_else(|| Error::LobeNotResolved("no half-maximum crossing to the right".into()))?;
    let left = crossing(x, &v, c, 0.5, -1)
        .ok_or_else(|| Error::LobeNotResolved("no half-maximum crossing to the left".into()))?;
    let h = (x[1] - x[0]).abs();
    if right - x[c] < 2.0 * h || x[c] - left < 2.0 * h {
        return Err(Error::LobeNotResolved(format!("half lobe spans fewer than two cells of width {h}")));
    }
    let mut first_null = None;
    for i in c..v.len() - 1 {
        if v[i + 1] <= 0.0 {
            let t = v[i] / (v[i] - v[i + 1]);
            first_null = Some(x[i] + t * (x[i + 1] - x[i]) - x[c]);
            break;
        }
        if i > c && v[i] <= v[i - 1] && v[i] <= v[i + 1] {
            first_null = Some(x[i] - x[c]);
            break;
        }
    }
    let first_null = first_null.ok_or_else(|| Error::LobeNotResolved("no null inside the grid".into()))?;
    let fwhm = right - left;
    Ok(RefocusMetrics {
        peak: peak_raw * profile.log_scale.exp(),
        log_abs_peak: peak_raw.abs().ln() + profile.log_scale,
        fwhm,
        first_null,
        fwhm_over_sinc: fwhm / sinc_fwhm(),
    })
}
