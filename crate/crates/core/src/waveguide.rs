//! Spectral data of the unperturbed Pekeris operator.
//!
//! The ocean layer `[0, d]` has refractive index `n1 > 1` over a homogeneous
//! half-space of index 1, with a pressure-release surface at `x = 0`. For a
//! frequency `omega` the transverse operator has `N` propagating modes
//! (discrete spectrum) and a radiating continuum `gamma in (0, k^2)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::special::sin_over;

/// Geometry, index contrast and frequency of a Pekeris waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideConfig {
    /// Ocean depth `d` in meters.
    pub depth: f64,
    /// Ocean refractive index `n1 > 1`.
    pub n1: f64,
    /// Reference sound speed in m/s.
    #[serde(default = "default_c_bar")]
    pub c_bar: f64,
    /// Angular frequency in rad/s.
    pub omega: f64,
}

fn default_c_bar() -> f64 {
    1500.0
}

impl WaveguideConfig {
    pub fn new(depth: f64, n1: f64, c_bar: f64, omega: f64) -> Result<Self> {
        let cfg = Self { depth, n1, c_bar, omega };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Picks the frequency so that `n1 k d theta = (modes + frac) * pi`,
    /// which yields exactly `modes` propagating modes for `frac in [0, 1)`.
    pub fn with_mode_parameter(depth: f64, n1: f64, c_bar: f64, modes: usize, frac: f64) -> Result<Self> {
        let theta = (1.0 - 1.0 / (n1 * n1)).sqrt();
        let c = (modes as f64 + frac) * PI;
        let k = c / (n1 * depth * theta);
        Self::new(depth, n1, c_bar, k * c_bar)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.depth) {
            return Err(Error::InvalidConfig(format!("depth must be positive, got {}", self.depth)));
        }
        if !(self.n1.is_finite() && self.n1 > 1.0) {
            return Err(Error::InvalidConfig(format!("n1 must exceed 1, got {}", self.n1)));
        }
        if !ok(self.c_bar) {
            return Err(Error::InvalidConfig(format!("c_bar must be positive, got {}", self.c_bar)));
        }
        if !ok(self.omega) {
            return Err(Error::InvalidConfig(format!("omega must be positive, got {}", self.omega)));
        }
        Ok(())
    }

    /// Wavenumber `k = omega / c_bar`.
    pub fn k(&self) -> f64 {
        self.omega / self.c_bar
    }

    /// `theta = sqrt(1 - 1/n1^2)`.
    pub fn theta(&self) -> f64 {
        (1.0 - 1.0 / (self.n1 * self.n1)).sqrt()
    }

    /// The dimensionless mode parameter `n1 k d theta`.
    pub fn mode_parameter(&self) -> f64 {
        self.n1 * self.k() * self.depth * self.theta()
    }

    /// Number of propagating modes, `floor(n1 k d theta / pi)`.
    pub fn mode_count(&self) -> usize {
        (self.mode_parameter() / PI).floor() as usize
    }

    /// Carrier wavelength in the ocean layer, `2 pi c_bar / (n1 omega)`.
    pub fn ocean_wavelength(&self) -> f64 {
        2.0 * PI * self.c_bar / (self.n1 * self.omega)
    }
}

/// One discrete eigenpair of the Pekeris operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatingMode {
    /// 1-based mode number.
    pub index: usize,
    pub sigma: f64,
    pub beta: f64,
    pub zeta: f64,
    pub amp: f64,
}

impl PropagatingMode {
    /// Mass of `phi_j^2` carried by the bottom half-space.
    pub fn tail_mass(&self, depth: f64) -> f64 {
        self.amp * self.amp * self.sigma.sin().powi(2) * depth / (2.0 * self.zeta)
    }
}

/// Quadrature over the radiating continuum in the variable `s = sqrt(gamma)`.
///
/// `weight_s` integrates in `ds`; `weight_gamma = 2 s weight_s` integrates in
/// `d gamma`. Nodes lie strictly inside `(sqrt(xi), k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiationGrid {
    pub s: Vec<f64>,
    pub gamma: Vec<f64>,
    pub weight_s: Vec<f64>,
    pub weight_gamma: Vec<f64>,
}

impl RadiationGrid {
    pub fn new(xi: f64, k: f64, panels: usize, order: usize) -> Self {
        let lo = xi.max(0.0).sqrt();
        let mut s = Vec::new();
        let mut ws = Vec::new();
        if panels > 0 && order > 0 && lo < k {
            let gl = GaussLegendre::new(order);
            let h = (k - lo) / panels as f64;
            for p in 0..panels {
                let a = lo + p as f64 * h;
                for (x, w) in gl.mapped(a, a + h) {
                    s.push(x);
                    ws.push(w);
                }
            }
        }
        let gamma = s.iter().map(|v| v * v).collect();
        let weight_gamma = s.iter().zip(&ws).map(|(v, w)| 2.0 * v * w).collect();
        Self { s, gamma, weight_s: ws, weight_gamma }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Options controlling the continuum discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumOptions {
    /// Lower cutoff `xi = xi_factor * k^2` of the radiating band.
    pub xi_factor: f64,
    pub radiation_panels: usize,
    pub radiation_order: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { xi_factor: 1e-6, radiation_panels: 8, radiation_order: 16 }
    }
}

/// Discrete spectrum plus a quadrature of the radiating continuum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub config: WaveguideConfig,
    pub modes: Vec<PropagatingMode>,
    pub radiation: RadiationGrid,
    pub xi_cutoff: f64,
}

/// Dispersion function in the pole-free form
/// `F(y) = sin(y) sqrt(C^2 - y^2) + y cos(y)`.
pub fn dispersion_residual(c: f64, y: f64) -> f64 {
    y.sin() * (c * c - y * y).max(0.0).sqrt() + y * y.cos()
}

fn dispersion_slope(c: f64, y: f64) -> f64 {
    let z = (c * c - y * y).max(f64::MIN_POSITIVE).sqrt();
    let (s, co) = y.sin_cos();
    co * z - s * y / z + co - y * s
}

/// Root of `F` in the open interval `(pi/2 + (j-1) pi, j pi]`.
///
/// Bisection keeps the bracket; a Newton step is accepted only when it lands
/// inside the current bracket.
fn bracketed_root(c: f64, j: usize) -> Result<f64> {
    let mut lo = FRAC_PI_2 + (j as f64 - 1.0) * PI;
    let mut hi = (j as f64 * PI).min(c);
    let f_lo = dispersion_residual(c, lo);
    let mut f_hi = dispersion_residual(c, hi);
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::ConvergenceFailure { op: "solve_dispersion", mode: j });
    }
    let tol = 1e-12 * c.max(1.0);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..300 {
        let f = dispersion_residual(c, x);
        if f == 0.0 {
            return Ok(x);
        }
        if f.signum() == f_hi.signum() {
            hi = x;
            f_hi = f;
        } else {
            lo = x;
        }
        let df = dispersion_slope(c, x);
        let newton = x - f / df;
        let next = if df.is_finite() && df != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if (step <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * hi)
            && dispersion_residual(c, x).abs() <= tol
        {
            return Ok(x);
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            let r = dispersion_residual(c, x).abs();
            return if r <= tol { Ok(x) } else { Err(Error::ConvergenceFailure { op: "solve_dispersion", mode: j }) };
        }
    }
    Err(Error::ConvergenceFailure { op: "solve_dispersion", mode: j })
}

/// Solves the dispersion relation with the default continuum options.
pub fn solve_dispersion(config: &WaveguideConfig) -> Result<ModeSet> {
    solve_dispersion_with(config, &SpectrumOptions::default())
}

/// All `N = floor(n1 k d theta / pi)` propagating roots plus the radiating grid.
///
/// When the fractional part of `n1 k d theta / pi` exceeds one half there is a
/// further root just below the cutoff in `(N pi + pi/2, n1 k d theta)`; it is
/// not part of the returned set.
pub fn solve_dispersion_with(config: &WaveguideConfig, opts: &SpectrumOptions) -> Result<ModeSet> {
    config.validate()?;
    let c = config.mode_parameter();
    if c <= FRAC_PI_2 {
        return Err(Error::NoPropagatingModes(c));
    }
    let n = config.mode_count();
    if n == 0 {
        return Err(Error::NoPropagatingModes(c));
    }
    let d = config.depth;
    let k = config.k();
    let nk = config.n1 * k;
    let mut modes = Vec::with_capacity(n);
    for j in 1..=n {
        let sigma = bracketed_root(c, j)?;
        let beta = (nk * nk - (sigma / d).powi(2)).sqrt();
        let zeta = (c * c - sigma * sigma).sqrt();
        let denom = 1.0 + sigma.sin().powi(2) / zeta - (2.0 * sigma).sin() / (2.0 * sigma);
        let amp = (2.0 / d / denom).sqrt();
        modes.push(PropagatingMode { index: j, sigma, beta, zeta, amp });
    }
    let xi = opts.xi_factor * k * k;
    let radiation = RadiationGrid::new(xi, k, opts.radiation_panels, opts.radiation_order);
    Ok(ModeSet { config: *config, modes, radiation, xi_cutoff: xi })
}

/// Sup-norm statistics of the root spacing against the bounded-waveguide
/// values `sigma_j ~ j pi`. `None` marks an empty index range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingReport {
    pub alpha: f64,
    pub n: usize,
    /// `sup |sigma_{j+1} - sigma_j - pi|` over `j <= N - [N^alpha] - 1`.
    pub first_difference: Option<f64>,
    /// `sup |sigma_{j+2} - 2 sigma_{j+1} + sigma_j|` over `j <= N - [N^alpha] - 2`.
    pub second_difference: Option<f64>,
    /// `sup |sigma_j - j pi|` over `j <= N^alpha`.
    pub low_order_offset: Option<f64>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn k(&self) -> f64 {
        self.config.k()
    }

    pub fn depth(&self) -> f64 {
        self.config.depth
    }

    pub fn mode(&self, j: usize) -> Result<&PropagatingMode> {
        if j == 0 || j > self.modes.len() {
            return Err(Error::IndexOutOfRange { op: "mode", index: j, max: self.modes.len() });
        }
        Ok(&self.modes[j - 1])
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.sigma).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.beta).collect()
    }

    /// `phi_j(x)` for `x >= 0`.
    pub fn mode_shape(&self, j: usize, x: f64) -> Result<f64> {
        let m = self.mode(j)?;
        Ok(eval_mode(m, self.config.depth, x))
    }

    /// `phi_j(x)` restricted to the ocean layer, skipping the index check.
    pub(crate) fn ocean_shape(&self, j: usize, x: f64) -> f64 {
        let m = &self.modes[j - 1];
        m.amp * (m.sigma * x / self.config.depth).sin()
    }

    /// Generalized radiating mode `phi_gamma(x)` for `xi < gamma < k^2`.
    pub fn radiating_shape(&self, gamma: f64, x: f64) -> Result<f64> {
        let k2 = self.k().powi(2);
        if !(gamma > self.xi_cutoff && gamma < k2) {
            return Err(Error::SpectralParameterOutOfRange {
                op: "radiating_shape",
                gamma,
                lo: self.xi_cutoff,
                hi: k2,
            });
        }
        Ok(radiating_value(&self.config, gamma, x))
    }

    /// Sup-norm spacing statistics for exponent `alpha in (1/3, 1)`.
    pub fn asymptotic_spacing_report(&self, alpha: f64) -> SpacingReport {
        let sig = self.sigmas();
        let n = sig.len();
        let na = (n as f64).powf(alpha).floor() as usize;
        let sup =
            |it: &mut dyn Iterator<Item = f64>| it.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        let first_end = n.saturating_sub(na + 1);
        let second_end = n.saturating_sub(na + 2);
        let first = sup(&mut (1..=first_end).filter(|&j| j < n).map(|j| (sig[j] - sig[j - 1] - PI).abs()));
        let second =
            sup(&mut (1..=second_end).filter(|&j| j + 1 < n).map(|j| (sig[j + 1] - 2.0 * sig[j] + sig[j - 1]).abs()));
        let low = sup(&mut (1..=na.min(n)).map(|j| (sig[j - 1] - j as f64 * PI).abs()));
        SpacingReport { alpha, n, first_difference: first, second_difference: second, low_order_offset: low }
    }

    /// `(beta_j', beta_j'')`, derivatives in `omega`, by implicit
    /// differentiation of the dispersion relation.
    pub fn beta_derivatives(&self, j: usize) -> Result<(f64, f64)> {
        let m = self.mode(j)?;
        Ok(beta_derivatives(&self.config, m))
    }
}

pub(crate) fn eval_mode(m: &PropagatingMode, d: f64, x: f64) -> f64 {
    if x <= d {
        m.amp * (m.sigma * x / d).sin()
    } else {
        m.amp * m.sigma.sin() * (-m.zeta * (x - d) / d).exp()
    }
}

pub(crate) fn radiating_amp(cfg: &WaveguideConfig, gamma: f64) -> (f64, f64, f64) {
    let d = cfg.depth;
    let k2 = cfg.k().powi(2);
    let nk2 = cfg.n1 * cfg.n1 * k2;
    let eta = d * (nk2 - gamma).sqrt();
    let xi = d * (k2 - gamma).max(0.0).sqrt();
    let (se, ce) = eta.sin_cos();
    let amp = (d * xi / (PI * (xi * xi * se * se + eta * eta * ce * ce))).sqrt();
    (amp, eta, xi)
}

pub(crate) fn radiating_value(cfg: &WaveguideConfig, gamma: f64, x: f64) -> f64 {
    let d = cfg.depth;
    let (amp, eta, xi) = radiating_amp(cfg, gamma);
    if x <= d {
        amp * (eta * x / d).sin()
    } else {
        let s = (x - d) / d;
        let (se, ce) = eta.sin_cos();
        amp * (se * (xi * s).cos() + eta * ce * sin_over(xi, s))
    }
}

fn beta_derivatives(cfg: &WaveguideConfig, m: &PropagatingMode) -> (f64, f64) {
    let d = cfg.depth;
    let c = cfg.mode_parameter();
    let k = cfg.k();
    let dk = 1.0 / cfg.c_bar;
    let dc = cfg.n1 * d * cfg.theta() / cfg.c_bar;
    let s = m.sigma;
    let z = (c * c - s * s).sqrt();
    let (sn, cs) = s.sin_cos();
    let f_s = cs * z - sn * s / z + cs - s * sn;
    let f_c = sn * c / z;
    let z3 = z * z * z;
    let f_ss = -sn * z - 2.0 * cs * s / z - sn * (1.0 / z + s * s / z3) - 2.0 * sn - s * cs;
    let f_sc = cs * c / z + sn * s * c / z3;
    let f_cc = -sn * s * s / z3;
    let ds = -f_c * dc / f_s;
    let dds = -(f_ss * ds * ds + 2.0 * f_sc * ds * dc + f_cc * dc * dc) / f_s;
    let n2 = cfg.n1 * cfg.n1;
    let beta = m.beta;
    let db = (n2 * k * dk - s * ds / (d * d)) / beta;
    let ddb = (n2 * dk * dk - (ds * ds + s * dds) / (d * d) - db * db) / beta;
    (db, ddb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;

    fn reference() -> WaveguideConfig {
        // k = pi with c_bar = 1
        WaveguideConfig::new(20.0, 2.0, 1.0, PI).unwrap()
    }

    #[test]
    fn mode_count_and_theta() {
        let cfg = reference();
        assert!((cfg.theta() - 0.866_025_403_784_438_6).abs() < 1e-15);
        assert_eq!(cfg.mode_count(), 34);
        let ms = solve_dispersion(&cfg).unwrap();
        assert_eq!(ms.len(), 34);
    }

    #[test]
    fn first_root_matches_bisection_oracle() {
        let cfg = reference();
        let c = cfg.mode_parameter();
        // plain bisection on the bracket, independent of the Newton path
        let (mut lo, mut hi) = (FRAC_PI_2, PI);
        let flo = dispersion_residual(c, lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dispersion_residual(c, mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let ms = solve_dispersion(&cfg).unwrap();
        assert!((ms.modes[0].sigma - oracle).abs() < 1e-12);
        assert!(oracle < PI && oracle > 3.1);
        // frozen golden value from the bisection oracle
        assert!((oracle - 3.112_984_116_408_16).abs() < 1e-11, "{oracle:.15}");
    }

    #[test]
    fn roots_bracketed_with_small_residual_and_ordered_betas() {
        let cfg = reference();
        let ms = solve_dispersion(&cfg).unwrap();
        let c = cfg.mode_parameter();
        let k = cfg.k();
        for (i, m) in ms.modes.iter().enumerate() {
            let j = (i + 1) as f64;
            assert!(m.sigma > FRAC_PI_2 + (j - 1.0) * PI && m.sigma < FRAC_PI_2 + j * PI);
            assert!(dispersion_residual(c, m.sigma).abs() < 1e-12 * c, "mode {}", i + 1);
            assert!(m.beta > k && m.beta < 2.0 * k);
            let lhs = m.zeta * m.zeta;
            let rhs = (m.beta * cfg.depth).powi(2) - (k * cfg.depth).powi(2);
            assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
        }
        for w in ms.modes.windows(2) {
            assert!(w[0].beta > w[1].beta);
        }
    }

    #[test]
    fn no_propagating_modes_error() {
        let cfg = WaveguideConfig::new(20.0, 2.0, 1500.0, 1.0).unwrap();
        assert!(matches!(solve_dispersion(&cfg), Err(Error::NoPropagatingModes(_))));
    }

    #[test]
    fn mode_shape_boundary_and_continuity() {
        let ms = solve_dispersion(&reference()).unwrap();
        let d = ms.depth();
        for j in 1..=ms.len() {
            assert_eq!(ms.mode_shape(j, 0.0).unwrap(), 0.0);
            let a = ms.mode_shape(j, d).unwrap();
            let b = ms.mode_shape(j, f64::from_bits(d.to_bits() + 1)).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        assert!(matches!(ms.mode_shape(0, 1.0), Err(Error::IndexOutOfRange { .. })));
        assert!(ms.mode_shape(35, 1.0).is_err());
    }

    #[test]
    fn quadrature_normalization_matches_closed_form() {
        let ms = solve_dispersion(&reference()).unwrap();
        let d = ms.depth();
        for j in [1usize, 10, 34] {
            let m = ms.modes[j - 1];
            let (inner, _) = integrate_adaptive(|x| eval_mode(&m, d, x).powi(2), 0.0, d, 8, 1e-13);
            let span = 60.0 * d / m.zeta;
            let (outer, _) = integrate_adaptive(|x| eval_mode(&m, d, x).powi(2), d, d + span, 4, 1e-13);
            assert!((inner + outer - 1.0).abs() < 1e-8, "mode {j}: {}", inner + outer);
            assert!((outer - m.tail_mass(d)).abs() < 1e-10);
        }
    }

    #[test]
    fn radiating_shape_matching_conditions() {
        let ms = solve_dispersion(&reference()).unwrap();
        let d = ms.depth();
        let k2 = ms.k().powi(2);
        for frac in [0.1, 0.5, 0.9, 1.0 - 1e-12] {
            let g = frac * k2;
            assert_eq!(ms.radiating_shape(g, 0.0).unwrap(), 0.0);
            let f = |x: f64| radiating_value(&ms.config, g, x);
            let left = ms.radiating_shape(g, d).unwrap();
            let right = f(f64::from_bits(d.to_bits() + 1));
            assert!((left - right).abs() < 1e-12);
            // second-order one-sided differences from each layer
            let h = 1e-5;
            let dl = (3.0 * f(d) - 4.0 * f(d - h) + f(d - 2.0 * h)) / (2.0 * h);
            let dr = (-3.0 * f(d) + 4.0 * f(d + h) - f(d + 2.0 * h)) / (2.0 * h);
            assert!((dl - dr).abs() < 1e-7 * dl.abs().max(1e-3), "{frac}: {dl} vs {dr}");
        }
        assert!(ms.radiating_shape(k2, 1.0).is_err());
        assert!(ms.radiating_shape(0.0, 1.0).is_err());
    }

    #[test]
    fn radiating_shape_near_band_edge_uses_series_limit() {
        let ms = solve_dispersion(&reference()).unwrap();
        let cfg = ms.config;
        let d = cfg.depth;
        let k2 = cfg.k().powi(2);
        let g = k2 * (1.0 - 1e-14);
        let (amp, eta, xi) = radiating_amp(&cfg, g);
        assert!(xi > 0.0 && xi < 1e-4);
        for x in [d + 1.0, d + 10.0, d + 100.0] {
            let v = ms.radiating_shape(g, x).unwrap();
            assert!(v.is_finite());
            let s = (x - d) / d;
            // leading-order expansion: sin(eta) + eta cos(eta) s
            let series = amp * (eta.sin() + eta * eta.cos() * s);
            assert!((v - series).abs() < 1e-6 * amp.max(1e-300) * (1.0 + eta * s), "{v} {series}");
        }
    }

    #[test]
    fn spacing_report_empty_for_tiny_sets() {
        let cfg = WaveguideConfig::with_mode_parameter(20.0, 2.0, 1500.0, 3, 0.3).unwrap();
        let ms = solve_dispersion(&cfg).unwrap();
        assert_eq!(ms.len(), 3);
        let r = ms.asymptotic_spacing_report(0.5);
        // [3^0.5] = 1 -> first range is j <= 1, second range is empty
        assert!(r.second_difference.is_none());
        let cfg2 = WaveguideConfig::with_mode_parameter(20.0, 2.0, 1500.0, 2, 0.3).unwrap();
        let r2 = solve_dispersion(&cfg2).unwrap().asymptotic_spacing_report(0.5);
        assert!(r2.first_difference.is_none() && r2.second_difference.is_none());
    }

    #[test]
    fn beta_derivatives_match_central_differences() {
        let cfg = WaveguideConfig::new(20.0, 2.0, 1500.0, 300.0).unwrap();
        let ms = solve_dispersion(&cfg).unwrap();
        let h = cfg.omega * 1e-5;
        let up = solve_dispersion(&WaveguideConfig { omega: cfg.omega + h, ..cfg }).unwrap();
        let dn = solve_dispersion(&WaveguideConfig { omega: cfg.omega - h, ..cfg }).unwrap();
        for j in 1..=ms.len() {
            let (db, ddb) = ms.beta_derivatives(j).unwrap();
            let fd1 = (up.modes[j - 1].beta - dn.modes[j - 1].beta) / (2.0 * h);
            assert!((db - fd1).abs() < 1e-7 * fd1.abs(), "mode {j}: {db} vs {fd1}");
            let fd2 = (up.modes[j - 1].beta - 2.0 * ms.modes[j - 1].beta + dn.modes[j - 1].beta) / (h * h);
            assert!((ddb - fd2).abs() < 1e-3 * ddb.abs().max(1e-12), "mode {j}: {ddb} vs {fd2}");
        }
    }
}
