//! Continuum limit of the nearest-neighbor power equations.
//!
//! For a large number of modes, the mean power `T_1(z, u)` of mode `[N u]`
//! solves `dT/dz = d/du (a_inf(u) dT/du)` on `u in [0, 1]` with a reflecting
//! top `dT/du(z, 0) = 0`, an absorbing or reflecting bottom at `u = 1`, and
//! `T(0, u) = 1`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::medium::{CouplingMatrices, MediumStats, OverlapPlan};
use crate::refocus::{Normalization, RefocusProfile};
use crate::tridiag::{solve_spd, SymTridiag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BottomBoundary {
    /// `T(z, 1) = 0`: radiative loss through the bottom.
    #[default]
    Absorbing,
    /// `dT/du(z, 1) = 0`: no loss.
    Reflecting,
}

/// Integration in `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeScheme {
    /// Exact exponential of the semi-discrete operator at every checkpoint.
    #[default]
    Exponential,
    ImplicitEuler {
        dz: f64,
    },
    /// Crank-Nicolson, started with two implicit Euler half steps.
    CrankNicolson {
        dz: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionConfig {
    pub a0: f64,
    /// Longitudinal decorrelation rate.
    pub a: f64,
    pub depth: f64,
    pub n1: f64,
    #[serde(default)]
    pub bottom: BottomBoundary,
    #[serde(default = "default_cells")]
    pub cells: usize,
    pub z_checkpoints: Vec<f64>,
    #[serde(default)]
    pub scheme: TimeScheme,
    /// When set, the solve is repeated on half the cells and the Richardson
    /// error estimate must stay below this sup-norm tolerance.
    #[serde(default)]
    pub grid_tolerance: Option<f64>,
}

fn default_cells() -> usize {
    1024
}

impl DiffusionConfig {
    /// `a0 = 1`, `a = 1`, `n1 = 2`, `d = 20`, absorbing bottom.
    pub fn reference(z_checkpoints: Vec<f64>) -> Self {
        Self {
            a0: 1.0,
            a: 1.0,
            depth: 20.0,
            n1: 2.0,
            bottom: BottomBoundary::Absorbing,
            cells: default_cells(),
            z_checkpoints,
            scheme: TimeScheme::Exponential,
            grid_tolerance: None,
        }
    }

    pub fn theta(&self) -> f64 {
        (1.0 - 1.0 / (self.n1 * self.n1)).sqrt()
    }

    /// `c` in `a_inf(u) = a0 / (1 - c u^2)`.
    pub fn curvature(&self) -> f64 {
        (1.0 - PI * PI / (self.a * self.a * self.depth * self.depth)) * self.theta().powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a0.is_finite() && self.a0 > 0.0) {
            return Err(Error::InvalidConfig(format!("a0 must be positive (a0 = {} disables diffusion)", self.a0)));
        }
        for (name, v) in [("a", self.a), ("depth", self.depth)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.n1.is_finite() && self.n1 > 1.0) {
            return Err(Error::InvalidConfig(format!("n1 must exceed 1, got {}", self.n1)));
        }
        if self.cells < 4 {
            return Err(Error::InvalidConfig("at least 4 cells are required".into()));
        }
        if self.z_checkpoints.iter().any(|z| !(z.is_finite() && *z >= 0.0)) {
            return Err(Error::InvalidConfig("checkpoints must be finite and nonnegative".into()));
        }
        match self.scheme {
            TimeScheme::ImplicitEuler { dz } | TimeScheme::CrankNicolson { dz } if !(dz.is_finite() && dz > 0.0) => {
                return Err(Error::InvalidConfig(format!("time step must be positive, got {dz}")));
            }
            _ => {}
        }
        let den = 1.0 - self.curvature();
        if den <= 0.0 {
            return Err(Error::CoefficientSingular(den));
        }
        Ok(())
    }
}

/// `a_inf(u) = a0 / (1 - (1 - pi^2 / (a^2 d^2)) (theta u)^2)`.
pub fn a_infinity(cfg: &DiffusionConfig, u: f64) -> Result<f64> {
    let den = 1.0 - cfg.curvature() * u * u;
    if den <= 0.0 {
        return Err(Error::CoefficientSingular(den));
    }
    Ok(cfg.a0 / den)
}

/// `S0 = int int gamma0(x1, x2) cos(pi x1 / d) cos(pi x2 / d)`.
pub fn s0_integral(medium: &MediumStats, depth: f64) -> f64 {
    let plan = OverlapPlan::new(&medium.kernel, depth, 16, 16);
    let c = |x: f64| (PI * x / depth).cos();
    let f: Vec<f64> = plan.nodes.iter().map(|&x| c(x)).collect();
    let fe: Vec<f64> = plan.extra_points().into_iter().map(c).collect();
    plan.bilinear(&f, &fe, &f, &fe)
}

/// `a0 = pi^2 S0 / (2 a n1^4 d^4 theta^2)`. A zero kernel yields `a0 = 0`,
/// which [`DiffusionConfig::validate`] rejects as degenerate.
pub fn s0_to_a0(medium: &MediumStats, depth: f64, n1: f64) -> Result<f64> {
    medium.validate()?;
    let theta2 = 1.0 - 1.0 / (n1 * n1);
    let s0 = s0_integral(medium, depth);
    Ok(PI * PI * s0 / (2.0 * medium.a * n1.powi(4) * depth.powi(4) * theta2))
}

/// Vertex-centered finite volume discretization.
///
/// Nodes sit at `u_i = i h`; end nodes own half cells, giving the lumped mass
/// `diag(h/2, h, ..., h, h/2)`. Face coefficients are exact harmonic means
/// `h / int 1/a_inf`, available in closed form since `1/a_inf` is quadratic.
struct Discretization {
    u: Vec<f64>,
    mass: Vec<f64>,
    /// Stiffness `K` over the unknowns.
    k_diag: Vec<f64>,
    k_off: Vec<f64>,
    /// `M^{-1/2} K M^{-1/2}`.
    s: SymTridiag,
    absorbing: bool,
}

impl Discretization {
    fn new(cfg: &DiffusionConfig, cells: usize) -> Self {
        let n = cells;
        let h = 1.0 / n as f64;
        let u: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let c = cfg.curvature();
        let face: Vec<f64> = (0..n)
            .map(|i| {
                let (l, r) = (u[i], u[i + 1]);
                let inv = (h - c * (r * r * r - l * l * l) / 3.0) / cfg.a0;
                h / inv
            })
            .collect();
        let absorbing = cfg.bottom == BottomBoundary::Absorbing;
        let m = if absorbing { n } else { n + 1 };
        let mut mass = vec![h; m];
        mass[0] = 0.5 * h;
        if !absorbing {
            mass[n] = 0.5 * h;
        }
        let mut k_diag = vec![0.0; m];
        let k_off: Vec<f64> = (0..m - 1).map(|i| -face[i] / h).collect();
        for i in 0..m {
            let left = if i > 0 { face[i - 1] } else { 0.0 };
            let right = if i < n { face[i] } else { 0.0 };
            k_diag[i] = (left + right) / h;
        }
        let sd = (0..m).map(|i| k_diag[i] / mass[i]).collect();
        let se = (0..m - 1).map(|i| k_off[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
        Self { u, mass, k_diag, k_off, s: SymTridiag::new(sd, se), absorbing }
    }

    fn full(&self, t: &[f64]) -> Vec<f64> {
        let mut v = t.to_vec();
        if self.absorbing {
            v.push(0.0);
        }
        v
    }

    /// Smallest eigenvalue of `S`, set to zero when it is zero up to rounding.
    fn shift(&self) -> f64 {
        if !self.absorbing {
            return 0.0;
        }
        self.s.eigenvalue(0).max(0.0)
    }
}

/// Continuum mean power on the `(z, u)` grid.
///
/// `values[i]` times `exp(log_scale[i])` is `T_1(z_grid[i], u)` at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionField {
    pub u_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub log_scale: Vec<f64>,
    pub bottom: BottomBoundary,
}

impl DiffusionField {
    pub fn checkpoint(&self, z: f64) -> Result<usize> {
        self.z_grid.iter().position(|&g| (g - z).abs() <= 1e-12 * z.abs().max(1.0)).ok_or(Error::CheckpointMissing(z))
    }

    pub fn scaled(&self, i: usize) -> Vec<f64> {
        let s = self.log_scale[i].exp();
        self.values[i].iter().map(|v| v * s).collect()
    }

    /// `log int_0^1 T_1 du` at checkpoint `i` (trapezoid, consistent with the
    /// lumped mass).
    pub fn log_mean(&self, i: usize) -> f64 {
        trapezoid(&self.u_grid, &self.values[i]).ln() + self.log_scale[i]
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.log_mean(i).exp()
    }
}

fn trapezoid(u: &[f64], v: &[f64]) -> f64 {
    u.windows(2).zip(v.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

fn renormalize(v: &mut [f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if m > 0.0 && m.is_finite() {
        v.iter_mut().for_each(|x| *x /= m);
        m.ln()
    } else {
        0.0
    }
}

fn solve_on(cfg: &DiffusionConfig, cells: usize) -> Result<DiffusionField> {
    let disc = Discretization::new(cfg, cells);
    let m = disc.mass.len();
    let mut z_sorted = cfg.z_checkpoints.clone();
    z_sorted.sort_by(|a, b| a.total_cmp(b));
    let mut values = Vec::with_capacity(z_sorted.len());
    let mut log_scale = Vec::with_capacity(z_sorted.len());
    match cfg.scheme {
        TimeScheme::Exponential => {
            let shift = disc.shift();
            let shifted = SymTridiag::new(disc.s.d.iter().map(|v| v - shift).collect(), disc.s.e.clone());
            let y0: Vec<f64> = disc.mass.iter().map(|w| w.sqrt()).collect();
            // With a reflecting bottom, sqrt(M) spans the kernel of S and is
            // conserved exactly; only the remainder goes through the contour.
            let (kept, rest) = if disc.absorbing {
                (vec![0.0; m], y0.clone())
            } else {
                let norm2: f64 = y0.iter().map(|v| v * v).sum();
                let c: f64 = y0.iter().map(|v| v * v).sum::<f64>() / norm2;
                let kept: Vec<f64> = y0.iter().map(|v| c * v).collect();
                let rest = y0.iter().zip(&kept).map(|(a, b)| a - b).collect();
                (kept, rest)
            };
            for &z in &z_sorted {
                let y: Vec<f64> = shifted.exp_neg_action(z, &rest).iter().zip(&kept).map(|(a, b)| a + b).collect();
                let mut t: Vec<f64> = y.iter().zip(&disc.mass).map(|(v, w)| v / w.sqrt()).collect();
                let ls = renormalize(&mut t);
                values.push(disc.full(&t));
                log_scale.push(ls - shift * z);
            }
        }
        TimeScheme::ImplicitEuler { dz } | TimeScheme::CrankNicolson { dz } => {
            let cn = matches!(cfg.scheme, TimeScheme::CrankNicolson { .. });
            let mut t = vec![1.0; m];
            let mut z_now = 0.0;
            let mut ls = 0.0;
            let mut started = false;
            for &z in &z_sorted {
                let span = z - z_now;
                if span > 0.0 {
                    let steps = (span / dz).ceil().max(1.0) as usize;
                    let h = span / steps as f64;
                    for _ in 0..steps {
                        if cn && started {
                            t = cn_step(&disc, &t, h);
                        } else {
                            t = ie_step(&disc, &t, 0.5 * h);
                            t = ie_step(&disc, &t, 0.5 * h);
                            started = true;
                        }
                        ls += renormalize(&mut t);
                    }
                    z_now = z;
                }
                values.push(disc.full(&t));
                log_scale.push(ls);
            }
        }
    }
    Ok(DiffusionField { u_grid: disc.u, z_grid: z_sorted, values, log_scale, bottom: cfg.bottom })
}

/// `K t` on the unknowns, assembled from face fluxes so that constants are
/// annihilated exactly.
fn stiffness_action(d: &Discretization, t: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let flux = -d.k_off[i] * (t[i] - t[i + 1]);
        out[i] += flux;
        out[i + 1] -= flux;
    }
    if d.absorbing {
        // face to the Dirichlet node at u = 1
        out[n - 1] += (d.k_diag[n - 1] + d.k_off[n - 2]) * t[n - 1];
    }
    out
}

/// One step `(M + w h K) delta = -h K t`, `t + delta`; solving for the
/// increment keeps conserved states exact to rounding. `w = 1` is implicit
/// Euler, `w = 1/2` Crank-Nicolson.
fn theta_step(d: &Discretization, t: &[f64], h: f64, w: f64) -> Vec<f64> {
    let diag: Vec<f64> = d.mass.iter().zip(&d.k_diag).map(|(m, k)| m + w * h * k).collect();
    let off: Vec<f64> = d.k_off.iter().map(|k| w * h * k).collect();
    let rhs: Vec<f64> = stiffness_action(d, t).iter().map(|v| -h * v).collect();
    let delta = solve_spd(&diag, &off, &rhs);
    t.iter().zip(&delta).map(|(a, b)| a + b).collect()
}

fn ie_step(d: &Discretization, t: &[f64], h: f64) -> Vec<f64> {
    theta_step(d, t, h, 1.0)
}

fn cn_step(d: &Discretization, t: &[f64], h: f64) -> Vec<f64> {
    theta_step(d, t, h, 0.5)
}

/// Solves the diffusion problem at every configured checkpoint.
pub fn solve_diffusion(cfg: &DiffusionConfig) -> Result<DiffusionField> {
    cfg.validate()?;
    let field = solve_on(cfg, cfg.cells)?;
    if let Some(tol) = cfg.grid_tolerance {
        let coarse = solve_on(cfg, cfg.cells / 2)?;
        let mut est = 0.0f64;
        for i in 0..field.z_grid.len() {
            let f = field.scaled(i);
            let c = coarse.scaled(i);
            for (k, cv) in c.iter().enumerate() {
                if 2 * k < f.len() {
                    est = est.max((f[2 * k] - cv).abs() / 3.0);
                }
            }
        }
        if est > tol {
            return Err(Error::GridTooCoarse { estimate: est, tol });
        }
    }
    Ok(field)
}

/// Observed order of `sup |T_n - T_2n| / sup |T_2n - T_4n|` at one distance,
/// together with the two sup-norm differences.
pub fn grid_convergence(cfg: &DiffusionConfig, z: f64, cells: usize) -> Result<(f64, f64, f64)> {
    let mut c = cfg.clone();
    c.z_checkpoints = vec![z];
    c.grid_tolerance = None;
    c.validate()?;
    let f: Vec<Vec<f64>> =
        [cells, 2 * cells, 4 * cells].iter().map(|&n| solve_on(&c, n).map(|f| f.scaled(0))).collect::<Result<_>>()?;
    let diff = |a: &[f64], b: &[f64], stride: usize| {
        a.iter().enumerate().map(|(i, v)| (v - b[i * stride]).abs()).fold(0.0, f64::max)
    };
    let e1 = diff(&f[0], &f[1], 2);
    let e2 = diff(&f[1], &f[2], 2);
    Ok(((e1 / e2).log2(), e1, e2))
}

/// Leading eigenpairs of `u -> d/du(a_inf du)` with the mixed boundary
/// conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenmode {
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub u_grid: Vec<f64>,
    /// `L^2(0, 1)`-normalized, nonnegative.
    pub phi_1: Vec<f64>,
    pub phi_integral: f64,
}

pub fn principal_eigenmode(cfg: &DiffusionConfig) -> Result<Eigenmode> {
    cfg.validate()?;
    if cfg.bottom != BottomBoundary::Absorbing {
        return Err(Error::InvalidConfig("principal eigenmode needs an absorbing bottom".into()));
    }
    let disc = Discretization::new(cfg, cfg.cells);
    let s1 = disc.s.eigenvalue(0);
    let s2 = disc.s.eigenvalue(1);
    if !(s1 > 0.0 && s2 > s1) {
        return Err(Error::ConvergenceFailure { op: "principal_eigenmode", mode: 1 });
    }
    let y = disc.s.eigenvector(s1);
    let mut phi: Vec<f64> = y.iter().zip(&disc.mass).map(|(v, w)| v / w.sqrt()).collect();
    if phi.iter().sum::<f64>() < 0.0 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
    let norm: f64 = phi.iter().zip(&disc.mass).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
    phi.iter_mut().for_each(|v| *v /= norm);
    let full = disc.full(&phi);
    let phi_integral = trapezoid(&disc.u, &full);
    Ok(Eigenmode { lambda_1: -s1, lambda_2: -s2, u_grid: disc.u, phi_1: full, phi_integral })
}

/// `int_0^1 f(u) cos(w u) du` for the piecewise-linear interpolant of `f`,
/// integrated exactly cell by cell. Constant `f = 1` gives `sin(w)/w` exactly.
pub fn cosine_transform(u: &[f64], f: &[f64], w: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() - 1 {
        let h = u[i + 1] - u[i];
        let c = 0.5 * (u[i] + u[i + 1]);
        let mean = 0.5 * (f[i] + f[i + 1]);
        let slope = (f[i + 1] - f[i]) / h;
        let half = 0.5 * h;
        let q = w * half;
        // int_{-a}^{a} cos(w t) dt and int_{-a}^{a} t sin(w t) dt
        let i0 = h * crate::special::sinc(q);
        let i1 = if q.abs() < 1e-2 {
            let q2 = q * q;
            2.0 * half * half * q * (1.0 / 3.0 - q2 / 30.0 + q2 * q2 / 840.0)
        } else {
            2.0 * half * half * (q.sin() - q * q.cos()) / (q * q)
        };
        s += mean * i0 * (w * c).cos() - slope * i1 * (w * c).sin();
    }
    s
}

/// `H(x, L) = int_0^1 T_1(L, u) cos(2 pi u x) du` at checkpoint `z_index`.
pub fn refocus_kernel(field: &DiffusionField, z_index: usize, x_tilde: &[f64]) -> Result<RefocusProfile> {
    if z_index >= field.z_grid.len() {
        return Err(Error::IndexOutOfRange { op: "refocus_kernel", index: z_index, max: field.z_grid.len() });
    }
    let t = &field.values[z_index];
    let values = x_tilde.iter().map(|&x| cosine_transform(&field.u_grid, t, 2.0 * PI * x)).collect();
    Ok(RefocusProfile {
        x_tilde: x_tilde.to_vec(),
        values,
        log_scale: field.log_scale[z_index],
        distance: field.z_grid[z_index],
        normalization: Normalization::Continuum,
    })
}

/// Large-distance profile `(int phi_1) int phi_1(u) cos(2 pi u x) du`, without
/// the `exp(lambda_1 L)` amplitude.
pub fn eigenmode_profile(mode: &Eigenmode, x_tilde: &[f64]) -> RefocusProfile {
    let values = x_tilde
        .iter()
        .map(|&x| mode.phi_integral * cosine_transform(&mode.u_grid, &mode.phi_1, 2.0 * PI * x))
        .collect();
    RefocusProfile {
        x_tilde: x_tilde.to_vec(),
        values,
        log_scale: 0.0,
        distance: f64::INFINITY,
        normalization: Normalization::Continuum,
    }
}

/// Nearest-neighbor chain of `n` modes whose mean powers discretize the
/// continuum problem.
///
/// Mode `j` sits at the cell center `u = (j - 1/2) / n`; the rate between
/// modes `j` and `j + 1` is `n^2 a_inf(j / n)`, and an absorbing bottom is a
/// loss `2 n^2 a_inf(1)` on mode `n` (flux to a zero value at `u = 1`).
pub fn matched_chain(cfg: &DiffusionConfig, n: usize) -> Result<CouplingMatrices> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::InvalidConfig("a chain needs at least two modes".into()));
    }
    let n2 = (n * n) as f64;
    let mut g = nalgebra::DMatrix::zeros(n, n);
    for j in 1..n {
        let r = n2 * a_infinity(cfg, j as f64 / n as f64)?;
        g[(j - 1, j)] = r;
        g[(j, j - 1)] = r;
    }
    let mut lam = DVector::zeros(n);
    if cfg.bottom == BottomBoundary::Absorbing {
        lam[n - 1] = 2.0 * n2 * a_infinity(cfg, 1.0)?;
    }
    Ok(CouplingMatrices::from_transport(g, lam))
}
