//! Statistics of the random perturbation and the coupling coefficients they
//! induce between modes.
//!
//! The perturbation `V(x, z)` is supported in the ocean layer with
//! `E[V(x1, z1) V(x2, z2)] = gamma0(x1, x2) exp(-a |z1 - z2|)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::waveguide::{radiating_value, ModeSet};

/// Transverse covariance presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kernel {
    /// `gamma0 = sigma2` on the ocean layer.
    Constant { sigma2: f64 },
    /// `gamma0 = sigma2 cos(pi x1 / d) cos(pi x2 / d)`.
    SeparableCosine { sigma2: f64 },
    /// `gamma0 = sigma2 exp(-|x1 - x2| / corr_length)`.
    StationaryExponential { sigma2: f64, corr_length: f64 },
    /// Values on a uniform `n x n` grid over `[0, d]^2`, bilinearly interpolated.
    Tabulated { values: Vec<Vec<f64>> },
}

impl Kernel {
    /// Evaluates `gamma0(x1, x2)` for points in `[0, d]`.
    pub fn eval(&self, x1: f64, x2: f64, d: f64) -> f64 {
        match self {
            Kernel::Constant { sigma2 } => *sigma2,
            Kernel::SeparableCosine { sigma2 } => sigma2 * (PI * x1 / d).cos() * (PI * x2 / d).cos(),
            Kernel::StationaryExponential { sigma2, corr_length } => sigma2 * (-(x1 - x2).abs() / corr_length).exp(),
            Kernel::Tabulated { values } => {
                let n = values.len();
                let h = d / (n - 1) as f64;
                let locate = |x: f64| {
                    let t = (x / h).clamp(0.0, (n - 1) as f64);
                    let i = (t.floor() as usize).min(n - 2);
                    (i, t - i as f64)
                };
                let (i, ti) = locate(x1);
                let (k, tk) = locate(x2);
                let v = |a: usize, b: usize| values[a][b];
                (1.0 - ti) * ((1.0 - tk) * v(i, k) + tk * v(i, k + 1))
                    + ti * ((1.0 - tk) * v(i + 1, k) + tk * v(i + 1, k + 1))
            }
        }
    }

    /// `g` with `gamma0(x1, x2) = g(x1) g(x2)`, when the kernel has rank one.
    pub fn rank_one_factor(&self, x: f64, d: f64) -> Option<f64> {
        match self {
            Kernel::Constant { sigma2 } => Some(sigma2.sqrt()),
            Kernel::SeparableCosine { sigma2 } => Some(sigma2.sqrt() * (PI * x / d).cos()),
            _ => None,
        }
    }

    pub fn is_rank_one(&self) -> bool {
        matches!(self, Kernel::Constant { .. } | Kernel::SeparableCosine { .. })
    }

    /// Kernels with a derivative jump across the diagonal.
    fn kinked_on_diagonal(&self) -> bool {
        matches!(self, Kernel::StationaryExponential { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Kernel::Constant { sigma2 } | Kernel::SeparableCosine { sigma2 } => *sigma2 == 0.0,
            Kernel::StationaryExponential { sigma2, .. } => *sigma2 == 0.0,
            Kernel::Tabulated { values } => values.iter().flatten().all(|v| *v == 0.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Kernel::Constant { .. } => "constant",
            Kernel::SeparableCosine { .. } => "separable_cosine",
            Kernel::StationaryExponential { .. } => "stationary_exponential",
            Kernel::Tabulated { .. } => "tabulated",
        }
    }
}

/// Random medium: transverse covariance plus longitudinal decorrelation rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumStats {
    pub kernel: Kernel,
    /// Longitudinal decorrelation rate `a`; the correlation length is `1/a`.
    pub a: f64,
}

impl MediumStats {
    pub fn new(kernel: Kernel, a: f64) -> Result<Self> {
        let m = Self { kernel, a };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidConfig(format!("decorrelation rate a must be positive, got {}", self.a)));
        }
        let bad = |v: f64| !(v.is_finite() && v >= 0.0);
        match &self.kernel {
            Kernel::Constant { sigma2 } | Kernel::SeparableCosine { sigma2 } if bad(*sigma2) => {
                Err(Error::InvalidConfig(format!("kernel variance must be nonnegative, got {sigma2}")))
            }
            Kernel::StationaryExponential { sigma2, corr_length } => {
                if bad(*sigma2) || !(corr_length.is_finite() && *corr_length > 0.0) {
                    Err(Error::InvalidConfig("exponential kernel needs sigma2 >= 0 and corr_length > 0".into()))
                } else {
                    Ok(())
                }
            }
            Kernel::Tabulated { values } => {
                let n = values.len();
                if n < 2 || values.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidConfig("tabulated kernel must be a square table of size >= 2".into()));
                }
                for i in 0..n {
                    for k in 0..n {
                        if !values[i][k].is_finite() || values[i][k] != values[k][i] {
                            return Err(Error::InvalidConfig("tabulated kernel must be finite and symmetric".into()));
                        }
                    }
                }
                self.check_psd(1.0, n)
            }
            _ => Ok(()),
        }
    }

    /// Checks that the Gram matrix on a uniform `n`-point grid is positive
    /// semidefinite up to `1e-10` of its largest eigenvalue.
    pub fn check_psd(&self, depth: f64, n: usize) -> Result<()> {
        let h = depth / (n - 1).max(1) as f64;
        let g = DMatrix::from_fn(n, n, |i, k| self.kernel.eval(i as f64 * h, k as f64 * h, depth));
        let ev = SymmetricEigen::new(g).eigenvalues;
        let max = ev.iter().cloned().fold(0.0f64, f64::max);
        let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 * max {
            return Err(Error::InvalidConfig(format!("kernel is not positive semidefinite (eigenvalue {min:.3e})")));
        }
        Ok(())
    }
}

/// Quadrature plan for double integrals `int int gamma0(x1, x2) f(x1) f(x2)`
/// over `[0, d]^2`.
///
/// Rank-one kernels reduce to a squared single integral. Otherwise a tensor
/// Gauss-Legendre rule is used; for kernels with a kink on the diagonal the
/// diagonal panel squares are split into two triangles and integrated with a
/// collapsed rule, which keeps the integrand smooth on every cell.
pub struct OverlapPlan {
    depth: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    rank_one: Option<Vec<f64>>,
    dense: Option<DMatrix<f64>>,
    /// Lower-triangle points `(grid index of x1, x2, weight)` for diagonal cells.
    tri: Vec<(usize, f64, f64)>,
}

impl OverlapPlan {
    pub fn new(kernel: &Kernel, depth: f64, panels: usize, order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let h = depth / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            for (x, w) in gl.mapped(p as f64 * h, (p + 1) as f64 * h) {
                nodes.push(x);
                weights.push(w);
            }
        }
        if kernel.is_rank_one() {
            let g = nodes.iter().zip(&weights).map(|(&x, &w)| w * kernel.rank_one_factor(x, depth).unwrap()).collect();
            return Self { depth, nodes, weights, rank_one: Some(g), dense: None, tri: Vec::new() };
        }
        let m = nodes.len();
        let kinked = kernel.kinked_on_diagonal();
        let mut dense = DMatrix::from_fn(m, m, |i, k| weights[i] * weights[k] * kernel.eval(nodes[i], nodes[k], depth));
        let mut tri = Vec::new();
        if kinked {
            for p in 0..panels {
                let r = p * order..(p + 1) * order;
                for i in r.clone() {
                    for k in r.clone() {
                        dense[(i, k)] = 0.0;
                    }
                }
                let a = p as f64 * h;
                // both triangles contribute equally by symmetry
                for i in r {
                    let x1 = nodes[i];
                    for (y, wy) in gl.mapped(a, x1) {
                        tri.push((i, y, 2.0 * weights[i] * wy * kernel.eval(x1, y, depth)));
                    }
                }
            }
        }
        Self { depth, nodes, weights, rank_one: None, dense: Some(dense), tri }
    }

    /// Plan sized for products of modes oscillating at up to `max_phase`
    /// radians across the layer.
    pub fn for_phase(kernel: &Kernel, depth: f64, max_phase: f64) -> Self {
        let panels = (max_phase / PI).ceil() as usize + 4;
        Self::new(kernel, depth, panels, 10)
    }

    /// Extra abscissas needed besides the grid nodes.
    pub fn extra_points(&self) -> Vec<f64> {
        self.tri.iter().map(|t| t.1).collect()
    }

    /// `int int gamma0 f(x1) g(x2)` given values of `f`, `g` on the grid
    /// and on the extra points. Symmetric in `f`, `g`.
    pub fn bilinear(&self, f: &[f64], f_extra: &[f64], g: &[f64], g_extra: &[f64]) -> f64 {
        if let Some(r) = &self.rank_one {
            let a: f64 = r.iter().zip(f).map(|(w, v)| w * v).sum();
            let b: f64 = r.iter().zip(g).map(|(w, v)| w * v).sum();
            return a * b;
        }
        let k = self.dense.as_ref().unwrap();
        let gv = DVector::from_column_slice(g);
        let kg = k * gv;
        let mut s: f64 = f.iter().zip(kg.iter()).map(|(a, b)| a * b).sum();
        for (t, &(i, _, w)) in self.tri.iter().enumerate() {
            s += 0.5 * w * (f[i] * g_extra[t] + g[i] * f_extra[t]);
        }
        s
    }

    /// Batched quadratic forms `int int gamma0 f_p f_p` for the columns of `fs`.
    pub fn quadratic_forms(&self, fs: &DMatrix<f64>, fs_extra: &DMatrix<f64>) -> Vec<f64> {
        if let Some(r) = &self.rank_one {
            return fs.column_iter().map(|c| r.iter().zip(c.iter()).map(|(w, v)| w * v).sum::<f64>().powi(2)).collect();
        }
        let k = self.dense.as_ref().unwrap();
        let kf = k * fs;
        (0..fs.ncols())
            .map(|p| {
                let mut s = fs.column(p).dot(&kf.column(p));
                for (t, &(i, _, w)) in self.tri.iter().enumerate() {
                    s += w * fs[(i, p)] * fs_extra[(t, p)];
                }
                s
            })
            .collect()
    }

    /// `int int gamma0(x1, x2) h(x1, x2)` for a general integrand.
    pub fn integrate2(&self, h: impl Fn(f64, f64) -> f64, kernel: &Kernel) -> f64 {
        let n = self.nodes.len();
        let mut s = 0.0;
        match (&self.rank_one, &self.dense) {
            (Some(_), _) => {
                for i in 0..n {
                    for k in 0..n {
                        let (x1, x2) = (self.nodes[i], self.nodes[k]);
                        s += self.weights[i] * self.weights[k] * kernel.eval(x1, x2, self.depth) * h(x1, x2);
                    }
                }
            }
            (None, Some(dk)) => {
                for i in 0..n {
                    for k in 0..n {
                        s += dk[(i, k)] * h(self.nodes[i], self.nodes[k]);
                    }
                }
                for &(i, y, w) in &self.tri {
                    let x = self.nodes[i];
                    s += 0.5 * w * (h(x, y) + h(y, x));
                }
            }
            _ => unreachable!(),
        }
        s
    }
}

/// Mode values on the plan grid and extra points.
struct ModeTable {
    grid: DMatrix<f64>,
    extra: DMatrix<f64>,
}

fn propagating_table(ms: &ModeSet, plan: &OverlapPlan) -> ModeTable {
    let ex = plan.extra_points();
    let n = ms.len();
    ModeTable {
        grid: DMatrix::from_fn(plan.nodes.len(), n, |i, j| ms.ocean_shape(j + 1, plan.nodes[i])),
        extra: DMatrix::from_fn(ex.len(), n, |i, j| ms.ocean_shape(j + 1, ex[i])),
    }
}

fn radiating_table(ms: &ModeSet, plan: &OverlapPlan, gammas: &[f64]) -> ModeTable {
    let ex = plan.extra_points();
    let cfg = ms.config;
    ModeTable {
        grid: DMatrix::from_fn(plan.nodes.len(), gammas.len(), |i, r| radiating_value(&cfg, gammas[r], plan.nodes[i])),
        extra: DMatrix::from_fn(ex.len(), gammas.len(), |i, r| radiating_value(&cfg, gammas[r], ex[i])),
    }
}

fn plan_for(ms: &ModeSet, medium: &MediumStats) -> OverlapPlan {
    let cfg = ms.config;
    let sigma_max = ms.modes.last().map_or(0.0, |m| m.sigma);
    let eta_max = cfg.n1 * cfg.k() * cfg.depth;
    OverlapPlan::for_phase(&medium.kernel, cfg.depth, 2.0 * sigma_max.max(eta_max))
}

fn products(a: &DMatrix<f64>, ca: usize, b: &DMatrix<f64>, cb: usize) -> Vec<f64> {
    a.column(ca).iter().zip(b.column(cb).iter()).map(|(x, y)| x * y).collect()
}

fn check_mode(ms: &ModeSet, j: usize, op: &'static str) -> Result<()> {
    if j == 0 || j > ms.len() {
        return Err(Error::IndexOutOfRange { op, index: j, max: ms.len() });
    }
    Ok(())
}

/// `G_jl = int int gamma0(x1, x2) phi_j phi_l (x1) phi_j phi_l (x2)` over the ocean layer.
pub fn overlap_pp(ms: &ModeSet, medium: &MediumStats, j: usize, l: usize) -> Result<f64> {
    check_mode(ms, j, "overlap_pp")?;
    check_mode(ms, l, "overlap_pp")?;
    let plan = plan_for(ms, medium);
    let t = propagating_table(ms, &plan);
    let f = products(&t.grid, j - 1, &t.grid, l - 1);
    let fe = products(&t.extra, j - 1, &t.extra, l - 1);
    Ok(plan.bilinear(&f, &fe, &f, &fe))
}

/// `G_{j gamma}`: the same double integral with `phi_l` replaced by `phi_gamma`.
pub fn overlap_pr(ms: &ModeSet, medium: &MediumStats, j: usize, gamma: f64) -> Result<f64> {
    check_mode(ms, j, "overlap_pr")?;
    let k2 = ms.k().powi(2);
    if !(gamma > ms.xi_cutoff && gamma < k2) {
        return Err(Error::SpectralParameterOutOfRange { op: "overlap_pr", gamma, lo: ms.xi_cutoff, hi: k2 });
    }
    let plan = plan_for(ms, medium);
    let t = propagating_table(ms, &plan);
    let r = radiating_table(ms, &plan, &[gamma]);
    let f = products(&t.grid, j - 1, &r.grid, 0);
    let fe = products(&t.extra, j - 1, &r.extra, 0);
    Ok(plan.bilinear(&f, &fe, &f, &fe))
}

/// Laplace transforms of `exp(-a z)` against `cos(b z)` and `sin(b z)`.
pub fn laplace_cos_sin(a: f64, b: f64) -> (f64, f64) {
    let den = a * a + b * b;
    (a / den, b / den)
}

/// Full statistical description of mode coupling at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub gamma_c: DMatrix<f64>,
    pub gamma_s: DMatrix<f64>,
    pub gamma_1: DMatrix<f64>,
    pub lambda_c: DVector<f64>,
    pub lambda_s: DVector<f64>,
    /// Radiation cutoff used for the loss integrals.
    pub xi: f64,
}

impl CouplingMatrices {
    pub fn n(&self) -> usize {
        self.lambda_c.len()
    }

    /// Coupling built from a transport matrix and loss vector only.
    pub fn from_transport(gamma_c: DMatrix<f64>, lambda_c: DVector<f64>) -> Self {
        let n = lambda_c.len();
        let mut c = Self {
            gamma_c,
            gamma_s: DMatrix::zeros(n, n),
            gamma_1: DMatrix::zeros(n, n),
            lambda_c,
            lambda_s: DVector::zeros(n),
            xi: 0.0,
        };
        c.impose_row_sums();
        c
    }

    /// Sets diagonals of `gamma_c` and `gamma_s` to minus their off-diagonal row sums.
    pub fn impose_row_sums(&mut self) {
        for m in [&mut self.gamma_c, &mut self.gamma_s] {
            let n = m.nrows();
            for j in 0..n {
                let s: f64 = (0..n).filter(|&l| l != j).map(|l| m[(j, l)]).sum();
                m[(j, j)] = -s;
            }
        }
    }

    /// Transport and loss rescaled by `factor` (all statistics are linear in `gamma0`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            gamma_c: &self.gamma_c * factor,
            gamma_s: &self.gamma_s * factor,
            gamma_1: &self.gamma_1 * factor,
            lambda_c: &self.lambda_c * factor,
            lambda_s: &self.lambda_s * factor,
            xi: self.xi,
        }
    }

    /// Generator `Gamma^c - diag(Lambda^c)` of the mean power equations.
    pub fn generator(&self) -> DMatrix<f64> {
        let mut g = self.gamma_c.clone();
        for j in 0..self.n() {
            g[(j, j)] -= self.lambda_c[j];
        }
        g
    }
}

/// Assembles every coupling statistic from the mode set and medium.
///
/// Mode-pair overlaps are evaluated on one quadrature plan sized by the
/// highest transverse oscillation; the loss integrals run over the radiation
/// grid of the mode set in the variable `s = sqrt(gamma)`.
pub fn assemble_coupling(ms: &ModeSet, medium: &MediumStats) -> Result<CouplingMatrices> {
    medium.validate()?;
    let n = ms.len();
    let k4 = ms.k().powi(4);
    let a = medium.a;
    let betas = ms.betas();
    let plan = plan_for(ms, medium);
    let t = propagating_table(ms, &plan);

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |l| (j, l))).collect();
    let gjl = pair_forms(&plan, &t, &t, &pairs);
    // G1_jl = int int gamma0 phi_j^2(x1) phi_l^2(x2)
    let sq_grid = t.grid.map(|v| v * v);
    let sq_extra = t.extra.map(|v| v * v);
    let g1: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, l)| {
            let cj = sq_grid.column(j);
            let cl = sq_grid.column(l);
            let ej = sq_extra.column(j);
            let el = sq_extra.column(l);
            plan.bilinear(cj.as_slice(), ej.as_slice(), cl.as_slice(), el.as_slice())
        })
        .collect();

    let mut gamma_c = DMatrix::zeros(n, n);
    let mut gamma_s = DMatrix::zeros(n, n);
    let mut gamma_1 = DMatrix::zeros(n, n);
    for (p, &(j, l)) in pairs.iter().enumerate() {
        let pref = k4 / (2.0 * betas[j] * betas[l]);
        gamma_1[(j, l)] = pref * g1[p] / a;
        gamma_1[(l, j)] = gamma_1[(j, l)];
        if j != l {
            let (lc, ls) = laplace_cos_sin(a, betas[l] - betas[j]);
            let g = gjl[p].max(0.0);
            gamma_c[(j, l)] = pref * g * lc;
            gamma_c[(l, j)] = gamma_c[(j, l)];
            gamma_s[(j, l)] = pref * gjl[p] * ls;
            gamma_s[(l, j)] = -gamma_s[(j, l)];
        }
    }

    let (lambda_c, lambda_s) = loss_integrals(ms, medium, &plan, &t);
    let mut c = CouplingMatrices { gamma_c, gamma_s, gamma_1, lambda_c, lambda_s, xi: ms.xi_cutoff };
    c.impose_row_sums();
    Ok(c)
}

fn pair_forms(plan: &OverlapPlan, a: &ModeTable, b: &ModeTable, pairs: &[(usize, usize)]) -> Vec<f64> {
    let m = a.grid.nrows();
    let me = a.extra.nrows();
    let chunk = 256;
    pairs
        .par_chunks(chunk)
        .flat_map_iter(|ps| {
            let f = DMatrix::from_fn(m, ps.len(), |i, p| a.grid[(i, ps[p].0)] * b.grid[(i, ps[p].1)]);
            let fe = DMatrix::from_fn(me, ps.len(), |i, p| a.extra[(i, ps[p].0)] * b.extra[(i, ps[p].1)]);
            plan.quadratic_forms(&f, &fe)
        })
        .collect()
}

fn loss_integrals(
    ms: &ModeSet,
    medium: &MediumStats,
    plan: &OverlapPlan,
    t: &ModeTable,
) -> (DVector<f64>, DVector<f64>) {
    let n = ms.len();
    let rad = &ms.radiation;
    if rad.is_empty() {
        return (DVector::zeros(n), DVector::zeros(n));
    }
    let k4 = ms.k().powi(4);
    let a = medium.a;
    let r = radiating_table(ms, plan, &rad.gamma);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..rad.len()).map(move |q| (j, q))).collect();
    let g = pair_forms(plan, t, &r, &pairs);
    let mut lc = DVector::zeros(n);
    let mut ls = DVector::zeros(n);
    for (p, &(j, q)) in pairs.iter().enumerate() {
        let beta = ms.modes[j].beta;
        let s = rad.s[q];
        let (c, sn) = laplace_cos_sin(a, s - beta);
        // d gamma / (4 sqrt(gamma)) = ds / 2
        let w = rad.weight_s[q] * k4 / (2.0 * beta) * g[p].max(0.0);
        lc[j] += w * c;
        ls[j] += w * sn;
    }
    (lc, ls)
}

/// Which modes keep their radiative loss after band limiting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    /// Loss only on the last propagating mode.
    #[default]
    LastMode,
    /// Loss on the last two propagating modes.
    LastTwo,
}

/// Nearest-neighbor idealization: drops couplings with `|j - l| > 1`, keeps
/// loss only near the cutoff, and restores the zero-row-sum diagonals.
pub fn band_limited_filter(c: &CouplingMatrices, variant: LossVariant) -> CouplingMatrices {
    let n = c.n();
    let mut out = c.clone();
    for j in 0..n {
        for l in 0..n {
            if j.abs_diff(l) > 1 {
                out.gamma_c[(j, l)] = 0.0;
                out.gamma_s[(j, l)] = 0.0;
            }
        }
    }
    let keep_from = match variant {
        LossVariant::LastMode => n.saturating_sub(1),
        LossVariant::LastTwo => n.saturating_sub(2),
    };
    for j in 0..keep_from {
        out.lambda_c[j] = 0.0;
        out.lambda_s[j] = 0.0;
    }
    out.impose_row_sums();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveguide::{solve_dispersion, SpectrumOptions, WaveguideConfig};

    fn small_set(modes: usize) -> ModeSet {
        let cfg = WaveguideConfig::with_mode_parameter(20.0, 2.0, 1500.0, modes, 0.25).unwrap();
        crate::waveguide::solve_dispersion_with(&cfg, &SpectrumOptions::default()).unwrap()
    }

    // dense trapezoid with one Richardson step
    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let t = |n: usize| {
            let h = (b - a) / n as f64;
            let mut s = 0.5 * (f(a) + f(b));
            for i in 1..n {
                s += f(a + i as f64 * h);
            }
            s * h
        };
        (4.0 * t(2 * n) - t(n)) / 3.0
    }

    #[test]
    fn constant_kernel_g11_matches_trapezoid() {
        let cfg = WaveguideConfig::new(20.0, 2.0, 1.0, PI).unwrap();
        let ms = solve_dispersion(&cfg).unwrap();
        let med = MediumStats::new(Kernel::Constant { sigma2: 1.0 }, 1.0).unwrap();
        let g = overlap_pp(&ms, &med, 1, 1).unwrap();
        let inner = trapezoid(|x| ms.mode_shape(1, x).unwrap().powi(2), 0.0, 20.0, 400_000);
        assert!((g - inner * inner).abs() < 1e-9 * g, "{g} vs {}", inner * inner);
    }

    #[test]
    fn zero_kernel_gives_zero_statistics() {
        let ms = small_set(4);
        let med = MediumStats::new(Kernel::Constant { sigma2: 0.0 }, 1.0).unwrap();
        let c = assemble_coupling(&ms, &med).unwrap();
        assert!(c.gamma_c.iter().chain(c.gamma_s.iter()).chain(c.gamma_1.iter()).all(|v| *v == 0.0));
        assert!(c.lambda_c.iter().chain(c.lambda_s.iter()).all(|v| *v == 0.0));
        assert_eq!(overlap_pr(&ms, &med, 1, ms.k().powi(2) / 2.0).unwrap(), 0.0);
    }

    #[test]
    fn overlap_pr_constant_kernel_matches_dense_oracle() {
        let cfg = WaveguideConfig::new(20.0, 2.0, 1.0, PI).unwrap();
        let ms = solve_dispersion(&cfg).unwrap();
        let med = MediumStats::new(Kernel::Constant { sigma2: 1.0 }, 1.0).unwrap();
        let g = ms.k().powi(2) / 2.0;
        let v = overlap_pr(&ms, &med, 1, g).unwrap();
        let inner = trapezoid(|x| ms.mode_shape(1, x).unwrap() * ms.radiating_shape(g, x).unwrap(), 0.0, 20.0, 400_000);
        assert!((v - inner * inner).abs() < 1e-9 * v.max(1e-12), "{v} vs {}", inner * inner);
        assert!(v >= 0.0);
        assert!(overlap_pr(&ms, &med, 1, 2.0 * ms.k().powi(2)).is_err());
    }

    #[test]
    fn exponential_kernel_overlap_matches_brute_force() {
        let ms = small_set(3);
        let d = ms.depth();
        let med = MediumStats::new(Kernel::StationaryExponential { sigma2: 1.0, corr_length: 3.0 }, 1.0).unwrap();
        let g = overlap_pp(&ms, &med, 1, 2).unwrap();
        // brute force: inner integral split at the kink, outer adaptive
        let f = |x: f64| ms.mode_shape(1, x).unwrap() * ms.mode_shape(2, x).unwrap();
        let (oracle, _) = crate::quadrature::integrate_adaptive(
            |x1| {
                let k = |x2: f64| (-(x1 - x2).abs() / 3.0).exp() * f(x2);
                let (a, _) = crate::quadrature::integrate_adaptive(k, 0.0, x1, 2, 1e-13);
                let (b, _) = crate::quadrature::integrate_adaptive(k, x1, d, 2, 1e-13);
                f(x1) * (a + b)
            },
            0.0,
            d,
            4,
            1e-12,
        );
        assert!((g - oracle).abs() < 1e-9 * oracle.abs(), "{g} vs {oracle}");
    }

    #[test]
    fn separable_overlap_is_perfect_square() {
        let ms = small_set(5);
        let med = MediumStats::new(Kernel::SeparableCosine { sigma2: 2.0 }, 1.0).unwrap();
        let d = ms.depth();
        for (j, l) in [(1, 1), (1, 2), (2, 5)] {
            let g = overlap_pp(&ms, &med, j, l).unwrap();
            let (h, _) = crate::quadrature::integrate_adaptive(
                |x| 2f64.sqrt() * (PI * x / d).cos() * ms.mode_shape(j, x).unwrap() * ms.mode_shape(l, x).unwrap(),
                0.0,
                d,
                4,
                1e-14,
            );
            assert!((g - h * h).abs() < 1e-10 * (h * h).max(1e-12));
        }
        assert!(overlap_pp(&ms, &med, 0, 1).is_err());
    }

    #[test]
    fn coupling_structure() {
        let ms = small_set(6);
        for kernel in [
            Kernel::Constant { sigma2: 1e-3 },
            Kernel::SeparableCosine { sigma2: 1e-3 },
            Kernel::StationaryExponential { sigma2: 1e-3, corr_length: 2.0 },
        ] {
            let med = MediumStats::new(kernel, 0.7).unwrap();
            let c = assemble_coupling(&ms, &med).unwrap();
            let n = c.n();
            for j in 0..n {
                let row: f64 = c.gamma_c.row(j).sum();
                assert!(row.abs() < 1e-14 * c.gamma_c[(j, j)].abs().max(1e-300));
                assert!(c.gamma_s.row(j).sum().abs() < 1e-12 * c.gamma_s.abs().max());
                assert!(c.lambda_c[j] > 0.0);
                for l in 0..n {
                    assert_eq!(c.gamma_c[(j, l)], c.gamma_c[(l, j)]);
                    assert_eq!(c.gamma_1[(j, l)], c.gamma_1[(l, j)]);
                    if j != l {
                        assert!(c.gamma_c[(j, l)] >= 0.0);
                        assert_eq!(c.gamma_s[(j, l)], -c.gamma_s[(l, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn laplace_transform_matches_truncated_integral() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a: f64 = rng.gen_range(0.1..5.0);
            let b: f64 = rng.gen_range(-5.0..5.0);
            let z = 40.0 / a;
            let panels = ((b.abs() * z / PI).ceil() as usize).max(8) * 2;
            let rule = crate::quadrature::CompositeRule::new(0.0, z, panels, 16);
            let nc = rule.integrate(|t| (-a * t).exp() * (b * t).cos());
            let ns = rule.integrate(|t| (-a * t).exp() * (b * t).sin());
            let (lc, ls) = laplace_cos_sin(a, b);
            assert!((nc - lc).abs() < 1e-8 * lc.abs());
            assert!((ns - ls).abs() < 1e-8 * ls.abs().max(1e-3));
        }
    }

    #[test]
    fn two_mode_gamma_c_via_truncated_integral() {
        let ms = small_set(2);
        let med = MediumStats::new(Kernel::StationaryExponential { sigma2: 1e-2, corr_length: 5.0 }, 0.5).unwrap();
        let c = assemble_coupling(&ms, &med).unwrap();
        let g = overlap_pp(&ms, &med, 1, 2).unwrap();
        let (b1, b2) = (ms.modes[0].beta, ms.modes[1].beta);
        let a = med.a;
        let z = 40.0 / a;
        let rule = crate::quadrature::CompositeRule::new(0.0, z, 64, 16);
        let lap = rule.integrate(|t| (-a * t).exp() * ((b2 - b1) * t).cos());
        let oracle = ms.k().powi(4) / (2.0 * b1 * b2) * g * lap;
        assert!((c.gamma_c[(0, 1)] - oracle).abs() < 1e-8 * oracle);
    }

    #[test]
    fn loss_converges_as_cutoff_shrinks() {
        let cfg = WaveguideConfig::with_mode_parameter(20.0, 2.0, 1500.0, 4, 0.25).unwrap();
        let med = MediumStats::new(Kernel::Constant { sigma2: 1e-3 }, 1.0).unwrap();
        let lam = |xi: f64| {
            let opts = SpectrumOptions { xi_factor: xi, radiation_panels: 16, radiation_order: 16 };
            let ms = crate::waveguide::solve_dispersion_with(&cfg, &opts).unwrap();
            assemble_coupling(&ms, &med).unwrap().lambda_c
        };
        let a = lam(1e-14);
        let b = lam(0.5e-14);
        for j in 0..a.len() {
            assert!(((a[j] - b[j]) / a[j]).abs() < 1e-6);
        }
        // at the default cutoff the change scales like sqrt(xi)
        let c = lam(1e-6);
        let e = lam(0.5e-6);
        for j in 0..a.len() {
            let rel = ((c[j] - e[j]) / c[j]).abs();
            assert!(rel < 1e-2 && rel > 1e-7, "{rel}");
        }
    }

    #[test]
    fn band_limited_filter_structure() {
        let ms = small_set(6);
        let med = MediumStats::new(Kernel::Constant { sigma2: 1e-3 }, 1.0).unwrap();
        let c = assemble_coupling(&ms, &med).unwrap();
        let f = band_limited_filter(&c, LossVariant::LastMode);
        let n = f.n();
        for j in 0..n {
            assert!(f.gamma_c.row(j).sum().abs() < 1e-14 * f.gamma_c[(j, j)].abs().max(1e-300));
            for l in 0..n {
                if j.abs_diff(l) > 1 {
                    assert_eq!(f.gamma_c[(j, l)], 0.0);
                }
                assert_eq!(f.gamma_c[(j, l)], f.gamma_c[(l, j)]);
            }
            if j + 1 < n {
                assert_eq!(f.lambda_c[j], 0.0);
            }
        }
        assert_eq!(f.lambda_c[n - 1], c.lambda_c[n - 1]);
        let again = band_limited_filter(&f, LossVariant::LastMode);
        assert_eq!(again, f);
        let two = band_limited_filter(&c, LossVariant::LastTwo);
        assert!(two.lambda_c[n - 2] > 0.0 && two.lambda_c[n - 3] == 0.0);
    }

    #[test]
    fn psd_check_rejects_indefinite_table() {
        let bad = Kernel::Tabulated { values: vec![vec![0.0, 1.0], vec![1.0, 0.0]] };
        assert!(MediumStats::new(bad, 1.0).is_err());
        let ok = Kernel::Tabulated { values: vec![vec![1.0, 0.5], vec![0.5, 1.0]] };
        assert!(MediumStats::new(ok, 1.0).is_ok());
        let med = MediumStats::new(Kernel::StationaryExponential { sigma2: 1.0, corr_length: 2.0 }, 1.0).unwrap();
        med.check_psd(20.0, 64).unwrap();
    }
}
