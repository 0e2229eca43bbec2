//! Direct simulation of the forward-scattering transfer matrix over
//! realizations of the random medium.
//!
//! The fluctuation is `V(x, s) = sum_p sqrt(lambda_p) xi_p(s) e_p(x)`, a
//! truncated Mercer expansion of `gamma0` driven by independent stationary
//! Ornstein-Uhlenbeck processes of rate `a` in the fast variable `s = z / eps`.
//! The transfer matrix solves `dT/ds = sqrt(eps) H(s) T` with `H` skew-Hermitian,
//! integrated by midpoint exponentials so that every realization stays unitary.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{CouplingMatrices, MediumStats};
use crate::quadrature::GaussLegendre;
use crate::waveguide::{eval_mode, radiating_value, ModeSet, RadiationGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MCConfig {
    pub epsilon: f64,
    pub realizations: usize,
    /// Gauss-Legendre bins for the radiating continuum; `0` simulates the
    /// propagating modes alone.
    #[serde(default)]
    pub radiation_bins: usize,
    #[serde(default)]
    pub seed: u64,
    /// Macroscopic propagation distance.
    pub distance: f64,
    /// Step in the fast variable; chosen from the phase and correlation
    /// scales when absent.
    #[serde(default)]
    pub z_step: Option<f64>,
    /// Keep only couplings between neighboring propagating modes.
    #[serde(default = "yes")]
    pub nearest_neighbor: bool,
    #[serde(default = "default_terms")]
    pub mercer_terms: usize,
}

fn yes() -> bool {
    true
}

fn default_terms() -> usize {
    24
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.1) {
            return Err(Error::InvalidConfig(format!("epsilon must lie in (0, 0.1], got {}", self.epsilon)));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("at least one realization is required".into()));
        }
        if !(self.distance.is_finite() && self.distance >= 0.0) {
            return Err(Error::InvalidConfig(format!("distance must be nonnegative, got {}", self.distance)));
        }
        if let Some(h) = self.z_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidConfig(format!("step must be positive, got {h}")));
            }
        }
        if self.mercer_terms == 0 {
            return Err(Error::InvalidConfig("at least one Mercer term is required".into()));
        }
        Ok(())
    }
}

/// One basis state of the simulated space: a propagating mode or a radiation bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub beta: f64,
    /// Quadrature weight in `gamma` (one for propagating modes).
    pub weight: f64,
    pub propagating: bool,
}

/// Everything about the discretized medium that is shared by realizations.
#[derive(Debug, Clone)]
pub struct TransferModel {
    pub states: Vec<State>,
    /// Retained pairs `(r, s)`, `r <= s`.
    pub pairs: Vec<(usize, usize)>,
    /// `sqrt(lambda_p) int e_p phi_r phi_s` per pair and Mercer term.
    pub loadings: DMatrix<f64>,
    /// Mercer eigenvalues kept, in decreasing order.
    pub mercer: Vec<f64>,
    /// Mercer terms requested but unavailable at the kernel's numerical rank.
    pub rank_shortfall: usize,
    pub k: f64,
    pub a: f64,
}

fn nodes_for(depth: f64, max_phase: f64) -> (Vec<f64>, Vec<f64>) {
    let panels = (max_phase / std::f64::consts::PI).ceil() as usize + 4;
    let gl = GaussLegendre::new(16);
    let h = depth / panels as f64;
    let mut x = Vec::new();
    let mut w = Vec::new();
    for p in 0..panels {
        for (a, b) in gl.mapped(p as f64 * h, (p + 1) as f64 * h) {
            x.push(a);
            w.push(b);
        }
    }
    (x, w)
}

impl TransferModel {
    pub fn new(ms: &ModeSet, medium: &MediumStats, mc: &MCConfig) -> Result<Self> {
        medium.validate()?;
        mc.validate()?;
        let d = ms.depth();
        let k = ms.k();
        let n = ms.len();
        let grid = RadiationGrid::new(ms.xi_cutoff, k, usize::from(mc.radiation_bins > 0), mc.radiation_bins);
        let mut states: Vec<State> =
            ms.modes.iter().map(|m| State { beta: m.beta, weight: 1.0, propagating: true }).collect();
        states.extend(grid.s.iter().zip(&grid.weight_gamma).map(|(s, w)| State {
            beta: *s,
            weight: *w,
            propagating: false,
        }));
        let (x, w) = nodes_for(d, 2.0 * ms.config.n1 * k * d);
        let shapes: Vec<Vec<f64>> = (0..states.len())
            .map(|r| {
                x.iter()
                    .map(|&xi| {
                        if r < n {
                            eval_mode(&ms.modes[r], d, xi)
                        } else {
                            radiating_value(&ms.config, grid.gamma[r - n], xi)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut pairs = Vec::new();
        for r in 0..states.len() {
            for s in r..states.len() {
                let both = r < n && s < n;
                if both && mc.nearest_neighbor && s - r > 1 {
                    continue;
                }
                // the coupling among radiation bins is left out
                if r >= n {
                    continue;
                }
                pairs.push((r, s));
            }
        }
        // Nystrom discretization of the Mercer expansion
        let (mercer, basis, rank_shortfall) = if medium.kernel.is_rank_one() {
            let g: Vec<f64> = x.iter().map(|&xi| medium.kernel.rank_one_factor(xi, d).unwrap_or(0.0)).collect();
            let lam: f64 = g.iter().zip(&w).map(|(g, w)| g * g * w).sum();
            if lam > 0.0 {
                let e: Vec<f64> = g.iter().map(|v| v / lam.sqrt()).collect();
                (vec![lam], vec![e], mc.mercer_terms - 1)
            } else {
                (Vec::new(), Vec::new(), mc.mercer_terms)
            }
        } else {
            let m = x.len();
            let sq: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
            let kmat = DMatrix::from_fn(m, m, |i, j| sq[i] * medium.kernel.eval(x[i], x[j], d) * sq[j]);
            let eig = SymmetricEigen::new(kmat);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
            let top = eig.eigenvalues[order[0]].max(0.0);
            let kept: Vec<usize> =
                order.into_iter().take_while(|&i| eig.eigenvalues[i] > 1e-13 * top).take(mc.mercer_terms).collect();
            let lam = kept.iter().map(|&i| eig.eigenvalues[i]).collect();
            let basis = kept.iter().map(|&i| (0..m).map(|q| eig.eigenvectors[(q, i)] / sq[q]).collect()).collect();
            let short = mc.mercer_terms - kept.len();
            (lam, basis, short)
        };
        let loadings = DMatrix::from_fn(pairs.len(), mercer.len(), |q, p| {
            let (r, s) = pairs[q];
            let e: &Vec<f64> = &basis[p];
            mercer[p].sqrt() * (0..x.len()).map(|i| w[i] * e[i] * shapes[r][i] * shapes[s][i]).sum::<f64>()
        });
        Ok(Self { states, pairs, loadings, mercer, rank_shortfall, k, a: medium.a })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `G_rs`, the variance of the pair process, as the simulation realizes it.
    pub fn pair_variance(&self, q: usize) -> f64 {
        self.loadings.row(q).iter().map(|v| v * v).sum()
    }

    /// Fast-variable step: explicit, or a tenth of the shortest of the
    /// correlation length and the pair beat lengths.
    pub fn step(&self, mc: &MCConfig) -> f64 {
        mc.z_step.unwrap_or_else(|| {
            let fastest = self
                .pairs
                .iter()
                .map(|&(r, s)| (self.states[s].beta - self.states[r].beta).abs())
                .fold(self.a, f64::max);
            0.1 / fastest
        })
    }

    /// Mean power equations of the simulated system: the rate between states
    /// `r` and `s` is `k^4 w_r w_s G_rs a / (2 beta_r beta_s (a^2 + b^2))`.
    pub fn matched_coupling(&self) -> CouplingMatrices {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        for (q, &(r, s)) in self.pairs.iter().enumerate() {
            if r == s {
                continue;
            }
            let (u, v) = (self.states[r], self.states[s]);
            let b = v.beta - u.beta;
            let rate = self.k.powi(4) * u.weight * v.weight * self.pair_variance(q) * self.a
                / (2.0 * u.beta * v.beta * (self.a * self.a + b * b));
            g[(r, s)] = rate;
            g[(s, r)] = rate;
        }
        CouplingMatrices::from_transport(g, DVector::zeros(n))
    }
}

/// Pair processes `C_rs` sampled every half step of the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumRealization {
    /// Sampling interval in the fast variable.
    pub spacing: f64,
    /// `values[q][i]` is `C` for pair `q` at `s = i * spacing`.
    pub values: Vec<Vec<f64>>,
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stationary OU factors with exact transitions, projected on every pair.
pub fn sample_realization(
    model: &TransferModel,
    spacing: f64,
    samples: usize,
    seed: u64,
    index: u64,
) -> MediumRealization {
    let p = model.mercer.len();
    let mut rng = rng_for(seed, index);
    let rho = (-model.a * spacing).exp();
    let kick = (1.0 - rho * rho).sqrt();
    let mut xi: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut values = vec![Vec::with_capacity(samples); model.pairs.len()];
    for i in 0..samples {
        if i > 0 {
            for v in xi.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *v = rho * *v + kick * g;
            }
        }
        for (q, row) in values.iter_mut().enumerate() {
            row.push((0..p).map(|t| model.loadings[(q, t)] * xi[t]).sum());
        }
    }
    MediumRealization { spacing, values }
}

fn grid_for(model: &TransferModel, mc: &MCConfig) -> (usize, f64) {
    let s_max = mc.distance / mc.epsilon;
    if s_max == 0.0 {
        return (0, model.step(mc));
    }
    let steps = (s_max / model.step(mc)).ceil().max(1.0) as usize;
    (steps, s_max / steps as f64)
}

/// Realization `index` of the medium over the whole propagation distance.
pub fn sample_medium(ms: &ModeSet, medium: &MediumStats, mc: &MCConfig, index: u64) -> Result<MediumRealization> {
    let model = TransferModel::new(ms, medium, mc)?;
    let (steps, h) = grid_for(&model, mc);
    Ok(sample_realization(&model, 0.5 * h, 2 * steps + 1, mc.seed, index))
}

/// Transfer matrix of one realization with its unitarity defect
/// `max |T^H T - I|`.
pub fn integrate_transfer(
    model: &TransferModel,
    realization: &MediumRealization,
    mc: &MCConfig,
) -> Result<(DMatrix<Complex64>, f64)> {
    let n = model.len();
    let (steps, h) = grid_for(model, mc);
    if steps > 0
        && (realization.values.first().map_or(0, |v| v.len()) < 2 * steps + 1
            || (realization.spacing - 0.5 * h).abs() > 1e-12 * h)
    {
        return Err(Error::InvalidConfig("realization does not cover the integration grid".into()));
    }
    let half_k2 = 0.5 * model.k * model.k;
    let amp: Vec<f64> = model
        .pairs
        .iter()
        .map(|&(r, s)| {
            let (u, v) = (model.states[r], model.states[s]);
            half_k2 * (u.weight * v.weight).sqrt() / (u.beta * v.beta).sqrt()
        })
        .collect();
    let scale = mc.epsilon.sqrt() * h;
    let mut t = DMatrix::<Complex64>::identity(n, n);
    let mut gen = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..steps {
        let s_mid = (i as f64 + 0.5) * h;
        gen.fill(Complex64::new(0.0, 0.0));
        for (q, &(r, s)) in model.pairs.iter().enumerate() {
            let c = realization.values[q][2 * i + 1] * amp[q] * scale;
            let b = model.states[s].beta - model.states[r].beta;
            let e = Complex64::from_polar(c, b * s_mid) * Complex64::i();
            gen[(r, s)] += e;
            if r != s {
                gen[(s, r)] -= e.conj();
            }
        }
        t = gen.clone().exp() * t;
    }
    let defect = (t.adjoint() * &t - DMatrix::<Complex64>::identity(n, n)).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if defect > 1e-8 {
        return Err(Error::StepTooLarge { drift: defect });
    }
    Ok((t, defect))
}

/// Monte Carlo mean powers `E |T_{j, l0}|^2` at the configured distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    /// Per state, propagating modes first.
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub max_unitarity_defect: f64,
    pub realizations: usize,
    pub rank_shortfall: usize,
    /// `|T_{j, l0}|^2` per realization and state.
    pub samples: Vec<Vec<f64>>,
}

impl MCEstimate {
    pub fn propagating_total(&self, n: usize) -> f64 {
        self.mean[..n].iter().sum()
    }
}

/// `l0` is 1-based. Realizations run in parallel on independent RNG
/// streams and are reduced in index order.
pub fn estimate_mean_powers(ms: &ModeSet, medium: &MediumStats, mc: &MCConfig, l0: usize) -> Result<MCEstimate> {
    let model = TransferModel::new(ms, medium, mc)?;
    estimate_with_model(&model, mc, l0)
}

pub fn estimate_with_model(model: &TransferModel, mc: &MCConfig, l0: usize) -> Result<MCEstimate> {
    mc.validate()?;
    let n = model.len();
    if l0 == 0 || l0 > model.states.iter().filter(|s| s.propagating).count() {
        return Err(Error::IndexOutOfRange { op: "estimate_mean_powers", index: l0, max: n });
    }
    let (steps, h) = grid_for(model, mc);
    let runs: Vec<(Vec<f64>, f64)> = (0..mc.realizations as u64)
        .into_par_iter()
        .map(|idx| {
            let real = sample_realization(model, 0.5 * h, 2 * steps + 1, mc.seed, idx);
            let (t, defect) = integrate_transfer(model, &real, mc)?;
            Ok(((0..n).map(|j| t[(j, l0 - 1)].norm_sqr()).collect(), defect))
        })
        .collect::<Result<_>>()?;
    let m = runs.len() as f64;
    let mut mean = vec![0.0; n];
    for (p, _) in &runs {
        for j in 0..n {
            mean[j] += p[j];
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);
    let std_err = (0..n)
        .map(|j| {
            let var = runs.iter().map(|(p, _)| (p[j] - mean[j]).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            (var / m).sqrt()
        })
        .collect();
    let max_unitarity_defect = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(MCEstimate {
        mean,
        std_err,
        max_unitarity_defect,
        realizations: runs.len(),
        rank_shortfall: model.rank_shortfall,
        samples: runs.into_iter().map(|r| r.0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::Kernel;
    use crate::waveguide::{solve_dispersion, WaveguideConfig};

    fn three_modes() -> ModeSet {
        solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, 3, 0.25).unwrap()).unwrap()
    }

    fn config(eps: f64) -> MCConfig {
        MCConfig {
            epsilon: eps,
            realizations: 8,
            radiation_bins: 0,
            seed: 11,
            distance: 0.5,
            z_step: None,
            nearest_neighbor: true,
            mercer_terms: 24,
        }
    }

    #[test]
    fn rank_one_kernel_has_one_factor() {
        let ms = three_modes();
        let med = MediumStats::new(Kernel::SeparableCosine { sigma2: 1e-4 }, 0.05).unwrap();
        let model = TransferModel::new(&ms, &med, &config(1e-3)).unwrap();
        assert_eq!(model.mercer.len(), 1);
        assert_eq!(model.rank_shortfall, 23);
        // Var C_jl = G_jl from the overlap module
        for (q, &(r, s)) in model.pairs.iter().enumerate() {
            let g = crate::medium::overlap_pp(&ms, &med, r + 1, s + 1).unwrap();
            assert!((model.pair_variance(q) - g).abs() < 1e-12 * g.max(1e-300), "{r} {s}");
        }
        assert_eq!(model.pairs, vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]);
    }

    #[test]
    fn exponential_kernel_mercer_reproduces_overlaps() {
        let ms = three_modes();
        let med = MediumStats::new(Kernel::StationaryExponential { sigma2: 1.0, corr_length: 5.0 }, 0.05).unwrap();
        let mut mc = config(1e-3);
        mc.mercer_terms = 400;
        mc.nearest_neighbor = false;
        let model = TransferModel::new(&ms, &med, &mc).unwrap();
        for (q, &(r, s)) in model.pairs.iter().enumerate() {
            let g = crate::medium::overlap_pp(&ms, &med, r + 1, s + 1).unwrap();
            assert!((model.pair_variance(q) - g).abs() < 1e-3 * g, "{r} {s}: {} {g}", model.pair_variance(q));
        }
    }

    #[test]
    fn ou_samples_have_exponential_covariance() {
        let ms = three_modes();
        let med = MediumStats::new(Kernel::SeparableCosine { sigma2: 1.0 }, 0.5).unwrap();
        let model = TransferModel::new(&ms, &med, &config(1e-3)).unwrap();
        let n = 40_000;
        let dt = 0.4;
        let real = sample_realization(&model, dt, n, 5, 0);
        let q = 1;
        let g = model.pair_variance(q);
        let c = &real.values[q];
        for lag in [0usize, 1, 3] {
            let prod: Vec<f64> = (0..n - lag).map(|i| c[i] * c[i + lag]).collect();
            let m = prod.iter().sum::<f64>() / prod.len() as f64;
            // integrated autocorrelation inflates the naive standard error
            let tau = (1.0 + (-0.5 * dt).exp()) / (1.0 - (-0.5 * dt).exp());
            let se = (prod.iter().map(|v| (v - m).powi(2)).sum::<f64>() / prod.len() as f64 * tau / prod.len() as f64)
                .sqrt();
            let want = g * (-0.5 * dt * lag as f64).exp();
            assert!((m - want).abs() < 3.0 * se, "lag {lag}: {m} vs {want} (se {se})");
        }
        // same seed and index, same realization
        assert_eq!(sample_realization(&model, dt, 50, 5, 3), sample_realization(&model, dt, 50, 5, 3));
        assert_ne!(sample_realization(&model, dt, 50, 5, 3), sample_realization(&model, dt, 50, 5, 4));
    }

    #[test]
    fn zero_medium_and_zero_distance() {
        let ms = three_modes();
        let med = MediumStats::new(Kernel::Constant { sigma2: 0.0 }, 0.5).unwrap();
        let mc = config(1e-3);
        let est = estimate_mean_powers(&ms, &med, &mc, 2).unwrap();
        assert_eq!(est.mean, vec![0.0, 1.0, 0.0]);
        let med = MediumStats::new(Kernel::SeparableCosine { sigma2: 1e-3 }, 0.5).unwrap();
        let mut mc0 = mc.clone();
        mc0.distance = 0.0;
        let est = estimate_mean_powers(&ms, &med, &mc0, 1).unwrap();
        assert_eq!(est.mean, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn realizations_are_unitary_with_radiation_bins() {
        let ms = three_modes();
        let med = MediumStats::new(Kernel::StationaryExponential { sigma2: 1e-4, corr_length: 3.0 }, 0.2).unwrap();
        let mut mc = config(1e-2);
        mc.radiation_bins = 6;
        let model = TransferModel::new(&ms, &med, &mc).unwrap();
        assert_eq!(model.len(), 9);
        let (steps, h) = grid_for(&model, &mc);
        let real = sample_realization(&model, 0.5 * h, 2 * steps + 1, 1, 0);
        let (t, defect) = integrate_transfer(&model, &real, &mc).unwrap();
        assert!(defect < 1e-8);
        for l in 0..9 {
            let col: f64 = (0..9).map(|j| t[(j, l)].norm_sqr()).sum();
            assert!((col - 1.0).abs() < 1e-8);
        }
        let c = model.matched_coupling();
        assert!(c.gamma_c.iter().all(|v| v.is_finite()));
    }
}
