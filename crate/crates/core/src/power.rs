//! Mean mode powers: the coupled power equations, their asymptotic decay rate
//! and a jump-Markov representation used as an independent estimator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::CouplingMatrices;

/// Whether the coupling has the nearest-neighbor structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossModel {
    Full,
    NearestNeighbor,
}

impl LossModel {
    fn detect(c: &CouplingMatrices) -> Self {
        let n = c.n();
        let tri = (0..n).all(|j| (0..n).all(|l| j.abs_diff(l) <= 1 || c.gamma_c[(j, l)] == 0.0));
        let edge = (0..n.saturating_sub(2)).all(|j| c.lambda_c[j] == 0.0);
        if tri && edge {
            LossModel::NearestNeighbor
        } else {
            LossModel::Full
        }
    }
}

/// Mean powers `T_j^l(z)` on a grid of checkpoints.
///
/// Entry `(j, l)` of `matrices[i]` times `exp(log_scale[i])` is the mean power
/// in mode `j + 1` at `z_grid[i]` for unit input in mode `l + 1`. The scale is
/// split off so that long propagation distances do not underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerEvolution {
    pub z_grid: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
    pub log_scale: Vec<f64>,
    pub loss_model: LossModel,
}

impl PowerEvolution {
    pub fn n(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    /// Index of the checkpoint at `z` (relative tolerance `1e-12`).
    pub fn checkpoint(&self, z: f64) -> Result<usize> {
        self.z_grid.iter().position(|&g| (g - z).abs() <= 1e-12 * z.abs().max(1.0)).ok_or(Error::CheckpointMissing(z))
    }

    /// `T` at checkpoint `i` with the scale applied.
    pub fn matrix(&self, i: usize) -> DMatrix<f64> {
        &self.matrices[i] * self.log_scale[i].exp()
    }

    pub fn value(&self, i: usize, j: usize, l: usize) -> f64 {
        self.matrices[i][(j, l)] * self.log_scale[i].exp()
    }

    /// `log sum_j T_j^l` at checkpoint `i`.
    pub fn log_total_power(&self, i: usize, l: usize) -> f64 {
        self.matrices[i].column(l).sum().ln() + self.log_scale[i]
    }

    pub fn column_sums(&self, i: usize) -> Vec<f64> {
        let s = self.log_scale[i].exp();
        self.matrices[i].column_iter().map(|c| c.sum() * s).collect()
    }
}

fn uniform_grid(z_max: f64, checkpoints: usize) -> Vec<f64> {
    let n = checkpoints.max(1);
    (0..=n).map(|i| z_max * i as f64 / n as f64).collect()
}

/// Growth bound of `exp(G z)`: the largest eigenvalue of the symmetric part.
fn growth_bound(g: &DMatrix<f64>) -> f64 {
    let sym = (g + g.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.max()
}

/// Solves `dT/dz = (Gamma^c - diag(Lambda^c)) T`, `T(0) = I`, on a uniform
/// grid of `checkpoints + 1` points in `[0, z_max]`.
pub fn integrate_power(coupling: &CouplingMatrices, z_max: f64, checkpoints: usize) -> Result<PowerEvolution> {
    if !(z_max.is_finite() && z_max > 0.0) {
        return Err(Error::InvalidConfig(format!("z_max must be positive, got {z_max}")));
    }
    integrate_power_at(coupling, &uniform_grid(z_max, checkpoints))
}

/// As [`integrate_power`] on an explicit list of nonnegative distances.
///
/// Each checkpoint is an independent matrix exponential of the shifted
/// generator, so errors do not accumulate along the grid.
pub fn integrate_power_at(coupling: &CouplingMatrices, z_grid: &[f64]) -> Result<PowerEvolution> {
    if z_grid.iter().any(|z| !(z.is_finite() && *z >= 0.0)) {
        return Err(Error::InvalidConfig("checkpoints must be finite and nonnegative".into()));
    }
    let g = coupling.generator();
    let n = g.nrows();
    let mu = growth_bound(&g);
    // the shift only pays off when the whole spectrum decays
    let shift = if mu < -1e-12 { mu } else { 0.0 };
    let shifted = &g - DMatrix::identity(n, n) * shift;
    let mut matrices = Vec::with_capacity(z_grid.len());
    let mut log_scale = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let m = if z == 0.0 { DMatrix::identity(n, n) } else { (&shifted * z).exp() };
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::StiffnessFailure { z, norm: shifted.norm() * z });
        }
        matrices.push(m);
        log_scale.push(shift * z);
    }
    Ok(PowerEvolution { z_grid: z_grid.to_vec(), matrices, log_scale, loss_model: LossModel::detect(coupling) })
}

/// Same evolution through a symmetric eigendecomposition of the generator.
/// Used as an independent check of the matrix-exponential route.
pub fn integrate_power_spectral(coupling: &CouplingMatrices, z_grid: &[f64]) -> Result<PowerEvolution> {
    let g = coupling.generator();
    if (&g - g.transpose()).abs().max() > 1e-13 * g.abs().max().max(1e-300) {
        return Err(Error::InvalidGenerator("spectral route needs a symmetric generator".into()));
    }
    let eig = SymmetricEigen::new(g);
    let top = eig.eigenvalues.max();
    let shift = if top < -1e-12 { top } else { 0.0 };
    let v = &eig.eigenvectors;
    let mut matrices = Vec::new();
    let mut log_scale = Vec::new();
    for &z in z_grid {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| ((l - shift) * z).exp()));
        matrices.push(v * d * v.transpose());
        log_scale.push(shift * z);
    }
    Ok(PowerEvolution { z_grid: z_grid.to_vec(), matrices, log_scale, loss_model: LossModel::detect(coupling) })
}

/// Asymptotic decay of the total propagating power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub lambda_inf: f64,
    pub lambda_min: f64,
    pub lambda_bar: f64,
    pub perron_vector: Vec<f64>,
    /// Distance between the two smallest eigenvalues of `-Gamma^c + diag(Lambda^c)`.
    pub spectral_gap: f64,
}

/// Number of connected components of the graph with an edge wherever
/// `Gamma^c_jl > 0`.
pub fn coupling_components(gamma_c: &DMatrix<f64>) -> usize {
    let n = gamma_c.nrows();
    let mut seen = vec![false; n];
    let mut comps = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        comps += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if w != v && !seen[w] && (gamma_c[(v, w)] > 0.0 || gamma_c[(w, v)] > 0.0) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    comps
}

/// Smallest eigenvalue of `-Gamma^c + diag(Lambda^c)` with its Perron vector.
pub fn decay_rate(coupling: &CouplingMatrices) -> Result<DecayReport> {
    let n = coupling.n();
    let comps = coupling_components(&coupling.gamma_c);
    if comps > 1 {
        return Err(Error::NotIrreducible { components: comps });
    }
    let lam = &coupling.lambda_c;
    if !lam.iter().any(|v| *v > 0.0) {
        return Err(Error::InvalidGenerator("decay rate needs positive loss on at least one mode".into()));
    }
    let lambda_min = lam.min();
    let lambda_bar = lam.sum() / n as f64;
    let a = -coupling.generator();
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let i0 = order[0];
    let mut v: DVector<f64> = eig.eigenvectors.column(i0).into_owned();
    if v.sum() < 0.0 {
        v = -v;
    }
    let min_entry = v.min();
    if min_entry < -1e-12 {
        return Err(Error::PerronViolation { min_entry });
    }
    v /= v.norm();
    let spectral_gap = if n > 1 { eig.eigenvalues[order[1]] - eig.eigenvalues[i0] } else { f64::INFINITY };
    Ok(DecayReport {
        lambda_inf: eig.eigenvalues[i0],
        lambda_min,
        lambda_bar,
        perron_vector: v.iter().cloned().collect(),
        spectral_gap,
    })
}

/// Gap between the two largest eigenvalues of the generator, which sets the
/// relaxation length `1/gap` of the mode powers.
pub fn spectral_gap(coupling: &CouplingMatrices) -> f64 {
    let mut ev: Vec<f64> = SymmetricEigen::new(coupling.generator()).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if ev.len() < 2 {
        f64::INFINITY
    } else {
        ev[0] - ev[1]
    }
}

/// Slope of `log sum_j T_j^l` between the last two checkpoints.
pub fn final_log_slope(p: &PowerEvolution, l: usize) -> f64 {
    let k = p.z_grid.len();
    let (i, j) = (k - 2, k - 1);
    (p.log_total_power(j, l) - p.log_total_power(i, l)) / (p.z_grid[j] - p.z_grid[i])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub tau: f64,
    /// `Lambda_inf` with transport `Gamma^c / tau`.
    pub strong_lambda_inf: f64,
    pub strong_rel_error: f64,
    /// `sup |T_j^l / ((1/N) exp(-lambda_bar z_max)) - 1|` for the strong branch.
    pub strong_power_rel_dev: f64,
    /// `Lambda_inf` with transport `tau Gamma^c`.
    pub weak_lambda_inf: f64,
    pub weak_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub lambda_min: f64,
    pub lambda_bar: f64,
    /// Entries ordered by decreasing `tau`.
    pub entries: Vec<SweepEntry>,
    pub strong_monotone: bool,
    pub weak_monotone: bool,
}

/// Strong and weak coupling limits of the decay rate.
pub fn coupling_strength_sweep(coupling: &CouplingMatrices, tau_list: &[f64], z_max: f64) -> Result<SweepReport> {
    if tau_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidConfig("tau values must be positive".into()));
    }
    let mut taus = tau_list.to_vec();
    taus.sort_by(|a, b| b.total_cmp(a));
    let n = coupling.n() as f64;
    let mut entries = Vec::new();
    let mut base = None;
    for &tau in &taus {
        let mut strong = coupling.clone();
        strong.gamma_c /= tau;
        let mut weak = coupling.clone();
        weak.gamma_c *= tau;
        let ds = decay_rate(&strong)?;
        let dw = decay_rate(&weak)?;
        base.get_or_insert((ds.lambda_min, ds.lambda_bar));
        let p = integrate_power_at(&strong, &[z_max])?;
        let target_log = -ds.lambda_bar * z_max - n.ln();
        let m = &p.matrices[0];
        let dev = m.iter().map(|v| ((v.ln() + p.log_scale[0] - target_log).exp() - 1.0).abs()).fold(0.0, f64::max);
        entries.push(SweepEntry {
            tau,
            strong_lambda_inf: ds.lambda_inf,
            strong_rel_error: (ds.lambda_inf - ds.lambda_bar).abs() / ds.lambda_bar,
            strong_power_rel_dev: dev,
            weak_lambda_inf: dw.lambda_inf,
            weak_rel_error: (dw.lambda_inf - dw.lambda_min).abs() / dw.lambda_min.max(f64::MIN_POSITIVE),
        });
    }
    let mono = |f: &dyn Fn(&SweepEntry) -> f64| entries.windows(2).all(|w| f(&w[1]) <= f(&w[0]) * (1.0 + 1e-9) + 1e-15);
    let strong_monotone = mono(&|e| e.strong_rel_error);
    let weak_monotone = mono(&|e| e.weak_rel_error);
    let (lambda_min, lambda_bar) = base.unwrap_or((coupling.lambda_c.min(), coupling.lambda_c.mean()));
    Ok(SweepReport { lambda_min, lambda_bar, entries, strong_monotone, weak_monotone })
}

/// Monte Carlo estimate of one column of the mean power matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovEstimate {
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub paths: usize,
}

fn check_generator(c: &CouplingMatrices) -> Result<()> {
    let g = &c.gamma_c;
    let n = g.nrows();
    let scale = g.abs().max().max(1e-300);
    for j in 0..n {
        for l in 0..n {
            if j != l && g[(j, l)] < 0.0 {
                return Err(Error::InvalidGenerator(format!("negative rate at ({}, {})", j + 1, l + 1)));
            }
            if (g[(j, l)] - g[(l, j)]).abs() > 1e-13 * scale {
                return Err(Error::InvalidGenerator("transport matrix must be symmetric".into()));
            }
        }
        if g.row(j).sum().abs() > 1e-12 * scale {
            return Err(Error::InvalidGenerator(format!("row {} does not sum to zero", j + 1)));
        }
        if c.lambda_c[j] < 0.0 {
            return Err(Error::InvalidGenerator(format!("negative loss on mode {}", j + 1)));
        }
    }
    Ok(())
}

/// One path of the jump chain with generator `Gamma^c` started from `l0`
/// (0-based). Returns the state at `z` and the loss weight
/// `exp(-int_0^z Lambda^c(Y_s) ds)`.
fn jump_path(c: &CouplingMatrices, z: f64, l0: usize, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let n = c.n();
    let mut state = l0;
    let mut t = 0.0;
    let mut log_w = 0.0;
    loop {
        let rate = -c.gamma_c[(state, state)];
        let hold = if rate > 0.0 {
            let u: f64 = 1.0 - rng.gen::<f64>();
            -u.ln() / rate
        } else {
            f64::INFINITY
        };
        if t + hold >= z {
            log_w -= c.lambda_c[state] * (z - t);
            return (state, log_w.exp());
        }
        log_w -= c.lambda_c[state] * hold;
        t += hold;
        let mut pick = rng.gen::<f64>() * rate;
        let mut next = state;
        for l in 0..n {
            if l == state {
                continue;
            }
            let r = c.gamma_c[(state, l)];
            if r <= 0.0 {
                continue;
            }
            next = l;
            if pick < r {
                break;
            }
            pick -= r;
        }
        state = next;
    }
}

/// Feynman-Kac estimator of `T_j^{l0}(z)` for all `j`.
///
/// Path `p` uses its own ChaCha stream derived from `(seed, p)` and the
/// per-path results are reduced in path order, so the estimate does not
/// depend on the thread count.
pub fn markov_estimate(c: &CouplingMatrices, z: f64, l0: usize, n_paths: usize, seed: u64) -> Result<MarkovEstimate> {
    check_generator(c)?;
    let n = c.n();
    if l0 == 0 || l0 > n {
        return Err(Error::IndexOutOfRange { op: "markov_estimate", index: l0, max: n });
    }
    if n_paths == 0 {
        return Err(Error::InvalidConfig("n_paths must be at least 1".into()));
    }
    let results: Vec<(usize, f64)> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            jump_path(c, z, l0 - 1, &mut rng)
        })
        .collect();
    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    for &(j, w) in &results {
        s1[j] += w;
        s2[j] += w * w;
    }
    let np = n_paths as f64;
    let mean: Vec<f64> = s1.iter().map(|s| s / np).collect();
    let std_err = (0..n)
        .map(|j| {
            if n_paths < 2 {
                return 0.0;
            }
            let var = (s2[j] / np - mean[j] * mean[j]).max(0.0) * np / (np - 1.0);
            (var / np).sqrt()
        })
        .collect();
    Ok(MarkovEstimate { mean, std_err, paths: n_paths })
}

/// Decay-and-phase rate `Q_jm` of the cross moments between distinct modes
/// (1-based indices).
pub fn q_phase(c: &CouplingMatrices, j: usize, m: usize) -> Result<Complex64> {
    let n = c.n();
    for idx in [j, m] {
        if idx == 0 || idx > n {
            return Err(Error::IndexOutOfRange { op: "q_phase", index: idx, max: n });
        }
    }
    let (j, m) = (j - 1, m - 1);
    let g1 = &c.gamma_1;
    let re = 0.5
        * (c.gamma_c[(j, j)] + c.gamma_c[(m, m)]
            - (g1[(j, j)] + g1[(m, m)] - 2.0 * g1[(j, m)])
            - (c.lambda_c[j] + c.lambda_c[m]));
    let im = 0.5 * (c.gamma_s[(m, m)] - c.gamma_s[(j, j)] - (c.lambda_s[m] - c.lambda_s[j]));
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_mode(g: f64, lam: [f64; 2]) -> CouplingMatrices {
        let gc = DMatrix::from_row_slice(2, 2, &[0.0, g, g, 0.0]);
        CouplingMatrices::from_transport(gc, DVector::from_column_slice(&lam))
    }

    pub(crate) fn chain(n: usize, rate: f64, loss_last: f64) -> CouplingMatrices {
        let mut gc = DMatrix::zeros(n, n);
        for j in 0..n - 1 {
            gc[(j, j + 1)] = rate * (1.0 + 0.1 * j as f64);
            gc[(j + 1, j)] = gc[(j, j + 1)];
        }
        let mut lam = DVector::zeros(n);
        lam[n - 1] = loss_last;
        CouplingMatrices::from_transport(gc, lam)
    }

    #[test]
    fn two_mode_closed_form() {
        let g = 0.7;
        let c = two_mode(g, [0.0, 0.0]);
        let p = integrate_power(&c, 5.0, 10).unwrap();
        for (i, &z) in p.z_grid.iter().enumerate() {
            let e = (-2.0 * g * z).exp();
            assert!((p.value(i, 0, 0) - 0.5 * (1.0 + e)).abs() < 1e-13);
            assert!((p.value(i, 1, 0) - 0.5 * (1.0 - e)).abs() < 1e-13);
        }
        assert_eq!(p.matrix(0), DMatrix::identity(2, 2));
    }

    #[test]
    fn decoupled_decay() {
        let c = CouplingMatrices::from_transport(DMatrix::zeros(3, 3), DVector::from_column_slice(&[0.1, 0.5, 2.0]));
        let p = integrate_power(&c, 4.0, 4).unwrap();
        for i in 0..p.z_grid.len() {
            for j in 0..3 {
                for l in 0..3 {
                    let want = if j == l { (-c.lambda_c[j] * p.z_grid[i]).exp() } else { 0.0 };
                    assert!((p.value(i, j, l) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn conservation_semigroup_and_spectral_agreement() {
        let c = chain(10, 0.3, 0.0);
        let p = integrate_power(&c, 600.0, 12).unwrap();
        for i in 0..p.z_grid.len() {
            for s in p.column_sums(i) {
                assert!((s - 1.0).abs() < 1e-12);
            }
            assert!(p.matrix(i).min() > -1e-12);
        }
        let q = integrate_power_spectral(&c, &p.z_grid).unwrap();
        for i in 0..p.z_grid.len() {
            assert!((p.matrix(i) - q.matrix(i)).abs().max() < 1e-11);
        }
        let z = integrate_power_at(&c, &[10.0, 25.0, 35.0]).unwrap();
        let prod = z.matrix(1) * z.matrix(0);
        assert!((prod - z.matrix(2)).abs().max() < 1e-12);
        // equidistribution
        let last = p.matrix(p.z_grid.len() - 1);
        assert!(last.iter().all(|v| (v - 0.1).abs() < 1e-3));
    }

    #[test]
    fn log_scale_survives_long_distances() {
        let c = chain(6, 0.5, 2.0);
        let d = decay_rate(&c).unwrap();
        let z = 1000.0 / d.lambda_inf;
        let p = integrate_power_at(&c, &[0.0, 0.5 * z, z]).unwrap();
        assert!(p.log_scale[2] < -700.0);
        let slope = final_log_slope(&p, 0);
        assert!((slope + d.lambda_inf).abs() < 1e-6 * d.lambda_inf);
        assert!(p.matrices[2].iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn decay_rate_two_mode_closed_form() {
        let c = two_mode(1.0, [0.5, 1.5]);
        let d = decay_rate(&c).unwrap();
        assert!((d.lambda_inf - (2.0 - 1.25f64.sqrt())).abs() < 1e-14);
        assert!(d.lambda_min <= d.lambda_inf && d.lambda_inf <= d.lambda_bar);
        assert!(d.perron_vector.iter().all(|v| *v > 0.0));
        let one = CouplingMatrices::from_transport(DMatrix::zeros(1, 1), DVector::from_element(1, 0.3));
        assert_eq!(decay_rate(&one).unwrap().lambda_inf, 0.3);
        let red = CouplingMatrices::from_transport(DMatrix::zeros(2, 2), DVector::from_element(2, 0.3));
        assert!(matches!(decay_rate(&red), Err(Error::NotIrreducible { components: 2 })));
    }

    #[test]
    fn sweep_limits() {
        let mut c = chain(5, 1.0, 0.0);
        c.lambda_c = DVector::from_column_slice(&[0.2, 0.3, 0.5, 0.8, 1.2]);
        let r = coupling_strength_sweep(&c, &[1.0, 1e-1, 1e-2, 1e-3, 1e-4], 2.0).unwrap();
        assert!(r.strong_monotone && r.weak_monotone);
        let last = r.entries.last().unwrap();
        assert!(last.strong_rel_error < 1e-2 && last.weak_rel_error < 1e-2);
        assert!(last.strong_power_rel_dev < 1e-2);
        let d = decay_rate(&c).unwrap();
        assert_eq!(r.entries[0].strong_lambda_inf, d.lambda_inf);
    }

    #[test]
    fn markov_trivial_and_two_mode() {
        let z = CouplingMatrices::from_transport(DMatrix::zeros(3, 3), DVector::zeros(3));
        let e = markov_estimate(&z, 3.0, 2, 100, 1).unwrap();
        assert_eq!(e.mean, vec![0.0, 1.0, 0.0]);
        let c = two_mode(0.4, [0.0, 0.0]);
        let e = markov_estimate(&c, 1.5, 1, 20_000, 42).unwrap();
        let x = (-2.0 * 0.4 * 1.5f64).exp();
        let exact = [0.5 * (1.0 + x), 0.5 * (1.0 - x)];
        for j in 0..2 {
            assert!((e.mean[j] - exact[j]).abs() < 3.0 * e.std_err[j]);
        }
        let again = markov_estimate(&c, 1.5, 1, 20_000, 42).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn markov_rejects_bad_generator() {
        let mut c = two_mode(0.4, [0.0, 0.0]);
        c.gamma_c[(0, 1)] = -1.0;
        assert!(matches!(markov_estimate(&c, 1.0, 1, 10, 0), Err(Error::InvalidGenerator(_))));
    }

    #[test]
    fn q_phase_antisymmetry() {
        let mut c = chain(3, 0.5, 0.2);
        c.gamma_s = DMatrix::from_row_slice(3, 3, &[0.0, 0.3, -0.1, -0.3, 0.0, 0.4, 0.1, -0.4, 0.0]);
        c.impose_row_sums();
        c.gamma_1 = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, 0.2, 0.8, 0.3, 0.1, 0.3, 0.9]);
        c.lambda_s = DVector::from_column_slice(&[0.0, 0.05, -0.1]);
        let q12 = q_phase(&c, 1, 2).unwrap();
        let q21 = q_phase(&c, 2, 1).unwrap();
        assert_eq!(q12, q21.conj());
        // independent evaluation from the entries
        let re = 0.5 * (c.gamma_c[(0, 0)] + c.gamma_c[(1, 1)] - (1.0 + 0.8 - 0.4) - (0.0 + 0.0));
        let im = 0.5 * (c.gamma_s[(1, 1)] - c.gamma_s[(0, 0)] - 0.05);
        assert!((q12.re - re).abs() < 1e-15 && (q12.im - im).abs() < 1e-15);
        let zero = CouplingMatrices::from_transport(DMatrix::zeros(2, 2), DVector::zeros(2));
        assert_eq!(q_phase(&zero, 1, 2).unwrap(), Complex64::new(0.0, 0.0));
        assert!(q_phase(&zero, 1, 3).is_err());
    }
}
