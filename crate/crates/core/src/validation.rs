//! The acceptance battery: each criterion runs a desk-scale experiment and
//! reports named checks, so that a failure points at the broken invariant.

use nalgebra::DVector;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

use crate::diffusion::{
    eigenmode_profile, grid_convergence, matched_chain, principal_eigenmode, refocus_kernel, solve_diffusion,
    BottomBoundary, DiffusionConfig, TimeScheme,
};
use crate::error::Result;
use crate::medium::{assemble_coupling, CouplingMatrices, Kernel, MediumStats};
use crate::montecarlo::{estimate_with_model, MCConfig, TransferModel};
use crate::power::{
    coupling_strength_sweep, decay_rate, final_log_slope, integrate_power, integrate_power_at, spectral_gap,
};
use crate::refocus::{
    default_x_tilde, homogeneous_profile, quadratic_phase_filter, random_profile, refocus_metrics, MirrorSpec,
    Normalization, PulseSpec,
};
use crate::special::sinc;
use crate::waveguide::{dispersion_residual, solve_dispersion, ModeSet, WaveguideConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Not applicable to the inputs; counts as passed.
    pub skipped: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let skipped = self.checks.iter().filter(|c| c.skipped).count();
        let mut tail = if failed.is_empty() { String::new() } else { format!(" [failed: {}]", failed.join(", ")) };
        if skipped > 0 {
            tail.push_str(&format!(" [{skipped} skipped]"));
        }
        format!(
            "{} criterion {:>2}: {} ({:.2} s){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            tail
        )
    }
}

struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, skipped: false, detail: detail.into() });
    }

    fn skip(&mut self, name: &str, reason: &str) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: true,
            skipped: true,
            detail: format!("skipped: {reason}"),
        });
    }

    fn finish(
        mut self,
        id: u32,
        title: &'static str,
        start: Instant,
        budget: f64,
        outcome: Result<()>,
    ) -> CriterionReport {
        if let Err(e) = outcome {
            self.check("no numerical error", false, e.to_string());
        }
        let seconds = start.elapsed().as_secs_f64();
        self.check("runtime", seconds < budget, format!("{seconds:.3} s, budget {budget} s"));
        let passed = self.checks.iter().all(|c| c.passed);
        CriterionReport { id, title, passed, seconds, checks: self.checks }
    }
}

type Criterion = fn() -> CriterionReport;

/// All criteria in order.
pub fn criteria() -> Vec<(u32, Criterion)> {
    vec![
        (1, dispersion_roots),
        (2, spacing_trend),
        (3, homogeneous_sinc_limit),
        (4, conservation_and_equidistribution),
        (5, decay_rate_machinery),
        (6, diffusion_oracles),
        (7, figure_shapes),
        (8, monte_carlo_vs_ode),
        (9, dispersion_kernels),
        (10, mirror_size_independence),
    ]
}

pub fn run_suite() -> Vec<CriterionReport> {
    criteria().into_iter().map(|(_, f)| f()).collect()
}

fn waveguide(modes: usize, frac: f64) -> Result<ModeSet> {
    solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, modes, frac)?)
}

pub fn dispersion_roots() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        for n in [5usize, 10, 34, 100] {
            for frac in [0.25, 0.5, 0.75] {
                let ms = waveguide(n, frac)?;
                let c = ms.config.mode_parameter();
                let mut bracket = true;
                let mut worst: f64 = 0.0;
                for (j, m) in ms.modes.iter().enumerate() {
                    let j = (j + 1) as f64;
                    bracket &= m.sigma > PI / 2.0 + (j - 1.0) * PI && m.sigma <= (j * PI).min(c);
                    worst = worst.max(dispersion_residual(c, m.sigma).abs());
                }
                let tag = format!("N={n} frac={frac}");
                r.check(
                    &format!("{tag}: mode count"),
                    ms.len() == (c / PI).floor() as usize && ms.len() == n,
                    format!("{} modes", ms.len()),
                );
                r.check(&format!("{tag}: brackets"), bracket, "");
                r.check(&format!("{tag}: residual"), worst < 1e-10, format!("{worst:e}"));
            }
        }
        Ok(())
    })();
    r.finish(1, "dispersion roots, brackets and mode count", start, 1.0, outcome)
}

pub fn spacing_trend() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let base = WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, 40, 0.5)?;
        let mut sups = Vec::new();
        for k in 0..4 {
            let cfg = WaveguideConfig::new(20.0, 2.0, 1.0, base.omega * 2f64.powi(k))?;
            let ms = solve_dispersion(&cfg)?;
            sups.push(ms.asymptotic_spacing_report(0.6).first_difference.unwrap_or(f64::NAN));
        }
        // the bound O(N^(1/2 - 3 alpha/2)) allows a factor 2^(-0.4) per doubling
        let bound = 2f64.powf(0.5 - 1.5 * 0.6);
        for w in sups.windows(2) {
            r.check(
                "sup spacing error decays at the O(N^(1/2-3a/2)) rate",
                w[1] <= bound * w[0],
                format!("{:e} -> {:e}", w[0], w[1]),
            );
            r.check("sup spacing error halves per doubling", w[1] <= 0.5 * w[0], format!("{:e} -> {:e}", w[0], w[1]));
        }
        Ok(())
    })();
    r.finish(2, "asymptotic mode spacing trend", start, 5.0, outcome)
}

pub fn homogeneous_sinc_limit() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let mirror = MirrorSpec::reference(0.0);
        let x = default_x_tilde();
        let ratio = mirror.aperture_ratio(20.0);
        let mut errs = Vec::new();
        for n in [34usize, 68, 136] {
            let ms = waveguide(n, 0.5)?;
            let p = homogeneous_profile(&ms, &mirror, 10.0, &x, Normalization::ApertureScaled)?;
            errs.push(x.iter().zip(&p.values).map(|(t, v)| (v - ratio * sinc(2.0 * PI * t)).abs()).fold(0.0, f64::max));
        }
        r.check("monotone decrease", errs.windows(2).all(|w| w[1] < w[0]), format!("{errs:?}"));
        let last = *errs.last().unwrap_or(&f64::NAN);
        r.check("below 5% of the aperture ratio", last < 0.05 * ratio, format!("{last:e} vs {:e}", 0.05 * ratio));
        Ok(())
    })();
    r.finish(3, "homogeneous profile tends to the sinc limit", start, 10.0, outcome)
}

fn lossless(c: &CouplingMatrices) -> CouplingMatrices {
    CouplingMatrices::from_transport(c.gamma_c.clone(), DVector::zeros(c.n()))
}

pub fn reference_medium() -> MediumStats {
    MediumStats { kernel: Kernel::StationaryExponential { sigma2: 1.0, corr_length: 4.0 }, a: 1.0 }
}

pub fn conservation_and_equidistribution() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        for n in [10usize, 50] {
            let ms = waveguide(n, 0.5)?;
            let c = lossless(&assemble_coupling(&ms, &reference_medium())?);
            let gap = spectral_gap(&c);
            let z_eq = 50.0 / gap;
            let p = integrate_power(&c, z_eq, 50)?;
            let mut drift: f64 = 0.0;
            for i in 0..p.z_grid.len() {
                drift = drift.max(p.column_sums(i).iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max));
            }
            r.check(&format!("N={n}: total power conserved"), drift < 1e-9, format!("{drift:e}"));
            let last = p.matrix(p.z_grid.len() - 1);
            let dev = last.iter().map(|v| (v - 1.0 / n as f64).abs()).fold(0.0, f64::max);
            r.check(&format!("N={n}: equidistributed at 50/gap"), dev < 1e-6, format!("{dev:e} at z={z_eq:.4e}"));
        }
        Ok(())
    })();
    r.finish(4, "power conservation and equidistribution without loss", start, 5.0, outcome)
}

pub fn decay_rate_machinery() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let ms = waveguide(10, 0.5)?;
        let c = assemble_coupling(&ms, &reference_medium())?;
        let d = decay_rate(&c)?;
        r.check(
            "lambda_min <= lambda_inf <= lambda_bar",
            d.lambda_min <= d.lambda_inf && d.lambda_inf <= d.lambda_bar,
            format!("{:e} <= {:e} <= {:e}", d.lambda_min, d.lambda_inf, d.lambda_bar),
        );
        let z = 40.0 / d.spectral_gap + 10.0 / d.lambda_inf;
        let p = integrate_power(&c, z, 40)?;
        let slope = final_log_slope(&p, 0);
        let rel = (slope + d.lambda_inf).abs() / d.lambda_inf;
        r.check("log slope matches -lambda_inf to 1%", rel < 1e-2, format!("slope {slope:e}, rel {rel:e}"));
        let sweep = coupling_strength_sweep(&c, &[1.0, 1e-1, 1e-2, 1e-3, 1e-4], 1.0 / d.lambda_bar)?;
        let best = sweep.entries.last().expect("nonempty sweep");
        r.check(
            "strong coupling: lambda_inf -> lambda_bar",
            best.strong_rel_error < 1e-2,
            format!("{:e}", best.strong_rel_error),
        );
        r.check(
            "strong coupling: T -> exp(-lambda_bar L) / N",
            best.strong_power_rel_dev < 1e-2,
            format!("{:e}", best.strong_power_rel_dev),
        );
        r.check(
            "weak coupling: lambda_inf -> lambda_min",
            best.weak_rel_error < 1e-2,
            format!("{:e}", best.weak_rel_error),
        );
        Ok(())
    })();
    r.finish(5, "decay rate bounds, slope and coupling limits", start, 30.0, outcome)
}

fn cosine_series(u: f64, z: f64) -> f64 {
    (0..50)
        .map(|k| {
            let mu = (k as f64 + 0.5) * PI;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            2.0 * sign / mu * (-mu * mu * z).exp() * (mu * u).cos()
        })
        .sum()
}

pub fn diffusion_oracles() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let mut refl = DiffusionConfig::reference(vec![0.1, 1.0, 75.0, 250.0]);
        refl.bottom = BottomBoundary::Reflecting;
        let f = solve_diffusion(&refl)?;
        let err = (0..f.z_grid.len()).flat_map(|i| f.scaled(i)).map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        r.check("reflecting bottom keeps T = 1", err < 1e-10, format!("{err:e}"));
        // a d = pi makes the coefficient constant
        let flat = DiffusionConfig { a: PI / 20.0, ..DiffusionConfig::reference(vec![0.1, 1.0]) };
        let f = solve_diffusion(&flat)?;
        for (i, z) in f.z_grid.iter().enumerate() {
            let v = f.scaled(i);
            let e = f.u_grid.iter().zip(&v).map(|(&u, t)| (t - cosine_series(u, *z)).abs()).fold(0.0, f64::max);
            r.check(&format!("cosine series at z={z}"), e < 1e-6, format!("{e:e}"));
        }
        let (order, e1, e2) = grid_convergence(&DiffusionConfig::reference(vec![0.2]), 0.2, 256)?;
        r.check("second order in u", order > 1.8 && order < 2.2, format!("order {order:.3} ({e1:e}, {e2:e})"));
        let mut ie = DiffusionConfig::reference(vec![0.2]);
        ie.cells = 256;
        let exact = solve_diffusion(&ie)?.scaled(0);
        ie.scheme = TimeScheme::CrankNicolson { dz: 1e-3 };
        let cn = solve_diffusion(&ie)?.scaled(0);
        let e = exact.iter().zip(&cn).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.check("Crank-Nicolson agrees with the exponential", e < 1e-5, format!("{e:e}"));
        Ok(())
    })();
    r.finish(6, "continuum diffusion oracles", start, 20.0, outcome)
}

/// `x_i <= x_{i+1}` up to relative rounding.
fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9))
}

pub fn figure_shapes() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let ls = vec![0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0, 75.0, 250.0];
        let cfg = DiffusionConfig::reference(ls.clone());
        let f = solve_diffusion(&cfg)?;
        // (i) decay in L with a boundary layer at the absorbing bottom
        let mut decreasing = true;
        for i in 1..ls.len() {
            let (a, b) = (f.scaled(i - 1), f.scaled(i));
            decreasing &= a.iter().zip(&b).all(|(x, y)| y <= x);
        }
        r.check("(i) T1 decreasing in L", decreasing, "");
        // the deficit 1 - T1 lives in a layer at u = 1 whose width shrinks like sqrt(L)
        let short = solve_diffusion(&DiffusionConfig::reference(vec![1e-2, 1e-3, 1e-4]))?;
        let n = short.u_grid.len() - 1;
        let mut interior = Vec::new();
        let mut half = Vec::new();
        for l in [1e-2, 1e-3, 1e-4] {
            let t = short.scaled(short.checkpoint(l)?);
            interior.push(t[..=n / 2].iter().map(|v| 1.0 - v).fold(0.0, f64::max));
            half.push(short.u_grid[t.iter().position(|&v| v < 0.5).unwrap_or(n)]);
        }
        let pinned = (0..3).all(|i| short.scaled(i)[n] == 0.0);
        let layer = pinned
            && interior.windows(2).all(|w| w[1] <= w[0] + 1e-12)
            && interior[2] < 1e-6
            && half.windows(2).all(|w| w[1] > w[0]);
        r.check(
            "(i) boundary layer at u = 1",
            layer,
            format!("sup_(u<=1/2) 1-T1 = {interior:?}, T1 = 1/2 at u = {half:.4?}"),
        );
        let x = default_x_tilde();
        let fwhm: Vec<f64> = (0..ls.len())
            .map(|i| refocus_kernel(&f, i, &x).and_then(|h| refocus_metrics(&h)).map(|m| m.fwhm))
            .collect::<Result<_>>()?;
        let at = |l: f64| f.checkpoint(l).map(|i| fwhm[i]);
        let (w0, w75, w250) = (at(0.0)?, at(75.0)?, at(250.0)?);
        r.check("(ii) lobe wider than sinc at L = 75", w75 > w0, format!("{w75:.6} vs {w0:.6}"));
        r.check(
            "(ii) FWHM(250) > FWHM(75) > FWHM(0)",
            w250 > w75 * (1.0 + 1e-9) && w75 > w0,
            format!("{w250:.12} / {w75:.12} / {w0:.6}"),
        );
        r.check("(iii) FWHM nondecreasing in L", nondecreasing(&fwhm), format!("{fwhm:?}"));
        let mode = principal_eigenmode(&cfg)?;
        let asym = refocus_metrics(&eigenmode_profile(&mode, &x))?.fwhm;
        let gap = mode.lambda_2 - mode.lambda_1;
        let mut close = true;
        let mut used = 0;
        for (l, w) in ls.iter().zip(&fwhm) {
            if (gap * l).exp() < 1e-3 {
                used += 1;
                close &= (w - asym).abs() < 0.02 * asym;
            }
        }
        r.check(
            "(iii) saturates at the eigenmode FWHM",
            close && used > 0,
            format!("asymptote {asym:.6}, {used} distances"),
        );
        Ok(())
    })();
    r.finish(7, "figure shapes at the reference preset", start, 60.0, outcome)
}

/// Three-mode toy for the Monte Carlo comparison: rank-one cosine medium and
/// a long correlation length, scaled so that `Gamma_12 L = 1/2`.
pub fn monte_carlo_toy(epsilon: f64, realizations: usize, seed: u64) -> Result<(TransferModel, MCConfig)> {
    let ms = waveguide(3, 0.25)?;
    let mc = MCConfig {
        epsilon,
        realizations,
        radiation_bins: 0,
        seed,
        distance: 1.0,
        z_step: None,
        nearest_neighbor: true,
        mercer_terms: 1,
    };
    let unit = MediumStats::new(Kernel::SeparableCosine { sigma2: 1.0 }, 0.02)?;
    let rate = TransferModel::new(&ms, &unit, &mc)?.matched_coupling().gamma_c[(0, 1)];
    let medium = MediumStats::new(Kernel::SeparableCosine { sigma2: 0.5 / rate }, 0.02)?;
    Ok((TransferModel::new(&ms, &medium, &mc)?, mc))
}

fn ode_column(model: &TransferModel, distance: f64, l0: usize) -> Result<Vec<f64>> {
    let p = integrate_power_at(&model.matched_coupling(), &[distance])?;
    Ok((0..model.len()).map(|j| p.value(0, j, l0 - 1)).collect())
}

pub fn monte_carlo_vs_ode() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let (model, mc) = monte_carlo_toy(1e-3, 200, 2024)?;
        let est = estimate_with_model(&model, &mc, 1)?;
        let ode = ode_column(&model, mc.distance, 1)?;
        for j in 0..model.len() {
            let z = (est.mean[j] - ode[j]) / est.std_err[j];
            r.check(
                &format!("mode {} within 3 SE", j + 1),
                z.abs() < 3.0,
                format!("MC {:.5} +- {:.5}, ODE {:.5}", est.mean[j], est.std_err[j], ode[j]),
            );
        }
        r.check("unitarity drift", est.max_unitarity_defect < 1e-8, format!("{:e}", est.max_unitarity_defect));
        // the finite-eps bias is far below the 200-sample noise at eps = 1e-3,
        // so the trend is resolved at larger eps with many realizations
        let mut bias = Vec::new();
        for eps in [1e-2, 5e-3] {
            let (model, mc) = monte_carlo_toy(eps, 20_000, 7)?;
            let est = estimate_with_model(&model, &mc, 1)?;
            let ode = ode_column(&model, mc.distance, 1)?;
            let b: f64 = est.mean.iter().zip(&ode).map(|(m, o)| (m - o).powi(2)).sum::<f64>().sqrt();
            let se: f64 = est.std_err.iter().map(|s| s * s).sum::<f64>().sqrt();
            bias.push((eps, b, se));
        }
        r.check(
            "bias shrinks when eps halves",
            bias[1].1 + bias[1].2 < bias[0].1 - bias[0].2,
            format!("{bias:?} (eps, |bias|, se)"),
        );
        Ok(())
    })();
    r.finish(8, "Monte Carlo transfer matrices against the power equations", start, 300.0, outcome)
}

pub fn dispersion_kernels() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let ms = waveguide(34, 0.5)?;
        let pulse = PulseSpec::gaussian(4096, 16.0, ms.config.omega);
        let e_in: f64 = pulse.samples.iter().map(|v| v * v).sum();
        let mut worst: f64 = 0.0;
        for (j, m) in [(1, 2), (3, 30), (34, 1)] {
            let out = crate::refocus::dispersion_kernel(&ms, j, m, 40.0, &pulse)?;
            let e: f64 = out.iter().map(|v| v.norm_sqr()).sum();
            worst = worst.max((e / e_in).sqrt() - 1.0).max(1.0 - (e / e_in).sqrt());
        }
        r.check("pure phase filter preserves the 2-norm", worst < 1e-10, format!("{worst:e}"));
        let input: Vec<num_complex::Complex64> =
            pulse.samples.iter().map(|v| num_complex::Complex64::new(*v, 0.0)).collect();
        let rt = quadratic_phase_filter(&input, pulse.sample_rate, 0.0);
        let e = rt.iter().zip(&input).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        r.check("diagonal kernel round trip", e < 1e-12, format!("{e:e}"));
        let mut worst: f64 = 0.0;
        for phi in [0.5, -3.0, 12.0] {
            let out = quadratic_phase_filter(&input, pulse.sample_rate, phi);
            let w = num_complex::Complex64::new(1.0, -phi);
            for (i, v) in out.iter().enumerate() {
                let t = pulse.time(i);
                worst = worst.max((v - (-(t * t) / (2.0 * w)).exp() / w.sqrt()).norm());
            }
        }
        r.check("Gaussian chirp closed form", worst < 1e-8, format!("{worst:e}"));
        Ok(())
    })();
    r.finish(9, "dispersion kernel unitarity and closed forms", start, 1.0, outcome)
}

pub fn mirror_size_independence() -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let ls = vec![0.01, 75.0, 250.0];
        let cfg = DiffusionConfig::reference(ls.clone());
        let x = default_x_tilde();
        let cell = x[1] - x[0];
        let ms = waveguide(200, 0.5)?;
        let p = integrate_power_at(&matched_chain(&cfg, ms.len())?, &ls)?;
        for &l in &ls {
            let mut w = Vec::new();
            for alpha in [0.0, 1.0] {
                let prof =
                    random_profile(&ms, &MirrorSpec::reference(alpha), &p, l, 10.0, &x, Normalization::ApertureScaled)?;
                w.push(refocus_metrics(&prof)?.fwhm);
            }
            r.check(
                &format!("L={l}: FWHM agrees within one cell"),
                (w[0] - w[1]).abs() <= cell,
                format!("{:.6} vs {:.6}", w[0], w[1]),
            );
        }
        Ok(())
    })();
    r.finish(10, "mirror size plays no role in the random case", start, 30.0, outcome)
}

/// Criteria checks that are known not to hold, with the reason.
pub const KNOWN_FAILURES: &[(u32, &str, &str)] = &[
    (
        2,
        "sup spacing error halves per doubling",
        "near the cutoff the spacing error behaves like pi / sqrt(C^2 - y^2) and the restricted sup sits at \
         C - y ~ N^alpha, which gives N^(-(1 + alpha)/2): a factor 2^(-0.8) = 0.57 per doubling at alpha = 0.6",
    ),
    (
        7,
        "(ii) FWHM(250) > FWHM(75) > FWHM(0)",
        "with a0 = 1 the gap lambda_2 - lambda_1 is about -28, so T1 at L = 75 is already the principal \
     eigenmode to within exp(-2000); the profiles at 75 and 250 coincide in double precision",
    ),
];

pub fn is_known_failure(id: u32, check: &str) -> bool {
    KNOWN_FAILURES.iter().any(|(i, name, _)| *i == id && *name == check)
}

/// Invariants for a user-supplied waveguide and medium, reported as
/// criterion 0. Loss checks are skipped when the medium carries no loss.
pub fn medium_invariants(ms: &ModeSet, medium: &MediumStats) -> CriterionReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let outcome = (|| {
        let c = assemble_coupling(ms, medium)?;
        let n = c.n();
        let sym = (0..n).flat_map(|j| (0..n).map(move |l| (j, l))).all(|(j, l)| c.gamma_c[(j, l)] == c.gamma_c[(l, j)]);
        let nonneg = (0..n).flat_map(|j| (0..n).map(move |l| (j, l))).all(|(j, l)| j == l || c.gamma_c[(j, l)] >= 0.0);
        r.check("transport rates symmetric and nonnegative", sym && nonneg, "");
        let free = lossless(&c);
        let z = if free.gamma_c.iter().any(|v| *v != 0.0) { 10.0 / spectral_gap(&free).max(1e-12) } else { 1.0 };
        let p = integrate_power(&free, z.min(1e6), 20)?;
        let drift = (0..p.z_grid.len()).flat_map(|i| p.column_sums(i)).map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
        r.check("total power conserved without loss", drift < 1e-9, format!("{drift:e}"));
        if c.lambda_c.iter().all(|v| *v == 0.0) {
            r.skip("loss rates nonnegative", "medium has no radiative loss");
            r.skip("decay rate bounds", "medium has no radiative loss");
        } else {
            r.check("loss rates nonnegative", c.lambda_c.iter().all(|v| *v >= 0.0), "");
            match decay_rate(&c) {
                Ok(d) => r.check(
                    "decay rate bounds",
                    d.lambda_min <= d.lambda_inf && d.lambda_inf <= d.lambda_bar,
                    format!("{:e} <= {:e} <= {:e}", d.lambda_min, d.lambda_inf, d.lambda_bar),
                ),
                Err(e) => r.skip("decay rate bounds", &e.to_string()),
            }
        }
        Ok(())
    })();
    r.finish(0, "invariants of the configured medium", start, 60.0, outcome)
}
