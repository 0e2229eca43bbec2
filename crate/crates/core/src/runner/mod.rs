//! Experiment orchestration behind the `pekeris` binary.
//!
//! A run resolves its configuration, computes everything in memory, then
//! commits all artifacts at once. A config problem exits with code 2, a
//! numerical failure with 3, and in both cases nothing is written.

pub mod config;
pub mod output;
pub mod presets;

use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;

use crate::diffusion::{principal_eigenmode, refocus_kernel, solve_diffusion, BottomBoundary, DiffusionConfig};
use crate::error::Error;
use crate::medium::{assemble_coupling, band_limited_filter, CouplingMatrices};
use crate::montecarlo::{estimate_with_model, TransferModel};
use crate::power::{
    coupling_components, coupling_strength_sweep, decay_rate, integrate_power, integrate_power_at, markov_estimate,
};
use crate::refocus::{random_profile, refocus_metrics, x_tilde_grid, MirrorSpec, Normalization};
use crate::special::sinc;
use crate::validation::{self, CriterionReport};
use crate::waveguide::{solve_dispersion, ModeSet};

pub use config::ExperimentConfig;
use config::{missing, CouplingSource, MonteCarloRun, PowerRun, ProfileRun};
use output::{Artifacts, Plot, Series, Table, SCHEMA_VERSION};
pub use presets::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Modes,
    Coupling,
    Power,
    Diffusion,
    Profile,
    Resolution,
    MonteCarlo,
    Validate,
    Preset(Preset),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Modes => "modes".into(),
            Command::Coupling => "coupling".into(),
            Command::Power => "power".into(),
            Command::Diffusion => "diffusion".into(),
            Command::Profile => "profile".into(),
            Command::Resolution => "resolution".into(),
            Command::MonteCarlo => "montecarlo".into(),
            Command::Validate => "validate".into(),
            Command::Preset(p) => format!("preset {}", p.name()),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub z_max: Option<f64>,
    pub checkpoints: Option<usize>,
    pub nearest_neighbor: bool,
    pub tau_sweep: Option<Vec<f64>>,
    pub mc_paths: Option<usize>,
    pub a0: Option<f64>,
    pub a: Option<f64>,
    pub depth: Option<f64>,
    pub n1: Option<f64>,
    pub bottom: Option<BottomBoundary>,
    pub z: Option<Vec<f64>>,
    pub distances: Option<Vec<f64>>,
    pub alpha_m: Option<f64>,
    pub mirror_center: Option<f64>,
    pub mirror_half_widths: Option<(f64, f64)>,
    pub x0: Option<f64>,
    pub lossless: bool,
    pub epsilon: Option<f64>,
    pub realizations: Option<usize>,
    pub bins: Option<usize>,
    pub mode_in: Option<usize>,
}

/// Distances used by `diffusion` when neither the config nor `--z` gives any.
pub const DEFAULT_DISTANCES: [f64; 7] = [0.01, 0.1, 0.5, 1.0, 5.0, 75.0, 250.0];

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Overrides {
    /// Folds the flags into `cfg` for `command`.
    pub fn apply(&self, cfg: &mut ExperimentConfig, command: Command) -> Result<(), Error> {
        if self.seed.is_some() {
            cfg.run.seed = self.seed;
        }
        if self.out.is_some() {
            cfg.run.output = self.out.clone();
        }
        match command {
            Command::Power => {
                if cfg.run.power.is_none() {
                    let z_max =
                        self.z_max.ok_or_else(|| Error::InvalidConfig("power needs run.power or --z-max".into()))?;
                    cfg.run.power = Some(PowerRun {
                        z_max,
                        checkpoints: 50,
                        nearest_neighbor: false,
                        loss_variant: Default::default(),
                        tau_sweep: Vec::new(),
                        mc_paths: 0,
                        mode_in: 1,
                    });
                }
                let p = cfg.run.power.as_mut().expect("power block");
                set(&mut p.z_max, self.z_max);
                set(&mut p.checkpoints, self.checkpoints);
                p.nearest_neighbor |= self.nearest_neighbor;
                set(&mut p.tau_sweep, self.tau_sweep.clone());
                set(&mut p.mc_paths, self.mc_paths);
                set(&mut p.mode_in, self.mode_in);
            }
            Command::Diffusion => {
                let d = cfg.run.diffusion.get_or_insert_with(|| DiffusionConfig::reference(DEFAULT_DISTANCES.to_vec()));
                set(&mut d.a0, self.a0);
                set(&mut d.a, self.a);
                set(&mut d.depth, self.depth);
                set(&mut d.n1, self.n1);
                set(&mut d.bottom, self.bottom);
                set(&mut d.z_checkpoints, self.z.clone());
            }
            Command::Profile | Command::Resolution => {
                if cfg.run.profile.is_none() {
                    let distances = self
                        .distances
                        .clone()
                        .ok_or_else(|| Error::InvalidConfig("profile needs run.profile or --L".into()))?;
                    cfg.run.profile = Some(ProfileRun {
                        distances,
                        x0: None,
                        x_half_width: 3.0,
                        x_points: 601,
                        lossless: false,
                        normalization: Normalization::ApertureScaled,
                        source: CouplingSource::Medium,
                    });
                }
                let p = cfg.run.profile.as_mut().expect("profile block");
                set(&mut p.distances, self.distances.clone());
                if self.x0.is_some() {
                    p.x0 = self.x0;
                }
                p.lossless |= self.lossless;
                if self.alpha_m.is_some() || self.mirror_center.is_some() || self.mirror_half_widths.is_some() {
                    let m = cfg.mirror.get_or_insert(MirrorSpec::reference(0.0));
                    set(&mut m.alpha_m, self.alpha_m);
                    set(&mut m.center, self.mirror_center);
                    if let Some((a, b)) = self.mirror_half_widths {
                        m.d_tilde_1 = a;
                        m.d_tilde_2 = b;
                    }
                }
            }
            Command::MonteCarlo => {
                if cfg.run.montecarlo.is_none() {
                    let (Some(epsilon), Some(realizations)) = (self.epsilon, self.realizations) else {
                        return Err(Error::InvalidConfig(
                            "montecarlo needs run.montecarlo or both --epsilon and --realizations".into(),
                        ));
                    };
                    cfg.run.montecarlo = Some(MonteCarloRun {
                        epsilon,
                        realizations,
                        distance: 1.0,
                        bins: 0,
                        mode_in: 1,
                        nearest_neighbor: true,
                        z_step: None,
                        mercer_terms: 24,
                    });
                }
                let m = cfg.run.montecarlo.as_mut().expect("montecarlo block");
                set(&mut m.epsilon, self.epsilon);
                set(&mut m.realizations, self.realizations);
                set(&mut m.bins, self.bins);
                set(&mut m.mode_in, self.mode_in);
            }
            _ => {}
        }
        Ok(())
    }
}

/// A failed run: the error and the stage that raised it.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub stage: &'static str,
    pub error: Error,
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_config() {
            2
        } else {
            3
        }
    }
}

trait Stage<T> {
    fn at(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T> Stage<T> for crate::error::Result<T> {
    fn at(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { stage, error })
    }
}

/// The machine-readable line printed after every run.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub command: String,
    pub status: &'static str,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub artifacts: Vec<String>,
    pub results: Value,
}

impl Summary {
    pub fn line(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

struct Outcome {
    artifacts: Artifacts,
    results: Value,
}

/// Loads, overrides and runs. Never panics on bad input.
pub fn execute(command: Command, config_path: Option<&std::path::Path>, overrides: &Overrides) -> Summary {
    let name = command.name();
    let result = (|| {
        let mut cfg = match config_path {
            Some(p) => ExperimentConfig::load(p).at("config")?,
            None => ExperimentConfig::default(),
        };
        if let Command::Preset(_) = command {
            if config_path.is_some() {
                return Err(Failure {
                    stage: "config",
                    error: Error::InvalidConfig("presets bind their own parameters and take no config".into()),
                });
            }
        }
        overrides.apply(&mut cfg, command).at("config")?;
        let out = run(command, &cfg)?;
        let written = out.artifacts.commit().at("write")?;
        Ok((written, out.results))
    })();
    match result {
        Ok((written, results)) => Summary {
            schema_version: SCHEMA_VERSION,
            command: name,
            status: "ok",
            exit_code: 0,
            stage: None,
            error: None,
            artifacts: written.iter().map(|p| p.display().to_string()).collect(),
            results,
        },
        Err(f) => Summary {
            schema_version: SCHEMA_VERSION,
            command: name,
            status: if f.exit_code() == 2 { "config_error" } else { "numerical_error" },
            exit_code: f.exit_code(),
            stage: Some(f.stage),
            error: Some(f.error.to_string()),
            artifacts: Vec::new(),
            results: Value::Null,
        },
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.run.output.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn run(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let mut art = Artifacts::new(out_dir(cfg));
    let results = match command {
        Command::Modes => modes(cfg, &mut art)?,
        Command::Coupling => coupling(cfg, &mut art)?,
        Command::Power => power(cfg, &mut art)?,
        Command::Diffusion => diffusion(cfg, &mut art)?,
        Command::Profile => profile(cfg, &mut art, false)?,
        Command::Resolution => profile(cfg, &mut art, true)?,
        Command::MonteCarlo => montecarlo(cfg, &mut art)?,
        Command::Validate => validate(cfg, &mut art)?,
        Command::Preset(p) => presets::run(p, &mut art)?,
    };
    Ok(Outcome { artifacts: art, results })
}

fn modes_of(cfg: &ExperimentConfig) -> Result<ModeSet, Failure> {
    let w = cfg.waveguide().at("config")?;
    solve_dispersion(&w).at("waveguide_spectrum")
}

fn modes(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, Failure> {
    let ms = modes_of(cfg)?;
    let mut t = Table::new(&["j", "sigma", "beta", "zeta", "amplitude"]);
    for m in &ms.modes {
        t.push(vec![m.index.into(), m.sigma.into(), m.beta.into(), m.zeta.into(), m.amp.into()]);
    }
    art.csv("modes.csv", &t).at("write")?;
    Ok(json!({
        "modes": ms.len(),
        "mode_parameter": ms.config.mode_parameter(),
        "k": ms.k(),
        "xi_cutoff": ms.xi_cutoff,
        "radiation_nodes": ms.radiation.len(),
    }))
}

fn decay_json(c: &CouplingMatrices) -> Value {
    match decay_rate(c) {
        Ok(d) => json!({
            "lambda_inf": d.lambda_inf,
            "lambda_min": d.lambda_min,
            "lambda_bar": d.lambda_bar,
            "spectral_gap": d.spectral_gap,
        }),
        Err(e) => {
            json!({ "skipped": e.to_string(), "components": coupling_components(&c.gamma_c) })
        }
    }
}

fn coupling(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, Failure> {
    let ms = modes_of(cfg)?;
    let c = assemble_coupling(&ms, cfg.medium().at("config")?).at("mode_power")?;
    let n = c.n();
    let mut t = Table::new(&["j", "l", "gamma_c", "gamma_s", "gamma_1"]);
    for j in 0..n {
        for l in 0..n {
            t.push(vec![
                (j + 1).into(),
                (l + 1).into(),
                c.gamma_c[(j, l)].into(),
                c.gamma_s[(j, l)].into(),
                c.gamma_1[(j, l)].into(),
            ]);
        }
    }
    art.csv("coupling.csv", &t).at("write")?;
    let mut t = Table::new(&["j", "lambda_c", "lambda_s"]);
    for j in 0..n {
        t.push(vec![(j + 1).into(), c.lambda_c[j].into(), c.lambda_s[j].into()]);
    }
    art.csv("loss.csv", &t).at("write")?;
    Ok(json!({ "modes": n, "decay": decay_json(&c) }))
}

fn power(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, Failure> {
    let run = cfg.run.power.as_ref().ok_or_else(|| missing("run.power")).at("config")?;
    let ms = modes_of(cfg)?;
    let mut c = assemble_coupling(&ms, cfg.medium().at("config")?).at("mode_power")?;
    if run.nearest_neighbor {
        c = band_limited_filter(&c, run.loss_variant);
    }
    let n = c.n();
    if run.mode_in == 0 || run.mode_in > n {
        return Err(Failure {
            stage: "config",
            error: Error::IndexOutOfRange { op: "power", index: run.mode_in, max: n },
        });
    }
    let p = integrate_power(&c, run.z_max, run.checkpoints).at("mode_power")?;
    let mut t = Table::new(&["z", "j", "l", "T"]);
    for (i, &z) in p.z_grid.iter().enumerate() {
        for l in 0..n {
            for j in 0..n {
                t.push(vec![z.into(), (j + 1).into(), (l + 1).into(), p.value(i, j, l).into()]);
            }
        }
    }
    art.csv("power.csv", &t).at("write")?;
    let l0 = run.mode_in - 1;
    let series = (0..n.min(8))
        .map(|j| Series {
            label: format!("T_{}^{}", j + 1, run.mode_in),
            x: p.z_grid.clone(),
            y: (0..p.z_grid.len()).map(|i| p.value(i, j, l0)).collect(),
        })
        .chain(std::iter::once(Series {
            label: "total".into(),
            x: p.z_grid.clone(),
            y: (0..p.z_grid.len()).map(|i| p.log_total_power(i, l0).exp()).collect(),
        }))
        .collect();
    art.svg(
        "power.svg",
        &Plot {
            title: "mean mode powers".into(),
            x_label: "z".into(),
            y_label: "T".into(),
            log_x: false,
            series,
            metadata: cfg.to_json(),
        },
    );
    let mut results = json!({ "modes": n, "checkpoints": p.z_grid.len(), "decay": decay_json(&c) });
    if !run.tau_sweep.is_empty() {
        let s = coupling_strength_sweep(&c, &run.tau_sweep, run.z_max).at("mode_power")?;
        let mut t = Table::new(&[
            "tau",
            "strong_lambda_inf",
            "strong_rel_error",
            "strong_power_rel_dev",
            "weak_lambda_inf",
            "weak_rel_error",
        ]);
        for e in &s.entries {
            t.push(vec![
                e.tau.into(),
                e.strong_lambda_inf.into(),
                e.strong_rel_error.into(),
                e.strong_power_rel_dev.into(),
                e.weak_lambda_inf.into(),
                e.weak_rel_error.into(),
            ]);
        }
        art.csv("sweep.csv", &t).at("write")?;
        results["sweep"] = json!({ "strong_monotone": s.strong_monotone, "weak_monotone": s.weak_monotone });
    }
    if run.mc_paths > 0 {
        let m = markov_estimate(&c, run.z_max, run.mode_in, run.mc_paths, cfg.seed()).at("mode_power")?;
        let last = p.z_grid.len() - 1;
        let mut t = Table::new(&["j", "markov_mean", "markov_std_err", "ode"]);
        for j in 0..n {
            t.push(vec![(j + 1).into(), m.mean[j].into(), m.std_err[j].into(), p.value(last, j, l0).into()]);
        }
        art.csv("markov.csv", &t).at("write")?;
        results["markov_paths"] = json!(m.paths);
    }
    Ok(results)
}

fn diffusion(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, Failure> {
    let d = cfg.run.diffusion.as_ref().ok_or_else(|| missing("run.diffusion")).at("config")?;
    d.validate().at("config")?;
    let f = solve_diffusion(d).at("continuum_diffusion")?;
    let x = x_tilde_grid(3.0, 601);
    let mut tu = Table::new(&["z", "u", "T1"]);
    let mut th = Table::new(&["z", "x_tilde", "H"]);
    let mut series = Vec::new();
    let mut means = Vec::new();
    for (i, &z) in f.z_grid.iter().enumerate() {
        let t = f.scaled(i);
        for (u, v) in f.u_grid.iter().zip(&t) {
            tu.push(vec![z.into(), (*u).into(), (*v).into()]);
        }
        let h = refocus_kernel(&f, i, &x).at("continuum_diffusion")?.scaled_values();
        for (xt, v) in x.iter().zip(&h) {
            th.push(vec![z.into(), (*xt).into(), (*v).into()]);
        }
        series.push(Series { label: format!("L = {}", output::fmt_f64(z)), x: f.u_grid.clone(), y: t });
        means.push(f.mean(i));
    }
    art.csv("diffusion.csv", &tu).at("write")?;
    art.csv("kernel.csv", &th).at("write")?;
    art.svg(
        "tau1.svg",
        &Plot {
            title: "T1(L, u)".into(),
            x_label: "u".into(),
            y_label: "T1".into(),
            log_x: false,
            series,
            metadata: cfg.to_json(),
        },
    );
    let mut results = json!({ "distances": f.z_grid, "mean_power": means });
    if d.bottom == BottomBoundary::Absorbing {
        let m = principal_eigenmode(d).at("continuum_diffusion")?;
        results["lambda_1"] = json!(m.lambda_1);
        results["lambda_2"] = json!(m.lambda_2);
    }
    Ok(results)
}

fn profile(cfg: &ExperimentConfig, art: &mut Artifacts, sweep: bool) -> Result<Value, Failure> {
    let run = cfg.run.profile.as_ref().ok_or_else(|| missing("run.profile")).at("config")?;
    let ms = modes_of(cfg)?;
    let mirror = *cfg.mirror().at("config")?;
    mirror.validate(ms.depth(), ms.config.ocean_wavelength()).at("config")?;
    if run.distances.is_empty() {
        return Err(Failure {
            stage: "config",
            error: Error::InvalidConfig("profile needs at least one distance".into()),
        });
    }
    let mut c = match run.source {
        CouplingSource::Medium => assemble_coupling(&ms, cfg.medium().at("config")?).at("mode_power")?,
        CouplingSource::Diffusion => {
            let d = cfg.run.diffusion.as_ref().ok_or_else(|| missing("run.diffusion")).at("config")?;
            crate::diffusion::matched_chain(d, ms.len()).at("continuum_diffusion")?
        }
    };
    if run.lossless {
        c = CouplingMatrices::from_transport(c.gamma_c.clone(), nalgebra::DVector::zeros(c.n()));
    }
    let p = integrate_power_at(&c, &run.distances).at("mode_power")?;
    let x0 = run.x0.unwrap_or(0.5 * ms.depth());
    let x = x_tilde_grid(run.x_half_width, run.x_points);
    let mut table = Table::new(&["L", "x_tilde", "value"]);
    let mut metrics = Table::new(&["L", "peak", "log_abs_peak", "fwhm", "first_null"]);
    let mut series = Vec::new();
    let mut rows = Vec::new();
    for &l in &run.distances {
        let prof = random_profile(&ms, &mirror, &p, l, x0, &x, run.normalization).at("time_reversal")?;
        let m = refocus_metrics(&prof).at("time_reversal")?;
        let v = prof.scaled_values();
        for (xt, y) in x.iter().zip(&v) {
            table.push(vec![l.into(), (*xt).into(), (*y).into()]);
        }
        metrics.push(vec![l.into(), m.peak.into(), m.log_abs_peak.into(), m.fwhm.into(), m.first_null.into()]);
        rows.push(json!({ "L": l, "log_abs_peak": m.log_abs_peak, "fwhm": m.fwhm }));
        series.push(Series { label: format!("L = {}", output::fmt_f64(l)), x: x.clone(), y: v });
    }
    if sweep {
        art.csv("resolution.csv", &metrics).at("write")?;
        let positive = run.distances.iter().all(|&l| l > 0.0);
        let fwhm: Vec<f64> = rows.iter().map(|r| r["fwhm"].as_f64().unwrap_or(f64::NAN)).collect();
        art.svg(
            "resolution.svg",
            &Plot {
                title: "resolution against propagation distance".into(),
                x_label: "L".into(),
                y_label: "FWHM (lambda / theta)".into(),
                log_x: positive,
                series: vec![Series { label: "FWHM".into(), x: run.distances.clone(), y: fwhm }],
                metadata: cfg.to_json(),
            },
        );
    } else {
        art.csv("profile.csv", &table).at("write")?;
        art.csv("profile_metrics.csv", &metrics).at("write")?;
        if run.normalization == Normalization::ApertureScaled {
            let r = mirror.aperture_ratio(ms.depth());
            series.push(Series {
                label: "sinc limit".into(),
                x: x.clone(),
                y: x.iter().map(|t| r * sinc(2.0 * std::f64::consts::PI * t)).collect(),
            });
        }
        art.svg(
            "profile.svg",
            &Plot {
                title: "refocused transverse profile".into(),
                x_label: "x~".into(),
                y_label: "profile".into(),
                log_x: false,
                series,
                metadata: cfg.to_json(),
            },
        );
    }
    Ok(json!({ "modes": ms.len(), "profiles": rows }))
}

fn montecarlo(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, Failure> {
    let run = cfg.run.montecarlo.as_ref().ok_or_else(|| missing("run.montecarlo")).at("config")?;
    let ms = modes_of(cfg)?;
    let medium = cfg.medium().at("config")?;
    let mc = run.to_mc(cfg.seed());
    mc.validate().at("config")?;
    let model = TransferModel::new(&ms, medium, &mc).at("montecarlo_transfer")?;
    let est = estimate_with_model(&model, &mc, run.mode_in).at("montecarlo_transfer")?;
    let ode = integrate_power_at(&model.matched_coupling(), &[run.distance]).at("mode_power")?;
    let n = est.mean.len();
    let mut t = Table::new(&["realization", "j", "power"]);
    for (r, s) in est.samples.iter().enumerate() {
        for (j, v) in s.iter().enumerate() {
            t.push(vec![r.into(), (j + 1).into(), (*v).into()]);
        }
    }
    art.csv("montecarlo.csv", &t).at("write")?;
    let ode_col: Vec<f64> = (0..n).map(|j| ode.value(0, j, run.mode_in - 1)).collect();
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "config": cfg,
        "mean": est.mean,
        "std_err": est.std_err,
        "ode": ode_col,
        "max_unitarity_defect": est.max_unitarity_defect,
        "realizations": est.realizations,
        "rank_shortfall": est.rank_shortfall,
    });
    art.json("montecarlo.json", &summary).at("write")?;
    Ok(json!({
        "mean": est.mean,
        "std_err": est.std_err,
        "ode": ode_col,
        "max_unitarity_defect": est.max_unitarity_defect,
    }))
}

fn validate(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, Failure> {
    let mut reports: Vec<CriterionReport> = validation::run_suite();
    if cfg.waveguide.is_some() && cfg.medium.is_some() {
        let ms = modes_of(cfg)?;
        reports.push(validation::medium_invariants(&ms, cfg.medium().at("config")?));
    }
    let unexpected: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.checks
                .iter()
                .filter(|c| !c.passed && !validation::is_known_failure(r.id, &c.name))
                .map(move |c| format!("{}: {}", r.id, c.name))
        })
        .collect();
    let body = json!({
        "schema_version": SCHEMA_VERSION,
        "criteria": reports,
        "known_failures": validation::KNOWN_FAILURES.iter().map(|(id, name, why)| json!({"id": id, "check": name, "reason": why})).collect::<Vec<_>>(),
    });
    art.json("validation.json", &body).at("write")?;
    Ok(json!({
        "passed": reports.iter().filter(|r| r.passed).map(|r| r.id).collect::<Vec<_>>(),
        "failed": reports.iter().filter(|r| !r.passed).map(|r| r.id).collect::<Vec<_>>(),
        "unexpected_failures": unexpected,
    }))
}
