//! Figure presets at the reference parameters `a0 = 1`, `a = 1`, `n1 = 2`,
//! `d = 20` with an absorbing bottom, evaluated with the continuum solver.

use serde_json::{json, Value};
use std::f64::consts::PI;

use super::output::{fmt_f64, Artifacts, Plot, Series, Table};
use super::{Failure, Stage};
use crate::diffusion::{principal_eigenmode, refocus_kernel, solve_diffusion, DiffusionConfig};
use crate::error::Error;
use crate::refocus::{default_x_tilde, refocus_metrics};
use crate::special::sinc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `T1(L, u)` curves for increasing `L`.
    Tau1,
    /// Refocused profiles at `L = 75` and `L = 250` against the sinc.
    Profiles,
    /// FWHM and peak of the refocused spot as functions of `L`.
    Resolution,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Tau1, Preset::Profiles, Preset::Resolution];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Tau1 => "fig-tau1",
            Preset::Profiles => "fig-profiles",
            Preset::Resolution => "fig-resolution",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            Error::InvalidConfig(format!("unknown preset `{s}`; expected fig-tau1, fig-profiles or fig-resolution"))
        })
    }

    /// Propagation distances of the preset.
    pub fn distances(&self) -> Vec<f64> {
        match self {
            Preset::Tau1 => vec![0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0],
            Preset::Profiles => vec![0.0, 75.0, 250.0],
            Preset::Resolution => {
                // zero, then 40 log-spaced distances from 1e-3 to 250
                let mut v = vec![0.0];
                let (lo, hi) = (1e-3f64.ln(), 250f64.ln());
                v.extend((0..40).map(|i| (lo + (hi - lo) * i as f64 / 39.0).exp()));
                v
            }
        }
    }

    pub fn config(&self) -> DiffusionConfig {
        DiffusionConfig::reference(self.distances())
    }
}

fn metadata(p: Preset, cfg: &DiffusionConfig) -> String {
    json!({ "preset": p.name(), "diffusion": cfg }).to_string()
}

pub(super) fn run(p: Preset, art: &mut Artifacts) -> Result<Value, Failure> {
    let cfg = p.config();
    let f = solve_diffusion(&cfg).at("continuum_diffusion")?;
    let meta = metadata(p, &cfg);
    match p {
        Preset::Tau1 => {
            let mut t = Table::new(&["L", "u", "T1"]);
            let mut series = Vec::new();
            for (i, &l) in f.z_grid.iter().enumerate() {
                let v = f.scaled(i);
                for (u, y) in f.u_grid.iter().zip(&v) {
                    t.push(vec![l.into(), (*u).into(), (*y).into()]);
                }
                series.push(Series { label: format!("L = {}", fmt_f64(l)), x: f.u_grid.clone(), y: v });
            }
            art.csv("tau1.csv", &t).at("write")?;
            art.svg(
                "tau1.svg",
                &Plot {
                    title: "T1(L, u)".into(),
                    x_label: "u".into(),
                    y_label: "T1".into(),
                    log_x: false,
                    series,
                    metadata: meta,
                },
            );
            Ok(
                json!({ "distances": f.z_grid, "mean_power": (0..f.z_grid.len()).map(|i| f.mean(i)).collect::<Vec<_>>() }),
            )
        }
        Preset::Profiles => {
            let x = default_x_tilde();
            let mut t = Table::new(&["L", "x_tilde", "H", "H_normalized"]);
            let mut series = Vec::new();
            let mut rows = Vec::new();
            for (i, &l) in f.z_grid.iter().enumerate() {
                let prof = refocus_kernel(&f, i, &x).at("time_reversal")?;
                let m = refocus_metrics(&prof).at("time_reversal")?;
                // normalize before restoring the amplitude, which underflows at large L
                let center = x.iter().position(|t| t.abs() < 1e-12).expect("grid contains zero");
                let unit: Vec<f64> = prof.values.iter().map(|v| v / prof.values[center]).collect();
                for ((xt, y), u) in x.iter().zip(prof.scaled_values()).zip(&unit) {
                    t.push(vec![l.into(), (*xt).into(), y.into(), (*u).into()]);
                }
                series.push(Series { label: format!("L = {}", fmt_f64(l)), x: x.clone(), y: unit });
                rows.push(json!({ "L": l, "fwhm": m.fwhm, "log_abs_peak": m.log_abs_peak }));
            }
            series.push(Series {
                label: "sinc".into(),
                x: x.clone(),
                y: x.iter().map(|t| sinc(2.0 * PI * t)).collect(),
            });
            art.csv("profiles.csv", &t).at("write")?;
            art.svg(
                "profiles.svg",
                &Plot {
                    title: "normalized refocused profiles".into(),
                    x_label: "x~".into(),
                    y_label: "H / H(0)".into(),
                    log_x: false,
                    series,
                    metadata: meta,
                },
            );
            Ok(json!({ "profiles": rows }))
        }
        Preset::Resolution => {
            let x = default_x_tilde();
            let mut t = Table::new(&["L", "FWHM", "peak", "log_abs_peak"]);
            let mut fwhm = Vec::new();
            for (i, &l) in f.z_grid.iter().enumerate() {
                let m = refocus_kernel(&f, i, &x).and_then(|h| refocus_metrics(&h)).at("time_reversal")?;
                t.push(vec![l.into(), m.fwhm.into(), m.peak.into(), m.log_abs_peak.into()]);
                fwhm.push(m.fwhm);
            }
            let mode = principal_eigenmode(&cfg).at("continuum_diffusion")?;
            let asym = refocus_metrics(&crate::diffusion::eigenmode_profile(&mode, &x)).at("time_reversal")?.fwhm;
            art.csv("resolution.csv", &t).at("write")?;
            let ls: Vec<f64> = f.z_grid.iter().copied().filter(|&l| l > 0.0).collect();
            let ws: Vec<f64> = f.z_grid.iter().zip(&fwhm).filter(|(l, _)| **l > 0.0).map(|(_, w)| *w).collect();
            let n = ls.len();
            art.svg(
                "resolution.svg",
                &Plot {
                    title: "resolution against propagation distance".into(),
                    x_label: "L".into(),
                    y_label: "FWHM (lambda / theta)".into(),
                    log_x: true,
                    series: vec![
                        Series { label: "FWHM".into(), x: ls.clone(), y: ws },
                        Series { label: "asymptote".into(), x: vec![ls[0], ls[n - 1]], y: vec![asym, asym] },
                    ],
                    metadata: meta,
                },
            );
            let nondecreasing = fwhm.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
            Ok(
                json!({ "fwhm_nondecreasing": nondecreasing, "fwhm_at_zero": fwhm[0], "asymptote": asym, "lambda_1": mode.lambda_1 }),
            )
        }
    }
}
