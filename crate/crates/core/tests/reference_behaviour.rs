//! Qualitative statements about refocusing, checked on the reference
//! configuration `a0 = 1`, `a = 1`, `n1 = 2`, `d = 20`.
use nalgebra::DVector;

use pekeris_refocus::diffusion::{matched_chain, refocus_kernel, solve_diffusion};
use pekeris_refocus::medium::assemble_coupling;
use pekeris_refocus::power::{decay_rate, integrate_power_at};
use pekeris_refocus::refocus::{
    continuum_discrepancy, default_x_tilde, homogeneous_profile, random_profile, refocus_metrics, sinc_fwhm,
    x_tilde_grid,
};
use pekeris_refocus::runner::Preset;
use pekeris_refocus::special::sinc;
use pekeris_refocus::validation::reference_medium;
use pekeris_refocus::waveguide::solve_dispersion;
use pekeris_refocus::{
    BottomBoundary, CouplingMatrices, DiffusionConfig, MirrorSpec, ModeSet, Normalization, WaveguideConfig,
};

fn waveguide(n: usize) -> ModeSet {
    solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, n, 0.5).unwrap()).unwrap()
}

#[test]
fn presets_bind_the_reference_parameters() {
    for p in Preset::ALL {
        let c = p.config();
        assert_eq!((c.a0, c.a, c.n1, c.depth), (1.0, 1.0, 2.0, 20.0));
        assert_eq!(c.bottom, BottomBoundary::Absorbing);
        assert_eq!(Preset::parse(p.name()).unwrap(), p);
    }
}

#[test]
fn sinc_first_null_is_the_diffraction_limit() {
    let x = x_tilde_grid(1.0, 2001);
    let values: Vec<f64> = x.iter().map(|t| sinc(2.0 * std::f64::consts::PI * t)).collect();
    let i = (1000..2000).find(|&i| values[i + 1] < 0.0).unwrap();
    assert!((x[i] - 0.5).abs() <= x[1] - x[0]);
    assert!((sinc_fwhm() - 0.603_355).abs() < 1e-5);
}

#[test]
fn reflecting_continuum_and_lossless_discrete_both_give_sinc() {
    let mut cfg = DiffusionConfig::reference(vec![5.0]);
    cfg.bottom = BottomBoundary::Reflecting;
    let f = solve_diffusion(&cfg).unwrap();
    let x = default_x_tilde();
    let h = refocus_kernel(&f, 0, &x).unwrap().scaled_values();
    let e = x.iter().zip(&h).map(|(t, v)| (v - sinc(2.0 * std::f64::consts::PI * t)).abs()).fold(0.0, f64::max);
    assert!(e < 1e-6, "{e}");

    let n = 136;
    let ms = waveguide(n);
    let m = MirrorSpec::reference(0.0);
    let chain = matched_chain(&cfg, n).unwrap();
    let p = integrate_power_at(&chain, &[5.0]).unwrap();
    let prof = random_profile(&ms, &m, &p, 5.0, 10.0, &x, Normalization::ApertureScaled).unwrap();
    let r = m.aperture_ratio(20.0);
    let e = x
        .iter()
        .zip(prof.scaled_values())
        .map(|(t, v)| (v - r * sinc(2.0 * std::f64::consts::PI * t)).abs())
        .fold(0.0, f64::max);
    assert!(e < 0.05 * r, "{e}");
}

#[test]
fn fwhm_grows_with_distance_at_the_reference_preset() {
    let ls = vec![0.0, 75.0, 250.0];
    let f = solve_diffusion(&DiffusionConfig::reference(ls.clone())).unwrap();
    let x = default_x_tilde();
    let w: Vec<f64> = (0..3).map(|i| refocus_metrics(&refocus_kernel(&f, i, &x).unwrap()).unwrap().fwhm).collect();
    assert!(w[1] > w[0] && w[2] >= w[1] * (1.0 - 1e-9), "{w:?}");
    assert!(w[2] / w[0] > 1.0);
}

#[test]
fn discrete_profiles_approach_the_continuum() {
    let ls = vec![75.0];
    let cfg = DiffusionConfig::reference(ls.clone());
    let f = solve_diffusion(&cfg).unwrap();
    let x = default_x_tilde();
    let h = refocus_kernel(&f, 0, &x).unwrap();
    let m = MirrorSpec::reference(0.0);
    let mut errs = Vec::new();
    for n in [25, 50, 100] {
        let ms = waveguide(n);
        let p = integrate_power_at(&matched_chain(&cfg, n).unwrap(), &ls).unwrap();
        let prof = random_profile(&ms, &m, &p, 75.0, 10.0, &x, Normalization::ApertureScaled).unwrap();
        errs.push(continuum_discrepancy(&prof, &h, m.aperture_ratio(20.0)).unwrap());
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn equidistributed_profile_without_loss() {
    let n = 10;
    let ms = waveguide(n);
    let c = assemble_coupling(&ms, &reference_medium()).unwrap();
    let free = CouplingMatrices::from_transport(c.gamma_c.clone(), DVector::zeros(n));
    let z = 60.0 / decay_rate(&c).unwrap().spectral_gap;
    let p = integrate_power_at(&free, &[z]).unwrap();
    let m = MirrorSpec::reference(0.0);
    let x = x_tilde_grid(0.5, 11);
    let prof = random_profile(&ms, &m, &p, z, 10.0, &x, Normalization::Raw).unwrap();
    let mm = pekeris_refocus::refocus::mirror_matrix(&ms, &m).unwrap();
    let trace: f64 = (0..n).map(|j| mm[(j, j)]).sum();
    let step = ms.config.ocean_wavelength() / ms.config.theta();
    for (t, v) in x.iter().zip(prof.scaled_values()) {
        let s: f64 =
            (1..=n).map(|l| ms.mode_shape(l, 10.0).unwrap() * ms.mode_shape(l, 10.0 + step * t).unwrap()).sum();
        assert!((v - 0.25 * trace * s / n as f64).abs() < 1e-8);
    }
}

#[test]
fn strong_coupling_damps_the_lossless_profile() {
    let n = 10;
    let ms = waveguide(n);
    let c = assemble_coupling(&ms, &reference_medium()).unwrap();
    let tau = 1e-4;
    let mut strong = c.clone();
    strong.gamma_c /= tau;
    let free = CouplingMatrices::from_transport(strong.gamma_c.clone(), DVector::zeros(n));
    let d = decay_rate(&c).unwrap();
    let l = 1.0 / d.lambda_bar;
    let m = MirrorSpec::reference(0.0);
    let x = x_tilde_grid(0.5, 11);
    let lossy =
        random_profile(&ms, &m, &integrate_power_at(&strong, &[l]).unwrap(), l, 10.0, &x, Normalization::Raw).unwrap();
    let clean =
        random_profile(&ms, &m, &integrate_power_at(&free, &[l]).unwrap(), l, 10.0, &x, Normalization::Raw).unwrap();
    let damp = (-d.lambda_bar * l).exp();
    let size = clean.scaled_values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for (a, b) in lossy.scaled_values().iter().zip(clean.scaled_values()) {
        assert!((a - damp * b).abs() < 1e-2 * damp * size, "{a} vs {}", damp * b);
    }
}

#[test]
fn homogeneous_peak_tends_to_the_aperture_ratio() {
    let m = MirrorSpec::reference(0.0);
    let x = vec![0.0];
    let errs: Vec<f64> = [34, 68, 136]
        .iter()
        .map(|&n| {
            let p = homogeneous_profile(&waveguide(n), &m, 10.0, &x, Normalization::ApertureScaled).unwrap();
            (p.scaled_values()[0] - m.aperture_ratio(20.0)).abs()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}
