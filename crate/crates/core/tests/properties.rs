//! Randomized invariants over waveguides, transport matrices and artifacts.
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::f64::consts::PI;

use pekeris_refocus::power::{integrate_power_at, integrate_power_spectral};
use pekeris_refocus::refocus::{mirror_matrix, mirror_matrix_closed_form};
use pekeris_refocus::runner::output::fmt_f64;
use pekeris_refocus::waveguide::{dispersion_residual, solve_dispersion};
use pekeris_refocus::{CouplingMatrices, DiffusionConfig, MirrorSpec, WaveguideConfig};

fn rates(n: usize, seed: &[f64]) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for l in j + 1..n {
            g[(j, l)] = seed[k % seed.len()];
            g[(l, j)] = g[(j, l)];
            k += 1;
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn each_root_lies_in_its_bracket(n in 1usize..60, frac in 0.05f64..0.95, n1 in 1.2f64..3.0) {
        let cfg = WaveguideConfig::with_mode_parameter(20.0, n1, 1.0, n, frac).unwrap();
        let ms = solve_dispersion(&cfg).unwrap();
        let c = cfg.mode_parameter();
        prop_assert_eq!(ms.len(), n);
        for (j, m) in ms.modes.iter().enumerate() {
            let lo = (j as f64 + 0.5) * PI;
            prop_assert!(m.sigma > lo && m.sigma < lo + 0.5 * PI + 1e-12);
            prop_assert!(dispersion_residual(c, m.sigma).abs() < 1e-10 * c.max(1.0));
        }
        prop_assert!(ms.modes.windows(2).all(|w| w[1].beta < w[0].beta));
    }

    #[test]
    fn lossless_power_is_conserved(n in 2usize..12, seed in prop::collection::vec(0.0f64..2.0, 1..20), z in 0.0f64..50.0) {
        let c = CouplingMatrices::from_transport(rates(n, &seed), DVector::zeros(n));
        let p = integrate_power_at(&c, &[z]).unwrap();
        for s in p.column_sums(0) {
            prop_assert!((s - 1.0).abs() < 1e-10);
        }
        prop_assert!(p.matrix(0).iter().all(|v| *v >= -1e-12));
    }

    #[test]
    fn exponential_and_spectral_routes_agree(
        n in 2usize..8,
        seed in prop::collection::vec(0.05f64..1.0, 1..10),
        loss in prop::collection::vec(0.0f64..0.5, 8),
        z in 0.1f64..20.0,
    ) {
        let c = CouplingMatrices::from_transport(rates(n, &seed), DVector::from_iterator(n, loss.into_iter().take(n)));
        let a = integrate_power_at(&c, &[z]).unwrap().matrix(0);
        let b = integrate_power_spectral(&c, &[z]).unwrap().matrix(0);
        prop_assert!((a - b).abs().max() < 1e-10);
    }

    #[test]
    fn mirror_matrix_is_symmetric_and_half_the_closed_form(
        n in 2usize..20,
        center in 6.0f64..14.0,
        h1 in 0.1f64..3.0,
        h2 in 0.1f64..3.0,
    ) {
        let ms = solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, n, 0.5).unwrap()).unwrap();
        let mirror = MirrorSpec { center, d_tilde_1: h1, d_tilde_2: h2, alpha_m: 0.0 };
        let m = mirror_matrix(&ms, &mirror).unwrap();
        let cf = mirror_matrix_closed_form(&ms, &mirror).unwrap();
        prop_assert!((&m - m.transpose()).abs().max() < 1e-13);
        prop_assert!((&cf - &m * 2.0).abs().max() < 1e-10);
        prop_assert!((0..n).all(|j| m[(j, j)] > 0.0));
    }

    #[test]
    fn diffusion_decreases_in_distance(a0 in 0.2f64..3.0, a in 0.2f64..2.0, z in 0.01f64..1.0) {
        let mut cfg = DiffusionConfig::reference(vec![z, 2.0 * z]);
        cfg.a0 = a0;
        cfg.a = a;
        cfg.cells = 128;
        prop_assume!(cfg.validate().is_ok());
        let f = pekeris_refocus::diffusion::solve_diffusion(&cfg).unwrap();
        let (t1, t2) = (f.scaled(0), f.scaled(1));
        prop_assert!(t1.iter().zip(&t2).all(|(x, y)| *y <= *x + 1e-14));
        prop_assert!(t1.iter().all(|v| (-1e-14..=1.0 + 1e-12).contains(v)));
    }

    #[test]
    fn csv_floats_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
