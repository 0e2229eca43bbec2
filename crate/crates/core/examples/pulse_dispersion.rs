//! Time-domain dispersion of a Gaussian pulse between two modes, compared
//! with the closed-form chirp.
use num_complex::Complex64;
use pekeris_refocus::refocus::{arrival_times, dispersion_kernel, quadratic_phase_filter};
use pekeris_refocus::waveguide::solve_dispersion;
use pekeris_refocus::{PulseSpec, Result, WaveguideConfig};

fn run_example() -> Result<()> {
    let ms = solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, 6, 0.5)?)?;
    let t = arrival_times(&ms, 100.0, 0.0)?;
    println!("arrival offsets t_(1,m) at L = 100: {:?}", (0..ms.len()).map(|m| t[(0, m)]).collect::<Vec<_>>());
    let pulse = PulseSpec::gaussian(1024, 8.0, 1.0);
    let k = dispersion_kernel(&ms, 1, 4, 100.0, &pulse)?;
    let peak = k.iter().map(|v| v.norm()).fold(0.0, f64::max);
    println!("dispersed pulse (1, 4): peak modulus {peak:.4}");
    let input: Vec<Complex64> = pulse.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let phi = 3.0;
    let out = quadratic_phase_filter(&input, pulse.sample_rate, phi);
    let w = Complex64::new(1.0, -phi);
    let err = out
        .iter()
        .enumerate()
        .map(|(i, v)| (v - (-(pulse.time(i).powi(2)) / (2.0 * w)).exp() / w.sqrt()).norm())
        .fold(0.0, f64::max);
    println!("chirp with phi = {phi}: max deviation from closed form {err:.2e}");
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
