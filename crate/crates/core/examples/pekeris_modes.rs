//! Propagating modes of a Pekeris waveguide and how their spacing approaches
//! `pi` as the frequency grows.
use pekeris_refocus::waveguide::{dispersion_residual, solve_dispersion};
use pekeris_refocus::{Result, WaveguideConfig};

fn run_example() -> Result<()> {
    let cfg = WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, 12, 0.5)?;
    let ms = solve_dispersion(&cfg)?;
    let c = cfg.mode_parameter();
    println!("omega = {:.6}, C = {c:.6}, N = {}", cfg.omega, ms.len());
    println!("{:>3} {:>12} {:>12} {:>10}", "j", "sigma", "beta", "residual");
    for m in &ms.modes {
        println!("{:>3} {:>12.8} {:>12.8} {:>10.2e}", m.index, m.sigma, m.beta, dispersion_residual(c, m.sigma));
    }
    for doubling in 0..3 {
        let w = WaveguideConfig::new(20.0, 2.0, 1.0, cfg.omega * 2f64.powi(doubling))?;
        let r = solve_dispersion(&w)?.asymptotic_spacing_report(0.6);
        println!(
            "omega x{:<2} N = {:>4}  sup |spacing - pi| = {:.3e}",
            1 << doubling,
            r.n,
            r.first_difference.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
