//! Mean mode powers from the coupled power equations, checked against the
//! jump-process (Feynman-Kac) estimator.
use pekeris_refocus::medium::assemble_coupling;
use pekeris_refocus::power::{integrate_power, markov_estimate};
use pekeris_refocus::waveguide::solve_dispersion;
use pekeris_refocus::{Kernel, MediumStats, Result, WaveguideConfig};

fn run_example() -> Result<()> {
    let ms = solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, 5, 0.5)?)?;
    let c = assemble_coupling(
        &ms,
        &MediumStats::new(Kernel::StationaryExponential { sigma2: 1.0, corr_length: 4.0 }, 1.0)?,
    )?;
    let z = 300.0;
    let p = integrate_power(&c, z, 4)?;
    for (i, z) in p.z_grid.iter().enumerate() {
        let col: Vec<String> = (0..p.n()).map(|j| format!("{:.4}", p.value(i, j, 0))).collect();
        println!("z = {z:>6.1}  T_j^1 = [{}]", col.join(", "));
    }
    let m = markov_estimate(&c, z, 1, 4000, 3)?;
    let last = p.z_grid.len() - 1;
    for j in 0..p.n() {
        println!(
            "mode {}: ODE {:.4}  jump process {:.4} +- {:.4}",
            j + 1,
            p.value(last, j, 0),
            m.mean[j],
            m.std_err[j]
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}

#[cfg(test)]
mod tests {
    #[test]
    fn runs() {
        super::run_example().unwrap();
    }
}
