//! Monte Carlo transfer matrices for a three-mode waveguide: mean powers
//! over sampled media against the limiting power equations.
use pekeris_refocus::montecarlo::{estimate_with_model, MCConfig, TransferModel};
use pekeris_refocus::power::integrate_power_at;
use pekeris_refocus::waveguide::solve_dispersion;
use pekeris_refocus::{Kernel, MediumStats, Result, WaveguideConfig};

fn run_example() -> Result<()> {
    let ms = solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, 3, 0.25)?)?;
    let medium = MediumStats::new(Kernel::SeparableCosine { sigma2: 1.0 }, 0.02)?;
    let mc = MCConfig {
        epsilon: 1e-2,
        realizations: 40,
        radiation_bins: 0,
        seed: 2024,
        distance: 1.0,
        z_step: None,
        nearest_neighbor: true,
        mercer_terms: 24,
    };
    let model = TransferModel::new(&ms, &medium, &mc)?;
    let est = estimate_with_model(&model, &mc, 1)?;
    let ode = integrate_power_at(&model.matched_coupling(), &[mc.distance])?;
    for j in 0..est.mean.len() {
        println!("mode {}: MC {:.4} +- {:.4}, ODE {:.4}", j + 1, est.mean[j], est.std_err[j], ode.value(0, j, 0));
    }
    println!("max unitarity defect {:.2e}", est.max_unitarity_defect);
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
