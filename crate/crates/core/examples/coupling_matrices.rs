//! Mode coupling and radiation loss for an exponentially correlated medium,
//! with the decay rate of the mean total power and its bounds.
use pekeris_refocus::medium::assemble_coupling;
use pekeris_refocus::power::decay_rate;
use pekeris_refocus::waveguide::solve_dispersion;
use pekeris_refocus::{Kernel, MediumStats, Result, WaveguideConfig};

fn run_example() -> Result<()> {
    let ms = solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, 8, 0.5)?)?;
    let medium = MediumStats::new(Kernel::StationaryExponential { sigma2: 1.0, corr_length: 4.0 }, 1.0)?;
    let c = assemble_coupling(&ms, &medium)?;
    println!("nearest-neighbor rates Gamma_(j,j+1):");
    for j in 0..c.n() - 1 {
        println!("  {}-{}  {:.6e}", j + 1, j + 2, c.gamma_c[(j, j + 1)]);
    }
    println!("loss on the last three modes: {:?}", &c.lambda_c.as_slice()[c.n() - 3..]);
    let d = decay_rate(&c)?;
    println!(
        "Lambda_min = {:.4e} <= Lambda_inf = {:.4e} <= Lambda_bar = {:.4e}",
        d.lambda_min, d.lambda_inf, d.lambda_bar
    );
    println!("spectral gap {:.4e}", d.spectral_gap);
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
