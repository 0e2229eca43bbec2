//! Refocused spot in a homogeneous and in a random waveguide: the random
//! medium widens the main lobe and the mirror size stops mattering.
use pekeris_refocus::diffusion::matched_chain;
use pekeris_refocus::power::integrate_power_at;
use pekeris_refocus::refocus::{default_x_tilde, homogeneous_profile, random_profile, refocus_metrics, sinc_fwhm};
use pekeris_refocus::waveguide::solve_dispersion;
use pekeris_refocus::{DiffusionConfig, MirrorSpec, Normalization, Result, WaveguideConfig};

fn run_example() -> Result<()> {
    let ms = solve_dispersion(&WaveguideConfig::with_mode_parameter(20.0, 2.0, 1.0, 80, 0.5)?)?;
    let x = default_x_tilde();
    let mirror = MirrorSpec::reference(0.0);
    let h = refocus_metrics(&homogeneous_profile(&ms, &mirror, 10.0, &x, Normalization::ApertureScaled)?)?;
    println!("homogeneous: FWHM {:.4} (sinc {:.4})", h.fwhm, sinc_fwhm());
    let ls = [0.01, 0.1, 1.0, 75.0];
    let p = integrate_power_at(&matched_chain(&DiffusionConfig::reference(ls.to_vec()), ms.len())?, &ls)?;
    for l in ls {
        let w: Vec<f64> = [0.0, 1.0]
            .iter()
            .map(|&a| {
                random_profile(&ms, &MirrorSpec::reference(a), &p, l, 10.0, &x, Normalization::ApertureScaled)
                    .and_then(|prof| refocus_metrics(&prof))
                    .map(|m| m.fwhm)
            })
            .collect::<Result<_>>()?;
        println!("L = {l:>5}: FWHM {:.4} (alpha_M = 0), {:.4} (alpha_M = 1)", w[0], w[1]);
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
