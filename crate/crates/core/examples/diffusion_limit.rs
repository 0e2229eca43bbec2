//! Continuum limit of the mean mode powers: `T1(L, u)` under an absorbing
//! bottom and its principal eigenmode.
use pekeris_refocus::diffusion::{principal_eigenmode, solve_diffusion};
use pekeris_refocus::{DiffusionConfig, Result};

fn run_example() -> Result<()> {
    let mut cfg = DiffusionConfig::reference(vec![0.01, 0.1, 1.0, 10.0]);
    cfg.cells = 256;
    let f = solve_diffusion(&cfg)?;
    for (i, z) in f.z_grid.iter().enumerate() {
        let t = f.scaled(i);
        let n = t.len() - 1;
        println!(
            "L = {z:>5}: T1(0) = {:.4e}, T1(1/2) = {:.4e}, T1(1) = {}, mean {:.4e}",
            t[0],
            t[n / 2],
            t[n],
            f.mean(i)
        );
    }
    let mode = principal_eigenmode(&cfg)?;
    println!("lambda_1 = {:.6}, lambda_2 = {:.6}", mode.lambda_1, mode.lambda_2);
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
