//! Command-line front end; all work happens in `pekeris_refocus::runner`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use pekeris_refocus::runner::{execute, Command, Overrides, Preset};
use pekeris_refocus::BottomBoundary;

#[derive(Parser)]
#[command(name = "pekeris", version, about = "Time-reversal refocusing in random Pekeris waveguides")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Propagating modes of the waveguide.
    Modes,
    /// Coupling and loss matrices of the medium.
    Coupling,
    /// Mean mode powers along the propagation distance.
    Power(PowerArgs),
    /// Continuum diffusion limit and its refocusing kernel.
    Diffusion(DiffusionArgs),
    /// Refocused transverse profiles.
    Profile(ProfileArgs),
    /// Peak and FWHM of the refocused spot against distance.
    Resolution(ProfileArgs),
    /// Monte Carlo transfer matrices against the power equations.
    Montecarlo(McArgs),
    /// Run the acceptance battery.
    Validate,
    /// Reproduce a reference figure.
    Preset { name: PresetName },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    #[value(name = "fig-tau1")]
    Tau1,
    #[value(name = "fig-profiles")]
    Profiles,
    #[value(name = "fig-resolution")]
    Resolution,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bc {
    Absorbing,
    Reflecting,
}

#[derive(Args, Default)]
struct PowerArgs {
    #[arg(long)]
    z_max: Option<f64>,
    #[arg(long)]
    checkpoints: Option<usize>,
    #[arg(long)]
    nearest_neighbor: bool,
    #[arg(long, value_delimiter = ',')]
    tau_sweep: Option<Vec<f64>>,
    #[arg(long)]
    mc_paths: Option<usize>,
}

#[derive(Args, Default)]
struct DiffusionArgs {
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    n1: Option<f64>,
    #[arg(long, value_enum)]
    bc: Option<Bc>,
    #[arg(long, value_delimiter = ',')]
    z: Option<Vec<f64>>,
}

#[derive(Args, Default)]
struct ProfileArgs {
    /// Propagation distances, comma separated.
    #[arg(long = "L", value_delimiter = ',')]
    distances: Option<Vec<f64>>,
    #[arg(long)]
    alpha_m: Option<f64>,
    #[arg(long)]
    mirror_center: Option<f64>,
    /// Half-width factors `d1,d2`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    mirror_half_widths: Option<Vec<f64>>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    lossless: bool,
}

#[derive(Args, Default)]
struct McArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    mode_in: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("pekeris: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut o = Overrides { seed: cli.seed, out: cli.out, ..Default::default() };
    let command = match cli.command {
        Cmd::Modes => Command::Modes,
        Cmd::Coupling => Command::Coupling,
        Cmd::Power(p) => {
            o.z_max = p.z_max;
            o.checkpoints = p.checkpoints;
            o.nearest_neighbor = p.nearest_neighbor;
            o.tau_sweep = p.tau_sweep;
            o.mc_paths = p.mc_paths;
            Command::Power
        }
        Cmd::Diffusion(d) => {
            o.a0 = d.a0;
            o.a = d.a;
            o.depth = d.d;
            o.n1 = d.n1;
            o.bottom = d.bc.map(|b| match b {
                Bc::Absorbing => BottomBoundary::Absorbing,
                Bc::Reflecting => BottomBoundary::Reflecting,
            });
            o.z = d.z;
            Command::Diffusion
        }
        Cmd::Profile(p) => {
            profile_flags(&mut o, p);
            Command::Profile
        }
        Cmd::Resolution(p) => {
            profile_flags(&mut o, p);
            Command::Resolution
        }
        Cmd::Montecarlo(m) => {
            o.epsilon = m.epsilon;
            o.realizations = m.realizations;
            o.bins = m.bins;
            o.mode_in = m.mode_in;
            Command::MonteCarlo
        }
        Cmd::Validate => Command::Validate,
        Cmd::Preset { name } => Command::Preset(match name {
            PresetName::Tau1 => Preset::Tau1,
            PresetName::Profiles => Preset::Profiles,
            PresetName::Resolution => Preset::Resolution,
        }),
    };
    let summary = execute(command, cli.config.as_deref(), &o);
    if let Some(e) = &summary.error {
        eprintln!("pekeris: {}: {e}", summary.stage.unwrap_or("run"));
    }
    println!("{}", summary.line());
    ExitCode::from(summary.exit_code as u8)
}

fn profile_flags(o: &mut Overrides, p: ProfileArgs) {
    o.distances = p.distances;
    o.alpha_m = p.alpha_m;
    o.mirror_center = p.mirror_center;
    o.mirror_half_widths = p.mirror_half_widths.map(|v| (v[0], v[1]));
    o.x0 = p.x0;
    o.lossless = p.lossless;
}
