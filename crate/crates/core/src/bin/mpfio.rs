use clap::{Args, Parser, Subcommand};
use mpfio::config::{Experiment, RunConfig};
use mpfio::runner::{output_dir, run};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mpfio", version, about = "Estimate experiments for multi-parameter Fourier integral operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition of unity and angular windows.
    PartitionCheck(Common),
    /// Phase homogeneity, non-degeneracy, symbol class and remainder bounds.
    SymbolCheck(Common),
    /// FFT against direct kernels, and kernel mass decay in j and ℓ.
    KernelDecay(Common),
    /// Lipschitz ratio of the kernel in y.
    KernelLipschitz(Common),
    /// Kernel mass outside the regions of influence.
    KernelTail(Common),
    /// L² operator norm across grid refinements.
    Opnorm(Common),
    /// Atom images: uniformity in the radius and decay in ℓ.
    AtomBound(Common),
    /// Off-diagonal decay of the S*S kernel.
    SstarS(Common),
    /// Band orthogonality of the adjoint pieces.
    Orthogonality(Common),
    /// Truncated norm growth above and below the critical order.
    Sharpness(Common),
    /// Adjoint atom images on far sectors.
    AdjointTail(Common),
    /// The config's experiment list, or every experiment if it has none.
    All(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides MPFIO_OUT_DIR and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::PartitionCheck(c) => (Some(Experiment::PartitionCheck), c),
        Command::SymbolCheck(c) => (Some(Experiment::SymbolCheck), c),
        Command::KernelDecay(c) => (Some(Experiment::KernelDecay), c),
        Command::KernelLipschitz(c) => (Some(Experiment::KernelLipschitz), c),
        Command::KernelTail(c) => (Some(Experiment::KernelTail), c),
        Command::Opnorm(c) => (Some(Experiment::Opnorm), c),
        Command::AtomBound(c) => (Some(Experiment::AtomBound), c),
        Command::SstarS(c) => (Some(Experiment::SstarS), c),
        Command::Orthogonality(c) => (Some(Experiment::Orthogonality), c),
        Command::Sharpness(c) => (Some(Experiment::Sharpness), c),
        Command::AdjointTail(c) => (Some(Experiment::AdjointTail), c),
        Command::All(c) => (None, c),
    };
    let mut config = match &common.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let experiments = experiment.map(|e| vec![e]).unwrap_or_else(|| config.selected());
    let out = output_dir(common.out.as_deref(), &config);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.jobs.filter(|&n| n > 0) {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    let code = pool.install(|| run(&config, &experiments, &out));
    ExitCode::from(code as u8)
}
