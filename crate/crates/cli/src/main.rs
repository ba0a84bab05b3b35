use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use motzkin_cli::config::{parse_pairs, parse_t_list, parse_usize_list};
use motzkin_cli::{run, write_artifacts, CliError, Command, Format, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "motzkin", version, about = "Area-weighted Motzkin chain numerics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Normalization tables N^k_{p,q}.
    Norms(Common),
    /// Ratio defect series and exponential fits.
    Ratios(Common),
    /// z_k and gamma_k per (t, k).
    Criterion(Common),
    /// Open and pinned gap certificates.
    Certify(Common),
    /// Boundary-penalty expectations and the recursion ratio.
    Penalty(Common),
    /// Overlap defects of the approximate ground states.
    Overlaps(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Float,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Area weights, comma separated; decimals or fractions like 3/10.
    #[arg(long, default_value = "")]
    t: String,
    #[arg(long)]
    kmax: Option<usize>,
    /// Block sizes, e.g. `2,3` or `2..4`.
    #[arg(long, default_value = "")]
    k: String,
    /// Chain lengths, e.g. `8,10` or `1..10`.
    #[arg(long, default_value = "")]
    n: String,
    #[arg(long, value_enum, default_value = "float")]
    mode: ModeArg,
    #[arg(long)]
    cutoff: Option<usize>,
    /// (p,q) pairs for `ratios`, e.g. `0,1;1,1`.
    #[arg(long, default_value = "")]
    pq: String,
    /// Output directory; files go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    threads: Option<usize>,
}

fn config(command: Command, c: Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(command);
    cfg.t = parse_t_list(&c.t)?;
    cfg.kmax = c.kmax;
    cfg.k = parse_usize_list(&c.k)?;
    cfg.n = parse_usize_list(&c.n)?;
    cfg.mode = match c.mode {
        ModeArg::Float => Mode::Float,
        ModeArg::Exact => Mode::Exact,
    };
    cfg.cutoff = c.cutoff;
    cfg.pairs = parse_pairs(&c.pq)?;
    cfg.out = c.out;
    cfg.format = match c.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    cfg.threads = c.threads;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Norms(c) => (Command::Norms, c),
        Sub::Ratios(c) => (Command::Ratios, c),
        Sub::Criterion(c) => (Command::Criterion, c),
        Sub::Certify(c) => (Command::Certify, c),
        Sub::Penalty(c) => (Command::Penalty, c),
        Sub::Overlaps(c) => (Command::Overlaps, c),
    };
    let result = config(command, common).and_then(|cfg| {
        let outcome = run(&cfg)?;
        write_artifacts(cfg.out.as_deref(), &outcome.artifacts, &mut std::io::stdout().lock())?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            if outcome.inconclusive > 0 {
                eprintln!("{} inconclusive point(s)", outcome.inconclusive);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("motzkin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
