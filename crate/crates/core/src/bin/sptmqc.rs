use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sptmqc::renorm::Depth;
use sptmqc::sweep::{self, Format, SweepConfig};
use sptmqc::{mqc, toymodel, BufferAxis, Error};

#[derive(Parser)]
#[command(name = "sptmqc", version, about = "Buffered MBQC on SPT matrix product states")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SPTMQC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file or directory; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Drop the `#` metadata line.
    #[arg(long)]
    no_meta: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Aklt,
    Toy,
}

#[derive(Subcommand)]
enum Command {
    /// Run a grid sweep described by a TOML or JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Analyse one point of the toy model; fails on degenerate input.
    Point {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi: f64,
        /// Buffer depth, -1 for the limit.
        #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
        m: i64,
        #[arg(long, default_value = "z")]
        axis: BufferAxis,
        #[arg(long, default_value_t = FRAC_PI_2)]
        theta_gate: f64,
    },
    /// Monte Carlo of the postselected protocol.
    Protocol {
        #[arg(long, value_enum, default_value = "toy")]
        model: Model,
        #[arg(long, default_value_t = FRAC_PI_2)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, default_value_t = 2)]
        m: u64,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "z")]
        axis: BufferAxis,
        #[arg(long, default_value_t = FRAC_PI_2)]
        theta_gate: f64,
    },
    /// Regenerate the figure tables and check their qualitative features.
    Figures {
        /// Directory for the CSV files.
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        #[arg(long)]
        no_meta: bool,
    },
}

fn open_out(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> sptmqc::Result<()> {
    match cli.command {
        Command::Sweep { config, seed, output } => {
            let mut cfg = SweepConfig::from_path(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let format = output.format.map_or(cfg.format, Format::from);
            let table = sweep::run_sweep_with_threads(&cfg, cli.threads)?;
            let target = output.out.or_else(|| cfg.output_path.clone());
            sweep::write_table(&table, &cfg, format, !output.no_meta, open_out(target.as_ref())?)
        }
        Command::Point { theta, phi, m, axis, theta_gate } => {
            let depth = Depth::from_signed(m).map_err(|e| Error::Config(e.to_string()))?;
            if !(0.0..2.0 * std::f64::consts::PI).contains(&theta_gate) {
                return Err(Error::Config(format!("--theta-gate {theta_gate} is outside [0, 2π)")));
            }
            let report = sweep::run_point(theta, phi, depth, axis, theta_gate)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("plain struct"));
            Ok(())
        }
        Command::Protocol { model, theta, phi, m, runs, seed, axis, theta_gate } => {
            let f = match model {
                Model::Aklt => toymodel::aklt_factorized(),
                Model::Toy => toymodel::toy_tensor(toymodel::ToyModelParams::new(theta, phi))?,
            };
            let job = || mqc::simulate_many(&f, axis, m, theta_gate, runs, seed);
            let stats = match cli.threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?
                    .install(job)?,
                None => job()?,
            };
            println!("{}", serde_json::to_string_pretty(&stats).expect("plain struct"));
            Ok(())
        }
        Command::Figures { out, no_meta } => {
            std::fs::create_dir_all(&out)?;
            let mut all_ok = true;
            for spec in sweep::figure_specs() {
                let cfg = &spec.config;
                let table = sweep::run_sweep_with_threads(cfg, cli.threads)?;
                let path = out.join(cfg.output_path.as_ref().expect("figure specs name their file"));
                sweep::write_table(&table, cfg, Format::Csv, !no_meta, BufWriter::new(File::create(&path)?))?;
                let rows = sweep::read_csv(&std::fs::read_to_string(&path)?)?;
                for p in sweep::figure_predicates(spec.name, &rows)? {
                    all_ok &= p.passed;
                    println!("{} {}: {} ({})", if p.passed { "PASS" } else { "FAIL" }, spec.name, p.name, p.detail);
                }
                eprintln!("wrote {}", path.display());
            }
            if !all_ok {
                log::warn!("some figure predicates failed");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Domain(_) => 2,
                Error::NumericalDegeneracy { .. } | Error::NullOutcome(_) | Error::StalledFlow => 3,
                _ => 1,
            })
        }
    }
}
