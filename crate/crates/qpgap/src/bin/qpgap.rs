use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qpgap::commands::{self, FitKind, Options, Output, ParitySimArgs, QpArgs, SpectrumArgs};
use qpgap::config::load_device;
use qpgap::data::read_series;
use qpgap::table::Format;
use qpgap::{CliError, CliResult};

/// Transmon spectra, quasiparticle poisoning and parity-switching models.
///
/// Exit codes: 0 success, 2 input error, 3 numerical failure.
#[derive(Parser)]
#[command(name = "qpgap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write every output file into this directory instead of printing the
    /// main table to stdout.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// RNG seed; overrides the config's `seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Table format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also render SVG plots (written only with --out).
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Transition frequencies and parity splitting over the offset charge.
    Spectrum {
        config: PathBuf,
        /// Intervals on ng over [0, 1/2].
        #[arg(long, default_value_t = 50)]
        ng_steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// QP densities, decay and parity rates over temperature, plus the
    /// barrier and trap verdicts of the gap profile.
    Qp {
        config: PathBuf,
        /// Kelvin; `start:stop:count` or `a,b,c`.
        #[arg(long, default_value = "0.02:0.3:15")]
        temperature_grid: String,
        #[command(flatten)]
        common: Common,
    },
    /// Synthetic two-tone scan with parity switching and offset-charge
    /// jumps, and the parity-lifetime verdict.
    ParitySim {
        config: PathBuf,
        /// Seconds; defaults to the config's scan duration.
        #[arg(long)]
        duration: Option<f64>,
        /// Kelvin; defaults to the config's scan temperature.
        #[arg(long)]
        temperature: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit T1(T) or T2*(T) data.
    Fit {
        #[arg(value_enum)]
        kind: FitKind,
        data: PathBuf,
        config: PathBuf,
        /// T1 data interpolated into the T2 model instead of the config's
        /// constant T1.
        #[arg(long, value_name = "CSV")]
        t1_data: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic T1 or T2* dataset from the config.
    Synth {
        #[arg(value_enum)]
        kind: FitKind,
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn options(c: &Common) -> Options {
    Options {
        format: c.format.clone(),
        svg: c.svg,
        seed: c.seed,
    }
}

fn emit(out: &Output, dir: Option<&Path>) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
            for (name, bytes) in &out.files {
                let path = dir.join(name);
                std::fs::write(&path, bytes)
                    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            }
            stdout.write_all(out.summary.as_bytes())?;
        }
        None => {
            stdout.write_all(out.primary_bytes())?;
            eprint!("{}", out.summary);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Spectrum {
            config,
            ng_steps,
            common,
        } => {
            let d = load_device(&config)?;
            let out = commands::spectrum(&d, &SpectrumArgs { ng_steps }, &options(&common))?;
            emit(&out, common.out.as_deref())
        }
        Command::Qp {
            config,
            temperature_grid,
            common,
        } => {
            let d = load_device(&config)?;
            let args = QpArgs {
                temperatures_k: commands::parse_temperature_grid(&temperature_grid)?,
            };
            let out = commands::qp(&d, &args, &options(&common))?;
            emit(&out, common.out.as_deref())
        }
        Command::ParitySim {
            config,
            duration,
            temperature,
            common,
        } => {
            let d = load_device(&config)?;
            let args = ParitySimArgs {
                duration_s: duration,
                temperature_k: temperature,
            };
            let out = commands::parity_sim(&d, &args, &options(&common))?;
            emit(&out, common.out.as_deref())
        }
        Command::Fit {
            kind,
            data,
            config,
            t1_data,
            common,
        } => {
            let d = load_device(&config)?;
            let series = read_series(&data, kind.series_kind())?;
            let t1 = t1_data
                .map(|p| read_series(&p, qpgap_core::fitting::SeriesKind::T1))
                .transpose()?;
            let out = commands::fit(kind, &d, &series, t1.as_ref(), &options(&common))?;
            if common.out.is_none() {
                // the report is the useful part on a terminal
                print!("{}", out.summary);
                return Ok(());
            }
            emit(&out, common.out.as_deref())
        }
        Command::Synth {
            kind,
            config,
            common,
        } => {
            let d = load_device(&config)?;
            let out = commands::synth(kind, &d, &options(&common))?;
            emit(&out, common.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qpgap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
