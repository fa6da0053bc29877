//! Command-line surface. Every command writes CSV, to stdout unless a path is
//! given.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fpur_core::fpur::{analyze, auto_horizon};
use fpur_core::montecarlo::{
    simulate_fpur, simulate_underlying, DEFAULT_CI_LEVEL, DEFAULT_STEP_CAP,
};
use fpur_core::{ExtReal, SimConfig};

use crate::error::{CliError, CliResult};
use crate::figures::{render, FigureId, FigureOptions};
use crate::parse::{parse_epoch_grid, parse_model, parse_rate_grid, parse_restart, Family};
use crate::sweep::{
    sweep, McSettings, Param, DEFAULT_RATE_HI, DEFAULT_RATE_LO, DEFAULT_RATE_POINTS,
};

pub const SEED_ENV: &str = "FPUR_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "fpur",
    version,
    about = "First passage under restart: exact and simulated statistics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact statistics for one process and restart law.
    Analyze {
        #[arg(long)]
        model: String,
        #[arg(long)]
        restart: String,
    },
    /// Mean hitting time across a grid of geometric rates or sharp restart times.
    Sweep {
        #[arg(long)]
        model: String,
        /// `geometric` or `sharp`.
        #[arg(long)]
        family: String,
        /// `lo:hi:points` or a list of rates for geometric; `lo:hi` or a list
        /// of times for sharp. Geometric defaults to 60 points on [0.01, 0.841].
        #[arg(long)]
        grid: Option<String>,
        /// Monte Carlo trials per grid point; analytic only when omitted.
        #[arg(long)]
        mc: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the mean hitting time.
    Simulate {
        #[arg(long)]
        model: String,
        /// Omit to simulate the process without restart.
        #[arg(long)]
        restart: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
        step_cap: u64,
        #[arg(long, default_value_t = DEFAULT_CI_LEVEL)]
        ci_level: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preset sweeps and threshold curves.
    Figure {
        /// One of 1, 2, 3-bound, 4, 5, 6, 7, 8, 9, 10.
        id: String,
        /// Directory for the CSV files; stdout when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Analytic columns only.
        #[arg(long)]
        no_mc: bool,
        /// Overrides the preset trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
    },
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

fn sink(
    out: Option<&PathBuf>,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => write(stdout),
    }
}

fn quantities(rows: &[(&str, String)], out: &mut dyn Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "value"])?;
    for (k, v) in rows {
        w.write_record([*k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

fn real(v: f64) -> String {
    ExtReal::from_f64(v).to_string()
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Analyze { model, restart } => {
            let model = parse_model(&model)?;
            let spec = parse_restart(&restart)?;
            let t = auto_horizon(&model, &spec)?;
            let report = analyze(&model, &spec, t)?;
            let mean_u = model.mean();
            let rows = [
                ("hit_prob_U", real(model.hit())),
                ("mean_U", mean_u.to_string()),
                ("hit_prob_T", real(report.hit_prob)),
                ("mean_T", report.mean_t.to_string()),
                ("p_restart_wins", real(report.p_restart_wins)),
                ("expected_restarts", report.expected_restarts.to_string()),
                ("preemptive", report.preemptive.to_string()),
                ("beneficial", (report.mean_t < mean_u).to_string()),
            ];
            quantities(&rows, stdout)
        }
        Command::Sweep {
            model,
            family,
            grid,
            mc,
            seed,
            out,
        } => {
            let model = parse_model(&model)?;
            let params: Vec<Param> = match family.parse::<Family>()? {
                Family::Geometric => {
                    let default =
                        format!("{DEFAULT_RATE_LO}:{DEFAULT_RATE_HI}:{DEFAULT_RATE_POINTS}");
                    parse_rate_grid(grid.as_deref().unwrap_or(&default))?
                        .into_iter()
                        .map(Param::Rate)
                        .collect()
                }
                Family::Sharp => {
                    let grid =
                        grid.ok_or_else(|| CliError::usage("sharp sweeps need --grid lo:hi"))?;
                    parse_epoch_grid(&grid)?
                        .into_iter()
                        .map(Param::Epoch)
                        .collect()
                }
            };
            if mc == Some(0) {
                return Err(CliError::usage("--mc needs at least one trial"));
            }
            let mc = mc.map(|trials| McSettings {
                trials,
                seed: seed.seed,
            });
            let result = sweep(&model, &params, mc)?;
            sink(out.as_ref(), stdout, |w| result.write_csv(w))
        }
        Command::Simulate {
            model,
            restart,
            trials,
            seed,
            step_cap,
            ci_level,
            out,
        } => {
            let model = parse_model(&model)?;
            let spec = restart.as_deref().map(parse_restart).transpose()?;
            let config = SimConfig::new(trials, seed.seed)
                .with_step_cap(step_cap)
                .with_ci_level(ci_level);
            config
                .validate()
                .map_err(|e| CliError::usage(e.to_string()))?;
            let est = match &spec {
                Some(spec) => simulate_fpur(&model, spec, &config)?,
                None => simulate_underlying(&model, &config)?,
            };
            let rows = [
                ("mean", real(est.mean)),
                ("stderr", real(est.stderr)),
                ("ci_low", real(est.ci_low)),
                ("ci_high", real(est.ci_high)),
                ("ci_level", real(ci_level)),
                ("trials", est.trials_used.to_string()),
                ("censored", est.censored.to_string()),
                ("lower_bound", est.is_lower_bound().to_string()),
                ("restarts_mean", real(est.restarts_mean)),
                ("restarts_stderr", real(est.restarts_stderr)),
            ];
            sink(out.as_ref(), stdout, |w| quantities(&rows, w))
        }
        Command::Figure {
            id,
            out_dir,
            no_mc,
            trials,
            seed,
        } => {
            let id: FigureId = id.parse()?;
            if trials == Some(0) {
                return Err(CliError::usage("--trials needs at least one trial"));
            }
            let files = render(
                id,
                FigureOptions {
                    seed: seed.seed,
                    trials,
                    monte_carlo: !no_mc,
                },
            )?;
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    for file in &files {
                        fs::write(dir.join(&file.name), &file.contents)?;
                    }
                }
                None => {
                    for (i, file) in files.iter().enumerate() {
                        if i > 0 {
                            writeln!(stdout)?;
                        }
                        stdout.write_all(file.contents.as_bytes())?;
                    }
                }
            }
            Ok(())
        }
    }
}
