//! Figure presets: fixed models, grids and trial counts, emitted as CSV.

use std::str::FromStr;

use fpur_core::fpur::{brw_geometric_threshold_p, cycle_trap_geometric_threshold, linear_grid};
use fpur_core::{ExtReal, ProcessModel};

use crate::error::{CliError, CliResult};
use crate::sweep::{
    sweep, McSettings, Param, DEFAULT_RATE_HI, DEFAULT_RATE_LO, DEFAULT_RATE_POINTS,
};

pub const TWO_POINT_TRIALS: usize = 2000;
pub const TRAP_GEOMETRIC_TRIALS: usize = 500;
pub const TRAP_SHARP_TRIALS: usize = 50_000;

const TRAP_SHARP_MAX_N: usize = 60;
const WALK_SHARP_MAX_N: usize = 200;
const WALK_BOUND_MAX_M: usize = 20;
const TRAP_BOUND_MAX_L: usize = 5;
const TRAP_BOUND_MAX_M: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    TwoPointFast,
    TwoPointSlow,
    TrapBound,
    TrapGeometric,
    TrapSharpLongExit,
    TrapSharpLongCycle,
    WalkBound,
    WalkSharpStrong,
    WalkSharpModerate,
    WalkSharpWeak,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::TwoPointFast,
        FigureId::TwoPointSlow,
        FigureId::TrapBound,
        FigureId::TrapGeometric,
        FigureId::TrapSharpLongExit,
        FigureId::TrapSharpLongCycle,
        FigureId::WalkBound,
        FigureId::WalkSharpStrong,
        FigureId::WalkSharpModerate,
        FigureId::WalkSharpWeak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::TwoPointFast => "1",
            FigureId::TwoPointSlow => "2",
            FigureId::TrapBound => "3-bound",
            FigureId::TrapGeometric => "4",
            FigureId::TrapSharpLongExit => "5",
            FigureId::TrapSharpLongCycle => "6",
            FigureId::WalkBound => "7",
            FigureId::WalkSharpStrong => "8",
            FigureId::WalkSharpModerate => "9",
            FigureId::WalkSharpWeak => "10",
        }
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = FigureId::ALL.iter().map(|id| id.name()).collect();
                CliError::usage(format!(
                    "unknown figure `{s}` (known: {})",
                    known.join(", ")
                ))
            })
    }
}

/// One emitted CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureFile {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Copy, Debug)]
pub struct FigureOptions {
    pub seed: u64,
    /// Overrides the preset trial count.
    pub trials: Option<usize>,
    pub monte_carlo: bool,
}

fn rate_grid() -> Vec<Param> {
    linear_grid(DEFAULT_RATE_LO, DEFAULT_RATE_HI, DEFAULT_RATE_POINTS)
        .into_iter()
        .map(Param::Rate)
        .collect()
}

fn epoch_grid(max: usize) -> Vec<Param> {
    (1..=max).map(Param::Epoch).collect()
}

fn sweep_files(
    id: FigureId,
    models: &[ProcessModel],
    grid: &[Param],
    trials: Option<usize>,
    opts: FigureOptions,
) -> CliResult<Vec<FigureFile>> {
    let mut files = Vec::new();
    for (k, model) in models.iter().enumerate() {
        let mc = match (opts.monte_carlo, opts.trials.or(trials)) {
            (true, Some(trials)) => Some(McSettings {
                trials,
                seed: opts.seed + (k * grid.len()) as u64,
            }),
            _ => None,
        };
        let result = sweep(model, grid, mc)?;
        let name = if models.len() == 1 {
            format!("figure{}.csv", id.name())
        } else {
            format!("figure{}-{}.csv", id.name(), k + 1)
        };
        files.push(FigureFile {
            name,
            contents: result.to_csv_string()?,
        });
    }
    Ok(files)
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn real(v: f64) -> String {
    ExtReal::from_f64(v).to_string()
}

pub fn render(id: FigureId, opts: FigureOptions) -> CliResult<Vec<FigureFile>> {
    let model = |m: fpur_core::Result<ProcessModel>| m.map_err(CliError::from);
    match id {
        FigureId::TwoPointFast => sweep_files(
            id,
            &[model(ProcessModel::two_point(1, 0.75, 20))?],
            &rate_grid(),
            Some(TWO_POINT_TRIALS),
            opts,
        ),
        FigureId::TwoPointSlow => sweep_files(
            id,
            &[model(ProcessModel::two_point(1, 0.25, 20))?],
            &rate_grid(),
            Some(TWO_POINT_TRIALS),
            opts,
        ),
        FigureId::TrapGeometric => sweep_files(
            id,
            &[
                model(ProcessModel::cycle_trap(0.75, 2, 14))?,
                model(ProcessModel::cycle_trap(0.5, 2, 4))?,
            ],
            &rate_grid(),
            Some(TRAP_GEOMETRIC_TRIALS),
            opts,
        ),
        FigureId::TrapSharpLongExit => sweep_files(
            id,
            &[model(ProcessModel::cycle_trap(0.25, 7, 5))?],
            &epoch_grid(TRAP_SHARP_MAX_N),
            Some(TRAP_SHARP_TRIALS),
            opts,
        ),
        FigureId::TrapSharpLongCycle => sweep_files(
            id,
            &[model(ProcessModel::cycle_trap(0.25, 5, 10))?],
            &epoch_grid(TRAP_SHARP_MAX_N),
            Some(TRAP_SHARP_TRIALS),
            opts,
        ),
        FigureId::WalkSharpStrong | FigureId::WalkSharpModerate | FigureId::WalkSharpWeak => {
            let p = match id {
                FigureId::WalkSharpStrong => 0.8,
                FigureId::WalkSharpModerate => 0.65,
                _ => 0.54,
            };
            sweep_files(
                id,
                &[model(ProcessModel::biased_walk(p, 3))?],
                &epoch_grid(WALK_SHARP_MAX_N),
                None,
                opts,
            )
        }
        FigureId::WalkBound => {
            let rows = (1..=WALK_BOUND_MAX_M)
                .map(|m| vec![m.to_string(), real(brw_geometric_threshold_p(m))]);
            Ok(vec![FigureFile {
                name: format!("figure{}.csv", id.name()),
                contents: table(&["m", "p_star"], rows)?,
            }])
        }
        FigureId::TrapBound => {
            let rows = (1..=TRAP_BOUND_MAX_L).flat_map(|l| {
                (1..=TRAP_BOUND_MAX_M).map(move |m| {
                    vec![
                        l.to_string(),
                        m.to_string(),
                        real(cycle_trap_geometric_threshold(l, m)),
                    ]
                })
            });
            Ok(vec![FigureFile {
                name: format!("figure{}.csv", id.name()),
                contents: table(&["L", "M", "p_star"], rows)?,
            }])
        }
    }
}
