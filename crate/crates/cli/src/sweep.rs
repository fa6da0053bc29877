//! Restart-parameter sweeps and their CSV form.

use std::fmt;
use std::io::{Read, Write};

use fpur_core::fpur::{mean_t_geometric, mean_t_sharp};
use fpur_core::montecarlo::simulate_fpur;
use fpur_core::{ExtReal, ProcessModel, RestartSpec, SimConfig};

use crate::error::{CliError, CliResult};
use crate::parse::Family;

pub const DEFAULT_RATE_LO: f64 = 0.01;
pub const DEFAULT_RATE_HI: f64 = 0.841;
pub const DEFAULT_RATE_POINTS: usize = 60;

const HEADER: [&str; 9] = [
    "param",
    "mean_T_analytic",
    "mean_T_mc",
    "ci_low",
    "ci_high",
    "beneficial",
    "baseline_mean_U",
    "model_descriptor",
    "restart_family",
];

/// A swept restart parameter: a geometric rate or a sharp restart time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Rate(f64),
    Epoch(usize),
}

impl Param {
    pub fn family(self) -> Family {
        match self {
            Param::Rate(_) => Family::Geometric,
            Param::Epoch(_) => Family::Sharp,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Param::Rate(r) => r,
            Param::Epoch(n) => n as f64,
        }
    }

    pub fn restart(self) -> fpur_core::Result<RestartSpec> {
        match self {
            Param::Rate(r) => RestartSpec::geometric(r),
            Param::Epoch(n) => RestartSpec::sharp(n),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Rate(r) => write!(f, "{r:.16e}"),
            Param::Epoch(n) => write!(f, "{n}"),
        }
    }
}

/// A Monte Carlo point with its confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McPoint {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: Param,
    pub mean_t_analytic: ExtReal,
    pub mc: Option<McPoint>,
    pub beneficial: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub baseline_mean_u: ExtReal,
    pub model_descriptor: String,
    pub restart_family: String,
}

/// Monte Carlo settings for a sweep. Row `i` uses seed `seed + i`.
#[derive(Clone, Copy, Debug)]
pub struct McSettings {
    pub trials: usize,
    pub seed: u64,
}

pub fn analytic_mean(model: &ProcessModel, param: Param) -> fpur_core::Result<ExtReal> {
    match param {
        Param::Rate(r) => mean_t_geometric(model, r),
        Param::Epoch(n) => mean_t_sharp(model, n),
    }
}

/// Evaluates every grid point; simulation is skipped where the analytic mean
/// is infinite (every trial would run to the step cap).
pub fn sweep(
    model: &ProcessModel,
    params: &[Param],
    mc: Option<McSettings>,
) -> CliResult<SweepResult> {
    let family = match params.first() {
        Some(p) => p.family(),
        None => return Err(CliError::usage("empty sweep grid")),
    };
    if params.iter().any(|p| p.family() != family) {
        return Err(CliError::usage("sweep grid mixes restart families"));
    }
    let mut order: Vec<usize> = (0..params.len()).collect();
    order.sort_by(|&a, &b| params[a].as_f64().total_cmp(&params[b].as_f64()));

    let baseline = model.mean();
    let mut rows = Vec::with_capacity(params.len());
    for (i, &idx) in order.iter().enumerate() {
        let param = params[idx];
        let analytic = analytic_mean(model, param)?;
        let mc = match mc {
            Some(s) if analytic.is_finite() => {
                let est = simulate_fpur(
                    model,
                    &param.restart()?,
                    &SimConfig::new(s.trials, s.seed + i as u64),
                )?;
                Some(McPoint {
                    mean: est.mean,
                    ci_low: est.ci_low,
                    ci_high: est.ci_high,
                })
            }
            _ => None,
        };
        rows.push(SweepRow {
            param,
            mean_t_analytic: analytic,
            mc,
            beneficial: analytic < baseline,
        });
    }
    Ok(SweepResult {
        rows,
        baseline_mean_u: baseline,
        model_descriptor: model.descriptor(),
        restart_family: family.name().to_string(),
    })
}

fn real(v: f64) -> String {
    ExtReal::from_f64(v).to_string()
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for row in &self.rows {
            let (mc, lo, hi) = match row.mc {
                Some(p) => (real(p.mean), real(p.ci_low), real(p.ci_high)),
                None => Default::default(),
            };
            w.write_record([
                row.param.to_string(),
                row.mean_t_analytic.to_string(),
                mc,
                lo,
                hi,
                row.beneficial.to_string(),
                self.baseline_mean_u.to_string(),
                self.model_descriptor.clone(),
                self.restart_family.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> CliResult<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(input: R) -> CliResult<Self> {
        let mut r = csv::Reader::from_reader(input);
        if r.headers()?.iter().ne(HEADER) {
            return Err(CliError::usage("unexpected sweep csv header"));
        }
        let bad = |what: &str, v: &str| CliError::usage(format!("bad {what} `{v}` in sweep csv"));
        let ext = |v: &str| v.parse::<ExtReal>().map_err(|_| bad("real", v));
        let opt = |v: &str| -> CliResult<Option<f64>> {
            if v.is_empty() {
                Ok(None)
            } else {
                Ok(Some(ext(v)?.to_f64()))
            }
        };

        let mut rows = Vec::new();
        let mut meta: Option<(ExtReal, String, String)> = None;
        for record in r.records() {
            let rec = record?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let family = field(8).to_string();
            let param = match family.as_str() {
                "sharp" => Param::Epoch(
                    field(0)
                        .parse()
                        .map_err(|_| bad("restart time", field(0)))?,
                ),
                "geometric" => Param::Rate(field(0).parse().map_err(|_| bad("rate", field(0)))?),
                other => return Err(bad("restart family", other)),
            };
            let mc = match (opt(field(2))?, opt(field(3))?, opt(field(4))?) {
                (Some(mean), Some(ci_low), Some(ci_high)) => Some(McPoint {
                    mean,
                    ci_low,
                    ci_high,
                }),
                (None, None, None) => None,
                _ => return Err(CliError::usage("partial monte carlo columns in sweep csv")),
            };
            let row_meta = (ext(field(6))?, field(7).to_string(), family);
            match &meta {
                None => meta = Some(row_meta),
                Some(m) if *m == row_meta => {}
                Some(_) => return Err(CliError::usage("sweep csv mixes models or families")),
            }
            rows.push(SweepRow {
                param,
                mean_t_analytic: ext(field(1))?,
                mc,
                beneficial: field(5).parse().map_err(|_| bad("flag", field(5)))?,
            });
        }
        let (baseline_mean_u, model_descriptor, restart_family) =
            meta.ok_or_else(|| CliError::usage("sweep csv has no rows"))?;
        Ok(SweepResult {
            rows,
            baseline_mean_u,
            model_descriptor,
            restart_family,
        })
    }
}
