//! Trajectory simulation of first passage under restart.
//!
//! Trial `i` draws from a ChaCha8 stream selected by `(seed, i)`, and trials
//! are reduced in fixed-size batches in index order, so an estimate depends
//! only on the configuration and never on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::models::{ProcessModel, RestartSpec};
use crate::par::Execution;

pub const DEFAULT_STEP_CAP: u64 = 10_000_000;
pub const DEFAULT_CI_LEVEL: f64 = 0.99;

const BATCH: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub trials: usize,
    pub seed: u64,
    /// Total steps a trial may take, across all restarts.
    pub step_cap: u64,
    pub ci_level: f64,
    pub execution: Execution,
}

impl SimConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            step_cap: DEFAULT_STEP_CAP,
            ci_level: DEFAULT_CI_LEVEL,
            execution: Execution::default(),
        }
    }

    pub fn with_step_cap(mut self, step_cap: u64) -> Self {
        self.step_cap = step_cap;
        self
    }

    pub fn with_ci_level(mut self, ci_level: f64) -> Self {
        self.ci_level = ci_level;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.step_cap == 0 {
            return Err(Error::InvalidParameter("step_cap must be >= 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ci_level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        Ok(())
    }

    fn rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

/// Normal-approximation estimate of a mean hitting time.
///
/// Censored trials enter at their capped time, so when `censored > 0` the
/// mean is a lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub censored: usize,
    pub trials_used: usize,
    pub restarts_mean: f64,
    pub restarts_stderr: f64,
}

impl SimEstimate {
    pub fn is_lower_bound(&self) -> bool {
        self.censored > 0
    }

    pub fn all_censored(&self) -> bool {
        self.censored == self.trials_used
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Outcome of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trial {
    /// Total elapsed steps; the cap when censored.
    pub time: u64,
    pub restarts: u64,
    pub censored: bool,
}

/// Welford running moments, merged with Chan's pairwise update.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            (self.m2 / (self.n - 1.0) / self.n).sqrt()
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct BatchSummary {
    time: Moments,
    restarts: Moments,
    censored: usize,
}

/// `ℛ` from a uniform `draw`; `None` when the restart never comes.
pub fn sample_restart(spec: &RestartSpec, draw: f64) -> Option<u64> {
    spec.sample(draw)
}

/// Runs one trajectory. With `spec = None` the process runs without restart.
pub fn run_trial<G: Rng + ?Sized>(
    model: &ProcessModel,
    spec: Option<&RestartSpec>,
    step_cap: u64,
    rng: &mut G,
) -> Result<Trial> {
    let mut elapsed: u64 = 0;
    let mut restarts: u64 = 0;
    loop {
        let epoch = match spec {
            Some(s) => s.sample(rng.random::<f64>()).unwrap_or(u64::MAX),
            None => u64::MAX,
        };
        let mut state = model.initial_state();
        let mut k: u64 = 0;
        loop {
            if elapsed + k >= step_cap {
                return Ok(Trial {
                    time: step_cap,
                    restarts,
                    censored: true,
                });
            }
            state = model.step(state, rng.random::<f64>())?;
            k += 1;
            if k == epoch {
                break;
            }
            if model.is_terminal(state) {
                return Ok(Trial {
                    time: elapsed + k,
                    restarts,
                    censored: false,
                });
            }
        }
        elapsed += epoch;
        restarts += 1;
    }
}

fn run_batches(
    model: &ProcessModel,
    spec: Option<&RestartSpec>,
    config: &SimConfig,
) -> Result<SimEstimate> {
    config.validate()?;
    let n_batches = config.trials.div_ceil(BATCH);
    let batches = config
        .execution
        .map_indexed(n_batches, |b| -> Result<BatchSummary> {
            let mut summary = BatchSummary::default();
            let end = ((b + 1) * BATCH).min(config.trials);
            for i in b * BATCH..end {
                let trial = run_trial(model, spec, config.step_cap, &mut config.rng(i))?;
                summary.time.push(trial.time as f64);
                summary.restarts.push(trial.restarts as f64);
                summary.censored += usize::from(trial.censored);
            }
            Ok(summary)
        });
    let mut total = BatchSummary::default();
    for batch in batches {
        let batch = batch?;
        total.time = total.time.merge(batch.time);
        total.restarts = total.restarts.merge(batch.restarts);
        total.censored += batch.censored;
    }
    let z = Normal::standard().inverse_cdf(0.5 + config.ci_level / 2.0);
    let stderr = total.time.stderr();
    Ok(SimEstimate {
        mean: total.time.mean,
        stderr,
        ci_low: total.time.mean - z * stderr,
        ci_high: total.time.mean + z * stderr,
        censored: total.censored,
        trials_used: config.trials,
        restarts_mean: total.restarts.mean,
        restarts_stderr: total.restarts.stderr(),
    })
}

/// Estimates `E[T]` by simulating the process under restart.
pub fn simulate_fpur(
    model: &ProcessModel,
    spec: &RestartSpec,
    config: &SimConfig,
) -> Result<SimEstimate> {
    run_batches(model, Some(spec), config)
}

/// Estimates `E[U]` by simulating the process without restart.
pub fn simulate_underlying(model: &ProcessModel, config: &SimConfig) -> Result<SimEstimate> {
    run_batches(model, None, config)
}

/// Per-trial hitting times in trial order, `None` for censored trials.
pub fn sample_hitting_times(
    model: &ProcessModel,
    spec: Option<&RestartSpec>,
    config: &SimConfig,
) -> Result<Vec<Option<u64>>> {
    config.validate()?;
    config
        .execution
        .map_indexed(config.trials, |i| {
            run_trial(model, spec, config.step_cap, &mut config.rng(i))
                .map(|t| (!t.censored).then_some(t.time))
        })
        .into_iter()
        .collect()
}
