//! Restart laws and underlying first-passage processes.
//!
//! Every process exposes its hitting-time generating function (closed form
//! where one exists), a coefficient expansion, and a one-step simulator. The
//! simulator takes its uniform draw as an argument so the engine in
//! [`crate::montecarlo`] owns all randomness.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::series::{check_unit, TruncatedPmf, DEFAULT_RESIDUAL_TOL, DEFAULT_TERM_CAP};

/// Arguments of the walk's square root this far below zero are treated as zero.
const SQRT_CLAMP: f64 = 1e-15;

/// A law given by explicit masses, with prefix sums cached for sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLaw {
    pmf: TruncatedPmf,
    cdf: Vec<f64>,
}

impl DiscreteLaw {
    /// Rejects laws with mass at time zero. Truncated mass becomes an
    /// explicit coefficient at `t_max + 1`.
    pub fn new(pmf: TruncatedPmf) -> Result<Self> {
        if pmf.mass(0) > 0.0 {
            return Err(Error::InvalidPmf("mass at time zero".into()));
        }
        let pmf = if pmf.truncated_mass() > 0.0 {
            let mut coefficients = pmf.coefficients().to_vec();
            coefficients.push(pmf.truncated_mass());
            TruncatedPmf::new(coefficients, 0.0, pmf.at_infinity())?
        } else {
            pmf
        };
        let mut acc = crate::series::CompensatedSum::new();
        let cdf = pmf
            .coefficients()
            .iter()
            .map(|&c| {
                acc.add(c);
                acc.value()
            })
            .collect();
        Ok(Self { pmf, cdf })
    }

    pub fn pmf(&self) -> &TruncatedPmf {
        &self.pmf
    }

    /// `explicit:n=mass,...,inf=mass`, listing only positive masses.
    pub fn descriptor(&self) -> String {
        let mut parts: Vec<String> = self
            .pmf
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(n, c)| format!("{n}={c}"))
            .collect();
        if self.pmf.at_infinity() > 0.0 {
            parts.push(format!("inf={}", self.pmf.at_infinity()));
        }
        format!("explicit:{}", parts.join(","))
    }

    pub fn cdf(&self, n: usize) -> f64 {
        self.cdf[n.min(self.cdf.len() - 1)]
    }

    /// Inverse-CDF draw; mass at infinity yields `None`.
    pub fn sample(&self, draw: f64) -> Option<u64> {
        let idx = self.cdf.partition_point(|&c| c <= draw);
        (idx < self.cdf.len()).then_some(idx as u64)
    }
}

/// Restart-time law `R`, supported on the positive integers.
#[derive(Clone, Debug, PartialEq)]
pub enum RestartSpec {
    /// `r(n) = ρ(1-ρ)^{n-1}`, `n ≥ 1`.
    Geometric {
        rho: f64,
    },
    /// `r(n) = δ_{n,N}`.
    Sharp {
        n_restart: usize,
    },
    Explicit(DiscreteLaw),
}

impl RestartSpec {
    pub fn geometric(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric rate {rho} must lie in (0, 1)"
            )));
        }
        Ok(RestartSpec::Geometric { rho })
    }

    pub fn sharp(n_restart: usize) -> Result<Self> {
        if n_restart == 0 {
            return Err(Error::InvalidParameter(
                "sharp restart time must be >= 1".into(),
            ));
        }
        Ok(RestartSpec::Sharp { n_restart })
    }

    pub fn explicit(pmf: TruncatedPmf) -> Result<Self> {
        Ok(RestartSpec::Explicit(DiscreteLaw::new(pmf)?))
    }

    pub fn descriptor(&self) -> String {
        match self {
            RestartSpec::Geometric { rho } => format!("geometric:rho={rho}"),
            RestartSpec::Sharp { n_restart } => format!("sharp:N={n_restart}"),
            RestartSpec::Explicit(law) => law.descriptor(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            RestartSpec::Geometric { .. } => "geometric",
            RestartSpec::Sharp { .. } => "sharp",
            RestartSpec::Explicit(_) => "explicit",
        }
    }

    pub fn pmf(&self, n: usize) -> f64 {
        match *self {
            RestartSpec::Geometric { rho } => {
                if n == 0 {
                    0.0
                } else {
                    rho * (1.0 - rho).powi(n as i32 - 1)
                }
            }
            RestartSpec::Sharp { n_restart } => f64::from(u8::from(n == n_restart)),
            RestartSpec::Explicit(ref law) => law.pmf.mass(n),
        }
    }

    /// `R(n) = P(R ≤ n)`.
    pub fn cdf(&self, n: usize) -> f64 {
        match *self {
            RestartSpec::Geometric { rho } => 1.0 - (1.0 - rho).powi(n as i32),
            RestartSpec::Sharp { n_restart } => f64::from(u8::from(n >= n_restart)),
            RestartSpec::Explicit(ref law) => law.cdf(n),
        }
    }

    /// `P(R > n)`, computed without cancellation for the parametric families.
    pub fn survival(&self, n: usize) -> f64 {
        match *self {
            RestartSpec::Geometric { rho } => (1.0 - rho).powi(n as i32),
            RestartSpec::Sharp { n_restart } => f64::from(u8::from(n < n_restart)),
            RestartSpec::Explicit(ref law) => law.pmf.survival(n),
        }
    }

    pub fn pgf(&self, z: f64) -> Result<f64> {
        check_unit(z)?;
        Ok(match *self {
            RestartSpec::Geometric { rho } => rho * z / (1.0 - (1.0 - rho) * z),
            RestartSpec::Sharp { n_restart } => z.powi(n_restart as i32),
            RestartSpec::Explicit(ref law) => law.pmf.evaluate(z)?,
        })
    }

    pub fn mean(&self) -> ExtReal {
        match *self {
            RestartSpec::Geometric { rho } => ExtReal::Finite(1.0 / rho),
            RestartSpec::Sharp { n_restart } => ExtReal::Finite(n_restart as f64),
            RestartSpec::Explicit(ref law) => law.pmf.mean(),
        }
    }

    /// `E_R = P(R < ∞)`.
    pub fn hit(&self) -> f64 {
        match self {
            RestartSpec::Geometric { .. } | RestartSpec::Sharp { .. } => 1.0,
            RestartSpec::Explicit(law) => law.pmf.hit_probability(),
        }
    }

    /// Draws a restart epoch from a uniform `draw ∈ [0, 1)`. `None` means
    /// the restart never happens.
    pub fn sample(&self, draw: f64) -> Option<u64> {
        match *self {
            RestartSpec::Geometric { rho } => {
                let n = ((-draw).ln_1p() / (-rho).ln_1p()).ceil();
                Some(if n >= 1.0 { n as u64 } else { 1 })
            }
            RestartSpec::Sharp { n_restart } => Some(n_restart as u64),
            RestartSpec::Explicit(ref law) => law.sample(draw),
        }
    }
}

/// Position of a simulated process.
///
/// Lattice models use the vertex label. Models given only through their
/// hitting-time law run as a countdown: [`COUNTDOWN_FRESH`] before the
/// hitting time is drawn, then the number of steps still to go.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct State(pub i64);

pub const COUNTDOWN_FRESH: State = State(-1);

/// Underlying process with hitting time `U` and `P(U = 0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProcessModel {
    /// Vertices `-exit_len ..= cycle_len`, start at 0, target `-exit_len`.
    /// From 0 the walker steps to -1 with probability `p` and then walks
    /// straight to the target, or to +1 and walks round the cycle back to 0.
    CycleTrap {
        p: f64,
        exit_len: usize,
        cycle_len: usize,
    },
    /// Walk on the nonnegative integers absorbed at 0, stepping down with
    /// probability `p`.
    BiasedWalk {
        p: f64,
        start: usize,
    },
    /// `U = t1` with probability `w1`, otherwise `t2`.
    TwoPoint {
        t1: usize,
        w1: f64,
        t2: usize,
    },
    Explicit(DiscreteLaw),
}

impl ProcessModel {
    pub fn cycle_trap(p: f64, exit_len: usize, cycle_len: usize) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "trap exit probability {p} not in (0, 1]"
            )));
        }
        if exit_len == 0 || cycle_len == 0 {
            return Err(Error::InvalidParameter(
                "trap lengths L and M must be >= 1".into(),
            ));
        }
        Ok(ProcessModel::CycleTrap {
            p,
            exit_len,
            cycle_len,
        })
    }

    pub fn biased_walk(p: f64, start: usize) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "walk bias {p} not in (0, 1)"
            )));
        }
        if start == 0 {
            return Err(Error::InvalidParameter("walk must start at m >= 1".into()));
        }
        Ok(ProcessModel::BiasedWalk { p, start })
    }

    pub fn two_point(t1: usize, w1: f64, t2: usize) -> Result<Self> {
        if t1 == 0 || t2 == 0 {
            return Err(Error::InvalidParameter(
                "two-point times must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&w1) {
            return Err(Error::InvalidParameter(format!(
                "weight {w1} not in [0, 1]"
            )));
        }
        Ok(ProcessModel::TwoPoint { t1, w1, t2 })
    }

    pub fn explicit(pmf: TruncatedPmf) -> Result<Self> {
        Ok(ProcessModel::Explicit(DiscreteLaw::new(pmf)?))
    }

    /// Earliest time with positive hitting mass.
    pub fn first_support(&self) -> usize {
        match *self {
            ProcessModel::CycleTrap { exit_len, .. } => exit_len,
            ProcessModel::BiasedWalk { start, .. } => start,
            ProcessModel::TwoPoint { t1, w1, t2 } => {
                if w1 == 0.0 {
                    t2
                } else if w1 == 1.0 {
                    t1
                } else {
                    t1.min(t2)
                }
            }
            ProcessModel::Explicit(ref law) => law.pmf.first_support().unwrap_or(usize::MAX),
        }
    }

    /// `ũ(z)` on `[0, 1]`.
    pub fn pgf(&self, z: f64) -> Result<f64> {
        check_unit(z)?;
        Ok(match *self {
            ProcessModel::CycleTrap {
                p,
                exit_len,
                cycle_len,
            } => p * z.powi(exit_len as i32) / (1.0 - (1.0 - p) * z.powi(cycle_len as i32 + 1)),
            ProcessModel::BiasedWalk { p, start } => {
                let q = 1.0 - p;
                let mut arg = 1.0 - 4.0 * p * q * z * z;
                if arg < 0.0 && arg > -SQRT_CLAMP {
                    arg = 0.0;
                }
                // (1 - √(1-4pqz²)) / (2qz), rationalised so that z → 0 is exact
                let base = 2.0 * p * z / (1.0 + arg.sqrt());
                base.powi(start as i32)
            }
            ProcessModel::TwoPoint { t1, w1, t2 } => {
                w1 * z.powi(t1 as i32) + (1.0 - w1) * z.powi(t2 as i32)
            }
            ProcessModel::Explicit(ref law) => law.pmf.evaluate(z)?,
        })
    }

    /// `E_U = P(U < ∞)`.
    pub fn hit(&self) -> f64 {
        match *self {
            ProcessModel::CycleTrap { .. } | ProcessModel::TwoPoint { .. } => 1.0,
            ProcessModel::BiasedWalk { p, start } => {
                let q = 1.0 - p;
                if p >= q {
                    1.0
                } else {
                    (p / q).powi(start as i32)
                }
            }
            ProcessModel::Explicit(ref law) => law.pmf.hit_probability(),
        }
    }

    /// `E[U]`.
    pub fn mean(&self) -> ExtReal {
        match *self {
            ProcessModel::CycleTrap {
                p,
                exit_len,
                cycle_len,
            } => ExtReal::Finite(exit_len as f64 + (1.0 - p) / p * (cycle_len as f64 + 1.0)),
            ProcessModel::BiasedWalk { p, start } => {
                let q = 1.0 - p;
                if p > q {
                    ExtReal::Finite(start as f64 / (p - q))
                } else {
                    ExtReal::Infinite
                }
            }
            ProcessModel::TwoPoint { t1, w1, t2 } => {
                ExtReal::Finite(w1 * t1 as f64 + (1.0 - w1) * t2 as f64)
            }
            ProcessModel::Explicit(ref law) => law.pmf.mean(),
        }
    }

    /// `E[U(U-1)]`, exact where a closed form exists.
    pub fn second_factorial_moment(&self) -> ExtReal {
        match *self {
            ProcessModel::CycleTrap {
                p,
                exit_len,
                cycle_len,
            } => {
                // U = L + (M+1)J with J geometric on {0,1,…}: E[J] = q/p, E[J²] = q(1+q)/p²
                let q = 1.0 - p;
                let l = exit_len as f64;
                let c = cycle_len as f64 + 1.0;
                let ej = q / p;
                let ej2 = q * (1.0 + q) / (p * p);
                let eu = l + c * ej;
                let eu2 = l * l + 2.0 * l * c * ej + c * c * ej2;
                ExtReal::Finite(eu2 - eu)
            }
            ProcessModel::BiasedWalk { p, start } => {
                let q = 1.0 - p;
                if p <= q {
                    ExtReal::Infinite
                } else {
                    // sum of m i.i.d. single-level passage times with mean
                    // 1/(p-q) and variance 4pq/(p-q)³
                    let m = start as f64;
                    let d = p - q;
                    let var = m * 4.0 * p * q / d.powi(3);
                    let mean = m / d;
                    ExtReal::Finite(var + mean * mean - mean)
                }
            }
            ProcessModel::TwoPoint { t1, w1, t2 } => {
                let f = |t: usize| t as f64 * (t as f64 - 1.0);
                ExtReal::Finite(w1 * f(t1) + (1.0 - w1) * f(t2))
            }
            ProcessModel::Explicit(ref law) => {
                let pmf = law.pmf();
                if pmf.is_defective() {
                    ExtReal::Infinite
                } else {
                    ExtReal::Finite(pmf.second_factorial_moment())
                }
            }
        }
    }

    /// Hitting-time masses `u(0..=t_max)`.
    ///
    /// Mass provably at infinity (the walk with `p < q`) is tagged as such;
    /// everything else not represented is truncated mass.
    pub fn pmf(&self, t_max: usize) -> Result<TruncatedPmf> {
        let first = self.first_support();
        if t_max < first {
            return Err(Error::EmptySupport { t_max, first });
        }
        match *self {
            ProcessModel::CycleTrap {
                p,
                exit_len,
                cycle_len,
            } => {
                let q = 1.0 - p;
                let period = cycle_len + 1;
                let mut coefficients = vec![0.0; t_max + 1];
                let mut j = 0;
                let mut n = exit_len;
                while n <= t_max {
                    coefficients[n] = p * q.powi(j);
                    j += 1;
                    n += period;
                }
                TruncatedPmf::new(coefficients, q.powi(j), 0.0)
            }
            ProcessModel::BiasedWalk { p, start } => {
                let hit = self.hit();
                let mut coefficients = vec![0.0; t_max + 1];
                let mut n = start;
                while n <= t_max {
                    coefficients[n] = walk_mass(p, start, (n - start) / 2);
                    n += 2;
                }
                TruncatedPmf::from_coefficients(coefficients, 1.0 - hit)
            }
            ProcessModel::TwoPoint { t1, w1, t2 } => {
                let mut coefficients = vec![0.0; t_max + 1];
                let mut truncated = 0.0;
                for (t, w) in [(t1, w1), (t2, 1.0 - w1)] {
                    match coefficients.get_mut(t) {
                        Some(c) => *c += w,
                        None => truncated += w,
                    }
                }
                TruncatedPmf::new(coefficients, truncated, 0.0)
            }
            ProcessModel::Explicit(ref law) => {
                let src = law.pmf();
                if t_max >= src.t_max() {
                    let mut coefficients = src.coefficients().to_vec();
                    coefficients.resize(t_max + 1, 0.0);
                    TruncatedPmf::new(coefficients, src.truncated_mass(), src.at_infinity())
                } else {
                    let coefficients = src.coefficients()[..=t_max].to_vec();
                    let dropped: f64 = src.coefficients()[t_max + 1..].iter().sum();
                    TruncatedPmf::new(
                        coefficients,
                        src.truncated_mass() + dropped,
                        src.at_infinity(),
                    )
                }
            }
        }
    }

    /// Expands `u(n)` until the truncated finite-time mass is below `tol`
    /// or `cap` coefficients exist.
    pub fn pmf_until(&self, tol: f64, cap: usize) -> Result<TruncatedPmf> {
        match *self {
            ProcessModel::CycleTrap {
                p,
                exit_len,
                cycle_len,
            } => {
                let q = 1.0 - p;
                // remaining mass after j full cycles is q^{j+1}
                let cycles = if q == 0.0 {
                    0
                } else {
                    ((tol.ln() / q.ln()).ceil().max(1.0) as usize).saturating_sub(1)
                };
                let t = (exit_len + cycles * (cycle_len + 1)).min(cap.max(exit_len + 1) - 1);
                self.pmf(t.max(exit_len))
            }
            ProcessModel::BiasedWalk { p, start } => TruncatedPmf::expand(
                |n| {
                    if n >= start && (n - start) % 2 == 0 {
                        walk_mass(p, start, (n - start) / 2)
                    } else {
                        0.0
                    }
                },
                start,
                self.hit(),
                tol,
                cap,
            ),
            ProcessModel::TwoPoint { t1, t2, .. } => self.pmf(t1.max(t2)),
            ProcessModel::Explicit(ref law) => Ok(law.pmf().clone()),
        }
    }

    /// [`Self::pmf_until`] with the default tolerance and term cap.
    pub fn pmf_default(&self) -> Result<TruncatedPmf> {
        self.pmf_until(DEFAULT_RESIDUAL_TOL, DEFAULT_TERM_CAP)
    }

    pub fn initial_state(&self) -> State {
        match *self {
            ProcessModel::CycleTrap { .. } => State(0),
            ProcessModel::BiasedWalk { start, .. } => State(start as i64),
            ProcessModel::TwoPoint { .. } | ProcessModel::Explicit(_) => COUNTDOWN_FRESH,
        }
    }

    pub fn is_terminal(&self, state: State) -> bool {
        match *self {
            ProcessModel::CycleTrap { exit_len, .. } => state.0 == -(exit_len as i64),
            ProcessModel::BiasedWalk { .. }
            | ProcessModel::TwoPoint { .. }
            | ProcessModel::Explicit(_) => state.0 == 0,
        }
    }

    /// One time step driven by a uniform `draw ∈ [0, 1)`.
    pub fn step(&self, state: State, draw: f64) -> Result<State> {
        if self.is_terminal(state) {
            return Err(Error::TerminalState(state.0));
        }
        let s = state.0;
        Ok(State(match *self {
            ProcessModel::CycleTrap { p, cycle_len, .. } => {
                if s == 0 {
                    if draw < p {
                        -1
                    } else {
                        1
                    }
                } else if s < 0 {
                    s - 1
                } else if s == cycle_len as i64 {
                    0
                } else {
                    s + 1
                }
            }
            ProcessModel::BiasedWalk { p, .. } => {
                if draw < p {
                    s - 1
                } else {
                    s + 1
                }
            }
            ProcessModel::TwoPoint { t1, w1, t2 } => {
                if state == COUNTDOWN_FRESH {
                    let t = if draw < w1 { t1 } else { t2 };
                    t as i64 - 1
                } else {
                    s - 1
                }
            }
            ProcessModel::Explicit(ref law) => {
                if state == COUNTDOWN_FRESH {
                    match law.sample(draw) {
                        Some(t) => t as i64 - 1,
                        None => i64::MAX,
                    }
                } else {
                    s - 1
                }
            }
        }))
    }

    pub fn descriptor(&self) -> String {
        match *self {
            ProcessModel::CycleTrap {
                p,
                exit_len,
                cycle_len,
            } => format!("cycle-trap:p={p},L={exit_len},M={cycle_len}"),
            ProcessModel::BiasedWalk { p, start } => format!("brw:p={p},m={start}"),
            ProcessModel::TwoPoint { t1, w1, t2 } => format!("two-point:t1={t1},w1={w1},t2={t2}"),
            ProcessModel::Explicit(ref law) => law.descriptor(),
        }
    }
}

/// `u(m+2k) = m/(m+2k) · C(m+2k, k) · p^{m+k} q^k`, evaluated in log space.
fn walk_mass(p: f64, start: usize, k: usize) -> f64 {
    let q = 1.0 - p;
    let m = start as f64;
    let k = k as f64;
    let n = m + 2.0 * k;
    let ln_binom = ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(m + k + 1.0);
    (m.ln() - n.ln() + ln_binom + (m + k) * p.ln() + k * q.ln()).exp()
}
