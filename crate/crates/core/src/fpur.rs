//! Composition of an underlying process with a restart law.
//!
//! Generic routes work from the coefficient expansion of `U` and the restart
//! law's pmf/cdf. Mass of `U` beyond the expansion horizon `t` is treated as
//! sitting at `t + 1`; mass at infinity is handled exactly. Closed forms for
//! geometric and sharp restart are provided alongside as independent routes.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::models::{ProcessModel, RestartSpec};
use crate::series::{series_divide, CompensatedSum, TruncatedPmf, DEFAULT_TERM_CAP, EPS_MASS};

/// `E_T` below `1 - DEFECT_TOL` makes the mean infinite.
pub const DEFECT_TOL: f64 = 1e-12;

/// Tolerance used when an expansion horizon is chosen automatically.
const AUTO_HORIZON_TOL: f64 = 1e-12;

/// Geometric restart survival `(1-ρ)^t` below this is negligible.
const GEOMETRIC_TAIL_TOL: f64 = 1e-17;

/// Summary of one (process, restart) pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct FpurReport {
    /// `E_T = P(T < ∞)`.
    pub hit_prob: f64,
    pub mean_t: ExtReal,
    /// `p_r = P(R ≤ U)`.
    pub p_restart_wins: f64,
    /// `p_r / (1 - p_r)`.
    pub expected_restarts: ExtReal,
    pub preemptive: bool,
}

/// The pieces shared by the hitting-probability formulas.
struct Overlap {
    e_u: f64,
    e_r: f64,
    /// `P(R > U, U < ∞) = Σ u(n) P(R > n)`, truncated mass lumped at the
    /// horizon. Summed from nonnegative terms so that it vanishes exactly
    /// when restart always comes first.
    restart_loses: f64,
}

impl Overlap {
    fn new(model: &ProcessModel, spec: &RestartSpec, pmf: &TruncatedPmf) -> Self {
        let mut acc = CompensatedSum::new();
        for (n, &u) in pmf.coefficients().iter().enumerate() {
            if u > 0.0 {
                acc.add(u * spec.survival(n));
            }
        }
        acc.add(pmf.truncated_mass() * spec.survival(pmf.t_max() + 1));
        Self {
            e_u: model.hit(),
            e_r: spec.hit(),
            restart_loses: acc.value(),
        }
    }

    /// `E_U - Σ u(n)R(n)`.
    fn numerator(&self) -> f64 {
        self.restart_loses
    }

    /// `d = 1 - p_r = E_U - Σ u(n)R(n) + (1 - E_R)(1 - E_U)`; equals the
    /// numerator exactly whenever either hitting probability is one.
    fn denominator(&self) -> f64 {
        self.numerator() + (1.0 - self.e_r) * (1.0 - self.e_u)
    }

    fn p_restart_wins(&self) -> f64 {
        (1.0 - self.denominator()).clamp(0.0, 1.0)
    }

    fn preemptive(&self) -> bool {
        self.denominator() <= 0.0
    }

    fn hit_prob(&self) -> f64 {
        if self.preemptive() {
            0.0
        } else {
            (self.numerator() / self.denominator()).clamp(0.0, 1.0)
        }
    }
}

fn expansion(model: &ProcessModel, t_max: usize) -> Result<TruncatedPmf> {
    model.pmf(t_max.max(model.first_support()))
}

/// Chooses an expansion horizon for the generic routes.
pub fn auto_horizon(model: &ProcessModel, spec: &RestartSpec) -> Result<usize> {
    let first = model.first_support();
    let model_horizon =
        || -> Result<usize> { Ok(model.pmf_until(AUTO_HORIZON_TOL, DEFAULT_TERM_CAP)?.t_max()) };
    let t = match *spec {
        RestartSpec::Sharp { n_restart } => n_restart.saturating_sub(1),
        RestartSpec::Geometric { rho } => {
            let t_r = (GEOMETRIC_TAIL_TOL.ln() / (1.0 - rho).ln()).ceil();
            if t_r <= 100_000.0 {
                t_r as usize
            } else {
                model_horizon()?.min(t_r.min(DEFAULT_TERM_CAP as f64) as usize)
            }
        }
        RestartSpec::Explicit(ref law) => {
            if law.pmf().residual() > EPS_MASS {
                model_horizon()?
            } else {
                model_horizon()?.min(law.pmf().t_max() + 1)
            }
        }
    };
    Ok(t.max(first))
}

/// `p_r = Σ u(n)R(n) + (1 - E_U)E_R`.
pub fn p_restart_wins(model: &ProcessModel, spec: &RestartSpec, t_max: usize) -> Result<f64> {
    let pmf = expansion(model, t_max)?;
    Ok(Overlap::new(model, spec, &pmf).p_restart_wins())
}

/// `E_T`; zero when restart is preemptive.
pub fn hitting_prob_t(model: &ProcessModel, spec: &RestartSpec, t_max: usize) -> Result<f64> {
    let pmf = expansion(model, t_max)?;
    Ok(Overlap::new(model, spec, &pmf).hit_prob())
}

/// `t̃(z)` evaluated from the restart-composition formula with truncated
/// double sums.
pub fn fpur_pgf(model: &ProcessModel, spec: &RestartSpec, z: f64, t_max: usize) -> Result<f64> {
    let pmf = expansion(model, t_max)?;
    let u_z = model.pgf(z)?;
    let r_z = spec.pgf(z)?;
    let e_u = model.hit();
    let overlap = Overlap::new(model, spec, &pmf);
    if z == 1.0 && overlap.preemptive() {
        return Ok(0.0);
    }

    let mut num = CompensatedSum::new();
    num.add(u_z);
    let mut den = CompensatedSum::new();
    den.add(1.0);
    den.add(-r_z * (1.0 - e_u));

    // running Σ_{i ≤ n} zⁱ r(i)
    let mut partial_r = CompensatedSum::new();
    let mut zn = 1.0;
    for (n, &u) in pmf.coefficients().iter().enumerate() {
        partial_r.add(zn * spec.pmf(n));
        if u > 0.0 {
            num.add(-zn * u * spec.cdf(n));
            den.add(-u * partial_r.value());
        }
        zn *= z;
    }
    // beyond the horizon R(n) and Σ_{i ≤ n} zⁱ r(i) are frozen at n = t + 1,
    // which is exact for sharp restart with N ≤ t + 1
    let trunc = pmf.truncated_mass();
    if trunc > 0.0 {
        let end = pmf.t_max() + 1;
        partial_r.add(zn * spec.pmf(end));
        let tail_z = (u_z - pmf.evaluate(z)?).max(0.0);
        num.add(-tail_z * spec.cdf(end));
        den.add(-trunc * partial_r.value());
    }
    Ok(num.value() / den.value())
}

/// Coefficients `t(0..=t_max)` of the restart-composition generating function.
///
/// Uses the quotient form
/// `t̃(z) = Σ zⁿ u(n)(1 - R(n)) / (1 - Σ zⁱ r(i) P(U ≥ i))`,
/// whose denominator coefficients past the constant are all nonpositive, so
/// the long division only ever adds nonnegative terms.
pub fn fpur_pmf(model: &ProcessModel, spec: &RestartSpec, t_max: usize) -> Result<TruncatedPmf> {
    let pmf = model.pmf(t_max.max(model.first_support()))?;
    let overlap = Overlap::new(model, spec, &pmf);
    if overlap.preemptive() {
        return TruncatedPmf::new(vec![0.0; t_max + 1], 0.0, 1.0);
    }
    let survival_u = pmf.survival_table();
    let numerator: Vec<f64> = (0..=t_max)
        .map(|n| pmf.mass(n) * spec.survival(n))
        .collect();
    let mut denominator = Vec::with_capacity(t_max + 1);
    denominator.push(1.0 - spec.pmf(0));
    for i in 1..=t_max {
        let at_least_i = survival_u
            .get(i - 1)
            .copied()
            .unwrap_or_else(|| pmf.residual());
        denominator.push(-spec.pmf(i) * at_least_i);
    }
    let coefficients = series_divide(&numerator, &denominator, t_max)?;
    let hit = overlap.hit_prob();
    let represented: f64 = coefficients.iter().sum();
    TruncatedPmf::new(coefficients, (hit - represented).max(0.0), 1.0 - hit)
}

/// `E[T] = E[U ∧ R] / (1 - p_r)` with `E[U ∧ R] = Σ_{n≥0} P(U>n) P(R>n)`.
pub fn mean_t_generic(model: &ProcessModel, spec: &RestartSpec, t_max: usize) -> Result<ExtReal> {
    let pmf = expansion(model, t_max)?;
    let overlap = Overlap::new(model, spec, &pmf);
    if overlap.preemptive() || overlap.hit_prob() < 1.0 - DEFECT_TOL {
        return Ok(ExtReal::Infinite);
    }
    if overlap.e_r < 1.0 - EPS_MASS && model.mean().is_infinite() {
        return Ok(ExtReal::Infinite);
    }

    let survival_u = pmf.survival_table();
    let mut min_mean = CompensatedSum::new();
    for (n, &s_u) in survival_u.iter().enumerate() {
        min_mean.add(s_u * spec.survival(n));
    }
    let at_inf = pmf.at_infinity();
    if at_inf > 0.0 {
        min_mean.add(at_inf * restart_survival_tail(spec, pmf.t_max())?);
    }
    Ok(ExtReal::Finite(min_mean.value() / overlap.denominator()))
}

/// `Σ_{n > t} P(R > n)`.
fn restart_survival_tail(spec: &RestartSpec, t: usize) -> Result<f64> {
    Ok(match *spec {
        RestartSpec::Geometric { rho } => (1.0 - rho).powi(t as i32 + 1) / rho,
        RestartSpec::Sharp { n_restart } => n_restart.saturating_sub(t + 1) as f64,
        RestartSpec::Explicit(ref law) => {
            let pmf = law.pmf();
            if pmf.is_defective() {
                f64::INFINITY
            } else {
                (t + 1..=pmf.t_max()).map(|n| pmf.survival(n)).sum()
            }
        }
    })
}

/// `E[T] = (1 - ũ(1-ρ)) / (ρ ũ(1-ρ))`.
pub fn mean_t_geometric(model: &ProcessModel, rho: f64) -> Result<ExtReal> {
    RestartSpec::geometric(rho)?;
    let u = model.pgf(1.0 - rho)?;
    if u <= 0.0 {
        return Ok(ExtReal::Infinite);
    }
    Ok(ExtReal::from_f64((1.0 - u) / (rho * u)))
}

/// `E[T] = (Σ_{n<N} n u(n) + N(1 - U(N-1))) / U(N-1)`; infinite when
/// `U(N-1) = 0`.
pub fn mean_t_sharp(model: &ProcessModel, n_restart: usize) -> Result<ExtReal> {
    RestartSpec::sharp(n_restart)?;
    let horizon = n_restart - 1;
    if horizon < model.first_support() {
        return Ok(ExtReal::Infinite);
    }
    let pmf = model.pmf(horizon)?;
    let reached = pmf.cumulative(horizon);
    if reached <= 0.0 {
        return Ok(ExtReal::Infinite);
    }
    let weighted = pmf.weighted_cumulative(horizon);
    let not_reached = pmf.residual();
    Ok(ExtReal::from_f64(
        (weighted + n_restart as f64 * not_reached) / reached,
    ))
}

/// Sharp-restart mean for the cycle trap in closed form,
/// `K = ⌊(N-1-L)/(M+1)⌋`.
pub fn cycle_trap_sharp_mean(
    p: f64,
    exit_len: usize,
    cycle_len: usize,
    n_restart: usize,
) -> ExtReal {
    if n_restart <= exit_len {
        return ExtReal::Infinite;
    }
    let q = 1.0 - p;
    let l = exit_len as f64;
    let period = cycle_len as f64 + 1.0;
    let k = ((n_restart - 1 - exit_len) / (cycle_len + 1)) as i32;
    let qk = q.powi(k);
    let qk1 = q.powi(k + 1);
    let n = n_restart as f64;
    let inner = k as f64 * qk1 - (k as f64 + 1.0) * qk + 1.0;
    ExtReal::from_f64(l + (qk1 * n + q / p * period * inner) / (1.0 - qk1))
}

/// How sharp restart at `N` compares with no restart on the cycle trap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SharpVerdict {
    Beneficial,
    Equal,
    Worse,
    Preemptive,
}

/// Sign of `E[T] - E[U] ∝ (N-1-M) - (M+1)⌊(N-1-L)/(M+1)⌋`; independent of `p`.
pub fn cycle_trap_sharp_classify(
    exit_len: usize,
    cycle_len: usize,
    n_restart: usize,
) -> SharpVerdict {
    if n_restart <= exit_len {
        return SharpVerdict::Preemptive;
    }
    let period = cycle_len as i64 + 1;
    let k = (n_restart - 1 - exit_len) as i64 / period;
    let bracket = (n_restart as i64 - 1 - cycle_len as i64) - period * k;
    match bracket.signum() {
        -1 => SharpVerdict::Beneficial,
        0 => SharpVerdict::Equal,
        _ => SharpVerdict::Worse,
    }
}

/// `E[T](L + a(M+1)) - E[T](L + 1 + a(M+1))` for the cycle trap, `a ≥ 1`:
/// the drop just after each support point of `u`.
pub fn cycle_trap_sawtooth_drop(p: f64, exit_len: usize, cycle_len: usize, a: u32) -> Result<f64> {
    if a == 0 {
        return Err(Error::InvalidParameter(
            "sawtooth index a must be >= 1".into(),
        ));
    }
    let q = 1.0 - p;
    let qa = q.powi(a as i32);
    let qa1 = q.powi(a as i32 + 1);
    let l = exit_len as f64;
    let m = cycle_len as f64;
    Ok(qa * l / (1.0 - qa) + qa1 * (m - l) / (1.0 - qa1))
}

/// `D = (2ũ'(1)² - ũ''(1)) / 2`; negative `D` guarantees some small `ρ`
/// is beneficial.
pub fn derivative_criterion(model: &ProcessModel) -> Result<f64> {
    if (model.hit() - 1.0).abs() > EPS_MASS {
        return Err(Error::CriterionInapplicable(
            "underlying process is defective".into(),
        ));
    }
    let mean = model.mean();
    let fact2 = model.second_factorial_moment();
    match (mean, fact2) {
        (ExtReal::Finite(m1), ExtReal::Finite(m2)) => Ok((2.0 * m1 * m1 - m2) / 2.0),
        _ => Err(Error::CriterionInapplicable(
            "underlying moments are infinite".into(),
        )),
    }
}

/// Largest trap exit probability admitting a beneficial geometric rate;
/// zero when `M ≤ 2L`.
pub fn cycle_trap_geometric_threshold(exit_len: usize, cycle_len: usize) -> f64 {
    if cycle_len <= 2 * exit_len {
        return 0.0;
    }
    let l = exit_len as f64;
    let a = (cycle_len as f64 + 1.0) * (cycle_len as f64 - 2.0 * l);
    a / (a + l * (l + 1.0))
}

/// `p* = (4 - m + √(m² + 8)) / 8` for the walk started at `m`.
pub fn brw_geometric_threshold_p(start: usize) -> f64 {
    let m = start as f64;
    (4.0 - m + (m * m + 8.0).sqrt()) / 8.0
}

/// `m* = (8p(1-p) - 1) / (2p - 1)`, defined for `p > 1/2` only.
pub fn brw_geometric_threshold_m(p: f64) -> Result<f64> {
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::CriterionInapplicable(format!(
            "start threshold needs p in (1/2, 1), got {p}"
        )));
    }
    Ok((8.0 * p * (1.0 - p) - 1.0) / (2.0 * p - 1.0))
}

/// Whether some geometric rate beats no restart on the cycle trap.
pub fn cycle_trap_geometric_beneficial(p: f64, exit_len: usize, cycle_len: usize) -> bool {
    p < cycle_trap_geometric_threshold(exit_len, cycle_len)
}

/// Whether some geometric rate beats no restart on the walk. Always true for
/// `p ≤ 1/2`, where the unrestarted mean is infinite.
pub fn brw_geometric_beneficial(p: f64, start: usize) -> bool {
    p <= 0.5 || p < brw_geometric_threshold_p(start)
}

/// Geometric-restart mean for the walk, written directly in `p`, `m`, `ρ`.
pub fn brw_geometric_mean(p: f64, start: usize, rho: f64) -> Result<ExtReal> {
    RestartSpec::geometric(rho)?;
    ProcessModel::biased_walk(p, start)?;
    let q = 1.0 - p;
    let s = 1.0 - rho;
    let m = start as i32;
    let root = 1.0 - (1.0 - 4.0 * p * q * s * s).max(0.0).sqrt();
    let denom = rho * root.powi(m);
    if denom <= 0.0 {
        return Ok(ExtReal::Infinite);
    }
    Ok(ExtReal::from_f64(
        ((2.0 * q * s).powi(m) - root.powi(m)) / denom,
    ))
}

/// One-stop report for a pairing, using the generic routes.
pub fn analyze(model: &ProcessModel, spec: &RestartSpec, t_max: usize) -> Result<FpurReport> {
    let pmf = expansion(model, t_max)?;
    let overlap = Overlap::new(model, spec, &pmf);
    let preemptive = overlap.preemptive();
    let p_r = overlap.p_restart_wins();
    let expected_restarts = if preemptive {
        ExtReal::Infinite
    } else {
        ExtReal::from_f64(p_r / overlap.denominator())
    };
    Ok(FpurReport {
        hit_prob: overlap.hit_prob(),
        mean_t: mean_t_generic(model, spec, t_max)?,
        p_restart_wins: p_r,
        expected_restarts,
        preemptive,
    })
}

/// Default ρ grid for beneficial-rate searches: 400 log-spaced points.
pub fn default_rho_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0 - 1e-4, 400)
}

/// `points` evenly spaced values on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// `points` log-spaced values on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Smallest geometric-restart mean over `grid` and the rate achieving it.
pub fn best_geometric_rate(model: &ProcessModel, grid: &[f64]) -> Result<(f64, ExtReal)> {
    let mut best = (f64::NAN, ExtReal::Infinite);
    for &rho in grid {
        let v = mean_t_geometric(model, rho)?;
        if best.0.is_nan() || v < best.1 {
            best = (rho, v);
        }
    }
    Ok(best)
}
