//! Truncated nonnegative power series.
//!
//! A [`TruncatedPmf`] stores the masses `x(0), …, x(t_max)` of an
//! integer-valued random time together with the mass it does not represent.
//! That leftover is split in two:
//!
//! * `truncated`: mass at finite times beyond `t_max` (we just stopped
//!   expanding), and
//! * `at_infinity`: `P(X = ∞)`, known analytically for defective laws.
//!
//! Evaluating the coefficients as a polynomial gives the generating function
//! `x̃(z) = Σ x(n) zⁿ` on `[0, 1]`; derivatives at `z = 1` give factorial
//! moments.

use crate::error::{Error, Result};
use crate::ext::ExtReal;

/// Construction tolerance on total mass.
pub const EPS_MASS: f64 = 1e-9;

/// Leftover mass this small is rounding noise from normalisation.
const ROUNDING_MASS: f64 = 1e-14;

/// Default stopping tolerance on the truncated tail when a law is expanded
/// term by term.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

/// Hard cap on the number of coefficients produced by term-by-term expansion.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Finite-support mass sequence with explicit residual mass.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPmf {
    coefficients: Vec<f64>,
    truncated: f64,
    at_infinity: f64,
}

impl TruncatedPmf {
    /// Validated constructor.
    ///
    /// Every coefficient and both residual parts must be nonnegative and the
    /// total must be within [`EPS_MASS`] of one.
    pub fn new(coefficients: Vec<f64>, truncated: f64, at_infinity: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidPmf("no coefficients".into()));
        }
        if let Some((n, c)) = coefficients
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.is_finite() && **c >= 0.0))
        {
            return Err(Error::InvalidPmf(format!("coefficient {n} is {c}")));
        }
        if !(truncated >= 0.0 && truncated.is_finite()) {
            return Err(Error::InvalidPmf(format!("truncated mass {truncated}")));
        }
        if !(0.0..=1.0 + EPS_MASS).contains(&at_infinity) {
            return Err(Error::InvalidPmf(format!("mass at infinity {at_infinity}")));
        }
        let total = compensated_sum(coefficients.iter().copied()) + truncated + at_infinity;
        if (total - 1.0).abs() > EPS_MASS {
            return Err(Error::InvalidPmf(format!("total mass {total}")));
        }
        Ok(Self {
            coefficients,
            truncated,
            at_infinity,
        })
    }

    /// Builds a pmf whose truncated residual is whatever the coefficients and
    /// `at_infinity` leave over. Leftovers at rounding level, and slightly
    /// negative ones within [`EPS_MASS`], are clamped to zero.
    pub fn from_coefficients(coefficients: Vec<f64>, at_infinity: f64) -> Result<Self> {
        let represented = compensated_sum(coefficients.iter().copied());
        let leftover = 1.0 - represented - at_infinity;
        let truncated = if leftover.abs() <= ROUNDING_MASS || (-EPS_MASS..0.0).contains(&leftover) {
            0.0
        } else {
            leftover
        };
        if truncated < 0.0 {
            return Err(Error::InvalidPmf(format!(
                "coefficients carry mass {represented} with {at_infinity} at infinity"
            )));
        }
        Self::new(coefficients, truncated, at_infinity)
    }

    /// Expands a law term by term until the unrepresented finite-time mass
    /// drops below `tol` or `cap` coefficients have been produced.
    ///
    /// `finite_mass` is `P(X < ∞)`; the caller knows it analytically. The
    /// law is assumed to have no mass below `first`, so terms start there.
    pub fn expand(
        mut term: impl FnMut(usize) -> f64,
        first: usize,
        finite_mass: f64,
        tol: f64,
        cap: usize,
    ) -> Result<Self> {
        let cap = cap.max(first + 1);
        let mut coefficients = vec![0.0; first];
        let mut acc = CompensatedSum::new();
        let mut n = first;
        loop {
            let c = term(n);
            acc.add(c);
            coefficients.push(c);
            n += 1;
            if finite_mass - acc.value() < tol || n >= cap {
                break;
            }
        }
        let truncated = (finite_mass - acc.value()).max(0.0);
        Self::new(coefficients, truncated, 1.0 - finite_mass)
    }

    pub fn point_mass(n: usize) -> Self {
        let mut coefficients = vec![0.0; n + 1];
        coefficients[n] = 1.0;
        Self {
            coefficients,
            truncated: 0.0,
            at_infinity: 0.0,
        }
    }

    /// Mass `w1` at `t1`, `1 - w1` at `t2`.
    pub fn two_point(t1: usize, w1: f64, t2: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&w1) {
            return Err(Error::InvalidParameter(format!("weight {w1} not in [0,1]")));
        }
        let mut coefficients = vec![0.0; t1.max(t2) + 1];
        coefficients[t1] += w1;
        coefficients[t2] += 1.0 - w1;
        Self::new(coefficients, 0.0, 0.0)
    }

    pub fn t_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `x(n)`, zero beyond the horizon.
    pub fn mass(&self, n: usize) -> f64 {
        self.coefficients.get(n).copied().unwrap_or(0.0)
    }

    pub fn truncated_mass(&self) -> f64 {
        self.truncated
    }

    pub fn at_infinity(&self) -> f64 {
        self.at_infinity
    }

    pub fn residual(&self) -> f64 {
        self.truncated + self.at_infinity
    }

    /// `P(X < ∞)`: everything except the mass at infinity.
    pub fn hit_probability(&self) -> f64 {
        1.0 - self.at_infinity
    }

    pub fn is_defective(&self) -> bool {
        self.at_infinity > EPS_MASS
    }

    /// First index with positive mass.
    pub fn first_support(&self) -> Option<usize> {
        self.coefficients.iter().position(|&c| c > 0.0)
    }

    /// `Σ x(n) zⁿ` over the represented coefficients, for `z ∈ [0, 1]`.
    pub fn evaluate(&self, z: f64) -> Result<f64> {
        check_unit(z)?;
        let mut acc = CompensatedSum::new();
        let mut zn = 1.0;
        for &c in &self.coefficients {
            acc.add(c * zn);
            zn *= z;
        }
        Ok(acc.value())
    }

    /// `E[X]`, infinite when mass sits at infinity. Truncated mass is
    /// ignored, so the value is a lower bound unless it is negligible.
    pub fn mean(&self) -> ExtReal {
        if self.is_defective() {
            return ExtReal::Infinite;
        }
        ExtReal::Finite(compensated_sum(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(n, &c)| n as f64 * c),
        ))
    }

    /// `Σ n(n-1) x(n) = x̃''(1)` over the represented support.
    pub fn second_factorial_moment(&self) -> f64 {
        compensated_sum(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(n, &c)| n as f64 * (n as f64 - 1.0) * c),
        )
    }

    /// `Σ_{i ≤ n} x(i)`.
    pub fn cumulative(&self, n: usize) -> f64 {
        let end = n.min(self.t_max());
        compensated_sum(self.coefficients[..=end].iter().copied())
    }

    /// `Σ_{i ≤ n} i·x(i)`.
    pub fn weighted_cumulative(&self, n: usize) -> f64 {
        let end = n.min(self.t_max());
        compensated_sum(
            self.coefficients[..=end]
                .iter()
                .enumerate()
                .map(|(i, &c)| i as f64 * c),
        )
    }

    /// `P(X > n)` for `n = 0..=t_max`, accumulated from the tail so that
    /// small survival probabilities keep their relative accuracy.
    pub fn survival_table(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.coefficients.len()];
        let mut acc = CompensatedSum::new();
        acc.add(self.residual());
        for n in (0..self.coefficients.len()).rev() {
            out[n] = acc.value();
            acc.add(self.coefficients[n]);
        }
        out
    }

    /// `P(X > n)`; beyond the horizon only the residual is known.
    pub fn survival(&self, n: usize) -> f64 {
        if n >= self.t_max() {
            return self.residual();
        }
        compensated_sum(
            std::iter::once(self.residual())
                .chain(self.coefficients[n + 1..].iter().rev().copied()),
        )
    }
}

pub(crate) fn check_unit(z: f64) -> Result<()> {
    if (0.0..=1.0).contains(&z) {
        Ok(())
    } else {
        Err(Error::OutsideUnitInterval { value: z })
    }
}

/// First `t_max + 1` coefficients of the formal quotient `numerator / denominator`.
///
/// Long-division recurrence
/// `q[n] = (a[n] - Σ_{k=1}^{n} b[k] q[n-k]) / b[0]`; missing coefficients are zero.
pub fn series_divide(numerator: &[f64], denominator: &[f64], t_max: usize) -> Result<Vec<f64>> {
    let b0 = denominator.first().copied().unwrap_or(0.0);
    if b0 == 0.0 {
        return Err(Error::IllPosedDivision);
    }
    let mut quotient = Vec::with_capacity(t_max + 1);
    for n in 0..=t_max {
        let mut acc = CompensatedSum::new();
        acc.add(numerator.get(n).copied().unwrap_or(0.0));
        let upper = n.min(denominator.len().saturating_sub(1));
        for k in 1..=upper {
            acc.add(-denominator[k] * quotient[n - k]);
        }
        quotient.push(acc.value() / b0);
    }
    Ok(quotient)
}

/// Truncated Cauchy product of two coefficient sequences.
pub fn series_multiply(a: &[f64], b: &[f64], t_max: usize) -> Vec<f64> {
    (0..=t_max)
        .map(|n| {
            let lo = n.saturating_sub(b.len().saturating_sub(1));
            let hi = n.min(a.len().saturating_sub(1));
            if a.is_empty() || b.is_empty() || lo > hi {
                return 0.0;
            }
            compensated_sum((lo..=hi).map(|i| a[i] * b[n - i]))
        })
        .collect()
}
