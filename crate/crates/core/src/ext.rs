use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A nonnegative-or-finite real extended with `+inf`.
///
/// Infinite means are a legitimate outcome (defective or preemptive
/// configurations) and are kept distinct from large finite values, so
/// comparisons such as "restart is beneficial" stay exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    /// Maps non-finite floats (`inf`, `NaN`) to [`ExtReal::Infinite`].
    pub fn from_f64(value: f64) -> Self {
        if value.is_finite() {
            ExtReal::Finite(value)
        } else {
            ExtReal::Infinite
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// Lossy conversion; infinity becomes `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl From<f64> for ExtReal {
    fn from(value: f64) -> Self {
        ExtReal::from_f64(value)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
        }
    }
}

/// Finite values print with 17 significant digits, infinity as `inf`.
impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v:.16e}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtReal {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("+inf") {
            return Ok(ExtReal::Infinite);
        }
        s.parse::<f64>().map(ExtReal::from_f64)
    }
}
