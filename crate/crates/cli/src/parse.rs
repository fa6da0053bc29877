//! The `family:key=value,...` mini-language for models, restart laws and
//! grids.
//!
//! ```text
//! cycle-trap:p=0.75,L=2,M=14
//! brw:p=0.3,m=1
//! two-point:t1=1,w1=0.75,t2=20
//! explicit:1=0.5,inf=0.5
//! geometric:rho=0.2
//! sharp:N=7
//! ```
//!
//! Every descriptor produced by the core crate parses back to an equal value.

use std::collections::BTreeMap;
use std::str::FromStr;

use fpur_core::fpur::linear_grid;
use fpur_core::{ProcessModel, RestartSpec, TruncatedPmf};

use crate::error::{CliError, CliResult};

fn split(text: &str) -> CliResult<(&str, BTreeMap<&str, &str>)> {
    let (family, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("expected `family:key=value,...`, got `{text}`")))?;
    let mut pairs = BTreeMap::new();
    for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("`{item}` is not key=value in `{text}`")))?;
        if pairs.insert(k.trim(), v.trim()).is_some() {
            return Err(CliError::usage(format!(
                "duplicate key `{}` in `{text}`",
                k.trim()
            )));
        }
    }
    Ok((family.trim(), pairs))
}

struct Fields<'a> {
    text: &'a str,
    pairs: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn take<T: FromStr>(&mut self, key: &str) -> CliResult<T> {
        let raw = self
            .pairs
            .remove(key)
            .ok_or_else(|| CliError::usage(format!("missing `{key}` in `{}`", self.text)))?;
        raw.parse().map_err(|_| {
            CliError::usage(format!("bad value `{raw}` for `{key}` in `{}`", self.text))
        })
    }

    fn finish(self) -> CliResult<()> {
        match self.pairs.keys().next() {
            Some(k) => Err(CliError::usage(format!(
                "unknown key `{k}` in `{}`",
                self.text
            ))),
            None => Ok(()),
        }
    }
}

fn invalid(text: &str, err: fpur_core::Error) -> CliError {
    CliError::usage(format!("`{text}`: {err}"))
}

/// Masses given as `n=mass` and optionally `inf=mass`.
fn explicit_pmf(text: &str, pairs: &BTreeMap<&str, &str>) -> CliResult<TruncatedPmf> {
    let mut coefficients = Vec::new();
    let mut at_infinity = 0.0;
    for (&k, &v) in pairs {
        let mass: f64 = v
            .parse()
            .map_err(|_| CliError::usage(format!("bad mass `{v}` in `{text}`")))?;
        if k == "inf" {
            at_infinity = mass;
            continue;
        }
        let n: usize = k.parse().map_err(|_| {
            CliError::usage(format!("`{k}` is neither a time nor `inf` in `{text}`"))
        })?;
        if coefficients.len() <= n {
            coefficients.resize(n + 1, 0.0);
        }
        coefficients[n] = mass;
    }
    if coefficients.is_empty() {
        coefficients.push(0.0);
    }
    TruncatedPmf::new(coefficients, 0.0, at_infinity).map_err(|e| invalid(text, e))
}

pub fn parse_model(text: &str) -> CliResult<ProcessModel> {
    let (family, pairs) = split(text)?;
    if family == "explicit" {
        return ProcessModel::explicit(explicit_pmf(text, &pairs)?).map_err(|e| invalid(text, e));
    }
    let mut f = Fields { text, pairs };
    let model = match family {
        "cycle-trap" => {
            let (p, l, m) = (f.take("p")?, f.take("L")?, f.take("M")?);
            ProcessModel::cycle_trap(p, l, m)
        }
        "brw" => {
            let (p, m) = (f.take("p")?, f.take("m")?);
            ProcessModel::biased_walk(p, m)
        }
        "two-point" => {
            let (t1, w1, t2) = (f.take("t1")?, f.take("w1")?, f.take("t2")?);
            ProcessModel::two_point(t1, w1, t2)
        }
        other => return Err(CliError::usage(format!("unknown model family `{other}`"))),
    };
    f.finish()?;
    model.map_err(|e| invalid(text, e))
}

pub fn parse_restart(text: &str) -> CliResult<RestartSpec> {
    let (family, pairs) = split(text)?;
    if family == "explicit" {
        return RestartSpec::explicit(explicit_pmf(text, &pairs)?).map_err(|e| invalid(text, e));
    }
    let mut f = Fields { text, pairs };
    let spec = match family {
        "geometric" => RestartSpec::geometric(f.take("rho")?),
        "sharp" => RestartSpec::sharp(f.take("N")?),
        other => return Err(CliError::usage(format!("unknown restart family `{other}`"))),
    };
    f.finish()?;
    spec.map_err(|e| invalid(text, e))
}

/// Restart families a sweep can run over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Geometric,
    Sharp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Geometric => "geometric",
            Family::Sharp => "sharp",
        }
    }
}

impl FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "geometric" => Ok(Family::Geometric),
            "sharp" => Ok(Family::Sharp),
            other => Err(CliError::usage(format!("unknown sweep family `{other}`"))),
        }
    }
}

/// Geometric rates: `lo:hi:points` (evenly spaced) or a comma list.
pub fn parse_rate_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::usage(format!("bad rate grid `{text}`"));
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n == 0 || hi < lo {
            return Err(bad());
        }
        linear_grid(lo, hi, n)
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(CliError::usage(format!(
            "rates in `{text}` must lie in (0, 1)"
        )));
    }
    Ok(grid)
}

/// Sharp restart times: `lo:hi` (every integer, inclusive) or a comma list.
pub fn parse_epoch_grid(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::usage(format!("bad restart-time grid `{text}`"));
    let grid: Vec<usize> = if let Some((lo, hi)) = text.split_once(':') {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(CliError::usage(format!(
            "restart times in `{text}` must be >= 1"
        )));
    }
    Ok(grid)
}
