#![allow(dead_code)]

use fpur_core::fpur::{
    auto_horizon, brw_geometric_mean, cycle_trap_sharp_mean, mean_t_generic, mean_t_geometric,
    mean_t_sharp,
};
use fpur_core::{ExtReal, ProcessModel, RestartSpec, TruncatedPmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn matrix_models() -> Vec<ProcessModel> {
    vec![
        ProcessModel::cycle_trap(0.75, 2, 14).unwrap(),
        ProcessModel::cycle_trap(0.5, 2, 4).unwrap(),
        ProcessModel::cycle_trap(0.25, 3, 6).unwrap(),
        ProcessModel::biased_walk(0.3, 1).unwrap(),
        ProcessModel::biased_walk(0.6, 1).unwrap(),
        ProcessModel::biased_walk(0.8, 3).unwrap(),
        ProcessModel::two_point(1, 0.75, 20).unwrap(),
        ProcessModel::two_point(1, 0.25, 20).unwrap(),
    ]
}

/// Geometric ρ ∈ {0.1, 0.5, 0.9} and sharp N at 1, 5 and 20 steps past the
/// first support point.
pub fn matrix_specs(model: &ProcessModel) -> Vec<RestartSpec> {
    let s = model.first_support();
    let mut specs: Vec<RestartSpec> = [0.1, 0.5, 0.9]
        .into_iter()
        .map(|rho| RestartSpec::geometric(rho).unwrap())
        .collect();
    specs.extend([s + 1, s + 5, s + 20].map(|n| RestartSpec::sharp(n).unwrap()));
    specs
}

pub struct Cell {
    pub model: ProcessModel,
    pub spec: RestartSpec,
    pub generic: f64,
    /// Every closed form applicable to the cell.
    pub closed: Vec<(&'static str, f64)>,
}

fn finite(v: ExtReal, what: &str) -> f64 {
    v.finite().unwrap_or_else(|| panic!("{what} is infinite"))
}

pub fn analytic_cells() -> Vec<Cell> {
    let mut cells = Vec::new();
    for model in matrix_models() {
        for spec in matrix_specs(&model) {
            let t = auto_horizon(&model, &spec).unwrap();
            let generic = finite(mean_t_generic(&model, &spec, t).unwrap(), "generic mean");
            let mut closed = Vec::new();
            match (&model, &spec) {
                (_, RestartSpec::Geometric { rho }) => {
                    closed.push((
                        "geometric",
                        finite(mean_t_geometric(&model, *rho).unwrap(), "geometric"),
                    ));
                    if let ProcessModel::BiasedWalk { p, start } = model {
                        closed.push((
                            "walk-geometric",
                            finite(brw_geometric_mean(p, start, *rho).unwrap(), "walk"),
                        ));
                    }
                }
                (_, RestartSpec::Sharp { n_restart }) => {
                    closed.push((
                        "sharp",
                        finite(mean_t_sharp(&model, *n_restart).unwrap(), "sharp"),
                    ));
                    if let ProcessModel::CycleTrap {
                        p,
                        exit_len,
                        cycle_len,
                    } = model
                    {
                        closed.push((
                            "trap-sharp",
                            finite(
                                cycle_trap_sharp_mean(p, exit_len, cycle_len, *n_restart),
                                "trap",
                            ),
                        ));
                    }
                }
                _ => unreachable!(),
            }
            cells.push(Cell {
                model: model.clone(),
                spec,
                generic,
                closed,
            });
        }
    }
    cells
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn spec_label(spec: &RestartSpec) -> String {
    match spec {
        RestartSpec::Geometric { rho } => format!("geometric:rho={rho}"),
        RestartSpec::Sharp { n_restart } => format!("sharp:N={n_restart}"),
        RestartSpec::Explicit(_) => "explicit".into(),
    }
}

/// A random explicit pairing together with the regime it was built in.
pub struct ExplicitPair {
    pub model: ProcessModel,
    pub spec: RestartSpec,
    pub u_full: bool,
    pub r_full: bool,
    pub preemptive: bool,
}

fn random_law(
    rng: &mut ChaCha8Rng,
    first: usize,
    last: usize,
    at_inf: f64,
    forced: Option<usize>,
) -> TruncatedPmf {
    let mut w = vec![0.0; last + 1];
    for x in w.iter_mut().take(last + 1).skip(first) {
        if rng.random::<f64>() < 0.6 {
            *x = rng.random::<f64>();
        }
    }
    w[first] += 0.05;
    if let Some(k) = forced {
        if w.len() <= k {
            w.resize(k + 1, 0.0);
        }
        let total: f64 = w.iter().sum();
        w[k] += 0.2 * total.max(1e-3);
    }
    let total: f64 = w.iter().sum();
    let finite = 1.0 - at_inf;
    let c: Vec<f64> = w.iter().map(|x| x / total * finite).collect();
    TruncatedPmf::from_coefficients(c, at_inf).unwrap()
}

/// `count` pairs cycling through the six feasible regimes of
/// {E_U = 1, E_U < 1} × {E_R = 1, E_R < 1} × {preemptive, not}; preemption
/// forces `E_R = 1`.
pub fn explicit_pairs(count: usize, seed: u64) -> Vec<ExplicitPair> {
    let regimes = [
        (true, true, false),
        (true, false, false),
        (false, true, false),
        (false, false, false),
        (true, true, true),
        (false, true, true),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let (u_full, r_full, preemptive) = regimes[i % regimes.len()];
            let a = rng.random_range(1..=10usize);
            let b = a + rng.random_range(0..=15usize);
            let u_inf = if u_full {
                0.0
            } else {
                rng.random_range(0.05..0.6)
            };
            let r_inf = if r_full {
                0.0
            } else {
                rng.random_range(0.05..0.6)
            };
            let u = random_law(&mut rng, a, b, u_inf, None);
            let r = if preemptive {
                let first = rng.random_range(1..=a);
                random_law(&mut rng, first, a, 0.0, None)
            } else {
                let first = rng.random_range(1..=b + 1);
                let last = b + 1 + rng.random_range(0..10usize);
                random_law(&mut rng, first, last, r_inf, Some(b + 1))
            };
            ExplicitPair {
                model: ProcessModel::explicit(u).unwrap(),
                spec: RestartSpec::explicit(r).unwrap(),
                u_full,
                r_full,
                preemptive,
            }
        })
        .collect()
}
