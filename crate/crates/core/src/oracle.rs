//! Brute-force checks that share as little as possible with the solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::markov::{dot, ChainSpec};
use crate::model::StructuralParams;
use crate::scalar::Scalar;
use crate::solver::{solve_pattern, BindingPattern, EquilibriumSolution, Sources};

const PATHS_PER_TASK: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Simulates `n_paths` chains from state 1 and averages `states` along them.
///
/// Path `i` draws from its own ChaCha stream `i` under `seed`, and paths are
/// tallied as integer state counts, so the output does not depend on how
/// the work is split across threads.
pub fn simulate_chain<T: Scalar>(
    spec: &ChainSpec<T>,
    states: &[T],
    horizon: usize,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    let n = spec.n_states();
    if states.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: states.len(),
        });
    }
    let rows: Vec<Vec<(usize, f64)>> = spec
        .transition
        .iter()
        .map(|row| {
            let mut acc = 0.0;
            row.iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(j, p)| {
                    acc += p.to_f64_lossy();
                    (j, acc)
                })
                .collect()
        })
        .collect();
    let width = horizon + 1;
    let tasks = n_paths.div_ceil(PATHS_PER_TASK);
    let counts = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let mut counts = vec![0u64; width * n];
            let end = ((task + 1) * PATHS_PER_TASK).min(n_paths);
            for path in task * PATHS_PER_TASK..end {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(path as u64);
                let mut s = 0usize;
                for h in 0..width {
                    counts[h * n + s] += 1;
                    let row = &rows[s];
                    if row.len() > 1 {
                        let u: f64 = rng.random();
                        s = row
                            .iter()
                            .find(|(_, c)| u < *c)
                            .unwrap_or(&row[row.len() - 1])
                            .0;
                    } else {
                        s = row[0].0;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; width * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let x: Vec<f64> = states.iter().map(|s| s.to_f64_lossy()).collect();
    let total = n_paths as f64;
    let mut est = McEstimate {
        mean: Vec::with_capacity(width),
        std_err: Vec::with_capacity(width),
        variance: Vec::with_capacity(width),
    };
    for h in 0..width {
        let freq: Vec<f64> = counts[h * n..(h + 1) * n]
            .iter()
            .map(|c| *c as f64 / total)
            .collect();
        let mean: f64 = freq.iter().zip(&x).map(|(f, v)| f * v).sum();
        let pop_var: f64 = freq
            .iter()
            .zip(&x)
            .map(|(f, v)| f * (v - mean).powi(2))
            .sum();
        let var = if n_paths > 1 {
            pop_var * total / (total - 1.0)
        } else {
            0.0
        };
        est.mean.push(mean);
        est.variance.push(var);
        est.std_err.push((var / total).sqrt());
    }
    Ok(est)
}

/// Distance of each Monte Carlo mean from the exact expectation, in units of
/// the exact standard error `sqrt(Var_n(x) / n_paths)`. The sample error is
/// unusable far out in the tail, where a rarely visited state may not be
/// drawn at all. Horizons with zero exact variance score 0 when the means
/// agree to 1e-12 and infinity otherwise.
pub fn z_scores<T: Scalar>(
    spec: &ChainSpec<T>,
    states: &[T],
    mc: &McEstimate,
    n_paths: usize,
) -> Result<Vec<f64>> {
    let n = spec.n_states();
    if states.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: states.len(),
        });
    }
    let x: Vec<f64> = states.iter().map(|s| s.to_f64_lossy()).collect();
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let dists = spec.distributions(mc.mean.len().saturating_sub(1));
    Ok(dists
        .iter()
        .zip(&mc.mean)
        .map(|(d, m)| {
            let d: Vec<f64> = d.iter().map(|w| w.to_f64_lossy()).collect();
            let mean = dot(&d, &x);
            let var = (dot(&d, &x2) - mean * mean).max(0.0);
            let dev = (m - mean).abs();
            let se = (var / n_paths as f64).sqrt();
            if se > 0.0 {
                dev / se
            } else if dev <= 1e-12 * mean.abs().max(1.0) {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect())
}

/// Per-horizon equation residuals, each the expected absolute state-level
/// residual `u P^n |e|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub euler: Vec<T>,
    pub phillips: Vec<T>,
    /// Assumed regime's rate minus `max(ln beta, phi_pi pi)`.
    pub taylor: Vec<T>,
    /// `k_n - (1 - delta) k_{n-1} - dt g_{n-1}` on the expected paths, with `k_0 = 0`.
    pub capital: Vec<T>,
    /// `y - s_c c - g`, with `y` aggregated from state-level output.
    pub resource: Vec<T>,
    pub max_abs: T,
    pub binding: Vec<bool>,
}

pub fn residual_check<T: Scalar>(
    solution: &EquilibriumSolution<T>,
    horizon: usize,
) -> ResidualReport<T> {
    let par = &solution.params;
    let spec = &solution.spec;
    let n = spec.n_states();
    let y = &solution.states;
    let next = |i: usize, f: &dyn Fn(&Vec2<T>) -> T| {
        (0..n).fold(T::zero(), |acc, j| {
            acc + spec.transition[i][j].clone() * f(&y[j])
        })
    };

    let mut euler_s = Vec::with_capacity(n);
    let mut phillips_s = Vec::with_capacity(n);
    let mut taylor_s = Vec::with_capacity(n);
    let mut output_s = Vec::with_capacity(n);
    for i in 0..n {
        let (c, pi) = (y[i].c.clone(), y[i].pi.clone());
        let taylor = par.phi_pi.clone() * pi.clone();
        let r = taylor.clone().max_of(par.log_beta.clone());
        let assumed = if solution.binding[i] {
            par.log_beta.clone()
        } else {
            taylor
        };
        let ec = next(i, &|v| v.c.clone());
        let epi = next(i, &|v| v.pi.clone());
        euler_s.push(c.clone() - ec + r.clone() - epi.clone() + spec.xi_states[i].clone());
        phillips_s.push(
            pi - par.beta_h() * epi
                - par.kappa.clone()
                    * (par.gamma_c.clone() * c.clone()
                        + par.gamma_g.clone() * spec.g_states[i].clone()
                        - par.gamma_k.clone() * spec.k_states[i].clone()),
        );
        taylor_s.push(assumed - r);
        output_s.push(par.s_c.clone() * c + spec.g_states[i].clone());
    }
    let abs = |v: &[T]| v.iter().map(|x| x.abs()).collect::<Vec<T>>();
    let (euler_a, phillips_a, taylor_a) = (abs(&euler_s), abs(&phillips_s), abs(&taylor_s));
    let c_states: Vec<T> = y.iter().map(|v| v.c.clone()).collect();

    let mut rep = ResidualReport {
        euler: Vec::new(),
        phillips: Vec::new(),
        taylor: Vec::new(),
        capital: Vec::new(),
        resource: Vec::new(),
        max_abs: T::zero(),
        binding: solution.binding.clone(),
    };
    let (mut k_prev, mut g_prev) = (T::zero(), T::zero());
    for dist in spec.distributions(horizon) {
        let k = dot(&dist, &spec.k_states);
        let g = dot(&dist, &spec.g_states);
        let c = dot(&dist, &c_states);
        let y_agg = dot(&dist, &output_s);
        rep.euler.push(dot(&dist, &euler_a));
        rep.phillips.push(dot(&dist, &phillips_a));
        rep.taylor.push(dot(&dist, &taylor_a));
        rep.capital
            .push((k.clone() - par.q.clone() * k_prev - par.delta_tilde.clone() * g_prev).abs());
        rep.resource
            .push((y_agg - par.s_c.clone() * c - g.clone()).abs());
        k_prev = k;
        g_prev = g;
    }
    rep.max_abs = [
        &rep.euler,
        &rep.phillips,
        &rep.taylor,
        &rep.capital,
        &rep.resource,
    ]
    .into_iter()
    .flatten()
    .fold(T::zero(), |m, x| m.max_of(x.clone()));
    rep
}

/// Solves all `2(L+2)` state equations at once by Gaussian elimination on the
/// structural form. Unknowns are ordered `c_1, pi_1, c_2, pi_2, ...`.
pub fn stacked_solve<T: Scalar>(
    params: &StructuralParams<T>,
    l: usize,
    xi1: T,
    g1: T,
    pattern: &BindingPattern,
) -> Result<Vec<Vec2<T>>> {
    let live = l + 2;
    if pattern.0.len() != live {
        return Err(Error::DimensionMismatch {
            expected: live,
            found: pattern.0.len(),
        });
    }
    let spec = ChainSpec::new(params, l, g1, xi1);
    let dim = 2 * live;
    let mut a = vec![vec![T::zero(); dim + 1]; dim];
    let beta_h = params.beta_h();
    let kgc = params.kappa.clone() * params.gamma_c.clone();
    for i in 0..live {
        let (ce, pe) = (2 * i, 2 * i + 1);
        // Euler: c_i - E c' + r_i - E pi' = -xi_i
        a[ce][2 * i] = T::one();
        for j in 0..live {
            let pij = spec.transition[i][j].clone();
            a[ce][2 * j] = a[ce][2 * j].clone() - pij.clone();
            a[ce][2 * j + 1] = a[ce][2 * j + 1].clone() - pij;
        }
        let mut rhs = -spec.xi_states[i].clone();
        if pattern.0[i] {
            rhs = rhs - params.log_beta.clone();
        } else {
            a[ce][2 * i + 1] = a[ce][2 * i + 1].clone() + params.phi_pi.clone();
        }
        a[ce][dim] = rhs;
        // Phillips: pi_i - beta_h E pi' - kappa Gamma_c c_i = kappa (Gamma_g g_i - Gamma_k k_i)
        a[pe][2 * i + 1] = T::one();
        a[pe][2 * i] = -kgc.clone();
        for j in 0..live {
            let w = beta_h.clone() * spec.transition[i][j].clone();
            a[pe][2 * j + 1] = a[pe][2 * j + 1].clone() - w;
        }
        a[pe][dim] = params.kappa.clone()
            * (params.gamma_g.clone() * spec.g_states[i].clone()
                - params.gamma_k.clone() * spec.k_states[i].clone());
    }
    let x = gauss_solve(a)?;
    let mut out: Vec<Vec2<T>> = (0..live)
        .map(|i| Vec2::new(x[2 * i].clone(), x[2 * i + 1].clone()))
        .collect();
    out.push(Vec2::zero());
    Ok(out)
}

/// Solves an augmented system `[A | b]` with partial pivoting.
fn gauss_solve<T: Scalar>(mut a: Vec<Vec<T>>) -> Result<Vec<T>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        if a[pivot][col].is_zero() {
            return Err(Error::SingularSystem { pivot: col });
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].clone() / a[col][col].clone();
            for k in col..=n {
                let v = a[col][k].clone() * f.clone();
                a[row][k] = a[row][k].clone() - v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = a[row][n].clone();
        for k in row + 1..n {
            s = s - a[row][k].clone() * x[k].clone();
        }
        x[row] = s / a[row][row].clone();
    }
    Ok(x)
}

/// Central difference `(f(x0 + h) - f(x0 - h)) / 2h`.
pub fn finite_diff<T: Scalar>(f: impl Fn(T) -> T, x0: T, h: T) -> T {
    let up = f(x0.clone() + h.clone());
    let down = f(x0 - h.clone());
    (up - down) / (T::lit(2.0) * h)
}

/// Discounted consumption response per unit of discounted spending, summed
/// along the chain until both discounted terms fall below `1e-12`.
pub fn pdv_by_summation(
    params: &StructuralParams<f64>,
    l: usize,
    pattern: &BindingPattern,
) -> Result<f64> {
    let spec = ChainSpec::new(params, l, 1.0, 0.0);
    let y = solve_pattern(params, &spec, pattern, Sources::POLICY)?;
    let c: Vec<f64> = y.iter().map(|v| v.c).collect();
    let (mut num, mut den, mut disc) = (0.0, 0.0, 1.0);
    let mut dist = spec.initial.clone();
    for n in 0.. {
        let ec = dot(&dist, &c);
        let eg = dot(&dist, &spec.g_states);
        num += disc * ec;
        den += disc * eg;
        if n > l + 1 && disc * ec.abs() < 1e-12 && disc * eg.abs() < 1e-12 {
            break;
        }
        disc *= params.beta;
        dist = spec.step(&dist);
    }
    Ok(num / den)
}
