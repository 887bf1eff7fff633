//! Oracle suites run by the `selftest` command.

use serde::Serialize;

use crate::analytics::{impact_multiplier_normal, pdv_multiplier, threshold_eps_i, PdvScenario};
use crate::error::Result;
use crate::markov::{irf, ChainSpec};
use crate::model::{derive_composites, Nkpc, ParamSet, StructuralParams};
use crate::oracle::{residual_check, simulate_chain, stacked_solve, z_scores};
use crate::solver::{
    calibrate_xi_at, impact_closed_form, solve_elb, verify_binding, BindingPattern, ExitMode,
};

pub const SELFTEST_LS: [usize; 4] = [0, 1, 5, 20];
pub const SELFTEST_HORIZON: usize = 60;
pub const SELFTEST_G1: f64 = 0.01;
pub const MC_PATHS: usize = 100_000;
pub const MC_HORIZON: usize = 40;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    /// Largest observed error, in the suite's own units (see `tolerance`).
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub params: String,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn suite(name: &'static str, cases: usize, max_error: f64, tolerance: f64) -> SuiteResult {
    SuiteResult {
        name,
        cases,
        max_error,
        tolerance,
        passed: max_error.is_finite() && max_error <= tolerance,
    }
}

fn variants(params: &StructuralParams<f64>) -> Result<Vec<StructuralParams<f64>>> {
    [Nkpc::Static, Nkpc::Hybrid]
        .into_iter()
        .map(|nkpc| {
            derive_composites(&ParamSet {
                nkpc,
                ..params.raw()
            })
        })
        .collect()
}

/// Runs every oracle suite on `params` (both Phillips curve variants).
pub fn run(params: &StructuralParams<f64>, seed: u64) -> Result<SelftestReport> {
    let mut suites = Vec::new();
    let mut residual_max: f64 = 0.0;
    let mut stacked_max: f64 = 0.0;
    let mut binding_bad: f64 = 0.0;
    let mut cases = 0;
    for par in variants(params)? {
        for exit in [ExitMode::Stochastic, ExitMode::Deterministic] {
            for l in SELFTEST_LS {
                cases += 1;
                let xi = calibrate_xi_at(&par, l, exit, SELFTEST_G1)?;
                let sol = solve_elb(&par, l, SELFTEST_G1, xi, exit)?;
                residual_max = residual_max.max(residual_check(&sol, SELFTEST_HORIZON).max_abs);
                let stacked = stacked_solve(&par, l, xi, SELFTEST_G1, &sol.pattern())?;
                for (a, b) in sol.states.iter().zip(&stacked) {
                    stacked_max = stacked_max.max((a.c - b.c).abs()).max((a.pi - b.pi).abs());
                }
                if !verify_binding(&sol).ok() {
                    binding_bad += 1.0;
                }
            }
        }
    }
    suites.push(suite("residuals", cases, residual_max, 1e-10));
    suites.push(suite("stacked_vs_recursion", cases, stacked_max, 1e-10));
    suites.push(suite("binding_violations", cases, binding_bad, 0.0));

    // Monte Carlo: worst deviation from the exact expectation in standard errors.
    let l = 5;
    let xi = calibrate_xi_at(params, l, ExitMode::Stochastic, SELFTEST_G1)?;
    let sol = solve_elb(params, l, SELFTEST_G1, xi, ExitMode::Stochastic)?;
    let c: Vec<f64> = sol.states.iter().map(|y| y.c).collect();
    let mut worst: f64 = 0.0;
    let spec: &ChainSpec<f64> = &sol.spec;
    for states in [&c, &spec.k_states, &spec.g_states] {
        let mc = simulate_chain(spec, states, MC_HORIZON, MC_PATHS, seed)?;
        for z in z_scores(spec, states, &mc, MC_PATHS)? {
            worst = worst.max(z);
        }
    }
    suites.push(suite("monte_carlo_z", 3, worst, 4.0));

    // Closed forms against the solver's g-loading (static curve).
    let stat = &variants(params)?[0];
    let mut cf: f64 = 0.0;
    let normal = impact_multiplier_normal(stat)?;
    let loading = impact_closed_form(stat, 0, ExitMode::Deterministic)?.total();
    cf = cf
        .max(rel(normal.dc1_dg, loading.c))
        .max(rel(normal.dpi1_dg, loading.pi));
    let path = irf(&solve_elb(stat, 0, 1.0, 0.0, ExitMode::Deterministic)?, 0);
    cf = cf.max(rel(path.c[0], normal.dc1_dg));
    let pattern = BindingPattern::normal(0);
    let pdv = pdv_multiplier(stat, PdvScenario::Normal)?.pdv_c;
    cf = cf.max(rel(
        pdv,
        crate::oracle::pdv_by_summation(stat, 0, &pattern)?,
    ));
    suites.push(suite("closed_forms", 3, cf, 1e-8));

    let eps_m = pdv_multiplier(stat, PdvScenario::Normal)?
        .eps_m
        .unwrap_or(f64::NAN);
    let eps_i = threshold_eps_i(stat)?;
    let ordering = if eps_m < eps_i && eps_m > 0.0 {
        0.0
    } else {
        1.0
    };
    suites.push(suite("threshold_ordering", 1, ordering, 0.0));

    let passed = suites.iter().all(|s| s.passed);
    Ok(SelftestReport {
        params: params.provenance(),
        seed,
        passed,
        suites,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
