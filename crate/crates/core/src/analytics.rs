//! Closed-form multipliers, thresholds and diagnostics, plus the solver-based
//! decomposition used for the forward-looking Phillips curve.
//!
//! The scalar formulas below hold for the static Phillips curve only; asking
//! for them under the hybrid curve is an error.

use std::ops::RangeInclusive;

use nalgebra::Matrix2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::markov::ChainSpec;
use crate::model::{regime_matrices, Nkpc, Regime, StructuralParams};
use crate::scalar::{Real, Scalar};
use crate::solver::{
    calibrate_xi, q_limit, solve_elb, solve_pattern, BindingPattern, ExitMode, ImpactLoading,
    Sources,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Normal,
    ShortTrap,
    LongTrap,
    FiniteL,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Normal => "normal",
            Scenario::ShortTrap => "short-trap",
            Scenario::LongTrap => "long-trap",
            Scenario::FiniteL => "finite-L",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "normal" => Ok(Scenario::Normal),
            "short-trap" => Ok(Scenario::ShortTrap),
            "long-trap" => Ok(Scenario::LongTrap),
            "finite-L" => Ok(Scenario::FiniteL),
            other => Err(format!(
                "scenario must be one of normal, short-trap, long-trap, finite-L; got `{other}`"
            )),
        }
    }
}

fn require_static<T>(params: &StructuralParams<T>, what: &'static str) -> Result<()> {
    match params.nkpc {
        Nkpc::Static => Ok(()),
        Nkpc::Hybrid => Err(Error::StaticOnly(what)),
    }
}

/// `1 - r + kappa Gamma_c (phi_pi - r)`: the normal-regime determinant
/// `det(A0) det(I - rA)`.
pub fn delta_normal<T: Scalar>(params: &StructuralParams<T>, r: &T) -> T {
    T::one() - r.clone()
        + params.kappa.clone() * params.gamma_c.clone() * (params.phi_pi.clone() - r.clone())
}

/// `1 - r (1 + kappa Gamma_c)`: `det(I - rA*)` under the static curve.
pub fn delta_elb<T: Scalar>(params: &StructuralParams<T>, r: &T) -> T {
    T::one() - r.clone() * (T::one() + params.kappa.clone() * params.gamma_c.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenDiagnostics<T> {
    /// Persistence above which pA* has an eigenvalue outside the unit circle.
    pub p_bar: T,
    pub eig_pa: [Complex<T>; 2],
    pub eig_qa: [Complex<T>; 2],
    pub rho_pa: T,
    pub rho_qa: T,
    pub det_i_pa: T,
    pub det_i_qa: T,
    /// `1 - p(1 + kappa Gamma_c)`; static curve only.
    pub det_i_pa_closed: Option<T>,
    /// Both pA* and qA* stable.
    pub stable: bool,
}

fn numeric_eigenvalues<T: Real>(m: &Mat2<T>) -> [Complex<T>; 2] {
    let f = m.map(|x| x.to_f64_lossy());
    let nm = Matrix2::new(f.m[0][0], f.m[0][1], f.m[1][0], f.m[1][1]);
    let ev = nm.complex_eigenvalues();
    let mut out = [ev[0], ev[1]];
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    out.map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
}

fn radius<T: Real>(ev: &[Complex<T>; 2]) -> T {
    ev[0].norm().max(ev[1].norm())
}

/// Eigenvalues of pA* and qA* from a numeric eigen-solve, and the persistence
/// threshold. The static curve's threshold is the closed form
/// `1/(1 + kappa Gamma_c)`; the hybrid one inverts the numeric spectral radius.
pub fn eigen_diagnostics<T: Real>(params: &StructuralParams<T>) -> EigenDiagnostics<T> {
    let a = regime_matrices(params, Regime::Elb).a;
    let pa = a.scale(&params.p);
    let qa = a.scale(&params.q);
    let eig_pa = numeric_eigenvalues(&pa);
    let eig_qa = numeric_eigenvalues(&qa);
    let rho_pa = radius(&eig_pa);
    let rho_qa = radius(&eig_qa);
    let (p_bar, det_i_pa_closed) = match params.nkpc {
        Nkpc::Static => (
            T::one() / (T::one() + params.kappa * params.gamma_c),
            Some(delta_elb(params, &params.p)),
        ),
        Nkpc::Hybrid => (T::one() / radius(&numeric_eigenvalues(&a)), None),
    };
    EigenDiagnostics {
        p_bar,
        det_i_pa: pa.i_minus_scaled(&T::one()).det(),
        det_i_qa: qa.i_minus_scaled(&T::one()).det(),
        stable: rho_pa < T::one() && rho_qa < T::one(),
        eig_pa,
        eig_qa,
        rho_pa,
        rho_qa,
        det_i_pa_closed,
    }
}

/// Medium-run loadings of (c, pi) on public capital, per unit of eps_g.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaReport<T> {
    pub regime: Regime,
    pub theta_ck: T,
    pub theta_pik: T,
    pub theta: T,
}

/// Loadings from `(I - qA)^{-1} B` with `B` taken per unit of eps_g, in the
/// requested regime.
pub fn theta_values<T: Scalar>(
    params: &StructuralParams<T>,
    regime: Regime,
) -> Result<ThetaReport<T>> {
    let m = regime_matrices(params, regime);
    let b_unit =
        m.a0.inverse()
            .expect("A0 is invertible")
            .mul_vec(&Vec2::new(
                T::zero(),
                -(params.kappa.clone() * (T::one() + params.eta.clone())),
            ));
    let inv =
        m.a.i_minus_scaled(&params.q)
            .inverse()
            .ok_or(match regime {
                Regime::Normal => Error::IndeterminateTerminal { regime: "normal" },
                Regime::Elb => Error::UnitEigenvalue {
                    which: "q",
                    r: params.q.to_f64_lossy(),
                },
            })?;
    let y = inv.mul_vec(&b_unit);
    Ok(ThetaReport {
        regime,
        theta: y.c.clone() + y.pi.clone(),
        theta_ck: y.c,
        theta_pik: y.pi,
    })
}

/// Impact responses of (c, pi, y) per unit of g.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactMultipliers<T> {
    pub dc1_dg: T,
    pub dpi1_dg: T,
    pub dy1_dg: T,
}

impl<T: Scalar> ImpactMultipliers<T> {
    fn from_c_pi(params: &StructuralParams<T>, dc: T, dpi: T) -> Self {
        Self {
            dy1_dg: params.s_c.clone() * dc.clone() + T::one(),
            dc1_dg: dc,
            dpi1_dg: dpi,
        }
    }
}

/// Normal-times sum coefficient `kappa (1+eta)(phi_pi - 1) / Delta_q`.
fn theta_normal<T: Scalar>(params: &StructuralParams<T>) -> T {
    params.kappa.clone() * (T::one() + params.eta.clone()) * (params.phi_pi.clone() - T::one())
        / delta_normal(params, &params.q)
}

fn theta_ck_normal<T: Scalar>(params: &StructuralParams<T>) -> T {
    params.kappa.clone()
        * (T::one() + params.eta.clone())
        * (params.phi_pi.clone() - params.q.clone())
        / delta_normal(params, &params.q)
}

/// Inside-the-trap sum coefficient `-kappa (1+eta) / det(I - qA*)`.
fn theta_elb<T: Scalar>(params: &StructuralParams<T>) -> T {
    -(params.kappa.clone() * (T::one() + params.eta.clone())) / delta_elb(params, &params.q)
}

/// Impact multipliers when the floor never binds.
pub fn impact_multiplier_normal<T: Scalar>(
    params: &StructuralParams<T>,
) -> Result<ImpactMultipliers<T>> {
    require_static(params, "impact_multiplier_normal")?;
    let k = params.kappa.clone();
    let capital = theta_normal(params) * params.delta_tilde.clone() * params.eps_g.clone();
    let waste = k.clone() * (params.phi_pi.clone() - params.p.clone()) * params.gamma_g.clone();
    let dc = (capital - waste) / delta_normal(params, &params.p);
    let dpi = k * (params.gamma_c.clone() * dc.clone() + params.gamma_g.clone());
    Ok(ImpactMultipliers::from_c_pi(params, dc, dpi))
}

/// Productivity of public capital above which investment crowds consumption in.
pub fn threshold_eps_i<T: Scalar>(params: &StructuralParams<T>) -> Result<T> {
    require_static(params, "threshold_eps_i")?;
    let one = T::one();
    Ok(
        (params.phi_pi.clone() - params.p.clone()) / (params.phi_pi.clone() - one.clone())
            * (params.gamma_g.clone() / (one + params.gamma_g.clone()))
            * delta_normal(params, &params.q)
            / params.delta_tilde.clone(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdvScenario {
    Normal,
    ShortTrap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdvReport<T> {
    pub scenario: PdvScenario,
    /// Discounted consumption response per unit of discounted spending.
    pub pdv_c: T,
    pub dc1_dg: T,
    pub dc2_dg: T,
    /// Normal times: eps_g above which the PDV multiplier is positive.
    pub eps_m: Option<T>,
    /// Short trap with `det(I - pA*) < 0`: whether the medium-run term can
    /// overturn the negative impact effect.
    pub dominance: Option<bool>,
    /// Root of the PDV multiplier in eps_g, reported when `dominance` holds.
    pub eps_mz: Option<T>,
}

pub fn pdv_multiplier<T: Scalar>(
    params: &StructuralParams<T>,
    scenario: PdvScenario,
) -> Result<PdvReport<T>> {
    require_static(params, "pdv_multiplier")?;
    let one = T::one();
    let (beta, p, q) = (params.beta.clone(), params.p.clone(), params.q.clone());
    let weight =
        beta.clone() * (one.clone() - p.clone()) / (one.clone() - beta.clone() * q.clone());
    // dc2/dg per unit eps_g.
    let c2_unit = theta_ck_normal(params) * params.delta_tilde.clone() / (one.clone() - p.clone());
    let dc2 = c2_unit.clone() * params.eps_g.clone();
    match scenario {
        PdvScenario::Normal => {
            let dc1 = impact_multiplier_normal(params)?.dc1_dg;
            let eps_i = threshold_eps_i(params)?;
            let phi = params.phi_pi.clone();
            let eps_m = eps_i
                / (one.clone()
                    + beta.clone() / (one.clone() - beta * q.clone()) * (phi.clone() - q)
                        / (phi - one)
                        * delta_normal(params, &p));
            Ok(PdvReport {
                scenario,
                pdv_c: dc1.clone() + weight * dc2.clone(),
                dc1_dg: dc1,
                dc2_dg: dc2,
                eps_m: Some(eps_m),
                dominance: None,
                eps_mz: None,
            })
        }
        PdvScenario::ShortTrap => {
            let dc1 = impact_multiplier_trap(params, Trap::Short)?.dc1_dg;
            let det = delta_elb(params, &p);
            let phi = params.phi_pi.clone();
            let dominance = if det < T::zero() {
                let lhs = params.beta.clone() * (phi.clone() - q.clone())
                    / (one.clone() - params.beta.clone() * q);
                let rhs = -(phi - one.clone()) / det.clone();
                Some(lhs > rhs && rhs > T::zero())
            } else {
                None
            };
            // pdv(eps) = slope * eps + intercept.
            let slope = theta_normal(params) * params.delta_tilde.clone() / det.clone()
                + weight.clone() * c2_unit;
            let intercept = p * params.kappa.clone() * params.gamma_g.clone() / det;
            let eps_mz = match dominance {
                Some(true) if !slope.is_zero() => Some(-intercept / slope),
                _ => None,
            };
            Ok(PdvReport {
                scenario,
                pdv_c: dc1.clone() + weight * dc2.clone(),
                dc1_dg: dc1,
                dc2_dg: dc2,
                eps_m: None,
                dominance,
                eps_mz,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trap {
    /// The floor binds while the shocks last and normal times resume after.
    Short,
    /// The floor binds throughout, including the medium run.
    Long,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapMultipliers<T> {
    pub trap: Trap,
    pub impact: ImpactMultipliers<T>,
    pub dc1_dg: T,
    pub dpi1_dg: T,
    /// Medium-run sum coefficient of whichever regime holds after the shocks.
    pub theta: T,
    /// Long trap: eps_g at which the consumption and inflation impacts change sign.
    pub eps_zc: Option<T>,
    pub eps_zpi: Option<T>,
}

pub fn impact_multiplier_trap<T: Scalar>(
    params: &StructuralParams<T>,
    trap: Trap,
) -> Result<TrapMultipliers<T>> {
    require_static(params, "impact_multiplier_trap")?;
    let one = T::one();
    let p = params.p.clone();
    let det_p = delta_elb(params, &p);
    let theta = match trap {
        Trap::Short => theta_normal(params),
        Trap::Long => {
            let det_q = delta_elb(params, &params.q);
            // Both pA* and qA* stable: eigenvalues are {0, r(1 + kappa Gamma_c)}.
            if det_p <= T::zero() || det_q <= T::zero() {
                let k = one.clone() + params.kappa.clone() * params.gamma_c.clone();
                return Err(Error::AssumptionViolated {
                    rho_p: (p.clone() * k.clone()).to_f64_lossy(),
                    rho_q: (params.q.clone() * k).to_f64_lossy(),
                });
            }
            theta_elb(params)
        }
    };
    let k = params.kappa.clone();
    let capital = theta.clone() * params.delta_tilde.clone() * params.eps_g.clone();
    let dc = (capital.clone() + p.clone() * k.clone() * params.gamma_g.clone()) / det_p.clone();
    let dpi = k.clone()
        * (params.gamma_c.clone() * capital + (one.clone() - p.clone()) * params.gamma_g.clone())
        / det_p;
    let (eps_zc, eps_zpi) = match trap {
        Trap::Short => (None, None),
        Trap::Long => {
            let unit = theta.clone() * params.delta_tilde.clone();
            (
                Some(-(p.clone() * k.clone() * params.gamma_g.clone()) / unit.clone()),
                Some(-((one - p) * params.gamma_g.clone()) / (params.gamma_c.clone() * unit)),
            )
        }
    };
    Ok(TrapMultipliers {
        trap,
        impact: ImpactMultipliers::from_c_pi(params, dc.clone(), dpi.clone()),
        dc1_dg: dc,
        dpi1_dg: dpi,
        theta,
        eps_zc,
        eps_zpi,
    })
}

/// Splits the impact loading into its waste, countdown-capital and
/// exit-capital parts by running the recursion on each source alone, after
/// checking that the guessed trap is an equilibrium.
pub fn decompose_multiplier<T: Scalar>(
    params: &StructuralParams<T>,
    l: usize,
    exit: ExitMode,
) -> Result<ImpactLoading<T>> {
    let xi = calibrate_xi(params, l, exit)?;
    solve_elb(params, l, T::zero(), xi, exit)?;
    loading_by_source(params, l, &BindingPattern::for_exit(l, exit))
}

/// Source-separated g-loading of state 1 under a fixed pattern, unchecked.
pub fn loading_by_source<T: Scalar>(
    params: &StructuralParams<T>,
    l: usize,
    pattern: &BindingPattern,
) -> Result<ImpactLoading<T>> {
    let spec = ChainSpec::new(params, l, T::one(), T::zero());
    let first = |s: Sources| solve_pattern(params, &spec, pattern, s).map(|y| y[0].clone());
    Ok(ImpactLoading {
        waste: first(Sources::WASTE)?,
        q_deter: first(Sources::CAPITAL_TRAP)?,
        q_exit: first(Sources::CAPITAL_EXIT)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds<T> {
    pub eps_i: Option<T>,
    pub eps_m: Option<T>,
    pub eps_mz: Option<T>,
    pub eps_zc: Option<T>,
    pub eps_zpi: Option<T>,
}

impl<T> Default for Thresholds<T> {
    fn default() -> Self {
        Self {
            eps_i: None,
            eps_m: None,
            eps_mz: None,
            eps_zc: None,
            eps_zpi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierReport<T> {
    pub scenario: Scenario,
    /// Countdown length; `None` for the long-trap limit.
    pub l: Option<usize>,
    pub exit: Option<ExitMode>,
    pub dc1_dg: T,
    pub dpi1_dg: T,
    pub dy1_dg: T,
    pub pdv_c: Option<T>,
    pub decomposition: Option<ImpactLoading<T>>,
    pub thresholds: Thresholds<T>,
    pub diagnostics: EigenDiagnostics<T>,
}

fn report_from_loading<T: Real>(
    params: &StructuralParams<T>,
    scenario: Scenario,
    l: Option<usize>,
    exit: Option<ExitMode>,
    loading: ImpactLoading<T>,
) -> MultiplierReport<T> {
    let total = loading.total();
    MultiplierReport {
        scenario,
        l,
        exit,
        dy1_dg: params.s_c * total.c + T::one(),
        dc1_dg: total.c,
        dpi1_dg: total.pi,
        pdv_c: None,
        decomposition: Some(loading),
        thresholds: Thresholds::default(),
        diagnostics: eigen_diagnostics(params),
    }
}

/// Multipliers for one scenario. Closed forms are used under the static
/// curve; the hybrid curve goes through the solver decomposition. `l` and
/// `exit` only matter for `FiniteL`.
pub fn multiplier_report<T: Real>(
    params: &StructuralParams<T>,
    scenario: Scenario,
    l: usize,
    exit: ExitMode,
) -> Result<MultiplierReport<T>> {
    let is_static = params.nkpc == Nkpc::Static;
    match scenario {
        Scenario::Normal => {
            let loading = decompose_multiplier(params, 0, ExitMode::Deterministic)?;
            let mut r = report_from_loading(params, scenario, Some(0), None, loading);
            if is_static {
                let m = impact_multiplier_normal(params)?;
                let pdv = pdv_multiplier(params, PdvScenario::Normal)?;
                r.dc1_dg = m.dc1_dg;
                r.dpi1_dg = m.dpi1_dg;
                r.dy1_dg = m.dy1_dg;
                r.pdv_c = Some(pdv.pdv_c);
                r.thresholds.eps_i = Some(threshold_eps_i(params)?);
                r.thresholds.eps_m = pdv.eps_m;
            }
            Ok(r)
        }
        Scenario::ShortTrap => {
            let loading = decompose_multiplier(params, 0, ExitMode::Stochastic)?;
            let mut r = report_from_loading(
                params,
                scenario,
                Some(0),
                Some(ExitMode::Stochastic),
                loading,
            );
            if is_static {
                let m = impact_multiplier_trap(params, Trap::Short)?;
                let pdv = pdv_multiplier(params, PdvScenario::ShortTrap)?;
                r.dc1_dg = m.dc1_dg;
                r.dpi1_dg = m.dpi1_dg;
                r.dy1_dg = m.impact.dy1_dg;
                r.pdv_c = Some(pdv.pdv_c);
                r.thresholds.eps_mz = pdv.eps_mz;
            }
            Ok(r)
        }
        Scenario::LongTrap => {
            let limit = q_limit(params)?;
            let z = regime_matrices(params, Regime::Elb);
            let waste =
                z.a.i_minus_scaled(&params.p)
                    .inverse()
                    .ok_or(Error::UnitEigenvalue {
                        which: "p",
                        r: params.p.to_f64_lossy(),
                    })?
                    .mul_vec(&z.c_g);
            let loading = ImpactLoading {
                waste,
                q_deter: limit,
                q_exit: Vec2::zero(),
            };
            let mut r = report_from_loading(params, scenario, None, None, loading);
            if is_static {
                let m = impact_multiplier_trap(params, Trap::Long)?;
                r.dc1_dg = m.dc1_dg;
                r.dpi1_dg = m.dpi1_dg;
                r.dy1_dg = m.impact.dy1_dg;
                r.thresholds.eps_zc = m.eps_zc;
                r.thresholds.eps_zpi = m.eps_zpi;
            }
            Ok(r)
        }
        Scenario::FiniteL => {
            let loading = decompose_multiplier(params, l, exit)?;
            Ok(report_from_loading(
                params,
                scenario,
                Some(l),
                Some(exit),
                loading,
            ))
        }
    }
}

/// One finite-L report per countdown length, solved in parallel and returned
/// in ascending order of L.
pub fn sweep_l<T: Real>(
    params: &StructuralParams<T>,
    l_range: RangeInclusive<usize>,
    exit: ExitMode,
) -> Result<Vec<MultiplierReport<T>>> {
    l_range
        .into_par_iter()
        .map(|l| multiplier_report(params, Scenario::FiniteL, l, exit))
        .collect()
}
