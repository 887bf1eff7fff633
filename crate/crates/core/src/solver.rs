//! Backward induction over the Markov states with a guessed ELB pattern,
//! followed by verification of the guess.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::markov::{arma_weight, ChainSpec, DEGENERATE_PQ};
use crate::model::{regime_matrices, Regime, RegimeMatrices, StructuralParams};
use crate::scalar::{Real, Scalar};

/// Margins smaller than this (relative to `max(1, |pi|)`) count as zero.
pub const BINDING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExitMode {
    /// The trap ends with probability 1-p each period after the countdown.
    Stochastic,
    /// The trap ends at a known date.
    Deterministic,
}

impl ExitMode {
    pub fn name(self) -> &'static str {
        match self {
            ExitMode::Stochastic => "stochastic",
            ExitMode::Deterministic => "deterministic",
        }
    }
}

impl std::str::FromStr for ExitMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "stochastic" => Ok(ExitMode::Stochastic),
            "deterministic" => Ok(ExitMode::Deterministic),
            other => Err(format!(
                "exit must be `stochastic` or `deterministic`, got `{other}`"
            )),
        }
    }
}

/// Which regime each non-absorbing state is in: `true` means the rate is at
/// the floor. Entry `i` is state `i + 1`; there are `L + 2` entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BindingPattern(pub Vec<bool>);

impl BindingPattern {
    /// The guess for a trap of `L` countdown periods.
    pub fn for_exit(l: usize, exit: ExitMode) -> Self {
        let binding = match exit {
            ExitMode::Stochastic => l + 1,
            ExitMode::Deterministic => l,
        };
        Self((0..l + 2).map(|i| i < binding).collect())
    }

    pub fn normal(l: usize) -> Self {
        Self(vec![false; l + 2])
    }

    /// Single-countdown chain with the floor binding in both live states:
    /// the shape of a trap that lasts as long as the capital shock itself.
    pub fn long_trap() -> Self {
        Self(vec![true, true])
    }

    /// The countdown length `L` this pattern is shaped for.
    pub fn chain_len(&self) -> usize {
        self.0.len() - 2
    }

    pub fn binding_count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }
}

/// Selects which inhomogeneous terms enter the recursion. Because the solution
/// is linear in these terms, running it on a subset isolates each component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sources {
    pub g: bool,
    /// Capital in the countdown states 1..=L.
    pub k_trap: bool,
    /// Capital in states L+1 and L+2.
    pub k_exit: bool,
    pub xi: bool,
    pub constant: bool,
}

impl Sources {
    pub const ALL: Self = Self {
        g: true,
        k_trap: true,
        k_exit: true,
        xi: true,
        constant: true,
    };
    pub const NONE: Self = Self {
        g: false,
        k_trap: false,
        k_exit: false,
        xi: false,
        constant: false,
    };
    pub const POLICY: Self = Self {
        g: true,
        k_trap: true,
        k_exit: true,
        ..Self::NONE
    };
    pub const WASTE: Self = Self {
        g: true,
        ..Self::NONE
    };
    pub const CAPITAL_TRAP: Self = Self {
        k_trap: true,
        ..Self::NONE
    };
    pub const CAPITAL_EXIT: Self = Self {
        k_exit: true,
        ..Self::NONE
    };
    pub const DEMAND: Self = Self {
        xi: true,
        ..Self::NONE
    };
    pub const CONSTANT: Self = Self {
        constant: true,
        ..Self::NONE
    };
    pub const POLICY_AND_CONSTANT: Self = Self {
        constant: true,
        ..Self::POLICY
    };
}

fn near_singular<T: Scalar>(m: &Mat2<T>) -> Option<Mat2<T>> {
    let det = m.det().abs().to_f64_lossy();
    let scale = m.max_abs().to_f64_lossy().max(1.0);
    if det <= 1e-14 * scale * scale {
        return None;
    }
    m.inverse()
}

fn self_loop_inverse<T: Scalar>(
    mats: &RegimeMatrices<T>,
    weight: &T,
    which: &'static str,
) -> Result<Mat2<T>> {
    near_singular(&mats.a.i_minus_scaled(weight)).ok_or_else(|| match (mats.regime, which) {
        (Regime::Normal, "q") => Error::IndeterminateTerminal { regime: "normal" },
        _ => Error::UnitEigenvalue {
            which,
            r: weight.to_f64_lossy(),
        },
    })
}

/// Solves every Markov state of the forward-looking block for a given
/// pattern and source selection. Returns `L + 3` vectors, the last zero.
pub fn solve_pattern<T: Scalar>(
    params: &StructuralParams<T>,
    spec: &ChainSpec<T>,
    pattern: &BindingPattern,
    sources: Sources,
) -> Result<Vec<Vec2<T>>> {
    let l = spec.l;
    if pattern.0.len() != l + 2 {
        return Err(Error::DimensionMismatch {
            expected: l + 2,
            found: pattern.0.len(),
        });
    }
    let normal = regime_matrices(params, Regime::Normal);
    let elb = regime_matrices(params, Regime::Elb);
    let n = spec.n_states();
    let mut y = vec![Vec2::zero(); n];
    for i in (0..l + 2).rev() {
        let mats = if pattern.0[i] { &elb } else { &normal };
        let mut rhs = Vec2::zero();
        for j in i + 1..n {
            let pij = &spec.transition[i][j];
            if !pij.is_zero() {
                rhs = rhs + y[j].scale(pij);
            }
        }
        rhs = mats.a.mul_vec(&rhs);
        let k_on = if i < l {
            sources.k_trap
        } else {
            sources.k_exit
        };
        if k_on {
            rhs = rhs + mats.b.scale(&spec.k_states[i]);
        }
        if sources.g {
            rhs = rhs + mats.c_g.scale(&spec.g_states[i]);
        }
        if sources.xi {
            rhs = rhs + mats.c_xi.scale(&spec.xi_states[i]);
        }
        if sources.constant {
            rhs = rhs + mats.e_red.clone();
        }
        let own = &spec.transition[i][i];
        y[i] = if own.is_zero() {
            rhs
        } else {
            let which = if i == l { "p" } else { "q" };
            self_loop_inverse(mats, own, which)?.mul_vec(&rhs)
        };
    }
    Ok(y)
}

/// Normal-regime block reached after the shocks have died out:
/// `Y_{L+2} = (I - qA)^{-1} B k_{L+2}`.
pub fn solve_terminal<T: Scalar>(params: &StructuralParams<T>, k_l2: &T) -> Result<Vec2<T>> {
    let m = regime_matrices(params, Regime::Normal);
    let inv = self_loop_inverse(&m, &params.q, "q")?;
    Ok(inv.mul_vec(&m.b.scale(k_l2)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution<T> {
    pub params: StructuralParams<T>,
    pub spec: ChainSpec<T>,
    /// Consumption and inflation in each of the `L + 3` states.
    pub states: Vec<Vec2<T>>,
    pub xi1: T,
    pub g1: T,
    /// Number of periods the floor binds in expectation.
    pub trap_length: usize,
    pub exit_mode: ExitMode,
    /// Per-state floor indicator, `L + 3` entries (the absorbing state never binds).
    pub binding: Vec<bool>,
}

impl<T: Scalar> EquilibriumSolution<T> {
    pub fn l(&self) -> usize {
        self.spec.l
    }

    pub fn pattern(&self) -> BindingPattern {
        BindingPattern(self.binding[..self.binding.len() - 1].to_vec())
    }
}

/// Index (0-based) of the state whose inflation is pinned to the floor by
/// the xi1 calibration, or `None` when no state binds.
fn marginal_state(l: usize, exit: ExitMode) -> Option<usize> {
    match exit {
        ExitMode::Stochastic => Some(l),
        ExitMode::Deterministic => l.checked_sub(1),
    }
}

/// Demand shock that makes the floor bind for exactly the guessed duration,
/// with the policy shock set to zero.
pub fn calibrate_xi<T: Scalar>(
    params: &StructuralParams<T>,
    l: usize,
    exit: ExitMode,
) -> Result<T> {
    calibrate_xi_at(params, l, exit, T::zero())
}

/// As [`calibrate_xi`] but holding the policy shock at `g1`, so the marginal
/// state sits exactly on the floor in the solved equilibrium.
///
/// Stochastic exit pins inflation in state L+1; deterministic exit pins state
/// L, the lowest xi1 for which the floor binds through the whole countdown.
/// A deterministic trap of length zero is normal times: xi1 = 0.
pub fn calibrate_xi_at<T: Scalar>(
    params: &StructuralParams<T>,
    l: usize,
    exit: ExitMode,
    g1: T,
) -> Result<T> {
    let Some(m) = marginal_state(l, exit) else {
        return Ok(T::zero());
    };
    let pattern = BindingPattern::for_exit(l, exit);
    // The two pieces are solved separately: subtracting two full solves loses
    // every digit when the constant dwarfs the demand loading.
    let unit = ChainSpec::new(params, l, T::zero(), T::one());
    let slope = solve_pattern(params, &unit, &pattern, Sources::DEMAND)?[m]
        .pi
        .clone();
    if slope.is_zero() {
        return Err(Error::DegenerateCalibration { state: m + 1 });
    }
    let base = ChainSpec::new(params, l, g1, T::zero());
    let intercept = solve_pattern(params, &base, &pattern, Sources::POLICY_AND_CONSTANT)?[m]
        .pi
        .clone();
    Ok((params.pi_floor() - intercept) / slope)
}

/// Solves under an explicit pattern without checking it.
pub fn solve_unchecked<T: Scalar>(
    params: &StructuralParams<T>,
    l: usize,
    g1: T,
    xi1: T,
    pattern: &BindingPattern,
    exit: ExitMode,
) -> Result<EquilibriumSolution<T>> {
    let spec = ChainSpec::new(params, l, g1.clone(), xi1.clone());
    let states = solve_pattern(params, &spec, pattern, Sources::ALL)?;
    let mut binding = pattern.0.clone();
    binding.push(false);
    Ok(EquilibriumSolution {
        params: params.clone(),
        spec,
        states,
        xi1,
        g1,
        trap_length: pattern.binding_count(),
        exit_mode: exit,
        binding,
    })
}

/// Guess-and-verify solve for a trap of `L` countdown periods.
pub fn solve_elb<T: Scalar>(
    params: &StructuralParams<T>,
    l: usize,
    g1: T,
    xi1: T,
    exit: ExitMode,
) -> Result<EquilibriumSolution<T>> {
    let pattern = BindingPattern::for_exit(l, exit);
    let sol = solve_unchecked(params, l, g1, xi1, &pattern, exit)?;
    let report = verify_binding(&sol);
    if let Some(&state) = report.violations.first() {
        return Err(Error::BindingViolation {
            state,
            margin: report.margins[state - 1].to_f64_lossy(),
        });
    }
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingReport<T> {
    /// `pi_l - ln(beta)/phi_pi` for states 1..=L+2: non-positive where the
    /// floor binds, non-negative elsewhere.
    pub margins: Vec<T>,
    pub binding: Vec<bool>,
    /// 1-based indices of states whose margin has the wrong sign.
    pub violations: Vec<usize>,
    /// Margin of the last binding state.
    pub boundary_margin: Option<T>,
}

impl<T> BindingReport<T> {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_binding<T: Scalar>(solution: &EquilibriumSolution<T>) -> BindingReport<T> {
    let floor = solution.params.pi_floor();
    let live = solution.states.len() - 1;
    let mut margins = Vec::with_capacity(live);
    let mut violations = Vec::new();
    for (i, y) in solution.states[..live].iter().enumerate() {
        let margin = y.pi.clone() - floor.clone();
        let tol = BINDING_TOL * y.pi.abs().to_f64_lossy().max(1.0);
        let m = margin.to_f64_lossy();
        let bad = if solution.binding[i] {
            m > tol
        } else {
            m < -tol
        };
        if bad {
            violations.push(i + 1);
        }
        margins.push(margin);
    }
    let boundary_margin = solution.binding[..live]
        .iter()
        .rposition(|b| *b)
        .map(|i| margins[i].clone());
    BindingReport {
        margins,
        binding: solution.binding.clone(),
        violations,
        boundary_margin,
    }
}

/// Impact loading of (c1, pi1) on g1, split into the part that would be
/// there with unproductive spending, the capital built during the countdown,
/// and the capital carried into the exit states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactLoading<T> {
    pub waste: Vec2<T>,
    pub q_deter: Vec2<T>,
    pub q_exit: Vec2<T>,
}

impl<T: Scalar> ImpactLoading<T> {
    pub fn capital(&self) -> Vec2<T> {
        self.q_deter.clone() + self.q_exit.clone()
    }

    pub fn total(&self) -> Vec2<T> {
        self.waste.clone() + self.capital()
    }
}

fn inverse_or<T: Scalar>(m: Mat2<T>, err: impl FnOnce() -> Error) -> Result<Mat2<T>> {
    near_singular(&m).ok_or_else(err)
}

/// `sum_{i<L} (r A*)^i = (I - (rA*)^L)(I - rA*)^{-1}`.
fn geometric<T: Scalar>(a: &Mat2<T>, r: &T, l: usize, which: &'static str) -> Result<Mat2<T>> {
    if l == 0 {
        return Ok(Mat2::zero());
    }
    let ra = a.scale(r);
    let inv = inverse_or(Mat2::identity() - ra.clone(), || Error::UnitEigenvalue {
        which,
        r: r.to_f64_lossy(),
    })?;
    Ok(&(Mat2::identity() - ra.pow(l)) * &inv)
}

/// Closed-form g-loading of the impact response.
pub fn impact_closed_form<T: Scalar>(
    params: &StructuralParams<T>,
    l: usize,
    exit: ExitMode,
) -> Result<ImpactLoading<T>> {
    let n = regime_matrices(params, Regime::Normal);
    let z = regime_matrices(params, Regime::Elb);
    let (p, q, dt) = (&params.p, &params.q, &params.delta_tilde);

    let terminal = inverse_or(n.a.i_minus_scaled(q), || Error::IndeterminateTerminal {
        regime: "normal",
    })?;
    let a_l = z.a.pow(l);

    // Capital built during the countdown: sum_{i<L} f(i) (A*)^i B* dt.
    let deter_mat = if (q.clone() - p.clone()).abs().to_f64_lossy() > DEGENERATE_PQ {
        let sq = geometric(&z.a, q, l, "q")?;
        let sp = geometric(&z.a, p, l, "p")?;
        (sq - sp).scale(&(T::one() / (q.clone() - p.clone())))
    } else {
        let mut acc = Mat2::zero();
        let mut power = Mat2::identity();
        for i in 0..l {
            acc = acc + power.scale(&arma_weight(p, q, i));
            power = &power * &z.a;
        }
        acc
    };
    let q_deter = deter_mat.mul_vec(&z.b.scale(dt));

    // State L+1 is at the floor under a stochastic exit and in normal times
    // under a deterministic one.
    let exit_mats = match exit {
        ExitMode::Stochastic => &z,
        ExitMode::Deterministic => &n,
    };
    let exit_inv = inverse_or(exit_mats.a.i_minus_scaled(p), || Error::UnitEigenvalue {
        which: "p",
        r: p.to_f64_lossy(),
    })?;
    let carried = exit_mats
        .a
        .mul_vec(&terminal.mul_vec(&n.b.scale(&(dt.clone() * q.powu(l)))));
    let built = exit_mats.b.scale(&(arma_weight(p, q, l) * dt.clone()));
    let q_exit = a_l.mul_vec(&exit_inv.mul_vec(&(carried + built)));

    let waste = match exit {
        ExitMode::Stochastic => exit_inv.mul_vec(&z.c_g),
        ExitMode::Deterministic => {
            let sp = geometric(&z.a, p, l, "p")?;
            sp.mul_vec(&z.c_g) + a_l.mul_vec(&exit_inv.mul_vec(&n.c_g.scale(&p.powu(l))))
        }
    };
    Ok(ImpactLoading {
        waste,
        q_deter,
        q_exit,
    })
}

/// Limit of the capital loading as the countdown grows without bound:
/// `(I - pA*)^{-1} A* (I - qA*)^{-1} B* dt`. Requires both pA* and qA* stable.
pub fn q_limit<T: Real>(params: &StructuralParams<T>) -> Result<Vec2<T>> {
    let z = regime_matrices(params, Regime::Elb);
    let rho_p = z.a.scale(&params.p).spectral_radius();
    let rho_q = z.a.scale(&params.q).spectral_radius();
    if rho_p >= T::one() || rho_q >= T::one() {
        return Err(Error::AssumptionViolated {
            rho_p: rho_p.to_f64_lossy(),
            rho_q: rho_q.to_f64_lossy(),
        });
    }
    let ip = z.a.i_minus_scaled(&params.p).inverse().expect("stable pA*");
    let iq = z.a.i_minus_scaled(&params.q).inverse().expect("stable qA*");
    let m = &(&ip * &z.a) * &iq;
    Ok(m.mul_vec(&z.b.scale(&params.delta_tilde)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_composites, ParamSet};

    fn base() -> StructuralParams<f64> {
        derive_composites(&ParamSet::baseline()).unwrap()
    }

    #[test]
    fn patterns() {
        assert_eq!(
            BindingPattern::for_exit(2, ExitMode::Stochastic).0,
            vec![true, true, true, false]
        );
        assert_eq!(
            BindingPattern::for_exit(2, ExitMode::Deterministic).0,
            vec![true, true, false, false]
        );
        assert_eq!(BindingPattern::long_trap().chain_len(), 0);
    }

    #[test]
    fn terminal_is_zero_without_capital_productivity() {
        let p = derive_composites(&ParamSet {
            eps_g: 0.0,
            ..ParamSet::baseline()
        })
        .unwrap();
        assert_eq!(solve_terminal(&p, &1.0).unwrap(), Vec2::zero());
    }

    #[test]
    fn calibrated_stochastic_trap_is_marginal() {
        let p = base();
        for l in [0, 1, 5, 20] {
            let xi = calibrate_xi(&p, l, ExitMode::Stochastic).unwrap();
            let sol = solve_elb(&p, l, 0.0, xi, ExitMode::Stochastic).unwrap();
            let gap = sol.states[l].pi - p.pi_floor();
            assert!(gap.abs() < 1e-12, "L={l}: {gap}");
            assert_eq!(sol.trap_length, l + 1);
            assert!(xi * p.p.powi(l as i32) > -p.log_beta);
        }
    }

    #[test]
    fn deterministic_zero_length_is_normal_times() {
        let p = base();
        assert_eq!(calibrate_xi(&p, 0, ExitMode::Deterministic).unwrap(), 0.0);
        let sol = solve_elb(&p, 0, 0.01, 0.0, ExitMode::Deterministic).unwrap();
        assert!(sol.binding.iter().all(|b| !b));
    }

    #[test]
    fn wrong_guess_is_rejected() {
        let p = base();
        let xi = calibrate_xi(&p, 5, ExitMode::Stochastic).unwrap();
        match solve_elb(&p, 5, 0.0, 0.5 * xi, ExitMode::Stochastic) {
            Err(Error::BindingViolation { state, .. }) => assert!(state >= 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn q_limit_requires_stability() {
        let p = base();
        assert!(matches!(q_limit(&p), Err(Error::AssumptionViolated { .. })));
    }
}
