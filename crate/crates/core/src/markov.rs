//! The (L+3)-state Markov chain shared by every model variable.
//!
//! States 1..=L are a perfect-foresight countdown, state L+1 is the last
//! state in which both shocks are alive (left with probability 1-p), state
//! L+2 carries the decaying public capital (left with probability 1-q) and
//! state L+3 is the absorbing steady state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::StructuralParams;
use crate::scalar::Scalar;
use crate::solver::EquilibriumSolution;

/// Below this gap between q and p the capital weights use the `n p^(n-1)` limit.
pub const DEGENERATE_PQ: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec<T> {
    pub l: usize,
    pub p: T,
    pub q: T,
    /// Dense row-stochastic matrix, `transition[i][j] = P(i -> j)`.
    pub transition: Vec<Vec<T>>,
    pub initial: Vec<T>,
    pub g_states: Vec<T>,
    pub xi_states: Vec<T>,
    pub k_states: Vec<T>,
    pub g1: T,
    pub xi1: T,
}

pub fn build_transition<T: Scalar>(l: usize, p: &T, q: &T) -> Vec<Vec<T>> {
    let n = l + 3;
    let mut m = vec![vec![T::zero(); n]; n];
    for (i, row) in m.iter_mut().enumerate().take(l) {
        row[i + 1] = T::one();
    }
    m[l][l] = p.clone();
    m[l][l + 1] = T::one() - p.clone();
    m[l + 1][l + 1] = q.clone();
    m[l + 1][l + 2] = T::one() - q.clone();
    m[l + 2][l + 2] = T::one();
    m
}

/// AR(1) shock states: `z1 p^(l-1)` for l = 1..=L+1, then zeros.
pub fn exogenous_states<T: Scalar>(l: usize, p: &T, z1: &T) -> Vec<T> {
    let mut v = Vec::with_capacity(l + 3);
    let mut z = z1.clone();
    for _ in 0..=l {
        v.push(z.clone());
        z = z * p.clone();
    }
    v.push(T::zero());
    v.push(T::zero());
    v
}

/// `(q^n - p^n)/(q - p)`, the weight on `k_2` in the ARMA(2,1) capital path.
pub fn arma_weight<T: Scalar>(p: &T, q: &T, n: usize) -> T {
    if n == 0 {
        return T::zero();
    }
    let gap = q.clone() - p.clone();
    if gap.abs().to_f64_lossy() <= DEGENERATE_PQ {
        T::from_usize_lossless(n) * p.powu(n - 1)
    } else {
        (q.powu(n) - p.powu(n)) / gap
    }
}

/// Capital states for a unit-free investment impulse `g1`: zero on impact
/// (one period to build), the ARMA weights along the countdown, the
/// `q`-decaying stock in state L+2 and zero in the absorbing state.
pub fn capital_states<T: Scalar>(l: usize, p: &T, q: &T, delta_tilde: &T, g1: &T) -> Vec<T> {
    let k2 = delta_tilde.clone() * g1.clone();
    let mut v = Vec::with_capacity(l + 3);
    for ell in 1..=l + 1 {
        v.push(arma_weight(p, q, ell - 1) * k2.clone());
    }
    v.push(k2 * q.powu(l) / (T::one() - p.clone()));
    v.push(T::zero());
    v
}

impl<T: Scalar> ChainSpec<T> {
    pub fn new(params: &StructuralParams<T>, l: usize, g1: T, xi1: T) -> Self {
        let (p, q) = (&params.p, &params.q);
        Self {
            l,
            transition: build_transition(l, p, q),
            initial: unit_row(l + 3),
            g_states: exogenous_states(l, p, &g1),
            xi_states: exogenous_states(l, p, &xi1),
            k_states: capital_states(l, p, q, &params.delta_tilde, &g1),
            p: p.clone(),
            q: q.clone(),
            g1,
            xi1,
        }
    }

    pub fn n_states(&self) -> usize {
        self.l + 3
    }

    /// Row vector `dist * P`.
    pub fn step(&self, dist: &[T]) -> Vec<T> {
        let n = self.n_states();
        let mut out = vec![T::zero(); n];
        for (i, w) in dist.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (j, pij) in self.transition[i].iter().enumerate() {
                if !pij.is_zero() {
                    out[j] = out[j].clone() + w.clone() * pij.clone();
                }
            }
        }
        out
    }

    /// `u P^n` for n = 0..=horizon.
    pub fn distributions(&self, horizon: usize) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(self.initial.clone());
        for n in 0..horizon {
            let next = self.step(&out[n]);
            out.push(next);
        }
        out
    }

    pub fn distribution(&self, n: usize) -> Vec<T> {
        let mut d = self.initial.clone();
        for _ in 0..n {
            d = self.step(&d);
        }
        d
    }
}

fn unit_row<T: Scalar>(n: usize) -> Vec<T> {
    let mut u = vec![T::zero(); n];
    u[0] = T::one();
    u
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// `u P^n x`: the date-1 expectation of the chain `x` n periods ahead.
pub fn expectation<T: Scalar>(spec: &ChainSpec<T>, states: &[T], n: usize) -> Result<T> {
    if states.len() != spec.n_states() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_states(),
            found: states.len(),
        });
    }
    Ok(dot(&spec.distribution(n), states))
}

/// Expected paths of every variable, horizon 0 being the impact period.
/// All entries are deviations from steady state; `r` is the expected value of
/// `max(ln beta, phi_pi * pi)` taken state by state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrfPath<T> {
    pub horizon: Vec<usize>,
    pub c: Vec<T>,
    pub pi: Vec<T>,
    pub r: Vec<T>,
    pub y: Vec<T>,
    pub g: Vec<T>,
    pub xi: Vec<T>,
    pub k: Vec<T>,
}

pub fn irf<T: Scalar>(solution: &EquilibriumSolution<T>, horizon: usize) -> IrfPath<T> {
    let spec = &solution.spec;
    let params = &solution.params;
    let c_states: Vec<T> = solution.states.iter().map(|y| y.c.clone()).collect();
    let pi_states: Vec<T> = solution.states.iter().map(|y| y.pi.clone()).collect();
    let r_states: Vec<T> = pi_states
        .iter()
        .map(|pi| (params.phi_pi.clone() * pi.clone()).max_of(params.log_beta.clone()))
        .collect();
    let mut path = IrfPath {
        horizon: (0..=horizon).collect(),
        c: Vec::new(),
        pi: Vec::new(),
        r: Vec::new(),
        y: Vec::new(),
        g: Vec::new(),
        xi: Vec::new(),
        k: Vec::new(),
    };
    for dist in spec.distributions(horizon) {
        let c = dot(&dist, &c_states);
        let g = dot(&dist, &spec.g_states);
        path.y.push(params.s_c.clone() * c.clone() + g.clone());
        path.c.push(c);
        path.g.push(g);
        path.pi.push(dot(&dist, &pi_states));
        path.r.push(dot(&dist, &r_states));
        path.xi.push(dot(&dist, &spec.xi_states));
        path.k.push(dot(&dist, &spec.k_states));
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn transition_small_cases() {
        let m = build_transition(0, &0.7, &0.95);
        assert_eq!(
            m,
            vec![
                vec![0.7, 0.30000000000000004, 0.0],
                vec![0.0, 0.95, 0.050000000000000044],
                vec![0.0, 0.0, 1.0]
            ]
        );
        let m = build_transition(1, &0.7, &0.95);
        assert_eq!(m.len(), 4);
        assert_eq!(m[0], vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn exogenous_examples() {
        assert_eq!(exogenous_states(0, &0.7, &1.0), vec![1.0, 0.0, 0.0]);
        let v: Vec<f64> = exogenous_states(2, &0.7, &1.0);
        assert_eq!(v.len(), 5);
        assert!((v[2] - 0.49).abs() < 1e-15 && v[3] == 0.0 && v[4] == 0.0);
    }

    #[test]
    fn capital_l0_and_degenerate_limit() {
        let k: Vec<f64> = capital_states(0, &0.7, &0.95, &0.25, &1.0);
        assert_eq!(k[0], 0.0);
        assert!((k[1] - 0.25 / 0.3).abs() < 1e-15);
        assert_eq!(k[2], 0.0);
        let exact: f64 = arma_weight(&0.7, &0.7, 5);
        assert!((exact - 5.0 * 0.7f64.powi(4)).abs() < 1e-15);
        let near: f64 = arma_weight(&0.7, &(0.7 + 1e-7), 5);
        assert!((near - exact).abs() < 1e-6);
    }

    #[test]
    fn expectation_dimension_check() {
        let p = crate::model::derive_composites(&crate::model::ParamSet::baseline()).unwrap();
        let spec = ChainSpec::new(&p, 2, 1.0, 0.0);
        assert!(matches!(
            expectation(&spec, &[1.0, 2.0], 0),
            Err(Error::DimensionMismatch {
                expected: 5,
                found: 2
            })
        ));
        assert_eq!(expectation(&spec, &spec.g_states, 0).unwrap(), 1.0);
    }

    #[test]
    fn rational_rows_sum_to_one_exactly() {
        let p = BigRational::lit(0.7);
        let q = BigRational::lit(0.95);
        for row in build_transition(4, &p, &q) {
            let s = row.into_iter().fold(BigRational::lit(0.0), |a, b| a + b);
            assert_eq!(s, BigRational::lit(1.0));
        }
    }
}
