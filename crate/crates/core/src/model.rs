//! Structural parameters, steady state and the log-linear regime matrices.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::scalar::{Real, Scalar};

/// Phillips curve variant: inflation depends on marginal cost only, or also
/// on expected inflation with weight beta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Nkpc {
    Static,
    Hybrid,
}

impl FromStr for Nkpc {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "static" => Ok(Nkpc::Static),
            "hybrid" => Ok(Nkpc::Hybrid),
            other => Err(format!("nkpc must be `static` or `hybrid`, got `{other}`")),
        }
    }
}

impl fmt::Display for Nkpc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nkpc::Static => "static",
            Nkpc::Hybrid => "hybrid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Normal,
    Elb,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Normal => "normal",
            Regime::Elb => "elb",
        }
    }
}

/// Deep parameters as read from a config file. `kappa` may be left out when
/// both `psi` and `nu` are given.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet<T> {
    pub beta: T,
    pub kappa: Option<T>,
    pub eta: T,
    pub phi_pi: T,
    pub delta: T,
    pub s_c: T,
    pub eps_g: T,
    pub p: T,
    pub nkpc: Nkpc,
    pub psi: Option<T>,
    pub nu: Option<T>,
}

impl ParamSet<f64> {
    /// Baseline calibration: beta=0.99, kappa=0.1, eta=0.01, phi_pi=1.5,
    /// q=0.95, p=0.7, with s_c=0.8 and eps_g=0.1.
    pub fn baseline() -> Self {
        Self {
            beta: 0.99,
            kappa: Some(0.1),
            eta: 0.01,
            phi_pi: 1.5,
            delta: 0.05,
            s_c: 0.8,
            eps_g: 0.1,
            p: 0.7,
            nkpc: Nkpc::Static,
            psi: None,
            nu: None,
        }
    }
}

impl<T: Scalar> ParamSet<T> {
    pub fn cast<U: Scalar>(&self) -> ParamSet<U> {
        let c = |x: &T| U::lit(x.to_f64_lossy());
        ParamSet {
            beta: c(&self.beta),
            kappa: self.kappa.as_ref().map(c),
            eta: c(&self.eta),
            phi_pi: c(&self.phi_pi),
            delta: c(&self.delta),
            s_c: c(&self.s_c),
            eps_g: c(&self.eps_g),
            p: c(&self.p),
            nkpc: self.nkpc,
            psi: self.psi.as_ref().map(c),
            nu: self.nu.as_ref().map(c),
        }
    }
}

/// Deep parameters plus every derived composite used by the linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralParams<T> {
    pub beta: T,
    pub kappa: T,
    pub eta: T,
    pub phi_pi: T,
    pub delta: T,
    pub s_c: T,
    pub eps_g: T,
    pub p: T,
    pub nkpc: Nkpc,
    pub psi: Option<T>,
    pub nu: Option<T>,
    /// Capital persistence `1 - delta`.
    pub q: T,
    /// `delta / (1 - s_c)`: capital built per unit of government investment,
    /// in deviations from steady state.
    pub delta_tilde: T,
    pub gamma_c: T,
    pub gamma_g: T,
    pub gamma_k: T,
    /// `ln(beta)`, the floor on the nominal rate in deviation units. For
    /// rational scalars this is the exact value of the `f64` logarithm.
    pub log_beta: T,
    /// Labor disutility weight giving `N = 1/3` in steady state.
    pub chi: f64,
}

fn check<T: Scalar>(field: &'static str, bound: &'static str, x: &T, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            bound,
            value: x.to_f64_lossy(),
        })
    }
}

fn in_unit<T: Scalar>(x: &T) -> bool {
    *x > T::zero() && *x < T::one()
}

/// Validates the deep parameters and fills in the derived composites.
pub fn derive_composites<T: Scalar>(raw: &ParamSet<T>) -> Result<StructuralParams<T>> {
    let zero = T::zero();
    let one = T::one();
    check("beta", "0 < beta < 1", &raw.beta, in_unit(&raw.beta))?;
    check("delta", "0 < delta < 1", &raw.delta, in_unit(&raw.delta))?;
    check("s_c", "0 < s_c < 1", &raw.s_c, in_unit(&raw.s_c))?;
    check("p", "0 < p < 1", &raw.p, in_unit(&raw.p))?;
    check(
        "eps_g",
        "0 <= eps_g < 1",
        &raw.eps_g,
        raw.eps_g >= zero && raw.eps_g < one,
    )?;
    check("phi_pi", "phi_pi > 1", &raw.phi_pi, raw.phi_pi > one)?;
    check("eta", "eta >= 0", &raw.eta, raw.eta >= zero)?;
    if let Some(psi) = &raw.psi {
        check("psi", "psi > 0", psi, *psi > zero)?;
    }
    if let Some(nu) = &raw.nu {
        check("nu", "nu > 0", nu, *nu > zero)?;
    }
    let kappa = match (&raw.kappa, &raw.psi, &raw.nu) {
        (Some(k), _, _) => k.clone(),
        (None, Some(psi), Some(nu)) => psi.clone() / nu.clone(),
        (None, _, _) => return Err(Error::MissingKey("kappa")),
    };
    check("kappa", "kappa > 0", &kappa, kappa > zero)?;

    let q = one.clone() - raw.delta.clone();
    check("q", "0 < q = 1 - delta < 1", &q, in_unit(&q))?;
    let delta_tilde = raw.delta.clone() / (one.clone() - raw.s_c.clone());
    let gamma_c = one.clone() + raw.eta.clone() * raw.s_c.clone();
    let gamma_g = raw.eta.clone();
    let gamma_k = (one + raw.eta.clone()) * raw.eps_g.clone();
    let log_beta = T::lit(raw.beta.to_f64_lossy().ln());
    let chi = 3f64.powf(1.0 + raw.eta.to_f64_lossy()) / raw.s_c.to_f64_lossy();

    Ok(StructuralParams {
        beta: raw.beta.clone(),
        kappa,
        eta: raw.eta.clone(),
        phi_pi: raw.phi_pi.clone(),
        delta: raw.delta.clone(),
        s_c: raw.s_c.clone(),
        eps_g: raw.eps_g.clone(),
        p: raw.p.clone(),
        nkpc: raw.nkpc,
        psi: raw.psi.clone(),
        nu: raw.nu.clone(),
        q,
        delta_tilde,
        gamma_c,
        gamma_g,
        gamma_k,
        log_beta,
        chi,
    })
}

impl<T: Scalar> StructuralParams<T> {
    pub fn raw(&self) -> ParamSet<T> {
        ParamSet {
            beta: self.beta.clone(),
            kappa: Some(self.kappa.clone()),
            eta: self.eta.clone(),
            phi_pi: self.phi_pi.clone(),
            delta: self.delta.clone(),
            s_c: self.s_c.clone(),
            eps_g: self.eps_g.clone(),
            p: self.p.clone(),
            nkpc: self.nkpc,
            psi: self.psi.clone(),
            nu: self.nu.clone(),
        }
    }

    /// Re-derives the parameters in another scalar type from the deep values.
    pub fn cast<U: Scalar>(&self) -> StructuralParams<U> {
        derive_composites(&self.raw().cast::<U>()).expect("casting preserves admissibility")
    }

    /// Inflation level at which the Taylor rule hits the floor.
    pub fn pi_floor(&self) -> T {
        self.log_beta.clone() / self.phi_pi.clone()
    }

    /// Weight on expected inflation in the Phillips curve.
    pub fn beta_h(&self) -> T {
        match self.nkpc {
            Nkpc::Static => T::zero(),
            Nkpc::Hybrid => self.beta.clone(),
        }
    }

    /// One-line `key=value` record of every parameter, deep and derived.
    pub fn provenance(&self) -> String {
        let f = |x: &T| x.to_f64_lossy();
        let mut s = format!(
            "beta={} kappa={} eta={} phi_pi={} delta={} s_c={} eps_g={} p={} nkpc={}",
            f(&self.beta),
            f(&self.kappa),
            f(&self.eta),
            f(&self.phi_pi),
            f(&self.delta),
            f(&self.s_c),
            f(&self.eps_g),
            f(&self.p),
            self.nkpc
        );
        if let Some(psi) = &self.psi {
            s.push_str(&format!(" psi={}", f(psi)));
        }
        if let Some(nu) = &self.nu {
            s.push_str(&format!(" nu={}", f(nu)));
        }
        s.push_str(&format!(
            " q={} delta_tilde={} gamma_c={} gamma_g={} gamma_k={} chi={}",
            f(&self.q),
            f(&self.delta_tilde),
            f(&self.gamma_c),
            f(&self.gamma_g),
            f(&self.gamma_k),
            self.chi
        ));
        s
    }
}

const KEYS: [&str; 11] = [
    "beta", "kappa", "eta", "phi_pi", "delta", "s_c", "eps_g", "p", "nkpc", "psi", "nu",
];

/// Parses `key=value` lines. `#` starts a comment; blank lines are ignored.
pub fn parse_config(text: &str) -> Result<ParamSet<f64>> {
    let mut vals: [Option<f64>; 11] = [None; 11];
    let mut nkpc = None;
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
            line: line_no,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let idx = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| Error::UnknownKey {
                line: line_no,
                key: key.to_string(),
            })?;
        let dup = Error::ConfigSyntax {
            line: line_no,
            message: format!("duplicate key `{key}`"),
        };
        if key == "nkpc" {
            if nkpc.is_some() {
                return Err(dup);
            }
            nkpc = Some(
                value
                    .parse::<Nkpc>()
                    .map_err(|message| Error::ConfigSyntax {
                        line: line_no,
                        message,
                    })?,
            );
            continue;
        }
        if vals[idx].is_some() {
            return Err(dup);
        }
        let x: f64 = value.parse().map_err(|_| Error::ConfigSyntax {
            line: line_no,
            message: format!("`{key}` is not a number: `{value}`"),
        })?;
        if !x.is_finite() {
            return Err(Error::ConfigSyntax {
                line: line_no,
                message: format!("`{key}` must be finite"),
            });
        }
        vals[idx] = Some(x);
    }
    let need = |i: usize| vals[i].ok_or(Error::MissingKey(KEYS[i]));
    let set = ParamSet {
        beta: need(0)?,
        kappa: vals[1],
        eta: need(2)?,
        phi_pi: need(3)?,
        delta: need(4)?,
        s_c: need(5)?,
        eps_g: need(6)?,
        p: need(7)?,
        nkpc: nkpc.ok_or(Error::MissingKey("nkpc"))?,
        psi: vals[9],
        nu: vals[10],
    };
    if let (Some(k), Some(psi), Some(nu)) = (set.kappa, set.psi, set.nu) {
        if nu != 0.0 && ((psi / nu) - k).abs() > 1e-12 * k.abs().max(1.0) {
            return Err(Error::InconsistentKappa {
                kappa: k,
                ratio: psi / nu,
            });
        }
    }
    Ok(set)
}

/// Reads, parses and validates a parameter file.
pub fn load_config(path: &Path) -> Result<StructuralParams<f64>> {
    let text = std::fs::read_to_string(path)?;
    derive_composites(&parse_config(&text)?)
}

/// Steady-state levels of the nonlinear model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState<T> {
    pub n: T,
    pub c: T,
    pub y: T,
    pub k: T,
    pub g: T,
    pub r: T,
    pub w: T,
    pub k_over_y: T,
}

pub fn steady_state<T: Real>(params: &StructuralParams<T>) -> Result<SteadyState<T>> {
    let one = T::one();
    if params.eps_g >= one {
        return Err(Error::Domain(format!(
            "steady state needs eps_g < 1, got {}",
            params.eps_g.to_f64_lossy()
        )));
    }
    let n = one / T::lit(3.0);
    let k_over_y = (one - params.s_c) / params.delta;
    let y = (n * k_over_y.powf(params.eps_g)).powf(one / (one - params.eps_g));
    let c = params.s_c * y;
    let k = k_over_y * y;
    let g = params.delta * k;
    let r = one / params.beta - one;
    let w = T::lit(params.chi) * c * n.powf(params.eta);
    Ok(SteadyState {
        n,
        c,
        y,
        k,
        g,
        r,
        w,
        k_over_y,
    })
}

impl<T: Real> SteadyState<T> {
    /// Relative error of every accounting identity, recomputed from the levels.
    pub fn identity_errors(&self, params: &StructuralParams<T>) -> Vec<(&'static str, T)> {
        let rel = |a: T, b: T| (a - b).abs() / b.abs().max(T::min_positive_value());
        let one = T::one();
        vec![
            ("G = delta*K", rel(self.g, params.delta * self.k)),
            ("C = s_c*Y", rel(self.c, params.s_c * self.y)),
            ("Y = C + G", rel(self.y, self.c + self.g)),
            (
                "Y = K^eps_g * N",
                rel(self.y, self.k.powf(params.eps_g) * self.n),
            ),
            (
                "K/Y = (1-s_c)/delta",
                rel(self.k / self.y, (one - params.s_c) / params.delta),
            ),
            ("R = 1/beta - 1", rel(self.r, one / params.beta - one)),
            ("W = Y/N", rel(self.w, self.y / self.n)),
            (
                "N = (1/(s_c*chi))^(1/(1+eta))",
                rel(
                    self.n,
                    (one / (params.s_c * T::lit(params.chi))).powf(one / (one + params.eta)),
                ),
            ),
        ]
    }
}

/// Structural blocks `A0 Y_t = A1 E_t Y_{t+1} + B0 k_t + C0_g g_t + C0_xi xi_t + E`
/// and their reduced forms for one regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMatrices<T> {
    pub regime: Regime,
    pub a0: Mat2<T>,
    pub a1: Mat2<T>,
    pub b0: Vec2<T>,
    pub c0_g: Vec2<T>,
    pub c0_xi: Vec2<T>,
    pub e: Vec2<T>,
    pub a: Mat2<T>,
    pub b: Vec2<T>,
    pub c_g: Vec2<T>,
    pub c_xi: Vec2<T>,
    pub e_red: Vec2<T>,
}

pub fn regime_matrices<T: Scalar>(
    params: &StructuralParams<T>,
    regime: Regime,
) -> RegimeMatrices<T> {
    let zero = T::zero;
    let one = T::one;
    let kgc = params.kappa.clone() * params.gamma_c.clone();
    let rate = match regime {
        Regime::Normal => params.phi_pi.clone(),
        Regime::Elb => zero(),
    };
    let a0 = Mat2::new(one(), rate, -kgc, one());
    let a1 = Mat2::new(one(), one(), zero(), params.beta_h());
    let b0 = Vec2::new(zero(), -(params.kappa.clone() * params.gamma_k.clone()));
    let c0_g = Vec2::new(zero(), params.kappa.clone() * params.gamma_g.clone());
    let c0_xi = Vec2::new(-one(), zero());
    let e = match regime {
        Regime::Normal => Vec2::zero(),
        Regime::Elb => Vec2::new(-params.log_beta.clone(), zero()),
    };
    let inv = a0
        .inverse()
        .expect("A0 has determinant 1 + kappa*Gamma_c*phi_pi > 0");
    RegimeMatrices {
        regime,
        a: &inv * &a1,
        b: inv.mul_vec(&b0),
        c_g: inv.mul_vec(&c0_g),
        c_xi: inv.mul_vec(&c0_xi),
        e_red: inv.mul_vec(&e),
        a0,
        a1,
        b0,
        c0_g,
        c0_xi,
        e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> StructuralParams<f64> {
        derive_composites(&ParamSet::baseline()).unwrap()
    }

    #[test]
    fn composites() {
        let p = base();
        assert!((p.gamma_c - 1.008).abs() < 1e-15);
        assert_eq!(p.gamma_g, 0.01);
        assert!((p.q - 0.95).abs() < 1e-15);
        assert!((p.delta_tilde - 0.25).abs() < 1e-15);
        let w = derive_composites(&ParamSet {
            eps_g: 0.0,
            ..ParamSet::baseline()
        })
        .unwrap();
        assert_eq!(w.gamma_k, 0.0);
    }

    #[test]
    fn validation_names_field_and_bound() {
        let err = derive_composites(&ParamSet {
            phi_pi: 0.9,
            ..ParamSet::baseline()
        })
        .unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("phi_pi") && msg.contains("phi_pi > 1"),
            "{msg}"
        );
        assert!(err.is_config_error());
        for (field, set) in [
            (
                "beta",
                ParamSet {
                    beta: 1.0,
                    ..ParamSet::baseline()
                },
            ),
            (
                "delta",
                ParamSet {
                    delta: 0.0,
                    ..ParamSet::baseline()
                },
            ),
            (
                "s_c",
                ParamSet {
                    s_c: 1.2,
                    ..ParamSet::baseline()
                },
            ),
            (
                "p",
                ParamSet {
                    p: 1.0,
                    ..ParamSet::baseline()
                },
            ),
            (
                "eps_g",
                ParamSet {
                    eps_g: 1.0,
                    ..ParamSet::baseline()
                },
            ),
            (
                "eta",
                ParamSet {
                    eta: -0.1,
                    ..ParamSet::baseline()
                },
            ),
            (
                "kappa",
                ParamSet {
                    kappa: Some(0.0),
                    ..ParamSet::baseline()
                },
            ),
        ] {
            match derive_composites(&set) {
                Err(Error::InvalidParameter { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{field}: {other:?}"),
            }
        }
    }

    #[test]
    fn kappa_from_psi_nu() {
        let p = derive_composites(&ParamSet {
            kappa: None,
            psi: Some(0.6),
            nu: Some(6.0),
            ..ParamSet::baseline()
        })
        .unwrap();
        assert!((p.kappa - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_roundtrip_and_errors() {
        let text = "# baseline\nbeta = 0.99\nkappa=0.1\neta=0.01\nphi_pi=1.5\ndelta=0.05\n\
                    s_c=0.8\neps_g=0.1\np=0.7 # persistence\nnkpc=static\n";
        assert_eq!(parse_config(text).unwrap(), ParamSet::baseline());

        let unknown = format!("{text}rho=0.3\n");
        assert!(matches!(
            parse_config(&unknown),
            Err(Error::UnknownKey { line: 11, .. })
        ));
        let missing = text.replace("eta=0.01\n", "");
        assert!(matches!(
            parse_config(&missing),
            Err(Error::MissingKey("eta"))
        ));
        let dup = format!("{text}beta=0.98\n");
        assert!(matches!(
            parse_config(&dup),
            Err(Error::ConfigSyntax { .. })
        ));
        let bad = text.replace("nkpc=static", "nkpc=forward");
        assert!(matches!(
            parse_config(&bad),
            Err(Error::ConfigSyntax { .. })
        ));
        let inconsistent = format!("{text}psi=1\nnu=2\n");
        assert!(matches!(
            parse_config(&inconsistent),
            Err(Error::InconsistentKappa { .. })
        ));
    }

    #[test]
    fn steady_state_identities() {
        let p = base();
        let ss = steady_state(&p).unwrap();
        assert!((ss.r - 0.010101010101).abs() < 1e-10);
        assert!((ss.k_over_y - 4.0).abs() < 1e-12);
        for (name, err) in ss.identity_errors(&p) {
            assert!(err <= 1e-12, "{name}: {err}");
        }
    }

    #[test]
    fn regime_blocks() {
        let p = base();
        let n = regime_matrices(&p, Regime::Normal);
        let z = regime_matrices(&p, Regime::Elb);
        assert_eq!(n.a0, Mat2::new(1.0, 1.5, -p.kappa * p.gamma_c, 1.0));
        assert_eq!(*z.a0.get(0, 1), 0.0);
        assert_eq!(z.e, Vec2::new(-(0.99f64.ln()), 0.0));
        assert_eq!(n.e, Vec2::zero());
        assert_eq!(n.a1, z.a1);
        assert_eq!(*n.a1.get(1, 1), 0.0);
        let h = derive_composites(&ParamSet {
            nkpc: Nkpc::Hybrid,
            ..ParamSet::baseline()
        })
        .unwrap();
        assert_eq!(*regime_matrices(&h, Regime::Normal).a1.get(1, 1), 0.99);
        assert!((n.a0.det() - (1.0 + p.kappa * p.gamma_c * p.phi_pi)).abs() < 1e-14);
        assert_eq!(z.a0.det(), 1.0);
    }
}
