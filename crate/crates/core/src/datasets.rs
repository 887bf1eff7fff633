//! Numeric datasets behind the five standard figures.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::analytics::sweep_l;
use crate::error::{Error, Result};
use crate::markov::ChainSpec;
use crate::model::{derive_composites, Nkpc, ParamSet, StructuralParams};
use crate::solver::{solve_pattern, BindingPattern, ExitMode, Sources};

/// Size of the spending impulse shifting the loci in figure 1.
pub const FIG1_G1: f64 = 0.01;
pub const FIG1_POINTS: usize = 41;
pub const DEFAULT_L_RANGE: RangeInclusive<usize> = 0..=160;

/// One point of the aggregate demand (Euler) and aggregate supply (Phillips)
/// loci in the (pi1, c1) plane, before and after the spending shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LociRow {
    pub panel: &'static str,
    pub eps_g: f64,
    pub pi1: f64,
    pub c1_ad_base: f64,
    pub c1_ad_shift: f64,
    pub c1_as_base: f64,
    pub c1_as_shift: f64,
}

/// Equilibrium point of one panel after the shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LociPoint {
    pub panel: &'static str,
    pub eps_g: f64,
    pub c1: f64,
    pub pi1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1 {
    pub params: StructuralParams<f64>,
    pub rows: Vec<LociRow>,
    pub equilibria: Vec<LociPoint>,
}

/// Normal-times loci for the given calibration ("productive" panel) and for
/// the same calibration with eps_g = 0 ("wasteful" panel).
///
/// Demand: `c1 = (c2 + pi2) - (phi_pi - p)/(1 - p) pi1`, where the medium-run
/// block `(c2, pi2)` carries the capital built by the shock.
/// Supply: `c1 = pi1/(kappa Gamma_c) - Gamma_g g/Gamma_c`.
pub fn figure1(params: &StructuralParams<f64>, g1: f64) -> Result<Figure1> {
    let mut rows = Vec::new();
    let mut equilibria = Vec::new();
    let wasteful = derive_composites(&ParamSet {
        eps_g: 0.0,
        ..params.raw()
    })?;
    for (panel, par) in [("productive", params), ("wasteful", &wasteful)] {
        let spec = ChainSpec::new(par, 0, g1, 0.0);
        let y = solve_pattern(par, &spec, &BindingPattern::normal(0), Sources::ALL)?;
        let medium = y[1].c + y[1].pi;
        let slope = (par.phi_pi - par.p) / (1.0 - par.p);
        let kgc = par.kappa * par.gamma_c;
        let ad = |pi: f64, shift: f64| shift - slope * pi;
        let as_ = |pi: f64, g: f64| pi / kgc - par.gamma_g * g / par.gamma_c;
        let (c1, pi1) = (y[0].c, y[0].pi);
        let half = (4.0 * pi1.abs()).max(1e-4);
        for i in 0..FIG1_POINTS {
            let pi = pi1 - half + 2.0 * half * i as f64 / (FIG1_POINTS - 1) as f64;
            rows.push(LociRow {
                panel,
                eps_g: par.eps_g,
                pi1: pi,
                c1_ad_base: ad(pi, 0.0),
                c1_ad_shift: ad(pi, medium),
                c1_as_base: as_(pi, 0.0),
                c1_as_shift: as_(pi, g1),
            });
        }
        equilibria.push(LociPoint {
            panel,
            eps_g: par.eps_g,
            c1,
            pi1,
        });
    }
    Ok(Figure1 {
        params: params.clone(),
        rows,
        equilibria,
    })
}

/// Consumption impact multiplier and its three components at one L.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub exit: &'static str,
    pub m_waste: f64,
    pub q_deter: f64,
    pub q_exit: f64,
    pub m_c: f64,
    pub m_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionFigure {
    pub which: u8,
    pub params: StructuralParams<f64>,
    pub rows: Vec<DecompositionRow>,
}

/// Parameters and exit modes of figures 2-5, layered on `base`:
/// 2 sets kappa = 0.001 with the hybrid curve; 3 adds q = 0.98; 4 adds
/// p = 0.99 (both exits); 5 is figure 3 with a deterministic exit.
pub fn decomposition_setup(
    base: &ParamSet<f64>,
    which: u8,
) -> Result<(StructuralParams<f64>, Vec<ExitMode>)> {
    let fig2 = ParamSet {
        kappa: Some(0.001),
        psi: None,
        nu: None,
        nkpc: Nkpc::Hybrid,
        ..base.clone()
    };
    let fig3 = ParamSet {
        delta: 0.02,
        ..fig2.clone()
    };
    let (set, exits) = match which {
        2 => (fig2, vec![ExitMode::Stochastic]),
        3 => (fig3, vec![ExitMode::Stochastic]),
        4 => (
            ParamSet { p: 0.99, ..fig3 },
            vec![ExitMode::Stochastic, ExitMode::Deterministic],
        ),
        5 => (fig3, vec![ExitMode::Deterministic]),
        other => {
            return Err(Error::Domain(format!(
                "decomposition figures are numbered 2 to 5, got {other}"
            )))
        }
    };
    Ok((derive_composites(&set)?, exits))
}

pub fn decomposition_figure(
    base: &ParamSet<f64>,
    which: u8,
    l_range: RangeInclusive<usize>,
) -> Result<DecompositionFigure> {
    let (params, exits) = decomposition_setup(base, which)?;
    let mut rows = Vec::new();
    for exit in exits {
        for r in sweep_l(&params, l_range.clone(), exit)? {
            let d = r
                .decomposition
                .expect("finite-L reports carry a decomposition");
            rows.push(DecompositionRow {
                l: r.l.expect("finite-L"),
                exit: exit.name(),
                m_waste: d.waste.c,
                q_deter: d.q_deter.c,
                q_exit: d.q_exit.c,
                m_c: r.dc1_dg,
                m_y: r.dy1_dg,
            });
        }
    }
    Ok(DecompositionFigure {
        which,
        params,
        rows,
    })
}
