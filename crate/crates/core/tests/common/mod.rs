#![allow(dead_code)]

use nk_elb::model::{derive_composites, Nkpc, ParamSet};
use nk_elb::Params;
use proptest::prelude::*;

pub fn baseline() -> Params {
    derive_composites(&ParamSet::baseline()).unwrap()
}

pub fn variant(p: &Params, nkpc: Nkpc) -> Params {
    derive_composites(&ParamSet { nkpc, ..p.raw() }).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    let den = a.abs().max(b.abs());
    if den == 0.0 {
        0.0
    } else {
        (a - b).abs() / den
    }
}

/// Admissible static-curve calibrations.
pub fn static_params() -> impl Strategy<Value = Params> {
    (
        0.95..0.999f64,
        1e-4..0.3f64,
        0.0..2.0f64,
        1.05..3.0f64,
        0.01..0.1f64,
        0.6..0.95f64,
        0.0..0.3f64,
        0.01..0.99f64,
    )
        .prop_map(|(beta, kappa, eta, phi_pi, delta, s_c, eps_g, p)| {
            derive_composites(&ParamSet {
                beta,
                kappa: Some(kappa),
                eta,
                phi_pi,
                delta,
                s_c,
                eps_g,
                p,
                nkpc: Nkpc::Static,
                psi: None,
                nu: None,
            })
            .unwrap()
        })
}
