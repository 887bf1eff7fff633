//! CSV serialization. Every file starts with one `#` line recording the full
//! parameter vector, followed by a header row.

use serde::Serialize;

use crate::analytics::MultiplierReport;
use crate::datasets::{DecompositionFigure, Figure1};
use crate::error::Result;
use crate::markov::IrfPath;
use crate::model::StructuralParams;
use crate::solver::EquilibriumSolution;

pub const IRF_HEADER: &str = "horizon,c,pi,r,y,g,xi,k";
pub const SOLUTION_HEADER: &str = "state_index,c,pi,k,g,xi,binding";
pub const FIG1_HEADER: &str = "panel,eps_g,pi1,c1_ad_base,c1_ad_shift,c1_as_base,c1_as_shift";
pub const DECOMPOSITION_HEADER: &str = "L,exit,m_waste,q_deter,q_exit,m_c,m_y";

pub fn provenance_line(params: &StructuralParams<f64>, extra: &str) -> String {
    if extra.is_empty() {
        format!("# {}\n", params.provenance())
    } else {
        format!("# {} {}\n", params.provenance(), extra)
    }
}

fn write_rows<R: Serialize>(comment: String, rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(comment.into_bytes());
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.into_inner().map_err(|e| e.into_error().into())
}

#[derive(Serialize)]
struct IrfRow {
    horizon: usize,
    c: f64,
    pi: f64,
    r: f64,
    y: f64,
    g: f64,
    xi: f64,
    k: f64,
}

/// Deviations from steady state; `r` is the expected net-rate deviation,
/// equal to `ln(beta)` while the floor binds.
pub fn irf_csv(
    params: &StructuralParams<f64>,
    path: &IrfPath<f64>,
    extra: &str,
) -> Result<Vec<u8>> {
    let rows = path.horizon.iter().map(|&h| IrfRow {
        horizon: h,
        c: path.c[h],
        pi: path.pi[h],
        r: path.r[h],
        y: path.y[h],
        g: path.g[h],
        xi: path.xi[h],
        k: path.k[h],
    });
    write_rows(provenance_line(params, extra), rows)
}

#[derive(Serialize)]
struct StateRow {
    state_index: usize,
    c: f64,
    pi: f64,
    k: f64,
    g: f64,
    xi: f64,
    binding: bool,
}

pub fn solution_csv(sol: &EquilibriumSolution<f64>) -> Result<Vec<u8>> {
    let extra = format!(
        "L={} exit={} g1={} xi1={} T={}",
        sol.l(),
        sol.exit_mode.name(),
        sol.g1,
        sol.xi1,
        sol.trap_length
    );
    let rows = sol.states.iter().enumerate().map(|(i, y)| StateRow {
        state_index: i + 1,
        c: y.c,
        pi: y.pi,
        k: sol.spec.k_states[i],
        g: sol.spec.g_states[i],
        xi: sol.spec.xi_states[i],
        binding: sol.binding[i],
    });
    write_rows(provenance_line(&sol.params, &extra), rows)
}

#[derive(Serialize)]
struct ReportRow {
    scenario: &'static str,
    #[serde(rename = "L")]
    l: Option<usize>,
    exit: Option<&'static str>,
    dc1_dg: f64,
    dpi1_dg: f64,
    dy1_dg: f64,
    pdv_c: Option<f64>,
    m_waste: Option<f64>,
    q_deter: Option<f64>,
    q_exit: Option<f64>,
    #[serde(rename = "eps_I")]
    eps_i: Option<f64>,
    #[serde(rename = "eps_M")]
    eps_m: Option<f64>,
    #[serde(rename = "eps_Mz")]
    eps_mz: Option<f64>,
    eps_zc: Option<f64>,
    eps_zpi: Option<f64>,
    p_bar: f64,
    eig_pa_1_re: f64,
    eig_pa_1_im: f64,
    eig_pa_2_re: f64,
    eig_pa_2_im: f64,
    eig_qa_1_re: f64,
    eig_qa_1_im: f64,
    eig_qa_2_re: f64,
    eig_qa_2_im: f64,
    det_i_pa: f64,
    det_i_qa: f64,
}

/// One row per report. Eigenvalues are those of pA* and qA* (the
/// floor-regime reduced form), larger real part first.
pub fn reports_csv(
    params: &StructuralParams<f64>,
    reports: &[MultiplierReport<f64>],
) -> Result<Vec<u8>> {
    let rows = reports.iter().map(|r| {
        let d = &r.diagnostics;
        let dec = r.decomposition.as_ref();
        ReportRow {
            scenario: r.scenario.name(),
            l: r.l,
            exit: r.exit.map(|e| e.name()),
            dc1_dg: r.dc1_dg,
            dpi1_dg: r.dpi1_dg,
            dy1_dg: r.dy1_dg,
            pdv_c: r.pdv_c,
            m_waste: dec.map(|x| x.waste.c),
            q_deter: dec.map(|x| x.q_deter.c),
            q_exit: dec.map(|x| x.q_exit.c),
            eps_i: r.thresholds.eps_i,
            eps_m: r.thresholds.eps_m,
            eps_mz: r.thresholds.eps_mz,
            eps_zc: r.thresholds.eps_zc,
            eps_zpi: r.thresholds.eps_zpi,
            p_bar: d.p_bar,
            eig_pa_1_re: d.eig_pa[0].re,
            eig_pa_1_im: d.eig_pa[0].im,
            eig_pa_2_re: d.eig_pa[1].re,
            eig_pa_2_im: d.eig_pa[1].im,
            eig_qa_1_re: d.eig_qa[0].re,
            eig_qa_1_im: d.eig_qa[0].im,
            eig_qa_2_re: d.eig_qa[1].re,
            eig_qa_2_im: d.eig_qa[1].im,
            det_i_pa: d.det_i_pa,
            det_i_qa: d.det_i_qa,
        }
    });
    write_rows(provenance_line(params, ""), rows)
}

pub fn figure1_csv(fig: &Figure1) -> Result<Vec<u8>> {
    let extra = format!("figure=1 g1={}", crate::datasets::FIG1_G1);
    write_rows(provenance_line(&fig.params, &extra), fig.rows.iter())
}

pub fn decomposition_csv(fig: &DecompositionFigure) -> Result<Vec<u8>> {
    let extra = format!("figure={}", fig.which);
    write_rows(provenance_line(&fig.params, &extra), fig.rows.iter())
}
