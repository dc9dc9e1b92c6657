use std::io::Write;

use clearing_core::lattice::LatticeValue;
use clearing_core::model::{EdgeTag, LiabilityNetwork, Section};
use serde::Serialize;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct VertexEntry {
    pub vertex: String,
    pub value: LatticeValue,
    pub display: String,
    /// Pay-out aggregate of the regular out-edge payments.
    pub paid: LatticeValue,
    pub residual: f64,
}

#[derive(Serialize)]
pub struct SectionReport {
    pub status: &'static str,
    pub iterations: usize,
    pub max_residual: f64,
    pub vertices: Vec<VertexEntry>,
}

pub fn paid(net: &LiabilityNetwork, values: &[LatticeValue]) -> clearing_core::Result<Vec<LatticeValue>> {
    let pays = net.edge_payments(values)?;
    (0..net.vertex_count())
        .map(|v| {
            let regular: Vec<(usize, LatticeValue)> = net
                .quiver()
                .out_edges(v)
                .iter()
                .filter(|&&e| net.edge(e).tag == EdgeTag::Regular)
                .map(|&e| (e, pays[e].clone()))
                .collect();
            net.pay_out(v, &regular)
        })
        .collect()
}

/// Per-vertex distance between `x` and its image under the clearing operator.
pub fn residuals(net: &LiabilityNetwork, x: &[LatticeValue]) -> clearing_core::Result<Vec<f64>> {
    let image = net.phi(x)?;
    net.lattices()
        .iter()
        .zip(x.iter().zip(&image))
        .map(|(d, (a, b))| d.distance(a, b))
        .collect()
}

pub fn section_report(
    net: &LiabilityNetwork,
    status: &'static str,
    values: &[LatticeValue],
    iterations: usize,
    residual: &[f64],
) -> clearing_core::Result<SectionReport> {
    let paid = paid(net, values)?;
    let vertices = values
        .iter()
        .zip(paid)
        .enumerate()
        .map(|(v, (x, p))| VertexEntry {
            vertex: net.label(v).to_string(),
            value: x.clone(),
            display: net.lattice(v).render(x),
            paid: p,
            residual: residual.get(v).copied().unwrap_or(f64::NAN),
        })
        .collect();
    Ok(SectionReport {
        status,
        iterations,
        max_residual: residual.iter().copied().fold(0.0, f64::max),
        vertices,
    })
}

pub fn from_section(net: &LiabilityNetwork, s: &Section) -> clearing_core::Result<SectionReport> {
    section_report(net, "converged", &s.values, s.iterations, &s.residual)
}

/// A single number per value: scalars as is, tuples by their first
/// component, vectors by their smallest entry, sets by their size.
pub fn scalar_summary(v: &LatticeValue) -> f64 {
    match v {
        LatticeValue::Scalar(x) => *x,
        LatticeValue::Tuple(xs) => xs.first().map_or(f64::NAN, scalar_summary),
        LatticeValue::Vector(xs) => xs.iter().copied().fold(f64::INFINITY, f64::min),
        LatticeValue::Set(s) | LatticeValue::Downset(s) => s.len() as f64,
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    schema_version: u32,
    section: &'a str,
    vertex: &'a str,
    value: f64,
    paid: f64,
    residual: f64,
}

pub fn write_csv<W: Write>(w: W, sections: &[(&str, &SectionReport)]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (name, s) in sections {
        for e in &s.vertices {
            out.serialize(CsvRow {
                schema_version: REPORT_SCHEMA_VERSION,
                section: name,
                vertex: &e.vertex,
                value: scalar_summary(&e.value),
                paid: scalar_summary(&e.paid),
                residual: e.residual,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}
