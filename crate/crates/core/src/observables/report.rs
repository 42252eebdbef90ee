//! Per-point observable bundle with JSON and flat CSV forms.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use super::currents::{current_nn, current_nnn, commutator_density, CurrentConvention};
use super::flux::{all_fluxes, chi_from_fluxes};
use super::{corr1_matrix, density, g2, g2_mixture, SpinPair, G2};
use crate::basis::BasisSector;
use crate::eigensolver::SpectralResult;
use crate::error::{Error, Result};
use crate::hamiltonian::TermTable;
use crate::params::{Boundary, ModelParams};
use crate::sparse::{SparseOperator, C64};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservableSelection {
    pub corr1: bool,
    pub g2: bool,
    pub currents: bool,
    pub flux: bool,
    pub stationarity: bool,
}

impl Default for ObservableSelection {
    fn default() -> Self {
        ObservableSelection { corr1: true, g2: true, currents: true, flux: true, stationarity: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plaquette {
    pub j: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub schema_version: u32,
    pub run_id: String,
    pub params: ModelParams,
    pub seed: u64,
    pub energy: f64,
    pub residual: f64,
    pub multiplet: usize,
    pub density: Vec<f64>,
    /// ⟨b†_k b_l⟩ as [re, im]
    pub corr1: Vec<Vec<[f64; 2]>>,
    pub g2: Option<G2>,
    /// Equal-weight average over the computed ground multiplet.
    pub g2_multiplet: Option<G2>,
    /// (j, I_{j→j+1}) from the Hamiltonian's range-1 terms
    pub current_nn: Vec<(usize, f64)>,
    /// (j, I_{j→j+2}) from the Hamiltonian's range-2 terms
    pub current_nnn: Vec<(usize, f64)>,
    /// NN bond current (printed closed-form formula)
    pub current_nn_printed: Vec<(usize, f64)>,
    /// NNN bond current (printed closed-form formula)
    pub current_nnn_printed: Vec<(usize, f64)>,
    pub flux: Vec<Plaquette>,
    pub chi: Option<f64>,
    pub fidelity: Option<f64>,
    /// max_j |⟨i[H, n_j]⟩|
    pub stationarity: Option<f64>,
}

pub fn run_id(params: &ModelParams, seed: u64) -> String {
    format!(
        "L{}_N{}_g{}_eta{}_{}_s{}",
        params.sites, params.particles, params.g, params.eta, params.boundary, seed
    )
}

fn bonds(params: &ModelParams, d: usize) -> Vec<usize> {
    (0..params.sites).filter(|&j| params.site((j + d) as isize).is_some()).collect()
}

pub fn evaluate(
    params: &ModelParams,
    sector: &BasisSector,
    op: &SparseOperator,
    spectrum: &SpectralResult,
    selection: &ObservableSelection,
) -> Result<ObservableReport> {
    let psi = spectrum.ground();
    let table = TermTable::new(params)?;
    let mut report = ObservableReport {
        schema_version: SCHEMA_VERSION,
        run_id: run_id(params, spectrum.seed),
        params: *params,
        seed: spectrum.seed,
        energy: spectrum.ground_energy(),
        residual: spectrum.residuals[0],
        multiplet: spectrum.multiplet,
        density: density(sector, psi)?,
        corr1: Vec::new(),
        g2: None,
        g2_multiplet: None,
        current_nn: Vec::new(),
        current_nnn: Vec::new(),
        current_nn_printed: Vec::new(),
        current_nnn_printed: Vec::new(),
        flux: Vec::new(),
        chi: None,
        fidelity: None,
        stationarity: None,
    };
    if selection.corr1 {
        report.corr1 = corr1_matrix(sector, psi)?
            .into_iter()
            .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
    }
    if selection.g2 {
        report.g2 = Some(g2(sector, psi, params.boundary)?);
        if spectrum.multiplet > 1 {
            let members: Vec<&[C64]> = spectrum.multiplet_vectors().iter().map(Vec::as_slice).collect();
            report.g2_multiplet = Some(g2_mixture(sector, &members, params.boundary)?);
        }
    }
    if selection.currents {
        for j in bonds(params, 1) {
            report.current_nn.push((j, current_nn(&table, sector, psi, j, CurrentConvention::Hamiltonian)?));
            report.current_nn_printed.push((j, current_nn(&table, sector, psi, j, CurrentConvention::Printed)?));
        }
        for j in bonds(params, 2) {
            report.current_nnn.push((j, current_nnn(&table, sector, psi, j, CurrentConvention::Hamiltonian)?));
            report.current_nnn_printed.push((j, current_nnn(&table, sector, psi, j, CurrentConvention::Printed)?));
        }
    }
    if selection.flux {
        report.flux = all_fluxes(sector, psi, params)?
            .into_iter()
            .map(|(j, mean, variance)| Plaquette { j, mean, variance })
            .collect();
        if params.boundary == Boundary::Obc {
            report.chi = chi_from_fluxes(params.sites, |j| report.flux.iter().find(|p| p.j == j).map(|p| p.mean)).ok();
        }
    }
    if selection.stationarity {
        let c = commutator_density(op, sector, psi)?;
        report.stationarity = Some(c.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    Ok(report)
}

/// One line of the flat CSV export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub schema_version: u32,
    pub run_id: String,
    pub g: f64,
    pub eta: f64,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    pub boundary: Boundary,
    pub quantity: String,
    pub index: String,
    pub value: f64,
}

impl ObservableReport {
    pub fn rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        let mut push = |quantity: &str, index: String, value: f64| {
            rows.push(CsvRow {
                schema_version: self.schema_version,
                run_id: self.run_id.clone(),
                g: self.params.g,
                eta: self.params.eta,
                sites: self.params.sites,
                particles: self.params.particles,
                boundary: self.params.boundary,
                quantity: quantity.to_string(),
                index,
                value,
            })
        };
        push("energy", String::new(), self.energy);
        push("residual", String::new(), self.residual);
        push("multiplet", String::new(), self.multiplet as f64);
        for (j, n) in self.density.iter().enumerate() {
            push("density", j.to_string(), *n);
        }
        let l = self.corr1.len();
        for k in 0..l {
            for m in 0..l {
                let [re, im] = self.corr1[k][m];
                push("corr1_re", format!("{k}-{m}"), re);
                push("corr1_im", format!("{k}-{m}"), im);
            }
        }
        // spin-correlation form for neighbouring pairs
        for d in [1usize, 2] {
            for k in 0..l {
                let Some(m) = self.params.site((k + d) as isize) else { continue };
                let [re, im] = self.corr1[k][m];
                let s = SpinPair::from_corr1(C64::new(re, im));
                for (name, v) in [("spin_xx", s.xx), ("spin_yy", s.yy), ("spin_xy", s.xy), ("spin_yx", s.yx)] {
                    push(name, format!("{k}-{m}"), v);
                }
            }
        }
        if let Some(g) = &self.g2 {
            for (j, v) in g.values.iter().enumerate() {
                push("g2", j.to_string(), *v);
            }
        }
        if let Some(g) = &self.g2_multiplet {
            for (j, v) in g.values.iter().enumerate() {
                push("g2_multiplet", j.to_string(), *v);
            }
        }
        for (name, list) in [
            ("current_nn", &self.current_nn),
            ("current_nnn", &self.current_nnn),
            ("current_nn_printed", &self.current_nn_printed),
            ("current_nnn_printed", &self.current_nnn_printed),
        ] {
            for (j, v) in list {
                push(name, j.to_string(), *v);
            }
        }
        for p in &self.flux {
            push("flux_mean", p.j.to_string(), p.mean);
            push("flux_variance", p.j.to_string(), p.variance);
        }
        if let Some(c) = self.chi {
            push("chi", String::new(), c);
        }
        if let Some(f) = self.fidelity {
            push("fidelity", String::new(), f);
        }
        if let Some(s) = self.stationarity {
            push("stationarity", String::new(), s);
        }
        rows
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &self.rows())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

pub fn write_rows<W: Write>(w: W, rows: &[CsvRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// As `write_rows`, preceded by comment lines (each starting with '#').
pub fn write_rows_with_header<W: Write>(mut w: W, header: &str, rows: &[CsvRow]) -> Result<()> {
    w.write_all(header.as_bytes())?;
    write_rows(w, rows)
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<CsvRow>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        let row: CsvRow = rec?;
        if row.schema_version != SCHEMA_VERSION {
            return Err(Error::Decode(format!("unsupported schema version {}", row.schema_version)));
        }
        out.push(row);
    }
    Ok(out)
}

/// χ recomputed from the flux rows of one run.
pub fn recompute_chi(rows: &[CsvRow], run: &str) -> Result<f64> {
    let first = rows
        .iter()
        .find(|r| r.run_id == run)
        .ok_or_else(|| Error::Decode(format!("run '{run}' not found")))?;
    let flux = |j: usize| {
        rows.iter()
            .find(|r| r.run_id == run && r.quantity == "flux_mean" && r.index.parse::<usize>().ok() == Some(j))
            .map(|r| r.value)
    };
    chi_from_fluxes(first.sites, flux)
}
