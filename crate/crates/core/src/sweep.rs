//! Single points, parameter cuts with fidelity peaks, and finite-size
//! extrapolation of peak positions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::basis::{build_sector, BasisSector};
use crate::config::{Axis, RunConfig, SolverSection};
use crate::eigensolver::{lanczos_ground, SpectralResult};
use crate::error::{Error, Result};
use crate::hamiltonian::build_boson;
use crate::observables::report::{evaluate, CsvRow};
use crate::observables::{fidelity, ObservableReport, ObservableSelection};
use crate::params::ModelParams;
use crate::sparse::SparseOperator;

pub struct PointSolution {
    pub params: ModelParams,
    pub sector: BasisSector,
    pub operator: SparseOperator,
    pub spectrum: SpectralResult,
}

pub fn solve_point(params: &ModelParams, solver: &SolverSection) -> Result<PointSolution> {
    params.validate()?;
    let sector = build_sector(params.sites, params.particles)?;
    let operator = build_boson(params, &sector)?;
    let k = solver.eigenpairs.min(sector.dim());
    let spectrum = lanczos_ground(&operator, k, solver.seed, &solver.options())?;
    Ok(PointSolution { params: *params, sector, operator, spectrum })
}

/// Build the operator without solving.
pub fn solve_point_operator(params: &ModelParams) -> Result<SparseOperator> {
    params.validate()?;
    let sector = build_sector(params.sites, params.particles)?;
    build_boson(params, &sector)
}

impl PointSolution {
    pub fn report(&self, selection: &ObservableSelection) -> Result<ObservableReport> {
        evaluate(&self.params, &self.sector, &self.operator, &self.spectrum, selection)
    }
}

pub fn run_point(cfg: &RunConfig) -> Result<ObservableReport> {
    solve_point(&cfg.params(), &cfg.solver)?.report(&cfg.observables)
}

fn with_value(base: &ModelParams, axis: Axis, v: f64) -> ModelParams {
    match axis {
        Axis::G => ModelParams { g: v, ..*base },
        Axis::Eta => ModelParams { eta: v, ..*base },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    /// Midpoint of the two grid values.
    pub lambda: f64,
    pub step: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub lambda: f64,
    pub value: f64,
    pub prominence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub base: ModelParams,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub energies: Vec<f64>,
    pub fidelity: Vec<FidelityPoint>,
    pub peaks: Vec<Peak>,
    /// Present when observables were requested.
    #[serde(skip)]
    pub reports: Vec<ObservableReport>,
}

/// Strict local maxima whose prominence is at least `min_relative` times
/// their own height.
pub fn find_peaks(points: &[FidelityPoint], min_relative: f64) -> Vec<Peak> {
    let f: Vec<f64> = points.iter().map(|p| p.value).collect();
    let mut peaks = Vec::new();
    let n = f.len();
    let mut i = 1;
    while i + 1 < n {
        if f[i] > f[i - 1] {
            // step over a flat top
            let mut k = i;
            while k + 1 < n && f[k + 1] == f[i] {
                k += 1;
            }
            if k + 1 < n && f[k + 1] < f[i] {
                let mut left_min = f[i];
                for j in (0..i).rev() {
                    if f[j] > f[i] {
                        break;
                    }
                    left_min = left_min.min(f[j]);
                }
                let mut right_min = f[i];
                for &v in &f[k + 1..] {
                    if v > f[i] {
                        break;
                    }
                    right_min = right_min.min(v);
                }
                let prominence = f[i] - left_min.max(right_min);
                if prominence >= min_relative * f[i] && prominence > 0.0 {
                    let mid = (i + k) / 2;
                    peaks.push(Peak { lambda: points[mid].lambda, value: f[i], prominence });
                }
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Ground states along `values` of `axis`; fidelities between neighbours.
pub fn fidelity_cut(
    base: &ModelParams,
    axis: Axis,
    values: &[f64],
    solver: &SolverSection,
    selection: Option<&ObservableSelection>,
    min_relative_prominence: f64,
) -> Result<Cut> {
    if values.is_empty() {
        return Err(Error::Config("empty cut".into()));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("cut values must increase strictly".into()));
    }
    let mut energies = Vec::with_capacity(values.len());
    let mut fid = Vec::new();
    let mut reports = Vec::new();
    let mut prev: Option<(f64, Vec<crate::sparse::C64>)> = None;
    for &v in values {
        let p = with_value(base, axis, v);
        let sol = solve_point(&p, solver)?;
        energies.push(sol.spectrum.ground_energy());
        let ground = sol.spectrum.ground().to_vec();
        let mut f_here = None;
        if let Some((lp, pv)) = &prev {
            let step = v - lp;
            let value = fidelity(pv, &ground, step, p.particles.max(1))?;
            fid.push(FidelityPoint { lambda: 0.5 * (v + lp), step, value });
            f_here = Some(value);
        }
        if let Some(sel) = selection {
            let mut r = sol.report(sel)?;
            // fidelity between this point and the previous one
            r.fidelity = f_here;
            reports.push(r);
        }
        prev = Some((v, ground));
    }
    let peaks = find_peaks(&fid, min_relative_prominence);
    Ok(Cut { base: *base, axis, values: values.to_vec(), energies, fidelity: fid, peaks, reports })
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub cuts: Vec<Cut>,
}

impl Dataset {
    pub fn reports(&self) -> impl Iterator<Item = &ObservableReport> {
        self.cuts.iter().flat_map(|c| c.reports.iter())
    }

    pub fn rows(&self) -> Vec<CsvRow> {
        self.reports().flat_map(ObservableReport::rows).collect()
    }
}

/// Cartesian (g, η) grid, cut along the configured axis. Cuts run in parallel.
pub fn run_sweep(cfg: &RunConfig) -> Result<Dataset> {
    cfg.validate()?;
    let gs = cfg.sweep.g.values()?;
    let etas = cfg.sweep.eta.values()?;
    let (along, across) = match cfg.sweep.axis {
        Axis::G => (gs, etas),
        Axis::Eta => (etas, gs),
    };
    let other = match cfg.sweep.axis {
        Axis::G => Axis::Eta,
        Axis::Eta => Axis::G,
    };
    let base = cfg.params();
    let cuts: Result<Vec<Cut>> = across
        .par_iter()
        .map(|&x| {
            let b = with_value(&base, other, x);
            fidelity_cut(&b, cfg.sweep.axis, &along, &cfg.solver, Some(&cfg.observables), cfg.sweep.prominence)
        })
        .collect();
    Ok(Dataset { cuts: cuts? })
}

/// Straight-line least squares y = a + b x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub residuals: Vec<f64>,
    /// Standard error of the intercept; None below three points.
    pub intercept_stderr: Option<f64>,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParams("a line fit needs two or more paired points".into()));
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParams("abscissae must not all coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - intercept - slope * x).collect();
    let intercept_stderr = (xs.len() > 2).then(|| {
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (n - 2.0);
        (s2 * (1.0 / n + mx * mx / sxx)).sqrt()
    });
    Ok(LineFit { intercept, slope, residuals, intercept_stderr })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    /// Rank of the peak by position within each cut.
    pub peak: usize,
    pub sizes: Vec<usize>,
    pub positions: Vec<f64>,
    /// Fit of position against 1/L.
    pub fit: LineFit,
    /// Positions move monotonically with L.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSizeScan {
    pub cuts: Vec<Cut>,
    pub extrapolations: Vec<Extrapolation>,
}

/// Keep the `count` most prominent peaks, ordered by position.
pub fn leading_peaks(peaks: &[Peak], count: usize) -> Vec<Peak> {
    let mut p = peaks.to_vec();
    p.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    p.truncate(count);
    p.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    p
}

/// Repeat one cut at several L and extrapolate the peak positions in 1/L.
pub fn finite_size_scan(cfg: &RunConfig, sizes: &[usize], peaks_per_cut: usize) -> Result<FiniteSizeScan> {
    if sizes.len() < 2 {
        return Err(Error::Config("finite-size scans need two or more sizes".into()));
    }
    let along = match cfg.sweep.axis {
        Axis::G => cfg.sweep.g.values()?,
        Axis::Eta => cfg.sweep.eta.values()?,
    };
    let mut cuts = Vec::new();
    for &l in sizes {
        let base = ModelParams { sites: l, particles: l / 2, ..cfg.params() };
        cuts.push(fidelity_cut(&base, cfg.sweep.axis, &along, &cfg.solver, None, cfg.sweep.prominence)?);
    }
    let chosen: Vec<Vec<Peak>> = cuts.iter().map(|c| leading_peaks(&c.peaks, peaks_per_cut)).collect();
    let found = chosen.iter().map(Vec::len).min().unwrap_or(0);
    let mut extrapolations = Vec::new();
    for k in 0..found {
        let positions: Vec<f64> = chosen.iter().map(|p| p[k].lambda).collect();
        let xs: Vec<f64> = sizes.iter().map(|&l| 1.0 / l as f64).collect();
        let fit = fit_line(&xs, &positions)?;
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by_key(|&i| sizes[i]);
        let d: Vec<f64> = order.windows(2).map(|w| positions[w[1]] - positions[w[0]]).collect();
        let monotone = d.iter().all(|&x| x >= 0.0) || d.iter().all(|&x| x <= 0.0);
        extrapolations.push(Extrapolation { peak: k, sizes: sizes.to_vec(), positions, fit, monotone });
    }
    Ok(FiniteSizeScan { cuts, extrapolations })
}

pub fn write_fidelity_csv<W: Write>(w: W, header: &str, cuts: &[Cut]) -> Result<()> {
    let mut w = w;
    w.write_all(header.as_bytes())?;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["L", "N", "boundary", "axis", "g", "eta", "lambda", "step", "fidelity"])?;
    for c in cuts {
        for f in &c.fidelity {
            let p = with_value(&c.base, c.axis, f.lambda);
            wr.write_record(&[
                p.sites.to_string(),
                p.particles.to_string(),
                p.boundary.to_string(),
                format!("{:?}", c.axis).to_lowercase(),
                p.g.to_string(),
                p.eta.to_string(),
                f.lambda.to_string(),
                f.step.to_string(),
                f.value.to_string(),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn write_peaks_csv<W: Write>(w: W, header: &str, cuts: &[Cut]) -> Result<()> {
    let mut w = w;
    w.write_all(header.as_bytes())?;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["L", "axis", "g", "eta", "lambda", "fidelity", "prominence"])?;
    for c in cuts {
        for pk in &c.peaks {
            let p = with_value(&c.base, c.axis, pk.lambda);
            wr.write_record(&[
                p.sites.to_string(),
                format!("{:?}", c.axis).to_lowercase(),
                p.g.to_string(),
                p.eta.to_string(),
                pk.lambda.to_string(),
                pk.value.to_string(),
                pk.prominence.to_string(),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn write_extrapolation_csv<W: Write>(w: W, header: &str, scan: &FiniteSizeScan) -> Result<()> {
    let mut w = w;
    w.write_all(header.as_bytes())?;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["peak", "L", "position", "residual", "intercept", "slope", "intercept_stderr", "monotone"])?;
    for e in &scan.extrapolations {
        for ((l, pos), res) in e.sizes.iter().zip(&e.positions).zip(&e.fit.residuals) {
            wr.write_record(&[
                e.peak.to_string(),
                l.to_string(),
                pos.to_string(),
                res.to_string(),
                e.fit.intercept.to_string(),
                e.fit.slope.to_string(),
                e.fit.intercept_stderr.map(|s| s.to_string()).unwrap_or_default(),
                e.monotone.to_string(),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}
