//! Declarative run configuration (TOML).

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::eigensolver::LanczosOptions;
use crate::error::{Error, Result};
use crate::observables::ObservableSelection;
use crate::params::{Boundary, ModelParams};

/// Upper bound on the number of points a grid may expand to.
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "L")]
    pub sites: usize,
    /// Defaults to half filling.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    pub g: f64,
    pub eta: f64,
    #[serde(rename = "J")]
    pub hopping: f64,
    pub boundary: Boundary,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { sites: 16, particles: None, g: 0.0, eta: 1.0, hopping: 1.0, boundary: Boundary::Pbc }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            sites: self.sites,
            particles: self.particles.unwrap_or(self.sites / 2),
            g: self.g,
            eta: self.eta,
            hopping: self.hopping,
            boundary: self.boundary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub seed: u64,
    pub eigenpairs: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// 0 picks a size from the dimension and memory budget.
    pub max_basis: usize,
    pub resolve_multiplet: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = LanczosOptions::default();
        SolverSection { seed: 1, eigenpairs: 1, tol: o.tol, max_iter: o.max_iter, max_basis: 0, resolve_multiplet: false }
    }
}

impl SolverSection {
    pub fn options(&self) -> LanczosOptions {
        LanczosOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            max_basis: self.max_basis,
            resolve_multiplet: self.resolve_multiplet,
            ..LanczosOptions::default()
        }
    }
}

/// A list of values or an inclusive arithmetic range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Grid::Range { start, stop, step }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Grid::List(v) => v.clone(),
            &Grid::Range { start, stop, step } => {
                if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                    return Err(Error::Config(format!("bad range {start}..{stop} step {step}")));
                }
                let n = ((stop - start) / step + 1e-9).floor();
                if !(n < MAX_GRID_POINTS as f64) {
                    return Err(Error::Config("grid too large".into()));
                }
                (0..=n as usize).map(|i| start + i as f64 * step).collect()
            }
        };
        if v.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        if v.len() > MAX_GRID_POINTS || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid values must be finite and bounded in number".into()));
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    G,
    Eta,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" => Ok(Axis::G),
            "eta" => Ok(Axis::Eta),
            other => Err(Error::Config(format!("unknown axis '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub g: Grid,
    pub eta: Grid,
    /// Axis along which fidelities and peaks are taken.
    pub axis: Axis,
    /// Minimum peak prominence, relative to the largest fidelity on the cut.
    pub prominence: f64,
    /// System sizes for finite-size scans.
    #[serde(rename = "L")]
    pub sizes: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            g: Grid::range(0.0, 3.0, 0.025),
            eta: Grid::range(0.0, 10.0, 0.25),
            axis: Axis::G,
            prominence: 0.05,
            sizes: vec![12, 16, 20, 24],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: Format,
    /// 0 uses every available core.
    pub threads: usize,
    pub dump_operator: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), format: Format::Csv, threads: 0, dump_operator: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub observables: ObservableSelection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn params(&self) -> ModelParams {
        self.model.params()
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.sweep.g.values()?;
        self.sweep.eta.values()?;
        if self.sweep.sizes.is_empty() {
            return Err(Error::Config("empty size list".into()));
        }
        if !(self.sweep.prominence >= 0.0) {
            return Err(Error::Config("prominence must be non-negative".into()));
        }
        let s = &self.solver;
        if s.eigenpairs == 0 || !(s.tol > 0.0) || s.max_iter == 0 {
            return Err(Error::Config("solver needs eigenpairs ≥ 1, tol > 0 and max_iter ≥ 1".into()));
        }
        Ok(())
    }

    /// Comment lines carrying the full configuration.
    pub fn header(&self) -> String {
        self.to_toml().lines().map(|l| format!("# {l}\n")).collect()
    }

    pub fn ensure_output_dir(&self) -> Result<&Path> {
        let dir = self.output.dir.as_path();
        std::fs::create_dir_all(dir)?;
        let probe = dir.join(".write-test");
        std::fs::write(&probe, b"")?;
        std::fs::remove_file(&probe)?;
        Ok(dir)
    }
}
