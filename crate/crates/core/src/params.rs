use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_SITES: usize = 32;

/// Geometric angle between neighbouring atoms of the ladder.
pub const ALPHA: f64 = std::f64::consts::FRAC_PI_3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Pbc,
    Obc,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Pbc => "pbc",
            Boundary::Obc => "obc",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pbc" | "periodic" => Ok(Boundary::Pbc),
            "obc" | "open" => Ok(Boundary::Obc),
            other => Err(Error::Config(format!("unknown boundary '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    pub g: f64,
    pub eta: f64,
    #[serde(rename = "J")]
    pub hopping: f64,
    pub boundary: Boundary,
}

impl ModelParams {
    /// Half filling with unit hopping.
    pub fn new(sites: usize, g: f64, eta: f64, boundary: Boundary) -> Self {
        ModelParams { sites, particles: sites / 2, g, eta, hopping: 1.0, boundary }
    }

    pub fn with_particles(mut self, particles: usize) -> Self {
        self.particles = particles;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.sites == 0 || self.sites > MAX_SITES {
            return bad(format!("L = {} outside 1..={MAX_SITES}", self.sites));
        }
        if self.particles > self.sites {
            return bad(format!("N = {} exceeds L = {}", self.particles, self.sites));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return bad(format!("g = {} must be finite and non-negative", self.g));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return bad(format!("eta = {} must be finite and non-negative", self.eta));
        }
        if !(self.hopping.is_finite() && self.hopping > 0.0) {
            return bad(format!("J = {} must be positive", self.hopping));
        }
        if self.boundary == Boundary::Pbc && (self.sites % 4 != 0 || self.sites < 8) {
            // range-4 hops wrap onto themselves below L = 8
            return bad(format!("PBC needs L a multiple of 4 and at least 8, got {}", self.sites));
        }
        Ok(())
    }

    /// Site index after applying the boundary rule, `None` when the site does not exist.
    #[inline]
    pub fn site(&self, j: isize) -> Option<usize> {
        let l = self.sites as isize;
        match self.boundary {
            Boundary::Pbc => Some(j.rem_euclid(l) as usize),
            Boundary::Obc => (0..l).contains(&j).then_some(j as usize),
        }
    }
}
