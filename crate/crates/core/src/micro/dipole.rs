//! Angular dipole matrix elements between fine-structure states and the
//! level assignment for |0⟩, |1⟩, |+⟩.

use serde::{Deserialize, Serialize};

use super::wigner::{wigner3j, wigner6j, HalfInt, SignedSqrt};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "0")]
    Ground,
    #[serde(rename = "1")]
    Excited,
    #[serde(rename = "+")]
    Detuned,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Ground, Level::Excited, Level::Detuned];
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngularState {
    #[serde(rename = "S")]
    pub spin: HalfInt,
    #[serde(rename = "L")]
    pub orbital: HalfInt,
    #[serde(rename = "J")]
    pub total: HalfInt,
    #[serde(rename = "M")]
    pub projection: HalfInt,
}

impl AngularState {
    pub fn new(spin: HalfInt, orbital: HalfInt, total: HalfInt, projection: HalfInt) -> Result<Self> {
        let s = AngularState { spin, orbital, total, projection };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (s, l, j, m) = (self.spin.twice(), self.orbital.twice(), self.total.twice(), self.projection.twice());
        if s < 0 || l < 0 || l % 2 != 0 {
            return Err(Error::InvalidParams(format!("bad S = {}, L = {}", self.spin, self.orbital)));
        }
        if j < (l - s).abs() || j > l + s || (j - l - s) % 2 != 0 {
            return Err(Error::InvalidParams(format!("J = {} not reachable from L = {}, S = {}", self.total, self.orbital, self.spin)));
        }
        if m.abs() > j || (j - m) % 2 != 0 {
            return Err(Error::InvalidParams(format!("M = {} incompatible with J = {}", self.projection, self.total)));
        }
        Ok(())
    }

    /// nS_{1/2} manifold.
    pub fn s_half(m: HalfInt) -> Result<Self> {
        Self::new(HalfInt::HALF, HalfInt::ZERO, HalfInt::HALF, m)
    }

    /// nP_{3/2} manifold.
    pub fn p_three_halves(m: HalfInt) -> Result<Self> {
        Self::new(HalfInt::HALF, HalfInt::ONE, HalfInt::from_twice(3), m)
    }
}

/// ⟨bra| C_{1,p} |ket⟩ in the reduced form with explicit 3j and 6j symbols.
pub fn tensor_element(bra: &AngularState, ket: &AngularState, p: i64) -> Result<SignedSqrt> {
    if !(-1..=1).contains(&p) {
        return Err(Error::InvalidParams(format!("component {p} of a rank-1 tensor")));
    }
    bra.validate()?;
    ket.validate()?;
    if bra.spin != ket.spin {
        return Ok(SignedSqrt::zero());
    }
    let k = HalfInt::ONE;
    let pp = HalfInt::from_twice(2 * p);
    let (jp, j, lp, l) = (bra.total, ket.total, bra.orbital, ket.orbital);
    let phase_twice = bra.projection.twice() - ket.spin.twice();
    if phase_twice % 2 != 0 {
        return Err(Error::InvalidParams("M' - S is not an integer".into()));
    }
    let three_m = wigner3j(jp, j, k, bra.projection.neg(), ket.projection, pp)?;
    let three_l = wigner3j(lp, k, l, HalfInt::ZERO, HalfInt::ZERO, HalfInt::ZERO)?;
    let six = wigner6j(lp, l, k, j, jp, ket.spin)?;
    let dims = (jp.twice() + 1) * (j.twice() + 1) * (lp.twice() + 1) * (l.twice() + 1);
    let mut v = &(&SignedSqrt::new(false, dims, 1) * &three_m) * &(&three_l * &six);
    if (phase_twice / 2).rem_euclid(2) == 1 {
        v = v.negate();
    }
    Ok(v)
}

/// Dipole component d^p in units of e·ξ, with the electron charge q = -e.
pub fn dipole_element(bra: &AngularState, ket: &AngularState, p: i64) -> Result<SignedSqrt> {
    Ok(tensor_element(bra, ket, p)?.negate())
}

/// Projections M of |0⟩ (S_{1/2}), |1⟩ and |+⟩ (P_{3/2}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelAssignment {
    pub m_ground: HalfInt,
    pub m_excited: HalfInt,
    pub m_detuned: HalfInt,
}

impl LevelAssignment {
    pub fn state(&self, level: Level) -> Result<AngularState> {
        match level {
            Level::Ground => AngularState::s_half(self.m_ground),
            Level::Excited => AngularState::p_three_halves(self.m_excited),
            Level::Detuned => AngularState::p_three_halves(self.m_detuned),
        }
    }

    /// ⟨a| d^p |b⟩ as floats, indexed [p+1][a][b].
    pub fn dipole_matrices(&self) -> Result<[[[f64; 3]; 3]; 3]> {
        let mut out = [[[0.0; 3]; 3]; 3];
        for p in -1..=1i64 {
            for a in Level::ALL {
                for b in Level::ALL {
                    let v = dipole_element(&self.state(a)?, &self.state(b)?, p)?;
                    out[(p + 1) as usize][a.index()][b.index()] = v.to_f64();
                }
            }
        }
        Ok(out)
    }

    /// The four elements ⟨0|d⁻|+⟩, ⟨1|d⁻|0⟩, ⟨0|d⁺|1⟩, ⟨+|d⁺|0⟩.
    pub fn reference_elements(&self) -> Result<[SignedSqrt; 4]> {
        let (z, o, d) = (self.state(Level::Ground)?, self.state(Level::Excited)?, self.state(Level::Detuned)?);
        Ok([
            dipole_element(&z, &d, -1)?,
            dipole_element(&o, &z, -1)?,
            dipole_element(&z, &o, 1)?,
            dipole_element(&d, &z, 1)?,
        ])
    }
}

/// {1/√3, -1/3, 1/3, -1/√3}
pub fn target_elements() -> [SignedSqrt; 4] {
    [
        SignedSqrt::new(false, 1, 3),
        SignedSqrt::new(true, 1, 9),
        SignedSqrt::new(false, 1, 9),
        SignedSqrt::new(true, 1, 3),
    ]
}

/// Every M assignment reproducing the target elements exactly.
pub fn search_assignments() -> Result<Vec<LevelAssignment>> {
    let target = target_elements();
    let mut found = Vec::new();
    for mg in [-1, 1] {
        for me in [-3, -1, 1, 3] {
            for md in [-3, -1, 1, 3] {
                if me == md {
                    continue;
                }
                let a = LevelAssignment {
                    m_ground: HalfInt::from_twice(mg),
                    m_excited: HalfInt::from_twice(me),
                    m_detuned: HalfInt::from_twice(md),
                };
                if a.reference_elements()? == target {
                    found.push(a);
                }
            }
        }
    }
    Ok(found)
}

/// The unique assignment found by `search_assignments`.
pub fn default_assignment() -> Result<LevelAssignment> {
    let found = search_assignments()?;
    match found.as_slice() {
        [a] => Ok(*a),
        _ => Err(Error::InvalidParams(format!("{} level assignments match the target elements", found.len()))),
    }
}
