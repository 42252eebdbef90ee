//! Jordan-Wigner fermion form of the ladder Hamiltonian (open chains only).
//!
//! A boson hop `b†_t b_j` becomes `c†_t c_j Π_l (1 - 2 n_l)` over the sites
//! strictly between j and t. Matrix elements of `c†_t c_j` are then taken
//! in the fermionic occupation basis `c†_{p1} c†_{p2} … |0⟩`, p1 < p2 < ….

use crate::basis::BasisSector;
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, HopTerm, TermTable};
use crate::params::{Boundary, ModelParams};
use crate::sparse::{SparseOperator, C64};

#[derive(Clone, Debug)]
pub struct FermionTerm {
    pub hop: HopTerm,
    /// Sites contributing a (1 - 2 n_l) factor.
    pub string: Vec<usize>,
}

impl FermionTerm {
    pub fn coefficient(&self, config: u32) -> C64 {
        self.hop.amplitude(config) * string_factor(config, &self.string)
    }
}

pub fn string_factor(config: u32, sites: &[usize]) -> f64 {
    sites.iter().fold(1.0, |acc, &l| if config >> l & 1 == 1 { -acc } else { acc })
}

/// Apply `c_site` to a configuration, returning the new configuration and sign.
pub fn annihilate(config: u32, site: usize) -> Option<(u32, f64)> {
    if config >> site & 1 == 0 {
        return None;
    }
    let below = (config & ((1u32 << site) - 1)).count_ones();
    Some((config & !(1 << site), if below % 2 == 0 { 1.0 } else { -1.0 }))
}

pub fn create(config: u32, site: usize) -> Option<(u32, f64)> {
    if config >> site & 1 == 1 {
        return None;
    }
    let below = (config & ((1u32 << site) - 1)).count_ones();
    Some((config | 1 << site, if below % 2 == 0 { 1.0 } else { -1.0 }))
}

/// `c†_to c_from |config⟩`
pub fn hop(config: u32, to: usize, from: usize) -> Option<(u32, f64)> {
    let (mid, s1) = annihilate(config, from)?;
    let (out, s2) = create(mid, to)?;
    Some((out, s1 * s2))
}

pub fn fermion_terms(params: &ModelParams) -> Result<Vec<FermionTerm>> {
    if params.boundary == Boundary::Pbc {
        return Err(Error::UnsupportedBoundary(
            "Jordan-Wigner build is defined for open boundaries only".into(),
        ));
    }
    let table = TermTable::new(params)?;
    Ok(table
        .hops
        .into_iter()
        .map(|h| {
            let string = h.string_sites().collect();
            FermionTerm { hop: h, string }
        })
        .collect())
}

pub fn build_fermion_jw(params: &ModelParams, sector: &BasisSector) -> Result<SparseOperator> {
    fermion_terms(params)?;
    if params.sites != sector.sites() || params.particles != sector.particles() {
        return Err(Error::InvalidParams("sector does not match params".into()));
    }
    let table = TermTable::new(params)?;
    Ok(assemble(&table, sector, |col, from, to| {
        let lo = from.min(to) + 1;
        let hi = from.max(to);
        let string: Vec<usize> = (lo..hi).collect();
        let (_, s) = hop(col, to, from).expect("hop allowed by construction");
        string_factor(col, &string) * s > 0.0
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacent_hop_has_no_string() {
        let p = ModelParams::new(8, 0.5, 1.0, Boundary::Obc);
        let terms = fermion_terms(&p).unwrap();
        let t = terms.iter().find(|t| t.hop.range == 1).unwrap();
        assert!(t.string.is_empty());
        assert_eq!(t.coefficient(0b1010_0110), t.hop.amplitude(0b1010_0110));
    }

    #[test]
    fn next_nearest_hop_over_occupied_site_flips() {
        let p = ModelParams::new(8, 0.5, 1.0, Boundary::Obc);
        let terms = fermion_terms(&p).unwrap();
        let t = terms.iter().find(|t| t.hop.range == 2 && t.hop.source == 2).unwrap();
        assert_eq!(t.string, vec![3]);
        let occupied = 0b0000_1100;
        assert_eq!(t.coefficient(occupied), -t.hop.amplitude(occupied));
    }

    #[test]
    fn operator_order_signs() {
        // c†_3 c_0 on |0,1,1,0⟩ passes two fermions
        assert_eq!(hop(0b0111, 3, 0), Some((0b1110, 1.0)));
        assert_eq!(hop(0b0011, 2, 0), Some((0b0110, -1.0)));
        assert_eq!(hop(0b0011, 1, 0), None);
    }

    #[test]
    fn dropping_strings_changes_spectrum() {
        let p = ModelParams::new(8, 0.5, 1.0, Boundary::Obc);
        let sec = crate::basis::build_sector(8, 4).unwrap();
        let table = TermTable::new(&p).unwrap();
        let bare = assemble(&table, &sec, |col, from, to| hop(col, to, from).expect("allowed").1 > 0.0);
        let with = crate::eigensolver::dense_spectrum(&build_fermion_jw(&p, &sec).unwrap()).unwrap().energies;
        let without = crate::eigensolver::dense_spectrum(&bare).unwrap().energies;
        let diff = with.iter().zip(&without).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-3, "{diff}");
    }

    #[test]
    fn periodic_rejected() {
        let p = ModelParams::new(8, 0.5, 1.0, Boundary::Pbc);
        let sec = crate::basis::build_sector(8, 4).unwrap();
        assert!(matches!(build_fermion_jw(&p, &sec), Err(Error::UnsupportedBoundary(_))));
    }
}
