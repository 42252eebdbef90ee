//! Row-compressed complex operator with a shared amplitude palette.
//!
//! Lattice Hamiltonians only ever produce a handful of distinct matrix
//! elements, so each stored entry is a column plus a 16-bit palette index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<u64>,
    cols: Vec<u32>,
    vals: Vec<u16>,
    palette: Vec<C64>,
    hermitian: bool,
}

/// Interns amplitudes so that bitwise-equal values share a palette slot.
#[derive(Default, Debug, Clone)]
pub struct Palette {
    values: Vec<C64>,
    index: HashMap<(u64, u64), u16>,
}

impl Palette {
    pub fn intern(&mut self, z: C64) -> u16 {
        // fold -0.0 onto 0.0 so equal values share a slot
        let z = C64::new(z.re + 0.0, z.im + 0.0);
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = u16::try_from(self.values.len()).expect("palette overflow");
        self.values.push(z);
        self.index.insert(key, i);
        i
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

impl SparseOperator {
    pub fn from_parts(
        dim: usize,
        row_ptr: Vec<u64>,
        cols: Vec<u32>,
        vals: Vec<u16>,
        palette: Vec<C64>,
        hermitian: bool,
    ) -> Result<Self> {
        let fail = |m: &str| Err(Error::Decode(m.to_string()));
        if row_ptr.len() != dim + 1 || row_ptr[0] != 0 {
            return fail("row pointer length");
        }
        if row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return fail("row pointer not monotone");
        }
        if *row_ptr.last().unwrap() as usize != cols.len() || cols.len() != vals.len() {
            return fail("entry count");
        }
        if cols.iter().any(|&c| c as usize >= dim) {
            return fail("column out of range");
        }
        if vals.iter().any(|&v| v as usize >= palette.len()) {
            return fail("palette index out of range");
        }
        Ok(SparseOperator { dim, row_ptr, cols, vals, palette, hermitian })
    }

    /// Build from per-row entry lists `(column, palette index)`.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(u32, u16)>>, palette: Palette, hermitian: bool) -> Result<Self> {
        if rows.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: rows.len() });
        }
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len() as u64);
        }
        Self::from_parts(dim, row_ptr, cols, vals, palette.values, hermitian)
    }

    pub fn from_dense(m: &DMatrix<C64>, hermitian: bool) -> Self {
        let dim = m.nrows();
        let mut palette = Palette::default();
        let rows = (0..dim)
            .map(|r| {
                (0..dim)
                    .filter(|&c| m[(r, c)] != C64::new(0.0, 0.0))
                    .map(|c| (c as u32, palette.intern(m[(r, c)])))
                    .collect()
            })
            .collect();
        Self::from_rows(dim, rows, palette, hermitian).expect("dense matrix entries are in range")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn palette(&self) -> &[C64] {
        &self.palette
    }

    pub fn row_ptr(&self) -> &[u64] {
        &self.row_ptr
    }

    pub fn cols(&self) -> &[u32] {
        &self.cols
    }

    pub fn palette_indices(&self) -> &[u16] {
        &self.vals
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.row_ptr[r] as usize, self.row_ptr[r + 1] as usize);
        self.cols[a..b]
            .iter()
            .zip(&self.vals[a..b])
            .map(|(&c, &v)| (c as usize, self.palette[v as usize]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).filter(|&(cc, _)| cc == c).map(|(_, z)| z).sum()
    }

    #[inline]
    fn row_dot(&self, r: usize, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let (a, b) = (self.row_ptr[r] as usize, self.row_ptr[r + 1] as usize);
        for (&c, &v) in self.cols[a..b].iter().zip(&self.vals[a..b]) {
            // SAFETY: from_parts checked every column against dim and every
            // palette index against the palette; x.len() == dim is checked by
            // the caller.
            unsafe {
                acc += *self.palette.get_unchecked(v as usize) * *x.get_unchecked(c as usize);
            }
        }
        acc
    }

    /// y = H x. Each row is summed in stored order, so the result does not
    /// depend on the number of threads.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: y.len() });
        }
        if self.dim < 4096 {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr = self.row_dot(r, x);
            }
        } else {
            y.par_chunks_mut(1024).enumerate().for_each(|(ci, chunk)| {
                for (k, yr) in chunk.iter_mut().enumerate() {
                    *yr = self.row_dot(ci * 1024 + k, x);
                }
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, z) in self.row(r) {
                m[(r, c)] += z;
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|r| self.get(r, r)).sum()
    }

    /// max |H_rc - conj(H_cr)| over stored positions. Repeated entries of
    /// one position are summed first.
    pub fn hermiticity_residual(&self) -> f64 {
        (0..self.dim)
            .into_par_iter()
            .map(|r| {
                self.row(r)
                    .map(|(c, _)| (self.get(r, c) - self.get(c, r).conj()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Expectation value ⟨x|H|x⟩ for a normalized x.
    pub fn expectation(&self, x: &[C64]) -> Result<C64> {
        let y = self.apply(x)?;
        Ok(x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Common interface for the eigensolvers.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[C64], y: &mut [C64]);
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        SparseOperator::apply_into(self, x, y).expect("length checked by caller")
    }
}

impl LinearOperator for DMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = (0..self.ncols()).map(|c| self[(r, c)] * x[c]).sum();
        }
    }
}
