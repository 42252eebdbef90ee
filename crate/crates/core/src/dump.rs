//! Versioned little-endian binary dump of a compiled Hamiltonian.
//!
//! Layout: magic "ZZOP", u16 version, u32 L, u32 N, f64 g, f64 η, f64 J,
//! u8 boundary (0 PBC, 1 OBC), u8 hermitian, u64 dim, u64 nnz,
//! u32 palette length, palette (f64 re, f64 im)*, row pointers u64*(dim+1),
//! columns u32*nnz, palette indices u16*nnz.

use std::io::Write;

use crate::basis::binomial;
use crate::error::{Error, Result};
use crate::params::{Boundary, ModelParams};
use crate::sparse::{SparseOperator, C64};

pub const MAGIC: &[u8; 4] = b"ZZOP";
pub const VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorDump {
    pub params: ModelParams,
    pub operator: SparseOperator,
}

pub fn encode(params: &ModelParams, op: &SparseOperator) -> Vec<u8> {
    let mut b = Vec::with_capacity(64 + op.nnz() * 6 + op.dim() * 8);
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&(params.sites as u32).to_le_bytes());
    b.extend_from_slice(&(params.particles as u32).to_le_bytes());
    for x in [params.g, params.eta, params.hopping] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    b.push(match params.boundary {
        Boundary::Pbc => 0,
        Boundary::Obc => 1,
    });
    b.push(op.is_hermitian() as u8);
    b.extend_from_slice(&(op.dim() as u64).to_le_bytes());
    b.extend_from_slice(&(op.nnz() as u64).to_le_bytes());
    b.extend_from_slice(&(op.palette().len() as u32).to_le_bytes());
    for z in op.palette() {
        b.extend_from_slice(&z.re.to_le_bytes());
        b.extend_from_slice(&z.im.to_le_bytes());
    }
    for p in op.row_ptr() {
        b.extend_from_slice(&p.to_le_bytes());
    }
    for c in op.cols() {
        b.extend_from_slice(&c.to_le_bytes());
    }
    for v in op.palette_indices() {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

pub fn write<W: Write>(mut w: W, params: &ModelParams, op: &SparseOperator) -> Result<()> {
    w.write_all(&encode(params, op))?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Decode("truncated operator dump".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }
    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    /// Check that `count` items of `width` bytes remain before allocating.
    fn reserve(&self, count: u64, width: u64) -> Result<usize> {
        match count.checked_mul(width) {
            Some(n) if n <= self.buf.len() as u64 => Ok(count as usize),
            _ => Err(Error::Decode("declared sizes exceed the payload".into())),
        }
    }
}

pub fn decode(bytes: &[u8]) -> Result<OperatorDump> {
    let mut c = Cursor { buf: bytes };
    if c.take(4)? != MAGIC {
        return Err(Error::Decode("bad magic".into()));
    }
    let version = c.u16()?;
    if version != VERSION {
        return Err(Error::Decode(format!("unsupported dump version {version}")));
    }
    let sites = c.u32()? as usize;
    let particles = c.u32()? as usize;
    let (g, eta, hopping) = (c.f64()?, c.f64()?, c.f64()?);
    let boundary = match c.u8()? {
        0 => Boundary::Pbc,
        1 => Boundary::Obc,
        b => return Err(Error::Decode(format!("bad boundary tag {b}"))),
    };
    let hermitian = match c.u8()? {
        0 => false,
        1 => true,
        b => return Err(Error::Decode(format!("bad hermitian flag {b}"))),
    };
    let params = ModelParams { sites, particles, g, eta, hopping, boundary };
    params.validate().map_err(|e| Error::Decode(e.to_string()))?;
    let dim = c.u64()?;
    if dim != binomial(sites, particles) {
        return Err(Error::Decode(format!("dimension {dim} does not match C({sites}, {particles})")));
    }
    let nnz = c.u64()?;
    let npal = c.u32()? as u64;
    let npal = c.reserve(npal, 16)?;
    let mut palette = Vec::with_capacity(npal);
    for _ in 0..npal {
        palette.push(C64::new(c.f64()?, c.f64()?));
    }
    if palette.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Decode("non-finite palette entry".into()));
    }
    let rows = c.reserve(dim + 1, 8)?;
    let row_ptr: Vec<u64> = (0..rows).map(|_| c.u64()).collect::<Result<_>>()?;
    let n = c.reserve(nnz, 6)?;
    let cols: Vec<u32> = (0..n).map(|_| c.u32()).collect::<Result<_>>()?;
    let vals: Vec<u16> = (0..n).map(|_| c.u16()).collect::<Result<_>>()?;
    if !c.buf.is_empty() {
        return Err(Error::Decode(format!("{} trailing bytes", c.buf.len())));
    }
    let operator = SparseOperator::from_parts(dim as usize, row_ptr, cols, vals, palette, hermitian)?;
    Ok(OperatorDump { params, operator })
}
