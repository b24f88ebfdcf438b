//! The ultrametric ensemble: hierarchical sums of independent GOE/GUE blocks.
//!
//! `H_{n,m} = Z^{-1} sum_{r=0}^{m} 2^{-(1+c) r / 2} Phi_{n,r}`, where
//! `Phi_{n,r}` is block diagonal over the partition `P_r` with independent
//! Gaussian blocks of size `2^r`. Every block is drawn from its own
//! substream `(trial, r, block)`, so truncations `H_{n,m}` of the same trial
//! share their realizations of `Phi_{n,r}` for all common levels.

pub mod stream;

use crate::error::{Error, Result};
use crate::hierarchy::{self, HierarchyIndex, MAX_LEVEL};
use crate::matrix::SymmetricMatrix;
use crate::scalar::Scalar;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
pub use stream::{RngStream, StreamDomain, StreamPath};

/// Symmetry class of the Gaussian blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Orthogonal,
    Unitary,
}

impl Symmetry {
    pub fn as_str(self) -> &'static str {
        match self {
            Symmetry::Orthogonal => "orthogonal",
            Symmetry::Unitary => "unitary",
        }
    }
}

impl std::str::FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "orthogonal" | "goe" | "real" => Ok(Symmetry::Orthogonal),
            "unitary" | "gue" | "complex" => Ok(Symmetry::Unitary),
            other => Err(Error::InvalidParameter(format!("unknown symmetry class '{other}'"))),
        }
    }
}

/// Parameters defining one random model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n: u32,
    pub c: f64,
    pub symmetry: Symmetry,
    pub normalized: bool,
    pub master_seed: u64,
}

impl EnsembleParams {
    pub fn new(n: u32, c: f64) -> Self {
        EnsembleParams {
            n,
            c,
            symmetry: Symmetry::Orthogonal,
            normalized: true,
            master_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn with_level(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > MAX_LEVEL {
            return Err(Error::out_of_range("n", self.n as i64, 0, MAX_LEVEL as i64));
        }
        if !self.c.is_finite() {
            return Err(Error::InvalidParameter(format!("c must be finite, got {}", self.c)));
        }
        Ok(())
    }

    /// Weight `2^{-(1+c) r / 2}` of level `r`.
    pub fn level_weight(&self, r: u32) -> f64 {
        (-(1.0 + self.c) * r as f64 / 2.0).exp2()
    }

    /// Overall factor: `1 / Z_{n,c}` when normalized, else 1.
    pub fn prefactor(&self) -> f64 {
        if self.normalized {
            1.0 / normalizer(self.n, self.c)
        } else {
            1.0
        }
    }

    /// Hashable identity (the float `c` is keyed by its bit pattern).
    pub fn key(&self) -> ParamsKey {
        ParamsKey {
            n: self.n,
            c_bits: self.c.to_bits(),
            symmetry: self.symmetry,
            normalized: self.normalized,
            master_seed: self.master_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamsKey {
    n: u32,
    c_bits: u64,
    symmetry: Symmetry,
    normalized: bool,
    master_seed: u64,
}

/// Matrix entry types that can be drawn from the block ensembles.
pub trait EnsembleScalar: Scalar {
    const SYMMETRY: Symmetry;

    /// Off-diagonal entry with `E|x|^2 = variance`.
    fn off_diagonal(stream: &mut RngStream, variance: f64) -> Self;
}

impl EnsembleScalar for f64 {
    const SYMMETRY: Symmetry = Symmetry::Orthogonal;

    fn off_diagonal(stream: &mut RngStream, variance: f64) -> Self {
        variance.sqrt() * stream.gaussian()
    }
}

impl EnsembleScalar for Complex64 {
    const SYMMETRY: Symmetry = Symmetry::Unitary;

    fn off_diagonal(stream: &mut RngStream, variance: f64) -> Self {
        let s = (variance / 2.0).sqrt();
        let re = s * stream.gaussian();
        let im = s * stream.gaussian();
        Complex64::new(re, im)
    }
}

fn check_symmetry<T: EnsembleScalar>(params: &EnsembleParams) -> Result<()> {
    if params.symmetry != T::SYMMETRY {
        return Err(Error::InvalidParameter(format!(
            "parameters ask for the {} class but the entry type is {}",
            params.symmetry.as_str(),
            T::SYMMETRY.as_str()
        )));
    }
    Ok(())
}

/// Adds `weight` times one Gaussian block of size `2^r` onto the upper
/// triangle of `target` at diagonal offset `offset`.
///
/// Entries are drawn column by column, `i <= j`, diagonal first within its
/// column position: variance `2 * 2^{-r}` on the diagonal (real) and
/// `2^{-r}` off it.
fn accumulate_block<T: EnsembleScalar>(
    target: &mut SymmetricMatrix<T>,
    offset: usize,
    r: u32,
    weight: f64,
    stream: &mut RngStream,
) {
    let size = 1usize << r;
    let var = (-(r as f64)).exp2();
    let diag_sd = (2.0 * var).sqrt();
    for j in 0..size {
        for i in 0..=j {
            let x = if i == j {
                T::from_re(diag_sd * stream.gaussian())
            } else {
                T::off_diagonal(stream, var)
            };
            *target.upper_mut(offset + i, offset + j) += x.scale(weight);
        }
    }
}

/// Samples `Phi_{n,r}` for one trial: a direct sum of `2^{n-r}` independent
/// Gaussian blocks of size `2^r`, zero elsewhere.
pub fn sample_block_matrix<T: EnsembleScalar>(
    n: u32,
    r: u32,
    master_seed: u64,
    trial: u64,
) -> Result<SymmetricMatrix<T>> {
    if n > MAX_LEVEL {
        return Err(Error::out_of_range("n", n as i64, 0, MAX_LEVEL as i64));
    }
    if r > n {
        return Err(Error::out_of_range("r", r as i64, 0, n as i64));
    }
    let mut m = SymmetricMatrix::<T>::zeros(1 << n);
    for b in 0..(1u64 << (n - r)) {
        let mut s = RngStream::new(master_seed, StreamPath::block(trial, r, b));
        accumulate_block(&mut m, (b as usize) << r, r, 1.0, &mut s);
    }
    m.mirror_upper();
    Ok(m)
}

/// Assembles the truncation `H_{n,m}` (equal to `H_n` when `m = n`).
pub fn assemble<T: EnsembleScalar>(
    params: &EnsembleParams,
    trial: u64,
    m: u32,
) -> Result<SymmetricMatrix<T>> {
    params.validate()?;
    check_symmetry::<T>(params)?;
    if m > params.n {
        return Err(Error::out_of_range("m", m as i64, 0, params.n as i64));
    }
    let n = params.n;
    let mut h = SymmetricMatrix::<T>::zeros(1 << n);
    for r in 0..=m {
        let w = params.level_weight(r);
        for b in 0..(1u64 << (n - r)) {
            let mut s = RngStream::new(params.master_seed, StreamPath::block(trial, r, b));
            accumulate_block(&mut h, (b as usize) << r, r, w, &mut s);
        }
    }
    finish(&mut h, params);
    Ok(h)
}

/// Assembles the diagonal block `j` of `H_{n,m}` over the partition `P_m`
/// from the same substreams as [`assemble`]; the result equals the
/// corresponding principal submatrix bit-for-bit.
pub fn assemble_block<T: EnsembleScalar>(
    params: &EnsembleParams,
    trial: u64,
    m: u32,
    j: u64,
) -> Result<SymmetricMatrix<T>> {
    params.validate()?;
    check_symmetry::<T>(params)?;
    if m > params.n {
        return Err(Error::out_of_range("m", m as i64, 0, params.n as i64));
    }
    let count = 1u64 << (params.n - m);
    if j >= count {
        return Err(Error::out_of_range("block", j as i64, 0, count as i64 - 1));
    }
    let mut h = SymmetricMatrix::<T>::zeros(1 << m);
    for r in 0..=m {
        let w = params.level_weight(r);
        let per = 1u64 << (m - r);
        for k in 0..per {
            let b = j * per + k;
            let mut s = RngStream::new(params.master_seed, StreamPath::block(trial, r, b));
            accumulate_block(&mut h, (k as usize) << r, r, w, &mut s);
        }
    }
    finish(&mut h, params);
    Ok(h)
}

fn finish<T: Scalar>(h: &mut SymmetricMatrix<T>, params: &EnsembleParams) {
    if params.normalized {
        let inv = params.prefactor();
        let n = h.dim();
        for j in 0..n {
            for i in 0..=j {
                let e = h.upper_mut(i, j);
                *e = e.scale(inv);
            }
        }
    }
    h.mirror_upper();
}

/// `Z_{n,c}` by direct summation of the level contributions to a row variance.
pub fn normalizer(n: u32, c: f64) -> f64 {
    normalizer_sq(n, c).sqrt()
}

pub fn normalizer_sq(n: u32, c: f64) -> f64 {
    (0..=n)
        .map(|r| {
            let r = r as f64;
            (-(1.0 + c) * r).exp2() * (1.0 + (-r).exp2())
        })
        .sum()
}

/// `E |<delta_y, H_n delta_x>|^2` in closed form.
pub fn entry_variance(x: HierarchyIndex, y: HierarchyIndex, params: &EnsembleParams) -> Result<f64> {
    if x.level() != params.n {
        return Err(Error::LevelMismatch(x.level(), params.n));
    }
    let d = hierarchy::distance(x, y)?;
    Ok(variance_at_distance(d, params.n, params.c, params.normalized))
}

pub fn variance_at_distance(d: u32, n: u32, c: f64, normalized: bool) -> f64 {
    let term = |r: u32| (-(2.0 + c) * r as f64).exp2();
    let v = if d == 0 {
        2.0 * (0..=n).map(term).sum::<f64>()
    } else {
        (d..=n).map(term).sum::<f64>()
    };
    if normalized {
        v / normalizer_sq(n, c)
    } else {
        v
    }
}

/// The spread `M_n = (max_{x,y} E|H_xy|^2)^{-1}` of the normalized model.
/// The maximum sits on the diagonal.
pub fn spread(n: u32, c: f64) -> f64 {
    1.0 / variance_at_distance(0, n, c, true)
}
