//! Dyadic tree geometry on `B_n = {1, ..., 2^n}`.
//!
//! Sites are 1-based in the public API. Two sites are at distance `r` when
//! `r` is the smallest level whose partition puts them in a common block;
//! blocks of level `r` are the aligned runs `{k 2^r + 1, ..., (k + 1) 2^r}`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest supported tree level.
pub const MAX_LEVEL: u32 = 30;

/// A site `value` in `B_level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HierarchyIndex {
    value: u32,
    level: u32,
}

impl HierarchyIndex {
    pub fn new(value: u32, level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::out_of_range("level", level as i64, 0, MAX_LEVEL as i64));
        }
        let size = 1u64 << level;
        if value == 0 || value as u64 > size {
            return Err(Error::out_of_range("site", value as i64, 1, size as i64));
        }
        Ok(HierarchyIndex { value, level })
    }

    /// Builds an index from a 0-based offset.
    pub fn from_offset(offset: usize, level: u32) -> Result<Self> {
        let value = u32::try_from(offset + 1)
            .map_err(|_| Error::out_of_range("site", offset as i64 + 1, 1, 1i64 << level.min(MAX_LEVEL)))?;
        Self::new(value, level)
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn level(self) -> u32 {
        self.level
    }

    /// 0-based position, used for matrix indexing.
    pub fn offset(self) -> usize {
        (self.value - 1) as usize
    }
}

/// A member of the partition `P_r`, as an inclusive 1-based range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockRange {
    pub start: u32,
    pub end: u32,
    pub level: u32,
}

impl BlockRange {
    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: HierarchyIndex) -> bool {
        self.start <= x.value && x.value <= self.end
    }

    /// 0-based half-open offsets `[start - 1, end)`.
    pub fn offsets(&self) -> std::ops::Range<usize> {
        (self.start - 1) as usize..self.end as usize
    }

    /// Position of this block within `P_level`.
    pub fn block_index(&self) -> usize {
        ((self.start - 1) >> self.level) as usize
    }
}

/// Distance on 0-based offsets: the bit length of `a ^ b`.
#[inline]
pub fn offset_distance(a: usize, b: usize) -> u32 {
    usize::BITS - (a ^ b).leading_zeros()
}

/// Ultrametric distance `d(x, y)`.
pub fn distance(x: HierarchyIndex, y: HierarchyIndex) -> Result<u32> {
    if x.level != y.level {
        return Err(Error::LevelMismatch(x.level, y.level));
    }
    Ok(offset_distance(x.offset(), y.offset()))
}

/// The member of `P_r` containing `x`.
pub fn ball(x: HierarchyIndex, r: u32) -> Result<BlockRange> {
    if r > x.level {
        return Err(Error::out_of_range("r", r as i64, 0, x.level as i64));
    }
    let k = x.offset() >> r;
    let start = (k << r) as u32 + 1;
    Ok(BlockRange {
        start,
        end: start + ((1u32 << r) - 1),
        level: r,
    })
}

/// The partition `P_r` of `B_n`, in order.
pub fn blocks(n: u32, r: u32) -> Result<Vec<BlockRange>> {
    if n > MAX_LEVEL {
        return Err(Error::out_of_range("n", n as i64, 0, MAX_LEVEL as i64));
    }
    if r > n {
        return Err(Error::out_of_range("r", r as i64, 0, n as i64));
    }
    let width = 1u32 << r;
    Ok((0..(1u32 << (n - r)))
        .map(|k| BlockRange {
            start: k * width + 1,
            end: (k + 1) * width,
            level: r,
        })
        .collect())
}
