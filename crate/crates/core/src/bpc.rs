//! Block-level bit-plane compression.
//!
//! A block of `n` words is turned into a base word plus `n - 1` deltas. The
//! deltas, as `m + 1`-bit two's complement integers, are transposed into
//! `m + 1` delta bit-planes (DBP) of `n - 1` bits each. Bit `i` of plane `j`
//! is bit `j` of delta `i`. The most significant plane is kept as the base
//! plane; every other plane is XOR-ed with its upper neighbour (DBX). The
//! planes are then coded top-down with a small prefix-free symbol table:
//!
//! | pattern                     | code                          |
//! |-----------------------------|-------------------------------|
//! | zero run, length 2..=m+1    | `001` + (len - 2), ⌈log2 m⌉ bits |
//! | single zero plane           | `01`                          |
//! | all ones                    | `00000`                       |
//! | DBX != 0 with DBP == 0      | `00001`                       |
//! | two adjacent ones at q, q+1 | `00010` + q                   |
//! | single one at q             | `00011` + q                   |
//! | anything else               | `1` + raw plane word          |
//!
//! Positions are ⌈log2(n - 1)⌉ bits wide and count from the least
//! significant plane bit (delta index 0). When a plane matches several rows
//! the first matching row in table order wins.

use crate::bitstream::{BitReader, BitWriter};
use crate::error::{Error, Result};

/// Smallest `b` with `2^b >= x`; 0 for `x <= 1`.
#[inline]
pub(crate) fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpcParams {
    m: u32,
    n: usize,
}

impl BpcParams {
    pub const MAX_WORD_BITS: u32 = 32;
    pub const MAX_BLOCK: usize = 64;

    /// Word widths up to 32 bits and block sizes `2..=64` are accepted. The
    /// container formats restrict this further.
    pub fn new(m: u32, n: usize) -> Result<Self> {
        if !(1..=Self::MAX_WORD_BITS).contains(&m) {
            return Err(Error::InvalidParams(format!(
                "word width m={m} outside 1..=32"
            )));
        }
        if !(2..=Self::MAX_BLOCK).contains(&n) {
            return Err(Error::InvalidParams(format!(
                "block size n={n} outside 2..=64"
            )));
        }
        Ok(Self { m, n })
    }

    #[inline]
    pub fn word_bits(self) -> u32 {
        self.m
    }

    #[inline]
    pub fn block_len(self) -> usize {
        self.n
    }

    #[inline]
    pub fn plane_width(self) -> u32 {
        self.n as u32 - 1
    }

    #[inline]
    pub fn plane_count(self) -> usize {
        self.m as usize + 1
    }

    #[inline]
    pub fn max_word(self) -> u32 {
        (((1u64) << self.m) - 1) as u32
    }

    #[inline]
    pub(crate) fn plane_mask(self) -> u64 {
        (1u64 << self.plane_width()) - 1
    }

    #[inline]
    pub fn run_field_bits(self) -> u32 {
        ceil_log2(u64::from(self.m))
    }

    #[inline]
    pub fn pos_field_bits(self) -> u32 {
        ceil_log2(u64::from(self.plane_width()))
    }

    /// Size of a block whose words are all equal: base, then a single zero
    /// run over every plane.
    pub fn constant_block_bits(self) -> u64 {
        u64::from(self.m) + 3 + u64::from(self.run_field_bits())
    }

    /// Size of a block with every plane uncompressed. This bounds every
    /// block for `n >= 8`; below that a 5-bit table symbol can be longer
    /// than a raw plane.
    pub fn worst_case_block_bits(self) -> u64 {
        u64::from(self.m) + (u64::from(self.m) + 1) * (1 + u64::from(self.plane_width()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpcBlock {
    pub base: u32,
    pub deltas: Vec<i64>,
}

pub fn delta_transform(words: &[u32], p: BpcParams) -> Result<BpcBlock> {
    if words.len() != p.n {
        return Err(Error::WrongLength {
            expected: p.n,
            actual: words.len(),
        });
    }
    if let Some(&w) = words.iter().find(|&&w| w > p.max_word()) {
        return Err(Error::ValueOutOfRange {
            value: u64::from(w),
            count: p.m,
        });
    }
    Ok(BpcBlock {
        base: words[0],
        deltas: words
            .windows(2)
            .map(|pair| i64::from(pair[1]) - i64::from(pair[0]))
            .collect(),
    })
}

pub fn inverse_delta(b: &BpcBlock, p: BpcParams) -> Result<Vec<u32>> {
    if b.deltas.len() + 1 != p.n {
        return Err(Error::WrongLength {
            expected: p.n - 1,
            actual: b.deltas.len(),
        });
    }
    if b.base > p.max_word() {
        return Err(Error::CorruptBlock("base word exceeds word width"));
    }
    let max = i64::from(p.max_word());
    let mut words = Vec::with_capacity(p.n);
    let mut acc = i64::from(b.base);
    words.push(b.base);
    for &d in &b.deltas {
        acc += d;
        if !(0..=max).contains(&acc) {
            return Err(Error::CorruptBlock("reconstructed word out of range"));
        }
        words.push(acc as u32);
    }
    Ok(words)
}

/// Delta bit-planes and their XOR-linked form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneSet {
    /// `m + 1` planes, index `j` holds bit `j` of every delta.
    pub dbp: Vec<u64>,
    /// `m` planes, `dbx[j] = dbp[j] ^ dbp[j + 1]`.
    pub dbx: Vec<u64>,
}

impl PlaneSet {
    pub fn base_dbp(&self) -> u64 {
        *self.dbp.last().expect("plane set always has m + 1 planes")
    }

    fn from_dbp(dbp: Vec<u64>) -> Self {
        let dbx = dbp.windows(2).map(|pair| pair[0] ^ pair[1]).collect();
        Self { dbp, dbx }
    }

    /// Sign-extended deltas recovered from the planes.
    pub fn deltas(&self, p: BpcParams) -> Vec<i64> {
        let width = p.m + 1;
        (0..p.plane_width())
            .map(|i| {
                let raw = self
                    .dbp
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, plane)| acc | (((plane >> i) & 1) << j));
                // sign-extend from m + 1 bits
                ((raw << (64 - width)) as i64) >> (64 - width)
            })
            .collect()
    }
}

pub fn plane_transform(b: &BpcBlock, p: BpcParams) -> PlaneSet {
    let delta_mask = (1u64 << (p.m + 1)) - 1;
    let mut dbp = vec![0u64; p.plane_count()];
    for (i, &d) in b.deltas.iter().enumerate() {
        let bits = (d as u64) & delta_mask;
        for (j, plane) in dbp.iter_mut().enumerate() {
            *plane |= ((bits >> j) & 1) << i;
        }
    }
    PlaneSet::from_dbp(dbp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneSymbol {
    /// `length` consecutive zero planes, `2..=m+1`.
    ZeroRun(u32),
    ZeroSingle,
    AllOnes,
    /// Non-zero DBX whose DBP is zero; the DBX equals the plane above.
    DbpZero,
    /// Ones at positions `q` and `q + 1` only.
    TwoConsecOnes(u32),
    SingleOne(u32),
    Uncompressed(u64),
}

impl PlaneSymbol {
    /// How many planes the symbol accounts for.
    pub fn planes(self) -> u32 {
        match self {
            PlaneSymbol::ZeroRun(len) => len,
            _ => 1,
        }
    }

    pub fn bit_len(self, p: BpcParams) -> u32 {
        match self {
            PlaneSymbol::ZeroRun(_) => 3 + p.run_field_bits(),
            PlaneSymbol::ZeroSingle => 2,
            PlaneSymbol::AllOnes | PlaneSymbol::DbpZero => 5,
            PlaneSymbol::TwoConsecOnes(_) | PlaneSymbol::SingleOne(_) => 5 + p.pos_field_bits(),
            PlaneSymbol::Uncompressed(_) => 1 + p.plane_width(),
        }
    }

    pub fn write(self, p: BpcParams, w: &mut BitWriter) -> Result<()> {
        match self {
            PlaneSymbol::ZeroRun(len) => {
                w.write_bits(0b001, 3)?;
                w.write_bits(u64::from(len - 2), p.run_field_bits())
            }
            PlaneSymbol::ZeroSingle => w.write_bits(0b01, 2),
            PlaneSymbol::AllOnes => w.write_bits(0b00000, 5),
            PlaneSymbol::DbpZero => w.write_bits(0b00001, 5),
            PlaneSymbol::TwoConsecOnes(q) => {
                w.write_bits(0b00010, 5)?;
                w.write_bits(u64::from(q), p.pos_field_bits())
            }
            PlaneSymbol::SingleOne(q) => {
                w.write_bits(0b00011, 5)?;
                w.write_bits(u64::from(q), p.pos_field_bits())
            }
            PlaneSymbol::Uncompressed(v) => {
                w.write_bit(true);
                w.write_bits(v, p.plane_width())
            }
        }
    }

    pub fn read(r: &mut BitReader<'_>, p: BpcParams) -> Result<Self> {
        if r.read_bit()? {
            return Ok(PlaneSymbol::Uncompressed(r.read_bits(p.plane_width())?));
        }
        if r.read_bit()? {
            return Ok(PlaneSymbol::ZeroSingle);
        }
        if r.read_bit()? {
            let len = r.read_bits(p.run_field_bits())? + 2;
            return Ok(PlaneSymbol::ZeroRun(len as u32));
        }
        Ok(match r.read_bits(2)? {
            0b00 => PlaneSymbol::AllOnes,
            0b01 => PlaneSymbol::DbpZero,
            0b10 => PlaneSymbol::TwoConsecOnes(r.read_bits(p.pos_field_bits())? as u32),
            _ => PlaneSymbol::SingleOne(r.read_bits(p.pos_field_bits())? as u32),
        })
    }
}

/// Symbol for a single non-zero plane word `v`. `dbp` is the matching DBP
/// when `v` is a DBX plane, `None` for the base plane.
fn classify_nonzero(v: u64, dbp: Option<u64>, p: BpcParams) -> PlaneSymbol {
    if v == p.plane_mask() {
        PlaneSymbol::AllOnes
    } else if dbp == Some(0) {
        PlaneSymbol::DbpZero
    } else if v.count_ones() == 2 && (v >> v.trailing_zeros()) == 0b11 {
        PlaneSymbol::TwoConsecOnes(v.trailing_zeros())
    } else if v.count_ones() == 1 {
        PlaneSymbol::SingleOne(v.trailing_zeros())
    } else {
        PlaneSymbol::Uncompressed(v)
    }
}

/// Symbols for all `m + 1` planes, base plane first, then `dbx[m-1]` down
/// to `dbx[0]`. With `xor` off the raw DBPs are coded instead of the DBX
/// planes (and the DBP-zero row never applies).
pub(crate) fn plane_symbols(ps: &PlaneSet, p: BpcParams, xor: bool) -> Vec<PlaneSymbol> {
    let m = p.m as usize;
    let planes = std::iter::once((ps.base_dbp(), None)).chain((0..m).rev().map(|j| {
        if xor {
            (ps.dbx[j], Some(ps.dbp[j]))
        } else {
            (ps.dbp[j], None)
        }
    }));

    let mut symbols = Vec::with_capacity(p.plane_count());
    let mut zeros = 0u32;
    let flush = |zeros: &mut u32, symbols: &mut Vec<PlaneSymbol>| {
        match *zeros {
            0 => {}
            1 => symbols.push(PlaneSymbol::ZeroSingle),
            len => symbols.push(PlaneSymbol::ZeroRun(len)),
        }
        *zeros = 0;
    };
    for (v, dbp) in planes {
        if v == 0 {
            zeros += 1;
        } else {
            flush(&mut zeros, &mut symbols);
            symbols.push(classify_nonzero(v, dbp, p));
        }
    }
    flush(&mut zeros, &mut symbols);
    symbols
}

pub fn encode_plane_symbols(ps: &PlaneSet, p: BpcParams, w: &mut BitWriter) -> Result<()> {
    for sym in plane_symbols(ps, p, true) {
        sym.write(p, w)?;
    }
    Ok(())
}

pub fn decode_plane_symbols(r: &mut BitReader<'_>, p: BpcParams) -> Result<PlaneSet> {
    let m = p.m as usize;
    let width = p.plane_width();
    let mut dbp = vec![0u64; m + 1];
    // planes are numbered top-down: 0 is the base plane, i >= 1 is dbx[m - i]
    let mut next = 0usize;
    while next <= m {
        let sym = PlaneSymbol::read(r, p)?;
        let count = sym.planes() as usize;
        if next + count > m + 1 {
            return Err(Error::CorruptBlock("zero run overshoots the plane count"));
        }
        let value = match sym {
            PlaneSymbol::ZeroRun(_) | PlaneSymbol::ZeroSingle => 0,
            PlaneSymbol::AllOnes => p.plane_mask(),
            PlaneSymbol::DbpZero => {
                if next == 0 {
                    return Err(Error::CorruptBlock("DBP-zero symbol on the base plane"));
                }
                // dbp[j] = 0 outright
                dbp[m - next] = 0;
                next += 1;
                continue;
            }
            PlaneSymbol::TwoConsecOnes(q) => {
                if q + 1 >= width {
                    return Err(Error::CorruptBlock("two-ones position out of range"));
                }
                0b11 << q
            }
            PlaneSymbol::SingleOne(q) => {
                if q >= width {
                    return Err(Error::CorruptBlock("single-one position out of range"));
                }
                1 << q
            }
            PlaneSymbol::Uncompressed(v) => v,
        };
        for _ in 0..count {
            let j = m - next;
            dbp[j] = if next == 0 { value } else { value ^ dbp[j + 1] };
            next += 1;
        }
    }
    Ok(PlaneSet::from_dbp(dbp))
}

pub fn encode_block(words: &[u32], p: BpcParams, w: &mut BitWriter) -> Result<()> {
    let block = delta_transform(words, p)?;
    w.write_bits(u64::from(block.base), p.m)?;
    encode_plane_symbols(&plane_transform(&block, p), p, w)
}

pub fn decode_block(r: &mut BitReader<'_>, p: BpcParams) -> Result<Vec<u32>> {
    let base = r.read_bits(p.m)? as u32;
    let planes = decode_plane_symbols(r, p)?;
    inverse_delta(
        &BpcBlock {
            base,
            deltas: planes.deltas(p),
        },
        p,
    )
}

/// Encoded size of one block in bits, without writing it.
pub fn block_size_bits(words: &[u32], p: BpcParams) -> Result<u64> {
    let block = delta_transform(words, p)?;
    let ps = plane_transform(&block, p);
    Ok(u64::from(p.m)
        + plane_symbols(&ps, p, true)
            .into_iter()
            .map(|s| u64::from(s.bit_len(p)))
            .sum::<u64>())
}
