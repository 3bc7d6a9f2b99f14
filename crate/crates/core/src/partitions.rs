//! Set partitions of `{1,…,q}` and the moment/cumulant transforms over
//! the partition lattice.
//!
//! Subsets are bitmasks: element `i` is bit `i - 1`.

use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::LaurentPoly;

/// Largest ground set supported; Bell(12) = 4 213 597.
pub const MAX_Q: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    q: usize,
    /// Blocks as bitmasks, ordered by smallest element.
    blocks: Vec<u32>,
}

impl SetPartition {
    pub fn from_blocks(q: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        check_q(q)?;
        let mut masks = Vec::with_capacity(blocks.len());
        let mut seen = 0u32;
        for b in blocks {
            if b.is_empty() {
                return Err(Error::InvalidParameter("empty block".into()));
            }
            let mut mask = 0u32;
            for &i in b {
                if i == 0 || i > q {
                    return Err(Error::InvalidParameter(format!("element {i} outside 1..={q}")));
                }
                mask |= 1 << (i - 1);
            }
            if mask & seen != 0 || mask.count_ones() as usize != b.len() {
                return Err(Error::InvalidParameter("blocks overlap".into()));
            }
            seen |= mask;
            masks.push(mask);
        }
        if seen != full_mask(q) {
            return Err(Error::InvalidParameter("blocks do not cover the ground set".into()));
        }
        masks.sort_by_key(|m| m.trailing_zeros());
        Ok(Self { q, blocks: masks })
    }

    /// The one-block partition `1_q`.
    pub fn one(q: usize) -> Result<Self> {
        check_q(q)?;
        Ok(Self {
            q,
            blocks: vec![full_mask(q)],
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    /// Number of blocks `|π|`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Elements (1-based) of each block.
    pub fn block_elements(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|&m| (0..self.q).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
            .collect()
    }

    /// `π ≤ σ` in the refinement order.
    pub fn refines(&self, other: &Self) -> bool {
        self.q == other.q && self.blocks.iter().all(|&b| other.blocks.iter().any(|&c| b & c == b))
    }
}

fn check_q(q: usize) -> Result<()> {
    if q == 0 || q > MAX_Q {
        return Err(Error::BudgetExceeded {
            what: format!("set partitions of {q} elements"),
            limit: format!("1 <= q <= {MAX_Q}"),
        });
    }
    Ok(())
}

fn full_mask(q: usize) -> u32 {
    (1u32 << q) - 1
}

/// Partitions of `{1,…,q}` in restricted-growth-string order.
pub struct SetPartitions {
    q: usize,
    rgs: Vec<usize>,
    prefix_max: Vec<usize>,
    done: bool,
}

pub fn set_partitions(q: usize) -> Result<SetPartitions> {
    check_q(q)?;
    Ok(SetPartitions {
        q,
        rgs: vec![0; q],
        prefix_max: vec![0; q],
        done: false,
    })
}

impl Iterator for SetPartitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let k = self.prefix_max[self.q - 1] + 1;
        let mut blocks = vec![0u32; k];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b] |= 1 << i;
        }
        let out = SetPartition { q: self.q, blocks };

        // rgs[i] may grow up to prefix_max[i-1] + 1.
        let mut i = self.q;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.rgs[i] <= self.prefix_max[i - 1] {
                self.rgs[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
                for j in i + 1..self.q {
                    self.rgs[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                break;
            }
        }
        Some(out)
    }
}

/// `λ_π = (−1)^{|π|−1} (|π|−1)!`.
pub fn mobius_coefficient(pi: &SetPartition) -> i64 {
    let k = pi.len() as i64;
    let fact: i64 = (1..k).product();
    if k % 2 == 1 {
        fact
    } else {
        -fact
    }
}

/// Values the transforms can work over: anything with a commutative ring
/// structure and an embedding of the integers.
pub trait RingElement: Clone + Zero + One + Add<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn from_int(k: i64) -> Self;
}

impl RingElement for f64 {
    fn from_int(k: i64) -> Self {
        k as f64
    }
}

impl RingElement for i64 {
    fn from_int(k: i64) -> Self {
        k
    }
}

impl RingElement for BigInt {
    fn from_int(k: i64) -> Self {
        BigInt::from(k)
    }
}

impl RingElement for LaurentPoly {
    fn from_int(k: i64) -> Self {
        LaurentPoly::constant(k)
    }
}

/// A value for every nonempty subset of `{1,…,q}`, indexed by bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetMap<V> {
    q: usize,
    values: Vec<Option<V>>,
}

impl<V: Clone> SubsetMap<V> {
    pub fn new(q: usize) -> Result<Self> {
        check_q(q)?;
        Ok(Self {
            q,
            values: vec![None; 1 << q],
        })
    }

    /// Fills every nonempty subset from `f(mask)`.
    pub fn from_fn(q: usize, mut f: impl FnMut(u32) -> V) -> Result<Self> {
        let mut m = Self::new(q)?;
        for mask in 1..(1u32 << q) {
            m.values[mask as usize] = Some(f(mask));
        }
        Ok(m)
    }

    /// Fallible variant of [`SubsetMap::from_fn`].
    pub fn try_from_fn(q: usize, mut f: impl FnMut(u32) -> Result<V>) -> Result<Self> {
        let mut m = Self::new(q)?;
        for mask in 1..(1u32 << q) {
            m.values[mask as usize] = Some(f(mask)?);
        }
        Ok(m)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn insert(&mut self, mask: u32, value: V) {
        self.values[mask as usize] = Some(value);
    }

    pub fn get(&self, mask: u32) -> Option<&V> {
        self.values.get(mask as usize).and_then(Option::as_ref)
    }

    fn require(&self, mask: u32) -> Result<&V> {
        self.get(mask).ok_or(Error::MissingSubset(mask))
    }

    fn check_complete(&self) -> Result<()> {
        (1..(1u32 << self.q)).try_for_each(|m| self.require(m).map(|_| ()))
    }

    /// Value for the full set `{1,…,q}`.
    pub fn full(&self) -> Option<&V> {
        self.get(full_mask(self.q))
    }
}

/// Bits of `mask`, lowest first.
fn bits(mask: u32) -> Vec<u32> {
    (0..32).filter(|i| mask >> i & 1 == 1).map(|i| 1 << i).collect()
}

/// Maps a partition of `{1,…,|S|}` onto the elements of `S`.
fn lift_block(block: u32, elems: &[u32]) -> u32 {
    elems
        .iter()
        .enumerate()
        .filter(|(i, _)| block >> i & 1 == 1)
        .fold(0, |acc, (_, &e)| acc | e)
}

fn transform<V: RingElement>(input: &SubsetMap<V>, weighted: bool) -> Result<SubsetMap<V>> {
    input.check_complete()?;
    let mut out = SubsetMap::new(input.q)?;
    for mask in 1..(1u32 << input.q) {
        let elems = bits(mask);
        let mut acc = V::zero();
        for pi in set_partitions(elems.len())? {
            let mut term = V::one();
            for &b in pi.blocks() {
                term = term * input.require(lift_block(b, &elems))?.clone();
            }
            if weighted {
                term = term * V::from_int(mobius_coefficient(&pi));
            }
            acc = acc + term;
        }
        out.insert(mask, acc);
    }
    Ok(out)
}

/// `m(S) = Σ_{π partition of S} Π_{B∈π} κ(B)` for every nonempty `S`.
pub fn moments_from_cumulants<V: RingElement>(cumulants: &SubsetMap<V>) -> Result<SubsetMap<V>> {
    transform(cumulants, false)
}

/// `κ(S) = Σ_{π partition of S} λ_π Π_{B∈π} m(B)` for every nonempty `S`.
pub fn cumulants_from_moments<V: RingElement>(moments: &SubsetMap<V>) -> Result<SubsetMap<V>> {
    transform(moments, true)
}
