//! Exact-cardinality representability: is `t` a sum of exactly `k` values
//! drawn with repetition from a finite set? This is the kernel behind every
//! monochromatic-solution check.

use thiserror::Error;

use crate::domain::{Color, Coloring, CompactAssignment, EquationInstance, Group, MonoWitness};

/// Upper bound on `(m-1) * n` for coloring checks.
pub const MONO_CAPACITY: u64 = 1 << 26;

/// Upper bound on the number of bits in one reachability table.
pub const TABLE_CAPACITY_BITS: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReprError {
    #[error("capacity exceeded: (m-1)*n = {product} > {limit}")]
    Capacity { product: u64, limit: u64 },
    #[error("reach table of {bits} bits exceeds {limit}")]
    TableTooLarge { bits: u64, limit: u64 },
}

/// `dst |= src << shift`, over little-endian `u64` words of equal length.
#[inline]
pub(crate) fn or_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let word_shift = shift / 64;
    let bit_shift = shift % 64;
    let len = dst.len();
    if word_shift >= len {
        return;
    }
    if bit_shift == 0 {
        for (d, s) in dst[word_shift..].iter_mut().zip(src) {
            *d |= s;
        }
    } else {
        dst[word_shift] |= src[0] << bit_shift;
        let pairs = src[1..].iter().zip(src);
        for (d, (hi, lo)) in dst[word_shift + 1..].iter_mut().zip(pairs) {
            *d |= (hi << bit_shift) | (lo >> (64 - bit_shift));
        }
    }
}

#[inline]
pub(crate) fn test_bit(words: &[u64], bit: u64) -> bool {
    let w = (bit / 64) as usize;
    w < words.len() && (words[w] >> (bit % 64)) & 1 == 1
}

/// `reach(j, t)`: can `t` be written as a sum of exactly `j` allowed values,
/// for `j <= parts` and `t < width`. Rows are bit-packed over the sum axis.
#[derive(Debug, Clone)]
pub struct ReachTable {
    allowed: Vec<u64>,
    parts: usize,
    width: u64,
    words: usize,
    rows: Vec<u64>,
}

impl ReachTable {
    /// Builds rows `0..=parts` over sums `0..width`.
    pub fn build(allowed: &[u64], parts: usize, width: u64) -> Result<Self, ReprError> {
        let bits = (parts as u64 + 1).saturating_mul(width);
        if bits > TABLE_CAPACITY_BITS {
            return Err(ReprError::TableTooLarge {
                bits,
                limit: TABLE_CAPACITY_BITS,
            });
        }
        let mut allowed = allowed.to_vec();
        allowed.sort_unstable();
        allowed.dedup();
        let words = width.div_ceil(64).max(1) as usize;
        let mut rows = vec![0u64; (parts + 1) * words];
        rows[0] = 1;
        for j in 1..=parts {
            let (prev, cur) = rows.split_at_mut(j * words);
            let prev = &prev[(j - 1) * words..];
            let cur = &mut cur[..words];
            for &s in &allowed {
                if s < width {
                    or_shifted(cur, prev, s as usize);
                }
            }
        }
        Ok(Self {
            allowed,
            parts,
            width,
            words,
            rows,
        })
    }

    pub fn allowed(&self) -> &[u64] {
        &self.allowed
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn row(&self, j: usize) -> &[u64] {
        &self.rows[j * self.words..(j + 1) * self.words]
    }

    pub fn reach(&self, j: usize, t: u64) -> bool {
        j <= self.parts && t < self.width && test_bit(self.row(j), t)
    }

    /// One multiset of `j` allowed values summing to `t`, ascending.
    /// Walks back through the table, always taking the largest usable value.
    pub fn composition(&self, j: usize, t: u64) -> Option<Vec<u64>> {
        if !self.reach(j, t) {
            return None;
        }
        let mut out = Vec::with_capacity(j);
        let mut rem = t;
        for parts_left in (1..=j).rev() {
            let s = *self
                .allowed
                .iter()
                .rev()
                .find(|&&s| s <= rem && self.reach(parts_left - 1, rem - s))
                .expect("reachable row has a predecessor");
            out.push(s);
            rem -= s;
        }
        debug_assert_eq!(rem, 0);
        out.reverse();
        Some(out)
    }
}

fn interval_ok(allowed: &[u64], k: u64, t: u64) -> bool {
    match (allowed.iter().min(), allowed.iter().max()) {
        (Some(&lo), Some(&hi)) => k.saturating_mul(lo) <= t && t <= k.saturating_mul(hi),
        _ => false,
    }
}

/// True iff `t = s_1 + ... + s_k` with every `s_i` in `allowed`.
pub fn representable(allowed: &[u64], k: u64, t: u64) -> Result<bool, ReprError> {
    if !interval_ok(allowed, k, t) {
        return Ok(false);
    }
    let table = ReachTable::build(allowed, k as usize, t + 1)?;
    Ok(table.reach(k as usize, t))
}

/// A concrete multiset (ascending) of `k` allowed values summing to `t`.
pub fn extract_composition(allowed: &[u64], k: u64, t: u64) -> Result<Option<Vec<u64>>, ReprError> {
    if !interval_ok(allowed, k, t) {
        return Ok(None);
    }
    let table = ReachTable::build(allowed, k as usize, t + 1)?;
    Ok(table.composition(k as usize, t))
}

/// Groups an ascending multiset into `count -> value` runs.
pub fn runs(values: &[u64]) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for &v in values {
        match groups.last_mut() {
            Some(g) if g.value == v => g.count += 1,
            _ => groups.push(Group { count: 1, value: v }),
        }
    }
    groups
}

pub(crate) fn check_capacity(inst: &EquationInstance, n: usize) -> Result<(), ReprError> {
    let product = inst.left_len().saturating_mul(n as u64);
    if product > MONO_CAPACITY {
        return Err(ReprError::Capacity {
            product,
            limit: MONO_CAPACITY,
        });
    }
    Ok(())
}

/// Looks for a monochromatic solution inside one color class.
pub fn find_in_class(
    inst: &EquationInstance,
    class: &[u64],
    color: Color,
) -> Result<Option<MonoWitness>, ReprError> {
    let (Some(&lo), Some(&hi)) = (class.first(), class.last()) else {
        return Ok(None);
    };
    let k = inst.left_len();
    let a = inst.a();
    let top = (a.saturating_mul(hi)).min(k.saturating_mul(hi));
    let table = ReachTable::build(class, k as usize, top + 1)?;
    for &s in class {
        let target = a * s;
        if k * lo <= target && target <= k * hi && table.reach(k as usize, target) {
            let left = table
                .composition(k as usize, target)
                .expect("reachable target");
            let mut groups = runs(&left);
            groups.push(Group { count: 1, value: s });
            return Ok(Some(MonoWitness {
                color,
                assignment: CompactAssignment::new(groups),
            }));
        }
    }
    Ok(None)
}

/// A monochromatic solution of `inst` under `col`, or `None` if the coloring
/// is bad. Red is scanned before blue, and within a class the smallest
/// possible `x_m` is reported.
pub fn find_mono_solution(
    inst: &EquationInstance,
    col: &Coloring,
) -> Result<Option<MonoWitness>, ReprError> {
    check_capacity(inst, col.n())?;
    for color in Color::BOTH {
        if let Some(w) = find_in_class(inst, &col.class(color), color)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

pub fn is_bad_coloring(inst: &EquationInstance, col: &Coloring) -> Result<bool, ReprError> {
    Ok(find_mono_solution(inst, col)?.is_none())
}
