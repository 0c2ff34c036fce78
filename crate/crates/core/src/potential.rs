//! Flat, stride-indexed potential tables and their algebra.
//!
//! A table's scope is always sorted by ascending global variable id. Because
//! every table shares that canonical order, a binary operation only needs a
//! per-operand stride map onto the result scope; the kernels then sweep the
//! result with an odometer and never decode full assignments per entry.
//!
//! Large sweeps are split across workers. Elementwise kernels are trivially
//! order independent. Summations use one of two fixed schemes, selected by
//! table sizes alone:
//! * each output cell accumulates its preimage in ascending input index, or
//! * when the output is tiny, the input is cut into fixed `SUM_BLOCK`
//!   blocks whose partial sums are combined in block order.
//!
//! Either way the result is bitwise identical for any worker count.

use serde::{Deserialize, Serialize};

use crate::error::{PgmError, Result};
use crate::exec;
use crate::network::Evidence;

/// Default cap on the number of entries in any table.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 26;

/// Sweeps shorter than this stay on one thread.
const PAR_MIN_LEN: usize = 1 << 14;
/// Block length for fixed-order partial sums.
const SUM_BLOCK: usize = 1 << 12;
/// Outputs at most this long use block partial sums instead of per-cell sums.
const SMALL_OUTPUT: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialTable {
    scope: Vec<usize>,
    cards: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

fn strides_for(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * cards[k + 1];
    }
    strides
}

fn checked_len(cards: &[usize], cap: usize) -> Result<usize> {
    let mut len: u128 = 1;
    for &c in cards {
        len = len.saturating_mul(c as u128);
    }
    if len > cap as u128 {
        return Err(PgmError::TableTooLarge { entries: len, cap });
    }
    Ok(len as usize)
}

/// Deterministic blocked sum.
pub(crate) fn fixed_order_sum(values: &[f64]) -> f64 {
    if values.len() <= SUM_BLOCK {
        return values.iter().sum();
    }
    let blocks = values.len().div_ceil(SUM_BLOCK);
    let partial = exec::map_range(blocks, |b| {
        let lo = b * SUM_BLOCK;
        let hi = (lo + SUM_BLOCK).min(values.len());
        values[lo..hi].iter().sum::<f64>()
    });
    partial.iter().sum()
}

/// Odometer over a mixed-radix index that tracks linear offsets into
/// several operand tables at once.
pub(crate) struct Odometer<'a> {
    cards: &'a [usize],
    digits: Vec<usize>,
    pub(crate) offsets: Vec<usize>,
    maps: &'a [Vec<usize>],
}

impl<'a> Odometer<'a> {
    pub(crate) fn starting_at(cards: &'a [usize], maps: &'a [Vec<usize>], mut flat: usize) -> Self {
        let mut digits = vec![0; cards.len()];
        for k in (0..cards.len()).rev() {
            digits[k] = flat % cards[k];
            flat /= cards[k];
        }
        let offsets = maps
            .iter()
            .map(|m| digits.iter().zip(m).map(|(d, s)| d * s).sum())
            .collect();
        Odometer { cards, digits, offsets, maps }
    }

    #[inline]
    pub(crate) fn advance(&mut self) {
        for k in (0..self.cards.len()).rev() {
            self.digits[k] += 1;
            if self.digits[k] < self.cards[k] {
                for (off, m) in self.offsets.iter_mut().zip(self.maps) {
                    *off += m[k];
                }
                return;
            }
            self.digits[k] = 0;
            for (off, m) in self.offsets.iter_mut().zip(self.maps) {
                *off -= m[k] * (self.cards[k] - 1);
            }
        }
    }
}

impl PotentialTable {
    /// Build a table from `(variable id, cardinality)` pairs in any order and
    /// values laid out row-major in that same order. The result is stored in
    /// canonical (ascending id) order.
    pub fn new(vars: &[(usize, usize)], values: Vec<f64>) -> Result<Self> {
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by_key(|&k| vars[k].0);
        for w in order.windows(2) {
            if vars[w[0]].0 == vars[w[1]].0 {
                return Err(PgmError::InvalidVariable(format!(
                    "variable {} repeated in table scope",
                    vars[w[0]].0
                )));
            }
        }
        if let Some(&(id, c)) = vars.iter().find(|v| v.1 == 0) {
            return Err(PgmError::InvalidVariable(format!(
                "variable {id} has cardinality {c}"
            )));
        }
        let cards_in: Vec<usize> = vars.iter().map(|v| v.1).collect();
        let len = checked_len(&cards_in, DEFAULT_MAX_ENTRIES)?;
        if values.len() != len {
            return Err(PgmError::InvalidVariable(format!(
                "table expects {len} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(PgmError::InvalidVariable(
                "table values must be finite and nonnegative".into(),
            ));
        }
        let identity = order.iter().enumerate().all(|(i, &k)| i == k);
        let scope: Vec<usize> = order.iter().map(|&k| vars[k].0).collect();
        let cards: Vec<usize> = order.iter().map(|&k| vars[k].1).collect();
        let strides = strides_for(&cards);
        if identity {
            return Ok(PotentialTable { scope, cards, strides, values });
        }
        // Permute from the caller's layout to canonical layout.
        let in_strides = strides_for(&cards_in);
        let map: Vec<usize> = order.iter().map(|&k| in_strides[k]).collect();
        let maps = [map];
        let mut out = vec![0.0; len];
        let mut od = Odometer::starting_at(&cards, &maps, 0);
        for slot in out.iter_mut() {
            *slot = values[od.offsets[0]];
            od.advance();
        }
        Ok(PotentialTable { scope, cards, strides, values: out })
    }

    /// Scalar table with an empty scope.
    pub fn scalar(value: f64) -> Self {
        PotentialTable {
            scope: Vec::new(),
            cards: Vec::new(),
            strides: Vec::new(),
            values: vec![value],
        }
    }

    /// All-ones table over the given `(id, card)` pairs.
    pub fn ones(vars: &[(usize, usize)]) -> Result<Self> {
        let len = checked_len(&vars.iter().map(|v| v.1).collect::<Vec<_>>(), DEFAULT_MAX_ENTRIES)?;
        Self::new(vars, vec![1.0; len])
    }

    pub(crate) fn from_canonical(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert!(scope.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(values.len(), cards.iter().product::<usize>());
        let strides = strides_for(&cards);
        PotentialTable { scope, cards, strides, values }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, var: usize) -> Option<usize> {
        self.scope.binary_search(&var).ok()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.position(var).is_some()
    }

    pub fn card_of(&self, var: usize) -> Option<usize> {
        self.position(var).map(|p| self.cards[p])
    }

    /// Value at a full assignment given as `(var, state)` pairs; extra
    /// variables are ignored.
    pub fn get(&self, assignment: &[(usize, usize)]) -> f64 {
        let mut idx = 0;
        for (k, &v) in self.scope.iter().enumerate() {
            let s = assignment
                .iter()
                .find(|a| a.0 == v)
                .map(|a| a.1)
                .expect("assignment misses a scope variable");
            idx += s * self.strides[k];
        }
        self.values[idx]
    }

    pub fn sum(&self) -> f64 {
        fixed_order_sum(&self.values)
    }

    /// For each position in `target_scope`, the stride of that variable in
    /// `self`, or 0 if absent.
    fn stride_map(&self, target_scope: &[usize]) -> Vec<usize> {
        target_scope
            .iter()
            .map(|v| self.position(*v).map_or(0, |p| self.strides[p]))
            .collect()
    }

    fn union_scope(&self, other: &Self) -> (Vec<usize>, Vec<usize>) {
        let (mut i, mut j) = (0, 0);
        let mut scope = Vec::with_capacity(self.scope.len() + other.scope.len());
        let mut cards = Vec::with_capacity(scope.capacity());
        while i < self.scope.len() || j < other.scope.len() {
            let a = self.scope.get(i).copied().unwrap_or(usize::MAX);
            let b = other.scope.get(j).copied().unwrap_or(usize::MAX);
            if a < b {
                scope.push(a);
                cards.push(self.cards[i]);
                i += 1;
            } else if b < a {
                scope.push(b);
                cards.push(other.cards[j]);
                j += 1;
            } else {
                scope.push(a);
                cards.push(self.cards[i].max(other.cards[j]));
                i += 1;
                j += 1;
            }
        }
        (scope, cards)
    }

    /// Elementwise binary sweep over `scope`/`cards` drawing operands from
    /// `self` and `other`.
    fn binary_sweep<F>(&self, other: &Self, scope: Vec<usize>, cards: Vec<usize>, len: usize, op: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let maps = [self.stride_map(&scope), other.stride_map(&scope)];
        let mut out = vec![0.0; len];
        let chunk = if len >= PAR_MIN_LEN { PAR_MIN_LEN } else { len.max(1) };
        exec::for_chunks_mut(&mut out, chunk, |ci, slots| {
            let mut od = Odometer::starting_at(&cards, &maps, ci * chunk);
            for slot in slots.iter_mut() {
                *slot = op(self.values[od.offsets[0]], other.values[od.offsets[1]]);
                od.advance();
            }
        });
        PotentialTable::from_canonical(scope, cards, out)
    }

    fn check_shared_cards(&self, other: &Self) -> Result<()> {
        for (k, v) in self.scope.iter().enumerate() {
            if let Some(c) = other.card_of(*v) {
                if c != self.cards[k] {
                    return Err(PgmError::InvalidVariable(format!(
                        "variable {v} has cardinality {} and {c} in operands",
                        self.cards[k]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.multiply_capped(other, DEFAULT_MAX_ENTRIES)
    }

    /// Product over the union scope; fails if the result exceeds `cap` entries.
    pub fn multiply_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        self.check_shared_cards(other)?;
        let (scope, cards) = self.union_scope(other);
        let len = checked_len(&cards, cap)?;
        Ok(self.binary_sweep(other, scope, cards, len, |a, b| a * b))
    }

    /// Pointwise `self / den` with `0/0 = 0`. `den`'s scope must be a subset.
    pub fn divide(&self, den: &Self) -> Result<Self> {
        if let Some(v) = den.scope.iter().find(|v| !self.contains(**v)) {
            return Err(PgmError::ScopeViolation(*v));
        }
        self.check_shared_cards(den)?;
        let bad = std::sync::atomic::AtomicBool::new(false);
        let out = self.binary_sweep(den, self.scope.clone(), self.cards.clone(), self.len(), |a, b| {
            if b == 0.0 {
                if a != 0.0 {
                    bad.store(true, std::sync::atomic::Ordering::Relaxed);
                }
                0.0
            } else {
                a / b
            }
        });
        if bad.into_inner() {
            return Err(PgmError::InconsistentCalibration);
        }
        Ok(out)
    }

    /// Sum out every variable not in `keep`.
    pub fn marginalize(&self, keep: &[usize]) -> Result<Self> {
        if let Some(v) = keep.iter().find(|v| !self.contains(**v)) {
            return Err(PgmError::ScopeViolation(*v));
        }
        let kept_pos: Vec<usize> = (0..self.scope.len())
            .filter(|&k| keep.contains(&self.scope[k]))
            .collect();
        if kept_pos.len() == self.scope.len() {
            return Ok(self.clone());
        }
        let elim_pos: Vec<usize> = (0..self.scope.len())
            .filter(|k| !kept_pos.contains(k))
            .collect();
        let scope: Vec<usize> = kept_pos.iter().map(|&k| self.scope[k]).collect();
        let cards: Vec<usize> = kept_pos.iter().map(|&k| self.cards[k]).collect();
        let out_len: usize = cards.iter().product();

        if out_len == 1 {
            return Ok(PotentialTable::from_canonical(scope, cards, vec![self.sum()]));
        }

        // Precomputed offset lists: input base offset per output cell and
        // ascending offsets of every eliminated configuration.
        let elim_cards: Vec<usize> = elim_pos.iter().map(|&k| self.cards[k]).collect();
        let elim_maps = [elim_pos.iter().map(|&k| self.strides[k]).collect::<Vec<_>>()];
        let n_elim: usize = elim_cards.iter().product();
        let mut elim_offsets = Vec::with_capacity(n_elim);
        let mut od = Odometer::starting_at(&elim_cards, &elim_maps, 0);
        for _ in 0..n_elim {
            elim_offsets.push(od.offsets[0]);
            od.advance();
        }
        let keep_map = [kept_pos.iter().map(|&k| self.strides[k]).collect::<Vec<_>>()];

        let values = if out_len <= SMALL_OUTPUT && self.len() > SUM_BLOCK {
            self.blocked_marginal(&kept_pos, out_len)
        } else {
            let mut out = vec![0.0; out_len];
            let work = self.len();
            let chunk = if work >= PAR_MIN_LEN {
                (PAR_MIN_LEN / n_elim).max(1)
            } else {
                out_len
            };
            exec::for_chunks_mut(&mut out, chunk, |ci, slots| {
                let mut od = Odometer::starting_at(&cards, &keep_map, ci * chunk);
                for slot in slots.iter_mut() {
                    let base = od.offsets[0];
                    let mut acc = 0.0;
                    for &e in &elim_offsets {
                        acc += self.values[base + e];
                    }
                    *slot = acc;
                    od.advance();
                }
            });
            out
        };
        Ok(PotentialTable::from_canonical(scope, cards, values))
    }

    /// Marginal onto a tiny output via fixed-size input blocks combined in
    /// block order.
    fn blocked_marginal(&self, kept_pos: &[usize], out_len: usize) -> Vec<f64> {
        let out_cards: Vec<usize> = kept_pos.iter().map(|&k| self.cards[k]).collect();
        let out_strides = strides_for(&out_cards);
        let mut to_out = vec![0usize; self.scope.len()];
        for (j, &k) in kept_pos.iter().enumerate() {
            to_out[k] = out_strides[j];
        }
        let maps = [to_out];
        let blocks = self.len().div_ceil(SUM_BLOCK);
        let partials = exec::map_range(blocks, |b| {
            let lo = b * SUM_BLOCK;
            let hi = (lo + SUM_BLOCK).min(self.len());
            let mut acc = vec![0.0; out_len];
            let mut od = Odometer::starting_at(&self.cards, &maps, lo);
            for i in lo..hi {
                acc[od.offsets[0]] += self.values[i];
                od.advance();
            }
            acc
        });
        let mut out = vec![0.0; out_len];
        for p in partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        out
    }

    /// Zero every entry inconsistent with the evidence. Scope is unchanged.
    pub fn reduce(&self, ev: &Evidence) -> Self {
        let fixed: Vec<(usize, usize)> = self
            .scope
            .iter()
            .enumerate()
            .filter_map(|(k, v)| ev.get(*v).map(|s| (k, s)))
            .collect();
        if fixed.is_empty() {
            return self.clone();
        }
        let mut out = self.values.clone();
        let chunk = PAR_MIN_LEN;
        let strides = &self.strides;
        let cards = &self.cards;
        exec::for_chunks_mut(&mut out, chunk, |ci, slots| {
            let base = ci * chunk;
            for (i, slot) in slots.iter_mut().enumerate() {
                let flat = base + i;
                if fixed.iter().any(|&(k, s)| (flat / strides[k]) % cards[k] != s) {
                    *slot = 0.0;
                }
            }
        });
        PotentialTable::from_canonical(self.scope.clone(), self.cards.clone(), out)
    }

    pub fn normalize(&self) -> Result<Self> {
        let total = self.sum();
        if !(total > 0.0) {
            return Err(PgmError::ZeroMass);
        }
        let values = self.values.iter().map(|v| v / total).collect();
        Ok(PotentialTable::from_canonical(self.scope.clone(), self.cards.clone(), values))
    }

    /// Index of the largest entry (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}
