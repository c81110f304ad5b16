//! General mass functions and the brute-force orthogonal sum.
//!
//! This is the reference implementation every fast path is checked against:
//! [`combine_pair`] enumerates all pairs of focal elements, accumulates the
//! product mass onto their intersection and normalizes by the non-conflicting
//! total.
//!
//! The evidential functions follow Shafer's standard definitions:
//! `bel(A) = Σ_{∅≠B⊆A} m(B)`, `pl(A) = Σ_{B∩A≠∅} m(B)`,
//! `q(A) = Σ_{B⊇A} m(B)` and `dou(A) = bel(Θ−A)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{CombinationCase, Error, Result};
use crate::frame::{Frame, Subset};

/// Allowed deviation of a mass function's total from 1.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Combination results below this mass are discarded.
pub const DUST: f64 = 1e-15;
/// Conflict at or above `1 - CONFLICT_EPS` means non-combinable.
pub const CONFLICT_EPS: f64 = 1e-12;
/// Largest frame for which the oracle accumulates into a dense table.
const DENSE_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: BTreeMap<Subset, f64>,
}

impl MassFunction {
    /// Builds a mass function, dropping zero entries.
    ///
    /// Rejects subsets outside the frame, repeated subsets, masses outside
    /// `[0, 1]`, positive mass on the empty set and totals away from 1.
    pub fn new<I>(frame: Frame, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, f64)>,
    {
        let mut focal = BTreeMap::new();
        let mut total = 0.0;
        for (subset, mass) in entries {
            frame.check_subset(subset)?;
            if !mass.is_finite() || !(0.0..=1.0 + SUM_TOLERANCE).contains(&mass) {
                return Err(Error::InvalidMass(format!(
                    "mass {mass} on {:?} is outside [0, 1]",
                    frame.subset_labels(subset)
                )));
            }
            if focal.contains_key(&subset) {
                return Err(Error::InvalidMass(format!(
                    "subset {:?} listed twice",
                    frame.subset_labels(subset)
                )));
            }
            total += mass;
            if mass == 0.0 {
                continue;
            }
            if subset.is_empty() {
                return Err(Error::InvalidMass("empty set carries mass".into()));
            }
            focal.insert(subset, mass);
        }
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidMass(format!("masses sum to {total}, not 1")));
        }
        Ok(MassFunction { frame, focal })
    }

    /// Convenience constructor taking subsets as label lists.
    pub fn from_labels(frame: &Frame, entries: &[(&[&str], f64)]) -> Result<Self> {
        let parsed = entries
            .iter()
            .map(|(labels, mass)| Ok((frame.subset(labels)?, *mass)))
            .collect::<Result<Vec<_>>>()?;
        MassFunction::new(frame.clone(), parsed)
    }

    /// Total ignorance: all mass on Θ.
    pub fn vacuous(frame: &Frame) -> Self {
        MassFunction {
            frame: frame.clone(),
            focal: BTreeMap::from([(frame.full(), 1.0)]),
        }
    }

    /// Builds from already-normalized combination output without re-validation.
    fn from_raw(frame: Frame, focal: BTreeMap<Subset, f64>) -> Self {
        MassFunction { frame, focal }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn mass(&self, subset: Subset) -> f64 {
        self.focal.get(&subset).copied().unwrap_or(0.0)
    }

    /// Focal elements in subset bit order.
    pub fn focal(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.focal.iter().map(|(s, m)| (*s, *m))
    }

    pub fn focal_count(&self) -> usize {
        self.focal.len()
    }

    /// Mass of each singleton, indexed by frame element.
    pub fn singleton_masses(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.frame.len()];
        for (s, m) in self.focal() {
            if let Some(i) = s.as_singleton() {
                out[i] = m;
            }
        }
        out
    }

    /// Singleton with the largest mass (lowest index on ties).
    pub fn best_singleton(&self) -> (usize, f64) {
        argmax(&self.singleton_masses())
    }

    /// Largest per-subset absolute difference, treating absent subsets as zero.
    pub fn max_abs_diff(&self, other: &MassFunction) -> f64 {
        let mut worst: f64 = 0.0;
        for (s, m) in self.focal() {
            worst = worst.max((m - other.mass(s)).abs());
        }
        for (s, m) in other.focal() {
            if !self.focal.contains_key(&s) {
                worst = worst.max(m);
            }
        }
        worst
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal.contains_key(&self.frame.full())
    }

    fn check_operand(&self, subset: Subset) -> Result<()> {
        self.frame.check_subset(subset)
    }

    pub fn belief(&self, a: Subset) -> Result<f64> {
        self.check_operand(a)?;
        Ok(self
            .focal()
            .filter(|(b, _)| b.is_subset_of(a))
            .map(|(_, m)| m)
            .sum())
    }

    pub fn plausibility(&self, a: Subset) -> Result<f64> {
        self.check_operand(a)?;
        Ok(self
            .focal()
            .filter(|(b, _)| !b.is_disjoint(a))
            .map(|(_, m)| m)
            .sum())
    }

    pub fn commonality(&self, a: Subset) -> Result<f64> {
        self.check_operand(a)?;
        Ok(self
            .focal()
            .filter(|(b, _)| a.is_subset_of(*b))
            .map(|(_, m)| m)
            .sum())
    }

    pub fn doubt(&self, a: Subset) -> Result<f64> {
        self.check_operand(a)?;
        self.belief(a.complement(self.frame.len()))
    }
}

/// Index and value of the maximum, lowest index winning ties.
pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Product mass landing on the empty set, `Σ_{X∩Y=∅} m1(X)m2(Y)`.
pub fn conflict(m1: &MassFunction, m2: &MassFunction) -> Result<f64> {
    m1.frame.ensure_same(&m2.frame)?;
    let mut total = 0.0;
    for (x, a) in m1.focal() {
        for (y, b) in m2.focal() {
            if x.is_disjoint(y) {
                total += a * b;
            }
        }
    }
    Ok(total)
}

/// Dempster's rule for two mass functions.
pub fn combine_pair(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction> {
    combine_pair_traced(m1, m2).map(|(m, _)| m)
}

/// Dempster's rule, also returning the normalization constant `K⁻¹`.
pub fn combine_pair_traced(m1: &MassFunction, m2: &MassFunction) -> Result<(MassFunction, f64)> {
    m1.frame.ensure_same(&m2.frame)?;
    let size = m1.frame.len();
    let left: Vec<(u32, f64)> = m1.focal().map(|(s, m)| (s.bits(), m)).collect();
    let right: Vec<(u32, f64)> = m2.focal().map(|(s, m)| (s.bits(), m)).collect();

    let (raw, conflict) = if size <= DENSE_LIMIT && left.len() * right.len() >= 1 << size {
        accumulate_dense(&left, &right, size)
    } else {
        accumulate_sparse(&left, &right)
    };

    if conflict >= 1.0 - CONFLICT_EPS {
        return Err(Error::NonCombinable {
            case: CombinationCase::General,
            conflict,
        });
    }
    let k_inv: f64 = raw.iter().map(|(_, m)| m).sum();
    if k_inv <= CONFLICT_EPS {
        return Err(Error::NonCombinable {
            case: CombinationCase::General,
            conflict,
        });
    }
    Ok((normalize(m1.frame.clone(), raw, k_inv), k_inv))
}

fn accumulate_dense(
    left: &[(u32, f64)],
    right: &[(u32, f64)],
    size: usize,
) -> (Vec<(Subset, f64)>, f64) {
    let mut table = vec![0.0f64; 1 << size];
    for &(x, a) in left {
        for &(y, b) in right {
            table[(x & y) as usize] += a * b;
        }
    }
    let conflict = table[0];
    let raw = table
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, m)| **m > 0.0)
        .map(|(bits, m)| (Subset::from_bits(bits as u32), *m))
        .collect();
    (raw, conflict)
}

fn accumulate_sparse(left: &[(u32, f64)], right: &[(u32, f64)]) -> (Vec<(Subset, f64)>, f64) {
    let mut table: HashMap<u32, f64> = HashMap::with_capacity(left.len() + right.len());
    let mut conflict = 0.0;
    for &(x, a) in left {
        for &(y, b) in right {
            let meet = x & y;
            if meet == 0 {
                conflict += a * b;
            } else {
                *table.entry(meet).or_insert(0.0) += a * b;
            }
        }
    }
    let raw = table
        .into_iter()
        .map(|(bits, m)| (Subset::from_bits(bits), m))
        .collect();
    (raw, conflict)
}

/// Scales by `1/k_inv`, drops dust and renormalizes if anything was dropped.
fn normalize(frame: Frame, raw: Vec<(Subset, f64)>, k_inv: f64) -> MassFunction {
    let mut focal = BTreeMap::new();
    let mut dropped = false;
    for (s, m) in raw {
        let v = m / k_inv;
        if v < DUST {
            dropped = true;
        } else {
            focal.insert(s, v);
        }
    }
    if dropped {
        let total: f64 = focal.values().sum();
        for v in focal.values_mut() {
            *v /= total;
        }
    }
    MassFunction::from_raw(frame, focal)
}

/// Left fold of [`combine_pair`]. A single input is returned unchanged.
pub fn combine_all(ms: &[MassFunction]) -> Result<MassFunction> {
    combine_all_traced(ms).map(|(m, _)| m)
}

/// Left fold of [`combine_pair`], returning `K⁻¹` for each step.
///
/// A failure at step `i` means combining input `i` with the fold of inputs
/// `0..i` was not possible.
pub fn combine_all_traced(ms: &[MassFunction]) -> Result<(MassFunction, Vec<f64>)> {
    let (first, rest) = ms.split_first().ok_or(Error::EmptyInput)?;
    let mut acc = first.clone();
    let mut trail = Vec::with_capacity(rest.len());
    for (offset, m) in rest.iter().enumerate() {
        let step = offset + 1;
        let (next, k_inv) = combine_pair_traced(&acc, m).map_err(|e| e.at_step(step))?;
        trail.push(k_inv);
        acc = next;
    }
    Ok((acc, trail))
}
