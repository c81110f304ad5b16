//! Triplet mass functions and their combination.
//!
//! A triplet keeps only the two strongest singletons `A1`, `A2` of a piece of
//! evidence plus the whole frame Θ, which absorbs everything else. The
//! outstanding rule ([`outstanding`]) builds one from arbitrary singleton
//! masses.
//!
//! Two triplets combine in constant time. The closed form depends on how many
//! singletons the two focus pairs share:
//!
//! | shared | function               | focal elements of the exact sum |
//! |--------|------------------------|---------------------------------|
//! | 2      | [`combine_equal`]      | `{x}, {y}, Θ`                   |
//! | 1      | [`combine_one_shared`] | `{x}, {y}, {z}, Θ`              |
//! | 0      | [`combine_disjoint`]   | `{x}, {y}, {u}, {v}, Θ`         |
//!
//! The exact sum is returned as a [`MultiFocusIntermediate`]; refocusing it
//! with the outstanding rule gives back a triplet. Refocusing is lossy: the
//! weakest singletons are pooled into Θ. The top singleton is never changed.

use std::collections::HashSet;

use crate::dichotomous::DichotomousMass;
use crate::error::{CombinationCase, Error, Result};
use crate::frame::{Frame, Subset};
use crate::mass::{MassFunction, CONFLICT_EPS, SUM_TOLERANCE};

#[derive(Clone, Debug, PartialEq)]
pub struct TripletMass {
    frame: Frame,
    a1: usize,
    a2: usize,
    m1: f64,
    m2: f64,
    mt: f64,
}

impl TripletMass {
    /// Triplet with `m1` on `{a1}`, `m2` on `{a2}` and the rest on Θ.
    ///
    /// Requires `a1 ≠ a2` and `m1 ≥ m2`.
    pub fn new(frame: Frame, a1: usize, m1: f64, a2: usize, m2: f64) -> Result<Self> {
        if frame.len() < 2 {
            return Err(Error::FrameTooSmall {
                size: frame.len(),
                min: 2,
            });
        }
        frame.check_index(a1)?;
        frame.check_index(a2)?;
        if a1 == a2 {
            return Err(Error::InvalidMass(format!(
                "both focuses are {:?}",
                frame.label(a1).unwrap_or_default()
            )));
        }
        for (name, v) in [("m1", m1), ("m2", m2)] {
            if !v.is_finite() || !(0.0..=1.0 + SUM_TOLERANCE).contains(&v) {
                return Err(Error::InvalidMass(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        if m1 + m2 > 1.0 + SUM_TOLERANCE {
            return Err(Error::InvalidMass(format!(
                "m1 + m2 = {} exceeds 1",
                m1 + m2
            )));
        }
        if m1 < m2 {
            return Err(Error::InvalidMass(format!(
                "first focus mass {m1} is below second focus mass {m2}"
            )));
        }
        Ok(Self::assemble(frame, a1, m1, a2, m2, 1.0 - m1 - m2))
    }

    fn assemble(frame: Frame, a1: usize, m1: f64, a2: usize, m2: f64, mt: f64) -> Self {
        TripletMass {
            frame,
            a1,
            a2,
            m1: m1.min(1.0),
            m2: m2.min(1.0),
            mt: mt.clamp(0.0, 1.0),
        }
    }

    /// All mass on Θ; the focuses are the first two frame elements.
    pub fn vacuous(frame: &Frame) -> Result<Self> {
        Self::new(frame.clone(), 0, 0.0, 1, 0.0)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn a1(&self) -> usize {
        self.a1
    }

    pub fn a2(&self) -> usize {
        self.a2
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn mt(&self) -> f64 {
        self.mt
    }

    pub fn focuses(&self) -> [usize; 2] {
        [self.a1, self.a2]
    }

    /// Mass on the singleton `{index}` (zero unless it is a focus).
    pub fn mass_on(&self, index: usize) -> f64 {
        if index == self.a1 {
            self.m1
        } else if index == self.a2 {
            self.m2
        } else {
            0.0
        }
    }

    pub fn to_general(&self) -> MassFunction {
        MassFunction::new(
            self.frame.clone(),
            [
                (Subset::singleton(self.a1), self.m1),
                (Subset::singleton(self.a2), self.m2),
                (self.frame.full(), self.mt),
            ],
        )
        .expect("triplet masses form a valid mass function")
    }

    /// Over a two-element frame a triplet is a dichotomous function on either element.
    pub fn as_dichotomous(&self, focus: usize) -> Result<DichotomousMass> {
        if self.frame.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "triplet over {} elements is not dichotomous",
                self.frame.len()
            )));
        }
        self.frame.check_index(focus)?;
        DichotomousMass::with_ignorance(
            self.frame.clone(),
            focus,
            self.mass_on(focus),
            self.mass_on(1 - focus),
            self.mt,
        )
    }
}

/// The outstanding rule: keep the two largest singleton masses, pool the rest on Θ.
///
/// `singleton_masses[i]` is the mass of frame element `i`. Ties go to the lower index.
pub fn outstanding(frame: &Frame, singleton_masses: &[f64]) -> Result<TripletMass> {
    if frame.len() < 2 {
        return Err(Error::FrameTooSmall {
            size: frame.len(),
            min: 2,
        });
    }
    if singleton_masses.len() != frame.len() {
        return Err(Error::InvalidMass(format!(
            "{} singleton masses for a frame of {}",
            singleton_masses.len(),
            frame.len()
        )));
    }
    if let Some(bad) = singleton_masses
        .iter()
        .find(|m| !m.is_finite() || **m < 0.0)
    {
        return Err(Error::InvalidMass(format!("negative singleton mass {bad}")));
    }
    let total: f64 = singleton_masses.iter().sum();
    if total > 1.0 + SUM_TOLERANCE {
        return Err(Error::InvalidMass(format!(
            "singleton masses sum to {total}"
        )));
    }
    let candidates: Vec<(usize, f64)> = singleton_masses.iter().copied().enumerate().collect();
    let [(a1, m1), (a2, m2)] = top_two(&candidates);
    Ok(TripletMass::assemble(
        frame.clone(),
        a1,
        m1,
        a2,
        m2,
        1.0 - m1 - m2,
    ))
}

/// Two largest `(index, mass)` entries; equal masses are ordered by index.
fn top_two(candidates: &[(usize, f64)]) -> [(usize, f64); 2] {
    let better = |a: (usize, f64), b: (usize, f64)| a.1 > b.1 || (a.1 == b.1 && a.0 < b.0);
    let mut first = candidates[0];
    let mut second: Option<(usize, f64)> = None;
    for &c in &candidates[1..] {
        if better(c, first) {
            second = Some(first);
            first = c;
        } else if second.is_none_or(|s| better(c, s)) {
            second = Some(c);
        }
    }
    [first, second.expect("at least two candidates")]
}

/// An exact pairwise sum with singleton focal elements plus Θ.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiFocusIntermediate {
    frame: Frame,
    singletons: Vec<(usize, f64)>,
    theta: f64,
    k_inv: f64,
}

impl MultiFocusIntermediate {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// `(element, mass)` pairs; zero masses are kept.
    pub fn singletons(&self) -> &[(usize, f64)] {
        &self.singletons
    }

    pub fn mass_on(&self, index: usize) -> f64 {
        self.singletons
            .iter()
            .find(|(i, _)| *i == index)
            .map_or(0.0, |(_, m)| *m)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Normalization constant of the pairwise sum.
    pub fn k_inv(&self) -> f64 {
        self.k_inv
    }

    pub fn to_general(&self) -> MassFunction {
        let entries = self
            .singletons
            .iter()
            .map(|&(i, m)| (Subset::singleton(i), m))
            .chain([(self.frame.full(), self.theta)]);
        MassFunction::new(self.frame.clone(), entries).expect("intermediate sums to one")
    }

    /// Outstanding rule over the singletons; the others fall into Θ.
    pub fn refocus(&self) -> TripletMass {
        let [(a1, m1), (a2, m2)] = top_two(&self.singletons);
        let pooled: f64 = self
            .singletons
            .iter()
            .filter(|(i, _)| *i != a1 && *i != a2)
            .map(|(_, m)| m)
            .sum();
        TripletMass::assemble(self.frame.clone(), a1, m1, a2, m2, self.theta + pooled)
    }
}

/// Result of one pairwise triplet combination, with both stages exposed.
#[derive(Clone, Debug, PartialEq)]
pub struct PairOutcome {
    pub case: CombinationCase,
    pub intermediate: MultiFocusIntermediate,
    pub triplet: TripletMass,
}

/// Number of shared singletons between the two focus pairs.
pub fn shared_focuses(t1: &TripletMass, t2: &TripletMass) -> usize {
    t1.focuses()
        .iter()
        .filter(|a| t2.focuses().contains(a))
        .count()
}

fn expect_overlap(
    t1: &TripletMass,
    t2: &TripletMass,
    shared: usize,
    expected: &'static str,
) -> Result<()> {
    t1.frame.ensure_same(&t2.frame)?;
    let found = shared_focuses(t1, t2);
    if found == shared {
        Ok(())
    } else {
        Err(Error::OverlapMismatch { expected, found })
    }
}

fn finish(
    case: CombinationCase,
    frame: &Frame,
    conflict: f64,
    singletons: Vec<(usize, f64)>,
    theta: f64,
) -> Result<PairOutcome> {
    let k_inv = singletons.iter().map(|(_, m)| m).sum::<f64>() + theta;
    if conflict >= 1.0 - CONFLICT_EPS || k_inv <= CONFLICT_EPS {
        return Err(Error::NonCombinable { case, conflict });
    }
    let intermediate = MultiFocusIntermediate {
        frame: frame.clone(),
        singletons: singletons
            .into_iter()
            .map(|(i, m)| (i, m / k_inv))
            .collect(),
        theta: theta / k_inv,
        k_inv,
    };
    let triplet = intermediate.refocus();
    Ok(PairOutcome {
        case,
        intermediate,
        triplet,
    })
}

/// Both triplets focus on the same two singletons (in either role order).
///
/// The sum is again a triplet on those singletons; the roles swap if the
/// runner-up overtakes.
pub fn combine_equal(t1: &TripletMass, t2: &TripletMass) -> Result<TripletMass> {
    combine_equal_detailed(t1, t2).map(|o| o.triplet)
}

pub fn combine_equal_detailed(t1: &TripletMass, t2: &TripletMass) -> Result<PairOutcome> {
    expect_overlap(t1, t2, 2, "two")?;
    let (x, y) = (t1.a1, t1.a2);
    let (p1x, p1y, p1t) = (t1.m1, t1.m2, t1.mt);
    let (p2x, p2y, p2t) = (t2.mass_on(x), t2.mass_on(y), t2.mt);
    let conflict = p1x * p2y + p1y * p2x;
    let fx = p1x * p2x + p1x * p2t + p1t * p2x;
    let fy = p1y * p2y + p1y * p2t + p1t * p2y;
    finish(
        CombinationCase::EqualFocus,
        &t1.frame,
        conflict,
        vec![(x, fx), (y, fy)],
        p1t * p2t,
    )
}

/// The triplets share exactly one singleton, in any role position.
///
/// With `x` shared, `y` private to `t1` and `z` private to `t2`, the exact
/// sum has focal elements `{x}, {y}, {z}, Θ`.
pub fn combine_one_shared(
    t1: &TripletMass,
    t2: &TripletMass,
) -> Result<(TripletMass, MultiFocusIntermediate)> {
    combine_one_shared_detailed(t1, t2).map(|o| (o.triplet, o.intermediate))
}

pub fn combine_one_shared_detailed(t1: &TripletMass, t2: &TripletMass) -> Result<PairOutcome> {
    expect_overlap(t1, t2, 1, "one")?;
    let x = if t2.focuses().contains(&t1.a1) {
        t1.a1
    } else {
        t1.a2
    };
    let y = if x == t1.a1 { t1.a2 } else { t1.a1 };
    let z = if x == t2.a1 { t2.a2 } else { t2.a1 };
    let (p1x, p1y, p1t) = (t1.mass_on(x), t1.mass_on(y), t1.mt);
    let (p2x, p2z, p2t) = (t2.mass_on(x), t2.mass_on(z), t2.mt);
    let conflict = p1x * p2z + p1y * p2z + p1y * p2x;
    let fx = p1x * p2x + p1x * p2t + p1t * p2x;
    let fy = p1y * p2t;
    let fz = p1t * p2z;
    finish(
        CombinationCase::OneShared,
        &t1.frame,
        conflict,
        vec![(x, fx), (y, fy), (z, fz)],
        p1t * p2t,
    )
}

/// The triplets share no singleton; the exact sum has five focal elements.
pub fn combine_disjoint(
    t1: &TripletMass,
    t2: &TripletMass,
) -> Result<(TripletMass, MultiFocusIntermediate)> {
    combine_disjoint_detailed(t1, t2).map(|o| (o.triplet, o.intermediate))
}

pub fn combine_disjoint_detailed(t1: &TripletMass, t2: &TripletMass) -> Result<PairOutcome> {
    expect_overlap(t1, t2, 0, "no")?;
    let (x, y, u, v) = (t1.a1, t1.a2, t2.a1, t2.a2);
    let (p1x, p1y, p1t) = (t1.m1, t1.m2, t1.mt);
    let (p2u, p2v, p2t) = (t2.m1, t2.m2, t2.mt);
    let conflict = p1x * p2u + p1x * p2v + p1y * p2u + p1y * p2v;
    finish(
        CombinationCase::Disjoint,
        &t1.frame,
        conflict,
        vec![
            (x, p1x * p2t),
            (y, p1y * p2t),
            (u, p1t * p2u),
            (v, p1t * p2v),
        ],
        p1t * p2t,
    )
}

/// Combines any two triplets over the same frame, choosing the closed form by overlap.
pub fn combine_pair_auto(t1: &TripletMass, t2: &TripletMass) -> Result<TripletMass> {
    combine_pair_detailed(t1, t2).map(|o| o.triplet)
}

pub fn combine_pair_detailed(t1: &TripletMass, t2: &TripletMass) -> Result<PairOutcome> {
    t1.frame.ensure_same(&t2.frame)?;
    match shared_focuses(t1, t2) {
        2 => combine_equal_detailed(t1, t2),
        1 => combine_one_shared_detailed(t1, t2),
        _ => combine_disjoint_detailed(t1, t2),
    }
}

/// `((t0 ⊕ t1) ⊕ t2) ⊕ …`, refocusing after every step.
///
/// The result depends on input order once refocusing discards mass.
pub fn fold_combine(ts: &[TripletMass]) -> Result<TripletMass> {
    fold_combine_traced(ts).map(|(t, _)| t)
}

/// As [`fold_combine`], also returning each step's `K⁻¹`.
pub fn fold_combine_traced(ts: &[TripletMass]) -> Result<(TripletMass, Vec<f64>)> {
    let (first, rest) = ts.split_first().ok_or(Error::EmptyInput)?;
    let mut acc = first.clone();
    let mut trail = Vec::with_capacity(rest.len());
    for (offset, t) in rest.iter().enumerate() {
        let outcome = combine_pair_detailed(&acc, t).map_err(|e| e.at_step(offset + 1))?;
        trail.push(outcome.intermediate.k_inv);
        acc = outcome.triplet;
    }
    Ok((acc, trail))
}

/// Unnormalized terms of the approximate many-triplet sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxTerms {
    /// Numerator for the shared focus `{x}`.
    pub shared: f64,
    /// Numerator for the surviving second focus `{y1}`.
    pub runner_up: f64,
    /// Numerator for Θ, `Π r_i`.
    pub theta: f64,
    pub k_inv: f64,
}

/// Approximate sum of `l ≥ 2` triplets sharing the first focus `x` with
/// pairwise distinct second focuses `y_i`.
///
/// With `p_i`, `c_i`, `r_i` the masses of `{x}`, `{y_i}`, Θ in triplet `i`:
///
/// ```text
/// m({x})  = K (Π p_i + Σ_i r_i Π_{j≠i} p_j + λ)
/// m({y1}) = K c_1 Π_{i≥2} r_i
/// K⁻¹     = Π p_i + Σ_i r_i Π_{j≠i} (p_j + λ) + Σ_i c_i Π_{j≠i} r_j + Π r_i
/// ```
///
/// The shared-focus numerator keeps only the terms in which at most one
/// function votes Θ, which is why this is an approximation for `l > 2`.
/// The other `y_i` enter only through `K⁻¹`; the returned triplet pools their
/// share and `Π r_i` on Θ. Results outside `[0, 1]` are reported as
/// [`Error::ApproximationBreakdown`].
pub fn approx_combine(ts: &[TripletMass], lambda: f64) -> Result<TripletMass> {
    approx_combine_detailed(ts, lambda).map(|(t, _)| t)
}

pub fn approx_combine_detailed(
    ts: &[TripletMass],
    lambda: f64,
) -> Result<(TripletMass, ApproxTerms)> {
    if ts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "approximate combination needs at least two triplets, got {}",
            ts.len()
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda = {lambda}")));
    }
    let first = &ts[0];
    let x = first.a1;
    let mut seen = HashSet::with_capacity(ts.len());
    for (i, t) in ts.iter().enumerate() {
        first.frame.ensure_same(&t.frame)?;
        if t.a1 != x {
            return Err(Error::InvalidParameter(format!(
                "triplet {i} does not have the shared first focus {:?}",
                first.frame.label(x).unwrap_or_default()
            )));
        }
        if !seen.insert(t.a2) {
            return Err(Error::InvalidParameter(format!(
                "triplet {i} repeats second focus {:?}",
                first.frame.label(t.a2).unwrap_or_default()
            )));
        }
    }

    let p: Vec<f64> = ts.iter().map(|t| t.m1).collect();
    let c: Vec<f64> = ts.iter().map(|t| t.m2).collect();
    let r: Vec<f64> = ts.iter().map(|t| t.mt).collect();
    let p_lambda: Vec<f64> = p.iter().map(|v| v + lambda).collect();

    let prod_p: f64 = p.iter().product();
    let shared = prod_p + weighted_leave_one_out(&r, &p) + lambda;
    let runner_up = c[0] * r[1..].iter().product::<f64>();
    let theta: f64 = r.iter().product();
    let k_inv =
        prod_p + weighted_leave_one_out(&r, &p_lambda) + weighted_leave_one_out(&c, &r) + theta;

    if k_inv.is_nan() || k_inv <= CONFLICT_EPS {
        return Err(Error::ApproximationBreakdown(format!("K⁻¹ = {k_inv}")));
    }
    let (mx, my) = (shared / k_inv, runner_up / k_inv);
    let mt = 1.0 - mx - my;
    for (name, v) in [("m({x})", mx), ("m({y1})", my), ("m(Θ)", mt)] {
        if !(-SUM_TOLERANCE..=1.0 + SUM_TOLERANCE).contains(&v) {
            return Err(Error::ApproximationBreakdown(format!("{name} = {v}")));
        }
    }
    let terms = ApproxTerms {
        shared,
        runner_up,
        theta,
        k_inv,
    };
    let candidates = [(x, mx.max(0.0)), (first.a2, my.max(0.0))];
    let [(a1, m1), (a2, m2)] = top_two(&candidates);
    Ok((
        TripletMass::assemble(first.frame.clone(), a1, m1, a2, m2, mt),
        terms,
    ))
}

/// `Σ_i w_i Π_{j≠i} v_j` in linear time, without dividing by `v_i`.
fn weighted_leave_one_out(w: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    let mut tail = vec![1.0; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] * v[i];
    }
    let mut head = 1.0;
    let mut total = 0.0;
    for i in 0..n {
        total += w[i] * head * tail[i + 1];
        head *= v[i];
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass::combine_pair;
    use approx::assert_abs_diff_eq;

    fn frame() -> Frame {
        Frame::new(["x", "y", "z", "u", "v"]).unwrap()
    }

    fn t(a1: usize, m1: f64, a2: usize, m2: f64) -> TripletMass {
        TripletMass::new(frame(), a1, m1, a2, m2).unwrap()
    }

    #[test]
    fn outstanding_examples() {
        let f = Frame::new(["a", "b", "c"]).unwrap();
        let tr = outstanding(&f, &[0.5, 0.3, 0.2]).unwrap();
        assert_eq!((tr.a1(), tr.a2()), (0, 1));
        assert_abs_diff_eq!(tr.mt(), 0.2, epsilon = 1e-12);

        let tie = outstanding(&f, &[0.4, 0.4, 0.1]).unwrap();
        assert_eq!((tie.a1(), tie.a2()), (0, 1));
        assert_abs_diff_eq!(tie.mt(), 0.2, epsilon = 1e-12);

        let late_tie = outstanding(&f, &[0.1, 0.4, 0.4]).unwrap();
        assert_eq!((late_tie.a1(), late_tie.a2()), (1, 2));

        let zero = outstanding(&f, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            (zero.a1(), zero.a2(), zero.m1(), zero.m2(), zero.mt()),
            (0, 1, 0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn outstanding_errors() {
        let f = Frame::new(["a", "b", "c"]).unwrap();
        assert!(outstanding(&Frame::new(["a"]).unwrap(), &[1.0]).is_err());
        assert!(outstanding(&f, &[0.5, -0.1, 0.1]).is_err());
        assert!(outstanding(&f, &[0.5, 0.5, 0.1]).is_err());
        assert!(outstanding(&f, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn constructor_enforces_ordering() {
        assert!(TripletMass::new(frame(), 0, 0.2, 1, 0.3).is_err());
        assert!(TripletMass::new(frame(), 0, 0.3, 0, 0.3).is_err());
        assert!(TripletMass::new(frame(), 0, 0.7, 1, 0.4).is_err());
        assert!(TripletMass::new(frame(), 0, 0.3, 9, 0.3).is_err());
    }

    #[test]
    fn equal_focus_example() {
        let a = t(0, 0.6, 1, 0.3);
        let out = combine_equal_detailed(&a, &a).unwrap();
        assert_abs_diff_eq!(out.intermediate.k_inv(), 0.64, epsilon = 1e-12);
        assert_abs_diff_eq!(out.triplet.m1(), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(out.triplet.m2(), 0.234375, epsilon = 1e-12);
        assert_abs_diff_eq!(out.triplet.mt(), 0.015625, epsilon = 1e-12);
    }

    #[test]
    fn equal_focus_crossed_roles() {
        let a = t(0, 0.5, 1, 0.2);
        let b = t(1, 0.6, 0, 0.3);
        let fast = combine_equal(&a, &b).unwrap();
        let slow = combine_pair(&a.to_general(), &b.to_general()).unwrap();
        assert!(fast.to_general().max_abs_diff(&slow) < 1e-12);
        // y overtakes x: 0.2·0.6 + 0.2·0.1 + 0.3·0.6 vs 0.5·0.3 + 0.5·0.1 + 0.3·0.3
        assert_eq!(fast.a1(), 1);
    }

    #[test]
    fn vacuous_is_neutral_for_equal_focus() {
        let a = t(0, 0.45, 1, 0.3);
        let out = combine_equal(&a, &TripletMass::vacuous(&frame()).unwrap()).unwrap();
        assert_abs_diff_eq!(out.m1(), a.m1(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.m2(), a.m2(), epsilon = 1e-15);
        assert_eq!(out.focuses(), a.focuses());
    }

    #[test]
    fn equal_focus_total_conflict() {
        let a = t(0, 1.0, 1, 0.0);
        let b = t(1, 1.0, 0, 0.0);
        assert!(matches!(
            combine_equal(&a, &b),
            Err(Error::NonCombinable {
                case: CombinationCase::EqualFocus,
                ..
            })
        ));
    }

    #[test]
    fn one_shared_example() {
        let a = t(0, 0.5, 1, 0.3);
        let b = t(0, 0.4, 2, 0.4);
        let (tr, mid) = combine_one_shared(&a, &b).unwrap();
        assert_abs_diff_eq!(mid.k_inv(), 0.56, epsilon = 1e-12);
        assert_abs_diff_eq!(mid.mass_on(0), 0.678571, epsilon = 1e-6);
        assert_abs_diff_eq!(mid.mass_on(1), 0.107143, epsilon = 1e-6);
        assert_abs_diff_eq!(mid.mass_on(2), 0.142857, epsilon = 1e-6);
        assert_abs_diff_eq!(mid.theta(), 0.071429, epsilon = 1e-6);
        assert_eq!((tr.a1(), tr.a2()), (0, 2));
        assert_abs_diff_eq!(tr.m1(), 0.678571, epsilon = 1e-6);
        assert_abs_diff_eq!(tr.m2(), 0.142857, epsilon = 1e-6);
        assert_abs_diff_eq!(tr.mt(), 0.178571, epsilon = 1e-6);
    }

    #[test]
    fn one_shared_crossed_positions() {
        // Shared element is t1.a2 and t2.a1.
        let a = t(1, 0.5, 0, 0.3);
        let b = t(0, 0.4, 2, 0.35);
        let (_, mid) = combine_one_shared(&a, &b).unwrap();
        let slow = combine_pair(&a.to_general(), &b.to_general()).unwrap();
        assert!(mid.to_general().max_abs_diff(&slow) < 1e-12);
    }

    #[test]
    fn one_shared_with_vacuous() {
        let a = t(0, 0.5, 1, 0.3);
        let vac = TripletMass::new(frame(), 0, 0.0, 2, 0.0).unwrap();
        let (tr, mid) = combine_one_shared(&a, &vac).unwrap();
        assert!(mid.to_general().max_abs_diff(&a.to_general()) < 1e-15);
        assert_eq!(tr.focuses(), a.focuses());
        assert_abs_diff_eq!(tr.m1(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn disjoint_example() {
        let a = t(0, 0.5, 1, 0.3);
        let b = t(3, 0.4, 4, 0.3);
        let (tr, mid) = combine_disjoint(&a, &b).unwrap();
        assert_abs_diff_eq!(mid.k_inv(), 0.44, epsilon = 1e-12);
        assert_abs_diff_eq!(mid.mass_on(0), 0.340909, epsilon = 1e-6);
        assert_abs_diff_eq!(mid.mass_on(1), 0.204545, epsilon = 1e-6);
        assert_abs_diff_eq!(mid.mass_on(3), 0.181818, epsilon = 1e-6);
        assert_abs_diff_eq!(mid.mass_on(4), 0.136364, epsilon = 1e-6);
        assert_abs_diff_eq!(mid.theta(), 0.136364, epsilon = 1e-6);
        assert_eq!((tr.a1(), tr.a2()), (0, 1));
        assert_abs_diff_eq!(tr.mt(), 0.454545, epsilon = 1e-6);

        let (_, swapped) = combine_disjoint(&b, &a).unwrap();
        assert!(mid.to_general().max_abs_diff(&swapped.to_general()) < 1e-12);
    }

    #[test]
    fn disjoint_without_ignorance_is_not_combinable() {
        let a = t(0, 0.6, 1, 0.4);
        let b = t(2, 0.7, 3, 0.3);
        assert!(matches!(
            combine_disjoint(&a, &b),
            Err(Error::NonCombinable {
                case: CombinationCase::Disjoint,
                ..
            })
        ));
    }

    #[test]
    fn wrong_overlap_is_rejected() {
        let a = t(0, 0.5, 1, 0.3);
        assert!(matches!(
            combine_equal(&a, &t(0, 0.5, 2, 0.3)),
            Err(Error::OverlapMismatch { found: 1, .. })
        ));
        assert!(matches!(
            combine_one_shared(&a, &a),
            Err(Error::OverlapMismatch { found: 2, .. })
        ));
        assert!(matches!(
            combine_disjoint(&a, &t(1, 0.5, 2, 0.3)),
            Err(Error::OverlapMismatch { found: 1, .. })
        ));
    }

    #[test]
    fn dispatch_matches_case_functions() {
        let a = t(0, 0.5, 1, 0.3);
        let cases = [
            (t(1, 0.4, 0, 0.2), CombinationCase::EqualFocus),
            (t(2, 0.4, 1, 0.2), CombinationCase::OneShared),
            (t(3, 0.4, 4, 0.2), CombinationCase::Disjoint),
        ];
        for (b, case) in cases {
            let out = combine_pair_detailed(&a, &b).unwrap();
            assert_eq!(out.case, case);
            let direct = match case {
                CombinationCase::EqualFocus => combine_equal(&a, &b).unwrap(),
                CombinationCase::OneShared => combine_one_shared(&a, &b).unwrap().0,
                _ => combine_disjoint(&a, &b).unwrap().0,
            };
            assert_eq!(out.triplet, direct);
            assert_eq!(combine_pair_auto(&a, &b).unwrap(), direct);
        }
    }

    #[test]
    fn fold_examples() {
        let a = t(0, 0.5, 1, 0.3);
        let vac = TripletMass::vacuous(&frame()).unwrap();
        assert_eq!(fold_combine(std::slice::from_ref(&a)).unwrap(), a);
        let folded = fold_combine(&[a.clone(), vac.clone(), vac]).unwrap();
        assert!(folded.to_general().max_abs_diff(&a.to_general()) < 1e-15);
        assert!(matches!(fold_combine(&[]), Err(Error::EmptyInput)));

        let certain_x = t(0, 1.0, 1, 0.0);
        let certain_z = t(2, 1.0, 3, 0.0);
        match fold_combine(&[a, certain_x, certain_z]) {
            Err(Error::StepFailed { step: 2, source }) => assert!(source.is_non_combinable()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn approx_two_functions_follow_worked_expansion() {
        let (p1, c1, r1) = (0.5, 0.3, 0.2);
        let (p2, c2, r2) = (0.4, 0.4, 0.2);
        let ts = [t(0, p1, 1, c1), t(0, p2, 2, c2)];
        let (tr, terms) = approx_combine_detailed(&ts, 0.0).unwrap();
        let shared = p1 * p2 + p1 * r2 + p2 * r1;
        let k_inv = shared + c1 * r2 + r1 * r2 + c2 * r1;
        assert_abs_diff_eq!(terms.k_inv, k_inv, epsilon = 1e-15);
        assert_abs_diff_eq!(tr.m1(), shared / k_inv, epsilon = 1e-12);
        assert_abs_diff_eq!(tr.m2(), c1 * r2 / k_inv, epsilon = 1e-12);
        assert_abs_diff_eq!(terms.theta / k_inv, r1 * r2 / k_inv, epsilon = 1e-15);
        assert_eq!((tr.a1(), tr.a2()), (0, 1));
    }

    #[test]
    fn approx_vacuous_inputs() {
        let ts = [
            TripletMass::new(frame(), 0, 0.0, 1, 0.0).unwrap(),
            TripletMass::new(frame(), 0, 0.0, 2, 0.0).unwrap(),
            TripletMass::new(frame(), 0, 0.0, 3, 0.0).unwrap(),
        ];
        let out = approx_combine(&ts, 0.0).unwrap();
        assert_eq!((out.m1(), out.m2()), (0.0, 0.0));
        assert_abs_diff_eq!(out.mt(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn approx_preconditions() {
        let a = t(0, 0.5, 1, 0.3);
        assert!(approx_combine(std::slice::from_ref(&a), 0.0).is_err());
        assert!(approx_combine(&[a.clone(), t(2, 0.5, 1, 0.3)], 0.0).is_err());
        assert!(approx_combine(&[a.clone(), t(0, 0.4, 1, 0.3)], 0.0).is_err());
        assert!(matches!(
            approx_combine(&[a.clone(), t(0, 0.4, 2, 0.3)], 5.0),
            Err(Error::ApproximationBreakdown(_))
        ));
    }

    #[test]
    fn leave_one_out_handles_zeros() {
        let w = [1.0, 2.0, 3.0];
        let v = [0.0, 0.5, 0.25];
        assert_abs_diff_eq!(weighted_leave_one_out(&w, &v), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn two_element_frame_is_dichotomous() {
        let f = Frame::new(["a", "b"]).unwrap();
        let tr = TripletMass::new(f, 1, 0.5, 0, 0.2).unwrap();
        let d = tr.as_dichotomous(0).unwrap();
        assert_eq!((d.p(), d.c()), (0.2, 0.5));
        assert!(d.to_general().max_abs_diff(&tr.to_general()) < 1e-15);
        assert!(t(0, 0.5, 1, 0.2).as_dichotomous(0).is_err());
    }
}
