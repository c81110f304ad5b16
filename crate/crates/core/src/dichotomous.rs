//! Dichotomous mass functions and the linear-time repeated-focus combination.
//!
//! A dichotomous function only has the focal elements `{x}`, `Θ−{x}` and `Θ`,
//! summarized by `(p, c, r)`. A pool of `l` such functions sharing the focus
//! `x` combines in `O(l)`: with `P_k = Π_{i>k}(p_i + r_i)`,
//! `C_k = Π_{i>k}(c_i + r_i)` and `R_k = Π_{i<k} r_i`,
//!
//! ```text
//! p ∝ Σ_k R_k p_k P_k     c ∝ Σ_k R_k c_k C_k     r ∝ Π_i r_i
//! ```
//!
//! and `K⁻¹` is the sum of the three.

use std::collections::BTreeMap;

use crate::error::{CombinationCase, Error, Result};
use crate::frame::{Frame, Subset};
use crate::mass::{self, MassFunction, CONFLICT_EPS, SUM_TOLERANCE};

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomousMass {
    frame: Frame,
    focus: usize,
    p: f64,
    c: f64,
    r: f64,
}

fn unit(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && (-SUM_TOLERANCE..=1.0 + SUM_TOLERANCE).contains(&v) {
        Ok(v.clamp(0.0, 1.0))
    } else {
        Err(Error::InvalidMass(format!(
            "{name} = {v} is outside [0, 1]"
        )))
    }
}

impl DichotomousMass {
    /// Support `p` for `{focus}`, refutation `c`; ignorance is the remainder.
    pub fn new(frame: Frame, focus: usize, p: f64, c: f64) -> Result<Self> {
        let r = 1.0 - p - c;
        Self::with_ignorance(frame, focus, p, c, r)
    }

    pub fn with_ignorance(frame: Frame, focus: usize, p: f64, c: f64, r: f64) -> Result<Self> {
        if frame.len() < 2 {
            return Err(Error::FrameTooSmall {
                size: frame.len(),
                min: 2,
            });
        }
        frame.check_index(focus)?;
        let (p, c, r) = (unit("p", p)?, unit("c", c)?, unit("r", r)?);
        if (p + c + r - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidMass(format!(
                "p + c + r = {} is not 1",
                p + c + r
            )));
        }
        Ok(DichotomousMass {
            frame,
            focus,
            p,
            c,
            r,
        })
    }

    pub fn vacuous(frame: Frame, focus: usize) -> Result<Self> {
        Self::with_ignorance(frame, focus, 0.0, 0.0, 1.0)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn focus(&self) -> usize {
        self.focus
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Doubt `d = 1 − p = c + r`.
    pub fn d(&self) -> f64 {
        self.c + self.r
    }

    pub fn to_general(&self) -> MassFunction {
        let x = Subset::singleton(self.focus);
        let n = self.frame.len();
        MassFunction::new(
            self.frame.clone(),
            [
                (x, self.p),
                (x.complement(n), self.c),
                (Subset::full(n), self.r),
            ],
        )
        .expect("dichotomous masses form a valid mass function")
    }
}

fn check_pool(ds: &[DichotomousMass]) -> Result<&DichotomousMass> {
    let first = ds.first().ok_or(Error::EmptyInput)?;
    for d in &ds[1..] {
        first.frame.ensure_same(&d.frame)?;
        if d.focus != first.focus {
            return Err(Error::MixedFocus);
        }
    }
    Ok(first)
}

/// Unnormalized `(p, c, r)` sums over a same-focus pool.
fn pool_sums(ds: &[DichotomousMass]) -> (f64, f64, f64) {
    let l = ds.len();
    let mut support_tail = vec![1.0; l + 1];
    let mut refute_tail = vec![1.0; l + 1];
    for k in (0..l).rev() {
        support_tail[k] = support_tail[k + 1] * (ds[k].p + ds[k].r);
        refute_tail[k] = refute_tail[k + 1] * (ds[k].c + ds[k].r);
    }
    let mut ignorance_head = 1.0;
    let (mut p, mut c) = (0.0, 0.0);
    for (k, d) in ds.iter().enumerate() {
        p += ignorance_head * d.p * support_tail[k + 1];
        c += ignorance_head * d.c * refute_tail[k + 1];
        ignorance_head *= d.r;
    }
    (p, c, ignorance_head)
}

/// `K⁻¹` for a same-focus pool.
///
/// A pool containing a certainty `p_i = 1` gives `Π_{j≠i}(1 − c_j)`, one
/// containing a certain refutation `c_i = 1` gives `Π_{j≠i} d_j`.
pub fn normalization_repeated(ds: &[DichotomousMass]) -> Result<f64> {
    check_pool(ds)?;
    if let Some(i) = ds.iter().position(|d| d.p == 1.0) {
        return Ok(product_except(ds, i, |d| 1.0 - d.c));
    }
    if let Some(i) = ds.iter().position(|d| d.c == 1.0) {
        return Ok(product_except(ds, i, DichotomousMass::d));
    }
    let (p, c, r) = pool_sums(ds);
    Ok(p + c + r)
}

fn product_except(ds: &[DichotomousMass], skip: usize, f: impl Fn(&DichotomousMass) -> f64) -> f64 {
    ds.iter()
        .enumerate()
        .filter(|(j, _)| *j != skip)
        .map(|(_, d)| f(d))
        .product()
}

/// Orthogonal sum of a same-focus pool; the result keeps the focus.
pub fn combine_repeated(ds: &[DichotomousMass]) -> Result<DichotomousMass> {
    combine_repeated_traced(ds).map(|(d, _)| d)
}

/// As [`combine_repeated`], also returning `K⁻¹`.
pub fn combine_repeated_traced(ds: &[DichotomousMass]) -> Result<(DichotomousMass, f64)> {
    let first = check_pool(ds)?;
    let (p, c, r) = pool_sums(ds);
    let k_inv = p + c + r;
    if k_inv <= CONFLICT_EPS {
        return Err(Error::NonCombinable {
            case: CombinationCase::RepeatedFocus,
            conflict: 1.0 - k_inv,
        });
    }
    let combined = DichotomousMass {
        frame: first.frame.clone(),
        focus: first.focus,
        p: p / k_inv,
        c: c / k_inv,
        r: r / k_inv,
    };
    Ok((combined, k_inv))
}

/// Combines dichotomous functions with arbitrary focuses.
///
/// Same-focus pools go through [`combine_repeated`]; the pooled results are
/// then combined with the general orthogonal sum.
pub fn combine_pooled(ds: &[DichotomousMass]) -> Result<MassFunction> {
    let first = ds.first().ok_or(Error::EmptyInput)?;
    let mut pools: BTreeMap<usize, Vec<DichotomousMass>> = BTreeMap::new();
    for d in ds {
        first.frame.ensure_same(&d.frame)?;
        pools.entry(d.focus).or_default().push(d.clone());
    }
    let pooled = pools
        .values()
        .map(|pool| combine_repeated(pool).map(|d| d.to_general()))
        .collect::<Result<Vec<_>>>()?;
    mass::combine_all(&pooled)
}
