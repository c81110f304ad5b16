//! Randomized equivalence checks of the fast paths against the general rule.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dichotomous::{self, DichotomousMass};
use crate::error::CombinationCase;
use crate::frame::Frame;
use crate::mass;
use crate::triplet::{self, TripletMass};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    pub cases: usize,
    pub tolerance: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            cases: 1000,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub failures: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Triplet on `first` and `second` with random masses; roles follow the masses.
pub fn random_triplet_on(
    rng: &mut impl Rng,
    frame: &Frame,
    first: usize,
    second: usize,
) -> TripletMass {
    let w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let total: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let (hi, lo) = if w[0] >= w[1] {
        (w[0], w[1])
    } else {
        (w[1], w[0])
    };
    let (a1, a2) = if rng.gen_bool(0.5) {
        (first, second)
    } else {
        (second, first)
    };
    TripletMass::new(frame.clone(), a1, hi / total, a2, lo / total).expect("valid random triplet")
}

/// Random triplet pair over a frame of 3 to 10 elements with the requested overlap.
pub fn random_pair(rng: &mut impl Rng, case: CombinationCase) -> (TripletMass, TripletMass) {
    let min = if case == CombinationCase::Disjoint {
        4
    } else {
        3
    };
    let size = rng.gen_range(min..=10);
    let frame = Frame::indexed(size).expect("small frame");
    let mut idx: Vec<usize> = (0..size).collect();
    idx.shuffle(rng);
    let (second1, first2, second2) = match case {
        CombinationCase::EqualFocus => (idx[1], idx[0], idx[1]),
        CombinationCase::OneShared => (idx[1], idx[0], idx[2]),
        _ => (idx[1], idx[2], idx[3]),
    };
    let t1 = random_triplet_on(rng, &frame, idx[0], second1);
    let t2 = random_triplet_on(rng, &frame, first2, second2);
    (t1, t2)
}

fn random_dichotomous(rng: &mut impl Rng, frame: &Frame, focus: usize) -> DichotomousMass {
    let w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen::<f64>() + 1e-3];
    let total: f64 = w.iter().sum();
    DichotomousMass::new(frame.clone(), focus, w[0] / total, w[1] / total)
        .expect("valid dichotomous")
}

/// Random same-focus chain of length `l`, optionally holding one certainty or one refutation.
pub fn random_chain(rng: &mut impl Rng, l: usize, special: Option<bool>) -> Vec<DichotomousMass> {
    let frame = Frame::indexed(rng.gen_range(2..=8)).expect("small frame");
    let focus = rng.gen_range(0..frame.len());
    let mut chain: Vec<_> = (0..l)
        .map(|_| random_dichotomous(rng, &frame, focus))
        .collect();
    if let Some(certain_support) = special {
        let at = rng.gen_range(0..l);
        let (p, c) = if certain_support {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        chain[at] = DichotomousMass::new(frame, focus, p, c).expect("certain dichotomous");
    }
    chain
}

fn tally(name: &'static str, deviations: impl Iterator<Item = f64>, tolerance: f64) -> CheckResult {
    let mut result = CheckResult {
        name,
        cases: 0,
        max_deviation: 0.0,
        failures: 0,
    };
    for d in deviations {
        result.cases += 1;
        // NaN deviation marks a disagreement on combinability.
        if d.is_nan() || d > tolerance {
            result.failures += 1;
        }
        if !d.is_nan() {
            result.max_deviation = result.max_deviation.max(d);
        }
    }
    result
}

fn triplet_case(rng: &mut ChaCha8Rng, case: CombinationCase) -> f64 {
    let (t1, t2) = random_pair(rng, case);
    let exact = mass::combine_pair(&t1.to_general(), &t2.to_general());
    match (triplet::combine_pair_detailed(&t1, &t2), exact) {
        (Ok(fast), Ok(exact)) if fast.case == case => {
            fast.intermediate.to_general().max_abs_diff(&exact)
        }
        (Err(a), Err(b)) if a.is_non_combinable() && b.is_non_combinable() => 0.0,
        _ => f64::NAN,
    }
}

fn chain_case(rng: &mut ChaCha8Rng, special: Option<bool>) -> f64 {
    let l = rng.gen_range(1..=10);
    let chain = random_chain(rng, l, special);
    let images: Vec<_> = chain.iter().map(DichotomousMass::to_general).collect();
    match (
        dichotomous::combine_repeated(&chain),
        mass::combine_all(&images),
    ) {
        (Ok(fast), Ok(exact)) => fast.to_general().max_abs_diff(&exact),
        (Err(a), Err(b)) if a.is_non_combinable() && b.is_non_combinable() => 0.0,
        _ => f64::NAN,
    }
}

/// Runs every equivalence check with `config.cases` random instances each.
pub fn run_oracle_checks(config: &CheckConfig) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.cases;
    let tol = config.tolerance;
    let mut results = Vec::new();
    for (name, case) in [
        ("triplet equal-focus", CombinationCase::EqualFocus),
        ("triplet one-shared", CombinationCase::OneShared),
        ("triplet disjoint", CombinationCase::Disjoint),
    ] {
        let devs: Vec<f64> = (0..n).map(|_| triplet_case(&mut rng, case)).collect();
        results.push(tally(name, devs.into_iter(), tol));
    }
    for (name, special) in [
        ("dichotomous chains", None),
        ("dichotomous chains with p=1", Some(true)),
        ("dichotomous chains with c=1", Some(false)),
    ] {
        let devs: Vec<f64> = (0..n).map(|_| chain_case(&mut rng, special)).collect();
        results.push(tally(name, devs.into_iter(), tol));
    }
    let frame2 = Frame::indexed(2).expect("two labels");
    let devs: Vec<f64> = (0..n)
        .map(|_| {
            let t1 = random_triplet_on(&mut rng, &frame2, 0, 1);
            let t2 = random_triplet_on(&mut rng, &frame2, 0, 1);
            let tri = triplet::combine_pair_auto(&t1, &t2);
            let dich = dichotomous::combine_repeated(&[
                t1.as_dichotomous(0).unwrap(),
                t2.as_dichotomous(0).unwrap(),
            ]);
            match (tri, dich) {
                (Ok(a), Ok(b)) => a.to_general().max_abs_diff(&b.to_general()),
                (Err(_), Err(_)) => 0.0,
                _ => f64::NAN,
            }
        })
        .collect();
    results.push(tally("two-element frame degeneracy", devs.into_iter(), tol));
    results
}
