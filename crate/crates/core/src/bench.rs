//! Runtime scaling measurements.
//!
//! Each row times one combination method on a seeded workload of `n` pieces of
//! evidence. Workload generation is excluded from the timing; warm-up runs are
//! discarded. `mean_ns` holds the median of the repetitions.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dichotomous::{self, DichotomousMass};
use crate::error::{Error, Result};
use crate::frame::{Frame, Subset};
use crate::fusion::{self, FusionConfig, Method, ScoreMatrix};
use crate::mass::{self, MassFunction};
use crate::triplet::{self, TripletMass};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub n_evidences: usize,
    pub frame_size: usize,
    pub mean_ns: f64,
    pub std_ns: f64,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub method: Method,
    pub sizes: Vec<usize>,
    pub frame_size: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub warmup: usize,
    pub oracle_cap: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            method: Method::Triplet,
            sizes: (1..=10).map(|i| i * 100).collect(),
            frame_size: 20,
            seed: 0,
            repetitions: 10,
            warmup: 3,
            oracle_cap: 16,
        }
    }
}

enum Workload {
    Triplet(Vec<TripletMass>),
    Dichotomous(Vec<DichotomousMass>),
    Oracle(Vec<MassFunction>),
}

impl Workload {
    fn run(&self) -> Result<()> {
        match self {
            Workload::Triplet(ts) => {
                black_box(triplet::fold_combine(black_box(ts))?);
            }
            Workload::Dichotomous(ds) => {
                black_box(dichotomous::combine_repeated(black_box(ds))?);
            }
            Workload::Oracle(ms) => {
                black_box(mass::combine_all(black_box(ms))?);
            }
        }
        Ok(())
    }
}

/// Random triplet with at least 5% of its mass on Θ.
pub fn random_triplet(rng: &mut impl Rng, frame: &Frame) -> TripletMass {
    let a1 = rng.gen_range(0..frame.len());
    let mut a2 = rng.gen_range(0..frame.len() - 1);
    if a2 >= a1 {
        a2 += 1;
    }
    let w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen::<f64>() + 0.05];
    let total: f64 = w.iter().sum();
    let (hi, lo) = if w[0] >= w[1] {
        (w[0], w[1])
    } else {
        (w[1], w[0])
    };
    TripletMass::new(frame.clone(), a1, hi / total, a2, lo / total).expect("valid random triplet")
}

/// Random same-focus dichotomous function with at least 5% ignorance.
pub fn random_dichotomous(rng: &mut impl Rng, frame: &Frame, focus: usize) -> DichotomousMass {
    let w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen::<f64>() + 0.05];
    let total: f64 = w.iter().sum();
    DichotomousMass::new(frame.clone(), focus, w[0] / total, w[1] / total)
        .expect("valid random dichotomous")
}

/// Random mass function with every non-empty subset focal.
pub fn random_full_support(rng: &mut impl Rng, frame: &Frame) -> MassFunction {
    let weights: Vec<(Subset, f64)> = Subset::all(frame.len())
        .skip(1)
        .map(|s| (s, rng.gen::<f64>() + 1e-3))
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    MassFunction::new(
        frame.clone(),
        weights.into_iter().map(|(s, w)| (s, w / total)),
    )
    .expect("normalized weights")
}

fn workload(method: Method, n: usize, frame: &Frame, rng: &mut ChaCha8Rng) -> Workload {
    match method {
        Method::Triplet => Workload::Triplet((0..n).map(|_| random_triplet(rng, frame)).collect()),
        Method::Dichotomous => {
            let focus = rng.gen_range(0..frame.len());
            Workload::Dichotomous(
                (0..n)
                    .map(|_| random_dichotomous(rng, frame, focus))
                    .collect(),
            )
        }
        Method::Oracle => {
            Workload::Oracle((0..n).map(|_| random_full_support(rng, frame)).collect())
        }
    }
}

/// Median and standard deviation of the samples.
pub fn summarize(samples: &[f64]) -> (f64, f64) {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
    (median, var.sqrt())
}

fn time_runs(reps: usize, warmup: usize, mut f: impl FnMut() -> Result<()>) -> Result<Vec<f64>> {
    for _ in 0..warmup {
        f()?;
    }
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        f()?;
        samples.push((start.elapsed().as_nanos() as f64).max(1.0));
    }
    Ok(samples)
}

/// One record per workload size.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if config.sizes.is_empty() || config.sizes.contains(&0) {
        return Err(Error::InvalidParameter(
            "workload sizes must be positive".into(),
        ));
    }
    if config.repetitions == 0 {
        return Err(Error::InvalidParameter(
            "need at least one repetition".into(),
        ));
    }
    if config.method == Method::Oracle && config.frame_size > config.oracle_cap {
        return Err(Error::OracleCap {
            size: config.frame_size,
            cap: config.oracle_cap,
        });
    }
    let frame = Frame::indexed(config.frame_size)?;
    if frame.len() < 2 {
        return Err(Error::FrameTooSmall {
            size: frame.len(),
            min: 2,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        let load = workload(config.method, n, &frame, &mut rng);
        let samples = time_runs(config.repetitions, config.warmup, || load.run())?;
        let (median, std) = summarize(&samples);
        records.push(BenchRecord {
            method: config.method,
            n_evidences: n,
            frame_size: config.frame_size,
            mean_ns: median,
            std_ns: std,
            repetitions: config.repetitions,
        });
    }
    Ok(records)
}

/// Median wall time of fusing a whole score matrix.
pub fn time_pipeline(
    matrix: &ScoreMatrix,
    method: Method,
    config: &FusionConfig,
    reps: usize,
    warmup: usize,
) -> Result<f64> {
    let samples = time_runs(reps.max(1), warmup, || {
        black_box(fusion::fuse_matrix(black_box(matrix), method, config)?);
        Ok(())
    })?;
    Ok(summarize(&samples).0)
}

/// Least-squares line through the points: `(slope, intercept, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fit_recovers_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        assert_abs_diff_eq!(slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn summary_uses_median() {
        let (median, std) = summarize(&[1.0, 100.0, 2.0]);
        assert_eq!(median, 2.0);
        assert!(std > 40.0);
        assert_eq!(summarize(&[1.0, 3.0]).0, 2.0);
    }

    #[test]
    fn small_bench_runs_every_method() {
        for method in Method::ALL {
            let cfg = BenchConfig {
                method,
                sizes: vec![3, 6],
                frame_size: 4,
                repetitions: 2,
                warmup: 1,
                ..BenchConfig::default()
            };
            let rows = run_bench(&cfg).unwrap();
            assert_eq!(rows.len(), 2);
            assert!(rows.iter().all(|r| r.mean_ns > 0.0 && r.repetitions == 2));
        }
    }

    #[test]
    fn oracle_cap_and_bad_ranges() {
        let cfg = BenchConfig {
            method: Method::Oracle,
            frame_size: 17,
            ..BenchConfig::default()
        };
        assert!(matches!(
            run_bench(&cfg),
            Err(Error::OracleCap { size: 17, cap: 16 })
        ));
        let empty = BenchConfig {
            sizes: vec![],
            ..BenchConfig::default()
        };
        assert!(run_bench(&empty).is_err());
        let no_reps = BenchConfig {
            repetitions: 0,
            ..BenchConfig::default()
        };
        assert!(run_bench(&no_reps).is_err());
    }

    #[test]
    fn random_generators_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame = Frame::indexed(4).unwrap();
        let m = random_full_support(&mut rng, &frame);
        assert_eq!(m.focal_count(), 15);
        let t = random_triplet(&mut rng, &frame);
        assert!(t.mt() > 0.0 && t.m1() >= t.m2());
    }
}
