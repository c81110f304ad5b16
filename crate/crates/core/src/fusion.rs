//! Classifier ensemble fusion.
//!
//! Each classifier's score vector for an item becomes one piece of evidence.
//! Three pipelines are available:
//!
//! - [`Method::Triplet`]: outstanding-rule triplets combined by
//!   [`fold_combine`](crate::triplet::fold_combine).
//! - [`Method::Dichotomous`]: one dichotomous function per classifier focused
//!   on its top category, pooled per focus and combined across pools with the
//!   general rule.
//! - [`Method::Oracle`]: the same triplets as the triplet pipeline but combined
//!   exactly, without refocusing.
//!
//! The decision is the singleton with the highest combined belief.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dichotomous::{self, DichotomousMass};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::mass::{self, argmax};
use crate::triplet::{self, TripletMass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Triplet,
    Dichotomous,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Triplet, Method::Dichotomous, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Triplet => "triplet",
            Method::Dichotomous => "dichotomous",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    /// Share of the non-top score mass kept as ignorance in dichotomous evidence.
    pub ignorance_floor: f64,
    /// Largest frame the oracle pipeline accepts.
    pub oracle_cap: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            ignorance_floor: 0.1,
            oracle_cap: 16,
        }
    }
}

fn normalized(scores: &[f64], frame: &Frame) -> Result<Vec<f64>> {
    if scores.len() != frame.len() {
        return Err(Error::InvalidScores(format!(
            "{} scores for {} categories",
            scores.len(),
            frame.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::InvalidScores(format!(
            "score {bad} is negative or not finite"
        )));
    }
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidScores("all scores are zero".into()));
    }
    Ok(scores.iter().map(|s| s / total).collect())
}

/// Normalizes the scores to sum to one, then applies the outstanding rule.
pub fn scores_to_triplet(scores: &[f64], frame: &Frame) -> Result<TripletMass> {
    let probs = normalized(scores, frame)?;
    triplet::outstanding(frame, &probs)
}

/// Dichotomous evidence on the top category.
///
/// `p` is the top normalized score; the remaining mass `1 − p` is split into
/// refutation `(1 − p)(1 − floor)` and ignorance `(1 − p)·floor`.
pub fn scores_to_dichotomous(
    scores: &[f64],
    frame: &Frame,
    ignorance_floor: f64,
) -> Result<DichotomousMass> {
    if !(0.0..=1.0).contains(&ignorance_floor) {
        return Err(Error::InvalidParameter(format!(
            "ignorance floor {ignorance_floor} outside [0, 1]"
        )));
    }
    let probs = normalized(scores, frame)?;
    let (focus, p) = argmax(&probs);
    let rest = 1.0 - p;
    DichotomousMass::with_ignorance(
        frame.clone(),
        focus,
        p,
        rest * (1.0 - ignorance_floor),
        rest * ignorance_floor,
    )
}

/// Outcome of fusing one item.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemFusion {
    pub category: usize,
    /// Combined evidence reduced to a triplet by the outstanding rule.
    pub summary: TripletMass,
    /// Pairwise combinations performed.
    pub combinations: usize,
}

/// Fuses one item's per-classifier score vectors.
pub fn fuse_item(
    scores: &[Vec<f64>],
    frame: &Frame,
    method: Method,
    config: &FusionConfig,
) -> Result<ItemFusion> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    let combinations = scores.len() - 1;
    match method {
        Method::Triplet => {
            let evidence = scores
                .iter()
                .map(|s| scores_to_triplet(s, frame))
                .collect::<Result<Vec<_>>>()?;
            let combined = triplet::fold_combine(&evidence)?;
            Ok(ItemFusion {
                category: combined.a1(),
                summary: combined,
                combinations,
            })
        }
        Method::Dichotomous => {
            let evidence = scores
                .iter()
                .map(|s| scores_to_dichotomous(s, frame, config.ignorance_floor))
                .collect::<Result<Vec<_>>>()?;
            let combined = dichotomous::combine_pooled(&evidence)?;
            let singles = combined.singleton_masses();
            Ok(ItemFusion {
                category: argmax(&singles).0,
                summary: triplet::outstanding(frame, &singles)?,
                combinations,
            })
        }
        Method::Oracle => {
            if frame.len() > config.oracle_cap {
                return Err(Error::OracleCap {
                    size: frame.len(),
                    cap: config.oracle_cap,
                });
            }
            let evidence = scores
                .iter()
                .map(|s| scores_to_triplet(s, frame).map(|t| t.to_general()))
                .collect::<Result<Vec<_>>>()?;
            let combined = mass::combine_all(&evidence)?;
            let singles = combined.singleton_masses();
            Ok(ItemFusion {
                category: argmax(&singles).0,
                summary: triplet::outstanding(frame, &singles)?,
                combinations,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreItem {
    pub id: String,
    /// One score vector per classifier, in [`ScoreMatrix::classifiers`] order.
    pub scores: Vec<Vec<f64>>,
}

/// Per-item, per-classifier scores over a frame of categories.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    categories: Frame,
    classifiers: Vec<String>,
    items: Vec<ScoreItem>,
}

impl ScoreMatrix {
    pub fn new(categories: Frame, classifiers: Vec<String>, items: Vec<ScoreItem>) -> Result<Self> {
        if classifiers.is_empty() {
            return Err(Error::InvalidScores("no classifiers".into()));
        }
        let mut names = HashSet::new();
        for c in &classifiers {
            if !names.insert(c) {
                return Err(Error::InvalidScores(format!(
                    "classifier {c:?} listed twice"
                )));
            }
        }
        let mut ids = HashSet::new();
        for item in &items {
            if !ids.insert(&item.id) {
                return Err(Error::InvalidScores(format!(
                    "item {:?} listed twice",
                    item.id
                )));
            }
            if item.scores.len() != classifiers.len() {
                return Err(Error::InvalidScores(format!(
                    "item {:?} has {} classifier outputs, expected {}",
                    item.id,
                    item.scores.len(),
                    classifiers.len()
                )));
            }
            for (name, s) in classifiers.iter().zip(&item.scores) {
                if s.len() != categories.len() {
                    return Err(Error::InvalidScores(format!(
                        "item {:?} classifier {name:?} has {} scores for {} categories",
                        item.id,
                        s.len(),
                        categories.len()
                    )));
                }
                if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidScores(format!(
                        "item {:?} classifier {name:?} has a negative score",
                        item.id
                    )));
                }
            }
        }
        Ok(ScoreMatrix {
            categories,
            classifiers,
            items,
        })
    }

    pub fn categories(&self) -> &Frame {
        &self.categories
    }

    pub fn classifiers(&self) -> &[String] {
        &self.classifiers
    }

    pub fn items(&self) -> &[ScoreItem] {
        &self.items
    }

    /// Keeps only the first `n` classifiers.
    pub fn truncate_classifiers(&self, n: usize) -> Result<ScoreMatrix> {
        let n = n.min(self.classifiers.len());
        ScoreMatrix::new(
            self.categories.clone(),
            self.classifiers[..n].to_vec(),
            self.items
                .iter()
                .map(|it| ScoreItem {
                    id: it.id.clone(),
                    scores: it.scores[..n].to_vec(),
                })
                .collect(),
        )
    }
}

/// Item id → index of the true category.
pub type Labels = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct ItemDecision {
    pub item: String,
    /// `Err` carries the reason an item could not be decided.
    pub outcome: std::result::Result<ItemFusion, String>,
}

impl ItemDecision {
    pub fn category(&self) -> Option<usize> {
        self.outcome.as_ref().ok().map(|f| f.category)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionReport {
    pub method: Method,
    pub categories: Frame,
    pub decisions: Vec<ItemDecision>,
    /// Fused accuracy, present when labels were supplied. Undecided items count as wrong.
    pub accuracy: Option<f64>,
    /// Accuracy of each classifier's own top score.
    pub individual_accuracy: Option<BTreeMap<String, f64>>,
    pub wall_ns: u128,
    pub combinations: u64,
}

impl FusionReport {
    pub fn undecided(&self) -> usize {
        self.decisions.iter().filter(|d| d.outcome.is_err()).count()
    }

    pub fn mean_individual_accuracy(&self) -> Option<f64> {
        self.individual_accuracy
            .as_ref()
            .map(|acc| acc.values().sum::<f64>() / acc.len() as f64)
    }
}

/// Fuses every item of a matrix. Non-combinable items are recorded as undecided.
pub fn fuse_matrix(
    matrix: &ScoreMatrix,
    method: Method,
    config: &FusionConfig,
) -> Result<FusionReport> {
    let frame = matrix.categories();
    if method == Method::Oracle && frame.len() > config.oracle_cap {
        return Err(Error::OracleCap {
            size: frame.len(),
            cap: config.oracle_cap,
        });
    }
    let start = Instant::now();
    let mut outcomes = Vec::with_capacity(matrix.items.len());
    for item in &matrix.items {
        outcomes.push(fuse_item(&item.scores, frame, method, config));
    }
    let wall_ns = start.elapsed().as_nanos();

    let mut combinations = 0u64;
    let mut decisions = Vec::with_capacity(outcomes.len());
    for (item, outcome) in matrix.items.iter().zip(outcomes) {
        let outcome = match outcome {
            Ok(f) => {
                combinations += f.combinations as u64;
                Ok(f)
            }
            Err(e) if e.is_non_combinable() => Err(e.to_string()),
            Err(e) => return Err(e),
        };
        decisions.push(ItemDecision {
            item: item.id.clone(),
            outcome,
        });
    }
    Ok(FusionReport {
        method,
        categories: frame.clone(),
        decisions,
        accuracy: None,
        individual_accuracy: None,
        wall_ns,
        combinations,
    })
}

/// Fuses and scores against known labels.
pub fn evaluate(
    matrix: &ScoreMatrix,
    labels: &Labels,
    method: Method,
    config: &FusionConfig,
) -> Result<FusionReport> {
    let truth = matrix
        .items
        .iter()
        .map(|it| {
            labels
                .get(&it.id)
                .copied()
                .ok_or_else(|| Error::MissingLabel(it.id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = fuse_matrix(matrix, method, config)?;
    let n = matrix.items.len().max(1) as f64;

    let correct = report
        .decisions
        .iter()
        .zip(&truth)
        .filter(|(d, t)| d.category() == Some(**t))
        .count();
    report.accuracy = Some(correct as f64 / n);

    let mut individual = BTreeMap::new();
    for (c, name) in matrix.classifiers.iter().enumerate() {
        let hits = matrix
            .items
            .iter()
            .zip(&truth)
            .filter(|(it, t)| argmax(&it.scores[c]).0 == **t)
            .count();
        individual.insert(name.clone(), hits as f64 / n);
    }
    report.individual_accuracy = Some(individual);
    Ok(report)
}

/// Shape of the non-top scores in synthetic classifier output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Background scores uniform on `(0, 1]`.
    Uniform,
    /// Background scores exponential with unit rate, giving a heavier tail of
    /// strong runner-up categories.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub categories: usize,
    pub items: usize,
    pub classifiers: usize,
    /// Probability that a classifier's top score lands on the true category.
    pub accuracy: f64,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            categories: 10,
            items: 1000,
            classifiers: 5,
            accuracy: 0.7,
            noise: NoiseModel::Uniform,
            seed: 0,
        }
    }
}

/// Seeded synthetic ensemble output with known labels.
///
/// Classifiers err independently; a wrong classifier puts its top score on a
/// uniformly chosen incorrect category. The top score exceeds every other
/// score by a random margin of 10% to 100%, and all scores are positive.
pub fn synth_workload(config: &SynthConfig) -> Result<(ScoreMatrix, Labels)> {
    let k = config.categories;
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "{k} categories; need at least 2"
        )));
    }
    if !(config.accuracy > 1.0 / k as f64 && config.accuracy <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "accuracy {} must lie in (1/{k}, 1]",
            config.accuracy
        )));
    }
    if config.classifiers == 0 {
        return Err(Error::InvalidParameter(
            "need at least one classifier".into(),
        ));
    }
    let frame = Frame::new((0..k).map(|i| format!("cat{i}")))?;
    let classifiers: Vec<String> = (0..config.classifiers).map(|c| format!("clf{c}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = config.items.max(1).to_string().len();
    let mut items = Vec::with_capacity(config.items);
    let mut labels = Labels::new();
    for n in 0..config.items {
        let id = format!("item{n:0width$}");
        let truth = rng.gen_range(0..k);
        let scores = (0..config.classifiers)
            .map(|_| {
                let top = if rng.gen_bool(config.accuracy) {
                    truth
                } else {
                    let other = rng.gen_range(0..k - 1);
                    if other >= truth {
                        other + 1
                    } else {
                        other
                    }
                };
                synth_scores(&mut rng, k, top, config.noise)
            })
            .collect();
        labels.insert(id.clone(), truth);
        items.push(ScoreItem { id, scores });
    }
    Ok((ScoreMatrix::new(frame, classifiers, items)?, labels))
}

fn synth_scores(rng: &mut ChaCha8Rng, k: usize, top: usize, noise: NoiseModel) -> Vec<f64> {
    let mut scores: Vec<f64> = (0..k)
        .map(|_| {
            let u = 1.0 - rng.gen::<f64>();
            match noise {
                NoiseModel::Uniform => u,
                NoiseModel::Exponential => 1e-6 - u.ln(),
            }
        })
        .collect();
    let background = scores
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != top)
        .map(|(_, s)| *s)
        .fold(0.0, f64::max);
    scores[top] = background * rng.gen_range(1.1..2.0);
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn frame() -> Frame {
        Frame::new(["cat0", "cat1", "cat2"]).unwrap()
    }

    #[test]
    fn triplet_mapping() {
        let f = frame();
        let a = scores_to_triplet(&[0.5, 0.3, 0.2], &f).unwrap();
        assert_eq!((a.a1(), a.a2()), (0, 1));
        assert_abs_diff_eq!(a.m1(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.mt(), 0.2, epsilon = 1e-12);
        let b = scores_to_triplet(&[5.0, 3.0, 2.0], &f).unwrap();
        assert!(a.to_general().max_abs_diff(&b.to_general()) < 1e-15);
        let c = scores_to_triplet(&[1.0, 0.0, 0.0], &f).unwrap();
        assert_eq!(
            (c.a1(), c.m1(), c.a2(), c.m2(), c.mt()),
            (0, 1.0, 1, 0.0, 0.0)
        );
        assert!(scores_to_triplet(&[0.0, 0.0, 0.0], &f).is_err());
        assert!(scores_to_triplet(&[0.5, 0.5], &f).is_err());
    }

    #[test]
    fn dichotomous_mapping() {
        let f = frame();
        let d = scores_to_dichotomous(&[0.5, 0.3, 0.2], &f, 0.1).unwrap();
        assert_eq!(d.focus(), 0);
        assert_abs_diff_eq!(d.p(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.c(), 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(d.r(), 0.05, epsilon = 1e-15);
        let sure = scores_to_dichotomous(&[1.0, 0.0, 0.0], &f, 0.1).unwrap();
        assert_eq!((sure.p(), sure.c(), sure.r()), (1.0, 0.0, 0.0));
        let floorless = scores_to_dichotomous(&[0.5, 0.3, 0.2], &f, 0.0).unwrap();
        assert_eq!(
            (floorless.p(), floorless.c(), floorless.r()),
            (0.5, 0.5, 0.0)
        );
        assert!(scores_to_dichotomous(&[0.5, 0.3, 0.2], &f, 1.5).is_err());
    }

    #[test]
    fn single_classifier_decides_by_argmax() {
        let f = frame();
        for method in Method::ALL {
            let out =
                fuse_item(&[vec![0.1, 0.7, 0.2]], &f, method, &FusionConfig::default()).unwrap();
            assert_eq!(out.category, 1, "{method}");
            assert_eq!(out.combinations, 0);
        }
    }

    #[test]
    fn agreement_reinforces() {
        let f = frame();
        let scores = vec![0.5, 0.3, 0.2];
        let single = scores_to_triplet(&scores, &f).unwrap();
        for method in Method::ALL {
            let out = fuse_item(
                &[scores.clone(), scores.clone()],
                &f,
                method,
                &FusionConfig::default(),
            )
            .unwrap();
            assert_eq!(out.category, 0);
            assert!(out.summary.m1() > single.m1(), "{method}");
        }
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let big = Frame::indexed(17).unwrap();
        let scores = vec![vec![1.0; 17]];
        assert!(matches!(
            fuse_item(&scores, &big, Method::Oracle, &FusionConfig::default()),
            Err(Error::OracleCap { size: 17, cap: 16 })
        ));
        let relaxed = FusionConfig {
            oracle_cap: 20,
            ..FusionConfig::default()
        };
        assert!(fuse_item(&scores, &big, Method::Oracle, &relaxed).is_ok());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("vote".parse::<Method>().is_err());
    }

    #[test]
    fn perfect_classifiers() {
        let cfg = SynthConfig {
            accuracy: 1.0,
            items: 50,
            ..SynthConfig::default()
        };
        let (matrix, labels) = synth_workload(&cfg).unwrap();
        for item in matrix.items() {
            for s in &item.scores {
                assert_eq!(argmax(s).0, labels[&item.id]);
                assert!(s.iter().all(|v| *v > 0.0));
            }
        }
        for method in Method::ALL {
            let report = evaluate(&matrix, &labels, method, &FusionConfig::default()).unwrap();
            assert_eq!(report.accuracy, Some(1.0));
            assert_eq!(report.combinations, 50 * 4);
        }
    }

    #[test]
    fn adversarial_labels_score_only_exact_matches() {
        let cfg = SynthConfig {
            accuracy: 1.0,
            items: 20,
            ..SynthConfig::default()
        };
        let (matrix, labels) = synth_workload(&cfg).unwrap();
        let shifted: Labels = labels
            .iter()
            .map(|(k, v)| (k.clone(), (v + 1) % 10))
            .collect();
        let report =
            evaluate(&matrix, &shifted, Method::Triplet, &FusionConfig::default()).unwrap();
        assert_eq!(report.accuracy, Some(0.0));
        assert!(report
            .individual_accuracy
            .unwrap()
            .values()
            .all(|a| *a == 0.0));
    }

    #[test]
    fn missing_label() {
        let (matrix, mut labels) = synth_workload(&SynthConfig {
            items: 5,
            ..SynthConfig::default()
        })
        .unwrap();
        labels.remove("item3");
        assert!(matches!(
            evaluate(&matrix, &labels, Method::Triplet, &FusionConfig::default()),
            Err(Error::MissingLabel(id)) if id == "item3"
        ));
    }

    #[test]
    fn undecided_items_count_as_wrong() {
        let f = Frame::new(["a", "b"]).unwrap();
        let matrix = ScoreMatrix::new(
            f,
            vec!["c0".into(), "c1".into()],
            vec![
                ScoreItem {
                    id: "ok".into(),
                    scores: vec![vec![0.7, 0.3], vec![0.6, 0.4]],
                },
                ScoreItem {
                    id: "clash".into(),
                    scores: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                },
            ],
        )
        .unwrap();
        let labels = Labels::from([("ok".into(), 0), ("clash".into(), 0)]);
        let report = evaluate(&matrix, &labels, Method::Triplet, &FusionConfig::default()).unwrap();
        assert_eq!(report.undecided(), 1);
        assert_eq!(report.accuracy, Some(0.5));
    }

    #[test]
    fn synth_is_deterministic_and_validated() {
        let cfg = SynthConfig {
            items: 30,
            seed: 9,
            noise: NoiseModel::Exponential,
            ..SynthConfig::default()
        };
        assert_eq!(synth_workload(&cfg).unwrap(), synth_workload(&cfg).unwrap());
        let other = SynthConfig { seed: 10, ..cfg };
        assert_ne!(
            synth_workload(&cfg).unwrap().0,
            synth_workload(&other).unwrap().0
        );
        assert!(synth_workload(&SynthConfig {
            accuracy: 0.1,
            ..cfg
        })
        .is_err());
        assert!(synth_workload(&SynthConfig {
            categories: 1,
            ..cfg
        })
        .is_err());
    }

    #[test]
    fn matrix_validation() {
        let f = frame();
        let bad_len = ScoreMatrix::new(
            f.clone(),
            vec!["c".into()],
            vec![ScoreItem {
                id: "i".into(),
                scores: vec![vec![0.5, 0.5]],
            }],
        );
        assert!(bad_len.is_err());
        let negative = ScoreMatrix::new(
            f,
            vec!["c".into()],
            vec![ScoreItem {
                id: "i".into(),
                scores: vec![vec![0.5, -0.5, 1.0]],
            }],
        );
        assert!(negative.is_err());
    }
}
