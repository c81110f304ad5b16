//! File formats read and written by the command-line tool.
//!
//! Evidence files are JSON, either one evidence object or an array of them.
//! The object's keys select its kind:
//!
//! ```text
//! general      {"frame": ["a","b"], "focal": [{"set": ["a"], "mass": 0.6}, ...]}
//! triplet      {"frame": [...], "a1": "a", "a2": "b", "m1": 0.6, "m2": 0.3}
//! dichotomous  {"frame": [...], "focus": "a", "p": 0.6, "c": 0.3}
//! ```
//!
//! Triplet Θ mass and dichotomous ignorance are implied by the other two
//! masses. Score matrices are long-form CSV with header
//! `item,classifier,<cat1>,...,<catk>`; label files are `item,label`.
//! Numbers are written with 12 significant digits.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bench::BenchRecord;
use crate::dichotomous::DichotomousMass;
use crate::frame::Frame;
use crate::fusion::{FusionReport, Labels, ScoreItem, ScoreMatrix};
use crate::mass::MassFunction;
use crate::triplet::TripletMass;

/// A parse or validation failure, located by source name and line or item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub origin: String,
    pub location: Option<String>,
    pub message: String,
}

impl FormatError {
    fn new(origin: &str, location: Option<String>, message: impl Into<String>) -> Self {
        FormatError {
            origin: origin.to_string(),
            location,
            message: message.into(),
        }
    }

    fn at_line(origin: &str, line: u64, message: impl Into<String>) -> Self {
        Self::new(origin, Some(format!("line {line}")), message)
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{}: {}: {}", self.origin, loc, self.message),
            None => write!(f, "{}: {}", self.origin, self.message),
        }
    }
}

impl std::error::Error for FormatError {}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    General(MassFunction),
    Triplet(TripletMass),
    Dichotomous(DichotomousMass),
}

impl Evidence {
    pub fn kind(&self) -> &'static str {
        match self {
            Evidence::General(_) => "general",
            Evidence::Triplet(_) => "triplet",
            Evidence::Dichotomous(_) => "dichotomous",
        }
    }

    pub fn frame(&self) -> &Frame {
        match self {
            Evidence::General(m) => m.frame(),
            Evidence::Triplet(t) => t.frame(),
            Evidence::Dichotomous(d) => d.frame(),
        }
    }

    pub fn to_general(&self) -> MassFunction {
        match self {
            Evidence::General(m) => m.clone(),
            Evidence::Triplet(t) => t.to_general(),
            Evidence::Dichotomous(d) => d.to_general(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FocalRepr {
    set: Vec<String>,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralRepr {
    frame: Vec<String>,
    focal: Vec<FocalRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripletRepr {
    frame: Vec<String>,
    a1: String,
    a2: String,
    m1: f64,
    m2: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DichotomousRepr {
    frame: Vec<String>,
    focus: String,
    p: f64,
    c: f64,
}

/// Reuses an equal frame seen earlier in the same file.
#[derive(Default)]
struct FrameCache(Vec<Frame>);

impl FrameCache {
    fn get(&mut self, labels: Vec<String>) -> crate::Result<Frame> {
        if let Some(f) = self.0.iter().find(|f| f.labels() == labels.as_slice()) {
            return Ok(f.clone());
        }
        let frame = Frame::new(labels)?;
        self.0.push(frame.clone());
        Ok(frame)
    }
}

fn evidence_from_value(
    value: Value,
    frames: &mut FrameCache,
) -> std::result::Result<Evidence, String> {
    let obj = value.as_object().ok_or("evidence must be a JSON object")?;
    let invalid = |e: crate::Error| e.to_string();
    if obj.contains_key("focal") {
        let repr: GeneralRepr = serde_json::from_value(value).map_err(|e| e.to_string())?;
        let frame = frames.get(repr.frame).map_err(invalid)?;
        let entries = repr
            .focal
            .iter()
            .map(|f| Ok((frame.subset(&f.set)?, f.mass)))
            .collect::<crate::Result<Vec<_>>>()
            .map_err(invalid)?;
        MassFunction::new(frame, entries)
            .map(Evidence::General)
            .map_err(invalid)
    } else if obj.contains_key("a1") {
        let repr: TripletRepr = serde_json::from_value(value).map_err(|e| e.to_string())?;
        let frame = frames.get(repr.frame).map_err(invalid)?;
        let a1 = frame.require_index(&repr.a1).map_err(invalid)?;
        let a2 = frame.require_index(&repr.a2).map_err(invalid)?;
        TripletMass::new(frame, a1, repr.m1, a2, repr.m2)
            .map(Evidence::Triplet)
            .map_err(invalid)
    } else if obj.contains_key("focus") {
        let repr: DichotomousRepr = serde_json::from_value(value).map_err(|e| e.to_string())?;
        let frame = frames.get(repr.frame).map_err(invalid)?;
        let focus = frame.require_index(&repr.focus).map_err(invalid)?;
        DichotomousMass::new(frame, focus, repr.p, repr.c)
            .map(Evidence::Dichotomous)
            .map_err(invalid)
    } else {
        Err("cannot tell evidence kind: expected a \"focal\", \"a1\" or \"focus\" key".into())
    }
}

/// Parses an evidence file: a single object or an array of objects.
pub fn parse_evidence(text: &str, origin: &str) -> FormatResult<Vec<Evidence>> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| FormatError::at_line(origin, e.line() as u64, e.to_string()))?;
    let values = match value {
        Value::Array(items) => items,
        other => vec![other],
    };
    let mut frames = FrameCache::default();
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            evidence_from_value(v, &mut frames)
                .map_err(|msg| FormatError::new(origin, Some(format!("evidence {i}")), msg))
        })
        .collect()
}

pub fn evidence_to_value(evidence: &Evidence) -> Value {
    match evidence {
        Evidence::General(m) => general_to_value(m),
        Evidence::Triplet(t) => triplet_to_value(t),
        Evidence::Dichotomous(d) => json!({
            "frame": d.frame().labels(),
            "focus": d.frame().label(d.focus()),
            "p": round12(d.p()),
            "c": round12(d.c()),
        }),
    }
}

fn general_to_value(m: &MassFunction) -> Value {
    let focal: Vec<Value> = m
        .focal()
        .map(|(s, mass)| json!({"set": m.frame().subset_labels(s), "mass": round12(mass)}))
        .collect();
    json!({"frame": m.frame().labels(), "focal": focal})
}

fn triplet_to_value(t: &TripletMass) -> Value {
    json!({
        "frame": t.frame().labels(),
        "a1": t.frame().label(t.a1()),
        "a2": t.frame().label(t.a2()),
        "m1": round12(t.m1()),
        "m2": round12(t.m2()),
    })
}

pub fn serialize_evidence(items: &[Evidence]) -> String {
    let values: Vec<Value> = items.iter().map(evidence_to_value).collect();
    serde_json::to_string_pretty(&values).expect("JSON values serialize")
}

/// Output of a combine run: the result and `K⁻¹` for every pairwise step.
pub fn combine_output(method: &str, result: &Evidence, trail: &[f64]) -> String {
    let steps: Vec<Value> = trail
        .iter()
        .enumerate()
        .map(|(i, k)| json!({"step": i + 1, "k_inv": round12(*k)}))
        .collect();
    let out = json!({
        "method": method,
        "kind": result.kind(),
        "result": evidence_to_value(result),
        "trail": steps,
    });
    serde_json::to_string_pretty(&out).expect("JSON values serialize")
}

fn csv_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// First line an item appears on, and its per-classifier score rows.
type ItemRows = (u64, Vec<(String, Vec<f64>)>);

/// Parses a long-form score CSV.
///
/// Items appear in first-seen order; classifier order follows the first item.
/// Every item must carry exactly the same classifiers.
pub fn parse_scores_csv(text: &str, origin: &str) -> FormatResult<ScoreMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| FormatError::at_line(origin, 1, e.to_string()))?
        .clone();
    if headers.len() < 4 || &headers[0] != "item" || &headers[1] != "classifier" {
        return Err(FormatError::at_line(
            origin,
            1,
            "header must be item,classifier,<cat1>,...,<catk> with at least two categories",
        ));
    }
    let categories = Frame::new(headers.iter().skip(2).map(str::to_string))
        .map_err(|e| FormatError::at_line(origin, 1, e.to_string()))?;
    let k = categories.len();

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, ItemRows> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            FormatError::at_line(origin, line, e.to_string())
        })?;
        let line = csv_line(&record);
        if record.len() != k + 2 {
            return Err(FormatError::at_line(
                origin,
                line,
                format!("expected {} fields, found {}", k + 2, record.len()),
            ));
        }
        let item = record[0].to_string();
        let classifier = record[1].to_string();
        if item.is_empty() || classifier.is_empty() {
            return Err(FormatError::at_line(
                origin,
                line,
                "empty item or classifier id",
            ));
        }
        let scores = record
            .iter()
            .skip(2)
            .enumerate()
            .map(|(j, s)| {
                let v: f64 = s.parse().map_err(|_| {
                    FormatError::at_line(
                        origin,
                        line,
                        format!("score {s:?} for {:?} is not a number", &headers[j + 2]),
                    )
                })?;
                if !v.is_finite() || v < 0.0 {
                    return Err(FormatError::at_line(
                        origin,
                        line,
                        format!("score {v} is negative"),
                    ));
                }
                Ok(v)
            })
            .collect::<FormatResult<Vec<f64>>>()?;
        let entry = rows.entry(item.clone()).or_insert_with(|| {
            order.push(item.clone());
            (line, Vec::new())
        });
        if entry.1.iter().any(|(c, _)| *c == classifier) {
            return Err(FormatError::at_line(
                origin,
                line,
                format!("item {item:?} has classifier {classifier:?} twice"),
            ));
        }
        entry.1.push((classifier, scores));
    }
    let first = order
        .first()
        .ok_or_else(|| FormatError::new(origin, None, "no score rows"))?;
    let classifiers: Vec<String> = rows[first].1.iter().map(|(c, _)| c.clone()).collect();

    let mut items = Vec::with_capacity(order.len());
    for id in order {
        let (line, mut outputs) = rows.remove(&id).expect("seen item");
        if outputs.len() != classifiers.len() {
            return Err(FormatError::at_line(
                origin,
                line,
                format!(
                    "item {id:?} has {} classifiers, expected {}",
                    outputs.len(),
                    classifiers.len()
                ),
            ));
        }
        let mut scores = Vec::with_capacity(classifiers.len());
        for name in &classifiers {
            let pos = outputs.iter().position(|(c, _)| c == name).ok_or_else(|| {
                FormatError::at_line(
                    origin,
                    line,
                    format!("item {id:?} lacks classifier {name:?}"),
                )
            })?;
            scores.push(outputs.swap_remove(pos).1);
        }
        items.push(ScoreItem { id, scores });
    }
    ScoreMatrix::new(categories, classifiers, items)
        .map_err(|e| FormatError::new(origin, None, e.to_string()))
}

pub fn write_scores_csv(matrix: &ScoreMatrix) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["item".to_string(), "classifier".to_string()];
    header.extend(matrix.categories().labels().iter().cloned());
    writer.write_record(&header).expect("in-memory write");
    for item in matrix.items() {
        for (name, scores) in matrix.classifiers().iter().zip(&item.scores) {
            let mut row = vec![item.id.clone(), name.clone()];
            row.extend(scores.iter().map(|s| round12(*s).to_string()));
            writer.write_record(&row).expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Parses an `item,label` CSV against a category frame.
pub fn parse_labels_csv(text: &str, categories: &Frame, origin: &str) -> FormatResult<Labels> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| FormatError::at_line(origin, 1, e.to_string()))?
        .clone();
    if headers.len() != 2 || &headers[0] != "item" || &headers[1] != "label" {
        return Err(FormatError::at_line(origin, 1, "header must be item,label"));
    }
    let mut labels = Labels::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            FormatError::at_line(origin, line, e.to_string())
        })?;
        let line = csv_line(&record);
        let category = categories.index_of(&record[1]).ok_or_else(|| {
            FormatError::at_line(origin, line, format!("unknown category {:?}", &record[1]))
        })?;
        if labels.insert(record[0].to_string(), category).is_some() {
            return Err(FormatError::at_line(
                origin,
                line,
                format!("item {:?} labelled twice", &record[0]),
            ));
        }
    }
    Ok(labels)
}

pub fn write_labels_csv(labels: &Labels, categories: &Frame) -> String {
    let mut out = String::from("item,label\n");
    for (item, cat) in labels {
        out.push_str(&format!(
            "{item},{}\n",
            categories.label(*cat).unwrap_or_default()
        ));
    }
    out
}

pub const BENCH_HEADER: &str = "method,n,frame_size,mean_ns,std_ns,reps";

pub fn write_bench_csv(records: &[BenchRecord]) -> String {
    let mut out = format!("{BENCH_HEADER}\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method,
            r.n_evidences,
            r.frame_size,
            round12(r.mean_ns),
            round12(r.std_ns),
            r.repetitions
        ));
    }
    out
}

pub fn report_to_json(report: &FusionReport) -> String {
    let frame = &report.categories;
    let items: Vec<Value> = report
        .decisions
        .iter()
        .map(|d| match &d.outcome {
            Ok(f) => json!({
                "item": d.item,
                "decision": frame.label(f.category),
                "triplet": {
                    "a1": frame.label(f.summary.a1()),
                    "a2": frame.label(f.summary.a2()),
                    "m1": round12(f.summary.m1()),
                    "m2": round12(f.summary.m2()),
                    "mt": round12(f.summary.mt()),
                },
            }),
            Err(reason) => json!({"item": d.item, "decision": null, "error": reason}),
        })
        .collect();
    let mut out = json!({
        "method": report.method.name(),
        "categories": frame.labels(),
        "items": items,
        "undecided": report.undecided(),
        "timing": {"wall_ns": report.wall_ns as u64, "combinations": report.combinations},
    });
    if let (Some(acc), Some(individual)) = (report.accuracy, &report.individual_accuracy) {
        let individual: BTreeMap<&String, f64> =
            individual.iter().map(|(k, v)| (k, round12(*v))).collect();
        out["accuracy"] = json!({
            "fused": round12(acc),
            "individual": individual,
            "mean_individual": report.mean_individual_accuracy().map(round12),
        });
    }
    serde_json::to_string_pretty(&out).expect("JSON values serialize")
}
