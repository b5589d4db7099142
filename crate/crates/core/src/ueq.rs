//! User Experience Questionnaire scoring and group comparison.
//!
//! Responses CSV: `participant_id,condition,q1,…,q26`, answers 1–7.
//! Item map CSV: `item,scale,reversed,left,right` (the bundled map follows
//! the published UEQ handbook). Completion times CSV:
//! `participant_id,condition,iteration,seconds`, seconds as a number or `m:ss`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gesture::GestureKind;
use crate::stats::{self, StatsError, TTest, TTestKind, TimeStats};

pub const ITEM_COUNT: usize = 26;

pub const BUNDLED_ITEM_MAP: &str = include_str!("../data/ueq_items.csv");

#[derive(Debug, Error)]
pub enum UeqError {
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    InvalidMap(String),
    #[error("row {row}: answer {value} for item {item} outside 1..7")]
    OutOfRangeAnswer { row: usize, item: usize, value: i64 },
    #[error("row {row}: expected {ITEM_COUNT} answers, got {got}")]
    WrongItemCount { row: usize, got: usize },
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Attractiveness,
    Perspicuity,
    Efficiency,
    Dependability,
    Stimulation,
    Novelty,
}

impl Scale {
    pub const ALL: [Scale; 6] = [
        Scale::Attractiveness,
        Scale::Perspicuity,
        Scale::Efficiency,
        Scale::Dependability,
        Scale::Stimulation,
        Scale::Novelty,
    ];
    pub const PRAGMATIC: [Scale; 3] = [Scale::Perspicuity, Scale::Efficiency, Scale::Dependability];
    pub const HEDONIC: [Scale; 2] = [Scale::Stimulation, Scale::Novelty];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scale::Attractiveness => "attractiveness",
            Scale::Perspicuity => "perspicuity",
            Scale::Efficiency => "efficiency",
            Scale::Dependability => "dependability",
            Scale::Stimulation => "stimulation",
            Scale::Novelty => "novelty",
        }
    }

    fn expected_items(&self) -> usize {
        match self {
            Scale::Attractiveness => 6,
            _ => 4,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ItemSpec {
    pub item: usize,
    pub scale: Scale,
    pub reversed: bool,
    #[serde(default)]
    pub left: String,
    #[serde(default)]
    pub right: String,
}

/// Item index (1-based) → scale and polarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemMap {
    items: Vec<ItemSpec>,
}

impl ItemMap {
    pub fn from_csv(input: impl Read) -> Result<Self, UeqError> {
        let mut items: Vec<ItemSpec> = csv::Reader::from_reader(input)
            .deserialize()
            .collect::<Result<_, _>>()?;
        items.sort_by_key(|i| i.item);
        let map = Self { items };
        map.validate()?;
        Ok(map)
    }

    pub fn bundled() -> Self {
        Self::from_csv(BUNDLED_ITEM_MAP.as_bytes()).expect("bundled item map is valid")
    }

    /// Builds a map directly; used for ad-hoc scales in tests and tools.
    pub fn from_items(items: Vec<ItemSpec>) -> Self {
        Self { items }
    }

    fn validate(&self) -> Result<(), UeqError> {
        let indices: Vec<usize> = self.items.iter().map(|i| i.item).collect();
        if indices != (1..=ITEM_COUNT).collect::<Vec<_>>() {
            return Err(UeqError::InvalidMap(format!(
                "items must be 1..={ITEM_COUNT}, each exactly once"
            )));
        }
        for scale in Scale::ALL {
            let n = self.items.iter().filter(|i| i.scale == scale).count();
            if n != scale.expected_items() {
                return Err(UeqError::InvalidMap(format!(
                    "scale {scale} has {n} items, expected {}",
                    scale.expected_items()
                )));
            }
        }
        Ok(())
    }

    pub fn items(&self) -> &[ItemSpec] {
        &self.items
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UeqResponse {
    pub participant_id: String,
    pub condition: GestureKind,
    pub answers: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleScores {
    pub scales: BTreeMap<Scale, f64>,
    pub pragmatic: f64,
    pub hedonic: f64,
}

impl ScaleScores {
    pub fn get(&self, scale: Scale) -> f64 {
        self.scales[&scale]
    }
}

/// Maps one answer onto −3..+3.
pub fn transform(answer: u8, reversed: bool) -> f64 {
    let a = answer as f64 - 4.0;
    if reversed {
        -a
    } else {
        a
    }
}

/// Per-scale means of one response. Scales with no items in `map` are omitted,
/// and an aggregate is the mean of whichever of its scales are present.
pub fn score(answers: &[u8], map: &ItemMap) -> Result<ScaleScores, UeqError> {
    if answers.len() != map.items.len() {
        return Err(UeqError::WrongItemCount {
            row: 0,
            got: answers.len(),
        });
    }
    let mut sums: BTreeMap<Scale, (f64, usize)> = BTreeMap::new();
    for (spec, &answer) in map.items.iter().zip(answers) {
        if !(1..=7).contains(&answer) {
            return Err(UeqError::OutOfRangeAnswer {
                row: 0,
                item: spec.item,
                value: answer as i64,
            });
        }
        let e = sums.entry(spec.scale).or_insert((0.0, 0));
        e.0 += transform(answer, spec.reversed);
        e.1 += 1;
    }
    let scales: BTreeMap<Scale, f64> = sums
        .into_iter()
        .map(|(s, (sum, n))| (s, sum / n as f64))
        .collect();
    let aggregate = |group: &[Scale]| {
        let v: Vec<f64> = group
            .iter()
            .filter_map(|s| scales.get(s).copied())
            .collect();
        stats::mean(&v)
    };
    Ok(ScaleScores {
        pragmatic: aggregate(&Scale::PRAGMATIC),
        hedonic: aggregate(&Scale::HEDONIC),
        scales,
    })
}

#[derive(Debug, Deserialize)]
struct TimeRow {
    participant_id: String,
    condition: String,
    iteration: String,
    seconds: String,
}

/// Reads a responses CSV.
pub fn read_responses(input: impl Read) -> Result<Vec<UeqResponse>, UeqError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let bad = |reason: String| UeqError::BadRow { row, reason };
        if record.len() < 2 {
            return Err(bad("missing participant_id/condition".into()));
        }
        let condition =
            GestureKind::from_str(record[1].trim()).map_err(|e| bad(format!("condition: {e}")))?;
        let answers = record
            .iter()
            .skip(2)
            .enumerate()
            .map(|(j, v)| {
                let value: i64 = v
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("q{}: `{v}` is not an integer", j + 1)))?;
                if (1..=7).contains(&value) {
                    Ok(value as u8)
                } else {
                    Err(UeqError::OutOfRangeAnswer {
                        row,
                        item: j + 1,
                        value,
                    })
                }
            })
            .collect::<Result<Vec<u8>, _>>()?;
        if answers.len() != ITEM_COUNT {
            return Err(UeqError::WrongItemCount {
                row,
                got: answers.len(),
            });
        }
        out.push(UeqResponse {
            participant_id: record[0].trim().to_string(),
            condition,
            answers,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub scale: String,
    pub mean_a: f64,
    pub mean_b: f64,
    #[serde(flatten)]
    pub test: TTest,
    pub significant: bool,
}

/// Per-scale two-sample tests, followed by the pragmatic and hedonic aggregates.
pub fn compare(
    a: &[ScaleScores],
    b: &[ScaleScores],
    alpha: f64,
    kind: TTestKind,
) -> Result<Vec<Comparison>, UeqError> {
    for (name, g) in [("group A", a), ("group B", b)] {
        if g.len() < 2 {
            return Err(UeqError::InsufficientData(format!(
                "{name} has {} response(s), need at least 2",
                g.len()
            )));
        }
    }
    type Pick = Box<dyn Fn(&ScaleScores) -> f64>;
    let mut rows: Vec<(String, Pick)> = Scale::ALL
        .iter()
        .map(|s| {
            let s = *s;
            (
                s.to_string(),
                Box::new(move |x: &ScaleScores| x.get(s)) as Pick,
            )
        })
        .collect();
    rows.push(("pragmatic".into(), Box::new(|x| x.pragmatic)));
    rows.push(("hedonic".into(), Box::new(|x| x.hedonic)));

    rows.into_iter()
        .map(|(scale, pick)| {
            let xa: Vec<f64> = a.iter().map(&pick).collect();
            let xb: Vec<f64> = b.iter().map(&pick).collect();
            let test = stats::t_test(&xa, &xb, kind)?;
            Ok(Comparison {
                scale,
                mean_a: stats::mean(&xa),
                mean_b: stats::mean(&xb),
                significant: test.p < alpha,
                test,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Condition,
    Iteration,
}

impl FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "condition" => Ok(GroupBy::Condition),
            "iteration" => Ok(GroupBy::Iteration),
            other => Err(format!("unknown grouping `{other}` (condition|iteration)")),
        }
    }
}

/// Completion-time statistics per group of a times CSV.
pub fn grouped_times(
    input: impl Read,
    by: GroupBy,
) -> Result<BTreeMap<String, TimeStats>, UeqError> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (i, row) in csv::Reader::from_reader(input).deserialize().enumerate() {
        let row: TimeRow = row?;
        let seconds = stats::parse_duration(&row.seconds).map_err(|e| UeqError::BadRow {
            row: i + 2,
            reason: format!("{e} (participant {})", row.participant_id),
        })?;
        let key = match by {
            GroupBy::Condition => row.condition,
            GroupBy::Iteration => row.iteration,
        };
        groups
            .entry(key.trim().to_string())
            .or_default()
            .push(seconds);
    }
    if groups.is_empty() {
        return Err(StatsError::EmptyDataset.into());
    }
    groups
        .into_iter()
        .map(|(k, v)| Ok((k, stats::time_stats(&v)?)))
        .collect()
}
