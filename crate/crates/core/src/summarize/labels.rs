//! Human grades for summary candidates and the label-file format.
//!
//! One JSON object per line:
//! `{"features":{...},"grade":"Great|Acceptable|Terrible","annotator":"..."}`
//! with an optional `"candidate"` id used to group annotations of the same
//! candidate. Without it, identical feature vectors are grouped.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{FeatureVector, SummarizeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Grade {
    Great,
    Acceptable,
    Terrible,
}

impl Grade {
    fn rank(self) -> u8 {
        match self {
            Grade::Terrible => 0,
            Grade::Acceptable => 1,
            Grade::Great => 2,
        }
    }
}

impl PartialOrd for Grade {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Grade {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateLabel {
    pub grade: Grade,
    pub annotator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCandidate {
    pub features: FeatureVector,
    #[serde(flatten)]
    pub label: CandidateLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<String>,
}

impl LabeledCandidate {
    fn group_key(&self) -> String {
        self.candidate.clone().unwrap_or_else(|| serde_json::to_string(&self.features).expect("features serialize"))
    }
}

/// Parses a label file, failing on the first malformed line.
pub fn read_labels(reader: impl BufRead) -> Result<Vec<LabeledCandidate>, crate::Error> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LabeledCandidate =
            serde_json::from_str(&line).map_err(|e| SummarizeError::InvalidLabel(format!("line {}: {e}", i + 1)))?;
        if !record.features.is_finite() {
            return Err(SummarizeError::InvalidLabel(format!("line {}: non-finite feature", i + 1)).into());
        }
        out.push(record);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelStats {
    pub labels: usize,
    pub great: f64,
    pub acceptable: f64,
    pub terrible: f64,
    /// Candidates graded by two or more distinct annotators.
    pub multi_annotated: usize,
    /// Multi-annotated candidates whose annotators disagree.
    pub conflicts: usize,
}

pub fn label_stats(labels: &[LabeledCandidate]) -> LabelStats {
    let n = labels.len();
    let fraction = |g: Grade| {
        if n == 0 {
            0.0
        } else {
            labels.iter().filter(|l| l.label.grade == g).count() as f64 / n as f64
        }
    };
    let mut groups: BTreeMap<String, Vec<&CandidateLabel>> = BTreeMap::new();
    for l in labels {
        groups.entry(l.group_key()).or_default().push(&l.label);
    }
    let mut multi_annotated = 0;
    let mut conflicts = 0;
    for group in groups.values() {
        let annotators: BTreeSet<&str> = group.iter().map(|l| l.annotator.as_str()).collect();
        if annotators.len() < 2 {
            continue;
        }
        multi_annotated += 1;
        let grades: BTreeSet<Grade> = group.iter().map(|l| l.grade).collect();
        if grades.len() > 1 {
            conflicts += 1;
        }
    }
    LabelStats {
        labels: n,
        great: fraction(Grade::Great),
        acceptable: fraction(Grade::Acceptable),
        terrible: fraction(Grade::Terrible),
        multi_annotated,
        conflicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_count() {
        let text = r#"{"features":{"has_finite_verb":1},"grade":"Great","annotator":"a","candidate":"c1"}
{"features":{"has_finite_verb":1},"grade":"Acceptable","annotator":"b","candidate":"c1"}
{"features":{"has_finite_verb":0},"grade":"Terrible","annotator":"a","candidate":"c2"}
{"features":{"has_finite_verb":0},"grade":"Terrible","annotator":"b","candidate":"c2"}

"#;
        let labels = read_labels(text.as_bytes()).unwrap();
        assert_eq!(labels.len(), 4);
        let stats = label_stats(&labels);
        assert_eq!(stats.multi_annotated, 2);
        assert_eq!(stats.conflicts, 1);
        assert_eq!(stats.terrible, 0.5);
        assert!(Grade::Great > Grade::Acceptable && Grade::Acceptable > Grade::Terrible);
    }

    #[test]
    fn rejects_unknown_grade() {
        let bad = r#"{"features":{},"grade":"Okay","annotator":"a"}"#;
        assert!(read_labels(bad.as_bytes()).is_err());
    }
}
