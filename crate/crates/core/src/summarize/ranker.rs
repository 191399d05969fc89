use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureVector, LabeledCandidate, Scorer, SummarizeError, SummaryCandidate};

pub const LEARNING_RATE: f64 = 0.1;

/// Linear candidate scorer: `bias + weights · features`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Default for RankerModel {
    /// Hand-set weights usable before any labels exist. The length term is
    /// `-0.02 * (chars - 30)`, folded into the bias.
    fn default() -> Self {
        let mut weights = [0.0; FeatureVector::LEN];
        weights[0] = -0.02; // length_chars
        weights[2] = 1.5; // has_finite_verb
        weights[4] = 2.0; // svo_complete
        weights[5] = 1.0; // salience
        weights[6] = 0.5; // from_headline
        RankerModel { weights: weights.to_vec(), bias: 0.02 * 30.0 }
    }
}

impl RankerModel {
    pub fn zeros() -> Self {
        RankerModel { weights: vec![0.0; FeatureVector::LEN], bias: 0.0 }
    }

    pub fn validate(&self) -> Result<(), SummarizeError> {
        if self.weights.len() != FeatureVector::LEN {
            return Err(SummarizeError::InvalidModel(format!(
                "expected {} weights, found {}",
                FeatureVector::LEN,
                self.weights.len()
            )));
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(SummarizeError::InvalidModel("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn score_features(&self, features: &FeatureVector) -> f64 {
        self.bias + self.weights.iter().zip(features.to_array()).map(|(w, f)| w * f).sum::<f64>()
    }

    pub fn load(path: &Path) -> Result<Self, crate::Error> {
        let model: RankerModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), crate::Error> {
        std::fs::write(path, serde_json::to_string(self)? + "\n")?;
        Ok(())
    }
}

impl Scorer for RankerModel {
    fn score(&self, candidate: &SummaryCandidate) -> f64 {
        self.score_features(&candidate.features)
    }
}

fn preference_pairs(labeled: &[LabeledCandidate]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..labeled.len()).flat_map(move |i| {
        (0..labeled.len()).filter_map(move |j| (labeled[i].label.grade > labeled[j].label.grade).then_some((i, j)))
    })
}

/// Pairwise margin perceptron. For every ordered (better, worse) pair in
/// input order, a violated margin moves the weights by
/// `LEARNING_RATE * (f_better - f_worse)`. Starts from zero weights.
pub fn train_ranker(labeled: &[LabeledCandidate], epochs: usize, margin: f64) -> Result<RankerModel, SummarizeError> {
    let first = labeled.first().map(|l| l.label.grade);
    if labeled.iter().all(|l| Some(l.label.grade) == first) {
        return Err(SummarizeError::NoTrainingSignal);
    }
    let features: Vec<[f64; FeatureVector::LEN]> = labeled.iter().map(|l| l.features.to_array()).collect();
    let mut model = RankerModel::zeros();
    for _ in 0..epochs {
        for (b, w) in preference_pairs(labeled) {
            let diff: Vec<f64> = features[b].iter().zip(&features[w]).map(|(x, y)| x - y).collect();
            let gap: f64 = model.weights.iter().zip(&diff).map(|(wt, d)| wt * d).sum();
            if gap < margin {
                model.weights.iter_mut().zip(&diff).for_each(|(wt, d)| *wt += LEARNING_RATE * d);
            }
        }
    }
    Ok(model)
}

/// Fraction of (better, worse) pairs the model scores strictly in order.
/// Returns 1.0 when there are no such pairs.
pub fn pairwise_accuracy(model: &RankerModel, labeled: &[LabeledCandidate]) -> f64 {
    let scores: Vec<f64> = labeled.iter().map(|l| model.score_features(&l.features)).collect();
    let (mut total, mut correct) = (0usize, 0usize);
    for (b, w) in preference_pairs(labeled) {
        total += 1;
        if scores[b] > scores[w] {
            correct += 1;
        }
    }
    if total == 0 {
        1.0
    } else {
        correct as f64 / total as f64
    }
}
