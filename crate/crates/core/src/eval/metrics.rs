//! Held-out predictive metrics.

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, SplitSelector};
use crate::error::{Error, Result};
use crate::fit::FittedModel;
use crate::math::neg_log;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub split: String,
    pub n_attempts: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub nll: f64,
    pub brier: f64,
}

/// One row per report.
pub fn metrics_csv(reports: &[MetricsReport]) -> String {
    let mut rows = vec![["model", "split", "n_attempts", "accuracy", "f1", "nll", "brier"].map(String::from).to_vec()];
    for r in reports {
        rows.push(vec![
            r.model.clone(),
            r.split.clone(),
            r.n_attempts.to_string(),
            r.accuracy.to_string(),
            r.f1.to_string(),
            r.nll.to_string(),
            r.brier.to_string(),
        ]);
    }
    super::rows_to_csv(&rows)
}

/// Accuracy, F1, NLL and Brier score of `model` on `split`.
pub fn classification_metrics(model: &FittedModel, d: &Dataset, split: SplitSelector) -> Result<MetricsReport> {
    let preds = model.predict_split(d, split)?;
    let mut report = metrics_from_predictions(&preds)?;
    report.model = model.kind.to_string();
    report.split = split.to_string();
    Ok(report)
}

/// Metrics from `(predicted probability of y = 1, observed y)` pairs.
///
/// Predictions of exactly 0.5 count as class 1.
pub fn metrics_from_predictions(preds: &[(f64, bool)]) -> Result<MetricsReport> {
    if preds.is_empty() {
        return Err(Error::data("no predictions to score"));
    }
    let n = preds.len() as f64;
    let (mut tp, mut fp, mut fn_, mut right) = (0usize, 0usize, 0usize, 0usize);
    let (mut nll, mut brier) = (0.0, 0.0);
    for &(p, y) in preds {
        let hat = p >= 0.5;
        match (hat, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
        if hat == y {
            right += 1;
        }
        nll += if y { neg_log(p) } else { neg_log(1.0 - p) };
        let t = if y { 1.0 } else { 0.0 };
        brier += (p - t) * (p - t);
    }
    let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
    Ok(MetricsReport {
        model: String::new(),
        split: String::new(),
        n_attempts: preds.len(),
        accuracy: right as f64 / n,
        f1,
        nll: nll / n,
        brier: brier / n,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn constant_half() {
        let preds = [(0.5, true), (0.5, false), (0.5, true), (0.5, false)];
        let m = metrics_from_predictions(&preds).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_abs_diff_eq!(m.brier, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m.nll, 2f64.ln(), epsilon = 1e-15);
        // everything predicted positive: tp 2, fp 2 → F1 = 4/6
        assert_abs_diff_eq!(m.f1, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn perfect_predictor() {
        let m = metrics_from_predictions(&[(1.0, true), (0.0, false)]).unwrap();
        assert_eq!((m.accuracy, m.f1, m.brier), (1.0, 1.0, 0.0));
        assert!(m.nll < 1e-11);
    }

    #[test]
    fn brier_hand_example() {
        let m = metrics_from_predictions(&[(0.9, true), (0.2, false)]).unwrap();
        assert_abs_diff_eq!(m.brier, 0.025, epsilon = 1e-15);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(metrics_from_predictions(&[]).is_err());
    }
}
