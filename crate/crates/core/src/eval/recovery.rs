//! Parameter recovery against simulator ground truth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::correlation::{pearson, spearman};
use crate::domain::Dataset;
use crate::error::{Error, Result};
use crate::fit::FittedModel;
use crate::models::Params;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub pearson: f64,
    pub spearman: f64,
}

impl CorrelationPair {
    pub fn between(truth: &[f64], estimate: &[f64]) -> Result<Self> {
        if truth.len() < 3 {
            return Err(Error::data(format!("recovery needs at least 3 points, got {}", truth.len())));
        }
        Ok(CorrelationPair { pearson: pearson(truth, estimate)?, spearman: spearman(truth, estimate)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub model: String,
    pub ability: CorrelationPair,
    pub difficulty: CorrelationPair,
    /// Absent for models without a discrimination parameter.
    pub discrimination: Option<CorrelationPair>,
    /// Mean aligned ability residual keyed by condition count (`"0"`..`"3"`)
    /// plus `"nd"` for every learner with at least one condition.
    pub ability_bias: BTreeMap<String, f64>,
}

impl RecoveryReport {
    pub fn nd_bias(&self) -> Option<f64> {
        self.ability_bias.get("nd").copied()
    }
}

/// Long-format `model,quantity,statistic,value` rows: one per correlation
/// (`ability`/`difficulty`/`discrimination` × pearson/spearman), then one
/// `ability_bias` row per condition-count group.
pub fn recovery_csv(reports: &[RecoveryReport]) -> String {
    let mut rows = vec![["model", "quantity", "statistic", "value"].map(String::from).to_vec()];
    let mut row = |model: &str, q: &str, stat: &str, v: f64| {
        rows.push(vec![model.to_string(), q.to_string(), stat.to_string(), v.to_string()]);
    };
    for r in reports {
        let mut params = vec![("ability", r.ability), ("difficulty", r.difficulty)];
        if let Some(d) = r.discrimination {
            params.push(("discrimination", d));
        }
        for (name, c) in params {
            row(&r.model, name, "pearson", c.pearson);
            row(&r.model, name, "spearman", c.spearman);
        }
        for (group, v) in &r.ability_bias {
            row(&r.model, "ability_bias", group, *v);
        }
    }
    super::rows_to_csv(&rows)
}

/// Least-squares affine map `y ≈ α + β·x`.
pub fn affine_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::data("cannot align a constant estimate"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let beta = sxy / sxx;
    Ok((my - beta * mx, beta))
}

/// Mean of `(α + β·estimate) − truth` per condition count, where the affine
/// map is fitted over all learners.
pub fn ability_bias(truth: &[f64], estimate: &[f64], ndc_count: &[usize]) -> Result<BTreeMap<String, f64>> {
    let (alpha, beta) = affine_fit(estimate, truth)?;
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for ((t, e), &c) in truth.iter().zip(estimate).zip(ndc_count) {
        let r = alpha + beta * e - t;
        let mut add = |key: String| {
            let s = sums.entry(key).or_insert((0.0, 0));
            s.0 += r;
            s.1 += 1;
        };
        add(c.to_string());
        if c > 0 {
            add("nd".to_string());
        }
    }
    Ok(sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}

pub fn recovery_report(model: &FittedModel, d: &Dataset) -> Result<RecoveryReport> {
    let theta: Vec<f64> = d.students.iter().map(|s| s.ability).collect();
    let est = model.abilities();
    if est.len() != theta.len() || model.difficulties().len() != d.items.len() {
        return Err(Error::data("model and dataset sizes differ"));
    }
    let b: Vec<f64> = d.items.iter().map(|i| i.difficulty).collect();
    let discrimination = match &model.params {
        Params::Zilm(p) => {
            let a: Vec<f64> = d.items.iter().map(|i| i.discrimination).collect();
            let a_hat: Vec<f64> = (0..p.n_items()).map(|i| p.discrimination(i)).collect();
            Some(CorrelationPair::between(&a, &a_hat)?)
        }
        Params::Ktm1(_) => None,
    };
    let counts: Vec<usize> = d.students.iter().map(|s| s.ndc.ndc_count()).collect();
    Ok(RecoveryReport {
        model: model.kind.to_string(),
        ability: CorrelationPair::between(&theta, est)?,
        difficulty: CorrelationPair::between(&b, &model.difficulties())?,
        discrimination,
        ability_bias: ability_bias(&theta, est, &counts)?,
    })
}
