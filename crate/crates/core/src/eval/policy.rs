//! Delivery/response selection policies and their effect on success rates.

use serde::{Deserialize, Serialize};

use crate::domain::{Drt, Item, Outcome, StudentProfile};
use crate::error::{Error, Result};
use crate::fit::FittedModel;
use crate::models::{ModelKind, PiFeatureVector};
use crate::simulate::{generate_dataset_with, true_lqf_pi, SimConfig};

/// How each (learner, item) presentation is chosen.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    /// Keep the item's sampled delivery/response type.
    Random,
    /// Minimize the simulator's true π.
    OracleActive,
    /// Maximize the simulator's true π.
    OracleAdversarial,
    /// Minimize a fitted IRT-ZILM model's π.
    ModelActive(&'a FittedModel),
}

impl Policy<'_> {
    pub fn token(&self) -> &'static str {
        match self {
            Policy::Random => "random",
            Policy::OracleActive => "oracle-active",
            Policy::OracleAdversarial => "oracle-adversarial",
            Policy::ModelActive(_) => "model-active",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyGroup {
    pub ndc_count: usize,
    pub n_students: usize,
    pub n_attempts: usize,
    /// Success rate with sampled presentations.
    pub baseline: f64,
    /// Success rate under the policy.
    pub rate: f64,
    /// `rate / baseline`: a lift for active policies, a drop for
    /// adversarial ones.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub policy: String,
    pub groups: Vec<PolicyGroup>,
}

impl PolicyReport {
    pub fn group(&self, ndc_count: usize) -> Option<&PolicyGroup> {
        self.groups.iter().find(|g| g.ndc_count == ndc_count)
    }

    pub fn ratio(&self, ndc_count: usize) -> Option<f64> {
        self.group(ndc_count).map(|g| g.ratio)
    }

    pub fn to_csv(&self) -> String {
        let ratio_name = match self.policy.as_str() {
            "oracle-adversarial" => "drop",
            _ => "lift",
        };
        let mut rows = vec![vec![
            "policy".to_string(),
            "ndc_count".into(),
            "n_students".into(),
            "n_attempts".into(),
            "baseline".into(),
            "rate".into(),
            ratio_name.into(),
        ]];
        for g in &self.groups {
            rows.push(vec![
                self.policy.clone(),
                g.ndc_count.to_string(),
                g.n_students.to_string(),
                g.n_attempts.to_string(),
                g.baseline.to_string(),
                g.rate.to_string(),
                g.ratio.to_string(),
            ]);
        }
        super::rows_to_csv(&rows)
    }
}

/// The 12 presentations of `item`, ranked by `score`; ties keep the first.
fn pick(item: &Item, mut score: impl FnMut(&Item) -> f64, maximize: bool) -> Drt {
    let mut best = item.drt();
    let mut best_score = f64::NAN;
    for drt in Drt::all() {
        let v = score(&item.with_drt(drt));
        let better = best_score.is_nan() || if maximize { v > best_score } else { v < best_score };
        if better {
            best = drt;
            best_score = v;
        }
    }
    best
}

fn correct_rates(cfg: &SimConfig, present: impl FnMut(&StudentProfile, &Item) -> Drt) -> Result<Vec<(usize, usize, usize)>> {
    let d = generate_dataset_with(cfg, present)?;
    let mut out = vec![(0usize, 0usize, 0usize); 4];
    for s in &d.students {
        out[s.ndc.ndc_count()].0 += 1;
    }
    for a in &d.attempts {
        let slot = &mut out[d.students[a.student_id].ndc.ndc_count()];
        slot.1 += 1;
        if a.outcome == Outcome::Correct {
            slot.2 += 1;
        }
    }
    Ok(out)
}

/// Re-simulates the cohort of `cfg` with presentations chosen by `policy`
/// and compares correct rates per condition count with the sampled
/// presentations. All runs share the simulator's random draws.
pub fn policy_experiment(cfg: &SimConfig, policy: Policy<'_>) -> Result<PolicyReport> {
    let w = cfg.lqf;
    let baseline = correct_rates(cfg, |_, it| it.drt())?;
    let treated = match policy {
        Policy::Random => baseline.clone(),
        Policy::OracleActive => correct_rates(cfg, |s, it| pick(it, |x| true_lqf_pi(s, x, &w), false))?,
        Policy::OracleAdversarial => correct_rates(cfg, |s, it| pick(it, |x| true_lqf_pi(s, x, &w), true))?,
        Policy::ModelActive(model) => {
            if model.kind != ModelKind::IrtZilm {
                return Err(Error::config(format!("model-active policy needs an irt_zilm model, got {}", model.kind)));
            }
            let params = model.params.as_zilm().expect("irt_zilm params");
            if params.n_students() != cfg.n_students || params.n_items() != cfg.n_items {
                return Err(Error::data("model was fitted to a different cohort size"));
            }
            correct_rates(cfg, |s, it| pick(it, |x| PiFeatureVector::new(s.ndc, x).dot(&params.w_pi), false))?
        }
    };
    let groups = baseline
        .iter()
        .zip(&treated)
        .enumerate()
        .filter(|(_, (b, _))| b.1 > 0)
        .map(|(k, (b, t))| {
            let base = b.2 as f64 / b.1 as f64;
            let rate = t.2 as f64 / t.1 as f64;
            PolicyGroup {
                ndc_count: k,
                n_students: b.0,
                n_attempts: b.1,
                baseline: base,
                rate,
                ratio: if base > 0.0 { rate / base } else { f64::NAN },
            }
        })
        .collect();
    Ok(PolicyReport { policy: policy.token().to_string(), groups })
}
