//! Forced-delivery experiment: the same cohort answering every item in one
//! delivery type at a time.

use serde::{Deserialize, Serialize};

use super::{group_label, OutcomeCounts, GROUP_ALL};
use crate::domain::{Delivery, Drt, NdcProfile};
use crate::error::Result;
use crate::simulate::{generate_dataset_with, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliveryCell {
    pub group: String,
    pub delivery: Delivery,
    pub n_students: usize,
    pub n_attempts: usize,
    pub correct: f64,
    pub incorrect: f64,
    pub not_answered: f64,
    /// `1 − not_answered`.
    pub answered: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliveryReport {
    pub cells: Vec<DeliveryCell>,
}

type CellMetric = fn(&DeliveryCell) -> f64;

impl DeliveryReport {
    pub fn cell(&self, group: &str, delivery: Delivery) -> Option<&DeliveryCell> {
        self.cells.iter().find(|c| c.group == group && c.delivery == delivery)
    }

    pub fn groups(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.group.as_str()) {
                out.push(&c.group);
            }
        }
        out
    }

    /// Correct-rate difference `a − b` within a group.
    pub fn correct_gap(&self, group: &str, a: Delivery, b: Delivery) -> Option<f64> {
        Some(self.cell(group, a)?.correct - self.cell(group, b)?.correct)
    }

    /// Largest minus smallest correct rate across delivery types.
    pub fn correct_spread(&self, group: &str) -> Option<f64> {
        let rates: Vec<f64> = Delivery::ALL
            .iter()
            .map(|&d| self.cell(group, d).map(|c| c.correct))
            .collect::<Option<_>>()?;
        let hi = rates.iter().cloned().fold(f64::MIN, f64::max);
        let lo = rates.iter().cloned().fold(f64::MAX, f64::min);
        Some(hi - lo)
    }

    /// One row per (group, outcome) with a column per delivery type.
    pub fn to_csv(&self) -> String {
        let mut rows = vec![vec![
            "group".to_string(),
            "metric".into(),
            "read".into(),
            "listen".into(),
            "both".into(),
        ]];
        for g in self.groups() {
            let metrics: [(&str, CellMetric); 4] = [
                ("correct", |c| c.correct),
                ("incorrect", |c| c.incorrect),
                ("not_answered", |c| c.not_answered),
                ("answered", |c| c.answered),
            ];
            for (name, get) in metrics {
                let mut row = vec![g.to_string(), name.to_string()];
                for d in Delivery::ALL {
                    row.push(self.cell(g, d).map(|c| get(c).to_string()).unwrap_or_default());
                }
                rows.push(row);
            }
        }
        super::rows_to_csv(&rows)
    }
}

/// Re-simulates the cohort of `cfg` three times, presenting every item with
/// delivery Read, Listen and Both in turn (responses unchanged), and reports
/// outcome rates per exact condition combination and for everyone.
pub fn forced_delivery_experiment(cfg: &SimConfig) -> Result<DeliveryReport> {
    let mut cells = Vec::new();
    for delivery in Delivery::ALL {
        let d = generate_dataset_with(cfg, |_, it| Drt { delivery, response: it.response })?;
        let mut counts = [OutcomeCounts::default(); 9];
        let mut students = [0usize; 9];
        for s in &d.students {
            students[s.ndc.code()] += 1;
            students[8] += 1;
        }
        for a in &d.attempts {
            let code = d.students[a.student_id].ndc.code();
            counts[code].add(a.outcome);
            counts[8].add(a.outcome);
        }
        for slot in std::iter::once(8).chain(0..8) {
            if students[slot] == 0 {
                continue;
            }
            let c = counts[slot];
            let group = if slot == 8 { GROUP_ALL.to_string() } else { group_label(NdcProfile::from_code(slot)) };
            cells.push(DeliveryCell {
                group,
                delivery,
                n_students: students[slot],
                n_attempts: c.total(),
                correct: c.rate(c.correct),
                incorrect: c.rate(c.incorrect),
                not_answered: c.rate(c.not_answered),
                answered: 1.0 - c.rate(c.not_answered),
            });
        }
    }
    Ok(DeliveryReport { cells })
}
