//! Metrics, parameter recovery and the intervention experiments.

pub mod contrast;
pub mod correlation;
pub mod delivery;
pub mod hypothesis;
pub mod metrics;
pub mod policy;
pub mod recovery;

pub use contrast::{contrast_analysis, ContrastReport, Partition};
pub use correlation::{correlation, pearson, spearman, Kind};
pub use delivery::{forced_delivery_experiment, DeliveryReport};
pub use hypothesis::{ndc_hypothesis_test, ndc_hypothesis_test_with, HypothesisResult};
pub use metrics::{classification_metrics, metrics_csv, metrics_from_predictions, MetricsReport};
pub use policy::{policy_experiment, Policy, PolicyReport};
pub use recovery::{recovery_csv, recovery_report, CorrelationPair, RecoveryReport};

use crate::domain::{NdcProfile, Outcome};

/// Group key covering every learner.
pub const GROUP_ALL: &str = "all";

/// Group key of an exact condition combination (`"nt"`, `"dyslexia+spd"`, ...).
pub fn group_label(ndc: NdcProfile) -> String {
    ndc.label()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct OutcomeCounts {
    pub correct: usize,
    pub incorrect: usize,
    pub not_answered: usize,
}

impl OutcomeCounts {
    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Correct => self.correct += 1,
            Outcome::Incorrect => self.incorrect += 1,
            Outcome::NotAnswered => self.not_answered += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.correct + self.incorrect + self.not_answered
    }

    pub fn rate(&self, k: usize) -> f64 {
        match self.total() {
            0 => 0.0,
            n => k as f64 / n as f64,
        }
    }
}

pub(crate) fn rows_to_csv<S: AsRef<str>>(rows: &[Vec<S>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r.iter().map(|s| s.as_ref())).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
}
