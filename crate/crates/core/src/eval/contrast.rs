//! Per-learner performance differences between two subsets of each
//! learner's attempts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{group_label, OutcomeCounts};
use crate::domain::{Dataset, Delivery, Item, Subject};
use crate::error::{Error, Result};

/// How attempts are split into side A and side B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    /// A: maths items, B: English items.
    MathsVsEnglish,
    /// A: delivery Read, B: delivery Listen.
    ReadVsListen,
    /// A: delivery Both, B: delivery Read.
    BothVsRead,
    /// A: each learner's even-numbered attempts, B: the odd-numbered ones.
    /// Both sides are sampled alike, so every contrast should vanish.
    AttemptParity,
}

impl Partition {
    pub const ALL: [Partition; 4] =
        [Partition::MathsVsEnglish, Partition::ReadVsListen, Partition::BothVsRead, Partition::AttemptParity];

    pub fn token(self) -> &'static str {
        match self {
            Partition::MathsVsEnglish => "maths-vs-english",
            Partition::ReadVsListen => "read-vs-listen",
            Partition::BothVsRead => "both-vs-read",
            Partition::AttemptParity => "attempt-parity",
        }
    }

    /// `Some(true)` for side A, `Some(false)` for side B, given the item and
    /// the attempt's position in the learner's sequence.
    pub fn side(self, item: &Item, position: usize) -> Option<bool> {
        match self {
            Partition::MathsVsEnglish => Some(item.subject == Subject::Maths),
            Partition::ReadVsListen => match item.delivery {
                Delivery::Read => Some(true),
                Delivery::Listen => Some(false),
                Delivery::Both => None,
            },
            Partition::BothVsRead => match item.delivery {
                Delivery::Both => Some(true),
                Delivery::Read => Some(false),
                Delivery::Listen => None,
            },
            Partition::AttemptParity => Some(position.is_multiple_of(2)),
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Partition::ALL
            .into_iter()
            .find(|p| p.token() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Partition::ALL.iter().map(|p| p.token()).collect();
                Error::config(format!("unknown partition `{s}` (expected one of {})", known.join(", ")))
            })
    }
}

/// Rate differences (side A − side B) per outcome category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDiff {
    pub not_answered: f64,
    pub incorrect: f64,
    pub correct: f64,
}

impl OutcomeDiff {
    pub fn as_array(&self) -> [f64; 3] {
        [self.not_answered, self.incorrect, self.correct]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentContrast {
    pub student_id: usize,
    pub group: String,
    pub n_a: usize,
    pub n_b: usize,
    pub diff: OutcomeDiff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupContrast {
    pub group: String,
    pub n_students: usize,
    pub mean: OutcomeDiff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub partition: Partition,
    pub students: Vec<StudentContrast>,
    pub groups: Vec<GroupContrast>,
    /// Learners without attempts on one of the sides.
    pub excluded: usize,
}

impl ContrastReport {
    pub fn group(&self, label: &str) -> Option<&GroupContrast> {
        self.groups.iter().find(|g| g.group == label)
    }

    /// Group means, one row per (group, outcome).
    pub fn to_csv(&self) -> String {
        let mut rows = vec![vec![
            "partition".to_string(),
            "group".into(),
            "n_students".into(),
            "outcome".into(),
            "mean_difference".into(),
        ]];
        for g in &self.groups {
            let cats = [("not_answered", g.mean.not_answered), ("incorrect", g.mean.incorrect), ("correct", g.mean.correct)];
            for (name, v) in cats {
                rows.push(vec![
                    self.partition.to_string(),
                    g.group.clone(),
                    g.n_students.to_string(),
                    name.to_string(),
                    v.to_string(),
                ]);
            }
        }
        super::rows_to_csv(&rows)
    }

    /// Per-learner differences, one row per learner.
    pub fn students_csv(&self) -> String {
        let mut rows = vec![vec![
            "student_id".to_string(),
            "group".into(),
            "n_a".into(),
            "n_b".into(),
            "not_answered".into(),
            "incorrect".into(),
            "correct".into(),
        ]];
        for s in &self.students {
            rows.push(vec![
                s.student_id.to_string(),
                s.group.clone(),
                s.n_a.to_string(),
                s.n_b.to_string(),
                s.diff.not_answered.to_string(),
                s.diff.incorrect.to_string(),
                s.diff.correct.to_string(),
            ]);
        }
        super::rows_to_csv(&rows)
    }
}

/// Per-learner outcome-rate differences between the sides of `partition`,
/// over all of each learner's attempts, aggregated by exact condition
/// combination.
pub fn contrast_analysis(d: &Dataset, partition: Partition) -> Result<ContrastReport> {
    let mut sides = vec![(OutcomeCounts::default(), OutcomeCounts::default()); d.students.len()];
    let mut seen = vec![0usize; d.students.len()];
    for a in &d.attempts {
        let item = d.items.get(a.item_id).ok_or_else(|| Error::data(format!("unknown item {}", a.item_id)))?;
        let slot = sides
            .get_mut(a.student_id)
            .ok_or_else(|| Error::data(format!("unknown student {}", a.student_id)))?;
        let position = seen[a.student_id];
        seen[a.student_id] += 1;
        match partition.side(item, position) {
            Some(true) => slot.0.add(a.outcome),
            Some(false) => slot.1.add(a.outcome),
            None => {}
        }
    }

    let mut students = Vec::new();
    let mut excluded = 0;
    let mut sums = [(OutcomeDiff::default(), 0usize); 8];
    for (s, (a, b)) in d.students.iter().zip(&sides) {
        if a.total() == 0 || b.total() == 0 {
            excluded += 1;
            continue;
        }
        let diff = OutcomeDiff {
            not_answered: a.rate(a.not_answered) - b.rate(b.not_answered),
            incorrect: a.rate(a.incorrect) - b.rate(b.incorrect),
            correct: a.rate(a.correct) - b.rate(b.correct),
        };
        let acc = &mut sums[s.ndc.code()];
        acc.0.not_answered += diff.not_answered;
        acc.0.incorrect += diff.incorrect;
        acc.0.correct += diff.correct;
        acc.1 += 1;
        students.push(StudentContrast { student_id: s.id, group: group_label(s.ndc), n_a: a.total(), n_b: b.total(), diff });
    }

    let groups = sums
        .iter()
        .enumerate()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(code, (sum, n))| {
            let k = *n as f64;
            GroupContrast {
                group: group_label(crate::domain::NdcProfile::from_code(code)),
                n_students: *n,
                mean: OutcomeDiff {
                    not_answered: sum.not_answered / k,
                    incorrect: sum.incorrect / k,
                    correct: sum.correct / k,
                },
            }
        })
        .collect();
    Ok(ContrastReport { partition, students, groups, excluded })
}
