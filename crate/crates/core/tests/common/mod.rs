#![allow(dead_code)]

use zilm::domain::{
    Attempt, Content, Dataset, Delivery, Item, NdcProfile, Outcome, Response, Split, StudentProfile, Subject,
};
use zilm::simulate::{generate_dataset, SimConfig};

pub fn small(seed: u64, n_students: usize, n_items: usize, attempts: usize) -> Dataset {
    generate_dataset(&SimConfig {
        n_students,
        n_items,
        n_attempts_per_student: attempts,
        seed,
        ..SimConfig::default()
    })
    .expect("valid config")
}

pub fn item(id: usize, difficulty: f64) -> Item {
    Item {
        id,
        difficulty,
        discrimination: 1.0,
        guessing: 0.05,
        subject: Subject::English,
        content: Content::Letter,
        density: 0.5,
        delivery: Delivery::Listen,
        response: Response::ClickPicture,
    }
}

/// Hand-built dataset from `(student, item, correct, split)` rows.
pub fn hand_dataset(n_students: usize, n_items: usize, rows: &[(usize, usize, bool, Split)]) -> Dataset {
    Dataset {
        students: (0..n_students).map(|id| StudentProfile { id, ability: 0.0, ndc: NdcProfile::NT }).collect(),
        items: (0..n_items).map(|id| item(id, 0.0)).collect(),
        attempts: rows
            .iter()
            .map(|&(s, i, y, split)| Attempt {
                student_id: s,
                item_id: i,
                outcome: if y { Outcome::Correct } else { Outcome::Incorrect },
                true_pi: None,
                true_p: None,
                split,
            })
            .collect(),
        sim_config_digest: String::new(),
        seed: 0,
        notes: Vec::new(),
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
