//! Shared data types: learners, items, attempts and datasets.
//!
//! Everything here is plain immutable data. Enumerations serialize as
//! lowercase snake-case tokens, which is also the form used in the dataset
//! CSV files (see [`io`]).

pub mod io;

use std::fmt;

use serde::{Deserialize, Serialize};

/// Difficulty range for items.
pub const DIFFICULTY_RANGE: (f64, f64) = (-2.0, 2.0);
/// Discrimination range for items.
pub const DISCRIMINATION_RANGE: (f64, f64) = (0.5, 4.0);
/// Guessing (lower asymptote) range for items.
pub const GUESSING_RANGE: (f64, f64) = (0.0, 0.15);
/// Clip range for information density.
pub const DENSITY_RANGE: (f64, f64) = (0.1, 1.0);

/// Neurodivergent condition flags of one learner.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NdcProfile {
    pub dyslexia: bool,
    pub dyscalculia: bool,
    pub spd: bool,
}

impl NdcProfile {
    pub const NT: NdcProfile = NdcProfile {
        dyslexia: false,
        dyscalculia: false,
        spd: false,
    };

    pub const fn new(dyslexia: bool, dyscalculia: bool, spd: bool) -> Self {
        NdcProfile {
            dyslexia,
            dyscalculia,
            spd,
        }
    }

    /// Number of conditions present.
    pub fn ndc_count(&self) -> usize {
        usize::from(self.dyslexia) + usize::from(self.dyscalculia) + usize::from(self.spd)
    }

    /// Dense code in `0..8` (bit 0 dyslexia, bit 1 dyscalculia, bit 2 SPD).
    pub fn code(&self) -> usize {
        usize::from(self.dyslexia) | usize::from(self.dyscalculia) << 1 | usize::from(self.spd) << 2
    }

    pub fn from_code(code: usize) -> Self {
        NdcProfile::new(code & 1 != 0, code & 2 != 0, code & 4 != 0)
    }

    pub fn flags(&self) -> [bool; 3] {
        [self.dyslexia, self.dyscalculia, self.spd]
    }

    /// Group label: `nt`, or the present conditions joined with `+`.
    pub fn label(&self) -> String {
        if self.ndc_count() == 0 {
            return "nt".to_string();
        }
        let mut parts = Vec::new();
        if self.dyslexia {
            parts.push("dyslexia");
        }
        if self.dyscalculia {
            parts.push("dyscalculia");
        }
        if self.spd {
            parts.push("spd");
        }
        parts.join("+")
    }

    /// Inverse of [`NdcProfile::label`]; also accepts `none`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "nt" || s == "none" || s.is_empty() {
            return Some(NdcProfile::NT);
        }
        let mut out = NdcProfile::NT;
        for part in s.split(['+', ',']) {
            match part.trim() {
                "dyslexia" => out.dyslexia = true,
                "dyscalculia" => out.dyscalculia = true,
                "spd" => out.spd = true,
                _ => return None,
            }
        }
        Some(out)
    }
}

impl fmt::Display for NdcProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Number of true flags.
pub fn ndc_count(p: &NdcProfile) -> usize {
    p.ndc_count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentProfile {
    pub id: usize,
    pub ability: f64,
    pub ndc: NdcProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Maths,
    English,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Content {
    Letter,
    Digit,
    Both,
}

impl Content {
    pub const ALL: [Content; 3] = [Content::Letter, Content::Digit, Content::Both];

    pub fn has_letters(self) -> bool {
        matches!(self, Content::Letter | Content::Both)
    }

    pub fn has_digits(self) -> bool {
        matches!(self, Content::Digit | Content::Both)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    Read,
    Listen,
    Both,
}

impl Delivery {
    pub const ALL: [Delivery; 3] = [Delivery::Read, Delivery::Listen, Delivery::Both];

    /// Whether the learner has to read the item.
    pub fn involves_reading(self) -> bool {
        matches!(self, Delivery::Read | Delivery::Both)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn token(self) -> &'static str {
        match self {
            Delivery::Read => "read",
            Delivery::Listen => "listen",
            Delivery::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    Written,
    Speak,
    ClickPicture,
    ClickRead,
}

impl Response {
    pub const ALL: [Response; 4] = [
        Response::Written,
        Response::Speak,
        Response::ClickPicture,
        Response::ClickRead,
    ];

    /// Whether answering requires producing or reading text.
    pub fn is_textual(self) -> bool {
        matches!(self, Response::Written | Response::ClickRead)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Delivery and response type of an item presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Drt {
    pub delivery: Delivery,
    pub response: Response,
}

impl Drt {
    /// All 12 delivery/response combinations, delivery-major.
    pub fn all() -> impl Iterator<Item = Drt> {
        Delivery::ALL.into_iter().flat_map(|delivery| {
            Response::ALL
                .into_iter()
                .map(move |response| Drt { delivery, response })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: usize,
    pub difficulty: f64,
    pub discrimination: f64,
    pub guessing: f64,
    pub subject: Subject,
    pub content: Content,
    pub density: f64,
    pub delivery: Delivery,
    pub response: Response,
}

impl Item {
    pub fn drt(&self) -> Drt {
        Drt {
            delivery: self.delivery,
            response: self.response,
        }
    }

    /// Copy of this item presented with a different delivery/response type.
    pub fn with_drt(&self, drt: Drt) -> Item {
        Item {
            delivery: drt.delivery,
            response: drt.response,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    Incorrect,
    NotAnswered,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::NotAnswered, Outcome::Incorrect, Outcome::Correct];

    /// Binary label used for model fitting; both kinds of zero collapse to 0.
    pub fn label(self) -> bool {
        self == Outcome::Correct
    }

    pub fn token(self) -> &'static str {
        match self {
            Outcome::Correct => "correct",
            Outcome::Incorrect => "incorrect",
            Outcome::NotAnswered => "not_answered",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// Which attempts an evaluation covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSelector {
    Train,
    Test,
    All,
}

impl SplitSelector {
    pub fn contains(self, split: Split) -> bool {
        match self {
            SplitSelector::All => true,
            SplitSelector::Train => split == Split::Train,
            SplitSelector::Test => split == Split::Test,
        }
    }
}

impl fmt::Display for SplitSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitSelector::Train => "train",
            SplitSelector::Test => "test",
            SplitSelector::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub student_id: usize,
    pub item_id: usize,
    pub outcome: Outcome,
    /// Zero-inflation probability used by the simulator, if simulated.
    pub true_pi: Option<f64>,
    /// IRT success probability used by the simulator, if simulated.
    pub true_p: Option<f64>,
    pub split: Split,
}

impl Attempt {
    pub fn y(&self) -> bool {
        self.outcome.label()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub students: Vec<StudentProfile>,
    pub items: Vec<Item>,
    pub attempts: Vec<Attempt>,
    pub sim_config_digest: String,
    pub seed: u64,
    /// Free-form provenance notes carried into the manifest.
    pub notes: Vec<String>,
}

impl Dataset {
    pub fn attempts_in(&self, split: SplitSelector) -> impl Iterator<Item = &Attempt> {
        self.attempts.iter().filter(move |a| split.contains(a.split))
    }

    pub fn count_in(&self, split: SplitSelector) -> usize {
        self.attempts_in(split).count()
    }

    /// Copy of the dataset with one learner's condition flags replaced.
    pub fn with_student_ndc(&self, student_id: usize, ndc: NdcProfile) -> Dataset {
        let mut out = self.clone();
        if let Some(s) = out.students.get_mut(student_id) {
            s.ndc = ndc;
        }
        out
    }
}

/// One broken invariant found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    x.is_finite() && x >= lo && x <= hi
}

/// Checks every dataset invariant and lists what is broken.
///
/// `expected_attempts` is the per-student attempt count to enforce; pass
/// `None` to require only that all students have the same count.
pub fn validate_dataset_with(d: &Dataset, expected_attempts: Option<usize>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |entity: String, rule: &str| {
        out.push(Violation {
            entity,
            rule: rule.to_string(),
        })
    };

    for (i, s) in d.students.iter().enumerate() {
        if s.id != i {
            push(format!("student {}", s.id), "ids are dense 0..n_students-1");
        }
        if !s.ability.is_finite() {
            push(format!("student {}", s.id), "ability is finite");
        }
    }

    for (i, it) in d.items.iter().enumerate() {
        let e = || format!("item {}", it.id);
        if it.id != i {
            push(e(), "ids are dense 0..n_items-1");
        }
        if !in_range(it.difficulty, DIFFICULTY_RANGE) {
            push(e(), "difficulty ∈ [−2,2]");
        }
        if !in_range(it.discrimination, DISCRIMINATION_RANGE) {
            push(e(), "discrimination ∈ [0.5,4]");
        }
        if !in_range(it.guessing, GUESSING_RANGE) {
            push(e(), "guessing ∈ [0,0.15]");
        }
        if !in_range(it.density, DENSITY_RANGE) {
            push(e(), "density ∈ [0.1,1]");
        }
        if it.subject == Subject::English && it.content != Content::Letter {
            push(e(), "english items have letter content (english content probabilities 1, 0, 0)");
        }
    }

    let n_s = d.students.len();
    let n_i = d.items.len();
    let mut seen: Vec<Vec<usize>> = vec![Vec::new(); n_s];
    for (k, a) in d.attempts.iter().enumerate() {
        let e = || format!("attempt {k} (student {}, item {})", a.student_id, a.item_id);
        if a.student_id >= n_s {
            push(e(), "student_id references a valid student");
            continue;
        }
        if a.item_id >= n_i {
            push(e(), "item_id references a valid item");
            continue;
        }
        if a.true_pi.is_some() != a.true_p.is_some() {
            push(e(), "true_pi and true_p are both present or both absent");
        }
        for v in [a.true_pi, a.true_p].into_iter().flatten() {
            if !(0.0..=1.0).contains(&v) {
                push(e(), "true probabilities lie in [0,1]");
            }
        }
        seen[a.student_id].push(a.item_id);
    }

    let expected = expected_attempts.or_else(|| seen.first().map(Vec::len));
    for (sid, items) in seen.iter_mut().enumerate() {
        if let Some(n) = expected {
            if items.len() != n {
                push(
                    format!("student {sid}"),
                    &format!("has exactly {n} attempts (found {})", items.len()),
                );
            }
        }
        items.sort_unstable();
        if items.windows(2).any(|w| w[0] == w[1]) {
            push(format!("student {sid}"), "attempts are over distinct items");
        }
    }
    out
}

/// [`validate_dataset_with`] with no fixed attempt count.
pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    validate_dataset_with(d, None)
}
