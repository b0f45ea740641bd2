//! Synthetic learner/item/attempt generator.
//!
//! Learners get a standard-normal ability and independent condition flags.
//! Items get 3PL parameters plus presentation context. Each attempt first
//! decides whether the context suppresses the answer altogether (with the
//! zero-inflation probability π from [`true_lqf_pi`]); if not, the 3PL curve
//! decides between correct and incorrect.
//!
//! # Severity
//!
//! π = σ(intercept + severity), where severity sums one term per condition
//! the learner has. With `L`/`D` marking letter/digit content, `R` a
//! delivery that involves reading and `T` a textual response:
//!
//! ```text
//! dyslexia     w_dyslexia    · density · L · (R + T) / 2
//! dyscalculia  w_dyscalculia · density · D · (1 + T) / 2
//! spd          w_spd         · [delivery = both]
//! ```

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{
    Attempt, Content, Dataset, Delivery, Drt, Item, NdcProfile, Outcome, Response, Split, StudentProfile, Subject,
    DENSITY_RANGE, DIFFICULTY_RANGE, DISCRIMINATION_RANGE, GUESSING_RANGE,
};
use crate::error::{Error, Result};
use crate::math::{logit, sigmoid};
use crate::rng::RandomSource;

/// Tolerance for probability rows summing to one.
const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prevalence {
    pub dyslexia: f64,
    pub dyscalculia: f64,
    pub spd: f64,
}

impl Default for Prevalence {
    fn default() -> Self {
        Prevalence {
            dyslexia: 0.1,
            dyscalculia: 0.06,
            spd: 0.11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalParams {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformRange {
    pub min: f64,
    pub max: f64,
}

impl UniformRange {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.min + (self.max - self.min) * u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClippedNormal {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectProbs {
    pub maths: f64,
    pub english: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentProbs {
    pub letter: f64,
    pub digit: f64,
    pub both: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeliveryProbs {
    pub read: f64,
    pub listen: f64,
    pub both: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseProbs {
    pub written: f64,
    pub speak: f64,
    pub click_picture: f64,
    pub click_read: f64,
}

/// Weights of the ground-truth zero-inflation model.
///
/// The condition weights are calibrated so that forcing a single delivery
/// type reproduces the expected group gaps: dyslexic learners gain 5-15
/// points of correct rate from listening, SPD learners 15-28 points from a
/// single modality, and the population mean moves by less than 3 points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LqfWeights {
    pub intercept: f64,
    pub w_dyslexia: f64,
    pub w_dyscalculia: f64,
    pub w_spd: f64,
}

impl Default for LqfWeights {
    fn default() -> Self {
        LqfWeights {
            intercept: logit(0.02),
            w_dyslexia: 8.0,
            w_dyscalculia: 15.0,
            w_spd: 3.1,
        }
    }
}

impl LqfWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.intercept, self.w_dyslexia, self.w_dyscalculia, self.w_spd];
        if all.iter().any(|w| !w.is_finite()) {
            return Err(Error::config("lqf weights must be finite"));
        }
        if sigmoid(self.intercept) >= 0.1 {
            return Err(Error::config(format!(
                "lqf.intercept {} gives baseline inflation σ(intercept) ≥ 0.1",
                self.intercept
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_students: usize,
    pub n_items: usize,
    pub n_attempts_per_student: usize,
    pub seed: u64,
    pub ndc_prevalence: Prevalence,
    pub ability: NormalParams,
    pub difficulty: UniformRange,
    pub discrimination: UniformRange,
    pub guessing: UniformRange,
    pub subject_probs: SubjectProbs,
    pub maths_content_probs: ContentProbs,
    pub english_content_probs: ContentProbs,
    pub density: ClippedNormal,
    pub delivery_probs: DeliveryProbs,
    pub response_probs: ResponseProbs,
    /// Fraction of each learner's attempts held out for testing.
    pub test_fraction: f64,
    pub lqf: LqfWeights,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_students: 5000,
            n_items: 400,
            n_attempts_per_student: 20,
            seed: 0,
            ndc_prevalence: Prevalence::default(),
            ability: NormalParams { mean: 0.0, sd: 1.0 },
            difficulty: UniformRange {
                min: DIFFICULTY_RANGE.0,
                max: DIFFICULTY_RANGE.1,
            },
            discrimination: UniformRange {
                min: DISCRIMINATION_RANGE.0,
                max: DISCRIMINATION_RANGE.1,
            },
            guessing: UniformRange {
                min: GUESSING_RANGE.0,
                max: GUESSING_RANGE.1,
            },
            subject_probs: SubjectProbs {
                maths: 0.5,
                english: 0.5,
            },
            maths_content_probs: ContentProbs {
                letter: 0.1,
                digit: 0.3,
                both: 0.6,
            },
            english_content_probs: ContentProbs {
                letter: 1.0,
                digit: 0.0,
                both: 0.0,
            },
            density: ClippedNormal {
                mean: 0.35,
                sd: 0.15,
                min: DENSITY_RANGE.0,
                max: DENSITY_RANGE.1,
            },
            delivery_probs: DeliveryProbs {
                read: 0.3,
                listen: 0.3,
                both: 0.4,
            },
            response_probs: ResponseProbs {
                written: 0.4,
                speak: 0.2,
                click_picture: 0.2,
                click_read: 0.2,
            },
            test_fraction: 0.2,
            lqf: LqfWeights::default(),
        }
    }
}

/// Provenance note recorded in every simulated dataset's manifest.
pub const MATHS_CONTENT_NOTE: &str = "maths_content_probs default (letter 0.1, digit 0.3, both 0.6): \
the published row (0.1, 0.5, 0.6) sums to 1.2; digit was normalized to 0.3";

fn check_row(name: &str, row: &[f64]) -> Result<()> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
        return Err(Error::config(format!("{name}: probabilities must lie in [0,1]")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::config(format!("{name}: probabilities sum to {sum}, expected 1")));
    }
    Ok(())
}

fn check_range(name: &str, r: &UniformRange, bounds: (f64, f64)) -> Result<()> {
    if !(r.min.is_finite() && r.max.is_finite()) || r.min > r.max {
        return Err(Error::config(format!("{name}: need finite min ≤ max")));
    }
    if r.min < bounds.0 || r.max > bounds.1 {
        return Err(Error::config(format!(
            "{name}: range [{}, {}] exceeds allowed [{}, {}]",
            r.min, r.max, bounds.0, bounds.1
        )));
    }
    Ok(())
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_students == 0 || self.n_items == 0 || self.n_attempts_per_student == 0 {
            return Err(Error::config("n_students, n_items and n_attempts_per_student must be ≥ 1"));
        }
        if self.n_attempts_per_student > self.n_items {
            return Err(Error::config(format!(
                "n_attempts_per_student ({}) exceeds n_items ({})",
                self.n_attempts_per_student, self.n_items
            )));
        }
        let p = &self.ndc_prevalence;
        for (name, v) in [("dyslexia", p.dyslexia), ("dyscalculia", p.dyscalculia), ("spd", p.spd)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("ndc_prevalence.{name} must lie in [0,1]")));
            }
        }
        if !(self.ability.mean.is_finite() && self.ability.sd.is_finite() && self.ability.sd >= 0.0) {
            return Err(Error::config("ability: need finite mean and sd ≥ 0"));
        }
        check_range("difficulty", &self.difficulty, DIFFICULTY_RANGE)?;
        check_range("discrimination", &self.discrimination, DISCRIMINATION_RANGE)?;
        check_range("guessing", &self.guessing, GUESSING_RANGE)?;
        check_row("subject_probs", &[self.subject_probs.maths, self.subject_probs.english])?;
        let c = &self.maths_content_probs;
        check_row("maths_content_probs", &[c.letter, c.digit, c.both])?;
        let c = &self.english_content_probs;
        check_row("english_content_probs", &[c.letter, c.digit, c.both])?;
        if c.letter != 1.0 {
            return Err(Error::config("english_content_probs must put all mass on letter"));
        }
        let d = &self.density;
        if !(d.mean.is_finite() && d.sd.is_finite() && d.sd >= 0.0) {
            return Err(Error::config("density: need finite mean and sd ≥ 0"));
        }
        check_range(
            "density clip",
            &UniformRange { min: d.min, max: d.max },
            DENSITY_RANGE,
        )?;
        let dp = &self.delivery_probs;
        check_row("delivery_probs", &[dp.read, dp.listen, dp.both])?;
        let rp = &self.response_probs;
        check_row("response_probs", &[rp.written, rp.speak, rp.click_picture, rp.click_read])?;
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(Error::config("test_fraction must lie in [0,1)"));
        }
        self.lqf.validate()
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn pick<T: Copy>(u: f64, options: &[(T, f64)]) -> T {
    let mut acc = 0.0;
    for &(v, p) in options {
        acc += p;
        if u < acc {
            return v;
        }
    }
    // Rounding can leave the cumulative sum a hair below 1.
    options.iter().rev().find(|(_, p)| *p > 0.0).unwrap_or(&options[0]).0
}

fn normal<R: Rng>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + sd * z
}

pub fn sample_students(cfg: &SimConfig, rng: &RandomSource) -> Vec<StudentProfile> {
    let mut r = rng.students();
    let p = cfg.ndc_prevalence;
    (0..cfg.n_students)
        .map(|id| {
            let ability = normal(&mut r, cfg.ability.mean, cfg.ability.sd);
            let dyslexia = r.random::<f64>() < p.dyslexia;
            let dyscalculia = r.random::<f64>() < p.dyscalculia;
            let spd = r.random::<f64>() < p.spd;
            StudentProfile {
                id,
                ability,
                ndc: NdcProfile::new(dyslexia, dyscalculia, spd),
            }
        })
        .collect()
}

pub fn sample_items(cfg: &SimConfig, rng: &RandomSource) -> Vec<Item> {
    let mut r = rng.items();
    let sp = cfg.subject_probs;
    let content_row = |c: &ContentProbs| [(Content::Letter, c.letter), (Content::Digit, c.digit), (Content::Both, c.both)];
    let maths = content_row(&cfg.maths_content_probs);
    let english = content_row(&cfg.english_content_probs);
    let dp = cfg.delivery_probs;
    let deliveries = [(Delivery::Read, dp.read), (Delivery::Listen, dp.listen), (Delivery::Both, dp.both)];
    let rp = cfg.response_probs;
    let responses = [
        (Response::Written, rp.written),
        (Response::Speak, rp.speak),
        (Response::ClickPicture, rp.click_picture),
        (Response::ClickRead, rp.click_read),
    ];
    let d = cfg.density;

    (0..cfg.n_items)
        .map(|id| {
            let difficulty = cfg.difficulty.sample(&mut r);
            let discrimination = cfg.discrimination.sample(&mut r);
            let guessing = cfg.guessing.sample(&mut r);
            let subject = pick(r.random(), &[(Subject::Maths, sp.maths), (Subject::English, sp.english)]);
            let u: f64 = r.random();
            let content = match subject {
                Subject::Maths => pick(u, &maths),
                Subject::English => Content::Letter,
            };
            debug_assert!(subject == Subject::Maths || pick(u, &english) == Content::Letter);
            let density = normal(&mut r, d.mean, d.sd).clamp(d.min, d.max);
            let delivery = pick(r.random(), &deliveries);
            let response = pick(r.random(), &responses);
            Item {
                id,
                difficulty,
                discrimination,
                guessing,
                subject,
                content,
                density,
                delivery,
                response,
            }
        })
        .collect()
}

/// Contextual load on a learner from one item presentation (logit scale).
pub fn severity(ndc: NdcProfile, it: &Item, w: &LqfWeights) -> f64 {
    let letters = f64::from(u8::from(it.content.has_letters()));
    let digits = f64::from(u8::from(it.content.has_digits()));
    let reads = f64::from(u8::from(it.delivery.involves_reading()));
    let text = f64::from(u8::from(it.response.is_textual()));
    let mut s = 0.0;
    if ndc.dyslexia {
        s += w.w_dyslexia * it.density * letters * (reads + text) / 2.0;
    }
    if ndc.dyscalculia {
        s += w.w_dyscalculia * it.density * digits * (1.0 + text) / 2.0;
    }
    if ndc.spd && it.delivery == Delivery::Both {
        s += w.w_spd;
    }
    s
}

/// Ground-truth zero-inflation probability for a learner on an item.
pub fn true_lqf_pi(s: &StudentProfile, it: &Item, w: &LqfWeights) -> f64 {
    sigmoid(w.intercept + severity(s.ndc, it, w))
}

/// Three-parameter logistic success probability.
pub fn irt3pl_prob(ability: f64, it: &Item) -> f64 {
    let g = it.guessing;
    g + (1.0 - g) * sigmoid(it.discrimination * (ability - it.difficulty))
}

fn test_count(n_attempts: usize, test_fraction: f64) -> usize {
    ((n_attempts as f64 * test_fraction).round() as usize).clamp(1, n_attempts)
}

/// Generates attempts with each item presented in its sampled context.
pub fn generate_attempts(
    students: &[StudentProfile],
    items: &[Item],
    cfg: &SimConfig,
    rng: &RandomSource,
) -> Result<Vec<Attempt>> {
    generate_attempts_with(students, items, cfg, rng, |_, it| it.drt())
}

/// Generates attempts, letting `present` choose the delivery/response type
/// for each (learner, item) pair.
///
/// Every learner consumes the same draws from their own stream whatever the
/// presentation, so runs that differ only in `present` share item choices,
/// uniforms and splits.
pub fn generate_attempts_with<F>(
    students: &[StudentProfile],
    items: &[Item],
    cfg: &SimConfig,
    rng: &RandomSource,
    mut present: F,
) -> Result<Vec<Attempt>>
where
    F: FnMut(&StudentProfile, &Item) -> Drt,
{
    let k = cfg.n_attempts_per_student;
    if k > items.len() {
        return Err(Error::config(format!(
            "n_attempts_per_student ({k}) exceeds the number of items ({})",
            items.len()
        )));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let n_test = test_count(k, cfg.test_fraction);
    let mut out = Vec::with_capacity(students.len() * k);
    for s in students {
        let mut r = rng.attempts_for(s.id);
        let chosen = index::sample(&mut r, items.len(), k).into_vec();
        let start = out.len();
        for &item_id in &chosen {
            let u_answer: f64 = r.random();
            let u_correct: f64 = r.random();
            let item = &items[item_id];
            let drt = present(s, item);
            let shown;
            let item = if drt == item.drt() {
                item
            } else {
                shown = item.with_drt(drt);
                &shown
            };
            let pi = true_lqf_pi(s, item, &cfg.lqf);
            let p = irt3pl_prob(s.ability, item);
            let outcome = if u_answer < pi {
                Outcome::NotAnswered
            } else if u_correct < p {
                Outcome::Correct
            } else {
                Outcome::Incorrect
            };
            out.push(Attempt {
                student_id: s.id,
                item_id,
                outcome,
                true_pi: Some(pi),
                true_p: Some(p),
                split: Split::Train,
            });
        }
        for pos in index::sample(&mut r, k, n_test) {
            out[start + pos].split = Split::Test;
        }
    }
    Ok(out)
}

pub fn generate_dataset(cfg: &SimConfig) -> Result<Dataset> {
    generate_dataset_with(cfg, |_, it| it.drt())
}

/// [`generate_dataset`] with a presentation override (see
/// [`generate_attempts_with`]). The returned items keep their sampled
/// context.
pub fn generate_dataset_with<F>(cfg: &SimConfig, present: F) -> Result<Dataset>
where
    F: FnMut(&StudentProfile, &Item) -> Drt,
{
    cfg.validate()?;
    let rng = RandomSource::new(cfg.seed);
    let students = sample_students(cfg, &rng);
    let items = sample_items(cfg, &rng);
    let attempts = generate_attempts_with(&students, &items, cfg, &rng, present)?;
    Ok(Dataset {
        students,
        items,
        attempts,
        sim_config_digest: cfg.digest(),
        seed: cfg.seed,
        notes: vec![
            MATHS_CONTENT_NOTE.to_string(),
            format!("rng: {} streams keyed by purpose and student id", rng.algorithm()),
        ],
    })
}
