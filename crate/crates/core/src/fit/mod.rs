//! Full-batch first-order fitting of the learner models.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{Dataset, Item, SplitSelector};
use crate::error::{Error, Result};
use crate::math::{logit, sigmoid};
use crate::models::design::Design;
use crate::models::{
    frozen_blocks, ktm_context, ktm_context_names, pi_feature_names, ModelKind, Objective, Params, Penalty,
    PiFeatureVector, GUESS_CAP,
};
use crate::rng::{stream, RandomSource};

mod gradcheck;

pub use gradcheck::{check_gradients, BlockError, GradientReport};

pub const MODEL_FILE: &str = "model.json";
pub const TRACE_FILE: &str = "trace.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    GradientDescent,
    AdaptiveMoments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    /// Consecutive iterations below `rel_tol` required to stop.
    pub patience: usize,
    pub l2_theta: f64,
    pub l2_item: f64,
    pub l2_weights: f64,
    pub init_scale: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            learning_rate: 0.05,
            max_iters: 3000,
            rel_tol: 1e-7,
            patience: 5,
            l2_theta: 0.01,
            l2_item: 0.001,
            l2_weights: 0.001,
            init_scale: 0.01,
            seed: 0,
            optimizer: Optimizer::AdaptiveMoments,
        }
    }
}

impl FitConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: FitConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("fit config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("learning_rate", self.learning_rate), ("rel_tol", self.rel_tol)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("l2_theta", self.l2_theta),
            ("l2_item", self.l2_item),
            ("l2_weights", self.l2_weights),
            ("init_scale", self.init_scale),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        if self.patience == 0 {
            return Err(Error::config("patience must be at least 1"));
        }
        Ok(())
    }

    pub fn penalty(&self) -> Penalty {
        Penalty { l2_theta: self.l2_theta, l2_item: self.l2_item, l2_weights: self.l2_weights }
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    /// Penalized train NLL at the start of every iteration.
    pub nll: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl TrainingTrace {
    pub fn final_nll(&self) -> Option<f64> {
        self.nll.last().copied()
    }
}

/// Parameter transform identifiers recorded in `model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transforms {
    pub discrimination: String,
    pub guessing: String,
    pub pi: String,
    pub success: String,
}

impl Transforms {
    fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Irt | ModelKind::IrtZilm => Transforms {
                discrimination: "softplus".into(),
                guessing: format!("{GUESS_CAP}*logistic"),
                pi: "logistic(w_pi . x)".into(),
                success: if kind == ModelKind::Irt { "3pl".into() } else { "(1-pi)*3pl".into() },
            },
            ModelKind::Ktm1 => Transforms {
                discrimination: "none".into(),
                guessing: "none".into(),
                pi: "none".into(),
                success: "logistic(bias+user+item+context)".into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub params: Params,
    pub transforms: Transforms,
    pub feature_names: Vec<String>,
    pub config: FitConfig,
    pub dataset_digest: String,
    pub trace: TrainingTrace,
}

impl FittedModel {
    fn check_ids(&self, d: &Dataset, student_id: usize, item_id: usize) -> Result<()> {
        let (n_s, n_i) = match &self.params {
            Params::Zilm(p) => (p.n_students(), p.n_items()),
            Params::Ktm1(p) => (p.n_students(), p.n_items()),
        };
        if d.students.len() != n_s || d.items.len() != n_i {
            return Err(Error::data("model and dataset sizes differ"));
        }
        if student_id >= n_s {
            return Err(Error::data(format!("unknown student {student_id}")));
        }
        if item_id >= n_i {
            return Err(Error::data(format!("unknown item {item_id}")));
        }
        Ok(())
    }

    /// Probability of a correct answer.
    pub fn predict(&self, d: &Dataset, student_id: usize, item_id: usize) -> Result<f64> {
        self.check_ids(d, student_id, item_id)?;
        self.predict_with(d, student_id, item_id, &d.items[item_id])
    }

    /// Like [`predict`](Self::predict) but with the item's context
    /// (delivery, response, content, density) taken from `context`; the
    /// item-level parameters still come from `item_id`.
    pub fn predict_with(&self, d: &Dataset, student_id: usize, item_id: usize, context: &Item) -> Result<f64> {
        self.check_ids(d, student_id, item_id)?;
        let ndc = d.students[student_id].ndc;
        Ok(match &self.params {
            Params::Zilm(p) => {
                let a = p.discrimination(item_id);
                let g = p.guessing(item_id);
                let prob = g + (1.0 - g) * sigmoid(a * (p.theta[student_id] - p.b[item_id]));
                match self.kind {
                    ModelKind::Irt => prob,
                    _ => (1.0 - sigmoid(PiFeatureVector::new(ndc, context).dot(&p.w_pi))) * prob,
                }
            }
            Params::Ktm1(p) => {
                let ctx = ktm_context(ndc, context);
                let z = p.bias
                    + p.user_weights[student_id]
                    + p.item_weights[item_id]
                    + ctx.iter().zip(&p.context_weights).map(|(x, w)| x * w).sum::<f64>();
                sigmoid(z)
            }
        })
    }

    /// Fitted non-engagement probability π; `None` for models without it.
    pub fn pi(&self, d: &Dataset, student_id: usize, context: &Item) -> Option<f64> {
        match (&self.params, self.kind) {
            (Params::Zilm(p), ModelKind::IrtZilm) => {
                let ndc = d.students.get(student_id)?.ndc;
                Some(sigmoid(PiFeatureVector::new(ndc, context).dot(&p.w_pi)))
            }
            _ => None,
        }
    }

    /// Predicted success probability for every attempt in `split`, in
    /// dataset order, paired with the observed label.
    pub fn predict_split(&self, d: &Dataset, split: SplitSelector) -> Result<Vec<(f64, bool)>> {
        d.attempts_in(split)
            .map(|a| Ok((self.predict(d, a.student_id, a.item_id)?, a.y())))
            .collect()
    }

    /// Estimated abilities: θ for IRT kinds, user weights for KTM1.
    pub fn abilities(&self) -> &[f64] {
        match &self.params {
            Params::Zilm(p) => &p.theta,
            Params::Ktm1(p) => &p.user_weights,
        }
    }

    /// Estimated difficulties: `b` for IRT kinds, negated item weights for KTM1.
    pub fn difficulties(&self) -> Vec<f64> {
        match &self.params {
            Params::Zilm(p) => p.b.clone(),
            Params::Ktm1(p) => p.item_weights.iter().map(|v| -v).collect(),
        }
    }

    /// Mean unpenalized NLL over `split`.
    pub fn nll(&self, d: &Dataset, split: SplitSelector) -> Result<f64> {
        let design = Design::for_split(d, split)?;
        let obj = Objective::new(self.kind, design, Penalty::none());
        Ok(obj.value(&self.params.flatten(), None))
    }

    /// Summed unpenalized NLL of one learner's attempts (all splits) and
    /// the number of attempts.
    pub fn student_nll(&self, d: &Dataset, student_id: usize) -> Result<(f64, usize)> {
        let design = Design::build(d, |a| a.student_id == student_id)?;
        if design.is_empty() {
            return Err(Error::data(format!("student {student_id} has no attempts")));
        }
        let n = design.len();
        let obj = Objective::new(self.kind, design, Penalty::none());
        Ok((obj.value(&self.params.flatten(), None) * n as f64, n))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::data(format!("model.json: {e}")))
    }

    /// Writes `model.json` and `trace.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(MODEL_FILE);
        fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
        let path = dir.join(TRACE_FILE);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        let csv_err = |e: csv::Error| Error::data(format!("{}: {e}", path.display()));
        w.write_record(["iter", "nll"]).map_err(csv_err)?;
        for (i, v) in self.trace.nll.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(())
    }

    /// Loads a model from a directory containing `model.json`, or from the
    /// file itself.
    pub fn load(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MODEL_FILE) } else { path.to_path_buf() };
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        FittedModel::from_json(&text)
    }
}

/// Digest identifying a dataset's contents for model provenance.
pub fn dataset_digest(d: &Dataset) -> String {
    let mut h = Sha256::new();
    h.update(d.sim_config_digest.as_bytes());
    h.update(d.seed.to_le_bytes());
    for a in &d.attempts {
        h.update((a.student_id as u64).to_le_bytes());
        h.update((a.item_id as u64).to_le_bytes());
        h.update([a.outcome as u8, a.split as u8]);
    }
    hex::encode(h.finalize())
}

/// Seeded starting point for `kind`.
pub fn initial_params(kind: ModelKind, d: &Dataset, cfg: &FitConfig) -> Params {
    let template = Params::zeros(kind, d.students.len(), d.items.len());
    let mut x = template.flatten();
    let mut rng = RandomSource::new(cfg.seed).stream(stream::FIT_INIT);
    let frozen = frozen_blocks(kind);
    for (name, range) in template.blocks() {
        if frozen.contains(&name) {
            continue;
        }
        for v in &mut x[range] {
            let z: f64 = rng.sample(StandardNormal);
            *v = cfg.init_scale * z;
        }
    }
    if kind == ModelKind::IrtZilm {
        let (_, w) = template.blocks().into_iter().find(|(n, _)| *n == "w_pi").expect("w_pi block");
        x[w.start] = logit(0.05);
    }
    template.with_flat(&x)
}

/// Fits `kind` to the train split of `d`.
pub fn fit(d: &Dataset, kind: ModelKind, cfg: &FitConfig) -> Result<FittedModel> {
    let init = initial_params(kind, d, cfg);
    fit_from(d, kind, cfg, init)
}

/// Fits `kind` to the train split of `d` starting from `init`.
pub fn fit_from(d: &Dataset, kind: ModelKind, cfg: &FitConfig, init: Params) -> Result<FittedModel> {
    cfg.validate()?;
    let design = Design::for_split(d, SplitSelector::Train)
        .map_err(|_| Error::data("train split is empty; nothing to fit"))?;
    let expected = Params::zeros(kind, d.students.len(), d.items.len()).flatten().len();
    if init.flatten().len() != expected {
        return Err(Error::data("initial parameters do not match the dataset"));
    }
    let objective = Objective::new(kind, design, cfg.penalty());
    let mut free = vec![true; expected];
    for (name, range) in init.blocks() {
        if frozen_blocks(kind).contains(&name) {
            free[range].fill(false);
        }
    }
    let (x, trace) = minimize(&objective, init.flatten(), &free, cfg)?;
    Ok(FittedModel {
        kind,
        params: init.with_flat(&x),
        transforms: Transforms::for_kind(kind),
        feature_names: match kind {
            ModelKind::Ktm1 => ktm_context_names(),
            _ => pi_feature_names(),
        },
        config: cfg.clone(),
        dataset_digest: dataset_digest(d),
        trace,
    })
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn minimize(obj: &Objective, mut x: Vec<f64>, free: &[bool], cfg: &FitConfig) -> Result<(Vec<f64>, TrainingTrace)> {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut trace = TrainingTrace::default();
    let mut prev: Option<f64> = None;
    let mut calm = 0;

    for iter in 0..cfg.max_iters {
        let f = obj.value(&x, Some(&mut g));
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric { iteration: iter, message: format!("objective evaluated to {f}") });
        }
        trace.nll.push(f);
        trace.iterations = iter + 1;
        if let Some(p) = prev {
            if (p - f).abs() < cfg.rel_tol * p.abs().max(f64::MIN_POSITIVE) {
                calm += 1;
                if calm >= cfg.patience {
                    trace.converged = true;
                    break;
                }
            } else {
                calm = 0;
            }
        }
        prev = Some(f);

        match cfg.optimizer {
            Optimizer::GradientDescent => {
                for k in 0..n {
                    if free[k] {
                        x[k] -= cfg.learning_rate * g[k];
                    }
                }
            }
            Optimizer::AdaptiveMoments => {
                let t = (iter + 1) as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                for k in 0..n {
                    if !free[k] {
                        continue;
                    }
                    m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * g[k];
                    v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * g[k] * g[k];
                    let mh = m[k] / c1;
                    let vh = v[k] / c2;
                    x[k] -= cfg.learning_rate * mh / (vh.sqrt() + ADAM_EPS);
                }
            }
        }
    }
    Ok((x, trace))
}
