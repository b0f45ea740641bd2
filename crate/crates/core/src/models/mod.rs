//! Learner models: plain 3PL IRT, the zero-inflated IRT model, and KTM1.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub(crate) mod design;
pub mod features;
pub mod ktm;
pub mod zilm;

pub use features::{
    ktm_context, ktm_context_names, pi_feature_names, PiFeatureVector, KTM_CONTEXT_LEN, PI_FEATURE_LEN,
};
pub use ktm::{ktm1_grad, ktm1_nll, ktm1_prob, Ktm1Params};
pub use zilm::{
    irt_prob, pi_of, zilm_failure_prob, zilm_grad, zilm_nll, zilm_success_prob, ZilmParams, GUESS_CAP,
    IRT_PI_BIAS,
};

use crate::error::{Error, Result};
use design::Design;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Irt,
    IrtZilm,
    Ktm1,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Irt, ModelKind::Ktm1, ModelKind::IrtZilm];

    pub fn token(self) -> &'static str {
        match self {
            ModelKind::Irt => "irt",
            ModelKind::IrtZilm => "irt_zilm",
            ModelKind::Ktm1 => "ktm1",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "irt" => Ok(ModelKind::Irt),
            "irt_zilm" | "zilm" => Ok(ModelKind::IrtZilm),
            "ktm1" | "ktm" => Ok(ModelKind::Ktm1),
            other => Err(Error::config(format!("unknown model kind `{other}` (expected irt, irt_zilm or ktm1)"))),
        }
    }
}

/// L2 regularization strengths.
///
/// Each block contributes `strength · mean(x²)` over its penalized entries,
/// so the strength is independent of how many students or items there are.
/// Biases are never penalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    /// Abilities (IRT) or user weights (KTM).
    pub l2_theta: f64,
    /// Item parameters `b`, `a_raw`, `g_raw` (IRT) or item weights (KTM).
    pub l2_item: f64,
    /// Non-bias π weights (ZILM) or context weights (KTM).
    pub l2_weights: f64,
}

impl Penalty {
    pub fn none() -> Self {
        Penalty { l2_theta: 0.0, l2_item: 0.0, l2_weights: 0.0 }
    }

    /// Per-entry coefficients for blocks of the given sizes.
    pub(crate) fn coefficients(&self, n_theta: usize, n_item: usize, n_weights: usize) -> (f64, f64, f64) {
        let per = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
        (per(self.l2_theta, n_theta), per(self.l2_item, n_item), per(self.l2_weights, n_weights))
    }
}

/// Fitted parameters of any supported model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Params {
    Zilm(ZilmParams),
    Ktm1(Ktm1Params),
}

impl Params {
    pub fn zeros(kind: ModelKind, n_students: usize, n_items: usize) -> Params {
        match kind {
            ModelKind::Irt => {
                let mut p = ZilmParams::zeros(n_students, n_items);
                p.w_pi = ZilmParams::irt_pi_weights();
                Params::Zilm(p)
            }
            ModelKind::IrtZilm => Params::Zilm(ZilmParams::zeros(n_students, n_items)),
            ModelKind::Ktm1 => Params::Ktm1(Ktm1Params::zeros(n_students, n_items)),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        match self {
            Params::Zilm(p) => p.flatten(),
            Params::Ktm1(p) => p.flatten(),
        }
    }

    pub fn blocks(&self) -> Vec<(&'static str, Range<usize>)> {
        match self {
            Params::Zilm(p) => p.blocks(),
            Params::Ktm1(p) => p.blocks(),
        }
    }

    pub fn with_flat(&self, x: &[f64]) -> Params {
        match self {
            Params::Zilm(p) => Params::Zilm(ZilmParams::from_flat(p.n_students(), p.n_items(), x)),
            Params::Ktm1(p) => Params::Ktm1(Ktm1Params::from_flat(p.n_students(), p.n_items(), x)),
        }
    }

    pub fn as_zilm(&self) -> Option<&ZilmParams> {
        match self {
            Params::Zilm(p) => Some(p),
            Params::Ktm1(_) => None,
        }
    }

    pub fn as_ktm1(&self) -> Option<&Ktm1Params> {
        match self {
            Params::Ktm1(p) => Some(p),
            Params::Zilm(_) => None,
        }
    }
}

/// Blocks held fixed during fitting for a model kind.
pub fn frozen_blocks(kind: ModelKind) -> &'static [&'static str] {
    match kind {
        ModelKind::Irt => &["w_pi"],
        ModelKind::IrtZilm | ModelKind::Ktm1 => &[],
    }
}

/// A differentiable training objective over a flat parameter vector.
pub(crate) struct Objective {
    kind: ModelKind,
    design: Design,
    penalty: Penalty,
}

impl Objective {
    pub fn new(kind: ModelKind, design: Design, penalty: Penalty) -> Self {
        Objective { kind, design, penalty }
    }

    /// Penalized mean NLL; writes the gradient into `grad` when given.
    pub fn value(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        match self.kind {
            ModelKind::Irt => zilm::objective(x, &self.design, &self.penalty, false, grad),
            ModelKind::IrtZilm => zilm::objective(x, &self.design, &self.penalty, true, grad),
            ModelKind::Ktm1 => ktm::objective(x, &self.design, &self.penalty, grad),
        }
    }
}
