//! Frozen feature maps for the zero-inflation component and the KTM context.

use crate::domain::{Item, NdcProfile};

/// Length of [`PiFeatureVector`].
pub const PI_FEATURE_LEN: usize = 48;

/// Length of the KTM context feature vector.
pub const KTM_CONTEXT_LEN: usize = 14;

const NDC_NAMES: [&str; 3] = ["dyslexia", "dyscalculia", "spd"];
const DELIVERY_NAMES: [&str; 3] = ["read", "listen", "both"];
const RESPONSE_NAMES: [&str; 4] = ["written", "speak", "click_picture", "click_read"];
const CONTENT_NAMES: [&str; 3] = ["letter", "digit", "both"];

// Offsets into the zero-inflation feature vector.
const BIAS: usize = 0;
const NDC: usize = 1;
const DELIVERY: usize = 4;
const RESPONSE: usize = 7;
const CONTENT: usize = 11;
const DENSITY: usize = 14;
const NDC_X_DELIVERY: usize = 15;
const NDC_X_RESPONSE: usize = 24;
const NDC_X_CONTENT: usize = 36;
const NDC_X_DENSITY: usize = 45;

/// Features of one (learner, item) pair for the zero-inflation model.
///
/// Layout, in order:
///
/// | index | feature |
/// |-------|---------|
/// | 0 | bias |
/// | 1-3 | dyslexia, dyscalculia, spd |
/// | 4-6 | delivery one-hot (read, listen, both) |
/// | 7-10 | response one-hot (written, speak, click_picture, click_read) |
/// | 11-13 | content one-hot (letter, digit, both) |
/// | 14 | density |
/// | 15-23 | condition × delivery, condition-major |
/// | 24-35 | condition × response |
/// | 36-44 | condition × content |
/// | 45-47 | condition × density |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiFeatureVector(pub [f64; PI_FEATURE_LEN]);

impl PiFeatureVector {
    pub fn new(ndc: NdcProfile, item: &Item) -> Self {
        let mut x = [0.0; PI_FEATURE_LEN];
        let d = item.delivery.index();
        let r = item.response.index();
        let c = item.content.index();
        x[BIAS] = 1.0;
        x[DELIVERY + d] = 1.0;
        x[RESPONSE + r] = 1.0;
        x[CONTENT + c] = 1.0;
        x[DENSITY] = item.density;
        for (k, flag) in ndc.flags().into_iter().enumerate() {
            if flag {
                x[NDC + k] = 1.0;
                x[NDC_X_DELIVERY + 3 * k + d] = 1.0;
                x[NDC_X_RESPONSE + 4 * k + r] = 1.0;
                x[NDC_X_CONTENT + 3 * k + c] = 1.0;
                x[NDC_X_DENSITY + k] = item.density;
            }
        }
        PiFeatureVector(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().zip(w).map(|(x, w)| x * w).sum()
    }

    pub(crate) fn sparse(&self) -> Vec<(u16, f64)> {
        sparse(&self.0)
    }
}

fn sparse(x: &[f64]) -> Vec<(u16, f64)> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i as u16, *v))
        .collect()
}

/// Names of the zero-inflation features, in vector order.
pub fn pi_feature_names() -> Vec<String> {
    let mut names = vec!["bias".to_string()];
    names.extend(NDC_NAMES.iter().map(|s| s.to_string()));
    names.extend(DELIVERY_NAMES.iter().map(|s| format!("delivery={s}")));
    names.extend(RESPONSE_NAMES.iter().map(|s| format!("response={s}")));
    names.extend(CONTENT_NAMES.iter().map(|s| format!("content={s}")));
    names.push("density".into());
    for n in NDC_NAMES {
        names.extend(DELIVERY_NAMES.iter().map(|s| format!("{n}*delivery={s}")));
    }
    for n in NDC_NAMES {
        names.extend(RESPONSE_NAMES.iter().map(|s| format!("{n}*response={s}")));
    }
    for n in NDC_NAMES {
        names.extend(CONTENT_NAMES.iter().map(|s| format!("{n}*content={s}")));
    }
    names.extend(NDC_NAMES.iter().map(|n| format!("{n}*density")));
    names
}

/// KTM context features: delivery (3), response (4), content (3) one-hots,
/// density, then the three condition flags.
pub fn ktm_context(ndc: NdcProfile, item: &Item) -> [f64; KTM_CONTEXT_LEN] {
    let mut x = [0.0; KTM_CONTEXT_LEN];
    x[item.delivery.index()] = 1.0;
    x[3 + item.response.index()] = 1.0;
    x[7 + item.content.index()] = 1.0;
    x[10] = item.density;
    for (k, flag) in ndc.flags().into_iter().enumerate() {
        if flag {
            x[11 + k] = 1.0;
        }
    }
    x
}

pub(crate) fn ktm_context_sparse(ndc: NdcProfile, item: &Item) -> Vec<(u16, f64)> {
    sparse(&ktm_context(ndc, item))
}

pub fn ktm_context_names() -> Vec<String> {
    let mut names = Vec::new();
    names.extend(DELIVERY_NAMES.iter().map(|s| format!("delivery={s}")));
    names.extend(RESPONSE_NAMES.iter().map(|s| format!("response={s}")));
    names.extend(CONTENT_NAMES.iter().map(|s| format!("content={s}")));
    names.push("density".into());
    names.extend(NDC_NAMES.iter().map(|s| s.to_string()));
    names
}
