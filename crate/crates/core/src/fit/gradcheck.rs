//! Analytic-versus-numeric gradient comparison.

use serde::{Deserialize, Serialize};

use super::{initial_params, FitConfig};
use crate::domain::{Dataset, SplitSelector};
use crate::error::{Error, Result};
use crate::models::design::Design;
use crate::models::{frozen_blocks, ModelKind, Objective};

/// Largest number of coordinates probed per block.
const MAX_PER_BLOCK: usize = 64;

/// Minimum spread of the random evaluation point.
const MIN_POINT_SCALE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockError {
    pub block: String,
    pub checked: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub kind: ModelKind,
    pub epsilon: f64,
    pub blocks: Vec<BlockError>,
    pub max_rel_error: f64,
}

/// Relative error `|a − n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares the analytic gradient of the penalized train objective with
/// central differences of step `epsilon`.
///
/// The comparison point is drawn like a fit's initialization, but with a
/// spread of at least 0.5 so that the curvature terms are exercised. Blocks
/// larger than 64 entries are probed at 64 evenly spaced coordinates. Frozen
/// blocks are skipped.
pub fn check_gradients(kind: ModelKind, d: &Dataset, cfg: &FitConfig, epsilon: f64) -> Result<GradientReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::config(format!("epsilon must be positive, got {epsilon}")));
    }
    let design = Design::for_split(d, SplitSelector::Train)?;
    let obj = Objective::new(kind, design, cfg.penalty());
    let point_cfg = FitConfig { init_scale: cfg.init_scale.max(MIN_POINT_SCALE), ..cfg.clone() };
    let params = initial_params(kind, d, &point_cfg);
    let mut x = params.flatten();
    let mut grad = vec![0.0; x.len()];
    obj.value(&x, Some(&mut grad));

    let mut blocks = Vec::new();
    for (name, range) in params.blocks() {
        if frozen_blocks(kind).contains(&name) {
            continue;
        }
        let len = range.len();
        let step = len.div_ceil(MAX_PER_BLOCK).max(1);
        let mut worst: f64 = 0.0;
        let mut checked = 0;
        for k in range.clone().step_by(step) {
            let orig = x[k];
            x[k] = orig + epsilon;
            let up = obj.value(&x, None);
            x[k] = orig - epsilon;
            let down = obj.value(&x, None);
            x[k] = orig;
            let numeric = (up - down) / (2.0 * epsilon);
            worst = worst.max(relative_error(grad[k], numeric));
            checked += 1;
        }
        blocks.push(BlockError { block: name.to_string(), checked, max_rel_error: worst });
    }
    let max_rel_error = blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max);
    Ok(GradientReport { kind, epsilon, blocks, max_rel_error })
}
