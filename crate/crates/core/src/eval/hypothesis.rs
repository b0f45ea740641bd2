//! Likelihood-ratio probe for unreported conditions.

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, NdcProfile};
use crate::error::{Error, Result};
use crate::fit::{fit, fit_from, FitConfig, FittedModel};
use crate::models::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub student_id: usize,
    pub null_ndc: String,
    pub alt_ndc: String,
    pub n_attempts: usize,
    /// Summed NLL of the learner's attempts under the reported flags.
    pub nll_null: f64,
    /// Summed NLL of the learner's attempts under the alternative flags.
    pub nll_alt: f64,
    /// `2 · (nll_null − nll_alt)`; positive values favour the alternative.
    pub statistic: f64,
}

impl HypothesisResult {
    pub fn to_csv(&self) -> String {
        super::rows_to_csv(&[
            vec![
                "student_id".to_string(),
                "null_ndc".into(),
                "alt_ndc".into(),
                "n_attempts".into(),
                "nll_null".into(),
                "nll_alt".into(),
                "statistic".into(),
            ],
            vec![
                self.student_id.to_string(),
                self.null_ndc.clone(),
                self.alt_ndc.clone(),
                self.n_attempts.to_string(),
                self.nll_null.to_string(),
                self.nll_alt.to_string(),
                self.statistic.to_string(),
            ],
        ])
    }
}

/// `2 · (nll_null − nll_alt)`.
pub fn likelihood_ratio(nll_null: f64, nll_alt: f64) -> f64 {
    2.0 * (nll_null - nll_alt)
}

/// Fits IRT-ZILM with the reported flags, then with `alternative` flags for
/// one learner, and compares the two fits on that learner's attempts.
pub fn ndc_hypothesis_test(
    d: &Dataset,
    student_id: usize,
    alternative: NdcProfile,
    cfg: &FitConfig,
) -> Result<HypothesisResult> {
    check(d, student_id, alternative)?;
    let null = fit(d, ModelKind::IrtZilm, cfg)?;
    ndc_hypothesis_test_with(d, &null, student_id, alternative, cfg)
}

/// [`ndc_hypothesis_test`] reusing an already fitted null model. The
/// alternative fit starts from the null model's parameters.
pub fn ndc_hypothesis_test_with(
    d: &Dataset,
    null: &FittedModel,
    student_id: usize,
    alternative: NdcProfile,
    cfg: &FitConfig,
) -> Result<HypothesisResult> {
    check(d, student_id, alternative)?;
    if null.kind != ModelKind::IrtZilm {
        return Err(Error::config(format!("hypothesis test needs an irt_zilm null model, got {}", null.kind)));
    }
    let d_alt = d.with_student_ndc(student_id, alternative);
    let alt = fit_from(&d_alt, ModelKind::IrtZilm, cfg, null.params.clone())?;
    let (nll_null, n_attempts) = null.student_nll(d, student_id)?;
    let (nll_alt, _) = alt.student_nll(&d_alt, student_id)?;
    Ok(HypothesisResult {
        student_id,
        null_ndc: d.students[student_id].ndc.label(),
        alt_ndc: alternative.label(),
        n_attempts,
        nll_null,
        nll_alt,
        statistic: likelihood_ratio(nll_null, nll_alt),
    })
}

fn check(d: &Dataset, student_id: usize, alternative: NdcProfile) -> Result<()> {
    let s = d
        .students
        .get(student_id)
        .ok_or_else(|| Error::data(format!("unknown student {student_id}")))?;
    if s.ndc == alternative {
        return Err(Error::config(format!(
            "alternative flags `{}` equal the reported ones; the test is degenerate",
            alternative.label()
        )));
    }
    Ok(())
}
