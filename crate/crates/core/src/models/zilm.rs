//! IRT-based zero-inflated learner model (and plain 3PL IRT as its π → 0
//! special case).
//!
//! For a learner with ability θ on item (b, a, g):
//!
//! ```text
//! p  = g + (1 − g) · σ(a · (θ − b))
//! π  = σ(w_pi · x)
//! Pr(y = 1) = (1 − π) · p
//! Pr(y = 0) = π + (1 − π) · (1 − p)
//! ```
//!
//! Item parameters are stored unconstrained: `a = softplus(a_raw)` and
//! `g = 0.15 · σ(g_raw)`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::design::{sparse_dot, Design};
use super::features::{PiFeatureVector, PI_FEATURE_LEN};
use super::Penalty;
use crate::domain::{Dataset, SplitSelector};
use crate::error::{Error, Result};
use crate::math::{neg_log, sigmoid, softplus, LOG_FLOOR};

/// Upper bound of the guessing parameter.
pub const GUESS_CAP: f64 = 0.15;

/// Frozen π bias for plain IRT (π ≈ 2e-9).
pub const IRT_PI_BIAS: f64 = -20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZilmParams {
    pub theta: Vec<f64>,
    pub b: Vec<f64>,
    pub a_raw: Vec<f64>,
    pub g_raw: Vec<f64>,
    pub w_pi: Vec<f64>,
}

impl ZilmParams {
    pub fn zeros(n_students: usize, n_items: usize) -> Self {
        ZilmParams {
            theta: vec![0.0; n_students],
            b: vec![0.0; n_items],
            a_raw: vec![0.0; n_items],
            g_raw: vec![0.0; n_items],
            w_pi: vec![0.0; PI_FEATURE_LEN],
        }
    }

    /// π weights of plain IRT: bias only, at [`IRT_PI_BIAS`].
    pub fn irt_pi_weights() -> Vec<f64> {
        let mut w = vec![0.0; PI_FEATURE_LEN];
        w[0] = IRT_PI_BIAS;
        w
    }

    pub fn n_students(&self) -> usize {
        self.theta.len()
    }

    pub fn n_items(&self) -> usize {
        self.b.len()
    }

    pub fn discrimination(&self, item: usize) -> f64 {
        softplus(self.a_raw[item])
    }

    pub fn guessing(&self, item: usize) -> f64 {
        GUESS_CAP * sigmoid(self.g_raw[item])
    }

    /// Named parameter blocks in flat order.
    pub fn blocks(&self) -> Vec<(&'static str, Range<usize>)> {
        let (s, i) = (self.n_students(), self.n_items());
        vec![
            ("theta", 0..s),
            ("b", s..s + i),
            ("a_raw", s + i..s + 2 * i),
            ("g_raw", s + 2 * i..s + 3 * i),
            ("w_pi", s + 3 * i..s + 3 * i + self.w_pi.len()),
        ]
    }

    pub fn flatten(&self) -> Vec<f64> {
        [&self.theta, &self.b, &self.a_raw, &self.g_raw, &self.w_pi]
            .into_iter()
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    pub fn from_flat(n_students: usize, n_items: usize, x: &[f64]) -> Self {
        assert_eq!(x.len(), n_students + 3 * n_items + PI_FEATURE_LEN);
        let (theta, rest) = x.split_at(n_students);
        let (b, rest) = rest.split_at(n_items);
        let (a_raw, rest) = rest.split_at(n_items);
        let (g_raw, w_pi) = rest.split_at(n_items);
        ZilmParams {
            theta: theta.to_vec(),
            b: b.to_vec(),
            a_raw: a_raw.to_vec(),
            g_raw: g_raw.to_vec(),
            w_pi: w_pi.to_vec(),
        }
    }

    fn check_shape(&self) -> Result<()> {
        let n_i = self.n_items();
        if self.a_raw.len() != n_i || self.g_raw.len() != n_i {
            return Err(Error::data("item parameter blocks differ in length"));
        }
        if self.w_pi.len() != PI_FEATURE_LEN {
            return Err(Error::data(format!(
                "w_pi has {} weights, expected {PI_FEATURE_LEN}",
                self.w_pi.len()
            )));
        }
        Ok(())
    }

    fn check_dataset(&self, d: &Dataset) -> Result<()> {
        self.check_shape()?;
        if d.students.len() != self.n_students() || d.items.len() != self.n_items() {
            return Err(Error::data(format!(
                "parameters cover {} students × {} items, dataset has {} × {}",
                self.n_students(),
                self.n_items(),
                d.students.len(),
                d.items.len()
            )));
        }
        Ok(())
    }
}

/// Probability of a correct answer under the zero-inflated mixture.
pub fn zilm_success_prob(pi: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pi) || !(0.0..=1.0).contains(&p) {
        return Err(Error::data(format!("probabilities out of range: π={pi}, p={p}")));
    }
    Ok((1.0 - pi) * p)
}

/// Probability of a zero (not answered or incorrect).
pub fn zilm_failure_prob(pi: f64, p: f64) -> Result<f64> {
    zilm_success_prob(pi, p)?;
    Ok(pi + (1.0 - pi) * (1.0 - p))
}

pub fn pi_of(params: &ZilmParams, x: &PiFeatureVector) -> Result<f64> {
    if params.w_pi.len() != PI_FEATURE_LEN {
        return Err(Error::data(format!(
            "w_pi has {} weights, expected {PI_FEATURE_LEN}",
            params.w_pi.len()
        )));
    }
    Ok(sigmoid(x.dot(&params.w_pi)))
}

/// 3PL success probability using the fitted (transformed) item parameters.
pub fn irt_prob(params: &ZilmParams, student_id: usize, item_id: usize) -> Result<f64> {
    let theta = *params
        .theta
        .get(student_id)
        .ok_or_else(|| Error::data(format!("unknown student {student_id}")))?;
    if item_id >= params.n_items() {
        return Err(Error::data(format!("unknown item {item_id}")));
    }
    let a = params.discrimination(item_id);
    let g = params.guessing(item_id);
    Ok(g + (1.0 - g) * sigmoid(a * (theta - params.b[item_id])))
}

/// Mean negative log-likelihood of `split` plus L2 penalties.
pub fn zilm_nll(params: &ZilmParams, d: &Dataset, split: SplitSelector, penalty: &Penalty) -> Result<f64> {
    params.check_dataset(d)?;
    let design = Design::for_split(d, split)?;
    Ok(objective(&params.flatten(), &design, penalty, true, None))
}

/// Analytic gradient of [`zilm_nll`], in the same shape as the parameters.
pub fn zilm_grad(params: &ZilmParams, d: &Dataset, split: SplitSelector, penalty: &Penalty) -> Result<ZilmParams> {
    params.check_dataset(d)?;
    let design = Design::for_split(d, split)?;
    let x = params.flatten();
    let mut g = vec![0.0; x.len()];
    objective(&x, &design, penalty, true, Some(&mut g));
    Ok(ZilmParams::from_flat(params.n_students(), params.n_items(), &g))
}

/// `σ(u)` and `σ(−u)` from a single exponential.
#[inline]
fn sigmoid_pair(u: f64) -> (f64, f64) {
    let e = (-u.abs()).exp();
    let big = 1.0 / (1.0 + e);
    let small = e / (1.0 + e);
    if u >= 0.0 {
        (big, small)
    } else {
        (small, big)
    }
}

/// Penalized mean NLL over `design` for flat parameters `x`.
///
/// When `fit_pi` is false the π weights are treated as constants: they get
/// neither gradient nor penalty.
pub(crate) fn objective(x: &[f64], design: &Design, penalty: &Penalty, fit_pi: bool, grad: Option<&mut [f64]>) -> f64 {
    let n_s = design.n_students;
    let n_i = design.n_items;
    let (theta, rest) = x.split_at(n_s);
    let (b, rest) = rest.split_at(n_i);
    let (a_raw, rest) = rest.split_at(n_i);
    let (g_raw, w) = rest.split_at(n_i);

    let a: Vec<f64> = a_raw.iter().map(|&r| softplus(r)).collect();
    let g: Vec<f64> = g_raw.iter().map(|&r| GUESS_CAP * sigmoid(r)).collect();
    let pi: Vec<f64> = design.contexts.iter().map(|c| sigmoid(sparse_dot(&c.pi_x, w))).collect();

    let n = design.len() as f64;
    let mut nll = 0.0;

    match grad {
        None => {
            for k in 0..design.len() {
                let (s, i) = (design.student[k] as usize, design.item[k] as usize);
                let (sp, sm) = sigmoid_pair(a[i] * (theta[s] - b[i]));
                let p = g[i] + (1.0 - g[i]) * sp;
                let q = (1.0 - g[i]) * sm;
                let pk = pi[design.context[k] as usize];
                nll += if design.y[k] {
                    neg_log((1.0 - pk) * p)
                } else {
                    neg_log(pk + (1.0 - pk) * q)
                };
            }
        }
        Some(grad) => {
            grad.fill(0.0);
            let (g_theta, rest) = grad.split_at_mut(n_s);
            let (g_b, rest) = rest.split_at_mut(n_i);
            let (g_a, rest) = rest.split_at_mut(n_i);
            let (g_g, g_w) = rest.split_at_mut(n_i);
            let mut g_ctx = vec![0.0; design.contexts.len()];

            for k in 0..design.len() {
                let (s, i) = (design.student[k] as usize, design.item[k] as usize);
                let diff = theta[s] - b[i];
                let (sp, sm) = sigmoid_pair(a[i] * diff);
                let p = g[i] + (1.0 - g[i]) * sp;
                let q = (1.0 - g[i]) * sm;
                let c = design.context[k] as usize;
                let pk = pi[c];

                // dL/dπ and dL/dp; zero where the log floor is active.
                let (d_pi, d_p) = if design.y[k] {
                    let prob = (1.0 - pk) * p;
                    nll += neg_log(prob);
                    if prob > LOG_FLOOR {
                        (p / prob, -(1.0 - pk) / prob)
                    } else {
                        (0.0, 0.0)
                    }
                } else {
                    let prob = pk + (1.0 - pk) * q;
                    nll += neg_log(prob);
                    if prob > LOG_FLOOR {
                        (-p / prob, (1.0 - pk) / prob)
                    } else {
                        (0.0, 0.0)
                    }
                };

                g_ctx[c] += d_pi * pk * (1.0 - pk);
                let d_u = d_p * (1.0 - g[i]) * sp * sm;
                g_theta[s] += d_u * a[i];
                g_b[i] -= d_u * a[i];
                g_a[i] += d_u * diff * sigmoid(a_raw[i]);
                g_g[i] += d_p * sm * GUESS_CAP * sigmoid(g_raw[i]) * sigmoid(-g_raw[i]);
            }

            let inv_n = 1.0 / n;
            for v in g_theta.iter_mut().chain(g_b.iter_mut()).chain(g_a.iter_mut()).chain(g_g.iter_mut()) {
                *v *= inv_n;
            }
            if fit_pi {
                for (ctx, gz) in design.contexts.iter().zip(&g_ctx) {
                    for &(f, v) in &ctx.pi_x {
                        g_w[f as usize] += gz * v * inv_n;
                    }
                }
            }

            let (ct, ci, cw) = penalty.coefficients(n_s, n_i, w.len() - 1);
            for (gv, v) in g_theta.iter_mut().zip(theta) {
                *gv += 2.0 * ct * v;
            }
            for (block, vals) in [(&mut *g_b, b), (&mut *g_a, a_raw), (&mut *g_g, g_raw)] {
                for (gv, v) in block.iter_mut().zip(vals) {
                    *gv += 2.0 * ci * v;
                }
            }
            if fit_pi {
                for (gv, v) in g_w.iter_mut().zip(w).skip(1) {
                    *gv += 2.0 * cw * v;
                }
            }
        }
    }

    nll / n + penalty_value(penalty, theta, &[b, a_raw, g_raw], if fit_pi { Some(w) } else { None })
}

fn penalty_value(penalty: &Penalty, theta: &[f64], items: &[&[f64]; 3], w: Option<&[f64]>) -> f64 {
    let n_w = w.map_or(1, |w| w.len() - 1);
    let (ct, ci, cw) = penalty.coefficients(theta.len(), items[0].len(), n_w);
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let mut total = ct * sq(theta) + ci * items.iter().map(|v| sq(v)).sum::<f64>();
    if let Some(w) = w {
        total += cw * sq(&w[1..]);
    }
    total
}
