//! First-order knowledge tracing machine: a logistic model over user, item
//! and context indicators.
//!
//! ```text
//! Pr(y = 1) = σ(bias + u_student + v_item + c · context)
//! ```
//!
//! Item difficulty is read off as `−v_item`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::design::{sparse_dot, Design};
use super::features::{ktm_context, KTM_CONTEXT_LEN};
use super::Penalty;
use crate::domain::{Dataset, SplitSelector};
use crate::error::{Error, Result};
use crate::math::{neg_log, sigmoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ktm1Params {
    pub user_weights: Vec<f64>,
    pub item_weights: Vec<f64>,
    pub context_weights: Vec<f64>,
    pub bias: f64,
}

impl Ktm1Params {
    pub fn zeros(n_students: usize, n_items: usize) -> Self {
        Ktm1Params {
            user_weights: vec![0.0; n_students],
            item_weights: vec![0.0; n_items],
            context_weights: vec![0.0; KTM_CONTEXT_LEN],
            bias: 0.0,
        }
    }

    pub fn n_students(&self) -> usize {
        self.user_weights.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_weights.len()
    }

    pub fn blocks(&self) -> Vec<(&'static str, Range<usize>)> {
        let (s, i, c) = (self.n_students(), self.n_items(), self.context_weights.len());
        vec![
            ("user_weights", 0..s),
            ("item_weights", s..s + i),
            ("context_weights", s + i..s + i + c),
            ("bias", s + i + c..s + i + c + 1),
        ]
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.n_students() + self.n_items() + KTM_CONTEXT_LEN + 1);
        x.extend(&self.user_weights);
        x.extend(&self.item_weights);
        x.extend(&self.context_weights);
        x.push(self.bias);
        x
    }

    pub fn from_flat(n_students: usize, n_items: usize, x: &[f64]) -> Self {
        assert_eq!(x.len(), n_students + n_items + KTM_CONTEXT_LEN + 1);
        let (u, rest) = x.split_at(n_students);
        let (v, rest) = rest.split_at(n_items);
        let (c, bias) = rest.split_at(KTM_CONTEXT_LEN);
        Ktm1Params {
            user_weights: u.to_vec(),
            item_weights: v.to_vec(),
            context_weights: c.to_vec(),
            bias: bias[0],
        }
    }

    fn check_dataset(&self, d: &Dataset) -> Result<()> {
        if self.context_weights.len() != KTM_CONTEXT_LEN {
            return Err(Error::data(format!(
                "context_weights has {} entries, expected {KTM_CONTEXT_LEN}",
                self.context_weights.len()
            )));
        }
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

/// Success probability for one student on one item of `d`.
pub fn ktm1_prob(params: &Ktm1Params, d: &Dataset, student_id: usize, item_id: usize) -> Result<f64> {
    params.check_dataset(d)?;
    let student = d
        .students
        .get(student_id)
        .ok_or_else(|| Error::data(format!("unknown student {student_id}")))?;
    let item = d.items.get(item_id).ok_or_else(|| Error::data(format!("unknown item {item_id}")))?;
    let ctx = ktm_context(student.ndc, item);
    let z = params.bias
        + params.user_weights[student_id]
        + params.item_weights[item_id]
        + ctx.iter().zip(&params.context_weights).map(|(x, w)| x * w).sum::<f64>();
    Ok(sigmoid(z))
}

pub fn ktm1_nll(params: &Ktm1Params, d: &Dataset, split: SplitSelector, penalty: &Penalty) -> Result<f64> {
    params.check_dataset(d)?;
    let design = Design::for_split(d, split)?;
    Ok(objective(&params.flatten(), &design, penalty, None))
}

pub fn ktm1_grad(params: &Ktm1Params, d: &Dataset, split: SplitSelector, penalty: &Penalty) -> Result<Ktm1Params> {
    params.check_dataset(d)?;
    let design = Design::for_split(d, split)?;
    let x = params.flatten();
    let mut g = vec![0.0; x.len()];
    objective(&x, &design, penalty, Some(&mut g));
    Ok(Ktm1Params::from_flat(params.n_students(), params.n_items(), &g))
}

pub(crate) fn objective(x: &[f64], design: &Design, penalty: &Penalty, grad: Option<&mut [f64]>) -> f64 {
    let n_s = design.n_students;
    let n_i = design.n_items;
    let (u, rest) = x.split_at(n_s);
    let (v, rest) = rest.split_at(n_i);
    let (c, bias) = rest.split_at(KTM_CONTEXT_LEN);
    let bias = bias[0];
    let ctx_dot: Vec<f64> = design.contexts.iter().map(|ctx| sparse_dot(&ctx.ktm_x, c)).collect();

    let n = design.len() as f64;
    let mut nll = 0.0;
    let mut grad = grad;
    let mut g_ctx = vec![0.0; if grad.is_some() { design.contexts.len() } else { 0 }];
    if let Some(g) = grad.as_deref_mut() {
        g.fill(0.0);
    }

    for k in 0..design.len() {
        let (s, i) = (design.student[k] as usize, design.item[k] as usize);
        let ci = design.context[k] as usize;
        let z = bias + u[s] + v[i] + ctx_dot[ci];
        let p = sigmoid(z);
        nll += if design.y[k] { neg_log(p) } else { neg_log(1.0 - p) };
        if let Some(g) = grad.as_deref_mut() {
            // d(-log Bernoulli)/dz; clamped logs contribute no gradient.
            let prob = if design.y[k] { p } else { 1.0 - p };
            let dz = if prob > crate::math::LOG_FLOOR { p - f64::from(u8::from(design.y[k])) } else { 0.0 };
            g[s] += dz;
            g[n_s + i] += dz;
            g_ctx[ci] += dz;
            g[n_s + n_i + KTM_CONTEXT_LEN] += dz;
        }
    }

    let (ct, ci_, cw) = penalty.coefficients(n_s, n_i, KTM_CONTEXT_LEN);
    if let Some(g) = grad {
        for val in g.iter_mut() {
            *val /= n;
        }
        for (ctx, gz) in design.contexts.iter().zip(&g_ctx) {
            for &(f, xv) in &ctx.ktm_x {
                g[n_s + n_i + f as usize] += gz * xv / n;
            }
        }
        for s in 0..n_s {
            g[s] += 2.0 * ct * u[s];
        }
        for i in 0..n_i {
            g[n_s + i] += 2.0 * ci_ * v[i];
        }
        for f in 0..KTM_CONTEXT_LEN {
            g[n_s + n_i + f] += 2.0 * cw * c[f];
        }
    }

    let sq = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    nll / n + ct * sq(u) + ci_ * sq(v) + cw * sq(c)
}
