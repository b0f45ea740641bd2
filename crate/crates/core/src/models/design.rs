use crate::domain::{Attempt, Dataset, NdcProfile, SplitSelector};
use crate::error::{Error, Result};

use super::features::{ktm_context_sparse, PiFeatureVector};

/// A distinct (condition profile, item) pair. Both the zero-inflation
/// features and the KTM context depend only on this pair.
#[derive(Debug, Clone)]
pub(crate) struct Context {
    pub pi_x: Vec<(u16, f64)>,
    pub ktm_x: Vec<(u16, f64)>,
}

/// Attempts of one split, flattened for repeated objective evaluation.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub n_students: usize,
    pub n_items: usize,
    pub student: Vec<u32>,
    pub item: Vec<u32>,
    pub y: Vec<bool>,
    pub context: Vec<u32>,
    pub contexts: Vec<Context>,
}

impl Design {
    pub fn build(d: &Dataset, mut keep: impl FnMut(&Attempt) -> bool) -> Result<Design> {
        let n_items = d.items.len();
        let mut slot = vec![u32::MAX; 8 * n_items];
        let mut out = Design {
            n_students: d.students.len(),
            n_items,
            student: Vec::new(),
            item: Vec::new(),
            y: Vec::new(),
            context: Vec::new(),
            contexts: Vec::new(),
        };
        for a in d.attempts.iter().filter(|a| keep(a)) {
            let student = d
                .students
                .get(a.student_id)
                .ok_or_else(|| Error::data(format!("attempt references unknown student {}", a.student_id)))?;
            let item = d
                .items
                .get(a.item_id)
                .ok_or_else(|| Error::data(format!("attempt references unknown item {}", a.item_id)))?;
            let key = student.ndc.code() * n_items + a.item_id;
            if slot[key] == u32::MAX {
                slot[key] = out.contexts.len() as u32;
                let ndc = NdcProfile::from_code(student.ndc.code());
                out.contexts.push(Context {
                    pi_x: PiFeatureVector::new(ndc, item).sparse(),
                    ktm_x: ktm_context_sparse(ndc, item),
                });
            }
            out.student.push(a.student_id as u32);
            out.item.push(a.item_id as u32);
            out.y.push(a.y());
            out.context.push(slot[key]);
        }
        Ok(out)
    }

    pub fn for_split(d: &Dataset, split: SplitSelector) -> Result<Design> {
        let design = Design::build(d, |a| split.contains(a.split))?;
        if design.is_empty() {
            return Err(Error::data(format!("split `{split}` has no attempts")));
        }
        Ok(design)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[inline]
pub(crate) fn sparse_dot(x: &[(u16, f64)], w: &[f64]) -> f64 {
    x.iter().map(|&(i, v)| v * w[i as usize]).sum()
}
