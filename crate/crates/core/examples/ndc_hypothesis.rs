//! Likelihood-ratio probe of whether a learner's recorded condition flags
//! are wrong.
//!
//! Learners with dyslexia are relabeled as neurotypical before fitting; the
//! statistic for the alternative "dyslexia" should then be large, while for
//! genuinely neurotypical learners it stays near zero.

use zilm::domain::NdcProfile;
use zilm::eval::ndc_hypothesis_test_with;
use zilm::fit::{fit, FitConfig};
use zilm::models::ModelKind;
use zilm::simulate::{generate_dataset, SimConfig};

fn main() -> zilm::Result<()> {
    let d = generate_dataset(&SimConfig { n_students: 1500, ..SimConfig::default() })?;
    let dyslexia = NdcProfile::new(true, false, false);
    let hidden: Vec<usize> = d.students.iter().filter(|s| s.ndc == dyslexia).map(|s| s.id).take(10).collect();
    let nt: Vec<usize> = d.students.iter().filter(|s| s.ndc == NdcProfile::NT).map(|s| s.id).take(10).collect();

    let mut mislabeled = d.clone();
    for &sid in &hidden {
        mislabeled.students[sid].ndc = NdcProfile::NT;
    }
    let cfg = FitConfig::default();
    let null = fit(&mislabeled, ModelKind::IrtZilm, &cfg)?;

    println!("{:>8} {:>12} {:>10}", "student", "truth", "statistic");
    for (&sid, truth) in hidden.iter().map(|s| (s, "dyslexia")).chain(nt.iter().map(|s| (s, "nt"))) {
        let r = ndc_hypothesis_test_with(&mislabeled, &null, sid, dyslexia, &cfg)?;
        println!("{sid:>8} {truth:>12} {:>10.3}", r.statistic);
    }
    Ok(())
}
