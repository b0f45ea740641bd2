//! Fit IRT, KTM1 and IRT-ZILM to one simulated cohort and compare their
//! held-out metrics.
//!
//! ```text
//! cargo run --release --example fit_and_compare -- [n_students]
//! ```

use zilm::domain::SplitSelector;
use zilm::eval::classification_metrics;
use zilm::fit::{fit, FitConfig};
use zilm::models::ModelKind;
use zilm::simulate::{generate_dataset, SimConfig};

fn main() -> zilm::Result<()> {
    let n_students = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let d = generate_dataset(&SimConfig { n_students, ..SimConfig::default() })?;
    let cfg = FitConfig::default();

    println!("{:<9} {:>6} {:>9} {:>8} {:>8} {:>8} {:>8}", "model", "iters", "converged", "nll", "brier", "acc", "f1");
    for kind in ModelKind::ALL {
        let model = fit(&d, kind, &cfg)?;
        let m = classification_metrics(&model, &d, SplitSelector::Test)?;
        println!(
            "{:<9} {:>6} {:>9} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            kind.token(),
            model.trace.iterations,
            model.trace.converged,
            m.nll,
            m.brier,
            m.accuracy,
            m.f1
        );
    }
    Ok(())
}
