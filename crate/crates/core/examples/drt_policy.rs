//! Choose each item's delivery and response type per learner and measure the
//! change in success rate against the original presentations.
//!
//! The oracle policies use the simulator's true π; the model-driven policy
//! uses a fitted IRT-ZILM.

use zilm::eval::{policy_experiment, Policy};
use zilm::fit::{fit, FitConfig};
use zilm::models::ModelKind;
use zilm::simulate::{generate_dataset, SimConfig};

fn main() -> zilm::Result<()> {
    let n_students = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let cfg = SimConfig { n_students, ..SimConfig::default() };
    let d = generate_dataset(&cfg)?;
    let model = fit(&d, ModelKind::IrtZilm, &FitConfig::default())?;

    for policy in [Policy::Random, Policy::OracleActive, Policy::OracleAdversarial, Policy::ModelActive(&model)] {
        let r = policy_experiment(&cfg, policy)?;
        println!("\n{}", policy.token());
        for g in &r.groups {
            println!(
                "  {} condition(s): n={:<5} baseline {:.3}  rate {:.3}  ratio {:.3}",
                g.ndc_count, g.n_students, g.baseline, g.rate, g.ratio
            );
        }
    }
    Ok(())
}
