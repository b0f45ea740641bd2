//! Correlate fitted abilities and item parameters with the simulator's
//! ground truth, and show how ability estimates are biased by condition count.

use zilm::eval::recovery_report;
use zilm::fit::{fit, FitConfig};
use zilm::models::ModelKind;
use zilm::simulate::{generate_dataset, SimConfig};

fn main() -> zilm::Result<()> {
    let n_students = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let d = generate_dataset(&SimConfig { n_students, ..SimConfig::default() })?;

    for kind in ModelKind::ALL {
        let model = fit(&d, kind, &FitConfig::default())?;
        let r = recovery_report(&model, &d)?;
        println!("\n{kind}");
        println!("  ability         pearson {:.3}  spearman {:.3}", r.ability.pearson, r.ability.spearman);
        println!("  difficulty      pearson {:.3}  spearman {:.3}", r.difficulty.pearson, r.difficulty.spearman);
        if let Some(c) = r.discrimination {
            println!("  discrimination  pearson {:.3}  spearman {:.3}", c.pearson, c.spearman);
        }
        let bias: Vec<String> = r.ability_bias.iter().map(|(g, v)| format!("{g}: {v:+.3}")).collect();
        println!("  aligned ability residual by condition count  {}", bias.join("  "));
    }
    Ok(())
}
