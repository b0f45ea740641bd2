//! Compare analytic gradients against central differences for every model.

use zilm::fit::{check_gradients, FitConfig};
use zilm::models::ModelKind;
use zilm::simulate::{generate_dataset, SimConfig};

fn main() -> zilm::Result<()> {
    let d = generate_dataset(&SimConfig { n_students: 10, n_items: 5, n_attempts_per_student: 5, ..SimConfig::default() })?;
    for kind in ModelKind::ALL {
        let r = check_gradients(kind, &d, &FitConfig::default(), 1e-5)?;
        println!("{kind}: max relative error {:.2e}", r.max_rel_error);
        for b in &r.blocks {
            println!("  {:<16} {:>3} coords  {:.2e}", b.block, b.checked, b.max_rel_error);
        }
    }
    Ok(())
}
