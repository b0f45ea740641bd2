//! Within-learner outcome contrasts between two halves of the item bank,
//! averaged per condition group.

use zilm::eval::{contrast_analysis, Partition};
use zilm::simulate::{generate_dataset, SimConfig};

fn main() -> zilm::Result<()> {
    let d = generate_dataset(&SimConfig::default())?;
    for p in Partition::ALL {
        let r = contrast_analysis(&d, p)?;
        println!("\n{p}  ({} learners without both sides excluded)", r.excluded);
        println!("{:<28} {:>6} {:>13} {:>10} {:>9}", "group", "n", "not answered", "incorrect", "correct");
        for g in &r.groups {
            println!(
                "{:<28} {:>6} {:>+13.3} {:>+10.3} {:>+9.3}",
                g.group, g.n_students, g.mean.not_answered, g.mean.incorrect, g.mean.correct
            );
        }
    }
    Ok(())
}
