//! Force every item to be read, listened to, or both, and compare outcome
//! rates per condition group.

use zilm::domain::Delivery;
use zilm::eval::forced_delivery_experiment;
use zilm::simulate::SimConfig;

fn main() -> zilm::Result<()> {
    let report = forced_delivery_experiment(&SimConfig::default())?;
    println!("{:<28} {:>7} {:>7} {:>7}   correct rate", "group", "read", "listen", "both");
    for group in report.groups() {
        let rate = |dl| report.cell(group, dl).map_or(f64::NAN, |c| c.correct);
        println!(
            "{group:<28} {:>7.3} {:>7.3} {:>7.3}",
            rate(Delivery::Read),
            rate(Delivery::Listen),
            rate(Delivery::Both)
        );
    }
    if let Some(gap) = report.correct_gap("dyslexia", Delivery::Listen, Delivery::Read) {
        println!("\ndyslexia listen − read: {:+.1} points", 100.0 * gap);
    }
    print!("{}", report.to_csv());
    Ok(())
}
