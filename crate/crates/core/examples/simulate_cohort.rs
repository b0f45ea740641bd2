//! Simulate a cohort, summarize it, and write it to a dataset directory.
//!
//! ```text
//! cargo run --release --example simulate_cohort -- [out_dir] [n_students]
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use zilm::domain::io::{read_dataset, write_dataset};
use zilm::domain::{validate_dataset, Outcome};
use zilm::simulate::{generate_dataset, SimConfig};

fn main() -> zilm::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("zilm-cohort"));
    let n_students = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);

    let cfg = SimConfig { n_students, ..SimConfig::default() };
    let d = generate_dataset(&cfg)?;
    assert!(validate_dataset(&d).is_empty());

    let mut by_group: BTreeMap<String, [usize; 3]> = BTreeMap::new();
    for a in &d.attempts {
        let label = d.students[a.student_id].ndc.label();
        let k = match a.outcome {
            Outcome::Correct => 0,
            Outcome::Incorrect => 1,
            Outcome::NotAnswered => 2,
        };
        by_group.entry(label).or_default()[k] += 1;
    }
    println!("{} students, {} items, {} attempts", d.students.len(), d.items.len(), d.attempts.len());
    println!("{:<28} {:>8} {:>9} {:>9} {:>12}", "group", "attempts", "correct", "incorrect", "not answered");
    for (group, c) in &by_group {
        let n = c.iter().sum::<usize>() as f64;
        println!(
            "{group:<28} {n:>8} {:>9.3} {:>9.3} {:>12.3}",
            c[0] as f64 / n,
            c[1] as f64 / n,
            c[2] as f64 / n
        );
    }

    if out.exists() {
        std::fs::remove_dir_all(&out).map_err(|e| zilm::Error::Io { path: out.clone(), source: e })?;
    }
    write_dataset(&out, &d, Some(cfg.to_json_value()))?;
    let back = read_dataset(&out)?;
    assert_eq!(back, d);
    println!("wrote {}", out.display());
    Ok(())
}
