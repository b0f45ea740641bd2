mod common;

use proptest::prelude::*;

use zilm::domain::io::{read_dataset, read_manifest, write_dataset};
use zilm::domain::validate_dataset;
use zilm::simulate::{generate_dataset, SimConfig, MATHS_CONTENT_NOTE};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn datasets_survive_a_disk_round_trip(seed in any::<u64>(), n_students in 1usize..40, n_items in 20usize..60) {
        let cfg = SimConfig { n_students, n_items, seed, ..SimConfig::default() };
        let d = generate_dataset(&cfg).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        write_dataset(tmp.path(), &d, Some(cfg.to_json_value())).unwrap();
        let back = read_dataset(tmp.path()).unwrap();
        for (a, b) in d.attempts.iter().zip(&back.attempts) {
            prop_assert_eq!(a.true_pi.map(f64::to_bits), b.true_pi.map(f64::to_bits));
            prop_assert_eq!(a.true_p.map(f64::to_bits), b.true_p.map(f64::to_bits));
        }
        for (a, b) in d.items.iter().zip(&back.items) {
            prop_assert_eq!(a.density.to_bits(), b.density.to_bits());
            prop_assert_eq!(a.difficulty.to_bits(), b.difficulty.to_bits());
        }
        prop_assert_eq!(back, d);
    }

    #[test]
    fn validation_is_pure(seed in any::<u64>()) {
        let mut d = generate_dataset(&SimConfig { n_students: 20, n_items: 30, seed, ..SimConfig::default() }).unwrap();
        d.items[3].difficulty = 9.0;
        let first = validate_dataset(&d);
        let copy = d.clone();
        prop_assert_eq!(validate_dataset(&d), first.clone());
        prop_assert_eq!(d, copy);
        prop_assert_eq!(first.len(), 1);
    }
}

#[test]
fn manifest_records_generator_decisions() {
    let cfg = SimConfig { n_students: 10, ..SimConfig::default() };
    let d = generate_dataset(&cfg).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    write_dataset(tmp.path(), &d, Some(cfg.to_json_value())).unwrap();
    let m = read_manifest(tmp.path()).unwrap();
    assert!(m.notes.iter().any(|n| n == MATHS_CONTENT_NOTE));
    assert_eq!(m.counts.attempts, 200);
    assert_eq!(m.config_digest, cfg.digest());
    let recorded: SimConfig = serde_json::from_value(m.config.unwrap()).unwrap();
    assert_eq!(recorded, cfg);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = SimConfig { n_students: 50, ..SimConfig::default() };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_dataset(a.path(), &generate_dataset(&cfg).unwrap(), Some(cfg.to_json_value())).unwrap();
    write_dataset(b.path(), &generate_dataset(&cfg).unwrap(), Some(cfg.to_json_value())).unwrap();
    for f in zilm::domain::io::DATASET_FILES {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
