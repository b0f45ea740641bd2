//! Drive the command-line front end in-process: simulate, fit, and report.

use std::process::ExitCode;

use zilm::cli::run_from;

fn main() -> ExitCode {
    let root = std::env::temp_dir().join(format!("zilm-cli-{}", std::process::id()));
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["simulate".into(), "--seed".into(), "7".into(), "--out".into(), p("dataset")],
        vec!["fit".into(), p("dataset"), "--kind".into(), "irt_zilm".into(), "--out".into(), p("zilm")],
        vec!["fit".into(), p("dataset"), "--kind".into(), "irt".into(), "--out".into(), p("irt")],
        vec!["eval".into(), "metrics".into(), p("dataset"), p("irt"), p("zilm"), "--out".into(), p("metrics")],
    ];
    for args in steps {
        let code = run_from(std::iter::once("zilm".to_string()).chain(args));
        if code != ExitCode::SUCCESS {
            return code;
        }
    }
    let csv = std::fs::read_to_string(root.join("metrics/metrics.csv")).expect("metrics written");
    print!("{csv}");
    let _ = std::fs::remove_dir_all(&root);
    ExitCode::SUCCESS
}
