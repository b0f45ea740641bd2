//! Dataset directory format.
//!
//! A dataset directory holds four files:
//!
//! * `students.csv`: `id,ability,dyslexia,dyscalculia,spd`
//! * `items.csv`: `id,difficulty,discrimination,guessing,subject,content,density,delivery,response`
//! * `attempts.csv`: `student_id,item_id,outcome,true_pi,true_p,split`
//! * `manifest.json`: format version, seed, config digest, counts and notes
//!
//! Reals are written in shortest round-trip form, so reading a written
//! dataset back gives bit-identical values. Missing `true_pi`/`true_p` are
//! empty fields.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Attempt, Content, Dataset, Delivery, Item, NdcProfile, Outcome, Response, Split, StudentProfile, Subject};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub const STUDENTS_FILE: &str = "students.csv";
pub const ITEMS_FILE: &str = "items.csv";
pub const ATTEMPTS_FILE: &str = "attempts.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Every file a dataset directory contains.
pub const DATASET_FILES: [&str; 4] = [STUDENTS_FILE, ITEMS_FILE, ATTEMPTS_FILE, MANIFEST_FILE];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub students: usize,
    pub items: usize,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub seed: u64,
    pub config_digest: String,
    pub counts: Counts,
    #[serde(default)]
    pub notes: Vec<String>,
    /// Full generator configuration, when the dataset was simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct StudentRow {
    id: usize,
    ability: f64,
    dyslexia: bool,
    dyscalculia: bool,
    spd: bool,
}

#[derive(Serialize, Deserialize)]
struct ItemRow {
    id: usize,
    difficulty: f64,
    discrimination: f64,
    guessing: f64,
    subject: Subject,
    content: Content,
    density: f64,
    delivery: Delivery,
    response: Response,
}

#[derive(Serialize, Deserialize)]
struct AttemptRow {
    student_id: usize,
    item_id: usize,
    outcome: Outcome,
    true_pi: Option<f64>,
    true_p: Option<f64>,
    split: Split,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::data(format!("{}: {e}", path.display()))
    }
}

pub fn manifest_for(d: &Dataset, config: Option<serde_json::Value>) -> DatasetManifest {
    DatasetManifest {
        format_version: FORMAT_VERSION,
        seed: d.seed,
        config_digest: d.sim_config_digest.clone(),
        counts: Counts {
            students: d.students.len(),
            items: d.items.len(),
            attempts: d.attempts.len(),
        },
        notes: d.notes.clone(),
        config,
    }
}

/// Writes `d` into `dir`, creating the directory if needed.
pub fn write_dataset(dir: &Path, d: &Dataset, config: Option<serde_json::Value>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_csv(
        &dir.join(STUDENTS_FILE),
        d.students.iter().map(|s| StudentRow {
            id: s.id,
            ability: s.ability,
            dyslexia: s.ndc.dyslexia,
            dyscalculia: s.ndc.dyscalculia,
            spd: s.ndc.spd,
        }),
    )?;
    write_csv(
        &dir.join(ITEMS_FILE),
        d.items.iter().map(|it| ItemRow {
            id: it.id,
            difficulty: it.difficulty,
            discrimination: it.discrimination,
            guessing: it.guessing,
            subject: it.subject,
            content: it.content,
            density: it.density,
            delivery: it.delivery,
            response: it.response,
        }),
    )?;
    write_csv(
        &dir.join(ATTEMPTS_FILE),
        d.attempts.iter().map(|a| AttemptRow {
            student_id: a.student_id,
            item_id: a.item_id,
            outcome: a.outcome,
            true_pi: a.true_pi,
            true_p: a.true_p,
            split: a.split,
        }),
    )?;
    let manifest = manifest_for(d, config);
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: DatasetManifest = serde_json::from_str(&text)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    if m.format_version != FORMAT_VERSION {
        return Err(Error::data(format!(
            "{}: unsupported format version {} (expected {FORMAT_VERSION})",
            path.display(),
            m.format_version
        )));
    }
    Ok(m)
}

/// Reads a dataset directory written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    if !dir.is_dir() {
        return Err(Error::data(format!("{}: not a dataset directory", dir.display())));
    }
    let manifest = read_manifest(dir)?;
    let students = read_csv::<StudentRow>(&dir.join(STUDENTS_FILE))?
        .into_iter()
        .map(|r| StudentProfile {
            id: r.id,
            ability: r.ability,
            ndc: NdcProfile::new(r.dyslexia, r.dyscalculia, r.spd),
        })
        .collect::<Vec<_>>();
    let items = read_csv::<ItemRow>(&dir.join(ITEMS_FILE))?
        .into_iter()
        .map(|r| Item {
            id: r.id,
            difficulty: r.difficulty,
            discrimination: r.discrimination,
            guessing: r.guessing,
            subject: r.subject,
            content: r.content,
            density: r.density,
            delivery: r.delivery,
            response: r.response,
        })
        .collect::<Vec<_>>();
    let attempts = read_csv::<AttemptRow>(&dir.join(ATTEMPTS_FILE))?
        .into_iter()
        .map(|r| Attempt {
            student_id: r.student_id,
            item_id: r.item_id,
            outcome: r.outcome,
            true_pi: r.true_pi,
            true_p: r.true_p,
            split: r.split,
        })
        .collect::<Vec<_>>();

    let counts = Counts {
        students: students.len(),
        items: items.len(),
        attempts: attempts.len(),
    };
    if counts != manifest.counts {
        return Err(Error::data(format!(
            "{}: manifest counts {:?} do not match files {:?}",
            dir.display(),
            manifest.counts,
            counts
        )));
    }
    Ok(Dataset {
        students,
        items,
        attempts,
        sim_config_digest: manifest.config_digest,
        seed: manifest.seed,
        notes: manifest.notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_mismatch_is_a_hard_error() {
        let dir = tempfile::tempdir().unwrap();
        let d = Dataset {
            students: vec![],
            items: vec![],
            attempts: vec![],
            sim_config_digest: "x".into(),
            seed: 1,
            notes: vec![],
        };
        write_dataset(dir.path(), &d, None).unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).unwrap().replace("\"format_version\": 1", "\"format_version\": 2");
        fs::write(&path, text).unwrap();
        let err = read_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("format version"), "{err}");
    }

    #[test]
    fn missing_directory_is_a_data_error() {
        let err = read_dataset(Path::new("/nonexistent/zilm-data")).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }
}
