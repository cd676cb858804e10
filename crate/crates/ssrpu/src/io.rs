//! Dataset serialization as JSON lines.
//!
//! The first line is a header fixing the schema version, feature dimension,
//! and class count, optionally carrying generator provenance. Every following
//! line is one instance: its feature vector, the labeled class indices, and
//! optionally the gold class indices. Gold labels are all-or-nothing across a
//! file. Floats round-trip exactly, so saving and reloading reproduces the
//! dataset bit for bit, and rewriting the same dataset produces identical
//! bytes. The format deliberately knows nothing about how features were
//! produced; externally computed embeddings load the same way as synthetic
//! data.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::ObservedDataset;
use crate::error::{data_err, Result};

/// Schema tag expected on the header line.
pub const DATASET_SCHEMA: &str = "ssr-pu-dataset/1";

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    d: usize,
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    features: Vec<f64>,
    labeled: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold: Option<Vec<usize>>,
}

/// Write the dataset to `path`, embedding `provenance` in the header.
pub fn save_jsonl(
    dataset: &ObservedDataset,
    path: &Path,
    provenance: Option<serde_json::Value>,
) -> Result<()> {
    if dataset.is_empty() {
        return Err(data_err!("refusing to save a dataset with no instances"));
    }
    let file =
        File::create(path).map_err(|e| data_err!("cannot create {}: {e}", path.display()))?;
    let mut out = BufWriter::new(file);
    let header = Header {
        schema: DATASET_SCHEMA.to_string(),
        d: dataset.feature_dim(),
        k: dataset.class_count(),
        provenance,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for row in 0..dataset.len() {
        let record = Record {
            features: dataset.features().row(row).to_vec(),
            labeled: (0..dataset.class_count())
                .filter(|&class| dataset.observed()[(row, class)])
                .collect(),
            gold: dataset.gold().map(|g| {
                (0..dataset.class_count())
                    .filter(|&class| g[(row, class)])
                    .collect()
            }),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a dataset written by [`save_jsonl`]. Errors carry 1-based line
/// numbers; the header is line 1.
pub fn load_jsonl(path: &Path) -> Result<ObservedDataset> {
    let file =
        File::open(path).map_err(|e| data_err!("cannot open {}: {e}", path.display()))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| data_err!("line 1: missing header"))??;
    let header: Header = serde_json::from_str(&header_line)
        .map_err(|e| data_err!("line 1: malformed header: {e}"))?;
    if header.schema != DATASET_SCHEMA {
        return Err(data_err!(
            "line 1: unsupported schema {:?}, expected {DATASET_SCHEMA:?}",
            header.schema
        ));
    }
    if header.d == 0 || header.k == 0 {
        return Err(data_err!(
            "line 1: header declares {} features and {} classes, both must be positive",
            header.d,
            header.k
        ));
    }

    let mut features = Vec::new();
    let mut observed_rows: Vec<Vec<usize>> = Vec::new();
    let mut gold_rows: Vec<Vec<usize>> = Vec::new();
    let mut has_gold = None;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            return Err(data_err!("line {line_no}: blank line inside dataset"));
        }
        let record: Record = serde_json::from_str(&line)
            .map_err(|e| data_err!("line {line_no}: malformed record: {e}"))?;
        if record.features.len() != header.d {
            return Err(data_err!(
                "line {line_no}: {} features, header declares {}",
                record.features.len(),
                header.d
            ));
        }
        for &class in record.labeled.iter().chain(record.gold.iter().flatten()) {
            if class >= header.k {
                return Err(data_err!(
                    "line {line_no}: class index {class} out of range for {} classes",
                    header.k
                ));
            }
        }
        match (has_gold, record.gold.is_some()) {
            (None, present) => has_gold = Some(present),
            (Some(expected), present) if expected != present => {
                return Err(data_err!(
                    "line {line_no}: gold labels must be present on every record or on none"
                ));
            }
            _ => {}
        }
        if let Some(gold) = &record.gold {
            for class in &record.labeled {
                if !gold.contains(class) {
                    return Err(data_err!(
                        "line {line_no}: class {class} is labeled but not gold; \
                         labels may be incomplete, never wrong"
                    ));
                }
            }
        }
        features.extend_from_slice(&record.features);
        observed_rows.push(record.labeled);
        gold_rows.push(record.gold.unwrap_or_default());
    }
    let n = observed_rows.len();
    if n == 0 {
        return Err(data_err!("dataset file has no records"));
    }

    let features = Array2::from_shape_vec((n, header.d), features).expect("counted above");
    let mut observed = Array2::from_elem((n, header.k), false);
    for (row, classes) in observed_rows.iter().enumerate() {
        for &class in classes {
            observed[(row, class)] = true;
        }
    }
    let gold = if has_gold == Some(true) {
        let mut g = Array2::from_elem((n, header.k), false);
        for (row, classes) in gold_rows.iter().enumerate() {
            for &class in classes {
                g[(row, class)] = true;
            }
        }
        Some(g)
    } else {
        None
    };
    ObservedDataset::new(features, observed, gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use serde_json::json;
    use std::fs;

    fn sample_dataset(gold: bool) -> ObservedDataset {
        let features = array![
            [0.1 + 0.2, -0.0],
            [1e-300, 3.5],
            [-7.25, 2.0 / 3.0],
        ];
        let observed = array![[true, false], [false, false], [false, true]];
        let gold = gold.then(|| array![[true, true], [false, false], [true, true]]);
        ObservedDataset::new(features, observed, gold).unwrap()
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        let dataset = sample_dataset(true);
        save_jsonl(&dataset, &path, None).unwrap();
        let loaded = load_jsonl(&path).unwrap();
        assert_eq!(dataset.features(), loaded.features());
        assert_eq!(dataset.observed(), loaded.observed());
        assert_eq!(dataset.gold(), loaded.gold());
    }

    #[test]
    fn round_trip_without_gold_stays_goldless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        save_jsonl(&sample_dataset(false), &path, None).unwrap();
        let loaded = load_jsonl(&path).unwrap();
        assert!(loaded.gold().is_none());
    }

    #[test]
    fn saving_twice_produces_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        save_jsonl(&sample_dataset(true), &a, None).unwrap();
        save_jsonl(&sample_dataset(true), &b, None).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn header_fields_are_pinned() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        save_jsonl(&sample_dataset(true), &path, None).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, r#"{"schema":"ssr-pu-dataset/1","d":2,"k":2}"#);
    }

    #[test]
    fn provenance_is_embedded_and_ignored_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        save_jsonl(
            &sample_dataset(true),
            &path,
            Some(json!({"generator": "unit-test"})),
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().contains("unit-test"));
        assert!(load_jsonl(&path).is_ok());
    }

    fn write_lines(lines: &[&str]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        fs::write(&path, lines.join("\n")).unwrap();
        (dir, path)
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let (_dir, path) = write_lines(&[
            r#"{"schema":"ssr-pu-dataset/2","d":1,"k":1}"#,
            r#"{"features":[0.0],"labeled":[]}"#,
        ]);
        let err = load_jsonl(&path).unwrap_err().to_string();
        assert!(err.contains("schema"), "{err}");
    }

    #[test]
    fn malformed_records_report_their_line() {
        let (_dir, path) = write_lines(&[
            r#"{"schema":"ssr-pu-dataset/1","d":1,"k":1}"#,
            r#"{"features":[0.0],"labeled":[]}"#,
            r#"{"features":[0.0],"labeled":"#,
        ]);
        let err = load_jsonl(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn out_of_range_class_indices_are_rejected() {
        let (_dir, path) = write_lines(&[
            r#"{"schema":"ssr-pu-dataset/1","d":1,"k":2}"#,
            r#"{"features":[0.0],"labeled":[2]}"#,
        ]);
        let err = load_jsonl(&path).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("out of range"), "{err}");
    }

    #[test]
    fn label_outside_gold_is_rejected() {
        let (_dir, path) = write_lines(&[
            r#"{"schema":"ssr-pu-dataset/1","d":1,"k":2}"#,
            r#"{"features":[0.0],"labeled":[0],"gold":[1]}"#,
        ]);
        let err = load_jsonl(&path).unwrap_err().to_string();
        assert!(err.contains("never wrong"), "{err}");
    }

    #[test]
    fn mixed_gold_presence_is_rejected() {
        let (_dir, path) = write_lines(&[
            r#"{"schema":"ssr-pu-dataset/1","d":1,"k":1}"#,
            r#"{"features":[0.0],"labeled":[0],"gold":[0]}"#,
            r#"{"features":[0.5],"labeled":[]}"#,
        ]);
        let err = load_jsonl(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn feature_width_mismatch_is_rejected() {
        let (_dir, path) = write_lines(&[
            r#"{"schema":"ssr-pu-dataset/1","d":2,"k":1}"#,
            r#"{"features":[0.0],"labeled":[]}"#,
        ]);
        let err = load_jsonl(&path).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn empty_files_are_rejected() {
        let (_dir, path) = write_lines(&[r#"{"schema":"ssr-pu-dataset/1","d":1,"k":1}"#]);
        assert!(load_jsonl(&path).is_err());
    }
}
