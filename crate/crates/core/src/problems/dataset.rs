//! Labelled classification data and CSV ingestion.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature matrix with class labels. Labels are stored as indices into
/// `classes`, which is sorted (numerically when every label is a number,
/// lexicographically otherwise); that order is the tie-break order used by
/// nearest-centroid classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        raw_labels: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if features.len() != raw_labels.len() {
            return Err(Error::config(format!(
                "dataset `{name}`: {} feature rows but {} labels",
                features.len(),
                raw_labels.len()
            )));
        }
        if feature_names.is_empty() {
            return Err(Error::config(format!("dataset `{name}` has no features")));
        }
        if let Some(i) = features.iter().position(|r| r.len() != feature_names.len()) {
            return Err(Error::config(format!("dataset `{name}`: row {i} has the wrong width")));
        }
        let classes = sort_labels(raw_labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect());
        if classes.len() < 2 {
            return Err(Error::config(format!(
                "dataset `{name}` needs at least two classes, found {}",
                classes.len()
            )));
        }
        let labels = raw_labels
            .iter()
            .map(|l| classes.iter().position(|c| c == l).expect("label present"))
            .collect();
        Ok(Dataset {
            name,
            feature_names,
            features,
            labels,
            classes,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Index of the class named `name`.
    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    /// Samples per class, indexed like `classes`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, keeping the class list intact.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
        }
    }
}

fn sort_labels(mut labels: Vec<String>) -> Vec<String> {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.trim().parse::<f64>().ok()).collect();
    if let Some(values) = numeric {
        let mut pairs: Vec<(f64, String)> = values.into_iter().zip(labels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        labels = pairs.into_iter().map(|(_, l)| l).collect();
    }
    labels
}

/// Which CSV column holds the class label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("class".into())
    }
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

/// Loads a headed CSV file. Every non-label column must be numeric.
pub fn load_csv_dataset(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Ingest {
        path: path.to_path_buf(),
        message: format!("cannot open: {e}"),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv_dataset(file, &name, path, label)
}

/// Parses CSV text from any reader. Row numbers in errors are file line
/// numbers, with the header on line 1.
pub fn read_csv_dataset<R: Read>(reader: R, name: &str, origin: &Path, label: &LabelColumn) -> Result<Dataset> {
    let fail = |message: String| Error::Ingest {
        path: PathBuf::from(origin),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| fail(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() < 2 {
        return Err(fail("need at least one feature column and a label column".into()));
    }
    let label_idx = match label {
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => return Err(fail(format!("label column index {i} out of range"))),
        LabelColumn::Name(n) => headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| fail(format!("no column named `{n}`")))?,
    };
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| fail(format!("malformed CSV: {e}")))?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != headers.len() {
            return Err(fail(format!(
                "row {row}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        let mut values = Vec::with_capacity(feature_names.len());
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                fail(format!("row {row}, column `{}`: `{field}` is not a number", headers[i]))
            })?;
            values.push(v);
        }
        features.push(values);
        labels.push(record[label_idx].to_string());
    }
    if features.len() < 2 {
        return Err(fail(format!("need at least 2 data rows, found {}", features.len())));
    }
    Dataset::new(name, feature_names, features, labels).map_err(|e| fail(e.to_string()))
}

/// Boolean datasets shipped with the crate.
pub mod bundled {
    use super::*;

    pub const MUX6_CSV: &str = include_str!("../../data/mux6.csv");
    pub const PARITY5_CSV: &str = include_str!("../../data/parity5.csv");

    fn load(text: &str, name: &str) -> Dataset {
        read_csv_dataset(text.as_bytes(), name, Path::new(name), &LabelColumn::default())
            .expect("bundled dataset parses")
    }

    /// 6-multiplexer, every input combination listed twice (128 rows).
    pub fn mux6() -> Dataset {
        load(MUX6_CSV, "mux6")
    }

    /// Even parity over 5 bits (32 rows).
    pub fn parity5() -> Dataset {
        load(PARITY5_CSV, "parity5")
    }

    pub fn by_name(name: &str) -> Option<Dataset> {
        match name {
            "mux6" => Some(mux6()),
            "parity5" => Some(parity5()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn two_row_toy_file() {
        let f = write_tmp("a,b,class\n1.0,2.0,yes\n3.0,4.0,no\n");
        let d = load_csv_dataset(f.path(), &LabelColumn::Name("class".into())).unwrap();
        assert_eq!(d.n_samples(), 2);
        assert_eq!(d.n_classes(), 2);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.classes, vec!["no", "yes"]);
        assert_eq!(d.labels, vec![1, 0]);
    }

    #[test]
    fn label_by_index() {
        let f = write_tmp("class,a\n0,1.5\n1,2.5\n");
        let d = load_csv_dataset(f.path(), &LabelColumn::Index(0)).unwrap();
        assert_eq!(d.features, vec![vec![1.5], vec![2.5]]);
    }

    #[test]
    fn ragged_row_is_named() {
        let f = write_tmp("a,b,class\n1,2,x\n1,2,y\n1,2,x\n1,2,y\n1,2,x\n1,2\n1,2,y\n");
        let err = load_csv_dataset(f.path(), &LabelColumn::default()).unwrap_err();
        assert!(err.to_string().contains("row 7"), "{err}");
    }

    #[test]
    fn unparseable_number_is_named() {
        let f = write_tmp("a,b,class\n1,2,x\n1,oops,y\n");
        let err = load_csv_dataset(f.path(), &LabelColumn::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("oops"), "{msg}");
    }

    #[test]
    fn single_class_and_missing_file_fail() {
        let f = write_tmp("a,class\n1,x\n2,x\n");
        assert!(load_csv_dataset(f.path(), &LabelColumn::default()).is_err());
        assert!(load_csv_dataset(Path::new("/no/such/file.csv"), &LabelColumn::default()).is_err());
        let one = write_tmp("a,class\n1,x\n");
        assert!(load_csv_dataset(one.path(), &LabelColumn::default()).is_err());
    }

    #[test]
    fn bundled_mux6_shape() {
        let d = bundled::mux6();
        assert_eq!((d.n_samples(), d.n_features(), d.n_classes()), (128, 6, 2));
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let d = Dataset::new(
            "t",
            vec!["f".into()],
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec!["10".into(), "2".into(), "1".into()],
        )
        .unwrap();
        assert_eq!(d.classes, vec!["1", "2", "10"]);
    }
}
