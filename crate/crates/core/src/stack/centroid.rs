//! Nearest-centroid classification in program-output space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One mean output vector per class, indexed by class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    pub centroids: Vec<Vec<f64>>,
    pub output_dim: usize,
}

/// Per-class arithmetic means of `outputs`. Classes are `0..n_classes`;
/// each must have at least one sample.
pub fn fit_centroids(outputs: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<CentroidModel> {
    if outputs.is_empty() {
        return Err(Error::Fitting("no samples".into()));
    }
    if outputs.len() != labels.len() {
        return Err(Error::Fitting(format!("{} outputs for {} labels", outputs.len(), labels.len())));
    }
    let dim = outputs[0].len();
    if outputs.iter().any(|o| o.len() != dim) {
        return Err(Error::Fitting("output vectors differ in length".into()));
    }
    let mut sums = vec![vec![0.0; dim]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for (o, &l) in outputs.iter().zip(labels) {
        if l >= n_classes {
            return Err(Error::Fitting(format!("label {l} outside {n_classes} classes")));
        }
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(o) {
            *s += v;
        }
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Fitting(format!("class {empty} has no samples")));
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        for v in s.iter_mut() {
            *v /= c as f64;
        }
    }
    Ok(CentroidModel {
        centroids: sums,
        output_dim: dim,
    })
}

/// Index of the nearest centroid in Euclidean distance; ties go to the
/// lower class index.
pub fn classify(model: &CentroidModel, output: &[f64]) -> usize {
    debug_assert_eq!(output.len(), model.output_dim);
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in model.centroids.iter().enumerate() {
        let d: f64 = centroid.iter().zip(output).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}
