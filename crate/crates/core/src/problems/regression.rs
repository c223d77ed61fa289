/// Sample points `(x, y)` for symbolic regression.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PointSet {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub fn quartic(x: f64) -> f64 {
    x.powi(4) + x.powi(3) + x.powi(2) + x
}

/// `n_points` evenly spaced samples of `x^4 + x^3 + x^2 + x` on `[lo, hi]`,
/// endpoints included.
pub fn quartic_dataset(n_points: usize, lo: f64, hi: f64) -> crate::Result<PointSet> {
    if n_points < 2 || !(lo < hi) {
        return Err(crate::Error::Config(format!(
            "quartic dataset needs n_points >= 2 and lo < hi (got {n_points}, [{lo}, {hi}])"
        )));
    }
    let step = (hi - lo) / (n_points - 1) as f64;
    let xs: Vec<f64> = (0..n_points).map(|i| lo + step * i as f64).collect();
    let ys = xs.iter().map(|&x| quartic(x)).collect();
    Ok(PointSet { xs, ys })
}
