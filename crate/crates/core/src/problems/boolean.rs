//! Exhaustive truth tables for even parity and the Boolean multiplexer.

use super::dataset::Dataset;
use crate::error::{Error, Result};

fn bits_msb_first(v: usize, width: usize) -> Vec<f64> {
    (0..width).map(|i| ((v >> (width - 1 - i)) & 1) as f64).collect()
}

/// All `2^n_bits` rows; the label is `1` when the number of set bits is even.
pub fn parity_dataset(n_bits: usize) -> Result<Dataset> {
    if !(2..=10).contains(&n_bits) {
        return Err(Error::config(format!("parity width {n_bits} outside [2, 10]")));
    }
    let rows: Vec<Vec<f64>> = (0..1usize << n_bits).map(|v| bits_msb_first(v, n_bits)).collect();
    let labels = (0..1usize << n_bits)
        .map(|v| if v.count_ones() % 2 == 0 { "1" } else { "0" }.to_string())
        .collect();
    let names = (0..n_bits).map(|i| format!("in{i}")).collect();
    Dataset::new(format!("parity{n_bits}"), names, rows, labels)
}

/// All `2^(k + 2^k)` rows of a multiplexer with `k` address bits. Address
/// bits come first (most significant first), then the data lines; the label
/// is the data line the address selects.
pub fn multiplexer_dataset(addr_bits: usize) -> Result<Dataset> {
    if !(2..=3).contains(&addr_bits) {
        return Err(Error::config(format!("multiplexer address width {addr_bits} not in {{2, 3}}")));
    }
    let data = 1usize << addr_bits;
    let width = addr_bits + data;
    let mut rows = Vec::with_capacity(1 << width);
    let mut labels = Vec::with_capacity(1 << width);
    for v in 0..1usize << width {
        let bits = bits_msb_first(v, width);
        let addr = bits[..addr_bits].iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
        labels.push(format!("{}", bits[addr_bits + addr] as u8));
        rows.push(bits);
    }
    let mut names: Vec<String> = (0..addr_bits).map(|i| format!("a{i}")).collect();
    names.extend((0..data).map(|i| format!("d{i}")));
    Dataset::new(format!("mux{width}"), names, rows, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(d: &Dataset, row: usize) -> &str {
        &d.classes[d.labels[row]]
    }

    #[test]
    fn parity_basics() {
        let d = parity_dataset(4).unwrap();
        assert_eq!(label(&d, 0), "1");
        let single = d.features.iter().position(|r| r == &vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(label(&d, single), "0");
    }

    #[test]
    fn parity8_is_balanced() {
        let d = parity_dataset(8).unwrap();
        assert_eq!(d.n_samples(), 256);
        let even = d.class_index("1").unwrap();
        assert_eq!(d.labels.iter().filter(|&&l| l == even).count(), 128);
    }

    #[test]
    fn parity_width_is_checked() {
        assert!(parity_dataset(1).is_err());
        assert!(parity_dataset(11).is_err());
    }

    #[test]
    fn multiplexer_sizes_and_selection() {
        let d = multiplexer_dataset(3).unwrap();
        assert_eq!(d.n_samples(), 2048);
        assert_eq!(d.n_features(), 11);
        // address 000 with d0 = 1 selects 1
        let row = d
            .features
            .iter()
            .position(|r| r[..3] == [0.0, 0.0, 0.0] && r[3] == 1.0)
            .unwrap();
        assert_eq!(label(&d, row), "1");
        assert!(multiplexer_dataset(1).is_err());
        assert!(multiplexer_dataset(4).is_err());
    }

    #[test]
    fn mux6_matches_bruteforce_selection() {
        let d = multiplexer_dataset(2).unwrap();
        assert_eq!(d.n_samples(), 64);
        for (row, feats) in d.features.iter().enumerate() {
            let a = (feats[0] as usize) << 1 | feats[1] as usize;
            let expected = feats[2 + a] as u8;
            assert_eq!(label(&d, row), expected.to_string());
        }
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(parity_dataset(5).unwrap(), parity_dataset(5).unwrap());
        assert_eq!(multiplexer_dataset(2).unwrap(), multiplexer_dataset(2).unwrap());
    }
}
