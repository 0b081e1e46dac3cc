//! Labelled feature matrices with a fixed train/test split.

use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, LabError};

/// Fraction of examples assigned to the training split.
pub const TRAIN_FRACTION: (usize, usize) = (3, 4);

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        train: Vec<usize>,
        test: Vec<usize>,
    ) -> Result<Self, LabError> {
        let n = features.nrows();
        if labels.len() != n {
            return Err(param(format!("{} labels for {n} rows", labels.len())));
        }
        if features.ncols() == 0 {
            return Err(param("d must be at least 1"));
        }
        if num_classes < 2 {
            return Err(param("K must be at least 2"));
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(param(format!("label {y} outside 0..{num_classes}")));
        }
        let mut seen = vec![false; n];
        for &i in train.iter().chain(&test) {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(param(format!("split index {i} out of range or repeated")));
            }
        }
        if train.is_empty() || test.is_empty() {
            return Err(param("train and test splits must be non-empty"));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            train,
            test,
        })
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn train_features(&self) -> Array2<f64> {
        self.features.select(Axis(0), &self.train)
    }

    pub fn test_features(&self) -> Array2<f64> {
        self.features.select(Axis(0), &self.test)
    }

    pub fn train_labels(&self) -> Vec<usize> {
        self.train.iter().map(|&i| self.labels[i]).collect()
    }

    pub fn test_labels(&self) -> Vec<usize> {
        self.test.iter().map(|&i| self.labels[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobParams {
    pub n: usize,
    pub d: usize,
    pub num_classes: usize,
    pub class_sep: f64,
    #[serde(default)]
    pub label_noise: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Splits `0..n` into shuffled train and test index sets.
fn split(n: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let n_train = n * TRAIN_FRACTION.0 / TRAIN_FRACTION.1;
    let test = order.split_off(n_train);
    (order, test)
}

/// Number of coordinates that carry class information.
fn class_bits(k: usize) -> usize {
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

/// Isotropic unit-variance Gaussian clusters.
///
/// Class `k` has mean `class_sep · (2·bit_i(k) - 1)` in each of the first
/// `⌈log2 K⌉` coordinates and zero elsewhere, so the means sit on hypercube
/// vertices and the closest pair is `2·class_sep` apart. Classes are balanced. Exactly `⌊label_noise · n_train⌋` training
/// labels are replaced by a different class chosen uniformly.
pub fn make_blobs(p: &BlobParams) -> Result<Dataset, LabError> {
    let BlobParams {
        n,
        d,
        num_classes: k,
        class_sep,
        label_noise,
        seed,
    } = *p;
    if k < 2 {
        return Err(param("K must be at least 2"));
    }
    if d == 0 {
        return Err(param("d must be at least 1"));
    }
    if n < 10 * k {
        return Err(param(format!("n must be at least 10·K = {}, got {n}", 10 * k)));
    }
    if !(class_sep.is_finite() && class_sep >= 0.0) {
        return Err(param(format!("class_sep must be finite and non-negative, got {class_sep}")));
    }
    if !(0.0..0.5).contains(&label_noise) {
        return Err(param(format!("label_noise must lie in [0, 0.5), got {label_noise}")));
    }

    let informative = class_bits(k);
    if d < informative {
        return Err(param(format!("d must be at least ⌈log2 K⌉ = {informative}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).map(|j| j % k).collect();
    let mut features = Array2::<f64>::zeros((n, d));
    for (j, mut row) in features.rows_mut().into_iter().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            let noise: f64 = rng.sample(StandardNormal);
            let center = if i < informative {
                class_sep * (2.0 * ((labels[j] >> i) & 1) as f64 - 1.0)
            } else {
                0.0
            };
            *v = center + noise;
        }
    }
    let (train, test) = split(n, &mut rng);

    let n_flip = (label_noise * train.len() as f64).floor() as usize;
    let mut victims = train.clone();
    victims.shuffle(&mut rng);
    for &j in &victims[..n_flip] {
        let shift = rng.random_range(1..k);
        labels[j] = (labels[j] + shift) % k;
    }
    Dataset::new(features, labels, k, train, test)
}

/// Reads `label,f_1,...,f_d` rows. A first row whose label field is not an
/// integer is treated as a header. `K` is one more than the largest label.
pub fn load_csv(path: &Path, split_seed: u64) -> Result<Dataset, LabError> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, split_seed)
}

pub fn parse_csv(text: &str, split_seed: u64) -> Result<Dataset, LabError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut d = None;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| LabError::Csv {
            line,
            message: e.to_string(),
        })?;
        let Some(first) = record.get(0) else { continue };
        let label = match first.parse::<usize>() {
            Ok(y) => y,
            Err(_) if labels.is_empty() && values.is_empty() && d.is_none() => {
                d = Some(record.len() - 1);
                continue;
            }
            Err(_) => {
                return Err(LabError::Csv {
                    line,
                    message: format!("label `{first}` is not a non-negative integer"),
                })
            }
        };
        let width = record.len() - 1;
        if *d.get_or_insert(width) != width {
            return Err(LabError::Csv {
                line,
                message: format!("expected {} features, found {width}", d.unwrap_or(0)),
            });
        }
        for field in record.iter().skip(1) {
            let v: f64 = field.parse().map_err(|_| LabError::Csv {
                line,
                message: format!("feature `{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(LabError::Csv {
                    line,
                    message: "non-finite feature".into(),
                });
            }
            values.push(v);
        }
        labels.push(label);
    }
    let d = d.unwrap_or(0);
    if labels.len() < 2 {
        return Err(param("dataset needs at least two rows"));
    }
    let k = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
    let features = Array2::from_shape_vec((labels.len(), d), values).map_err(|e| param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    let (train, test) = split(labels.len(), &mut rng);
    Dataset::new(features, labels, k, train, test)
}

/// Writes the dataset in the format read by [`parse_csv`], rows in index order.
pub fn to_csv(features: ArrayView2<f64>, labels: &[usize]) -> String {
    let mut out = String::new();
    for (row, y) in features.rows().into_iter().zip(labels) {
        out.push_str(&y.to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(noise: f64) -> BlobParams {
        BlobParams {
            n: 400,
            d: 10,
            num_classes: 2,
            class_sep: 3.0,
            label_noise: noise,
            seed: 11,
        }
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let ds = make_blobs(&params(0.0)).unwrap();
        assert_eq!(ds.train.len(), 300);
        assert_eq!(ds.test.len(), 100);
        let mut all: Vec<usize> = ds.train.iter().chain(&ds.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..400).collect::<Vec<_>>());
    }

    #[test]
    fn noise_flips_exact_count_of_training_labels() {
        let clean = make_blobs(&params(0.0)).unwrap();
        let noisy = make_blobs(&params(0.1)).unwrap();
        assert_eq!(clean.features, noisy.features);
        let flipped: Vec<usize> = (0..400).filter(|&j| clean.labels[j] != noisy.labels[j]).collect();
        assert_eq!(flipped.len(), 30);
        assert!(flipped.iter().all(|j| clean.train.contains(j)));
    }

    #[test]
    fn class_means_follow_hypercube_layout() {
        let ds = make_blobs(&BlobParams {
            n: 4000,
            num_classes: 4,
            d: 3,
            ..params(0.0)
        })
        .unwrap();
        for k in 0..4 {
            let rows: Vec<usize> = (0..4000).filter(|&j| ds.labels[j] == k).collect();
            for i in 0..3 {
                let mean = rows.iter().map(|&j| ds.features[[j, i]]).sum::<f64>() / rows.len() as f64;
                let expected = match i {
                    2 => 0.0,
                    _ if (k >> i) & 1 == 1 => 3.0,
                    _ => -3.0,
                };
                assert!((mean - expected).abs() < 0.1, "class {k} coord {i}: {mean}");
            }
        }
    }

    #[test]
    fn informative_coordinates() {
        assert_eq!([2, 3, 4, 5, 8, 9].map(class_bits), [1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_blobs(&BlobParams { n: 19, ..params(0.0) }).is_err());
        assert!(make_blobs(&params(0.5)).is_err());
        assert!(make_blobs(&BlobParams {
            num_classes: 1,
            ..params(0.0)
        })
        .is_err());
    }

    #[test]
    fn csv_round_trip_and_header() {
        let ds = make_blobs(&params(0.1)).unwrap();
        let text = to_csv(ds.features.view(), &ds.labels);
        let back = parse_csv(&format!("label,a,b,c,d,e,f,g,h,i,j\n{text}"), 5).unwrap();
        assert_eq!(back.features, ds.features);
        assert_eq!(back.labels, ds.labels);
        assert!(parse_csv("0,1.0\n1,2.0,3.0\n", 0).is_err());
        assert!(parse_csv("0,x\n1,2\n", 0).is_err());
    }
}
