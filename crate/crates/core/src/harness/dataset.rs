use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Labelled samples with features in `[0, pi]` once scaled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows, {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: n_classes,
            });
        }
        let d = features.first().map_or(0, Vec::len);
        if features.iter().any(|f| f.len() != d) {
            return Err(Error::DimensionMismatch("ragged feature rows".into()));
        }
        Ok(Self {
            features,
            labels,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
        }
    }

    /// `k` disjoint shards of `shard_size` samples each. IID shards are drawn
    /// from a seeded shuffle; label-skewed shards take label-sorted runs.
    pub fn shards(
        &self,
        k: usize,
        shard_size: usize,
        mode: ShardMode,
        seed: u64,
    ) -> Result<Vec<Dataset>> {
        if k * shard_size > self.len() {
            return Err(Error::InvalidParameter(format!(
                "{k} shards of {shard_size} need {} samples, have {}",
                k * shard_size,
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut rng::rng(seed));
        if mode == ShardMode::LabelSkew {
            order.sort_by_key(|&i| self.labels[i]);
        }
        Ok(order
            .chunks(shard_size)
            .take(k)
            .map(|idx| self.subset(idx))
            .collect())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShardMode {
    #[default]
    Iid,
    LabelSkew,
}

/// Where samples come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DataSource {
    /// Unit-variance Gaussian classes with centres `separation` apart.
    Blobs { separation: f64 },
    /// Two interleaving half circles (binary only).
    Moons { jitter: f64 },
    /// IDX image/label files; relative paths resolve against `NACQFL_DATA_DIR`.
    IdxDigits {
        images: PathBuf,
        labels: PathBuf,
        /// Digit classes to keep, mapped to labels `0..k` in this order.
        classes: Vec<u8>,
    },
}

/// Noise added to make a "noisy" variant of a dataset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DataNoise {
    /// Standard deviation of additive Gaussian feature noise (scaled units).
    pub feature_sigma: f64,
    /// Probability of replacing a label with a uniformly random other class.
    pub label_flip_prob: f64,
}

impl DataNoise {
    pub fn is_clean(&self) -> bool {
        self.feature_sigma == 0.0 && self.label_flip_prob == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub source: DataSource,
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
    #[serde(default)]
    pub noise: DataNoise,
    /// Train, validation and test fractions.
    pub splits: [f64; 3],
    pub seed: u64,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 || self.n_classes < 2 || self.n_samples == 0 {
            return Err(Error::InvalidParameter(
                "need >= 1 feature, >= 2 classes and >= 1 sample".into(),
            ));
        }
        if self.splits.iter().any(|f| *f < 0.0)
            || (self.splits.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidParameter(format!(
                "split fractions {:?} must be non-negative and sum to 1",
                self.splits
            )));
        }
        let n = &self.noise;
        if n.feature_sigma < 0.0 || !(0.0..=1.0).contains(&n.label_flip_prob) {
            return Err(Error::InvalidParameter("invalid dataset noise".into()));
        }
        match &self.source {
            DataSource::Blobs { .. } if self.n_classes > self.n_features => Err(
                Error::InvalidParameter("blobs need at least as many features as classes".into()),
            ),
            DataSource::Moons { .. } if self.n_classes != 2 => {
                Err(Error::InvalidParameter("moons are binary".into()))
            }
            DataSource::IdxDigits { classes, .. } => {
                let side = (self.n_features as f64).sqrt().round() as usize;
                if side * side != self.n_features {
                    return Err(Error::InvalidParameter(format!(
                        "image sources need a square feature count, got {}",
                        self.n_features
                    )));
                }
                if classes.len() != self.n_classes {
                    return Err(Error::InvalidParameter(
                        "class list does not match n_classes".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

/// Builds the splits: raw samples, stratified split, min-max scaling to
/// `[0, pi]` fitted on the train split, then noise from its own stream.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<Splits> {
    spec.validate()?;
    let (features, labels) = match &spec.source {
        DataSource::Blobs { separation } => blobs(spec, *separation),
        DataSource::Moons { jitter } => moons(spec, *jitter),
        DataSource::IdxDigits {
            images,
            labels,
            classes,
        } => idx_digits(spec, images, labels, classes)?,
    };
    let raw = Dataset::new(features, labels, spec.n_classes)?;
    let [mut train, mut val, mut test] =
        stratified_split(&raw, spec.splits, rng::derive(spec.seed, &[1]));
    let (lo, hi) = column_ranges(&train);
    for d in [&mut train, &mut val, &mut test] {
        scale_into(d, &lo, &hi);
    }
    if !spec.noise.is_clean() {
        for (i, d) in [&mut train, &mut val, &mut test].into_iter().enumerate() {
            add_noise(d, &spec.noise, rng::derive(spec.seed, &[2, i as u64]))?;
        }
    }
    Ok(Splits { train, val, test })
}

fn blobs(spec: &DatasetSpec, separation: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r = rng::rng(rng::derive(spec.seed, &[0]));
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let offset = separation / 2f64.sqrt();
    let mut features = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for i in 0..spec.n_samples {
        let label = i % spec.n_classes;
        let x = (0..spec.n_features)
            .map(|j| normal.sample(&mut r) + if j == label { offset } else { 0.0 })
            .collect();
        features.push(x);
        labels.push(label);
    }
    (features, labels)
}

fn moons(spec: &DatasetSpec, jitter: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r = rng::rng(rng::derive(spec.seed, &[0]));
    let normal = Normal::new(0.0, jitter.max(0.0)).expect("valid sigma");
    let mut features = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for i in 0..spec.n_samples {
        let label = i % 2;
        let t = r.random::<f64>() * PI;
        let (x, y) = if label == 0 {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        let mut row = vec![x + normal.sample(&mut r), y + normal.sample(&mut r)];
        row.extend((2..spec.n_features).map(|_| normal.sample(&mut r)));
        row.truncate(spec.n_features);
        features.push(row);
        labels.push(label);
    }
    (features, labels)
}

fn resolve(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("NACQFL_DATA_DIR") {
            return Path::new(&dir).join(path);
        }
    }
    path.to_path_buf()
}

fn idx_digits(
    spec: &DatasetSpec,
    images: &Path,
    labels: &Path,
    classes: &[u8],
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let img = read_idx_images(&std::fs::read(resolve(images))?)?;
    let lab = read_idx_labels(&std::fs::read(resolve(labels))?)?;
    if img.count != lab.len() {
        return Err(Error::Idx(format!(
            "{} images but {} labels",
            img.count,
            lab.len()
        )));
    }
    let side = (spec.n_features as f64).sqrt().round() as usize;
    let mut features = Vec::new();
    let mut out_labels = Vec::new();
    for (i, l) in lab.iter().enumerate() {
        if features.len() == spec.n_samples {
            break;
        }
        if let Some(k) = classes.iter().position(|c| c == l) {
            features.push(downsample(img.image(i), img.rows, img.cols, side));
            out_labels.push(k);
        }
    }
    if features.is_empty() {
        return Err(Error::Idx("no images of the requested classes".into()));
    }
    Ok((features, out_labels))
}

/// Decoded IDX image tensor (`0x00000803`).
#[derive(Clone, Debug, PartialEq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[i * size..(i + 1) * size]
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<usize> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize)
        .ok_or_else(|| Error::Idx("truncated header".into()))
}

pub fn read_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != 0x0000_0803 {
        return Err(Error::Idx(format!(
            "image magic {magic:#010x}, expected 0x00000803"
        )));
    }
    let (count, rows, cols) = (be_u32(bytes, 4)?, be_u32(bytes, 8)?, be_u32(bytes, 12)?);
    let body = &bytes[16..];
    if body.len() != count * rows * cols {
        return Err(Error::Idx(format!(
            "expected {} pixel bytes, found {}",
            count * rows * cols,
            body.len()
        )));
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: body.to_vec(),
    })
}

pub fn read_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != 0x0000_0801 {
        return Err(Error::Idx(format!(
            "label magic {magic:#010x}, expected 0x00000801"
        )));
    }
    let count = be_u32(bytes, 4)?;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::Idx(format!(
            "expected {count} labels, found {}",
            body.len()
        )));
    }
    Ok(body.to_vec())
}

/// Average-pools a `rows x cols` image to `side x side`.
pub fn downsample(pixels: &[u8], rows: usize, cols: usize, side: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(side * side);
    for bi in 0..side {
        let (r0, r1) = (
            bi * rows / side,
            ((bi + 1) * rows / side).max(bi * rows / side + 1),
        );
        for bj in 0..side {
            let (c0, c1) = (
                bj * cols / side,
                ((bj + 1) * cols / side).max(bj * cols / side + 1),
            );
            let mut sum = 0.0;
            for r in r0..r1.min(rows) {
                for c in c0..c1.min(cols) {
                    sum += pixels[r * cols + c] as f64;
                }
            }
            out.push(sum / ((r1 - r0) * (c1 - c0)) as f64);
        }
    }
    out
}

fn stratified_split(d: &Dataset, fractions: [f64; 3], seed: u64) -> [Dataset; 3] {
    let mut r = rng::rng(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for class in 0..d.n_classes {
        let mut idx: Vec<usize> = (0..d.len()).filter(|&i| d.labels[i] == class).collect();
        idx.shuffle(&mut r);
        let n = idx.len();
        let n_train = (fractions[0] * n as f64).round() as usize;
        let n_val = ((fractions[1] * n as f64).round() as usize).min(n - n_train);
        parts[0].extend(&idx[..n_train]);
        parts[1].extend(&idx[n_train..n_train + n_val]);
        parts[2].extend(&idx[n_train + n_val..]);
    }
    parts.map(|mut p| {
        p.shuffle(&mut r);
        d.subset(&p)
    })
}

fn column_ranges(d: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let m = d.n_features();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for row in &d.features {
        for (j, v) in row.iter().enumerate() {
            lo[j] = lo[j].min(*v);
            hi[j] = hi[j].max(*v);
        }
    }
    (lo, hi)
}

fn scale_into(d: &mut Dataset, lo: &[f64], hi: &[f64]) {
    for row in &mut d.features {
        for (j, v) in row.iter_mut().enumerate() {
            let span = hi[j] - lo[j];
            *v = if span > 0.0 && span.is_finite() {
                ((*v - lo[j]) / span * PI).clamp(0.0, PI)
            } else {
                0.0
            };
        }
    }
}

fn add_noise(d: &mut Dataset, noise: &DataNoise, seed: u64) -> Result<()> {
    let mut r = rng::rng(seed);
    if noise.feature_sigma > 0.0 {
        let normal = Normal::new(0.0, noise.feature_sigma)
            .map_err(|e| Error::InvalidParameter(format!("feature sigma: {e}")))?;
        for row in &mut d.features {
            for v in row.iter_mut() {
                *v = (*v + normal.sample(&mut r)).clamp(0.0, PI);
            }
        }
    }
    if noise.label_flip_prob > 0.0 {
        for l in &mut d.labels {
            if r.random::<f64>() < noise.label_flip_prob {
                let other = r.random_range(0..d.n_classes - 1);
                *l = if other >= *l { other + 1 } else { other };
            }
        }
    }
    Ok(())
}

/// Writes IDX image and label files (used to build fixtures and tests).
pub fn write_idx(images: &IdxImages, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        0x803u32,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        img.extend(v.to_be_bytes());
    }
    img.extend(&images.pixels);
    let mut lab = Vec::with_capacity(8 + labels.len());
    for v in [0x801u32, labels.len() as u32] {
        lab.extend(v.to_be_bytes());
    }
    lab.extend(labels);
    (img, lab)
}
