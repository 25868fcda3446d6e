//! Dataset representation and construction.
//!
//! A [`Dataset`] is an `n x m` matrix of firing rates (one row per time-bin,
//! one column per channel), a `{-1,+1}` label per bin, and an optional
//! [`CueSchedule`] describing which bins belong to rest periods and which to
//! movement cues. The module also builds the augmented system matrix
//! `H = D [A  -e]` that every solver in this crate operates on: row `i` of
//! `H` is `d_i * (x_i, -1)`, so that `(H u)_i = d_i (x_i . w - gamma)` for
//! `u = (w, gamma)`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tag reserved for rest periods in a cue schedule.
pub const REST_TAG: &str = "REST";

/// Name of the seeded generator used by [`generate_synthetic`], recorded in
/// output metadata so synthetic runs can be reproduced elsewhere.
pub const SYNTHETIC_RNG: &str = "chacha8";

/// One contiguous block of time-bins with a single tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end_exclusive: usize,
    pub tag: String,
}

impl Interval {
    pub fn new(start: usize, end_exclusive: usize, tag: impl Into<String>) -> Self {
        Interval {
            start,
            end_exclusive,
            tag: tag.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end_exclusive - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, bin: usize) -> bool {
        bin >= self.start && bin < self.end_exclusive
    }

    pub fn is_rest(&self) -> bool {
        self.tag == REST_TAG
    }
}

/// Ordered, contiguous tiling of `[0, n)` into rest and cue intervals.
///
/// Invariants enforced at construction: the first interval starts at 0, each
/// interval is nonempty, and each interval starts where the previous one
/// ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct CueSchedule {
    intervals: Vec<Interval>,
}

impl TryFrom<Vec<Interval>> for CueSchedule {
    type Error = Error;

    fn try_from(intervals: Vec<Interval>) -> Result<Self> {
        CueSchedule::new(intervals)
    }
}

impl From<CueSchedule> for Vec<Interval> {
    fn from(schedule: CueSchedule) -> Self {
        schedule.intervals
    }
}

impl CueSchedule {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidSchedule("schedule has no intervals".into()));
        }
        if intervals[0].start != 0 {
            return Err(Error::InvalidSchedule(format!(
                "first interval starts at {}, expected 0",
                intervals[0].start
            )));
        }
        let mut expected_start = 0;
        for (k, iv) in intervals.iter().enumerate() {
            if iv.start != expected_start {
                return Err(Error::InvalidSchedule(format!(
                    "interval {k} starts at {} but the previous interval ends at {expected_start}",
                    iv.start
                )));
            }
            if iv.end_exclusive <= iv.start {
                return Err(Error::InvalidSchedule(format!(
                    "interval {k} is empty or reversed ({}..{})",
                    iv.start, iv.end_exclusive
                )));
            }
            expected_start = iv.end_exclusive;
        }
        Ok(CueSchedule { intervals })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Total number of bins tiled by the schedule.
    pub fn n_bins(&self) -> usize {
        self.intervals.last().map_or(0, |iv| iv.end_exclusive)
    }

    /// Distinct non-rest tags, in order of first appearance.
    pub fn movements(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for iv in &self.intervals {
            if !iv.is_rest() && !seen.iter().any(|t| t == &iv.tag) {
                seen.push(iv.tag.clone());
            }
        }
        seen
    }

    /// Indices (into `intervals()`) of the intervals tagged `movement`.
    pub fn cue_positions(&self, movement: &str) -> Vec<usize> {
        self.intervals
            .iter()
            .enumerate()
            .filter(|(_, iv)| iv.tag == movement)
            .map(|(k, _)| k)
            .collect()
    }

    /// Per-bin flag: true on bins inside intervals tagged `movement`.
    pub fn bin_mask(&self, movement: &str) -> Vec<bool> {
        let mut mask = vec![false; self.n_bins()];
        for iv in &self.intervals {
            if iv.tag == movement {
                mask[iv.start..iv.end_exclusive].fill(true);
            }
        }
        mask
    }

    /// Read a schedule from a `start,end_exclusive,tag` CSV file.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(csv_error)?;
        let mut intervals = Vec::new();
        for record in rdr.deserialize() {
            let iv: Interval = record.map_err(csv_error)?;
            intervals.push(iv);
        }
        CueSchedule::new(intervals)
    }

    /// Write the schedule as a `start,end_exclusive,tag` CSV file.
    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path).map_err(csv_error)?;
        for iv in &self.intervals {
            wtr.serialize(iv).map_err(csv_error)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Labeled firing-rate data over time-bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: DVector<f64>,
    schedule: Option<CueSchedule>,
}

impl Dataset {
    /// Validates shapes, label values, finiteness and schedule tiling.
    pub fn new(
        features: DMatrix<f64>,
        labels: DVector<f64>,
        schedule: Option<CueSchedule>,
    ) -> Result<Self> {
        let (n, m) = features.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one row and one channel, got {n} x {m}"
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{n} feature rows but {} labels",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&d| d != 1.0 && d != -1.0) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} is not -1 or +1"
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(
                "features contain a non-finite entry".into(),
            ));
        }
        if let Some(ref s) = schedule {
            if s.n_bins() != n {
                return Err(Error::InvalidSchedule(format!(
                    "schedule tiles [0, {}) but the dataset has {n} bins",
                    s.n_bins()
                )));
            }
        }
        Ok(Dataset {
            features,
            labels,
            schedule,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn m(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    pub fn schedule(&self) -> Option<&CueSchedule> {
        self.schedule.as_ref()
    }

    pub fn with_schedule(self, schedule: CueSchedule) -> Result<Self> {
        Dataset::new(self.features, self.labels, Some(schedule))
    }
}

/// Which CSV column holds the labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".into())
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Csv {
        line,
        msg: e.to_string(),
    }
}

/// Load a dataset from a headered numeric CSV file.
///
/// All non-label columns become features in file order; the label column
/// must contain only `-1` and `+1`. An accompanying schedule, if any, is
/// loaded separately via [`CueSchedule::from_csv_path`].
pub fn load_csv(path: &Path, label_column: &LabelColumn) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_error)?;
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() {
        return Err(Error::Empty(format!("{}: no header row", path.display())));
    }
    let label_idx = match label_column {
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidConfig(format!("no column named `{name}`")))?,
        LabelColumn::Index(idx) => {
            if *idx >= headers.len() {
                return Err(Error::InvalidConfig(format!(
                    "label column index {idx} out of range for {} columns",
                    headers.len()
                )));
            }
            *idx
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(record.len().saturating_sub(1));
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Csv {
                line,
                msg: format!("field `{field}` in column {j} is not numeric"),
            })?;
            if j == label_idx {
                if value != 1.0 && value != -1.0 {
                    return Err(Error::InvalidLabel {
                        line,
                        value: field.trim().to_string(),
                    });
                }
                labels.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty(format!("{}: no data rows", path.display())));
    }
    let n = rows.len();
    let m = rows[0].len();
    let features = DMatrix::from_row_iterator(n, m, rows.into_iter().flatten());
    Dataset::new(features, DVector::from_vec(labels), None)
}

/// Write a dataset as `ch0,...,ch{m-1},label` CSV. Values use the shortest
/// decimal text that round-trips, so rewriting a loaded file is lossless.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(csv_error)?;
    let m = dataset.m();
    let mut header: Vec<String> = (0..m).map(|j| format!("ch{j}")).collect();
    header.push("label".into());
    wtr.write_record(&header).map_err(csv_error)?;
    let mut field = String::new();
    for i in 0..dataset.n() {
        let mut record: Vec<String> = Vec::with_capacity(m + 1);
        for j in 0..m {
            field.clear();
            write!(field, "{}", dataset.features()[(i, j)]).expect("write to string");
            record.push(field.clone());
        }
        record.push(if dataset.labels()[i] > 0.0 { "1" } else { "-1" }.into());
        wtr.write_record(&record).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Recipe for a synthetic cue-structured recording.
///
/// During every non-rest interval the `active_channels` fire around
/// `active_rate`; everywhere else every channel fires around
/// `baseline_rate`. Labels are `+1` on cue bins and `-1` on rest bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Channel count.
    pub m: usize,
    /// Channels that respond to the imagined movement.
    pub active_channels: Vec<usize>,
    /// Resting firing rate, spikes/sec.
    pub baseline_rate: f64,
    /// Firing rate of active channels during cues, spikes/sec.
    pub active_rate: f64,
    /// Standard deviation of the additive Gaussian rate noise.
    pub noise_scale: f64,
    pub schedule: CueSchedule,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        for &c in &self.active_channels {
            if c >= self.m {
                return Err(Error::InvalidConfig(format!(
                    "active channel {c} out of range for m={}",
                    self.m
                )));
            }
            if !seen.insert(c) {
                return Err(Error::InvalidConfig(format!(
                    "active channel {c} listed twice"
                )));
            }
        }
        if !self.baseline_rate.is_finite() || !self.active_rate.is_finite() {
            return Err(Error::InvalidConfig("rates must be finite".into()));
        }
        if self.active_rate <= self.baseline_rate {
            return Err(Error::InvalidConfig(format!(
                "active_rate {} must exceed baseline_rate {}",
                self.active_rate, self.baseline_rate
            )));
        }
        if !self.noise_scale.is_finite() || self.noise_scale < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise_scale {} must be a finite nonnegative number",
                self.noise_scale
            )));
        }
        Ok(())
    }
}

/// Generate a synthetic dataset from `spec`.
///
/// Rates are `base + noise_scale * z` with `z` standard normal, clamped at 0
/// (rates are nonnegative). Sampling walks bins in order and channels within
/// each bin, one draw per entry from a ChaCha8 stream seeded with
/// `spec.seed`, so output is a deterministic function of the spec on every
/// platform. Returns the dataset and the ground-truth active channel list.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Vec<usize>)> {
    spec.validate()?;
    let n = spec.schedule.n_bins();
    let m = spec.m;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let active: HashSet<usize> = spec.active_channels.iter().copied().collect();

    let mut cue_bin = vec![false; n];
    let mut labels = DVector::from_element(n, -1.0);
    for iv in spec.schedule.intervals() {
        if !iv.is_rest() {
            for i in iv.start..iv.end_exclusive {
                cue_bin[i] = true;
                labels[i] = 1.0;
            }
        }
    }

    let mut features = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let base = if cue_bin[i] && active.contains(&j) {
                spec.active_rate
            } else {
                spec.baseline_rate
            };
            let z: f64 = noise.sample(&mut rng);
            features[(i, j)] = (base + spec.noise_scale * z).max(0.0);
        }
    }

    let mut truth = spec.active_channels.clone();
    truth.sort_unstable();
    let dataset = Dataset::new(features, labels, Some(spec.schedule.clone()))?;
    Ok((dataset, truth))
}

/// Relabel for one-vs-rest: `+1` on bins inside intervals tagged `movement`,
/// `-1` on everything else (rest periods and other movements alike).
pub fn relabel_one_vs_rest(dataset: &Dataset, movement: &str) -> Result<Dataset> {
    let schedule = dataset
        .schedule()
        .ok_or_else(|| Error::InvalidSchedule("dataset has no schedule".into()))?;
    if schedule.cue_positions(movement).is_empty() {
        return Err(Error::UnknownMovement(movement.to_string()));
    }
    let mask = schedule.bin_mask(movement);
    let labels = DVector::from_iterator(
        dataset.n(),
        mask.iter().map(|&on| if on { 1.0 } else { -1.0 }),
    );
    Dataset::new(
        dataset.features().clone(),
        labels,
        Some(schedule.clone()),
    )
}

/// Split at the start of the `(train_cues + 1)`-th interval tagged
/// `movement`: everything before it (earlier rests and other movements
/// included) is training data, everything from it onward is test data.
/// Both halves keep clipped schedules; the test schedule is shifted to
/// start at bin 0.
pub fn split_by_cues(
    dataset: &Dataset,
    movement: &str,
    train_cues: usize,
) -> Result<(Dataset, Dataset)> {
    let schedule = dataset
        .schedule()
        .ok_or_else(|| Error::InvalidSchedule("dataset has no schedule".into()))?;
    let positions = schedule.cue_positions(movement);
    if positions.is_empty() {
        return Err(Error::UnknownMovement(movement.to_string()));
    }
    if positions.len() <= train_cues {
        return Err(Error::TooFewCues {
            movement: movement.to_string(),
            requested: train_cues,
            available: positions.len(),
        });
    }
    let split_interval = positions[train_cues];
    let split_bin = schedule.intervals()[split_interval].start;
    if split_bin == 0 {
        return Err(Error::Empty(
            "training segment would be empty: the first interval is already a held-out cue".into(),
        ));
    }

    let n = dataset.n();
    let train_features = dataset.features().rows(0, split_bin).into_owned();
    let test_features = dataset.features().rows(split_bin, n - split_bin).into_owned();
    let train_labels = dataset.labels().rows(0, split_bin).into_owned();
    let test_labels = dataset.labels().rows(split_bin, n - split_bin).into_owned();

    let train_intervals = schedule.intervals()[..split_interval].to_vec();
    let test_intervals: Vec<Interval> = schedule.intervals()[split_interval..]
        .iter()
        .map(|iv| Interval::new(iv.start - split_bin, iv.end_exclusive - split_bin, iv.tag.clone()))
        .collect();

    let train = Dataset::new(
        train_features,
        train_labels,
        Some(CueSchedule::new(train_intervals)?),
    )?;
    let test = Dataset::new(
        test_features,
        test_labels,
        Some(CueSchedule::new(test_intervals)?),
    )?;
    Ok((train, test))
}

/// Build the augmented system matrix `H = D [A  -e]`.
///
/// Row `i` is `d_i * (x_i, -1)`, so the last column is `-d` and
/// `(H u)_i = d_i (x_i . w - gamma)` is the signed margin of bin `i`.
pub fn build_augmented(dataset: &Dataset) -> DMatrix<f64> {
    let (n, m) = (dataset.n(), dataset.m());
    let mut h = DMatrix::zeros(n, m + 1);
    for i in 0..n {
        let d = dataset.labels()[i];
        for j in 0..m {
            h[(i, j)] = d * dataset.features()[(i, j)];
        }
        h[(i, m)] = -d;
    }
    h
}

/// Per-channel statistics recorded when standardizing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: f64,
    pub std: f64,
}

/// Standardize each channel to zero mean and unit variance.
///
/// Returns the transformed dataset and the per-channel statistics needed to
/// apply the same transform to held-out data. Constant channels (std = 0)
/// are centered only. Note this rescales the fitted weights `w`
/// correspondingly.
pub fn zscore_channels(dataset: &Dataset) -> (Dataset, Vec<ChannelStats>) {
    let (n, m) = (dataset.n(), dataset.m());
    let mut stats = Vec::with_capacity(m);
    for j in 0..m {
        let col = dataset.features().column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        stats.push(ChannelStats {
            mean,
            std: var.sqrt(),
        });
    }
    let transformed = apply_zscore(dataset, &stats).expect("stats match dataset");
    (transformed, stats)
}

/// Apply previously computed channel statistics to another dataset.
pub fn apply_zscore(dataset: &Dataset, stats: &[ChannelStats]) -> Result<Dataset> {
    let (n, m) = (dataset.n(), dataset.m());
    if stats.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} channel stats for {m} channels",
            stats.len()
        )));
    }
    let mut features = dataset.features().clone();
    for j in 0..m {
        let scale = if stats[j].std > 0.0 { stats[j].std } else { 1.0 };
        for i in 0..n {
            features[(i, j)] = (features[(i, j)] - stats[j].mean) / scale;
        }
    }
    Dataset::new(features, dataset.labels().clone(), dataset.schedule().cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn schedule(spans: &[(usize, usize, &str)]) -> CueSchedule {
        CueSchedule::new(
            spans
                .iter()
                .map(|&(s, e, t)| Interval::new(s, e, t))
                .collect(),
        )
        .unwrap()
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn load_csv_parses_features_and_labels() {
        let f = write_temp("c0,c1,label\n1,2,1\n0,1,-1\n2,0,1\n");
        let ds = load_csv(f.path(), &LabelColumn::default()).unwrap();
        assert_eq!((ds.n(), ds.m()), (3, 2));
        assert_eq!(ds.features()[(0, 1)], 2.0);
        assert_eq!(ds.labels().as_slice(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn load_csv_label_by_index_and_name_agree() {
        let f = write_temp("a,target,b\n1,1,2\n3,-1,4\n");
        let by_name = load_csv(f.path(), &LabelColumn::Name("target".into())).unwrap();
        let by_index = load_csv(f.path(), &LabelColumn::Index(1)).unwrap();
        assert_eq!(by_name, by_index);
        assert_eq!(by_name.features()[(1, 1)], 4.0);
    }

    #[test]
    fn load_csv_rejects_bad_label_with_line() {
        let f = write_temp("c0,label\n1,1\n2,0\n");
        let err = load_csv(f.path(), &LabelColumn::default()).unwrap_err();
        match err {
            Error::InvalidLabel { line, ref value } => {
                assert_eq!(line, 3);
                assert_eq!(value, "0");
            }
            other => panic!("expected InvalidLabel, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_ragged_row_naming_line() {
        let f = write_temp("c0,c1,label\n1,2,1\n3,1\n");
        let err = load_csv(f.path(), &LabelColumn::default()).unwrap_err();
        match err {
            Error::Csv { line, .. } => assert_eq!(line, 3),
            other => panic!("expected Csv error, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_empty_file() {
        let f = write_temp("c0,label\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::default()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let spec = SyntheticSpec {
            m: 3,
            active_channels: vec![1],
            baseline_rate: 5.0,
            active_rate: 20.0,
            noise_scale: 1.5,
            schedule: schedule(&[(0, 4, REST_TAG), (4, 8, "wrist_up")]),
            seed: 7,
        };
        let (ds, _) = generate_synthetic(&spec).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(&ds, f.path()).unwrap();
        let loaded = load_csv(f.path(), &LabelColumn::default()).unwrap();
        assert_eq!(loaded.features(), ds.features());
        assert_eq!(loaded.labels(), ds.labels());
    }

    #[test]
    fn schedule_validation_catches_gaps_and_offsets() {
        assert!(CueSchedule::new(vec![Interval::new(1, 3, REST_TAG)]).is_err());
        assert!(CueSchedule::new(vec![
            Interval::new(0, 3, REST_TAG),
            Interval::new(4, 6, "a"),
        ])
        .is_err());
        assert!(CueSchedule::new(vec![
            Interval::new(0, 3, REST_TAG),
            Interval::new(3, 3, "a"),
        ])
        .is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec {
            m: 4,
            active_channels: vec![0, 2],
            baseline_rate: 4.0,
            active_rate: 18.0,
            noise_scale: 2.0,
            schedule: schedule(&[(0, 5, REST_TAG), (5, 10, "grip")]),
            seed: 99,
        };
        let (a, truth_a) = generate_synthetic(&spec).unwrap();
        let (b, truth_b) = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(truth_a, truth_b);
        assert_eq!(truth_a, vec![0, 2]);
    }

    #[test]
    fn synthetic_zero_noise_hits_rates_exactly() {
        let spec = SyntheticSpec {
            m: 3,
            active_channels: vec![1],
            baseline_rate: 6.0,
            active_rate: 15.0,
            noise_scale: 0.0,
            schedule: schedule(&[(0, 2, REST_TAG), (2, 4, "pinch")]),
            seed: 1,
        };
        let (ds, _) = generate_synthetic(&spec).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(ds.features()[(i, j)], 6.0);
            }
        }
        assert_eq!(ds.features()[(2, 1)], 15.0);
        assert_eq!(ds.features()[(3, 1)], 15.0);
        assert_eq!(ds.features()[(2, 0)], 6.0);
    }

    #[test]
    fn synthetic_labels_follow_cue_intervals() {
        let spec = SyntheticSpec {
            m: 96,
            active_channels: vec![1, 5, 9, 44, 90],
            baseline_rate: 5.0,
            active_rate: 25.0,
            noise_scale: 1.0,
            schedule: schedule(&[
                (0, 10, REST_TAG),
                (10, 20, "wrist_up"),
                (20, 30, REST_TAG),
                (30, 40, "wrist_up"),
                (40, 50, REST_TAG),
                (50, 60, "wrist_up"),
                (60, 70, REST_TAG),
                (70, 80, "wrist_up"),
                (80, 90, REST_TAG),
            ]),
            seed: 3,
        };
        let (ds, _) = generate_synthetic(&spec).unwrap();
        for i in 0..90 {
            let in_cue = (10..20).contains(&i)
                || (30..40).contains(&i)
                || (50..60).contains(&i)
                || (70..80).contains(&i);
            assert_eq!(ds.labels()[i] > 0.0, in_cue, "bin {i}");
        }
    }

    #[test]
    fn relabel_marks_other_movements_negative() {
        let sched = schedule(&[
            (0, 2, REST_TAG),
            (2, 4, "wrist_up"),
            (4, 6, "hand_close"),
        ]);
        let ds = Dataset::new(
            DMatrix::zeros(6, 1).add_scalar(1.0),
            DVector::from_element(6, 1.0),
            Some(sched),
        )
        .unwrap();
        let relabeled = relabel_one_vs_rest(&ds, "wrist_up").unwrap();
        assert_eq!(
            relabeled.labels().as_slice(),
            &[-1.0, -1.0, 1.0, 1.0, -1.0, -1.0]
        );
        assert!(matches!(
            relabel_one_vs_rest(&ds, "shoulder_up"),
            Err(Error::UnknownMovement(_))
        ));
    }

    #[test]
    fn split_at_fourth_cue_start() {
        let sched = schedule(&[
            (0, 10, REST_TAG),
            (10, 20, "w"),
            (20, 30, REST_TAG),
            (30, 40, "w"),
            (40, 50, REST_TAG),
            (50, 60, "w"),
            (60, 70, REST_TAG),
            (70, 80, "w"),
            (80, 90, REST_TAG),
        ]);
        let ds = Dataset::new(
            DMatrix::from_fn(90, 2, |i, j| (i * 2 + j) as f64),
            DVector::from_fn(90, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 }),
            Some(sched),
        )
        .unwrap();
        let (train, test) = split_by_cues(&ds, "w", 3).unwrap();
        assert_eq!(train.n(), 70);
        assert_eq!(test.n(), 20);
        // Test segment starts exactly at the fourth cue.
        assert_eq!(test.schedule().unwrap().intervals()[0].tag, "w");
        assert_eq!(test.schedule().unwrap().intervals()[0].start, 0);
        assert_eq!(test.features()[(0, 0)], ds.features()[(70, 0)]);
    }

    #[test]
    fn split_with_sparse_cue_positions() {
        // Cues at schedule intervals 2 and 4; train_cues=1 keeps intervals 0-3.
        let sched = schedule(&[
            (0, 5, REST_TAG),
            (5, 10, "other"),
            (10, 15, "w"),
            (15, 20, REST_TAG),
            (20, 25, "w"),
        ]);
        let ds = Dataset::new(
            DMatrix::from_element(25, 1, 1.0),
            DVector::from_element(25, 1.0),
            Some(sched),
        )
        .unwrap();
        let (train, test) = split_by_cues(&ds, "w", 1).unwrap();
        assert_eq!(train.n(), 20);
        assert_eq!(train.schedule().unwrap().intervals().len(), 4);
        assert_eq!(test.n(), 5);
    }

    #[test]
    fn split_requires_more_cues_than_train_cues() {
        let sched = schedule(&[(0, 5, REST_TAG), (5, 10, "w")]);
        let ds = Dataset::new(
            DMatrix::from_element(10, 1, 1.0),
            DVector::from_element(10, 1.0),
            Some(sched),
        )
        .unwrap();
        assert!(matches!(
            split_by_cues(&ds, "w", 1),
            Err(Error::TooFewCues { .. })
        ));
    }

    #[test]
    fn augmented_matrix_matches_hand_expansion() {
        let ds = Dataset::new(
            DMatrix::from_row_slice(2, 1, &[2.0, -2.0]),
            DVector::from_vec(vec![1.0, -1.0]),
            None,
        )
        .unwrap();
        let h = build_augmented(&ds);
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 2.0, 1.0]));
    }

    #[test]
    fn augmented_matrix_all_positive_labels() {
        let ds = Dataset::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            DVector::from_vec(vec![1.0, 1.0]),
            None,
        )
        .unwrap();
        let h = build_augmented(&ds);
        assert_eq!(
            h,
            DMatrix::from_row_slice(2, 3, &[1.0, 2.0, -1.0, 3.0, 4.0, -1.0])
        );
    }

    #[test]
    fn augmented_matrix_zero_row_negative_label() {
        let ds = Dataset::new(
            DMatrix::from_row_slice(1, 2, &[0.0, 0.0]),
            DVector::from_vec(vec![-1.0]),
            None,
        )
        .unwrap();
        assert_eq!(
            build_augmented(&ds),
            DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0])
        );
    }

    #[test]
    fn zscore_round_trips_through_stats() {
        let ds = Dataset::new(
            DMatrix::from_row_slice(4, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0]),
            DVector::from_vec(vec![1.0, -1.0, 1.0, -1.0]),
            None,
        )
        .unwrap();
        let (z, stats) = zscore_channels(&ds);
        let col0_mean: f64 = z.features().column(0).sum() / 4.0;
        assert!(col0_mean.abs() < 1e-12);
        // Constant channel is centered, not divided by zero.
        assert_eq!(stats[1].std, 0.0);
        assert!(z.features().column(1).iter().all(|&v| v == 0.0));
        let again = apply_zscore(&ds, &stats).unwrap();
        assert_eq!(again, z);
    }

    #[test]
    fn schedule_csv_round_trip() {
        let sched = schedule(&[(0, 3, REST_TAG), (3, 7, "wrist_up")]);
        let f = tempfile::NamedTempFile::new().unwrap();
        sched.write_csv_path(f.path()).unwrap();
        let loaded = CueSchedule::from_csv_path(f.path()).unwrap();
        assert_eq!(loaded, sched);
    }
}
