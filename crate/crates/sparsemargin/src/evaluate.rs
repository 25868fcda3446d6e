//! Force-based performance measures.
//!
//! The classifier's continuous output over time is the force
//! `F = A w - gamma`. Pointwise `sign(F)` is the naive detector; summing the
//! force over a sliding window (`P`) or averaging it over each cue/rest
//! interval (`P~`) suppresses single-bin outliers that would otherwise flip
//! the detected state.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::data::{CueSchedule, Dataset};
use crate::error::{Error, Result};
use crate::psvm::Hyperplane;

/// The force `F_i = x_i . w - gamma`, one value per time-bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSeries {
    pub values: Vec<f64>,
}

impl ForceSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    PointwiseSign,
    Summed,
    IntervalAveraged,
}

/// A derived performance series.
///
/// For `Summed` the values are per-bin and `window_halfwidth` is set; for
/// `IntervalAveraged` there is one value per interval and `interval_bounds`
/// holds the `(start, end_exclusive)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceSeries {
    pub kind: MeasureKind,
    pub values: Vec<f64>,
    pub window_halfwidth: Option<usize>,
    pub interval_bounds: Option<Vec<(usize, usize)>>,
}

impl PerformanceSeries {
    /// Per-bin view: interval-averaged series expand to a step function,
    /// everything else is already per-bin.
    pub fn expand_per_bin(&self) -> Vec<f64> {
        match (&self.kind, &self.interval_bounds) {
            (MeasureKind::IntervalAveraged, Some(bounds)) => {
                let n = bounds.last().map_or(0, |b| b.1);
                let mut out = vec![0.0; n];
                for (value, &(start, end)) in self.values.iter().zip(bounds.iter()) {
                    out[start..end].fill(*value);
                }
                out
            }
            _ => self.values.clone(),
        }
    }
}

/// Evaluate the force `F = A w - gamma` over a dataset.
pub fn force(dataset: &Dataset, plane: &Hyperplane) -> Result<ForceSeries> {
    if plane.dim() != dataset.m() {
        return Err(Error::DimensionMismatch(format!(
            "hyperplane has {} weights but the dataset has {} channels",
            plane.dim(),
            dataset.m()
        )));
    }
    let w = DVector::from_column_slice(&plane.w);
    let values = (dataset.features() * w)
        .iter()
        .map(|v| v - plane.gamma)
        .collect();
    Ok(ForceSeries { values })
}

/// Pointwise `sign(F)` with `sign(0) = 0`.
pub fn sign_series(f: &ForceSeries) -> PerformanceSeries {
    PerformanceSeries {
        kind: MeasureKind::PointwiseSign,
        values: f
            .values
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect(),
        window_halfwidth: None,
        interval_bounds: None,
    }
}

/// Summed measure `P_k = sum_{i=k-h}^{k+h} F_i`, truncating the window at
/// the series boundaries so `P` keeps the length of `F`.
pub fn summed_performance(f: &ForceSeries, halfwidth: usize) -> PerformanceSeries {
    let n = f.values.len();
    let values = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(halfwidth);
            let hi = (k + halfwidth).min(n.saturating_sub(1));
            f.values[lo..=hi].iter().sum()
        })
        .collect();
    PerformanceSeries {
        kind: MeasureKind::Summed,
        values,
        window_halfwidth: Some(halfwidth),
        interval_bounds: None,
    }
}

/// Interval-averaged measure: the mean force over each schedule interval.
pub fn averaged_performance(f: &ForceSeries, schedule: &CueSchedule) -> Result<PerformanceSeries> {
    if schedule.n_bins() != f.values.len() {
        return Err(Error::DimensionMismatch(format!(
            "schedule tiles [0, {}) but the force series has {} bins",
            schedule.n_bins(),
            f.values.len()
        )));
    }
    let mut values = Vec::with_capacity(schedule.intervals().len());
    let mut bounds = Vec::with_capacity(schedule.intervals().len());
    for iv in schedule.intervals() {
        let mean =
            f.values[iv.start..iv.end_exclusive].iter().sum::<f64>() / iv.len() as f64;
        values.push(mean);
        bounds.push((iv.start, iv.end_exclusive));
    }
    Ok(PerformanceSeries {
        kind: MeasureKind::IntervalAveraged,
        values,
        window_halfwidth: None,
        interval_bounds: Some(bounds),
    })
}

/// Alternative averaging mode: intervals are the maximal runs of equal
/// `sign(F)` instead of the cue schedule.
pub fn averaged_over_sign_runs(f: &ForceSeries) -> PerformanceSeries {
    let n = f.values.len();
    let mut values = Vec::new();
    let mut bounds = Vec::new();
    let mut start = 0;
    while start < n {
        let s = f.values[start].signum();
        let mut end = start + 1;
        while end < n && f.values[end].signum() == s {
            end += 1;
        }
        let mean = f.values[start..end].iter().sum::<f64>() / (end - start) as f64;
        values.push(mean);
        bounds.push((start, end));
        start = end;
    }
    PerformanceSeries {
        kind: MeasureKind::IntervalAveraged,
        values,
        window_halfwidth: None,
        interval_bounds: Some(bounds),
    }
}

/// Max-absolute normalization `F / |F|_inf`, used for side-by-side force
/// comparisons. A zero series stays zero.
pub fn normalize_max_abs(f: &ForceSeries) -> ForceSeries {
    let max = f.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if max == 0.0 {
        return f.clone();
    }
    ForceSeries {
        values: f.values.iter().map(|v| v / max).collect(),
    }
}

/// Margin and separability summary of a classifier on a dataset.
///
/// Per-class force means are `None` when the class is absent rather than a
/// placeholder zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginStats {
    /// Fraction of bins with `d_i (x_i . w - gamma) >= 1`.
    pub fraction_margin_ok: f64,
    pub mean_pos_force: Option<f64>,
    pub mean_neg_force: Option<f64>,
    /// `sum_i max(0, 1 - d_i (x_i . w - gamma))`.
    pub hinge_sum: f64,
}

pub fn margin_stats(dataset: &Dataset, plane: &Hyperplane) -> Result<MarginStats> {
    let f = force(dataset, plane)?;
    let n = dataset.n();
    let mut ok = 0usize;
    let mut hinge_sum = 0.0;
    let mut pos = (0.0, 0usize);
    let mut neg = (0.0, 0usize);
    for i in 0..n {
        let d = dataset.labels()[i];
        let margin = d * f.values[i];
        if margin >= 1.0 {
            ok += 1;
        }
        hinge_sum += (1.0 - margin).max(0.0);
        if d > 0.0 {
            pos = (pos.0 + f.values[i], pos.1 + 1);
        } else {
            neg = (neg.0 + f.values[i], neg.1 + 1);
        }
    }
    Ok(MarginStats {
        fraction_margin_ok: ok as f64 / n as f64,
        mean_pos_force: (pos.1 > 0).then(|| pos.0 / pos.1 as f64),
        mean_neg_force: (neg.1 > 0).then(|| neg.0 / neg.1 as f64),
        hinge_sum,
    })
}

/// Write the plot-ready series as `bin,F,P,P_tilde,label` CSV. The `P_tilde`
/// column is empty when no schedule is available.
pub fn write_forces_csv(
    path: &Path,
    f: &ForceSeries,
    summed: &PerformanceSeries,
    averaged: Option<&PerformanceSeries>,
    labels: &DVector<f64>,
) -> Result<()> {
    let n = f.values.len();
    if summed.values.len() != n || labels.len() != n {
        return Err(Error::DimensionMismatch(
            "force, summed series and labels must share a length".into(),
        ));
    }
    let expanded = averaged.map(|series| series.expand_per_bin());
    if let Some(ref e) = expanded {
        if e.len() != n {
            return Err(Error::DimensionMismatch(
                "averaged series does not tile the force series".into(),
            ));
        }
    }
    let mut wtr = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        line: 0,
        msg: e.to_string(),
    })?;
    wtr.write_record(["bin", "F", "P", "P_tilde", "label"])
        .map_err(|e| Error::Csv { line: 0, msg: e.to_string() })?;
    let mut buf = String::new();
    for i in 0..n {
        buf.clear();
        let p_tilde = match &expanded {
            Some(e) => {
                write!(buf, "{}", e[i]).expect("write to string");
                buf.clone()
            }
            None => String::new(),
        };
        wtr.write_record([
            i.to_string(),
            format!("{}", f.values[i]),
            format!("{}", summed.values[i]),
            p_tilde,
            if labels[i] > 0.0 { "1".into() } else { "-1".to_string() },
        ])
        .map_err(|e| Error::Csv { line: 0, msg: e.to_string() })?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Interval, REST_TAG};
    use nalgebra::DMatrix;

    fn series(values: &[f64]) -> ForceSeries {
        ForceSeries {
            values: values.to_vec(),
        }
    }

    fn two_point_dataset() -> Dataset {
        Dataset::new(
            DMatrix::from_row_slice(2, 1, &[2.0, -2.0]),
            DVector::from_vec(vec![1.0, -1.0]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn force_of_zero_plane_is_zero() {
        let f = force(&two_point_dataset(), &Hyperplane::zeros(1)).unwrap();
        assert_eq!(f.values, vec![0.0, 0.0]);
    }

    #[test]
    fn force_of_psvm_example() {
        let f = force(&two_point_dataset(), &Hyperplane::new(vec![4.0 / 9.0], 0.0)).unwrap();
        assert!((f.values[0] - 8.0 / 9.0).abs() < 1e-15);
        assert!((f.values[1] + 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn shifting_gamma_shifts_force() {
        let ds = two_point_dataset();
        let base = force(&ds, &Hyperplane::new(vec![0.5], 0.0)).unwrap();
        let shifted = force(&ds, &Hyperplane::new(vec![0.5], 0.7)).unwrap();
        for (b, s) in base.values.iter().zip(shifted.values.iter()) {
            assert!((s - (b - 0.7)).abs() < 1e-15);
        }
    }

    #[test]
    fn sign_series_cases() {
        assert_eq!(
            sign_series(&series(&[8.0 / 9.0, -8.0 / 9.0])).values,
            vec![1.0, -1.0]
        );
        assert_eq!(sign_series(&series(&[0.0, 0.0])).values, vec![0.0, 0.0]);
        assert_eq!(
            sign_series(&series(&[-3.0, 0.0, 5.0])).values,
            vec![-1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn summed_constant_series_interior_value() {
        let f = series(&[1.0; 20]);
        let p = summed_performance(&f, 5);
        assert_eq!(p.values[10], 11.0);
        // Truncated at the left boundary: bins 0..=5.
        assert_eq!(p.values[0], 6.0);
    }

    #[test]
    fn summed_outvotes_a_single_outlier() {
        let f = series(&[1.0, 1.0, 1.0, 1.0, 1.0, -9.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let p = summed_performance(&f, 5);
        assert!((p.values[5] - 1.0).abs() < 1e-15);
        assert!(p.values[5] > 0.0);
    }

    #[test]
    fn summed_with_zero_halfwidth_is_identity() {
        let f = series(&[3.0, -1.0, 2.0]);
        assert_eq!(summed_performance(&f, 0).values, f.values);
    }

    #[test]
    fn averaged_two_interval_example() {
        let schedule = CueSchedule::new(vec![
            Interval::new(0, 2, REST_TAG),
            Interval::new(2, 4, "w"),
        ])
        .unwrap();
        let p = averaged_performance(&series(&[1.0, 3.0, -1.0, -3.0]), &schedule).unwrap();
        assert_eq!(p.values, vec![2.0, -2.0]);
        assert_eq!(p.expand_per_bin(), vec![2.0, 2.0, -2.0, -2.0]);
    }

    #[test]
    fn averaged_constant_series_is_constant() {
        let schedule = CueSchedule::new(vec![
            Interval::new(0, 3, REST_TAG),
            Interval::new(3, 5, "w"),
            Interval::new(5, 9, REST_TAG),
        ])
        .unwrap();
        let p = averaged_performance(&series(&[0.25; 9]), &schedule).unwrap();
        assert!(p.values.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn averaged_absorbs_outlier_that_flips_sign_series() {
        let mut values = vec![1.0; 10];
        values[4] = -5.0;
        let f = series(&values);
        let schedule = CueSchedule::new(vec![Interval::new(0, 10, "w")]).unwrap();
        let p = averaged_performance(&f, &schedule).unwrap();
        assert!((p.values[0] - 0.4).abs() < 1e-15);
        assert!(p.values[0] > 0.0);
        let signs = sign_series(&f);
        assert_eq!(signs.values[4], -1.0);
    }

    #[test]
    fn sign_run_mode_splits_at_sign_changes() {
        let f = series(&[1.0, 2.0, -1.0, -1.0, 3.0]);
        let p = averaged_over_sign_runs(&f);
        assert_eq!(p.values, vec![1.5, -1.0, 3.0]);
        assert_eq!(
            p.interval_bounds.as_deref(),
            Some(&[(0, 2), (2, 4), (4, 5)][..])
        );
    }

    #[test]
    fn margin_stats_on_the_psvm_example() {
        let stats = margin_stats(&two_point_dataset(), &Hyperplane::new(vec![4.0 / 9.0], 0.0))
            .unwrap();
        assert_eq!(stats.fraction_margin_ok, 0.0);
        assert!((stats.hinge_sum - 2.0 / 9.0).abs() < 1e-12);
        assert!((stats.mean_pos_force.unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert!((stats.mean_neg_force.unwrap() + 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn margin_stats_zero_plane_counts_every_residual() {
        let stats = margin_stats(&two_point_dataset(), &Hyperplane::zeros(1)).unwrap();
        assert_eq!(stats.hinge_sum, 2.0);
        assert_eq!(stats.fraction_margin_ok, 0.0);
    }

    #[test]
    fn margin_stats_separated_data() {
        let stats = margin_stats(&two_point_dataset(), &Hyperplane::new(vec![1.0], 0.0)).unwrap();
        assert_eq!(stats.fraction_margin_ok, 1.0);
        assert_eq!(stats.hinge_sum, 0.0);
    }

    #[test]
    fn margin_stats_single_class_reports_none() {
        let ds = Dataset::new(
            DMatrix::from_row_slice(2, 1, &[1.0, 2.0]),
            DVector::from_vec(vec![1.0, 1.0]),
            None,
        )
        .unwrap();
        let stats = margin_stats(&ds, &Hyperplane::zeros(1)).unwrap();
        assert!(stats.mean_neg_force.is_none());
        assert!(stats.mean_pos_force.is_some());
    }

    #[test]
    fn normalization_caps_at_unit_magnitude() {
        let f = normalize_max_abs(&series(&[2.0, -8.0, 4.0]));
        assert_eq!(f.values, vec![0.25, -1.0, 0.5]);
        let zero = normalize_max_abs(&series(&[0.0, 0.0]));
        assert_eq!(zero.values, vec![0.0, 0.0]);
    }

    #[test]
    fn forces_csv_has_expected_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forces.csv");
        let f = series(&[1.0, -1.0, 2.0, -2.0]);
        let p = summed_performance(&f, 1);
        let schedule = CueSchedule::new(vec![
            Interval::new(0, 2, REST_TAG),
            Interval::new(2, 4, "w"),
        ])
        .unwrap();
        let avg = averaged_performance(&f, &schedule).unwrap();
        let labels = DVector::from_vec(vec![-1.0, -1.0, 1.0, 1.0]);
        write_forces_csv(&path, &f, &p, Some(&avg), &labels).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bin,F,P,P_tilde,label");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,1,0,0,-1"));
    }
}
