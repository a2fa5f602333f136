//! Count-agreement metrics and the per-class, per-method report.
//!
//! `pe` is signed as `(measured - reference) / reference`: positive values
//! mean the method found more instances than the reference
//! (over-segmentation), negative values mean it found fewer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub image: String,
    pub measured: usize,
    pub reference: usize,
}

/// Paired method and reference counts for one class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSeries {
    pub class: String,
    pub samples: Vec<Sample>,
}

impl CountSeries {
    pub fn new(class: impl Into<String>) -> Self {
        Self {
            class: class.into(),
            samples: Vec::new(),
        }
    }

    /// Builds a series from parallel count slices, naming samples by position.
    pub fn from_counts(class: impl Into<String>, measured: &[usize], reference: &[usize]) -> Self {
        assert_eq!(measured.len(), reference.len());
        Self {
            class: class.into(),
            samples: measured
                .iter()
                .zip(reference)
                .enumerate()
                .map(|(i, (&m, &h))| Sample {
                    image: i.to_string(),
                    measured: m,
                    reference: h,
                })
                .collect(),
        }
    }

    pub fn push(&mut self, image: impl Into<String>, measured: usize, reference: usize) {
        self.samples.push(Sample {
            image: image.into(),
            measured,
            reference,
        });
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn measured(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.measured as f64).collect()
    }

    pub fn reference(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.reference as f64).collect()
    }
}

/// Signed relative count error.
pub fn pe(measured: usize, reference: usize) -> Result<f64> {
    if reference == 0 {
        return Err(Error::UndefinedMetric(
            "percentage error with a zero reference count".into(),
        ));
    }
    Ok((measured as f64 - reference as f64) / reference as f64)
}

/// Mean absolute percentage error over a series.
pub fn mape(s: &CountSeries) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::UndefinedMetric(format!(
            "class {:?} has no samples",
            s.class
        )));
    }
    let mut total = 0.0;
    for sample in &s.samples {
        if sample.reference == 0 {
            return Err(Error::UndefinedMetric(format!(
                "sample {:?} in class {:?} has a zero reference count",
                sample.image, s.class
            )));
        }
        total += (sample.measured as f64 - sample.reference as f64).abs() / sample.reference as f64;
    }
    Ok(total / s.len() as f64)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::UndefinedMetric(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedMetric(
            "correlation needs at least two samples".into(),
        ));
    }
    for (name, v) in [("x", x), ("y", y)] {
        if v.iter().all(|&a| a == v[0]) {
            return Err(Error::UndefinedMetric(format!("{name} is constant")));
        }
    }
    Ok(())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub error: f64,
    /// `None` when the correlation is undefined (a constant series).
    pub spearman: Option<f64>,
    pub pearson: Option<f64>,
    pub pe: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    #[serde(flatten)]
    pub classes: BTreeMap<String, ClassStats>,
    /// Class means of error and correlations; `pe` pools every sample.
    pub average: ClassStats,
}

/// `{method: {class: {error, spearman, pearson, pe}, average: {...}}}`
pub type Report = BTreeMap<String, MethodReport>;

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn class_stats(s: &CountSeries) -> Result<ClassStats> {
    let error = mape(s)?;
    let pe = s
        .samples
        .iter()
        .map(|x| pe(x.measured, x.reference))
        .collect::<Result<Vec<_>>>()?;
    let (m, h) = (s.measured(), s.reference());
    Ok(ClassStats {
        error,
        spearman: spearman(&m, &h).ok(),
        pearson: pearson(&m, &h).ok(),
        pe,
    })
}

/// Builds the report from `(method, series)` pairs; a method may contribute
/// one series per class.
pub fn evaluate_dataset(series: &[(String, CountSeries)]) -> Result<Report> {
    let mut report = Report::new();
    for (method, s) in series {
        let stats = class_stats(s)?;
        let entry = report.entry(method.clone()).or_insert_with(|| MethodReport {
            classes: BTreeMap::new(),
            average: ClassStats {
                error: 0.0,
                spearman: None,
                pearson: None,
                pe: Vec::new(),
            },
        });
        entry.classes.insert(s.class.clone(), stats);
    }
    for m in report.values_mut() {
        let cs: Vec<&ClassStats> = m.classes.values().collect();
        m.average = ClassStats {
            error: mean(cs.iter().map(|c| c.error)).unwrap_or(0.0),
            spearman: mean(cs.iter().filter_map(|c| c.spearman)),
            pearson: mean(cs.iter().filter_map(|c| c.pearson)),
            pe: cs.iter().flat_map(|c| c.pe.iter().copied()).collect(),
        };
    }
    Ok(report)
}

/// Methods ordered by average error, best first.
pub fn ranking(report: &Report) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = report
        .iter()
        .map(|(k, m)| (k.clone(), m.average.error))
        .collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    v
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    })
}
