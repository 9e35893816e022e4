//! Evaluation metrics: correlations, first-rank loss, docking RMSDs,
//! Kabsch superposition, GDT-TS, AUROC and affinity conversion.

mod classification;
mod correlation;
mod docking;
mod suites;
mod superpose;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classification::{auroc, pk_from_molar};
pub use correlation::{
    average_ranks, first_rank_loss, kendall, mean_and_global, pearson, spearman, CorrelationKind, MeanGlobal,
};
pub use docking::{interface_rmsd, interface_rmsd_with_cutoff, rmsd, root_mean_squared_error, INTERFACE_CUTOFF};
pub use suites::{docking_report, lba_report, mqa_report, ppi_report, AffinityUnit, DockingCase};
pub use superpose::{gdt_ts, kabsch_superpose, Superposition, GDT_THRESHOLDS};

use crate::linalg::Vec3;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
    #[error("input is empty")]
    EmptyInput,
    #[error("inputs differ in length: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("degenerate point set: {0}")]
    Degenerate(String),
    #[error("no residue pair lies under the interface cutoff")]
    NoInterface,
    #[error("labels contain only one class")]
    OneClassOnly,
    #[error("affinity must be positive, got {0}")]
    NonPositiveAffinity(f64),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("invalid point list: {0}")]
    BadPointList(String),
}

pub type Result<T> = std::result::Result<T, MetricError>;

/// Predicted/true score pairs for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSet<T> {
    pub target_id: String,
    /// `(predicted, true)` pairs.
    pub items: Vec<(T, T)>,
}

impl<T: Real> ScoredSet<T> {
    pub fn predicted(&self) -> Vec<T> {
        self.items.iter().map(|p| p.0).collect()
    }

    pub fn truth(&self) -> Vec<T> {
        self.items.iter().map(|p| p.1).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointSetLabel {
    Receptor,
    Ligand,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T> {
    pub label: PointSetLabel,
    pub points: Vec<Vec3<T>>,
}

impl<T: Real> PointSet<T> {
    pub fn new(label: PointSetLabel, points: Vec<Vec3<T>>) -> Self {
        Self { label, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Receptor followed by ligand, as a complex.
    pub fn complex(receptor: &Self, ligand: &Self) -> Self {
        let mut points = receptor.points.clone();
        points.extend_from_slice(&ligand.points);
        Self::new(PointSetLabel::Complex, points)
    }
}

/// Parses the `PTS1 <N>` point-list format.
pub fn read_pts<T: Real>(text: &str, label: PointSetLabel) -> Result<PointSet<T>> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines.next().unwrap_or("");
    let n: usize = header
        .strip_prefix("PTS1 ")
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n >= 1)
        .ok_or_else(|| MetricError::BadPointList(format!("bad header {header:?}")))?;
    let mut points = Vec::with_capacity(n);
    for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| MetricError::BadPointList(format!("line {}: {line:?}", k + 2)))?;
        if vals.len() != 3 {
            return Err(MetricError::BadPointList(format!("line {} must hold 3 values", k + 2)));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(MetricError::NonFinite);
        }
        points.push([T::lit(vals[0]), T::lit(vals[1]), T::lit(vals[2])]);
    }
    if points.len() != n {
        return Err(MetricError::BadPointList(format!("header declares {n} points, found {}", points.len())));
    }
    Ok(PointSet::new(label, points))
}

pub fn write_pts<T: Real>(p: &PointSet<T>) -> String {
    let mut s = format!("PTS1 {}\n", p.len());
    for q in &p.points {
        s.push_str(&format!("{} {} {}\n", q[0].as_f64(), q[1].as_f64(), q[2].as_f64()));
    }
    s
}

/// Per-target row of a [`MetricReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMetrics {
    pub target_id: String,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub suite: String,
    pub n_targets: usize,
    pub metrics: BTreeMap<String, f64>,
    pub per_target: Vec<TargetMetrics>,
    /// Bookkeeping counts (items, skipped targets, ...).
    #[serde(default)]
    pub counts: BTreeMap<String, usize>,
}

impl MetricReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            n_targets: 0,
            metrics: BTreeMap::new(),
            per_target: Vec::new(),
            counts: BTreeMap::new(),
        }
    }

    /// Checks the range invariants of the named metrics.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let all = self
            .metrics
            .iter()
            .chain(self.per_target.iter().flat_map(|t| t.metrics.iter()));
        for (name, &v) in all {
            let ok = if name.contains("pearson") || name.contains("spearman") || name.contains("kendall") {
                (-1.0..=1.0).contains(&v)
            } else if name.contains("auroc") || name.contains("gdt") {
                (0.0..=1.0).contains(&v)
            } else if name.contains("rmsd") || name.contains("rmse") || name.contains("first_rank_loss") {
                v >= 0.0
            } else {
                v.is_finite()
            };
            if !ok {
                return Err(format!("metric {name} = {v} is out of range"));
            }
        }
        Ok(())
    }
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub fn median<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / T::lit(2.0)
    })
}
