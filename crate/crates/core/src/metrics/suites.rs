//! Benchmark-level aggregation used by the `metrics` command.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    auroc, first_rank_loss, interface_rmsd, mean_and_global, median, pk_from_molar, rmsd, root_mean_squared_error,
    CorrelationKind, MetricError, MetricReport, PointSet, Result, ScoredSet, TargetMetrics,
};
use crate::scalar::Real;

/// Model-quality assessment: mean/global correlations plus first-rank loss.
pub fn mqa_report<T: Real>(sets: &[ScoredSet<T>]) -> Result<MetricReport> {
    if sets.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut sets = sets.to_vec();
    sets.sort_by(|a, b| a.target_id.cmp(&b.target_id));
    let mut report = MetricReport::new("mqa");
    report.n_targets = sets.len();
    report
        .counts
        .insert("n_items".into(), sets.iter().map(|s| s.items.len()).sum());
    for kind in CorrelationKind::ALL {
        let mg = mean_and_global(&sets, kind)?;
        report.metrics.insert(format!("{}_mean", kind.name()), mg.mean.as_f64());
        report.metrics.insert(format!("{}_global", kind.name()), mg.global.as_f64());
        report.counts.insert(format!("{}_skipped", kind.name()), mg.n_skipped);
    }
    report
        .metrics
        .insert("first_rank_loss".into(), first_rank_loss(&sets)?.as_f64());
    for s in &sets {
        let mut m = BTreeMap::new();
        let (p, t) = (s.predicted(), s.truth());
        for kind in CorrelationKind::ALL {
            // degenerate targets are left out of the row, as they are of the mean
            if let Ok(v) = kind.compute(&p, &t) {
                m.insert(kind.name().to_string(), v.as_f64());
            }
        }
        m.insert(
            "first_rank_loss".into(),
            first_rank_loss(std::slice::from_ref(s))?.as_f64(),
        );
        report.per_target.push(TargetMetrics {
            target_id: s.target_id.clone(),
            metrics: m,
        });
    }
    Ok(report)
}

/// One rigid-docking evaluation case; the receptor is shared by truth and prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct DockingCase<T> {
    pub target_id: String,
    pub receptor: PointSet<T>,
    pub true_ligand: PointSet<T>,
    pub pred_ligand: PointSet<T>,
}

/// Complex, ligand and interface RMSD per case, with mean and median over cases.
pub fn docking_report<T: Real>(cases: &[DockingCase<T>]) -> Result<MetricReport> {
    if cases.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut cases = cases.to_vec();
    cases.sort_by(|a, b| a.target_id.cmp(&b.target_id));
    let mut report = MetricReport::new("docking");
    report.n_targets = cases.len();
    let mut columns: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for c in &cases {
        let complex_true = PointSet::complex(&c.receptor, &c.true_ligand);
        let complex_pred = PointSet::complex(&c.receptor, &c.pred_ligand);
        let row = [
            ("complex_rmsd", rmsd(&complex_pred, &complex_true)?),
            ("ligand_rmsd", rmsd(&c.pred_ligand, &c.true_ligand)?),
            ("interface_rmsd", interface_rmsd(&c.receptor, &c.true_ligand, &c.pred_ligand)?),
        ];
        let mut m = BTreeMap::new();
        for (name, v) in row {
            m.insert(name.to_string(), v.as_f64());
            columns.entry(name).or_default().push(v.as_f64());
        }
        report.per_target.push(TargetMetrics {
            target_id: c.target_id.clone(),
            metrics: m,
        });
    }
    for (name, vals) in columns {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        report.metrics.insert(format!("{name}_mean"), mean);
        report
            .metrics
            .insert(format!("{name}_median"), median(&vals).expect("non-empty"));
    }
    Ok(report)
}

/// Protein-protein interaction: AUROC of interaction scores.
pub fn ppi_report<T: Real>(scores: &[T], labels: &[bool]) -> Result<MetricReport> {
    if scores.len() != labels.len() {
        return Err(MetricError::SizeMismatch(scores.len(), labels.len()));
    }
    let mut report = MetricReport::new("ppi");
    report.n_targets = scores.len();
    report.metrics.insert("auroc".into(), auroc(scores, labels)?.as_f64());
    let pos = labels.iter().filter(|&&l| l).count();
    report.counts.insert("n_positive".into(), pos);
    report.counts.insert("n_negative".into(), labels.len() - pos);
    Ok(report)
}

/// Unit of affinities handed to [`lba_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffinityUnit {
    /// Already in pK.
    Pk,
    /// Dissociation constants in molar, converted with −log₁₀.
    Molar,
}

impl std::str::FromStr for AffinityUnit {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pk" => Ok(Self::Pk),
            "molar" | "m" => Ok(Self::Molar),
            other => Err(format!("unknown affinity unit {other:?} (expected pk or molar)")),
        }
    }
}

/// Ligand binding affinity: RMSD of pK plus Pearson, Spearman and Kendall.
pub fn lba_report<T: Real>(pred: &[T], truth: &[T], unit: AffinityUnit) -> Result<MetricReport> {
    let convert = |xs: &[T]| -> Result<Vec<T>> {
        match unit {
            AffinityUnit::Pk => Ok(xs.to_vec()),
            AffinityUnit::Molar => xs.iter().map(|&k| pk_from_molar(k)).collect(),
        }
    };
    let (p, t) = (convert(pred)?, convert(truth)?);
    let mut report = MetricReport::new("lba");
    report.n_targets = p.len();
    report
        .metrics
        .insert("rmsd".into(), root_mean_squared_error(&p, &t)?.as_f64());
    for kind in CorrelationKind::ALL {
        report
            .metrics
            .insert(kind.name().to_string(), kind.compute(&p, &t)?.as_f64());
    }
    Ok(report)
}
