use std::cmp::Ordering;

use super::correlation::average_ranks;
use super::{MetricError, Result};
use crate::scalar::Real;

/// Area under the ROC curve via the Mann–Whitney rank sum; tied scores count half.
pub fn auroc<T: Real>(scores: &[T], labels: &[bool]) -> Result<T> {
    if scores.len() != labels.len() {
        return Err(MetricError::SizeMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::OneClassOnly);
    }
    let ranks = average_ranks(scores);
    let rank_sum: T = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(&r, _)| r).sum();
    let np = T::from_usize_lossy(n_pos);
    let u = rank_sum - np * (np + T::one()) / T::lit(2.0);
    let auc = u / (np * T::from_usize_lossy(n_neg));
    Ok(auc.max(T::zero()).min(T::one()))
}

/// `pK = −log₁₀ K` for an affinity in molar units.
pub fn pk_from_molar<T: Real>(k: T) -> Result<T> {
    match k.partial_cmp(&T::zero()) {
        Some(Ordering::Greater) if k.is_finite() => Ok(-k.log10()),
        _ => Err(MetricError::NonPositiveAffinity(k.as_f64())),
    }
}
