use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{MetricError, Result, ScoredSet};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Pearson,
    Spearman,
    Kendall,
}

impl CorrelationKind {
    pub const ALL: [CorrelationKind; 3] = [Self::Spearman, Self::Pearson, Self::Kendall];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Pearson => "pearson",
            Self::Spearman => "spearman",
            Self::Kendall => "kendall",
        }
    }

    pub fn compute<T: Real>(&self, xs: &[T], ys: &[T]) -> Result<T> {
        match self {
            Self::Pearson => pearson(xs, ys),
            Self::Spearman => spearman(xs, ys),
            Self::Kendall => kendall(xs, ys),
        }
    }
}

fn check_pair<T: Real>(xs: &[T], ys: &[T]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(MetricError::SizeMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricError::DegenerateVariance(format!("need at least 2 items, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    for (v, name) in [(xs, "first"), (ys, "second")] {
        if v.iter().all(|&a| a == v[0]) {
            return Err(MetricError::DegenerateVariance(format!("{name} argument is constant")));
        }
    }
    Ok(())
}

#[inline]
fn cmp<T: Real>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Product-moment correlation.
pub fn pearson<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    check_pair(xs, ys)?;
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(MetricError::DegenerateVariance("zero variance".into()));
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// 1-based fractional ranks; tied values share the average of their ranks.
pub fn average_ranks<T: Real>(xs: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| cmp(&xs[a], &xs[b]));
    let mut ranks = vec![T::zero(); xs.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && xs[idx[end]] == xs[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = T::from_usize_lossy(start + 1 + end) / T::lit(2.0);
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of average-tie ranks.
pub fn spearman<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    check_pair(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Counts inversions of `v` while merge-sorting it.
fn count_inversions<T: Real>(v: &mut [T], buf: &mut Vec<T>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = count_inversions(&mut v[..mid], buf) + count_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

fn tie_pairs<T: Real>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as u64;
        total += t * (t - 1) / 2;
        start = end;
    }
    total
}

/// Kendall's tau-b, O(n log n) (Knight's algorithm).
pub fn kendall<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    check_pair(xs, ys)?;
    let n = xs.len() as u64;
    let mut pairs: Vec<(T, T)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| cmp(&a.0, &b.0).then(cmp(&a.1, &b.1)));

    let n0 = n * (n - 1) / 2;
    let xs_sorted: Vec<T> = pairs.iter().map(|p| p.0).collect();
    let n1 = tie_pairs(&xs_sorted);
    // joint ties
    let mut n3 = 0u64;
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end] == pairs[start] {
            end += 1;
        }
        let t = (end - start) as u64;
        n3 += t * (t - 1) / 2;
        start = end;
    }
    let mut ys_seq: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(ys_seq.len());
    let swaps = count_inversions(&mut ys_seq, &mut buf);
    let n2 = tie_pairs(&ys_seq);

    if n0 == n1 || n0 == n2 {
        return Err(MetricError::DegenerateVariance("all pairs tied".into()));
    }
    let num = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    let den = ((n0 - n1) as f64).sqrt() * ((n0 - n2) as f64).sqrt();
    Ok(T::lit((num / den).clamp(-1.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanGlobal<T> {
    /// Unweighted mean of per-target correlations over non-degenerate targets.
    pub mean: T,
    /// Correlation over all items pooled.
    pub global: T,
    pub n_used: usize,
    pub n_skipped: usize,
}

/// Per-target mean and pooled ("global") correlation.
pub fn mean_and_global<T: Real>(sets: &[ScoredSet<T>], which: CorrelationKind) -> Result<MeanGlobal<T>> {
    if sets.iter().all(|s| s.items.is_empty()) {
        return Err(MetricError::EmptyInput);
    }
    let mut sum = T::zero();
    let mut n_used = 0;
    let mut n_skipped = 0;
    for s in sets {
        match which.compute(&s.predicted(), &s.truth()) {
            Ok(r) => {
                sum += r;
                n_used += 1;
            }
            Err(MetricError::DegenerateVariance(_)) => n_skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let pooled_p: Vec<T> = sets.iter().flat_map(|s| s.predicted()).collect();
    let pooled_t: Vec<T> = sets.iter().flat_map(|s| s.truth()).collect();
    let global = which.compute(&pooled_p, &pooled_t)?;
    if n_used == 0 {
        return Err(MetricError::DegenerateVariance("every target is degenerate".into()));
    }
    Ok(MeanGlobal {
        mean: sum / T::from_usize_lossy(n_used),
        global,
        n_used,
        n_skipped,
    })
}

/// Loss of one target: best true score minus the true score of the top-predicted item.
pub fn target_first_rank_loss<T: Real>(set: &ScoredSet<T>) -> Result<T> {
    let first = set.items.first().ok_or(MetricError::EmptyInput)?;
    let mut best_true = first.1;
    let mut top = *first;
    for &(p, t) in &set.items[1..] {
        if t > best_true {
            best_true = t;
        }
        // strict: earlier items win prediction ties
        if p > top.0 {
            top = (p, t);
        }
    }
    Ok(best_true - top.1)
}

/// Mean of per-target first-rank losses.
pub fn first_rank_loss<T: Real>(sets: &[ScoredSet<T>]) -> Result<T> {
    if sets.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut sum = T::zero();
    for s in sets {
        sum += target_first_rank_loss(s)?;
    }
    Ok(sum / T::from_usize_lossy(sets.len()))
}
