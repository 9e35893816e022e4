use super::{MetricError, PointSet, Result};
use crate::linalg::dist2;
use crate::scalar::Real;

/// Interface contact cutoff in Å; pairs strictly closer than this are in contact.
pub const INTERFACE_CUTOFF: f64 = 8.0;

/// RMSD between corresponding points, with no superposition.
pub fn rmsd<T: Real>(a: &PointSet<T>, b: &PointSet<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(MetricError::SizeMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let sq: T = a.points.iter().zip(&b.points).map(|(p, q)| dist2(p, q)).sum();
    Ok((sq / T::from_usize_lossy(a.len())).sqrt())
}

/// RMSE between two scalar series.
pub fn root_mean_squared_error<T: Real>(pred: &[T], truth: &[T]) -> Result<T> {
    if pred.len() != truth.len() {
        return Err(MetricError::SizeMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let sq: T = pred.iter().zip(truth).map(|(&p, &t)| (p - t) * (p - t)).sum();
    Ok((sq / T::from_usize_lossy(pred.len())).sqrt())
}

/// Interface RMSD with the default 8 Å cutoff.
pub fn interface_rmsd<T: Real>(receptor: &PointSet<T>, true_ligand: &PointSet<T>, pred_ligand: &PointSet<T>) -> Result<T> {
    interface_rmsd_with_cutoff(receptor, true_ligand, pred_ligand, T::lit(INTERFACE_CUTOFF))
}

/// RMSD of the predicted ligand over the interface of the true complex.
///
/// The interface is read off the true complex: receptor and ligand points
/// with a cross-partner neighbour closer than `cutoff`. The receptor is held
/// fixed, so only ligand interface points carry deviation and the mean runs
/// over those points.
pub fn interface_rmsd_with_cutoff<T: Real>(
    receptor: &PointSet<T>,
    true_ligand: &PointSet<T>,
    pred_ligand: &PointSet<T>,
    cutoff: T,
) -> Result<T> {
    if true_ligand.len() != pred_ligand.len() {
        return Err(MetricError::SizeMismatch(true_ligand.len(), pred_ligand.len()));
    }
    let c2 = cutoff * cutoff;
    let ligand_interface: Vec<usize> = (0..true_ligand.len())
        .filter(|&k| receptor.points.iter().any(|r| dist2(r, &true_ligand.points[k]) < c2))
        .collect();
    if ligand_interface.is_empty() {
        return Err(MetricError::NoInterface);
    }
    let sq: T = ligand_interface
        .iter()
        .map(|&k| dist2(&true_ligand.points[k], &pred_ligand.points[k]))
        .sum();
    Ok((sq / T::from_usize_lossy(ligand_interface.len())).sqrt())
}
