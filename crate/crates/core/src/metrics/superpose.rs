use super::{MetricError, PointSet, Result};
use crate::linalg::{add3, centroid, dist, mat3_vec, sub3, symmetric_eigen, Mat3, Vec3};
use crate::scalar::Real;

/// Distance cutoffs (Å) averaged by GDT-TS.
pub const GDT_THRESHOLDS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Rigid transform `b ≈ R·a + t` plus the RMSD it leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superposition<T> {
    /// Proper rotation (determinant +1), row-major.
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
    pub rmsd_after: T,
}

impl<T: Real> Superposition<T> {
    pub fn apply(&self, p: &Vec3<T>) -> Vec3<T> {
        add3(&mat3_vec(&self.rotation, p), &self.translation)
    }
}

fn check_spread<T: Real>(centered: &[Vec3<T>], which: &str) -> Result<()> {
    let mut cov = [[T::zero(); 3]; 3];
    for p in centered {
        for r in 0..3 {
            for c in 0..3 {
                cov[r][c] += p[r] * p[c];
            }
        }
    }
    let (vals, _) = symmetric_eigen(cov);
    if vals[0] <= T::zero() || vals[1] <= vals[0] * T::epsilon() * T::lit(1e4) {
        return Err(MetricError::Degenerate(format!("{which} points are collinear or coincident")));
    }
    Ok(())
}

fn quaternion_to_matrix<T: Real>(q: [T; 4]) -> Mat3<T> {
    let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let [w, x, y, z] = q.map(|v| v / norm);
    let two = T::lit(2.0);
    [
        [w * w + x * x - y * y - z * z, two * (x * y - w * z), two * (x * z + w * y)],
        [two * (x * y + w * z), w * w - x * x + y * y - z * z, two * (y * z - w * x)],
        [two * (x * z - w * y), two * (y * z + w * x), w * w - x * x - y * y + z * z],
    ]
}

/// Least-squares proper rotation and translation taking `a` onto `b`.
///
/// Solved with the quaternion eigenproblem, which never yields a reflection.
pub fn kabsch_superpose<T: Real>(a: &PointSet<T>, b: &PointSet<T>) -> Result<Superposition<T>> {
    if a.len() != b.len() {
        return Err(MetricError::SizeMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(MetricError::Degenerate(format!("need at least 3 points, got {}", a.len())));
    }
    if a.points.iter().chain(&b.points).flatten().any(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let ca = centroid(&a.points);
    let cb = centroid(&b.points);
    let pa: Vec<Vec3<T>> = a.points.iter().map(|p| sub3(p, &ca)).collect();
    let pb: Vec<Vec3<T>> = b.points.iter().map(|p| sub3(p, &cb)).collect();
    check_spread(&pa, "first")?;
    check_spread(&pb, "second")?;

    let mut s = [[T::zero(); 3]; 3];
    for (p, q) in pa.iter().zip(&pb) {
        for r in 0..3 {
            for c in 0..3 {
                s[r][c] += p[r] * q[c];
            }
        }
    }
    let (sxx, sxy, sxz) = (s[0][0], s[0][1], s[0][2]);
    let (syx, syy, syz) = (s[1][0], s[1][1], s[1][2]);
    let (szx, szy, szz) = (s[2][0], s[2][1], s[2][2]);
    let n = [
        [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
        [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
        [szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy],
        [sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz],
    ];
    let (_, vecs) = symmetric_eigen(n);
    let q = [vecs[0][0], vecs[1][0], vecs[2][0], vecs[3][0]];
    let rotation = quaternion_to_matrix(q);
    let translation = sub3(&cb, &mat3_vec(&rotation, &ca));
    let mut sup = Superposition {
        rotation,
        translation,
        rmsd_after: T::zero(),
    };
    let mut sq = T::zero();
    for (p, q) in a.points.iter().zip(&b.points) {
        let d = dist(&sup.apply(p), q);
        sq += d * d;
    }
    sup.rmsd_after = (sq / T::from_usize_lossy(a.len())).sqrt();
    Ok(sup)
}

/// GDT-TS after a single optimal superposition of `model` onto `reference`.
pub fn gdt_ts<T: Real>(model: &PointSet<T>, reference: &PointSet<T>) -> Result<T> {
    let sup = kabsch_superpose(model, reference)?;
    let dists: Vec<T> = model
        .points
        .iter()
        .zip(&reference.points)
        .map(|(p, q)| dist(&sup.apply(p), q))
        .collect();
    let n = T::from_usize_lossy(dists.len());
    let mut total = T::zero();
    for thr in GDT_THRESHOLDS {
        let thr = T::lit(thr);
        let within = dists.iter().filter(|&&d| d <= thr).count();
        total += T::from_usize_lossy(within) / n;
    }
    Ok(total / T::from_usize_lossy(GDT_THRESHOLDS.len()))
}
