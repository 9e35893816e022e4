//! Brute-force reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type P3 = [f64; 3];

pub fn d2(a: &P3, b: &P3) -> f64 {
    (0..3).map(|c| (a[c] - b[c]).powi(2)).sum()
}

/// All (i, j) where j is among the k nearest of i; ties by lower index.
pub fn knn_brute(pts: &[P3], k: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..pts.len() {
        let mut others: Vec<(f64, usize)> = (0..pts.len()).filter(|&j| j != i).map(|j| (d2(&pts[i], &pts[j]), j)).collect();
        others.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut nbrs: Vec<usize> = others.iter().take(k).map(|&(_, j)| j).collect();
        nbrs.sort_unstable();
        edges.extend(nbrs.into_iter().map(|j| (i, j)));
    }
    edges
}

pub fn rball_brute(pts: &[P3], cutoff: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i != j && d2(&pts[i], &pts[j]).sqrt() <= cutoff {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Best global alignment score by enumerating every alignment.
pub fn brute_align_score(a: &[u8], b: &[u8], m: i64, mm: i64, gap: i64) -> i64 {
    if a.is_empty() {
        return gap * b.len() as i64;
    }
    if b.is_empty() {
        return gap * a.len() as i64;
    }
    let diag = if a[0] == b[0] { m } else { mm } + brute_align_score(&a[1..], &b[1..], m, mm, gap);
    let up = gap + brute_align_score(&a[1..], b, m, mm, gap);
    let left = gap + brute_align_score(a, &b[1..], m, mm, gap);
    diag.max(up).max(left)
}

/// Score of an explicit gapped alignment.
pub fn score_of(aligned_a: &str, aligned_b: &str, m: i64, mm: i64, gap: i64) -> i64 {
    aligned_a
        .bytes()
        .zip(aligned_b.bytes())
        .map(|(x, y)| match (x, y) {
            (b'-', _) | (_, b'-') => gap,
            _ if x == y => m,
            _ => mm,
        })
        .sum()
}

/// Tau-b from explicit pair enumeration.
pub fn kendall_pairs(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = (x[i] - x[j]).signum() * f64::from(x[i] != x[j]);
            let dy = (y[i] - y[j]).signum() * f64::from(y[i] != y[j]);
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if dx == dy {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    let n0 = (conc + disc + tx) as f64;
    let n1 = (conc + disc + ty) as f64;
    (conc - disc) as f64 / (n0 * n1).sqrt()
}

/// Fraction of positive-negative pairs ranked correctly, ties worth one half.
pub fn auroc_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut count = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            count += 1.0;
            if scores[i] > scores[j] {
                total += 1.0;
            } else if scores[i] == scores[j] {
                total += 0.5;
            }
        }
    }
    total / count
}

/// Single-pass textbook formula.
pub fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Ranks by counting strictly smaller and equal values.
pub fn ranks_direct(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&u| u < v).count() as f64;
            let eq = x.iter().filter(|&&u| u == v).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect()
}

pub fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    // unit quaternion from four normals (Box-Muller)
    let mut q = [0.0f64; 4];
    for v in q.iter_mut() {
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        *v = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn apply(r: &[[f64; 3]; 3], t: &P3, p: &P3) -> P3 {
    let mut o = *t;
    for i in 0..3 {
        for j in 0..3 {
            o[i] += r[i][j] * p[j];
        }
    }
    o
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<P3> {
    (0..n)
        .map(|_| [rng.gen_range(-scale..scale), rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)])
        .collect()
}

/// Brute-force softmax regression; returns accuracy (fraction) on (x, y).
pub fn softmax_regression_accuracy(train_x: &[Vec<f64>], train_y: &[usize], test_x: &[Vec<f64>], test_y: &[usize], classes: usize, epochs: usize, lr: f64) -> f64 {
    let d = train_x[0].len();
    let mut w = vec![vec![0.0; d]; classes];
    let mut b = vec![0.0; classes];
    for _ in 0..epochs {
        for (x, &y) in train_x.iter().zip(train_y) {
            let z: Vec<f64> = (0..classes).map(|c| b[c] + w[c].iter().zip(x).map(|(a, v)| a * v).sum::<f64>()).collect();
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
            let s: f64 = e.iter().sum();
            for c in 0..classes {
                let g = e[c] / s - f64::from(c == y);
                b[c] -= lr * g;
                for k in 0..d {
                    w[c][k] -= lr * g * x[k];
                }
            }
        }
    }
    let correct = test_x
        .iter()
        .zip(test_y)
        .filter(|(x, &y)| {
            let z: Vec<f64> = (0..classes).map(|c| b[c] + w[c].iter().zip(x.iter()).map(|(a, v)| a * v).sum::<f64>()).collect();
            let best = (0..classes).fold(0, |bi, c| if z[c] > z[bi] { c } else { bi });
            best == y
        })
        .count();
    correct as f64 / test_x.len() as f64
}
