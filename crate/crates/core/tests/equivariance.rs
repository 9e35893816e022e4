mod common;

use common::oracles::{apply, random_points, random_rotation};
use plmgraph::egnn::{EgnnConfig, EgnnModel, Head};
use plmgraph::graphbuild::build_knn_from_points;
use plmgraph::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-6)
}

fn models(in_dim: usize, seed: u64) -> Vec<EgnnModel<f64>> {
    [Head::NodeClass { l_max: 6 }, Head::NodeRegress, Head::GraphRegress]
        .into_iter()
        .map(|head| {
            let cfg = EgnnConfig {
                n_layers: 2,
                hidden_dim: 12,
                update_coords: true,
                seed,
                ..EgnnConfig::new(in_dim, head)
            };
            EgnnModel::init(cfg).unwrap()
        })
        .collect()
}

#[test]
fn rigid_motions_and_reflections() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for case in 0..100 {
        let n = rng.gen_range(5..=50);
        let pts = random_points(&mut rng, n, 15.0);
        let feats = Matrix::from_fn(n, 4, |_, _| rng.gen_range(-1.0..1.0));
        let g = build_knn_from_points(pts.clone(), feats, 10).unwrap();
        let mut r = random_rotation(&mut rng);
        if case % 2 == 1 {
            for row in r.iter_mut() {
                row[0] = -row[0];
            }
        }
        let t = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        let moved = g.with_coords(pts.iter().map(|p| apply(&r, &t, p)).collect());
        for m in models(4, case) {
            let a = m.predict(&g).unwrap();
            let b = m.predict(&moved).unwrap();
            for (x, y) in a.head.iter().zip(&b.head) {
                assert!(rel_close(*x, *y, 1e-5), "case {case}: head {x} vs {y}");
            }
            for (p, q) in a.coords.iter().zip(&b.coords) {
                let expect = apply(&r, &t, p);
                for c in 0..3 {
                    assert!(rel_close(expect[c], q[c], 1e-5), "case {case}: coord {} vs {}", expect[c], q[c]);
                }
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 300);
    assert!(started.elapsed().as_secs() < 30);
}

#[test]
fn node_permutation_permutes_outputs_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 20;
    let pts = random_points(&mut rng, n, 10.0);
    let feats = Matrix::from_fn(n, 4, |_, _| rng.gen_range(-1.0..1.0));
    let mut perm: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
    let g = build_knn_from_points(pts.clone(), feats.clone(), 10).unwrap();
    let gp = build_knn_from_points(perm.iter().map(|&i| pts[i]).collect(), feats.select_rows(&perm), 10).unwrap();
    for m in models(4, 3) {
        let a = m.predict(&g).unwrap();
        let b = m.predict(&gp).unwrap();
        if a.out_dim == 1 && a.rows() == 1 {
            assert_eq!(a.head, b.head);
        } else {
            for (new, &old) in perm.iter().enumerate() {
                assert_eq!(b.row(new), a.row(old));
            }
        }
        for (new, &old) in perm.iter().enumerate() {
            assert_eq!(b.coords[new], a.coords[old]);
        }
    }
}
