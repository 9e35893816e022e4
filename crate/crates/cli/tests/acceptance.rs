//! Acceptance gate: one line per criterion, non-zero exit if any fails.

#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use oracles::{apply, auroc_pairs, kendall_pairs, knn_brute, pearson_direct, random_points, random_rotation, ranks_direct, rball_brute};
use plmgraph::egnn::{EgnnConfig, EgnnModel, Head, OutputGrad};
use plmgraph::embedio::{read_pre, write_pre, EmbeddingMatrix, PositionalKind};
use plmgraph::graphbuild::{
    attach_features, build_fc_from_points, build_knn_from_points, build_rball_from_points, FusionMode, ResidueGraph,
};
use plmgraph::linalg::Matrix;
use plmgraph::metrics::{
    auroc, first_rank_loss, gdt_ts, kabsch_superpose, kendall, pearson, pk_from_molar, spearman, PointSet, PointSetLabel,
    ScoredSet,
};
use plmgraph::seqalign::{align_global, restrict_embedding, Scoring};
use plmgraph::structio::Sequence;
use plmgraph::trainer::{
    synth_dataset, train, with_positional_features, GraphSpec, TaskKind, ToyTask, TrainConfig, DEFAULT_L_MAX, TOY_EPOCHS,
    TOY_HIDDEN, TOY_LAYERS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(started: Instant, limit_s: f64) -> Result<f64, String> {
    let s = started.elapsed().as_secs_f64();
    ensure(s < limit_s, || format!("took {s:.1}s, limit {limit_s}s"))?;
    Ok(s)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-6)
}

fn equivariance() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..100u64 {
        let n = rng.gen_range(5..=50);
        let pts = random_points(&mut rng, n, 15.0);
        let feats = Matrix::from_fn(n, 4, |_, _| rng.gen_range(-1.0..1.0));
        let g = build_knn_from_points(pts.clone(), feats, 10).map_err(|e| e.to_string())?;
        let mut r = random_rotation(&mut rng);
        if case % 2 == 1 {
            r.iter_mut().for_each(|row| row[0] = -row[0]);
        }
        let t = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        let moved = g.with_coords(pts.iter().map(|p| apply(&r, &t, p)).collect());
        for head in [Head::NodeClass { l_max: 6 }, Head::NodeRegress, Head::GraphRegress] {
            let cfg = EgnnConfig {
                n_layers: 2,
                hidden_dim: 12,
                update_coords: true,
                seed: case,
                ..EgnnConfig::new(4, head)
            };
            let m = EgnnModel::<f64>::init(cfg).map_err(|e| e.to_string())?;
            let a = m.predict(&g).map_err(|e| e.to_string())?;
            let b = m.predict(&moved).map_err(|e| e.to_string())?;
            for (x, y) in a.head.iter().zip(&b.head) {
                ensure(rel_close(*x, *y, 1e-5), || format!("case {case}: scalar output {x} vs {y}"))?;
                worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1e-6));
            }
            for (p, q) in a.coords.iter().zip(&b.coords) {
                let e = apply(&r, &t, p);
                for c in 0..3 {
                    ensure(rel_close(e[c], q[c], 1e-5), || format!("case {case}: coordinate {} vs {}", e[c], q[c]))?;
                }
            }
        }
    }
    let s = within(t0, 30.0)?;
    Ok(format!("100 graphs x 3 heads, half reflected; worst scalar rel err {worst:.1e}; {s:.1}s"))
}

fn gradient_oracle() -> Outcome {
    let t0 = Instant::now();
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    let mut blocks = 0;
    for seed in 0..5u64 {
        for head in [Head::NodeClass { l_max: 5 }, Head::NodeRegress, Head::GraphRegress] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 31 + 7);
            let pts = random_points(&mut rng, 8, 4.0);
            let feats = Matrix::from_fn(8, 5, |_, _| rng.gen_range(-1.0..1.0));
            let g = build_knn_from_points(pts, feats, 4).map_err(|e| e.to_string())?;
            let cfg = EgnnConfig {
                n_layers: 2,
                hidden_dim: 6,
                update_coords: true,
                seed,
                ..EgnnConfig::new(5, head)
            };
            let mut model = EgnnModel::<f64>::init(cfg).map_err(|e| e.to_string())?;
            for b in model.param_blocks_mut() {
                b.iter_mut().for_each(|v| *v += rng.gen_range(-0.1..0.1));
            }
            let rows = if matches!(head, Head::GraphRegress) { 1 } else { 8 };
            let wh: Vec<f64> = (0..rows * head.out_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let wc: Vec<[f64; 3]> = (0..8).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let loss = |m: &EgnnModel<f64>| -> f64 {
                let o = m.predict(&g).expect("forward");
                o.head.iter().zip(&wh).map(|(a, b)| a * b).sum::<f64>()
                    + o.coords.iter().zip(&wc).map(|(x, w)| x[0] * w[0] + x[1] * w[1] + x[2] * w[2]).sum::<f64>()
            };
            let (_, mut trace) = model.forward(&g).map_err(|e| e.to_string())?;
            let grad = model
                .backward(&mut trace, &OutputGrad { head: wh.clone(), coords: Some(wc.clone()) })
                .map_err(|e| e.to_string())?;
            let analytic: Vec<(String, Vec<f64>)> = grad.param_blocks().into_iter().map(|(n, b)| (n, b.to_vec())).collect();
            for (bi, (name, an)) in analytic.iter().enumerate() {
                let mut num = vec![0.0; an.len()];
                for k in 0..an.len() {
                    let mut p = model.clone();
                    p.param_blocks_mut()[bi][k] += step;
                    let mut q = model.clone();
                    q.param_blocks_mut()[bi][k] -= step;
                    num[k] = (loss(&p) - loss(&q)) / (2.0 * step);
                }
                let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let diff: Vec<f64> = an.iter().zip(&num).map(|(a, b)| a - b).collect();
                let scale = norm(an).max(norm(&num));
                let rel = if scale < 1e-12 { norm(&diff) } else { norm(&diff) / scale };
                ensure(rel < 1e-4, || format!("{head:?} block {name}: relative error {rel:.2e}"))?;
                worst = worst.max(rel);
                blocks += 1;
            }
        }
    }
    let s = within(t0, 120.0)?;
    Ok(format!("{blocks} blocks over 5 graphs x 3 heads; worst rel err {worst:.1e}; {s:.1}s"))
}

fn toy_run(kind: TaskKind, positional: bool, shuffled: bool, seed: u64) -> Result<plmgraph::trainer::RunReport, String> {
    let graphs = synth_dataset::<f64>(50, 100, seed, GraphSpec::default()).map_err(|e| e.to_string())?;
    let graphs = if positional {
        with_positional_features(&graphs, PositionalKind::OnehotIndex, 100).map_err(|e| e.to_string())?
    } else {
        graphs
    };
    let mut task = ToyTask::new(kind, graphs, DEFAULT_L_MAX);
    if shuffled {
        task = task.with_shuffled_labels(seed.wrapping_add(1));
    }
    let head = match kind {
        TaskKind::Apr => Head::NodeClass { l_max: DEFAULT_L_MAX },
        TaskKind::Rpe => Head::NodeRegress,
    };
    let mc = EgnnConfig {
        n_layers: TOY_LAYERS,
        hidden_dim: TOY_HIDDEN,
        seed,
        ..EgnnConfig::new(task.graphs[0].feat_dim(), head)
    };
    let tc = TrainConfig {
        epochs: TOY_EPOCHS,
        seed,
        ..TrainConfig::default()
    };
    let (report, _) = train(&task, mc, &tc).map_err(|e| e.to_string())?;
    ensure((report.n_train, report.n_val, report.n_test) == (40, 5, 5), || "split is not 40/5/5".into())?;
    Ok(report)
}

fn toy_experiment() -> Outcome {
    let t0 = Instant::now();
    let seed = 0;
    let apr_geo = toy_run(TaskKind::Apr, false, false, seed)?;
    let apr_pos = toy_run(TaskKind::Apr, true, false, seed)?;
    let rpe_geo = toy_run(TaskKind::Rpe, false, false, seed)?;
    let rpe_pos = toy_run(TaskKind::Rpe, true, false, seed)?;
    let control = toy_run(TaskKind::Apr, false, true, seed)?;
    let ratio = rpe_geo.test_metric / rpe_geo.test_baseline;
    let detail = format!(
        "APR geometric {:.1}% (chance {:.1}%), positional {:.1}%; RPE geometric RMSE {:.2} = {:.2}x label std, positional {:.2}; shuffled-label control {:.1}%",
        apr_geo.test_metric, apr_geo.test_baseline, apr_pos.test_metric, rpe_geo.test_metric, ratio, rpe_pos.test_metric, control.test_metric
    );
    ensure(apr_geo.test_metric <= 3.0, || format!("geometric APR above 3%: {detail}"))?;
    ensure(apr_pos.test_metric >= 95.0, || format!("positional APR below 95%: {detail}"))?;
    ensure(ratio >= 0.8, || format!("geometric RPE beats 0.8x label std: {detail}"))?;
    ensure(rpe_pos.test_metric <= 2.0, || format!("positional RPE above 2.0: {detail}"))?;
    ensure(control.test_metric <= 300.0 / control.mean_chain_length, || format!("control above 3/N: {detail}"))?;
    let s = within(t0, 900.0)?;
    Ok(format!("{detail}; {s:.0}s"))
}

fn graph_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut edges = 0;
    for case in 0..100 {
        let n = rng.gen_range(2..=200);
        let pts: Vec<[f64; 3]> = if case % 4 == 0 {
            (0..n).map(|_| [rng.gen_range(0..6) as f64, rng.gen_range(0..6) as f64, rng.gen_range(0..6) as f64]).collect()
        } else {
            random_points(&mut rng, n, 20.0)
        };
        let knn = build_knn_from_points(pts.clone(), Matrix::zeros(n, 1), 10).map_err(|e| e.to_string())?;
        ensure(knn.edges == knn_brute(&pts, 10), || format!("case {case}: KNN edge set differs"))?;
        ensure(knn.neighbors().iter().all(|nb| nb.len() == 10.min(n - 1)), || format!("case {case}: out-degree"))?;
        let cutoff = if case % 4 == 0 { 2.0 } else { rng.gen_range(1.0..12.0) };
        let rb = build_rball_from_points(pts.clone(), Matrix::zeros(n, 1), cutoff).map_err(|e| e.to_string())?;
        ensure(rb.edges == rball_brute(&pts, cutoff), || format!("case {case}: r-ball edge set differs"))?;
        edges += knn.m() + rb.m();
    }
    let s = within(t0, 30.0)?;
    Ok(format!("100 clouds, {edges} edges identical to brute force; {s:.1}s"))
}

fn metric_oracles() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    let var = |v: &[f64]| v.iter().any(|&x| x != v[0]);
    let mut n_kendall = 0;
    while n_kendall < 2000 {
        let n = rng.gen_range(2..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..5) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..5) as f64).collect();
        if !var(&x) || !var(&y) {
            continue;
        }
        worst = worst.max((kendall(&x, &y).map_err(|e| e.to_string())? - kendall_pairs(&x, &y)).abs());
        n_kendall += 1;
    }
    for _ in 0..300 {
        let n = rng.gen_range(2..=200);
        let s: Vec<f64> = (0..n).map(|_| (rng.gen_range(0.0..1.0f64) * 20.0).round()).collect();
        let mut l: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        l[0] = true;
        l[1] = false;
        worst = worst.max((auroc(&s, &l).map_err(|e| e.to_string())? - auroc_pairs(&s, &l)).abs());
    }
    for _ in 0..300 {
        let n = rng.gen_range(3..=60);
        let x: Vec<f64> = (0..n).map(|_| (rng.gen_range(-5.0..5.0f64) * 4.0).round()).collect();
        let y: Vec<f64> = (0..n).map(|_| (rng.gen_range(-5.0..5.0f64) * 4.0).round()).collect();
        if !var(&x) || !var(&y) {
            continue;
        }
        worst = worst.max((pearson(&x, &y).map_err(|e| e.to_string())? - pearson_direct(&x, &y)).abs());
        let sr = pearson_direct(&ranks_direct(&x), &ranks_direct(&y));
        worst = worst.max((spearman(&x, &y).map_err(|e| e.to_string())? - sr).abs());
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:e}"))?;
    let t = ScoredSet { target_id: "t".into(), items: vec![(0.1, 0.9), (0.2, 0.7)] };
    let frl: f64 = first_rank_loss(&[t]).map_err(|e| e.to_string())?;
    ensure((frl - 0.2).abs() < 1e-12, || format!("first_rank_loss {frl}"))?;
    let a: f64 = auroc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).map_err(|e| e.to_string())?;
    ensure((a - 0.75).abs() < 1e-12, || format!("auroc example {a}"))?;
    let pk: f64 = pk_from_molar(1e-9).map_err(|e| e.to_string())?;
    ensure((pk - 9.0).abs() < 1e-12, || format!("pK {pk}"))?;
    let s = within(t0, 10.0)?;
    Ok(format!("max |delta| {worst:.1e}; first_rank_loss 0.2, auroc 0.75, pK 9.0; {s:.2}s"))
}

fn kabsch_gdt() -> Outcome {
    let t0 = Instant::now();
    let set = |p: Vec<[f64; 3]>| PointSet::new(PointSetLabel::Complex, p);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(3..50);
        let a = random_points(&mut rng, n, 10.0);
        let r = random_rotation(&mut rng);
        let t = [rng.gen_range(-9.0..9.0), rng.gen_range(-9.0..9.0), rng.gen_range(-9.0..9.0)];
        let b: Vec<_> = a.iter().map(|p| apply(&r, &t, p)).collect();
        let sp = kabsch_superpose(&set(a), &set(b)).map_err(|e| e.to_string())?;
        worst = worst.max(sp.rmsd_after);
    }
    ensure(worst < 1e-8, || format!("rigid copy rmsd_after {worst:e}"))?;
    let chiral = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]];
    let mirror: Vec<_> = chiral.iter().map(|p| [-p[0], p[1], p[2]]).collect();
    let m = kabsch_superpose(&set(chiral.clone()), &set(mirror)).map_err(|e| e.to_string())?;
    ensure(m.rmsd_after > 1e-3, || format!("mirror superposed to {}", m.rmsd_after))?;
    let same: f64 = gdt_ts(&set(chiral.clone()), &set(chiral)).map_err(|e| e.to_string())?;
    ensure(same == 1.0, || format!("gdt of identical structures {same}"))?;
    let reference = vec![[6.0, 0.0, 0.0], [0.0, 6.0, 0.0], [-6.0, 0.0, 0.0], [0.0, -6.0, 0.0]];
    let model = vec![[6.0, 0.0, 3.0], [0.0, 6.0, -3.0], [-6.0, 0.0, 3.0], [0.0, -6.0, -3.0]];
    let half: f64 = gdt_ts(&set(model), &set(reference)).map_err(|e| e.to_string())?;
    ensure((half - 0.5).abs() < 1e-12, || format!("3 A construction gdt {half}"))?;
    let s = within(t0, 10.0)?;
    Ok(format!("rigid rmsd_after <= {worst:.1e}; mirror {:.3}; gdt 1.0 and 0.5; {s:.2}s", m.rmsd_after))
}

fn brute_score(a: &[u8], b: &[u8]) -> i64 {
    if a.is_empty() || b.is_empty() {
        return -((a.len() + b.len()) as i64);
    }
    let d = if a[0] == b[0] { 1 } else { -1 } + brute_score(&a[1..], &b[1..]);
    d.max(brute_score(&a[1..], b) - 1).max(brute_score(a, &b[1..]) - 1)
}

fn fusion_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..500 {
        let n = rng.gen_range(2..12);
        let base = rng.gen_range(1..8);
        let d = if case % 3 == 0 { base } else { rng.gen_range(1..8) };
        let pts = random_points(&mut rng, n, 10.0);
        let g: ResidueGraph<f64> = build_fc_from_points(pts, Matrix::from_fn(n, base, |r, c| (r * c) as f64)).map_err(|e| e.to_string())?;
        let e = Matrix::from_fn(n, d, |_, _| rng.gen_range(-1.0..1.0));
        let dims = |m: FusionMode| attach_features(&g, &e, m).map(|x| x.feat_dim()).ok();
        ensure(dims(FusionMode::Replace) == Some(d), || format!("case {case}: replace"))?;
        ensure(dims(FusionMode::Concat) == Some(base + d), || format!("case {case}: concat"))?;
        ensure(dims(FusionMode::Sum) == (base == d).then_some(d), || format!("case {case}: sum"))?;
    }
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (n, d) = (rng.gen_range(1..30), rng.gen_range(1..40));
        let m = Matrix::from_fn(n, d, |_, _| rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-30..30)));
        let e = EmbeddingMatrix::new(m, "acceptance").map_err(|e| e.to_string())?;
        let back = read_pre::<f64>(&write_pre(&e)).map_err(|e| e.to_string())?;
        for (a, b) in e.data().as_slice().iter().zip(back.data().as_slice()) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst < 1e-12, || format!("PRE round-trip error {worst:e}"))?;
    let mut aligned = 0;
    for _ in 0..500 {
        let s = |rng: &mut ChaCha8Rng| -> String { (0..rng.gen_range(1..=6)).map(|_| ['A', 'C', 'G'][rng.gen_range(0..3)]).collect() };
        let (a, b) = (s(&mut rng), s(&mut rng));
        let al = align_global(&Sequence { id: "a".into(), residues: a.clone() }, &Sequence { id: "b".into(), residues: b.clone() }, Scoring::default())
            .map_err(|e| e.to_string())?;
        ensure(al.score == brute_score(a.as_bytes(), b.as_bytes()), || format!("{a}/{b}: score {}", al.score))?;
        let e = EmbeddingMatrix::new(Matrix::from_fn(a.len(), 2, |r, c| (r * 2 + c) as f64), "t").map_err(|e| e.to_string())?;
        let r = restrict_embedding(&e, &al).map_err(|e| e.to_string())?;
        let ok = r.n_rows() == al.index_map.len() && al.index_map.iter().enumerate().all(|(i, &(src, _))| r.data().row(i) == e.data().row(src));
        ensure(ok, || format!("{a}/{b}: restricted rows differ from index_map"))?;
        aligned += 1;
    }
    Ok(format!("500 fusion cases; PRE round-trip max err {worst:.1e}; {aligned} brute-force-verified alignments"))
}

fn plmgraph(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_plmgraph"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("plmgraph {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn strip_wall_clock(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"wall_clock_seconds\"")).collect::<Vec<_>>().join("\n")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).display().to_string();
    let s = plmgraph::trainer::synth_chain(40, 3).map_err(|e| e.to_string())?;
    std::fs::write(p("s.pdb"), plmgraph::structio::write_ca_pdb(&s)).map_err(|e| e.to_string())?;
    let emb = EmbeddingMatrix::new(Matrix::from_fn(40, 8, |r, c| ((r * 8 + c) as f64).sin()), "acceptance").map_err(|e| e.to_string())?;
    std::fs::write(p("e.pre"), write_pre(&emb)).map_err(|e| e.to_string())?;
    std::fs::write(p("ppi.csv"), "score,label\n0.1,0\n0.4,0\n0.35,1\n0.8,1\n").map_err(|e| e.to_string())?;

    let runs: Vec<(&str, Vec<String>)> = vec![
        ("graph", vec!["graph".into(), p("s.pdb"), "--mode".into(), "knn".into()]),
        ("fuse", vec!["fuse".into(), "--graph".into(), p("g.json"), "--pre".into(), p("e.pre"), "--mode".into(), "concat".into()]),
        ("toytask", vec!["toytask".into(), "--task".into(), "rpe".into(), "--features".into(), "positional".into(), "--synthetic".into(), "12x30".into(), "--epochs".into(), "2".into(), "--seed".into(), "5".into()]),
        ("metrics", vec!["metrics".into(), "--suite".into(), "ppi".into(), "--input".into(), p("ppi.csv")]),
    ];
    plmgraph(&["graph", &p("s.pdb"), "--out", &p("g.json")])?;
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = p(&format!("{name}-{rep}.json"));
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            a.extend(["--out", &out]);
            plmgraph(&a)?;
            let report = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
            let manifest = std::fs::read_to_string(format!("{out}.manifest.json")).map_err(|e| e.to_string())?;
            outputs.push((strip_wall_clock(&report), manifest.replace(&format!("-{rep}.json"), "")));
        }
        ensure(outputs[0] == outputs[1], || format!("{name}: repeated runs differ"))?;
    }
    ensure(Path::new(&p("g.json.manifest.json")).exists(), || "graph wrote no manifest".into())?;
    Ok("graph, fuse, toytask and metrics reports byte-identical across repeats (wall clock excluded)".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("equivariance suite", equivariance),
        ("gradient oracle", gradient_oracle),
        ("toy-experiment finding", toy_experiment),
        ("graph-construction oracle", graph_oracle),
        ("metric oracles", metric_oracles),
        ("kabsch / gdt", kabsch_gdt),
        ("fusion contract", fusion_contract),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
