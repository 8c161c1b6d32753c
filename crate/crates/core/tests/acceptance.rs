//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero when any criterion fails.
//!
//! Reference values are computed by independent brute-force oracles written
//! here, not by the library code under test.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mots_core::association::max_similarity_matching;
use mots_core::fusion::{fusion_weights, warp, EmbeddingProjector, FeatureGrid, FlowField};
use mots_core::geometry::BinaryMask;
use mots_core::io::{parse_str, rle_decode, rle_encode, write_str};
use mots_core::losses::{triplet_track_loss, TripletBatch};
use mots_core::metrics::{evaluate, AnnotatedObject, ClassCounts, FrameAnnotations};
use mots_core::pipeline::{cost_ratio, run_sequence, BoxStrategy, CostModel, PipelineParams};
use mots_core::synth::{
    perturb, Degradation, PerturbationModel, RandomSceneOptions, Scene, SceneSpec, SyntheticSource,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        // bound first so a NaN comparison counts as a failure
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

/// Runs `f` for every seed on scoped threads, preserving seed order.
fn par_seeds<T: Send>(seeds: &[u64], f: impl Fn(u64) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get()).min(seeds.len().max(1));
    let chunks: Vec<&[u64]> = seeds.chunks(seeds.len().div_ceil(workers).max(1)).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| s.spawn(|| chunk.iter().map(|&seed| f(seed)).collect::<Vec<T>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

// ---------------------------------------------------------------------------
// 1. perfect input

fn perfect_input() -> Outcome {
    let mut slowest: f64 = 0.0;
    for seed in 0..10u64 {
        let spec = SceneSpec::random(seed, 20, 4, &RandomSceneOptions::default()).map_err(|e| e.to_string())?;
        let mut src = SyntheticSource::new(spec, PerturbationModel::default(), seed).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let out = run_sequence(&mut src, PipelineParams::default()).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        let scores = out.scores.ok_or("no scores")?;
        for (class, counts) in scores.per_class.iter().chain([(&0, &scores.combined())]) {
            let s = counts.summary().map_err(|e| e.to_string())?;
            ensure!(
                s.smotsa == 1.0 && s.motsa == 1.0 && s.motsp == 1.0 && s.ids == 0,
                "seed {seed} class {class}: sMOTSA {} MOTSA {} MOTSP {} IDS {}",
                s.smotsa,
                s.motsa,
                s.motsp,
                s.ids
            );
        }
        ensure!(secs < 2.0, "seed {seed} took {secs:.3} s");
    }
    Ok(format!("10 seeds x 20 frames x 4 objects all exact 1.0 / IDS 0; slowest run {slowest:.3} s"))
}

// ---------------------------------------------------------------------------
// 2. metrics against a brute-force evaluator

#[derive(Debug, Default, Clone, Copy, PartialEq)]
struct OracleCounts {
    gt: u64,
    tp: u64,
    soft: f64,
    fp: u64,
    fn_: u64,
    ids: u64,
}

fn raster(m: &BinaryMask) -> Vec<bool> {
    m.to_row_major()
}

fn oracle_iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn oracle_evaluate(gt: &[FrameAnnotations], pred: &[FrameAnnotations]) -> BTreeMap<u32, OracleCounts> {
    let mut frames: Vec<u32> = gt.iter().chain(pred).map(|f| f.frame).collect();
    frames.sort();
    frames.dedup();
    let mut out: BTreeMap<u32, OracleCounts> = BTreeMap::new();
    let mut last: HashMap<(u32, u32), u32> = HashMap::new();
    for f in frames {
        let g: Vec<&AnnotatedObject> = gt.iter().filter(|a| a.frame == f).flat_map(|a| &a.objects).collect();
        let p: Vec<&AnnotatedObject> = pred.iter().filter(|a| a.frame == f).flat_map(|a| &a.objects).collect();
        let g_r: Vec<Vec<bool>> = g.iter().map(|o| raster(&o.mask)).collect();
        let p_r: Vec<Vec<bool>> = p.iter().map(|o| raster(&o.mask)).collect();
        let mut used = vec![false; p.len()];
        for (i, go) in g.iter().enumerate() {
            let c = out.entry(go.class_id).or_default();
            c.gt += 1;
            let hit = (0..p.len()).find(|&j| p[j].class_id == go.class_id && oracle_iou(&g_r[i], &p_r[j]) > 0.5);
            match hit {
                Some(j) => {
                    used[j] = true;
                    c.tp += 1;
                    c.soft += oracle_iou(&g_r[i], &p_r[j]);
                    let key = (go.class_id, go.object_id);
                    if let Some(prev) = last.get(&key) {
                        if *prev != p[j].object_id {
                            c.ids += 1;
                        }
                    }
                    last.insert(key, p[j].object_id);
                }
                None => c.fn_ += 1,
            }
        }
        for (j, po) in p.iter().enumerate() {
            if !used[j] {
                out.entry(po.class_id).or_default().fp += 1;
            }
        }
    }
    out
}

/// Disjoint random rectangles on a small canvas with persistent ids.
fn random_sequence(rng: &mut ChaCha8Rng) -> (Vec<FrameAnnotations>, Vec<FrameAnnotations>) {
    let (h, w) = (10u32, 12u32);
    let frames = rng.random_range(1..=10u32);
    let n_obj = rng.random_range(1..=5u32);
    let classes: Vec<u32> = (0..n_obj).map(|_| rng.random_range(1..=2)).collect();
    let mut pred_of: Vec<u32> = (0..n_obj).map(|k| 100 + k).collect();
    let mut next_pred = 200;
    let (mut gt, mut pred) = (Vec::new(), Vec::new());
    for t in 0..frames {
        let mut occupied = vec![false; (h * w) as usize];
        let mut p_occupied = vec![false; (h * w) as usize];
        let mut g_objs = Vec::new();
        let mut p_objs = Vec::new();
        for k in 0..n_obj {
            if rng.random_bool(0.15) {
                continue;
            }
            let (rh, rw) = (rng.random_range(1..=4u32), rng.random_range(1..=4u32));
            let (r0, c0) = (rng.random_range(0..=h - rh), rng.random_range(0..=w - rw));
            let inside = |r: u32, c: u32| (r0..r0 + rh).contains(&r) && (c0..c0 + rw).contains(&c);
            if (0..h).any(|r| (0..w).any(|c| inside(r, c) && occupied[(r * w + c) as usize])) {
                continue;
            }
            (0..h).for_each(|r| (0..w).filter(|&c| inside(r, c)).for_each(|c| occupied[(r * w + c) as usize] = true));
            let mask = BinaryMask::from_fn(h, w, inside);
            g_objs.push(AnnotatedObject { object_id: k + 1, class_id: classes[k as usize], mask: mask.clone() });

            if rng.random_bool(0.2) {
                continue;
            }
            if rng.random_bool(0.15) {
                pred_of[k as usize] = next_pred;
                next_pred += 1;
            }
            // grow or shrink by a random pixel set so IoU varies around 0.5
            let noisy = BinaryMask::from_fn(h, w, |r, c| {
                let near = r + 1 >= r0 && r <= r0 + rh && c + 1 >= c0 && c <= c0 + rw;
                let keep = if inside(r, c) { rng.random_bool(0.8) } else { near && rng.random_bool(0.2) };
                keep && !p_occupied[(r * w + c) as usize]
            });
            if noisy.is_empty() {
                continue;
            }
            noisy.to_row_major().iter().enumerate().filter(|(_, v)| **v).for_each(|(i, _)| p_occupied[i] = true);
            let class_id = if rng.random_bool(0.1) { 3 - classes[k as usize] } else { classes[k as usize] };
            p_objs.push(AnnotatedObject { object_id: pred_of[k as usize], class_id, mask: noisy });
        }
        if rng.random_bool(0.3) {
            let (r, c) = (rng.random_range(0..h), rng.random_range(0..w));
            if !p_occupied[(r * w + c) as usize] {
                let mask = BinaryMask::from_fn(h, w, |rr, cc| rr == r && cc == c);
                p_objs.push(AnnotatedObject { object_id: 999, class_id: rng.random_range(1..=2), mask });
            }
        }
        gt.push(FrameAnnotations::new(t, g_objs));
        if !rng.random_bool(0.1) {
            pred.push(FrameAnnotations::new(t, p_objs));
        }
    }
    (gt, pred)
}

fn score_example() -> Result<(), String> {
    // five objects over two frames: 8 matches at IoU 0.9, 2 misses, 1 spurious mask, 1 switch
    let (h, w) = (20u32, 20u32);
    let bar = |k: u32, len: u32| BinaryMask::from_fn(h, w, move |r, c| r == 2 * k && c < len);
    let mut gt = Vec::new();
    let mut pred = Vec::new();
    for t in 0..2u32 {
        gt.push(FrameAnnotations::new(
            t,
            (0..5).map(|k| AnnotatedObject { object_id: k + 1, class_id: 1, mask: bar(k, 10) }).collect(),
        ));
        let mut p: Vec<AnnotatedObject> = (0..4)
            .map(|k| AnnotatedObject {
                object_id: if t == 1 && k == 0 { 50 } else { 10 + k },
                class_id: 1,
                mask: bar(k, 9),
            })
            .collect();
        if t == 0 {
            p.push(AnnotatedObject {
                object_id: 77,
                class_id: 1,
                mask: BinaryMask::from_fn(h, w, |r, c| r == 15 && c < 3),
            });
        }
        pred.push(FrameAnnotations::new(t, p));
    }
    let scores = evaluate(&gt, &pred).map_err(|e| e.to_string())?;
    let c = scores.class(1).ok_or("no class 1")?;
    let expect = ClassCounts { gt_masks: 10, tp: 8, soft_tp: c.soft_tp, fp: 1, fn_: 2, ids: 1 };
    ensure!(*c == expect, "counts {c:?}");
    let (motsa, motsp, smotsa) = (c.motsa().unwrap(), c.motsp().0, c.smotsa().unwrap());
    ensure!(
        (motsa - 0.6).abs() < 1e-12 && (motsp - 0.9).abs() < 1e-12 && (smotsa - 0.52).abs() < 1e-12,
        "MOTSA {motsa} MOTSP {motsp} sMOTSA {smotsa}"
    );
    Ok(())
}

fn metric_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3e7a1);
    let mut checked_scores = 0;
    let mut switches = 0;
    for case in 0..100 {
        let (gt, pred) = random_sequence(&mut rng);
        let oracle = oracle_evaluate(&gt, &pred);
        let has_gt = oracle.values().any(|c| c.gt > 0);
        let scores = match evaluate(&gt, &pred) {
            Ok(s) => s,
            Err(e) if !has_gt => {
                ensure!(e.to_string().contains("undefined"), "case {case}: {e}");
                continue;
            }
            Err(e) => return Err(format!("case {case}: {e}")),
        };
        for (class, o) in &oracle {
            let c = scores.class(*class).copied().unwrap_or_default();
            ensure!(
                (c.gt_masks, c.tp, c.fp, c.fn_, c.ids) == (o.gt, o.tp, o.fp, o.fn_, o.ids),
                "case {case} class {class}: counts {c:?} vs oracle {o:?}"
            );
            ensure!((c.soft_tp - o.soft).abs() < 1e-12, "case {case}: soft TP {} vs {}", c.soft_tp, o.soft);
            switches += o.ids;
            if o.gt > 0 {
                let m = o.gt as f64;
                let motsa = (o.tp as f64 - o.fp as f64 - o.ids as f64) / m;
                let smotsa = (o.soft - o.fp as f64 - o.ids as f64) / m;
                ensure!((c.motsa().unwrap() - motsa).abs() < 1e-12, "case {case}: MOTSA");
                ensure!((c.smotsa().unwrap() - smotsa).abs() < 1e-12, "case {case}: sMOTSA");
                if o.tp > 0 {
                    ensure!((c.motsp().0 - o.soft / o.tp as f64).abs() < 1e-12, "case {case}: MOTSP");
                }
                checked_scores += 1;
            }
        }
        ensure!(scores.per_class.len() == oracle.len(), "case {case}: class sets differ");
    }
    score_example()?;
    Ok(format!(
        "100 random sequences agree with brute force ({checked_scores} class score sets, {switches} switches); 0.6 / 0.9 / 0.52 example exact to 1e-12"
    ))
}

// ---------------------------------------------------------------------------
// 3. assignment optimality

fn best_by_enumeration(sim: &[Vec<f64>]) -> f64 {
    let (r, c) = (sim.len(), sim[0].len());
    fn go(sim: &[Vec<f64>], row: usize, used: &mut Vec<bool>, transposed: bool) -> f64 {
        let rows = if transposed { sim[0].len() } else { sim.len() };
        if row == rows {
            return 0.0;
        }
        let cols = if transposed { sim.len() } else { sim[0].len() };
        let mut best = f64::NEG_INFINITY;
        for col in 0..cols {
            if used[col] {
                continue;
            }
            used[col] = true;
            let v = if transposed { sim[col][row] } else { sim[row][col] };
            best = best.max(v + go(sim, row + 1, used, transposed));
            used[col] = false;
        }
        best
    }
    // enumerate injections from the smaller side
    if r <= c {
        go(sim, 0, &mut vec![false; c], false)
    } else {
        go(sim, 0, &mut vec![false; r], true)
    }
}

fn assignment_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa551);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let r = rng.random_range(1..=6);
        let c = rng.random_range(1..=6);
        let coarse = case % 4 == 0;
        let sim: Vec<Vec<f64>> = (0..r)
            .map(|_| {
                (0..c)
                    .map(|_| if coarse { rng.random_range(-2..=2) as f64 / 2.0 } else { rng.random_range(-1.0..1.0) })
                    .collect()
            })
            .collect();
        let m = max_similarity_matching(&sim);
        ensure!(m.len() == r.min(c), "case {case}: {} pairs for {r}x{c}", m.len());
        let mut rows: Vec<usize> = m.iter().map(|p| p.0).collect();
        let mut cols: Vec<usize> = m.iter().map(|p| p.1).collect();
        rows.sort();
        cols.sort();
        rows.dedup();
        cols.dedup();
        ensure!(rows.len() == m.len() && cols.len() == m.len(), "case {case}: not a matching");
        let total: f64 = m.iter().map(|&(i, j)| sim[i][j]).sum();
        let best = best_by_enumeration(&sim);
        worst = worst.max((best - total).abs());
        ensure!((best - total).abs() < 1e-9, "case {case}: {total} vs optimum {best}");
    }
    Ok(format!("500 matrices up to 6x6 reach the enumerated optimum (max gap {worst:.1e})"))
}

// ---------------------------------------------------------------------------
// 4. triplet objective

fn oracle_cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Mean over valid anchors of the worst hinge over every (positive, negative) pair.
fn oracle_triplet(vectors: &[Vec<f64>], ids: &[u64], margin: f64) -> Option<f64> {
    let n = vectors.len();
    let (mut total, mut anchors) = (0.0, 0);
    for a in 0..n {
        let mut worst: Option<f64> = None;
        for p in (0..n).filter(|&p| p != a && ids[p] == ids[a]) {
            for q in (0..n).filter(|&q| ids[q] != ids[a]) {
                let v = (margin + (oracle_cos(&vectors[a], &vectors[q]) - oracle_cos(&vectors[a], &vectors[p]))).max(0.0);
                worst = Some(worst.map_or(v, |w: f64| w.max(v)));
            }
        }
        if let Some(w) = worst {
            total += w;
            anchors += 1;
        }
    }
    (anchors > 0).then(|| total / anchors as f64)
}

fn triplet_objective() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7219);
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.random_range(2..=8);
        let dim = rng.random_range(2..=6);
        let vectors: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let ids: Vec<u64> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let margin = rng.random_range(0.0..0.5);
        let batch = TripletBatch::new(vectors.clone(), ids.clone(), margin).map_err(|e| e.to_string())?;
        match (triplet_track_loss(&batch), oracle_triplet(&vectors, &ids, margin)) {
            (Ok(v), Some(o)) => {
                worst = worst.max((v - o).abs());
                ensure!((v - o).abs() < 1e-12, "case {case}: {v} vs {o}");
                compared += 1;
            }
            (Err(_), None) => {}
            (got, want) => return Err(format!("case {case}: {got:?} vs oracle {want:?}")),
        }
    }
    let same = TripletBatch::new(vec![vec![0.3, -0.7, 0.2]; 6], vec![1, 1, 2, 2, 3, 3], 0.2).map_err(|e| e.to_string())?;
    let v = triplet_track_loss(&same).map_err(|e| e.to_string())?;
    ensure!(v == 0.2, "identical vectors give {v}, expected exactly the margin 0.2");
    Ok(format!("{compared} random batches within {worst:.1e} of enumeration; identical vectors give exactly m = 0.2"))
}

// ---------------------------------------------------------------------------
// 5. warping and fusion weights

fn oracle_warp(feat: &FeatureGrid, dx: &[f64], dy: &[f64]) -> Vec<f64> {
    let (c, h, w) = (feat.channels(), feat.height(), feat.width());
    let at = |ch: usize, y: i64, x: i64| -> f64 {
        if y < 0 || x < 0 || y >= h as i64 || x >= w as i64 {
            0.0
        } else {
            feat.get(ch, y as usize, x as usize)
        }
    };
    let mut out = vec![0.0; c * h * w];
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                let sx = x as f64 + dx[y * w + x];
                let sy = y as f64 + dy[y * w + x];
                let (x0, y0) = (sx.floor(), sy.floor());
                let (fx, fy) = (sx - x0, sy - y0);
                let (x0, y0) = (x0 as i64, y0 as i64);
                out[(ch * h + y) * w + x] = (1.0 - fy) * ((1.0 - fx) * at(ch, y0, x0) + fx * at(ch, y0, x0 + 1))
                    + fy * ((1.0 - fx) * at(ch, y0 + 1, x0) + fx * at(ch, y0 + 1, x0 + 1));
            }
        }
    }
    out
}

fn warp_and_weights() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3a7b);
    let mut worst_warp: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for case in 0..100 {
        let c = rng.random_range(1..=4);
        let feat = FeatureGrid::from_fn(c, 8, 8, |_, _, _| rng.random_range(-2.0..2.0));
        let dx: Vec<f64> = (0..64).map(|_| rng.random_range(-3.0..3.0)).collect();
        let dy: Vec<f64> = (0..64).map(|_| rng.random_range(-3.0..3.0)).collect();
        let flow = FlowField::from_vecs(8, 8, dx.clone(), dy.clone()).map_err(|e| e.to_string())?;
        let got = warp(&feat, &flow).map_err(|e| e.to_string())?;
        let want = oracle_warp(&feat, &dx, &dy);
        let err = got.as_slice().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_warp = worst_warp.max(err);
        ensure!(err < 1e-9, "case {case}: warp error {err}");

        let identity = warp(&feat, &FlowField::zeros(8, 8)).map_err(|e| e.to_string())?;
        ensure!(identity == feat, "case {case}: zero-flow warp is not the identity");

        let k = rng.random_range(1..=5);
        let warped: Vec<FeatureGrid> =
            (0..k).map(|_| FeatureGrid::from_fn(c, 8, 8, |_, _, _| rng.random_range(-2.0..2.0))).collect();
        let proj = EmbeddingProjector::seeded(c, 6, case).map_err(|e| e.to_string())?;
        let weights = fusion_weights(&warped, &feat, &proj).map_err(|e| e.to_string())?;
        for p in 0..64 {
            let s: f64 = weights.iter().map(|wm| wm[p]).sum();
            worst_sum = worst_sum.max((s - 1.0).abs());
            ensure!((s - 1.0).abs() < 1e-9, "case {case} pixel {p}: weights sum to {s}");
        }
    }
    Ok(format!(
        "100 random 8x8 grids: warp within {worst_warp:.1e} of bilinear oracle, weights sum to 1 within {worst_sum:.1e}, zero flow exact"
    ))
}

// ---------------------------------------------------------------------------
// 6. box source ablation

fn mean_ids(strategy: BoxStrategy, seeds: &[u64], model: PerturbationModel) -> Result<f64, String> {
    let results = par_seeds(seeds, |seed| -> Result<u64, String> {
        let spec = SceneSpec::random(seed, 20, 4, &RandomSceneOptions::default()).map_err(|e| e.to_string())?;
        let mut src = SyntheticSource::new(spec, model, seed).map_err(|e| e.to_string())?;
        let params = PipelineParams { box_strategy: strategy, ..PipelineParams::default() };
        let out = run_sequence(&mut src, params).map_err(|e| e.to_string())?;
        Ok(out.scores.ok_or("no scores")?.combined().ids)
    });
    let total: u64 = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().sum();
    Ok(total as f64 / seeds.len() as f64)
}

fn box_source_ablation() -> Outcome {
    let seeds: Vec<u64> = (0..20).collect();
    let model = PerturbationModel { box_jitter: 8.0, embedding_noise: 0.05, ..Default::default() };
    let adaptive = mean_ids(BoxStrategy::Adaptive, &seeds, model)?;
    let fixed = mean_ids(BoxStrategy::Fixed { alpha: 0.5 }, &seeds, model)?;
    let detection = mean_ids(BoxStrategy::Detection, &seeds, model)?;
    let line = format!(
        "mean IDS over seeds 0..19 (box jitter 8 px, identity noise 0.05): adaptive {adaptive:.2} <= fixed 0.5 {fixed:.2} <= detection box {detection:.2} (gaps {:.2}, {:.2})",
        fixed - adaptive,
        detection - fixed
    );
    ensure!(adaptive <= fixed && fixed <= detection, "{line}");
    Ok(line)
}

// ---------------------------------------------------------------------------
// 7. temporal range sweep

fn temporal_range_sweep() -> Outcome {
    let seeds: Vec<u64> = (0..20).collect();
    let opts = RandomSceneOptions {
        feature_noise: 0.3,
        degradation: Degradation { rate: 0.05, frames: 4, strength: 0.9 },
        ..RandomSceneOptions::default()
    };
    let model = PerturbationModel { flow_noise: 1.5, ..Default::default() };
    let ranges = [2usize, 4, 8, 12, 16];
    let mut means = Vec::new();
    for &n in &ranges {
        let results = par_seeds(&seeds, |seed| -> Result<f64, String> {
            let spec = SceneSpec::random(seed, 30, 4, &opts).map_err(|e| e.to_string())?;
            let mut src = SyntheticSource::new(spec, model, seed).map_err(|e| e.to_string())?;
            let mut params = PipelineParams::default();
            params.fusion.temporal_range = n;
            let out = run_sequence(&mut src, params).map_err(|e| e.to_string())?;
            out.scores.ok_or("no scores")?.combined().smotsa().map_err(|e| e.to_string())
        });
        let v = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        means.push(v.iter().sum::<f64>() / v.len() as f64);
    }
    let best = (0..ranges.len()).max_by(|&a, &b| means[a].total_cmp(&means[b])).expect("non-empty");
    let table: Vec<String> = ranges.iter().zip(&means).map(|(n, m)| format!("n={n}: {m:.4}")).collect();
    let line = format!("mean sMOTSA over seeds 0..19 [{}], best n={}", table.join(", "), ranges[best]);
    ensure!(best != 0 && best != ranges.len() - 1, "{line}");
    Ok(line)
}

// ---------------------------------------------------------------------------
// 8. cost ratio

fn cost_check() -> Outcome {
    let worked = CostModel {
        backbone: 100.0,
        flow: 5.0,
        classification: 1.0,
        box_regression: 1.0,
        mask: 1.0,
        tracking: 1.0,
        conv3d: 20.0,
        temporal_range: 8,
        baseline_range: 8,
    };
    let r = cost_ratio(&worked).map_err(|e| e.to_string())?;
    ensure!((r - 140.0 / 260.0).abs() < 1e-12, "worked example gives {r}");
    let mut rng = ChaCha8Rng::seed_from_u64(0xc057);
    for case in 0..1000 {
        let n = rng.random_range(1..=32);
        let conv3d = rng.random_range(0.01..100.0);
        let model = CostModel {
            backbone: rng.random_range(0.01..1000.0),
            flow: conv3d * rng.random_range(0.01..0.999),
            classification: rng.random_range(0.01..10.0),
            box_regression: rng.random_range(0.01..10.0),
            mask: rng.random_range(0.01..10.0),
            tracking: rng.random_range(0.01..10.0),
            conv3d,
            temporal_range: n,
            baseline_range: n,
        };
        let r = cost_ratio(&model).map_err(|e| e.to_string())?;
        ensure!(r < 1.0, "case {case}: ratio {r} for {model:?}");
        ensure!(model.exact_ratio() < 1.0, "case {case}: exact ratio {}", model.exact_ratio());
    }
    Ok(format!("worked example {r:.12} = 140/260; ratio < 1 on 1000 random models with equal ranges and cheaper flow"))
}

// ---------------------------------------------------------------------------
// 9. format fidelity

fn format_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf0e7);
    for case in 0..1000 {
        let h = rng.random_range(1..=32);
        let w = rng.random_range(1..=32);
        let density = rng.random_range(0.0..1.0);
        let blocky = rng.random_bool(0.5);
        let mask = if blocky {
            let (r0, c0) = (rng.random_range(0..h), rng.random_range(0..w));
            let (r1, c1) = (rng.random_range(r0..=h), rng.random_range(c0..=w));
            BinaryMask::from_fn(h, w, |r, c| (r0..r1).contains(&r) && (c0..c1).contains(&c))
        } else {
            BinaryMask::from_fn(h, w, |_, _| rng.random_bool(density))
        };
        let s = rle_encode(&mask);
        let back = rle_decode(&s, h, w).map_err(|e| e.to_string())?;
        ensure!(back == mask, "case {case}: {h}x{w} mask changed through {s:?}");
    }
    let zeros = BinaryMask::from_fn(2, 2, |_, _| false);
    let ones = BinaryMask::from_fn(2, 2, |_, _| true);
    ensure!(rle_encode(&zeros) == "4", "all-zero 2x2 encodes as {:?}", rle_encode(&zeros));
    ensure!(rle_encode(&ones) == "04", "all-one 2x2 encodes as {:?}", rle_encode(&ones));

    let mut exports = 0;
    for seed in 0..5u64 {
        let spec = SceneSpec::random(seed, 12, 4, &RandomSceneOptions::default()).map_err(|e| e.to_string())?;
        let scene = Scene::new(spec).map_err(|e| e.to_string())?;
        let gt: Vec<FrameAnnotations> = (0..12).map(|t| scene.annotations(t)).collect();
        let noisy = PerturbationModel { box_jitter: 2.0, mask_radius: 1, miss_prob: 0.2, false_positive_rate: 0.5, ..Default::default() };
        let dets: Vec<FrameAnnotations> = gt
            .iter()
            .map(|f| {
                let objects = perturb(f, &noisy, seed)
                    .expect("valid model")
                    .into_iter()
                    .enumerate()
                    .map(|(j, d)| AnnotatedObject { object_id: d.class_id * 1000 + j as u32 + 1, class_id: d.class_id, mask: d.mask })
                    .collect();
                FrameAnnotations::new(f.frame, objects)
            })
            .collect();
        for frames in [&gt, &dets] {
            let text = write_str(frames).map_err(|e| e.to_string())?;
            let again = write_str(&parse_str(&text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure!(text == again, "seed {seed}: write(parse(write(x))) differs from write(x)");
            exports += 1;
        }
    }
    Ok(format!("1000 random masks round-trip; \"4\" and \"04\" match; {exports} synthetic exports are byte-level fixed points"))
}

// ---------------------------------------------------------------------------
// 10. injected id switches

fn injected_switches() -> Outcome {
    let spec = SceneSpec::random(11, 20, 4, &RandomSceneOptions::default()).map_err(|e| e.to_string())?;
    let scene = Scene::new(spec).map_err(|e| e.to_string())?;
    let gt: Vec<FrameAnnotations> = (0..20).map(|t| scene.annotations(t)).collect();
    // (frame, object) pairs whose object was also visible in the previous frame
    let mut candidates: Vec<(u32, u32)> = Vec::new();
    for t in 1..20usize {
        for o in &gt[t].objects {
            if gt[t - 1].objects.iter().any(|p| p.object_id == o.object_id) {
                candidates.push((t as u32, o.object_id));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d5);
    let mut seen = Vec::new();
    for k in 1..=5u64 {
        // k relabel events, each renaming one object's predictions from its frame onward
        let mut events = Vec::new();
        while events.len() < k as usize {
            let e = candidates[rng.random_range(0..candidates.len())];
            if !events.contains(&e) {
                events.push(e);
            }
        }
        // each event bumps the object's predicted id from its frame onward
        let mut pred = gt.clone();
        for f in pred.iter_mut() {
            let frame = f.frame;
            for o in f.objects.iter_mut() {
                let bumps = events.iter().filter(|&&(from, id)| id == o.object_id && from <= frame).count() as u32;
                o.object_id += 100 * bumps;
            }
        }
        let scores = evaluate(&gt, &pred).map_err(|e| e.to_string())?;
        let ids = scores.combined().ids;
        ensure!(ids == k, "{k} injected switches at {events:?} counted as {ids}");
        seen.push(ids.to_string());
    }
    Ok(format!("k = 1..5 injected switches counted as {}", seen.join(", ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("perfect-input tracking", perfect_input),
        ("metrics vs brute-force evaluator", metric_correctness),
        ("assignment optimality", assignment_optimality),
        ("triplet objective vs enumeration", triplet_objective),
        ("warp and fusion-weight properties", warp_and_weights),
        ("box source ablation ordering", box_source_ablation),
        ("temporal range interior optimum", temporal_range_sweep),
        ("fusion cost ratio", cost_check),
        ("format fidelity", format_fidelity),
        ("injected id switches", injected_switches),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
