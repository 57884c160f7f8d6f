use depthzoo::align::{apply_alignment, solve_alignment, AlignmentParams};
use depthzoo::{DisparityMap, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 8;

fn random_pair(rng: &mut ChaCha8Rng) -> (DisparityMap, DisparityMap) {
    let s: f64 = rng.gen_range(-3.0..3.0);
    let t: f64 = rng.gen_range(-1.0..1.0);
    let mut pv = Vec::with_capacity(N * N);
    let mut gv = Vec::with_capacity(N * N);
    let mut pm = Vec::with_capacity(N * N);
    let mut gm = Vec::with_capacity(N * N);
    for _ in 0..N * N {
        let p: f64 = rng.gen_range(0.05..2.0);
        pv.push(p);
        gv.push(s * p + t + rng.gen_range(-0.2..0.2));
        pm.push(rng.gen_bool(0.9));
        gm.push(rng.gen_bool(0.85));
    }
    (
        DisparityMap::new(Grid::new(N, N, pv, pm).unwrap()).unwrap(),
        DisparityMap::new(Grid::new(N, N, gv, gm).unwrap()).unwrap(),
    )
}

fn valid_pairs(pred: &DisparityMap, gt: &DisparityMap) -> Vec<(f64, f64)> {
    let (p, g) = (pred.grid(), gt.grid());
    let mut out = Vec::new();
    for y in 0..N {
        for x in 0..N {
            if let (Some(a), Some(b)) = (p.get(x, y), g.get(x, y)) {
                out.push((a, b));
            }
        }
    }
    out
}

fn loss(pairs: &[(f64, f64)], s: f64, t: f64) -> f64 {
    pairs.iter().map(|&(p, g)| (s * p + t - g).powi(2)).sum()
}

/// Best shift for a fixed scale, found by golden-section search.
fn best_t(pairs: &[(f64, f64)], s: f64) -> (f64, f64) {
    golden(|t| loss(pairs, s, t), -50.0, 50.0)
}

fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..90 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Coarse grid over the scale, then nested golden-section refinement around the best cell.
fn oracle(pairs: &[(f64, f64)]) -> (f64, f64) {
    let steps = 100;
    let (lo, hi) = (-20.0, 20.0);
    let h = (hi - lo) / steps as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=steps {
        let s = lo + i as f64 * h;
        let (_, l) = best_t(pairs, s);
        if l < best.0 {
            best = (l, s);
        }
    }
    let (s, _) = golden(|s| best_t(pairs, s).1, best.1 - 2.0 * h, best.1 + 2.0 * h);
    (s, best_t(pairs, s).0)
}

#[test]
fn closed_form_matches_search_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..200 {
        let (pred, gt) = random_pair(&mut rng);
        let pairs = valid_pairs(&pred, &gt);
        let fit = solve_alignment(&pred, &gt, false).unwrap();
        let (s, t) = oracle(&pairs);
        assert!((fit.scale - s).abs() < 1e-6, "case {case}: scale {} vs {s}", fit.scale);
        assert!((fit.shift - t).abs() < 1e-6, "case {case}: shift {} vs {t}", fit.shift);
    }
}

#[test]
fn aligned_output_is_affine_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let (pred, gt) = random_pair(&mut rng);
        let a: f64 = rng.gen_range(0.2..5.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        let base = apply_alignment(&pred, solve_alignment(&pred, &gt, false).unwrap());

        // transforming the prediction leaves the aligned output unchanged
        let moved = apply_alignment(&pred, AlignmentParams { scale: a, shift: b });
        let out = apply_alignment(&moved, solve_alignment(&moved, &gt, false).unwrap());
        // transforming the target transforms the output the same way
        let gt2 = apply_alignment(&gt, AlignmentParams { scale: a, shift: b });
        let out2 = apply_alignment(&pred, solve_alignment(&pred, &gt2, false).unwrap());

        for i in 0..N * N {
            if !pred.grid().mask()[i] {
                continue;
            }
            let v = base.grid().values()[i];
            assert!((out.grid().values()[i] - v).abs() < 1e-9);
            assert!((out2.grid().values()[i] - (a * v + b)).abs() < 1e-9);
        }
    }
}

#[test]
fn clamped_fit_never_has_negative_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (pred, gt) = random_pair(&mut rng);
        let p = solve_alignment(&pred, &gt, true).unwrap();
        assert!(p.scale >= 0.0);
    }
}
