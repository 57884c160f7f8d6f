use super::{DisparityMap, Grid};

/// Source sampling position for one output coordinate (half-pixel centers).
#[derive(Debug, Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    frac: f64,
}

impl Tap {
    fn nearest(&self) -> usize {
        if self.frac > 0.5 {
            self.hi
        } else {
            self.lo
        }
    }
}

fn taps(n_src: usize, n_dst: usize) -> Vec<Tap> {
    let ratio = n_src as f64 / n_dst as f64;
    (0..n_dst)
        .map(|j| {
            let pos = ((j as f64 + 0.5) * ratio - 0.5).clamp(0.0, (n_src - 1) as f64);
            let lo = pos.floor() as usize;
            Tap {
                lo,
                hi: (lo + 1).min(n_src - 1),
                frac: pos - lo as f64,
            }
        })
        .collect()
}

/// Bilinear resampling of values with nearest-neighbour resampling of the mask.
///
/// Invalid source pixels are excluded from the bilinear support and the
/// remaining weights renormalized. An output pixel is valid exactly when its
/// nearest source pixel is valid, which also guarantees a non-empty support.
pub fn resample_grid(grid: &Grid, target_w: usize, target_h: usize) -> Grid {
    assert!(target_w > 0 && target_h > 0, "target dimensions must be positive");
    let (w, h) = (grid.width(), grid.height());
    let xs = taps(w, target_w);
    let ys = taps(h, target_h);
    let src = grid.values();
    let valid = grid.mask();

    let mut values = Vec::with_capacity(target_w * target_h);
    let mut mask = Vec::with_capacity(target_w * target_h);
    for ty in &ys {
        for tx in &xs {
            if !valid[ty.nearest() * w + tx.nearest()] {
                values.push(0.0);
                mask.push(false);
                continue;
            }
            let support = [
                (ty.lo, tx.lo, (1.0 - ty.frac) * (1.0 - tx.frac)),
                (ty.lo, tx.hi, (1.0 - ty.frac) * tx.frac),
                (ty.hi, tx.lo, ty.frac * (1.0 - tx.frac)),
                (ty.hi, tx.hi, ty.frac * tx.frac),
            ];
            let (mut acc, mut norm) = (0.0, 0.0);
            for (y, x, wt) in support {
                let i = y * w + x;
                if valid[i] {
                    acc += wt * src[i];
                    norm += wt;
                }
            }
            values.push(acc / norm);
            mask.push(true);
        }
    }
    Grid::new(target_w, target_h, values, mask).expect("dimensions are consistent")
}

pub fn resample(map: &DisparityMap, target_w: usize, target_h: usize) -> DisparityMap {
    DisparityMap::new(resample_grid(map.grid(), target_w, target_h))
        .expect("convex combinations of finite values stay finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disp(w: usize, h: usize, v: Vec<f64>) -> DisparityMap {
        DisparityMap::from_values(w, h, v).unwrap()
    }

    /// Direct per-pixel bilinear evaluation with half-pixel centers, all pixels valid.
    fn oracle(src: &[f64], w: usize, h: usize, tw: usize, th: usize) -> Vec<f64> {
        let mut out = vec![];
        for j in 0..th {
            for i in 0..tw {
                let sy = ((j as f64 + 0.5) * h as f64 / th as f64 - 0.5).max(0.0).min((h - 1) as f64);
                let sx = ((i as f64 + 0.5) * w as f64 / tw as f64 - 0.5).max(0.0).min((w - 1) as f64);
                let (y0, x0) = (sy.floor() as usize, sx.floor() as usize);
                let (y1, x1) = ((y0 + 1).min(h - 1), (x0 + 1).min(w - 1));
                let (fy, fx) = (sy - y0 as f64, sx - x0 as f64);
                let top = src[y0 * w + x0] * (1.0 - fx) + src[y0 * w + x1] * fx;
                let bot = src[y1 * w + x0] * (1.0 - fx) + src[y1 * w + x1] * fx;
                out.push(top * (1.0 - fy) + bot * fy);
            }
        }
        out
    }

    #[test]
    fn identity_size_is_unchanged() {
        let m = disp(3, 2, vec![1.0, -2.0, 3.5, 4.0, 0.25, 9.0]);
        assert_eq!(resample(&m, 3, 2), m);
    }

    #[test]
    fn constant_stays_constant() {
        let m = disp(3, 3, vec![0.7; 9]);
        for (tw, th) in [(1, 1), (5, 2), (7, 11)] {
            let r = resample(&m, tw, th);
            assert!(r.grid().values().iter().all(|v| (v - 0.7).abs() < 1e-15));
        }
    }

    #[test]
    fn two_by_two_ramp_matches_oracle() {
        let src = vec![0.0, 1.0, 0.0, 1.0];
        let m = disp(2, 2, src.clone());
        for (tw, th) in [(4, 2), (2, 4)] {
            let r = resample(&m, tw, th);
            let want = oracle(&src, 2, 2, tw, th);
            for (a, b) in r.grid().values().iter().zip(&want) {
                assert!((a - b).abs() < 1e-15, "{a} vs {b}");
            }
        }
        // width 4: centers at -0.25, 0.25, 0.75, 1.25 in source coordinates
        let r = resample(&m, 4, 2);
        assert_eq!(&r.grid().values()[..4], &[0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn matches_oracle_on_larger_maps() {
        let src: Vec<f64> = (0..35).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let m = disp(7, 5, src.clone());
        for (tw, th) in [(13, 9), (3, 2), (7, 10), (14, 5)] {
            let r = resample(&m, tw, th);
            let want = oracle(&src, 7, 5, tw, th);
            for (a, b) in r.grid().values().iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_pixels_do_not_leak() {
        let g = Grid::new(2, 1, vec![1.0, 1000.0], vec![true, false]).unwrap();
        let m = DisparityMap::new(g).unwrap();
        let r = resample(&m, 4, 1);
        assert_eq!(r.grid().mask(), &[true, true, false, false]);
        assert_eq!(&r.grid().values()[..2], &[1.0, 1.0]);
    }

    #[test]
    fn idempotent_at_same_target() {
        let m = disp(5, 4, (0..20).map(|i| (i as f64).sin()).collect());
        let once = resample(&m, 8, 3);
        assert_eq!(resample(&once, 8, 3), once);
    }
}
