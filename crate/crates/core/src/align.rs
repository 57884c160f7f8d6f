//! Least-squares scale and shift alignment in disparity space.

use thiserror::Error;

use crate::depthio::{DepthMap, DisparityMap, Grid};

pub const DEFAULT_EPS: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("prediction and ground truth differ in size: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
    #[error("need at least 2 jointly valid pixels, found {0}")]
    InsufficientPixels(usize),
    #[error("prediction is constant over the valid pixels; normal equations are singular")]
    DegenerateSystem,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentParams {
    pub scale: f64,
    pub shift: f64,
}

impl AlignmentParams {
    pub const IDENTITY: AlignmentParams = AlignmentParams { scale: 1.0, shift: 0.0 };
}

pub(crate) fn joint_pairs<'a>(a: &'a Grid, b: &'a Grid) -> impl Iterator<Item = (f64, f64)> + 'a {
    a.values()
        .iter()
        .zip(a.mask())
        .zip(b.values().iter().zip(b.mask()))
        .filter(|((_, &ma), (_, &mb))| ma && mb)
        .map(|((&va, _), (&vb, _))| (va, vb))
}

pub(crate) fn check_same_size(a: &Grid, b: &Grid) -> Result<(), AlignError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(AlignError::SizeMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

/// Mean of ground truth over jointly valid pixels; the fit when scale is pinned to zero.
pub fn masked_gt_mean(pred: &DisparityMap, gt: &DisparityMap) -> Option<f64> {
    let gts: Vec<f64> = joint_pairs(pred.grid(), gt.grid()).map(|(_, g)| g).collect();
    (!gts.is_empty()).then(|| crate::metrics::pairwise_sum(&gts) / gts.len() as f64)
}

/// Solves `min_{s,t} sum (s * pred + t - gt)^2` over jointly valid pixels.
///
/// The 2x2 normal equations are solved in centered form, which gives the same
/// minimizer with better conditioning. With `clamp_scale`, a negative scale
/// is replaced by the best constant fit `(0, mean(gt))`.
pub fn solve_alignment(pred: &DisparityMap, gt: &DisparityMap, clamp_scale: bool) -> Result<AlignmentParams, AlignError> {
    check_same_size(pred.grid(), gt.grid())?;
    let pairs: Vec<(f64, f64)> = joint_pairs(pred.grid(), gt.grid()).collect();
    let n = pairs.len();
    if n < 2 {
        return Err(AlignError::InsufficientPixels(n));
    }
    let nf = n as f64;
    let ps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let gs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let p_mean = crate::metrics::pairwise_sum(&ps) / nf;
    let g_mean = crate::metrics::pairwise_sum(&gs) / nf;

    let dp: Vec<f64> = ps.iter().map(|p| p - p_mean).collect();
    let sxx = crate::metrics::pairwise_sum(&dp.iter().map(|d| d * d).collect::<Vec<_>>());
    let sxy = crate::metrics::pairwise_sum(&dp.iter().zip(&gs).map(|(d, g)| d * (g - g_mean)).collect::<Vec<_>>());

    let max_abs = ps.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    if sxx <= nf * f64::EPSILON * max_abs * max_abs || sxx == 0.0 {
        return Err(AlignError::DegenerateSystem);
    }

    let scale = sxy / sxx;
    if clamp_scale && scale < 0.0 {
        return Ok(AlignmentParams {
            scale: 0.0,
            shift: g_mean,
        });
    }
    Ok(AlignmentParams {
        scale,
        shift: g_mean - scale * p_mean,
    })
}

pub fn apply_alignment(pred: &DisparityMap, p: AlignmentParams) -> DisparityMap {
    DisparityMap::new(pred.grid().map_valid(|v| Some(p.scale * v + p.shift))).expect("affine map of finite values is finite")
}

/// `depth = min(1 / max(d, eps), cap)`. The mask is carried over unchanged.
pub fn disparity_to_depth(d: &DisparityMap, cap: f64, eps: f64) -> DepthMap {
    assert!(cap > 0.0 && eps > 0.0, "cap and eps must be positive");
    DepthMap::new(d.grid().map_valid(|v| Some((1.0 / v.max(eps)).min(cap)))).expect("capped reciprocal is positive")
}

/// Sum of squared residuals of `s * pred + t` against `gt` over jointly valid pixels.
pub fn residual(pred: &DisparityMap, gt: &DisparityMap, p: AlignmentParams) -> f64 {
    let r: Vec<f64> = joint_pairs(pred.grid(), gt.grid())
        .map(|(a, b)| {
            let e = p.scale * a + p.shift - b;
            e * e
        })
        .collect();
    crate::metrics::pairwise_sum(&r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disp(v: Vec<f64>) -> DisparityMap {
        let n = v.len();
        DisparityMap::from_values(n, 1, v).unwrap()
    }

    #[test]
    fn identity_fit() {
        let g = disp(vec![0.1, 0.5, 0.2, 0.9]);
        let p = solve_alignment(&g, &g, false).unwrap();
        assert!((p.scale - 1.0).abs() < 1e-14 && p.shift.abs() < 1e-14);
    }

    #[test]
    fn exact_affine_inverse() {
        let gt = disp(vec![0.1, 0.5, 0.2, 0.9, 1.3]);
        let pred = disp(gt.grid().values().iter().map(|g| 2.0 * g + 3.0).collect());
        let p = solve_alignment(&pred, &gt, false).unwrap();
        assert!((p.scale - 0.5).abs() < 1e-12);
        assert!((p.shift + 1.5).abs() < 1e-12);
    }

    #[test]
    fn constant_prediction_is_degenerate() {
        let gt = disp(vec![0.1, 0.5, 0.2]);
        assert_eq!(solve_alignment(&disp(vec![2.0; 3]), &gt, false), Err(AlignError::DegenerateSystem));
    }

    #[test]
    fn too_few_pixels() {
        let g = Grid::new(3, 1, vec![1.0, 2.0, 3.0], vec![true, false, false]).unwrap();
        let pred = DisparityMap::new(g).unwrap();
        let gt = disp(vec![1.0, 2.0, 3.0]);
        assert_eq!(solve_alignment(&pred, &gt, false), Err(AlignError::InsufficientPixels(1)));
        assert!(matches!(
            solve_alignment(&disp(vec![1.0, 2.0]), &gt, false),
            Err(AlignError::SizeMismatch(..))
        ));
    }

    #[test]
    fn negative_scale_clamped() {
        let gt = disp(vec![1.0, 2.0, 3.0]);
        let pred = disp(vec![3.0, 2.0, 1.0]);
        let free = solve_alignment(&pred, &gt, false).unwrap();
        assert!(free.scale < 0.0);
        let clamped = solve_alignment(&pred, &gt, true).unwrap();
        assert_eq!(clamped, AlignmentParams { scale: 0.0, shift: 2.0 });
    }

    #[test]
    fn apply_identity_and_constant() {
        let m = disp(vec![0.3, -1.0, 4.0]);
        assert_eq!(apply_alignment(&m, AlignmentParams::IDENTITY), m);
        let c = apply_alignment(&m, AlignmentParams { scale: 0.0, shift: 2.5 });
        assert_eq!(c.grid().values(), &[2.5, 2.5, 2.5]);
    }

    #[test]
    fn depth_conversion_paths() {
        let d = disp(vec![0.5, 0.0, -3.0, 100.0]);
        let depth = disparity_to_depth(&d, 10.0, 1e-8);
        assert_eq!(depth.grid().values(), &[2.0, 10.0, 10.0, 0.01]);
    }

    #[test]
    fn fit_beats_trivial_candidates() {
        let gt = disp(vec![0.3, 0.1, 0.8, 0.5, 0.45]);
        let pred = disp(vec![1.0, 0.2, 2.2, 1.9, 1.1]);
        let best = solve_alignment(&pred, &gt, false).unwrap();
        let r = residual(&pred, &gt, best);
        let mean = masked_gt_mean(&pred, &gt).unwrap();
        assert!(r <= residual(&pred, &gt, AlignmentParams::IDENTITY));
        assert!(r <= residual(&pred, &gt, AlignmentParams { scale: 0.0, shift: mean }));
    }
}
