use serde::{Deserialize, Serialize};

use super::{DepthIoError, Result};

const GRANULARITY: u64 = 32;

/// How the inference resolution is derived from an image's native size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ResolutionPolicy {
    /// Every image is resized to `side` x `side`.
    Square { side: u32 },
    /// Fixed height, width follows the native aspect ratio.
    Unconstrained { height: u32 },
}

impl ResolutionPolicy {
    pub fn square(side: u32) -> Result<Self> {
        check_granular(side)?;
        Ok(ResolutionPolicy::Square { side })
    }

    pub fn unconstrained_height(height: u32) -> Result<Self> {
        check_granular(height)?;
        Ok(ResolutionPolicy::Unconstrained { height })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ResolutionPolicy::Square { side } => check_granular(side),
            ResolutionPolicy::Unconstrained { height } => check_granular(height),
        }
    }
}

fn check_granular(v: u32) -> Result<()> {
    if v == 0 || u64::from(v) % GRANULARITY != 0 {
        return Err(DepthIoError::Policy(format!(
            "{v} is not a positive multiple of {GRANULARITY}"
        )));
    }
    Ok(())
}

/// Returns `(width, height)` for inference.
///
/// In unconstrained mode the width is `native_w * height / native_h` rounded
/// to the nearest multiple of 32 (exact halves round up), never below 32.
/// The rounding is done in integer arithmetic, so there is no float drift.
pub fn compute_inference_resolution(native_w: u32, native_h: u32, policy: ResolutionPolicy) -> (u32, u32) {
    assert!(native_w > 0 && native_h > 0, "native dimensions must be positive");
    match policy {
        ResolutionPolicy::Square { side } => (side, side),
        ResolutionPolicy::Unconstrained { height } => {
            let num = u64::from(native_w) * u64::from(height);
            let den = u64::from(native_h);
            // floor(num/den/32 + 1/2) == floor((2*num + 32*den) / (64*den))
            let k = (2 * num + GRANULARITY * den) / (2 * GRANULARITY * den);
            let width = (k.max(1) * GRANULARITY).min(u64::from(u32::MAX / 32 * 32));
            (width as u32, height)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_examples() {
        let p = ResolutionPolicy::unconstrained_height(384).unwrap();
        assert_eq!(compute_inference_resolution(640, 480, p), (512, 384));
        assert_eq!(compute_inference_resolution(1280, 384, p), (1280, 384));
        let sq = ResolutionPolicy::square(384).unwrap();
        assert_eq!(compute_inference_resolution(999, 777, sq), (384, 384));
    }

    #[test]
    fn halfway_rounds_up_and_floor_is_32() {
        let p = ResolutionPolicy::unconstrained_height(32).unwrap();
        // exact width 48 sits halfway between 32 and 64
        assert_eq!(compute_inference_resolution(3, 2, p), (64, 32));
        // width 47 rounds down
        assert_eq!(compute_inference_resolution(47, 32, p), (32, 32));
        // extreme portrait still yields the 32 floor
        assert_eq!(compute_inference_resolution(1, 1000, p), (32, 32));
    }

    #[test]
    fn policy_rejects_non_multiples() {
        assert!(ResolutionPolicy::square(0).is_err());
        assert!(ResolutionPolicy::square(100).is_err());
        assert!(ResolutionPolicy::unconstrained_height(390).is_err());
    }
}
