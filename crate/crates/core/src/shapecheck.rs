//! Symbolic shape propagation through encoder hooks, adapters and the depth decoder.
//!
//! Nothing here touches tensor data. Each descriptor is turned into a trace of
//! abstract shapes and every adapter step is checked for composability.

use std::collections::HashSet;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::zoo::{BackboneDescriptor, Family, StemSpec};

/// Width of every decoder fusion stage.
pub const DECODER_CHANNELS: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TensorShape {
    /// Rank-2 token sequence.
    Tokens { count: u32, dim: u32 },
    /// Token sequence after transposition, channels leading.
    ChannelMajor { channels: u32, positions: u32 },
    /// Rank-3 feature map.
    Spatial { height: u32, width: u32, channels: u32 },
}

impl TensorShape {
    pub fn spatial(height: u32, width: u32, channels: u32) -> Self {
        TensorShape::Spatial { height, width, channels }
    }

    pub fn grid(&self) -> Option<(u32, u32)> {
        match *self {
            TensorShape::Spatial { height, width, .. } => Some((height, width)),
            _ => None,
        }
    }

    pub fn channels(&self) -> u32 {
        match *self {
            TensorShape::Tokens { dim, .. } => dim,
            TensorShape::ChannelMajor { channels, .. } => channels,
            TensorShape::Spatial { channels, .. } => channels,
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            TensorShape::Tokens { count, dim } => count > 0 && dim > 0,
            TensorShape::ChannelMajor { channels, positions } => channels > 0 && positions > 0,
            TensorShape::Spatial { height, width, channels } => height > 0 && width > 0 && channels > 0,
        }
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TensorShape::Tokens { count, dim } => write!(f, "Tokens({count}, {dim})"),
            TensorShape::ChannelMajor { channels, positions } => write!(f, "ChannelMajor({channels}, {positions})"),
            TensorShape::Spatial { height, width, channels } => write!(f, "Spatial({height}, {width}, {channels})"),
        }
    }
}

/// One shape-changing operator between an encoder hook and the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AdapterOp {
    DropClassToken,
    Transpose,
    Unflatten { height: u32, width: u32 },
    ProjectChannels { from: u32, to: u32 },
    UpsampleBy { factor: u32 },
    DownsampleBy { factor: u32 },
    ResizeToGrid { height: u32, width: u32 },
}

impl AdapterOp {
    pub fn apply(&self, s: TensorShape) -> Result<TensorShape, String> {
        use TensorShape::*;
        let out = match (*self, s) {
            (AdapterOp::DropClassToken, Tokens { count, dim }) if count > 1 => Tokens { count: count - 1, dim },
            (AdapterOp::Transpose, Tokens { count, dim }) => ChannelMajor {
                channels: dim,
                positions: count,
            },
            (AdapterOp::Transpose, ChannelMajor { channels, positions }) => Tokens {
                count: positions,
                dim: channels,
            },
            (AdapterOp::Unflatten { height, width }, ChannelMajor { channels, positions }) => {
                if u64::from(height) * u64::from(width) != u64::from(positions) {
                    return Err(format!("{positions} positions do not unflatten to {height}x{width}"));
                }
                Spatial { height, width, channels }
            }
            (AdapterOp::ProjectChannels { from, to }, Spatial { height, width, channels }) => {
                if channels != from {
                    return Err(format!("projection expects {from} channels, got {channels}"));
                }
                Spatial {
                    height,
                    width,
                    channels: to,
                }
            }
            (AdapterOp::UpsampleBy { factor }, Spatial { height, width, channels }) => Spatial {
                height: height * factor,
                width: width * factor,
                channels,
            },
            (AdapterOp::DownsampleBy { factor }, Spatial { height, width, channels }) => {
                if factor == 0 || height % factor != 0 || width % factor != 0 {
                    return Err(format!("{height}x{width} is not divisible by {factor}"));
                }
                Spatial {
                    height: height / factor,
                    width: width / factor,
                    channels,
                }
            }
            (AdapterOp::ResizeToGrid { height, width }, Spatial { channels, .. }) => Spatial { height, width, channels },
            (op, s) => return Err(format!("{op} cannot take {s}")),
        };
        if !out.is_valid() {
            return Err(format!("{self} produced empty shape {out}"));
        }
        Ok(out)
    }
}

impl fmt::Display for AdapterOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AdapterOp::DropClassToken => f.write_str("DropClassToken"),
            AdapterOp::Transpose => f.write_str("Transpose"),
            AdapterOp::Unflatten { height, width } => write!(f, "Unflatten({height}x{width})"),
            AdapterOp::ProjectChannels { from, to } => write!(f, "ProjectChannels({from}->{to})"),
            AdapterOp::UpsampleBy { factor } => write!(f, "UpsampleBy({factor})"),
            AdapterOp::DownsampleBy { factor } => write!(f, "DownsampleBy({factor})"),
            AdapterOp::ResizeToGrid { height, width } => write!(f, "ResizeToGrid({height}x{width})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("input resolution {width}x{height} has a zero side")]
    EmptyInput { width: u32, height: u32 },
    #[error("{name} only supports square inputs, got {width}x{height}")]
    SquareResolutionRequired { name: String, width: u32, height: u32 },
    #[error("input resolution {width}x{height} is not a multiple of 32")]
    NotMultipleOf32 { width: u32, height: u32 },
    #[error("{name} needs sides divisible by {divisor}, got {width}x{height}")]
    IndivisibleByStem {
        name: String,
        width: u32,
        height: u32,
        divisor: u32,
    },
    #[error("invalid descriptor: {0}")]
    Descriptor(String),
    #[error("{location} step {step} ({op}) on {input}: {reason}")]
    ShapeMismatch {
        location: String,
        step: usize,
        op: AdapterOp,
        input: TensorShape,
        reason: String,
    },
    #[error("decoder output {got} does not match input {width}x{height}x1")]
    OutputMismatch { got: TensorShape, width: u32, height: u32 },
}

/// Checks that a descriptor can run at `w`x`h`.
pub fn validate_resolution(d: &BackboneDescriptor, w: u32, h: u32) -> Result<(), ShapeError> {
    if w == 0 || h == 0 {
        return Err(ShapeError::EmptyInput { width: w, height: h });
    }
    if d.square_only && w != h {
        return Err(ShapeError::SquareResolutionRequired {
            name: d.name.clone(),
            width: w,
            height: h,
        });
    }
    if !w.is_multiple_of(32) || !h.is_multiple_of(32) {
        return Err(ShapeError::NotMultipleOf32 { width: w, height: h });
    }
    let divisor = d.required_divisor();
    if !w.is_multiple_of(divisor) || !h.is_multiple_of(divisor) {
        return Err(ShapeError::IndivisibleByStem {
            name: d.name.clone(),
            width: w,
            height: h,
            divisor,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CacheStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
}

/// Resolutions for which relative position indices have been generated.
#[derive(Debug, Default)]
pub struct ResolutionCache {
    inner: Mutex<(HashSet<(u32, u32)>, CacheStats)>,
}

impl ResolutionCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a lookup; returns true on a hit. Insert-if-absent is atomic.
    pub fn touch(&self, w: u32, h: u32) -> bool {
        let mut guard = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        let (seen, stats) = &mut *guard;
        let hit = !seen.insert((w, h));
        if hit {
            stats.hits += 1;
        } else {
            stats.misses += 1;
            stats.entries = seen.len();
        }
        hit
    }

    pub fn stats(&self) -> CacheStats {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).1
    }
}

pub fn cache_stats(cache: &ResolutionCache) -> CacheStats {
    cache.stats()
}

/// Full shape trace of one descriptor at one input resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub descriptor: String,
    pub hook_positions: Vec<u32>,
    /// `[width, height]`
    pub input_resolution: [u32; 2],
    pub stem_output: TensorShape,
    pub hook_shapes: Vec<TensorShape>,
    pub adapter_chains: Vec<Vec<AdapterOp>>,
    /// Adapter output per stage, before the decoder projection.
    pub adapter_outputs: Vec<TensorShape>,
    /// Per-stage shape after projection to the decoder width.
    pub decoder_stage_shapes: Vec<TensorShape>,
    /// Fused map after each fusion step, deepest first.
    pub fusion_trace: Vec<TensorShape>,
    pub head_trace: Vec<TensorShape>,
    /// `[width, height]`
    pub output_resolution: [u32; 2],
    pub output_channels: u32,
    /// Position-index cache misses caused by this call.
    pub cache_misses: u32,
}

impl ShapeReport {
    /// Equality on everything except descriptor identity and hook positions.
    pub fn same_structure(&self, other: &ShapeReport) -> bool {
        let strip = |r: &ShapeReport| ShapeReport {
            descriptor: String::new(),
            hook_positions: Vec::new(),
            cache_misses: 0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

impl fmt::Display for ShapeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [w, h] = self.input_resolution;
        writeln!(f, "backbone: {}", self.descriptor)?;
        writeln!(f, "input: {w}x{h}")?;
        writeln!(f, "stem: {}", self.stem_output)?;
        for i in 0..self.hook_shapes.len() {
            writeln!(f, "stage {} (hook {}):", i + 1, self.hook_positions[i])?;
            writeln!(f, "  hook: {}", self.hook_shapes[i])?;
            let chain: Vec<String> = self.adapter_chains[i].iter().map(|op| op.to_string()).collect();
            let chain = if chain.is_empty() { "identity".to_string() } else { chain.join(" -> ") };
            writeln!(f, "  adapter: {chain}")?;
            writeln!(f, "  adapter out: {}", self.adapter_outputs[i])?;
            writeln!(f, "  decoder: {}", self.decoder_stage_shapes[i])?;
        }
        let fusion: Vec<String> = self.fusion_trace.iter().map(|s| s.to_string()).collect();
        writeln!(f, "fusion: {}", fusion.join(" -> "))?;
        let head: Vec<String> = self.head_trace.iter().map(|s| s.to_string()).collect();
        writeln!(f, "head: {}", head.join(" -> "))?;
        let [ow, oh] = self.output_resolution;
        writeln!(f, "output: {ow}x{oh}x{}", self.output_channels)?;
        write!(f, "cache misses: {}", self.cache_misses)
    }
}

fn ceil_half(v: u32) -> u32 {
    v.div_ceil(2)
}

/// Hook grids `(height, width)` for a hierarchical encoder: stem grid, then ceil-halving.
pub fn hierarchical_grids(stem_h: u32, stem_w: u32, stages: usize) -> Vec<(u32, u32)> {
    std::iter::successors(Some((stem_h, stem_w)), |&(h, w)| Some((ceil_half(h), ceil_half(w))))
        .take(stages)
        .collect()
}

struct Chain<'a> {
    location: &'a str,
    shape: TensorShape,
    ops: Vec<AdapterOp>,
}

impl Chain<'_> {
    fn push(&mut self, op: AdapterOp) -> Result<(), ShapeError> {
        let next = op.apply(self.shape).map_err(|reason| ShapeError::ShapeMismatch {
            location: self.location.to_string(),
            step: self.ops.len() + 1,
            op,
            input: self.shape,
            reason,
        })?;
        self.ops.push(op);
        self.shape = next;
        Ok(())
    }
}

fn step(location: &str, index: usize, op: AdapterOp, s: TensorShape) -> Result<TensorShape, ShapeError> {
    op.apply(s).map_err(|reason| ShapeError::ShapeMismatch {
        location: location.to_string(),
        step: index,
        op,
        input: s,
        reason,
    })
}

/// Resample op taking a square-factor grid to a target grid.
fn resample_op(from: (u32, u32), to: (u32, u32)) -> Option<AdapterOp> {
    if from == to {
        None
    } else if to.0.is_multiple_of(from.0) && to.1.is_multiple_of(from.1) && to.0 / from.0 == to.1 / from.1 {
        Some(AdapterOp::UpsampleBy { factor: to.0 / from.0 })
    } else if from.0.is_multiple_of(to.0) && from.1.is_multiple_of(to.1) && from.0 / to.0 == from.1 / to.1 {
        Some(AdapterOp::DownsampleBy { factor: from.0 / to.0 })
    } else {
        Some(AdapterOp::ResizeToGrid {
            height: to.0,
            width: to.1,
        })
    }
}

/// Propagates shapes from the input image to the one-channel depth output.
pub fn propagate(d: &BackboneDescriptor, w: u32, h: u32, cache: &ResolutionCache) -> Result<ShapeReport, ShapeError> {
    d.validate().map_err(|e| ShapeError::Descriptor(e.to_string()))?;
    validate_resolution(d, w, h)?;

    let n = d.num_stages;
    let scale = d.stem.output_scale();
    let (gh, gw) = (h / scale, w / scale);
    let tokens_family = d.family != Family::HierarchicalSpatial;
    let stem_output = match (&d.stem, tokens_family) {
        (StemSpec::PatchEmbed { .. }, true) => TensorShape::Tokens {
            count: gh * gw + u32::from(d.class_token),
            dim: d.stage_channels[0],
        },
        (StemSpec::PatchEmbed { .. }, false) => TensorShape::spatial(gh, gw, d.stage_channels[0]),
        (StemSpec::ConvStem { channels, .. }, _) => TensorShape::spatial(gh, gw, *channels.last().unwrap()),
    };

    let mut hook_shapes = Vec::with_capacity(n);
    let mut chains = Vec::with_capacity(n);
    let mut adapter_outputs = Vec::with_capacity(n);
    let mut stage_grids = Vec::with_capacity(n);

    match d.family {
        Family::PlainTokens => {
            let count = gh * gw + u32::from(d.class_token);
            for i in 0..n {
                let hook = TensorShape::Tokens {
                    count,
                    dim: d.stage_channels[i],
                };
                let location = format!("stage {}", i + 1);
                let mut c = Chain {
                    location: &location,
                    shape: hook,
                    ops: Vec::new(),
                };
                if d.class_token {
                    c.push(AdapterOp::DropClassToken)?;
                }
                c.push(AdapterOp::Transpose)?;
                c.push(AdapterOp::Unflatten { height: gh, width: gw })?;
                c.push(AdapterOp::ProjectChannels {
                    from: d.stage_channels[i],
                    to: d.adapter_channels[i],
                })?;
                let div = 4u32 << i;
                let target = (h / div, w / div);
                if let Some(op) = resample_op((gh, gw), target) {
                    c.push(op)?;
                }
                hook_shapes.push(hook);
                stage_grids.push(target);
                adapter_outputs.push(c.shape);
                chains.push(c.ops);
            }
        }
        Family::HierarchicalTokens | Family::HierarchicalSpatial => {
            for (i, (sh, sw)) in hierarchical_grids(gh, gw, n).into_iter().enumerate() {
                let ch = d.stage_channels[i];
                let location = format!("stage {}", i + 1);
                let (hook, ops) = if d.family == Family::HierarchicalTokens {
                    let hook = TensorShape::Tokens { count: sh * sw, dim: ch };
                    (hook, vec![AdapterOp::Transpose, AdapterOp::Unflatten { height: sh, width: sw }])
                } else {
                    (TensorShape::spatial(sh, sw, ch), Vec::new())
                };
                let mut c = Chain {
                    location: &location,
                    shape: hook,
                    ops: Vec::new(),
                };
                for op in ops {
                    c.push(op)?;
                }
                hook_shapes.push(hook);
                stage_grids.push((sh, sw));
                adapter_outputs.push(c.shape);
                chains.push(c.ops);
            }
        }
    }

    // decoder projection
    let mut decoder_stage_shapes = Vec::with_capacity(n);
    for (i, s) in adapter_outputs.iter().enumerate() {
        let op = AdapterOp::ProjectChannels {
            from: s.channels(),
            to: DECODER_CHANNELS,
        };
        decoder_stage_shapes.push(step(&format!("decoder stage {}", i + 1), 1, op, *s)?);
    }

    // fusion, deepest to shallowest
    let mut fused = decoder_stage_shapes[n - 1];
    let mut fusion_trace = vec![fused];
    for i in (0..n - 1).rev() {
        let location = format!("fusion into stage {}", i + 1);
        let (th, tw) = stage_grids[i];
        fused = step(&location, 1, AdapterOp::ResizeToGrid { height: th, width: tw }, fused)?;
        if fused != decoder_stage_shapes[i] {
            return Err(ShapeError::ShapeMismatch {
                location,
                step: 2,
                op: AdapterOp::ResizeToGrid { height: th, width: tw },
                input: decoder_stage_shapes[i],
                reason: format!("cannot fuse {fused} with {}", decoder_stage_shapes[i]),
            });
        }
        fusion_trace.push(fused);
    }
    fused = step("fusion output", 1, AdapterOp::UpsampleBy { factor: 2 }, fused)?;
    fusion_trace.push(fused);

    let mut head_trace = Vec::new();
    let mut x = fused;
    for (k, &ch) in d.decoder.deconv_channels.iter().enumerate() {
        let loc = format!("deconv block {}", k + 1);
        x = step(&loc, 1, AdapterOp::ProjectChannels { from: x.channels(), to: ch }, x)?;
        x = step(&loc, 2, AdapterOp::UpsampleBy { factor: 2 }, x)?;
        head_trace.push(x);
    }
    for (k, &ch) in d.decoder.head_channels.iter().enumerate() {
        x = step("head", 2 * k + 1, AdapterOp::ProjectChannels { from: x.channels(), to: ch }, x)?;
        head_trace.push(x);
        if k == 0 {
            x = step("head", 2, AdapterOp::UpsampleBy { factor: 2 }, x)?;
            head_trace.push(x);
        }
    }

    let (oh, ow) = x.grid().expect("head yields a spatial map");
    if (ow, oh) != (w, h) || x.channels() != 1 {
        return Err(ShapeError::OutputMismatch {
            got: x,
            width: w,
            height: h,
        });
    }

    let cache_misses = if d.position_index_cache && !cache.touch(w, h) { 1 } else { 0 };

    Ok(ShapeReport {
        descriptor: d.name.clone(),
        hook_positions: d.hook_positions.clone(),
        input_resolution: [w, h],
        stem_output,
        hook_shapes,
        adapter_chains: chains,
        adapter_outputs,
        decoder_stage_shapes,
        fusion_trace,
        head_trace,
        output_resolution: [ow, oh],
        output_channels: x.channels(),
        cache_misses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::Registry;

    fn desc(name: &str) -> BackboneDescriptor {
        Registry::builtin().lookup(name).unwrap().clone()
    }

    #[test]
    fn beit_tokens_and_adapters() {
        let r = propagate(&desc("BEiT384-L"), 384, 384, &ResolutionCache::new()).unwrap();
        assert!(r.hook_shapes.iter().all(|s| *s == TensorShape::Tokens { count: 577, dim: 1024 }));
        let outs: Vec<_> = r.adapter_outputs.iter().map(|s| (s.grid().unwrap().0, s.channels())).collect();
        assert_eq!(outs, vec![(96, 256), (48, 512), (24, 1024), (12, 1024)]);
        assert_eq!(
            &r.adapter_chains[0][..4],
            &[
                AdapterOp::DropClassToken,
                AdapterOp::Transpose,
                AdapterOp::Unflatten { height: 24, width: 24 },
                AdapterOp::ProjectChannels { from: 1024, to: 256 }
            ]
        );
        assert_eq!(r.adapter_chains[2].len(), 4);
        assert_eq!(r.adapter_chains[3][4], AdapterOp::DownsampleBy { factor: 2 });
        assert_eq!(r.output_resolution, [384, 384]);
        assert!(r.decoder_stage_shapes.iter().all(|s| s.channels() == DECODER_CHANNELS));
    }

    #[test]
    fn next_vit_grids() {
        let d = desc("Next-ViT-L-1K-6M");
        let r = propagate(&d, 384, 384, &ResolutionCache::new()).unwrap();
        let got: Vec<_> = r.hook_shapes.iter().map(|s| (s.grid().unwrap().0, s.channels())).collect();
        assert_eq!(got, vec![(96, 96), (48, 256), (24, 512), (12, 1024)]);
        assert!(r.adapter_chains.iter().all(Vec::is_empty));

        let r = propagate(&d, 416, 384, &ResolutionCache::new()).unwrap();
        assert_eq!(r.hook_shapes[0].grid(), Some((96, 104)));
        assert_eq!(r.output_resolution, [416, 384]);
    }

    #[test]
    fn levit_stem_and_head() {
        let r = propagate(&desc("LeViT-224"), 224, 224, &ResolutionCache::new()).unwrap();
        assert_eq!(r.stem_output.grid(), Some((14, 14)));
        let grids = r.hook_shapes.clone();
        assert_eq!(grids[2], TensorShape::Tokens { count: 16, dim: 768 });
        let chans: Vec<u32> = r.head_trace.iter().map(|s| s.channels()).collect();
        assert_eq!(chans, vec![128, 64, 32, 32, 8, 1]);
        assert_eq!(r.output_resolution, [224, 224]);
        assert_eq!(r.output_channels, 1);
    }

    #[test]
    fn swin_default_head() {
        let r = propagate(&desc("Swin-L"), 384, 384, &ResolutionCache::new()).unwrap();
        let chans: Vec<u32> = r.head_trace.iter().map(|s| s.channels()).collect();
        assert_eq!(chans, vec![128, 128, 32, 1]);
        assert_eq!(r.hook_shapes[0], TensorShape::Tokens { count: 96 * 96, dim: 192 });
    }

    #[test]
    fn resolution_validation() {
        let swin = desc("Swin-L");
        assert!(matches!(
            validate_resolution(&swin, 512, 384),
            Err(ShapeError::SquareResolutionRequired { .. })
        ));
        assert!(validate_resolution(&desc("BEiT512-L"), 384, 384).is_ok());
        assert!(matches!(validate_resolution(&swin, 0, 384), Err(ShapeError::EmptyInput { .. })));
        assert!(matches!(
            validate_resolution(&desc("ViT-L"), 400, 384),
            Err(ShapeError::NotMultipleOf32 { .. })
        ));
        let mut odd = desc("ViT-L");
        odd.size_divisor = Some(64);
        assert!(matches!(
            validate_resolution(&odd, 416, 384),
            Err(ShapeError::IndivisibleByStem { divisor: 64, .. })
        ));
    }

    #[test]
    fn cache_accounting() {
        let beit = desc("BEiT384-L");
        let cache = ResolutionCache::new();
        assert_eq!(propagate(&beit, 384, 384, &cache).unwrap().cache_misses, 1);
        assert_eq!(propagate(&beit, 384, 384, &cache).unwrap().cache_misses, 0);
        assert_eq!(cache_stats(&cache), CacheStats { entries: 1, hits: 1, misses: 1 });
        propagate(&beit, 512, 512, &cache).unwrap();
        assert_eq!(cache.stats().entries, 2);
        assert_eq!(cache.stats().misses, 2);

        let swin_cache = ResolutionCache::new();
        propagate(&desc("Swin-L"), 384, 384, &swin_cache).unwrap();
        assert_eq!(swin_cache.stats().entries, 0);
    }

    #[test]
    fn mismatch_reports_first_bad_step() {
        let mut d = desc("Swin-L");
        d.stage_channels[1] = 0;
        assert!(matches!(propagate(&d, 384, 384, &ResolutionCache::new()), Err(ShapeError::Descriptor(_))));

        let err = AdapterOp::Unflatten { height: 5, width: 5 }
            .apply(TensorShape::ChannelMajor {
                channels: 8,
                positions: 24,
            })
            .unwrap_err();
        assert!(err.contains("5x5"));
        assert!(AdapterOp::ProjectChannels { from: 3, to: 4 }
            .apply(TensorShape::Tokens { count: 3, dim: 3 })
            .is_err());
    }

    #[test]
    fn builtin_sweep_at_training_resolution() {
        for d in Registry::builtin().list() {
            let [w, h] = d.training_resolution;
            let r = propagate(d, w, h, &ResolutionCache::new()).unwrap_or_else(|e| panic!("{}: {e}", d.name));
            assert_eq!(r.output_resolution, [w, h], "{}", d.name);
        }
    }

    #[test]
    fn ceil_halving() {
        assert_eq!(hierarchical_grids(14, 14, 3), vec![(14, 14), (7, 7), (4, 4)]);
        assert_eq!(hierarchical_grids(1, 3, 3), vec![(1, 3), (1, 2), (1, 1)]);
    }

    #[test]
    fn text_report() {
        let r = propagate(&desc("ViT-L"), 384, 384, &ResolutionCache::new()).unwrap();
        let text = r.to_string();
        assert!(text.contains("Tokens(577, 1024)"));
        assert!(text.contains("output: 384x384x1"));
    }
}
