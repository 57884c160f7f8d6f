use serde::{Deserialize, Serialize};

use super::ZooError;

/// How an encoder exposes its intermediate tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Constant token grid across all blocks (ViT, BEiT, DeiT3).
    PlainTokens,
    /// Token sequences whose grid halves per level (Swin, LeViT).
    HierarchicalTokens,
    /// Spatial feature maps whose grid halves per level (Next-ViT, ConvNeXt).
    HierarchicalSpatial,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::PlainTokens => "plain-tokens",
            Family::HierarchicalTokens => "hierarchical-tokens",
            Family::HierarchicalSpatial => "hierarchical-spatial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Released,
    Legacy,
    Unreleased,
    Ablation,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Released => "released",
            Status::Legacy => "legacy",
            Status::Unreleased => "unreleased",
            Status::Ablation => "ablation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HookAddressing {
    /// Index into the flat block list.
    Absolute,
    /// Index relative to the first block of each level.
    RelativePerLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StemSpec {
    PatchEmbed { patch_size: u32 },
    /// Stack of convolutions; `channels` starts at the RGB input.
    ConvStem { stride2_blocks: u32, channels: Vec<u32> },
}

impl StemSpec {
    /// Factor by which the stem divides the input resolution.
    pub fn output_scale(&self) -> u32 {
        match self {
            StemSpec::PatchEmbed { patch_size } => *patch_size,
            StemSpec::ConvStem { stride2_blocks, .. } => 1 << stride2_blocks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSpec {
    /// Stride-2 transposed-convolution blocks between the fusion stages and the head.
    #[serde(default)]
    pub deconv_channels: Vec<u32>,
    /// Head channel path; one 2x upsampling follows the first entry.
    pub head_channels: Vec<u32>,
}

impl Default for DecoderSpec {
    fn default() -> Self {
        DecoderSpec {
            deconv_channels: Vec::new(),
            head_channels: vec![128, 32, 1],
        }
    }
}

fn is_default_decoder(d: &DecoderSpec) -> bool {
    *d == DecoderSpec::default()
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Declarative description of one encoder variant and its decoder wiring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneDescriptor {
    pub name: String,
    pub family: Family,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_of: Option<String>,
    /// `[width, height]`
    pub training_resolution: [u32; 2],
    pub square_only: bool,
    pub stem: StemSpec,
    pub num_stages: usize,
    pub hook_addressing: HookAddressing,
    pub hook_positions: Vec<u32>,
    /// Set on ablations that hook plain-token blocks in decreasing order.
    #[serde(default, skip_serializing_if = "is_false")]
    pub reversed_hooks: bool,
    /// Inclusive allowed block range per stage.
    pub hook_ranges: Vec<[u32; 2]>,
    /// Encoder-side embedding width at each hook.
    pub stage_channels: Vec<u32>,
    /// Decoder-facing channels per stage after the adapter.
    pub adapter_channels: Vec<u32>,
    pub class_token: bool,
    pub position_index_cache: bool,
    /// Overrides the derived input divisibility requirement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_divisor: Option<u32>,
    #[serde(default, skip_serializing_if = "is_default_decoder")]
    pub decoder: DecoderSpec,
}

impl BackboneDescriptor {
    pub fn is_hierarchical(&self) -> bool {
        self.family != Family::PlainTokens
    }

    /// Every input side must be a multiple of this.
    pub fn required_divisor(&self) -> u32 {
        if let Some(d) = self.size_divisor {
            return d;
        }
        let scale = self.stem.output_scale();
        match self.family {
            // token grid is reassembled down to half its size for the deepest stage
            Family::PlainTokens => scale * 2,
            _ => scale << (self.num_stages - 1),
        }
    }

    pub fn validate(&self) -> Result<(), ZooError> {
        let bad = |reason: String| {
            Err(ZooError::InvalidDescriptor {
                name: self.name.clone(),
                reason,
            })
        };
        let n = self.num_stages;
        if self.name.trim().is_empty() {
            return bad("empty name".into());
        }
        if !(3..=4).contains(&n) {
            return bad(format!("num_stages must be 3 or 4, got {n}"));
        }
        for (field, len) in [
            ("hook_positions", self.hook_positions.len()),
            ("hook_ranges", self.hook_ranges.len()),
            ("stage_channels", self.stage_channels.len()),
            ("adapter_channels", self.adapter_channels.len()),
        ] {
            if len != n {
                return bad(format!("{field} has {len} entries for {n} stages"));
            }
        }
        if self.training_resolution.contains(&0) {
            return bad("training resolution must be positive".into());
        }
        if self.square_only && self.training_resolution[0] != self.training_resolution[1] {
            return bad("square-only backbone with a non-square training resolution".into());
        }
        if self.stage_channels.iter().chain(&self.adapter_channels).any(|&c| c == 0) {
            return bad("channel counts must be positive".into());
        }

        for (i, (&pos, &[lo, hi])) in self.hook_positions.iter().zip(&self.hook_ranges).enumerate() {
            if lo > hi {
                return bad(format!("stage {i} range {lo}-{hi} is empty"));
            }
            if pos < lo || pos > hi {
                return bad(format!("stage {i} hook {pos} outside allowed range {lo}-{hi}"));
            }
        }
        if self.reversed_hooks && self.family != Family::PlainTokens {
            return bad("reversed hooks are only meaningful for plain-token encoders".into());
        }
        if self.hook_addressing == HookAddressing::Absolute {
            let ordered = self.hook_positions.windows(2).all(|w| {
                if self.reversed_hooks {
                    w[0] > w[1]
                } else {
                    w[0] < w[1]
                }
            });
            if !ordered {
                let dir = if self.reversed_hooks { "decreasing" } else { "increasing" };
                return bad(format!("absolute hooks {:?} are not strictly {dir}", self.hook_positions));
            }
        }

        match self.family {
            Family::PlainTokens => {
                if self.stage_channels.windows(2).any(|w| w[0] != w[1]) {
                    return bad("plain-token encoders have one embedding width".into());
                }
                if self.hook_addressing != HookAddressing::Absolute {
                    return bad("plain-token hooks are absolute".into());
                }
            }
            _ => {
                if self.class_token {
                    return bad("hierarchical encoders carry no class token".into());
                }
                if self.adapter_channels != self.stage_channels {
                    return bad("hierarchical adapter channels are fixed by the encoder stages".into());
                }
            }
        }

        match &self.stem {
            StemSpec::PatchEmbed { patch_size } if *patch_size == 0 => return bad("patch size 0".into()),
            StemSpec::ConvStem { stride2_blocks, channels } => {
                if *stride2_blocks == 0 || *stride2_blocks > 8 {
                    return bad(format!("unsupported stem depth {stride2_blocks}"));
                }
                if channels.len() < 2 || channels[0] != 3 || channels.contains(&0) {
                    return bad("conv stem channels must start at 3 RGB channels".into());
                }
            }
            _ => {}
        }
        if let Some(0) = self.size_divisor {
            return bad("size_divisor must be positive".into());
        }

        let head = &self.decoder.head_channels;
        if head.is_empty() || *head.last().unwrap() != 1 || head.contains(&0) {
            return bad("decoder head must end in a single channel".into());
        }
        if self.decoder.deconv_channels.contains(&0) {
            return bad("deconv channels must be positive".into());
        }
        Ok(())
    }
}
