use depthzoo::shapecheck::{ResolutionCache, TensorShape};
use depthzoo::{propagate, Registry, ShapeError};

#[test]
fn reversed_hooks_keep_the_structure() {
    let reg = Registry::builtin();
    let cache = ResolutionCache::new();
    let fwd = propagate(reg.get("ViT-L").unwrap(), 384, 384, &cache).unwrap();
    let rev = propagate(reg.get("ViT-L-Reversed").unwrap(), 384, 384, &cache).unwrap();
    assert_ne!(fwd.hook_positions, rev.hook_positions);
    assert!(fwd.same_structure(&rev));
    assert_eq!(rev.output_resolution, [384, 384]);
}

#[test]
fn square_only_backbones_reject_rectangles() {
    let reg = Registry::builtin();
    let cache = ResolutionCache::new();
    for name in ["Swin-L", "SwinV2-L", "SwinV2-B", "SwinV2-T", "Swin-T", "LeViT-224"] {
        let d = reg.get(name).unwrap();
        let err = propagate(d, 512, 384, &cache).unwrap_err();
        assert!(matches!(err, ShapeError::SquareResolutionRequired { .. }), "{name}: {err}");
    }
}

#[test]
fn next_vit_handles_rectangles() {
    let reg = Registry::builtin();
    let r = propagate(reg.get("Next-ViT-L-1K-6M").unwrap(), 416, 384, &ResolutionCache::new()).unwrap();
    let grids: Vec<(u32, u32)> = r.hook_shapes.iter().map(|s| s.grid().unwrap()).collect();
    assert_eq!(grids, [(96, 104), (48, 52), (24, 26), (12, 13)]);
    assert_eq!((r.output_resolution, r.output_channels), ([416, 384], 1));
    assert_eq!(r.head_trace.last(), Some(&TensorShape::spatial(384, 416, 1)));
}

#[test]
fn cache_misses_once_per_resolution_across_threads() {
    let reg = Registry::builtin();
    let d = reg.get("BEiT384-L").unwrap();
    let cache = &ResolutionCache::new();
    let sides = [384u32, 512, 384, 512, 640, 384, 640, 512];
    let misses: u32 = std::thread::scope(|s| {
        let handles: Vec<_> = sides
            .iter()
            .map(|&side| s.spawn(move || propagate(d, side, side, cache).unwrap().cache_misses))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    let stats = cache.stats();
    assert_eq!((misses, stats.misses, stats.entries), (3, 3, 3));
    assert_eq!(stats.hits, 5);
}
