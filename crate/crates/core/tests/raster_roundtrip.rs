use depthzoo::depthio::{read_pfm, read_png16, write_pfm, write_png16};
use depthzoo::Grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_grid(rng: &mut ChaCha8Rng, exact_f32: bool) -> Grid {
    let w = rng.gen_range(1..40);
    let h = rng.gen_range(1..40);
    let values: Vec<f64> = (0..w * h)
        .map(|_| {
            let v: f64 = rng.gen_range(-1e3..1e3);
            if exact_f32 {
                v as f32 as f64
            } else {
                v
            }
        })
        .collect();
    let mask: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.9)).collect();
    Grid::new(w, h, values, mask).unwrap()
}

#[test]
fn pfm_round_trip_is_lossless_for_f32_values() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..100 {
        let g = random_grid(&mut rng, true);
        let p = dir.path().join(format!("{i}.pfm"));
        write_pfm(&p, &g).unwrap();
        assert_eq!(read_pfm(&p).unwrap(), g, "map {i}");
    }
}

#[test]
fn pfm_narrowing_stays_within_f32_precision() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = random_grid(&mut rng, false);
    let p = dir.path().join("x.pfm");
    write_pfm(&p, &g).unwrap();
    let back = read_pfm(&p).unwrap();
    assert_eq!(back.mask(), g.mask());
    for (a, b) in back.values().iter().zip(g.values()) {
        assert!((a - b).abs() <= 1e-7 * b.abs().max(1.0));
    }
}

#[test]
fn png16_round_trip_on_quantized_values() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let scale = 256.0;
    for i in 0..20 {
        let (w, h) = (rng.gen_range(1..30), rng.gen_range(1..30));
        let values: Vec<f64> = (0..w * h).map(|_| rng.gen_range(1..=65535u32) as f64 / scale).collect();
        let mask: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.8)).collect();
        let g = Grid::new(w, h, values, mask).unwrap();
        let p = dir.path().join(format!("{i}.png"));
        write_png16(&p, &g, scale).unwrap();
        assert_eq!(read_png16(&p, scale).unwrap(), g);
    }
}
