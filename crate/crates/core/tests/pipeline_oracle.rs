//! End-to-end scoring checked against a plain scalar reimplementation.

use std::path::Path;

use depthzoo::depthio::write_pfm;
use depthzoo::evaluate::{run, RunConfig};
use depthzoo::Grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const W: usize = 12;
const H: usize = 9;
const CAP: f64 = 10.0;
const EPS: f64 = 1e-8;

struct Sample {
    pred: Vec<f64>,
    gt_depth: Vec<f64>,
    gt_valid: Vec<bool>,
}

fn f32_exact(v: f64) -> f64 {
    v as f32 as f64
}

fn make_samples(rng: &mut ChaCha8Rng, n: usize) -> Vec<Sample> {
    (0..n)
        .map(|_| {
            let gt_depth: Vec<f64> = (0..W * H).map(|_| f32_exact(rng.gen_range(0.5..14.0))).collect();
            let gt_valid = (0..W * H).map(|_| rng.gen_bool(0.85)).collect();
            let (s, t) = (rng.gen_range(0.3..3.0), rng.gen_range(-0.2..0.2));
            let pred = gt_depth
                .iter()
                .map(|d| f32_exact(s * (1.0 / d) + t + rng.gen_range(-0.05..0.05)))
                .collect();
            Sample { pred, gt_depth, gt_valid }
        })
        .collect()
}

/// Scalar reference: normal equations solved by Cramer's rule, naive sums.
fn score(sample: &Sample, metric: &str, clamp: bool) -> f64 {
    let idx: Vec<usize> = (0..W * H)
        .filter(|&i| sample.gt_valid[i] && sample.gt_depth[i] <= CAP)
        .collect();
    let (mut spp, mut sp, mut spg, mut sg) = (0.0, 0.0, 0.0, 0.0);
    for &i in &idx {
        let p = sample.pred[i];
        let g = 1.0 / sample.gt_depth[i];
        spp += p * p;
        sp += p;
        spg += p * g;
        sg += g;
    }
    let n = idx.len() as f64;
    let det = spp * n - sp * sp;
    let mut s = (spg * n - sp * sg) / det;
    let mut t = (spp * sg - sp * spg) / det;
    if clamp && s < 0.0 {
        s = 0.0;
        t = sg / n;
    }
    let mut acc = 0.0;
    for &i in &idx {
        let aligned = s * sample.pred[i] + t;
        let d = (1.0 / aligned.max(EPS)).min(CAP);
        let g = sample.gt_depth[i];
        acc += match metric {
            "REL" => (d - g).abs() / g,
            _ => {
                if (d / g).max(g / d) > 1.25 {
                    100.0
                } else {
                    0.0
                }
            }
        };
    }
    acc / n
}

fn write_dataset(dir: &Path, name: &str, metric: &str, samples: &[Sample]) {
    let sub = dir.join(name);
    std::fs::create_dir_all(&sub).unwrap();
    let mut text = format!("{{\"dataset_name\":\"{name}\",\"metric_kind\":\"{metric}\",\"depth_cap\":{CAP}}}\n");
    for (i, s) in samples.iter().enumerate() {
        let mask = vec![true; W * H];
        write_pfm(&sub.join(format!("p{i}.pfm")), &Grid::new(W, H, s.pred.clone(), mask).unwrap()).unwrap();
        let gt = Grid::new(W, H, s.gt_depth.clone(), s.gt_valid.clone()).unwrap();
        write_pfm(&sub.join(format!("g{i}.pfm")), &gt).unwrap();
        text.push_str(&format!("{{\"prediction\":\"p{i}.pfm\",\"ground_truth\":\"g{i}.pfm\"}}\n"));
    }
    std::fs::write(sub.join("manifest.jsonl"), text).unwrap();
}

#[test]
fn run_matches_scalar_reference() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rel_samples = make_samples(&mut rng, 10);
    let d1_samples = make_samples(&mut rng, 10);
    write_dataset(dir.path(), "relset", "REL", &rel_samples);
    write_dataset(dir.path(), "d1set", "BadPixDelta1", &d1_samples);
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "output_dir = \"out\"\nworkers = 3\n\
         [datasets.relset]\nmanifest = \"relset/manifest.jsonl\"\n\
         [datasets.d1set]\nmanifest = \"d1set/manifest.jsonl\"\n",
    )
    .unwrap();

    let report = run(&RunConfig::load(&cfg_path).unwrap()).unwrap();
    assert!(report.improvement.is_none());
    let expect = |samples: &[Sample], metric: &str, clamp: bool| {
        samples.iter().map(|s| score(s, metric, clamp)).sum::<f64>() / samples.len() as f64
    };
    for rep in &report.datasets {
        let want = match rep.name.as_str() {
            "relset" => expect(&rel_samples, "REL", false),
            "d1set" => expect(&d1_samples, "BadPixDelta1", true),
            other => panic!("unexpected dataset {other}"),
        };
        assert_eq!(rep.samples_scored, 10);
        assert!((rep.mean - want).abs() <= 1e-10 * want.abs().max(1.0), "{}: {} vs {want}", rep.name, rep.mean);
    }
}
