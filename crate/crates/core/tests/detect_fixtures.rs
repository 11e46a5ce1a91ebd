//! Router behavior on frames synthesized through the actual quantization and
//! dithering paths.

mod common;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ungif_core::{
    dither_floyd_steinberg, extract_features, fit, median_cut_palette, quantize, DitherFeatures,
    DitherMode,
};

fn labeled_frames(count_per_class: usize, base_seed: u64) -> Vec<(DitherFeatures, DitherMode)> {
    let mut out = Vec::new();
    for i in 0..count_per_class {
        let seed = base_seed + i as u64;
        let scene = if i % 2 == 0 {
            common::lowfreq_scene(seed, 48, 48)
        } else {
            common::smooth_texture(seed, 48, 48)
        };
        let palette = median_cut_palette(&scene, 32).unwrap();
        let plain = quantize(&scene, &palette);
        let dithered = dither_floyd_steinberg(&scene, &palette);
        out.push((extract_features(&plain).unwrap(), DitherMode::NonDithered));
        out.push((extract_features(&dithered).unwrap(), DitherMode::Dithered));
    }
    out
}

#[test]
fn dithering_raises_the_local_distinct_rate() {
    for seed in 0..5 {
        let scene = common::smooth_texture(seed, 48, 48);
        let palette = median_cut_palette(&scene, 32).unwrap();
        let plain = extract_features(&quantize(&scene, &palette)).unwrap();
        let dithered = extract_features(&dither_floyd_steinberg(&scene, &palette)).unwrap();
        assert!(
            dithered.local_distinct_rate > plain.local_distinct_rate,
            "seed {seed}: {} vs {}",
            dithered.local_distinct_rate,
            plain.local_distinct_rate
        );
    }
}

#[test]
fn router_separates_held_out_frames() {
    let mut pairs = labeled_frames(50, 1000);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    pairs.shuffle(&mut rng);
    let split = pairs.len() * 4 / 5;
    let model = fit(&pairs[..split]).unwrap();
    let correct = pairs[split..].iter().filter(|(f, label)| model.decide(f) == *label).count();
    let accuracy = correct as f64 / (pairs.len() - split) as f64;
    assert!(accuracy >= 0.95, "held-out accuracy {accuracy:.3}");
}

#[test]
fn shuffled_labels_score_at_chance() {
    let pairs = labeled_frames(50, 2000);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut labels: Vec<DitherMode> = pairs.iter().map(|(_, m)| *m).collect();
    labels.shuffle(&mut rng);
    let shuffled: Vec<(DitherFeatures, DitherMode)> =
        pairs.iter().zip(&labels).map(|((f, _), &m)| (*f, m)).collect();
    let model = fit(&shuffled).unwrap();
    let correct = shuffled.iter().filter(|(f, label)| model.decide(f) == *label).count();
    let accuracy = correct as f64 / shuffled.len() as f64;
    assert!(
        (accuracy - 0.5).abs() <= 0.1,
        "shuffled-label accuracy {accuracy:.3} should be near chance"
    );
}
