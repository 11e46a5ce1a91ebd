//! Dataset synthesis, pipeline and sweep behavior on disk: op examples,
//! determinism, and manifest completeness.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use ungif::config::{DitherChoice, OutputFormat, PipelineConfig};
use ungif::eval::{eval_clip, eval_sweep};
use ungif::gif::decode_gif;
use ungif::manifest::sha256_hex;
use ungif::pipeline::restore_video;
use ungif::synth::synth_pairs;
use ungif::{imageio, manifest};
use ungif_core::{flat_region_stats, psnr, quantize, quantize_indices, Palette, RgbImage};

fn write_clip(root: &Path, name: &str, frames: &[RgbImage]) {
    imageio::save_frames(&root.join(name), frames, OutputFormat::Png).unwrap();
}

fn gradient_clip(seed: u64, frames: usize) -> Vec<RgbImage> {
    (0..frames)
        .map(|k| {
            let master = common::gradient_scene(seed, 96, 80);
            common::crop(&master, k, k / 2, 64, 64)
        })
        .collect()
}

#[test]
fn synth_pairs_builds_palette_exact_frames() {
    let input = tempfile::tempdir().unwrap();
    let output = tempfile::tempdir().unwrap();
    write_clip(input.path(), "ramp", &gradient_clip(1, 10));

    let cfg = PipelineConfig::default();
    let m = synth_pairs(input.path(), output.path(), &cfg).unwrap();
    assert_eq!(m.clips.len(), 1);
    assert_eq!(m.clips[0].frame_count, 10);

    let palette = Palette::new(m.clips[0].palette.clone()).unwrap();
    for dir in ["nodither", "dither"] {
        let frames = imageio::load_frames(&output.path().join("ramp").join(dir)).unwrap();
        assert_eq!(frames.len(), 10);
        for frame in &frames {
            for p in frame.pixels() {
                assert!(palette.index_of(*p).is_some(), "{dir} frame has a non-palette pixel");
            }
        }
    }

    // The dithered and non-dithered sets must differ on a smooth clip.
    let plain = imageio::load_frames(&output.path().join("ramp/nodither")).unwrap();
    let dith = imageio::load_frames(&output.path().join("ramp/dither")).unwrap();
    assert!(plain.iter().zip(&dith).any(|(a, b)| a != b));
}

#[test]
fn synth_pairs_is_lossless_on_binary_clips() {
    let input = tempfile::tempdir().unwrap();
    let output = tempfile::tempdir().unwrap();
    let mut frame = RgbImage::filled(32, 32, [0, 0, 0]);
    for y in 0..32 {
        for x in 0..16 {
            frame.set(x, y, [255, 255, 255]);
        }
    }
    write_clip(input.path(), "binary", &[frame.clone(), frame.clone()]);

    let cfg = PipelineConfig { palette_size: 2, ..PipelineConfig::default() };
    synth_pairs(input.path(), output.path(), &cfg).unwrap();
    for dir in ["nodither", "dither"] {
        for out in imageio::load_frames(&output.path().join("binary").join(dir)).unwrap() {
            assert_eq!(out, frame, "{dir} altered a losslessly representable clip");
        }
    }
}

#[test]
fn synth_output_is_deterministic_and_fully_hashed() {
    let input = tempfile::tempdir().unwrap();
    write_clip(input.path(), "a", &gradient_clip(3, 6));
    write_clip(input.path(), "b", &gradient_clip(4, 5));

    let out1 = tempfile::tempdir().unwrap();
    let out2 = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::default();
    let m1 = synth_pairs(input.path(), out1.path(), &cfg).unwrap();
    let m2 = synth_pairs(input.path(), out2.path(), &cfg).unwrap();

    let hashes = |m: &manifest::Manifest| -> Vec<(String, String)> {
        m.clips
            .iter()
            .flat_map(|c| c.files.iter().map(|f| (f.path.clone(), f.sha256.clone())))
            .collect()
    };
    assert_eq!(hashes(&m1), hashes(&m2), "two runs must be byte-identical");

    // Every file on disk is listed, and every listed hash matches the bytes.
    let mut on_disk = BTreeSet::new();
    fn walk(root: &Path, dir: &Path, out: &mut BTreeSet<String>) {
        for entry in fs::read_dir(dir).unwrap().filter_map(|e| e.ok()) {
            let path = entry.path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                if rel != manifest::MANIFEST_NAME {
                    out.insert(rel);
                }
            }
        }
    }
    walk(out1.path(), out1.path(), &mut on_disk);
    let listed: BTreeSet<String> = hashes(&m1).into_iter().map(|(p, _)| p).collect();
    assert_eq!(on_disk, listed, "manifest must list every emitted file");
    for (path, hash) in hashes(&m1) {
        let bytes = fs::read(out1.path().join(&path)).unwrap();
        assert_eq!(sha256_hex(&bytes), hash, "stale hash for {path}");
    }
}

#[test]
fn pipeline_counts_and_honors_the_hard_constraint() {
    let input = tempfile::tempdir().unwrap();
    let output = tempfile::tempdir().unwrap();
    write_clip(input.path(), "clip", &gradient_clip(9, 5));
    let cfg = PipelineConfig::default();
    synth_pairs(input.path(), output.path(), &cfg).unwrap();

    let bytes = fs::read(output.path().join("clip/nodither.gif")).unwrap();
    let doc = decode_gif(&bytes).unwrap();
    assert_eq!(doc.frames.len(), 5);

    // factor=1: frame count preserved, output requantizes to the input.
    let restored = restore_video(&doc, &cfg, None).unwrap();
    assert_eq!(restored.frames.len(), 5);
    let palette = doc.global_table.to_palette();
    for (restored_frame, gif_frame) in restored.frames.iter().zip(&doc.frames) {
        assert_eq!(quantize_indices(restored_frame, &palette), gif_frame.indices);
    }

    // factor=2 on 5 frames: (5-1)*2 + 1 = 9 frames.
    let cfg2 = PipelineConfig { interp_factor: 2, ..cfg };
    let restored2 = restore_video(&doc, &cfg2, None).unwrap();
    assert_eq!(restored2.frames.len(), 9);
    // Interpolation endpoints are the restored frames themselves.
    assert_eq!(restored2.frames[0], restored2.restored[0]);
    assert_eq!(restored2.frames[8], restored2.restored[4]);
}

#[test]
fn pipeline_beats_the_raw_gif_on_smooth_motion() {
    let truth = common::translation_clip(77, 5, 1, 64);
    let input = tempfile::tempdir().unwrap();
    let output = tempfile::tempdir().unwrap();
    write_clip(input.path(), "clip", &truth);
    let cfg = PipelineConfig::default();
    synth_pairs(input.path(), output.path(), &cfg).unwrap();

    let doc = decode_gif(&fs::read(output.path().join("clip/nodither.gif")).unwrap()).unwrap();
    let restored = restore_video(&doc, &cfg, None).unwrap();
    let gif_frames = doc.to_images();
    let mut gif_psnr = 0.0;
    let mut out_psnr = 0.0;
    for i in 0..truth.len() {
        gif_psnr += psnr(&gif_frames[i], &truth[i]).unwrap();
        out_psnr += psnr(&restored.frames[i], &truth[i]).unwrap();
    }
    assert!(
        out_psnr > gif_psnr,
        "restored {:.2} dB <= gif {:.2} dB",
        out_psnr / truth.len() as f64,
        gif_psnr / truth.len() as f64
    );
}

#[test]
fn eval_preserves_the_mean_invariant_and_rejects_short_clips() {
    let truth = common::translation_clip(5, 9, 1, 64);
    let cfg = PipelineConfig::default();
    let record = eval_clip("t", &truth, &cfg, 2).unwrap();
    assert_eq!(record.restored_frames.len(), 9);

    let recomputed: f64 = record.restored_frames.iter().map(|r| r.psnr).sum::<f64>()
        / record.restored_frames.len() as f64;
    assert!((record.restored_mean.psnr - recomputed).abs() < 1e-12);

    // 9 frames subsampled by 16 leaves a single frame.
    assert!(eval_clip("t", &truth, &cfg, 16).is_err());
}

#[test]
fn eval_sweep_with_no_factors_is_empty() {
    let input = tempfile::tempdir().unwrap();
    let output = tempfile::tempdir().unwrap();
    write_clip(input.path(), "clip", &gradient_clip(2, 4));
    let cfg = PipelineConfig::default();
    synth_pairs(input.path(), output.path(), &cfg).unwrap();
    let records = eval_sweep(output.path(), &cfg, &[]).unwrap();
    assert!(records.is_empty());
}

#[test]
fn quantization_grows_flat_regions() {
    let scene = common::gradient_scene(21, 64, 64);
    let palette = ungif_core::median_cut_palette(&scene, 8).unwrap();
    let (_, coverage_before) = flat_region_stats(&scene);
    let (count_after, coverage_after) = flat_region_stats(&quantize(&scene, &palette));
    assert!(
        coverage_after > coverage_before,
        "coverage {coverage_before:.3} -> {coverage_after:.3}"
    );
    assert!(count_after >= 1);
}

#[test]
fn auto_routing_picks_the_right_mode() {
    let input = tempfile::tempdir().unwrap();
    let output = tempfile::tempdir().unwrap();
    let clips: Vec<Vec<RgbImage>> = (0..6).map(|i| gradient_clip(40 + i, 4)).collect();
    for (i, clip) in clips.iter().enumerate() {
        write_clip(input.path(), &format!("c{i}"), clip);
    }
    let cfg = PipelineConfig::default();
    synth_pairs(input.path(), output.path(), &cfg).unwrap();

    // Fit a router on the synthesized frames.
    let mut pairs = Vec::new();
    for i in 0..6 {
        for (dir, label) in [
            ("nodither", ungif_core::DitherMode::NonDithered),
            ("dither", ungif_core::DitherMode::Dithered),
        ] {
            for frame in imageio::load_frames(&output.path().join(format!("c{i}/{dir}"))).unwrap() {
                pairs.push((ungif_core::extract_features(&frame).unwrap(), label));
            }
        }
    }
    let model = ungif_core::fit(&pairs).unwrap();

    let auto_cfg = PipelineConfig {
        dither: DitherChoice::Auto,
        model_path: Some("unused-by-library-path.json".into()),
        ..PipelineConfig::default()
    };
    for (gif, expected) in [
        ("c0/nodither.gif", ungif_core::DitherMode::NonDithered),
        ("c0/dither.gif", ungif_core::DitherMode::Dithered),
    ] {
        let doc = decode_gif(&fs::read(output.path().join(gif)).unwrap()).unwrap();
        let restored = restore_video(&doc, &auto_cfg, Some(&model)).unwrap();
        assert_eq!(restored.mode, expected, "{gif}");
    }
}
