//! Flow estimation and frame synthesis on translation fixtures with known
//! ground truth.

mod common;

use ungif_core::{
    estimate_flow, psnr, synthesize_frame, synthesize_frame_real, FlowField, FlowParams, RgbImage,
};

fn central_mean_flow(flow: &FlowField) -> (f64, f64) {
    let (w, h) = (flow.width(), flow.height());
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for y in h / 4..3 * h / 4 {
        for x in w / 4..3 * w / 4 {
            let v = flow.get(x, y);
            sx += v[0];
            sy += v[1];
            n += 1;
        }
    }
    (sx / n as f64, sy / n as f64)
}

fn central_crop(img: &RgbImage) -> RgbImage {
    let (w, h) = (img.width(), img.height());
    common::crop(img, w / 4, h / 4, w / 2, h / 2)
}

#[test]
fn translation_is_recovered() {
    let master = common::smooth_texture(2024, 96, 96);
    let i0 = common::crop(&master, 8, 8, 64, 64);
    let i1 = common::crop(&master, 6, 8, 64, 64);
    let params = FlowParams::default();

    let forward = estimate_flow(&i0, &i1, &params).unwrap();
    let (mx, my) = central_mean_flow(&forward);
    assert!(
        (mx - 2.0).abs() < 0.5 && my.abs() < 0.5,
        "forward mean flow ({mx:.3}, {my:.3}), want (2, 0)"
    );

    let backward = estimate_flow(&i1, &i0, &params).unwrap();
    let (mx, my) = central_mean_flow(&backward);
    assert!(
        (mx + 2.0).abs() < 0.5 && my.abs() < 0.5,
        "backward mean flow ({mx:.3}, {my:.3}), want (-2, 0)"
    );
}

#[test]
fn midpoint_synthesis_matches_ground_truth() {
    let master = common::smooth_texture(7, 96, 96);
    let i0 = common::crop(&master, 8, 8, 64, 64);
    let mid = common::crop(&master, 7, 8, 64, 64);
    let i1 = common::crop(&master, 6, 8, 64, 64);
    let params = FlowParams::default();

    let f01 = estimate_flow(&i0, &i1, &params).unwrap();
    let f10 = estimate_flow(&i1, &i0, &params).unwrap();
    let synth = synthesize_frame(&i0, &i1, &f01, &f10, 0.5).unwrap();

    let db = psnr(&central_crop(&synth), &central_crop(&mid)).unwrap();
    assert!(db >= 30.0, "midpoint PSNR {db:.2} dB");
}

#[test]
fn endpoints_are_exact_before_rounding() {
    let master = common::smooth_texture(99, 96, 96);
    let i0 = common::crop(&master, 8, 8, 48, 48);
    let i1 = common::crop(&master, 6, 8, 48, 48);
    let mut f01 = FlowField::zeros(48, 48);
    let mut f10 = FlowField::zeros(48, 48);
    for y in 0..48 {
        for x in 0..48 {
            f01.set(x, y, [2.0, 0.0]);
            f10.set(x, y, [-2.0, 0.0]);
        }
    }

    let at0 = synthesize_frame_real(&i0, &i1, &f01, &f10, 0.0).unwrap();
    for (out, src) in at0.pixels().iter().zip(i0.pixels()) {
        for ch in 0..3 {
            assert!((out[ch] - src[ch] as f64).abs() <= 1e-6);
        }
    }
    let at1 = synthesize_frame_real(&i0, &i1, &f01, &f10, 1.0).unwrap();
    for (out, src) in at1.pixels().iter().zip(i1.pixels()) {
        for ch in 0..3 {
            assert!((out[ch] - src[ch] as f64).abs() <= 1e-6);
        }
    }
}

#[test]
fn synthesis_is_time_symmetric() {
    let master = common::smooth_texture(55, 96, 96);
    let i0 = common::crop(&master, 8, 8, 48, 48);
    let i1 = common::crop(&master, 6, 9, 48, 48);
    let params = FlowParams::default();
    let f01 = estimate_flow(&i0, &i1, &params).unwrap();
    let f10 = estimate_flow(&i1, &i0, &params).unwrap();

    for t in [0.25, 0.5, 0.75] {
        let a = synthesize_frame_real(&i0, &i1, &f01, &f10, t).unwrap();
        let b = synthesize_frame_real(&i1, &i0, &f10, &f01, 1.0 - t).unwrap();
        let mut max = 0.0f64;
        for (pa, pb) in a.pixels().iter().zip(b.pixels()) {
            for ch in 0..3 {
                max = max.max((pa[ch] - pb[ch]).abs());
            }
        }
        assert!(max <= 1e-4, "t={t}: max channel difference {max:e}");
    }
}
