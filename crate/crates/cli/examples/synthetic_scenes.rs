//! Writes synthetic scenes and matching saliency maps:
//! `cargo run -p saccade-cli --example synthetic_scenes -- OUT_DIR [COUNT] [SEED]`
//! produces `OUT_DIR/images/scene_NN.png` and `OUT_DIR/saliency/scene_NN.png`.

use std::path::PathBuf;

use rand::Rng;
use saccade_core::imagecore::save_png;
use saccade_core::rng::seeded_rng;
use saccade_core::{ImageBuffer, ScalarField};

const H: usize = 128;
const W: usize = 160;

struct Disc {
    x: f32,
    y: f32,
    r: f32,
    rgb: [f32; 3],
}

fn scene(seed: u64) -> (ImageBuffer, ScalarField) {
    let mut rng = seeded_rng(seed);
    let sky: [f32; 3] = [rng.random_range(0.3..0.7), rng.random_range(0.4..0.8), rng.random_range(0.6..0.95)];
    let ground: [f32; 3] = [rng.random_range(0.2..0.5), rng.random_range(0.3..0.6), rng.random_range(0.1..0.3)];
    let horizon = rng.random_range(0.45..0.7) * H as f32;
    let discs: Vec<Disc> = (0..6)
        .map(|_| Disc {
            x: rng.random_range(0.0..W as f32),
            y: rng.random_range(0.0..H as f32),
            r: rng.random_range(4.0..14.0),
            rgb: [rng.random(), rng.random(), rng.random()],
        })
        .collect();
    // The "object": a bright checkered disc, which also carries the saliency.
    let obj = Disc {
        x: rng.random_range(0.25..0.75) * W as f32,
        y: rng.random_range(0.3..0.7) * H as f32,
        r: rng.random_range(14.0..24.0),
        rgb: [rng.random_range(0.7..1.0), rng.random_range(0.1..0.4), rng.random_range(0.1..0.3)],
    };
    let img = ImageBuffer::from_fn(H, W, 3, |x, y, c| {
        let (xf, yf) = (x as f32, y as f32);
        let base = if yf < horizon { sky[c] * (0.8 + 0.2 * yf / horizon) } else { ground[c] * (1.0 + 0.1 * ((xf * 0.7).sin() * (yf * 0.9).cos())) };
        let mut v = base;
        for d in &discs {
            if (xf - d.x).hypot(yf - d.y) < d.r {
                v = d.rgb[c];
            }
        }
        let dist = (xf - obj.x).hypot(yf - obj.y);
        if dist < obj.r {
            let check = ((xf / 4.0).floor() + (yf / 4.0).floor()) as i32 % 2 == 0;
            v = if check { obj.rgb[c] } else { obj.rgb[c] * 0.4 };
        }
        v
    })
    .expect("valid shape");
    let sal = ScalarField::from_fn(H, W, |x, y| {
        let d2 = (x as f64 - obj.x as f64).powi(2) + (y as f64 - obj.y as f64).powi(2);
        (-d2 / (2.0 * (obj.r as f64).powi(2))).exp()
    })
    .expect("valid shape");
    (img, sal)
}

fn main() {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().expect("usage: synthetic_scenes OUT_DIR [COUNT] [SEED]"));
    let count: usize = args.next().map_or(4, |s| s.parse().expect("COUNT must be an integer"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("SEED must be an integer"));
    std::fs::create_dir_all(out.join("images")).expect("create images dir");
    std::fs::create_dir_all(out.join("saliency")).expect("create saliency dir");
    for i in 0..count {
        let (img, sal) = scene(seed.wrapping_mul(1000).wrapping_add(i as u64));
        save_png(&img, out.join("images").join(format!("scene_{i:02}.png"))).expect("write image");
        save_png(&sal.to_image(), out.join("saliency").join(format!("scene_{i:02}.png"))).expect("write saliency");
    }
}
