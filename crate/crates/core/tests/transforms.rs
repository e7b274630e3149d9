use proptest::prelude::*;
use rand::Rng;
use saccade_core::cortmagnif::{build_grid, magnify_direct, magnify_with_transform, RadialTransform};
use saccade_core::fovblur::{belt_masks, foveate_blur, FovBlurParams};
use saccade_core::imagecore::{remap, ImageBuffer};
use saccade_core::rng::seeded_rng;
use saccade_core::FixationPoint;

fn noise_image(seed: u64, h: usize, w: usize) -> ImageBuffer {
    let mut rng = seeded_rng(seed);
    ImageBuffer::from_fn(h, w, 3, |_, _, _| rng.random::<f32>()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn masks_partition_unity(fx in 0.0f64..47.0, fy in 0.0f64..31.0, e0 in 0.5f64..10.0, ratio in 1.5f64..20.0, n in 1usize..9) {
        let stack = belt_masks((32, 48), FixationPoint::new(fx, fy), e0, e0 * ratio, n, 0.06).unwrap();
        prop_assert!(stack.max_partition_error() < 1e-9);
        for m in &stack.masks {
            prop_assert!(m.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn foveated_output_in_range_and_fovea_kept(seed in 0u64..500) {
        let img = noise_image(seed, 24, 24);
        let mut rng = seeded_rng(seed + 1);
        let fix = FixationPoint::new(rng.random_range(0.0..23.0), rng.random_range(0.0..23.0));
        let (out, s) = foveate_blur(&img, fix, &FovBlurParams::default(), &mut rng).unwrap();
        prop_assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        // The pixel nearest the fixation sits well inside the fovea.
        let (px, py) = (fix.x.round() as usize, fix.y.round() as usize);
        if s.e_0 > 1.0 {
            for c in 0..3 {
                prop_assert!((out.get(px, py, c) - img.get(px, py, c)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn grid_warp_matches_direct(seed in 0u64..500, c in 0.3f64..4.0, r_fov in 2.0f64..40.0, kt in -0.95f64..3.0) {
        let img = noise_image(seed, 20, 28);
        let t = RadialTransform::new(c, kt * r_fov, r_fov).unwrap();
        let fix = FixationPoint::new(13.5, 9.25);
        let a = magnify_with_transform(&img, fix, &t, (17, 23)).unwrap();
        prop_assert_eq!(a.data(), &magnify_direct(&img, fix, &t, (17, 23))[..]);
    }
}

#[test]
fn identity_warp_is_bit_exact() {
    for seed in 0..10 {
        let img = noise_image(seed, 31, 31);
        let t = RadialTransform::new(1.0, 20.0, 30.0).unwrap();
        let out = magnify_with_transform(&img, FixationPoint::center(31, 31), &t, (31, 31)).unwrap();
        assert_eq!(out, img);
    }
}

#[test]
fn remap_of_grid_equals_warp() {
    let img = noise_image(5, 16, 16);
    let t = RadialTransform::new(1.7, -3.0, 6.0).unwrap();
    let fix = FixationPoint::new(4.0, 11.0);
    let grid = build_grid(fix, &t, (12, 12)).unwrap();
    assert_eq!(remap(&img, &grid), magnify_with_transform(&img, fix, &t, (12, 12)).unwrap());
}
