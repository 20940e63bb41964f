mod common;

use common::*;
use lesiondist::detection::{local_maxima, window_max, DetectionSet, NMS_RADIUS};
use lesiondist::distance::{
    dijkstra_oracle, distance_transform, DistanceKind, Spacing, TransformOptions,
};
use lesiondist::eval::{froc, match_points, ImageCase, SensitivityMode};
use lesiondist::grid::{Coord, DotSet, VoxelGrid};
use lesiondist::normalize::normalize_map;
use lesiondist::shift::{shift_dots, ShiftConfig};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn kind() -> impl Strategy<Value = DistanceKind> {
    prop_oneof![
        Just(DistanceKind::Geodesic),
        Just(DistanceKind::Intensity),
        Just(DistanceKind::Euclidean)
    ]
}

/// 2D image with 1–3 dots.
fn instance_2d(max: usize) -> impl Strategy<Value = (VoxelGrid, DotSet)> {
    (1..=max, 1..=max)
        .prop_flat_map(|(h, w)| {
            let n = h * w;
            (
                Just((h, w)),
                proptest::collection::vec(0.0f32..1.0, n),
                subsequence((0..n).collect::<Vec<_>>(), 1..=n.min(3)),
            )
        })
        .prop_map(|((h, w), data, idx)| {
            let g = VoxelGrid::new(&[h, w], data).unwrap();
            let dots = DotSet::new(2, idx.into_iter().map(|i| g.coord(i)).collect()).unwrap();
            (g, dots)
        })
}

fn close(a: f32, b: f32, rel: f64) -> bool {
    (a as f64 - b as f64).abs() <= rel * (a.abs().max(b.abs()) as f64).max(1e-12)
}

fn dm(g: &VoxelGrid, d: &DotSet, k: DistanceKind) -> Vec<f32> {
    distance_transform(g, d, k, &TransformOptions::default())
        .unwrap()
        .values()
        .to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scan_equals_oracle_with_anisotropic_spacing(
        (g, d) in instance_2d(12), k in kind(), sy in 0.25f64..3.0, sx in 0.25f64..3.0,
    ) {
        let spacing = Spacing::new(&[sy, sx]).unwrap();
        let opts = TransformOptions { spacing, ..Default::default() };
        let scan = distance_transform(&g, &d, k, &opts).unwrap();
        let oracle = dijkstra_oracle(&g, &d, k, &spacing).unwrap();
        for (a, b) in scan.values().iter().zip(oracle.values()) {
            prop_assert!(close(*a, *b, 1e-6), "{a} vs {b}");
        }
    }

    #[test]
    fn dots_are_zero_and_values_nonnegative((g, d) in instance_2d(14), k in kind()) {
        let m = dm(&g, &d, k);
        prop_assert!(m.iter().all(|&v| v >= 0.0 && v.is_finite()));
        for c in d.iter() {
            prop_assert_eq!(m[g.index(*c)], 0.0);
        }
    }

    #[test]
    fn adding_a_dot_never_increases_distance((g, d) in instance_2d(12), k in kind(), extra in any::<prop::sample::Index>()) {
        let c = g.coord(extra.index(g.len()));
        prop_assume!(!d.coords().contains(&c));
        let mut more = d.coords().to_vec();
        more.push(c);
        let more = DotSet::new(2, more).unwrap();
        let before = dm(&g, &d, k);
        let after = dm(&g, &more, k);
        for (a, b) in after.iter().zip(&before) {
            prop_assert!(*a <= *b * (1.0 + 1e-6) + 1e-12);
        }
    }

    #[test]
    fn intensity_distance_scales_with_contrast((g, d) in instance_2d(12), exp in -4i32..=4) {
        // powers of two scale every intermediate exactly
        let scale = 2f32.powi(exp);
        let scaled = g.map(|v| v * scale).unwrap();
        let base = dm(&g, &d, DistanceKind::Intensity);
        let out = dm(&scaled, &d, DistanceKind::Intensity);
        for (a, b) in out.iter().zip(&base) {
            prop_assert_eq!(*a, *b * scale);
        }
    }

    #[test]
    fn mirrored_input_gives_mirrored_map((g, d) in instance_2d(12), k in kind()) {
        let w = g.width();
        let flip = |c: Coord| Coord::yx(c.y, w - 1 - c.x);
        let gm = VoxelGrid::from_fn(g.dims(), |c| g.get(flip(c))).unwrap();
        let dmir = DotSet::new(2, d.iter().map(|&c| flip(c)).collect()).unwrap();
        let base = dm(&g, &d, k);
        let mir = dm(&gm, &dmir, k);
        for (i, b) in base.iter().enumerate() {
            let c = g.coord(i);
            prop_assert!(close(mir[gm.index(flip(c))], *b, 1e-6));
        }
    }

    #[test]
    fn higher_decay_never_raises_the_target((g, d) in instance_2d(14), k in kind(), p in 0.5f64..9.0, dp in 0.1f64..5.0) {
        let m = distance_transform(&g, &d, k, &TransformOptions::default()).unwrap();
        let lo = normalize_map(&m, p).unwrap();
        let hi = normalize_map(&m, p + dp).unwrap();
        for (a, b) in hi.grid.data().iter().zip(lo.grid.data()) {
            prop_assert!(a <= b);
            prop_assert!((0.0..=1.0).contains(a));
        }
    }

    #[test]
    fn local_maxima_are_window_maxima(h in 1usize..20, w in 1usize..20, levels in 1u32..6, seed in any::<u64>()) {
        // few distinct levels so that plateaus are common
        let mut r = rng(seed);
        use rand::Rng;
        let map = VoxelGrid::from_fn(&[h, w], |_| r.random_range(0..levels) as f32).unwrap();
        let wmax = window_max(&map, NMS_RADIUS);
        let dets = local_maxima(&map).unwrap();
        prop_assert!(!dets.is_empty());
        let mut seen = std::collections::HashSet::new();
        for det in dets.iter() {
            let i = map.index(det.coord);
            prop_assert_eq!(det.score, map.data()[i]);
            prop_assert_eq!(wmax[i], map.data()[i]);
            prop_assert!(seen.insert(det.coord));
        }
        // the global maximum is always represented
        prop_assert_eq!(dets.as_slice()[0].score, map.max());
        let shifted = map.map(|v| v + 3.0).unwrap();
        prop_assert_eq!(local_maxima(&shifted).unwrap().coords(), dets.coords());
    }

    #[test]
    fn matching_conserves_counts(n in 0usize..8, m in 0usize..8, seed in any::<u64>(), radius in 0.0f64..10.0) {
        let mut r = rng(seed);
        let dets = random_points(&mut r, n, 16);
        let annots = distinct_points(&mut r, m, 16);
        let res = match_points(&dets, &annots, radius);
        prop_assert_eq!(res.true_positives + res.false_negatives, m);
        prop_assert_eq!(res.true_positives + res.false_positives, n);
        prop_assert!(res.pairs.iter().all(|p| p.distance <= radius));
        if n <= 5 && m <= 5 {
            prop_assert_eq!(res.true_positives, brute_force_matching(&dets, &annots, radius).0);
        }
    }

    #[test]
    fn froc_is_monotone_bounded_and_order_free(seed in any::<u64>(), images in 1usize..6, rot in 0usize..6) {
        let mut r = rng(seed);
        use rand::Rng;
        let cases: Vec<ImageCase> = (0..images)
            .map(|_| {
                let nd = r.random_range(0..10);
                let na = r.random_range(0..5);
                ImageCase {
                    candidates: random_candidates(&mut r, nd, 20),
                    annotations: DotSet::new(2, distinct_points(&mut r, na, 20)).unwrap(),
                }
            })
            .collect();
        prop_assume!(cases.iter().any(|c| !c.annotations.is_empty()));
        for mode in [SensitivityMode::Pooled, SensitivityMode::PerImage] {
            let curve = froc(&cases, 6.0, 10.0, mode).unwrap();
            prop_assert!((0.0..=100.0).contains(&curve.fauc));
            for w in curve.points.windows(2) {
                prop_assert!(w[1].fp_avg >= w[0].fp_avg && w[1].sensitivity >= w[0].sensitivity);
            }
            let mut rotated = cases.clone();
            rotated.rotate_left(rot % images);
            prop_assert_eq!(froc(&rotated, 6.0, 10.0, mode).unwrap(), curve.clone());
            let full = curve.points.iter().any(|p| p.fp_avg == 0.0 && p.sensitivity == 1.0);
            prop_assert_eq!(curve.fauc == 100.0, full);
        }
    }

    #[test]
    fn shifted_dots_stay_close((g, d) in instance_2d(16), radius in 1.0f64..4.0) {
        let cfg = ShiftConfig { radius, ..Default::default() };
        let out = shift_dots(&g, &d, &cfg).unwrap();
        prop_assert!(out.dots.len() <= d.len());
        prop_assert!(out.dots.check_bounds(&g).is_ok());
        for moved in out.dots.iter() {
            let nearest = d.iter().map(|o| o.distance(moved)).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest <= radius + 1e-12);
        }
    }
}

#[test]
fn empty_detection_sets_give_zero_area() {
    let cases = vec![ImageCase {
        candidates: DetectionSet::default(),
        annotations: DotSet::from_yx(&[(1, 1)]).unwrap(),
    }];
    assert_eq!(
        froc(&cases, 6.0, 10.0, SensitivityMode::Pooled)
            .unwrap()
            .fauc,
        0.0
    );
}
