use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gmc::{gmc_from_field, Shape};
use crate::grid::GridField;
use crate::lfpp::{build_lfpp_graph, CellSet};

fn line() -> DistanceMatrix {
    DistanceMatrix::from_line(&[0.0, 1.0, 2.0])
}

/// Euclidean distances among random points of the unit square.
fn random_space(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    let pts: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random(), rng.random()))
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let x = (pts[i] - pts[j]).norm();
            d[i * n + j] = x;
            d[j * n + i] = x;
        }
    }
    DistanceMatrix::new(n, d).unwrap()
}

/// Independent oracle: breadth-first search over covered subsets.
fn min_cover_by_subset_bfs(m: &DistanceMatrix, eps: f64) -> usize {
    let n = m.len();
    let full = (1usize << n) - 1;
    let balls: Vec<usize> = (0..n).map(|c| m.ball_mask(c, eps) as usize).collect();
    let mut depth = vec![usize::MAX; 1 << n];
    depth[0] = 0;
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next = vec![];
        for s in frontier {
            for b in &balls {
                let t = s | b;
                if depth[t] == usize::MAX {
                    depth[t] = depth[s] + 1;
                    next.push(t);
                }
            }
        }
        frontier = next;
    }
    depth[full]
}

#[test]
fn three_points_on_a_line() {
    let m = line();
    let wide = greedy_cover(&m, 1.1).unwrap();
    assert_eq!((wide.count, wide.centers.clone()), (1, vec![1]));
    assert!(verify_cover(&m, &wide));
    assert_eq!(greedy_cover(&m, 0.6).unwrap().count, 3);
    assert_eq!(exact_cover_count(&m, 1.1).unwrap(), 1);
    assert_eq!(exact_cover_count(&m, 0.6).unwrap(), 3);
    let pack = maximal_packing(&m, 1.0).unwrap();
    assert_eq!(pack.centers, vec![0, 2]);
    assert_eq!(pack.method, CoverMethod::Packing);
}

#[test]
fn open_ball_sandwich_on_the_line() {
    // With open balls of radius 1 no ball holds both 0 and 2, so N_1 = 3.
    let m = line();
    let n1 = exact_cover_count(&m, 1.0).unwrap();
    assert_eq!(n1, 3);
    assert!(maximal_packing(&m, 1.0).unwrap().count <= n1);
    assert!(n1 <= maximal_packing(&m, 0.5).unwrap().count);
}

#[test]
fn exact_count_agrees_with_subset_bfs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let n = rng.random_range(1..=12);
        let m = random_space(&mut rng, n);
        let eps = rng.random_range(0.05..0.8);
        assert_eq!(
            exact_cover_count(&m, eps).unwrap(),
            min_cover_by_subset_bfs(&m, eps)
        );
    }
}

#[test]
fn greedy_is_bracketed_on_twelve_point_spaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut gaps = [0usize; 6];
    for _ in 0..1000 {
        let m = random_space(&mut rng, 12);
        let eps = rng.random_range(0.05..0.7);
        let greedy = greedy_cover(&m, eps).unwrap();
        let exact = exact_cover_count(&m, eps).unwrap();
        assert!(verify_cover(&m, &greedy));
        assert!(greedy.count >= exact);
        assert!(greedy.count <= maximal_packing(&m, eps / 2.0).unwrap().count);
        gaps[(greedy.count - exact).min(5)] += 1;
    }
    // the two-seed greedy is usually optimal on small spaces
    assert!(gaps[0] > 500, "gap histogram {gaps:?}");
}

#[test]
fn packing_cover_sandwich_on_small_spaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let n = rng.random_range(1..=EXACT_COVER_MAX);
        let m = random_space(&mut rng, n);
        let eps = rng.random_range(0.02..0.6);
        let cover = exact_cover_count(&m, eps).unwrap();
        assert!(maximal_packing(&m, eps).unwrap().count <= cover);
        assert!(cover <= maximal_packing(&m, eps / 2.0).unwrap().count);
    }
}

#[test]
fn exact_cover_is_subadditive_and_monotone_in_eps() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let m = random_space(&mut rng, 10);
        let eps = rng.random_range(0.05..0.5);
        let whole = exact_cover_count(&m, eps).unwrap();
        assert!(exact_cover_count(&m, 1.5 * eps).unwrap() <= whole);
        let split = rng.random_range(1..9);
        let sub = |idx: Vec<usize>| {
            let k = idx.len();
            let d = (0..k * k).map(|t| m.get(idx[t / k], idx[t % k])).collect();
            DistanceMatrix::new(k, d).unwrap()
        };
        let a = exact_cover_count(&sub((0..split).collect()), eps).unwrap();
        let b = exact_cover_count(&sub((split..10).collect()), eps).unwrap();
        assert!(whole <= a + b);
    }
}

#[test]
fn exact_cover_refuses_large_sets() {
    let m = DistanceMatrix::from_line(&(0..16).map(f64::from).collect::<Vec<_>>());
    assert!(exact_cover_count(&m, 1.0).is_err());
}

#[test]
fn empty_set_needs_no_balls() {
    let spec = GridSpec::centered(8, 1.0).unwrap();
    let g = WeightedGrid::flat(spec);
    let empty = CellSet::from_mask(spec, vec![false; 64]);
    assert_eq!(
        greedy_cover(&GridSet::new(&g, &empty).unwrap(), 0.3)
            .unwrap()
            .count,
        0
    );
}

#[test]
fn grid_sets_match_their_distance_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = GridSpec::centered(12, 1.0).unwrap();
    let w = (0..spec.len())
        .map(|_| rng.random_range(0.3..3.0))
        .collect();
    let g = WeightedGrid::from_weights(spec, 1.0, spec.delta(), w).unwrap();
    let cells: Vec<usize> = (0..12).map(|k| spec.index(k, (k * 7) % 12)).collect();
    let mut mask = vec![false; spec.len()];
    for &c in &cells {
        mask[c] = true;
    }
    let set = CellSet::from_mask(spec, mask);
    let grid_set = GridSet::new(&g, &set).unwrap();
    let matrix = DistanceMatrix::from_cells(&g, grid_set.cells()).unwrap();
    for eps in [0.2, 0.4, 0.8] {
        let greedy = greedy_cover(&grid_set, eps).unwrap();
        assert!(verify_cover(&grid_set, &greedy));
        assert!(greedy.count >= exact_cover_count(&matrix, eps).unwrap());
        assert!(greedy.count <= maximal_packing(&grid_set, eps / 2.0).unwrap().count);
    }
}

#[test]
fn boundary_neighborhood_of_a_flat_square() {
    let spec = GridSpec::new(16, 1.0, Complex64::new(0.0, 0.0)).unwrap();
    let g = WeightedGrid::flat(spec);
    let inside = |i: usize| {
        let (c, r) = spec.col_row(i);
        (3..13).contains(&c) && (3..13).contains(&r)
    };
    let square = CellSet::from_mask(spec, (0..spec.len()).map(inside).collect());
    let frame = boundary_neighborhood(&square, &g, 1.5).unwrap();
    // hand enumeration: the outer ring and every cell one king step inside it
    for i in 0..spec.len() {
        let (c, r) = spec.col_row(i);
        let expected = inside(i) && [c, 15 - c, r, 15 - r].into_iter().min().unwrap() <= 4;
        assert_eq!(frame.mask[i], expected, "cell ({c},{r})");
    }
    let all = boundary_neighborhood(&square, &g, 100.0).unwrap();
    assert_eq!(all.mask, square.mask);
}

#[test]
fn interior_and_boundary_counts_sandwich_the_cover() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spec = GridSpec::new(10, 1.0, Complex64::new(0.0, 0.0)).unwrap();
    for _ in 0..30 {
        let w = (0..spec.len())
            .map(|_| rng.random_range(0.5..2.0))
            .collect();
        let g = WeightedGrid::from_weights(spec, 1.0, 1.0, w).unwrap();
        // a 3×5 block: 15 cells, small enough for the exact oracle
        let (c0, r0) = (rng.random_range(1..6), rng.random_range(1..4));
        let mask = (0..spec.len())
            .map(|i| {
                let (c, r) = spec.col_row(i);
                (c0..c0 + 3).contains(&c) && (r0..r0 + 5).contains(&r)
            })
            .collect();
        let set = CellSet::from_mask(spec, mask);
        let eps = rng.random_range(0.6..2.5);
        let rim = boundary_neighborhood(&set, &g, eps).unwrap();
        let core: Vec<usize> = set.cells().filter(|&i| !rim.mask[i]).collect();
        let rim_cells: Vec<usize> = rim.cells().collect();
        let count = |cells: &[usize]| {
            exact_cover_count(&DistanceMatrix::from_cells(&g, cells).unwrap(), eps).unwrap()
        };
        let whole = count(&set.cells().collect::<Vec<_>>());
        let interior = count(&core);
        assert!(whole <= interior + count(&rim_cells));
        assert!(interior <= whole, "interior {interior} > whole {whole}");
    }
}

#[test]
fn dimension_of_exact_power_law() {
    let counts: Vec<(f64, f64)> = (1..6)
        .map(|k| {
            let e = 0.5f64.powi(k);
            (e, e.powi(-2))
        })
        .collect();
    let fit = dimension_fit(&counts).unwrap();
    assert!((fit.slope - 2.0).abs() < 1e-12);
    assert!(fit.stderr < 1e-12);
    assert!(dimension_fit(&counts[..2]).is_err());
}

#[test]
fn flat_square_has_box_dimension_two() {
    let spec = GridSpec::centered(512, 1.0).unwrap();
    let g = WeightedGrid::flat(spec);
    let square = Shape::Square {
        center: Complex64::new(0.0, 0.0),
        half_side: 0.25,
    }
    .rasterize(&spec);
    let set = GridSet::new(&g, &square).unwrap();
    let eps: Vec<f64> = (1..5).map(|k| spec.delta() * 2f64.powi(k)).collect();
    let covers = greedy_cover_levels(&set, &eps).unwrap();
    let fit = dimension_fit(
        &covers
            .iter()
            .map(|c| (c.eps, c.count as f64))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    assert!((fit.slope - 2.0).abs() < 0.1, "slope {}", fit.slope);
}

#[test]
fn flat_balls_grow_quadratically() {
    let spec = GridSpec::centered(128, 1.0).unwrap();
    let f = GridField::constant(spec, 0.0);
    let mu = gmc_from_field(&f, 1.0, spec.delta()).unwrap();
    let g = build_lfpp_graph(&f, 0.25, spec.delta()).unwrap();
    let centers = [spec.index(64, 64), spec.index(50, 70), spec.index(5, 5)];
    let radii: Vec<f64> = (0..4).map(|k| 2.0 * spec.delta() * 2f64.powi(k)).collect();
    let rep = ball_volume_scaling(&mu, &g, &centers, &radii).unwrap();
    assert_eq!(rep.dropped, vec![spec.index(5, 5)]);
    assert!((rep.fit.slope - 2.0).abs() < 0.1, "slope {}", rep.fit.slope);
}

#[test]
fn ball_exponent_is_invariant_under_simultaneous_rescaling() {
    let spec = GridSpec::centered(64, 1.0).unwrap();
    let f = crate::field::sample_gff_spectral(spec, 3).unwrap();
    let (gamma, xi, c) = (1.2, 0.4, 0.8);
    let centers = [spec.index(30, 30), spec.index(34, 28)];
    let radii: Vec<f64> = (0..4).map(|k| 0.02 * 2f64.powi(k)).collect();
    let base = ball_volume_scaling(
        &gmc_from_field(&f, gamma, spec.delta()).unwrap(),
        &build_lfpp_graph(&f, xi, spec.delta()).unwrap(),
        &centers,
        &radii,
    )
    .unwrap();
    let shifted = f.shifted(c);
    let scaled_radii: Vec<f64> = radii.iter().map(|r| r * (xi * c).exp()).collect();
    let moved = ball_volume_scaling(
        &gmc_from_field(&shifted, gamma, spec.delta()).unwrap(),
        &build_lfpp_graph(&shifted, xi, spec.delta()).unwrap(),
        &centers,
        &scaled_radii,
    )
    .unwrap();
    assert!((base.fit.slope - moved.fit.slope).abs() <= base.fit.stderr.max(1e-9));
    for (a, b) in base
        .volumes
        .iter()
        .flatten()
        .zip(moved.volumes.iter().flatten())
    {
        assert!((b / a / (gamma * c).exp() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn single_region_has_zero_spread() {
    let spec = GridSpec::centered(64, 1.0).unwrap();
    let f = crate::field::sample_gff_spectral(spec, 1).unwrap();
    let sq = [Shape::Square {
        center: Complex64::new(0.0, 0.0),
        half_side: 0.2,
    }];
    let t = content_ratio_experiment(&f, 1.0, 3.0, &sq, &[0.05, 0.1, 0.2], spec.delta()).unwrap();
    assert!(t.cv.iter().all(|&c| c == 0.0));
}

#[test]
fn flat_congruent_squares_have_equal_ratios() {
    let spec = GridSpec::centered(128, 1.0).unwrap();
    let f = GridField::constant(spec, 0.0);
    let h = 0.125;
    let squares: Vec<Shape> = [(-h, -h), (h, -h), (-h, h), (h, h)]
        .iter()
        .map(|&(x, y)| Shape::Square {
            center: Complex64::new(x, y),
            half_side: h,
        })
        .collect();
    let eps: Vec<f64> = (1..4).map(|k| spec.delta() * 2f64.powi(k)).collect();
    let t = content_ratio_experiment(&f, 1.0, 3.0, &squares, &eps, spec.delta()).unwrap();
    assert!(t.cv.iter().all(|&c| c <= 1e-6), "{:?}", t.cv);
}

#[test]
fn content_ratio_refuses_regions_outside_inner_half() {
    let spec = GridSpec::centered(64, 1.0).unwrap();
    let f = GridField::constant(spec, 0.0);
    let far = [Shape::Disk {
        center: Complex64::new(0.8, 0.0),
        radius: 0.1,
    }];
    assert!(content_ratio_experiment(&f, 1.0, 3.0, &far, &[0.1, 0.2, 0.4], spec.delta()).is_err());
}

#[test]
fn rescaling_of_exact_power_law() {
    let eps: Vec<f64> = (3..8).map(|k| 0.5f64.powi(k)).collect();
    let counts = vec![eps.iter().map(|e| e.powi(-3)).collect::<Vec<_>>(); 20];
    let rc = estimate_rescaling_coefficients(&eps, &counts).unwrap();
    assert!((rc.delta_dim - 3.0).abs() < 1e-12);
    assert!((rc.c2 / rc.c1 - 1.0).abs() < 1e-9);
    assert!(!rc.ratio_tests.is_empty());
    for t in &rc.ratio_tests {
        assert!((t.observed - t.r.powi(-3)).abs() < 1e-12);
    }
    assert!(estimate_rescaling_coefficients(&eps, &counts[..19]).is_err());
    assert!(
        estimate_rescaling_coefficients(&eps[..3], &vec![counts[0][..3].to_vec(); 20]).is_err()
    );
}

#[test]
fn slowly_varying_factor_cancels_in_ratios() {
    let eps: Vec<f64> = (2..14).map(|k| 0.5f64.powi(k)).collect();
    let counts = vec![
        eps.iter()
            .map(|e| e.powi(-3) * (1.0 / e).ln())
            .collect::<Vec<_>>();
        20
    ];
    let rc = estimate_rescaling_coefficients(&eps, &counts).unwrap();
    let halving: Vec<&RatioTest> = rc.ratio_tests.iter().filter(|t| t.r == 2.0).collect();
    let err = |t: &RatioTest| (t.observed / 0.125 - 1.0).abs();
    let (coarse, fine) = (halving[0], halving[halving.len() - 1]);
    assert!(fine.eps < coarse.eps);
    assert!(err(fine) < err(coarse));
    assert!(err(fine) < 0.1);
}
