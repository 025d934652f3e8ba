//! Monte-Carlo checks of the samplers, the measure and the distance bound.

use lqg_core::field::{
    circle_average, covariance_g, lattice_covariance, radial_lateral_decompose,
    sample_cone_profile, ExactGffSampler, SpectralGffSampler, PROFILE_DT,
};
use lqg_core::gmc::{coordinate_change_check, default_battery, gmc_from_field, measure_of, Shape};
use lqg_core::lfpp::circle_average_distance_bound;
use lqg_core::stats::{mean, median, std_error, variance};
use lqg_core::GridSpec;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Mean of `x·y` with its standard error, for centered `x`, `y`.
fn product_moment(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(xs), mean(ys));
    let p: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .collect();
    (mean(&p), std_error(&p))
}

#[test]
fn exact_sampler_covariance_and_means() {
    // Cells centered at 0.3 and 0.4, two spacings apart.
    let spec = GridSpec::new(16, 0.05, c(0.275, 0.025)).unwrap();
    let (a, b) = (spec.index(8, 7), spec.index(10, 7));
    assert!((spec.center(a) - c(0.3, 0.0)).norm() < 1e-12);
    assert!((spec.center(b) - c(0.4, 0.0)).norm() < 1e-12);
    let sampler = ExactGffSampler::new(spec).unwrap();
    let draws = 100_000;
    let mut sums = vec![0.0; spec.len()];
    let mut sq = vec![0.0; spec.len()];
    let (mut xs, mut ys) = (Vec::with_capacity(draws), Vec::with_capacity(draws));
    for seed in 0..draws as u64 {
        let f = sampler.sample(seed);
        for (k, v) in f.values.iter().enumerate() {
            sums[k] += v;
            sq[k] += v * v;
        }
        xs.push(f.values[a]);
        ys.push(f.values[b]);
    }
    let (cov, se) = product_moment(&xs, &ys);
    let g = covariance_g(c(0.3, 0.0), c(0.4, 0.0)).unwrap();
    assert!((g - 10f64.ln()).abs() < 1e-12);
    assert!((cov - g).abs() < 3.0 * se, "cov {cov} vs {g} (se {se})");

    // One z-score per cell: 256 of them, so the family-wise level of a
    // per-cell 3-sigma band is too loose to ask for. Use the Bonferroni
    // equivalent of 3 sigma instead.
    let n = draws as f64;
    let worst = (0..spec.len())
        .map(|k| {
            let m = sums[k] / n;
            let var = (sq[k] / n - m * m) * n / (n - 1.0);
            (m / (var / n).sqrt()).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 4.4, "largest cell-mean z-score {worst}");
}

#[test]
fn spectral_sampler_matches_the_exact_covariance() {
    let spec = GridSpec::centered(64, 1.0).unwrap();
    let sampler = SpectralGffSampler::new(spec).unwrap();
    let n = spec.n();
    let pairs: Vec<(usize, usize)> = (0..40)
        .map(|k| {
            let u = spec.index((7 * k + 3) % n, (11 * k + 5) % n);
            let v = spec.index((13 * k + 29) % n, (5 * k + 41) % n);
            (u, v)
        })
        .filter(|&(u, v)| (spec.center(u) - spec.center(v)).norm() >= 4.0 * spec.delta())
        .collect();
    assert!(pairs.len() > 30);
    let draws = 20_000;
    let samples: Vec<Vec<f64>> = (0..draws)
        .map(|s| {
            let f = sampler.sample(s);
            pairs
                .iter()
                .flat_map(|&(u, v)| [f.values[u], f.values[v]])
                .collect()
        })
        .collect();
    for (p, &(u, v)) in pairs.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[2 * p]).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s[2 * p + 1]).collect();
        let (cov, _) = product_moment(&xs, &ys);
        let want = lattice_covariance(spec.center(u), spec.center(v), spec.delta());
        assert!((cov - want).abs() < 0.1, "pair {u},{v}: {cov} vs {want}");
    }
}

#[test]
fn circle_average_increments_have_brownian_variance() {
    let spec = GridSpec::centered(256, 2.0).unwrap();
    let sampler = SpectralGffSampler::new(spec).unwrap();
    // Radii down to e^{-2}, about nine lattice spacings. Closer to the
    // lattice the bilinear quadrature smooths the field and the variance
    // falls short (by 14% at three spacings).
    let times: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
    let mut values = vec![vec![]; times.len()];
    let mut unit = vec![];
    for seed in 0..2000 {
        let f = sampler.sample(seed);
        for (k, t) in times.iter().enumerate() {
            values[k].push(circle_average(&f, c(0.0, 0.0), (-t).exp()).unwrap());
        }
        unit.push(values[0][values[0].len() - 1]);
    }
    for (i, j) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
        let inc: Vec<f64> = values[j]
            .iter()
            .zip(&values[i])
            .map(|(b, a)| b - a)
            .collect();
        let s = times[j] - times[i];
        let v = variance(&inc);
        assert!(
            (v / s - 1.0).abs() < 0.1,
            "Var over [{}, {}] is {v}",
            times[i],
            times[j]
        );
    }
    // h_1(0) = 0 normalization.
    assert!(
        mean(&unit).abs() < 3.0 * std_error(&unit).max(1e-3),
        "unit-circle mean {}",
        mean(&unit)
    );
}

#[test]
fn radial_and_lateral_parts_are_uncorrelated() {
    let spec = GridSpec::centered(256, 2.0).unwrap();
    let sampler = SpectralGffSampler::new(spec).unwrap();
    let cell = spec.nearest_cell(c(0.35, -0.2));
    let (mut radial, mut lateral) = (vec![], vec![]);
    for seed in 0..1500 {
        let parts = radial_lateral_decompose(&sampler.sample(10_000 + seed)).unwrap();
        radial.push(parts.radial_at(0.5));
        lateral.push(parts.lateral.values[cell]);
    }
    let (cov, se) = product_moment(&radial, &lateral);
    assert!(cov.abs() < 3.0 * se, "cov {cov}, se {se}");
}

#[test]
fn cone_profile_has_drift_gamma() {
    let gamma = 1.2;
    let ts = [0.5, 1.0, 2.0, 3.0];
    let mut rows = vec![vec![]; ts.len()];
    for seed in 0..3000 {
        let p = sample_cone_profile(gamma, 0.5, 3.0, PROFILE_DT, seed).unwrap();
        for (k, &t) in ts.iter().enumerate() {
            rows[k].push(p.at(t) - gamma * t);
        }
    }
    for (k, row) in rows.iter().enumerate() {
        assert!(
            mean(row).abs() < 3.0 * std_error(row),
            "t={}: mean {}",
            ts[k],
            mean(row)
        );
        assert!((variance(row) / ts[k] - 1.0).abs() < 0.1);
    }
}

#[test]
fn measure_is_consistent_across_mollification_scales() {
    let spec = GridSpec::centered(256, 2.0).unwrap();
    let sampler = SpectralGffSampler::new(spec).unwrap();
    let square = Shape::Square {
        center: c(0.0, 0.0),
        half_side: 0.5,
    }
    .rasterize(&spec);
    let (mut coarse, mut fine) = (vec![], vec![]);
    for seed in 0..400 {
        let f = sampler.sample(seed);
        coarse.push(
            measure_of(
                &gmc_from_field(&f, 1.0, 4.0 * spec.delta()).unwrap(),
                &square,
            )
            .unwrap(),
        );
        fine.push(
            measure_of(
                &gmc_from_field(&f, 1.0, 2.0 * spec.delta()).unwrap(),
                &square,
            )
            .unwrap(),
        );
    }
    let ratio = mean(&fine) / mean(&coarse);
    assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn coordinate_change_discrepancy_shrinks_with_eps() {
    let spec = GridSpec::centered(256, 2.0).unwrap();
    let sampler = SpectralGffSampler::new(spec).unwrap();
    let regions = default_battery(&spec);
    let gamma = 1.0;
    let levels = [16.0, 8.0, 4.0];
    let mut medians = vec![vec![]; levels.len()];
    for seed in 0..30 {
        let f = sampler.sample(seed);
        for (k, m) in levels.iter().enumerate() {
            let rep =
                coordinate_change_check(&f, 2.0, c(0.0, 0.0), gamma, m * spec.delta(), &regions)
                    .unwrap();
            medians[k].push(rep.median_relative);
        }
    }
    let m: Vec<f64> = medians.iter().map(|v| median(v)).collect();
    // The discrepancy is resampling error, which a wider mollifier hides:
    // it decreases as eps grows.
    assert!(m.iter().all(|&x| x <= 0.1), "median discrepancies {m:?}");
    assert!(
        m.windows(2).all(|w| w[0] < w[1]),
        "median discrepancies {m:?}"
    );
}

#[test]
fn lfpp_distance_is_rarely_above_ten_bounds() {
    let spec = GridSpec::centered(512, 1.0).unwrap();
    let sampler = SpectralGffSampler::new(spec).unwrap();
    let gamma = (8.0f64 / 3.0).sqrt();
    let z = c(0.2, 0.1);
    let samples = 100;
    let ok = (0..samples)
        .filter(|&s| {
            let b = circle_average_distance_bound(&sampler.sample(s), z, gamma, 4.0).unwrap();
            b.dist <= 10.0 * b.bound
        })
        .count();
    assert!(ok as f64 >= 0.99 * samples as f64, "{ok}/{samples}");
}
