//! Seeded Monte Carlo checks of distributional statements at their stated tolerances.

use std::collections::HashMap;

use bbs_lab::carrier::Carrier;
use bbs_lab::decoupled::{estimate_gamma, stationary_pi_decoupled, stationary_pi_subcritical, DecoupledCarrier, UnstableSet};
use bbs_lab::dist::ColorDist;
use bbs_lab::excursions::{order_stat_cdf, sample_excursions};
use bbs_lab::experiments::{clt_supercritical, critical_profile, mc_independence, ReferenceSpec};
use bbs_lab::random::{gen_permutation, IidStream, Seed};
use bbs_lab::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist(s: &str) -> ColorDist {
    s.parse().unwrap()
}

fn draw_color<R: Rng>(cum: &[f64], rng: &mut R) -> u32 {
    let u: f64 = rng.random();
    cum.partition_point(|&c| c <= u) as u32
}

#[test]
fn one_step_from_pi_stays_at_pi() {
    let p = dist("0.5,0.3,0.2");
    let pi = stationary_pi_subcritical(&p).unwrap();
    let bounds = pi.truncation_box(1e-6);
    let cells = pi.enumerate_box(&bounds);
    let index: HashMap<Vec<usize>, usize> = cells.iter().enumerate().map(|(i, (m, _))| (m.clone(), i)).collect();
    let samples = 100_000;
    let cum = p.cumulative();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut observed = vec![0usize; cells.len() + 1];
    for _ in 0..samples {
        let m = pi.sample(&mut rng);
        let mut carrier = Carrier::unbounded(2).unwrap();
        // Larger colors first, so later insertions fill empty slots.
        for (i, &count) in m.iter().enumerate().rev() {
            for _ in 0..count {
                carrier.step(i as u32 + 1).unwrap();
            }
        }
        assert_eq!(carrier.multiplicities(), m);
        carrier.step(draw_color(&cum, &mut rng)).unwrap();
        let slot = index.get(&carrier.multiplicities()).copied().unwrap_or(cells.len());
        observed[slot] += 1;
    }
    let mut expected: Vec<f64> = cells.iter().map(|(_, q)| q * samples as f64).collect();
    expected.push((1.0 - pi.box_mass(&bounds)) * samples as f64);
    let pv = stats::chi_square_p_value(&observed, &expected);
    assert!(pv > 0.01, "p-value {pv}");
}

#[test]
fn decoupled_stable_marginals_match_product_law() {
    let p = dist("0.2,0.4,0.1,0.3");
    let u = UnstableSet::from_dist(&p);
    let pi = stationary_pi_decoupled(&p).unwrap();
    let mut dc = DecoupledCarrier::new(u);
    let mut stream = IidStream::new(&p, Seed::new(22, 0));
    for _ in 0..100_000 {
        dc.step(stream.next_color()).unwrap();
    }
    let steps = 1_000_000;
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..steps {
        dc.step(stream.next_color()).unwrap();
        let key: Vec<usize> = pi.colors.iter().map(|&c| dc.mult(c)).collect();
        *counts.entry(key).or_default() += 1;
    }
    let bounds = pi.truncation_box(1e-6);
    let reference: HashMap<Vec<usize>, f64> = pi.enumerate_box(&bounds).into_iter().collect();
    let tv = stats::tv_counts(&counts, &reference, 1.0 - pi.box_mass(&bounds));
    assert!(tv < 0.02, "TV {tv}");
}

#[test]
fn order_statistic_cdf_identity() {
    let p = dist("0.6,0.25,0.15");
    let (pool, _) = sample_excursions(&p, 200_000, Seed::new(23, 0));
    let m = 1_000;
    let resamples = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let max_h = *pool.iter().max().unwrap();
    let f: Vec<f64> = (0..=max_h).map(|x| pool.iter().filter(|&&h| h <= x).count() as f64 / pool.len() as f64).collect();
    for j in [1usize, 2, 5] {
        let mut stats_j = Vec::with_capacity(resamples);
        for _ in 0..resamples {
            let mut draw: Vec<usize> = (0..m).map(|_| pool[rng.random_range(0..pool.len())]).collect();
            draw.select_nth_unstable_by(j - 1, |a, b| b.cmp(a));
            stats_j.push(draw[j - 1]);
        }
        let sup = (0..=max_h)
            .map(|x| {
                let emp = stats_j.iter().filter(|&&h| h <= x).count() as f64 / resamples as f64;
                (emp - order_stat_cdf(f[x], m, j)).abs()
            })
            .fold(0.0, f64::max);
        assert!(sup < 0.02, "j={j} sup {sup}");
    }
}

#[test]
fn consecutive_excursion_heights_uncorrelated() {
    let p = dist("0.5,0.3,0.2");
    let (h, _) = sample_excursions(&p, 100_000, Seed::new(24, 0));
    let xs: Vec<f64> = h[..h.len() - 1].iter().map(|&v| v as f64).collect();
    let ys: Vec<f64> = h[1..].iter().map(|&v| v as f64).collect();
    let (mx, my) = (stats::mean(&xs), stats::mean(&ys));
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.len() as f64;
    let corr = cov / (stats::variance(&xs) * stats::variance(&ys)).sqrt();
    assert!(corr.abs() < 3.0 / (h.len() as f64).sqrt(), "corr {corr}");
}

#[test]
fn permutation_first_entry_is_uniform() {
    let n = 10_000;
    let trials = 1_000;
    let bins = 20;
    let mut observed = vec![0usize; bins];
    for t in 0..trials {
        let x = gen_permutation(n, Seed::new(25, t)).unwrap().config;
        observed[(x.get(1) as usize - 1) * bins / n] += 1;
    }
    let expected = vec![trials as f64 / bins as f64; bins];
    let pv = stats::chi_square_p_value(&observed, &expected);
    assert!(pv > 0.01, "p-value {pv}");
}

#[test]
fn iid_colors_match_p() {
    let p = dist("0.1,0.1,0.25,0.05,0.15,0.2,0.1,0.05");
    let n = 200_000;
    let mut observed = vec![0usize; 8];
    for c in IidStream::new(&p, Seed::new(26, 0)).take(n) {
        observed[c as usize] += 1;
    }
    let expected: Vec<f64> = p.probs().iter().map(|q| q * n as f64).collect();
    assert!(stats::chi_square_p_value(&observed, &expected) > 0.01);
}

#[test]
fn gamma_is_stable_under_doubling() {
    let p = dist("0.4,0.4,0.2");
    let a = estimate_gamma(&p, 1, 1_000_000, None, Seed::new(27, 0)).unwrap();
    let b = estimate_gamma(&p, 1, 2_000_000, None, Seed::new(27, 1)).unwrap();
    let rel = (a.gamma2 - b.gamma2).abs() / b.gamma2;
    assert!(rel < 0.15, "{} vs {}", a.gamma2, b.gamma2);
    let fair = estimate_gamma(&dist("0.5,0.5"), 1, 1_000_000, None, Seed::new(27, 2)).unwrap();
    assert!((fair.gamma2 - 1.0).abs() < 4.0 * fair.stderr.max(0.01), "{}", fair.gamma2);
}

#[test]
fn supercritical_clt_shape() {
    let rep = clt_supercritical(&dist("0.2,0.5,0.3"), 100_000, 500, 28, 0).unwrap();
    assert!(rep.skewness.abs() < 0.3, "skewness {}", rep.skewness);
    assert!(rep.excess_kurtosis.abs() < 0.6, "kurtosis {}", rep.excess_kurtosis);
    assert!((rep.mean_ratio - 0.3).abs() <= 3.0 * rep.stderr_ratio, "{} ± {}", rep.mean_ratio, rep.stderr_ratio);
    assert!((1.5..=2.6).contains(&rep.var_ratio), "var ratio {}", rep.var_ratio);
}

#[test]
fn single_color_critical_profile() {
    let rep = critical_profile(&dist("0.5,0.5"), &[100_000], 1_000, 29, 0, ReferenceSpec::default()).unwrap();
    let ks = rep.points[0].ks.unwrap();
    assert!(ks < 0.06, "KS {ks}");
    assert!((rep.gamma2.unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn two_color_critical_profile() {
    let rep = critical_profile(&dist("0.4,0.4,0.2"), &[10_000, 40_000], 1_000, 30, 0, ReferenceSpec::default()).unwrap();
    assert_eq!(rep.r, 1);
    let ks = rep.points[1].ks.unwrap();
    assert!(ks < 0.08, "KS {ks}");
    let ratio = rep.median_ratios[0];
    assert!((1.7..=2.4).contains(&ratio), "median ratio {ratio}");
}

#[test]
fn subcritical_log_ratio_between_decades() {
    let run = mc_independence(&[10_000, 100_000], &dist("0.5,0.3,0.2"), 200, 1, 31, 0, false).unwrap();
    let r: Vec<f64> = run.points.iter().map(|pt| stats::mean(&pt.cols(1)) / (pt.n as f64).ln()).collect();
    let ratio = r[1] / r[0];
    assert!((0.6..=1.6).contains(&ratio), "ratio {ratio}");
}
