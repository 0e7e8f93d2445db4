//! Distributional profiles of the longest soliton at and above criticality.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::carrier::lambda1_queue;
use crate::decoupled::estimate_gamma;
use crate::dist::{ColorDist, PROB_TOL};
use crate::error::{BbsError, Result};
use crate::experiments::phase::{phase_classify, PhaseLabel};
use crate::experiments::scaling::SCHEMA;
use crate::par::map_trials;
use crate::random::{gen_iid, trial_stream, Seed};
use crate::stats;

/// Samples of `max_{t ≤ 1} (W_t - min_{s ≤ t} W_s)`, which has the law of
/// `max_{t ≤ 1} |B_t|`, from Gaussian random walks with `steps` steps.
pub fn reflected_bm_max_samples(count: usize, steps: usize, seed: Seed) -> Vec<f64> {
    let scale = (steps as f64).sqrt();
    map_trials(count, |i| {
        let mut rng = seed.with_stream(seed.stream + i as u64).rng();
        let (mut w, mut low, mut best) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            w += z;
            low = low.min(w);
            best = best.max(w - low);
        }
        best / scale
    })
}

fn lambda1_samples(p: &ColorDist, n: usize, trials: usize, seed: u64, stream_offset: u64, point: usize) -> Result<Vec<f64>> {
    map_trials(trials, |t| {
        let x = gen_iid(n, p, Seed::new(seed, trial_stream(stream_offset, point, t)))?;
        Ok(lambda1_queue(&x) as f64)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub schema: String,
    pub p: ColorDist,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub stream_offset: u64,
    /// `p* - p_0`.
    pub drift: f64,
    pub mean_ratio: f64,
    pub stderr_ratio: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// KS distance of the standardized samples from the standard normal.
    pub ks_normal: f64,
    /// `Var λ_1(2n) / Var λ_1(n)`.
    pub var_ratio: f64,
}

/// Fluctuations of `λ_1(n)` around `(p* - p_0) n` in the supercritical phase.
pub fn clt_supercritical(p: &ColorDist, n: usize, trials: usize, seed: u64, stream_offset: u64) -> Result<CltReport> {
    if !phase_classify(p).is_supercritical() {
        return Err(BbsError::Domain { required: "supercritical p (p* > p_0)", actual: p.to_string() });
    }
    if trials < 3 || n == 0 {
        return Err(BbsError::InvalidArgument("need n ≥ 1 and at least 3 trials".into()));
    }
    let xs = lambda1_samples(p, n, trials, seed, stream_offset, 0)?;
    let doubled = lambda1_samples(p, 2 * n, trials, seed, stream_offset, 1)?;
    let nf = n as f64;
    let ratios: Vec<f64> = xs.iter().map(|x| x / nf).collect();
    let (m, sd) = (stats::mean(&xs), stats::variance(&xs).sqrt());
    let z: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
    let normal = Normal::standard();
    Ok(CltReport {
        schema: SCHEMA.into(),
        p: p.clone(),
        n,
        trials,
        seed,
        stream_offset,
        drift: p.p_star() - p.p0(),
        mean_ratio: stats::mean(&ratios),
        stderr_ratio: stats::std_err(&ratios),
        skewness: stats::skewness(&xs),
        excess_kurtosis: stats::excess_kurtosis(&xs),
        ks_normal: stats::ks_one_sample(&z, |v| normal.cdf(v)),
        var_ratio: stats::variance(&doubled) / stats::variance(&xs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub n: usize,
    /// `n^{-1/2} λ_1(n)` per trial.
    pub scaled: Vec<f64>,
    pub median_lambda1: f64,
    /// KS distance against the scaled reference law, when `r = 1`.
    pub ks: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub schema: String,
    pub p: ColorDist,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    pub stream_offset: u64,
    /// Color tying `p_0` when `r = 1`.
    pub ell: Option<u32>,
    pub gamma2: Option<f64>,
    pub gamma2_stderr: Option<f64>,
    pub points: Vec<ProfilePoint>,
    /// KS over all ladder points pooled, when `r = 1`.
    pub pooled_ks: Option<f64>,
    /// `median λ_1(n_{i+1}) / median λ_1(n_i)` for consecutive ladder points.
    pub median_ratios: Vec<f64>,
}

/// Reference-law settings for [`critical_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceSpec {
    pub paths: usize,
    pub steps: usize,
    pub gamma_steps: usize,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self { paths: 10_000, steps: 10_000, gamma_steps: 1_000_000 }
    }
}

/// `n^{-1/2} λ_1(n)` at criticality, compared with `γ̂ max|B|` when exactly one color ties `p_0`.
pub fn critical_profile(p: &ColorDist, n_list: &[usize], trials: usize, seed: u64, stream_offset: u64, reference: ReferenceSpec) -> Result<CriticalReport> {
    let PhaseLabel::Critical { r } = phase_classify(p) else {
        return Err(BbsError::Domain { required: "critical p (p* = p_0)", actual: p.to_string() });
    };
    if n_list.is_empty() || n_list.contains(&0) || trials == 0 {
        return Err(BbsError::InvalidArgument("need positive n values and trials".into()));
    }
    let ell = (r == 1).then(|| (1..=p.kappa()).find(|&i| (p.p(i) - p.p0()).abs() <= PROB_TOL).expect("one tie"));
    let (gamma2, gamma2_stderr, ref_law) = match ell {
        Some(ell) => {
            let g = estimate_gamma(p, ell, reference.gamma_steps, None, Seed::new(seed, stream_offset + (3 << 40)))?;
            let gamma = g.gamma2.sqrt();
            let law: Vec<f64> = reflected_bm_max_samples(reference.paths, reference.steps, Seed::new(seed, stream_offset + (2 << 40)))
                .into_iter()
                .map(|v| gamma * v)
                .collect();
            (Some(g.gamma2), Some(g.stderr), Some(law))
        }
        None => (None, None, None),
    };
    let mut points = Vec::with_capacity(n_list.len());
    for (idx, &n) in n_list.iter().enumerate() {
        let raw = lambda1_samples(p, n, trials, seed, stream_offset, idx)?;
        let scaled: Vec<f64> = raw.iter().map(|x| x / (n as f64).sqrt()).collect();
        let ks = ref_law.as_ref().map(|law| stats::ks_two_sample(&scaled, law));
        points.push(ProfilePoint { n, median_lambda1: stats::median(&raw), scaled, ks });
    }
    let pooled_ks = ref_law.as_ref().map(|law| {
        let all: Vec<f64> = points.iter().flat_map(|pt| pt.scaled.iter().copied()).collect();
        stats::ks_two_sample(&all, law)
    });
    let median_ratios = points.windows(2).map(|w| w[1].median_lambda1 / w[0].median_lambda1).collect();
    Ok(CriticalReport {
        schema: SCHEMA.into(),
        p: p.clone(),
        r,
        trials,
        seed,
        stream_offset,
        ell,
        gamma2,
        gamma2_stderr,
        points,
        pooled_ks,
        median_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_bm_cdf(x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let pi = std::f64::consts::PI;
        4.0 / pi
            * (0..60)
                .map(|k| {
                    let m = (2 * k + 1) as f64;
                    (-1f64).powi(k) / m * (-pi * pi * m * m / (8.0 * x * x)).exp()
                })
                .sum::<f64>()
    }

    #[test]
    fn reference_law_matches_series() {
        let xs = reflected_bm_max_samples(2_000, 2_000, Seed::new(1, 0));
        assert!(xs.iter().all(|&x| x > 0.0));
        let ks = stats::ks_one_sample(&xs, max_abs_bm_cdf);
        assert!(ks < 0.045, "{ks}");
        assert!((max_abs_bm_cdf(1.148_973) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn domain_checks() {
        let sub: ColorDist = "0.5,0.3,0.2".parse().unwrap();
        assert!(clt_supercritical(&sub, 100, 10, 0, 0).is_err());
        assert!(critical_profile(&sub, &[100], 10, 0, 0, ReferenceSpec::default()).is_err());
    }

    #[test]
    fn small_clt() {
        let p: ColorDist = "0.2,0.5,0.3".parse().unwrap();
        let rep = clt_supercritical(&p, 2_000, 40, 3, 0).unwrap();
        assert!((rep.mean_ratio - 0.3).abs() < 0.03);
        assert!((rep.drift - 0.3).abs() < 1e-12);
    }

    #[test]
    fn small_critical_profile() {
        let p: ColorDist = "0.5,0.5".parse().unwrap();
        let spec = ReferenceSpec { paths: 500, steps: 500, gamma_steps: 20_000 };
        let rep = critical_profile(&p, &[500, 2_000], 30, 4, 0, spec).unwrap();
        assert_eq!(rep.r, 1);
        assert_eq!(rep.ell, Some(1));
        assert_eq!(rep.median_ratios.len(), 1);
        assert!(rep.pooled_ks.unwrap() < 0.3);
    }
}
