//! Excursions of the carrier ball count away from the empty carrier.

use serde::{Deserialize, Serialize};

use crate::carrier::{top_columns, Carrier, CarrierTrace};
use crate::config::BallConfig;
use crate::decoupled::stationary_pi_subcritical;
use crate::dist::ColorDist;
use crate::error::{BbsError, Result};
use crate::random::{IidStream, Seed};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcursionSummary {
    /// Number `M_n` of returns to the empty carrier in `[1, n]`.
    pub m_n: usize,
    pub heights: Vec<usize>,
    /// Height of the incomplete final excursion.
    pub meander: usize,
    pub return_times: Vec<usize>,
}

impl ExcursionSummary {
    /// Excursion lengths `T_k - T_{k-1}`.
    pub fn lengths(&self) -> Vec<usize> {
        let mut prev = 0;
        self.return_times
            .iter()
            .map(|&t| {
                let len = t - prev;
                prev = t;
                len
            })
            .collect()
    }

    /// Heights sorted non-increasing: `h_(1) ≥ h_(2) ≥ ...`.
    pub fn order_statistics(&self) -> Vec<usize> {
        let mut h = self.heights.clone();
        h.sort_unstable_by(|a, b| b.cmp(a));
        h
    }

    /// CSV rows `trial,index,length,height` (no header).
    pub fn csv_rows(&self, trial: usize) -> String {
        let mut out = String::new();
        for (i, (len, h)) in self.lengths().iter().zip(&self.heights).enumerate() {
            out.push_str(&format!("{trial},{},{len},{h}\n", i + 1));
        }
        out
    }
}

pub const EXCURSION_CSV_HEADER: &str = "trial,index,length,height\n";

/// Splits a height path `H_0 = 0, H_1, ..., H_n` at its zeros.
pub fn decompose_path(path: &[usize]) -> ExcursionSummary {
    let mut return_times = Vec::new();
    let mut heights = Vec::new();
    let mut current = path.first().copied().unwrap_or(0);
    for (t, &h) in path.iter().enumerate().skip(1) {
        current = current.max(h);
        if h == 0 {
            return_times.push(t);
            heights.push(current);
            current = 0;
        }
    }
    ExcursionSummary { m_n: return_times.len(), heights, meander: current, return_times }
}

/// Decomposes the first `n` steps of a trace.
pub fn decompose(trace: &CarrierTrace, n: usize) -> Result<ExcursionSummary> {
    if trace.states.len() <= n {
        return Err(BbsError::InvalidArgument(format!("trace covers {} steps, need {n}", trace.states.len() - 1)));
    }
    let path: Vec<usize> = trace.states[..=n].iter().map(Carrier::balls).collect();
    Ok(decompose_path(&path))
}

/// Ball-count path of the unbounded carrier over sites `1..=n`.
pub fn height_path(config: &BallConfig, n: usize) -> Vec<usize> {
    let mut carrier = Carrier::unbounded(config.kappa()).expect("kappa is validated");
    let mut path = Vec::with_capacity(n + 1);
    path.push(0);
    for y in config.colors().take(n) {
        carrier.step_flag(y);
        path.push(carrier.balls());
    }
    path
}

/// Checks `max_k h_k ≤ λ_1 ≤ max(h_1, ..., h_{M_n+1})` and `λ_j ≥ h_(j)` for `j ≤ M_n`.
///
/// Past the support the carrier only loses balls, so the excursion in
/// progress at time `n` peaks at the meander height.
pub fn check_soliton_bounds(config: &BallConfig, n: usize) -> Result<bool> {
    if n < config.len() {
        return Err(BbsError::InvalidArgument(format!("configuration extends past n = {n}")));
    }
    let ex = decompose_path(&height_path(config, n));
    let order = ex.order_statistics();
    let columns = top_columns(config, order.len().max(1));
    let lambda1 = columns[0];
    let completed_max = order.first().copied().unwrap_or(0);
    let upper = completed_max.max(ex.meander);
    let rows_ok = order.iter().zip(&columns).all(|(h, l)| l >= h);
    Ok(completed_max <= lambda1 && lambda1 <= upper && rows_ok)
}

/// `P(h_1 > x)` for the single-color subcritical carrier, `θ = p_0/p_1`.
pub fn kappa1_height_survival(p: &ColorDist, x: f64) -> Result<f64> {
    if p.kappa() != 1 || p.p(1) >= p.p0() {
        return Err(BbsError::Domain { required: "kappa = 1 and p_1 < p_0", actual: p.to_string() });
    }
    let theta = p.p0() / p.p(1);
    Ok((1.0 - 2.0 * p.p(1)) / (theta.powf(x.floor() + 1.0) - 1.0))
}

/// Explicit multicolor lower-bound rate: `(p_0 - p_κ) / ((p_0 + p_κ) (p_0/p_κ)^{⌊x⌋+1})`.
pub fn height_lower_bound(p: &ColorDist, x: f64) -> f64 {
    let (p0, pk) = (p.p0(), p.p(p.kappa()));
    (p0 - pk) / (p0 + pk) / (p0 / pk).powf(x.floor() + 1.0)
}

/// `P(h_{j:m} ≤ x)` given `F(x) = P(h ≤ x)`: at most `j-1` of `m` exceed `x`.
pub fn order_stat_cdf(f: f64, m: usize, j: usize) -> f64 {
    let q = 1.0 - f;
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for l in 0..j.min(m + 1) {
        if l > 0 {
            binom *= (m - l + 1) as f64 / l as f64;
        }
        total += binom * q.powi(l as i32) * f.powi((m - l) as i32);
    }
    total.min(1.0)
}

/// Heights of the first `count` completed excursions of the plain carrier
/// driven by i.i.d. colors, together with the steps used.
pub fn sample_excursions(p: &ColorDist, count: usize, seed: Seed) -> (Vec<usize>, usize) {
    let mut carrier = Carrier::unbounded(p.kappa()).expect("kappa is positive");
    let mut stream = IidStream::new(p, seed);
    let mut heights = Vec::with_capacity(count);
    let (mut current, mut steps) = (0usize, 0usize);
    while heights.len() < count {
        carrier.step_flag(stream.next_color());
        steps += 1;
        current = current.max(carrier.balls());
        if carrier.is_empty() {
            heights.push(current);
            current = 0;
        }
    }
    (heights, steps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub x: usize,
    pub survival: f64,
    pub stderr: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub p: ColorDist,
    pub excursions: usize,
    pub seed: u64,
    pub points: Vec<TailPoint>,
    /// Fitted decay rate `-d/dx log P(h_1 > x)`.
    pub rate: f64,
    /// `log(p_0 / p_κ)`.
    pub lower_bound_rate: f64,
    /// Whether every empirical survival value clears the explicit bound minus 3 standard errors.
    pub above_lower_bound: bool,
}

/// Empirical survival of excursion heights with an exponential fit.
pub fn excursion_tail_fit(p: &ColorDist, excursions: usize, x_max: usize, seed: Seed) -> Result<TailFit> {
    stationary_pi_subcritical(p)?;
    let (heights, _) = sample_excursions(p, excursions, seed);
    let m = heights.len() as f64;
    let points: Vec<TailPoint> = (0..=x_max)
        .map(|x| {
            let s = heights.iter().filter(|&&h| h > x).count() as f64 / m;
            TailPoint { x, survival: s, stderr: (s * (1.0 - s) / m).sqrt(), lower_bound: height_lower_bound(p, x as f64) }
        })
        .collect();
    let usable: Vec<&TailPoint> = points.iter().filter(|pt| pt.survival * m >= 10.0).collect();
    let rate = if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|pt| pt.x as f64).collect();
        let ys: Vec<f64> = usable.iter().map(|pt| pt.survival.ln()).collect();
        -stats::linear_fit(&xs, &ys).0
    } else {
        f64::NAN
    };
    let above_lower_bound = points.iter().all(|pt| pt.survival >= pt.lower_bound - 3.0 * pt.stderr);
    Ok(TailFit {
        p: p.clone(),
        excursions,
        seed: seed.value,
        points,
        rate,
        lower_bound_rate: (p.p0() / p.p(p.kappa())).ln(),
        above_lower_bound,
    })
}
