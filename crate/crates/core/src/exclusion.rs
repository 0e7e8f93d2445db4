//! The `k`-point circular exclusion process on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{BbsError, Result};
use crate::par::map_trials;
use crate::random::Seed;
use crate::stats;
use rand::Rng;

/// `k` points sorted non-increasing in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointState {
    points: Vec<f64>,
}

impl PointState {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(BbsError::InvalidArgument("need at least one point".into()));
        }
        if points.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(BbsError::InvalidArgument("points must lie in [0, 1]".into()));
        }
        points.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { points })
    }

    /// All points at zero, matching an empty capacity-`k` carrier.
    pub fn zeros(k: usize) -> Result<Self> {
        Self::new(vec![0.0; k])
    }

    /// Order statistics of `k` fresh uniforms.
    pub fn sample_stationary<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..k).map(|_| rng.random::<f64>()).collect())
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn min(&self) -> f64 {
        *self.points.last().expect("k >= 1")
    }
}

/// One update: if `u > x_k` it replaces the first point below it, otherwise
/// the largest point leaves and `u` joins at the bottom.
pub fn cx_step(state: &mut PointState, u: f64) {
    let pts = &mut state.points;
    if u > *pts.last().expect("k >= 1") {
        let i = pts.partition_point(|&x| x >= u);
        pts[i] = u;
    } else {
        pts.remove(0);
        pts.push(u);
    }
}

/// Result of driving the process with a sequence of inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CxRun {
    pub final_state: PointState,
    /// `Σ_s 1(U_s > min Γ_{s-1})`.
    pub counter: usize,
    pub trace: Option<Vec<PointState>>,
}

/// Drives the process with the given uniforms.
pub fn run_cx_inputs(initial: PointState, inputs: &[f64], keep_trace: bool) -> CxRun {
    let mut state = initial;
    let mut counter = 0;
    let mut trace = keep_trace.then(|| vec![state.clone()]);
    for &u in inputs {
        if u > state.min() {
            counter += 1;
        }
        cx_step(&mut state, u);
        if let Some(t) = trace.as_mut() {
            t.push(state.clone());
        }
    }
    CxRun { final_state: state, counter, trace }
}

/// Drives the process with `n` seeded uniforms, from `initial` or from all zeros.
pub fn run_cx(k: usize, n: usize, seed: Seed, initial: Option<PointState>, keep_trace: bool) -> Result<CxRun> {
    let initial = match initial {
        Some(s) if s.k() != k => return Err(BbsError::InvalidArgument(format!("initial state has {} points, expected {k}", s.k()))),
        Some(s) => s,
        None => PointState::zeros(k)?,
    };
    let inputs = crate::random::uniforms(n, seed);
    Ok(run_cx_inputs(initial, &inputs, keep_trace))
}

/// CDF of the `j`-th largest of `k` uniforms: at most `j-1` of them exceed `x`.
pub fn order_stat_uniform_cdf(k: usize, j: usize, x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for i in 0..j {
        if i > 0 {
            binom *= (k - i + 1) as f64 / i as f64;
        }
        total += binom * (1.0 - x).powi(i as i32) * x.powi((k - i) as i32);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingPoint {
    pub t: usize,
    pub not_met: f64,
    pub stderr: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub k: usize,
    pub burn_in: usize,
    pub samples: usize,
    pub stride: usize,
    pub seed: u64,
    /// KS distance of the `j`-th largest point against its order-statistic law.
    pub ks_stats: Vec<f64>,
    pub meeting_curve: Vec<MeetingPoint>,
}

/// Subsamples one long chain every `stride` steps after `burn_in` and compares
/// each coordinate with its stationary marginal.
pub fn stationarity_ks(k: usize, burn_in: usize, samples: usize, stride: usize, seed: Seed) -> Result<Vec<f64>> {
    let mut rng = seed.rng();
    let mut state = PointState::zeros(k)?;
    for _ in 0..burn_in {
        cx_step(&mut state, rng.random());
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(samples); k];
    for _ in 0..samples {
        for _ in 0..stride {
            cx_step(&mut state, rng.random());
        }
        for (c, &x) in cols.iter_mut().zip(state.points()) {
            c.push(x);
        }
    }
    Ok(cols
        .iter()
        .enumerate()
        .map(|(j, c)| stats::ks_one_sample(c, |x| order_stat_uniform_cdf(k, j + 1, x)))
        .collect())
}

/// `(1 - 1/k!)^{⌊t/k⌋}`.
pub fn meeting_bound(k: usize, t: usize) -> f64 {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    (1.0 - 1.0 / fact).powi((t / k) as i32)
}

/// Fraction of coupled pairs not yet met by each `t ≤ t_max`. One chain starts
/// from zeros, the other from a stationary sample; both read the same inputs.
pub fn meeting_curve(k: usize, pairs: usize, t_max: usize, seed: Seed) -> Result<Vec<MeetingPoint>> {
    PointState::zeros(k)?;
    let meet_times: Vec<Option<usize>> = map_trials(pairs, |i| {
        let mut rng = seed.with_stream(seed.stream + i as u64).rng();
        let mut a = PointState::zeros(k).expect("k >= 1");
        let mut b = PointState::sample_stationary(k, &mut rng).expect("k >= 1");
        if a == b {
            return Some(0);
        }
        for t in 1..=t_max {
            let u = rng.random();
            cx_step(&mut a, u);
            cx_step(&mut b, u);
            if a == b {
                return Some(t);
            }
        }
        None
    });
    let n = pairs as f64;
    Ok((0..=t_max)
        .map(|t| {
            let not_met = meet_times.iter().filter(|m| m.is_none_or(|s| s > t)).count() as f64 / n;
            MeetingPoint { t, not_met, stderr: (not_met * (1.0 - not_met) / n).sqrt(), bound: meeting_bound(k, t) }
        })
        .collect())
}

/// Stationarity KS statistics with the default stride `10k`, plus a meeting curve.
pub fn stationarity_test(k: usize, burn_in: usize, samples: usize, seed: Seed, pairs: usize, t_max: usize) -> Result<StationarityReport> {
    let stride = 10 * k;
    Ok(StationarityReport {
        k,
        burn_in,
        samples,
        stride,
        seed: seed.value,
        ks_stats: stationarity_ks(k, burn_in, samples, stride, seed)?,
        meeting_curve: meeting_curve(k, pairs, t_max, seed.with_stream(seed.stream + (1 << 40)))?,
    })
}

/// CSV of sorted states, one row per subsample.
pub fn states_csv(states: &[PointState]) -> String {
    let k = states.first().map_or(0, PointState::k);
    let header: Vec<String> = (1..=k).map(|j| format!("x{j}")).collect();
    let mut out = header.join(",") + "\n";
    for s in states {
        let row: Vec<String> = s.points().iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
