//! Monte Carlo estimates of row and column lengths for the random models.

use serde::{Deserialize, Serialize};

use crate::carrier::{energy, lambda1_queue, top_columns, top_rows};
use crate::config::BallConfig;
use crate::dist::ColorDist;
use crate::error::{BbsError, Result};
use crate::excursions::{decompose_path, height_path};
use crate::par::map_trials;
use crate::random::{gen_iid, gen_permutation, trial_stream, Seed};
use crate::stats::{self, Summary};

pub const SCHEMA: &str = "bbs-lab/1";

/// Fewer trials than this mark a report as low-sample.
pub const MIN_TRIALS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Permutation,
    Independence { p: ColorDist },
}

impl Model {
    pub fn sample(&self, n: usize, seed: Seed) -> Result<BallConfig> {
        match self {
            Model::Permutation => Ok(gen_permutation(n, seed)?.config),
            Model::Independence { p } => gen_iid(n, p, seed),
        }
    }
}

/// Settings shared by the ladder experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub stream_offset: u64,
    /// Number of rows and columns recorded per trial.
    pub depth: usize,
    pub verify: bool,
}

impl RunSpec {
    pub fn seed_for(&self, point: usize, trial: usize) -> Seed {
        Seed::new(self.seed, trial_stream(self.stream_offset, point, trial))
    }

    fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(BbsError::InvalidArgument("n values must be positive".into()));
        }
        if self.trials == 0 || self.depth == 0 {
            return Err(BbsError::InvalidArgument("trials and depth must be positive".into()));
        }
        Ok(())
    }
}

/// Per-trial rows `ρ_1..ρ_d` and columns `λ_1..λ_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub verified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub n: usize,
    pub trials: Vec<TrialResult>,
}

impl LadderPoint {
    pub fn rows(&self, k: usize) -> Vec<f64> {
        self.trials.iter().map(|t| t.rows[k - 1] as f64).collect()
    }

    pub fn cols(&self, j: usize) -> Vec<f64> {
        self.trials.iter().map(|t| t.cols[j - 1] as f64).collect()
    }
}

/// Raw samples of a ladder experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRun {
    pub model: Model,
    pub spec: RunSpec,
    pub points: Vec<LadderPoint>,
}

/// Spot checks on one sampled configuration: energy invariance under the
/// cyclic update for `j ≤ depth`, the queue formula for `λ_1`, and the
/// excursion bounds on the top `depth` columns.
pub fn verify_instance(x: &BallConfig, depth: usize) -> bool {
    let shifted = x.cyclic_step();
    let energies_ok = (1..=depth).all(|j| energy(x, j) == energy(&shifted, j));
    let l1 = lambda1_queue(x);
    let queue_ok = if l1 == 0 {
        x.ball_count() == 0
    } else {
        energy(x, l1) > energy(x, l1 - 1) && energy(x, l1 + 1) == energy(x, l1)
    };
    let ex = decompose_path(&height_path(x, x.len()));
    let order = ex.order_statistics();
    let cols = top_columns(x, depth);
    let top = order.first().copied().unwrap_or(0);
    let bounds_ok = top <= cols[0]
        && cols[0] <= top.max(ex.meander)
        && order.iter().zip(&cols).all(|(h, l)| l >= h);
    energies_ok && queue_ok && bounds_ok
}

fn run_trial(model: &Model, n: usize, depth: usize, seed: Seed, verify: bool) -> Result<TrialResult> {
    let x = model.sample(n, seed)?;
    Ok(TrialResult {
        rows: top_rows(&x, depth),
        cols: top_columns(&x, depth),
        verified: verify.then(|| verify_instance(&x, depth)),
    })
}

pub fn run_ladder(model: Model, spec: RunSpec) -> Result<ScalingRun> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.n_list.len());
    for (idx, &n) in spec.n_list.iter().enumerate() {
        let trials = map_trials(spec.trials, |t| run_trial(&model, n, spec.depth, spec.seed_for(idx, t), spec.verify));
        points.push(LadderPoint { n, trials: trials.into_iter().collect::<Result<Vec<_>>>()? });
    }
    Ok(ScalingRun { model, spec, points })
}

/// Permutation model: rows `ρ_k(n)/n → 1/(k(k+1))`, columns `λ_k(n)/√n → 2/(√k + √(k+1))`.
pub fn mc_permutation(n_list: &[usize], trials: usize, k_max: usize, seed: u64, stream_offset: u64, verify: bool) -> Result<ScalingRun> {
    let spec = RunSpec { n_list: n_list.to_vec(), trials, seed, stream_offset, depth: k_max, verify };
    run_ladder(Model::Permutation, spec)
}

/// Independence model with color law `p`.
pub fn mc_independence(n_list: &[usize], p: &ColorDist, trials: usize, j_max: usize, seed: u64, stream_offset: u64, verify: bool) -> Result<ScalingRun> {
    let spec = RunSpec { n_list: n_list.to_vec(), trials, seed, stream_offset, depth: j_max, verify };
    run_ladder(Model::Independence { p: p.clone() }, spec)
}

pub fn permutation_row_limit(k: usize) -> f64 {
    1.0 / (k * (k + 1)) as f64
}

pub fn permutation_column_limit(k: usize) -> f64 {
    2.0 / ((k as f64).sqrt() + ((k + 1) as f64).sqrt())
}

/// `2/(√(k-1) + √k)`, the per-column limit implied by `Σ_{i ≤ k} λ_i(n) ~ 2√(kn)`
/// (the sum of `k` longest decreasing subsequences over a split of `[1, n]`).
/// It differs from [`permutation_column_limit`] by one index; simulations agree with this one.
pub fn permutation_column_limit_from_sums(k: usize) -> f64 {
    2.0 / (((k - 1) as f64).sqrt() + (k as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub n: usize,
    pub rows: Vec<Summary>,
    pub cols: Vec<Summary>,
    /// Mean `ρ_k / n`.
    pub row_over_n: Vec<f64>,
    /// Mean `λ_j / n`, `λ_j / √n` and `λ_j / ln n`.
    pub col_over_n: Vec<f64>,
    pub col_over_sqrt_n: Vec<f64>,
    pub col_over_log_n: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub j: usize,
    /// Slope of `ln mean λ_j` against `ln n`; `NaN` with fewer than two usable points.
    pub loglog_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub schema: String,
    #[serde(flatten)]
    pub model: Model,
    pub seed: u64,
    pub stream_offset: u64,
    pub trials: usize,
    pub n_list: Vec<usize>,
    pub depth: usize,
    pub low_sample: bool,
    pub verified: Option<bool>,
    pub points: Vec<PointStats>,
    pub fits: Vec<ExponentFit>,
}

impl ScalingRun {
    pub fn verification_passed(&self) -> Option<bool> {
        self.spec.verify.then(|| self.points.iter().flat_map(|p| &p.trials).all(|t| t.verified == Some(true)))
    }

    pub fn report(&self) -> ScalingReport {
        let depth = self.spec.depth;
        let points: Vec<PointStats> = self
            .points
            .iter()
            .map(|pt| {
                let n = pt.n as f64;
                let rows: Vec<Summary> = (1..=depth).map(|k| Summary::of(&pt.rows(k))).collect();
                let cols: Vec<Summary> = (1..=depth).map(|j| Summary::of(&pt.cols(j))).collect();
                PointStats {
                    n: pt.n,
                    row_over_n: rows.iter().map(|s| s.mean / n).collect(),
                    col_over_n: cols.iter().map(|s| s.mean / n).collect(),
                    col_over_sqrt_n: cols.iter().map(|s| s.mean / n.sqrt()).collect(),
                    col_over_log_n: cols.iter().map(|s| s.mean / n.ln()).collect(),
                    rows,
                    cols,
                }
            })
            .collect();
        let fits = (1..=depth)
            .map(|j| {
                let (xs, ys): (Vec<f64>, Vec<f64>) = points
                    .iter()
                    .filter(|p| p.cols[j - 1].mean > 0.0)
                    .map(|p| ((p.n as f64).ln(), p.cols[j - 1].mean.ln()))
                    .unzip();
                let loglog_slope = if xs.len() >= 2 { stats::linear_fit(&xs, &ys).0 } else { f64::NAN };
                ExponentFit { j, loglog_slope }
            })
            .collect();
        ScalingReport {
            schema: SCHEMA.into(),
            model: self.model.clone(),
            seed: self.spec.seed,
            stream_offset: self.spec.stream_offset,
            trials: self.spec.trials,
            n_list: self.spec.n_list.clone(),
            depth,
            low_sample: self.spec.trials < MIN_TRIALS,
            verified: self.verification_passed(),
            points,
            fits,
        }
    }

    /// CSV `n,trial,kind,index,value` with one row per recorded row or column length.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("n,trial,kind,index,value\n");
        for pt in &self.points {
            for (t, tr) in pt.trials.iter().enumerate() {
                for (k, v) in tr.rows.iter().enumerate() {
                    out.push_str(&format!("{},{t},row,{},{v}\n", pt.n, k + 1));
                }
                for (j, v) in tr.cols.iter().enumerate() {
                    out.push_str(&format!("{},{t},col,{},{v}\n", pt.n, j + 1));
                }
            }
        }
        out
    }
}
