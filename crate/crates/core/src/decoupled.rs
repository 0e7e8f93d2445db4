//! Unstable colors, the localized (decoupled) carrier and its additive functionals.
//!
//! Colors are split into intervals `(α_j, α_{j+1}]` by the unstable colors
//! `0 = α_0 < α_1 < ... < α_r`, with `α_{r+1} = kappa + 1` standing in for an
//! empty box. The localized carrier only lets an incoming ball exclude a held
//! ball from the same interval; otherwise it simply adds the ball.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::carrier::Carrier;
use crate::dist::{ColorDist, PROB_TOL};
use crate::error::{BbsError, Result};
use crate::random::{IidStream, Seed};
use crate::stats;

/// Unstable colors `α_0 = 0 < α_1 < ... < α_r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnstableSet {
    kappa: u32,
    alphas: Vec<u32>,
}

impl UnstableSet {
    /// Colors `i` with `i = 0` or `p_i ≥ max(p_{i+1}, ..., p_kappa, p_0)`.
    pub fn from_dist(p: &ColorDist) -> Self {
        let kappa = p.kappa();
        let mut alphas = vec![0];
        let mut suffix_max = p.p0();
        let mut unstable_desc = Vec::new();
        for i in (1..=kappa).rev() {
            if p.p(i) >= suffix_max - PROB_TOL {
                unstable_desc.push(i);
            }
            suffix_max = suffix_max.max(p.p(i));
        }
        alphas.extend(unstable_desc.into_iter().rev());
        Self { kappa, alphas }
    }

    pub fn from_alphas(kappa: u32, alphas: Vec<u32>) -> Result<Self> {
        if alphas.first() != Some(&0) || alphas.windows(2).any(|w| w[0] >= w[1]) || alphas.iter().any(|&a| a > kappa) {
            return Err(BbsError::InvalidArgument("alphas must start at 0 and increase within 0..=kappa".into()));
        }
        Ok(Self { kappa, alphas })
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn alphas(&self) -> &[u32] {
        &self.alphas
    }

    /// `α_r`, the largest unstable color.
    pub fn top(&self) -> u32 {
        *self.alphas.last().expect("contains 0")
    }

    pub fn contains(&self, color: u32) -> bool {
        self.alphas.binary_search(&color).is_ok()
    }

    /// `α_j` and `α_{j+1}` for the interval `(α_j, α_{j+1}]` containing `y`,
    /// with `y = 0` read as `kappa + 1`.
    pub fn interval(&self, y: u32) -> (u32, u32) {
        let y = if y == 0 { self.kappa + 1 } else { y };
        let j = self.alphas.partition_point(|&a| a < y) - 1;
        let hi = self.alphas.get(j + 1).copied().unwrap_or(self.kappa + 1);
        (self.alphas[j], hi)
    }

    /// `ℓ⁺`: `kappa + 1` when `ℓ ≥ α_r`, else the least unstable color above `ℓ`.
    pub fn ell_plus(&self, ell: u32) -> Result<u32> {
        if ell == 0 || ell > self.kappa {
            return Err(BbsError::NotPositiveColor { color: ell, kappa: self.kappa });
        }
        Ok(self.alphas.iter().copied().find(|&a| a > ell).unwrap_or(self.kappa + 1))
    }

    /// Stable colors, increasing.
    pub fn stable(&self) -> Vec<u32> {
        (1..=self.kappa).filter(|&c| !self.contains(c)).collect()
    }
}

/// Carrier following the localized exclusion rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoupledCarrier {
    carrier: Carrier,
    unstable: UnstableSet,
}

impl DecoupledCarrier {
    pub fn new(unstable: UnstableSet) -> Self {
        let carrier = Carrier::unbounded(unstable.kappa).expect("kappa is positive");
        Self { carrier, unstable }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn unstable(&self) -> &UnstableSet {
        &self.unstable
    }

    pub fn mult(&self, color: u32) -> usize {
        self.carrier.mult(color)
    }

    /// Reads `y` and returns the expelled color.
    pub fn step(&mut self, y: u32) -> Result<u32> {
        if y > self.unstable.kappa {
            return Err(BbsError::InvalidColor { color: y, kappa: self.unstable.kappa });
        }
        Ok(self.step_unchecked(y))
    }

    pub(crate) fn step_unchecked(&mut self, y: u32) -> u32 {
        let (lo, _) = self.unstable.interval(y);
        let target = if y == 0 { self.unstable.kappa + 1 } else { y };
        let victim = self.carrier.largest_below(target).unwrap_or(0);
        let expelled = if victim >= lo {
            if victim > 0 {
                self.carrier.remove(victim);
            }
            victim
        } else {
            0
        };
        if y > 0 {
            self.carrier.insert(y);
        }
        expelled
    }
}

/// Snapshots of the localized carrier, `Γ̃_0` through `Γ̃_T`.
pub fn run_decoupled(inputs: &[u32], unstable: &UnstableSet) -> Result<Vec<Carrier>> {
    let mut dc = DecoupledCarrier::new(unstable.clone());
    let mut out = Vec::with_capacity(inputs.len() + 1);
    out.push(dc.carrier.clone());
    for &y in inputs {
        dc.step(y)?;
        out.push(dc.carrier.clone());
    }
    Ok(out)
}

/// `g_ℓ(f, k)` where `stable_mults` lists the multiplicities of colors
/// `ℓ+1, ..., ℓ⁺-1` and `next_color = 0` is read as `kappa + 1`.
pub fn g_functional(stable_mults: &[usize], next_color: u32, ell: u32, unstable: &UnstableSet) -> Result<i32> {
    let ell_plus = unstable.ell_plus(ell)?;
    let span = (ell_plus - ell - 1) as usize;
    if stable_mults.len() != span {
        return Err(BbsError::InvalidArgument(format!(
            "expected {span} stable multiplicities between {ell} and {ell_plus}"
        )));
    }
    Ok(g_value(|c| stable_mults[(c - ell - 1) as usize], next_color, ell, ell_plus, unstable.kappa))
}

fn g_value(mult: impl Fn(u32) -> usize, next_color: u32, ell: u32, ell_plus: u32, kappa: u32) -> i32 {
    let k = if next_color == 0 { kappa + 1 } else { next_color };
    if k == ell {
        1
    } else if k > ell && k <= ell_plus && (ell + 1..k).all(|c| mult(c) == 0) {
        -1
    } else {
        0
    }
}

/// Path `S̃_0 = 0, S̃_t = Σ_{s<t} g_ℓ(Z̃_s)` with `Z̃_s` pairing the stable
/// multiplicities of `Γ̃_s` with the input `X(s+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditivePath {
    pub values: Vec<i64>,
    /// `m_ℓ(Γ̃_t)` alongside, for the reflection identity.
    pub mult_ell: Vec<usize>,
}

impl AdditivePath {
    /// Whether `m_ℓ(Γ̃_t) = S̃_t - min_{s ≤ t} S̃_s` at every `t`.
    pub fn reflection_holds(&self) -> bool {
        let mut running_min = 0i64;
        self.values.iter().zip(&self.mult_ell).all(|(&s, &m)| {
            running_min = running_min.min(s);
            (s - running_min) as usize == m
        })
    }
}

pub fn additive_path(inputs: &[u32], unstable: &UnstableSet, ell: u32) -> Result<AdditivePath> {
    let ell_plus = unstable.ell_plus(ell)?;
    let mut dc = DecoupledCarrier::new(unstable.clone());
    let mut values = Vec::with_capacity(inputs.len() + 1);
    let mut mult_ell = Vec::with_capacity(inputs.len() + 1);
    let mut s = 0i64;
    values.push(s);
    mult_ell.push(0);
    for &y in inputs {
        s += g_value(|c| dc.mult(c), y, ell, ell_plus, unstable.kappa) as i64;
        dc.step(y)?;
        values.push(s);
        mult_ell.push(dc.mult(ell));
    }
    Ok(AdditivePath { values, mult_ell })
}

/// Product of independent geometric laws `(1 - r_i) r_i^{n_i}` over listed colors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductGeometric {
    pub colors: Vec<u32>,
    pub ratios: Vec<f64>,
}

impl ProductGeometric {
    fn new(colors: Vec<u32>, ratios: Vec<f64>) -> Result<Self> {
        if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(BbsError::Domain { required: "geometric ratio in (0, 1)", actual: r.to_string() });
        }
        Ok(Self { colors, ratios })
    }

    /// Probability of the multiplicity vector (one entry per listed color).
    pub fn pmf(&self, mults: &[usize]) -> f64 {
        self.ratios.iter().zip(mults).map(|(&r, &n)| (1.0 - r) * r.powi(n as i32)).product()
    }

    /// Mass at the all-zero vector.
    pub fn mass_at_zero(&self) -> f64 {
        self.ratios.iter().map(|r| 1.0 - r).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.ratios
            .iter()
            .map(|&r| Geometric::new(1.0 - r).expect("valid ratio").sample(rng) as usize)
            .collect()
    }

    /// Per-color bounds `N_i` such that the mass outside `Π [0, N_i]` is below `tail`.
    pub fn truncation_box(&self, tail: f64) -> Vec<usize> {
        let d = self.ratios.len().max(1) as f64;
        self.ratios
            .iter()
            .map(|&r| {
                // P(n > N) = r^{N+1} ≤ tail / d
                let n = ((tail / d).ln() / r.ln()).ceil() as i64 - 1;
                n.max(0) as usize
            })
            .collect()
    }

    /// Exact mass of the truncation box.
    pub fn box_mass(&self, bounds: &[usize]) -> f64 {
        self.ratios.iter().zip(bounds).map(|(&r, &n)| 1.0 - r.powi(n as i32 + 1)).product()
    }

    /// All vectors in the box with their probabilities.
    pub fn enumerate_box(&self, bounds: &[usize]) -> Vec<(Vec<usize>, f64)> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; bounds.len()];
        loop {
            out.push((cur.clone(), self.pmf(&cur)));
            let mut i = 0;
            loop {
                if i == bounds.len() {
                    return out;
                }
                if cur[i] < bounds[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }
}

/// Stationary law of the plain carrier when `p_0 > p_i` for all `i ≥ 1`.
pub fn stationary_pi_subcritical(p: &ColorDist) -> Result<ProductGeometric> {
    if p.p_star() >= p.p0() - PROB_TOL {
        return Err(BbsError::Domain { required: "p_0 > max(p_1, ..., p_kappa)", actual: p.to_string() });
    }
    let colors: Vec<u32> = (1..=p.kappa()).collect();
    let ratios = colors.iter().map(|&i| p.p(i) / p.p0()).collect();
    ProductGeometric::new(colors, ratios)
}

/// Stationary law of the stable multiplicities of the localized carrier: each
/// stable `i ∈ (α_j, α_{j+1})` is geometric with ratio `p_i / p_{α_{j+1}}`.
pub fn stationary_pi_decoupled(p: &ColorDist) -> Result<ProductGeometric> {
    let u = UnstableSet::from_dist(p);
    let colors = u.stable();
    let ratios = colors
        .iter()
        .map(|&i| {
            let (_, hi) = u.interval(i);
            p.p(i) / p.p_cyclic(hi)
        })
        .collect();
    ProductGeometric::new(colors, ratios)
}

/// Long-run increment statistics of `S̃^ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub p: ColorDist,
    pub ell: u32,
    pub steps: usize,
    pub seed: u64,
    pub mean_increment: f64,
    pub gamma2: f64,
    pub stderr: f64,
}

/// Increments `g_ℓ(Z̃_t)` of a localized carrier driven by i.i.d. colors,
/// after `burn_in` discarded steps.
pub fn increments(p: &ColorDist, ell: u32, burn_in: usize, steps: usize, seed: Seed) -> Result<Vec<i8>> {
    let u = UnstableSet::from_dist(p);
    let ell_plus = u.ell_plus(ell)?;
    let kappa = p.kappa();
    let mut dc = DecoupledCarrier::new(u);
    let mut stream = IidStream::new(p, seed);
    for _ in 0..burn_in {
        dc.step_unchecked(stream.next_color());
    }
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let y = stream.next_color();
        out.push(g_value(|c| dc.mult(c), y, ell, ell_plus, kappa) as i8);
        dc.step_unchecked(y);
    }
    Ok(out)
}

/// Batch-means estimate of `γ_ℓ²` with `batches` batches (default `√steps`).
pub fn estimate_gamma(p: &ColorDist, ell: u32, steps: usize, batches: Option<usize>, seed: Seed) -> Result<GammaEstimate> {
    if steps < 16 {
        return Err(BbsError::InvalidArgument("need at least 16 steps".into()));
    }
    let xs: Vec<f64> = increments(p, ell, steps / 10, steps, seed)?.into_iter().map(f64::from).collect();
    let batches = batches.unwrap_or_else(|| (steps as f64).sqrt() as usize).clamp(2, steps / 2);
    let (gamma2, stderr) = stats::batch_means_variance(&xs, batches);
    Ok(GammaEstimate { p: p.clone(), ell, steps, seed: seed.value, mean_increment: stats::mean(&xs), gamma2, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_dist() -> ColorDist {
        ColorDist::new(vec![0.1, 0.1, 0.25, 0.05, 0.15, 0.2, 0.1, 0.05]).unwrap()
    }

    #[test]
    fn unstable_examples() {
        assert_eq!(UnstableSet::from_dist(&fig_dist()).alphas(), &[0, 2, 5, 6]);
        let sub: ColorDist = "0.5,0.3,0.2".parse().unwrap();
        assert_eq!(UnstableSet::from_dist(&sub).alphas(), &[0]);
        let one: ColorDist = "0.3,0.7".parse().unwrap();
        assert_eq!(UnstableSet::from_dist(&one).alphas(), &[0, 1]);
    }

    #[test]
    fn ell_plus_examples() {
        let u = UnstableSet::from_dist(&fig_dist());
        assert_eq!(u.ell_plus(3).unwrap(), 5);
        assert_eq!(u.ell_plus(6).unwrap(), 8);
        assert_eq!(u.ell_plus(7).unwrap(), 8);
        assert_eq!(u.ell_plus(1).unwrap(), 2);
        assert!(u.ell_plus(0).is_err());
        let one = UnstableSet::from_alphas(1, vec![0, 1]).unwrap();
        assert_eq!(one.ell_plus(1).unwrap(), 2);
    }

    #[test]
    fn localized_rule() {
        let u = UnstableSet::from_dist(&fig_dist());
        let mut a = DecoupledCarrier::new(u.clone());
        assert_eq!(a.step(3).unwrap(), 0);
        assert_eq!(a.step(5).unwrap(), 3);
        assert_eq!(a.carrier().word(), vec![5]);
        let mut b = DecoupledCarrier::new(u.clone());
        b.step(1).unwrap();
        assert_eq!(b.step(5).unwrap(), 0);
        assert_eq!(b.carrier().word(), vec![5, 1]);
        // An empty box only clears balls at or above α_r.
        let mut c = DecoupledCarrier::new(u);
        c.step(5).unwrap();
        assert_eq!(c.step(0).unwrap(), 0);
        c.step(7).unwrap();
        assert_eq!(c.step(0).unwrap(), 7);
        assert!(c.step(8).is_err());
    }

    #[test]
    fn g_examples() {
        // ℓ = 2 has ℓ⁺ = 5, so colors 3 and 4 sit between them.
        let u = UnstableSet::from_dist(&fig_dist());
        assert_eq!(g_functional(&[0, 0], 2, 2, &u).unwrap(), 1);
        assert_eq!(g_functional(&[4, 4], 3, 2, &u).unwrap(), -1);
        assert_eq!(g_functional(&[0, 0], 4, 2, &u).unwrap(), -1);
        assert_eq!(g_functional(&[1, 0], 4, 2, &u).unwrap(), 0);
        assert_eq!(g_functional(&[0, 0], 5, 2, &u).unwrap(), -1);
        assert_eq!(g_functional(&[0, 1], 5, 2, &u).unwrap(), 0);
        assert_eq!(g_functional(&[0, 0], 6, 2, &u).unwrap(), 0);
        assert!(g_functional(&[0], 5, 2, &u).is_err());
        // ℓ = 7 wraps to the empty box.
        assert_eq!(g_functional(&[], 0, 7, &u).unwrap(), -1);
    }

    #[test]
    fn all_zero_input_path() {
        let u = UnstableSet::from_dist(&fig_dist());
        let path = additive_path(&[0; 10], &u, 7).unwrap();
        assert_eq!(path.values, (0..=10).map(|t| -t).collect::<Vec<i64>>());
        assert!(path.mult_ell.iter().all(|&m| m == 0));
        assert!(path.reflection_holds());
    }

    #[test]
    fn subcritical_law() {
        let p: ColorDist = "2/3,1/3".parse().unwrap();
        let pi = stationary_pi_subcritical(&p).unwrap();
        for n in 0..10 {
            assert!((pi.pmf(&[n]) - 0.5f64.powi(n as i32 + 1)).abs() < 1e-12);
        }
        let q: ColorDist = "0.5,0.3,0.2".parse().unwrap();
        let pq = stationary_pi_subcritical(&q).unwrap();
        assert!((pq.mass_at_zero() - 0.24).abs() < 1e-12);
        assert_eq!(stationary_pi_decoupled(&q).unwrap(), pq);
        let crit: ColorDist = "0.5,0.5".parse().unwrap();
        assert!(matches!(stationary_pi_subcritical(&crit), Err(BbsError::Domain { .. })));
    }

    #[test]
    fn pmf_sums_to_one_on_box() {
        for p in ["0.5,0.3,0.2", "0.45,0.1,0.2,0.25", "0.7,0.3"] {
            let pi = stationary_pi_subcritical(&p.parse().unwrap()).unwrap();
            let bounds = vec![50; pi.ratios.len()];
            let total: f64 = pi.enumerate_box(&bounds).iter().map(|(_, w)| w).sum();
            assert!((total - pi.box_mass(&bounds)).abs() < 1e-9);
            assert!((total - 1.0).abs() < 1e-9, "{p}: {total}");
            let tb = pi.truncation_box(1e-6);
            assert!(1.0 - pi.box_mass(&tb) < 1e-6);
        }
    }

    #[test]
    fn decoupled_law_when_everything_is_unstable() {
        let p: ColorDist = "0.1,0.5,0.4".parse().unwrap();
        let pi = stationary_pi_decoupled(&p).unwrap();
        assert!(pi.colors.is_empty());
        assert_eq!(pi.pmf(&[]), 1.0);
        assert_eq!(pi.enumerate_box(&[]).len(), 1);
    }

    #[test]
    fn gamma_for_fair_single_color() {
        let p: ColorDist = "0.5,0.5".parse().unwrap();
        let est = estimate_gamma(&p, 1, 400_000, None, Seed::new(11, 0)).unwrap();
        assert!((est.gamma2 - 1.0).abs() < 0.1, "{est:?}");
        assert!(est.gamma2 > 0.0);
    }
}
