//! Color distributions for the independence model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{BbsError, Result};

/// Tolerance for probability sums and for deciding ties between color densities.
pub const PROB_TOL: f64 = 1e-12;

/// Probability vector `(p_0, p_1, ..., p_kappa)` with all entries positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ColorDist {
    p: Vec<f64>,
}

impl ColorDist {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(BbsError::InvalidDistribution("need p_0 and at least one positive color".into()));
        }
        if let Some(bad) = p.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(BbsError::InvalidDistribution(format!("entry {bad} is not positive")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(BbsError::InvalidDistribution(format!("entries sum to {total}, not 1")));
        }
        Ok(Self { p })
    }

    /// Uniform over `0..=kappa`.
    pub fn uniform(kappa: u32) -> Result<Self> {
        if kappa == 0 {
            return Err(BbsError::ZeroKappa);
        }
        let k = kappa as usize + 1;
        let mut p = vec![1.0 / k as f64; k];
        // Put the rounding residue on p_0 so the sum is exact to the tolerance.
        p[0] = 1.0 - p[1..].iter().sum::<f64>();
        Self::new(p)
    }

    pub fn kappa(&self) -> u32 {
        (self.p.len() - 1) as u32
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn p(&self, color: u32) -> f64 {
        self.p[color as usize]
    }

    /// `p_i` with index `kappa + 1` read as `p_0`.
    pub fn p_cyclic(&self, color: u32) -> f64 {
        self.p.get(color as usize).copied().unwrap_or(self.p[0])
    }

    pub fn p0(&self) -> f64 {
        self.p[0]
    }

    /// `p* = max(p_1, ..., p_kappa)`.
    pub fn p_star(&self) -> f64 {
        self.p[1..].iter().copied().fold(f64::MIN, f64::max)
    }

    /// Cumulative sums with the last entry forced to 1.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cum: Vec<f64> = self
            .p
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        *cum.last_mut().expect("non-empty") = 1.0;
        cum
    }
}

impl TryFrom<Vec<f64>> for ColorDist {
    type Error = BbsError;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<ColorDist> for Vec<f64> {
    fn from(d: ColorDist) -> Self {
        d.p
    }
}

impl FromStr for ColorDist {
    type Err = BbsError;

    /// Comma-separated list; entries may be decimals or fractions like `1/3`.
    fn from_str(s: &str) -> Result<Self> {
        let p = s
            .split(',')
            .map(|tok| parse_prob(tok.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(p)
    }
}

fn parse_prob(tok: &str) -> Result<f64> {
    let bad = || BbsError::InvalidDistribution(format!("cannot parse `{tok}`"));
    match tok.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => tok.parse().map_err(|_| bad()),
    }
}

impl fmt::Display for ColorDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.p.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}
