//! Phase of the independence model.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::{ColorDist, PROB_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum PhaseLabel {
    Subcritical,
    /// `r` colors tie with `p_0`.
    Critical { r: usize },
    SimpleSupercritical,
    NonSimpleSupercritical,
}

/// Compares `p* = max p_i` with `p_0`; densities within `1e-12` count as equal.
pub fn phase_classify(p: &ColorDist) -> PhaseLabel {
    let (p0, star) = (p.p0(), p.p_star());
    if star < p0 - PROB_TOL {
        return PhaseLabel::Subcritical;
    }
    let ties = |v: f64| p.probs()[1..].iter().filter(|&&x| (x - v).abs() <= PROB_TOL).count();
    if (star - p0).abs() <= PROB_TOL {
        return PhaseLabel::Critical { r: ties(p0) };
    }
    if ties(star) == 1 {
        PhaseLabel::SimpleSupercritical
    } else {
        PhaseLabel::NonSimpleSupercritical
    }
}

impl PhaseLabel {
    pub fn is_supercritical(self) -> bool {
        matches!(self, PhaseLabel::SimpleSupercritical | PhaseLabel::NonSimpleSupercritical)
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseLabel::Subcritical => write!(f, "subcritical"),
            PhaseLabel::Critical { r } => write!(f, "critical(r={r})"),
            PhaseLabel::SimpleSupercritical => write!(f, "simple supercritical"),
            PhaseLabel::NonSimpleSupercritical => write!(f, "non-simple supercritical"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phase(s: &str) -> PhaseLabel {
        phase_classify(&s.parse().unwrap())
    }

    #[test]
    fn table_cases() {
        assert_eq!(phase("0.5,0.3,0.2"), PhaseLabel::Subcritical);
        assert_eq!(phase("1/3,1/3,1/3"), PhaseLabel::Critical { r: 2 });
        assert_eq!(phase("0.4,0.4,0.2"), PhaseLabel::Critical { r: 1 });
        assert_eq!(phase("0.5,0.5"), PhaseLabel::Critical { r: 1 });
        assert_eq!(phase("0.2,0.5,0.3"), PhaseLabel::SimpleSupercritical);
        assert_eq!(phase("0.2,0.4,0.4"), PhaseLabel::NonSimpleSupercritical);
        assert_eq!(PhaseLabel::Critical { r: 2 }.to_string(), "critical(r=2)");
    }
}
