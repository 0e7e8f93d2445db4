//! Ascent and penalized-length functionals and the Greene-Kleitman type
//! maximizations built from them.
//!
//! Row sums are maximized over partitions of the sites into `k` classes,
//! scoring each class by its rises: steps `a_{i-1} -> a_i` with
//! `X(a_{i-1}) < X(a_i)`, where every class starts from a virtual empty box.
//! For a nonempty class this equals `num_ascents` minus one when the class
//! begins on an empty site, and matches the carrier energy exactly.

use crate::config::BallConfig;
use crate::error::{BbsError, Result};

/// Largest support handled by the exhaustive searches.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Strictly increasing set of positive sites.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SiteSet {
    sites: Vec<usize>,
}

impl SiteSet {
    pub fn new(sites: Vec<usize>) -> Result<Self> {
        if sites.first() == Some(&0) {
            return Err(BbsError::InvalidArgument("sites are 1-based".into()));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BbsError::InvalidArgument("sites must be strictly increasing".into()));
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    /// `max(self) < min(other)`; empty sets precede and follow everything.
    pub fn precedes(&self, other: &SiteSet) -> bool {
        match (self.sites.last(), other.sites.first()) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }
}

/// `1 + #{i ≥ 2 : X(a_{i-1}) < X(a_i)}`, or 0 on the empty set.
pub fn num_ascents(a: &SiteSet, x: &BallConfig) -> usize {
    if a.is_empty() {
        return 0;
    }
    1 + a.sites.windows(2).filter(|w| x.get(w[0]) < x.get(w[1])).count()
}

/// Rises of `X` along `A` starting from a virtual empty box.
pub fn rises(a: &SiteSet, x: &BallConfig) -> usize {
    let mut prev = 0;
    let mut count = 0;
    for &s in &a.sites {
        let v = x.get(s);
        if v > prev {
            count += 1;
        }
        prev = v;
    }
    count
}

/// `|A|` minus the empty sites in `[min A, max A]` when `X` is non-increasing on `A`, else 0.
pub fn penalized_length(a: &SiteSet, x: &BallConfig) -> i64 {
    let (Some(&lo), Some(&hi)) = (a.sites.first(), a.sites.last()) else {
        return 0;
    };
    if a.sites.windows(2).any(|w| x.get(w[0]) < x.get(w[1])) {
        return 0;
    }
    let zeros = (lo..=hi).filter(|&s| x.get(s) == 0).count();
    a.len() as i64 - zeros as i64
}

fn check_size(x: &BallConfig) -> Result<()> {
    if x.len() > BRUTE_FORCE_LIMIT {
        return Err(BbsError::SizeLimit { sites: x.len(), limit: BRUTE_FORCE_LIMIT });
    }
    Ok(())
}

/// Maximum total rises over partitions of the sites into `k` classes, by exhaustive search.
pub fn gk_rows_bruteforce(x: &BallConfig, k: usize) -> Result<usize> {
    check_size(x)?;
    if k == 0 {
        return Ok(0);
    }
    let mut last = vec![0u32; k];
    Ok(rows_dfs(x.cells(), &mut last))
}

// A class is summarized by its last color; an empty class looks like one
// ending on an empty box. Classes with equal last colors are interchangeable.
fn rows_dfs(cells: &[u32], last: &mut [u32]) -> usize {
    let Some((&v, rest)) = cells.split_first() else {
        return 0;
    };
    let mut best = 0;
    for i in 0..last.len() {
        if last[..i].contains(&last[i]) {
            continue;
        }
        let prev = last[i];
        last[i] = v;
        let score = usize::from(v > prev) + rows_dfs(rest, last);
        last[i] = prev;
        best = best.max(score);
    }
    best
}

/// Maximum total penalized length over `A_1 ≺ ... ≺ A_k`, by interval dynamic programming.
///
/// An optimal set never uses empty sites, so each `A_i` is a non-increasing
/// subsequence of balls inside a window, scored against the empty sites of
/// that window. The windows are disjoint and ordered, and unused windows
/// contribute zero.
pub fn gk_cols(x: &BallConfig, k: usize) -> usize {
    let cells = x.cells();
    let n = cells.len();
    if k == 0 || n == 0 {
        return 0;
    }
    // w[l][r]: best window score on cells l..=r (0-based).
    let mut w = vec![vec![0i64; n]; n];
    #[allow(clippy::needless_range_loop)]
    for l in 0..n {
        // tails[len-1] = largest possible last value of a non-increasing run of length len
        let mut tails: Vec<u32> = Vec::new();
        let mut zeros = 0i64;
        for r in l..n {
            let v = cells[r];
            if v == 0 {
                zeros += 1;
            } else {
                let pos = tails.partition_point(|&t| t >= v);
                if pos == tails.len() {
                    tails.push(v);
                } else {
                    tails[pos] = v;
                }
            }
            w[l][r] = tails.len() as i64 - zeros;
        }
    }
    // g[r]: best score with the windows used so far inside cells 0..r.
    let mut g = vec![0i64; n + 1];
    for _ in 0..k {
        let mut next = vec![0i64; n + 1];
        for r in 1..=n {
            let mut best = next[r - 1];
            for l in 1..=r {
                best = best.max(g[l - 1] + w[l - 1][r - 1]);
            }
            next[r] = best;
        }
        g = next;
    }
    g[n].max(0) as usize
}

/// Exhaustive oracle for [`gk_cols`].
pub fn gk_cols_bruteforce(x: &BallConfig, k: usize) -> Result<usize> {
    check_size(x)?;
    if k == 0 {
        return Ok(0);
    }
    let n = x.len();
    let mut labels = vec![0usize; n];
    let mut best = 0i64;
    cols_dfs(x, k, 0, 1, &mut labels, &mut best);
    Ok(best.max(0) as usize)
}

// labels[s] = 0 leaves site s+1 unused; otherwise it joins A_label. Labels of
// used sites are non-decreasing, which is exactly the ordering A_1 ≺ ... ≺ A_k.
fn cols_dfs(x: &BallConfig, k: usize, pos: usize, floor: usize, labels: &mut [usize], best: &mut i64) {
    if pos == labels.len() {
        let total: i64 = (1..=k)
            .map(|label| {
                let sites = labels
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l == label)
                    .map(|(i, _)| i + 1)
                    .collect();
                penalized_length(&SiteSet { sites }, x)
            })
            .sum();
        *best = (*best).max(total);
        return;
    }
    labels[pos] = 0;
    cols_dfs(x, k, pos + 1, floor, labels, best);
    for label in floor..=k {
        labels[pos] = label;
        cols_dfs(x, k, pos + 1, label, labels, best);
    }
    labels[pos] = 0;
}
