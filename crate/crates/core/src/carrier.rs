//! Carrier processes, energies and Young diagram extraction.
//!
//! The carrier multiset is kept as a sorted list of `(color, multiplicity)`
//! pairs for the positive colors it holds. Zeros are implicit: a finite
//! carrier of capacity `c` holding `b` balls has `c - b` zero slots, while the
//! unbounded carrier always has infinitely many. The sparse list keeps every
//! update cheap whether `kappa` is 2 or equal to the system size.

use std::collections::HashMap;
use std::fmt;

use crate::config::BallConfig;
use crate::error::{BbsError, Result};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capacity {
    Finite(usize),
    Unbounded,
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Unbounded => write!(f, "inf"),
        }
    }
}

/// Multiset of positive colors carried along the lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Carrier {
    kappa: u32,
    capacity: Capacity,
    held: Vec<(u32, usize)>,
    balls: usize,
}

impl Carrier {
    pub fn new(kappa: u32, capacity: Capacity) -> Result<Self> {
        if kappa == 0 {
            return Err(BbsError::ZeroKappa);
        }
        if capacity == Capacity::Finite(0) {
            return Err(BbsError::InvalidArgument("carrier capacity must be positive".into()));
        }
        Ok(Self { kappa, capacity, held: Vec::new(), balls: 0 })
    }

    pub fn unbounded(kappa: u32) -> Result<Self> {
        Self::new(kappa, Capacity::Unbounded)
    }

    pub fn finite(kappa: u32, capacity: usize) -> Result<Self> {
        Self::new(kappa, Capacity::Finite(capacity))
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn capacity(&self) -> Capacity {
        self.capacity
    }

    /// Number of positive balls held, `‖SΓ‖₁`.
    pub fn balls(&self) -> usize {
        self.balls
    }

    pub fn is_empty(&self) -> bool {
        self.balls == 0
    }

    pub fn is_full(&self) -> bool {
        matches!(self.capacity, Capacity::Finite(c) if self.balls == c)
    }

    /// Held `(color, multiplicity)` pairs in increasing color order.
    pub fn held(&self) -> &[(u32, usize)] {
        &self.held
    }

    pub fn mult(&self, color: u32) -> usize {
        match self.held.binary_search_by_key(&color, |&(c, _)| c) {
            Ok(i) => self.held[i].1,
            Err(_) => 0,
        }
    }

    /// Dense multiplicity vector `(m_1, ..., m_kappa)`.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.kappa as usize];
        for &(c, m) in &self.held {
            out[c as usize - 1] = m;
        }
        out
    }

    /// Largest entry, zero when no balls are held.
    pub fn max_entry(&self) -> u32 {
        self.held.last().map_or(0, |&(c, _)| c)
    }

    /// Smallest entry of the word, counting zero slots.
    pub fn min_entry(&self) -> u32 {
        if self.is_full() {
            self.held.first().map_or(0, |&(c, _)| c)
        } else {
            0
        }
    }

    /// Non-increasing word; finite carriers are padded with zeros to capacity.
    pub fn word(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.balls);
        for &(c, m) in self.held.iter().rev() {
            out.extend(std::iter::repeat_n(c, m));
        }
        if let Capacity::Finite(cap) = self.capacity {
            out.resize(cap, 0);
        }
        out
    }

    pub(crate) fn largest_below(&self, y: u32) -> Option<u32> {
        let idx = self.held.partition_point(|&(c, _)| c < y);
        idx.checked_sub(1).map(|i| self.held[i].0)
    }

    pub(crate) fn insert(&mut self, color: u32) {
        debug_assert!(color > 0);
        match self.held.binary_search_by_key(&color, |&(c, _)| c) {
            Ok(i) => self.held[i].1 += 1,
            Err(i) => self.held.insert(i, (color, 1)),
        }
        self.balls += 1;
    }

    pub(crate) fn remove(&mut self, color: u32) {
        let i = self
            .held
            .binary_search_by_key(&color, |&(c, _)| c)
            .expect("removing a color the carrier does not hold");
        if self.held[i].1 == 1 {
            self.held.remove(i);
        } else {
            self.held[i].1 -= 1;
        }
        self.balls -= 1;
    }

    /// Reads `y`, returns the expelled color.
    pub fn step(&mut self, y: u32) -> Result<u32> {
        if y > self.kappa {
            return Err(BbsError::InvalidColor { color: y, kappa: self.kappa });
        }
        Ok(self.step_flag(y).0)
    }

    /// Unchecked step that also reports whether `y` exceeded the minimum entry
    /// before the update (the energy indicator).
    pub(crate) fn step_flag(&mut self, y: u32) -> (u32, bool) {
        let exceeded = y > self.min_entry();
        let expelled = match self.capacity {
            Capacity::Unbounded if y == 0 => {
                let top = self.max_entry();
                if top > 0 {
                    self.remove(top);
                }
                top
            }
            Capacity::Unbounded => self.replace(y),
            Capacity::Finite(_) if exceeded => self.replace(y),
            Capacity::Finite(_) => {
                let top = self.max_entry();
                if top > 0 {
                    self.remove(top);
                }
                if y > 0 {
                    self.insert(y);
                }
                top
            }
        };
        (expelled, exceeded)
    }

    /// Circular exclusion: `y` takes the place of the largest entry below it.
    fn replace(&mut self, y: u32) -> u32 {
        let out = self.largest_below(y).unwrap_or(0);
        if out > 0 {
            self.remove(out);
        }
        self.insert(y);
        out
    }
}

/// Snapshots `Γ_0, ..., Γ_T` and expelled colors `X'(1), ..., X'(T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarrierTrace {
    pub kappa: u32,
    pub capacity: Capacity,
    pub states: Vec<Carrier>,
    pub expelled: Vec<u32>,
}

impl CarrierTrace {
    /// Expelled sequence as a configuration.
    pub fn output(&self) -> BallConfig {
        BallConfig::new(self.kappa, self.expelled.clone()).expect("expelled colors are in range")
    }

    /// `t m1 ... mkappa expelled` per line for `t >= 1`, after a header.
    pub fn to_text(&self) -> String {
        let mut out = format!("# kappa={} capacity={}\n", self.kappa, self.capacity);
        for (t, (state, x)) in self.states.iter().skip(1).zip(&self.expelled).enumerate() {
            out.push_str(&(t + 1).to_string());
            for m in state.multiplicities() {
                out.push(' ');
                out.push_str(&m.to_string());
            }
            out.push(' ');
            out.push_str(&x.to_string());
            out.push('\n');
        }
        out
    }
}

/// Runs a carrier over the configuration and then over zeros until it is empty.
pub fn run_carrier(config: &BallConfig, capacity: Capacity) -> Result<CarrierTrace> {
    let mut carrier = Carrier::new(config.kappa(), capacity)?;
    let mut states = vec![carrier.clone()];
    let mut expelled = Vec::with_capacity(config.len() + 1);
    for &y in config.cells() {
        expelled.push(carrier.step_flag(y).0);
        states.push(carrier.clone());
    }
    while !carrier.is_empty() {
        expelled.push(carrier.step_flag(0).0);
        states.push(carrier.clone());
    }
    Ok(CarrierTrace { kappa: config.kappa(), capacity, states, expelled })
}

/// The one-step evolution obtained from the unbounded carrier.
pub fn evolve_via_carrier(config: &BallConfig) -> BallConfig {
    run_carrier(config, Capacity::Unbounded).expect("kappa is validated").output()
}

fn energy_cells(kappa: u32, cells: &[u32], k: usize) -> usize {
    if k == 0 {
        return 0;
    }
    let mut carrier = Carrier::finite(kappa, k).expect("positive capacity");
    cells.iter().filter(|&&y| carrier.step_flag(y).1).count()
}

/// `E_k(X)`: number of sites whose color exceeds the minimum of the capacity-`k` carrier.
pub fn energy(config: &BallConfig, k: usize) -> usize {
    energy_cells(config.kappa(), config.cells(), k)
}

/// `E_0, E_1, ..., E_{c_max}`.
pub fn energies(config: &BallConfig, c_max: usize) -> Vec<usize> {
    (0..=c_max).map(|k| energy(config, k)).collect()
}

/// Rows `ρ_k = E_k - E_{k-1}` for `k = 1..=c*` where `c*` is the ball count.
pub fn young_diagram(config: &BallConfig) -> Partition {
    let e = energies(config, config.ball_count());
    rows_from_energies(&e)
}

/// Same diagram, stopping at `λ_1` from the queue formula instead of the ball count.
pub fn young_diagram_fast(config: &BallConfig) -> Partition {
    let e = energies(config, lambda1_queue(config));
    rows_from_energies(&e)
}

fn rows_from_energies(e: &[usize]) -> Partition {
    let rows: Vec<usize> = e.windows(2).map(|w| w[1] - w[0]).take_while(|&r| r > 0).collect();
    Partition::from_rows(rows).expect("energy increments are non-increasing")
}

/// Rows `ρ_1, ..., ρ_{k_max}`.
pub fn top_rows(config: &BallConfig, k_max: usize) -> Vec<usize> {
    energies(config, k_max).windows(2).map(|w| w[1] - w[0]).collect()
}

/// `λ_1` as the largest ball count of the unbounded carrier.
pub fn lambda1_queue(config: &BallConfig) -> usize {
    let mut carrier = Carrier::unbounded(config.kappa()).expect("kappa is validated");
    let mut best = 0;
    for &y in config.cells() {
        carrier.step_flag(y);
        best = best.max(carrier.balls());
    }
    best
}

/// Energies cached by capacity, for locating columns by bisection.
struct EnergyCache<'a> {
    config: &'a BallConfig,
    cache: HashMap<usize, usize>,
}

impl EnergyCache<'_> {
    fn energy(&mut self, c: usize) -> usize {
        if let Some(&e) = self.cache.get(&c) {
            return e;
        }
        let e = energy(self.config, c);
        self.cache.insert(c, e);
        e
    }

    fn row(&mut self, c: usize) -> usize {
        self.energy(c) - self.energy(c - 1)
    }
}

/// Columns `λ_1, ..., λ_{j_max}` with `λ_j = max{c : ρ_c ≥ j}`.
///
/// Rows are non-increasing in `c`, so each column is found by bisection on
/// `[1, λ_{j-1}]` and only `O(j_max log λ_1)` carrier passes are needed.
pub fn top_columns(config: &BallConfig, j_max: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(j_max);
    if j_max == 0 {
        return out;
    }
    let mut hi = lambda1_queue(config);
    out.push(hi);
    let mut cache = EnergyCache { config, cache: HashMap::new() };
    for j in 2..=j_max {
        if hi == 0 || cache.row(1) < j {
            out.push(0);
            hi = 0;
            continue;
        }
        let (mut lo, mut up) = (1, hi);
        while lo < up {
            let mid = lo + (up - lo).div_ceil(2);
            if cache.row(mid) >= j {
                lo = mid;
            } else {
                up = mid - 1;
            }
        }
        hi = lo;
        out.push(lo);
    }
    out
}

/// Whether the capacity-`c` word is always the capacity-`(c+1)` word with one entry removed.
pub fn check_capacity_coupling(config: &BallConfig, c: usize) -> Result<bool> {
    let kappa = config.kappa();
    let mut small = Carrier::finite(kappa, c)?;
    let mut large = Carrier::finite(kappa, c + 1)?;
    for &y in config.cells() {
        if !word_contains(&large, &small) {
            return Ok(false);
        }
        small.step_flag(y);
        large.step_flag(y);
    }
    loop {
        if !word_contains(&large, &small) {
            return Ok(false);
        }
        if small.is_empty() && large.is_empty() {
            break;
        }
        small.step_flag(0);
        large.step_flag(0);
    }
    Ok(true)
}

fn word_contains(large: &Carrier, small: &Carrier) -> bool {
    let zeros = |c: &Carrier| match c.capacity {
        Capacity::Finite(cap) => cap - c.balls,
        Capacity::Unbounded => usize::MAX,
    };
    zeros(small) <= zeros(large) && small.held.iter().all(|&(color, m)| large.mult(color) >= m)
}

/// CSV `k,E_k` for `k = 0..`.
pub fn energy_csv(energies: &[usize]) -> String {
    let mut out = String::from("k,E_k\n");
    for (k, e) in energies.iter().enumerate() {
        out.push_str(&format!("{k},{e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x0() -> BallConfig {
        BallConfig::new(5, vec![0, 0, 3, 1, 2, 0, 5, 1, 3, 0, 0, 4, 1, 1, 2, 5, 2, 0, 0, 3, 2, 1, 1]).unwrap()
    }

    fn holding(kappa: u32, capacity: Capacity, colors: &[u32]) -> Carrier {
        let mut c = Carrier::new(kappa, capacity).unwrap();
        for &x in colors {
            c.insert(x);
        }
        c
    }

    #[test]
    fn unbounded_rule() {
        let mut c = Carrier::unbounded(3).unwrap();
        assert_eq!(c.step(2).unwrap(), 0);
        assert_eq!(c.multiplicities(), vec![0, 1, 0]);
        let mut e = Carrier::unbounded(3).unwrap();
        assert_eq!(e.step(0).unwrap(), 0);
        assert!(e.is_empty());
        let mut c = holding(3, Capacity::Unbounded, &[3, 1]);
        assert_eq!(c.step(2).unwrap(), 1);
        assert_eq!(c.word(), vec![3, 2]);
        assert!(c.step(4).is_err());
    }

    #[test]
    fn finite_rule() {
        let mut c = holding(3, Capacity::Finite(3), &[2]);
        assert_eq!(c.step(0).unwrap(), 2);
        assert!(c.is_empty());
        let mut one = holding(1, Capacity::Finite(1), &[1]);
        assert_eq!(one.step(1).unwrap(), 1);
        assert_eq!(one.word(), vec![1]);
        let mut full = holding(3, Capacity::Finite(2), &[3, 2]);
        assert_eq!(full.min_entry(), 2);
        assert_eq!(full.step(1).unwrap(), 3);
        assert_eq!(full.word(), vec![2, 1]);
    }

    #[test]
    fn capacity_three_on_worked_example() {
        let x = x0();
        let mut c = Carrier::finite(5, 3).unwrap();
        let mut out = Vec::new();
        for &y in x.cells() {
            out.push(c.step(y).unwrap());
        }
        // After reading X(1..=3) = 0 0 3 the carrier word is [3,0,0].
        let mut d = Carrier::finite(5, 3).unwrap();
        for &y in &x.cells()[..3] {
            d.step(y).unwrap();
        }
        assert_eq!(d.word(), vec![3, 0, 0]);
        assert_eq!(out.len(), x.len());
    }

    #[test]
    fn worked_example_diagram_and_energies() {
        let x = x0();
        assert_eq!(energy(&x, 1), 8);
        assert_eq!(energy(&x, 2), 13);
        let d = young_diagram(&x);
        assert_eq!(d.rows(), &[8, 5, 2, 1]);
        assert_eq!(d.columns(), vec![4, 3, 2, 2, 2, 1, 1, 1]);
        assert_eq!(young_diagram_fast(&x), d);
        assert_eq!(lambda1_queue(&x), 4);
        assert_eq!(top_columns(&x, 10), vec![4, 3, 2, 2, 2, 1, 1, 1, 0, 0]);
        assert_eq!(top_rows(&x, 5), vec![8, 5, 2, 1, 0]);
    }

    #[test]
    fn carrier_output_is_one_step() {
        let x = x0();
        assert_eq!(evolve_via_carrier(&x), x.evolve_step());
        let finite = run_carrier(&x, Capacity::Finite(x.ball_count())).unwrap();
        assert_eq!(finite.output(), x.evolve_step());
    }

    #[test]
    fn empty_config() {
        let x = BallConfig::empty(2).unwrap();
        let t = run_carrier(&x, Capacity::Unbounded).unwrap();
        assert_eq!(t.states.len(), 1);
        assert!(t.expelled.is_empty());
        assert_eq!(energy(&x, 3), 0);
        assert!(young_diagram(&x).is_empty());
        assert_eq!(lambda1_queue(&x), 0);
        assert_eq!(top_columns(&x, 2), vec![0, 0]);
    }

    #[test]
    fn coupling_on_worked_example() {
        let x = x0();
        for c in 1..=5 {
            assert!(check_capacity_coupling(&x, c).unwrap());
        }
    }

    #[test]
    fn trace_text_format() {
        let x = BallConfig::new(2, vec![2, 1]).unwrap();
        let t = run_carrier(&x, Capacity::Unbounded).unwrap();
        assert_eq!(t.to_text(), "# kappa=2 capacity=inf\n1 0 1 0\n2 1 1 0\n3 1 0 2\n4 0 0 1\n");
        assert_eq!(energy_csv(&[0, 2]), "k,E_k\n0,0\n1,2\n");
    }
}
