//! Box-ball configurations and their exact time evolution.
//!
//! A configuration is a coloring of the sites `1, 2, 3, ...` by colors
//! `0..=kappa`, where `0` marks an empty box. Only finitely many sites are
//! occupied; the dense cell vector stores sites `1..=len` and everything past
//! it is implicitly empty. Trailing zeros are always trimmed so structural
//! equality coincides with equality of colorings.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{BbsError, Result};

/// Finite-support coloring of the positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BallConfig {
    kappa: u32,
    cells: Vec<u32>,
}

/// A maximal non-increasing run of consecutive positive cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// 1-based site of the leftmost ball.
    pub start: usize,
    pub colors: Vec<u32>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// 1-based site just right of the last ball.
    pub fn end(&self) -> usize {
        self.start + self.colors.len()
    }
}

impl BallConfig {
    pub fn new(kappa: u32, cells: Vec<u32>) -> Result<Self> {
        if kappa == 0 {
            return Err(BbsError::ZeroKappa);
        }
        if let Some(&color) = cells.iter().find(|&&c| c > kappa) {
            return Err(BbsError::InvalidColor { color, kappa });
        }
        let mut config = Self { kappa, cells };
        config.trim();
        Ok(config)
    }

    pub fn empty(kappa: u32) -> Result<Self> {
        Self::new(kappa, Vec::new())
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    /// Cells for sites `1..=len`; the last stored cell is nonzero unless empty.
    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Color at 1-based `site`; zero outside the stored window.
    pub fn get(&self, site: usize) -> u32 {
        if site == 0 {
            return 0;
        }
        self.cells.get(site - 1).copied().unwrap_or(0)
    }

    /// Infinite color sequence `X(1), X(2), ...`.
    pub fn colors(&self) -> impl Iterator<Item = u32> + '_ {
        self.cells.iter().copied().chain(std::iter::repeat(0))
    }

    pub fn ball_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    /// Number of balls of each color `0..=kappa` (index 0 counts empty stored cells).
    pub fn color_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.kappa as usize + 1];
        for &c in &self.cells {
            counts[c as usize] += 1;
        }
        counts
    }

    /// Same coloring viewed with a larger palette.
    pub fn with_kappa(&self, kappa: u32) -> Result<Self> {
        Self::new(kappa, self.cells.clone())
    }

    fn trim(&mut self) {
        while self.cells.last() == Some(&0) {
            self.cells.pop();
        }
    }

    fn check_positive(&self, color: u32) -> Result<()> {
        if color == 0 || color > self.kappa {
            return Err(BbsError::NotPositiveColor { color, kappa: self.kappa });
        }
        Ok(())
    }

    /// Applies `K_a`: balls of color `a`, taken left to right, each jump to the
    /// leftmost empty site to their right.
    pub fn apply_k(&self, color: u32) -> Result<Self> {
        self.check_positive(color)?;
        let mut lattice = Lattice::new(&self.cells);
        let positions: Vec<usize> = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == color)
            .map(|(i, _)| i)
            .collect();
        lattice.jump_all(&positions, color);
        Ok(lattice.into_config(self.kappa))
    }

    /// One step of the dynamics, `K_1 ∘ K_2 ∘ ... ∘ K_kappa`.
    pub fn evolve_step(&self) -> Self {
        let mut by_color: Vec<Vec<usize>> = vec![Vec::new(); self.kappa as usize + 1];
        for (i, &c) in self.cells.iter().enumerate() {
            if c != 0 {
                by_color[c as usize].push(i);
            }
        }
        // Ball positions of color a are untouched until K_a runs, so the
        // initial index stays valid for every pass.
        let mut lattice = Lattice::new(&self.cells);
        for color in (1..=self.kappa).rev() {
            lattice.jump_all(&by_color[color as usize], color);
        }
        lattice.into_config(self.kappa)
    }

    /// Evolves `steps` times and returns every state including the initial one.
    pub fn trajectory(&self, steps: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(self.clone());
        for _ in 0..steps {
            let next = out.last().expect("non-empty").evolve_step();
            out.push(next);
        }
        out
    }

    /// Cyclic single-color update: color-`kappa` balls jump per `K_kappa`, then
    /// become color 1 while every other positive color is incremented.
    pub fn cyclic_step(&self) -> Self {
        let top = self.kappa;
        let moved = self.apply_k(top).expect("kappa is a positive color");
        let cells = moved
            .cells
            .iter()
            .map(|&c| match c {
                0 => 0,
                c if c == top => 1,
                c => c + 1,
            })
            .collect();
        Self { kappa: self.kappa, cells }
    }

    /// Relabels balls so that every positive color is used exactly once.
    ///
    /// Color classes are processed in increasing order; within a class the
    /// labels increase from right to left. The resulting palette has
    /// `max(N, 1)` colors where `N` is the number of balls.
    pub fn standardize(&self) -> Self {
        let mut by_color: Vec<Vec<usize>> = vec![Vec::new(); self.kappa as usize + 1];
        for (i, &c) in self.cells.iter().enumerate() {
            if c != 0 {
                by_color[c as usize].push(i);
            }
        }
        let mut cells = vec![0u32; self.cells.len()];
        let mut next = 1u32;
        for positions in by_color.iter().skip(1) {
            for &i in positions.iter().rev() {
                cells[i] = next;
                next += 1;
            }
        }
        let kappa = (next - 1).max(1);
        Self { kappa, cells }
    }

    /// Maximal non-increasing runs of consecutive positive cells, left to right.
    pub fn blocks(&self) -> Vec<Block> {
        let mut blocks: Vec<Block> = Vec::new();
        let mut current: Option<Block> = None;
        for (i, &c) in self.cells.iter().enumerate() {
            if c == 0 {
                blocks.extend(current.take());
                continue;
            }
            match current.as_mut() {
                Some(block) if *block.colors.last().expect("non-empty block") >= c => {
                    block.colors.push(c)
                }
                _ => {
                    blocks.extend(current.take());
                    current = Some(Block { start: i + 1, colors: vec![c] });
                }
            }
        }
        blocks.extend(current);
        blocks
    }

    /// Whether the configuration already consists of non-interacting solitons.
    ///
    /// Block lengths must be non-decreasing from the left, and for adjacent
    /// blocks with left length `l` and gap `g` the `i`-th largest entry of the
    /// right block must exceed the `(i+g)`-th largest entry of the left block
    /// whenever `i + g <= l`.
    pub fn soliton_decomposition_reached(&self) -> bool {
        let blocks = self.blocks();
        blocks.windows(2).all(|pair| {
            let (left, right) = (&pair[0], &pair[1]);
            if left.len() > right.len() {
                return false;
            }
            let gap = right.start - left.end();
            // Blocks are non-increasing, so their i-th largest entry is entry i.
            (1..=left.len())
                .take_while(|i| i + gap <= left.len())
                .all(|i| right.colors[i - 1] > left.colors[i + gap - 1])
        })
    }

    /// Renders `kappa=<k>` followed by one line of cells.
    pub fn to_text(&self) -> String {
        write_configs(self.kappa, std::slice::from_ref(self))
    }
}

impl fmt::Display for BallConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for c in &self.cells {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

/// Writes a `kappa=<k>` header and one configuration per line.
pub fn write_configs(kappa: u32, configs: &[BallConfig]) -> String {
    let mut out = format!("kappa={kappa}\n");
    for config in configs {
        out.push_str(&config.to_string());
        out.push('\n');
    }
    out
}

/// Parses the line format produced by [`write_configs`]. Blank lines and lines
/// starting with `#` are ignored.
pub fn parse_configs(text: &str) -> Result<(u32, Vec<BallConfig>)> {
    let mut kappa: Option<u32> = None;
    let mut configs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(k) = kappa else {
            let value = line.strip_prefix("kappa=").ok_or_else(|| BbsError::Parse {
                line: line_no,
                message: "expected header `kappa=<int>`".into(),
            })?;
            let k = value.trim().parse::<u32>().map_err(|e| BbsError::Parse {
                line: line_no,
                message: format!("bad kappa: {e}"),
            })?;
            if k == 0 {
                return Err(BbsError::ZeroKappa);
            }
            kappa = Some(k);
            continue;
        };
        let cells = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>().map_err(|e| BbsError::Parse {
                    line: line_no,
                    message: format!("bad cell `{tok}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let config = BallConfig::new(k, cells).map_err(|e| BbsError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        configs.push(config);
    }
    let kappa = kappa.ok_or(BbsError::Parse { line: 0, message: "missing `kappa=` header".into() })?;
    Ok((kappa, configs))
}

impl FromStr for BallConfig {
    type Err = BbsError;

    fn from_str(s: &str) -> Result<Self> {
        let (_, mut configs) = parse_configs(s)?;
        match configs.len() {
            1 => Ok(configs.remove(0)),
            n => Err(BbsError::Parse { line: 0, message: format!("expected one configuration, found {n}") }),
        }
    }
}

/// Mutable working copy used by the jump operators, with an index of empty
/// sites inside the stored window.
struct Lattice {
    cells: Vec<u32>,
    empties: BTreeSet<usize>,
}

impl Lattice {
    fn new(cells: &[u32]) -> Self {
        let empties = cells.iter().enumerate().filter(|(_, &c)| c == 0).map(|(i, _)| i).collect();
        Self { cells: cells.to_vec(), empties }
    }

    fn first_empty_after(&self, pos: usize) -> usize {
        self.empties.range(pos + 1..).next().copied().unwrap_or(self.cells.len())
    }

    fn jump_all(&mut self, positions: &[usize], color: u32) {
        for &pos in positions {
            debug_assert_eq!(self.cells[pos], color);
            let target = self.first_empty_after(pos);
            if target == self.cells.len() {
                self.cells.push(color);
            } else {
                self.cells[target] = color;
                self.empties.remove(&target);
            }
            self.cells[pos] = 0;
            self.empties.insert(pos);
        }
    }

    fn into_config(self, kappa: u32) -> BallConfig {
        let mut config = BallConfig { kappa, cells: self.cells };
        config.trim();
        config
    }
}
