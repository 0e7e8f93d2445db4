//! Command-line front end.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use bbs_lab::carrier::{
    check_capacity_coupling, energies, energy_csv, lambda1_queue, run_carrier, young_diagram, Capacity,
};
use bbs_lab::config::{parse_configs, write_configs, BallConfig};
use bbs_lab::exclusion::{cx_step, stationarity_test, states_csv, PointState};
use bbs_lab::excursions::{check_soliton_bounds, decompose_path, excursion_tail_fit, height_path, EXCURSION_CSV_HEADER};
use bbs_lab::experiments::{
    clt_supercritical, critical_profile, mc_independence, mc_permutation, phase_classify, ReferenceSpec, ScalingRun,
    SCHEMA,
};
use bbs_lab::invariants::{gk_cols, gk_rows_bruteforce, BRUTE_FORCE_LIMIT};
use bbs_lab::random::{gen_iid, trial_stream, Seed};
use bbs_lab::{BbsError, ColorDist, Result};
use rand::Rng;

const DEFAULT_LADDER: &str = "1000,4000,16000,64000";

#[derive(Debug, Parser)]
#[command(name = "bbs-lab", version, about = "Multicolor box-ball system laboratory")]
#[command(after_help = "Exit status: 0 on success, 1 on usage or runtime errors, 2 when a --verify check or invariants-check fails.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfigInput {
    /// File in the `kappa=<k>` text format; the first configuration is used.
    #[arg(long, conflicts_with = "cells")]
    input: Option<PathBuf>,
    /// Cells as a space or comma separated list, site 1 first.
    #[arg(long)]
    cells: Option<String>,
    /// Number of colors for --cells; defaults to the largest color present.
    #[arg(long)]
    kappa: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Added to every per-trial stream index.
    #[arg(long, default_value_t = 0)]
    stream_offset: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exact dynamics. Text output is the `kappa=<k>` format, one line per time step.
    Evolve {
        #[command(flatten)]
        config: ConfigInput,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: TextFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Young diagram of a configuration. CSV columns: k,E_k.
    Diagram {
        #[command(flatten)]
        config: ConfigInput,
        #[command(flatten)]
        output: Output,
    },
    /// Carrier states over a configuration. CSV columns: t,m_1..m_kappa,expelled.
    CarrierTrace {
        #[command(flatten)]
        config: ConfigInput,
        /// Positive integer or `inf`.
        #[arg(long, default_value = "inf", value_parser = parse_capacity)]
        capacity: Capacity,
        #[command(flatten)]
        output: Output,
    },
    /// Cross-check invariants of one configuration; exits 2 on any mismatch. CSV columns: check,pass.
    InvariantsCheck {
        #[command(flatten)]
        config: ConfigInput,
        #[command(flatten)]
        output: Output,
    },
    /// Permutation model ladder. CSV columns: n,trial,kind,index,value.
    McPermutation {
        #[arg(long, default_value = DEFAULT_LADDER, value_parser = parse_n_list)]
        n: NList,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        k_max: usize,
        #[command(flatten)]
        seed: SeedArgs,
        /// Spot-check invariants on every sample; exits 2 on failure.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Independence model ladder. CSV columns: n,trial,kind,index,value.
    McIndependence {
        /// Probabilities p_0,...,p_kappa.
        #[arg(long)]
        p: ColorDist,
        #[arg(long, default_value = DEFAULT_LADDER, value_parser = parse_n_list)]
        n: NList,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        j_max: usize,
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        output: Output,
    },
    /// n^{-1/2} λ_1 at a critical p. CSV columns: n,trial,scaled.
    CriticalProfile {
        #[arg(long)]
        p: ColorDist,
        #[arg(long, default_value = DEFAULT_LADDER, value_parser = parse_n_list)]
        n: NList,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        seed: SeedArgs,
        /// Reference paths of the reflected walk.
        #[arg(long, default_value_t = 10_000)]
        ref_paths: usize,
        #[arg(long, default_value_t = 10_000)]
        ref_steps: usize,
        /// Steps used to estimate γ².
        #[arg(long, default_value_t = 1_000_000)]
        gamma_steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Normal fluctuations of λ_1 at a supercritical p. CSV columns: key,value.
    CltSupercritical {
        #[arg(long)]
        p: ColorDist,
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        seed: SeedArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Excursions of the carrier over sampled configurations. CSV columns: trial,index,length,height.
    Excursions {
        #[arg(long)]
        p: ColorDist,
        #[arg(long, default_value = "10000", value_parser = parse_count)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Excursions for the tail fit (subcritical p only).
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        excursions: usize,
        #[arg(long, default_value_t = 10)]
        x_max: usize,
        #[command(flatten)]
        seed: SeedArgs,
        #[command(flatten)]
        output: Output,
    },
    /// k-point circular exclusion on [0, 1]. CSV columns: x1..xk per subsample.
    CircularExclusion {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "10000", value_parser = parse_count)]
        burn_in: usize,
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        samples: usize,
        #[arg(long, default_value = "10000", value_parser = parse_count)]
        pairs: usize,
        #[arg(long, default_value_t = 40)]
        t_max: usize,
        #[command(flatten)]
        seed: SeedArgs,
        #[command(flatten)]
        output: Output,
    },
}

/// Newtype so clap treats the list as a single value.
#[derive(Debug, Clone)]
pub struct NList(pub Vec<usize>);

/// Accepts integers or decimal/scientific forms like `6.4e4`.
pub fn parse_count(s: &str) -> std::result::Result<usize, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: `{s}`"))?;
    if v < 0.0 || v.fract() != 0.0 || !v.is_finite() || v > 1e15 {
        return Err(format!("not a non-negative integer: `{s}`"));
    }
    Ok(v as usize)
}

pub fn parse_n_list(s: &str) -> std::result::Result<NList, String> {
    let values = s.split(',').map(parse_count).collect::<std::result::Result<Vec<_>, _>>()?;
    if values.is_empty() || values.contains(&0) {
        return Err("n values must be positive".into());
    }
    Ok(NList(values))
}

pub fn parse_capacity(s: &str) -> std::result::Result<Capacity, String> {
    match s.trim() {
        "inf" | "infinity" | "unbounded" => Ok(Capacity::Unbounded),
        v => match parse_count(v)? {
            0 => Err("capacity must be positive".into()),
            c => Ok(Capacity::Finite(c)),
        },
    }
}

impl ConfigInput {
    fn load(&self) -> Result<BallConfig> {
        if let Some(path) = &self.input {
            let (_, mut configs) = parse_configs(&fs::read_to_string(path)?)?;
            if configs.is_empty() {
                return Err(BbsError::InvalidArgument(format!("{} holds no configuration", path.display())));
            }
            return Ok(configs.swap_remove(0));
        }
        let Some(cells) = &self.cells else {
            return Err(BbsError::InvalidArgument("give --input or --cells".into()));
        };
        let cells = cells
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u32>().map_err(|e| BbsError::InvalidArgument(format!("bad cell `{t}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let kappa = self.kappa.unwrap_or_else(|| cells.iter().copied().max().unwrap_or(1).max(1));
        BallConfig::new(kappa, cells)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_scaling(run: &ScalingRun, output: &Output) -> Result<bool> {
    let text = match output.format {
        Format::Json => to_json(&run.report())?,
        Format::Csv => run.samples_csv(),
    };
    emit(&text, output.out.as_ref())?;
    Ok(run.verification_passed().unwrap_or(true))
}

fn invariants_report(x: &BallConfig) -> Vec<(&'static str, bool)> {
    let d = young_diagram(x);
    let cols = d.columns();
    let depth = cols.first().copied().unwrap_or(0).max(1) + 1;
    let e = energies(x, depth);
    let shifted = x.cyclic_step();
    let mut checks = vec![
        ("energy_invariance", e == energies(&shifted, depth)),
        ("cyclic_composition", {
            let mut y = x.clone();
            for _ in 0..x.kappa() {
                y = y.cyclic_step();
            }
            y == x.evolve_step()
        }),
        ("standardization", x.standardize().evolve_step() == x.evolve_step().standardize()),
        ("queue_formula", lambda1_queue(x) == d.column(1)),
        ("capacity_coupling", (1..=6).all(|c| check_capacity_coupling(x, c).unwrap_or(false))),
        ("excursion_bounds", check_soliton_bounds(x, x.len()).unwrap_or(false)),
        ("column_sums", (1..=cols.len() + 1).all(|k| gk_cols(x, k) == cols.iter().take(k).sum::<usize>())),
    ];
    if x.len() <= BRUTE_FORCE_LIMIT {
        checks.push(("row_sums", (1..=depth).all(|k| gk_rows_bruteforce(x, k).map(|v| v == e[k]).unwrap_or(false))));
    }
    checks
}

/// Runs one command; `Ok(false)` means a verification check failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Evolve { config, steps, format, out } => {
            let x = config.load()?;
            let traj = x.trajectory(steps);
            let text = if format == TextFormat::Json {
                let rows: Vec<Vec<u32>> = traj.iter().map(|c| c.cells().to_vec()).collect();
                to_json(&json!({ "schema": SCHEMA, "kappa": x.kappa(), "trajectory": rows }))?
            } else {
                write_configs(x.kappa(), &traj)
            };
            emit(&text, out.as_ref())?;
            Ok(true)
        }
        Command::Diagram { config, output } => {
            let x = config.load()?;
            let d = young_diagram(&x);
            let e = energies(&x, d.rows().len());
            let text = match output.format {
                Format::Csv => energy_csv(&e),
                Format::Json => to_json(&json!({
                    "schema": SCHEMA,
                    "kappa": x.kappa(),
                    "rows": d.rows(),
                    "columns": d.columns(),
                    "energies": e,
                    "decomposed": x.soliton_decomposition_reached(),
                }))?,
            };
            emit(&text, output.out.as_ref())?;
            Ok(true)
        }
        Command::CarrierTrace { config, capacity, output } => {
            let x = config.load()?;
            let trace = run_carrier(&x, capacity)?;
            let text = match output.format {
                Format::Csv => {
                    let mut s = String::from("t");
                    for i in 1..=x.kappa() {
                        s.push_str(&format!(",m{i}"));
                    }
                    s.push_str(",expelled\n");
                    for line in trace.to_text().lines().skip(1) {
                        s.push_str(&line.replace(' ', ","));
                        s.push('\n');
                    }
                    s
                }
                Format::Json => {
                    let states: Vec<Vec<usize>> = trace.states.iter().map(|c| c.multiplicities()).collect();
                    to_json(&json!({
                        "schema": SCHEMA,
                        "kappa": x.kappa(),
                        "capacity": capacity.to_string(),
                        "states": states,
                        "expelled": trace.expelled,
                    }))?
                }
            };
            emit(&text, output.out.as_ref())?;
            Ok(true)
        }
        Command::InvariantsCheck { config, output } => {
            let x = config.load()?;
            let checks = invariants_report(&x);
            let verified = checks.iter().all(|c| c.1);
            let text = match output.format {
                Format::Csv => {
                    let mut s = String::from("check,pass\n");
                    for (name, ok) in &checks {
                        s.push_str(&format!("{name},{ok}\n"));
                    }
                    s
                }
                Format::Json => {
                    let map: serde_json::Map<String, serde_json::Value> =
                        checks.iter().map(|(n, ok)| (n.to_string(), json!(ok))).collect();
                    to_json(&json!({ "schema": SCHEMA, "kappa": x.kappa(), "checks": map, "passed": verified }))?
                }
            };
            emit(&text, output.out.as_ref())?;
            Ok(verified)
        }
        Command::McPermutation { n, trials, k_max, seed, verify, output } => {
            let run = mc_permutation(&n.0, trials, k_max, seed.seed, seed.stream_offset, verify)?;
            emit_scaling(&run, &output)
        }
        Command::McIndependence { p, n, trials, j_max, seed, verify, output } => {
            let run = mc_independence(&n.0, &p, trials, j_max, seed.seed, seed.stream_offset, verify)?;
            emit_scaling(&run, &output)
        }
        Command::CriticalProfile { p, n, trials, seed, ref_paths, ref_steps, gamma_steps, output } => {
            let spec = ReferenceSpec { paths: ref_paths, steps: ref_steps, gamma_steps };
            let rep = critical_profile(&p, &n.0, trials, seed.seed, seed.stream_offset, spec)?;
            let text = match output.format {
                Format::Json => to_json(&rep)?,
                Format::Csv => {
                    let mut s = String::from("n,trial,scaled\n");
                    for pt in &rep.points {
                        for (t, v) in pt.scaled.iter().enumerate() {
                            s.push_str(&format!("{},{t},{v}\n", pt.n));
                        }
                    }
                    s
                }
            };
            emit(&text, output.out.as_ref())?;
            Ok(true)
        }
        Command::CltSupercritical { p, n, trials, seed, output } => {
            let rep = clt_supercritical(&p, n, trials, seed.seed, seed.stream_offset)?;
            let text = match output.format {
                Format::Json => to_json(&rep)?,
                Format::Csv => format!(
                    "key,value\nn,{}\ntrials,{}\ndrift,{}\nmean_ratio,{}\nstderr_ratio,{}\nskewness,{}\nexcess_kurtosis,{}\nks_normal,{}\nvar_ratio,{}\n",
                    rep.n, rep.trials, rep.drift, rep.mean_ratio, rep.stderr_ratio, rep.skewness, rep.excess_kurtosis, rep.ks_normal, rep.var_ratio
                ),
            };
            emit(&text, output.out.as_ref())?;
            Ok(true)
        }
        Command::Excursions { p, n, trials, excursions, x_max, seed, output } => {
            if n == 0 {
                return Err(BbsError::InvalidArgument("n must be positive".into()));
            }
            let summaries = (0..trials)
                .map(|t| {
                    let x = gen_iid(n, &p, Seed::new(seed.seed, trial_stream(seed.stream_offset, 0, t)))?;
                    Ok(decompose_path(&height_path(&x, n)))
                })
                .collect::<Result<Vec<_>>>()?;
            let text = match output.format {
                Format::Csv => {
                    let mut s = String::from(EXCURSION_CSV_HEADER);
                    for (t, ex) in summaries.iter().enumerate() {
                        s.push_str(&ex.csv_rows(t));
                    }
                    s
                }
                Format::Json => {
                    let per_trial: Vec<_> = summaries
                        .iter()
                        .enumerate()
                        .map(|(t, ex)| {
                            json!({
                                "trial": t,
                                "m_n": ex.m_n,
                                "meander": ex.meander,
                                "max_height": ex.heights.iter().copied().max().unwrap_or(0),
                            })
                        })
                        .collect();
                    let tail = excursion_tail_fit(&p, excursions, x_max, Seed::new(seed.seed, seed.stream_offset + (1 << 40))).ok();
                    to_json(&json!({
                        "schema": SCHEMA,
                        "p": p,
                        "phase": phase_classify(&p),
                        "n": n,
                        "trials": trials,
                        "seed": seed.seed,
                        "stream_offset": seed.stream_offset,
                        "summaries": per_trial,
                        "tail_fit": tail,
                    }))?
                }
            };
            emit(&text, output.out.as_ref())?;
            Ok(true)
        }
        Command::CircularExclusion { k, burn_in, samples, pairs, t_max, seed, output } => {
            let base = Seed::new(seed.seed, seed.stream_offset);
            let text = match output.format {
                Format::Json => {
                    let rep = stationarity_test(k, burn_in, samples, base, pairs, t_max)?;
                    let mut value = serde_json::to_value(&rep)?;
                    value["schema"] = json!(SCHEMA);
                    to_json(&value)?
                }
                Format::Csv => {
                    let mut rng = base.rng();
                    let mut state = PointState::zeros(k)?;
                    for _ in 0..burn_in {
                        cx_step(&mut state, rng.random());
                    }
                    let mut states = Vec::with_capacity(samples);
                    for _ in 0..samples {
                        for _ in 0..10 * k {
                            cx_step(&mut state, rng.random());
                        }
                        states.push(state.clone());
                    }
                    states_csv(&states)
                }
            };
            emit(&text, output.out.as_ref())?;
            Ok(true)
        }
    }
}
