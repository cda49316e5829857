//! Cascade-frequency sweeps over mean degree.
//!
//! For every mean degree `z` the sweep draws `realizations` independent
//! `G(n, z/(n−1))` graphs, gives all nodes the same rule and constant
//! threshold `φ*`, labels `seeds_per_run` random seed nodes, runs a random
//! sweep cascade and records the final size `Φ`.
//!
//! By default the cascade examines only nodes it has reached
//! ([`Examination::Reached`]): a node is considered once a labeled neighbor
//! touches it, so the antagonistic rule spreads outwards from the seeds
//! instead of firing everywhere at `ν = 0`. The monotone rule with `φ* > 0`
//! behaves identically under both settings.
//!
//! Realization `r` of the `i`-th `z` is driven entirely by
//! `derive_seed(master_seed, [i, r])`, so output is identical for any number
//! of worker threads.

use std::fmt::Write as _;
use std::io;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run_cascade_with, EngineError, Examination, ScheduleMode};
use crate::net::{assign_thresholds, generate_er, p_for_mean_degree, NetError, NodeId, Rule, ThresholdMode};
use crate::rng::{derive_seed, rng_from_seed, RNG_NAME};

#[derive(Debug, thiserror::Error)]
pub enum ExpError {
    #[error("the sweep needs at least one z value")]
    NoZValues,
    #[error("mean degree {z} must lie in (0, n−1) = (0, {max})")]
    InvalidZ { z: f64, max: usize },
    #[error("{0} must be at least 1")]
    NonPositive(&'static str),
    #[error("seeds_per_run = {seeds} exceeds n = {n}")]
    TooManySeeds { seeds: usize, n: usize },
    #[error("global-cascade threshold {0} is outside (0, 1]")]
    InvalidFraction(f64),
    #[error("malformed sweep CSV at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// What counts as a cascade when computing frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// `Φ ≥ threshold`.
    GlobalFraction(f64),
    /// `Φ` strictly above the median of all sizes in the sweep (every `z`
    /// pooled).
    MedianExceedance,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::GlobalFraction(t) => write!(f, "global:{}", format_sig6(*t)),
            Metric::MedianExceedance => f.write_str("median"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n: usize,
    pub z_values: Vec<f64>,
    pub phi_star: f64,
    pub rule: Rule,
    pub realizations: usize,
    pub seeds_per_run: usize,
    pub master_seed: u64,
    pub metric: Metric,
    pub examination: Examination,
}

impl SweepSpec {
    /// Desk-scale defaults: `n = 1000`, `φ* = 0.18`, integer `z` in
    /// `[1, 10]`, 100 realizations, one seed node.
    pub fn new(rule: Rule, metric: Metric) -> Self {
        SweepSpec {
            n: 1000,
            z_values: (1..=10).map(f64::from).collect(),
            phi_star: 0.18,
            rule,
            realizations: 100,
            seeds_per_run: 1,
            master_seed: 0,
            metric,
            examination: Examination::Reached,
        }
    }

    fn validate(&self) -> Result<(), ExpError> {
        if self.z_values.is_empty() {
            return Err(ExpError::NoZValues);
        }
        let max = self.n.saturating_sub(1);
        if let Some(&z) = self.z_values.iter().find(|&&z| !(z > 0.0 && z < max as f64)) {
            return Err(ExpError::InvalidZ { z, max });
        }
        if self.realizations == 0 {
            return Err(ExpError::NonPositive("realizations"));
        }
        if self.seeds_per_run == 0 {
            return Err(ExpError::NonPositive("seeds_per_run"));
        }
        if self.seeds_per_run > self.n {
            return Err(ExpError::TooManySeeds { seeds: self.seeds_per_run, n: self.n });
        }
        if !(0.0..=1.0).contains(&self.phi_star) {
            return Err(NetError::InvalidThreshold(self.phi_star).into());
        }
        if let Metric::GlobalFraction(t) = self.metric {
            if !(t > 0.0 && t <= 1.0) {
                return Err(ExpError::InvalidFraction(t));
            }
        }
        Ok(())
    }

    /// Provenance comment written above the CSV header.
    pub fn provenance(&self) -> String {
        format!(
            "# metric={}, phi_star={}, n={}, rule={}, master_seed={}, realizations={}, seeds_per_run={}, examine={}, rng={}",
            self.metric,
            format_sig6(self.phi_star),
            self.n,
            self.rule,
            self.master_seed,
            self.realizations,
            self.seeds_per_run,
            self.examination,
            RNG_NAME
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub z: f64,
    pub realizations: usize,
    pub frequency: f64,
    pub mean_size: f64,
    pub median_size: f64,
}

/// Raw cascade sizes of one `z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSample {
    pub z: f64,
    pub sizes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub sizes: Vec<SizeSample>,
    /// The pooled median for [`Metric::MedianExceedance`].
    pub pooled_median: Option<f64>,
}

/// Final size `Φ` of one realization.
pub fn realization(spec: &SweepSpec, z: f64, seed: u64) -> Result<f64, ExpError> {
    let graph = generate_er(spec.n, p_for_mean_degree(spec.n, z), derive_seed(seed, &[0]))?;
    let net = assign_thresholds(graph, ThresholdMode::Constant(spec.phi_star), spec.rule, 0)?;
    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
    let seeds = sample(&mut rng, spec.n, spec.seeds_per_run).into_iter().map(NodeId::from).collect();
    let mode = ScheduleMode::RandomSweep { seed: derive_seed(seed, &[2]) };
    let result = run_cascade_with(&net, &seeds, &mode, spec.examination)?;
    Ok(result.size_fraction)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput, ExpError> {
    spec.validate()?;
    let tasks: Vec<(usize, usize)> =
        (0..spec.z_values.len()).flat_map(|i| (0..spec.realizations).map(move |r| (i, r))).collect();
    let flat = tasks
        .par_iter()
        .map(|&(i, r)| realization(spec, spec.z_values[i], derive_seed(spec.master_seed, &[i as u64, r as u64])))
        .collect::<Result<Vec<f64>, ExpError>>()?;
    let sizes: Vec<SizeSample> = spec
        .z_values
        .iter()
        .zip(flat.chunks(spec.realizations))
        .map(|(&z, chunk)| SizeSample { z, sizes: chunk.to_vec() })
        .collect();
    let pooled_median = match spec.metric {
        Metric::MedianExceedance => Some(median(&flat)),
        Metric::GlobalFraction(_) => None,
    };
    let rows = sizes
        .iter()
        .map(|sample| {
            let hits = sample
                .sizes
                .iter()
                .filter(|&&phi| match spec.metric {
                    Metric::GlobalFraction(t) => phi >= t,
                    Metric::MedianExceedance => phi > pooled_median.unwrap_or(f64::INFINITY),
                })
                .count();
            let count = sample.sizes.len();
            SweepRow {
                z: sample.z,
                realizations: count,
                frequency: hits as f64 / count as f64,
                mean_size: sample.sizes.iter().sum::<f64>() / count as f64,
                median_size: median(&sample.sizes),
            }
        })
        .collect();
    Ok(SweepOutput { rows, sizes, pooled_median })
}

/// Median; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) / 2.0
    }
}

/// Format with six significant digits, like C's `%.6g`.
pub fn format_sig6(x: f64) -> String {
    const P: i32 = 6;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "z,realizations,frequency,mean_size,median_size";

/// Provenance comment, header, then one line per row.
pub fn to_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{}", spec.provenance()).unwrap();
    writeln!(s, "{CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{}",
            format_sig6(r.z),
            r.realizations,
            format_sig6(r.frequency),
            format_sig6(r.mean_size),
            format_sig6(r.median_size)
        )
        .unwrap();
    }
    s
}

pub fn emit_csv(spec: &SweepSpec, rows: &[SweepRow], mut destination: impl io::Write) -> Result<(), ExpError> {
    if rows.is_empty() {
        return Err(ExpError::NoZValues);
    }
    destination.write_all(to_csv(spec, rows).as_bytes())?;
    destination.flush()?;
    Ok(())
}

/// Parse rows back from [`to_csv`] output; `#` lines are skipped.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, ExpError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        Some((i, h)) => {
            return Err(ExpError::MalformedCsv { line: i + 1, message: format!("unexpected header {h:?}") })
        }
        None => return Err(ExpError::MalformedCsv { line: 0, message: "missing header".into() }),
    }
    lines
        .map(|(i, line)| {
            let bad = |message: String| ExpError::MalformedCsv { line: i + 1, message };
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 5 {
                return Err(bad(format!("expected 5 fields, found {}", cells.len())));
            }
            let float = |j: usize| cells[j].parse::<f64>().map_err(|e| bad(format!("field {}: {e}", j + 1)));
            Ok(SweepRow {
                z: float(0)?,
                realizations: cells[1].parse().map_err(|e| bad(format!("field 2: {e}")))?,
                frequency: float(2)?,
                mean_size: float(3)?,
                median_size: float(4)?,
            })
        })
        .collect()
}
