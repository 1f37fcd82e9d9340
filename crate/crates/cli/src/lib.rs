//! Command-line front end for `xyquench`: argument parsing and CSV output.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xyquench::cyclic::{evolve_cyclic, sweep_dwell_time, AveragingWindow};
use xyquench::oracle::{build_hamiltonian, evolve_observables, Parity};
use xyquench::quench::{
    ergodic_width, evolve_single, overlap_c0, stationary_modes, stationary_residual, sweep_final_field, FieldRange,
    DEFAULT_THRESHOLD,
};
use xyquench::spectral::equilibrium_observables;
use xyquench::{ModelParams, MomentumGrid, QuenchProtocol, TimeSeries};

/// Oracle runs pass when formula and exact diagonalization agree this closely.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid value for {flag}: {message}")]
    Config { flag: &'static str, message: String },
    #[error(transparent)]
    Model(#[from] xyquench::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn config(flag: &'static str, message: impl fmt::Display) -> Self {
        CliError::Config {
            flag,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Model(_) => 2,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

/// `start:stop:step`, stop included within half a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeSpec(pub FieldRange);

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [start, stop, step] = split3(s)?;
        FieldRange::new(start, stop, step)
            .map(RangeSpec)
            .map_err(|e| e.to_string())
    }
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.0.start, self.0.stop, self.0.step)
    }
}

/// `start:stop:count`, evenly spaced and inclusive of both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl TimeSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        (0..self.count)
            .map(|i| self.start + span * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

impl FromStr for TimeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:count, got '{s}'"));
        }
        let number = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"));
        let (start, stop) = (number(parts[0])?, number(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("count '{}': {e}", parts[2]))?;
        if !(start.is_finite() && stop.is_finite()) {
            return Err("start and stop must be finite".into());
        }
        if count == 0 {
            return Err("count must be at least 1".into());
        }
        if stop < start {
            return Err("stop must not precede start".into());
        }
        Ok(TimeSpec { start, stop, count })
    }
}

impl fmt::Display for TimeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

fn split3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step, got '{s}'"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|e| format!("'{p}': {e}"))?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    /// Midpoint rule with `--m` points (thermodynamic limit).
    Midpoint,
    /// Even-parity momenta of a ring with `--m` sites.
    Ns,
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKind::Midpoint => "midpoint",
            GridKind::Ns => "ns",
        })
    }
}

#[derive(Clone, Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value_t = GridKind::Midpoint)]
    pub grid: GridKind,
    /// Grid points (midpoint) or ring sites (ns).
    #[arg(long = "m", visible_alias = "size", default_value_t = 16384)]
    pub m: usize,
}

impl GridArgs {
    fn build(&self) -> Result<MomentumGrid, CliError> {
        match self.grid {
            GridKind::Midpoint => MomentumGrid::midpoint(self.m),
            GridKind::Ns => MomentumGrid::finite_ns(self.m),
        }
        .map_err(|e| CliError::config("--m", e))
    }

    fn describe(&self) -> String {
        format!("grid={} m={}", self.grid, self.m)
    }
}

#[derive(Clone, Debug, Parser)]
#[command(name = "xyq", version, about = "Quench dynamics of the transverse-field XY chain")]
pub struct Cli {
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, env = "XYQ_THREADS", default_value_t = 0, global = true)]
    pub threads: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Ground-state M_z and S^xx over a field range.
    Equilibrium {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, default_value = "0:2:0.01")]
        h_range: RangeSpec,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// M_z(t), S^xx(t) after a single quench.
    SingleSeries {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_i: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_f1: f64,
        #[arg(long, default_value = "0:50:501")]
        t: TimeSpec,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Long-time averages against post-quench equilibrium over final fields.
    SingleSweep {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_i: f64,
        #[arg(long, default_value = "0.01:4:0.01")]
        h_f1_range: RangeSpec,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
        threshold: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Width of the ergodic final-field region for each initial field.
    Width {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, default_value = "0.1:1.2:0.05")]
        h_i_range: RangeSpec,
        /// Final fields scanned for each initial field.
        #[arg(long, default_value = "0.015:4:0.005")]
        h_f1_range: RangeSpec,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
        threshold: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Ground-state overlap |C_0| of a finite ring.
    C0 {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_i: f64,
        #[arg(long, default_value = "0:4:0.01")]
        h_f1_range: RangeSpec,
        /// Ring length.
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Stationary momenta and their residuals.
    Modes {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_i: f64,
        #[arg(long, default_value = "0:1:0.1")]
        h_f1_range: RangeSpec,
    },
    /// M_z(t), S^xx(t) after the second quench of a double quench.
    CyclicSeries {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_i: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_f1: f64,
        /// Field after the second quench; defaults to the initial field.
        #[arg(long, allow_negative_numbers = true)]
        h_f2: Option<f64>,
        /// Time of the second quench.
        #[arg(long, allow_negative_numbers = true)]
        dwell: f64,
        /// Sample times, all at or after the second quench.
        #[arg(long)]
        t: TimeSpec,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Long-time averages of the cycle h_i -> h_f1 -> h_i over dwell times.
    CyclicSweep {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_i: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_f1: f64,
        #[arg(long, default_value = "0:20:0.05")]
        dwell_range: RangeSpec,
        /// Start of the averaging window after the second quench.
        #[arg(long, default_value_t = 50.0, allow_negative_numbers = true)]
        window_delay: f64,
        #[arg(long, default_value_t = 500.0, allow_negative_numbers = true)]
        window_length: f64,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
        threshold: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Formula against exact diagonalization on an N-site ring.
    OracleCheck {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_i: f64,
        #[arg(long, allow_negative_numbers = true)]
        h_f1: f64,
        /// Second-quench field; requires --dwell.
        #[arg(long, allow_negative_numbers = true, requires = "dwell")]
        h_f2: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        dwell: Option<f64>,
        #[arg(long, default_value = "0:10:201")]
        t: TimeSpec,
    },
}

/// Cell of an output row.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    Text(&'static str),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Flag(b) => b.to_string(),
            Cell::Text(s) => (*s).to_string(),
        }
    }
}

/// Scientific notation with 12 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

/// A fully computed result ready to be written.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub config: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Largest formula/oracle gap, for `oracle-check`.
    pub oracle_gap: Option<f64>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        writeln!(out, "# {}", self.config)?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::render))?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn check_threshold(threshold: f64) -> Result<(), CliError> {
    if threshold > 0.0 && threshold.is_finite() {
        Ok(())
    } else {
        Err(CliError::config("--threshold", "must be positive"))
    }
}

fn series_rows(series: &TimeSeries) -> Vec<Vec<Cell>> {
    (0..series.len())
        .map(|i| vec![Cell::Num(series.times[i]), Cell::Num(series.mz[i]), Cell::Num(series.sxx[i])])
        .collect()
}

fn flag_error(flag: &'static str) -> impl Fn(xyquench::Error) -> CliError {
    move |e| CliError::config(flag, e)
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Equilibrium { .. } => "equilibrium",
            Command::SingleSeries { .. } => "single-series",
            Command::SingleSweep { .. } => "single-sweep",
            Command::Width { .. } => "width",
            Command::C0 { .. } => "c0",
            Command::Modes { .. } => "modes",
            Command::CyclicSeries { .. } => "cyclic-series",
            Command::CyclicSweep { .. } => "cyclic-sweep",
            Command::OracleCheck { .. } => "oracle-check",
        }
    }

    /// Resolved settings as `key=value` pairs; thread count and output path
    /// are left out so the file does not depend on them.
    pub fn describe(&self) -> String {
        let body = match self {
            Command::Equilibrium { delta, h_range, grid } => {
                format!("delta={delta} h_range={h_range} {}", grid.describe())
            }
            Command::SingleSeries { delta, h_i, h_f1, t, grid } => {
                format!("delta={delta} h_i={h_i} h_f1={h_f1} t={t} {}", grid.describe())
            }
            Command::SingleSweep { delta, h_i, h_f1_range, threshold, grid } => format!(
                "delta={delta} h_i={h_i} h_f1_range={h_f1_range} threshold={threshold} {}",
                grid.describe()
            ),
            Command::Width { delta, h_i_range, h_f1_range, threshold, grid } => format!(
                "delta={delta} h_i_range={h_i_range} h_f1_range={h_f1_range} threshold={threshold} {}",
                grid.describe()
            ),
            Command::C0 { delta, h_i, h_f1_range, n } => {
                format!("delta={delta} h_i={h_i} h_f1_range={h_f1_range} n={n}")
            }
            Command::Modes { delta, h_i, h_f1_range } => {
                format!("delta={delta} h_i={h_i} h_f1_range={h_f1_range}")
            }
            Command::CyclicSeries { delta, h_i, h_f1, h_f2, dwell, t, grid } => format!(
                "delta={delta} h_i={h_i} h_f1={h_f1} h_f2={} dwell={dwell} t={t} {}",
                h_f2.unwrap_or(*h_i),
                grid.describe()
            ),
            Command::CyclicSweep {
                delta,
                h_i,
                h_f1,
                dwell_range,
                window_delay,
                window_length,
                samples,
                threshold,
                grid,
            } => format!(
                "delta={delta} h_i={h_i} h_f1={h_f1} dwell_range={dwell_range} window_delay={window_delay} \
                 window_length={window_length} samples={samples} threshold={threshold} {}",
                grid.describe()
            ),
            Command::OracleCheck { n, delta, h_i, h_f1, h_f2, dwell, t } => {
                let second = match (h_f2, dwell) {
                    (Some(f), Some(d)) => format!(" h_f2={f} dwell={d}"),
                    (None, Some(d)) => format!(" h_f2={h_i} dwell={d}"),
                    _ => String::new(),
                };
                format!("n={n} delta={delta} h_i={h_i} h_f1={h_f1}{second} t={t}")
            }
        };
        format!("xyq {} {body}", self.name())
    }

    pub fn run(&self) -> Result<Table, CliError> {
        let mut oracle_gap = None;
        let (header, rows) = match self {
            Command::Equilibrium { delta, h_range, grid } => {
                let g = grid.build()?;
                let rows = h_range
                    .0
                    .values()
                    .into_iter()
                    .map(|h| {
                        let params = ModelParams::new(*delta, h).map_err(flag_error("--delta"))?;
                        let o = equilibrium_observables(params, &g)?;
                        Ok(vec![Cell::Num(h), Cell::Num(*delta), Cell::Num(o.mz), Cell::Num(o.sxx)])
                    })
                    .collect::<Result<_, CliError>>()?;
                (vec!["h", "delta", "m_z", "s_xx"], rows)
            }
            Command::SingleSeries { delta, h_i, h_f1, t, grid } => {
                let protocol = QuenchProtocol::single(*delta, *h_i, *h_f1)?;
                let series = evolve_single(&protocol, &grid.build()?, &t.values()).map_err(flag_error("--t"))?;
                (vec!["t", "m_z", "s_xx"], series_rows(&series))
            }
            Command::SingleSweep { delta, h_i, h_f1_range, threshold, grid } => {
                check_threshold(*threshold)?;
                let reports = sweep_final_field(*delta, *h_i, &h_f1_range.0.values(), &grid.build()?, *threshold)?;
                let rows = reports
                    .iter()
                    .map(|r| {
                        vec![
                            Cell::Num(r.h_f1),
                            Cell::Num(r.long_time.mz),
                            Cell::Num(r.equilibrium.mz),
                            Cell::Num(r.long_time.sxx),
                            Cell::Num(r.equilibrium.sxx),
                            Cell::Num(r.deviation_mz),
                            Cell::Num(r.deviation_sxx),
                            Cell::Flag(r.is_ergodic_mz),
                            Cell::Flag(r.is_ergodic_sxx),
                        ]
                    })
                    .collect();
                (
                    vec!["h_f1", "mz_bar", "mz_eq", "sxx_bar", "sxx_eq", "dev_mz", "dev_sxx", "ergodic_mz", "ergodic_sxx"],
                    rows,
                )
            }
            Command::Width { delta, h_i_range, h_f1_range, threshold, grid } => {
                check_threshold(*threshold)?;
                let g = grid.build()?;
                let rows = h_i_range
                    .0
                    .values()
                    .into_iter()
                    .map(|h_i| {
                        let w = ergodic_width(*delta, h_i, &g, *threshold, &h_f1_range.0)?;
                        Ok(vec![Cell::Num(h_i), Cell::Num(*delta), Cell::Num(w)])
                    })
                    .collect::<Result<_, CliError>>()?;
                (vec!["h_i", "delta", "width"], rows)
            }
            Command::C0 { delta, h_i, h_f1_range, n } => {
                let rows = h_f1_range
                    .0
                    .values()
                    .into_iter()
                    .map(|h_f1| {
                        let c = overlap_c0(*delta, *h_i, h_f1, *n).map_err(|e| match e {
                            xyquench::Error::OddSiteCount(_) | xyquench::Error::SiteCountOutOfRange(_) => {
                                CliError::config("--n", e)
                            }
                            other => other.into(),
                        })?;
                        Ok(vec![Cell::Num(h_f1), Cell::Num(c.abs), Cell::Num(c.log_abs)])
                    })
                    .collect::<Result<_, CliError>>()?;
                (vec!["h_f1", "c0", "log_c0"], rows)
            }
            Command::Modes { delta, h_i, h_f1_range } => {
                let mut rows = Vec::new();
                for h_f1 in h_f1_range.0.values() {
                    let protocol = QuenchProtocol::single(*delta, *h_i, h_f1)?;
                    for kappa in stationary_modes(h_f1) {
                        rows.push(vec![
                            Cell::Num(h_f1),
                            Cell::Num(kappa),
                            Cell::Num(stationary_residual(&protocol, kappa)),
                        ]);
                    }
                }
                (vec!["h_f1", "kappa", "residual"], rows)
            }
            Command::CyclicSeries { delta, h_i, h_f1, h_f2, dwell, t, grid } => {
                let protocol = QuenchProtocol::double(*delta, *h_i, *h_f1, h_f2.unwrap_or(*h_i), *dwell)
                    .map_err(|e| match e {
                        xyquench::Error::NegativeDwell(_) => CliError::config("--dwell", e),
                        other => other.into(),
                    })?;
                let series = evolve_cyclic(&protocol, &grid.build()?, &t.values()).map_err(flag_error("--t"))?;
                (vec!["t", "m_z", "s_xx"], series_rows(&series))
            }
            Command::CyclicSweep {
                delta,
                h_i,
                h_f1,
                dwell_range,
                window_delay,
                window_length,
                samples,
                threshold,
                grid,
            } => {
                check_threshold(*threshold)?;
                let window = AveragingWindow {
                    delay: *window_delay,
                    length: *window_length,
                    samples: *samples,
                };
                window.validate().map_err(flag_error("--window-delay/--window-length/--samples"))?;
                let dwell = dwell_range.0.values();
                if dwell[0] < 0.0 {
                    return Err(CliError::config("--dwell-range", "dwell times must be non-negative"));
                }
                let rows = sweep_dwell_time(*delta, *h_i, *h_f1, &dwell, &grid.build()?, &window, *threshold)?
                    .iter()
                    .map(|r| {
                        vec![
                            Cell::Num(r.dwell),
                            Cell::Num(r.long_time.mz),
                            Cell::Num(r.equilibrium.mz),
                            Cell::Num(r.long_time.sxx),
                            Cell::Num(r.equilibrium.sxx),
                            Cell::Num(r.deviation_mz),
                            Cell::Num(r.deviation_sxx),
                            Cell::Flag(r.is_ergodic_mz),
                            Cell::Flag(r.is_ergodic_sxx),
                        ]
                    })
                    .collect();
                (
                    vec!["T", "mz_bar", "mz_eq", "sxx_bar", "sxx_eq", "dev_mz", "dev_sxx", "ergodic_mz", "ergodic_sxx"],
                    rows,
                )
            }
            Command::OracleCheck { n, delta, h_i, h_f1, h_f2, dwell, t } => {
                let (formula, oracle) = oracle_pair(*n, *delta, *h_i, *h_f1, *h_f2, *dwell, &t.values())?;
                let mut gap: f64 = 0.0;
                let mut rows = Vec::with_capacity(2 * formula.len());
                for i in 0..formula.len() {
                    gap = gap
                        .max((formula.mz[i] - oracle.mz[i]).abs())
                        .max((formula.sxx[i] - oracle.sxx[i]).abs());
                    for (source, s) in [("formula", &formula), ("oracle", &oracle)] {
                        rows.push(vec![Cell::Num(s.times[i]), Cell::Text(source), Cell::Num(s.mz[i]), Cell::Num(s.sxx[i])]);
                    }
                }
                oracle_gap = Some(gap);
                (vec!["t", "source", "m_z", "s_xx"], rows)
            }
        };
        Ok(Table {
            config: self.describe(),
            header,
            rows,
            oracle_gap,
        })
    }
}

fn oracle_pair(
    n: usize,
    delta: f64,
    h_i: f64,
    h_f1: f64,
    h_f2: Option<f64>,
    dwell: Option<f64>,
    times: &[f64],
) -> Result<(TimeSeries, TimeSeries), CliError> {
    let site_error = |e: xyquench::Error| match e {
        xyquench::Error::OddSiteCount(_) | xyquench::Error::SiteCountOutOfRange(_) => CliError::config("--n", e),
        other => other.into(),
    };
    let grid = MomentumGrid::finite_ns(n).map_err(site_error)?;
    let start = build_hamiltonian(n, delta, h_i).map_err(site_error)?;
    let initial = start.sector_ground_state(Parity::Even)?;
    let first = build_hamiltonian(n, delta, h_f1)?;
    match dwell {
        None => {
            let protocol = QuenchProtocol::single(delta, h_i, h_f1)?;
            let formula = evolve_single(&protocol, &grid, times).map_err(flag_error("--t"))?;
            let oracle = evolve_observables(&initial, &first, None, times)?;
            Ok((formula, oracle))
        }
        Some(dwell) => {
            let h_f2 = h_f2.unwrap_or(h_i);
            let protocol = QuenchProtocol::double(delta, h_i, h_f1, h_f2, dwell).map_err(flag_error("--dwell"))?;
            let formula = evolve_cyclic(&protocol, &grid, times).map_err(flag_error("--t"))?;
            let second = build_hamiltonian(n, delta, h_f2)?;
            let oracle = evolve_observables(&initial, &first, Some((&second, dwell)), times)?;
            Ok((formula, oracle))
        }
    }
}
