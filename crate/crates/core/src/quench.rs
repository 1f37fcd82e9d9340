//! Single-quench dynamics `h_i → h_f1` from the ground state of `h_i`.
//!
//! With `Φ_k = θ_k^{f1} - θ_k^{i}`, every mode contributes
//!
//! ```text
//! M_z(t)  = -Σ w [cos 2θ^{f1} cos 2Φ + sin 2θ^{f1} sin 2Φ cos(2ε^{f1} t)]
//! S^xx(t) = -Σ w [cos 2Φ cos(k+2θ^{f1}) + sin 2Φ sin(k+2θ^{f1}) cos(2ε^{f1} t)]
//! ```
//!
//! The long-time average drops the oscillating terms; none of them is
//! secular because `ε^{f1}_k > 0` on every grid used here.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{
    check_finite, equilibrium_observables, frame_observables, Angle, BogoliubovFrame,
    ModelParams, MomentumGrid,
};
use crate::sum;

/// Magnetization along the field and nearest-neighbour XX correlation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub mz: f64,
    pub sxx: f64,
}

/// Second leg of a cyclic quench: switch to `h_f2` at time `dwell`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondQuench {
    pub h_f2: f64,
    pub dwell: f64,
}

/// Piecewise-constant field history at fixed anisotropy:
/// `h_i` for `t ≤ 0`, `h_f1` for `0 ≤ t ≤ T`, `h_f2` for `t ≥ T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuenchProtocol {
    pub delta: f64,
    pub h_i: f64,
    pub h_f1: f64,
    pub second: Option<SecondQuench>,
}

impl QuenchProtocol {
    pub fn single(delta: f64, h_i: f64, h_f1: f64) -> Result<Self> {
        check_finite("delta", delta)?;
        check_finite("h_i", h_i)?;
        check_finite("h_f1", h_f1)?;
        Ok(Self {
            delta,
            h_i,
            h_f1,
            second: None,
        })
    }

    /// The cycle `h_i → h_f1 → h_i` with dwell time `dwell` at `h_f1`.
    pub fn cyclic(delta: f64, h_i: f64, h_f1: f64, dwell: f64) -> Result<Self> {
        Self::double(delta, h_i, h_f1, h_i, dwell)
    }

    /// A general double quench; `h_f2` need not equal `h_i`.
    pub fn double(delta: f64, h_i: f64, h_f1: f64, h_f2: f64, dwell: f64) -> Result<Self> {
        let mut p = Self::single(delta, h_i, h_f1)?;
        check_finite("h_f2", h_f2)?;
        if !(dwell.is_finite() && dwell >= 0.0) {
            return Err(Error::NegativeDwell(dwell));
        }
        p.second = Some(SecondQuench { h_f2, dwell });
        Ok(p)
    }

    pub fn initial(&self) -> ModelParams {
        ModelParams {
            delta: self.delta,
            h: self.h_i,
        }
    }

    pub fn first(&self) -> ModelParams {
        ModelParams {
            delta: self.delta,
            h: self.h_f1,
        }
    }

    pub fn second_point(&self) -> Option<ModelParams> {
        self.second.map(|s| ModelParams {
            delta: self.delta,
            h: s.h_f2,
        })
    }

    pub fn is_cyclic(&self) -> bool {
        self.second.is_some_and(|s| s.h_f2 == self.h_i)
    }

    pub(crate) fn phase_points(&self) -> Vec<ModelParams> {
        let mut v = vec![self.initial(), self.first()];
        v.extend(self.second_point());
        v
    }
}

/// Frame of the first-quench Hamiltonian and the doubled angle difference
/// `2Φ_1` per mode.
pub(crate) struct SingleQuenchFrames<'g> {
    pub first: BogoliubovFrame<'g>,
    pub two_phi1: Vec<Angle>,
}

impl<'g> SingleQuenchFrames<'g> {
    pub fn new(protocol: &QuenchProtocol, grid: &'g MomentumGrid) -> Self {
        let initial = BogoliubovFrame::new(protocol.initial(), grid);
        let first = BogoliubovFrame::new(protocol.first(), grid);
        let two_phi1 = first
            .two_theta
            .iter()
            .zip(&initial.two_theta)
            .map(|(&f, &i)| f - i)
            .collect();
        Self { first, two_phi1 }
    }

    /// Static and oscillating amplitudes of mode `j`: the observable at time
    /// `t` is `-(stat + osc cos(2εt))`.
    fn mz_parts(&self, j: usize) -> (f64, f64) {
        let th = self.first.two_theta[j];
        let phi = self.two_phi1[j];
        (th.cos * phi.cos, th.sin * phi.sin)
    }

    fn sxx_parts(&self, j: usize) -> (f64, f64) {
        let bond = self.first.bond_angle(j);
        let phi = self.two_phi1[j];
        (phi.cos * bond.cos, phi.sin * bond.sin)
    }

    pub fn at(&self, t: f64) -> Observables {
        let grid = self.first.grid;
        let eps = &self.first.epsilon;
        let mz = -grid.integrate(|j| {
            let (s, o) = self.mz_parts(j);
            s + o * (2.0 * eps[j] * t).cos()
        });
        let sxx = -grid.integrate(|j| {
            let (s, o) = self.sxx_parts(j);
            s + o * (2.0 * eps[j] * t).cos()
        });
        Observables { mz, sxx }
    }

    pub fn long_time(&self) -> Observables {
        let grid = self.first.grid;
        Observables {
            mz: -grid.integrate(|j| self.mz_parts(j).0),
            sxx: -grid.integrate(|j| self.sxx_parts(j).0),
        }
    }
}

/// `M_z(t)` and `S^xx(t)` sampled on a strictly increasing time list.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub mz: Vec<f64>,
    pub sxx: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub(crate) fn from_points(times: &[f64], values: Vec<Observables>) -> Self {
        Self {
            times: times.to_vec(),
            mz: values.iter().map(|o| o.mz).collect(),
            sxx: values.iter().map(|o| o.sxx).collect(),
        }
    }

    /// Arithmetic mean of each observable over the samples.
    pub fn mean(&self) -> Observables {
        let n = self.len() as f64;
        Observables {
            mz: sum::pairwise(self.len(), |i| self.mz[i]) / n,
            sxx: sum::pairwise(self.len(), |i| self.sxx[i]) / n,
        }
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    let finite = times.iter().all(|t| t.is_finite());
    let increasing = times.windows(2).all(|w| w[0] < w[1]);
    if finite && increasing {
        Ok(())
    } else {
        Err(Error::BadTimes)
    }
}

/// Time series after the first quench. Any second quench is ignored.
pub fn evolve_single(
    protocol: &QuenchProtocol,
    grid: &MomentumGrid,
    times: &[f64],
) -> Result<TimeSeries> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    check_times(times)?;
    let grid = grid.resolved_for(&[protocol.initial(), protocol.first()]);
    let frames = SingleQuenchFrames::new(protocol, &grid);
    let values = times.par_iter().map(|&t| frames.at(t)).collect();
    Ok(TimeSeries::from_points(times, values))
}

/// Infinite-time average of [`evolve_single`].
pub fn long_time_average_single(
    protocol: &QuenchProtocol,
    grid: &MomentumGrid,
) -> Result<Observables> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let grid = grid.resolved_for(&[protocol.initial(), protocol.first()]);
    Ok(SingleQuenchFrames::new(protocol, &grid).long_time())
}

/// Long-time values against the ground state of the post-quench Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErgodicityReport {
    pub h_f1: f64,
    pub long_time: Observables,
    pub equilibrium: Observables,
    pub deviation_mz: f64,
    pub deviation_sxx: f64,
    pub is_ergodic_mz: bool,
    pub is_ergodic_sxx: bool,
}

impl ErgodicityReport {
    pub(crate) fn new(h_f1: f64, long_time: Observables, equilibrium: Observables, threshold: f64) -> Self {
        let deviation_mz = (long_time.mz - equilibrium.mz).abs();
        let deviation_sxx = (long_time.sxx - equilibrium.sxx).abs();
        Self {
            h_f1,
            long_time,
            equilibrium,
            deviation_mz,
            deviation_sxx,
            is_ergodic_mz: deviation_mz < threshold,
            is_ergodic_sxx: deviation_sxx < threshold,
        }
    }
}

/// Default ergodicity threshold on `|long-time − equilibrium|`.
pub const DEFAULT_THRESHOLD: f64 = 0.01;

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveThreshold(threshold))
    }
}

pub fn ergodicity_report(
    protocol: &QuenchProtocol,
    grid: &MomentumGrid,
    threshold: f64,
) -> Result<ErgodicityReport> {
    check_threshold(threshold)?;
    let long_time = long_time_average_single(protocol, grid)?;
    let equilibrium = equilibrium_observables(protocol.first(), grid)?;
    Ok(ErgodicityReport::new(protocol.h_f1, long_time, equilibrium, threshold))
}

/// One report per final field, in input order.
pub fn sweep_final_field(
    delta: f64,
    h_i: f64,
    h_f1_values: &[f64],
    grid: &MomentumGrid,
    threshold: f64,
) -> Result<Vec<ErgodicityReport>> {
    check_threshold(threshold)?;
    if h_f1_values.is_empty() {
        return Err(Error::EmptyScan);
    }
    h_f1_values
        .par_iter()
        .map(|&h_f1| {
            let protocol = QuenchProtocol::single(delta, h_i, h_f1)?;
            if grid.is_empty() {
                return Err(Error::EmptyGrid);
            }
            let resolved = grid.resolved_for(&protocol.phase_points());
            let frames = SingleQuenchFrames::new(&protocol, &resolved);
            let equilibrium = if matches!(resolved, Cow::Borrowed(_)) {
                frame_observables(&frames.first)
            } else {
                equilibrium_observables(protocol.first(), grid)?
            };
            Ok(ErgodicityReport::new(h_f1, frames.long_time(), equilibrium, threshold))
        })
        .collect()
}

/// Inclusive arithmetic range `start, start + step, …` up to `stop`, with
/// `stop` included when it lies within half a step of the last point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl FieldRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        check_finite("start", start)?;
        check_finite("stop", stop)?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::NonPositiveStep(step));
        }
        if stop < start {
            return Err(Error::EmptyScan);
        }
        Ok(Self { start, stop, step })
    }

    pub fn count(&self) -> usize {
        ((self.stop - self.start) / self.step + 0.5).floor() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count())
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

/// Default scan for the ergodic width: `h_f1 ∈ (0.01, 1.00]` in steps of 0.005.
pub fn default_width_scan() -> FieldRange {
    FieldRange {
        start: 0.015,
        stop: 1.0,
        step: 0.005,
    }
}

/// Measure (`step × count`) of final fields in `scan` whose long-time `M_z`
/// stays within `threshold` of the post-quench ground-state value.
pub fn ergodic_width(
    delta: f64,
    h_i: f64,
    grid: &MomentumGrid,
    threshold: f64,
    scan: &FieldRange,
) -> Result<f64> {
    if !(scan.step > 0.0) {
        return Err(Error::NonPositiveStep(scan.step));
    }
    let values = scan.values();
    if values.is_empty() {
        return Err(Error::EmptyScan);
    }
    let reports = sweep_final_field(delta, h_i, &values, grid, threshold)?;
    let passing = reports.iter().filter(|r| r.is_ergodic_mz).count();
    Ok(scan.step * passing as f64)
}

/// Ground-state fidelity `|C_0| = |⟨E_0^{f1}|E_0^{i}⟩|` of an `N`-site ring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap {
    /// `ln |C_0|`; `-∞` when some mode is fully flipped.
    pub log_abs: f64,
    pub abs: f64,
}

/// `|C_0| = Π_{k>0} |cos Φ_k|` over the even-parity momenta of `n_sites`.
pub fn overlap_c0(delta: f64, h_i: f64, h_f1: f64, n_sites: usize) -> Result<Overlap> {
    let protocol = QuenchProtocol::single(delta, h_i, h_f1)?;
    let grid = MomentumGrid::finite_ns(n_sites)?;
    let frames = SingleQuenchFrames::new(&protocol, &grid);
    // ln|cos Φ| = ½ ln(1 − sin²Φ), exact zero when nothing was quenched.
    let log_abs = sum::pairwise(grid.len(), |j| {
        let phi = frames.two_phi1[j].half();
        0.5 * (-phi.sin * phi.sin).ln_1p()
    });
    Ok(Overlap {
        log_abs,
        abs: log_abs.exp(),
    })
}

/// Momenta where the time-averaged `M_z` integrand matches its ground-state
/// value for any initial field: `0`, `π` and, inside the ordered phase,
/// `arccos(-h_f1)`.
pub fn stationary_modes(h_f1: f64) -> Vec<f64> {
    let mut modes = vec![0.0];
    if h_f1.abs() <= 1.0 {
        let k = (-h_f1).acos();
        if k > 0.0 && k < std::f64::consts::PI {
            modes.push(k);
        }
    }
    modes.push(std::f64::consts::PI);
    modes
}

/// `cos 2θ^{f1}_κ · (1 − cos 2Φ_κ)`, zero at stationary modes.
pub fn stationary_residual(protocol: &QuenchProtocol, kappa: f64) -> f64 {
    let two_theta = |p: ModelParams| crate::spectral::dispersion(p, kappa).two_theta(p.delta);
    let f = two_theta(protocol.first());
    let phi = f - two_theta(protocol.initial());
    f.cos * (1.0 - phi.cos)
}
