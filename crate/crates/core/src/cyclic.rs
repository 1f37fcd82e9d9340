//! Double quench `h_i → h_f1 → h_f2`, second switch at dwell time `T`.
//!
//! For `t ≥ T` each mode is described by four kernels built from the half
//! angles `θ^{f2}`, `Φ_1 = θ^{f1} - θ^{i}`, `Φ_2 = θ^{f2} - θ^{f1}` and the
//! two phases `(t-T)ε^{f2} ± Tε^{f1}`:
//!
//! ```text
//! M_z(t)  = Σ w · 2[Q1² + Q2² - 1/2]
//! S^xx(t) = Σ w · 2[cos k (Q1² + Q2²) + sin k (Q1 P1 - Q2 P2)]
//! ```
//!
//! Every per-mode integrand is `C + X cos(2ε^{f2}τ) + Y sin(2ε^{f2}τ)` in
//! `τ = t - T`, which lets sample means over long windows be summed in
//! closed form.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quench::{check_threshold, check_times, Observables, QuenchProtocol, SecondQuench, TimeSeries};
use crate::spectral::{dispersion, equilibrium_observables, Angle, BogoliubovFrame, MomentumGrid};

/// `(Q1, Q2, P1, P2)` of one mode at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CyclicKernels {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl CyclicKernels {
    pub fn mz_integrand(&self) -> f64 {
        2.0 * (self.q1 * self.q1 + self.q2 * self.q2 - 0.5)
    }

    pub fn sxx_integrand(&self, cos_k: f64, sin_k: f64) -> f64 {
        let q = self.q1 * self.q1 + self.q2 * self.q2;
        2.0 * (cos_k * q + sin_k * (self.q1 * self.p1 - self.q2 * self.p2))
    }
}

/// Time-independent data of one momentum mode.
#[derive(Clone, Copy, Debug)]
struct Mode {
    theta2: Angle,
    phi1: Angle,
    phi2: Angle,
    eps1: f64,
    eps2: f64,
    cos_k: f64,
    sin_k: f64,
}

impl Mode {
    fn new(two_theta_i: Angle, two_theta_1: Angle, two_theta_2: Angle) -> Self {
        let (ti, t1, t2) = (two_theta_i.half(), two_theta_1.half(), two_theta_2.half());
        Self {
            theta2: t2,
            phi1: t1 - ti,
            phi2: t2 - t1,
            eps1: 0.0,
            eps2: 0.0,
            cos_k: 0.0,
            sin_k: 0.0,
        }
    }

    /// Kernels at `tau = t - T` after a dwell `dwell`.
    fn kernels(&self, tau: f64, dwell: f64) -> CyclicKernels {
        let (sp, cp) = (tau * self.eps2 + dwell * self.eps1).sin_cos();
        let (sm, cm) = (tau * self.eps2 - dwell * self.eps1).sin_cos();
        let (st, ct) = (self.theta2.sin, self.theta2.cos);
        let (c1, s1) = (self.phi1.cos, self.phi1.sin);
        let (c2, s2) = (self.phi2.cos, self.phi2.sin);
        CyclicKernels {
            q1: (st * c1 - ct * s1) * c2 * cp - (ct * c1 + st * s1) * s2 * cm,
            q2: (st * c1 + ct * s1) * c2 * sp + (ct * c1 - st * s1) * s2 * sm,
            p1: (ct * c1 + st * s1) * c2 * cp + (st * c1 - ct * s1) * s2 * cm,
            p2: (-ct * c1 + st * s1) * c2 * sp + (st * c1 + ct * s1) * s2 * sm,
        }
    }

    fn observables(&self, tau: f64, dwell: f64) -> (f64, f64) {
        let k = self.kernels(tau, dwell);
        (k.mz_integrand(), k.sxx_integrand(self.cos_k, self.sin_k))
    }

    /// `(C, X, Y)` for M_z and S^xx from samples at a quarter and half period.
    fn harmonics(&self, dwell: f64) -> [(f64, f64, f64); 2] {
        let f0 = self.observables(0.0, dwell);
        if self.eps2 <= 0.0 {
            return [(f0.0, 0.0, 0.0), (f0.1, 0.0, 0.0)];
        }
        let quarter = PI / (4.0 * self.eps2);
        let fq = self.observables(quarter, dwell);
        let fh = self.observables(2.0 * quarter, dwell);
        let split = |a: f64, q: f64, h: f64| {
            let c = 0.5 * (a + h);
            (c, 0.5 * (a - h), q - c)
        };
        [split(f0.0, fq.0, fh.0), split(f0.1, fq.1, fh.1)]
    }
}

fn second_leg(protocol: &QuenchProtocol) -> Result<SecondQuench> {
    protocol.second.ok_or(Error::NotCyclic)
}

fn modes(protocol: &QuenchProtocol, grid: &MomentumGrid) -> Vec<Mode> {
    let fi = BogoliubovFrame::new(protocol.initial(), grid);
    let f1 = BogoliubovFrame::new(protocol.first(), grid);
    let f2 = BogoliubovFrame::new(protocol.second_point().expect("checked by caller"), grid);
    (0..grid.len())
        .map(|j| Mode {
            eps1: f1.epsilon[j],
            eps2: f2.epsilon[j],
            cos_k: grid.cos_k()[j],
            sin_k: grid.sin_k()[j],
            ..Mode::new(fi.two_theta[j], f1.two_theta[j], f2.two_theta[j])
        })
        .collect()
}

/// The four kernels of a single momentum `k` at time `t ≥ T`.
pub fn qp_kernels(protocol: &QuenchProtocol, k: f64, t: f64) -> Result<CyclicKernels> {
    let second = second_leg(protocol)?;
    if !(t >= second.dwell) {
        return Err(Error::BeforeSecondQuench { t, dwell: second.dwell });
    }
    let two_theta = |p| dispersion(p, k).two_theta(protocol.delta);
    let mut mode = Mode::new(
        two_theta(protocol.initial()),
        two_theta(protocol.first()),
        two_theta(protocol.second_point().expect("second leg present")),
    );
    mode.eps1 = dispersion(protocol.first(), k).epsilon;
    mode.eps2 = dispersion(protocol.second_point().expect("second leg present"), k).epsilon;
    Ok(mode.kernels(t - second.dwell, second.dwell))
}

/// Time series after the second quench; every time must satisfy `t ≥ T`.
pub fn evolve_cyclic(
    protocol: &QuenchProtocol,
    grid: &MomentumGrid,
    times: &[f64],
) -> Result<TimeSeries> {
    let second = second_leg(protocol)?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    check_times(times)?;
    if let Some(&t) = times.iter().find(|&&t| t < second.dwell) {
        return Err(Error::BeforeSecondQuench { t, dwell: second.dwell });
    }
    let grid = grid.resolved_for(&protocol.phase_points());
    let modes = modes(protocol, &grid);
    let values = times
        .par_iter()
        .map(|&t| {
            let tau = t - second.dwell;
            let per_mode: Vec<(f64, f64)> =
                modes.iter().map(|m| m.observables(tau, second.dwell)).collect();
            Observables {
                mz: grid.integrate(|j| per_mode[j].0),
                sxx: grid.integrate(|j| per_mode[j].1),
            }
        })
        .collect();
    Ok(TimeSeries::from_points(times, values))
}

/// Uniform samples `T + delay + j·length/(samples-1)`, `j = 0..samples`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AveragingWindow {
    pub delay: f64,
    pub length: f64,
    pub samples: usize,
}

impl Default for AveragingWindow {
    fn default() -> Self {
        Self {
            delay: 50.0,
            length: 500.0,
            samples: 50_000,
        }
    }
}

impl AveragingWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.delay.is_finite() && self.delay >= 0.0) {
            return Err(Error::InvalidWindow("delay must be finite and non-negative"));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidWindow("length must be finite and positive"));
        }
        if self.samples < 2 {
            return Err(Error::InvalidWindow("need at least two samples"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.samples - 1) as f64
    }

    /// Absolute sample times for a second quench at `dwell`.
    pub fn times(&self, dwell: f64) -> Vec<f64> {
        let dt = self.spacing();
        (0..self.samples)
            .map(|j| dwell + self.delay + j as f64 * dt)
            .collect()
    }
}

/// Mean of `(cos ωτ_j, sin ωτ_j)` over `τ_j = start + j·spacing`, `j < samples`.
fn mean_phasor(omega: f64, start: f64, spacing: f64, samples: usize) -> (f64, f64) {
    let half_step = 0.5 * omega * spacing;
    let denom = half_step.sin();
    if denom.abs() < 1e-9 {
        let n = samples as f64;
        let (mut c, mut s) = (0.0, 0.0);
        for j in 0..samples {
            let (sj, cj) = (omega * (start + j as f64 * spacing)).sin_cos();
            c += cj;
            s += sj;
        }
        return (c / n, s / n);
    }
    let ratio = (samples as f64 * half_step).sin() / (samples as f64 * denom);
    let (s, c) = (omega * start + half_step * (samples - 1) as f64).sin_cos();
    (ratio * c, ratio * s)
}

/// Mean of [`evolve_cyclic`] over the samples of `window`.
///
/// Evaluated per mode from the harmonic decomposition of its integrand and
/// the geometric sum of the sample phases, so the cost does not grow with
/// the number of samples.
pub fn long_time_cyclic(
    protocol: &QuenchProtocol,
    grid: &MomentumGrid,
    window: &AveragingWindow,
) -> Result<Observables> {
    let second = second_leg(protocol)?;
    window.validate()?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let grid = grid.resolved_for(&protocol.phase_points());
    let modes = modes(protocol, &grid);
    let means: Vec<(f64, f64)> = modes
        .iter()
        .map(|m| {
            let [(cm, xm, ym), (cs, xs, ys)] = m.harmonics(second.dwell);
            let (pc, ps) = mean_phasor(2.0 * m.eps2, window.delay, window.spacing(), window.samples);
            (cm + xm * pc + ym * ps, cs + xs * pc + ys * ps)
        })
        .collect();
    Ok(Observables {
        mz: grid.integrate(|j| means[j].0),
        sxx: grid.integrate(|j| means[j].1),
    })
}

/// One row of a dwell-time sweep, compared with the ground state at `h_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DwellRow {
    pub dwell: f64,
    pub long_time: Observables,
    pub equilibrium: Observables,
    pub deviation_mz: f64,
    pub deviation_sxx: f64,
    pub is_ergodic_mz: bool,
    pub is_ergodic_sxx: bool,
}

/// Long-time observables of the cycle `h_i → h_f1 → h_i` for each dwell time.
pub fn sweep_dwell_time(
    delta: f64,
    h_i: f64,
    h_f1: f64,
    dwell_times: &[f64],
    grid: &MomentumGrid,
    window: &AveragingWindow,
    threshold: f64,
) -> Result<Vec<DwellRow>> {
    check_threshold(threshold)?;
    window.validate()?;
    if dwell_times.is_empty() {
        return Err(Error::EmptyScan);
    }
    let equilibrium = equilibrium_observables(QuenchProtocol::single(delta, h_i, h_i)?.initial(), grid)?;
    dwell_times
        .par_iter()
        .map(|&dwell| {
            let protocol = QuenchProtocol::cyclic(delta, h_i, h_f1, dwell)?;
            let long_time = long_time_cyclic(&protocol, grid, window)?;
            let deviation_mz = (long_time.mz - equilibrium.mz).abs();
            let deviation_sxx = (long_time.sxx - equilibrium.sxx).abs();
            Ok(DwellRow {
                dwell,
                long_time,
                equilibrium,
                deviation_mz,
                deviation_sxx,
                is_ergodic_mz: deviation_mz < threshold,
                is_ergodic_sxx: deviation_sxx < threshold,
            })
        })
        .collect()
}

/// First dwell time at which `M_z` returns inside the threshold after having
/// left it. Short dwells are trivially ergodic because the two quenches
/// cancel at `T = 0`; those rows are skipped.
pub fn first_ergodic_dwell(rows: &[DwellRow]) -> Option<f64> {
    let left = rows.iter().position(|r| !r.is_ergodic_mz)?;
    rows[left..]
        .iter()
        .find(|r| r.is_ergodic_mz)
        .map(|r| r.dwell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quench::{evolve_single, long_time_average_single};
    use approx::assert_abs_diff_eq;

    fn grid() -> MomentumGrid {
        MomentumGrid::midpoint(1024).unwrap()
    }

    #[test]
    fn kernels_require_second_quench() {
        let p = QuenchProtocol::single(1.0, 0.5, 2.0).unwrap();
        assert_eq!(qp_kernels(&p, 1.0, 3.0), Err(Error::NotCyclic));
        let c = QuenchProtocol::cyclic(1.0, 0.5, 2.0, 3.0).unwrap();
        assert_eq!(
            qp_kernels(&c, 1.0, 2.0),
            Err(Error::BeforeSecondQuench { t: 2.0, dwell: 3.0 })
        );
        assert!(evolve_cyclic(&c, &grid(), &[2.9, 3.0]).is_err());
    }

    #[test]
    fn negative_dwell_rejected() {
        assert_eq!(
            QuenchProtocol::cyclic(1.0, 0.5, 2.0, -1.0),
            Err(Error::NegativeDwell(-1.0))
        );
    }

    #[test]
    fn identity_protocol_is_constant() {
        let g = grid();
        let p = QuenchProtocol::cyclic(0.6, 0.7, 0.7, 2.5).unwrap();
        let eq = equilibrium_observables(p.initial(), &g).unwrap();
        let times: Vec<f64> = (0..40).map(|i| 2.5 + i as f64 * 0.8).collect();
        let ts = evolve_cyclic(&p, &g, &times).unwrap();
        for i in 0..ts.len() {
            assert_abs_diff_eq!(ts.mz[i], eq.mz, epsilon = 1e-12);
            assert_abs_diff_eq!(ts.sxx[i], eq.sxx, epsilon = 1e-12);
        }
    }

    #[test]
    fn immediate_return_cancels() {
        let g = grid();
        let p = QuenchProtocol::cyclic(1.0, 0.5, 2.0, 0.0).unwrap();
        let eq = equilibrium_observables(p.initial(), &g).unwrap();
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.9).collect();
        let ts = evolve_cyclic(&p, &g, &times).unwrap();
        for i in 0..ts.len() {
            assert_abs_diff_eq!(ts.mz[i], eq.mz, epsilon = 1e-10);
            assert_abs_diff_eq!(ts.sxx[i], eq.sxx, epsilon = 1e-10);
        }
    }

    #[test]
    fn no_op_second_quench_reduces_to_single() {
        let g = grid();
        let c = QuenchProtocol::double(0.8, 0.3, 1.6, 1.6, 2.0).unwrap();
        let s = QuenchProtocol::single(0.8, 0.3, 1.6).unwrap();
        let times: Vec<f64> = (0..30).map(|i| 2.0 + i as f64 * 0.7).collect();
        let a = evolve_cyclic(&c, &g, &times).unwrap();
        let b = evolve_single(&s, &g, &times).unwrap();
        for i in 0..times.len() {
            assert_abs_diff_eq!(a.mz[i], b.mz[i], epsilon = 1e-12);
            assert_abs_diff_eq!(a.sxx[i], b.sxx[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn continuous_at_second_quench() {
        let g = grid();
        let c = QuenchProtocol::cyclic(1.0, 0.5, 2.0, 3.0).unwrap();
        let s = QuenchProtocol::single(1.0, 0.5, 2.0).unwrap();
        let a = evolve_cyclic(&c, &g, &[3.0]).unwrap();
        let b = evolve_single(&s, &g, &[3.0]).unwrap();
        assert_abs_diff_eq!(a.mz[0], b.mz[0], epsilon = 1e-10);
        assert_abs_diff_eq!(a.sxx[0], b.sxx[0], epsilon = 1e-10);
    }

    #[test]
    fn kernels_are_bounded() {
        let c = QuenchProtocol::double(0.4, 0.2, 3.0, 0.9, 1.3).unwrap();
        for i in 1..50 {
            let k = i as f64 * PI / 50.0;
            for t in [1.3, 2.0, 7.7, 40.0] {
                let q = qp_kernels(&c, k, t).unwrap();
                for v in [q.q1, q.q2, q.p1, q.p2] {
                    assert!(v.abs() <= 1.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn window_validation() {
        assert!(AveragingWindow::default().validate().is_ok());
        let bad = AveragingWindow { samples: 1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = AveragingWindow { delay: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = AveragingWindow { length: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn phasor_mean_matches_direct_sum() {
        for (omega, start, dt, n) in [(3.7, 50.0, 0.01, 5000), (0.2, 0.0, 1.0, 17), (2.0 * PI, 1.0, 1.0, 9)] {
            let (c, s) = mean_phasor(omega, start, dt, n);
            let dc: f64 = (0..n).map(|j| (omega * (start + j as f64 * dt)).cos()).sum::<f64>() / n as f64;
            let ds: f64 = (0..n).map(|j| (omega * (start + j as f64 * dt)).sin()).sum::<f64>() / n as f64;
            assert_abs_diff_eq!(c, dc, epsilon = 1e-11);
            assert_abs_diff_eq!(s, ds, epsilon = 1e-11);
        }
    }

    #[test]
    fn closed_form_mean_equals_sampled_mean() {
        let g = MomentumGrid::midpoint(128).unwrap();
        let p = QuenchProtocol::cyclic(1.0, 0.5, 4.0, 1.7).unwrap();
        let w = AveragingWindow { delay: 5.0, length: 60.0, samples: 3001 };
        let fast = long_time_cyclic(&p, &g, &w).unwrap();
        let slow = evolve_cyclic(&p, &g, &w.times(1.7)).unwrap().mean();
        assert_abs_diff_eq!(fast.mz, slow.mz, epsilon = 1e-12);
        assert_abs_diff_eq!(fast.sxx, slow.sxx, epsilon = 1e-12);
    }

    #[test]
    fn no_op_second_quench_long_time_matches_single() {
        let g = MomentumGrid::midpoint(4096).unwrap();
        let c = QuenchProtocol::double(1.0, 0.5, 2.0, 2.0, 3.0).unwrap();
        let s = QuenchProtocol::single(1.0, 0.5, 2.0).unwrap();
        let a = long_time_cyclic(&c, &g, &AveragingWindow::default()).unwrap();
        let b = long_time_average_single(&s, &g).unwrap();
        assert_abs_diff_eq!(a.mz, b.mz, epsilon = 1e-3);
        assert_abs_diff_eq!(a.sxx, b.sxx, epsilon = 1e-3);
    }

    #[test]
    fn sweep_at_zero_dwell_has_no_deviation() {
        let g = grid();
        let rows = sweep_dwell_time(1.0, 0.5, 2.0, &[0.0], &g, &AveragingWindow::default(), 0.01).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].deviation_mz < 1e-10);
        assert!(rows[0].is_ergodic_mz);
        assert_eq!(
            sweep_dwell_time(1.0, 0.5, 2.0, &[], &g, &AveragingWindow::default(), 0.01),
            Err(Error::EmptyScan)
        );
    }

    #[test]
    fn first_ergodic_dwell_skips_initial_window() {
        let row = |dwell, ok| DwellRow {
            dwell,
            long_time: Observables { mz: 0.0, sxx: 0.0 },
            equilibrium: Observables { mz: 0.0, sxx: 0.0 },
            deviation_mz: 0.0,
            deviation_sxx: 0.0,
            is_ergodic_mz: ok,
            is_ergodic_sxx: ok,
        };
        let rows = [row(0.0, true), row(0.1, false), row(0.2, false), row(0.3, true)];
        assert_eq!(first_ergodic_dwell(&rows), Some(0.3));
        assert_eq!(first_ergodic_dwell(&rows[..3]), None);
        assert_eq!(first_ergodic_dwell(&[row(0.0, true)]), None);
    }
}
