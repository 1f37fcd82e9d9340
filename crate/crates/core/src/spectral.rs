//! Free-fermion spectrum of the XY chain.
//!
//! After Jordan-Wigner and Fourier transforms each pair `(k, -k)` is a
//! two-level problem with coefficients
//!
//! ```text
//! A_k = -2 (cos k + h),   B_k = 2 δ sin k,   ε_k = sqrt(A_k² + B_k²)
//! ```
//!
//! and Bogoliubov angle fixed by `cos 2θ_k = A_k/ε_k`, `sin 2θ_k = B_k/ε_k`.
//! That branch keeps the Φ = 0 time series constant, sends `M_z → +1` for
//! large fields and gives `S^xx = 1` for the Ising point at zero field.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::quench::Observables;
use crate::sum;

/// Field at which the gap closes, independent of the anisotropy.
pub const CRITICAL_FIELD: f64 = 1.0;

/// Critical transverse field `h_c(δ)`.
pub fn critical_field(_delta: f64) -> f64 {
    CRITICAL_FIELD
}

/// Couplings of one phase point: anisotropy `delta` and transverse field `h`
/// (exchange fixed to 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub delta: f64,
    pub h: f64,
}

impl ModelParams {
    pub fn new(delta: f64, h: f64) -> Result<Self> {
        check_finite("delta", delta)?;
        check_finite("h", h)?;
        Ok(Self { delta, h })
    }

    /// Momenta at which the integrands jump. Only the XX chain (`δ = 0`) has
    /// them: the angle flips between 0 and π/2 at the Fermi point.
    pub fn fermi_points(&self) -> Option<f64> {
        if self.delta == 0.0 && self.h.abs() < 1.0 {
            Some((-self.h).acos())
        } else {
            None
        }
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}

/// An angle carried as its cosine and sine, so that differences and sums
/// never pass through inverse trigonometric functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle {
    pub cos: f64,
    pub sin: f64,
}

impl Angle {
    pub const ZERO: Angle = Angle { cos: 1.0, sin: 0.0 };

    pub fn from_radians(x: f64) -> Self {
        let (sin, cos) = x.sin_cos();
        Self { cos, sin }
    }

    pub fn radians(&self) -> f64 {
        self.sin.atan2(self.cos)
    }

    /// Twice this angle.
    pub fn double(self) -> Self {
        Self {
            cos: self.cos * self.cos - self.sin * self.sin,
            sin: 2.0 * self.sin * self.cos,
        }
    }

    /// Half of this angle on the principal branch `(-π/2, π/2]`.
    ///
    /// Uses whichever of `cos` or `sin` of the half angle is at least
    /// `1/√2` as the pivot, which keeps both outputs accurate near `±π`.
    pub fn half(self) -> Self {
        if self.cos >= 0.0 {
            let c = (0.5 * (1.0 + self.cos)).sqrt();
            Self {
                cos: c,
                sin: self.sin / (2.0 * c),
            }
        } else {
            let s = (0.5 * (1.0 - self.cos)).sqrt();
            let s = if self.sin < 0.0 { -s } else { s };
            Self {
                cos: self.sin / (2.0 * s),
                sin: s,
            }
        }
    }
}

impl Add for Angle {
    type Output = Angle;

    fn add(self, rhs: Angle) -> Angle {
        Angle {
            cos: self.cos * rhs.cos - self.sin * rhs.sin,
            sin: self.sin * rhs.cos + self.cos * rhs.sin,
        }
    }
}

impl Sub for Angle {
    type Output = Angle;

    fn sub(self, rhs: Angle) -> Angle {
        Angle {
            cos: self.cos * rhs.cos + self.sin * rhs.sin,
            sin: self.sin * rhs.cos - self.cos * rhs.sin,
        }
    }
}

impl Neg for Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        Angle {
            cos: self.cos,
            sin: -self.sin,
        }
    }
}

/// `A_k`, `B_k` and the quasiparticle energy `ε_k` at one momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dispersion {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
}

impl Dispersion {
    /// The doubled Bogoliubov angle `2θ_k`.
    ///
    /// Where the gap closes the angle is taken from the limit `k → k⁻`: for
    /// `δ ≠ 0` the zero sits at `k = π` (or `0`) where `B_k` vanishes linearly
    /// and `A_k` quadratically, giving `2θ = sign(δ)·π/2`; for `δ = 0` the
    /// left limit of `sign(A_k)` is `-1`.
    pub fn two_theta(&self, delta: f64) -> Angle {
        if self.epsilon > 0.0 {
            Angle {
                cos: self.a / self.epsilon,
                sin: self.b / self.epsilon,
            }
        } else if delta != 0.0 {
            Angle {
                cos: 0.0,
                sin: delta.signum(),
            }
        } else {
            Angle {
                cos: -1.0,
                sin: 0.0,
            }
        }
    }
}

pub fn dispersion(params: ModelParams, k: f64) -> Dispersion {
    let (sin_k, cos_k) = k.sin_cos();
    dispersion_from_trig(params, cos_k, sin_k)
}

fn dispersion_from_trig(params: ModelParams, cos_k: f64, sin_k: f64) -> Dispersion {
    let a = -2.0 * (cos_k + params.h);
    let b = 2.0 * params.delta * sin_k;
    Dispersion {
        a,
        b,
        epsilon: a.hypot(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridScheme {
    /// Midpoint rule on `(0, π)` standing in for `N → ∞`.
    ThermodynamicMidpoint,
    /// The even-parity (antiperiodic) momenta `(2m-1)π/N` of an `N`-site ring.
    FiniteNS,
}

/// Positive momenta with quadrature weights such that `Σ_j w_j f(k_j)`
/// approximates `(2/N) Σ_{k>0} f(k)`. Weights always sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    scheme: GridScheme,
    points: Vec<f64>,
    weights: Vec<f64>,
    cos_k: Vec<f64>,
    sin_k: Vec<f64>,
}

impl MomentumGrid {
    /// `m` midpoints `k_j = (j - 1/2) π / m`, each with weight `1/m`.
    pub fn midpoint(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyGrid);
        }
        let points = (1..=m).map(|j| (j as f64 - 0.5) * PI / m as f64).collect();
        Ok(Self::from_parts(
            GridScheme::ThermodynamicMidpoint,
            points,
            vec![1.0 / m as f64; m],
        ))
    }

    /// The `N/2` positive Neveu-Schwarz momenta of an `N`-site ring, weight `2/N`.
    pub fn finite_ns(n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites % 2 != 0 {
            return Err(Error::OddSiteCount(n_sites));
        }
        let n = n_sites as f64;
        let points = (1..=n_sites / 2)
            .map(|m| (2 * m - 1) as f64 * PI / n)
            .collect();
        Ok(Self::from_parts(
            GridScheme::FiniteNS,
            points,
            vec![2.0 / n; n_sites / 2],
        ))
    }

    fn from_parts(scheme: GridScheme, points: Vec<f64>, weights: Vec<f64>) -> Self {
        let (sin_k, cos_k) = points.iter().map(|k| k.sin_cos()).unzip();
        Self {
            scheme,
            points,
            weights,
            cos_k,
            sin_k,
        }
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cos_k(&self) -> &[f64] {
        &self.cos_k
    }

    pub fn sin_k(&self) -> &[f64] {
        &self.sin_k
    }

    /// `Σ_j w_j f(j)` in a fixed ascending-k pairwise order.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(usize) -> f64,
    {
        sum::pairwise(self.len(), |j| self.weights[j] * f(j))
    }

    /// The grid to integrate on when the given phase points are involved.
    ///
    /// Midpoint cells that contain a Fermi point of any `δ = 0` phase point
    /// are split there into two sub-cells, each carrying its own midpoint and
    /// a share of the weight proportional to its length. Step integrands are
    /// then integrated exactly. Finite-N grids are returned unchanged: their
    /// sums are the physical finite-size values.
    pub fn resolved_for(&self, phase_points: &[ModelParams]) -> Cow<'_, MomentumGrid> {
        if self.scheme != GridScheme::ThermodynamicMidpoint {
            return Cow::Borrowed(self);
        }
        let mut breaks: Vec<f64> = phase_points
            .iter()
            .filter_map(ModelParams::fermi_points)
            .collect();
        if breaks.is_empty() {
            return Cow::Borrowed(self);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let m = self.len();
        let cell = PI / m as f64;
        let mut points = Vec::with_capacity(m + breaks.len());
        let mut weights = Vec::with_capacity(m + breaks.len());
        for j in 0..m {
            let lo = j as f64 * cell;
            let hi = lo + cell;
            let mut edges = vec![lo];
            edges.extend(
                breaks
                    .iter()
                    .copied()
                    .filter(|&b| b > lo + 1e-12 * cell && b < hi - 1e-12 * cell),
            );
            edges.push(hi);
            if edges.len() == 2 {
                points.push(self.points[j]);
                weights.push(self.weights[j]);
                continue;
            }
            for pair in edges.windows(2) {
                points.push(0.5 * (pair[0] + pair[1]));
                weights.push(self.weights[j] * (pair[1] - pair[0]) / cell);
            }
        }
        Cow::Owned(Self::from_parts(self.scheme, points, weights))
    }
}

/// Per-mode spectrum and doubled Bogoliubov angle of one phase point on a grid.
#[derive(Clone, Debug)]
pub struct BogoliubovFrame<'g> {
    pub params: ModelParams,
    pub grid: &'g MomentumGrid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub two_theta: Vec<Angle>,
}

impl<'g> BogoliubovFrame<'g> {
    pub fn new(params: ModelParams, grid: &'g MomentumGrid) -> Self {
        let n = grid.len();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut epsilon = Vec::with_capacity(n);
        let mut two_theta = Vec::with_capacity(n);
        for (&c, &s) in grid.cos_k().iter().zip(grid.sin_k()) {
            let d = dispersion_from_trig(params, c, s);
            a.push(d.a);
            b.push(d.b);
            epsilon.push(d.epsilon);
            two_theta.push(d.two_theta(params.delta));
        }
        Self {
            params,
            grid,
            a,
            b,
            epsilon,
            two_theta,
        }
    }

    pub fn cos2theta(&self, j: usize) -> f64 {
        self.two_theta[j].cos
    }

    pub fn sin2theta(&self, j: usize) -> f64 {
        self.two_theta[j].sin
    }

    /// `cos(k + 2θ_k)`, the per-mode nearest-neighbour XX amplitude.
    pub fn bond_angle(&self, j: usize) -> Angle {
        Angle {
            cos: self.grid.cos_k()[j],
            sin: self.grid.sin_k()[j],
        } + self.two_theta[j]
    }
}

pub fn bogoliubov_frame(params: ModelParams, grid: &MomentumGrid) -> Result<BogoliubovFrame<'_>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(BogoliubovFrame::new(params, grid))
}

/// Ground-state `M_z = -Σ w cos 2θ` and `S^xx = -Σ w cos(k + 2θ)`.
pub fn equilibrium_observables(params: ModelParams, grid: &MomentumGrid) -> Result<Observables> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let grid = grid.resolved_for(&[params]);
    let frame = BogoliubovFrame::new(params, &grid);
    Ok(frame_observables(&frame))
}

pub(crate) fn frame_observables(frame: &BogoliubovFrame<'_>) -> Observables {
    let grid = frame.grid;
    Observables {
        mz: -grid.integrate(|j| frame.cos2theta(j)),
        sxx: -grid.integrate(|j| frame.bond_angle(j).cos),
    }
}
