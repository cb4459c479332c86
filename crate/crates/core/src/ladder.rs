//! The one-dimensional momentum ladder and the four primitive operations.
//!
//! Ladder index `n` carries momentum `n + offset` (units of ħk). Even indices
//! are ground-state levels and odd indices excited levels, so an upward
//! pulse couples `|g, n⟩ ↔ |e, n+1⟩` and a downward pulse couples
//! `|g, n⟩ ↔ |e, n−1⟩`.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::angle::Angle;

/// Parity of ground-state indices. Index 0 is a ground level.
pub const GROUND_PARITY: i64 = 0;

/// Default tolerance on probability found near a window boundary.
pub const DEFAULT_LEAKAGE_TOLERANCE: f64 = 1e-9;

/// Number of indices at each window edge that count as the boundary band.
pub const BOUNDARY_BAND: i64 = 2;

const NORM_TOL: f64 = 1e-300;

#[inline]
pub fn is_excited(index: i64) -> bool {
    index.rem_euclid(2) != GROUND_PARITY
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LadderError {
    #[error("initial amplitude list is empty")]
    EmptyAmplitudes,
    #[error("initial amplitudes have zero norm")]
    ZeroNorm,
    #[error("index {index} lies outside window [{n_min}, {n_max}]")]
    IndexOutOfWindow { index: i64, n_min: i64, n_max: i64 },
    #[error("invalid window [{n_min}, {n_max}]")]
    InvalidWindow { n_min: i64, n_max: i64 },
    #[error("boundary leakage: probability {probability:.3e} within {BOUNDARY_BAND} indices of the window edge exceeds {tolerance:.1e}")]
    BoundaryLeakage { probability: f64, tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    /// Index step from a ground level to the excited level it couples to.
    pub fn step(self) -> i64 {
        match self {
            Direction::Up => 1,
            Direction::Down => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrimitiveKind {
    PulseUp,
    PulseDown,
    FreeElectronic,
    FreeKinetic,
    FreeCombined,
}

/// One instruction of a pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Primitive {
    /// `W±(α, φ)`: rotation through Rabi angle 2α with optical phase φ.
    Pulse {
        dir: Direction,
        alpha: Angle,
        phi: Angle,
    },
    /// `F(θ)`, θ = ωt.
    FreeElectronic { theta: Angle },
    /// `G(θ)`, θ = t/τ.
    FreeKinetic { theta: Angle },
    /// `FG(θ)`: kinetic angle θ together with electronic angle ωτ·θ.
    FreeCombined { theta: Angle, omega_tau: Rational64 },
}

impl Primitive {
    pub fn up(alpha: Angle, phi: Angle) -> Self {
        Primitive::Pulse {
            dir: Direction::Up,
            alpha,
            phi,
        }
    }

    pub fn down(alpha: Angle, phi: Angle) -> Self {
        Primitive::Pulse {
            dir: Direction::Down,
            alpha,
            phi,
        }
    }

    pub fn f(theta: Angle) -> Self {
        Primitive::FreeElectronic { theta }
    }

    pub fn g(theta: Angle) -> Self {
        Primitive::FreeKinetic { theta }
    }

    pub fn fg(theta: Angle, omega_tau: Rational64) -> Self {
        Primitive::FreeCombined { theta, omega_tau }
    }

    pub fn kind(&self) -> PrimitiveKind {
        match self {
            Primitive::Pulse {
                dir: Direction::Up, ..
            } => PrimitiveKind::PulseUp,
            Primitive::Pulse {
                dir: Direction::Down,
                ..
            } => PrimitiveKind::PulseDown,
            Primitive::FreeElectronic { .. } => PrimitiveKind::FreeElectronic,
            Primitive::FreeKinetic { .. } => PrimitiveKind::FreeKinetic,
            Primitive::FreeCombined { .. } => PrimitiveKind::FreeCombined,
        }
    }

    pub fn is_pulse(&self) -> bool {
        matches!(self, Primitive::Pulse { .. })
    }

    /// Kinetic angle θG carried by the primitive, if any.
    pub fn kinetic_angle(&self) -> Option<Angle> {
        match *self {
            Primitive::FreeKinetic { theta } | Primitive::FreeCombined { theta, .. } => Some(theta),
            _ => None,
        }
    }

    /// Electronic angle θF carried by the primitive, if any.
    pub fn electronic_angle(&self) -> Option<Angle> {
        match *self {
            Primitive::FreeElectronic { theta } => Some(theta),
            Primitive::FreeCombined { theta, omega_tau } => Some(theta * omega_tau),
            _ => None,
        }
    }
}

/// `(g, e)` block of a pulse: `[[cos α, i e^{−iφ} sin α], [i e^{iφ} sin α, cos α]]`.
pub(crate) fn pulse_block(alpha: Angle, phi: Angle) -> [[Complex64; 2]; 2] {
    let (s, c) = alpha.radians().sin_cos();
    let (s, c) = (snap(s), snap(c));
    let i = Complex64::i();
    let to_e = i * Complex64::cis(phi.radians()) * s;
    let to_g = i * Complex64::cis(-phi.radians()) * s;
    [
        [Complex64::new(c, 0.0), to_g],
        [to_e, Complex64::new(c, 0.0)],
    ]
}

// Removes the ~1e-16 residue of e.g. cos(π/2) so exact zeros stay zero.
fn snap(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

/// `e^{−iθ}`, with θ reduced exactly modulo 2π first.
pub(crate) fn phase_factor(theta: Angle) -> Complex64 {
    let r = theta.ratio();
    let two = Rational64::from_integer(2);
    let reduced = r - (r / two).floor() * two;
    let x = reduced.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI;
    Complex64::cis(-x)
}

/// `e^{−i p² θ}` for true momentum `p` (units of ħk).
pub(crate) fn kinetic_phase(momentum: f64, theta: Angle) -> Complex64 {
    if theta.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    if momentum.fract() == 0.0 && momentum.abs() < 1e6 {
        let p = momentum as i64;
        return phase_factor(theta.scale(Rational64::from_integer(p * p)));
    }
    Complex64::cis(-momentum * momentum * theta.radians())
}

/// Complex amplitudes over a finite window of ladder indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderState {
    offset: f64,
    n_min: i64,
    amplitudes: Vec<Complex64>,
    leakage_tolerance: f64,
}

impl LadderState {
    /// Builds a normalized state from `(index, amplitude)` pairs.
    pub fn new(
        window: (i64, i64),
        offset: f64,
        initial: &[(i64, Complex64)],
    ) -> Result<Self, LadderError> {
        let (n_min, n_max) = window;
        if n_max < n_min {
            return Err(LadderError::InvalidWindow { n_min, n_max });
        }
        if initial.is_empty() {
            return Err(LadderError::EmptyAmplitudes);
        }
        let mut amplitudes = vec![Complex64::zero(); (n_max - n_min + 1) as usize];
        for &(index, a) in initial {
            if index < n_min || index > n_max {
                return Err(LadderError::IndexOutOfWindow {
                    index,
                    n_min,
                    n_max,
                });
            }
            amplitudes[(index - n_min) as usize] += a;
        }
        Self::from_amplitudes(n_min, offset, amplitudes)
    }

    /// Takes a dense amplitude vector starting at index `n_min` and normalizes it.
    pub fn from_amplitudes(
        n_min: i64,
        offset: f64,
        mut amplitudes: Vec<Complex64>,
    ) -> Result<Self, LadderError> {
        if amplitudes.is_empty() {
            return Err(LadderError::EmptyAmplitudes);
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= NORM_TOL || !norm.is_finite() {
            return Err(LadderError::ZeroNorm);
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(LadderState {
            offset,
            n_min,
            amplitudes,
            leakage_tolerance: DEFAULT_LEAKAGE_TOLERANCE,
        })
    }

    /// Pure ground state at real momentum `p`, placed on the nearest even index.
    pub fn ground_at(window: (i64, i64), momentum: f64) -> Result<Self, LadderError> {
        let n = 2 * (momentum / 2.0).round() as i64;
        Self::new(
            window,
            momentum - n as f64,
            &[(n, Complex64::new(1.0, 0.0))],
        )
    }

    pub fn with_leakage_tolerance(mut self, tolerance: f64) -> Self {
        self.leakage_tolerance = tolerance;
        self
    }

    pub fn leakage_tolerance(&self) -> f64 {
        self.leakage_tolerance
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn window(&self) -> (i64, i64) {
        (self.n_min, self.n_max())
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.amplitudes.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude at ladder index `n` (zero outside the window).
    pub fn amplitude(&self, n: i64) -> Complex64 {
        if n < self.n_min || n > self.n_max() {
            Complex64::zero()
        } else {
            self.amplitudes[(n - self.n_min) as usize]
        }
    }

    pub fn momentum(&self, n: i64) -> f64 {
        n as f64 + self.offset
    }

    /// `(index, momentum, probability)` for every index in the window.
    pub fn populations(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.amplitudes.iter().enumerate().map(move |(k, a)| {
            let n = self.n_min + k as i64;
            (n, self.momentum(n), a.norm_sqr())
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability within [`BOUNDARY_BAND`] indices of either window edge.
    pub fn boundary_probability(&self) -> f64 {
        let len = self.amplitudes.len();
        let band = (BOUNDARY_BAND as usize).min(len);
        let low: f64 = self.amplitudes[..band].iter().map(|a| a.norm_sqr()).sum();
        let high_start = len.saturating_sub(band).max(band);
        let high: f64 = self.amplitudes[high_start..]
            .iter()
            .map(|a| a.norm_sqr())
            .sum();
        low + high
    }

    pub fn check_leakage(&self) -> Result<(), LadderError> {
        let probability = self.boundary_probability();
        if probability > self.leakage_tolerance {
            Err(LadderError::BoundaryLeakage {
                probability,
                tolerance: self.leakage_tolerance,
            })
        } else {
            Ok(())
        }
    }

    fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        LadderState {
            offset: self.offset,
            n_min: self.n_min,
            amplitudes,
            leakage_tolerance: self.leakage_tolerance,
        }
    }

    pub fn apply_pulse(
        &self,
        dir: Direction,
        alpha: Angle,
        phi: Angle,
    ) -> Result<Self, LadderError> {
        self.check_leakage()?;
        let block = pulse_block(alpha, phi);
        let mut out = self.amplitudes.clone();
        let n_max = self.n_max();
        for (k, slot) in out.iter_mut().enumerate() {
            let n = self.n_min + k as i64;
            // Partner of n: the level it is coupled to by this pulse.
            let (partner, own_row) = if is_excited(n) {
                (n - dir.step(), 1)
            } else {
                (n + dir.step(), 0)
            };
            if partner < self.n_min || partner > n_max {
                // below tolerance by the leakage check; the level is left unchanged
                continue;
            }
            let own = self.amplitudes[k];
            let other = self.amplitudes[(partner - self.n_min) as usize];
            *slot = block[own_row][own_row] * own + block[own_row][1 - own_row] * other;
        }
        Ok(self.with_amplitudes(out))
    }

    pub fn apply_free_electronic(&self, theta: Angle) -> Self {
        let phase = phase_factor(theta);
        let out = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                if is_excited(self.n_min + k as i64) {
                    a * phase
                } else {
                    a
                }
            })
            .collect();
        self.with_amplitudes(out)
    }

    pub fn apply_free_kinetic(&self, theta: Angle) -> Self {
        let out = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, &a)| a * kinetic_phase(self.momentum(self.n_min + k as i64), theta))
            .collect();
        self.with_amplitudes(out)
    }

    pub fn apply_free_combined(&self, theta: Angle, omega_tau: Rational64) -> Self {
        self.apply_free_kinetic(theta)
            .apply_free_electronic(theta * omega_tau)
    }

    pub fn apply(&self, prim: &Primitive) -> Result<Self, LadderError> {
        Ok(match *prim {
            Primitive::Pulse { dir, alpha, phi } => return self.apply_pulse(dir, alpha, phi),
            Primitive::FreeElectronic { theta } => self.apply_free_electronic(theta),
            Primitive::FreeKinetic { theta } => self.apply_free_kinetic(theta),
            Primitive::FreeCombined { theta, omega_tau } => {
                self.apply_free_combined(theta, omega_tau)
            }
        })
    }

    /// Applies primitives in the order given (first element first).
    pub fn apply_all<'a, I>(&self, prims: I) -> Result<Self, LadderError>
    where
        I: IntoIterator<Item = &'a Primitive>,
    {
        let mut state = self.clone();
        for p in prims {
            state = state.apply(p)?;
        }
        Ok(state)
    }

    pub fn excited_population(&self) -> f64 {
        self.populations()
            .filter(|&(n, _, _)| is_excited(n))
            .map(|(_, _, p)| p)
            .sum()
    }

    /// Probability per momentum bin; bins have width `bin_width` and are
    /// centred on integer multiples of it. Empty bins are omitted.
    pub fn momentum_histogram(&self, bin_width: f64) -> Vec<(f64, f64)> {
        assert!(bin_width > 0.0, "bin width must be positive");
        let mut bins: std::collections::BTreeMap<i64, f64> = Default::default();
        for (_, p, prob) in self.populations() {
            if prob > 0.0 {
                *bins.entry((p / bin_width).round() as i64).or_default() += prob;
            }
        }
        bins.into_iter()
            .map(|(k, prob)| (k as f64 * bin_width, prob))
            .collect()
    }

    /// Keeps only ground (`excited == false`) or excited levels, renormalized.
    pub fn project_manifold(&self, excited: bool) -> Result<Self, LadderError> {
        let out = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                if is_excited(self.n_min + k as i64) == excited {
                    a
                } else {
                    Complex64::zero()
                }
            })
            .collect();
        Self::from_amplitudes(self.n_min, self.offset, out)
            .map(|s| s.with_leakage_tolerance(self.leakage_tolerance))
    }
}
