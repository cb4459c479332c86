//! Dense unitary matrices of primitives on cyclic or open ladder windows.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::angle::Angle;
use crate::ladder::{
    is_excited, kinetic_phase, phase_factor, pulse_block, LadderError, LadderState, Primitive,
};

pub const CYCLIC_BASE: usize = 8;
pub const MAX_DIM: usize = 64;
pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("cyclic dimension {0} is not 8·2^k")]
    BadCyclicDim(usize),
    #[error("window dimension must be between 1 and {MAX_DIM}, got {0}")]
    BadDim(usize),
    #[error("kinetic angle {theta}π is not periodic on a cyclic window of {dim} states")]
    IncompatibleKineticAngle { theta: Angle, dim: usize },
    #[error("dimension or topology mismatch: {0:?} vs {1:?}")]
    Mismatch(Topology, Topology),
    #[error("empty matrix list")]
    Empty,
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("state window does not match the matrix topology")]
    StateMismatch,
}

/// Basis of a matrix: ladder indices `0..dim` with `n ≡ n + dim`, or an open
/// window `n_min..n_min+dim` with momenta `n + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Cyclic { dim: usize },
    Open { n_min: i64, dim: usize, offset: f64 },
}

impl Topology {
    pub fn cyclic(dim: usize) -> Result<Self, MatrixError> {
        let mut d = CYCLIC_BASE;
        while d < dim {
            d *= 2;
        }
        if d != dim || dim > MAX_DIM {
            return Err(MatrixError::BadCyclicDim(dim));
        }
        Ok(Topology::Cyclic { dim })
    }

    pub fn open(window: (i64, i64), offset: f64) -> Result<Self, MatrixError> {
        let dim = (window.1 - window.0 + 1).max(0) as usize;
        if dim == 0 || dim > MAX_DIM {
            return Err(MatrixError::BadDim(dim));
        }
        Ok(Topology::Open {
            n_min: window.0,
            dim,
            offset,
        })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Topology::Cyclic { dim } | Topology::Open { dim, .. } => dim,
        }
    }

    fn index(&self, k: usize) -> i64 {
        match *self {
            Topology::Cyclic { .. } => k as i64,
            Topology::Open { n_min, .. } => n_min + k as i64,
        }
    }

    fn momentum(&self, k: usize) -> f64 {
        match *self {
            Topology::Cyclic { .. } => k as f64,
            Topology::Open { n_min, offset, .. } => (n_min + k as i64) as f64 + offset,
        }
    }

    /// Position of ladder index `n` in this basis, if present.
    fn position(&self, n: i64) -> Option<usize> {
        match *self {
            Topology::Cyclic { dim } => Some(n.rem_euclid(dim as i64) as usize),
            Topology::Open { n_min, dim, .. } => {
                let k = n - n_min;
                (k >= 0 && (k as usize) < dim).then_some(k as usize)
            }
        }
    }

    /// Whether `G(theta)` on this cyclic window equals the open-ladder
    /// operator, i.e. `(p + dim)²θ ≡ p²θ (mod 2π)` for every integer `p`.
    pub fn kinetic_angle_compatible(&self, theta: Angle) -> bool {
        match *self {
            Topology::Open { .. } => true,
            Topology::Cyclic { dim } => {
                let d = Rational64::from_integer(dim as i64);
                let r = theta.ratio();
                // 2pdθ/π and d²θ/π must both be even integers
                (d * r).is_integer() && (d * d * r / Rational64::from_integer(2)).is_integer()
            }
        }
    }

    /// Smallest cyclic window (≥ `min_dim`) on which every kinetic angle of
    /// `prims` is exact.
    pub fn smallest_cyclic_for<'a>(
        prims: impl IntoIterator<Item = &'a Primitive> + Clone,
        min_dim: usize,
    ) -> Result<Self, MatrixError> {
        let mut dim = CYCLIC_BASE;
        while dim < min_dim {
            dim *= 2;
        }
        while dim <= MAX_DIM {
            let topo = Topology::Cyclic { dim };
            if prims
                .clone()
                .into_iter()
                .filter_map(|p| p.kinetic_angle())
                .all(|t| topo.kinetic_angle_compatible(t))
            {
                return Ok(topo);
            }
            dim *= 2;
        }
        let theta = prims
            .into_iter()
            .filter_map(|p| p.kinetic_angle())
            .find(|&t| !Topology::Cyclic { dim: MAX_DIM }.kinetic_angle_compatible(t))
            .unwrap_or(Angle::ZERO);
        Err(MatrixError::IncompatibleKineticAngle {
            theta,
            dim: MAX_DIM,
        })
    }
}

/// A dense complex matrix together with the basis it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    topology: Topology,
    entries: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    /// Wraps `entries`, checking shape and unitarity.
    pub fn new(entries: DMatrix<Complex64>, topology: Topology) -> Result<Self, MatrixError> {
        if entries.nrows() != topology.dim() || entries.ncols() != topology.dim() {
            return Err(MatrixError::BadDim(entries.nrows()));
        }
        let m = UnitaryMatrix { topology, entries };
        let defect = m.unitarity_defect();
        if defect > 1e-9 {
            return Err(MatrixError::NotUnitary(defect));
        }
        Ok(m)
    }

    pub fn identity(topology: Topology) -> Self {
        let d = topology.dim();
        UnitaryMatrix {
            topology,
            entries: DMatrix::identity(d, d),
        }
    }

    pub fn diagonal(phases: &[Complex64], topology: Topology) -> Result<Self, MatrixError> {
        Self::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(phases)),
            topology,
        )
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn dim(&self) -> usize {
        self.topology.dim()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix {
            topology: self.topology,
            entries: self.entries.adjoint(),
        }
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let p = self.entries.adjoint() * &self.entries;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j {
                    Complex64::one()
                } else {
                    Complex64::zero()
                };
                worst = worst.max((p[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `self · rhs` (so `rhs` acts first).
    pub fn then_after(&self, rhs: &UnitaryMatrix) -> Result<Self, MatrixError> {
        if self.topology != rhs.topology {
            return Err(MatrixError::Mismatch(self.topology, rhs.topology));
        }
        Ok(UnitaryMatrix {
            topology: self.topology,
            entries: &self.entries * &rhs.entries,
        })
    }

    /// Matrix of a primitive list given in application order (first element acts first).
    pub fn of_sequence(prims: &[Primitive], topology: Topology) -> Result<Self, MatrixError> {
        let mut acc = UnitaryMatrix::identity(topology);
        for p in prims {
            acc = matrix_of(p, topology)?.then_after(&acc)?;
        }
        Ok(acc)
    }

    /// Applies the matrix to a state on the same window.
    pub fn apply(&self, state: &LadderState) -> Result<LadderState, MatrixError> {
        let Topology::Open { n_min, dim, offset } = self.topology else {
            return Err(MatrixError::StateMismatch);
        };
        if state.n_min() != n_min || state.len() != dim || (state.offset() - offset).abs() > 1e-15 {
            return Err(MatrixError::StateMismatch);
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let out = &self.entries * v;
        LadderState::from_amplitudes(n_min, offset, out.iter().copied().collect())
            .map(|s| s.with_leakage_tolerance(state.leakage_tolerance()))
            .map_err(|_: LadderError| MatrixError::StateMismatch)
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Expands one primitive to a matrix on `topology`.
///
/// On open windows a level whose coupling partner lies outside the window is
/// left unchanged, which keeps the matrix unitary.
pub fn matrix_of(prim: &Primitive, topology: Topology) -> Result<UnitaryMatrix, MatrixError> {
    let d = topology.dim();
    if let Topology::Cyclic { dim } = topology {
        if let Some(theta) = prim.kinetic_angle() {
            if !topology.kinetic_angle_compatible(theta) {
                return Err(MatrixError::IncompatibleKineticAngle { theta, dim });
            }
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    match *prim {
        Primitive::Pulse { dir, alpha, phi } => {
            let block = pulse_block(alpha, phi);
            for k in 0..d {
                let n = topology.index(k);
                if is_excited(n) {
                    continue;
                }
                let partner = topology.position(n + dir.step());
                match partner {
                    Some(e) if e != k => {
                        m[(k, k)] = block[0][0];
                        m[(k, e)] = block[0][1];
                        m[(e, k)] = block[1][0];
                        m[(e, e)] = block[1][1];
                    }
                    _ => m[(k, k)] = Complex64::one(),
                }
            }
            // excited levels with no ground partner in the window
            for k in 0..d {
                let n = topology.index(k);
                if is_excited(n) && topology.position(n - dir.step()).is_none() {
                    m[(k, k)] = Complex64::one();
                }
            }
        }
        _ => {
            let kinetic = prim.kinetic_angle();
            let electronic = prim.electronic_angle().map(phase_factor);
            for k in 0..d {
                let mut z = Complex64::one();
                if let Some(theta) = kinetic {
                    z *= kinetic_phase(topology.momentum(k), theta);
                }
                if let Some(ph) = electronic {
                    if is_excited(topology.index(k)) {
                        z *= ph;
                    }
                }
                m[(k, k)] = z;
            }
        }
    }
    Ok(UnitaryMatrix {
        topology,
        entries: m,
    })
}

/// Product of matrices listed in textual order: `compose([A, B, C]) = A·B·C`,
/// so the rightmost matrix acts first.
pub fn compose(matrices: &[UnitaryMatrix]) -> Result<UnitaryMatrix, MatrixError> {
    let (first, rest) = matrices.split_first().ok_or(MatrixError::Empty)?;
    let mut acc = first.clone();
    for m in rest {
        acc = acc.then_after(m)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::Direction;

    fn q(n: i64, d: i64) -> Angle {
        Angle::pi_frac(n, d)
    }

    #[test]
    fn cyclic_dims() {
        assert!(Topology::cyclic(8).is_ok());
        assert!(Topology::cyclic(64).is_ok());
        assert!(Topology::cyclic(24).is_err());
        assert!(Topology::cyclic(128).is_err());
    }

    #[test]
    fn pi_pulse_matrix_pairs_neighbours() {
        let t = Topology::cyclic(8).unwrap();
        let m = matrix_of(&Primitive::up(q(1, 2), Angle::ZERO), t).unwrap();
        for g in (0..8).step_by(2) {
            assert!((m.get(g + 1, g) - Complex64::i()).norm() < 1e-15);
            assert!((m.get(g, g + 1) - Complex64::i()).norm() < 1e-15);
            assert!(m.get(g, g).norm() < 1e-15);
        }
        let nonzero = m.entries().iter().filter(|z| z.norm() > 1e-15).count();
        assert_eq!(nonzero, 8);
    }

    #[test]
    fn down_pulse_wraps_on_cycle() {
        let t = Topology::cyclic(8).unwrap();
        let m = matrix_of(&Primitive::down(q(1, 2), Angle::ZERO), t).unwrap();
        assert!((m.get(7, 0) - Complex64::i()).norm() < 1e-15);
        assert!((m.get(0, 7) - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn free_electronic_zero_is_identity() {
        let t = Topology::cyclic(8).unwrap();
        let m = matrix_of(&Primitive::f(Angle::ZERO), t).unwrap();
        assert_eq!(m, UnitaryMatrix::identity(t));
    }

    #[test]
    fn kinetic_matrix_diagonal() {
        let t = Topology::cyclic(8).unwrap();
        let m = matrix_of(&Primitive::g(q(1, 4)), t).unwrap();
        for p in 0..8usize {
            let expected = Complex64::cis(-((p * p) as f64) * std::f64::consts::FRAC_PI_4);
            assert!((m.get(p, p) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn incompatible_kinetic_angle_rejected() {
        let t = Topology::cyclic(8).unwrap();
        assert!(matches!(
            matrix_of(&Primitive::g(q(1, 16)), t),
            Err(MatrixError::IncompatibleKineticAngle { .. })
        ));
        assert!(Topology::cyclic(16)
            .unwrap()
            .kinetic_angle_compatible(q(1, 16)));
        assert!(!Topology::cyclic(16)
            .unwrap()
            .kinetic_angle_compatible(q(1, 32)));
        assert!(Topology::cyclic(32)
            .unwrap()
            .kinetic_angle_compatible(q(1, 32)));
        let prims = [Primitive::g(q(3, 32)), Primitive::g(q(1, 8))];
        assert_eq!(
            Topology::smallest_cyclic_for(&prims, 8).unwrap(),
            Topology::Cyclic { dim: 32 }
        );
        assert!(Topology::smallest_cyclic_for(&[Primitive::g(q(1, 128))], 8).is_err());
    }

    #[test]
    fn compose_examples() {
        let t = Topology::cyclic(8).unwrap();
        let u = matrix_of(&Primitive::up(q(1, 3), q(2, 5)), t).unwrap();
        assert_eq!(compose(std::slice::from_ref(&u)).unwrap(), u);
        let i = compose(&[u.clone(), u.adjoint()]).unwrap();
        assert!(i.max_abs_diff(&UnitaryMatrix::identity(t)) < 1e-15);
        let other = UnitaryMatrix::identity(Topology::cyclic(16).unwrap());
        assert!(compose(&[u, other]).is_err());
        assert_eq!(compose(&[]), Err(MatrixError::Empty));
    }

    #[test]
    fn open_window_matrix_matches_state_path() {
        let topo = Topology::open((-6, 9), 0.41).unwrap();
        let prims = [
            Primitive::up(q(1, 4), q(1, 3)),
            Primitive::fg(q(1, 8), Rational64::new(3, 2)),
            Primitive::down(q(1, 2), q(5, 8)),
            Primitive::g(q(3, 8)),
            Primitive::f(q(7, 4)),
        ];
        let s = LadderState::new(
            (-6, 9),
            0.41,
            &[(0, Complex64::new(1.0, 0.0)), (3, Complex64::new(0.0, 0.5))],
        )
        .unwrap();
        let via_state = s.apply_all(&prims).unwrap();
        let via_matrix = UnitaryMatrix::of_sequence(&prims, topo)
            .unwrap()
            .apply(&s)
            .unwrap();
        for (a, b) in via_state.amplitudes().iter().zip(via_matrix.amplitudes()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn open_window_edges_stay_unitary() {
        for window in [(0, 9), (-3, 8), (1, 10), (-5, -5)] {
            let t = Topology::open(window, 0.25).unwrap();
            for dir in [Direction::Up, Direction::Down] {
                let m = matrix_of(
                    &Primitive::Pulse {
                        dir,
                        alpha: q(1, 3),
                        phi: q(1, 7),
                    },
                    t,
                )
                .unwrap();
                assert!(m.unitarity_defect() < 1e-12, "{window:?} {dir:?}");
            }
        }
    }

    #[test]
    fn new_rejects_non_unitary() {
        let t = Topology::cyclic(8).unwrap();
        let m = DMatrix::from_element(8, 8, Complex64::one());
        assert!(matches!(
            UnitaryMatrix::new(m, t),
            Err(MatrixError::NotUnitary(_))
        ));
    }
}
