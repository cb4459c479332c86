//! Simulator and verification harness for a momentum-state quantum computer.
//!
//! Information lives in the momentum of a two-level atom confined to a
//! ladder of states spaced by one photon recoil ħk. Momentum `n` (in ħk)
//! read in binary gives the qubits `Q_k … Q₁Q₀`, with `Q₀` coinciding with
//! the electronic level. Short laser pulses and periods of free evolution
//! are the only primitives; everything else is composed from them.
//!
//! * [`ladder`] – states on a window of the ladder and the four primitives.
//! * [`matrix`] – dense unitaries of primitives on cyclic or open windows.
//! * [`sequence`] – the pulse-sequence language and the built-in opcode table.
//! * [`gate`] – ideal logical gates and equivalence checks.
//! * [`cooling`] – Monte Carlo of repeated right-rotation plus spontaneous emission.
//! * [`cli`] – the `mlad` command-line front end.

pub mod angle;
pub mod cli;
pub mod cooling;
pub mod gate;
pub mod ladder;
pub mod matrix;
pub mod sequence;

pub use angle::Angle;
pub use cooling::{run_ensemble, CycleHistogram, DecayModel, EnsembleConfig};
pub use gate::{ideal_gate, verify_named, Equivalence, GateError, IdealGate, VerificationReport};
pub use ladder::{Direction, LadderError, LadderState, Primitive, PrimitiveKind};
pub use matrix::{compose, matrix_of, MatrixError, Topology, UnitaryMatrix};
