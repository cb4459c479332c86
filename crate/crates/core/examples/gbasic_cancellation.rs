//! The basic kinetic sequence cancels the electronic phase and leaves G(θ).
//!
//! Four free-evolution segments are separated by π pulses (α = π/2); every
//! momentum component spends half the time in each electronic level. Taking
//! the table's W±(π, 0) literally (α = π, which is −1) leaves the
//! electronic phase in place.
//!
//! `cargo run --example gbasic_cancellation`

use momentum_qc::gate::{ideal_kinetic, verify_gbasic, verify_sequence, Equivalence};
use momentum_qc::sequence::{builtin_table, expand, parse_with, ParseOptions};
use momentum_qc::Angle;
use num_rational::Rational64;

fn main() {
    let thetas = [
        Angle::pi_frac(1, 8),
        Angle::pi_frac(1, 4),
        Angle::pi_frac(3, 8),
    ];
    let omegas = [
        Rational64::from_integer(0),
        Rational64::from_integer(2),
        Rational64::new(7, 3),
    ];
    println!("pi pulses (alpha = pi/2):");
    for &t in &thetas {
        for &w in &omegas {
            let r = verify_gbasic(t, w).unwrap();
            println!(
                "  theta {t:>4}  wt {w:>3}  window {:>2}  fidelity {:.12}",
                r.window, r.fidelity
            );
        }
    }

    println!("literal alpha = pi:");
    for &w in &omegas {
        let src =
            "W-(1,0) . FG(1/32) . W-(1,0) . FG(1/32) . W+(1,0) . FG(1/32) . W+(1,0) . FG(1/32)";
        let prog = parse_with(src, ParseOptions { omega_tau: w }).unwrap();
        let prims = expand(&prog, &builtin_table()).unwrap();
        let r = verify_sequence(
            "GBASIC(alpha=pi)",
            &prims,
            &ideal_kinetic(Angle::pi_frac(1, 8)),
            Equivalence::GlobalPhase,
        )
        .unwrap();
        println!(
            "  theta  1/8  wt {w:>3}  fidelity {:.12}  passed {}",
            r.fidelity, r.passed
        );
    }
}
