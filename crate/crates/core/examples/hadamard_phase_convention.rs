//! The Hadamard rows and the sign of the optical phase.
//!
//! Composed as printed, HAD(0) gives σx·H·σx, which equals H only after
//! re-phasing basis states on both sides. Flipping the sign of the
//! beamsplitter's optical phase yields H itself.
//!
//! `cargo run --example hadamard_phase_convention`

use momentum_qc::gate::{ideal_gate, verify_sequence, Equivalence};
use momentum_qc::sequence::{builtin_table, expand, expand_macro, parse};

fn main() {
    let table = builtin_table();
    let had = ideal_gate("HAD0").unwrap();

    let printed = expand_macro("HAD0", &table).unwrap();
    let r = verify_sequence("HAD0", &printed, &had, Equivalence::GlobalPhase).unwrap();
    println!("{}", r.summary_line());
    if let Some(t) = &r.two_sided_residual {
        println!(
            "  input phases/pi {:?}\n  output phases/pi {:?}",
            t.right, t.left
        );
    }

    let flipped = parse("W+(1/4, -1/2) . F(1) . W+(1, 0)").unwrap();
    let prims = expand(&flipped, &table).unwrap();
    let r = verify_sequence("HAD0(phi=-pi/2)", &prims, &had, Equivalence::GlobalPhase).unwrap();
    println!("{}", r.summary_line());

    let two = parse(
        "def H = W+(1/4, -1/2) . F(1) . W+(1, 0)
         EX(1,0) . H . EX(1,0) . H",
    )
    .unwrap();
    let prims = expand(&two, &table).unwrap();
    let r = verify_sequence(
        "HAD10(phi=-pi/2)",
        &prims,
        &ideal_gate("HAD10").unwrap(),
        Equivalence::GlobalPhase,
    )
    .unwrap();
    println!("{}", r.summary_line());
}
