//! Verify every built-in opcode against its ideal gate.
//!
//! `cargo run --example verify_table`

use momentum_qc::gate::verify_all;
use momentum_qc::sequence::builtin_table;

fn main() {
    let table = builtin_table();
    let reports = verify_all(&table).expect("built-in table expands");
    for r in &reports {
        println!("{}", r.summary_line());
        if let Some(two) = &r.two_sided_residual {
            println!(
                "    equal only after re-phasing inputs {:?} and outputs {:?} (units of pi)",
                two.right, two.left
            );
        }
    }
    let rr3 = reports.iter().find(|r| r.opcode == "RR3").unwrap();
    let c = rr3.pulse_counts;
    println!(
        "RR3: {} primitives, {} pulses of pi/2, {} of pi, {} of 2pi (published: {:?})",
        rr3.primitive_count, c.half_pi, c.pi, c.two_pi, rr3.published_pulse_counts
    );
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} opcodes pass in their class", reports.len());
}
