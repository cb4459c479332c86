//! Write a program in the sequence language, expand it, reuse table macros.
//!
//! `cargo run --example parse_and_expand`

use momentum_qc::sequence::{
    builtin_table, expand, expand_macro, format_primitive, parse_with, ParseOptions,
};

const PROGRAM: &str = "
# swap the two lowest qubits, then flip Q0
def SWAP = EX(1,0)
NOT(0) . SWAP
";

fn main() {
    let table = builtin_table();
    let prog = parse_with(PROGRAM, ParseOptions::default()).expect("program parses");
    println!("canonical form:\n{prog}\n");

    let prims = expand(&prog, &table).expect("macros resolve");
    println!("{} primitives, first applied at the top:", prims.len());
    for p in &prims {
        println!("  {}", format_primitive(p));
    }

    println!("\ntable entries:");
    for name in table.names() {
        let n = expand_macro(name, &table).unwrap().len();
        println!("  {name:<10} {n:>4} primitives");
    }

    match parse_with("W+(1/3,", ParseOptions::default()) {
        Ok(_) => unreachable!(),
        Err(e) => println!("\nmalformed input reports its position: {e}"),
    }
}
