//! The four primitives acting on ladder states, and one as a matrix.
//!
//! `cargo run --example primitives`

use momentum_qc::ladder::LadderState;
use momentum_qc::matrix::{matrix_of, Topology};
use momentum_qc::{Angle, Primitive};
use num_complex::Complex64;

fn show(label: &str, s: &LadderState) {
    let terms: Vec<String> = s
        .populations()
        .filter(|&(_, _, p)| p > 1e-12)
        .map(|(n, p, _)| {
            let a = s.amplitude(n);
            let level = if n % 2 == 0 { 'g' } else { 'e' };
            format!("({:+.3}{:+.3}i)|{level},{p}>", a.re, a.im)
        })
        .collect();
    println!("{label:<28} {}", terms.join(" "));
}

fn main() {
    let window = (-8, 15);
    let q = Angle::pi_frac;
    let g0 = LadderState::new(window, 0.0, &[(0, Complex64::new(1.0, 0.0))]).unwrap();

    show("|g,0>", &g0);
    show(
        "W+(pi/2,0)",
        &g0.apply(&Primitive::up(q(1, 2), Angle::ZERO)).unwrap(),
    );
    show(
        "W-(pi/2,0)",
        &g0.apply(&Primitive::down(q(1, 2), Angle::ZERO)).unwrap(),
    );
    let split = g0.apply(&Primitive::up(q(1, 4), Angle::ZERO)).unwrap();
    show("W+(pi/4,0) beamsplitter", &split);
    show(
        "  then F(pi/2)",
        &split.apply(&Primitive::f(q(1, 2))).unwrap(),
    );
    show(
        "W+(pi,0) = -1",
        &g0.apply(&Primitive::up(Angle::PI, Angle::ZERO)).unwrap(),
    );

    // kinetic phase uses the true momentum n + offset
    let g2 = LadderState::new(window, 0.3, &[(2, Complex64::new(1.0, 0.0))]).unwrap();
    show("|g,2.3>", &g2);
    show("G(pi/4)", &g2.apply(&Primitive::g(q(1, 4))).unwrap());

    let e1 = LadderState::new(window, 0.0, &[(1, Complex64::new(1.0, 0.0))]).unwrap();
    show(
        "FG(pi/4, wt=2) on |e,1>",
        &e1.apply(&Primitive::fg(q(1, 4), 2.into())).unwrap(),
    );

    println!("\nW+(pi/2,0) on the cyclic 8-state space:");
    let m = matrix_of(
        &Primitive::up(q(1, 2), Angle::ZERO),
        Topology::cyclic(8).unwrap(),
    )
    .unwrap();
    for i in 0..8 {
        let row: Vec<String> = (0..8)
            .map(|j| {
                let z = m.get(i, j);
                match (z.re.round() as i32, z.im.round() as i32) {
                    (0, 0) => " . ".into(),
                    (0, 1) => " i ".into(),
                    (0, -1) => "-i ".into(),
                    (r, _) => format!("{r:>2} "),
                }
            })
            .collect();
        println!("  {}", row.concat());
    }
}
