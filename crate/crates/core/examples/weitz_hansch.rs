//! Interferometric-cooling sequence: its excitation depends on momentum.
//!
//! Durations are in units of πτ, so a segment of duration T has kinetic
//! angle T·π. Atoms whose momentum makes the two interferometer arms
//! rephase are excited; others stay in the ground level.
//!
//! `cargo run --example weitz_hansch [T] [T']`

use momentum_qc::angle::parse_ratio;
use momentum_qc::ladder::LadderState;
use momentum_qc::sequence::{format_primitive, weitz_hansch};
use num_rational::Rational64;

fn main() {
    let mut args = std::env::args().skip(1);
    let t = args
        .next()
        .map_or(Rational64::new(1, 10), |s| parse_ratio(&s).expect("T"));
    let t_prime = args
        .next()
        .map_or(Rational64::new(1, 20), |s| parse_ratio(&s).expect("T'"));
    let prims = weitz_hansch(t, t_prime, 1.into()).expect("valid durations");
    let listing: Vec<String> = prims.iter().map(format_primitive).collect();
    println!(
        "T = {t}, T' = {t_prime}; applied in order:\n  {}",
        listing.join("\n  ")
    );

    println!("\n    p   excited");
    for i in -16..=16 {
        let p = i as f64 / 4.0;
        let s = LadderState::ground_at((-12, 13), p)
            .unwrap()
            .apply_all(&prims)
            .unwrap();
        let pe = s.excited_population();
        println!(
            "{p:>5.2}   {pe:.4}  {}",
            "#".repeat((pe * 40.0).round() as usize)
        );
    }
}
