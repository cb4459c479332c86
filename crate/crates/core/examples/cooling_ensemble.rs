//! Ensemble cooling run: 10⁴ atoms, flat over [0, 8) ħk, 8 cycles.
//!
//! `cargo run --release --example cooling_ensemble [atoms] [seed]`

use std::time::Instant;

use momentum_qc::cooling::{run_ensemble, wrapped_stats, EnsembleConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let mut cfg = EnsembleConfig::default();
    if let Some(n) = args.next() {
        cfg.atom_count = n.parse().expect("atom count");
    }
    if let Some(s) = args.next() {
        cfg.seed = s.parse().expect("seed");
    }
    if let Ok(w) = std::env::var("WINDOW") {
        let (a, b) = w.split_once(':').expect("WINDOW=lo:hi");
        cfg.window = (a.parse().unwrap(), b.parse().unwrap());
    }
    let start = Instant::now();
    let hists = run_ensemble(&cfg).expect("ensemble runs");
    println!(
        "{} atoms, {} cycles, {:.1?}",
        cfg.atom_count,
        cfg.cycles,
        start.elapsed()
    );
    println!("cycle    mean     std  (se)      iqr   std mod 8");
    for h in &hists {
        let s = h.summary;
        let w = wrapped_stats(h, 8.0);
        println!(
            "{:>5} {:>7.3} {:>7.3} ({:.3}) {:>7.3} {:>7.3}",
            h.cycle, s.mean, s.std, s.std_error, s.iqr, w.std
        );
    }
}
