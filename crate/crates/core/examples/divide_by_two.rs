//! Right rotation of the lowest three qubits halves even momenta.
//!
//! Ground states 0, 2, 4, 6 go to 0, 1, 2, 3; the odd results are excited,
//! so spontaneous emission afterwards leaves atoms near 0, 2 and 4. Atoms
//! between the ladder rungs are transferred imperfectly.
//!
//! `cargo run --example divide_by_two`

use momentum_qc::cooling::{
    coherent_cooling_step, sample_momentum, spontaneous_emission_collapse, step_populations,
    DecayModel,
};
use momentum_qc::ladder::LadderState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const WINDOW: (i64, i64) = (-16, 23);

fn main() {
    println!("integer momenta, one coherent step:");
    for p in [0.0, 2.0, 4.0, 6.0] {
        let out: Vec<String> = step_populations(WINDOW, p)
            .unwrap()
            .into_iter()
            .filter(|&(_, w)| w > 1e-9)
            .map(|(m, w)| format!("{m} ({w:.6})"))
            .collect();
        println!("  {p} -> {}", out.join(", "));
    }

    println!("\nfractional momenta, largest populations after one step:");
    for p in [0.5, 3.7, 4.3, 6.9] {
        let mut pops = step_populations(WINDOW, p).unwrap();
        pops.sort_by(|a, b| b.1.total_cmp(&a.1));
        let top: Vec<String> = pops
            .iter()
            .take(3)
            .map(|(m, w)| format!("{m:.1} ({w:.3})"))
            .collect();
        println!("  {p} -> {}", top.join(", "));
    }

    println!("\nwith emission, 2000 atoms from each of 0, 2, 4, 6:");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut hist = [0u32; 12];
    for p in [0.0, 2.0, 4.0, 6.0] {
        let s = coherent_cooling_step(&LadderState::ground_at(WINDOW, p).unwrap()).unwrap();
        for _ in 0..2000 {
            let g = spontaneous_emission_collapse(&s, DecayModel::Uniform, &mut rng).unwrap();
            let m = sample_momentum(&g, &mut rng);
            hist[((m + 1.0) * 2.0).floor().clamp(0.0, 11.0) as usize] += 1;
        }
    }
    for (k, n) in hist.iter().enumerate() {
        let lo = k as f64 / 2.0 - 1.0;
        println!(
            "  [{lo:>4.1},{:>4.1})  {}",
            lo + 0.5,
            "#".repeat((*n / 50) as usize)
        );
    }
}
