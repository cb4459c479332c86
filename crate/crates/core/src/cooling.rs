//! Monte Carlo of coherent cooling: repeated right-rotation of the lowest
//! three qubits, each followed by spontaneous emission.
//!
//! Every atom starts in a pure ground state at a real momentum drawn from a
//! flat span. One cycle is the RR3 pulse sequence applied with the atom's
//! true momenta in every kinetic phase, then one collapse of the electronic
//! state. Excited atoms emit a photon whose recoil scrambles their momentum;
//! ground atoms keep their coherences. After each cycle one momentum is
//! sampled per atom for the histogram, as in a time-of-flight image of many
//! independent atoms, while the atom itself continues unmeasured.

use std::sync::OnceLock;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ladder::{
    is_excited, LadderError, LadderState, Primitive, BOUNDARY_BAND, DEFAULT_LEAKAGE_TOLERANCE,
};
use crate::sequence::{builtin_table, expand_macro, DEFAULT_OMEGA_TAU};

/// Angular distribution of the emitted photon, projected on the ladder axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// Recoil `u ~ U[−1, 1]`.
    #[default]
    Uniform,
    /// Recoil density `(3/8)(1 + u²)` on `[−1, 1]`.
    Dipole,
}

impl DecayModel {
    pub fn sample_recoil<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            DecayModel::Uniform => rng.gen_range(-1.0..=1.0),
            DecayModel::Dipole => loop {
                // envelope 3/4 on [−1, 1]
                let u: f64 = rng.gen_range(-1.0..=1.0);
                if rng.gen::<f64>() * 2.0 <= 1.0 + u * u {
                    break u;
                }
            },
        }
    }

    /// Recoil density at `u`.
    pub fn density(self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        match self {
            DecayModel::Uniform => 0.5,
            DecayModel::Dipole => 0.375 * (1.0 + u * u),
        }
    }
}

impl std::str::FromStr for DecayModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(DecayModel::Uniform),
            "dipole" => Ok(DecayModel::Dipole),
            other => Err(format!(
                "unknown decay model `{other}` (expected uniform or dipole)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub atom_count: usize,
    pub cycles: usize,
    pub seed: u64,
    /// `[lo, hi)` in ħk; `lo == hi` puts every atom at `lo`.
    pub initial_span: (f64, f64),
    pub decay_model: DecayModel,
    /// Ladder index window `(n_min, n_max)`.
    pub window: (i64, i64),
    pub bin_width: f64,
    /// Echoed for reproducibility. The cooling sequence contains no combined
    /// free evolution, so it does not change results.
    pub omega_tau: Rational64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            atom_count: 10_000,
            cycles: 8,
            seed: 42,
            initial_span: (0.0, 8.0),
            decay_model: DecayModel::Uniform,
            window: (-48, 55),
            bin_width: 0.125,
            omega_tau: DEFAULT_OMEGA_TAU,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoolingError {
    #[error("atom_count must be positive")]
    NoAtoms,
    #[error("initial span must be finite with lo <= hi (got {0}..{1})")]
    BadSpan(f64, f64),
    #[error("bin width must be positive and finite (got {0})")]
    BadBinWidth(f64),
    #[error("initial span {span:?} does not fit inside window {window:?} with a boundary margin")]
    SpanOutsideWindow {
        span: (f64, f64),
        window: (i64, i64),
    },
    #[error("atom {atom}, cycle {cycle}: {source}")]
    Ladder {
        atom: usize,
        cycle: usize,
        #[source]
        source: LadderError,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), CoolingError> {
        let (lo, hi) = self.initial_span;
        if self.atom_count == 0 {
            return Err(CoolingError::NoAtoms);
        }
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(CoolingError::BadSpan(lo, hi));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(CoolingError::BadBinWidth(self.bin_width));
        }
        let (n_min, n_max) = self.window;
        let margin = BOUNDARY_BAND as f64 + 1.0;
        if n_max < n_min || lo < n_min as f64 + margin || hi > n_max as f64 - margin {
            return Err(CoolingError::SpanOutsideWindow {
                span: self.initial_span,
                window: self.window,
            });
        }
        Ok(())
    }

    /// Histogram grid: edges at `lo + k·w`, covering every momentum the
    /// window can hold.
    fn grid(&self) -> BinGrid {
        let (lo, _) = self.initial_span;
        let w = self.bin_width;
        let p_min = self.window.0 as f64 - 1.0;
        let p_max = self.window.1 as f64 + 1.0;
        let first = ((p_min - lo) / w).floor() as i64;
        let last = ((p_max - lo) / w).ceil() as i64;
        BinGrid {
            origin: lo,
            width: w,
            first,
            count: (last - first) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BinGrid {
    origin: f64,
    width: f64,
    first: i64,
    count: usize,
}

impl BinGrid {
    fn index(&self, p: f64) -> usize {
        let k = ((p - self.origin) / self.width).floor() as i64 - self.first;
        k.clamp(0, self.count as i64 - 1) as usize
    }

    fn center(&self, i: usize) -> f64 {
        self.origin + ((self.first + i as i64) as f64 + 0.5) * self.width
    }

    fn lower_edge(&self, i: usize) -> f64 {
        self.origin + (self.first + i as i64) as f64 * self.width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub mean: f64,
    pub std: f64,
    pub iqr: f64,
    /// Standard error of `std` for `samples` independent draws (0 if unknown).
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleHistogram {
    pub cycle: usize,
    /// `(bin_center, probability density)`; every bin of the grid, including empty ones.
    pub histogram: Vec<(f64, f64)>,
    pub bin_width: f64,
    /// Number of atoms behind the histogram; 0 for the analytic initial density.
    pub samples: usize,
    pub summary: DistributionStats,
}

impl CycleHistogram {
    fn new(cycle: usize, histogram: Vec<(f64, f64)>, bin_width: f64, samples: usize) -> Self {
        let mut h = CycleHistogram {
            cycle,
            histogram,
            bin_width,
            samples,
            summary: DistributionStats {
                mean: 0.0,
                std: 0.0,
                iqr: 0.0,
                std_error: 0.0,
            },
        };
        h.summary = distribution_stats(&h);
        h
    }

    /// `Σ density · width`.
    pub fn total_probability(&self) -> f64 {
        self.histogram.iter().map(|(_, d)| d * self.bin_width).sum()
    }
}

/// Moments of the histogram with each bin's mass at its centre; the
/// interquartile range interpolates linearly within bins.
pub fn distribution_stats(h: &CycleHistogram) -> DistributionStats {
    let w = h.bin_width;
    let mass: Vec<(f64, f64)> = h
        .histogram
        .iter()
        .map(|&(c, d)| (c, d * w))
        .filter(|&(_, m)| m > 0.0)
        .collect();
    let total: f64 = mass.iter().map(|(_, m)| m).sum();
    if total <= 0.0 {
        return DistributionStats {
            mean: f64::NAN,
            std: f64::NAN,
            iqr: f64::NAN,
            std_error: f64::NAN,
        };
    }
    let mean = mass.iter().map(|(c, m)| c * m).sum::<f64>() / total;
    let central = |k: i32| {
        mass.iter()
            .map(|(c, m)| (c - mean).powi(k) * m)
            .sum::<f64>()
            / total
    };
    let var = central(2);
    let m4 = central(4);
    let std = var.sqrt();

    let quantile = |q: f64| {
        let target = q * total;
        let mut acc = 0.0;
        for &(c, m) in &mass {
            if acc + m >= target {
                let lo = c - w / 2.0;
                return lo + w * ((target - acc) / m).clamp(0.0, 1.0);
            }
            acc += m;
        }
        mass.last().map_or(f64::NAN, |(c, _)| c + w / 2.0)
    };
    let iqr = if mass.len() == 1 {
        0.0
    } else {
        quantile(0.75) - quantile(0.25)
    };

    let std_error = if h.samples > 0 && std > 0.0 {
        ((m4 - var * var).max(0.0) / (4.0 * var * h.samples as f64)).sqrt()
    } else {
        0.0
    };
    DistributionStats {
        mean,
        std,
        iqr,
        std_error,
    }
}

/// Same statistics with momenta wrapped into `[c − period/2, c + period/2)`,
/// `c` the mean of the unwrapped histogram's dominant period. Diagnostic
/// only: it is what a readout that cannot tell apart momenta differing by a
/// multiple of `period` would see.
pub fn wrapped_stats(h: &CycleHistogram, period: f64) -> DistributionStats {
    let wrap = |p: f64| p - period * (p / period).round();
    let mut bins: std::collections::BTreeMap<i64, f64> = Default::default();
    for &(c, d) in &h.histogram {
        if d > 0.0 {
            let k = (wrap(c) / h.bin_width).floor() as i64;
            *bins.entry(k).or_default() += d;
        }
    }
    let histogram = bins
        .into_iter()
        .map(|(k, d)| ((k as f64 + 0.5) * h.bin_width, d))
        .collect();
    let wrapped = CycleHistogram {
        cycle: h.cycle,
        histogram,
        bin_width: h.bin_width,
        samples: h.samples,
        summary: h.summary,
    };
    distribution_stats(&wrapped)
}

fn rr3_sequence() -> &'static [Primitive] {
    static RR3: OnceLock<Vec<Primitive>> = OnceLock::new();
    RR3.get_or_init(|| expand_macro("RR3", &builtin_table()).expect("RR3 expands"))
}

/// Applies the RR3 pulse sequence on the state's own window.
pub fn coherent_cooling_step(s: &LadderState) -> Result<LadderState, LadderError> {
    s.apply_all(rr3_sequence())
}

fn sample_index<R: Rng + ?Sized>(
    s: &LadderState,
    excited: Option<bool>,
    rng: &mut R,
) -> Option<i64> {
    let weights: Vec<(i64, f64)> = s
        .populations()
        .filter(|&(n, _, _)| excited.is_none_or(|e| is_excited(n) == e))
        .map(|(n, _, p)| (n, p))
        .collect();
    let total: f64 = weights.iter().map(|(_, p)| p).sum();
    if total <= 0.0 {
        return None;
    }
    let mut r = rng.gen::<f64>() * total;
    for &(n, p) in &weights {
        if r < p {
            return Some(n);
        }
        r -= p;
    }
    weights
        .iter()
        .rev()
        .find(|(_, p)| *p > 0.0)
        .map(|(n, _)| *n)
}

/// Samples the momentum a projective measurement of `s` would return.
pub fn sample_momentum<R: Rng + ?Sized>(s: &LadderState, rng: &mut R) -> f64 {
    let n = sample_index(s, None, rng).expect("normalized state has support");
    s.momentum(n)
}

/// Measures the electronic state. An excited atom emits once and ends
/// pure ground at `p + u`; a ground atom keeps its ground superposition.
pub fn spontaneous_emission_collapse<R: Rng + ?Sized>(
    s: &LadderState,
    model: DecayModel,
    rng: &mut R,
) -> Result<LadderState, LadderError> {
    let pe = s.excited_population();
    if pe <= 0.0 {
        return Ok(s.clone());
    }
    if rng.gen::<f64>() < pe {
        let n = sample_index(s, Some(true), rng).expect("excited population is positive");
        let p = s.momentum(n) + model.sample_recoil(rng);
        LadderState::ground_at(s.window(), p)
            .map(|g| g.with_leakage_tolerance(s.leakage_tolerance()))
    } else {
        s.project_manifold(false)
    }
}

/// Initial flat density on the grid; a degenerate span is one full bin.
fn initial_histogram(cfg: &EnsembleConfig, grid: &BinGrid) -> Vec<f64> {
    let (lo, hi) = cfg.initial_span;
    let mut density = vec![0.0; grid.count];
    if hi == lo {
        density[grid.index(lo)] = 1.0 / grid.width;
        return density;
    }
    for (i, d) in density.iter_mut().enumerate() {
        let a = grid.lower_edge(i).max(lo);
        let b = (grid.lower_edge(i) + grid.width).min(hi);
        if b > a {
            *d = (b - a) / (hi - lo) / grid.width;
        }
    }
    density
}

fn atom_rng(seed: u64, atom: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(atom as u64);
    rng
}

/// Measured momentum after each cycle for one atom.
fn run_atom(cfg: &EnsembleConfig, atom: usize) -> Result<Vec<f64>, CoolingError> {
    let mut rng = atom_rng(cfg.seed, atom);
    let (lo, hi) = cfg.initial_span;
    let p0 = if hi > lo { rng.gen_range(lo..hi) } else { lo };
    let wrap = |cycle: usize| {
        move |source| CoolingError::Ladder {
            atom,
            cycle,
            source,
        }
    };
    let mut state = LadderState::ground_at(cfg.window, p0)
        .map_err(wrap(0))?
        .with_leakage_tolerance(DEFAULT_LEAKAGE_TOLERANCE);
    let mut measured = Vec::with_capacity(cfg.cycles);
    for cycle in 1..=cfg.cycles {
        state = coherent_cooling_step(&state).map_err(wrap(cycle))?;
        state = spontaneous_emission_collapse(&state, cfg.decay_model, &mut rng)
            .map_err(wrap(cycle))?;
        measured.push(sample_momentum(&state, &mut rng));
    }
    Ok(measured)
}

/// Runs the ensemble on the global rayon pool. Returns `cycles + 1`
/// histograms, the first being the initial density.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<Vec<CycleHistogram>, CoolingError> {
    cfg.validate()?;
    let grid = cfg.grid();
    let per_atom: Vec<Vec<f64>> = (0..cfg.atom_count)
        .into_par_iter()
        .map(|atom| run_atom(cfg, atom))
        .collect::<Result<_, _>>()?;

    let centers: Vec<f64> = (0..grid.count).map(|i| grid.center(i)).collect();
    let mut out = Vec::with_capacity(cfg.cycles + 1);
    let flat = initial_histogram(cfg, &grid);
    out.push(CycleHistogram::new(
        0,
        centers.iter().copied().zip(flat).collect(),
        grid.width,
        0,
    ));
    for cycle in 1..=cfg.cycles {
        let mut counts = vec![0u64; grid.count];
        for samples in &per_atom {
            counts[grid.index(samples[cycle - 1])] += 1;
        }
        let norm = cfg.atom_count as f64 * grid.width;
        let hist = centers
            .iter()
            .zip(&counts)
            .map(|(&c, &k)| (c, k as f64 / norm))
            .collect();
        out.push(CycleHistogram::new(cycle, hist, grid.width, cfg.atom_count));
    }
    Ok(out)
}

/// [`run_ensemble`] on a dedicated pool of `threads` workers.
pub fn run_ensemble_with_threads(
    cfg: &EnsembleConfig,
    threads: usize,
) -> Result<Vec<CycleHistogram>, CoolingError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CoolingError::ThreadPool(e.to_string()))?;
    pool.install(|| run_ensemble(cfg))
}

/// Populations after one coherent step for a pure ground state at `p`.
pub fn step_populations(window: (i64, i64), p: f64) -> Result<Vec<(f64, f64)>, LadderError> {
    let s = coherent_cooling_step(&LadderState::ground_at(window, p)?)?;
    Ok(s.populations()
        .filter(|&(_, _, w)| w > 1e-15)
        .map(|(_, m, w)| (m, w))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Topology, UnitaryMatrix};
    use num_complex::Complex64;

    const W: (i64, i64) = (-16, 23);

    fn hist(points: &[(f64, f64)], w: f64) -> CycleHistogram {
        CycleHistogram::new(0, points.to_vec(), w, 0)
    }

    #[test]
    fn integer_ground_states_divide_by_two() {
        for (from, to) in [(0, 0), (2, 1), (4, 2), (6, 3)] {
            let s =
                coherent_cooling_step(&LadderState::ground_at(W, from as f64).unwrap()).unwrap();
            let p = s.amplitude(to).norm_sqr();
            assert!((p - 1.0).abs() < 1e-9, "{from} -> {to}: {p}");
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fractional_step_matches_matrix_oracle() {
        let s0 = LadderState::ground_at(W, 3.7).unwrap();
        let s1 = coherent_cooling_step(&s0).unwrap();
        let topo = Topology::open(W, s0.offset()).unwrap();
        let u = UnitaryMatrix::of_sequence(rr3_sequence(), topo).unwrap();
        let s2 = u.apply(&s0).unwrap();
        for n in W.0..=W.1 {
            assert!((s1.amplitude(n) - s2.amplitude(n)).norm() < 1e-10);
        }
        // imperfect for non-integer momenta
        let best = s1.populations().map(|(_, _, p)| p).fold(0.0, f64::max);
        assert!(best < 1.0 - 1e-3);
    }

    #[test]
    fn ground_state_unchanged_by_emission() {
        let s = LadderState::ground_at(W, 2.3).unwrap();
        let mut rng = atom_rng(1, 0);
        assert_eq!(
            spontaneous_emission_collapse(&s, DecayModel::Uniform, &mut rng).unwrap(),
            s
        );
    }

    #[test]
    fn excited_state_emits_with_recoil() {
        let s = LadderState::new(W, 0.0, &[(1, Complex64::new(1.0, 0.0))]).unwrap();
        let mut rng = atom_rng(7, 3);
        let mut bins = [0u32; 4];
        let n = 40_000;
        for _ in 0..n {
            let g = spontaneous_emission_collapse(&s, DecayModel::Uniform, &mut rng).unwrap();
            assert_eq!(g.excited_population(), 0.0);
            let p = sample_momentum(&g, &mut rng);
            let u = p - 1.0;
            assert!((-1.0..=1.0).contains(&u));
            bins[(((u + 1.0) / 0.5) as usize).min(3)] += 1;
        }
        for b in bins {
            assert!((b as f64 / n as f64 - 0.25).abs() < 0.01, "{bins:?}");
        }
    }

    #[test]
    fn dipole_recoil_density() {
        let mut rng = atom_rng(11, 0);
        let n = 100_000;
        let mut edge = 0;
        for _ in 0..n {
            let u = DecayModel::Dipole.sample_recoil(&mut rng);
            assert!((-1.0..=1.0).contains(&u));
            if u.abs() > 0.5 {
                edge += 1;
            }
        }
        // ∫_{1/2}^{1} (3/4)(1+u²) du = 3/8 + 7/32
        let expected = 0.375 + 7.0 / 32.0;
        assert!((edge as f64 / n as f64 - expected).abs() < 0.01);
    }

    #[test]
    fn stats_examples() {
        let s = distribution_stats(&hist(&[(3.0, 1.0)], 1.0));
        assert_eq!((s.std, s.iqr), (0.0, 0.0));

        let w = 0.125;
        let uniform: Vec<(f64, f64)> = (0..64).map(|k| ((k as f64 + 0.5) * w, 1.0 / 8.0)).collect();
        let s = distribution_stats(&hist(&uniform, w));
        assert!((s.mean - 4.0).abs() < 1e-12);
        assert!((s.std - 8.0 / 12f64.sqrt()).abs() < w * w);
        assert!((s.iqr - 4.0).abs() < 1e-12);

        let three = hist(&[(0.0, 1.0 / 3.0), (2.0, 1.0 / 3.0), (4.0, 1.0 / 3.0)], 1.0);
        let s = distribution_stats(&three);
        assert!((s.mean - 2.0).abs() < 1e-12);
        assert!((s.std - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wrapped_stats_fold_periods() {
        let h = hist(&[(-8.0, 0.25), (0.0, 0.5), (8.0, 0.25)], 1.0);
        assert!(distribution_stats(&h).std > 5.0);
        assert!(wrapped_stats(&h, 8.0).std < 1e-12);
    }

    #[test]
    fn config_validation() {
        let ok = EnsembleConfig::default();
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut EnsembleConfig)| {
            let mut c = EnsembleConfig::default();
            f(&mut c);
            c.validate().unwrap_err()
        };
        assert_eq!(bad(|c| c.atom_count = 0), CoolingError::NoAtoms);
        assert!(matches!(
            bad(|c| c.initial_span = (1.0, 0.0)),
            CoolingError::BadSpan(..)
        ));
        assert!(matches!(
            bad(|c| c.initial_span = (0.0, f64::INFINITY)),
            CoolingError::BadSpan(..)
        ));
        assert!(matches!(
            bad(|c| c.bin_width = 0.0),
            CoolingError::BadBinWidth(_)
        ));
        assert!(matches!(
            bad(|c| c.window = (0, 8)),
            CoolingError::SpanOutsideWindow { .. }
        ));
    }

    #[test]
    fn zero_cycles_is_flat() {
        let cfg = EnsembleConfig {
            atom_count: 1,
            cycles: 0,
            ..Default::default()
        };
        let h = run_ensemble(&cfg).unwrap();
        assert_eq!(h.len(), 1);
        for &(c, d) in &h[0].histogram {
            let expected = if (0.0..8.0).contains(&c) { 0.125 } else { 0.0 };
            assert!((d - expected).abs() < 1e-12, "{c} {d}");
        }
        assert!((h[0].total_probability() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_integer_atom_lands_on_two() {
        let cfg = EnsembleConfig {
            atom_count: 1,
            cycles: 1,
            initial_span: (4.0, 4.0),
            ..Default::default()
        };
        let h = run_ensemble(&cfg).unwrap();
        let (c, d) = h[1]
            .histogram
            .iter()
            .copied()
            .find(|&(_, d)| d > 0.0)
            .unwrap();
        assert!((c - 2.0).abs() <= cfg.bin_width);
        assert!((d * cfg.bin_width - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_across_threads() {
        let cfg = EnsembleConfig {
            atom_count: 64,
            cycles: 2,
            ..Default::default()
        };
        let a = run_ensemble_with_threads(&cfg, 1).unwrap();
        let b = run_ensemble_with_threads(&cfg, 4).unwrap();
        assert_eq!(a, b);
        for h in &a {
            assert!((h.total_probability() - 1.0).abs() < 1e-9);
        }
    }
}
