//! Named configurations shared by the CLI and the tests.

use std::str::FromStr;

use crate::region::{AuxiliarySystem, MarkovChain};
use crate::simulator::SimConfig;
use crate::{DistortionFn, Error, JointSource, Kernel, Result};

/// Crossover probability of the Körner-Marton example.
pub const KM_CROSSOVER: f64 = 0.11;

/// Block lengths of the n-sweep.
pub const SWEEP_BLOCKLENGTHS: [usize; 4] = [50, 100, 200, 400];

/// Rate-slack unit of the n-sweep: codebook exponents get 1.5 units, bin
/// exponents 3 units, so each rate sits 3 units or more inside the region.
pub const SWEEP_RATE_UNIT: f64 = 0.0075;

/// Typicality slack of the n-sweep.
pub const SWEEP_EPSILON: f64 = 0.25;

/// Trials per block length in the n-sweep.
pub const SWEEP_TRIALS: usize = 1000;

/// Codebook redraws per block length in the n-sweep.
pub const SWEEP_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Binary symmetric pair, decoder wants `X xor Y` losslessly.
    KornerMarton,
    /// `Y - X - Z` with `Z = X` on the Körner-Marton source.
    MarkovCopy,
    /// Simulation of `X = Y` uniform binary with `V = X`, `Z = V`.
    LosslessIdentical,
    /// Simulation at several block lengths, strictly inside the inner region.
    NSweep,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::KornerMarton, Preset::MarkovCopy, Preset::LosslessIdentical, Preset::NSweep];

    pub fn name(self) -> &'static str {
        match self {
            Preset::KornerMarton => "korner-marton",
            Preset::MarkovCopy => "markov-copy",
            Preset::LosslessIdentical => "lossless-identical",
            Preset::NSweep => "n-sweep",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Validation(format!("unknown preset {s:?}, expected one of {}", names.join(", ")))
            })
    }
}

/// Doubly symmetric binary source with crossover `p`.
pub fn doubly_symmetric(p: f64) -> Result<JointSource> {
    JointSource::from_rows(&[vec![(1.0 - p) / 2.0, p / 2.0], vec![p / 2.0, (1.0 - p) / 2.0]])
}

/// Hamming distortion against `X xor Y` on binary alphabets.
pub fn xor_hamming() -> DistortionFn {
    DistortionFn::hamming_to(2, 2, 2, |x, y| x ^ y).expect("binary table is valid")
}

pub fn korner_marton() -> (JointSource, DistortionFn) {
    (doubly_symmetric(KM_CROSSOVER).expect("valid crossover"), xor_hamming())
}

/// Chain, source and `p(z|x)` of the Markov preset.
pub fn markov_copy() -> (MarkovChain, JointSource, Kernel) {
    let source = doubly_symmetric(KM_CROSSOVER).expect("valid crossover");
    (MarkovChain::YXZ, source, Kernel::deterministic(2, 2, |x| x).expect("identity kernel"))
}

/// `X = Y` uniform binary with Hamming distortion against `X`.
pub fn identical_binary() -> (JointSource, DistortionFn) {
    let source = JointSource::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).expect("valid pmf");
    (source, DistortionFn::hamming_to(2, 2, 2, |x, _| x).expect("binary table is valid"))
}

/// `U` trivial, `V = X`, `Z = V`.
pub fn lossless_identical_aux() -> AuxiliarySystem {
    AuxiliarySystem::from_fns(
        2,
        2,
        (1, 2, 2),
        |x, _, v| if v == x { 1.0 } else { 0.0 },
        |_, _, v, z| if z == v { 1.0 } else { 0.0 },
    )
    .expect("valid kernels")
}

/// Lossless `X = Y` simulation: n = 200, epsilon = 0.15, 1000 trials, target 0.05.
pub fn lossless_identical_sim(seed: u64) -> SimConfig {
    let (source, dist) = identical_binary();
    SimConfig::new(200, 0.15, source, dist, lossless_identical_aux(), 1000, seed).with_d_target(0.05)
}

/// Source, distortion and auxiliary system of the n-sweep.
///
/// `(X, Y)` is doubly symmetric with crossover 0.25, `U` is trivial, `V` is
/// `X` through a binary symmetric channel with crossover 0.45 and `Z` is `V`
/// through one with crossover 0.45, so every mutual information is small.
pub fn sweep_system() -> (JointSource, DistortionFn, AuxiliarySystem) {
    let source = doubly_symmetric(0.25).expect("valid crossover");
    let bsc = |a: usize, b: usize| if a == b { 0.55 } else { 0.45 };
    let aux = AuxiliarySystem::from_fns(2, 2, (1, 2, 2), |x, _, v| bsc(x, v), |_, _, v, z| bsc(v, z))
        .expect("valid kernels");
    (source, xor_hamming(), aux)
}

/// One point of the n-sweep.
pub fn sweep_sim(n: usize, seed: u64) -> SimConfig {
    let (source, dist, aux) = sweep_system();
    let d = crate::region::evaluate_inner_point(&source, &dist, &aux).expect("consistent preset").d;
    SimConfig::new(n, SWEEP_EPSILON, source, dist, aux, SWEEP_TRIALS, seed)
        .with_slacks(1.5 * SWEEP_RATE_UNIT, 3.0 * SWEEP_RATE_UNIT)
        .with_batches(SWEEP_BATCHES)
        .with_d_target(d + 3.0 * SWEEP_RATE_UNIT)
}
