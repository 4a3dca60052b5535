//! Random projection directions: Gaussian chains with correlation `ρ`, the
//! shuffled sampler, and the ±1-matrix approximation.
//!
//! All randomness comes from ChaCha8 streams keyed by 64-bit seeds; child
//! seeds are derived with [`split`] so a run can name the exact stream of
//! every trial.

mod validate;

pub use validate::{pm1_stretch_tail, validate_isoperimetry, IsoReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed of child stream `i`, derived by SplitMix64 from `master`.
pub fn split(master: u64, i: u64) -> u64 {
    let mut z = master.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fills `out` with independent standard normals by the Box–Muller transform.
pub fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for pair in out.chunks_mut(2) {
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        pair[0] = r * c;
        if let Some(second) = pair.get_mut(1) {
            *second = r * s;
        }
    }
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    fill_gaussian(rng, &mut v);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainKind {
    Correlated,
    Independent,
    ShuffledPrefix,
}

/// Directions `u_1, …, u_r` in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionChain {
    pub d: usize,
    pub rho: f64,
    pub kind: ChainKind,
    pub vectors: Vec<Vec<f64>>,
}

impl DirectionChain {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The chain with every direction negated.
    pub fn negate(&self) -> Self {
        let vectors = self.vectors.iter().map(|u| u.iter().map(|x| -x).collect()).collect();
        DirectionChain { vectors, ..self.clone() }
    }
}

/// `R` directions with `u_1` standard normal and
/// `u_{r+1} = ρ u_r + √(1-ρ²) g_r` for fresh standard normals `g_r`.
pub fn sample_chain<R: Rng + ?Sized>(d: usize, r: usize, rho: f64, rng: &mut R) -> Result<DirectionChain> {
    if d == 0 || r == 0 {
        return Err(Error::Parameter(format!("chain needs d >= 1 and R >= 1, got d = {d}, R = {r}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Parameter(format!("correlation {rho} outside [0, 1]")));
    }
    let fresh = (1.0 - rho * rho).sqrt();
    let mut vectors = vec![gaussian_vector(rng, d)];
    for _ in 1..r {
        let g = gaussian_vector(rng, d);
        let prev = vectors.last().expect("chain is nonempty");
        vectors.push(prev.iter().zip(&g).map(|(u, g)| rho * u + fresh * g).collect());
    }
    let kind = if rho == 0.0 { ChainKind::Independent } else { ChainKind::Correlated };
    Ok(DirectionChain { d, rho, kind, vectors })
}

/// One draw of the shuffled sampler, with the choices that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ShuffledDraw {
    pub chain: DirectionChain,
    /// For each of the `2R` interleaved slots, whether it came from the
    /// correlated list.
    pub from_correlated: Vec<bool>,
    /// Prefix length, uniform on `1..=R`.
    pub prefix: usize,
}

/// Draws `u_1..u_R ~ N^R_ρ` and independent `w_1..w_R`, interleaves the two
/// lists uniformly at random (keeping each list's order), and returns the
/// first `r` elements for `r` uniform on `1..=R`.
pub fn sample_shuffled<R: Rng + ?Sized>(d: usize, r: usize, rho: f64, rng: &mut R) -> Result<ShuffledDraw> {
    let u = sample_chain(d, r, rho, rng)?;
    let w = sample_chain(d, r, 0.0, rng)?;
    let mut slots: Vec<bool> = (0..2 * r).map(|i| i < r).collect();
    for i in (1..slots.len()).rev() {
        let j = rng.random_range(0..=i);
        slots.swap(i, j);
    }
    let prefix = rng.random_range(1..=r);
    let (mut iu, mut iw) = (0, 0);
    let mut vectors = Vec::with_capacity(prefix);
    for &c in &slots[..prefix] {
        if c {
            vectors.push(u.vectors[iu].clone());
            iu += 1;
        } else {
            vectors.push(w.vectors[iw].clone());
            iw += 1;
        }
    }
    Ok(ShuffledDraw {
        chain: DirectionChain { d, rho, kind: ChainKind::ShuffledPrefix, vectors },
        from_correlated: slots,
        prefix,
    })
}

/// A `d × k` matrix of signs whose scaled row sums approximate a Gaussian
/// direction.
#[derive(Clone, Debug, PartialEq)]
pub struct SignMatrixSampler {
    pub d: usize,
    pub k: usize,
    signs: Vec<i8>,
}

impl SignMatrixSampler {
    pub fn new<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::Parameter(format!("sign matrix needs d, k >= 1, got d = {d}, k = {k}")));
        }
        let signs = (0..d * k).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        Ok(SignMatrixSampler { d, k, signs })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// `u = U·1/√k`.
    pub fn direction(&self) -> Vec<f64> {
        let norm = 1.0 / (self.k as f64).sqrt();
        self.signs.chunks(self.k).map(|row| row.iter().map(|&s| f64::from(s)).sum::<f64>() * norm).collect()
    }

    /// Each entry kept with probability `ρ`, otherwise replaced by a fresh sign.
    pub fn correlated<R: Rng + ?Sized>(&self, rho: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Parameter(format!("correlation {rho} outside [0, 1]")));
        }
        let signs = self
            .signs
            .iter()
            .map(|&s| {
                if rng.random_bool(rho) {
                    s
                } else if rng.random_bool(0.5) {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Ok(SignMatrixSampler { d: self.d, k: self.k, signs })
    }
}

/// Default column count `⌈9 log₂ n⌉` for the sign-matrix sampler.
pub fn default_sign_columns(n: usize) -> usize {
    (9.0 * (n.max(2) as f64).log2()).ceil() as usize
}

/// Chain of `R` sign-matrix directions, each a `ρ`-correlated copy of the last.
pub fn sample_pm1_chain<R: Rng + ?Sized>(
    d: usize,
    r: usize,
    rho: f64,
    k: usize,
    rng: &mut R,
) -> Result<DirectionChain> {
    if r == 0 {
        return Err(Error::Parameter("chain needs R >= 1".into()));
    }
    let mut m = SignMatrixSampler::new(d, k, rng)?;
    let mut vectors = vec![m.direction()];
    for _ in 1..r {
        m = m.correlated(rho, rng)?;
        vectors.push(m.direction());
    }
    let kind = if rho == 0.0 { ChainKind::Independent } else { ChainKind::Correlated };
    Ok(DirectionChain { d, rho, kind, vectors })
}
