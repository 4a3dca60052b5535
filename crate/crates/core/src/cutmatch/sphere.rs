//! Point sets for the greedy matching players: the scaled hypercube and an
//! approximate `γ`-net on the sphere closed under antipodes.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::directions::{fill_gaussian, rng_from, split};
use crate::embedding::Embedding;
use crate::error::{Error, Result};

/// Growth factor a set must reach for the isoperimetry radius.
pub const ISO_EXPANSION: f64 = 1.0 + 1.0 / 36.0;

/// Rows `{±1/√d}^d`; coordinate `i` of vertex `x` is positive when bit `i`
/// of `x` is set, matching the hypercube generator's labels.
pub fn hypercube_points(d: usize) -> Result<Embedding> {
    if d == 0 || d > 20 {
        return Err(Error::Parameter(format!("hypercube dimension {d} must lie in 1..=20")));
    }
    let n = 1usize << d;
    let a = 1.0 / (d as f64).sqrt();
    let coords = (0..n).flat_map(|x| (0..d).map(move |i| if x >> i & 1 == 1 { a } else { -a })).collect();
    Embedding::new(n, d, coords)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundEmbedding {
    pub points: Embedding,
    /// Minimum separation enforced between points (and their antipodes).
    pub gamma: f64,
    /// `Σ_x v_{x,i}²` for every coordinate `i`.
    pub second_moments: Vec<f64>,
    /// Smallest second moment, the `L` of the potential bound.
    pub l_floor: f64,
    /// Largest squared radius any probed set with `|A| ≤ n/2` needed to grow
    /// by [`ISO_EXPANSION`].
    pub radius_r: f64,
    /// Smallest `|Ball[A; 4/√d]| / |A|` over the probed sets.
    pub vertex_expansion: f64,
    pub samples: usize,
}

impl LowerBoundEmbedding {
    pub fn n(&self) -> usize {
        self.points.n()
    }

    pub fn d(&self) -> usize {
        self.points.d()
    }
}

fn unit_sample<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    loop {
        fill_gaussian(rng, &mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Greedy `γ`-separated set on `S^{d-1}` grown from uniform samples, each
/// accepted point added with its antipode, so `Σ v = 0`. Sampling stops once
/// `4n + 1000` consecutive samples are rejected; running out of
/// `max_samples` first is a construction error.
pub fn sphere_point_set(d: usize, gamma: f64, max_samples: usize, seed: u64) -> Result<LowerBoundEmbedding> {
    let (pts, samples) = grow_net(d, gamma, max_samples, usize::MAX, seed)?.expect("no point cap");
    measure(d, gamma, pts, samples, seed)
}

/// Builds nets at geometrically bisected separations and returns the one
/// whose size is nearest `target`.
pub fn sphere_point_set_near(d: usize, target: usize, seed: u64) -> Result<LowerBoundEmbedding> {
    let (mut lo, mut hi) = (0.01f64, 1.9f64);
    let mut best: Option<(f64, Vec<Vec<f64>>, usize, u64)> = None;
    for k in 0..24 {
        let gamma = (lo * hi).sqrt();
        let round_seed = split(seed, k);
        let Some((pts, samples)) = grow_net(d, gamma, 4_000_000, 2 * target, round_seed)? else {
            lo = gamma;
            continue;
        };
        let n = pts.len();
        if n > target {
            lo = gamma;
        } else {
            hi = gamma;
        }
        let done = n.abs_diff(target) * 20 <= target;
        if best.as_ref().is_none_or(|b| n.abs_diff(target) < b.1.len().abs_diff(target)) {
            best = Some((gamma, pts, samples, round_seed));
        }
        if done {
            break;
        }
    }
    let (gamma, pts, samples, round_seed) = best.ok_or_else(|| Error::Construction("no point set was built".into()))?;
    measure(d, gamma, pts, samples, round_seed)
}

/// Grows the net, giving up with `None` once it exceeds `max_points`.
fn grow_net(
    d: usize,
    gamma: f64,
    max_samples: usize,
    max_points: usize,
    seed: u64,
) -> Result<Option<(Vec<Vec<f64>>, usize)>> {
    if d < 2 {
        return Err(Error::Parameter(format!("sphere dimension {d} must be at least 2")));
    }
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Parameter(format!("separation {gamma} must lie in (0, 2)")));
    }
    let mut rng = rng_from(split(seed, 0));
    let g2 = gamma * gamma;
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut rejected = 0usize;
    let mut samples = 0usize;
    while rejected < 4 * pts.len() + 1000 {
        if pts.len() > max_points {
            return Ok(None);
        }
        if samples >= max_samples {
            let cover = covering_radius(&pts, d, &mut rng_from(split(seed, 1)));
            return Err(Error::Construction(format!(
                "{max_samples} samples ran out before the {gamma}-net saturated; {} points, covering radius {cover:.4}",
                pts.len()
            )));
        }
        samples += 1;
        let v = unit_sample(&mut rng, d);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        if sq(&v, &neg) >= g2 && pts.iter().all(|p| sq(p, &v) >= g2 && sq(p, &neg) >= g2) {
            pts.push(v);
            pts.push(neg);
            rejected = 0;
        } else {
            rejected += 1;
        }
    }
    Ok(Some((pts, samples)))
}

fn measure(d: usize, gamma: f64, pts: Vec<Vec<f64>>, samples: usize, seed: u64) -> Result<LowerBoundEmbedding> {
    let n = pts.len();
    let points = Embedding::new(n, d, pts.concat())?;
    let second_moments: Vec<f64> = (0..d).map(|i| points.column(i).iter().map(|x| x * x).sum()).collect();
    let l_floor = second_moments.iter().copied().fold(f64::INFINITY, f64::min);
    let (radius_r, vertex_expansion) = isoperimetry(&points, &mut rng_from(split(seed, 2)));
    Ok(LowerBoundEmbedding { points, gamma, second_moments, l_floor, radius_r, vertex_expansion, samples })
}

fn covering_radius(pts: &[Vec<f64>], d: usize, rng: &mut impl Rng) -> f64 {
    if pts.is_empty() {
        return 2.0;
    }
    (0..1000)
        .map(|_| {
            let v = unit_sample(rng, d);
            pts.iter().map(|p| sq(p, &v)).fold(f64::INFINITY, f64::min).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Probes caps (prefixes along random directions) and random subsets of
/// size at most `n/2`. Returns the largest squared radius needed to grow a
/// set by [`ISO_EXPANSION`], and the smallest growth at radius `4/√d`.
fn isoperimetry(v: &Embedding, rng: &mut impl Rng) -> (f64, f64) {
    let n = v.n();
    let half = n / 2;
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for _ in 0..16 {
        let u = unit_sample(rng, v.d());
        let proj = v.project(&u);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| proj[b].total_cmp(&proj[a]).then(a.cmp(&b)));
        let mut k = 1;
        while k <= half {
            sets.push(order[..k].to_vec());
            k *= 2;
        }
        sets.push(order[..half].to_vec());
    }
    let mut ids: Vec<usize> = (0..n).collect();
    for _ in 0..32 {
        ids.shuffle(rng);
        let k = rng.random_range(1..=half.max(1));
        sets.push(ids[..k].to_vec());
    }
    let probe = 16.0 / v.d() as f64;
    let mut r: f64 = 0.0;
    let mut growth = f64::INFINITY;
    for a in sets.iter().filter(|a| !a.is_empty()) {
        let mut inside = vec![false; n];
        a.iter().for_each(|&x| inside[x] = true);
        let mut dist: Vec<f64> = (0..n)
            .filter(|&y| !inside[y])
            .map(|y| a.iter().map(|&x| v.sq_dist(x, y)).fold(f64::INFINITY, f64::min))
            .collect();
        dist.sort_by(f64::total_cmp);
        let extra = ((ISO_EXPANSION * a.len() as f64).ceil() as usize).saturating_sub(a.len()).max(1);
        if let Some(&need) = dist.get(extra - 1) {
            r = r.max(need);
        }
        let reached = dist.iter().filter(|&&x| x <= probe).count();
        growth = growth.min((a.len() + reached) as f64 / a.len() as f64);
    }
    (r, growth)
}
