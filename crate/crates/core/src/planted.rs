//! Synthetic instances with a known optimum.
//!
//! `k` planted centers are placed pairwise more than `separation · r` apart,
//! with exactly `k_l` of them in group `l`. Every other point lies within `r` of
//! one planted center and inherits its group. Each cluster that gets any extra
//! point gets one at distance exactly `r`; a cluster with two or more extras
//! also gets the antipode of that point, `2c - p`.
//!
//! With separation at least 4, points of different clusters are at least `2r`
//! apart, so a center covering a point within less than `r` comes from the
//! same cluster. A cluster holding an antipodal pair then needs two such
//! centers, and a cluster `{c, p}` with `d(c, p) = r` can do no better than
//! `r` with one. Every cluster needs a center of its own, so with only `k`
//! centers the optimum is exactly `r` whenever `n > k`, and the planted centers
//! attain it.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::metric::{CenterSet, Dataset, Euclidean, FairnessSpec, Metric, Point};

/// Center placement attempts per center before giving up.
const PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    /// Caps `k_l`; the planted center count per group equals the cap.
    pub spec: FairnessSpec,
    pub n: usize,
    pub planted_r: f64,
    pub separation: f64,
    pub dim: usize,
    pub seed: u64,
}

impl PlantedConfig {
    pub const DEFAULT_SEPARATION: f64 = 4.0;
    pub const DEFAULT_DIM: usize = 2;

    pub fn new(spec: FairnessSpec, n: usize, planted_r: f64, seed: u64) -> Self {
        PlantedConfig {
            spec,
            n,
            planted_r,
            separation: Self::DEFAULT_SEPARATION,
            dim: Self::DEFAULT_DIM,
            seed,
        }
    }

    pub fn with_separation(mut self, separation: f64) -> Self {
        self.separation = separation;
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDataset {
    pub points: Dataset,
    /// The optimal radius (0 when `n = k`).
    pub planted_r: f64,
    pub planted_centers: CenterSet,
    pub seed: u64,
}

fn invalid(msg: &str) -> Error {
    Error::InvalidInput(msg.into())
}

pub fn generate_planted(config: &PlantedConfig) -> Result<PlantedDataset> {
    let k = config.spec.k();
    let r = config.planted_r;
    let dim = config.dim;
    if config.n < k {
        return Err(invalid("a planted dataset needs n >= k"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("planted radius must be positive and finite"));
    }
    if !(config.separation >= 4.0 && config.separation.is_finite()) {
        return Err(invalid("separation must be at least 4"));
    }
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // a box with room for k disjoint balls of radius separation·r
    let min_gap = config.separation * r;
    let per_axis = libm::ceil(libm::pow(k as f64, 1.0 / dim as f64)) + 1.0;
    let side = 2.0 * min_gap * per_axis;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    while centers.len() < k {
        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..side)).collect();
            if centers.iter().all(|o| Euclidean.distance(o, &c) > min_gap) {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::RetryBudgetExceeded {
                placed: centers.len(),
                wanted: k,
            });
        }
    }
    let groups: Vec<usize> = config
        .spec
        .caps()
        .iter()
        .enumerate()
        .flat_map(|(l, &cap)| core::iter::repeat_n(l + 1, cap))
        .collect();

    // (cluster, coordinates); cluster members are generated round-robin
    let mut raw: Vec<(usize, Vec<f64>)> = centers.iter().cloned().enumerate().collect();
    let mut rim: Vec<Option<Vec<f64>>> = alloc::vec![None; k];
    let mut extras = alloc::vec![0usize; k];
    for e in 0..config.n - k {
        let j = e % k;
        let c = &centers[j];
        let coords = match extras[j] {
            0 => {
                let u = unit_vector(&mut rng, dim);
                let p: Vec<f64> = c.iter().zip(&u).map(|(x, v)| x + r * v).collect();
                rim[j] = Some(p.clone());
                p
            }
            1 => {
                let p = rim[j].as_ref().expect("rim point placed first");
                c.iter().zip(p).map(|(x, y)| 2.0 * x - y).collect()
            }
            _ => {
                let u = unit_vector(&mut rng, dim);
                let t: f64 = rng.gen_range(0.0..1.0);
                let rho = r * libm::pow(t, 1.0 / dim as f64);
                c.iter().zip(&u).map(|(x, v)| x + rho * v).collect()
            }
        };
        extras[j] += 1;
        raw.push((j, coords));
    }
    raw.shuffle(&mut rng);

    let mut points = Vec::with_capacity(raw.len());
    let mut planted = alloc::vec![None; k];
    for (id, (cluster, coords)) in raw.into_iter().enumerate() {
        let p = Point::new(id as u64, coords, groups[cluster]);
        if planted[cluster].is_none() && p.coords == centers[cluster] {
            planted[cluster] = Some(p.clone());
        }
        points.push(p);
    }
    let planted: Vec<Point> = planted.into_iter().map(|p| p.expect("center kept")).collect();
    let m = config.spec.groups();
    Ok(PlantedDataset {
        points: Dataset::new(dim, m, points)?,
        planted_r: if config.n > k { r } else { 0.0 },
        planted_centers: CenterSet::new(planted, m)?,
        seed: config.seed,
    })
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
