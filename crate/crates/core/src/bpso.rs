//! Binary particle swarm search over change-point sets.
//!
//! A particle holds one bit per admissible cut position of every predictor
//! (set bit = threshold at that midpoint). Ties in predictor values collapse
//! to a single position, so the matrix has `P` rows of at most `n - 1` bits.
//! Each particle draws from its own random stream keyed by
//! `(seed, particle, iteration)`, which keeps runs reproducible independent
//! of how scoring is scheduled across threads.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partition::{ChangePointConfig, CutSet, CutTable};
use crate::score::{Scored, Scorer};

/// Swarm tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpsoParams {
    pub swarm_size: usize,
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    /// Threshold of the particle update rule, in `(0, 1)`.
    pub a: f64,
    pub max_iter: usize,
    /// Largest random shift, in cut positions, applied by initialization and
    /// mutation.
    pub shift_range: usize,
    /// Iterations with an unchanged global best before stopping.
    pub stall_limit: usize,
}

impl Default for BpsoParams {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            omega: 1.0,
            c1: 2.0,
            c2: 2.0,
            a: 0.5,
            max_iter: 200,
            shift_range: 3,
            stall_limit: 5,
        }
    }
}

impl BpsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 3 {
            return Err(Error::InvalidParameter("swarm size must be at least 3".into()));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::InvalidParameter("a must lie in (0, 1)".into()));
        }
        if self.max_iter == 0 || self.stall_limit == 0 {
            return Err(Error::InvalidParameter("max_iter and stall_limit must be positive".into()));
        }
        if ![self.omega, self.c1, self.c2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite swarm coefficient".into()));
        }
        Ok(())
    }
}

/// Bit matrix, one row per predictor.
pub type Bits = Vec<Vec<bool>>;

#[derive(Debug, Clone)]
pub struct Particle {
    pub bits: Bits,
    pub scored: Arc<Scored>,
}

impl Particle {
    pub fn score(&self) -> f64 {
        self.scored.total()
    }

    pub fn set(&self) -> &CutSet {
        &self.scored.set
    }

    pub fn decoded(&self, cuts: &CutTable) -> ChangePointConfig {
        cuts.to_config(&self.scored.set)
    }
}

#[derive(Debug, Clone)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub velocities: Vec<Vec<Vec<f64>>>,
    pub pbest: Vec<Particle>,
    pub gbest: Particle,
    pub stall_count: usize,
    pub iteration: usize,
    seed: u64,
    candidates: CutSet,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for one particle (or mutation slot) at one iteration.
pub fn stream(seed: u64, slot: u64, iteration: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(splitmix(seed) ^ slot) ^ iteration))
}

pub fn set_to_bits(cuts: &CutTable, set: &CutSet) -> Bits {
    (0..cuts.p())
        .map(|j| {
            let mut row = vec![false; cuts.len(j)];
            for &k in &set[j] {
                row[k] = true;
            }
            row
        })
        .collect()
}

pub fn bits_to_set(bits: &Bits) -> CutSet {
    bits.iter()
        .map(|row| row.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k).collect())
        .collect()
}

/// Drops uniformly chosen thresholds until every region is large enough.
fn repair(scorer: &Scorer<'_>, mut set: CutSet, rng: &mut impl Rng) -> CutSet {
    while !scorer.admissible(&set) {
        let pts: Vec<(usize, usize)> = set
            .iter()
            .enumerate()
            .flat_map(|(j, ks)| (0..ks.len()).map(move |i| (j, i)))
            .collect();
        let &(j, i) = pts.choose(rng).expect("the empty set is admissible");
        set[j].remove(i);
    }
    set
}

fn shift_all(cuts: &CutTable, set: &CutSet, range: usize, rng: &mut impl Rng) -> CutSet {
    let r = range as i64;
    set.iter()
        .enumerate()
        .map(|(j, ks)| {
            let top = cuts.len(j) as i64 - 1;
            let mut out: Vec<usize> = ks
                .iter()
                .map(|&k| (k as i64 + rng.random_range(-r..=r)).clamp(0, top) as usize)
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect()
}

fn random_subset(set: &CutSet, rng: &mut impl Rng) -> CutSet {
    set.iter()
        .map(|ks| ks.iter().copied().filter(|_| rng.random_bool(0.5)).collect())
        .collect()
}

fn particle(scorer: &Scorer<'_>, set: CutSet) -> Particle {
    let scored = scorer
        .score(&set)
        .expect("repaired sets satisfy the region-size constraint");
    Particle {
        bits: set_to_bits(scorer.cuts(), &set),
        scored,
    }
}

fn best_index(ps: &[Particle]) -> usize {
    let mut best = 0;
    for (i, p) in ps.iter().enumerate() {
        if p.score() < ps[best].score() {
            best = i;
        }
    }
    best
}

/// Builds and scores the initial swarm: the full candidate set, then random
/// subsets, then shifted random subsets. An empty candidate set yields a
/// single empty particle.
pub fn init_swarm(scorer: &Scorer<'_>, candidates: &CutSet, swarm_size: usize, seed: u64, shift_range: usize) -> Result<SwarmState> {
    if swarm_size < 3 {
        return Err(Error::InvalidParameter("swarm size must be at least 3".into()));
    }
    if !scorer.admissible(&vec![Vec::new(); scorer.cuts().p()]) {
        return Err(Error::InvalidData(format!(
            "fewer than {} observations",
            scorer.min_region()
        )));
    }
    let empty = candidates.iter().all(Vec::is_empty);
    let size = if empty { 1 } else { swarm_size };
    let half = swarm_size.div_ceil(2);
    let particles: Vec<Particle> = (0..size)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64, 0);
            let set = if i == 0 {
                candidates.clone()
            } else if i < half {
                random_subset(candidates, &mut rng)
            } else {
                let sub = random_subset(candidates, &mut rng);
                shift_all(scorer.cuts(), &sub, shift_range, &mut rng)
            };
            particle(scorer, repair(scorer, set, &mut rng))
        })
        .collect();
    let velocities = particles
        .iter()
        .map(|p| p.bits.iter().map(|row| vec![0.0; row.len()]).collect())
        .collect();
    let gbest = particles[best_index(&particles)].clone();
    Ok(SwarmState {
        pbest: particles.clone(),
        particles,
        velocities,
        gbest,
        stall_count: 0,
        iteration: 0,
        seed,
        candidates: candidates.clone(),
    })
}

/// Velocity update with explicit uniform draws `r1`, `r2`:
/// `sigmoid(|omega v + c1 r1 (pbest - x) + c2 r2 (gbest - x)|)`.
#[allow(clippy::too_many_arguments)]
pub fn velocity(v_prev: f64, x: bool, pbest: bool, gbest: bool, omega: f64, c1: f64, c2: f64, r1: f64, r2: f64) -> f64 {
    let xb = f64::from(u8::from(x));
    let inner = omega * v_prev + c1 * r1 * (f64::from(u8::from(pbest)) - xb) + c2 * r2 * (f64::from(u8::from(gbest)) - xb);
    1.0 / (1.0 + (-inner.abs()).exp())
}

/// [`velocity`] drawing `r1, r2 ~ U(0, 1)` from `rng`.
#[allow(clippy::too_many_arguments)]
pub fn update_velocity(v_prev: f64, x: bool, pbest: bool, gbest: bool, omega: f64, c1: f64, c2: f64, rng: &mut impl Rng) -> f64 {
    let r1: f64 = rng.random();
    let r2: f64 = rng.random();
    velocity(v_prev, x, pbest, gbest, omega, c1, c2, r1, r2)
}

/// Keep the bit when `v <= a`, copy the personal best when
/// `a < v <= (1 + a) / 2`, otherwise copy the global best.
pub fn update_particle_bit(x: bool, pbest: bool, gbest: bool, v: f64, a: f64) -> bool {
    if v <= a {
        x
    } else if v <= 0.5 * (1.0 + a) {
        pbest
    } else {
        gbest
    }
}

fn mutate_set(scorer: &Scorer<'_>, set: &CutSet, candidates: &CutSet, shift_range: usize, rng: &mut impl Rng) -> CutSet {
    let cuts = scorer.cuts();
    let op = rng.random_range(0..3);
    let mut out = set.clone();
    if op != 1 {
        let count: usize = out.iter().map(Vec::len).sum();
        if count > 0 && rng.random_bool(0.5) {
            let pts: Vec<(usize, usize)> = out
                .iter()
                .enumerate()
                .flat_map(|(j, ks)| (0..ks.len()).map(move |i| (j, i)))
                .collect();
            let &(j, i) = pts.choose(rng).expect("nonempty");
            out[j].remove(i);
        } else {
            let pool: Vec<(usize, usize)> = candidates
                .iter()
                .enumerate()
                .flat_map(|(j, ks)| ks.iter().map(move |&k| (j, k)))
                .filter(|&(j, k)| !out[j].contains(&k))
                .collect();
            let pick = pool.choose(rng).copied().or_else(|| {
                let open: Vec<usize> = (0..cuts.p()).filter(|&j| out[j].len() < cuts.len(j)).collect();
                let &j = open.choose(rng)?;
                let free: Vec<usize> = (0..cuts.len(j)).filter(|k| !out[j].contains(k)).collect();
                free.choose(rng).map(|&k| (j, k))
            });
            if let Some((j, k)) = pick {
                out[j].push(k);
                out[j].sort_unstable();
            }
        }
    }
    if op != 0 {
        out = shift_all(cuts, &out, shift_range, rng);
    }
    out
}

/// Replaces the worst `ceil(N/10)` particles with mutated copies of the
/// best `ceil(N/10)`.
pub fn mutate(scorer: &Scorer<'_>, swarm: &mut SwarmState, shift_range: usize) {
    let n = swarm.particles.len();
    let k = n.div_ceil(10);
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| {
        swarm.particles[a]
            .score()
            .total_cmp(&swarm.particles[b].score())
            .then(a.cmp(&b))
    });
    let seed = swarm.seed;
    let t = swarm.iteration as u64;
    let candidates = &swarm.candidates;
    let mutants: Vec<Particle> = ranked[..k]
        .par_iter()
        .enumerate()
        .map(|(slot, &src)| {
            let mut rng = stream(seed, (n + slot) as u64, t);
            let set = mutate_set(scorer, swarm.particles[src].set(), candidates, shift_range, &mut rng);
            particle(scorer, repair(scorer, set, &mut rng))
        })
        .collect();
    for (mutant, &dst) in mutants.into_iter().zip(ranked.iter().rev()) {
        if mutant.score() < swarm.pbest[dst].score() {
            swarm.pbest[dst] = mutant.clone();
        }
        swarm.particles[dst] = mutant;
    }
}

/// One velocity/position/score sweep over all particles followed by
/// mutation and the global-best update.
pub fn step(scorer: &Scorer<'_>, swarm: &mut SwarmState, params: &BpsoParams) {
    swarm.iteration += 1;
    let t = swarm.iteration as u64;
    let seed = swarm.seed;
    let gbits = &swarm.gbest.bits;
    let updated: Vec<(Particle, Vec<Vec<f64>>)> = (0..swarm.particles.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64, t);
            let x = &swarm.particles[i].bits;
            let pb = &swarm.pbest[i].bits;
            let mut vel = swarm.velocities[i].clone();
            let mut bits = x.clone();
            for j in 0..bits.len() {
                for k in 0..bits[j].len() {
                    let v = update_velocity(vel[j][k], x[j][k], pb[j][k], gbits[j][k], params.omega, params.c1, params.c2, &mut rng);
                    vel[j][k] = v;
                    bits[j][k] = update_particle_bit(x[j][k], pb[j][k], gbits[j][k], v, params.a);
                }
            }
            let set = repair(scorer, bits_to_set(&bits), &mut rng);
            (particle(scorer, set), vel)
        })
        .collect();
    for (i, (p, v)) in updated.into_iter().enumerate() {
        if p.score() < swarm.pbest[i].score() {
            swarm.pbest[i] = p.clone();
        }
        swarm.particles[i] = p;
        swarm.velocities[i] = v;
    }
    mutate(scorer, swarm, params.shift_range);
    let prev = swarm.gbest.score();
    let best = &swarm.pbest[best_index(&swarm.pbest)];
    if best.score() < swarm.gbest.score() {
        swarm.gbest = best.clone();
    }
    if (swarm.gbest.score() - prev).abs() <= 1e-12 {
        swarm.stall_count += 1;
    } else {
        swarm.stall_count = 0;
    }
}

/// Outcome of a swarm run.
#[derive(Debug, Clone)]
pub struct BpsoOutcome {
    pub best: Arc<Scored>,
    pub converged: bool,
    pub iterations: usize,
    /// Global-best score after initialization and after every iteration.
    pub history: Vec<f64>,
}

impl BpsoOutcome {
    pub fn score(&self) -> f64 {
        self.best.total()
    }
}

/// Iterates until the global best is unchanged for `stall_limit`
/// consecutive iterations or `max_iter` is reached.
pub fn run_bpso(scorer: &Scorer<'_>, candidates: &CutSet, params: &BpsoParams, seed: u64) -> Result<BpsoOutcome> {
    params.validate()?;
    let mut swarm = init_swarm(scorer, candidates, params.swarm_size, seed, params.shift_range)?;
    let mut history = vec![swarm.gbest.score()];
    let mut converged = false;
    while swarm.iteration < params.max_iter {
        step(scorer, &mut swarm, params);
        history.push(swarm.gbest.score());
        if swarm.stall_count >= params.stall_limit {
            converged = true;
            break;
        }
    }
    Ok(BpsoOutcome {
        best: swarm.gbest.scored.clone(),
        converged,
        iterations: swarm.iteration,
        history,
    })
}
