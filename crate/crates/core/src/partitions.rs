//! Uniform random partitions of an integer E into distinct parts.
//!
//! A Fock state of N fermions on the ladder ε_ν = ν (ν = 1, 2, …) with total
//! energy E is a partition of E into N distinct parts.  The Markov chain
//! below samples them uniformly using energy-conserving "reactions": two
//! particles exchange δ quanta, and the move is accepted iff the result is
//! still a valid partition.  The proposal is symmetric, so the uniform
//! measure is stationary.
//!
//! When N is left free, split/merge moves with Metropolis–Hastings
//! acceptance are added so that the chain samples all distinct-part
//! partitions of E uniformly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mathcore::{neldermead, rng, SeededRng};
use crate::thermo::occupation;

/// A partition of `energy` into distinct positive parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Strictly ascending, all ≥ 1.
    pub levels: Vec<u64>,
    pub energy: u64,
}

impl Partition {
    pub fn new(mut levels: Vec<u64>) -> Result<Self> {
        levels.sort_unstable();
        let energy = levels.iter().sum();
        let p = Self { levels, energy };
        p.validate()?;
        Ok(p)
    }

    /// Check the partition invariants.
    pub fn validate(&self) -> Result<()> {
        if self.levels.first() == Some(&0) {
            return Err(Error::Integrity("partition has a zero part".into()));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Integrity("partition parts are not distinct and ascending".into()));
        }
        if self.levels.iter().sum::<u64>() != self.energy {
            return Err(Error::Integrity("partition parts do not sum to its energy".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Coarse-grained occupation: counts N_m in contiguous blocks of G levels.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarsePattern {
    pub group_size: usize,
    pub occupancies: Vec<usize>,
    pub ratios: Vec<f64>,
}

/// Markov-chain settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McmcConfig {
    pub seed: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub max_shift: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            burn_in: 1_000_000,
            thinning: 1_000,
            // Wide shifts let deep particles hop over the occupied sea.
            max_shift: 64,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in < 1 || self.thinning < 1 || self.max_shift < 1 {
            return Err(Error::Domain(format!(
                "MCMC burn_in, thinning and max_shift must be ≥ 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Smallest energy of N distinct positive parts.
pub fn minimal_energy(n: u64) -> u64 {
    n * (n + 1) / 2
}

/// Markov chain over partitions.  The state is kept as an unordered list of
/// parts plus an occupancy table for O(1) validity checks.
pub struct PartitionChain {
    parts: Vec<u64>,
    occupied: Vec<bool>,
    energy: u64,
    max_shift: u64,
    free_count: bool,
    rng: SeededRng,
}

impl PartitionChain {
    /// Chain on partitions of `energy` into exactly `count` distinct parts,
    /// started from the most compact valid state.
    pub fn fixed(energy: u64, count: u64, cfg: &McmcConfig) -> Result<Self> {
        cfg.validate()?;
        if count == 0 {
            return Err(Error::Domain("a partition needs at least one part".into()));
        }
        let min = minimal_energy(count);
        if energy < min {
            return Err(Error::Domain(format!(
                "E = {energy} is below the minimum {min} for {count} distinct parts"
            )));
        }
        // Ground state with the excess pushed onto the top part.
        let mut parts: Vec<u64> = (1..=count).collect();
        *parts.last_mut().expect("count ≥ 1") += energy - min;
        Ok(Self::from_parts(parts, energy, cfg, false))
    }

    /// Chain on all partitions of `energy` into distinct parts (any count).
    pub fn free(energy: u64, cfg: &McmcConfig) -> Result<Self> {
        cfg.validate()?;
        if energy == 0 {
            return Err(Error::Domain("E must be positive".into()));
        }
        // Largest staircase that fits, remainder on the top part.
        let mut k = 1;
        while minimal_energy(k + 1) <= energy {
            k += 1;
        }
        let mut parts: Vec<u64> = (1..=k).collect();
        *parts.last_mut().expect("k ≥ 1") += energy - minimal_energy(k);
        Ok(Self::from_parts(parts, energy, cfg, true))
    }

    fn from_parts(parts: Vec<u64>, energy: u64, cfg: &McmcConfig, free_count: bool) -> Self {
        let mut occupied = vec![false; energy as usize + 1];
        for &p in &parts {
            occupied[p as usize] = true;
        }
        Self {
            parts,
            occupied,
            energy,
            max_shift: cfg.max_shift,
            free_count,
            rng: rng(cfg.seed),
        }
    }

    /// Current state as a sorted [`Partition`].
    pub fn partition(&self) -> Partition {
        let mut levels = self.parts.clone();
        levels.sort_unstable();
        Partition {
            levels,
            energy: self.energy,
        }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// One proposal; returns whether the state changed.
    pub fn step(&mut self) -> bool {
        if !self.free_count {
            return self.pair_shift();
        }
        let u: f64 = self.rng.gen();
        if u < 0.5 {
            self.pair_shift()
        } else if u < 0.75 {
            self.split()
        } else {
            self.merge()
        }
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    fn pair_shift(&mut self) -> bool {
        let n = self.parts.len();
        if n < 2 {
            return false;
        }
        let i = self.rng.gen_range(0..n);
        let mut j = self.rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let span = self.max_shift as i64;
        let mut delta = self.rng.gen_range(-span..span);
        if delta >= 0 {
            delta += 1;
        }
        let (a, b) = (self.parts[i] as i64, self.parts[j] as i64);
        let (na, nb) = (a + delta, b - delta);
        if na < 1 || nb < 1 || na == nb {
            return false;
        }
        if na == b {
            // Exchange of the two parts: a valid no-op.
            return false;
        }
        if self.occupied[na as usize] || self.occupied[nb as usize] {
            return false;
        }
        self.occupied[a as usize] = false;
        self.occupied[b as usize] = false;
        self.occupied[na as usize] = true;
        self.occupied[nb as usize] = true;
        self.parts[i] = na as u64;
        self.parts[j] = nb as u64;
        true
    }

    /// Replace one part p by two distinct parts a + (p − a).
    fn split(&mut self) -> bool {
        let n = self.parts.len();
        let i = self.rng.gen_range(0..n);
        let p = self.parts[i];
        if p < 3 {
            return false;
        }
        let a = self.rng.gen_range(1..p);
        let b = p - a;
        if a == b || self.occupied[a as usize] || self.occupied[b as usize] {
            return false;
        }
        // Hastings ratio q(merge back)/q(split) = (p − 1)/(n + 1).
        let ratio = (p - 1) as f64 / (n + 1) as f64;
        if ratio < 1.0 && self.rng.gen::<f64>() >= ratio {
            return false;
        }
        self.occupied[p as usize] = false;
        self.occupied[a as usize] = true;
        self.occupied[b as usize] = true;
        self.parts[i] = a;
        self.parts.push(b);
        true
    }

    /// Replace two parts by their sum.
    fn merge(&mut self) -> bool {
        let n = self.parts.len();
        if n < 2 {
            return false;
        }
        let i = self.rng.gen_range(0..n);
        let mut j = self.rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (self.parts[i], self.parts[j]);
        let p = a + b;
        if self.occupied[p as usize] {
            return false;
        }
        // Hastings ratio q(split back)/q(merge) = n/(p − 1).
        let ratio = n as f64 / (p - 1) as f64;
        if ratio < 1.0 && self.rng.gen::<f64>() >= ratio {
            return false;
        }
        self.occupied[a as usize] = false;
        self.occupied[b as usize] = false;
        self.occupied[p as usize] = true;
        self.parts[i] = p;
        self.parts.swap_remove(j);
        true
    }
}

/// One partition of E into N distinct parts drawn after `burn_in` steps.
pub fn sample_partition(energy: u64, count: u64, cfg: &McmcConfig) -> Result<Partition> {
    let mut chain = PartitionChain::fixed(energy, count, cfg)?;
    chain.run(cfg.burn_in);
    let p = chain.partition();
    p.validate()?;
    Ok(p)
}

/// `samples` partitions from a single chain, `thinning` steps apart.
pub fn sample_partitions(energy: u64, count: u64, samples: usize, cfg: &McmcConfig) -> Result<Vec<Partition>> {
    let mut chain = PartitionChain::fixed(energy, count, cfg)?;
    chain.run(cfg.burn_in);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        chain.run(cfg.thinning);
        let p = chain.partition();
        p.validate()?;
        out.push(p);
    }
    Ok(out)
}

/// Count parts in the level blocks [1..G], [G+1..2G], …  The last block
/// reaches the largest part.
pub fn coarse_grain(p: &Partition, group_size: usize) -> Result<CoarsePattern> {
    if group_size == 0 {
        return Err(Error::Domain("group size must be ≥ 1".into()));
    }
    let top = p.levels.last().copied().unwrap_or(0) as usize;
    let groups = top.div_ceil(group_size);
    Ok(coarse_grain_into(p, group_size, groups))
}

fn coarse_grain_into(p: &Partition, group_size: usize, groups: usize) -> CoarsePattern {
    let mut occupancies = vec![0usize; groups];
    for &l in &p.levels {
        let m = (l as usize - 1) / group_size;
        if m < groups {
            occupancies[m] += 1;
        }
    }
    let ratios = occupancies.iter().map(|&c| c as f64 / group_size as f64).collect();
    CoarsePattern {
        group_size,
        occupancies,
        ratios,
    }
}

/// Mean level of group m (1-based) for contiguous blocks of size G:
/// G(m − ½) + ½.
pub fn group_center(m: usize, group_size: usize) -> f64 {
    group_size as f64 * (m as f64 - 0.5) + 0.5
}

/// Ensemble statistics of coarse-grained patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternEnsemble {
    pub group_size: usize,
    pub samples: usize,
    /// Mean level of each group.
    pub centers: Vec<f64>,
    pub mean_ratios: Vec<f64>,
    pub std_ratios: Vec<f64>,
    /// Mean ratios over the first and second half of the chain.
    pub first_half: Vec<f64>,
    pub second_half: Vec<f64>,
}

impl PatternEnsemble {
    /// Fraction of groups whose half-chain means agree within 2 standard
    /// errors of their difference.
    pub fn split_chain_agreement(&self) -> f64 {
        let half = (self.samples / 2).max(1) as f64;
        let mut ok = 0;
        let mut counted = 0;
        for m in 0..self.mean_ratios.len() {
            let se = self.std_ratios[m] * (2.0 / half).sqrt();
            let diff = (self.first_half[m] - self.second_half[m]).abs();
            if self.std_ratios[m] == 0.0 {
                if diff == 0.0 {
                    ok += 1;
                }
            } else if diff <= 2.0 * se {
                ok += 1;
            }
            counted += 1;
        }
        if counted == 0 {
            1.0
        } else {
            ok as f64 / counted as f64
        }
    }
}

/// Run one chain and average the coarse pattern over `samples` retained
/// states.  Groups cover every level that any retained state occupied.
pub fn pattern_ensemble(
    energy: u64,
    count: u64,
    group_size: usize,
    samples: usize,
    cfg: &McmcConfig,
) -> Result<PatternEnsemble> {
    if group_size == 0 || samples == 0 {
        return Err(Error::Domain("group size and sample count must be ≥ 1".into()));
    }
    let mut chain = PartitionChain::fixed(energy, count, cfg)?;
    chain.run(cfg.burn_in);
    // Start with groups out to 2E/N and grow when a part lands beyond them.
    let reach = (2 * energy / count).max(count + 1) as usize;
    let mut groups = reach.div_ceil(group_size);
    let mut sum = vec![0.0; groups];
    let mut sum_sq = vec![0.0; groups];
    let mut first = vec![0.0; groups];
    let half = samples / 2;
    for s in 0..samples {
        chain.run(cfg.thinning);
        let p = chain.partition();
        p.validate()?;
        let top = p.levels.last().copied().unwrap_or(0) as usize;
        if top > groups * group_size {
            groups = top.div_ceil(group_size);
            sum.resize(groups, 0.0);
            sum_sq.resize(groups, 0.0);
            first.resize(groups, 0.0);
        }
        let pattern = coarse_grain_into(&p, group_size, groups);
        for (m, &r) in pattern.ratios.iter().enumerate() {
            sum[m] += r;
            sum_sq[m] += r * r;
            if s < half {
                first[m] += r;
            }
        }
    }
    let n = samples as f64;
    let mean_ratios: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_ratios = sum_sq
        .iter()
        .zip(&mean_ratios)
        .map(|(sq, m)| (sq / n - m * m).max(0.0).sqrt())
        .collect();
    let first_half: Vec<f64> = first.iter().map(|f| f / half.max(1) as f64).collect();
    let second_half = sum
        .iter()
        .zip(&first)
        .map(|(s, f)| (s - f) / (samples - half).max(1) as f64)
        .collect();
    Ok(PatternEnsemble {
        group_size,
        samples,
        centers: (1..=groups).map(|m| group_center(m, group_size)).collect(),
        mean_ratios,
        std_ratios,
        first_half,
        second_half,
    })
}

/// Least-squares Fermi–Dirac fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiDiracFit {
    pub temperature: f64,
    pub chemical_potential: f64,
    pub rms: f64,
}

/// Fit n_FD(ε; T, μ) to `ratios` at energies `centers` by minimising the
/// sum of squared residuals.
pub fn fit_fermi_dirac(centers: &[f64], ratios: &[f64]) -> Result<FermiDiracFit> {
    if centers.len() != ratios.len() || centers.len() < 2 {
        return Err(Error::Domain("fit needs matching center/ratio arrays of length ≥ 2".into()));
    }
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::Domain("ratios must lie in [0, 1]".into()));
    }
    let interior: Vec<usize> = (0..ratios.len())
        .filter(|&i| ratios[i] > 0.02 && ratios[i] < 0.98)
        .collect();
    if interior.is_empty() {
        return Err(Error::Numeric {
            message: "degenerate data: every ratio is 0 or 1, T is not identifiable".into(),
            estimate: f64::NAN,
            error_bound: f64::INFINITY,
        });
    }
    // Start from the half-filling crossing and the slope there.
    let k = (1..ratios.len())
        .find(|&i| ratios[i - 1] >= 0.5 && ratios[i] < 0.5)
        .unwrap_or(interior[interior.len() / 2].max(1));
    let (e0, e1, r0, r1) = (centers[k - 1], centers[k], ratios[k - 1], ratios[k]);
    let slope = (r1 - r0) / (e1 - e0);
    let mu0 = if r0 != r1 { e0 + (0.5 - r0) / slope } else { 0.5 * (e0 + e1) };
    let spread = centers[centers.len() - 1] - centers[0];
    let t0 = if slope < 0.0 { (-0.25 / slope).clamp(1e-6 * spread, spread) } else { 0.1 * spread };

    let sse = |x: &[f64]| -> f64 {
        let (t, mu) = (x[0].exp(), x[1]);
        centers
            .iter()
            .zip(ratios)
            .map(|(&e, &r)| (r - occupation(e, t, mu)).powi(2))
            .sum()
    };
    let mut x = vec![t0.ln(), mu0];
    // Restart once from the optimum to shake off a collapsed simplex.
    for _ in 0..2 {
        x = neldermead(sse, &x, 1e-10)?;
    }
    let rms = (sse(&x) / ratios.len() as f64).sqrt();
    Ok(FermiDiracFit {
        temperature: x[0].exp(),
        chemical_potential: x[1],
        rms,
    })
}

/// φ(u) = number of parts ≥ u.
pub fn counting_function(p: &Partition, u: f64) -> usize {
    // Parts are ascending: count those at or above u.
    let first = p.levels.partition_point(|&l| (l as f64) < u);
    p.levels.len() - first
}

/// Limit-shape scale c = √12/π: a typical distinct-part partition of E has
/// φ(√E·u)/√E → c ln(1 + e^{−u/c}).
pub const VERSHIK_SCALE: f64 = 1.102_657_790_843_584_2;

/// The limiting scaled counting function −v(u) = c ln(1 + e^{−u/c}), i.e.
/// the solution of e^{−v/c} − e^{−u/c} = 1.
pub fn vershik_curve(u: f64) -> f64 {
    VERSHIK_SCALE * (-u / VERSHIK_SCALE).exp().ln_1p()
}

/// Temperature of the typical unrestricted distinct-part partition,
/// T = √(12E)/π.
pub fn vershik_temperature(energy: f64) -> f64 {
    (12.0 * energy).sqrt() / std::f64::consts::PI
}

/// Result of [`vershik_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct VershikCheck {
    pub u: Vec<f64>,
    /// Sample mean of φ(√E·u)/√E.
    pub phi_scaled: Vec<f64>,
    pub curve: Vec<f64>,
    /// Mean over samples of sup_u |φ(√E·u)/√E − curve(u)|.
    pub deviation: f64,
    /// sup_u of the same difference for the sample-mean profile.
    pub mean_profile_deviation: f64,
}

/// Compare sampled distinct-part partitions of E (any number of parts) with
/// the Vershik limit shape on the grid u ∈ [0, 5] in steps of 0.05.
pub fn vershik_check(energy: u64, samples: usize, cfg: &McmcConfig) -> Result<VershikCheck> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let mut chain = PartitionChain::free(energy, cfg)?;
    chain.run(cfg.burn_in);
    let u: Vec<f64> = (0..=100).map(|k| 0.05 * k as f64).collect();
    let curve: Vec<f64> = u.iter().map(|&x| vershik_curve(x)).collect();
    let root = (energy as f64).sqrt();
    let mut mean = vec![0.0; u.len()];
    let mut deviation = 0.0;
    for _ in 0..samples {
        chain.run(cfg.thinning);
        let p = chain.partition();
        p.validate()?;
        let mut sup: f64 = 0.0;
        for (k, &x) in u.iter().enumerate() {
            let phi = counting_function(&p, root * x) as f64 / root;
            mean[k] += phi;
            sup = sup.max((phi - curve[k]).abs());
        }
        deviation += sup;
    }
    let n = samples as f64;
    for m in &mut mean {
        *m /= n;
    }
    let mean_profile_deviation = mean
        .iter()
        .zip(&curve)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(VershikCheck {
        u,
        phi_scaled: mean,
        curve,
        deviation: deviation / n,
        mean_profile_deviation,
    })
}
