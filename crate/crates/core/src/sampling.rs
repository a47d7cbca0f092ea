//! Random variate generation used by the simulators.
//!
//! Poisson draws use sequential inversion below a mean of 30 and
//! Hörmann's transformed rejection with squeeze (PTRS) above it. Both are
//! exact; inversion consumes exactly one uniform per draw, so small-mean
//! draws are reproducible for a fixed seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mean at which the Poisson sampler switches from inversion to rejection.
pub const POISSON_INVERSION_CUTOFF: f64 = 30.0;

/// Generator used throughout: ChaCha8 with 2^64 independent streams per seed.
pub type StreamRng = ChaCha8Rng;

/// Independent stream `stream` of the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on `[0, 1)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Draws from Poisson(`mean`). A nonpositive mean yields 0.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        0
    } else if mean < POISSON_INVERSION_CUTOFF {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u = uniform(rng);
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        if p == 0.0 {
            break;
        }
        cdf += p;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = uniform(rng) - 0.5;
        let v = uniform(rng);
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - ln_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// `ln(k!)`: exact table below 16, Stirling series above.
pub fn ln_factorial(k: u64) -> f64 {
    const TABLE: [f64; 16] = [
        0.0,
        0.0,
        std::f64::consts::LN_2,
        1.791_759_469_228_055,
        3.178_053_830_347_945_6,
        4.787_491_742_782_046,
        6.579_251_212_010_101,
        8.525_161_361_065_415,
        10.604_602_902_745_25,
        12.801_827_480_081_469,
        15.104_412_573_075_516,
        17.502_307_845_873_887,
        19.987_214_495_661_885,
        22.552_163_853_123_42,
        25.191_221_182_738_68,
        27.899_271_383_840_894,
    ];
    if k < 16 {
        return TABLE[k as usize];
    }
    let x = k as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Walker/Vose alias table for O(1) draws from a finite distribution.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// Builds from nonnegative weights with a positive sum.
    pub fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        assert!(n > 0, "alias table needs at least one outcome");
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "alias table weights must have a positive sum");
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        Self { prob, alias }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let x = uniform(rng) * self.prob.len() as f64;
        let i = (x as usize).min(self.prob.len() - 1);
        if x - (i as f64) < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(samples: &[u64]) -> (f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / n;
        let var = samples
            .iter()
            .map(|&x| (x as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn ln_factorial_matches_direct_sum() {
        for k in 0..200u64 {
            let direct: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
            assert!(
                (ln_factorial(k) - direct).abs() < 1e-9 * direct.max(1.0),
                "k = {k}"
            );
        }
    }

    #[test]
    fn poisson_moments_both_regimes() {
        let mut rng = stream_rng(5, 0);
        for &mean in &[0.1, 2.5, 29.0, 31.0, 250.0, 2000.0] {
            let reps = 40_000;
            let xs: Vec<u64> = (0..reps).map(|_| poisson(&mut rng, mean)).collect();
            let (m, v) = moments(&xs);
            let se_mean = (mean / reps as f64).sqrt();
            assert!((m - mean).abs() < 4.0 * se_mean, "mean {mean}: got {m}");
            // Var of the sample variance for a Poisson is about (mean + 2 mean^2) / reps.
            let se_var = ((mean + 2.0 * mean * mean) / reps as f64).sqrt();
            assert!((v - mean).abs() < 4.0 * se_var, "mean {mean}: var {v}");
        }
    }

    #[test]
    fn poisson_small_mean_pmf() {
        let mut rng = stream_rng(9, 1);
        let mean = 0.7;
        let reps = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..reps {
            let k = poisson(&mut rng, mean) as usize;
            if k < 4 {
                counts[k] += 1;
            }
        }
        for (k, &c) in counts.iter().enumerate() {
            let p = (-mean + k as f64 * f64::ln(mean) - ln_factorial(k as u64)).exp();
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((c as f64 / reps as f64 - p).abs() < 4.0 * se, "k = {k}");
        }
    }

    #[test]
    fn zero_mean_gives_zero() {
        let mut rng = stream_rng(1, 1);
        assert_eq!(poisson(&mut rng, 0.0), 0);
        assert_eq!(poisson(&mut rng, -1.0), 0);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..5).map(|_| stream_rng(7, 3).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = stream_rng(7, 3).random();
        let y: u64 = stream_rng(7, 4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn alias_table_frequencies() {
        let w = [1.0, 0.0, 3.0, 6.0];
        let table = AliasTable::new(&w);
        let mut rng = stream_rng(2, 0);
        let reps = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..reps {
            counts[table.sample(&mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        for i in 0..4 {
            let p = w[i] / 10.0;
            let se = (p * (1.0 - p) / reps as f64).sqrt().max(1e-9);
            assert!((counts[i] as f64 / reps as f64 - p).abs() < 4.0 * se);
        }
    }
}
