//! Monte Carlo fast-forwarding for piecewise-constant PSD generators.
//!
//! Time is normalized to `[0, 1]`. On a piece of normalized length `ds` with
//! generator `L`, `E[e^{-i xi ds sqrt(t L)}] = e^{-ds t L}` for
//! `xi ~ N(0, 2 / ds)`. Draws with `|xi| > M` are set to
//! zero so every sample is a bounded-time unitary.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gaussian::psd_eigen;
use crate::error::{ApsError, Result};
use crate::operators::{CMatrix, Generator, GeneratorKind, HermitianEigen};

const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StochasticOptions {
    pub samples: usize,
    pub seed: u64,
    /// Bias allowed from the cutoff on `|xi|`.
    pub trunc_eps: f64,
}

impl Default for StochasticOptions {
    fn default() -> Self {
        Self { samples: 10_000, seed: 0, trunc_eps: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StochasticEstimate {
    pub mean: CMatrix,
    /// Frobenius norm of the entrywise standard errors.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    /// Cutoff `M` on the normalized-time variables.
    pub cutoff: f64,
    /// Upper bound on the bias introduced by the cutoffs.
    pub truncation_bias: f64,
}

struct Piece {
    eig: HermitianEigen,
    /// Normalized length.
    ds: f64,
    /// `sqrt(t)`
    scale: f64,
    normal: Normal<f64>,
    cutoff: f64,
}

/// Pieces of `[0, t]` with their generators.
fn pieces(gen: &Generator, t: f64) -> Result<Vec<(CMatrix, f64)>> {
    match gen.kind() {
        GeneratorKind::Constant(a) => Ok(vec![(a.clone(), t)]),
        GeneratorKind::Piecewise { breakpoints, pieces } => Ok(breakpoints
            .windows(2)
            .zip(pieces)
            .filter_map(|(w, p)| {
                let ds = w[1].min(t) - w[0];
                (ds > 0.0).then(|| (p.clone(), ds))
            })
            .collect()),
        GeneratorKind::Polynomial { .. } => {
            Err(ApsError::Unsupported("the stochastic estimator needs a piecewise-constant generator".into()))
        }
    }
}

/// Estimates `T exp(-int_0^t L)` for piecewise-constant Hermitian PSD `L`.
pub fn piecewise_stochastic_ff(gen: &Generator, t: f64, opts: &StochasticOptions) -> Result<StochasticEstimate> {
    if opts.samples == 0 {
        return Err(ApsError::InvalidParameter("the estimator needs at least one sample".into()));
    }
    if !(opts.trunc_eps > 0.0 && opts.trunc_eps < 1.0) {
        return Err(ApsError::InvalidParameter(format!("trunc_eps must lie in (0, 1), got {}", opts.trunc_eps)));
    }
    gen.check_time(t)?;
    let dim = gen.dim();
    if t == 0.0 {
        return Ok(StochasticEstimate {
            mean: CMatrix::identity(dim),
            stderr: 0.0,
            samples: opts.samples,
            seed: opts.seed,
            cutoff: f64::INFINITY,
            truncation_bias: 0.0,
        });
    }
    let raw = pieces(gen, t)?;
    let n_t = raw.len().max(1) as f64;
    // Normalized lengths ds_j = (s_{j+1} - s_j) / t and the single cutoff
    // from (4 N_t sqrt(t L_max) / ds_min) e^{-ds_min M^2 / 4} <= trunc_eps.
    let mut segs = Vec::with_capacity(raw.len());
    let mut l_max: f64 = 0.0;
    let mut eigs = Vec::with_capacity(raw.len());
    for (j, (l, _)) in raw.iter().enumerate() {
        let eig = psd_eigen(l, &format!("piece {j}"))?;
        l_max = l_max.max(eig.max());
        eigs.push(eig);
    }
    let ds_min = raw.iter().map(|p| p.1 / t).fold(f64::INFINITY, f64::min);
    let prefactor = 4.0 * n_t * (t * l_max).sqrt() / ds_min;
    let cutoff = (4.0 / ds_min * (prefactor / opts.trunc_eps).max(1.0).ln()).sqrt().max(1.0);
    for (j, ((_, len), eig)) in raw.iter().zip(eigs).enumerate() {
        let ds = len / t;
        let normal = Normal::new(0.0, (2.0 / ds).sqrt())
            .map_err(|e| ApsError::InvalidParameter(format!("piece {j}: {e}")))?;
        segs.push(Piece { eig, ds, scale: t.sqrt(), normal, cutoff });
    }

    let sample = |index: usize| -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(index as u64);
        let mut u = CMatrix::identity(dim);
        for p in &segs {
            let mut xi = p.normal.sample(&mut rng);
            if xi.abs() > p.cutoff {
                xi = 0.0;
            }
            let step = p.eig.apply(|lam| C64::from_polar(1.0, -xi * p.ds * p.scale * lam.sqrt()));
            u = step.matmul(&u);
        }
        u
    };

    let chunks = opts.samples.div_ceil(CHUNK);
    let partial: Vec<(CMatrix, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = CMatrix::zeros(dim);
            let mut sq = vec![0.0; dim * dim];
            for i in c * CHUNK..((c + 1) * CHUNK).min(opts.samples) {
                let u = sample(i);
                sum += &u;
                for (s, z) in sq.iter_mut().zip(u.as_slice()) {
                    *s += z.norm_sqr();
                }
            }
            (sum, sq)
        })
        .collect();

    let mut sum = CMatrix::zeros(dim);
    let mut sq = vec![0.0; dim * dim];
    for (s, q) in &partial {
        sum += s;
        for (a, b) in sq.iter_mut().zip(q) {
            *a += b;
        }
    }
    let count = opts.samples as f64;
    let mean = sum.scale_real(1.0 / count);
    let var_total: f64 = sq
        .iter()
        .zip(mean.as_slice())
        .map(|(&s, m)| ((s - count * m.norm_sqr()) / (count - 1.0).max(1.0)).max(0.0))
        .sum();
    // One sample carries no spread information.
    let stderr = if opts.samples > 1 { (var_total / count).sqrt() } else { f64::INFINITY };
    let truncation_bias = prefactor * (-ds_min * cutoff * cutoff / 4.0).exp();
    Ok(StochasticEstimate {
        mean,
        stderr,
        samples: opts.samples,
        seed: opts.seed,
        cutoff,
        truncation_bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::oracle::time_ordered_exp;

    #[test]
    fn scalar_mean_within_five_stderr() {
        let g = Generator::constant(CMatrix::from_real_diag(&[0.8])).unwrap();
        let e = piecewise_stochastic_ff(&g, 1.0, &StochasticOptions { samples: 20_000, seed: 7, trunc_eps: 1e-8 })
            .unwrap();
        let err = (e.mean[(0, 0)] - C64::new((-0.8f64).exp(), 0.0)).norm();
        assert!(err <= 5.0 * e.stderr, "err {err} stderr {}", e.stderr);
        assert!(e.truncation_bias <= 1e-8 * (1.0 + 1e-9));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = Generator::piecewise(
            vec![0.0, 0.4, 1.0],
            vec![CMatrix::from_real_diag(&[1.0, 0.2]), CMatrix::from_real_rows(&[vec![0.5, 0.1], vec![0.1, 0.3]]).unwrap()],
        )
        .unwrap();
        let o = StochasticOptions { samples: 3000, seed: 11, trunc_eps: 1e-8 };
        let a = piecewise_stochastic_ff(&g, 1.0, &o).unwrap();
        let b = piecewise_stochastic_ff(&g, 1.0, &o).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.stderr, b.stderr);
        let exact = time_ordered_exp(&g, 1.0, 1e-12).unwrap().propagator;
        assert!((&a.mean - &exact).frobenius_norm() <= 5.0 * a.stderr);
    }

    #[test]
    fn zero_samples_rejected() {
        let g = Generator::constant(CMatrix::identity(1)).unwrap();
        let o = StochasticOptions { samples: 0, ..Default::default() };
        assert!(piecewise_stochastic_ff(&g, 1.0, &o).is_err());
    }
}
