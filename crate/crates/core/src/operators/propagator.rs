//! Memoized propagators `U(s) = T exp(-int_0^s G(r) dr)`.
//!
//! Integrator samplers are queried at many nearby times by the oracle. A
//! fresh ordered exponential per query would be quadratic, so the path keeps
//! checkpoints on a fixed grid and a cursor at the last queried time, and
//! advances with fourth-order Magnus steps from the nearest one.

use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;

use super::expm::{expm, expm_taylor};
use super::matrix::{commutator, CMatrix, HermitianEigen, I};
use crate::error::{ApsError, Result};

pub type MatrixFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

const CHECKPOINTS: usize = 64;
const SUBSTEPS_PER_CHECKPOINT: usize = 16;

/// One fourth-order Gauss-Legendre Magnus step: `T exp(-int_a^{a+h} G)`.
pub fn magnus4_step(g: &dyn Fn(f64) -> CMatrix, a: f64, h: f64) -> CMatrix {
    let r = 3f64.sqrt() / 6.0;
    let g1 = g(a + (0.5 - r) * h);
    let g2 = g(a + (0.5 + r) * h);
    // Omega for the equation U' = -G U.
    let mut omega = (&g1 + &g2).scale_real(-0.5 * h);
    omega.axpy(C64::new(3f64.sqrt() / 12.0 * h * h, 0.0), &commutator(&g2, &g1));
    expm_taylor(&omega)
}

/// `T exp(-int_a^b G)` with `steps` Magnus steps on each smooth piece.
pub fn magnus4_propagate(
    g: &dyn Fn(f64) -> CMatrix,
    breakpoints: &[f64],
    a: f64,
    b: f64,
    max_step: f64,
    start: CMatrix,
) -> CMatrix {
    let mut u = start;
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    for w in edges.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let k = (len / max_step).ceil().max(1.0) as usize;
        let h = len / k as f64;
        for j in 0..k {
            u = magnus4_step(g, w[0] + j as f64 * h, h).matmul(&u);
        }
    }
    u
}

enum Flow {
    /// `G = c H` with `H` Hermitian and `c` in {1, i}: closed form in the eigenbasis.
    Diagonal { eig: HermitianEigen, c: C64 },
    /// Constant but non-normal.
    Dense(CMatrix),
    Path {
        g: MatrixFn,
        breakpoints: Vec<f64>,
        spacing: f64,
        substep: f64,
        checkpoints: Mutex<Vec<Option<CMatrix>>>,
        cursor: Mutex<Option<(f64, CMatrix)>>,
    },
}

pub struct PropagatorPath {
    dim: usize,
    horizon: f64,
    flow: Flow,
}

impl PropagatorPath {
    /// Path for a time-dependent `G` on `[0, horizon]`. `g_norm` bounds
    /// `||G(s)||` and caps the Magnus step.
    pub fn new(g: MatrixFn, breakpoints: Vec<f64>, horizon: f64, g_norm: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(ApsError::InvalidParameter(format!("path horizon must be positive, got {horizon}")));
        }
        let dim = g(0.0).dim();
        let spacing = horizon / CHECKPOINTS as f64;
        let mut substep = spacing / SUBSTEPS_PER_CHECKPOINT as f64;
        if g_norm > 0.0 {
            substep = substep.min(0.05 / g_norm);
        }
        let mut cps = vec![None; CHECKPOINTS + 1];
        cps[0] = Some(CMatrix::identity(dim));
        Ok(Self {
            dim,
            horizon,
            flow: Flow::Path {
                g,
                breakpoints,
                spacing,
                substep,
                checkpoints: Mutex::new(cps),
                cursor: Mutex::new(None),
            },
        })
    }

    /// Path for a constant `G`.
    pub fn constant(g: &CMatrix, horizon: f64) -> Self {
        let dim = g.dim();
        let tol = 1e-14 * g.max_abs().max(1.0);
        let flow = if g.is_hermitian(tol) {
            Flow::Diagonal { eig: g.hermitian_eigen(), c: C64::new(1.0, 0.0) }
        } else if g.is_anti_hermitian(tol) {
            Flow::Diagonal { eig: g.scale(-I).hermitian_eigen(), c: I }
        } else {
            Flow::Dense(g.clone())
        };
        Self { dim, horizon, flow }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `U(s)`; exactly the identity at `s = 0`.
    pub fn at(&self, s: f64) -> CMatrix {
        if s == 0.0 {
            return CMatrix::identity(self.dim);
        }
        match &self.flow {
            Flow::Diagonal { eig, c } => eig.apply(|x| (-c * x * s).exp()),
            Flow::Dense(g) => expm(&g.scale_real(-s)).unwrap_or_else(|_| expm_taylor(&g.scale_real(-s))),
            Flow::Path { g, breakpoints, spacing, substep, checkpoints, cursor } => {
                let s = s.clamp(0.0, self.horizon);
                let k = ((s / spacing).floor() as usize).min(CHECKPOINTS);
                let base = {
                    let mut cps = checkpoints.lock().expect("checkpoint lock");
                    let mut last = (0..=k).rev().find(|&j| cps[j].is_some()).expect("checkpoint 0 set");
                    while last < k {
                        let u = cps[last].clone().expect("present");
                        let next = magnus4_propagate(
                            g.as_ref(),
                            breakpoints,
                            last as f64 * spacing,
                            (last + 1) as f64 * spacing,
                            *substep,
                            u,
                        );
                        cps[last + 1] = Some(next);
                        last += 1;
                    }
                    (k as f64 * spacing, cps[k].clone().expect("present"))
                };
                let mut cur = cursor.lock().expect("cursor lock");
                let (from, start) = match cur.as_ref() {
                    Some((cs, cu)) if *cs >= base.0 && *cs <= s => (*cs, cu.clone()),
                    _ => base,
                };
                let u = magnus4_propagate(g.as_ref(), breakpoints, from, s, *substep, start);
                *cur = Some((s, u.clone()));
                u
            }
        }
    }

    /// `U(s)^{-1}`. Closed form for constant normal generators, LU otherwise.
    pub fn inverse_at(&self, s: f64) -> CMatrix {
        self.with_inverse(s).1
    }

    /// `(U(s), U(s)^{-1})` with a single propagation.
    pub fn with_inverse(&self, s: f64) -> (CMatrix, CMatrix) {
        if s == 0.0 {
            return (CMatrix::identity(self.dim), CMatrix::identity(self.dim));
        }
        match &self.flow {
            Flow::Diagonal { eig, c } => {
                (eig.apply(|x| (-c * x * s).exp()), eig.apply(|x| (c * x * s).exp()))
            }
            Flow::Dense(g) => {
                let e = |x: f64| expm(&g.scale_real(x)).unwrap_or_else(|_| expm_taylor(&g.scale_real(x)));
                (e(-s), e(s))
            }
            Flow::Path { .. } => {
                let u = self.at(s);
                let inv = u.inverse().expect("propagators are invertible");
                (u, inv)
            }
        }
    }
}
