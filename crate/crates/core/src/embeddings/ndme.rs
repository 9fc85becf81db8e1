//! Dilation of `du/dt = -A u` into a Lindblad equation.
//!
//! With `H = diag(A2, 0)` and one jump operator `F = diag(sqrt(2 A1), 0)` on
//! `C^n (+) C^k`, the top-right `n x k` block of the density matrix obeys
//! `dX/dt = -A X` whatever the diagonal blocks hold.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ApsError, Result};
use crate::operators::audit::require_psd;
use crate::operators::matrix::I;
use crate::operators::propagator::magnus4_propagate;
use crate::operators::{CMatrix, Generator};

/// Largest tolerated `|tr rho(t) - tr rho(0)|`.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityState {
    pub rho: CMatrix,
}

impl DensityState {
    /// Checks finiteness, Hermiticity and positivity.
    pub fn new(rho: CMatrix) -> Result<Self> {
        rho.ensure_finite("density matrix")?;
        let scale = rho.max_abs().max(1.0);
        let asym = rho.asymmetry();
        if asym > 1e-10 * scale {
            return Err(ApsError::NotHermitian { at: "density matrix".into(), asymmetry: asym });
        }
        let lmin = rho.hermitian_eigen().min();
        if lmin < -1e-10 * scale {
            return Err(ApsError::NotPsd { at: "density matrix".into(), min_eigenvalue: lmin });
        }
        Ok(Self { rho })
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }
}

pub struct NdmeEmbedding {
    base: Generator,
    aux: usize,
    /// `(H, F)` for constant generators.
    cached: Option<(CMatrix, CMatrix)>,
}

/// PSD square root.
fn sqrt_psd(m: &CMatrix) -> CMatrix {
    m.hermitian_eigen().apply(|x| C64::new(x.max(0.0).sqrt(), 0.0))
}

fn pad(m: &CMatrix, aux: usize) -> CMatrix {
    m.block_diag(&CMatrix::zeros(aux))
}

/// Embedding with a `k`-dimensional auxiliary register.
pub fn ndme_embed(gen: &Generator, aux_dim: usize) -> Result<NdmeEmbedding> {
    if aux_dim == 0 {
        return Err(ApsError::InvalidParameter("auxiliary dimension must be positive".into()));
    }
    require_psd(gen, 129, 1e-8)?;
    let cached = gen.as_constant().map(|_| {
        (pad(&gen.anti_hermitian_at(0.0), aux_dim), pad(&sqrt_psd(&gen.hermitian_at(0.0).scale_real(2.0)), aux_dim))
    });
    Ok(NdmeEmbedding { base: gen.clone(), aux: aux_dim, cached })
}

impl NdmeEmbedding {
    pub fn system_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn aux_dim(&self) -> usize {
        self.aux
    }

    pub fn dim(&self) -> usize {
        self.base.dim() + self.aux
    }

    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        match &self.cached {
            Some((h, _)) => h.clone(),
            None => pad(&self.base.anti_hermitian_at(t), self.aux),
        }
    }

    pub fn jump(&self, t: f64) -> CMatrix {
        match &self.cached {
            Some((_, f)) => f.clone(),
            None => pad(&sqrt_psd(&self.base.hermitian_at(t).scale_real(2.0)), self.aux),
        }
    }

    /// `[[X X^dagger, X], [X^dagger, I]]` for the `n x k` block `x` (row-major).
    pub fn initial_state(&self, x: &[C64]) -> Result<DensityState> {
        let (n, k) = (self.system_dim(), self.aux);
        if x.len() != n * k {
            return Err(ApsError::DimensionMismatch { expected: n * k, found: x.len() });
        }
        let top_left = CMatrix::from_fn(n, |i, j| (0..k).map(|c| x[i * k + c] * x[j * k + c].conj()).sum());
        self.initial_state_with(x, &top_left)
    }

    /// Same off-diagonal block with a caller-chosen top-left block. The
    /// result need not be PSD; only the off-diagonal block is read out.
    pub fn initial_state_with(&self, x: &[C64], top_left: &CMatrix) -> Result<DensityState> {
        let (n, k) = (self.system_dim(), self.aux);
        if x.len() != n * k {
            return Err(ApsError::DimensionMismatch { expected: n * k, found: x.len() });
        }
        top_left.ensure_dim(n)?;
        let mut rho = CMatrix::zeros(n + k);
        for i in 0..n {
            for j in 0..n {
                rho[(i, j)] = top_left[(i, j)];
            }
            for c in 0..k {
                rho[(i, n + c)] = x[i * k + c];
                rho[(n + c, i)] = x[i * k + c].conj();
            }
        }
        for c in 0..k {
            rho[(n + c, n + c)] = C64::new(1.0, 0.0);
        }
        rho.ensure_finite("initial state")?;
        Ok(DensityState { rho })
    }

    /// Top-right `n x k` block, row-major.
    pub fn readout(&self, state: &DensityState) -> Vec<C64> {
        state.rho.block(0, self.system_dim(), self.system_dim(), self.aux)
    }
}

/// `-i[H, rho] + sum_k (F rho F^dagger - {F^dagger F, rho} / 2)`
pub fn lindblad_rhs(h: &CMatrix, fs: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let mut out = (&h.matmul(rho) - &rho.matmul(h)).scale(-I);
    for f in fs {
        let fd = f.adjoint();
        let fdf = fd.matmul(f);
        out += &f.matmul(rho).matmul(&fd);
        out.axpy(C64::new(-0.5, 0.0), &(&fdf.matmul(rho) + &rho.matmul(&fdf)));
    }
    out
}

fn rk4(
    rhs: &dyn Fn(f64, &CMatrix) -> CMatrix,
    rho: &CMatrix,
    t0: f64,
    h: f64,
) -> CMatrix {
    let k1 = rhs(t0, rho);
    let y2 = {
        let mut y = rho.clone();
        y.axpy(C64::new(0.5 * h, 0.0), &k1);
        y
    };
    let k2 = rhs(t0 + 0.5 * h, &y2);
    let y3 = {
        let mut y = rho.clone();
        y.axpy(C64::new(0.5 * h, 0.0), &k2);
        y
    };
    let k3 = rhs(t0 + 0.5 * h, &y3);
    let y4 = {
        let mut y = rho.clone();
        y.axpy(C64::new(h, 0.0), &k3);
        y
    };
    let k4 = rhs(t0 + h, &y4);
    let mut next = rho.clone();
    next.axpy(C64::new(h / 6.0, 0.0), &k1);
    next.axpy(C64::new(h / 3.0, 0.0), &k2);
    next.axpy(C64::new(h / 3.0, 0.0), &k3);
    next.axpy(C64::new(h / 6.0, 0.0), &k4);
    // Keep exact Hermiticity; the trace is unchanged by this.
    next.hermitian_part()
}

fn check_run(t: f64, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(ApsError::InvalidParameter("at least one step is required".into()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ApsError::InvalidParameter(format!("time must be non-negative and finite, got {t}")));
    }
    Ok(())
}

fn check_trace(start: f64, end: f64) -> Result<()> {
    let drift = (end - start).abs();
    if drift > TRACE_DRIFT_LIMIT {
        return Err(ApsError::TraceDrift { drift, limit: TRACE_DRIFT_LIMIT });
    }
    Ok(())
}

/// Classical RK4 for the Lindblad equation with time-dependent `H` and jumps.
pub fn lindblad_evolve(
    h: &dyn Fn(f64) -> CMatrix,
    fs: &[&dyn Fn(f64) -> CMatrix],
    rho0: &DensityState,
    t: f64,
    steps: usize,
) -> Result<DensityState> {
    check_run(t, steps)?;
    let dt = t / steps as f64;
    let rhs = |s: f64, rho: &CMatrix| {
        let jumps: Vec<CMatrix> = fs.iter().map(|f| f(s)).collect();
        lindblad_rhs(&h(s), &jumps, rho)
    };
    let mut rho = rho0.rho.clone();
    for j in 0..steps {
        rho = rk4(&rhs, &rho, j as f64 * dt, dt);
    }
    rho.ensure_finite("evolved state")?;
    check_trace(rho0.trace(), rho.trace().re)?;
    Ok(DensityState { rho })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteractionRun {
    /// `rho_p(t) = U_p^dagger rho(t) U_p` evolved without `H`.
    pub interaction: DensityState,
    /// `(s, rho_p(s))` at most `TRAJECTORY_POINTS + 1` evenly strided times,
    /// including both ends.
    pub trajectory: Vec<(f64, DensityState)>,
    /// `U_p rho_p(t) U_p^dagger`.
    pub reconstructed: DensityState,
    /// Direct evolution of the full equation.
    pub direct: DensityState,
    /// Spectral norm of `reconstructed - direct`.
    pub mismatch: f64,
}

/// Snapshot budget of an interaction-picture run.
pub const TRAJECTORY_POINTS: usize = 256;

/// Evolves in the frame of `U_p = T exp(-i int H)`, where the jumps become
/// `U_p^dagger F U_p`, and compares with direct evolution.
pub fn interaction_picture(
    h: &dyn Fn(f64) -> CMatrix,
    fs: &[&dyn Fn(f64) -> CMatrix],
    rho0: &DensityState,
    t: f64,
    steps: usize,
) -> Result<InteractionRun> {
    check_run(t, steps)?;
    let dim = rho0.rho.dim();
    let dt = t / steps as f64;
    let phase = |s: f64| h(s).scale(I);
    let advance = |u: &CMatrix, a: f64, len: f64| magnus4_propagate(&phase, &[], a, a + len, len, u.clone());
    let mut u = CMatrix::identity(dim);
    let mut rho = rho0.rho.clone();
    let stride = steps.div_ceil(TRAJECTORY_POINTS);
    let mut trajectory = vec![(0.0, rho0.clone())];
    for j in 0..steps {
        let t0 = j as f64 * dt;
        let u_half = advance(&u, t0, 0.5 * dt);
        let u_next = advance(&u_half, t0 + 0.5 * dt, 0.5 * dt);
        let frames = [(t0, &u), (t0 + 0.5 * dt, &u_half), (t0 + dt, &u_next)];
        let rhs = |s: f64, r: &CMatrix| {
            let up = frames
                .iter()
                .min_by(|a, b| (a.0 - s).abs().total_cmp(&(b.0 - s).abs()))
                .map(|f| f.1)
                .expect("three frames");
            let upd = up.adjoint();
            let jumps: Vec<CMatrix> = fs.iter().map(|f| upd.matmul(&f(s)).matmul(up)).collect();
            lindblad_rhs(&CMatrix::zeros(dim), &jumps, r)
        };
        rho = rk4(&rhs, &rho, t0, dt);
        u = u_next;
        if (j + 1) % stride == 0 || j + 1 == steps {
            trajectory.push(((j + 1) as f64 * dt, DensityState { rho: rho.clone() }));
        }
    }
    rho.ensure_finite("interaction-picture state")?;
    check_trace(rho0.trace(), rho.trace().re)?;
    let reconstructed = u.matmul(&rho).matmul(&u.adjoint());
    let direct = lindblad_evolve(h, fs, rho0, t, steps)?;
    let mismatch = (&reconstructed - &direct.rho).spectral_norm();
    Ok(InteractionRun {
        interaction: DensityState { rho },
        trajectory,
        reconstructed: DensityState { rho: reconstructed },
        direct,
        mismatch,
    })
}
