//! Amplitude-phase separation of `T exp(-int A)`.
//!
//! Phase form: `T exp(-int A) = U_p T exp(-int A_p)` with
//! `U_p = T exp(-i int A2)` and `A_p = U_p^dagger A1 U_p`.
//!
//! Amplitude form: `T exp(-int A) = U_a T exp(-i int A_a)` with
//! `U_a = T exp(-int A1)` and `A_a = U_a^{-1} A2 U_a`. `U_a` is not unitary,
//! so the inverse (not the adjoint) is what makes the identity exact.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ApsError, Result};
use crate::operators::matrix::I;
use crate::operators::oracle::{ordered_exponential, time_ordered_exp, DEFAULT_MAX_STEPS};
use crate::operators::{expm, CMatrix, Generator, PropagatorPath};
use crate::report::{EvolutionReport, Evolved};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApsKind {
    Phase,
    Amplitude,
}

pub struct ApsFactorization {
    kind: ApsKind,
    base: Generator,
    integrator: PropagatorPath,
    oracle_tol: f64,
}

fn factorize(gen: &Generator, kind: ApsKind, oracle_tol: f64) -> Result<ApsFactorization> {
    if !(oracle_tol > 0.0) {
        return Err(ApsError::InvalidParameter(format!("oracle tolerance must be positive, got {oracle_tol}")));
    }
    let integrand = move |g: &Generator, s: f64| match kind {
        ApsKind::Phase => g.anti_hermitian_at(s).scale(I),
        ApsKind::Amplitude => g.hermitian_at(s),
    };
    let integrator = match gen.as_constant() {
        Some(_) => PropagatorPath::constant(&integrand(gen, 0.0), gen.horizon()),
        None => {
            let shared = Arc::new(gen.clone());
            let norm = match kind {
                ApsKind::Phase => gen.bounds().a2_max,
                ApsKind::Amplitude => gen.bounds().a1_max,
            };
            PropagatorPath::new(
                Arc::new(move |s| integrand(&shared, s)),
                gen.breakpoints(),
                gen.horizon(),
                norm,
            )?
        }
    };
    Ok(ApsFactorization { kind, base: gen.clone(), integrator, oracle_tol })
}

/// Phase-driven factorization: integrator `U_p`, rotated `A_p`.
pub fn phase_factorize(gen: &Generator, oracle_tol: f64) -> Result<ApsFactorization> {
    factorize(gen, ApsKind::Phase, oracle_tol)
}

/// Amplitude-driven factorization: integrator `U_a`, rotated `A_a`.
pub fn amplitude_factorize(gen: &Generator, oracle_tol: f64) -> Result<ApsFactorization> {
    factorize(gen, ApsKind::Amplitude, oracle_tol)
}

impl ApsFactorization {
    pub fn kind(&self) -> ApsKind {
        self.kind
    }

    pub fn base(&self) -> &Generator {
        &self.base
    }

    pub fn oracle_tol(&self) -> f64 {
        self.oracle_tol
    }

    /// `U_p(t)` or `U_a(t)`.
    pub fn integrator(&self, t: f64) -> Result<CMatrix> {
        self.base.check_time(t)?;
        Ok(self.integrator.at(t))
    }

    /// `A_p(t)` or `A_a(t)`.
    pub fn rotated(&self, t: f64) -> Result<CMatrix> {
        self.base.check_time(t)?;
        Ok(self.rotated_at(t))
    }

    fn rotated_at(&self, t: f64) -> CMatrix {
        match self.kind {
            ApsKind::Phase => {
                let u = self.integrator.at(t);
                u.adjoint().matmul(&self.base.hermitian_at(t)).matmul(&u)
            }
            ApsKind::Amplitude => {
                let (u, inv) = self.integrator.with_inverse(t);
                inv.matmul(&self.base.anti_hermitian_at(t)).matmul(&u)
            }
        }
    }

    /// `U_a(t)^dagger A2(t) U_a(t)`: the adjoint-conjugated amplitude sampler.
    /// Hermitian, but it does not reproduce the propagator when `A1` and
    /// `A2` fail to commute.
    pub fn rotated_adjoint_form(&self, t: f64) -> Result<CMatrix> {
        if self.kind != ApsKind::Amplitude {
            return Err(ApsError::Unsupported("adjoint form is defined for the amplitude factorization".into()));
        }
        self.base.check_time(t)?;
        let u = self.integrator.at(t);
        Ok(u.adjoint().matmul(&self.base.anti_hermitian_at(t)).matmul(&u))
    }

    /// Integrand of the remaining ordered exponential: `A_p` or `i A_a`.
    fn remainder_integrand(&self, t: f64) -> CMatrix {
        match self.kind {
            ApsKind::Phase => self.rotated_at(t),
            ApsKind::Amplitude => self.rotated_at(t).scale(I),
        }
    }
}

/// Compares `integrator(t) * T exp(-int remainder)` with the direct ordered
/// exponential. Both oracles run at `tol`; the reported bound is `10 tol`.
pub fn verify_identity(f: &ApsFactorization, t: f64, tol: f64) -> Result<EvolutionReport> {
    let start = std::time::Instant::now();
    f.base.check_time(t)?;
    let lhs = time_ordered_exp(&f.base, t, tol)?.propagator;
    let rest = ordered_exponential(
        |s| f.remainder_integrand(s),
        &f.base.breakpoints(),
        0.0,
        t,
        tol,
        DEFAULT_MAX_STEPS,
    )?
    .propagator;
    let rhs = f.integrator.at(t).matmul(&rest);
    let method = match f.kind {
        ApsKind::Phase => "aps-phase-identity",
        ApsKind::Amplitude => "aps-amplitude-identity",
    };
    let mut r = EvolutionReport::new(method, Evolved::Matrix(rhs), Evolved::Matrix(lhs), Some(10.0 * tol));
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}

/// `|| (e^{-i A2 t/n} e^{-A1 t/n})^n - e^{-A t} ||` for a constant generator.
pub fn product_formula_check(a: &CMatrix, t: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(ApsError::InvalidParameter("product formula needs n >= 1".into()));
    }
    a.ensure_finite("product formula input")?;
    let (a1, a2) = crate::operators::cartesian_split(a);
    let dt = t / n as f64;
    let step = expm(&a2.scale(C64::new(0.0, -dt)))?.matmul(&expm(&a1.scale_real(-dt))?);
    let mut p = CMatrix::identity(a.dim());
    let mut base = step;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            p = p.matmul(&base);
        }
        base = base.matmul(&base);
        k >>= 1;
    }
    let exact = expm(&a.scale_real(-t))?;
    Ok((&p - &exact).spectral_norm())
}
