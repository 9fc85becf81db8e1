//! Time-dependent generators `A(t)` on `[0, T]`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::CMatrix;
use crate::error::{ApsError, Result};

/// Relative slack when checking `t <= T`.
const HORIZON_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    Constant(CMatrix),
    /// `pieces[j]` is active on `[breakpoints[j], breakpoints[j + 1])`.
    Piecewise { breakpoints: Vec<f64>, pieces: Vec<CMatrix> },
    /// `A(t) = sum_k coefficients[k] t^k`
    Polynomial { coefficients: Vec<CMatrix> },
}

/// Upper bounds on the generator norms over the horizon, plus a lower bound on
/// the smallest eigenvalue of the Hermitian part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorBounds {
    pub a_max: f64,
    pub a1_max: f64,
    pub a2_max: f64,
    /// Bound on `||dA1/dt||`; infinite when the generator jumps.
    pub lhat_max: f64,
    pub lhat_applicable: bool,
    pub lambda_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorSpec", into = "GeneratorSpec")]
pub struct Generator {
    dim: usize,
    horizon: f64,
    kind: GeneratorKind,
    /// Cartesian parts `(A1, A2)` of each piece or coefficient.
    parts: Vec<(CMatrix, CMatrix)>,
    bounds: GeneratorBounds,
}

impl Generator {
    pub fn constant(a: CMatrix) -> Result<Self> {
        Self::build(a.dim(), f64::INFINITY, GeneratorKind::Constant(a))
    }

    pub fn constant_with_horizon(a: CMatrix, horizon: f64) -> Result<Self> {
        Self::build(a.dim(), horizon, GeneratorKind::Constant(a))
    }

    pub fn piecewise(breakpoints: Vec<f64>, pieces: Vec<CMatrix>) -> Result<Self> {
        let dim = pieces.first().map(CMatrix::dim).unwrap_or(0);
        let horizon = breakpoints.last().copied().unwrap_or(0.0);
        Self::build(dim, horizon, GeneratorKind::Piecewise { breakpoints, pieces })
    }

    pub fn polynomial(coefficients: Vec<CMatrix>, horizon: f64) -> Result<Self> {
        let dim = coefficients.first().map(CMatrix::dim).unwrap_or(0);
        Self::build(dim, horizon, GeneratorKind::Polynomial { coefficients })
    }

    fn build(dim: usize, horizon: f64, kind: GeneratorKind) -> Result<Self> {
        if dim == 0 {
            return Err(ApsError::InvalidParameter("generator dimension must be positive".into()));
        }
        if !(horizon > 0.0) || horizon.is_nan() {
            return Err(ApsError::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        let mats: &[CMatrix] = match &kind {
            GeneratorKind::Constant(a) => std::slice::from_ref(a),
            GeneratorKind::Piecewise { breakpoints, pieces } => {
                if pieces.is_empty() || breakpoints.len() != pieces.len() + 1 {
                    return Err(ApsError::InvalidParameter(
                        "piecewise generator needs one more breakpoint than pieces".into(),
                    ));
                }
                if breakpoints[0] != 0.0 {
                    return Err(ApsError::InvalidParameter("first breakpoint must be 0".into()));
                }
                if breakpoints.iter().any(|b| !b.is_finite())
                    || breakpoints.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(ApsError::InvalidParameter(
                        "breakpoints must be finite and strictly increasing".into(),
                    ));
                }
                pieces
            }
            GeneratorKind::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(ApsError::InvalidParameter("polynomial needs coefficients".into()));
                }
                if !horizon.is_finite() {
                    return Err(ApsError::InvalidParameter("polynomial horizon must be finite".into()));
                }
                coefficients
            }
        };
        for m in mats {
            m.ensure_dim(dim)?;
            m.ensure_finite("generator")?;
        }
        let parts: Vec<(CMatrix, CMatrix)> =
            mats.iter().map(|m| (m.hermitian_part(), m.anti_hermitian_part())).collect();
        let bounds = match &kind {
            GeneratorKind::Constant(a) => GeneratorBounds {
                a_max: a.spectral_norm(),
                a1_max: parts[0].0.spectral_norm(),
                a2_max: parts[0].1.spectral_norm(),
                lhat_max: 0.0,
                lhat_applicable: true,
                lambda_min: parts[0].0.hermitian_eigen().min(),
            },
            GeneratorKind::Piecewise { pieces, .. } => {
                let fold = |f: &dyn Fn(usize) -> f64| (0..pieces.len()).map(f).fold(0.0, f64::max);
                GeneratorBounds {
                    a_max: fold(&|j| pieces[j].spectral_norm()),
                    a1_max: fold(&|j| parts[j].0.spectral_norm()),
                    a2_max: fold(&|j| parts[j].1.spectral_norm()),
                    lhat_max: f64::INFINITY,
                    lhat_applicable: false,
                    lambda_min: parts
                        .iter()
                        .map(|p| p.0.hermitian_eigen().min())
                        .fold(f64::INFINITY, f64::min),
                }
            }
            GeneratorKind::Polynomial { coefficients } => {
                let t = horizon;
                let weighted = |norms: Vec<f64>| -> f64 {
                    norms.iter().enumerate().map(|(k, x)| x * t.powi(k as i32)).sum()
                };
                let a1n: Vec<f64> = parts.iter().map(|p| p.0.spectral_norm()).collect();
                let lhat: f64 = a1n
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, x)| k as f64 * x * t.powi(k as i32 - 1))
                    .sum();
                let tail: f64 = a1n.iter().enumerate().skip(1).map(|(k, x)| x * t.powi(k as i32)).sum();
                GeneratorBounds {
                    a_max: weighted(coefficients.iter().map(CMatrix::spectral_norm).collect()),
                    a1_max: weighted(a1n.clone()),
                    a2_max: weighted(parts.iter().map(|p| p.1.spectral_norm()).collect()),
                    lhat_max: lhat,
                    lhat_applicable: true,
                    lambda_min: parts[0].0.hermitian_eigen().min() - tail,
                }
            }
        };
        Ok(Self { dim, horizon, kind, parts, bounds })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn bounds(&self) -> &GeneratorBounds {
        &self.bounds
    }

    pub fn as_constant(&self) -> Option<&CMatrix> {
        match &self.kind {
            GeneratorKind::Constant(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Interior discontinuities.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            GeneratorKind::Piecewise { breakpoints, .. } => {
                breakpoints[1..breakpoints.len() - 1].to_vec()
            }
            _ => Vec::new(),
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 || t > self.horizon * (1.0 + HORIZON_SLACK) {
            return Err(ApsError::TimeOutOfRange { t, horizon: self.horizon });
        }
        Ok(())
    }

    pub fn sample(&self, t: f64) -> Result<CMatrix> {
        self.check_time(t)?;
        Ok(self.at(t))
    }

    /// `A(t)` without the horizon check.
    pub fn at(&self, t: f64) -> CMatrix {
        match &self.kind {
            GeneratorKind::Constant(a) => a.clone(),
            GeneratorKind::Piecewise { pieces, .. } => pieces[self.piece_index(t)].clone(),
            GeneratorKind::Polynomial { coefficients } => horner(coefficients.iter(), t),
        }
    }

    /// `A1(t)` without the horizon check.
    pub fn hermitian_at(&self, t: f64) -> CMatrix {
        self.part_at(t, |p| &p.0)
    }

    /// `A2(t)` without the horizon check.
    pub fn anti_hermitian_at(&self, t: f64) -> CMatrix {
        self.part_at(t, |p| &p.1)
    }

    fn part_at(&self, t: f64, pick: impl Fn(&(CMatrix, CMatrix)) -> &CMatrix) -> CMatrix {
        match &self.kind {
            GeneratorKind::Constant(_) => pick(&self.parts[0]).clone(),
            GeneratorKind::Piecewise { .. } => pick(&self.parts[self.piece_index(t)]).clone(),
            GeneratorKind::Polynomial { .. } => horner(self.parts.iter().map(pick), t),
        }
    }

    fn piece_index(&self, t: f64) -> usize {
        match &self.kind {
            GeneratorKind::Piecewise { breakpoints, pieces } => {
                let k = breakpoints.partition_point(|&b| b <= t);
                k.saturating_sub(1).min(pieces.len() - 1)
            }
            _ => 0,
        }
    }

    /// Hermitian part as a standalone generator with the same time structure.
    pub fn hermitian_generator(&self) -> Generator {
        self.map_parts(|p| p.0.clone())
    }

    /// Anti-Hermitian part `A2` as a standalone generator.
    pub fn anti_hermitian_generator(&self) -> Generator {
        self.map_parts(|p| p.1.clone())
    }

    fn map_parts(&self, f: impl Fn(&(CMatrix, CMatrix)) -> CMatrix) -> Generator {
        let mats: Vec<CMatrix> = self.parts.iter().map(f).collect();
        let kind = match &self.kind {
            GeneratorKind::Constant(_) => GeneratorKind::Constant(mats[0].clone()),
            GeneratorKind::Piecewise { breakpoints, .. } => {
                GeneratorKind::Piecewise { breakpoints: breakpoints.clone(), pieces: mats }
            }
            GeneratorKind::Polynomial { .. } => GeneratorKind::Polynomial { coefficients: mats },
        };
        Self::build(self.dim, self.horizon, kind).expect("parts of a valid generator are valid")
    }

    /// Applies `f` to every piece or coefficient. `f` must be linear for
    /// polynomial generators to keep the meaning `f(A(t))`.
    pub fn map_linear(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Generator> {
        let kind = match &self.kind {
            GeneratorKind::Constant(a) => GeneratorKind::Constant(f(a)),
            GeneratorKind::Piecewise { breakpoints, pieces } => GeneratorKind::Piecewise {
                breakpoints: breakpoints.clone(),
                pieces: pieces.iter().map(&f).collect(),
            },
            GeneratorKind::Polynomial { coefficients } => {
                GeneratorKind::Polynomial { coefficients: coefficients.iter().map(&f).collect() }
            }
        };
        let dim = match &kind {
            GeneratorKind::Constant(a) => a.dim(),
            GeneratorKind::Piecewise { pieces, .. } => pieces[0].dim(),
            GeneratorKind::Polynomial { coefficients } => coefficients[0].dim(),
        };
        Self::build(dim, self.horizon, kind)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("generator serializes")
    }
}

fn horner<'a>(coefficients: impl DoubleEndedIterator<Item = &'a CMatrix>, t: f64) -> CMatrix {
    let mut it = coefficients.rev();
    let mut acc = it.next().expect("non-empty").clone();
    for c in it {
        acc = acc.scale_real(t);
        acc += c;
    }
    acc
}

/// On-disk form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum GeneratorSpec {
    Constant {
        dim: usize,
        entries: CMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<f64>,
    },
    Piecewise {
        dim: usize,
        breakpoints: Vec<f64>,
        pieces: Vec<CMatrix>,
    },
    Polynomial {
        dim: usize,
        horizon: f64,
        coefficients: Vec<CMatrix>,
    },
}

impl TryFrom<GeneratorSpec> for Generator {
    type Error = ApsError;

    fn try_from(spec: GeneratorSpec) -> Result<Self> {
        let (dim, g) = match spec {
            GeneratorSpec::Constant { dim, entries, horizon } => {
                (dim, Generator::constant_with_horizon(entries, horizon.unwrap_or(f64::INFINITY))?)
            }
            GeneratorSpec::Piecewise { dim, breakpoints, pieces } => {
                (dim, Generator::piecewise(breakpoints, pieces)?)
            }
            GeneratorSpec::Polynomial { dim, horizon, coefficients } => {
                (dim, Generator::polynomial(coefficients, horizon)?)
            }
        };
        if g.dim != dim {
            return Err(ApsError::DimensionMismatch { expected: dim, found: g.dim });
        }
        Ok(g)
    }
}

impl From<Generator> for GeneratorSpec {
    fn from(g: Generator) -> Self {
        match g.kind {
            GeneratorKind::Constant(a) => GeneratorSpec::Constant {
                dim: g.dim,
                entries: a,
                horizon: g.horizon.is_finite().then_some(g.horizon),
            },
            GeneratorKind::Piecewise { breakpoints, pieces } => {
                GeneratorSpec::Piecewise { dim: g.dim, breakpoints, pieces }
            }
            GeneratorKind::Polynomial { coefficients } => {
                GeneratorSpec::Polynomial { dim: g.dim, horizon: g.horizon, coefficients }
            }
        }
    }
}

/// Scalar generator helper, mostly for tests and examples.
pub fn scalar(a: C64) -> CMatrix {
    CMatrix::from_diag(&[a])
}
