use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stencil::{liouville_factors, tridiagonal};
use crate::error::{invalid, Error, Result};
use crate::potentials::PotentialSpec;
use crate::radial::{RadialField, RadialGrid};

/// Largest grid handled by the dense eigensolver unless configured otherwise.
pub const DEFAULT_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `Δ²`
    Free,
    /// `H = Δ² + V`
    Full,
}

#[derive(Debug, Clone)]
pub struct OperatorOptions {
    pub budget: usize,
    /// Directory for the binary eigendecomposition cache; `None` disables it.
    pub cache_dir: Option<PathBuf>,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, cache_dir: None }
    }
}

/// Scalar function applied through the eigen-expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFunction {
    /// `e^{itμ}`
    ExpIt(f64),
    /// `e^{-tμ}`, `t >= 0`
    ExpMinusT(f64),
    /// `μ^{s/4}`, `s ∈ [0, 4]`
    Power(f64),
    /// `(μ - z)^{-1}`
    Resolvent(Complex64),
}

/// Dense eigendecomposition of the discrete `Δ²` or `Δ² + V`.
///
/// The matrix is assembled in the Liouville variable, where it is symmetric
/// in the flat inner product; `modes` holds flat-orthonormal eigenvectors as
/// columns. A field `u` has modal coefficients `c = Φᵀ (s ∘ u)` with
/// `s = r^{(n-1)/2}`.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    kind: OperatorKind,
    grid: Arc<RadialGrid>,
    potential: Option<PotentialSpec>,
    potential_values: Vec<f64>,
    eigenvalues: Vec<f64>,
    modes: DMatrix<f64>,
    liouville: Vec<f64>,
}

pub fn build_operator(
    kind: OperatorKind,
    grid: &Arc<RadialGrid>,
    spec: Option<&PotentialSpec>,
) -> Result<SpectralOperator> {
    build_operator_with(kind, grid, spec, &OperatorOptions::default())
}

pub fn build_operator_with(
    kind: OperatorKind,
    grid: &Arc<RadialGrid>,
    spec: Option<&PotentialSpec>,
    opts: &OperatorOptions,
) -> Result<SpectralOperator> {
    match (kind, spec) {
        (OperatorKind::Free, Some(_)) => return Err(invalid("potential", "the free operator takes no potential")),
        (OperatorKind::Full, None) => return Err(invalid("potential", "the full operator needs a potential")),
        _ => {}
    }
    if let Some(spec) = spec {
        spec.validate()?;
        if spec.dimension != grid.dimension() {
            return Err(Error::GridMismatch);
        }
    }
    let points = grid.len();
    if points > opts.budget {
        return Err(Error::OperatorBudget { points, budget: opts.budget });
    }

    if let Some(dir) = &opts.cache_dir {
        let path = super::cache::cache_path(dir, kind, grid, spec);
        if let Ok(op) = super::cache::load_operator(&path, kind, grid, spec) {
            return Ok(op);
        }
        let op = assemble(kind, grid, spec)?;
        // a cache that cannot be written is not an error for the computation
        let _ = super::cache::save_operator(&op, &path);
        return Ok(op);
    }
    assemble(kind, grid, spec)
}

fn assemble(kind: OperatorKind, grid: &Arc<RadialGrid>, spec: Option<&PotentialSpec>) -> Result<SpectralOperator> {
    let n = grid.len();
    let (diag, off) = tridiagonal(grid);
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        lap[(j, j)] = diag[j];
        if j + 1 < n {
            lap[(j, j + 1)] = off;
            lap[(j + 1, j)] = off;
        }
    }
    let potential_values: Vec<f64> = match spec {
        Some(s) => grid.nodes().iter().map(|&r| s.value(r)).collect(),
        None => vec![0.0; n],
    };

    let (values, vectors) = if potential_values.iter().all(|&v| v == 0.0) {
        // V = 0: diagonalize the Laplacian and square its spectrum.
        let eig = lap.symmetric_eigen();
        let squared: Vec<f64> = eig.eigenvalues.iter().map(|l| l * l).collect();
        (squared, eig.eigenvectors)
    } else {
        let mut h = &lap * &lap;
        for (j, v) in potential_values.iter().enumerate() {
            h[(j, j)] += v;
        }
        let eig = h.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let modes = DMatrix::from_fn(n, n, |i, k| vectors[(i, order[k])]);

    Ok(SpectralOperator {
        kind,
        grid: grid.clone(),
        potential: spec.copied(),
        potential_values,
        eigenvalues,
        modes,
        liouville: liouville_factors(grid),
    })
}

impl SpectralOperator {
    pub(crate) fn from_cached(
        kind: OperatorKind,
        grid: &Arc<RadialGrid>,
        spec: Option<&PotentialSpec>,
        eigenvalues: Vec<f64>,
        modes: DMatrix<f64>,
    ) -> Self {
        let potential_values = match spec {
            Some(s) => grid.nodes().iter().map(|&r| s.value(r)).collect(),
            None => vec![0.0; grid.len()],
        };
        Self {
            kind,
            grid: grid.clone(),
            potential: spec.copied(),
            potential_values,
            eigenvalues,
            modes,
            liouville: liouville_factors(grid),
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn potential(&self) -> Option<&PotentialSpec> {
        self.potential.as_ref()
    }

    /// `V(r_j)`; zeros for the free operator.
    pub fn potential_values(&self) -> &[f64] {
        &self.potential_values
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &DMatrix<f64> {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Heuristic zero-energy probe: true when some eigenvalue lies in `(-∞, threshold)`.
    pub fn has_eigenvalue_below(&self, threshold: f64) -> bool {
        self.eigenvalues.first().is_some_and(|&m| m < threshold)
    }

    /// `sqrt(ω h)`, the scale between flat coefficients and `L²(R^n)`.
    fn scale(&self) -> f64 {
        (self.grid.surface_constant() * self.grid.spacing()).sqrt()
    }

    /// `e_k`, normalized in the weighted inner product.
    pub fn eigenvector(&self, k: usize) -> RadialField {
        let c = 1.0 / self.scale();
        let values = self
            .modes
            .column(k)
            .iter()
            .zip(&self.liouville)
            .map(|(&phi, &s)| Complex64::new(c * phi / s, 0.0))
            .collect();
        RadialField::from_parts(self.grid.clone(), values)
    }

    /// `⟨u, v⟩ = ∫ u v̄ dx` in the weights under which the operator is symmetric.
    pub fn inner_product(&self, u: &RadialField, v: &RadialField) -> Result<Complex64> {
        self.check_grid(u)?;
        u.check_same_grid(v)?;
        let sum: Complex64 = u
            .values()
            .iter()
            .zip(v.values())
            .zip(self.grid.measure_weights())
            .map(|((a, b), w)| a * b.conj() * w)
            .sum();
        Ok(sum * self.grid.surface_constant())
    }

    pub(crate) fn check_grid(&self, u: &RadialField) -> Result<()> {
        if Arc::ptr_eq(u.grid(), &self.grid) || u.grid().same_as(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Flat modal coefficients `Φᵀ(s ∘ u)` of a batch of nodal vectors.
    pub fn analyze_batch(&self, fields: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        let n = self.len();
        let a = DMatrix::from_fn(n, 2 * fields.len(), |i, c| {
            let z = fields[c / 2][i] * self.liouville[i];
            if c % 2 == 0 {
                z.re
            } else {
                z.im
            }
        });
        let coeffs = self.modes.tr_mul(&a);
        (0..fields.len())
            .map(|k| (0..n).map(|i| Complex64::new(coeffs[(i, 2 * k)], coeffs[(i, 2 * k + 1)])).collect())
            .collect()
    }

    /// Inverse of [`Self::analyze_batch`].
    pub fn synthesize_batch(&self, coefficients: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        let n = self.len();
        let c = DMatrix::from_fn(n, 2 * coefficients.len(), |i, col| {
            let z = coefficients[col / 2][i];
            if col % 2 == 0 {
                z.re
            } else {
                z.im
            }
        });
        let w = &self.modes * c;
        (0..coefficients.len())
            .map(|k| {
                (0..n)
                    .map(|i| Complex64::new(w[(i, 2 * k)], w[(i, 2 * k + 1)]) / self.liouville[i])
                    .collect()
            })
            .collect()
    }

    pub fn analyze(&self, u: &RadialField) -> Result<Vec<Complex64>> {
        self.check_grid(u)?;
        Ok(self.analyze_batch(&[u.values()]).pop().unwrap_or_default())
    }

    pub fn synthesize(&self, coefficients: &[Complex64]) -> Result<RadialField> {
        if coefficients.len() != self.len() {
            return Err(Error::GridMismatch);
        }
        let values = self.synthesize_batch(&[coefficients]).pop().unwrap_or_default();
        RadialField::new(self.grid.clone(), values)
    }

    /// `f(μ_k)` for every eigenvalue, after validating the function's domain.
    pub fn multipliers(&self, f: SpectralFunction) -> Result<Vec<Complex64>> {
        match f {
            SpectralFunction::ExpIt(t) => {
                finite("t", t)?;
                Ok(self.eigenvalues.iter().map(|&m| Complex64::from_polar(1.0, t * m)).collect())
            }
            SpectralFunction::ExpMinusT(t) => {
                finite("t", t)?;
                if t < 0.0 {
                    return Err(invalid("t", format!("heat time must be nonnegative, got {t}")));
                }
                Ok(self.eigenvalues.iter().map(|&m| Complex64::new((-t * m).exp(), 0.0)).collect())
            }
            SpectralFunction::Power(s) => {
                if !(0.0..=4.0).contains(&s) {
                    return Err(invalid("s", format!("power must lie in [0, 4], got {s}")));
                }
                if s == 0.0 {
                    return Ok(vec![Complex64::new(1.0, 0.0); self.len()]);
                }
                if s == 4.0 {
                    return Ok(self.eigenvalues.iter().map(|&m| Complex64::new(m, 0.0)).collect());
                }
                if let Some(&low) = self.eigenvalues.first() {
                    let radius = self.spectral_radius();
                    if low < -1e-12 * radius {
                        return Err(invalid("s", format!("fractional power of an operator with eigenvalue {low}")));
                    }
                }
                Ok(self.eigenvalues.iter().map(|&m| Complex64::new(m.max(0.0).powf(s / 4.0), 0.0)).collect())
            }
            SpectralFunction::Resolvent(z) => {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(invalid("z", "resolvent point must be finite"));
                }
                let distance = self.eigenvalues.iter().map(|&m| (Complex64::new(m, 0.0) - z).norm()).fold(f64::INFINITY, f64::min);
                if distance < 1e-12 * self.spectral_radius() {
                    return Err(Error::OnSpectrum { re: z.re, im: z.im, distance });
                }
                Ok(self.eigenvalues.iter().map(|&m| 1.0 / (Complex64::new(m, 0.0) - z)).collect())
            }
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a: f64, &m| a.max(m.abs()))
    }
}

fn finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {x}")))
    }
}

/// `Σ_k f(μ_k) ⟨u, e_k⟩ e_k`.
pub fn apply_function(op: &SpectralOperator, f: SpectralFunction, u: &RadialField) -> Result<RadialField> {
    let m = op.multipliers(f)?;
    if matches!(f, SpectralFunction::Power(s) | SpectralFunction::ExpIt(s) if s == 0.0) {
        op.check_grid(u)?;
        return Ok(u.clone());
    }
    let mut c = op.analyze(u)?;
    for (ck, mk) in c.iter_mut().zip(&m) {
        *ck *= mk;
    }
    op.synthesize(&c)
}

/// `|∇|^s u = (Δ²)^{s/4} u` through the free eigen-expansion.
pub fn free_fractional_gradient(op_free: &SpectralOperator, s: f64, u: &RadialField) -> Result<RadialField> {
    if op_free.kind() != OperatorKind::Free {
        return Err(invalid("op_free", "fractional gradients need the free operator"));
    }
    apply_function(op_free, SpectralFunction::Power(s), u)
}
