//! Holomorphic potentials of closed (2,0)-forms Ω = Σ Ω_ij dz^i ∧ dw^j on a
//! product V × W of star-shaped domains.
//!
//! The potential is the integral of Ω over the product of the radial segments
//! [z₀, z] × [w₀, w]:
//!
//! ```text
//! q(z, w) = Σ_ij (z − z₀)_i (w − w₀)_j ∫₀¹∫₀¹ Ω_ij(z₀ + s(z − z₀), w₀ + t(w − w₀)) ds dt
//! ```
//!
//! It satisfies ∂_{z^i}∂_{w^j} q = Ω_ij and vanishes on V × {w₀} and {z₀} × W.
//! The `verify_*` and `check_*` functions test those contracts numerically.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::poly::Polynomial;
use crate::quadrature::GaussLegendre;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Quadrature nodes closer than this to a declared singular locus are refused.
pub const POLE_GUARD: f64 = 1e-3;

pub type CoefficientFn = dyn Fn(&[Complex64], &[Complex64]) -> DMatrix<Complex64> + Send + Sync;
pub type DistanceFn = dyn Fn(&[Complex64], &[Complex64]) -> f64 + Send + Sync;

/// A convex (hence star-shaped) factor domain in Cⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Region {
    Entire,
    /// Every coordinate has positive imaginary part.
    UpperHalf,
    /// Every coordinate has negative imaginary part.
    LowerHalf,
    Ball { center: Vec<Complex64>, radius: f64 },
}

impl Region {
    pub fn contains(&self, p: &[Complex64]) -> bool {
        if p.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return false;
        }
        match self {
            Region::Entire => true,
            Region::UpperHalf => p.iter().all(|c| c.im > 0.0),
            Region::LowerHalf => p.iter().all(|c| c.im < 0.0),
            Region::Ball { center, radius } => {
                center.len() == p.len()
                    && p.iter().zip(center).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() < *radius
            }
        }
    }
}

/// A closed holomorphic (2,0)-form with only mixed dz ∧ dw components.
#[derive(Clone)]
pub struct ClosedHoloForm {
    dim: usize,
    coeff: Arc<CoefficientFn>,
    base_z: Vec<Complex64>,
    base_w: Vec<Complex64>,
    domain_z: Region,
    domain_w: Region,
    singular_distance: Option<Arc<DistanceFn>>,
}

impl fmt::Debug for ClosedHoloForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedHoloForm")
            .field("dim", &self.dim)
            .field("base_z", &self.base_z)
            .field("base_w", &self.base_w)
            .field("domain_z", &self.domain_z)
            .field("domain_w", &self.domain_w)
            .field("has_singular_locus", &self.singular_distance.is_some())
            .finish()
    }
}

impl ClosedHoloForm {
    pub fn new(
        dim: usize,
        coeff: Arc<CoefficientFn>,
        base_z: Vec<Complex64>,
        base_w: Vec<Complex64>,
        domain_z: Region,
        domain_w: Region,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("form dimension must be positive".into()));
        }
        for b in [&base_z, &base_w] {
            if b.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.len() });
            }
        }
        if !domain_z.contains(&base_z) {
            return Err(Error::OutsideDomain(format!("base point z0 = {base_z:?} not in V")));
        }
        if !domain_w.contains(&base_w) {
            return Err(Error::OutsideDomain(format!("base point w0 = {base_w:?} not in W")));
        }
        Ok(Self { dim, coeff, base_z, base_w, domain_z, domain_w, singular_distance: None })
    }

    /// Declares the distance to the singular locus, enabling the pole guard.
    pub fn with_singular_locus(mut self, distance: Arc<DistanceFn>) -> Self {
        self.singular_distance = Some(distance);
        self
    }

    /// Same form, different base points.
    pub fn rebased(&self, base_z: Vec<Complex64>, base_w: Vec<Complex64>) -> Result<Self> {
        let mut f = Self::new(
            self.dim,
            self.coeff.clone(),
            base_z,
            base_w,
            self.domain_z.clone(),
            self.domain_w.clone(),
        )?;
        f.singular_distance = self.singular_distance.clone();
        Ok(f)
    }

    /// Ω = C dz ∧ dw for a constant n×n matrix C.
    pub fn constant(
        matrix: DMatrix<Complex64>,
        base_z: Vec<Complex64>,
        base_w: Vec<Complex64>,
        domain_z: Region,
        domain_w: Region,
    ) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput("constant form needs a square matrix".into()));
        }
        let n = matrix.nrows();
        Self::new(n, Arc::new(move |_, _| matrix.clone()), base_z, base_w, domain_z, domain_w)
    }

    /// Ω = c (z − w)^{−k} dz ∧ dw in one complex dimension on H × H̄.
    pub fn pole_power(c: Complex64, k: u32, base_z: Complex64, base_w: Complex64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("pole exponent must be >= 2, got {k}")));
        }
        let f = Self::new(
            1,
            Arc::new(move |z, w| DMatrix::from_element(1, 1, c * (z[0] - w[0]).powi(-(k as i32)))),
            vec![base_z],
            vec![base_w],
            Region::UpperHalf,
            Region::LowerHalf,
        )?;
        Ok(f.with_singular_locus(Arc::new(|z, w| (z[0] - w[0]).norm())))
    }

    /// The genus-1 form (z − w)^{−2} dz ∧ dw.
    pub fn genus1(base_z: Complex64, base_w: Complex64) -> Result<Self> {
        Self::pole_power(Complex64::new(1.0, 0.0), 2, base_z, base_w)
    }

    /// Ω_ij = ∂²g/∂z^i∂w^j for a polynomial g in (z¹…zⁿ, w¹…wⁿ); closed by construction.
    pub fn mixed_second_of(
        g: &Polynomial,
        base_z: Vec<Complex64>,
        base_w: Vec<Complex64>,
        domain_z: Region,
        domain_w: Region,
    ) -> Result<Self> {
        if g.vars() % 2 != 0 || g.vars() == 0 {
            return Err(Error::InvalidInput("generator polynomial needs 2n variables".into()));
        }
        let n = g.vars() / 2;
        let entries: Vec<Vec<Polynomial>> = (0..n)
            .map(|i| (0..n).map(|j| g.derivative(i).derivative(n + j)).collect())
            .collect();
        Self::from_polynomials(entries, base_z, base_w, domain_z, domain_w)
    }

    /// Ω_ij given as explicit polynomials in (z, w); closedness is not implied.
    pub fn from_polynomials(
        entries: Vec<Vec<Polynomial>>,
        base_z: Vec<Complex64>,
        base_w: Vec<Complex64>,
        domain_z: Region,
        domain_w: Region,
    ) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("coefficient polynomials must form a square array".into()));
        }
        if entries.iter().flatten().any(|p| p.vars() != 2 * n) {
            return Err(Error::InvalidInput(format!("coefficient polynomials must have {} variables", 2 * n)));
        }
        let coeff = move |z: &[Complex64], w: &[Complex64]| {
            let mut x = Vec::with_capacity(2 * n);
            x.extend_from_slice(z);
            x.extend_from_slice(w);
            DMatrix::from_fn(n, n, |i, j| entries[i][j].eval(&x))
        };
        Self::new(n, Arc::new(coeff), base_z, base_w, domain_z, domain_w)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base_z(&self) -> &[Complex64] {
        &self.base_z
    }

    pub fn base_w(&self) -> &[Complex64] {
        &self.base_w
    }

    pub fn domain_z(&self) -> &Region {
        &self.domain_z
    }

    pub fn domain_w(&self) -> &Region {
        &self.domain_w
    }

    /// The coefficient matrix Ω_ij(z, w).
    pub fn eval(&self, z: &[Complex64], w: &[Complex64]) -> DMatrix<Complex64> {
        (self.coeff)(z, w)
    }

    fn check_point(&self, z: &[Complex64], w: &[Complex64]) -> Result<()> {
        for p in [z, w] {
            if p.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
            }
        }
        if !self.domain_z.contains(z) {
            return Err(Error::OutsideDomain(format!("z = {z:?} not in V")));
        }
        if !self.domain_w.contains(w) {
            return Err(Error::OutsideDomain(format!("w = {w:?} not in W")));
        }
        Ok(())
    }
}

/// Tensor Gauss-Legendre rule on the parameter square with optional bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeQuadrature {
    pub nodes_per_axis: usize,
    pub adaptive: bool,
    /// Maximum bisection depth of the parameter square.
    pub max_levels: usize,
    /// Accepted |fine − coarse| per cell, relative to max(1, |cell value|/area).
    pub tolerance: f64,
}

impl Default for ConeQuadrature {
    fn default() -> Self {
        Self { nodes_per_axis: 64, adaptive: true, max_levels: 8, tolerance: 1e-13 }
    }
}

impl ConeQuadrature {
    pub fn fixed(nodes_per_axis: usize) -> Self {
        Self { nodes_per_axis, adaptive: false, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 2 {
            return Err(Error::InvalidInput(format!("nodes_per_axis must be >= 2, got {}", self.nodes_per_axis)));
        }
        Ok(())
    }
}

struct Cone<'a> {
    form: &'a ClosedHoloForm,
    dz: Vec<Complex64>,
    dw: Vec<Complex64>,
    fine: GaussLegendre,
    coarse: GaussLegendre,
    quad: ConeQuadrature,
}

impl Cone<'_> {
    fn integrand(&self, s: f64, t: f64, zs: &mut [Complex64], wt: &mut [Complex64]) -> Result<Complex64> {
        for (k, v) in zs.iter_mut().enumerate() {
            *v = self.form.base_z[k] + s * self.dz[k];
        }
        for (k, v) in wt.iter_mut().enumerate() {
            *v = self.form.base_w[k] + t * self.dw[k];
        }
        if let Some(dist) = &self.form.singular_distance {
            let d = dist(zs, wt);
            if d < POLE_GUARD {
                return Err(Error::NearSingularity { distance: d });
            }
        }
        let m = self.form.eval(zs, wt);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.form.dim {
            for j in 0..self.form.dim {
                acc += self.dz[i] * self.dw[j] * m[(i, j)];
            }
        }
        Ok(acc)
    }

    fn tensor(&self, rule: &GaussLegendre, s: (f64, f64), t: (f64, f64)) -> Result<Complex64> {
        let n = self.form.dim;
        let (mut zs, mut wt) = (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]);
        let mut acc = Complex64::new(0.0, 0.0);
        for (sv, sw) in rule.on_interval(s.0, s.1) {
            let mut row = Complex64::new(0.0, 0.0);
            for (tv, tw) in rule.on_interval(t.0, t.1) {
                row += tw * self.integrand(sv, tv, &mut zs, &mut wt)?;
            }
            acc += sw * row;
        }
        Ok(acc)
    }

    fn cell(&self, s: (f64, f64), t: (f64, f64), level: usize) -> Result<Complex64> {
        let fine = self.tensor(&self.fine, s, t)?;
        if !self.quad.adaptive {
            return Ok(fine);
        }
        let coarse = self.tensor(&self.coarse, s, t)?;
        let area = (s.1 - s.0) * (t.1 - t.0);
        let err = (fine - coarse).norm();
        if err <= self.quad.tolerance * area * (fine.norm() / area).max(1.0) {
            return Ok(fine);
        }
        if level >= self.quad.max_levels {
            return Err(Error::QuadratureNonConvergence(format!(
                "cell s∈[{:.4},{:.4}] t∈[{:.4},{:.4}] still has error {err:.3e} after {} bisections",
                s.0, s.1, t.0, t.1, self.quad.max_levels
            )));
        }
        let sm = 0.5 * (s.0 + s.1);
        let tm = 0.5 * (t.0 + t.1);
        let mut acc = Complex64::new(0.0, 0.0);
        for si in [(s.0, sm), (sm, s.1)] {
            for ti in [(t.0, tm), (tm, t.1)] {
                acc += self.cell(si, ti, level + 1)?;
            }
        }
        Ok(acc)
    }
}

/// q(z, w): the integral of Ω over the product of radial segments from the base points.
pub fn cone_potential(form: &ClosedHoloForm, z: &[Complex64], w: &[Complex64], quad: &ConeQuadrature) -> Result<Complex64> {
    quad.validate()?;
    form.check_point(z, w)?;
    let cone = Cone {
        form,
        dz: z.iter().zip(&form.base_z).map(|(a, b)| a - b).collect(),
        dw: w.iter().zip(&form.base_w).map(|(a, b)| a - b).collect(),
        fine: GaussLegendre::new(quad.nodes_per_axis),
        coarse: GaussLegendre::new((quad.nodes_per_axis / 2).max(2)),
        quad: *quad,
    };
    cone.cell((0.0, 1.0), (0.0, 1.0), 0)
}

/// Scalar convenience wrapper for one-dimensional forms.
pub fn cone_potential_1d(form: &ClosedHoloForm, z: Complex64, w: Complex64, quad: &ConeQuadrature) -> Result<Complex64> {
    cone_potential(form, &[z], &[w], quad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub samples: usize,
    /// max over samples of |q(z, w₀)| and |q(z₀, w)|.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Evaluation failures (domain, pole guard, quadrature) encountered.
    pub errors: Vec<String>,
}

/// Checks that q vanishes on V × {w₀} and on {z₀} × W at the sample points.
pub fn verify_boundary_vanishing(
    form: &ClosedHoloForm,
    samples: &[(Vec<Complex64>, Vec<Complex64>)],
    quad: &ConeQuadrature,
    tolerance: f64,
) -> BoundaryReport {
    let mut max_residual: f64 = 0.0;
    let mut errors = Vec::new();
    for (z, w) in samples {
        for r in [cone_potential(form, z, &form.base_w, quad), cone_potential(form, &form.base_z, w, quad)] {
            match r {
                Ok(v) => max_residual = max_residual.max(v.norm()),
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    BoundaryReport {
        samples: samples.len(),
        max_residual,
        tolerance,
        pass: errors.is_empty() && max_residual < tolerance,
        errors,
    }
}

fn unit(n: usize, k: usize, scale: Complex64) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[k] = scale;
    v
}

fn shifted(p: &[Complex64], d: &[Complex64]) -> Vec<Complex64> {
    p.iter().zip(d).map(|(a, b)| a + b).collect()
}

fn check_stencil(form: &ClosedHoloForm, z: &[Complex64], w: &[Complex64], h: f64) -> Result<()> {
    form.check_point(z, w)?;
    let n = form.dim;
    for k in 0..n {
        for dir in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), I * h, -I * h] {
            let e = unit(n, k, dir);
            if !form.domain_z.contains(&shifted(z, &e)) || !form.domain_w.contains(&shifted(w, &e)) {
                return Err(Error::OutsideDomain(format!("finite-difference stencil of size {h} leaves the domain")));
            }
        }
    }
    Ok(())
}

/// |∂_{z^i}∂_{w^j} q − Ω_ij| entrywise, with Richardson-extrapolated central differences.
pub fn verify_mixed_derivative(
    form: &ClosedHoloForm,
    z: &[Complex64],
    w: &[Complex64],
    quad: &ConeQuadrature,
    h: f64,
) -> Result<DMatrix<f64>> {
    check_stencil(form, z, w, h)?;
    let n = form.dim;
    let omega = form.eval(z, w);
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let failure = std::cell::RefCell::new(None);
            let d = fd::mixed_derivative(
                |a, b| {
                    let zs = shifted(z, &unit(n, i, Complex64::new(a, 0.0)));
                    let ws = shifted(w, &unit(n, j, Complex64::new(b, 0.0)));
                    cone_potential(form, &zs, &ws, quad).unwrap_or_else(|e| {
                        *failure.borrow_mut() = Some(e);
                        Complex64::new(f64::NAN, 0.0)
                    })
                },
                h,
            );
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            out[(i, j)] = (d - omega[(i, j)]).norm();
        }
    }
    Ok(out)
}

/// Largest |∂q/∂z̄^k|, |∂q/∂w̄^k| at (z, w).
pub fn potential_dbar_residual(
    form: &ClosedHoloForm,
    z: &[Complex64],
    w: &[Complex64],
    quad: &ConeQuadrature,
    h: f64,
) -> Result<f64> {
    check_stencil(form, z, w, h)?;
    let n = form.dim;
    let mut worst: f64 = 0.0;
    let failure = std::cell::RefCell::new(None);
    for k in 0..n {
        for block in 0..2 {
            let r = fd::dbar_residual(
                |u| {
                    let e = unit(n, k, u - Complex64::new(0.0, 0.0));
                    let (zs, ws) = if block == 0 { (shifted(z, &e), w.to_vec()) } else { (z.to_vec(), shifted(w, &e)) };
                    cone_potential(form, &zs, &ws, quad).unwrap_or_else(|e| {
                        *failure.borrow_mut() = Some(e);
                        Complex64::new(f64::NAN, 0.0)
                    })
                },
                Complex64::new(0.0, 0.0),
                h,
            );
            worst = worst.max(r);
        }
    }
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosednessReport {
    pub samples: usize,
    /// max |∂_{z^k}Ω_ij − ∂_{z^i}Ω_kj|, |∂_{w^k}Ω_ij − ∂_{w^j}Ω_ik|.
    pub closedness_residual: f64,
    /// max |∂_{z̄^k}Ω_ij|, |∂_{w̄^k}Ω_ij|.
    pub holomorphy_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub errors: Vec<String>,
}

/// Holomorphic and anti-holomorphic partials of Ω along one coordinate.
fn coefficient_partials(
    form: &ClosedHoloForm,
    z: &[Complex64],
    w: &[Complex64],
    k: usize,
    in_w: bool,
    h: f64,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = form.dim;
    let eval = |d: Complex64| {
        let e = unit(n, k, d);
        if in_w {
            form.eval(z, &shifted(w, &e))
        } else {
            form.eval(&shifted(z, &e), w)
        }
    };
    let central = |s: f64| {
        let dx = (eval(Complex64::new(s, 0.0)) - eval(Complex64::new(-s, 0.0))) / Complex64::new(2.0 * s, 0.0);
        let dy = (eval(I * s) - eval(-I * s)) / Complex64::new(2.0 * s, 0.0);
        (dx, dy)
    };
    let (dx1, dy1) = central(h);
    let (dx2, dy2) = central(0.5 * h);
    let third = Complex64::new(1.0 / 3.0, 0.0);
    let dx = (dx2 * Complex64::new(4.0, 0.0) - dx1) * third;
    let dy = (dy2 * Complex64::new(4.0, 0.0) - dy1) * third;
    let half = Complex64::new(0.5, 0.0);
    let d = (&dx - &dy * I) * half;
    let dbar = (dx + dy * I) * half;
    (d, dbar)
}

/// Finite-difference closedness and holomorphy residuals of Ω at the samples.
pub fn check_closed_and_holomorphic(
    form: &ClosedHoloForm,
    samples: &[(Vec<Complex64>, Vec<Complex64>)],
    h: f64,
    tolerance: f64,
) -> ClosednessReport {
    let n = form.dim;
    let mut closed: f64 = 0.0;
    let mut holo: f64 = 0.0;
    let mut errors = Vec::new();
    for (z, w) in samples {
        if let Err(e) = check_stencil(form, z, w, h) {
            errors.push(e.to_string());
            continue;
        }
        let dz: Vec<_> = (0..n).map(|k| coefficient_partials(form, z, w, k, false, h)).collect();
        let dw: Vec<_> = (0..n).map(|k| coefficient_partials(form, z, w, k, true, h)).collect();
        for k in 0..n {
            holo = holo.max(dz[k].1.iter().map(|c| c.norm()).fold(0.0, f64::max));
            holo = holo.max(dw[k].1.iter().map(|c| c.norm()).fold(0.0, f64::max));
            for i in 0..n {
                for j in 0..n {
                    closed = closed.max((dz[k].0[(i, j)] - dz[i].0[(k, j)]).norm());
                    closed = closed.max((dw[k].0[(i, j)] - dw[j].0[(i, k)]).norm());
                }
            }
        }
    }
    ClosednessReport {
        samples: samples.len(),
        closedness_residual: closed,
        holomorphy_residual: holo,
        tolerance,
        pass: errors.is_empty() && closed < tolerance && holo < tolerance,
        errors,
    }
}
