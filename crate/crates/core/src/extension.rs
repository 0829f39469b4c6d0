//! Holomorphic extensions from the diagonal {w = z̄} of V × V̄.
//!
//! Covers the real-on-the-diagonal symmetrization of a potential, the
//! decomposition h = f + f̄ of a pluriharmonic function, assembly of
//!
//! ```text
//! C q̃(z, w) + log det((τ(z) − conj τ(w̄))/2i) + f(z) + conj f(w̄)
//! ```
//!
//! and the explicit genus-1 extension ½ Log(−πi(z − w)) + log η(z) + conj log η(w̄)
//! together with its invariance under the diagonal SL(2, Z) action.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::potential::{cone_potential_1d, ClosedHoloForm, ConeQuadrature};
use crate::quadrature::GaussLegendre;
use crate::catalog::parse_complex;
use crate::special::{continue_log, log_eta, principal_log, BranchedLog, HalfPlanePoint};
use crate::spectral::{paper_det_torus, zeta_det_torus, SpectralTruncation, TorusMetric};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Point (z, w) of the genus-1 model H × H̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub z: Complex64,
    pub w: Complex64,
}

impl ProductPoint {
    pub fn new(z: Complex64, w: Complex64) -> Result<Self> {
        if !(z.im > 0.0) {
            return Err(Error::OutsideDomain(format!("Im(z) must be positive, got z = {z}")));
        }
        if !(w.im < 0.0) {
            return Err(Error::OutsideDomain(format!("Im(w) must be negative, got w = {w}")));
        }
        Ok(Self { z, w })
    }

    /// (z, z̄).
    pub fn diagonal(z: HalfPlanePoint) -> Self {
        Self { z: z.value(), w: z.value().conj() }
    }

    /// (w̄, z̄), the point at which the conjugated term of the symmetrizer is evaluated.
    pub fn mirrored(self) -> Self {
        Self { z: self.w.conj(), w: self.z.conj() }
    }

    /// Diagonal action of z ↦ (az + b)/(cz + d) on both factors.
    pub fn mobius(self, m: [i64; 4]) -> Result<Self> {
        let [a, b, c, d] = m.map(|v| v as f64);
        Self::new((a * self.z + b) / (c * self.z + d), (a * self.w + b) / (c * self.w + d))
    }
}

/// q̃(z, w) = ½(q(z, w) + conj q(w̄, z̄)); real on the diagonal.
pub fn symmetrize<F>(q: F, z: Complex64, w: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    Ok(0.5 * (q(z, w)? + q(w.conj(), z.conj())?.conj()))
}

/// Coefficients of the genus-1 Weil-Petersson form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WpCoefficient {
    /// −i(z − z̄)^{−2}, the coefficient of dz ∧ dz̄ in ω.
    pub omega: Complex64,
    /// (z − z̄)^{−2}, the coefficient of iω.
    pub i_omega: Complex64,
}

pub fn wp_form_genus1(z: HalfPlanePoint) -> WpCoefficient {
    let d = (z.value() - z.value().conj()).powi(-2);
    WpCoefficient { omega: -I * d, i_omega: d }
}

pub type RealFn = dyn Fn(Complex64) -> f64 + Send + Sync;

/// The holomorphic f with h = f + f̄, built by integrating ∂h along segments from `base`.
#[derive(Clone)]
pub struct PluriharmonicSplit {
    h: Arc<RealFn>,
    base: Complex64,
    base_value: f64,
    rule: Arc<GaussLegendre>,
    fd_step: f64,
}

impl fmt::Debug for PluriharmonicSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PluriharmonicSplit")
            .field("base", &self.base)
            .field("base_value", &self.base_value)
            .field("nodes", &self.rule.len())
            .finish()
    }
}

impl PluriharmonicSplit {
    fn dz(&self, z: Complex64) -> Complex64 {
        fd::wirtinger(|u| Complex64::new((self.h)(u), 0.0), z, self.fd_step).0
    }

    /// f(z) = ½h(base) + ∫_{base→z} ∂h.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let d = z - self.base;
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, w) in self.rule.on_interval(0.0, 1.0) {
            acc += w * self.dz(self.base + s * d);
        }
        let f = 0.5 * self.base_value + acc * d;
        if !f.re.is_finite() || !f.im.is_finite() {
            return Err(Error::OutsideDomain(format!("h is not finite along the segment to {z}")));
        }
        Ok(f)
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }
}

/// Splits a pluriharmonic `h` as f + f̄. ∂∂̄h is checked at `base` and `checks`.
pub fn pluriharmonic_split(
    h: Arc<RealFn>,
    base: Complex64,
    path_quad: &ConeQuadrature,
    checks: &[Complex64],
    tolerance: f64,
) -> Result<PluriharmonicSplit> {
    if path_quad.nodes_per_axis < 2 {
        return Err(Error::InvalidInput("path quadrature needs >= 2 nodes".into()));
    }
    let fd_step = 1e-3;
    let mut worst: f64 = 0.0;
    for &p in std::iter::once(&base).chain(checks) {
        let v = fd::ddbar(|u| Complex64::new(h(u), 0.0), p, 1e-2).norm();
        if !v.is_finite() {
            return Err(Error::OutsideDomain(format!("h is not finite near {p}")));
        }
        worst = worst.max(v);
    }
    if worst > tolerance {
        return Err(Error::NotPluriharmonic { residual: worst, tolerance });
    }
    let base_value = h(base);
    Ok(PluriharmonicSplit {
        h,
        base,
        base_value,
        rule: Arc::new(GaussLegendre::new(path_quad.nodes_per_axis)),
        fd_step,
    })
}

pub type PotentialFn = dyn Fn(&[Complex64], &[Complex64]) -> Result<Complex64> + Send + Sync;
pub type PeriodFn = dyn Fn(&[Complex64]) -> DMatrix<Complex64> + Send + Sync;
pub type HoloFn = dyn Fn(&[Complex64]) -> Result<Complex64> + Send + Sync;

/// Ingredients of the extension C q̃ + log det((τ(z) − conj τ(w̄))/2i) + f(z) + conj f(w̄).
#[derive(Clone)]
pub struct ExtensionRecipe {
    pub q_tilde: Arc<PotentialFn>,
    pub period_map: Arc<PeriodFn>,
    pub f: Arc<HoloFn>,
    pub genus_constant: f64,
    /// Diagonal point from which the scalar (genus-1) log is continued; principal log if absent.
    pub reference: Option<Vec<Complex64>>,
}

impl fmt::Debug for ExtensionRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtensionRecipe")
            .field("genus_constant", &self.genus_constant)
            .field("reference", &self.reference)
            .finish()
    }
}

/// Smallest |det| accepted for (τ(z) − conj τ(w̄))/2i.
pub const MIN_DET: f64 = 1e-12;

fn conj_all(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().map(|c| c.conj()).collect()
}

impl ExtensionRecipe {
    /// (τ(z) − conj τ(w̄))/2i.
    pub fn period_matrix(&self, z: &[Complex64], w: &[Complex64]) -> DMatrix<Complex64> {
        let tz = (self.period_map)(z);
        let tw = (self.period_map)(&conj_all(w)).map(|c| c.conj());
        (tz - tw) / (2.0 * I)
    }

    /// Symmetry of τ and invertibility of the period matrix at (z, w).
    pub fn check_invariants(&self, z: &[Complex64], w: &[Complex64]) -> Result<()> {
        for p in [z.to_vec(), conj_all(w)] {
            let t = (self.period_map)(&p);
            if !t.is_square() {
                return Err(Error::InvalidInput("period map must be square".into()));
            }
            let asym = (&t - t.transpose()).iter().map(|c| c.norm()).fold(0.0, f64::max);
            if asym > 1e-12 {
                return Err(Error::InvalidInput(format!("period map not symmetric: {asym:.3e}")));
            }
        }
        let det = self.period_matrix(z, w).determinant();
        if det.norm() <= MIN_DET {
            return Err(Error::SingularMatrix(det.norm()));
        }
        Ok(())
    }

    /// Genus-1 recipe whose diagonal reproduces `log_det`: τ(z) = z and f from the
    /// pluriharmonic split of log_det − C q̃(z, z̄) − log Im z around `base`.
    pub fn genus1_from_diagonal(
        log_det: Arc<dyn Fn(Complex64) -> Result<f64> + Send + Sync>,
        genus_constant: f64,
        q_tilde: Arc<PotentialFn>,
        base: HalfPlanePoint,
        path_quad: &ConeQuadrature,
        checks: &[Complex64],
    ) -> Result<Self> {
        let qt = q_tilde.clone();
        let v: Arc<RealFn> = Arc::new(move |z: Complex64| {
            if !(z.im > 0.0) {
                return f64::NAN;
            }
            let ld = log_det(z).unwrap_or(f64::NAN);
            let q = qt(&[z], &[z.conj()]).map(|c| c.re).unwrap_or(f64::NAN);
            ld - genus_constant * q - z.im.ln()
        });
        let split = pluriharmonic_split(v, base.value(), path_quad, checks, 1e-6)?;
        Ok(Self {
            q_tilde,
            period_map: Arc::new(|z: &[Complex64]| DMatrix::from_element(1, 1, z[0])),
            f: Arc::new(move |z: &[Complex64]| split.eval(z[0])),
            genus_constant,
            reference: Some(vec![base.value()]),
        })
    }

    /// Diagonal value C q̃(z, z̄) + log det Im τ(z) + 2 Re f(z).
    pub fn diagonal_value(&self, z: &[Complex64]) -> Result<f64> {
        let zb = conj_all(z);
        let q = (self.q_tilde)(z, &zb)?;
        let t = (self.period_map)(z);
        let im = t.map(|c| Complex64::new(c.im, 0.0));
        let det = im.determinant();
        if det.re <= 0.0 {
            return Err(Error::SingularMatrix(det.norm()));
        }
        Ok(self.genus_constant * q.re + det.re.ln() + 2.0 * (self.f)(z)?.re)
    }
}

/// Logarithm of the scalar (τ(z) − conj τ(w̄))/2i continued from the reference diagonal point.
fn branch_tracked_log(recipe: &ExtensionRecipe, reference: &[Complex64], z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    let r_w = conj_all(reference);
    let at = |s: f64| {
        let zs: Vec<_> = reference.iter().zip(z).map(|(a, b)| a + s * (b - a)).collect();
        let ws: Vec<_> = r_w.iter().zip(w).map(|(a, b)| a + s * (b - a)).collect();
        recipe.period_matrix(&zs, &ws)[(0, 0)]
    };
    let mut n = 16;
    loop {
        let path: Vec<_> = (0..=n).map(|k| at(k as f64 / n as f64)).collect();
        let init = BranchedLog::principal(path[0])?;
        match continue_log(&path, init) {
            Ok(l) => return Ok(l.value),
            Err(Error::PathTooCoarse(..)) if n < 1 << 14 => n *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// C q̃(z, w) + log det((τ(z) − conj τ(w̄))/2i) + f(z) + conj f(w̄).
///
/// In genus 1 the scalar log is continued along the straight path from the
/// recipe's reference diagonal point; otherwise the principal log of the
/// determinant is used.
pub fn assemble_extension(recipe: &ExtensionRecipe, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    recipe.check_invariants(z, w)?;
    let m = recipe.period_matrix(z, w);
    let log_det = match (&recipe.reference, m.nrows()) {
        (Some(r), 1) => branch_tracked_log(recipe, r, z, w)?,
        _ => principal_log(m.determinant()),
    };
    let q = (recipe.q_tilde)(z, w)?;
    let fz = (recipe.f)(z)?;
    let fw = (recipe.f)(&conj_all(w))?.conj();
    Ok(recipe.genus_constant * q + log_det + fz + fw)
}

/// ½ Log(−πi(z − w)) + log η(z) + conj log η(w̄).
///
/// For Im z > 0 > Im w, Re(−πi(z − w)) = π Im(z − w) > 0, so the principal log
/// is continuous on all of H × H̄.
pub fn genus1_extension(point: ProductPoint) -> Result<Complex64> {
    let p = ProductPoint::new(point.z, point.w)?;
    let u = -PI * I * (p.z - p.w);
    debug_assert!(u.re > 0.0);
    let ez = log_eta(HalfPlanePoint::new(p.z)?)?;
    let ew = log_eta(HalfPlanePoint::new(p.w.conj())?)?.conj();
    Ok(0.5 * principal_log(u) + ez + ew)
}

/// Symmetrized cone potential of (z − w)^{−2} dz ∧ dw, for use as q̃ in genus-1 recipes.
pub fn genus1_symmetrized_potential(form: ClosedHoloForm, quad: ConeQuadrature) -> Arc<PotentialFn> {
    Arc::new(move |z: &[Complex64], w: &[Complex64]| {
        symmetrize(|a, b| cone_potential_1d(&form, a, b, &quad), z[0], w[0])
    })
}

/// Generators of SL(2, Z) acting on H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    /// z ↦ z + 1
    T,
    /// z ↦ z − 1
    TInverse,
    /// z ↦ −1/z
    S,
}

impl Generator {
    pub fn matrix(self) -> [i64; 4] {
        match self {
            Generator::T => [1, 1, 0, 1],
            Generator::TInverse => [1, -1, 0, 1],
            Generator::S => [0, -1, 1, 0],
        }
    }
}

/// A word in the generators, applied right to left like a matrix product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularWord(pub Vec<Generator>);

impl ModularWord {
    pub fn matrix(&self) -> [i64; 4] {
        self.0.iter().fold([1, 0, 0, 1], |[a, b, c, d], g| {
            let [e, f, g2, h] = g.matrix();
            [a * e + b * g2, a * f + b * h, c * e + d * g2, c * f + d * h]
        })
    }

    pub fn random<R: Rng>(max_len: usize, rng: &mut R) -> Self {
        let len = rng.gen_range(1..=max_len);
        let gens = [Generator::T, Generator::TInverse, Generator::S];
        Self((0..len).map(|_| gens[rng.gen_range(0..3)]).collect())
    }
}

impl fmt::Display for ModularWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<&str> = self
            .0
            .iter()
            .map(|g| match g {
                Generator::T => "T",
                Generator::TInverse => "T^-1",
                Generator::S => "S",
            })
            .collect();
        write!(f, "{}", s.join("·"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceResidual {
    /// |exp(24(L(γp) − L(p))) − 1|.
    pub relative: f64,
    /// L(γp) − L(p) with the imaginary part reduced modulo 2π/24 into (−π/24, π/24].
    pub reduced_log_difference: Complex64,
    /// Raw L(γp) − L(p).
    pub log_difference: Complex64,
}

/// Compares exp(24 L) = (−πi(z−w))¹² Δ(z) conj Δ(w̄) at the point and its image.
pub fn modular_invariance_check(point: ProductPoint, word: &ModularWord) -> Result<InvarianceResidual> {
    let image = point.mobius(word.matrix())?;
    let d = genus1_extension(image)? - genus1_extension(point)?;
    let step = 2.0 * PI / 24.0;
    let mut im = d.im - step * (d.im / step).round();
    if im <= -step / 2.0 {
        im += step;
    }
    Ok(InvarianceResidual {
        relative: ((24.0 * d).exp() - 1.0).norm(),
        reduced_log_difference: Complex64::new(d.re, im),
        log_difference: d,
    })
}

/// Where a genus-1 recipe takes its diagonal log det from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalSource {
    /// log 2π + ½ log y + 2 Re log η(z)
    Paper,
    /// Spectral log det′ with eigenvalues of the lattice Z + zZ.
    SpectralLattice,
    /// Spectral log det′ on the unit-area torus.
    SpectralUnitArea,
}

impl DiagonalSource {
    /// The constant C making log det − C q̃(z, z̄) − log y pluriharmonic.
    pub fn natural_constant(self) -> f64 {
        match self {
            DiagonalSource::Paper => -0.5,
            DiagonalSource::SpectralLattice => 1.0,
            DiagonalSource::SpectralUnitArea => 0.0,
        }
    }

    pub fn log_det(self, z: HalfPlanePoint) -> Result<f64> {
        let trunc = SpectralTruncation::default();
        match self {
            DiagonalSource::Paper => paper_det_torus(z),
            DiagonalSource::SpectralLattice => Ok(zeta_det_torus(z, TorusMetric::Lattice, &trunc)?.log_det),
            DiagonalSource::SpectralUnitArea => Ok(zeta_det_torus(z, TorusMetric::UnitArea, &trunc)?.log_det),
        }
    }
}

/// Text description of a genus-1 recipe:
///
/// ```text
/// diagonal = paper            # paper | spectral-lattice | spectral-unit-area
/// genus_constant = -0.5       # defaults to the source's natural constant
/// base = 0,1.5                # base point of the pluriharmonic split
/// potential_base_z = 0,1
/// potential_base_w = 0,-1
/// potential_nodes = 24
/// path_nodes = 32
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeSpec {
    pub diagonal: DiagonalSource,
    pub genus_constant: f64,
    pub base: Complex64,
    pub potential_base_z: Complex64,
    pub potential_base_w: Complex64,
    pub potential_nodes: usize,
    pub path_nodes: usize,
}

impl Default for RecipeSpec {
    fn default() -> Self {
        Self {
            diagonal: DiagonalSource::Paper,
            genus_constant: DiagonalSource::Paper.natural_constant(),
            base: Complex64::new(0.0, 1.5),
            potential_base_z: I,
            potential_base_w: -I,
            potential_nodes: 24,
            path_nodes: 32,
        }
    }
}

impl RecipeSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        let mut constant = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::InvalidInput(format!("recipe line {}: {m}", n + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let v = v.trim();
            let int = |v: &str| v.parse::<usize>().map_err(|_| err(format!("bad integer {v:?}")));
            match k.trim() {
                "diagonal" => {
                    spec.diagonal = match v {
                        "paper" => DiagonalSource::Paper,
                        "spectral-lattice" => DiagonalSource::SpectralLattice,
                        "spectral-unit-area" => DiagonalSource::SpectralUnitArea,
                        _ => return Err(err(format!("unknown diagonal source {v:?}"))),
                    }
                }
                "genus_constant" => constant = Some(v.parse::<f64>().map_err(|_| err(format!("bad number {v:?}")))?),
                "base" => spec.base = parse_complex(v).map_err(|e| err(e.to_string()))?,
                "potential_base_z" => spec.potential_base_z = parse_complex(v).map_err(|e| err(e.to_string()))?,
                "potential_base_w" => spec.potential_base_w = parse_complex(v).map_err(|e| err(e.to_string()))?,
                "potential_nodes" => spec.potential_nodes = int(v)?,
                "path_nodes" => spec.path_nodes = int(v)?,
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        spec.genus_constant = constant.unwrap_or(spec.diagonal.natural_constant());
        Ok(spec)
    }

    pub fn build(&self) -> Result<ExtensionRecipe> {
        let base = HalfPlanePoint::new(self.base)?;
        let form = ClosedHoloForm::genus1(self.potential_base_z, self.potential_base_w)?;
        let qt = genus1_symmetrized_potential(form, ConeQuadrature::fixed(self.potential_nodes));
        let source = self.diagonal;
        let checks = [self.base + 0.1, self.base + 0.1 * I];
        ExtensionRecipe::genus1_from_diagonal(
            Arc::new(move |z| source.log_det(HalfPlanePoint::new(z)?)),
            self.genus_constant,
            qt,
            base,
            &ConeQuadrature::fixed(self.path_nodes),
            &checks,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hp(x: f64, y: f64) -> HalfPlanePoint {
        HalfPlanePoint::from_parts(x, y).unwrap()
    }

    #[test]
    fn symmetrize_simple() {
        let (z, w) = (c(0.3, 1.2), c(-0.5, -0.7));
        let q = symmetrize(|a, b| Ok(a * b), z, w).unwrap();
        assert!((q - z * w).norm() < 1e-15);
        let d = symmetrize(|a, b| Ok(a * b), z, z.conj()).unwrap();
        assert!(d.im.abs() < 1e-15 && (d.re - z.norm_sqr()).abs() < 1e-15);
        let q = symmetrize(|a, _| Ok(I * a), z, w).unwrap();
        assert!((q - 0.5 * I * (z - w)).norm() < 1e-15);
        let d = symmetrize(|a, _| Ok(I * a), z, z.conj()).unwrap();
        assert!((d - c(-z.im, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn symmetrized_genus1_potential() {
        let form = ClosedHoloForm::genus1(c(0.0, 1.0), c(0.0, -1.0)).unwrap();
        let qt = genus1_symmetrized_potential(form, ConeQuadrature::default());
        for z in [c(0.0, 1.0), c(1.0, 2.0), c(-0.5, 1.5)] {
            let d = qt(&[z], &[z.conj()]).unwrap();
            assert!(d.im.abs() < 1e-11);
            let lap = fd::ddbar(|u| qt(&[u], &[u.conj()]).unwrap(), z, 1e-2);
            let expect = (z - z.conj()).powi(-2);
            assert!((lap - expect).norm() < 1e-6, "{z}: {lap} vs {expect}");
        }
    }

    #[test]
    fn wp_coefficients() {
        let a = wp_form_genus1(hp(0.0, 1.0));
        assert!((a.i_omega - c(-0.25, 0.0)).norm() < 1e-16);
        assert!((a.omega - c(0.0, 0.25)).norm() < 1e-16);
        let b = wp_form_genus1(hp(0.0, 2.0));
        assert!((b.i_omega - c(-1.0 / 16.0, 0.0)).norm() < 1e-16);
        // Kähler potential log(z − z̄)
        let lap = fd::ddbar(|u| principal_log(u - u.conj()), c(0.0, 1.0), 1e-2);
        assert!((lap - a.i_omega).norm() < 1e-8);
    }

    #[test]
    fn split_of_harmonic_polynomial() {
        let quad = ConeQuadrature::default();
        let base = c(0.0, 1.0);
        let checks = [c(0.5, 1.0), c(0.0, 1.5)];
        let h: Arc<RealFn> = Arc::new(|z: Complex64| (z * z).re);
        let f = pluriharmonic_split(h.clone(), base, &quad, &checks, 1e-6).unwrap();
        for z in [c(0.3, 0.7), c(-0.6, 1.4), c(0.1, 1.9)] {
            let v = f.eval(z).unwrap();
            assert!((h(z) - 2.0 * v.re).abs() < 1e-10);
            // f = z²/2 + i·const
            let g = v - z * z / 2.0;
            assert!(g.re.abs() < 1e-10);
        }
        let cst = pluriharmonic_split(Arc::new(|_| 3.5), base, &quad, &checks, 1e-6).unwrap();
        assert!((cst.eval(c(0.4, 1.3)).unwrap() - 1.75).norm() < 1e-12);
    }

    #[test]
    fn split_of_log_modulus() {
        let a = c(5.0, 0.0);
        let h: Arc<RealFn> = Arc::new(move |z: Complex64| (z - a).norm_sqr().ln());
        let base = c(0.0, 1.0);
        let f = pluriharmonic_split(h, base, &ConeQuadrature::default(), &[c(0.5, 1.2)], 1e-6).unwrap();
        // f = log(z − a) + const: compare exp ratios between two points
        let (z1, z2) = (c(0.4, 0.6), c(-0.7, 1.5));
        let r = (f.eval(z1).unwrap() - f.eval(z2).unwrap()).exp() / ((z1 - a) / (z2 - a));
        assert!((r - 1.0).norm() < 1e-9);
    }

    #[test]
    fn split_rejects_non_pluriharmonic() {
        let h: Arc<RealFn> = Arc::new(|z: Complex64| z.norm_sqr());
        let r = pluriharmonic_split(h, c(0.0, 1.0), &ConeQuadrature::default(), &[], 1e-6);
        assert!(matches!(r, Err(Error::NotPluriharmonic { .. })));
    }

    #[test]
    fn genus1_extension_value() {
        // ½ log 2π + 2 log η(i), 30-digit oracle
        let v = genus1_extension(ProductPoint::new(c(0.0, 1.0), c(0.0, -1.0)).unwrap()).unwrap();
        assert!((v.re - 0.391_594_392_706_836_776).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        assert!(ProductPoint::new(c(0.0, 1.0), c(0.0, 1.0)).is_err());
    }

    #[test]
    fn genus1_extension_diagonal() {
        for i in 0..5 {
            for j in 0..5 {
                let z = hp(-0.4 + 0.2 * i as f64, 0.8 + 0.3 * j as f64);
                let v = genus1_extension(ProductPoint::diagonal(z)).unwrap();
                assert!(v.im.abs() < 1e-12);
                let diff = v.re - paper_det_torus(z).unwrap();
                assert!((diff + 0.5 * (2.0 * PI).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn modular_generators() {
        let p = ProductPoint::new(c(0.0, 2.0), c(0.0, -3.0)).unwrap();
        for word in [
            ModularWord(vec![Generator::T]),
            ModularWord(vec![Generator::S]),
            ModularWord(vec![Generator::S, Generator::T, Generator::S]),
        ] {
            let r = modular_invariance_check(p, &word).unwrap();
            assert!(r.relative < 1e-9, "{word}: {r:?}");
        }
        let s = p.mobius(Generator::S.matrix()).unwrap();
        assert!((s.z - c(0.0, 0.5)).norm() < 1e-15 && (s.w - c(0.0, -1.0 / 3.0)).norm() < 1e-15);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let q = ProductPoint::new(c(0.2, 0.9), c(-0.3, -1.4)).unwrap();
        for _ in 0..5 {
            let w = ModularWord::random(4, &mut rng);
            let r = modular_invariance_check(q, &w).unwrap();
            assert!(r.relative < 1e-9, "{w}: {r:?}");
        }
    }

    #[test]
    fn word_matrix_composition() {
        let w = ModularWord(vec![Generator::S, Generator::T]);
        // S·T = [[0,-1],[1,1]]
        assert_eq!(w.matrix(), [0, -1, 1, 1]);
        let w = ModularWord(vec![Generator::T, Generator::TInverse]);
        assert_eq!(w.matrix(), [1, 0, 0, 1]);
    }

    fn constant_recipe(c_g: f64) -> ExtensionRecipe {
        ExtensionRecipe {
            q_tilde: Arc::new(|_, _| Ok(Complex64::new(0.0, 0.0))),
            period_map: Arc::new(|z: &[Complex64]| DMatrix::from_element(1, 1, z[0])),
            f: Arc::new(|_| Ok(Complex64::new(0.0, 0.0))),
            genus_constant: c_g,
            reference: Some(vec![c(0.0, 1.0)]),
        }
    }

    #[test]
    fn assemble_trivial_recipe() {
        let r = constant_recipe(0.0);
        let v = assemble_extension(&r, &[c(0.0, 1.0)], &[c(0.0, -1.0)]).unwrap();
        assert!(v.norm() < 1e-15);
        let (z, w) = (c(0.7, 1.3), c(-0.2, -0.4));
        let v = assemble_extension(&r, &[z], &[w]).unwrap();
        assert!((v - principal_log((z - w) / (2.0 * I))).norm() < 1e-14);
        let res = fd::dbar_residual(|u| assemble_extension(&r, &[u], &[w]).unwrap(), z, 1e-3);
        assert!(res < 1e-9);
    }

    #[test]
    fn assemble_rejects_singular_matrix() {
        let r = ExtensionRecipe { period_map: Arc::new(|_| DMatrix::from_element(1, 1, c(0.0, 0.0))), ..constant_recipe(0.0) };
        assert!(matches!(assemble_extension(&r, &[c(0.0, 1.0)], &[c(0.0, -1.0)]), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn higher_genus_principal_log() {
        // τ(z) = diag(z1, z2) + small symmetric coupling
        let r = ExtensionRecipe {
            period_map: Arc::new(|z: &[Complex64]| {
                DMatrix::from_row_slice(2, 2, &[z[0], 0.1 * (z[0] + z[1]), 0.1 * (z[0] + z[1]), z[1]])
            }),
            reference: None,
            ..constant_recipe(0.0)
        };
        let z = [c(0.1, 1.0), c(-0.2, 1.4)];
        let w = [c(0.3, -0.8), c(0.0, -1.1)];
        let v = assemble_extension(&r, &z, &w).unwrap();
        assert!((v.exp() - r.period_matrix(&z, &w).determinant()).norm() < 1e-13);
        // diagonal value equals log det Im τ
        let zb: Vec<_> = z.iter().map(|c| c.conj()).collect();
        let d = assemble_extension(&r, &z, &zb).unwrap();
        assert!((d.re - r.diagonal_value(&z).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn recipe_spec_parsing() {
        let s = RecipeSpec::parse("diagonal = spectral-lattice\nbase = 0,2 # comment\n").unwrap();
        assert_eq!(s.diagonal, DiagonalSource::SpectralLattice);
        assert_eq!(s.genus_constant, 1.0);
        assert_eq!(s.base, c(0.0, 2.0));
        assert_eq!(RecipeSpec::parse("").unwrap(), RecipeSpec::default());
        assert!(RecipeSpec::parse("diagonal = nope").is_err());
        assert!(RecipeSpec::parse("colour = red").is_err());
        assert!(RecipeSpec::parse("base = 0,-1").unwrap().build().is_err());
    }

    #[test]
    fn spectral_unit_area_recipe_matches_eta_extension() {
        // unit-area log det′ = log(y|η|⁴), so C = 0 and f = 2 log η(z) + const
        let recipe = RecipeSpec { diagonal: DiagonalSource::SpectralUnitArea, ..RecipeSpec::parse("diagonal = spectral-unit-area").unwrap() }
            .build()
            .unwrap();
        let (z, w) = (c(0.2, 1.4), c(-0.1, -1.7));
        let a = assemble_extension(&recipe, &[z], &[w]).unwrap();
        let expect = principal_log((z - w) / (2.0 * I))
            + 2.0 * log_eta(HalfPlanePoint::new(z).unwrap()).unwrap()
            + 2.0 * log_eta(HalfPlanePoint::new(w.conj()).unwrap()).unwrap().conj();
        assert!((a - expect).norm() < 1e-7, "{a} vs {expect}");
    }

    #[test]
    fn genus1_recipe_reproduces_paper_diagonal() {
        let form = ClosedHoloForm::genus1(c(0.0, 1.0), c(0.0, -1.0)).unwrap();
        let qt = genus1_symmetrized_potential(form, ConeQuadrature::fixed(24));
        let base = hp(0.0, 1.5);
        let recipe = ExtensionRecipe::genus1_from_diagonal(
            Arc::new(|z| paper_det_torus(HalfPlanePoint::new(z)?)),
            -0.5,
            qt,
            base,
            &ConeQuadrature::fixed(32),
            &[c(0.2, 1.5), c(0.0, 1.2)],
        )
        .unwrap();
        for z in [c(0.1, 1.4), c(-0.2, 1.7)] {
            let direct = paper_det_torus(HalfPlanePoint::new(z).unwrap()).unwrap();
            let diag = recipe.diagonal_value(&[z]).unwrap();
            let ext = assemble_extension(&recipe, &[z], &[z.conj()]).unwrap();
            assert!((diag - direct).abs() < 1e-8, "{diag} vs {direct}");
            assert!((ext.re - diag).abs() < 1e-9 && ext.im.abs() < 1e-9, "{ext} vs {diag}");
        }
        // off the diagonal it agrees with the genus-1 closed form up to the constant −½ log 2π
        let (z, w) = (c(0.1, 1.6), c(0.15, -1.3));
        let a = assemble_extension(&recipe, &[z], &[w]).unwrap();
        let g = genus1_extension(ProductPoint::new(z, w).unwrap()).unwrap();
        assert!((a - g - 0.5 * (2.0 * PI).ln()).norm() < 1e-6, "{a} vs {g}");
    }
}
