//! Polarization: recovering F(z, w) from samples of F(z, z̄) on a disc.
//!
//! Coefficients are fitted in the normalized variables s = (z − c)/r and
//! t = (z̄ − c̄)/r by a truncated SVD least-squares solve.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SVD_CUTOFF: f64 = 1e-10;

/// Diagonal samples f(z, z̄) at points of the disc |z − center| ≤ radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSampleSet {
    center: Complex64,
    radius: f64,
    points: Vec<Complex64>,
    values: Vec<Complex64>,
}

impl DiagonalSampleSet {
    pub fn new(center: Complex64, radius: f64, points: Vec<Complex64>, values: Vec<Complex64>) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("disc radius must be positive, got {radius}")));
        }
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: values.len() });
        }
        for p in &points {
            if (p - center).norm() > radius * (1.0 + 1e-12) {
                return Err(Error::OutsideDomain(format!("sample {p} lies outside the disc |z - {center}| <= {radius}")));
            }
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("sample values must be finite".into()));
        }
        Ok(Self { center, radius, points, values })
    }

    /// Uses the smallest disc centred at the centroid that contains every point.
    pub fn bounding(points: Vec<Complex64>, values: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientSamples("no samples".into()));
        }
        let center = points.iter().sum::<Complex64>() / points.len() as f64;
        let radius = points.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
        Self::new(center, if radius > 0.0 { radius } else { 1.0 }, points, values)
    }

    /// D + 2 rings with Chebyshev-distributed ρ², 2D + 2 staggered angles per ring.
    pub fn concentric_points(center: Complex64, radius: f64, degree: usize) -> Vec<Complex64> {
        Self::ring_layout(center, radius, degree + 2, 2 * degree + 2, 0.0)
    }

    /// `rings` circles with Chebyshev-distributed ρ², `angles` points each, odd rings
    /// staggered by half a step; `phase` rotates the whole layout (in angular steps).
    pub fn ring_layout(center: Complex64, radius: f64, rings: usize, angles: usize, phase: f64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(rings * angles);
        for k in 0..rings {
            let x = 0.5 * (1.0 - (PI * (k as f64 + 0.5) / rings as f64).cos());
            let rho = radius * x.sqrt();
            let shift = if k % 2 == 1 { 0.5 } else { 0.0 } + phase;
            for j in 0..angles {
                let theta = 2.0 * PI * (j as f64 + shift) / angles as f64;
                out.push(center + Complex64::from_polar(rho, theta));
            }
        }
        out
    }

    pub fn concentric<F>(center: Complex64, radius: f64, degree: usize, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let points = Self::concentric_points(center, radius, degree);
        let values = points.iter().map(|&p| f(p)).collect::<Result<Vec<_>>>()?;
        Self::new(center, radius, points, values)
    }

    /// `n` points uniform in the disc, from a seeded generator.
    pub fn random<F>(center: Complex64, radius: f64, n: usize, seed: u64, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<_> = (0..n)
            .map(|_| {
                let rho = radius * rng.gen::<f64>().sqrt();
                center + Complex64::from_polar(rho, 2.0 * PI * rng.gen::<f64>())
            })
            .collect();
        let values = points.iter().map(|&p| f(p)).collect::<Result<Vec<_>>>()?;
        Self::new(center, radius, points, values)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// F(z, w) = Σ a_{αβ} (z − c)^α (w − c̄)^β with 0 ≤ α, β ≤ D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizedPolynomial {
    pub degree: usize,
    pub center: Complex64,
    pub radius: f64,
    /// a_{αβ}, row α and column β.
    pub coefficients: Vec<Vec<Complex64>>,
    /// Max |fit − value| over the samples.
    pub residual: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// σ_max / σ_min over the retained singular values.
    pub condition: f64,
    pub svd_cutoff: f64,
    /// Singular values dropped by the cutoff.
    pub truncated: Vec<f64>,
    pub samples: usize,
}

fn powers(x: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..=n {
        out.push(p);
        p *= x;
    }
    out
}

impl PolarizedPolynomial {
    /// a_{αβ} r^{α+β}, the coefficients with respect to s = (z − c)/r and t = (w − c̄)/r.
    pub fn normalized_coefficient(&self, alpha: usize, beta: usize) -> Complex64 {
        self.coefficients[alpha][beta] * self.radius.powi((alpha + beta) as i32)
    }

    pub fn max_normalized_coefficient(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..=self.degree {
            for b in 0..=self.degree {
                m = m.max(self.normalized_coefficient(a, b).norm());
            }
        }
        m
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let sp = powers((z - self.center) / self.radius, self.degree);
        let tp = powers((w - self.center.conj()) / self.radius, self.degree);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, sa) in sp.iter().enumerate() {
            for (b, tb) in tp.iter().enumerate() {
                acc += self.normalized_coefficient(a, b) * sa * tb;
            }
        }
        acc
    }

    pub fn eval_diagonal(&self, z: Complex64) -> Complex64 {
        self.eval(z, z.conj())
    }
}

/// Least-squares fit of a_{αβ} from diagonal samples, truncating singular values
/// below `svd_cutoff · σ_max`. Fails if fewer than (D+1)² directions survive.
pub fn polarize_fit(samples: &DiagonalSampleSet, degree: usize, svd_cutoff: f64) -> Result<PolarizedPolynomial> {
    let unknowns = (degree + 1) * (degree + 1);
    if samples.len() < unknowns {
        return Err(Error::InsufficientSamples(format!(
            "degree {degree} needs at least {unknowns} samples, got {}",
            samples.len()
        )));
    }
    let (c, r) = (samples.center, samples.radius);
    let mut a = DMatrix::<Complex64>::zeros(samples.len(), unknowns);
    for (k, p) in samples.points.iter().enumerate() {
        let sp = powers((p - c) / r, degree);
        let tp = powers((p - c).conj() / r, degree);
        for al in 0..=degree {
            for be in 0..=degree {
                a[(k, al * (degree + 1) + be)] = sp[al] * tp[be];
            }
        }
    }
    let rhs = DVector::from_column_slice(&samples.values);
    let svd = a.clone().svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let threshold = svd_cutoff * smax;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let truncated: Vec<f64> = sv.iter().copied().filter(|&s| s <= threshold).collect();
    if rank < unknowns {
        return Err(Error::InsufficientSamples(format!(
            "rank {rank} < {unknowns} at degree {degree}: {} directions below cutoff {svd_cutoff:e}",
            truncated.len()
        )));
    }
    let x = svd
        .solve(&rhs, threshold)
        .map_err(|e| Error::InvalidInput(format!("SVD solve failed: {e}")))?;
    let residual = (&a * &x - &rhs).iter().map(|c| c.norm()).fold(0.0, f64::max);
    let smin = sv.iter().copied().filter(|&s| s > threshold).fold(f64::INFINITY, f64::min);
    let mut coefficients = vec![vec![Complex64::new(0.0, 0.0); degree + 1]; degree + 1];
    for al in 0..=degree {
        for be in 0..=degree {
            coefficients[al][be] = x[al * (degree + 1) + be] / r.powi((al + be) as i32);
        }
    }
    let mut singular_values = sv;
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(PolarizedPolynomial {
        degree,
        center: c,
        radius: r,
        coefficients,
        residual,
        singular_values,
        rank,
        condition: smax / smin,
        svd_cutoff,
        truncated,
        samples: samples.len(),
    })
}

/// Polarizes F1 − F2 from ring-layout diagonal samples on the disc and returns the fit.
pub fn uniqueness_fit<F1, F2>(f1: F1, f2: F2, center: Complex64, radius: f64, degree: usize) -> Result<PolarizedPolynomial>
where
    F1: Fn(Complex64, Complex64) -> Result<Complex64>,
    F2: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    // disjoint from the default fitting layout
    let points = DiagonalSampleSet::ring_layout(center, radius, degree + 3, 2 * degree + 4, 0.25);
    let values = points.iter().map(|&z| Ok(f1(z, z.conj())? - f2(z, z.conj())?)).collect::<Result<Vec<_>>>()?;
    let samples = DiagonalSampleSet::new(center, radius, points, values)?;
    polarize_fit(&samples, degree, DEFAULT_SVD_CUTOFF)
}

/// Max normalized coefficient of the polarized difference F1 − F2.
pub fn uniqueness_residual<F1, F2>(f1: F1, f2: F2, center: Complex64, radius: f64, degree: usize) -> Result<f64>
where
    F1: Fn(Complex64, Complex64) -> Result<Complex64>,
    F2: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    Ok(uniqueness_fit(f1, f2, center, radius, degree)?.max_normalized_coefficient())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn modulus_squared() {
        let s = DiagonalSampleSet::random(c(0.0, 0.0), 1.0, 30, 3, |z| Ok(c(z.norm_sqr(), 0.0))).unwrap();
        let p = polarize_fit(&s, 2, DEFAULT_SVD_CUTOFF).unwrap();
        for a in 0..=2 {
            for b in 0..=2 {
                let expect = if (a, b) == (1, 1) { 1.0 } else { 0.0 };
                assert!((p.coefficients[a][b] - expect).norm() < 1e-10, "a{a}{b} = {}", p.coefficients[a][b]);
            }
        }
        let (z, w) = (c(0.3, -0.2), c(0.5, 0.1));
        assert!((p.eval(z, w) - z * w).norm() < 1e-10);
    }

    #[test]
    fn cubic_plus_constant() {
        let s = DiagonalSampleSet::concentric(c(0.0, 0.0), 1.0, 3, |z| Ok(z * z * z.conj() + 3.0)).unwrap();
        let p = polarize_fit(&s, 3, DEFAULT_SVD_CUTOFF).unwrap();
        assert!((p.coefficients[2][1] - 1.0).norm() < 1e-10);
        assert!((p.coefficients[0][0] - 3.0).norm() < 1e-10);
        assert!(p.residual < 1e-12);
    }

    #[test]
    fn log_difference_taylor() {
        let (cen, r, d) = (c(0.0, 2.0), 0.5, 6);
        let s = DiagonalSampleSet::concentric(cen, r, d, |z| Ok((z - z.conj()).ln())).unwrap();
        let p = polarize_fit(&s, d, DEFAULT_SVD_CUTOFF).unwrap();
        // log(4i + u − v) = log 4i + Σ_k (−1)^{k+1}/k · ((u − v)/4i)^k
        let four_i = c(0.0, 4.0);
        let mut worst: f64 = 0.0;
        for a in 0..=d {
            for b in 0..=d - a {
                let k = a + b;
                let expect = if k == 0 {
                    four_i.ln()
                } else {
                    let binom = (0..a).fold(1.0, |acc, j| acc * (k - j) as f64 / (j + 1) as f64);
                    let sign = if (k + 1 + b) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binom / k as f64 * four_i.powi(-(k as i32))
                };
                let got = p.normalized_coefficient(a, b);
                worst = worst.max((got - expect * r.powi(k as i32)).norm());
            }
        }
        assert!(worst < 1e-6, "worst normalized coefficient error {worst:e}");
        let (z, w) = (c(0.1, 2.1), c(0.05, -1.9));
        assert!((p.eval(z, w) - (z - w).ln()).norm() < 1e-6);
    }

    #[test]
    fn too_few_samples() {
        let pts = vec![c(0.0, 0.0), c(0.1, 0.0), c(0.0, 0.1)];
        let s = DiagonalSampleSet::new(c(0.0, 0.0), 1.0, pts, vec![c(1.0, 0.0); 3]).unwrap();
        assert!(matches!(polarize_fit(&s, 3, DEFAULT_SVD_CUTOFF), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn clustered_samples_are_rank_deficient() {
        let pts: Vec<_> = (0..40).map(|k| c(0.5, 0.0) + c(1e-9 * k as f64, 0.0)).collect();
        let s = DiagonalSampleSet::new(c(0.0, 0.0), 1.0, pts, vec![c(1.0, 0.0); 40]).unwrap();
        assert!(matches!(polarize_fit(&s, 2, DEFAULT_SVD_CUTOFF), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn samples_outside_disc_rejected() {
        assert!(DiagonalSampleSet::new(c(0.0, 0.0), 1.0, vec![c(2.0, 0.0)], vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn uniqueness_detects_perturbation() {
        let zw = |z: Complex64, w: Complex64| Ok(z * w);
        let same = uniqueness_residual(zw, zw, c(0.0, 0.0), 1.0, 4).unwrap();
        assert!(same < 1e-12);
        let pert = |z: Complex64, w: Complex64| Ok(z * w + 1e-4 * z * z * w);
        let diff = uniqueness_residual(zw, pert, c(0.0, 0.0), 1.0, 4).unwrap();
        assert!((diff - 1e-4).abs() < 1e-10);
    }

    #[test]
    fn polarization_recovers_holomorphic_function() {
        let g = |z: Complex64, w: Complex64| (z + 2.0 * w).exp() / (3.0 - z * w);
        let (cen, r, d) = (c(0.1, -0.2), 0.4, 10);
        let s = DiagonalSampleSet::concentric(cen, r, d, |z| Ok(g(z, z.conj()))).unwrap();
        let p = polarize_fit(&s, d, DEFAULT_SVD_CUTOFF).unwrap();
        for (dz, dw) in [(c(0.1, 0.1), c(0.1, -0.1)), (c(-0.2, 0.0), c(0.0, 0.2)), (c(0.0, 0.3), c(0.0, -0.3))] {
            let z = cen + dz;
            let w = z.conj() + dw * 0.5;
            assert!((p.eval(z, w) - g(z, w)).norm() < 1e-6);
        }
    }

    #[test]
    fn json_roundtrip() {
        let s = DiagonalSampleSet::concentric(c(0.0, 0.0), 1.0, 2, |z| Ok(c(z.norm_sqr(), 0.0))).unwrap();
        let p = polarize_fit(&s, 2, DEFAULT_SVD_CUTOFF).unwrap();
        let js = serde_json::to_string(&p).unwrap();
        let back: PolarizedPolynomial = serde_json::from_str(&js).unwrap();
        assert_eq!(back.degree, 2);
        assert!((back.coefficients[1][1] - 1.0).norm() < 1e-10);
    }
}
