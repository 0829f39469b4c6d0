//! Branch-managed complex logarithms and the Dedekind eta function.
//!
//! All principal values use `Arg ∈ (−π, π]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this imaginary part the S-transform is applied before the q-product.
pub const S_TRANSFORM_THRESHOLD: f64 = 0.05;

/// Relative accuracy targeted by the automatic eta truncation.
pub const ETA_TAIL_TARGET: f64 = 1e-15;

/// Hard cap on the number of q-product factors.
pub const ETA_TERM_CAP: usize = 4096;

/// Hard cap on T/S reduction steps used for points close to the real axis.
pub const MAX_REDUCTION_STEPS: usize = 64;

/// A point of the upper half plane (the genus-1 Teichmüller model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint(Complex64);

impl HalfPlanePoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NotInUpperHalfPlane(z.im));
        }
        Ok(Self(z))
    }

    pub fn from_parts(x: f64, y: f64) -> Result<Self> {
        Self::new(Complex64::new(x, y))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn x(self) -> f64 {
        self.0.re
    }

    pub fn y(self) -> f64 {
        self.0.im
    }

    /// The nome q = e^{2πiz}.
    pub fn nome(self) -> Complex64 {
        (2.0 * PI * I * self.0).exp()
    }

    /// Image under z ↦ (az + b)/(cz + d); stays in H for integer matrices of determinant 1.
    pub fn mobius(self, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let z = self.0;
        Self::new((a as f64 * z + b as f64) / (c as f64 * z + d as f64))
    }
}

/// A complex logarithm value together with its sheet relative to the principal branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchedLog {
    pub value: Complex64,
    pub winding: i64,
}

impl BranchedLog {
    /// Principal logarithm of `u` (winding 0).
    pub fn principal(u: Complex64) -> Result<Self> {
        if u == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroArgument);
        }
        Ok(Self { value: principal_log(u), winding: 0 })
    }

    /// Logarithm of `u` on sheet `winding`.
    pub fn on_sheet(u: Complex64, winding: i64) -> Result<Self> {
        let p = Self::principal(u)?;
        Ok(Self { value: p.value + 2.0 * PI * I * winding as f64, winding })
    }

    /// The argument whose logarithm this is.
    pub fn argument(&self) -> Complex64 {
        self.value.exp()
    }
}

/// Principal logarithm with the convention Arg ∈ (−π, π].
pub fn principal_log(u: Complex64) -> Complex64 {
    let mut arg = u.im.atan2(u.re);
    // atan2 returns −π for (negative, −0.0); fold onto the closed side of the cut.
    if arg == -PI {
        arg = PI;
    }
    Complex64::new(u.norm().ln(), arg)
}

/// Analytic continuation of log along a polygonal path starting from `initial`,
/// which must be a logarithm of `path[0]`.
pub fn continue_log(path: &[Complex64], initial: BranchedLog) -> Result<BranchedLog> {
    let Some(&first) = path.first() else {
        return Ok(initial);
    };
    if first.norm() == 0.0 {
        return Err(Error::PathThroughZero(0));
    }
    let mut value = initial.value;
    let mut prev = first;
    for (k, &p) in path.iter().enumerate().skip(1) {
        if p.norm() == 0.0 {
            return Err(Error::PathThroughZero(k));
        }
        let step = principal_log(p / prev);
        if step.im.abs() >= PI / 2.0 {
            return Err(Error::PathTooCoarse(k - 1, k));
        }
        value += step;
        prev = p;
    }
    let last = *path.last().unwrap();
    // value differs from Log(last) by an exact multiple of 2πi up to rounding
    let winding = ((value.im - principal_log(last).im) / (2.0 * PI)).round() as i64;
    Ok(BranchedLog { value, winding })
}

/// u^{1/2} = exp(½L), L the logarithm of `u` on the hinted sheet (principal if none).
pub fn half_power(u: Complex64, branch_hint: Option<BranchedLog>) -> Result<Complex64> {
    let winding = branch_hint.map_or(0, |b| b.winding);
    let log = BranchedLog::on_sheet(u, winding)?;
    Ok((0.5 * log.value).exp())
}

/// Number of eta product factors requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Terms {
    /// Truncate where the certified tail drops below [`ETA_TAIL_TARGET`].
    #[default]
    Auto,
    /// Exactly this many factors (no reduction, no tail guarantee).
    Fixed(usize),
}

/// Upper bound on Σ_{n>N} |Log(1 − qⁿ)| for |q| = `q_abs` < 1.
pub fn eta_tail_bound(q_abs: f64, n: usize) -> f64 {
    let qn1 = q_abs.powi(n as i32 + 1);
    qn1 / ((1.0 - q_abs) * (1.0 - qn1))
}

/// Smallest N whose tail bound meets [`ETA_TAIL_TARGET`].
fn auto_terms(q_abs: f64) -> Result<usize> {
    let mut n = 1usize;
    while eta_tail_bound(q_abs, n) > 0.5 * ETA_TAIL_TARGET {
        n += 1;
        if n > ETA_TERM_CAP {
            return Err(Error::BudgetExceeded(format!(
                "eta needs more than {ETA_TERM_CAP} factors at |q| = {q_abs}"
            )));
        }
    }
    Ok(n)
}

/// Σ_{n=1}^{N} Log(1 − qⁿ), summed in a fixed order.
fn log_product(q: Complex64, terms: usize) -> Complex64 {
    let mut qn = q;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..terms {
        // |qⁿ| < 1 keeps 1 − qⁿ in the open right half plane, away from the cut.
        acc += principal_log(1.0 - qn);
        qn *= q;
    }
    acc
}

/// Reduction of z to Im ≥ threshold by integer translations and S-inversions.
/// Returns the reduced point and the additive correction to log η.
fn reduce(z: HalfPlanePoint) -> Result<(Complex64, Complex64)> {
    let mut z = z.value();
    let mut correction = Complex64::new(0.0, 0.0);
    let mut steps = 0;
    while z.im < S_TRANSFORM_THRESHOLD {
        if steps == MAX_REDUCTION_STEPS {
            return Err(Error::BudgetExceeded(format!(
                "Im(z) too small: {MAX_REDUCTION_STEPS} modular reduction steps did not reach Im(z) >= {S_TRANSFORM_THRESHOLD}"
            )));
        }
        let k = z.re.round();
        // log η(z) = log η(z − k) + iπk/12
        correction += I * PI * k / 12.0;
        z -= k;
        // log η(z) = log η(−1/z) − ½ Log(−iz)
        correction -= 0.5 * principal_log(-I * z);
        z = -1.0 / z;
        if !(z.im > 0.0) || !z.im.is_finite() {
            return Err(Error::BudgetExceeded("modular reduction lost precision".into()));
        }
        steps += 1;
    }
    Ok((z, correction))
}

/// Dedekind eta η(z) = q^{1/24} ∏ (1 − qⁿ).
pub fn eta(z: HalfPlanePoint, terms: Terms) -> Result<Complex64> {
    match terms {
        Terms::Fixed(n) => {
            if n > ETA_TERM_CAP {
                return Err(Error::BudgetExceeded(format!("{n} factors requested, cap is {ETA_TERM_CAP}")));
            }
            let q = z.nome();
            let mut prod = Complex64::new(1.0, 0.0);
            let mut qn = q;
            for _ in 0..n {
                prod *= 1.0 - qn;
                qn *= q;
            }
            Ok((PI * I * z.value() / 12.0).exp() * prod)
        }
        Terms::Auto => {
            if z.y() >= S_TRANSFORM_THRESHOLD {
                let n = auto_terms(z.nome().norm())?;
                eta(z, Terms::Fixed(n))
            } else {
                Ok(log_eta(z)?.exp())
            }
        }
    }
}

/// The branch of log η given by πiz/12 + Σ Log(1 − qⁿ); continuous on H.
pub fn log_eta(z: HalfPlanePoint) -> Result<Complex64> {
    let (reduced, correction) = reduce(z)?;
    let q = (2.0 * PI * I * reduced).exp();
    let n = auto_terms(q.norm())?;
    Ok(PI * I * reduced / 12.0 + log_product(q, n) + correction)
}

/// The weight-12 discriminant η(z)²⁴.
pub fn discriminant(z: HalfPlanePoint) -> Result<Complex64> {
    Ok((24.0 * log_eta(z)?).exp())
}
