//! Richardson-extrapolated central differences for holomorphic and
//! anti-holomorphic (Wirtinger) derivatives.

use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn richardson<F: Fn(f64) -> Complex64>(d: F, h: f64) -> Complex64 {
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// d/dz of a holomorphic `f`, differenced along the real direction.
pub fn holo_derivative<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> Complex64 {
    richardson(|s| (f(z + s) - f(z - s)) / (2.0 * s), h)
}

/// Wirtinger derivatives (d/dz, d/dz̄) = ½(∂x ∓ i∂y) of an arbitrary smooth `f`.
pub fn wirtinger<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> (Complex64, Complex64) {
    let dx = richardson(|s| (f(z + s) - f(z - s)) / (2.0 * s), h);
    let dy = richardson(|s| (f(z + I * s) - f(z - I * s)) / (2.0 * s), h);
    (0.5 * (dx - I * dy), 0.5 * (dx + I * dy))
}

/// |∂f/∂z̄| at `z`; vanishes (up to O(h⁴) + rounding) for holomorphic `f`.
pub fn dbar_residual<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> f64 {
    wirtinger(f, z, h).1.norm()
}

/// ∂²f/∂z∂z̄ = ¼Δf via the five-point Laplacian.
pub fn ddbar<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> Complex64 {
    let f0 = f(z);
    richardson(
        |s| (f(z + s) + f(z - s) + f(z + I * s) + f(z - I * s) - 4.0 * f0) / (4.0 * s * s),
        h,
    )
}

/// ∂²g/∂a∂b for `g` holomorphic in two separate complex arguments,
/// differenced along real directions. `g(da, db)` evaluates at the shifted point.
pub fn mixed_derivative<F: Fn(f64, f64) -> Complex64>(g: F, h: f64) -> Complex64 {
    richardson(
        |s| (g(s, s) - g(s, -s) - g(-s, s) + g(-s, -s)) / (4.0 * s * s),
        h,
    )
}
