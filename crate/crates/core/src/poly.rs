//! Sparse multivariate polynomials with complex coefficients.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: Complex64,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    vars: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: Vec::new() }
    }

    pub fn from_terms(vars: usize, terms: Vec<Monomial>) -> Self {
        let mut p = Self::zero(vars);
        for t in terms {
            p.add_term(t.coeff, &t.exponents);
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    /// Adds `coeff · ∏ xᵢ^{eᵢ}`, merging with an existing monomial.
    pub fn add_term(&mut self, coeff: Complex64, exponents: &[u32]) {
        assert_eq!(exponents.len(), self.vars, "exponent vector length");
        if coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.exponents == exponents) {
            t.coeff += coeff;
        } else {
            self.terms.push(Monomial { coeff, exponents: exponents.to_vec() });
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exponents.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.vars, "point dimension");
        self.terms
            .iter()
            .map(|t| {
                t.exponents
                    .iter()
                    .zip(x)
                    .fold(t.coeff, |acc, (&e, &xi)| acc * xi.powu(e))
            })
            .sum()
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.vars);
        for t in &self.terms {
            let e = t.exponents[var];
            if e == 0 {
                continue;
            }
            let mut ex = t.exponents.clone();
            ex[var] -= 1;
            out.add_term(t.coeff * e as f64, &ex);
        }
        out
    }

    /// Up to `n_terms` distinct random monomials of total degree ≤ `max_degree`, coefficients
    /// with real and imaginary parts in [−1, 1].
    pub fn random<R: Rng>(vars: usize, max_degree: u32, n_terms: usize, rng: &mut R) -> Self {
        let mut p = Self::zero(vars);
        let mut attempts = 0;
        while p.terms.len() < n_terms && attempts < 64 * n_terms {
            attempts += 1;
            let total = rng.gen_range(0..=max_degree);
            let mut ex = vec![0u32; vars];
            for _ in 0..total {
                ex[rng.gen_range(0..vars)] += 1;
            }
            let c = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            if p.terms.iter().all(|t| t.exponents != ex) {
                p.add_term(c, &ex);
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn eval_and_derivative() {
        // g = x²y³ + 2iz
        let mut g = Polynomial::zero(3);
        g.add_term(Complex64::new(1.0, 0.0), &[2, 3, 0]);
        g.add_term(Complex64::new(0.0, 2.0), &[0, 0, 1]);
        let p = [Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0)];
        let v = g.eval(&p);
        let expect = p[0] * p[0] * 8.0 + Complex64::new(0.0, 2.0) * p[2];
        assert!((v - expect).norm() < 1e-14);
        let dx = g.derivative(0);
        assert!((dx.eval(&p) - 2.0 * p[0] * 8.0).norm() < 1e-14);
        assert_eq!(g.derivative(2).degree(), 0);
        assert_eq!(g.degree(), 5);
    }

    #[test]
    fn random_respects_degree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = Polynomial::random(4, 4, 6, &mut rng);
            assert!(p.degree() <= 4);
            for t in p.terms() {
                assert!(t.coeff.re.abs() <= 1.0 && t.coeff.im.abs() <= 1.0);
            }
        }
    }
}
