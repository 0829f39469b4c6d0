use std::f64::consts::PI;

use holext::catalog::{FormCatalog, FormCatalogEntry, FormKind};
use holext::extension::{genus1_extension, symmetrize, ProductPoint};
use holext::polarization::{polarize_fit, DiagonalSampleSet, DEFAULT_SVD_CUTOFF};
use holext::potential::{cone_potential, ClosedHoloForm, ConeQuadrature, Region};
use holext::special::{continue_log, discriminant, eta, log_eta, BranchedLog, HalfPlanePoint, Terms};
use holext::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn upper() -> impl Strategy<Value = HalfPlanePoint> {
    (-1.0..1.0f64, 0.25..3.0f64).prop_map(|(x, y)| HalfPlanePoint::from_parts(x, y).unwrap())
}

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eta_translation(z in upper()) {
        let a = eta(z.mobius(1, 1, 0, 1).unwrap(), Terms::default()).unwrap();
        let b = eta(z, Terms::default()).unwrap() * Complex64::from_polar(1.0, PI / 12.0);
        prop_assert!((a - b).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn eta_inversion(z in upper()) {
        let s = eta(z.mobius(0, -1, 1, 0).unwrap(), Terms::default()).unwrap();
        let rhs = (-Complex64::i() * z.value()).sqrt() * eta(z, Terms::default()).unwrap();
        prop_assert!((s - rhs).norm() <= 1e-11 * rhs.norm());
    }

    #[test]
    fn discriminant_weight_twelve(z in upper()) {
        let d = discriminant(z).unwrap();
        let t = discriminant(z.mobius(1, 1, 0, 1).unwrap()).unwrap();
        prop_assert!((t - d).norm() <= 1e-12 * d.norm());
        let s = discriminant(z.mobius(0, -1, 1, 0).unwrap()).unwrap();
        let rhs = z.value().powu(12) * d;
        prop_assert!((s - rhs).norm() <= 1e-10 * rhs.norm());
    }

    #[test]
    fn log_eta_exponentiates_to_eta(z in upper()) {
        let e = eta(z, Terms::default()).unwrap();
        prop_assert!((log_eta(z).unwrap().exp() - e).norm() <= 1e-12 * e.norm());
    }

    #[test]
    fn continued_log_depends_only_on_winding(
        r0 in 0.3..3.0f64, r1 in 0.3..3.0f64, a0 in -3.0..3.0f64, a1 in -3.0..3.0f64, turns in -2i64..=2,
    ) {
        let start = Complex64::from_polar(r0, a0);
        let total = a1 - a0 + 2.0 * PI * turns as f64;
        let n = 400;
        // two homotopic paths: a log-spiral and a wobbly detour
        let spiral: Vec<_> = (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                Complex64::from_polar(r0.powf(1.0 - t) * r1.powf(t), a0 + t * total)
            })
            .collect();
        let wobble: Vec<_> = spiral
            .iter()
            .enumerate()
            .map(|(k, p)| p * (1.0 + 0.4 * (PI * k as f64 / n as f64).sin() * (3.0 * PI * k as f64 / n as f64).cos()))
            .collect();
        let init = BranchedLog::principal(start).unwrap();
        let a = continue_log(&spiral, init).unwrap();
        let b = continue_log(&wobble, init).unwrap();
        prop_assert!((a.value - b.value).norm() < 1e-12);
        let expected = init.value + c((r1 / r0).ln(), total);
        prop_assert!((a.value - expected).norm() < 1e-9);
    }

    #[test]
    fn symmetrized_is_real_on_diagonal(z in coeff(), a in coeff(), b in coeff(), k in coeff()) {
        let q = move |u: Complex64, v: Complex64| Ok(a * u * u * v + b * v + k * (u - v).exp());
        let s = symmetrize(q, z, z.conj()).unwrap();
        prop_assert!(s.im.abs() <= 1e-12 * (1.0 + s.norm()));
    }

    #[test]
    fn genus1_extension_is_real_on_diagonal(z in upper()) {
        let v = genus1_extension(ProductPoint::diagonal(z)).unwrap();
        prop_assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn genus1_extension_mirror_symmetry(z in upper(), w in upper()) {
        let p = ProductPoint::new(z.value(), w.value().conj()).unwrap();
        let a = genus1_extension(p).unwrap();
        let b = genus1_extension(p.mirrored()).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-11);
    }
}

fn polynomial_in_z_zbar(degree: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(coeff(), (degree + 1) * (degree + 1))
}

fn eval_poly(coeffs: &[Complex64], degree: usize, z: Complex64, w: Complex64) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for a in 0..=degree {
        for b in 0..=degree {
            s += coeffs[a * (degree + 1) + b] * z.powu(a as u32) * w.powu(b as u32);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn polarization_is_exact_on_polynomials(
        coeffs in polynomial_in_z_zbar(3), cx in -1.0..1.0f64, cy in -1.0..1.0f64, r in 0.2..2.0f64, seed in 0u64..1000,
    ) {
        let center = c(cx, cy);
        let coeffs2 = coeffs.clone();
        let samples = DiagonalSampleSet::random(center, r, 60, seed, move |z| Ok(eval_poly(&coeffs2, 3, z, z.conj()))).unwrap();
        let fit = polarize_fit(&samples, 3, DEFAULT_SVD_CUTOFF).unwrap();
        let scale = coeffs.iter().map(|a| a.norm()).fold(1.0, f64::max) * (1.0 + center.norm() + r).powi(6);
        for (dz, dw) in [(0.3, -0.2), (-0.5, 0.1), (0.0, 0.6)] {
            let z = center + r * c(dz, dw);
            let w = center.conj() + r * c(dw, dz);
            prop_assert!((fit.eval(z, w) - eval_poly(&coeffs, 3, z, w)).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn polarization_degree_is_stable(coeffs in polynomial_in_z_zbar(2), extra in 1usize..3) {
        let center = c(0.2, 1.0);
        let f = move |z: Complex64| Ok(eval_poly(&coeffs, 2, z, z.conj()));
        let samples = DiagonalSampleSet::concentric(center, 0.5, 2 + extra, f).unwrap();
        let low = polarize_fit(&samples, 2, DEFAULT_SVD_CUTOFF).unwrap();
        let high = polarize_fit(&samples, 2 + extra, DEFAULT_SVD_CUTOFF).unwrap();
        for a in 0..=2 + extra {
            for b in 0..=2 + extra {
                let lo = if a <= 2 && b <= 2 { low.normalized_coefficient(a, b) } else { c(0.0, 0.0) };
                prop_assert!((high.normalized_coefficient(a, b) - lo).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn cone_potential_vanishes_on_base_slices(
        m in prop::collection::vec(coeff(), 4), z in prop::collection::vec(coeff(), 2), w in prop::collection::vec(coeff(), 2),
    ) {
        let (bz, bw) = (vec![c(0.1, 0.0), c(0.0, -0.2)], vec![c(-0.3, 0.1), c(0.2, 0.2)]);
        let form = ClosedHoloForm::constant(
            nalgebra::DMatrix::from_row_slice(2, 2, &m), bz.clone(), bw.clone(), Region::Entire, Region::Entire,
        ).unwrap();
        let quad = ConeQuadrature::fixed(16);
        prop_assert!(cone_potential(&form, &bz, &w, &quad).unwrap().norm() < 1e-13);
        prop_assert!(cone_potential(&form, &z, &bw, &quad).unwrap().norm() < 1e-13);
    }

    #[test]
    fn catalog_text_roundtrip(
        name in "[a-z][a-z0-9_]{0,8}", m in prop::collection::vec(coeff(), 4), pc in coeff(), k in 2u32..6, b in coeff(),
    ) {
        let constant = FormCatalogEntry {
            name: format!("{name}_c"),
            kind: FormKind::Constant { matrix: m },
            dim: 2,
            base_z: vec![b, c(0.0, 1.0)],
            base_w: vec![b.conj(), c(0.5, -1.0)],
            domain_z: Region::Ball { center: vec![c(0.0, 0.0); 2], radius: 3.5 },
            domain_w: Region::Entire,
        };
        let pole = FormCatalogEntry {
            name: format!("{name}_p"),
            kind: FormKind::PolePower { coefficient: pc, exponent: k },
            dim: 1,
            base_z: vec![c(b.re, 1.0 + b.im.abs())],
            base_w: vec![c(b.re, -1.0)],
            domain_z: Region::UpperHalf,
            domain_w: Region::LowerHalf,
        };
        let catalog = FormCatalog { entries: vec![constant, pole] };
        prop_assert_eq!(FormCatalog::parse(&catalog.to_text()).unwrap(), catalog);
    }
}
