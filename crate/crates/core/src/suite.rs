//! The verification suite behind `holext verify-all`.
//!
//! Each criterion is a function returning its checks; `verify_all` runs them in
//! order and assembles a deterministic [`RunReport`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog::FormCatalog;
use crate::error::Result;
use crate::extension::{
    genus1_extension, genus1_symmetrized_potential, modular_invariance_check, pluriharmonic_split, Generator,
    ModularWord, ProductPoint, RealFn,
};
use crate::fd;
use crate::polarization::{polarize_fit, uniqueness_residual, DiagonalSampleSet, PolarizedPolynomial, DEFAULT_SVD_CUTOFF};
use crate::poly::Polynomial;
use crate::potential::{
    check_closed_and_holomorphic, cone_potential, potential_dbar_residual, verify_boundary_vanishing,
    verify_mixed_derivative, ClosedHoloForm, ConeQuadrature, Region,
};
use crate::report::{Check, RunReport};
use crate::special::{log_eta, principal_log, HalfPlanePoint};
use crate::spectral::{paper_det_torus, zeta_det_torus, SpectralTruncation, TorusMetric};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Full,
    Fast,
}

pub const SEED: u64 = 20_240_611;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hp(x: f64, y: f64) -> HalfPlanePoint {
    HalfPlanePoint::from_parts(x, y).expect("grid points lie in H")
}

fn fmt_c(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn spread(v: &[f64]) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    (mean, max - min)
}

/// Spectral ζ(0) and the normalization of exp(−ζ′(0)).
pub fn spectral_oracle(_mode: Mode) -> Vec<Check> {
    let zs = [hp(0.0, 1.0), hp(0.0, 2.0), hp(0.3, 1.1)];
    let trunc = SpectralTruncation::default();
    let reports: Vec<_> = zs.par_iter().map(|&z| zeta_det_torus(z, TorusMetric::Lattice, &trunc)).collect();
    let mut out = Vec::new();
    let mut lattice = Vec::new();
    let mut closed_form = Vec::new();
    for (z, r) in zs.iter().zip(reports) {
        let name = format!("spectral.zeta_at_zero[{}]", fmt_c(z.value()));
        match r {
            Ok(r) => {
                out.push(Check::below(name, (r.zeta_at_zero + 1.0).abs(), 1e-9).with_value(r.zeta_at_zero));
                out.push(
                    Check::below(
                        format!("spectral.tail_certificate[{}]", fmt_c(z.value())),
                        r.lattice_tail_bound + r.integral_tail_bound,
                        1e-10,
                    )
                    .with_value(r.log_det),
                );
                let le = log_eta(*z).map(|l| l.re).unwrap_or(f64::NAN);
                lattice.push((r.log_det - 2.0 * z.y().ln() - 4.0 * le).exp());
                closed_form.push((r.log_det - (2.0 * PI).ln() - 0.5 * z.y().ln() - 2.0 * le).exp());
            }
            Err(e) => out.push(Check::failed(name, 1e-9, e)),
        }
    }
    if lattice.len() == zs.len() {
        let (ml, sl) = spread(&lattice);
        let (mp, sp) = spread(&closed_form);
        let (rl, rp) = (sl / ml.abs(), sp / mp.abs());
        let which = if rl < 1e-8 {
            "y^2|eta|^4"
        } else if rp < 1e-8 {
            "2pi y^(1/2)|eta|^2"
        } else {
            "neither"
        };
        out.push(
            Check::below("spectral.normalization_constant", rl.min(rp), 1e-8)
                .with_value(if rl <= rp { ml } else { mp })
                .with_detail(format!(
                    "constant ratio against {which}; relative spread vs y^2|eta|^4 = {rl:.3e} (mean {ml:.12}), vs 2pi y^(1/2)|eta|^2 = {rp:.3e} (mean {mp:.12})"
                )),
        );
    }
    out
}

/// Invariance of the spectral determinant under z ↦ −1/z.
pub fn spectral_modular(_mode: Mode) -> Vec<Check> {
    let z = hp(0.3, 1.1);
    let trunc = SpectralTruncation::default();
    let run = |metric| -> Result<f64> {
        let s = z.mobius(0, -1, 1, 0)?;
        Ok(zeta_det_torus(z, metric, &trunc)?.log_det - zeta_det_torus(s, metric, &trunc)?.log_det)
    };
    let lattice = run(TorusMetric::Lattice);
    match run(TorusMetric::UnitArea) {
        Ok(d) => {
            let detail = match lattice {
                Ok(l) => format!("unit-area metric; lattice-scaled metric differs by {l:.12} = log|z|^2"),
                Err(e) => format!("unit-area metric; lattice-scaled metric failed: {e}"),
            };
            vec![Check::below("spectral.s_invariance[0.3+1.1i]", d.abs(), 1e-8).with_detail(detail)]
        }
        Err(e) => vec![Check::failed("spectral.s_invariance[0.3+1.1i]", 1e-8, e)],
    }
}

/// Genus-1 cone potential against log((z−w)(z₀−w₀)/((z−w₀)(z₀−w))).
pub fn cone_closed_form(mode: Mode) -> Vec<Check> {
    let (z0, w0) = (c(0.0, 1.0), c(0.0, -1.0));
    let form = ClosedHoloForm::genus1(z0, w0).expect("genus-1 form");
    let quad = ConeQuadrature::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = if mode == Mode::Fast { 5 } else { 10 };
    let pts: Vec<(Complex64, Complex64)> = (0..n)
        .map(|_| {
            let z = c(rng.gen_range(-1.5..1.5), rng.gen_range(0.5..2.5));
            let w = c(rng.gen_range(-1.5..1.5), rng.gen_range(-2.5..-0.5));
            (z, w)
        })
        .collect();
    let per_point: Vec<Result<(f64, f64)>> = pts
        .par_iter()
        .map(|&(z, w)| {
            let q = cone_potential(&form, &[z], &[w], &quad)?;
            let closed = principal_log(z - w) - principal_log(z0 - w) - principal_log(z - w0) + principal_log(z0 - w0);
            let rel = (q.exp() / closed.exp() - 1.0).norm();
            let md = verify_mixed_derivative(&form, &[z], &[w], &quad, 1e-3)?[(0, 0)];
            Ok((rel, md))
        })
        .collect();
    let min_sep = pts.iter().map(|(z, w)| (z - w).norm()).fold(f64::INFINITY, f64::min);
    let mut out = Vec::new();
    match per_point.into_iter().collect::<Result<Vec<_>>>() {
        Ok(v) => {
            let rel = v.iter().map(|x| x.0).fold(0.0, f64::max);
            let md = v.iter().map(|x| x.1).fold(0.0, f64::max);
            out.push(Check::below("cone.exp_closed_form", rel, 1e-8).with_detail(format!("{n} points, min |z-w| = {min_sep:.3}")));
            out.push(Check::below("cone.mixed_derivative", md, 1e-7));
        }
        Err(e) => out.push(Check::failed("cone.exp_closed_form", 1e-8, e)),
    }
    let samples: Vec<_> = pts.iter().map(|&(z, w)| (vec![z], vec![w])).collect();
    let b = verify_boundary_vanishing(&form, &samples, &quad, 1e-10);
    let mut chk = Check::below("cone.boundary_vanishing", b.max_residual, 1e-10);
    if !b.errors.is_empty() {
        chk.pass = false;
        chk.detail = Some(b.errors.join("; "));
    }
    out.push(chk);
    out
}

fn random_point<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Cone potentials of ∂z∂w g for random polynomial g against the corner combination of g.
pub fn synthetic_forms(mode: Mode) -> Vec<Check> {
    let per_dim = if mode == Mode::Fast { 2 } else { 5 };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut cases = Vec::new();
    for n in 1..=3 {
        for _ in 0..per_dim {
            let g = Polynomial::random(2 * n, 4, 6, &mut rng);
            let (z0, w0) = (random_point(n, &mut rng), random_point(n, &mut rng));
            let (z, w) = (random_point(n, &mut rng), random_point(n, &mut rng));
            cases.push((n, g, z0, w0, z, w));
        }
    }
    let quad = ConeQuadrature::default();
    let results: Vec<Result<(usize, f64, f64, f64)>> = cases
        .par_iter()
        .map(|(n, g, z0, w0, z, w)| {
            let form = ClosedHoloForm::mixed_second_of(g, z0.clone(), w0.clone(), Region::Entire, Region::Entire)?;
            let at = |a: &[Complex64], b: &[Complex64]| {
                let x: Vec<_> = a.iter().chain(b).copied().collect();
                g.eval(&x)
            };
            let expect = at(z, w) - at(z0, w) - at(z, w0) + at(z0, w0);
            let q = cone_potential(&form, z, w, &quad)?;
            let dbar = potential_dbar_residual(&form, z, w, &quad, 1e-3)?;
            let closed = check_closed_and_holomorphic(&form, &[(z.clone(), w.clone())], 1e-3, 1e-8);
            Ok((*n, (q - expect).norm(), dbar, closed.closedness_residual.max(closed.holomorphy_residual)))
        })
        .collect();
    let mut out = Vec::new();
    for n in 1..=3 {
        let mut worst = (0.0f64, 0.0f64, 0.0f64);
        let mut err = None;
        for r in results.iter() {
            match r {
                Ok((m, a, b, cl)) if *m == n => {
                    worst = (worst.0.max(*a), worst.1.max(*b), worst.2.max(*cl));
                }
                Err(e) if err.is_none() => err = Some(e.to_string()),
                _ => {}
            }
        }
        if let Some(e) = err {
            out.push(Check::failed(format!("synthetic.n{n}.corner_formula"), 1e-9, e));
            continue;
        }
        let d = format!("{per_dim} forms");
        out.push(Check::below(format!("synthetic.n{n}.corner_formula"), worst.0, 1e-9).with_detail(d));
        out.push(Check::below(format!("synthetic.n{n}.antiholomorphic_residual"), worst.1, 1e-8));
        out.push(Check::below(format!("synthetic.n{n}.closedness_residual"), worst.2, 1e-8));
    }
    out
}

/// The non-closed catalog form must fail the closedness check.
pub fn negative_control(_mode: Mode) -> Vec<Check> {
    let cat = FormCatalog::builtin();
    let form = match cat.get("bad_nonclosed").and_then(|e| e.build()) {
        Ok(f) => f,
        Err(e) => return vec![Check::failed("negative_control.bad_nonclosed", 1e-3, e)],
    };
    let samples = vec![
        (vec![c(0.5, 0.2), c(0.8, -0.1)], vec![c(-0.3, 0.4), c(0.6, 0.6)]),
        (vec![c(-0.2, 0.1), c(0.3, 0.3)], vec![c(0.1, -0.5), c(-0.4, 0.2)]),
    ];
    let rep = check_closed_and_holomorphic(&form, &samples, 1e-3, 1e-8);
    let mut chk = Check::above("negative_control.bad_nonclosed", rep.closedness_residual, 1e-3);
    chk.pass &= !rep.pass;
    vec![chk.with_detail(format!("check_closed_and_holomorphic pass = {}", rep.pass))]
}

/// Realness and Laplacian of the symmetrized genus-1 potential.
pub fn symmetrizer(mode: Mode) -> Vec<Check> {
    let form = ClosedHoloForm::genus1(c(0.0, 1.0), c(0.0, -1.0)).expect("genus-1 form");
    let qt = genus1_symmetrized_potential(form, ConeQuadrature::default());
    let (xs, ys): (Vec<f64>, Vec<f64>) = if mode == Mode::Fast {
        (vec![-1.0, 0.0, 1.0], vec![0.5, 1.5])
    } else {
        (vec![-1.0, -0.5, 0.0, 0.5, 1.0], vec![0.5, 1.0, 1.5, 2.0])
    };
    let grid: Vec<Complex64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| c(x, y))).collect();
    let imag: Result<Vec<f64>> = grid.par_iter().map(|&z| Ok(qt(&[z], &[z.conj()])?.im.abs())).collect();
    let mut out = Vec::new();
    match imag {
        Ok(v) => out.push(
            Check::below("symmetrizer.real_on_diagonal", v.into_iter().fold(0.0, f64::max), 1e-11)
                .with_detail(format!("{} grid points", grid.len())),
        ),
        Err(e) => out.push(Check::failed("symmetrizer.real_on_diagonal", 1e-11, e)),
    }
    let pts = [c(0.0, 1.0), c(1.0, 2.0), c(-0.5, 1.5)];
    let lap: Vec<f64> = pts
        .par_iter()
        .map(|&z| {
            let l = fd::ddbar(|u| qt(&[u], &[u.conj()]).unwrap_or(c(f64::NAN, 0.0)), z, 1e-2);
            (l - (z - z.conj()).powi(-2)).norm()
        })
        .collect();
    out.push(Check::below("symmetrizer.ddbar_matches_wp", lap.into_iter().fold(0.0, f64::max), 1e-6));
    out
}

/// Grid on which the genus-1 extension is compared with the closed-form diagonal determinant.
pub fn genus1_grid(mode: Mode) -> Vec<HalfPlanePoint> {
    let k = if mode == Mode::Fast { 3 } else { 5 };
    let mut out = Vec::new();
    for j in 0..k {
        for i in 0..k {
            let x = -0.4 + 0.8 * i as f64 / (k - 1) as f64;
            let y = 0.8 + 1.2 * j as f64 / (k - 1) as f64;
            out.push(hp(x, y));
        }
    }
    out
}

/// Mean and spread of Re genus1_extension(z, z̄) − paper_det_torus(z), and max |Im|.
pub fn genus1_constant(grid: &[HalfPlanePoint]) -> Result<(f64, f64, f64)> {
    let v: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&z| {
            let e = genus1_extension(ProductPoint::diagonal(z))?;
            Ok((e.re - paper_det_torus(z)?, e.im.abs()))
        })
        .collect::<Result<_>>()?;
    let diffs: Vec<f64> = v.iter().map(|x| x.0).collect();
    let (mean, sp) = spread(&diffs);
    Ok((mean, sp, v.iter().map(|x| x.1).fold(0.0, f64::max)))
}

pub fn genus1_extension_checks(mode: Mode) -> Vec<Check> {
    let grid = genus1_grid(mode);
    let mut out = Vec::new();
    match genus1_constant(&grid) {
        Ok((mean, sp, im)) => {
            out.push(Check::below("genus1.imaginary_on_diagonal", im, 1e-12).with_detail(format!("{} grid points", grid.len())));
            out.push(
                Check::below("genus1.constant_offset", sp, 1e-9)
                    .with_value(mean)
                    .with_detail(format!("-log(2pi)/2 = {:.12}", -0.5 * (2.0 * PI).ln())),
            );
        }
        Err(e) => out.push(Check::failed("genus1.constant_offset", 1e-9, e)),
    }
    let off = [
        (c(0.1, 1.2), c(0.4, -0.7)),
        (c(-0.3, 0.9), c(0.2, -1.6)),
        (c(0.5, 2.0), c(-0.5, -0.5)),
        (c(0.0, 1.0), c(0.3, -2.0)),
    ];
    let res: Vec<f64> = off
        .par_iter()
        .map(|&(z, w)| {
            let f = |a: Complex64, b: Complex64| {
                ProductPoint::new(a, b).and_then(genus1_extension).unwrap_or(c(f64::NAN, 0.0))
            };
            fd::dbar_residual(|u| f(u, w), z, 1e-3).max(fd::dbar_residual(|u| f(z, u), w, 1e-3))
        })
        .collect();
    out.push(Check::below("genus1.antiholomorphic_residual", res.into_iter().fold(0.0, f64::max), 1e-7));
    out
}

/// Invariance of exp(24 L) under the diagonal SL(2, Z) action.
pub fn mapping_class(_mode: Mode) -> Vec<Check> {
    let p = ProductPoint::new(c(0.1, 1.2), c(-0.3, -0.8)).expect("point in H × H̄");
    let mut words = vec![ModularWord(vec![Generator::T]), ModularWord(vec![Generator::S])];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    for _ in 0..5 {
        words.push(ModularWord::random(4, &mut rng));
    }
    words
        .iter()
        .map(|w| {
            let name = format!("modular.exp24[{w}]");
            match modular_invariance_check(p, w) {
                Ok(r) => Check::below(name, r.relative, 1e-9).with_detail(format!(
                    "L difference mod 2pi i/24 = {:.3e}{:+.3e}i",
                    r.reduced_log_difference.re, r.reduced_log_difference.im
                )),
                Err(e) => Check::failed(name, 1e-9, e),
            }
        })
        .collect()
}

/// f from the pluriharmonic split of Re z², Re e^z and log|z − 5|² on the unit disc at i.
pub fn pluriharmonic(mode: Mode) -> Vec<Check> {
    let base = c(0.0, 1.0);
    let hs: Vec<(&str, Arc<RealFn>)> = vec![
        ("re_z2", Arc::new(|z: Complex64| (z * z).re)),
        ("re_exp", Arc::new(|z: Complex64| z.exp().re)),
        ("log_abs_z_minus_5_sq", Arc::new(|z: Complex64| (z - 5.0).norm_sqr().ln())),
    ];
    let degree = if mode == Mode::Fast { 2 } else { 4 };
    let pts = DiagonalSampleSet::concentric_points(base, 1.0, degree);
    let ring: Vec<Complex64> = (0..8).map(|k| base + Complex64::from_polar(1.0, PI * k as f64 / 4.0)).collect();
    let pts: Vec<Complex64> = pts.into_iter().chain(ring).collect();
    let quad = ConeQuadrature::fixed(32);
    let mut out = Vec::new();
    for (name, h) in hs {
        let split = match pluriharmonic_split(h.clone(), base, &quad, &pts[..4], 1e-6) {
            Ok(s) => s,
            Err(e) => {
                out.push(Check::failed(format!("pluriharmonic.{name}.reconstruction"), 1e-8, e));
                continue;
            }
        };
        let r: Vec<(f64, f64)> = pts
            .par_iter()
            .map(|&z| {
                let f = split.eval(z).unwrap_or(c(f64::NAN, 0.0));
                let dbar = fd::dbar_residual(|u| split.eval(u).unwrap_or(c(f64::NAN, 0.0)), z, 1e-3);
                ((h(z) - 2.0 * f.re).abs(), dbar)
            })
            .collect();
        let (rec, dbar) = r.iter().fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        out.push(Check::below(format!("pluriharmonic.{name}.reconstruction"), rec, 1e-8).with_detail(format!("{} points", pts.len())));
        out.push(Check::below(format!("pluriharmonic.{name}.antiholomorphic_residual"), dbar, 1e-7));
    }
    out
}

/// Polarization of the closed-form diagonal determinant on the disc of radius 0.3 at 1.5i.
pub fn polarize_paper_det() -> Result<PolarizedPolynomial> {
    let samples = DiagonalSampleSet::concentric(c(0.0, 1.5), 0.3, 8, |z| {
        Ok(c(paper_det_torus(HalfPlanePoint::new(z)?)?, 0.0))
    })?;
    polarize_fit(&samples, 8, DEFAULT_SVD_CUTOFF)
}

pub fn polarization_uniqueness(mode: Mode) -> Vec<Check> {
    let (center, radius, degree) = (c(0.0, 1.5), 0.3, 8);
    let run = || -> Result<Vec<Check>> {
        let (constant, _, _) = genus1_constant(&genus1_grid(mode))?;
        let fit = polarize_paper_det()?;
        let reference = |z: Complex64, w: Complex64| Ok(genus1_extension(ProductPoint::new(z, w)?)? - constant);
        let f = |z: Complex64, w: Complex64| Ok(fit.eval(z, w));
        let base = uniqueness_residual(f, reference, center, radius, degree)?;
        let s = |z: Complex64| (z - center) / radius;
        let perturbed = |z: Complex64, w: Complex64| Ok(fit.eval(z, w) + 1e-4 * s(z) * s(z) * (w - center.conj()) / radius);
        let detected = uniqueness_residual(perturbed, reference, center, radius, degree)?;
        let off: Vec<Complex64> = [(0.05, 0.05), (-0.1, 0.05), (0.0, -0.1)].iter().map(|&(x, y)| center + c(x, y)).collect();
        let mut off_diag: f64 = 0.0;
        for (k, &z) in off.iter().enumerate() {
            let w = z.conj() + Complex64::from_polar(0.5 * radius, k as f64);
            off_diag = off_diag.max((fit.eval(z, w) - reference(z, w)?).norm());
        }
        Ok(vec![
            Check::below("polarization.off_diagonal_agreement", off_diag, 1e-6).with_detail("|z - c| <= r/2, |w - conj z| = r/2"),
            Check::below("polarization.uniqueness_residual", base, 1e-5).with_detail(format!(
                "fit residual {:.3e}, condition {:.3e}, rank {}",
                fit.residual, fit.condition, fit.rank
            )),
            Check::below("polarization.perturbation_detected", (detected / 1e-4 - 1.0).abs(), 0.5)
                .with_value(detected)
                .with_detail("injected 1e-4 ((z-c)/r)^2 ((w-conj c)/r)"),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed("polarization.uniqueness_residual", 1e-5, e)])
}

pub type Criterion = (u8, &'static str, fn(Mode) -> Vec<Check>);

pub const CRITERIA: [Criterion; 10] = [
    (1, "spectral-oracle consistency", spectral_oracle),
    (2, "modular invariance of the spectral determinant", spectral_modular),
    (3, "cone potential vs closed form", cone_closed_form),
    (4, "synthetic closed forms", synthetic_forms),
    (5, "non-closed negative control", negative_control),
    (6, "symmetrizer", symmetrizer),
    (7, "genus-1 extension", genus1_extension_checks),
    (8, "mapping-class invariance", mapping_class),
    (9, "pluriharmonic split", pluriharmonic),
    (10, "polarization and uniqueness", polarization_uniqueness),
];

/// Runs every criterion. Check names are prefixed with `c<k>.`.
pub fn verify_all(mode: Mode) -> RunReport {
    let mut checks = Vec::new();
    for (k, _, f) in CRITERIA {
        for mut chk in f(mode) {
            chk.name = format!("c{k}.{}", chk.name);
            checks.push(chk);
        }
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("mode".to_string(), format!("{mode:?}").to_lowercase());
    inputs.insert("seed".to_string(), SEED.to_string());
    RunReport::new("verify-all", inputs, checks)
}
