//! `holext` command-line interface.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or configuration error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use holext::catalog::{parse_complex, parse_complex_tuple, FormCatalog};
use holext::extension::{
    assemble_extension, genus1_extension, ExtensionRecipe, Generator, ModularWord, ProductPoint, RecipeSpec,
};
use holext::polarization::{polarize_fit, uniqueness_fit, DiagonalSampleSet};
use holext::potential::{
    check_closed_and_holomorphic, cone_potential, potential_dbar_residual, verify_boundary_vanishing,
    verify_mixed_derivative, ConeQuadrature,
};
use holext::report::Check;
use holext::special::{eta, log_eta, HalfPlanePoint, Terms};
use holext::spectral::{paper_det_torus, zeta_det_torus, SpectralTruncation, TorusMetric};
use holext::suite::{genus1_constant, genus1_grid, verify_all, Mode, CRITERIA};
use holext::{fd, Complex64, Error};
use rayon::prelude::*;

#[derive(Debug, Parser)]
#[command(name = "holext", version)]
#[command(about = "Torus determinants, cone potentials and holomorphic extensions")]
#[command(after_help = "Complex numbers are written re,im and product points z;w. \
Set HOLEXT_THREADS to override the worker thread count.")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Paper,
    Spectral,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Lattice,
    UnitArea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExtendCheck {
    Invariance,
    Diagonal,
    Holomorphy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleFn {
    /// |z|²
    Abs2,
    /// z²z̄ + 3
    Cubic,
    /// log(z − z̄)
    LogDiff,
    /// log 2π + ½ log y + 2 Re log η(z)
    PaperDet,
    /// the genus-1 extension on the diagonal
    Genus1,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Dedekind eta (or its logarithm) at a point of the upper half plane
    Eta {
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        z: String,
        #[arg(long)]
        log: bool,
    },
    /// Printed and spectral log-determinants of the flat torus with modulus z
    TorusDet {
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        z: String,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        /// Accepted |ζ(0) + 1|
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value = "lattice")]
        metric: MetricArg,
    },
    /// Cone-integrated potential of a catalog form
    Potential {
        #[arg(long)]
        form: String,
        /// Extra catalog file; entries override built-ins of the same name
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// z1;...;zn;w1;...;wn
        #[arg(long, allow_hyphen_values = true, value_name = "Z;W")]
        at: Option<String>,
        #[arg(long)]
        verify: bool,
        /// Grid over the first z coordinate: xmin,xmax,nx;ymin,ymax,ny
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// CSV destination for --grid (stdout if absent)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
    },
    /// Evaluate the genus-1 extension or a recipe file at a product point
    Extend {
        #[arg(long, allow_hyphen_values = true, value_name = "Z;W")]
        point: String,
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(long, value_enum)]
        check: Vec<ExtendCheck>,
        /// Tolerance of the holomorphy check
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Polarize diagonal samples (CSV columns re_z,im_z,re_val,im_val)
    Polarize {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        degree: usize,
        /// JSON destination (stdout if absent)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        center: Option<String>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        cutoff: f64,
        /// Compare the fit with the genus-1 extension minus OFFSET
        #[arg(long)]
        against_genus1: bool,
        /// Defaults to the measured diagonal offset of the genus-1 extension
        #[arg(long, allow_hyphen_values = true)]
        offset: Option<f64>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Write diagonal samples of a built-in function as CSV
    Samples {
        #[arg(long, value_enum)]
        function: SampleFn,
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        center: String,
        #[arg(long)]
        radius: f64,
        /// Concentric layout sized for this fit degree
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Use N uniform random points instead
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite; prints a JSON report
    VerifyAll {
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InsufficientSamples(_)
            | Error::NotPluriharmonic { .. }
            | Error::SingularMatrix(_)
            | Error::QuadratureNonConvergence(_)
            | Error::BudgetExceeded(_)
            | Error::PathTooCoarse(..) => Failure::Verification(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult = Result<bool, Failure>;

fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.14e}");
    // exponent after rounding, so 0.99999999999999997 counts as 1
    let e: i32 = sci.rsplit('e').next().and_then(|t| t.parse().ok()).unwrap_or(0);
    if (-5..15).contains(&e) {
        let d = (14 - e).max(0) as usize;
        format!("{x:.d$}")
    } else {
        sci
    }
}

fn csig(c: Complex64) -> String {
    if c.im == 0.0 {
        sig(c.re)
    } else {
        format!("{} {} {}i", sig(c.re), if c.im < 0.0 { "-" } else { "+" }, sig(c.im.abs()))
    }
}

fn parse_point(s: &str) -> Result<(Complex64, Complex64), Failure> {
    let v = parse_complex_tuple(s)?;
    match v.as_slice() {
        [z, w] => Ok((*z, *w)),
        _ => Err(Failure::Input(format!("expected a product point z;w, got {s:?}"))),
    }
}

fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

fn print_checks(checks: &[Check]) -> bool {
    for c in checks {
        println!("{}", c.line());
    }
    let pass = checks.iter().all(|c| c.pass);
    println!("{}", if pass { "all checks passed" } else { "verification FAILED" });
    pass
}

fn cmd_eta(z: &str, log: bool) -> CliResult {
    let z = HalfPlanePoint::new(parse_complex(z)?)?;
    let v = if log { log_eta(z)? } else { eta(z, Terms::Auto)? };
    println!("{}", csig(v));
    Ok(true)
}

fn cmd_torus_det(z: &str, method: Method, tol: f64, metric: MetricArg) -> CliResult {
    let z = HalfPlanePoint::new(parse_complex(z)?)?;
    // the lattice Z + zZ only depends on z modulo 1
    let z = HalfPlanePoint::from_parts(z.x() - z.x().round(), z.y())?;
    let metric = match metric {
        MetricArg::Lattice => TorusMetric::Lattice,
        MetricArg::UnitArea => TorusMetric::UnitArea,
    };
    let mut pass = true;
    if matches!(method, Method::Paper | Method::Both) {
        println!("paper_log_det = {}", sig(paper_det_torus(z)?));
    }
    if matches!(method, Method::Spectral | Method::Both) {
        let r = zeta_det_torus(z, metric, &SpectralTruncation::default())?;
        println!("metric = {}", if metric == TorusMetric::Lattice { "lattice" } else { "unit-area" });
        println!("spectral_log_det = {}", sig(r.log_det));
        println!("zeta_prime_at_zero = {}", sig(r.zeta_prime_at_zero));
        println!("zeta_at_zero = {}", sig(r.zeta_at_zero));
        println!("lattice_tail_bound = {:.3e}", r.lattice_tail_bound);
        println!("integral_tail_bound = {:.3e}", r.integral_tail_bound);
        let chk = Check::below("zeta_at_zero", (r.zeta_at_zero + 1.0).abs(), tol);
        println!("{}", chk.line());
        pass &= chk.pass;
        if matches!(method, Method::Both) {
            let le = log_eta(z)?.re;
            let y = z.y();
            let unit = if metric == TorusMetric::UnitArea { y.ln() } else { 0.0 };
            println!("ratio_y2_eta4 = {}", sig((r.log_det + unit - 2.0 * y.ln() - 4.0 * le).exp()));
            println!(
                "ratio_2pi_sqrty_eta2 = {}",
                sig((r.log_det + unit - (2.0 * std::f64::consts::PI).ln() - 0.5 * y.ln() - 2.0 * le).exp())
            );
        }
    }
    Ok(pass)
}

fn default_point(base: &[Complex64], shift: Complex64) -> Vec<Complex64> {
    base.iter().map(|b| b + shift).collect()
}

fn parse_grid(s: &str) -> Result<Vec<(f64, f64)>, Failure> {
    let bad = || Failure::Input(format!("grid must look like xmin,xmax,nx;ymin,ymax,ny, got {s:?}"));
    let axes: Vec<Vec<&str>> = s.split(';').map(|a| a.split(',').map(str::trim).collect()).collect();
    if axes.len() != 2 || axes.iter().any(|a| a.len() != 3) {
        return Err(bad());
    }
    let axis = |a: &[&str]| -> Result<Vec<f64>, Failure> {
        let lo: f64 = a[0].parse().map_err(|_| bad())?;
        let hi: f64 = a[1].parse().map_err(|_| bad())?;
        let n: usize = a[2].parse().map_err(|_| bad())?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(bad());
        }
        Ok((0..n).map(|k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect())
    };
    let (xs, ys) = (axis(&axes[0])?, axis(&axes[1])?);
    Ok(ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_potential(
    form_name: &str,
    catalog: Option<&Path>,
    at: Option<&str>,
    verify: bool,
    grid: Option<&str>,
    out: Option<&Path>,
    nodes: usize,
) -> CliResult {
    let mut cat = FormCatalog::builtin();
    if let Some(p) = catalog {
        cat.merge(FormCatalog::parse(&fs::read_to_string(p)?)?);
    }
    let entry = cat.get(form_name)?;
    let form = entry.build()?;
    let n = form.dim();
    let quad = ConeQuadrature { nodes_per_axis: nodes, ..ConeQuadrature::default() };
    let (z, w) = match at {
        Some(s) => {
            let v = parse_complex_tuple(s)?;
            if v.len() != 2 * n {
                return Err(Failure::Input(format!("--at needs {} complex numbers for a {n}-dimensional form", 2 * n)));
            }
            (v[..n].to_vec(), v[n..].to_vec())
        }
        None => (
            default_point(form.base_z(), Complex64::new(0.5, 0.25)),
            default_point(form.base_w(), Complex64::new(-0.25, -0.5)),
        ),
    };

    if let Some(g) = grid {
        let pts = parse_grid(g)?;
        let rows: Vec<String> = pts
            .par_iter()
            .map(|&(x, y)| {
                let mut zz = z.clone();
                zz[0] = Complex64::new(x, y);
                let r = cone_potential(&form, &zz, &w, &quad)
                    .and_then(|q| Ok((q, potential_dbar_residual(&form, &zz, &w, &quad, 1e-3)?)));
                match r {
                    Ok((q, d)) => format!("{x},{y},{},{},{},{},{d:e},ok", w[0].re, w[0].im, q.re, q.im),
                    Err(e) => format!("{x},{y},{},{},NaN,NaN,NaN,\"{}\"", w[0].re, w[0].im, e.to_string().replace('"', "'")),
                }
            })
            .collect();
        let mut text = String::from("re_z,im_z,re_w,im_w,re_q,im_q,dbar_residual,status\n");
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        emit(out, &text)?;
        return Ok(true);
    }

    let q = cone_potential(&form, &z, &w, &quad)?;
    println!("q = {}", csig(q));
    let closed = entry.closed_form_potential(&z, &w);
    if let Some(cf) = closed {
        println!("closed_form = {}", csig(cf));
    }
    if !verify {
        return Ok(true);
    }
    let mut checks = Vec::new();
    let samples = vec![(z.clone(), w.clone())];
    let b = verify_boundary_vanishing(&form, &samples, &quad, 1e-10);
    let mut bc = Check::below("boundary_vanishing", b.max_residual, 1e-10);
    if !b.errors.is_empty() {
        bc.pass = false;
        bc.detail = Some(b.errors.join("; "));
    }
    checks.push(bc);
    let cl = check_closed_and_holomorphic(&form, &samples, 1e-3, 1e-8);
    let mut cc = Check::below("closedness_residual", cl.closedness_residual, 1e-8);
    if !cl.errors.is_empty() {
        cc.pass = false;
        cc.detail = Some(cl.errors.join("; "));
    }
    checks.push(cc);
    checks.push(Check::below("holomorphy_residual", cl.holomorphy_residual, 1e-8));
    checks.push(match verify_mixed_derivative(&form, &z, &w, &quad, 1e-3) {
        Ok(m) => Check::below("mixed_derivative", m.max(), 1e-7),
        Err(e) => Check::failed("mixed_derivative", 1e-7, e),
    });
    checks.push(match potential_dbar_residual(&form, &z, &w, &quad, 1e-3) {
        Ok(r) => Check::below("antiholomorphic_residual", r, 1e-8),
        Err(e) => Check::failed("antiholomorphic_residual", 1e-8, e),
    });
    if let Some(cf) = closed {
        let r = if entry.closed_form_is_logarithmic() {
            (q.exp() / cf.exp() - 1.0).norm()
        } else {
            (q - cf).norm() / cf.norm().max(1.0)
        };
        checks.push(Check::below("closed_form", r, 1e-8));
    }
    Ok(print_checks(&checks))
}

fn cmd_extend(point: &str, recipe: Option<&Path>, checks: &[ExtendCheck], tol: f64) -> CliResult {
    let (z, w) = parse_point(point)?;
    let p = ProductPoint::new(z, w)?;
    let recipe: Option<(RecipeSpec, ExtensionRecipe)> = match recipe {
        Some(path) => {
            let spec = RecipeSpec::parse(&fs::read_to_string(path)?)?;
            let r = spec.build()?;
            Some((spec, r))
        }
        None => None,
    };
    let eval = |z: Complex64, w: Complex64| -> holext::Result<Complex64> {
        match &recipe {
            Some((_, r)) => assemble_extension(r, &[z], &[w]),
            None => genus1_extension(ProductPoint::new(z, w)?),
        }
    };
    println!("value = {}", csig(eval(p.z, p.w)?));
    let (t_diag, t_inv) = if recipe.is_some() { (1e-8, 1e-6) } else { (1e-12, 1e-9) };
    let mut out = Vec::new();
    if checks.contains(&ExtendCheck::Diagonal) {
        let grid = genus1_grid(Mode::Full);
        let vals: Vec<holext::Result<(f64, f64)>> = grid
            .par_iter()
            .map(|&g| {
                let v = eval(g.value(), g.value().conj())?;
                let reference = match &recipe {
                    Some((spec, _)) => spec.diagonal.log_det(g)?,
                    None => paper_det_torus(g)?,
                };
                Ok((v.im.abs(), v.re - reference))
            })
            .collect();
        match vals.into_iter().collect::<holext::Result<Vec<_>>>() {
            Ok(v) => {
                let im = v.iter().map(|x| x.0).fold(0.0, f64::max);
                out.push(Check::below("diagonal.imaginary_part", im, t_diag).with_detail(format!("{} grid points", v.len())));
                let d: Vec<f64> = v.iter().map(|x| x.1).collect();
                let mean = d.iter().sum::<f64>() / d.len() as f64;
                let spread = d.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
                let name = if recipe.is_some() { "diagonal.matches_source" } else { "diagonal.constant_offset_from_closed_form" };
                let res = if recipe.is_some() { d.iter().map(|x| x.abs()).fold(0.0, f64::max) } else { spread };
                out.push(Check::below(name, res, if recipe.is_some() { t_diag } else { 1e-9 }).with_value(mean));
            }
            Err(e) => out.push(Check::failed("diagonal.imaginary_part", t_diag, e)),
        }
    }
    if checks.contains(&ExtendCheck::Invariance) {
        let words = [
            ModularWord(vec![Generator::T]),
            ModularWord(vec![Generator::S]),
            ModularWord(vec![Generator::S, Generator::T]),
        ];
        let base = eval(p.z, p.w)?;
        for word in &words {
            let name = format!("invariance[{word}]");
            let r = p.mobius(word.matrix()).and_then(|q| eval(q.z, q.w));
            out.push(match r {
                Ok(v) => Check::below(name, ((24.0 * (v - base)).exp() - 1.0).norm(), t_inv),
                Err(e) => Check::failed(name, t_inv, e),
            });
        }
    }
    if checks.contains(&ExtendCheck::Holomorphy) {
        let nan = Complex64::new(f64::NAN, 0.0);
        let rz = fd::dbar_residual(|u| eval(u, p.w).unwrap_or(nan), p.z, 1e-3);
        let rw = fd::dbar_residual(|u| eval(p.z, u).unwrap_or(nan), p.w, 1e-3);
        out.push(Check::below("holomorphy.dbar_z", rz, tol));
        out.push(Check::below("holomorphy.dbar_w", rw, tol));
    }
    if out.is_empty() {
        return Ok(true);
    }
    Ok(print_checks(&out))
}

fn read_samples(path: &Path, center: Option<&str>, radius: Option<f64>) -> Result<DiagonalSampleSet, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Failure::Input(format!("malformed CSV header: {e}")))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(rz), Some(iz), Some(rv)) = (col("re_z"), col("im_z"), col("re_val")) else {
        return Err(Failure::Input("CSV header must contain re_z, im_z, re_val (and optionally im_val)".into()));
    };
    let iv = col("im_val");
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Input(format!("malformed CSV record {}: {e}", k + 1)))?;
        let num = |i: usize| -> Result<f64, Failure> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| Failure::Input(format!("malformed CSV record {}: bad number in column {}", k + 1, i + 1)))
        };
        points.push(Complex64::new(num(rz)?, num(iz)?));
        values.push(Complex64::new(num(rv)?, match iv {
            Some(i) => num(i)?,
            None => 0.0,
        }));
    }
    Ok(match (center, radius) {
        (Some(c), Some(r)) => DiagonalSampleSet::new(parse_complex(c)?, r, points, values)?,
        (None, None) => DiagonalSampleSet::bounding(points, values)?,
        _ => return Err(Failure::Input("--center and --radius go together".into())),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_polarize(
    samples: &Path,
    degree: usize,
    out: Option<&Path>,
    center: Option<&str>,
    radius: Option<f64>,
    cutoff: f64,
    against_genus1: bool,
    offset: Option<f64>,
    tol: f64,
) -> CliResult {
    let set = read_samples(samples, center, radius)?;
    let fit = polarize_fit(&set, degree, cutoff)?;
    let js = serde_json::to_string_pretty(&fit).map_err(|e| Failure::Input(e.to_string()))? + "\n";
    emit(out, &js)?;
    let report = |line: String| {
        if out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };
    report(format!("degree = {degree}, samples = {}, rank = {}", fit.samples, fit.rank));
    report(format!("residual = {:.3e}, condition = {:.3e}", fit.residual, fit.condition));
    if !against_genus1 {
        return Ok(true);
    }
    let offset = match offset {
        Some(o) => o,
        None => genus1_constant(&genus1_grid(Mode::Full))?.0,
    };
    let f1 = |z: Complex64, w: Complex64| Ok(fit.eval(z, w));
    let f2 = |z: Complex64, w: Complex64| Ok(genus1_extension(ProductPoint::new(z, w)?)? - offset);
    let diff = uniqueness_fit(f1, f2, fit.center, fit.radius, degree)?;
    let chk = Check::below("uniqueness_residual_vs_genus1", diff.max_normalized_coefficient(), tol)
        .with_detail(format!("offset {}", sig(offset)));
    report(chk.line());
    Ok(chk.pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_samples(
    function: SampleFn,
    center: &str,
    radius: f64,
    degree: usize,
    random: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> CliResult {
    let center = parse_complex(center)?;
    let f = move |z: Complex64| -> holext::Result<Complex64> {
        Ok(match function {
            SampleFn::Abs2 => Complex64::new(z.norm_sqr(), 0.0),
            SampleFn::Cubic => z * z * z.conj() + 3.0,
            SampleFn::LogDiff => (z - z.conj()).ln(),
            SampleFn::PaperDet => Complex64::new(paper_det_torus(HalfPlanePoint::new(z)?)?, 0.0),
            SampleFn::Genus1 => genus1_extension(ProductPoint::diagonal(HalfPlanePoint::new(z)?))?,
        })
    };
    let set = match random {
        Some(n) => DiagonalSampleSet::random(center, radius, n, seed, f)?,
        None => DiagonalSampleSet::concentric(center, radius, degree, f)?,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Failure::Input(e.to_string());
    w.write_record(["re_z", "im_z", "re_val", "im_val"]).map_err(io_err)?;
    for (p, v) in set.points().iter().zip(set.values()) {
        w.write_record([p.re, p.im, v.re, v.im].map(|x| x.to_string())).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    emit(out, &String::from_utf8_lossy(&bytes))?;
    Ok(true)
}

fn cmd_verify_all(fast: bool, out: Option<&Path>) -> CliResult {
    let start = Instant::now();
    let mode = if fast { Mode::Fast } else { Mode::Full };
    let report = verify_all(mode);
    for (k, name, _) in CRITERIA {
        let prefix = format!("c{k}.");
        let ok = report.checks.iter().filter(|c| c.name.starts_with(&prefix)).all(|c| c.pass);
        eprintln!("criterion {k:>2} {:<4} {name}", if ok { "PASS" } else { "FAIL" });
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("{}", c.line());
    }
    eprintln!("wall time {:.2} s", start.elapsed().as_secs_f64());
    emit(out, &(report.to_json() + "\n"))?;
    Ok(report.pass)
}

fn run(cli: Cli) -> CliResult {
    match cli.cmd {
        Cmd::Eta { z, log } => cmd_eta(&z, log),
        Cmd::TorusDet { z, method, tol, metric } => cmd_torus_det(&z, method, tol, metric),
        Cmd::Potential { form, catalog, at, verify, grid, out, nodes } => {
            cmd_potential(&form, catalog.as_deref(), at.as_deref(), verify, grid.as_deref(), out.as_deref(), nodes)
        }
        Cmd::Extend { point, recipe, check, tol } => cmd_extend(&point, recipe.as_deref(), &check, tol),
        Cmd::Polarize { samples, degree, out, center, radius, cutoff, against_genus1, offset, tol } => cmd_polarize(
            &samples,
            degree,
            out.as_deref(),
            center.as_deref(),
            radius,
            cutoff,
            against_genus1,
            offset,
            tol,
        ),
        Cmd::Samples { function, center, radius, degree, random, seed, out } => {
            cmd_samples(function, &center, radius, degree, random, seed, out.as_deref())
        }
        Cmd::VerifyAll { fast, out } => cmd_verify_all(fast, out.as_deref()),
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("HOLEXT_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Input(format!("HOLEXT_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Verification(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
