//! Plain-text catalog of closed (2,0)-forms.
//!
//! ```text
//! # comment
//! [wp_genus1]
//! kind = pole_power
//! coefficient = 1,0
//! exponent = 2
//! base_z = 0,1
//! base_w = 0,-1
//!
//! [synthetic2]
//! kind = mixed_second_of
//! dim = 2
//! g = 1,0@2,0,3,0; 1,0@0,1,0,1
//! base_z = 0,0;0,0
//! base_w = 0,0;0,0
//! domain_z = ball 0,0;0,0 3
//! ```
//!
//! Complex numbers are `re,im`, tuples are `;`-separated. Polynomial terms are
//! `re,im@e1,...,e2n` over the variables (z¹…zⁿ, w¹…wⁿ). `polynomial` entries
//! give each coefficient as `omega_i_j` (1-based); missing entries are zero.
//! `constant` entries give `matrix` row-major. Domains are `entire`, `upper`,
//! `lower` or `ball <center> <radius>`. `pole_power` forms always live on H × H̄.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::potential::{ClosedHoloForm, Region};
use crate::special::principal_log;

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidInput(format!("expected a complex number as re,im, got {s:?}"));
    let (re, im) = s.trim().split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

pub fn parse_complex_tuple(s: &str) -> Result<Vec<Complex64>> {
    s.split(';').map(parse_complex).collect()
}

fn format_complex(c: Complex64) -> String {
    format!("{},{}", c.re, c.im)
}

fn format_tuple(v: &[Complex64]) -> String {
    v.iter().map(|c| format_complex(*c)).collect::<Vec<_>>().join(";")
}

fn parse_polynomial(s: &str, vars: usize) -> Result<Polynomial> {
    let mut p = Polynomial::zero(vars);
    for term in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (c, e) = term
            .split_once('@')
            .ok_or_else(|| Error::InvalidInput(format!("polynomial term {term:?} must look like re,im@e1,...")))?;
        let exps = e
            .split(',')
            .map(|x| x.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidInput(format!("bad exponents in {term:?}")))?;
        if exps.len() != vars {
            return Err(Error::InvalidInput(format!("term {term:?} needs {vars} exponents")));
        }
        p.add_term(parse_complex(c)?, &exps);
    }
    Ok(p)
}

fn format_polynomial(p: &Polynomial) -> String {
    p.terms()
        .iter()
        .map(|Monomial { coeff, exponents }| {
            let e: Vec<String> = exponents.iter().map(u32::to_string).collect();
            format!("{}@{}", format_complex(*coeff), e.join(","))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn parse_region(s: &str) -> Result<Region> {
    let mut parts = s.split_whitespace();
    match parts.next() {
        Some("entire") => Ok(Region::Entire),
        Some("upper") => Ok(Region::UpperHalf),
        Some("lower") => Ok(Region::LowerHalf),
        Some("ball") => {
            let center = parse_complex_tuple(parts.next().unwrap_or(""))?;
            let radius: f64 = parts
                .next()
                .and_then(|r| r.parse().ok())
                .filter(|r: &f64| *r > 0.0)
                .ok_or_else(|| Error::InvalidInput(format!("ball domain needs a positive radius: {s:?}")))?;
            Ok(Region::Ball { center, radius })
        }
        _ => Err(Error::InvalidInput(format!("unknown domain {s:?}"))),
    }
}

fn format_region(r: &Region) -> String {
    match r {
        Region::Entire => "entire".into(),
        Region::UpperHalf => "upper".into(),
        Region::LowerHalf => "lower".into(),
        Region::Ball { center, radius } => format!("ball {} {}", format_tuple(center), radius),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FormKind {
    Constant { matrix: Vec<Complex64> },
    PolePower { coefficient: Complex64, exponent: u32 },
    Polynomial { entries: Vec<Vec<Polynomial>> },
    MixedSecondOf { g: Polynomial },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormCatalogEntry {
    pub name: String,
    pub kind: FormKind,
    pub dim: usize,
    pub base_z: Vec<Complex64>,
    pub base_w: Vec<Complex64>,
    pub domain_z: Region,
    pub domain_w: Region,
}

impl FormCatalogEntry {
    pub fn build(&self) -> Result<ClosedHoloForm> {
        let (bz, bw) = (self.base_z.clone(), self.base_w.clone());
        let (dz, dw) = (self.domain_z.clone(), self.domain_w.clone());
        match &self.kind {
            FormKind::Constant { matrix } => {
                if matrix.len() != self.dim * self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim * self.dim, got: matrix.len() });
                }
                ClosedHoloForm::constant(DMatrix::from_row_slice(self.dim, self.dim, matrix), bz, bw, dz, dw)
            }
            FormKind::PolePower { coefficient, exponent } => {
                if self.dim != 1 || bz.len() != 1 || bw.len() != 1 {
                    return Err(Error::InvalidInput("pole_power forms are one-dimensional".into()));
                }
                ClosedHoloForm::pole_power(*coefficient, *exponent, bz[0], bw[0])
            }
            FormKind::Polynomial { entries } => ClosedHoloForm::from_polynomials(entries.clone(), bz, bw, dz, dw),
            FormKind::MixedSecondOf { g } => ClosedHoloForm::mixed_second_of(g, bz, bw, dz, dw),
        }
    }

    /// Closed-form potential G(z,w) − G(z₀,w) − G(z,w₀) + G(z₀,w₀) when one is known.
    pub fn closed_form_potential(&self, z: &[Complex64], w: &[Complex64]) -> Option<Complex64> {
        let (z0, w0) = (&self.base_z, &self.base_w);
        let corners = |g: &dyn Fn(&[Complex64], &[Complex64]) -> Complex64| g(z, w) - g(z0, w) - g(z, w0) + g(z0, w0);
        match &self.kind {
            FormKind::Constant { matrix } => {
                let n = self.dim;
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += matrix[i * n + j] * (z[i] - z0[i]) * (w[j] - w0[j]);
                    }
                }
                Some(acc)
            }
            FormKind::PolePower { coefficient, exponent } => {
                let (c, k) = (*coefficient, *exponent);
                if k == 2 {
                    Some(corners(&|a, b| c * principal_log(a[0] - b[0])))
                } else {
                    let m = 2 - k as i32;
                    let s = -c / (((k - 1) * (k - 2)) as f64);
                    Some(corners(&|a, b| s * (a[0] - b[0]).powi(m)))
                }
            }
            FormKind::MixedSecondOf { g } => Some(corners(&|a, b| {
                let x: Vec<_> = a.iter().chain(b).copied().collect();
                g.eval(&x)
            })),
            FormKind::Polynomial { .. } => None,
        }
    }

    /// Whether the closed form involves a logarithm, so only exp(q) is branch-free.
    pub fn closed_form_is_logarithmic(&self) -> bool {
        matches!(self.kind, FormKind::PolePower { exponent: 2, .. })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[{}]", self.name);
        match &self.kind {
            FormKind::Constant { matrix } => {
                let _ = writeln!(s, "kind = constant\nmatrix = {}", format_tuple(matrix));
            }
            FormKind::PolePower { coefficient, exponent } => {
                let _ = writeln!(s, "kind = pole_power\ncoefficient = {}\nexponent = {exponent}", format_complex(*coefficient));
            }
            FormKind::Polynomial { entries } => {
                let _ = writeln!(s, "kind = polynomial");
                for (i, row) in entries.iter().enumerate() {
                    for (j, p) in row.iter().enumerate() {
                        if !p.terms().is_empty() {
                            let _ = writeln!(s, "omega_{}_{} = {}", i + 1, j + 1, format_polynomial(p));
                        }
                    }
                }
            }
            FormKind::MixedSecondOf { g } => {
                let _ = writeln!(s, "kind = mixed_second_of\ng = {}", format_polynomial(g));
            }
        }
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "base_z = {}\nbase_w = {}", format_tuple(&self.base_z), format_tuple(&self.base_w));
        if !matches!(self.kind, FormKind::PolePower { .. }) {
            let _ = writeln!(s, "domain_z = {}\ndomain_w = {}", format_region(&self.domain_z), format_region(&self.domain_w));
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FormCatalog {
    pub entries: Vec<FormCatalogEntry>,
}

const BUILTIN: &str = "\
[const1]
kind = constant
dim = 1
matrix = 1,0
base_z = 0,1
base_w = 0,-1

[wp_genus1]
kind = pole_power
coefficient = 1,0
exponent = 2
base_z = 0,1
base_w = 0,-1

[cubic_pole]
kind = pole_power
coefficient = 0,1
exponent = 3
base_z = 0,1
base_w = 0,-1

[synthetic2]
kind = mixed_second_of
dim = 2
g = 1,0@2,0,3,0; 1,0@0,1,0,1
base_z = 0,0;0,0
base_w = 0,0;0,0

[bad_nonclosed]
kind = polynomial
dim = 2
omega_1_1 = 1,0@0,0,0,0
omega_1_2 = 1,0@0,1,0,0
omega_2_2 = 1,0@0,0,0,0
base_z = 0,0;0,0
base_w = 0,0;0,0
";

fn finish_entry(name: String, kv: BTreeMap<String, (usize, String)>) -> Result<FormCatalogEntry> {
    let get = |k: &str| kv.get(k).map(|(_, v)| v.as_str());
    let ctx = |e: Error| {
        let line = kv.values().map(|(l, _)| *l).min().unwrap_or(0);
        Error::InvalidInput(format!("catalog entry [{name}] (line {line}): {e}"))
    };
    let required = |k: &str| get(k).ok_or_else(|| ctx(Error::InvalidInput(format!("missing key {k:?}"))));
    let kind_name = required("kind")?;
    let base_z = parse_complex_tuple(required("base_z")?).map_err(ctx)?;
    let base_w = parse_complex_tuple(required("base_w")?).map_err(ctx)?;
    let dim = match get("dim") {
        Some(d) => d.parse::<usize>().map_err(|_| ctx(Error::InvalidInput(format!("bad dim {d:?}"))))?,
        None => base_z.len(),
    };
    let region = |k: &str| get(k).map(parse_region).unwrap_or(Ok(Region::Entire)).map_err(ctx);
    let (mut domain_z, mut domain_w) = (region("domain_z")?, region("domain_w")?);
    let kind = match kind_name {
        "constant" => FormKind::Constant { matrix: parse_complex_tuple(required("matrix")?).map_err(ctx)? },
        "pole_power" => {
            domain_z = Region::UpperHalf;
            domain_w = Region::LowerHalf;
            let coefficient = match get("coefficient") {
                Some(c) => parse_complex(c).map_err(ctx)?,
                None => Complex64::new(1.0, 0.0),
            };
            let e = required("exponent")?;
            let exponent = e.parse().map_err(|_| ctx(Error::InvalidInput(format!("bad exponent {e:?}"))))?;
            FormKind::PolePower { coefficient, exponent }
        }
        "polynomial" => {
            let mut entries = vec![vec![Polynomial::zero(2 * dim); dim]; dim];
            for (k, (_, v)) in &kv {
                if let Some(ij) = k.strip_prefix("omega_") {
                    let idx: Option<(usize, usize)> = ij.split_once('_').and_then(|(i, j)| Some((i.parse().ok()?, j.parse().ok()?)));
                    match idx {
                        Some((i, j)) if (1..=dim).contains(&i) && (1..=dim).contains(&j) => {
                            entries[i - 1][j - 1] = parse_polynomial(v, 2 * dim).map_err(ctx)?;
                        }
                        _ => return Err(ctx(Error::InvalidInput(format!("bad coefficient key {k:?}")))),
                    }
                }
            }
            FormKind::Polynomial { entries }
        }
        "mixed_second_of" => FormKind::MixedSecondOf { g: parse_polynomial(required("g")?, 2 * dim).map_err(ctx)? },
        other => return Err(ctx(Error::InvalidInput(format!("unknown kind {other:?}")))),
    };
    let entry = FormCatalogEntry { name: name.clone(), kind, dim, base_z, base_w, domain_z, domain_w };
    entry.build().map_err(ctx)?;
    Ok(entry)
}

impl FormCatalog {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut current: Option<(String, BTreeMap<String, (usize, String)>)> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if let Some((name, kv)) = current.take() {
                    entries.push(finish_entry(name, kv)?);
                }
                let name = name.trim();
                if name.is_empty() || entries.iter().any(|e: &FormCatalogEntry| e.name == name) {
                    return Err(Error::InvalidInput(format!("line {}: empty or duplicate entry name {name:?}", n + 1)));
                }
                current = Some((name.to_string(), BTreeMap::new()));
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", n + 1)))?;
            let (_, kv) = current
                .as_mut()
                .ok_or_else(|| Error::InvalidInput(format!("line {}: key outside of a [section]", n + 1)))?;
            if kv.insert(k.trim().to_string(), (n + 1, v.trim().to_string())).is_some() {
                return Err(Error::InvalidInput(format!("line {}: duplicate key {:?}", n + 1, k.trim())));
            }
        }
        if let Some((name, kv)) = current {
            entries.push(finish_entry(name, kv)?);
        }
        Ok(Self { entries })
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("built-in catalog parses")
    }

    pub fn get(&self, name: &str) -> Result<&FormCatalogEntry> {
        self.entries.iter().find(|e| e.name == name).ok_or_else(|| {
            let known: Vec<_> = self.entries.iter().map(|e| e.name.as_str()).collect();
            Error::InvalidInput(format!("unknown form {name:?}; known: {}", known.join(", ")))
        })
    }

    /// Adds the entries of `other`, replacing same-named ones.
    pub fn merge(&mut self, other: FormCatalog) {
        for e in other.entries {
            match self.entries.iter_mut().find(|x| x.name == e.name) {
                Some(slot) => *slot = e,
                None => self.entries.push(e),
            }
        }
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(FormCatalogEntry::to_text).collect::<Vec<_>>().join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{check_closed_and_holomorphic, cone_potential, ConeQuadrature};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn builtin_entries() {
        let cat = FormCatalog::builtin();
        let quad = ConeQuadrature::default();
        let const1 = cat.get("const1").unwrap();
        let q = cone_potential(&const1.build().unwrap(), &[c(0.0, 2.0)], &[c(0.0, -2.0)], &quad).unwrap();
        assert!((q - 1.0).norm() < 1e-14);
        let wp = cat.get("wp_genus1").unwrap();
        let (z, w) = ([c(0.0, 2.0)], [c(0.0, -2.0)]);
        let q = cone_potential(&wp.build().unwrap(), &z, &w, &quad).unwrap();
        let cf = wp.closed_form_potential(&z, &w).unwrap();
        assert!(wp.closed_form_is_logarithmic());
        assert!((q.exp() / cf.exp() - 1.0).norm() < 1e-12);
        let cubic = cat.get("cubic_pole").unwrap();
        let (z, w) = ([c(0.4, 1.7)], [c(-0.2, -0.6)]);
        let q = cone_potential(&cubic.build().unwrap(), &z, &w, &quad).unwrap();
        assert!((q - cubic.closed_form_potential(&z, &w).unwrap()).norm() < 1e-12);
        let syn = cat.get("synthetic2").unwrap();
        let (z, w) = ([c(0.3, 0.2), c(-0.5, 0.1)], [c(0.7, -0.4), c(0.2, 0.9)]);
        let q = cone_potential(&syn.build().unwrap(), &z, &w, &quad).unwrap();
        assert!((q - syn.closed_form_potential(&z, &w).unwrap()).norm() < 1e-13);
        let bad = cat.get("bad_nonclosed").unwrap().build().unwrap();
        let rep = check_closed_and_holomorphic(&bad, &[(z.to_vec(), w.to_vec())], 1e-3, 1e-8);
        assert!(!rep.pass && rep.closedness_residual > 1e-3);
    }

    #[test]
    fn text_roundtrip() {
        let cat = FormCatalog::builtin();
        let again = FormCatalog::parse(&cat.to_text()).unwrap();
        assert_eq!(cat, again);
    }

    #[test]
    fn parse_errors() {
        assert!(FormCatalog::parse("kind = constant").is_err());
        assert!(FormCatalog::parse("[a]\nkind = constant\nmatrix = 1,0\nbase_z = 0,0").is_err());
        assert!(FormCatalog::parse("[a]\nkind = weird\nbase_z = 0,0\nbase_w = 0,0").is_err());
        assert!(FormCatalog::parse("[a]\nkind = pole_power\nexponent = 1\nbase_z = 0,1\nbase_w = 0,-1").is_err());
        assert!(FormCatalog::parse("[a]\nkind = pole_power\nexponent = 2\nbase_z = 0,-1\nbase_w = 0,-1").is_err());
        assert!(FormCatalog::parse("[a]\nkind = mixed_second_of\ng = 1,0@1,1,1\nbase_z = 0,0\nbase_w = 0,0").is_err());
        assert!(parse_complex("1").is_err());
        assert!(parse_complex("1,nan").is_err());
        assert_eq!(parse_complex(" -1.5 , 2 ").unwrap(), c(-1.5, 2.0));
    }

    #[test]
    fn ball_domain() {
        let cat = FormCatalog::parse(
            "[b]\nkind = constant\ndim = 1\nmatrix = 2,0\nbase_z = 0,0\nbase_w = 0,0\ndomain_z = ball 0,0 1.5\n",
        )
        .unwrap();
        let f = cat.get("b").unwrap().build().unwrap();
        assert!(cone_potential(&f, &[c(2.0, 0.0)], &[c(0.0, 0.0)], &ConeQuadrature::default()).is_err());
        assert_eq!(FormCatalog::parse(&cat.to_text()).unwrap(), cat);
    }
}
