//! Model files: JSON with expression strings over declared spatial coordinates.
//!
//! ```json
//! {
//!   "coordinates": ["x"],
//!   "diffusor": { "a": ["1"], "b": ["0"] },
//!   "sde": { "mu": ["0"], "sigma": [["sqrt(2)"]] },
//!   "x0": [0.0],
//!   "fields": { "scaling": { "phi": ["x"], "tau": "2*t", "c": [["0"]] } },
//!   "bases": { "poly": { "phi": ["1", "x", "t*x"], "tau": ["1", "t"] } },
//!   "transformations": { "shear": { "f": "t", "phi": ["x + t"] } }
//! }
//! ```
//!
//! `diffusor.a` holds either the `m(m+1)/2` spatial upper-triangular entries
//! (the time row is then the standard one) or all `(m+1)(m+2)/2` space-time
//! entries, which must be in standard form. Without a `diffusor` block the
//! generator of the `sde` block is used.

use std::collections::BTreeMap;
use std::path::Path;

use diffsym::geometry::{Diffeomorphism, Diffusor, ProjectableVectorField, SymMatrix};
use diffsym::symbolic::{integer, normalize, parse_expr, zero_test, CoordinateSystem, Expr, Rational};
use diffsym::symmetry::{sde_to_diffusor, AnsatzBasis, SdeCoefficients};
use diffsym::Error;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Dotted path into the model file, e.g. `fields.boost.tau`.
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            location: location.into(),
            message: message.into(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    coordinates: Vec<String>,
    diffusor: Option<RawDiffusor>,
    sde: Option<RawSde>,
    x0: Option<Vec<f64>>,
    #[serde(default)]
    fields: BTreeMap<String, RawField>,
    #[serde(default)]
    bases: BTreeMap<String, RawBasis>,
    #[serde(default)]
    transformations: BTreeMap<String, RawTransformation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiffusor {
    a: Vec<String>,
    b: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSde {
    mu: Vec<String>,
    sigma: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    phi: Vec<String>,
    tau: String,
    h: Option<String>,
    c: Option<Vec<Vec<String>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPhi {
    Uniform(Vec<String>),
    PerComponent(Vec<Vec<String>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    phi: RawPhi,
    tau: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransformation {
    f: String,
    phi: Vec<String>,
    f_inv: Option<String>,
    phi_inv: Option<Vec<String>>,
}

/// A candidate `X = τ∂_t + φ^i∂_i` with the optional Kolmogorov multiplier `h`
/// and rotation `C` used when comparing against the SDE.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub field: ProjectableVectorField,
    pub h: Option<Expr>,
    pub c: Option<Vec<Vec<Expr>>>,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub coords: CoordinateSystem,
    pub diffusor: Diffusor,
    pub sde: Option<SdeCoefficients>,
    pub x0: Vec<f64>,
    pub fields: BTreeMap<String, Candidate>,
    pub bases: BTreeMap<String, AnsatzBasis>,
    pub transformations: BTreeMap<String, Diffeomorphism>,
}

struct Checker<'a> {
    coords: &'a CoordinateSystem,
    diagnostics: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn fail(&mut self, location: &str, err: impl ToString) {
        self.diagnostics.push(Diagnostic::new(location, err.to_string()));
    }

    fn expr(&mut self, location: &str, src: &str) -> Option<Expr> {
        match parse_expr(src, self.coords) {
            Ok(e) => Some(e),
            Err(e) => {
                self.fail(location, e);
                None
            }
        }
    }

    fn exprs(&mut self, location: &str, srcs: &[String]) -> Option<Vec<Expr>> {
        let out: Vec<Option<Expr>> = srcs
            .iter()
            .enumerate()
            .map(|(i, s)| self.expr(&format!("{location}[{i}]"), s))
            .collect();
        out.into_iter().collect()
    }

    fn matrix(&mut self, location: &str, rows: &[Vec<String>]) -> Option<Vec<Vec<Expr>>> {
        let out: Vec<Option<Vec<Expr>>> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| self.exprs(&format!("{location}[{i}]"), r))
            .collect();
        out.into_iter().collect()
    }

    fn ok<T>(&mut self, location: &str, r: diffsym::Result<T>) -> Option<T> {
        r.map_err(|e| self.fail(location, e)).ok()
    }
}

impl Model {
    pub fn load(path: &Path) -> Result<Model, Vec<Diagnostic>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![Diagnostic::new("model", format!("cannot read {}: {e}", path.display()))])?;
        Model::parse(&text)
    }

    /// Parses and validates; every problem found is reported, not only the first.
    pub fn parse(text: &str) -> Result<Model, Vec<Diagnostic>> {
        let raw: RawModel =
            serde_json::from_str(text).map_err(|e| vec![Diagnostic::new("model", format!("invalid model JSON: {e}"))])?;
        let coords = CoordinateSystem::new(raw.coordinates.clone())
            .map_err(|e| vec![Diagnostic::new("coordinates", e.to_string())])?;
        let m = coords.dim();
        let mut ck = Checker {
            coords: &coords,
            diagnostics: Vec::new(),
        };

        let sde = raw.sde.as_ref().and_then(|s| {
            let mu = ck.exprs("sde.mu", &s.mu);
            let sigma = ck.matrix("sde.sigma", &s.sigma);
            let s = ck.ok("sde", SdeCoefficients::new(coords.clone(), mu?, sigma?))?;
            Some(s)
        });
        let given = raw.diffusor.as_ref().and_then(|d| {
            let a = ck.exprs("diffusor.a", &d.a)?;
            let b = ck.exprs("diffusor.b", &d.b)?;
            if a.len() == m * (m + 1) / 2 {
                ck.ok("diffusor", Diffusor::standard(coords.clone(), a, b))
            } else if a.len() == (m + 1) * (m + 2) / 2 {
                let a = ck.ok("diffusor.a", SymMatrix::from_upper(m + 1, a))?;
                let l = ck.ok("diffusor", Diffusor::new(coords.clone(), a, b))?;
                ck.ok("diffusor", l.require_standard().map(|_| l.clone()))
            } else {
                ck.fail(
                    "diffusor.a",
                    format!(
                        "expected {} spatial or {} space-time upper-triangular entries, found {}",
                        m * (m + 1) / 2,
                        (m + 1) * (m + 2) / 2,
                        a.len()
                    ),
                );
                None
            }
        });
        let diffusor = match (given, &sde) {
            (Some(l), Some(s)) => {
                let generated = sde_to_diffusor(s);
                let agrees = l.sub(&generated).and_then(|d| d.zero_test()).map(|z| z.is_zero());
                if agrees != Ok(true) {
                    ck.fail("sde", format!("generator {generated} differs from the diffusor {l}"));
                }
                Some(l)
            }
            (Some(l), None) => Some(l),
            (None, Some(s)) => Some(sde_to_diffusor(s)),
            (None, None) => {
                if raw.diffusor.is_none() && raw.sde.is_none() {
                    ck.fail("model", "needs a `diffusor` or an `sde` block");
                }
                None
            }
        };
        if let Some(l) = &diffusor {
            match l.require_psd() {
                Ok(()) => {}
                Err(Error::NotPsd { min_eigenvalue }) => ck.fail(
                    "diffusor.a",
                    format!("not PSD at probe points (most negative eigenvalue {min_eigenvalue:e})"),
                ),
                Err(e) => ck.fail("diffusor.a", e),
            }
        }

        let x0 = raw.x0.clone().unwrap_or_else(|| vec![0.0; m]);
        if x0.len() != m {
            ck.fail("x0", format!("expected {m} values, found {}", x0.len()));
        }

        let mut fields = BTreeMap::new();
        for (name, f) in &raw.fields {
            let loc = format!("fields.{name}");
            let phi = ck.exprs(&format!("{loc}.phi"), &f.phi);
            let tau = ck.expr(&format!("{loc}.tau"), &f.tau);
            let h = match &f.h {
                Some(h) => ck.expr(&format!("{loc}.h"), h).map(Some),
                None => Some(None),
            };
            let c = match &f.c {
                Some(c) => ck.matrix(&format!("{loc}.c"), c).map(Some),
                None => Some(None),
            };
            let (Some(phi), Some(tau), Some(h), Some(c)) = (phi, tau, h, c) else {
                continue;
            };
            if let Some(field) = ck.ok(&loc, ProjectableVectorField::new(coords.clone(), phi, tau)) {
                fields.insert(name.clone(), Candidate { field, h, c });
            }
        }

        let mut bases = BTreeMap::new();
        for (name, b) in &raw.bases {
            let loc = format!("bases.{name}");
            let tau = ck.exprs(&format!("{loc}.tau"), &b.tau);
            let phi = match &b.phi {
                RawPhi::Uniform(list) => ck.exprs(&format!("{loc}.phi"), list).map(|l| vec![l; m]),
                RawPhi::PerComponent(lists) => ck.matrix(&format!("{loc}.phi"), lists),
            };
            let (Some(phi), Some(tau)) = (phi, tau) else {
                continue;
            };
            if let Some(basis) = ck.ok(&loc, AnsatzBasis::new(phi, tau)) {
                bases.insert(name.clone(), basis);
            }
        }

        let mut transformations = BTreeMap::new();
        for (name, t) in &raw.transformations {
            let loc = format!("transformations.{name}");
            let f = ck.expr(&format!("{loc}.f"), &t.f);
            let phi = ck.exprs(&format!("{loc}.phi"), &t.phi);
            let (Some(f), Some(phi)) = (f, phi) else {
                continue;
            };
            let Some(mut map) = ck.ok(&loc, Diffeomorphism::new(coords.clone(), f, phi)) else {
                continue;
            };
            match (&t.f_inv, &t.phi_inv) {
                (Some(fi), Some(pi)) => {
                    let fi = ck.expr(&format!("{loc}.f_inv"), fi);
                    let pi = ck.exprs(&format!("{loc}.phi_inv"), pi);
                    if let (Some(fi), Some(pi)) = (fi, pi) {
                        match map.clone().with_inverse(fi, pi) {
                            Ok(with) => map = with,
                            Err(e) => {
                                ck.fail(&loc, e);
                                continue;
                            }
                        }
                    }
                }
                (None, None) => {}
                _ => ck.fail(&loc, "give both `f_inv` and `phi_inv` or neither"),
            }
            transformations.insert(name.clone(), map);
        }

        match diffusor {
            Some(diffusor) if ck.diagnostics.is_empty() => Ok(Model {
                coords,
                diffusor,
                sde,
                x0,
                fields,
                bases,
                transformations,
            }),
            _ => Err(ck.diagnostics),
        }
    }

    pub fn field(&self, name: &str) -> Result<&Candidate, Diagnostic> {
        self.fields
            .get(name)
            .ok_or_else(|| Diagnostic::new("fields", format!("no field named `{name}`")))
    }

    pub fn basis(&self, name: &str) -> Result<&AnsatzBasis, Diagnostic> {
        self.bases
            .get(name)
            .ok_or_else(|| Diagnostic::new("bases", format!("no basis named `{name}`")))
    }

    pub fn transformation(&self, name: &str) -> Result<&Diffeomorphism, Diagnostic> {
        self.transformations
            .get(name)
            .ok_or_else(|| Diagnostic::new("transformations", format!("no transformation named `{name}`")))
    }
}

/// `a` with `τ = a t`, if `τ` has that form.
pub fn time_scaling(tau: &Expr) -> Option<Rational> {
    if tau.is_zero_literal() {
        return Some(integer(0));
    }
    let a = normalize(&(tau.clone() * Expr::var("t").recip()));
    let a = a.as_const()?.clone();
    // guard against normal forms that hide a t-dependence
    match zero_test(&(tau.clone() - Expr::constant(a.clone()) * Expr::var("t"))) {
        Ok(z) if z.is_zero() => Some(a),
        _ => None,
    }
}
