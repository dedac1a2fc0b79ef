//! Structure manifests: a chart, named tensor fields, a candidate bundle
//! and check settings, read from TOML.
//!
//! ```toml
//! [chart]
//! label = "u"
//! lower = [-1.0, -1.0]
//! upper = [1.0, 1.0]
//! base = [0.0, 0.0]
//!
//! [fields.A]
//! valence = "scalar"
//! expr = "u1"
//!
//! [fields.K2]
//! valence = "(1,1)"
//! components = { "1.1" = "u1", "1.2" = "0", "2.1" = "0", "2.2" = "u2" }
//!
//! [candidate]
//! A = "A"
//! K = ["Id", "K2"]
//! ```
//!
//! Component keys are 1-based indices joined by dots, optionally prefixed
//! with the field name (`"K2.1.2"`). Every component must be listed. The
//! identity field `Id` is always defined.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr, VarScope};
use crate::geom::{ChartBox, TensorField, Valence};

/// Packaged scenarios, by name.
pub const SCENARIOS: &[(&str, &str)] = &[
    ("advection", include_str!("../scenarios/advection.toml")),
    ("diag-2d", include_str!("../scenarios/diag-2d.toml")),
    ("weak-2d", include_str!("../scenarios/weak-2d.toml")),
    ("a3-frobenius", include_str!("../scenarios/a3-frobenius.toml")),
    ("scaling", include_str!("../scenarios/scaling.toml")),
    ("perturbed-a3", include_str!("../scenarios/perturbed-a3.toml")),
    ("companion-3d", include_str!("../scenarios/companion-3d.toml")),
];

pub fn scenario_source(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    name: Option<String>,
    description: Option<String>,
    chart: RawChart,
    #[serde(default)]
    fields: BTreeMap<String, RawField>,
    candidate: Option<RawCandidate>,
    #[serde(default)]
    checks: RawChecks,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    #[serde(default = "default_label")]
    label: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    base: Option<Vec<f64>>,
}

fn default_label() -> String {
    "u".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    valence: String,
    expr: Option<String>,
    components: Option<BTreeMap<String, String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCandidate {
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "K")]
    k: Vec<String>,
    generator: Option<String>,
    symmetry: Option<String>,
    #[serde(rename = "F")]
    f: Option<String>,
    t_origin: Option<Vec<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawChecks {
    run: Option<Vec<String>>,
    tol: Option<f64>,
    points: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    expect: BTreeMap<String, String>,
}

/// Names making up a candidate bundle; resolved against the field table.
#[derive(Clone, Debug)]
pub struct CandidateSpec {
    pub a: String,
    pub k: Vec<String>,
    pub generator: Option<String>,
    pub symmetry: Option<String>,
    /// Potential `F(t1..tn)` in the distinguished coordinates.
    pub f: Option<Expr>,
    pub t_origin: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default)]
pub struct CheckSettings {
    pub run: Option<Vec<String>>,
    pub tol: Option<f64>,
    pub points: Option<usize>,
    pub seed: Option<u64>,
    /// Expected verdict per check id, for packaged scenarios.
    pub expect: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub name: String,
    pub description: Option<String>,
    pub chart: Arc<ChartBox>,
    pub fields: BTreeMap<String, TensorField>,
    pub candidate: Option<CandidateSpec>,
    pub checks: CheckSettings,
    /// Hex SHA-256 of the source text.
    pub hash: String,
}

impl Manifest {
    /// Load from a file path, or from a packaged scenario when no such
    /// file exists.
    pub fn load(path_or_name: &str) -> Result<Manifest> {
        let path = Path::new(path_or_name);
        if path.is_file() {
            let text = std::fs::read_to_string(path)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("manifest");
            return Manifest::parse(&text, stem);
        }
        match scenario_source(path_or_name) {
            Some(src) => Manifest::parse(src, path_or_name),
            None => Err(Error::UnknownScenario(path_or_name.to_string())),
        }
    }

    pub fn parse(text: &str, default_name: &str) -> Result<Manifest> {
        let raw: RawManifest = toml::from_str(text).map_err(|e| Error::Schema(e.message().to_string()))?;
        let base = match raw.chart.base {
            Some(b) => b,
            None => raw.chart.lower.iter().zip(&raw.chart.upper).map(|(l, u)| 0.5 * (l + u)).collect(),
        };
        let chart = Arc::new(ChartBox::new(&raw.chart.label, raw.chart.lower, raw.chart.upper, base)?);
        let n = chart.dim();
        let scope = VarScope::chart(n, &chart.label);

        let mut fields = BTreeMap::new();
        fields.insert("Id".to_string(), TensorField::identity(chart.clone()));
        for (name, rf) in &raw.fields {
            if name == "Id" {
                return Err(Error::Schema("field name 'Id' is reserved".into()));
            }
            fields.insert(name.clone(), build_field(name, rf, &chart, &scope)?);
        }

        let candidate = match raw.candidate {
            None => None,
            Some(rc) => {
                let f = match &rc.f {
                    Some(src) => Some(
                        parse_expr(src, &VarScope::new(n, &["t"]))
                            .map_err(|source| Error::Expr { path: "candidate.F".into(), source })?,
                    ),
                    None => None,
                };
                if let Some(t0) = &rc.t_origin {
                    if t0.len() != n {
                        return Err(Error::Schema(format!("candidate.t_origin: expected {n} entries, got {}", t0.len())));
                    }
                }
                let spec = CandidateSpec {
                    a: rc.a,
                    k: rc.k,
                    generator: rc.generator,
                    symmetry: rc.symmetry,
                    f,
                    t_origin: rc.t_origin,
                };
                check_references(&spec, &fields)?;
                Some(spec)
            }
        };

        let m = Manifest {
            name: raw.name.unwrap_or_else(|| default_name.to_string()),
            description: raw.description,
            chart,
            fields,
            candidate,
            checks: CheckSettings {
                run: raw.checks.run,
                tol: raw.checks.tol,
                points: raw.checks.points,
                seed: raw.checks.seed,
                expect: raw.checks.expect,
            },
            hash: hex_digest(text.as_bytes()),
        };
        m.probe()?;
        Ok(m)
    }

    pub fn field(&self, name: &str) -> Result<&TensorField> {
        self.fields.get(name).ok_or_else(|| Error::Schema(format!("undefined field '{name}'")))
    }

    /// Evaluate every field's 2-jet at eight interior points near the
    /// corners of the box so that domain errors surface at load time.
    fn probe(&self) -> Result<()> {
        for p in probe_points(&self.chart) {
            for f in self.fields.values() {
                f.jets(&p).map_err(|e| Error::Schema(format!("field '{}' cannot be evaluated: {e}", f.name)))?;
            }
        }
        Ok(())
    }
}

pub fn probe_points(chart: &ChartBox) -> Vec<Vec<f64>> {
    let n = chart.dim();
    (0..8u32)
        .map(|k| {
            (0..n)
                .map(|i| {
                    // corner pattern from the bits of k, cycling over axes
                    let hi = (k >> (i % 3)) & 1 == 1;
                    let frac = if hi { 0.95 } else { 0.05 };
                    chart.lower[i] + frac * chart.width(i)
                })
                .collect()
        })
        .collect()
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn build_field(name: &str, rf: &RawField, chart: &Arc<ChartBox>, scope: &VarScope) -> Result<TensorField> {
    let valence = Valence::parse(&rf.valence)
        .ok_or_else(|| Error::Schema(format!("field '{name}': unknown valence '{}'", rf.valence)))?;
    let n = chart.dim();
    let parse = |src: &str, path: String| parse_expr(src, scope).map_err(|source| Error::Expr { path, source });
    let comps = match (valence, &rf.expr, &rf.components) {
        (Valence::Scalar, Some(src), None) => vec![parse(src, format!("fields.{name}.expr"))?],
        (_, None, Some(table)) => {
            let want = valence.count(n);
            if table.len() != want {
                return Err(Error::Schema(format!(
                    "field '{name}': expected {want} components, got {}",
                    table.len()
                )));
            }
            let mut slots: Vec<Option<Expr>> = vec![None; want];
            for (key, src) in table {
                let idx = component_index(name, key, valence, n)?;
                if slots[idx].is_some() {
                    return Err(Error::Schema(format!("field '{name}': duplicate component '{key}'")));
                }
                slots[idx] = Some(parse(src, format!("fields.{name}.components.{key}"))?);
            }
            slots.into_iter().map(|s| s.expect("all slots filled: count and uniqueness checked")).collect()
        }
        _ => {
            return Err(Error::Schema(format!(
                "field '{name}': give 'expr' for a scalar or a 'components' table otherwise"
            )))
        }
    };
    TensorField::new(name, valence, chart.clone(), comps)
}

fn component_index(name: &str, key: &str, valence: Valence, n: usize) -> Result<usize> {
    let bad = || Error::Schema(format!("field '{name}': bad component key '{key}'"));
    let mut parts: Vec<&str> = key.split('.').collect();
    if parts.first() == Some(&name) {
        parts.remove(0);
    }
    if parts.len() != valence.rank() as usize {
        return Err(bad());
    }
    let mut idx = 0;
    for p in parts {
        let i: usize = p.parse().map_err(|_| bad())?;
        if i == 0 || i > n {
            return Err(bad());
        }
        idx = idx * n + (i - 1);
    }
    Ok(idx)
}

fn check_references(spec: &CandidateSpec, fields: &BTreeMap<String, TensorField>) -> Result<()> {
    let want = |name: &str, v: Valence, role: &str| -> Result<()> {
        let f = fields.get(name).ok_or_else(|| Error::Schema(format!("candidate.{role}: undefined field '{name}'")))?;
        if f.valence != v {
            return Err(Error::Schema(format!("candidate.{role}: field '{name}' has valence {}, expected {v}", f.valence)));
        }
        Ok(())
    };
    want(&spec.a, Valence::Scalar, "A")?;
    if spec.k.is_empty() {
        return Err(Error::Schema("candidate.K: empty list".into()));
    }
    for k in &spec.k {
        want(k, Valence::Endomorphism, "K")?;
    }
    if let Some(g) = &spec.generator {
        want(g, Valence::Vector, "generator")?;
    }
    if let Some(s) = &spec.symmetry {
        want(s, Valence::Vector, "symmetry")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[chart]
lower = [-1.0, -1.0]
upper = [1.0, 1.0]

[fields.A]
valence = "scalar"
expr = "u1"

[fields.K2]
valence = "(1,1)"
components = { "1.1" = "u1", "1.2" = "0", "2.1" = "0", "2.2" = "u2" }

[candidate]
A = "A"
K = ["Id", "K2"]
"#;

    #[test]
    fn minimal_manifest_loads() {
        let m = Manifest::parse(MINIMAL, "minimal").unwrap();
        assert_eq!(m.chart.dim(), 2);
        assert_eq!(m.candidate.as_ref().unwrap().k.len(), 2);
        assert_eq!(m.field("K2").unwrap().values(&[0.5, 0.25]).unwrap(), vec![0.5, 0.0, 0.0, 0.25]);
        assert_eq!(m.hash.len(), 64);
    }

    #[test]
    fn wrong_component_count() {
        let src = MINIMAL.replace(r#""2.1" = "0", "#, "");
        let err = Manifest::parse(&src, "bad").unwrap_err().to_string();
        assert!(err.contains("expected 4 components"), "{err}");
    }

    #[test]
    fn parse_error_carries_path() {
        let src = MINIMAL.replace(r#"expr = "u1""#, r#"expr = "u1 + * u2""#);
        match Manifest::parse(&src, "bad").unwrap_err() {
            Error::Expr { path, .. } => assert_eq!(path, "fields.A.expr"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn undefined_reference() {
        let src = MINIMAL.replace(r#"K = ["Id", "K2"]"#, r#"K = ["Id", "K3"]"#);
        assert!(matches!(Manifest::parse(&src, "bad"), Err(Error::Schema(_))));
    }

    #[test]
    fn domain_errors_surface_at_load() {
        let src = MINIMAL.replace(r#"expr = "u1""#, r#"expr = "log(u1)""#);
        assert!(matches!(Manifest::parse(&src, "bad"), Err(Error::Schema(_))));
    }

    #[test]
    fn prefixed_keys() {
        let src = MINIMAL.replace(r#""1.1" = "u1""#, r#""K2.1.1" = "u1""#);
        assert!(Manifest::parse(&src, "ok").is_ok());
    }

    #[test]
    fn every_scenario_loads() {
        for (name, _) in SCENARIOS {
            let m = Manifest::load(name).unwrap();
            assert_eq!(&m.name, name);
        }
        assert!(matches!(Manifest::load("no-such-thing"), Err(Error::UnknownScenario(_))));
    }
}
