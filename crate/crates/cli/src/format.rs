//! Scenario and certificate files.
//!
//! Every number is an exact rational string; ring elements are coordinate
//! arrays over K, algebra elements and structure constants are sparse.

use std::sync::OnceLock;

use azulift_core::algebra::{AlgElem, AlgebraMap, StructAlgebra};
use azulift_core::lift::{
    base_ring, tower_from, Check, LiftCertificate, LiftScenario, Primed, Report, Seeds, Witnesses,
};
use azulift_core::{BaseField, Elem, Ring, Q};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const CERT_FORMAT: &str = "azulift-certificate/1";

const SCENARIO_SCHEMA: &str = include_str!("../../../docs/scenario.schema.json");
const CERTIFICATE_SCHEMA: &str = include_str!("../../../docs/certificate.schema.json");

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("bad number `{0}`")]
    Number(String),
    #[error("bad field descriptor `{0}`")]
    Field(String),
    #[error("{0}")]
    Shape(String),
    #[error("inconsistent certificate: {0}")]
    Inconsistent(String),
}

fn schema(
    src: &'static str,
    cell: &'static OnceLock<jsonschema::Validator>,
) -> &'static jsonschema::Validator {
    cell.get_or_init(|| {
        let v: Value = serde_json::from_str(src).expect("shipped schema is JSON");
        jsonschema::validator_for(&v).expect("shipped schema compiles")
    })
}

fn check_schema(
    src: &'static str,
    cell: &'static OnceLock<jsonschema::Validator>,
    doc: &Value,
) -> Result<(), FormatError> {
    let v = schema(src, cell);
    if let Some(err) = v.iter_errors(doc).next() {
        return Err(FormatError::Schema {
            path: err.instance_path.to_string(),
            msg: err.to_string(),
        });
    }
    Ok(())
}

static SCENARIO_VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
static CERTIFICATE_VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();

// ---------------------------------------------------------------------------
// Scenario

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub field: String,
    pub trunc: usize,
    pub a1: String,
    pub a2: String,
    pub a3: String,
    pub x2: [String; 2],
    pub x3: [String; 2],
    #[serde(default = "one_str")]
    pub d: String,
    #[serde(default)]
    pub seeds: SeedsFile,
    #[serde(default)]
    pub rng_seed: u64,
}

fn one_str() -> String {
    "1".into()
}

fn zero_str() -> String {
    "0".into()
}

fn zero_pair() -> [String; 2] {
    [zero_str(), zero_str()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsFile {
    #[serde(default = "zero_str")]
    pub a1: String,
    #[serde(default = "zero_pair")]
    pub x2: [String; 2],
    #[serde(default = "zero_pair")]
    pub x3: [String; 2],
    #[serde(default = "zero_pair")]
    pub mu2: [String; 2],
    #[serde(default = "zero_pair")]
    pub mu3: [String; 2],
    #[serde(default = "zero_pair")]
    pub mu23: [String; 2],
    #[serde(default = "zero_str")]
    pub d: String,
}

impl Default for SeedsFile {
    fn default() -> Self {
        SeedsFile {
            a1: zero_str(),
            x2: zero_pair(),
            x3: zero_pair(),
            mu2: zero_pair(),
            mu3: zero_pair(),
            mu23: zero_pair(),
            d: zero_str(),
        }
    }
}

fn q(s: &str) -> Result<Q, FormatError> {
    s.parse().map_err(|_| FormatError::Number(s.to_string()))
}

fn pair(p: &[String; 2]) -> Result<(Q, Q), FormatError> {
    Ok((q(&p[0])?, q(&p[1])?))
}

fn show_pair(p: &(Q, Q)) -> [String; 2] {
    [p.0.to_string(), p.1.to_string()]
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Result<LiftScenario, FormatError> {
        let field: BaseField = self
            .field
            .parse()
            .map_err(|_| FormatError::Field(self.field.clone()))?;
        if self.trunc == 0 {
            return Err(FormatError::Shape("trunc must be at least 1".into()));
        }
        let s = &self.seeds;
        Ok(LiftScenario {
            field,
            trunc: self.trunc,
            a1: q(&self.a1)?,
            a2: q(&self.a2)?,
            a3: q(&self.a3)?,
            x2: pair(&self.x2)?,
            x3: pair(&self.x3)?,
            d: q(&self.d)?,
            seeds: Seeds {
                a1: q(&s.a1)?,
                x2: pair(&s.x2)?,
                x3: pair(&s.x3)?,
                mu2: pair(&s.mu2)?,
                mu3: pair(&s.mu3)?,
                mu23: pair(&s.mu23)?,
                d: q(&s.d)?,
            },
            rng_seed: self.rng_seed,
        })
    }

    pub fn from_scenario(sc: &LiftScenario) -> ScenarioFile {
        let s = &sc.seeds;
        ScenarioFile {
            field: sc.field.to_string(),
            trunc: sc.trunc,
            a1: sc.a1.to_string(),
            a2: sc.a2.to_string(),
            a3: sc.a3.to_string(),
            x2: show_pair(&sc.x2),
            x3: show_pair(&sc.x3),
            d: sc.d.to_string(),
            seeds: SeedsFile {
                a1: s.a1.to_string(),
                x2: show_pair(&s.x2),
                x3: show_pair(&s.x3),
                mu2: show_pair(&s.mu2),
                mu3: show_pair(&s.mu3),
                mu23: show_pair(&s.mu23),
                d: s.d.to_string(),
            },
            rng_seed: sc.rng_seed,
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<LiftScenario, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    check_schema(SCENARIO_SCHEMA, &SCENARIO_VALIDATOR, &doc)?;
    let file: ScenarioFile = serde_json::from_value(doc)?;
    file.to_scenario()
}

pub fn write_scenario(sc: &LiftScenario) -> String {
    to_json(&ScenarioFile::from_scenario(sc))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// Certificate

type Coords = Vec<String>;
type SparseElem = Vec<(usize, Coords)>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub format: String,
    pub scenario: ScenarioFile,
    pub witnesses: WitnessesFile,
    pub primed: PrimedFile,
    pub b: AlgebraFile,
    pub alpha: MapFile,
    pub c: SparseElem,
    pub a: AlgebraFile,
    pub quat: AlgebraFile,
    pub e: SparseElem,
    pub d: AlgebraFile,
    pub d_basis: Vec<SparseElem>,
    pub report: Vec<CheckFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessesFile {
    pub y: String,
    pub mu2: [String; 2],
    pub mu3: [String; 2],
    pub mu23: [String; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimedFile {
    pub a1: Coords,
    pub x2: Coords,
    pub x3: Coords,
    pub mu2: Coords,
    pub mu3: Coords,
    pub mu23: Coords,
    pub y: Coords,
    pub a2: Coords,
    pub a3: Coords,
    pub d: Coords,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub base: String,
    pub dim: usize,
    pub one: SparseElem,
    pub gens: Vec<GenFile>,
    pub table: Vec<(usize, usize, usize, Coords)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenFile {
    pub name: String,
    pub elem: SparseElem,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub twist: u32,
    pub images: Vec<SparseElem>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckFile {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

fn coords(x: &Elem) -> Coords {
    x.0.iter().map(Q::to_string).collect()
}

fn sparse(x: &AlgElem) -> SparseElem {
    x.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, coords(c)))
        .collect()
}

fn algebra_file(a: &StructAlgebra, base: &str) -> AlgebraFile {
    let mut table = Vec::new();
    for (i, row) in a.table().iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let mut entry: Vec<_> = entry.iter().collect();
            entry.sort_by_key(|(k, _)| *k);
            for (k, c) in entry {
                table.push((i, j, *k, coords(c)));
            }
        }
    }
    AlgebraFile {
        base: base.to_string(),
        dim: a.dim(),
        one: sparse(&a.one()),
        gens: a
            .gens()
            .iter()
            .map(|(n, g)| GenFile {
                name: n.clone(),
                elem: sparse(g),
            })
            .collect(),
        table,
    }
}

impl CertificateFile {
    pub fn from_certificate(cert: &LiftCertificate) -> CertificateFile {
        let w = &cert.witnesses;
        let p = &cert.primed;
        CertificateFile {
            format: CERT_FORMAT.to_string(),
            scenario: ScenarioFile::from_scenario(&cert.scenario),
            witnesses: WitnessesFile {
                y: w.y.to_string(),
                mu2: show_pair(&w.mu2),
                mu3: show_pair(&w.mu3),
                mu23: show_pair(&w.mu23),
            },
            primed: PrimedFile {
                a1: coords(&p.a1),
                x2: coords(&p.x2),
                x3: coords(&p.x3),
                mu2: coords(&p.mu2),
                mu3: coords(&p.mu3),
                mu23: coords(&p.mu23),
                y: coords(&p.y),
                a2: coords(&p.a2),
                a3: coords(&p.a3),
                d: coords(&p.d),
            },
            b: algebra_file(&cert.b, "S"),
            alpha: MapFile {
                twist: cert.alpha.twist,
                images: cert.alpha.images.iter().map(sparse).collect(),
            },
            c: sparse(&cert.c),
            a: algebra_file(&cert.a, "T"),
            quat: algebra_file(&cert.quat, "T"),
            e: sparse(&cert.e),
            d: algebra_file(&cert.d, "T"),
            d_basis: cert.d_basis.iter().map(sparse).collect(),
            report: cert
                .report
                .checks
                .iter()
                .map(|c| CheckFile {
                    check: c.name.clone(),
                    pass: c.pass,
                    detail: c.detail.clone(),
                })
                .collect(),
        }
    }

    pub fn to_certificate(&self) -> Result<LiftCertificate, FormatError> {
        if self.format != CERT_FORMAT {
            return Err(FormatError::Shape(format!(
                "unknown format `{}`",
                self.format
            )));
        }
        let scenario = self.scenario.to_scenario()?;
        let k = scenario.field;
        let t = base_ring(k, scenario.trunc).map_err(|e| FormatError::Shape(e.to_string()))?;
        let p = &self.primed;
        let elem = |r: &Ring, c: &Coords, what: &str| read_elem(&k, r, c, what);
        let a1 = elem(&t, &p.a1, "a1'")?;
        let s = Ring::adjoin_sqrts(&t, std::slice::from_ref(&a1))
            .map_err(|e| FormatError::Inconsistent(e.to_string()))?;
        let x2 = elem(&s, &p.x2, "x2'")?;
        let x3 = elem(&s, &p.x3, "x3'")?;
        let tower =
            tower_from(&t, &a1, &x2, &x3).map_err(|e| FormatError::Inconsistent(e.to_string()))?;
        let primed = Primed {
            mu2: elem(&tower.s2, &p.mu2, "mu2'")?,
            mu3: elem(&tower.s3, &p.mu3, "mu3'")?,
            mu23: elem(&tower.s23, &p.mu23, "mu23'")?,
            y: elem(&t, &p.y, "y'")?,
            a2: elem(&t, &p.a2, "a2'")?,
            a3: elem(&t, &p.a3, "a3'")?,
            d: elem(&t, &p.d, "d'")?,
            a1,
            x2,
            x3,
        };
        let ring_of = |name: &str| -> Result<&Ring, FormatError> {
            match name {
                "T" => Ok(&tower.t),
                "S" => Ok(&tower.s),
                other => Err(FormatError::Shape(format!("unknown base `{other}`"))),
            }
        };
        let alg = |f: &AlgebraFile, what: &str| read_algebra(&k, ring_of(&f.base)?, f, what);
        let b = alg(&self.b, "B'")?;
        let a = alg(&self.a, "A'")?;
        let quat = alg(&self.quat, "quaternion factor")?;
        let d = alg(&self.d, "D'")?;
        let bdim = b.dim();
        let a2dim = a.dim() * quat.dim();
        let alpha = AlgebraMap {
            images: self
                .alpha
                .images
                .iter()
                .map(|x| read_sparse(&k, b.base(), bdim, x, "alpha"))
                .collect::<Result<_, _>>()?,
            twist: self.alpha.twist,
        };
        let w = &self.witnesses;
        Ok(LiftCertificate {
            witnesses: Witnesses {
                y: q(&w.y)?,
                mu2: pair(&w.mu2)?,
                mu3: pair(&w.mu3)?,
                mu23: pair(&w.mu23)?,
            },
            c: read_sparse(&k, b.base(), bdim, &self.c, "c")?,
            e: read_sparse(&k, &tower.t, a2dim, &self.e, "e")?,
            d_basis: self
                .d_basis
                .iter()
                .map(|x| read_sparse(&k, &tower.t, a2dim, x, "D' basis"))
                .collect::<Result<_, _>>()?,
            report: Report {
                checks: self
                    .report
                    .iter()
                    .map(|c| Check {
                        name: c.check.clone(),
                        pass: c.pass,
                        detail: c.detail.clone(),
                    })
                    .collect(),
            },
            scenario,
            primed,
            alpha,
            b,
            a,
            quat,
            d,
        })
    }
}

fn read_elem(k: &BaseField, r: &Ring, c: &Coords, what: &str) -> Result<Elem, FormatError> {
    if c.len() != r.dim() {
        return Err(FormatError::Shape(format!(
            "{what}: {} coordinates, expected {}",
            c.len(),
            r.dim()
        )));
    }
    let v = c.iter().map(|s| q(s)).collect::<Result<Vec<Q>, _>>()?;
    if let BaseField::Prime(p) = k {
        let bound = num_bigint::BigInt::from(*p);
        let reduced = |x: &Q| {
            x.is_integer() && x.numer().sign() != num_bigint::Sign::Minus && x.numer() < bound
        };
        if let Some(bad) = v.iter().find(|x| !reduced(x)) {
            return Err(FormatError::Number(format!(
                "{bad} is not reduced modulo {p} in {what}"
            )));
        }
    }
    Ok(Elem(v))
}

fn read_sparse(
    k: &BaseField,
    r: &Ring,
    dim: usize,
    x: &SparseElem,
    what: &str,
) -> Result<AlgElem, FormatError> {
    let mut out = vec![r.zero(); dim];
    for (i, c) in x {
        if *i >= dim {
            return Err(FormatError::Shape(format!(
                "{what}: index {i} out of range {dim}"
            )));
        }
        out[*i] = read_elem(k, r, c, what)?;
    }
    Ok(out)
}

fn read_algebra(
    k: &BaseField,
    r: &Ring,
    f: &AlgebraFile,
    what: &str,
) -> Result<StructAlgebra, FormatError> {
    let n = f.dim;
    let mut table = vec![vec![Vec::new(); n]; n];
    for (i, j, l, c) in &f.table {
        if *i >= n || *j >= n || *l >= n {
            return Err(FormatError::Shape(format!(
                "{what}: table index out of range {n}"
            )));
        }
        table[*i][*j].push((*l, read_elem(k, r, c, what)?));
    }
    for row in &mut table {
        for entry in row.iter_mut() {
            entry.sort_by_key(|(l, _)| *l);
            if entry.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(FormatError::Shape(format!("{what}: repeated table entry")));
            }
        }
    }
    let one = read_sparse(k, r, n, &f.one, what)?;
    let gens = f
        .gens
        .iter()
        .map(|g| Ok((g.name.clone(), read_sparse(k, r, n, &g.elem, what)?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    StructAlgebra::new_unchecked(r.clone(), n, table, one, gens)
        .map_err(|e| FormatError::Shape(format!("{what}: {e}")))
}

pub fn parse_certificate(text: &str) -> Result<LiftCertificate, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    check_schema(CERTIFICATE_SCHEMA, &CERTIFICATE_VALIDATOR, &doc)?;
    if let Some(sc) = doc.get("scenario") {
        check_schema(SCENARIO_SCHEMA, &SCENARIO_VALIDATOR, sc)?;
    }
    let file: CertificateFile = serde_json::from_value(doc)?;
    file.to_certificate()
}

pub fn write_certificate(cert: &LiftCertificate) -> String {
    to_json(&CertificateFile::from_certificate(cert))
}
