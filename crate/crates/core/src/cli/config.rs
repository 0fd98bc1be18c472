//! Fixture configuration files. See `docs/config.md` for the grammar.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::fixture::Fixture;
use crate::geometry::{
    ConformalMetric, ConstantForm, ConstantMetric, DiagonalMetric, Euclidean, ExpConformal, Expr, FunkForm, FunkMetric,
    LinearForm, MetricField, OneFormField,
};
use crate::scalar::{PhiFamily, PhiSpec};
use crate::tolerances::Tolerances;

/// Overrides for the `scalars` command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScalarsConfig {
    pub b2: Option<f64>,
    pub s: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub fixture: Fixture,
    pub scalars: ScalarsConfig,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub fixtures: Vec<FixtureConfig>,
}

/// Parses a config document: either one fixture at top level or a list of
/// `[[fixture]]` tables.
pub fn parse_config(text: &str) -> Result<Config> {
    let doc: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e.span().map_or(0, |r| line_of(text, r.start)),
        message: e.message().to_string(),
    })?;
    let fixtures = match doc.get("fixture") {
        Some(Value::Array(items)) => {
            if doc.len() > 1 {
                let extra = doc.keys().find(|k| *k != "fixture").cloned().unwrap_or_default();
                return Err(Error::validation(extra, "not allowed next to [[fixture]] tables"));
            }
            if items.is_empty() {
                return Err(Error::validation("fixture", "empty fixture list"));
            }
            items
                .iter()
                .enumerate()
                .map(|(i, item)| match item {
                    Value::Table(t) => parse_fixture(t, &format!("fixture[{i}].")),
                    _ => Err(Error::validation(format!("fixture[{i}]"), "expected a table")),
                })
                .collect::<Result<Vec<_>>>()?
        }
        Some(_) => return Err(Error::validation("fixture", "expected [[fixture]] tables")),
        None => vec![parse_fixture(&doc, "")?],
    };
    Ok(Config { fixtures })
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// A table view that remembers its path and which keys were read, so
/// misspelled keys are rejected by name.
struct Section<'a> {
    table: &'a Table,
    path: String,
    seen: BTreeSet<&'static str>,
}

impl<'a> Section<'a> {
    fn new(table: &'a Table, path: impl Into<String>) -> Self {
        Self { table, path: path.into(), seen: BTreeSet::new() }
    }

    fn field(&self, key: &str) -> String {
        format!("{}{}", self.path, key)
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.insert(key);
        self.table.get(key)
    }

    fn require(&mut self, key: &'static str) -> Result<&'a Value> {
        let field = self.field(key);
        self.get(key).ok_or_else(|| Error::validation(field, "missing"))
    }

    fn sub(&mut self, key: &'static str) -> Result<Option<Section<'a>>> {
        let path = format!("{}.", self.field(key));
        match self.get(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Section::new(t, path))),
            Some(_) => Err(Error::validation(self.field(key), "expected a table")),
        }
    }

    fn string(&mut self, key: &'static str) -> Result<Option<&'a str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Error::validation(self.field(key), "expected a string")),
        }
    }

    fn float(&mut self, key: &'static str) -> Result<Option<f64>> {
        let field = self.field(key);
        self.get(key).map(|v| as_float(v, &field)).transpose()
    }

    fn req_float(&mut self, key: &'static str) -> Result<f64> {
        let field = self.field(key);
        as_float(self.require(key)?, &field)
    }

    fn count(&mut self, key: &'static str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(Error::validation(self.field(key), "expected a non-negative integer")),
        }
    }

    fn vector(&mut self, key: &'static str, len: Option<usize>) -> Result<Option<Vec<f64>>> {
        let field = self.field(key);
        self.get(key).map(|v| as_vector(v, &field, len)).transpose()
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().find(|k| !self.seen.contains(k.as_str())) {
            Some(k) => Err(Error::validation(self.field(k), "unknown key")),
            None => Ok(()),
        }
    }
}

fn as_float(v: &Value, field: &str) -> Result<f64> {
    let x = match v {
        Value::Float(f) => *f,
        Value::Integer(i) => *i as f64,
        _ => return Err(Error::validation(field, "expected a number")),
    };
    if !x.is_finite() {
        return Err(Error::validation(field, "must be finite"));
    }
    Ok(x)
}

fn as_vector(v: &Value, field: &str, len: Option<usize>) -> Result<Vec<f64>> {
    let Value::Array(items) = v else {
        return Err(Error::validation(field, "expected an array of numbers"));
    };
    let out = items
        .iter()
        .enumerate()
        .map(|(i, x)| as_float(x, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(n) = len {
        if out.len() != n {
            return Err(Error::validation(field, format!("expected {n} entries, found {}", out.len())));
        }
    }
    Ok(out)
}

fn as_matrix(v: &Value, field: &str, n: usize) -> Result<DMatrix<f64>> {
    let Value::Array(rows) = v else {
        return Err(Error::validation(field, "expected an array of rows"));
    };
    if rows.len() != n {
        return Err(Error::validation(field, format!("expected {n} rows, found {}", rows.len())));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in as_vector(row, &format!("{field}[{i}]"), Some(n))?.into_iter().enumerate() {
            m[(i, j)] = x;
        }
    }
    Ok(m)
}

fn as_strings(v: &Value, field: &str, n: usize) -> Result<Vec<String>> {
    let Value::Array(items) = v else {
        return Err(Error::validation(field, "expected an array of strings"));
    };
    if items.len() != n {
        return Err(Error::validation(field, format!("expected {n} entries, found {}", items.len())));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, x)| match x {
            Value::String(s) => Ok(s.clone()),
            _ => Err(Error::validation(format!("{field}[{i}]"), "expected a string")),
        })
        .collect()
}

fn expression(source: &str, n: usize, field: &str) -> Result<Expr> {
    Expr::parse(source, n).map_err(|e| match e {
        Error::Validation { message, .. } => Error::validation(field, message),
        other => other,
    })
}

fn parse_fixture(table: &Table, prefix: &str) -> Result<FixtureConfig> {
    let mut top = Section::new(table, prefix);
    let name = top.string("name")?.map(str::to_string);
    let mut fixture = match top.string("builtin")? {
        Some(b) => {
            for key in ["n", "alpha", "beta", "phi"] {
                if table.contains_key(key) {
                    return Err(Error::validation(top.field(key), "not allowed together with `builtin`"));
                }
            }
            let mut f = Fixture::builtin(b).ok_or_else(|| {
                Error::validation(top.field("builtin"), format!("unknown fixture; known: {}", Fixture::builtin_names().join(", ")))
            })?;
            // a built-in keeps its own name unless renamed
            if let Some(name) = name {
                f.name = name;
            }
            f
        }
        None => {
            let name = name.ok_or_else(|| Error::validation(top.field("name"), "missing"))?;
            let n = top.count("n")?.ok_or_else(|| Error::validation(top.field("n"), "missing"))?;
            if !(2..=8).contains(&n) {
                return Err(Error::validation(top.field("n"), "dimension must be between 2 and 8"));
            }
            let metric = {
                let mut s = top.sub("alpha")?.ok_or_else(|| Error::validation(top.field("alpha"), "missing"))?;
                let m = parse_alpha(&mut s, n)?;
                s.finish()?;
                m
            };
            let form = {
                let mut s = top.sub("beta")?.ok_or_else(|| Error::validation(top.field("beta"), "missing"))?;
                let f = parse_beta(&mut s, n)?;
                s.finish()?;
                f
            };
            let phi = {
                let mut s = top.sub("phi")?.ok_or_else(|| Error::validation(top.field("phi"), "missing"))?;
                let p = parse_phi(&mut s)?;
                s.finish()?;
                p
            };
            // points are checked below, after the probe section is read
            Fixture::new(name, metric, form, phi, Vec::new()).map_err(|e| locate(e, &top.field("n")))?
        }
    };
    let n = fixture.n;
    let points_field = format!("{prefix}probe.points");
    if let Some(mut probe) = top.sub("probe")? {
        if let Some(v) = probe.get("points") {
            let Value::Array(items) = v else {
                return Err(Error::validation(&points_field, "expected an array of points"));
            };
            if items.is_empty() {
                return Err(Error::validation(&points_field, "at least one point is required"));
            }
            fixture.points = items
                .iter()
                .enumerate()
                .map(|(i, p)| as_vector(p, &format!("{points_field}[{i}]"), Some(n)))
                .collect::<Result<_>>()?;
        }
        if let Some(d) = probe.count("directions")? {
            if d < n + 2 {
                return Err(Error::validation(probe.field("directions"), format!("need at least n + 2 = {}", n + 2)));
            }
            fixture.directions = d;
        }
        if let Some(g) = probe.count("grid")? {
            if g < 3 {
                return Err(Error::validation(probe.field("grid"), "need at least 3 points"));
            }
            fixture.grid = g;
        }
        if let Some(w) = probe.vector("volume_shift", Some(n))? {
            fixture = fixture.with_volume_shift(w)?;
        }
        probe.finish()?;
    }
    if fixture.points.is_empty() {
        return Err(Error::validation(&points_field, "missing"));
    }
    for (i, x) in fixture.points.iter().enumerate() {
        fixture.check_point(x).map_err(|e| locate(e, &format!("{points_field}[{i}]")))?;
    }
    let mut scalars = ScalarsConfig::default();
    if let Some(mut s) = top.sub("scalars")? {
        scalars.b2 = s.float("b2")?;
        if matches!(scalars.b2, Some(b2) if !(0.0..=fixture.phi.b0 * fixture.phi.b0).contains(&b2)) {
            return Err(Error::validation(s.field("b2"), "must lie in [0, b0²]"));
        }
        scalars.s = s.vector("s", None)?;
        s.finish()?;
    }
    if let Some(v) = top.get("tolerances") {
        let field = top.field("tolerances");
        let Value::Table(t) = v else {
            return Err(Error::validation(field, "expected a table"));
        };
        fixture.tolerances = Value::Table(t.clone()).try_into::<Tolerances>().map_err(|e| Error::validation(field, e.message().to_string()))?;
    }
    top.finish()?;
    Ok(FixtureConfig { fixture, scalars })
}

/// Attaches a field name to errors that do not carry one.
fn locate(e: Error, field: &str) -> Error {
    match e {
        Error::Validation { message, .. } => Error::validation(field, message),
        Error::Parse { .. } => e,
        other => Error::validation(field, other.to_string()),
    }
}

fn parse_alpha(s: &mut Section, n: usize) -> Result<Arc<dyn MetricField>> {
    let kind = s.string("kind")?.ok_or_else(|| Error::validation(s.field("kind"), "missing"))?;
    Ok(match kind {
        "euclidean" => Arc::new(Euclidean { n }),
        "funk_ball" => Arc::new(FunkMetric { n }),
        "constant" => {
            let field = s.field("matrix");
            let m = as_matrix(s.require("matrix")?, &field, n)?;
            if (&m - m.transpose()).abs().max() > 0.0 {
                return Err(Error::validation(field, "must be symmetric"));
            }
            Arc::new(ConstantMetric { a: m })
        }
        "exp_conformal" => {
            let w = s.vector("w", Some(n))?.ok_or_else(|| Error::validation(s.field("w"), "missing"))?;
            Arc::new(ExpConformal { w: DVector::from_vec(w) })
        }
        "conformal" => {
            let field = s.field("factor");
            let Value::String(src) = s.require("factor")? else {
                return Err(Error::validation(field, "expected a string"));
            };
            Arc::new(ConformalMetric { n, factor: expression(src, n, &field)? })
        }
        "diagonal" => {
            let field = s.field("entries");
            let entries = as_strings(s.require("entries")?, &field, n)?
                .iter()
                .enumerate()
                .map(|(i, src)| expression(src, n, &format!("{field}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Arc::new(DiagonalMetric { entries })
        }
        other => {
            return Err(Error::validation(
                s.field("kind"),
                format!("unknown kind `{other}` (euclidean, diagonal, conformal, exp_conformal, constant, funk_ball)"),
            ))
        }
    })
}

fn parse_beta(s: &mut Section, n: usize) -> Result<Arc<dyn OneFormField>> {
    let kind = s.string("kind")?.ok_or_else(|| Error::validation(s.field("kind"), "missing"))?;
    Ok(match kind {
        "constant" => {
            let b = s.vector("b", Some(n))?.ok_or_else(|| Error::validation(s.field("b"), "missing"))?;
            Arc::new(ConstantForm { b: DVector::from_vec(b) })
        }
        "linear" => {
            let field = s.field("matrix");
            let m = as_matrix(s.require("matrix")?, &field, n)?;
            let offset = s.vector("offset", Some(n))?.unwrap_or_else(|| vec![0.0; n]);
            Arc::new(LinearForm { m, offset: DVector::from_vec(offset) })
        }
        "funk_ball" => Arc::new(FunkForm { n }),
        other => {
            return Err(Error::validation(s.field("kind"), format!("unknown kind `{other}` (constant, linear, funk_ball)")))
        }
    })
}

fn parse_phi(s: &mut Section) -> Result<PhiSpec> {
    let family = s.string("family")?.ok_or_else(|| Error::validation(s.field("family"), "missing"))?;
    let family = match family {
        "riemannian" => PhiFamily::Riemannian,
        "randers" => PhiFamily::Randers,
        "quadratic" => PhiFamily::Quadratic,
        "power" => PhiFamily::Power { m: s.req_float("m")? },
        "randers_type" => PhiFamily::RandersType { k1: s.req_float("k1")?, k2: s.req_float("k2")?, k3: s.req_float("k3")? },
        "taylor" => {
            let coeffs = s.vector("coeffs", None)?.ok_or_else(|| Error::validation(s.field("coeffs"), "missing"))?;
            if coeffs.is_empty() || coeffs.len() > 9 {
                return Err(Error::validation(s.field("coeffs"), "between 1 and 9 coefficients"));
            }
            if s.table.get("b0").is_none() {
                return Err(Error::validation(s.field("b0"), "required for the taylor family"));
            }
            PhiFamily::Taylor { coeffs }
        }
        other => {
            return Err(Error::validation(
                s.field("family"),
                format!("unknown family `{other}` (riemannian, randers, power, quadratic, randers_type, taylor)"),
            ))
        }
    };
    let b0 = s.float("b0")?;
    PhiSpec::new(family, b0).map_err(|e| locate(e, &s.field("family")))
}
