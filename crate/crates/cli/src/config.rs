//! Run configuration: `key = value` lines with dotted section prefixes
//! (TOML), for example
//!
//! ```text
//! problem = "strip_2d"
//! alpha = 0.25
//! epsilon_list = [0.5, 0.1]
//! geometry.nx = 128
//! geometry.ny = 64
//! boundary.left = 1
//! boundary.right = "0.5 * y"
//! solver.tol_energy = 1e-9
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use fbvol_core::{BoundaryData, Contact, GridDomain, PenaltyParams, SegmentTag, SolverConfig};
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("`{key}` (line {line}): {msg}")]
    Invalid { key: String, line: usize, msg: String },
    #[error("override `{0}`: expected key=value")]
    Override(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Problem {
    #[serde(rename = "interval_1d")]
    Interval1d,
    #[serde(rename = "square_2d")]
    Square2d,
    #[serde(rename = "strip_2d")]
    Strip2d,
    #[serde(rename = "annulus_2d")]
    Annulus2d,
    #[serde(rename = "halfdisk")]
    Halfdisk,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Interval1d => "interval_1d",
            Problem::Square2d => "square_2d",
            Problem::Strip2d => "strip_2d",
            Problem::Annulus2d => "annulus_2d",
            Problem::Halfdisk => "halfdisk",
        }
    }
}

/// Resolved lattice parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// `n` nodes on `[0, 1]`.
    Interval { n: usize },
    /// `n × n` nodes on the unit square.
    Square { n: usize },
    Strip { nx: usize, ny: usize, h: f64 },
    Annulus { inner: f64, outer: f64, h: f64 },
    /// Unit half-disk with `h = 1/n`.
    Halfdisk { n: usize },
}

impl Geometry {
    pub fn build(&self) -> fbvol_core::Result<GridDomain> {
        match *self {
            Geometry::Interval { n } => GridDomain::build_rectangle(n, 1, 1.0 / n as f64),
            Geometry::Square { n } => GridDomain::build_rectangle(n, n, 1.0 / n as f64),
            Geometry::Strip { nx, ny, h } => GridDomain::build_strip(nx, ny, h),
            Geometry::Annulus { inner, outer, h } => GridDomain::build_annulus(inner, outer, h),
            Geometry::Halfdisk { n } => GridDomain::build_halfdisk(n),
        }
    }
}

/// Dirichlet value on one segment.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BoundaryValue {
    Const(f64),
    /// Expression in `x` and `y`.
    Expr(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub segments: Vec<(SegmentTag, BoundaryValue)>,
    pub contact: Option<Contact>,
}

impl BoundarySpec {
    /// Samples the segment values on `domain`; unlisted segments get 0.
    pub fn sample(&self, domain: &GridDomain) -> Result<BoundaryData, String> {
        let mut compiled = Vec::with_capacity(self.segments.len());
        for (tag, v) in &self.segments {
            compiled.push((*tag, Sampler::new(v)?));
        }
        let mut values = Vec::with_capacity(domain.boundary_nodes().len());
        for &(n, tag) in domain.boundary_nodes() {
            let v = match compiled.iter().find(|(t, _)| *t == tag) {
                Some((_, s)) => s.eval(domain.position(n))?,
                None => 0.0,
            };
            values.push(v);
        }
        BoundaryData::from_values(domain, self.contact, values).map_err(|e| e.to_string())
    }
}

enum Sampler {
    Const(f64),
    Expr(Node<DefaultNumericTypes>),
}

impl Sampler {
    fn new(v: &BoundaryValue) -> Result<Self, String> {
        match v {
            BoundaryValue::Const(c) => Ok(Sampler::Const(*c)),
            BoundaryValue::Expr(e) => evalexpr::build_operator_tree(e)
                .map(Sampler::Expr)
                .map_err(|err| format!("cannot parse `{e}`: {err}")),
        }
    }

    fn eval(&self, x: [f64; 2]) -> Result<f64, String> {
        match self {
            Sampler::Const(c) => Ok(*c),
            Sampler::Expr(node) => {
                let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
                ctx.set_value("x".into(), Value::Float(x[0])).map_err(|e| e.to_string())?;
                ctx.set_value("y".into(), Value::Float(x[1])).map_err(|e| e.to_string())?;
                node.eval_number_with_context(&ctx).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Monotone,
    Replacement,
    Density,
    LambdaConstancy,
    Growth,
    Blowup,
    Flatness,
    Asymptotic,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Monotone,
        Check::Replacement,
        Check::Density,
        Check::LambdaConstancy,
        Check::Growth,
        Check::Blowup,
        Check::Flatness,
        Check::Asymptotic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Monotone => "monotone",
            Check::Replacement => "replacement",
            Check::Density => "density",
            Check::LambdaConstancy => "lambda_constancy",
            Check::Growth => "growth",
            Check::Blowup => "blowup",
            Check::Flatness => "flatness",
            Check::Asymptotic => "asymptotic",
        }
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Check::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Settings of the half-disk flatness runs used by the verification suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessSettings {
    pub n: usize,
    pub delta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub geometry: Geometry,
    pub boundary: BoundarySpec,
    pub p: f64,
    pub alpha: f64,
    /// Strictly descending.
    pub epsilon_list: Vec<f64>,
    /// Carries `p` and the top-level `seed`.
    pub solver: SolverConfig,
    /// Fixed volume tolerance; per-row default `2 h^N ·` (free-boundary
    /// edge count) when absent.
    pub vol_tol: Option<f64>,
    pub warm_start: bool,
    pub checks: Vec<Check>,
    pub flatness: FlatnessSettings,
    pub blowup_radii: Vec<f64>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn domain(&self) -> Arc<GridDomain> {
        Arc::new(self.geometry.build().expect("geometry validated at parse time"))
    }

    pub fn boundary_data(&self, domain: &GridDomain) -> BoundaryData {
        self.boundary.sample(domain).expect("boundary validated at parse time")
    }

    pub fn params(&self, epsilon: f64) -> PenaltyParams {
        PenaltyParams::new(epsilon, self.alpha).expect("alpha and epsilon validated at parse time")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Spanned<Problem>,
    p: Option<Spanned<f64>>,
    alpha: Spanned<f64>,
    epsilon_list: Spanned<Vec<f64>>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    vol_tol: Option<Spanned<f64>>,
    warm_start: Option<bool>,
    checks: Option<Vec<Spanned<String>>>,
    #[serde(default)]
    geometry: RawGeometry,
    #[serde(default)]
    boundary: BTreeMap<String, Spanned<BoundaryValue>>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    flatness: RawFlatness,
    #[serde(default)]
    blowup: RawBlowup,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    n: Option<Spanned<usize>>,
    nx: Option<Spanned<usize>>,
    ny: Option<Spanned<usize>>,
    h: Option<Spanned<f64>>,
    inner_radius: Option<Spanned<f64>>,
    outer_radius: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    eta: Option<f64>,
    max_outer: Option<usize>,
    relax_iters: Option<usize>,
    outer_sweeps: Option<usize>,
    relax_tol: Option<f64>,
    tol_energy: Option<f64>,
    toggle_passes: Option<usize>,
    omega: Option<f64>,
    patch_radius: Option<usize>,
    patch_sweeps: Option<usize>,
    max_swaps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlatness {
    n: Option<Spanned<usize>>,
    delta0: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlowup {
    radii: Option<Spanned<Vec<f64>>>,
}

/// Reads `path`, applies `key=value` overrides and validates.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_str(&text, overrides)
}

pub fn parse_str(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = apply_overrides(text, overrides)?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    Validator { text: &text }.finish(raw)
}

/// Sets dotted keys in the document, keeping the position of existing
/// lines so error line numbers still point into the file.
fn apply_overrides(text: &str, overrides: &[String]) -> Result<String, ConfigError> {
    if overrides.is_empty() {
        return Ok(text.to_owned());
    }
    let mut doc: toml_edit::DocumentMut =
        text.parse().map_err(|e: toml_edit::TomlError| ConfigError::Syntax(e.to_string()))?;
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| ConfigError::Override(o.clone()))?;
        let (key, raw) = (key.trim(), raw.trim());
        let value = raw
            .parse::<toml_edit::Value>()
            .unwrap_or_else(|_| toml_edit::Value::from(raw));
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(ConfigError::Override(o.clone()));
        }
        let mut item = doc.as_item_mut();
        for part in &parts[..parts.len() - 1] {
            if item.get(part).is_none() {
                let mut t = toml_edit::Table::new();
                t.set_implicit(true);
                item.as_table_like_mut()
                    .ok_or_else(|| ConfigError::Override(o.clone()))?
                    .insert(part, toml_edit::Item::Table(t));
            }
            item = &mut item[part];
        }
        item.as_table_like_mut()
            .ok_or_else(|| ConfigError::Override(o.clone()))?
            .insert(parts[parts.len() - 1], toml_edit::Item::Value(value));
    }
    Ok(doc.to_string())
}

struct Validator<'a> {
    text: &'a str,
}

impl Validator<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn err<T>(&self, key: &str, span: Range<usize>, msg: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError::Invalid {
            key: key.to_owned(),
            line: self.line(span),
            msg: msg.into(),
        })
    }

    fn finish(&self, raw: RawConfig) -> Result<RunConfig, ConfigError> {
        let problem = *raw.problem.get_ref();
        let problem_span = raw.problem.span();
        let geometry = self.geometry(problem, problem_span.clone(), &raw.geometry)?;
        let domain = match geometry.build() {
            Ok(d) => d,
            Err(e) => return self.err("geometry", problem_span, e.to_string()),
        };

        let p = raw.p.as_ref().map_or(2.0, |s| *s.get_ref());
        if let Some(s) = &raw.p {
            if !(p > 1.0 && p.is_finite()) {
                return self.err("p", s.span(), "p must be a finite number above 1");
            }
        }

        let alpha = *raw.alpha.get_ref();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return self.err("alpha", raw.alpha.span(), "alpha must be positive");
        }
        if alpha >= domain.area() {
            return self.err(
                "alpha",
                raw.alpha.span(),
                format!("alpha must be smaller than the domain area {}", domain.area()),
            );
        }

        let mut epsilon_list = raw.epsilon_list.get_ref().clone();
        let eps_span = raw.epsilon_list.span();
        if epsilon_list.is_empty() {
            return self.err("epsilon_list", eps_span, "epsilon_list must not be empty");
        }
        if let Some(e) = epsilon_list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return self.err("epsilon_list", eps_span, format!("entry {e} is not a positive number"));
        }
        epsilon_list.sort_by(|a, b| b.total_cmp(a));
        if epsilon_list.windows(2).any(|w| w[0] == w[1]) {
            return self.err("epsilon_list", eps_span, "entries must be distinct");
        }

        let boundary = self.boundary(&raw.boundary, &domain)?;

        let mut solver = SolverConfig::new(p);
        let s = &raw.solver;
        solver.eta = s.eta.or(solver.eta);
        solver.max_outer = s.max_outer.unwrap_or(solver.max_outer);
        solver.relax_iters = s.relax_iters.unwrap_or(solver.relax_iters);
        solver.outer_sweeps = s.outer_sweeps.or(solver.outer_sweeps);
        solver.relax_tol = s.relax_tol.unwrap_or(solver.relax_tol);
        solver.tol_energy = s.tol_energy.unwrap_or(solver.tol_energy);
        solver.toggle_passes = s.toggle_passes.unwrap_or(solver.toggle_passes);
        solver.omega = s.omega.or(solver.omega);
        solver.patch_radius = s.patch_radius.or(solver.patch_radius);
        solver.patch_sweeps = s.patch_sweeps.or(solver.patch_sweeps);
        solver.max_swaps = s.max_swaps.unwrap_or(solver.max_swaps);
        solver.seed = raw.seed.unwrap_or(0);
        if let Err(e) = solver.validate() {
            let span = self.key_span("solver").unwrap_or(0..0);
            return self.err("solver", span, e.to_string());
        }

        let vol_tol = match &raw.vol_tol {
            Some(s) if !(*s.get_ref() >= 0.0) => {
                return self.err("vol_tol", s.span(), "vol_tol must be nonnegative")
            }
            other => other.as_ref().map(|s| *s.get_ref()),
        };

        let checks = match &raw.checks {
            None => Check::ALL.to_vec(),
            Some(list) => {
                let mut out = Vec::new();
                for c in list {
                    match c.get_ref().parse::<Check>() {
                        Ok(k) if !out.contains(&k) => out.push(k),
                        Ok(_) => {}
                        Err(msg) => return self.err("checks", c.span(), msg),
                    }
                }
                out
            }
        };

        let flatness = FlatnessSettings {
            n: raw.flatness.n.as_ref().map_or(64, |s| *s.get_ref()),
            delta0: raw.flatness.delta0.as_ref().map_or(1.0 / 3.0, |s| *s.get_ref()),
        };
        if let Some(s) = &raw.flatness.n {
            if flatness.n < 8 {
                return self.err("flatness.n", s.span(), "flatness.n must be at least 8");
            }
        }
        if let Some(s) = &raw.flatness.delta0 {
            if !(0.0..=1.0).contains(&flatness.delta0) {
                return self.err("flatness.delta0", s.span(), "flatness.delta0 must lie in [0, 1]");
            }
        }

        let blowup_radii = match &raw.blowup.radii {
            None => vec![0.2, 0.1, 0.05],
            Some(s) => {
                let r = s.get_ref().clone();
                if r.is_empty() || r.iter().any(|x| !(*x > 0.0)) || r.windows(2).any(|w| w[1] >= w[0]) {
                    return self.err(
                        "blowup.radii",
                        s.span(),
                        "blowup.radii must be positive and strictly decreasing",
                    );
                }
                r
            }
        };

        Ok(RunConfig {
            problem,
            geometry,
            boundary,
            p,
            alpha,
            epsilon_list,
            solver,
            vol_tol,
            warm_start: raw.warm_start.unwrap_or(false),
            checks,
            flatness,
            blowup_radii,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    /// Span of the first line assigning `key` or a dotted key below it.
    fn key_span(&self, key: &str) -> Option<Range<usize>> {
        let mut offset = 0;
        for line in self.text.split_inclusive('\n') {
            let t = line.trim_start();
            if t.starts_with(&format!("{key}.")) || t.starts_with(&format!("[{key}]")) {
                return Some(offset..offset + line.len());
            }
            offset += line.len();
        }
        None
    }

    fn geometry(&self, problem: Problem, span: Range<usize>, g: &RawGeometry) -> Result<Geometry, ConfigError> {
        let get_n = |s: &Option<Spanned<usize>>, d: usize| s.as_ref().map_or(d, |s| *s.get_ref());
        let get_f = |s: &Option<Spanned<f64>>| s.as_ref().map(|s| *s.get_ref());
        let allowed: &[&str] = match problem {
            Problem::Interval1d | Problem::Square2d | Problem::Halfdisk => &["n"],
            Problem::Strip2d => &["nx", "ny", "h"],
            Problem::Annulus2d => &["inner_radius", "outer_radius", "h"],
        };
        let given: [(&str, Option<Range<usize>>); 6] = [
            ("n", g.n.as_ref().map(|s| s.span())),
            ("nx", g.nx.as_ref().map(|s| s.span())),
            ("ny", g.ny.as_ref().map(|s| s.span())),
            ("h", g.h.as_ref().map(|s| s.span())),
            ("inner_radius", g.inner_radius.as_ref().map(|s| s.span())),
            ("outer_radius", g.outer_radius.as_ref().map(|s| s.span())),
        ];
        for (name, sp) in given.clone() {
            if let Some(sp) = sp {
                if !allowed.contains(&name) {
                    return self.err(
                        &format!("geometry.{name}"),
                        sp,
                        format!("not a parameter of {}", problem.name()),
                    );
                }
            }
        }
        let geometry = match problem {
            Problem::Interval1d => Geometry::Interval { n: get_n(&g.n, 256) },
            Problem::Square2d => Geometry::Square { n: get_n(&g.n, 64) },
            Problem::Halfdisk => Geometry::Halfdisk { n: get_n(&g.n, 64) },
            Problem::Strip2d => {
                let nx = get_n(&g.nx, 128);
                Geometry::Strip {
                    nx,
                    ny: get_n(&g.ny, 64),
                    h: get_f(&g.h).unwrap_or(1.0 / nx as f64),
                }
            }
            Problem::Annulus2d => Geometry::Annulus {
                inner: get_f(&g.inner_radius).unwrap_or(1.0),
                outer: get_f(&g.outer_radius).unwrap_or(2.0),
                h: get_f(&g.h).unwrap_or(2.0 / 63.0),
            },
        };
        if let Err(e) = geometry.build() {
            let sp = given.iter().find_map(|(_, s)| s.clone()).unwrap_or(span);
            return self.err("geometry", sp, e.to_string());
        }
        Ok(geometry)
    }

    fn boundary(
        &self,
        raw: &BTreeMap<String, Spanned<BoundaryValue>>,
        domain: &GridDomain,
    ) -> Result<BoundarySpec, ConfigError> {
        let mut segments = Vec::new();
        let mut contact_tag = None;
        let mut c0 = None;
        let mut first_span = 0..0;
        for (key, v) in raw {
            let span = v.span();
            if first_span == (0..0) {
                first_span = span.clone();
            }
            let full = format!("boundary.{key}");
            match (key.as_str(), v.get_ref()) {
                ("contact_tag", BoundaryValue::Expr(name)) => match SegmentTag::from_name(name) {
                    Some(t) => contact_tag = Some((t, span)),
                    None => return self.err(&full, span, format!("unknown segment `{name}`")),
                },
                ("contact_tag", _) => return self.err(&full, span, "expected a segment name"),
                ("c0", BoundaryValue::Const(c)) => c0 = Some((*c, span)),
                ("c0", _) => return self.err(&full, span, "expected a number"),
                (name, value) => match SegmentTag::from_name(name) {
                    Some(t) => {
                        if let Err(msg) = Sampler::new(value).and_then(|s| s.eval([0.0, 0.0])) {
                            return self.err(&full, span, msg);
                        }
                        segments.push((t, value.clone()));
                    }
                    None => return self.err(&full, span, format!("unknown segment `{name}`")),
                },
            }
        }
        let contact = match (contact_tag, c0) {
            (Some((tag, _)), Some((c0, _))) => Some(Contact { tag, c0 }),
            (None, None) => None,
            (Some((_, span)), None) => return self.err("boundary.c0", span, "contact_tag needs c0"),
            (None, Some((_, span))) => return self.err("boundary.contact_tag", span, "c0 needs contact_tag"),
        };
        let spec = BoundarySpec { segments, contact };
        if let Err(msg) = spec.sample(domain) {
            return self.err("boundary", first_span, msg);
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "problem = \"interval_1d\"\nalpha = 0.5\nepsilon_list = [0.1, 0.5]\nboundary.left = 1\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_str(MINIMAL, &[]).unwrap();
        assert_eq!(c.geometry, Geometry::Interval { n: 256 });
        assert_eq!(c.p, 2.0);
        assert_eq!(c.epsilon_list, vec![0.5, 0.1]);
        assert_eq!(c.checks.len(), Check::ALL.len());
        assert_eq!(c.solver, SolverConfig::new(2.0));
        assert!(!c.warm_start);
    }

    #[test]
    fn alpha_beyond_area_is_rejected() {
        let text = MINIMAL.replace("alpha = 0.5", "alpha = 1.5");
        let err = parse_str(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("`alpha` (line 2)"), "{err}");
    }

    #[test]
    fn zero_epsilon_is_rejected() {
        let text = MINIMAL.replace("[0.1, 0.5]", "[0.1, 0.0]");
        let err = parse_str(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("epsilon_list") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_and_missing_keys_are_rejected() {
        let err = parse_str(&format!("{MINIMAL}solver.tolerance = 1\n"), &[]).unwrap_err();
        assert!(err.to_string().contains("tolerance"), "{err}");
        assert!(err.to_string().contains("line 5"), "{err}");
        let err = parse_str("problem = \"interval_1d\"\nalpha = 0.5\n", &[]).unwrap_err();
        assert!(err.to_string().contains("epsilon_list"), "{err}");
        let err = parse_str(&format!("{MINIMAL}boundary.middle = 1\n"), &[]).unwrap_err();
        assert!(err.to_string().contains("boundary.middle"), "{err}");
        let err = parse_str(&format!("{MINIMAL}geometry.nx = 4\n"), &[]).unwrap_err();
        assert!(err.to_string().contains("geometry.nx"), "{err}");
    }

    #[test]
    fn type_mismatch_names_the_line() {
        let text = MINIMAL.replace("alpha = 0.5", "alpha = \"half\"");
        let err = parse_str(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn overrides_replace_and_add_keys() {
        let c = parse_str(
            MINIMAL,
            &["solver.tol_energy=1e-6".into(), "alpha=0.25".into(), "geometry.n = 64".into()],
        )
        .unwrap();
        assert_eq!(c.solver.tol_energy, 1e-6);
        assert_eq!(c.alpha, 0.25);
        assert_eq!(c.geometry, Geometry::Interval { n: 64 });
        assert!(parse_str(MINIMAL, &["nonsense".into()]).is_err());
    }

    #[test]
    fn expressions_and_contact() {
        let text = "problem = \"annulus_2d\"\nalpha = 0.5\nepsilon_list = [0.05]\ngeometry.h = 0.1\n\
                    boundary.inner = \"1 + 0 * x * y\"\nboundary.contact_tag = \"inner\"\nboundary.c0 = 1\n";
        let c = parse_str(text, &[]).unwrap();
        let d = c.domain();
        let bd = c.boundary_data(&d);
        assert_eq!(bd.contact().unwrap().tag, SegmentTag::Inner);
        let mut inner = d.boundary_nodes().iter().zip(bd.values()).filter(|((_, t), _)| *t == SegmentTag::Inner);
        assert!(inner.clone().count() > 0 && inner.all(|(_, v)| *v == 1.0));
        let bad = text.replace("\"1 + 0 * x * y\"", "\"1 +\"");
        let err = parse_str(&bad, &[]).unwrap_err().to_string();
        assert!(err.contains("boundary.inner") && err.contains("line 5"), "{err}");
        let below = text.replace("boundary.c0 = 1", "boundary.c0 = 2");
        assert!(parse_str(&below, &[]).is_err());
    }

    #[test]
    fn explicit_empty_check_list() {
        let c = parse_str(&format!("{MINIMAL}checks = []\n"), &[]).unwrap();
        assert!(c.checks.is_empty());
        let err = parse_str(&format!("{MINIMAL}checks = [\"speed\"]\n"), &[]).unwrap_err();
        assert!(err.to_string().contains("speed"));
    }
}
