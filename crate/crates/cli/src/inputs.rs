//! Flag and config resolution, input parsing and output placement.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use maharam_core::io::ActionDoc;
use maharam_core::maharam::Rect;
use maharam_core::zoo::{self, GroundTruth};
use maharam_core::{Atom, Error, GroupElement, L1Function, NsAction, WindowKind};

pub const OUT_DIR_ENV: &str = "MAHARAM_OUT_DIR";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CocycleViolation { .. } => 1,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A finished artifact and whether every check behind it passed.
pub struct Output {
    pub command: &'static str,
    pub extension: &'static str,
    pub body: String,
    pub pass: bool,
    pub out: Option<PathBuf>,
}

impl Output {
    pub fn json<T: serde::Serialize>(
        command: &'static str,
        value: &T,
        pass: bool,
        out: Option<PathBuf>,
    ) -> CliResult<Self> {
        let mut body = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::usage(format!("cannot serialize report: {e}")))?;
        body.push('\n');
        Ok(Output {
            command,
            extension: "json",
            body,
            pass,
            out,
        })
    }

    /// Writes the artifact and returns the pass flag.
    pub fn emit(self) -> CliResult<bool> {
        let target = match self.out {
            Some(p) => Some(p),
            None => std::env::var_os(OUT_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(format!("{}.{}", self.command, self.extension))),
        };
        match target {
            Some(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)
                        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
                }
                fs::write(&path, &self.body)
                    .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
            }
            None => print!("{}", self.body),
        }
        Ok(self.pass)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ActionValue {
    Name(String),
    Doc(ActionDoc),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ParamsValue {
    Text(String),
    Map(BTreeMap<String, serde_json::Value>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ElementValue {
    Scalar(i64),
    Coords(Vec<i64>),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RectsValue {
    Path(PathBuf),
    Inline(Vec<Rect>),
}

/// Contents of a `--config` file; keys mirror the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub command: Option<String>,
    pub action: Option<ActionValue>,
    pub params: Option<ParamsValue>,
    pub g: Option<OneOrMany>,
    pub n: Option<Vec<usize>>,
    pub window: Option<String>,
    pub timing: Option<bool>,
    pub theta_dec: Option<f64>,
    pub theta_stab: Option<f64>,
    pub expect: Option<String>,
    pub radius: Option<usize>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub ext_tol: Option<f64>,
    pub t: Option<ElementValue>,
    pub set: Option<String>,
    pub rects: Option<RectsValue>,
    pub m: Option<Vec<usize>>,
    pub region: Option<String>,
    pub form: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

/// Parses JSON with a `file:line:column: field: message` diagnostic.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<T> {
    let diagnostic = |inner: &serde_json::Error, path: String| {
        let field = if path == "." || path.is_empty() {
            String::new()
        } else {
            format!(" field `{path}`:")
        };
        let mut message = inner.to_string();
        if let Some(pos) = message.rfind(" at line ") {
            message.truncate(pos);
        }
        CliError::usage(format!(
            "{origin}:{}:{}:{field} {message}",
            inner.line(),
            inner.column()
        ))
    };
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| diagnostic(e.inner(), e.path().to_string()))?;
    de.end().map_err(|e| diagnostic(&e, String::new()))?;
    Ok(value)
}

pub fn load_json_file<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_json(&read_file(path)?, &path.display().to_string())
}

pub fn load_config(path: Option<&Path>, command: &str) -> CliResult<Config> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let config: Config = load_json_file(path)?;
    if let Some(c) = &config.command {
        if c != command {
            return Err(CliError::usage(format!(
                "{}: config is for '{c}', not '{command}'",
                path.display()
            )));
        }
    }
    Ok(config)
}

/// An action together with the document it came from.
pub struct Loaded {
    pub action: NsAction,
    pub doc: ActionDoc,
}

impl Loaded {
    pub fn atom_truth(&self, atom: &Atom) -> Option<GroundTruth> {
        self.doc.atom_truth(atom)
    }
}

fn parse_params(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("parameter '{item}' is not of the form k=v")))?;
        if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::usage(format!("parameter '{}' given twice", k.trim())));
        }
    }
    Ok(map)
}

fn params_from_config(value: ParamsValue) -> CliResult<BTreeMap<String, String>> {
    match value {
        ParamsValue::Text(t) => parse_params(&t),
        ParamsValue::Map(m) => m
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Number(n) => n.to_string(),
                    other => {
                        return Err(CliError::usage(format!(
                            "parameter '{k}' has unsupported value {other}"
                        )))
                    }
                };
                Ok((k, v))
            })
            .collect(),
    }
}

pub fn load_action(flag: Option<&str>, params: Option<&str>, config: &mut Config) -> CliResult<Loaded> {
    let params = match (params, config.params.take()) {
        (Some(p), _) => Some(parse_params(p)?),
        (None, Some(v)) => Some(params_from_config(v)?),
        (None, None) => None,
    };
    let value = match (flag, config.action.take()) {
        (Some(f), _) => ActionValue::Name(f.to_string()),
        (None, Some(v)) => v,
        (None, None) => return Err(CliError::usage("missing --action")),
    };
    let (doc, name) = match value {
        ActionValue::Doc(doc) => (doc, None),
        ActionValue::Name(text) => {
            let text = text.trim();
            let zoo_name = text
                .strip_prefix("zoo:")
                .or_else(|| zoo::fixture_spec(text).map(|_| text));
            if let Some(builder) = zoo_name {
                let spec = zoo::spec_from_params(builder, &params.clone().unwrap_or_default())?;
                let name = zoo::fixture_spec(builder).map(|_| builder.to_string());
                return finish(ActionDoc::Zoo(spec), name);
            }
            if params.is_some() {
                return Err(CliError::usage("--params only applies to zoo builders"));
            }
            if text.starts_with('{') {
                (parse_json(text, "--action")?, None)
            } else {
                (load_json_file(Path::new(text))?, None)
            }
        }
    };
    if params.is_some() {
        return Err(CliError::usage("--params only applies to zoo builders"));
    }
    finish(doc, name)
}

fn finish(doc: ActionDoc, name: Option<String>) -> CliResult<Loaded> {
    let action = doc.build()?;
    let action = match (&name, &doc) {
        (Some(n), _) => action.renamed(n.clone()),
        (None, ActionDoc::Zoo(spec)) => action.renamed(spec.name()),
        (None, ActionDoc::Explicit(_)) => action,
    };
    Ok(Loaded { action, doc })
}

/// Sampled commutativity of the generators on `S_1`.
pub fn require_commuting(action: &NsAction) -> CliResult<()> {
    let failures = action.check_commutativity(&action.sample_atoms(1));
    match failures.first() {
        None => Ok(()),
        Some((i, j, s)) => Err(CliError::failed(format!(
            "generators {} and {} do not commute at atom {s} ({} failures on S_1)",
            i + 1,
            j + 1,
            failures.len()
        ))),
    }
}

fn term_atoms(term: &str, action: &NsAction) -> CliResult<Vec<Atom>> {
    let term = term.trim();
    if term == "all" {
        return action
            .space()
            .atoms()
            .ok_or_else(|| CliError::usage("'all' needs a finite space; use exhaustion:m"));
    }
    let (kind, arg) = term
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("cannot parse term '{term}'")))?;
    let atoms = match kind.trim() {
        "atom" => vec![arg.parse::<Atom>()?],
        "atoms" => arg
            .split(';')
            .map(|a| a.parse::<Atom>())
            .collect::<Result<Vec<_>, _>>()?,
        "exhaustion" => {
            let m = arg
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("exhaustion level '{arg}' is not a nonnegative integer")))?;
            action.sample_atoms(m)
        }
        other => return Err(CliError::usage(format!("unknown term kind '{other}'"))),
    };
    for a in &atoms {
        if !action.space().contains(a) {
            return Err(CliError::usage(format!("atom {a} is not in the space")));
        }
    }
    Ok(atoms)
}

/// `c*term + term + ...`, each term an indicator.
pub fn parse_function(spec: &str, action: &NsAction) -> CliResult<L1Function> {
    let mut total = L1Function::zero();
    for raw in spec.split('+') {
        let (scale, term) = match raw.split_once('*') {
            Some((c, t)) => (
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::usage(format!("scale '{c}' is not a number")))?,
                t,
            ),
            None => (1.0, raw),
        };
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(CliError::usage(format!("scale {scale} must be finite and nonnegative")));
        }
        let atoms = term_atoms(term, action)?;
        let part = L1Function::indicator(action.space(), &atoms)?.scaled(scale)?;
        total = total.sum(&part, action.space())?;
    }
    Ok(total)
}

/// A set of atoms, `term + term + ...`.
pub fn parse_atom_set(spec: &str, action: &NsAction) -> CliResult<Vec<Atom>> {
    let mut atoms = std::collections::BTreeSet::new();
    for term in spec.split('+') {
        atoms.extend(term_atoms(term, action)?);
    }
    Ok(atoms.into_iter().collect())
}

pub fn parse_element(text: &str, d: usize) -> CliResult<GroupElement> {
    let t = text.trim();
    let t = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
    let coords = t
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<i64>()
                .map_err(|_| CliError::usage(format!("cannot parse group element '{text}'")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    element_of(coords, d)
}

pub fn element_from_config(value: ElementValue, d: usize) -> CliResult<GroupElement> {
    match value {
        ElementValue::Scalar(k) => element_of(vec![k], d),
        ElementValue::Coords(c) => element_of(c, d),
        ElementValue::Text(t) => parse_element(&t, d),
    }
}

fn element_of(coords: Vec<i64>, d: usize) -> CliResult<GroupElement> {
    if coords.len() != d {
        return Err(CliError::usage(format!(
            "group element has {} coordinates, the action has dimension {d}",
            coords.len()
        )));
    }
    Ok(GroupElement(coords))
}

pub fn parse_window(text: Option<String>) -> CliResult<WindowKind> {
    match text {
        None => Ok(WindowKind::Corner),
        Some(t) => t.parse::<WindowKind>().map_err(CliError::from),
    }
}

pub fn check_ns(ns: &[usize], what: &str) -> CliResult<()> {
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::usage(format!(
            "{what} list must be strictly increasing positive integers, got {ns:?}"
        )));
    }
    Ok(())
}

pub fn check_positive(value: f64, what: &str) -> CliResult<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::usage(format!(
            "{what} must be positive and finite, got {value}"
        )))
    }
}
