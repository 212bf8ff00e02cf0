//! Strict JSON run configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use maxstable::rng_math::Matrix;
use maxstable::{
    validate_model, Algorithm, BrownResnickSpec, DirichletSpec, ExtremalTSpec, LogisticSpec, ModelSpec, MovingMaxSpec,
    NegLogisticSpec, SiteSet,
};
use serde_json::{Map, Value};

pub const DEFAULT_REPS: usize = 1000;
pub const DEFAULT_H_DRAWS: usize = 100_000;
pub const DEFAULT_FOLD_K: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub algorithm: Algorithm,
    pub reps: usize,
    pub seed: u64,
    pub threads: usize,
    pub output: Option<PathBuf>,
    pub h_draws: usize,
    pub fold_k: usize,
    pub negative_control: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, column, message } => {
                write!(f, "config parse error at line {line}, column {column}: {message}")
            }
            ConfigError::Invalid(errors) => {
                write!(
                    f,
                    "invalid config ({} problem{}):",
                    errors.len(),
                    if errors.len() == 1 { "" } else { "s" }
                )?;
                for e in errors {
                    write!(f, "\n  - {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

const FAMILIES: &str = "logistic, neg_logistic, dirichlet, brown_resnick, extremal_t, moving_max";

/// Reads typed keys from the document, remembering which keys were seen so
/// that leftovers can be reported as unknown.
struct Fields<'a> {
    map: &'a Map<String, Value>,
    seen: BTreeSet<&'static str>,
    errors: Vec<String>,
}

impl<'a> Fields<'a> {
    fn get(&mut self, key: &'static str, required: bool) -> Option<&'a Value> {
        self.seen.insert(key);
        let v = self.map.get(key);
        if v.is_none() && required {
            self.errors.push(format!("{key}: missing required key"));
        }
        v
    }

    fn bad(&mut self, key: &str, expected: &str, got: &Value) {
        self.errors.push(format!("{key}: expected {expected}, got {got}"));
    }

    fn f64(&mut self, key: &'static str) -> Option<f64> {
        let v = self.get(key, true)?;
        let out = v.as_f64();
        if out.is_none() {
            self.bad(key, "a number", v);
        }
        out
    }

    fn count(&mut self, key: &'static str, required: bool) -> Option<usize> {
        let v = self.get(key, required)?;
        match v.as_u64().and_then(|u| usize::try_from(u).ok()) {
            Some(0) => {
                self.errors.push(format!("{key}: must be at least 1, got 0"));
                None
            }
            Some(u) => Some(u),
            None => {
                self.bad(key, "a positive integer", v);
                None
            }
        }
    }

    fn u64(&mut self, key: &'static str) -> Option<u64> {
        let v = self.get(key, false)?;
        let out = v.as_u64();
        if out.is_none() {
            self.bad(key, "an unsigned 64-bit integer", v);
        }
        out
    }

    fn bool(&mut self, key: &'static str) -> Option<bool> {
        let v = self.get(key, false)?;
        let out = v.as_bool();
        if out.is_none() {
            self.bad(key, "true or false", v);
        }
        out
    }

    fn str(&mut self, key: &'static str, required: bool) -> Option<&'a str> {
        let v = self.get(key, required)?;
        let out = v.as_str();
        if out.is_none() {
            self.bad(key, "a string", v);
        }
        out
    }

    fn vector(&mut self, key: &str, v: &Value) -> Option<Vec<f64>> {
        let out = v
            .as_array()
            .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>());
        if out.is_none() {
            self.bad(key, "an array of numbers", v);
        }
        out
    }

    fn rows(&mut self, key: &'static str) -> Option<Vec<Vec<f64>>> {
        let v = self.get(key, true)?;
        let out = v.as_array().and_then(|a| {
            a.iter()
                .map(|r| r.as_array()?.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
                .collect::<Option<Vec<_>>>()
        });
        if out.is_none() {
            self.bad(key, "an array of arrays of numbers", v);
        }
        out
    }

    fn sites(&mut self) -> Option<SiteSet> {
        let sites = self.get("sites", false);
        let grid = self.get("grid", false);
        match (sites, grid) {
            (Some(_), Some(_)) => {
                self.errors
                    .push("sites: give either `sites` or `grid`, not both".into());
                None
            }
            (None, None) => {
                self.errors.push("sites: missing required key (or `grid`)".into());
                None
            }
            (Some(v), None) => self.explicit_sites(v),
            (None, Some(v)) => self.grid(v),
        }
    }

    fn explicit_sites(&mut self, v: &Value) -> Option<SiteSet> {
        let coords: Option<Vec<Vec<f64>>> = v.as_array().and_then(|a| {
            a.iter()
                .map(|s| match s {
                    Value::Number(x) => x.as_f64().map(|x| vec![x]),
                    Value::Array(c) => c.iter().map(Value::as_f64).collect(),
                    _ => None,
                })
                .collect()
        });
        let Some(coords) = coords else {
            self.bad("sites", "an array of numbers or of coordinate arrays", v);
            return None;
        };
        match SiteSet::new(coords) {
            Ok(s) => Some(s),
            Err(e) => {
                self.errors.push(format!("sites: {e}"));
                None
            }
        }
    }

    fn grid(&mut self, v: &Value) -> Option<SiteSet> {
        let Some(g) = v.as_object() else {
            self.bad("grid", "an object with origin, step and counts", v);
            return None;
        };
        for k in g.keys() {
            if !matches!(k.as_str(), "origin" | "step" | "counts") {
                self.errors.push(format!("grid.{k}: unknown key"));
            }
        }
        let counts: Option<Vec<usize>> = match g.get("counts") {
            Some(c) => {
                let out = c.as_array().and_then(|a| {
                    a.iter()
                        .map(|x| x.as_u64().and_then(|u| usize::try_from(u).ok()))
                        .collect::<Option<Vec<_>>>()
                });
                if out.is_none() {
                    self.bad("grid.counts", "an array of positive integers", c);
                }
                out
            }
            None => {
                self.errors.push("grid.counts: missing required key".into());
                None
            }
        };
        let step = match g.get("step") {
            Some(s) => {
                let out = s.as_f64();
                if out.is_none() {
                    self.bad("grid.step", "a number", s);
                }
                out
            }
            None => {
                self.errors.push("grid.step: missing required key".into());
                None
            }
        };
        let origin = match g.get("origin") {
            Some(Value::Number(x)) => x.as_f64().map(|x| vec![x; counts.as_ref().map_or(1, Vec::len)]),
            Some(o) => self.vector("grid.origin", o),
            None => {
                self.errors.push("grid.origin: missing required key".into());
                None
            }
        };
        let (origin, step, counts) = (origin?, step?, counts?);
        match SiteSet::grid(&origin, step, &counts) {
            Ok(s) => Some(s),
            Err(e) => {
                self.errors.push(format!("grid: {e}"));
                None
            }
        }
    }
}

fn model_from(f: &mut Fields<'_>) -> Option<ModelSpec> {
    let family = f.str("model", true)?;
    match family {
        "logistic" => {
            let (theta, n) = (f.f64("theta"), f.count("N", true));
            Some(ModelSpec::Logistic(LogisticSpec { theta: theta?, n: n? }))
        }
        "neg_logistic" => {
            let (theta, n) = (f.f64("theta"), f.count("N", true));
            Some(ModelSpec::NegLogistic(NegLogisticSpec { theta: theta?, n: n? }))
        }
        "dirichlet" => {
            let weights = f.get("weights", true).and_then(|v| f.vector("weights", v));
            let alpha = f.rows("alpha");
            Some(ModelSpec::Dirichlet(DirichletSpec {
                weights: weights?,
                alpha: alpha?,
            }))
        }
        "brown_resnick" => {
            let (c, a, sites) = (f.f64("variogram_c"), f.f64("variogram_alpha"), f.sites());
            Some(ModelSpec::BrownResnick {
                spec: BrownResnickSpec {
                    variogram_c: c?,
                    variogram_alpha: a?,
                },
                sites: sites?,
            })
        }
        "extremal_t" => {
            let (alpha, range, smooth) = (f.f64("alpha"), f.f64("corr_range"), f.f64("corr_smoothness"));
            let sites = f.sites();
            Some(ModelSpec::ExtremalT {
                spec: ExtremalTSpec {
                    alpha: alpha?,
                    corr_range: range?,
                    corr_smoothness: smooth?,
                },
                sites: sites?,
            })
        }
        "moving_max" => {
            let rows = f.rows("kernel_cov");
            let sites = f.sites();
            let kernel_cov = match Matrix::from_rows(&rows?) {
                Ok(m) => m,
                Err(e) => {
                    f.errors.push(format!("kernel_cov: {e}"));
                    return None;
                }
            };
            Some(ModelSpec::MovingMax {
                spec: MovingMaxSpec { kernel_cov },
                sites: sites?,
            })
        }
        other => {
            f.errors
                .push(format!("model: unknown family {other:?} (expected one of {FAMILIES})"));
            None
        }
    }
}

/// Parses and fully validates a configuration document. Every problem found
/// is reported, not just the first.
pub fn parse_config(document: &str) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(document).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Some(map) = value.as_object() else {
        return Err(ConfigError::Invalid(vec!["top level: expected a JSON object".into()]));
    };
    let mut f = Fields {
        map,
        seen: BTreeSet::new(),
        errors: Vec::new(),
    };
    let model = model_from(&mut f);
    let algorithm = match f.str("algorithm", false) {
        Some(s) => match s.parse::<Algorithm>() {
            Ok(a) => Some(a),
            Err(e) => {
                f.errors.push(format!("algorithm: {e}"));
                None
            }
        },
        None => Some(Algorithm::Extremal),
    };
    let reps = f.count("reps", false).unwrap_or(DEFAULT_REPS);
    let seed = f.u64("seed").unwrap_or(0);
    let threads = f.count("threads", false).unwrap_or(1);
    let output = f.str("output", false).map(PathBuf::from);
    let h_draws = f.count("h_draws", false).unwrap_or(DEFAULT_H_DRAWS);
    let fold_k = f.count("fold_k", false).unwrap_or(DEFAULT_FOLD_K);
    if fold_k == 1 {
        f.errors.push("fold_k: must be at least 2, got 1".into());
    }
    let negative_control = f.bool("negative_control").unwrap_or(false);

    let unknown: Vec<String> = map
        .keys()
        .filter(|k| !f.seen.contains(k.as_str()))
        .map(|k| format!("{k}: unknown key"))
        .collect();
    f.errors.extend(unknown);

    if let Some(m) = &model {
        f.errors.extend(validate_model(m).iter().map(ToString::to_string));
    }
    match (model, algorithm) {
        (Some(model), Some(algorithm)) if f.errors.is_empty() => Ok(RunConfig {
            model,
            algorithm,
            reps,
            seed,
            threads,
            output,
            h_draws,
            fold_k,
            negative_control,
        }),
        _ => Err(ConfigError::Invalid(f.errors)),
    }
}
