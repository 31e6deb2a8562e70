//! Job documents and their JSON encodings. Rationals travel as `"p/q"`
//! strings (or plain JSON integers) so nothing is ever rounded.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use toric_relu::divisor::SupportFunction;
use toric_relu::exact_math::{LatticeVector, Rational, RationalPolytope, RationalVector};
use toric_relu::expr::compile_str;
use toric_relu::fan::{Fan, WallProvenance};
use toric_relu::network::{validate, NetworkSpec, ValidatedNetwork};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RatIn {
    Int(i64),
    Text(String),
}

impl RatIn {
    pub fn value(&self) -> Result<Rational, CliError> {
        match self {
            RatIn::Int(n) => Ok(Rational::from_integer((*n).into())),
            RatIn::Text(s) => parse_rational(s),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let t = s.trim();
    let ok = !t.is_empty() && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '/'));
    let parsed = if ok { t.parse::<Rational>().ok() } else { None };
    parsed.ok_or_else(|| CliError::Input(format!("`{s}` is not a rational number")))
}

/// Comma separated rationals, as in `--at 1,-2/3`.
pub fn parse_point(s: &str) -> Result<RationalVector, CliError> {
    Ok(RationalVector::new(s.split(',').map(parse_rational).collect::<Result<_, _>>()?))
}

fn rats(v: &[RatIn]) -> Result<Vec<Rational>, CliError> {
    v.iter().map(RatIn::value).collect()
}

#[derive(Clone, Debug, Deserialize)]
pub struct FanDoc {
    pub rays: Vec<Vec<RatIn>>,
    pub cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Body {
    Network {
        architecture: Vec<usize>,
        layers: Vec<Vec<Vec<RatIn>>>,
        #[serde(default)]
        biases: Option<Vec<Vec<RatIn>>>,
    },
    Expression {
        dim: usize,
        expr: String,
    },
    Tabulated {
        dim: usize,
        fan: FanDoc,
        slopes: Vec<Vec<RatIn>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
pub struct Document {
    #[serde(flatten)]
    pub body: Body,
    #[serde(default)]
    pub points: Vec<Vec<RatIn>>,
}

/// A document after validation.
#[derive(Clone, Debug)]
pub enum Loaded {
    Network(ValidatedNetwork),
    Function(SupportFunction),
}

impl Loaded {
    pub fn support(&self) -> Result<SupportFunction, CliError> {
        match self {
            Loaded::Network(net) => {
                let fan = Arc::new(toric_relu::fan::build_relu_fan(net)?);
                Ok(toric_relu::divisor::extract_support(net, fan)?)
            }
            Loaded::Function(s) => Ok(s.clone()),
        }
    }

    pub fn network(&self) -> Result<&ValidatedNetwork, CliError> {
        match self {
            Loaded::Network(net) => Ok(net),
            Loaded::Function(_) => Err(CliError::Input("this command needs a network document".into())),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Loaded::Network(net) => net.input_dim(),
            Loaded::Function(s) => s.dim(),
        }
    }
}

impl Document {
    pub fn parse(text: &str) -> Result<Document, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn points(&self) -> Result<Vec<RationalVector>, CliError> {
        self.points.iter().map(|p| rats(p).map(RationalVector::new)).collect()
    }

    pub fn load(&self) -> Result<Loaded, CliError> {
        match &self.body {
            Body::Network { architecture, layers, biases } => {
                let layers = layers
                    .iter()
                    .map(|m| m.iter().map(|r| rats(r)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                let biases =
                    biases.as_ref().map(|b| b.iter().map(|r| rats(r)).collect::<Result<Vec<_>, _>>()).transpose()?;
                let spec = NetworkSpec { architecture: architecture.clone(), layers, biases };
                Ok(Loaded::Network(validate(spec)?))
            }
            Body::Expression { dim, expr } => Ok(Loaded::Function(compile_str(expr, *dim)?)),
            Body::Tabulated { dim, fan, slopes } => {
                let rays = fan
                    .rays
                    .iter()
                    .map(|r| {
                        RationalVector::new(rats(r)?)
                            .to_lattice()
                            .ok_or_else(|| CliError::Input("fan rays must be integral".into()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let fan = Arc::new(Fan::from_cones(*dim, rays, fan.cones.clone())?);
                let slopes: Vec<RationalVector> =
                    slopes.iter().map(|m| rats(m).map(RationalVector::new)).collect::<Result<_, _>>()?;
                Ok(Loaded::Function(SupportFunction::new(fan, slopes)?))
            }
        }
    }
}

pub fn rat_json(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub fn vector_json(v: &RationalVector) -> Value {
    Value::Array(v.coords().iter().map(rat_json).collect())
}

pub fn lattice_json(v: &LatticeVector) -> Value {
    Value::Array(v.coords().iter().map(|x| Value::String(x.to_string())).collect())
}

pub fn rats_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rat_json).collect())
}

pub fn network_json(spec: &NetworkSpec) -> Value {
    let matrix = |m: &Vec<Vec<Rational>>| Value::Array(m.iter().map(|r| rats_json(r)).collect());
    json!({
        "architecture": spec.architecture,
        "layers": spec.layers.iter().map(matrix).collect::<Vec<_>>(),
        "biases": spec.biases.as_ref().map(matrix),
    })
}

pub fn provenance_json(fan: &Fan, wall: usize) -> Value {
    let w = &fan.walls()[wall];
    match &w.provenance {
        WallProvenance::Hyperplane(h) => {
            let kind = if fan.hyperplanes()[*h].is_synthetic() { "synthetic" } else { "hyperplane" };
            json!({ "kind": kind, "hyperplane": h })
        }
        WallProvenance::Bent(id) => json!({ "kind": "bent", "layer": id.layer, "neuron": id.index }),
        WallProvenance::Unlabeled => json!({ "kind": "unlabeled" }),
    }
}

pub fn fan_json(fan: &Fan) -> Value {
    json!({
        "dim": fan.dim(),
        "rays": fan.rays().iter().map(lattice_json).collect::<Vec<_>>(),
        "cones": fan.cones().iter().map(|c| c.ray_ids().to_vec()).collect::<Vec<_>>(),
        "walls": (0..fan.walls().len()).map(|w| {
            let wall = &fan.walls()[w];
            json!({
                "rays": wall.rays,
                "cones": wall.cones,
                "normal": lattice_json(&wall.normal),
                "provenance": provenance_json(fan, w),
            })
        }).collect::<Vec<_>>(),
        "hyperplanes": fan.hyperplanes().iter().map(|h| json!({
            "normal": lattice_json(&h.normal),
            "synthetic": h.is_synthetic(),
        })).collect::<Vec<_>>(),
        "degenerate_neurons": fan.degenerate_neurons().iter().map(|n| [n.layer, n.index]).collect::<Vec<_>>(),
    })
}

pub fn polytope_json(p: &RationalPolytope) -> Value {
    json!({
        "dim": p.dim(),
        "empty": p.is_empty(),
        "lattice": !p.is_empty() && p.is_lattice(),
        "vertices": p.vertices().iter().map(vector_json).collect::<Vec<_>>(),
    })
}

/// Indented `key: value` lines for the text format.
pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    write_text(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object()) => {
            let parts: Option<Vec<String>> = a.iter().map(scalar).collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        _ => None,
    }
}

fn write_text(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_text(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}- [{i}]\n"));
                        write_text(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
