//! Command line front end: job documents in, JSON or text reports out.

pub mod io;
pub mod svg;

use std::sync::Arc;

use clap::{Subcommand, ValueEnum};
use serde_json::{json, Value};

use toric_relu::divisor::{
    classify_convexity, divisor_coefficients, ehrhart_volume_estimate, line_bundle_volume, newton_polytope,
    polytope_of_divisor, wall_numbers,
};
use toric_relu::exact_math::{euclidean_volume, mixed_volume, Rational};
use toric_relu::fan::build_relu_fan;
use toric_relu::network::{affine_shift, check_reduced, reduce_shallow, AffineFunctional};
use toric_relu::realizability::realize;

use crate::io::{
    fan_json, lattice_json, network_json, parse_point, parse_rational, polytope_json, provenance_json, rat_json,
    rats_json, to_text, vector_json, Document, Loaded,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] toric_relu::Error),
    #[error("invalid document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Evaluate at the document's `points` and at every `--at`.
    Eval {
        #[arg(long = "at", value_name = "X1,X2,...", allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// The fan: ReLU fan for networks, compiled fan for functions.
    Fan {
        #[arg(long, value_name = "PATH")]
        svg: Option<String>,
    },
    /// Slopes, divisor coefficients and clearing multiple.
    Divisor,
    /// Intersection number of every wall curve.
    Intersect,
    /// Convexity verdicts from the signs of the wall numbers.
    Classify,
    /// Polytope of the divisor.
    Polytope {
        /// Use the negated divisor.
        #[arg(long)]
        negate: bool,
    },
    /// Newton polytope of a function that is a maximum of linear pieces.
    Newton,
    /// Volumes of the divisor polytope and its lattice point estimates.
    Volume {
        #[arg(long)]
        negate: bool,
        #[arg(long = "m-max", value_name = "N")]
        m_max: Option<u64>,
    },
    /// Reduced form of a shallow network.
    Reduce,
    /// Network of the same depth computing `f + <slope, x> + constant`.
    Shift {
        #[arg(long, value_name = "A1,A2,...", allow_hyphen_values = true)]
        slope: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        constant: String,
    },
    /// Shallow realizability check, with a synthesized network on success.
    Realize {
        /// Exit with status 3 when the criterion fails.
        #[arg(long)]
        expect_realizable: bool,
    },
    /// SVG picture of a planar fan.
    Render {
        #[arg(long, value_name = "PATH")]
        svg: Option<String>,
        /// Write the slope of each cone inside it.
        #[arg(long)]
        labels: bool,
    },
}

/// What one job produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// Report for stdout or `--output`.
    pub report: String,
    /// Picture for `--svg`, when one was asked for.
    pub svg: Option<String>,
    pub exit_code: i32,
}

fn report(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Text => to_text(value),
    }
}

fn ok(value: Value, format: Format) -> Outcome {
    Outcome { report: report(&value, format), svg: None, exit_code: 0 }
}

pub fn run_job(command: &Command, format: Format, input: &str) -> Result<Outcome, CliError> {
    let doc = Document::parse(input)?;
    let loaded = doc.load()?;
    match command {
        Command::Eval { at } => {
            let mut points = doc.points()?;
            for p in at {
                points.push(parse_point(p)?);
            }
            let n = loaded.input_dim();
            if let Some(p) = points.iter().find(|p| p.dim() != n) {
                return Err(toric_relu::Error::DimensionMismatch { expected: n, found: p.dim() }.into());
            }
            let values = points
                .iter()
                .map(|p| match &loaded {
                    Loaded::Network(net) => net.evaluate(p),
                    Loaded::Function(s) => s.evaluate(p),
                })
                .collect::<Result<Vec<Rational>, _>>()?;
            let rows: Vec<Value> =
                points.iter().zip(&values).map(|(p, v)| json!({ "x": vector_json(p), "value": rat_json(v) })).collect();
            Ok(ok(json!({ "points": rows }), format))
        }
        Command::Fan { svg } => {
            let (fan, s) = match &loaded {
                Loaded::Network(net) => (Arc::new(build_relu_fan(net)?), None),
                Loaded::Function(s) => (s.shared_fan(), Some(s)),
            };
            let picture = svg.as_ref().map(|_| svg::render_fan_svg(&fan, s)).transpose()?;
            Ok(Outcome { svg: picture, ..ok(fan_json(&fan), format) })
        }
        Command::Divisor => {
            let s = loaded.support()?;
            let d = divisor_coefficients(&s)?;
            Ok(ok(
                json!({
                    "slopes": s.slopes().iter().map(vector_json).collect::<Vec<_>>(),
                    "coefficients": rats_json(d.coefficients()),
                    "clearing_multiple": s.clearing_multiple().to_string(),
                }),
                format,
            ))
        }
        Command::Intersect => {
            let s = loaded.support()?;
            let fan = s.fan();
            let walls: Vec<Value> = wall_numbers(&s)?
                .iter()
                .enumerate()
                .map(|(w, number)| {
                    let wall = &fan.walls()[w];
                    json!({
                        "wall": w,
                        "cones": wall.cones,
                        "normal": lattice_json(&wall.normal),
                        "provenance": provenance_json(fan, w),
                        "number": rat_json(number),
                    })
                })
                .collect();
            Ok(ok(json!({ "walls": walls }), format))
        }
        Command::Classify => {
            let s = loaded.support()?;
            let c = classify_convexity(&s)?;
            Ok(ok(
                json!({
                    "basepoint_free": c.convex,
                    "ample": c.strictly_convex,
                    "concave": c.concave,
                    "strictly_concave": c.strictly_concave,
                    "rational_slopes": c.q_cartier,
                }),
                format,
            ))
        }
        Command::Polytope { negate } => {
            let d = divisor_coefficients(&loaded.support()?)?;
            let d = if *negate { d.neg() } else { d };
            Ok(ok(polytope_json(&polytope_of_divisor(&d)?), format))
        }
        Command::Newton => Ok(ok(polytope_json(&newton_polytope(&loaded.support()?)?), format)),
        Command::Volume { negate, m_max } => {
            let d = divisor_coefficients(&loaded.support()?)?;
            let d = if *negate { d.neg() } else { d };
            let p = polytope_of_divisor(&d)?;
            let estimates = match m_max {
                Some(m) => ehrhart_volume_estimate(&p, *m)?
                    .iter()
                    .enumerate()
                    .map(|(i, e)| json!({ "m": i + 1, "estimate": rat_json(e) }))
                    .collect(),
                None => Vec::new(),
            };
            Ok(ok(
                json!({
                    "polytope": polytope_json(&p),
                    "euclidean_volume": rat_json(&euclidean_volume(&p)),
                    "mixed_volume": rat_json(&mixed_volume(&p)),
                    "line_bundle_volume": rat_json(&line_bundle_volume(&d)?),
                    "ehrhart_estimates": estimates,
                }),
                format,
            ))
        }
        Command::Reduce => {
            let red = reduce_shallow(loaded.network()?)?;
            let c = check_reduced(&red);
            let mut v = network_json(red.spec());
            v["reduced"] = json!({
                "no_zero_rows": c.no_zero_rows,
                "integral": c.integral,
                "primitive_rows": c.primitive_rows,
                "no_positive_parallel": c.no_positive_parallel,
            });
            Ok(ok(v, format))
        }
        Command::Shift { slope, constant } => {
            let g = AffineFunctional { slope: parse_point(slope)?, constant: parse_rational(constant)? };
            let shifted = affine_shift(loaded.network()?, &g)?;
            Ok(ok(network_json(shifted.spec()), format))
        }
        Command::Realize { expect_realizable } => {
            let r = realize(&loaded.support()?)?;
            let groups: Vec<Value> = r
                .groups
                .iter()
                .map(|g| {
                    json!({
                        "normal": lattice_json(&g.normal),
                        "passes": g.passes(),
                        "walls": g.walls.iter().map(|w| json!({ "wall": w.wall, "number": rat_json(&w.number) })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let witness = r.witness.as_ref().map(|w| {
                json!({
                    "normal": lattice_json(&w.normal),
                    "walls": w.walls.iter().map(|x| json!({ "wall": x.wall, "number": rat_json(&x.number) })).collect::<Vec<_>>(),
                })
            });
            let synthesis = r
                .synthesis
                .as_ref()
                .map(|s| json!({ "network": network_json(&s.network), "correction": vector_json(&s.correction) }));
            let v = json!({
                "realizable": r.realizable,
                "fan": fan_json(&r.fan),
                "groups": groups,
                "witness": witness,
                "synthesis": synthesis,
            });
            let exit_code = if *expect_realizable && !r.realizable { 3 } else { 0 };
            Ok(Outcome { exit_code, ..ok(v, format) })
        }
        Command::Render { labels, .. } => {
            let (fan, s) = match &loaded {
                Loaded::Network(net) => {
                    let fan = Arc::new(build_relu_fan(net)?);
                    let s = if *labels { Some(loaded.support()?) } else { None };
                    (fan, s)
                }
                Loaded::Function(s) => (s.shared_fan(), labels.then(|| s.clone())),
            };
            let picture = svg::render_fan_svg(&fan, s.as_ref())?;
            Ok(Outcome { report: picture.clone(), svg: Some(picture), exit_code: 0 })
        }
    }
}
