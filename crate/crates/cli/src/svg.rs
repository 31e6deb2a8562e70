//! SVG pictures of planar fans.

use std::fmt::Write;

use num_traits::ToPrimitive;

use toric_relu::divisor::SupportFunction;
use toric_relu::exact_math::LatticeVector;
use toric_relu::fan::{Fan, WallProvenance};
use toric_relu::Error;

const RADIUS: f64 = 100.0;
const LABEL_RADIUS: f64 = 62.0;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Style {
    Hyperplane,
    Bent,
    Synthetic,
}

impl Style {
    fn attrs(self) -> &'static str {
        match self {
            Style::Hyperplane => r##"class="wall hyperplane" stroke="#1f1f1f" stroke-width="1.5""##,
            Style::Bent => r##"class="wall bent" stroke="#d62728" stroke-width="2""##,
            Style::Synthetic => r##"class="wall synthetic" stroke="#999999" stroke-width="1" stroke-dasharray="4 3""##,
        }
    }
}

fn ray_style(fan: &Fan, ray: usize) -> Style {
    let wall = fan.walls().iter().enumerate().find(|(_, w)| w.rays == [ray]);
    match wall {
        Some((w, _)) if fan.is_synthetic_wall(w) => Style::Synthetic,
        Some((_, w)) if matches!(w.provenance, WallProvenance::Bent(_)) => Style::Bent,
        _ => Style::Hyperplane,
    }
}

/// Point at distance `r` from the origin along `v`, with the y axis flipped
/// for screen coordinates.
fn toward(v: &LatticeVector, r: f64) -> (f64, f64) {
    let x = v.coords()[0].to_f64().unwrap_or(0.0);
    let y = v.coords()[1].to_f64().unwrap_or(0.0);
    let len = x.hypot(y);
    (r * x / len, -r * y / len)
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    // "-0.000" and "0.000" both print as 0
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".into()
    } else {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// One segment per ray, styled by the provenance of its wall, and the
/// slope of each cone written inside it when a support function is given.
pub fn render_fan_svg(fan: &Fan, s: Option<&SupportFunction>) -> Result<String, Error> {
    if fan.dim() != 2 {
        return Err(Error::UnsupportedDimension(fan.dim()));
    }
    let mut out = String::new();
    let side = 2.0 * (RADIUS + 20.0);
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{w}" viewBox="{o} {o} {w} {w}">"#,
        w = num(side),
        o = num(-side / 2.0),
    );
    let _ = writeln!(
        out,
        r##"<rect x="{o}" y="{o}" width="{w}" height="{w}" fill="#ffffff"/>"##,
        w = num(side),
        o = num(-side / 2.0)
    );
    for (i, ray) in fan.rays().iter().enumerate() {
        let (x, y) = toward(ray, RADIUS);
        let _ = writeln!(
            out,
            r#"<line x1="0" y1="0" x2="{}" y2="{}" {} data-ray="{i}"/>"#,
            num(x),
            num(y),
            ray_style(fan, i).attrs()
        );
    }
    if let Some(s) = s {
        for (c, m) in s.slopes().iter().enumerate() {
            let (x, y) = toward(&fan.interior_point(c), LABEL_RADIUS);
            let label: Vec<String> = m.coords().iter().map(|a| a.to_string()).collect();
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-family="monospace" font-size="8" text-anchor="middle" dominant-baseline="middle" data-cone="{c}">({})</text>"#,
                num(x),
                num(y),
                label.join(", ")
            );
        }
    }
    let _ = writeln!(out, r##"<circle cx="0" cy="0" r="2" fill="#1f1f1f"/>"##);
    out.push_str("</svg>\n");
    Ok(out)
}
