//! Support functions, toric divisors, wall intersection numbers and the
//! polytopes attached to them.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_math::linalg::{rank_rational, solve};
use crate::exact_math::{
    combinations, convex_hull, factorial, kernel_normal, lattice_point_count, mixed_volume, unimodular_lift,
    LatticeVector, Rational, RationalPolytope, RationalVector,
};
use crate::fan::{cone_containing, Fan};
use crate::network::ValidatedNetwork;

/// A function that is linear on every maximal cone of a fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportFunction {
    fan: Arc<Fan>,
    slopes: Vec<RationalVector>,
}

impl SupportFunction {
    /// Checks slope dimensions and continuity across every wall.
    pub fn new(fan: Arc<Fan>, slopes: Vec<RationalVector>) -> Result<Self> {
        if slopes.len() != fan.cones().len() {
            return Err(Error::DimensionMismatch { expected: fan.cones().len(), found: slopes.len() });
        }
        if let Some(m) = slopes.iter().find(|m| m.dim() != fan.dim()) {
            return Err(Error::DimensionMismatch { expected: fan.dim(), found: m.dim() });
        }
        for (w, wall) in fan.walls().iter().enumerate() {
            let diff = slopes[wall.cones[0]].sub(&slopes[wall.cones[1]]);
            if fan.wall_generators(w).iter().any(|g| !diff.pair(g).is_zero()) {
                return Err(Error::ContinuityViolation { wall: w });
            }
        }
        Ok(SupportFunction { fan, slopes })
    }

    pub fn zero(fan: Arc<Fan>) -> Self {
        let slopes = vec![RationalVector::zero(fan.dim()); fan.cones().len()];
        SupportFunction { fan, slopes }
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn shared_fan(&self) -> Arc<Fan> {
        self.fan.clone()
    }

    pub fn slopes(&self) -> &[RationalVector] {
        &self.slopes
    }

    pub fn dim(&self) -> usize {
        self.fan.dim()
    }

    pub fn evaluate(&self, x: &RationalVector) -> Result<Rational> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        let c =
            cone_containing(&self.fan, x).ok_or_else(|| Error::InvalidFan(format!("{x} lies outside the support")))?;
        Ok(self.slopes[c].dot(x))
    }

    fn map(&self, f: impl Fn(&RationalVector) -> RationalVector) -> Self {
        SupportFunction { fan: self.fan.clone(), slopes: self.slopes.iter().map(f).collect() }
    }

    pub fn neg(&self) -> Self {
        self.map(RationalVector::neg)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        self.map(|m| m.scale(k))
    }

    /// Adds the linear function `x -> <g, x>`.
    pub fn add_linear(&self, g: &RationalVector) -> Self {
        self.map(|m| m.add(g))
    }

    /// Sum of two supports on the same fan.
    pub fn add(&self, other: &SupportFunction) -> Result<Self> {
        if self.fan != other.fan {
            return Err(Error::FanMismatch);
        }
        let slopes = self.slopes.iter().zip(&other.slopes).map(|(a, b)| a.add(b)).collect();
        Ok(SupportFunction { fan: self.fan.clone(), slopes })
    }

    /// Least common multiple of all slope denominators.
    pub fn clearing_multiple(&self) -> BigInt {
        self.slopes.iter().fold(BigInt::one(), |l, m| l.lcm(&m.denominator_lcm()))
    }

    /// Re-express the function on another fan on whose cones it is linear,
    /// such as a refinement or the arrangement of its bend hyperplanes.
    pub fn restrict_to(&self, fan: Arc<Fan>) -> Result<Self> {
        if fan.dim() != self.dim() {
            return Err(Error::FanMismatch);
        }
        let mut slopes = Vec::with_capacity(fan.cones().len());
        for c in 0..fan.cones().len() {
            let p = fan.interior_point(c).to_rational();
            let old = cone_containing(&self.fan, &p).ok_or(Error::FanMismatch)?;
            let m = &self.slopes[old];
            for r in fan.cone_rays(c) {
                let r = r.to_rational();
                if self.evaluate(&r)? != m.dot(&r) {
                    return Err(Error::FanMismatch);
                }
            }
            slopes.push(m.clone());
        }
        SupportFunction::new(fan, slopes)
    }
}

/// `sum a_rho D_rho` over the rays of a fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricDivisor {
    fan: Arc<Fan>,
    coefficients: Vec<Rational>,
}

impl ToricDivisor {
    pub fn new(fan: Arc<Fan>, coefficients: Vec<Rational>) -> Result<Self> {
        if coefficients.len() != fan.rays().len() {
            return Err(Error::DimensionMismatch { expected: fan.rays().len(), found: coefficients.len() });
        }
        Ok(ToricDivisor { fan, coefficients })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        ToricDivisor { fan: self.fan.clone(), coefficients: self.coefficients.iter().map(|a| a * k).collect() }
    }

    pub fn add(&self, other: &ToricDivisor) -> Result<Self> {
        if self.fan != other.fan {
            return Err(Error::FanMismatch);
        }
        let coefficients = self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a + b).collect();
        Ok(ToricDivisor { fan: self.fan.clone(), coefficients })
    }
}

/// The torus-invariant curve of a wall, with the data needed to measure a
/// bend across it: `from` and `to` are the incident cones, and `lift` is a
/// lattice point of `to` with `<quotient_normal, lift> = +-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallCurve {
    pub wall: usize,
    pub from: usize,
    pub to: usize,
    pub quotient_normal: LatticeVector,
    pub lift: LatticeVector,
}

/// Wall curve oriented toward the higher-index incident cone.
pub fn wall_curve(fan: &Fan, wall: usize) -> Result<WallCurve> {
    let [a, b] = fan.walls()[wall].cones;
    wall_curve_toward(fan, wall, b).map(|c| WallCurve { from: a, ..c })
}

/// Wall curve whose lift lies in the given incident cone.
pub fn wall_curve_toward(fan: &Fan, wall: usize, to: usize) -> Result<WallCurve> {
    let w = &fan.walls()[wall];
    let from = if w.cones[0] == to { w.cones[1] } else { w.cones[0] };
    let gens = fan.wall_generators(wall);
    let k = kernel_normal(&gens, fan.dim())?;
    let mut u = unimodular_lift(&k)?;
    if k.dot(&fan.interior_point(to)).is_negative() {
        u = u.neg();
    }
    let step = gens.iter().fold(LatticeVector::zero(fan.dim()), |acc, g| acc.add(g));
    let cone = fan.cone(to);
    let mut t = BigInt::zero();
    let lift = loop {
        let cand = u.add(&step.scale(&t));
        if cone.contains(&cand.to_rational()) {
            break cand;
        }
        t = if t.is_zero() { BigInt::one() } else { t * 2 };
    };
    Ok(WallCurve { wall, from, to, quotient_normal: k, lift })
}

pub fn wall_curves(fan: &Fan) -> Result<Vec<WallCurve>> {
    (0..fan.walls().len()).map(|w| wall_curve(fan, w)).collect()
}

/// `<m_from - m_to, lift>`, evaluated after clearing slope denominators.
pub fn intersection_number(s: &SupportFunction, curve: &WallCurve) -> Rational {
    let l = s.clearing_multiple();
    let lq = Rational::from_integer(l.clone());
    let diff = s.slopes[curve.from].sub(&s.slopes[curve.to]).scale(&lq);
    let cleared: BigInt = diff.coords().iter().zip(curve.lift.coords()).map(|(d, u)| d.to_integer() * u).sum();
    Rational::new(cleared, l)
}

/// Intersection number of every wall of the fan, in wall order.
pub fn wall_numbers(s: &SupportFunction) -> Result<Vec<Rational>> {
    Ok(wall_curves(s.fan())?.iter().map(|c| intersection_number(s, c)).collect())
}

pub fn divisor_intersection(d: &ToricDivisor, curve: &WallCurve) -> Result<Rational> {
    Ok(intersection_number(&support_from_divisor(d)?, curve))
}

/// Slopes of the network on every cone, fitted from exact evaluations at
/// interior points.
pub fn extract_support(net: &ValidatedNetwork, fan: Arc<Fan>) -> Result<SupportFunction> {
    if net.input_dim() != fan.dim() {
        return Err(Error::DimensionMismatch { expected: fan.dim(), found: net.input_dim() });
    }
    fit_support(fan, |x| net.evaluate(x))
}

/// Fit one slope per cone of a function known to be linear on each cone,
/// sampling the sum of the rays and that sum plus each ray in turn.
pub fn fit_support(fan: Arc<Fan>, f: impl Fn(&RationalVector) -> Result<Rational>) -> Result<SupportFunction> {
    let n = fan.dim();
    let mut slopes = Vec::with_capacity(fan.cones().len());
    for c in 0..fan.cones().len() {
        let center = fan.interior_point(c);
        let mut samples = vec![center.to_rational()];
        samples.extend(fan.cone_rays(c).iter().map(|r| center.add(r).to_rational()));
        let mut chosen: Vec<RationalVector> = Vec::new();
        for p in samples {
            chosen.push(p);
            if rank_rational(&chosen) < chosen.len() {
                chosen.pop();
            }
            if chosen.len() == n {
                break;
            }
        }
        if chosen.len() < n {
            return Err(Error::SingularSample { cone: c });
        }
        let a: Vec<Vec<Rational>> = chosen.iter().map(|p| p.coords().to_vec()).collect();
        let b: Vec<Rational> = chosen.iter().map(&f).collect::<Result<_>>()?;
        slopes.push(solve(&a, &b).ok_or(Error::SingularSample { cone: c })?);
    }
    SupportFunction::new(fan, slopes)
}

/// `a_rho = -<m_sigma, u_rho>`, checked against every cone containing `rho`.
pub fn divisor_coefficients(s: &SupportFunction) -> Result<ToricDivisor> {
    let fan = s.fan();
    let mut coefficients: Vec<Option<Rational>> = vec![None; fan.rays().len()];
    for (c, cone) in fan.cones().iter().enumerate() {
        for &r in cone.ray_ids() {
            let a = -s.slopes[c].pair(&fan.rays()[r]);
            match &coefficients[r] {
                Some(prev) if *prev != a => return Err(Error::InconsistentRayValue { ray: r }),
                Some(_) => {}
                None => coefficients[r] = Some(a),
            }
        }
    }
    let coefficients = coefficients.into_iter().map(|a| a.unwrap_or_else(Rational::zero)).collect();
    ToricDivisor::new(s.shared_fan(), coefficients)
}

/// Cartier data of a divisor: per cone, the slope with
/// `<m_sigma, u_rho> = -a_rho` on all its rays.
pub fn support_from_divisor(d: &ToricDivisor) -> Result<SupportFunction> {
    let fan = d.fan();
    let mut slopes = Vec::with_capacity(fan.cones().len());
    for (c, cone) in fan.cones().iter().enumerate() {
        let a: Vec<Vec<Rational>> = cone.ray_ids().iter().map(|&r| fan.rays()[r].to_rational().into_coords()).collect();
        let b: Vec<Rational> = cone.ray_ids().iter().map(|&r| -d.coefficients[r].clone()).collect();
        match solve(&a, &b) {
            Some(m) if rank_rational(&a.iter().cloned().map(RationalVector::new).collect::<Vec<_>>()) == fan.dim() => {
                slopes.push(m)
            }
            _ => return Err(Error::NotQCartier { cone: c }),
        }
    }
    SupportFunction::new(d.fan.clone(), slopes)
}

/// Convexity in the divisor convention, where nonnegative wall numbers
/// mean basepoint free and positive ones (with distinct slopes) ample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Convexity {
    pub convex: bool,
    pub strictly_convex: bool,
    pub concave: bool,
    pub strictly_concave: bool,
    /// Slopes are not all integral, so the verdicts are for a multiple.
    pub q_cartier: bool,
}

pub fn classify_convexity(s: &SupportFunction) -> Result<Convexity> {
    let numbers = wall_numbers(s)?;
    let distinct = {
        let mut m = s.slopes.clone();
        m.sort();
        m.dedup();
        m.len() == s.slopes.len()
    };
    Ok(Convexity {
        convex: numbers.iter().all(|x| !x.is_negative()),
        strictly_convex: distinct && numbers.iter().all(Signed::is_positive),
        concave: numbers.iter().all(|x| !x.is_positive()),
        strictly_concave: distinct && numbers.iter().all(Signed::is_negative),
        q_cartier: !s.clearing_multiple().is_one(),
    })
}

/// `P_D = {m : <m, u_rho> >= -a_rho}`.
pub fn polytope_of_divisor(d: &ToricDivisor) -> Result<RationalPolytope> {
    let fan = d.fan();
    let n = fan.dim();
    if let Ok(s) = support_from_divisor(d) {
        if classify_convexity(&s)?.convex {
            return Ok(convex_hull(n, &s.slopes));
        }
    }
    let rays: Vec<RationalVector> = fan.rays().iter().map(LatticeVector::to_rational).collect();
    let feasible = |m: &RationalVector| rays.iter().zip(&d.coefficients).all(|(u, a)| m.dot(u) >= -a.clone());
    let mut vertices = Vec::new();
    for subset in combinations(rays.len(), n) {
        let a: Vec<Vec<Rational>> = subset.iter().map(|&i| rays[i].coords().to_vec()).collect();
        if rank_rational(&subset.iter().map(|&i| rays[i].clone()).collect::<Vec<_>>()) < n {
            continue;
        }
        let b: Vec<Rational> = subset.iter().map(|&i| -d.coefficients[i].clone()).collect();
        if let Some(m) = solve(&a, &b) {
            if feasible(&m) {
                vertices.push(m);
            }
        }
    }
    if vertices.is_empty() {
        return Ok(RationalPolytope::empty(n));
    }
    Ok(convex_hull(n, &vertices))
}

/// Hull of the slopes of a function that is a maximum of linear pieces.
pub fn newton_polytope(s: &SupportFunction) -> Result<RationalPolytope> {
    if wall_numbers(s)?.iter().any(Signed::is_positive) {
        return Err(Error::NotConvexFunction);
    }
    Ok(convex_hull(s.dim(), &s.slopes))
}

/// `n! * #(mP cap Z^n) / m^n` for `m = 1..=m_max`.
pub fn ehrhart_volume_estimate(p: &RationalPolytope, m_max: u64) -> Result<Vec<Rational>> {
    if !p.is_lattice() {
        return Err(Error::NotLatticePolytope);
    }
    let n = p.dim();
    let nf = Rational::from_integer(factorial(n));
    Ok((1..=m_max)
        .map(|m| {
            let count = Rational::from_integer(lattice_point_count(p, m).into());
            let denom = Rational::from_integer(BigInt::from(m).pow(n as u32));
            &nf * count / denom
        })
        .collect())
}

pub fn line_bundle_volume(d: &ToricDivisor) -> Result<Rational> {
    Ok(mixed_volume(&polytope_of_divisor(d)?))
}
