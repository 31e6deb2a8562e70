//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use toric_relu::exact_math::{int, rat, LatticeVector, Rational, RationalVector};
use toric_relu::fan::Fan;
use toric_relu::network::{validate, NetworkSpec, ValidatedNetwork};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `|p| <= 9`, `1 <= q <= 9`.
pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-9..=9), rng.gen_range(1..=9))
}

pub fn small_point(rng: &mut ChaCha8Rng, dim: usize) -> RationalVector {
    RationalVector::new((0..dim).map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=7))).collect())
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<Rational>> {
    (0..rows).map(|_| (0..cols).map(|_| small_rational(rng)).collect()).collect()
}

/// Unbiased network with the given architecture and random small weights.
pub fn random_network(rng: &mut ChaCha8Rng, arch: &[usize]) -> ValidatedNetwork {
    let layers = arch.windows(2).map(|w| random_matrix(rng, w[1], w[0])).collect();
    validate(NetworkSpec { architecture: arch.to_vec(), layers, biases: None }).unwrap()
}

pub fn shallow(l1: Vec<Vec<Rational>>, l2: Vec<Rational>) -> ValidatedNetwork {
    let n0 = l1[0].len();
    validate(NetworkSpec { architecture: vec![n0, l1.len(), 1], layers: vec![l1, vec![l2]], biases: None }).unwrap()
}

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// Primitive integer vector with entries in `[-9, 9]`.
pub fn random_primitive(rng: &mut ChaCha8Rng, dim: usize) -> LatticeVector {
    loop {
        let v = LatticeVector::from_i64(&(0..dim).map(|_| rng.gen_range(-9..=9)).collect::<Vec<_>>());
        if v.is_primitive() {
            return v;
        }
    }
}

/// Normal of the span of `dim - 1` generators by signed minors, in the
/// plane and in space.
pub fn cross_normal(gens: &[LatticeVector], dim: usize) -> LatticeVector {
    let c = |v: &LatticeVector, i: usize| v.coords()[i].clone();
    let raw = match dim {
        1 => LatticeVector::from_i64(&[1]),
        2 => LatticeVector::new(vec![-c(&gens[0], 1), c(&gens[0], 0)]),
        3 => {
            let (a, b) = (&gens[0], &gens[1]);
            LatticeVector::new(vec![
                c(a, 1) * c(b, 2) - c(a, 2) * c(b, 1),
                c(a, 2) * c(b, 0) - c(a, 0) * c(b, 2),
                c(a, 0) * c(b, 1) - c(a, 1) * c(b, 0),
            ])
        }
        _ => unimplemented!("oracle covers dimensions up to three"),
    };
    let g = raw.content();
    LatticeVector::new(raw.coords().iter().map(|x| x / &g).collect())
}

/// Some `u` with `<k, u> = 1`, by search over a small box.
pub fn search_unit_pairing(k: &LatticeVector) -> LatticeVector {
    let dim = k.dim();
    for radius in 1i64.. {
        let side = 2 * radius + 1;
        let total = (side as usize).pow(dim as u32);
        for idx in 0..total {
            let mut rest = idx;
            let coords: Vec<i64> = (0..dim)
                .map(|_| {
                    let d = (rest % side as usize) as i64 - radius;
                    rest /= side as usize;
                    d
                })
                .collect();
            let u = LatticeVector::from_i64(&coords);
            if k.dot(&u) == BigInt::from(1) {
                return u;
            }
        }
    }
    unreachable!()
}

/// Bend measured by a second difference of `f` across wall `w`, with the
/// step `u` pointing into the higher-index incident cone:
/// `-(f(tw + u) + f(tw - u) - 2 f(tw))` for a point `w` inside the wall.
pub fn second_difference_bend(fan: &Fan, wall: usize, f: &dyn Fn(&RationalVector) -> Rational) -> Rational {
    let dim = fan.dim();
    let gens = fan.wall_generators(wall);
    let k = cross_normal(&gens, dim);
    let to = fan.walls()[wall].cones[1];
    let mut u = search_unit_pairing(&k);
    if k.dot(&fan.interior_point(to)).is_negative() {
        u = u.neg();
    }
    let w = gens.iter().fold(LatticeVector::zero(dim), |acc, g| acc.add(g)).to_rational();
    let u = u.to_rational();
    let t = Rational::from_integer(BigInt::from(10).pow(6));
    let base = w.scale(&t);
    -(f(&base.add(&u)) + f(&base.sub(&u)) - f(&base) * int(2))
}

/// A six-piece function that no shallow network computes, written sector by
/// sector.
pub fn six_piece(p: &RationalVector) -> Rational {
    let (x, y) = (p.coords()[0].clone(), p.coords()[1].clone());
    let zero = Rational::zero();
    if y >= zero && x >= y {
        y * int(3)
    } else if y >= x.abs() {
        x + y * int(2)
    } else if y >= zero {
        y
    } else if y >= x {
        zero
    } else if y <= -x.abs() {
        x * int(2) - y * int(2)
    } else {
        -(y * int(4))
    }
}

pub const SIX_PIECE_EXPR: &str =
    "max(2*x1+3*x2, x1+4*x2, -2*x1+x2, -2*x1, 2*x1-4*x2) - max(x1+x2,-x1-x2) - max(x1-x2,x2-x1)";

/// The introductory network computing `max{0, x, y}`.
pub fn golden_network() -> ValidatedNetwork {
    validate(NetworkSpec::from_layers(vec![
        vec![ints(&[0, 1]), ints(&[0, -1]), ints(&[1, -1])],
        vec![ints(&[1, -1, 1])],
        vec![ints(&[1])],
    ]))
    .unwrap()
}

/// Brute-force vertices of `{m : <m, u_rho> >= -a_rho}`: every feasible
/// solution of `n` tight, independent ray constraints.
pub fn divisor_polytope_oracle(fan: &Fan, coefficients: &[Rational]) -> Vec<RationalVector> {
    use toric_relu::exact_math::combinations;
    use toric_relu::exact_math::linalg::{determinant, solve};
    let n = fan.dim();
    let rays: Vec<RationalVector> = fan.rays().iter().map(LatticeVector::to_rational).collect();
    let mut out = Vec::new();
    for subset in combinations(rays.len(), n) {
        let a: Vec<Vec<Rational>> = subset.iter().map(|&i| rays[i].coords().to_vec()).collect();
        if determinant(&a).is_zero() {
            continue;
        }
        let b: Vec<Rational> = subset.iter().map(|&i| -coefficients[i].clone()).collect();
        let m = solve(&a, &b).unwrap();
        if rays.iter().zip(coefficients).all(|(u, c)| m.dot(u) >= -c.clone()) {
            out.push(m);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Twice the shoelace area of a convex polygon given by its vertices in any
/// order.
pub fn polygon_double_area(vertices: &[RationalVector]) -> Rational {
    if vertices.len() < 3 {
        return Rational::zero();
    }
    let c: Vec<Rational> = (0..2)
        .map(|i| vertices.iter().map(|v| v.coords()[i].clone()).sum::<Rational>() / int(vertices.len() as i64))
        .collect();
    let angle = |v: &RationalVector| {
        let x: f64 = num_traits::ToPrimitive::to_f64(&(&v.coords()[0] - &c[0])).unwrap();
        let y: f64 = num_traits::ToPrimitive::to_f64(&(&v.coords()[1] - &c[1])).unwrap();
        y.atan2(x)
    };
    let mut vs = vertices.to_vec();
    vs.sort_by(|a, b| angle(a).partial_cmp(&angle(b)).unwrap());
    let mut twice = Rational::zero();
    for i in 0..vs.len() {
        let (p, q) = (&vs[i], &vs[(i + 1) % vs.len()]);
        twice += &p.coords()[0] * &q.coords()[1] - &p.coords()[1] * &q.coords()[0];
    }
    twice.abs()
}
