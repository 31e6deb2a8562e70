//! Rational polytopes in V-representation: hulls, facets, volumes and
//! lattice-point counts, all exact.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linalg::{determinant, nullspace, rref};
use super::{combinations, factorial, Rational, RationalVector};

/// A polytope given by its (deduplicated, extreme) vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolytope {
    dim: usize,
    vertices: Vec<RationalVector>,
}

/// `<normal, x> >= offset` (or `=` for equalities).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineConstraint {
    pub normal: RationalVector,
    pub offset: Rational,
}

/// H-representation: the affine hull equations plus facet inequalities
/// relative to that hull.
#[derive(Clone, Debug)]
pub struct HRepresentation {
    pub equalities: Vec<AffineConstraint>,
    pub inequalities: Vec<AffineConstraint>,
}

impl HRepresentation {
    pub fn contains(&self, x: &RationalVector) -> bool {
        self.equalities.iter().all(|c| c.normal.dot(x) == c.offset)
            && self.inequalities.iter().all(|c| c.normal.dot(x) >= c.offset)
    }
}

impl RationalPolytope {
    pub fn empty(dim: usize) -> Self {
        RationalPolytope { dim, vertices: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[RationalVector] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Dimension of the affine hull; `None` for the empty polytope.
    pub fn affine_dim(&self) -> Option<usize> {
        (!self.is_empty()).then(|| AffineFrame::new(&self.vertices).pivots.len())
    }

    pub fn is_lattice(&self) -> bool {
        self.vertices.iter().all(|v| v.coords().iter().all(Rational::is_integer))
    }

    /// The image under `x -> -x`.
    pub fn negate(&self) -> RationalPolytope {
        let mut vertices: Vec<_> = self.vertices.iter().map(RationalVector::neg).collect();
        vertices.sort();
        RationalPolytope { dim: self.dim, vertices }
    }

    pub fn h_representation(&self) -> HRepresentation {
        if self.is_empty() {
            // 0 = 1 has no solutions.
            return HRepresentation {
                equalities: vec![AffineConstraint { normal: RationalVector::zero(self.dim), offset: Rational::one() }],
                inequalities: Vec::new(),
            };
        }
        let frame = AffineFrame::new(&self.vertices);
        let projected: Vec<Vec<Rational>> = self.vertices.iter().map(|v| frame.project(v)).collect();
        let inequalities = projected_facets(&projected, frame.pivots.len())
            .into_iter()
            .map(|f| AffineConstraint { normal: frame.lift_covector(&f.normal, self.dim), offset: f.offset })
            .collect();
        HRepresentation { equalities: frame.equalities.clone(), inequalities }
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        self.h_representation().contains(x)
    }
}

/// Affine hull of a point set: an origin, the coordinate indices on which
/// projection is injective, and the defining equations.
struct AffineFrame {
    pivots: Vec<usize>,
    equalities: Vec<AffineConstraint>,
}

impl AffineFrame {
    fn new(points: &[RationalVector]) -> Self {
        let origin = &points[0];
        let n = origin.dim();
        let diffs: Vec<Vec<Rational>> = points[1..].iter().map(|p| p.sub(origin).into_coords()).collect();
        let mut reduced = diffs.clone();
        let pivots = if reduced.is_empty() { Vec::new() } else { rref(&mut reduced) };
        let equalities = nullspace(&diffs, n)
            .into_iter()
            .map(|c| {
                let offset = c.dot(origin);
                AffineConstraint { normal: c, offset }
            })
            .collect();
        AffineFrame { pivots, equalities }
    }

    fn project(&self, p: &RationalVector) -> Vec<Rational> {
        self.pivots.iter().map(|&i| p.coords()[i].clone()).collect()
    }

    fn lift_covector(&self, c: &[Rational], n: usize) -> RationalVector {
        let mut full = vec![Rational::zero(); n];
        for (&i, x) in self.pivots.iter().zip(c) {
            full[i] = x.clone();
        }
        RationalVector::new(full)
    }
}

struct Facet {
    normal: Vec<Rational>,
    offset: Rational,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Facets of the hull of `points`, which are assumed to affinely span `Q^r`.
/// Brute force over `r`-subsets; facet normals are scaled to primitive
/// integer vectors so that duplicates compare equal.
fn projected_facets(points: &[Vec<Rational>], r: usize) -> Vec<Facet> {
    match r {
        0 => return Vec::new(),
        1 => {
            let min = points.iter().map(|p| &p[0]).min().unwrap().clone();
            let max = points.iter().map(|p| &p[0]).max().unwrap().clone();
            return vec![
                Facet { normal: vec![Rational::one()], offset: min },
                Facet { normal: vec![-Rational::one()], offset: -max },
            ];
        }
        _ => {}
    }
    let mut facets: Vec<Facet> = Vec::new();
    for subset in combinations(points.len(), r) {
        let base = &points[subset[0]];
        let diffs: Vec<Vec<Rational>> =
            subset[1..].iter().map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
        let kernel = nullspace(&diffs, r);
        if kernel.len() != 1 {
            continue;
        }
        let (c, _) = kernel[0].clear_denominators();
        let content = c.content();
        let mut normal: Vec<Rational> = c.coords().iter().map(|x| Rational::from_integer(x / &content)).collect();
        let mut offset = dot(&normal, base);
        let (mut above, mut below) = (false, false);
        for p in points {
            match dot(&normal, p).cmp(&offset) {
                Ordering::Greater => above = true,
                Ordering::Less => below = true,
                Ordering::Equal => {}
            }
        }
        if above && below {
            continue;
        }
        if below {
            normal = normal.iter().map(|x| -x).collect();
            offset = -offset;
        }
        if !facets.iter().any(|f| f.normal == normal && f.offset == offset) {
            facets.push(Facet { normal, offset });
        }
    }
    facets
}

fn cross(o: &[Rational], a: &[Rational], b: &[Rational]) -> Rational {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

fn dist2(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Gift wrapping on points spanning the plane; returns hull vertex indices
/// in counterclockwise order.
fn gift_wrap(points: &[Vec<Rational>]) -> Vec<usize> {
    let start = (0..points.len()).min_by(|&a, &b| points[a].cmp(&points[b])).unwrap();
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut candidate = if current == 0 { 1 } else { 0 };
        for p in 0..points.len() {
            if p == current || p == candidate {
                continue;
            }
            let turn = cross(&points[current], &points[candidate], &points[p]);
            if turn.is_negative()
                || (turn.is_zero() && dist2(&points[current], &points[p]) > dist2(&points[current], &points[candidate]))
            {
                candidate = p;
            }
        }
        if candidate == start {
            break;
        }
        hull.push(candidate);
        current = candidate;
    }
    hull
}

/// Vertex set of the convex hull of a point set.
pub fn convex_hull(dim: usize, points: &[RationalVector]) -> RationalPolytope {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 1 {
        return RationalPolytope { dim, vertices: pts };
    }
    let frame = AffineFrame::new(&pts);
    let projected: Vec<Vec<Rational>> = pts.iter().map(|p| frame.project(p)).collect();
    let r = frame.pivots.len();
    let keep: Vec<usize> = match r {
        0 => vec![0],
        1 => {
            let lo = (0..pts.len()).min_by(|&a, &b| projected[a].cmp(&projected[b])).unwrap();
            let hi = (0..pts.len()).max_by(|&a, &b| projected[a].cmp(&projected[b])).unwrap();
            vec![lo, hi]
        }
        2 => gift_wrap(&projected),
        _ => {
            let facets = projected_facets(&projected, r);
            (0..pts.len())
                .filter(|&i| {
                    let tight: Vec<RationalVector> = facets
                        .iter()
                        .filter(|f| dot(&f.normal, &projected[i]) == f.offset)
                        .map(|f| RationalVector::new(f.normal.clone()))
                        .collect();
                    super::linalg::rank_rational(&tight) == r
                })
                .collect()
        }
    };
    let mut vertices: Vec<RationalVector> = keep.into_iter().map(|i| pts[i].clone()).collect();
    vertices.sort();
    RationalPolytope { dim, vertices }
}

/// Index sets of the vertices lying on each facet, relative to the affine hull.
fn facet_vertex_sets(points: &[RationalVector]) -> Vec<Vec<usize>> {
    let frame = AffineFrame::new(points);
    let projected: Vec<Vec<Rational>> = points.iter().map(|p| frame.project(p)).collect();
    projected_facets(&projected, frame.pivots.len())
        .iter()
        .map(|f| (0..points.len()).filter(|&i| dot(&f.normal, &projected[i]) == f.offset).collect())
        .collect()
}

/// Pulling triangulation from the first vertex, recursively over facets.
fn triangulate(points: &[RationalVector]) -> Vec<Vec<RationalVector>> {
    if points.len() == 1 {
        return vec![vec![points[0].clone()]];
    }
    let apex = &points[0];
    let mut simplices = Vec::new();
    for facet in facet_vertex_sets(points) {
        if facet.contains(&0) {
            continue;
        }
        let sub: Vec<RationalVector> = facet.iter().map(|&i| points[i].clone()).collect();
        for mut s in triangulate(&sub) {
            s.push(apex.clone());
            simplices.push(s);
        }
    }
    simplices
}

/// `n!` times the Euclidean volume, computed as a sum of simplex determinants.
fn normalized_volume(p: &RationalPolytope) -> Rational {
    if p.affine_dim() != Some(p.dim) || p.dim == 0 {
        return Rational::zero();
    }
    triangulate(&p.vertices)
        .iter()
        .map(|s| {
            let base = &s[0];
            let rows: Vec<Vec<Rational>> = s[1..].iter().map(|v| v.sub(base).into_coords()).collect();
            determinant(&rows).abs()
        })
        .sum()
}

/// Exact volume in the ambient dimension; lower-dimensional polytopes have
/// volume zero.
pub fn euclidean_volume(p: &RationalPolytope) -> Rational {
    normalized_volume(p) / Rational::from_integer(factorial(p.dim))
}

/// `n!` times the Euclidean volume.
pub fn mixed_volume(p: &RationalPolytope) -> Rational {
    normalized_volume(p)
}

/// Number of integer points in the dilate `m * P`, by a bounding-box scan.
pub fn lattice_point_count(p: &RationalPolytope, m: u64) -> u64 {
    if p.is_empty() {
        return 0;
    }
    let scale = Rational::from_integer(BigInt::from(m));
    let hrep = p.h_representation();
    let n = p.dim;
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for axis in 0..n {
        let coords = p.vertices.iter().map(|v| &v.coords()[axis] * &scale);
        let (min, max) = coords.fold((None::<Rational>, None::<Rational>), |(lo, hi), c| {
            let lo = Some(lo.map_or(c.clone(), |l| l.min(c.clone())));
            let hi = Some(hi.map_or(c.clone(), |h| h.max(c)));
            (lo, hi)
        });
        lo.push(min.unwrap().ceil().to_integer().to_i64().expect("bounding box fits in i64"));
        hi.push(max.unwrap().floor().to_integer().to_i64().expect("bounding box fits in i64"));
    }
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return 0;
    }
    let inv = Rational::one() / scale;
    let mut point = lo.clone();
    let mut count = 0u64;
    loop {
        let x = RationalVector::new(point.iter().map(|&c| Rational::from_integer(c.into()) * &inv).collect());
        if hrep.contains(&x) {
            count += 1;
        }
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == n {
                return count;
            }
            if point[axis] < hi[axis] {
                point[axis] += 1;
                break;
            }
            point[axis] = lo[axis];
            axis += 1;
        }
    }
}
