//! Exact rational and lattice arithmetic.

mod lattice;
pub mod linalg;
mod polytope;
mod vector;

use num_bigint::BigInt;

pub use lattice::{kernel_normal, normalize_primitive, primitive_of_rational, unimodular_lift};
pub use polytope::{
    convex_hull, euclidean_volume, lattice_point_count, mixed_volume, AffineConstraint, HRepresentation,
    RationalPolytope,
};
pub use vector::{LatticeVector, RationalVector};

/// Arbitrary-precision rational in canonical form.
pub type Rational = num_rational::BigRational;

/// `n / d` as a [`Rational`].
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}
