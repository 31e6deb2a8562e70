use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linalg::{nullspace, rank_lattice};
use super::{LatticeVector, Rational, RationalVector};
use crate::error::{Error, Result};

/// Split a nonzero integer vector into its primitive direction and the
/// positive scale factor `gcd(|v_i|)`.
pub fn normalize_primitive(v: &LatticeVector) -> Result<(LatticeVector, BigInt)> {
    let g = v.content();
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    let coords = v.coords().iter().map(|c| c / &g).collect();
    Ok((LatticeVector::new(coords), g))
}

/// Primitive integer vector on the ray spanned by a nonzero rational vector.
pub fn primitive_of_rational(v: &RationalVector) -> Result<LatticeVector> {
    let (w, _) = v.clear_denominators();
    normalize_primitive(&w).map(|(p, _)| p)
}

/// Primitive covector vanishing on `n - 1` independent generators in `Z^n`,
/// with its first nonzero coordinate positive.
pub fn kernel_normal(generators: &[LatticeVector], dim: usize) -> Result<LatticeVector> {
    if generators.iter().any(|g| g.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: generators.iter().map(LatticeVector::dim).find(|&d| d != dim).unwrap_or(dim),
        });
    }
    let rank = rank_lattice(generators);
    if rank + 1 != dim {
        return Err(Error::RankDeficient { expected: dim - 1, found: rank });
    }
    let rows: Vec<Vec<Rational>> = generators.iter().map(|g| g.to_rational().into_coords()).collect();
    let kernel = nullspace(&rows, dim);
    debug_assert_eq!(kernel.len(), 1);
    Ok(primitive_of_rational(&kernel[0])?.sign_canonical())
}

/// An integer vector `u` with `<k, u> = 1`, for primitive `k`.
pub fn unimodular_lift(k: &LatticeVector) -> Result<LatticeVector> {
    if !k.is_primitive() {
        return Err(Error::RankDeficient { expected: 1, found: 0 });
    }
    let mut g = BigInt::zero();
    let mut u = vec![BigInt::zero(); k.dim()];
    for (i, c) in k.coords().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = g.extended_gcd(c);
        // e.x * g + e.y * c = e.gcd
        for x in u.iter_mut() {
            *x *= &e.x;
        }
        u[i] = e.y.clone();
        g = e.gcd;
    }
    if g.is_negative() {
        for x in u.iter_mut() {
            *x = -x.clone();
        }
    }
    let u = LatticeVector::new(u);
    debug_assert!(k.dot(&u).is_one());
    Ok(u)
}
