//! Exact arithmetic on vectors of a rank-two lattice.
//!
//! A [`LatticeVector`] is a pair of coefficients in the ordered basis of one
//! vertex group. Circles of an equitable set and attaching maps of edge
//! cylinders are both stored this way.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("zero vector has no primitive part")]
    ZeroVector,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LatticeVector {
    pub x: BigInt,
    pub y: BigInt,
}

impl LatticeVector {
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        LatticeVector {
            x: x.into(),
            y: y.into(),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// Signed determinant `det[self, other]`.
    pub fn det(&self, other: &LatticeVector) -> BigInt {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn is_parallel(&self, other: &LatticeVector) -> bool {
        self.det(other).is_zero()
    }

    /// gcd of the two coordinates; zero only for the zero vector.
    pub fn content(&self) -> BigUint {
        self.x.gcd(&self.y).magnitude().clone()
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    pub fn scale(&self, k: &BigInt) -> LatticeVector {
        LatticeVector {
            x: &self.x * k,
            y: &self.y * k,
        }
    }

    /// Sign-normalized representative: first nonzero coordinate positive.
    pub fn sign_normalized(&self) -> LatticeVector {
        let negative = match self.x.sign() {
            Sign::Minus => true,
            Sign::Plus => false,
            Sign::NoSign => self.y.is_negative(),
        };
        if negative {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// If `self = k * base` for an integer `k`, returns `k`.
    pub fn multiple_of(&self, base: &LatticeVector) -> Option<BigInt> {
        if base.is_zero() {
            return if self.is_zero() {
                Some(BigInt::zero())
            } else {
                None
            };
        }
        if !self.is_parallel(base) {
            return None;
        }
        let (num, den) = if base.x.is_zero() {
            (&self.y, &base.y)
        } else {
            (&self.x, &base.x)
        };
        let (q, r) = num.div_rem(den);
        r.is_zero().then_some(q)
    }

    /// Both coordinates as `i64`, when they fit.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        Some((self.x.to_i64()?, self.y.to_i64()?))
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(i64, i64)> for LatticeVector {
    fn from((x, y): (i64, i64)) -> Self {
        LatticeVector::new(x, y)
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector {
            x: -self.x,
            y: -self.y,
        }
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector {
            x: &self.x + &rhs.x,
            y: &self.y + &rhs.y,
        }
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector {
            x: &self.x - &rhs.x,
            y: &self.y - &rhs.y,
        }
    }
}

impl Mul<&LatticeVector> for &BigInt {
    type Output = LatticeVector;
    fn mul(self, rhs: &LatticeVector) -> LatticeVector {
        rhs.scale(self)
    }
}

/// Geometric intersection number of the two torus circles with the given
/// classes: `|det[u, v]|`.
pub fn intersection_number(u: &LatticeVector, v: &LatticeVector) -> BigUint {
    u.det(v).magnitude().clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SubgroupIndex {
    Finite(BigUint),
    Infinite,
}

impl SubgroupIndex {
    pub fn is_finite(&self) -> bool {
        matches!(self, SubgroupIndex::Finite(_))
    }
}

impl fmt::Display for SubgroupIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupIndex::Finite(n) => write!(f, "{n}"),
            SubgroupIndex::Infinite => write!(f, "infinite"),
        }
    }
}

/// Invariant factors `d1 | d2 | ...` (nonzero ones only) of the `2 x n`
/// integer matrix whose columns are `vectors`.
///
/// Computed by the usual diagonalization with row and column operations.
pub fn invariant_factors(vectors: &[LatticeVector]) -> Vec<BigInt> {
    let mut rows: [Vec<BigInt>; 2] = [
        vectors.iter().map(|v| v.x.clone()).collect(),
        vectors.iter().map(|v| v.y.clone()).collect(),
    ];
    let ncols = vectors.len();
    let mut factors = Vec::new();

    for pivot in 0..2usize {
        if pivot >= ncols {
            break;
        }
        loop {
            // smallest nonzero entry of the remaining block moves to the pivot
            let mut best: Option<(usize, usize)> = None;
            for (r, row) in rows.iter().enumerate().skip(pivot) {
                for (c, entry) in row.iter().enumerate().skip(pivot) {
                    if entry.is_zero() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((br, bc)) => entry.magnitude() < rows[br][bc].magnitude(),
                    };
                    if better {
                        best = Some((r, c));
                    }
                }
            }
            let Some((br, bc)) = best else {
                return factors;
            };
            rows.swap(pivot, br);
            for row in rows.iter_mut() {
                row.swap(pivot, bc);
            }

            let p = rows[pivot][pivot].clone();
            let mut clean = true;
            for c in pivot + 1..ncols {
                let q = rows[pivot][c].div_floor(&p);
                if !q.is_zero() {
                    for row in rows.iter_mut() {
                        let delta = &q * &row[pivot];
                        row[c] -= delta;
                    }
                }
                if !rows[pivot][c].is_zero() {
                    clean = false;
                }
            }
            for r in pivot + 1..2 {
                let q = rows[r][pivot].div_floor(&p);
                if !q.is_zero() {
                    let prow = rows[pivot].clone();
                    for (x, y) in rows[r].iter_mut().zip(&prow) {
                        *x -= &q * y;
                    }
                }
                if !rows[r][pivot].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: the pivot must divide every remaining entry
            let mut fixed = true;
            'outer: for r in pivot + 1..2 {
                for c in pivot + 1..ncols {
                    if !rows[r][c].is_multiple_of(&p) {
                        let src = rows[r].clone();
                        for (x, v) in rows[pivot].iter_mut().zip(src) {
                            *x += v;
                        }
                        fixed = false;
                        break 'outer;
                    }
                }
            }
            if fixed {
                factors.push(p.abs());
                break;
            }
        }
    }
    factors
}

/// Index of the subgroup of `Z^2` generated by `vectors`.
pub fn subgroup_index(vectors: &[LatticeVector]) -> SubgroupIndex {
    let factors = invariant_factors(vectors);
    if factors.len() < 2 {
        return SubgroupIndex::Infinite;
    }
    let product: BigInt = factors.iter().product();
    SubgroupIndex::Finite(product.magnitude().clone())
}

/// `v / gcd(|x|, |y|)`, sign-normalized so the first nonzero coordinate is
/// positive.
pub fn primitive_part(v: &LatticeVector) -> Result<LatticeVector, LatticeError> {
    if v.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    let g = BigInt::from(v.content());
    let reduced = LatticeVector {
        x: &v.x / &g,
        y: &v.y / &g,
    };
    Ok(reduced.sign_normalized())
}

/// A vector `u` with `det[v, u] = 1`, for primitive `v`.
pub fn unimodular_complement(v: &LatticeVector) -> Option<LatticeVector> {
    // x*b - y*a = 1  <=>  x*b + y*(-a) = 1
    let egcd = v.x.extended_gcd(&v.y);
    if !egcd.gcd.is_one() {
        return None;
    }
    Some(LatticeVector {
        x: -egcd.y,
        y: egcd.x,
    })
}

/// `num / den` as an exact rational.
pub fn ratio(num: &BigUint, den: &BigUint) -> ExactRational {
    ExactRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn rational_abs_is_one(r: &ExactRational) -> bool {
    r.numer().magnitude() == r.denom().magnitude()
}
