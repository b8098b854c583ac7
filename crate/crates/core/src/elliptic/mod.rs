//! Elliptic curves `y^2 = x^3 + a2 x^2 + a4 x + a6` over the rationals:
//! exact group law, Neron-Tate heights, Velu 2-isogenies and the desk-scale
//! harnesses for height scaling under endomorphisms and isogenies.
//!
//! Canonical heights are normalized relative to the divisor `(O)`:
//! `h(P) = 1/2 lim 4^-n h(x([2^n] P))`, so `h([n] P) = n^2 h(P)`.

mod height;
mod isogeny;
mod verify;

pub use height::{
    canonical_height, canonical_height_x, doubling_limit_height, local_height, HeightMethod, HeightValue,
    DEFAULT_TOL, MAX_DOUBLINGS,
};
pub use isogeny::{velu_2isogeny, velu_2isogeny_at, TwoIsogeny};
pub use verify::{
    height_corpus, non_ample_search, product_height, verify_endo_scaling, verify_endo_scaling_pairs,
    verify_isogeny_identity, verify_isogeny_identity_x, CorpusEntry, EndoScalingReport, IdentityEntry,
    IsogenyIdentityReport, NonAmpleWitness, PairRatio,
};

use std::fmt;

use rug::{Integer, Rational};

use crate::num::poly::rational_sqrt;
use crate::num::RatPoly;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EllipticError {
    #[error("curve is singular")]
    Singular,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("tolerance {tol:e} not reached (best certified error {achieved:e})")]
    ToleranceUnreachable { tol: f64, achieved: f64 },
    #[error("curve has no rational 2-torsion point")]
    NoRationalTwoTorsion,
    #[error("point is not a rational 2-torsion point")]
    NotTwoTorsion,
    #[error("divisor coefficients must be positive")]
    NonAmpleDivisor,
    #[error("a torsion point was supplied where a non-torsion point is required")]
    TorsionPoint,
    #[error("height ratio outside the spectral window: {0}")]
    ScalingViolation(String),
    #[error("isogeny height identity violated: {0}")]
    IdentityViolation(String),
}

/// Rational point, or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ECPoint {
    Infinity,
    Affine { x: Rational, y: Rational },
}

impl ECPoint {
    pub fn affine(x: Rational, y: Rational) -> Self {
        ECPoint::Affine { x, y }
    }

    pub fn from_i64(x: i64, y: i64) -> Self {
        ECPoint::Affine { x: Rational::from(x), y: Rational::from(y) }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ECPoint::Infinity)
    }

    pub fn x(&self) -> Option<&Rational> {
        match self {
            ECPoint::Infinity => None,
            ECPoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&Rational> {
        match self {
            ECPoint::Infinity => None,
            ECPoint::Affine { y, .. } => Some(y),
        }
    }

    /// Naive height `max(|num x|, |den x|)`; 1 for `O`.
    pub fn naive_height(&self) -> Integer {
        match self {
            ECPoint::Infinity => Integer::from(1),
            ECPoint::Affine { x, .. } => Integer::from(x.numer().abs_ref()).max(x.denom().clone()),
        }
    }
}

impl fmt::Display for ECPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ECPoint::Infinity => write!(f, "O"),
            ECPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// `y^2 = x^3 + a2 x^2 + a4 x + a6` with nonzero discriminant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticCurve {
    a2: Rational,
    a4: Rational,
    a6: Rational,
}

impl EllipticCurve {
    pub fn new(a2: Rational, a4: Rational, a6: Rational) -> Result<Self, EllipticError> {
        let e = EllipticCurve { a2, a4, a6 };
        if e.discriminant() == 0 {
            return Err(EllipticError::Singular);
        }
        Ok(e)
    }

    /// Short Weierstrass form `y^2 = x^3 + a x + b`.
    pub fn short(a: Rational, b: Rational) -> Result<Self, EllipticError> {
        Self::new(Rational::new(), a, b)
    }

    pub fn from_i64(a2: i64, a4: i64, a6: i64) -> Result<Self, EllipticError> {
        Self::new(Rational::from(a2), Rational::from(a4), Rational::from(a6))
    }

    pub fn a2(&self) -> &Rational {
        &self.a2
    }

    pub fn a4(&self) -> &Rational {
        &self.a4
    }

    pub fn a6(&self) -> &Rational {
        &self.a6
    }

    /// `16 disc(x^3 + a2 x^2 + a4 x + a6)`.
    pub fn discriminant(&self) -> Rational {
        let (a2, a4, a6) = (&self.a2, &self.a4, &self.a6);
        let t1 = Rational::from(a2 * a2) * Rational::from(a4 * a4);
        let t2 = Rational::from(a4 * a4) * a4 * 4u32;
        let t3 = Rational::from(a2 * a2) * a2 * a6 * 4u32;
        let t4 = Rational::from(a2 * a4) * a6 * 18u32;
        let t5 = Rational::from(a6 * a6) * 27u32;
        (t1 - t2 - t3 + t4 - t5) * 16u32
    }

    /// Right-hand side `x^3 + a2 x^2 + a4 x + a6`.
    pub fn rhs(&self, x: &Rational) -> Rational {
        let mut v = Rational::from(x + &self.a2);
        v *= x;
        v += &self.a4;
        v *= x;
        v + &self.a6
    }

    pub fn cubic(&self) -> RatPoly {
        RatPoly::new(vec![self.a6.clone(), self.a4.clone(), self.a2.clone(), Rational::from(1)])
    }

    pub fn contains(&self, p: &ECPoint) -> bool {
        match p {
            ECPoint::Infinity => true,
            ECPoint::Affine { x, y } => Rational::from(y * y) == self.rhs(x),
        }
    }

    pub fn point(&self, x: Rational, y: Rational) -> Result<ECPoint, EllipticError> {
        let p = ECPoint::Affine { x, y };
        if self.contains(&p) { Ok(p) } else { Err(EllipticError::NotOnCurve) }
    }

    /// Points with the given `x`, if `rhs(x)` is a rational square.
    pub fn lift_x(&self, x: &Rational) -> Option<(ECPoint, ECPoint)> {
        let y = rational_sqrt(&self.rhs(x))?;
        let p = ECPoint::Affine { x: x.clone(), y: y.clone() };
        let q = ECPoint::Affine { x: x.clone(), y: -y };
        Some((p, q))
    }

    pub fn neg(&self, p: &ECPoint) -> ECPoint {
        match p {
            ECPoint::Infinity => ECPoint::Infinity,
            ECPoint::Affine { x, y } => ECPoint::Affine { x: x.clone(), y: Rational::from(-y) },
        }
    }

    pub fn add(&self, p: &ECPoint, q: &ECPoint) -> ECPoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (ECPoint::Infinity, _) => return q.clone(),
            (_, ECPoint::Infinity) => return p.clone(),
            (ECPoint::Affine { x: x1, y: y1 }, ECPoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if Rational::from(y1 + y2) == 0 {
                return ECPoint::Infinity;
            }
            let num = Rational::from(x1 * x1) * 3u32 + Rational::from(&self.a2 * x1) * 2u32 + &self.a4;
            num / Rational::from(y1 * 2u32)
        } else {
            Rational::from(y2 - y1) / Rational::from(x2 - x1)
        };
        let x3 = Rational::from(&lambda * &lambda) - &self.a2 - x1 - x2;
        let y3 = lambda * Rational::from(x1 - &x3) - y1;
        ECPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &ECPoint) -> ECPoint {
        self.add(p, p)
    }

    pub fn sub(&self, p: &ECPoint, q: &ECPoint) -> ECPoint {
        self.add(p, &self.neg(q))
    }

    /// `[n] P` by a binary chain.
    pub fn mul(&self, p: &ECPoint, n: i64) -> ECPoint {
        let mut base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = ECPoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// Order of `p` when it is at most 12, which covers all rational torsion.
    pub fn torsion_order(&self, p: &ECPoint) -> Option<u32> {
        let mut q = p.clone();
        for k in 1..=12 {
            if q.is_infinity() {
                return Some(k);
            }
            q = self.add(&q, p);
        }
        None
    }

    pub fn is_torsion(&self, p: &ECPoint) -> bool {
        p.is_infinity() || self.torsion_order(p).is_some()
    }

    /// Affine points with `x = n / d^2`, `|n| <= bound`, `d^2 <= bound`, i.e.
    /// naive height at most `bound` (for integral curves). Sorted by naive
    /// height, then `x`, then `y`.
    pub fn small_points(&self, bound: u32) -> Vec<ECPoint> {
        let mut out = Vec::new();
        let b = bound as i64;
        let mut d = 1i64;
        while d * d <= b {
            for n in -b..=b {
                if d > 1 && Integer::from(n).gcd(&Integer::from(d)) != 1 {
                    continue;
                }
                let x = Rational::from((n, d * d));
                if let Some((p, q)) = self.lift_x(&x) {
                    if p == q {
                        out.push(p);
                    } else {
                        out.push(p);
                        out.push(q);
                    }
                }
            }
            d += 1;
        }
        out.sort_by(|p, q| {
            p.naive_height()
                .cmp(&q.naive_height())
                .then_with(|| p.x().cmp(&q.x()))
                .then_with(|| p.y().cmp(&q.y()))
        });
        out
    }
}

impl fmt::Display for EllipticCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = {}", self.cubic())
    }
}
