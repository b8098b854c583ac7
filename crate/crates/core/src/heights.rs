//! Weil heights of rationals and low-degree algebraic numbers, matrix
//! heights, the d-height and the Mahler measure.

use std::cmp::Ordering;
use std::fmt;

use rug::{Float, Integer, Rational};

use crate::num::roots::{self, RootConvergenceError};
use crate::num::{Complex, RatMatrix, RatPoly};

/// Highest degree accepted for algebraic numbers.
pub const MAX_DEGREE: usize = 4;

/// Default number of coefficient vectors the d-height search may visit.
pub const DEFAULT_HD_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeightError {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("minimal polynomial must be primitive with positive leading coefficient")]
    NotPrimitive,
    #[error("degree {0} is outside the supported range 2..=4")]
    UnsupportedDegree(usize),
    #[error("polynomial is reducible over the rationals")]
    Reducible,
    #[error("selected root does not satisfy the minimal polynomial (log2 residual {0:.1})")]
    RootResidual(f64),
    #[error("root index {index} out of range for degree {degree}")]
    RootIndex { index: usize, degree: usize },
    #[error(transparent)]
    RootFindingFailure(#[from] RootConvergenceError),
    #[error("d-height search needs {needed} candidates, budget is {budget}")]
    SearchBudgetExceeded { needed: u128, budget: u64 },
    #[error("d must be at least 1")]
    InvalidD,
}

/// A rational number, or an algebraic number of degree 2..=4 given by its
/// primitive integer minimal polynomial and an approximation of the root.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraicScalar {
    Rational(Rational),
    Algebraic { minpoly: Vec<Integer>, root: Complex },
}

/// A height that is exact when the definition allows it.
#[derive(Clone, Debug, PartialEq)]
pub enum HeightValue {
    Exact(Integer),
    Approx(Float),
}

impl HeightValue {
    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            HeightValue::Exact(n) => Float::with_val(prec, n),
            HeightValue::Approx(f) => Float::with_val(prec, f),
        }
    }
}

impl fmt::Display for HeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeightValue::Exact(n) => write!(f, "{n}"),
            HeightValue::Approx(x) => write!(f, "{}", x.to_string_radix(10, Some(30))),
        }
    }
}

/// The d-height, which is infinite above the degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DHeight {
    Finite(Integer),
    Infinite,
}

impl fmt::Display for DHeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DHeight::Finite(n) => write!(f, "{n}"),
            DHeight::Infinite => write!(f, "inf"),
        }
    }
}

impl AlgebraicScalar {
    pub fn rational(q: Rational) -> Self {
        AlgebraicScalar::Rational(q)
    }

    /// Algebraic number from a minimal polynomial and a root approximation.
    /// The residual check is relative to `sum |c_i| |root|^i`.
    pub fn algebraic(minpoly: Vec<Integer>, root: Complex, prec: u32) -> Result<Self, HeightError> {
        check_minpoly(&minpoly)?;
        let p = RatPoly::from_integers(&minpoly);
        let r = root.with_prec(prec);
        let v = p.eval_complex(&r).abs();
        let ra = r.abs();
        let mut scale = Float::new(prec);
        for c in minpoly.iter().rev() {
            scale = scale * &ra + Float::with_val(prec, c).abs();
        }
        let bound = scale.clone() << (10 - prec as i32);
        if v > bound {
            let lr = if v.is_zero() { f64::NEG_INFINITY } else { (v / scale).log2().to_f64() };
            return Err(HeightError::RootResidual(lr));
        }
        Ok(AlgebraicScalar::Algebraic { minpoly, root: r })
    }

    /// Algebraic number selecting the root of `minpoly` closest to `approx`.
    pub fn algebraic_nearest(minpoly: Vec<Integer>, approx: &Complex, prec: u32) -> Result<Self, HeightError> {
        check_minpoly(&minpoly)?;
        let rs = roots::rat_poly_roots(&RatPoly::from_integers(&minpoly), prec + 32)?;
        let best = rs
            .into_iter()
            .min_by(|a, b| {
                let da = (a - &approx.with_prec(prec + 32)).abs();
                let db = (b - &approx.with_prec(prec + 32)).abs();
                da.partial_cmp(&db).unwrap_or(Ordering::Equal)
            })
            .expect("degree at least 2");
        AlgebraicScalar::algebraic(minpoly, best.with_prec(prec), prec)
    }

    /// Algebraic number selecting the `index`-th root in a fixed order
    /// (real roots ascending first, then by real part and imaginary part).
    pub fn algebraic_by_index(minpoly: Vec<Integer>, index: usize, prec: u32) -> Result<Self, HeightError> {
        check_minpoly(&minpoly)?;
        let mut rs = roots::rat_poly_roots(&RatPoly::from_integers(&minpoly), prec + 32)?;
        let degree = rs.len();
        rs.sort_by(|a, b| {
            let ka = (a.re.to_f64(), a.im.to_f64());
            let kb = (b.re.to_f64(), b.im.to_f64());
            ka.partial_cmp(&kb).unwrap_or(Ordering::Equal)
        });
        let r = rs.get(index).ok_or(HeightError::RootIndex { index, degree })?;
        AlgebraicScalar::algebraic(minpoly, r.with_prec(prec), prec)
    }

    pub fn degree(&self) -> usize {
        match self {
            AlgebraicScalar::Rational(_) => 1,
            AlgebraicScalar::Algebraic { minpoly, .. } => minpoly.len() - 1,
        }
    }

    /// Primitive integer minimal polynomial, positive leading coefficient.
    pub fn minpoly(&self) -> Vec<Integer> {
        match self {
            AlgebraicScalar::Rational(q) => vec![Integer::from(-q.numer()), q.denom().clone()],
            AlgebraicScalar::Algebraic { minpoly, .. } => minpoly.clone(),
        }
    }

    pub fn to_complex(&self, prec: u32) -> Complex {
        match self {
            AlgebraicScalar::Rational(q) => Complex::from_rational(prec, q),
            AlgebraicScalar::Algebraic { root, .. } => root.with_prec(prec),
        }
    }
}

fn check_minpoly(c: &[Integer]) -> Result<(), HeightError> {
    let p = RatPoly::from_integers(c);
    if p.is_zero() {
        return Err(HeightError::ZeroPolynomial);
    }
    if p.deg() + 1 != c.len() {
        return Err(HeightError::NotPrimitive);
    }
    let deg = p.deg();
    if !(2..=MAX_DEGREE).contains(&deg) {
        return Err(HeightError::UnsupportedDegree(deg));
    }
    if p.primitive_integer() != c {
        return Err(HeightError::NotPrimitive);
    }
    if !is_irreducible(c)? {
        return Err(HeightError::Reducible);
    }
    Ok(())
}

fn divisors(n: &Integer) -> Vec<Integer> {
    let n = n.clone().abs();
    let mut out = Vec::new();
    let mut k = Integer::from(1);
    while Integer::from(&k * &k) <= n {
        if n.is_divisible(&k) {
            out.push(k.clone());
            let other = Integer::from(&n / &k);
            if other != k {
                out.push(other);
            }
        }
        k += 1;
    }
    out
}

/// Irreducibility over Q for primitive polynomials of degree at most 4.
///
/// Candidate linear and quadratic factors are read off the numerical roots
/// (scaled by divisors of the leading coefficient) and confirmed by exact
/// division, so a reported factor is always genuine; the candidate set is
/// complete because every rational factor arises this way.
pub fn is_irreducible(c: &[Integer]) -> Result<bool, HeightError> {
    let p = RatPoly::from_integers(c);
    let deg = p.deg();
    if deg <= 1 {
        return Ok(deg == 1);
    }
    if deg > MAX_DEGREE {
        return Err(HeightError::UnsupportedDegree(deg));
    }
    let prec = 128;
    let rs = roots::rat_poly_roots(&p, prec)?;
    let lead = c.last().expect("nonempty");
    let ks = divisors(lead);
    let real_tol = 1e-6;
    let round = |x: &Float| -> Option<Integer> { x.to_integer() };
    for r in &rs {
        if r.im.to_f64().abs() > real_tol * (1.0 + r.re.to_f64().abs()) {
            continue;
        }
        for k in &ks {
            let kr = Float::with_val(prec, &r.re * k);
            let Some(num) = round(&kr) else { continue };
            let cand = RatPoly::from_integers(&[(-num), k.clone()]);
            if p.div_exact(&cand).is_some() {
                return Ok(false);
            }
        }
    }
    if deg == 4 {
        for i in 0..rs.len() {
            for j in i + 1..rs.len() {
                let s = &rs[i] + &rs[j];
                let q = &rs[i] * &rs[j];
                if s.im.to_f64().abs() > real_tol * (1.0 + s.re.to_f64().abs())
                    || q.im.to_f64().abs() > real_tol * (1.0 + q.re.to_f64().abs())
                {
                    continue;
                }
                for k in &ks {
                    let (Some(ks_), Some(kq)) = (
                        round(&Float::with_val(prec, &s.re * k)),
                        round(&Float::with_val(prec, &q.re * k)),
                    ) else {
                        continue;
                    };
                    let cand = RatPoly::from_integers(&[kq, (-ks_), k.clone()]);
                    if p.div_exact(&cand).is_some() {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Multiplicative Weil height of a rational: `max(|p|, |q|)` in lowest terms.
pub fn rational_height(q: &Rational) -> Integer {
    let n = Integer::from(q.numer().abs_ref());
    n.max(q.denom().clone())
}

/// Mahler measure of a nonzero integer polynomial.
pub fn mahler_measure(c: &[Integer], prec: u32) -> Result<Float, HeightError> {
    let p = RatPoly::from_integers(c);
    if p.is_zero() {
        return Err(HeightError::ZeroPolynomial);
    }
    Ok(roots::mahler_measure(&p, prec)?)
}

/// Multiplicative Weil height; exact for rationals, `M(minpoly)^(1/d)`
/// otherwise.
pub fn weil_height(a: &AlgebraicScalar, prec: u32) -> Result<HeightValue, HeightError> {
    match a {
        AlgebraicScalar::Rational(q) => Ok(HeightValue::Exact(rational_height(q))),
        AlgebraicScalar::Algebraic { minpoly, .. } => {
            let m = mahler_measure(minpoly, prec + 16)?;
            let d = (minpoly.len() - 1) as u32;
            let h = m.ln() / d;
            Ok(HeightValue::Approx(Float::with_val(prec, h.exp())))
        }
    }
}

/// Affine height: Weil height of the entry tuple as the projective point
/// `(1 : m_11 : ... : m_nn)`.
pub fn h_aff(m: &RatMatrix) -> Integer {
    let mut b = Integer::from(1);
    for x in m.iter() {
        b.lcm_mut(x.denom());
    }
    let cleared: Vec<Integer> = m
        .iter()
        .map(|x| x.numer() * Integer::from(&b / x.denom()))
        .collect();
    let mut g = b.clone();
    for a in &cleared {
        g.gcd_mut(a);
    }
    let mut h = Integer::from(&b / &g);
    for a in &cleared {
        let v = Integer::from(a / &g).abs();
        if v > h {
            h = v;
        }
    }
    h
}

/// Entry-wise height: maximum Weil height over the entries.
pub fn h_max(m: &RatMatrix) -> Integer {
    m.iter().map(rational_height).max().unwrap_or_else(|| Integer::from(1))
}

/// The d-height with the default search budget.
pub fn h_d(a: &AlgebraicScalar, d: usize) -> Result<DHeight, HeightError> {
    h_d_with_budget(a, d, DEFAULT_HD_BUDGET)
}

/// The d-height: smallest max-norm of a primitive integer vector
/// `(a_0, ..., a_d)` with `sum a_i alpha^i = 0`.
///
/// The minimal polynomial gives a candidate; minimality is confirmed by an
/// exhaustive search over all vectors of smaller max-norm. Vanishing is
/// decided exactly by divisibility by the minimal polynomial after a cheap
/// floating-point prefilter.
pub fn h_d_with_budget(a: &AlgebraicScalar, d: usize, budget: u64) -> Result<DHeight, HeightError> {
    if d == 0 {
        return Err(HeightError::InvalidD);
    }
    let deg = a.degree();
    if deg > d {
        return Ok(DHeight::Infinite);
    }
    let minpoly = a.minpoly();
    let candidate = minpoly.iter().map(|c| c.clone().abs()).max().expect("nonempty");
    let cand = candidate.to_u64().unwrap_or(u64::MAX);
    if cand <= 1 {
        return Ok(DHeight::Finite(candidate));
    }
    let side = 2 * (cand as u128) - 1;
    let needed = side.checked_pow(d as u32 + 1).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(HeightError::SearchBudgetExceeded { needed, budget });
    }
    let m = (cand - 1) as i64;
    let mp = RatPoly::from_integers(&minpoly);
    let (zr, zi) = a.to_complex(128).to_f64_pair();
    // powers of alpha in f64 for the prefilter
    let mut pw = vec![(1.0f64, 0.0f64)];
    for i in 1..=d {
        let (pr, pi) = pw[i - 1];
        pw.push((pr * zr - pi * zi, pr * zi + pi * zr));
    }
    let mags: Vec<f64> = pw.iter().map(|(r, i)| r.hypot(*i)).collect();
    let mut best = candidate;
    let mut v = vec![-m; d + 1];
    loop {
        let h = v.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        if h > 0 && h < best {
            let (mut sr, mut si, mut scale) = (0.0, 0.0, 0.0);
            for (i, &c) in v.iter().enumerate() {
                let cf = c as f64;
                sr += cf * pw[i].0;
                si += cf * pw[i].1;
                scale += cf.abs() * mags[i];
            }
            if sr.hypot(si) <= 1e-8 * scale {
                let f = RatPoly::from_i64(&v);
                if f.div_exact(&mp).is_some() {
                    best = Integer::from(h);
                }
            }
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i > d {
                return Ok(DHeight::Finite(best));
            }
            if v[i] < m {
                v[i] += 1;
                break;
            }
            v[i] = -m;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    fn mat(rows: usize, cols: usize, v: &[(i64, i64)]) -> RatMatrix {
        RatMatrix::from_vec(rows, cols, v.iter().map(|&(n, d)| Rational::from((n, d))).collect())
    }

    #[test]
    fn rational_heights() {
        let a = AlgebraicScalar::rational(Rational::from((3, 2)));
        assert_eq!(weil_height(&a, 128).unwrap(), HeightValue::Exact(Integer::from(3)));
        assert_eq!(h_d(&a, 1).unwrap(), DHeight::Finite(Integer::from(3)));
    }

    #[test]
    fn sqrt2_heights() {
        let a = AlgebraicScalar::algebraic_by_index(ints(&[-2, 0, 1]), 1, 128).unwrap();
        let h = weil_height(&a, 128).unwrap().to_float(128);
        assert!((h.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(h_d(&a, 2).unwrap(), DHeight::Finite(Integer::from(2)));
        assert_eq!(h_d(&a, 1).unwrap(), DHeight::Infinite);
    }

    #[test]
    fn gaussian_unit_height_one() {
        let i = AlgebraicScalar::algebraic_nearest(ints(&[1, 0, 1]), &Complex::from_f64(128, 0.0, 1.0), 128).unwrap();
        let h = weil_height(&i, 128).unwrap().to_float(128);
        assert!((h.to_f64() - 1.0).abs() < 1e-20);
    }

    #[test]
    fn mahler_examples() {
        assert!((mahler_measure(&ints(&[-2, 0, 1]), 128).unwrap().to_f64() - 2.0).abs() < 1e-30);
        assert!((mahler_measure(&ints(&[-3, 1]), 128).unwrap().to_f64() - 3.0).abs() < 1e-30);
        assert!((mahler_measure(&ints(&[-1, 2]), 128).unwrap().to_f64() - 2.0).abs() < 1e-30);
    }

    #[test]
    fn matrix_height_examples() {
        let m = mat(2, 2, &[(1, 2), (3, 1), (0, 1), (1, 1)]);
        assert_eq!(h_aff(&m), 6);
        assert_eq!(h_max(&m), 3);
        let id = RatMatrix::identity(2);
        assert_eq!(h_aff(&id), 1);
        assert_eq!(h_max(&id), 1);
        let k = mat(2, 2, &[(2, 1), (5, 1), (7, 1), (1, 1)]);
        assert_eq!(h_aff(&k), 7);
        assert_eq!(h_max(&mat(1, 1, &[(-4, 1)])), 4);
    }

    #[test]
    fn reducible_rejected() {
        // (x^2 + 1)(x^2 - 2)
        assert_eq!(
            AlgebraicScalar::algebraic_by_index(ints(&[-2, 0, -1, 0, 1]), 0, 128),
            Err(HeightError::Reducible)
        );
        // (2x - 1)(x^2 + x + 1)
        assert_eq!(
            AlgebraicScalar::algebraic_by_index(ints(&[-1, 1, 1, 2]), 0, 128),
            Err(HeightError::Reducible)
        );
        // (2x^2 + 1)(3x^2 - 5): no rational roots, two rational quadratic factors
        assert!(!is_irreducible(&ints(&[-5, 0, -7, 0, 6])).unwrap());
        assert!(is_irreducible(&ints(&[-2, 0, 0, 0, 1])).unwrap());
        assert!(is_irreducible(&ints(&[1, 1, 1, 1, 1])).unwrap());
    }

    #[test]
    fn bad_root_rejected() {
        let r = Complex::from_f64(128, 1.5, 0.0);
        assert!(matches!(
            AlgebraicScalar::algebraic(ints(&[-2, 0, 1]), r, 128),
            Err(HeightError::RootResidual(_))
        ));
    }

    #[test]
    fn hd_budget() {
        let a = AlgebraicScalar::algebraic_by_index(ints(&[-20, 0, 0, 0, 1]), 0, 128).unwrap();
        assert!(matches!(h_d(&a, 4), Err(HeightError::SearchBudgetExceeded { .. })));
        let b = AlgebraicScalar::algebraic_by_index(ints(&[-7, 0, 0, 0, 1]), 0, 128).unwrap();
        assert_eq!(h_d(&b, 4), Ok(DHeight::Finite(Integer::from(7))));
    }

    proptest! {
        #[test]
        fn matrix_heights_sign_and_permutation_invariant(
            v in proptest::collection::vec((-50i64..50, 1i64..30), 4),
            perm in Just([2usize, 0, 3, 1]),
        ) {
            let m = mat(2, 2, &v);
            let neg = m.neg();
            let permuted: Vec<(i64, i64)> = perm.iter().map(|&i| v[i]).collect();
            let p = mat(2, 2, &permuted);
            prop_assert_eq!(h_aff(&m), h_aff(&neg));
            prop_assert_eq!(h_max(&m), h_max(&neg));
            prop_assert_eq!(h_aff(&m), h_aff(&p));
            prop_assert_eq!(h_max(&m), h_max(&p));
        }

        #[test]
        fn h_aff_dominates_h_max(v in proptest::collection::vec((-99i64..99, 1i64..99), 9)) {
            let m = mat(3, 3, &v);
            let hm = h_max(&m);
            let ha = h_aff(&m);
            prop_assert!(hm <= ha);
            prop_assert!(ha <= Integer::from(rug::ops::Pow::pow(&hm, 9u32)));
        }
    }
}
