use std::cmp::Ordering;
use std::fmt;

use rug::{Complete, Float, Integer, Rational};

use super::complex::Complex;

/// Univariate polynomial over Q, coefficients lowest degree first.
///
/// The coefficient vector is kept trimmed so the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RatPoly {
    c: Vec<Rational>,
}

impl fmt::Debug for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatPoly({self})")
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.cmp0() == Ordering::Equal {
                continue;
            }
            let neg = a.cmp0() == Ordering::Less;
            let mag = Rational::from(a.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let unit = mag == 1;
            match i {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "x")?,
                1 => write!(f, "{mag}*x")?,
                _ if unit => write!(f, "x^{i}")?,
                _ => write!(f, "{mag}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl RatPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| x.cmp0() == Ordering::Equal) {
            c.pop();
        }
        RatPoly { c }
    }

    pub fn zero() -> Self {
        RatPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        RatPoly::constant(Rational::from(1))
    }

    pub fn x() -> Self {
        RatPoly::new(vec![Rational::new(), Rational::from(1)])
    }

    pub fn constant(a: Rational) -> Self {
        RatPoly::new(vec![a])
    }

    pub fn from_i64(c: &[i64]) -> Self {
        RatPoly::new(c.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn from_integers(c: &[Integer]) -> Self {
        RatPoly::new(c.iter().map(|v| Rational::from(v.clone())).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.c.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> Rational {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        RatPoly::new(self.c.iter().map(|a| Rational::from(a / &l)).collect())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        RatPoly::new(self.c.iter().map(|a| Rational::from(a * s)).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        RatPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        RatPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        RatPoly::new(self.c.iter().map(|a| Rational::from(-a)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![Rational::new(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.cmp0() == Ordering::Equal {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        RatPoly::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = RatPoly::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Quotient and remainder. Panics on division by zero.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.deg();
        if self.is_zero() || self.deg() < dd {
            return (RatPoly::zero(), self.clone());
        }
        let mut r = self.c.clone();
        let mut q = vec![Rational::new(); self.deg() - dd + 1];
        let lead = d.lead();
        for k in (0..q.len()).rev() {
            let t = Rational::from(&r[k + dd] / &lead);
            if t.cmp0() != Ordering::Equal {
                for (j, b) in d.c.iter().enumerate() {
                    r[k + j] -= Rational::from(&t * b);
                }
            }
            q[k] = t;
        }
        r.truncate(dd);
        (RatPoly::new(q), RatPoly::new(r))
    }

    /// Exact quotient if `d` divides `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            // keep coefficient growth in check
            b = r.monic();
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        RatPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| Rational::from(a * i as u32))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for a in self.c.iter().rev() {
            acc *= x;
            acc += a;
        }
        acc
    }

    pub fn eval_float(&self, x: &Float) -> Float {
        let p = x.prec();
        let mut acc = Float::new(p);
        for a in self.c.iter().rev() {
            acc *= x;
            acc += Float::with_val(p, a);
        }
        acc
    }

    pub fn eval_complex(&self, z: &Complex) -> Complex {
        let p = z.prec();
        let mut acc = Complex::zero(p);
        for a in self.c.iter().rev() {
            acc = &acc * z;
            acc.re += Float::with_val(p, a);
        }
        acc
    }

    /// Compose with `a x + b`.
    pub fn compose_linear(&self, a: &Rational, b: &Rational) -> Self {
        let lin = RatPoly::new(vec![b.clone(), a.clone()]);
        let mut acc = RatPoly::zero();
        for c in self.c.iter().rev() {
            acc = acc.mul(&lin).add(&RatPoly::constant(c.clone()));
        }
        acc
    }

    /// Integer coefficients if every coefficient is integral.
    pub fn to_integer(&self) -> Option<Vec<Integer>> {
        self.c
            .iter()
            .map(|a| (*a.denom() == 1).then(|| a.numer().clone()))
            .collect()
    }

    /// Primitive integer polynomial with positive leading coefficient
    /// spanning the same line.
    pub fn primitive_integer(&self) -> Vec<Integer> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut l = Integer::from(1);
        for a in &self.c {
            l.lcm_mut(a.denom());
        }
        let mut v: Vec<Integer> = self
            .c
            .iter()
            .map(|a| (Rational::from(a * &l)).into_numer_denom().0)
            .collect();
        let mut g = Integer::new();
        for a in &v {
            g.gcd_mut(a);
        }
        if self.lead().cmp0() == Ordering::Less {
            g = -g;
        }
        for a in v.iter_mut() {
            a.div_exact_mut(&g);
        }
        v
    }

    /// Squarefree decomposition by Yun's algorithm: monic factors `a_i` with
    /// `self = lead * prod a_i^i`. Returned as `(factor, multiplicity)` with
    /// trivial factors omitted.
    pub fn squarefree_decomposition(&self) -> Vec<(RatPoly, usize)> {
        let mut out = Vec::new();
        if self.is_zero() || self.deg() == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a = f.gcd(&fp);
        let mut b = f.div_exact(&a).expect("gcd divides");
        let mut c = fp.div_exact(&a).expect("gcd divides");
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            let ai = b.gcd(&d);
            if ai.deg() > 0 {
                out.push((ai.clone(), i));
            }
            b = b.div_exact(&ai).expect("gcd divides");
            if b.deg() == 0 {
                break;
            }
            c = d.div_exact(&ai).expect("gcd divides");
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Squarefree part (monic).
    pub fn squarefree_part(&self) -> Self {
        if self.deg() == 0 {
            return RatPoly::one();
        }
        let f = self.monic();
        f.div_exact(&f.gcd(&f.derivative())).expect("gcd divides").monic()
    }

    /// Exact square root if `self` is the square of a polynomial over Q.
    /// The root is normalized to a positive leading coefficient.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(RatPoly::zero());
        }
        let n = self.deg();
        if n % 2 == 1 {
            return None;
        }
        let m = n / 2;
        let lead = rational_sqrt(&self.lead())?;
        // Solve top-down: coefficient n - k of q^2 determines q_{m-k}.
        let mut q = vec![Rational::new(); m + 1];
        q[m] = lead.clone();
        let two_lead = Rational::from(&lead * 2u32);
        for k in 1..=m {
            let mut s = self.coeff(n - k);
            for i in 1..k {
                s -= Rational::from(&q[m - i] * &q[m - (k - i)]);
            }
            q[m - k] = Rational::from(&s / &two_lead);
        }
        let q = RatPoly::new(q);
        (q.mul(&q) == *self).then_some(q)
    }

    /// Sturm sequence of the polynomial.
    pub fn sturm_sequence(&self) -> Vec<RatPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        seq
    }

    /// Maximum absolute coefficient, a crude size measure.
    pub fn max_abs_coeff(&self) -> Rational {
        self.c.iter().map(|a| Rational::from(a.abs_ref())).max().unwrap_or_default()
    }

    /// Cauchy bound: every root has absolute value below this.
    pub fn root_bound(&self) -> Rational {
        let l = Rational::from(self.lead().abs_ref());
        let m = self
            .c
            .iter()
            .take(self.deg())
            .map(|a| Rational::from(a.abs_ref()))
            .max()
            .unwrap_or_default();
        Rational::from(1) + m / l
    }
}

/// Square root of a non-negative rational when it is a perfect square.
pub fn rational_sqrt(a: &Rational) -> Option<Rational> {
    if a.cmp0() == Ordering::Less {
        return None;
    }
    let (n, d) = (a.numer(), a.denom());
    if !n.is_perfect_square() || !d.is_perfect_square() {
        return None;
    }
    Some(Rational::from((n.sqrt_ref().complete(), d.sqrt_ref().complete())))
}

/// Number of sign changes in the Sturm sequence evaluated at `x`.
fn sign_variations(seq: &[RatPoly], x: &Rational) -> usize {
    let mut prev = Ordering::Equal;
    let mut n = 0;
    for p in seq {
        let s = p.eval(x).cmp0();
        if s == Ordering::Equal {
            continue;
        }
        if prev != Ordering::Equal && s != prev {
            n += 1;
        }
        prev = s;
    }
    n
}

/// Distinct real roots in the half-open interval `(a, b]`.
pub fn count_roots(seq: &[RatPoly], a: &Rational, b: &Rational) -> usize {
    sign_variations(seq, a).saturating_sub(sign_variations(seq, b))
}

/// Real root of a rational polynomial, isolated in `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoot {
    pub lo: Rational,
    pub hi: Rational,
    /// Set when the root is rational and has been identified exactly.
    pub exact: Option<Rational>,
    pub multiplicity: usize,
}

impl RealRoot {
    pub fn midpoint(&self) -> Rational {
        match &self.exact {
            Some(r) => r.clone(),
            None => (Rational::from(&self.lo + &self.hi)) / 2u32,
        }
    }

    pub fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.midpoint())
    }

    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }
}

/// Simplest rational (smallest denominator) in the closed interval.
pub fn simplest_rational_in(lo: &Rational, hi: &Rational) -> Rational {
    debug_assert!(lo <= hi);
    if lo.cmp0() != Ordering::Greater && hi.cmp0() != Ordering::Less {
        return Rational::new();
    }
    if hi.cmp0() == Ordering::Less {
        let r = simplest_rational_in(&Rational::from(-hi), &Rational::from(-lo));
        return -r;
    }
    let fl = lo.clone().floor();
    if fl == *lo {
        return fl;
    }
    let fl_next = Rational::from(&fl + 1u32);
    if fl_next <= *hi {
        return fl_next;
    }
    // lo and hi share integer part; recurse on reciprocals of fractional parts.
    let lo_f = Rational::from(lo - &fl);
    let hi_f = Rational::from(hi - &fl);
    let inner = simplest_rational_in(&hi_f.recip(), &lo_f.recip());
    fl + inner.recip()
}

/// Isolate and refine every distinct real root of `p` to width below
/// `width`. Multiplicities come from the squarefree decomposition.
/// Rational roots are identified exactly when their denominator is small
/// relative to the isolation width.
pub fn real_roots(p: &RatPoly, width: &Rational) -> Vec<RealRoot> {
    let mut out = Vec::new();
    for (factor, mult) in p.squarefree_decomposition() {
        for mut r in isolate_squarefree(&factor, width) {
            r.multiplicity = mult;
            out.push(r);
        }
    }
    out.sort_by_key(|a| a.midpoint());
    out
}

fn isolate_squarefree(p: &RatPoly, width: &Rational) -> Vec<RealRoot> {
    let seq = p.sturm_sequence();
    let b = p.root_bound();
    let mut stack = vec![(Rational::from(-&b), b)];
    let mut isolated = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = count_roots(&seq, &lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            isolated.push((lo, hi));
            continue;
        }
        let mid = Rational::from(&lo + &hi) / 2u32;
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    isolated
        .into_iter()
        .map(|(lo, hi)| refine(p, &seq, lo, hi, width))
        .collect()
}

/// Refine an isolating interval `(lo, hi]` for a squarefree polynomial.
fn refine(p: &RatPoly, seq: &[RatPoly], mut lo: Rational, mut hi: Rational, width: &Rational) -> RealRoot {
    if p.eval(&hi).cmp0() == Ordering::Equal {
        return RealRoot { lo: hi.clone(), hi: hi.clone(), exact: Some(hi), multiplicity: 1 };
    }
    let mut steps = 0;
    loop {
        let s = simplest_rational_in(&lo, &hi);
        if s > lo && p.eval(&s).cmp0() == Ordering::Equal {
            return RealRoot { lo: s.clone(), hi: s.clone(), exact: Some(s), multiplicity: 1 };
        }
        if Rational::from(&hi - &lo) <= *width && steps > 0 {
            return RealRoot { lo, hi, exact: None, multiplicity: 1 };
        }
        let mid = Rational::from(&lo + &hi) / 2u32;
        if p.eval(&mid).cmp0() == Ordering::Equal {
            return RealRoot { lo: mid.clone(), hi: mid.clone(), exact: Some(mid), multiplicity: 1 };
        }
        if count_roots(seq, &lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn display_format() {
        let p = RatPoly::from_i64(&[1, -2, 0, 1]);
        assert_eq!(p.to_string(), "x^3 - 2*x + 1");
        assert_eq!(RatPoly::zero().to_string(), "0");
    }

    #[test]
    fn yun_recovers_multiplicities() {
        // (x-1)^2 (x+2)^3 (x^2+1)
        let a = RatPoly::from_i64(&[-1, 1]);
        let b = RatPoly::from_i64(&[2, 1]);
        let c = RatPoly::from_i64(&[1, 0, 1]);
        let p = a.pow(2).mul(&b.pow(3)).mul(&c).scale(&q(7, 3));
        let dec = p.squarefree_decomposition();
        assert_eq!(dec, vec![(c, 1), (a, 2), (b, 3)]);
    }

    #[test]
    fn exact_sqrt_of_square() {
        let a = RatPoly::from_i64(&[3, -1, 2]);
        assert_eq!(a.mul(&a).sqrt_exact(), Some(a.clone()));
        assert_eq!(RatPoly::from_i64(&[1, 0, 2]).sqrt_exact(), None);
    }

    #[test]
    fn rational_roots_found_exactly() {
        let p = RatPoly::from_i64(&[-1, 1]).mul(&RatPoly::from_i64(&[1, -3])).mul(&RatPoly::from_i64(&[-2, 0, 1]));
        let roots = real_roots(&p, &q(1, 1 << 30));
        assert_eq!(roots.len(), 4);
        assert!(roots[0].exact.is_none());
        assert_eq!(roots[1].exact, Some(q(1, 3)));
        assert_eq!(roots[2].exact, Some(q(1, 1)));
        assert!(roots[3].exact.is_none());
        let r = roots[3].to_float(64).to_f64();
        assert!((r - 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_rational_in(&q(3, 10), &q(2, 5)), q(1, 3));
        assert_eq!(simplest_rational_in(&q(-12, 5), &q(-9, 4)), q(-7, 3));
        assert_eq!(simplest_rational_in(&q(7, 4), &q(9, 4)), q(2, 1));
    }

    proptest! {
        #[test]
        fn divrem_identity(a in proptest::collection::vec(-20i64..20, 1..7),
                           b in proptest::collection::vec(-20i64..20, 1..5)) {
            let a = RatPoly::from_i64(&a);
            let b = RatPoly::from_i64(&b);
            prop_assume!(!b.is_zero());
            let (qq, r) = a.divrem(&b);
            prop_assert_eq!(qq.mul(&b).add(&r), a);
            prop_assert!(r.is_zero() || r.deg() < b.deg());
        }

        #[test]
        fn root_count_matches_construction(rs in proptest::collection::btree_set(-12i64..12, 1..6)) {
            let mut p = RatPoly::one();
            for &r in &rs {
                p = p.mul(&RatPoly::from_i64(&[-r, 2]));
            }
            p = p.mul(&RatPoly::from_i64(&[5, 0, 1]));
            let roots = real_roots(&p, &q(1, 1 << 20));
            prop_assert_eq!(roots.len(), rs.len());
            for (root, r) in roots.iter().zip(rs.iter()) {
                prop_assert_eq!(root.exact.clone(), Some(q(*r, 2)));
            }
        }
    }
}
