//! Invariant checks shared by the single-shot commands and the fuzz suites,
//! so that a fuzz violation replays through the matching subcommand.

use abelia::heights::{h_aff, h_max, rational_height};
use abelia::{Float, Integer, RatMatrix, RatPoly};
use serde_json::{json, Value};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
    /// log2(bound) - log2(value) for inequalities, negated residual otherwise.
    pub slack: f64,
}

impl Check {
    pub fn new(name: &'static str, ok: bool, slack: f64) -> Self {
        Check { name, ok, slack }
    }

    /// `lhs <= rhs` on nonnegative integers.
    pub fn le(name: &'static str, lhs: &Integer, rhs: &Integer) -> Self {
        Check::new(name, lhs <= rhs, log2_int(rhs) - log2_int(lhs))
    }

    pub fn to_json(&self) -> Value {
        json!({ "name": self.name, "ok": self.ok, "slack": crate::io::f64_str(self.slack) })
    }
}

pub fn all_ok(cs: &[Check]) -> bool {
    cs.iter().all(|c| c.ok)
}

pub fn to_json(cs: &[Check]) -> Value {
    Value::Array(cs.iter().map(Check::to_json).collect())
}

pub fn log2_int(n: &Integer) -> f64 {
    if *n == 0 {
        return f64::NEG_INFINITY;
    }
    let (m, e) = n.to_f64_exp();
    m.abs().log2() + e as f64
}

pub fn log2_float(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

fn factorial(n: usize) -> Integer {
    Integer::from(Integer::factorial(n as u32))
}

pub fn ipow(b: &Integer, e: usize) -> Integer {
    let mut r = Integer::from(1);
    for _ in 0..e {
        r *= b;
    }
    r
}

/// Rational inverse by Gauss-Jordan; `None` if singular.
fn inverse(a: &RatMatrix) -> Option<RatMatrix> {
    let n = a.rows();
    a.solve(&RatMatrix::identity(n)).filter(|_| n > 0)
}

/// The five height inequalities for square matrices `a`, `b` of equal size.
pub fn matrix_heights(a: &RatMatrix, b: &RatMatrix) -> Vec<Check> {
    let n = a.rows();
    let (ha, hm) = (h_aff(a), h_max(a));
    let hb = h_max(b);
    let mut out = vec![
        Check::le("h_max_le_h_aff", &hm, &ha),
        Check::le("h_aff_le_h_max_pow", &ha, &ipow(&hm, n * n)),
        Check::le("sum", &h_max(&a.add(b)), &(Integer::from(2) * &hm * &hb)),
        Check::le(
            "product",
            &h_max(&a.mul(b)),
            &(Integer::from(n) * ipow(&hm, n) * ipow(&hb, n)),
        ),
        Check::le("determinant", &rational_height(&a.det()), &(factorial(n) * ipow(&ha, n))),
    ];
    if let Some(inv) = inverse(a) {
        let bound = factorial(n) * factorial(n - 1) * ipow(&ha, 2 * n - 1);
        out.push(Check::le("inverse", &h_max(&inv), &bound));
    }
    out
}

/// `sum c_i x^i` vanishes at a root of the primitive irreducible `minpoly`.
pub fn vanishes(minpoly: &RatPoly, c: &[i64]) -> bool {
    let p = RatPoly::from_i64(c);
    !p.is_zero() && p.rem(minpoly).is_zero()
}

/// Smallest max-norm of a nonzero primitive integer vector of length `d + 1`
/// vanishing at the root, by plain enumeration up to `cap`.
pub fn brute_hd(minpoly: &[Integer], d: usize, cap: i64) -> Option<i64> {
    let m = RatPoly::from_integers(minpoly);
    if m.deg() > d {
        return None;
    }
    for h in 1..=cap {
        let mut v = vec![-h; d + 1];
        loop {
            if v.iter().any(|x| x.abs() == h) && vanishes(&m, &v) {
                let mut g = Integer::new();
                for x in &v {
                    g.gcd_mut(&Integer::from(*x));
                }
                if g == 1 {
                    return Some(h);
                }
            }
            let mut i = 0;
            while i <= d && v[i] == h {
                v[i] = -h;
                i += 1;
            }
            if i > d {
                break;
            }
            v[i] += 1;
        }
    }
    None
}
