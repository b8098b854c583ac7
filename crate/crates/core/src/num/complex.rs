use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Float, Integer, Rational};

/// Complex number with MPFR real and imaginary parts.
///
/// Binary operations return values at the larger of the two operand
/// precisions.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex::new(Float::new(prec), Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Complex::from_i64(prec, 1)
    }

    pub fn i(prec: u32) -> Self {
        Complex::new(Float::new(prec), Float::with_val(prec, 1))
    }

    pub fn from_i64(prec: u32, re: i64) -> Self {
        Complex::new(Float::with_val(prec, re), Float::new(prec))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Complex::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Complex::new(re, Float::new(prec))
    }

    pub fn from_integer(prec: u32, v: &Integer) -> Self {
        Complex::new(Float::with_val(prec, v), Float::new(prec))
    }

    pub fn from_rational(prec: u32, v: &Rational) -> Self {
        Complex::new(Float::with_val(prec, v), Float::new(prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Complex::new(Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let a = Float::with_val(p, self.re.square_ref());
        a + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec().max(s.prec());
        Complex::new(
            Float::with_val(p, &self.re * s),
            Float::with_val(p, &self.im * s),
        )
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Complex::new(
            Float::with_val(n.prec(), &self.re / &n),
            -Float::with_val(n.prec(), &self.im / &n),
        )
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Complex::zero(p);
        }
        let r = self.abs();
        // sqrt((r + |re|)/2), then recover the other component from im / (2 t)
        let t = (r + Float::with_val(p, self.re.abs_ref())) / 2u32;
        let t = t.sqrt();
        let other = Float::with_val(p, &self.im / &t) / 2u32;
        if self.re >= 0 {
            Complex::new(t, other)
        } else if self.im >= 0 {
            Complex::new(other, t)
        } else {
            Complex::new(-other, -t)
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64_pair();
        if im >= 0.0 {
            write!(f, "{re}+{im}i")
        } else {
            write!(f, "{re}{im}i")
        }
    }
}

impl<'a> Add<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn add(self, o: &Complex) -> Complex {
        let p = self.prec().max(o.prec());
        Complex::new(
            Float::with_val(p, &self.re + &o.re),
            Float::with_val(p, &self.im + &o.im),
        )
    }
}

impl<'a> Sub<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn sub(self, o: &Complex) -> Complex {
        let p = self.prec().max(o.prec());
        Complex::new(
            Float::with_val(p, &self.re - &o.re),
            Float::with_val(p, &self.im - &o.im),
        )
    }
}

impl<'a> Mul<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn mul(self, o: &Complex) -> Complex {
        let p = self.prec().max(o.prec());
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        Complex::new(ac - bd, ad + bc)
    }
}

impl<'a> Div<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn div(self, o: &Complex) -> Complex {
        // Smith's algorithm keeps intermediate magnitudes bounded.
        let p = self.prec().max(o.prec());
        if o.re.clone().abs() >= o.im.clone().abs() {
            let r = Float::with_val(p, &o.im / &o.re);
            let den = Float::with_val(p, &o.re + Float::with_val(p, &o.im * &r));
            let re = Float::with_val(p, &self.re + Float::with_val(p, &self.im * &r)) / &den;
            let im = Float::with_val(p, &self.im - Float::with_val(p, &self.re * &r)) / &den;
            Complex::new(re, im)
        } else {
            let r = Float::with_val(p, &o.re / &o.im);
            let den = Float::with_val(p, &o.im + Float::with_val(p, &o.re * &r));
            let re = Float::with_val(p, Float::with_val(p, &self.re * &r) + &self.im) / &den;
            let im = Float::with_val(p, Float::with_val(p, &self.im * &r) - &self.re) / &den;
            Complex::new(re, im)
        }
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re.clone(), -self.im.clone())
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $m(self, o: Complex) -> Complex {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Complex> for Complex {
            type Output = Complex;
            fn $m(self, o: &Complex) -> Complex {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);
