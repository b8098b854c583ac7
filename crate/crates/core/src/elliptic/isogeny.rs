use rug::Rational;

use super::{ECPoint, EllipticCurve, EllipticError};
use crate::num::poly::real_roots;

/// Degree-2 isogeny `E1 -> E2` with kernel `{O, (x0, 0)}`.
///
/// In the translated coordinate `X = x - x0`, `E1: y^2 = X^3 + A X^2 + B X`
/// and `E2: y^2 = x^3 - 2A x^2 + (A^2 - 4B) x`.
#[derive(Clone, Debug)]
pub struct TwoIsogeny {
    source: EllipticCurve,
    target: EllipticCurve,
    x0: Rational,
    a: Rational,
    b: Rational,
    /// Output change of coordinates `(x, y) -> (u^2 x + shift, u^3 y)`.
    scale: Rational,
    shift: Rational,
}

impl TwoIsogeny {
    pub fn source(&self) -> &EllipticCurve {
        &self.source
    }

    pub fn target(&self) -> &EllipticCurve {
        &self.target
    }

    pub fn kernel_point(&self) -> ECPoint {
        ECPoint::Affine { x: self.x0.clone(), y: Rational::new() }
    }

    pub fn degree(&self) -> u32 {
        2
    }

    /// `x(phi(P))` from `x(P)` alone; `None` means `O`.
    pub fn apply_x(&self, x: Option<&Rational>) -> Option<Rational> {
        let x = x?;
        let t = Rational::from(x - &self.x0);
        if t == 0 {
            return None;
        }
        // X + A + B / X
        let raw = Rational::from(&t + &self.a) + Rational::from(&self.b / &t);
        Some(raw * Rational::from(self.scale.square_ref()) + &self.shift)
    }

    pub fn apply(&self, p: &ECPoint) -> ECPoint {
        match p {
            ECPoint::Infinity => ECPoint::Infinity,
            ECPoint::Affine { x, y } => {
                let t = Rational::from(x - &self.x0);
                if t == 0 {
                    return ECPoint::Infinity;
                }
                let t2 = Rational::from(t.square_ref());
                let nx = Rational::from(y.square_ref()) / &t2;
                let ny = (y * Rational::from(&self.b - &t2)) / t2;
                let u2 = Rational::from(self.scale.square_ref());
                let u3 = Rational::from(&u2 * &self.scale);
                ECPoint::Affine { x: nx * u2 + &self.shift, y: ny * u3 }
            }
        }
    }

    /// The dual isogeny `E2 -> E1`, so that `dual(phi(P)) = [2] P`.
    pub fn dual(&self) -> TwoIsogeny {
        let mut d = velu_2isogeny_at(&self.target, &Rational::new()).expect("(0, 0) is 2-torsion on the target");
        // Velu lands on y^2 = x^3 + 4A x^2 + 16B x; (x/4, y/8) then undo the translation
        d.target = self.source.clone();
        d.scale = Rational::from((1, 2));
        d.shift = self.x0.clone();
        d
    }
}

/// Velu 2-isogeny from the unique rational 2-torsion point, or the one with
/// smallest `x` when there are three.
pub fn velu_2isogeny(e: &EllipticCurve) -> Result<TwoIsogeny, EllipticError> {
    let width = Rational::from(1) >> 64;
    let x0 = real_roots(&e.cubic(), &width)
        .into_iter()
        .find_map(|r| r.exact)
        .ok_or(EllipticError::NoRationalTwoTorsion)?;
    velu_2isogeny_at(e, &x0)
}

pub fn velu_2isogeny_at(e: &EllipticCurve, x0: &Rational) -> Result<TwoIsogeny, EllipticError> {
    if e.rhs(x0) != 0 {
        return Err(EllipticError::NotTwoTorsion);
    }
    let three_x0 = Rational::from(x0 * 3u32);
    let a = Rational::from(&three_x0 + e.a2());
    let b = Rational::from(&three_x0 * x0) + Rational::from(e.a2() * x0) * 2u32 + e.a4();
    let a2 = Rational::from(&a * -2i32);
    let a4 = Rational::from(a.square_ref()) - Rational::from(&b * 4u32);
    let target = EllipticCurve::new(a2, a4, Rational::new())?;
    Ok(TwoIsogeny { source: e.clone(), target, x0: x0.clone(), a, b, scale: Rational::from(1), shift: Rational::new() })
}
