use rug::{Float, Integer, Rational};

use super::{analytic_of, rosati, AbelianError, Endomorphism};
use crate::num::poly::{count_roots, real_roots, RealRoot};
use crate::num::roots::{aberth, rat_poly_roots};
use crate::num::{Complex, RatPoly};

/// `P^r` of `rho_r(f^dagger f)` and its square root `P^a`.
#[derive(Clone, Debug)]
pub struct AnalyticCharpoly {
    pub p_r: RatPoly,
    pub p_a: RatPoly,
    /// Max distance between eigenvalues of `rho_a(f^dagger f)` and roots of `P^a`.
    pub eigen_gap: f64,
}

/// `P^a` computed exactly, without the floating-point cross-check.
pub fn exact_analytic_charpoly(f: &Endomorphism) -> Result<(RatPoly, RatPoly), AbelianError> {
    let n = rosati(f).mul(&f.rho_r().to_rational());
    let p_r = RatPoly::new(n.charpoly());
    let p_a = p_r.sqrt_exact().ok_or(AbelianError::NotAPerfectSquare)?;
    Ok((p_r, p_a))
}

/// Eigenvalue gap above which the cross-check fails.
pub const EIGEN_TOL: f64 = 1e-9;

pub fn analytic_charpoly(f: &Endomorphism) -> Result<AnalyticCharpoly, AbelianError> {
    let (p_r, p_a) = exact_analytic_charpoly(f)?;
    let p = f.av().prec();
    let n = rosati(f).mul(&f.rho_r().to_rational());
    let ra = analytic_of(f.av(), &n);
    let conv = |_| AbelianError::ComplexRootDetected;
    let eig = aberth(&ra.charpoly(), p).map_err(conv)?;
    let roots = rat_poly_roots(&p_a, p).map_err(conv)?;
    let eigen_gap = match_gap(&eig, &roots);
    if eigen_gap > EIGEN_TOL {
        return Err(AbelianError::EigenvalueMismatch(eigen_gap));
    }
    Ok(AnalyticCharpoly { p_r, p_a, eigen_gap })
}

fn match_gap(a: &[Complex], b: &[Complex]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).abs().to_f64()))
            .min_by(|u, v| u.1.total_cmp(&v.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Eigenvalues `alpha_1 <= ... <= alpha_g` of `rho_a(f^dagger f)`.
#[derive(Clone, Debug)]
pub struct SpectralConstants {
    pub p_a: RatPoly,
    /// Isolated roots of `P^a`, sorted, with multiplicities.
    pub roots: Vec<RealRoot>,
    pub alpha_minus: Float,
    pub alpha_plus: Float,
    pub is_isogeny: bool,
}

impl SpectralConstants {
    /// `alpha_minus` as an exact rational when it is one.
    pub fn alpha_minus_exact(&self) -> Option<Rational> {
        self.roots.first().and_then(|r| r.exact.clone())
    }

    pub fn alpha_plus_exact(&self) -> Option<Rational> {
        self.roots.last().and_then(|r| r.exact.clone())
    }

    /// All roots as floats, repeated by multiplicity.
    pub fn alphas(&self, prec: u32) -> Vec<Float> {
        self.roots.iter().flat_map(|r| std::iter::repeat_n(r.to_float(prec), r.multiplicity)).collect()
    }
}

pub fn alphas(f: &Endomorphism) -> Result<SpectralConstants, AbelianError> {
    let (_, p_a) = exact_analytic_charpoly(f)?;
    let p = f.av().prec();
    let width = Rational::from(1) >> (p + 8);
    let roots = real_roots(&p_a, &width);
    let count: usize = roots.iter().map(|r| r.multiplicity).sum();
    if count != f.g() {
        return Err(AbelianError::ComplexRootDetected);
    }
    let floor = Rational::from_f64(-1e-12).expect("finite");
    if roots.iter().any(|r| r.hi < floor) {
        return Err(AbelianError::ComplexRootDetected);
    }
    let clamp = |x: Float| if x < 0 { Float::new(p) } else { x };
    let alpha_minus = clamp(roots.first().map(|r| r.to_float(p)).unwrap_or_else(|| Float::new(p)));
    let alpha_plus = clamp(roots.last().map(|r| r.to_float(p)).unwrap_or_else(|| Float::new(p)));
    let is_isogeny = p_a.coeff(0) != 0;
    Ok(SpectralConstants { p_a, roots, alpha_minus, alpha_plus, is_isogeny })
}

/// `chi(L) b^g P^a(a / b)`.
pub fn chi_combination(f: &Endomorphism, a: &Integer, b: &Integer) -> Result<Rational, AbelianError> {
    if *b <= 0 {
        return Err(AbelianError::NonPositiveDenominator);
    }
    let (_, p_a) = exact_analytic_charpoly(f)?;
    let g = f.g() as u32;
    let lam = Rational::from((a.clone(), b.clone()));
    let bg = Integer::from(rug::ops::Pow::pow(b, g));
    Ok(Rational::from(f.av().ptype().chi() * bg) * p_a.eval(&lam))
}

/// Which of the two divisor classes `lambda D - f^*D` or `f^*D - lambda D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivisorSide {
    LambdaMinusPullback,
    PullbackMinusLambda,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivisorClass {
    Ample,
    /// Nef but not ample: `lambda` equals an extreme eigenvalue.
    NotAmpleBoundary,
    NotAmple,
}

impl DivisorClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            DivisorClass::Ample => "ample",
            DivisorClass::NotAmpleBoundary => "not_ample_boundary",
            DivisorClass::NotAmple => "not_ample",
        }
    }
}

/// Decides ampleness from the position of `lambda = a / b` relative to the
/// roots of `P^a`, using exact Sturm counts.
pub fn classify_divisor(
    f: &Endomorphism,
    a: &Integer,
    b: &Integer,
    side: DivisorSide,
) -> Result<DivisorClass, AbelianError> {
    if *b <= 0 {
        return Err(AbelianError::NonPositiveDenominator);
    }
    let (_, p_a) = exact_analytic_charpoly(f)?;
    let lam = Rational::from((a.clone(), b.clone()));
    let sq = p_a.squarefree_part();
    let seq = sq.sturm_sequence();
    let bound = sq.root_bound() + Rational::from(1) + Rational::from(lam.abs_ref());
    let on = p_a.eval(&lam) == 0;
    let above = count_roots(&seq, &lam, &bound);
    let below = count_roots(&seq, &Rational::from(-&bound), &lam) - on as usize;
    let wrong_side = match side {
        DivisorSide::LambdaMinusPullback => above,
        DivisorSide::PullbackMinusLambda => below,
    };
    Ok(match (wrong_side, on) {
        (0, false) => DivisorClass::Ample,
        (0, true) => DivisorClass::NotAmpleBoundary,
        _ => DivisorClass::NotAmple,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{cm_variety, validate_endomorphism, PolarizedAV};
    use crate::num::IntMatrix;
    use crate::siegel::SiegelPoint;

    const P: u32 = 128;

    fn av_i() -> PolarizedAV {
        PolarizedAV::principal(SiegelPoint::diagonal(&[Complex::from_f64(P, 0.0, 1.0)]).unwrap()).unwrap()
    }

    fn ee_diag12() -> Endomorphism {
        let s = cm_variety(&[0, 0], P).unwrap();
        validate_endomorphism(&s.av, &IntMatrix::from_i64(4, 4, &[1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 2])).unwrap()
    }

    #[test]
    fn charpoly_examples() {
        let f = validate_endomorphism(&av_i(), &IntMatrix::from_i64(2, 2, &[0, 1, -1, 0])).unwrap();
        let c = analytic_charpoly(&f).unwrap();
        assert_eq!(c.p_a, RatPoly::from_i64(&[-1, 1]));
        let n3 = Endomorphism::multiplication(&ee_diag12().av().clone(), 3);
        assert_eq!(analytic_charpoly(&n3).unwrap().p_a, RatPoly::from_i64(&[-9, 1]).pow(2));
        let e = analytic_charpoly(&ee_diag12()).unwrap();
        assert_eq!(e.p_a, RatPoly::from_i64(&[4, -5, 1]));
    }

    #[test]
    fn alpha_examples() {
        let s = alphas(&ee_diag12()).unwrap();
        assert_eq!(s.alpha_minus_exact(), Some(Rational::from(1)));
        assert_eq!(s.alpha_plus_exact(), Some(Rational::from(4)));
        assert!(s.is_isogeny);
        let av = ee_diag12().av().clone();
        let proj = validate_endomorphism(&av, &IntMatrix::from_i64(4, 4, &[1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0])).unwrap();
        let s = alphas(&proj).unwrap();
        assert_eq!(s.alpha_minus, 0);
        assert!(!s.is_isogeny);
        let n = alphas(&Endomorphism::multiplication(&av_i(), 7)).unwrap();
        assert_eq!(n.alpha_plus_exact(), Some(Rational::from(49)));
    }

    #[test]
    fn chi_and_classify_examples() {
        let f2 = Endomorphism::multiplication(&av_i(), 2);
        let one = Integer::from(1);
        assert_eq!(chi_combination(&f2, &Integer::from(5), &one).unwrap(), 1);
        assert_eq!(chi_combination(&f2, &Integer::from(4), &one).unwrap(), 0);
        let side = DivisorSide::LambdaMinusPullback;
        assert_eq!(classify_divisor(&f2, &Integer::from(5), &one, side).unwrap(), DivisorClass::Ample);
        assert_eq!(classify_divisor(&f2, &Integer::from(4), &one, side).unwrap(), DivisorClass::NotAmpleBoundary);
        let e = ee_diag12();
        for side in [DivisorSide::LambdaMinusPullback, DivisorSide::PullbackMinusLambda] {
            assert_eq!(classify_divisor(&e, &Integer::from(2), &one, side).unwrap(), DivisorClass::NotAmple);
        }
        assert_eq!(
            classify_divisor(&e, &Integer::from(1), &Integer::from(2), DivisorSide::PullbackMinusLambda).unwrap(),
            DivisorClass::Ample
        );
    }
}
