//! Polarized complex abelian varieties given by period data `(tau, D)`:
//! endomorphism validation, the Rosati involution, the trace form and the
//! explicit constants comparing `||rho_r(f)||` with `sqrt tr(f^dagger f)`.
//!
//! Lattice coordinates are column vectors with respect to the columns of the
//! period matrix `Pi = (tau, D)`, so an endomorphism satisfies
//! `rho_a Pi = Pi rho_r`.

mod sample;
mod spectral;

pub use sample::{cm_variety, product_embedding, random_symplectic, sample_cm_variety, CmPoint, CmSample, CM_POINTS};
pub use spectral::{
    alphas, analytic_charpoly, chi_combination, classify_divisor, exact_analytic_charpoly, AnalyticCharpoly,
    DivisorClass, DivisorSide, SpectralConstants,
};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::num::{Complex, ComplexMatrix, IntMatrix, RatMatrix, RealMatrix};
use crate::siegel::{delta_constants, Deltas, SiegelError, SiegelPoint, SymplecticMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AbelianError {
    #[error("polarization type must be a nonempty divisibility chain of positive integers")]
    InvalidType,
    #[error("dimensions do not match")]
    DimensionMismatch,
    #[error("Gram matrix S is not positive definite")]
    GramNotPositive,
    #[error("det S deviates from d^2 (relative residual 2^{0:.1})")]
    GramDeterminant(f64),
    #[error("matrix does not preserve the complex structure (residual 2^{0:.1})")]
    NotAnEndomorphism(f64),
    #[error("matrix does not intertwine the complex structures (residual 2^{0:.1})")]
    NotAHomomorphism(f64),
    #[error("characteristic polynomial of f^dagger f is not a square")]
    NotAPerfectSquare,
    #[error("eigenvalues of rho_a(f^dagger f) differ from the roots of P^a by {0:e}")]
    EigenvalueMismatch(f64),
    #[error("P^a has a non-real or negative root")]
    ComplexRootDetected,
    #[error("operation needs a nonzero endomorphism")]
    ZeroEndomorphism,
    #[error("denominator must be positive")]
    NonPositiveDenominator,
    #[error("norm bound violated: {0}")]
    BoundViolation(String),
    #[error(transparent)]
    Siegel(#[from] SiegelError),
}

fn log2_f(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

fn pow2(prec: u32, e: i32) -> Float {
    Float::with_val(prec, 1) << e
}

/// Type `(d_1, ..., d_g)` of a polarization, with `d_i | d_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarizationType {
    d: Vec<Integer>,
}

impl PolarizationType {
    pub fn new(d: Vec<Integer>) -> Result<Self, AbelianError> {
        if d.is_empty() || d.iter().any(|x| *x <= 0) {
            return Err(AbelianError::InvalidType);
        }
        if d.windows(2).any(|w| !w[1].is_divisible(&w[0])) {
            return Err(AbelianError::InvalidType);
        }
        Ok(PolarizationType { d })
    }

    pub fn from_u64(d: &[u64]) -> Result<Self, AbelianError> {
        Self::new(d.iter().map(|&x| Integer::from(x)).collect())
    }

    pub fn principal(g: usize) -> Self {
        PolarizationType { d: vec![Integer::from(1); g] }
    }

    pub fn g(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[Integer] {
        &self.d
    }

    pub fn is_principal(&self) -> bool {
        self.d.iter().all(|x| *x == 1)
    }

    /// `d = d_1 ... d_g`.
    pub fn degree(&self) -> Integer {
        self.d.iter().product()
    }

    /// Euler characteristic of the line bundle, `det D`.
    pub fn chi(&self) -> Integer {
        self.degree()
    }

    pub fn max_d(&self) -> Integer {
        self.d.last().cloned().unwrap_or_default()
    }

    pub fn d_matrix(&self) -> IntMatrix {
        let g = self.g();
        IntMatrix::from_fn(g, g, |r, c| if r == c { self.d[r].clone() } else { Integer::new() })
    }

    /// Alternating form `E = [[0, D], [-D, 0]]`.
    pub fn e_matrix(&self) -> IntMatrix {
        let g = self.g();
        let d = self.d_matrix();
        let z = IntMatrix::zeros(g, g);
        IntMatrix::from_blocks(&z, &d, &d.neg(), &z)
    }
}

/// Abelian variety `C^g / (tau Z^g + D Z^g)` with its polarization.
#[derive(Clone, Debug)]
pub struct PolarizedAV {
    tau: SiegelPoint,
    ptype: PolarizationType,
}

impl PolarizedAV {
    /// Checks that the real Gram matrix `S` is positive definite with
    /// `det S = d^2`.
    pub fn new(tau: SiegelPoint, ptype: PolarizationType) -> Result<Self, AbelianError> {
        if tau.g() != ptype.g() {
            return Err(AbelianError::DimensionMismatch);
        }
        let av = PolarizedAV { tau, ptype };
        let s = av.gram_s();
        if s.cholesky().is_none() {
            return Err(AbelianError::GramNotPositive);
        }
        let res = av.det_s_residual();
        let p = av.prec();
        let scale = s.max_abs().max(&Float::with_val(p, 1)).pow(2 * av.g() as i32);
        if res > Float::with_val(p, &scale * pow2(p, 32 - p as i32)) {
            return Err(AbelianError::GramDeterminant(log2_f(&res)));
        }
        Ok(av)
    }

    pub fn principal(tau: SiegelPoint) -> Result<Self, AbelianError> {
        let g = tau.g();
        Self::new(tau, PolarizationType::principal(g))
    }

    pub fn g(&self) -> usize {
        self.ptype.g()
    }

    pub fn prec(&self) -> u32 {
        self.tau.prec()
    }

    pub fn tau(&self) -> &SiegelPoint {
        &self.tau
    }

    pub fn ptype(&self) -> &PolarizationType {
        &self.ptype
    }

    /// `Pi = (tau, D)`, a `g x 2g` complex matrix.
    pub fn period_matrix(&self) -> ComplexMatrix {
        let g = self.g();
        let p = self.prec();
        let t = self.tau.tau();
        ComplexMatrix::from_fn(g, 2 * g, |r, c| {
            if c < g {
                t[(r, c)].clone()
            } else if c - g == r {
                Complex::from_integer(p, &self.ptype.d[r])
            } else {
                Complex::zero(p)
            }
        })
    }

    /// `S = [[X Y^-1 X + Y, X Y^-1 D], [D Y^-1 X, D Y^-1 D]]`, the real part
    /// of the Hermitian form on the lattice basis.
    pub fn gram_s(&self) -> RealMatrix {
        let p = self.prec();
        let x = self.tau.x();
        let y = self.tau.y();
        let yi = y.inverse().expect("Y is positive definite");
        let d = self.ptype.d_matrix().to_real(p);
        let xyi = x.mul(&yi);
        let a = xyi.mul(&x).add(&y);
        let b = xyi.mul(&d);
        let c = d.mul(&yi).mul(&x);
        let e = d.mul(&yi).mul(&d);
        RealMatrix::from_blocks(&a, &b, &c, &e).symmetrize()
    }

    /// `|det S - d^2| / d^2`.
    pub fn det_s_residual(&self) -> Float {
        let p = self.prec();
        let d = Float::with_val(p, self.ptype.degree());
        let d2 = Float::with_val(p, d.square_ref());
        let det = self.gram_s().det_field();
        Float::with_val(p, &det - &d2).abs() / d2
    }
}

/// Default validation tolerance: `2^(20 - p)` relative to the input size.
pub fn default_tol(prec: u32) -> Float {
    pow2(prec, 20 - prec as i32)
}

/// Analytic representation of a lattice map from `(tau_a, D_a)` to
/// `(tau_b, D_b)`, together with the consistency residual and its scale.
fn analytic_rep(
    tau_a: &ComplexMatrix,
    da: &[Integer],
    tau_b: &ComplexMatrix,
    db: &[Integer],
    m: &RatMatrix,
) -> (ComplexMatrix, Float, Float) {
    let (ga, gb) = (da.len(), db.len());
    let p = tau_a.prec().max(tau_b.prec());
    let mc = m.to_complex(p);
    let m1 = mc.block(0, 0, gb, ga);
    let m2 = mc.block(0, ga, gb, ga);
    let m3 = mc.block(gb, 0, gb, ga);
    let m4 = mc.block(gb, ga, gb, ga);
    let scale_rows = |x: &ComplexMatrix| {
        ComplexMatrix::from_fn(x.rows(), x.cols(), |r, c| x[(r, c)].scale(&Float::with_val(p, &db[r])))
    };
    let rho = tau_b.mul(&m2).add(&scale_rows(&m4));
    let rho = ComplexMatrix::from_fn(gb, ga, |r, c| rho[(r, c)].scale(&(Float::with_val(p, 1) / &da[c])));
    let lhs = rho.mul(tau_a);
    let rhs = tau_b.mul(&m1).add(&scale_rows(&m3));
    let resid = lhs.dist(&rhs);
    let one = Float::with_val(p, 1);
    let mmax = m.data().iter().map(|q| Float::with_val(p, q).abs()).fold(one.clone(), |a, b| a.max(&b));
    let dmax = da.iter().chain(db).map(|d| Float::with_val(p, d)).fold(one.clone(), |a, b| a.max(&b));
    let scale = Float::with_val(p, tau_a.max_abs().max(&one) * tau_b.max_abs().max(&one))
        * mmax
        * dmax
        * (ga.max(gb) as u32);
    (rho, resid, scale)
}

/// Analytic representation `(tau N_2 + D N_4) D^-1` of a rational lattice
/// matrix on a fixed variety, without validation.
pub fn analytic_of(av: &PolarizedAV, n: &RatMatrix) -> ComplexMatrix {
    let t = av.tau.tau();
    analytic_rep(t, av.ptype.d(), t, av.ptype.d(), n).0
}

/// Endomorphism given by its rational representation, validated against
/// the period data.
#[derive(Clone, Debug)]
pub struct Endomorphism {
    av: PolarizedAV,
    rho_r: IntMatrix,
    rho_a: ComplexMatrix,
}

pub fn validate_endomorphism(av: &PolarizedAV, m: &IntMatrix) -> Result<Endomorphism, AbelianError> {
    validate_endomorphism_with_tol(av, m, &default_tol(av.prec()))
}

/// Computes `rho_a = (tau M_2 + D M_4) D^-1` and checks
/// `rho_a tau = tau M_1 + D M_3` up to `tol` times the input scale.
pub fn validate_endomorphism_with_tol(
    av: &PolarizedAV,
    m: &IntMatrix,
    tol: &Float,
) -> Result<Endomorphism, AbelianError> {
    let g = av.g();
    if m.rows() != 2 * g || m.cols() != 2 * g {
        return Err(AbelianError::DimensionMismatch);
    }
    let t = av.tau.tau();
    let (rho_a, resid, scale) = analytic_rep(t, av.ptype.d(), t, av.ptype.d(), &m.to_rational());
    if resid > Float::with_val(av.prec(), &scale * tol) {
        return Err(AbelianError::NotAnEndomorphism(log2_f(&resid)));
    }
    Ok(Endomorphism { av: av.clone(), rho_r: m.clone(), rho_a })
}

impl Endomorphism {
    /// Multiplication by `n`.
    pub fn multiplication(av: &PolarizedAV, n: i64) -> Self {
        let g = av.g();
        let m = IntMatrix::identity(2 * g).scale(&Integer::from(n));
        let p = av.prec();
        let rho_a = ComplexMatrix::identity(g, p).scale(&Complex::from_i64(p, n));
        Endomorphism { av: av.clone(), rho_r: m, rho_a }
    }

    pub fn av(&self) -> &PolarizedAV {
        &self.av
    }

    pub fn g(&self) -> usize {
        self.av.g()
    }

    pub fn rho_r(&self) -> &IntMatrix {
        &self.rho_r
    }

    pub fn rho_a(&self) -> &ComplexMatrix {
        &self.rho_a
    }

    pub fn is_zero(&self) -> bool {
        self.rho_r.is_zero()
    }

    /// `self . other`.
    pub fn compose(&self, other: &Self) -> Self {
        Endomorphism {
            av: self.av.clone(),
            rho_r: self.rho_r.mul(&other.rho_r),
            rho_a: self.rho_a.mul(&other.rho_a),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Endomorphism {
            av: self.av.clone(),
            rho_r: self.rho_r.add(&other.rho_r),
            rho_a: self.rho_a.add(&other.rho_a),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Endomorphism {
            av: self.av.clone(),
            rho_r: self.rho_r.sub(&other.rho_r),
            rho_a: self.rho_a.sub(&other.rho_a),
        }
    }

    pub fn scale(&self, n: i64) -> Self {
        let p = self.av.prec();
        Endomorphism {
            av: self.av.clone(),
            rho_r: self.rho_r.scale(&Integer::from(n)),
            rho_a: self.rho_a.scale(&Complex::from_i64(p, n)),
        }
    }

    /// `f^dagger` as an endomorphism, when its rational representation is
    /// integral (always the case for principal polarizations).
    pub fn dagger(&self) -> Option<Self> {
        let r = rosati(self).to_integer()?;
        let rho_a = analytic_of(&self.av, &r.to_rational());
        Some(Endomorphism { av: self.av.clone(), rho_r: r, rho_a })
    }
}

/// Rosati involution on rational representations, `E^-1 M^t E`.
pub fn rosati_of(ptype: &PolarizationType, m: &RatMatrix) -> RatMatrix {
    let e = ptype.e_matrix().to_rational();
    let ei = e.inverse().expect("E is invertible");
    ei.mul(&m.transpose()).mul(&e)
}

/// `rho_r(f^dagger)` exactly.
pub fn rosati(f: &Endomorphism) -> RatMatrix {
    rosati_of(f.av.ptype(), &f.rho_r.to_rational())
}

/// Max deviation between `E^-1 M^t E` and `S^-1 M^t S`.
pub fn rosati_cross_check(f: &Endomorphism) -> Float {
    let p = f.av.prec();
    let s = f.av.gram_s();
    let si = s.inverse().expect("S is positive definite");
    let mr = f.rho_r.to_real(p);
    let via_s = si.mul(&mr.transpose()).mul(&s);
    let via_e = rosati(f).to_real(p);
    via_s.sub(&via_e).max_abs()
}

/// `tr rho_r(f^dagger f) = 2 sum_{i,j} (d_i / d_j)(m_ij m_{i+g,j+g} - m_{i,j+g} m_{i+g,j})`.
pub fn trace_form_of(ptype: &PolarizationType, m: &RatMatrix) -> Rational {
    let g = ptype.g();
    let d = ptype.d();
    let mut t = Rational::new();
    for i in 0..g {
        for j in 0..g {
            let a = Rational::from(&m[(i, j)] * &m[(i + g, j + g)]);
            let b = Rational::from(&m[(i, j + g)] * &m[(i + g, j)]);
            t += Rational::from((&d[i], &d[j])) * (a - b);
        }
    }
    t * 2u32
}

pub fn trace_form(f: &Endomorphism) -> Rational {
    trace_form_of(f.av.ptype(), &f.rho_r.to_rational())
}

/// The constants `c_1, c_2` bounding `||rho_r(f)||` by `sqrt tr(f^dagger f)`.
#[derive(Clone, Debug)]
pub struct NormConstants {
    pub c1: Float,
    pub c2: Float,
    /// Sharper `c_2` valid when `Gamma` is the full symplectic group.
    pub c2_sharp: Option<Float>,
    pub deltas: Deltas,
}

/// `z` must be the reduced representative of the variety's `tau`. The sharper
/// constant is produced when `cosets` is `{identity}`.
pub fn norm_bound_constants(av: &PolarizedAV, z: &SiegelPoint, cosets: &[SymplecticMatrix]) -> NormConstants {
    let g = av.g();
    let gi = g as i32;
    let p = av.prec();
    let f = |x: u32| Float::with_val(p, x);
    let pt = av.ptype();
    let d1 = Float::with_val(p, &pt.d()[0]);
    let dg = Float::with_val(p, pt.max_d());
    let c1 = (d1 / dg).sqrt() / (2 * g as u32);

    let deltas = delta_constants(g, cosets, p);
    let dnorm = Float::with_val(p, pt.max_d());
    let deg = Float::with_val(p, pt.degree());
    let m = z.y().max_abs().max(&f(1));
    let dpart = Float::with_val(p, dnorm.clone().pow(2 * gi + 2) / &deg);

    let delta = f(2).pow(2 * gi + 4)
        * f(g as u32).pow(2 * gi + 5)
        * Float::with_val(p, deltas.d2.square_ref())
        * &deltas.d4;
    let c2 = delta * &dpart * m.clone().pow(2 * gi * gi * gi + 3 * gi * gi + 2 * gi + 1);

    let trivial = cosets.len() == 1 && cosets[0].is_identity();
    let c2_sharp = trivial.then(|| {
        let k = f(2) * f(3).sqrt() / 3u32;
        f(2).pow(4 * gi + 5)
            * f(g as u32).pow(gi * gi + 3 * gi + 3)
            * k.pow(gi * gi * (gi + 1))
            * &dpart
            * m.pow(gi * (gi + 1))
    });
    NormConstants { c1, c2, c2_sharp, deltas }
}

/// Slacks of `c_1 sqrt(tr) <= ||rho_r|| <= c_2 sqrt(tr)`.
#[derive(Clone, Debug)]
pub struct NormBoundReport {
    pub norm: Integer,
    pub trace: Rational,
    /// `||rho_r|| - c_1 sqrt(tr)`.
    pub lower_slack: Float,
    /// `c_2 sqrt(tr) - ||rho_r||`, with `c_2 sqrt(tr)` rounded down.
    pub upper_slack: Float,
    pub upper_slack_sharp: Option<Float>,
}

pub fn verify_norm_bounds(f: &Endomorphism, c: &NormConstants) -> Result<NormBoundReport, AbelianError> {
    if f.is_zero() {
        return Err(AbelianError::ZeroEndomorphism);
    }
    let p = f.av.prec();
    let g = f.g() as u32;
    let pt = f.av.ptype();
    let norm = f.rho_r.max_abs();
    let trace = trace_form(f);
    // exact lower bound: d_1 tr <= 4 g^2 d_g ||M||^2
    let lhs = Rational::from(&pt.d()[0] * &trace);
    let rhs = Rational::from(Integer::from(4 * g * g) * pt.max_d() * Integer::from(norm.square_ref()));
    let lower_ok = lhs <= rhs;
    let sqrt_tr = Float::with_val(p, &trace).sqrt();
    let nf = Float::with_val(p, &norm);
    let lower_slack = Float::with_val(p, &nf - Float::with_val(p, &c.c1 * &sqrt_tr));
    let shrink = Float::with_val(p, 1) - pow2(p, 16 - p as i32);
    let upper = |c2: &Float| Float::with_val(p, c2 * &sqrt_tr) * &shrink - &nf;
    let upper_slack = upper(&c.c2);
    let upper_slack_sharp = c.c2_sharp.as_ref().map(upper);
    let report = NormBoundReport { norm, trace, lower_slack, upper_slack, upper_slack_sharp };
    let upper_ok = report.upper_slack >= 0 && report.upper_slack_sharp.as_ref().is_none_or(|s| *s >= 0);
    if !lower_ok || !upper_ok {
        return Err(AbelianError::BoundViolation(format!(
            "rho_r = {:?}, trace = {}, norm = {}, lower_ok = {lower_ok}, upper_ok = {upper_ok}",
            f.rho_r, report.trace, report.norm
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn point(re: f64, im: f64) -> SiegelPoint {
        SiegelPoint::diagonal(&[Complex::from_f64(P, re, im)]).unwrap()
    }

    fn av_i() -> PolarizedAV {
        PolarizedAV::principal(point(0.0, 1.0)).unwrap()
    }

    fn rot() -> IntMatrix {
        IntMatrix::from_i64(2, 2, &[0, 1, -1, 0])
    }

    #[test]
    fn type_chain_is_enforced() {
        assert!(PolarizationType::from_u64(&[1, 2, 6]).is_ok());
        assert_eq!(PolarizationType::from_u64(&[2, 3]), Err(AbelianError::InvalidType));
        assert_eq!(PolarizationType::from_u64(&[]), Err(AbelianError::InvalidType));
    }

    #[test]
    fn validate_examples() {
        let f = validate_endomorphism(&av_i(), &rot()).unwrap();
        let i = Complex::i(P);
        assert!((&f.rho_a()[(0, 0)] - &i).abs() < 1e-35);
        let av = PolarizedAV::principal(point(0.3, 1.7)).unwrap();
        assert!(matches!(validate_endomorphism(&av, &rot()), Err(AbelianError::NotAnEndomorphism(_))));
        let m3 = IntMatrix::identity(2).scale(&Integer::from(3));
        let f3 = validate_endomorphism(&av, &m3).unwrap();
        assert!((&f3.rho_a()[(0, 0)] - &Complex::from_i64(P, 3)).abs() < 1e-35);
    }

    #[test]
    fn rosati_examples() {
        let f = validate_endomorphism(&av_i(), &rot()).unwrap();
        let r = rosati(&f);
        assert_eq!(r, IntMatrix::from_i64(2, 2, &[0, -1, 1, 0]).to_rational());
        assert!(rosati_cross_check(&f) < 1e-35);
        let back = rosati_of(f.av().ptype(), &r);
        assert_eq!(back, rot().to_rational());
    }

    #[test]
    fn trace_examples() {
        let f = validate_endomorphism(&av_i(), &rot()).unwrap();
        assert_eq!(trace_form(&f), 2);
        let n = Endomorphism::multiplication(&av_i(), 5);
        assert_eq!(trace_form(&n), 2 * 25);
        assert_eq!(trace_form(&Endomorphism::multiplication(&av_i(), 0)), 0);
        // agreement with tr(E^-1 M^t E M)
        let via = rosati(&f).mul(&f.rho_r().to_rational()).trace();
        assert_eq!(via, trace_form(&f));
    }

    #[test]
    fn det_s_is_d_squared_for_nonprincipal() {
        let t = SiegelPoint::from_f64(2, &[0.1, 0.2, 0.2, -0.3], &[1.5, 0.4, 0.4, 2.0], P).unwrap();
        let av = PolarizedAV::new(t, PolarizationType::from_u64(&[2, 6]).unwrap()).unwrap();
        assert!(av.det_s_residual() < 1e-30);
    }

    #[test]
    fn norm_constant_examples() {
        let av = av_i();
        let c = norm_bound_constants(&av, av.tau(), &[SymplecticMatrix::identity(1)]);
        assert!((c.c1.to_f64() - 0.5).abs() < 1e-15);
        let sharp = c.c2_sharp.clone().unwrap();
        assert!((sharp.to_f64() - 2048.0 / 3.0).abs() < 1e-9);
        let f = validate_endomorphism(&av, &rot()).unwrap();
        let r = verify_norm_bounds(&f, &c).unwrap();
        assert_eq!(r.norm, 1);
        assert!(verify_norm_bounds(&Endomorphism::multiplication(&av, 0), &c).is_err());

        let t = SiegelPoint::from_f64(2, &[0.0; 4], &[1.0, 0.0, 0.0, 2.0], P).unwrap();
        let av2 = PolarizedAV::principal(t).unwrap();
        let c2 = norm_bound_constants(&av2, av2.tau(), &[SymplecticMatrix::identity(2)]);
        assert!(c2.c2.is_finite() && c2.c2 >= c2.c1);
    }
}
