//! The Siegel upper half space, the symplectic action, reduction to the
//! fundamental domain and the explicit constants attached to a list of
//! coset representatives.

mod reduce;

pub use reduce::{
    boundary_set, membership, membership_with_tol, minkowski_candidates, minkowski_reduce, reduce, reduce_with,
    DomainReport, ReduceConfig, Reduction, DEFAULT_MEMBERSHIP_TOL,
};

use rug::ops::Pow;
use rand::Rng;
use rug::{Float, Integer};

use crate::num::{Complex, ComplexMatrix, IntMatrix, RealMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SiegelError {
    #[error("matrix is not square of the expected size")]
    DimensionMismatch,
    #[error("tau is not symmetric (max asymmetry 2^{0:.1})")]
    NotSymmetric(f64),
    #[error("imaginary part is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("C tau + D is singular at working precision (|det| = 2^{log2_det:.1})")]
    SingularCocycle { log2_det: f64 },
    #[error("imaginary-part transformation identity failed (residual 2^{0:.1})")]
    ImTransformMismatch(f64),
    #[error("reduction did not settle within {0} steps")]
    ReductionDiverged(usize),
    #[error("genus {0} is not supported here")]
    UnsupportedGenus(usize),
}

pub(crate) fn log2_f(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

pub(crate) fn pow2(prec: u32, e: i32) -> Float {
    Float::with_val(prec, 1) << e
}

/// A point of the Siegel upper half space.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint {
    tau: ComplexMatrix,
}

impl SiegelPoint {
    /// Validate symmetry and positive definiteness of the imaginary part.
    pub fn new(tau: ComplexMatrix) -> Result<Self, SiegelError> {
        if !tau.is_square() || tau.rows() == 0 {
            return Err(SiegelError::DimensionMismatch);
        }
        let p = tau.prec();
        let scale = Float::with_val(p, tau.max_abs()).max(&Float::with_val(p, 1));
        let asym = tau.dist(&tau.transpose());
        if asym >= Float::with_val(p, &scale * pow2(p, 8 - p as i32)) {
            return Err(SiegelError::NotSymmetric(log2_f(&asym)));
        }
        let y = tau.im().symmetrize();
        let l = y.cholesky().ok_or(SiegelError::NotPositiveDefinite)?;
        let floor = pow2(p, 8 - p as i32);
        for i in 0..l.rows() {
            if Float::with_val(p, l[(i, i)].square_ref()) <= floor {
                return Err(SiegelError::NotPositiveDefinite);
            }
        }
        Ok(SiegelPoint { tau: tau.symmetrize() })
    }

    pub fn from_f64(g: usize, re: &[f64], im: &[f64], prec: u32) -> Result<Self, SiegelError> {
        if re.len() != g * g || im.len() != g * g {
            return Err(SiegelError::DimensionMismatch);
        }
        SiegelPoint::new(ComplexMatrix::from_fn(g, g, |r, c| Complex::from_f64(prec, re[r * g + c], im[r * g + c])))
    }

    /// Random point with `X` uniform in `[-3, 3]` and `Y = L L^t` for a lower
    /// triangular `L` with entries in `[0.05, 2]`.
    pub fn random<R: Rng + ?Sized>(g: usize, rng: &mut R, prec: u32) -> Self {
        let mut x = vec![0.0; g * g];
        let mut l = vec![0.0; g * g];
        for r in 0..g {
            for c in 0..=r {
                let v = rng.gen_range(-3.0..=3.0);
                x[r * g + c] = v;
                x[c * g + r] = v;
                l[r * g + c] = rng.gen_range(0.05..=2.0);
            }
        }
        let y: Vec<f64> = (0..g * g)
            .map(|i| {
                let (r, c) = (i / g, i % g);
                (0..g).map(|k| l[r * g + k] * l[c * g + k]).sum()
            })
            .collect();
        SiegelPoint::from_f64(g, &x, &y, prec).expect("L L^t is positive definite")
    }

    /// Diagonal point `diag(z_1, ..., z_g)`.
    pub fn diagonal(entries: &[Complex]) -> Result<Self, SiegelError> {
        let g = entries.len();
        let prec = entries.iter().map(|z| z.prec()).max().unwrap_or(53);
        SiegelPoint::new(ComplexMatrix::from_fn(g, g, |r, c| {
            if r == c {
                entries[r].clone()
            } else {
                Complex::zero(prec)
            }
        }))
    }

    pub fn g(&self) -> usize {
        self.tau.rows()
    }

    pub fn prec(&self) -> u32 {
        self.tau.prec()
    }

    pub fn tau(&self) -> &ComplexMatrix {
        &self.tau
    }

    pub fn x(&self) -> RealMatrix {
        self.tau.re()
    }

    pub fn y(&self) -> RealMatrix {
        self.tau.im()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        SiegelPoint { tau: self.tau.map(|z| z.with_prec(prec)) }
    }

    #[cfg(test)]
    pub(crate) fn from_raw(tau: ComplexMatrix) -> Self {
        SiegelPoint { tau }
    }
}

/// An element of `Sp_2g(Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix {
    m: IntMatrix,
}

impl SymplecticMatrix {
    pub fn new(m: IntMatrix) -> Result<Self, SiegelError> {
        if !m.is_square() || !m.rows().is_multiple_of(2) || m.rows() == 0 {
            return Err(SiegelError::DimensionMismatch);
        }
        if !m.is_symplectic() {
            return Err(SiegelError::NotSymplectic);
        }
        Ok(SymplecticMatrix { m })
    }

    pub fn from_i64(g: usize, entries: &[i64]) -> Result<Self, SiegelError> {
        if entries.len() != 4 * g * g {
            return Err(SiegelError::DimensionMismatch);
        }
        SymplecticMatrix::new(IntMatrix::from_i64(2 * g, 2 * g, entries))
    }

    pub fn identity(g: usize) -> Self {
        SymplecticMatrix { m: IntMatrix::identity(2 * g) }
    }

    /// `[[0, -I], [I, 0]]`, acting as `tau -> -tau^{-1}`.
    pub fn inversion(g: usize) -> Self {
        SymplecticMatrix { m: IntMatrix::j(g).neg() }
    }

    /// `[[I, S], [0, I]]` for symmetric integer `S`.
    pub fn translation(s: &IntMatrix) -> Result<Self, SiegelError> {
        if !s.is_symmetric() {
            return Err(SiegelError::NotSymplectic);
        }
        let g = s.rows();
        let id = IntMatrix::identity(g);
        Ok(SymplecticMatrix { m: IntMatrix::from_blocks(&id, s, &IntMatrix::zeros(g, g), &id) })
    }

    /// `[[U^t, 0], [0, U^{-1}]]`, acting as `tau -> U^t tau U`.
    pub fn rotation(u: &IntMatrix) -> Result<Self, SiegelError> {
        let inv = u.inverse_unimodular().ok_or(SiegelError::NotSymplectic)?;
        let g = u.rows();
        let z = IntMatrix::zeros(g, g);
        Ok(SymplecticMatrix { m: IntMatrix::from_blocks(&u.transpose(), &z, &z, &inv) })
    }

    /// Partial inversion on the coordinates flagged in `mask`.
    pub fn partial_inversion(mask: &[bool]) -> Self {
        let g = mask.len();
        let diag = |f: &dyn Fn(bool) -> i64| IntMatrix::from_fn(g, g, |r, c| Integer::from(if r == c { f(mask[r]) } else { 0 }));
        let a = diag(&|k| if k { 0 } else { 1 });
        let b = diag(&|k| if k { -1 } else { 0 });
        let c = diag(&|k| if k { 1 } else { 0 });
        SymplecticMatrix { m: IntMatrix::from_blocks(&a, &b, &c, &a) }
    }

    pub fn g(&self) -> usize {
        self.m.rows() / 2
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.m
    }

    pub fn a(&self) -> IntMatrix {
        let g = self.g();
        self.m.block(0, 0, g, g)
    }

    pub fn b(&self) -> IntMatrix {
        let g = self.g();
        self.m.block(0, g, g, g)
    }

    pub fn c(&self) -> IntMatrix {
        let g = self.g();
        self.m.block(g, 0, g, g)
    }

    pub fn d(&self) -> IntMatrix {
        let g = self.g();
        self.m.block(g, g, g, g)
    }

    pub fn mul(&self, o: &Self) -> Self {
        SymplecticMatrix { m: self.m.mul(&o.m) }
    }

    /// Inverse `-J M^t J`, exact.
    pub fn inverse(&self) -> Self {
        let j = IntMatrix::j(self.g());
        SymplecticMatrix { m: j.mul(&self.m.transpose()).mul(&j).neg() }
    }

    pub fn is_identity(&self) -> bool {
        self.m == IntMatrix::identity(self.m.rows())
    }

    /// `M = +-1`, which acts trivially.
    pub fn is_plus_minus_identity(&self) -> bool {
        self.is_identity() || self.m.neg() == IntMatrix::identity(self.m.rows())
    }

    /// `max(||C||, ||D||)` in the max-entry norm.
    pub fn cd_norm(&self) -> Integer {
        self.c().max_abs().max(self.d().max_abs())
    }
}

/// `det(C Z + D)` at the precision of `z`.
pub fn cocycle_det(s: &SymplecticMatrix, z: &ComplexMatrix) -> Complex {
    let p = z.prec();
    let c = s.c().to_complex(p);
    let d = s.d().to_complex(p);
    c.mul(z).add(&d).det_field()
}

/// Symplectic action without validation, at the precision of `z`.
pub(crate) fn act_raw(s: &SymplecticMatrix, z: &ComplexMatrix) -> Option<ComplexMatrix> {
    let p = z.prec();
    let num = s.a().to_complex(p).mul(z).add(&s.b().to_complex(p));
    let den = s.c().to_complex(p).mul(z).add(&s.d().to_complex(p));
    let inv = den.inverse()?;
    Some(num.mul(&inv).symmetrize())
}

/// `(A tau + B)(C tau + D)^{-1}`, with the imaginary-part transformation
/// identity checked on the result.
pub fn act(s: &SymplecticMatrix, tau: &SiegelPoint) -> Result<SiegelPoint, SiegelError> {
    if s.g() != tau.g() {
        return Err(SiegelError::DimensionMismatch);
    }
    let p = tau.prec();
    let w = p + 32;
    let t = tau.tau.map(|z| z.with_prec(w));
    let c = s.c().to_complex(w);
    let d = s.d().to_complex(w);
    let den = c.mul(&t).add(&d);
    let det = den.det_field().abs();
    if det < pow2(w, 8 - p as i32) {
        return Err(SiegelError::SingularCocycle { log2_det: log2_f(&det) });
    }
    let den_inv = den.inverse().ok_or(SiegelError::SingularCocycle { log2_det: f64::NEG_INFINITY })?;
    let num = s.a().to_complex(w).mul(&t).add(&s.b().to_complex(w));
    let z = num.mul(&den_inv).symmetrize();

    let conj_den = c.mul(&t.conj()).add(&d);
    let conj_inv = conj_den.inverse().ok_or(SiegelError::SingularCocycle { log2_det: f64::NEG_INFINITY })?;
    let rhs = den_inv.transpose().mul(&t.im().to_complex()).mul(&conj_inv);
    let resid = z.im().to_complex().dist(&rhs);
    let scale = z.im().max_abs().max(&Float::with_val(w, 1));
    if resid > Float::with_val(w, &scale * pow2(w, 20 - p as i32)) {
        return Err(SiegelError::ImTransformMismatch(log2_f(&resid)));
    }
    SiegelPoint::new(z.map(|x| x.with_prec(p)))
}

/// The four constants bounding `Im`, `Re`, `det Im` and `(Im)^{-1}` of a
/// coset translate of a reduced point.
#[derive(Clone, Debug, PartialEq)]
pub struct Deltas {
    pub d1: Float,
    pub d2: Float,
    pub d3: Float,
    pub d4: Float,
}

/// Closed forms for the four constants, maximized over `cosets`.
pub fn delta_constants(g: usize, cosets: &[SymplecticMatrix], prec: u32) -> Deltas {
    assert!(!cosets.is_empty(), "coset list must be nonempty");
    let cd = cosets.iter().map(|s| s.cd_norm()).max().expect("nonempty");
    let sn = cosets.iter().map(|s| s.matrix().max_abs()).max().expect("nonempty");
    let f = |x: f64| Float::with_val(prec, x);
    let gi = g as i32;
    let gf = Float::with_val(prec, g as u32);
    let cd = Float::with_val(prec, &cd);
    let sn = Float::with_val(prec, &sn);
    let five_halves = f(2.5);
    let sqrt3_2 = Float::with_val(prec, 3).sqrt() / 2u32;

    let d1 = five_halves.clone().pow(2 * gi - 2) * gf.clone().pow(3 * gi) * cd.clone().pow(2 * gi - 2);
    let g_exp = Float::with_val(prec, 3 * g as u32) / 2u32 + 1u32;
    let d2 = five_halves.clone().pow(gi) * gf.clone().pow(&g_exp) * sn.pow(gi);
    let d3 = sqrt3_2.pow(gi * gi) * f(0.4).pow(2 * gi) * gf.clone().pow(-3 * gi) * cd.pow(-2 * gi);
    let half_g = Float::with_val(prec, g as u32) / 2u32;
    let d4 = gf.pow(&half_g) * d1.clone().pow(gi - 1) / &d3;
    Deltas { d1, d2, d3, d4 }
}

/// Margins of the four coset-translate inequalities; all nonnegative when
/// the bounds hold.
#[derive(Clone, Debug)]
pub struct DeltaCheck {
    pub im_norm: Float,
    pub re_norm: Float,
    pub det_im: Float,
    pub inv_im_norm: Float,
}

impl DeltaCheck {
    pub fn all_ok(&self) -> bool {
        self.im_norm >= 0 && self.re_norm >= 0 && self.det_im >= 0 && self.inv_im_norm >= 0
    }

    pub fn worst_relative(&self) -> f64 {
        [&self.im_norm, &self.re_norm, &self.det_im, &self.inv_im_norm]
            .iter()
            .map(|x| x.to_f64())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Check the four bounds for `tau = sigma . z` with `z` reduced. Margins are
/// reported relative to the bound (`1 - lhs / rhs`).
pub fn check_delta_bounds(z: &SiegelPoint, tau: &SiegelPoint, deltas: &Deltas) -> DeltaCheck {
    let p = tau.prec();
    let g = z.g() as i32;
    let m = z.y().max_abs().max(&Float::with_val(p, 1));
    let y = tau.y();
    let x = tau.x();
    let rel = |lhs: Float, rhs: Float| Float::with_val(p, 1) - lhs / rhs;
    let im_norm = rel(y.max_abs(), Float::with_val(p, &deltas.d1 * m.clone().pow(2 * g - 1)));
    let re_norm = rel(x.max_abs(), Float::with_val(p, &deltas.d2 * m.clone().pow(g)));
    // det(Y) >= d3 / m^{2g}  <=>  1 - (d3 / m^{2g}) / det(Y) >= 0
    let det_y = y.det_field();
    let det_im = rel(Float::with_val(p, &deltas.d3 / m.clone().pow(2 * g)), det_y);
    let inv = y.inverse().map(|i| i.max_abs()).unwrap_or_else(|| Float::with_val(p, f64::INFINITY));
    let inv_im_norm = rel(inv, Float::with_val(p, &deltas.d4 * m.pow(2 * g * g - g + 1)));
    DeltaCheck { im_norm, re_norm, det_im, inv_im_norm }
}

/// `(sqrt 3 / 2)^{g^2}`, the lower bound for `det Im` on the fundamental
/// domain.
pub fn det_im_floor(g: usize, prec: u32) -> Float {
    let s = Float::with_val(prec, 3).sqrt() / 2u32;
    s.pow((g * g) as i32)
}
