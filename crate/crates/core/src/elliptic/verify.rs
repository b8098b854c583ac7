//! Height identities on products of elliptic curves and along isogenies.

use std::collections::HashMap;

use rug::{Float, Integer, Rational};

use super::height::{canonical_height, canonical_height_x, local_height, HeightMethod, HeightValue};
use super::isogeny::TwoIsogeny;
use super::{ECPoint, EllipticCurve, EllipticError};
use crate::abelian::{alphas, cm_variety, trace_form, validate_endomorphism};
use crate::num::IntMatrix;

const PREC: u32 = 128;

/// `m1 h(P1) + m2 h(P2)`, the height attached to `m1 pr_1^*(O) + m2 pr_2^*(O)`.
#[allow(clippy::too_many_arguments)]
pub fn product_height(
    e1: &EllipticCurve,
    e2: &EllipticCurve,
    m1: i64,
    m2: i64,
    p1: &ECPoint,
    p2: &ECPoint,
    tol: f64,
) -> Result<HeightValue, EllipticError> {
    if m1 <= 0 || m2 <= 0 {
        return Err(EllipticError::NonAmpleDivisor);
    }
    let share = tol / (2.0 * m1.max(m2) as f64);
    let h1 = canonical_height(e1, p1, share)?;
    let h2 = canonical_height(e2, p2, share)?;
    let value = Float::with_val(PREC, &h1.value * m1) + Float::with_val(PREC, &h2.value * m2);
    let error_bound = Float::with_val(PREC, &h1.error_bound * m1) + Float::with_val(PREC, &h2.error_bound * m2);
    let method = if h1.method == HeightMethod::LocalDecomposition || h2.method == HeightMethod::LocalDecomposition {
        HeightMethod::LocalDecomposition
    } else {
        HeightMethod::DoublingLimit
    };
    Ok(HeightValue { value, error_bound, method, steps: h1.steps.max(h2.steps) })
}

#[derive(Clone, Debug)]
pub struct PairRatio {
    pub p1: ECPoint,
    pub p2: ECPoint,
    /// `h_D(P)` and `h_D(f(P))`.
    pub before: f64,
    pub after: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct EndoScalingReport {
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    /// `tr rho_a(f^dagger f)`, an upper bound for `alpha_plus`.
    pub trace_bound: f64,
    pub pairs: Vec<PairRatio>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Ratio closest to `alpha_minus` among pairs `(P, O)`, and to
    /// `alpha_plus` among pairs `(O, P)`.
    pub min_attained: f64,
    pub max_attained: f64,
}

/// `(1, 4)` for `(P1, P2) -> (P1, 2 P2)` on `E x E`, read off the spectral
/// data of `diag(1, 2)` on a product of two elliptic curves with the
/// product polarization.
fn endo_spectrum() -> (f64, f64, f64) {
    let s = cm_variety(&[0, 0], PREC).expect("square lattice product");
    let m = IntMatrix::from_i64(4, 4, &[1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 2]);
    let f = validate_endomorphism(&s.av, &m).expect("diagonal integer matrices are endomorphisms");
    let sp = alphas(&f).expect("real spectrum");
    let tr = Float::with_val(64, &trace_form(&f)) / 2u32;
    (sp.alpha_minus.to_f64(), sp.alpha_plus.to_f64(), tr.to_f64())
}

/// Checks `alpha_minus <= h_D(f(P)) / h_D(P) <= alpha_plus` on the pairs
/// `(P, O)`, `(O, P)`, `(P, P)` and `(P_i, P_j)` for `i < j` until `limit`
/// pairs are collected.
pub fn verify_endo_scaling(
    e: &EllipticCurve,
    points: &[ECPoint],
    limit: usize,
    tol: f64,
) -> Result<EndoScalingReport, EllipticError> {
    let mut pairs = Vec::new();
    for p in points {
        pairs.push((p.clone(), ECPoint::Infinity));
        pairs.push((ECPoint::Infinity, p.clone()));
        pairs.push((p.clone(), p.clone()));
    }
    'outer: for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            pairs.push((p.clone(), q.clone()));
            pairs.push((q.clone(), p.clone()));
            if pairs.len() >= limit {
                break 'outer;
            }
        }
    }
    pairs.truncate(limit.max(3));
    verify_endo_scaling_pairs(e, &pairs, tol)
}

pub fn verify_endo_scaling_pairs(
    e: &EllipticCurve,
    pairs: &[(ECPoint, ECPoint)],
    tol: f64,
) -> Result<EndoScalingReport, EllipticError> {
    let (alpha_minus, alpha_plus, trace_bound) = endo_spectrum();
    let htol = tol * 1e-3;
    let mut cache: HashMap<ECPoint, f64> = HashMap::new();
    let mut h = |p: &ECPoint| -> Result<f64, EllipticError> {
        if let Some(v) = cache.get(p) {
            return Ok(*v);
        }
        let v = canonical_height(e, p, htol)?.value.to_f64();
        cache.insert(p.clone(), v);
        Ok(v)
    };
    let mut out = Vec::with_capacity(pairs.len());
    let mut min_attained = f64::INFINITY;
    let mut max_attained = f64::NEG_INFINITY;
    for (p1, p2) in pairs {
        for p in [p1, p2] {
            if !e.contains(p) {
                return Err(EllipticError::NotOnCurve);
            }
        }
        let (h1, h2) = (h(p1)?, h(p2)?);
        let before = h1 + h2;
        if before < htol {
            return Err(EllipticError::TorsionPoint);
        }
        let after = h1 + h(&e.double(p2))?;
        let ratio = after / before;
        if ratio < alpha_minus - tol || ratio > alpha_plus + tol {
            return Err(EllipticError::ScalingViolation(format!(
                "P1={p1} P2={p2} ratio={ratio} window=[{alpha_minus}, {alpha_plus}]"
            )));
        }
        if p2.is_infinity() {
            min_attained = min_attained.min(ratio);
        }
        if p1.is_infinity() {
            max_attained = max_attained.max(ratio);
        }
        out.push(PairRatio { p1: p1.clone(), p2: p2.clone(), before, after, ratio });
    }
    let min_ratio = out.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = out.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    // extremes are only checked when the axis pairs were supplied
    let min_bad = min_attained.is_finite() && (min_attained - alpha_minus).abs() > tol;
    let max_bad = max_attained.is_finite() && (max_attained - alpha_plus).abs() > tol;
    if min_bad || max_bad {
        return Err(EllipticError::ScalingViolation(format!(
            "extremes not attained: (P,O) gives {min_attained}, (O,P) gives {max_attained}"
        )));
    }
    if alpha_plus > trace_bound + tol {
        return Err(EllipticError::ScalingViolation(format!("alpha_plus {alpha_plus} exceeds trace {trace_bound}")));
    }
    Ok(EndoScalingReport {
        alpha_minus,
        alpha_plus,
        trace_bound,
        pairs: out,
        min_ratio,
        max_ratio,
        min_attained,
        max_attained,
    })
}

#[derive(Clone, Debug)]
pub struct IdentityEntry {
    pub x: Option<Rational>,
    pub image_x: Option<Rational>,
    /// `h_{E2, D2}(phi(P))`.
    pub lhs: f64,
    /// `(m2 / m1) deg(phi) h_{E1, D1}(P)`.
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct IsogenyIdentityReport {
    pub entries: Vec<IdentityEntry>,
    pub max_residual: f64,
}

/// Checks the isogeny height identity for `D1 = m1 (O)`, `D2 = m2 (O)`.
pub fn verify_isogeny_identity(
    phi: &TwoIsogeny,
    m1: i64,
    m2: i64,
    points: &[ECPoint],
    tol: f64,
) -> Result<IsogenyIdentityReport, EllipticError> {
    for p in points {
        if !phi.source().contains(p) {
            return Err(EllipticError::NotOnCurve);
        }
    }
    let xs: Vec<Option<Rational>> = points.iter().map(|p| p.x().cloned()).collect();
    verify_isogeny_identity_x(phi, m1, m2, &xs, tol)
}

/// As [`verify_isogeny_identity`] for points given by their `x`-coordinate;
/// the point itself may be defined over a quadratic extension.
pub fn verify_isogeny_identity_x(
    phi: &TwoIsogeny,
    m1: i64,
    m2: i64,
    xs: &[Option<Rational>],
    tol: f64,
) -> Result<IsogenyIdentityReport, EllipticError> {
    if m1 <= 0 || m2 <= 0 {
        return Err(EllipticError::NonAmpleDivisor);
    }
    let htol = tol / (8.0 * m1.max(m2) as f64);
    let mut entries = Vec::with_capacity(xs.len());
    let mut max_residual: f64 = 0.0;
    for x in xs {
        let image_x = phi.apply_x(x.as_ref());
        let h1 = canonical_height_x(phi.source(), x.as_ref(), htol)?.value.to_f64();
        let h2 = canonical_height_x(phi.target(), image_x.as_ref(), htol)?.value.to_f64();
        let lhs = m2 as f64 * h2;
        let rhs = (m2 as f64 / m1 as f64) * phi.degree() as f64 * (m1 as f64 * h1);
        let residual = (lhs - rhs).abs();
        if residual >= tol {
            return Err(EllipticError::IdentityViolation(format!(
                "x={} lhs={lhs} rhs={rhs}",
                x.as_ref().map_or("O".to_string(), |v| v.to_string())
            )));
        }
        max_residual = max_residual.max(residual);
        entries.push(IdentityEntry { x: x.clone(), image_x, lhs, rhs, residual });
    }
    Ok(IsogenyIdentityReport { entries, max_residual })
}

/// Pair of `x`-coordinates for which `g(P1, P2) = (2 P1, P2)` scales the
/// height attached to `pr_1^*(O) - pr_2^*(O)` by more than the requested bound.
#[derive(Clone, Debug)]
pub struct NonAmpleWitness {
    pub x1: Rational,
    pub x2: Rational,
    pub h1: f64,
    pub h2: f64,
    /// `(4 h1 - h2) / (h1 - h2)`.
    pub ratio: f64,
    pub searched: usize,
}

/// Searches rational `x`-coordinates of growing height for a pair whose
/// heights nearly coincide, making the ratio exceed `bound`.
pub fn non_ample_search(e: &EllipticCurve, bound: f64, max_candidates: usize) -> Option<NonAmpleWitness> {
    let mut seen: Vec<(f64, Rational)> = Vec::new();
    let mut best: Option<NonAmpleWitness> = None;
    let mut searched = 0;
    let mut radius: i64 = 1;
    while searched < max_candidates {
        for x in shell(radius) {
            if e.rhs(&x) == 0 {
                continue;
            }
            let h = local_height(e, Some(&x)).value.to_f64();
            searched += 1;
            // the nearest neighbours in height are the best candidates
            let pos = seen.partition_point(|(v, _)| *v < h);
            for j in [pos.wrapping_sub(1), pos] {
                let Some((v, other)) = seen.get(j) else { continue };
                let (a, b, x1, x2) = if h > *v { (h, *v, &x, other) } else { (*v, h, other, &x) };
                if a - b < 1e-9 {
                    continue;
                }
                let ratio = (4.0 * a - b) / (a - b);
                if best.as_ref().is_none_or(|w| ratio > w.ratio) {
                    best = Some(NonAmpleWitness { x1: x1.clone(), x2: x2.clone(), h1: a, h2: b, ratio, searched });
                }
            }
            seen.insert(pos, (h, x));
            if best.as_ref().is_some_and(|w| w.ratio > bound) || searched >= max_candidates {
                break;
            }
        }
        if best.as_ref().is_some_and(|w| w.ratio > bound) {
            break;
        }
        radius += 1;
    }
    best.filter(|w| w.ratio > bound).map(|mut w| {
        w.searched = searched;
        w
    })
}

/// Rationals `n/d` in lowest terms with `max(|n|, d) = r`.
fn shell(r: i64) -> Vec<Rational> {
    let mut out = Vec::new();
    let coprime = |a: i64, b: i64| Integer::from(a).gcd(&Integer::from(b)) == 1;
    for n in -r..=r {
        if coprime(n, r) {
            out.push(Rational::from((n, r)));
        }
    }
    for d in 1..r {
        if coprime(r, d) {
            out.push(Rational::from((r, d)));
            out.push(Rational::from((-r, d)));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub curve: EllipticCurve,
    pub points: Vec<ECPoint>,
}

/// Curves `y^2 = x^3 + a x + b` through two small integral non-torsion
/// points, chosen deterministically.
pub fn height_corpus(size: usize) -> Vec<CorpusEntry> {
    let mut out: Vec<CorpusEntry> = Vec::new();
    for s in 2i64.. {
        for x1 in -s..=s {
            for x2 in (x1 + 1)..=s {
                for y1 in 1..=s {
                    for y2 in 1..=s {
                        if [x1.abs(), x2.abs(), y1, y2].iter().all(|v| *v < s) {
                            continue;
                        }
                        let num = y1 * y1 - y2 * y2 - x1.pow(3) + x2.pow(3);
                        if num % (x1 - x2) != 0 {
                            continue;
                        }
                        let a = num / (x1 - x2);
                        let b = y1 * y1 - x1.pow(3) - a * x1;
                        let Ok(e) = EllipticCurve::from_i64(0, a, b) else { continue };
                        if out.iter().any(|c| c.curve == e) {
                            continue;
                        }
                        let p = ECPoint::from_i64(x1, y1);
                        let q = ECPoint::from_i64(x2, y2);
                        if e.is_torsion(&p) || e.is_torsion(&q) {
                            continue;
                        }
                        out.push(CorpusEntry { curve: e, points: vec![p, q] });
                        if out.len() == size {
                            return out;
                        }
                    }
                }
            }
        }
    }
    out
}
