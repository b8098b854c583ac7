use rug::{Float, Integer};

use super::{act_raw, cocycle_det, det_im_floor, log2_f, pow2, SiegelError, SiegelPoint, SymplecticMatrix};
use crate::num::{ComplexMatrix, IntMatrix, RealMatrix};

/// Default absolute tolerance for membership checks.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-12;

/// Nonzero vectors with entries in `{-1, 0, 1}` whose first nonzero entry is
/// positive. For `g <= 4` these give the complete Minkowski conditions.
pub fn minkowski_candidates(g: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(g as u32);
    for code in 0..total {
        let mut v = Vec::with_capacity(g);
        let mut c = code;
        for _ in 0..g {
            v.push((c % 3) as i64 - 1);
            c /= 3;
        }
        match v.iter().find(|&&x| x != 0) {
            Some(&x) if x > 0 => out.push(v),
            _ => {}
        }
    }
    out
}

fn gram(y: &RealMatrix, u: &IntMatrix) -> RealMatrix {
    let p = y.prec();
    let ur = u.to_real(p);
    ur.transpose().mul(y).mul(&ur).symmetrize()
}

/// Unimodular `U` such that `U^t Y U` is Minkowski reduced (for `g <= 4`),
/// with nonnegative superdiagonal.
///
/// Alternates size reduction against earlier basis vectors with exchanging
/// a basis vector for a shorter admissible `{0, +-1}` combination.
pub fn minkowski_reduce(y: &RealMatrix) -> IntMatrix {
    let g = y.rows();
    let p = y.prec();
    let eps = pow2(p, -(p as i32) / 2);
    let cands = minkowski_candidates(g);
    let mut u = IntMatrix::identity(g);
    let mut yy = y.clone();
    for _ in 0..10_000 {
        let mut changed = false;
        // size reduction
        for k in 1..g {
            for i in (0..k).rev() {
                let r = Float::with_val(p, &yy[(i, k)] / &yy[(i, i)]).round();
                let r = r.to_integer().unwrap_or_default();
                if r != 0 {
                    let mut w = IntMatrix::identity(g);
                    w[(i, k)] = Integer::from(-&r);
                    u = u.mul(&w);
                    yy = gram(y, &u);
                    changed = true;
                }
            }
        }
        // exchange against shorter admissible vectors
        'outer: for k in 0..g {
            let threshold = Float::with_val(p, &yy[(k, k)] * (Float::with_val(p, 1) - &eps));
            for v in &cands {
                let Some(j) = (k..g).find(|&j| v[j] != 0) else { continue };
                if v.iter().enumerate().all(|(i, &x)| (i == k) == (x != 0)) {
                    continue;
                }
                let q = yy.quad_form_int(v);
                if q < threshold {
                    let mut w = IntMatrix::identity(g);
                    for (i, &x) in v.iter().enumerate() {
                        w[(i, j)] = Integer::from(x);
                    }
                    w.swap_cols(j, k);
                    u = u.mul(&w);
                    yy = gram(y, &u);
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for k in 0..g.saturating_sub(1) {
        if yy[(k, k + 1)] < 0 {
            let mut w = IntMatrix::identity(g);
            w[(k + 1, k + 1)] = Integer::from(-1);
            u = u.mul(&w);
            yy = gram(y, &u);
        }
    }
    u
}

fn unimodular_with_first_column(v: &[i64]) -> IntMatrix {
    let g = v.len();
    let j = v.iter().position(|&x| x.abs() == 1).expect("entry of absolute value one");
    let mut w = IntMatrix::identity(g);
    for (i, &x) in v.iter().enumerate() {
        w[(i, j)] = Integer::from(x);
    }
    w.swap_cols(0, j);
    w
}

fn sym_matrices(g: usize, support: &[usize]) -> Vec<IntMatrix> {
    // symmetric matrices with entries in {-1,0,1} supported on `support`
    let mut slots = Vec::new();
    for (a, &i) in support.iter().enumerate() {
        for &j in &support[a..] {
            slots.push((i, j));
        }
    }
    let mut out = Vec::new();
    for code in 0..3usize.pow(slots.len() as u32) {
        let mut s = IntMatrix::zeros(g, g);
        let mut c = code;
        for &(i, j) in &slots {
            let x = (c % 3) as i64 - 1;
            c /= 3;
            s[(i, j)] = Integer::from(x);
            s[(j, i)] = Integer::from(x);
        }
        out.push(s);
    }
    out
}

/// Finite set of symplectic matrices whose `|det(CZ + D)| >= 1` conditions
/// are checked and enforced.
///
/// * g = 1: the inversion.
/// * g = 2: conditions `|v^t Z v + d| >= 1` for primitive `v` in `{0,+-1}^2`
///   and `d` in `{0,+-1}`, and `|det(Z + S)| >= 1` for every symmetric `S`
///   with entries in `{0,+-1}`; a superset of the classical list.
/// * g = 3: the analogous rank-one and full-rank conditions plus the
///   two-coordinate partial inversions. This set is heuristic.
pub fn boundary_set(g: usize) -> Vec<SymplecticMatrix> {
    let mut out = Vec::new();
    if g == 1 {
        out.push(SymplecticMatrix::inversion(1));
        return out;
    }
    let mut first = vec![false; g];
    first[0] = true;
    let j1 = SymplecticMatrix::partial_inversion(&first);
    for v in minkowski_candidates(g) {
        let u = unimodular_with_first_column(&v);
        let rot = SymplecticMatrix::rotation(&u).expect("unimodular");
        for d in -1..=1 {
            let mut s = IntMatrix::zeros(g, g);
            s[(0, 0)] = Integer::from(d);
            let t = SymplecticMatrix::translation(&s).expect("symmetric");
            out.push(j1.mul(&t).mul(&rot));
        }
    }
    let all: Vec<usize> = (0..g).collect();
    let full = SymplecticMatrix::inversion(g);
    if g == 2 {
        for s in sym_matrices(g, &all) {
            out.push(full.mul(&SymplecticMatrix::translation(&s).expect("symmetric")));
        }
    } else {
        for code in 0..3usize.pow(g as u32) {
            let mut s = IntMatrix::zeros(g, g);
            let mut c = code;
            for i in 0..g {
                s[(i, i)] = Integer::from((c % 3) as i64 - 1);
                c /= 3;
            }
            out.push(full.mul(&SymplecticMatrix::translation(&s).expect("symmetric")));
        }
        for a in 0..g {
            for b in a + 1..g {
                let mut mask = vec![false; g];
                mask[a] = true;
                mask[b] = true;
                let pinv = SymplecticMatrix::partial_inversion(&mask);
                for s in sym_matrices(g, &[a, b]) {
                    out.push(pinv.mul(&SymplecticMatrix::translation(&s).expect("symmetric")));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct ReduceConfig {
    pub max_steps: usize,
    /// Boundary matrices; `None` selects [`boundary_set`].
    pub boundary: Option<Vec<SymplecticMatrix>>,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig { max_steps: 500, boundary: None }
    }
}

/// Result of reduction: `sigma . z = tau` for the input `tau`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub z: SiegelPoint,
    pub sigma: SymplecticMatrix,
    pub steps: usize,
}

/// Reduce with the default configuration.
pub fn reduce(tau: &SiegelPoint) -> Result<Reduction, SiegelError> {
    reduce_with(tau, &ReduceConfig::default())
}

fn half_round(x: &Float) -> Integer {
    // nearest integer, with ties resolved toward zero so |x| = 1/2 is kept
    let p = x.prec();
    if *x >= 0 {
        Float::with_val(p, x - 0.5f64).ceil().to_integer().unwrap_or_default()
    } else {
        Float::with_val(p, x + 0.5f64).floor().to_integer().unwrap_or_default()
    }
}

pub fn reduce_with(tau: &SiegelPoint, cfg: &ReduceConfig) -> Result<Reduction, SiegelError> {
    let g = tau.g();
    if !(1..=3).contains(&g) {
        return Err(SiegelError::UnsupportedGenus(g));
    }
    let p = tau.prec();
    let w = p + 64;
    let boundary = cfg.boundary.clone().unwrap_or_else(|| boundary_set(g));
    let flip_threshold = Float::with_val(w, 1) / (Float::with_val(w, 1) + pow2(w, -(p as i32) / 2));
    let start = tau.tau().map(|z| z.with_prec(w));
    let mut z = start.clone();
    let mut t = SymplecticMatrix::identity(g);
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(SiegelError::ReductionDiverged(cfg.max_steps));
        }
        let u = minkowski_reduce(&z.im().symmetrize());
        if u != IntMatrix::identity(g) {
            let s = SymplecticMatrix::rotation(&u).expect("unimodular");
            z = act_raw(&s, &z).expect("block diagonal action is regular");
            t = s.mul(&t);
        }
        let x = z.re();
        let shift = IntMatrix::from_fn(g, g, |r, c| {
            let (i, j) = if r <= c { (r, c) } else { (c, r) };
            -half_round(&x[(i, j)])
        });
        if !shift.is_zero() {
            let s = SymplecticMatrix::translation(&shift).expect("symmetric");
            z = z.add(&shift.to_complex(w));
            t = s.mul(&t);
        }
        let mut best: Option<(Float, usize)> = None;
        for (idx, b) in boundary.iter().enumerate() {
            let d = cocycle_det(b, &z).norm_sqr();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, idx));
            }
        }
        match best {
            Some((d, idx)) if d < flip_threshold => {
                if d.is_zero() {
                    return Err(SiegelError::SingularCocycle { log2_det: f64::NEG_INFINITY });
                }
                let s = &boundary[idx];
                z = act_raw(s, &z).ok_or(SiegelError::SingularCocycle { log2_det: log2_f(&d) })?;
                t = s.mul(&t);
            }
            _ => break,
        }
    }
    // recompute from the input so sigma . Z = tau holds to working precision
    let zf = act_raw(&t, &start).ok_or(SiegelError::SingularCocycle { log2_det: f64::NEG_INFINITY })?;
    let z = SiegelPoint::new(zf.map(|x| x.with_prec(p)))?;
    Ok(Reduction { z, sigma: t.inverse(), steps })
}

/// Outcome of the fundamental-domain checks. Margins are slacks of the
/// inequalities before tolerance is applied.
#[derive(Clone, Debug)]
pub struct DomainReport {
    pub re_bound_ok: bool,
    pub det_bound_ok: bool,
    pub minkowski_ok: bool,
    pub boundary_ok: bool,
    pub worst_margin: Float,
    pub checked_cosets: usize,
}

impl DomainReport {
    pub fn all_ok(&self) -> bool {
        self.re_bound_ok && self.det_bound_ok && self.minkowski_ok && self.boundary_ok
    }
}

pub fn membership(z: &SiegelPoint, cosets: &[SymplecticMatrix]) -> DomainReport {
    membership_with_tol(z, cosets, DEFAULT_MEMBERSHIP_TOL)
}

/// Check `|Re| <= 1/2`, `det Im >= (sqrt3/2)^{g^2}`, Minkowski reducedness of
/// `Im` and `|det(CZ + D)| >= 1` for each supplied matrix.
pub fn membership_with_tol(z: &SiegelPoint, cosets: &[SymplecticMatrix], tol: f64) -> DomainReport {
    let p = z.prec();
    let g = z.g();
    let mut worst = Float::with_val(p, f64::INFINITY);
    let track = |m: Float, worst: &mut Float| -> bool {
        let ok = m >= -tol;
        if m < *worst {
            *worst = m;
        }
        ok
    };

    let half = Float::with_val(p, 0.5);
    let re_margin = half - z.x().max_abs();
    let re_bound_ok = track(re_margin, &mut worst);

    let y = z.y();
    let det_margin = y.det_field() - det_im_floor(g, p);
    let det_bound_ok = track(det_margin, &mut worst);

    let mut minkowski_ok = true;
    let cands = minkowski_candidates(g);
    for k in 0..g {
        for v in &cands {
            if v[k..].iter().all(|&x| x == 0) {
                continue;
            }
            if v.iter().enumerate().all(|(i, &x)| (i == k) == (x != 0)) {
                continue;
            }
            let m = y.quad_form_int(v) - &y[(k, k)];
            minkowski_ok &= track(m, &mut worst);
        }
        if k + 1 < g {
            minkowski_ok &= track(y[(k, k + 1)].clone(), &mut worst);
        }
    }

    let mut boundary_ok = true;
    let zz: ComplexMatrix = z.tau().clone();
    for s in cosets {
        let m = cocycle_det(s, &zz).abs() - 1u32;
        boundary_ok &= track(m, &mut worst);
    }
    DomainReport { re_bound_ok, det_bound_ok, minkowski_ok, boundary_ok, worst_margin: worst, checked_cosets: cosets.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Complex;
    use crate::siegel::act;

    const P: u32 = 128;

    fn c(re: f64, im: f64) -> Complex {
        Complex::from_f64(P, re, im)
    }

    #[test]
    fn g1_translation_example() {
        let t = SiegelPoint::diagonal(&[c(5.0, 1.0)]).unwrap();
        let r = reduce(&t).unwrap();
        assert!(r.z.tau().dist(&ComplexMatrix::from_vec(1, 1, vec![c(0.0, 1.0)])) < 1e-35);
        assert_eq!(r.sigma.matrix(), &IntMatrix::from_i64(2, 2, &[1, 5, 0, 1]));
    }

    #[test]
    fn g1_inversion_example() {
        let t = SiegelPoint::diagonal(&[c(0.3, 0.4)]).unwrap();
        let r = reduce(&t).unwrap();
        assert!(r.z.tau().dist(&ComplexMatrix::from_vec(1, 1, vec![c(-0.2, 1.6)])) < 1e-14);
        let back = act(&r.sigma, &r.z).unwrap();
        assert!(back.tau().dist(t.tau()) < 1e-30);
    }

    #[test]
    fn g2_diagonal_is_fixed() {
        let t = SiegelPoint::diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]).unwrap();
        let r = reduce(&t).unwrap();
        assert!(r.sigma.is_identity());
        assert!(r.z.tau().dist(t.tau()) < 1e-35);
        let rep = membership(&t, &boundary_set(2));
        assert!(rep.all_ok(), "{rep:?}");
    }

    #[test]
    fn membership_examples() {
        let i = SiegelPoint::diagonal(&[c(0.0, 1.0)]).unwrap();
        let rep = membership(&i, &boundary_set(1));
        assert!(rep.all_ok());
        assert!(rep.worst_margin.clone().abs() < 1e-30);
        let z = SiegelPoint::diagonal(&[c(0.6, 0.8)]).unwrap();
        assert!(!membership(&z, &boundary_set(1)).re_bound_ok);
    }

    #[test]
    fn minkowski_orders_and_signs() {
        let y = RealMatrix::from_vec(2, 2, [5.0, -3.0, -3.0, 2.0].iter().map(|&x| Float::with_val(P, x)).collect());
        let u = minkowski_reduce(&y);
        assert!(u.is_unimodular());
        let r = gram(&y, &u);
        assert!(r[(0, 0)] <= r[(1, 1)]);
        assert!(r[(0, 1)] >= 0);
        assert!(Float::with_val(P, &r[(0, 1)] * 2u32) <= r[(0, 0)]);
    }

    #[test]
    fn boundary_sets_are_symplectic() {
        for g in 1..=3 {
            for s in boundary_set(g) {
                assert!(s.matrix().is_symplectic());
            }
        }
        assert_eq!(boundary_set(2).len(), 39);
    }

    #[test]
    fn reduce_is_idempotent() {
        let t = SiegelPoint::from_f64(2, &[0.3, 1.7, 1.7, -2.2], &[0.3, 0.1, 0.1, 0.25], P).unwrap();
        let r = reduce(&t).unwrap();
        let again = reduce(&r.z).unwrap();
        assert!(again.sigma.is_plus_minus_identity());
        assert!(again.z.tau().dist(r.z.tau()) < 1e-30);
        assert!(membership(&r.z, &boundary_set(2)).all_ok());
    }
}
