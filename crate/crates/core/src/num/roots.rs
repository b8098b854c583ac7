use rug::float::Constant;
use rug::Float;

use super::complex::Complex;
use super::poly::RatPoly;

/// Failure of the simultaneous root iteration to converge.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("root iteration did not converge after {iterations} iterations (worst residual 2^{log2_residual:.1})")]
pub struct RootConvergenceError {
    pub iterations: usize,
    pub log2_residual: f64,
}

/// All complex roots of a polynomial with complex coefficients (lowest
/// degree first) by the Aberth-Ehrlich iteration.
///
/// A root `z` is accepted when `|p(z)| <= 2^(10 - prec) * sum |c_i| |z|^i`,
/// which is the rounding-error floor of Horner evaluation up to a constant.
pub fn aberth(coeffs: &[Complex], prec: u32) -> Result<Vec<Complex>, RootConvergenceError> {
    let mut c: Vec<Complex> = coeffs.iter().map(|z| z.with_prec(prec)).collect();
    while c.last().is_some_and(|z| z.is_zero()) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    // Roots at zero are peeled off directly; the iteration dislikes them.
    let zeros = c.iter().take_while(|z| z.is_zero()).count();
    let c: Vec<Complex> = c.split_off(zeros);
    let n = n - zeros;
    let mut roots = vec![Complex::zero(prec); zeros];
    if n == 0 {
        return Ok(roots);
    }
    let lead = c[n].clone();
    let monic: Vec<Complex> = c.iter().map(|a| a / &lead).collect();
    let abs_c: Vec<Float> = monic.iter().map(|a| a.abs()).collect();
    let dmonic: Vec<Complex> = (1..=n)
        .map(|i| monic[i].scale(&Float::with_val(prec, i as u32)))
        .collect();

    // Initial radius from the geometric mean of the roots, on a circle whose
    // angle offset avoids symmetric stalls.
    let r0 = {
        let a0 = abs_c[0].clone();
        let e = Float::with_val(prec, 1) / n as u32;
        let r = Float::with_val(prec, a0.ln_ref()) * e;
        r.exp()
    };
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let theta: Float = Float::with_val(prec, &two_pi * k as u32) / n as u32 + 0.4;
            let (s, co) = theta.sin_cos(Float::new(prec));
            let rk = Float::with_val(prec, &r0 * (1.0 + 0.01 * k as f64));
            Complex::new(Float::with_val(prec, &rk * &co), rk * s)
        })
        .collect();

    let tol_exp = 10i32 - prec as i32;
    let max_iter = 400 + 20 * n;
    let mut converged = vec![false; n];
    let mut worst = f64::NEG_INFINITY;
    for iter in 0..max_iter {
        let mut all = true;
        worst = f64::NEG_INFINITY;
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let zi = z[i].clone();
            let (pv, scale) = horner_with_scale(&monic, &abs_c, &zi);
            let pva = pv.abs();
            let bound = Float::with_val(prec, &scale * pow2(prec, tol_exp));
            if pva <= bound {
                converged[i] = true;
                continue;
            }
            let lr = log2_ratio(&pva, &scale);
            worst = worst.max(lr);
            all = false;
            let dv = horner(&dmonic, &zi);
            let ratio = &pv / &dv;
            let mut s = Complex::zero(prec);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let d = &zi - zj;
                    if !d.is_zero() {
                        s = &s + &d.recip();
                    }
                }
            }
            let denom = &Complex::one(prec) - &(&ratio * &s);
            let w = &ratio / &denom;
            if !w.is_finite() {
                // nudge off the singular configuration
                z[i] = &zi + &Complex::from_f64(prec, 1e-3 * (iter as f64 + 1.0), 1e-3);
                continue;
            }
            let next = &zi - &w;
            // stop when the correction is below the representable spacing
            if w.abs() <= Float::with_val(prec, zi.abs() * pow2(prec, 2 - prec as i32)) {
                converged[i] = true;
            }
            z[i] = next;
        }
        if all {
            roots.extend(z);
            return Ok(roots);
        }
    }
    if converged.iter().all(|&b| b) {
        roots.extend(z);
        return Ok(roots);
    }
    Err(RootConvergenceError { iterations: max_iter, log2_residual: worst })
}

fn pow2(prec: u32, e: i32) -> Float {
    Float::with_val(prec, 1) << e
}

fn log2_ratio(a: &Float, b: &Float) -> f64 {
    let (ma, ea) = a.to_f64_exp();
    let (mb, eb) = b.to_f64_exp();
    ma.abs().log2() + ea as f64 - mb.abs().log2() - eb as f64
}

fn horner(c: &[Complex], z: &Complex) -> Complex {
    let mut acc = Complex::zero(z.prec());
    for a in c.iter().rev() {
        acc = &(&acc * z) + a;
    }
    acc
}

fn horner_with_scale(c: &[Complex], abs_c: &[Float], z: &Complex) -> (Complex, Float) {
    let p = z.prec();
    let za = z.abs();
    let mut acc = Complex::zero(p);
    let mut s = Float::new(p);
    for (a, aa) in c.iter().zip(abs_c).rev() {
        acc = &(&acc * z) + a;
        s = Float::with_val(p, &s * &za) + aa;
    }
    (acc, s)
}

/// Complex roots of a rational polynomial.
pub fn rat_poly_roots(p: &RatPoly, prec: u32) -> Result<Vec<Complex>, RootConvergenceError> {
    let c: Vec<Complex> = p.coeffs().iter().map(|a| Complex::from_rational(prec, a)).collect();
    aberth(&c, prec)
}

/// Mahler measure `|lead| * prod max(1, |root|)` of a rational polynomial.
pub fn mahler_measure(p: &RatPoly, prec: u32) -> Result<Float, RootConvergenceError> {
    let work = prec + 32;
    let roots = rat_poly_roots(p, work)?;
    let mut m = Float::with_val(work, &p.lead()).abs();
    for r in roots {
        let a = r.abs();
        if a > 1 {
            m *= a;
        }
    }
    Ok(Float::with_val(prec, m))
}
