use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer};

use super::{
    analytic_rep, default_tol, log2_f, validate_endomorphism, validate_endomorphism_with_tol, AbelianError,
    Endomorphism, PolarizationType, PolarizedAV,
};
use crate::num::{Complex, ComplexMatrix, IntMatrix};
use crate::siegel::{act, reduce, SiegelPoint, SymplecticMatrix};

/// Imaginary quadratic point `tau` with `tau^2 = s tau + t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CmPoint {
    pub name: &'static str,
    pub s: i64,
    pub t: i64,
}

pub const CM_POINTS: [CmPoint; 4] = [
    CmPoint { name: "i", s: 0, t: -1 },
    CmPoint { name: "(1+i*sqrt3)/2", s: 1, t: -1 },
    CmPoint { name: "i*sqrt2", s: 0, t: -2 },
    CmPoint { name: "i*sqrt5", s: 0, t: -5 },
];

impl CmPoint {
    pub fn tau(&self, prec: u32) -> Complex {
        let disc = -(self.s * self.s + 4 * self.t);
        let re = Float::with_val(prec, self.s) / 2u32;
        let im = Float::with_val(prec, disc).sqrt() / 2u32;
        Complex::new(re, im)
    }

    /// Multiplication by `tau` on the lattice `<tau, 1>`.
    pub fn generator(&self) -> IntMatrix {
        IntMatrix::from_i64(2, 2, &[self.s, 1, self.t, 0])
    }
}

/// Product of CM elliptic curves with a generating set of its endomorphisms.
#[derive(Clone, Debug)]
pub struct CmSample {
    pub av: PolarizedAV,
    pub basis: Vec<Endomorphism>,
    /// Indices into [`CM_POINTS`] of the diagonal factors before conjugation.
    pub factors: Vec<usize>,
    /// `gamma` with `av.tau = gamma . diag(tau_j)`, when conjugated.
    pub conjugator: Option<SymplecticMatrix>,
}

fn place(g: usize, from: usize, to: usize, b: &IntMatrix) -> IntMatrix {
    let mut m = IntMatrix::zeros(2 * g, 2 * g);
    let idx = |k: usize, f: usize| if k == 0 { f } else { g + f };
    for r in 0..2 {
        for c in 0..2 {
            m[(idx(r, to), idx(c, from))] = b[(r, c)].clone();
        }
    }
    m
}

fn raw_basis(factors: &[usize]) -> Vec<IntMatrix> {
    let g = factors.len();
    let mut out = Vec::new();
    for to in 0..g {
        for from in 0..g {
            if factors[to] != factors[from] {
                continue;
            }
            let cm = CM_POINTS[factors[to]];
            out.push(place(g, from, to, &IntMatrix::identity(2)));
            out.push(place(g, from, to, &cm.generator()));
        }
    }
    out
}

/// Principally polarized `prod E_j` with `tau = diag(tau_j)`. The basis is
/// `{e_kj, tau e_kj}` over factor pairs with equal `tau`.
pub fn cm_variety(factors: &[usize], prec: u32) -> Result<CmSample, AbelianError> {
    let taus: Vec<Complex> = factors.iter().map(|&k| CM_POINTS[k].tau(prec)).collect();
    let av = PolarizedAV::principal(SiegelPoint::diagonal(&taus)?)?;
    let basis = raw_basis(factors)
        .iter()
        .map(|m| validate_endomorphism(&av, m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CmSample { av, basis, factors: factors.to_vec(), conjugator: None })
}

/// Random element of `Sp_2g(Z)` built from elementary generators, with every
/// entry bounded by `max_entry` in absolute value.
pub fn random_symplectic<R: Rng + ?Sized>(g: usize, rng: &mut R, max_entry: i64) -> SymplecticMatrix {
    let mut m = SymplecticMatrix::identity(g);
    for _ in 0..12 {
        let gen = match rng.gen_range(0..3) {
            0 => {
                let mut s = IntMatrix::zeros(g, g);
                for i in 0..g {
                    for j in i..g {
                        let v = Integer::from(rng.gen_range(-1i64..=1));
                        s[(i, j)] = v.clone();
                        s[(j, i)] = v;
                    }
                }
                SymplecticMatrix::translation(&s).expect("symmetric")
            }
            1 => {
                let mut u = IntMatrix::identity(g);
                if g > 1 {
                    let i = rng.gen_range(0..g);
                    let j = (i + rng.gen_range(1..g)) % g;
                    u[(i, j)] = Integer::from(if rng.gen_bool(0.5) { 1 } else { -1 });
                } else {
                    u[(0, 0)] = Integer::from(-1);
                }
                SymplecticMatrix::rotation(&u).expect("unimodular")
            }
            _ => {
                let mask: Vec<bool> = (0..g).map(|_| rng.gen_bool(0.5)).collect();
                SymplecticMatrix::partial_inversion(&mask)
            }
        };
        let cand = m.mul(&gen);
        if cand.matrix().max_abs() <= max_entry {
            m = cand;
        }
    }
    m
}

/// Seeded CM product of dimension `g`. With `conjugate`, the period matrix is
/// moved by a random symplectic matrix (entries at most 3), reduced again,
/// and the basis transported accordingly.
pub fn sample_cm_variety(g: usize, seed: u64, conjugate: bool, prec: u32) -> Result<CmSample, AbelianError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<usize> = (0..g).map(|_| rng.gen_range(0..CM_POINTS.len())).collect();
    let base = cm_variety(&factors, prec)?;
    if !conjugate {
        return Ok(base);
    }
    let gamma = random_symplectic(g, &mut rng, 3);
    let moved = act(&gamma, base.av.tau())?;
    let r = reduce(&moved)?;
    let total = r.sigma.inverse().mul(&gamma);
    // recompute from a higher-precision diagonal so the reduced point stays
    // accurate to the working precision
    let hi = prec + 64;
    let taus: Vec<Complex> = factors.iter().map(|&k| CM_POINTS[k].tau(hi)).collect();
    let z = act(&total, &SiegelPoint::diagonal(&taus)?)?.with_prec(prec);
    let av = PolarizedAV::principal(z)?;
    // Pi' = lambda Pi N with N = total^t, hence rho' = N^-1 rho N
    let n = total.matrix().transpose();
    let ni = total.inverse().matrix().transpose();
    let basis = base
        .basis
        .iter()
        .map(|f| validate_endomorphism(&av, &ni.mul(f.rho_r()).mul(&n)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CmSample { av, basis, factors, conjugator: Some(total) })
}

fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ga, gb) = (a.rows(), b.rows());
    let p = a.prec().max(b.prec());
    ComplexMatrix::from_fn(ga + gb, ga + gb, |r, c| match (r < ga, c < ga) {
        (true, true) => a[(r, c)].with_prec(p),
        (false, false) => b[(r - ga, c - ga)].with_prec(p),
        _ => Complex::zero(p),
    })
}

/// Product `A x B` with the endomorphism `(P, Q) -> (O, phi(P))` for a
/// homomorphism `phi: A -> B` given by its `2g_B x 2g_A` rational
/// representation. Coordinates are permuted so the product type is sorted;
/// a type that cannot be sorted into a divisibility chain is rejected.
pub fn product_embedding(
    av_a: &PolarizedAV,
    av_b: &PolarizedAV,
    hom: &IntMatrix,
) -> Result<(PolarizedAV, Endomorphism), AbelianError> {
    let (ga, gb) = (av_a.g(), av_b.g());
    if hom.rows() != 2 * gb || hom.cols() != 2 * ga {
        return Err(AbelianError::DimensionMismatch);
    }
    let p = av_a.prec().max(av_b.prec());
    let (_, resid, scale) =
        analytic_rep(av_a.tau().tau(), av_a.ptype().d(), av_b.tau().tau(), av_b.ptype().d(), &hom.to_rational());
    let tol = default_tol(p);
    if resid > Float::with_val(p, &scale * &tol) {
        return Err(AbelianError::NotAHomomorphism(log2_f(&resid)));
    }
    let g = ga + gb;
    let d: Vec<Integer> = av_a.ptype().d().iter().chain(av_b.ptype().d()).cloned().collect();
    let mut perm: Vec<usize> = (0..g).collect();
    perm.sort_by(|&i, &j| d[i].cmp(&d[j]));
    let ptype = PolarizationType::new(perm.iter().map(|&i| d[i].clone()).collect())?;
    let t = block_diag(av_a.tau().tau(), av_b.tau().tau());
    let tau = SiegelPoint::new(ComplexMatrix::from_fn(g, g, |r, c| t[(perm[r], perm[c])].clone()))?;
    let av = PolarizedAV::new(tau, ptype)?;

    // unpermuted coordinates (x_A, x_B, y_A, y_B)
    let mut f = IntMatrix::zeros(2 * g, 2 * g);
    for r in 0..gb {
        for c in 0..ga {
            f[(ga + r, c)] = hom[(r, c)].clone();
            f[(ga + r, g + c)] = hom[(r, ga + c)].clone();
            f[(g + ga + r, c)] = hom[(gb + r, c)].clone();
            f[(g + ga + r, g + c)] = hom[(gb + r, ga + c)].clone();
        }
    }
    let full = |k: usize| if k < g { perm[k] } else { g + perm[k - g] };
    let fp = IntMatrix::from_fn(2 * g, 2 * g, |r, c| f[(full(r), full(c))].clone());
    let e = validate_endomorphism_with_tol(&av, &fp, &Float::with_val(p, &tol * 16u32))?;
    Ok((av, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{alphas, rosati};
    use rug::Rational;

    const P: u32 = 128;

    #[test]
    fn cm_g1_basis() {
        let s = cm_variety(&[0], P).unwrap();
        assert_eq!(s.basis.len(), 2);
        assert_eq!(s.basis[1].rho_r(), &IntMatrix::from_i64(2, 2, &[0, 1, -1, 0]));
    }

    #[test]
    fn cm_g2_repeated_factor_has_eight_generators() {
        let s = cm_variety(&[0, 0], P).unwrap();
        assert_eq!(s.basis.len(), 8);
        let t = cm_variety(&[0, 2], P).unwrap();
        assert_eq!(t.basis.len(), 4);
    }

    #[test]
    fn conjugated_samples_validate() {
        for seed in 0..12 {
            for g in 1..=3 {
                let s = sample_cm_variety(g, seed, true, P).unwrap();
                for f in &s.basis {
                    assert!(rosati(f).to_integer().is_some());
                }
            }
        }
    }

    #[test]
    fn product_embedding_gamma2() {
        let e = cm_variety(&[0], P).unwrap().av;
        let (_, f) = product_embedding(&e, &e, &IntMatrix::identity(2)).unwrap();
        assert_eq!(alphas(&f).unwrap().alpha_plus_exact(), Some(Rational::from(1)));
        let (_, f2) = product_embedding(&e, &e, &IntMatrix::from_i64(2, 2, &[2, 0, 0, 2])).unwrap();
        assert_eq!(alphas(&f2).unwrap().alpha_plus_exact(), Some(Rational::from(4)));

        // z -> 2z from <tau, 1> to <2 tau, 1>
        let tau = Complex::from_f64(P, 0.1, 0.9);
        let two_tau = &tau + &tau;
        let a = PolarizedAV::principal(SiegelPoint::diagonal(&[tau]).unwrap()).unwrap();
        let b = PolarizedAV::principal(SiegelPoint::diagonal(&[two_tau]).unwrap()).unwrap();
        let (_, f) = product_embedding(&a, &b, &IntMatrix::from_i64(2, 2, &[1, 0, 0, 2])).unwrap();
        let s = alphas(&f).unwrap();
        assert_eq!(s.alpha_plus_exact(), Some(Rational::from(2)));
        assert!(matches!(
            product_embedding(&a, &b, &IntMatrix::identity(2)),
            Err(AbelianError::NotAHomomorphism(_))
        ));
    }
}
