use std::hint::black_box;

use abelia::abelian::{alphas, cm_variety, norm_bound_constants, sample_cm_variety, verify_norm_bounds};
use abelia::elliptic::{canonical_height, local_height, velu_2isogeny, ECPoint, EllipticCurve};
use abelia::heights::{h_aff, h_d, AlgebraicScalar};
use abelia::siegel::{act, reduce, SiegelPoint, SymplecticMatrix};
use abelia::{IntMatrix, Integer, RatMatrix, Rational};
use criterion::{criterion_group, criterion_main, Criterion};

const PREC: u32 = 128;

fn heights(c: &mut Criterion) {
    let m = RatMatrix::from_fn(4, 4, |i, j| Rational::from(((i * 7 + j * 3) as i64 - 11, (i + 2 * j + 1) as u64)));
    c.bench_function("h_aff 4x4", |b| b.iter(|| h_aff(black_box(&m))));

    let sqrt2 = AlgebraicScalar::algebraic_by_index(vec![Integer::from(-2), Integer::ZERO, Integer::from(1)], 1, PREC)
        .unwrap();
    c.bench_function("h_d sqrt2 d=3", |b| b.iter(|| h_d(black_box(&sqrt2), 3).unwrap()));
}

fn siegel(c: &mut Criterion) {
    let base = SiegelPoint::from_f64(2, &[0.1, 0.05, 0.05, -0.2], &[1.3, 0.4, 0.4, 1.1], PREC).unwrap();
    let shift = SymplecticMatrix::translation(&IntMatrix::from_i64(2, 2, &[1, 2, 2, 0])).unwrap();
    let gamma = shift.mul(&SymplecticMatrix::inversion(2)).mul(&shift);
    let tau = act(&gamma, &base).unwrap();
    c.bench_function("reduce g=2", |b| b.iter(|| reduce(black_box(&tau)).unwrap()));
}

fn abelian(c: &mut Criterion) {
    let s = sample_cm_variety(2, 5, true, PREC).unwrap();
    let f = s.basis.last().unwrap().clone();
    c.bench_function("alphas g=2", |b| b.iter(|| alphas(black_box(&f)).unwrap()));

    let s3 = cm_variety(&[0, 1, 2], PREC).unwrap();
    let f3 = s3.basis[1].add(&s3.basis[2].scale(3));
    let r = reduce(s3.av.tau()).unwrap();
    let k = norm_bound_constants(&s3.av, &r.z, std::slice::from_ref(&r.sigma));
    c.bench_function("norm bounds g=3", |b| b.iter(|| verify_norm_bounds(black_box(&f3), &k).unwrap()));
}

fn elliptic(c: &mut Criterion) {
    let e = EllipticCurve::from_i64(0, 0, 17).unwrap();
    let p = ECPoint::from_i64(-2, 3);
    c.bench_function("canonical height 1e-6", |b| b.iter(|| canonical_height(&e, black_box(&p), 1e-6).unwrap()));
    c.bench_function("local height", |b| b.iter(|| local_height(&e, black_box(p.x()))));

    let e2 = EllipticCurve::from_i64(0, 1, 0).unwrap();
    c.bench_function("velu 2-isogeny", |b| b.iter(|| velu_2isogeny(black_box(&e2)).unwrap()));
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(20);
    targets = heights, siegel, abelian, elliptic
}
criterion_main!(kernels);
