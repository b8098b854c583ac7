use abelia::siegel::{act, boundary_set, membership, reduce, SiegelPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn csub(a: C, b: C) -> C {
    (a.0 - b.0, a.1 - b.1)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Every coprime symmetric pair (C, D) with small entries gives
/// `|det(CZ + D)| >= 1` on reduced points.
#[test]
fn g2_boundary_set_dominates_small_coprime_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<[C; 4]> = (0..25)
        .map(|_| {
            let z = reduce(&SiegelPoint::random(2, &mut rng, 128)).unwrap().z;
            let t = z.tau();
            [t[(0, 0)].to_f64_pair(), t[(0, 1)].to_f64_pair(), t[(1, 0)].to_f64_pair(), t[(1, 1)].to_f64_pair()]
        })
        .collect();
    let mut pairs = 0;
    let range = -2i64..=2;
    for code in 0..5i64.pow(8) {
        let mut e = [0i64; 8];
        let mut k = code;
        for slot in e.iter_mut() {
            *slot = k % 5 - 2;
            k /= 5;
        }
        debug_assert!(e.iter().all(|x| range.contains(x)));
        let (c, d) = ([e[0], e[1], e[2], e[3]], [e[4], e[5], e[6], e[7]]);
        // C D^t symmetric
        let cd01 = c[0] * d[2] + c[1] * d[3];
        let cd10 = c[2] * d[0] + c[3] * d[1];
        if cd01 != cd10 {
            continue;
        }
        let rows = [[c[0], c[1], d[0], d[1]], [c[2], c[3], d[2], d[3]]];
        let mut g = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                g = gcd(g, rows[0][i] * rows[1][j] - rows[0][j] * rows[1][i]);
            }
        }
        if g != 1 {
            continue;
        }
        pairs += 1;
        for z in &pts {
            let m = |r: usize, col: usize| -> C {
                let mut acc = (d[r * 2 + col] as f64, 0.0);
                for k in 0..2 {
                    let t = z[k * 2 + col];
                    acc.0 += c[r * 2 + k] as f64 * t.0;
                    acc.1 += c[r * 2 + k] as f64 * t.1;
                }
                acc
            };
            let det = csub(cmul(m(0, 0), m(1, 1)), cmul(m(0, 1), m(1, 0)));
            let a = det.0.hypot(det.1);
            assert!(a >= 1.0 - 1e-9, "C={c:?} D={d:?} |det|={a}");
        }
    }
    assert!(pairs > 1000);
}

#[test]
fn random_points_reduce_into_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in 1..=3 {
        let cosets = boundary_set(g);
        for _ in 0..60 {
            let tau = SiegelPoint::random(g, &mut rng, 128);
            let r = reduce(&tau).unwrap();
            assert!(r.sigma.matrix().is_symplectic());
            let back = act(&r.sigma, &r.z).unwrap();
            assert!(back.tau().dist(tau.tau()) < 1e-30);
            let rep = membership(&r.z, &cosets);
            assert!(rep.all_ok(), "g={g} {rep:?}");
        }
    }
}
