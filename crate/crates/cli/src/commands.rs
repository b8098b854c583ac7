use abelia::abelian::{
    alphas, exact_analytic_charpoly, rosati_of, analytic_charpoly, chi_combination, classify_divisor, norm_bound_constants, rosati, rosati_cross_check,
    trace_form, validate_endomorphism, verify_norm_bounds, AbelianError, DivisorSide, Endomorphism,
    PolarizationType, PolarizedAV,
};
use abelia::elliptic::{
    canonical_height, doubling_limit_height, local_height, velu_2isogeny, velu_2isogeny_at, verify_endo_scaling,
    verify_endo_scaling_pairs, verify_isogeny_identity, verify_isogeny_identity_x, ECPoint, EllipticCurve,
    EllipticError, HeightValue, MAX_DOUBLINGS,
};
use abelia::heights::{h_aff, h_d_with_budget, h_max, weil_height, AlgebraicScalar, DHeight, HeightError};
use abelia::siegel::{act, boundary_set, check_delta_bounds, delta_constants, membership, reduce, SiegelError, SiegelPoint};
use abelia::{Float, Integer, Rational};
use serde_json::{json, Value};

use crate::checks::{self, Check};
use crate::io::{self, field, Malformed};
use crate::RunConfig;

/// How a command ended, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1: the document is printed and reports what failed.
    Violation(Value),
    /// Exit 2.
    Malformed(String),
    /// Exit 3.
    Budget(String),
}

impl From<Malformed> for Failure {
    fn from(m: Malformed) -> Self {
        Failure::Malformed(m.0)
    }
}

impl From<HeightError> for Failure {
    fn from(e: HeightError) -> Self {
        match e {
            HeightError::SearchBudgetExceeded { .. } | HeightError::RootFindingFailure(_) => {
                Failure::Budget(e.to_string())
            }
            _ => Failure::Malformed(e.to_string()),
        }
    }
}

impl From<SiegelError> for Failure {
    fn from(e: SiegelError) -> Self {
        match e {
            SiegelError::ReductionDiverged(_)
            | SiegelError::SingularCocycle { .. }
            | SiegelError::ImTransformMismatch(_) => Failure::Budget(e.to_string()),
            _ => Failure::Malformed(e.to_string()),
        }
    }
}

impl From<AbelianError> for Failure {
    fn from(e: AbelianError) -> Self {
        match e {
            AbelianError::Siegel(s) => s.into(),
            AbelianError::NotAPerfectSquare
            | AbelianError::EigenvalueMismatch(_)
            | AbelianError::ComplexRootDetected
            | AbelianError::BoundViolation(_) => {
                Failure::Violation(json!({ "status": "violation", "message": e.to_string() }))
            }
            _ => Failure::Malformed(e.to_string()),
        }
    }
}

impl From<EllipticError> for Failure {
    fn from(e: EllipticError) -> Self {
        match e {
            EllipticError::ToleranceUnreachable { .. } => Failure::Budget(e.to_string()),
            EllipticError::ScalingViolation(_) | EllipticError::IdentityViolation(_) => {
                Failure::Violation(json!({ "status": "violation", "message": e.to_string() }))
            }
            _ => Failure::Malformed(e.to_string()),
        }
    }
}

pub type Outcome = Result<Value, Failure>;

// ---------------------------------------------------------------- heights

/// With a companion matrix `b` the five height inequalities are checked too.
pub fn heights_matrix(input: &Value) -> Outcome {
    let m = io::parse_rat_matrix(input.get("matrix").unwrap_or(input))?;
    let mut doc = json!({ "h_aff": io::integer(&h_aff(&m)), "h_max": io::integer(&h_max(&m)) });
    if let Some(b) = input.get("b") {
        let b = io::parse_rat_matrix(b)?;
        if !m.is_square() || b.rows() != m.rows() || b.cols() != m.cols() {
            return Err(Failure::Malformed("matrix and b must be square of the same size".into()));
        }
        let cs = checks::matrix_heights(&m, &b);
        doc["checks"] = checks::to_json(&cs);
        if !checks::all_ok(&cs) {
            return Err(Failure::Violation(doc));
        }
    }
    Ok(doc)
}

fn parse_scalar(input: &Value, prec: u32) -> Result<AlgebraicScalar, Failure> {
    if let Some(q) = input.get("rational") {
        return Ok(AlgebraicScalar::rational(io::parse_rational(q)?));
    }
    let Value::Array(c) = field(input, "minpoly")? else {
        return Err(Failure::Malformed("minpoly must be an array of integers".into()));
    };
    let coeffs = c.iter().map(io::parse_integer).collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() == 2 {
        // degree one: the root is rational
        let q = Rational::from((-coeffs[0].clone(), coeffs[1].clone()));
        return Ok(AlgebraicScalar::rational(q));
    }
    if let Some(r) = input.get("root") {
        let approx = io::parse_complex(r, prec)?;
        return Ok(AlgebraicScalar::algebraic_nearest(coeffs, &approx, prec)?);
    }
    let index = input.get("root_index").map(io::parse_i64).transpose()?.unwrap_or(0);
    Ok(AlgebraicScalar::algebraic_by_index(coeffs, index.max(0) as usize, prec)?)
}

pub fn heights_hd(input: &Value, cfg: &RunConfig, budget: u64) -> Outcome {
    let a = parse_scalar(input, cfg.prec)?;
    let d = io::parse_i64(field(input, "d")?)?;
    if d < 1 {
        return Err(Failure::Malformed("d must be at least 1".into()));
    }
    let d = d as usize;
    let hd = h_d_with_budget(&a, d, budget)?;
    let w = weil_height(&a, cfg.prec)?;
    let mut doc = json!({
        "degree": a.degree(),
        "d": d,
        "h_d": hd.to_string(),
        "weil_height": w.to_string(),
    });
    let DHeight::Finite(h) = &hd else { return Ok(doc) };
    // float comparisons get a margin well above the working precision
    let margin = -(cfg.prec as f64) / 2.0;
    let hf = checks::log2_int(h);
    let bound = d as f64 + d as f64 * checks::log2_float(&w.to_float(cfg.prec));
    let mut cs = vec![match &w {
        abelia::heights::HeightValue::Exact(n) => {
            let rhs = Integer::from(Integer::u_pow_u(2, d as u32)) * checks::ipow(n, d);
            Check::le("h_d_le_weil_pow", h, &rhs)
        }
        _ => Check::new("h_d_le_weil_pow", bound - hf >= margin.exp2(), bound - hf),
    }];
    let abs = checks::log2_float(&a.to_complex(cfg.prec).abs());
    let s = 0.5 * ((d + 1) as f64).log2() + hf - abs;
    cs.push(Check::new("abs_le_sqrt_h_d", s >= -margin.exp2(), s));
    if input.get("oracle").and_then(Value::as_bool).unwrap_or(false) {
        let cap = h.to_i64().unwrap_or(i64::MAX).min(64);
        let brute = checks::brute_hd(&a.minpoly(), d, cap);
        let ok = brute.map(Integer::from).as_ref() == Some(h);
        cs.push(Check::new("brute_force_oracle", ok, if ok { 0.0 } else { -1.0 }));
        doc["oracle_h_d"] = json!(brute.map(|b| b.to_string()));
    }
    doc["checks"] = checks::to_json(&cs);
    if checks::all_ok(&cs) { Ok(doc) } else { Err(Failure::Violation(doc)) }
}

// ---------------------------------------------------------------- siegel

fn parse_tau(input: &Value, cfg: &RunConfig) -> Result<SiegelPoint, Failure> {
    let m = io::parse_complex_matrix(field(input, "tau")?, cfg.prec)?;
    if let Some(g) = cfg.g {
        if m.rows() != g {
            return Err(Failure::Malformed(format!("tau is {}x{}, expected g = {g}", m.rows(), m.cols())));
        }
    }
    Ok(SiegelPoint::new(m)?)
}

fn domain_json(z: &SiegelPoint) -> (bool, Value) {
    let rep = membership(z, &boundary_set(z.g()));
    let ok = rep.all_ok();
    (
        ok,
        json!({
            "in_domain": ok,
            "re_bound_ok": rep.re_bound_ok,
            "det_bound_ok": rep.det_bound_ok,
            "minkowski_ok": rep.minkowski_ok,
            "boundary_ok": rep.boundary_ok,
            "worst_margin": io::float(&rep.worst_margin),
            "checked_cosets": rep.checked_cosets,
        }),
    )
}

pub fn siegel_reduce(input: &Value, cfg: &RunConfig) -> Outcome {
    let tau = parse_tau(input, cfg)?;
    let r = reduce(&tau)?;
    let back = act(&r.sigma, &r.z)?.tau().dist(tau.tau());
    let deltas = delta_constants(tau.g(), std::slice::from_ref(&r.sigma), cfg.prec);
    let chk = check_delta_bounds(&r.z, &tau, &deltas);
    let (in_domain, domain) = domain_json(&r.z);
    let scale = tau.tau().max_abs().max(&Float::with_val(cfg.prec, 1));
    let res_ok = back <= Float::with_val(cfg.prec, scale * Float::with_val(cfg.prec, cfg.structural_tol()));
    let doc = json!({
        "Z": io::complex_matrix(r.z.tau()),
        "sigma": io::int_matrix(r.sigma.matrix()),
        "sigma_inverse": io::int_matrix(r.sigma.inverse().matrix()),
        "steps": r.steps,
        "residual": io::float(&back),
        "membership": domain,
        "delta_margins": {
            "im_norm": io::float(&chk.im_norm),
            "re_norm": io::float(&chk.re_norm),
            "det_im": io::float(&chk.det_im),
            "inv_im_norm": io::float(&chk.inv_im_norm),
        },
        "delta_ok": chk.all_ok(),
        "residual_ok": res_ok,
    });
    if in_domain && chk.all_ok() && res_ok { Ok(doc) } else { Err(Failure::Violation(doc)) }
}

pub fn siegel_check(input: &Value, cfg: &RunConfig) -> Outcome {
    let tau = parse_tau(input, cfg)?;
    let (ok, doc) = domain_json(&tau);
    if ok { Ok(doc) } else { Err(Failure::Violation(doc)) }
}

// ---------------------------------------------------------------- abelian

fn parse_type(input: &Value, cfg: &RunConfig, g: usize) -> Result<PolarizationType, Failure> {
    let d: Vec<Integer> = match input.get("type") {
        Some(Value::Array(a)) => a.iter().map(io::parse_integer).collect::<Result<_, _>>()?,
        Some(v) => vec![io::parse_integer(v)?],
        None => match &cfg.ptype {
            Some(t) => t.iter().map(|&x| Integer::from(x)).collect(),
            None => vec![Integer::from(1)],
        },
    };
    // a single entry stands for (d, ..., d)
    let d = if d.len() == 1 && g > 1 { vec![d[0].clone(); g] } else { d };
    Ok(PolarizationType::new(d)?)
}

fn parse_av(input: &Value, cfg: &RunConfig) -> Result<PolarizedAV, Failure> {
    let tau = parse_tau(input, cfg)?;
    let t = parse_type(input, cfg, tau.g())?;
    Ok(PolarizedAV::new(tau, t)?)
}

fn parse_endo(input: &Value, cfg: &RunConfig) -> Result<Endomorphism, Failure> {
    let av = parse_av(input, cfg)?;
    let m = io::parse_int_matrix(field(input, "rho_r")?)?;
    Ok(validate_endomorphism(&av, &m)?)
}

pub fn av_validate(input: &Value, cfg: &RunConfig) -> Outcome {
    let av = parse_av(input, cfg)?;
    let m = io::parse_int_matrix(field(input, "rho_r")?)?;
    let base = json!({ "det_s_residual": io::float(&av.det_s_residual()) });
    match validate_endomorphism(&av, &m) {
        Ok(f) => {
            let mut doc = base;
            doc["valid"] = json!(true);
            doc["rho_a"] = io::complex_matrix(f.rho_a());
            Ok(doc)
        }
        Err(e @ AbelianError::NotAnEndomorphism(_)) => {
            let mut doc = base;
            doc["valid"] = json!(false);
            doc["message"] = json!(e.to_string());
            Err(Failure::Violation(doc))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn av_rosati(input: &Value, cfg: &RunConfig) -> Outcome {
    let f = parse_endo(input, cfg)?;
    let r = rosati(&f);
    let tr = trace_form(&f);
    let res = rosati_cross_check(&f);
    let twice = rosati_of(f.av().ptype(), &r);
    let cs = vec![
        Check::new("involution", twice == f.rho_r().to_rational(), 0.0),
        Check::new("trace_form_positive", f.is_zero() || tr > 0, tr.to_f64()),
        Check::new("cross_check", res.to_f64() <= cfg.structural_tol(), -checks::log2_float(&res)),
    ];
    let doc = json!({
        "rosati": io::rat_matrix(&r),
        "trace_form": io::rational(&tr),
        "cross_check_residual": io::float(&res),
        "checks": checks::to_json(&cs),
    });
    if checks::all_ok(&cs) { Ok(doc) } else { Err(Failure::Violation(doc)) }
}

pub fn av_alphas(input: &Value, cfg: &RunConfig) -> Outcome {
    let f = parse_endo(input, cfg)?;
    let (p_r, p_a) = exact_analytic_charpoly(&f)?;
    if p_a.mul(&p_a) != p_r {
        return Err(AbelianError::NotAPerfectSquare.into());
    }
    let c = analytic_charpoly(&f)?;
    let s = alphas(&f)?;
    if s.alpha_minus > s.alpha_plus {
        return Err(AbelianError::EigenvalueMismatch(f64::NAN).into());
    }
    let show = |exact: Option<Rational>, x: &Float| exact.map(|q| io::rational(&q)).unwrap_or_else(|| io::float(x));
    let coeffs: Vec<Value> = c.p_a.coeffs().iter().map(io::rational).collect();
    Ok(json!({
        "rational_charpoly": p_r.coeffs().iter().map(io::rational).collect::<Vec<_>>(),
        "analytic_charpoly": coeffs,
        "alpha_minus": show(s.alpha_minus_exact(), &s.alpha_minus),
        "alpha_plus": show(s.alpha_plus_exact(), &s.alpha_plus),
        "alphas": s.alphas(cfg.prec).iter().map(io::float).collect::<Vec<_>>(),
        "is_isogeny": s.is_isogeny,
        "eigen_gap": io::f64_str(c.eigen_gap),
    }))
}

fn parse_ab(input: &Value) -> Result<(Integer, Integer), Failure> {
    Ok((io::parse_integer(field(input, "a")?)?, io::parse_integer(field(input, "b")?)?))
}

pub fn av_chi(input: &Value, cfg: &RunConfig) -> Outcome {
    let f = parse_endo(input, cfg)?;
    let (a, b) = parse_ab(input)?;
    Ok(json!({ "chi": io::rational(&chi_combination(&f, &a, &b)?) }))
}

pub fn av_classify(input: &Value, cfg: &RunConfig) -> Outcome {
    let f = parse_endo(input, cfg)?;
    let (a, b) = parse_ab(input)?;
    let side = match input.get("side").and_then(Value::as_str).unwrap_or("lambda_minus_pullback") {
        "lambda_minus_pullback" => DivisorSide::LambdaMinusPullback,
        "pullback_minus_lambda" => DivisorSide::PullbackMinusLambda,
        other => return Err(Failure::Malformed(format!("unknown side \"{other}\""))),
    };
    Ok(json!({ "class": classify_divisor(&f, &a, &b, side)?.as_str() }))
}

pub fn av_norm_bounds(input: &Value, cfg: &RunConfig) -> Outcome {
    let f = parse_endo(input, cfg)?;
    let r = reduce(f.av().tau())?;
    let c = norm_bound_constants(f.av(), &r.z, std::slice::from_ref(&r.sigma));
    let constants = json!({
        "c1": io::float(&c.c1),
        "c2": io::float(&c.c2),
        "c2_sharp": c.c2_sharp.as_ref().map(io::float),
        "deltas": [io::float(&c.deltas.d1), io::float(&c.deltas.d2), io::float(&c.deltas.d3), io::float(&c.deltas.d4)],
    });
    match verify_norm_bounds(&f, &c) {
        Ok(rep) => Ok(json!({
            "constants": constants,
            "norm": io::integer(&rep.norm),
            "trace_form": io::rational(&rep.trace),
            "lower_slack": io::float(&rep.lower_slack),
            "upper_slack": io::float(&rep.upper_slack),
            "upper_slack_sharp": rep.upper_slack_sharp.as_ref().map(io::float),
        })),
        Err(AbelianError::BoundViolation(msg)) => {
            Err(Failure::Violation(json!({ "status": "violation", "constants": constants, "message": msg })))
        }
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------- elliptic

fn height_json(h: &HeightValue) -> Value {
    json!({
        "value": io::float(&h.value),
        "error_bound": io::float(&h.error_bound),
        "method": h.method.as_str(),
        "steps": h.steps,
    })
}

pub fn ec_height(input: &Value, cfg: &RunConfig, method: &str) -> Outcome {
    let e = io::parse_curve(field(input, "curve")?)?;
    let p = io::parse_point(field(input, "point")?)?;
    if !e.contains(&p) {
        return Err(EllipticError::NotOnCurve.into());
    }
    let h = match method {
        "auto" => canonical_height(&e, &p, cfg.height_tol())?,
        "doubling" => doubling_limit_height(&e, p.x(), cfg.height_tol(), MAX_DOUBLINGS)?,
        "local" => local_height(&e, p.x()),
        other => return Err(Failure::Malformed(format!("unknown method \"{other}\""))),
    };
    let mut doc = json!({ "curve": io::curve(&e), "point": io::point(&p), "height": height_json(&h) });
    if input.get("check").and_then(Value::as_bool).unwrap_or(false) {
        let cs = ec_height_checks(&e, &p, &h, cfg.height_tol())?;
        doc["checks"] = checks::to_json(&cs);
        if !checks::all_ok(&cs) {
            return Err(Failure::Violation(doc));
        }
    }
    Ok(doc)
}

/// Certified error below tolerance, agreement of the two methods and the
/// quadratic relation under doubling.
fn ec_height_checks(e: &EllipticCurve, p: &ECPoint, h: &HeightValue, tol: f64) -> Result<Vec<Check>, Failure> {
    let err = h.error_bound.to_f64();
    let mut cs = vec![Check::new("error_below_tol", err < tol, (tol / err).log2())];
    let l = local_height(e, p.x());
    let gap = (l.value.to_f64() - h.value.to_f64()).abs();
    let allow = tol + l.error_bound.to_f64();
    cs.push(Check::new("methods_agree", gap <= allow, allow - gap));
    let h2 = canonical_height(e, &e.double(p), 4.0 * tol)?;
    let gap = (h2.value.to_f64() - 4.0 * h.value.to_f64()).abs();
    cs.push(Check::new("doubling_quadratic", gap <= 8.0 * tol, 8.0 * tol - gap));
    Ok(cs)
}

fn isogeny_from(input: &Value) -> Result<(EllipticCurve, abelia::elliptic::TwoIsogeny), Failure> {
    let e = io::parse_curve(field(input, "curve")?)?;
    let phi = match input.get("kernel_x") {
        Some(x) => velu_2isogeny_at(&e, &io::parse_rational(x)?)?,
        None => velu_2isogeny(&e)?,
    };
    Ok((e, phi))
}

fn points_of(input: &Value, key: &str) -> Result<Vec<ECPoint>, Failure> {
    match input.get(key) {
        None => Ok(Vec::new()),
        Some(Value::Array(a)) => Ok(a.iter().map(io::parse_point).collect::<Result<_, _>>()?),
        Some(_) => Err(Failure::Malformed(format!("\"{key}\" must be an array of points"))),
    }
}

pub fn ec_isogeny(input: &Value) -> Outcome {
    let (e, phi) = isogeny_from(input)?;
    let pts = points_of(input, "points")?;
    let mut images = Vec::new();
    for p in &pts {
        if !e.contains(p) {
            return Err(EllipticError::NotOnCurve.into());
        }
        images.push(json!({ "point": io::point(p), "image": io::point(&phi.apply(p)) }));
    }
    Ok(json!({
        "source": io::curve(&e),
        "target": io::curve(phi.target()),
        "kernel": io::point(&phi.kernel_point()),
        "degree": phi.degree(),
        "images": images,
    }))
}

pub fn verify_scaling(input: &Value, cfg: &RunConfig) -> Outcome {
    let e = match input.get("curve") {
        Some(c) => io::parse_curve(c)?,
        None => EllipticCurve::from_i64(0, 0, 17).expect("nonsingular"),
    };
    let tol = cfg.tol.unwrap_or(1e-3);
    let report = if let Some(Value::Array(pairs)) = input.get("pairs") {
        let mut ps = Vec::new();
        for p in pairs {
            let Value::Array(two) = p else { return Err(Failure::Malformed("pairs are [P1, P2]".into())) };
            if two.len() != 2 {
                return Err(Failure::Malformed("pairs are [P1, P2]".into()));
            }
            ps.push((io::parse_point(&two[0])?, io::parse_point(&two[1])?));
        }
        verify_endo_scaling_pairs(&e, &ps, tol)?
    } else {
        let mut pts = points_of(input, "points")?;
        if pts.is_empty() {
            let bound = input.get("naive_height").map(io::parse_i64).transpose()?.unwrap_or(10);
            pts = e.small_points(bound.max(1) as u32).into_iter().filter(|p| !e.is_torsion(p)).collect();
        }
        let limit = input.get("limit").map(io::parse_i64).transpose()?.unwrap_or(50).max(3) as usize;
        verify_endo_scaling(&e, &pts, limit, tol)?
    };
    let pairs: Vec<Value> = report
        .pairs
        .iter()
        .map(|r| {
            json!({
                "p1": io::point(&r.p1),
                "p2": io::point(&r.p2),
                "h_before": io::f64_str(r.before),
                "h_after": io::f64_str(r.after),
                "ratio": io::f64_str(r.ratio),
            })
        })
        .collect();
    Ok(json!({
        "curve": io::curve(&e),
        "tol": io::f64_str(tol),
        "alpha_minus": io::f64_str(report.alpha_minus),
        "alpha_plus": io::f64_str(report.alpha_plus),
        "trace_bound": io::f64_str(report.trace_bound),
        "min_ratio": io::f64_str(report.min_ratio),
        "max_ratio": io::f64_str(report.max_ratio),
        "min_attained": io::f64_str(report.min_attained),
        "max_attained": io::f64_str(report.max_attained),
        "pairs": pairs,
    }))
}

pub fn verify_isogeny(input: &Value, cfg: &RunConfig) -> Outcome {
    let (_, phi) = isogeny_from(input)?;
    let m1 = input.get("m1").map(io::parse_i64).transpose()?.unwrap_or(1);
    let m2 = input.get("m2").map(io::parse_i64).transpose()?.unwrap_or(1);
    let tol = cfg.tol.unwrap_or(1e-3);
    let report = if let Some(Value::Array(xs)) = input.get("xs") {
        let xs = xs
            .iter()
            .map(|x| if x == "O" { Ok(None) } else { io::parse_rational(x).map(Some) })
            .collect::<Result<Vec<_>, _>>()?;
        verify_isogeny_identity_x(&phi, m1, m2, &xs, tol)?
    } else {
        verify_isogeny_identity(&phi, m1, m2, &points_of(input, "points")?, tol)?
    };
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "x": e.x.as_ref().map_or(json!("O"), io::rational),
                "image_x": e.image_x.as_ref().map_or(json!("O"), io::rational),
                "lhs": io::f64_str(e.lhs),
                "rhs": io::f64_str(e.rhs),
                "residual": io::f64_str(e.residual),
            })
        })
        .collect();
    Ok(json!({
        "source": io::curve(phi.source()),
        "target": io::curve(phi.target()),
        "m1": m1,
        "m2": m2,
        "tol": io::f64_str(tol),
        "max_residual": io::f64_str(report.max_residual),
        "entries": entries,
    }))
}
