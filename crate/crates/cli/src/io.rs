//! JSON encodings: rationals as "p/q" strings, floats as decimal strings,
//! complex numbers as `{"re", "im"}` or strings like "0.5+1.2i", matrices as
//! nested arrays or `{"rows", "cols", "data"}`.

use std::str::FromStr;

use abelia::elliptic::{ECPoint, EllipticCurve};
use abelia::{Complex, ComplexMatrix, Float, IntMatrix, Integer, RatMatrix, Rational};
use serde_json::{json, Map, Value};

/// Input that does not describe a valid object.
#[derive(Debug)]
pub struct Malformed(pub String);

impl<E: std::fmt::Display> From<E> for Malformed {
    fn from(e: E) -> Self {
        Malformed(e.to_string())
    }
}

pub type Parsed<T> = Result<T, Malformed>;

fn bad<T>(msg: impl Into<String>) -> Parsed<T> {
    Err(Malformed(msg.into()))
}

pub fn field<'a>(v: &'a Value, key: &str) -> Parsed<&'a Value> {
    v.get(key).ok_or_else(|| Malformed(format!("missing field \"{key}\"")))
}

pub fn parse_rational(v: &Value) -> Parsed<Rational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from(i))
            } else {
                parse_rational_str(&n.to_string())
            }
        }
        Value::String(s) => parse_rational_str(s),
        _ => bad(format!("expected a rational, got {v}")),
    }
}

/// "p", "p/q" or an exact decimal such as "-1.25".
pub fn parse_rational_str(s: &str) -> Parsed<Rational> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        if frac.chars().all(|c| c.is_ascii_digit()) && !s.contains('/') {
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
            let num = Integer::from_str(if digits.is_empty() { "0" } else { &digits })?;
            let den = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
            let r = Rational::from((num, den));
            return Ok(if neg { -r } else { r });
        }
    }
    Ok(Rational::from_str(s)?)
}

pub fn parse_integer(v: &Value) -> Parsed<Integer> {
    let r = parse_rational(v)?;
    if *r.denom() != 1 {
        return bad(format!("expected an integer, got {r}"));
    }
    Ok(r.numer().clone())
}

pub fn parse_i64(v: &Value) -> Parsed<i64> {
    parse_integer(v)?.to_i64().ok_or_else(|| Malformed("integer out of range".into()))
}

pub fn parse_float(v: &Value, prec: u32) -> Parsed<Float> {
    let s = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        _ => return bad(format!("expected a real number, got {v}")),
    };
    if s.contains('/') {
        return Ok(Float::with_val(prec, parse_rational_str(&s)?));
    }
    Ok(Float::with_val(prec, Float::parse(&s)?))
}

pub fn parse_complex(v: &Value, prec: u32) -> Parsed<Complex> {
    match v {
        Value::Object(m) => {
            let re = m.get("re").map(|x| parse_float(x, prec)).transpose()?.unwrap_or_else(|| Float::new(prec));
            let im = m.get("im").map(|x| parse_float(x, prec)).transpose()?.unwrap_or_else(|| Float::new(prec));
            Ok(Complex::new(re, im))
        }
        Value::Array(a) if a.len() == 2 => Ok(Complex::new(parse_float(&a[0], prec)?, parse_float(&a[1], prec)?)),
        Value::Number(_) => Ok(Complex::from_real(parse_float(v, prec)?)),
        Value::String(s) => parse_complex_str(s, prec),
        _ => bad(format!("expected a complex number, got {v}")),
    }
}

/// "a", "bi", "a+bi", "a-i", with optional exponents in either part.
pub fn parse_complex_str(s: &str, prec: u32) -> Parsed<Complex> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let real = |t: &str| -> Parsed<Float> {
        match t {
            "" | "+" => Ok(Float::with_val(prec, 1)),
            "-" => Ok(Float::with_val(prec, -1)),
            _ => parse_float(&Value::String(t.to_string()), prec),
        }
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex::from_real(parse_float(&Value::String(s.clone()), prec)?));
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex::new(real(&body[..k])?, real(&body[k..])?)),
        None => Ok(Complex::new(Float::new(prec), real(body)?)),
    }
}

fn rows_of(v: &Value) -> Parsed<(usize, usize, Vec<&Value>)> {
    match v {
        Value::Array(rows) => {
            let r = rows.len();
            let mut data = Vec::new();
            let mut c = None;
            for row in rows {
                let Value::Array(items) = row else { return bad("matrix rows must be arrays") };
                if *c.get_or_insert(items.len()) != items.len() {
                    return bad("ragged matrix");
                }
                data.extend(items.iter());
            }
            let c = c.unwrap_or(0);
            if r == 0 || c == 0 {
                return bad("empty matrix");
            }
            Ok((r, c, data))
        }
        Value::Object(_) => {
            let r = field(v, "rows")?.as_u64().ok_or_else(|| Malformed("rows must be a count".into()))? as usize;
            let c = field(v, "cols")?.as_u64().ok_or_else(|| Malformed("cols must be a count".into()))? as usize;
            let Value::Array(d) = field(v, "data")? else { return bad("data must be an array") };
            if d.len() != r * c || r == 0 {
                return bad("data length does not match rows * cols");
            }
            Ok((r, c, d.iter().collect()))
        }
        _ => bad("expected a matrix"),
    }
}

pub fn parse_rat_matrix(v: &Value) -> Parsed<RatMatrix> {
    let (r, c, d) = rows_of(v)?;
    let data = d.into_iter().map(parse_rational).collect::<Parsed<Vec<_>>>()?;
    Ok(RatMatrix::from_vec(r, c, data))
}

pub fn parse_int_matrix(v: &Value) -> Parsed<IntMatrix> {
    let (r, c, d) = rows_of(v)?;
    let data = d.into_iter().map(parse_integer).collect::<Parsed<Vec<_>>>()?;
    Ok(IntMatrix::from_vec(r, c, data))
}

/// A bare complex scalar is accepted as a 1 x 1 matrix.
pub fn parse_complex_matrix(v: &Value, prec: u32) -> Parsed<ComplexMatrix> {
    if matches!(v, Value::String(_) | Value::Number(_)) || (v.is_object() && v.get("rows").is_none()) {
        return Ok(ComplexMatrix::from_vec(1, 1, vec![parse_complex(v, prec)?]));
    }
    if let Value::Array(a) = v {
        if a.len() == 2 && !a[0].is_array() {
            return Ok(ComplexMatrix::from_vec(1, 1, vec![parse_complex(v, prec)?]));
        }
    }
    let (r, c, d) = rows_of(v)?;
    let data = d.into_iter().map(|x| parse_complex(x, prec)).collect::<Parsed<Vec<_>>>()?;
    Ok(ComplexMatrix::from_vec(r, c, data))
}

pub fn parse_curve(v: &Value) -> Parsed<EllipticCurve> {
    let get = |k: &str| v.get(k).map(parse_rational).transpose();
    let a2 = get("a2")?.unwrap_or_default();
    let a4 = match (get("a")?, get("a4")?) {
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => Rational::new(),
        _ => return bad("give either \"a\" or \"a4\""),
    };
    let a6 = match (get("b")?, get("a6")?) {
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => Rational::new(),
        _ => return bad("give either \"b\" or \"a6\""),
    };
    Ok(EllipticCurve::new(a2, a4, a6)?)
}

pub fn parse_point(v: &Value) -> Parsed<ECPoint> {
    match v {
        Value::String(s) if s == "O" => Ok(ECPoint::Infinity),
        Value::Object(_) => Ok(ECPoint::affine(parse_rational(field(v, "x")?)?, parse_rational(field(v, "y")?)?)),
        _ => bad(format!("expected a point {{\"x\", \"y\"}} or \"O\", got {v}")),
    }
}

// ---------------------------------------------------------------- output

/// Significant decimal digits carried by `prec` bits.
pub fn digits_for(prec: u32) -> usize {
    ((prec as f64) * std::f64::consts::LOG10_2).floor() as usize
}

pub fn float(x: &Float) -> Value {
    Value::String(float_str(x))
}

pub fn float_str(x: &Float) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    x.to_string_radix(10, Some(digits_for(x.prec())))
}

pub fn f64_str(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn rational(q: &Rational) -> Value {
    Value::String(q.to_string())
}

pub fn integer(n: &Integer) -> Value {
    Value::String(n.to_string())
}

pub fn complex(z: &Complex) -> Value {
    json!({ "re": float_str(&z.re), "im": float_str(&z.im) })
}

fn matrix_with<T>(rows: usize, cols: usize, data: &[T], f: impl Fn(&T) -> Value) -> Value {
    json!({ "rows": rows, "cols": cols, "data": data.iter().map(f).collect::<Vec<_>>() })
}

pub fn rat_matrix(m: &RatMatrix) -> Value {
    matrix_with(m.rows(), m.cols(), m.data(), rational)
}

pub fn int_matrix(m: &IntMatrix) -> Value {
    matrix_with(m.rows(), m.cols(), m.data(), integer)
}

pub fn complex_matrix(m: &ComplexMatrix) -> Value {
    matrix_with(m.rows(), m.cols(), m.data(), complex)
}

pub fn point(p: &ECPoint) -> Value {
    match p {
        ECPoint::Infinity => Value::String("O".into()),
        ECPoint::Affine { x, y } => json!({ "x": x.to_string(), "y": y.to_string() }),
    }
}

pub fn curve(e: &EllipticCurve) -> Value {
    let mut m = Map::new();
    if *e.a2() != 0 {
        m.insert("a2".into(), rational(e.a2()));
    }
    m.insert("a".into(), rational(e.a4()));
    m.insert("b".into(), rational(e.a6()));
    Value::Object(m)
}
