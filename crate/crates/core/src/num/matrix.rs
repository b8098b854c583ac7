use std::fmt;
use std::ops::{Index, IndexMut};

use rug::{Float, Integer, Rational};

use super::complex::Complex;

/// Minimal ring interface shared by the scalar types used in matrices.
///
/// Zero and one are produced from an existing element so that floating
/// types inherit its precision.
pub trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

/// Scalars with division.
pub trait FieldScalar: Scalar {
    fn div(&self, o: &Self) -> Self;
    /// Magnitude used for pivot selection. Exact fields only need non-zero.
    fn pivot_size(&self) -> f64;
}

impl Scalar for Integer {
    fn zero_like(&self) -> Self {
        Integer::new()
    }
    fn one_like(&self) -> Self {
        Integer::from(1)
    }
    fn add(&self, o: &Self) -> Self {
        Integer::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Integer::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Integer::from(self * o)
    }
    fn neg(&self) -> Self {
        Integer::from(-self)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
}

impl Scalar for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn one_like(&self) -> Self {
        Rational::from(1)
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
}

impl FieldScalar for Rational {
    fn div(&self, o: &Self) -> Self {
        Rational::from(self / o)
    }
    fn pivot_size(&self) -> f64 {
        if Scalar::is_zero(self) {
            0.0
        } else {
            1.0
        }
    }
}

impl Scalar for Float {
    fn zero_like(&self) -> Self {
        Float::new(self.prec())
    }
    fn one_like(&self) -> Self {
        Float::with_val(self.prec(), 1)
    }
    fn add(&self, o: &Self) -> Self {
        Float::with_val(self.prec().max(o.prec()), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Float::with_val(self.prec().max(o.prec()), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Float::with_val(self.prec().max(o.prec()), self * o)
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
}

impl FieldScalar for Float {
    fn div(&self, o: &Self) -> Self {
        Float::with_val(self.prec().max(o.prec()), self / o)
    }
    fn pivot_size(&self) -> f64 {
        // log2 magnitude keeps very small and very large pivots comparable
        if Float::is_zero(self) {
            f64::NEG_INFINITY
        } else {
            let (m, e) = self.to_f64_exp();
            m.abs().log2() + e as f64
        }
    }
}

impl Scalar for Complex {
    fn zero_like(&self) -> Self {
        Complex::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        Complex::one(self.prec())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Complex::is_zero(self)
    }
}

impl FieldScalar for Complex {
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn pivot_size(&self) -> f64 {
        if Complex::is_zero(self) {
            f64::NEG_INFINITY
        } else {
            let a = self.abs();
            let (m, e) = a.to_f64_exp();
            m.abs().log2() + e as f64
        }
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<Integer>;
pub type RatMatrix = Matrix<Rational>;
pub type RealMatrix = Matrix<Float>;
pub type ComplexMatrix = Matrix<Complex>;

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T: Clone> Matrix<T> {
    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Matrix::from_fn(nr, nc, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    /// Assemble `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let (n1, n2, m1) = (a.rows, c.rows, a.cols);
        Matrix::from_fn(n1 + n2, a.cols + b.cols, |r, col| {
            match (r < n1, col < m1) {
                (true, true) => a[(r, col)].clone(),
                (true, false) => b[(r, col - m1)].clone(),
                (false, true) => c[(r - n1, col)].clone(),
                (false, false) => d[(r - n1, col - m1)].clone(),
            }
        })
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros_like(rows: usize, cols: usize, template: &T) -> Self {
        Matrix::from_fn(rows, cols, |_, _| template.zero_like())
    }

    pub fn identity_like(n: usize, template: &T) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { template.one_like() } else { template.zero_like() })
    }

    fn template(&self) -> &T {
        self.data.first().expect("empty matrix has no scalar template")
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        let z = self.template().zero_like();
        Matrix::from_fn(self.rows, o.cols, |r, c| {
            let mut acc = z.clone();
            for k in 0..self.cols {
                acc = acc.add(&self[(r, k)].mul(&o[(k, c)]));
            }
            acc
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].add(&o[(r, c)]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].sub(&o[(r, c)]))
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.neg())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.mul(s))
    }

    pub fn trace(&self) -> T {
        assert!(self.is_square());
        let mut acc = self.template().zero_like();
        for i in 0..self.rows {
            acc = acc.add(&self[(i, i)]);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|r| (0..r).all(|c| self[(r, c)] == self[(c, r)]))
    }

    /// Standard symplectic form `[[0, I], [-I, 0]]` of size `2g`.
    pub fn symplectic_j(g: usize, template: &T) -> Self {
        let one = template.one_like();
        let zero = template.zero_like();
        Matrix::from_fn(2 * g, 2 * g, |r, c| {
            if c == r + g {
                one.clone()
            } else if r == c + g {
                one.neg()
            } else {
                zero.clone()
            }
        })
    }

    /// Determinant by fraction-free Bareiss elimination for exact rings,
    /// valid for any commutative ring in which the pivots divide exactly.
    /// Floating callers should use [`Matrix::det_field`].
    pub fn det_bareiss(&self, exact_div: impl Fn(&T, &T) -> T) -> T {
        assert!(self.is_square());
        let n = self.rows;
        assert!(n > 0, "determinant of an empty matrix needs a scalar template");
        let mut a = self.clone();
        let mut sign_neg = false;
        let mut prev = self.template().one_like();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&r| !a[(r, k)].is_zero()) {
                    Some(r) => {
                        a.swap_rows(k, r);
                        sign_neg = !sign_neg;
                    }
                    None => return self.template().zero_like(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[(i, j)].mul(&a[(k, k)]).sub(&a[(i, k)].mul(&a[(k, j)]));
                    a[(i, j)] = exact_div(&v, &prev);
                }
            }
            prev = a[(k, k)].clone();
        }
        let d = a[(n - 1, n - 1)].clone();
        if sign_neg {
            d.neg()
        } else {
            d
        }
    }
}

impl<T: FieldScalar> Matrix<T> {
    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det_field(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = self.template().one_like();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].pivot_size().total_cmp(&a[(j, k)].pivot_size()))
                .unwrap();
            if a[(p, k)].is_zero() {
                return self.template().zero_like();
            }
            if p != k {
                a.swap_rows(p, k);
                det = det.neg();
            }
            det = det.mul(&a[(k, k)]);
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].div(&a[(k, k)]);
                for j in k..n {
                    a[(i, j)] = a[(i, j)].sub(&f.mul(&a[(k, j)]));
                }
            }
        }
        det
    }

    /// Solve `self * X = b` by Gauss-Jordan with partial pivoting. Returns
    /// `None` when a pivot is exactly zero.
    pub fn solve(&self, b: &Self) -> Option<Self> {
        assert!(self.is_square());
        assert_eq!(self.rows, b.rows);
        let n = self.rows;
        let m = b.cols;
        let mut a = self.clone();
        let mut x = b.clone();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].pivot_size().total_cmp(&a[(j, k)].pivot_size()))
                .unwrap();
            if a[(p, k)].is_zero() {
                return None;
            }
            a.swap_rows(p, k);
            x.swap_rows(p, k);
            let piv = a[(k, k)].clone();
            for j in 0..n {
                a[(k, j)] = a[(k, j)].div(&piv);
            }
            for j in 0..m {
                x[(k, j)] = x[(k, j)].div(&piv);
            }
            for i in 0..n {
                if i == k || a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone();
                for j in 0..n {
                    a[(i, j)] = a[(i, j)].sub(&f.mul(&a[(k, j)]));
                }
                for j in 0..m {
                    x[(i, j)] = x[(i, j)].sub(&f.mul(&x[(k, j)]));
                }
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        let id = Matrix::identity_like(self.rows, self.template());
        self.solve(&id)
    }
}

impl IntMatrix {
    pub fn from_i64(rows: usize, cols: usize, vals: &[i64]) -> Self {
        Matrix::from_vec(rows, cols, vals.iter().map(|&v| Integer::from(v)).collect())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::identity_like(n, &Integer::new())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| Integer::new())
    }

    pub fn j(g: usize) -> Self {
        Matrix::symplectic_j(g, &Integer::new())
    }

    pub fn det(&self) -> Integer {
        if self.rows == 0 {
            return Integer::from(1);
        }
        self.det_bareiss(|a, b| Integer::from(a.div_exact_ref(b)))
    }

    pub fn to_rational(&self) -> RatMatrix {
        self.map(|x| Rational::from(x.clone()))
    }

    pub fn to_complex(&self, prec: u32) -> ComplexMatrix {
        self.map(|x| Complex::from_integer(prec, x))
    }

    pub fn to_real(&self, prec: u32) -> RealMatrix {
        self.map(|x| Float::with_val(prec, x))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Integer {
        self.data.iter().map(|x| x.clone().abs()).max().unwrap_or_default()
    }

    /// `M^T J M == J` for the standard form of size `2g`.
    pub fn is_symplectic(&self) -> bool {
        if !self.is_square() || !self.rows.is_multiple_of(2) {
            return false;
        }
        let j = IntMatrix::j(self.rows / 2);
        self.transpose().mul(&j).mul(self) == j
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && self.det().clone().abs() == 1
    }

    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        let inv = self.to_rational().inverse()?;
        let mut out = Vec::with_capacity(inv.data.len());
        for x in inv.data {
            if *x.denom() != 1 {
                return None;
            }
            out.push(x.into_numer_denom().0);
        }
        Some(Matrix::from_vec(self.rows, self.cols, out))
    }
}

impl RatMatrix {
    pub fn identity(n: usize) -> Self {
        Matrix::identity_like(n, &Rational::new())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| Rational::new())
    }

    pub fn det(&self) -> Rational {
        if self.rows == 0 {
            return Rational::from(1);
        }
        self.det_field()
    }

    pub fn to_complex(&self, prec: u32) -> ComplexMatrix {
        self.map(|x| Complex::from_rational(prec, x))
    }

    pub fn to_real(&self, prec: u32) -> RealMatrix {
        self.map(|x| Float::with_val(prec, x))
    }

    /// Integer matrix if every entry is integral.
    pub fn to_integer(&self) -> Option<IntMatrix> {
        let mut out = Vec::with_capacity(self.data.len());
        for x in &self.data {
            if *x.denom() != 1 {
                return None;
            }
            out.push(x.numer().clone());
        }
        Some(Matrix::from_vec(self.rows, self.cols, out))
    }

    /// Characteristic polynomial `det(xI - M)` by Faddeev-LeVerrier.
    /// Coefficients are returned lowest degree first.
    pub fn charpoly(&self) -> Vec<Rational> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![Rational::new(); n + 1];
        coeffs[n] = Rational::from(1);
        let id = RatMatrix::identity(n);
        let mut m = RatMatrix::zeros(n, n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I ; c_{n-k} = -tr(A M_k)/k
            m = self.mul(&m).add(&id.scale(&coeffs[n - k + 1]));
            let t = self.mul(&m).trace();
            coeffs[n - k] = -t / Rational::from(k as u32) ;
        }
        coeffs
    }
}

impl RealMatrix {
    pub fn identity(n: usize, prec: u32) -> Self {
        Matrix::identity_like(n, &Float::new(prec))
    }

    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Matrix::from_fn(rows, cols, |_, _| Float::new(prec))
    }

    pub fn prec(&self) -> u32 {
        self.data.iter().map(|x| x.prec()).max().unwrap_or(53)
    }

    /// Max absolute entry.
    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec());
        for x in &self.data {
            let a = x.clone().abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Cholesky factor `L` with `self = L L^T`, or `None` if not positive
    /// definite at working precision.
    pub fn cholesky(&self) -> Option<RealMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let p = self.prec();
        let mut l = RealMatrix::zeros(n, n, p);
        for j in 0..n {
            let mut s = self[(j, j)].clone();
            for k in 0..j {
                s -= Float::with_val(p, l[(j, k)].square_ref());
            }
            if s <= 0 {
                return None;
            }
            let d = s.sqrt();
            for i in j + 1..n {
                let mut t = self[(i, j)].clone();
                for k in 0..j {
                    t -= Float::with_val(p, &l[(i, k)] * &l[(j, k)]);
                }
                l[(i, j)] = t / &d;
            }
            l[(j, j)] = d;
        }
        Some(l)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        self.map(|x| Complex::from_real(x.clone()))
    }

    pub fn symmetrize(&self) -> Self {
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            Float::with_val(self[(r, c)].prec(), &self[(r, c)] + &self[(c, r)]) / 2u32
        })
    }

    /// `v^T self v` for an integer vector.
    pub fn quad_form_int(&self, v: &[i64]) -> Float {
        let p = self.prec();
        let mut acc = Float::new(p);
        for i in 0..self.rows {
            if v[i] == 0 {
                continue;
            }
            for j in 0..self.cols {
                if v[j] == 0 {
                    continue;
                }
                acc += Float::with_val(p, &self[(i, j)] * (v[i] * v[j]));
            }
        }
        acc
    }
}

impl ComplexMatrix {
    pub fn identity(n: usize, prec: u32) -> Self {
        Matrix::identity_like(n, &Complex::zero(prec))
    }

    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Matrix::from_fn(rows, cols, |_, _| Complex::zero(prec))
    }

    pub fn prec(&self) -> u32 {
        self.data.iter().map(|x| x.prec()).max().unwrap_or(53)
    }

    pub fn from_parts(re: &RealMatrix, im: &RealMatrix) -> Self {
        assert_eq!((re.rows, re.cols), (im.rows, im.cols));
        Matrix::from_fn(re.rows, re.cols, |r, c| Complex::new(re[(r, c)].clone(), im[(r, c)].clone()))
    }

    pub fn re(&self) -> RealMatrix {
        self.map(|z| z.re.clone())
    }

    pub fn im(&self) -> RealMatrix {
        self.map(|z| z.im.clone())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn conj_transpose(&self) -> Self {
        self.transpose().conj()
    }

    pub fn mul_int(&self, m: &IntMatrix) -> Self {
        self.mul(&m.to_complex(self.prec()))
    }

    pub fn int_mul(m: &IntMatrix, z: &Self) -> Self {
        m.to_complex(z.prec()).mul(z)
    }

    /// Max absolute entry.
    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec());
        for x in &self.data {
            let a = x.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Max entrywise distance.
    pub fn dist(&self, o: &Self) -> Float {
        self.sub(o).max_abs()
    }

    /// Characteristic polynomial, lowest degree first.
    pub fn charpoly(&self) -> Vec<Complex> {
        assert!(self.is_square());
        let n = self.rows;
        let p = self.prec();
        let mut coeffs = vec![Complex::zero(p); n + 1];
        coeffs[n] = Complex::one(p);
        let id = ComplexMatrix::identity(n, p);
        let mut m = ComplexMatrix::zeros(n, n, p);
        for k in 1..=n {
            m = self.mul(&m).add(&id.scale(&coeffs[n - k + 1]));
            let t = self.mul(&m).trace();
            coeffs[n - k] = -t.scale(&(Float::with_val(p, 1) / k as u32));
        }
        coeffs
    }

    pub fn symmetrize(&self) -> Self {
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            let s = &self[(r, c)] + &self[(c, r)];
            s.scale(&Float::with_val(s.prec(), 0.5))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_matches_rational_det() {
        let m = IntMatrix::from_i64(3, 3, &[2, -1, 3, 4, 0, 1, -5, 7, 2]);
        assert_eq!(m.det(), m.to_rational().det());
        assert_eq!(m.det(), Integer::from(83));
    }

    #[test]
    fn charpoly_of_companion() {
        // companion of x^3 - 2x + 5
        let m = IntMatrix::from_i64(3, 3, &[0, 0, -5, 1, 0, 2, 0, 1, 0]).to_rational();
        let cp: Vec<i64> = m.charpoly().iter().map(|x| x.to_f64() as i64).collect();
        assert_eq!(cp, vec![5, -2, 0, 1]);
    }

    #[test]
    fn j_is_symplectic() {
        assert!(IntMatrix::j(3).is_symplectic());
        let inv = IntMatrix::j(2).inverse_unimodular().unwrap();
        assert_eq!(inv, IntMatrix::j(2).neg());
    }

    #[test]
    fn complex_inverse_roundtrip() {
        let p = 128;
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex::from_f64(p, 1.0, 2.0),
                Complex::from_f64(p, 0.5, -1.0),
                Complex::from_f64(p, -3.0, 0.0),
                Complex::from_f64(p, 0.0, 1.0),
            ],
        );
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).dist(&ComplexMatrix::identity(2, p)) < 1e-35);
    }

    #[test]
    fn cholesky_reconstructs() {
        let p = 128;
        let m = RealMatrix::from_vec(2, 2, vec![4.0, 2.0, 2.0, 3.0].into_iter().map(|x| Float::with_val(p, x)).collect());
        let l = m.cholesky().unwrap();
        let back = l.mul(&l.transpose());
        assert!(back.sub(&m).max_abs() < 1e-35);
    }
}
