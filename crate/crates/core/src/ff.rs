//! Prime fields, dense matrices over them, and exact scalars in Q(sqrt q).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The prime field F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSpec {
    p: u32,
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

impl FieldSpec {
    pub fn new(p: u32) -> Result<Self> {
        if !(2..=97).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidField(p));
        }
        Ok(FieldSpec { p })
    }

    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        (a + self.p - b) % self.p
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        a * b % self.p
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        (self.p - a) % self.p
    }

    pub fn inv(self, a: u32) -> Result<u32> {
        field_inverse(a, self)
    }

    /// Reduce an arbitrary integer into `0..p`.
    pub fn reduce(self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }
}

/// Multiplicative inverse in F_p.
pub fn field_inverse(x: u32, f: FieldSpec) -> Result<u32> {
    let p = f.p as i64;
    let x = (x as i64).rem_euclid(p);
    if x == 0 {
        return Err(Error::DivisionByZero);
    }
    let (mut r0, mut r1, mut s0, mut s1) = (p, x, 0i64, 1i64);
    while r1 != 0 {
        let t = r0 / r1;
        (r0, r1) = (r1, r0 - t * r1);
        (s0, s1) = (s1, s0 - t * s1);
    }
    Ok(s0.rem_euclid(p) as u32)
}

#[inline]
fn inv_unchecked(x: u32, p: u32) -> u32 {
    field_inverse(x, FieldSpec { p }).expect("pivot is nonzero")
}

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        m
    }

    pub fn from_vec(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeError(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(FpMatrix { p, rows, cols, data: data.into_iter().map(|x| x % p).collect() })
    }

    /// Build from signed integer rows, reducing mod p.
    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeError("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&x| x.rem_euclid(p as i64) as u32).collect();
        Ok(FpMatrix { p, rows: r, cols: c, data })
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let p = self.p as u64;
        let mut out = Self::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = ((*d as u64 + a * b as u64) % p) as u32;
                }
            }
        }
        out
    }

    pub fn try_mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeError(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul(other))
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        let p = self.p as u64;
        (0..self.rows)
            .map(|i| (self.row(i).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % p) as u32)
            .collect()
    }

    pub fn add(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| (a + b) % self.p).collect();
        FpMatrix { p: self.p, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &FpMatrix) -> FpMatrix {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FpMatrix {
        self.scale(self.p - 1)
    }

    pub fn scale(&self, c: u32) -> FpMatrix {
        let data = self.data.iter().map(|&a| a * (c % self.p) % self.p).collect();
        FpMatrix { p: self.p, rows: self.rows, cols: self.cols, data }
    }

    /// Block diagonal sum.
    pub fn block_diag(&self, other: &FpMatrix) -> FpMatrix {
        let mut m = Self::zeros(self.p, self.rows + other.rows, self.cols + other.cols);
        m.paste(0, 0, self);
        m.paste(self.rows, self.cols, other);
        m
    }

    /// Copy `src` into `self` with its top-left corner at `(r, c)`.
    pub fn paste(&mut self, r: usize, c: usize, src: &FpMatrix) {
        for i in 0..src.rows {
            for j in 0..src.cols {
                self.data[(r + i) * self.cols + c + j] = src.get(i, j);
            }
        }
    }

    pub fn submatrix(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> FpMatrix {
        let mut m = Self::zeros(self.p, nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                m.data[i * nc + j] = self.get(r0 + i, c0 + j);
            }
        }
        m
    }

    pub fn hstack(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.rows, other.rows);
        let mut m = Self::zeros(self.p, self.rows, self.cols + other.cols);
        m.paste(0, 0, self);
        m.paste(0, self.cols, other);
        m
    }

    pub fn vstack(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        FpMatrix { p: self.p, rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(p: u32, rows: usize, cols: &[Vec<u32>]) -> FpMatrix {
        let mut m = Self::zeros(p, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m.data[i * cols.len() + j] = x;
            }
        }
        m
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..cols {
                    self.data.swap(piv * cols + j, r * cols + j);
                }
            }
            let inv = inv_unchecked(self.data[r * cols + c], p);
            for j in c..cols {
                self.data[r * cols + j] = self.data[r * cols + j] * inv % p;
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c];
                if f == 0 {
                    continue;
                }
                for j in c..cols {
                    let sub = f * self.data[r * cols + j] % p;
                    self.data[i * cols + j] = (self.data[i * cols + j] + p - sub) % p;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Echelonized basis of the null space: one vector per free column,
    /// with a 1 in that column.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let (r, pivots) = self.rref();
        let p = self.p;
        let mut is_pivot = vec![None; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            is_pivot[c] = Some(i);
        }
        let mut out = Vec::new();
        for f in 0..self.cols {
            if is_pivot[f].is_some() {
                continue;
            }
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = (p - r.get(i, f)) % p;
            }
            out.push(v);
        }
        out
    }

    /// One solution of `self * x = rhs` with free variables set to zero.
    pub fn solve_linear(&self, rhs: &[u32]) -> Result<Option<Vec<u32>>> {
        if rhs.len() != self.rows {
            return Err(Error::ShapeError(format!("rhs length {} for {} rows", rhs.len(), self.rows)));
        }
        let aug = self.hstack(&FpMatrix::from_cols(self.p, self.rows, &[rhs.iter().map(|x| x % self.p).collect()]));
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0u32; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = r.get(i, self.cols);
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Option<FpMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(self.clone());
        }
        let aug = self.hstack(&FpMatrix::identity(self.p, n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.submatrix(0, n, n, n))
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Basis (as columns of the result) of the column space, taken from
    /// the pivot columns of `self`.
    pub fn column_space(&self) -> FpMatrix {
        let (_, pivots) = self.rref();
        let cols: Vec<Vec<u32>> = pivots.iter().map(|&c| self.col(c)).collect();
        FpMatrix::from_cols(self.p, self.rows, &cols)
    }

    pub fn pow(&self, k: u32) -> FpMatrix {
        let mut acc = FpMatrix::identity(self.p, self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Exact element a + b*sqrt(q) of Q(sqrt q) with rational a, b.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoeffScalar {
    q: u32,
    a: BigRational,
    b: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl CoeffScalar {
    pub fn new(q: u32, a: BigRational, b: BigRational) -> Self {
        CoeffScalar { q, a, b }
    }

    pub fn zero(q: u32) -> Self {
        Self::new(q, BigRational::zero(), BigRational::zero())
    }

    pub fn one(q: u32) -> Self {
        Self::from_int(q, 1)
    }

    pub fn from_int(q: u32, n: i64) -> Self {
        Self::new(q, rat(n), BigRational::zero())
    }

    pub fn from_frac(q: u32, n: i64, d: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new(q, BigRational::new(BigInt::from(n), BigInt::from(d)), BigRational::zero()))
    }

    /// sqrt(q) itself.
    pub fn sqrt_q(q: u32) -> Self {
        Self::new(q, BigRational::zero(), BigRational::one())
    }

    /// q^m for integer m.
    pub fn q_power(q: u32, m: i64) -> Self {
        Self::v_power(q, 2 * m)
    }

    /// v^k = q^(k/2), covering half-integer powers of q.
    pub fn v_power(q: u32, k: i64) -> Self {
        let half = k.div_euclid(2);
        let base = BigRational::from_integer(BigInt::from(q));
        let r = if half >= 0 {
            num_traits::pow(base, half as usize)
        } else {
            num_traits::pow(base.recip(), (-half) as usize)
        };
        if k.rem_euclid(2) == 0 {
            Self::new(q, r, BigRational::zero())
        } else {
            Self::new(q, BigRational::zero(), r)
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }
    pub fn sqrt_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    fn same_q(&self, o: &Self) {
        assert_eq!(self.q, o.q, "scalars over different q");
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let qq = rat(self.q as i64);
        let norm = &self.a * &self.a - &qq * &self.b * &self.b;
        Ok(Self::new(self.q, &self.a / &norm, -(&self.b / &norm)))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.q);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }
}

impl Add for &CoeffScalar {
    type Output = CoeffScalar;
    fn add(self, o: &CoeffScalar) -> CoeffScalar {
        self.same_q(o);
        CoeffScalar::new(self.q, &self.a + &o.a, &self.b + &o.b)
    }
}

impl Sub for &CoeffScalar {
    type Output = CoeffScalar;
    fn sub(self, o: &CoeffScalar) -> CoeffScalar {
        self.same_q(o);
        CoeffScalar::new(self.q, &self.a - &o.a, &self.b - &o.b)
    }
}

impl Mul for &CoeffScalar {
    type Output = CoeffScalar;
    fn mul(self, o: &CoeffScalar) -> CoeffScalar {
        self.same_q(o);
        let qq = rat(self.q as i64);
        CoeffScalar::new(
            self.q,
            &self.a * &o.a + qq * &self.b * &o.b,
            &self.a * &o.b + &self.b * &o.a,
        )
    }
}

impl Neg for &CoeffScalar {
    type Output = CoeffScalar;
    fn neg(self) -> CoeffScalar {
        CoeffScalar::new(self.q, -&self.a, -&self.b)
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for CoeffScalar {
            type Output = CoeffScalar;
            fn $m(self, o: CoeffScalar) -> CoeffScalar {
                (&self).$m(&o)
            }
        }
        impl $tr<&CoeffScalar> for CoeffScalar {
            type Output = CoeffScalar;
            fn $m(self, o: &CoeffScalar) -> CoeffScalar {
                (&self).$m(o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for CoeffScalar {
    type Output = CoeffScalar;
    fn neg(self) -> CoeffScalar {
        -&self
    }
}

impl fmt::Display for CoeffScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt({})", self.b, self.q),
            (false, false) => {
                let sign = if self.b.is_negative() { "-" } else { "+" };
                write!(f, "{} {} {}*sqrt({})", self.a, sign, self.b.abs(), self.q)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_examples() {
        let f = FieldSpec::new(7).unwrap();
        assert_eq!(field_inverse(4, f), Ok(2));
        assert_eq!(field_inverse(0, f), Err(Error::DivisionByZero));
        assert!(FieldSpec::new(9).is_err());
        assert!(FieldSpec::new(101).is_err());
    }

    #[test]
    fn kernel_and_solve_examples() {
        let m = FpMatrix::from_rows(2, &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.kernel_basis(), vec![vec![1, 1]]);
        let m = FpMatrix::from_rows(2, &[vec![1, 1]]).unwrap();
        assert_eq!(m.solve_linear(&[1]).unwrap(), Some(vec![1, 0]));
        assert!(matches!(m.solve_linear(&[1, 0]), Err(Error::ShapeError(_))));
    }

    #[test]
    fn rank_nullity_on_seeded_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = [2, 3, 5, 7][rng.gen_range(0..4)];
            let (r, c) = (rng.gen_range(1..7), rng.gen_range(1..7));
            let data = (0..r * c).map(|_| rng.gen_range(0..p)).collect();
            let m = FpMatrix::from_vec(p, r, c, data).unwrap();
            let ker = m.kernel_basis();
            assert_eq!(m.rank() + ker.len(), c);
            for v in &ker {
                assert!(m.mul_vec(v).iter().all(|&x| x == 0));
            }
            if let Some(inv) = m.inverse() {
                assert_eq!(m.mul(&inv), FpMatrix::identity(p, r));
            }
        }
    }

    fn scalar(q: u32, a: (i64, i64), b: (i64, i64)) -> CoeffScalar {
        CoeffScalar::new(
            q,
            BigRational::new(a.0.into(), a.1.into()),
            BigRational::new(b.0.into(), b.1.into()),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn scalar_field_axioms(
            q in prop::sample::select(vec![2u32, 3, 5]),
            x in (-9i64..9, 1i64..5, -9i64..9, 1i64..5),
            y in (-9i64..9, 1i64..5, -9i64..9, 1i64..5),
            z in (-9i64..9, 1i64..5, -9i64..9, 1i64..5),
        ) {
            let x = scalar(q, (x.0, x.1), (x.2, x.3));
            let y = scalar(q, (y.0, y.1), (y.2, y.3));
            let z = scalar(q, (z.0, z.1), (z.2, z.3));
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!((&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &x * &y + &x * &z);
            if !x.is_zero() {
                prop_assert_eq!(x.inv().unwrap().inv().unwrap(), x.clone());
                prop_assert!((&x * &x.inv().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn half_integer_powers() {
        let v = CoeffScalar::v_power(2, 1);
        assert_eq!(&v * &v, CoeffScalar::from_int(2, 2));
        assert_eq!(CoeffScalar::v_power(3, -3), CoeffScalar::q_power(3, -2) * CoeffScalar::sqrt_q(3));
        assert_eq!(CoeffScalar::q_power(2, 3).pow(-1).unwrap(), CoeffScalar::from_frac(2, 1, 8).unwrap());
    }
}
