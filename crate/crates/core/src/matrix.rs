//! Small dense square matrices.
//!
//! Everything in this crate works with matrices of dimension `dim G` or
//! `2 dim G`, so a row-major `Vec` with partial-pivoting LU is all we need.

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{Float, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<E> {
    n: usize,
    data: Vec<E>,
}

impl<E: Scalar> Matrix<E> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![E::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self { n, data }
    }

    /// Builds from row-major data of length `n * n`.
    pub fn from_row_major(n: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<E>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[E] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)].conjugate())
    }

    pub fn scale(&self, s: E) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> E {
        (0..self.n).fold(E::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn mul_vec(&self, v: &[E]) -> Vec<E> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(E::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `v^T M`, i.e. the row vector `v` multiplied from the left.
    pub fn vec_mul(&self, v: &[E]) -> Vec<E> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = vec![E::zero(); self.n];
        for (r, &vr) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += vr * a;
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> E::Real {
        (0..self.n)
            .map(|c| (0..self.n).map(|r| self[(r, c)].modulus()).sum::<E::Real>())
            .fold(E::Real::zero(), |a, b| a.max(b))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> E::Real {
        (0..self.n)
            .map(|r| self.row(r).iter().map(|x| x.modulus()).sum::<E::Real>())
            .fold(E::Real::zero(), |a, b| a.max(b))
    }

    pub fn norm_frobenius(&self) -> E::Real {
        self.data
            .iter()
            .map(|x| {
                let m = x.modulus();
                m * m
            })
            .sum::<E::Real>()
            .sqrt()
    }

    pub fn max_abs(&self) -> E::Real {
        self.data
            .iter()
            .map(|x| x.modulus())
            .fold(E::Real::zero(), |a, b| a.max(b))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite_entry())
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn lu(&self) -> Lu<E> {
        Lu::new(self.clone())
    }

    /// Inverse together with its 1-norm condition estimate; fails above
    /// [`Real::cond_limit`].
    pub fn inverse_checked(&self, what: &'static str) -> Result<(Self, E::Real)> {
        let lu = self.lu();
        if lu.is_singular() {
            return Err(Error::SingularMatrix {
                what,
                condition: f64::INFINITY,
            });
        }
        let inv = lu.inverse();
        let cond = self.norm_1() * inv.norm_1();
        if !cond.is_finite() || cond > E::Real::cond_limit() {
            return Err(Error::SingularMatrix {
                what,
                condition: cond.as_f64(),
            });
        }
        Ok((inv, cond))
    }

    /// Solves `self * x = b` with the same conditioning guard as
    /// [`Matrix::inverse_checked`].
    pub fn solve_checked(&self, b: &[E], what: &'static str) -> Result<(Vec<E>, E::Real)> {
        let lu = self.lu();
        if lu.is_singular() {
            return Err(Error::SingularMatrix {
                what,
                condition: f64::INFINITY,
            });
        }
        let cond = self.norm_1() * lu.inverse().norm_1();
        if !cond.is_finite() || cond > E::Real::cond_limit() {
            return Err(Error::SingularMatrix {
                what,
                condition: cond.as_f64(),
            });
        }
        Ok((lu.solve(b), cond))
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &E {
        &self.data[r * self.n + c]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut E {
        &mut self.data[r * self.n + c]
    }
}

impl<E: Scalar> Mul for &Matrix<E> {
    type Output = Matrix<E>;
    fn mul(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.n, rhs.n, "matrix product dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == E::zero() {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl<E: Scalar> Add for &Matrix<E> {
    type Output = Matrix<E>;
    fn add(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.n, rhs.n, "matrix sum dimension mismatch");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<E: Scalar> Sub for &Matrix<E> {
    type Output = Matrix<E>;
    fn sub(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.n, rhs.n, "matrix difference dimension mismatch");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<E: Scalar> Neg for &Matrix<E> {
    type Output = Matrix<E>;
    fn neg(self) -> Matrix<E> {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|&a| -a).collect(),
        }
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<E> {
    lu: Matrix<E>,
    perm: Vec<usize>,
    odd_swaps: bool,
    singular: bool,
}

impl<E: Scalar> Lu<E> {
    fn new(mut lu: Matrix<E>) -> Self {
        let n = lu.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd_swaps = false;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, lu[(r, k)].modulus()))
                .fold((k, E::Real::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == E::Real::zero() {
                singular = true;
                continue;
            }
            if p != k {
                for c in 0..n {
                    lu.data.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                odd_swaps = !odd_swaps;
            }
            let pivot = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / pivot;
                lu[(r, k)] = f;
                if f == E::zero() {
                    continue;
                }
                for c in k + 1..n {
                    let u = lu[(k, c)];
                    lu[(r, c)] -= f * u;
                }
            }
        }
        Self {
            lu,
            perm,
            odd_swaps,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> E {
        let mut det = if self.odd_swaps { -E::one() } else { E::one() };
        for i in 0..self.lu.n {
            det *= self.lu[(i, i)];
        }
        det
    }

    pub fn solve(&self, b: &[E]) -> Vec<E> {
        let n = self.lu.n;
        let mut x: Vec<E> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let l = self.lu[(r, c)];
                let xc = x[c];
                x[r] -= l * xc;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let u = self.lu[(r, c)];
                let xc = x[c];
                x[r] -= u * xc;
            }
            x[r] /= self.lu[(r, r)];
        }
        x
    }

    pub fn inverse(&self) -> Matrix<E> {
        let n = self.lu.n;
        let mut inv = Matrix::zeros(n);
        let mut e = vec![E::zero(); n];
        for c in 0..n {
            e.iter_mut().for_each(|x| *x = E::zero());
            e[c] = E::one();
            let col = self.solve(&e);
            for r in 0..n {
                inv[(r, c)] = col[r];
            }
        }
        inv
    }
}

/// Taylor terms used on the scaled matrix; with `||X / 2^s||_1 <= 1/2` the
/// first omitted term is below `0.5^19 / 19! ~ 1.6e-23`.
const EXP_TAYLOR_ORDER: usize = 18;

/// Matrix exponential by scaling and squaring around a truncated Taylor core.
pub fn matrix_exp<E: Scalar>(x: &Matrix<E>) -> Result<Matrix<E>> {
    if !x.is_finite() {
        return Err(Error::NonFinite("matrix_exp"));
    }
    let n = x.dim();
    let norm = x.norm_1();
    let half = E::Real::lit(0.5);
    let mut squarings = 0u32;
    if norm > half {
        squarings = (norm / half).log2().ceil().to_u32().unwrap_or(0);
    }
    let scale = E::Real::lit(0.5).powi(squarings as i32);
    let y = x.scale(E::from_real(scale));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=EXP_TAYLOR_ORDER {
        term = (&term * &y).scale(E::from_real(E::Real::one() / E::Real::from_usize_lossy(k)));
        if term.max_abs() == E::Real::zero() {
            break;
        }
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Real matrix helpers on top of the generic kernel.
impl<R: Real> Matrix<R> {
    pub fn is_symmetric(&self, tol: R) -> bool {
        let n = self.n;
        (0..n).all(|r| (r + 1..n).all(|c| (self[(r, c)] - self[(c, r)]).abs() <= tol))
    }

    /// Embeds a real matrix into complex entries.
    pub fn to_complex(&self) -> Matrix<num_complex::Complex<R>> {
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .map(|&x| num_complex::Complex::new(x, R::zero()))
                .collect(),
        }
    }
}
