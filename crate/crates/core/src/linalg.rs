//! Fixed 2x2 algebra. The model has exactly two forward-looking variables,
//! so every block is either a 2-vector (consumption, inflation) or a 2x2 matrix.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::Serialize;

use crate::scalar::{Real, Scalar};

/// Column vector ordered (consumption, inflation). For structural loadings the
/// first slot is the Euler row and the second the Phillips row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vec2<T> {
    pub c: T,
    pub pi: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(c: T, pi: T) -> Self {
        Self { c, pi }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.c.clone() * s.clone(), self.pi.clone() * s.clone())
    }

    pub fn max_abs(&self) -> T {
        self.c.abs().max_of(self.pi.abs())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Vec2<U> {
        Vec2::new(f(&self.c), f(&self.pi))
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.c + o.c, self.pi + o.pi)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.c - o.c, self.pi - o.pi)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.c, -self.pi)
    }
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Scalar> Mat2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self {
            m: [[a11, a12], [a21, a22]],
        }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.m[i][j]
    }

    pub fn det(&self) -> T {
        let [[a, b], [c, d]] = &self.m;
        a.clone() * d.clone() - b.clone() * c.clone()
    }

    pub fn trace(&self) -> T {
        self.m[0][0].clone() + self.m[1][1].clone()
    }

    /// Adjugate over determinant; `None` when the determinant is exactly zero.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        let [[a, b], [c, d]] = &self.m;
        Some(Self::new(
            d.clone() / det.clone(),
            -b.clone() / det.clone(),
            -c.clone() / det.clone(),
            a.clone() / det,
        ))
    }

    pub fn scale(&self, s: &T) -> Self {
        let [[a, b], [c, d]] = &self.m;
        Self::new(
            a.clone() * s.clone(),
            b.clone() * s.clone(),
            c.clone() * s.clone(),
            d.clone() * s.clone(),
        )
    }

    pub fn mul_vec(&self, v: &Vec2<T>) -> Vec2<T> {
        let [[a, b], [c, d]] = &self.m;
        Vec2::new(
            a.clone() * v.c.clone() + b.clone() * v.pi.clone(),
            c.clone() * v.c.clone() + d.clone() * v.pi.clone(),
        )
    }

    /// `self^n` by binary exponentiation.
    pub fn pow(&self, mut n: usize) -> Self {
        let mut acc = Self::identity();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// `I - r * self`.
    pub fn i_minus_scaled(&self, r: &T) -> Self {
        Self::identity() - self.scale(r)
    }

    pub fn max_abs(&self) -> T {
        self.m
            .iter()
            .flatten()
            .fold(T::zero(), |acc, x| acc.max_of(x.abs()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat2<U> {
        let [[a, b], [c, d]] = &self.m;
        Mat2::new(f(a), f(b), f(c), f(d))
    }
}

impl<T: Real> Mat2<T> {
    /// Roots of `x^2 - tr x + det`, larger real part first.
    pub fn eigenvalues(&self) -> [Complex<T>; 2] {
        let two = T::lit(2.0);
        let half_tr = self.trace() / two;
        let disc = half_tr * half_tr - self.det();
        if disc >= T::zero() {
            let s = disc.sqrt();
            [
                Complex::new(half_tr + s, T::zero()),
                Complex::new(half_tr - s, T::zero()),
            ]
        } else {
            let s = (-disc).sqrt();
            [Complex::new(half_tr, s), Complex::new(half_tr, -s)]
        }
    }

    pub fn spectral_radius(&self) -> T {
        let [a, b] = self.eigenvalues();
        a.norm().max(b.norm())
    }
}

impl<T: Scalar> Mul for &Mat2<T> {
    type Output = Mat2<T>;
    fn mul(self, o: &Mat2<T>) -> Mat2<T> {
        let e = |i: usize, j: usize| {
            self.m[i][0].clone() * o.m[0][j].clone() + self.m[i][1].clone() * o.m[1][j].clone()
        };
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = o.m;
        Self::new(a + e, b + f, c + g, d + h)
    }
}

impl<T: Scalar> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = o.m;
        Self::new(a - e, b - f, c - g, d - h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn inverse_roundtrip_is_exact_in_rationals() {
        let r = |x: f64| BigRational::lit(x);
        let a = Mat2::new(r(1.0), r(1.5), r(-0.1008), r(1.0));
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, Mat2::identity());
    }

    #[test]
    fn singular_has_no_inverse() {
        let a = Mat2::new(1.0, 2.0, 2.0, 4.0);
        assert!(a.inverse().is_none());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let a = Mat2::new(0.9, 0.2, -0.1, 0.7);
        let mut acc = Mat2::identity();
        for n in 0..12 {
            let d = (a.pow(n) - acc.clone()).max_abs();
            assert!(d < 1e-14, "n={n} d={d}");
            acc = &acc * &a;
        }
    }

    #[test]
    fn eigenvalues_real_and_complex() {
        let a = Mat2::new(2.0, 0.0, 0.0, -3.0);
        let [x, y] = a.eigenvalues();
        assert_eq!((x.re, y.re), (2.0, -3.0));
        assert_eq!(a.spectral_radius(), 3.0);
        let rot = Mat2::new(0.0f64, -0.5, 0.5, 0.0);
        let [x, y] = rot.eigenvalues();
        assert_eq!((x.im, y.im), (0.5, -0.5));
        assert!((rot.spectral_radius() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mul_vec() {
        let a = Mat2::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(a.mul_vec(&Vec2::new(1.0, -1.0)), Vec2::new(-1.0, -1.0));
        assert_eq!(a.det(), -2.0);
        assert_eq!(a.trace(), 5.0);
    }
}
