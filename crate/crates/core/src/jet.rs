//! Truncated Taylor arithmetic in several variables.
//!
//! A [`Jet2`] carries value, gradient and Hessian of a scalar function at a
//! point; a [`Jet1`] carries value and gradient only. Both propagate exact
//! derivatives through arithmetic by the chain rule (forward mode), so every
//! quantity built from field components by `+ - * /` and the elementary
//! functions keeps its derivatives without finite differencing.
//!
//! The [`Scalar`] trait lets the same linear-algebra and tensor code run on
//! plain `f64`, [`Jet1`] and [`Jet2`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number type that the generic tensor code runs on.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Constant with `dim` (zero) derivative slots.
    fn cst(v: f64, dim: usize) -> Self;
    fn value(&self) -> f64;
    /// Number of independent variables carried (0 for `f64`).
    fn dim(&self) -> usize;
    /// Compose with a scalar function given its value and first two
    /// derivatives at `self.value()`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
    fn scale(&self, c: f64) -> Self;

    fn zero_like(&self) -> Self {
        Self::cst(0.0, self.dim())
    }

    fn powi(&self, k: i32) -> Self {
        let v = self.value();
        let kf = k as f64;
        let f0 = v.powi(k);
        let f1 = if k == 0 { 0.0 } else { kf * v.powi(k - 1) };
        let f2 = if k == 0 || k == 1 { 0.0 } else { kf * (kf - 1.0) * v.powi(k - 2) };
        self.chain(f0, f1, f2)
    }
}

impl Scalar for f64 {
    fn cst(v: f64, _dim: usize) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn dim(&self) -> usize {
        0
    }
    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
}

/// Value and gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Jet1 {
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut grad = vec![0.0; dim];
        grad[index] = 1.0;
        Jet1 { value, grad }
    }

    /// Derivative along the direction `v`.
    pub fn directional(&self, v: &[f64]) -> f64 {
        self.grad.iter().zip(v).map(|(g, x)| g * x).sum()
    }
}

impl Scalar for Jet1 {
    fn cst(v: f64, dim: usize) -> Self {
        Jet1 { value: v, grad: vec![0.0; dim] }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn dim(&self) -> usize {
        self.grad.len()
    }
    fn chain(&self, f0: f64, f1: f64, _f2: f64) -> Self {
        Jet1 { value: f0, grad: self.grad.iter().map(|g| f1 * g).collect() }
    }
    fn scale(&self, c: f64) -> Self {
        Jet1 { value: self.value * c, grad: self.grad.iter().map(|g| g * c).collect() }
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(mut self, rhs: Jet1) -> Jet1 {
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(mut self, rhs: Jet1) -> Jet1 {
        self.value -= rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: Jet1) -> Jet1 {
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(a, b)| self.value * b + rhs.value * a)
            .collect();
        Jet1 { value: self.value * rhs.value, grad }
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    fn div(self, rhs: Jet1) -> Jet1 {
        let v = rhs.value;
        self * rhs.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

/// Value, gradient and Hessian (row-major `n × n`).
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut grad = vec![0.0; dim];
        grad[index] = 1.0;
        Jet2 { value, grad, hess: vec![0.0; dim * dim] }
    }

    /// Seed jets for all coordinates of the point `p`.
    pub fn seed(p: &[f64]) -> Vec<Jet2> {
        let n = p.len();
        p.iter().enumerate().map(|(i, &v)| Jet2::variable(v, i, n)).collect()
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.grad.len() + j]
    }

    /// Drop the Hessian.
    pub fn to_jet1(&self) -> Jet1 {
        Jet1 { value: self.value, grad: self.grad.clone() }
    }

    /// The partial derivative `∂/∂x_k` as a first-order jet.
    pub fn partial(&self, k: usize) -> Jet1 {
        let n = self.grad.len();
        Jet1 { value: self.grad[k], grad: self.hess[k * n..(k + 1) * n].to_vec() }
    }

    /// Largest `|H_ij - H_ji|` relative to `1 + max|H|`.
    pub fn hessian_asymmetry(&self) -> f64 {
        let n = self.grad.len();
        let scale = 1.0 + self.hess.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.h(i, j) - self.h(j, i)).abs());
            }
        }
        worst / scale
    }
}

impl Scalar for Jet2 {
    fn cst(v: f64, dim: usize) -> Self {
        Jet2 { value: v, grad: vec![0.0; dim], hess: vec![0.0; dim * dim] }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn dim(&self) -> usize {
        self.grad.len()
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.grad.len();
        let grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = f1 * self.hess[i * n + j] + f2 * (self.grad[i] * self.grad[j]);
            }
        }
        Jet2 { value: f0, grad, hess }
    }
    fn scale(&self, c: f64) -> Self {
        Jet2 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: Jet2) -> Jet2 {
        self.value -= rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a -= b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let n = self.grad.len();
        let (a, b) = (self.value, rhs.value);
        let grad = self.grad.iter().zip(&rhs.grad).map(|(ga, gb)| a * gb + b * ga).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                // the two outer-product terms are summed in a fixed order so
                // that H_ij and H_ji come out bitwise equal
                let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
                let cross = self.grad[lo] * rhs.grad[hi] + self.grad[hi] * rhs.grad[lo];
                hess[k] = a * rhs.hess[k] + b * self.hess[k] + cross;
            }
        }
        Jet2 { value: a * b, grad, hess }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        let v = rhs.value;
        self * rhs.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}
