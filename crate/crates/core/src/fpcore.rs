//! Exact arithmetic over the prime field F_p and linear algebra over F_p^n.
//!
//! Additive subgroups of F_p^n coincide with linear subspaces (a scalar
//! multiple is repeated addition), so every "subgroup generated by" in the
//! rest of the crate is a linear span here. Subspaces are stored in reduced
//! row-echelon form, which is canonical: two subspaces are equal exactly when
//! their stored bases are identical.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};

/// Largest modulus accepted. Products of two residues must fit in a `u64`.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

/// Default bound on the number of subspaces [`enumerate_subspaces`] may emit.
pub const DEFAULT_SUBSPACE_CAP: u128 = 1_000_000;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A validated prime modulus together with the scalar kernels used
/// everywhere else. Residues are plain `u32` values in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_PRIME {
            return Err(Error::input(format!("modulus {p} exceeds 2^31 - 1")));
        }
        if !is_prime(p) {
            return Err(Error::input(format!("{p} is not prime")));
        }
        Ok(Prime(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let p = self.0 as u64;
        (if s >= p { s - p } else { s }) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.0 as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    /// `acc + a * b`
    #[inline]
    pub fn mul_add(self, acc: u32, a: u32, b: u32) -> u32 {
        ((acc as u64 + a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, base: u32, mut exp: u64) -> u32 {
        let mut result = 1 % self.0;
        let mut b = base % self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Result<u32> {
        let a = a % self.0;
        if a == 0 {
            return Err(Error::DivisionByZero { p: self.0 });
        }
        let (mut r0, mut r1) = (self.0 as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce(t0))
    }

    pub fn scalar(self, v: i64) -> FpScalar {
        FpScalar {
            value: self.reduce(v),
            p: self,
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpScalar {
    value: u32,
    p: Prime,
}

impl FpScalar {
    pub fn new(value: i64, p: Prime) -> Self {
        p.scalar(value)
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> Prime {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Self> {
        Ok(FpScalar {
            value: self.p.inv(self.value)?,
            p: self.p,
        })
    }

    pub fn pow(self, exp: u64) -> Self {
        FpScalar {
            value: self.p.pow(self.value, exp),
            p: self.p,
        }
    }
}

/// Multiplicative inverse of a nonzero scalar.
pub fn fp_inv(a: FpScalar) -> Result<FpScalar> {
    a.inv()
}

macro_rules! scalar_binop {
    ($tr:ident, $method:ident, $kernel:ident) => {
        impl $tr for FpScalar {
            type Output = FpScalar;
            fn $method(self, rhs: FpScalar) -> FpScalar {
                assert_eq!(self.p, rhs.p, "mixed moduli");
                FpScalar {
                    value: self.p.$kernel(self.value, rhs.value),
                    p: self.p,
                }
            }
        }
    };
}

scalar_binop!(Add, add, add);
scalar_binop!(Sub, sub, sub);
scalar_binop!(Mul, mul, mul);

impl Neg for FpScalar {
    type Output = FpScalar;
    fn neg(self) -> FpScalar {
        FpScalar {
            value: self.p.neg(self.value),
            p: self.p,
        }
    }
}

impl fmt::Display for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A coordinate vector in F_p^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpVector {
    p: Prime,
    coords: Vec<u32>,
}

impl FpVector {
    /// Builds a vector, reducing every coordinate into `[0, p)`.
    pub fn new(p: Prime, coords: impl IntoIterator<Item = i64>) -> Self {
        FpVector {
            p,
            coords: coords.into_iter().map(|c| p.reduce(c)).collect(),
        }
    }

    /// Wraps coordinates that are already reduced.
    pub fn from_raw(p: Prime, coords: Vec<u32>) -> Self {
        debug_assert!(coords.iter().all(|&c| c < p.get()));
        FpVector { p, coords }
    }

    pub fn zero(p: Prime, n: usize) -> Self {
        FpVector { p, coords: vec![0; n] }
    }

    pub fn unit(p: Prime, n: usize, i: usize) -> Self {
        let mut coords = vec![0; n];
        coords[i] = 1 % p.get();
        FpVector { p, coords }
    }

    pub fn random<R: Rng + ?Sized>(p: Prime, n: usize, rng: &mut R) -> Self {
        FpVector {
            p,
            coords: (0..n).map(|_| rng.gen_range(0..p.get())).collect(),
        }
    }

    /// Inverse of [`FpVector::rank`].
    pub fn from_rank(p: Prime, n: usize, mut rank: u64) -> Self {
        let q = p.get() as u64;
        let coords = (0..n)
            .map(|_| {
                let c = (rank % q) as u32;
                rank /= q;
                c
            })
            .collect();
        FpVector { p, coords }
    }

    /// Mixed-radix index of the vector, least-significant coordinate first.
    pub fn rank(&self) -> u64 {
        rank_of(self.p, &self.coords)
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<u32> {
        self.coords
    }

    pub fn get(&self, i: usize) -> FpScalar {
        FpScalar {
            value: self.coords[i],
            p: self.p,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, s: u32) -> Self {
        FpVector {
            p: self.p,
            coords: self.coords.iter().map(|&c| self.p.mul(c, s)).collect(),
        }
    }

    fn check_compatible(&self, other: &FpVector) {
        assert!(
            self.p == other.p && self.coords.len() == other.coords.len(),
            "vector ambient mismatch: F_{}^{} vs F_{}^{}",
            self.p,
            self.coords.len(),
            other.p,
            other.coords.len()
        );
    }

    pub(crate) fn ensure_in(&self, p: Prime, n: usize) -> Result<()> {
        if self.p != p || self.coords.len() != n {
            return Err(Error::input(format!(
                "vector lives in F_{}^{}, expected F_{}^{}",
                self.p,
                self.coords.len(),
                p,
                n
            )));
        }
        Ok(())
    }
}

pub(crate) fn rank_of(p: Prime, coords: &[u32]) -> u64 {
    coords
        .iter()
        .rev()
        .fold(0u64, |acc, &c| acc * p.get() as u64 + c as u64)
}

impl Add for &FpVector {
    type Output = FpVector;
    fn add(self, rhs: &FpVector) -> FpVector {
        self.check_compatible(rhs);
        FpVector {
            p: self.p,
            coords: add_raw(self.p, &self.coords, &rhs.coords),
        }
    }
}

impl Sub for &FpVector {
    type Output = FpVector;
    fn sub(self, rhs: &FpVector) -> FpVector {
        self.check_compatible(rhs);
        FpVector {
            p: self.p,
            coords: sub_raw(self.p, &self.coords, &rhs.coords),
        }
    }
}

impl Neg for &FpVector {
    type Output = FpVector;
    fn neg(self) -> FpVector {
        FpVector {
            p: self.p,
            coords: neg_raw(self.p, &self.coords),
        }
    }
}

impl fmt::Display for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

// Slice kernels shared by the algebra modules.

#[inline]
pub(crate) fn add_raw(p: Prime, a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| p.add(x, y)).collect()
}

#[inline]
pub(crate) fn sub_raw(p: Prime, a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| p.sub(x, y)).collect()
}

#[inline]
pub(crate) fn neg_raw(p: Prime, a: &[u32]) -> Vec<u32> {
    a.iter().map(|&x| p.neg(x)).collect()
}

#[inline]
pub(crate) fn scale_raw(p: Prime, a: &[u32], s: u32) -> Vec<u32> {
    a.iter().map(|&x| p.mul(x, s)).collect()
}

/// `acc += s * v`
#[inline]
pub(crate) fn axpy(p: Prime, acc: &mut [u32], s: u32, v: &[u32]) {
    if s == 0 {
        return;
    }
    for (a, &x) in acc.iter_mut().zip(v) {
        *a = p.mul_add(*a, s, x);
    }
}

pub(crate) fn format_raw(v: &[u32]) -> String {
    let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(","))
}

/// A dense matrix over F_p, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    p: Prime,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: Prime, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: Prime, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % p.get();
        }
        m
    }

    pub fn from_rows(p: Prime, rows: &[Vec<u32>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::input("ragged matrix rows"));
            }
            data.extend(r.iter().map(|&c| c % p.get()));
        }
        Ok(FpMatrix {
            p,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p.get();
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0u32, |acc, (&a, &b)| self.p.mul_add(acc, a, b))
            })
            .collect()
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                axpy(self.p, dst, a, other.row(k));
            }
        }
        out
    }

    /// Reduced row-echelon form, pivots chosen at the lowest column index.
    /// Returns the reduced matrix and its pivot columns.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = p.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in 0..m.cols {
                let v = m.get(r, j);
                m.data[r * m.cols + j] = p.mul(v, inv);
            }
            let pivot_row: Vec<u32> = m.row(r).to_vec();
            for i in 0..m.rows {
                if i != r {
                    let f = m.get(i, c);
                    if f != 0 {
                        let dst = &mut m.data[i * m.cols..(i + 1) * m.cols];
                        axpy(p, dst, p.neg(f), &pivot_row);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : M v = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let (red, pivots) = self.rref();
        let p = self.p;
        (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![0; self.cols];
                v[free] = 1 % p.get();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = p.neg(red.get(r, free));
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Result<FpMatrix> {
        if self.rows != self.cols {
            return Err(Error::input("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let mut aug = FpMatrix::zeros(self.p, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.data[r * 2 * n + c] = self.get(r, c);
            }
            aug.data[r * 2 * n + n + r] = 1 % self.p.get();
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::input("matrix is singular"));
        }
        let mut inv = FpMatrix::zeros(self.p, n, n);
        for r in 0..n {
            for c in 0..n {
                inv.data[r * n + c] = red.get(r, n + c);
            }
        }
        Ok(inv)
    }
}

/// A linear subspace (equivalently an additive subgroup) of F_p^n.
///
/// The basis is kept in reduced row-echelon form with rows sorted by pivot
/// column, so derived equality is subspace equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpSubspace {
    p: Prime,
    n: usize,
    basis: Vec<Vec<u32>>,
}

impl FpSubspace {
    pub fn zero(p: Prime, n: usize) -> Self {
        FpSubspace {
            p,
            n,
            basis: Vec::new(),
        }
    }

    pub fn full(p: Prime, n: usize) -> Self {
        let basis = (0..n).map(|i| FpVector::unit(p, n, i).coords).collect();
        FpSubspace { p, n, basis }
    }

    /// Canonical basis of the span of `vectors`.
    pub fn span(p: Prime, n: usize, vectors: &[FpVector]) -> Result<Self> {
        let mut s = Self::zero(p, n);
        for v in vectors {
            v.ensure_in(p, n)?;
            s.insert_raw(v.coords());
        }
        Ok(s)
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.n
    }

    /// Number of elements, `p^dim`.
    pub fn cardinality(&self) -> u128 {
        (self.p.get() as u128).saturating_pow(self.basis.len() as u32)
    }

    pub fn basis_raw(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn basis(&self) -> Vec<FpVector> {
        self.basis
            .iter()
            .map(|r| FpVector::from_raw(self.p, r.clone()))
            .collect()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.iter().position(|&c| c != 0).expect("basis rows are nonzero"))
            .collect()
    }

    /// Remainder of `v` after elimination against the basis; zero iff `v` is in the span.
    pub(crate) fn reduce_raw(&self, v: &[u32]) -> Vec<u32> {
        let mut w = v.to_vec();
        for row in &self.basis {
            let pc = row.iter().position(|&c| c != 0).expect("nonzero row");
            let f = w[pc];
            if f != 0 {
                axpy(self.p, &mut w, self.p.neg(f), row);
            }
        }
        w
    }

    pub(crate) fn contains_raw(&self, v: &[u32]) -> bool {
        self.reduce_raw(v).iter().all(|&c| c == 0)
    }

    pub fn contains(&self, v: &FpVector) -> Result<bool> {
        v.ensure_in(self.p, self.n)?;
        Ok(self.contains_raw(v.coords()))
    }

    /// Adds `v` to the span in place. Returns true if the dimension grew.
    pub(crate) fn insert_raw(&mut self, v: &[u32]) -> bool {
        debug_assert_eq!(v.len(), self.n);
        let mut w = self.reduce_raw(v);
        let Some(pc) = w.iter().position(|&c| c != 0) else {
            return false;
        };
        let inv = self.p.inv(w[pc]).expect("nonzero pivot");
        w = scale_raw(self.p, &w, inv);
        for row in self.basis.iter_mut() {
            let f = row[pc];
            if f != 0 {
                axpy(self.p, row, self.p.neg(f), &w);
            }
        }
        let pos = self
            .basis
            .iter()
            .position(|r| r.iter().position(|&c| c != 0).unwrap() > pc)
            .unwrap_or(self.basis.len());
        self.basis.insert(pos, w);
        true
    }

    pub fn insert(&mut self, v: &FpVector) -> Result<bool> {
        v.ensure_in(self.p, self.n)?;
        Ok(self.insert_raw(v.coords()))
    }

    fn ensure_same_ambient(&self, other: &FpSubspace) -> Result<()> {
        if self.p != other.p || self.n != other.n {
            return Err(Error::input(format!(
                "subspaces of F_{}^{} and F_{}^{} are not comparable",
                self.p, self.n, other.p, other.n
            )));
        }
        Ok(())
    }

    pub fn sum(&self, other: &FpSubspace) -> Result<FpSubspace> {
        self.ensure_same_ambient(other)?;
        let mut s = self.clone();
        for r in &other.basis {
            s.insert_raw(r);
        }
        Ok(s)
    }

    pub fn intersect(&self, other: &FpSubspace) -> Result<FpSubspace> {
        self.ensure_same_ambient(other)?;
        // Solve Σ s_i a_i = Σ t_j b_j; the kernel's s-part gives the meet.
        let (ds, dt) = (self.dim(), other.dim());
        let mut m = FpMatrix::zeros(self.p, self.n, ds + dt);
        for (i, a) in self.basis.iter().enumerate() {
            for (r, &x) in a.iter().enumerate() {
                m.set(r, i, x);
            }
        }
        for (j, b) in other.basis.iter().enumerate() {
            for (r, &x) in b.iter().enumerate() {
                m.set(r, ds + j, self.p.neg(x));
            }
        }
        let mut out = FpSubspace::zero(self.p, self.n);
        for k in m.kernel() {
            out.insert_raw(&self.combine(&k[..ds]));
        }
        Ok(out)
    }

    pub fn is_subspace_of(&self, other: &FpSubspace) -> Result<bool> {
        self.ensure_same_ambient(other)?;
        Ok(self.basis.iter().all(|r| other.contains_raw(r)))
    }

    /// Equality that reports an ambient mismatch instead of answering `false`.
    pub fn equals(&self, other: &FpSubspace) -> Result<bool> {
        self.ensure_same_ambient(other)?;
        Ok(self.basis == other.basis)
    }

    /// Iterates over all `p^dim` elements.
    pub fn elements(&self) -> SubspaceElements<'_> {
        SubspaceElements {
            space: self,
            digits: vec![0; self.basis.len()],
            current: vec![0; self.n],
            done: false,
        }
    }

    /// The element with coefficient vector `t` in the stored basis.
    pub(crate) fn combine(&self, t: &[u32]) -> Vec<u32> {
        let mut v = vec![0; self.n];
        for (row, &ti) in self.basis.iter().zip(t) {
            axpy(self.p, &mut v, ti, row);
        }
        v
    }
}

impl PartialOrd for FpSubspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dimension first, then lexicographic on the canonical basis.
impl Ord for FpSubspace {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.p, self.n, self.basis.len(), &self.basis).cmp(&(other.p, other.n, other.basis.len(), &other.basis))
    }
}

impl fmt::Display for FpSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{")?;
        for (i, r) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_raw(r))?;
        }
        write!(f, "}}")
    }
}

/// Odometer over the coefficient vectors of a subspace. Each step adds one
/// basis row to the running element; a digit wrapping from `p-1` to `0`
/// also adds its row once, since `p` copies sum to zero.
pub struct SubspaceElements<'a> {
    space: &'a FpSubspace,
    digits: Vec<u32>,
    current: Vec<u32>,
    done: bool,
}

impl Iterator for SubspaceElements<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let p = self.space.p;
        let mut i = 0;
        loop {
            if i == self.digits.len() {
                self.done = true;
                break;
            }
            let row = &self.space.basis[i];
            for (c, &x) in self.current.iter_mut().zip(row) {
                *c = p.add(*c, x);
            }
            self.digits[i] += 1;
            if self.digits[i] == p.get() {
                self.digits[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
        Some(out)
    }
}

/// Gaussian binomial `[n choose k]_q`, saturating at `u128::MAX`.
pub fn gaussian_binomial(n: usize, k: usize, q: u64) -> u128 {
    if k > n {
        return 0;
    }
    // [m, j] = [m-1, j-1] + q^j [m-1, j]
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for m in 1..=n {
        for j in (1..=k.min(m)).rev() {
            let qj = (q as u128).checked_pow(j as u32).unwrap_or(u128::MAX);
            row[j] = row[j - 1].saturating_add(qj.saturating_mul(row[j]));
        }
    }
    row[k]
}

/// Total number of subspaces of F_q^n.
pub fn count_subspaces(n: usize, q: u64) -> u128 {
    (0..=n).fold(0u128, |acc, k| acc.saturating_add(gaussian_binomial(n, k, q)))
}

/// Every subspace of F_p^n exactly once: dimension ascending, then
/// lexicographic on the canonical basis.
pub fn enumerate_subspaces(p: Prime, n: usize, cap: u128) -> Result<SubspaceEnumeration> {
    let total = count_subspaces(n, p.get() as u64);
    if total > cap {
        return Err(Error::resource(
            format!("subspace enumeration of F_{p}^{n}"),
            total,
            cap,
        ));
    }
    Ok(SubspaceEnumeration {
        p,
        n,
        next_dim: 0,
        pending: Vec::new().into_iter(),
    })
}

pub struct SubspaceEnumeration {
    p: Prime,
    n: usize,
    next_dim: usize,
    pending: std::vec::IntoIter<FpSubspace>,
}

impl SubspaceEnumeration {
    fn subspaces_of_dim(&self, k: usize) -> Vec<FpSubspace> {
        let (p, n) = (self.p, self.n);
        let mut out = Vec::new();
        for pivots in combinations(n, k) {
            // Free slots: row r, column c > pivots[r], c not a pivot column.
            let free: Vec<(usize, usize)> = (0..k)
                .flat_map(|r| {
                    let pv = &pivots;
                    ((pv[r] + 1)..n).filter(move |c| !pv.contains(c)).map(move |c| (r, c))
                })
                .collect();
            let mut digits = vec![0u32; free.len()];
            loop {
                let mut basis = vec![vec![0u32; n]; k];
                for (r, &c) in pivots.iter().enumerate() {
                    basis[r][c] = 1 % p.get();
                }
                for (&(r, c), &d) in free.iter().zip(&digits) {
                    basis[r][c] = d;
                }
                out.push(FpSubspace { p, n, basis });
                let mut i = 0;
                while i < digits.len() {
                    digits[i] += 1;
                    if digits[i] == p.get() {
                        digits[i] = 0;
                        i += 1;
                    } else {
                        break;
                    }
                }
                if i == digits.len() {
                    break;
                }
            }
        }
        out.sort();
        out
    }
}

impl Iterator for SubspaceEnumeration {
    type Item = FpSubspace;

    fn next(&mut self) -> Option<FpSubspace> {
        loop {
            if let Some(s) = self.pending.next() {
                return Some(s);
            }
            if self.next_dim > self.n {
                return None;
            }
            let k = self.next_dim;
            self.next_dim += 1;
            self.pending = self.subspaces_of_dim(k).into_iter();
        }
    }
}

/// All k-subsets of `0..n`, lexicographic.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn f(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    /// Extended Euclid written independently of `Prime::inv`.
    fn egcd_inverse(a: i64, m: i64) -> i64 {
        let (mut old_r, mut r) = (a, m);
        let (mut old_s, mut s) = (1i64, 0i64);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        old_s.rem_euclid(m)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(fp_inv(f(7).scalar(1)).unwrap().value(), 1);
        assert_eq!(fp_inv(f(11).scalar(2)).unwrap().value(), 6);
        let v = fp_inv(f(17).scalar(8)).unwrap().value();
        assert_eq!(v as i64, egcd_inverse(8, 17));
        assert_eq!((8 * v) % 17, 1);
        assert_eq!(v, 15);
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(fp_inv(f(5).scalar(0)), Err(Error::DivisionByZero { p: 5 }));
    }

    #[test]
    fn rejects_composites() {
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(91).is_err());
        assert!(Prime::new(4_294_967_311).is_err());
        assert!(Prime::new(2_147_483_647).is_ok());
    }

    #[test]
    fn span_examples() {
        let p = f(3);
        let z = FpSubspace::span(p, 2, &[]).unwrap();
        assert!(z.is_zero());
        let full = FpSubspace::span(p, 2, &[FpVector::new(p, [1, 0]), FpVector::new(p, [0, 1])]).unwrap();
        assert_eq!(full.dim(), 2);
        assert_eq!(full, FpSubspace::full(p, 2));
        let line = FpSubspace::span(p, 2, &[FpVector::new(p, [1, 1]), FpVector::new(p, [2, 2])]).unwrap();
        assert_eq!(line.dim(), 1);
        assert_eq!(line.basis_raw(), &[vec![1, 1]]);
    }

    #[test]
    fn span_rejects_mixed_ambient() {
        let p = f(3);
        let err = FpSubspace::span(p, 2, &[FpVector::new(p, [1, 0, 0])]);
        assert!(matches!(err, Err(Error::Input(_))));
        let err = FpSubspace::span(p, 2, &[FpVector::new(f(5), [1, 0])]);
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn membership_examples() {
        let p = f(3);
        let z = FpSubspace::zero(p, 2);
        assert!(z.contains(&FpVector::zero(p, 2)).unwrap());
        assert!(!z.contains(&FpVector::new(p, [0, 1])).unwrap());
        let full = FpSubspace::full(p, 2);
        for r in 0..9 {
            assert!(full.contains(&FpVector::from_rank(p, 2, r)).unwrap());
        }
        let line = FpSubspace::span(p, 2, &[FpVector::new(p, [1, 1])]).unwrap();
        assert!(line.contains(&FpVector::new(p, [2, 2])).unwrap());
        assert!(!line.contains(&FpVector::new(p, [1, 2])).unwrap());
        assert!(line.contains(&FpVector::new(p, [1, 1, 0])).is_err());
        assert!(line.equals(&FpSubspace::zero(p, 3)).is_err());
    }

    /// Brute force: close every generating set under addition and collect
    /// the distinct element sets.
    fn brute_force_subgroups(p: u64, n: usize) -> usize {
        let q = p as usize;
        let size = q.pow(n as u32);
        let add = |a: usize, b: usize| {
            let (mut a, mut b, mut out, mut w) = (a, b, 0, 1);
            for _ in 0..n {
                out += ((a % q + b % q) % q) * w;
                a /= q;
                b /= q;
                w *= q;
            }
            out
        };
        let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
        let mut frontier = vec![{
            let mut s = vec![false; size];
            s[0] = true;
            s
        }];
        while let Some(set) = frontier.pop() {
            if !seen.insert(set.clone()) {
                continue;
            }
            for g in 0..size {
                if set[g] {
                    continue;
                }
                let mut s = set.clone();
                s[g] = true;
                loop {
                    let members: Vec<usize> = (0..size).filter(|&i| s[i]).collect();
                    let mut grew = false;
                    for &a in &members {
                        for &b in &members {
                            let c = add(a, b);
                            if !s[c] {
                                s[c] = true;
                                grew = true;
                            }
                        }
                    }
                    if !grew {
                        break;
                    }
                }
                frontier.push(s);
            }
        }
        seen.len()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_subspaces(f(2), 2, DEFAULT_SUBSPACE_CAP).unwrap().count(), 5);
        assert_eq!(enumerate_subspaces(f(3), 2, DEFAULT_SUBSPACE_CAP).unwrap().count(), 6);
        assert_eq!(brute_force_subgroups(2, 3), 16);
        assert_eq!(count_subspaces(3, 2), 16);
        assert_eq!(enumerate_subspaces(f(2), 3, DEFAULT_SUBSPACE_CAP).unwrap().count(), 16);
        for (p, n) in [(2u64, 4usize), (3, 3), (5, 2)] {
            let all: Vec<_> = enumerate_subspaces(f(p), n, DEFAULT_SUBSPACE_CAP).unwrap().collect();
            assert_eq!(all.len() as u128, count_subspaces(n, p));
            let distinct: BTreeSet<_> = all.iter().cloned().collect();
            assert_eq!(distinct.len(), all.len());
            assert!(all.windows(2).all(|w| w[0] < w[1]), "deterministic order");
        }
    }

    #[test]
    fn enumeration_cap() {
        match enumerate_subspaces(f(5), 6, 1000) {
            Err(Error::Resource { cap, .. }) => assert_eq!(cap, 1000),
            other => panic!("expected resource error, got {other:?}", other = other.map(|_| ())),
        }
    }

    #[test]
    fn elements_cover_subspace() {
        let p = f(5);
        let s = FpSubspace::span(p, 3, &[FpVector::new(p, [1, 2, 0]), FpVector::new(p, [0, 1, 4])]).unwrap();
        let els: BTreeSet<Vec<u32>> = s.elements().collect();
        assert_eq!(els.len(), 25);
        assert!(els.iter().all(|e| s.contains_raw(e)));
        assert_eq!(FpSubspace::zero(p, 3).elements().count(), 1);
    }

    #[test]
    fn matrix_inverse_roundtrip() {
        let p = f(7);
        let m = FpMatrix::from_rows(p, &[vec![1, 2], vec![3, 4]], 2).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), FpMatrix::identity(p, 2));
        let sing = FpMatrix::from_rows(p, &[vec![1, 2], vec![2, 4]], 2).unwrap();
        assert!(sing.inverse().is_err());
        assert_eq!(sing.rank(), 1);
    }

    #[test]
    fn kernel_and_intersection() {
        let p = Prime::new(5).unwrap();
        let m = FpMatrix::from_rows(p, &[vec![1, 2, 0], vec![0, 0, 1]], 3).unwrap();
        let k = m.kernel();
        assert_eq!(k, vec![vec![3, 1, 0]]);
        assert!(m.mul_vec(&k[0]).iter().all(|&x| x == 0));
        let s = FpSubspace::span(p, 3, &[FpVector::new(p, [1, 0, 0]), FpVector::new(p, [0, 1, 0])]).unwrap();
        let t = FpSubspace::span(p, 3, &[FpVector::new(p, [1, 1, 1]), FpVector::new(p, [0, 1, 1])]).unwrap();
        let meet = s.intersect(&t).unwrap();
        assert_eq!(meet, FpSubspace::span(p, 3, &[FpVector::new(p, [1, 0, 0])]).unwrap());
        assert_eq!(s.intersect(&FpSubspace::zero(p, 3)).unwrap(), FpSubspace::zero(p, 3));
        assert_eq!(s.intersect(&FpSubspace::full(p, 3)).unwrap(), s);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_prime() -> impl Strategy<Value = u64> {
            prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 67, 101])
        }

        proptest! {
            #[test]
            fn inverse_is_involutive(p in small_prime(), a in 1u32..1000) {
                let p = Prime::new(p).unwrap();
                let a = p.scalar(a as i64);
                prop_assume!(!a.is_zero());
                let b = fp_inv(a).unwrap();
                prop_assert_eq!((a * b).value(), 1);
                prop_assert_eq!(fp_inv(b).unwrap(), a);
            }

            #[test]
            fn span_is_idempotent(p in small_prime(), raw in prop::collection::vec(prop::collection::vec(0i64..200, 4), 0..6)) {
                let p = Prime::new(p).unwrap();
                let vs: Vec<FpVector> = raw.into_iter().map(|r| FpVector::new(p, r)).collect();
                let s = FpSubspace::span(p, 4, &vs).unwrap();
                let again = FpSubspace::span(p, 4, &s.basis()).unwrap();
                prop_assert_eq!(&again, &s);
                for v in &vs {
                    prop_assert!(s.contains(v).unwrap());
                }
                // Insertion order must not matter.
                let mut rev = vs.clone();
                rev.reverse();
                prop_assert_eq!(FpSubspace::span(p, 4, &rev).unwrap(), s);
            }

            #[test]
            fn rank_roundtrip(p in small_prime(), r in 0u64..10_000) {
                let p = Prime::new(p).unwrap();
                let n = 3;
                let r = r % (p.get() as u64).pow(n as u32);
                prop_assert_eq!(FpVector::from_rank(p, n, r).rank(), r);
            }
        }
    }
}
