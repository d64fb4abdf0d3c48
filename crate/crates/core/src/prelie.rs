//! Finite-dimensional algebras over F_p given by structure constants, with
//! the pre-Lie identity checker, the power chain and generated subalgebras.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpcore::{axpy, sub_raw, FpMatrix, FpSubspace, FpVector, Prime};

/// Dense structure constants: `e_i · e_j = Σ_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StructureConstants {
    p: Prime,
    n: usize,
    c: Vec<u32>,
}

impl StructureConstants {
    /// `table[i][j]` is the coordinate list of `e_i · e_j`.
    pub fn new(p: Prime, n: usize, table: &[Vec<Vec<i64>>]) -> Result<Self> {
        if table.len() != n {
            return Err(Error::input(format!(
                "structure constants have {} rows, expected {n}",
                table.len()
            )));
        }
        let mut c = Vec::with_capacity(n * n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::input(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, coords) in row.iter().enumerate() {
                if coords.len() != n {
                    return Err(Error::input(format!(
                        "product e_{i}·e_{j} has {} coordinates, expected {n}",
                        coords.len()
                    )));
                }
                c.extend(coords.iter().map(|&x| p.reduce(x)));
            }
        }
        Ok(StructureConstants { p, n, c })
    }

    pub fn from_flat(p: Prime, n: usize, flat: Vec<u32>) -> Result<Self> {
        if flat.len() != n * n * n {
            return Err(Error::input("flat structure constants have the wrong length"));
        }
        let c = flat.into_iter().map(|x| x % p.get()).collect();
        Ok(StructureConstants { p, n, c })
    }

    pub fn zero(p: Prime, n: usize) -> Self {
        StructureConstants {
            p,
            n,
            c: vec![0; n * n * n],
        }
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        self.c[(i * self.n + j) * self.n + k]
    }

    pub fn set_product(&mut self, i: usize, j: usize, coords: &[u32]) {
        let n = self.n;
        for (k, &x) in coords.iter().enumerate() {
            self.c[(i * n + j) * n + k] = x % self.p.get();
        }
    }

    /// Coordinates of `e_i · e_j`.
    pub fn basis_product(&self, i: usize, j: usize) -> &[u32] {
        let off = (i * self.n + j) * self.n;
        &self.c[off..off + self.n]
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<u32>>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.basis_product(i, j).to_vec()).collect())
            .collect()
    }

    pub fn flat(&self) -> &[u32] {
        &self.c
    }

    /// Bilinear extension of the basis products.
    pub(crate) fn mul_raw(&self, u: &[u32], v: &[u32]) -> Vec<u32> {
        let mut out = vec![0; self.n];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate() {
                if vj == 0 {
                    continue;
                }
                axpy(self.p, &mut out, self.p.mul(ui, vj), self.basis_product(i, j));
            }
        }
        out
    }

    /// Matrix of left multiplication `L_a`, so that `L_a v = a · v`.
    pub(crate) fn left_matrix(&self, a: &[u32]) -> FpMatrix {
        let n = self.n;
        let mut m = FpMatrix::zeros(self.p, n, n);
        for j in 0..n {
            let mut col = vec![0; n];
            for (i, &ai) in a.iter().enumerate() {
                axpy(self.p, &mut col, ai, self.basis_product(i, j));
            }
            for (k, &x) in col.iter().enumerate() {
                m.set(k, j, x);
            }
        }
        m
    }

    /// `(e_i e_j) e_k - e_i (e_j e_k)`
    fn associator(&self, i: usize, j: usize, k: usize) -> Vec<u32> {
        let n = self.n;
        let unit = |t: usize| {
            let mut v = vec![0; n];
            v[t] = 1;
            v
        };
        let left = self.mul_raw(self.basis_product(i, j), &unit(k));
        let right = self.mul_raw(&unit(i), self.basis_product(j, k));
        sub_raw(self.p, &left, &right)
    }

    /// First basis triple on which the product is not associative.
    pub fn associativity_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.associator(i, j, k).iter().any(|&x| x != 0) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// `span{s · t : s ∈ basis(S), t ∈ basis(T)}`
    pub fn product_space(&self, s: &FpSubspace, t: &FpSubspace) -> FpSubspace {
        let mut out = FpSubspace::zero(self.p, self.n);
        for a in s.basis_raw() {
            for b in t.basis_raw() {
                out.insert_raw(&self.mul_raw(a, b));
            }
        }
        out
    }
}

/// Outcome of the basis-triple pre-Lie identity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityCheck {
    Pass,
    /// `(e_i e_j) e_k - e_i (e_j e_k) ≠ (e_j e_i) e_k - e_j (e_i e_k)`
    Violation {
        i: usize,
        j: usize,
        k: usize,
    },
}

impl IdentityCheck {
    pub fn is_pass(self) -> bool {
        self == IdentityCheck::Pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    Left,
    Right,
    Strong,
    PreliePower,
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainKind::Left => "left",
            ChainKind::Right => "right",
            ChainKind::Strong => "strong",
            ChainKind::PreliePower => "prelie-power",
        })
    }
}

/// A descending chain of subspaces starting at the whole space.
///
/// `index` is the smallest `i` with `chain[i-1] = 0` (the chain is 1-based
/// in the usual notation, `chain[0] = A^1`). It is `None` when the chain
/// did not reach zero; the last entry is then the subspace it stalled at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainReport {
    pub kind: ChainKind,
    pub chain: Vec<FpSubspace>,
    pub index: Option<usize>,
    /// False when some level was computed from a sampled subset of a
    /// nonlinear argument (an under-approximation).
    pub exact: bool,
}

impl ChainReport {
    pub fn dims(&self) -> Vec<usize> {
        self.chain.iter().map(FpSubspace::dim).collect()
    }

    pub fn is_nilpotent(&self) -> bool {
        self.index.is_some()
    }

    /// Level `A^i`, 1-based; levels past the end of a nilpotent chain are zero.
    pub fn level(&self, i: usize) -> Option<&FpSubspace> {
        self.chain.get(i.checked_sub(1)?)
    }
}

/// Step cap for chain computations in dimension `n`.
pub(crate) fn chain_step_cap(n: usize) -> usize {
    2 * n + 2
}

/// A finite-dimensional algebra over F_p that is meant to be pre-Lie.
///
/// Construction does not require the identity to hold; `verified` records
/// whether [`PreLieAlgebra::verify`] has passed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PreLieAlgebra {
    consts: StructureConstants,
    verified: bool,
}

impl PreLieAlgebra {
    pub fn new(consts: StructureConstants) -> Self {
        PreLieAlgebra {
            consts,
            verified: false,
        }
    }

    pub fn from_table(p: Prime, n: usize, table: &[Vec<Vec<i64>>]) -> Result<Self> {
        Ok(Self::new(StructureConstants::new(p, n, table)?))
    }

    pub fn zero(p: Prime, n: usize) -> Self {
        Self::new(StructureConstants::zero(p, n))
    }

    /// `F_p[t]t / (t^m)` with basis `t, t^2, …, t^{m-1}`.
    pub fn truncated_polynomial(p: Prime, m: usize) -> Self {
        Self::new(truncated_polynomial_constants(p, m))
    }

    pub fn modulus(&self) -> Prime {
        self.consts.p
    }

    pub fn dim(&self) -> usize {
        self.consts.n
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.consts
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn multiply(&self, u: &FpVector, v: &FpVector) -> Result<FpVector> {
        u.ensure_in(self.modulus(), self.dim())?;
        v.ensure_in(self.modulus(), self.dim())?;
        Ok(FpVector::from_raw(
            self.modulus(),
            self.consts.mul_raw(u.coords(), v.coords()),
        ))
    }

    pub(crate) fn mul_raw(&self, u: &[u32], v: &[u32]) -> Vec<u32> {
        self.consts.mul_raw(u, v)
    }

    /// Checks `(xy)z - x(yz) = (yx)z - y(xz)` on every basis triple, which
    /// suffices because both sides are trilinear.
    pub fn check_identity(&self) -> IdentityCheck {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.consts.associator(i, j, k) != self.consts.associator(j, i, k) {
                        return IdentityCheck::Violation { i, j, k };
                    }
                }
            }
        }
        IdentityCheck::Pass
    }

    /// Runs [`check_identity`](Self::check_identity) and records a pass.
    pub fn verify(&mut self) -> IdentityCheck {
        let r = self.check_identity();
        self.verified = r.is_pass();
        r
    }

    /// Element-level identity residue `(xy)z - x(yz) - (yx)z + y(xz)`.
    pub(crate) fn identity_residue(&self, x: &[u32], y: &[u32], z: &[u32]) -> Vec<u32> {
        let p = self.modulus();
        let m = |a: &[u32], b: &[u32]| self.mul_raw(a, b);
        let lhs = sub_raw(p, &m(&m(x, y), z), &m(x, &m(y, z)));
        let rhs = sub_raw(p, &m(&m(y, x), z), &m(y, &m(x, z)));
        sub_raw(p, &lhs, &rhs)
    }

    /// `A^1 = A`, `A^{i+1} = Σ_{j=1}^{i} A^j · A^{i+1-j}`.
    pub fn power_chain(&self) -> ChainReport {
        let (p, n) = (self.modulus(), self.dim());
        let mut chain = vec![FpSubspace::full(p, n)];
        let mut index = None;
        if n == 0 {
            index = Some(1);
        }
        let cap = chain_step_cap(n);
        while index.is_none() && chain.len() < cap {
            let i = chain.len();
            let mut next = FpSubspace::zero(p, n);
            for j in 1..=i {
                let prod = self.consts.product_space(&chain[j - 1], &chain[i - j]);
                next = next.sum(&prod).expect("same ambient");
            }
            // A level may repeat (A^4 = A^5) and still reach zero later, so
            // only the step cap ends a non-terminating chain.
            let done = next.is_zero();
            chain.push(next);
            if done {
                index = Some(chain.len());
            }
        }
        ChainReport {
            kind: ChainKind::PreliePower,
            chain,
            index,
            exact: true,
        }
    }

    /// Smallest `k` such that every product of `k` elements vanishes.
    pub fn nilpotency_index(&self) -> Option<usize> {
        self.power_chain().index
    }

    /// Smallest subspace containing `x` and closed under the product.
    pub fn generated_subalgebra(&self, x: &FpVector) -> Result<FpSubspace> {
        x.ensure_in(self.modulus(), self.dim())?;
        let mut s = FpSubspace::span(self.modulus(), self.dim(), std::slice::from_ref(x))?;
        loop {
            let basis = s.basis_raw().to_vec();
            let mut grew = false;
            for a in &basis {
                for b in &basis {
                    grew |= s.insert_raw(&self.mul_raw(a, b));
                }
            }
            if !grew {
                return Ok(s);
            }
        }
    }
}

pub(crate) fn truncated_polynomial_constants(p: Prime, m: usize) -> StructureConstants {
    let n = m.saturating_sub(1);
    let mut c = StructureConstants::zero(p, n);
    // basis index i ↔ t^{i+1}
    for i in 0..n {
        for j in 0..n {
            let deg = i + j + 2;
            if deg < m {
                let mut v = vec![0; n];
                v[deg - 1] = 1;
                c.set_product(i, j, &v);
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify_p4::{build_family_a4, build_family_a6};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    #[test]
    fn zero_algebra() {
        let a = PreLieAlgebra::zero(f(5), 2);
        let u = FpVector::new(f(5), [1, 2]);
        assert!(a.multiply(&u, &u).unwrap().is_zero());
        assert!(a.check_identity().is_pass());
        let ch = a.power_chain();
        assert_eq!(ch.dims(), vec![2, 0]);
        assert_eq!(ch.index, Some(2));
        let e1 = FpVector::unit(f(5), 2, 0);
        assert_eq!(
            a.generated_subalgebra(&e1).unwrap(),
            FpSubspace::span(f(5), 2, &[e1]).unwrap()
        );
    }

    #[test]
    fn truncated_polynomial_t3() {
        let p = f(11);
        let a = PreLieAlgebra::truncated_polynomial(p, 3);
        let (t, t2) = (FpVector::unit(p, 2, 0), FpVector::unit(p, 2, 1));
        assert_eq!(a.multiply(&t, &t).unwrap(), t2);
        assert!(a.multiply(&t, &t2).unwrap().is_zero());
        assert!(a.multiply(&t2, &t).unwrap().is_zero());
        assert!(a.multiply(&t2, &t2).unwrap().is_zero());
        assert!(a.check_identity().is_pass());
        let ch = a.power_chain();
        assert_eq!(ch.dims(), vec![2, 1, 0]);
        assert_eq!(ch.index, Some(3));
        assert!(a.generated_subalgebra(&t).unwrap().is_full());
    }

    #[test]
    fn associative_algebras_are_pre_lie() {
        // strictly upper triangular 3x3 matrices over F_5: E12, E13, E23
        let p = f(5);
        let mut c = StructureConstants::zero(p, 3);
        c.set_product(0, 2, &[0, 1, 0]); // E12 E23 = E13
        assert_eq!(c.associativity_violation(), None);
        assert!(PreLieAlgebra::new(c).check_identity().is_pass());
    }

    #[test]
    fn corrupted_constants_fail_identity() {
        // Left-symmetric check on a non-pre-Lie product: e0·e0 = e1, e1·e0 = e0.
        let p = f(7);
        let mut c = StructureConstants::zero(p, 2);
        c.set_product(0, 0, &[0, 1]);
        c.set_product(1, 0, &[1, 0]);
        let a = PreLieAlgebra::new(c);
        assert!(matches!(a.check_identity(), IdentityCheck::Violation { .. }));
        // Not nilpotent either: e0 generates a chain that never dies.
        assert_eq!(a.power_chain().index, None);
    }

    #[test]
    fn family_a6_products_and_chain() {
        let p = f(67);
        for rec in build_family_a6(p).unwrap().records.iter().take(3) {
            let a = &rec.algebra;
            let x = FpVector::unit(p, 4, 0);
            let x2 = a.multiply(&x, &x).unwrap();
            let x_x2 = a.multiply(&x, &x2).unwrap();
            assert!(a.multiply(&x2, &x_x2).unwrap().is_zero());
            assert_eq!(a.power_chain().dims(), vec![4, 3, 2, 1, 1, 0]);
            assert_eq!(a.power_chain().index, Some(6));
        }
    }

    #[test]
    fn family_a4_generated_by_x() {
        let p = f(17);
        let fam = build_family_a4(p).unwrap();
        let a = &fam.records[0].algebra;
        assert!(a.check_identity().is_pass());
        let x = FpVector::unit(p, 4, 0);
        let s = a.generated_subalgebra(&x).unwrap();
        assert!(s.is_full());
        // Cross-check against the word basis x, x², x²·x, x·x².
        let x2 = a.multiply(&x, &x).unwrap();
        let words = [
            x.clone(),
            x2.clone(),
            a.multiply(&x2, &x).unwrap(),
            a.multiply(&x, &x2).unwrap(),
        ];
        assert_eq!(FpSubspace::span(p, 4, &words).unwrap().dim(), 4);
    }

    /// Every product of `k` basis elements under every bracketing, by recursion.
    fn all_products(a: &PreLieAlgebra, k: usize) -> Vec<Vec<u32>> {
        let n = a.dim();
        if k == 1 {
            return (0..n)
                .map(|i| FpVector::unit(a.modulus(), n, i).into_coords())
                .collect();
        }
        let mut out = Vec::new();
        for left in 1..k {
            let ls = all_products(a, left);
            let rs = all_products(a, k - left);
            for l in &ls {
                for r in &rs {
                    out.push(a.mul_raw(l, r));
                }
            }
        }
        out
    }

    #[test]
    fn power_chain_index_kills_all_bracketings() {
        let p = f(17);
        let algebras = vec![
            PreLieAlgebra::truncated_polynomial(p, 4),
            PreLieAlgebra::zero(p, 3),
            build_family_a4(p).unwrap().records[0].algebra.clone(),
        ];
        for a in algebras {
            let k = a.nilpotency_index().unwrap();
            assert!(all_products(&a, k).iter().all(|v| v.iter().all(|&c| c == 0)));
            if k > 1 {
                assert!(all_products(&a, k - 1).iter().any(|v| v.iter().any(|&c| c != 0)));
            }
            let dims = a.power_chain().dims();
            assert!(dims.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn identity_holds_on_random_elements() {
        let p = f(67);
        let a = &build_family_a6(p).unwrap().records[1].algebra;
        assert!(a.check_identity().is_pass());
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for _ in 0..1000 {
            let x = FpVector::random(p, 4, &mut rng);
            let y = FpVector::random(p, 4, &mut rng);
            let z = FpVector::random(p, 4, &mut rng);
            let r = a.identity_residue(x.coords(), y.coords(), z.coords());
            assert!(r.iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn generated_subalgebra_is_minimal() {
        let p = f(17);
        let a = PreLieAlgebra::truncated_polynomial(p, 5);
        let x = FpVector::new(p, [0, 1, 0, 0]); // t^2
        let s = a.generated_subalgebra(&x).unwrap();
        assert_eq!(s.dim(), 2); // t^2, t^4
                                // Dropping any basis vector loses x or closure.
        for drop in 0..s.dim() {
            let rest: Vec<FpVector> = s
                .basis()
                .into_iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, v)| v)
                .collect();
            let t = FpSubspace::span(p, 4, &rest).unwrap();
            let closed = t
                .basis_raw()
                .iter()
                .all(|u| t.basis_raw().iter().all(|v| t.contains_raw(&a.mul_raw(u, v))));
            assert!(!t.contains(&x).unwrap() || !closed);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn multiply_is_bilinear(
                c in prop::collection::vec(0u32..13, 27),
                u in prop::collection::vec(0i64..13, 3),
                u2 in prop::collection::vec(0i64..13, 3),
                v in prop::collection::vec(0i64..13, 3),
                alpha in 0i64..13, beta in 0i64..13,
            ) {
                let p = Prime::new(13).unwrap();
                let a = PreLieAlgebra::new(StructureConstants::from_flat(p, 3, c).unwrap());
                let (u, u2, v) = (FpVector::new(p, u), FpVector::new(p, u2), FpVector::new(p, v));
                let (al, be) = (p.reduce(alpha), p.reduce(beta));
                let comb = &u.scale(al) + &u2.scale(be);
                let lhs = a.multiply(&comb, &v).unwrap();
                let rhs = &a.multiply(&u, &v).unwrap().scale(al) + &a.multiply(&u2, &v).unwrap().scale(be);
                prop_assert_eq!(lhs, rhs);
                let lhs = a.multiply(&v, &comb).unwrap();
                let rhs = &a.multiply(&v, &u).unwrap().scale(al) + &a.multiply(&v, &u2).unwrap().scale(be);
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
