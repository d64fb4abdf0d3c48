//! Finite left braces on F_p^n behind a pluggable star oracle.
//!
//! Every brace here has additive group F_p^n and `a ∘ b = a + b + a * b`.
//! The star comes from a dense table, from the product of an associative
//! (nilpotent) ring, or from the group of flows of a pre-Lie algebra.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correspondence::FlowCache;
use crate::error::{Error, Result};
use crate::fpcore::{add_raw, axpy, neg_raw, rank_of, sub_raw, FpMatrix, FpSubspace, FpVector, Prime};
use crate::prelie::{chain_step_cap, ChainKind, ChainReport, StructureConstants};

/// Largest order `p^n` accepted by the table backend.
pub const MAX_TABLE_ORDER: u64 = 4096;
/// Largest number of triples an exhaustive axiom check will visit.
pub const EXHAUSTIVE_TRIPLE_CAP: u128 = 100_000_000;
/// Default cap on the number of left arguments enumerated for a star span.
pub const DEFAULT_ELEMENT_CAP: u128 = 100_000;

/// Dense star table: `star[rank(a) * size + rank(b)] = rank(a * b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarTable {
    size: usize,
    star: Vec<u32>,
}

impl StarTable {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ranks(&self) -> &[u32] {
        &self.star
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> u32 {
        self.star[a * self.size + b]
    }
}

#[derive(Clone)]
pub enum Backend {
    Table(StarTable),
    Ring(StructureConstants),
    Flows(Arc<FlowCache>),
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Table(_) => "table",
            Backend::Ring(_) => "ring",
            Backend::Flows(_) => "flows",
        }
    }
}

impl fmt::Debug for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Table(t) => write!(f, "Table(order {})", t.size),
            Backend::Ring(c) => write!(f, "Ring({c:?})"),
            Backend::Flows(fc) => write!(f, "Flows(index {})", fc.index()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Brace {
    p: Prime,
    n: usize,
    backend: Backend,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    /// `a ∘ (b + c) + a = a ∘ b + a ∘ c`
    BraceLaw,
    /// `(a ∘ b) ∘ c = a ∘ (b ∘ c)`
    Associativity,
    /// `0 ∘ a = a ∘ 0 = a`
    Identity,
    /// some `x` with `a ∘ x = x ∘ a = 0`
    Inverse,
    /// `a * (αb) = α (a * b)`
    Linearity,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::BraceLaw => "brace law a∘(b+c)+a = a∘b+a∘c",
            Axiom::Associativity => "associativity of ∘",
            Axiom::Identity => "0 is the ∘-identity",
            Axiom::Inverse => "∘-inverse exists",
            Axiom::Linearity => "a*(αb) = α(a*b)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    /// The elements the axiom failed on; for linearity the last entry is
    /// the scalar as a one-coordinate vector.
    pub witness: Vec<FpVector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomCheck {
    Pass { checked: u64 },
    Violation(AxiomViolation),
}

impl AxiomCheck {
    pub fn is_pass(&self) -> bool {
        matches!(self, AxiomCheck::Pass { .. })
    }
}

impl fmt::Display for AxiomCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomCheck::Pass { checked } => write!(f, "pass ({checked} cases)"),
            AxiomCheck::Violation(v) => {
                write!(f, "violation of {} at", v.axiom)?;
                for w in &v.witness {
                    write!(f, " {w}")?;
                }
                Ok(())
            }
        }
    }
}

/// How a star span over a nonlinear left argument is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpanOptions {
    /// Most left arguments that will be enumerated.
    pub cap: u128,
    /// `(count, seed)`: past the cap, sample this many left arguments and
    /// label the result inexact. `None` turns the cap into an error.
    pub sampling: Option<(usize, u64)>,
    /// Use the polynomial degree of the star in its left argument, when the
    /// backend knows it, to replace full enumeration by an exact grid.
    pub use_degree_bound: bool,
}

impl Default for SpanOptions {
    fn default() -> Self {
        SpanOptions {
            cap: DEFAULT_ELEMENT_CAP,
            sampling: None,
            use_degree_bound: true,
        }
    }
}

/// Left arguments of a star span, prepared once and reused.
enum LeftSet {
    /// Matrices `b ↦ a * b`, for backends where the star is right-linear
    /// by construction.
    Operators(Vec<FpMatrix>),
    Elements(Vec<Vec<u32>>),
}

/// The d-sequence `d_0 = a, d_0' = b, d_{i+1} = d_i + d_i', d_{i+1}' = d_i * d_i'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionSequence {
    pub d: Vec<(FpVector, FpVector)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionReport {
    pub sequence: ExpansionSequence,
    /// `(a + b) * c`
    pub lhs: FpVector,
    /// `a*c + b*c + Σ (-1)^{i+1} ((d_i * d_i') * c - d_i * (d_i' * c))`
    pub rhs: FpVector,
}

impl ExpansionReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn pow_u128(base: u64, exp: usize) -> u128 {
    let mut r: u128 = 1;
    for _ in 0..exp {
        r = r.saturating_mul(base as u128);
    }
    r
}

impl Brace {
    /// The brace with `a * b = 0`, so `a ∘ b = a + b`.
    pub fn trivial(p: Prime, n: usize) -> Self {
        Brace {
            p,
            n,
            backend: Backend::Ring(StructureConstants::zero(p, n)),
        }
    }

    /// `rows[rank(a)][rank(b)] = rank(a * b)`, ranks in mixed radix with the
    /// least significant coordinate first.
    pub fn from_star_table(p: Prime, n: usize, rows: &[Vec<u64>]) -> Result<Self> {
        let order = pow_u128(p.get() as u64, n);
        if order > MAX_TABLE_ORDER as u128 {
            return Err(Error::input(format!(
                "table backend needs p^n ≤ {MAX_TABLE_ORDER}, got {order}"
            )));
        }
        let size = order as usize;
        if rows.len() != size {
            return Err(Error::input(format!(
                "star table has {} rows, expected {size}",
                rows.len()
            )));
        }
        let mut star = Vec::with_capacity(size * size);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::input(format!(
                    "star table row {a} has {} entries, expected {size}",
                    row.len()
                )));
            }
            for (b, &r) in row.iter().enumerate() {
                if r >= size as u64 {
                    return Err(Error::input(format!(
                        "star table entry ({a},{b}) = {r} is out of range 0..{size}"
                    )));
                }
                star.push(r as u32);
            }
        }
        Ok(Brace {
            p,
            n,
            backend: Backend::Table(StarTable { size, star }),
        })
    }

    /// The adjoint brace `a * b = ab` of an associative algebra. The ring
    /// must be nilpotent for `∘` to be a group; that is left to the checks.
    pub fn from_ring(consts: StructureConstants) -> Result<Self> {
        if let Some((i, j, k)) = consts.associativity_violation() {
            return Err(Error::input(format!(
                "ring constants are not associative on basis triple ({i},{j},{k})"
            )));
        }
        Ok(Brace {
            p: consts.modulus(),
            n: consts.dim(),
            backend: Backend::Ring(consts),
        })
    }

    pub fn from_flows(cache: Arc<FlowCache>) -> Self {
        Brace {
            p: cache.algebra().modulus(),
            n: cache.algebra().dim(),
            backend: Backend::Flows(cache),
        }
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `p^n`, saturating.
    pub fn order(&self) -> u128 {
        pow_u128(self.p.get() as u64, self.n)
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn star(&self, a: &FpVector, b: &FpVector) -> Result<FpVector> {
        a.ensure_in(self.p, self.n)?;
        b.ensure_in(self.p, self.n)?;
        Ok(FpVector::from_raw(self.p, self.star_raw(a.coords(), b.coords())))
    }

    pub fn circ(&self, a: &FpVector, b: &FpVector) -> Result<FpVector> {
        a.ensure_in(self.p, self.n)?;
        b.ensure_in(self.p, self.n)?;
        Ok(FpVector::from_raw(self.p, self.circ_raw(a.coords(), b.coords())))
    }

    /// `λ_a(b) = a * b + b`
    pub fn lambda(&self, a: &FpVector, b: &FpVector) -> Result<FpVector> {
        Ok(&self.star(a, b)? + b)
    }

    pub fn circ_inverse(&self, a: &FpVector) -> Result<FpVector> {
        a.ensure_in(self.p, self.n)?;
        Ok(FpVector::from_raw(self.p, self.inverse_raw(a.coords())?))
    }

    pub(crate) fn star_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        match &self.backend {
            Backend::Table(t) => {
                let r = t.get(rank_of(self.p, a) as usize, rank_of(self.p, b) as usize);
                FpVector::from_rank(self.p, self.n, r as u64).into_coords()
            }
            Backend::Ring(c) => c.mul_raw(a, b),
            Backend::Flows(fc) => fc.flow_star_raw(a, b),
        }
    }

    pub(crate) fn circ_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let s = self.star_raw(a, b);
        add_raw(self.p, &add_raw(self.p, a, b), &s)
    }

    /// Matrix of `b ↦ a * b` when the backend is right-linear by construction.
    fn star_operator(&self, a: &[u32]) -> Option<FpMatrix> {
        match &self.backend {
            Backend::Table(_) => None,
            Backend::Ring(c) => Some(c.left_matrix(a)),
            Backend::Flows(fc) => Some(fc.star_operator(a)),
        }
    }

    /// Solves `a ∘ x = 0`. Flows use the closed form; otherwise iterate
    /// `x ← -a - a * x`, which terminates in left nilpotent braces, and fall
    /// back to exhaustive search.
    pub(crate) fn inverse_raw(&self, a: &[u32]) -> Result<Vec<u32>> {
        if let Backend::Flows(fc) = &self.backend {
            return Ok(fc.flow_inverse_raw(a));
        }
        let neg_a = neg_raw(self.p, a);
        let mut x = neg_a.clone();
        for _ in 0..self.n + 2 {
            let next = sub_raw(self.p, &neg_a, &self.star_raw(a, &x));
            if next == x {
                return Ok(x);
            }
            x = next;
        }
        if self.order() > DEFAULT_ELEMENT_CAP {
            return Err(Error::resource(
                "∘-inverse search (not left nilpotent within cap)",
                self.order(),
                DEFAULT_ELEMENT_CAP,
            ));
        }
        let zero = vec![0; self.n];
        for r in 0..self.order() as u64 {
            let x = FpVector::from_rank(self.p, self.n, r).into_coords();
            if self.circ_raw(a, &x) == zero {
                return Ok(x);
            }
        }
        Err(Error::Precondition(format!(
            "{} has no ∘-inverse",
            crate::fpcore::format_raw(a)
        )))
    }

    /// Degree bound, in each coordinate of `a`, of `a * b` as a polynomial
    /// map, when the backend provides one.
    pub fn left_degree_bound(&self) -> Option<usize> {
        match &self.backend {
            Backend::Table(_) => None,
            Backend::Ring(_) => Some(1),
            // Each term of e^{L_Ω(a)}(b) - b is a product of b with at least
            // one factor per degree in a, and all products of k factors vanish.
            Backend::Flows(fc) => Some(fc.index().saturating_sub(2)),
        }
    }

    /// Same brace with the table backend.
    pub fn tabulate(&self) -> Result<Brace> {
        if let Backend::Table(_) = self.backend {
            return Ok(self.clone());
        }
        let order = self.order();
        if order > MAX_TABLE_ORDER as u128 {
            return Err(Error::resource("tabulating a brace", order, MAX_TABLE_ORDER as u128));
        }
        let size = order as usize;
        let elems = self.all_elements();
        let mut star = Vec::with_capacity(size * size);
        for a in &elems {
            let op = self.star_operator(a);
            for b in &elems {
                let s = match &op {
                    Some(m) => m.mul_vec(b),
                    None => self.star_raw(a, b),
                };
                star.push(rank_of(self.p, &s) as u32);
            }
        }
        Ok(Brace {
            p: self.p,
            n: self.n,
            backend: Backend::Table(StarTable { size, star }),
        })
    }

    fn all_elements(&self) -> Vec<Vec<u32>> {
        (0..self.order() as u64)
            .map(|r| FpVector::from_rank(self.p, self.n, r).into_coords())
            .collect()
    }

    fn vec(&self, v: &[u32]) -> FpVector {
        FpVector::from_raw(self.p, v.to_vec())
    }

    pub fn check_axioms(&self, mode: CheckMode) -> Result<AxiomCheck> {
        match mode {
            CheckMode::Exhaustive => self.check_axioms_exhaustive(),
            CheckMode::Sampled { count, seed } => Ok(self.check_axioms_sampled(count, seed)),
        }
    }

    fn check_axioms_exhaustive(&self) -> Result<AxiomCheck> {
        let triples = pow_u128(self.p.get() as u64, 3 * self.n);
        if triples > EXHAUSTIVE_TRIPLE_CAP {
            return Err(Error::resource(
                "exhaustive brace-axiom check (triples)",
                triples,
                EXHAUSTIVE_TRIPLE_CAP,
            ));
        }
        let table = self.tabulate()?;
        let Backend::Table(t) = &table.backend else {
            unreachable!()
        };
        let size = t.size;
        let elems = self.all_elements();
        let mut add = vec![0u32; size * size];
        let mut circ = vec![0u32; size * size];
        for a in 0..size {
            for b in 0..size {
                let s = add_raw(self.p, &elems[a], &elems[b]);
                add[a * size + b] = rank_of(self.p, &s) as u32;
                let st = FpVector::from_rank(self.p, self.n, t.get(a, b) as u64);
                circ[a * size + b] = rank_of(self.p, &add_raw(self.p, &s, st.coords())) as u32;
            }
        }
        let v = |r: usize| self.vec(&elems[r]);
        let fail = |axiom, witness| Ok(AxiomCheck::Violation(AxiomViolation { axiom, witness }));
        for a in 0..size {
            if circ[a] as usize != a || circ[a * size] as usize != a {
                return fail(Axiom::Identity, vec![v(a)]);
            }
        }
        for a in 0..size {
            let x = (0..size).find(|&x| circ[a * size + x] == 0);
            match x {
                Some(x) if circ[x * size + a] == 0 => {}
                _ => return fail(Axiom::Inverse, vec![v(a)]),
            }
        }
        for a in 0..size {
            for b in 0..size {
                let ab = circ[a * size + b] as usize;
                for c in 0..size {
                    let bc = add[b * size + c] as usize;
                    let lhs = add[circ[a * size + bc] as usize * size + a];
                    let rhs = add[ab * size + circ[a * size + c] as usize];
                    if lhs != rhs {
                        return fail(Axiom::BraceLaw, vec![v(a), v(b), v(c)]);
                    }
                    let l = circ[ab * size + c];
                    let r = circ[a * size + circ[b * size + c] as usize];
                    if l != r {
                        return fail(Axiom::Associativity, vec![v(a), v(b), v(c)]);
                    }
                }
            }
        }
        Ok(AxiomCheck::Pass {
            checked: (size * size * size) as u64,
        })
    }

    fn check_axioms_sampled(&self, count: usize, seed: u64) -> AxiomCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zero = vec![0; self.n];
        for _ in 0..count {
            let a = FpVector::random(self.p, self.n, &mut rng).into_coords();
            let b = FpVector::random(self.p, self.n, &mut rng).into_coords();
            let c = FpVector::random(self.p, self.n, &mut rng).into_coords();
            let viol = |axiom, w: &[&Vec<u32>]| {
                AxiomCheck::Violation(AxiomViolation {
                    axiom,
                    witness: w.iter().map(|x| self.vec(x)).collect(),
                })
            };
            if self.circ_raw(&zero, &a) != a || self.circ_raw(&a, &zero) != a {
                return viol(Axiom::Identity, &[&a]);
            }
            match self.inverse_raw(&a) {
                Ok(x) if self.circ_raw(&a, &x) == zero && self.circ_raw(&x, &a) == zero => {}
                _ => return viol(Axiom::Inverse, &[&a]),
            }
            let ab = self.circ_raw(&a, &b);
            let ac = self.circ_raw(&a, &c);
            let lhs = add_raw(self.p, &self.circ_raw(&a, &add_raw(self.p, &b, &c)), &a);
            if lhs != add_raw(self.p, &ab, &ac) {
                return viol(Axiom::BraceLaw, &[&a, &b, &c]);
            }
            if self.circ_raw(&ab, &c) != self.circ_raw(&a, &self.circ_raw(&b, &c)) {
                return viol(Axiom::Associativity, &[&a, &b, &c]);
            }
        }
        AxiomCheck::Pass { checked: count as u64 }
    }

    /// Right F_p-linearity `a * (αb) = α (a * b)`.
    pub fn check_fp_linearity(&self, mode: CheckMode) -> Result<AxiomCheck> {
        let p = self.p;
        let test = |a: &[u32], b: &[u32], alpha: u32| -> Option<AxiomCheck> {
            let lhs = self.star_raw(a, &crate::fpcore::scale_raw(p, b, alpha));
            let rhs = crate::fpcore::scale_raw(p, &self.star_raw(a, b), alpha);
            (lhs != rhs).then(|| {
                AxiomCheck::Violation(AxiomViolation {
                    axiom: Axiom::Linearity,
                    witness: vec![self.vec(a), self.vec(b), FpVector::from_raw(p, vec![alpha])],
                })
            })
        };
        match mode {
            CheckMode::Exhaustive => {
                let cases = pow_u128(p.get() as u64, 2 * self.n + 1);
                if cases > EXHAUSTIVE_TRIPLE_CAP {
                    return Err(Error::resource(
                        "exhaustive linearity check",
                        cases,
                        EXHAUSTIVE_TRIPLE_CAP,
                    ));
                }
                let elems = self.all_elements();
                for a in &elems {
                    for b in &elems {
                        for alpha in 0..p.get() {
                            if let Some(v) = test(a, b, alpha) {
                                return Ok(v);
                            }
                        }
                    }
                }
                Ok(AxiomCheck::Pass { checked: cases as u64 })
            }
            CheckMode::Sampled { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..count {
                    let a = FpVector::random(p, self.n, &mut rng).into_coords();
                    let b = FpVector::random(p, self.n, &mut rng).into_coords();
                    let alpha = rng.gen_range(0..p.get());
                    if let Some(v) = test(&a, &b, alpha) {
                        return Ok(v);
                    }
                }
                Ok(AxiomCheck::Pass { checked: count as u64 })
            }
        }
    }

    /// Left arguments standing in for all of `left`. The flag is false when
    /// they are a sample.
    fn left_set(&self, left: &FpSubspace, opts: &SpanOptions) -> Result<(LeftSet, bool)> {
        let m = left.dim();
        let p = self.p.get() as u64;
        let elements: Vec<Vec<u32>>;
        let mut exact = true;
        if let (Backend::Ring(_), true) = (&self.backend, opts.use_degree_bound) {
            // bilinear: a basis of the left argument suffices
            elements = left.basis_raw().to_vec();
        } else {
            let grid = match (self.left_degree_bound(), opts.use_degree_bound) {
                (Some(d), true) if (d as u64) < p => Some(d as u64 + 1),
                _ => None,
            };
            let full = pow_u128(p, m);
            if let Some(g) = grid.filter(|&g| pow_u128(g, m) <= opts.cap && pow_u128(g, m) < full) {
                // A polynomial map of degree ≤ d in each variable is
                // determined by its values on {0..d}^m, and its values
                // everywhere are combinations of those, so the grid spans
                // the same subspace as all of `left`.
                elements = grid_points(g as u32, m).map(|t| left.combine(&t)).collect();
            } else if full <= opts.cap {
                elements = left.elements().collect();
            } else if let Some((count, seed)) = opts.sampling {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                elements = (0..count)
                    .map(|_| {
                        let t: Vec<u32> = (0..m).map(|_| rng.gen_range(0..self.p.get())).collect();
                        left.combine(&t)
                    })
                    .collect();
                exact = false;
            } else {
                return Err(Error::resource(
                    format!("enumerating left star arguments in a {m}-dimensional subspace"),
                    full,
                    opts.cap,
                ));
            }
        }
        if matches!(self.backend, Backend::Table(_)) {
            return Ok((LeftSet::Elements(elements), exact));
        }
        let mut ops: Vec<FpMatrix> = Vec::new();
        for a in &elements {
            let op = self.star_operator(a).expect("right-linear backend");
            if !ops.contains(&op) {
                ops.push(op);
            }
        }
        Ok((LeftSet::Operators(ops), exact))
    }

    fn apply_left_set(&self, set: &LeftSet, right_basis: &[Vec<u32>], into: &mut FpSubspace) {
        match set {
            LeftSet::Operators(ops) => {
                for m in ops {
                    for b in right_basis {
                        if into.is_full() {
                            return;
                        }
                        into.insert_raw(&m.mul_vec(b));
                    }
                }
            }
            LeftSet::Elements(elems) => {
                for a in elems {
                    for b in right_basis {
                        if into.is_full() {
                            return;
                        }
                        into.insert_raw(&self.star_raw(a, b));
                    }
                }
            }
        }
    }

    /// `span{a * b : a ∈ left, b ∈ basis(right)}`; right additivity of the
    /// star makes the basis of `right` enough. The flag is false when the
    /// left argument was sampled.
    pub fn star_span(&self, left: &FpSubspace, right: &FpSubspace, opts: &SpanOptions) -> Result<(FpSubspace, bool)> {
        let mut out = FpSubspace::zero(self.p, self.n);
        if left.is_zero() || right.is_zero() {
            return Ok((out, true));
        }
        let (set, exact) = self.left_set(left, opts)?;
        self.apply_left_set(&set, right.basis_raw(), &mut out);
        Ok((out, exact))
    }

    /// `span{x * c : x ∈ left}` for a single right argument.
    pub fn star_span_with(&self, left: &FpSubspace, c: &[u32], opts: &SpanOptions) -> Result<(FpSubspace, bool)> {
        let mut out = FpSubspace::zero(self.p, self.n);
        if left.is_zero() {
            return Ok((out, true));
        }
        let (set, exact) = self.left_set(left, opts)?;
        self.apply_left_set(&set, &[c.to_vec()], &mut out);
        Ok((out, exact))
    }

    /// Left `A^{i+1} = A * A^i`, right `A^{(i+1)} = A^{(i)} * A` or strong
    /// `A^{[i+1]} = Σ_j A^{[j]} * A^{[i+1-j]}` chain.
    pub fn chain(&self, kind: ChainKind, opts: &SpanOptions) -> Result<ChainReport> {
        let full = FpSubspace::full(self.p, self.n);
        let mut chain = vec![full.clone()];
        let mut left_sets: Vec<(LeftSet, bool)> = Vec::new();
        let mut exact = true;
        let mut index = (self.n == 0).then_some(1);
        let cap = chain_step_cap(self.n);
        while index.is_none() && chain.len() < cap {
            let i = chain.len();
            let mut next = FpSubspace::zero(self.p, self.n);
            match kind {
                ChainKind::Left => {
                    if left_sets.is_empty() {
                        left_sets.push(self.left_set(&full, opts)?);
                    }
                    let (set, e) = &left_sets[0];
                    exact &= *e;
                    self.apply_left_set(set, chain[i - 1].basis_raw(), &mut next);
                }
                ChainKind::Right => {
                    let (set, e) = self.left_set(&chain[i - 1], opts)?;
                    exact &= e;
                    self.apply_left_set(&set, full.basis_raw(), &mut next);
                }
                ChainKind::Strong => {
                    while left_sets.len() < i {
                        let j = left_sets.len();
                        left_sets.push(self.left_set(&chain[j], opts)?);
                    }
                    for j in 1..=i {
                        let (set, e) = &left_sets[j - 1];
                        exact &= *e;
                        self.apply_left_set(set, chain[i - j].basis_raw(), &mut next);
                    }
                }
                ChainKind::PreliePower => {
                    return Err(Error::input("the pre-Lie power chain is not a brace chain"));
                }
            }
            // Left and right levels depend only on the previous one, so a
            // repeat is final. Strong levels may repeat and still descend.
            let stalled = kind != ChainKind::Strong && next == chain[i - 1];
            let done = next.is_zero();
            chain.push(next);
            if done {
                index = Some(chain.len());
            } else if stalled {
                break;
            }
        }
        Ok(ChainReport {
            kind,
            chain,
            index,
            exact,
        })
    }

    /// Smallest subspace containing `x` and closed under the star.
    pub fn generated_subbrace(&self, x: &FpVector, opts: &SpanOptions) -> Result<FpSubspace> {
        x.ensure_in(self.p, self.n)?;
        let mut s = FpSubspace::span(self.p, self.n, std::slice::from_ref(x))?;
        loop {
            let (prod, exact) = self.star_span(&s, &s, opts)?;
            if !exact {
                return Err(Error::resource("exact sub-brace closure", s.cardinality(), opts.cap));
            }
            let next = s.sum(&prod)?;
            if next == s {
                return Ok(s);
            }
            s = next;
        }
    }

    /// Evaluates both sides of the expansion
    /// `(a+b)*c = a*c + b*c + Σ_{i=0}^{2s} (-1)^{i+1}((d_i*d_i')*c - d_i*(d_i'*c))`,
    /// stopping the sum at the first zero `d_i'` (all later terms vanish).
    pub fn expansion_check(&self, a: &FpVector, b: &FpVector, c: &FpVector, s: usize) -> Result<ExpansionReport> {
        for v in [a, b, c] {
            v.ensure_in(self.p, self.n)?;
        }
        let p = self.p;
        let (ar, br, cr) = (a.coords(), b.coords(), c.coords());
        let lhs = self.star_raw(&add_raw(p, ar, br), cr);
        let mut rhs = add_raw(p, &self.star_raw(ar, cr), &self.star_raw(br, cr));
        let mut d = ar.to_vec();
        let mut dp = br.to_vec();
        let mut seq = Vec::new();
        for i in 0..=2 * s {
            seq.push((self.vec(&d), self.vec(&dp)));
            if dp.iter().all(|&x| x == 0) {
                break;
            }
            let term = sub_raw(
                p,
                &self.star_raw(&self.star_raw(&d, &dp), cr),
                &self.star_raw(&d, &self.star_raw(&dp, cr)),
            );
            // (-1)^{i+1}
            let sign = if i % 2 == 0 { p.neg(1) } else { 1 };
            axpy(p, &mut rhs, sign, &term);
            let next_dp = self.star_raw(&d, &dp);
            d = add_raw(p, &d, &dp);
            dp = next_dp;
        }
        Ok(ExpansionReport {
            sequence: ExpansionSequence { d: seq },
            lhs: self.vec(&lhs),
            rhs: self.vec(&rhs),
        })
    }
}

/// All of `{0..g-1}^m`, first coordinate fastest.
fn grid_points(g: u32, m: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (g as u64).pow(m as u32);
    (0..total).map(move |mut r| {
        (0..m)
            .map(|_| {
                let d = (r % g as u64) as u32;
                r /= g as u64;
                d
            })
            .collect()
    })
}
