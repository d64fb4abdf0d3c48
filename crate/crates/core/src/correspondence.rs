//! Pre-Lie algebra → brace through the group of flows, and brace → pre-Lie
//! through the summation formula, with round-trip reports.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::brace::{Brace, CheckMode, SpanOptions};
use crate::error::{Error, Result};
use crate::fpcore::{add_raw, axpy, neg_raw, sub_raw, FpMatrix, FpVector, Prime};
use crate::prelie::{ChainKind, IdentityCheck, PreLieAlgebra, StructureConstants};

const OMEGA_MEMO_CAP: usize = 1 << 16;

/// Truncated exponentials, `W` and `Ω` of a nilpotent pre-Lie algebra.
///
/// All series stop at the nilpotency index `k`: any product of `k`
/// elements is zero, so `L_a^m` with `m ≥ k - 1` kills `A`.
pub struct FlowCache {
    alg: PreLieAlgebra,
    k: usize,
    /// `1/m!` for `m < k`
    inv_fact: Vec<u32>,
    omega_memo: RwLock<HashMap<Vec<u32>, Vec<u32>>>,
}

impl FlowCache {
    /// Requires the pre-Lie identity, nilpotency and `p > k`.
    pub fn new(alg: &PreLieAlgebra) -> Result<Self> {
        if let IdentityCheck::Violation { i, j, k } = alg.check_identity() {
            return Err(Error::precondition(format!(
                "pre-Lie identity fails on basis triple ({i},{j},{k})"
            )));
        }
        let chain = alg.power_chain();
        let k = chain.index.ok_or_else(|| {
            Error::precondition(format!("algebra is not nilpotent within {} steps", chain.chain.len()))
        })?;
        let p = alg.modulus();
        if p.get() as usize <= k {
            return Err(Error::precondition(format!(
                "group of flows needs p > k, but p = {p} and nilpotency index k = {k}"
            )));
        }
        let mut inv_fact = vec![1u32];
        for m in 1..k.max(1) {
            let prev = inv_fact[m - 1];
            inv_fact.push(p.mul(prev, p.inv(m as u32)?));
        }
        let mut verified = alg.clone();
        verified.verify();
        Ok(FlowCache {
            alg: verified,
            k,
            inv_fact,
            omega_memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn algebra(&self) -> &PreLieAlgebra {
        &self.alg
    }

    /// Nilpotency index of the source algebra.
    pub fn index(&self) -> usize {
        self.k
    }

    fn p(&self) -> Prime {
        self.alg.modulus()
    }

    fn left(&self, a: &[u32]) -> FpMatrix {
        self.alg.constants().left_matrix(a)
    }

    /// `Σ_{m<k} (±L)^m b / m!`
    fn exp_apply(&self, l: &FpMatrix, b: &[u32], negate: bool) -> Vec<u32> {
        let p = self.p();
        let mut sum = b.to_vec();
        let mut term = b.to_vec();
        for m in 1..self.k {
            term = l.mul_vec(&term);
            if negate {
                term = neg_raw(p, &term);
            }
            if term.iter().all(|&x| x == 0) {
                break;
            }
            axpy(p, &mut sum, self.inv_fact[m], &term);
        }
        sum
    }

    /// `e^{L_a}` as a matrix.
    fn exp_matrix(&self, a: &[u32]) -> FpMatrix {
        let p = self.p();
        let n = self.alg.dim();
        let l = self.left(a);
        let mut sum = FpMatrix::identity(p, n);
        let mut pow = FpMatrix::identity(p, n);
        for m in 1..self.k {
            pow = pow.mul(&l);
            for r in 0..n {
                for c in 0..n {
                    let v = p.mul_add(sum.get(r, c), self.inv_fact[m], pow.get(r, c));
                    sum.set(r, c, v);
                }
            }
        }
        sum
    }

    pub(crate) fn exp_l_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        self.exp_apply(&self.left(a), b, false)
    }

    pub(crate) fn exp_l_neg_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        self.exp_apply(&self.left(a), b, true)
    }

    /// `W(a) = Σ_{m≥1} L_a^{m-1}(a) / m!`
    pub(crate) fn w_raw(&self, a: &[u32]) -> Vec<u32> {
        let p = self.p();
        let l = self.left(a);
        let mut sum = a.to_vec();
        let mut term = a.to_vec();
        for m in 2..self.k {
            term = l.mul_vec(&term);
            if term.iter().all(|&x| x == 0) {
                break;
            }
            axpy(p, &mut sum, self.inv_fact[m], &term);
        }
        sum
    }

    /// The unique `x` with `W(x) = a`, by `x ← a - (W(x) - x)` from `x = a`.
    pub(crate) fn omega_raw(&self, a: &[u32]) -> Result<Vec<u32>> {
        if let Some(x) = self.omega_memo.read().expect("memo lock").get(a) {
            return Ok(x.clone());
        }
        let p = self.p();
        let mut x = a.to_vec();
        let mut converged = false;
        for _ in 0..=self.k {
            let next = sub_raw(p, a, &sub_raw(p, &self.w_raw(&x), &x));
            if next == x {
                converged = true;
                break;
            }
            x = next;
        }
        if !converged || self.w_raw(&x) != a {
            return Err(Error::Internal(format!(
                "Ω iteration did not converge within {} steps",
                self.k + 1
            )));
        }
        let mut memo = self.omega_memo.write().expect("memo lock");
        if memo.len() < OMEGA_MEMO_CAP {
            memo.insert(a.to_vec(), x.clone());
        }
        Ok(x)
    }

    fn omega_unchecked(&self, a: &[u32]) -> Vec<u32> {
        self.omega_raw(a).expect("Ω converges for a verified nilpotent algebra")
    }

    /// `a * b = e^{L_{Ω(a)}}(b) - b`
    pub(crate) fn flow_star_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let o = self.omega_unchecked(a);
        sub_raw(self.p(), &self.exp_l_raw(&o, b), b)
    }

    /// Matrix of `b ↦ a * b`.
    pub(crate) fn star_operator(&self, a: &[u32]) -> FpMatrix {
        let p = self.p();
        let mut m = self.exp_matrix(&self.omega_unchecked(a));
        for i in 0..self.alg.dim() {
            m.set(i, i, p.sub(m.get(i, i), 1));
        }
        m
    }

    /// `e^{-L_{Ω(a)}}(-a)`
    pub(crate) fn flow_inverse_raw(&self, a: &[u32]) -> Vec<u32> {
        let o = self.omega_unchecked(a);
        self.exp_l_neg_raw(&o, &neg_raw(self.p(), a))
    }

    fn check(&self, v: &FpVector) -> Result<()> {
        v.ensure_in(self.p(), self.alg.dim())
    }

    pub fn exp_l(&self, a: &FpVector, b: &FpVector) -> Result<FpVector> {
        self.check(a)?;
        self.check(b)?;
        Ok(FpVector::from_raw(self.p(), self.exp_l_raw(a.coords(), b.coords())))
    }

    pub fn exp_l_neg(&self, a: &FpVector, b: &FpVector) -> Result<FpVector> {
        self.check(a)?;
        self.check(b)?;
        Ok(FpVector::from_raw(self.p(), self.exp_l_neg_raw(a.coords(), b.coords())))
    }

    pub fn w_map(&self, a: &FpVector) -> Result<FpVector> {
        self.check(a)?;
        Ok(FpVector::from_raw(self.p(), self.w_raw(a.coords())))
    }

    pub fn omega(&self, a: &FpVector) -> Result<FpVector> {
        self.check(a)?;
        Ok(FpVector::from_raw(self.p(), self.omega_raw(a.coords())?))
    }

    /// `a ∘ b = a + e^{L_{Ω(a)}}(b)`
    pub fn flow_circ(&self, a: &FpVector, b: &FpVector) -> Result<FpVector> {
        self.check(a)?;
        self.check(b)?;
        let o = self.omega_raw(a.coords())?;
        Ok(FpVector::from_raw(
            self.p(),
            add_raw(self.p(), a.coords(), &self.exp_l_raw(&o, b.coords())),
        ))
    }
}

/// Group of flows of `alg` as a brace, with a small sampled axiom check.
pub fn prelie_to_brace(alg: &PreLieAlgebra) -> Result<Brace> {
    let brace = Brace::from_flows(Arc::new(FlowCache::new(alg)?));
    let spot = brace.check_axioms(CheckMode::Sampled {
        count: 32,
        seed: 0x5EED,
    })?;
    if !spot.is_pass() {
        return Err(Error::Internal(format!("group of flows failed a brace axiom: {spot}")));
    }
    Ok(brace)
}

/// `-Σ_{m=0}^{p-2} 2^{-m} ((2^m a) * b)`
pub fn summation_product(brace: &Brace, a: &FpVector, b: &FpVector) -> Result<FpVector> {
    a.ensure_in(brace.modulus(), brace.dim())?;
    b.ensure_in(brace.modulus(), brace.dim())?;
    ensure_odd(brace.modulus())?;
    Ok(FpVector::from_raw(
        brace.modulus(),
        summation_raw(brace, a.coords(), b.coords()),
    ))
}

fn ensure_odd(p: Prime) -> Result<()> {
    if p.get() == 2 {
        return Err(Error::precondition(
            "summation formula divides by powers of 2, so p must be odd",
        ));
    }
    Ok(())
}

fn summation_raw(brace: &Brace, a: &[u32], b: &[u32]) -> Vec<u32> {
    let p = brace.modulus();
    let inv2 = p.inv(2).expect("p is odd");
    let mut acc = vec![0; brace.dim()];
    let (mut two_m, mut inv_two_m) = (1u32, 1u32);
    for _ in 0..=p.get().saturating_sub(2) {
        let scaled: Vec<u32> = a.iter().map(|&x| p.mul(x, two_m)).collect();
        axpy(p, &mut acc, inv_two_m, &brace.star_raw(&scaled, b));
        two_m = p.mul(two_m, 2);
        inv_two_m = p.mul(inv_two_m, inv2);
    }
    neg_raw(p, &acc)
}

/// `Σ_{i=0}^{p-2} 2^{(j-1)i} mod p`
pub fn geometric_series_sum(p: Prime, j: u32) -> u32 {
    let base = p.pow(2, (j as u64).saturating_sub(1));
    let mut acc = 0;
    let mut term = 1;
    for _ in 0..=p.get().saturating_sub(2) {
        acc = p.add(acc, term);
        term = p.mul(term, base);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConversionOptions {
    /// Report violated hypotheses instead of refusing.
    pub force: bool,
    /// Seeded element pairs for the bilinearity spot check.
    pub samples: usize,
    pub seed: u64,
    pub span: SpanOptions,
}

impl Default for ConversionOptions {
    fn default() -> Self {
        ConversionOptions {
            force: false,
            samples: 1000,
            seed: 0x5EED,
            span: SpanOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conversion {
    pub algebra: PreLieAlgebra,
    /// Strong-chain index of the source brace, if it reached zero.
    pub strong_index: Option<usize>,
    /// Whether `2^k < p` held.
    pub hypothesis_holds: bool,
    pub bilinearity_checked: usize,
    /// Pairs where the summation formula differs from the bilinear
    /// extension of its basis values (first few only).
    pub bilinearity_failures: Vec<(FpVector, FpVector)>,
    pub bilinearity_failure_count: usize,
    pub identity: IdentityCheck,
}

impl Conversion {
    pub fn is_clean(&self) -> bool {
        self.hypothesis_holds && self.bilinearity_failure_count == 0 && self.identity.is_pass()
    }
}

/// `c[i][j] = -Σ_{m=0}^{p-2} 2^{-m} ((2^m e_i) * e_j)`, gated on a strong
/// nilpotency index `k` with `2^k < p`, then re-checked for bilinearity on
/// sampled pairs and for the pre-Lie identity.
pub fn brace_to_prelie(brace: &Brace, opts: &ConversionOptions) -> Result<Conversion> {
    let p = brace.modulus();
    let n = brace.dim();
    ensure_odd(p)?;
    let strong = brace.chain(ChainKind::Strong, &opts.span)?;
    let hypothesis_holds = match (strong.index, strong.exact) {
        (Some(k), true) => (k as u32) < 32 && (1u64 << k) < p.get() as u64,
        _ => false,
    };
    if !hypothesis_holds && !opts.force {
        return Err(match strong.index {
            None => Error::precondition("brace is not strongly nilpotent within the step cap"),
            Some(_) if !strong.exact => Error::precondition("strong chain was sampled, so its index is not certain"),
            Some(k) => Error::precondition(format!("summation formula needs 2^k < p, but k = {k} and p = {p}")),
        });
    }
    let mut c = StructureConstants::zero(p, n);
    for i in 0..n {
        let ei = FpVector::unit(p, n, i).into_coords();
        for j in 0..n {
            let ej = FpVector::unit(p, n, j).into_coords();
            c.set_product(i, j, &summation_raw(brace, &ei, &ej));
        }
    }
    let algebra = PreLieAlgebra::new(c);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut failures = Vec::new();
    let mut failure_count = 0;
    for _ in 0..opts.samples {
        let a = FpVector::random(p, n, &mut rng);
        let b = FpVector::random(p, n, &mut rng);
        let direct = summation_raw(brace, a.coords(), b.coords());
        if direct != algebra.mul_raw(a.coords(), b.coords()) {
            failure_count += 1;
            if failures.len() < 8 {
                failures.push((a, b));
            }
        }
    }
    let identity = algebra.check_identity();
    let mut algebra = algebra;
    algebra.verify();
    let conv = Conversion {
        algebra,
        strong_index: strong.index,
        hypothesis_holds,
        bilinearity_checked: opts.samples,
        bilinearity_failures: failures,
        bilinearity_failure_count: failure_count,
        identity,
    };
    if !opts.force && !conv.is_clean() {
        return Err(Error::HypothesesViolated(format!(
            "summation product failed {} of {} bilinearity samples; identity check: {:?}",
            conv.bilinearity_failure_count, conv.bilinearity_checked, conv.identity
        )));
    }
    Ok(conv)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTripReport {
    pub constants_match: bool,
    /// First basis pair `(i, j)` whose product differs.
    pub first_constant_mismatch: Option<(usize, usize)>,
    pub prelie_index: Option<usize>,
    pub brace_strong_index: Option<usize>,
    pub circ_checked: u64,
    pub first_circ_mismatch: Option<(FpVector, FpVector)>,
}

impl RoundTripReport {
    pub fn is_exact(&self) -> bool {
        self.constants_match && self.first_circ_mismatch.is_none() && self.prelie_index == self.brace_strong_index
    }
}

fn first_mismatch(a: &StructureConstants, b: &StructureConstants) -> Option<(usize, usize)> {
    let n = a.dim();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| a.basis_product(i, j) != b.basis_product(i, j))
}

/// Compares `∘` of two braces on every pair (when `p^{2n}` is at most
/// `cap`) or on `samples` seeded pairs.
fn compare_circ(x: &Brace, y: &Brace, cap: u128, samples: usize, seed: u64) -> (u64, Option<(FpVector, FpVector)>) {
    let (p, n) = (x.modulus(), x.dim());
    let order = x.order();
    let pairs: Box<dyn Iterator<Item = (FpVector, FpVector)>> = if order.saturating_mul(order) <= cap {
        Box::new((0..order as u64).flat_map(move |r| {
            (0..order as u64).map(move |s| (FpVector::from_rank(p, n, r), FpVector::from_rank(p, n, s)))
        }))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Box::new((0..samples).map(move |_| (FpVector::random(p, n, &mut rng), FpVector::random(p, n, &mut rng))))
    };
    let mut checked = 0;
    for (a, b) in pairs {
        checked += 1;
        if x.circ_raw(a.coords(), b.coords()) != y.circ_raw(a.coords(), b.coords()) {
            return (checked, Some((a, b)));
        }
    }
    (checked, None)
}

/// `brace_to_prelie(prelie_to_brace(A))` against `A`.
pub fn roundtrip_report(alg: &PreLieAlgebra, opts: &ConversionOptions) -> Result<RoundTripReport> {
    let brace = prelie_to_brace(alg)?;
    let conv = brace_to_prelie(&brace, opts)?;
    let mismatch = first_mismatch(alg.constants(), conv.algebra.constants());
    Ok(RoundTripReport {
        constants_match: mismatch.is_none(),
        first_constant_mismatch: mismatch,
        prelie_index: alg.nilpotency_index(),
        brace_strong_index: conv.strong_index,
        circ_checked: 0,
        first_circ_mismatch: None,
    })
}

/// `prelie_to_brace(brace_to_prelie(B))` against `B` on `∘`.
pub fn roundtrip_report_brace(brace: &Brace, opts: &ConversionOptions) -> Result<RoundTripReport> {
    let conv = brace_to_prelie(brace, opts)?;
    let back = prelie_to_brace(&conv.algebra)?;
    let (checked, bad) = compare_circ(brace, &back, 1_000_000, opts.samples, opts.seed);
    let back_conv = brace_to_prelie(&back, opts)?;
    let mismatch = first_mismatch(conv.algebra.constants(), back_conv.algebra.constants());
    Ok(RoundTripReport {
        constants_match: mismatch.is_none(),
        first_constant_mismatch: mismatch,
        prelie_index: conv.algebra.nilpotency_index(),
        brace_strong_index: conv.strong_index,
        circ_checked: checked,
        first_circ_mismatch: bad,
    })
}
