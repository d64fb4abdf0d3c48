//! One-generated nilpotent pre-Lie algebras of dimension 4 over F_p and
//! their groups of flows, i.e. one-generated F_p-braces of order p^4.
//!
//! Each family is produced as candidate structure constants from its
//! defining relations; the pre-Lie identity, the chain shape and
//! one-generatedness decide which candidates survive. Survivors are then
//! sorted into isomorphism classes by searching generator images.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::brace::{AxiomCheck, Brace, CheckMode, SpanOptions};
use crate::correspondence::{brace_to_prelie, prelie_to_brace, ConversionOptions};
use crate::error::{Error, Result};
use crate::fpcore::{scale_raw, sub_raw, FpMatrix, FpSubspace, FpVector, Prime};
use crate::prelie::{ChainKind, PreLieAlgebra, StructureConstants};

/// Largest number of generator images an exact isomorphism search visits.
pub const ISO_SEARCH_CAP: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `A^5 ≠ 0`, `A^6 = 0`
    A6,
    /// `A^4 ≠ 0`, `A^5 = 0`
    A5,
    /// `A^4 = 0`
    A4,
}

impl Family {
    pub fn nilpotency_index(self) -> usize {
        match self {
            Family::A6 => 6,
            Family::A5 => 5,
            Family::A4 => 4,
        }
    }

    /// Smallest admissible `p`: the round trip needs `p > 2^k`.
    pub fn min_prime_exclusive(self) -> u64 {
        1 << self.nilpotency_index()
    }

    pub fn tag(self) -> &'static str {
        match self {
            Family::A6 => "a6",
            Family::A5 => "a5",
            Family::A4 => "a4",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "a6" => Some(Family::A6),
            "a5" => Some(Family::A5),
            "a4" => Some(Family::A4),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ParamValue {
    Scalar(u32),
    Choice(&'static str),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Scalar(v) => write!(f, "{v}"),
            ParamValue::Choice(s) => f.write_str(s),
        }
    }
}

pub type Params = Vec<(&'static str, ParamValue)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationRecord {
    pub family: Family,
    /// Parameters of the first candidate that produced this table.
    pub params: Params,
    pub algebra: PreLieAlgebra,
    pub chain_dims: Vec<usize>,
    /// Number of candidates producing exactly this table.
    pub multiplicity: u64,
    pub iso_class: Option<usize>,
    pub iso_rep: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySummary {
    pub family: Family,
    pub candidates: u64,
    /// Candidates (with multiplicity) passing every filter.
    pub survivors: u64,
    pub distinct_tables: usize,
    pub iso_classes: Option<usize>,
    /// Parameters whose value changes the table for some fixed choice of
    /// the others.
    pub effective_params: Vec<&'static str>,
    pub vacuous_params: Vec<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyReport {
    pub summary: FamilySummary,
    pub records: Vec<ClassificationRecord>,
}

fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

/// Candidate on the basis `x, x², x²·x, x²·(x²·x)`:
/// `x·x² = α x²·(x²·x)`, `(x²·x)·x = β x·(x·x²)`, `x·(x²·x) = γ x·(x·x²)`,
/// `x²·x² = x·(x²·x) - (x²·x)·x`, everything else in `A^5` or beyond zero.
pub fn family_a6_constants(p: Prime, alpha: u32, beta: u32, gamma: u32) -> StructureConstants {
    let mut c = StructureConstants::zero(p, 4);
    c.set_product(0, 0, &unit(4, 1));
    c.set_product(1, 0, &unit(4, 2));
    c.set_product(1, 2, &unit(4, 3));
    c.set_product(0, 1, &scale_raw(p, &unit(4, 3), alpha));
    // x·(x·x²), evaluated through the table built so far
    let w = c.mul_raw(&unit(4, 0), c.basis_product(0, 1).to_vec().as_slice());
    c.set_product(2, 0, &scale_raw(p, &w, beta));
    c.set_product(0, 2, &scale_raw(p, &w, gamma));
    let sq = sub_raw(p, c.basis_product(0, 2), c.basis_product(2, 0));
    c.set_product(1, 1, &sq);
    c
}

/// Which of `x·x²`, `x²·x` is the basis vector `a` of `A^3 / A^4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum A5Lead {
    /// `a = x·x²` and `x²·x = -s a`
    XTimesSquare,
    /// `a = x²·x` and `x·x² = -s a`
    SquareTimesX,
}

/// Which of `x·a`, `a·x` spans `A^4`; the other is set to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum A5Top {
    XTimesA,
    ATimesX,
}

/// Candidate on the basis `x, x², a, b`, with
/// `x²·x² = (x²·x)·x - (x·x²)·x + x·(x²·x)` and all products of five or
/// more elements zero.
pub fn family_a5_constants(p: Prime, lead: A5Lead, top: A5Top, s: u32) -> StructureConstants {
    let mut c = StructureConstants::zero(p, 4);
    let a = unit(4, 2);
    let minus_s_a = scale_raw(p, &a, p.neg(s));
    c.set_product(0, 0, &unit(4, 1));
    match lead {
        A5Lead::XTimesSquare => {
            c.set_product(0, 1, &a);
            c.set_product(1, 0, &minus_s_a);
        }
        A5Lead::SquareTimesX => {
            c.set_product(1, 0, &a);
            c.set_product(0, 1, &minus_s_a);
        }
    }
    match top {
        A5Top::XTimesA => c.set_product(0, 2, &unit(4, 3)),
        A5Top::ATimesX => c.set_product(2, 0, &unit(4, 3)),
    }
    let x = unit(4, 0);
    let sq_x = c.basis_product(1, 0).to_vec();
    let x_sq = c.basis_product(0, 1).to_vec();
    let t1 = c.mul_raw(&sq_x, &x);
    let t2 = c.mul_raw(&x_sq, &x);
    let t3 = c.mul_raw(&x, &sq_x);
    let v = crate::fpcore::add_raw(p, &sub_raw(p, &t1, &t2), &t3);
    c.set_product(1, 1, &v);
    c
}

/// Basis `x, x², x²·x, x·x²`; every product of four or more elements is zero.
pub fn family_a4_constants(p: Prime) -> StructureConstants {
    let mut c = StructureConstants::zero(p, 4);
    c.set_product(0, 0, &unit(4, 1));
    c.set_product(1, 0, &unit(4, 2));
    c.set_product(0, 1, &unit(4, 3));
    c
}

fn check_tier(p: Prime, family: Family) -> Result<()> {
    if (p.get() as u64) <= family.min_prime_exclusive() {
        return Err(Error::precondition(format!(
            "family {family} needs p > {}, got p = {p}",
            family.min_prime_exclusive()
        )));
    }
    Ok(())
}

/// Dedups candidate tables, filters them and reports the parameter roles.
fn collect_family(
    p: Prime,
    family: Family,
    candidates: impl Iterator<Item = (Params, StructureConstants)>,
) -> FamilyReport {
    let mut ids: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut tables: Vec<(Params, StructureConstants, u64)> = Vec::new();
    let mut per_candidate: Vec<(Params, usize)> = Vec::new();
    for (params, consts) in candidates {
        let id = *ids.entry(consts.flat().to_vec()).or_insert_with(|| {
            tables.push((params.clone(), consts.clone(), 0));
            tables.len() - 1
        });
        tables[id].2 += 1;
        per_candidate.push((params, id));
    }
    let names: Vec<&'static str> = per_candidate
        .first()
        .map(|(ps, _)| ps.iter().map(|(n, _)| *n).collect())
        .unwrap_or_default();
    let mut effective = Vec::new();
    let mut vacuous = Vec::new();
    for (q, name) in names.iter().enumerate() {
        let mut seen: HashMap<Params, usize> = HashMap::new();
        let mut varies = false;
        for (params, id) in &per_candidate {
            let mut key = params.clone();
            key.remove(q);
            let first = *seen.entry(key).or_insert(*id);
            if first != *id {
                varies = true;
                break;
            }
        }
        if varies {
            effective.push(*name);
        } else {
            vacuous.push(*name);
        }
    }
    let candidates = per_candidate.len() as u64;
    let filtered: Vec<Option<ClassificationRecord>> = tables
        .into_par_iter()
        .map(|(params, consts, mult)| survivor(p, family, params, consts, mult))
        .collect();
    let records: Vec<ClassificationRecord> = filtered.into_iter().flatten().collect();
    FamilyReport {
        summary: FamilySummary {
            family,
            candidates,
            survivors: records.iter().map(|r| r.multiplicity).sum(),
            distinct_tables: records.len(),
            iso_classes: None,
            effective_params: effective,
            vacuous_params: vacuous,
        },
        records,
    }
}

/// Identity, chain shape `A^{k-1} ≠ 0 = A^k` and generation by `x`.
fn survivor(
    p: Prime,
    family: Family,
    params: Params,
    consts: StructureConstants,
    multiplicity: u64,
) -> Option<ClassificationRecord> {
    let mut alg = PreLieAlgebra::new(consts);
    if !alg.verify().is_pass() {
        return None;
    }
    let chain = alg.power_chain();
    if chain.index != Some(family.nilpotency_index()) {
        return None;
    }
    if !alg.generated_subalgebra(&FpVector::unit(p, 4, 0)).ok()?.is_full() {
        return None;
    }
    Some(ClassificationRecord {
        family,
        params,
        chain_dims: chain.dims(),
        algebra: alg,
        multiplicity,
        iso_class: None,
        iso_rep: false,
    })
}

pub fn build_family_a4(p: Prime) -> Result<FamilyReport> {
    check_tier(p, Family::A4)?;
    Ok(collect_family(
        p,
        Family::A4,
        std::iter::once((Vec::new(), family_a4_constants(p))),
    ))
}

/// Projective points `(α:1)` with `a = x·x²` and `(1:β)` with `a = x²·x`,
/// each with both choices of `b`.
pub fn build_family_a5(p: Prime) -> Result<FamilyReport> {
    check_tier(p, Family::A5)?;
    let mut cands = Vec::new();
    for (lead, lead_name) in [(A5Lead::XTimesSquare, "x·x²"), (A5Lead::SquareTimesX, "x²·x")] {
        for (top, top_name) in [(A5Top::XTimesA, "x·a"), (A5Top::ATimesX, "a·x")] {
            for s in 0..p.get() {
                let (alpha, beta) = match lead {
                    A5Lead::XTimesSquare => (s, 1),
                    A5Lead::SquareTimesX => (1, s),
                };
                let params = vec![
                    ("a", ParamValue::Choice(lead_name)),
                    ("b", ParamValue::Choice(top_name)),
                    ("alpha", ParamValue::Scalar(alpha)),
                    ("beta", ParamValue::Scalar(beta)),
                ];
                cands.push((params, family_a5_constants(p, lead, top, s)));
            }
        }
    }
    Ok(collect_family(p, Family::A5, cands.into_iter()))
}

/// Every `(α, β, γ) ∈ F_p^3`.
pub fn build_family_a6(p: Prime) -> Result<FamilyReport> {
    check_tier(p, Family::A6)?;
    let q = p.get();
    let cands = (0..q).flat_map(move |a| {
        (0..q).flat_map(move |b| {
            (0..q).map(move |g| {
                let params = vec![
                    ("alpha", ParamValue::Scalar(a)),
                    ("beta", ParamValue::Scalar(b)),
                    ("gamma", ParamValue::Scalar(g)),
                ];
                (params, family_a6_constants(p, a, b, g))
            })
        })
    });
    Ok(collect_family(p, Family::A6, cands))
}

/// Words in one generator adapted to the power filtration: the chosen
/// words of degree `d` form a basis of `A^d` modulo `A^{d+1}`.
#[derive(Clone, Debug)]
struct WordBasis {
    /// `None` is the generator, `Some((l, r))` the product of two earlier nodes.
    nodes: Vec<Option<(usize, usize)>>,
    basis: Vec<usize>,
    degrees: Vec<usize>,
    /// Nodes the basis depends on, in evaluation order.
    needed: Vec<usize>,
}

impl WordBasis {
    fn build(alg: &PreLieAlgebra, x: &[u32]) -> Option<(WordBasis, Vec<Vec<u32>>)> {
        let (p, n) = (alg.modulus(), alg.dim());
        let chain = alg.power_chain();
        let k = chain.index?;
        let mut nodes = vec![None];
        let mut values = vec![x.to_vec()];
        let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(), vec![0]];
        let (mut basis, mut degrees) = (Vec::new(), Vec::new());
        for d in 1..k {
            if d >= 2 {
                let mut fresh = Vec::new();
                for d1 in 1..d {
                    for &i in &by_degree[d1] {
                        for &j in &by_degree[d - d1] {
                            let v = alg.mul_raw(&values[i], &values[j]);
                            nodes.push(Some((i, j)));
                            values.push(v);
                            fresh.push(nodes.len() - 1);
                        }
                    }
                }
                by_degree.push(fresh);
            }
            let mut s = chain.level(d + 1).cloned().unwrap_or_else(|| FpSubspace::zero(p, n));
            for &w in &by_degree[d] {
                if s.insert_raw(&values[w]) {
                    basis.push(w);
                    degrees.push(d);
                }
            }
        }
        if basis.len() != n {
            return None;
        }
        let mut need = vec![false; nodes.len()];
        for &b in &basis {
            need[b] = true;
        }
        for i in (0..nodes.len()).rev() {
            if let (true, Some((l, r))) = (need[i], nodes[i]) {
                need[l] = true;
                need[r] = true;
            }
        }
        let needed = (0..nodes.len()).filter(|&i| need[i]).collect();
        let vecs = basis.iter().map(|&b| values[b].clone()).collect();
        Some((
            WordBasis {
                nodes,
                basis,
                degrees,
                needed,
            },
            vecs,
        ))
    }

    /// Values of the basis words at `y` in `alg`.
    fn evaluate(&self, alg: &PreLieAlgebra, y: &[u32]) -> Vec<Vec<u32>> {
        let mut vals: Vec<Option<Vec<u32>>> = vec![None; self.nodes.len()];
        for &i in &self.needed {
            vals[i] = Some(match self.nodes[i] {
                None => y.to_vec(),
                Some((l, r)) => alg.mul_raw(
                    vals[l].as_deref().expect("children first"),
                    vals[r].as_deref().expect("children first"),
                ),
            });
        }
        self.basis
            .iter()
            .map(|&b| vals[b].clone().expect("basis evaluated"))
            .collect()
    }
}

fn columns_matrix(p: Prime, n: usize, cols: &[Vec<u32>]) -> FpMatrix {
    let mut m = FpMatrix::zeros(p, n, cols.len());
    for (c, v) in cols.iter().enumerate() {
        for (r, &x) in v.iter().enumerate() {
            m.set(r, c, x);
        }
    }
    m
}

/// Cheap isomorphism invariants of a one-generated algebra, including the
/// structure constants of the associated graded algebra in its word basis
/// (these do not depend on the choice of generator).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct IsoInvariants {
    chain_dims: Vec<usize>,
    product_dims: [usize; 3],
    left_annihilator: usize,
    right_annihilator: usize,
    graded_degrees: Vec<usize>,
    graded_constants: Vec<u32>,
}

/// `(left annihilator, right annihilator)` of `alg`.
fn annihilators(alg: &PreLieAlgebra) -> (FpSubspace, FpSubspace) {
    let (p, n) = (alg.modulus(), alg.dim());
    let c = alg.constants();
    let mut left = FpMatrix::zeros(p, n * n, n);
    let mut right = FpMatrix::zeros(p, n * n, n);
    for other in 0..n {
        for k in 0..n {
            for z in 0..n {
                left.set(other * n + k, z, c.get(z, other, k));
                right.set(other * n + k, z, c.get(other, z, k));
            }
        }
    }
    let span = |m: &FpMatrix| {
        let mut s = FpSubspace::zero(p, n);
        for v in m.kernel() {
            s.insert_raw(&v);
        }
        s
    };
    (span(&left), span(&right))
}

struct Prepared {
    alg: PreLieAlgebra,
    words: WordBasis,
    /// Inverse of the matrix whose columns are the basis words at `x`.
    word_inverse: FpMatrix,
    invariants: IsoInvariants,
    /// Generator images differing by an element of this subspace give the
    /// same word values, so only one per coset is searched.
    redundant: FpSubspace,
    square: FpSubspace,
}

impl Prepared {
    fn new(alg: &PreLieAlgebra, x: &[u32]) -> Result<Prepared> {
        let (p, n) = (alg.modulus(), alg.dim());
        let (words, vecs) =
            WordBasis::build(alg, x).ok_or_else(|| Error::input("designated element does not generate the algebra"))?;
        let word_inverse = columns_matrix(p, n, &vecs).inverse()?;
        let chain = alg.power_chain();
        let full = FpSubspace::full(p, n);
        let zero = FpSubspace::zero(p, n);
        let a2 = chain.level(2).cloned().unwrap_or(zero.clone());
        let c = alg.constants();
        let mut graded = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                let coords = word_inverse.mul_vec(&alg.mul_raw(&vecs[i], &vecs[j]));
                let d = words.degrees[i] + words.degrees[j];
                graded.extend(
                    coords
                        .iter()
                        .zip(&words.degrees)
                        .map(|(&v, &dl)| if dl == d { v } else { 0 }),
                );
            }
        }
        let (left, right) = annihilators(alg);
        let invariants = IsoInvariants {
            chain_dims: chain.dims(),
            product_dims: [
                c.product_space(&full, &full).dim(),
                c.product_space(&a2, &full).dim(),
                c.product_space(&full, &a2).dim(),
            ],
            left_annihilator: left.dim(),
            right_annihilator: right.dim(),
            graded_degrees: words.degrees.clone(),
            graded_constants: graded,
        };
        let redundant = left.intersect(&right)?.intersect(&a2)?;
        Ok(Prepared {
            alg: alg.clone(),
            words,
            word_inverse,
            invariants,
            redundant,
            square: a2,
        })
    }

    /// Does `x ↦ y` extend to an isomorphism from `src` onto `self`?
    fn accepts(&self, src: &Prepared, y: &[u32]) -> bool {
        let (p, n) = (self.alg.modulus(), self.alg.dim());
        let images = src.words.evaluate(&self.alg, y);
        let u = columns_matrix(p, n, &images);
        let phi = u.mul(&src.word_inverse);
        let cols: Vec<Vec<u32>> = (0..n).map(|j| (0..n).map(|i| phi.get(i, j)).collect()).collect();
        let sc = src.alg.constants();
        for i in 0..n {
            for j in 0..n {
                let lhs = phi.mul_vec(sc.basis_product(i, j));
                if lhs != self.alg.mul_raw(&cols[i], &cols[j]) {
                    return false;
                }
            }
        }
        u.rank() == n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoMode {
    Exact { cap: u128 },
    Sampled { count: usize, seed: u64 },
}

impl Default for IsoMode {
    fn default() -> Self {
        IsoMode::Exact { cap: ISO_SEARCH_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoVerdict {
    /// The generator maps to `image`.
    Isomorphic {
        image: FpVector,
    },
    NotIsomorphic,
    /// No isomorphism among the sampled generator images.
    PossiblyDistinct,
}

impl IsoVerdict {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, IsoVerdict::Isomorphic { .. })
    }
}

fn search(src: &Prepared, dst: &Prepared, mode: IsoMode) -> Result<IsoVerdict> {
    if src.invariants != dst.invariants {
        return Ok(IsoVerdict::NotIsomorphic);
    }
    let (p, n) = (dst.alg.modulus(), dst.alg.dim());
    let pivots = dst.redundant.pivots();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let found = |y: Vec<u32>| {
        (!dst.square.contains_raw(&y) && dst.accepts(src, &y)).then(|| IsoVerdict::Isomorphic {
            image: FpVector::from_raw(p, y),
        })
    };
    match mode {
        IsoMode::Exact { cap } => {
            let count = (p.get() as u128).pow(free.len() as u32);
            if count > cap {
                return Err(Error::resource("generator-image search", count, cap));
            }
            for r in 0..count as u64 {
                let mut y = vec![0; n];
                let mut rest = r;
                for &c in &free {
                    y[c] = (rest % p.get() as u64) as u32;
                    rest /= p.get() as u64;
                }
                if let Some(v) = found(y) {
                    return Ok(v);
                }
            }
            Ok(IsoVerdict::NotIsomorphic)
        }
        IsoMode::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let mut y = vec![0; n];
                for &c in &free {
                    y[c] = rng.gen_range(0..p.get());
                }
                if let Some(v) = found(y) {
                    return Ok(v);
                }
            }
            Ok(IsoVerdict::PossiblyDistinct)
        }
    }
}

/// Whether some generator `y` of `a2` makes `x1 ↦ y` an isomorphism.
pub fn is_isomorphic_one_generated(
    a1: &PreLieAlgebra,
    x1: &FpVector,
    a2: &PreLieAlgebra,
    mode: IsoMode,
) -> Result<IsoVerdict> {
    if a1.modulus() != a2.modulus() || a1.dim() != a2.dim() {
        return Err(Error::input("algebras over different spaces"));
    }
    x1.ensure_in(a1.modulus(), a1.dim())?;
    let src = Prepared::new(a1, x1.coords())?;
    // a2 must be one-generated for any image to exist; its first basis
    // vector is only used to build invariants, so fall back to them failing.
    let gen2 = (0..a2.dim())
        .map(|i| FpVector::unit(a2.modulus(), a2.dim(), i))
        .chain(std::iter::once(x1.clone()))
        .find_map(|g| Prepared::new(a2, g.coords()).ok());
    match gen2 {
        Some(dst) => search(&src, &dst, mode),
        None => Ok(IsoVerdict::NotIsomorphic),
    }
}

/// Fills `iso_class` / `iso_rep` of records of one family, in order. Returns
/// the number of classes.
pub fn assign_iso_classes(records: &mut [ClassificationRecord], mode: IsoMode) -> Result<usize> {
    let prepared: Vec<Prepared> = records
        .iter()
        .map(|r| Prepared::new(&r.algebra, &unit(r.algebra.dim(), 0)))
        .collect::<Result<_>>()?;
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..records.len() {
        let mut class = None;
        for (c, &r) in reps.iter().enumerate() {
            if search(&prepared[r], &prepared[i], mode)?.is_isomorphic() {
                class = Some(c);
                break;
            }
        }
        let class = class.unwrap_or_else(|| {
            reps.push(i);
            reps.len() - 1
        });
        records[i].iso_class = Some(class);
        records[i].iso_rep = reps[class] == i;
    }
    Ok(reps.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySelection {
    One(Family),
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub families: FamilySelection,
    pub iso: IsoMode,
    /// Sampled triples for each flow brace's axiom and linearity checks.
    pub brace_samples: usize,
    /// Sampled pairs for the bilinearity check of each round trip.
    pub conversion_samples: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            families: FamilySelection::All,
            iso: IsoMode::default(),
            brace_samples: 10_000,
            conversion_samples: 200,
            seed: 0x5EED,
        }
    }
}

/// Checks run on the flow brace of each record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraceChecks {
    pub axioms: AxiomCheck,
    pub linearity: AxiomCheck,
    pub right_index: Option<usize>,
    pub strong_index: Option<usize>,
    pub algebra_index: Option<usize>,
    pub cardinality: u128,
    pub generated_by_x: bool,
    pub roundtrip_exact: bool,
    /// `A^3·A^2 = 0`, `A^4·A = A·A^4 = 0` and `x²·(x·x²) = 0`; A6 only.
    pub top_relations: Option<bool>,
}

impl BraceChecks {
    pub fn all_pass(&self, p: Prime) -> bool {
        self.axioms.is_pass()
            && self.linearity.is_pass()
            && self.right_index.is_some()
            && matches!(self.strong_index, Some(k) if k <= 6)
            && self.strong_index == self.algebra_index
            && self.cardinality == (p.get() as u128).pow(4)
            && self.generated_by_x
            && self.roundtrip_exact
            && self.top_relations != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub record: ClassificationRecord,
    pub checks: BraceChecks,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    pub p: Prime,
    pub families: Vec<FamilySummary>,
    pub entries: Vec<CatalogEntry>,
    pub warnings: Vec<String>,
}

impl Catalog {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.checks.all_pass(self.p))
    }
}

/// `A^3·A^2`, `A^4·A`, `A·A^4` and `x²·(x·x²)` all vanish.
pub fn top_relations_hold(alg: &PreLieAlgebra) -> bool {
    let (p, n) = (alg.modulus(), alg.dim());
    let chain = alg.power_chain();
    let zero = FpSubspace::zero(p, n);
    let lvl = |i: usize| chain.level(i).cloned().unwrap_or(zero.clone());
    let c = alg.constants();
    let x = unit(n, 0);
    let sq = alg.mul_raw(&x, &x);
    let x_sq = alg.mul_raw(&x, &sq);
    c.product_space(&lvl(3), &lvl(2)).is_zero()
        && c.product_space(&lvl(4), &lvl(1)).is_zero()
        && c.product_space(&lvl(1), &lvl(4)).is_zero()
        && alg.mul_raw(&sq, &x_sq).iter().all(|&v| v == 0)
}

fn check_record(rec: &ClassificationRecord, opts: &ClassifyOptions) -> Result<BraceChecks> {
    let alg = &rec.algebra;
    let p = alg.modulus();
    let brace: Brace = prelie_to_brace(alg)?;
    let span = SpanOptions::default();
    let sampled = CheckMode::Sampled {
        count: opts.brace_samples,
        seed: opts.seed,
    };
    let axioms = brace.check_axioms(sampled)?;
    let linearity = brace.check_fp_linearity(sampled)?;
    let right = brace.chain(ChainKind::Right, &span)?;
    let strong = brace.chain(ChainKind::Strong, &span)?;
    let generated = brace.generated_subbrace(&FpVector::unit(p, 4, 0), &span)?;
    let conv = brace_to_prelie(
        &brace,
        &ConversionOptions {
            samples: opts.conversion_samples,
            seed: opts.seed,
            ..ConversionOptions::default()
        },
    )?;
    Ok(BraceChecks {
        axioms,
        linearity,
        right_index: right.index.filter(|_| right.exact),
        strong_index: strong.index.filter(|_| strong.exact),
        algebra_index: alg.nilpotency_index(),
        cardinality: brace.order(),
        generated_by_x: generated.is_full(),
        roundtrip_exact: conv.algebra.constants() == alg.constants(),
        top_relations: (rec.family == Family::A6).then(|| top_relations_hold(alg)),
    })
}

/// Builds the requested families, sorts them into isomorphism classes and
/// checks the flow brace of every distinct table.
pub fn classify(p: Prime, opts: &ClassifyOptions) -> Result<Catalog> {
    let mut warnings = Vec::new();
    let families = match opts.families {
        FamilySelection::All => {
            if p.get() <= 64 {
                return Err(Error::precondition(format!(
                    "the full catalog needs p > 64, got p = {p}"
                )));
            }
            vec![Family::A6, Family::A5, Family::A4]
        }
        FamilySelection::One(f) => {
            check_tier(p, f)?;
            if p.get() <= 64 {
                warnings.push(format!(
                    "p = {p} is below the full-catalog bound p > 64; family {f} alone is within its own bound p > {}",
                    f.min_prime_exclusive()
                ));
            }
            vec![f]
        }
    };
    let mut summaries = Vec::new();
    let mut records = Vec::new();
    for f in families {
        let mut report = match f {
            Family::A6 => build_family_a6(p)?,
            Family::A5 => build_family_a5(p)?,
            Family::A4 => build_family_a4(p)?,
        };
        let classes = assign_iso_classes(&mut report.records, opts.iso)?;
        report.summary.iso_classes = Some(classes);
        summaries.push(report.summary);
        records.extend(report.records);
    }
    let entries = records
        .into_par_iter()
        .map(|record| {
            let checks = check_record(&record, opts)?;
            Ok(CatalogEntry { record, checks })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Catalog {
        p,
        families: summaries,
        entries,
        warnings,
    })
}
