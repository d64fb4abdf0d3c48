//! Ideals of finite left braces, their left and right nilpotency, sums of
//! left nilpotent ideals, and the left nilpotent and Wedderburn radicals.
//!
//! An ideal is an additive subgroup `I` with `λ_a(I) ⊆ I` for all `a` and
//! `a ∘ I ∘ a⁻¹ ⊆ I`, where `λ_a(b) = a * b + b`.
//!
//! The additive group may be a product of elementary abelian groups for
//! distinct primes (so order 6 works as `Z_2 × Z_3`). Every subgroup of such
//! a group is the product of its parts, one subspace per prime.

use std::fmt;

use crate::brace::Brace;
use crate::error::{Error, Result};
use crate::fpcore::{enumerate_subspaces, format_raw, FpSubspace, Prime, DEFAULT_SUBSPACE_CAP};

/// Additive group `⊕_q F_q^{n_q}` over distinct primes, as flat coordinates
/// with the blocks in the given order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupShape {
    blocks: Vec<(Prime, usize)>,
}

impl GroupShape {
    pub fn new(blocks: Vec<(Prime, usize)>) -> Result<Self> {
        for (i, (q, _)) in blocks.iter().enumerate() {
            if blocks[..i].iter().any(|(r, _)| r == q) {
                return Err(Error::input(format!(
                    "prime {q} appears twice; additive groups must be products of elementary abelian groups for distinct primes"
                )));
            }
        }
        Ok(GroupShape { blocks })
    }

    pub fn elementary(p: Prime, n: usize) -> Self {
        GroupShape { blocks: vec![(p, n)] }
    }

    pub fn blocks(&self) -> &[(Prime, usize)] {
        &self.blocks
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }

    pub fn order(&self) -> u128 {
        self.blocks.iter().fold(1u128, |acc, &(q, n)| {
            acc.saturating_mul((q.get() as u128).saturating_pow(n as u32))
        })
    }

    fn radices(&self) -> impl Iterator<Item = Prime> + '_ {
        self.blocks.iter().flat_map(|&(q, n)| std::iter::repeat_n(q, n))
    }

    /// Mixed-radix rank, least significant coordinate first.
    pub fn rank(&self, v: &[u32]) -> u64 {
        let mut r = 0u64;
        let mut scale = 1u64;
        for (&c, q) in v.iter().zip(self.radices()) {
            r += c as u64 * scale;
            scale *= q.get() as u64;
        }
        r
    }

    pub fn unrank(&self, mut r: u64) -> Vec<u32> {
        self.radices()
            .map(|q| {
                let c = (r % q.get() as u64) as u32;
                r /= q.get() as u64;
                c
            })
            .collect()
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter()
            .zip(b)
            .zip(self.radices())
            .map(|((&x, &y), q)| q.add(x, y))
            .collect()
    }

    pub fn neg(&self, a: &[u32]) -> Vec<u32> {
        a.iter().zip(self.radices()).map(|(&x, q)| q.neg(x)).collect()
    }

    pub fn zero(&self) -> Vec<u32> {
        vec![0; self.total_dim()]
    }

    fn split<'a>(&self, v: &'a [u32]) -> Vec<&'a [u32]> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut off = 0;
        for &(_, n) in &self.blocks {
            out.push(&v[off..off + n]);
            off += n;
        }
        out
    }

    fn embed(&self, block: usize, part: &[u32]) -> Vec<u32> {
        let mut v = self.zero();
        let off: usize = self.blocks[..block].iter().map(|b| b.1).sum();
        v[off..off + part.len()].copy_from_slice(part);
        v
    }

    pub fn elements(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.order() as u64).map(move |r| self.unrank(r))
    }
}

impl fmt::Display for GroupShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|(q, n)| format!("F_{q}^{n}")).collect();
        f.write_str(&parts.join(" × "))
    }
}

/// Additive subgroup: one subspace per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subgroup {
    parts: Vec<FpSubspace>,
}

impl Subgroup {
    pub fn zero(shape: &GroupShape) -> Self {
        Subgroup {
            parts: shape.blocks.iter().map(|&(q, n)| FpSubspace::zero(q, n)).collect(),
        }
    }

    pub fn full(shape: &GroupShape) -> Self {
        Subgroup {
            parts: shape.blocks.iter().map(|&(q, n)| FpSubspace::full(q, n)).collect(),
        }
    }

    pub fn from_subspace(s: FpSubspace) -> Self {
        Subgroup { parts: vec![s] }
    }

    pub fn from_parts(parts: Vec<FpSubspace>) -> Self {
        Subgroup { parts }
    }

    pub fn parts(&self) -> &[FpSubspace] {
        &self.parts
    }

    /// The single part of a subgroup of an elementary abelian group.
    pub fn as_subspace(&self) -> Option<&FpSubspace> {
        match self.parts.as_slice() {
            [s] => Some(s),
            _ => None,
        }
    }

    pub fn order(&self) -> u128 {
        self.parts
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.cardinality()))
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(FpSubspace::is_zero)
    }

    fn shape(&self) -> GroupShape {
        GroupShape {
            blocks: self.parts.iter().map(|s| (s.modulus(), s.ambient_dim())).collect(),
        }
    }

    /// Adds the cyclic subgroup of `v`; by coprimality it is the product of
    /// the cyclic subgroups of the components.
    pub fn insert(&mut self, v: &[u32]) -> bool {
        let shape = self.shape();
        let mut grew = false;
        for (part, comp) in self.parts.iter_mut().zip(shape.split(v)) {
            grew |= part.insert_raw(comp);
        }
        grew
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let shape = self.shape();
        self.parts
            .iter()
            .zip(shape.split(v))
            .all(|(part, comp)| part.contains_raw(comp))
    }

    pub fn sum(&self, other: &Subgroup) -> Subgroup {
        let mut out = self.clone();
        for g in other.generators() {
            out.insert(&g);
        }
        out
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.generators().iter().all(|g| other.contains(g))
    }

    /// Basis vectors of the parts, embedded in the flat coordinates.
    pub fn generators(&self) -> Vec<Vec<u32>> {
        let shape = self.shape();
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.basis_raw().iter().map(|b| shape.embed(i, b)).collect::<Vec<_>>())
            .collect()
    }

    pub fn elements(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for part in &self.parts {
            let elems: Vec<Vec<u32>> = part.elements().collect();
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    elems.iter().map(move |e| {
                        let mut v = prefix.clone();
                        v.extend_from_slice(e);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators().iter().map(|g| format_raw(g)).collect();
        write!(f, "⟨{}⟩ (order {})", gens.join(", "), self.order())
    }
}

/// A finite left brace on a product of elementary abelian groups.
pub trait LeftBrace {
    fn shape(&self) -> GroupShape;
    fn star(&self, a: &[u32], b: &[u32]) -> Vec<u32>;
    /// Solves `a ∘ x = 0`.
    fn inverse(&self, a: &[u32]) -> Result<Vec<u32>>;

    fn circ(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let s = self.shape();
        s.add(&s.add(a, b), &self.star(a, b))
    }

    fn lambda(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        self.shape().add(&self.star(a, b), b)
    }
}

impl LeftBrace for Brace {
    fn shape(&self) -> GroupShape {
        GroupShape::elementary(self.modulus(), self.dim())
    }

    fn star(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        self.star_raw(a, b)
    }

    fn inverse(&self, a: &[u32]) -> Result<Vec<u32>> {
        self.inverse_raw(a)
    }
}

/// Dense star table over a mixed additive group, e.g. `Z_2 × Z_3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedTableBrace {
    shape: GroupShape,
    star: Vec<u32>,
    inverses: Vec<Option<u32>>,
}

impl MixedTableBrace {
    /// `blocks` are `(prime, dim)` pairs; `rows[rank(a)][rank(b)] = rank(a * b)`.
    pub fn from_table(blocks: &[(u64, usize)], rows: &[Vec<u64>]) -> Result<Self> {
        let blocks = blocks
            .iter()
            .map(|&(q, n)| Ok((Prime::new(q)?, n)))
            .collect::<Result<Vec<_>>>()?;
        let shape = GroupShape::new(blocks)?;
        let order = shape.order();
        if order > crate::brace::MAX_TABLE_ORDER as u128 {
            return Err(Error::input(format!("table backend needs order ≤ 4096, got {order}")));
        }
        let size = order as usize;
        if rows.len() != size || rows.iter().any(|r| r.len() != size) {
            return Err(Error::input(format!("star table must be {size} × {size}")));
        }
        let mut star = Vec::with_capacity(size * size);
        for row in rows {
            for &r in row {
                if r >= size as u64 {
                    return Err(Error::input(format!("star table entry {r} is out of range 0..{size}")));
                }
                star.push(r as u32);
            }
        }
        let mut b = MixedTableBrace {
            shape,
            star,
            inverses: Vec::new(),
        };
        let elems: Vec<Vec<u32>> = b.shape.elements().collect();
        let zero = b.shape.zero();
        b.inverses = elems
            .iter()
            .map(|a| elems.iter().position(|x| b.circ(a, x) == zero).map(|x| x as u32))
            .collect();
        Ok(b)
    }

    pub fn order(&self) -> u128 {
        self.shape.order()
    }

    pub fn star_ranks(&self) -> &[u32] {
        &self.star
    }
}

impl LeftBrace for MixedTableBrace {
    fn shape(&self) -> GroupShape {
        self.shape.clone()
    }

    fn star(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let size = self.order() as usize;
        let r = self.star[self.shape.rank(a) as usize * size + self.shape.rank(b) as usize];
        self.shape.unrank(r as u64)
    }

    fn inverse(&self, a: &[u32]) -> Result<Vec<u32>> {
        self.inverses[self.shape.rank(a) as usize]
            .map(|r| self.shape.unrank(r as u64))
            .ok_or_else(|| Error::precondition(format!("{} has no ∘-inverse", format_raw(a))))
    }
}

/// Exhaustive check of the brace law, ∘-associativity, the identity and
/// inverses; returns the first failure as text.
pub fn check_axioms_exhaustive<B: LeftBrace>(b: &B) -> Result<Option<String>> {
    let shape = b.shape();
    let order = shape.order();
    if order.saturating_pow(3) > crate::brace::EXHAUSTIVE_TRIPLE_CAP {
        return Err(Error::resource(
            "exhaustive brace-axiom check (triples)",
            order.saturating_pow(3),
            crate::brace::EXHAUSTIVE_TRIPLE_CAP,
        ));
    }
    let elems: Vec<Vec<u32>> = shape.elements().collect();
    let zero = shape.zero();
    for a in &elems {
        if b.circ(&zero, a) != *a || b.circ(a, &zero) != *a {
            return Ok(Some(format!("0 is not the ∘-identity at {}", format_raw(a))));
        }
        match b.inverse(a) {
            Ok(x) if b.circ(&x, a) == zero => {}
            _ => return Ok(Some(format!("no two-sided ∘-inverse of {}", format_raw(a)))),
        }
    }
    for a in &elems {
        for x in &elems {
            let ax = b.circ(a, x);
            for c in &elems {
                let lhs = shape.add(&b.circ(a, &shape.add(x, c)), a);
                if lhs != shape.add(&ax, &b.circ(a, c)) {
                    return Ok(Some(format!(
                        "brace law fails at {} {} {}",
                        format_raw(a),
                        format_raw(x),
                        format_raw(c)
                    )));
                }
                if b.circ(&ax, c) != b.circ(a, &b.circ(x, c)) {
                    return Ok(Some(format!(
                        "∘ is not associative at {} {} {}",
                        format_raw(a),
                        format_raw(x),
                        format_raw(c)
                    )));
                }
            }
        }
    }
    Ok(None)
}

fn ensure_within(what: &str, needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        return Err(Error::resource(what, needed, cap));
    }
    Ok(())
}

/// `span{x * y : x ∈ X, y ∈ Y}`, over every element of `X` and generators
/// of `Y` (the star is right additive).
pub fn star_span<B: LeftBrace>(b: &B, x: &Subgroup, y: &Subgroup, cap: u128) -> Result<Subgroup> {
    ensure_within("elements of a left star argument", x.order(), cap)?;
    let shape = b.shape();
    let mut out = Subgroup::zero(&shape);
    let gens = y.generators();
    if gens.is_empty() {
        return Ok(out);
    }
    for a in x.elements() {
        for g in &gens {
            out.insert(&b.star(&a, g));
        }
    }
    Ok(out)
}

/// `span{x * c : x ∈ X}`
pub fn star_set<B: LeftBrace>(b: &B, x: &Subgroup, c: &[u32], cap: u128) -> Result<Subgroup> {
    ensure_within("elements of a left star argument", x.order(), cap)?;
    let mut out = Subgroup::zero(&b.shape());
    for a in x.elements() {
        out.insert(&b.star(&a, c));
    }
    Ok(out)
}

pub fn is_ideal<B: LeftBrace>(b: &B, ideal: &Subgroup, cap: u128) -> Result<bool> {
    let shape = b.shape();
    ensure_within("brace elements for an ideal check", shape.order(), cap)?;
    let all: Vec<Vec<u32>> = shape.elements().collect();
    let gens = ideal.generators();
    for a in &all {
        if gens.iter().any(|g| !ideal.contains(&b.lambda(a, g))) {
            return Ok(false);
        }
    }
    let members = ideal.elements();
    for a in &all {
        let inv = b.inverse(a)?;
        for x in &members {
            if !ideal.contains(&b.circ(&b.circ(a, x), &inv)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealChain {
    pub chain: Vec<Subgroup>,
    /// Smallest `i` with `chain[i-1] = 0`.
    pub index: Option<usize>,
}

impl IdealChain {
    pub fn is_nilpotent(&self) -> bool {
        self.index.is_some()
    }
}

/// `I^{i+1} = I * I^i` (`right = false`) or `I^{(i+1)} = I^{(i)} * I`.
/// Each level depends only on the previous one, so a repeat is final.
fn ideal_chain<B: LeftBrace>(b: &B, ideal: &Subgroup, right: bool, cap: u128) -> Result<IdealChain> {
    let mut chain = vec![ideal.clone()];
    loop {
        let last = chain.last().expect("nonempty");
        if last.is_zero() {
            return Ok(IdealChain {
                index: Some(chain.len()),
                chain,
            });
        }
        let next = if right {
            star_span(b, last, ideal, cap)?
        } else {
            star_span(b, ideal, last, cap)?
        };
        if &next == last {
            return Ok(IdealChain { chain, index: None });
        }
        chain.push(next);
    }
}

pub fn left_chain<B: LeftBrace>(b: &B, ideal: &Subgroup, cap: u128) -> Result<IdealChain> {
    ideal_chain(b, ideal, false, cap)
}

pub fn right_chain<B: LeftBrace>(b: &B, ideal: &Subgroup, cap: u128) -> Result<IdealChain> {
    ideal_chain(b, ideal, true, cap)
}

pub fn is_left_nilpotent_ideal<B: LeftBrace>(b: &B, ideal: &Subgroup, cap: u128) -> Result<bool> {
    Ok(is_ideal(b, ideal, cap)? && left_chain(b, ideal, cap)?.is_nilpotent())
}

/// Every additive subgroup, block by block in subspace enumeration order.
pub fn enumerate_subgroups(shape: &GroupShape) -> Result<Vec<Subgroup>> {
    let mut out: Vec<Vec<FpSubspace>> = vec![Vec::new()];
    for &(q, n) in shape.blocks() {
        let subs: Vec<FpSubspace> = enumerate_subspaces(q, n, DEFAULT_SUBSPACE_CAP)?.collect();
        let total = (out.len() as u128).saturating_mul(subs.len() as u128);
        ensure_within("additive subgroups", total, DEFAULT_SUBSPACE_CAP)?;
        out = out
            .into_iter()
            .flat_map(|prefix| {
                subs.iter().map(move |s| {
                    let mut v = prefix.clone();
                    v.push(s.clone());
                    v
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(Subgroup::from_parts).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealInfo {
    pub ideal: Subgroup,
    pub left: IdealChain,
    pub right: IdealChain,
}

/// All ideals with their left and right chains.
pub fn ideals<B: LeftBrace>(b: &B, cap: u128) -> Result<Vec<IdealInfo>> {
    let mut out = Vec::new();
    for s in enumerate_subgroups(&b.shape())? {
        if is_ideal(b, &s, cap)? {
            out.push(IdealInfo {
                left: left_chain(b, &s, cap)?,
                right: right_chain(b, &s, cap)?,
                ideal: s,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumCheck {
    pub sum: Subgroup,
    pub is_ideal: bool,
    pub left_nilpotent: bool,
}

impl SumCheck {
    pub fn holds(&self) -> bool {
        self.is_ideal && self.left_nilpotent
    }
}

/// `I + J`, re-checked to be a left nilpotent ideal.
pub fn ideal_sum<B: LeftBrace>(b: &B, i: &Subgroup, j: &Subgroup, cap: u128) -> Result<SumCheck> {
    let sum = i.sum(j);
    Ok(SumCheck {
        is_ideal: is_ideal(b, &sum, cap)?,
        left_nilpotent: left_chain(b, &sum, cap)?.is_nilpotent(),
        sum,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InclusionCheck {
    /// `(I+J)*c ⊆ I*c + J*c + I*(J*c)`
    pub sum_inclusion: bool,
    /// `I*(J*c) ⊆ I*c + I*(-c) + I*(I*c) + J*(I*c) + I*(J*(I*c))
    ///           + I*(I*(-c)) + J*(I*(-c)) + I*(J*(I*(-c)))`
    pub nested_inclusion: bool,
}

impl InclusionCheck {
    pub fn holds(self) -> bool {
        self.sum_inclusion && self.nested_inclusion
    }
}

/// Both inclusions, with every star set replaced by its span.
pub fn star_inclusion_checks<B: LeftBrace>(
    b: &B,
    i: &Subgroup,
    j: &Subgroup,
    c: &[u32],
    cap: u128,
) -> Result<InclusionCheck> {
    let shape = b.shape();
    let neg_c = shape.neg(c);
    let ic = star_set(b, i, c, cap)?;
    let jc = star_set(b, j, c, cap)?;
    let i_neg = star_set(b, i, &neg_c, cap)?;
    let nest = |x: &Subgroup, y: &Subgroup| star_span(b, x, y, cap);

    let lhs1 = star_set(b, &i.sum(j), c, cap)?;
    let rhs1 = ic.sum(&jc).sum(&nest(i, &jc)?);

    let lhs2 = nest(i, &jc)?;
    let i_ic = nest(i, &ic)?;
    let j_ic = nest(j, &ic)?;
    let i_j_ic = nest(i, &j_ic)?;
    let i_ineg = nest(i, &i_neg)?;
    let j_ineg = nest(j, &i_neg)?;
    let i_j_ineg = nest(i, &j_ineg)?;
    let rhs2 = [&i_neg, &i_ic, &j_ic, &i_j_ic, &i_ineg, &j_ineg, &i_j_ineg]
        .into_iter()
        .fold(ic.clone(), |acc, s| acc.sum(s));
    Ok(InclusionCheck {
        sum_inclusion: lhs1.is_subgroup_of(&rhs1),
        nested_inclusion: lhs2.is_subgroup_of(&rhs2),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadicalReport {
    pub radical: Subgroup,
    pub ideals_found: usize,
    /// Ideals that were summed.
    pub summands: Vec<Subgroup>,
    pub radical_is_ideal: bool,
    pub radical_left_nilpotent: bool,
    /// Every left nilpotent ideal lies inside the radical, by brute force.
    pub maximal: bool,
}

impl RadicalReport {
    pub fn holds(&self) -> bool {
        self.radical_is_ideal && self.radical_left_nilpotent && self.maximal
    }
}

fn radical_from<B: LeftBrace>(
    b: &B,
    infos: &[IdealInfo],
    keep: impl Fn(&IdealInfo) -> bool,
    cap: u128,
) -> Result<RadicalReport> {
    let shape = b.shape();
    let summands: Vec<Subgroup> = infos.iter().filter(|i| keep(i)).map(|i| i.ideal.clone()).collect();
    let radical = summands.iter().fold(Subgroup::zero(&shape), |acc, s| acc.sum(s));
    let maximal = infos
        .iter()
        .filter(|i| i.left.is_nilpotent())
        .all(|i| i.ideal.is_subgroup_of(&radical) || !keep(i));
    Ok(RadicalReport {
        radical_is_ideal: is_ideal(b, &radical, cap)?,
        radical_left_nilpotent: left_chain(b, &radical, cap)?.is_nilpotent(),
        ideals_found: infos.len(),
        summands,
        maximal,
        radical,
    })
}

/// Sum of all left nilpotent ideals.
pub fn left_nilpotent_radical<B: LeftBrace>(b: &B, cap: u128) -> Result<RadicalReport> {
    let infos = ideals(b, cap)?;
    left_nilpotent_radical_of(b, &infos, cap)
}

pub fn left_nilpotent_radical_of<B: LeftBrace>(b: &B, infos: &[IdealInfo], cap: u128) -> Result<RadicalReport> {
    radical_from(b, infos, |i| i.left.is_nilpotent(), cap)
}

/// Sum of all ideals that are both left and right nilpotent.
pub fn wedderburn_radical<B: LeftBrace>(b: &B, cap: u128) -> Result<RadicalReport> {
    let infos = ideals(b, cap)?;
    wedderburn_radical_of(b, &infos, cap)
}

pub fn wedderburn_radical_of<B: LeftBrace>(b: &B, infos: &[IdealInfo], cap: u128) -> Result<RadicalReport> {
    radical_from(b, infos, |i| i.left.is_nilpotent() && i.right.is_nilpotent(), cap)
}

/// The order-6 brace on `Z_6 = Z_2 × Z_3` with `a ∘ b = a + (-1)^a b`; its
/// multiplicative group is the symmetric group on three letters. Elements
/// are `(a mod 2, a mod 3)`.
pub fn order_six_brace() -> MixedTableBrace {
    let shape = GroupShape::new(vec![
        (Prime::new(2).expect("prime"), 1),
        (Prime::new(3).expect("prime"), 1),
    ])
    .expect("distinct primes");
    let rows: Vec<Vec<u64>> = (0..6)
        .map(|ra| {
            let a = shape.unrank(ra);
            (0..6)
                .map(|rb| {
                    let b = shape.unrank(rb);
                    // a * b = -2b for odd a: zero mod 2, b mod 3
                    let s = if a[0] == 1 { vec![0, b[1]] } else { vec![0, 0] };
                    shape.rank(&s)
                })
                .collect()
        })
        .collect();
    MixedTableBrace::from_table(&[(2, 1), (3, 1)], &rows).expect("valid table")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brace::CheckMode;
    use crate::fpcore::FpVector;
    use crate::prelie::{truncated_polynomial_constants, StructureConstants};

    const CAP: u128 = 100_000;

    fn f(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn ring_t(p: u64, m: usize) -> Brace {
        Brace::from_ring(truncated_polynomial_constants(f(p), m)).unwrap()
    }

    fn line(p: u64, n: usize, v: &[i64]) -> Subgroup {
        Subgroup::from_subspace(FpSubspace::span(f(p), n, &[FpVector::new(f(p), v.iter().copied())]).unwrap())
    }

    #[test]
    fn zero_and_whole_are_ideals() {
        for b in [Brace::trivial(f(3), 2), ring_t(2, 4), ring_t(3, 3)] {
            let shape = b.shape();
            assert!(is_ideal(&b, &Subgroup::zero(&shape), CAP).unwrap());
            assert!(is_ideal(&b, &Subgroup::full(&shape), CAP).unwrap());
            let z = left_chain(&b, &Subgroup::zero(&shape), CAP).unwrap();
            assert_eq!(z.index, Some(1));
            // every brace of prime power order is left nilpotent
            assert!(left_chain(&b, &Subgroup::full(&shape), CAP).unwrap().is_nilpotent());
        }
    }

    #[test]
    fn square_line_is_ideal_in_truncated_ring() {
        let b = ring_t(5, 3);
        assert!(is_ideal(&b, &line(5, 2, &[0, 1]), CAP).unwrap());
        // span{t} is not λ-invariant: λ_t(t) = t + t²
        assert!(!is_ideal(&b, &line(5, 2, &[1, 0]), CAP).unwrap());
        let s = ideal_sum(&b, &line(5, 2, &[0, 1]), &line(5, 2, &[0, 1]), CAP).unwrap();
        assert!(s.holds());
        assert_eq!(s.sum, line(5, 2, &[0, 1]));
        assert!(s.sum.is_subgroup_of(&Subgroup::full(&b.shape())) && s.sum != Subgroup::full(&b.shape()));
    }

    #[test]
    fn sum_with_zero_and_itself() {
        let b = ring_t(2, 4);
        let shape = b.shape();
        for info in ideals(&b, CAP).unwrap() {
            assert_eq!(info.ideal.sum(&Subgroup::zero(&shape)), info.ideal);
            assert_eq!(info.ideal.sum(&info.ideal), info.ideal);
        }
    }

    #[test]
    fn order_six_brace_radicals() {
        let b = order_six_brace();
        assert_eq!(check_axioms_exhaustive(&b).unwrap(), None);
        let shape = b.shape();
        let infos = ideals(&b, CAP).unwrap();
        let orders: Vec<u128> = infos.iter().map(|i| i.ideal.order()).collect();
        assert_eq!(orders, vec![1, 3, 6]);
        let whole = Subgroup::full(&shape);
        assert!(!left_chain(&b, &whole, CAP).unwrap().is_nilpotent());
        // {0,3} is λ-invariant but not normal in the symmetric group
        let two = Subgroup::from_parts(vec![FpSubspace::full(f(2), 1), FpSubspace::zero(f(3), 1)]);
        assert!(!is_ideal(&b, &two, CAP).unwrap());
        let rad = left_nilpotent_radical(&b, CAP).unwrap();
        assert!(rad.holds());
        let three = Subgroup::from_parts(vec![FpSubspace::zero(f(2), 1), FpSubspace::full(f(3), 1)]);
        assert_eq!(rad.radical, three);
        let w = wedderburn_radical(&b, CAP).unwrap();
        assert!(w.radical.is_subgroup_of(&rad.radical));
    }

    #[test]
    fn trivial_and_nilpotent_ring_radicals_are_whole() {
        let upper = {
            // strictly upper triangular 3x3 over F_2: E12, E13, E23
            let mut c = StructureConstants::zero(f(2), 3);
            c.set_product(0, 2, &[0, 1, 0]);
            Brace::from_ring(c).unwrap()
        };
        for b in [Brace::trivial(f(2), 2), ring_t(2, 3), ring_t(3, 3), upper] {
            let full = Subgroup::full(&b.shape());
            let rad = left_nilpotent_radical(&b, CAP).unwrap();
            assert!(rad.holds());
            assert_eq!(rad.radical, full);
            let w = wedderburn_radical(&b, CAP).unwrap();
            assert_eq!(w.radical, full);
        }
    }

    #[test]
    fn inclusions_hold_on_ring_brace() {
        let b = ring_t(2, 4);
        let full = Subgroup::full(&b.shape());
        for c in b.shape().elements() {
            assert!(star_inclusion_checks(&b, &full, &full, &c, CAP).unwrap().holds());
        }
        let triv = Brace::trivial(f(3), 2);
        let tf = Subgroup::full(&triv.shape());
        assert!(star_inclusion_checks(&triv, &tf, &tf, &[1, 2], CAP).unwrap().holds());
    }

    #[test]
    fn corrupted_mixed_table_fails_axioms() {
        let b = order_six_brace();
        let size = 6;
        let mut rows: Vec<Vec<u64>> = (0..size)
            .map(|a| (0..size).map(|c| b.star_ranks()[a * size + c] as u64).collect())
            .collect();
        rows[1][2] = (rows[1][2] + 1) % 6;
        let bad = MixedTableBrace::from_table(&[(2, 1), (3, 1)], &rows).unwrap();
        assert!(check_axioms_exhaustive(&bad).unwrap().is_some());
    }

    #[test]
    fn repeated_primes_rejected() {
        assert!(MixedTableBrace::from_table(&[(2, 1), (2, 1)], &vec![vec![0; 4]; 4]).is_err());
    }

    mod props {
        use super::*;
        use crate::brace::SpanOptions;
        use crate::classify_p4::family_a4_constants;
        use crate::correspondence::prelie_to_brace;
        use crate::prelie::ChainKind;
        use proptest::prelude::*;
        use std::sync::OnceLock;

        /// Flow brace of the index-4 family at p = 5 (order 625) with its
        /// second strong level.
        fn a4_at_five() -> &'static (Brace, Subgroup) {
            static B: OnceLock<(Brace, Subgroup)> = OnceLock::new();
            B.get_or_init(|| {
                let alg = crate::prelie::PreLieAlgebra::new(family_a4_constants(f(5)));
                let b = prelie_to_brace(&alg).unwrap();
                let strong = b.chain(ChainKind::Strong, &SpanOptions::default()).unwrap();
                let second = Subgroup::from_subspace(strong.level(2).unwrap().clone());
                (b, second)
            })
        }

        proptest! {
            #[test]
            fn rank_roundtrip(r in 0u64..(4 * 27 * 5)) {
                let shape = GroupShape::new(vec![(f(2), 2), (f(3), 3), (f(5), 1)]).unwrap();
                prop_assert_eq!(shape.rank(&shape.unrank(r)), r);
            }

            #[test]
            fn subgroup_sum_laws(
                xs in prop::collection::vec(prop::collection::vec(0u32..6, 3), 0..3),
                ys in prop::collection::vec(prop::collection::vec(0u32..6, 3), 0..3),
            ) {
                let shape = GroupShape::new(vec![(f(2), 1), (f(3), 2)]).unwrap();
                let reduce = |v: &Vec<u32>| vec![v[0] % 2, v[1] % 3, v[2] % 3];
                let mut x = Subgroup::zero(&shape);
                for v in &xs { x.insert(&reduce(v)); }
                let mut y = Subgroup::zero(&shape);
                for v in &ys { y.insert(&reduce(v)); }
                let s = x.sum(&y);
                prop_assert_eq!(&s, &y.sum(&x));
                prop_assert!(x.is_subgroup_of(&s) && y.is_subgroup_of(&s));
                prop_assert_eq!(s.elements().len() as u128, s.order());
                prop_assert_eq!(x.sum(&Subgroup::zero(&shape)), x);
            }

            #[test]
            fn inclusions_hold_for_random_c(c in prop::collection::vec(0u32..5, 4)) {
                let (b, second) = a4_at_five();
                let full = Subgroup::full(&b.shape());
                prop_assert!(star_inclusion_checks(b, second, second, &c, CAP).unwrap().holds());
                prop_assert!(star_inclusion_checks(b, &full, second, &c, CAP).unwrap().holds());
            }
        }
    }

    #[test]
    fn fp_brace_agrees_with_its_own_checker() {
        let b = ring_t(3, 3);
        assert!(b.check_axioms(CheckMode::Exhaustive).unwrap().is_pass());
        assert_eq!(check_axioms_exhaustive(&b).unwrap(), None);
    }
}
