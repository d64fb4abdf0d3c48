//! One `[PASS]`/`[FAIL]` line per acceptance criterion. Run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use braceforge::brace::{Brace, CheckMode};
use braceforge::classify_p4::{classify, family_a6_constants, Catalog, ClassifyOptions, Family};
use braceforge::correspondence::{
    brace_to_prelie, geometric_series_sum, prelie_to_brace, roundtrip_report, ConversionOptions, FlowCache,
};
use braceforge::fpcore::{FpVector, Prime};
use braceforge::prelie::{IdentityCheck, PreLieAlgebra, StructureConstants};
use braceforge::radical::{
    ideal_sum, ideals, left_nilpotent_radical_of, order_six_brace, star_inclusion_checks, wedderburn_radical_of,
    LeftBrace, Subgroup,
};
use braceforge::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5EED;
const AC1_BUDGET: Duration = Duration::from_secs(60);
const AC3_PAIRS: usize = 10_000;
const AC4_BUDGET: Duration = Duration::from_secs(1);
const AC5_EXHAUSTIVE_LIMIT: u128 = 10_000;
const AC6_TRIPLES: usize = 1_000;
const AC8_BUDGET: Duration = Duration::from_secs(30 * 60);
const AC8_BRACE_SAMPLES: usize = 2_000;
const AC9_BUDGET: Duration = Duration::from_secs(5 * 60);
const ELEMENT_CAP: u128 = 100_000;

fn f(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn verdict(tag: &str, ok: bool, detail: impl AsRef<str>) {
    println!("[{}] {tag} {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
    assert!(ok, "{tag} failed: {}", detail.as_ref());
}

/// Zero algebras of dimension 1 to 4 and truncated polynomial algebras
/// `F_p[t]t/(t^m)`.
fn fixture_algebras() -> Vec<(String, PreLieAlgebra)> {
    let mut out: Vec<(String, PreLieAlgebra)> = (1..=4)
        .map(|n| (format!("zero F_11^{n}"), PreLieAlgebra::zero(f(11), n)))
        .collect();
    for (p, m) in [(11, 3), (17, 4), (37, 5)] {
        out.push((
            format!("F_{p}[t]t/(t^{m})"),
            PreLieAlgebra::truncated_polynomial(f(p), m),
        ));
    }
    out
}

/// The radical ring `F_p[t]t/(t^m)` as a two-sided brace.
fn ring_brace(p: u64, m: usize) -> Brace {
    let n = m - 1;
    let mut c = StructureConstants::zero(f(p), n);
    for i in 0..n {
        for j in 0..n {
            // t^{i+1} t^{j+1} = t^{i+j+2}
            if i + j + 1 < n {
                let mut v = vec![0; n];
                v[i + j + 1] = 1;
                c.set_product(i, j, &v);
            }
        }
    }
    Brace::from_ring(c).unwrap()
}

fn catalog() -> &'static (Catalog, Duration) {
    static CATALOG: OnceLock<(Catalog, Duration)> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let start = Instant::now();
        let cat = classify(
            f(67),
            &ClassifyOptions {
                brace_samples: AC8_BRACE_SAMPLES,
                ..ClassifyOptions::default()
            },
        )
        .expect("classification at p = 67");
        (cat, start.elapsed())
    })
}

fn fixture_braces() -> Vec<(String, Brace)> {
    let mut out: Vec<(String, Brace)> = fixture_algebras()
        .into_iter()
        .map(|(name, a)| (format!("flows of {name}"), prelie_to_brace(&a).unwrap()))
        .collect();
    for (p, m) in [(11, 3), (17, 4), (37, 5)] {
        out.push((format!("ring F_{p}[t]t/(t^{m})"), ring_brace(p, m)));
    }
    out
}

#[test]
fn ac1_roundtrip_exact() {
    let start = Instant::now();
    let opts = ConversionOptions::default();
    let mut checked = 0;
    let mut bad = Vec::new();
    for (name, a) in fixture_algebras() {
        checked += 1;
        if !roundtrip_report(&a, &opts).unwrap().constants_match {
            bad.push(name);
        }
    }
    let fixtures_time = start.elapsed();
    let (cat, _) = catalog();
    let start = Instant::now();
    let light = ConversionOptions { samples: 50, ..opts };
    for e in &cat.entries {
        checked += 1;
        if !roundtrip_report(&e.record.algebra, &light).unwrap().constants_match {
            bad.push(format!("{} {:?}", e.record.family, e.record.params));
        }
    }
    let elapsed = fixtures_time + start.elapsed();
    verdict(
        "AC1",
        bad.is_empty() && elapsed < AC1_BUDGET,
        format!(
            "round trip recovers structure constants bit-exactly on {checked} algebras in {:.1?} (budget {AC1_BUDGET:?}); mismatches: {bad:?}",
            elapsed
        ),
    );
}

#[test]
fn ac2_index_preserved() {
    let opts = ConversionOptions::default();
    let mut bad = Vec::new();
    let mut checked = 0;
    for (name, a) in fixture_algebras() {
        let r = roundtrip_report(&a, &opts).unwrap();
        checked += 1;
        if r.prelie_index.is_none() || r.prelie_index != r.brace_strong_index {
            bad.push(format!("{name}: {:?} vs {:?}", r.prelie_index, r.brace_strong_index));
        }
    }
    let (cat, _) = catalog();
    for e in &cat.entries {
        checked += 1;
        if e.checks.algebra_index.is_none() || e.checks.algebra_index != e.checks.strong_index {
            bad.push(format!("{} {:?}", e.record.family, e.record.params));
        }
    }
    verdict(
        "AC2",
        bad.is_empty(),
        format!("pre-Lie index equals exact flow-brace strong index on {checked} algebras; mismatches: {bad:?}"),
    );
}

#[test]
fn ac3_converted_identity_and_left_additivity() {
    let opts = ConversionOptions {
        samples: AC3_PAIRS,
        seed: SEED,
        ..ConversionOptions::default()
    };
    let mut braces = fixture_braces();
    let (cat, _) = catalog();
    for fam in [Family::A6, Family::A5, Family::A4] {
        let e = cat.entries.iter().find(|e| e.record.family == fam).unwrap();
        braces.push((
            format!("flows of first {fam} record"),
            prelie_to_brace(&e.record.algebra).unwrap(),
        ));
    }
    let mut bad = Vec::new();
    for (name, b) in &braces {
        let conv = brace_to_prelie(b, &opts).unwrap();
        let ok = conv.hypothesis_holds
            && conv.identity == IdentityCheck::Pass
            && conv.bilinearity_failure_count == 0
            && conv.bilinearity_checked == AC3_PAIRS;
        if !ok {
            bad.push(name.clone());
        }
    }
    verdict(
        "AC3",
        bad.is_empty(),
        format!(
            "converted algebras satisfy the pre-Lie identity and the summation product is additive on {AC3_PAIRS} seeded pairs, {} braces; failures: {bad:?}",
            braces.len()
        ),
    );
}

#[test]
fn ac4_flows_reproduce_adjoint_group() {
    let p = f(11);
    let alg = PreLieAlgebra::truncated_polynomial(p, 3);
    let start = Instant::now();
    let fc = FlowCache::new(&alg).unwrap();
    let mut mismatches = 0;
    for r in 0..121 {
        for s in 0..121 {
            let a = FpVector::from_rank(p, 2, r);
            let b = FpVector::from_rank(p, 2, s);
            let ab = alg.multiply(&a, &b).unwrap();
            let expected = &(&a + &b) + &ab;
            if fc.flow_circ(&a, &b).unwrap() != expected {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "AC4",
        mismatches == 0 && elapsed < AC4_BUDGET,
        format!(
            "flow product equals a+b+ab on all 121² pairs of F_11[t]t/(t³) in {elapsed:.1?}; mismatches: {mismatches}"
        ),
    );
}

/// Basis `a, a·a, (a·a)·a, a·(a·a)`, all longer products zero.
fn free_index_four(p: Prime) -> PreLieAlgebra {
    let mut c = StructureConstants::zero(p, 4);
    c.set_product(0, 0, &[0, 1, 0, 0]);
    c.set_product(1, 0, &[0, 0, 1, 0]);
    c.set_product(0, 1, &[0, 0, 0, 1]);
    PreLieAlgebra::new(c)
}

#[test]
fn ac5_omega_fidelity() {
    let mut cases = 0u64;
    let mut bad = Vec::new();
    for (name, a) in fixture_algebras() {
        let (p, n) = (a.modulus(), a.dim());
        let order = (p.get() as u128).pow(n as u32);
        if order > AC5_EXHAUSTIVE_LIMIT {
            continue;
        }
        let fc = FlowCache::new(&a).unwrap();
        for r in 0..order as u64 {
            let x = FpVector::from_rank(p, n, r);
            cases += 1;
            if fc.w_map(&fc.omega(&x).unwrap()).unwrap() != x || fc.omega(&fc.w_map(&x).unwrap()).unwrap() != x {
                bad.push(format!("{name} at {x}"));
                break;
            }
        }
    }
    for p in [17u64, 37] {
        let pr = f(p);
        let fc = FlowCache::new(&free_index_four(pr)).unwrap();
        let om = fc.omega(&FpVector::unit(pr, 4, 0)).unwrap();
        // -1/2, 1/4, 1/12 reduced by hand-checkable inverses
        let inv = |d: u32| (1..p as u32).find(|x| (d as u64 * *x as u64) % p == 1).unwrap();
        let expected = [1, p as u32 - inv(2), inv(4), inv(12)];
        if om.coords() != expected {
            bad.push(format!("Ω coefficients at p = {p}: {om} vs {expected:?}"));
        }
    }
    verdict(
        "AC5",
        bad.is_empty(),
        format!("W∘Ω = Ω∘W = id on {cases} elements and Ω(a) = a - ½a·a + ¼(a·a)·a + 1/12 a·(a·a) at p = 17, 37; failures: {bad:?}"),
    );
}

#[test]
fn ac6_expansion_identity() {
    let mut bad = Vec::new();
    let mut cases = 0u64;
    for (name, b) in fixture_braces() {
        let (p, n) = (b.modulus(), b.dim());
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for _ in 0..AC6_TRIPLES {
            let [x, y, z] = [0; 3].map(|_| FpVector::random(p, n, &mut rng));
            cases += 1;
            if !b.expansion_check(&x, &y, &z, n + 2).unwrap().holds() {
                bad.push(format!("{name} at {x} {y} {z}"));
                break;
            }
        }
    }
    let ring = ring_brace(11, 3);
    let p = f(11);
    let elems: Vec<FpVector> = (0..121).map(|r| FpVector::from_rank(p, 2, r)).collect();
    'outer: for x in &elems {
        for y in &elems {
            for z in &elems {
                cases += 1;
                if !ring.expansion_check(x, y, z, 4).unwrap().holds() {
                    bad.push(format!("ring F_11[t]t/(t³) at {x} {y} {z}"));
                    break 'outer;
                }
            }
        }
    }
    verdict(
        "AC6",
        bad.is_empty(),
        format!(
            "(a+b)*c expansion holds on {cases} triples, exhaustive on the 121-element ring brace; failures: {bad:?}"
        ),
    );
}

#[test]
fn ac7_geometric_series() {
    let mut bad = Vec::new();
    for p in [17u64, 37, 67] {
        for j in 2..=6 {
            if geometric_series_sum(f(p), j) != 0 {
                bad.push((p, j));
            }
        }
    }
    // independent oracle: plain integer powers
    for p in [17u64, 37, 67] {
        for j in 2..=6u64 {
            let base = (1..j).fold(1u64, |acc, _| acc * 2 % p);
            let sum = (0..p - 1).fold((0u64, 1u64), |(s, t), _| ((s + t) % p, t * base % p)).0;
            if sum != 0 {
                bad.push((p, j as u32));
            }
        }
    }
    verdict(
        "AC7",
        bad.is_empty(),
        format!("Σ_(i=0)^(p-2) 2^((j-1)i) ≡ 0 for 2 ≤ j ≤ 6, p ∈ {{17, 37, 67}}; failures: {bad:?}"),
    );
}

#[test]
fn ac8_classification() {
    let (cat, elapsed) = catalog();
    let p = cat.p;
    let failing: Vec<_> = cat.entries.iter().filter(|e| !e.checks.all_pass(p)).collect();
    let mut shape_bad = 0;
    for e in &cat.entries {
        let alg = &e.record.algebra;
        let identity = alg.check_identity() == IdentityCheck::Pass;
        let generated = alg.generated_subalgebra(&FpVector::unit(p, 4, 0)).unwrap().is_full();
        let shape_ok = match e.record.family {
            Family::A6 => e.record.chain_dims == [4, 3, 2, 1, 1, 0],
            Family::A5 => e.record.chain_dims.len() == 5 && e.record.chain_dims[4] == 0,
            Family::A4 => e.record.chain_dims.len() == 4 && e.record.chain_dims[3] == 0,
        };
        let relations = e.record.family != Family::A6 || e.checks.top_relations == Some(true);
        if !(identity && generated && shape_ok && relations) {
            shape_bad += 1;
        }
    }
    let counts: Vec<String> = cat
        .families
        .iter()
        .map(|s| {
            format!(
                "{}: {} candidates, {} survivors, {} tables, {:?} classes",
                s.family, s.candidates, s.survivors, s.distinct_tables, s.iso_classes
            )
        })
        .collect();
    verdict(
        "AC8",
        failing.is_empty() && shape_bad == 0 && !cat.entries.is_empty() && *elapsed < AC8_BUDGET,
        format!(
            "classify(67) in {elapsed:.1?}: {} records, {} fail brace checks, {shape_bad} fail identity/generation/shape; {}",
            cat.entries.len(),
            failing.len(),
            counts.join("; ")
        ),
    );
}

/// Returns a description of the first failure.
fn radical_suite<B: LeftBrace>(name: &str, b: &B) -> Option<String> {
    let shape = b.shape();
    let infos = ideals(b, ELEMENT_CAP).unwrap();
    let nilpotent: Vec<&Subgroup> = infos
        .iter()
        .filter(|i| i.left.is_nilpotent())
        .map(|i| &i.ideal)
        .collect();
    let elements: Vec<Vec<u32>> = shape.elements().collect();
    for i in &nilpotent {
        for j in &nilpotent {
            if !ideal_sum(b, i, j, ELEMENT_CAP).unwrap().holds() {
                return Some(format!("{name}: sum {i} + {j}"));
            }
            for c in &elements {
                if !star_inclusion_checks(b, i, j, c, ELEMENT_CAP).unwrap().holds() {
                    return Some(format!("{name}: inclusion at {i}, {j}, {c:?}"));
                }
            }
        }
    }
    let rad = left_nilpotent_radical_of(b, &infos, ELEMENT_CAP).unwrap();
    if !rad.holds() {
        return Some(format!("{name}: radical {rad:?}"));
    }
    // brute-force maximality, independent of the report's own flag
    if nilpotent.iter().any(|i| !i.is_subgroup_of(&rad.radical)) {
        return Some(format!("{name}: a left nilpotent ideal escapes the radical"));
    }
    if rad.radical.sum(&rad.radical) != rad.radical || nilpotent.iter().any(|i| rad.radical.sum(i) != rad.radical) {
        return Some(format!("{name}: radical is not a fixed point of sums"));
    }
    let w = wedderburn_radical_of(b, &infos, ELEMENT_CAP).unwrap();
    if !w.radical.is_subgroup_of(&rad.radical) {
        return Some(format!("{name}: Wedderburn radical not inside left nilpotent radical"));
    }
    None
}

#[test]
fn ac9_radicals() {
    let start = Instant::now();
    let upper = {
        // strictly upper triangular 3×3 over F_2, basis E12, E13, E23
        let mut c = StructureConstants::zero(f(2), 3);
        c.set_product(0, 2, &[0, 1, 0]);
        Brace::from_ring(c).unwrap()
    };
    let braces: Vec<(&str, Brace)> = vec![
        ("trivial F_2^2", Brace::trivial(f(2), 2)),
        ("trivial F_3^2", Brace::trivial(f(3), 2)),
        ("ring F_2[t]t/(t^3)", ring_brace(2, 3)),
        ("ring F_2[t]t/(t^4)", ring_brace(2, 4)),
        ("ring strictly upper triangular 3×3 over F_2", upper),
        ("ring F_3[t]t/(t^3)", ring_brace(3, 3)),
    ];
    let mut failures: Vec<String> = braces.iter().filter_map(|(n, b)| radical_suite(n, b)).collect();
    let six = order_six_brace();
    failures.extend(radical_suite("order-6 table", &six));
    let infos = ideals(&six, ELEMENT_CAP).unwrap();
    let rad = left_nilpotent_radical_of(&six, &infos, ELEMENT_CAP).unwrap();
    if rad.radical.order() != 3 || infos.len() != 3 {
        failures.push(format!(
            "order-6 table: {} ideals, radical of order {}",
            infos.len(),
            rad.radical.order()
        ));
    }
    let elapsed = start.elapsed();
    verdict(
        "AC9",
        failures.is_empty() && elapsed < AC9_BUDGET,
        format!(
            "ideal sums, both star inclusions for all c, radical maximality and Wedderburn containment on {} braces in {elapsed:.1?}; failures: {failures:?}",
            braces.len() + 1
        ),
    );
}

#[test]
fn ac10_negative_controls() {
    let mut notes = Vec::new();
    let mut ok = true;

    // corrupt one structure constant of F_11[t]t/(t^4): t³·t = t instead of 0
    let good = PreLieAlgebra::truncated_polynomial(f(11), 4);
    let mut c = good.constants().clone();
    c.set_product(2, 0, &[1, 0, 0]);
    let corrupted = PreLieAlgebra::new(c).check_identity();
    ok &= !corrupted.is_pass();
    notes.push(format!("corrupted constants: {corrupted:?}"));

    // corrupt one entry of a star table
    let table = ring_brace(11, 3).tabulate().unwrap();
    let mut rows: Vec<Vec<u64>> = match table.backend() {
        braceforge::brace::Backend::Table(t) => t
            .ranks()
            .chunks(t.size())
            .map(|r| r.iter().map(|&v| v as u64).collect())
            .collect(),
        _ => unreachable!(),
    };
    rows[1][1] = (rows[1][1] + 1) % 121;
    let broken = Brace::from_star_table(f(11), 2, &rows).unwrap();
    let axioms = broken.check_axioms(CheckMode::Exhaustive).unwrap();
    ok &= !axioms.is_pass();
    notes.push(format!("corrupted table: {axioms}"));

    // 2^k ≥ p: F_5[t]t/(t^3) has k = 3
    let small = ring_brace(5, 3);
    let refused = brace_to_prelie(&small, &ConversionOptions::default());
    ok &= matches!(refused, Err(Error::Precondition(_)));
    notes.push(format!(
        "F_5 ring: {}",
        refused.as_ref().err().map_or("accepted".into(), |e| e.to_string())
    ));

    // forced conversion of a family-A6 flow brace at p = 7, where 2^6 ≥ 7
    let a6 = PreLieAlgebra::new(family_a6_constants(f(7), 1, 0, 0));
    let brace = prelie_to_brace(&a6).unwrap();
    let refused = brace_to_prelie(&brace, &ConversionOptions::default());
    ok &= matches!(refused, Err(Error::Precondition(_)));
    let forced = brace_to_prelie(
        &brace,
        &ConversionOptions {
            force: true,
            ..ConversionOptions::default()
        },
    )
    .unwrap();
    ok &= !forced.hypothesis_holds;
    let recovered = forced.algebra.constants() == a6.constants();
    notes.push(format!(
        "forced A6 at p = 7: strong index {:?}, {} of {} bilinearity samples disagree, identity {:?}, constants recovered: {recovered}",
        forced.strong_index, forced.bilinearity_failure_count, forced.bilinearity_checked, forced.identity
    ));
    verdict("AC10", ok, notes.join("; "));
}
