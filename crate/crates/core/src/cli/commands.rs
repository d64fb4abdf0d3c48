use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::schema::{self, Loaded, LoadedBrace};
use super::RunConfig;
use crate::brace::{Brace, CheckMode, SpanOptions, EXHAUSTIVE_TRIPLE_CAP};
use crate::classify_p4::{classify, ClassifyOptions, Family, FamilySelection, IsoMode};
use crate::correspondence::{
    brace_to_prelie, prelie_to_brace, roundtrip_report, roundtrip_report_brace, ConversionOptions, FlowCache,
};
use crate::error::{Error, Result};
use crate::fpcore::{format_raw, FpMatrix, FpVector, Prime};
use crate::prelie::{ChainKind, ChainReport, IdentityCheck, PreLieAlgebra};
use crate::radical::{
    check_axioms_exhaustive, ideal_sum, ideals, left_nilpotent_radical_of, star_inclusion_checks,
    wedderburn_radical_of, IdealInfo, LeftBrace, RadicalReport, Subgroup,
};

/// Whether every check of a command passed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| Error::Internal(format!("cannot write output: {e}")))?
    };
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "holds"
    } else {
        "FAILS"
    }
}

fn span_options(cfg: &RunConfig) -> SpanOptions {
    SpanOptions {
        cap: cfg.cap,
        sampling: Some((cfg.samples, cfg.seed)),
        use_degree_bound: true,
    }
}

fn conversion_options(cfg: &RunConfig) -> ConversionOptions {
    ConversionOptions {
        force: cfg.force,
        samples: cfg.samples,
        seed: cfg.seed,
        span: SpanOptions {
            sampling: None,
            ..span_options(cfg)
        },
    }
}

/// Exhaustive when the triple count allows it, else seeded samples.
fn check_mode(order: u128, cfg: &RunConfig) -> CheckMode {
    if order.saturating_pow(3) <= EXHAUSTIVE_TRIPLE_CAP.min(cfg.cap.saturating_pow(3)) {
        CheckMode::Exhaustive
    } else {
        CheckMode::Sampled {
            count: cfg.samples,
            seed: cfg.seed,
        }
    }
}

fn mode_label(mode: CheckMode) -> String {
    match mode {
        CheckMode::Exhaustive => "exhaustive".into(),
        CheckMode::Sampled { count, seed } => format!("{count} samples, seed {seed:#x}"),
    }
}

fn chain_line(r: &ChainReport) -> String {
    let index = r
        .index
        .map_or("none within the step cap".to_string(), |k| k.to_string());
    let label = if r.exact { "exact" } else { "SAMPLED" };
    format!("{} chain dims {:?}, index {index} ({label})", r.kind, r.dims())
}

fn describe_prelie(out: &mut dyn Write, a: &PreLieAlgebra) -> Result<()> {
    say!(out, "pre-Lie algebra over F_{} of dimension {}", a.modulus(), a.dim());
    Ok(())
}

pub fn check_prelie(cfg: &RunConfig, path: &Path, out: &mut dyn Write) -> Result<Outcome> {
    let alg = schema::load_prelie(path)?;
    describe_prelie(out, &alg)?;
    let n = alg.dim();
    let ok = match alg.check_identity() {
        IdentityCheck::Pass => {
            say!(out, "[prelie-identity] holds on all {} basis triples", n * n * n);
            true
        }
        IdentityCheck::Violation { i, j, k } => {
            say!(out, "[prelie-identity] FAILS on basis triple (e{i}, e{j}, e{k})");
            false
        }
    };
    if ok {
        let (p, samples) = (alg.modulus(), cfg.samples.min(1000));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let zero = vec![0; n];
        for _ in 0..samples {
            let [x, y, z] = [0; 3].map(|_| FpVector::random(p, n, &mut rng).into_coords());
            if alg.identity_residue(&x, &y, &z) != zero {
                return Err(Error::Internal("basis check passed but an element triple fails".into()));
            }
        }
        say!(out, "[prelie-identity] holds on {samples} seeded element triples");
    }
    say!(out, "{}", chain_line(&alg.power_chain()));
    Ok(Outcome::from_bool(ok))
}

fn check_fp_brace(cfg: &RunConfig, b: &Brace, out: &mut dyn Write) -> Result<Outcome> {
    say!(
        out,
        "F_{}-brace of dimension {} ({} backend), order {}",
        b.modulus(),
        b.dim(),
        b.backend().name(),
        b.order()
    );
    let mode = check_mode(b.order(), cfg);
    let axioms = b.check_axioms(mode)?;
    say!(out, "[brace-axioms] {axioms} [{}]", mode_label(mode));
    let linearity = b.check_fp_linearity(mode)?;
    say!(out, "[fp-linearity] {linearity} [{}]", mode_label(mode));
    if axioms.is_pass() {
        let span = span_options(cfg);
        for kind in [ChainKind::Left, ChainKind::Right, ChainKind::Strong] {
            say!(out, "{}", chain_line(&b.chain(kind, &span)?));
        }
    }
    Ok(Outcome::from_bool(axioms.is_pass() && linearity.is_pass()))
}

pub fn check_brace(cfg: &RunConfig, path: &Path, out: &mut dyn Write) -> Result<Outcome> {
    match schema::load_brace(path)? {
        LoadedBrace::Fp(b) => check_fp_brace(cfg, &b, out),
        LoadedBrace::Mixed(b) => {
            say!(out, "brace on {}, order {}", b.shape(), b.order());
            let result = check_axioms_exhaustive(&b)?;
            match &result {
                None => say!(out, "[brace-axioms] pass [exhaustive]"),
                Some(msg) => say!(out, "[brace-axioms] violation: {msg}"),
            }
            Ok(Outcome::from_bool(result.is_none()))
        }
    }
}

pub fn to_brace(cfg: &RunConfig, path: &Path, output: &Path, table: bool, out: &mut dyn Write) -> Result<Outcome> {
    let alg = schema::load_prelie(path)?;
    describe_prelie(out, &alg)?;
    let mut brace = prelie_to_brace(&alg)?;
    let mode = CheckMode::Sampled {
        count: cfg.samples,
        seed: cfg.seed,
    };
    let axioms = brace.check_axioms(mode)?;
    say!(out, "[group-of-flows-is-brace] {axioms} [{}]", mode_label(mode));
    if table {
        brace = brace.tabulate()?;
    }
    schema::write_json(output, &schema::brace_to_file(&brace))?;
    say!(
        out,
        "wrote {} backend brace to {}",
        brace.backend().name(),
        output.display()
    );
    Ok(Outcome::from_bool(axioms.is_pass()))
}

pub fn to_prelie(cfg: &RunConfig, path: &Path, output: &Path, out: &mut dyn Write) -> Result<Outcome> {
    let brace = schema::load_fp_brace(path)?;
    let conv = brace_to_prelie(&brace, &conversion_options(cfg))?;
    let k = conv.strong_index.map_or("none".to_string(), |k| k.to_string());
    say!(
        out,
        "strong nilpotency index {k}; 2^k < p {}",
        mark(conv.hypothesis_holds)
    );
    if !conv.hypothesis_holds {
        say!(
            out,
            "forced: hypotheses of the summation formula are violated, reporting what is observed"
        );
    }
    say!(
        out,
        "[summation-product-bilinear] {} of {} seeded pairs agree with the bilinear extension",
        conv.bilinearity_checked - conv.bilinearity_failure_count,
        conv.bilinearity_checked
    );
    for (a, b) in &conv.bilinearity_failures {
        say!(out, "  disagreement at a = {a}, b = {b}");
    }
    match conv.identity {
        IdentityCheck::Pass => say!(out, "[converted-prelie-identity] holds on all basis triples"),
        IdentityCheck::Violation { i, j, k } => {
            say!(
                out,
                "[converted-prelie-identity] FAILS on basis triple (e{i}, e{j}, e{k})"
            )
        }
    }
    schema::write_json(output, &schema::prelie_to_file(&conv.algebra))?;
    say!(out, "wrote pre-Lie algebra to {}", output.display());
    Ok(Outcome::from_bool(conv.is_clean() && conv.hypothesis_holds))
}

pub fn roundtrip(cfg: &RunConfig, path: &Path, out: &mut dyn Write) -> Result<Outcome> {
    let opts = conversion_options(cfg);
    let report = match schema::load(path)? {
        Loaded::PreLie(alg) => {
            describe_prelie(out, &alg)?;
            say!(out, "direction: pre-Lie → group of flows → summation formula");
            roundtrip_report(&alg, &opts)?
        }
        Loaded::Brace(LoadedBrace::Fp(b)) => {
            say!(out, "F_{}-brace of dimension {}", b.modulus(), b.dim());
            say!(out, "direction: brace → summation formula → group of flows");
            let r = roundtrip_report_brace(&b, &opts)?;
            match &r.first_circ_mismatch {
                None => say!(out, "[flows-recover-brace] ∘ agrees on {} pairs", r.circ_checked),
                Some((a, b)) => say!(out, "[flows-recover-brace] FAILS at a = {a}, b = {b}"),
            }
            r
        }
        Loaded::Brace(LoadedBrace::Mixed(_)) => {
            return Err(Error::input("round trips need an F_p-brace"));
        }
    };
    match report.first_constant_mismatch {
        None => say!(out, "[round-trip-exact] structure constants recovered bit-exactly"),
        Some((i, j)) => say!(out, "[round-trip-exact] FAILS: product e{i}·e{j} differs"),
    }
    let show = |k: Option<usize>| k.map_or("none".to_string(), |k| k.to_string());
    say!(
        out,
        "[index-preserved] pre-Lie index {} and brace strong index {}: {}",
        show(report.prelie_index),
        show(report.brace_strong_index),
        if report.prelie_index == report.brace_strong_index {
            "equal"
        } else {
            "DIFFERENT"
        }
    );
    Ok(Outcome::from_bool(report.is_exact()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum KindArg {
    Left,
    Right,
    Strong,
    All,
}

pub fn chains(cfg: &RunConfig, path: &Path, kind: KindArg, out: &mut dyn Write) -> Result<Outcome> {
    match schema::load(path)? {
        Loaded::PreLie(alg) => {
            describe_prelie(out, &alg)?;
            say!(out, "{}", chain_line(&alg.power_chain()));
        }
        Loaded::Brace(LoadedBrace::Fp(b)) => {
            say!(
                out,
                "F_{}-brace of dimension {}, order {}",
                b.modulus(),
                b.dim(),
                b.order()
            );
            let kinds: &[ChainKind] = match kind {
                KindArg::Left => &[ChainKind::Left],
                KindArg::Right => &[ChainKind::Right],
                KindArg::Strong => &[ChainKind::Strong],
                KindArg::All => &[ChainKind::Left, ChainKind::Right, ChainKind::Strong],
            };
            let span = span_options(cfg);
            for &k in kinds {
                say!(out, "{}", chain_line(&b.chain(k, &span)?));
            }
        }
        Loaded::Brace(LoadedBrace::Mixed(_)) => {
            return Err(Error::input(
                "chains need an F_p-brace; use `radical` for tables over several primes",
            ));
        }
    }
    Ok(Outcome::Pass)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyArg {
    A4,
    A5,
    A6,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum IsoArg {
    Exact,
    Sampled,
}

pub fn classify_p4(
    cfg: &RunConfig,
    p: u64,
    family: FamilyArg,
    iso: IsoArg,
    output: &Path,
    out: &mut dyn Write,
) -> Result<Outcome> {
    let p = Prime::new(p)?;
    let families = match family {
        FamilyArg::All => FamilySelection::All,
        FamilyArg::A4 => FamilySelection::One(Family::A4),
        FamilyArg::A5 => FamilySelection::One(Family::A5),
        FamilyArg::A6 => FamilySelection::One(Family::A6),
    };
    let iso = match iso {
        IsoArg::Exact => IsoMode::default(),
        IsoArg::Sampled => IsoMode::Sampled {
            count: cfg.samples,
            seed: cfg.seed,
        },
    };
    let catalog = classify(
        p,
        &ClassifyOptions {
            families,
            iso,
            brace_samples: cfg.samples,
            seed: cfg.seed,
            ..ClassifyOptions::default()
        },
    )?;
    for w in &catalog.warnings {
        say!(out, "warning: {w}");
    }
    for s in &catalog.families {
        let classes = s.iso_classes.map_or("unresolved".to_string(), |c| c.to_string());
        say!(
            out,
            "family {}: {} candidates, {} pass the identity and shape filters, {} distinct tables, {} isomorphism classes",
            s.family,
            s.candidates,
            s.survivors,
            s.distinct_tables,
            classes
        );
        say!(
            out,
            "  parameters that change the table: {:?}; vacuous: {:?}",
            s.effective_params,
            s.vacuous_params
        );
    }
    let failing: Vec<_> = catalog.entries.iter().filter(|e| !e.checks.all_pass(p)).collect();
    say!(
        out,
        "[flow-brace-checks] {} of {} records pass axioms, linearity, nilpotency, cardinality and exact round trip",
        catalog.entries.len() - failing.len(),
        catalog.entries.len()
    );
    for e in failing.iter().take(8) {
        say!(
            out,
            "  failing record: family {} params {:?}: {:?}",
            e.record.family,
            e.record.params,
            e.checks
        );
    }
    schema::write_json(output, &schema::catalog_to_file(&catalog))?;
    say!(out, "wrote catalog to {}", output.display());
    Ok(Outcome::from_bool(failing.is_empty()))
}

fn index_text(info: &IdealInfo) -> String {
    let show = |k: Option<usize>| k.map_or("not nilpotent".to_string(), |k| format!("index {k}"));
    format!("left {}, right {}", show(info.left.index), show(info.right.index))
}

fn radical_lines(out: &mut dyn Write, tag: &str, r: &RadicalReport) -> Result<()> {
    say!(out, "[{tag}] {} as the sum of {} ideals", r.radical, r.summands.len());
    say!(
        out,
        "[{tag}] is an ideal: {}; left nilpotent: {}; contains every left nilpotent ideal considered: {}",
        mark(r.radical_is_ideal),
        mark(r.radical_left_nilpotent),
        mark(r.maximal)
    );
    Ok(())
}

fn radical_generic<B: LeftBrace>(cfg: &RunConfig, b: &B, wedderburn: bool, out: &mut dyn Write) -> Result<Outcome> {
    let shape = b.shape();
    say!(out, "brace on {shape}, order {}", shape.order());
    let infos = ideals(b, cfg.cap)?;
    say!(out, "ideals: {}", infos.len());
    for (i, info) in infos.iter().enumerate() {
        say!(out, "  I{i} = {}: {}", info.ideal, index_text(info));
    }
    let nilpotent: Vec<(usize, &Subgroup)> = infos
        .iter()
        .enumerate()
        .filter(|(_, i)| i.left.is_nilpotent())
        .map(|(k, i)| (k, &i.ideal))
        .collect();
    let mut ok = true;
    let elements: Vec<Vec<u32>> = shape.elements().collect();
    let mut inclusion_cases = 0u64;
    for &(a, i) in &nilpotent {
        for &(c, j) in &nilpotent {
            let sum = ideal_sum(b, i, j, cfg.cap)?;
            if a <= c {
                say!(
                    out,
                    "[sum-of-left-nilpotent-ideals] instance I{a} + I{c} = {}: ideal {}, left nilpotent {}",
                    sum.sum,
                    mark(sum.is_ideal),
                    mark(sum.left_nilpotent)
                );
            }
            ok &= sum.holds();
            for e in &elements {
                inclusion_cases += 1;
                let inc = star_inclusion_checks(b, i, j, e, cfg.cap)?;
                if !inc.holds() {
                    ok = false;
                    say!(
                        out,
                        "[star-of-sum-inclusion] / [nested-star-inclusion] FAIL at I = I{a}, J = I{c}, c = {}: {:?}",
                        format_raw(e),
                        inc
                    );
                }
            }
        }
    }
    say!(
        out,
        "[star-of-sum-inclusion] and [nested-star-inclusion] checked on {inclusion_cases} triples (I, J, c)"
    );
    let rad = left_nilpotent_radical_of(b, &infos, cfg.cap)?;
    radical_lines(out, "left-nilpotent-radical", &rad)?;
    ok &= rad.holds();
    if wedderburn {
        let w = wedderburn_radical_of(b, &infos, cfg.cap)?;
        radical_lines(out, "wedderburn-radical", &w)?;
        let inside = w.radical.is_subgroup_of(&rad.radical);
        say!(out, "[wedderburn-inside-left-nilpotent-radical] {}", mark(inside));
        ok &= inside && w.radical_is_ideal && w.radical_left_nilpotent;
    }
    Ok(Outcome::from_bool(ok))
}

pub fn radical(cfg: &RunConfig, path: &Path, wedderburn: bool, out: &mut dyn Write) -> Result<Outcome> {
    match schema::load_brace(path)? {
        LoadedBrace::Fp(b) => radical_generic(cfg, &b, wedderburn, out),
        LoadedBrace::Mixed(b) => radical_generic(cfg, &b, wedderburn, out),
    }
}

/// Coefficients `c` with `v = Σ c_i w_i`, when the `w_i` are independent
/// and span `v`.
fn coefficients(p: Prime, words: &[Vec<u32>], v: &[u32]) -> Option<Vec<u32>> {
    let n = v.len();
    let cols = words.len() + 1;
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|r| words.iter().map(|w| w[r]).chain([v[r]]).collect())
        .collect();
    let kernel = FpMatrix::from_rows(p, &rows, cols).ok()?.kernel();
    match kernel.as_slice() {
        [k] if k[cols - 1] != 0 => {
            let s = p.neg(p.inv(k[cols - 1]).ok()?);
            Some(k[..cols - 1].iter().map(|&x| p.mul(x, s)).collect())
        }
        _ => None,
    }
}

pub fn omega_series(cfg: &RunConfig, path: &Path, out: &mut dyn Write) -> Result<Outcome> {
    let alg = schema::load_prelie(path)?;
    describe_prelie(out, &alg)?;
    let fc = FlowCache::new(&alg)?;
    let (p, n) = (alg.modulus(), alg.dim());
    for i in 0..n {
        let e = FpVector::unit(p, n, i);
        say!(out, "W(e{i}) = {}   Ω(e{i}) = {}", fc.w_map(&e)?, fc.omega(&e)?);
    }
    let x = FpVector::unit(p, n, 0).into_coords();
    let xx = alg.mul_raw(&x, &x);
    let words = vec![x.clone(), xx.clone(), alg.mul_raw(&xx, &x), alg.mul_raw(&x, &xx)];
    let om = fc.omega(&FpVector::from_raw(p, x.clone()))?;
    match coefficients(p, &words, om.coords()) {
        Some(c) => say!(
            out,
            "Ω(x) = {}·x + {}·x·x + {}·(x·x)·x + {}·x·(x·x) for x = e0",
            c[0],
            c[1],
            c[2],
            c[3]
        ),
        None => say!(out, "Ω(e0) is not a unique combination of x, x·x, (x·x)·x, x·(x·x)"),
    }
    let order = p.get() as u128;
    let order = order.saturating_pow(n as u32);
    let exhaustive = order <= cfg.cap.min(10_000);
    let points: Vec<FpVector> = if exhaustive {
        (0..order as u64).map(|r| FpVector::from_rank(p, n, r)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..cfg.samples).map(|_| FpVector::random(p, n, &mut rng)).collect()
    };
    let mut bad = None;
    for a in &points {
        if fc.w_map(&fc.omega(a)?)? != *a || fc.omega(&fc.w_map(a)?)? != *a {
            bad = Some(a.clone());
            break;
        }
    }
    let label = if exhaustive {
        "every element".to_string()
    } else {
        format!("{} seeded elements", points.len())
    };
    match &bad {
        None => say!(out, "[omega-inverts-w] W(Ω(a)) = Ω(W(a)) = a on {label}"),
        Some(a) => say!(out, "[omega-inverts-w] FAILS at a = {a}"),
    }
    Ok(Outcome::from_bool(bad.is_none()))
}
