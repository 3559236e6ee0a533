use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use nearlab::algebra::{
    check_distributive, check_nearlattice, check_order_form, check_upset_distributivity, eval_term, AlgebraClass,
    FiniteAlgebra,
};
use nearlab::congruences::{frege_relation, tarski_congruence, GMatrix};
use nearlab::consequence::{consequence, formula_pool, Mode, Query};
use nearlab::enumerate::{canonical_form, catalog_up_to, enumerate_dn, raw_table_catalog};
use nearlab::filters::{
    all_filters, all_frink_filters, check_mn_properties, frink_lattice_is_distributive, generated_filter,
    is_filter_def, is_filter_m, is_frink_filter,
};
use nearlab::fixtures::{fig1, fig2};
use nearlab::formulas::{parse_formula, Signature, Term};
use nearlab::gentzen::{
    check_proof, parse_certificate, parse_sequent, prove, sequent_holds, soundness_audit, write_certificate, Rule,
    SearchOutcome, Sequent, SoundnessVerdict, DEFAULT_DEPTH, DEFAULT_MN_BOUND,
};
use nearlab::modal::{box_tables_fixing_top, check_identity_m, check_modal, ModalAlgebra};
use nearlab::Subset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn catalog(max: usize) -> Result<Vec<FiniteAlgebra>, String> {
    catalog_up_to(max).map_err(e)
}

fn fig1_fixture() -> Outcome {
    let a = fig1();
    ensure(check_nearlattice(&a).passed(), || "not a nearlattice".into())?;
    ensure(check_distributive(&a).map_err(e)?.passed(), || "not distributive".into())?;
    let idx = |n: &str| a.index_of(n).ok_or_else(|| format!("no element {n}"));
    let t = parse_formula("m(x0,x1,x2)", &Signature::plain()).map_err(e)?;
    for (third, want) in [("y", "y"), ("b", "y")] {
        let asg: BTreeMap<u32, usize> = [(0, idx("u")?), (1, idx("w")?), (2, idx(third)?)].into();
        let got = a.name(eval_term(&a, &t, &asg).map_err(e)?).to_string();
        ensure(got == want, || format!("m(u,w,{third}) = {got}, expected {want}"))?;
    }
    Ok("distributive nearlattice; m(u,w,y)=y and m(u,w,b)=y".into())
}

fn random_p1_table(rng: &mut ChaCha8Rng, n: usize) -> Result<FiniteAlgebra, String> {
    let mut table = vec![0; n * n * n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                table[(x * n + y) * n + z] = if x == z { x } else { rng.gen_range(0..n) };
            }
        }
    }
    let names = (0..n).map(|i| format!("e{i}")).collect();
    FiniteAlgebra::from_table(names, table, BTreeMap::new(), None).map_err(e)
}

fn identity_audit() -> Outcome {
    let members = catalog(5)?;
    for (i, a) in members.iter().enumerate() {
        ensure(check_nearlattice(a).passed(), || format!("member {i} fails (P1)/(P2)"))?;
        // check_distributive reports an error if (P3), (P4) and the upset criterion disagree.
        ensure(check_distributive(a).map_err(e)?.passed(), || format!("member {i} fails (P3)/(P4)"))?;
        ensure(check_order_form(a).passed(), || format!("member {i} fails the order form"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tables = 0;
    while tables < 50 {
        let n = rng.gen_range(2..=4);
        let a = random_p1_table(&mut rng, n)?;
        if a.is_nearlattice() {
            continue;
        }
        tables += 1;
        let identities = check_nearlattice(&a);
        let order_route = check_order_form(&a).passed() && check_upset_distributivity(&a).passed();
        ensure(!identities.passed(), || format!("random table {tables} passes (P1)/(P2)"))?;
        ensure(!order_route, || format!("random table {tables} passes the order and upset criteria"))?;
    }
    Ok(format!("{} catalog members pass; {tables} random tables fail both routes", members.len()))
}

fn mn_suite() -> Outcome {
    let members = catalog(5)?;
    for (i, a) in members.iter().enumerate() {
        if let Some(v) = check_mn_properties(a, 3).map_err(e)? {
            return Err(format!("member {i}: item {} fails at args {:?}, b={}", v.item, v.args, v.b));
        }
    }
    Ok(format!("items 1-7, n <= 3, {} members, zero violations", members.len()))
}

fn filter_equivalence() -> Outcome {
    let members = catalog(6)?;
    let (mut subsets, mut generated) = (0, 0);
    for (i, a) in members.iter().enumerate() {
        let full = a.universe();
        let filters: Vec<Subset> = all_filters(a).map_err(e)?.iter().map(|f| f.carrier()).collect();
        for s in full.subsets() {
            subsets += 1;
            ensure(is_filter_def(a, s) == is_filter_m(a, s), || format!("member {i}: criteria disagree on {s:?}"))?;
            if s.is_empty() || s.len() > 3 {
                continue;
            }
            generated += 1;
            let oracle = filters.iter().filter(|f| s.is_subset(**f)).fold(full, |acc, f| acc.intersection(*f));
            let got = generated_filter(a, s).map_err(e)?.carrier();
            ensure(got == oracle, || format!("member {i}: Fi({s:?}) = {got:?}, oracle {oracle:?}"))?;
        }
    }
    Ok(format!("{} members, {subsets} subsets, {generated} generated filters", members.len()))
}

fn example_degrees() -> Outcome {
    let class = AlgebraClass::nearlattices(vec![fig2()]).map_err(e)?;
    let sig = Signature::full();
    let f = |s: &str| parse_formula(s, &sig).map_err(e);
    let run = |prem: Vec<Term>, mode| -> Result<_, String> {
        consequence(&class, &Query::new(prem, Term::var(0), mode)).map_err(e)
    };
    let (b1, b2) = (f("bot1")?, f("bot2")?);
    ensure(run(vec![b1.clone(), b2.clone()], Mode::Degrees)?.holds(), || "bot1, bot2 |- x0 fails in degrees".into())?;
    let out = run(vec![f("m(bot1,bot2,x0)")?], Mode::Degrees)?;
    let c = out.counterexample().ok_or("m(bot1,bot2,x0) |- x0 holds in degrees")?;
    let c_idx = fig2().index_of("c").ok_or("no element c")?;
    ensure(c.valuation == [(0, c_idx)], || format!("witness {}", c.render(&class)))?;
    ensure(!run(vec![b1, b2], Mode::Plain)?.holds(), || "bot1, bot2 |- x0 holds in plain".into())?;
    Ok("degrees holds / fails with x0=c; plain fails".into())
}

fn random_term(rng: &mut ChaCha8Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.35) {
        return Term::var(rng.gen_range(0..3));
    }
    let mut sub = || random_term(rng, depth - 1);
    Term::m(sub(), sub(), sub())
}

fn mode_hierarchy() -> Outcome {
    let class = AlgebraClass::nearlattices(catalog(4)?).map_err(e)?.with_tops().map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut empty, mut tally) = (0, [0; 3]);
    for k in 0..200 {
        let n_prem = if k % 5 == 0 { 0 } else { rng.gen_range(1..=3) };
        let prem: Vec<Term> = (0..n_prem).map(|_| random_term(&mut rng, 2)).collect();
        let concl = random_term(&mut rng, 2);
        let holds = |mode| -> Result<bool, String> {
            Ok(consequence(&class, &Query::new(prem.clone(), concl.clone(), mode)).map_err(e)?.holds())
        };
        let (p, d, t) = (holds(Mode::Plain)?, holds(Mode::Degrees)?, holds(Mode::Truth)?);
        for (slot, h) in tally.iter_mut().zip([p, d, t]) {
            *slot += usize::from(h);
        }
        ensure(!p || d, || format!("query {k}: plain holds, degrees fails"))?;
        ensure(!d || t, || format!("query {k}: degrees holds, truth fails"))?;
        if prem.is_empty() {
            empty += 1;
            ensure(p == d && d == t, || format!("query {k}: empty-premise modes disagree"))?;
        }
    }
    let [p, d, t] = tally;
    Ok(format!("200 queries ({empty} without premises); hold in plain {p}, degrees {d}, truth {t}; zero violations"))
}

fn frink_suite() -> Outcome {
    let a = fig2();
    let names = |s: Subset| s.iter().map(|i| a.name(i).to_string()).collect::<BTreeSet<_>>();
    let got: BTreeSet<BTreeSet<String>> =
        all_frink_filters(&a).map_err(e)?.iter().map(|f| names(f.carrier())).collect();
    let want: BTreeSet<BTreeSet<String>> =
        [vec!["1"], vec!["a", "1"], vec!["b", "1"], vec!["c", "1"], vec!["a", "b", "c", "1"]]
            .into_iter()
            .map(|v| v.into_iter().map(String::from).collect())
            .collect();
    ensure(got == want, || format!("FIG2 Frink filters {got:?}"))?;
    ensure(!frink_lattice_is_distributive(&a).map_err(e)?, || "FIG2 Frink lattice is distributive".into())?;
    let members = catalog(5)?;
    for (i, m) in members.iter().enumerate() {
        for x in 0..m.size() {
            ensure(is_frink_filter(m, m.up(x)), || format!("member {i}: [{}) is not a Frink filter", m.name(x)))?;
        }
        let family: Vec<Subset> = all_frink_filters(m).map_err(e)?.iter().map(|f| f.carrier()).collect();
        ensure(family.contains(&m.universe()), || format!("member {i}: universe missing"))?;
        for f in &family {
            for g in &family {
                ensure(family.contains(&f.intersection(*g)), || format!("member {i}: not intersection-closed"))?;
            }
        }
    }
    Ok(format!("FIG2 gives M3; {} members closed under intersection", members.len()))
}

fn reducedness() -> Outcome {
    let members = catalog(5)?;
    for (i, a) in members.iter().enumerate() {
        let g = GMatrix::of_filters(a).map_err(e)?;
        ensure(frege_relation(&g).is_identity(), || format!("member {i}: Frege relation not the identity"))?;
        ensure(tarski_congruence(&g).map_err(e)?.is_identity(), || format!("member {i}: Tarski congruence"))?;
    }
    Ok(format!("{} members reduced", members.len()))
}

const CORPUS: &[&str] = &[
    "x0 |- x0",
    "x0, x1 |- x0",
    "x0 |- x0 | x1",
    "x1 |- x0 | x1",
    "x0 | x1 |- x1 | x0",
    "(x0 | x1) | x2 |- x0 | (x1 | x2)",
    "x0 | (x1 | x2) |- (x0 | x1) | x2",
    "x0 | x0 |- x0",
    "m(x0,x1,x2) |- x0 | x2",
    "m(x0,x1,x2) |- x1 | x2",
    "x0 | x2, x1 | x2 |- m(x0,x1,x2)",
    "x0, x1 |- m(x0,x1,x2)",
    "x2 |- m(x0,x1,x2)",
    "m(x0,x1,x2) |- m(x1,x0,x2)",
    "m(x0, x1, x0) |- x0",
    "x0 |- m(x0, x1, x0)",
    "m(x0 | x1, x1, x0 | x1) |- x0 | x1",
    "m(x0 | m(x0,x1,x2), x1, m(x0,x1,x2)) |- m(x0,x1,x2)",
    "m(m(x0 | x3, x1, x3), x2, x3) |- x0 | x3",
    "m(m(x0 | x3, x1, x3), x2, x3) |- x2 | x3",
    "x0 | x3, x1 | x3, x2 | x3 |- m(m(x0 | x3, x1, x3), x2, x3)",
    "x3 |- m(m(x0 | x3, x1, x3), x2, x3)",
    "m(x0, x1 | x2, x3) |- m(x0,x1,x3) | m(x0,x2,x3)",
    "m(x0,x1,x3) | m(x0,x2,x3) |- m(x0, x1 | x2, x3)",
    "m(x0 | x1, x0 | x2, x3) |- x0 | m(x1,x2,x3)",
    "x0 | m(x1,x2,x3) |- m(x0 | x1, x0 | x2, x3)",
    "m(m(x0,x1,x2), m(x1, m(x3,x0,x2), x2), x4) |- m(x4, x4, m(x1, m(x0,x3,x2), x2))",
    "m(x4, x4, m(x1, m(x0,x3,x2), x2)) |- m(m(x0,x1,x2), m(x1, m(x3,x0,x2), x2), x4)",
    "x0 | x1, x2 |- m(x0,x2,x1) | x3",
    "x0 | x1, x0 | x2 |- x0 | m(x1,x2,x3)",
    "m(x0,x1,x2), x3 |- x0 | x2",
    "x0 | x1, x0 | x2, x1 | x2 |- x0 | x1 | x2",
    "m(x0,x1,x2), m(x1,x0,x2) |- m(x0,x1,x2)",
    "box(x0) | x1 |- x1 | box(x0)",
    "m(top, bot1, x0) |- top | x0",
];

fn gentzen_soundness() -> Outcome {
    let class = AlgebraClass::nearlattices(catalog(5)?).map_err(e)?;
    let sig = Signature::full();
    let mut rules = BTreeSet::new();
    let mut checked = 0;
    for text in CORPUS {
        let s = parse_sequent(text, &sig).map_err(e)?;
        let SearchOutcome::Proved(p) = prove(&s, DEFAULT_DEPTH, DEFAULT_MN_BOUND) else {
            return Err(format!("no proof of {text}"));
        };
        let cert = write_certificate(&p);
        let back = parse_certificate(&cert, &sig).map_err(e)?;
        ensure(write_certificate(&back) == cert, || format!("{text}: certificate does not round-trip"))?;
        collect_rules(&p, &mut rules);
        let atoms_only = !text.contains("box") && !text.contains("top") && !text.contains("bot");
        if atoms_only {
            checked += 1;
            match soundness_audit(&back, &class).map_err(e)? {
                SoundnessVerdict::Consistent => {}
                other => return Err(format!("{text}: {other:?}")),
            }
        } else {
            check_proof(&back).map_err(|err| format!("{text}: {err}"))?;
        }
    }
    let missing: Vec<_> = Rule::ALL.iter().filter(|r| !rules.contains(&r.name())).collect();
    ensure(missing.is_empty(), || format!("rules never used: {missing:?}"))?;
    Ok(format!("{} sequents proved, {checked} audited over the catalog, all 10 rules used", CORPUS.len()))
}

fn collect_rules(p: &std::sync::Arc<nearlab::gentzen::ProofNode>, out: &mut BTreeSet<&'static str>) {
    out.insert(p.rule.name());
    for c in &p.children {
        collect_rules(c, out);
    }
}

fn gentzen_completeness() -> Outcome {
    let class = AlgebraClass::nearlattices(catalog(5)?).map_err(e)?;
    let pool = formula_pool(3, 1, 100).map_err(e)?;
    let mut sequents = Vec::new();
    for c in &pool {
        sequents.push(Sequent::new([], c.clone()));
        for (i, a) in pool.iter().enumerate() {
            sequents.push(Sequent::new([a.clone()], c.clone()));
            for b in &pool[i + 1..] {
                sequents.push(Sequent::new([a.clone(), b.clone()], c.clone()));
            }
        }
    }
    let (mut valid, mut proved) = (0usize, 0usize);
    for s in &sequents {
        if sequent_holds(s, &class).map_err(e)?.is_some() {
            continue;
        }
        valid += 1;
        match prove(s, DEFAULT_DEPTH, DEFAULT_MN_BOUND) {
            SearchOutcome::Proved(_) => proved += 1,
            SearchOutcome::NotFound(why) => {
                println!("    miss: {s} (depth {DEFAULT_DEPTH}, mn_bound {DEFAULT_MN_BOUND}): {why:?}");
            }
        }
    }
    let rate = proved as f64 / valid as f64;
    ensure(rate >= 0.95, || format!("proved {proved} of {valid}"))?;
    Ok(format!("{} sequents, {valid} valid, {proved} proved ({:.2}%)", sequents.len(), 100.0 * rate))
}

fn modal_equivalence() -> Outcome {
    let class = AlgebraClass::nearlattices(catalog(4)?).map_err(e)?.with_tops().map_err(e)?;
    let mut tables = 0;
    for (i, a) in class.members().iter().enumerate() {
        for t in box_tables_fixing_top(a).map_err(e)? {
            tables += 1;
            let m = ModalAlgebra::from_parts(a, t).map_err(e)?;
            let (lhs, rhs) = (check_modal(&m).passed(), check_identity_m(&m).map_err(e)?.passed());
            ensure(lhs == rhs, || format!("member {i}: box table {:?} gives {lhs} vs {rhs}", m.algebra().box_table()))?;
        }
    }
    Ok(format!("{tables} box tables, zero disagreements"))
}

fn enumeration() -> Outcome {
    let mut counts = Vec::new();
    for n in 1..=4 {
        let keys = |v: Vec<FiniteAlgebra>| v.iter().map(|a| canonical_form(a).key).collect::<BTreeSet<_>>();
        let by_order = keys(enumerate_dn(n).map_err(e)?);
        let by_table = keys(raw_table_catalog(n).map_err(e)?);
        ensure(by_order == by_table, || format!("size {n}: catalogs differ"))?;
        counts.push(by_order.len());
    }
    ensure(counts[..3] == [1, 1, 2], || format!("counts {counts:?}"))?;
    Ok(format!("counts by size 1..4: {counts:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("fig1 fixture", fig1_fixture),
        ("identity audit", identity_audit),
        ("m^n suite", mn_suite),
        ("filter equivalence", filter_equivalence),
        ("degrees versus plain on FIG2", example_degrees),
        ("mode hierarchy", mode_hierarchy),
        ("Frink suite", frink_suite),
        ("reducedness", reducedness),
        ("Gentzen soundness", gentzen_soundness),
        ("Gentzen completeness evidence", gentzen_completeness),
        ("modal equivalence", modal_equivalence),
        ("enumeration cross-validation", enumeration),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
