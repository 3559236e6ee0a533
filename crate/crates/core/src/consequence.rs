//! Plain, degree-preserving and truth-preserving consequence over a finite class,
//! plus instance audits of the DN-term properties.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::algebra::{mn_recursive, AlgebraClass, CompiledTerm, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::filters::all_filters;
use crate::formulas::{build_mn, variables_of_all, Term};
use crate::subset::Subset;

/// Largest number of valuations examined on one member.
pub const VALUATION_LIMIT: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `m^n(h premises, h phi) <= h phi`; with no premises, `h phi` is greatest.
    Plain,
    /// Every common lower bound of the premises is below the conclusion.
    Degrees,
    /// Premises all at `top` forces the conclusion to `top`.
    Truth,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plain" => Ok(Mode::Plain),
            "degrees" => Ok(Mode::Degrees),
            "truth" => Ok(Mode::Truth),
            _ => Err(format!("unknown mode `{s}` (plain, degrees, truth)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Plain => "plain",
            Mode::Degrees => "degrees",
            Mode::Truth => "truth",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub premises: Vec<Term>,
    pub conclusion: Term,
    pub mode: Mode,
}

impl Query {
    pub fn new(premises: Vec<Term>, conclusion: Term, mode: Mode) -> Self {
        Query { premises, conclusion, mode }
    }

    /// Variables in first-occurrence order across premises, then conclusion.
    pub fn variables(&self) -> Vec<u32> {
        variables_of_all(self.premises.iter().chain(std::iter::once(&self.conclusion)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// Position of the algebra in the class.
    pub member: usize,
    pub valuation: Vec<(u32, usize)>,
    /// Degrees mode: a lower bound of the premises that is not below the conclusion.
    pub lower_bound: Option<usize>,
}

impl Counterexample {
    pub fn render(&self, class: &AlgebraClass) -> String {
        let a = &class.members()[self.member];
        let mut parts: Vec<String> = self.valuation.iter().map(|(v, e)| format!("x{v}={}", a.name(*e))).collect();
        if parts.is_empty() {
            parts.push("no variables".into());
        }
        let mut out = format!("member {}: {}", self.member, parts.join(", "));
        if let Some(lb) = self.lower_bound {
            out.push_str(&format!("; lower bound {} is not below the conclusion", a.name(lb)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Fails(Counterexample),
}

impl Outcome {
    pub fn holds(&self) -> bool {
        matches!(self, Outcome::Holds)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Outcome::Holds => None,
            Outcome::Fails(c) => Some(c),
        }
    }
}

/// Digits of `idx` in base `n`, most significant first.
fn decode(mut idx: usize, n: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = idx % n;
        idx /= n;
    }
}

fn valuation_count(n: usize, k: usize) -> Result<usize> {
    n.checked_pow(k as u32).filter(|&c| c <= VALUATION_LIMIT).ok_or(Error::SizeGuard {
        what: "valuations",
        size: n,
        limit: VALUATION_LIMIT,
    })
}

/// Whether one evaluated instance satisfies the mode; `Err(lb)` carries the degrees witness.
fn instance_holds(
    a: &FiniteAlgebra,
    mode: Mode,
    prem: &[usize],
    concl: usize,
    top: Option<usize>,
) -> Result<std::result::Result<(), Option<usize>>> {
    match mode {
        Mode::Plain => {
            if prem.is_empty() {
                return Ok(if a.down(concl) == a.universe() { Ok(()) } else { Err(None) });
            }
            let v = mn_recursive(a, prem, concl);
            let below = a.leq(v, concl);
            if below != (v == concl) {
                return Err(Error::Inconsistency(format!("m^n is {v}, neither equal to nor above {concl}")));
            }
            Ok(if below { Ok(()) } else { Err(None) })
        }
        Mode::Degrees => {
            let lbs = prem.iter().fold(a.universe(), |acc, &p| acc.intersection(a.down(p)));
            Ok(match lbs.difference(a.down(concl)).iter().next() {
                None => Ok(()),
                Some(lb) => Err(Some(lb)),
            })
        }
        Mode::Truth => {
            let top = top.expect("checked before evaluation");
            Ok(if prem.iter().all(|&p| p == top) && concl != top { Err(None) } else { Ok(()) })
        }
    }
}

fn check_member(idx: usize, a: &FiniteAlgebra, q: &Query, vars: &[u32]) -> Result<Option<Counterexample>> {
    let top = match q.mode {
        Mode::Truth => Some(a.top().ok_or_else(|| Error::MissingTop(format!(" on member {idx}")))?),
        _ => None,
    };
    let prem: Vec<CompiledTerm> =
        q.premises.iter().map(|t| CompiledTerm::compile(a, t, vars)).collect::<Result<_>>()?;
    let concl = CompiledTerm::compile(a, &q.conclusion, vars)?;
    let n = a.size();
    let total = valuation_count(n, vars.len())?;
    let mut slots = vec![0; vars.len()];
    let mut stack = Vec::new();
    let mut pv = vec![0; prem.len()];
    for v in 0..total {
        decode(v, n, &mut slots);
        for (p, t) in pv.iter_mut().zip(&prem) {
            *p = t.eval(a, &slots, &mut stack);
        }
        let c = concl.eval(a, &slots, &mut stack);
        if let Err(lower_bound) = instance_holds(a, q.mode, &pv, c, top)? {
            return Ok(Some(Counterexample {
                member: idx,
                valuation: vars.iter().copied().zip(slots.iter().copied()).collect(),
                lower_bound,
            }));
        }
    }
    Ok(None)
}

/// Decides the query on every member and every valuation; on failure reports the first
/// member, then the first valuation in mixed-radix order (first variable most significant).
pub fn consequence(class: &AlgebraClass, q: &Query) -> Result<Outcome> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    if q.mode == Mode::Truth {
        if let Some(i) = class.members().iter().position(|a| a.top().is_none()) {
            return Err(Error::MissingTop(format!(" on member {i}")));
        }
    }
    let vars = q.variables();
    let results: Vec<Result<Option<Counterexample>>> =
        class.members().par_iter().enumerate().map(|(i, a)| check_member(i, a, q, &vars)).collect();
    for r in results {
        if let Some(c) = r? {
            return Ok(Outcome::Fails(c));
        }
    }
    Ok(Outcome::Holds)
}

/// `s` and `t` agree everywhere; cross-checked against plain consequence both ways.
pub fn equivalent_in_class(class: &AlgebraClass, s: &Term, t: &Term) -> Result<Option<Counterexample>> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let vars = variables_of_all([s, t]);
    let mut found = None;
    'members: for (idx, a) in class.members().iter().enumerate() {
        let cs = CompiledTerm::compile(a, s, &vars)?;
        let ct = CompiledTerm::compile(a, t, &vars)?;
        let n = a.size();
        let mut slots = vec![0; vars.len()];
        let mut stack = Vec::new();
        for v in 0..valuation_count(n, vars.len())? {
            decode(v, n, &mut slots);
            if cs.eval(a, &slots, &mut stack) != ct.eval(a, &slots, &mut stack) {
                found = Some(Counterexample {
                    member: idx,
                    valuation: vars.iter().copied().zip(slots.iter().copied()).collect(),
                    lower_bound: None,
                });
                break 'members;
            }
        }
    }
    if class.members().iter().all(|a| a.is_distributive_nearlattice()) {
        let fwd = consequence(class, &Query::new(vec![s.clone()], t.clone(), Mode::Plain))?;
        let back = consequence(class, &Query::new(vec![t.clone()], s.clone(), Mode::Plain))?;
        if found.is_none() != (fwd.holds() && back.holds()) {
            return Err(Error::Inconsistency(format!("equivalence of {s} and {t} disagrees with interderivability")));
        }
    }
    Ok(found)
}

/// Every term over `x0..x{vars-1}` of depth at most `depth`, smallest depth first.
pub fn formula_pool(vars: u32, depth: usize, limit: usize) -> Result<Vec<Term>> {
    let mut pool: Vec<Term> = (0..vars).map(Term::var).collect();
    let mut prev_len = 0;
    for _ in 0..depth {
        let layer = pool.len();
        let count = layer.checked_pow(3).unwrap_or(usize::MAX);
        if count > limit {
            return Err(Error::SizeGuard { what: "formula pool", size: count, limit });
        }
        let mut next = Vec::new();
        for (i, x) in pool.iter().enumerate() {
            for (j, y) in pool.iter().enumerate() {
                for (k, z) in pool.iter().enumerate() {
                    // at least one argument from the newest layer
                    if i >= prev_len || j >= prev_len || k >= prev_len {
                        next.push(Term::m(x.clone(), y.clone(), z.clone()));
                    }
                }
            }
        }
        prev_len = layer;
        pool.extend(next);
    }
    Ok(pool)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuditItem {
    A1,
    A2,
    A3,
    A4,
    /// `m^n(phis, psi) |- phi_i | psi`.
    MnBelowJoin,
    /// `phi_0|psi, ..., phi_n|psi |- m^n(phis, psi)`.
    JoinsGiveMn,
    /// `m^n(phis, phi) |- phi` implies `phis |- phi`.
    MnConverse,
    /// `phi |- m^n(phis, phi)`.
    AboveMn,
    P1,
    P2,
    P3,
    P4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditBounds {
    pub depth: usize,
    pub vars: u32,
    pub max_n: usize,
    /// Guard on the number of schema instances.
    pub max_instances: usize,
}

impl Default for AuditBounds {
    fn default() -> Self {
        AuditBounds { depth: 1, vars: 3, max_n: 1, max_instances: 2_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub item: AuditItem,
    pub premises: Vec<Term>,
    pub conclusion: Term,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub instances: usize,
    pub violations: Vec<Violation>,
}

/// Values of every pool formula under every valuation of the pool variables, per member.
struct ValueTable<'a> {
    class: &'a AlgebraClass,
    /// `values[member][valuation * pool + formula]`
    values: Vec<Vec<usize>>,
    pool: usize,
}

impl<'a> ValueTable<'a> {
    fn new(class: &'a AlgebraClass, pool: &[Term], vars: u32) -> Result<Self> {
        let var_list: Vec<u32> = (0..vars).collect();
        let values = class
            .members()
            .iter()
            .map(|a| {
                let compiled: Vec<CompiledTerm> =
                    pool.iter().map(|t| CompiledTerm::compile(a, t, &var_list)).collect::<Result<_>>()?;
                let total = valuation_count(a.size(), var_list.len())?;
                let mut slots = vec![0; var_list.len()];
                let mut stack = Vec::new();
                let mut out = Vec::with_capacity(total * pool.len());
                for v in 0..total {
                    decode(v, a.size(), &mut slots);
                    out.extend(compiled.iter().map(|c| c.eval(a, &slots, &mut stack)));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(ValueTable { class, values, pool: pool.len() })
    }

    /// Plain consequence where each side is computed from pool values.
    fn plain<P, C>(&self, prem: P, concl: C) -> bool
    where
        P: Fn(&FiniteAlgebra, &[usize], &mut Vec<usize>),
        C: Fn(&FiniteAlgebra, &[usize]) -> usize,
    {
        let mut buf = Vec::new();
        self.class.members().iter().zip(&self.values).all(|(a, vals)| {
            vals.chunks(self.pool).all(|row| {
                buf.clear();
                prem(a, row, &mut buf);
                let c = concl(a, row);
                matches!(instance_holds(a, Mode::Plain, &buf, c, None), Ok(Ok(())))
            })
        })
    }
}

fn join(a: &Term, b: &Term) -> Term {
    Term::join(a.clone(), b.clone())
}

/// Instantiates the DN-term properties and the four identities over a formula pool and
/// checks each instance in plain mode.
pub fn audit_dn_term(class: &AlgebraClass, bounds: &AuditBounds) -> Result<AuditReport> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let pool = formula_pool(bounds.vars, bounds.depth, bounds.max_instances)?;
    let p = pool.len();
    let mut planned = 0usize;
    for n in 0..=bounds.max_n {
        planned = planned.saturating_add(p.saturating_pow(n as u32 + 2).saturating_mul(4));
    }
    planned = planned.saturating_add(p.saturating_pow(3).saturating_mul(3));
    if planned > bounds.max_instances {
        return Err(Error::SizeGuard { what: "audit instances", size: planned, limit: bounds.max_instances });
    }
    let table = ValueTable::new(class, &pool, bounds.vars)?;
    let triples: Vec<(usize, usize, usize)> =
        (0..p).flat_map(|i| (0..p).flat_map(move |j| (0..p).map(move |k| (i, j, k)))).collect();

    let mut report = AuditReport::default();
    let push = |report: &mut AuditReport, item: AuditItem, premises: Vec<Term>, conclusion: Term| -> Result<()> {
        let cx = consequence(class, &Query::new(premises.clone(), conclusion.clone(), Mode::Plain))?;
        report.violations.push(Violation { item, premises, conclusion, counterexample: cx.counterexample().cloned() });
        Ok(())
    };

    // (A1): phi|psi |- chi iff phi |- chi and psi |- chi
    let bad: Vec<_> = triples
        .par_iter()
        .filter(|&&(i, j, k)| {
            let joined = table.plain(|a, r, b| b.push(a.join(r[i], r[j])), |_, r| r[k]);
            let left = table.plain(|_, r, b| b.push(r[i]), |_, r| r[k]);
            let right = table.plain(|_, r, b| b.push(r[j]), |_, r| r[k]);
            joined != (left && right)
        })
        .copied()
        .collect();
    report.instances += triples.len();
    for (i, j, k) in bad {
        push(&mut report, AuditItem::A1, vec![join(&pool[i], &pool[j])], pool[k].clone())?;
    }

    // (A2) and (A3)
    let bad: Vec<_> = triples
        .par_iter()
        .flat_map_iter(|&(i, j, k)| {
            let mut out = Vec::new();
            if !table.plain(|a, r, b| b.push(a.m(r[i], r[j], r[k])), |a, r| a.join(r[i], r[k])) {
                out.push((AuditItem::A2, i, j, k, 0));
            }
            if !table.plain(|a, r, b| b.push(a.m(r[i], r[j], r[k])), |a, r| a.join(r[j], r[k])) {
                out.push((AuditItem::A2, i, j, k, 1));
            }
            if !table.plain(|a, r, b| b.extend([a.join(r[i], r[k]), a.join(r[j], r[k])]), |a, r| a.m(r[i], r[j], r[k]))
            {
                out.push((AuditItem::A3, i, j, k, 0));
            }
            out
        })
        .collect();
    report.instances += 3 * triples.len();
    for (item, i, j, k, side) in bad {
        let m = Term::m(pool[i].clone(), pool[j].clone(), pool[k].clone());
        match item {
            AuditItem::A2 => {
                push(&mut report, item, vec![m], join(if side == 0 { &pool[i] } else { &pool[j] }, &pool[k]))?
            }
            _ => push(&mut report, item, vec![join(&pool[i], &pool[k]), join(&pool[j], &pool[k])], m)?,
        }
    }

    // (A4) and the m^n properties, for each arity n+1 of premise tuples
    for n in 0..=bounds.max_n {
        let arity = n + 1;
        let tuples = p.pow(arity as u32);
        let bad: Vec<_> = (0..tuples * p)
            .into_par_iter()
            .flat_map_iter(|code| {
                let mut idx = vec![0; arity + 1];
                decode(code, p, &mut idx);
                let (args, last) = (idx[..arity].to_vec(), idx[arity]);
                let mut out = Vec::new();
                let mn = |a: &FiniteAlgebra, r: &[usize]| {
                    let vals: Vec<usize> = args.iter().map(|&x| r[x]).collect();
                    mn_recursive(a, &vals, r[last])
                };
                let direct = table.plain(|_, r, b| b.extend(args.iter().map(|&x| r[x])), |_, r| r[last]);
                let single = table.plain(|a, r, b| b.push(mn(a, r)), |_, r| r[last]);
                if direct && !single {
                    out.push((AuditItem::A4, idx.clone(), 0));
                }
                if single && !direct {
                    out.push((AuditItem::MnConverse, idx.clone(), 0));
                }
                if !table.plain(|_, r, b| b.push(r[last]), mn) {
                    out.push((AuditItem::AboveMn, idx.clone(), 0));
                }
                for (pos, &x) in args.iter().enumerate() {
                    if !table.plain(|a, r, b| b.push(mn(a, r)), |a, r| a.join(r[x], r[last])) {
                        out.push((AuditItem::MnBelowJoin, idx.clone(), pos));
                    }
                }
                if !table.plain(|a, r, b| b.extend(args.iter().map(|&x| a.join(r[x], r[last]))), mn) {
                    out.push((AuditItem::JoinsGiveMn, idx.clone(), 0));
                }
                out
            })
            .collect();
        report.instances += tuples * p * (4 + arity);
        for (item, idx, pos) in bad {
            let args: Vec<Term> = idx[..arity].iter().map(|&x| pool[x].clone()).collect();
            let last = pool[idx[arity]].clone();
            let mn = build_mn(&args, &last)?;
            let (premises, conclusion) = match item {
                AuditItem::A4 | AuditItem::MnConverse => (vec![mn], last),
                AuditItem::AboveMn => (vec![last], mn),
                AuditItem::MnBelowJoin => (vec![mn], join(&args[pos], &last)),
                _ => (args.iter().map(|x| join(x, &last)).collect(), mn),
            };
            push(&mut report, item, premises, conclusion)?;
        }
    }

    // the identities themselves, on variables
    let v = Term::var;
    let m = Term::m;
    let identities = [
        (AuditItem::P1, m(v(0), v(1), v(0)), v(0)),
        (
            AuditItem::P2,
            m(m(v(0), v(1), v(2)), m(v(1), m(v(3), v(0), v(2)), v(2)), v(4)),
            m(v(4), v(4), m(v(1), m(v(0), v(3), v(2)), v(2))),
        ),
        (
            AuditItem::P3,
            m(v(0), m(v(1), v(1), v(2)), v(3)),
            m(m(v(0), v(1), v(3)), m(v(0), v(1), v(3)), m(v(0), v(2), v(3))),
        ),
        (AuditItem::P4, m(v(0), v(0), m(v(1), v(2), v(3))), m(m(v(0), v(0), v(1)), m(v(0), v(0), v(2)), v(3))),
    ];
    for (item, s, t) in identities {
        report.instances += 1;
        if let Some(c) = equivalent_in_class(class, &s, &t)? {
            report.violations.push(Violation { item, premises: vec![s], conclusion: t, counterexample: Some(c) });
        }
    }
    Ok(report)
}

/// Filters of `a` plus the empty set, in ascending bitmask order, each spot-checked for
/// closure under the valid single-variable-layer instances of the DN-term schemas.
pub fn sfilters(a: &FiniteAlgebra, class: &AlgebraClass) -> Result<Vec<Subset>> {
    if !class.contains(a) {
        return Err(Error::NotInClass);
    }
    let mut out = vec![Subset::EMPTY];
    out.extend(all_filters(a)?.iter().map(|f| f.carrier()));
    let (x, y, z) = (Term::var(0), Term::var(1), Term::var(2));
    let rules = [
        (vec![Term::m(x.clone(), y.clone(), z.clone())], join(&x, &z)),
        (vec![Term::m(x.clone(), y.clone(), z.clone())], join(&y, &z)),
        (vec![join(&x, &z), join(&y, &z)], Term::m(x.clone(), y.clone(), z.clone())),
        (vec![x.clone(), y.clone()], Term::m(x.clone(), y.clone(), z.clone())),
        (vec![x.clone()], join(&x, &y)),
        (vec![join(&x, &y)], join(&y, &x)),
        (vec![z.clone()], Term::m(x.clone(), y.clone(), z.clone())),
    ];
    let vars = [0, 1, 2];
    for (premises, conclusion) in rules {
        let q = Query::new(premises.clone(), conclusion.clone(), Mode::Plain);
        if !consequence(class, &q)?.holds() {
            return Err(Error::Inconsistency(format!("rule with conclusion {conclusion} fails in the class")));
        }
        let prem: Vec<CompiledTerm> =
            premises.iter().map(|t| CompiledTerm::compile(a, t, &vars)).collect::<Result<_>>()?;
        let concl = CompiledTerm::compile(a, &conclusion, &vars)?;
        let mut slots = [0; 3];
        let mut stack = Vec::new();
        for v in 0..valuation_count(a.size(), 3)? {
            decode(v, a.size(), &mut slots);
            let pv: Vec<usize> = prem.iter().map(|t| t.eval(a, &slots, &mut stack)).collect();
            let c = concl.eval(a, &slots, &mut stack);
            for s in &out {
                if pv.iter().all(|&e| s.contains(e)) && !s.contains(c) {
                    return Err(Error::Inconsistency(format!("{s:?} is not closed under a valid rule")));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::catalog_up_to;
    use crate::fixtures::{fig1, fig2};
    use crate::formulas::{parse_formula, parse_formula_list, Signature};

    fn f(s: &str) -> Term {
        parse_formula(s, &Signature::full()).unwrap()
    }

    fn q(prem: &str, concl: &str, mode: Mode) -> Query {
        Query::new(parse_formula_list(prem, &Signature::full()).unwrap(), f(concl), mode)
    }

    fn class(members: Vec<FiniteAlgebra>) -> AlgebraClass {
        AlgebraClass::new(members).unwrap()
    }

    #[test]
    fn joins_give_m_in_plain_mode() {
        let c = class(vec![fig1(), fig2()]);
        assert!(consequence(&c, &q("x0;x1", "m(x0,x1,x2)", Mode::Plain)).unwrap().holds());
    }

    #[test]
    fn degrees_example_on_fig2() {
        let c = class(vec![fig2()]);
        let b = &c.members()[0];
        assert!(consequence(&c, &q("bot1;bot2", "x0", Mode::Degrees)).unwrap().holds());
        let out = consequence(&c, &q("m(bot1,bot2,x0)", "x0", Mode::Degrees)).unwrap();
        let cx = out.counterexample().unwrap();
        assert_eq!(cx.valuation, vec![(0, b.index_of("c").unwrap())]);
        assert_eq!(cx.lower_bound, b.index_of("a"));
        assert_eq!(cx.render(&c), "member 0: x0=c; lower bound a is not below the conclusion");
        let plain = consequence(&c, &q("bot1;bot2", "x0", Mode::Plain)).unwrap();
        assert_eq!(plain.counterexample().unwrap().valuation, vec![(0, b.index_of("c").unwrap())]);
    }

    #[test]
    fn truth_mode_is_vacuous_on_bottoms() {
        let c = class(vec![fig2()]);
        assert!(consequence(&c, &q("bot1", "x0", Mode::Truth)).unwrap().holds());
        assert!(!consequence(&c, &q("bot1", "x0", Mode::Degrees)).unwrap().holds());
        assert!(consequence(&c, &q("", "top", Mode::Plain)).unwrap().holds());
        assert!(!consequence(&c, &q("", "x0", Mode::Plain)).unwrap().holds());
    }

    #[test]
    fn truth_mode_needs_tops() {
        let c = class(vec![FiniteAlgebra::chain(2).unwrap()]);
        assert!(matches!(consequence(&c, &q("x0", "x0", Mode::Truth)), Err(Error::MissingTop(_))));
        assert!(matches!(consequence(&c, &q("", "top", Mode::Plain)), Err(Error::UndeclaredConstant(_))));
    }

    #[test]
    fn counterexample_order_is_mixed_radix() {
        let c = class(vec![FiniteAlgebra::chain(3).unwrap()]);
        // x0 |- x1 fails first at x0=1, x1=0
        let out = consequence(&c, &q("x0", "x1", Mode::Plain)).unwrap();
        assert_eq!(out.counterexample().unwrap().valuation, vec![(0, 1), (1, 0)]);
        let out = consequence(&c, &q("x1", "x0", Mode::Plain)).unwrap();
        assert_eq!(out.counterexample().unwrap().valuation, vec![(1, 1), (0, 0)]);
    }

    #[test]
    fn equivalence_examples() {
        let c = class(catalog_up_to(5).unwrap());
        assert_eq!(equivalent_in_class(&c, &f("m(x0,x1,x2)"), &f("m(x1,x0,x2)")).unwrap(), None);
        assert_eq!(equivalent_in_class(&c, &f("x0|x1"), &f("x1|x0")).unwrap(), None);
        assert!(equivalent_in_class(&c, &f("x0"), &f("x1")).unwrap().is_some());
    }

    #[test]
    fn pool_sizes() {
        assert_eq!(formula_pool(3, 0, 100).unwrap().len(), 3);
        assert_eq!(formula_pool(3, 1, 100).unwrap().len(), 30);
        assert_eq!(formula_pool(2, 2, 10_000).unwrap().len(), 2 + 8 + (10 * 10 * 10 - 8));
        assert!(matches!(formula_pool(3, 2, 1000), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn audit_is_clean_on_small_catalog() {
        let c = class(catalog_up_to(4).unwrap());
        let r = audit_dn_term(&c, &AuditBounds::default()).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations.first());
        assert!(r.instances > 100_000);
    }

    #[test]
    fn audit_catches_the_pentagon() {
        let pentagon = crate::algebra::from_hasse(
            ["0", "a", "b", "c", "1"].iter().map(|s| s.to_string()).collect(),
            &[(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)],
            Default::default(),
            None,
        )
        .unwrap();
        let c = AlgebraClass::nearlattices(vec![pentagon]).unwrap();
        let r = audit_dn_term(&c, &AuditBounds::default()).unwrap();
        assert!(r.violations.iter().any(|v| v.item == AuditItem::P3));
        assert!(r.violations.iter().any(|v| v.item == AuditItem::P4));
        assert!(r.violations.iter().all(|v| v.counterexample.is_some()));
    }

    #[test]
    fn a4_single_instance() {
        let c = class(catalog_up_to(4).unwrap());
        assert!(consequence(&c, &q("x0;x1", "m(x0,x1,x2)", Mode::Plain)).unwrap().holds());
        let mn = build_mn(&[f("x0"), f("x1")], &f("m(x0,x1,x2)")).unwrap();
        let single = Query::new(vec![mn], f("m(x0,x1,x2)"), Mode::Plain);
        assert!(consequence(&c, &single).unwrap().holds());
    }

    #[test]
    fn sfilter_lists() {
        let b = fig2();
        let c = class(vec![b.clone()]);
        let s = sfilters(&b, &c).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], Subset::EMPTY);
        let c2 = FiniteAlgebra::chain(2).unwrap();
        let cc = class(vec![c2.clone()]);
        assert_eq!(sfilters(&c2, &cc).unwrap(), vec![Subset::EMPTY, Subset::singleton(1), Subset::full(2)]);
        assert!(matches!(sfilters(&fig1(), &cc), Err(Error::NotInClass)));
    }
}
