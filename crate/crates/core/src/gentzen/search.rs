//! Proof search guided by the two-element chain.
//!
//! A sequent is derivable exactly when it holds in the two-element chain with
//! boxed terms and constants read as fresh atoms, so the search only ever opens
//! goals that hold there. Every reduction step makes its subgoals strictly smaller
//! (premise multiset first, then conclusion), so it terminates without cycle checks.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use dashmap::DashMap;

use super::lemmas::join_extraction_instance;
use super::{ProofNode, Sequent};
use crate::formulas::{build_mn, mn_decompositions, Term};

pub const DEFAULT_DEPTH: usize = 512;
pub const DEFAULT_MN_BOUND: usize = 8;
/// Atoms beyond this make the truth tables too large.
pub const MAX_ATOMS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest admissible proof height.
    pub depth: usize,
    /// Largest `n` tried for `MnLeft`.
    pub mn_bound: usize,
    /// Distinct goals opened before giving up.
    pub max_goals: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { depth: DEFAULT_DEPTH, mn_bound: DEFAULT_MN_BOUND, max_goals: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotFound {
    /// Fails in the two-element chain under this assignment, so no proof exists.
    Invalid {
        valuation: Vec<(Term, bool)>,
    },
    /// A proof was found but is taller than the depth bound.
    TooTall {
        height: usize,
        depth: usize,
    },
    /// The search needed a larger `MnLeft` arity than allowed.
    MnBound,
    Budget,
    TooManyAtoms(usize),
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Proved(Arc<ProofNode>),
    NotFound(NotFound),
}

impl SearchOutcome {
    pub fn proof(&self) -> Option<&Arc<ProofNode>> {
        match self {
            SearchOutcome::Proved(p) => Some(p),
            SearchOutcome::NotFound(_) => None,
        }
    }
}

pub fn prove(s: &Sequent, depth: usize, mn_bound: usize) -> SearchOutcome {
    Prover::new(SearchConfig { depth, mn_bound, ..SearchConfig::default() }).search(s)
}

#[derive(Clone, Debug, Default)]
pub struct Prover {
    pub config: SearchConfig,
}

impl Prover {
    pub fn new(config: SearchConfig) -> Self {
        Prover { config }
    }

    pub fn search(&self, s: &Sequent) -> SearchOutcome {
        let mut atoms = Vec::new();
        for t in s.premises().iter().chain([s.conclusion()]) {
            collect_atoms(t, &mut atoms);
        }
        if atoms.len() > MAX_ATOMS {
            return SearchOutcome::NotFound(NotFound::TooManyAtoms(atoms.len()));
        }
        let session = Session::new(self.config, true, atoms);
        if let Some(v) = session.tables.counter_valuation(s.premises(), s.conclusion()) {
            let valuation =
                session.tables.atoms.iter().enumerate().map(|(i, a)| (a.clone(), v >> i & 1 == 1)).collect();
            return SearchOutcome::NotFound(NotFound::Invalid { valuation });
        }
        match session.goal(s) {
            Some(p) if p.height() <= self.config.depth => SearchOutcome::Proved(p),
            Some(p) => SearchOutcome::NotFound(NotFound::TooTall { height: p.height(), depth: self.config.depth }),
            None if session.aborted.load(Ordering::Relaxed) => SearchOutcome::NotFound(NotFound::Budget),
            None => SearchOutcome::NotFound(NotFound::MnBound),
        }
    }
}

fn collect_atoms(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::M(args) => args.iter().for_each(|a| collect_atoms(a, out)),
        _ => {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
    }
}

/// Bitset truth tables over all assignments of the atoms; bit `v` is assignment `v`.
pub(super) struct Tables {
    atoms: Vec<Term>,
    index: HashMap<Term, usize>,
    words: usize,
    last_mask: u64,
    cache: DashMap<Term, Arc<[u64]>>,
}

impl Tables {
    fn new(atoms: Vec<Term>) -> Self {
        let rows = 1usize << atoms.len();
        let words = rows.div_ceil(64);
        let last_mask = if rows.is_multiple_of(64) { u64::MAX } else { (1u64 << rows) - 1 };
        let index = atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Tables { atoms, index, words, last_mask, cache: DashMap::new() }
    }

    fn table(&self, t: &Term) -> Arc<[u64]> {
        if let Some(hit) = self.cache.get(t) {
            return hit.clone();
        }
        let out: Arc<[u64]> = match t {
            Term::M(args) => {
                let (a, b, c) = (self.table(&args[0]), self.table(&args[1]), self.table(&args[2]));
                (0..self.words).map(|w| (a[w] & b[w]) | c[w]).collect()
            }
            _ => {
                let i = *self.index.get(t).expect("atom of the root sequent");
                let mut bits = vec![0u64; self.words];
                for v in 0..(1usize << self.atoms.len()) {
                    if v >> i & 1 == 1 {
                        bits[v / 64] |= 1 << (v % 64);
                    }
                }
                bits.into()
            }
        };
        self.cache.insert(t.clone(), out.clone());
        out
    }

    fn counter_valuation(&self, premises: &[Term], concl: &Term) -> Option<usize> {
        let mut acc = vec![u64::MAX; self.words];
        acc[self.words - 1] = self.last_mask;
        for p in premises {
            let t = self.table(p);
            acc.iter_mut().zip(t.iter()).for_each(|(a, b)| *a &= b);
        }
        let c = self.table(concl);
        acc.iter().zip(c.iter()).enumerate().find_map(|(w, (a, b))| {
            let bad = a & !b;
            (bad != 0).then(|| w * 64 + bad.trailing_zeros() as usize)
        })
    }

    fn valid(&self, premises: &[Term], concl: &Term) -> bool {
        self.counter_valuation(premises, concl).is_none()
    }
}

pub(super) struct Session {
    cfg: SearchConfig,
    lemmas: bool,
    tables: Tables,
    memo: DashMap<Sequent, Option<Arc<ProofNode>>>,
    goals: AtomicUsize,
    aborted: AtomicBool,
}

/// Adds the missing premises of `target` by weakening.
pub(super) fn weaken_to(mut p: Arc<ProofNode>, target: &[Term]) -> Arc<ProofNode> {
    for t in target {
        if !p.sequent.has_premise(t) {
            p = ProofNode::weakening(p, t);
        }
    }
    p
}

/// From `gamma |- x` and `delta |- y` with `delta` inside `gamma, x`, derives `gamma |- y`.
pub(super) fn trans(p1: Arc<ProofNode>, p2: Arc<ProofNode>) -> Arc<ProofNode> {
    let extended = p1.sequent.with_premise(p1.sequent.conclusion());
    let p2 = weaken_to(p2, extended.premises());
    ProofNode::cut(p1, p2)
}

/// `gamma |- build_mn(args, last)` when every argument is a premise.
fn fold_mn(gamma: &[Term], args: &[Term], last: &Term) -> Arc<ProofNode> {
    let pick = |a: &Term| ProofNode::or_right_l(weaken_to(ProofNode::axiom(a), gamma), last);
    let mut acc = ProofNode::or_right_l(weaken_to(ProofNode::axiom(&args[0]), gamma), last);
    for a in &args[1..] {
        acc = ProofNode::m_right(ProofNode::or_right_l(acc, last), pick(a));
    }
    acc
}

impl Session {
    pub(super) fn new(cfg: SearchConfig, lemmas: bool, atoms: Vec<Term>) -> Self {
        Session {
            cfg,
            lemmas,
            tables: Tables::new(atoms),
            memo: DashMap::new(),
            goals: AtomicUsize::new(0),
            aborted: AtomicBool::new(false),
        }
    }

    fn valid(&self, premises: &[Term], concl: &Term) -> bool {
        self.tables.valid(premises, concl)
    }

    /// A proof of exactly `s`, if one is found.
    pub(super) fn goal(&self, s: &Sequent) -> Option<Arc<ProofNode>> {
        if self.aborted.load(Ordering::Relaxed) {
            return None;
        }
        if let Some(hit) = self.memo.get(s) {
            return hit.clone();
        }
        if self.goals.fetch_add(1, Ordering::Relaxed) >= self.cfg.max_goals {
            self.aborted.store(true, Ordering::Relaxed);
            return None;
        }
        let out = if self.valid(s.premises(), s.conclusion()) { self.reduce(s) } else { None };
        if out.is_some() || !self.aborted.load(Ordering::Relaxed) {
            self.memo.insert(s.clone(), out.clone());
        }
        out
    }

    fn reduce(&self, s: &Sequent) -> Option<Arc<ProofNode>> {
        let gamma = s.premises();
        let phi = s.conclusion();

        if s.has_premise(phi) {
            return Some(weaken_to(ProofNode::axiom(phi), gamma));
        }
        for t in gamma {
            if let Some((p, q, r)) = t.as_m() {
                if *phi == Term::join(p.clone(), r.clone()) {
                    return Some(weaken_to(ProofNode::m_left1(p, q, r), gamma));
                }
                if *phi == Term::join(q.clone(), r.clone()) {
                    return Some(weaken_to(ProofNode::m_left2(p, q, r), gamma));
                }
            }
        }

        let mut kept: Vec<Term> = gamma.to_vec();
        let mut i = 0;
        while i < kept.len() && kept.len() > 1 {
            let t = kept.remove(i);
            if !self.valid(&kept, phi) {
                kept.insert(i, t);
                i += 1;
            }
        }
        if kept.len() < gamma.len() {
            let p = self.goal(&Sequent::new(kept, phi.clone()))?;
            return Some(weaken_to(p, gamma));
        }

        if let [theta] = gamma {
            for args in mn_decompositions(theta, phi, self.cfg.mn_bound) {
                if args.len() > 1 && self.valid(&args, phi) {
                    if let Some(p) = self.goal(&Sequent::new(args.clone(), phi.clone())) {
                        return Some(ProofNode::mn_left(p, &args));
                    }
                }
            }
        }

        if let Some((a, b, c)) = phi.as_m() {
            if a != b {
                let left = Sequent::new(gamma.to_vec(), Term::join(a.clone(), c.clone()));
                let right = Sequent::new(gamma.to_vec(), Term::join(b.clone(), c.clone()));
                if let (Some(l), Some(r)) = rayon::join(|| self.goal(&left), || self.goal(&right)) {
                    return Some(ProofNode::m_right(l, r));
                }
            }
        }

        if let [theta] = gamma {
            if let Some((a, b)) = theta.as_join() {
                let left = Sequent::new([a.clone()], phi.clone());
                let right = Sequent::new([b.clone()], phi.clone());
                if let (Some(l), Some(r)) = rayon::join(|| self.goal(&left), || self.goal(&right)) {
                    return Some(ProofNode::or_left(l, r));
                }
            }
        }

        if let Some((a, b)) = phi.as_join() {
            if self.valid(gamma, a) {
                if let Some(p) = self.goal(&Sequent::new(gamma.to_vec(), a.clone())) {
                    return Some(ProofNode::or_right_l(p, b));
                }
            }
            if self.valid(gamma, b) {
                if let Some(p) = self.goal(&Sequent::new(gamma.to_vec(), b.clone())) {
                    return Some(ProofNode::or_right_r(p, a));
                }
            }
        }

        if let Some(p) = self.split_premise(s) {
            return Some(p);
        }
        if self.lemmas {
            return self.contextual_or_left(s);
        }
        None
    }

    /// Replaces a premise `m(p,q,r)` by `p|r` and `q|r`.
    fn split_premise(&self, s: &Sequent) -> Option<Arc<ProofNode>> {
        let gamma = s.premises();
        let (gm, (p, q, r)) = gamma.iter().find_map(|t| t.as_m().filter(|(p, q, _)| p != q).map(|parts| (t, parts)))?;
        let pr = Term::join(p.clone(), r.clone());
        let qr = Term::join(q.clone(), r.clone());
        let rest: Vec<Term> = gamma.iter().filter(|t| *t != gm).cloned().chain([pr.clone(), qr.clone()]).collect();
        let inner = self.goal(&Sequent::new(rest, s.conclusion().clone()))?;
        let with_pr = s.with_premise(&pr);
        let get_pr = weaken_to(ProofNode::m_left1(p, q, r), gamma);
        let get_qr = weaken_to(ProofNode::m_left2(p, q, r), with_pr.premises());
        let inner = weaken_to(inner, with_pr.with_premise(&qr).premises());
        Some(ProofNode::cut(get_pr, ProofNode::cut(get_qr, inner)))
    }

    /// Case split on a premise `A|B` alongside other premises.
    fn contextual_or_left(&self, s: &Sequent) -> Option<Arc<ProofNode>> {
        let gamma = s.premises();
        let phi = s.conclusion();
        let disj = gamma.iter().find(|t| t.as_join().is_some())?;
        let (a, b) = disj.as_join()?;
        let ctx: Vec<Term> = gamma.iter().filter(|t| *t != disj).cloned().collect();
        if ctx.is_empty() || ctx.len() > self.cfg.mn_bound {
            return None;
        }
        let with = |x: &Term| ctx.iter().cloned().chain([x.clone()]).collect::<Vec<_>>();
        let (args_a, args_b) = (with(a), with(b));
        let (pa, pb) = rayon::join(
            || self.goal(&Sequent::new(args_a.clone(), phi.clone())),
            || self.goal(&Sequent::new(args_b.clone(), phi.clone())),
        );
        let split = ProofNode::or_left(ProofNode::mn_left(pa?, &args_a), ProofNode::mn_left(pb?, &args_b));

        let g = build_mn(&ctx, phi).expect("nonempty context");
        let to_g = ProofNode::or_right_l(fold_mn(gamma, &ctx, phi), phi);
        let to_disj = ProofNode::or_right_l(weaken_to(ProofNode::axiom(disj), gamma), phi);
        let packed = ProofNode::m_right(to_g, to_disj);
        let spread = trans(packed, join_extraction_instance(&g, a, b, phi));
        Some(trans(spread, split))
    }
}
