//! The sequent calculus for distributive nearlattices: proof objects, checking,
//! certificates, and a complete bounded proof search.
//!
//! The two right-disjunction rules are read as left and right disjunct introduction
//! (`OrRightL`, `OrRightR`). The premise of `MnLeft` is the set `phi0, ..., phin`.

mod certificate;
mod lemmas;
mod search;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::algebra::AlgebraClass;
use crate::consequence::{consequence, Counterexample, Mode, Query};
use crate::error::{Error, Result};
use crate::formulas::{build_mn, Parser, Signature, Term, Tok};

pub use certificate::{parse_certificate, write_certificate};
pub use lemmas::{distribution_lemma, join_extraction_lemma, substitute_proof};
pub use search::{prove, NotFound, Prover, SearchConfig, SearchOutcome, DEFAULT_DEPTH, DEFAULT_MN_BOUND};

/// A finite set of premises and one conclusion; premises are kept sorted and deduplicated.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    premises: Vec<Term>,
    conclusion: Term,
}

impl Sequent {
    pub fn new(premises: impl IntoIterator<Item = Term>, conclusion: Term) -> Self {
        let mut premises: Vec<Term> = premises.into_iter().collect();
        premises.sort();
        premises.dedup();
        Sequent { premises, conclusion }
    }

    pub fn premises(&self) -> &[Term] {
        &self.premises
    }

    pub fn conclusion(&self) -> &Term {
        &self.conclusion
    }

    pub fn has_premise(&self, t: &Term) -> bool {
        self.premises.binary_search(t).is_ok()
    }

    /// Same conclusion, one more premise.
    pub fn with_premise(&self, t: &Term) -> Sequent {
        let mut s = self.clone();
        if let Err(pos) = s.premises.binary_search(t) {
            s.premises.insert(pos, t.clone());
        }
        s
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.premises.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        if self.premises.is_empty() {
            write!(f, "|- {}", self.conclusion)
        } else {
            write!(f, " |- {}", self.conclusion)
        }
    }
}

impl fmt::Debug for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `p1, p2 |- q`, or `|- q` with no premises.
pub fn parse_sequent(text: &str, sig: &Signature) -> Result<Sequent> {
    let mut p = Parser::new(text, sig);
    let mut premises = Vec::new();
    if p.peek()?.0 == Tok::Turnstile {
        p.next()?;
    } else {
        loop {
            premises.push(p.expr()?);
            let (tok, pos) = p.next()?;
            match tok {
                Tok::Comma => {}
                Tok::Turnstile => break,
                _ => return Err(Error::Parse { pos, msg: "expected `,` or `|-`".into() }),
            }
        }
    }
    let conclusion = p.expr()?;
    p.finish()?;
    Ok(Sequent::new(premises, conclusion))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Axiom,
    Weakening,
    Cut,
    OrLeft,
    OrRightL,
    OrRightR,
    MLeft1,
    MLeft2,
    MRight,
    MnLeft,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::Axiom,
        Rule::Weakening,
        Rule::Cut,
        Rule::OrLeft,
        Rule::OrRightL,
        Rule::OrRightR,
        Rule::MLeft1,
        Rule::MLeft2,
        Rule::MRight,
        Rule::MnLeft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Axiom => "Axiom",
            Rule::Weakening => "Weakening",
            Rule::Cut => "Cut",
            Rule::OrLeft => "OrLeft",
            Rule::OrRightL => "OrRightL",
            Rule::OrRightR => "OrRightR",
            Rule::MLeft1 => "MLeft1",
            Rule::MLeft2 => "MLeft2",
            Rule::MRight => "MRight",
            Rule::MnLeft => "MnLeft",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            Rule::Axiom | Rule::MLeft1 | Rule::MLeft2 => 0,
            Rule::Weakening | Rule::OrRightL | Rule::OrRightR | Rule::MnLeft => 1,
            Rule::Cut | Rule::OrLeft | Rule::MRight => 2,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One inference; `subst` instantiates the rule's schema variables in a fixed order.
#[derive(PartialEq, Eq)]
pub struct ProofNode {
    pub sequent: Sequent,
    pub rule: Rule,
    pub children: Vec<Arc<ProofNode>>,
    pub subst: Vec<(String, Term)>,
    height: usize,
}

impl fmt::Debug for ProofNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} by {} ({} children)", self.sequent, self.rule, self.children.len())
    }
}

fn s(name: &str, t: &Term) -> (String, Term) {
    (name.to_string(), t.clone())
}

impl ProofNode {
    /// Unchecked constructor; see [`check_proof`].
    pub fn new(sequent: Sequent, rule: Rule, children: Vec<Arc<ProofNode>>, subst: Vec<(String, Term)>) -> Arc<Self> {
        let height = 1 + children.iter().map(|c| c.height).max().unwrap_or(0);
        Arc::new(ProofNode { sequent, rule, children, subst, height })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Distinct nodes, counted by identity.
    pub fn node_count(self: &Arc<Self>) -> usize {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(n) = stack.pop() {
            if seen.insert(Arc::as_ptr(&n)) {
                stack.extend(n.children.iter().cloned());
            }
        }
        seen.len()
    }

    pub fn axiom(phi: &Term) -> Arc<Self> {
        ProofNode::new(Sequent::new([phi.clone()], phi.clone()), Rule::Axiom, vec![], vec![s("phi", phi)])
    }

    pub fn weakening(p: Arc<Self>, psi: &Term) -> Arc<Self> {
        let seq = p.sequent.with_premise(psi);
        ProofNode::new(seq, Rule::Weakening, vec![p], vec![s("psi", psi)])
    }

    /// `left` proves `G |- phi`, `right` proves `G, phi |- psi`.
    pub fn cut(left: Arc<Self>, right: Arc<Self>) -> Arc<Self> {
        let phi = left.sequent.conclusion.clone();
        let seq = Sequent::new(left.sequent.premises.clone(), right.sequent.conclusion.clone());
        ProofNode::new(seq, Rule::Cut, vec![left, right], vec![s("phi", &phi)])
    }

    /// `left` proves `phi |- chi`, `right` proves `psi |- chi`.
    pub fn or_left(left: Arc<Self>, right: Arc<Self>) -> Arc<Self> {
        let phi = left.sequent.premises[0].clone();
        let psi = right.sequent.premises[0].clone();
        let chi = left.sequent.conclusion.clone();
        let seq = Sequent::new([Term::join(phi.clone(), psi.clone())], chi.clone());
        ProofNode::new(seq, Rule::OrLeft, vec![left, right], vec![s("phi", &phi), s("psi", &psi), s("chi", &chi)])
    }

    pub fn or_right_l(p: Arc<Self>, psi: &Term) -> Arc<Self> {
        let phi = p.sequent.conclusion.clone();
        let seq = Sequent::new(p.sequent.premises.clone(), Term::join(phi.clone(), psi.clone()));
        ProofNode::new(seq, Rule::OrRightL, vec![p], vec![s("phi", &phi), s("psi", psi)])
    }

    pub fn or_right_r(p: Arc<Self>, phi: &Term) -> Arc<Self> {
        let psi = p.sequent.conclusion.clone();
        let seq = Sequent::new(p.sequent.premises.clone(), Term::join(phi.clone(), psi.clone()));
        ProofNode::new(seq, Rule::OrRightR, vec![p], vec![s("phi", phi), s("psi", &psi)])
    }

    pub fn m_left1(phi: &Term, psi: &Term, chi: &Term) -> Arc<Self> {
        let seq = Sequent::new([Term::m(phi.clone(), psi.clone(), chi.clone())], Term::join(phi.clone(), chi.clone()));
        ProofNode::new(seq, Rule::MLeft1, vec![], vec![s("phi", phi), s("psi", psi), s("chi", chi)])
    }

    pub fn m_left2(phi: &Term, psi: &Term, chi: &Term) -> Arc<Self> {
        let seq = Sequent::new([Term::m(phi.clone(), psi.clone(), chi.clone())], Term::join(psi.clone(), chi.clone()));
        ProofNode::new(seq, Rule::MLeft2, vec![], vec![s("phi", phi), s("psi", psi), s("chi", chi)])
    }

    /// `left` proves `G |- phi | chi`, `right` proves `G |- psi | chi`.
    pub fn m_right(left: Arc<Self>, right: Arc<Self>) -> Arc<Self> {
        let (phi, chi) = left.sequent.conclusion.as_join().expect("left premise concludes a join");
        let (psi, _) = right.sequent.conclusion.as_join().expect("right premise concludes a join");
        let (phi, psi, chi) = (phi.clone(), psi.clone(), chi.clone());
        let seq = Sequent::new(left.sequent.premises.clone(), Term::m(phi.clone(), psi.clone(), chi.clone()));
        ProofNode::new(seq, Rule::MRight, vec![left, right], vec![s("phi", &phi), s("psi", &psi), s("chi", &chi)])
    }

    /// `p` proves `args |- phi` (as a set).
    pub fn mn_left(p: Arc<Self>, args: &[Term]) -> Arc<Self> {
        let phi = p.sequent.conclusion.clone();
        let mn = build_mn(args, &phi).expect("at least one argument");
        let mut subst: Vec<(String, Term)> =
            args.iter().enumerate().map(|(i, a)| (format!("phi{i}"), a.clone())).collect();
        subst.push(s("phi", &phi));
        ProofNode::new(Sequent::new([mn], phi), Rule::MnLeft, vec![p], subst)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofError {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub reason: String,
}

impl fmt::Display for ProofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node at path {:?}: {}", self.path, self.reason)
    }
}

fn lookup<'a>(node: &'a ProofNode, names: &[&str]) -> std::result::Result<Vec<&'a Term>, String> {
    if node.subst.len() != names.len() || node.subst.iter().zip(names).any(|((k, _), n)| k != n) {
        return Err(format!("instantiation must name {}", names.join(", ")));
    }
    Ok(node.subst.iter().map(|(_, t)| t).collect())
}

fn expect_seq(got: &Sequent, want: &Sequent, what: &str) -> std::result::Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what} is `{got}`, the rule gives `{want}`"))
    }
}

/// Checks one inference against its rule, assuming the children are proofs.
fn check_step(node: &ProofNode) -> std::result::Result<(), String> {
    if node.children.len() != node.rule.arity() {
        return Err(format!("{} takes {} premises, found {}", node.rule, node.rule.arity(), node.children.len()));
    }
    let seq = &node.sequent;
    let gamma = &seq.premises;
    let child = |i: usize| &node.children[i].sequent;
    match node.rule {
        Rule::Axiom => {
            let v = lookup(node, &["phi"])?;
            expect_seq(seq, &Sequent::new([v[0].clone()], v[0].clone()), "conclusion")
        }
        Rule::Weakening => {
            let v = lookup(node, &["psi"])?;
            expect_seq(seq, &child(0).with_premise(v[0]), "conclusion")
        }
        Rule::Cut => {
            let v = lookup(node, &["phi"])?;
            if &child(0).conclusion != v[0] || !child(1).has_premise(v[0]) {
                return Err("cut formula mismatch".into());
            }
            expect_seq(child(0), &Sequent::new(gamma.clone(), v[0].clone()), "left premise")?;
            let right = Sequent::new(gamma.clone(), seq.conclusion.clone()).with_premise(v[0]);
            expect_seq(child(1), &right, "right premise")
        }
        Rule::OrLeft => {
            let v = lookup(node, &["phi", "psi", "chi"])?;
            expect_seq(child(0), &Sequent::new([v[0].clone()], v[2].clone()), "left premise")?;
            expect_seq(child(1), &Sequent::new([v[1].clone()], v[2].clone()), "right premise")?;
            expect_seq(seq, &Sequent::new([Term::join(v[0].clone(), v[1].clone())], v[2].clone()), "conclusion")
        }
        Rule::OrRightL | Rule::OrRightR => {
            let v = lookup(node, &["phi", "psi"])?;
            let kept = if node.rule == Rule::OrRightL { v[0] } else { v[1] };
            expect_seq(child(0), &Sequent::new(gamma.clone(), kept.clone()), "premise")?;
            expect_seq(seq, &Sequent::new(gamma.clone(), Term::join(v[0].clone(), v[1].clone())), "conclusion")
        }
        Rule::MLeft1 | Rule::MLeft2 => {
            let v = lookup(node, &["phi", "psi", "chi"])?;
            let first = if node.rule == Rule::MLeft1 { v[0] } else { v[1] };
            let want = Sequent::new(
                [Term::m(v[0].clone(), v[1].clone(), v[2].clone())],
                Term::join(first.clone(), v[2].clone()),
            );
            expect_seq(seq, &want, "conclusion")
        }
        Rule::MRight => {
            let v = lookup(node, &["phi", "psi", "chi"])?;
            expect_seq(child(0), &Sequent::new(gamma.clone(), Term::join(v[0].clone(), v[2].clone())), "left premise")?;
            expect_seq(
                child(1),
                &Sequent::new(gamma.clone(), Term::join(v[1].clone(), v[2].clone())),
                "right premise",
            )?;
            expect_seq(
                seq,
                &Sequent::new(gamma.clone(), Term::m(v[0].clone(), v[1].clone(), v[2].clone())),
                "conclusion",
            )
        }
        Rule::MnLeft => {
            let k = node.subst.len();
            if k < 2 {
                return Err("instantiation must name phi0, ..., phin, phi".into());
            }
            let names: Vec<String> = (0..k - 1).map(|i| format!("phi{i}")).chain(["phi".to_string()]).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            let v = lookup(node, &names)?;
            let args: Vec<Term> = v[..k - 1].iter().map(|t| (*t).clone()).collect();
            let phi = v[k - 1].clone();
            expect_seq(child(0), &Sequent::new(args.clone(), phi.clone()), "premise")?;
            let mn = build_mn(&args, &phi).map_err(|e| e.to_string())?;
            expect_seq(seq, &Sequent::new([mn], phi), "conclusion")
        }
    }
}

/// Validates every inference; shared subproofs are checked once.
pub fn check_proof(root: &Arc<ProofNode>) -> std::result::Result<(), ProofError> {
    fn walk(
        node: &Arc<ProofNode>,
        path: &mut Vec<usize>,
        done: &mut HashSet<*const ProofNode>,
    ) -> std::result::Result<(), ProofError> {
        if done.contains(&Arc::as_ptr(node)) {
            return Ok(());
        }
        for (i, c) in node.children.iter().enumerate() {
            path.push(i);
            walk(c, path, done)?;
            path.pop();
        }
        check_step(node).map_err(|reason| ProofError { path: path.clone(), reason })?;
        done.insert(Arc::as_ptr(node));
        Ok(())
    }
    walk(root, &mut Vec::new(), &mut HashSet::new())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SoundnessVerdict {
    Consistent,
    InvalidProof(ProofError),
    /// A proved sequent that fails in plain mode over the class.
    Contradiction {
        sequent: Sequent,
        counterexample: Counterexample,
    },
}

/// Every distinct sequent in the proof must hold in plain mode over the class.
pub fn soundness_audit(proof: &Arc<ProofNode>, class: &AlgebraClass) -> Result<SoundnessVerdict> {
    if let Err(e) = check_proof(proof) {
        return Ok(SoundnessVerdict::InvalidProof(e));
    }
    let mut seen = HashSet::new();
    let mut stack = vec![proof.clone()];
    let mut sequents = Vec::new();
    while let Some(n) = stack.pop() {
        if seen.insert(Arc::as_ptr(&n)) {
            sequents.push(n.sequent.clone());
            stack.extend(n.children.iter().cloned());
        }
    }
    sequents.sort();
    sequents.dedup();
    for sq in sequents {
        let q = Query::new(sq.premises.clone(), sq.conclusion.clone(), Mode::Plain);
        if let Some(c) = consequence(class, &q)?.counterexample() {
            return Ok(SoundnessVerdict::Contradiction { sequent: sq, counterexample: c.clone() });
        }
    }
    Ok(SoundnessVerdict::Consistent)
}

/// Plain-mode check of a bare sequent.
pub fn sequent_holds(s: &Sequent, class: &AlgebraClass) -> Result<Option<Counterexample>> {
    let q = Query::new(s.premises.clone(), s.conclusion.clone(), Mode::Plain);
    Ok(consequence(class, &q)?.counterexample().cloned())
}
