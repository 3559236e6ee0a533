//! Two derived sequents over `x0..x3`, built once and instantiated by substitution.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use super::search::{trans, SearchConfig, Session};
use super::{ProofNode, Sequent};
use crate::formulas::{substitute, Term};

fn x(i: u32) -> Term {
    Term::var(i)
}

fn j(a: &Term, b: &Term) -> Term {
    Term::join(a.clone(), b.clone())
}

fn session() -> Session {
    Session::new(SearchConfig::default(), false, (0..4).map(Term::var).collect())
}

fn derive(sess: &Session, premise: &Term, concl: &Term) -> Arc<ProofNode> {
    let s = Sequent::new([premise.clone()], concl.clone());
    sess.goal(&s).unwrap_or_else(|| panic!("no derivation of {s}"))
}

/// `m(x0|x1, x0|x2, x3) |- x0 | m(x1,x2,x3)`.
pub fn distribution_lemma() -> &'static Arc<ProofNode> {
    static LEMMA: OnceLock<Arc<ProofNode>> = OnceLock::new();
    LEMMA.get_or_init(|| {
        let sess = session();
        let (a, b, c, w) = (x(0), x(1), x(2), x(3));
        let lhs = Term::m(j(&a, &b), j(&a, &c), w.clone());
        let d = j(&a, &Term::m(b.clone(), c.clone(), w));
        let inner = sess.goal(&Sequent::new([b.clone(), c.clone()], d.clone())).expect("two-premise case");
        let collapse = ProofNode::mn_left(inner, &[b.clone(), c.clone()]);
        let packed = derive(&sess, &lhs, &collapse.sequent.premises()[0].clone());
        trans(packed, collapse)
    })
}

/// `m(x0, x1|x2, x3) |- m(x0,x1,x3) | m(x0,x2,x3)`.
pub fn join_extraction_lemma() -> &'static Arc<ProofNode> {
    static LEMMA: OnceLock<Arc<ProofNode>> = OnceLock::new();
    LEMMA.get_or_init(|| {
        let sess = session();
        let (a, b, c, w) = (x(0), x(1), x(2), x(3));
        let lhs = Term::m(a.clone(), j(&b, &c), w.clone());
        let u = Term::m(a.clone(), b.clone(), w.clone());
        let v = j(&c, &w);
        let q1 = derive(&sess, &lhs, &Term::m(j(&v, &a), j(&v, &b), w.clone()));
        let q2 = distribution_instance(&v, &a, &b, &w);
        let q3 = derive(&sess, &j(&v, &u), &j(&j(&u, &c), &w));
        let to_uc = trans(trans(q1, q2), q3);
        let to_ua = derive(&sess, &lhs, &j(&j(&u, &a), &w));
        let q4 = ProofNode::m_right(to_ua, to_uc);
        trans(q4, distribution_instance(&u, &a, &c, &w))
    })
}

/// Applies a substitution of `x0..` to every sequent and instantiation in the proof.
pub fn substitute_proof(p: &Arc<ProofNode>, map: &BTreeMap<u32, Term>) -> Arc<ProofNode> {
    fn go(
        p: &Arc<ProofNode>,
        map: &BTreeMap<u32, Term>,
        done: &mut HashMap<*const ProofNode, Arc<ProofNode>>,
    ) -> Arc<ProofNode> {
        if let Some(hit) = done.get(&Arc::as_ptr(p)) {
            return hit.clone();
        }
        let children = p.children.iter().map(|c| go(c, map, done)).collect();
        let seq = Sequent::new(
            p.sequent.premises().iter().map(|t| substitute(t, map)),
            substitute(p.sequent.conclusion(), map),
        );
        let subst = p.subst.iter().map(|(k, t)| (k.clone(), substitute(t, map))).collect();
        let out = ProofNode::new(seq, p.rule, children, subst);
        done.insert(Arc::as_ptr(p), out.clone());
        out
    }
    go(p, map, &mut HashMap::new())
}

fn instance(lemma: &Arc<ProofNode>, terms: [&Term; 4]) -> Arc<ProofNode> {
    let map = terms.iter().enumerate().map(|(i, t)| (i as u32, (*t).clone())).collect();
    substitute_proof(lemma, &map)
}

pub(super) fn distribution_instance(a: &Term, b: &Term, c: &Term, w: &Term) -> Arc<ProofNode> {
    instance(distribution_lemma(), [a, b, c, w])
}

pub(super) fn join_extraction_instance(a: &Term, b: &Term, c: &Term, w: &Term) -> Arc<ProofNode> {
    instance(join_extraction_lemma(), [a, b, c, w])
}
