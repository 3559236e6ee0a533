//! Distributive nearlattices with a top and a unary box operator.

use crate::algebra::{FiniteAlgebra, Law, Verdict, Witness};
use crate::error::{Error, Result};

/// A distributive nearlattice with a declared `top` and a box table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModalAlgebra {
    algebra: FiniteAlgebra,
    top: usize,
}

impl ModalAlgebra {
    pub fn new(algebra: FiniteAlgebra) -> Result<Self> {
        let top = algebra.top().ok_or_else(|| Error::MissingTop(String::new()))?;
        if algebra.box_table().is_none() {
            return Err(Error::InvalidAlgebra("modal algebra needs a box table".into()));
        }
        if !algebra.is_distributive_nearlattice() {
            return Err(Error::NotDistributive("base of a modal algebra".into()));
        }
        Ok(ModalAlgebra { algebra, top })
    }

    /// `base` must already declare `top`.
    pub fn from_parts(base: &FiniteAlgebra, box_table: Vec<usize>) -> Result<Self> {
        ModalAlgebra::new(base.with_box(Some(box_table))?)
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn box_of(&self, i: usize) -> usize {
        self.algebra.box_of(i).expect("modal algebra has a box")
    }
}

fn fail(law: Law, values: Vec<usize>) -> Verdict {
    Verdict::Fail(Witness { law, values })
}

/// `box(1) = 1`, and `box(a meet b) = box(a) meet box(b)` whenever `a meet b` exists.
pub fn check_modal(a: &ModalAlgebra) -> Verdict {
    let alg = a.algebra();
    if a.box_of(a.top()) != a.top() {
        return fail(Law::BoxFixesTop, vec![a.top()]);
    }
    let n = alg.size();
    for x in 0..n {
        for y in 0..n {
            if let Some(c) = alg.meet(x, y) {
                if alg.meet(a.box_of(x), a.box_of(y)) != Some(a.box_of(c)) {
                    return fail(Law::BoxPreservesMeets, vec![x, y]);
                }
            }
        }
    }
    Verdict::Pass
}

/// `box(m(x,y,z)) = m(box(x|z), box(y|z), box(z))` over all triples.
pub fn check_identity_m(a: &ModalAlgebra) -> Result<Verdict> {
    if a.box_of(a.top()) != a.top() {
        return Err(Error::BoxTopNotFixed);
    }
    let alg = a.algebra();
    let n = alg.size();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let lhs = a.box_of(alg.m(x, y, z));
                let rhs = alg.m(a.box_of(alg.join(x, z)), a.box_of(alg.join(y, z)), a.box_of(z));
                if lhs != rhs {
                    return Ok(fail(Law::IdentityM, vec![x, y, z]));
                }
            }
        }
    }
    Ok(Verdict::Pass)
}

pub fn box_is_monotone(a: &ModalAlgebra) -> bool {
    let alg = a.algebra();
    let n = alg.size();
    (0..n).all(|x| (0..n).all(|y| !alg.leq(x, y) || alg.leq(a.box_of(x), a.box_of(y))))
}

/// Every box table on `base` that fixes the top, in lexicographic order.
pub fn box_tables_fixing_top(base: &FiniteAlgebra) -> Result<Vec<Vec<usize>>> {
    let top = base.top().ok_or_else(|| Error::MissingTop(String::new()))?;
    let n = base.size();
    let count = n.checked_pow(n as u32 - 1).filter(|&c| c <= 1 << 20).ok_or(Error::SizeGuard {
        what: "box tables",
        size: n,
        limit: 7,
    })?;
    let mut out = Vec::with_capacity(count);
    for mut code in 0..count {
        let mut t = vec![0; n];
        for i in (0..n).rev() {
            if i == top {
                t[i] = top;
            } else {
                t[i] = code % n;
                code /= n;
            }
        }
        out.push(t);
    }
    Ok(out)
}
