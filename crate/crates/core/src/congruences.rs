//! Congruences, quotients, and the Frege/Tarski/Leibniz relations of finite g-matrices.

use rayon::prelude::*;

use crate::algebra::{is_homomorphism, AlgebraClass, FiniteAlgebra, Preserve};
use crate::error::{Error, Result};
use crate::filters::{all_filters, generated_filter};
use crate::subset::Subset;

/// Largest universe for exhaustive partition enumeration (Bell(10) = 115975).
pub const CONGRUENCE_SIZE_LIMIT: usize = 10;

/// An equivalence relation on `0..n` as a restricted-growth block array.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    blocks: Vec<usize>,
}

impl Partition {
    /// Relabels arbitrary block ids in first-occurrence order.
    pub fn new(ids: &[usize]) -> Self {
        let mut seen: Vec<usize> = Vec::new();
        let blocks = ids
            .iter()
            .map(|id| match seen.iter().position(|s| s == id) {
                Some(p) => p,
                None => {
                    seen.push(*id);
                    seen.len() - 1
                }
            })
            .collect();
        Partition { blocks }
    }

    pub fn identity(n: usize) -> Self {
        Partition { blocks: (0..n).collect() }
    }

    pub fn total(n: usize) -> Self {
        Partition { blocks: vec![0; n] }
    }

    /// Smallest equivalence containing every listed pair.
    pub fn generated(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, j) in pairs {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            parent[ri.max(rj)] = ri.min(rj);
        }
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        Partition::new(&roots)
    }

    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_ids(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.blocks[i]
    }

    pub fn related(&self, i: usize, j: usize) -> bool {
        self.blocks[i] == self.blocks[j]
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.iter().max().map_or(0, |m| m + 1)
    }

    pub fn blocks(&self) -> Vec<Subset> {
        let mut out = vec![Subset::EMPTY; self.num_blocks()];
        for (i, &b) in self.blocks.iter().enumerate() {
            out[b] = out[b].with(i);
        }
        out
    }

    pub fn class_of(&self, i: usize) -> Subset {
        Subset::from_indices((0..self.size()).filter(|&j| self.related(i, j)))
    }

    /// Every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        let mut image = vec![usize::MAX; self.num_blocks()];
        self.blocks.iter().zip(&other.blocks).all(|(&b, &o)| {
            if image[b] == usize::MAX {
                image[b] = o;
            }
            image[b] == o
        })
    }

    pub fn join(&self, other: &Partition) -> Partition {
        let n = self.size();
        let pairs = (0..n).flat_map(|i| [(i, self.representative(i)), (i, other.representative(i))]);
        Partition::generated(n, pairs)
    }

    fn representative(&self, i: usize) -> usize {
        self.blocks.iter().position(|&b| b == self.blocks[i]).expect("i is in its own block")
    }

    pub fn is_identity(&self) -> bool {
        self.num_blocks() == self.size()
    }

    /// No block meets both `f` and its complement.
    pub fn saturates(&self, f: Subset) -> bool {
        (0..self.size()).all(|i| (0..self.size()).all(|j| !self.related(i, j) || f.contains(i) == f.contains(j)))
    }
}

/// All partitions of `0..n` in lexicographic order of their block arrays.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn rec(i: usize, arr: &mut Vec<usize>, k: usize, out: &mut Vec<Partition>) {
        if i == arr.len() {
            out.push(Partition { blocks: arr.clone() });
            return;
        }
        for b in 0..=k {
            arr[i] = b;
            rec(i + 1, arr, k.max(b + 1), out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(0, &mut vec![0; n], 0, &mut out);
    out
}

fn check_partition(a: &FiniteAlgebra, p: &Partition) -> Result<()> {
    if p.size() != a.size() {
        return Err(Error::MalformedPartition(format!("{} entries for a universe of {}", p.size(), a.size())));
    }
    Ok(())
}

/// Substituting a related element in one argument position keeps the result related.
fn compatible(a: &FiniteAlgebra, p: &Partition) -> bool {
    let n = a.size();
    for x in 0..n {
        for y in x + 1..n {
            if !p.related(x, y) {
                continue;
            }
            if let Some(bx) = a.box_table() {
                if !p.related(bx[x], bx[y]) {
                    return false;
                }
            }
            for u in 0..n {
                for v in 0..n {
                    if !p.related(a.m(x, u, v), a.m(y, u, v))
                        || !p.related(a.m(u, x, v), a.m(u, y, v))
                        || !p.related(a.m(u, v, x), a.m(u, v, y))
                    {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Joins of related pairs are related, and so are meets where both exist.
fn compatible_join_meet(a: &FiniteAlgebra, p: &Partition) -> bool {
    let n = a.size();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| p.related(x, y)).collect();
    pairs.iter().all(|&(x, y)| {
        pairs.iter().all(|&(u, v)| {
            p.related(a.join(x, u), a.join(y, v))
                && match (a.meet(x, u), a.meet(y, v)) {
                    (Some(c), Some(d)) => p.related(c, d),
                    _ => true,
                }
        })
    })
}

pub fn is_congruence(a: &FiniteAlgebra, p: &Partition) -> Result<bool> {
    check_partition(a, p)?;
    let ok = compatible(a, p);
    if a.is_distributive_nearlattice() {
        let mut order_ok = compatible_join_meet(a, p);
        if let Some(bx) = a.box_table() {
            order_ok &= (0..a.size()).all(|x| (0..a.size()).all(|y| !p.related(x, y) || p.related(bx[x], bx[y])));
        }
        assert_eq!(ok, order_ok, "congruence criteria disagree on {p:?}");
    }
    Ok(ok)
}

fn guard(a: &FiniteAlgebra) -> Result<()> {
    if a.size() > CONGRUENCE_SIZE_LIMIT {
        return Err(Error::SizeGuard { what: "congruence enumeration", size: a.size(), limit: CONGRUENCE_SIZE_LIMIT });
    }
    Ok(())
}

/// Every congruence, in lexicographic order of block arrays.
pub fn all_congruences(a: &FiniteAlgebra) -> Result<Vec<Partition>> {
    guard(a)?;
    Ok(all_partitions(a.size()).into_par_iter().filter(|p| compatible(a, p)).collect())
}

/// Join of all congruences refining `bound`; asserted to be a congruence below it.
fn largest_congruence_below(a: &FiniteAlgebra, bound: &Partition) -> Result<Partition> {
    guard(a)?;
    let below: Vec<Partition> =
        all_partitions(a.size()).into_par_iter().filter(|p| p.refines(bound) && compatible(a, p)).collect();
    let top = below.iter().fold(Partition::identity(a.size()), |acc, p| acc.join(p));
    assert!(top.refines(bound) && compatible(a, &top), "join of congruences below a bound escaped it");
    Ok(top)
}

/// An algebra with a closure system listed extensionally.
#[derive(Clone, Debug)]
pub struct GMatrix<'a> {
    algebra: &'a FiniteAlgebra,
    closed: Vec<Subset>,
}

impl<'a> GMatrix<'a> {
    pub fn new(algebra: &'a FiniteAlgebra, mut closed: Vec<Subset>) -> Result<Self> {
        let u = algebra.universe();
        if let Some(bad) = closed.iter().find(|s| !s.is_subset(u)) {
            return Err(Error::MalformedClosureSystem(format!("{bad:?} is not a subset of the universe")));
        }
        closed.sort();
        closed.dedup();
        if !closed.contains(&u) {
            return Err(Error::MalformedClosureSystem("universe is missing".into()));
        }
        for &f in &closed {
            for &g in &closed {
                if closed.binary_search(&f.intersection(g)).is_err() {
                    return Err(Error::MalformedClosureSystem(format!("{f:?} and {g:?} intersect outside the family")));
                }
            }
        }
        Ok(GMatrix { algebra, closed })
    }

    /// Filters plus the empty set.
    pub fn of_filters(algebra: &'a FiniteAlgebra) -> Result<Self> {
        let mut closed: Vec<Subset> = all_filters(algebra)?.iter().map(|f| f.carrier()).collect();
        closed.push(Subset::EMPTY);
        GMatrix::new(algebra, closed)
    }

    pub fn algebra(&self) -> &'a FiniteAlgebra {
        self.algebra
    }

    pub fn closed_sets(&self) -> &[Subset] {
        &self.closed
    }

    /// Least closed set containing `s`.
    pub fn closure(&self, s: Subset) -> Subset {
        self.closed.iter().filter(|c| s.is_subset(**c)).fold(self.algebra.universe(), |acc, &c| acc.intersection(c))
    }
}

/// Relates `a` and `b` when their one-element closures coincide.
pub fn frege_relation(g: &GMatrix) -> Partition {
    let n = g.algebra().size();
    let closures: Vec<Subset> = (0..n).map(|i| g.closure(Subset::singleton(i))).collect();
    let ids: Vec<usize> = (0..n).map(|i| closures.iter().position(|c| *c == closures[i]).expect("present")).collect();
    Partition::new(&ids)
}

pub fn tarski_congruence(g: &GMatrix) -> Result<Partition> {
    largest_congruence_below(g.algebra(), &frege_relation(g))
}

/// Greatest congruence with no block straddling `f` and its complement.
pub fn leibniz_congruence(a: &FiniteAlgebra, f: Subset) -> Result<Partition> {
    let n = a.size();
    let bound = Partition::new(&(0..n).map(|i| usize::from(f.contains(i))).collect::<Vec<_>>());
    largest_congruence_below(a, &bound)
}

/// The block algebra; elements are named `[x,y,...]` after their members and listed
/// by first member.
pub fn quotient(a: &FiniteAlgebra, theta: &Partition) -> Result<FiniteAlgebra> {
    if !is_congruence(a, theta)? {
        return Err(Error::MalformedPartition("not a congruence of the algebra".into()));
    }
    let blocks = theta.blocks();
    let k = blocks.len();
    let rep: Vec<usize> = blocks.iter().map(|b| b.iter().next().expect("blocks are nonempty")).collect();
    let names: Vec<String> =
        blocks.iter().map(|b| format!("[{}]", b.iter().map(|i| a.name(i)).collect::<Vec<_>>().join(","))).collect();
    let mut table = Vec::with_capacity(k * k * k);
    for x in 0..k {
        for y in 0..k {
            for z in 0..k {
                table.push(theta.block_of(a.m(rep[x], rep[y], rep[z])));
            }
        }
    }
    let constants = a.constants().iter().map(|(c, &v)| (c.clone(), theta.block_of(v))).collect();
    let box_table = a.box_table().map(|b| rep.iter().map(|&r| theta.block_of(b[r])).collect());
    let q = FiniteAlgebra::from_table(names, table, constants, box_table)?;
    let natural: Vec<usize> = theta.block_ids().to_vec();
    assert!(is_homomorphism(a, &q, &natural, Preserve::ALL), "natural map is not a homomorphism");
    Ok(q)
}

/// A member with two distinct congruences sharing the block of the top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityFailure {
    pub member: usize,
    pub first: Partition,
    pub second: Partition,
}

/// `None` when every member is point regular.
pub fn is_point_regular(class: &AlgebraClass) -> Result<Option<RegularityFailure>> {
    for (idx, a) in class.members().iter().enumerate() {
        let top = a.top().ok_or_else(|| Error::MissingTop(format!(" on member {idx}")))?;
        let cons = all_congruences(a)?;
        for (i, p) in cons.iter().enumerate() {
            for q in &cons[i + 1..] {
                if p.class_of(top) == q.class_of(top) {
                    return Ok(Some(RegularityFailure { member: idx, first: p.clone(), second: q.clone() }));
                }
            }
        }
    }
    Ok(None)
}

/// First nonempty `X` (size at most `max_gen`) with `Fi(X)` different from the
/// top class of the Leibniz congruence of `Fi(X)`.
pub fn top_class_counterexample(a: &FiniteAlgebra, max_gen: usize) -> Result<Option<Subset>> {
    let top = a.top().ok_or_else(|| Error::MissingTop(String::new()))?;
    for x in a.universe().subsets().filter(|x| !x.is_empty() && x.len() <= max_gen) {
        let f = generated_filter(a, x)?.carrier();
        if leibniz_congruence(a, f)?.class_of(top) != f {
            return Ok(Some(x));
        }
    }
    Ok(None)
}
