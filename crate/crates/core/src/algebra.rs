//! Finite algebras `<A, m>` with optional constants and box, identity checks and the
//! order-based construction of `m` from a join-semilattice.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::formulas::Term;
use crate::subset::Subset;

/// Largest universe the bitset representation supports.
pub const MAX_SIZE: usize = 64;

/// Identities and structural conditions a check can report on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Law {
    P1,
    P2,
    P3,
    P4,
    PartialOrder,
    JoinIsLeastUpperBound,
    UpsetIsLattice,
    MeetOfJoins,
    UpsetDistributive,
    BoxFixesTop,
    BoxPreservesMeets,
    IdentityM,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Law::P1 => "(P1) m(x,y,x)=x",
            Law::P2 => "(P2) m(m(x,y,z),m(y,m(u,x,z),z),w)=m(w,w,m(y,m(x,u,z),z))",
            Law::P3 => "(P3) m(x,m(y,y,z),w)=m(m(x,y,w),m(x,y,w),m(x,z,w))",
            Law::P4 => "(P4) m(x,x,m(y,z,w))=m(m(x,x,y),m(x,x,z),w)",
            Law::PartialOrder => "derived order is a partial order",
            Law::JoinIsLeastUpperBound => "m(x,x,y) is the least upper bound",
            Law::UpsetIsLattice => "every upset is a lattice",
            Law::MeetOfJoins => "m(x,y,a) = (x|a) meet_a (y|a)",
            Law::UpsetDistributive => "every upset is a distributive lattice",
            Law::BoxFixesTop => "box(1)=1",
            Law::BoxPreservesMeets => "box(a meet b) = box(a) meet box(b)",
            Law::IdentityM => "(M) box(m(x,y,z))=m(box(x|z),box(y|z),box(z))",
        };
        f.write_str(s)
    }
}

/// A violated law with the element indices that break it, in the law's variable order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub law: Law,
    pub values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Witness),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail(w) => Some(w),
        }
    }

    fn fail(law: Law, values: Vec<usize>) -> Verdict {
        Verdict::Fail(Witness { law, values })
    }

    fn and_then(self, f: impl FnOnce() -> Verdict) -> Verdict {
        if self.passed() {
            f()
        } else {
            self
        }
    }
}

#[derive(Clone, Default)]
struct Cache {
    nearlattice: OnceLock<bool>,
    distributive: OnceLock<bool>,
}

/// A finite algebra with a dense `n^3` table for `m`.
#[derive(Clone)]
pub struct FiniteAlgebra {
    n: usize,
    names: Vec<String>,
    table: Vec<u8>,
    constants: BTreeMap<String, usize>,
    box_table: Option<Vec<usize>>,
    up: Vec<Subset>,
    down: Vec<Subset>,
    cache: Cache,
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n
            && self.names == o.names
            && self.table == o.table
            && self.constants == o.constants
            && self.box_table == o.box_table
    }
}

impl Eq for FiniteAlgebra {}

impl fmt::Debug for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteAlgebra")
            .field("names", &self.names)
            .field("constants", &self.constants)
            .field("box", &self.box_table)
            .finish_non_exhaustive()
    }
}

impl FiniteAlgebra {
    /// Builds an algebra from a row-major table indexed by `(i*n + j)*n + k`.
    pub fn from_table(
        names: Vec<String>,
        table: Vec<usize>,
        constants: BTreeMap<String, usize>,
        box_table: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidAlgebra("empty universe".into()));
        }
        if n > MAX_SIZE {
            return Err(Error::SizeGuard { what: "algebra", size: n, limit: MAX_SIZE });
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidAlgebra(format!("bad element name `{name}`")));
            }
            if !seen.insert(name) {
                return Err(Error::InvalidAlgebra(format!("element `{name}` listed twice")));
            }
        }
        if table.len() != n * n * n {
            return Err(Error::InvalidAlgebra(format!("table has {} entries, expected {}", table.len(), n * n * n)));
        }
        if let Some(bad) = table.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidAlgebra(format!("table entry {bad} is out of range")));
        }
        for (c, &v) in &constants {
            if !crate::formulas::is_constant_name(c) {
                return Err(Error::InvalidAlgebra(format!("`{c}` cannot name a constant")));
            }
            if v >= n {
                return Err(Error::InvalidAlgebra(format!("constant `{c}` is out of range")));
            }
        }
        if let Some(b) = &box_table {
            if b.len() != n || b.iter().any(|&v| v >= n) {
                return Err(Error::InvalidAlgebra("box table is not a total map on the universe".into()));
            }
        }
        let table: Vec<u8> = table.into_iter().map(|v| v as u8).collect();
        let mut up = vec![Subset::EMPTY; n];
        let mut down = vec![Subset::EMPTY; n];
        for i in 0..n {
            for j in 0..n {
                if table[(i * n + i) * n + j] as usize == j {
                    up[i] = up[i].with(j);
                    down[j] = down[j].with(i);
                }
            }
        }
        let alg = FiniteAlgebra { n, names, table, constants, box_table, up, down, cache: Cache::default() };
        if let Some(top) = alg.constant("top") {
            if alg.is_nearlattice() && alg.greatest() != Some(top) {
                return Err(Error::InvalidAlgebra("constant `top` is not the greatest element".into()));
            }
        }
        Ok(alg)
    }

    pub fn from_fn(names: Vec<String>, f: impl Fn(usize, usize, usize) -> usize) -> Result<Self> {
        let n = names.len();
        let mut table = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    table.push(f(i, j, k));
                }
            }
        }
        FiniteAlgebra::from_table(names, table, BTreeMap::new(), None)
    }

    /// The chain `0 < 1 < ... < n-1` named by index.
    pub fn chain(n: usize) -> Result<Self> {
        let names = (0..n).map(|i| i.to_string()).collect();
        let covers: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        from_hasse(names, &covers, BTreeMap::new(), None)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    #[inline]
    pub fn m(&self, i: usize, j: usize, k: usize) -> usize {
        self.table[(i * self.n + j) * self.n + k] as usize
    }

    #[inline]
    pub fn join(&self, i: usize, j: usize) -> usize {
        self.m(i, i, j)
    }

    /// `i <= j` iff `m(i,i,j) = j`.
    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up[i].contains(j)
    }

    /// `[i)` under the derived order.
    pub fn up(&self, i: usize) -> Subset {
        self.up[i]
    }

    pub fn down(&self, i: usize) -> Subset {
        self.down[i]
    }

    pub fn universe(&self) -> Subset {
        Subset::full(self.n)
    }

    pub fn table(&self) -> Vec<usize> {
        self.table.iter().map(|&v| v as usize).collect()
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.constants
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn box_table(&self) -> Option<&[usize]> {
        self.box_table.as_deref()
    }

    pub fn box_of(&self, i: usize) -> Option<usize> {
        self.box_table.as_ref().map(|b| b[i])
    }

    /// The declared `top` constant.
    pub fn top(&self) -> Option<usize> {
        self.constant("top")
    }

    /// An element above every element, if there is one.
    pub fn greatest(&self) -> Option<usize> {
        (0..self.n).find(|&g| self.down[g] == self.universe())
    }

    pub fn with_constants(&self, constants: BTreeMap<String, usize>) -> Result<Self> {
        FiniteAlgebra::from_table(self.names.clone(), self.table(), constants, self.box_table.clone())
    }

    pub fn with_constant(&self, name: &str, value: usize) -> Result<Self> {
        let mut c = self.constants.clone();
        c.insert(name.to_string(), value);
        self.with_constants(c)
    }

    pub fn with_box(&self, box_table: Option<Vec<usize>>) -> Result<Self> {
        FiniteAlgebra::from_table(self.names.clone(), self.table(), self.constants.clone(), box_table)
    }

    /// Declares `top` as the greatest element.
    pub fn with_top(&self) -> Result<Self> {
        let g = self.greatest().ok_or_else(|| Error::MissingTop(String::new()))?;
        self.with_constant("top", g)
    }

    /// The bare `{m}` reduct.
    pub fn reduct(&self) -> Self {
        FiniteAlgebra::from_table(self.names.clone(), self.table(), BTreeMap::new(), None)
            .expect("reduct of a valid algebra")
    }

    pub fn with_names(&self, names: Vec<String>) -> Result<Self> {
        FiniteAlgebra::from_table(names, self.table(), self.constants.clone(), self.box_table.clone())
    }

    /// Relabels element `i` as `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut inv = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let mut table = vec![0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    table[(i * n + j) * n + k] = perm[self.m(inv[i], inv[j], inv[k])];
                }
            }
        }
        let names = (0..n).map(|i| self.names[inv[i]].clone()).collect();
        let constants = self.constants.iter().map(|(c, &v)| (c.clone(), perm[v])).collect();
        let box_table = self.box_table.as_ref().map(|b| (0..n).map(|i| perm[b[inv[i]]]).collect());
        FiniteAlgebra::from_table(names, table, constants, box_table).expect("permutation of a valid algebra")
    }

    /// Common lower bounds of a set; the whole universe for the empty set.
    pub fn lower_bounds(&self, s: Subset) -> Subset {
        s.iter().fold(self.universe(), |acc, i| acc.intersection(self.down[i]))
    }

    pub fn upper_bounds(&self, s: Subset) -> Subset {
        s.iter().fold(self.universe(), |acc, i| acc.intersection(self.up[i]))
    }

    /// Greatest element of `s`, if any.
    pub fn greatest_in(&self, s: Subset) -> Option<usize> {
        s.iter().find(|&g| s.is_subset(self.down[g]))
    }

    pub fn least_in(&self, s: Subset) -> Option<usize> {
        s.iter().find(|&g| s.is_subset(self.up[g]))
    }

    /// The meet of `i` and `j` when it exists.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        self.greatest_in(self.down[i].intersection(self.down[j]))
    }

    /// Meet of `i` and `j` inside the upset `[a)`.
    pub fn meet_in_upset(&self, a: usize, i: usize, j: usize) -> Option<usize> {
        self.greatest_in(self.down[i].intersection(self.down[j]).intersection(self.up[a]))
    }

    pub fn is_nearlattice(&self) -> bool {
        *self.cache.nearlattice.get_or_init(|| check_nearlattice(self).passed())
    }

    /// Passes both the nearlattice and distributivity identities.
    pub fn is_distributive_nearlattice(&self) -> bool {
        *self
            .cache
            .distributive
            .get_or_init(|| self.is_nearlattice() && matches!(check_distributive(self), Ok(Verdict::Pass)))
    }
}

/// Checks (P1) over all pairs, then (P2) over all 5-tuples.
pub fn check_nearlattice(a: &FiniteAlgebra) -> Verdict {
    let n = a.size();
    for x in 0..n {
        for y in 0..n {
            if a.m(x, y, x) != x {
                return Verdict::fail(Law::P1, vec![x, y]);
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let xyz = a.m(x, y, z);
                for u in 0..n {
                    let left_inner = a.m(y, a.m(u, x, z), z);
                    let right_inner = a.m(y, a.m(x, u, z), z);
                    for w in 0..n {
                        if a.m(xyz, left_inner, w) != a.m(w, w, right_inner) {
                            return Verdict::fail(Law::P2, vec![x, y, z, u, w]);
                        }
                    }
                }
            }
        }
    }
    Verdict::Pass
}

fn check_p3(a: &FiniteAlgebra) -> Verdict {
    let n = a.size();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let yz = a.join(y, z);
                for w in 0..n {
                    let xyw = a.m(x, y, w);
                    if a.m(x, yz, w) != a.m(xyw, xyw, a.m(x, z, w)) {
                        return Verdict::fail(Law::P3, vec![x, y, z, w]);
                    }
                }
            }
        }
    }
    Verdict::Pass
}

fn check_p4(a: &FiniteAlgebra) -> Verdict {
    let n = a.size();
    for x in 0..n {
        for y in 0..n {
            let xy = a.join(x, y);
            for z in 0..n {
                let xz = a.join(x, z);
                for w in 0..n {
                    if a.join(x, a.m(y, z, w)) != a.m(xy, xz, w) {
                        return Verdict::fail(Law::P4, vec![x, y, z, w]);
                    }
                }
            }
        }
    }
    Verdict::Pass
}

/// Checks that each upset `[a)` is a lattice under `m(x,x,y)` and the induced meet, and that the
/// lattice is distributive. Witness values are `[a, x, y]` or `[a, x, y, z]`.
pub fn check_upset_distributivity(a: &FiniteAlgebra) -> Verdict {
    let n = a.size();
    for base in 0..n {
        let up: Vec<usize> = a.up(base).iter().collect();
        let mut meet = vec![usize::MAX; n * n];
        for &x in &up {
            for &y in &up {
                match a.meet_in_upset(base, x, y) {
                    Some(v) => meet[x * n + y] = v,
                    None => return Verdict::fail(Law::UpsetIsLattice, vec![base, x, y]),
                }
            }
        }
        for &x in &up {
            for &y in &up {
                for &z in &up {
                    let lhs = meet[x * n + a.join(y, z)];
                    let rhs = a.join(meet[x * n + y], meet[x * n + z]);
                    if lhs != rhs {
                        return Verdict::fail(Law::UpsetDistributive, vec![base, x, y, z]);
                    }
                }
            }
        }
    }
    Verdict::Pass
}

/// The order route: the derived relation is a partial order, `m(x,x,y)` is the least upper
/// bound, every upset is a lattice and `m(x,y,a) = (x|a) meet_a (y|a)`.
pub fn check_order_form(a: &FiniteAlgebra) -> Verdict {
    let n = a.size();
    let order = (|| {
        for i in 0..n {
            if !a.leq(i, i) {
                return Verdict::fail(Law::PartialOrder, vec![i]);
            }
            for j in 0..n {
                if i != j && a.leq(i, j) && a.leq(j, i) {
                    return Verdict::fail(Law::PartialOrder, vec![i, j]);
                }
                for k in 0..n {
                    if a.leq(i, j) && a.leq(j, k) && !a.leq(i, k) {
                        return Verdict::fail(Law::PartialOrder, vec![i, j, k]);
                    }
                }
            }
        }
        Verdict::Pass
    })();
    order
        .and_then(|| {
            for i in 0..n {
                for j in 0..n {
                    let ub = a.up(i).intersection(a.up(j));
                    if a.least_in(ub) != Some(a.join(i, j)) {
                        return Verdict::fail(Law::JoinIsLeastUpperBound, vec![i, j]);
                    }
                }
            }
            Verdict::Pass
        })
        .and_then(|| {
            for base in 0..n {
                for x in a.up(base).iter() {
                    for y in a.up(base).iter() {
                        if a.meet_in_upset(base, x, y).is_none() {
                            return Verdict::fail(Law::UpsetIsLattice, vec![base, x, y]);
                        }
                    }
                }
            }
            Verdict::Pass
        })
        .and_then(|| {
            for x in 0..n {
                for y in 0..n {
                    for base in 0..n {
                        let expect = a.meet_in_upset(base, a.join(x, base), a.join(y, base));
                        if expect != Some(a.m(x, y, base)) {
                            return Verdict::fail(Law::MeetOfJoins, vec![x, y, base]);
                        }
                    }
                }
            }
            Verdict::Pass
        })
}

/// Outcome of the three distributivity checks on a nearlattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributiveReport {
    pub p3: Verdict,
    pub p4: Verdict,
    pub upsets: Verdict,
}

pub fn distributive_report(a: &FiniteAlgebra) -> Result<DistributiveReport> {
    if !a.is_nearlattice() {
        return Err(Error::NotNearlattice(describe(a, &check_nearlattice(a))));
    }
    Ok(DistributiveReport { p3: check_p3(a), p4: check_p4(a), upsets: check_upset_distributivity(a) })
}

/// Checks (P3) and (P4) and the upset criterion; any disagreement among them is an error.
pub fn check_distributive(a: &FiniteAlgebra) -> Result<Verdict> {
    let r = distributive_report(a)?;
    if r.p3.passed() != r.p4.passed() {
        return Err(Error::Inconsistency(format!("(P3) gives {:?} but (P4) gives {:?}", r.p3, r.p4)));
    }
    if r.p3.passed() != r.upsets.passed() {
        return Err(Error::Inconsistency(format!(
            "identities give {:?} but the upset criterion gives {:?}",
            r.p3, r.upsets
        )));
    }
    Ok(if r.p3.passed() { r.p4 } else { r.p3 })
}

/// Human-readable form of a verdict, with element names.
pub fn describe(a: &FiniteAlgebra, v: &Verdict) -> String {
    match v {
        Verdict::Pass => "pass".into(),
        Verdict::Fail(w) => {
            let vals: Vec<&str> = w.values.iter().map(|&i| a.name(i)).collect();
            format!("fail: {} at ({})", w.law, vals.join(", "))
        }
    }
}

/// Builds the algebra of a finite join-semilattice whose upsets are lattices, with
/// `m(x,y,a) = (x|a) meet_a (y|a)`. `covers` lists pairs `(lower, upper)`.
pub fn from_hasse(
    names: Vec<String>,
    covers: &[(usize, usize)],
    constants: BTreeMap<String, usize>,
    box_table: Option<Vec<usize>>,
) -> Result<FiniteAlgebra> {
    let n = names.len();
    if n == 0 {
        return Err(Error::InvalidAlgebra("empty universe".into()));
    }
    if n > MAX_SIZE {
        return Err(Error::SizeGuard { what: "algebra", size: n, limit: MAX_SIZE });
    }
    let mut up: Vec<Subset> = (0..n).map(Subset::singleton).collect();
    for &(lo, hi) in covers {
        if lo >= n || hi >= n {
            return Err(Error::InvalidAlgebra(format!("cover {lo} < {hi} is out of range")));
        }
        if lo == hi {
            return Err(Error::Cycle(names[lo].clone()));
        }
        up[lo] = up[lo].with(hi);
    }
    // transitive closure
    loop {
        let mut changed = false;
        for i in 0..n {
            let reach = up[i].iter().fold(up[i], |acc, j| acc.union(up[j]));
            if reach != up[i] {
                up[i] = reach;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for i in 0..n {
        for j in up[i].without(i).iter() {
            if up[j].contains(i) {
                return Err(Error::Cycle(names[i].clone()));
            }
        }
    }
    from_order(names, &up, constants, box_table)
}

/// Same as [`from_hasse`] but takes the order as up-sets (`up[i]` contains `j` iff `i <= j`).
pub fn from_order(
    names: Vec<String>,
    up: &[Subset],
    constants: BTreeMap<String, usize>,
    box_table: Option<Vec<usize>>,
) -> Result<FiniteAlgebra> {
    let n = names.len();
    let mut down = vec![Subset::EMPTY; n];
    for (i, u) in up.iter().enumerate().take(n) {
        for j in u.iter() {
            down[j] = down[j].with(i);
        }
    }
    let least = |s: Subset| s.iter().find(|&g| s.is_subset(up[g]));
    let greatest = |s: Subset| s.iter().find(|&g| s.is_subset(down[g]));
    let mut join = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            join[i * n + j] =
                least(up[i].intersection(up[j])).ok_or_else(|| Error::NoJoin(names[i].clone(), names[j].clone()))?;
        }
    }
    let mut meet_at = vec![0; n * n * n];
    for a in 0..n {
        for x in up[a].iter() {
            for y in up[a].iter() {
                let lb = down[x].intersection(down[y]).intersection(up[a]);
                meet_at[(a * n + x) * n + y] = greatest(lb)
                    .ok_or_else(|| Error::UpsetNotLattice(names[a].clone(), names[x].clone(), names[y].clone()))?;
            }
        }
    }
    let mut table = vec![0; n * n * n];
    for x in 0..n {
        for y in 0..n {
            for a in 0..n {
                table[(x * n + y) * n + a] = meet_at[(a * n + join[x * n + a]) * n + join[y * n + a]];
            }
        }
    }
    FiniteAlgebra::from_table(names, table, constants, box_table)
}

/// A term compiled against one algebra: constants resolved, variables mapped to slots.
#[derive(Clone, Debug)]
pub struct CompiledTerm {
    ops: Vec<Op>,
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Slot(usize),
    Elem(usize),
    M,
    Box,
}

impl CompiledTerm {
    /// `vars[s]` is the variable stored in slot `s`.
    pub fn compile(a: &FiniteAlgebra, t: &Term, vars: &[u32]) -> Result<Self> {
        let mut ops = Vec::new();
        fn walk(a: &FiniteAlgebra, t: &Term, vars: &[u32], ops: &mut Vec<Op>) -> Result<()> {
            match t {
                Term::Var(v) => {
                    let s = vars.iter().position(|w| w == v).ok_or(Error::UnassignedVariable(*v))?;
                    ops.push(Op::Slot(s));
                }
                Term::Const(c) => {
                    let e = a.constant(c).ok_or_else(|| Error::UndeclaredConstant(c.to_string()))?;
                    ops.push(Op::Elem(e));
                }
                Term::M(args) => {
                    for x in args.iter() {
                        walk(a, x, vars, ops)?;
                    }
                    ops.push(Op::M);
                }
                Term::Box(x) => {
                    if a.box_table().is_none() {
                        return Err(Error::UndeclaredConstant("box".into()));
                    }
                    walk(a, x, vars, ops)?;
                    ops.push(Op::Box);
                }
            }
            Ok(())
        }
        walk(a, t, vars, &mut ops)?;
        Ok(CompiledTerm { ops })
    }

    pub fn eval(&self, a: &FiniteAlgebra, slots: &[usize], stack: &mut Vec<usize>) -> usize {
        stack.clear();
        for op in &self.ops {
            match *op {
                Op::Slot(s) => stack.push(slots[s]),
                Op::Elem(e) => stack.push(e),
                Op::M => {
                    let k = stack.pop().unwrap();
                    let j = stack.pop().unwrap();
                    let i = stack.pop().unwrap();
                    stack.push(a.m(i, j, k));
                }
                Op::Box => {
                    let i = stack.pop().unwrap();
                    stack.push(a.box_of(i).unwrap());
                }
            }
        }
        stack.pop().unwrap()
    }
}

/// Homomorphic evaluation of `t` under `asg`.
pub fn eval_term(a: &FiniteAlgebra, t: &Term, asg: &BTreeMap<u32, usize>) -> Result<usize> {
    match t {
        Term::Var(v) => {
            let i = *asg.get(v).ok_or(Error::UnassignedVariable(*v))?;
            if i >= a.size() {
                return Err(Error::InvalidAlgebra(format!("value {i} for x{v} is out of range")));
            }
            Ok(i)
        }
        Term::Const(c) => a.constant(c).ok_or_else(|| Error::UndeclaredConstant(c.to_string())),
        Term::M(args) => {
            let x = eval_term(a, &args[0], asg)?;
            let y = eval_term(a, &args[1], asg)?;
            let z = eval_term(a, &args[2], asg)?;
            Ok(a.m(x, y, z))
        }
        Term::Box(x) => {
            let v = eval_term(a, x, asg)?;
            a.box_of(v).ok_or_else(|| Error::UndeclaredConstant("box".into()))
        }
    }
}

/// `m^n(args, b)` by the defining recursion, without cross-checks.
pub fn mn_recursive(a: &FiniteAlgebra, args: &[usize], b: usize) -> usize {
    let mut acc = a.join(args[0], b);
    for &x in &args[1..] {
        acc = a.m(acc, x, b);
    }
    acc
}

/// `m^n(args, b)`, checked against `(a0|b) meet_b ... meet_b (an|b)`.
pub fn mn_eval(a: &FiniteAlgebra, args: &[usize], b: usize) -> Result<usize> {
    if args.is_empty() {
        return Err(Error::EmptyArgs);
    }
    if !a.is_distributive_nearlattice() {
        return Err(Error::NotDistributive("m^n needs a distributive nearlattice".into()));
    }
    let rec = mn_recursive(a, args, b);
    let mut meet = a.join(args[0], b);
    for &x in &args[1..] {
        meet = a
            .meet_in_upset(b, meet, a.join(x, b))
            .ok_or_else(|| Error::Inconsistency("upset without a meet".into()))?;
    }
    if rec != meet {
        return Err(Error::Inconsistency(format!("m^n recursion gives {rec}, meet form gives {meet}")));
    }
    Ok(rec)
}

/// Which extra structure a homomorphism must respect.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Preserve {
    pub constants: bool,
    pub box_op: bool,
}

impl Preserve {
    pub const M_ONLY: Preserve = Preserve { constants: false, box_op: false };
    pub const ALL: Preserve = Preserve { constants: true, box_op: true };
}

pub fn is_homomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra, h: &[usize], p: Preserve) -> bool {
    let n = a.size();
    if h.len() != n || h.iter().any(|&v| v >= b.size()) {
        return false;
    }
    if p.constants {
        for (c, &v) in a.constants() {
            if b.constant(c) != Some(h[v]) {
                return false;
            }
        }
    }
    if p.box_op {
        if let Some(bx) = a.box_table() {
            let Some(by) = b.box_table() else { return false };
            if (0..n).any(|i| h[bx[i]] != by[h[i]]) {
                return false;
            }
        }
    }
    (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| h[a.m(i, j, k)] == b.m(h[i], h[j], h[k]))))
}

/// All maps `A -> B` that preserve `m`, plus constants and box as requested. Maps are listed
/// in lexicographic order.
pub fn find_homomorphisms(a: &FiniteAlgebra, b: &FiniteAlgebra, p: Preserve) -> Vec<Vec<usize>> {
    let n = a.size();
    let mut out = Vec::new();
    let mut h = vec![usize::MAX; n];
    if p.constants && a.constants().keys().any(|c| b.constant(c).is_none()) {
        return out;
    }
    if p.box_op && a.box_table().is_some() && b.box_table().is_none() {
        return out;
    }
    // Checks every constraint whose largest involved index is `k`.
    fn consistent(a: &FiniteAlgebra, b: &FiniteAlgebra, h: &[usize], k: usize, p: Preserve) -> bool {
        if p.constants {
            for (c, &v) in a.constants() {
                if v == k && b.constant(c) != Some(h[v]) {
                    return false;
                }
            }
        }
        if p.box_op {
            if let (Some(bx), Some(by)) = (a.box_table(), b.box_table()) {
                for i in 0..=k {
                    if i.max(bx[i]) == k && h[bx[i]] != by[h[i]] {
                        return false;
                    }
                }
            }
        }
        for i in 0..=k {
            for j in 0..=k {
                for l in 0..=k {
                    let v = a.m(i, j, l);
                    if v <= k && i.max(j).max(l).max(v) == k && h[v] != b.m(h[i], h[j], h[l]) {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn go(a: &FiniteAlgebra, b: &FiniteAlgebra, h: &mut Vec<usize>, k: usize, p: Preserve, out: &mut Vec<Vec<usize>>) {
        if k == a.size() {
            if is_homomorphism(a, b, h, p) {
                out.push(h.clone());
            }
            return;
        }
        for v in 0..b.size() {
            h[k] = v;
            if consistent(a, b, h, k, p) {
                go(a, b, h, k + 1, p, out);
            }
        }
        h[k] = usize::MAX;
    }
    go(a, b, &mut h, 0, p, &mut out);
    out
}

/// A finite list of algebras, each validated on entry.
#[derive(Clone, Debug, Default)]
pub struct AlgebraClass {
    members: Vec<FiniteAlgebra>,
}

impl AlgebraClass {
    /// Every member must be a distributive nearlattice.
    pub fn new(members: Vec<FiniteAlgebra>) -> Result<Self> {
        for (i, a) in members.iter().enumerate() {
            if !a.is_nearlattice() {
                return Err(Error::NotNearlattice(format!("member {i}: {}", describe(a, &check_nearlattice(a)))));
            }
            let v = check_distributive(a)?;
            if !v.passed() {
                return Err(Error::NotDistributive(format!("member {i}: {}", describe(a, &v))));
            }
        }
        Ok(AlgebraClass { members })
    }

    /// Only the nearlattice identities are required; used to audit non-distributive examples.
    pub fn nearlattices(members: Vec<FiniteAlgebra>) -> Result<Self> {
        for (i, a) in members.iter().enumerate() {
            if !a.is_nearlattice() {
                return Err(Error::NotNearlattice(format!("member {i}: {}", describe(a, &check_nearlattice(a)))));
            }
        }
        Ok(AlgebraClass { members })
    }

    pub fn members(&self) -> &[FiniteAlgebra] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: &FiniteAlgebra) -> bool {
        self.members.iter().any(|b| b == a)
    }

    /// Same members with `top` declared on each.
    pub fn with_tops(&self) -> Result<Self> {
        let members = self
            .members
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if a.top().is_some() {
                    Ok(a.clone())
                } else {
                    a.with_top().map_err(|_| Error::MissingTop(format!(" on member {i}")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(AlgebraClass { members })
    }
}
