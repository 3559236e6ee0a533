//! Distributive nearlattices and their modal expansions up to isomorphism.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::algebra::{check_distributive, check_upset_distributivity, from_order, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::modal::{box_tables_fixing_top, check_modal, ModalAlgebra};
use crate::subset::Subset;

/// Largest size the order-based generator accepts.
pub const DN_SIZE_LIMIT: usize = 7;
/// Largest size the raw-table search accepts.
pub const RAW_SIZE_LIMIT: usize = 4;

/// Table, constants and box of an algebra after canonical relabelling.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub table: Vec<u8>,
    pub constants: Vec<(String, u8)>,
    pub box_table: Option<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    /// Element `i` is relabelled `relabel[i]`.
    pub relabel: Vec<usize>,
    pub key: CanonicalKey,
}

impl CanonicalForm {
    pub fn apply(&self, a: &FiniteAlgebra) -> FiniteAlgebra {
        a.permute(&self.relabel)
    }
}

type Invariant = (usize, usize, usize, Vec<String>, bool, usize);

fn invariant(a: &FiniteAlgebra, i: usize) -> Invariant {
    let n = a.size();
    let hits = a.table().iter().filter(|&&v| v == i).count();
    let consts = a.constants().iter().filter(|(_, &v)| v == i).map(|(c, _)| c.clone()).collect();
    let (fixed, preimages) = match a.box_table() {
        Some(b) => (b[i] == i, (0..n).filter(|&j| b[j] == i).count()),
        None => (false, 0),
    };
    (a.down(i).len(), a.up(i).len(), hits, consts, fixed, preimages)
}

/// Lexicographically least relabelled table, searching only relabellings that sort elements
/// by an isomorphism invariant.
pub fn canonical_form(a: &FiniteAlgebra) -> CanonicalForm {
    let n = a.size();
    let invs: Vec<Invariant> = (0..n).map(|i| invariant(a, i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| invs[x].cmp(&invs[y]));
    let mut search =
        Relabel { a, invs: &invs, order: &order, inv: vec![usize::MAX; n], used: vec![false; n], best: None };
    search.rec(0);
    let (key, relabel) = search.best.expect("at least one relabelling");
    CanonicalForm { relabel, key }
}

struct Relabel<'a> {
    a: &'a FiniteAlgebra,
    invs: &'a [Invariant],
    order: &'a [usize],
    /// new label -> old element
    inv: Vec<usize>,
    used: Vec<bool>,
    best: Option<(CanonicalKey, Vec<usize>)>,
}

impl Relabel<'_> {
    fn rec(&mut self, slot: usize) {
        let n = self.a.size();
        if slot == n {
            let mut perm = vec![0; n];
            for (new, &old) in self.inv.iter().enumerate() {
                perm[old] = new;
            }
            if let Some(key) = key_under(self.a, &perm, &self.inv, self.best.as_ref().map(|b| &b.0)) {
                if self.best.as_ref().is_none_or(|b| key < b.0) {
                    self.best = Some((key, perm));
                }
            }
            return;
        }
        let want = &self.invs[self.order[slot]];
        for idx in 0..n {
            let old = self.order[idx];
            if self.used[old] || &self.invs[old] != want {
                continue;
            }
            self.used[old] = true;
            self.inv[slot] = old;
            self.rec(slot + 1);
            self.used[old] = false;
        }
    }
}

/// Key of `a` under `perm`, or `None` as soon as it is known to exceed `bound`.
fn key_under(a: &FiniteAlgebra, perm: &[usize], inv: &[usize], bound: Option<&CanonicalKey>) -> Option<CanonicalKey> {
    let n = a.size();
    let mut table = Vec::with_capacity(n * n * n);
    let mut tied = bound.is_some();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = perm[a.m(inv[i], inv[j], inv[k])] as u8;
                if tied {
                    let b = bound.unwrap().table[table.len()];
                    if v > b {
                        return None;
                    }
                    tied = v == b;
                }
                table.push(v);
            }
        }
    }
    let constants = a.constants().iter().map(|(c, &v)| (c.clone(), perm[v] as u8)).collect();
    let box_table = a.box_table().map(|b| (0..n).map(|i| perm[b[inv[i]]] as u8).collect());
    Some(CanonicalKey { table, constants, box_table })
}

/// The algebra a canonical key describes, with elements named `e0, e1, ...`.
pub fn algebra_from_key(key: &CanonicalKey) -> Result<FiniteAlgebra> {
    let n = (key.table.len() as f64).cbrt().round() as usize;
    let names = (0..n).map(|i| format!("e{i}")).collect();
    let constants: BTreeMap<String, usize> = key.constants.iter().map(|(c, v)| (c.clone(), *v as usize)).collect();
    let box_table = key.box_table.as_ref().map(|b| b.iter().map(|&v| v as usize).collect());
    FiniteAlgebra::from_table(names, key.table.iter().map(|&v| v as usize).collect(), constants, box_table)
}

fn check_size(size: usize, limit: usize, what: &'static str) -> Result<()> {
    if size == 0 || size > limit {
        Err(Error::SizeGuard { what, size, limit })
    } else {
        Ok(())
    }
}

fn dedup(keys: impl IntoIterator<Item = CanonicalKey>) -> Result<Vec<FiniteAlgebra>> {
    let mut keys: Vec<CanonicalKey> = keys.into_iter().collect();
    keys.sort();
    keys.dedup();
    keys.iter().map(algebra_from_key).collect()
}

/// Every distributive nearlattice of the given size, one per isomorphism class, sorted by
/// canonical key. Built by adding a new minimal element below a nonempty up-closed set of
/// each smaller member.
pub fn enumerate_dn(size: usize) -> Result<Vec<FiniteAlgebra>> {
    check_size(size, DN_SIZE_LIMIT, "distributive nearlattice enumeration")?;
    let mut level = dedup([canonical_form(&FiniteAlgebra::chain(1)?).key])?;
    for n in 2..=size {
        let keys: Vec<CanonicalKey> = level
            .par_iter()
            .flat_map_iter(|parent| extensions(parent).into_iter())
            .map(|a| canonical_form(&a).key)
            .collect();
        level = dedup(keys)?;
        debug_assert!(level.iter().all(|a| a.size() == n));
    }
    for a in &level {
        if !a.is_nearlattice() || !check_distributive(a)?.passed() {
            return Err(Error::Inconsistency("generated order fails the identities".into()));
        }
    }
    Ok(level)
}

fn extensions(parent: &FiniteAlgebra) -> Vec<FiniteAlgebra> {
    let n = parent.size();
    let mut out = Vec::new();
    for u in Subset::full(n).subsets() {
        if u.is_empty() || u.iter().any(|i| !parent.up(i).is_subset(u)) {
            continue;
        }
        let mut up: Vec<Subset> = (0..n).map(|i| parent.up(i)).collect();
        up.push(u.with(n));
        let names = (0..=n).map(|i| format!("e{i}")).collect();
        if let Ok(a) = from_order(names, &up, BTreeMap::new(), None) {
            if check_upset_distributivity(&a).passed() {
                out.push(a);
            }
        }
    }
    out
}

/// All distributive nearlattices of every size up to `max`, smallest first.
pub fn catalog_up_to(max: usize) -> Result<Vec<FiniteAlgebra>> {
    let mut out = Vec::new();
    for n in 1..=max {
        out.extend(enumerate_dn(n)?);
    }
    Ok(out)
}

/// Second oracle: searches raw `n^3` tables for those satisfying (P1)-(P4), then keeps one
/// table per isomorphism class.
pub fn raw_table_catalog(size: usize) -> Result<Vec<FiniteAlgebra>> {
    check_size(size, RAW_SIZE_LIMIT, "raw table search")?;
    let mut search = RawSearch::new(size);
    search.run();
    let keys = search
        .solutions
        .into_iter()
        .map(|t| {
            let names = (0..size).map(|i| format!("e{i}")).collect();
            let a = FiniteAlgebra::from_table(names, t, BTreeMap::new(), None)?;
            Ok(canonical_form(&a).key)
        })
        .collect::<Result<Vec<_>>>()?;
    dedup(keys)
}

const UNSET: u8 = u8::MAX;

#[derive(Clone, Copy)]
enum Instance {
    P2([u8; 5]),
    P3([u8; 4]),
    P4([u8; 4]),
}

struct RawSearch {
    n: usize,
    table: Vec<u8>,
    free: Vec<usize>,
    pending: Vec<Vec<Instance>>,
    trail: Vec<usize>,
    solutions: Vec<Vec<usize>>,
}

impl RawSearch {
    fn new(n: usize) -> Self {
        let mut table = vec![UNSET; n * n * n];
        let mut free = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = (i * n + j) * n + k;
                    if i == k {
                        table[c] = i as u8; // (P1)
                    } else {
                        free.push(c);
                    }
                }
            }
        }
        RawSearch { n, table, free, pending: vec![Vec::new(); n * n * n], trail: Vec::new(), solutions: Vec::new() }
    }

    fn get(&self, i: usize, j: usize, k: usize) -> Result<usize, usize> {
        let c = (i * self.n + j) * self.n + k;
        match self.table[c] {
            UNSET => Err(c),
            v => Ok(v as usize),
        }
    }

    /// `Ok(holds)` or `Err(cell)` naming an unassigned cell the instance depends on.
    fn eval(&self, inst: Instance) -> Result<bool, usize> {
        match inst {
            Instance::P2(t) => {
                let [x, y, z, u, w] = t.map(usize::from);
                let a = self.get(x, y, z)?;
                let b = self.get(y, self.get(u, x, z)?, z)?;
                let l = self.get(a, b, w)?;
                let c = self.get(y, self.get(x, u, z)?, z)?;
                Ok(l == self.get(w, w, c)?)
            }
            Instance::P3(t) => {
                let [x, y, z, w] = t.map(usize::from);
                let l = self.get(x, self.get(y, y, z)?, w)?;
                let a = self.get(x, y, w)?;
                Ok(l == self.get(a, a, self.get(x, z, w)?)?)
            }
            Instance::P4(t) => {
                let [x, y, z, w] = t.map(usize::from);
                let l = self.get(x, x, self.get(y, z, w)?)?;
                Ok(l == self.get(self.get(x, x, y)?, self.get(x, x, z)?, w)?)
            }
        }
    }

    fn run(&mut self) {
        let n = self.n as u8;
        let mut all = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        all.push(Instance::P3([x, y, z, w]));
                        all.push(Instance::P4([x, y, z, w]));
                        for u in 0..n {
                            all.push(Instance::P2([x, y, z, u, w]));
                        }
                    }
                }
            }
        }
        for inst in all {
            match self.eval(inst) {
                Ok(true) => {}
                Ok(false) => return,
                Err(c) => self.pending[c].push(inst),
            }
        }
        self.descend(0);
    }

    fn descend(&mut self, pos: usize) {
        if pos == self.free.len() {
            self.solutions.push(self.table.iter().map(|&v| v as usize).collect());
            return;
        }
        let c = self.free[pos];
        for v in 0..self.n {
            self.table[c] = v as u8;
            let mark = self.trail.len();
            let mut ok = true;
            for idx in 0..self.pending[c].len() {
                let inst = self.pending[c][idx];
                match self.eval(inst) {
                    Ok(true) => {}
                    Ok(false) => {
                        ok = false;
                        break;
                    }
                    Err(c2) => {
                        self.pending[c2].push(inst);
                        self.trail.push(c2);
                    }
                }
            }
            if ok {
                self.descend(pos + 1);
            }
            while self.trail.len() > mark {
                let c2 = self.trail.pop().unwrap();
                self.pending[c2].pop();
            }
        }
        self.table[c] = UNSET;
    }
}

/// For each member (which must have a greatest element), every box table passing the modal
/// conditions, one per isomorphism class of the expanded algebra. Members get `top` declared.
pub fn enumerate_modal(base: &[FiniteAlgebra]) -> Result<Vec<FiniteAlgebra>> {
    let mut out = Vec::new();
    for (i, a) in base.iter().enumerate() {
        let with_top = match a.top() {
            Some(_) => a.clone(),
            None => a.with_top().map_err(|_| Error::MissingTop(format!(" on member {i}")))?,
        };
        let keys = box_tables_fixing_top(&with_top)?
            .into_par_iter()
            .filter_map(|t| {
                let m = ModalAlgebra::from_parts(&with_top, t).ok()?;
                check_modal(&m).passed().then(|| canonical_form(m.algebra()).key)
            })
            .collect::<Vec<_>>();
        out.extend(dedup(keys)?);
    }
    Ok(out)
}

/// Modal expansions of every distributive nearlattice of the given size.
pub fn enumerate_modal_size(size: usize) -> Result<Vec<FiniteAlgebra>> {
    enumerate_modal(&enumerate_dn(size)?)
}

/// Number of algebras of each size in a list.
pub fn counts_by_size(algebras: &[FiniteAlgebra]) -> BTreeMap<usize, usize> {
    let mut m: HashMap<usize, usize> = HashMap::new();
    for a in algebras {
        *m.entry(a.size()).or_default() += 1;
    }
    m.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::from_hasse;
    use itertools::Itertools;

    fn fig2() -> FiniteAlgebra {
        let names = ["a", "b", "c", "1"].iter().map(|s| s.to_string()).collect();
        from_hasse(names, &[(0, 3), (1, 3), (2, 3)], BTreeMap::new(), None).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_dn(1).unwrap().len(), 1);
        assert_eq!(enumerate_dn(2).unwrap().len(), 1);
        assert_eq!(enumerate_dn(3).unwrap().len(), 2);
        assert!(enumerate_dn(8).is_err());
        assert!(enumerate_dn(0).is_err());
    }

    #[test]
    fn raw_tables_match_small_sizes() {
        for n in 1..=4 {
            assert_eq!(raw_table_catalog(n).unwrap(), enumerate_dn(n).unwrap(), "size {n}");
        }
    }

    #[test]
    fn fig2_atom_permutations_agree() {
        let a = fig2();
        let base = canonical_form(&a);
        for p in (0..3).permutations(3) {
            let perm = vec![p[0], p[1], p[2], 3];
            assert_eq!(canonical_form(&a.permute(&perm)).key, base.key);
        }
    }

    #[test]
    fn canonical_form_is_idempotent() {
        for a in catalog_up_to(5).unwrap() {
            let once = canonical_form(&a).apply(&a);
            let twice = canonical_form(&once).apply(&once);
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn chain_and_v_differ() {
        let chain = FiniteAlgebra::chain(3).unwrap();
        let names = ["p", "q", "t"].iter().map(|s| s.to_string()).collect();
        let v = from_hasse(names, &[(0, 2), (1, 2)], BTreeMap::new(), None).unwrap();
        assert_ne!(canonical_form(&chain).key, canonical_form(&v).key);
    }

    #[test]
    fn modal_small_cases() {
        let one = enumerate_modal(&enumerate_dn(1).unwrap()).unwrap();
        assert_eq!(one.len(), 1);
        let two = enumerate_modal(&enumerate_dn(2).unwrap()).unwrap();
        // on {0 < 1} with box(1)=1: identity and constant-top both pass, box(0)=... all listed
        let tables: Vec<Vec<usize>> = two.iter().map(|a| a.box_table().unwrap().to_vec()).collect();
        assert!(tables.contains(&vec![0, 1]));
        assert!(tables.contains(&vec![1, 1]));
        assert_eq!(tables.len(), 2);
    }
}
