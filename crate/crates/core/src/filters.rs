//! Filters and Frink filters of finite nearlattices.

use itertools::Itertools;

use crate::algebra::{mn_eval, mn_recursive, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::subset::Subset;

pub const FILTER_SIZE_LIMIT: usize = 20;

/// A nonempty up-closed subset closed under the meets that exist.
#[derive(Clone, Copy, Debug)]
pub struct Filter<'a> {
    carrier: Subset,
    parent: &'a FiniteAlgebra,
}

/// A subset containing `X^lu` for each of its finite subsets `X`.
#[derive(Clone, Copy, Debug)]
pub struct FrinkFilter<'a> {
    carrier: Subset,
    parent: &'a FiniteAlgebra,
}

macro_rules! carrier_accessors {
    ($t:ident) => {
        impl<'a> $t<'a> {
            pub fn carrier(&self) -> Subset {
                self.carrier
            }

            pub fn parent(&self) -> &'a FiniteAlgebra {
                self.parent
            }

            pub fn contains(&self, i: usize) -> bool {
                self.carrier.contains(i)
            }

            pub fn element_names(&self) -> Vec<&'a str> {
                self.carrier.iter().map(|i| self.parent.name(i)).collect()
            }
        }

        impl PartialEq for $t<'_> {
            fn eq(&self, other: &Self) -> bool {
                self.carrier == other.carrier && std::ptr::eq(self.parent, other.parent)
            }
        }
    };
}

carrier_accessors!(Filter);
carrier_accessors!(FrinkFilter);

fn up_closed(a: &FiniteAlgebra, s: Subset) -> bool {
    s.iter().all(|i| a.up(i).is_subset(s))
}

/// Nonempty, up-closed, and `a meet b` is in `s` whenever it exists for `a, b` in `s`.
pub fn is_filter_def(a: &FiniteAlgebra, s: Subset) -> bool {
    !s.is_empty() && up_closed(a, s) && s.iter().all(|i| s.iter().all(|j| a.meet(i, j).is_none_or(|c| s.contains(c))))
}

/// Nonempty and `m(x,y,c)` is in `s` for all `x, y` in `s` and every `c`.
pub fn is_filter_m(a: &FiniteAlgebra, s: Subset) -> bool {
    let n = a.size();
    !s.is_empty() && s.iter().all(|i| s.iter().all(|j| (0..n).all(|c| s.contains(a.m(i, j, c)))))
}

pub fn is_filter(a: &FiniteAlgebra, s: Subset) -> bool {
    let by_def = is_filter_def(a, s);
    if a.is_nearlattice() {
        assert_eq!(by_def, is_filter_m(a, s), "filter criteria disagree on {s:?}");
    }
    by_def
}

/// Up-closure `[X)`.
pub fn upset_of(a: &FiniteAlgebra, x: Subset) -> Subset {
    x.iter().fold(Subset::EMPTY, |acc, i| acc.union(a.up(i)))
}

/// Elements that are meets of finitely many members of `[X)`. Such an `e` is the
/// meet of all of `[X)` above it, so that is what gets tested.
pub fn generated_filter<'a>(a: &'a FiniteAlgebra, x: Subset) -> Result<Filter<'a>> {
    if x.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let upset = upset_of(a, x);
    let carrier = Subset::from_indices((0..a.size()).filter(|&e| {
        let above = upset.intersection(a.up(e));
        !above.is_empty() && a.greatest_in(a.lower_bounds(above)) == Some(e)
    }));
    Ok(Filter { carrier, parent: a })
}

fn guard(a: &FiniteAlgebra, what: &'static str) -> Result<()> {
    if a.size() > FILTER_SIZE_LIMIT {
        return Err(Error::SizeGuard { what, size: a.size(), limit: FILTER_SIZE_LIMIT });
    }
    Ok(())
}

/// All filters, by ascending bitmask.
pub fn all_filters(a: &FiniteAlgebra) -> Result<Vec<Filter<'_>>> {
    guard(a, "filter enumeration")?;
    Ok(a.universe()
        .subsets()
        .filter(|&s| up_closed(a, s) && is_filter(a, s))
        .map(|carrier| Filter { carrier, parent: a })
        .collect())
}

fn frink_holds_for(a: &FiniteAlgebra, s: Subset, x: Subset) -> bool {
    a.upper_bounds(a.lower_bounds(x)).is_subset(s)
}

/// Frink condition over `X` empty and every `X` of at most three elements.
fn frink_bounded(a: &FiniteAlgebra, s: Subset) -> bool {
    if !frink_holds_for(a, s, Subset::EMPTY) {
        return false;
    }
    let el: Vec<usize> = s.iter().collect();
    for (p, &i) in el.iter().enumerate() {
        if !frink_holds_for(a, s, Subset::singleton(i)) {
            return false;
        }
        for (q, &j) in el.iter().enumerate().skip(p) {
            let ij = Subset::from_indices([i, j]);
            if !frink_holds_for(a, s, ij) {
                return false;
            }
            for &k in &el[q..] {
                if !frink_holds_for(a, s, ij.with(k)) {
                    return false;
                }
            }
        }
    }
    true
}

fn frink_full(a: &FiniteAlgebra, s: Subset) -> bool {
    s.subsets().all(|x| frink_holds_for(a, s, x))
}

pub fn is_frink_filter(a: &FiniteAlgebra, s: Subset) -> bool {
    let bounded = frink_bounded(a, s);
    if a.size() <= 5 {
        assert_eq!(bounded, frink_full(a, s), "bounded Frink check is not stable on {s:?}");
    }
    bounded
}

/// All Frink filters (the empty set included when it qualifies), by ascending bitmask.
pub fn all_frink_filters(a: &FiniteAlgebra) -> Result<Vec<FrinkFilter<'_>>> {
    guard(a, "Frink filter enumeration")?;
    let family: Vec<Subset> = a.universe().subsets().filter(|&s| is_frink_filter(a, s)).collect();
    assert!(family.contains(&a.universe()), "universe is not a Frink filter");
    for &f in &family {
        for &g in &family {
            assert!(family.contains(&f.intersection(g)), "Frink filters not closed under intersection");
        }
    }
    Ok(family.into_iter().map(|carrier| FrinkFilter { carrier, parent: a }).collect())
}

/// Distributivity of a finite intersection-closed family ordered by inclusion.
pub fn closure_lattice_is_distributive(family: &[Subset]) -> bool {
    let join = |f: Subset, g: Subset| {
        let u = f.union(g);
        family
            .iter()
            .copied()
            .filter(|&h| u.is_subset(h))
            .min_by_key(|h| h.len())
            .expect("family contains an upper bound")
    };
    family.iter().all(|&x| {
        family
            .iter()
            .all(|&y| family.iter().all(|&z| x.intersection(join(y, z)) == join(x.intersection(y), x.intersection(z))))
    })
}

pub fn frink_lattice_is_distributive(a: &FiniteAlgebra) -> Result<bool> {
    let family: Vec<Subset> = all_frink_filters(a)?.iter().map(|f| f.carrier()).collect();
    Ok(closure_lattice_is_distributive(&family))
}

/// A tuple breaking one of the seven `m^n` properties; `item` numbers them in the order
/// meet form, `b` below, common lower bound, fewer arguments is larger, permutation
/// invariance, filter transfer, filter membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MnViolation {
    pub item: u8,
    pub args: Vec<usize>,
    pub b: usize,
}

/// Checks every `m^n` property for all argument tuples with `n <= max_n` and every `b`.
pub fn check_mn_properties(a: &FiniteAlgebra, max_n: usize) -> Result<Option<MnViolation>> {
    guard(a, "m^n property check")?;
    let n = a.size();
    let mut fi = std::collections::HashMap::new();
    let mut fi_of = |x: Subset| -> Result<Subset> {
        if let Some(&f) = fi.get(&x.0) {
            return Ok(f);
        }
        let f = generated_filter(a, x)?.carrier();
        fi.insert(x.0, f);
        Ok(f)
    };
    for len in 1..=max_n + 1 {
        for args in itertools::repeat_n(0..n, len).multi_cartesian_product() {
            let gens = Subset::from_indices(args.iter().copied());
            let fi_args = fi_of(gens)?;
            for b in 0..n {
                let bad = |item| Ok(Some(MnViolation { item, args: args.clone(), b }));
                let v = match mn_eval(a, &args, b) {
                    Ok(v) => v,
                    Err(Error::Inconsistency(_)) => return bad(1),
                    Err(e) => return Err(e),
                };
                if !a.leq(b, v) {
                    return bad(2);
                }
                if (0..n).any(|c| args.iter().all(|&x| a.leq(c, x)) && !a.leq(c, v)) {
                    return bad(3);
                }
                if len <= max_n && (0..n).any(|x| !a.leq(mn_recursive(a, &[args.as_slice(), &[x]].concat(), b), v)) {
                    return bad(4);
                }
                if args.iter().copied().permutations(len).any(|p| mn_recursive(a, &p, b) != v) {
                    return bad(5);
                }
                let at_b = mn_recursive(a, &args, b);
                if fi_args.contains(b) && !fi_of(Subset::singleton(at_b))?.contains(b) {
                    return bad(6);
                }
                if fi_args.contains(b) != (at_b == b) {
                    return bad(7);
                }
            }
        }
    }
    Ok(None)
}
