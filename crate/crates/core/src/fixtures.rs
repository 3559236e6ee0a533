//! The two bundled example algebras.

use crate::algebra::FiniteAlgebra;
use crate::format::parse_algebra;

pub const FIG1_ALG: &str = include_str!("../../../fixtures/fig1.alg");
pub const FIG2_ALG: &str = include_str!("../../../fixtures/fig2.alg");

/// Ten elements `a b c x y z u v w 1`; `u`, `v`, `w` pairwise meet in `x`, `y`, `z`
/// and the minimal elements have no meets.
pub fn fig1() -> FiniteAlgebra {
    parse_algebra(FIG1_ALG).expect("bundled fixture")
}

/// Atoms `a b c` below `1`, with `top = 1`, `bot1 = a`, `bot2 = b`.
pub fn fig2() -> FiniteAlgebra {
    parse_algebra(FIG2_ALG).expect("bundled fixture")
}
