//! Iterated program composition and the bounded decision procedure for
//! refinement between Kleene-star closures of elementary programs.

use crate::program::Program;
use crate::pstring::Join;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LfpError {
    /// The right-hand program contains the empty partial string, so the size
    /// bound on iterations degenerates; the procedure refuses to guess.
    #[error("right-hand program contains the identity (an empty generator)")]
    IdentityInRhs,
    /// The right-hand program has no generators at all.
    #[error("right-hand program is empty (not elementary)")]
    RhsNotElementary,
    #[error("left-hand program is empty (not elementary)")]
    LhsNotElementary,
    #[error("generators do not share a single common size")]
    MixedSizes,
}

/// Outcome of a bounded fixed-point refinement query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfpReport {
    pub holds: bool,
    /// max generator size on the left.
    pub ell_x: usize,
    /// min generator size on the right.
    pub ell_y: usize,
    /// Iteration bound ⌊ell_x / ell_y⌋ actually used.
    pub bound: usize,
    /// True when the left program was 0 and the answer is trivially yes.
    pub empty_lhs: bool,
}

/// P composed with itself n times; n = 0 is the identity program.
pub fn n_iterated(p: &Program, n: usize, join: Join) -> Program {
    let mut acc = Program::one();
    for _ in 0..n {
        acc = p.compose(&acc, join);
    }
    acc
}

/// Union of the first n+1 iterated compositions: an approximation of the
/// star of P from below.
pub fn lfp_approx(p: &Program, n: usize, join: Join) -> Program {
    let mut acc = Program::one();
    let mut power = Program::one();
    for _ in 0..n {
        power = p.compose(&power, join);
        acc = acc.union(&power);
    }
    acc
}

fn check_rhs(y: &Program) -> Result<(), LfpError> {
    if y.is_zero() {
        return Err(LfpError::RhsNotElementary);
    }
    if y.generators().iter().any(|g| g.is_empty()) {
        return Err(LfpError::IdentityInRhs);
    }
    Ok(())
}

fn bounded_query(x: &Program, y: &Program, join: Join) -> Result<LfpReport, LfpError> {
    if x.is_zero() {
        return Ok(LfpReport {
            holds: true,
            ell_x: 0,
            ell_y: 0,
            bound: 0,
            empty_lhs: true,
        });
    }
    check_rhs(y)?;
    let ell_x = x.generators().iter().map(|g| g.len()).max().unwrap_or(0);
    let ell_y = y.generators().iter().map(|g| g.len()).min().unwrap_or(0);
    let bound = ell_x / ell_y;
    let holds = x.refines(&lfp_approx(y, bound, join));
    Ok(LfpReport {
        holds,
        ell_x,
        ell_y,
        bound,
        empty_lhs: false,
    })
}

/// Decide star(X) ⊆ star(Y) through the iteration bound ⌊ℓ_X/ℓ_Y⌋. Requires
/// the identity not to be in Y; X = 0 answers true immediately.
pub fn lfp_refines(x: &Program, y: &Program, join: Join) -> Result<LfpReport, LfpError> {
    bounded_query(x, y, join)
}

/// Decide X ⊆ star(Y); by left-star elimination this is the same bounded
/// query as `lfp_refines`.
pub fn contained_in_star(x: &Program, y: &Program, join: Join) -> Result<LfpReport, LfpError> {
    bounded_query(x, y, join)
}

/// When every generator on both sides has one common size, star refinement
/// collapses to plain program refinement.
pub fn equal_size_shortcut(x: &Program, y: &Program, join: Join) -> Result<bool, LfpError> {
    let _ = join;
    if x.is_zero() {
        return Err(LfpError::LhsNotElementary);
    }
    if y.is_zero() {
        return Err(LfpError::RhsNotElementary);
    }
    let mut sizes = x
        .generators()
        .iter()
        .chain(y.generators())
        .map(|g| g.len());
    let first = sizes.next().expect("both programs nonempty");
    if sizes.any(|s| s != first) {
        return Err(LfpError::MixedSizes);
    }
    Ok(x.refines(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Label;
    use crate::pstring::PartialString;
    use crate::refine::refines;

    fn op(t: &str) -> Label {
        Label::opaque(t)
    }

    fn single(t: &str) -> Program {
        Program::singleton(PartialString::singleton(op(t)))
    }

    #[test]
    fn zero_iteration_is_identity() {
        let a = single("a");
        assert!(n_iterated(&a, 0, Join::Seq).equivalent(&Program::one()));
        assert!(lfp_approx(&a, 0, Join::Par).equivalent(&Program::one()));
    }

    #[test]
    fn two_fold_seq_iteration() {
        let a = single("a");
        let aa = Program::singleton(
            PartialString::singleton(op("a")).seq(&PartialString::singleton(op("a"))),
        );
        assert!(n_iterated(&a, 2, Join::Seq).equivalent(&aa));
    }

    #[test]
    fn iterating_zero_annihilates() {
        for k in 1..4 {
            assert!(n_iterated(&Program::zero(), k, Join::Par).is_zero());
            assert!(n_iterated(&Program::zero(), k, Join::Seq).is_zero());
        }
    }

    #[test]
    fn approx_keeps_each_power() {
        // Sizes differ, so no generator subsumes another: {⊥, a, a;a}.
        let a = single("a");
        let approx = lfp_approx(&a, 2, Join::Seq);
        assert_eq!(approx.generators().len(), 3);
        let sizes: Vec<usize> = {
            let mut v: Vec<usize> = approx.generators().iter().map(|g| g.len()).collect();
            v.sort();
            v
        };
        assert_eq!(sizes, vec![0, 1, 2]);
    }

    #[test]
    fn approx_of_identity_is_identity() {
        for k in 0..4 {
            assert!(lfp_approx(&Program::one(), k, Join::Seq).equivalent(&Program::one()));
            assert!(lfp_approx(&Program::one(), k, Join::Par).equivalent(&Program::one()));
        }
    }

    #[test]
    fn worked_refinement_examples() {
        let a = single("a");
        let aa = Program::singleton(PartialString::chain(vec![op("a"), op("a")]));
        // star({a;a}) ⊆ star({a}) with bound 2.
        let rep = lfp_refines(&aa, &a, Join::Seq).unwrap();
        assert!(rep.holds);
        assert_eq!((rep.ell_x, rep.ell_y, rep.bound), (2, 1, 2));
        // star({a}) ⊄ star({a;a}): bound 0 leaves only the identity.
        let rep = lfp_refines(&a, &aa, Join::Seq).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.bound, 0);
    }

    #[test]
    fn identity_lhs_is_trivial() {
        let a = single("a");
        let rep = lfp_refines(&Program::one(), &a, Join::Seq).unwrap();
        assert!(rep.holds);
        assert_eq!((rep.ell_x, rep.ell_y, rep.bound), (0, 1, 0));
    }

    #[test]
    fn zero_lhs_short_circuits_before_preconditions() {
        let rep = lfp_refines(&Program::zero(), &Program::one(), Join::Seq).unwrap();
        assert!(rep.holds && rep.empty_lhs);
    }

    #[test]
    fn identity_in_rhs_is_an_error() {
        let a = single("a");
        let with_identity = a.union(&Program::one());
        assert_eq!(
            lfp_refines(&a, &with_identity, Join::Seq).unwrap_err(),
            LfpError::IdentityInRhs
        );
        assert_eq!(
            lfp_refines(&a, &Program::zero(), Join::Seq).unwrap_err(),
            LfpError::RhsNotElementary
        );
    }

    #[test]
    fn shortcut_agrees_and_guards_sizes() {
        let a = PartialString::singleton(op("a"));
        let b = PartialString::singleton(op("b"));
        let seq = Program::singleton(a.seq(&b));
        let par = Program::singleton(a.par(&b));
        assert!(equal_size_shortcut(&seq, &par, Join::Seq).unwrap());
        assert!(!equal_size_shortcut(&par, &seq, Join::Seq).unwrap());
        let single_a = Program::singleton(a);
        assert_eq!(
            equal_size_shortcut(&single_a, &seq, Join::Seq).unwrap_err(),
            LfpError::MixedSizes
        );
    }

    #[test]
    fn iterated_composition_adds_exponents() {
        let ab = Program::from_generators(vec![
            PartialString::singleton(op("a")),
            PartialString::chain(vec![op("b"), op("b")]),
        ]);
        for join in [Join::Seq, Join::Par] {
            for (i, j) in [(0, 2), (1, 1), (2, 1)] {
                let lhs = n_iterated(&ab, i, join).compose(&n_iterated(&ab, j, join), join);
                let rhs = n_iterated(&ab, i + j, join);
                assert!(lhs.equivalent(&rhs), "exponent law failed at {i}+{j} {join}");
            }
        }
    }

    #[test]
    fn every_bounded_power_refines_the_approx() {
        let p = Program::from_generators(vec![
            PartialString::singleton(op("a")),
            PartialString::singleton(op("b")),
        ]);
        for join in [Join::Seq, Join::Par] {
            let approx = lfp_approx(&p, 3, join);
            for k in 0..=3 {
                assert!(n_iterated(&p, k, join).refines(&approx));
            }
        }
    }

    #[test]
    fn single_generator_power_matches_string_power() {
        let x = PartialString::chain(vec![op("a"), op("b")]);
        let p = Program::singleton(x.clone());
        for join in [Join::Seq, Join::Par] {
            for k in 0..4 {
                let iterated = n_iterated(&p, k, join);
                assert_eq!(iterated.generators().len(), 1);
                assert!(iterated.generators()[0].is_isomorphic(&x.power(k, join)));
            }
        }
    }

    #[test]
    fn overshoot_memberships_stay_false() {
        // When the bound certifies membership at k ≤ n, maximal generators
        // cannot also appear at n+1 or n+2 (sizes rule it out).
        let a = single("a");
        let aa = Program::singleton(PartialString::chain(vec![op("a"), op("a")]));
        let rep = lfp_refines(&aa, &a, Join::Seq).unwrap();
        assert!(rep.holds);
        for overshoot in [rep.bound + 1, rep.bound + 2] {
            let power = n_iterated(&a, overshoot, Join::Seq);
            for g in aa.generators() {
                assert!(!power.generators().iter().any(|y| refines(g, y)));
            }
        }
    }
}
