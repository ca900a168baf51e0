//! Sorted lexicographical order on non-negative vectors and its pair-valued
//! variant on (cost, load) vectors.

use std::cmp::Ordering;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A non-negative exact cost vector of fixed length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostVector(Vec<Rational>);

impl CostVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self> {
        if let Some((i, v)) = entries.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(Error::validation(
                "non-negativity",
                format!("entry {i} is {v}"),
            ));
        }
        Ok(CostVector(entries))
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }
}

/// Pairs `(cost, load)`, both non-negative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVector(Vec<(Rational, Rational)>);

impl PairVector {
    pub fn new(entries: Vec<(Rational, Rational)>) -> Result<Self> {
        if let Some(i) = entries
            .iter()
            .position(|(c, l)| c.is_negative() || l.is_negative())
        {
            return Err(Error::validation(
                "non-negativity",
                format!("pair {i} has a negative component"),
            ));
        }
        Ok(PairVector(entries))
    }

    pub fn entries(&self) -> &[(Rational, Rational)] {
        &self.0
    }
}

fn total<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Sorts a copy non-increasingly.
pub fn sorted_desc<T: PartialOrd + Clone>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| total(b, a));
    v
}

/// Compares two already non-increasingly sorted slices.
pub fn cmp_sorted<T: PartialOrd>(a: &[T], b: &[T]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| total(x, y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Sorted lexicographic comparison for any partially ordered scalar.
///
/// `Less` means `a` is strictly smaller than `b` once both are sorted
/// non-increasingly.
pub fn sorted_lex_cmp<T: PartialOrd + Clone>(a: &[T], b: &[T]) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(cmp_sorted(&sorted_desc(a), &sorted_desc(b)))
}

pub fn sorted_lex_compare(a: &CostVector, b: &CostVector) -> Result<Ordering> {
    sorted_lex_cmp(a.entries(), b.entries())
}

fn pair_cmp<T: PartialOrd>(a: &(T, T), b: &(T, T)) -> Ordering {
    total(&a.0, &b.0).then_with(|| total(&a.1, &b.1))
}

/// Sorted lexicographic comparison over pairs ordered lexicographically
/// (first component dominant).
pub fn a_lex_cmp<T: PartialOrd + Clone>(a: &[(T, T)], b: &[(T, T)]) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| pair_cmp(y, x));
    sb.sort_by(|x, y| pair_cmp(y, x));
    Ok(sa
        .iter()
        .zip(&sb)
        .map(|(x, y)| pair_cmp(x, y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal))
}

pub fn a_lex_compare(a: &PairVector, b: &PairVector) -> Result<Ordering> {
    a_lex_cmp(a.entries(), b.entries())
}

/// Replaces each value by its rank among the distinct values of `values`.
/// Order comparisons on ranks agree with comparisons on the values.
pub(crate) fn rank_compress(values: &[Rational]) -> Vec<u32> {
    let mut distinct: Vec<&Rational> = values.iter().collect();
    distinct.sort();
    distinct.dedup();
    values
        .iter()
        .map(|v| distinct.binary_search(&v).expect("value present") as u32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn cv(v: &[i64]) -> CostVector {
        CostVector::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    fn pv(v: &[(i64, i64)]) -> PairVector {
        PairVector::new(v.iter().map(|&(a, b)| (int(a), int(b))).collect()).unwrap()
    }

    #[test]
    fn sorted_lex_examples() {
        // sorted (3,2,1) vs (3,3,0): index 1 decides, 2 < 3
        assert_eq!(sorted_lex_compare(&cv(&[1, 3, 2]), &cv(&[3, 3, 0])).unwrap(), Ordering::Less);
        assert_eq!(sorted_lex_compare(&cv(&[2, 1]), &cv(&[1, 2])).unwrap(), Ordering::Equal);
        assert_eq!(sorted_lex_compare(&cv(&[0, 0, 0]), &cv(&[0, 0, 1])).unwrap(), Ordering::Less);
        assert!(matches!(
            sorted_lex_compare(&cv(&[1]), &cv(&[1, 2])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn a_lex_examples() {
        assert_eq!(a_lex_compare(&pv(&[(10, 0)]), &pv(&[(10, 1)])).unwrap(), Ordering::Less);
        assert_eq!(
            a_lex_compare(&pv(&[(2, 1), (1, 5)]), &pv(&[(2, 1), (1, 5)])).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            a_lex_compare(&pv(&[(3, 1), (1, 1)]), &pv(&[(3, 2), (0, 9)])).unwrap(),
            Ordering::Less
        );
        assert!(a_lex_compare(&pv(&[(1, 1)]), &pv(&[])).is_err());
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(CostVector::new(vec![int(-1)]).is_err());
        assert!(PairVector::new(vec![(int(0), int(-1))]).is_err());
    }

    #[test]
    fn ranks_preserve_order() {
        let vals = vec![int(5), int(1), int(5), int(3)];
        assert_eq!(rank_compress(&vals), vec![2, 0, 2, 1]);
    }

    fn vec_and_perm(len: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
        proptest::collection::vec(0u8..6, len).prop_flat_map(|v| {
            let shuffled = Just(v.clone()).prop_shuffle();
            (Just(v), shuffled)
        })
    }

    proptest! {
        #[test]
        fn permutation_invariance(
            (a, a_perm) in vec_and_perm(5),
            (b, b_perm) in vec_and_perm(5),
        ) {
            let to = |v: &[u8]| cv(&v.iter().map(|&x| x as i64).collect::<Vec<_>>());
            prop_assert_eq!(
                sorted_lex_compare(&to(&a), &to(&b)).unwrap(),
                sorted_lex_compare(&to(&a_perm), &to(&b_perm)).unwrap()
            );
        }

        #[test]
        fn antisymmetric_and_transitive(
            a in proptest::collection::vec(0i64..5, 4),
            b in proptest::collection::vec(0i64..5, 4),
            c in proptest::collection::vec(0i64..5, 4),
        ) {
            let (a, b, c) = (cv(&a), cv(&b), cv(&c));
            let ab = sorted_lex_compare(&a, &b).unwrap();
            prop_assert_eq!(ab.reverse(), sorted_lex_compare(&b, &a).unwrap());
            let bc = sorted_lex_compare(&b, &c).unwrap();
            if ab.is_le() && bc.is_le() {
                prop_assert!(sorted_lex_compare(&a, &c).unwrap().is_le());
            }
        }

        #[test]
        fn a_lex_with_constant_load_matches_sorted_lex(
            a in proptest::collection::vec(0i64..6, 4),
            b in proptest::collection::vec(0i64..6, 4),
            load in 0i64..4,
        ) {
            let pa: Vec<_> = a.iter().map(|&x| (x, load)).collect();
            let pb: Vec<_> = b.iter().map(|&x| (x, load)).collect();
            prop_assert_eq!(
                a_lex_compare(&pv(&pa), &pv(&pb)).unwrap(),
                sorted_lex_compare(&cv(&a), &cv(&b)).unwrap()
            );
        }

        #[test]
        fn power_sum_agrees_with_strict_order(
            a in proptest::collection::vec(0i64..5, 3),
            b in proptest::collection::vec(0i64..5, 3),
        ) {
            // q = 3, values in [0,4], minimal gap 1: M > ln(3)*4 gives M = 5.
            let (va, vb) = (cv(&a), cv(&b));
            if sorted_lex_compare(&va, &vb).unwrap() == Ordering::Less {
                let m = crate::rational::exponent_above_log_bound(3, &int(4)) as u32;
                let pa: Rational = va.entries().iter().map(|x| crate::rational::pow(x, m)).sum();
                let pb: Rational = vb.entries().iter().map(|x| crate::rational::pow(x, m)).sum();
                prop_assert!(pa < pb);
            }
        }
    }
}
