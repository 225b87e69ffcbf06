//! The bag/integer isomorphism oracle.
//!
//! Assign every universe element a code > 1 such that the codes are
//! squarefree and pairwise coprime. Encoding a bag as the product of its
//! elements' codes (with multiplicity) is then injective, and the bag
//! algebra has an arithmetic image:
//!
//! * merge(a, b)    ↔ encode(a) · encode(b)
//! * subtract(a, b) ↔ encode(a) / gcd(encode(a), encode(b))
//! * a is a set     ↔ encode(a) is squarefree
//! * dedup(a)       ↔ radical(encode(a)) (product of distinct prime factors)
//!
//! [`check_isomorphism`] verifies all four laws exhaustively over every
//! bag (and pair of bags) drawn from a universe up to a size bound, so a
//! bug in either the bag algebra or the arithmetic shows up as a concrete
//! counterexample rather than a failed proof.

use crate::harness::multiset::{self, Multiset};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct UfEncoding {
    codes: BTreeMap<i64, u64>,
}

impl UfEncoding {
    /// Each element is its own code. Valid only when the elements
    /// themselves are > 1, squarefree, and pairwise coprime — 42 and 43
    /// qualify, 42 and 44 don't (shared factor 2).
    pub fn identity(universe: &[i64]) -> Result<UfEncoding, String> {
        let codes = sorted_distinct(universe)
            .into_iter()
            .map(|e| {
                let code = u64::try_from(e)
                    .ok()
                    .filter(|&c| c > 1)
                    .ok_or_else(|| format!("identity encoding needs elements > 1, got {e}"))?;
                Ok((e, code))
            })
            .collect::<Result<_, String>>()?;
        UfEncoding::validated(codes)
    }

    /// The i-th smallest element gets the i-th prime — always valid, and
    /// the only option when the elements themselves won't serve as codes.
    pub fn primes(universe: &[i64]) -> Result<UfEncoding, String> {
        let elems = sorted_distinct(universe);
        let codes = elems.iter().copied().zip(first_primes(elems.len())).collect();
        UfEncoding::validated(codes)
    }

    fn validated(codes: BTreeMap<i64, u64>) -> Result<UfEncoding, String> {
        let all: Vec<(i64, u64)> = codes.iter().map(|(&e, &c)| (e, c)).collect();
        for &(e, c) in &all {
            if !is_squarefree(c) {
                return Err(format!("code {c} for element {e} is not squarefree"));
            }
        }
        for (i, &(e1, c1)) in all.iter().enumerate() {
            for &(e2, c2) in &all[i + 1..] {
                let g = gcd(c1, c2);
                if g != 1 {
                    return Err(format!(
                        "codes {c1} (for {e1}) and {c2} (for {e2}) share the factor {g}"
                    ));
                }
            }
        }
        Ok(UfEncoding { codes })
    }

    pub fn code(&self, elem: i64) -> Option<u64> {
        self.codes.get(&elem).copied()
    }

    /// Product of codes with multiplicity; the empty bag encodes as 1.
    pub fn encode_bag(&self, bag: &Multiset) -> Result<u64, String> {
        let mut acc: u64 = 1;
        for &e in bag {
            let code =
                self.code(e).ok_or_else(|| format!("element {e} has no code in this encoding"))?;
            acc = acc
                .checked_mul(code)
                .ok_or_else(|| format!("encoding {} overflows u64", multiset::render(bag)))?;
        }
        Ok(acc)
    }
}

fn sorted_distinct(universe: &[i64]) -> Vec<i64> {
    let mut v = universe.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Trial-division factorization; fine for the small codes we deal in.
fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut factors = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut mult = 0;
            while n % p == 0 {
                n /= p;
                mult += 1;
            }
            factors.push((p, mult));
        }
        p += 1;
    }
    if n > 1 {
        factors.push((n, 1));
    }
    factors
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).iter().all(|&(_, mult)| mult == 1)
}

/// Product of the distinct prime factors; radical(1) = 1.
pub fn radical(n: u64) -> u64 {
    factorize(n).iter().map(|&(p, _)| p).product()
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut n = 2;
    while primes.len() < count {
        if factorize(n).len() == 1 && factorize(n)[0].1 == 1 {
            primes.push(n);
        }
        n += 1;
    }
    primes
}

#[derive(Clone, Debug)]
pub struct LawReport {
    pub name: &'static str,
    pub cases: usize,
    pub counterexamples: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct IsoReport {
    pub laws: Vec<LawReport>,
}

impl IsoReport {
    pub fn all_hold(&self) -> bool {
        self.laws.iter().all(|l| l.counterexamples.is_empty())
    }
}

/// Exhaustively verify the four laws over all bags (pairs, for the
/// binary laws) from `universe` up to `max_size` elements.
pub fn check_isomorphism(
    enc: &UfEncoding,
    universe: &[i64],
    max_size: usize,
) -> Result<IsoReport, String> {
    let bags = multiset::enumerate(universe, max_size);
    let codes: Vec<u64> = bags.iter().map(|b| enc.encode_bag(b)).collect::<Result<_, String>>()?;

    let mut merge = LawReport { name: "merge-is-multiply", cases: 0, counterexamples: vec![] };
    let mut subtract = LawReport { name: "subtract-is-reduce", cases: 0, counterexamples: vec![] };
    for (a, &ca) in bags.iter().zip(&codes) {
        for (b, &cb) in bags.iter().zip(&codes) {
            merge.cases += 1;
            let merged = enc.encode_bag(&multiset::merge(a, b))?;
            let product = ca.checked_mul(cb).ok_or_else(|| {
                format!(
                    "product of {} and {} overflows u64",
                    multiset::render(a),
                    multiset::render(b)
                )
            })?;
            if merged != product {
                merge.counterexamples.push(format!(
                    "a={} b={}: encode(merge)={merged} but {ca}*{cb}={product}",
                    multiset::render(a),
                    multiset::render(b)
                ));
            }

            subtract.cases += 1;
            let removed = enc.encode_bag(&multiset::subtract(a, b))?;
            let reduced = ca / gcd(ca, cb);
            if removed != reduced {
                subtract.counterexamples.push(format!(
                    "a={} b={}: encode(subtract)={removed} but {ca}/gcd({ca},{cb})={reduced}",
                    multiset::render(a),
                    multiset::render(b)
                ));
            }
        }
    }

    let mut set = LawReport { name: "set-is-squarefree", cases: 0, counterexamples: vec![] };
    let mut dedup = LawReport { name: "dedup-is-radical", cases: 0, counterexamples: vec![] };
    for (a, &ca) in bags.iter().zip(&codes) {
        set.cases += 1;
        if multiset::is_set(a) != is_squarefree(ca) {
            set.counterexamples.push(format!(
                "a={}: is_set={} but squarefree({ca})={}",
                multiset::render(a),
                multiset::is_set(a),
                is_squarefree(ca)
            ));
        }

        dedup.cases += 1;
        let deduped = enc.encode_bag(&multiset::dedup(a))?;
        let rad = radical(ca);
        if deduped != rad {
            dedup.counterexamples.push(format!(
                "a={}: encode(dedup)={deduped} but radical({ca})={rad}",
                multiset::render(a)
            ));
        }
    }

    Ok(IsoReport { laws: vec![merge, subtract, set, dedup] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc4243() -> UfEncoding {
        UfEncoding::identity(&[42, 43]).unwrap()
    }

    #[test]
    fn identity_rejects_unsuitable_universes() {
        assert!(UfEncoding::identity(&[1, 2]).is_err(), "1 can't be a code");
        assert!(UfEncoding::identity(&[2, 4]).is_err(), "4 is not squarefree");
        assert!(UfEncoding::identity(&[6, 10]).is_err(), "6 and 10 share 2");
        assert!(UfEncoding::identity(&[42, 43]).is_ok());
    }

    #[test]
    fn primes_encoding_handles_any_universe() {
        let enc = UfEncoding::primes(&[1, 2, 2, 9]).unwrap();
        assert_eq!(enc.code(1), Some(2));
        assert_eq!(enc.code(2), Some(3));
        assert_eq!(enc.code(9), Some(5));
        assert_eq!(enc.code(7), None);
    }

    #[test]
    fn worked_products_and_reductions() {
        let enc = enc4243();
        let e = |bag: &[i64]| enc.encode_bag(&bag.to_vec()).unwrap();
        assert_eq!(e(&[]), 1);
        assert_eq!(e(&[42, 43]), 1806);
        assert_eq!(e(&[42, 42, 43]), 75852);
        assert_eq!(e(&multiset::merge(&vec![42, 42, 43], &vec![42, 42, 43])), 5753525904);
        // subtract mirrors a / gcd(a, b):
        assert_eq!(e(&multiset::subtract(&vec![42, 43], &vec![43])), 1806 / gcd(1806, 43));
        assert_eq!(1806 / gcd(1806, 43), 42);
        assert_eq!(e(&multiset::subtract(&vec![42, 42, 43], &vec![43])), 1764);
        assert_eq!(75852 / gcd(75852, 43), 1764);
        assert_eq!(75852 / gcd(75852, 75852), 1);
    }

    #[test]
    fn radical_and_squarefree() {
        assert_eq!(radical(75852), 1806);
        assert_eq!(radical(1), 1);
        assert!(is_squarefree(1806));
        assert!(!is_squarefree(75852));
        assert!(is_squarefree(1));
    }

    #[test]
    fn laws_hold_exhaustively_on_the_default_universe() {
        let enc = enc4243();
        let report = check_isomorphism(&enc, &[42, 43], 3).unwrap();
        assert!(report.all_hold(), "{report:?}");
        // 10 bags of size ≤ 3 over two elements → 100 ordered pairs.
        assert_eq!(report.laws[0].cases, 100);
        assert_eq!(report.laws[1].cases, 100);
        assert_eq!(report.laws[2].cases, 10);
        assert_eq!(report.laws[3].cases, 10);
    }

    #[test]
    fn laws_hold_under_the_primes_encoding_too() {
        let enc = UfEncoding::primes(&[0, 5, 6]).unwrap();
        let report = check_isomorphism(&enc, &[0, 5, 6], 2).unwrap();
        assert!(report.all_hold(), "{report:?}");
    }

    #[test]
    fn encoding_overflow_is_reported_not_wrapped() {
        let enc = enc4243();
        let big = vec![43; 40]; // 43^40 is far past u64::MAX
        assert!(enc.encode_bag(&big).unwrap_err().contains("overflow"));
    }
}
