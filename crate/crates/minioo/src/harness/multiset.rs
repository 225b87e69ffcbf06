//! Multisets of integers, the input domain for small-scope enumeration,
//! plus the bag algebra the isomorphism checks are stated over.
//!
//! A multiset is represented as a sorted `Vec<i64>`; sortedness is the
//! canonical form every function here preserves, and it makes the
//! enumeration order ((size, then lexicographic element sequence) —
//! the order that pins down "first witness") trivial to define.

pub type Multiset = Vec<i64>;

/// Canonicalize an element list into a multiset.
pub fn normalize(mut elems: Vec<i64>) -> Multiset {
    elems.sort_unstable();
    elems
}

/// All multisets over `universe` with at most `max_size` elements, ordered
/// by size and then lexicographically. The empty multiset comes first.
pub fn enumerate(universe: &[i64], max_size: usize) -> Vec<Multiset> {
    let mut dom = universe.to_vec();
    dom.sort_unstable();
    dom.dedup();
    let mut out = Vec::new();
    for size in 0..=max_size {
        let mut cur = Vec::with_capacity(size);
        combos(&dom, size, 0, &mut cur, &mut out);
    }
    out
}

/// Non-decreasing sequences of `left` elements drawn (with repetition)
/// from `dom[from..]`, emitted in lexicographic order.
fn combos(dom: &[i64], left: usize, from: usize, cur: &mut Vec<i64>, out: &mut Vec<Multiset>) {
    if left == 0 {
        out.push(cur.clone());
        return;
    }
    for i in from..dom.len() {
        cur.push(dom[i]);
        combos(dom, left - 1, i, cur, out);
        cur.pop();
    }
}

pub fn count(a: &Multiset, e: i64) -> usize {
    a.iter().filter(|&&x| x == e).count()
}

/// Bag union: multiplicities add.
pub fn merge(a: &Multiset, b: &Multiset) -> Multiset {
    let mut r = a.clone();
    r.extend_from_slice(b);
    r.sort_unstable();
    r
}

/// Bag difference: each occurrence in `b` cancels one occurrence in `a`.
pub fn subtract(a: &Multiset, b: &Multiset) -> Multiset {
    let mut b_left = b.clone();
    let mut r = Vec::new();
    for &x in a {
        if let Some(i) = b_left.iter().position(|&y| y == x) {
            b_left.swap_remove(i);
        } else {
            r.push(x);
        }
    }
    r.sort_unstable();
    r
}

/// Drop duplicate occurrences (the set coercion).
pub fn dedup(a: &Multiset) -> Multiset {
    let mut r = a.clone();
    r.dedup();
    r
}

/// A multiset is a set when no element occurs twice.
pub fn is_set(a: &Multiset) -> bool {
    a.windows(2).all(|w| w[0] != w[1])
}

/// Render as `{1 1 2}` / `{}` for reports.
pub fn render(a: &Multiset) -> String {
    let inner: Vec<String> = a.iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", inner.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_is_ordered_by_size_then_lexicographically() {
        let all = enumerate(&[2, 1], 2);
        let expected: Vec<Multiset> =
            vec![vec![], vec![1], vec![2], vec![1, 1], vec![1, 2], vec![2, 2]];
        assert_eq!(all, expected);
    }

    #[test]
    fn enumeration_counts_match_multichoose() {
        // multisets of size k over n elements: C(n + k - 1, k)
        let all = enumerate(&[1, 2, 3], 3);
        assert_eq!(all.len(), 1 + 3 + 6 + 10);
        let mut uniq = all.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), all.len(), "no duplicates");
    }

    #[test]
    fn algebra_matches_the_usual_identities() {
        let e = normalize(vec![42, 43, 42]);
        assert_eq!(merge(&vec![42], &vec![43]), vec![42, 43]);
        assert_eq!(merge(&e, &e), vec![42, 42, 42, 42, 43, 43]);
        assert_eq!(subtract(&e, &vec![43]), vec![42, 42]);
        assert_eq!(subtract(&e, &e), Vec::<i64>::new());
        assert_eq!(subtract(&vec![42, 43], &vec![43]), vec![42]);
        assert_eq!(dedup(&e), vec![42, 43]);
        assert!(is_set(&vec![42, 43]));
        assert!(!is_set(&e));
        assert!(is_set(&vec![]));
    }

    #[test]
    fn subtract_never_goes_negative() {
        assert_eq!(subtract(&vec![5], &vec![5, 5, 5]), Vec::<i64>::new());
        assert_eq!(count(&subtract(&vec![5, 5], &vec![5]), 5), 1);
    }

    #[test]
    fn rendering() {
        assert_eq!(render(&vec![]), "{}");
        assert_eq!(render(&vec![1, 1, 2]), "{1 1 2}");
    }
}
