//! Operations on sorted, duplicate-free id slices.

use std::cmp::Ordering;

pub fn union<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn intersection<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    // probe the larger side when sizes are lopsided
    if a.len() * 16 < b.len() {
        return a.iter().copied().filter(|x| contains(b, x)).collect();
    }
    if b.len() * 16 < a.len() {
        return b.iter().copied().filter(|x| contains(a, x)).collect();
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn intersection_len<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn is_subset<T: Ord>(a: &[T], b: &[T]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    // probe when `a` is much smaller than `b`
    if a.len() * 16 < b.len() {
        return a.iter().all(|x| contains(b, x));
    }
    intersection_len(a, b) == a.len()
}

pub fn contains<T: Ord>(set: &[T], x: &T) -> bool {
    set.binary_search(x).is_ok()
}

/// Sorts and removes duplicates.
pub fn normalise<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    if v.windows(2).all(|w| w[0] < w[1]) {
        return v;
    }
    v.sort_unstable();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    proptest! {
        #[test]
        fn agrees_with_btreeset(a in proptest::collection::btree_set(0u32..60, 0..30),
                                b in proptest::collection::btree_set(0u32..60, 0..30)) {
            let va: Vec<u32> = a.iter().copied().collect();
            let vb: Vec<u32> = b.iter().copied().collect();
            prop_assert_eq!(union(&va, &vb), a.union(&b).copied().collect::<Vec<_>>());
            let inter: BTreeSet<u32> = a.intersection(&b).copied().collect();
            prop_assert_eq!(intersection(&va, &vb), inter.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(intersection_len(&va, &vb), inter.len());
            prop_assert_eq!(is_subset(&va, &vb), a.is_subset(&b));
        }
    }
}
