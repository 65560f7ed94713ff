/// Character-level Levenshtein distance with unit costs.
pub fn levenshtein_chars(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }

    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Levenshtein distance divided by the longer length, in `[0, 1]`.
/// Two empty strings are at distance 0.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    levenshtein_chars(a, b) as f64 / longest as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Plain recursion over suffixes, exponential but obviously correct.
    fn naive(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let sub = naive(ra, rb) + usize::from(x != y);
                sub.min(naive(ra, b) + 1).min(naive(a, rb) + 1)
            }
        }
    }

    #[test]
    fn examples() {
        assert_eq!(normalized_edit_distance("abc", "abc"), 0.0);
        assert_eq!(normalized_edit_distance("", "ab"), 1.0);
        assert_eq!(normalized_edit_distance("", ""), 0.0);
        let chars = |s: &str| s.chars().collect::<Vec<_>>();
        let oracle = naive(&chars("abc"), &chars("abd")) as f64 / 3.0;
        assert_eq!(normalized_edit_distance("abc", "abd"), oracle);
        assert!((oracle - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(levenshtein_chars("kitten", "sitting"), 3);
        assert_eq!(levenshtein_chars("héllo", "hello"), 1);
    }

    proptest! {
        #[test]
        fn matches_naive_recursion(a in "[abc]{0,7}", b in "[abc]{0,7}") {
            let ca: Vec<char> = a.chars().collect();
            let cb: Vec<char> = b.chars().collect();
            prop_assert_eq!(levenshtein_chars(&a, &b), naive(&ca, &cb));
        }

        #[test]
        fn metric_properties(a in "\\PC{0,20}", b in "\\PC{0,20}") {
            let d = normalized_edit_distance(&a, &b);
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, normalized_edit_distance(&b, &a));
            prop_assert_eq!(d == 0.0, a == b);
            if !a.is_empty() {
                prop_assert_eq!(normalized_edit_distance(&a, ""), 1.0);
            }
        }
    }
}
