use crate::labelled::LTerm;
use crate::term::Term;

/// Every term with at most `max_size` leaves drawn from `alphabet`,
/// smallest first. Duplicate alphabet entries are ignored.
pub fn enumerate_terms(max_size: usize, alphabet: &[Term]) -> impl Iterator<Item = Term> {
    let mut leaves: Vec<Term> = Vec::new();
    for a in alphabet {
        if !leaves.contains(a) {
            leaves.push(a.clone());
        }
    }
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new()];
    if max_size >= 1 {
        by_size.push(leaves);
    }
    for n in 2..=max_size {
        let mut level = Vec::new();
        for left in 1..n {
            for l in &by_size[left] {
                for r in &by_size[n - left] {
                    level.push(Term::app(l.clone(), r.clone()));
                }
            }
        }
        by_size.push(level);
    }
    by_size.into_iter().flatten()
}

/// Every labelled application tree with at most `max_nodes` nodes over the
/// given leaves, smallest first.
pub fn enumerate_lterms(max_nodes: usize, leaves: &[LTerm]) -> Vec<LTerm> {
    let mut uniq: Vec<LTerm> = Vec::new();
    for a in leaves {
        if !uniq.contains(a) {
            uniq.push(a.clone());
        }
    }
    // by_leaves[n]: trees with n leaves, 2n - 1 nodes
    let max_leaves = max_nodes.div_ceil(2);
    let mut by_leaves: Vec<Vec<LTerm>> = vec![Vec::new()];
    if max_leaves >= 1 {
        by_leaves.push(uniq);
    }
    for n in 2..=max_leaves {
        let mut level = Vec::new();
        for left in 1..n {
            for l in &by_leaves[left] {
                for r in &by_leaves[n - left] {
                    level.push(LTerm::app(l.clone(), r.clone()));
                }
            }
        }
        by_leaves.push(level);
    }
    by_leaves.into_iter().flatten().collect()
}

/// Number of terms with exactly `n` leaves over `k` symbols.
pub fn count_terms(n: usize, k: usize) -> u128 {
    if n == 0 {
        return 0;
    }
    // Catalan(n - 1) * k^n
    let mut catalan: u128 = 1;
    for i in 0..(n as u128 - 1) {
        catalan = catalan * 2 * (2 * i + 1) / (i + 2);
    }
    catalan * (k as u128).pow(n as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Const;
    use std::collections::HashSet;

    fn consts(cs: &[Const]) -> Vec<Term> {
        cs.iter().map(|&c| Term::Const(c)).collect()
    }

    #[test]
    fn small_cases() {
        let a = consts(&[Const::F, Const::T]);
        let got: Vec<String> = enumerate_terms(1, &a).map(|t| t.to_string()).collect();
        assert_eq!(got, vec!["F", "T"]);
        let a = consts(&[Const::K, Const::F]);
        let got: Vec<String> = enumerate_terms(3, &a).map(|t| t.to_string()).collect();
        for want in ["K F", "F K", "K K", "F F", "K F F"] {
            assert!(got.contains(&want.to_string()), "{}", want);
        }
    }

    #[test]
    fn counts_match_closed_form() {
        let a = consts(&Const::ALL);
        let n2 = enumerate_terms(2, &a).filter(|t| t.leaves() == 2).count();
        assert_eq!(n2, 25);
        for n in 1..=4 {
            let got = enumerate_terms(n, &a).filter(|t| t.leaves() == n).count() as u128;
            assert_eq!(got, count_terms(n, 5));
        }
        let all: Vec<Term> = enumerate_terms(4, &a).collect();
        let set: HashSet<&Term> = all.iter().collect();
        assert_eq!(set.len(), all.len());
        assert!(all.windows(2).all(|w| w[0].leaves() <= w[1].leaves()));
    }

    #[test]
    fn labelled_enumeration_by_nodes() {
        let leaves: Vec<LTerm> = ["K1", "F1", "x"].iter().map(|s| LTerm::parse(s).unwrap()).collect();
        let all = enumerate_lterms(5, &leaves);
        assert!(all.iter().all(|t| t.size() <= 5));
        assert_eq!(all.len() as u128, (1..=3).map(|n| count_terms(n, 3)).sum::<u128>());
        assert!(all.contains(&LTerm::parse("K1 F1 x").unwrap()));
        assert_eq!(enumerate_lterms(6, &leaves).len(), all.len());
    }
}
