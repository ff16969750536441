//! Exhaustive and random generation of small finite T₀ spaces and maps.

use std::collections::BTreeMap;

use rand::Rng;

use crate::bits::{bit, contains};
use crate::error::Result;

use super::{FiniteMap, FiniteSpace};

/// Every finite T₀ space on `n` points up to homeomorphism, i.e. every poset
/// on `n` elements up to isomorphism, sorted by canonical form.
///
/// Candidates are naturally labeled (`x < y` only for `x < y` as integers),
/// which every finite poset admits. Intended for `n ≤ 6`.
pub fn spaces_of_size(n: usize) -> Vec<FiniteSpace> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut found: BTreeMap<Vec<u64>, FiniteSpace> = BTreeMap::new();
    for rel in 0u64..(1u64 << pairs.len()) {
        let mut above = vec![0u64; n];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if contains(rel, k) {
                above[i] |= bit(j);
            }
        }
        let transitive = (0..n).all(|i| crate::bits::bits(above[i]).all(|j| above[j] & !above[i] == 0));
        if !transitive {
            continue;
        }
        let space =
            FiniteSpace::from_order(n, |x, y| x == y || contains(above[x], y)).expect("naturally labeled order is T0");
        found.entry(space.canonical_form()).or_insert(space);
    }
    found.into_values().collect()
}

/// All spaces with at most `max` points, smallest first.
pub fn spaces_up_to(max: usize) -> Vec<FiniteSpace> {
    (0..=max).flat_map(spaces_of_size).collect()
}

/// A random T₀ space on exactly `n` points: a random order relation on a
/// shuffled natural labeling, closed under transitivity.
pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> FiniteSpace {
    let density: f64 = rng.gen_range(0.1..0.7);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut above = vec![0u64; n];
    for i in (0..n).rev() {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                above[i] |= bit(j) | above[j];
            }
        }
    }
    // position i holds point perm[i]
    let mut leq = vec![0u64; n];
    for i in 0..n {
        for j in crate::bits::bits(above[i]) {
            leq[perm[i]] |= bit(perm[j]);
        }
    }
    FiniteSpace::from_order(n, |x, y| x == y || contains(leq[x], y)).expect("random order is T0")
}

/// Every function `a → b` (as graphs, in lexicographic order) that is
/// continuous.
pub fn continuous_maps(a: &FiniteSpace, b: &FiniteSpace) -> Vec<FiniteMap> {
    let (n, m) = (a.len(), b.len());
    if m == 0 {
        return if n == 0 { vec![FiniteMap::new(a.clone(), b.clone(), vec![]).expect("empty map")] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut graph = vec![0usize; n];
    loop {
        // monotone for specialization is equivalent to continuity here
        let monotone = (0..n).all(|x| (0..n).all(|y| !a.leq(x, y) || b.leq(graph[x], graph[y])));
        if monotone {
            out.push(FiniteMap::new(a.clone(), b.clone(), graph.clone()).expect("valid graph"));
        }
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            graph[k] += 1;
            if graph[k] < m {
                break;
            }
            graph[k] = 0;
        }
    }
}

pub fn open_maps(a: &FiniteSpace, b: &FiniteSpace) -> Vec<FiniteMap> {
    continuous_maps(a, b).into_iter().filter(|f| f.is_open_map()).collect()
}

pub fn open_surjections(a: &FiniteSpace, b: &FiniteSpace) -> Vec<FiniteMap> {
    open_maps(a, b).into_iter().filter(|f| f.is_surjective()).collect()
}

/// Every continuous open map between spaces of at most `max` points (spaces
/// up to homeomorphism, maps exhaustively).
pub fn all_open_maps(max: usize) -> Result<Vec<FiniteMap>> {
    let spaces = spaces_up_to(max);
    let mut out = Vec::new();
    for a in &spaces {
        for b in &spaces {
            out.extend(open_maps(a, b));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn poset_counts() {
        let counts: Vec<usize> = (0..=5).map(|n| spaces_of_size(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 16, 63]);
    }

    #[test]
    fn continuity_matches_preimage_test() {
        let s = FiniteSpace::sierpinski();
        let c = FiniteSpace::chain(3);
        let all = continuous_maps(&c, &s);
        assert!(all.iter().all(|f| f.is_continuous()));
        // monotone maps from a 3-chain to a 2-chain
        assert_eq!(all.len(), 4);
    }

    #[test]
    fn random_spaces_are_deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        for n in 0..8 {
            assert_eq!(random_space(&mut r1, n), random_space(&mut r2, n));
        }
    }
}
