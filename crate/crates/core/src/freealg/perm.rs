use std::fmt;

use crate::error::{Error, Result};

/// A permutation of `{1, …, m}`, stored as the word `(σ(1), …, σ(m))`.
///
/// The derived ordering is lexicographic on that word, which is the canonical
/// term order used when printing polynomials.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    /// 0-based images: `images[q] = σ(q + 1) − 1`.
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Permutation {
            images: (0..m).collect(),
        }
    }

    /// Builds a permutation from its 1-based image word, validating that it
    /// is a bijection of `{1, …, m}`.
    pub fn from_images(images_one_based: &[usize]) -> Result<Self> {
        let m = images_one_based.len();
        let mut seen = vec![false; m];
        let mut images = Vec::with_capacity(m);
        for &p in images_one_based {
            if p == 0 || p > m {
                return Err(Error::NotMultilinear(format!(
                    "image {p} is outside 1..={m}"
                )));
            }
            if seen[p - 1] {
                return Err(Error::NotMultilinear(format!("image {p} repeats")));
            }
            seen[p - 1] = true;
            images.push(p - 1);
        }
        Ok(Permutation { images })
    }

    pub fn arity(&self) -> usize {
        self.images.len()
    }

    /// σ(q) with 1-based position and value.
    pub fn image(&self, q: usize) -> usize {
        self.images[q - 1] + 1
    }

    /// The word `σ(1), …, σ(m)` with 1-based values.
    pub fn word(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().map(|&p| p + 1)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(q, &p)| q == p)
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.arity() != other.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: other.arity(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&q| self.images[q]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (q, &p) in self.images.iter().enumerate() {
            images[p] = q;
        }
        Permutation { images }
    }

    /// All `m!` permutations of `{1, …, m}` in a deterministic order.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        for_each_permutation(m, |word, _| {
            out.push(Permutation::from_images(word).expect("Heap's algorithm yields permutations"));
        });
        out
    }

    /// The sign of the permutation, computed from its cycle decomposition.
    pub fn sign(&self) -> i8 {
        let m = self.images.len();
        let mut visited = vec![false; m];
        let mut cycles = 0;
        for start in 0..m {
            if visited[start] {
                continue;
            }
            cycles += 1;
            let mut q = start;
            while !visited[q] {
                visited[q] = true;
                q = self.images[q];
            }
        }
        if (m - cycles).is_multiple_of(2) { 1 } else { -1 }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (q, p) in self.word().enumerate() {
            if q > 0 {
                write!(f, " ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Visits every permutation of `{1, …, m}` exactly once via Heap's algorithm,
/// passing the 1-based word and its sign. Each step is a single transposition,
/// so the sign simply alternates.
pub(crate) fn for_each_permutation<F: FnMut(&[usize], i8)>(m: usize, mut f: F) {
    let mut word: Vec<usize> = (1..=m).collect();
    let mut sign: i8 = 1;
    f(&word, sign);
    // Iterative Heap's algorithm.
    let mut counters = vec![0usize; m];
    let mut i = 1;
    while i < m {
        if counters[i] < i {
            if i % 2 == 0 {
                word.swap(0, i);
            } else {
                word.swap(counters[i], i);
            }
            sign = -sign;
            f(&word, sign);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn from_images_validates() {
        assert!(Permutation::from_images(&[2, 1, 3]).is_ok());
        assert!(Permutation::from_images(&[1, 1, 3]).is_err());
        assert!(Permutation::from_images(&[0, 1]).is_err());
        assert!(Permutation::from_images(&[1, 3]).is_err());
    }

    #[test]
    fn sign_counts_transpositions() {
        assert_eq!(Permutation::identity(4).sign(), 1);
        assert_eq!(Permutation::from_images(&[2, 1, 3]).unwrap().sign(), -1);
        // The order-reversing permutation of S_3 has sign -1.
        assert_eq!(Permutation::from_images(&[3, 2, 1]).unwrap().sign(), -1);
        assert_eq!(Permutation::from_images(&[2, 3, 1]).unwrap().sign(), 1);
    }

    #[test]
    fn heap_enumeration_is_complete_with_correct_signs() {
        for m in 1..=5 {
            let mut seen = BTreeSet::new();
            let mut count = 0usize;
            for_each_permutation(m, |word, sign| {
                let p = Permutation::from_images(word).unwrap();
                assert_eq!(p.sign(), sign, "sign mismatch for {p:?}");
                seen.insert(p);
                count += 1;
            });
            let factorial: usize = (1..=m).product();
            assert_eq!(count, factorial);
            assert_eq!(seen.len(), factorial);
        }
    }

    fn perm_strategy(max: usize) -> impl Strategy<Value = Permutation> {
        (1..=max).prop_flat_map(|m| {
            Just((1..=m).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|w| Permutation::from_images(&w).unwrap())
        })
    }

    fn perm_pair(max: usize) -> impl Strategy<Value = (Permutation, Permutation)> {
        (1..=max).prop_flat_map(|m| {
            let one = Just((1..=m).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|w| Permutation::from_images(&w).unwrap());
            let other = Just((1..=m).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|w| Permutation::from_images(&w).unwrap());
            (one, other)
        })
    }

    proptest! {
        #[test]
        fn compose_with_inverse_is_identity(p in perm_strategy(8)) {
            prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
            prop_assert!(p.inverse().compose(&p).unwrap().is_identity());
        }

        #[test]
        fn composition_is_associative((a, b) in perm_pair(8), seed in any::<u64>()) {
            // Derive a third permutation from the first by rotating through a
            // seeded number of compositions with the second.
            let mut c = a.clone();
            for _ in 0..(seed % 3) {
                c = c.compose(&b).unwrap();
            }
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn sign_is_multiplicative((a, b) in perm_pair(8)) {
            prop_assert_eq!(a.compose(&b).unwrap().sign(), a.sign() * b.sign());
        }
    }
}
