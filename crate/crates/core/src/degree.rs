//! The commutator-degree criterion.
//!
//! A profile `(k, T, t)` — pairwise disjoint index sets `T_1, …, T_k` plus
//! distinct indices `t_1, …, t_k` outside them — carves the subset
//! `S(k, T, t)` out of the symmetric group: permutations whose leading
//! positions map block-wise onto the `T_i`, each block followed by the
//! designated `t_i`. Summing a polynomial's coefficients over such a subset
//! gives `β^(k,T,t)`; the commutator-degree of a nonzero multilinear
//! polynomial is the least `k` at which some profile has a nonzero sum.
//!
//! The module also carries the independent brute-force oracle: exhaustive
//! matrix-unit substitution deciding membership in `Id(UT_n)` without ever
//! looking at a profile.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::freealg::{MultilinearPoly, Permutation};
use crate::scalar::Scalar;
use crate::triangular::{UTMatrix, enumerate_units};

/// A `(k, T, t)` profile over arity `m`. `blocks` holds the sets `T_i`
/// (sorted ascending), `anchors` the indices `t_i`; anchors are ordered by
/// their position along the diagonal chain, not by value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Profile {
    arity: usize,
    blocks: Vec<Vec<usize>>,
    anchors: Vec<usize>,
}

impl Profile {
    /// The unique `k = 0` profile, for which `S(0) = S_m`.
    pub fn empty(arity: usize) -> Self {
        Profile {
            arity,
            blocks: Vec::new(),
            anchors: Vec::new(),
        }
    }

    /// Validates the profile invariants: blocks pairwise disjoint, anchors
    /// distinct and outside every block, all indices in `1..=m`, and the
    /// occupied positions `Σ (|T_i| + 1)` fitting inside `m`.
    pub fn new(arity: usize, blocks: Vec<Vec<usize>>, anchors: Vec<usize>) -> Result<Self> {
        if blocks.len() != anchors.len() {
            return Err(Error::InvalidProfile(format!(
                "{} blocks but {} anchors",
                blocks.len(),
                anchors.len()
            )));
        }
        let mut used = vec![false; arity];
        let mut occupied = 0usize;
        let mut claim = |v: usize| -> Result<()> {
            if v == 0 || v > arity {
                return Err(Error::InvalidProfile(format!(
                    "index {v} is outside 1..={arity}"
                )));
            }
            if used[v - 1] {
                return Err(Error::InvalidProfile(format!(
                    "index {v} is used more than once"
                )));
            }
            used[v - 1] = true;
            Ok(())
        };
        for block in &blocks {
            for &v in block {
                claim(v)?;
                occupied += 1;
            }
        }
        for &t in &anchors {
            claim(t)?;
            occupied += 1;
        }
        debug_assert!(occupied <= arity);
        let mut blocks = blocks;
        for block in &mut blocks {
            block.sort_unstable();
        }
        Ok(Profile {
            arity,
            blocks,
            anchors,
        })
    }

    /// Internal constructor for data already known to satisfy the invariants
    /// (blocks sorted, indices drawn from a permutation).
    fn from_parts(arity: usize, blocks: Vec<Vec<usize>>, anchors: Vec<usize>) -> Self {
        Profile {
            arity,
            blocks,
            anchors,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The number of `(T_i, t_i)` pairs.
    pub fn k(&self) -> usize {
        self.anchors.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// The block-size vector `(|T_1|, …, |T_k|)`.
    pub fn shape(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Membership of σ in `S(k, T, t)`: positions `1..h_1−1` map onto `T_1`
    /// as a set, position `h_1` maps to `t_1`, and so on block by block. The
    /// `k = 0` profile contains every permutation.
    pub fn contains(&self, perm: &Permutation) -> Result<bool> {
        if perm.arity() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: perm.arity(),
            });
        }
        Ok(self.contains_unchecked(perm))
    }

    fn contains_unchecked(&self, perm: &Permutation) -> bool {
        let mut pos = 0usize;
        let mut buffer = Vec::new();
        for (block, &anchor) in self.blocks.iter().zip(&self.anchors) {
            buffer.clear();
            buffer.extend((1..=block.len()).map(|offset| perm.image(pos + offset)));
            buffer.sort_unstable();
            if buffer != *block {
                return false;
            }
            pos += block.len() + 1;
            if perm.image(pos) != anchor {
                return false;
            }
        }
        true
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Profile(m={}, T={:?}, t={:?})",
            self.arity, self.blocks, self.anchors
        )
    }
}

impl Serialize for Profile {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut state = serializer.serialize_struct("Profile", 3)?;
        state.serialize_field("k", &self.k())?;
        state.serialize_field("T", &self.blocks)?;
        state.serialize_field("t", &self.anchors)?;
        state.end()
    }
}

/// `β^(k,T,t)`: the exact sum of coefficients over the stored terms lying in
/// `S(k, T, t)`. Computed by filtering the sparse term map, so the cost is
/// `O(|terms| · m)` regardless of how large the permutation subset is.
pub fn beta<S: Scalar>(poly: &MultilinearPoly<S>, profile: &Profile) -> Result<S> {
    if poly.arity() != profile.arity() {
        return Err(Error::ArityMismatch {
            expected: profile.arity(),
            found: poly.arity(),
        });
    }
    let mut sum = S::zero();
    for (perm, coeff) in poly.terms() {
        if profile.contains_unchecked(perm) {
            sum = sum + coeff.clone();
        }
    }
    Ok(sum)
}

/// Block-size vectors `(s_1, …, s_k)` with `Σ (s_i + 1) ≤ m`, in ascending
/// lexicographic order. Empty when `k > m`.
fn shapes(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k > m {
        return Vec::new();
    }
    let budget = m - k;
    let mut out = Vec::new();
    let mut current = vec![0usize; k];
    fn rec(slot: usize, budget: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot == current.len() {
            out.push(current.clone());
            return;
        }
        for size in 0..=budget {
            current[slot] = size;
            rec(slot + 1, budget - size, current, out);
        }
    }
    rec(0, budget, &mut current, &mut out);
    out
}

/// Size-`s` subsets of the sorted slice `free`, in lexicographic order.
fn combinations(free: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn rec(
        free: &[usize],
        size: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        let needed = size - current.len();
        for idx in start..=(free.len() - needed) {
            current.push(free[idx]);
            rec(free, size, idx + 1, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if size <= free.len() {
        rec(free, size, 0, &mut Vec::with_capacity(size), &mut out);
    }
    out
}

/// All profiles with the given block-size vector, in the deterministic
/// order documented on `enumerate_profiles`.
fn profiles_for_shape(m: usize, shape: &[usize]) -> Vec<Profile> {
    fn rec(
        m: usize,
        shape: &[usize],
        free: &[usize],
        blocks: &mut Vec<Vec<usize>>,
        anchors: &mut Vec<usize>,
        out: &mut Vec<Profile>,
    ) {
        let Some((&size, rest)) = shape.split_first() else {
            out.push(Profile::from_parts(m, blocks.clone(), anchors.clone()));
            return;
        };
        for block in combinations(free, size) {
            let after_block: Vec<usize> = free
                .iter()
                .copied()
                .filter(|v| !block.contains(v))
                .collect();
            blocks.push(block);
            for &anchor in &after_block {
                let remaining: Vec<usize> = after_block
                    .iter()
                    .copied()
                    .filter(|&v| v != anchor)
                    .collect();
                anchors.push(anchor);
                rec(m, rest, &remaining, blocks, anchors, out);
                anchors.pop();
            }
            blocks.pop();
        }
    }
    let free: Vec<usize> = (1..=m).collect();
    let mut out = Vec::new();
    rec(m, shape, &free, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

/// Every profile of size `k` over arity `m`, each exactly once, in a fixed
/// deterministic order: block-size vectors ascend lexicographically, and
/// within a shape the search runs depth-first over `(T_1, t_1, T_2, t_2, …)`
/// with each `T_i` lexicographic over subsets of the still-free indices and
/// each `t_i` ascending over the remainder. Anchor tuples range over all
/// orderings of distinct indices, not only increasing ones; this is what
/// makes the profiles of one shape partition `S_m`.
pub fn enumerate_profiles(m: usize, k: usize) -> impl Iterator<Item = Profile> {
    shapes(m, k)
        .into_iter()
        .flat_map(move |shape| profiles_for_shape(m, &shape))
}

/// The unique profile of the given shape containing σ: block values and
/// anchors are read straight off the permutation word.
fn profile_of_permutation(perm: &Permutation, shape: &[usize]) -> Profile {
    let mut blocks = Vec::with_capacity(shape.len());
    let mut anchors = Vec::with_capacity(shape.len());
    let mut pos = 0usize;
    for &size in shape {
        let mut block: Vec<usize> = (1..=size).map(|offset| perm.image(pos + offset)).collect();
        block.sort_unstable();
        blocks.push(block);
        pos += size + 1;
        anchors.push(perm.image(pos));
    }
    Profile::from_parts(perm.arity(), blocks, anchors)
}

/// All `β^(k,T,t)` of one shape in a single pass over the term map. Because
/// the profiles of a fixed shape partition `S_m`, each term contributes to
/// exactly one sum.
fn betas_for_shape<S: Scalar>(poly: &MultilinearPoly<S>, shape: &[usize]) -> BTreeMap<Profile, S> {
    let mut sums: BTreeMap<Profile, S> = BTreeMap::new();
    for (perm, coeff) in poly.terms() {
        let key = profile_of_permutation(perm, shape);
        match sums.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + coeff.clone();
                *e.get_mut() = sum;
            }
        }
    }
    sums
}

/// The outcome of the degree search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeReport<S: Scalar> {
    /// The commutator-degree `r`.
    pub degree: usize,
    /// A profile of size `r` with nonzero β; absent exactly when `r = 0`.
    pub witness: Option<Profile>,
    /// The β of the witness profile (`β⁰` when `r = 0`); never zero.
    pub beta: S,
    /// Profiles examined up to and including the witness, in enumeration
    /// order. Deterministic, so certificates are reproducible.
    pub profiles_checked: u64,
}

impl<S: Scalar> Serialize for DegreeReport<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut state = serializer.serialize_struct("DegreeReport", 4)?;
        state.serialize_field("degree", &self.degree)?;
        state.serialize_field("witness", &self.witness)?;
        state.serialize_field("beta", &self.beta.to_string())?;
        state.serialize_field("profiles_checked", &self.profiles_checked)?;
        state.end()
    }
}

/// Computes the commutator-degree of a nonzero multilinear polynomial: the
/// least `k` such that some size-`k` profile has `β ≠ 0`, searching `k = 0,
/// 1, …` through the deterministic profile enumeration and returning the
/// first hit as witness.
///
/// The search always terminates with `degree ≤ ⌊m/2⌋`: a polynomial of
/// degree `m` cannot be an identity of `UT_n` once `2n > m`, because the
/// minimal identities of `UT_n` have degree `2n`.
pub fn commutator_degree<S: Scalar>(poly: &MultilinearPoly<S>) -> Result<DegreeReport<S>> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let m = poly.arity();
    let mut checked: u64 = 0;
    for k in 0..=m / 2 {
        for shape in shapes(m, k) {
            let sums = betas_for_shape(poly, &shape);
            for profile in profiles_for_shape(m, &shape) {
                checked += 1;
                if let Some(value) = sums.get(&profile)
                    && !value.is_zero()
                {
                    return Ok(DegreeReport {
                        degree: k,
                        beta: value.clone(),
                        witness: (k > 0).then_some(profile),
                        profiles_checked: checked,
                    });
                }
            }
        }
    }
    unreachable!("a nonzero multilinear polynomial has commutator-degree at most half its arity")
}

/// Number of substitutions the brute-force oracle performs: `(n(n+1)/2)^m`,
/// saturating at `u128::MAX`.
pub fn bruteforce_evaluations(arity: usize, n: usize) -> u128 {
    let units = (n as u128) * (n as u128 + 1) / 2;
    let mut total: u128 = 1;
    for _ in 0..arity {
        total = total.saturating_mul(units);
    }
    total
}

/// Default substitution budget guarding interactive brute-force runs.
pub const BRUTEFORCE_BUDGET: u128 = 100_000_000;

/// Decides `f ∈ Id(UT_n)` by substituting every tuple of matrix units —
/// sufficient by multilinearity. Exhaustive and therefore expensive: the
/// caller owns the cost, see [`bruteforce_evaluations`].
pub fn is_identity_bruteforce<S: Scalar>(poly: &MultilinearPoly<S>, n: usize) -> bool {
    if poly.is_zero() {
        return true;
    }
    let m = poly.arity();
    let units = enumerate_units(n);
    // 0-based argument indices per term, so the inner loop is pure indexing.
    let terms: Vec<(Vec<usize>, &S)> = poly
        .terms()
        .map(|(perm, coeff)| (perm.word().map(|v| v - 1).collect(), coeff))
        .collect();
    let mut indices = vec![0usize; m];
    let mut sums: Vec<((usize, usize), S)> = Vec::new();
    loop {
        sums.clear();
        for (word, coeff) in &terms {
            let mut current = units[indices[word[0]]];
            let mut alive = true;
            for &slot in &word[1..] {
                match current.product(&units[indices[slot]]) {
                    Some(next) => current = next,
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if alive {
                let key = (current.row(), current.col());
                match sums.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, sum)) => *sum = sum.clone() + (*coeff).clone(),
                    None => sums.push((key, (*coeff).clone())),
                }
            }
        }
        if sums.iter().any(|(_, sum)| !sum.is_zero()) {
            return false;
        }
        let mut slot = 0;
        loop {
            if slot == m {
                return true;
            }
            indices[slot] += 1;
            if indices[slot] < units.len() {
                break;
            }
            indices[slot] = 0;
            slot += 1;
        }
    }
}

/// Result of the brute-force degree oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleDegree {
    Exact(usize),
    /// The polynomial is still an identity at the search cap.
    AtLeast(usize),
}

impl OracleDegree {
    /// The degree, truncated at the search cap.
    pub fn lower_bound(&self) -> usize {
        match *self {
            OracleDegree::Exact(r) | OracleDegree::AtLeast(r) => r,
        }
    }
}

impl fmt::Display for OracleDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleDegree::Exact(r) => write!(f, "{r}"),
            OracleDegree::AtLeast(r) => write!(f, ">= {r}"),
        }
    }
}

/// Brute-force commutator-degree: the largest `r ≤ n_max` with
/// `f ∈ Id(UT_k)` for all `k ≤ r`, entirely by exhaustive substitution.
/// `Id(UT_0)` holds vacuously, so degree 0 means `f ∉ Id(UT_1)`.
///
/// This is the independent check of the coefficient criterion: the two never
/// share any code path beyond polynomial storage.
pub fn commutator_degree_oracle<S: Scalar>(
    poly: &MultilinearPoly<S>,
    n_max: usize,
) -> Result<OracleDegree> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    for n in 1..=n_max {
        if !is_identity_bruteforce(poly, n) {
            return Ok(OracleDegree::Exact(n - 1));
        }
    }
    Ok(OracleDegree::AtLeast(n_max))
}

/// The witness substitution proving `f ∉ Id(UT_{r+1})` for a profile with
/// `β ≠ 0`: anchor `t_i ↦ E_{i,i+1}`, block variables `j ∈ T_i ↦ E_{i,i}`,
/// every other variable `↦ E_{r+1,r+1}`, all inside `UT_{r+1}`.
///
/// For every polynomial `f` of matching arity,
/// `evaluate(f, witness_evaluation(p)) = β^(p)(f) · E_{1,r+1}` exactly.
pub fn witness_evaluation<S: Scalar>(profile: &Profile) -> Result<Vec<UTMatrix<S>>> {
    let r = profile.k();
    if r == 0 {
        return Err(Error::InvalidProfile(
            "the empty profile has no witness evaluation".into(),
        ));
    }
    let n = r + 1;
    let mut matrices = Vec::with_capacity(profile.arity());
    for variable in 1..=profile.arity() {
        let matrix = if let Some(i) = profile.anchors().iter().position(|&t| t == variable) {
            UTMatrix::unit(n, i + 1, i + 2)?
        } else if let Some(l) = profile
            .blocks()
            .iter()
            .position(|block| block.binary_search(&variable).is_ok())
        {
            UTMatrix::unit(n, l + 1, l + 1)?
        } else {
            UTMatrix::unit(n, n, n)?
        };
        matrices.push(matrix);
    }
    Ok(matrices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::{commutator_product, parse, standard_poly};
    use crate::triangular::evaluate;
    use crate::{Matrix, Poly, Rat};
    use num_traits::Zero;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64) -> Rat {
        crate::scalar::from_i64(n)
    }

    fn random_poly(rng: &mut ChaCha8Rng, m: usize) -> Poly {
        loop {
            let mut terms = Vec::new();
            let mut word: Vec<usize> = (1..=m).collect();
            let count = rng.random_range(1..=6);
            for _ in 0..count {
                word.shuffle(rng);
                terms.push((
                    Permutation::from_images(&word).unwrap(),
                    rat(rng.random_range(-3..=3)),
                ));
            }
            let poly = Poly::from_terms(m, terms).unwrap();
            if !poly.is_zero() {
                return poly;
            }
        }
    }

    #[test]
    fn profile_validation() {
        assert!(Profile::new(4, vec![vec![1], vec![2]], vec![3, 4]).is_ok());
        // Overlapping blocks.
        assert!(Profile::new(4, vec![vec![1], vec![1]], vec![3, 4]).is_err());
        // Anchor inside a block.
        assert!(Profile::new(4, vec![vec![3]], vec![3]).is_err());
        // Repeated anchors.
        assert!(Profile::new(4, vec![vec![], vec![]], vec![2, 2]).is_err());
        // Out of range.
        assert!(Profile::new(2, vec![vec![3]], vec![1]).is_err());
        // Too many occupied positions.
        assert!(Profile::new(2, vec![vec![1], vec![2]], vec![3, 4]).is_err());
    }

    #[test]
    fn membership_examples() {
        let id2 = Permutation::identity(2);
        let swap = Permutation::from_images(&[2, 1]).unwrap();

        let empty = Profile::empty(2);
        assert!(empty.contains(&id2).unwrap());
        assert!(empty.contains(&swap).unwrap());

        let pointed = Profile::new(2, vec![vec![]], vec![1]).unwrap();
        assert!(pointed.contains(&id2).unwrap());
        assert!(!pointed.contains(&swap).unwrap());

        let mismatch = Profile::empty(3);
        assert!(matches!(
            mismatch.contains(&id2),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn beta_examples() {
        let comm: Poly = parse("[x1,x2]").unwrap();
        assert!(beta(&comm, &Profile::empty(2)).unwrap().is_zero());
        let pointed = Profile::new(2, vec![vec![]], vec![1]).unwrap();
        assert_eq!(beta(&comm, &pointed).unwrap(), rat(1));
        let prod: Poly = parse("x1*x2").unwrap();
        assert_eq!(beta(&prod, &Profile::empty(2)).unwrap(), rat(1));
    }

    #[test]
    fn profile_enumeration_counts_and_order() {
        assert_eq!(enumerate_profiles(2, 0).count(), 1);

        let profiles: Vec<Profile> = enumerate_profiles(2, 1).collect();
        let rendered: Vec<(Vec<Vec<usize>>, Vec<usize>)> = profiles
            .iter()
            .map(|p| (p.blocks().to_vec(), p.anchors().to_vec()))
            .collect();
        assert_eq!(
            rendered,
            vec![
                (vec![vec![]], vec![1]),
                (vec![vec![]], vec![2]),
                (vec![vec![1]], vec![2]),
                (vec![vec![2]], vec![1]),
            ]
        );

        // m = 4, k = 2, both blocks empty: ordered pairs of distinct indices.
        let count = enumerate_profiles(4, 2)
            .filter(|p| p.shape() == vec![0, 0])
            .count();
        assert_eq!(count, 12);

        // Each profile appears exactly once and satisfies the invariants.
        for (m, k) in [(4usize, 2usize), (5, 2), (5, 1)] {
            let all: Vec<Profile> = enumerate_profiles(m, k).collect();
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), all.len());
            for p in &all {
                Profile::new(m, p.blocks().to_vec(), p.anchors().to_vec()).unwrap();
            }
        }
    }

    #[test]
    fn profiles_of_a_shape_partition_the_symmetric_group() {
        for m in 2..=4 {
            let all_perms = Permutation::all(m);
            for k in 0..=m / 2 {
                for shape in shapes(m, k) {
                    let profiles = profiles_for_shape(m, &shape);
                    for perm in &all_perms {
                        let containing = profiles
                            .iter()
                            .filter(|p| p.contains(perm).unwrap())
                            .count();
                        assert_eq!(containing, 1, "shape {shape:?}, perm {perm:?}");
                        assert!(
                            profile_of_permutation(perm, &shape).contains(perm).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn beta_sums_per_shape_recover_beta_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut polys: Vec<Poly> = vec![standard_poly(4), standard_poly(5)];
        for _ in 0..6 {
            let m = rng.random_range(2..=5);
            polys.push(random_poly(&mut rng, m));
        }
        for poly in &polys {
            let m = poly.arity();
            let total = poly.coefficient_sum();
            for k in 0..=m / 2 {
                for shape in shapes(m, k) {
                    let mut sum = Rat::zero();
                    for profile in profiles_for_shape(m, &shape) {
                        sum += beta(poly, &profile).unwrap();
                    }
                    assert_eq!(sum, total, "shape {shape:?} of {poly:?}");
                }
            }
        }
    }

    #[test]
    fn grouped_betas_agree_with_direct_filtering() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let m = rng.random_range(2..=5);
            let poly = random_poly(&mut rng, m);
            for k in 0..=m / 2 {
                for shape in shapes(m, k) {
                    let grouped = betas_for_shape(&poly, &shape);
                    for profile in profiles_for_shape(m, &shape) {
                        let direct = beta(&poly, &profile).unwrap();
                        let fast = grouped.get(&profile).cloned().unwrap_or_else(Rat::zero);
                        assert_eq!(direct, fast);
                    }
                }
            }
        }
    }

    #[test]
    fn degree_examples() {
        let prod: Poly = parse("x1*x2").unwrap();
        let report = commutator_degree(&prod).unwrap();
        assert_eq!(report.degree, 0);
        assert!(report.witness.is_none());
        assert_eq!(report.beta, rat(1));
        assert_eq!(report.profiles_checked, 1);

        let comm: Poly = parse("[x1,x2]").unwrap();
        let report = commutator_degree(&comm).unwrap();
        assert_eq!(report.degree, 1);
        assert_eq!(report.beta, rat(1));
        assert_eq!(report.profiles_checked, 2);
        let witness = report.witness.unwrap();
        assert_eq!(witness.blocks(), &[Vec::<usize>::new()]);
        assert_eq!(witness.anchors(), &[1]);

        assert_eq!(commutator_degree(&standard_poly::<Rat>(4)).unwrap().degree, 2);
        assert_eq!(commutator_degree(&standard_poly::<Rat>(5)).unwrap().degree, 2);
        assert_eq!(
            commutator_degree(&commutator_product::<Rat>(3)).unwrap().degree,
            3
        );

        assert!(matches!(
            commutator_degree(&Poly::zero(3)),
            Err(Error::ZeroPolynomial)
        ));
    }

    #[test]
    fn degree_search_is_deterministic() {
        let st4 = standard_poly::<Rat>(4);
        let report = commutator_degree(&st4).unwrap();
        // k = 0 (1 profile) + k = 1 (32 profiles) + shape (0,0) of k = 2
        // (12 profiles) + the first profile of shape (0,1).
        assert_eq!(report.profiles_checked, 46);
        let witness = report.witness.unwrap();
        assert_eq!(witness.blocks(), &[vec![], vec![2]]);
        assert_eq!(witness.anchors(), &[1, 3]);
        assert_eq!(report.beta, rat(1));
    }

    #[test]
    fn degree_is_scale_invariant_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..30 {
            let m = rng.random_range(1..=5);
            let poly = random_poly(&mut rng, m);
            let report = commutator_degree(&poly).unwrap();
            assert!(report.degree <= m / 2);
            let scaled = poly.scale(&Rat::new(7.into(), 3.into()));
            assert_eq!(commutator_degree(&scaled).unwrap().degree, report.degree);
        }
    }

    #[test]
    fn bruteforce_examples() {
        assert!(is_identity_bruteforce(&commutator_product::<Rat>(2), 2));
        assert!(!is_identity_bruteforce(&commutator_product::<Rat>(2), 3));
        let prod: Poly = parse("x1*x2").unwrap();
        assert!(!is_identity_bruteforce(&prod, 1));
    }

    #[test]
    fn oracle_examples() {
        let comm: Poly = parse("x1*x2 - x2*x1").unwrap();
        assert_eq!(
            commutator_degree_oracle(&comm, 3).unwrap(),
            OracleDegree::Exact(1)
        );
        assert_eq!(
            commutator_degree_oracle(&standard_poly::<Rat>(4), 3).unwrap(),
            OracleDegree::Exact(2)
        );
        let prod: Poly = parse("x1*x2").unwrap();
        assert_eq!(
            commutator_degree_oracle(&prod, 3).unwrap(),
            OracleDegree::Exact(0)
        );
        assert_eq!(
            commutator_degree_oracle(&commutator_product::<Rat>(3), 2).unwrap(),
            OracleDegree::AtLeast(2)
        );
        assert!(matches!(
            commutator_degree_oracle(&Poly::zero(2), 2),
            Err(Error::ZeroPolynomial)
        ));
    }

    #[test]
    fn oracle_agrees_with_criterion_on_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let m = rng.random_range(1..=4);
            let poly = random_poly(&mut rng, m);
            let criterion = commutator_degree(&poly).unwrap().degree.min(3);
            let oracle = commutator_degree_oracle(&poly, 3).unwrap().lower_bound();
            assert_eq!(criterion, oracle, "{poly:?}");
        }
    }

    #[test]
    fn oracle_agrees_on_renamed_generator_combinations() {
        let c2 = commutator_product::<Rat>(2);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut deep_cases = 0;
        for _ in 0..10 {
            let mut combo = Poly::zero(4);
            for _ in 0..3 {
                let mut word: Vec<usize> = (1..=4).collect();
                word.shuffle(&mut rng);
                let renaming = Permutation::from_images(&word).unwrap();
                let renamed = Poly::from_terms(
                    4,
                    c2.terms()
                        .map(|(perm, coeff)| (renaming.compose(perm).unwrap(), coeff.clone())),
                )
                .unwrap();
                combo = combo
                    .add(&renamed.scale(&rat(rng.random_range(-3..=3))))
                    .unwrap();
            }
            if combo.is_zero() {
                continue;
            }
            deep_cases += 1;
            let criterion = commutator_degree(&combo).unwrap().degree;
            assert!(criterion >= 2, "{combo:?}");
            let oracle = commutator_degree_oracle(&combo, 3).unwrap().lower_bound();
            assert_eq!(criterion.min(3), oracle, "{combo:?}");
        }
        assert!(deep_cases >= 5);
    }

    #[test]
    fn witness_evaluation_examples() {
        let comm: Poly = parse("[x1,x2]").unwrap();
        let profile = Profile::new(2, vec![vec![]], vec![1]).unwrap();
        let matrices = witness_evaluation::<Rat>(&profile).unwrap();
        assert_eq!(matrices[0], Matrix::unit(2, 1, 2).unwrap());
        assert_eq!(matrices[1], Matrix::unit(2, 2, 2).unwrap());
        let value = evaluate(&comm, &matrices).unwrap();
        assert_eq!(value, Matrix::unit(2, 1, 2).unwrap());

        let c2 = commutator_product::<Rat>(2);
        let report = commutator_degree(&c2).unwrap();
        let witness = report.witness.unwrap();
        let matrices = witness_evaluation::<Rat>(&witness).unwrap();
        let value = evaluate(&c2, &matrices).unwrap();
        assert_eq!(
            value,
            Matrix::unit(3, 1, 3).unwrap().scale(&report.beta)
        );
        assert!(!value.is_zero());

        assert!(matches!(
            witness_evaluation::<Rat>(&Profile::empty(3)),
            Err(Error::InvalidProfile(_))
        ));
    }

    #[test]
    fn witness_soundness_on_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut seen_positive_degree = 0;
        for _ in 0..60 {
            let m = rng.random_range(2..=5);
            let poly = random_poly(&mut rng, m);
            let report = commutator_degree(&poly).unwrap();
            if report.degree == 0 {
                continue;
            }
            seen_positive_degree += 1;
            let witness = report.witness.clone().unwrap();
            assert_eq!(witness.k(), report.degree);
            assert_eq!(beta(&poly, &witness).unwrap(), report.beta);
            let matrices = witness_evaluation::<Rat>(&witness).unwrap();
            let value = evaluate(&poly, &matrices).unwrap();
            let expected = Matrix::unit(report.degree + 1, 1, report.degree + 1)
                .unwrap()
                .scale(&report.beta);
            assert_eq!(value, expected);
        }
        assert!(seen_positive_degree > 0, "sample never hit degree >= 1");
    }

    #[test]
    fn vanishing_soundness() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let polys: Vec<Poly> = vec![
            parse("[x1,x2]").unwrap(),
            commutator_product(2),
            standard_poly(4),
        ];
        for poly in &polys {
            let r = commutator_degree(poly).unwrap().degree;
            assert!(r >= 1);
            for _ in 0..10 {
                // Evaluations on UT_r vanish.
                let args: Vec<Matrix> = (0..poly.arity())
                    .map(|_| random_matrix(&mut rng, r))
                    .collect();
                assert!(evaluate(poly, &args).unwrap().is_zero());
                // Evaluations on UT_{r+2} land in J^r.
                let args: Vec<Matrix> = (0..poly.arity())
                    .map(|_| random_matrix(&mut rng, r + 2))
                    .collect();
                assert!(evaluate(poly, &args).unwrap().in_radical_power(r));
            }
        }
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let mut entries = Vec::new();
        for i in 1..=n {
            for j in i..=n {
                entries.push((i, j, rat(rng.random_range(-9..=9))));
            }
        }
        Matrix::from_entries(n, entries).unwrap()
    }

    #[test]
    fn bruteforce_cost_model() {
        assert_eq!(bruteforce_evaluations(2, 2), 9);
        assert_eq!(bruteforce_evaluations(4, 3), 1296);
        assert!(bruteforce_evaluations(6, 20) > BRUTEFORCE_BUDGET);
    }

    #[test]
    fn degree_report_serialization() {
        let comm: Poly = parse("[x1,x2]").unwrap();
        let report = commutator_degree(&comm).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(
            json,
            r#"{"degree":1,"witness":{"k":1,"T":[[]],"t":[1]},"beta":"1","profiles_checked":2}"#
        );

        let prod: Poly = parse("x1*x2").unwrap();
        let report = commutator_degree(&prod).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(
            json,
            r#"{"degree":0,"witness":null,"beta":"1","profiles_checked":1}"#
        );
    }

    #[test]
    fn works_over_floats_too() {
        let report = commutator_degree(&standard_poly::<f64>(4)).unwrap();
        assert_eq!(report.degree, 2);
    }
}
