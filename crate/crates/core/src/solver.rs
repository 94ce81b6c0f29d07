//! Constructive preimage solving: given a multilinear `f` of
//! commutator-degree `r` and a target `A ∈ J^r ⊆ UT_n`, produce matrices
//! `c_1, …, c_m` with `f(c_1, …, c_m) = A`, exactly.
//!
//! The construction follows the witness profile of the degree search. Block
//! variables become diagonal matrices `D_l`, all but the last anchor become
//! superdiagonal matrices `N_i`, and the last anchor is the pivot `X` whose
//! entries are solved for. Because `f` is linear in the pivot slot, the
//! coefficients `Δ_{j,q,k}` of the resulting triangular system are extracted
//! numerically — one evaluation of `f` with the pivot set to a single matrix
//! unit per coefficient — instead of expanding anything symbolically. The
//! diagonal and superdiagonal parameters are sampled from `{1, …, 2^16}`;
//! the leading coefficients `Δ_{r,q,k}` are nonzero polynomials in those
//! parameters, so a sample rarely misses and a reseeded retry covers the
//! exceptional case.
//!
//! Every certificate is re-verified by exact evaluation before it is
//! returned; a mismatch is reported as an internal failure, never as data.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::degree::{DegreeReport, Profile, beta, commutator_degree};
use crate::error::{Error, Result};
use crate::freealg::MultilinearPoly;
use crate::scalar::{Scalar, from_i64};
use crate::triangular::{UTMatrix, evaluate};

/// Default cap on delta-table sampling rounds.
pub const DEFAULT_MAX_RETRIES: u32 = 8;

/// Inclusive upper end of the sampling domain `{1, …, 2^16}` for the
/// diagonal and superdiagonal parameters.
const SAMPLE_MAX: u32 = 1 << 16;

/// Deterministically derives the seed for a sub-task (retry attempt,
/// certification sample, …) from a base seed, SplitMix64-style.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What a variable is mapped to in the generic evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariableRole {
    /// `c_v = D_l`, a diagonal matrix; `l` ranges over `1..=r+1` and
    /// `l = r+1` is the complement block.
    DiagonalBlock(usize),
    /// `c_v = N_i`, a superdiagonal matrix; `i` ranges over `1..=r-1`.
    Superdiagonal(usize),
    /// `c_v = X`, the solved matrix. Exactly one variable (the last anchor).
    Pivot,
}

/// A witness profile turned into concrete matrices: per-variable roles plus
/// sampled values for every diagonal and superdiagonal parameter.
#[derive(Clone, Debug)]
pub struct GenericAssignment<S: Scalar> {
    n: usize,
    degree: usize,
    roles: Vec<VariableRole>,
    /// `diag_values[l-1][j-1]` is the `(j,j)` entry of `D_l`.
    diag_values: Vec<Vec<S>>,
    /// `super_values[i-1][j-1]` is the `(j,j+1)` entry of `N_i`.
    super_values: Vec<Vec<S>>,
    seed: u64,
}

impl<S: Scalar> GenericAssignment<S> {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn roles(&self) -> &[VariableRole] {
        &self.roles
    }

    pub fn pivot_variable(&self) -> usize {
        self.roles
            .iter()
            .position(|role| *role == VariableRole::Pivot)
            .expect("an assignment always has a pivot")
            + 1
    }

    fn diagonal_matrix(&self, l: usize) -> UTMatrix<S> {
        UTMatrix::from_entries(
            self.n,
            (1..=self.n).map(|j| (j, j, self.diag_values[l - 1][j - 1].clone())),
        )
        .expect("diagonal entries are in range")
    }

    fn superdiagonal_matrix(&self, i: usize) -> UTMatrix<S> {
        UTMatrix::from_entries(
            self.n,
            (1..self.n).map(|j| (j, j + 1, self.super_values[i - 1][j - 1].clone())),
        )
        .expect("superdiagonal entries are in range")
    }

    /// The matrix a non-pivot variable maps to; `None` for the pivot.
    pub fn matrix_for(&self, variable: usize) -> Option<UTMatrix<S>> {
        match self.roles[variable - 1] {
            VariableRole::DiagonalBlock(l) => Some(self.diagonal_matrix(l)),
            VariableRole::Superdiagonal(i) => Some(self.superdiagonal_matrix(i)),
            VariableRole::Pivot => None,
        }
    }

    /// The full argument tuple with the pivot slot set to `pivot`.
    pub fn matrices_with_pivot(&self, pivot: &UTMatrix<S>) -> Vec<UTMatrix<S>> {
        self.roles
            .iter()
            .enumerate()
            .map(|(index, role)| match role {
                VariableRole::Pivot => pivot.clone(),
                _ => self.matrix_for(index + 1).expect("non-pivot role"),
            })
            .collect()
    }
}

/// Assigns roles according to the witness profile and samples all diagonal
/// and superdiagonal parameters uniformly from `{1, …, 2^16}` with the given
/// seed. Variables in `T_l` become `DiagonalBlock(l)` (the complement of the
/// profile is block `r+1`), anchors `t_1, …, t_{r-1}` become superdiagonals,
/// and `t_r` the pivot; for `r = 1` no superdiagonal appears.
pub fn build_assignment<S: Scalar>(
    poly: &MultilinearPoly<S>,
    witness: &Profile,
    n: usize,
    seed: u64,
) -> Result<GenericAssignment<S>> {
    let r = witness.k();
    if r == 0 {
        return Err(Error::InvalidWitness(
            "witness profile must have k >= 1; degree-0 preimages do not use one".into(),
        ));
    }
    if witness.arity() != poly.arity() {
        return Err(Error::InvalidWitness(format!(
            "witness arity {} does not match polynomial arity {}",
            witness.arity(),
            poly.arity()
        )));
    }
    if n <= r {
        return Err(Error::InvalidWitness(format!(
            "matrix size {n} must exceed the witness size {r}"
        )));
    }
    if beta(poly, witness)?.is_zero() {
        return Err(Error::InvalidWitness(
            "witness profile has zero beta for this polynomial".into(),
        ));
    }

    let m = poly.arity();
    // Unassigned variables form the complement block T_{r+1}.
    let mut roles = vec![VariableRole::DiagonalBlock(r + 1); m];
    for (index, block) in witness.blocks().iter().enumerate() {
        for &v in block {
            roles[v - 1] = VariableRole::DiagonalBlock(index + 1);
        }
    }
    for (index, &t) in witness.anchors().iter().enumerate() {
        roles[t - 1] = if index + 1 < r {
            VariableRole::Superdiagonal(index + 1)
        } else {
            VariableRole::Pivot
        };
    }

    // Sampling order is part of the certificate format: all diagonal values
    // (l outer, j inner), then all superdiagonal values (i outer, j inner).
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = || from_i64::<S>(i64::from(rng.random_range(1..=SAMPLE_MAX)));
    let diag_values: Vec<Vec<S>> = (1..=r + 1)
        .map(|_| (1..=n).map(|_| sample()).collect())
        .collect();
    let super_values: Vec<Vec<S>> = (1..r)
        .map(|_| (1..n).map(|_| sample()).collect())
        .collect();

    Ok(GenericAssignment {
        n,
        degree: r,
        roles,
        diag_values,
        super_values,
        seed,
    })
}

/// The coefficients `Δ_{j,q,k}` of the triangular system
/// `Σ_j Δ_{j,q,k} · x_{k+j-1, k+j-1+(q-r+1)} = a_{k,k+q}`, indexed by
/// `j ∈ 1..=r`, `q ∈ r..=n-1`, `k ∈ 1..=n-q`.
#[derive(Clone, Debug)]
pub struct DeltaTable<S: Scalar> {
    n: usize,
    degree: usize,
    values: BTreeMap<(usize, usize, usize), S>,
}

impl<S: Scalar> DeltaTable<S> {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, j: usize, q: usize, k: usize) -> &S {
        self.values
            .get(&(j, q, k))
            .expect("delta table index out of range")
    }

    /// Whether every leading coefficient `Δ_{r,q,k}` is nonzero, i.e. the
    /// table supports the back-substitution.
    pub fn leading_nonzero(&self) -> bool {
        let r = self.degree;
        self.values
            .iter()
            .filter(|((j, _, _), _)| *j == r)
            .all(|(_, value)| !value.is_zero())
    }

    /// The pivot entry `(row, col)` that `Δ_{j,q,k}` multiplies.
    pub fn pivot_position(&self, j: usize, q: usize, k: usize) -> (usize, usize) {
        (k + j - 1, k + j + q - self.degree)
    }
}

/// Extracts the delta table by linearity: for each `(j, q, k)` the pivot
/// variable is set to the single unit at [`DeltaTable::pivot_position`], all
/// other variables to their sampled matrices, and `Δ_{j,q,k}` is read off
/// entry `(k, k+q)` of the evaluation.
pub fn delta_table<S: Scalar>(
    poly: &MultilinearPoly<S>,
    assignment: &GenericAssignment<S>,
) -> DeltaTable<S> {
    let r = assignment.degree();
    let n = assignment.size();
    let pivot_slot = assignment.pivot_variable() - 1;
    let mut args = assignment.matrices_with_pivot(&UTMatrix::zero(n));
    let mut values = BTreeMap::new();
    for q in r..n {
        for k in 1..=n - q {
            for j in 1..=r {
                let (row, col) = (k + j - 1, k + j + q - r);
                args[pivot_slot] =
                    UTMatrix::unit(n, row, col).expect("pivot positions are upper triangular");
                let image = evaluate(poly, &args)
                    .expect("assignment matrices share the polynomial's arity and size");
                values.insert((j, q, k), image.entry(k, k + q));
            }
        }
    }
    DeltaTable {
        n,
        degree: r,
        values,
    }
}

/// Solves the triangular system for the pivot matrix `X`: rows `1..r-1` are
/// pinned to zero and, for each `q` and ascending `k`, entry
/// `(k+r-1, k+q)` is obtained from target entry `(k, k+q)` by subtracting
/// the already-known terms and dividing by `Δ_{r,q,k}`.
fn solve_pivot<S: Scalar>(table: &DeltaTable<S>, target: &UTMatrix<S>) -> UTMatrix<S> {
    let r = table.degree();
    let n = table.size();
    let mut pivot = UTMatrix::zero(n);
    for q in r..n {
        for k in 1..=n - q {
            let mut numerator = target.entry(k, k + q);
            for j in 1..r {
                let (row, col) = table.pivot_position(j, q, k);
                numerator = numerator - table.get(j, q, k).clone() * pivot.entry(row, col);
            }
            let value = numerator / table.get(r, q, k).clone();
            let (row, col) = table.pivot_position(r, q, k);
            pivot = pivot
                .add(
                    &UTMatrix::from_entries(n, [(row, col, value)])
                        .expect("solved pivot entries are upper triangular"),
                )
                .expect("sizes agree");
        }
    }
    pivot
}

/// A verified solution of `f(c_1, …, c_m) = A`.
#[derive(Clone, Debug)]
pub struct PreimageCertificate<S: Scalar> {
    /// Commutator-degree of the polynomial.
    pub degree: usize,
    /// Base seed the solve was called with.
    pub seed: u64,
    /// Resampling rounds burned before the delta table was usable (0 when
    /// the first sample worked).
    pub retries: u32,
    /// The witness profile driving the construction; absent for degree 0.
    pub witness: Option<Profile>,
    /// The solution matrices, one per variable.
    pub matrices: Vec<UTMatrix<S>>,
    /// The target the solution was verified against.
    pub target: UTMatrix<S>,
    /// The delta table of the successful attempt, when one was built.
    pub delta: Option<DeltaTable<S>>,
    /// Always true on a returned certificate: `evaluate(f, matrices)` equals
    /// `target` exactly.
    pub verified: bool,
}

impl<S: Scalar> Serialize for PreimageCertificate<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut state = serializer.serialize_struct("PreimageCertificate", 7)?;
        state.serialize_field("degree", &self.degree)?;
        state.serialize_field("seed", &self.seed)?;
        state.serialize_field("retries", &self.retries)?;
        state.serialize_field("witness", &self.witness)?;
        state.serialize_field("matrices", &self.matrices)?;
        state.serialize_field("target", &self.target)?;
        state.serialize_field("verified", &self.verified)?;
        state.end()
    }
}

/// Solves `f(c_1, …, c_m) = target` exactly.
///
/// The degree decides everything up front: a target outside `J^r` has no
/// preimage at all, the zero target is hit by the all-zero tuple, degree 0
/// needs only the coefficient sum, and degree `r ≥ 1` runs the witness
/// construction with up to `max_retries` sampling rounds.
pub fn solve_preimage<S: Scalar>(
    poly: &MultilinearPoly<S>,
    target: &UTMatrix<S>,
    seed: u64,
    max_retries: u32,
) -> Result<PreimageCertificate<S>> {
    let report = commutator_degree(poly)?;
    let degree = report.degree;
    let n = target.size();
    if !target.in_radical_power(degree) {
        return Err(Error::TargetOutsideImage { degree });
    }
    let m = poly.arity();

    if target.is_zero() {
        // Every monomial contains at least one zero factor.
        let matrices = vec![UTMatrix::zero(n); m];
        return finish(poly, report, seed, 0, matrices, target, None);
    }

    if degree == 0 {
        let scale = S::one() / report.beta.clone();
        let mut matrices = vec![UTMatrix::identity(n); m - 1];
        matrices.push(target.scale(&scale));
        return finish(poly, report, seed, 0, matrices, target, None);
    }

    let witness = report
        .witness
        .clone()
        .expect("positive degree always carries a witness");
    for attempt in 0..max_retries {
        let assignment = build_assignment(poly, &witness, n, derive_seed(seed, u64::from(attempt)))?;
        let table = delta_table(poly, &assignment);
        if !table.leading_nonzero() {
            continue;
        }
        let pivot = solve_pivot(&table, target);
        let matrices = assignment.matrices_with_pivot(&pivot);
        return finish(poly, report.clone(), seed, attempt, matrices, target, Some(table));
    }
    Err(Error::RetriesExhausted {
        attempts: max_retries,
    })
}

fn finish<S: Scalar>(
    poly: &MultilinearPoly<S>,
    report: DegreeReport<S>,
    seed: u64,
    retries: u32,
    matrices: Vec<UTMatrix<S>>,
    target: &UTMatrix<S>,
    delta: Option<DeltaTable<S>>,
) -> Result<PreimageCertificate<S>> {
    let value = evaluate(poly, &matrices)?;
    if value != *target {
        return Err(Error::InternalVerificationFailure(format!(
            "constructed preimage evaluates to {value} instead of {target}"
        )));
    }
    Ok(PreimageCertificate {
        degree: report.degree,
        seed,
        retries,
        witness: report.witness,
        matrices,
        target: target.clone(),
        delta,
        verified: true,
    })
}

/// Outcome of [`certify_image`]: empirical checks that the image of `f` on
/// `UT_n` is exactly `J^r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageCertificationReport {
    /// Commutator-degree of the polynomial.
    pub degree: usize,
    /// Matrix size the certification ran on.
    pub n: usize,
    /// Requested number of random samples per direction.
    pub samples: usize,
    /// Random evaluations checked for containment in `J^r`.
    pub evaluations_checked: usize,
    /// How many of them landed in `J^r` (all of them, or the run failed).
    pub evaluations_in_radical: usize,
    /// Basis units of `J^r` given exact preimages.
    pub unit_targets: usize,
    pub unit_preimages: usize,
    /// Random elements of `J^r` given exact preimages.
    pub random_targets: usize,
    pub random_preimages: usize,
    pub passed: bool,
}

/// Certifies both inclusions of "image = `J^r`" at desk scale: `samples`
/// random evaluations must land in `J^r`, and every basis unit of `J^r` plus
/// `samples` random elements of `J^r` must receive an exactly verified
/// preimage. Any containment failure marks the report failed — it would
/// contradict the degree computation, so it is treated as a bug trap, not as
/// data. Solver errors propagate.
pub fn certify_image<S: Scalar>(
    poly: &MultilinearPoly<S>,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ImageCertificationReport> {
    let report = commutator_degree(poly)?;
    let degree = report.degree;
    let m = poly.arity();

    // Stream 0 is the sampling stream; preimage solves take streams 1, 2, ….
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let mut preimage_stream: u64 = 0;

    let mut evaluations_in_radical = 0;
    for _ in 0..samples {
        let args: Vec<UTMatrix<S>> = (0..m).map(|_| random_matrix(&mut rng, n, 0)).collect();
        let value = evaluate(poly, &args)?;
        if value.in_radical_power(degree) {
            evaluations_in_radical += 1;
        }
    }

    let mut unit_targets = 0;
    let mut unit_preimages = 0;
    for i in 1..=n {
        for j in i..=n {
            if j - i < degree {
                continue;
            }
            unit_targets += 1;
            preimage_stream += 1;
            let target = UTMatrix::unit(n, i, j)?;
            let certificate = solve_preimage(
                poly,
                &target,
                derive_seed(seed, preimage_stream),
                DEFAULT_MAX_RETRIES,
            )?;
            if certificate.verified {
                unit_preimages += 1;
            }
        }
    }

    let mut random_preimages = 0;
    for _ in 0..samples {
        let target = random_matrix(&mut rng, n, degree);
        preimage_stream += 1;
        let certificate = solve_preimage(
            poly,
            &target,
            derive_seed(seed, preimage_stream),
            DEFAULT_MAX_RETRIES,
        )?;
        if certificate.verified {
            random_preimages += 1;
        }
    }

    let passed = evaluations_in_radical == samples
        && unit_preimages == unit_targets
        && random_preimages == samples;
    Ok(ImageCertificationReport {
        degree,
        n,
        samples,
        evaluations_checked: samples,
        evaluations_in_radical,
        unit_targets,
        unit_preimages,
        random_targets: samples,
        random_preimages,
        passed,
    })
}

/// A random upper triangular matrix with entries uniform in `{-100, …, 100}`
/// on the positions with `j - i >= min_offset`, row-major sampling order.
fn random_matrix<S: Scalar, R: Rng>(rng: &mut R, n: usize, min_offset: usize) -> UTMatrix<S> {
    let mut entries = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            if j - i >= min_offset {
                entries.push((i, j, from_i64::<S>(rng.random_range(-100..=100))));
            }
        }
    }
    UTMatrix::from_entries(n, entries).expect("sampled positions are upper triangular")
}
