//! Exact upper triangular matrix arithmetic, matrix units, radical powers,
//! and evaluation of multilinear polynomials.
//!
//! Matrices are stored sparsely: evaluations on matrix units touch very few
//! entries, and the brute-force identity oracle multiplies enormous numbers
//! of single-entry matrices. Strictly lower positions are unrepresentable, so
//! arithmetic can never leave the upper triangular algebra.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::freealg::MultilinearPoly;
use crate::scalar::Scalar;

/// An `n × n` upper triangular matrix with entries indexed `1 ≤ i ≤ j ≤ n`.
/// Zero entries are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct UTMatrix<S: Scalar> {
    n: usize,
    entries: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> UTMatrix<S> {
    pub fn zero(n: usize) -> Self {
        UTMatrix {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        UTMatrix {
            n,
            entries: (1..=n).map(|i| ((i, i), S::one())).collect(),
        }
    }

    /// The matrix unit `E_{i,j}`.
    pub fn unit(n: usize, i: usize, j: usize) -> Result<Self> {
        MatrixUnit::new(n, i, j).map(|u| u.to_matrix())
    }

    /// Builds a matrix from `(i, j, value)` triples; duplicate positions are
    /// summed and zero sums dropped.
    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, S)>,
    {
        let mut matrix = UTMatrix::zero(n);
        for (i, j, value) in entries {
            matrix.add_entry(i, j, value)?;
        }
        Ok(matrix)
    }

    fn add_entry(&mut self, i: usize, j: usize, value: S) -> Result<()> {
        if i == 0 || j < i || j > self.n {
            return Err(Error::IndexOutOfRange { n: self.n, i, j });
        }
        if value.is_zero() {
            return Ok(());
        }
        match self.entries.entry((i, j)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + value;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&S> {
        self.entries.get(&(i, j))
    }

    /// The entry at `(i, j)`, materializing zeros.
    pub fn entry(&self, i: usize, j: usize) -> S {
        self.get(i, j).cloned().unwrap_or_else(S::zero)
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut out = self.clone();
        for (i, j, value) in other.entries() {
            out.add_entry(i, j, value.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&(-S::one())))
    }

    pub fn scale(&self, factor: &S) -> Self {
        if factor.is_zero() {
            return UTMatrix::zero(self.n);
        }
        UTMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|(&k, v)| (k, v.clone() * factor.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut out = UTMatrix::zero(self.n);
        for (&(i, k), left) in &self.entries {
            for (&(_, j), right) in other.entries.range((k, 0)..(k + 1, 0)) {
                out.add_entry(i, j, left.clone() * right.clone())?;
            }
        }
        Ok(out)
    }

    /// Whether the matrix lies in `J^r`: every nonzero entry `(i, j)` has
    /// `j − i ≥ r`. `J^0` is the whole algebra, so `r = 0` is always true.
    pub fn in_radical_power(&self, r: usize) -> bool {
        self.entries.keys().all(|&(i, j)| j - i >= r)
    }
}

impl<S: Scalar> fmt::Display for UTMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 1..=self.n {
            if i > 1 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 1..=self.n {
                if j > 1 {
                    write!(f, ", ")?;
                }
                if j < i {
                    write!(f, "0")?;
                } else {
                    write!(f, "{}", self.entry(i, j))?;
                }
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> fmt::Debug for UTMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UTMatrix({self})")
    }
}

/// JSON encoding: `{ "n": 3, "entries": [[1, 2, "1/2"], …] }`, entries sorted
/// row-major, rationals as strings.
impl<S: Scalar> Serialize for UTMatrix<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut state = serializer.serialize_struct("UTMatrix", 2)?;
        state.serialize_field("n", &self.n)?;
        let entries: Vec<(usize, usize, String)> = self
            .entries()
            .map(|(i, j, v)| (i, j, v.to_string()))
            .collect();
        state.serialize_field("entries", &entries)?;
        state.end()
    }
}

impl<'de, S: Scalar> Deserialize<'de> for UTMatrix<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            entries: Vec<(usize, usize, String)>,
        }
        let repr = Repr::deserialize(deserializer)?;
        if repr.n == 0 {
            return Err(D::Error::custom(Error::InvalidMatrix(
                "matrix size must be at least 1".into(),
            )));
        }
        let mut matrix = UTMatrix::zero(repr.n);
        let mut seen = std::collections::BTreeSet::new();
        for (i, j, text) in repr.entries {
            if !seen.insert((i, j)) {
                return Err(D::Error::custom(Error::InvalidMatrix(format!(
                    "entry ({i},{j}) appears twice"
                ))));
            }
            let value: S = text.parse().map_err(|_| {
                D::Error::custom(Error::InvalidMatrix(format!(
                    "cannot parse entry value `{text}` at ({i},{j})"
                )))
            })?;
            matrix.add_entry(i, j, value).map_err(D::Error::custom)?;
        }
        Ok(matrix)
    }
}

/// The matrix unit `E_{i,j}` of `UT_n`, kept symbolic so unit products reduce
/// to an index check instead of a sparse multiply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MatrixUnit {
    n: usize,
    i: usize,
    j: usize,
}

impl MatrixUnit {
    pub fn new(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == 0 || j < i || j > n {
            return Err(Error::IndexOutOfRange { n, i, j });
        }
        Ok(MatrixUnit { n, i, j })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self) -> usize {
        self.i
    }

    pub fn col(&self) -> usize {
        self.j
    }

    /// `E_{i,j} · E_{k,l}` is `E_{i,l}` when `j = k` and zero otherwise.
    pub fn product(&self, other: &MatrixUnit) -> Option<MatrixUnit> {
        debug_assert_eq!(self.n, other.n);
        if self.j == other.i {
            Some(MatrixUnit {
                n: self.n,
                i: self.i,
                j: other.j,
            })
        } else {
            None
        }
    }

    pub fn to_matrix<S: Scalar>(&self) -> UTMatrix<S> {
        let mut entries = BTreeMap::new();
        entries.insert((self.i, self.j), S::one());
        UTMatrix {
            n: self.n,
            entries,
        }
    }
}

/// All `n(n+1)/2` matrix units of `UT_n` in row-major order (`i` ascending,
/// then `j`). The order is load-bearing: the brute-force oracle enumerates
/// substitutions by indexing into this list.
pub fn enumerate_units(n: usize) -> Vec<MatrixUnit> {
    let mut units = Vec::with_capacity(n * (n + 1) / 2);
    for i in 1..=n {
        for j in i..=n {
            units.push(MatrixUnit { n, i, j });
        }
    }
    units
}

/// Evaluates `poly` at the given matrices: `Σ_σ α_σ · args_{σ(1)} ⋯ args_{σ(m)}`.
///
/// Each monomial is multiplied left to right and abandoned as soon as a
/// partial product vanishes, which is the overwhelmingly common case for
/// matrix-unit substitutions.
pub fn evaluate<S: Scalar>(
    poly: &MultilinearPoly<S>,
    args: &[UTMatrix<S>],
) -> Result<UTMatrix<S>> {
    if args.len() != poly.arity() {
        return Err(Error::ArityMismatch {
            expected: poly.arity(),
            found: args.len(),
        });
    }
    if args.is_empty() {
        // The only representable arity-0 polynomial is zero; without an
        // argument there is no matrix size to give its value.
        return Err(Error::ZeroPolynomial);
    }
    let n = args[0].size();
    for arg in args {
        if arg.size() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: arg.size(),
            });
        }
    }
    let mut acc = UTMatrix::zero(n);
    for (perm, coeff) in poly.terms() {
        let mut word = perm.word();
        let first = word.next().expect("positive arity");
        let mut product = args[first - 1].clone();
        for q in word {
            if product.is_zero() {
                break;
            }
            product = product.mul(&args[q - 1])?;
        }
        acc = acc.add(&product.scale(coeff))?;
    }
    Ok(acc)
}
