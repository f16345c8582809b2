//! Maximal commuting sets, represented by the orthonormal basis that
//! diagonalizes them.
//!
//! In `M_d(C)` every maximal abelian *-subalgebra is the set of operators
//! diagonal in some orthonormal basis, so a [`Context`] stores only that
//! basis. Bases are canonicalized: each column carries the phase convention
//! of [`crate::algebra::spectral`], and columns are sorted by a key that does
//! not depend on any eigenvalues. Two observables with the same joint
//! eigenbasis therefore produce bit-identical contexts.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    check_dim, fix_phase, AlgebraElement, Matrix, Observable, Vector, HERMITIAN_TOL,
    PHASE_THRESHOLD,
};
use crate::{Complex, Error, Result};

/// Attempts with fresh combination coefficients before giving up.
const COMBINATION_ATTEMPTS: u64 = 8;
const COMBINATION_SEED: u64 = 0x5EED_C0DE_C0FF_EE00;

/// Grid used to compare basis components when ordering columns.
const ORDER_QUANTUM: f64 = 1e9;

#[derive(Clone, Debug, PartialEq)]
pub struct Context {
    basis: Matrix,
}

impl Context {
    /// The computational basis `e_0, ..., e_{d-1}`.
    pub fn canonical(dim: usize) -> Result<Context> {
        check_dim(dim)?;
        Ok(Context { basis: Matrix::identity(dim, dim) })
    }

    /// Context spanned by the columns of a unitary matrix.
    pub fn from_basis(basis: Matrix) -> Result<Context> {
        let d = basis.nrows();
        if basis.ncols() != d {
            return Err(Error::InvalidArgument("context basis must be square".into()));
        }
        check_dim(d)?;
        let gram = AlgebraElement::new(basis.adjoint() * &basis)?;
        let deviation = gram.max_abs_diff(&AlgebraElement::identity(d)?);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self::canonicalize(basis))
    }

    fn canonicalize(basis: Matrix) -> Context {
        let mut columns: Vec<Vector> = basis
            .column_iter()
            .map(|col| fix_phase(col.into_owned()))
            .collect();
        columns.sort_by(compare_columns);
        Context { basis: Matrix::from_columns(&columns) }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Unitary whose columns are the joint eigenvectors.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn vector(&self, k: usize) -> Vector {
        self.basis.column(k).into_owned()
    }

    /// `U* a U`
    pub fn transform(&self, a: &AlgebraElement) -> Result<Matrix> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: a.dim() });
        }
        Ok(self.basis.adjoint() * a.entries() * &self.basis)
    }

    /// Largest off-diagonal magnitude of `U* a U`.
    pub fn off_diagonal(&self, a: &Observable) -> Result<f64> {
        let m = self.transform(a.element())?;
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        Ok(worst)
    }

    /// The eigenvalues of `a` in this context's column order. Fails with
    /// [`Error::IrrelevantState`] when `a` is not diagonal here.
    pub fn diagonal_values(&self, a: &Observable) -> Result<Vec<f64>> {
        let m = self.transform(a.element())?;
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        if worst > HERMITIAN_TOL {
            return Err(Error::IrrelevantState { identity: None, deviation: worst });
        }
        (0..d)
            .map(|k| {
                let z = m[(k, k)];
                if z.im.abs() > 1e-9 {
                    Err(Error::Numerical(format!("diagonal entry {k} has imaginary part {:e}", z.im)))
                } else {
                    Ok(z.re)
                }
            })
            .collect()
    }

    /// Largest entry deviation between two bases (infinite on dimension mismatch).
    pub fn distance(&self, other: &Context) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.basis
            .iter()
            .zip(other.basis.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn first_significant(v: &Vector) -> usize {
    v.iter().position(|z| z.norm() > PHASE_THRESHOLD).unwrap_or(v.len())
}

fn quantize(x: f64) -> i64 {
    (x * ORDER_QUANTUM).round() as i64
}

/// Earlier leading index first; ties broken by components in descending
/// (real, imaginary) order.
fn compare_columns(a: &Vector, b: &Vector) -> Ordering {
    first_significant(a).cmp(&first_significant(b)).then_with(|| {
        for (x, y) in a.iter().zip(b.iter()) {
            let ord = quantize(y.re)
                .cmp(&quantize(x.re))
                .then(quantize(y.im).cmp(&quantize(x.im)));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    })
}

/// The context generated by a single observable, completed on degenerate
/// eigenspaces by the canonical-vector rule.
pub fn context_of(a: &Observable) -> Result<Context> {
    let spec = a.spectral()?;
    Ok(Context::canonicalize(spec.eigenvectors))
}

/// A context in which every input is diagonal.
///
/// Inputs are sorted into a canonical order first, so permuting the list
/// yields a bit-identical context. A real linear combination of the inputs
/// with fixed pseudo-random coefficients is diagonalized and the result
/// checked against every input, retrying with new coefficients on an
/// accidental degeneracy.
pub fn common_context(observables: &[Observable]) -> Result<Context> {
    let Some(first) = observables.first() else {
        return Err(Error::InvalidArgument("common_context needs at least one observable".into()));
    };
    let d = first.dim();
    for o in observables {
        if o.dim() != d {
            return Err(Error::DimensionMismatch { left: d, right: o.dim() });
        }
    }
    for (i, a) in observables.iter().enumerate() {
        for b in &observables[i + 1..] {
            let deviation = a.element().commutator(b.element())?.max_abs();
            if deviation > HERMITIAN_TOL {
                return Err(Error::NonCommuting { deviation });
            }
        }
    }
    if observables.len() == 1 {
        return context_of(first);
    }

    let mut sorted: Vec<&Observable> = observables.iter().collect();
    sorted.sort_by(|a, b| compare_entries(a.entries(), b.entries()));

    for attempt in 0..COMBINATION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(COMBINATION_SEED ^ attempt);
        let mut combo = Matrix::zeros(d, d);
        for o in &sorted {
            let w: f64 = rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            combo += o.entries() * Complex::new(w, 0.0);
        }
        let candidate = context_of(&Observable::from_matrix_unchecked(combo))?;
        let fits = sorted
            .iter()
            .all(|o| candidate.off_diagonal(o).is_ok_and(|dev| dev <= HERMITIAN_TOL));
        if fits {
            return Ok(candidate);
        }
    }
    Err(Error::Numerical(format!(
        "no joint eigenbasis found after {COMBINATION_ATTEMPTS} combinations"
    )))
}

fn compare_entries(a: &Matrix, b: &Matrix) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x
            .re
            .total_cmp(&y.re)
            .then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// True iff every off-diagonal entry of `U* a U` is at most `tol`.
pub fn is_diagonal_in(a: &Observable, context: &Context, tol: f64) -> bool {
    context.off_diagonal(a).is_ok_and(|dev| dev <= tol)
}
