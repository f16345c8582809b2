//! The matrix *-algebra `M_d(C)`: arithmetic, involution, spectral readout.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Complex, Error, Result};

pub type Matrix = DMatrix<Complex>;
pub type Vector = DVector<Complex>;

/// Largest supported dimension `d`.
pub const DIM_CAP: usize = 64;

/// Absolute max-entry tolerance for hermiticity, commutation and relevance.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are treated as one degenerate eigenspace.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// First component above this magnitude carries the phase convention.
pub const PHASE_THRESHOLD: f64 = 1e-8;

/// Residual norms below this are discarded when completing a degenerate
/// eigenspace from projected canonical vectors.
const PROJECTION_FLOOR: f64 = 1e-6;

const EIGEN_MAX_ITER: usize = 100_000;

/// Negative eigenvalues down to this are clamped to zero in [`Observable::positive_sqrt`].
pub const PSD_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// An element of the algebra: a `d x d` complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    entries: Matrix,
}

impl AlgebraElement {
    pub fn new(entries: Matrix) -> Result<Self> {
        let d = entries.nrows();
        if entries.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, expected square",
                d,
                entries.ncols()
            )));
        }
        check_dim(d)?;
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { entries })
    }

    /// Row-major construction.
    pub fn from_rows(dim: usize, data: &[Complex]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Self::new(Matrix::from_row_slice(dim, dim, data))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { entries: Matrix::identity(dim, dim) })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { entries: Matrix::zeros(dim, dim) })
    }

    pub fn from_diagonal(diag: &[Complex]) -> Result<Self> {
        check_dim(diag.len())?;
        Self::new(Matrix::from_diagonal(&Vector::from_row_slice(diag)))
    }

    /// `|v><w|`
    pub fn outer(v: &Vector, w: &Vector) -> Result<Self> {
        Self::new(v * w.adjoint())
    }

    pub(crate) fn from_matrix_unchecked(entries: Matrix) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_entries(self) -> Matrix {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.entries[(row, col)]
    }

    fn same_dim(&self, other: &AlgebraElement) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_dim(other)?;
        Ok(Self { entries: &self.entries + &other.entries })
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_dim(other)?;
        Ok(Self { entries: &self.entries - &other.entries })
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_dim(other)?;
        Ok(Self { entries: &self.entries * &other.entries })
    }

    pub fn scale(&self, factor: Complex) -> AlgebraElement {
        Self { entries: &self.entries * factor }
    }

    /// The involution: conjugate transpose.
    pub fn adjoint(&self) -> AlgebraElement {
        Self { entries: self.entries.adjoint() }
    }

    /// `ab - ba`
    pub fn commutator(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_dim(other)?;
        let ab = &self.entries * &other.entries;
        let ba = &other.entries * &self.entries;
        Ok(Self { entries: ab - ba })
    }

    /// Kronecker product; `self` acts on the first (more significant) factor.
    pub fn tensor(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        let dim = self.dim() * other.dim();
        check_dim(dim)?;
        Ok(Self { entries: self.entries.kronecker(&other.entries) })
    }

    pub fn trace(&self) -> Complex {
        self.entries.trace()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude of `self - other` (infinite on dimension mismatch).
    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `(R + R*)/2` and `(R - R*)/2i`, so that `R = A + iB`.
    pub fn hermitian_parts(&self) -> (Observable, Observable) {
        let adj = self.entries.adjoint();
        let a = (&self.entries + &adj) * c(0.5, 0.0);
        let b = (&self.entries - &adj) * c(0.0, -0.5);
        (
            Observable::from_matrix_unchecked(a),
            Observable::from_matrix_unchecked(b),
        )
    }

    /// Operator norm: the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.entries
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > DIM_CAP {
        return Err(Error::DimensionOutOfRange { dim, cap: DIM_CAP });
    }
    Ok(())
}

/// A hermitian algebra element: the latent form of an observable quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    element: AlgebraElement,
}

impl Observable {
    pub fn new(element: AlgebraElement) -> Result<Self> {
        let deviation = element.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { element })
    }

    /// Real diagonal observable.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let diag: Vec<Complex> = values.iter().map(|&v| c(v, 0.0)).collect();
        Self::new(AlgebraElement::from_diagonal(&diag)?)
    }

    /// `lambda * I`
    pub fn scalar(dim: usize, lambda: f64) -> Result<Self> {
        Ok(Self { element: AlgebraElement::identity(dim)?.scale(c(lambda, 0.0)) })
    }

    /// Projects an arbitrary matrix onto its hermitian part, bypassing the
    /// tolerance check. Internal results that are hermitian up to rounding
    /// go through here.
    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        let h = (&m + m.adjoint()) * c(0.5, 0.0);
        Self { element: AlgebraElement::from_matrix_unchecked(h) }
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.element
    }

    pub fn into_element(self) -> AlgebraElement {
        self.element
    }

    pub fn dim(&self) -> usize {
        self.element.dim()
    }

    pub fn entries(&self) -> &Matrix {
        self.element.entries()
    }

    pub fn sum(&self, other: &Observable) -> Result<Observable> {
        Ok(Self { element: self.element.add(&other.element)? })
    }

    pub fn scaled(&self, factor: f64) -> Observable {
        Self { element: self.element.scale(c(factor, 0.0)) }
    }

    pub fn square(&self) -> Observable {
        Self::from_matrix_unchecked(self.entries() * self.entries())
    }

    /// Product of two commuting observables (hermitian only when they commute).
    pub fn product(&self, other: &Observable) -> Result<Observable> {
        let deviation = self.element.commutator(&other.element)?.max_abs();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonCommuting { deviation });
        }
        Ok(Self::from_matrix_unchecked(self.entries() * other.entries()))
    }

    pub fn tensor(&self, other: &Observable) -> Result<Observable> {
        Ok(Self { element: self.element.tensor(&other.element)? })
    }

    /// True iff max-entry `|[a, b]| <= tol`. Mismatched dimensions never commute.
    pub fn commutes(&self, other: &Observable, tol: f64) -> bool {
        match self.element.commutator(&other.element) {
            Ok(comm) => comm.max_abs() <= tol,
            Err(_) => false,
        }
    }

    pub fn spectral(&self) -> Result<SpectralDecomposition> {
        spectral(self)
    }

    /// The positive square root of a positive semidefinite observable.
    pub fn positive_sqrt(&self) -> Result<Observable> {
        positive_sqrt(self)
    }
}

impl From<Observable> for AlgebraElement {
    fn from(o: Observable) -> Self {
        o.element
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// (the columns of `eigenvectors`).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `sum_k f(lambda_k) v_k v_k*`
    pub fn apply(&self, f: impl Fn(f64) -> Complex) -> Matrix {
        let v = &self.eigenvectors;
        let diag = Matrix::from_diagonal(&Vector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&l| f(l)),
        ));
        v * diag * v.adjoint()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.apply(|l| c(l, 0.0))
    }

    /// Index ranges of eigenvalue clusters (consecutive gaps below [`DEGENERACY_GAP`]).
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        clusters(&self.eigenvalues)
    }
}

fn clusters(sorted: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] >= DEGENERACY_GAP {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Hermitian eigendecomposition with the deterministic basis convention:
/// ascending eigenvalues, degenerate eigenspaces spanned by the orthonormalized
/// projections of `e_0, e_1, ...` in index order, and each vector's first
/// significant component real positive.
pub fn spectral(a: &Observable) -> Result<SpectralDecomposition> {
    let d = a.dim();
    let m = a.entries();
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("hermitian eigensolver did not converge".into()))?;
    if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numerical("eigensolver produced non-finite eigenvalues".into()));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let raw: Vec<Vector> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();

    let mut columns: Vec<Vector> = Vec::with_capacity(d);
    for range in clusters(&eigenvalues) {
        if range.len() == 1 {
            let v = &raw[range.start];
            columns.push(fix_phase(v / c(v.norm(), 0.0)));
        } else {
            columns.extend(complete_degenerate(&raw[range], d)?);
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: Matrix::from_columns(&columns),
    })
}

/// Canonical orthonormal basis of the span of `space`.
fn complete_degenerate(space: &[Vector], d: usize) -> Result<Vec<Vector>> {
    let projector = space
        .iter()
        .fold(Matrix::zeros(d, d), |acc, v| acc + v * v.adjoint());
    let mut chosen: Vec<Vector> = Vec::with_capacity(space.len());
    for j in 0..d {
        if chosen.len() == space.len() {
            break;
        }
        let mut v = projector.column(j).into_owned();
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for u in &chosen {
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
        }
        let norm = v.norm();
        if norm > PROJECTION_FLOOR {
            chosen.push(fix_phase(v / c(norm, 0.0)));
        }
    }
    if chosen.len() != space.len() {
        return Err(Error::Numerical(format!(
            "could not complete a {}-dimensional eigenspace",
            space.len()
        )));
    }
    Ok(chosen)
}

/// Rotate `v` so its first component above [`PHASE_THRESHOLD`] is real positive.
pub(crate) fn fix_phase(v: Vector) -> Vector {
    match v.iter().find(|z| z.norm() > PHASE_THRESHOLD) {
        Some(z) => {
            let phase = z.conj() / z.norm();
            let mut out = v * phase;
            // pin the reference component to an exact real
            if let Some(w) = out.iter_mut().find(|w| w.norm() > PHASE_THRESHOLD) {
                *w = c(w.norm(), 0.0);
            }
            out
        }
        None => v,
    }
}

pub fn positive_sqrt(p: &Observable) -> Result<Observable> {
    let spec = spectral(p)?;
    if let Some(&lowest) = spec.eigenvalues.first() {
        if lowest < -PSD_TOL {
            return Err(Error::NotPositive { eigenvalue: lowest });
        }
    }
    Ok(Observable::from_matrix_unchecked(spec.apply(|l| c(l.max(0.0).sqrt(), 0.0))))
}

/// Pauli matrices and related constants on `C^2`.
pub mod pauli {
    use super::*;

    fn obs(rows: [Complex; 4]) -> Observable {
        Observable::new(AlgebraElement::from_rows(2, &rows).expect("2x2")).expect("hermitian")
    }

    pub fn identity() -> Observable {
        obs([c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
    }

    pub fn sigma_x() -> Observable {
        obs([c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn sigma_y() -> Observable {
        obs([c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }

    pub fn sigma_z() -> Observable {
        obs([c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    /// `n_x sigma_x + n_y sigma_y + n_z sigma_z`
    pub fn along(n: [f64; 3]) -> Observable {
        obs([
            c(n[2], 0.),
            c(n[0], -n[1]),
            c(n[0], n[1]),
            c(-n[2], 0.),
        ])
    }
}
