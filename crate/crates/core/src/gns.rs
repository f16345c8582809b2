//! GNS construction for a state on `M_d(C)`.
//!
//! The algebra itself, with inner product `<R, S> = Psi(R* S)`, is a
//! pre-Hilbert space. Its Gram matrix on the matrix units `E_jk` is
//! diagonalized; eigenvectors with eigenvalue below [`NULL_THRESHOLD`] span
//! the null space, and the rest, rescaled, give an orthonormal basis
//! `f_1..f_m` of the quotient. Left multiplication then acts by the
//! `m x m` matrices `pi(A)_ij = Psi(f_i* A f_j)`, and the class of the unit
//! is the cyclic vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Matrix, Observable, Vector};
use crate::ensemble::{quantum_average, QuantumState};
use crate::{random, Complex, Error, Result};

/// Gram eigenvalues below this are treated as null directions.
pub const NULL_THRESHOLD: f64 = 1e-10;
/// Gram eigenvalues below this mean the functional was not positive.
pub const INDEFINITE_THRESHOLD: f64 = -1e-9;
/// Tolerance for the representation checks.
pub const GNS_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct GnsRepresentation {
    source_dim: usize,
    /// Orthonormal (in `Psi(R* S)`) representatives of the quotient basis.
    basis_map: Vec<AlgebraElement>,
    /// `pi(E_jk)` for the matrix units in row-major order `j * d + k`.
    unit_images: Vec<Matrix>,
    cyclic_vector: Vector,
}

fn matrix_unit(d: usize, j: usize, k: usize) -> AlgebraElement {
    let mut m = Matrix::zeros(d, d);
    m[(j, k)] = Complex::new(1.0, 0.0);
    AlgebraElement::from_matrix_unchecked(m)
}

pub fn gns_construct(psi: &QuantumState) -> Result<GnsRepresentation> {
    let d = psi.dim();
    let n = d * d;
    let units: Vec<AlgebraElement> = (0..n).map(|a| matrix_unit(d, a / d, a % d)).collect();

    let mut gram = Matrix::zeros(n, n);
    for (a, ea) in units.iter().enumerate() {
        let ea_star = ea.adjoint();
        for (b, eb) in units.iter().enumerate() {
            gram[(a, b)] = quantum_average(psi, &ea_star.mul(eb)?)?;
        }
    }
    let spec = Observable::new(AlgebraElement::new(gram)?)
        .map_err(|_| Error::Numerical("GNS Gram matrix is not hermitian".into()))?
        .spectral()?;
    if let Some(&lowest) = spec.eigenvalues.first() {
        if lowest < INDEFINITE_THRESHOLD {
            return Err(Error::Numerical(format!(
                "GNS Gram matrix is indefinite (eigenvalue {lowest:e})"
            )));
        }
    }

    // Descending eigenvalue order keeps the best-conditioned directions first.
    let mut basis_map = Vec::new();
    for k in (0..n).rev() {
        let mu = spec.eigenvalues[k];
        if mu < NULL_THRESHOLD {
            continue;
        }
        let w = spec.eigenvector(k);
        let scale = Complex::new(1.0 / mu.sqrt(), 0.0);
        // f = sum_a w_a E_a / sqrt(mu), so <f_i, f_j> = w_i* G w_j / mu = delta_ij
        let m = Matrix::from_fn(d, d, |j, kk| w[j * d + kk] * scale);
        basis_map.push(AlgebraElement::from_matrix_unchecked(m));
    }
    let m = basis_map.len();
    if m == 0 {
        return Err(Error::Numerical("GNS quotient is empty".into()));
    }

    let adjoints: Vec<AlgebraElement> = basis_map.iter().map(|f| f.adjoint()).collect();
    let mut unit_images = Vec::with_capacity(n);
    for ea in &units {
        let mut img = Matrix::zeros(m, m);
        for (i, fi_star) in adjoints.iter().enumerate() {
            let left = fi_star.mul(ea)?;
            for (j, fj) in basis_map.iter().enumerate() {
                img[(i, j)] = quantum_average(psi, &left.mul(fj)?)?;
            }
        }
        unit_images.push(img);
    }
    let cyclic_vector = Vector::from_iterator(
        m,
        adjoints.iter().map(|fi_star| psi.rho().mul(fi_star).map(|p| p.trace())).collect::<Result<Vec<_>>>()?,
    );

    Ok(GnsRepresentation { source_dim: d, basis_map, unit_images, cyclic_vector })
}

impl GnsRepresentation {
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn rep_dim(&self) -> usize {
        self.basis_map.len()
    }

    pub fn basis_map(&self) -> &[AlgebraElement] {
        &self.basis_map
    }

    pub fn cyclic_vector(&self) -> &Vector {
        &self.cyclic_vector
    }

    /// `pi(R) = sum_jk R_jk pi(E_jk)`
    pub fn represent(&self, r: &AlgebraElement) -> Result<Matrix> {
        let d = self.source_dim;
        if r.dim() != d {
            return Err(Error::DimensionMismatch { left: d, right: r.dim() });
        }
        let m = self.rep_dim();
        let mut out = Matrix::zeros(m, m);
        for (a, img) in self.unit_images.iter().enumerate() {
            let coeff = r.get(a / d, a % d);
            if coeff != Complex::new(0.0, 0.0) {
                out += img * coeff;
            }
        }
        Ok(out)
    }

    /// `<Omega, pi(R) Omega>`
    pub fn vector_state(&self, r: &AlgebraElement) -> Result<Complex> {
        let p = self.represent(r)?;
        Ok(self.cyclic_vector.dotc(&(p * &self.cyclic_vector)))
    }

    /// Rank of `{pi(E_jk) Omega}`; equals `rep_dim` for a cyclic vector.
    pub fn cyclic_rank(&self) -> usize {
        let m = self.rep_dim();
        let n = self.unit_images.len();
        let cols: Vec<Vector> = self.unit_images.iter().map(|img| img * &self.cyclic_vector).collect();
        let k = Matrix::from_columns(&cols);
        debug_assert_eq!(k.shape(), (m, n));
        let sv = k.singular_values();
        let top = sv.iter().copied().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > GNS_TOL * top.max(1.0)).count()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GnsReport {
    pub trials: usize,
    pub rep_dim: usize,
    pub norm_of_omega: f64,
    pub homomorphism: f64,
    pub star: f64,
    pub state: f64,
    pub cyclic_rank: usize,
}

impl GnsReport {
    pub fn passed(&self) -> bool {
        self.check().is_ok()
    }

    fn check(&self) -> Result<()> {
        let checks = [
            ("normalization", (self.norm_of_omega - 1.0).abs()),
            ("homomorphism", self.homomorphism),
            ("star", self.star),
            ("state", self.state),
        ];
        for (check, deviation) in checks {
            if deviation > GNS_TOL {
                return Err(Error::GnsCheck { check, deviation });
            }
        }
        if self.cyclic_rank != self.rep_dim {
            return Err(Error::GnsCheck {
                check: "cyclicity",
                deviation: (self.rep_dim - self.cyclic_rank) as f64,
            });
        }
        Ok(())
    }
}

fn max_entry(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Verify the representation on `trials` random element pairs. The report
/// holds the worst deviation per check; any failure is returned as
/// [`Error::GnsCheck`] naming the check.
pub fn verify_gns<R: Rng + ?Sized>(
    rep: &GnsRepresentation,
    psi: &QuantumState,
    trials: usize,
    rng: &mut R,
) -> Result<GnsReport> {
    let d = rep.source_dim;
    if psi.dim() != d {
        return Err(Error::DimensionMismatch { left: d, right: psi.dim() });
    }
    let mut report = GnsReport {
        trials,
        rep_dim: rep.rep_dim(),
        norm_of_omega: rep.cyclic_vector.norm_squared(),
        cyclic_rank: rep.cyclic_rank(),
        ..GnsReport::default()
    };
    let identity = AlgebraElement::identity(d)?;
    let mut pairs = vec![(identity.clone(), identity)];
    for _ in 0..trials {
        pairs.push((random::element(d, rng)?, random::element(d, rng)?));
    }
    for (r, s) in &pairs {
        let pr = rep.represent(r)?;
        let ps = rep.represent(s)?;
        let prs = rep.represent(&r.mul(s)?)?;
        report.homomorphism = report.homomorphism.max(max_entry(&(prs - &pr * &ps)));
        let pr_star = rep.represent(&r.adjoint())?;
        report.star = report.star.max(max_entry(&(pr_star - pr.adjoint())));
        let expected = quantum_average(psi, r)?;
        report.state = report.state.max((rep.vector_state(r)? - expected).norm());
    }
    report.check()?;
    Ok(report)
}
