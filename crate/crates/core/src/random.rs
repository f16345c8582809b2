//! Random algebra elements, states, contexts and directions for property
//! harnesses.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{AlgebraElement, Matrix, Observable, Vector};
use crate::context::Context;
use crate::ensemble::QuantumState;
use crate::{Complex, Result};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

/// Element with independent complex Gaussian entries.
pub fn element<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<AlgebraElement> {
    AlgebraElement::new(ginibre(dim, rng))
}

/// Hermitian part of a Gaussian element.
pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Observable> {
    Ok(element(dim, rng)?.hermitian_parts().0)
}

/// Haar-random unitary (QR of a Ginibre matrix with the phases of `R`
/// divided out).
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Matrix> {
    let g = AlgebraElement::new(ginibre(dim, rng))?.into_entries();
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    Ok(q)
}

pub fn context<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Context> {
    Context::from_basis(unitary(dim, rng)?)
}

/// `U diag(x) U*` with Gaussian `x`: an observable diagonal in `context`.
pub fn diagonal_in<R: Rng + ?Sized>(context: &Context, rng: &mut R) -> Result<Observable> {
    let d = context.dim();
    let diag = Vector::from_fn(d, |_, _| Complex::new(StandardNormal.sample(rng), 0.0));
    let u = context.basis();
    let m = u * Matrix::from_diagonal(&diag) * u.adjoint();
    // hermitian up to rounding
    Ok(AlgebraElement::new(m)?.hermitian_parts().0)
}

pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| gaussian(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / Complex::new(n, 0.0);
        }
    }
}

pub fn pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<QuantumState> {
    QuantumState::pure(&unit_vector(dim, rng))
}

/// Full-rank mixed state: a normalized Wishart matrix mixed with 5% of the
/// maximally mixed state, so every eigenvalue is at least `0.05 / d`.
pub fn mixed_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<QuantumState> {
    let g = ginibre(dim, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let mix = 0.05;
    let rho = w * Complex::new((1.0 - mix) / tr, 0.0)
        + Matrix::identity(dim, dim) * Complex::new(mix / dim as f64, 0.0);
    let rho = (&rho + rho.adjoint()) * Complex::new(0.5, 0.0);
    QuantumState::from_density(AlgebraElement::new(rho)?)
}

/// Either a pure or a full-rank state, chosen by a fair coin.
pub fn state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<QuantumState> {
    if rng.random::<bool>() {
        pure_state(dim, rng)
    } else {
        mixed_state(dim, rng)
    }
}

/// Uniform point on the unit sphere in `R^3`.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = SeedStream::new(1).replica(0);
        for d in 1..=8 {
            let u = unitary(d, &mut rng).unwrap();
            let gram = AlgebraElement::new(u.adjoint() * &u).unwrap();
            assert!(gram.max_abs_diff(&AlgebraElement::identity(d).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn states_are_valid() {
        let mut rng = SeedStream::new(2).replica(0);
        for d in 1..=8 {
            let p = pure_state(d, &mut rng).unwrap();
            assert!((p.rho().trace().re - 1.0).abs() < 1e-12);
            let m = mixed_state(d, &mut rng).unwrap();
            let spec = Observable::new(m.rho().clone()).unwrap().spectral().unwrap();
            assert!(spec.eigenvalues[0] >= 0.05 / d as f64 - 1e-12);
        }
    }

    #[test]
    fn sphere_points_are_unit() {
        let mut rng = SeedStream::new(3).replica(0);
        for _ in 0..100 {
            let p = sphere_point(&mut rng);
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
