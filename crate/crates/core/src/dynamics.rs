//! Heisenberg-picture evolution with `hbar = 1`.
//!
//! `dA/dt = i[H, A]` integrates to `A(t) = e^{iHt} A e^{-iHt}`. A physical
//! state does not change under free evolution; its values move with the
//! observables, `phi_t(A) = phi_0(A(t))`. Equivalently, a state that is
//! relevant for `A(t)` in context `c` sees `A` as diagonal in the evolved
//! context `e^{-iHt} U`.

use nalgebra::DVector;

use crate::algebra::{AlgebraElement, Matrix, Observable, SpectralDecomposition};
use crate::context::Context;
use crate::ensemble::QuantumState;
use crate::valuation::PhysicalState;
use crate::{Complex, Error, Result};

/// A time-independent Hamiltonian with its spectral decomposition cached.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    element: Observable,
    spectrum: SpectralDecomposition,
}

impl Hamiltonian {
    pub fn new(element: Observable) -> Result<Hamiltonian> {
        let spectrum = element.spectral()?;
        Ok(Hamiltonian { element, spectrum })
    }

    /// `H = 0` on `C^d`.
    pub fn zero(dim: usize) -> Result<Hamiltonian> {
        Self::new(Observable::scalar(dim, 0.0)?)
    }

    pub fn element(&self) -> &Observable {
        &self.element
    }

    pub fn dim(&self) -> usize {
        self.element.dim()
    }

    /// `e^{-iHt}`
    pub fn propagator(&self, t: f64) -> Matrix {
        self.spectrum.apply(|l| Complex::from_polar(1.0, -l * t))
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: dim });
        }
        Ok(())
    }
}

/// `A(t) = e^{iHt} A e^{-iHt}`
pub fn heisenberg_evolve(a: &Observable, h: &Hamiltonian, t: f64) -> Result<Observable> {
    h.check_dim(a.dim())?;
    let u = h.propagator(t);
    let evolved = u.adjoint() * a.entries() * &u;
    // hermitian up to rounding
    Ok(AlgebraElement::new(evolved)?.hermitian_parts().0)
}

/// `phi_t(A) = phi_0(A(t))`
pub fn evolve_physical_state_value(
    phi0: &PhysicalState,
    a: &Observable,
    h: &Hamiltonian,
    t: f64,
) -> Result<f64> {
    phi0.evaluate(&heisenberg_evolve(a, h, t)?)
}

/// The context `e^{-iHt} U`, re-canonicalized. `A(t)` is diagonal in `c`
/// exactly when `A` is diagonal in the result.
pub fn evolve_context(c: &Context, h: &Hamiltonian, t: f64) -> Result<Context> {
    h.check_dim(c.dim())?;
    Context::from_basis(h.propagator(t) * c.basis())
}

/// Schrodinger picture: `e^{-iHt} rho e^{iHt}`.
pub fn schrodinger_evolve(psi: &QuantumState, h: &Hamiltonian, t: f64) -> Result<QuantumState> {
    h.check_dim(psi.dim())?;
    let u = h.propagator(t);
    let rho = &u * psi.rho().entries() * u.adjoint();
    Ok(QuantumState::from_density_unchecked(AlgebraElement::new(rho)?))
}

/// Evolve a state vector: `e^{-iHt} v`.
pub fn evolve_vector(v: &DVector<Complex>, h: &Hamiltonian, t: f64) -> Result<DVector<Complex>> {
    h.check_dim(v.len())?;
    Ok(h.propagator(t) * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli::*;
    use crate::context::{context_of, is_diagonal_in};
    use crate::ensemble::quantum_average;
    use crate::random;
    use crate::rng::SeedStream;
    use crate::algebra::HERMITIAN_TOL;
    use std::sync::Arc;

    type M2 = [[Complex; 2]; 2];

    fn to_m2(o: &Observable) -> M2 {
        let m = o.entries();
        [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
    }

    fn mm(a: &M2, b: &M2) -> M2 {
        let mut out = [[Complex::new(0., 0.); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    fn lin(a: &M2, b: &M2, s: Complex) -> M2 {
        let mut out = *a;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += b[i][j] * s;
            }
        }
        out
    }

    /// RK4 on dA/dt = i(HA - AH), written against plain arrays.
    fn ode_oracle(h: &M2, a0: &M2, t: f64, steps: usize) -> M2 {
        let i = Complex::new(0.0, 1.0);
        let f = |a: &M2| -> M2 {
            let ha = mm(h, a);
            let ah = mm(a, h);
            let mut out = [[Complex::new(0., 0.); 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    out[r][c] = i * (ha[r][c] - ah[r][c]);
                }
            }
            out
        };
        let dt = t / steps as f64;
        let mut a = *a0;
        let half = Complex::new(dt / 2.0, 0.0);
        let full = Complex::new(dt, 0.0);
        for _ in 0..steps {
            let k1 = f(&a);
            let k2 = f(&lin(&a, &k1, half));
            let k3 = f(&lin(&a, &k2, half));
            let k4 = f(&lin(&a, &k3, full));
            for r in 0..2 {
                for c in 0..2 {
                    a[r][c] += (k1[r][c] + k2[r][c] * 2.0 + k3[r][c] * 2.0 + k4[r][c]) * (dt / 6.0);
                }
            }
        }
        a
    }

    #[test]
    fn zero_hamiltonian_is_trivial() {
        let h = Hamiltonian::zero(2).unwrap();
        let a = sigma_x().sum(&sigma_z().scaled(0.3)).unwrap();
        for t in [0.0, 1.0, -7.5] {
            assert!(heisenberg_evolve(&a, &h, t).unwrap().element().max_abs_diff(a.element()) < 1e-15);
        }
    }

    #[test]
    fn precession_matches_ode_oracle() {
        let omega = 1.3;
        let h = Hamiltonian::new(sigma_z().scaled(omega / 2.0)).unwrap();
        let h2 = to_m2(h.element());
        for &t in &[0.0, 0.4, 1.0, 2.5, -1.7] {
            let oracle = ode_oracle(&h2, &to_m2(&sigma_x()), t, 2000);
            let got = to_m2(&heisenberg_evolve(&sigma_x(), &h, t).unwrap());
            // closed form cos(wt) sx - sin(wt) sy, checked against the oracle too
            let closed = to_m2(&sigma_x().scaled((omega * t).cos()).sum(&sigma_y().scaled(-(omega * t).sin())).unwrap());
            for r in 0..2 {
                for c in 0..2 {
                    assert!((oracle[r][c] - got[r][c]).norm() < 1e-9, "t={t}");
                    assert!((oracle[r][c] - closed[r][c]).norm() < 1e-9, "t={t}");
                }
            }
        }
    }

    #[test]
    fn round_trip_and_composition() {
        let mut rng = SeedStream::new(31).replica(0);
        for d in [2, 3, 5] {
            let h = Hamiltonian::new(random::hermitian(d, &mut rng).unwrap()).unwrap();
            let a = random::hermitian(d, &mut rng).unwrap();
            let fwd = heisenberg_evolve(&a, &h, 0.7).unwrap();
            let back = heisenberg_evolve(&fwd, &h, -0.7).unwrap();
            assert!(back.element().max_abs_diff(a.element()) < 1e-9);
            let two = heisenberg_evolve(&fwd, &h, 1.1).unwrap();
            let once = heisenberg_evolve(&a, &h, 1.8).unwrap();
            assert!(two.element().max_abs_diff(once.element()) < 1e-9);
            let s0 = a.spectral().unwrap().eigenvalues;
            let s1 = fwd.spectral().unwrap().eigenvalues;
            for (x, y) in s0.iter().zip(&s1) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pictures_agree() {
        let mut rng = SeedStream::new(32).replica(0);
        let h = Hamiltonian::new(random::hermitian(4, &mut rng).unwrap()).unwrap();
        let psi = random::mixed_state(4, &mut rng).unwrap();
        let a = random::hermitian(4, &mut rng).unwrap();
        for t in [0.3, 2.0] {
            let heis = quantum_average(&psi, heisenberg_evolve(&a, &h, t).unwrap().element()).unwrap();
            let schr = quantum_average(&schrodinger_evolve(&psi, &h, t).unwrap(), a.element()).unwrap();
            assert!((heis - schr).norm() < 1e-9);
        }
    }

    #[test]
    fn physical_state_value_examples() {
        let ctx = Arc::new(Context::canonical(2).unwrap());
        let phi = PhysicalState::new(Arc::clone(&ctx), 1).unwrap();
        let frozen = Hamiltonian::zero(2).unwrap();
        assert_eq!(
            evolve_physical_state_value(&phi, &sigma_z(), &frozen, 3.0).unwrap(),
            phi.evaluate(&sigma_z()).unwrap()
        );

        let omega = 2.0;
        let h = Hamiltonian::new(sigma_z().scaled(omega)).unwrap();
        for t in [0.0, 0.5, 10.0] {
            let v = evolve_physical_state_value(&phi, &sigma_z(), &h, t).unwrap();
            assert!((v + 1.0).abs() < 1e-12);
        }

        // sigma_x(t) = cos(wt) sx - sin(wt) sy for H = (w/2) sz
        let h = Hamiltonian::new(sigma_z().scaled(omega / 2.0)).unwrap();
        let t = 0.9;
        let target = sigma_x().scaled((omega * t).cos()).sum(&sigma_y().scaled(-(omega * t).sin())).unwrap();
        let ctx = Arc::new(context_of(&target).unwrap());
        let spec = target.spectral().unwrap().eigenvalues;
        for k in 0..2 {
            let phi = PhysicalState::new(Arc::clone(&ctx), k).unwrap();
            let v = evolve_physical_state_value(&phi, &sigma_x(), &h, t).unwrap();
            assert!((v.abs() - 1.0).abs() < 1e-9);
            assert!(spec.iter().any(|l| (l - v).abs() < 1e-9));
        }
        let phi = PhysicalState::new(Arc::new(Context::canonical(2).unwrap()), 0).unwrap();
        assert!(matches!(
            evolve_physical_state_value(&phi, &sigma_x(), &h, t),
            Err(Error::IrrelevantState { .. })
        ));
    }

    #[test]
    fn evolve_context_examples() {
        let can = Context::canonical(2).unwrap();
        assert_eq!(evolve_context(&can, &Hamiltonian::zero(2).unwrap(), 5.0).unwrap(), can);
        let h = Hamiltonian::new(sigma_y().scaled(0.5)).unwrap();
        assert!(evolve_context(&can, &h, 0.0).unwrap().distance(&can) < 1e-15);

        // w = 1, wt = pi/2: e^{-i sy pi/4} e_0 = (1,1)/sqrt2, e_1 -> (-1,1)/sqrt2
        let rotated = evolve_context(&can, &h, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(rotated.distance(&context_of(&sigma_x()).unwrap()) < 1e-12);
    }

    #[test]
    fn context_transport_equivalence() {
        let mut rng = SeedStream::new(33).replica(0);
        for d in [2, 3, 4] {
            let h = Hamiltonian::new(random::hermitian(d, &mut rng).unwrap()).unwrap();
            let c = random::context(d, &mut rng).unwrap();
            let t = 0.8;
            let moved = evolve_context(&c, &h, t).unwrap();
            // A diagonal in the moved context <=> A(t) diagonal in c
            let a = random::diagonal_in(&moved, &mut rng).unwrap();
            assert!(is_diagonal_in(&heisenberg_evolve(&a, &h, t).unwrap(), &c, HERMITIAN_TOL));
            let b = random::hermitian(d, &mut rng).unwrap();
            assert!(!is_diagonal_in(&b, &moved, HERMITIAN_TOL));
            assert!(!is_diagonal_in(&heisenberg_evolve(&b, &h, t).unwrap(), &c, HERMITIAN_TOL));
        }
    }

    #[test]
    fn relevance_is_transported() {
        let mut rng = SeedStream::new(34).replica(0);
        let d = 3;
        let h = Hamiltonian::new(random::hermitian(d, &mut rng).unwrap()).unwrap();
        let c = Arc::new(random::context(d, &mut rng).unwrap());
        let psi = random::pure_state(d, &mut rng).unwrap();
        for _ in 0..20 {
            let phi = crate::ensemble::sample_physical_state(&psi, &c, &mut rng).unwrap();
            let a = random::diagonal_in(&c, &mut rng).unwrap();
            let t = 1.4;
            let back = heisenberg_evolve(&a, &h, -t).unwrap();
            let v = evolve_physical_state_value(&phi, &back, &h, t).unwrap();
            assert!((v - phi.evaluate(&a).unwrap()).abs() < 1e-9);
        }
    }
}
