//! Truncated Fock ⊗ two-level state space and operators on it.
//!
//! Basis state `|n, α⟩` (n photons, quantum-dot level α ∈ {0, 1}) sits at
//! index `2n + α`, so each excitation-number block is a contiguous pair.

use std::ops::{Add, Mul, Sub};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, ONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    n_max: usize,
}

impl HilbertSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidCutoff(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Index of `|photons, qd⟩`; `qd` is 0 (ground) or 1 (excited).
    pub fn index(&self, photons: usize, qd: usize) -> usize {
        debug_assert!(photons <= self.n_max && qd < 2);
        2 * photons + qd
    }

    pub fn photons(&self, index: usize) -> usize {
        index / 2
    }

    pub fn qd_level(&self, index: usize) -> usize {
        index % 2
    }

    /// Eigenvalue of `a†a + σ†σ` on basis state `index`.
    pub fn excitations(&self, index: usize) -> usize {
        index / 2 + index % 2
    }

    pub fn identity(&self) -> Operator {
        Operator { space: *self, mat: CMat::identity(self.dim(), self.dim()) }
    }

    pub fn zero(&self) -> Operator {
        Operator { space: *self, mat: CMat::zeros(self.dim(), self.dim()) }
    }
}

/// Alias matching the construction step of the model.
pub fn build_space(n_max: usize) -> Result<HilbertSpace> {
    HilbertSpace::new(n_max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    mat: CMat,
}

impl Operator {
    pub fn from_matrix(space: HilbertSpace, mat: CMat) -> Result<Self> {
        if mat.nrows() != space.dim() || mat.ncols() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: mat.nrows() });
        }
        Ok(Self { space, mat })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn adjoint(&self) -> Operator {
        Operator { space: self.space, mat: self.mat.adjoint() }
    }

    pub fn scale(&self, s: Complex64) -> Operator {
        Operator { space: self.space, mat: &self.mat * s }
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        let ab = &self.mat * &other.mat;
        let ba = &other.mat * &self.mat;
        Operator { space: self.space, mat: ab - ba }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Matrix element `⟨i| O |j⟩`.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = &self.mat - self.mat.adjoint();
        d.iter().all(|z| z.norm() <= tol)
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator { space: self.space, mat: &self.mat * &rhs.mat }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator { space: self.space, mat: &self.mat + &rhs.mat }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator { space: self.space, mat: &self.mat - &rhs.mat }
    }
}

#[derive(Clone, Debug)]
pub struct BareOperators {
    /// Cavity annihilation operator.
    pub a: Operator,
    /// Quantum-dot lowering operator `|0⟩⟨1|`.
    pub sigma: Operator,
    pub n_phot: Operator,
    pub n_exciton: Operator,
    /// Total excitation number `a†a + σ†σ`.
    pub n_exc: Operator,
}

pub fn bare_operators(space: HilbertSpace) -> BareOperators {
    let d = space.dim();
    let mut a = CMat::zeros(d, d);
    let mut sigma = CMat::zeros(d, d);
    for n in 0..=space.n_max() {
        for qd in 0..2 {
            if n > 0 {
                a[(space.index(n - 1, qd), space.index(n, qd))] = c((n as f64).sqrt(), 0.0);
            }
        }
        sigma[(space.index(n, 0), space.index(n, 1))] = ONE;
    }
    let a = Operator { space, mat: a };
    let sigma = Operator { space, mat: sigma };
    // number operators are set exactly on the diagonal rather than via
    // products, so that √n·√n rounding cannot leak into commutators
    let diag = |f: &dyn Fn(usize) -> f64| Operator {
        space,
        mat: CMat::from_diagonal(&CVec::from_iterator(d, (0..d).map(|i| c(f(i), 0.0)))),
    };
    let n_phot = diag(&|i| space.photons(i) as f64);
    let n_exciton = diag(&|i| space.qd_level(i) as f64);
    let n_exc = diag(&|i| space.excitations(i) as f64);
    BareOperators { a, sigma, n_phot, n_exciton, n_exc }
}

/// `H = ω_x σ†σ + ω_c a†a + g (a†σ + a σ†)`.
pub fn jc_hamiltonian(space: HilbertSpace, omega_x: f64, omega_c: f64, g: f64) -> Operator {
    let ops = bare_operators(space);
    let coupling = &(&ops.a.adjoint() * &ops.sigma) + &(&ops.a * &ops.sigma.adjoint());
    &(&ops.n_exciton.scale(c(omega_x, 0.0)) + &ops.n_phot.scale(c(omega_c, 0.0))) + &coupling.scale(c(g, 0.0))
}

/// Rates and frequencies of the driven quantum-dot / cavity model, all in meV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub g: f64,
    pub kappa: f64,
    pub gamma_x: f64,
    pub p_x: f64,
    pub p_theta: f64,
    #[serde(default)]
    pub gamma_theta: f64,
    pub omega_x: f64,
    pub omega_c: f64,
}

impl SystemParams {
    pub fn detuning(&self) -> f64 {
        self.omega_x - self.omega_c
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64); 6] = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma_x", self.gamma_x),
            ("p_x", self.p_x),
            ("p_theta", self.p_theta),
            ("gamma_theta", self.gamma_theta),
        ];
        for (name, v) in checks {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter { name, reason: format!("must be finite and >= 0, got {v}") });
            }
        }
        for (name, v) in [("omega_x", self.omega_x), ("omega_c", self.omega_c)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be finite".into() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: HilbertSpace,
    mat: CMat,
}

pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-9;

impl DensityMatrix {
    /// Checked constructor: unit trace, Hermitian, positive semidefinite.
    pub fn new(space: HilbertSpace, mat: CMat) -> Result<Self> {
        let rho = Self::unchecked(space, mat)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix without enforcing the state invariants (used for the
    /// output of non-trace-preserving generators).
    pub fn unchecked(space: HilbertSpace, mat: CMat) -> Result<Self> {
        if mat.nrows() != space.dim() || mat.ncols() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: mat.nrows() });
        }
        Ok(Self { space, mat })
    }

    pub fn pure(space: HilbertSpace, index: usize) -> Self {
        let mut mat = CMat::zeros(space.dim(), space.dim());
        mat[(index, index)] = ONE;
        Self { space, mat }
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.mat.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let herm = crate::linalg::max_abs(&(&self.mat - self.mat.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (max deviation {herm:.3e})")));
        }
        let min_eig = self.hermitian_part().symmetric_eigenvalues().min();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(())
    }

    fn hermitian_part(&self) -> CMat {
        (&self.mat + self.mat.adjoint()) * c(0.5, 0.0)
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// `Tr(O ρ)`.
    pub fn expect(&self, op: &Operator) -> Complex64 {
        (op.matrix() * &self.mat).trace()
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let d = &self.mat - &other.mat;
        let h = (&d + d.adjoint()) * c(0.5, 0.0);
        0.5 * SymmetricEigen::new(h).eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
    }
}
