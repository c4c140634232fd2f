//! Lindblad generators as dense superoperator matrices.
//!
//! Vectorization is column stacking: `vec(ρ)[i + j·d] = ρ[i, j]`, hence
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.
//!
//! Generators may be assembled in a frame rotating at `frame` (meV): the
//! Hamiltonian frequencies are shifted by `-frame`. Every jump operator in
//! the model changes the excitation number by a fixed amount, so the shift is
//! exact and only moves coherence eigenvalues along the imaginary axis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, CMat, CVec, ONE, ZERO};
use crate::operators::{bare_operators, jc_hamiltonian, DensityMatrix, HilbertSpace, Operator, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Full master equation with pump, losses and phonon channels.
    Full,
    /// Losses folded into a non-Hermitian `K`; not trace preserving.
    NoGain,
    /// Bare dissipator or other partial generator.
    Partial,
}

#[derive(Clone, Debug)]
pub struct Superoperator {
    space: HilbertSpace,
    mat: CMat,
    frame: f64,
    kind: GeneratorKind,
}

pub fn vectorize(m: &CMat) -> CVec {
    // nalgebra storage is column-major, which is exactly column stacking.
    CVec::from_column_slice(m.as_slice())
}

pub fn unvectorize(space: HilbertSpace, v: &CVec) -> CMat {
    let d = space.dim();
    CMat::from_column_slice(d, d, v.as_slice())
}

/// Superoperator of `ρ ↦ A ρ`.
pub fn spre(a: &Operator) -> CMat {
    let d = a.space().dim();
    kron(&CMat::identity(d, d), a.matrix())
}

/// Superoperator of `ρ ↦ ρ B`.
pub fn spost(b: &Operator) -> CMat {
    let d = b.space().dim();
    kron(&b.matrix().transpose(), &CMat::identity(d, d))
}

/// `𝓛_X(ρ) = 2 X ρ X† − X†X ρ − ρ X†X`, without any rate prefactor.
pub fn dissipator(x: &Operator) -> Superoperator {
    Superoperator { space: x.space(), mat: dissipator_matrix(x), frame: 0.0, kind: GeneratorKind::Partial }
}

fn dissipator_matrix(x: &Operator) -> CMat {
    let xdx = &x.adjoint() * x;
    kron(&x.matrix().conjugate(), x.matrix()) * c(2.0, 0.0) - spre(&xdx) - spost(&xdx)
}

fn hamiltonian_in_frame(space: HilbertSpace, p: &SystemParams, frame: f64) -> Operator {
    jc_hamiltonian(space, p.omega_x - frame, p.omega_c - frame, p.g)
}

pub fn full_liouvillian(space: HilbertSpace, params: &SystemParams) -> Superoperator {
    full_liouvillian_in_frame(space, params, 0.0)
}

/// Generator of
/// `dρ/dt = −i[H,ρ] + κ/2 𝓛_a + γ_x/2 𝓛_σ + P_x/2 𝓛_σ† + P_θ/2 𝓛_σa† + γ_θ/2 𝓛_σ†a`.
pub fn full_liouvillian_in_frame(space: HilbertSpace, params: &SystemParams, frame: f64) -> Superoperator {
    let ops = bare_operators(space);
    let h = hamiltonian_in_frame(space, params, frame);
    let mut mat = (spre(&h) - spost(&h)) * c(0.0, -1.0);
    let sigma_dag = ops.sigma.adjoint();
    let channels: [(f64, Operator); 5] = [
        (params.kappa, ops.a.clone()),
        (params.gamma_x, ops.sigma.clone()),
        (params.p_x, sigma_dag.clone()),
        (params.p_theta, &ops.sigma * &ops.a.adjoint()),
        (params.gamma_theta, &sigma_dag * &ops.a),
    ];
    for (rate, x) in channels.iter() {
        if *rate != 0.0 {
            mat += dissipator_matrix(x) * c(rate / 2.0, 0.0);
        }
    }
    Superoperator { space, mat, frame, kind: GeneratorKind::Full }
}

pub fn no_gain_liouvillian(space: HilbertSpace, params: &SystemParams) -> Superoperator {
    no_gain_liouvillian_in_frame(space, params, 0.0)
}

/// Generator of `dρ/dt = −i(Kρ − ρK†) + P_θ/2 𝓛_σa†` with
/// `K = H − iγ_x σ†σ/2 − iκ a†a/2`. `p_x` and `gamma_theta` are ignored.
pub fn no_gain_liouvillian_in_frame(space: HilbertSpace, params: &SystemParams, frame: f64) -> Superoperator {
    let ops = bare_operators(space);
    let h = hamiltonian_in_frame(space, params, frame);
    let loss = &ops.n_exciton.scale(c(0.0, -params.gamma_x / 2.0)) + &ops.n_phot.scale(c(0.0, -params.kappa / 2.0));
    let k = &h + &loss;
    let mut mat = (spre(&k) - spost(&k.adjoint())) * c(0.0, -1.0);
    if params.p_theta != 0.0 {
        mat += dissipator_matrix(&(&ops.sigma * &ops.a.adjoint())) * c(params.p_theta / 2.0, 0.0);
    }
    Superoperator { space, mat, frame, kind: GeneratorKind::NoGain }
}

/// Superoperator of `ρ ↦ [ρ, O]`.
pub fn right_commutator(o: &Operator) -> CMat {
    spost(o) - spre(o)
}

impl Superoperator {
    pub fn from_matrix(space: HilbertSpace, mat: CMat, frame: f64) -> Result<Self> {
        let d2 = space.dim() * space.dim();
        if mat.nrows() != d2 || mat.ncols() != d2 {
            return Err(Error::DimensionMismatch { expected: d2, found: mat.nrows() });
        }
        Ok(Self { space, mat, frame, kind: GeneratorKind::Partial })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Rotating-frame frequency the generator was assembled in (meV).
    pub fn frame(&self) -> f64 {
        self.frame
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        unvectorize(self.space, &(&self.mat * vectorize(rho)))
    }

    /// `max |vec(I)† L| / max |L|`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.space.dim();
        let mut worst: f64 = 0.0;
        for col in 0..self.mat.ncols() {
            let mut s = ZERO;
            for i in 0..d {
                s += self.mat[(i + i * d, col)];
            }
            worst = worst.max(s.norm());
        }
        worst / linalg::max_abs(&self.mat).max(f64::MIN_POSITIVE)
    }

    /// `max |S conj(L) S − L|` where `S vec(ρ) = vec(ρᵀ)`; zero when the flow
    /// maps Hermitian matrices to Hermitian matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.space.dim();
        let swap = |k: usize| (k % d) * d + k / d;
        let n = self.mat.nrows();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for col in 0..n {
                let mirrored = self.mat[(swap(r), swap(col))].conj();
                worst = worst.max((mirrored - self.mat[(r, col)]).norm());
            }
        }
        worst
    }

    /// Vectorized indices `i + j·d` of the coherences `|i⟩⟨j|` with
    /// `N(i) − N(j) = k`.
    pub fn sector_indices(&self, k: isize) -> Vec<usize> {
        let s = self.space;
        let d = s.dim();
        let mut out = Vec::new();
        for j in 0..d {
            for i in 0..d {
                if s.excitations(i) as isize - s.excitations(j) as isize == k {
                    out.push(i + j * d);
                }
            }
        }
        out
    }

    /// Partition of vectorized indices into groups with no matrix entries
    /// between them. Each group spans an invariant subspace, so the generator
    /// is block diagonal after permutation. Groups are sorted by first index.
    pub fn invariant_blocks(&self) -> Vec<Vec<usize>> {
        let n = self.mat.nrows();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for col in 0..n {
            for row in 0..n {
                if row != col && self.mat[(row, col)] != ZERO {
                    let (a, b) = (find(&mut parent, row), find(&mut parent, col));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for k in 0..n {
            let root = find(&mut parent, k);
            groups.entry(root).or_default().push(k);
        }
        groups.into_values().collect()
    }

    pub fn restrict(&self, indices: &[usize]) -> CMat {
        let m = indices.len();
        CMat::from_fn(m, m, |r, col| self.mat[(indices[r], indices[col])])
    }

    /// Blocks that carry a non-zero component of `v`.
    pub fn blocks_touching(&self, v: &CVec) -> Vec<Vec<usize>> {
        self.invariant_blocks().into_iter().filter(|b| b.iter().any(|&k| v[k] != ZERO)).collect()
    }

    /// Full spectrum, assembled block by block.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(self.mat.nrows());
        for b in self.invariant_blocks() {
            out.extend(linalg::eigenvalues(&self.restrict(&b))?);
        }
        Ok(out)
    }

    /// `exp(L t) v`, exponentiating only the blocks `v` touches.
    pub fn propagate(&self, v: &CVec, t: f64) -> CVec {
        let mut out = CVec::zeros(v.len());
        for b in self.blocks_touching(v) {
            let prop = linalg::expm(&(self.restrict(&b) * c(t, 0.0)));
            let local = CVec::from_iterator(b.len(), b.iter().map(|&k| v[k]));
            let moved = prop * local;
            for (r, &k) in b.iter().enumerate() {
                out[k] = moved[r];
            }
        }
        out
    }
}

/// Ratio the smallest singular value must undercut the next one by before the
/// singular vector is trusted directly.
const ISOLATION: f64 = 1e3;
/// Singular values below `ZERO_REL · max|L|` count as null directions.
const ZERO_REL: f64 = 1e-9;

/// Unique stationary state of a trace-preserving generator.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    let space = l.space();
    let d = space.dim();
    let scale = linalg::max_abs(l.matrix()).max(f64::MIN_POSITIVE);
    let threshold = ZERO_REL * scale;

    // (singular value, block index, position in that block's SVD)
    let mut all: Vec<(f64, usize)> = Vec::new();
    let mut candidates = Vec::new();
    let blocks = l.invariant_blocks();
    for (bi, b) in blocks.iter().enumerate() {
        let m = l.restrict(b);
        let svd = m.clone().svd(false, true);
        let sv = &svd.singular_values;
        let k = sv.len() - 1;
        for s in sv.iter() {
            all.push((*s, bi));
        }
        let v_t = svd.v_t.as_ref().expect("requested V");
        let null = CVec::from_iterator(b.len(), v_t.row(k).iter().map(|z| z.conj()));
        candidates.push((sv[k], null, m));
    }
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (s0, block0) = all[0];
    let s1 = all.get(1).map(|x| x.0).unwrap_or(f64::INFINITY);
    if s1 <= threshold {
        let zero_modes = all.iter().take_while(|x| x.0 <= threshold).count();
        return Err(Error::DegenerateSteadyState { zero_modes, threshold });
    }
    if s0 > threshold {
        return Err(Error::NoSteadyState(s0));
    }

    let block = &blocks[block0];
    let (_, null, m) = &candidates[block0];
    let local = if s1 >= ISOLATION * s0 { null.clone() } else { trace_constrained_solve(space, block, m)? };

    let mut v = CVec::zeros(d * d);
    for (r, &k) in block.iter().enumerate() {
        v[k] = local[r];
    }
    let mut rho = unvectorize(space, &v);
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::InvalidState("null vector is traceless".into()));
    }
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
    DensityMatrix::new(space, rho)
}

/// Solves `L_B x = 0` with the first equation replaced by `Tr(x) = 1`.
fn trace_constrained_solve(space: HilbertSpace, block: &[usize], m: &CMat) -> Result<CVec> {
    let d = space.dim();
    let mut a = m.clone();
    let mut rhs = CVec::zeros(block.len());
    for (col, &k) in block.iter().enumerate() {
        a[(0, col)] = if k % d == k / d { ONE } else { ZERO };
    }
    rhs[0] = ONE;
    a.lu().solve(&rhs).ok_or(Error::NoSteadyState(0.0))
}

/// `ρ(t) = exp(L t) ρ0`. The result is not re-normalized.
pub fn evolve(l: &Superoperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter { name: "t", reason: format!("must be >= 0, got {t}") });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let v = l.propagate(&vectorize(rho0.matrix()), t);
    DensityMatrix::unchecked(l.space(), unvectorize(l.space(), &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn params() -> SystemParams {
        SystemParams { g: 0.3, kappa: 0.1, gamma_x: 0.001, p_x: 0.06, p_theta: 0.1, gamma_theta: 0.0, omega_x: 0.4, omega_c: 0.0 }
    }

    #[test]
    fn vectorization_round_trip_and_kron_identity() {
        let s = HilbertSpace::new(1).unwrap();
        let d = s.dim();
        let m = CMat::from_fn(d, d, |i, j| c(i as f64, j as f64 * 0.5));
        assert_eq!(unvectorize(s, &vectorize(&m)), m);
        // vec(ρ)[i + j d] = ρ[i, j]
        assert_eq!(vectorize(&m)[2 + 3 * d], m[(2, 3)]);

        let a = Operator::from_matrix(s, CMat::from_fn(d, d, |i, j| c((i * j) as f64, 1.0))).unwrap();
        let b = Operator::from_matrix(s, CMat::from_fn(d, d, |i, j| c(i as f64 - j as f64, 0.3))).unwrap();
        let lhs = vectorize(&(a.matrix() * &m * b.matrix()));
        let rhs = kron(&b.matrix().transpose(), a.matrix()) * vectorize(&m);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn cavity_dissipator_on_one_photon() {
        let s = HilbertSpace::new(1).unwrap();
        let ops = bare_operators(s);
        let rho = DensityMatrix::pure(s, s.index(1, 0));
        let out = dissipator(&ops.a).apply(rho.matrix());
        let mut want = CMat::zeros(4, 4);
        want[(0, 0)] = c(2.0, 0.0);
        want[(2, 2)] = c(-2.0, 0.0);
        assert!((out - want).norm() < 1e-14);
    }

    #[test]
    fn phonon_dissipator_gain_term() {
        // X = σa† on |n−1,1⟩⟨n−1,1| with n = 2
        let s = HilbertSpace::new(3).unwrap();
        let ops = bare_operators(s);
        let x = &ops.sigma * &ops.a.adjoint();
        let rho = DensityMatrix::pure(s, s.index(1, 1));
        let out = dissipator(&x).apply(rho.matrix());
        let (src, dst) = (s.index(1, 1), s.index(2, 0));
        assert!((out[(dst, dst)] - c(4.0, 0.0)).norm() < 1e-14);
        assert!((out[(src, src)] - c(-4.0, 0.0)).norm() < 1e-14);
        assert!((out.trace()).norm() < 1e-14);
    }

    #[test]
    fn full_generator_structure() {
        let s = HilbertSpace::new(4).unwrap();
        let l = full_liouvillian(s, &params());
        assert!(l.trace_defect() < 1e-10);
        assert!(l.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn closed_system_is_anti_hermitian() {
        let s = HilbertSpace::new(3).unwrap();
        let p = SystemParams { g: 0.0, kappa: 0.0, gamma_x: 0.0, p_x: 0.0, p_theta: 0.0, ..params() };
        let l = full_liouvillian(s, &p);
        let h = jc_hamiltonian(s, p.omega_x, p.omega_c, 0.0);
        let comm = (spre(&h) - spost(&h)) * c(0.0, -1.0);
        assert_eq!(l.matrix(), &comm);
        assert!(linalg::max_abs(&(l.matrix() + l.matrix().adjoint())) == 0.0);
    }

    #[test]
    fn damped_cavity_rate() {
        let s = HilbertSpace::new(3).unwrap();
        let p = SystemParams { g: 0.0, kappa: 0.2, gamma_x: 0.0, p_x: 0.0, p_theta: 0.0, ..params() };
        let l = full_liouvillian(s, &p);
        let eig = l.eigenvalues().unwrap();
        assert!(eig.iter().any(|z| (z - c(-0.2, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn no_gain_matches_closed_form_without_phonons() {
        let s = HilbertSpace::new(2).unwrap();
        let p = SystemParams { p_theta: 0.0, p_x: 0.0, ..params() };
        let l = no_gain_liouvillian(s, &p);
        let ops = bare_operators(s);
        let k = &jc_hamiltonian(s, p.omega_x, p.omega_c, p.g)
            + &(&ops.n_exciton.scale(c(0.0, -p.gamma_x / 2.0)) + &ops.n_phot.scale(c(0.0, -p.kappa / 2.0)));
        let e = linalg::eigenvalues(k.matrix()).unwrap();
        let mut want = Vec::new();
        for ej in &e {
            for ek in &e {
                want.push(-I * (ej - ek.conj()));
            }
        }
        let got = l.eigenvalues().unwrap();
        for w in &want {
            let best = got.iter().map(|z| (z - w).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "missing {w}");
        }
        for z in &got {
            assert!(z.re <= 1e-12);
        }
    }

    #[test]
    fn no_gain_commutes_with_excitation_number() {
        let s = HilbertSpace::new(4).unwrap();
        let l = no_gain_liouvillian(s, &params());
        let n = right_commutator(&bare_operators(s).n_exc);
        let comm = l.matrix() * &n - &n * l.matrix();
        assert!(linalg::max_abs(&comm) < 1e-12);
    }

    #[test]
    fn no_gain_sectors_have_four_components() {
        let s = HilbertSpace::new(5).unwrap();
        let l = no_gain_liouvillian(s, &params());
        let d = s.dim();
        for n in 2..=5 {
            let probe = s.index(n, 0) + s.index(n - 1, 0) * d;
            let block = l.invariant_blocks().into_iter().find(|b| b.contains(&probe)).unwrap();
            assert_eq!(block.len(), 4, "rung {n}");
        }
    }

    #[test]
    fn empty_cavity_steady_state() {
        let s = HilbertSpace::new(3).unwrap();
        let p = SystemParams { g: 0.0, p_x: 0.0, p_theta: 0.0, gamma_x: 0.01, ..params() };
        let rho = steady_state(&full_liouvillian(s, &p)).unwrap();
        assert!(rho.trace_distance(&DensityMatrix::pure(s, 0)) < 1e-12);
    }

    #[test]
    fn two_level_rate_balance() {
        let s = HilbertSpace::new(2).unwrap();
        let p = SystemParams { g: 0.0, p_theta: 0.0, gamma_x: 0.02, p_x: 0.06, ..params() };
        let rho = steady_state(&full_liouvillian(s, &p)).unwrap();
        let pop = rho.expect(&bare_operators(s).n_exciton).re;
        assert!((pop - 0.06 / 0.08).abs() < 1e-12);
    }

    #[test]
    fn decoupled_subsystems_are_degenerate() {
        // no dissipation at all: every population is stationary
        let s = HilbertSpace::new(2).unwrap();
        let p = SystemParams { g: 0.0, kappa: 0.0, gamma_x: 0.0, p_x: 0.0, p_theta: 0.0, ..params() };
        assert!(matches!(steady_state(&full_liouvillian(s, &p)), Err(Error::DegenerateSteadyState { .. })));
    }

    #[test]
    fn evolve_identity_and_decay() {
        let s = HilbertSpace::new(4).unwrap();
        let p = SystemParams { g: 0.0, kappa: 0.2, gamma_x: 0.0, p_x: 0.0, p_theta: 0.0, ..params() };
        let l = full_liouvillian(s, &p);
        let rho0 = DensityMatrix::pure(s, s.index(3, 0));
        assert_eq!(evolve(&l, &rho0, 0.0).unwrap().matrix(), rho0.matrix());
        let n_op = bare_operators(s).n_phot;
        for t in [0.5, 3.0, 17.0] {
            let n = evolve(&l, &rho0, t).unwrap().expect(&n_op).re;
            assert!((n - 3.0 * (-0.2 * t).exp()).abs() < 1e-8);
        }
        assert!(evolve(&l, &rho0, -1.0).is_err());
    }
}
