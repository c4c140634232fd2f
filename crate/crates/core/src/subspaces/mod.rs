//! One-photon transition sectors of the no-gain generator.
//!
//! The coherence components of rung `n` are ordered
//! `|n,0⟩⟨n−1,0|, |n−1,1⟩⟨n−1,0|, |n,0⟩⟨n−2,1|, |n−1,1⟩⟨n−2,1|`
//! (the last two are absent for `n = 1`). Blocks are stored with the sign
//! flipped so that `Re λ` is a linewidth and `Im λ` a transition frequency
//! measured from the cavity.

mod compare;
mod ep;

pub use compare::{classify_comparisons, compare_printed_vs_oracle, ComparisonClass, PrintedComparison};
pub use ep::{exceptional_point, toy_exceptional_point, ExceptionalPoint, GapMinimum, EP_GAP_TOL, EP_PARALLEL_TOL};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, ZERO};
use crate::liouville::no_gain_liouvillian_in_frame;
use crate::operators::{HilbertSpace, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceParams {
    pub n: usize,
    pub g: f64,
    pub kappa: f64,
    pub gamma_x: f64,
    pub p_theta: f64,
    /// ω_x − ω_c, meV.
    pub delta: f64,
}

impl SubspaceParams {
    pub fn from_system(n: usize, p: &SystemParams) -> Self {
        Self { n, g: p.g, kappa: p.kappa, gamma_x: p.gamma_x, p_theta: p.p_theta, delta: p.detuning() }
    }

    pub fn with_p_theta(&self, p_theta: f64) -> Self {
        Self { p_theta, ..*self }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter { name: "n", reason: "rung index must be >= 1".into() });
        }
        for (name, v) in [("g", self.g), ("kappa", self.kappa), ("gamma_x", self.gamma_x), ("p_theta", self.p_theta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: format!("must be finite and >= 0, got {v}") });
            }
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter { name: "delta", reason: "must be finite".into() });
        }
        Ok(())
    }

    /// Sector size: 2 for the first rung, 4 above.
    pub fn sector_dim(&self) -> usize {
        if self.n == 1 {
            2
        } else {
            4
        }
    }

    /// Energy scale used for relative tolerances.
    fn scale(&self) -> f64 {
        let s = self.g.max(self.kappa).max(self.gamma_x).max(self.p_theta).max(self.delta.abs());
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }
}

/// The 4×4 sector matrix exactly as printed, with `Ω_n = g√n`,
/// `Z = −nP_θ + 4iΔ` and corner entry `√(n(n−1)) P_θ`.
pub fn ngl_matrix(p: &SubspaceParams) -> CMat {
    let n = p.n as f64;
    let om_n = p.g * n.sqrt();
    let om_m = p.g * (n - 1.0).max(0.0).sqrt();
    let z = c(-n * p.p_theta, 4.0 * p.delta);
    let (k, gx, pt) = (p.kappa, p.gamma_x, p.p_theta);
    let i = |x: f64| c(0.0, x);
    #[rustfmt::skip]
    let entries = [
        c((k - (2.0 * n - 1.0) * pt) / 2.0, 0.0), i(-om_m), i(om_n), ZERO,
        i(-om_m), (c(gx, 0.0) + z) / 2.0, ZERO, i(om_n),
        i(om_n), ZERO, (c(2.0 * k + pt - gx, 0.0) + z.conj()) / 2.0, i(-om_m),
        c((n * (n - 1.0)).sqrt() * pt, 0.0), i(om_n), i(-om_m), c(k / 2.0, 0.0),
    ];
    CMat::from_row_slice(4, 4, &entries)
}

/// Superoperator indices of the sector components on a space with cutoff `n_max`.
pub fn sector_components(n: usize, space: HilbertSpace) -> Vec<usize> {
    let d = space.dim();
    let idx = |photons, qd| space.index(photons, qd);
    let mut pairs = vec![(idx(n, 0), idx(n - 1, 0)), (idx(n - 1, 1), idx(n - 1, 0))];
    if n >= 2 {
        pairs.push((idx(n, 0), idx(n - 2, 1)));
        pairs.push((idx(n - 1, 1), idx(n - 2, 1)));
    }
    pairs.into_iter().map(|(i, j)| i + j * d).collect()
}

/// Sector restriction of the no-gain generator built on a space with cutoff
/// `n_max ≥ n + 1`, negated and in the cavity frame.
pub fn sector_block(p: &SubspaceParams, n_max: usize) -> Result<CMat> {
    p.validate()?;
    if n_max < p.n + 1 {
        return Err(Error::InvalidParameter { name: "n_max", reason: format!("need at least n + 1 = {}", p.n + 1) });
    }
    let space = HilbertSpace::new(n_max)?;
    let sys = SystemParams {
        g: p.g,
        kappa: p.kappa,
        gamma_x: p.gamma_x,
        p_x: 0.0,
        p_theta: p.p_theta,
        gamma_theta: 0.0,
        omega_x: p.delta,
        omega_c: 0.0,
    };
    let l = no_gain_liouvillian_in_frame(space, &sys, 0.0);
    Ok(-l.restrict(&sector_components(p.n, space)))
}

/// The sector generator obtained from the master equation itself.
pub fn oracle_block(p: &SubspaceParams) -> Result<CMat> {
    sector_block(p, p.n + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Printed,
    Oracle,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Printed => "printed",
            Source::Oracle => "oracle",
        }
    }

    pub fn matrix(&self, p: &SubspaceParams) -> Result<CMat> {
        match self {
            Source::Printed => {
                p.validate()?;
                Ok(ngl_matrix(p))
            }
            Source::Oracle => oracle_block(p),
        }
    }

    /// `(M₀, M₁)` with `M(P_θ) = M₀ + P_θ M₁`; both sources are affine in `P_θ`.
    pub fn affine(&self, p: &SubspaceParams) -> Result<(CMat, CMat)> {
        let m0 = self.matrix(&p.with_p_theta(0.0))?;
        let m1 = self.matrix(&p.with_p_theta(1.0))? - &m0;
        Ok((m0, m1))
    }
}

/// Branch label `(s, s′)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::PlusPlus, Branch::PlusMinus, Branch::MinusPlus, Branch::MinusMinus];

    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::PlusPlus => "++",
            Branch::PlusMinus => "+-",
            Branch::MinusPlus => "-+",
            Branch::MinusMinus => "--",
        }
    }
}

/// Relative gap below which the emission pair cannot be told apart.
pub const LABEL_TIE_TOL: f64 = 1e-9;
/// Largest continuation step in units of the energy scale.
const CONTINUATION_STEP: f64 = 2e-3;

#[derive(Clone, Debug)]
pub struct TransitionEigen {
    pub n: usize,
    pub p_theta: f64,
    pub labels: Vec<Branch>,
    pub lambda: Vec<Complex64>,
    /// Unit-norm eigenvectors in the sector component basis.
    pub eigvecs: Vec<CVec>,
    /// The `(−,±)` pair is closer than [`LABEL_TIE_TOL`].
    pub ambiguous: bool,
}

impl TransitionEigen {
    fn position(&self, b: Branch) -> Option<usize> {
        self.labels.iter().position(|l| *l == b)
    }

    pub fn lambda(&self, b: Branch) -> Option<Complex64> {
        self.position(b).map(|k| self.lambda[k])
    }

    pub fn eigvec(&self, b: Branch) -> Option<&CVec> {
        self.position(b).map(|k| &self.eigvecs[k])
    }

    /// `Im λ`, meV from the cavity.
    pub fn omega(&self, b: Branch) -> Option<f64> {
        self.lambda(b).map(|l| l.im)
    }

    /// `Re λ`, meV.
    pub fn gamma(&self, b: Branch) -> Option<f64> {
        self.lambda(b).map(|l| l.re)
    }

    /// `|λ₋₋ − λ₋₊|`.
    pub fn emission_gap(&self) -> f64 {
        (self.lambda(Branch::MinusMinus).unwrap() - self.lambda(Branch::MinusPlus).unwrap()).norm()
    }
}

fn eigenpairs(m: &CMat) -> Result<(Vec<Complex64>, Vec<CVec>)> {
    let e = linalg::eigen(m)?;
    let vecs = (0..e.values.len()).map(|k| e.vectors.column(k).into_owned()).collect();
    Ok((e.values, vecs))
}

/// Labels at `P_θ = 0` from the ordering of transition frequencies.
///
/// For `n ≥ 2` the outer transitions are `(+,−)` (lowest) and `(+,+)`
/// (highest); the inner pair is the emission pair `(−,±)`. Of the emission
/// pair `(−,−)` is the branch that turns into the narrow cavity-like singlet:
/// the lower one for `Δ ≥ 0`, the upper one for `Δ < 0`.
fn seed_labels(lambda: &[Complex64], delta: f64) -> Vec<Branch> {
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (lambda[i], lambda[j]);
        a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re))
    });
    let (low, high) =
        if delta >= 0.0 { (Branch::MinusMinus, Branch::MinusPlus) } else { (Branch::MinusPlus, Branch::MinusMinus) };
    let by_rank: Vec<Branch> =
        if lambda.len() == 2 { vec![low, high] } else { vec![Branch::PlusMinus, low, high, Branch::PlusPlus] };
    let mut labels = vec![Branch::PlusPlus; lambda.len()];
    for (rank, &k) in order.iter().enumerate() {
        labels[k] = by_rank[rank];
    }
    labels
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// The permutation in `perms` under which `values` best continues `previous`.
fn continue_from<'a>(perms: &'a [Vec<usize>], previous: &[Complex64], values: &[Complex64]) -> &'a [usize] {
    let cost = |perm: &[usize]| perm.iter().zip(previous).map(|(&j, prev)| (values[j] - prev).norm()).sum::<f64>();
    perms.iter().min_by(|p, q| cost(p).total_cmp(&cost(q))).unwrap()
}

/// Labelled eigenpairs along a monotone `P_θ` grid, seeded at `P_θ = 0` and
/// continued in small steps. Past a coalescence of the emission pair the
/// narrower branch is `(−,−)`.
pub fn label_sweep(p: &SubspaceParams, source: Source, grid: &[f64]) -> Result<Vec<TransitionEigen>> {
    p.validate()?;
    if grid.iter().any(|x| !(*x >= 0.0)) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter { name: "p_theta", reason: "grid must be non-negative and sorted".into() });
    }
    let scale = p.scale();
    let max_step = CONTINUATION_STEP * scale;
    let (m0, m1) = source.affine(p)?;
    let at_p = |pt: f64| &m0 + &m1 * c(pt, 0.0);
    let (mut values, mut vecs) = eigenpairs(&m0)?;
    let labels = seed_labels(&values, p.delta);
    // keep values indexed by label slot
    let slot_of = |b: Branch| labels.iter().position(|l| *l == b);
    let (mm, mp) = (slot_of(Branch::MinusMinus).unwrap(), slot_of(Branch::MinusPlus).unwrap());
    let perms = permutations(values.len());

    let mut out = Vec::with_capacity(grid.len());
    let mut at = 0.0;
    for &target in grid {
        let steps = ((target - at) / max_step).ceil().max(0.0) as usize;
        for s in 1..=steps {
            let pt = if s == steps { target } else { at + (target - at) * s as f64 / steps as f64 };
            let (nv, nvec) = eigenpairs(&at_p(pt))?;
            let perm = continue_from(&perms, &values, &nv);
            values = perm.iter().map(|&j| nv[j]).collect();
            vecs = perm.iter().map(|&j| nvec[j].clone()).collect();
            let (a, b) = (values[mm], values[mp]);
            if (a.im - b.im).abs() <= LABEL_TIE_TOL * scale && a.re > b.re {
                values.swap(mm, mp);
                vecs.swap(mm, mp);
            }
        }
        at = target;
        let gap = (values[mm] - values[mp]).norm();
        out.push(TransitionEigen {
            n: p.n,
            p_theta: target,
            labels: labels.clone(),
            lambda: values.clone(),
            eigvecs: vecs.clone(),
            ambiguous: gap <= LABEL_TIE_TOL * scale,
        });
    }
    Ok(out)
}

/// Labelled eigenpairs at `p.p_theta`.
pub fn ngl_eigen(p: &SubspaceParams, source: Source) -> Result<TransitionEigen> {
    let e = label_sweep(p, source, &[p.p_theta])?.pop().unwrap();
    if e.ambiguous {
        return Err(Error::LabelAmbiguity { p_theta: p.p_theta, gap: e.emission_gap() });
    }
    Ok(e)
}

/// Expansion `U = Σ C^{αβ} |n−α,α⟩⟨n−1−β,β|` of one eigenvector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BareCoefficients {
    pub n: usize,
    /// `c[α][β]`, normalized to unit total weight.
    pub c: [[Complex64; 2]; 2],
}

impl BareCoefficients {
    pub fn c00_sq(&self) -> f64 {
        self.c[0][0].norm_sqr()
    }

    pub fn c11_sq(&self) -> f64 {
        self.c[1][1].norm_sqr()
    }

    pub fn total(&self) -> f64 {
        self.c.iter().flatten().map(|z| z.norm_sqr()).sum()
    }
}

pub fn bare_coefficients(e: &TransitionEigen, branch: Branch) -> Result<BareCoefficients> {
    let v = e.eigvec(branch).ok_or(Error::InvalidParameter {
        name: "branch",
        reason: format!("branch {} not defined for n = {}", branch.as_str(), e.n),
    })?;
    let norm = v.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter { name: "eigvec", reason: "zero eigenvector".into() });
    }
    let at = |k: usize| if k < v.len() { v[k] / norm } else { ZERO };
    // component order: (α,β) = (0,0), (1,0), (0,1), (1,1)
    Ok(BareCoefficients { n: e.n, c: [[at(0), at(2)], [at(1), at(3)]] })
}
