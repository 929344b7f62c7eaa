//! Standard real subspaces of `ℂⁿ`, Tomita operators and modular pairs.
//!
//! Real subspaces live in realified coordinates `(Re; Im) ∈ ℝ²ⁿ` and are
//! stored as orthonormal column bases. Antilinear maps use the
//! `v ↦ a · conj(v)` convention of [`crate::numcore::AntilinearMap`].

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numcore::{
    check_finite, check_square, complexify_columns, conj, eig_hermitian, hermitian_asymmetry, identity,
    null_space, numerical_rank, orthonormal_basis, polar_unitary, realify_antilinear, realify_columns, realify_linear,
    subspace_distance, AntiUnitaryMap, AntilinearMap, CMatrix, CVector, RMatrix, ScalarMap,
    HERMITIAN_RTOL, IMAG,
};

/// Positivity floor for `Δ` relative to `‖Δ‖₂`.
pub const DELTA_FLOOR_RTOL: f64 = 1e-12;
/// Tolerance for `J² = 1` and `JΔJ = Δ⁻¹`.
pub const PAIR_TOL: f64 = 1e-10;
/// Rounding slack, in units of `ε · cond(Δ)`, for comparing `JΔJ` with `Δ⁻¹`.
pub const INVERSE_SLACK: f64 = 1e3;
/// Largest principal angle (sine) accepted as subspace equality.
pub const SUBSPACE_TOL: f64 = 1e-8;
/// Identity residual bound.
pub const IDENTITY_TOL: f64 = 1e-10;

const RANK_RTOL: f64 = 1e-10;

/// `V ⊂ ℂⁿ` with `dim_ℝ V = n` and `V ∩ iV = {0}`.
#[derive(Debug, Clone)]
pub struct StandardSubspace {
    n: usize,
    basis: RMatrix,
}

impl StandardSubspace {
    /// `basis` is `2n × k` in realified coordinates; it is orthonormalized.
    pub fn new(basis: &RMatrix) -> Result<Self> {
        if !basis.nrows().is_multiple_of(2) || basis.nrows() == 0 {
            return Err(Error::InvalidInput("realified basis needs 2n rows".into()));
        }
        if basis.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = basis.nrows() / 2;
        let q = orthonormal_basis(basis, RANK_RTOL)?;
        let iq = realify_linear(&(identity(n) * IMAG)) * &q;
        let mut both = RMatrix::zeros(2 * n, 2 * q.ncols());
        both.columns_mut(0, q.ncols()).copy_from(&q);
        both.columns_mut(q.ncols(), q.ncols()).copy_from(&iq);
        let rank = numerical_rank(&both, RANK_RTOL)?;
        if q.ncols() != n || rank != 2 * n {
            return Err(Error::NotStandard {
                rank,
                expected: 2 * n,
            });
        }
        Ok(Self { n, basis: q })
    }

    /// From `n` complex column vectors spanning `V` over `ℝ`.
    pub fn from_complex_columns(vectors: &CMatrix) -> Result<Self> {
        check_finite(vectors)?;
        Self::new(&realify_columns(vectors))
    }

    /// `ℝⁿ ⊂ ℂⁿ`.
    pub fn real_points(n: usize) -> Self {
        Self::new(&realify_columns(&identity(n))).expect("ℝⁿ is standard")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Orthonormal realified basis, `2n × n`.
    pub fn basis(&self) -> &RMatrix {
        &self.basis
    }

    /// The basis as complex column vectors; they form a complex basis of `ℂⁿ`.
    pub fn complex_basis(&self) -> CMatrix {
        complexify_columns(&self.basis)
    }

    /// Sine of the largest principal angle to `other`.
    pub fn distance(&self, other: &StandardSubspace) -> f64 {
        subspace_distance(&self.basis, &other.basis).unwrap_or(1.0)
    }

    /// `max ‖v − P_V v‖` over the given realified columns.
    pub fn containment_residual(&self, columns: &RMatrix) -> f64 {
        let r = columns - &self.basis * (self.basis.transpose() * columns);
        r.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `(Δ, J)` with `Δ > 0`, `J` an anti-unitary involution and `JΔJ = Δ⁻¹`.
#[derive(Debug, Clone)]
pub struct ModularPair {
    delta: CMatrix,
    j: AntiUnitaryMap,
}

impl ModularPair {
    pub fn new(delta: CMatrix, j: AntiUnitaryMap) -> Result<Self> {
        let n = check_square(&delta)?;
        check_finite(&delta)?;
        if j.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: j.dim(),
            });
        }
        let residual = hermitian_asymmetry(&delta);
        if residual > HERMITIAN_RTOL {
            return Err(Error::NotHermitian { residual });
        }
        let spec = eig_hermitian(&delta)?;
        let min_eig = spec.min_eigenvalue().unwrap_or(0.0);
        if min_eig <= DELTA_FLOOR_RTOL * spec.spectral_norm() {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        let residual = j.involution_residual();
        if residual > PAIR_TOL {
            return Err(Error::NotInvolutive { residual });
        }
        let inv = spec.apply_function(ScalarMap::Power(-1.0))?;
        let inv_norm = inv.norm();
        let residual = (j.conjugate(&delta)? - &inv).norm();
        let cond = spec.spectral_norm() / min_eig;
        let rtol = PAIR_TOL.max(INVERSE_SLACK * f64::EPSILON * cond);
        if residual > rtol * inv_norm.max(1.0) {
            return Err(Error::ModularRelation { residual });
        }
        Ok(Self { delta, j })
    }

    /// `Δ = e^H` from a Hermitian `H` with `JHJ = −H`.
    pub fn from_generator(h: &CMatrix, j: AntiUnitaryMap) -> Result<Self> {
        let delta = eig_hermitian(h)?.apply_function(ScalarMap::ExpScaled(-1.0))?;
        Self::new(crate::numcore::hermitian_part(&delta), j)
    }

    pub fn dim(&self) -> usize {
        self.delta.nrows()
    }

    pub fn delta(&self) -> &CMatrix {
        &self.delta
    }

    pub fn j(&self) -> &AntiUnitaryMap {
        &self.j
    }

    /// `H = log Δ`.
    pub fn generator(&self) -> CMatrix {
        self.delta_power_fn(ScalarMap::Log)
    }

    /// `Δ^p` for real `p`.
    pub fn delta_power(&self, p: f64) -> CMatrix {
        self.delta_power_fn(ScalarMap::Power(p))
    }

    /// `Δ^{it}`.
    pub fn delta_it(&self, t: f64) -> CMatrix {
        self.delta_power_fn(ScalarMap::PowerIt(t))
    }

    fn delta_power_fn(&self, f: ScalarMap) -> CMatrix {
        eig_hermitian(&self.delta)
            .and_then(|s| s.apply_function(f))
            .expect("Δ is positive definite")
    }

    /// `S = JΔ^{1/2}`.
    pub fn tomita(&self) -> AntilinearMap {
        self.j.as_antilinear().after_linear(&self.delta_power(0.5))
    }

    /// `‖JHJ + H‖_F`.
    pub fn generator_oddness(&self) -> f64 {
        let h = self.generator();
        (self.j.conjugate(&h).expect("same dimension") + h).norm()
    }
}

/// `V = Fix(JΔ^{1/2})`.
pub fn pair_to_subspace(pair: &ModularPair) -> Result<StandardSubspace> {
    let n = pair.dim();
    let s = realify_antilinear(pair.tomita().matrix());
    let m = s - RMatrix::identity(2 * n, 2 * n);
    let scale = m.norm().max(1.0);
    let fix = null_space(&m, 1e-9 * scale)?;
    if fix.ncols() != n {
        return Err(Error::DegenerateFixSpace {
            expected: n,
            found: fix.ncols(),
        });
    }
    StandardSubspace::new(&fix)
}

/// The Tomita operator `S(x + iy) = x − iy` of `V` and its polar data.
#[derive(Debug, Clone)]
pub struct Tomita {
    pub s: AntilinearMap,
    pub pair: ModularPair,
}

pub fn subspace_to_tomita(v: &StandardSubspace) -> Result<Tomita> {
    let b = v.complex_basis();
    let binv = b
        .clone()
        .try_inverse()
        .ok_or(Error::NotStandard {
            rank: numerical_rank(v.basis(), RANK_RTOL)?,
            expected: 2 * v.dim(),
        })?;
    let s = &b * conj(&binv);
    // Δ = S*S has matrix sᵀ·conj(s)
    let delta = crate::numcore::hermitian_part(&(s.transpose() * conj(&s)));
    // s = u · conj(Δ^{1/2}), so u is the unitary polar factor of s
    let j = AntiUnitaryMap::new(polar_unitary(&s)?)?;
    let pair = ModularPair::new(delta, j)?;
    Ok(Tomita {
        s: AntilinearMap::new(s)?,
        pair,
    })
}

/// Residuals of the structural identities of a standard subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    /// `‖S∘S − 1‖_F`.
    pub involution: f64,
    /// `‖S − JΔ^{1/2}‖_F`.
    pub polar: f64,
    /// `‖S* − JSJ‖_F`.
    pub adjoint_conjugation: f64,
    /// Principal-angle distance `Fix(S*)` to `J(V)`.
    pub adjoint_fix: f64,
    /// Principal-angle distance of the `Re⟨·,·⟩`-complement of `V` to `iJ(V)`.
    pub real_complement: f64,
    /// `2n` minus the rank of `[V | iJ(V)]`.
    pub direct_sum_defect: usize,
    /// Principal-angle distance of the `ω`-complement of `V` to `J(V)`.
    pub symplectic_complement: f64,
    /// Distance of the double `ω`-complement to `V`.
    pub symplectic_double: f64,
    /// Worst `|‖z‖² + ‖Sz‖² − 2(‖x‖² + ‖y‖²)|` over samples, relative.
    pub graph_norm: f64,
    pub graph_samples: usize,
    /// `⟨·,·⟩` real on `V × V`.
    pub inner_product_real: bool,
    pub delta_is_identity: bool,
}

impl LemmaReport {
    /// Rmk: `⟨·,·⟩` is real on `V × V` exactly when `Δ = 1`.
    pub fn reality_consistent(&self) -> bool {
        self.inner_product_real == self.delta_is_identity
    }

    pub fn max_residual(&self) -> f64 {
        [
            self.involution,
            self.polar,
            self.adjoint_conjugation,
            self.adjoint_fix,
            self.real_complement,
            self.symplectic_complement,
            self.symplectic_double,
            self.graph_norm,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.direct_sum_defect == 0 && self.reality_consistent()
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "S^2 = 1                {:.3e}", self.involution)?;
        writeln!(f, "S = J Delta^1/2        {:.3e}", self.polar)?;
        writeln!(f, "S* = J S J             {:.3e}", self.adjoint_conjugation)?;
        writeln!(f, "Fix(S*) = J(V)         {:.3e}", self.adjoint_fix)?;
        writeln!(f, "V^perp = iJ(V)         {:.3e}", self.real_complement)?;
        writeln!(f, "V + iJ(V) defect       {}", self.direct_sum_defect)?;
        writeln!(f, "V^omega = J(V)         {:.3e}", self.symplectic_complement)?;
        writeln!(f, "(V^omega)^omega = V    {:.3e}", self.symplectic_double)?;
        writeln!(f, "graph norm ({} samples) {:.3e}", self.graph_samples, self.graph_norm)?;
        write!(
            f,
            "real inner product {} / Delta = 1 {}",
            self.inner_product_real, self.delta_is_identity
        )
    }
}

fn symplectic_matrix(n: usize) -> RMatrix {
    // ω(v, w) = Im(w* v) = realify(w)ᵀ Ω realify(v)
    let mut omega = RMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

/// `{w : ω(v, w) = 0 for all v ∈ span(basis)}`.
pub fn symplectic_complement(basis: &RMatrix) -> Result<RMatrix> {
    let n = basis.nrows() / 2;
    let constraints = (symplectic_matrix(n) * basis).transpose();
    null_space(&constraints, 1e-9 * constraints.norm().max(1.0))
}

/// Orthogonal complement with respect to `Re⟨·,·⟩`.
pub fn real_complement(basis: &RMatrix) -> Result<RMatrix> {
    let t = basis.transpose();
    null_space(&t, 1e-9 * t.norm().max(1.0))
}

pub fn check_lemma_identities(v: &StandardSubspace, pair: &ModularPair, samples: usize, seed: u64) -> Result<LemmaReport> {
    let n = v.dim();
    if pair.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pair.dim(),
        });
    }
    let b = v.complex_basis();
    let binv = b.clone().try_inverse().ok_or(Error::NotStandard {
        rank: 0,
        expected: 2 * n,
    })?;
    let s = &b * conj(&binv);
    let sa = AntilinearMap::new(s.clone())?;
    let involution = sa.involution_residual();
    let polar = (&s - pair.tomita().matrix()).norm();
    let u = pair.j().matrix();
    let adjoint_conjugation = (s.transpose() - u * conj(&s) * u).norm();

    let jv = orthonormal_basis(&(pair.j().realify() * v.basis()), RANK_RTOL)?;
    let s_adj = realify_antilinear(&s.transpose()) - RMatrix::identity(2 * n, 2 * n);
    let fix_adj = null_space(&s_adj, 1e-9 * s_adj.norm().max(1.0))?;
    let adjoint_fix = subspace_distance(&fix_adj, &jv)?;

    let ijv = realify_linear(&(identity(n) * IMAG)) * &jv;
    let real_complement_distance = subspace_distance(&real_complement(v.basis())?, &ijv)?;
    let mut both = RMatrix::zeros(2 * n, 2 * n);
    both.columns_mut(0, n).copy_from(v.basis());
    both.columns_mut(n, n).copy_from(&ijv);
    let direct_sum_defect = 2 * n - numerical_rank(&both, RANK_RTOL)?;

    let omega_c = symplectic_complement(v.basis())?;
    let symplectic = subspace_distance(&omega_c, &jv)?;
    let double = subspace_distance(&orthonormal_basis(&symplectic_complement(&omega_c)?, RANK_RTOL)?, v.basis())?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph_norm: f64 = 0.0;
    let vb = v.complex_basis();
    for _ in 0..samples {
        let cx = CVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        let cy = CVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        let x = &vb * cx;
        let y = &vb * cy;
        let z = &x + &y * IMAG;
        let sz = sa.apply(&z);
        let lhs = z.norm_squared() + sz.norm_squared();
        let rhs = 2.0 * (x.norm_squared() + y.norm_squared());
        graph_norm = graph_norm.max((lhs - rhs).abs() / rhs.max(1.0));
    }

    let gram = vb.adjoint() * &vb;
    let gram_scale = gram.norm().max(1.0);
    let inner_product_real = gram.iter().all(|z| z.im.abs() <= 1e-10 * gram_scale);
    let delta_is_identity = (pair.delta() - identity(n)).norm() <= 1e-10 * pair.delta().norm().max(1.0);

    Ok(LemmaReport {
        involution,
        polar,
        adjoint_conjugation,
        adjoint_fix,
        real_complement: real_complement_distance,
        direct_sum_defect,
        symplectic_complement: symplectic,
        symplectic_double: double,
        graph_norm,
        graph_samples: samples,
        inner_product_real,
        delta_is_identity,
    })
}

/// Element of the anti-unitary representation of `ℝ × ℤ/2`.
#[derive(Debug, Clone)]
pub enum ModularElement {
    Linear(CMatrix),
    Antilinear(AntiUnitaryMap),
}

impl ModularElement {
    pub fn compose(&self, other: &ModularElement) -> ModularElement {
        use ModularElement::*;
        match (self, other) {
            (Linear(a), Linear(b)) => Linear(a * b),
            (Linear(a), Antilinear(b)) => Antilinear(unitary_antilinear(a * b.matrix())),
            (Antilinear(a), Linear(b)) => Antilinear(unitary_antilinear(a.matrix() * conj(b))),
            (Antilinear(a), Antilinear(b)) => Linear(a.as_antilinear().compose(b.as_antilinear())),
        }
    }

    pub fn is_antilinear(&self) -> bool {
        matches!(self, ModularElement::Antilinear(_))
    }

    /// Matrix `m` of `v ↦ m v` or `v ↦ m conj(v)`.
    pub fn matrix(&self) -> &CMatrix {
        match self {
            ModularElement::Linear(m) => m,
            ModularElement::Antilinear(a) => a.matrix(),
        }
    }

    /// `‖a − b‖_F` if both have the same linearity, else `∞`.
    pub fn distance(&self, other: &ModularElement) -> f64 {
        if self.is_antilinear() != other.is_antilinear() {
            return f64::INFINITY;
        }
        (self.matrix() - other.matrix()).norm()
    }
}

fn unitary_antilinear(m: CMatrix) -> AntiUnitaryMap {
    AntiUnitaryMap::new(m).expect("product of unitaries")
}

/// `U_{(t, ε)} = Δ^{it} J^ε`.
pub fn modular_rep(pair: &ModularPair, t: f64, epsilon: bool) -> ModularElement {
    let d = pair.delta_it(t);
    if epsilon {
        ModularElement::Antilinear(unitary_antilinear(d * pair.j().matrix()))
    } else {
        ModularElement::Linear(d)
    }
}

/// The symmetry used in a strip function.
#[derive(Debug, Clone)]
pub enum Conjugation {
    /// Unitary involution `R` with `RHR = −H`; `j` is complex linear.
    Unitary(CMatrix),
    /// Anti-unitary involution `J` with `JHJ = −H`; `j` is real linear.
    AntiUnitary(AntiUnitaryMap),
}

/// `φ(z) = j* e^{−zH} j` for `0 ≤ Re z ≤ β`, with `j` mapping into `Fix(S)`
/// for `S = J e^{−βH/2}` (or `R e^{−βH/2}`).
#[derive(Debug, Clone)]
pub struct StripFunction {
    h: CMatrix,
    conjugation: Conjugation,
    j: CMatrix,
    beta: f64,
    /// `‖S j − j‖_F`.
    pub fix_residual: f64,
}

/// Relative tolerance for `j ⊂ Fix(S)`.
pub const FIX_TOL: f64 = 1e-10;

pub fn phi_strip_function(h: &CMatrix, conjugation: Conjugation, j: &CMatrix, beta: f64) -> Result<StripFunction> {
    let n = check_square(h)?;
    crate::numcore::ensure_hermitian(h)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidBeta(beta));
    }
    if j.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.nrows(),
        });
    }
    check_finite(j)?;
    let half = eig_hermitian(h)?.apply_function(ScalarMap::ExpScaled(beta / 2.0))?;
    let sj = match &conjugation {
        Conjugation::Unitary(r) => {
            crate::numcore::ensure_unitary(r)?;
            r * &half * j
        }
        Conjugation::AntiUnitary(ju) => ju.apply_columns(&(&half * j)),
    };
    let fix_residual = (&sj - j).norm();
    if fix_residual > FIX_TOL * j.norm().max(1.0) {
        return Err(Error::NotFixed {
            residual: fix_residual,
        });
    }
    Ok(StripFunction {
        h: h.clone(),
        conjugation,
        j: j.clone(),
        beta,
        fix_residual,
    })
}

impl StripFunction {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn conjugation(&self) -> &Conjugation {
        &self.conjugation
    }

    /// Matrix `F` with `φ(z)(e_a, e_b) = F[b, a]`, i.e. `F = j* e^{−zH} j`.
    pub fn eval(&self, z: Complex64) -> Result<CMatrix> {
        if !(0.0..=self.beta).contains(&z.re) {
            return Err(Error::OutOfRange {
                value: z.re,
                lo: 0.0,
                hi: self.beta,
            });
        }
        let e = eig_hermitian(&self.h)?.apply_function(ScalarMap::Exp(-z))?;
        Ok(self.j.adjoint() * e * &self.j)
    }

    /// `φ(β − z̄)` against `conj φ(z)`: entrywise conjugation for a real
    /// parameter space, adjoint for a complex one.
    pub fn relation_residual(&self, z: Complex64) -> Result<f64> {
        let lhs = self.eval(Complex64::new(self.beta, 0.0) - z.conj())?;
        let f = self.eval(z)?;
        let rhs = match self.conjugation {
            Conjugation::AntiUnitary(_) => conj(&f),
            Conjugation::Unitary(_) => f.adjoint(),
        };
        Ok((lhs - rhs).norm())
    }

    /// Block kernel `φ((z_x + z̄_y)/2)` on strip points.
    pub fn kernel(&self, points: &[Complex64]) -> Result<CMatrix> {
        let d = self.j.ncols();
        let m = points.len();
        let mut g = CMatrix::zeros(m * d, m * d);
        for (x, zx) in points.iter().enumerate() {
            for (y, zy) in points.iter().enumerate() {
                let b = self.eval((zx + zy.conj()) / 2.0)?;
                g.view_mut((x * d, y * d), (d, d)).copy_from(&b);
            }
        }
        Ok(g)
    }

    /// Largest `|Im φ^{v,v}(t)|` over basis vectors and `t` on the grid.
    pub fn diagonal_imaginary(&self, times: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &t in times {
            let f = self.eval(Complex64::new(t, 0.0))?;
            for a in 0..f.nrows() {
                worst = worst.max(f[(a, a)].im.abs());
            }
        }
        Ok(worst)
    }

    /// Whether `φ(0)` is real, which governs the periodic extension.
    pub fn zero_is_real(&self, tol: f64) -> Result<bool> {
        let f = self.eval(Complex64::new(0.0, 0.0))?;
        let scale = f.norm().max(1.0);
        Ok(f.iter().all(|z| z.im.abs() <= tol * scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{diag_real, psd_certificate, re, ONE, ZERO};
    use crate::random;
    use proptest::prelude::*;
    use rand::Rng;

    fn swap() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn diag_pair(a: f64) -> ModularPair {
        ModularPair::new(diag_real(&[a, 1.0 / a]), AntiUnitaryMap::new(swap()).unwrap()).unwrap()
    }

    #[test]
    fn pair_validation() {
        let j = AntiUnitaryMap::conjugation(2);
        assert!(matches!(
            ModularPair::new(diag_real(&[1.0, 0.0]), j.clone()),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            ModularPair::new(diag_real(&[2.0, 1.0]), j.clone()),
            Err(Error::ModularRelation { .. })
        ));
        // u·conj(u) = −1
        let quaternionic = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        assert!(matches!(
            ModularPair::new(identity(2), AntiUnitaryMap::new(quaternionic).unwrap()),
            Err(Error::NotInvolutive { .. })
        ));
        let nonherm = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(ModularPair::new(nonherm, j), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn real_points_roundtrip() {
        let p = ModularPair::new(identity(3), AntiUnitaryMap::conjugation(3)).unwrap();
        let v = pair_to_subspace(&p).unwrap();
        assert!(v.distance(&StandardSubspace::real_points(3)) < 1e-12);
        let t = subspace_to_tomita(&v).unwrap();
        assert!((t.s.matrix() - identity(3)).norm() < 1e-12);
        assert!((t.pair.delta() - identity(3)).norm() < 1e-12);
        assert!((t.pair.j().matrix() - identity(3)).norm() < 1e-12);
        let r = check_lemma_identities(&v, &p, 100, 0).unwrap();
        assert!(r.passed(1e-12), "{r}");
        assert!(r.inner_product_real && r.delta_is_identity);
    }

    #[test]
    fn diagonal_example() {
        let a = std::f64::consts::E;
        let p = diag_pair(a);
        let v = pair_to_subspace(&p).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[ONE, IMAG, re(a.sqrt()), -IMAG * a.sqrt()]);
        let w = StandardSubspace::from_complex_columns(&expected).unwrap();
        assert!(v.distance(&w) < 1e-12);
        let fixed = p.tomita().apply_columns(&v.complex_basis());
        assert!((fixed - v.complex_basis()).norm() < 1e-10);
        let t = subspace_to_tomita(&v).unwrap();
        assert!((t.pair.delta() - diag_real(&[a, 1.0 / a])).norm() < 1e-10);
        assert!((t.pair.j().matrix() - swap()).norm() < 1e-10);
        let r = check_lemma_identities(&v, &p, 100, 1).unwrap();
        assert!(r.max_residual() <= 1e-12, "{r}");
        assert!(r.passed(1e-12));
        assert!(!r.inner_product_real && !r.delta_is_identity);
    }

    #[test]
    fn not_standard() {
        let basis = CMatrix::from_row_slice(2, 2, &[ONE, IMAG, ZERO, ZERO]);
        assert!(matches!(
            StandardSubspace::from_complex_columns(&basis),
            Err(Error::NotStandard { .. })
        ));
        let short = CMatrix::from_row_slice(2, 1, &[ONE, ZERO]);
        assert!(StandardSubspace::from_complex_columns(&short).is_err());
    }

    #[test]
    fn modular_rep_examples() {
        let e = std::f64::consts::E;
        let p = diag_pair(e);
        let id = modular_rep(&p, 0.0, false);
        assert!(id.distance(&ModularElement::Linear(identity(2))) < 1e-15);
        let u = modular_rep(&p, std::f64::consts::PI, false);
        assert!(u.distance(&ModularElement::Linear(-identity(2))) < 1e-12);
        let j = modular_rep(&p, 0.0, true);
        for t in [0.3, -1.2, 2.0] {
            let ut = modular_rep(&p, t, false);
            let lhs = j.compose(&ut).compose(&j);
            assert!(lhs.distance(&ut) < 1e-12);
        }
        assert!(j.compose(&j).distance(&ModularElement::Linear(identity(2))) < 1e-12);
    }

    #[test]
    fn strip_function_example() {
        let beta = 1.0;
        let h = diag_real(&[1.0, -1.0]);
        let jmap = AntiUnitaryMap::new(swap()).unwrap();
        let v = CMatrix::from_row_slice(2, 1, &[ONE, re((-beta / 2.0f64).exp())]);
        let norm2 = v.norm_squared();
        let jv = &v / re(norm2.sqrt());
        let f = phi_strip_function(&h, Conjugation::AntiUnitary(jmap.clone()), &jv, beta).unwrap();
        let half = f.eval(Complex64::new(0.5, 0.0)).unwrap()[(0, 0)];
        assert!(half.im.abs() < 1e-15);
        assert!((half.re - 2.0 * (-0.5f64).exp() / norm2).abs() < 1e-14);
        assert!(f.relation_residual(Complex64::new(0.3, 0.7)).unwrap() <= 1e-12);

        let zero = phi_strip_function(&h, Conjugation::AntiUnitary(jmap.clone()), &CMatrix::zeros(2, 1), beta).unwrap();
        assert_eq!(zero.eval(Complex64::new(0.4, 0.2)).unwrap()[(0, 0)], ZERO);

        let off = CMatrix::from_row_slice(2, 1, &[ONE, ZERO]);
        assert!(matches!(
            phi_strip_function(&h, Conjugation::AntiUnitary(jmap), &off, beta),
            Err(Error::NotFixed { .. })
        ));
    }

    fn random_fixed_vectors(rng: &mut ChaCha8Rng, pair: &ModularPair, d: usize) -> CMatrix {
        let v = pair_to_subspace(pair).unwrap().complex_basis();
        let n = v.ncols();
        let coeffs = CMatrix::from_fn(n, d, |_, _| re(rng.gen_range(-1.0..1.0)));
        v * coeffs
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn correspondence_roundtrips(seed in any::<u64>(), n in 1usize..=6, radius in 0.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random::modular_pair(&mut rng, n, radius);
            let v = pair_to_subspace(&p).unwrap();
            prop_assert_eq!(v.dim(), n);
            let t = subspace_to_tomita(&v).unwrap();
            prop_assert!((t.pair.delta() - p.delta()).norm() <= 1e-8 * p.delta().norm());
            prop_assert!((t.pair.j().matrix() - p.j().matrix()).norm() <= 1e-8);
            let back = pair_to_subspace(&t.pair).unwrap();
            prop_assert!(back.distance(&v) <= SUBSPACE_TOL);
            prop_assert!(back.containment_residual(v.basis()) <= SUBSPACE_TOL);
            // (H, J) ↔ (Δ, J)
            let h = p.generator();
            prop_assert!(p.generator_oddness() <= 1e-9);
            let q = ModularPair::from_generator(&h, p.j().clone()).unwrap();
            prop_assert!((q.delta() - p.delta()).norm() <= 1e-9 * p.delta().norm());
        }

        #[test]
        fn lemma_identities_hold(seed in any::<u64>(), n in 1usize..=6, radius in 0.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random::modular_pair(&mut rng, n, radius);
            let v = pair_to_subspace(&p).unwrap();
            let r = check_lemma_identities(&v, &p, 100, seed).unwrap();
            prop_assert!(r.max_residual() <= 1e-9, "{}", r);
            prop_assert_eq!(r.direct_sum_defect, 0);
            prop_assert!(r.graph_norm <= 1e-12);
            prop_assert!(r.reality_consistent());
        }

        #[test]
        fn modular_group_law(seed in any::<u64>(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random::modular_pair(&mut rng, 4, 2.0);
            let us = modular_rep(&p, s, false);
            let ut = modular_rep(&p, t, false);
            prop_assert!(us.compose(&ut).distance(&modular_rep(&p, s + t, false)) <= 1e-12);
            let j = modular_rep(&p, 0.0, true);
            prop_assert!(j.compose(&ut).compose(&j).distance(&ut) <= 1e-12);
            let a = modular_rep(&p, s, true);
            let b = modular_rep(&p, t, true);
            prop_assert!(a.compose(&b).distance(&modular_rep(&p, s + t, false)) <= 1e-12);
        }

        #[test]
        fn strip_function_relations(seed in any::<u64>(), n in 1usize..=4, beta in 0.2f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let jmap = random::antiunitary_involution(&mut rng, n);
            let h = random::odd_generator(&mut rng, &jmap, 1.5);
            // Δ = e^{−βH} so that S = J e^{−βH/2}
            let pair = ModularPair::from_generator(&(&h * re(-beta)), jmap.clone()).unwrap();
            let j = random_fixed_vectors(&mut rng, &pair, 2);
            let f = phi_strip_function(&h, Conjugation::AntiUnitary(jmap), &j, beta).unwrap();
            for _ in 0..4 {
                let z = Complex64::new(rng.gen_range(0.0..beta), rng.gen_range(-2.0..2.0));
                prop_assert!(f.relation_residual(z).unwrap() <= 1e-10 * f.eval(z).unwrap().norm().max(1.0));
            }
            let pts: Vec<Complex64> = (0..5)
                .map(|_| Complex64::new(rng.gen_range(0.01..beta - 0.01), rng.gen_range(-1.0..1.0)))
                .collect();
            let k = f.kernel(&pts).unwrap();
            prop_assert!(psd_certificate(&crate::numcore::hermitian_part(&k), 1e-9).unwrap().is_psd);
            let times: Vec<f64> = (0..=8).map(|i| beta * i as f64 / 8.0).collect();
            prop_assert!(f.diagonal_imaginary(&times).unwrap() <= 1e-10 * f.eval(Complex64::new(0.0, 0.0)).unwrap().norm().max(1.0));
        }
    }
}
