//! Choi–Jamiołkowski representation of two-qubit channels.
//!
//! A channel `M` is stored as `R = (M ⊗ 1)(P⁺)` with the unnormalized
//! `P⁺ = Σ_ij |ii⟩⟨jj|`, so the 16×16 matrix acts on
//! `(A_out, B_out, A_in, B_in)`. The channel acts as
//! `M(ρ) = Tr_in[(1 ⊗ ρᵀ) R]` and the fidelity with a target is
//! `F = Tr[(ρ_out ⊗ ρ_inᵀ) R]`.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, kron, partial_trace, partial_transpose, ComplexMatrix, SubsystemDims, C64, ONE, ZERO,
};

/// Dimension of the two-qubit input (and output) space.
pub const DIM: usize = 4;
/// Dimension of the Choi matrix.
pub const CHOI_DIM: usize = DIM * DIM;

/// Factor positions inside the Choi matrix.
pub const A_OUT: usize = 0;
pub const B_OUT: usize = 1;
pub const A_IN: usize = 2;
pub const B_IN: usize = 3;

/// Kraus eigenvalue cutoff, relative to the largest Choi eigenvalue.
pub const KRAUS_CUTOFF: f64 = 1e-10;
/// Most negative Choi eigenvalue still treated as positive.
pub const CP_TOL: f64 = 1e-8;

pub fn choi_dims() -> SubsystemDims {
    SubsystemDims::qubits(4)
}

/// Pure state `a|00⟩ + √(1−a²)|11⟩` with Schmidt parameter `a ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtState {
    schmidt: f64,
}

impl SchmidtState {
    pub fn new(schmidt: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&schmidt) {
            return Err(Error::InvalidParameter(format!(
                "Schmidt parameter {schmidt} outside [0, 1]"
            )));
        }
        Ok(Self { schmidt })
    }

    pub fn schmidt(&self) -> f64 {
        self.schmidt
    }

    /// Amplitude on `|11⟩`.
    pub fn complement(&self) -> f64 {
        (1.0 - self.schmidt * self.schmidt).max(0.0).sqrt()
    }

    pub fn vector(&self) -> Vec<C64> {
        vec![
            C64::new(self.schmidt, 0.0),
            ZERO,
            ZERO,
            C64::new(self.complement(), 0.0),
        ]
    }

    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.vector())
    }
}

/// Anything that can stand in for a two-qubit density matrix.
pub trait AsDensity {
    fn to_density(&self) -> ComplexMatrix;
}

impl AsDensity for SchmidtState {
    fn to_density(&self) -> ComplexMatrix {
        self.density()
    }
}

impl AsDensity for ComplexMatrix {
    fn to_density(&self) -> ComplexMatrix {
        self.clone()
    }
}

impl AsDensity for [C64] {
    fn to_density(&self) -> ComplexMatrix {
        ComplexMatrix::projector(self)
    }
}

/// Choi matrix of a two-qubit map. Always 16×16 and Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix(ComplexMatrix);

impl ChoiMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.rows() != CHOI_DIM || !m.is_square() {
            return Err(Error::Dimension(format!(
                "Choi matrix must be {CHOI_DIM}x{CHOI_DIM}, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let deviation = m.hermitian_deviation();
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(m))
    }

    pub fn identity_channel() -> Self {
        Self(plus_operator(DIM))
    }

    /// `ρ ↦ Tr(ρ) I/4`.
    pub fn fully_depolarizing() -> Self {
        Self(ComplexMatrix::identity(CHOI_DIM).scale_real(1.0 / DIM as f64))
    }

    pub fn swap_channel() -> Self {
        choi_from_kraus(&KrausSet::new(vec![crate::linalg::swap()]).expect("4x4"))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(&self.0).map(|e| e.min()).unwrap_or(f64::NAN)
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let mut m = self.0.scale_real(alpha);
        m.add_scaled(C64::new(beta, 0.0), &other.0);
        Self(m)
    }
}

/// Kraus operators `{A_i}` of a map `ρ ↦ Σ A_i ρ A_i†` on two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        if let Some(bad) = ops.iter().find(|k| k.rows() != DIM || k.cols() != DIM) {
            return Err(Error::Dimension(format!(
                "Kraus operators must be {DIM}x{DIM}, got {}x{}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `Σ A_i† A_i`.
    pub fn completeness(&self) -> ComplexMatrix {
        self.ops
            .iter()
            .fold(ComplexMatrix::zeros(DIM, DIM), |acc, k| &acc + &(&k.adjoint() * k))
    }

    /// Frobenius norm of `Σ A_i† A_i − I`.
    pub fn tp_residual(&self) -> f64 {
        (&self.completeness() - &ComplexMatrix::identity(DIM)).frobenius_norm()
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.ops.iter().fold(ComplexMatrix::zeros(DIM, DIM), |acc, k| {
            &acc + &(&(k * rho) * &k.adjoint())
        })
    }
}

/// Unnormalized `P⁺ = Σ_{i,j} |ii⟩⟨jj|` on `C^d ⊗ C^d`.
pub fn plus_operator(d: usize) -> ComplexMatrix {
    assert!(d >= 2, "plus_operator needs d >= 2");
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = ONE;
        }
    }
    m
}

/// `M(ρ) = Tr_in[(1 ⊗ ρᵀ) R]`.
pub fn apply(choi: &ChoiMatrix, rho_in: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho_in.rows() != DIM || !rho_in.is_square() {
        return Err(Error::Dimension(format!(
            "input state must be {DIM}x{DIM}, got {}x{}",
            rho_in.rows(),
            rho_in.cols()
        )));
    }
    let lifted = kron(&ComplexMatrix::identity(DIM), &rho_in.transpose());
    partial_trace(&(&lifted * choi.matrix()), &choi_dims(), &[A_OUT, B_OUT])
}

/// Like [`apply`], but fails when the output trace differs from the input
/// trace by more than `tol`.
pub fn apply_strict(choi: &ChoiMatrix, rho_in: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let out = apply(choi, rho_in)?;
    let trace = out.trace().re;
    if (trace - rho_in.trace().re).abs() > tol {
        return Err(Error::NotTracePreserving { trace });
    }
    Ok(out)
}

/// `R = Σ_i (A_i ⊗ 1) P⁺ (A_i ⊗ 1)†`.
pub fn choi_from_kraus(k: &KrausSet) -> ChoiMatrix {
    // (A ⊗ 1)|P⁺⟩ has entries A[o, i] at position o·d + i.
    let mut m = ComplexMatrix::zeros(CHOI_DIM, CHOI_DIM);
    for op in k.ops() {
        let v: Vec<C64> = op.data().to_vec();
        m.add_scaled(ONE, &ComplexMatrix::projector(&v));
    }
    ChoiMatrix(m)
}

/// Kraus operators from the eigendecomposition of a CP Choi matrix.
/// Eigenvalues at or below [`KRAUS_CUTOFF`]·λ_max are dropped.
pub fn kraus_from_choi(choi: &ChoiMatrix) -> Result<KrausSet> {
    let eig = eig_hermitian(choi.matrix())?;
    if eig.min() < -CP_TOL {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: eig.min(),
        });
    }
    let cutoff = KRAUS_CUTOFF * eig.max().max(0.0);
    let mut ops = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate().rev() {
        if lambda <= cutoff || lambda <= 0.0 {
            continue;
        }
        let scale = lambda.sqrt();
        let v: Vec<C64> = eig.vector(k).iter().map(|z| z * scale).collect();
        ops.push(ComplexMatrix::from_vec(DIM, DIM, v)?);
    }
    KrausSet::new(ops)
}

/// Frobenius norm of `Tr_out R − I`.
pub fn check_tp(choi: &ChoiMatrix) -> f64 {
    let reduced = partial_trace(choi.matrix(), &choi_dims(), &[A_IN, B_IN]).expect("16x16");
    (&reduced - &ComplexMatrix::identity(DIM)).frobenius_norm()
}

/// Minimum eigenvalue of the Choi matrix.
pub fn check_cp(choi: &ChoiMatrix) -> f64 {
    choi.min_eigenvalue()
}

/// The Choi matrix transposed on Bob's factors `{B_out, B_in}`, i.e. across
/// the `(A_out A_in | B_out B_in)` cut.
pub fn ppt_transform(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    partial_transpose(m, &choi_dims(), &[B_OUT, B_IN])
}

/// Minimum eigenvalue of the Bob-side partial transpose; `≥ −1e-8` is PPT.
pub fn check_ppt(choi: &ChoiMatrix) -> f64 {
    let pt = ppt_transform(choi.matrix()).expect("16x16");
    eig_hermitian(&pt).map(|e| e.min()).unwrap_or(f64::NAN)
}

/// `F = Tr[(ρ_out ⊗ ρ_inᵀ) R]`.
pub fn channel_fidelity<S, T>(choi: &ChoiMatrix, input: &S, target: &T) -> f64
where
    S: AsDensity + ?Sized,
    T: AsDensity + ?Sized,
{
    // W is Hermitian, so ⟨W, R⟩ = Tr(W R).
    let weight = fidelity_operator(&input.to_density(), &target.to_density());
    weight.inner(choi.matrix()).re
}

/// `ρ_out ⊗ ρ_inᵀ` (Hermitian), so that `F = Tr[W R]`.
pub fn fidelity_operator(rho_in: &ComplexMatrix, rho_target: &ComplexMatrix) -> ComplexMatrix {
    kron(rho_target, &rho_in.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ket, random_density, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_channel(rng: &mut ChaCha8Rng, n_ops: usize) -> KrausSet {
        // Normalize a random family through (Σ G†G)^(-1/2).
        let gs: Vec<ComplexMatrix> = (0..n_ops).map(|_| random_matrix(rng, 4, 4)).collect();
        let sum = gs
            .iter()
            .fold(ComplexMatrix::zeros(4, 4), |acc, g| &acc + &(&g.adjoint() * g));
        let e = eig_hermitian(&sum).unwrap();
        let inv_sqrt = ComplexMatrix::real_diagonal(&e.values.iter().map(|l| 1.0 / l.sqrt()).collect::<Vec<_>>());
        let t = &(&e.vectors * &inv_sqrt) * &e.vectors.adjoint();
        KrausSet::new(gs.iter().map(|g| g * &t).collect()).unwrap()
    }

    #[test]
    fn plus_operator_layout() {
        let p = plus_operator(2);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_eq!(p[(r, c)], ONE);
        }
        assert_eq!(p.data().iter().filter(|z| **z != ZERO).count(), 4);
        assert_eq!(plus_operator(4).trace(), C64::new(4.0, 0.0));
        let e = eig_hermitian(&plus_operator(4).scale_real(0.25)).unwrap();
        assert!(e.min() > -1e-14);
        assert!((e.max() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_channel_returns_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(&mut rng, 4);
        let out = apply(&ChoiMatrix::identity_channel(), &rho).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn depolarizing_channel_outputs_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(&mut rng, 4);
        let out = apply(&ChoiMatrix::fully_depolarizing(), &rho).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-14);
    }

    #[test]
    fn swap_channel_swaps() {
        let out = apply(&ChoiMatrix::swap_channel(), &ComplexMatrix::projector(&ket("01"))).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::projector(&ket("10"))) < 1e-15);
    }

    #[test]
    fn strict_apply_rejects_non_tp_maps() {
        let doubled = ChoiMatrix::new(plus_operator(4).scale_real(2.0)).unwrap();
        let rho = ComplexMatrix::projector(&ket("00"));
        assert!(matches!(
            apply_strict(&doubled, &rho, 1e-8),
            Err(Error::NotTracePreserving { .. })
        ));
        assert!(apply_strict(&ChoiMatrix::identity_channel(), &rho, 1e-8).is_ok());
    }

    #[test]
    fn choi_from_kraus_matches_direct_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = random_channel(&mut rng, 3);
        let choi = choi_from_kraus(&k);
        for _ in 0..10 {
            let rho = random_density(&mut rng, 4);
            let via_choi = apply(&choi, &rho).unwrap();
            assert!(via_choi.max_abs_diff(&k.apply(&rho)) < 1e-12);
        }
    }

    #[test]
    fn unitary_kraus_gives_rank_one_choi() {
        let choi = choi_from_kraus(&KrausSet::new(vec![crate::linalg::swap()]).unwrap());
        let e = eig_hermitian(choi.matrix()).unwrap();
        assert!((e.max() - 4.0).abs() < 1e-12);
        assert!(e.values[..15].iter().all(|l| l.abs() < 1e-12));
        assert!((choi.matrix().trace().re - 4.0).abs() < 1e-14);
        let id = choi_from_kraus(&KrausSet::new(vec![ComplexMatrix::identity(4)]).unwrap());
        assert_eq!(id, ChoiMatrix::identity_channel());
    }

    #[test]
    fn kraus_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let k = random_channel(&mut rng, 3);
        let choi = choi_from_kraus(&k);
        let back = kraus_from_choi(&choi).unwrap();
        assert_eq!(back.len(), 3);
        assert!(choi_from_kraus(&back).matrix().max_abs_diff(choi.matrix()) < 1e-9);
        for _ in 0..10 {
            let rho = random_density(&mut rng, 4);
            assert!(back.apply(&rho).max_abs_diff(&k.apply(&rho)) < 1e-9);
        }
    }

    #[test]
    fn identity_choi_gives_single_identity_kraus() {
        let k = kraus_from_choi(&ChoiMatrix::identity_channel()).unwrap();
        assert_eq!(k.len(), 1);
        let op = &k.ops()[0];
        let phase = op[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(op.scale(phase.conj()).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn kraus_from_choi_rejects_negative_choi() {
        let m = &ComplexMatrix::identity(16) - &plus_operator(4);
        assert!(matches!(
            kraus_from_choi(&ChoiMatrix::new(m).unwrap()),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn tp_residuals() {
        assert!(check_tp(&ChoiMatrix::identity_channel()) < 1e-14);
        let doubled = ChoiMatrix::new(plus_operator(4).scale_real(2.0)).unwrap();
        assert!((check_tp(&doubled) - 2.0).abs() < 1e-14);
        assert!(check_tp(&ChoiMatrix::fully_depolarizing()) < 1e-14);
    }

    #[test]
    fn ppt_of_standard_channels() {
        assert!(check_ppt(&ChoiMatrix::identity_channel()) >= -1e-12);
        assert!(check_ppt(&ChoiMatrix::fully_depolarizing()) >= 0.0);
        assert!(check_ppt(&ChoiMatrix::swap_channel()) < -0.5);
    }

    #[test]
    fn fidelity_of_reference_channels() {
        let a = SchmidtState::new(0.6).unwrap();
        let c = SchmidtState::new(0.8).unwrap();
        let id = ChoiMatrix::identity_channel();
        assert!((channel_fidelity(&id, &a, &a) - 1.0).abs() < 1e-14);
        // |⟨φ|χ⟩|² = (0.6·0.8 + 0.8·0.6)² = 0.96²
        assert!((channel_fidelity(&id, &a, &c) - 0.9216).abs() < 1e-14);
        let dep = ChoiMatrix::fully_depolarizing();
        assert!((channel_fidelity(&dep, &a, &c) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fidelity_is_linear_in_choi() {
        let a = SchmidtState::new(0.3).unwrap();
        let c = SchmidtState::new(0.9).unwrap();
        let r1 = ChoiMatrix::identity_channel();
        let r2 = ChoiMatrix::swap_channel();
        let mix = r1.combine(0.3, &r2, 1.7);
        let lhs = channel_fidelity(&mix, &a, &c);
        let rhs = 0.3 * channel_fidelity(&r1, &a, &c) + 1.7 * channel_fidelity(&r2, &a, &c);
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn schmidt_state_validation() {
        assert!(SchmidtState::new(-0.1).is_err());
        assert!(SchmidtState::new(1.1).is_err());
        let s = SchmidtState::new(0.6).unwrap();
        let norm: f64 = s.vector().iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn choi_constructor_validates() {
        assert!(matches!(
            ChoiMatrix::new(ComplexMatrix::identity(4)),
            Err(Error::Dimension(_))
        ));
        let mut m = ComplexMatrix::zeros(16, 16);
        m[(0, 1)] = ONE;
        assert!(matches!(ChoiMatrix::new(m), Err(Error::NotHermitian { .. })));
    }
}
