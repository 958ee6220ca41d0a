//! Closed-form Kraus families and covariance checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{build_problem, Scenario};
use crate::channel::{channel_fidelity, check_ppt, choi_from_kraus, ChoiMatrix, KrausSet};
use crate::error::{Error, Result};
use crate::irreps::{singlet, triplet};
use crate::linalg::{haar_su2_with, kron_vec, random_state, ComplexMatrix, C64};
use crate::sdp::{self, SdpSolution, SolverOptions};

fn real_matrix(scale: f64, entries: &[(usize, usize, f64)]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for &(r, c, v) in entries {
        m[(r, c)] = C64::new(scale * v, 0.0);
    }
    m
}

/// Non-identity optimal maps of the full covariance settings.
///
/// `FullSimultaneous` needs the free weight `d011 ∈ [0, 1]`; the first two
/// operators carry the prefactor `√((1−d011)/6)`, which is what makes the
/// family trace preserving (see the README). `FullIndependent` takes no
/// parameter.
pub fn published_kraus(scenario: Scenario, d011: Option<f64>) -> Result<KrausSet> {
    match scenario {
        Scenario::FullSimultaneous => {
            let d = d011.ok_or_else(|| Error::InvalidParameter("full-sim needs d011".into()))?;
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidParameter(format!("d011 = {d} outside [0, 1]")));
            }
            let k12 = ((1.0 - d) / 6.0).sqrt();
            let k3 = ((1.0 - d) / 12.0).sqrt();
            let k4 = d.sqrt() / 2.0;
            let k5 = 1.0 / 10f64.sqrt();
            let k67 = (3.0f64 / 20.0).sqrt();
            let k89 = (3.0f64 / 5.0).sqrt();
            KrausSet::new(vec![
                real_matrix(k12, &[(0, 1, -1.0), (0, 2, 1.0)]),
                real_matrix(k12, &[(3, 1, 1.0), (3, 2, -1.0)]),
                real_matrix(k3, &[(1, 1, -1.0), (1, 2, 1.0), (2, 1, -1.0), (2, 2, 1.0)]),
                real_matrix(k4, &[(1, 1, 1.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 1.0)]),
                real_matrix(
                    k5,
                    &[
                        (0, 0, 1.0),
                        (1, 1, -1.0),
                        (1, 2, -1.0),
                        (2, 1, -1.0),
                        (2, 2, -1.0),
                        (3, 3, 1.0),
                    ],
                ),
                real_matrix(k67, &[(1, 0, -1.0), (2, 0, -1.0), (3, 1, 1.0), (3, 2, 1.0)]),
                real_matrix(k67, &[(0, 1, -1.0), (0, 2, -1.0), (1, 3, 1.0), (2, 3, 1.0)]),
                real_matrix(k89, &[(0, 3, 1.0)]),
                real_matrix(k89, &[(3, 0, 1.0)]),
            ])
        }
        Scenario::FullIndependent => {
            let r2 = 2f64.sqrt() / 3.0;
            let a1 = real_matrix(1.0 / 3.0, &[(0, 0, 1.0), (1, 1, -1.0), (2, 2, -1.0), (3, 3, 1.0)]);
            let a2 = real_matrix(r2, &[(1, 0, -1.0), (3, 2, 1.0)]);
            let a3 = real_matrix(r2, &[(2, 0, -1.0), (3, 1, 1.0)]);
            let a4 = real_matrix(2.0 / 3.0, &[(3, 0, 1.0)]);
            let a5 = real_matrix(2.0 / 3.0, &[(2, 1, 1.0)]);
            let (a6, a7, a8, a9) = (a2.adjoint(), a3.adjoint(), a5.adjoint(), a4.adjoint());
            KrausSet::new(vec![a1, a2, a3, a4, a5, a6, a7, a8, a9])
        }
        _ => Err(Error::InvalidParameter(format!(
            "no published Kraus family for {scenario}"
        ))),
    }
}

/// Sub-interval of `d011 ∈ [0, 1]` on which the `FullSimultaneous` family
/// is PPT, scanned on `steps` points and refined by bisection. `None` if no
/// scanned point is PPT.
pub fn ppt_interval_d011(steps: usize) -> Option<(f64, f64)> {
    let is_ppt = |d: f64| -> bool {
        let k = published_kraus(Scenario::FullSimultaneous, Some(d)).expect("d in range");
        check_ppt(&choi_from_kraus(&k)) >= -1e-12
    };
    let steps = steps.max(2);
    let grid: Vec<f64> = (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect();
    let first = grid.iter().position(|&d| is_ppt(d))?;
    let last = grid.iter().rposition(|&d| is_ppt(d))?;
    let refine = |mut inside: f64, mut outside: f64| {
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if is_ppt(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = if first == 0 {
        0.0
    } else {
        refine(grid[first], grid[first - 1])
    };
    let hi = if last == steps - 1 {
        1.0
    } else {
        refine(grid[last], grid[last + 1])
    };
    Some((lo, hi))
}

/// `Protocol` labels of the parameters in [`AppendixParams`], in its
/// field order.
pub const APPENDIX_LABELS: [&str; 8] = ["s_11", "s_44", "s_41_re", "a_11", "a_44", "a_41_re", "s_22", "s_33"];

/// Coefficients feeding [`appendix_kraus`]: the two 2×2 blocks
/// `[[s11, s7], [s7, s44]]`, `[[a11, a7], [a7, a44]]` and the weights
/// `s22`, `s33`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixParams {
    pub s11: f64,
    pub s44: f64,
    pub s7: f64,
    pub a11: f64,
    pub a44: f64,
    pub a7: f64,
    pub s22: f64,
    pub s33: f64,
}

impl AppendixParams {
    /// Order `s11, s44, s7, a11, a44, a7, s22, s33`.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        let &[s11, s44, s7, a11, a44, a7, s22, s33] = v else {
            return Err(Error::InvalidParameter(format!(
                "expected 8 parameters, got {}",
                v.len()
            )));
        };
        Ok(Self {
            s11,
            s44,
            s7,
            a11,
            a44,
            a7,
            s22,
            s33,
        })
    }

    /// Reads the eight values off a full `Protocol` solution.
    pub fn from_solution(solution: &SdpSolution) -> Self {
        let ansatz = Scenario::Protocol.ansatz();
        let v: Vec<f64> = APPENDIX_LABELS
            .iter()
            .map(|l| solution.x[ansatz.index_of(l).expect("protocol label")])
            .collect();
        Self::from_slice(&v).expect("eight labels")
    }

    pub fn to_vec(&self) -> [f64; 8] {
        [
            self.s11, self.s44, self.s7, self.a11, self.a44, self.a7, self.s22, self.s33,
        ]
    }

    /// Coefficient vector over the `Protocol` ansatz with every other
    /// parameter zero.
    pub fn to_coefficients(&self) -> Vec<f64> {
        let ansatz = Scenario::Protocol.ansatz();
        let mut x = vec![0.0; ansatz.len()];
        for (label, v) in APPENDIX_LABELS.iter().zip(self.to_vec()) {
            x[ansatz.index_of(label).expect("protocol label")] = v;
        }
        x
    }

    /// Eigenvector slopes `p₁..p₄` from the closed-form expressions, or
    /// `None` when an off-diagonal entry vanishes.
    pub fn printed_slopes(&self) -> Option<[f64; 4]> {
        if self.s7 == 0.0 || self.a7 == 0.0 {
            return None;
        }
        let slope = |x11: f64, x44: f64, x7: f64, sign: f64| {
            (-x11 + x44 + sign * (x11 * x11 - 2.0 * x11 * x44 + x44 * x44 + 4.0 * x7 * x7).sqrt()) / (2.0 * x7)
        };
        Some([
            slope(self.s11, self.s44, self.s7, 1.0),
            slope(self.s11, self.s44, self.s7, -1.0),
            slope(self.a11, self.a44, self.a7, 1.0),
            slope(self.a11, self.a44, self.a7, -1.0),
        ])
    }

    /// Weights `d₁..d₆` from the closed-form expressions.
    pub fn printed_weights(&self) -> [f64; 6] {
        let w = |x11: f64, x44: f64, x7: f64, sign: f64| {
            let root = (x11 * x11 - 2.0 * x11 * x44 + x44 * x44 + 4.0 * x7 * x7).sqrt();
            ((x11 + x44 + sign * root).max(0.0)).sqrt() / 2f64.sqrt()
        };
        [
            w(self.s11, self.s44, self.s7, 1.0),
            w(self.s11, self.s44, self.s7, -1.0),
            w(self.a11, self.a44, self.a7, 1.0),
            w(self.a11, self.a44, self.a7, -1.0),
            self.s22.max(0.0).sqrt(),
            self.s33.max(0.0).sqrt(),
        ]
    }
}

/// Optimal `Protocol` map within the eight-parameter family (all other
/// ansatz coefficients fixed at zero), with its fidelity.
pub fn solve_appendix_family(a: f64, ppt: bool, opts: &SolverOptions) -> Result<(AppendixParams, f64)> {
    let full = build_problem(Scenario::Protocol, a, a, ppt)?;
    let ansatz = Scenario::Protocol.ansatz();
    let keep: Vec<usize> = APPENDIX_LABELS
        .iter()
        .map(|l| ansatz.index_of(l).expect("protocol label"))
        .collect();
    let sol = sdp::solve_with(&full.restrict(&keep)?, opts);
    if !sol.is_optimal() {
        return Err(Error::Solver(format!(
            "appendix family at a={a}: status {}",
            sol.status
        )));
    }
    Ok((AppendixParams::from_slice(&sol.x)?, sol.objective))
}

/// Eigen-pairs `(λ, (e₁, e₄))` of `[[x11, x7], [x7, x44]]`, larger first.
/// Away from `x7 = 0` the vector is `(1, p)/√(1+p²)` with `p = (λ − x11)/x7`.
fn block_eigen(x11: f64, x44: f64, x7: f64) -> [(f64, [f64; 2]); 2] {
    let mean = 0.5 * (x11 + x44);
    let root = (0.25 * (x11 - x44).powi(2) + x7 * x7).sqrt();
    let (hi, lo) = (mean + root, mean - root);
    if x7.abs() <= 1e-14 * (x11.abs() + x44.abs()).max(1e-300) {
        // Diagonal block: unit vectors, ordered by eigenvalue.
        return if x11 >= x44 {
            [(x11, [1.0, 0.0]), (x44, [0.0, 1.0])]
        } else {
            [(x44, [0.0, 1.0]), (x11, [1.0, 0.0])]
        };
    }
    let vec_for = |l: f64| {
        let p = (l - x11) / x7;
        let n = (1.0 + p * p).sqrt();
        [1.0 / n, p / n]
    };
    [(hi, vec_for(hi)), (lo, vec_for(lo))]
}

/// The fourteen Kraus operators of the general `Protocol` map.
///
/// Each comes from a rank-one piece `λ |e ⊗ t⟩⟨e ⊗ t|` of the canonical
/// Choi matrix, where `e` spans the four copies and `t` runs over the
/// triplet (`s` blocks) or the singlet (`a` blocks): `√λ·S†(e ⊗ t)`
/// reshaped to 4×4. The order is three operators for each `s` eigenvalue,
/// one for each `a` eigenvalue, then three each for `s22` and `s33`.
pub fn appendix_kraus(params: &AppendixParams) -> Result<KrausSet> {
    let s_blocks = block_eigen(params.s11, params.s44, params.s7);
    let a_blocks = block_eigen(params.a11, params.a44, params.a7);
    for &(l, _) in s_blocks.iter().chain(&a_blocks) {
        if l < -1e-12 {
            return Err(Error::InvalidParameter(format!("coefficient block has eigenvalue {l}")));
        }
    }
    for (name, v) in [("s22", params.s22), ("s33", params.s33)] {
        if v < -1e-12 {
            return Err(Error::InvalidParameter(format!("{name} = {v} is negative")));
        }
    }
    let s_adj = Scenario::Protocol.ansatz().similarity().adjoint();
    let copies = |e: [f64; 4]| -> Vec<C64> { e.iter().map(|&v| C64::new(v, 0.0)).collect() };
    let op = |weight: f64, copy: &[C64], t: &[C64]| -> ComplexMatrix {
        let v = s_adj.matvec(&kron_vec(copy, t));
        let scale = weight.max(0.0).sqrt();
        ComplexMatrix::from_vec(4, 4, v.into_iter().map(|z| z * scale).collect()).expect("16 entries")
    };
    let tri = triplet();
    let sing = singlet();
    let mut ops = Vec::with_capacity(14);
    for (l, [e1, e4]) in s_blocks {
        let e = copies([e1, 0.0, 0.0, e4]);
        ops.extend(tri.iter().map(|t| op(l, &e, t)));
    }
    for (l, [e1, e4]) in a_blocks {
        ops.push(op(l, &copies([e1, 0.0, 0.0, e4]), &sing));
    }
    ops.extend(tri.iter().map(|t| op(params.s22, &copies([0.0, 1.0, 0.0, 0.0]), t)));
    ops.extend(tri.iter().map(|t| op(params.s33, &copies([0.0, 0.0, 1.0, 0.0]), t)));
    KrausSet::new(ops)
}

/// Result of [`verify_covariance`].
#[derive(Debug, Clone, Copy)]
pub struct CovarianceReport {
    /// `max ‖[R, g(U)]‖_F`.
    pub commutator: f64,
    /// `max |F(V₁ψ, V₂φ) − F(ψ, φ)|` over random pure `ψ, φ`.
    pub fidelity: f64,
}

impl CovarianceReport {
    pub fn max(&self) -> f64 {
        self.commutator.max(self.fidelity)
    }
}

pub fn verify_covariance(choi: &ChoiMatrix, scenario: Scenario, samples: usize, seed: u64) -> CovarianceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut commutator: f64 = 0.0;
    let mut fidelity: f64 = 0.0;
    for _ in 0..samples {
        let u1 = haar_su2_with(&mut rng);
        let u2 = haar_su2_with(&mut rng);
        let g = scenario.group_element(&u1, &u2);
        commutator = commutator.max(choi.matrix().commutator(&g).frobenius_norm());

        let psi = random_state(&mut rng, 4);
        let phi = random_state(&mut rng, 4);
        let (v1, v2) = scenario.local_unitaries(&u1, &u2);
        let f0 = channel_fidelity(choi, psi.as_slice(), phi.as_slice());
        let f1 = channel_fidelity(choi, v1.matvec(&psi).as_slice(), v2.matvec(&phi).as_slice());
        fidelity = fidelity.max((f1 - f0).abs());
    }
    CovarianceReport { commutator, fidelity }
}
