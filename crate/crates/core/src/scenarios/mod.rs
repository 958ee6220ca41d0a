//! The four symmetry settings: problem assembly, solving, closed-form
//! optima, published Kraus families and grid sweeps.

mod kraus;
mod sweep;

pub use kraus::{
    appendix_kraus, ppt_interval_d011, published_kraus, solve_appendix_family, verify_covariance, AppendixParams,
    CovarianceReport, APPENDIX_LABELS,
};
pub use sweep::{format_float, grid_sweep, identity_region, FidelitySurface, IdentityRegion, SurfacePoint, CSV_HEADER};

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;

use crate::channel::{choi_dims, fidelity_operator, ppt_transform, ChoiMatrix, SchmidtState, A_IN, B_IN};
use crate::error::{Error, Result};
use crate::irreps::{build_ansatz, CovariantAnsatz};
use crate::linalg::{haar_su2_with, kron, kron_all, partial_trace, ComplexMatrix};
use crate::sdp::{self, Equalities, Pencil, SdpProblem, SdpSolution, SolverOptions};

/// Pencil names used in every scenario problem.
pub const CHOI_PENCIL: &str = "choi";
pub const PPT_PENCIL: &str = "ppt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Covariance under `U` on the second qubit of input and output.
    SemiCov,
    /// Covariance under the same `U` on both qubits.
    FullSimultaneous,
    /// Covariance under independent `U₁ ⊗ U₂`.
    FullIndependent,
    /// Handing a local unitary from Alice's qubit to Bob's.
    Protocol,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::SemiCov,
        Scenario::FullSimultaneous,
        Scenario::FullIndependent,
        Scenario::Protocol,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::SemiCov => "semicov",
            Self::FullSimultaneous => "full-sim",
            Self::FullIndependent => "full-ind",
            Self::Protocol => "protocol",
        }
    }

    fn index(self) -> usize {
        match self {
            Self::SemiCov => 0,
            Self::FullSimultaneous => 1,
            Self::FullIndependent => 2,
            Self::Protocol => 3,
        }
    }

    /// Whether the target Schmidt parameter `c` is independent of `a`.
    pub fn has_target_parameter(self) -> bool {
        self != Self::Protocol
    }

    /// `(V₁, V₂)` acting on input and output for the group parameters.
    /// Only `FullIndependent` uses `u2`.
    pub fn local_unitaries(self, u1: &ComplexMatrix, u2: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
        let id = ComplexMatrix::identity(2);
        match self {
            Self::SemiCov => (kron(&id, u1), kron(&id, u1)),
            Self::FullSimultaneous => (kron(u1, u1), kron(u1, u1)),
            Self::FullIndependent => (kron(u1, u2), kron(u1, u2)),
            Self::Protocol => (kron(u1, &id), kron(&id, u1)),
        }
    }

    /// `g = V₂ ⊗ V₁*`, which must commute with a covariant Choi matrix.
    pub fn group_element(self, u1: &ComplexMatrix, u2: &ComplexMatrix) -> ComplexMatrix {
        let (v1, v2) = self.local_unitaries(u1, u2);
        kron(&v2, &v1.conj())
    }

    /// `S g S†` for the scenario's similarity `S`.
    pub fn canonical_group_element(self, u1: &ComplexMatrix, u2: &ComplexMatrix) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        match self {
            Self::SemiCov | Self::Protocol => kron_all(&[&id, &id, u1, u1]),
            Self::FullSimultaneous => kron_all(&[u1, u1, u1, u1]),
            Self::FullIndependent => kron_all(&[u1, u1, u2, u2]),
        }
    }

    pub fn random_group_element<R: Rng + ?Sized>(self, rng: &mut R) -> ComplexMatrix {
        let u1 = haar_su2_with(rng);
        let u2 = haar_su2_with(rng);
        self.group_element(&u1, &u2)
    }

    /// Input and target states at group identity. `Protocol` ignores `c`.
    pub fn states(self, a: f64, c: f64) -> Result<(SchmidtState, SchmidtState)> {
        let input = SchmidtState::new(a)?;
        let target = match self {
            Self::Protocol => input,
            _ => SchmidtState::new(c)?,
        };
        Ok((input, target))
    }

    pub fn ansatz(self) -> &'static CovariantAnsatz {
        &self.data().ansatz
    }

    fn data(self) -> &'static ScenarioData {
        static CACHE: [OnceLock<ScenarioData>; 4] = [const { OnceLock::new() }; 4];
        CACHE[self.index()].get_or_init(|| ScenarioData::new(self))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|sc| sc.tag() == s).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown scenario {s:?} (expected semicov, full-sim, full-ind or protocol)"
            ))
        })
    }
}

/// Per-scenario matrices that do not depend on `(a, c)`.
struct ScenarioData {
    ansatz: CovariantAnsatz,
    ppt_terms: Vec<ComplexMatrix>,
    tp: Equalities,
}

impl ScenarioData {
    fn new(scenario: Scenario) -> Self {
        let ansatz = build_ansatz(scenario);
        let ppt_terms = ansatz
            .terms()
            .iter()
            .map(|t| ppt_transform(&t.matrix).expect("16x16"))
            .collect();
        let tp = tp_rows(&ansatz);
        Self { ansatz, ppt_terms, tp }
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")))
    }
}

/// `c_k = Tr[(ρ_out ⊗ ρ_inᵀ) B_k]`.
pub fn objective_vector(scenario: Scenario, a: f64, c: f64) -> Result<Vec<f64>> {
    check_unit("a", a)?;
    check_unit("c", c)?;
    let (input, target) = scenario.states(a, c)?;
    let w = fidelity_operator(&input.density(), &target.density());
    Ok(scenario
        .ansatz()
        .terms()
        .iter()
        .map(|t| w.inner(&t.matrix).re)
        .collect())
}

/// `Tr_out(Σ x_k B_k) = I₄` as real rows: real parts of the upper triangle
/// and imaginary parts strictly above the diagonal, with all-zero rows
/// dropped.
pub fn tp_constraint_rows(scenario: Scenario) -> Equalities {
    scenario.data().tp.clone()
}

fn tp_rows(ansatz: &CovariantAnsatz) -> Equalities {
    let reduced: Vec<ComplexMatrix> = ansatz
        .terms()
        .iter()
        .map(|t| partial_trace(&t.matrix, &choi_dims(), &[A_IN, B_IN]).expect("16x16"))
        .collect();
    let mut eq = Equalities::default();
    for r in 0..4 {
        for s in r..4 {
            let re: Vec<f64> = reduced.iter().map(|m| m[(r, s)].re).collect();
            let target = if r == s { 1.0 } else { 0.0 };
            push_row(&mut eq, re, target);
            if r != s {
                let im: Vec<f64> = reduced.iter().map(|m| m[(r, s)].im).collect();
                push_row(&mut eq, im, 0.0);
            }
        }
    }
    eq
}

fn push_row(eq: &mut Equalities, mut row: Vec<f64>, rhs: f64) {
    // Clean rounding noise from the similarity transform.
    for v in row.iter_mut() {
        if v.abs() < 1e-14 {
            *v = 0.0;
        }
    }
    if rhs == 0.0 && row.iter().all(|v| *v == 0.0) {
        return;
    }
    eq.rows.push(row);
    eq.rhs.push(rhs);
}

/// Maximize the fidelity over covariant, CP, TP (and optionally PPT) maps.
pub fn build_problem(scenario: Scenario, a: f64, c: f64, ppt: bool) -> Result<SdpProblem> {
    let objective = objective_vector(scenario, a, c)?;
    let data = scenario.data();
    let zero = ComplexMatrix::zeros(16, 16);
    let mut pencils = vec![Pencil {
        name: CHOI_PENCIL.into(),
        constant: zero.clone(),
        coefficients: data.ansatz.terms().iter().map(|t| t.matrix.clone()).collect(),
    }];
    if ppt {
        pencils.push(Pencil {
            name: PPT_PENCIL.into(),
            constant: zero,
            coefficients: data.ppt_terms.clone(),
        });
    }
    SdpProblem::new(data.ansatz.labels(), objective, pencils, data.tp.clone())
}

/// An optimal covariant channel at one parameter point.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub fidelity: f64,
    pub choi: ChoiMatrix,
    pub solution: SdpSolution,
}

pub fn solve_point(scenario: Scenario, a: f64, c: f64, ppt: bool) -> Result<PointSolution> {
    solve_point_with(scenario, a, c, ppt, &SolverOptions::default())
}

pub fn solve_point_with(scenario: Scenario, a: f64, c: f64, ppt: bool, opts: &SolverOptions) -> Result<PointSolution> {
    let problem = build_problem(scenario, a, c, ppt)?;
    let solution = sdp::solve_with(&problem, opts);
    if !solution.is_optimal() {
        return Err(Error::Solver(format!(
            "{scenario} at a={a}, c={c}, ppt={ppt}: status {} after {} iterations",
            solution.status, solution.iterations
        )));
    }
    let choi = ChoiMatrix::new(scenario.ansatz().assemble(&solution.x).hermitian_part())?;
    Ok(PointSolution {
        fidelity: solution.objective,
        choi,
        solution,
    })
}

/// `(ac + √((1−a²)(1−c²)))²`, the overlap of the two Schmidt states.
pub fn overlap_squared(a: f64, c: f64) -> f64 {
    let b = (1.0 - a * a).max(0.0).sqrt();
    let d = (1.0 - c * c).max(0.0).sqrt();
    (a * c + b * d).powi(2)
}

/// `c²(1−a²) + a²(1−c²)`.
pub fn cross_weight(a: f64, c: f64) -> f64 {
    c * c * (1.0 - a * a) + a * a * (1.0 - c * c)
}

/// Closed-form optimum where one is known: the overlap for `SemiCov` with
/// `a ≤ c`, and the two-branch maxima for the full covariance settings.
pub fn analytic_fidelity(scenario: Scenario, a: f64, c: f64) -> Option<f64> {
    let o = overlap_squared(a, c);
    let s = cross_weight(a, c);
    match scenario {
        Scenario::SemiCov if a <= c => Some(o),
        Scenario::SemiCov | Scenario::Protocol => None,
        Scenario::FullSimultaneous => Some(o.max(0.1 * o + 0.6 * s)),
        Scenario::FullIndependent => Some(o.max(o / 9.0 + 4.0 * s / 9.0)),
    }
}

/// The non-identity branch of [`analytic_fidelity`] for the full
/// covariance settings.
pub fn second_branch(scenario: Scenario, a: f64, c: f64) -> Option<f64> {
    let o = overlap_squared(a, c);
    let s = cross_weight(a, c);
    match scenario {
        Scenario::FullSimultaneous => Some(0.1 * o + 0.6 * s),
        Scenario::FullIndependent => Some(o / 9.0 + 4.0 * s / 9.0),
        _ => None,
    }
}
