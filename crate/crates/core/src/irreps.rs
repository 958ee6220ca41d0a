//! SU(2) representation machinery behind the covariant ansätze.
//!
//! Each covariance group is first conjugated by a fixed monomial unitary `S`
//! into a canonical form (`1⊗1⊗U⊗U`, `U⊗U⊗U⊗U` or `U₁⊗U₁⊗U₂⊗U₂`) whose
//! commutant is spanned by isomorphisms between equivalent irreducible
//! subspaces. The ansatz matrices are those isomorphisms mapped back with
//! `B = S† B̃ S`, split into Hermitian real/imaginary parts where they pair
//! distinct copies.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ket, kron, kron_all, pauli_y, swap, ComplexMatrix, C64, I, ONE};
use crate::scenarios::Scenario;

/// Copies of the spin-`J` irrep in four spin-½ factors, `J = 0, 1, 2`.
pub const MULTIPLICITIES: [usize; 3] = [2, 3, 1];

/// `(P_S, P_A)`: projectors onto the symmetric (triplet) and antisymmetric
/// (singlet) subspaces of two qubits.
pub fn two_qubit_projectors() -> (ComplexMatrix, ComplexMatrix) {
    let singlet = singlet();
    let p_a = ComplexMatrix::projector(&singlet);
    let p_s = &ComplexMatrix::identity(4) - &p_a;
    (p_s, p_a)
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ket("01").iter().zip(ket("10")).map(|(a, b)| (a - b) * s).collect()
}

/// Triplet states `m = +1, 0, −1`: `|00⟩`, `(|01⟩+|10⟩)/√2`, `|11⟩`.
pub fn triplet() -> [Vec<C64>; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        ket("00"),
        ket("01").iter().zip(ket("10")).map(|(a, b)| (a + b) * s).collect(),
        ket("11"),
    ]
}

/// One irreducible block: spin `j`, copy index `copy` (1-based) and its
/// `2j+1` orthonormal basis vectors on four qubits.
#[derive(Debug, Clone)]
pub struct IrrepBlock {
    pub j: usize,
    pub copy: usize,
    pub vectors: Vec<Vec<C64>>,
}

/// Orthonormal basis of all irreducible subspaces of four spin-½ factors.
#[derive(Debug, Clone)]
pub struct IrrepBasis {
    blocks: Vec<IrrepBlock>,
}

impl IrrepBasis {
    pub fn blocks(&self) -> &[IrrepBlock] {
        &self.blocks
    }

    pub fn block(&self, j: usize, copy: usize) -> Result<&IrrepBlock> {
        self.blocks
            .iter()
            .find(|b| b.j == j && b.copy == copy)
            .ok_or_else(|| Error::Index(format!("no irrep block J={j}, copy {copy}")))
    }

    /// All 16 vectors in block order.
    pub fn vectors(&self) -> impl Iterator<Item = &Vec<C64>> {
        self.blocks.iter().flat_map(|b| b.vectors.iter())
    }

    /// Largest entry of `|G − I|` over the Gram matrix and of
    /// `|Σ|v⟩⟨v| − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let vs: Vec<&Vec<C64>> = self.vectors().collect();
        let mut worst: f64 = 0.0;
        for (i, u) in vs.iter().enumerate() {
            for (j, v) in vs.iter().enumerate() {
                let g: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - id).norm());
            }
        }
        let mut sum = ComplexMatrix::zeros(16, 16);
        for v in &vs {
            sum.add_scaled(C64::new(1.0, 0.0), &ComplexMatrix::projector(v));
        }
        worst.max((&sum - &ComplexMatrix::identity(16)).max_abs())
    }
}

/// The tabulated basis, in its printed row order and with its printed signs.
pub fn table1_basis() -> IrrepBasis {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let k = |bits: &str| ket(bits);
    let two = |a: &[C64], b: &[C64]| crate::linalg::kron_vec(a, b);
    let lin = |terms: &[(f64, &Vec<C64>)]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); 16];
        for (c, v) in terms {
            for (o, x) in out.iter_mut().zip(v.iter()) {
                *o += x * *c;
            }
        }
        out
    };
    // Unnormalized two-qubit combinations |01 ± 10⟩.
    let plus: Vec<C64> = k("01").iter().zip(k("10")).map(|(a, b)| a + b).collect();
    let minus: Vec<C64> = k("01").iter().zip(k("10")).map(|(a, b)| a - b).collect();
    let (k00, k11) = (k("00"), k("11"));

    let d0_1 = lin(&[(0.5, &two(&minus, &minus))]);
    let d0_2 = lin(&[
        (1.0 / 3f64.sqrt(), &k("0011")),
        (-0.5 / 3f64.sqrt(), &two(&plus, &plus)),
        (1.0 / 3f64.sqrt(), &k("1100")),
    ]);
    let d1_1 = vec![
        lin(&[(s2, &two(&minus, &k00))]),
        lin(&[(0.5, &two(&minus, &plus))]),
        lin(&[(s2, &two(&minus, &k11))]),
    ];
    let d1_2 = vec![
        lin(&[(s2, &two(&k00, &minus))]),
        lin(&[(0.5, &two(&plus, &minus))]),
        lin(&[(s2, &two(&k11, &minus))]),
    ];
    let d1_3 = vec![
        lin(&[(-0.5, &two(&k00, &plus)), (0.5, &two(&plus, &k00))]),
        lin(&[(-s2, &k("0011")), (s2, &k("1100"))]),
        lin(&[(-0.5, &two(&plus, &k11)), (0.5, &two(&k11, &plus))]),
    ];
    let s6 = 1.0 / 6f64.sqrt();
    let d2_1 = vec![
        k("0000"),
        lin(&[(0.5, &two(&k00, &plus)), (0.5, &two(&plus, &k00))]),
        lin(&[(s6, &k("0011")), (s6, &k("1100")), (s6, &two(&plus, &plus))]),
        lin(&[(0.5, &two(&plus, &k11)), (0.5, &two(&k11, &plus))]),
        k("1111"),
    ];

    let block = |j, copy, vectors| IrrepBlock { j, copy, vectors };
    IrrepBasis {
        blocks: vec![
            block(0, 1, vec![d0_1]),
            block(0, 2, vec![d0_2]),
            block(1, 1, d1_1),
            block(1, 2, d1_2),
            block(1, 3, d1_3),
            block(2, 1, d2_1),
        ],
    }
}

/// `P_{D(J)_{kl}} = Σ_m |J,k,m⟩⟨J,l,m|`, pairing vectors by table position.
pub fn isomorphism_operator(basis: &IrrepBasis, j: usize, k: usize, l: usize) -> Result<ComplexMatrix> {
    let mult = MULTIPLICITIES
        .get(j)
        .copied()
        .ok_or_else(|| Error::Index(format!("J={j} not in 0..=2")))?;
    if k == 0 || l == 0 || k > mult || l > mult {
        return Err(Error::Index(format!(
            "copies ({k}, {l}) out of range 1..={mult} for J={j}"
        )));
    }
    let bk = basis.block(j, k)?;
    let bl = basis.block(j, l)?;
    let mut out = ComplexMatrix::zeros(16, 16);
    for (u, v) in bk.vectors.iter().zip(&bl.vectors) {
        out.add_scaled(ONE, &ComplexMatrix::outer(u, v));
    }
    Ok(out)
}

/// Monomial unitary `S` with `S g S† = canonical(g)` for the scenario's
/// covariance group.
pub fn scenario_similarity(scenario: Scenario) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let y = pauli_y();
    let sw = swap();
    let semicov = kron_all(&[&id, &sw, &y]);
    match scenario {
        Scenario::SemiCov => semicov,
        Scenario::Protocol => &semicov * &kron_all(&[&id, &id, &sw]),
        Scenario::FullSimultaneous => kron_all(&[&id, &id, &y, &y]),
        Scenario::FullIndependent => &kron_all(&[&id, &sw, &id]) * &kron_all(&[&id, &id, &y, &y]),
    }
}

/// One labelled Hermitian generator of the commutant.
#[derive(Debug, Clone)]
pub struct AnsatzTerm {
    pub label: String,
    /// Generator in the Choi frame, `S† B̃ S`.
    pub matrix: ComplexMatrix,
    /// Generator in the canonical frame, `B̃`.
    pub canonical: ComplexMatrix,
}

/// Real-linear parameterization of the covariant Choi matrices of a scenario.
#[derive(Debug, Clone)]
pub struct CovariantAnsatz {
    scenario: Scenario,
    terms: Vec<AnsatzTerm>,
    similarity: ComplexMatrix,
}

impl CovariantAnsatz {
    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn terms(&self) -> &[AnsatzTerm] {
        &self.terms
    }

    pub fn similarity(&self) -> &ComplexMatrix {
        &self.similarity
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.label.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    /// `Σ x_k B_k`.
    pub fn assemble(&self, x: &[f64]) -> ComplexMatrix {
        assert_eq!(x.len(), self.terms.len(), "coefficient count");
        let mut out = ComplexMatrix::zeros(16, 16);
        for (xk, t) in x.iter().zip(&self.terms) {
            if *xk != 0.0 {
                out.add_scaled(C64::new(*xk, 0.0), &t.matrix);
            }
        }
        out
    }

    /// Least-squares coordinates of `m` in the ansatz span and the residual
    /// Frobenius norm of the fit.
    pub fn coordinates(&self, m: &ComplexMatrix) -> (Vec<f64>, f64) {
        let n = self.terms.len();
        let gram = DMatrix::from_fn(n, n, |i, j| self.terms[i].matrix.inner(&self.terms[j].matrix).re);
        let rhs = nalgebra::DVector::from_fn(n, |i, _| self.terms[i].matrix.inner(m).re);
        let x = gram
            .cholesky()
            .expect("ansatz generators are linearly independent")
            .solve(&rhs);
        let x: Vec<f64> = x.iter().copied().collect();
        let residual = (&self.assemble(&x) - m).frobenius_norm();
        (x, residual)
    }

    /// Condition number of the Gram matrix of the vectorized generators.
    pub fn gram_condition(&self) -> f64 {
        let n = self.terms.len();
        let gram = ComplexMatrix::from_fn(n, n, |i, j| {
            C64::new(self.terms[i].matrix.inner(&self.terms[j].matrix).re, 0.0)
        });
        let e = eig_hermitian(&gram).expect("symmetric");
        e.max() / e.min()
    }

    /// Max Hermiticity deviation over all generators.
    pub fn hermitian_deviation(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.matrix.hermitian_deviation())
            .fold(0.0, f64::max)
    }

    /// `max ‖[B_k, g]‖_F` over the generators and `samples` random group
    /// elements.
    pub fn commutator_residual(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let g = self.scenario.random_group_element(&mut rng);
            for t in &self.terms {
                worst = worst.max(t.matrix.commutator(&g).frobenius_norm());
            }
        }
        worst
    }
}

/// Hermitian pair `(E + E†, iE − iE†)`.
fn hermitian_split(e: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let ed = e.adjoint();
    (&ed + e, &e.scale(I) - &ed.scale(I))
}

fn matrix_unit(n: usize, r: usize, c: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(r, c)] = ONE;
    m
}

/// Builds the scenario's ansatz.
///
/// Labels: `s_ij`/`a_ij` (symmetric/antisymmetric copies indexed by the
/// first two qubits `00, 01, 10, 11` as 1..4), `d_Jkl` for the
/// isomorphisms of spin `J`, and `p_1..p_4` for
/// `P_A⊗P_A, P_A⊗P_S, P_S⊗P_A, P_S⊗P_S`. Off-diagonal pairs carry `_re`
/// (`P_kl + P_lk`) or `_im` (`iP_kl − iP_lk`) suffixes, so `a_41_re` is
/// the real part of the `a_41` isomorphism coefficient.
pub fn build_ansatz(scenario: Scenario) -> CovariantAnsatz {
    let mut canonical: Vec<(String, ComplexMatrix)> = Vec::new();
    match scenario {
        Scenario::SemiCov | Scenario::Protocol => {
            let (p_s, p_a) = two_qubit_projectors();
            for (name, p) in [("s", &p_s), ("a", &p_a)] {
                for i in 0..4 {
                    for j in 0..=i {
                        let e = matrix_unit(4, i, j);
                        if i == j {
                            canonical.push((format!("{name}_{}{}", i + 1, i + 1), kron(&e, p)));
                        } else {
                            let (re, im) = hermitian_split(&kron(&e, p));
                            canonical.push((format!("{name}_{}{}_re", i + 1, j + 1), re));
                            canonical.push((format!("{name}_{}{}_im", i + 1, j + 1), im));
                        }
                    }
                }
            }
        }
        Scenario::FullSimultaneous => {
            let basis = table1_basis();
            for (j, &mult) in MULTIPLICITIES.iter().enumerate() {
                for k in 1..=mult {
                    for l in 1..=k {
                        let p = isomorphism_operator(&basis, j, k, l).expect("valid indices");
                        if k == l {
                            canonical.push((format!("d_{j}{k}{k}"), p));
                        } else {
                            let (re, im) = hermitian_split(&p);
                            canonical.push((format!("d_{j}{k}{l}_re"), re));
                            canonical.push((format!("d_{j}{k}{l}_im"), im));
                        }
                    }
                }
            }
        }
        Scenario::FullIndependent => {
            let (p_s, p_a) = two_qubit_projectors();
            let pairs = [(&p_a, &p_a), (&p_a, &p_s), (&p_s, &p_a), (&p_s, &p_s)];
            for (i, (first, second)) in pairs.iter().enumerate() {
                canonical.push((format!("p_{}", i + 1), kron(first, second)));
            }
        }
    }
    let similarity = scenario_similarity(scenario);
    let s_adj = similarity.adjoint();
    let terms = canonical
        .into_iter()
        .map(|(label, c)| AnsatzTerm {
            label,
            matrix: &(&s_adj * &c) * &similarity,
            canonical: c,
        })
        .collect();
    CovariantAnsatz {
        scenario,
        terms,
        similarity,
    }
}

/// Dimension of `{X : [X, g] = 0}` over `samples` random group elements of
/// the scenario, from the null space of `Σ_g L_g† L_g` with
/// `L_g = vec(X) ↦ vec([X, g])`.
pub fn commutant_dimension(scenario: Scenario, samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 16 * 16;
    let id = ComplexMatrix::identity(16);
    let mut acc = ComplexMatrix::zeros(n, n);
    for _ in 0..samples {
        let g = scenario.random_group_element(&mut rng);
        // L†L = 2I − g⊗ḡ − g†⊗gᵀ for unitary g (row-major vectorization).
        acc.add_scaled(C64::new(2.0, 0.0), &kron(&id, &id));
        acc.add_scaled(C64::new(-1.0, 0.0), &kron(&g, &g.conj()));
        acc.add_scaled(C64::new(-1.0, 0.0), &kron(&g.adjoint(), &g.transpose()));
    }
    let m = DMatrix::from_fn(n, n, |r, c| acc[(r, c)]);
    let eig = SymmetricEigen::new(m);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    eig.eigenvalues.iter().filter(|&&l| l.abs() <= 1e-9 * scale).count()
}

/// `max ‖[R, g]‖_F` for random group elements of the scenario.
pub fn covariance_residual(m: &ComplexMatrix, scenario: Scenario, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| m.commutator(&scenario.random_group_element(&mut rng)).frobenius_norm())
        .fold(0.0, f64::max)
}
