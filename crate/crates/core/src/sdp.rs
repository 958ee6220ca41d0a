//! Dense log-barrier solver for small complex semidefinite programs.
//!
//! Problems have the form
//!
//! ```text
//! maximize   cᵀx
//! subject to F_j(x) = C_j + Σ_k x_k A_jk ⪰ 0   (Hermitian pencils)
//!            E x = b
//! ```
//!
//! Equalities are eliminated up front by a null-space parameterization
//! `x = x₀ + N z`, every pencil is split into the connected blocks of its
//! sparsity pattern, and the reduced problem is solved by a damped Newton
//! path-following method on `−t·ĉᵀz − Σ log det F_b(z)`. At the end of each
//! centering step the duality gap is bounded by `(Σ block sizes)/t`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, eig_hermitian, forward_substitute, ComplexMatrix, C64};

const HERMITIAN_TOL: f64 = 1e-12;
/// Largest barrier weight, i.e. the barrier parameter never drops below 1e-9.
const T_MAX: f64 = 1e9;
const T_GROWTH: f64 = 10.0;
/// Centering stops once `λ²/2` falls below this.
const CENTERING_TOL: f64 = 1e-10;
/// Newton decrement below which full steps are taken.
const QUADRATIC_REGION: f64 = 0.25;

/// `C + Σ x_k A_k ⪰ 0`.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub name: String,
    pub constant: ComplexMatrix,
    pub coefficients: Vec<ComplexMatrix>,
}

impl Pencil {
    pub fn evaluate(&self, x: &[f64]) -> ComplexMatrix {
        let mut m = self.constant.clone();
        for (xk, a) in x.iter().zip(&self.coefficients) {
            if *xk != 0.0 {
                m.add_scaled(C64::new(*xk, 0.0), a);
            }
        }
        m
    }
}

/// `E x = b`, one row per constraint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Equalities {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    labels: Vec<String>,
    objective: Vec<f64>,
    pencils: Vec<Pencil>,
    equalities: Equalities,
}

impl SdpProblem {
    /// Validates shapes and Hermiticity (within 1e-12) of every pencil
    /// matrix.
    pub fn new(labels: Vec<String>, objective: Vec<f64>, pencils: Vec<Pencil>, equalities: Equalities) -> Result<Self> {
        let n = objective.len();
        if labels.len() != n {
            return Err(Error::Dimension(format!("{} labels for {n} variables", labels.len())));
        }
        if pencils.is_empty() {
            return Err(Error::Dimension("at least one PSD pencil is required".into()));
        }
        for p in &pencils {
            let d = p.constant.rows();
            if !p.constant.is_square() {
                return Err(Error::Dimension(format!("pencil {} is not square", p.name)));
            }
            if p.coefficients.len() != n {
                return Err(Error::Dimension(format!(
                    "pencil {} has {} coefficient matrices for {n} variables",
                    p.name,
                    p.coefficients.len()
                )));
            }
            for m in std::iter::once(&p.constant).chain(&p.coefficients) {
                if m.rows() != d || m.cols() != d {
                    return Err(Error::Dimension(format!("pencil {} mixes sizes", p.name)));
                }
                let deviation = m.hermitian_deviation();
                if deviation > HERMITIAN_TOL {
                    return Err(Error::NotHermitian { deviation });
                }
            }
        }
        if equalities.rows.len() != equalities.rhs.len() {
            return Err(Error::Dimension("equality rows and rhs differ in length".into()));
        }
        if let Some(row) = equalities.rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension(format!("equality row of length {}", row.len())));
        }
        Ok(Self {
            labels,
            objective,
            pencils,
            equalities,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn pencils(&self) -> &[Pencil] {
        &self.pencils
    }

    pub fn equalities(&self) -> &Equalities {
        &self.equalities
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Same problem with the objective multiplied by `s`.
    pub fn scaled_objective(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.objective.iter_mut().for_each(|c| *c *= s);
        p
    }

    /// Same constraints with one pencil removed by name.
    pub fn without_pencil(&self, name: &str) -> Result<Self> {
        let pencils: Vec<Pencil> = self.pencils.iter().filter(|p| p.name != name).cloned().collect();
        if pencils.len() == self.pencils.len() {
            return Err(Error::InvalidParameter(format!("no pencil named {name}")));
        }
        Self::new(
            self.labels.clone(),
            self.objective.clone(),
            pencils,
            self.equalities.clone(),
        )
    }

    /// Subproblem over the variables `keep`; the others are fixed at zero.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let n = self.num_variables();
        if let Some(&k) = keep.iter().find(|&&k| k >= n) {
            return Err(Error::Index(format!("variable {k} of {n}")));
        }
        let pick = |v: &[f64]| keep.iter().map(|&k| v[k]).collect::<Vec<f64>>();
        let pencils = self
            .pencils
            .iter()
            .map(|p| Pencil {
                name: p.name.clone(),
                constant: p.constant.clone(),
                coefficients: keep.iter().map(|&k| p.coefficients[k].clone()).collect(),
            })
            .collect();
        Self::new(
            keep.iter().map(|&k| self.labels[k].clone()).collect(),
            pick(&self.objective),
            pencils,
            Equalities {
                rows: self.equalities.rows.iter().map(|r| pick(r)).collect(),
                rhs: self.equalities.rhs.clone(),
            },
        )
    }

    pub fn export(&self, id: &str, meta: serde_json::Value) -> ProblemExport {
        ProblemExport {
            id: id.to_string(),
            labels: self.labels.clone(),
            objective: self.objective.clone(),
            pencils: self
                .pencils
                .iter()
                .map(|p| PencilExport {
                    name: p.name.clone(),
                    constant: matrix_to_pairs(&p.constant),
                    coefficients: p.coefficients.iter().map(matrix_to_pairs).collect(),
                })
                .collect(),
            equalities: self.equalities.clone().into(),
            expected_fidelity: None,
            meta,
        }
    }

    pub fn from_export(doc: &ProblemExport) -> Result<Self> {
        let pencils = doc
            .pencils
            .iter()
            .map(|p| {
                Ok(Pencil {
                    name: p.name.clone(),
                    constant: pairs_to_matrix(&p.constant)?,
                    coefficients: p
                        .coefficients
                        .iter()
                        .map(|m| pairs_to_matrix(m))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            doc.labels.clone(),
            doc.objective.clone(),
            pencils,
            Equalities {
                rows: doc.equalities.rows.clone(),
                rhs: doc.equalities.rhs.clone(),
            },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::Infeasible => "infeasible",
            Self::MaxIterations => "max-iterations",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Upper bound on `optimum − objective` from the barrier parameter.
    pub gap: f64,
    /// Final Newton decrement divided by the barrier weight.
    pub kkt_residual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Rank of the equality system after redundancy elimination.
    pub equality_rank: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            max_iterations: 500,
        }
    }
}

/// Constraint satisfaction at a candidate point.
#[derive(Debug, Clone)]
pub struct Residuals {
    /// `(pencil name, smallest eigenvalue)`.
    pub min_eigenvalues: Vec<(String, f64)>,
    /// `‖E x − b‖₂`.
    pub equality: f64,
}

impl Residuals {
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn residuals(p: &SdpProblem, x: &[f64]) -> Result<Residuals> {
    if x.len() != p.num_variables() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} variables",
            x.len(),
            p.num_variables()
        )));
    }
    let min_eigenvalues = p
        .pencils
        .iter()
        .map(|pen| Ok((pen.name.clone(), eig_hermitian(&pen.evaluate(x))?.min())))
        .collect::<Result<Vec<_>>>()?;
    let equality = p
        .equalities
        .rows
        .iter()
        .zip(&p.equalities.rhs)
        .map(|(row, b)| {
            let r: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b;
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(Residuals {
        min_eigenvalues,
        equality,
    })
}

pub fn solve(p: &SdpProblem) -> SdpSolution {
    solve_with(p, &SolverOptions::default())
}

pub fn solve_with(p: &SdpProblem, opts: &SolverOptions) -> SdpSolution {
    let n = p.num_variables();
    let affine = AffineSpace::of(&p.equalities, n);
    let infeasible = |x: Vec<f64>, iterations| SdpSolution {
        objective: p.objective_value(&x),
        x,
        gap: f64::INFINITY,
        kkt_residual: f64::INFINITY,
        status: SolveStatus::Infeasible,
        iterations,
        equality_rank: affine.rank,
    };
    if !affine.consistent {
        return infeasible(affine.x0.clone(), 0);
    }

    let Some(blocks) = reduce_pencils(p, &affine) else {
        return infeasible(affine.x0.clone(), 0);
    };
    let r = affine.dim();
    // Objective in z, normalized so the argmax is independent of its scale.
    let c_hat: Vec<f64> = (0..r)
        .map(|l| (0..n).map(|k| affine.null[(k, l)] * p.objective[k]).sum())
        .collect();
    let c_scale = c_hat.iter().fold(0.0f64, |a, b| a.max(b.abs()));

    let mut iterations = 0;
    let z0 = match phase_one(&blocks, r, opts.max_iterations, &mut iterations) {
        Some(z) => z,
        None => return infeasible(affine.point(&vec![0.0; r]), iterations),
    };

    let finish = |z: &[f64], gap: f64, kkt: f64, status, iterations| {
        let x = affine.point(z);
        SdpSolution {
            objective: p.objective_value(&x),
            x,
            gap,
            kkt_residual: kkt,
            status,
            iterations,
            equality_rank: affine.rank,
        }
    };
    if c_scale == 0.0 || r == 0 {
        return finish(&z0, 0.0, 0.0, SolveStatus::Optimal, iterations);
    }
    let c_unit: Vec<f64> = c_hat.iter().map(|c| c / c_scale).collect();
    let barrier = Barrier {
        blocks: &blocks,
        c: &c_unit,
    };
    let m = barrier.degree();
    // Barrier weight at which m/t (in the caller's units) reaches gap_tol.
    let t_target = (m * c_scale / opts.gap_tol).min(T_MAX);

    let mut z = z0;
    let mut t = 1.0f64.min(t_target);
    loop {
        let outcome = barrier.center(&mut z, t, opts.max_iterations, &mut iterations);
        let gap = m * c_scale / t;
        let kkt = outcome.decrement * c_scale / t;
        if outcome.exhausted {
            return finish(&z, gap, kkt, SolveStatus::MaxIterations, iterations);
        }
        if t >= t_target {
            let status = if gap <= opts.gap_tol * (1.0 + 1e-12) {
                SolveStatus::Optimal
            } else {
                SolveStatus::MaxIterations
            };
            return finish(&z, gap, kkt, status, iterations);
        }
        t = (t * T_GROWTH).min(t_target);
    }
}

/// `{x : E x = b} = {x₀ + N z}`.
struct AffineSpace {
    x0: Vec<f64>,
    /// n × r, orthonormal columns.
    null: DMatrix<f64>,
    rank: usize,
    consistent: bool,
}

impl AffineSpace {
    fn of(eq: &Equalities, n: usize) -> Self {
        let m = eq.rows.len();
        if m == 0 || n == 0 {
            return Self {
                x0: vec![0.0; n],
                null: DMatrix::identity(n, n),
                rank: 0,
                consistent: true,
            };
        }
        // Pad with zero rows so the SVD yields a full right basis.
        let rows = m.max(n);
        let e = DMatrix::from_fn(rows, n, |i, j| if i < m { eq.rows[i][j] } else { 0.0 });
        let b = DVector::from_fn(rows, |i, _| if i < m { eq.rhs[i] } else { 0.0 });
        let svd = e.clone().svd(true, true);
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
        let threshold = 1e-10 * sigma_max.max(1.0) * (rows as f64);

        let mut x0 = DVector::zeros(n);
        let mut null_rows = Vec::new();
        for (i, &s) in svd.singular_values.iter().enumerate() {
            let v = v_t.row(i).transpose();
            if s > threshold {
                let coef = u.column(i).dot(&b) / s;
                x0 += v * coef;
            } else {
                null_rows.push(v);
            }
        }
        let rank = n - null_rows.len();
        let null = if null_rows.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&null_rows)
        };
        let resid = (&e * &x0 - &b).norm();
        let consistent = resid <= 1e-9 * (1.0 + b.norm());
        Self {
            x0: x0.iter().copied().collect(),
            null,
            rank,
            consistent,
        }
    }

    fn dim(&self) -> usize {
        self.null.ncols()
    }

    fn point(&self, z: &[f64]) -> Vec<f64> {
        (0..self.x0.len())
            .map(|k| self.x0[k] + z.iter().enumerate().map(|(l, zl)| self.null[(k, l)] * zl).sum::<f64>())
            .collect()
    }
}

/// One diagonal block of a reduced pencil: `C + Σ_l z_l G_l` with only the
/// nonzero generators kept.
struct Block {
    constant: ComplexMatrix,
    generators: Vec<(usize, ComplexMatrix)>,
}

impl Block {
    fn size(&self) -> usize {
        self.constant.rows()
    }

    fn evaluate(&self, z: &[f64]) -> ComplexMatrix {
        let mut m = self.constant.clone();
        for (l, g) in &self.generators {
            if z[*l] != 0.0 {
                m.add_scaled(C64::new(z[*l], 0.0), g);
            }
        }
        m
    }
}

/// Connected components of the nonzero pattern shared by all matrices.
fn block_partition(mats: &[&ComplexMatrix], d: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let scale = mats.iter().map(|m| m.max_abs()).fold(0.0f64, f64::max);
    let cutoff = 1e-14 * scale.max(1.0);
    for m in mats {
        for i in 0..d {
            for j in i + 1..d {
                if m[(i, j)].norm() > cutoff {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_index = vec![usize::MAX; d];
    for i in 0..d {
        let root = find(&mut parent, i);
        if root_index[root] == usize::MAX {
            root_index[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_index[root]].push(i);
    }
    groups
}

/// Splits every pencil into blocks over the reduced variables. Returns
/// `None` if a block that no variable touches is not PSD.
fn reduce_pencils(p: &SdpProblem, affine: &AffineSpace) -> Option<Vec<Block>> {
    let r = affine.dim();
    let mut blocks = Vec::new();
    for pen in &p.pencils {
        let d = pen.constant.rows();
        let mats: Vec<&ComplexMatrix> = std::iter::once(&pen.constant).chain(&pen.coefficients).collect();
        for idx in block_partition(&mats, d) {
            let constant = pen.evaluate(&affine.x0).select(&idx);
            let coeffs: Vec<ComplexMatrix> = pen.coefficients.iter().map(|a| a.select(&idx)).collect();
            let scale = coeffs.iter().map(|a| a.max_abs()).fold(0.0f64, f64::max);
            let mut generators = Vec::new();
            for l in 0..r {
                let mut g = ComplexMatrix::zeros(idx.len(), idx.len());
                for (k, a) in coeffs.iter().enumerate() {
                    let w = affine.null[(k, l)];
                    if w != 0.0 {
                        g.add_scaled(C64::new(w, 0.0), a);
                    }
                }
                if g.max_abs() > 1e-13 * scale.max(1.0) {
                    generators.push((l, g.hermitian_part()));
                }
            }
            if generators.is_empty() {
                let min = eig_hermitian(&constant.hermitian_part()).ok()?.min();
                if min < -1e-10 {
                    return None;
                }
                continue;
            }
            blocks.push(compress(Block {
                constant: constant.hermitian_part(),
                generators,
            })?);
        }
    }
    Some(blocks)
}

/// Restricts a block to the joint range of its matrices. Directions
/// outside it are zero for every `z`, so no point would be strictly
/// feasible without this.
fn compress(b: Block) -> Option<Block> {
    let mut gram = &b.constant * &b.constant;
    for (_, g) in &b.generators {
        gram.add_scaled(C64::new(1.0, 0.0), &(g * g));
    }
    let e = eig_hermitian(&gram.hermitian_part()).ok()?;
    let top = e.values.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > 1e-12 * top).collect();
    if keep.len() == b.size() {
        return Some(b);
    }
    let q = ComplexMatrix::from_fn(b.size(), keep.len(), |r, c| e.vectors[(r, keep[c])]);
    let qh = q.adjoint();
    let project = |m: &ComplexMatrix| (&(&qh * m) * &q).hermitian_part();
    Some(Block {
        constant: project(&b.constant),
        generators: b.generators.iter().map(|(l, g)| (*l, project(g))).collect(),
    })
}

/// Finds `z` with every block strictly positive definite, minimizing `s`
/// subject to `F(z) + s·I ≻ 0` until `s` turns negative.
fn phase_one(blocks: &[Block], r: usize, max_iterations: usize, iterations: &mut usize) -> Option<Vec<f64>> {
    let z = vec![0.0; r];
    if blocks.iter().all(|b| cholesky(&b.evaluate(&z)).is_some()) {
        return Some(z);
    }
    let worst = blocks
        .iter()
        .map(|b| {
            eig_hermitian(&b.evaluate(&z))
                .map(|e| e.min())
                .unwrap_or(f64::NEG_INFINITY)
        })
        .fold(f64::INFINITY, f64::min);
    if !worst.is_finite() {
        return None;
    }
    let aug: Vec<Block> = blocks
        .iter()
        .map(|b| {
            let mut generators = b.generators.clone();
            generators.push((r, ComplexMatrix::identity(b.size())));
            Block {
                constant: b.constant.clone(),
                generators,
            }
        })
        .collect();
    let mut c = vec![0.0; r + 1];
    c[r] = -1.0;
    let barrier = Barrier { blocks: &aug, c: &c };
    let mut w = z;
    w.push(1.0 - worst);
    let m = barrier.degree();
    let mut t = 1.0;
    let done = |w: &[f64]| w[r] < 0.0 && blocks.iter().all(|b| cholesky(&b.evaluate(&w[..r])).is_some());
    loop {
        let outcome = barrier.center_until(&mut w, t, max_iterations, iterations, &done);
        if done(&w) {
            w.truncate(r);
            return Some(w);
        }
        if outcome.exhausted || m / t < 1e-10 {
            return None;
        }
        t *= T_GROWTH;
    }
}

struct CenterOutcome {
    decrement: f64,
    exhausted: bool,
}

/// `f_t(z) = −t·cᵀz − Σ_b log det F_b(z)`.
struct Barrier<'a> {
    blocks: &'a [Block],
    c: &'a [f64],
}

struct Factored {
    chol: Vec<ComplexMatrix>,
}

impl Barrier<'_> {
    fn degree(&self) -> f64 {
        self.blocks.iter().map(|b| b.size() as f64).sum()
    }

    fn factor(&self, z: &[f64]) -> Option<Factored> {
        let chol = self
            .blocks
            .iter()
            .map(|b| cholesky(&b.evaluate(z)))
            .collect::<Option<Vec<_>>>()?;
        Some(Factored { chol })
    }

    fn value(&self, z: &[f64], t: f64, f: &Factored) -> f64 {
        let lin: f64 = self.c.iter().zip(z).map(|(c, z)| c * z).sum();
        let logdet: f64 = f
            .chol
            .iter()
            .map(|l| (0..l.rows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum::<f64>())
            .sum();
        -t * lin - logdet
    }

    /// Gradient and Hessian of `f_t`.
    fn derivatives(&self, t: f64, f: &Factored) -> (DVector<f64>, DMatrix<f64>) {
        let r = self.c.len();
        let mut grad = DVector::from_fn(r, |l, _| -t * self.c[l]);
        let mut hess = DMatrix::zeros(r, r);
        for (block, l) in self.blocks.iter().zip(&f.chol) {
            // Ĝ = L⁻¹ G L⁻†.
            let whitened: Vec<(usize, ComplexMatrix)> = block
                .generators
                .iter()
                .map(|(idx, g)| {
                    let w = forward_substitute(l, g);
                    (*idx, forward_substitute(l, &w.adjoint()))
                })
                .collect();
            for (a, (ia, ga)) in whitened.iter().enumerate() {
                grad[*ia] -= ga.trace().re;
                for (ib, gb) in &whitened[a..] {
                    let h = ga.inner(gb).re;
                    hess[(*ia, *ib)] += h;
                    if ia != ib {
                        hess[(*ib, *ia)] += h;
                    }
                }
            }
        }
        (grad, hess)
    }

    fn center(&self, z: &mut Vec<f64>, t: f64, max_iterations: usize, iterations: &mut usize) -> CenterOutcome {
        self.center_until(z, t, max_iterations, iterations, &|_| false)
    }

    /// Damped Newton centering at weight `t`; `stop` is checked after every
    /// step.
    fn center_until(
        &self,
        z: &mut Vec<f64>,
        t: f64,
        max_iterations: usize,
        iterations: &mut usize,
        stop: &dyn Fn(&[f64]) -> bool,
    ) -> CenterOutcome {
        let mut f = self.factor(z).expect("centering starts strictly feasible");
        let mut decrement = f64::INFINITY;
        loop {
            if *iterations >= max_iterations {
                return CenterOutcome {
                    decrement,
                    exhausted: true,
                };
            }
            let (grad, hess) = self.derivatives(t, &f);
            let step = newton_direction(&hess, &grad);
            let lambda_sq = -grad.dot(&step);
            let previous = decrement;
            decrement = lambda_sq.max(0.0).sqrt();
            // Inside the quadratic region a decrement that no longer shrinks
            // is at the rounding floor of the barrier.
            let stalled = decrement < QUADRATIC_REGION && decrement > 0.5 * previous;
            if lambda_sq / 2.0 < CENTERING_TOL || !lambda_sq.is_finite() || stalled {
                return CenterOutcome {
                    decrement,
                    exhausted: false,
                };
            }
            *iterations += 1;
            let Some((trial, ft)) = self.line_search(z, &step, decrement, grad.dot(&step), t, &f) else {
                return CenterOutcome {
                    decrement,
                    exhausted: false,
                };
            };
            *z = trial;
            f = ft;
            if stop(z) {
                return CenterOutcome {
                    decrement,
                    exhausted: false,
                };
            }
        }
    }

    /// Full Newton steps in the quadratic region, damped steps with an
    /// Armijo test outside it; both backtrack until strictly feasible.
    fn line_search(
        &self,
        z: &[f64],
        step: &DVector<f64>,
        decrement: f64,
        slope: f64,
        t: f64,
        f: &Factored,
    ) -> Option<(Vec<f64>, Factored)> {
        let quadratic = decrement < QUADRATIC_REGION;
        let f0 = if quadratic { 0.0 } else { self.value(z, t, f) };
        let mut alpha = if quadratic { 1.0 } else { 1.0 / (1.0 + decrement) };
        for _ in 0..60 {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(z, d)| z + alpha * d).collect();
            if let Some(ft) = self.factor(&trial) {
                if quadratic || self.value(&trial, t, &ft) <= f0 + 0.01 * alpha * slope {
                    return Some((trial, ft));
                }
            }
            alpha *= 0.5;
        }
        None
    }
}

/// Solves `H d = −g` with Jacobi scaling and a regularized fallback.
fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let r = grad.len();
    let scale = DVector::from_fn(r, |i, _| {
        let h = hess[(i, i)];
        if h > 0.0 {
            1.0 / h.sqrt()
        } else {
            1.0
        }
    });
    let scaled = DMatrix::from_fn(r, r, |i, j| hess[(i, j)] * scale[i] * scale[j]);
    let rhs = DVector::from_fn(r, |i, _| -grad[i] * scale[i]);
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut m = scaled.clone();
        for i in 0..r {
            m[(i, i)] += reg;
        }
        if let Some(ch) = m.cholesky() {
            let y = ch.solve(&rhs);
            return y.component_mul(&scale);
        }
        reg = if reg == 0.0 { 1e-14 } else { reg * 100.0 };
    }
    DVector::zeros(r)
}

fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn pairs_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension("ragged matrix in export".into()));
    }
    let data = rows.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    ComplexMatrix::from_vec(n, cols, data)
}

/// JSON problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemExport {
    pub id: String,
    pub labels: Vec<String>,
    pub objective: Vec<f64>,
    pub pencils: Vec<PencilExport>,
    pub equalities: EqualitiesExport,
    pub expected_fidelity: Option<f64>,
    pub meta: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilExport {
    pub name: String,
    /// Rows of `[re, im]` pairs.
    pub constant: Vec<Vec<[f64; 2]>>,
    pub coefficients: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualitiesExport {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl From<Equalities> for EqualitiesExport {
    fn from(e: Equalities) -> Self {
        Self {
            rows: e.rows,
            rhs: e.rhs,
        }
    }
}

impl ProblemExport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
