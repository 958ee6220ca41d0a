//! Fidelity surfaces over uniform grids and their CSV form.

use std::io::Write;

use rayon::prelude::*;

use super::{analytic_fidelity, solve_point_with, Scenario};
use crate::channel::{channel_fidelity, ChoiMatrix};
use crate::error::{Error, Result};
use crate::sdp::SolverOptions;

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "a",
    "c",
    "ppt",
    "fidelity",
    "fidelity_noppt",
    "analytic",
    "gap",
    "identity_optimal",
];

/// Identity is flagged optimal when it comes within this of the optimum.
const IDENTITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub a: f64,
    /// `None` for `Protocol`.
    pub c: Option<f64>,
    /// Optimum with the sweep's PPT setting.
    pub fidelity: f64,
    pub fidelity_noppt: f64,
    pub analytic: Option<f64>,
    pub gap: f64,
    pub identity_optimal: bool,
}

#[derive(Debug, Clone)]
pub struct FidelitySurface {
    pub scenario: Scenario,
    pub ppt: bool,
    pub grid_n: usize,
    /// Row-major in `(a, c)`.
    pub points: Vec<SurfacePoint>,
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn identity_fidelity(scenario: Scenario, a: f64, c: f64) -> Result<f64> {
    let (input, target) = scenario.states(a, c)?;
    Ok(channel_fidelity(&ChoiMatrix::identity_channel(), &input, &target))
}

/// Solves every grid point (concurrently); output order is fixed by the
/// grid index.
pub fn grid_sweep(scenario: Scenario, grid_n: usize, ppt: bool, opts: &SolverOptions) -> Result<FidelitySurface> {
    if grid_n < 2 {
        return Err(Error::InvalidParameter(format!("grid size {grid_n} < 2")));
    }
    let axis = grid(grid_n);
    let pairs: Vec<(f64, Option<f64>)> = if scenario.has_target_parameter() {
        axis.iter()
            .flat_map(|&a| axis.iter().map(move |&c| (a, Some(c))))
            .collect()
    } else {
        axis.iter().map(|&a| (a, None)).collect()
    };
    let points = pairs
        .par_iter()
        .map(|&(a, c)| -> Result<SurfacePoint> {
            let cv = c.unwrap_or(a);
            let free = solve_point_with(scenario, a, cv, false, opts)?;
            let main = if ppt {
                solve_point_with(scenario, a, cv, true, opts)?
            } else {
                free.clone()
            };
            let identity_optimal =
                scenario != Scenario::Protocol && identity_fidelity(scenario, a, cv)? >= main.fidelity - IDENTITY_TOL;
            Ok(SurfacePoint {
                a,
                c,
                fidelity: main.fidelity,
                fidelity_noppt: free.fidelity,
                analytic: analytic_fidelity(scenario, a, cv),
                gap: main.solution.gap,
                identity_optimal,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelitySurface {
        scenario,
        ppt,
        grid_n,
        points,
    })
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros
/// trimmed.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

impl FidelitySurface {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for p in &self.points {
            w.write_record([
                self.scenario.tag().to_string(),
                format_float(p.a),
                p.c.map(format_float).unwrap_or_default(),
                self.ppt.to_string(),
                format_float(p.fidelity),
                format_float(p.fidelity_noppt),
                p.analytic.map(format_float).unwrap_or_default(),
                format_float(p.gap),
                p.identity_optimal.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("ASCII output"))
    }
}

/// Where the identity map is optimal among PPT semicovariant maps,
/// `flags[i][j]` for `a = i/(n−1)`, `c = j/(n−1)`.
#[derive(Debug, Clone)]
pub struct IdentityRegion {
    pub grid_n: usize,
    pub flags: Vec<Vec<bool>>,
}

impl IdentityRegion {
    pub fn axis(&self) -> Vec<f64> {
        grid(self.grid_n)
    }

    pub fn count(&self) -> usize {
        self.flags.iter().flatten().filter(|f| **f).count()
    }

    /// Whether the flagged cells form one 4-connected component.
    pub fn is_connected(&self) -> bool {
        let n = self.grid_n;
        let Some(start) = (0..n * n).find(|&k| self.flags[k / n][k % n]) else {
            return true;
        };
        let mut seen = vec![false; n * n];
        let mut stack = vec![start];
        seen[start] = true;
        let mut reached = 0;
        while let Some(k) = stack.pop() {
            reached += 1;
            let (i, j) = (k / n, k % n);
            let mut visit = |i: usize, j: usize| {
                let idx = i * n + j;
                if self.flags[i][j] && !seen[idx] {
                    seen[idx] = true;
                    stack.push(idx);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < n {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < n {
                visit(i, j + 1);
            }
        }
        reached == self.count()
    }
}

pub fn identity_region(grid_n: usize, opts: &SolverOptions) -> Result<IdentityRegion> {
    if grid_n < 2 {
        return Err(Error::InvalidParameter(format!("grid size {grid_n} < 2")));
    }
    let axis = grid(grid_n);
    let cells: Vec<(f64, f64)> = axis.iter().flat_map(|&a| axis.iter().map(move |&c| (a, c))).collect();
    let flat = cells
        .par_iter()
        .map(|&(a, c)| -> Result<bool> {
            let opt = solve_point_with(Scenario::SemiCov, a, c, true, opts)?;
            Ok(identity_fidelity(Scenario::SemiCov, a, c)? >= opt.fidelity - IDENTITY_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    let flags = flat.chunks(grid_n).map(|r| r.to_vec()).collect();
    Ok(IdentityRegion { grid_n, flags })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.9216), "0.9216");
        assert_eq!(format_float(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_float(0.05), "0.05");
        assert_eq!(format_float(3.2e-8), "3.2e-08");
        assert_eq!(format_float(-1.25e-9), "-1.25e-09");
        assert_eq!(format_float(123456.0), "123456");
        assert_eq!(format_float(1e15), "1e+15");
    }

    #[test]
    fn protocol_sweep_layout() {
        let s = grid_sweep(Scenario::Protocol, 3, true, &SolverOptions::default()).unwrap();
        assert_eq!(s.points.len(), 3);
        assert!(s
            .points
            .iter()
            .all(|p| p.c.is_none() && p.analytic.is_none() && !p.identity_optimal));
        assert!((s.points[0].fidelity - 2.0 / 3.0).abs() < 1e-4);
        let csv = s.to_csv_string().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("protocol,0.5,,true,"));
    }

    #[test]
    fn semicov_sweep_small() {
        let s = grid_sweep(Scenario::SemiCov, 3, true, &SolverOptions::default()).unwrap();
        assert_eq!(s.points.len(), 9);
        let at = |i: usize, j: usize| &s.points[i * 3 + j];
        for p in &s.points {
            assert!(p.fidelity <= p.fidelity_noppt + 1e-9);
            assert!((-1e-9..=1.0 + 1e-8).contains(&p.fidelity));
            if let Some(f) = p.analytic {
                assert!(p.fidelity >= f - 1e-7);
            }
        }
        for i in 0..3 {
            assert!(at(i, i).identity_optimal);
            assert!((at(i, i).fidelity - 1.0).abs() < 1e-6);
        }
        // X⊗X conjugation sends (a, c) to (√(1−a²), √(1−c²)).
        assert!((at(0, 2).fidelity - at(2, 0).fidelity).abs() < 1e-6);
        assert!((at(0, 2).fidelity - 2.0 / 3.0).abs() < 1e-6);
        assert!(!at(0, 2).identity_optimal);
    }

    #[test]
    fn product_witness_at_orthogonal_corner() {
        // a = 0, c = 1: |11⟩ in, |00⟩ wanted. X on the first qubit and the
        // optimal universal NOT on the second is semicovariant and PPT.
        use crate::channel::{check_ppt, check_tp, choi_from_kraus, KrausSet};
        use crate::linalg::{kron, pauli_x, pauli_y, pauli_z};
        let x = pauli_x();
        let ops = [pauli_x(), pauli_y(), pauli_z()]
            .iter()
            .map(|p| kron(&x, p).scale_real(1.0 / 3f64.sqrt()))
            .collect();
        let choi = choi_from_kraus(&KrausSet::new(ops).unwrap());
        assert!(check_tp(&choi) < 1e-12);
        assert!(check_ppt(&choi) > -1e-12);
        assert!(crate::irreps::covariance_residual(choi.matrix(), Scenario::SemiCov, 8, 5) < 1e-12);
        let (i, t) = Scenario::SemiCov.states(0.0, 1.0).unwrap();
        assert!((channel_fidelity(&choi, &i, &t) - 2.0 / 3.0).abs() < 1e-12);
        assert!(identity_fidelity(Scenario::SemiCov, 0.0, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(grid_sweep(Scenario::SemiCov, 1, true, &SolverOptions::default()).is_err());
        assert!(identity_region(1, &SolverOptions::default()).is_err());
    }

    #[test]
    fn connectivity() {
        let r = IdentityRegion {
            grid_n: 3,
            flags: vec![
                vec![true, true, false],
                vec![false, false, false],
                vec![false, false, true],
            ],
        };
        assert_eq!(r.count(), 3);
        assert!(!r.is_connected());
        let r = IdentityRegion {
            grid_n: 2,
            flags: vec![vec![true, true], vec![false, true]],
        };
        assert!(r.is_connected());
    }
}
