//! Synthesis of the PST coupling profile from far-detuned auxiliary modes.
//!
//! After adiabatic elimination, `M` symmetric pairs of auxiliary modes with
//! weights `A_k = 2|g_k|^2 / Delta_k` produce the effective coupling
//! `J_r = sum_k A_k cos(2 pi k r / N)`. The PST profile requires `J_r = C` for
//! `r < N/2` and `J_{N/2} = 0`; the on-site term `J_0` is left free.
//!
//! The plus sign convention is used for `J_r`. Flipping the sign of every
//! `J_r` reverses the spectrum and leaves transfer probabilities unchanged.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PstError, Result};
use crate::lattice::{CouplingProfile, NetworkSpec};
use crate::propagation::{check_pst, PstReport};
use crate::spectral::cos_2pi_frac;

/// Singular values below this fraction of the largest are treated as zero.
const RANK_RTOL: f64 = 1e-12;
pub const DEFAULT_CONSTRAINT_TOL: f64 = 1e-9;
const VERIFY_PST_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisProblem {
    pub n_modes: usize,
    pub aux_pairs: usize,
    pub strength: f64,
    pub tolerance: f64,
}

impl SynthesisProblem {
    pub fn new(n_modes: usize, aux_pairs: usize, strength: f64, tolerance: f64) -> Result<Self> {
        if n_modes < 4 || n_modes % 2 != 0 {
            return Err(invalid(format!("synthesis needs even N >= 4, got {n_modes}")));
        }
        if aux_pairs == 0 {
            return Err(invalid("need at least one auxiliary mode pair"));
        }
        if !strength.is_finite() {
            return Err(invalid("target coupling must be finite"));
        }
        if !(tolerance > 0.0) {
            return Err(invalid(format!("constraint tolerance must be positive, got {tolerance}")));
        }
        Ok(Self {
            n_modes,
            aux_pairs,
            strength,
            tolerance,
        })
    }

    /// `M >= N/2` leaves the constraint system at least square.
    pub fn expects_exact_solution(&self) -> bool {
        self.aux_pairs >= self.n_modes / 2
    }

    /// Rows `r = 1..N/2-1` hold `cos(2 pi k r / N)`; the last row holds `(-1)^k`.
    fn constraint_matrix(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        DMatrix::from_fn(n / 2, self.aux_pairs, |row, col| {
            let (r, k) = (row + 1, col + 1);
            cos_2pi_frac(k * r, n)
        })
    }

    fn target(&self) -> DVector<f64> {
        let half = self.n_modes / 2;
        DVector::from_fn(half, |row, _| if row + 1 < half { self.strength } else { 0.0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryMode {
    pub g: f64,
    pub delta: f64,
    /// `|Delta_k| / g_k`; absent when `g_k = 0`.
    pub dispersive_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParameters {
    pub delta_scale: f64,
    pub modes: Vec<AuxiliaryMode>,
    pub min_dispersive_ratio: Option<f64>,
    pub dispersive_min: f64,
    /// `false` when some coupled mode has `|Delta_k| / g_k < dispersive_min`.
    pub dispersive_regime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSolution {
    pub problem: SynthesisProblem,
    /// Weights `A_k`, `k = 1..M`.
    pub weights: Vec<f64>,
    /// Effective couplings `J_r`, `r = 1..N/2`.
    pub couplings: Vec<f64>,
    /// Max-norm residual of the constraint system.
    pub residual: f64,
    pub feasible: bool,
    pub physical: Option<PhysicalParameters>,
}

/// Minimum-norm least-squares solution of the constraint system via SVD.
///
/// Square systems are solved exactly, underdetermined ones return the
/// minimum-norm weights, and overdetermined ones report their residual.
pub fn solve_weights(problem: &SynthesisProblem) -> Result<SynthesisSolution> {
    let a = problem.constraint_matrix();
    let b = problem.target();
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = (RANK_RTOL * sigma_max).max(f64::MIN_POSITIVE);
    let x = svd
        .solve(&b, eps)
        .map_err(|e| PstError::InconsistentInput(format!("SVD solve failed: {e}")))?;
    let residual = (&a * &x - &b).amax();
    let weights: Vec<f64> = x.iter().copied().collect();
    let couplings = effective_couplings(&weights, problem.n_modes)?;
    Ok(SynthesisSolution {
        problem: *problem,
        weights,
        couplings,
        residual,
        feasible: residual <= problem.tolerance,
        physical: None,
    })
}

/// `J_r = sum_k A_k cos(2 pi k r / N)` for `r = 1..N/2`.
pub fn effective_couplings(weights: &[f64], n_modes: usize) -> Result<Vec<f64>> {
    if n_modes < 2 || n_modes % 2 != 0 {
        return Err(invalid(format!("effective couplings need even N, got {n_modes}")));
    }
    Ok((1..=n_modes / 2)
        .map(|r| {
            weights
                .iter()
                .enumerate()
                .map(|(idx, &a)| a * cos_2pi_frac((idx + 1) * r, n_modes))
                .sum()
        })
        .collect())
}

/// Splits each weight into `(g_k, Delta_k)` with a common detuning magnitude:
/// `Delta_k = sign(A_k) delta_scale`, `g_k = sqrt(|A_k| delta_scale / 2)`.
pub fn physical_parameters(
    solution: &SynthesisSolution,
    delta_scale: f64,
    dispersive_min: f64,
) -> Result<SynthesisSolution> {
    if !(delta_scale.is_finite() && delta_scale > 0.0) {
        return Err(invalid(format!("delta scale must be positive, got {delta_scale}")));
    }
    if !(dispersive_min > 0.0) {
        return Err(invalid(format!("dispersive minimum must be positive, got {dispersive_min}")));
    }
    let modes: Vec<AuxiliaryMode> = solution
        .weights
        .iter()
        .map(|&a| {
            let delta = if a < 0.0 { -delta_scale } else { delta_scale };
            let g = (a.abs() * delta_scale / 2.0).sqrt();
            AuxiliaryMode {
                g,
                delta,
                dispersive_ratio: (g > 0.0).then(|| delta.abs() / g),
            }
        })
        .collect();
    let min_dispersive_ratio = modes
        .iter()
        .filter_map(|m| m.dispersive_ratio)
        .min_by(f64::total_cmp);
    let dispersive_regime = min_dispersive_ratio.map_or(true, |r| r >= dispersive_min);
    let mut out = solution.clone();
    out.physical = Some(PhysicalParameters {
        delta_scale,
        modes,
        min_dispersive_ratio,
        dispersive_min,
        dispersive_regime,
    });
    Ok(out)
}

/// Builds the synthesized profile `C_r = J_r` and runs the PST check from
/// mode 0.
pub fn verify_synthesis(solution: &SynthesisSolution, n_modes: usize) -> Result<PstReport> {
    if solution.residual > solution.problem.tolerance {
        return Err(PstError::ResidualTooLarge {
            residual: solution.residual,
            tolerance: solution.problem.tolerance,
            detail: format!(
                "{} auxiliary pairs cannot meet {} constraints for N = {}",
                solution.problem.aux_pairs,
                solution.problem.n_modes / 2,
                solution.problem.n_modes
            ),
        });
    }
    if n_modes != solution.problem.n_modes {
        return Err(PstError::DimensionMismatch {
            expected: solution.problem.n_modes,
            found: n_modes,
        });
    }
    let profile = CouplingProfile::custom(solution.couplings.clone())?;
    check_pst(&NetworkSpec::new(n_modes, profile)?, 0, VERIFY_PST_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn solve(n: usize, m: usize, c: f64) -> SynthesisSolution {
        solve_weights(&SynthesisProblem::new(n, m, c, DEFAULT_CONSTRAINT_TOL).unwrap()).unwrap()
    }

    #[test]
    fn hand_solved_n4() {
        let s = solve(4, 2, 1.0);
        assert!((s.weights[0] + 1.0).abs() < 1e-12);
        assert!((s.weights[1] + 1.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
        assert!((s.couplings[0] - 1.0).abs() < 1e-12 && s.couplings[1].abs() < 1e-12);
    }

    #[test]
    fn n8_square_system() {
        let s = solve(8, 4, 1.0);
        assert!(s.residual < 1e-10);
        assert!(s.feasible);
        for (got, want) in s.couplings.iter().zip([1.0, 1.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_target_gives_zero_weights() {
        for (n, m) in [(8, 4), (8, 7), (12, 3)] {
            let s = solve(n, m, 0.0);
            assert!(s.weights.iter().all(|a| a.abs() < 1e-15));
        }
    }

    #[test]
    fn underdetermined_is_minimum_norm() {
        let s = solve(8, 6, 1.0);
        assert!(s.residual < 1e-10);
        // any null-space direction added to the solution increases its norm
        let problem = SynthesisProblem::new(8, 6, 1.0, 1e-9).unwrap();
        let a = problem.constraint_matrix();
        let x = DVector::from_vec(s.weights.clone());
        let gram = a.transpose() * &a;
        let eig = gram.symmetric_eigen();
        let (idx, _) = eig.eigenvalues.argmin();
        let null = eig.eigenvectors.column(idx).into_owned();
        assert!((&a * &null).amax() < 1e-10);
        assert!((&x + &null * 0.1).norm() > x.norm());
        assert!(x.dot(&null).abs() < 1e-10);
    }

    #[test]
    fn overdetermined_reports_residual() {
        let s = solve(8, 2, 1.0);
        assert!(!s.feasible);
        assert!(s.residual > DEFAULT_CONSTRAINT_TOL);
        assert!(matches!(verify_synthesis(&s, 8), Err(PstError::ResidualTooLarge { .. })));
    }

    #[test]
    fn single_term_synthesis() {
        let j = effective_couplings(&[1.0], 8).unwrap();
        for (r, v) in j.iter().enumerate() {
            assert!((v - (2.0 * std::f64::consts::PI * (r + 1) as f64 / 8.0).cos()).abs() < 1e-15);
        }
        assert_eq!(effective_couplings(&[0.0; 3], 8).unwrap(), vec![0.0; 4]);
        assert!(effective_couplings(&[1.0], 7).is_err());
    }

    #[test]
    fn physical_splitting() {
        let mut s = solve(4, 2, 1.0);
        s.weights = vec![0.0, 2.0];
        let p = physical_parameters(&s, 100.0, 5.0).unwrap().physical.unwrap();
        assert_eq!(p.modes[0].g, 0.0);
        assert_eq!(p.modes[0].dispersive_ratio, None);
        assert!((p.modes[1].g - 10.0).abs() < 1e-12);
        assert!((p.modes[1].dispersive_ratio.unwrap() - 10.0).abs() < 1e-12);
        assert!(p.dispersive_regime);
        let p = physical_parameters(&s, 100.0, 20.0).unwrap().physical.unwrap();
        assert!(!p.dispersive_regime);
        assert!(physical_parameters(&s, 0.0, 1.0).is_err());
    }

    #[test]
    fn physical_signs_follow_weights() {
        let s = physical_parameters(&solve(8, 4, 1.0), 200.0, 10.0).unwrap();
        let p = s.physical.as_ref().unwrap();
        assert!(p.dispersive_regime);
        assert!(p.min_dispersive_ratio.unwrap() >= 10.0);
        for (a, m) in s.weights.iter().zip(&p.modes) {
            if a.abs() > 0.0 {
                assert_eq!(a.signum(), m.delta.signum());
                assert!((2.0 * m.g * m.g / m.delta - a).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn verified_pipelines() {
        let r = verify_synthesis(&solve(8, 4, 1.0), 8).unwrap();
        assert!(r.is_pst);
        assert!((r.z_pst.unwrap() - FRAC_PI_2).abs() < 1e-12);
        let r = verify_synthesis(&solve(12, 6, 1.0), 12).unwrap();
        assert!(r.is_pst);
        assert_eq!(r.target, 6);
        assert!(verify_synthesis(&solve(12, 6, 1.0), 8).is_err());
    }

    #[test]
    fn exact_for_square_systems() {
        for n in [4, 8, 12, 16] {
            let s = solve(n, n / 2, 1.0);
            let half = n / 2;
            for r in 0..half - 1 {
                assert!((s.couplings[r] - 1.0).abs() < 1e-10, "n={n} r={r}");
            }
            assert!(s.couplings[half - 1].abs() < 1e-10);
        }
    }

    #[test]
    fn linear_in_target() {
        for (n, m) in [(8, 4), (12, 6), (12, 9), (16, 5)] {
            let one = solve(n, m, 1.0);
            let two = solve(n, m, 2.0);
            for (a, b) in one.weights.iter().zip(&two.weights) {
                assert!((2.0 * a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn problem_validation() {
        assert!(SynthesisProblem::new(7, 4, 1.0, 1e-9).is_err());
        assert!(SynthesisProblem::new(2, 1, 1.0, 1e-9).is_err());
        assert!(SynthesisProblem::new(8, 0, 1.0, 1e-9).is_err());
        assert!(SynthesisProblem::new(8, 4, 1.0, 0.0).is_err());
        assert!(SynthesisProblem::new(8, 4, 1.0, 1e-9).unwrap().expects_exact_solution());
        assert!(!SynthesisProblem::new(8, 3, 1.0, 1e-9).unwrap().expects_exact_solution());
    }
}
