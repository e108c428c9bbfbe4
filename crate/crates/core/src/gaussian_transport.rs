//! Continuous-variable transport of Gaussian states.
//!
//! Quadratures are `Q = (a + a^dagger)/sqrt(2)` and
//! `P = (a - a^dagger)/(i sqrt(2))`, ordered `(Q_1, P_1, ..., Q_N, P_N)`, so the
//! vacuum covariance matrix is `I/2`. A passive network `a -> U a` acts on
//! the quadrature vector as the real orthogonal symplectic matrix
//! `[[Re U, -Im U], [Im U, Re U]]` (interleaved per mode pair).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PstError, Result};
use crate::propagation::Propagator;

pub const VACUUM_VARIANCE: f64 = 0.5;
const UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    Q,
    P,
}

/// Two-mode squeezing `xi = w e^{i theta}` on a pair of modes (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmsvParams {
    pub w: f64,
    pub theta: f64,
    pub mode_pair: (usize, usize),
}

impl TmsvParams {
    pub fn new(w: f64, theta: f64, mode_pair: (usize, usize)) -> Result<Self> {
        if !(w.is_finite() && w >= 0.0) {
            return Err(invalid(format!("squeezing strength must be >= 0, got {w}")));
        }
        if !theta.is_finite() {
            return Err(invalid("squeezing phase must be finite"));
        }
        if mode_pair.0 == mode_pair.1 {
            return Err(invalid(format!(
                "two-mode squeezing needs distinct modes, got {:?}",
                mode_pair
            )));
        }
        Ok(Self {
            w,
            theta,
            mode_pair,
        })
    }
}

/// Symmetrized covariance matrix `V_ab = <{d xi_a, d xi_b}>/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    matrix: DMatrix<f64>,
}

impl CovarianceState {
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) * VACUUM_VARIANCE,
        }
    }

    /// Wraps a matrix after checking shape, symmetry and physicality.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(PstError::DimensionMismatch {
                expected: dim,
                found: matrix.ncols(),
            });
        }
        if dim % 2 != 0 || dim == 0 {
            return Err(invalid(format!("covariance dimension must be even, got {dim}")));
        }
        let state = Self { matrix };
        if state.asymmetry() > 1e-12 {
            return Err(PstError::InconsistentInput("covariance matrix is not symmetric".into()));
        }
        let nu = state.min_symplectic_eigenvalue();
        if nu < VACUUM_VARIANCE - 1e-9 {
            return Err(PstError::InconsistentInput(format!(
                "unphysical covariance: min symplectic eigenvalue {nu} < 1/2"
            )));
        }
        Ok(state)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn variance(&self, mode: usize, quadrature: Quadrature) -> f64 {
        let i = index(mode, quadrature);
        self.matrix[(i, i)]
    }

    /// `det(2V)`, equal to 1 for pure states.
    pub fn purity_determinant(&self) -> f64 {
        (&self.matrix * 2.0).determinant()
    }

    /// Smallest symplectic eigenvalue: the eigenvalues of
    /// `K K^T` with `K = V^{1/2} Omega V^{1/2}` are the squared symplectic
    /// eigenvalues, each twice.
    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        let eig = self.matrix.clone().symmetric_eigen();
        if eig.eigenvalues.min() <= 0.0 {
            return 0.0;
        }
        let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
        let k = &root * symplectic_form(self.n_modes()) * &root;
        let squared = (&k * k.transpose()).symmetric_eigen().eigenvalues;
        squared.min().max(0.0).sqrt()
    }

    /// `V + (i/2) Omega >= 0`, tested through the symplectic spectrum.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.min_symplectic_eigenvalue() >= VACUUM_VARIANCE - tol
    }
}

fn index(mode: usize, quadrature: Quadrature) -> usize {
    match quadrature {
        Quadrature::Q => 2 * mode,
        Quadrature::P => 2 * mode + 1,
    }
}

/// `Omega = diag([[0, 1], [-1, 0]], ...)` in interleaved ordering.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for j in 0..n_modes {
        omega[(2 * j, 2 * j + 1)] = 1.0;
        omega[(2 * j + 1, 2 * j)] = -1.0;
    }
    omega
}

/// TMSV on `params.mode_pair`, vacuum elsewhere.
///
/// Each squeezed mode has variance `cosh(2w)/2` in both quadratures; the
/// cross block is `sinh(2w)/2 * [[cos t, sin t], [sin t, -cos t]]`.
pub fn tmsv_covariance(params: &TmsvParams, n_modes: usize) -> Result<CovarianceState> {
    let (m, n) = params.mode_pair;
    if m >= n_modes || n >= n_modes {
        return Err(invalid(format!(
            "mode pair {:?} out of range for N = {n_modes}",
            params.mode_pair
        )));
    }
    let mut v = CovarianceState::vacuum(n_modes).matrix;
    let diag = (2.0 * params.w).cosh() / 2.0;
    let cross = (2.0 * params.w).sinh() / 2.0;
    let (c, s) = (params.theta.cos(), params.theta.sin());
    for mode in [m, n] {
        v[(2 * mode, 2 * mode)] = diag;
        v[(2 * mode + 1, 2 * mode + 1)] = diag;
    }
    let block = [[cross * c, cross * s], [cross * s, -cross * c]];
    for (a, row) in block.iter().enumerate() {
        for (b, &val) in row.iter().enumerate() {
            v[(2 * m + a, 2 * n + b)] = val;
            v[(2 * n + b, 2 * m + a)] = val;
        }
    }
    Ok(CovarianceState { matrix: v })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticEvolution {
    matrix: DMatrix<f64>,
    z: f64,
}

impl SymplecticEvolution {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// `max |M Omega M^T - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.matrix.nrows() / 2);
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }
}

/// Quadrature image of a passive unitary: `Q' = Re(U) Q - Im(U) P`,
/// `P' = Im(U) Q + Re(U) P`.
pub fn symplectic_from_propagator(u: &Propagator) -> Result<SymplecticEvolution> {
    let defect = u.unitarity_defect();
    if defect > UNITARITY_TOL {
        return Err(PstError::InconsistentInput(format!(
            "propagator is not unitary (defect {defect:e})"
        )));
    }
    let n = u.n_modes();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for l in 0..n {
            let a = u.amplitude(j, l);
            m[(2 * j, 2 * l)] = a.re;
            m[(2 * j, 2 * l + 1)] = -a.im;
            m[(2 * j + 1, 2 * l)] = a.im;
            m[(2 * j + 1, 2 * l + 1)] = a.re;
        }
    }
    Ok(SymplecticEvolution { matrix: m, z: u.z() })
}

/// `V_f = M V_i M^T`.
pub fn evolve_covariance(state: &CovarianceState, evolution: &SymplecticEvolution) -> Result<CovarianceState> {
    let dim = state.matrix.nrows();
    if evolution.matrix.nrows() != dim {
        return Err(PstError::DimensionMismatch {
            expected: dim,
            found: evolution.matrix.nrows(),
        });
    }
    let v = &evolution.matrix * &state.matrix * evolution.matrix.transpose();
    // restore exact symmetry lost to rounding
    let v = (&v + v.transpose()) * 0.5;
    Ok(CovarianceState { matrix: v })
}

/// EPR-quadrature variance minus the vacuum level: relative position
/// `(Q_j - Q_k)/sqrt(2)` for `Q`, total momentum `(P_j + P_k)/sqrt(2)` for `P`.
/// Negative values indicate squeezing.
pub fn squeezing_factor(state: &CovarianceState, j: usize, k: usize, quadrature: Quadrature) -> Result<f64> {
    if j == k {
        return Err(invalid(format!("squeezing factor needs distinct modes, got ({j}, {k})")));
    }
    let n = state.n_modes();
    if j >= n || k >= n {
        return Err(invalid(format!("modes ({j}, {k}) out of range for N = {n}")));
    }
    let (a, b) = (index(j, quadrature), index(k, quadrature));
    let v = &state.matrix;
    let sign = match quadrature {
        Quadrature::Q => -1.0,
        Quadrature::P => 1.0,
    };
    let variance = 0.5 * (v[(a, a)] + v[(b, b)] + 2.0 * sign * v[(a, b)]);
    Ok(variance - VACUUM_VARIANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::NetworkSpec;
    use crate::propagation::propagator;
    use nalgebra::DVector;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_2;

    const W_FIG: f64 = 0.881374;

    fn collapse8() -> NetworkSpec {
        NetworkSpec::collapse(8, 1.0).unwrap()
    }

    /// Variance of `c . xi` for a real coefficient vector `c`.
    fn combo_variance(state: &CovarianceState, coeffs: &[(usize, f64)]) -> f64 {
        let mut c = DVector::zeros(state.matrix().nrows());
        for &(i, x) in coeffs {
            c[i] = x;
        }
        (c.transpose() * state.matrix() * &c)[(0, 0)]
    }

    #[test]
    fn vacuum_at_zero_squeezing() {
        let v = tmsv_covariance(&TmsvParams::new(0.0, 0.0, (0, 1)).unwrap(), 4).unwrap();
        assert_eq!(v, CovarianceState::vacuum(4));
    }

    #[test]
    fn epr_variances_match_analytic_oracle() {
        let state = tmsv_covariance(&TmsvParams::new(W_FIG, 0.0, (0, 1)).unwrap(), 8).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rel_q = combo_variance(&state, &[(0, h), (2, -h)]);
        let tot_p = combo_variance(&state, &[(1, h), (3, h)]);
        let tot_q = combo_variance(&state, &[(0, h), (2, h)]);
        let squeezed = (-2.0 * W_FIG).exp() / 2.0;
        assert!((rel_q - squeezed).abs() < 1e-12);
        assert!((rel_q - 0.0858).abs() < 1e-4);
        assert!((tot_p - squeezed).abs() < 1e-12);
        assert!((tot_q - (2.0 * W_FIG).exp() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_squeezing_follows_phase() {
        // with phase theta the squeezed combinations rotate by theta/2 in each mode
        let theta = 0.9;
        let state = tmsv_covariance(&TmsvParams::new(0.6, theta, (1, 3)).unwrap(), 4).unwrap();
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // X_theta = (Q_m cos + P_m sin - Q_n cos - P_n sin)/sqrt(2)
        let v = combo_variance(&state, &[(2, h * c), (3, h * s), (6, -h * c), (7, -h * s)]);
        assert!((v - (-1.2f64).exp() / 2.0).abs() < 1e-12);
        assert!(state.is_physical(1e-9));
        assert!((state.purity_determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tmsv_validation() {
        assert!(TmsvParams::new(-0.1, 0.0, (0, 1)).is_err());
        assert!(TmsvParams::new(0.5, 0.0, (2, 2)).is_err());
        let p = TmsvParams::new(0.5, 0.0, (0, 5)).unwrap();
        assert!(tmsv_covariance(&p, 4).is_err());
    }

    #[test]
    fn symplectic_images_of_simple_unitaries() {
        let id = Propagator::from_matrix(DMatrix::identity(3, 3), 0.0).unwrap();
        let m = symplectic_from_propagator(&id).unwrap();
        assert_eq!(m.matrix(), &DMatrix::<f64>::identity(6, 6));

        let neg = Propagator::from_matrix(-DMatrix::<Complex64>::identity(3, 3), 0.0).unwrap();
        let m = symplectic_from_propagator(&neg).unwrap();
        assert_eq!(m.matrix(), &(-DMatrix::<f64>::identity(6, 6)));
        assert!(m.symplectic_defect() < 1e-15);

        let bad = Propagator::from_matrix(DMatrix::identity(2, 2) * Complex64::new(1.1, 0.0), 0.0).unwrap();
        assert!(matches!(symplectic_from_propagator(&bad), Err(PstError::InconsistentInput(_))));
    }

    #[test]
    fn pst_symplectic_is_negative_antipodal_swap() {
        let u = propagator(&collapse8(), FRAC_PI_2).unwrap();
        let m = symplectic_from_propagator(&u).unwrap();
        for row in 0..16 {
            for col in 0..16 {
                let (j, l) = (row / 2, col / 2);
                let expected = if (j + 8 - l) % 8 == 4 && row % 2 == col % 2 { -1.0 } else { 0.0 };
                assert!((m.matrix()[(row, col)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn evolution_examples() {
        let state = tmsv_covariance(&TmsvParams::new(W_FIG, 0.0, (0, 1)).unwrap(), 8).unwrap();
        let id = symplectic_from_propagator(&propagator(&collapse8(), 0.0).unwrap()).unwrap();
        let same = evolve_covariance(&state, &id).unwrap();
        assert!((same.matrix() - state.matrix()).amax() < 1e-15);

        let m = symplectic_from_propagator(&propagator(&collapse8(), 1.234).unwrap()).unwrap();
        let vac = evolve_covariance(&CovarianceState::vacuum(8), &m).unwrap();
        assert!((vac.matrix() - CovarianceState::vacuum(8).matrix()).amax() < 1e-12);

        let m = symplectic_from_propagator(&propagator(&collapse8(), FRAC_PI_2).unwrap()).unwrap();
        let out = evolve_covariance(&state, &m).unwrap();
        // TMSV block moves from modes (0,1) to (4,5)
        for (a, b) in [(0, 8), (1, 9), (2, 10), (3, 11)] {
            for (c, d) in [(0, 8), (1, 9), (2, 10), (3, 11)] {
                assert!((out.matrix()[(b, d)] - state.matrix()[(a, c)]).abs() < 1e-12);
            }
        }
        for i in 0..4 {
            assert!((out.matrix()[(i, i)] - 0.5).abs() < 1e-12);
        }

        assert!(matches!(
            evolve_covariance(&CovarianceState::vacuum(3), &m),
            Err(PstError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn squeezing_factor_examples() {
        let vac = CovarianceState::vacuum(4);
        for q in [Quadrature::Q, Quadrature::P] {
            assert_eq!(squeezing_factor(&vac, 0, 3, q).unwrap(), 0.0);
        }
        let state = tmsv_covariance(&TmsvParams::new(W_FIG, 0.0, (0, 1)).unwrap(), 8).unwrap();
        let s = squeezing_factor(&state, 0, 1, Quadrature::Q).unwrap();
        assert!((s - ((-2.0 * W_FIG).exp() - 1.0) / 2.0).abs() < 1e-12);
        assert!((s + 0.4142).abs() < 1e-4);

        let m = symplectic_from_propagator(&propagator(&collapse8(), FRAC_PI_2).unwrap()).unwrap();
        let out = evolve_covariance(&state, &m).unwrap();
        assert!((squeezing_factor(&out, 4, 5, Quadrature::Q).unwrap() - s).abs() < 1e-8);
        assert!(squeezing_factor(&out, 0, 1, Quadrature::Q).unwrap().abs() < 1e-8);

        assert!(squeezing_factor(&state, 2, 2, Quadrature::P).is_err());
        assert!(squeezing_factor(&state, 2, 9, Quadrature::P).is_err());
    }

    #[test]
    fn input_epr_closed_form() {
        for w in [0.25, 0.5, W_FIG] {
            let state = tmsv_covariance(&TmsvParams::new(w, 0.0, (0, 1)).unwrap(), 8).unwrap();
            let expected = ((-2.0 * w).exp() - 1.0) / 2.0;
            for q in [Quadrature::Q, Quadrature::P] {
                assert!((squeezing_factor(&state, 0, 1, q).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn physicality_checks() {
        let vac = CovarianceState::vacuum(3);
        assert!((vac.min_symplectic_eigenvalue() - 0.5).abs() < 1e-12);
        let thermal = CovarianceState::from_matrix(DMatrix::identity(4, 4) * 1.5).unwrap();
        assert!((thermal.min_symplectic_eigenvalue() - 1.5).abs() < 1e-12);
        let sub = DMatrix::identity(4, 4) * 0.3;
        assert!(matches!(CovarianceState::from_matrix(sub), Err(PstError::InconsistentInput(_))));
        let mut asym = DMatrix::identity(2, 2) * 0.5;
        asym[(0, 1)] = 0.1;
        assert!(CovarianceState::from_matrix(asym).is_err());
        // squeezed single mode: Var(Q) Var(P) = 1/4 is still physical
        let sq = DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 2.5]));
        assert!(CovarianceState::from_matrix(sq).is_ok());
    }

    #[test]
    fn squeezing_conserved_at_pst_for_4n() {
        for n in [4, 8, 12, 16] {
            let spec = NetworkSpec::collapse(n, 1.0).unwrap();
            let state = tmsv_covariance(&TmsvParams::new(0.7, 0.0, (0, 1)).unwrap(), n).unwrap();
            let m = symplectic_from_propagator(&propagator(&spec, FRAC_PI_2).unwrap()).unwrap();
            let out = evolve_covariance(&state, &m).unwrap();
            for q in [Quadrature::Q, Quadrature::P] {
                let before = squeezing_factor(&state, 0, 1, q).unwrap();
                let after = squeezing_factor(&out, n / 2, n / 2 + 1, q).unwrap();
                assert!((before - after).abs() < 1e-8);
            }
        }
    }
}
