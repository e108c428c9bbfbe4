//! Fourier-mode spectra of circulant networks.
//!
//! A circulant coupling matrix is diagonalized by the discrete Fourier matrix
//! `S_{j,p} = exp(i 2 pi j p / N) / sqrt(N)`, with eigenvalue
//! `lambda_p = 2 sum_r C_r cos(2 pi p r / N)` on Fourier mode `p`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::NetworkSpec;

/// Eigenvalues indexed by Fourier index `p = 0..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    n_modes: usize,
}

impl Spectrum {
    pub(crate) fn from_values(eigenvalues: Vec<f64>) -> Self {
        let n_modes = eigenvalues.len();
        Self {
            eigenvalues,
            n_modes,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Ascending copy of the eigenvalues.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }

    /// Number of eigenvalues with `|lambda| <= tol`.
    pub fn zero_mode_count(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|l| l.abs() <= tol).count()
    }

    /// Default binning tolerance `1e-9 * max(1, max |lambda|)`.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * self.max_abs().max(1.0)
    }
}

/// Direct cosine-sum evaluation of every Fourier eigenvalue.
pub fn dispersion(spec: &NetworkSpec) -> Spectrum {
    let n = spec.n_modes();
    let couplings = spec.profile().couplings();
    let eigenvalues = (0..n)
        .map(|p| {
            couplings
                .iter()
                .enumerate()
                .map(|(idx, &c)| {
                    let r = idx + 1;
                    spec.pair_weight(r) * c * cos_2pi_frac(p * r, n)
                })
                .sum()
        })
        .collect();
    Spectrum::from_values(eigenvalues)
}

/// `cos(2 pi k / n)` with the argument reduced mod `n` before scaling, so
/// large `k` does not lose precision.
pub(crate) fn cos_2pi_frac(k: usize, n: usize) -> f64 {
    (2.0 * PI * ((k % n) as f64) / n as f64).cos()
}

pub(crate) fn sin_2pi_frac(k: usize, n: usize) -> f64 {
    (2.0 * PI * ((k % n) as f64) / n as f64).sin()
}

fn require_even(n: usize, what: &str) -> Result<()> {
    if n % 2 != 0 {
        return Err(invalid(format!("{what} needs even N, got {n}")));
    }
    Ok(())
}

/// Collapsed spectrum of the uniform `R = N/2 - 1` profile:
/// `lambda_0 = C(N-2)`, `0` for odd `p`, `-2C` for even `p != 0`.
pub fn collapsed_spectrum(n: usize, strength: f64) -> Result<Spectrum> {
    require_even(n, "collapsed spectrum")?;
    if n < 4 {
        return Err(invalid(format!("collapsed spectrum needs N >= 4, got {n}")));
    }
    if !(strength > 0.0) {
        return Err(invalid(format!("coupling must be positive, got {strength}")));
    }
    let values = (0..n)
        .map(|p| match p {
            0 => strength * (n as f64 - 2.0),
            p if p % 2 == 1 => 0.0,
            _ => -2.0 * strength,
        })
        .collect();
    Ok(Spectrum::from_values(values))
}

/// Spectrum with opposite-site coupling included (`R = N/2`):
/// `lambda_0 = C(N-1)`, every other mode at `-C`.
pub fn opposite_site_spectrum(n: usize, strength: f64) -> Result<Spectrum> {
    require_even(n, "opposite-site spectrum")?;
    if !(strength > 0.0) {
        return Err(invalid(format!("coupling must be positive, got {strength}")));
    }
    let values = (0..n)
        .map(|p| {
            if p == 0 {
                strength * (n as f64 - 1.0)
            } else {
                -strength
            }
        })
        .collect();
    Ok(Spectrum::from_values(values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// Mean of the eigenvalues merged into this bin.
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyHistogram {
    pub bins: Vec<Bin>,
    pub tolerance: f64,
}

impl DegeneracyHistogram {
    pub fn counts(&self) -> Vec<usize> {
        self.bins.iter().map(|b| b.multiplicity).collect()
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.multiplicity).sum()
    }
}

/// Single-linkage clustering of the sorted eigenvalues: neighbours closer than
/// `tol` share a bin. Bins are ordered by ascending value.
pub fn degeneracy_histogram(spectrum: &Spectrum, tol: f64) -> Result<DegeneracyHistogram> {
    if !(tol > 0.0) {
        return Err(invalid(format!("binning tolerance must be positive, got {tol}")));
    }
    let sorted = spectrum.sorted();
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for value in sorted {
        match clusters.last_mut() {
            Some(cluster) if value - cluster[cluster.len() - 1] <= tol => cluster.push(value),
            _ => clusters.push(vec![value]),
        }
    }
    let bins = clusters
        .into_iter()
        .map(|c| Bin {
            value: c.iter().sum::<f64>() / c.len() as f64,
            multiplicity: c.len(),
        })
        .collect();
    Ok(DegeneracyHistogram {
        bins,
        tolerance: tol,
    })
}

/// Unitary symmetric DFT matrix `S_{j,p} = exp(i 2 pi j p / N) / sqrt(N)`.
pub fn fourier_matrix(n: usize) -> Result<DMatrix<Complex64>> {
    if n == 0 {
        return Err(invalid("Fourier matrix needs N >= 1"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(DMatrix::from_fn(n, n, |j, p| {
        Complex64::new(cos_2pi_frac(j * p, n), sin_2pi_frac(j * p, n)) * scale
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{coupling_matrix, CouplingProfile};

    fn uniform(n: usize, c: f64, r: usize) -> NetworkSpec {
        NetworkSpec::new(n, CouplingProfile::uniform(c, r).unwrap()).unwrap()
    }

    fn dense_eigenvalues(spec: &NetworkSpec) -> Vec<f64> {
        let m = coupling_matrix(spec);
        let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn dispersion_collapse_n8() {
        let s = dispersion(&uniform(8, 1.0, 3));
        let expected = [6.0, 0.0, -2.0, 0.0, -2.0, 0.0, -2.0, 0.0];
        for (a, b) in s.eigenvalues().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn dispersion_ring_n4() {
        let s = dispersion(&uniform(4, 1.0, 1));
        for (a, b) in s.eigenvalues().iter().zip([2.0, 0.0, -2.0, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn dispersion_matches_dense_solver_for_evanescent() {
        let spec = NetworkSpec::new(12, CouplingProfile::evanescent(0.5, 6).unwrap()).unwrap();
        let direct = dispersion(&spec).sorted();
        let dense = dense_eigenvalues(&spec);
        for (a, b) in direct.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9);
        }
        // broadened: no eigenvalue is more than doubly degenerate
        let hist = degeneracy_histogram(&dispersion(&spec), 1e-9).unwrap();
        assert!(hist.bins.iter().all(|b| b.multiplicity <= 2));
    }

    #[test]
    fn collapsed_counts() {
        for (n, counts) in [(8, (1, 4, 3)), (12, (1, 6, 5)), (4, (1, 2, 1))] {
            let s = collapsed_spectrum(n, 1.0).unwrap();
            let h = degeneracy_histogram(&s, 1e-9).unwrap();
            // ascending: -2C, 0, C(N-2)
            assert_eq!(h.counts(), vec![counts.2, counts.1, counts.0]);
            assert_eq!(h.bins[2].value, n as f64 - 2.0);
            assert_eq!(h.bins[0].value, -2.0);
        }
        assert!(collapsed_spectrum(7, 1.0).is_err());
        assert!(collapsed_spectrum(2, 1.0).is_err());
    }

    #[test]
    fn opposite_site() {
        let s = opposite_site_spectrum(8, 1.0).unwrap();
        assert_eq!(s.eigenvalues()[0], 7.0);
        assert!(s.eigenvalues()[1..].iter().all(|&l| l == -1.0));
        let s4 = opposite_site_spectrum(4, 1.0).unwrap();
        assert_eq!(s4.eigenvalues(), &[3.0, -1.0, -1.0, -1.0]);
        assert!(opposite_site_spectrum(9, 1.0).is_err());

        let direct = dispersion(&uniform(8, 1.0, 4));
        for (a, b) in direct.eigenvalues().iter().zip(s.eigenvalues()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_nearest_neighbour_band() {
        let s = dispersion(&uniform(12, 1.0, 1));
        let h = degeneracy_histogram(&s, s.default_tolerance()).unwrap();
        assert_eq!(h.counts(), vec![1, 2, 2, 2, 2, 2, 1]);
        assert_eq!(h.total(), 12);
    }

    #[test]
    fn histogram_rejects_bad_tolerance() {
        let s = collapsed_spectrum(8, 1.0).unwrap();
        assert!(degeneracy_histogram(&s, 0.0).is_err());
        assert!(degeneracy_histogram(&s, -1.0).is_err());
    }

    #[test]
    fn histogram_single_linkage_chains() {
        let s = Spectrum::from_values(vec![0.0, 0.6, 1.2, 5.0]);
        let h = degeneracy_histogram(&s, 0.7).unwrap();
        assert_eq!(h.counts(), vec![3, 1]);
        assert!((h.bins[0].value - 0.6).abs() < 1e-15);
    }

    #[test]
    fn evanescent_histogram_is_broader_than_collapse() {
        let collapse = degeneracy_histogram(&dispersion(&uniform(12, 1.0, 5)), 1e-9).unwrap();
        let ev = NetworkSpec::new(12, CouplingProfile::evanescent(0.5, 6).unwrap()).unwrap();
        let ev = degeneracy_histogram(&dispersion(&ev), 1e-9).unwrap();
        assert_eq!(collapse.bins.len(), 3);
        assert!(ev.bins.len() > collapse.bins.len());
    }

    #[test]
    fn fourier_two_point() {
        let s = fourier_matrix(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [h, h, h, -h];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - Complex64::new(b, 0.0)).norm() < 1e-15);
        }
        assert!(fourier_matrix(0).is_err());
    }

    #[test]
    fn fourier_unitary_and_symmetric() {
        for n in [1, 3, 4, 7, 16] {
            let s = fourier_matrix(n).unwrap();
            let id = &s * s.adjoint();
            assert!(crate::max_norm(&(id - DMatrix::<Complex64>::identity(n, n))) < 1e-12);
            assert!(crate::max_norm(&(&s - s.transpose())) < 1e-15);
        }
    }

    #[test]
    fn fourier_diagonalizes_coupling_matrix() {
        let spec = uniform(8, 1.0, 3);
        let m = coupling_matrix(&spec).map(|x| Complex64::new(x, 0.0));
        let s = fourier_matrix(8).unwrap();
        let d = s.adjoint() * m * &s;
        let lam = dispersion(&spec);
        for j in 0..8 {
            for k in 0..8 {
                if j == k {
                    assert!((d[(j, j)].re - lam.eigenvalues()[j]).abs() < 1e-10);
                } else {
                    assert!(d[(j, k)].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn collapse_has_more_zero_modes_than_evanescent() {
        for n in [8, 12, 16] {
            let collapse = collapsed_spectrum(n, 1.0).unwrap();
            assert_eq!(collapse.zero_mode_count(1e-9), n / 2);
            let ev = NetworkSpec::new(n, CouplingProfile::evanescent(0.5, n / 2 - 1).unwrap())
                .unwrap();
            assert!(dispersion(&ev).zero_mode_count(1e-9) < n / 2);
        }
    }
}
