//! Transition amplitudes `U_{jl}(z)` of a circulant network.
//!
//! The primary path is the exact Fourier sum
//! `U_{jl}(z) = (1/N) sum_p exp(-i lambda_p z) exp(i 2 pi p (j - l) / N)`.
//! [`ode_oracle`] integrates the coupled-mode equation with RK4 and exists only
//! to cross-check that sum.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PstError, Result};
use crate::max_norm;
use crate::lattice::{coupling_matrix, NetworkSpec};
use crate::scan::{scan_maximum, ScanResult};
use crate::spectral::{cos_2pi_frac, dispersion, sin_2pi_frac};

/// Relative tolerance used to recognise a collapse-shaped profile.
pub const COLLAPSE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    matrix: DMatrix<Complex64>,
    z: f64,
}

impl Propagator {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows()
    }

    /// Amplitude from `source` to `target` (0-based).
    pub fn amplitude(&self, target: usize, source: usize) -> Complex64 {
        self.matrix[(target, source)]
    }

    pub fn apply(&self, amplitudes: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if amplitudes.len() != self.n_modes() {
            return Err(PstError::DimensionMismatch {
                expected: self.n_modes(),
                found: amplitudes.len(),
            });
        }
        Ok(&self.matrix * amplitudes)
    }

    /// `max |U U^dagger - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n_modes();
        max_norm(&(&self.matrix * self.matrix.adjoint() - DMatrix::identity(n, n)))
    }

    /// Wraps an arbitrary matrix, e.g. for feeding hand-built unitaries to the
    /// Gaussian module.
    pub fn from_matrix(matrix: DMatrix<Complex64>, z: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(PstError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix, z })
    }
}

/// Precomputed Fourier sum for one offset `d = target - source`.
#[derive(Debug, Clone)]
pub struct TransitionAmplitude {
    eigenvalues: Vec<f64>,
    phases: Vec<Complex64>,
}

impl TransitionAmplitude {
    pub fn new(spec: &NetworkSpec, target: usize, source: usize) -> Result<Self> {
        spec.check_mode(target)?;
        spec.check_mode(source)?;
        let n = spec.n_modes();
        let d = (target + n - source) % n;
        Ok(Self::for_offset(spec, d))
    }

    fn for_offset(spec: &NetworkSpec, d: usize) -> Self {
        let n = spec.n_modes();
        let eigenvalues = dispersion(spec).eigenvalues().to_vec();
        let phases = (0..n)
            .map(|p| Complex64::new(cos_2pi_frac(p * d, n), sin_2pi_frac(p * d, n)) / n as f64)
            .collect();
        Self {
            eigenvalues,
            phases,
        }
    }

    pub fn at(&self, z: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .zip(&self.phases)
            .map(|(&l, &ph)| Complex64::from_polar(1.0, -l * z) * ph)
            .sum()
    }

    /// `|U(z)|^2`.
    pub fn probability(&self, z: f64) -> f64 {
        self.at(z).norm_sqr()
    }
}

/// Exact propagator at distance `z` from the Fourier sum.
pub fn propagator(spec: &NetworkSpec, z: f64) -> Result<Propagator> {
    if !z.is_finite() {
        return Err(invalid(format!("propagation distance must be finite, got {z}")));
    }
    let n = spec.n_modes();
    let lambda = dispersion(spec);
    let evolution: Vec<Complex64> = lambda
        .eigenvalues()
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -l * z))
        .collect();
    let column: Vec<Complex64> = (0..n)
        .map(|d| {
            evolution
                .iter()
                .enumerate()
                .map(|(p, &e)| e * Complex64::new(cos_2pi_frac(p * d, n), sin_2pi_frac(p * d, n)))
                .sum::<Complex64>()
                / n as f64
        })
        .collect();
    let matrix = DMatrix::from_fn(n, n, |j, l| column[(j + n - l) % n]);
    Ok(Propagator { matrix, z })
}

/// Closed-form amplitude of the collapsed network (uniform `C`,
/// `R = N/2 - 1`) for offset `d = j - l`.
pub fn closed_form_amplitude(n: usize, strength: f64, d: i64, z: f64) -> Result<Complex64> {
    if n < 4 || n % 2 != 0 {
        return Err(invalid(format!("closed form needs even N >= 4, got {n}")));
    }
    let d = d.rem_euclid(n as i64) as usize;
    let half = n as f64 / 2.0;
    let at_origin = (d == 0) as u8 as f64;
    let at_antipode = (d == n / 2) as u8 as f64;
    let high = Complex64::from_polar(1.0, -strength * (n as f64 - 2.0) * z);
    let low = Complex64::from_polar(1.0, 2.0 * strength * z);
    Ok((high + half * (at_origin - at_antipode) + low * (half * (at_origin + at_antipode) - 1.0)) / n as f64)
}

/// `(2s + 1) pi / (2C)`.
pub fn pst_distance(strength: f64, s: u32) -> Result<f64> {
    if !(strength.is_finite() && strength > 0.0) {
        return Err(invalid(format!("coupling must be positive, got {strength}")));
    }
    Ok((2 * s + 1) as f64 * PI / (2.0 * strength))
}

/// Default grid step `0.01 / max |C_r|`.
pub fn default_dz(spec: &NetworkSpec) -> f64 {
    let c = spec.profile().max_abs();
    if c > 0.0 {
        0.01 / c
    } else {
        0.01
    }
}

mod label {
    //! Mode indices are 0-based in memory and 1-based on the wire.
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(index: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*index as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let label = u64::deserialize(d)?;
        if label == 0 {
            return Err(serde::de::Error::custom("mode labels start at 1"));
        }
        Ok(label as usize - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PstReport {
    pub is_pst: bool,
    /// Whether the profile satisfies the analytical collapse conditions
    /// (uniform up to `N/2 - 1`, no antipodal coupling, `N = 4n`).
    pub analytic_conditions: bool,
    pub z_pst: Option<f64>,
    /// Distance at which `amplitude_at_zpst` was evaluated.
    pub z_evaluated: f64,
    #[serde(with = "label")]
    pub source: usize,
    #[serde(with = "label")]
    pub target: usize,
    pub amplitude_at_zpst: Complex64,
    pub transfer_at_zpst: f64,
    pub max_transfer: f64,
    pub z_at_max: f64,
}

/// Checks perfect transfer from `source` to its antipode.
///
/// The candidate distance is `pi / (2C)` for collapse-shaped profiles and
/// `pi / (2 max|C_r|)` otherwise; `max_transfer` comes from a scan over two
/// collapse periods (`[0, 4 z_candidate]`).
pub fn check_pst(spec: &NetworkSpec, source: usize, tol: f64) -> Result<PstReport> {
    let n = spec.n_modes();
    if n % 2 != 0 {
        return Err(PstError::UnsupportedGeometry(format!(
            "antipodal transfer needs even N, got {n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    spec.check_mode(source)?;
    let target = (source + n / 2) % n;

    let collapse = spec.collapse_strength(COLLAPSE_REL_TOL);
    let analytic = collapse.is_some() && n % 4 == 0;
    let strength = collapse.map(f64::abs).unwrap_or_else(|| spec.profile().max_abs());
    if strength == 0.0 {
        return Err(invalid("profile has no nonzero coupling"));
    }
    let z_candidate = pst_distance(strength, 0)?;

    let amp = TransitionAmplitude::new(spec, target, source)?;
    let amplitude = amp.at(z_candidate);
    let transfer = amplitude.norm_sqr();
    let is_pst = analytic && transfer >= 1.0 - tol;

    let scan = scan_maximum(|z| amp.probability(z), 4.0 * z_candidate, default_dz(spec))?;

    Ok(PstReport {
        is_pst,
        analytic_conditions: analytic,
        z_pst: is_pst.then_some(z_candidate),
        z_evaluated: z_candidate,
        source,
        target,
        amplitude_at_zpst: amplitude,
        transfer_at_zpst: transfer,
        max_transfer: scan.max_value,
        z_at_max: scan.z_at_max,
    })
}

/// Grid scan of `|U_{target,source}(z)|^2` over `[0, z_max]` with golden-section
/// refinement around the best grid point.
pub fn transfer_scan(
    spec: &NetworkSpec,
    source: usize,
    target: usize,
    z_max: f64,
    dz: f64,
) -> Result<ScanResult> {
    let amp = TransitionAmplitude::new(spec, target, source)?;
    scan_maximum(|z| amp.probability(z), z_max, dz)
}

/// RK4 integration of `da_j/dz = -i sum_r C_r (a_{j+r} + a_{j-r})`.
///
/// Requires `(|z| / steps) * max|lambda| < 0.1`.
pub fn ode_oracle(
    spec: &NetworkSpec,
    initial: &DVector<Complex64>,
    z: f64,
    steps: usize,
) -> Result<DVector<Complex64>> {
    let n = spec.n_modes();
    if initial.len() != n {
        return Err(PstError::DimensionMismatch {
            expected: n,
            found: initial.len(),
        });
    }
    if !z.is_finite() {
        return Err(invalid(format!("propagation distance must be finite, got {z}")));
    }
    if z == 0.0 {
        return Ok(initial.clone());
    }
    let lambda_max = dispersion(spec).max_abs();
    let needed = (z.abs() * lambda_max / 0.1).floor() as usize + 1;
    if steps == 0 || z.abs() / steps as f64 * lambda_max >= 0.1 {
        return Err(PstError::StepSize(format!(
            "{steps} steps over z = {z} with max |lambda| = {lambda_max}; use at least {needed}"
        )));
    }

    let generator = coupling_matrix(spec).map(|c| Complex64::new(0.0, -c));
    let h = Complex64::from(z / steps as f64);
    let half = h * 0.5;
    let two = Complex64::from(2.0);
    let sixth = h / 6.0;
    let rhs = |a: &DVector<Complex64>| &generator * a;
    let mut a = initial.clone();
    for _ in 0..steps {
        let k1 = rhs(&a);
        let k2 = rhs(&(&a + &k1 * half));
        let k3 = rhs(&(&a + &k2 * half));
        let k4 = rhs(&(&a + &k3 * h));
        a += (k1 + k2 * two + k3 * two + k4) * sixth;
    }
    Ok(a)
}
