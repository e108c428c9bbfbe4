//! Discrete-variable transport: single-photon occupations and Schrödinger cat
//! fidelities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PstError, Result};
use crate::lattice::NetworkSpec;
use crate::propagation::{propagator, TransitionAmplitude};
use crate::scan::{scan_maximum, ScanResult};

const NORMALIZATION_FLOOR: f64 = 1e-12;
const ODD_CAT_CUTOFF: f64 = 1e-6;
const FIDELITY_SLACK: f64 = 1e-12;

/// `N(|alpha> + e^{i phi} |-alpha>)` with real `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatState {
    pub alpha: f64,
    pub phi: f64,
    pub normalization: f64,
}

impl CatState {
    pub fn new(alpha: f64, phi: f64) -> Result<Self> {
        let normalization = cat_normalization(alpha, phi)?;
        Ok(Self {
            alpha,
            phi,
            normalization,
        })
    }

    pub fn even(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0)
    }

    pub fn odd(alpha: f64) -> Result<Self> {
        Self::new(alpha, std::f64::consts::PI)
    }

    pub fn yurke_stoler(alpha: f64) -> Result<Self> {
        Self::new(alpha, std::f64::consts::FRAC_PI_2)
    }

    /// Fidelity after the single-mode amplitude `u` has acted on the source:
    /// `|2 N^2 e^{-a^2} [exp(u* a^2) + cos(phi) exp(-u* a^2)]|^2`.
    pub fn fidelity_for_amplitude(&self, u: Complex64) -> Result<f64> {
        let a2 = self.alpha * self.alpha;
        let uc = u.conj() * a2;
        let bracket = uc.exp() + self.phi.cos() * (-uc).exp();
        let f = (bracket * (2.0 * self.normalization.powi(2) * (-a2).exp())).norm_sqr();
        if !(-FIDELITY_SLACK..=1.0 + FIDELITY_SLACK).contains(&f) {
            return Err(PstError::InconsistentInput(format!(
                "fidelity {f} outside [0, 1] for amplitude {u}"
            )));
        }
        Ok(f)
    }
}

/// `(2 + 2 e^{-2 alpha^2} cos phi)^{-1/2}`.
pub fn cat_normalization(alpha: f64, phi: f64) -> Result<f64> {
    if !(alpha.is_finite() && phi.is_finite()) {
        return Err(invalid(format!("cat parameters must be finite, got alpha={alpha}, phi={phi}")));
    }
    let from_pi = (phi - std::f64::consts::PI).rem_euclid(std::f64::consts::TAU);
    let near_pi = from_pi.min(std::f64::consts::TAU - from_pi) < ODD_CAT_CUTOFF;
    if alpha.abs() < ODD_CAT_CUTOFF && near_pi {
        return Err(PstError::DegenerateState(format!(
            "odd cat with alpha={alpha} vanishes; the alpha -> 0 limit is a Fock state"
        )));
    }
    let norm_sq = 2.0 + 2.0 * (-2.0 * alpha * alpha).exp() * phi.cos();
    if norm_sq <= NORMALIZATION_FLOOR {
        return Err(PstError::DegenerateState(format!(
            "normalization denominator {norm_sq:e} vanishes for alpha={alpha}, phi={phi}"
        )));
    }
    Ok(norm_sq.powf(-0.5))
}

/// Occupations `|U_{j,m}(z)|^2` for one photon injected in mode `m`.
pub fn photon_numbers(spec: &NetworkSpec, input_mode: usize, z: f64) -> Result<Vec<f64>> {
    spec.check_mode(input_mode)?;
    let u = propagator(spec, z)?;
    Ok((0..spec.n_modes())
        .map(|j| u.amplitude(j, input_mode).norm_sqr())
        .collect())
}

pub fn cat_fidelity(
    spec: &NetworkSpec,
    source: usize,
    target: usize,
    cat: &CatState,
    z: f64,
) -> Result<f64> {
    let amp = TransitionAmplitude::new(spec, target, source)?;
    cat.fidelity_for_amplitude(amp.at(z))
}

/// Closed form at a PST distance, where the antipodal amplitude is `-1`.
pub fn pst_cat_fidelity(alpha: f64, phi: f64) -> Result<f64> {
    CatState::new(alpha, phi)?.fidelity_for_amplitude(Complex64::new(-1.0, 0.0))
}

pub fn cat_fidelity_scan(
    spec: &NetworkSpec,
    source: usize,
    target: usize,
    cat: &CatState,
    z_max: f64,
    dz: f64,
) -> Result<ScanResult> {
    let amp = TransitionAmplitude::new(spec, target, source)?;
    // probe once so an inconsistent state surfaces as an error, not NaN
    cat.fidelity_for_amplitude(amp.at(0.0))?;
    scan_maximum(
        |z| cat.fidelity_for_amplitude(amp.at(z)).unwrap_or(f64::NAN),
        z_max,
        dz,
    )
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::lattice::CouplingProfile;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn occupations_sum_to_one(
            (n, c) in (2usize..=16).prop_flat_map(|n| (Just(n), prop::collection::vec(-2.0f64..2.0, 1..=n / 2))),
            m in 0usize..16,
            z in -30.0f64..30.0,
        ) {
            let spec = NetworkSpec::new(n, CouplingProfile::custom(c).unwrap()).unwrap();
            let occ = photon_numbers(&spec, m % n, z).unwrap();
            prop_assert!((occ.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn fidelity_in_unit_interval(
            alpha in 0.01f64..3.0, phi in 0.0f64..6.28, z in 0.0f64..20.0, half in 2usize..=8,
        ) {
            let spec = NetworkSpec::collapse(2 * half, 1.0).unwrap();
            let cat = CatState::new(alpha, phi).unwrap();
            let f = cat_fidelity(&spec, 0, half, &cat, z).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        }
    }
}
