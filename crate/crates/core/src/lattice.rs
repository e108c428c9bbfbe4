//! Circulant network geometry: coupling profiles and the real symmetric
//! coupling matrix of an `N`-waveguide ring.
//!
//! Modes are numbered `0..N` internally. A profile of range `R` couples every
//! pair of waveguides separated by `r <= R` sites along the ring with strength
//! `C_r`. For even `N` the separation `r = N/2` reaches the antipode from both
//! directions and is counted once.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PstError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Uniform,
    Evanescent,
    Custom,
}

/// Coupling strengths `C_1..C_R` (inverse propagation length).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingProfile {
    couplings: Vec<f64>,
    kind: ProfileKind,
}

impl CouplingProfile {
    /// `C_r = C` for every `r <= range`.
    pub fn uniform(strength: f64, range: usize) -> Result<Self> {
        if !(strength.is_finite() && strength > 0.0) {
            return Err(invalid(format!(
                "uniform coupling must be positive and finite, got {strength}"
            )));
        }
        if range == 0 {
            return Err(invalid("interaction range must be at least 1"));
        }
        Ok(Self {
            couplings: vec![strength; range],
            kind: ProfileKind::Uniform,
        })
    }

    /// Exponentially decaying coupling `C_r = mu^r`.
    pub fn evanescent(mu: f64, range: usize) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(invalid(format!("mu must lie in (0, 1), got {mu}")));
        }
        if range == 0 {
            return Err(invalid("interaction range must be at least 1"));
        }
        Ok(Self {
            couplings: (1..=range).map(|r| mu.powi(r as i32)).collect(),
            kind: ProfileKind::Evanescent,
        })
    }

    /// Arbitrary finite couplings; signs and zeros are allowed.
    pub fn custom(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(invalid("custom profile needs at least one coupling"));
        }
        if let Some(bad) = couplings.iter().find(|c| !c.is_finite()) {
            return Err(invalid(format!("coupling {bad} is not finite")));
        }
        Ok(Self {
            couplings,
            kind: ProfileKind::Custom,
        })
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Interaction range `R`.
    pub fn range(&self) -> usize {
        self.couplings.len()
    }

    /// Coupling at separation `r` (1-based); zero beyond the range.
    pub fn at(&self, r: usize) -> f64 {
        if r == 0 {
            return 0.0;
        }
        self.couplings.get(r - 1).copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.couplings.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// `mu = exp(-kappa * d)` for waveguide spacing `d`. Ring curvature is ignored.
pub fn mu_from_separation(kappa: f64, separation: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    if !(separation.is_finite() && separation > 0.0) {
        return Err(invalid(format!(
            "separation must be positive, got {separation}"
        )));
    }
    Ok((-kappa * separation).exp())
}

impl fmt::Display for CouplingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ProfileKind::Uniform => {
                write!(f, "uniform:C={},R={}", self.couplings[0], self.range())
            }
            ProfileKind::Evanescent => {
                write!(f, "evanescent:mu={},R={}", self.couplings[0], self.range())
            }
            ProfileKind::Custom => {
                let parts: Vec<String> = self.couplings.iter().map(|c| c.to_string()).collect();
                write!(f, "custom:{}", parts.join(","))
            }
        }
    }
}

/// Parses `uniform:C=1,R=3`, `evanescent:mu=0.524,R=6` or `custom:0.5,0.25`.
impl FromStr for CouplingProfile {
    type Err = PstError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("profile `{s}` is missing `kind:`")))?;
        let kind = kind.trim().to_ascii_lowercase();
        if kind == "custom" {
            let values = body
                .split(',')
                .map(|v| parse_f64(v.trim()))
                .collect::<Result<Vec<_>>>()?;
            return Self::custom(values);
        }

        let mut strength = None;
        let mut mu = None;
        let mut range = None;
        for item in body.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got `{item}`")))?;
            match key.trim() {
                "C" | "c" => strength = Some(parse_f64(value.trim())?),
                "mu" => mu = Some(parse_f64(value.trim())?),
                "R" | "r" => {
                    range = Some(value.trim().parse::<usize>().map_err(|_| {
                        invalid(format!("range must be a positive integer, got `{value}`"))
                    })?)
                }
                other => return Err(invalid(format!("unknown profile key `{other}`"))),
            }
        }
        let range = range.ok_or_else(|| invalid("profile needs R=<range>"))?;
        match kind.as_str() {
            "uniform" => Self::uniform(
                strength.ok_or_else(|| invalid("uniform profile needs C=<strength>"))?,
                range,
            ),
            "evanescent" => Self::evanescent(
                mu.ok_or_else(|| invalid("evanescent profile needs mu=<value>"))?,
                range,
            ),
            other => Err(invalid(format!("unknown profile kind `{other}`"))),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| invalid(format!("`{s}` is not a number")))
}

/// A ring of `n_modes` waveguides with a circulant coupling profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    n_modes: usize,
    profile: CouplingProfile,
}

impl NetworkSpec {
    pub fn new(n_modes: usize, profile: CouplingProfile) -> Result<Self> {
        if n_modes < 2 {
            return Err(invalid(format!("need at least 2 modes, got {n_modes}")));
        }
        if profile.range() > n_modes / 2 {
            return Err(invalid(format!(
                "range {} exceeds floor(N/2) = {} for N = {n_modes}",
                profile.range(),
                n_modes / 2
            )));
        }
        Ok(Self { n_modes, profile })
    }

    /// Uniform profile with `R = N/2 - 1`, the spectral-collapse geometry.
    pub fn collapse(n_modes: usize, strength: f64) -> Result<Self> {
        if n_modes < 4 || n_modes % 2 != 0 {
            return Err(invalid(format!(
                "collapse profile needs even N >= 4, got {n_modes}"
            )));
        }
        Self::new(n_modes, CouplingProfile::uniform(strength, n_modes / 2 - 1)?)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn profile(&self) -> &CouplingProfile {
        &self.profile
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(invalid(format!(
                "mode index {mode} out of range for N = {}",
                self.n_modes
            )));
        }
        Ok(())
    }

    /// Weight of the separation-`r` term in the cosine sum: 2 for ordinary
    /// separations, 1 for the antipodal separation of an even ring.
    pub(crate) fn pair_weight(&self, r: usize) -> f64 {
        if 2 * r == self.n_modes {
            1.0
        } else {
            2.0
        }
    }

    /// Returns `C` if couplings equal `C` up to `r = N/2 - 1` and vanish at
    /// `r = N/2`, independent of how the profile was built.
    pub fn collapse_strength(&self, rel_tol: f64) -> Option<f64> {
        let n = self.n_modes;
        if n < 4 || n % 2 != 0 || self.profile.range() < n / 2 - 1 {
            return None;
        }
        let c = self.profile.at(1);
        if c == 0.0 {
            return None;
        }
        let tol = rel_tol * c.abs();
        let flat = (1..n / 2).all(|r| (self.profile.at(r) - c).abs() <= tol);
        let antipode_off = self.profile.at(n / 2).abs() <= tol;
        (flat && antipode_off).then_some(c)
    }
}

/// Real symmetric circulant coupling matrix with zero diagonal.
pub fn coupling_matrix(spec: &NetworkSpec) -> DMatrix<f64> {
    let n = spec.n_modes();
    let mut m = DMatrix::zeros(n, n);
    for (idx, &c) in spec.profile().couplings().iter().enumerate() {
        let r = idx + 1;
        for j in 0..n {
            let k = (j + r) % n;
            // assignment, not accumulation: r = N/2 hits each pair twice
            m[(j, k)] = c;
            m[(k, j)] = c;
        }
    }
    m
}
