//! Bounded grid scans with a local golden-section refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Half-width of the refinement window, in grid steps.
pub const REFINE_WINDOW_STEPS: f64 = 2.0;
pub const GOLDEN_ITERATIONS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub max_value: f64,
    pub z_at_max: f64,
    /// Grid samples `(z, value)`; the refined point is not included.
    pub trace: Vec<(f64, f64)>,
}

/// Grid points `0, dz, 2dz, ...` up to and including `z_max`.
pub fn grid(z_max: f64, dz: f64) -> Result<Vec<f64>> {
    if !(z_max.is_finite() && z_max > 0.0) {
        return Err(invalid(format!("z_max must be positive, got {z_max}")));
    }
    if !(dz.is_finite() && dz > 0.0) {
        return Err(invalid(format!("dz must be positive, got {dz}")));
    }
    let steps = (z_max / dz + 1e-9).floor() as usize;
    let mut zs: Vec<f64> = (0..=steps).map(|k| k as f64 * dz).collect();
    if z_max - zs[steps] > 1e-12 * z_max {
        zs.push(z_max);
    }
    Ok(zs)
}

/// Maximizes `f` over `[0, z_max]`: grid scan, then golden-section search in
/// `best +- 2 dz` (clamped to the scan range).
pub fn scan_maximum<F>(f: F, z_max: f64, dz: f64) -> Result<ScanResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let zs = grid(z_max, dz)?;
    let trace: Vec<(f64, f64)> = zs.par_iter().map(|&z| (z, f(z))).collect();

    let (mut z_best, mut best) = trace[0];
    for &(z, v) in &trace[1..] {
        if v > best {
            best = v;
            z_best = z;
        }
    }

    let lo = (z_best - REFINE_WINDOW_STEPS * dz).max(0.0);
    let hi = (z_best + REFINE_WINDOW_STEPS * dz).min(z_max);
    let z_ref = golden_section_max(&f, lo, hi, GOLDEN_ITERATIONS);
    let v_ref = f(z_ref);
    if v_ref > best {
        best = v_ref;
        z_best = z_ref;
    }

    Ok(ScanResult {
        max_value: best,
        z_at_max: z_best,
        trace,
    })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`; returns the
/// midpoint of the final bracket.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iterations: usize) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iterations {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}
