//! Palette recoloring by finite-difference gradient descent in Lab.
//!
//! The objective asks every simulated pairwise difference to match the
//! difference a normal viewer sees between the original colors, with a mild
//! pull towards the original colors and a penalty outside the sRGB gamut:
//!
//! ```text
//! E = sum_{i<j} (dsim_ij - d_ij)^2 + lambda * sum_i dE(c'_i, c_i)^2 + beta * G
//! ```
//!
//! Simulation inside the objective skips the display clamp so that `E` stays
//! smooth; scores reported to callers use the clamped simulation.
//!
//! Every sum is taken over sorted terms, which makes the result independent of
//! palette order.

use serde::{Deserialize, Serialize};

use super::{score_palette, AdaptError, Palette};
use crate::color::{delta_e, lab_to_linear, linear_to_lab, simulate_unclamped, CvdProfile, Lab};

pub const FD_STEP: f64 = 1e-3;
const MIN_STEP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeOptions {
    /// Weight of the pull towards the original colors.
    pub lambda: f64,
    /// Weight of the gamut penalty.
    pub beta: f64,
    pub max_iters: usize,
    /// Stop once an iteration improves the objective by less than this fraction.
    pub tol: f64,
    /// Initial line-search step, in Lab units.
    pub step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            lambda: 0.05,
            beta: 10.0,
            max_iters: 500,
            tol: 1e-6,
            step: 1.0,
        }
    }
}

impl OptimizeOptions {
    fn validate(&self) -> Result<(), AdaptError> {
        let ok = self.lambda >= 0.0
            && self.beta >= 0.0
            && self.tol >= 0.0
            && self.step > 0.0
            && [self.lambda, self.beta, self.tol, self.step].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(AdaptError::Options(format!("{self:?}")))
        }
    }
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms {
    pub mismatch: f64,
    pub fidelity: f64,
    pub gamut: f64,
}

/// The recoloring objective for one original palette and viewer.
#[derive(Debug, Clone)]
pub struct Objective {
    original: Vec<Lab>,
    /// Normal-vision differences, row-major over pairs `i < j`.
    reference: Vec<f64>,
    profile: CvdProfile,
    lambda: f64,
    beta: f64,
}

impl Objective {
    pub fn new(original: &Palette, profile: CvdProfile, lambda: f64, beta: f64) -> Self {
        let original: Vec<Lab> = original.colors().map(|c| c.to_lab()).collect();
        let n = original.len();
        let mut reference = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                reference.push(delta_e(original[i], original[j]));
            }
        }
        Objective {
            original,
            reference,
            profile,
            lambda,
            beta,
        }
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn original(&self) -> &[Lab] {
        &self.original
    }

    pub fn terms(&self, candidate: &[Lab]) -> ObjectiveTerms {
        assert_eq!(candidate.len(), self.original.len(), "candidate size");
        let linear: Vec<_> = candidate.iter().map(|&c| lab_to_linear(c)).collect();
        let seen: Vec<Lab> = linear
            .iter()
            .map(|&c| linear_to_lab(simulate_unclamped(c, self.profile)))
            .collect();
        let n = candidate.len();
        let mut mismatch = Vec::with_capacity(self.reference.len());
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                mismatch.push((delta_e(seen[i], seen[j]) - self.reference[k]).powi(2));
                k += 1;
            }
        }
        let fidelity = candidate
            .iter()
            .zip(&self.original)
            .map(|(&c, &o)| delta_e(c, o).powi(2))
            .collect();
        let gamut = linear
            .iter()
            .flat_map(|c| c.to_array())
            .map(|v| {
                let over = if v < 0.0 { -v } else { (v - 1.0).max(0.0) };
                over * over
            })
            .collect();
        ObjectiveTerms {
            mismatch: sorted_sum(mismatch),
            fidelity: sorted_sum(fidelity),
            gamut: sorted_sum(gamut),
        }
    }

    pub fn eval(&self, candidate: &[Lab]) -> f64 {
        let t = self.terms(candidate);
        t.mismatch + self.lambda * t.fidelity + self.beta * t.gamut
    }

    /// Central differences over every coordinate of every color.
    pub fn gradient(&self, candidate: &[Lab], h: f64) -> Vec<f64> {
        let mut point: Vec<Lab> = candidate.to_vec();
        let mut grad = Vec::with_capacity(3 * candidate.len());
        for i in 0..candidate.len() {
            for axis in 0..3 {
                let base = candidate[i].to_array();
                let mut shifted = base;
                shifted[axis] = base[axis] + h;
                point[i] = Lab::from_array(shifted);
                let plus = self.eval(&point);
                shifted[axis] = base[axis] - h;
                point[i] = Lab::from_array(shifted);
                let minus = self.eval(&point);
                point[i] = candidate[i];
                grad.push((plus - minus) / (2.0 * h));
            }
        }
        grad
    }
}

/// Objective with the default gamut weight.
pub fn objective(
    candidate: &Palette,
    original: &Palette,
    profile: CvdProfile,
    lambda: f64,
) -> Result<f64, AdaptError> {
    if !candidate.same_roles(original) {
        return Err(AdaptError::RoleMismatch);
    }
    let labs: Vec<Lab> = candidate.colors().map(|c| c.to_lab()).collect();
    Ok(Objective::new(original, profile, lambda, OptimizeOptions::default().beta).eval(&labs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationResult {
    pub adapted: Palette,
    pub initial_score: f64,
    pub final_score: f64,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    sorted_sum(v.iter().map(|x| x * x).collect()).sqrt()
}

/// Gradient descent over the Lab coordinates of the unpinned colors.
///
/// Each iteration steps along the normalized negative finite-difference
/// gradient, starting at `opts.step` Lab units and halving until the objective
/// decreases. Stops when no step above 1e-8 decreases it, when the relative
/// decrease drops below `opts.tol`, or after `opts.max_iters` iterations.
pub fn optimize_palette(
    original: &Palette,
    profile: CvdProfile,
    opts: &OptimizeOptions,
) -> Result<AdaptationResult, AdaptError> {
    opts.validate()?;
    let initial_score = score_palette(original, profile);
    if profile.is_identity() {
        return Ok(AdaptationResult {
            adapted: original.clone(),
            initial_score,
            final_score: initial_score,
            iterations: 0,
            objective_trace: Vec::new(),
        });
    }
    let free: Vec<usize> = (0..original.entries().len())
        .filter(|&i| !original.entries()[i].pinned)
        .collect();
    if free.is_empty() {
        return Err(AdaptError::AllPinned);
    }

    let objective = Objective::new(original, profile, opts.lambda, opts.beta);
    let mut colors: Vec<Lab> = objective.original().to_vec();
    let mut value = objective.eval(&colors);
    let mut trace = vec![value];
    let mut iterations = 0;

    while iterations < opts.max_iters {
        let full = objective.gradient(&colors, FD_STEP);
        let grad: Vec<f64> = free.iter().flat_map(|&i| full[3 * i..3 * i + 3].to_vec()).collect();
        let length = norm(&grad);
        if length == 0.0 || !length.is_finite() {
            break;
        }
        let mut step = opts.step;
        let accepted = loop {
            let mut trial = colors.clone();
            for (k, &i) in free.iter().enumerate() {
                let mut c = trial[i].to_array();
                for axis in 0..3 {
                    c[axis] -= step * grad[3 * k + axis] / length;
                }
                trial[i] = Lab::from_array(c);
            }
            let trial_value = objective.eval(&trial);
            if trial_value < value {
                break Some((trial, trial_value));
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some((next, next_value)) = accepted else { break };
        let relative = (value - next_value) / value.abs().max(f64::MIN_POSITIVE);
        colors = next;
        value = next_value;
        trace.push(value);
        iterations += 1;
        if relative < opts.tol {
            break;
        }
    }

    let quantized: Vec<_> = original
        .entries()
        .iter()
        .zip(&colors)
        .map(|(e, c)| if e.pinned { e.color } else { c.to_srgb8() })
        .collect();
    let mut adapted = original.with_colors(&quantized);
    // 8-bit rounding and the final clamp can cost more than a tiny descent gained
    let adapted_labs: Vec<Lab> = adapted.colors().map(|c| c.to_lab()).collect();
    if objective.eval(&adapted_labs) > trace[0] {
        adapted = original.clone();
    }
    Ok(AdaptationResult {
        final_score: score_palette(&adapted, profile),
        adapted,
        initial_score,
        iterations,
        objective_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    /// Largest component of `|g(h) - g(h/2)|`, relative to the largest gradient component.
    pub max_relative_error: f64,
    /// `|g(h) - g(h/2)| / |g(h/2) - g(h/4)|`; close to 4 while truncation error dominates.
    pub richardson_factor: f64,
    /// Norm of the Richardson-extrapolated gradient.
    pub gradient_norm: f64,
}

pub const CHECK_STEP: f64 = 1e-2;
const GAMUT_CLEARANCE: f64 = 1e-3;

/// Finite-difference self-check of the objective gradient at `candidate`.
/// Requires every candidate color to sit strictly inside the gamut so that the
/// penalty term is inactive and the objective smooth.
pub fn gradient_check(
    candidate: &[Lab],
    original: &Palette,
    profile: CvdProfile,
    lambda: f64,
) -> Result<GradientCheck, AdaptError> {
    if candidate.len() != original.entries().len() {
        return Err(AdaptError::RoleMismatch);
    }
    let margin = GAMUT_CLEARANCE + 4.0 * CHECK_STEP;
    for (i, c) in candidate.iter().enumerate() {
        let linear = lab_to_linear(*c);
        let inside = linear.to_array().iter().all(|v| *v > GAMUT_CLEARANCE && *v < 1.0 - GAMUT_CLEARANCE);
        if !inside || c.l < margin || c.l > 100.0 - margin {
            return Err(AdaptError::Precondition(format!(
                "color {i} is not strictly inside the gamut"
            )));
        }
    }
    let objective = Objective::new(original, profile, lambda, OptimizeOptions::default().beta);
    let g1 = objective.gradient(candidate, CHECK_STEP);
    let g2 = objective.gradient(candidate, CHECK_STEP / 2.0);
    let g4 = objective.gradient(candidate, CHECK_STEP / 4.0);
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
    let d12 = diff(&g1, &g2);
    let d24 = diff(&g2, &g4);
    // Richardson extrapolation cancels the h^2 truncation term
    let extrapolated: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let scale = g2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = d12.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(GradientCheck {
        max_relative_error: if scale > 0.0 { worst / scale } else { worst },
        richardson_factor: norm(&d12) / norm(&d24),
        gradient_norm: norm(&extrapolated),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::PaletteEntry;
    use crate::color::{CvdKind, Dichromat, Srgb8};

    fn red_green() -> Palette {
        Palette::new(
            "rg",
            vec![
                PaletteEntry::new("error", Srgb8::new(255, 0, 0)),
                PaletteEntry::new("ok", Srgb8::new(0, 255, 0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn objective_is_zero_at_original_for_normal() {
        let p = red_green();
        // Lab round trips of gamut corners land a hair outside the cube
        assert!(objective(&p, &p, CvdProfile::NORMAL, 0.05).unwrap() < 1e-8);
        assert!(objective(&p, &p, Dichromat::Deutan.profile(), 0.05).unwrap() > 0.0);
    }

    #[test]
    fn role_mismatch() {
        let p = red_green();
        let q = Palette::new(
            "x",
            vec![
                PaletteEntry::new("ok", Srgb8::new(0, 255, 0)),
                PaletteEntry::new("error", Srgb8::new(255, 0, 0)),
            ],
        )
        .unwrap();
        assert!(matches!(objective(&q, &p, CvdProfile::NORMAL, 0.0), Err(AdaptError::RoleMismatch)));
    }

    #[test]
    fn normal_profile_is_identity() {
        let p = red_green();
        let r = optimize_palette(&p, CvdProfile::NORMAL, &OptimizeOptions::default()).unwrap();
        assert_eq!(r.adapted, p);
        assert_eq!(r.iterations, 0);
        let zero = CvdProfile::new(CvdKind::Protan, 0.0).unwrap();
        assert_eq!(optimize_palette(&p, zero, &OptimizeOptions::default()).unwrap().adapted, p);
    }

    #[test]
    fn all_pinned_is_rejected() {
        let p = Palette::new(
            "pinned",
            vec![
                PaletteEntry::new("a", Srgb8::new(255, 0, 0)).pinned(),
                PaletteEntry::new("b", Srgb8::new(0, 255, 0)).pinned(),
            ],
        )
        .unwrap();
        assert!(matches!(
            optimize_palette(&p, Dichromat::Deutan.profile(), &OptimizeOptions::default()),
            Err(AdaptError::AllPinned)
        ));
    }

    #[test]
    fn descent_improves_red_green() {
        let p = red_green();
        let r = optimize_palette(&p, Dichromat::Deutan.profile(), &OptimizeOptions::default()).unwrap();
        assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.final_score > r.initial_score);
        assert_eq!(r.objective_trace.len(), r.iterations + 1);
    }

    #[test]
    fn gradient_check_rejects_boundary_colors() {
        let p = red_green();
        let labs: Vec<Lab> = p.colors().map(|c| c.to_lab()).collect();
        assert!(matches!(
            gradient_check(&labs, &p, Dichromat::Deutan.profile(), 0.05),
            Err(AdaptError::Precondition(_))
        ));
    }

    #[test]
    fn bad_options() {
        let opts = OptimizeOptions { step: 0.0, ..Default::default() };
        assert!(matches!(
            optimize_palette(&red_green(), Dichromat::Deutan.profile(), &opts),
            Err(AdaptError::Options(_))
        ));
    }
}
