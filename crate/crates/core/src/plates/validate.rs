//! Re-checks a plate from its painted dots alone.

use serde::{Deserialize, Serialize};

use super::{d_low, DesignKind, IshiharaPlate, D_HIGH, L_LEAK, V_THRESH};
use crate::color::{delta_e, linear_to_lab, simulate, CvdProfile, Dichromat, LinearRgb};

/// Mean colors of the dot populations of a plate. Means are taken in linear
/// light, the way dots blend when viewed from a distance.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationStats {
    pub ground_mean: LinearRgb,
    pub figure_means: Vec<LinearRgb>,
    pub ground_mean_l: f64,
    /// Mean L* over the dots of all glyphs together.
    pub figure_mean_l: f64,
}

fn mean(colors: &[LinearRgb]) -> LinearRgb {
    let n = colors.len().max(1) as f64;
    let sum = colors.iter().fold([0.0; 3], |acc, c| {
        [acc[0] + c.r, acc[1] + c.g, acc[2] + c.b]
    });
    LinearRgb::new(sum[0] / n, sum[1] / n, sum[2] / n)
}

pub fn population_stats(plate: &IshiharaPlate) -> PopulationStats {
    let regions = plate.regions();
    let mut ground = Vec::new();
    let mut figures = vec![Vec::new(); plate.glyphs.len()];
    let (mut ground_l, mut figure_l, mut figure_count) = (0.0, 0.0, 0usize);
    for (circle, region) in plate.circles.iter().zip(regions) {
        let linear = circle.color.to_linear();
        let l = linear_to_lab(linear).l;
        match region {
            Some(g) => {
                figures[g].push(linear);
                figure_l += l;
                figure_count += 1;
            }
            None => {
                ground.push(linear);
                ground_l += l;
            }
        }
    }
    PopulationStats {
        ground_mean_l: ground_l / ground.len().max(1) as f64,
        figure_mean_l: figure_l / figure_count.max(1) as f64,
        ground_mean: mean(&ground),
        figure_means: figures.iter().map(|f| mean(f)).collect(),
    }
}

/// Simulated difference between two mean colors.
pub(crate) fn simulated_difference(a: LinearRgb, b: LinearRgb, profile: CvdProfile) -> f64 {
    delta_e(
        linear_to_lab(simulate(a, profile)),
        linear_to_lab(simulate(b, profile)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphCheck {
    pub digit: char,
    pub de_normal: f64,
    /// Difference under each full dichromat simulation.
    pub de_simulated: Vec<(Dichromat, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateReport {
    pub plate_id: String,
    pub passed: bool,
    pub glyphs: Vec<GlyphCheck>,
    pub mean_l_gap: f64,
    pub failures: Vec<String>,
}

/// Passes when, for the mean figure and ground colors:
/// * every glyph differs by at least `D_HIGH` for normal vision,
/// * vanishing glyphs drop to `d_low(difficulty)` for their target
///   (diagnostic plates: protan for the first glyph, deutan for the second),
/// * demo glyphs stay above `V_THRESH` for all three dichromacies,
/// * the figure/ground mean L* gap is within `L_LEAK`.
pub fn validate_plate(plate: &IshiharaPlate) -> PlateReport {
    let stats = population_stats(plate);
    let mut failures = Vec::new();
    let mut glyphs = Vec::new();
    let limit = d_low(plate.design.difficulty);
    for (index, (glyph, figure)) in plate.glyphs.iter().zip(&stats.figure_means).enumerate() {
        let de_normal = delta_e(linear_to_lab(*figure), linear_to_lab(stats.ground_mean));
        let de_simulated: Vec<(Dichromat, f64)> = Dichromat::ALL
            .iter()
            .map(|&d| (d, simulated_difference(*figure, stats.ground_mean, d.profile())))
            .collect();
        if de_normal < D_HIGH {
            failures.push(format!("glyph {index}: normal difference {de_normal:.2} < {D_HIGH}"));
        }
        let sim = |d: Dichromat| de_simulated.iter().find(|(k, _)| *k == d).unwrap().1;
        let vanishing_target = match plate.design.kind {
            DesignKind::Vanishing => plate.design.target,
            DesignKind::Diagnostic => Some(if index == 0 { Dichromat::Protan } else { Dichromat::Deutan }),
            DesignKind::Demo => None,
        };
        match vanishing_target {
            Some(target) if sim(target) > limit => failures.push(format!(
                "glyph {index}: {target:?} difference {:.2} > {limit:.2}",
                sim(target)
            )),
            None => {
                for &(d, de) in &de_simulated {
                    if de < V_THRESH {
                        failures.push(format!("glyph {index}: {d:?} difference {de:.2} < {V_THRESH}"));
                    }
                }
            }
            _ => {}
        }
        glyphs.push(GlyphCheck {
            digit: glyph.digit,
            de_normal,
            de_simulated,
        });
    }
    let mean_l_gap = stats.figure_mean_l - stats.ground_mean_l;
    if mean_l_gap.abs() > L_LEAK {
        failures.push(format!("luminance leak: mean L* gap {mean_l_gap:.2} exceeds {L_LEAK}"));
    }
    PlateReport {
        plate_id: plate.id.clone(),
        passed: failures.is_empty(),
        glyphs,
        mean_l_gap,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Lab;
    use crate::plates::{compose_plate, PlateDesign};

    #[test]
    fn fresh_plates_pass() {
        let vanishing = compose_plate(PlateDesign::vanishing(Dichromat::Protan, 0.0), &['6'], 8).unwrap();
        let report = validate_plate(&vanishing);
        assert!(report.passed, "{:?}", report.failures);
        let demo = compose_plate(PlateDesign::demo(), &['2', '9'], 8).unwrap();
        let report = validate_plate(&demo);
        assert!(report.passed, "{:?}", report.failures);
        assert!(report.glyphs.iter().all(|g| g.de_simulated.len() == 3));
    }

    #[test]
    fn figure_only_jitter_leaks_luminance() {
        let mut plate = compose_plate(PlateDesign::vanishing(Dichromat::Deutan, 0.0), &['5'], 21).unwrap();
        let regions = plate.regions();
        // one-sided jitter on the figure: every figure dot brightened by the full amplitude
        for (circle, region) in plate.circles.iter_mut().zip(regions) {
            if region.is_some() {
                let lab = circle.color.to_lab();
                circle.color = Lab::new(lab.l + super::super::JITTER_L, lab.a, lab.b).to_srgb8();
            }
        }
        let report = validate_plate(&plate);
        assert!(!report.passed);
        assert!(report.mean_l_gap.abs() > L_LEAK);
        assert!(report.failures.iter().any(|f| f.contains("luminance leak")));
    }
}
