//! Searching figure/ground color pairs with certified differences.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{d_low, PlateError, ViewerClass, D_HIGH, JITTER_L, V_THRESH};
use crate::color::{delta_e, simulated_lab, CvdProfile, Dichromat, Lab, Srgb8};
use crate::rng::{self, PlateRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorPairCertificate {
    pub figure: Srgb8,
    pub ground: Srgb8,
    pub de_normal: f64,
    pub de_simulated: f64,
    pub profile: CvdProfile,
}

/// Computes the certificate of `(figure, ground)` under `profile`.
pub fn certify(figure: Srgb8, ground: Srgb8, profile: CvdProfile) -> ColorPairCertificate {
    ColorPairCertificate {
        figure,
        ground,
        de_normal: delta_e(figure.to_lab(), ground.to_lab()),
        de_simulated: delta_e(simulated_lab(figure, profile), simulated_lab(ground, profile)),
        profile,
    }
}

pub(crate) const MAX_SAMPLES: usize = 200_000;
// Margins keep certificates valid after jitter and dot averaging.
const NORMAL_MARGIN: f64 = 1.0;
const SIMULATED_MARGIN: f64 = 0.75;
// Viewers that must read a pair see it at least this far above V_THRESH.
const SEE_MARGIN: f64 = 2.0;
// Every other viewer class is kept at least this far from V_THRESH.
pub(crate) const DECISIVE_MARGIN: f64 = 1.0;
const PAIR_L_TOLERANCE: f64 = 0.5;
const FIGURES_PER_GROUND: usize = 40;

#[derive(Debug, Clone)]
pub(crate) struct PairRequest {
    pub target: Dichromat,
    pub difficulty: f64,
    pub ground: Option<Srgb8>,
    pub must_see: Vec<Dichromat>,
    pub see_margin: f64,
    pub max_samples: usize,
}

impl PairRequest {
    pub fn vanishing(target: Dichromat, difficulty: f64) -> Self {
        let must_see = match target {
            Dichromat::Protan | Dichromat::Deutan => vec![Dichromat::Tritan],
            Dichromat::Tritan => vec![Dichromat::Protan, Dichromat::Deutan],
        };
        PairRequest {
            target,
            difficulty,
            ground: None,
            must_see,
            see_margin: SEE_MARGIN,
            max_samples: MAX_SAMPLES,
        }
    }
}

/// Whether jittered variants of `lab` stay displayable.
fn jitter_safe(lab: Lab) -> bool {
    let spread = JITTER_L + 1.0;
    [-spread, 0.0, spread]
        .iter()
        .all(|dl| Lab::new(lab.l + dl, lab.a, lab.b).to_linear().in_gamut())
}

pub(crate) fn random_ground(rng: &mut PlateRng) -> Option<Srgb8> {
    let lab = Lab::new(
        rng.random_range(40.0..70.0),
        rng.random_range(-45.0..45.0),
        rng.random_range(-45.0..45.0),
    );
    jitter_safe(lab).then(|| lab.to_srgb8())
}

/// Direction in the a*b* plane along which the simulated color changes least.
fn confusion_angle(ground: Lab, profile: CvdProfile) -> f64 {
    let h = 0.5;
    let sim = |lab: Lab| simulated_lab(lab.to_srgb8(), profile).to_array();
    let column = |da: f64, db: f64| {
        let plus = sim(Lab::new(ground.l, ground.a + da, ground.b + db));
        let minus = sim(Lab::new(ground.l, ground.a - da, ground.b - db));
        [0, 1, 2].map(|k| (plus[k] - minus[k]) / (2.0 * h))
    };
    let ja = column(h, 0.0);
    let jb = column(0.0, h);
    let dot = |x: &[f64; 3], y: &[f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    // smallest eigenvector of the 2x2 normal matrix
    let (p, q, r) = (dot(&ja, &ja), dot(&ja, &jb), dot(&jb, &jb));
    let lambda = 0.5 * (p + r) - (0.25 * (p - r).powi(2) + q * q).sqrt();
    if q.abs() > 1e-12 {
        (lambda - p).atan2(q)
    } else if p <= r {
        0.0
    } else {
        std::f64::consts::FRAC_PI_2
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cert: ColorPairCertificate,
    violation: f64,
}

fn evaluate(request: &PairRequest, figure: Srgb8, ground: Srgb8) -> Candidate {
    let cert = certify(figure, ground, request.target.profile());
    let (fl, gl) = (figure.to_lab(), ground.to_lab());
    let upper = d_low(request.difficulty) - SIMULATED_MARGIN;
    let lower = 8.0 * request.difficulty;
    let mut violation = (D_HIGH + NORMAL_MARGIN - cert.de_normal).max(0.0)
        + (cert.de_simulated - upper).max(0.0)
        + (lower - cert.de_simulated).max(0.0)
        + ((fl.l - gl.l).abs() - PAIR_L_TOLERANCE).max(0.0);
    if violation > 0.0 {
        return Candidate { cert, violation };
    }
    for other in Dichromat::ALL.into_iter().filter(|&d| d != request.target) {
        let de = delta_e(simulated_lab(figure, other.profile()), simulated_lab(ground, other.profile()));
        if request.must_see.contains(&other) {
            violation += (V_THRESH + request.see_margin - de).max(0.0);
        } else {
            violation += (DECISIVE_MARGIN - (de - V_THRESH).abs()).max(0.0);
        }
    }
    Candidate { cert, violation }
}

/// Rejection sampling around the confusion direction of each sampled ground.
pub(crate) fn search_pair(
    request: &PairRequest,
    rng: &mut PlateRng,
) -> Result<ColorPairCertificate, PlateError> {
    let mut best: Option<Candidate> = None;
    let mut samples = 0;
    while samples < request.max_samples {
        let ground = match request.ground {
            Some(g) => g,
            None => match random_ground(rng) {
                Some(g) => g,
                None => {
                    samples += 1;
                    continue;
                }
            },
        };
        let ground_lab = ground.to_lab();
        let axis = confusion_angle(ground_lab, request.target.profile());
        for _ in 0..FIGURES_PER_GROUND {
            samples += 1;
            let flip = if rng.random::<bool>() { std::f64::consts::PI } else { 0.0 };
            let theta = axis + flip + rng.random_range(-0.6..0.6);
            let t = rng.random_range(D_HIGH + 1.5..D_HIGH + 20.0);
            let figure_lab = Lab::new(
                ground_lab.l,
                ground_lab.a + t * theta.cos(),
                ground_lab.b + t * theta.sin(),
            );
            if !jitter_safe(figure_lab) {
                continue;
            }
            let candidate = evaluate(request, figure_lab.to_srgb8(), ground);
            if candidate.violation == 0.0 {
                return Ok(candidate.cert);
            }
            if best.is_none_or(|b| candidate.violation < b.violation) {
                best = Some(candidate);
            }
        }
    }
    let (best_normal, best_simulated) = best
        .map(|b| (b.cert.de_normal, b.cert.de_simulated))
        .unwrap_or((f64::NAN, f64::NAN));
    Err(PlateError::SearchExhausted {
        target: Some(request.target),
        samples,
        best_normal,
        best_simulated,
    })
}

/// Finds a pair that normal viewers see with `de_normal >= D_HIGH` and a full
/// `target` dichromat barely distinguishes: `de_simulated <= d_low(difficulty)`.
/// Harder plates keep some residual difference (at least `8 * difficulty`).
pub fn pick_vanishing_pair(
    target: CvdProfile,
    difficulty: f64,
    seed: u64,
) -> Result<ColorPairCertificate, PlateError> {
    let dichromat = target
        .kind
        .dichromat()
        .filter(|_| target.severity == 1.0)
        .ok_or_else(|| {
            PlateError::Parameter(format!(
                "vanishing pairs target a full dichromat, got {:?}/{}",
                target.kind, target.severity
            ))
        })?;
    if !(0.0..=1.0).contains(&difficulty) {
        return Err(PlateError::Parameter(format!("difficulty {difficulty} outside [0, 1]")));
    }
    search_pair(
        &PairRequest::vanishing(dichromat, difficulty),
        &mut rng::seeded(seed),
    )
}

const DEMO_CANDIDATES: usize = 600;

/// Pair visible to every viewer class: maximizes the smallest simulated
/// difference over the three dichromacies subject to `de_normal >= D_HIGH`.
/// Returns one certificate per dichromacy.
pub fn pick_demo_pair(rng: &mut PlateRng) -> Result<Vec<ColorPairCertificate>, PlateError> {
    let mut best: Option<(f64, Srgb8, Srgb8)> = None;
    let mut valid = 0;
    let mut samples = 0;
    while valid < DEMO_CANDIDATES && samples < MAX_SAMPLES {
        samples += 1;
        let Some(ground) = random_ground(rng) else { continue };
        let ground_lab = ground.to_lab();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let t = rng.random_range(D_HIGH + 1.5..D_HIGH + 30.0);
        let figure_lab = Lab::new(
            ground_lab.l,
            ground_lab.a + t * theta.cos(),
            ground_lab.b + t * theta.sin(),
        );
        if !jitter_safe(figure_lab) {
            continue;
        }
        let figure = figure_lab.to_srgb8();
        let fl = figure.to_lab();
        if delta_e(fl, ground_lab) < D_HIGH + NORMAL_MARGIN
            || (fl.l - ground_lab.l).abs() > PAIR_L_TOLERANCE
        {
            continue;
        }
        valid += 1;
        let worst = Dichromat::ALL
            .iter()
            .map(|d| certify(figure, ground, d.profile()).de_simulated)
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(w, _, _)| worst > w) {
            best = Some((worst, figure, ground));
        }
    }
    match best {
        Some((worst, figure, ground)) if worst >= V_THRESH + SEE_MARGIN => Ok(Dichromat::ALL
            .iter()
            .map(|d| certify(figure, ground, d.profile()))
            .collect()),
        other => Err(PlateError::SearchExhausted {
            target: None,
            samples,
            best_normal: other.map_or(f64::NAN, |(_, f, g)| delta_e(f.to_lab(), g.to_lab())),
            best_simulated: other.map_or(f64::NAN, |(w, _, _)| w),
        }),
    }
}

/// Whether `viewer` reads a glyph drawn with this pair.
pub(crate) fn visible(figure: Srgb8, ground: Srgb8, viewer: ViewerClass) -> bool {
    certify(figure, ground, viewer.profile()).de_simulated >= V_THRESH
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::CvdKind;

    #[test]
    fn certificates_meet_thresholds() {
        for (i, target) in Dichromat::ALL.into_iter().enumerate() {
            for (j, difficulty) in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0].into_iter().enumerate() {
                let seed = (i * 10 + j) as u64;
                let cert = pick_vanishing_pair(target.profile(), difficulty, seed).unwrap();
                assert!(cert.de_normal >= D_HIGH, "{cert:?}");
                assert!(cert.de_simulated <= d_low(difficulty), "{cert:?}");
                assert_eq!(cert.profile, target.profile());
            }
        }
    }

    #[test]
    fn pair_search_is_deterministic() {
        let a = pick_vanishing_pair(Dichromat::Deutan.profile(), 0.5, 9).unwrap();
        let b = pick_vanishing_pair(Dichromat::Deutan.profile(), 0.5, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_partial_targets() {
        let partial = CvdProfile::new(CvdKind::Deutan, 0.5).unwrap();
        assert!(pick_vanishing_pair(partial, 0.0, 1).is_err());
        assert!(pick_vanishing_pair(CvdProfile::NORMAL, 0.0, 1).is_err());
        assert!(pick_vanishing_pair(Dichromat::Protan.profile(), 1.5, 1).is_err());
    }

    #[test]
    fn demo_pair_is_seen_by_everyone() {
        let certs = pick_demo_pair(&mut rng::seeded(5)).unwrap();
        assert_eq!(certs.len(), 3);
        for cert in certs {
            assert!(cert.de_normal >= D_HIGH);
            assert!(cert.de_simulated >= V_THRESH);
        }
    }
}
