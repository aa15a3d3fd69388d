use rand::Rng;

use super::pair::{pick_demo_pair, random_ground, search_pair, visible, PairRequest, DECISIVE_MARGIN};
use super::{
    glyph_mask, pack_disk, AnswerKey, Circle, ColorPairCertificate, DesignKind, Glyph,
    IshiharaPlate, PackingParams, Placement, PlateDesign, PlateError, ViewerClass, JITTER_L,
};
use crate::color::{Dichromat, Lab, Srgb8};
use crate::rng::{self, PlateRng};

const MIN_GLYPH_DOTS: usize = 8;
const MAX_GLYPHS: usize = 3;

/// Builds a plate: packs dots, assigns them to glyphs by center, picks certified
/// colors for the design, jitters lightness and derives the answer key.
pub fn compose_plate(
    design: PlateDesign,
    digits: &[char],
    seed: u64,
) -> Result<IshiharaPlate, PlateError> {
    design.validate()?;
    match design.kind {
        DesignKind::Diagnostic if digits.len() != 2 => {
            return Err(PlateError::Parameter(
                "diagnostic plates carry exactly two digits".into(),
            ))
        }
        DesignKind::Diagnostic if digits[0] == digits[1] => {
            return Err(PlateError::Parameter(
                "diagnostic digits must differ to tell the readings apart".into(),
            ))
        }
        _ if digits.is_empty() || digits.len() > MAX_GLYPHS => {
            return Err(PlateError::Parameter(format!(
                "plates carry 1 to {MAX_GLYPHS} digits, got {}",
                digits.len()
            )))
        }
        _ => {}
    }

    let glyphs: Vec<Glyph> = digits
        .iter()
        .zip(Placement::row(digits.len()))
        .map(|(&digit, placement)| glyph_mask(digit, placement).map(|_| Glyph { digit, placement }))
        .collect::<Result<_, _>>()?;
    let masks: Vec<_> = glyphs.iter().map(Glyph::mask).collect();

    let packing = pack_disk(rng::derive_seed(seed, 0), &PackingParams::default())?;
    let regions: Vec<Option<usize>> = packing
        .disks
        .iter()
        .map(|d| masks.iter().position(|m| m.contains(d.cx, d.cy)))
        .collect();
    for index in 0..glyphs.len() {
        let count = regions.iter().filter(|r| **r == Some(index)).count();
        if count < MIN_GLYPH_DOTS {
            return Err(PlateError::SparseGlyph { index, count });
        }
    }

    let mut pair_rng = rng::seeded(rng::derive_seed(seed, 1));
    let (figures, ground, certificates) = match design.kind {
        DesignKind::Demo => {
            let certs = pick_demo_pair(&mut pair_rng)?;
            (vec![certs[0].figure; glyphs.len()], certs[0].ground, certs)
        }
        DesignKind::Vanishing => {
            let target = design.target.expect("validated");
            let cert = search_pair(&PairRequest::vanishing(target, design.difficulty), &mut pair_rng)?;
            (vec![cert.figure; glyphs.len()], cert.ground, vec![cert])
        }
        DesignKind::Diagnostic => {
            let (protan, deutan) = diagnostic_pairs(design.difficulty, &mut pair_rng)?;
            (vec![protan.figure, deutan.figure], protan.ground, vec![protan, deutan])
        }
    };

    let circles = paint(&packing.disks, &regions, &figures, ground, rng::derive_seed(seed, 2));
    let answer_key = answer_key(&design, &glyphs, &figures, ground);

    Ok(IshiharaPlate {
        id: format!("plate-{seed:016x}"),
        design,
        seed,
        glyphs,
        circles,
        answer_key,
        certificates,
    })
}

const DIAGNOSTIC_GROUNDS: usize = 400;
const DIAGNOSTIC_SAMPLES_PER_GROUND: usize = 1_500;

/// A protan-vanishing and a deutan-vanishing pair sharing one ground color,
/// each readable by the other red-green dichromacy.
fn diagnostic_pairs(
    difficulty: f64,
    rng: &mut PlateRng,
) -> Result<(ColorPairCertificate, ColorPairCertificate), PlateError> {
    let mut last_error = None;
    let mut grounds = 0;
    while grounds < DIAGNOSTIC_GROUNDS {
        let Some(ground) = random_ground(rng) else { continue };
        grounds += 1;
        let request = |target, other| PairRequest {
            target,
            difficulty,
            ground: Some(ground),
            must_see: vec![other],
            // deutan-vanishing pairs rarely reach protans far above threshold
            see_margin: DECISIVE_MARGIN,
            max_samples: DIAGNOSTIC_SAMPLES_PER_GROUND,
        };
        let pairs = search_pair(&request(Dichromat::Protan, Dichromat::Deutan), rng).and_then(|protan| {
            search_pair(&request(Dichromat::Deutan, Dichromat::Protan), rng).map(|deutan| (protan, deutan))
        });
        match pairs {
            Ok(pairs) => return Ok(pairs),
            Err(e) => last_error = Some(e),
        }
    }
    Err(last_error.expect("at least one ground was tried"))
}

/// Colors every dot with its population's base color plus lightness jitter.
/// Jitter is drawn i.i.d. from `[-JITTER_L, JITTER_L]` and then centered per
/// population so figure and ground keep their base mean lightness.
fn paint(
    disks: &[super::Disk],
    regions: &[Option<usize>],
    figures: &[Srgb8],
    ground: Srgb8,
    seed: u64,
) -> Vec<Circle> {
    let mut rng = rng::seeded(seed);
    let mut jitter: Vec<f64> = disks.iter().map(|_| rng.random_range(-JITTER_L..=JITTER_L)).collect();
    let populations: Vec<Option<usize>> = std::iter::once(None)
        .chain((0..figures.len()).map(Some))
        .collect();
    for population in populations {
        let members: Vec<usize> = (0..disks.len()).filter(|&i| regions[i] == population).collect();
        if members.is_empty() {
            continue;
        }
        let mean = members.iter().map(|&i| jitter[i]).sum::<f64>() / members.len() as f64;
        for i in members {
            jitter[i] -= mean;
        }
    }
    let ground_lab = ground.to_lab();
    let figure_labs: Vec<Lab> = figures.iter().map(|f| f.to_lab()).collect();
    disks
        .iter()
        .zip(regions)
        .zip(jitter)
        .map(|((disk, region), dl)| {
            let base = region.map_or(ground_lab, |g| figure_labs[g]);
            Circle {
                cx: disk.cx,
                cy: disk.cy,
                radius: disk.radius,
                color: Lab::new(base.l + dl, base.a, base.b).to_srgb8(),
            }
        })
        .collect()
}

fn answer_key(design: &PlateDesign, glyphs: &[Glyph], figures: &[Srgb8], ground: Srgb8) -> AnswerKey {
    ViewerClass::ALL
        .into_iter()
        .map(|viewer| {
            let answer: String = match (design.kind, viewer) {
                (_, ViewerClass::Normal) | (DesignKind::Demo, _) => {
                    glyphs.iter().map(|g| g.digit).collect()
                }
                (DesignKind::Vanishing, v) if design.target.map(ViewerClass::from_dichromat) == Some(v) => {
                    String::new()
                }
                _ => glyphs
                    .iter()
                    .zip(figures)
                    .filter(|(_, &figure)| visible(figure, ground, viewer))
                    .map(|(g, _)| g.digit)
                    .collect(),
            };
            (viewer, answer)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn answer_keys_follow_design() {
        let demo = compose_plate(PlateDesign::demo(), &['1', '2'], 1).unwrap();
        for viewer in ViewerClass::ALL {
            assert_eq!(demo.expected(viewer), "12");
        }

        let vanishing = compose_plate(PlateDesign::vanishing(Dichromat::Deutan, 0.0), &['7'], 2).unwrap();
        assert_eq!(vanishing.expected(ViewerClass::Normal), "7");
        assert_eq!(vanishing.expected(ViewerClass::Deutan), "");
        assert_eq!(vanishing.expected(ViewerClass::Tritan), "7");

        let diagnostic = compose_plate(PlateDesign::diagnostic(), &['4', '9'], 3).unwrap();
        assert_eq!(diagnostic.expected(ViewerClass::Normal), "49");
        assert_eq!(diagnostic.expected(ViewerClass::Protan), "9");
        assert_eq!(diagnostic.expected(ViewerClass::Deutan), "4");
        assert_eq!(diagnostic.certificates.len(), 2);
        assert_eq!(diagnostic.certificates[0].ground, diagnostic.certificates[1].ground);
    }

    #[test]
    fn rejects_bad_digit_lists() {
        assert!(compose_plate(PlateDesign::demo(), &[], 1).is_err());
        assert!(compose_plate(PlateDesign::diagnostic(), &['1'], 1).is_err());
        assert!(compose_plate(PlateDesign::diagnostic(), &['3', '3'], 1).is_err());
        assert!(compose_plate(PlateDesign::demo(), &['a'], 1).is_err());
        let bad = PlateDesign {
            kind: DesignKind::Vanishing,
            target: None,
            difficulty: 0.0,
        };
        assert!(compose_plate(bad, &['1'], 1).is_err());
    }

    #[test]
    fn composition_is_deterministic() {
        let design = PlateDesign::vanishing(Dichromat::Protan, 1.0 / 3.0);
        assert_eq!(
            compose_plate(design, &['5', '2'], 77).unwrap(),
            compose_plate(design, &['5', '2'], 77).unwrap()
        );
    }
}
