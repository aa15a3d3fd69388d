use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{validate_answer, Battery, EngineError, Response};
use crate::color::{CvdKind, CvdProfile, Dichromat};
use crate::plates::{DesignKind, ViewerClass};

/// Red-green vanishing errors at which a viewer counts as red-green deficient.
pub const RED_GREEN_ERRORS: usize = 3;
/// Tritan vanishing errors at which a viewer counts as tritan.
pub const TRITAN_ERRORS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Normal,
    Protan,
    Deutan,
    Tritan,
    RedGreenUnspecified,
    Unclassified,
}

impl ClassKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassKind::Normal => "normal",
            ClassKind::Protan => "protan",
            ClassKind::Deutan => "deutan",
            ClassKind::Tritan => "tritan",
            ClassKind::RedGreenUnspecified => "red_green_unspecified",
            ClassKind::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateOutcome {
    pub plate_id: String,
    pub expected: String,
    pub given: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: ClassKind,
    pub severity: f64,
    pub confidence: f64,
    pub per_plate: Vec<PlateOutcome>,
}

impl Classification {
    /// Profile to adapt for, `None` when there is no evidence to act on.
    /// An unspecified red-green result adapts as deutan, the most common type.
    pub fn adaptation_profile(&self) -> Option<CvdProfile> {
        let kind = match self.kind {
            ClassKind::Normal => return Some(CvdProfile::NORMAL),
            ClassKind::Unclassified => return None,
            ClassKind::Protan => CvdKind::Protan,
            ClassKind::Deutan | ClassKind::RedGreenUnspecified => CvdKind::Deutan,
            ClassKind::Tritan => CvdKind::Tritan,
        };
        CvdProfile::new(kind, self.severity).ok()
    }
}

fn fraction(errors: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        errors as f64 / total as f64
    }
}

/// Scores a completed battery.
///
/// A reading is correct when it equals the printed digits. Rules, first match wins:
/// 1. wrong demo plate: unclassified;
/// 2. at least `RED_GREEN_ERRORS` red-green vanishing errors: red-green deficient,
///    split by diagnostic votes (reading exactly the protan answer key votes
///    protan, the deutan key votes deutan); a strict majority decides, otherwise
///    unspecified;
/// 3. at least `TRITAN_ERRORS` tritan errors: tritan;
/// 4. otherwise normal.
///
/// Severity is the error fraction on the vanishing plates of the found type
/// (all red-green plates when unspecified).
pub fn classify(battery: &Battery, responses: &[Response]) -> Result<Classification, EngineError> {
    let mut by_plate: HashMap<&str, &str> = HashMap::with_capacity(responses.len());
    for r in responses {
        if battery.plate(&r.plate_id).is_none() {
            return Err(EngineError::UnknownPlate(r.plate_id.clone()));
        }
        validate_answer(&r.answer)?;
        if by_plate.insert(&r.plate_id, &r.answer).is_some() {
            return Err(EngineError::DuplicateResponse(r.plate_id.clone()));
        }
    }

    let mut per_plate = Vec::with_capacity(battery.plates.len());
    let mut demo_ok = true;
    let mut errors: HashMap<Dichromat, (usize, usize)> = HashMap::new();
    let (mut protan_votes, mut deutan_votes) = (0usize, 0usize);
    for plate in &battery.plates {
        let given = *by_plate
            .get(plate.id.as_str())
            .ok_or_else(|| EngineError::MissingResponse(plate.id.clone()))?;
        let expected = plate.expected(ViewerClass::Normal);
        let correct = given == expected;
        match plate.design.kind {
            DesignKind::Demo => demo_ok &= correct,
            DesignKind::Vanishing => {
                let target = plate.design.target.expect("vanishing plates have a target");
                let entry = errors.entry(target).or_default();
                entry.1 += 1;
                if !correct {
                    entry.0 += 1;
                }
            }
            DesignKind::Diagnostic => {
                let protan = plate.expected(ViewerClass::Protan);
                let deutan = plate.expected(ViewerClass::Deutan);
                if protan != deutan {
                    if given == protan {
                        protan_votes += 1;
                    } else if given == deutan {
                        deutan_votes += 1;
                    }
                }
            }
        }
        per_plate.push(PlateOutcome {
            plate_id: plate.id.clone(),
            expected: expected.to_string(),
            given: given.to_string(),
            correct,
        });
    }

    let group = |d: Dichromat| errors.get(&d).copied().unwrap_or((0, 0));
    let (protan_errors, protan_total) = group(Dichromat::Protan);
    let (deutan_errors, deutan_total) = group(Dichromat::Deutan);
    let (tritan_errors, tritan_total) = group(Dichromat::Tritan);
    let red_green_errors = protan_errors + deutan_errors;

    let (kind, severity, confidence) = if !demo_ok {
        (ClassKind::Unclassified, 0.0, 0.0)
    } else if red_green_errors >= RED_GREEN_ERRORS {
        let cast = protan_votes + deutan_votes;
        let confidence = fraction(protan_votes.abs_diff(deutan_votes), cast);
        if protan_votes > deutan_votes {
            (ClassKind::Protan, fraction(protan_errors, protan_total), confidence)
        } else if deutan_votes > protan_votes {
            (ClassKind::Deutan, fraction(deutan_errors, deutan_total), confidence)
        } else {
            let severity = fraction(red_green_errors, protan_total + deutan_total);
            (ClassKind::RedGreenUnspecified, severity, confidence)
        }
    } else if tritan_errors >= TRITAN_ERRORS {
        let confidence = if tritan_errors == tritan_total {
            1.0
        } else {
            fraction(tritan_errors, tritan_total)
        };
        (ClassKind::Tritan, fraction(tritan_errors, tritan_total), confidence)
    } else {
        (ClassKind::Normal, 0.0, 1.0)
    };

    Ok(Classification {
        kind,
        severity,
        confidence,
        per_plate,
    })
}
