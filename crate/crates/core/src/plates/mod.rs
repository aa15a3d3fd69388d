//! Procedurally generated pseudoisochromatic plates.
//!
//! A plate is a disk packed with dots. Dots whose centers fall inside a digit
//! glyph take the figure color, the rest the ground color, and every dot gets a
//! zero-mean lightness jitter so that luminance cannot give the digit away. The
//! color pairs are chosen by search and carry certificates: their CIE76
//! difference for normal vision and under the simulated deficiency.

mod compose;
mod font;
mod packing;
mod pair;
mod svg;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{CvdKind, CvdProfile, Dichromat, Srgb8};

pub use compose::compose_plate;
pub use font::{glyph_mask, GlyphMask, Placement};
pub use packing::{pack_disk, Disk, Packing, PackingParams};
pub use pair::{certify, pick_demo_pair, pick_vanishing_pair, ColorPairCertificate};
pub use svg::render_svg;
pub(crate) use validate::simulated_difference;
pub use validate::{population_stats, validate_plate, GlyphCheck, PlateReport, PopulationStats};

/// Minimum normal-vision difference between figure and ground.
pub const D_HIGH: f64 = 30.0;
/// Maximum lightness jitter applied to each dot, in L* units.
pub const JITTER_L: f64 = 6.0;
/// Maximum allowed gap between mean figure and mean ground lightness.
pub const L_LEAK: f64 = 2.0;
/// A viewer reads a glyph when the simulated figure/ground difference reaches this.
pub const V_THRESH: f64 = 10.0;

/// Maximum simulated difference for a vanishing pair at `difficulty`.
pub fn d_low(difficulty: f64) -> f64 {
    4.0 + 8.0 * difficulty
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlateError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(
        "no {target:?} pair found in {samples} samples; best had de_normal {best_normal:.2}, \
         de_simulated {best_simulated:.2}"
    )]
    SearchExhausted {
        target: Option<Dichromat>,
        samples: usize,
        best_normal: f64,
        best_simulated: f64,
    },
    #[error("glyph {index} covers only {count} dots")]
    SparseGlyph { index: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Demo,
    Vanishing,
    Diagnostic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateDesign {
    pub kind: DesignKind,
    pub target: Option<Dichromat>,
    pub difficulty: f64,
}

impl PlateDesign {
    /// Readable by everyone; opens a battery.
    pub fn demo() -> Self {
        PlateDesign {
            kind: DesignKind::Demo,
            target: None,
            difficulty: 0.0,
        }
    }

    pub fn vanishing(target: Dichromat, difficulty: f64) -> Self {
        PlateDesign {
            kind: DesignKind::Vanishing,
            target: Some(target),
            difficulty,
        }
    }

    /// Two digits: the first vanishes for protans, the second for deutans.
    pub fn diagnostic() -> Self {
        PlateDesign {
            kind: DesignKind::Diagnostic,
            target: None,
            difficulty: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), PlateError> {
        if !(0.0..=1.0).contains(&self.difficulty) {
            return Err(PlateError::Parameter(format!(
                "difficulty {} outside [0, 1]",
                self.difficulty
            )));
        }
        match (self.kind, self.target) {
            (DesignKind::Vanishing, None) => {
                Err(PlateError::Parameter("vanishing design needs a target".into()))
            }
            (DesignKind::Demo | DesignKind::Diagnostic, Some(_)) => Err(PlateError::Parameter(
                format!("{:?} design takes no target", self.kind),
            )),
            _ => Ok(()),
        }
    }

    pub fn is_red_green_vanishing(&self) -> bool {
        self.kind == DesignKind::Vanishing
            && matches!(self.target, Some(Dichromat::Protan | Dichromat::Deutan))
    }
}

/// Viewer classes an answer key distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewerClass {
    Normal,
    Protan,
    Deutan,
    Tritan,
}

impl ViewerClass {
    pub const ALL: [ViewerClass; 4] = [
        ViewerClass::Normal,
        ViewerClass::Protan,
        ViewerClass::Deutan,
        ViewerClass::Tritan,
    ];

    pub fn profile(self) -> CvdProfile {
        match self {
            ViewerClass::Normal => CvdProfile::NORMAL,
            ViewerClass::Protan => Dichromat::Protan.profile(),
            ViewerClass::Deutan => Dichromat::Deutan.profile(),
            ViewerClass::Tritan => Dichromat::Tritan.profile(),
        }
    }

    pub fn from_dichromat(d: Dichromat) -> Self {
        match d {
            Dichromat::Protan => ViewerClass::Protan,
            Dichromat::Deutan => ViewerClass::Deutan,
            Dichromat::Tritan => ViewerClass::Tritan,
        }
    }
}

impl fmt::Display for ViewerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind: CvdKind = self.profile().kind;
        f.write_str(kind.as_str())
    }
}

pub type AnswerKey = BTreeMap<ViewerClass, String>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Glyph {
    pub digit: char,
    pub placement: Placement,
}

impl Glyph {
    pub fn mask(&self) -> GlyphMask {
        glyph_mask(self.digit, self.placement).expect("plate glyphs are validated at composition")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub color: Srgb8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IshiharaPlate {
    pub id: String,
    pub design: PlateDesign,
    pub seed: u64,
    pub glyphs: Vec<Glyph>,
    pub circles: Vec<Circle>,
    pub answer_key: AnswerKey,
    pub certificates: Vec<ColorPairCertificate>,
}

impl IshiharaPlate {
    /// The printed digits, i.e. what a normal viewer reads.
    pub fn digits(&self) -> String {
        self.glyphs.iter().map(|g| g.digit).collect()
    }

    pub fn expected(&self, viewer: ViewerClass) -> &str {
        self.answer_key.get(&viewer).map(String::as_str).unwrap_or("")
    }

    /// Glyph index owning each circle, `None` for ground dots.
    pub fn regions(&self) -> Vec<Option<usize>> {
        let masks: Vec<GlyphMask> = self.glyphs.iter().map(Glyph::mask).collect();
        self.circles
            .iter()
            .map(|c| masks.iter().position(|m| m.contains(c.cx, c.cy)))
            .collect()
    }
}
