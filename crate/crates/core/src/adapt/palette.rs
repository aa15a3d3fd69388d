use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::AdaptError;
use crate::color::{delta_e, simulated_lab, CvdProfile, Srgb8};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub role: String,
    #[serde(rename = "srgb")]
    pub color: Srgb8,
    /// Pinned colors (brand colors, say) are never moved by the optimizer.
    #[serde(default)]
    pub pinned: bool,
}

impl PaletteEntry {
    pub fn new(role: impl Into<String>, color: Srgb8) -> Self {
        PaletteEntry {
            role: role.into(),
            color,
            pinned: false,
        }
    }

    pub fn pinned(mut self) -> Self {
        self.pinned = true;
        self
    }
}

/// Named interface colors. Roles are unique and there are at least two entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PaletteFile", into = "PaletteFile")]
pub struct Palette {
    name: String,
    entries: Vec<PaletteEntry>,
}

#[derive(Serialize, Deserialize)]
struct PaletteFile {
    name: String,
    colors: Vec<PaletteEntry>,
}

impl TryFrom<PaletteFile> for Palette {
    type Error = AdaptError;

    fn try_from(file: PaletteFile) -> Result<Self, Self::Error> {
        Palette::new(file.name, file.colors)
    }
}

impl From<Palette> for PaletteFile {
    fn from(p: Palette) -> Self {
        PaletteFile {
            name: p.name,
            colors: p.entries,
        }
    }
}

impl Palette {
    pub fn new(name: impl Into<String>, entries: Vec<PaletteEntry>) -> Result<Self, AdaptError> {
        if entries.len() < 2 {
            return Err(AdaptError::TooFewEntries(entries.len()));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.role.as_str()) {
                return Err(AdaptError::DuplicateRole(e.role.clone()));
            }
        }
        Ok(Palette {
            name: name.into(),
            entries,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[PaletteEntry] {
        &self.entries
    }

    pub fn colors(&self) -> impl Iterator<Item = Srgb8> + '_ {
        self.entries.iter().map(|e| e.color)
    }

    pub fn get(&self, role: &str) -> Option<Srgb8> {
        self.entries.iter().find(|e| e.role == role).map(|e| e.color)
    }

    /// Same roles in the same order.
    pub fn same_roles(&self, other: &Palette) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| a.role == b.role)
    }

    pub(crate) fn with_colors(&self, colors: &[Srgb8]) -> Palette {
        let entries = self
            .entries
            .iter()
            .zip(colors)
            .map(|(e, &color)| PaletteEntry { color, ..e.clone() })
            .collect();
        Palette {
            name: self.name.clone(),
            entries,
        }
    }
}

/// Smallest simulated difference over all pairs of palette colors.
pub fn score_palette(palette: &Palette, profile: CvdProfile) -> f64 {
    let labs: Vec<_> = palette.colors().map(|c| simulated_lab(c, profile)).collect();
    let mut best = f64::INFINITY;
    for i in 0..labs.len() {
        for j in i + 1..labs.len() {
            best = best.min(delta_e(labs[i], labs[j]));
        }
    }
    best
}

/// Index and score of the best-scoring scheme; the earliest wins ties.
pub fn select_scheme(schemes: &[Palette], profile: CvdProfile) -> Result<(usize, f64), AdaptError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, scheme) in schemes.iter().enumerate() {
        let score = score_palette(scheme, profile);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.ok_or(AdaptError::NoSchemes)
}
