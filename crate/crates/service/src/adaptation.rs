//! Choosing the palette a classified user starts with.

use std::path::{Path, PathBuf};

use chromascreen::adapt::{optimize_palette, score_palette, select_scheme, AdaptationResult, OptimizeOptions, Palette};
use chromascreen::color::CvdProfile;
use chromascreen::engine::Classification;
use serde::{Deserialize, Serialize};

const DEFAULT_PALETTE: &str = include_str!("../data/default-palette.json");
const BUILTIN_SCHEMES: [&str; 4] = [
    include_str!("../data/schemes/01-traffic-light.json"),
    include_str!("../data/schemes/02-blue-orange.json"),
    include_str!("../data/schemes/03-magenta-teal.json"),
    include_str!("../data/schemes/04-high-contrast.json"),
];

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// The default palette plus the alternative schemes on offer.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    default: Palette,
    schemes: Vec<Palette>,
}

pub fn read_palette(path: &Path) -> Result<Palette, CatalogError> {
    let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CatalogError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Every `*.json` palette in `dir`, ordered by file name.
pub fn read_scheme_dir(dir: &Path) -> Result<Vec<Palette>, CatalogError> {
    let io = |source| CatalogError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths.iter().map(|p| read_palette(p)).collect()
}

impl Catalog {
    pub fn new(default: Palette, schemes: Vec<Palette>) -> Self {
        Catalog { default, schemes }
    }

    pub fn builtin() -> Self {
        let parse = |s: &str| serde_json::from_str::<Palette>(s).expect("bundled palettes are valid");
        Catalog {
            default: parse(DEFAULT_PALETTE),
            schemes: BUILTIN_SCHEMES.iter().map(|s| parse(s)).collect(),
        }
    }

    /// Built-in palettes with either part replaced from disk.
    pub fn load(default: Option<&Path>, schemes: Option<&Path>) -> Result<Self, CatalogError> {
        let mut catalog = Catalog::builtin();
        if let Some(path) = default {
            catalog.default = read_palette(path)?;
        }
        if let Some(dir) = schemes {
            catalog.schemes = read_scheme_dir(dir)?;
        }
        Ok(catalog)
    }

    pub fn default_palette(&self) -> &Palette {
        &self.default
    }

    pub fn schemes(&self) -> &[Palette] {
        &self.schemes
    }

    /// The default palette first, then the schemes.
    pub fn candidates(&self) -> Vec<Palette> {
        std::iter::once(self.default.clone()).chain(self.schemes.iter().cloned()).collect()
    }

    pub fn adapt(&self, classification: &Classification) -> SessionAdaptation {
        let Some(profile) = classification.adaptation_profile() else {
            return SessionAdaptation {
                profile: None,
                retest: true,
                scheme: self.default.name().to_string(),
                scheme_index: 0,
                result: unchanged(&self.default, CvdProfile::NORMAL),
            };
        };
        let candidates = self.candidates();
        let (index, score) = if profile.is_identity() {
            (0, score_palette(&self.default, profile))
        } else {
            select_scheme(&candidates, profile).expect("the default palette is always a candidate")
        };
        let chosen = &candidates[index];
        let result = match optimize_palette(chosen, profile, &OptimizeOptions::default()) {
            // the optimizer trades distinguishability for fidelity; never hand back less than selection gave
            Ok(r) if r.final_score >= score => r,
            _ => unchanged(chosen, profile),
        };
        SessionAdaptation {
            profile: Some(profile),
            retest: false,
            scheme: chosen.name().to_string(),
            scheme_index: index,
            result,
        }
    }
}

fn unchanged(palette: &Palette, profile: CvdProfile) -> AdaptationResult {
    let score = score_palette(palette, profile);
    AdaptationResult {
        adapted: palette.clone(),
        initial_score: score,
        final_score: score,
        iterations: 0,
        objective_trace: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionAdaptation {
    /// Profile the palette was adapted for; absent when the test was inconclusive.
    pub profile: Option<CvdProfile>,
    /// The screening was inconclusive and should be repeated.
    pub retest: bool,
    pub scheme: String,
    /// Index into the candidates, 0 being the default palette.
    pub scheme_index: usize,
    pub result: AdaptationResult,
}
