//! Color spaces, CIE76 color difference and color vision deficiency simulation.
//!
//! Pipeline: `Srgb8` -> `UnitSrgb` (gamma encoded) -> `LinearRgb` -> `Lms` / XYZ -> `Lab`.
//! Everything is D65. Dichromacy is modelled as a projection in LMS space that
//! rewrites the missing cone response from the two remaining ones, anchored so
//! that white and one primary are seen unchanged. Anomalous trichromacy is a
//! linear blend between the identity and that projection.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColorError {
    #[error("channel {channel} = {value} is outside [0, 1]")]
    OutOfRange { channel: char, value: f64 },
    #[error("invalid hex color {0:?}")]
    BadHex(String),
    #[error("severity {0} is outside [0, 1]")]
    BadSeverity(f64),
    #[error("unknown deficiency kind {0:?}")]
    BadKind(String),
    #[error("image has {got} pixels, expected {expected}")]
    PixelCount { expected: usize, got: usize },
    #[error("image dimensions must be positive")]
    EmptyImage,
    #[error("singular anchor system for {0:?} projection")]
    SingularProjection(Dichromat),
}

pub type Mat3 = [[f64; 3]; 3];

/// 8-bit gamma-encoded sRGB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Srgb8 {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

/// Gamma-encoded sRGB with channels in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSrgb {
    r: f64,
    g: f64,
    b: f64,
}

/// Linear-light sRGB. May leave [0, 1] transiently; see [`LinearRgb::in_gamut`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearRgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

/// Cone excitations, normalized so linear white maps to (1, 1, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lms {
    pub l: f64,
    pub m: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Srgb8 {
    pub const BLACK: Srgb8 = Srgb8::new(0, 0, 0);
    pub const WHITE: Srgb8 = Srgb8::new(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Srgb8 { r, g, b }
    }

    /// Accepts `RRGGBB` with or without a leading `#`.
    pub fn from_hex(s: &str) -> Result<Self, ColorError> {
        let digits = s.strip_prefix('#').unwrap_or(s);
        if digits.len() != 6 || !digits.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Err(ColorError::BadHex(s.to_string()));
        }
        let channel = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).unwrap();
        Ok(Srgb8::new(channel(0), channel(2), channel(4)))
    }

    /// `#RRGGBB`, uppercase.
    pub fn to_hex(self) -> String {
        format!("#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }

    pub fn to_unit(self) -> UnitSrgb {
        UnitSrgb {
            r: f64::from(self.r) / 255.0,
            g: f64::from(self.g) / 255.0,
            b: f64::from(self.b) / 255.0,
        }
    }

    pub fn to_linear(self) -> LinearRgb {
        srgb_to_linear(self.to_unit())
    }

    pub fn to_lab(self) -> Lab {
        linear_to_lab(self.to_linear())
    }
}

impl fmt::Display for Srgb8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Srgb8 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Srgb8 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Srgb8::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

impl UnitSrgb {
    pub fn new(r: f64, g: f64, b: f64) -> Result<Self, ColorError> {
        for (channel, value) in [('r', r), ('g', g), ('b', b)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ColorError::OutOfRange { channel, value });
            }
        }
        Ok(UnitSrgb { r, g, b })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn to_srgb8(self) -> Srgb8 {
        let q = |v: f64| (v * 255.0).round() as u8;
        Srgb8::new(q(self.r), q(self.g), q(self.b))
    }
}

impl LinearRgb {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        LinearRgb { r, g, b }
    }

    pub const fn gray(v: f64) -> Self {
        LinearRgb { r: v, g: v, b: v }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        LinearRgb::new(v[0], v[1], v[2])
    }

    pub fn in_gamut(&self) -> bool {
        self.to_array().iter().all(|v| (0.0..=1.0).contains(v))
    }

    pub fn clamped(self) -> Self {
        LinearRgb::new(
            self.r.clamp(0.0, 1.0),
            self.g.clamp(0.0, 1.0),
            self.b.clamp(0.0, 1.0),
        )
    }

    /// Rec.709 relative luminance.
    pub fn luminance(&self) -> f64 {
        0.2126 * self.r + 0.7152 * self.g + 0.0722 * self.b
    }

    /// Clamps, encodes and quantizes.
    pub fn to_srgb8(self) -> Srgb8 {
        linear_to_srgb(self.clamped())
            .expect("clamped value is in range")
            .to_srgb8()
    }
}

impl Lms {
    pub fn to_array(self) -> [f64; 3] {
        [self.l, self.m, self.s]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Lms {
            l: v[0],
            m: v[1],
            s: v[2],
        }
    }
}

impl Lab {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Lab { l, a, b }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.l, self.a, self.b]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Lab::new(v[0], v[1], v[2])
    }

    pub fn to_linear(self) -> LinearRgb {
        lab_to_linear(self)
    }

    pub fn to_srgb8(self) -> Srgb8 {
        lab_to_linear(self).to_srgb8()
    }
}

// sRGB primaries to XYZ, D65.
const RGB_TO_XYZ: Mat3 = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

// Exact inverse of RGB_TO_XYZ so Lab round trips are tight.
const XYZ_TO_RGB: Mat3 = [
    [3.2404548360214087, -1.5371388501025751, -0.498531546868481],
    [-0.9692663898756538, 1.876010928842491, 0.041556082346673545],
    [0.05564341960421367, -0.20402585426769818, 1.057225162457929],
];

// Hunt-Pointer-Estevez cone fundamentals applied to RGB_TO_XYZ, rows scaled so
// that linear white has unit excitation in every cone.
const RGB_TO_LMS: Mat3 = [
    [0.31398999616837026, 0.6395124901952274, 0.04649751363640235],
    [0.1553773338344152, 0.7579184978555442, 0.08670416831004059],
    [0.017756582753965265, 0.10946796102238184, 0.8727754562236529],
];

const LMS_TO_RGB: Mat3 = [
    [5.47221589308761, -4.641812885692152, 0.16959699260454206],
    [-1.12524268405808, 2.2930982136528746, -0.16785552959479452],
    [0.0298016720572753, -0.1931746018259102, 1.1633729297686348],
];

pub fn mat_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn white_xyz() -> [f64; 3] {
    mat_vec(&RGB_TO_XYZ, [1.0, 1.0, 1.0])
}

pub fn srgb_to_linear(c: UnitSrgb) -> LinearRgb {
    fn decode(v: f64) -> f64 {
        if v <= 0.04045 {
            v / 12.92
        } else {
            ((v + 0.055) / 1.055).powf(2.4)
        }
    }
    LinearRgb::new(decode(c.r), decode(c.g), decode(c.b))
}

pub fn linear_to_srgb(c: LinearRgb) -> Result<UnitSrgb, ColorError> {
    fn encode(v: f64) -> f64 {
        if v <= 0.0031308 {
            v * 12.92
        } else {
            1.055 * v.powf(1.0 / 2.4) - 0.055
        }
    }
    for (channel, value) in [('r', c.r), ('g', c.g), ('b', c.b)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(ColorError::OutOfRange { channel, value });
        }
    }
    // encode(1.0) rounds to 1 + 1 ulp
    Ok(UnitSrgb {
        r: encode(c.r).min(1.0),
        g: encode(c.g).min(1.0),
        b: encode(c.b).min(1.0),
    })
}

const LAB_DELTA: f64 = 6.0 / 29.0;

fn lab_f(t: f64) -> f64 {
    if t > LAB_DELTA * LAB_DELTA * LAB_DELTA {
        t.cbrt()
    } else {
        t / (3.0 * LAB_DELTA * LAB_DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > LAB_DELTA {
        t * t * t
    } else {
        3.0 * LAB_DELTA * LAB_DELTA * (t - 4.0 / 29.0)
    }
}

pub fn linear_to_lab(c: LinearRgb) -> Lab {
    let xyz = mat_vec(&RGB_TO_XYZ, c.to_array());
    let white = white_xyz();
    let fx = lab_f(xyz[0] / white[0]);
    let fy = lab_f(xyz[1] / white[1]);
    let fz = lab_f(xyz[2] / white[2]);
    Lab::new(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

/// Out-of-gamut Lab values come back with channels outside [0, 1].
pub fn lab_to_linear(c: Lab) -> LinearRgb {
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    let white = white_xyz();
    let xyz = [
        lab_f_inv(fx) * white[0],
        lab_f_inv(fy) * white[1],
        lab_f_inv(fz) * white[2],
    ];
    LinearRgb::from_array(mat_vec(&XYZ_TO_RGB, xyz))
}

/// CIE76: Euclidean distance in Lab.
pub fn delta_e(a: Lab, b: Lab) -> f64 {
    let dl = a.l - b.l;
    let da = a.a - b.a;
    let db = a.b - b.b;
    (dl * dl + da * da + db * db).sqrt()
}

pub fn linear_to_lms(c: LinearRgb) -> Lms {
    Lms::from_array(mat_vec(&RGB_TO_LMS, c.to_array()))
}

pub fn lms_to_linear(c: Lms) -> LinearRgb {
    LinearRgb::from_array(mat_vec(&LMS_TO_RGB, c.to_array()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvdKind {
    Normal,
    Protan,
    Deutan,
    Tritan,
    Achromat,
}

impl CvdKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CvdKind::Normal => "normal",
            CvdKind::Protan => "protan",
            CvdKind::Deutan => "deutan",
            CvdKind::Tritan => "tritan",
            CvdKind::Achromat => "achromat",
        }
    }

    pub fn dichromat(self) -> Option<Dichromat> {
        match self {
            CvdKind::Protan => Some(Dichromat::Protan),
            CvdKind::Deutan => Some(Dichromat::Deutan),
            CvdKind::Tritan => Some(Dichromat::Tritan),
            _ => None,
        }
    }
}

impl fmt::Display for CvdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CvdKind {
    type Err = ColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(CvdKind::Normal),
            "protan" => Ok(CvdKind::Protan),
            "deutan" => Ok(CvdKind::Deutan),
            "tritan" => Ok(CvdKind::Tritan),
            "achromat" => Ok(CvdKind::Achromat),
            _ => Err(ColorError::BadKind(s.to_string())),
        }
    }
}

/// The three dichromacies, named after the missing cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dichromat {
    Protan,
    Deutan,
    Tritan,
}

impl Dichromat {
    pub const ALL: [Dichromat; 3] = [Dichromat::Protan, Dichromat::Deutan, Dichromat::Tritan];

    pub fn kind(self) -> CvdKind {
        match self {
            Dichromat::Protan => CvdKind::Protan,
            Dichromat::Deutan => CvdKind::Deutan,
            Dichromat::Tritan => CvdKind::Tritan,
        }
    }

    /// Full-severity profile.
    pub fn profile(self) -> CvdProfile {
        CvdProfile {
            kind: self.kind(),
            severity: 1.0,
        }
    }

    fn missing_cone(self) -> usize {
        match self {
            Dichromat::Protan => 0,
            Dichromat::Deutan => 1,
            Dichromat::Tritan => 2,
        }
    }

    /// Primary that stays fixed besides white.
    pub fn anchor_primary(self) -> LinearRgb {
        match self {
            Dichromat::Protan | Dichromat::Deutan => LinearRgb::new(0.0, 0.0, 1.0),
            Dichromat::Tritan => LinearRgb::new(1.0, 0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct CvdProfile {
    pub kind: CvdKind,
    pub severity: f64,
}

#[derive(Deserialize)]
struct RawProfile {
    kind: CvdKind,
    #[serde(default)]
    severity: f64,
}

impl TryFrom<RawProfile> for CvdProfile {
    type Error = ColorError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        CvdProfile::new(raw.kind, raw.severity)
    }
}

impl CvdProfile {
    pub const NORMAL: CvdProfile = CvdProfile {
        kind: CvdKind::Normal,
        severity: 0.0,
    };

    /// `Normal` always carries severity 0 regardless of the argument.
    pub fn new(kind: CvdKind, severity: f64) -> Result<Self, ColorError> {
        if !(0.0..=1.0).contains(&severity) {
            return Err(ColorError::BadSeverity(severity));
        }
        let severity = if kind == CvdKind::Normal { 0.0 } else { severity };
        Ok(CvdProfile { kind, severity })
    }

    pub fn is_identity(&self) -> bool {
        self.kind == CvdKind::Normal || self.severity == 0.0
    }
}

/// Row-replacement projection for a dichromat in LMS space.
///
/// The missing cone row becomes `a * cone1 + b * cone2`, with `(a, b)` chosen so
/// that white and the anchor primary are left unchanged.
pub fn build_projection(kind: Dichromat) -> Result<Mat3, ColorError> {
    let white = linear_to_lms(LinearRgb::gray(1.0)).to_array();
    let anchor = linear_to_lms(kind.anchor_primary()).to_array();
    let missing = kind.missing_cone();
    let (i, j) = match missing {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    // [w_i w_j; p_i p_j] [a; b] = [w_miss; p_miss]
    let det = white[i] * anchor[j] - white[j] * anchor[i];
    if det.abs() < 1e-12 {
        return Err(ColorError::SingularProjection(kind));
    }
    let a = (white[missing] * anchor[j] - white[j] * anchor[missing]) / det;
    let b = (white[i] * anchor[missing] - white[missing] * anchor[i]) / det;
    let mut p = IDENTITY;
    p[missing] = [0.0; 3];
    p[missing][i] = a;
    p[missing][j] = b;
    Ok(p)
}

fn projection(kind: Dichromat) -> Mat3 {
    build_projection(kind).expect("anchor system is regular for the embedded cone matrix")
}

/// Linear-RGB matrix of the severity-blended simulation, before clamping.
pub fn simulation_matrix(kind: Dichromat, severity: f64) -> Mat3 {
    let p = projection(kind);
    let mut blend = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            blend[r][c] = (1.0 - severity) * IDENTITY[r][c] + severity * p[r][c];
        }
    }
    mat_mul(&LMS_TO_RGB, &mat_mul(&blend, &RGB_TO_LMS))
}

/// Simulation without the final gamut clamp. Smooth in `c`.
pub fn simulate_unclamped(c: LinearRgb, profile: CvdProfile) -> LinearRgb {
    if profile.is_identity() {
        return c;
    }
    let s = profile.severity;
    match profile.kind {
        CvdKind::Normal => c,
        CvdKind::Achromat => {
            let y = c.luminance();
            LinearRgb::new(
                (1.0 - s) * c.r + s * y,
                (1.0 - s) * c.g + s * y,
                (1.0 - s) * c.b + s * y,
            )
        }
        CvdKind::Protan | CvdKind::Deutan | CvdKind::Tritan => {
            let kind = profile.kind.dichromat().unwrap();
            let lms = linear_to_lms(c).to_array();
            let projected = mat_vec(&projection(kind), lms);
            let mixed = [0, 1, 2].map(|k| (1.0 - s) * lms[k] + s * projected[k]);
            lms_to_linear(Lms::from_array(mixed))
        }
    }
}

/// How `c` appears to a viewer with `profile`, clamped to the display gamut.
pub fn simulate(c: LinearRgb, profile: CvdProfile) -> LinearRgb {
    if profile.is_identity() {
        return c;
    }
    simulate_unclamped(c, profile).clamped()
}

/// Shorthand for Lab of the simulated color.
pub fn simulated_lab(c: Srgb8, profile: CvdProfile) -> Lab {
    linear_to_lab(simulate(c.to_linear(), profile))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<Srgb8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<Srgb8>) -> Result<Self, ColorError> {
        if width == 0 || height == 0 {
            return Err(ColorError::EmptyImage);
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(ColorError::PixelCount {
                expected,
                got: pixels.len(),
            });
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, color: Srgb8) -> Result<Self, ColorError> {
        Image::new(width, height, vec![color; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Srgb8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> Srgb8 {
        self.pixels[y * self.width + x]
    }
}

pub fn simulate_image(img: &Image, profile: CvdProfile) -> Image {
    if profile.is_identity() {
        return img.clone();
    }
    let pixels = img
        .pixels
        .iter()
        .map(|p| simulate(p.to_linear(), profile).to_srgb8())
        .collect();
    Image {
        width: img.width,
        height: img.height,
        pixels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn transfer_fixed_points() {
        let black = srgb_to_linear(UnitSrgb::new(0.0, 0.0, 0.0).unwrap());
        assert_eq!(black, LinearRgb::gray(0.0));
        let white = srgb_to_linear(UnitSrgb::new(1.0, 1.0, 1.0).unwrap());
        assert_eq!(white, LinearRgb::gray(1.0));
        assert_eq!(
            linear_to_srgb(LinearRgb::gray(0.0)).unwrap(),
            UnitSrgb::new(0.0, 0.0, 0.0).unwrap()
        );
    }

    #[test]
    fn transfer_mid_gray() {
        // ((0.5 + 0.055) / 1.055)^2.4 evaluated by hand
        let x = srgb_to_linear(UnitSrgb::new(0.5, 0.5, 0.5).unwrap());
        assert!(close(x.r, 0.21404114048223255, 1e-12));
        assert_eq!(x.r, x.g);
        assert_eq!(x.g, x.b);
        let back = linear_to_srgb(LinearRgb::gray(0.2140)).unwrap();
        assert!(close(back.r(), 0.5, 1e-4));
    }

    #[test]
    fn transfer_round_trip() {
        let v = UnitSrgb::new(0.25, 0.5, 0.75).unwrap();
        let back = linear_to_srgb(srgb_to_linear(v)).unwrap();
        assert!(close(back.r(), 0.25, 1e-6));
        assert!(close(back.g(), 0.5, 1e-6));
        assert!(close(back.b(), 0.75, 1e-6));
    }

    #[test]
    fn linear_to_srgb_rejects_out_of_range() {
        let err = linear_to_srgb(LinearRgb::new(0.5, 1.2, 0.5)).unwrap_err();
        assert!(matches!(err, ColorError::OutOfRange { channel: 'g', .. }));
        assert!(UnitSrgb::new(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn lab_reference_points() {
        let white = linear_to_lab(LinearRgb::gray(1.0));
        assert!(close(white.l, 100.0, 1e-9));
        assert!(white.a.abs() <= 1e-3 && white.b.abs() <= 1e-3);
        let black = linear_to_lab(LinearRgb::gray(0.0));
        assert!(close(black.l, 0.0, 1e-12) && black.a.abs() < 1e-12 && black.b.abs() < 1e-12);
        let gray = linear_to_lab(LinearRgb::gray(0.5));
        // 116 * cbrt(0.5) - 16
        assert!(close(gray.l, 116.0 * 0.5f64.cbrt() - 16.0, 1e-9));
        assert!(gray.l > 70.0 && gray.l < 80.0);
        assert!(gray.a.abs() < 1e-9 && gray.b.abs() < 1e-9);
    }

    #[test]
    fn lab_round_trip_and_gamut() {
        let white = lab_to_linear(Lab::new(100.0, 0.0, 0.0));
        for v in white.to_array() {
            assert!(close(v, 1.0, 1e-4));
        }
        let v = LinearRgb::new(0.2, 0.6, 0.9);
        let back = lab_to_linear(linear_to_lab(v));
        for (x, y) in back.to_array().iter().zip(v.to_array()) {
            assert!(close(*x, y, 1e-4));
        }
        assert!(!lab_to_linear(Lab::new(50.0, 200.0, 0.0)).in_gamut());
    }

    #[test]
    fn delta_e_basics() {
        let c = Lab::new(40.0, 12.0, -7.0);
        assert_eq!(delta_e(c, c), 0.0);
        assert_eq!(delta_e(Lab::new(0.0, 0.0, 0.0), Lab::new(100.0, 0.0, 0.0)), 100.0);
    }

    #[test]
    fn projections_fix_white_and_anchor() {
        for kind in Dichromat::ALL {
            let p = build_projection(kind).unwrap();
            let pp = mat_mul(&p, &p);
            for r in 0..3 {
                for c in 0..3 {
                    assert!(close(pp[r][c], p[r][c], 1e-9));
                }
            }
            for fixed in [LinearRgb::gray(1.0), kind.anchor_primary()] {
                let lms = linear_to_lms(fixed).to_array();
                let out = mat_vec(&p, lms);
                for k in 0..3 {
                    assert!(close(out[k], lms[k], 1e-9), "{kind:?} {k}");
                }
            }
            // only the missing row differs from identity
            for r in (0..3).filter(|&r| r != kind.missing_cone()) {
                assert_eq!(p[r], IDENTITY[r]);
            }
        }
    }

    #[test]
    fn simulate_contract_examples() {
        let c = LinearRgb::new(0.3, 0.7, 0.1);
        assert_eq!(simulate(c, CvdProfile::NORMAL), c);
        let protan = Dichromat::Protan.profile();
        for g in [0.0, 0.18, 0.5, 1.0] {
            let out = simulate(LinearRgb::gray(g), protan);
            for v in out.to_array() {
                assert!(close(v, g, 1e-9));
            }
        }
        let deutan = Dichromat::Deutan.profile();
        let once = simulate(c, deutan);
        let twice = simulate(once, deutan);
        for (a, b) in once.to_array().iter().zip(twice.to_array()) {
            assert!(close(*a, b, 1e-6));
        }
        let achromat = CvdProfile::new(CvdKind::Achromat, 1.0).unwrap();
        let out = simulate(LinearRgb::new(0.0, 1.0, 0.0), achromat);
        for v in out.to_array() {
            assert!(close(v, 0.7152, 1e-12));
        }
    }

    #[test]
    fn profile_normalizes_normal_severity() {
        let p = CvdProfile::new(CvdKind::Normal, 0.8).unwrap();
        assert_eq!(p.severity, 0.0);
        assert!(CvdProfile::new(CvdKind::Deutan, 1.5).is_err());
        let parsed: CvdProfile = serde_json::from_str(r#"{"kind":"deutan","severity":0.5}"#).unwrap();
        assert_eq!(parsed.kind, CvdKind::Deutan);
        assert!(serde_json::from_str::<CvdProfile>(r#"{"kind":"deutan","severity":2}"#).is_err());
    }

    #[test]
    fn hex_parsing() {
        assert_eq!(Srgb8::from_hex("#FF8000").unwrap(), Srgb8::new(255, 128, 0));
        assert_eq!(Srgb8::from_hex("0a0B0c").unwrap(), Srgb8::new(10, 11, 12));
        assert_eq!(Srgb8::new(10, 11, 12).to_hex(), "#0A0B0C");
        for bad in ["", "#12345", "GG0000", "#1234567", "+12345"] {
            assert!(Srgb8::from_hex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn image_simulation() {
        let gray = Image::filled(3, 2, Srgb8::new(128, 128, 128)).unwrap();
        assert_eq!(simulate_image(&gray, Dichromat::Protan.profile()), gray);
        let img = Image::new(2, 1, vec![Srgb8::new(255, 0, 0), Srgb8::new(0, 255, 0)]).unwrap();
        assert_eq!(simulate_image(&img, CvdProfile::NORMAL), img);
        let out = simulate_image(&img, Dichromat::Deutan.profile());
        assert_eq!((out.width(), out.height()), (2, 1));
        let before = delta_e(img.pixel(0, 0).to_lab(), img.pixel(1, 0).to_lab());
        let after = delta_e(out.pixel(0, 0).to_lab(), out.pixel(1, 0).to_lab());
        assert!(after < before);
        assert!(Image::new(2, 2, vec![Srgb8::BLACK; 3]).is_err());
        assert!(Image::new(0, 2, vec![]).is_err());
    }
}
