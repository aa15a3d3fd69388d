//! Embedded 5x7 bitmap digits and glyph placement.

use serde::{Deserialize, Serialize};

use super::PlateError;

pub const COLS: usize = 5;
pub const ROWS: usize = 7;

// One byte per row, low five bits, most significant bit is the leftmost column.
const DIGITS: [[u8; ROWS]; 10] = [
    [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110],
    [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
    [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111],
    [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110],
    [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010],
    [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110],
    [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110],
    [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000],
    [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110],
    [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100],
];

/// Whether cell (`col`, `row`) of `digit` is lit. Row 0 is the top.
pub fn lit(digit: u8, col: usize, row: usize) -> bool {
    DIGITS[digit as usize][row] >> (COLS - 1 - col) & 1 == 1
}

/// Places a glyph: centered at (`cx`, `cy`), each font cell `cell` units square.
/// Plate coordinates have y pointing down, matching SVG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub cx: f64,
    pub cy: f64,
    pub cell: f64,
}

impl Placement {
    fn half_extent(&self) -> (f64, f64) {
        (self.cell * COLS as f64 / 2.0, self.cell * ROWS as f64 / 2.0)
    }

    /// Evenly spaced placements for `n` glyphs on one line, with one blank
    /// cell between glyphs, sized to fit comfortably inside the unit disk.
    pub fn row(n: usize) -> Vec<Placement> {
        let width_cells = (COLS + 1) * n - 1;
        let cell = (1.3 / width_cells as f64).min(0.16);
        let pitch = (COLS + 1) as f64 * cell;
        let first = -pitch * (n as f64 - 1.0) / 2.0;
        (0..n)
            .map(|i| Placement {
                cx: first + pitch * i as f64,
                cy: 0.0,
                cell,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlyphMask {
    digit: u8,
    placement: Placement,
}

impl GlyphMask {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (hw, hh) = self.placement.half_extent();
        let u = (x - (self.placement.cx - hw)) / self.placement.cell;
        let v = (y - (self.placement.cy - hh)) / self.placement.cell;
        if !(0.0..COLS as f64).contains(&u) || !(0.0..ROWS as f64).contains(&v) {
            return false;
        }
        lit(self.digit, u as usize, v as usize)
    }
}

pub fn glyph_mask(digit: char, placement: Placement) -> Result<GlyphMask, PlateError> {
    let value = digit
        .to_digit(10)
        .ok_or_else(|| PlateError::Parameter(format!("{digit:?} is not a decimal digit")))?;
    if !(placement.cell > 0.0 && placement.cell.is_finite()) {
        return Err(PlateError::Parameter(format!("bad cell size {}", placement.cell)));
    }
    let (hw, hh) = placement.half_extent();
    for (sx, sy) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        if (placement.cx + sx * hw).hypot(placement.cy + sy * hh) > 1.0 {
            return Err(PlateError::Parameter(
                "glyph placement leaves the unit disk".into(),
            ));
        }
    }
    Ok(GlyphMask {
        digit: value as u8,
        placement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CENTER: Placement = Placement { cx: 0.0, cy: 0.0, cell: 0.1 };

    #[test]
    fn lit_cell_centers_are_inside() {
        let mask = glyph_mask('1', CENTER).unwrap();
        // '1' top row is 00100: column 2 of row 0
        let x = -0.25 + 2.5 * 0.1;
        let y = -0.35 + 0.5 * 0.1;
        assert!(mask.contains(x, y));
        assert!(!mask.contains(x - 0.1, y));
        assert!(!mask.contains(0.9, 0.0));
        assert!(!mask.contains(0.0, -0.5));
    }

    #[test]
    fn eight_coverage() {
        let lit_cells = (0..ROWS)
            .flat_map(|r| (0..COLS).map(move |c| (c, r)))
            .filter(|&(c, r)| lit(8, c, r))
            .count();
        let fraction = lit_cells as f64 / (ROWS * COLS) as f64;
        assert_eq!(lit_cells, 17);
        assert!(fraction > 0.4 && fraction < 0.9);
    }

    #[test]
    fn rejects_bad_glyphs() {
        assert!(glyph_mask('x', CENTER).is_err());
        assert!(glyph_mask('3', Placement { cx: 0.9, cy: 0.0, cell: 0.1 }).is_err());
    }

    #[test]
    fn rows_fit_in_disk() {
        for n in 1..=3 {
            for p in Placement::row(n) {
                glyph_mask('8', p).unwrap();
            }
        }
    }
}
