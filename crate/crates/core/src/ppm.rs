//! Binary PPM (P6, maxval 255) codec.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::color::{Image, Srgb8};

#[derive(Debug, Error)]
pub enum PpmError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("not a P6 file")]
    BadMagic,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
}

pub fn decode(bytes: &[u8]) -> Result<Image, PpmError> {
    let mut pos = 0;
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(PpmError::BadMagic);
    }
    pos += 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        *field = header_number(bytes, &mut pos)?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(PpmError::BadHeader("missing separator before raster".into())),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(PpmError::UnsupportedMaxval(maxval));
    }
    let (width, height) = (width as usize, height as usize);
    let expected = width * height * 3;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(PpmError::Truncated {
            expected,
            got: raster.len(),
        });
    }
    let pixels = raster[..expected]
        .chunks_exact(3)
        .map(|p| Srgb8::new(p[0], p[1], p[2]))
        .collect();
    Image::new(width, height, pixels).map_err(|e| PpmError::BadHeader(e.to_string()))
}

fn header_number(bytes: &[u8], pos: &mut usize) -> Result<u32, PpmError> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&c) = bytes.get(*pos) {
                    *pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            }
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(PpmError::BadHeader("unexpected end of header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| PpmError::BadHeader(format!("expected a number at byte {start}")))
}

pub fn encode(img: &Image) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len() * 3);
    out.extend_from_slice(header.as_bytes());
    for p in img.pixels() {
        out.extend_from_slice(&[p.r, p.g, p.b]);
    }
    out
}

pub fn read<R: Read>(mut reader: R) -> Result<Image, PpmError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn write<W: Write>(mut writer: W, img: &Image) -> Result<(), PpmError> {
    writer.write_all(&encode(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_header_bit_exact() {
        let img = Image::new(2, 1, vec![Srgb8::new(1, 2, 3), Srgb8::new(250, 251, 252)]).unwrap();
        let bytes = encode(&img);
        assert_eq!(&bytes[..], b"P6\n2 1\n255\n\x01\x02\x03\xfa\xfb\xfc");
        assert_eq!(decode(&bytes).unwrap(), img);
    }

    #[test]
    fn accepts_comments() {
        let bytes = b"P6 # made by hand\n1 1\n# another\n255\n\x10\x20\x30";
        let img = decode(bytes).unwrap();
        assert_eq!(img.pixel(0, 0), Srgb8::new(16, 32, 48));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(decode(b"P3\n1 1\n255\n"), Err(PpmError::BadMagic)));
        assert!(matches!(
            decode(b"P6\n1 1\n65535\n\0\0\0\0\0\0"),
            Err(PpmError::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            decode(b"P6\n2 2\n255\n\0\0\0"),
            Err(PpmError::Truncated { expected: 12, got: 3 })
        ));
        assert!(matches!(decode(b"P6\n2\n"), Err(PpmError::BadHeader(_))));
    }
}
