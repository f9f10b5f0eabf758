//! 8-bit grayscale PGM (P2 ASCII / P5 binary) images as `[0, 1]` reals.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::linalg::Vector;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a PGM file (magic {0:?})")]
    BadMagic(String),
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("PGM pixel data truncated: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("maxval {0} unsupported (8-bit images only)")]
    Maxval(u32),
    #[error("pixel buffer has {found} entries for a {height}x{width} image")]
    Shape {
        height: usize,
        width: usize,
        found: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub height: usize,
    pub width: usize,
    /// Row-major intensities, nominally in `[0, 1]`.
    pub pixels: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmEncoding {
    Ascii,
    Binary,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self, ImageError> {
        if pixels.len() != height * width || height == 0 || width == 0 {
            return Err(ImageError::Shape {
                height,
                width,
                found: pixels.len(),
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// Built-in diagonal linear ramp from 0 (top-left) to 1 (bottom-right).
    pub fn gradient(height: usize, width: usize) -> Self {
        let denom = ((height + width).saturating_sub(2)).max(1) as f64;
        let pixels = (0..height)
            .flat_map(|i| (0..width).map(move |j| (i + j) as f64 / denom))
            .collect();
        Self {
            height,
            width,
            pixels,
        }
    }

    /// Built-in deblurring target: a dim diagonal ramp (0.2 to 0.5) carrying a
    /// bright square, a dark disc and a bar pattern of period 8 pixels.
    pub fn test_pattern(height: usize, width: usize) -> Self {
        let (h, w) = (height as f64, width as f64);
        let denom = ((height + width).saturating_sub(2)).max(1) as f64;
        let mut pixels = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                let (fi, fj) = (i as f64, j as f64);
                let mut v = 0.2 + 0.3 * (i + j) as f64 / denom;
                if (h / 8.0..h / 2.0).contains(&fi) && (w / 8.0..w / 2.0).contains(&fj) {
                    v = 0.9;
                }
                let (di, dj) = (fi - 0.65 * h, fj - 0.65 * w);
                if di * di + dj * dj <= (0.2 * h).powi(2) {
                    v = 0.05;
                }
                if (j / 4) % 2 == 0 && (0.75 * h..0.875 * h).contains(&fi) && fj < w / 2.0 {
                    v = 1.0;
                }
                pixels.push(v);
            }
        }
        Self {
            height,
            width,
            pixels,
        }
    }

    pub fn to_vector(&self) -> Vector {
        Vector::from_vec(self.pixels.clone())
    }

    pub fn from_vector(height: usize, width: usize, v: &Vector) -> Result<Self, ImageError> {
        Self::new(height, width, v.as_slice().to_vec())
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self, ImageError> {
        Self::decode_pgm(&fs::read(path)?)
    }

    pub fn decode_pgm(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut cur = HeaderCursor { bytes, pos: 0 };
        let magic = cur.token()?;
        let binary = match magic.as_str() {
            "P2" => false,
            "P5" => true,
            other => return Err(ImageError::BadMagic(other.to_string())),
        };
        let width = cur.number("width")? as usize;
        let height = cur.number("height")? as usize;
        let maxval = cur.number("maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(ImageError::Maxval(maxval));
        }
        if width == 0 || height == 0 {
            return Err(ImageError::BadHeader("zero image dimension".into()));
        }
        let expected = width * height;
        let scale = maxval as f64;
        let pixels: Vec<f64> = if binary {
            // Exactly one whitespace byte separates maxval from the raster.
            let start = cur.pos + 1;
            let raster = bytes.get(start..).unwrap_or(&[]);
            if raster.len() < expected {
                return Err(ImageError::Truncated {
                    expected,
                    found: raster.len(),
                });
            }
            raster[..expected].iter().map(|&b| b as f64 / scale).collect()
        } else {
            let mut out = Vec::with_capacity(expected);
            while out.len() < expected {
                match cur.try_token()? {
                    Some(tok) => {
                        let v: u32 = tok
                            .parse()
                            .map_err(|_| ImageError::BadHeader(format!("bad sample {tok:?}")))?;
                        out.push(v.min(maxval) as f64 / scale);
                    }
                    None => {
                        return Err(ImageError::Truncated {
                            expected,
                            found: out.len(),
                        })
                    }
                }
            }
            out
        };
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// Clamp to `[0, 1]`, rescale to `0..=255` and encode.
    pub fn encode_pgm(&self, encoding: PgmEncoding) -> Vec<u8> {
        let samples: Vec<u8> = self
            .pixels
            .iter()
            .map(|&p| {
                let p = if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) };
                (p * 255.0).round() as u8
            })
            .collect();
        match encoding {
            PgmEncoding::Binary => {
                let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
                out.extend_from_slice(&samples);
                out
            }
            PgmEncoding::Ascii => {
                let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
                for row in samples.chunks(self.width) {
                    let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
                    out.push_str(&line.join(" "));
                    out.push('\n');
                }
                out.into_bytes()
            }
        }
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>, encoding: PgmEncoding) -> Result<(), ImageError> {
        fs::write(path, self.encode_pgm(encoding))?;
        Ok(())
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn try_token(&mut self) -> Result<Option<String>, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        Ok(Some(
            String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned(),
        ))
    }

    fn token(&mut self) -> Result<String, ImageError> {
        self.try_token()?
            .ok_or_else(|| ImageError::BadHeader("unexpected end of header".into()))
    }

    fn number(&mut self, what: &str) -> Result<u32, ImageError> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| ImageError::BadHeader(format!("bad {what} {tok:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_with_comments_decodes() {
        let src = b"P2\n# a comment\n3 2\n255\n0 255 51\n102 0 255\n";
        let img = GrayImage::decode_pgm(src).unwrap();
        assert_eq!((img.height, img.width), (2, 3));
        assert_eq!(img.pixels, vec![0.0, 1.0, 0.2, 0.4, 0.0, 1.0]);
    }

    #[test]
    fn binary_round_trip_preserves_samples() {
        let img = GrayImage::new(2, 2, vec![0.0, 1.0, 0.2, 0.6]).unwrap();
        let back = GrayImage::decode_pgm(&img.encode_pgm(PgmEncoding::Binary)).unwrap();
        assert_eq!(back, img);
        let back = GrayImage::decode_pgm(&img.encode_pgm(PgmEncoding::Ascii)).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn save_clamps_out_of_range() {
        let img = GrayImage::new(1, 3, vec![-0.5, 1.7, f64::NAN]).unwrap();
        let bytes = img.encode_pgm(PgmEncoding::Binary);
        assert_eq!(&bytes[bytes.len() - 3..], &[0, 255, 0]);
    }

    #[test]
    fn truncated_raster_is_reported() {
        let err = GrayImage::decode_pgm(b"P5\n4 4\n255\n\x00\x01").unwrap_err();
        assert!(matches!(err, ImageError::Truncated { expected: 16, found: 2 }));
        let err = GrayImage::decode_pgm(b"P2\n2 2\n255\n1 2 3").unwrap_err();
        assert!(matches!(err, ImageError::Truncated { .. }));
    }

    #[test]
    fn rejects_other_formats() {
        assert!(matches!(
            GrayImage::decode_pgm(b"P6\n1 1\n255\n\x00\x00\x00"),
            Err(ImageError::BadMagic(_))
        ));
        assert!(matches!(
            GrayImage::decode_pgm(b"P2\n1 1\n65535\n0"),
            Err(ImageError::Maxval(65535))
        ));
    }

    #[test]
    fn test_pattern_levels() {
        let img = GrayImage::test_pattern(64, 64);
        assert_eq!(img.pixels.len(), 64 * 64);
        let at = |i: usize, j: usize| img.pixels[i * 64 + j];
        assert_eq!(at(0, 0), 0.2);
        assert_eq!(at(63, 63), 0.5);
        assert_eq!(at(20, 20), 0.9);
        assert_eq!(at(42, 42), 0.05);
        assert_eq!((at(50, 0), at(50, 4)), (1.0, at(50, 4)));
        assert!(at(50, 4) < 0.5);
    }

    #[test]
    fn gradient_spans_unit_interval() {
        let g = GrayImage::gradient(64, 64);
        assert_eq!(g.pixels[0], 0.0);
        assert_eq!(*g.pixels.last().unwrap(), 1.0);
    }
}
