//! Image ingestion and output.
//!
//! Binary PGM (P5) and PPM (P6) are read and written bit-exactly. Headers may
//! carry `#` comments anywhere whitespace is allowed. A maxval of 255 is read
//! as-is; a maxval of 63 (6-bit data) is promoted to 8 bits by a left shift
//! of 2 so that every metric sees one [0, 255] scale. 8-bit grayscale and RGB
//! PNG files are accepted as a convenience.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{Band, MultibandImage};

/// A decoded raster, either single-band or RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodedImage {
    Gray(Band),
    Rgb(MultibandImage),
}

impl DecodedImage {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            DecodedImage::Gray(b) => b.dims(),
            DecodedImage::Rgb(img) => img.dims(),
        }
    }
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decodes PNM or PNG bytes, chosen by magic number.
pub fn decode_image(bytes: &[u8]) -> Result<DecodedImage> {
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else {
        decode_pnm(bytes)
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("missing {what} in PNM header")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("{what} out of range in PNM header")))
    }
}

/// Decodes a binary P5 or P6 image.
pub fn decode_pnm(bytes: &[u8]) -> Result<DecodedImage> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        Some(m) if m.first() == Some(&b'P') => {
            return Err(Error::Unsupported(format!(
                "PNM variant {} (only binary P5/P6 are read)",
                String::from_utf8_lossy(m)
            )))
        }
        _ => return Err(Error::Format("not a PNM or PNG file".into())),
    };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    let shift = match maxval {
        255 => 0,
        63 => 2,
        other => {
            return Err(Error::Unsupported(format!(
                "maxval {other} (expected 255, or 63 for 6-bit data)"
            )))
        }
    };
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Format("header not terminated by whitespace".into())),
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    let data = bytes.get(cur.pos..cur.pos + count).ok_or_else(|| {
        Error::Format(format!(
            "truncated raster: need {count} bytes, have {}",
            bytes.len() - cur.pos
        ))
    })?;
    if shift > 0 {
        if let Some(&v) = data.iter().find(|&&v| v as usize > maxval) {
            return Err(Error::Format(format!("sample {v} exceeds maxval {maxval}")));
        }
    }
    let scaled = |v: u8| v << shift;
    if channels == 1 {
        let px = data.iter().map(|&v| scaled(v)).collect();
        return Ok(DecodedImage::Gray(Band::new(width, height, px)?));
    }
    let mut planes = [
        Vec::with_capacity(width * height),
        Vec::with_capacity(width * height),
        Vec::with_capacity(width * height),
    ];
    for px in data.chunks_exact(3) {
        for (plane, &v) in planes.iter_mut().zip(px) {
            plane.push(scaled(v));
        }
    }
    let [r, g, b] = planes;
    Ok(DecodedImage::Rgb(MultibandImage::new(
        "",
        Band::new(width, height, r)?,
        Band::new(width, height, g)?,
        Band::new(width, height, b)?,
    )?))
}

fn decode_png(bytes: &[u8]) -> Result<DecodedImage> {
    let fmt = |e: png::DecodingError| Error::Format(format!("PNG: {e}"));
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(fmt)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("PNG: image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(fmt)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Unsupported(format!(
            "PNG bit depth {:?} (only 8-bit is read)",
            info.bit_depth
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let buf = &buf[..info.buffer_size()];
    let stride = info.line_size;
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::Unsupported(format!(
                "PNG colour type {other:?} (grayscale or RGB only)"
            )))
        }
    };
    let mut planes = vec![Vec::with_capacity(width * height); channels];
    for row in buf.chunks_exact(stride).take(height) {
        for px in row[..width * channels].chunks_exact(channels) {
            for (plane, &v) in planes.iter_mut().zip(px) {
                plane.push(v);
            }
        }
    }
    if channels == 1 {
        let px = planes.pop().unwrap_or_default();
        return Ok(DecodedImage::Gray(Band::new(width, height, px)?));
    }
    let b = Band::new(width, height, planes.pop().unwrap_or_default())?;
    let g = Band::new(width, height, planes.pop().unwrap_or_default())?;
    let r = Band::new(width, height, planes.pop().unwrap_or_default())?;
    Ok(DecodedImage::Rgb(MultibandImage::new("", r, g, b)?))
}

/// Encodes a band as binary PGM with maxval 255.
pub fn encode_pgm(band: &Band) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", band.width(), band.height()).into_bytes();
    out.extend_from_slice(band.pixels());
    out
}

/// Encodes an RGB image as binary PPM with maxval 255.
pub fn encode_ppm(img: &MultibandImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.width() * img.height() * 3);
    for ((&r, &g), &b) in img
        .r()
        .pixels()
        .iter()
        .zip(img.g().pixels())
        .zip(img.b().pixels())
    {
        out.extend_from_slice(&[r, g, b]);
    }
    out
}

pub fn read_image(path: &Path) -> Result<DecodedImage> {
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        Error::Unsupported(msg) => Error::Unsupported(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Reads a single-band image; RGB input is rejected.
pub fn read_gray(path: &Path) -> Result<Band> {
    match read_image(path)? {
        DecodedImage::Gray(b) => Ok(b),
        DecodedImage::Rgb(_) => Err(Error::Unsupported(format!(
            "{}: expected a single-band image, found RGB",
            path.display()
        ))),
    }
}

/// Reads an RGB image and attaches `label`; single-band input is rejected.
pub fn read_rgb(path: &Path, label: &str) -> Result<MultibandImage> {
    match read_image(path)? {
        DecodedImage::Rgb(img) => Ok(img.with_label(label)),
        DecodedImage::Gray(_) => Err(Error::Unsupported(format!(
            "{}: expected an RGB image, found a single band",
            path.display()
        ))),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_pgm(path: &Path, band: &Band) -> Result<()> {
    write_bytes(path, &encode_pgm(band))
}

pub fn write_ppm(path: &Path, img: &MultibandImage) -> Result<()> {
    write_bytes(path, &encode_ppm(img))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_in_header() {
        let mut bytes = b"P5\n# made by hand\n3 # width\n1\n# maxval next\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 128, 255]);
        let DecodedImage::Gray(b) = decode_pnm(&bytes).unwrap() else {
            panic!("expected gray");
        };
        assert_eq!(b.pixels(), &[0, 128, 255]);
    }

    #[test]
    fn raster_may_start_with_whitespace_byte() {
        // the single separator is consumed; the following 0x0a is data
        let mut bytes = b"P5 2 1 255\n".to_vec();
        bytes.extend_from_slice(&[b'\n', 7]);
        let DecodedImage::Gray(b) = decode_pnm(&bytes).unwrap() else {
            panic!()
        };
        assert_eq!(b.pixels(), &[10, 7]);
    }

    #[test]
    fn six_bit_data_is_promoted() {
        let mut bytes = b"P5\n2 1\n63\n".to_vec();
        bytes.extend_from_slice(&[0, 63]);
        let DecodedImage::Gray(b) = decode_pnm(&bytes).unwrap() else {
            panic!()
        };
        assert_eq!(b.pixels(), &[0, 252]);

        let mut bad = b"P5\n1 1\n63\n".to_vec();
        bad.push(64);
        assert!(matches!(decode_pnm(&bad), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_unsupported_and_truncated() {
        assert!(matches!(
            decode_pnm(b"P2\n1 1\n255\n0"),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            decode_pnm(b"P5\n1 1\n65535\n\0\0"),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            decode_pnm(b"P6\n2 2\n255\n\0\0\0"),
            Err(Error::Format(_))
        ));
        assert!(matches!(decode_pnm(b"hello"), Err(Error::Format(_))));
    }

    #[test]
    fn ppm_interleaving() {
        let img = MultibandImage::new(
            "x",
            Band::new(2, 1, vec![1, 2]).unwrap(),
            Band::new(2, 1, vec![3, 4]).unwrap(),
            Band::new(2, 1, vec![5, 6]).unwrap(),
        )
        .unwrap();
        let bytes = encode_ppm(&img);
        assert_eq!(&bytes[..], b"P6\n2 1\n255\n\x01\x03\x05\x02\x04\x06");
        let DecodedImage::Rgb(back) = decode_pnm(&bytes).unwrap() else {
            panic!()
        };
        assert_eq!(back.with_label("x"), img);
    }

    #[test]
    fn png_gray_and_rgb() {
        fn encode(w: u32, h: u32, color: png::ColorType, data: &[u8]) -> Vec<u8> {
            let mut out = Vec::new();
            {
                let mut enc = png::Encoder::new(&mut out, w, h);
                enc.set_color(color);
                enc.set_depth(png::BitDepth::Eight);
                let mut writer = enc.write_header().unwrap();
                writer.write_image_data(data).unwrap();
            }
            out
        }
        let gray = encode(2, 2, png::ColorType::Grayscale, &[1, 2, 3, 4]);
        let DecodedImage::Gray(b) = decode_image(&gray).unwrap() else {
            panic!()
        };
        assert_eq!(b.pixels(), &[1, 2, 3, 4]);

        let rgb = encode(2, 1, png::ColorType::Rgb, &[1, 2, 3, 4, 5, 6]);
        let DecodedImage::Rgb(img) = decode_image(&rgb).unwrap() else {
            panic!()
        };
        assert_eq!(img.r().pixels(), &[1, 4]);
        assert_eq!(img.b().pixels(), &[3, 6]);
    }
}
