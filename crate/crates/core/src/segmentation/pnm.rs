//! Binary PPM (`P6`) and PGM (`P5`) with 8-bit samples.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

struct Header {
    width: usize,
    height: usize,
    body: usize,
}

fn parse_header(bytes: &[u8], magic: &[u8; 2]) -> std::result::Result<Header, String> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(format!("expected magic {}", String::from_utf8_lossy(magic)));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err("malformed header field".into());
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("header field out of range")?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("missing whitespace after header".into());
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format!("only maxval 255 is supported, got {maxval}"));
    }
    if width == 0 || height == 0 {
        return Err("empty image".into());
    }
    Ok(Header { width, height, body: pos + 1 })
}

fn image_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn decode_ppm(bytes: &[u8]) -> std::result::Result<RgbImage, String> {
    let h = parse_header(bytes, b"P6")?;
    let count = h.width * h.height;
    let body = bytes.get(h.body..h.body + 3 * count).ok_or("truncated pixel data")?;
    Ok(RgbImage {
        width: h.width,
        height: h.height,
        pixels: body.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    })
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let h = parse_header(bytes, b"P5")?;
    let count = h.width * h.height;
    let body = bytes.get(h.body..h.body + count).ok_or("truncated pixel data")?;
    Ok(GrayImage {
        width: h.width,
        height: h.height,
        pixels: body.to_vec(),
    })
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.pixels.iter().flatten());
    out
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(&img.pixels);
    out
}

pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    let bytes = std::fs::read(path)?;
    decode_ppm(&bytes).map_err(|e| image_error(path, e))
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path)?;
    decode_pgm(&bytes).map_err(|e| image_error(path, e))
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    write_atomic(path, &encode_ppm(img))
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    write_atomic(path, &encode_pgm(img))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rgb = RgbImage {
            width: 3,
            height: 2,
            pixels: (0..6).map(|i| [i as u8, 10 * i as u8, 255 - i as u8]).collect(),
        };
        assert_eq!(decode_ppm(&encode_ppm(&rgb)).unwrap(), rgb);
        let gray = GrayImage {
            width: 2,
            height: 2,
            pixels: vec![0, 1, 2, 3],
        };
        assert_eq!(decode_pgm(&encode_pgm(&gray)).unwrap(), gray);
    }

    #[test]
    fn comments_and_errors() {
        let bytes = b"P5 # a comment\n2 1\n# another\n255\n\x01\x02";
        assert_eq!(decode_pgm(bytes).unwrap().pixels, vec![1, 2]);
        assert!(decode_pgm(b"P5\n2 1\n255\n\x01").is_err());
        assert!(decode_pgm(b"P6\n1 1\n255\n\x01\x01\x01").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x01\x01").is_err());
        assert!(decode_ppm(b"P6\n0 1\n255\n").is_err());
    }
}
