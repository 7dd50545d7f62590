//! Minimal binary PGM (P5, 8-bit) support for APS frames and debug dumps.

use std::io::{self, Write};

/// Encodes gray values in [0,1] as P5, each pixel `round(v * 255)`.
pub fn write_pgm<W: Write>(mut sink: W, width: usize, height: usize, gray: &[f64]) -> io::Result<()> {
    if gray.len() != width * height {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("{} pixels for a {width}x{height} image", gray.len()),
        ));
    }
    write!(sink, "P5\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = gray
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    sink.write_all(&bytes)?;
    sink.flush()
}

/// Decodes a P5 image into `(width, height, gray)` with gray = value / maxval.
pub fn read_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), String> {
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;

    if tokens[0] != "P5" {
        return Err(format!("unsupported PGM magic `{}`", tokens[0]));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| format!("bad PGM header field `{s}`"));
    let (width, height, maxval) = (parse(&tokens[1])?, parse(&tokens[2])?, parse(&tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported PGM maxval {maxval}"));
    }
    let raster = bytes.get(pos..pos + width * height).ok_or("truncated PGM raster")?;
    let gray = raster.iter().map(|&b| f64::from(b) / maxval as f64).collect();
    Ok((width, height, gray))
}
