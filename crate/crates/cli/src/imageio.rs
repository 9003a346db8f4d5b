//! Image and table writers: PFM (32-bit float, little-endian) for intensity
//! and phase planes, PGM (8-bit) quick-looks, PBM (packed bits) for masks,
//! and CSV tables. All writes go to a temporary file in the target directory
//! followed by an atomic rename, so failures never leave partial artifacts.

use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use oamsim_core::{BinaryMask, ComplexField};

use crate::error::CliError;

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let file = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        write(&mut w).map_err(|e| CliError::io(&tmp, e))?;
        w.flush().map_err(|e| CliError::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))?;
    Ok(())
}

fn write_pfm_gray(path: &Path, width: usize, height: usize, rows_bottom_up: &[f32]) -> Result<(), CliError> {
    assert_eq!(rows_bottom_up.len(), width * height);
    atomic_write(path, |w| {
        // "Pf" = grayscale portable float map; negative scale = little-endian
        write!(w, "Pf\n{} {}\n-1.0\n", width, height)?;
        for v in rows_bottom_up {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    })
}

/// Intensity plane |psi|^2 as PFM. Rows run bottom-to-top per the PFM
/// convention, which matches the y-up grid ordering directly.
pub fn write_intensity_pfm(field: &ComplexField, path: &Path) -> Result<(), CliError> {
    let (ny, nx) = field.values().dim();
    let data: Vec<f32> = field.values().iter().map(|v| v.norm_sqr() as f32).collect();
    write_pfm_gray(path, nx, ny, &data)
}

/// Phase plane arg(psi) in radians as PFM.
pub fn write_phase_pfm(field: &ComplexField, path: &Path) -> Result<(), CliError> {
    let (ny, nx) = field.values().dim();
    let data: Vec<f32> = field.values().iter().map(|v| v.arg() as f32).collect();
    write_pfm_gray(path, nx, ny, &data)
}

/// Parse a grayscale little-endian PFM (for round-trip tests and tooling).
pub fn read_pfm(path: &Path) -> Result<(usize, usize, Vec<f32>), CliError> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    let bad = |msg: &str| CliError::Config(format!("{}: {msg}", path.display()));
    // three whitespace-terminated header tokens, then raw samples
    let mut pos = 0usize;
    let mut token = || -> Result<String, CliError> {
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let t = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| CliError::Config(format!("{}: bad header", path.display())))?
            .to_string();
        pos += 1; // single whitespace separator
        Ok(t)
    };
    if token()? != "Pf" {
        return Err(bad("not a grayscale PFM"));
    }
    let width: usize = token()?.parse().map_err(|_| bad("bad width"))?;
    let height: usize = token()?.parse().map_err(|_| bad("bad height"))?;
    let scale: f32 = token()?.parse().map_err(|_| bad("bad scale"))?;
    if scale >= 0.0 {
        return Err(bad("big-endian PFM not supported"));
    }
    let need = width * height * 4;
    if bytes.len() < pos + need {
        return Err(bad("truncated samples"));
    }
    let data = bytes[pos..pos + need]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((width, height, data))
}

/// 8-bit linear quick-look of the intensity, PGM raster (top row first).
pub fn write_quicklook_pgm(field: &ComplexField, path: &Path) -> Result<(), CliError> {
    let (ny, nx) = field.values().dim();
    let max = field
        .values()
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    atomic_write(path, |w| {
        write!(w, "P5\n{} {}\n255\n", nx, ny)?;
        for j in (0..ny).rev() {
            for i in 0..nx {
                let v = field.values()[[j, i]].norm_sqr() / max;
                w.write_all(&[(v * 255.0).round() as u8])?;
            }
        }
        Ok(())
    })
}

/// Packed-bit PBM of a mask: opaque pixels are black (1), open pixels white
/// (0). Raster runs top row first.
pub fn write_mask_pbm(mask: &BinaryMask, path: &Path) -> Result<(), CliError> {
    let (ny, nx) = mask.open().dim();
    atomic_write(path, |w| {
        write!(w, "P4\n{} {}\n", nx, ny)?;
        for j in (0..ny).rev() {
            let mut byte = 0u8;
            let mut nbits = 0;
            for i in 0..nx {
                byte <<= 1;
                if !mask.open()[[j, i]] {
                    byte |= 1;
                }
                nbits += 1;
                if nbits == 8 {
                    w.write_all(&[byte])?;
                    byte = 0;
                    nbits = 0;
                }
            }
            if nbits > 0 {
                byte <<= 8 - nbits;
                w.write_all(&[byte])?;
            }
        }
        Ok(())
    })
}

/// Read back a PBM written by [`write_mask_pbm`] (tests).
pub fn read_pbm(path: &Path) -> Result<(usize, usize, Vec<bool>), CliError> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    let header_end = bytes
        .windows(1)
        .enumerate()
        .filter(|(_, b)| b[0] == b'\n')
        .map(|(i, _)| i)
        .nth(1)
        .ok_or_else(|| CliError::Config(format!("{}: bad PBM header", path.display())))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| CliError::Config(format!("{}: bad PBM header", path.display())))?;
    let mut it = header.split_whitespace();
    if it.next() != Some("P4") {
        return Err(CliError::Config(format!("{}: not a raw PBM", path.display())));
    }
    let width: usize = it.next().unwrap_or("0").parse().unwrap_or(0);
    let height: usize = it.next().unwrap_or("0").parse().unwrap_or(0);
    let row_bytes = width.div_ceil(8);
    let mut black = Vec::with_capacity(width * height);
    let data = &bytes[header_end + 1..];
    for j in 0..height {
        for i in 0..width {
            let b = data[j * row_bytes + i / 8];
            black.push((b >> (7 - i % 8)) & 1 == 1);
        }
    }
    Ok((width, height, black))
}

/// Write rows of a CSV with the given header line.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    atomic_write(path, |w| {
        writeln!(w, "{header}")?;
        for row in rows {
            writeln!(w, "{row}")?;
        }
        Ok(())
    })
}
