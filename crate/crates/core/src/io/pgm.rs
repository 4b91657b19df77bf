//! Masks as plain-text PGM (P2) images with values 0/1.
//!
//! The image covers the full lattice; the top row is the largest `y`.
//! Lattice points outside the domain are written as 0 and must read back as 0.

use std::path::Path;
use std::sync::Arc;

use crate::domain::{Grid, RegionMask};
use crate::error::IoError;

pub fn mask_to_pgm(mask: &RegionMask) -> String {
    let grid = mask.grid();
    let (nx, ny) = grid.lattice_dims();
    let mut out = format!("P2\n{nx} {ny}\n1\n");
    for iy in (0..ny).rev() {
        let row: Vec<&str> = (0..nx)
            .map(|ix| match grid.node_at(ix, iy) {
                Some(p) if mask.contains(p) => "1",
                _ => "0",
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn bad(message: impl Into<String>) -> IoError {
    IoError::Format { format: "pgm", message: message.into() }
}

pub fn mask_from_pgm(text: &str, grid: &Arc<Grid>) -> Result<RegionMask, IoError> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(bad("missing P2 magic"));
    }
    let mut number = |what: &str| -> Result<usize, IoError> {
        let tok = tokens.next().ok_or_else(|| bad(format!("missing {what}")))?;
        tok.parse().map_err(|_| bad(format!("bad {what} {tok:?}")))
    };
    let (nx, ny) = (number("width")?, number("height")?);
    if (nx, ny) != grid.lattice_dims() {
        return Err(bad(format!("image is {nx}x{ny} but the lattice is {:?}", grid.lattice_dims())));
    }
    let maxval = number("maxval")?;
    if maxval == 0 {
        return Err(bad("maxval must be positive"));
    }
    let mut bits = vec![false; grid.len()];
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let v = number("pixel")?;
            if v > maxval {
                return Err(bad(format!("pixel {v} above maxval {maxval}")));
            }
            match grid.node_at(ix, iy) {
                Some(p) => bits[p] = v > 0,
                None if v > 0 => return Err(bad(format!("pixel ({ix}, {iy}) is outside the domain but set"))),
                None => {}
            }
        }
    }
    if number("pixel").is_ok() {
        return Err(bad("trailing pixels"));
    }
    Ok(RegionMask::from_bits(grid, bits)?)
}

pub fn write_mask_pgm(path: &Path, mask: &RegionMask) -> Result<(), IoError> {
    std::fs::write(path, mask_to_pgm(mask)).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

pub fn read_mask_pgm(path: &Path, grid: &Arc<Grid>) -> Result<RegionMask, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Io { path: path.display().to_string(), source })?;
    mask_from_pgm(&text, grid)
}
