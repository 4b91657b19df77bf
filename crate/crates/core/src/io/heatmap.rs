use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::IoError;
use crate::field::ScalarField;

/// Blue (zero) to red (maximum) colour ramp; points outside the domain are black.
pub fn write_heatmap(path: &Path, field: &ScalarField) -> Result<(), IoError> {
    let grid = field.grid();
    let (nx, ny) = grid.lattice_dims();
    let top = field.max().max(f64::MIN_POSITIVE);
    let mut img = RgbImage::new(nx as u32, ny as u32);
    for (x, y, px) in img.enumerate_pixels_mut() {
        let iy = ny - 1 - y as usize;
        *px = match grid.node_at(x as usize, iy) {
            Some(p) => {
                let s = (field.values()[p] / top).clamp(0.0, 1.0);
                Rgb([(255.0 * s) as u8, (64.0 * (1.0 - (2.0 * s - 1.0).abs())) as u8, (255.0 * (1.0 - s)) as u8])
            }
            None => Rgb([0, 0, 0]),
        };
    }
    img.save(path).map_err(|e| IoError::Format { format: "png", message: e.to_string() })
}
