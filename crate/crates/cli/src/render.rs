//! Hammer-projection grayscale rasters.

use std::f64::consts::SQRT_2;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::formats;
use qdiff_core::{HarmonicCoefficients, UnitVector3};

/// Pixels outside the projection ellipse.
pub const BACKGROUND: [u8; 3] = [24, 32, 64];

#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl RasterImage {
    pub fn pixel(&self, col: usize, row: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

/// Field values mapped to the raster, with the range used for the colormap.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub image: RasterImage,
    pub min: f64,
    pub max: f64,
}

/// `(x, y)` with `x ∈ [−2√2, 2√2]`, `y ∈ [−√2, √2]` for latitude `phi`, longitude `lam`.
pub fn hammer_forward(phi: f64, lam: f64) -> (f64, f64) {
    let d = (1.0 + phi.cos() * (lam / 2.0).cos()).sqrt();
    (2.0 * SQRT_2 * phi.cos() * (lam / 2.0).sin() / d, SQRT_2 * phi.sin() / d)
}

/// Latitude and longitude of a projected point, or `None` outside the ellipse.
pub fn hammer_inverse(x: f64, y: f64) -> Option<(f64, f64)> {
    let q = 1.0 - (x / 4.0).powi(2) - (y / 2.0).powi(2);
    if x * x / 8.0 + y * y / 2.0 > 1.0 || q < 0.0 {
        return None;
    }
    let z = q.sqrt();
    let lam = 2.0 * (z * x).atan2(2.0 * (2.0 * z * z - 1.0));
    let phi = (z * y).clamp(-1.0, 1.0).asin();
    Some((phi, lam))
}

/// Sphere point at the centre of pixel `(col, row)`, north at the top.
pub fn pixel_point(width: usize, height: usize, col: usize, row: usize) -> Option<UnitVector3> {
    let x = ((col as f64 + 0.5) / width as f64 * 2.0 - 1.0) * 2.0 * SQRT_2;
    let y = (1.0 - (row as f64 + 0.5) / height as f64 * 2.0) * SQRT_2;
    let (phi, lam) = hammer_inverse(x, y)?;
    Some(UnitVector3::from_spherical(std::f64::consts::FRAC_PI_2 - phi, lam))
}

/// Pixel nearest to the projection of `p`.
pub fn project_to_pixel(width: usize, height: usize, p: UnitVector3) -> (usize, usize) {
    let (x, y) = hammer_forward(std::f64::consts::FRAC_PI_2 - p.colatitude(), p.longitude());
    let col = ((x / (2.0 * SQRT_2) + 1.0) / 2.0 * width as f64).floor();
    let row = ((1.0 - y / SQRT_2) / 2.0 * height as f64).floor();
    (col.clamp(0.0, width as f64 - 1.0) as usize, row.clamp(0.0, height as f64 - 1.0) as usize)
}

/// Renders a real field given pointwise; rows are evaluated in parallel.
pub fn render_field<F>(width: usize, field: F) -> CliResult<Rendered>
where
    F: Fn(UnitVector3) -> f64 + Sync,
{
    if width < 16 {
        return Err(CliError::usage(format!("raster width must be at least 16, got {width}")));
    }
    let height = width / 2;
    let values: Vec<Option<f64>> = (0..height)
        .into_par_iter()
        .flat_map_iter(|row| {
            let f = &field;
            (0..width).map(move |col| pixel_point(width, height, col, row).map(f))
        })
        .collect();
    let inside: Vec<f64> = values.iter().flatten().copied().collect();
    if inside.is_empty() {
        return Err(CliError::runtime("render", "empty field"));
    }
    if inside.iter().any(|v| !v.is_finite()) {
        return Err(CliError::runtime("render", "field has non-finite values"));
    }
    let min = inside.iter().copied().fold(f64::INFINITY, f64::min);
    let max = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let scale = span.abs() > 1e-12 * min.abs().max(max.abs()).max(f64::MIN_POSITIVE);
    let mut rgb = Vec::with_capacity(3 * width * height);
    for v in &values {
        match v {
            None => rgb.extend_from_slice(&BACKGROUND),
            Some(v) => {
                let g = if scale { ((v - min) / span * 255.0).round() as u8 } else { 128 };
                rgb.extend_from_slice(&[g, g, g]);
            }
        }
    }
    Ok(Rendered { image: RasterImage { width, height, rgb }, min, max })
}

/// Renders the real part of a coefficient set.
pub fn render_coefficients(coeffs: &HarmonicCoefficients, width: usize) -> CliResult<Rendered> {
    render_field(width, |p| coeffs.evaluate(p).re)
}

/// Writes `<stem>.ppm` and its `<stem>.range.txt` sidecar; returns both file names.
pub fn write_raster(dir: &Path, stem: &str, r: &Rendered) -> CliResult<Vec<String>> {
    let ppm = format!("{stem}.ppm");
    let side = format!("{stem}.range.txt");
    formats::write(&dir.join(&ppm), &r.image.to_ppm())?;
    let text = format!("colormap=grayscale min={:e} max={:e}\n", r.min, r.max);
    formats::write(&dir.join(&side), text.as_bytes())?;
    Ok(vec![ppm, side])
}
