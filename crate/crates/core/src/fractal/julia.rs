use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_JULIA_SIDE: usize = 4096;
const ESCAPE_RADIUS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum JuliaMap {
    /// z² + λ/z²
    QuadraticPlusInverse { lambda_re: f64, lambda_im: f64 },
    /// z² − 16/(27z)
    CubicCritical,
}

impl JuliaMap {
    /// `None` at a pole.
    fn apply(self, z: Complex64) -> Option<Complex64> {
        match self {
            JuliaMap::QuadraticPlusInverse {
                lambda_re,
                lambda_im,
            } => {
                let lambda = Complex64::new(lambda_re, lambda_im);
                let z2 = z * z;
                if lambda == Complex64::new(0.0, 0.0) {
                    Some(z2)
                } else if z2.norm_sqr() == 0.0 {
                    None
                } else {
                    Some(z2 + lambda / z2)
                }
            }
            JuliaMap::CubicCritical => {
                if z.norm_sqr() == 0.0 {
                    None
                } else {
                    Some(z * z - Complex64::new(16.0 / 27.0, 0.0) / z)
                }
            }
        }
    }
}

/// Pixel grid over `[center − half_width, center + half_width]` in both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JuliaGrid {
    pub center_re: f64,
    pub center_im: f64,
    pub half_width: f64,
    pub width: usize,
    pub height: usize,
}

impl JuliaGrid {
    pub fn pixel(&self, i: usize, j: usize) -> Complex64 {
        let step_x = 2.0 * self.half_width / self.width as f64;
        let step_y = 2.0 * self.half_width / self.height as f64;
        Complex64::new(
            self.center_re - self.half_width + (i as f64 + 0.5) * step_x,
            self.center_im + self.half_width - (j as f64 + 0.5) * step_y,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JuliaRaster {
    pub grid: JuliaGrid,
    /// Row-major; 0 means the orbit did not escape within `max_iter`.
    pub escape_iter: Vec<u32>,
    pub max_iter: u32,
}

impl JuliaRaster {
    pub fn escaped(&self, i: usize, j: usize) -> bool {
        self.escape_iter[j * self.grid.width + i] > 0
    }

    /// Binary PGM, brighter for faster escape, black for non-escaping.
    pub fn write_pgm(&self, mut out: impl Write) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.grid.width, self.grid.height)?;
        let max = self.max_iter.max(1) as f64;
        let bytes: Vec<u8> = self
            .escape_iter
            .iter()
            .map(|&n| {
                if n == 0 {
                    0
                } else {
                    (255.0 * (1.0 - (n - 1) as f64 / max)).round() as u8
                }
            })
            .collect();
        out.write_all(&bytes)
    }
}

/// Escape-time classification of each pixel under `map`.
pub fn julia_raster(map: JuliaMap, grid: JuliaGrid, max_iter: u32) -> Result<JuliaRaster> {
    if grid.width > MAX_JULIA_SIDE || grid.height > MAX_JULIA_SIDE {
        return Err(Error::ResourceLimit {
            what: "julia raster side",
            requested: grid.width.max(grid.height),
            max: MAX_JULIA_SIDE,
        });
    }
    let mut escape_iter = vec![0; grid.width * grid.height];
    for j in 0..grid.height {
        for i in 0..grid.width {
            let mut z = grid.pixel(i, j);
            for n in 1..=max_iter {
                match map.apply(z) {
                    Some(w) if w.norm() <= ESCAPE_RADIUS => z = w,
                    _ => {
                        escape_iter[j * grid.width + i] = n;
                        break;
                    }
                }
            }
        }
    }
    Ok(JuliaRaster {
        grid,
        escape_iter,
        max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> JuliaGrid {
        JuliaGrid {
            center_re: 0.0,
            center_im: 0.0,
            half_width: 2.0,
            width: n,
            height: n,
        }
    }

    #[test]
    fn squaring_map_escapes_outside_unit_disk() {
        let map = JuliaMap::QuadraticPlusInverse {
            lambda_re: 0.0,
            lambda_im: 0.0,
        };
        let g = grid(101);
        let r = julia_raster(map, g, 200).unwrap();
        let mid = 50;
        for i in 0..g.width {
            let z = g.pixel(i, mid);
            if (z.norm() - 1.0).abs() < 1e-3 {
                continue;
            }
            assert_eq!(r.escaped(i, mid), z.norm() > 1.0, "pixel {z}");
        }
    }

    #[test]
    fn far_point_escapes_fast() {
        let g = JuliaGrid {
            center_re: 10.0,
            center_im: 0.0,
            half_width: 1e-6,
            width: 1,
            height: 1,
        };
        let r = julia_raster(JuliaMap::CubicCritical, g, 50).unwrap();
        assert!(r.escape_iter[0] >= 1 && r.escape_iter[0] <= 5);
    }

    #[test]
    fn zero_iterations_escape_nothing() {
        let r = julia_raster(JuliaMap::CubicCritical, grid(16), 0).unwrap();
        assert!(r.escape_iter.iter().all(|&n| n == 0));
        let mut buf = Vec::new();
        r.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n16 16\n255\n"));
    }

    #[test]
    fn oversize_rejected() {
        assert!(julia_raster(JuliaMap::CubicCritical, grid(4097), 1).is_err());
    }
}
