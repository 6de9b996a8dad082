//! Metric depth raster and its binary file encoding.
//!
//! Layout: magic `DMAP`, width and height as little-endian `u32`, then
//! `width * height` little-endian `f32` values in row-major order (meters).

use thiserror::Error;

use super::mask::{Mask, Pixel};

pub const DEPTH_MAGIC: &[u8; 4] = b"DMAP";
const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepthError {
    #[error("depth file magic is not DMAP")]
    BadMagic,
    #[error("depth header truncated")]
    HeaderTruncated,
    #[error("depth raster short: expected {expected} bytes of samples, got {got}")]
    Short { expected: usize, got: usize },
    #[error("depth raster long: {extra} trailing bytes")]
    Long { extra: usize },
    #[error("depth raster has {got} values for {width}x{height}")]
    Size { width: u32, height: u32, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Result<Self, DepthError> {
        if values.len() != width as usize * height as usize {
            return Err(DepthError::Size {
                width,
                height,
                got: values.len(),
            });
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: u32, height: u32, value: f32) -> Self {
        Self {
            width,
            height,
            values: vec![value; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn get(&self, p: Pixel) -> Option<f32> {
        (p.x < self.width && p.y < self.height).then(|| self.values[(p.y * self.width + p.x) as usize])
    }

    pub fn at_index(&self, idx: u32) -> f32 {
        self.values[idx as usize]
    }

    /// Mean over the mask pixels, accumulated in `f64`. `None` for an empty
    /// mask or a mask of different dimensions.
    pub fn mean_over(&self, mask: &Mask) -> Option<f64> {
        if mask.is_empty() || mask.width() != self.width || mask.height() != self.height {
            return None;
        }
        let sum: f64 = mask.indices().map(|i| self.values[i as usize] as f64).sum();
        Some(sum / mask.len() as f64)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.values.len());
        out.extend_from_slice(DEPTH_MAGIC);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DepthError> {
        if bytes.len() < 4 || &bytes[..4] != DEPTH_MAGIC {
            return Err(DepthError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(DepthError::HeaderTruncated);
        }
        let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let expected = width as usize * height as usize * 4;
        let body = &bytes[HEADER_LEN..];
        if body.len() < expected {
            return Err(DepthError::Short {
                expected,
                got: body.len(),
            });
        }
        if body.len() > expected {
            return Err(DepthError::Long {
                extra: body.len() - expected,
            });
        }
        let values = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { width, height, values })
    }
}
