//! Run-length encoded binary masks over a row-major pixel raster.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("zero-length run at {0}")]
    ZeroLengthRun(u32),
    #[error("runs not sorted by start at {0}")]
    Unsorted(u32),
    #[error("overlapping runs at {0}")]
    Overlapping(u32),
    #[error("run [{start}, {len}] exceeds raster of {pixels} pixels")]
    OutOfRange { start: u32, len: u32, pixels: u64 },
    #[error("mask dimensions {0}x{1} do not match {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
}

/// Integer pixel position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub x: u32,
    pub y: u32,
}

impl Pixel {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

/// A run of consecutive row-major pixel indices `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub start: u32,
    pub len: u32,
}

impl Run {
    pub fn end(&self) -> u64 {
        self.start as u64 + self.len as u64
    }
}

/// Binary mask stored as sorted, non-overlapping, non-adjacent runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MaskDoc", into = "MaskDoc")]
pub struct Mask {
    width: u32,
    height: u32,
    runs: Vec<Run>,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct MaskDoc {
    width: u32,
    height: u32,
    rle: Vec<[u32; 2]>,
}

impl TryFrom<MaskDoc> for Mask {
    type Error = MaskError;

    fn try_from(d: MaskDoc) -> Result<Self, MaskError> {
        Mask::from_runs(d.width, d.height, d.rle.into_iter().map(|[s, l]| (s, l)))
    }
}

impl From<Mask> for MaskDoc {
    fn from(m: Mask) -> Self {
        MaskDoc {
            width: m.width,
            height: m.height,
            rle: m.run_pairs(),
        }
    }
}

impl Mask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            runs: Vec::new(),
            count: 0,
        }
    }

    /// Builds a mask from `(start, len)` runs. Runs must be sorted and
    /// non-overlapping; touching runs are merged.
    pub fn from_runs(width: u32, height: u32, runs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, MaskError> {
        let pixels = width as u64 * height as u64;
        let mut out: Vec<Run> = Vec::new();
        let mut prev_start: Option<u32> = None;
        for (start, len) in runs {
            if len == 0 {
                return Err(MaskError::ZeroLengthRun(start));
            }
            if start as u64 + len as u64 > pixels {
                return Err(MaskError::OutOfRange { start, len, pixels });
            }
            if let Some(p) = prev_start {
                if start <= p {
                    return Err(if start == p {
                        MaskError::Overlapping(start)
                    } else {
                        MaskError::Unsorted(start)
                    });
                }
            }
            prev_start = Some(start);
            match out.last_mut() {
                Some(last) if (start as u64) < last.end() => return Err(MaskError::Overlapping(start)),
                Some(last) if start as u64 == last.end() => last.len += len,
                _ => out.push(Run { start, len }),
            }
        }
        let count = out.iter().map(|r| r.len as u64).sum();
        Ok(Self {
            width,
            height,
            runs: out,
            count,
        })
    }

    /// Builds a mask from arbitrary (unsorted, possibly repeated) indices.
    /// Indices outside the raster are dropped.
    pub fn from_indices(width: u32, height: u32, indices: impl IntoIterator<Item = u32>) -> Self {
        let pixels = width as u64 * height as u64;
        let mut idx: Vec<u32> = indices.into_iter().filter(|&i| (i as u64) < pixels).collect();
        idx.sort_unstable();
        idx.dedup();
        let mut runs: Vec<Run> = Vec::new();
        for i in idx {
            match runs.last_mut() {
                Some(last) if last.end() == i as u64 => last.len += 1,
                _ => runs.push(Run { start: i, len: 1 }),
            }
        }
        let count = runs.iter().map(|r| r.len as u64).sum();
        Self {
            width,
            height,
            runs,
            count,
        }
    }

    pub fn from_dense(width: u32, height: u32, dense: &[bool]) -> Self {
        Self::from_indices(
            width,
            height,
            dense.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u32),
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains_index(&self, idx: u32) -> bool {
        // first run starting after idx, then check its predecessor
        let pos = self.runs.partition_point(|r| r.start <= idx);
        pos > 0 && (idx as u64) < self.runs[pos - 1].end()
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.x < self.width && p.y < self.height && self.contains_index(p.y * self.width + p.x)
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.runs.iter().flat_map(|r| r.start..r.start + r.len)
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        let w = self.width;
        self.indices().map(move |i| Pixel::new(i % w, i / w))
    }

    pub fn to_dense(&self) -> Vec<bool> {
        let mut dense = vec![false; self.width as usize * self.height as usize];
        for i in self.indices() {
            dense[i as usize] = true;
        }
        dense
    }

    fn check_dims(&self, other: &Mask) -> Result<(), MaskError> {
        if self.width != other.width || self.height != other.height {
            return Err(MaskError::DimensionMismatch(self.width, self.height, other.width, other.height));
        }
        Ok(())
    }

    /// Number of pixels in both masks (linear merge over runs).
    pub fn intersection_count(&self, other: &Mask) -> Result<u64, MaskError> {
        self.check_dims(other)?;
        let (mut i, mut j, mut total) = (0, 0, 0u64);
        while i < self.runs.len() && j < other.runs.len() {
            let (a, b) = (self.runs[i], other.runs[j]);
            let lo = (a.start as u64).max(b.start as u64);
            let hi = a.end().min(b.end());
            if hi > lo {
                total += hi - lo;
            }
            if a.end() <= b.end() {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(total)
    }

    pub fn union_count(&self, other: &Mask) -> Result<u64, MaskError> {
        Ok(self.count + other.count - self.intersection_count(other)?)
    }

    pub fn union(&self, other: &Mask) -> Result<Mask, MaskError> {
        self.check_dims(other)?;
        Ok(Mask::from_indices(self.width, self.height, self.indices().chain(other.indices())))
    }

    /// Dilation with a `(2r+1)²` square structuring element.
    pub fn dilate(&self, radius: u32) -> Mask {
        if radius == 0 || self.is_empty() {
            return self.clone();
        }
        let (w, h) = (self.width as i64, self.height as i64);
        let r = radius as i64;
        let mut dense = vec![false; (w * h) as usize];
        for p in self.pixels() {
            let (px, py) = (p.x as i64, p.y as i64);
            for y in (py - r).max(0)..=(py + r).min(h - 1) {
                let row = (y * w) as usize;
                for x in (px - r).max(0)..=(px + r).min(w - 1) {
                    dense[row + x as usize] = true;
                }
            }
        }
        Mask::from_dense(self.width, self.height, &dense)
    }

    /// Erosion with a `(2r+1)²` square structuring element; pixels outside
    /// the raster count as background.
    pub fn erode(&self, radius: u32) -> Mask {
        if radius == 0 || self.is_empty() {
            return self.clone();
        }
        let complement = self.complement().dilate(radius);
        let w = self.width;
        let border = radius;
        Mask::from_indices(
            self.width,
            self.height,
            self.pixels()
                .filter(|p| {
                    p.x >= border
                        && p.y >= border
                        && p.x + border < w
                        && p.y + border < self.height
                        && !complement.contains(*p)
                })
                .map(|p| p.y * w + p.x),
        )
    }

    pub fn complement(&self) -> Mask {
        let dense: Vec<bool> = self.to_dense().into_iter().map(|b| !b).collect();
        Mask::from_dense(self.width, self.height, &dense)
    }

    pub fn run_pairs(&self) -> Vec<[u32; 2]> {
        self.runs.iter().map(|r| [r.start, r.len]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn runs_are_validated() {
        assert_eq!(Mask::from_runs(4, 4, [(0, 0)]), Err(MaskError::ZeroLengthRun(0)));
        assert_eq!(Mask::from_runs(4, 4, [(5, 1), (2, 1)]), Err(MaskError::Unsorted(2)));
        assert_eq!(Mask::from_runs(4, 4, [(0, 4), (2, 3)]), Err(MaskError::Overlapping(2)));
        assert_eq!(Mask::from_runs(4, 4, [(0, 4), (3, 3)]), Err(MaskError::Overlapping(3)));
        assert_eq!(Mask::from_runs(4, 4, [(0, 4), (0, 3)]), Err(MaskError::Overlapping(0)));
        assert!(matches!(Mask::from_runs(4, 4, [(10, 7)]), Err(MaskError::OutOfRange { .. })));
        let m = Mask::from_runs(4, 4, [(0, 2), (2, 2), (8, 1)]).unwrap();
        assert_eq!(m.run_pairs(), vec![[0, 4], [8, 1]]);
        assert_eq!(m.len(), 5);
    }

    #[test]
    fn membership() {
        let m = Mask::from_runs(10, 10, [(3, 2), (20, 5)]).unwrap();
        assert!(!m.contains_index(2));
        assert!(m.contains_index(3));
        assert!(m.contains_index(4));
        assert!(!m.contains_index(5));
        assert!(m.contains_index(24));
        assert!(!m.contains_index(25));
        assert!(m.contains(Pixel::new(0, 2)));
        assert!(!m.contains(Pixel::new(10, 0)));
    }

    #[test]
    fn set_counts() {
        let a = Mask::from_indices(20, 20, 0..100);
        let b = Mask::from_indices(20, 20, 50..150);
        assert_eq!(a.intersection_count(&b).unwrap(), 50);
        assert_eq!(a.union_count(&b).unwrap(), 150);
        let c = Mask::from_indices(10, 10, 0..3);
        assert!(a.intersection_count(&c).is_err());
    }

    #[test]
    fn morphology() {
        let m = Mask::from_indices(9, 9, [4 * 9 + 4]);
        let d = m.dilate(1);
        assert_eq!(d.len(), 9);
        assert_eq!(d.erode(1), m);
        // border pixels are eroded away
        let full = Mask::from_indices(5, 5, 0..25);
        assert_eq!(full.erode(1).len(), 9);
        assert_eq!(Mask::from_indices(5, 5, [0]).dilate(2).len(), 9);
    }

    proptest! {
        #[test]
        fn indices_round_trip(idx in proptest::collection::vec(0u32..400, 0..120)) {
            let m = Mask::from_indices(20, 20, idx.iter().copied());
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(m.indices().collect::<Vec<_>>(), sorted.clone());
            prop_assert_eq!(m.len() as usize, sorted.len());
            let rebuilt = Mask::from_runs(20, 20, m.runs().iter().map(|r| (r.start, r.len))).unwrap();
            prop_assert_eq!(rebuilt, m.clone());
            for i in 0..400u32 {
                prop_assert_eq!(m.contains_index(i), sorted.binary_search(&i).is_ok());
            }
        }

        #[test]
        fn dilation_contains_original(idx in proptest::collection::vec(0u32..400, 1..60), r in 0u32..3) {
            let m = Mask::from_indices(20, 20, idx);
            let d = m.dilate(r);
            prop_assert_eq!(m.intersection_count(&d).unwrap(), m.len());
            let e = m.erode(r);
            prop_assert_eq!(e.intersection_count(&m).unwrap(), e.len());
        }
    }
}
