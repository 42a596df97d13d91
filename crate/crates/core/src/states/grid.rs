use crate::error::{invalid, Error, Result};

/// Uniform inclusive axis `min, min + h, …, max` with `count` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    min: f64,
    max: f64,
    count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || !(max > min) {
            return Err(invalid("axis", format!("need finite min < max, got [{min}, {max}]")));
        }
        if count < 2 {
            return Err(invalid("axis", format!("need at least 2 nodes, got {count}")));
        }
        Ok(Self { min, max, count })
    }

    pub fn symmetric(half_width: f64, count: usize) -> Result<Self> {
        Self::new(-half_width, half_width, count)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.count {
            0.5 * h
        } else {
            h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.weight(i)).collect()
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    /// Index of the node nearest to `v`, or a domain error outside the axis.
    pub fn nearest_index(&self, v: f64) -> Result<usize> {
        if !self.contains(v) {
            return Err(Error::Domain(format!("{v} outside axis [{}, {}]", self.min, self.max)));
        }
        let i = ((v - self.min) / self.spacing()).round() as usize;
        Ok(i.min(self.count - 1))
    }

    /// Smallest axis with the same spacing and node alignment that covers
    /// both `self` and `[lo, hi]`.
    pub fn enclose(&self, lo: f64, hi: f64) -> Axis {
        let h = self.spacing();
        let below = if lo < self.min { ((self.min - lo) / h).ceil() as usize } else { 0 };
        let above = if hi > self.max { ((hi - self.max) / h).ceil() as usize } else { 0 };
        Axis {
            min: self.min - below as f64 * h,
            max: self.max + above as f64 * h,
            count: self.count + below + above,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub x: Axis,
    pub y: Axis,
}

impl Grid2 {
    pub fn new(x: Axis, y: Axis) -> Self {
        Self { x, y }
    }

    pub fn len(&self) -> usize {
        self.x.count() * self.y.count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.x.count(), self.y.count(), 1]
    }
}

/// Rectilinear 3D grid, values stored row-major in (x, y, z) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    pub x: Axis,
    pub y: Axis,
    pub z: Axis,
}

impl Grid3 {
    pub fn new(x: Axis, y: Axis, z: Axis) -> Self {
        Self { x, y, z }
    }

    pub fn len(&self) -> usize {
        self.x.count() * self.y.count() * self.z.count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.x.count(), self.y.count(), self.z.count()]
    }

    pub fn axis(&self, i: usize) -> &Axis {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis index {i} out of range"),
        }
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.y.count() + iy) * self.z.count() + iz
    }

    pub fn transverse(&self) -> Grid2 {
        Grid2::new(self.x, self.y)
    }

    pub fn cell_weight(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.x.weight(ix) * self.y.weight(iy) * self.z.weight(iz)
    }
}
