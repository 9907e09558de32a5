//! Finite lattice geometry: boxes and tori in Z^d.
//!
//! Vertices are linear indices into a row-major layout (coordinate 0 is the
//! most significant), so linear order coincides with lexicographic order of
//! coordinate tuples. Edges are nearest-neighbor pairs enumerated in a fixed
//! canonical order: direction-major, then lexicographic order of the lower
//! endpoint. All randomness, serialization and sweep orders refer to this
//! canonical order.

use crate::error::{RcmError, Result};
use serde::{Deserialize, Serialize};

/// Boundary handling for walks and kernels.
///
/// * `Absorbing` marks the outer layer of the box (any coordinate at 0 or
///   side-1) as absorbing: walks stop there and kernel mass stays put.
/// * `Periodic` wraps every direction (torus).
/// * `Free` keeps the walk inside by renormalizing the transition row over
///   the existing edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Absorbing,
    Periodic,
    Free,
}

impl BoundaryMode {
    pub fn to_byte(self) -> u8 {
        match self {
            BoundaryMode::Absorbing => 0,
            BoundaryMode::Periodic => 1,
            BoundaryMode::Free => 2,
        }
    }

    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(BoundaryMode::Absorbing),
            1 => Ok(BoundaryMode::Periodic),
            2 => Ok(BoundaryMode::Free),
            _ => Err(RcmError::Format(format!("unknown boundary mode byte {b}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDomain {
    sides: Vec<u32>,
    boundary: BoundaryMode,
}

impl LatticeDomain {
    pub fn new(sides: Vec<u32>, boundary: BoundaryMode) -> Result<Self> {
        if sides.is_empty() {
            return Err(RcmError::invalid("domain.sides", "dimension must be >= 1"));
        }
        for (i, &s) in sides.iter().enumerate() {
            if s == 0 {
                return Err(RcmError::invalid("domain.sides", format!("side {i} is zero")));
            }
            if boundary == BoundaryMode::Periodic && s < 2 {
                return Err(RcmError::invalid(
                    "domain.sides",
                    format!("side {i} must be >= 2 on a torus (no self-edges)"),
                ));
            }
        }
        let mut n: u64 = 1;
        for &s in &sides {
            n = n.saturating_mul(s as u64);
            if n > u32::MAX as u64 * 8 {
                return Err(RcmError::invalid("domain.sides", "domain too large"));
            }
        }
        Ok(LatticeDomain { sides, boundary })
    }

    pub fn torus(sides: Vec<u32>) -> Result<Self> {
        Self::new(sides, BoundaryMode::Periodic)
    }

    pub fn boxed(sides: Vec<u32>, boundary: BoundaryMode) -> Result<Self> {
        Self::new(sides, boundary)
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[u32] {
        &self.sides
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == BoundaryMode::Periodic
    }

    pub fn num_vertices(&self) -> usize {
        self.sides.iter().map(|&s| s as usize).product()
    }

    /// Row-major stride of coordinate `axis` (coordinate 0 most significant).
    fn stride(&self, axis: usize) -> usize {
        self.sides[axis + 1..].iter().map(|&s| s as usize).product()
    }

    pub fn to_coords(&self, mut v: usize) -> Vec<i64> {
        let d = self.dimension();
        let mut c = vec![0i64; d];
        for axis in (0..d).rev() {
            let s = self.sides[axis] as usize;
            c[axis] = (v % s) as i64;
            v /= s;
        }
        c
    }

    pub fn from_coords(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.dimension());
        let mut v = 0usize;
        for (axis, &c) in coords.iter().enumerate() {
            debug_assert!(c >= 0 && (c as u64) < self.sides[axis] as u64);
            v = v * self.sides[axis] as usize + c as usize;
        }
        v
    }

    /// Vertex at the geometric center (sides/2).
    pub fn center(&self) -> usize {
        let coords: Vec<i64> = self.sides.iter().map(|&s| (s / 2) as i64).collect();
        self.from_coords(&coords)
    }

    /// Neighbor of `v` one step along `axis` in direction `sign` (+1/-1).
    /// Returns None when the step leaves a non-periodic box.
    pub fn neighbor(&self, v: usize, axis: usize, sign: i64) -> Option<usize> {
        let s = self.sides[axis] as usize;
        let stride = self.stride(axis);
        let c = (v / stride) % s;
        if sign > 0 {
            if c + 1 < s {
                Some(v + stride)
            } else if self.is_periodic() {
                Some(v - (s - 1) * stride)
            } else {
                None
            }
        } else if c > 0 {
            Some(v - stride)
        } else if self.is_periodic() {
            Some(v + (s - 1) * stride)
        } else {
            None
        }
    }

    /// True if any coordinate sits on the outer layer of the box.
    /// On a torus nothing is boundary.
    pub fn on_outer_layer(&self, v: usize) -> bool {
        if self.is_periodic() {
            return false;
        }
        let c = self.to_coords(v);
        c.iter()
            .zip(&self.sides)
            .any(|(&x, &s)| x == 0 || x == s as i64 - 1)
    }

    /// Vertices of the outer layer (empty on a torus).
    pub fn outer_layer(&self) -> Vec<usize> {
        (0..self.num_vertices())
            .filter(|&v| self.on_outer_layer(v))
            .collect()
    }

    pub fn is_absorbing(&self, v: usize) -> bool {
        self.boundary == BoundaryMode::Absorbing && self.on_outer_layer(v)
    }

    /// Number of canonical edges in direction `axis`.
    pub fn edges_in_dir(&self, axis: usize) -> usize {
        let n = self.num_vertices();
        let s = self.sides[axis] as usize;
        if self.is_periodic() {
            n
        } else {
            n / s * (s - 1)
        }
    }

    pub fn num_edges(&self) -> usize {
        (0..self.dimension()).map(|a| self.edges_in_dir(a)).sum()
    }

    /// Canonical index of the edge from `v` along +axis, if that edge exists.
    pub fn edge_index(&self, v: usize, axis: usize) -> Option<usize> {
        let s = self.sides[axis] as usize;
        let stride = self.stride(axis);
        let c = (v / stride) % s;
        if !self.is_periodic() && c + 1 >= s {
            return None;
        }
        let mut offset = 0usize;
        for a in 0..axis {
            offset += self.edges_in_dir(a);
        }
        let rank = if self.is_periodic() {
            v
        } else {
            // rank of v in the lattice with side[axis] shrunk by one
            let high = v / (stride * s);
            let low = v % stride;
            (high * (s - 1) + c) * stride + low
        };
        Some(offset + rank)
    }

    /// Endpoints (lower vertex, upper vertex, axis) of canonical edge `e`.
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize, usize) {
        let mut rest = e;
        let mut axis = 0;
        loop {
            let cnt = self.edges_in_dir(axis);
            if rest < cnt {
                break;
            }
            rest -= cnt;
            axis += 1;
        }
        let s = self.sides[axis] as usize;
        let stride = self.stride(axis);
        let v = if self.is_periodic() {
            rest
        } else {
            let per_row = (s - 1) * stride;
            let high = rest / per_row;
            let mid = (rest % per_row) / stride;
            let low = rest % stride;
            (high * s + mid) * stride + low
        };
        let w = self.neighbor(v, axis, 1).expect("canonical edge has an upper endpoint");
        (v, w, axis)
    }

    /// Displacement of one lattice step from `v` to its neighbor `w`,
    /// unwrapping torus crossings (entries are +-1 on exactly one axis).
    pub fn step_displacement(&self, v: usize, w: usize) -> Vec<i64> {
        let a = self.to_coords(v);
        let b = self.to_coords(w);
        let d = self.dimension();
        let mut disp = vec![0i64; d];
        for i in 0..d {
            let s = self.sides[i] as i64;
            let mut delta = b[i] - a[i];
            if delta == s - 1 {
                delta = -1;
            } else if delta == -(s - 1) {
                delta = 1;
            }
            disp[i] = delta;
        }
        disp
    }

    /// All existing neighbors of `v` as (axis, sign, neighbor).
    pub fn neighbors(&self, v: usize) -> Vec<(usize, i64, usize)> {
        let mut out = Vec::with_capacity(2 * self.dimension());
        for axis in 0..self.dimension() {
            for sign in [1i64, -1] {
                if let Some(w) = self.neighbor(v, axis, sign) {
                    out.push((axis, sign, w));
                }
            }
        }
        out
    }
}
