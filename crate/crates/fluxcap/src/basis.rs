//! Truncated charge basis for the three active circuit nodes.
//!
//! States are labelled by Cooper-pair numbers (n_a, n_b, n_c), each clipped
//! to [-nc, nc]; node b is the gated island. The linear index runs fastest
//! over n_c, then n_b, then n_a, so the basis is a 3-level odometer of width
//! 2 nc + 1.

use crate::{Error, Result};

/// Hard upper bound on the charge cutoff; (2*15+1)^3 keeps dense fallback
/// solves and vector storage within reach.
pub const MAX_CUTOFF: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChargeBasis {
    nc: i32,
    width: usize,
    dim: usize,
}

impl ChargeBasis {
    /// A basis with per-node charges in [-nc, nc]. The cutoff must be at
    /// least 1 so every Josephson stencil has somewhere to act, and at most
    /// [`MAX_CUTOFF`].
    pub fn new(nc: u32) -> Result<Self> {
        if nc < 1 {
            return Err(Error::domain("charge cutoff must be at least 1"));
        }
        if nc > MAX_CUTOFF {
            return Err(Error::domain(format!(
                "charge cutoff {nc} exceeds the supported maximum {MAX_CUTOFF}"
            )));
        }
        let width = 2 * nc as usize + 1;
        Ok(ChargeBasis {
            nc: nc as i32,
            width,
            dim: width * width * width,
        })
    }

    pub fn cutoff(&self) -> u32 {
        self.nc as u32
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Linear index of a charge triple, or `None` outside the cutoff box.
    pub fn index_of(&self, n: [i32; 3]) -> Option<usize> {
        if n.iter().any(|&v| v < -self.nc || v > self.nc) {
            return None;
        }
        let w = self.width;
        let a = (n[0] + self.nc) as usize;
        let b = (n[1] + self.nc) as usize;
        let c = (n[2] + self.nc) as usize;
        Some((a * w + b) * w + c)
    }

    /// Charge triple of a linear index.
    pub fn charges_of(&self, idx: usize) -> [i32; 3] {
        debug_assert!(idx < self.dim);
        let w = self.width;
        let c = (idx % w) as i32 - self.nc;
        let b = ((idx / w) % w) as i32 - self.nc;
        let a = (idx / (w * w)) as i32 - self.nc;
        [a, b, c]
    }

    /// Iterates all charge triples in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, [i32; 3])> + '_ {
        (0..self.dim).map(move |i| (i, self.charges_of(i)))
    }
}
