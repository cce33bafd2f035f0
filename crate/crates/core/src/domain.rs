//! Periodic 1-D spatial domain and grid quadrature.

use crate::error::{Error, Result};

/// Periodic domain [0, L) split into `nx` equal cells, nodes at cell centers
/// x_j = (j + 1/2) dx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain1D {
    length: f64,
    nx: usize,
    dx: f64,
}

impl Domain1D {
    pub fn new(length: f64, nx: usize) -> Result<Self> {
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "domain length must be finite and positive, got {length}"
            )));
        }
        if nx < 4 {
            return Err(Error::InvalidParam(format!("cell count must be >= 4, got {nx}")));
        }
        Ok(Self {
            length,
            nx,
            dx: length / nx as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Node (cell center) position x_j = (j + 1/2) dx.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    /// Wrap a coordinate into [0, L).
    pub fn wrap(&self, x: f64) -> f64 {
        let y = x.rem_euclid(self.length);
        // rem_euclid can round up to L itself for tiny negative inputs
        if y >= self.length {
            0.0
        } else {
            y
        }
    }

    /// Midpoint quadrature `sum_j values[j] * dx`, summed in index order.
    pub fn grid_integral(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nx, "grid value count must match cell count");
        let mut s = 0.0;
        for &v in values {
            s += v;
        }
        s * self.dx
    }
}
