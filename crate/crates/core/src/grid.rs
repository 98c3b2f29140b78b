//! Equispaced spatial grids for the periodic circle and the truncated line.
//!
//! Both domains are handled with periodic wrap: the circle is periodic by
//! definition, the line is truncated to `[-L, L)` and wrapped, which keeps
//! spectral accuracy for data decaying fast enough that the boundary values
//! are negligible. Experiments on the line must report the truncation
//! half-width together with the observed boundary magnitudes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;

/// Domain kind: the unit of periodicity differs, the machinery does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Circle of circumference `length`, nodes in `[0, length)`.
    PeriodicCircle,
    /// Line truncated to `[-L, L)` with periodic wrap, `length = 2 L`.
    TruncatedLine,
}

impl GridKind {
    pub fn name(self) -> &'static str {
        match self {
            GridKind::PeriodicCircle => "circle",
            GridKind::TruncatedLine => "line",
        }
    }
}

/// Discretized domain: node positions plus the angular wavenumbers used by
/// the discrete Fourier transform. Immutable after construction and shared
/// by every `Field` living on it.
#[derive(Debug)]
pub struct Grid {
    kind: GridKind,
    n: usize,
    length: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.n == other.n && self.length == other.length
    }
}

impl Grid {
    /// Build a grid with `n` nodes. For the circle `extent` is the domain
    /// period; for the truncated line it is the half-width `L` and the
    /// period is `2 L`. `n` must be a power of two, at least 8.
    pub fn new(kind: GridKind, n: usize, extent: f64) -> Result<Arc<Self>> {
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n must be even, got {n}")));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!("n must be at least 8, got {n}")));
        }
        if !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two, got {n}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain extent must be positive and finite, got {extent}"
            )));
        }

        let (length, left) = match kind {
            GridKind::PeriodicCircle => (extent, 0.0),
            GridKind::TruncatedLine => (2.0 * extent, -extent),
        };
        let h = length / n as f64;
        let nodes = (0..n).map(|j| left + j as f64 * h).collect();

        // Wavenumbers in FFT layout: 0, 1, ..., n/2, -(n/2 - 1), ..., -1
        // scaled by 2 pi / length. The Nyquist mode sits at index n/2 and is
        // assigned the positive frequency; odd (derivative-type) symbols
        // zero it so real data stays real.
        let base = 2.0 * std::f64::consts::PI / length;
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                base * m as f64
            })
            .collect();

        Ok(Arc::new(Grid {
            kind,
            n,
            length,
            nodes,
            wavenumbers,
        }))
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Domain period (circumference for the circle, `2 L` for the line).
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Half-width `L` for the truncated line, `None` on the circle.
    pub fn half_width(&self) -> Option<f64> {
        match self.kind {
            GridKind::TruncatedLine => Some(self.length / 2.0),
            GridKind::PeriodicCircle => None,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    pub fn is_circle(&self) -> bool {
        self.kind == GridKind::PeriodicCircle
    }

    /// Left endpoint of the fundamental domain.
    pub fn origin(&self) -> f64 {
        self.nodes[0]
    }

    /// Samples of the Green's function of `1 - d^2/dx^2` on this domain:
    /// `exp(-|x|)/2` on the line, `cosh(d - length/2) / (2 sinh(length/2))`
    /// with `d = x mod length` on the circle. Used to cross-validate the
    /// Fourier-space inversion against direct discrete convolution.
    pub fn kernel_samples(self: &Arc<Self>) -> Field {
        let values = match self.kind {
            GridKind::TruncatedLine => self.nodes.iter().map(|&x| 0.5 * (-x.abs()).exp()).collect(),
            GridKind::PeriodicCircle => {
                let half = self.length / 2.0;
                let norm = 2.0 * half.sinh();
                self.nodes
                    .iter()
                    .map(|&x| {
                        let d = x.rem_euclid(self.length);
                        ((d - half).cosh()) / norm
                    })
                    .collect()
            }
        };
        Field::from_values_unchecked(self.clone(), values)
    }
}
