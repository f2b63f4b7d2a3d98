//! Full arrival-time fields on cylinders and the quarter-plane.

mod cylinder;
mod quarter;
mod shape;

pub use cylinder::{grow_cylinder, grow_cylinder_with, CylinderField};
pub use quarter::{grow_quarter_plane, grow_quarter_plane_with, superadditivity_probe, QuarterField, SuperaddReport};
pub use shape::{exponential_shape, geometric_shape, shape_profile, ShapeProfile, ShapeReference};

use crate::error::{GlppError, Result};

/// Sends a space-time point (x, y) of the PCA picture to the cylinder cell
/// (2x + y, y).
pub fn phi_map(x: i64, y: i64) -> (i64, i64) {
    (2 * x + y, y)
}

/// Inverse of [`phi_map`]; the cell must satisfy X ≡ Y mod 2.
pub fn phi_inv(cx: i64, cy: i64) -> Result<(i64, i64)> {
    if (cx - cy).rem_euclid(2) != 0 {
        return Err(GlppError::ParityViolation { x: cx, y: cy });
    }
    Ok(((cx - cy).div_euclid(2), cy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert_eq!(phi_map(0, 0), (0, 0));
        assert_eq!(phi_map(1, 2), (4, 2));
        assert_eq!(phi_inv(4, 2).unwrap(), (1, 2));
        assert!(matches!(phi_inv(3, 2), Err(GlppError::ParityViolation { .. })));
    }
}
