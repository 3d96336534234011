use crate::bodies::SupportField;
use crate::error::{GeomError, Result};
use crate::measures::DensityField;
use crate::sphere::{SphereGrid, SphereOperator};

/// `h^{1-p} (h'' + h) - g` at every node of a planar grid, with spectral
/// second derivatives.
pub fn monge_ampere_residual(h: &SupportField, g: &DensityField, p: f64) -> Result<Vec<f64>> {
    let grid = h.grid();
    if grid.dim() != 2 {
        return Err(GeomError::UnsupportedDimension {
            dim: grid.dim(),
            op: "monge_ampere_residual",
        });
    }
    if g.grid().dim() != 2 || g.grid().len() != grid.len() {
        return Err(GeomError::LengthMismatch {
            expected: grid.len(),
            got: g.grid().len(),
        });
    }
    let vals = h.values();
    if p != 1.0 {
        if let Some(i) = vals.iter().position(|&x| !(x > 0.0)) {
            return Err(GeomError::NegativeSupport { index: i });
        }
    }
    let d2 = SphereOperator::laplacian(grid)?.apply(vals)?;
    Ok(vals
        .iter()
        .zip(&d2)
        .zip(g.values())
        .map(|((&h, &h2), &g)| {
            let w = if p == 1.0 { 1.0 } else { h.powf(1.0 - p) };
            w * (h2 + h) - g
        })
        .collect())
}

/// `Laplacian + (n - p) Id` on the grid.
pub fn linearized_operator(n: usize, p: f64, grid: &SphereGrid) -> Result<SphereOperator> {
    if !(2..=3).contains(&n) {
        return Err(GeomError::UnsupportedDimension {
            dim: n,
            op: "linearized_operator",
        });
    }
    if grid.dim() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: grid.dim(),
        });
    }
    Ok(SphereOperator::laplacian(grid)?.shifted(n as f64 - p))
}
