use crate::bridges::{validate_timed, Bridge};
use crate::error::{GlppError, Result};
use crate::exact::TransferKernel;
use crate::measures::MeasureFamily;

/// Product of kernel entries along the cyclic bridge: M⁺(v_i; v_{i+1}) on
/// down steps (b_i = +1), M⁻(v_i; v_{i+1}) on up steps.
pub fn hzmm_bridge_weight(b: &Bridge, values: &[i64], kernel: &TransferKernel) -> f64 {
    let n = b.len();
    assert_eq!(values.len(), n, "one value per vertex");
    (0..n)
        .map(|i| {
            let (v, w) = (values[i], values[(i + 1) % n]);
            if b.step(i) == 1 {
                kernel.m_plus(v, w)
            } else {
                kernel.m_minus(v, w)
            }
        })
        .product()
}

/// Vertex values of the zigzag seen at time `n`: vertex i carries the
/// arrival time n - t of the higher column next to it. Vertices at the
/// bottom of a valley (b_{i-1} = +1, b_i = -1) are not determined by the
/// front line and come out as None.
pub fn hzmm_values(b: &Bridge, t: &[u64], n: i64) -> Vec<Option<i64>> {
    let len = b.len();
    (0..len)
        .map(|i| {
            let prev = (i + len - 1) % len;
            if b.step(i) == 1 {
                Some(n - t[i] as i64)
            } else if b.step(prev) == -1 {
                Some(n - t[prev] as i64)
            } else {
                None
            }
        })
        .collect()
}

/// ln of the kernel-product weight of a timed bridge: the zigzag product
/// with every undetermined valley summed out, times the survival factor
/// μ_Δ(> min) of each maximum. Equal to the normalized weight W.
pub fn front_line_kernel_weight(b: &Bridge, t: &[u64], fam: &MeasureFamily, kernel: &TransferKernel) -> Result<f64> {
    validate_timed(b, t).map_err(|v| GlppError::InvalidBridge(v.to_string()))?;
    let len = b.len();
    let n = t.iter().copied().max().unwrap_or(0) as i64 + 1;
    let vals = hzmm_values(b, t, n);
    let mut ln_w = 0.0;
    for i in 0..len {
        let next = (i + 1) % len;
        match (vals[i], vals[next]) {
            (Some(v), Some(w)) => {
                ln_w += if b.step(i) == 1 { kernel.m_plus(v, w) } else { kernel.m_minus(v, w) }.ln();
            }
            // Edge into a valley: the valley is summed with the next edge.
            (Some(v), None) => {
                let w = vals[(i + 2) % len].expect("valley neighbours are determined");
                ln_w += kernel.plus_minus(v, w).ln();
                let (a, c) = (t[i], t[next]);
                ln_w += fam.at(a.abs_diff(c)).log_tail(a.min(c) + 1);
            }
            (None, _) => {}
        }
    }
    Ok(ln_w)
}
