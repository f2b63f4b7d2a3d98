use std::fmt::Write as _;

use crate::bridges::{Bridge, TimedBridge};
use crate::error::{GlppError, Result};
use crate::harness::CellUniforms;
use crate::measures::MeasureFamily;

/// Arrival times on the cylinder Z/2L x N. Row y holds the L cells (x, y)
/// with x + y even, indexed by x / 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderField {
    l: usize,
    rows: Vec<Vec<u64>>,
    until: u64,
}

/// Column of the predecessor on the left and right of cell (x, y).
#[inline]
fn preds(l: usize, y: usize, j: usize) -> (usize, usize) {
    if y % 2 == 1 {
        (j, (j + 1) % l)
    } else {
        ((j + l - 1) % l, j)
    }
}

impl CylinderField {
    /// Builds a field from explicit arrival times (row 0 must be all zero).
    pub fn from_rows(l: usize, rows: Vec<Vec<u64>>, until: u64) -> Result<Self> {
        if rows.is_empty() || rows.iter().any(|r| r.len() != l) || rows[0].iter().any(|t| *t != 0) {
            return Err(GlppError::InvalidMeasure("rows must have L cells and row 0 must be zero".into()));
        }
        for y in 1..rows.len() {
            for j in 0..l {
                let (a, c) = preds(l, y, j);
                if rows[y][j] <= rows[y - 1][a].max(rows[y - 1][c]) {
                    return Err(GlppError::InvalidMeasure(format!("cell {j} of row {y} arrives before a predecessor")));
                }
            }
        }
        Ok(Self { l, rows, until })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn until(&self) -> u64 {
        self.until
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// τ((x, y)) for x in [0, 2L), if computed.
    pub fn tau(&self, x: usize, y: usize) -> Result<u64> {
        if (x + y) % 2 != 0 {
            return Err(GlppError::ParityViolation { x: x as i64, y: y as i64 });
        }
        self.rows
            .get(y)
            .map(|r| r[(x % (2 * self.l)) / 2])
            .ok_or_else(|| GlppError::NotMaterialized(format!("row {y}")))
    }

    /// Highest y in column x with τ ≤ n, and its τ (-1 and None for an odd
    /// column whose first cell has not arrived).
    fn top(&self, x: usize, n: u64) -> Result<(i64, Option<u64>)> {
        let par = x % 2;
        let j = x / 2;
        let count = (self.rows.len() + 1 - par) / 2;
        // Column cells are y = par + 2k; τ increases with k.
        let (mut lo, mut hi) = (0usize, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.rows[par + 2 * mid][j] <= n {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == count {
            return Err(GlppError::NotMaterialized(format!("column {x} above time {n}")));
        }
        Ok(if lo == 0 { (par as i64 - 2, None) } else { (par as i64 + 2 * (lo as i64 - 1), Some(self.rows[par + 2 * (lo - 1)][j])) })
    }

    /// Heights h(x) of the arrived region at time n.
    pub fn heights(&self, n: u64) -> Result<Vec<i64>> {
        if n > self.until {
            return Err(GlppError::NotMaterialized(format!("time {n} beyond {}", self.until)));
        }
        (0..2 * self.l).map(|x| self.top(x, n).map(|t| t.0)).collect()
    }

    /// Front line at time n: b_i = h(i) - h(i+1) and t_i = n - τ(top face of
    /// the higher of columns i, i+1).
    pub fn front_line(&self, n: u64) -> Result<TimedBridge> {
        if n > self.until {
            return Err(GlppError::NotMaterialized(format!("time {n} beyond {}", self.until)));
        }
        let m = 2 * self.l;
        let tops = (0..m).map(|x| self.top(x, n)).collect::<Result<Vec<_>>>()?;
        let mut steps = Vec::with_capacity(m);
        let mut ages = Vec::with_capacity(m);
        for i in 0..m {
            let (a, c) = (tops[i], tops[(i + 1) % m]);
            let step = a.0 - c.0;
            debug_assert!(step == 1 || step == -1);
            steps.push(step as i8);
            let higher = if step == 1 { a.1 } else { c.1 };
            ages.push(n - higher.expect("the higher column has an arrived cell"));
        }
        Ok(TimedBridge::new_unchecked(Bridge::new(steps)?, ages))
    }

    /// Inter-arrival times ζ along edge i: successive cells of columns i and
    /// i+1 alternate in y, and ζ is the gap between consecutive arrivals.
    pub fn edge_residence_times(&self, edge: usize) -> Result<Vec<u64>> {
        let m = 2 * self.l;
        if edge >= m {
            return Err(GlppError::NotMaterialized(format!("edge {edge} of {m}")));
        }
        let (x0, x1) = (edge, (edge + 1) % m);
        let mut times = Vec::new();
        for y in 0..self.rows.len() {
            let x = if (x0 + y) % 2 == 0 { x0 } else { x1 };
            let t = self.rows[y][x / 2];
            if t > self.until {
                break;
            }
            times.push(t);
        }
        Ok(times.windows(2).map(|w| w[1] - w[0]).collect())
    }

    /// CSV rows (x, y, τ) for cells with τ ≤ until.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,tau\n");
        for (y, row) in self.rows.iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                if *t <= self.until {
                    let _ = writeln!(s, "{},{},{}", 2 * j + y % 2, y, t);
                }
            }
        }
        s
    }
}

/// Grows the cylinder of size L from the zero row until every cell with
/// τ ≤ until is known. Cell (x, y) waits ξ = F⁻¹_{μ_Δ}(U(x, y)) with Δ the
/// gap between its predecessors.
pub fn grow_cylinder(l: usize, fam: &MeasureFamily, until: u64, seed: u64) -> Result<CylinderField> {
    grow_cylinder_with(l, fam, until, &CellUniforms::new(seed))
}

pub fn grow_cylinder_with(l: usize, fam: &MeasureFamily, until: u64, cells: &CellUniforms) -> Result<CylinderField> {
    if l == 0 {
        return Err(GlppError::CapExceeded { l, cap: 0 });
    }
    let mut rows = vec![vec![0u64; l]];
    loop {
        let y = rows.len();
        // Every column needs one cell above `until`, so stop once the last two rows are.
        if y > 2 && rows[y - 2..].iter().flatten().all(|t| *t > until) {
            break;
        }
        let prev = &rows[y - 1];
        let row: Vec<u64> = (0..l)
            .map(|j| {
                let (a, c) = preds(l, y, j);
                let (ta, tc) = (prev[a], prev[c]);
                let x = 2 * j + y % 2;
                ta.max(tc) + fam.at(ta.abs_diff(tc)).sample(cells.uniform(x as i64, y as i64))
            })
            .collect();
        rows.push(row);
    }
    Ok(CylinderField { l, rows, until })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::FrontChain;
    use crate::measures::{DiscreteMeasure, Law};

    fn geo(p: f64) -> MeasureFamily {
        MeasureFamily::integrable(DiscreteMeasure::from_law(&Law::Geometric { p }).unwrap()).unwrap()
    }

    #[test]
    fn time_zero_is_row_zero() {
        let f = grow_cylinder(3, &geo(0.5), 0, 1).unwrap();
        assert_eq!(f.front_line(0).unwrap(), TimedBridge::initial(3));
        assert_eq!(f.to_csv().lines().count(), 1 + 3);
        assert_eq!(f.heights(0).unwrap(), vec![0, -1, 0, -1, 0, -1]);
    }

    #[test]
    fn figure_configuration() {
        // h = (2,1,2,1,2,3,2,3) at n = 9.
        let rows = vec![vec![0, 0, 0, 0], vec![1, 1, 1, 1], vec![4, 9, 5, 3], vec![12, 11, 8, 8], vec![14, 13, 13, 10], vec![20, 20, 20, 20]];
        let f = CylinderField::from_rows(4, rows, 9).unwrap();
        let front = f.front_line(9).unwrap();
        assert_eq!(front.bridge().code(), "+-+--+-+");
        assert_eq!(front.ages(), &[5, 0, 0, 4, 1, 1, 1, 1]);
    }

    #[test]
    fn strictly_increasing_and_valid_fronts() {
        let fam = MeasureFamily::integrable(DiscreteMeasure::from_law(&Law::Poisson { lambda: 1.0 }).unwrap()).unwrap();
        let f = grow_cylinder(4, &fam, 2000, 5).unwrap();
        assert!(CylinderField::from_rows(4, f.rows.clone(), f.until).is_ok());
        for n in (0..=2000).step_by(7) {
            let fl = f.front_line(n).unwrap();
            assert!(crate::bridges::validate_timed(fl.bridge(), fl.ages()).is_ok());
        }
        assert!(matches!(f.front_line(2001), Err(GlppError::NotMaterialized(_))));
    }

    #[test]
    fn chain_and_growth_agree_under_shared_draws() {
        let fam = geo(0.5);
        let cells = CellUniforms::new(77);
        let f = grow_cylinder_with(3, &fam, 3000, &cells).unwrap();
        let mut ch = FrontChain::new(3);
        for n in 1..=3000 {
            ch.step_coupled(&fam, &cells);
            assert_eq!(ch.state(), f.front_line(n).unwrap(), "step {n}");
        }
    }

    #[test]
    fn residence_times_at_l1() {
        let f = grow_cylinder(1, &geo(0.5), 200_000, 3).unwrap();
        let z = f.edge_residence_times(0).unwrap();
        let mean = z.iter().sum::<u64>() as f64 / z.len() as f64;
        assert!((mean - 2.0).abs() < 0.02, "{mean}");
        assert!(z.iter().all(|v| *v >= 1));
    }
}
