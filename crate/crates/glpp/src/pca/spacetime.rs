use crate::harness::CellUniforms;
use crate::measures::MeasureFamily;

/// Levels η(x, y) of the space-time diagram on Z/L x {0..rows}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceTime {
    l: usize,
    levels: Vec<Vec<u64>>,
}

impl SpaceTime {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn rows(&self) -> usize {
        self.levels.len()
    }

    pub fn row(&self, y: usize) -> &[u64] {
        &self.levels[y]
    }

    pub fn eta(&self, x: i64, y: usize) -> u64 {
        self.levels[y][x.rem_euclid(self.l as i64) as usize]
    }
}

/// Iterates the automaton from the zero line for `rows` further rows with
/// fresh per-cell draws.
pub fn iterate_space_time(l: usize, fam: &MeasureFamily, rows: usize, seed: u64) -> SpaceTime {
    iterate_space_time_with(l, fam, rows, &CellUniforms::new(seed))
}

/// η(x, y) = max(η(x, y-1), η(x+1, y-1)) + ξ. The draw for (x, y) is the
/// uniform of the cylinder cell it maps to, (2x + y mod 2L, y), so the
/// result can be compared with the growth field cell by cell.
pub fn iterate_space_time_with(l: usize, fam: &MeasureFamily, rows: usize, cells: &CellUniforms) -> SpaceTime {
    let mut levels = vec![vec![0u64; l]];
    for y in 1..=rows {
        let prev = &levels[y - 1];
        let next = (0..l)
            .map(|x| {
                let (a, b) = (prev[x], prev[(x + 1) % l]);
                let cx = (2 * x + y) % (2 * l);
                a.max(b) + fam.at(a.abs_diff(b)).sample(cells.uniform(cx as i64, y as i64))
            })
            .collect();
        levels.push(next);
    }
    SpaceTime { l, levels }
}
