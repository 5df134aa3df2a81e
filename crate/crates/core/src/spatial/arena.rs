use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::Path;

use crate::domains::Vec2;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Walkable,
    Wall,
    Exit,
}

impl CellKind {
    fn from_char(c: char) -> Option<Self> {
        match c {
            '.' => Some(Self::Walkable),
            '#' => Some(Self::Wall),
            'E' => Some(Self::Exit),
            _ => None,
        }
    }

    pub fn is_passable(self) -> bool {
        self != Self::Wall
    }
}

/// Rectangular grid of square cells. Cell `(col, row)` has index
/// `row * cols + col` and centre `((col + 0.5) dx, (row + 0.5) dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arena {
    cols: usize,
    rows: usize,
    dx: f64,
    cells: Vec<CellKind>,
    alpha: f64,
}

impl Arena {
    pub fn new(
        cols: usize,
        rows: usize,
        dx: f64,
        cells: Vec<CellKind>,
        alpha: f64,
    ) -> Result<Self> {
        if cols == 0 || rows == 0 || cells.len() != cols * rows {
            return Err(Error::Arena(format!(
                "{} cells do not fill a {cols} x {rows} grid",
                cells.len()
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Arena(format!(
                "cell side must be positive, got {dx}"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Arena(format!(
                "venue quality must lie in [0, 1], got {alpha}"
            )));
        }
        if !cells.contains(&CellKind::Walkable) {
            return Err(Error::Arena("no walkable cell".into()));
        }
        Ok(Self {
            cols,
            rows,
            dx,
            cells,
            alpha,
        })
    }

    /// Parses a map: a header line `cols rows dx` followed by `rows` lines of
    /// `cols` characters each (`.` walkable, `#` wall, `E` exit). Blank
    /// trailing lines are ignored.
    pub fn parse(text: &str, alpha: f64) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or_else(|| Error::Arena("empty map".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad_header =
            || Error::Arena(format!("line 1: expected `cols rows dx`, got `{header}`"));
        if fields.len() != 3 {
            return Err(bad_header());
        }
        let cols: usize = fields[0].parse().map_err(|_| bad_header())?;
        let rows: usize = fields[1].parse().map_err(|_| bad_header())?;
        let dx: f64 = fields[2].parse().map_err(|_| bad_header())?;

        let mut cells = Vec::with_capacity(cols * rows);
        let mut seen = 0;
        for (lineno, line) in lines {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if seen == rows {
                return Err(Error::Arena(format!(
                    "line {}: more than {rows} rows",
                    lineno + 1
                )));
            }
            if line.chars().count() != cols {
                return Err(Error::Arena(format!(
                    "line {}: expected {cols} cells, got {}",
                    lineno + 1,
                    line.chars().count()
                )));
            }
            for c in line.chars() {
                cells.push(CellKind::from_char(c).ok_or_else(|| {
                    Error::Arena(format!("line {}: unknown cell character `{c}`", lineno + 1))
                })?);
            }
            seen += 1;
        }
        if seen != rows {
            return Err(Error::Arena(format!("expected {rows} rows, got {seen}")));
        }
        Self::new(cols, rows, dx, cells, alpha)
    }

    pub fn from_file(path: &Path, alpha: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Arena(format!("{}: {e}", path.display())))?;
        Self::parse(&text, alpha)
    }

    /// Same layout with every exit turned into a wall.
    pub fn closed(&self) -> Self {
        let mut a = self.clone();
        for c in &mut a.cells {
            if *c == CellKind::Exit {
                *c = CellKind::Wall;
            }
        }
        a
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn kinds(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn kind(&self, cell: usize) -> CellKind {
        self.cells[cell]
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.cols, cell / self.cols)
    }

    pub fn center(&self, cell: usize) -> Vec2 {
        let (c, r) = self.coords(cell);
        Vec2::new((c as f64 + 0.5) * self.dx, (r as f64 + 0.5) * self.dx)
    }

    /// Index of the cell offset by `(dc, dr)`, or `None` outside the grid.
    pub fn offset(&self, cell: usize, dc: isize, dr: isize) -> Option<usize> {
        let (c, r) = self.coords(cell);
        let c = c.checked_add_signed(dc)?;
        let r = r.checked_add_signed(dr)?;
        (c < self.cols && r < self.rows).then(|| self.index(c, r))
    }

    /// Kind of the cell at an offset; outside the grid counts as wall.
    pub fn kind_at(&self, cell: usize, dc: isize, dr: isize) -> CellKind {
        self.offset(cell, dc, dr)
            .map_or(CellKind::Wall, |c| self.cells[c])
    }
}

const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest walking distance to the nearest exit and the resulting
/// "programmed" direction of every cell.
///
/// Moves go to the 8 neighbours; diagonal moves cost `√2 dx` and are only
/// allowed when both orthogonal cells they pass between are passable.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetField {
    distance: Vec<f64>,
    direction: Vec<Option<Vec2>>,
}

impl TargetField {
    pub fn compute(arena: &Arena) -> Self {
        let n = arena.len();
        let mut distance = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for (c, k) in arena.kinds().iter().enumerate() {
            if *k == CellKind::Exit {
                distance[c] = 0.0;
                heap.push(Entry(0.0, c));
            }
        }
        let step = |dc: isize, dr: isize| {
            if dc != 0 && dr != 0 {
                std::f64::consts::SQRT_2
            } else {
                1.0
            }
        };
        while let Some(Entry(d, c)) = heap.pop() {
            if d > distance[c] {
                continue;
            }
            for &(dc, dr) in &NEIGHBORS {
                let Some(nb) = Self::reachable(arena, c, dc, dr) else {
                    continue;
                };
                if arena.kind(nb) != CellKind::Walkable {
                    continue;
                }
                let nd = d + step(dc, dr) * arena.dx();
                if nd < distance[nb] {
                    distance[nb] = nd;
                    heap.push(Entry(nd, nb));
                }
            }
        }

        let direction = (0..n)
            .map(|c| {
                if arena.kind(c) != CellKind::Walkable || !distance[c].is_finite() {
                    return None;
                }
                let mut best: Option<(f64, (isize, isize))> = None;
                for &(dc, dr) in &NEIGHBORS {
                    if let Some(nb) = Self::reachable(arena, c, dc, dr) {
                        if best.is_none_or(|(d, _)| distance[nb] < d) {
                            best = Some((distance[nb], (dc, dr)));
                        }
                    }
                }
                best.filter(|(d, _)| *d < distance[c])
                    .map(|(_, (dc, dr))| Vec2::new(dc as f64, dr as f64).normalized())
            })
            .collect();
        Self {
            distance,
            direction,
        }
    }

    fn reachable(arena: &Arena, c: usize, dc: isize, dr: isize) -> Option<usize> {
        let nb = arena.offset(c, dc, dr)?;
        if !arena.kind(nb).is_passable() {
            return None;
        }
        if dc != 0
            && dr != 0
            && !(arena.kind_at(c, dc, 0).is_passable() && arena.kind_at(c, 0, dr).is_passable())
        {
            return None;
        }
        Some(nb)
    }

    /// Distance to the nearest exit (infinite if none is reachable).
    pub fn distance(&self, cell: usize) -> f64 {
        self.distance[cell]
    }

    /// Unit vector toward the neighbour closest to an exit.
    pub fn direction(&self, cell: usize) -> Option<Vec2> {
        self.direction[cell]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORRIDOR: &str = "6 3 1.0\n######\n#...E#\n######\n";

    #[test]
    fn parses_map() {
        let a = Arena::parse(CORRIDOR, 1.0).unwrap();
        assert_eq!((a.cols(), a.rows(), a.dx()), (6, 3, 1.0));
        assert_eq!(a.kind(a.index(1, 1)), CellKind::Walkable);
        assert_eq!(a.kind(a.index(4, 1)), CellKind::Exit);
        assert_eq!(a.kind(0), CellKind::Wall);
        assert_eq!(a.center(a.index(1, 1)), Vec2::new(1.5, 1.5));
    }

    #[test]
    fn rejects_bad_maps() {
        assert!(Arena::parse("2 1 1.0\n..\n", 1.5).is_err());
        assert!(Arena::parse("3 1 1.0\n..\n", 1.0).is_err());
        assert!(Arena::parse("2 2 1.0\n..\n", 1.0).is_err());
        assert!(Arena::parse("2 1 1.0\n.x\n", 1.0).is_err());
        assert!(Arena::parse("2 1 1.0\n##\n", 1.0).is_err());
        assert!(Arena::parse("2 1\n..\n", 1.0).is_err());
    }

    #[test]
    fn target_points_along_corridor() {
        let a = Arena::parse(CORRIDOR, 1.0).unwrap();
        let t = TargetField::compute(&a);
        for c in 1..4 {
            let cell = a.index(c, 1);
            assert_eq!(t.direction(cell), Some(Vec2::new(1.0, 0.0)));
            assert_eq!(t.distance(cell), (4 - c) as f64);
        }
        assert_eq!(t.direction(a.index(4, 1)), None);
    }

    #[test]
    fn no_corner_cutting() {
        // exit at top right; the wall blocks the diagonal shortcut
        let a = Arena::parse("3 2 1.0\n.#E\n...\n", 1.0).unwrap();
        let t = TargetField::compute(&a);
        let start = a.index(1, 1);
        assert_eq!(t.direction(start), Some(Vec2::new(1.0, 0.0)));
        assert_eq!(t.distance(start), 2.0);
        let diag = Arena::parse("3 2 1.0\n..E\n...\n", 1.0).unwrap();
        let t = TargetField::compute(&diag);
        assert_eq!(t.distance(diag.index(1, 1)), std::f64::consts::SQRT_2);
    }
}
