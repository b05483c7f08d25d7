//! Ground-truth occupancy grids and the `.map` text format.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::ParseError;
use crate::world_model::WorldPoint;

/// Traversal risk of a free cell touching a wall (8-neighbourhood).
pub const WALL_RISK: f64 = 0.3;
/// Traversal risk of a free cell two cells from the nearest wall.
pub const NEAR_WALL_RISK: f64 = 0.1;
/// Cell width used when a map has no header.
pub const DEFAULT_CELL_WIDTH: f64 = 0.5;

/// Closed occupancy grid. Cell `(col, row)` is centred at
/// `(col * w, row * w)`; row 0 is the southern edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthGrid {
    width: usize,
    height: usize,
    cell_width: f64,
    occupied: Vec<bool>,
    start: (usize, usize),
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

impl GroundTruthGrid {
    /// Build from an occupancy array in row-major order, row 0 south.
    pub fn from_cells(
        width: usize,
        height: usize,
        cell_width: f64,
        occupied: Vec<bool>,
        start: (usize, usize),
    ) -> Result<Self, String> {
        if width < 3 || height < 3 || occupied.len() != width * height {
            return Err(format!("bad grid shape {width}x{height}"));
        }
        if !(cell_width > 0.0 && cell_width.is_finite()) {
            return Err(format!("bad cell width {cell_width}"));
        }
        let g = Self {
            width,
            height,
            cell_width,
            occupied,
            start,
        };
        if start.0 >= width || start.1 >= height || g.occupied[start.1 * width + start.0] {
            return Err("start cell must be free".into());
        }
        for row in 0..height {
            for col in 0..width {
                let edge = row == 0 || col == 0 || row == height - 1 || col == width - 1;
                if edge && !g.occupied[row * width + col] {
                    return Err("world not closed".into());
                }
            }
        }
        Ok(g)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn start_cell(&self) -> (usize, usize) {
        self.start
    }

    pub fn start(&self) -> WorldPoint {
        self.cell_center(self.start.0, self.start.1)
    }

    pub fn cell_center(&self, col: usize, row: usize) -> WorldPoint {
        WorldPoint::new(col as f64 * self.cell_width, row as f64 * self.cell_width)
    }

    /// Cell containing `p`, possibly off the grid.
    pub fn cell_of(&self, p: WorldPoint) -> (i64, i64) {
        (
            (p.x / self.cell_width).round() as i64,
            (p.y / self.cell_width).round() as i64,
        )
    }

    /// Off-grid cells count as occupied.
    pub fn is_occupied(&self, col: i64, row: i64) -> bool {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return true;
        }
        self.occupied[row as usize * self.width + col as usize]
    }

    pub fn is_free(&self, col: i64, row: i64) -> bool {
        !self.is_occupied(col, row)
    }

    pub fn free_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| !o).count()
    }

    /// Traversal risk of a free cell from its distance to the nearest wall.
    pub fn cell_risk(&self, col: i64, row: i64) -> f64 {
        let near = |r: i64| {
            (-r..=r).any(|dy| (-r..=r).any(|dx| self.is_occupied(col + dx, row + dy)))
        };
        if near(1) {
            WALL_RISK
        } else if near(2) {
            NEAR_WALL_RISK
        } else {
            0.0
        }
    }

    /// Risk of the edge between two adjacent cells.
    pub fn edge_risk(&self, a: (i64, i64), b: (i64, i64)) -> f64 {
        0.5 * (self.cell_risk(a.0, a.1) + self.cell_risk(b.0, b.1))
    }

    /// Free cells 8-connected to the start cell.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.occupied.len()];
        let mut stack = vec![self.start];
        seen[self.start.1 * self.width + self.start.0] = true;
        while let Some((c, r)) = stack.pop() {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (x, y) = (c as i64 + dx, r as i64 + dy);
                    if self.is_free(x, y) {
                        let i = y as usize * self.width + x as usize;
                        if !seen[i] {
                            seen[i] = true;
                            stack.push((x as usize, y as usize));
                        }
                    }
                }
            }
        }
        seen
    }

    pub fn reachable_area(&self) -> f64 {
        let n = self.reachable().iter().filter(|&&b| b).count();
        n as f64 * self.cell_width * self.cell_width
    }

    /// Text form with a three-line header, readable by [`load_environment`].
    pub fn to_map_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}\n{}\n{}", self.width, self.height, self.cell_width);
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                let ch = if (col, row) == self.start {
                    'S'
                } else if self.occupied[row * self.width + col] {
                    '#'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for GroundTruthGrid {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_environment(s)
    }
}

fn is_numeric_line(line: &str) -> bool {
    let t: Vec<&str> = line.split_whitespace().collect();
    !t.is_empty() && t.iter().all(|x| x.parse::<f64>().is_ok())
}

/// Parse an ASCII grid: `#` wall, `.` free, `S` start (exactly one). The
/// first text row is the northern edge.
///
/// An optional header gives `cols rows cell_width`, either on one line or on
/// three consecutive lines. Without it the cell width defaults to 0.5 m.
pub fn load_environment(text: &str) -> Result<GroundTruthGrid, ParseError> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let mut end = lines.len();
    while end > 0 && lines[end - 1].trim().is_empty() {
        end -= 1;
    }
    let lines = &lines[..end];

    let mut header: Option<(usize, usize, f64)> = None;
    let mut first = 0;
    if let Some(l0) = lines.first().filter(|l| is_numeric_line(l)) {
        let toks: Vec<&str> = l0.split_whitespace().collect();
        let (vals, used): (Vec<&str>, usize) = if toks.len() == 3 {
            (toks, 1)
        } else if toks.len() == 1 && lines.len() >= 3 && lines[1..3].iter().all(|l| is_numeric_line(l)) {
            (lines[..3].iter().map(|l| l.trim()).collect(), 3)
        } else {
            return Err(perr(1, 1, "header must be `cols rows cell_width`"));
        };
        let cols = vals[0]
            .parse::<usize>()
            .map_err(|_| perr(1, 1, "column count must be a positive integer"))?;
        let rows = vals[1]
            .parse::<usize>()
            .map_err(|_| perr(used.min(2), 1, "row count must be a positive integer"))?;
        let cw = vals[2].parse::<f64>().unwrap_or(f64::NAN);
        if !(cw > 0.0 && cw.is_finite()) {
            return Err(perr(used, 1, "cell width must be positive"));
        }
        header = Some((cols, rows, cw));
        first = used;
    }

    let body = &lines[first..];
    if body.is_empty() {
        return Err(perr(first + 1, 1, "empty grid"));
    }
    let cols = body[0].chars().count();
    let rows = body.len();
    let mut occupied = vec![true; cols * rows];
    let mut start = None;
    for (t, line) in body.iter().enumerate() {
        let line_no = first + t + 1;
        let n = line.chars().count();
        if n != cols {
            return Err(perr(
                line_no,
                n.min(cols) + 1,
                format!("ragged row: expected {cols} cells, found {n}"),
            ));
        }
        let row = rows - 1 - t;
        for (col, ch) in line.chars().enumerate() {
            let occ = match ch {
                '#' => true,
                '.' => false,
                'S' => {
                    if start.is_some() {
                        return Err(perr(line_no, col + 1, "multiple start cells"));
                    }
                    start = Some((col, row));
                    false
                }
                other => {
                    return Err(perr(line_no, col + 1, format!("unexpected character {other:?}")));
                }
            };
            let edge = t == 0 || col == 0 || t == rows - 1 || col == cols - 1;
            if edge && !occ {
                return Err(perr(line_no, col + 1, "world not closed"));
            }
            occupied[row * cols + col] = occ;
        }
    }
    let start = start.ok_or_else(|| perr(first + 1, 1, "missing start cell"))?;
    let cell_width = match header {
        Some((hc, hr, cw)) => {
            if hc != cols || hr != rows {
                return Err(perr(
                    1,
                    1,
                    format!("header says {hc}x{hr} but the grid is {cols}x{rows}"),
                ));
            }
            cw
        }
        None => DEFAULT_CELL_WIDTH,
    };
    if cols < 3 || rows < 3 {
        return Err(perr(first + 1, 1, "grid must be at least 3x3"));
    }
    GroundTruthGrid::from_cells(cols, rows, cell_width, occupied, start)
        .map_err(|m| perr(first + 1, 1, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_world() {
        let g = load_environment("###\n#S#\n###").unwrap();
        assert_eq!((g.width(), g.height()), (3, 3));
        assert_eq!(g.start_cell(), (1, 1));
        assert_eq!(g.free_count(), 1);
        assert_eq!(g.cell_width(), DEFAULT_CELL_WIDTH);
    }

    #[test]
    fn ragged_rows() {
        let e = load_environment("#####\n#S.#\n#####").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn open_boundary() {
        let e = load_environment("###\n#S.\n###").unwrap_err();
        assert!(e.message.contains("world not closed"));
        assert_eq!((e.line, e.column), (2, 3));
    }

    #[test]
    fn start_count() {
        assert!(load_environment("####\n#..#\n####").unwrap_err().message.contains("missing"));
        let e = load_environment("####\n#SS#\n####").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }

    #[test]
    fn bad_character() {
        let e = load_environment("###\n#x#\n###").unwrap_err();
        assert_eq!((e.line, e.column), (2, 2));
    }

    #[test]
    fn headers_and_round_trip() {
        let one = load_environment("4 3 0.25\n####\n#S.#\n####\n").unwrap();
        assert_eq!(one.cell_width(), 0.25);
        let three = load_environment("4\n3\n0.25\n####\n#S.#\n####").unwrap();
        assert_eq!(one, three);
        assert_eq!(load_environment(&one.to_map_string()).unwrap(), one);
        assert!(load_environment("5 3 0.5\n####\n#S.#\n####").is_err());
    }

    #[test]
    fn north_is_up() {
        let g = load_environment("#####\n#S..#\n#...#\n#####").unwrap();
        assert_eq!(g.start_cell(), (1, 2));
        assert_eq!(g.start(), WorldPoint::new(0.5, 1.0));
    }

    #[test]
    fn risk_grows_near_walls() {
        let mut text = String::from("#######\n");
        for _ in 0..5 {
            text.push_str("#.....#\n");
        }
        text.push_str("#######\n");
        text = text.replacen('.', "S", 1);
        let g = load_environment(&text).unwrap();
        assert_eq!(g.cell_risk(1, 1), WALL_RISK);
        assert_eq!(g.cell_risk(2, 2), NEAR_WALL_RISK);
        assert_eq!(g.cell_risk(3, 3), 0.0);
        assert!((g.edge_risk((1, 1), (2, 2)) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn reachability_ignores_sealed_pockets() {
        let g = load_environment("#######\n#S.#..#\n#######").unwrap();
        assert_eq!(g.reachable().iter().filter(|&&b| b).count(), 2);
        assert_eq!(g.free_count(), 4);
    }
}
