//! Procedural benchmark worlds: the seeded maze and the small scenario maps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GroundTruthGrid;

/// Knobs of the block maze. Blocks are `pitch - 1` cells square with
/// one-cell walls between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MazeParams {
    pub blocks: usize,
    pub pitch: usize,
    pub cell_width: f64,
    /// Fraction of blocks turned into open rooms.
    pub room_fraction: f64,
    /// Fraction of leftover walls knocked down to create loops.
    pub loop_fraction: f64,
    /// Width of passage strips, cells.
    pub passage_width: usize,
}

impl Default for MazeParams {
    fn default() -> Self {
        Self {
            blocks: 9,
            pitch: 11,
            cell_width: 0.5,
            room_fraction: 0.35,
            loop_fraction: 0.1,
            passage_width: 4,
        }
    }
}

struct Canvas {
    width: usize,
    height: usize,
    occ: Vec<bool>,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            occ: vec![true; width * height],
        }
    }

    fn clear(&mut self, c0: usize, r0: usize, c1: usize, r1: usize) {
        for r in r0..=r1 {
            for c in c0..=c1 {
                if c > 0 && r > 0 && c + 1 < self.width && r + 1 < self.height {
                    self.occ[r * self.width + c] = false;
                }
            }
        }
    }

    fn fill(&mut self, c0: usize, r0: usize, c1: usize, r1: usize) {
        for r in r0..=r1 {
            for c in c0..=c1 {
                self.occ[r * self.width + c] = true;
            }
        }
    }

    fn finish(self, cell_width: f64, start: (usize, usize)) -> GroundTruthGrid {
        GroundTruthGrid::from_cells(self.width, self.height, cell_width, self.occ, start)
            .expect("generated world is valid")
    }
}

/// Seeded block maze: a recursive-backtracker spanning tree over a square of
/// blocks, a few extra loops, some blocks opened into rooms and the rest
/// carved as narrow plus-shaped passages that meet at right angles.
pub fn generate_maze(seed: u64, p: &MazeParams) -> GroundTruthGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.blocks;
    let side = n * p.pitch + 1;
    // links[b][d]: block b connects in direction d (0 N, 1 E, 2 S, 3 W)
    let mut links = vec![[false; 4]; n * n];
    let step = |b: usize, d: usize| -> Option<usize> {
        let (bx, by) = (b % n, b / n);
        match d {
            0 if by + 1 < n => Some(b + n),
            1 if bx + 1 < n => Some(b + 1),
            2 if by > 0 => Some(b - n),
            3 if bx > 0 => Some(b - 1),
            _ => None,
        }
    };
    let mut seen = vec![false; n * n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(&b) = stack.last() {
        let mut dirs: Vec<usize> = (0..4)
            .filter(|&d| step(b, d).is_some_and(|o| !seen[o]))
            .collect();
        if dirs.is_empty() {
            stack.pop();
            continue;
        }
        dirs.shuffle(&mut rng);
        let d = dirs[0];
        let o = step(b, d).expect("checked");
        links[b][d] = true;
        links[o][(d + 2) % 4] = true;
        seen[o] = true;
        stack.push(o);
    }
    for b in 0..n * n {
        for d in [0, 1] {
            if let Some(o) = step(b, d) {
                if !links[b][d] && rng.random_bool(p.loop_fraction) {
                    links[b][d] = true;
                    links[o][(d + 2) % 4] = true;
                }
            }
        }
    }
    let rooms: Vec<bool> = (0..n * n).map(|_| rng.random_bool(p.room_fraction)).collect();

    let mut cv = Canvas::new(side, side);
    let inner = p.pitch - 1;
    let lo = (inner - p.passage_width) / 2 + 1;
    let hi = lo + p.passage_width - 1;
    let mid = p.pitch / 2;
    for b in 0..n * n {
        let (x0, y0) = ((b % n) * p.pitch, (b / n) * p.pitch);
        if rooms[b] {
            cv.clear(x0 + 1, y0 + 1, x0 + inner, y0 + inner);
        } else {
            cv.clear(x0 + lo, y0 + lo, x0 + hi, y0 + hi);
            if links[b][0] {
                cv.clear(x0 + lo, y0 + lo, x0 + hi, y0 + p.pitch);
            }
            if links[b][1] {
                cv.clear(x0 + lo, y0 + lo, x0 + p.pitch, y0 + hi);
            }
            if links[b][2] {
                cv.clear(x0 + lo, y0, x0 + hi, y0 + hi);
            }
            if links[b][3] {
                cv.clear(x0, y0 + lo, x0 + hi, y0 + hi);
            }
        }
        // openings between two rooms span the shared wall
        if rooms[b] {
            for d in [0, 1] {
                if !links[b][d] {
                    continue;
                }
                let o = step(b, d).expect("linked");
                if rooms[o] {
                    if d == 0 {
                        cv.clear(x0 + 2, y0 + p.pitch, x0 + inner - 1, y0 + p.pitch);
                    } else {
                        cv.clear(x0 + p.pitch, y0 + 2, x0 + p.pitch, y0 + inner - 1);
                    }
                } else if d == 0 {
                    cv.clear(x0 + lo, y0 + p.pitch, x0 + hi, y0 + p.pitch);
                } else {
                    cv.clear(x0 + p.pitch, y0 + lo, x0 + p.pitch, y0 + hi);
                }
            }
            for d in [2, 3] {
                if links[b][d] {
                    if d == 2 {
                        cv.clear(x0 + lo, y0, x0 + hi, y0);
                    } else {
                        cv.clear(x0, y0 + lo, x0, y0 + hi);
                    }
                }
            }
        }
    }
    // a passage block next to a room must not leak through unlinked walls
    for (b, link) in links.iter().enumerate() {
        let (x0, y0) = ((b % n) * p.pitch, (b / n) * p.pitch);
        for (d, &open) in link.iter().enumerate() {
            if open {
                continue;
            }
            match d {
                0 => cv.fill(x0, y0 + p.pitch, x0 + p.pitch, y0 + p.pitch),
                1 => cv.fill(x0 + p.pitch, y0, x0 + p.pitch, y0 + p.pitch),
                2 => cv.fill(x0, y0, x0 + p.pitch, y0),
                _ => cv.fill(x0, y0, x0, y0 + p.pitch),
            }
        }
    }
    cv.finish(p.cell_width, (mid, mid))
}

/// The maze shipped as `fixtures/maze.map`.
pub fn standard_maze() -> GroundTruthGrid {
    generate_maze(7, &MazeParams::default())
}

/// Straight corridor, 3 m wide and 30 m long, closed at both ends.
pub fn corridor_world() -> GroundTruthGrid {
    let (w, h) = (64, 9);
    let mut cv = Canvas::new(w, h);
    cv.clear(1, 2, w - 2, 7);
    cv.finish(0.5, (3, 4))
}

/// Open 12 m square hall with a short entry corridor.
pub fn hall_world() -> GroundTruthGrid {
    let mut cv = Canvas::new(40, 34);
    cv.clear(2, 2, 8, 5);
    cv.clear(6, 5, 9, 9);
    cv.clear(7, 8, 31, 32);
    cv.finish(0.5, (3, 3))
}

/// Cells written into the planner's map before a false-opening mission.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Injection {
    /// Truth-occupied cells the map wrongly believes are Free.
    pub free: Vec<(usize, usize)>,
    /// Truth-occupied cells marked Occupied up front.
    pub occupied: Vec<(usize, usize)>,
}

/// A start room with a wide, low-risk branch to the east and a one-cell
/// dead-end passage to the north. Past the dead end the map is told there is
/// an open pocket behind a gap in the rock; the pocket does not exist and
/// the map keeps believing in it until the robot bumps into the gap.
pub fn false_opening_world() -> (GroundTruthGrid, Injection) {
    let (w, h) = (60, 60);
    let mut cv = Canvas::new(w, h);
    // start room
    cv.clear(4, 4, 15, 13);
    // wide branch east, then a hall
    cv.clear(16, 5, 35, 12);
    cv.clear(36, 3, 54, 22);
    // narrow passage north from the start room
    cv.clear(10, 14, 10, 25);
    let mut inj = Injection::default();
    for r in 26..38 {
        for c in 4..17 {
            let ring = r == 26 || r == 37 || c == 4 || c == 16;
            if ring && !(r == 26 && (9..=11).contains(&c)) {
                inj.occupied.push((c, r));
            } else {
                inj.free.push((c, r));
            }
        }
    }
    (cv.finish(0.5, (8, 8)), inj)
}
