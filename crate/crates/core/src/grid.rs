//! Uniform triangulations of the 1- and 2-simplex.
//!
//! The 1-simplex `{(t, 1-t)}` is cut into `m` intervals. The 2-simplex is
//! cut into `m²` congruent triangles: with `x = m·σ₀` and `y = m·σ₁`, the
//! "up" triangle `(a, b)` has corners `(a,b), (a+1,b), (a,b+1)` and the
//! "down" triangle `(a, b)` has corners `(a+1,b), (a,b+1), (a+1,b+1)`.
//! Every cell has the same relative measure `1/m^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimplexGrid {
    k: usize,
    m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tri {
    Up(usize, usize),
    Down(usize, usize),
}

impl SimplexGrid {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        if !(2..=3).contains(&k) {
            return Err(Error::Unsupported(format!(
                "region geometry covers 2 or 3 strategies, got {k}"
            )));
        }
        if m == 0 || m > 4096 {
            return Err(Error::validation(format!("grid resolution {m} outside 1..=4096")));
        }
        Ok(SimplexGrid { k, m })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.k - 1
    }

    pub fn n_cells(&self) -> usize {
        self.m.pow(self.dim() as u32)
    }

    pub fn cell_measure(&self) -> f64 {
        1.0 / self.n_cells() as f64
    }

    // Up triangles occupy indices [0, m(m+1)/2), row by row in `a`;
    // down triangles follow.
    fn up_offset(&self, a: usize) -> usize {
        // rows 0..a hold m, m-1, ..., m-a+1 cells
        a * self.m - a * a.saturating_sub(1) / 2
    }

    fn down_offset(&self, a: usize) -> usize {
        let m = self.m;
        m * (m + 1) / 2 + a * (m - 1) - a * a.saturating_sub(1) / 2
    }

    fn tri_index(&self, t: Tri) -> usize {
        match t {
            Tri::Up(a, b) => self.up_offset(a) + b,
            Tri::Down(a, b) => self.down_offset(a) + b,
        }
    }

    fn tri_of(&self, idx: usize) -> Tri {
        let m = self.m;
        let n_up = m * (m + 1) / 2;
        if idx < n_up {
            let a = last_row_at_or_before(m, |r| self.up_offset(r), idx);
            Tri::Up(a, idx - self.up_offset(a))
        } else {
            let a = last_row_at_or_before(m - 1, |r| self.down_offset(r), idx);
            Tri::Down(a, idx - self.down_offset(a))
        }
    }

    /// Barycenter of a cell as a probability vector.
    pub fn center(&self, idx: usize) -> Vec<f64> {
        let m = self.m as f64;
        match self.k {
            2 => {
                let t = (idx as f64 + 0.5) / m;
                vec![t, 1.0 - t]
            }
            _ => {
                let (x, y) = match self.tri_of(idx) {
                    Tri::Up(a, b) => (a as f64 + 1.0 / 3.0, b as f64 + 1.0 / 3.0),
                    Tri::Down(a, b) => (a as f64 + 2.0 / 3.0, b as f64 + 2.0 / 3.0),
                };
                let (s0, s1) = (x / m, y / m);
                vec![s0, s1, (1.0 - s0 - s1).max(0.0)]
            }
        }
    }

    /// All cell centers, in index order.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        match self.k {
            2 => (0..self.n_cells()).map(|i| self.center(i)).collect(),
            _ => {
                let mut out = vec![Vec::new(); self.n_cells()];
                for a in 0..self.m {
                    for b in 0..self.m - a {
                        let i = self.tri_index(Tri::Up(a, b));
                        out[i] = self.center(i);
                    }
                    for b in 0..(self.m - a).saturating_sub(1) {
                        let i = self.tri_index(Tri::Down(a, b));
                        out[i] = self.center(i);
                    }
                }
                out
            }
        }
    }

    /// Corners of a cell as probability vectors.
    pub fn corners(&self, idx: usize) -> Vec<Vec<f64>> {
        let m = self.m as f64;
        match self.k {
            2 => {
                let (a, b) = (idx as f64 / m, (idx + 1) as f64 / m);
                vec![vec![a, 1.0 - a], vec![b, 1.0 - b]]
            }
            _ => {
                let pts: [(usize, usize); 3] = match self.tri_of(idx) {
                    Tri::Up(a, b) => [(a, b), (a + 1, b), (a, b + 1)],
                    Tri::Down(a, b) => [(a + 1, b), (a, b + 1), (a + 1, b + 1)],
                };
                pts.iter()
                    .map(|&(x, y)| {
                        let (s0, s1) = (x as f64 / m, y as f64 / m);
                        vec![s0, s1, (1.0 - s0 - s1).max(0.0)]
                    })
                    .collect()
            }
        }
    }

    /// Face-adjacent cells.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let m = self.m;
        let mut out = Vec::with_capacity(3);
        match self.k {
            2 => {
                if idx > 0 {
                    out.push(idx - 1);
                }
                if idx + 1 < m {
                    out.push(idx + 1);
                }
            }
            _ => match self.tri_of(idx) {
                Tri::Up(a, b) => {
                    if a + b + 2 <= m {
                        out.push(self.tri_index(Tri::Down(a, b)));
                    }
                    if a > 0 {
                        out.push(self.tri_index(Tri::Down(a - 1, b)));
                    }
                    if b > 0 {
                        out.push(self.tri_index(Tri::Down(a, b - 1)));
                    }
                }
                Tri::Down(a, b) => {
                    out.push(self.tri_index(Tri::Up(a, b)));
                    out.push(self.tri_index(Tri::Up(a + 1, b)));
                    out.push(self.tri_index(Tri::Up(a, b + 1)));
                }
            },
        }
        out
    }

    /// The cell containing `v` (ties on shared faces go to the cell with the
    /// larger coordinates).
    pub fn locate(&self, v: &[f64]) -> usize {
        let m = self.m;
        match self.k {
            2 => ((v[0] * m as f64).floor().max(0.0) as usize).min(m - 1),
            _ => {
                let x = (v[0] * m as f64).clamp(0.0, m as f64);
                let y = (v[1] * m as f64).clamp(0.0, m as f64);
                let mut a = (x.floor() as usize).min(m - 1);
                let mut b = (y.floor() as usize).min(m - 1);
                if a + b > m - 1 {
                    // rounding pushed us outside: pull back onto the last up triangle
                    if a > b {
                        a = m - 1 - b;
                    } else {
                        b = m - 1 - a;
                    }
                    return self.tri_index(Tri::Up(a, b));
                }
                let fx = x - a as f64;
                let fy = y - b as f64;
                if fx + fy < 1.0 || a + b + 2 > m {
                    self.tri_index(Tri::Up(a, b))
                } else {
                    self.tri_index(Tri::Down(a, b))
                }
            }
        }
    }
}

/// Largest `r < rows` with `offset(r) <= idx`, for increasing `offset`.
fn last_row_at_or_before(rows: usize, offset: impl Fn(usize) -> usize, idx: usize) -> usize {
    let (mut lo, mut hi) = (0, rows);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if offset(mid) <= idx {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
