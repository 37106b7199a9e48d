//! Bipartite perfect matching by augmenting paths (Kuhn's algorithm).
//!
//! The matching is kept between calls so that, as edges disappear, only the
//! rows that lost their partner need new augmenting paths.

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Matching {
    pub(crate) col_of_row: Vec<usize>,
    row_of_col: Vec<usize>,
    visited: Vec<u32>,
    stamp: u32,
}

impl Matching {
    pub(crate) fn new(n: usize) -> Self {
        Matching {
            col_of_row: vec![NONE; n],
            row_of_col: vec![NONE; n],
            visited: vec![0; n],
            stamp: 0,
        }
    }

    pub(crate) fn unmatch_row(&mut self, row: usize) {
        let col = self.col_of_row[row];
        if col != NONE {
            self.row_of_col[col] = NONE;
            self.col_of_row[row] = NONE;
        }
    }

    /// Extends the current matching to a perfect one over the edges for
    /// which `edge(row, col)` holds. Returns `false` if none exists.
    pub(crate) fn complete(&mut self, edge: impl Fn(usize, usize) -> bool) -> bool {
        let n = self.col_of_row.len();
        for row in 0..n {
            if self.col_of_row[row] != NONE {
                continue;
            }
            self.stamp = self.stamp.wrapping_add(1);
            if self.stamp == 0 {
                self.visited.fill(0);
                self.stamp = 1;
            }
            if !self.augment(row, &edge) {
                return false;
            }
        }
        true
    }

    fn augment(&mut self, row: usize, edge: &impl Fn(usize, usize) -> bool) -> bool {
        let n = self.col_of_row.len();
        for col in 0..n {
            if self.visited[col] == self.stamp || !edge(row, col) {
                continue;
            }
            self.visited[col] = self.stamp;
            let owner = self.row_of_col[col];
            if owner == NONE || self.augment(owner, edge) {
                self.col_of_row[row] = col;
                self.row_of_col[col] = row;
                return true;
            }
        }
        false
    }
}
