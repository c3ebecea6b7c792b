//! Dense matrices over a tower level: reduced row echelon form, kernels, and
//! the small solves the geometry needs. RREF output is canonical, which gives
//! subspaces a hashable identity.

use crate::field::{Fel, FieldTower, Level};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat {
    pub level: Level,
    pub rows: usize,
    pub cols: usize,
    data: Vec<Fel>,
}

impl Mat {
    pub fn zeros(t: &FieldTower, level: Level, rows: usize, cols: usize) -> Mat {
        Mat { level, rows, cols, data: vec![t.zero(level); rows * cols] }
    }

    pub fn identity(t: &FieldTower, level: Level, n: usize) -> Mat {
        let mut m = Mat::zeros(t, level, n, n);
        for i in 0..n {
            m.set(i, i, t.one(level));
        }
        m
    }

    pub fn from_rows(level: Level, cols: usize, rows: Vec<Vec<Fel>>) -> Mat {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols);
            for v in &row {
                assert_eq!(v.level, level);
            }
            data.extend(row);
        }
        Mat { level, rows: r, cols, data }
    }

    pub fn at(&self, r: usize, c: usize) -> Fel {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Fel) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fel] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vec(&self, r: usize) -> Vec<Fel> {
        self.row(r).to_vec()
    }

    pub fn push_row(&mut self, row: &[Fel]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn transpose(&self, t: &FieldTower) -> Mat {
        let mut out = Mat::zeros(t, self.level, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.at(r, c));
            }
        }
        out
    }

    pub fn mul(&self, t: &FieldTower, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let level = self.level.max(other.level);
        let mut out = Mat::zeros(t, level, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = t.add(out.at(r, c), t.mul(a, other.at(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, t: &FieldTower, v: &[Fel]) -> Vec<Fel> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = t.zero(self.level.max(v[0].level));
                for c in 0..self.cols {
                    acc = t.add(acc, t.mul(self.at(r, c), v[c]));
                }
                acc
            })
            .collect()
    }

    /// Left action on a coordinate row: v ↦ v · Mᵀ is not what we want here;
    /// this computes M · vᵀ for a column vector given as a slice.
    pub fn apply(&self, t: &FieldTower, v: &[Fel]) -> Vec<Fel> {
        self.mul_vec(t, v)
    }

    /// In-place reduced row echelon form; returns pivot column indices.
    /// Zero rows are dropped, so the result is the canonical basis of the
    /// row space.
    pub fn rref(&mut self, t: &FieldTower) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pr = 0usize;
        for pc in 0..self.cols {
            let Some(row) = (pr..self.rows).find(|&r| !self.at(r, pc).is_zero()) else {
                continue;
            };
            self.swap_rows(pr, row);
            let inv = t.inv(self.at(pr, pc)).expect("pivot nonzero");
            for c in pc..self.cols {
                self.set(pr, c, t.mul(self.at(pr, c), inv));
            }
            for r in 0..self.rows {
                if r != pr && !self.at(r, pc).is_zero() {
                    let f = self.at(r, pc);
                    for c in pc..self.cols {
                        let v = t.sub(self.at(r, c), t.mul(f, self.at(pr, c)));
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(pc);
            pr += 1;
            if pr == self.rows {
                break;
            }
        }
        self.data.truncate(pr * self.cols);
        self.rows = pr;
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self, t: &FieldTower) -> usize {
        let mut m = self.clone();
        m.rref(t);
        m.rows
    }

    /// Canonical basis (RREF rows) of the right kernel {x : M·x = 0}.
    pub fn nullspace(&self, t: &FieldTower) -> Mat {
        let mut m = self.clone();
        let pivots = m.rref(t);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut rows = Vec::new();
        for &fc in &free {
            let mut v = vec![t.zero(self.level); self.cols];
            v[fc] = t.one(self.level);
            for (pr, &pc) in pivots.iter().enumerate() {
                v[pc] = t.neg(m.at(pr, fc));
            }
            rows.push(v);
        }
        let mut out = Mat::from_rows(self.level, self.cols, rows);
        out.rref(t);
        out
    }

    /// One solution of M·x = rhs, if consistent.
    pub fn solve(&self, t: &FieldTower, rhs: &[Fel]) -> Option<Vec<Fel>> {
        assert_eq!(rhs.len(), self.rows);
        let level = self.level.max(rhs.first().map(|f| f.level).unwrap_or(self.level));
        let mut aug = Mat::zeros(t, level, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, t.embed(self.at(r, c), level));
            }
            aug.set(r, self.cols, t.embed(rhs[r], level));
        }
        let pivots = aug.rref(t);
        if pivots.contains(&self.cols) {
            return None; // inconsistent
        }
        let mut x = vec![t.zero(level); self.cols];
        for (pr, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.at(pr, self.cols);
        }
        Some(x)
    }

    pub fn inverse(&self, t: &FieldTower) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zeros(t, self.level, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.at(r, c));
            }
            aug.set(r, n + r, t.one(self.level));
        }
        let pivots = aug.rref(t);
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        let mut out = Mat::zeros(t, self.level, n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, aug.at(r, n + c));
            }
        }
        Some(out)
    }

    pub fn det(&self, t: &FieldTower) -> Fel {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = t.one(self.level);
        for pc in 0..n {
            let Some(row) = (pc..n).find(|&r| !m.at(r, pc).is_zero()) else {
                return t.zero(self.level);
            };
            if row != pc {
                m.swap_rows(pc, row);
                det = t.neg(det);
            }
            let piv = m.at(pc, pc);
            det = t.mul(det, piv);
            let inv = t.inv(piv).unwrap();
            for r in pc + 1..n {
                if m.at(r, pc).is_zero() {
                    continue;
                }
                let f = t.mul(m.at(r, pc), inv);
                for c in pc..n {
                    let v = t.sub(m.at(r, c), t.mul(f, m.at(pc, c)));
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    /// Retags every entry at a higher level.
    pub fn extend(&self, t: &FieldTower, level: Level) -> Mat {
        Mat {
            level,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| t.embed(v, level)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_is_canonical_and_solve_works() {
        let t = FieldTower::default_for_q(3).unwrap();
        let lv = Level::Base;
        let f = |n: i64| t.from_int(n, lv);
        let mut m = Mat::from_rows(
            lv,
            3,
            vec![vec![f(1), f(0), f(1)], vec![f(1), f(1), f(0)], vec![f(0), f(1), f(1)]],
        );
        let m2 = m.clone();
        let pivots = m.rref(&t);
        assert_eq!(pivots, vec![0, 1, 2]);
        assert_eq!(m, Mat::identity(&t, lv, 3));

        let x = m2.solve(&t, &[f(1), f(1), f(2)]).unwrap();
        let back = m2.mul_vec(&t, &x);
        assert_eq!(back, vec![f(1), f(1), f(2)]);

        let inv = m2.inverse(&t).unwrap();
        assert_eq!(m2.mul(&t, &inv), Mat::identity(&t, lv, 3));
        assert!(!m2.det(&t).is_zero());
    }

    #[test]
    fn nullspace_annihilates() {
        let t = FieldTower::default_for_q(3).unwrap();
        let lv = Level::Quad;
        let f = |n: i64| t.from_int(n, lv);
        let m = Mat::from_rows(lv, 4, vec![vec![f(1), f(2), f(1), f(0)], vec![f(0), f(1), f(1), f(1)]]);
        let ker = m.nullspace(&t);
        assert_eq!(ker.rows, 2);
        for r in 0..ker.rows {
            let v = m.mul_vec(&t, ker.row(r));
            assert!(v.iter().all(|x| x.is_zero()));
        }
    }
}
