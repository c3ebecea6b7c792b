//! Points, subspaces and incidence in PG(n, F) for any tower level.
//!
//! Points are homogeneous coordinate vectors normalized so the first nonzero
//! coordinate is 1; subspaces are canonical RREF bases, so both have a
//! hashable identity that set-based oracles can rely on.

use crate::field::{Fel, FieldTower, Level};
use crate::linalg::Mat;

/// Number of points of PG(d, F) with |F| = s: (s^{d+1} − 1)/(s − 1).
pub fn point_count(s: u64, d: i64) -> u64 {
    if d < 0 {
        return 0;
    }
    (s.pow(d as u32 + 1) - 1) / (s - 1)
}

/// A point of PG(n, F), normalized.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ProjPoint {
    coords: Vec<Fel>,
}

impl ProjPoint {
    /// Normalizes a nonzero coordinate vector. Returns None on the zero
    /// vector.
    pub fn new(t: &FieldTower, coords: Vec<Fel>) -> Option<ProjPoint> {
        let lead = coords.iter().position(|c| !c.is_zero())?;
        let inv = t.inv(coords[lead]).unwrap();
        let level = coords.iter().map(|c| c.level).max().unwrap();
        let coords = coords.iter().map(|&c| t.mul(t.embed(c, level), inv)).collect();
        Some(ProjPoint { coords })
    }

    pub fn from_ints(t: &FieldTower, level: Level, ints: &[i64]) -> ProjPoint {
        ProjPoint::new(t, ints.iter().map(|&n| t.from_int(n, level)).collect())
            .expect("nonzero coordinates")
    }

    pub fn coords(&self) -> &[Fel] {
        &self.coords
    }

    pub fn level(&self) -> Level {
        self.coords[0].level
    }

    /// Ambient coordinate count, n + 1.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn embed(&self, t: &FieldTower, level: Level) -> ProjPoint {
        ProjPoint { coords: self.coords.iter().map(|&c| t.embed(c, level)).collect() }
    }

    /// Sections every coordinate down, if all of them lie in the subfield.
    /// Normalized coordinates make this exactly rationality over `level`.
    pub fn try_section(&self, t: &FieldTower, level: Level) -> Option<ProjPoint> {
        let coords: Option<Vec<Fel>> =
            self.coords.iter().map(|&c| t.try_section(c, level)).collect();
        Some(ProjPoint { coords: coords? })
    }

    /// Coordinate-wise x ↦ x^q, the conjugate point.
    pub fn frob_q(&self, t: &FieldTower) -> ProjPoint {
        ProjPoint::new(t, self.coords.iter().map(|&c| t.frob_q(c)).collect()).unwrap()
    }

    pub fn render(&self, t: &FieldTower) -> String {
        let inner: Vec<String> = self.coords.iter().map(|&c| t.render(c)).collect();
        format!("({})", inner.join(", "))
    }
}

/// Streams the canonical representatives of PG(n, level): for each leading
/// position, the leading coordinate is 1 and the tail runs over all field
/// values in code order. Restartable and shardable by construction.
pub fn proj_points<'a>(
    t: &'a FieldTower,
    level: Level,
    ambient: usize,
) -> impl Iterator<Item = ProjPoint> + 'a {
    let size = t.size(level);
    (0..ambient).flat_map(move |lead| {
        let tail = ambient - lead - 1;
        let total = size.pow(tail as u32);
        (0..total).map(move |mut counter| {
            let mut coords = vec![t.zero(level); ambient];
            coords[lead] = t.one(level);
            for c in coords.iter_mut().skip(lead + 1) {
                *c = t.el(level, (counter % size) as u32);
                counter /= size;
            }
            ProjPoint { coords }
        })
    })
}

/// A projective subspace of PG(n, F) held as a canonical (RREF) basis.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    level: Level,
    ambient: usize,
    basis: Mat,
}

impl Subspace {
    pub fn empty(t: &FieldTower, level: Level, ambient: usize) -> Subspace {
        Subspace { level, ambient, basis: Mat::zeros(t, level, 0, ambient) }
    }

    pub fn from_rows(t: &FieldTower, level: Level, ambient: usize, rows: Vec<Vec<Fel>>) -> Subspace {
        let mut basis = Mat::from_rows(level, ambient, rows);
        basis.rref(t);
        Subspace { level, ambient, basis }
    }

    /// Smallest subspace containing all the given points.
    ///
    /// Panics if the points disagree on ambient dimension.
    pub fn span(t: &FieldTower, points: &[ProjPoint]) -> Subspace {
        assert!(!points.is_empty(), "span of nothing is ambiguous; use empty()");
        let ambient = points[0].len();
        let level = points.iter().map(|p| p.level()).max().unwrap();
        for p in points {
            assert_eq!(p.len(), ambient, "mixed ambient dimensions");
        }
        let rows = points
            .iter()
            .map(|p| p.coords().iter().map(|&c| t.embed(c, level)).collect())
            .collect();
        Subspace::from_rows(t, level, ambient, rows)
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Projective dimension: rank − 1, so −1 for the empty subspace.
    pub fn dim(&self) -> i64 {
        self.basis.rows as i64 - 1
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn basis_points(&self) -> Vec<ProjPoint> {
        (0..self.basis.rows).map(|r| ProjPoint { coords: self.basis.row_vec(r) }).collect()
    }

    pub fn contains_point(&self, t: &FieldTower, p: &ProjPoint) -> bool {
        assert_eq!(p.len(), self.ambient);
        // reduce p against the RREF basis
        let level = self.level.max(p.level());
        let mut v: Vec<Fel> = p.coords().iter().map(|&c| t.embed(c, level)).collect();
        for r in 0..self.basis.rows {
            let pivot = self.basis.row(r).iter().position(|c| !c.is_zero()).unwrap();
            if v[pivot].is_zero() {
                continue;
            }
            let f = v[pivot];
            for c in 0..self.ambient {
                v[c] = t.sub(v[c], t.mul(f, t.embed(self.basis.at(r, c), level)));
            }
        }
        v.iter().all(|c| c.is_zero())
    }

    pub fn contains(&self, t: &FieldTower, other: &Subspace) -> bool {
        other.basis_points().iter().all(|p| self.contains_point(t, p))
    }

    pub fn join(&self, t: &FieldTower, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "mixed ambient dimensions");
        let level = self.level.max(other.level);
        let mut rows: Vec<Vec<Fel>> = Vec::new();
        for r in 0..self.basis.rows {
            rows.push(self.basis.row(r).iter().map(|&c| t.embed(c, level)).collect());
        }
        for r in 0..other.basis.rows {
            rows.push(other.basis.row(r).iter().map(|&c| t.embed(c, level)).collect());
        }
        if rows.is_empty() {
            return Subspace::empty(t, level, self.ambient);
        }
        Subspace::from_rows(t, level, self.ambient, rows)
    }

    /// Functionals vanishing on the subspace (a dual basis), canonical.
    pub fn dual(&self, t: &FieldTower) -> Mat {
        if self.basis.rows == 0 {
            return Mat::identity(t, self.level, self.ambient);
        }
        self.basis.nullspace(t)
    }

    /// Exact intersection.
    pub fn meet(&self, t: &FieldTower, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "mixed ambient dimensions");
        let level = self.level.max(other.level);
        let d1 = self.dual(t);
        let d2 = other.dual(t);
        let mut stacked = Mat::zeros(t, level, d1.rows + d2.rows, self.ambient);
        for r in 0..d1.rows {
            for c in 0..self.ambient {
                stacked.set(r, c, t.embed(d1.at(r, c), level));
            }
        }
        for r in 0..d2.rows {
            for c in 0..self.ambient {
                stacked.set(d1.rows + r, c, t.embed(d2.at(r, c), level));
            }
        }
        let basis = stacked.nullspace(t);
        Subspace { level, ambient: self.ambient, basis }
    }

    /// Retags the subspace over a higher level: the variety-extension of a
    /// linear space.
    pub fn extend(&self, t: &FieldTower, level: Level) -> Subspace {
        Subspace { level, ambient: self.ambient, basis: self.basis.extend(t, level) }
    }

    /// The set of `level`-rational points of the subspace, as a subspace over
    /// `level` (possibly empty). Each dual functional over the big field
    /// splits into component functionals over the small one.
    pub fn rational_part(&self, t: &FieldTower, level: Level) -> Subspace {
        assert!(level < self.level);
        let duals = self.dual(t);
        let mut rows: Vec<Vec<Fel>> = Vec::new();
        for r in 0..duals.rows {
            let mut comps: Vec<Vec<Fel>> = vec![duals.row_vec(r)];
            // split down one level at a time
            let mut at = self.level;
            while at > level {
                let mut next: Vec<Vec<Fel>> = Vec::new();
                for row in comps {
                    let mut lo = Vec::with_capacity(self.ambient);
                    let mut hi = Vec::with_capacity(self.ambient);
                    for v in row {
                        let (a, b) = t.split(v);
                        lo.push(a);
                        hi.push(b);
                    }
                    next.push(lo);
                    next.push(hi);
                }
                comps = next;
                at = match at {
                    Level::Quartic => Level::Quad,
                    Level::Quad => Level::Base,
                    Level::Base => unreachable!(),
                };
            }
            rows.extend(comps);
        }
        // embed the split functionals at the target level and take the kernel
        let rows: Vec<Vec<Fel>> = rows
            .into_iter()
            .map(|row| row.into_iter().map(|v| t.embed(v, level)).collect())
            .collect();
        let stacked = Mat::from_rows(level, self.ambient, rows);
        Subspace { level, ambient: self.ambient, basis: stacked.nullspace(t) }
    }

    /// Streams the subspace's points: internal PG(dim) representatives mapped
    /// through the basis.
    pub fn points<'a>(&'a self, t: &'a FieldTower) -> Box<dyn Iterator<Item = ProjPoint> + 'a> {
        if self.basis.rows == 0 {
            return Box::new(std::iter::empty());
        }
        let basis_t = self.basis.transpose(t);
        let iter = proj_points(t, self.level, self.basis.rows).map(move |inner| {
            let coords = basis_t.mul_vec(t, inner.coords());
            ProjPoint::new(t, coords).expect("independent basis rows")
        });
        Box::new(iter)
    }

    pub fn point_count(&self, t: &FieldTower) -> u64 {
        point_count(t.size(self.level), self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> FieldTower {
        FieldTower::default_for_q(3).unwrap()
    }

    fn pt(t: &FieldTower, lv: Level, ints: &[i64]) -> ProjPoint {
        ProjPoint::from_ints(t, lv, ints)
    }

    #[test]
    fn span_dimensions() {
        let t = q3();
        let lv = Level::Base;
        let a = pt(&t, lv, &[1, 0, 0, 0, 0, 0]);
        let b = pt(&t, lv, &[0, 1, 0, 0, 0, 0]);
        assert_eq!(Subspace::span(&t, &[a.clone(), b.clone()]).dim(), 1);
        assert_eq!(Subspace::span(&t, &[a.clone(), a.clone(), a.clone()]).dim(), 0);
        let c = pt(&t, lv, &[0, 0, 1, 0, 0, 0]);
        let d = pt(&t, lv, &[1, 1, 1, 0, 0, 0]);
        assert_eq!(Subspace::span(&t, &[a, b, c, d]).dim(), 2);
    }

    #[test]
    fn meet_cases() {
        let t = q3();
        let lv = Level::Base;
        // two disjoint planes of PG(5,q)
        let p1 = Subspace::span(
            &t,
            &[pt(&t, lv, &[1, 0, 0, 0, 0, 0]), pt(&t, lv, &[0, 1, 0, 0, 0, 0]), pt(&t, lv, &[0, 0, 1, 0, 0, 0])],
        );
        let p2 = Subspace::span(
            &t,
            &[pt(&t, lv, &[0, 0, 0, 1, 0, 0]), pt(&t, lv, &[0, 0, 0, 0, 1, 0]), pt(&t, lv, &[0, 0, 0, 0, 0, 1])],
        );
        assert_eq!(p1.meet(&t, &p2).dim(), -1);
        // a 3-space inside a 4-space meets it in itself
        let four = Subspace::span(
            &t,
            &[
                pt(&t, lv, &[1, 0, 0, 0, 0, 0]),
                pt(&t, lv, &[0, 1, 0, 0, 0, 0]),
                pt(&t, lv, &[0, 0, 1, 0, 0, 0]),
                pt(&t, lv, &[0, 0, 0, 1, 0, 0]),
                pt(&t, lv, &[0, 0, 0, 0, 1, 0]),
            ],
        );
        let three = Subspace::span(
            &t,
            &[
                pt(&t, lv, &[1, 0, 0, 0, 0, 0]),
                pt(&t, lv, &[0, 1, 0, 0, 0, 0]),
                pt(&t, lv, &[0, 0, 1, 0, 0, 0]),
                pt(&t, lv, &[0, 0, 0, 1, 0, 0]),
            ],
        );
        assert_eq!(four.meet(&t, &three), three);
        // dim formula in generic position: join ∨ + meet ∧
        let j = p1.join(&t, &p2);
        assert_eq!(j.dim() + p1.meet(&t, &p2).dim(), p1.dim() + p2.dim());
    }

    #[test]
    fn point_counts() {
        let t = q3();
        let line = Subspace::span(
            &t,
            &[pt(&t, Level::Base, &[1, 0, 0, 0, 0, 0]), pt(&t, Level::Base, &[0, 1, 0, 0, 0, 0])],
        );
        assert_eq!(line.points(&t).count(), 4);
        assert_eq!(proj_points(&t, Level::Base, 6).count(), 364);
        let plane_q2 = Subspace::span(
            &t,
            &[
                pt(&t, Level::Quad, &[1, 0, 0]),
                pt(&t, Level::Quad, &[0, 1, 0]),
                pt(&t, Level::Quad, &[0, 0, 1]),
            ],
        );
        assert_eq!(plane_q2.points(&t).count(), 91);
        // no duplicates
        let mut seen = std::collections::HashSet::new();
        for p in proj_points(&t, Level::Base, 4) {
            assert!(seen.insert(p));
        }
        assert_eq!(seen.len() as u64, point_count(3, 3));
    }

    #[test]
    fn counts_match_formula_small() {
        for q in [2u64, 3, 4] {
            let t = FieldTower::default_for_q(q).unwrap();
            for d in 0..=5usize {
                let n = proj_points(&t, Level::Base, d + 1).count() as u64;
                assert_eq!(n, point_count(q, d as i64), "q={q} d={d}");
            }
        }
    }

    #[test]
    fn rational_part_round_trip() {
        let t = q3();
        // a GF(q)-defined plane, extended then restricted, is itself
        let plane = Subspace::span(
            &t,
            &[
                pt(&t, Level::Base, &[1, 0, 2, 0, 1, 0]),
                pt(&t, Level::Base, &[0, 1, 0, 0, 2, 1]),
                pt(&t, Level::Base, &[0, 0, 1, 1, 0, 1]),
            ],
        );
        let ext = plane.extend(&t, Level::Quad);
        assert_eq!(ext.rational_part(&t, Level::Base), plane);
    }

    #[test]
    fn lattice_absorption() {
        let t = q3();
        let lv = Level::Base;
        let a = Subspace::span(&t, &[pt(&t, lv, &[1, 0, 0, 0, 0, 0]), pt(&t, lv, &[0, 1, 1, 0, 0, 0])]);
        let b = Subspace::span(&t, &[pt(&t, lv, &[0, 0, 0, 1, 2, 0])]);
        let join = a.join(&t, &b);
        assert_eq!(join.meet(&t, &a), a);
    }
}
