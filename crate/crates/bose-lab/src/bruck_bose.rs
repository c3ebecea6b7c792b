//! The Bruck-Bose representation of PG(2,q²) in PG(4,q), realized exactly as
//! the slice of the Bose structure by a 4-space Π_g: points and lines at
//! infinity are kept, so sliced varieties stay exact-at-infinity.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bose::{gamma_name, Bose};
use crate::field::{Fel, FieldTower, Level};
use crate::linalg::Mat;
use crate::projective::{ProjPoint, Subspace};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("functional must be a nonzero vector of 6 base-field entries")]
    BadFunctional,
    #[error("the extension of the 4-space meets Γ in dimension {0}, need a line")]
    NotTransversalToGamma(i64),
}

/// A choice of Π_g and everything it induces: the 3-space at infinity
/// Σ∞ = ⟨g,g^q⟩ ∩ PG(5,q), the transversal lines g, g^q, the sliced regular
/// spread S, and the PG(2,q²)-line ℓ∞ the slice treats as infinity.
#[derive(Clone, Debug)]
pub struct InfinityFrame {
    pub functional: Vec<Fel>,
    pub pi_g: Subspace,
    pub sigma_inf: Subspace,
    pub g: Subspace,
    pub g_q: Subspace,
    /// ℓ∞ as a line of PG(2,q²): the names of g's points.
    pub ell_inf: Subspace,
    /// Indices into the Bose spread of the q²+1 lines of S = 𝕊 ∩ Σ∞.
    pub spread_at_inf: Vec<usize>,
}

impl InfinityFrame {
    /// Builds the frame for the hyperplane `functional·x = 0`; `None` gives
    /// the default Π_g: x₅ = 0. Any 4-space whose extension meets Γ in a
    /// line is accepted.
    pub fn new(bose: &Bose, functional: Option<Vec<Fel>>) -> Result<InfinityFrame, FrameError> {
        let t = bose.t();
        let functional = match functional {
            Some(f) => f,
            None => {
                let mut f = vec![t.zero(Level::Base); 6];
                f[5] = t.one(Level::Base);
                f
            }
        };
        if functional.len() != 6
            || functional.iter().all(|c| c.is_zero())
            || functional.iter().any(|c| c.level != Level::Base)
        {
            return Err(FrameError::BadFunctional);
        }
        let dual = Mat::from_rows(Level::Base, 6, vec![functional.clone()]);
        let ns = dual.nullspace(t);
        let pi_g = Subspace::from_rows(
            t,
            Level::Base,
            6,
            (0..ns.rows).map(|r| ns.row_vec(r)).collect(),
        );
        let g = pi_g.extend(t, Level::Quad).meet(t, bose.gamma());
        if g.dim() != 1 {
            return Err(FrameError::NotTransversalToGamma(g.dim()));
        }
        let g_pts = g.basis_points();
        let g_q = Subspace::span(t, &[g_pts[0].frob_q(t), g_pts[1].frob_q(t)]);
        let sigma_inf = g.join(t, &g_q).rational_part(t, Level::Base);
        debug_assert_eq!(sigma_inf.dim(), 3);
        let names: Vec<ProjPoint> = g_pts
            .iter()
            .map(|p| gamma_name(t, p).expect("g lies in Γ"))
            .collect();
        let ell_inf = Subspace::span(t, &names);
        debug_assert_eq!(ell_inf.dim(), 1);
        let mut spread_at_inf = Vec::new();
        for x in g.points(t) {
            let name = gamma_name(t, &x).expect("g lies in Γ");
            spread_at_inf.push(bose.line_by_name(&name));
        }
        spread_at_inf.sort_unstable();
        Ok(InfinityFrame { functional, pi_g, sigma_inf, g, g_q, ell_inf, spread_at_inf })
    }

    pub fn eval_functional(&self, t: &FieldTower, coords: &[Fel]) -> Fel {
        let level = coords.iter().map(|c| c.level).max().unwrap();
        let mut acc = t.zero(level);
        for (f, c) in self.functional.iter().zip(coords) {
            acc = t.add(acc, t.mul(*f, *c));
        }
        acc
    }

    pub fn in_pi_g(&self, t: &FieldTower, p: &ProjPoint) -> bool {
        self.eval_functional(t, p.coords()).is_zero()
    }

    /// Is the point at infinity (in Σ∞ or its extensions)?
    pub fn at_infinity(&self, t: &FieldTower, p: &ProjPoint) -> bool {
        match p.level() {
            Level::Base => self.sigma_inf.contains_point(t, p),
            lv => self.sigma_inf.extend(t, lv).contains_point(t, p),
        }
    }
}

/// A sliced point set, exact-at-infinity: affine points of Π_g \ Σ∞,
/// infinity points not on a fully contained spread line, and the spread
/// lines of S that lie entirely inside the set.
#[derive(Clone, Debug, Default)]
pub struct Slice {
    pub affine: Vec<ProjPoint>,
    pub at_infinity: Vec<ProjPoint>,
    pub full_lines: Vec<usize>,
}

impl Slice {
    /// Every point of the slice, lines at infinity included.
    pub fn all_points(&self, bose: &Bose) -> Vec<ProjPoint> {
        let t = bose.t();
        let mut out = self.affine.clone();
        out.extend(self.at_infinity.iter().cloned());
        for &li in &self.full_lines {
            out.extend(bose.lines[li].line.points(t));
        }
        out
    }

    pub fn len(&self, q: u64) -> usize {
        self.affine.len() + self.at_infinity.len() + self.full_lines.len() * (q as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.affine.is_empty() && self.at_infinity.is_empty() && self.full_lines.is_empty()
    }
}

/// Exact intersection of a PG(5,q) point set with Π_g.
pub fn slice(bose: &Bose, frame: &InfinityFrame, points: &[ProjPoint]) -> Slice {
    let t = bose.t();
    let mut affine = Vec::new();
    let mut inf = Vec::new();
    for p in points {
        if !frame.in_pi_g(t, p) {
            continue;
        }
        if frame.sigma_inf.contains_point(t, p) {
            inf.push(p.clone());
        } else {
            affine.push(p.clone());
        }
    }
    let inf_set: std::collections::HashSet<&ProjPoint> = inf.iter().collect();
    let mut full_lines = Vec::new();
    for &li in &frame.spread_at_inf {
        let line = &bose.lines[li].line;
        if line.points(t).all(|p| inf_set.contains(&p)) {
            full_lines.push(li);
        }
    }
    let covered: std::collections::HashSet<ProjPoint> = full_lines
        .iter()
        .flat_map(|&li| bose.lines[li].line.points(t))
        .collect();
    let at_infinity = inf.into_iter().filter(|p| !covered.contains(p)).collect();
    Slice { affine, at_infinity, full_lines }
}

/// One point of the sliced incidence structure: an affine PG(4,q) point or a
/// line of S.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum BbPoint {
    Affine(ProjPoint),
    Inf(usize),
}

#[derive(Clone, Debug)]
pub struct BbIncidenceReport {
    pub points: usize,
    pub lines: usize,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

/// Checks the incidence axioms of the sliced structure at desk scale:
/// point/line counts are q⁴+q²+1, and two distinct points lie on exactly one
/// line. Exhaustive when the pair count is small, seeded sampling otherwise.
pub fn bb_incidence_check(bose: &Bose, frame: &InfinityFrame, seed: u64, max_pairs: usize)
    -> BbIncidenceReport
{
    let t = bose.t();
    let q = bose.q();
    let mut failures = Vec::new();

    let mut points: Vec<BbPoint> = Vec::new();
    for p in frame.pi_g.points(t) {
        if !frame.sigma_inf.contains_point(t, &p) {
            points.push(BbPoint::Affine(p));
        }
    }
    let affine_count = points.len();
    points.extend(frame.spread_at_inf.iter().map(|&li| BbPoint::Inf(li)));
    let expect = (q * q * q * q + q * q + 1) as usize;
    if points.len() != expect {
        failures.push(format!("point count {} != {expect}", points.len()));
    }
    if affine_count as u64 != q * q * q * q {
        failures.push(format!("affine count {} != q^4", affine_count));
    }

    // lines: planes spanned by a spread line of S and an affine point
    let mut planes: Vec<(usize, Subspace)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for &li in &frame.spread_at_inf {
        for p in points.iter().take(affine_count) {
            let BbPoint::Affine(p) = p else { unreachable!() };
            let plane = bose.lines[li].line.join(t, &Subspace::span(t, &[p.clone()]));
            if seen.insert(plane.clone()) {
                planes.push((li, plane));
            }
        }
    }
    // +1 for ℓ∞ itself
    if planes.len() + 1 != expect {
        failures.push(format!("line count {} != {expect}", planes.len() + 1));
    }

    let on_line = |pt: &BbPoint, (li, plane): &(usize, Subspace)| -> bool {
        match pt {
            BbPoint::Affine(p) => plane.contains_point(t, p),
            BbPoint::Inf(l) => l == li,
        }
    };
    let joins = |a: &BbPoint, b: &BbPoint| -> usize {
        let mut n = planes.iter().filter(|pl| on_line(a, pl) && on_line(b, pl)).count();
        // ℓ∞ joins the infinity points
        if matches!(a, BbPoint::Inf(_)) && matches!(b, BbPoint::Inf(_)) {
            n += 1;
        }
        n
    };

    let total_pairs = points.len() * (points.len() - 1) / 2;
    let mut pairs_checked = 0;
    if total_pairs <= max_pairs {
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let n = joins(&points[i], &points[j]);
                if n != 1 {
                    failures.push(format!("pair ({i},{j}) joined by {n} lines"));
                }
                pairs_checked += 1;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..max_pairs {
            let i = rng.gen_range(0..points.len());
            let j = rng.gen_range(0..points.len());
            if i == j {
                continue;
            }
            let n = joins(&points[i], &points[j]);
            if n != 1 {
                failures.push(format!("pair ({i},{j}) joined by {n} lines"));
            }
            pairs_checked += 1;
        }
    }
    BbIncidenceReport { points: points.len(), lines: planes.len() + 1, pairs_checked, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bose::bose_line;
    use std::sync::Arc;

    fn setup(q: u64) -> Bose {
        Bose::build(Arc::new(FieldTower::default_for_q(q).unwrap()))
    }

    #[test]
    fn default_frame_q3() {
        let bose = setup(3);
        let t = bose.t();
        let frame = InfinityFrame::new(&bose, None).unwrap();
        assert_eq!(frame.pi_g.dim(), 4);
        assert_eq!(frame.g.dim(), 1);
        assert_eq!(frame.sigma_inf.dim(), 3);
        // |S| = q²+1 lines partitioning the (q²+1)(q+1) points of Σ∞
        assert_eq!(frame.spread_at_inf.len(), 10);
        let mut seen = std::collections::HashSet::new();
        for &li in &frame.spread_at_inf {
            for p in bose.lines[li].line.points(t) {
                assert!(frame.sigma_inf.contains_point(t, &p));
                assert!(seen.insert(p));
            }
        }
        assert_eq!(seen.len(), 40);
        // S = 𝕊 ∩ Σ∞ set-wise
        let contained: Vec<usize> = (0..bose.lines.len())
            .filter(|&li| frame.sigma_inf.contains(t, &bose.lines[li].line))
            .collect();
        assert_eq!(contained, frame.spread_at_inf);
        // ℓ∞ is z = 0 for the default frame
        let z0 = Subspace::span(
            t,
            &[
                ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0]),
                ProjPoint::from_ints(t, Level::Quad, &[0, 1, 0]),
            ],
        );
        assert_eq!(frame.ell_inf, z0);
        // g and g^q are disjoint from PG(5,q) and conjugate
        for p in frame.g.points(t) {
            assert!(p.try_section(t, Level::Base).is_none());
            assert!(frame.g_q.contains_point(t, &p.frob_q(t)));
        }
    }

    #[test]
    fn g_points_biject_with_s_lines() {
        let bose = setup(3);
        let t = bose.t();
        let frame = InfinityFrame::new(&bose, None).unwrap();
        let mut hit = std::collections::HashSet::new();
        for x in frame.g.points(t) {
            // X X^q ∩ Π_g is the spread line of X's name, inside Σ∞
            let xq = x.frob_q(t);
            let ext_line = Subspace::span(t, &[x.clone(), xq]);
            let real = ext_line.rational_part(t, Level::Base);
            assert_eq!(real.dim(), 1);
            let li = bose.line_covering(&real.basis_points()[0]);
            assert_eq!(bose.lines[li].line, real);
            assert!(frame.spread_at_inf.contains(&li));
            hit.insert(li);
        }
        assert_eq!(hit.len(), frame.spread_at_inf.len());
    }

    #[test]
    fn nonstandard_frame_accepted() {
        let bose = setup(3);
        let t = bose.t();
        // x₀ + x₄ = 0 also meets Γ in a line
        let mut f = vec![t.zero(Level::Base); 6];
        f[0] = t.one(Level::Base);
        f[4] = t.one(Level::Base);
        let frame = InfinityFrame::new(&bose, Some(f)).unwrap();
        assert_eq!(frame.sigma_inf.dim(), 3);
        assert_eq!(frame.spread_at_inf.len(), 10);
    }

    #[test]
    fn slice_of_single_lines() {
        let bose = setup(3);
        let t = bose.t();
        let frame = InfinityFrame::new(&bose, None).unwrap();
        // affine name: one point
        let p_bar = ProjPoint::from_ints(t, Level::Quad, &[1, 1, 1]);
        let sl = bose_line(t, &p_bar);
        let pts: Vec<ProjPoint> = sl.line.points(t).collect();
        let s = slice(&bose, &frame, &pts);
        assert_eq!(s.affine.len(), 1);
        assert!(s.at_infinity.is_empty() && s.full_lines.is_empty());
        // infinity name: the whole spread line
        let inf_bar = ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0]);
        let sl = bose_line(t, &inf_bar);
        let pts: Vec<ProjPoint> = sl.line.points(t).collect();
        let s = slice(&bose, &frame, &pts);
        assert!(s.affine.is_empty() && s.at_infinity.is_empty());
        assert_eq!(s.full_lines, vec![bose.line_by_name(&inf_bar)]);
    }

    #[test]
    fn incidence_axioms_q2_exhaustive() {
        let bose = setup(2);
        let frame = InfinityFrame::new(&bose, None).unwrap();
        let report = bb_incidence_check(&bose, &frame, 7, usize::MAX);
        assert_eq!(report.points, 21);
        assert_eq!(report.lines, 21);
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        assert_eq!(report.pairs_checked, 21 * 20 / 2);
    }

    #[test]
    fn incidence_axioms_q3_sampled() {
        let bose = setup(3);
        let frame = InfinityFrame::new(&bose, None).unwrap();
        let report = bb_incidence_check(&bose, &frame, 7, 500);
        assert_eq!(report.points, 91);
        assert_eq!(report.lines, 91);
        assert!(report.failures.is_empty(), "{:?}", report.failures);
    }
}
