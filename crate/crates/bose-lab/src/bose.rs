//! The Bose representation of PG(2,q²) in PG(5,q): the regular 1-spread 𝕊,
//! its transversal planes Γ and Γ^q in PG(5,q²), Baer sublines and subplanes
//! of Γ, and the regulus / Segre structures their spread-line families carve
//! out.
//!
//! Coordinates follow the real/complex split x = x₀ + x₁τ: a point
//! (x, y, z) of PG(2,q²) has the spread line through
//! P₀ = (x₀,x₁,y₀,y₁,z₀,z₁) and P₁ = (x₁t₀, x₀+x₁t₁, y₁t₀, y₀+y₁t₁, z₁t₀, z₀+z₁t₁),
//! and the transversal plane Γ is spanned by A₁ = (τ^q,−1,0,0,0,0),
//! A₂ = (0,0,τ^q,−1,0,0), A₃ = (0,0,0,0,τ^q,−1).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::field::{Fel, FieldTower, Level};
use crate::forms::QuadForm;
use crate::linalg::Mat;
use crate::projective::{proj_points, ProjPoint, Subspace};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("frame is degenerate: three of the four points are collinear")]
    DegenerateFrame,
    #[error("points are not distinct and collinear")]
    NotCollinear,
    #[error("point lies on a transversal plane")]
    OnTransversal,
    #[error("point does not lie in the transversal plane Γ")]
    NotInGamma,
    #[error("point is not covered by the structure: {0}")]
    NotCovered(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

/// The two transversal planes of the spread in PG(5,q²).
#[derive(Clone, Debug)]
pub struct TransversalData {
    pub gamma: Subspace,
    pub gamma_q: Subspace,
    pub a_points: [ProjPoint; 3],
}

/// One line of the Bose spread: the PG(2,q²) point it represents (`name`),
/// the two anchor points of the coordinate construction, and the point where
/// the line's extension meets Γ.
#[derive(Clone, Debug)]
pub struct SpreadLine {
    pub line: Subspace,
    pub p0: ProjPoint,
    pub p1: ProjPoint,
    pub name: ProjPoint,
    pub gamma_point: ProjPoint,
}

/// The full Bose structure for one tower: all q⁴+q²+1 spread lines with
/// name- and cover-indexes, plus the transversal planes.
///
/// Immutable after `build`; share via `Arc` for concurrent suites.
pub struct Bose {
    pub tower: Arc<FieldTower>,
    pub lines: Vec<SpreadLine>,
    pub transversals: TransversalData,
    by_name: HashMap<ProjPoint, usize>,
    by_cover: HashMap<ProjPoint, usize>,
}

/// Splits a quad coordinate vector into the interleaved real 6-vector.
fn realify(t: &FieldTower, coords: &[Fel]) -> Vec<Fel> {
    let mut out = Vec::with_capacity(coords.len() * 2);
    for &c in coords {
        let (lo, hi) = t.split(t.embed(c, Level::Quad));
        out.push(lo);
        out.push(hi);
    }
    out
}

/// The Bose spread line of a PG(2,q²) point.
pub fn bose_line(t: &FieldTower, p_bar: &ProjPoint) -> SpreadLine {
    assert_eq!(p_bar.len(), 3);
    let p_bar = p_bar.embed(t, Level::Quad);
    let real = realify(t, p_bar.coords());
    let p0 = ProjPoint::new(t, real.clone()).expect("nonzero point");
    // P₁ comes from the representative τ·(x,y,z)
    let tau_rep: Vec<Fel> =
        p_bar.coords().iter().map(|&c| t.mul(t.tau(), c)).collect();
    let p1 = ProjPoint::new(t, realify(t, &tau_rep)).expect("nonzero point");
    let line = Subspace::span(t, &[p0.clone(), p1.clone()]);
    debug_assert_eq!(line.dim(), 1);
    let gamma_point = gamma6(t, &p_bar);
    SpreadLine { line, p0, p1, name: p_bar, gamma_point }
}

/// The point xA₁ + yA₂ + zA₃ of Γ (over the point's own level).
pub fn gamma6(t: &FieldTower, p_bar: &ProjPoint) -> ProjPoint {
    assert_eq!(p_bar.len(), 3);
    let level = p_bar.level().max(Level::Quad);
    let tq = t.embed(t.tau_conj(), level);
    let mut coords = Vec::with_capacity(6);
    for &c in p_bar.coords() {
        let c = t.embed(c, level);
        coords.push(t.mul(c, tq));
        coords.push(t.neg(c));
    }
    ProjPoint::new(t, coords).expect("nonzero point")
}

/// Reads (x, y, z) back from a point of Γ (or its extension); None when the
/// point is not on Γ.
pub fn gamma_name(t: &FieldTower, p6: &ProjPoint) -> Option<ProjPoint> {
    assert_eq!(p6.len(), 6);
    let level = p6.level().max(Level::Quad);
    let c = p6.coords();
    let name: Vec<Fel> = vec![
        t.neg(t.embed(c[1], level)),
        t.neg(t.embed(c[3], level)),
        t.neg(t.embed(c[5], level)),
    ];
    let cand = ProjPoint::new(t, name)?;
    if &gamma6(t, &cand).embed(t, level) == &p6.embed(t, level) {
        Some(cand)
    } else {
        None
    }
}

impl Bose {
    /// Builds the spread from every point of PG(2,q²), with lookup maps by
    /// name and by covered PG(5,q) point.
    pub fn build(tower: Arc<FieldTower>) -> Bose {
        let t = tower.as_ref();
        let a1 = gamma6(t, &ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0]));
        let a2 = gamma6(t, &ProjPoint::from_ints(t, Level::Quad, &[0, 1, 0]));
        let a3 = gamma6(t, &ProjPoint::from_ints(t, Level::Quad, &[0, 0, 1]));
        let gamma = Subspace::span(t, &[a1.clone(), a2.clone(), a3.clone()]);
        let gamma_q =
            Subspace::span(t, &[a1.frob_q(t), a2.frob_q(t), a3.frob_q(t)]);
        let mut lines = Vec::new();
        let mut by_name = HashMap::new();
        let mut by_cover = HashMap::new();
        for p_bar in proj_points(t, Level::Quad, 3) {
            let sl = bose_line(t, &p_bar);
            let idx = lines.len();
            by_name.insert(sl.name.clone(), idx);
            for pt in sl.line.points(t) {
                by_cover.insert(pt, idx);
            }
            lines.push(sl);
        }
        Bose {
            tower,
            lines,
            transversals: TransversalData { gamma, gamma_q, a_points: [a1, a2, a3] },
            by_name,
            by_cover,
        }
    }

    pub fn t(&self) -> &FieldTower {
        self.tower.as_ref()
    }

    pub fn q(&self) -> u64 {
        self.tower.q()
    }

    /// Index of the spread line named by a PG(2,q²) point.
    pub fn line_by_name(&self, p_bar: &ProjPoint) -> usize {
        let p = p_bar.embed(self.t(), Level::Quad);
        *self.by_name.get(&p).expect("every PG(2,q^2) point names a spread line")
    }

    /// Index of the unique spread line through a PG(5,q) point.
    pub fn line_covering(&self, p6: &ProjPoint) -> usize {
        *self.by_cover.get(p6).expect("the spread partitions PG(5,q)")
    }

    /// The PG(2,q²) point whose spread line passes through a PG(5,q) point.
    pub fn name_of_covered(&self, p6: &ProjPoint) -> &ProjPoint {
        &self.lines[self.line_covering(p6)].name
    }

    pub fn gamma(&self) -> &Subspace {
        &self.transversals.gamma
    }

    pub fn gamma_q(&self) -> &Subspace {
        &self.transversals.gamma_q
    }

    pub fn on_transversal(&self, p: &ProjPoint) -> bool {
        let t = self.t();
        self.transversals.gamma.contains_point(t, p)
            || self.transversals.gamma_q.contains_point(t, p)
    }

    /// The 3-space of PG(5,q) spanned by the spread lines of a line of
    /// PG(2,q²); the Bose image of that line.
    pub fn three_space(&self, ell_bar: &Subspace) -> Subspace {
        let t = self.t();
        assert_eq!(ell_bar.ambient(), 3);
        assert_eq!(ell_bar.dim(), 1);
        let pts = ell_bar.basis_points();
        let l0 = &self.lines[self.line_by_name(&pts[0])];
        let l1 = &self.lines[self.line_by_name(&pts[1])];
        let span = l0.line.join(t, &l1.line);
        debug_assert_eq!(span.dim(), 3);
        span
    }

    /// The unique line through P meeting both transversal planes: RS with
    /// R = ⟨P,Γ⟩ ∩ Γ^q and S = ⟨P,Γ^q⟩ ∩ Γ. Rejects T-points.
    pub fn t_line_through(&self, p: &ProjPoint) -> Result<TLine, GeomError> {
        let t = self.t();
        let p = p.embed(t, Level::Quad);
        if self.on_transversal(&p) {
            return Err(GeomError::OnTransversal);
        }
        let p_space = Subspace::span(t, &[p.clone()]);
        let with_gamma = p_space.join(t, &self.transversals.gamma);
        let with_gamma_q = p_space.join(t, &self.transversals.gamma_q);
        let r_meet = with_gamma.meet(t, &self.transversals.gamma_q);
        let s_meet = with_gamma_q.meet(t, &self.transversals.gamma);
        assert_eq!(r_meet.dim(), 0, "⟨P,Γ⟩ meets Γ^q in one point");
        assert_eq!(s_meet.dim(), 0, "⟨P,Γ^q⟩ meets Γ in one point");
        let line = with_gamma.meet(t, &with_gamma_q);
        assert_eq!(line.dim(), 1);
        debug_assert!(line.contains_point(t, &p));
        Ok(TLine {
            gamma_end: s_meet.basis_points().remove(0),
            gamma_q_end: r_meet.basis_points().remove(0),
            line,
        })
    }

    /// Σ for a line of Γ given by its PG(2,q²) trace: the rational part of
    /// ⟨ℓ, ℓ^q⟩, a 3-space of PG(5,q).
    pub fn real_span_of_gamma_line(&self, ell_bar: &Subspace) -> Subspace {
        let t = self.t();
        let pts = ell_bar.basis_points();
        let g0 = gamma6(t, &pts[0]);
        let g1 = gamma6(t, &pts[1]);
        let span = Subspace::span(t, &[g0.clone(), g1.clone(), g0.frob_q(t), g1.frob_q(t)]);
        let real = span.rational_part(t, Level::Base);
        debug_assert_eq!(real.dim(), 3);
        real
    }

    /// Text dump: a field-spec header line, then one spread line per row as
    /// the 12 base-field coordinates P₀|P₁.
    pub fn dump_spread(&self) -> String {
        let t = self.t();
        let mut out = String::new();
        writeln!(out, "{}", t.spec_string()).unwrap();
        for sl in &self.lines {
            let mut row = Vec::with_capacity(12);
            for c in sl.p0.coords().iter().chain(sl.p1.coords()) {
                row.push(t.render(*c));
            }
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }
}

/// A line of PG(5,q²) meeting both transversal planes.
#[derive(Clone, Debug)]
pub struct TLine {
    pub line: Subspace,
    pub gamma_end: ProjPoint,
    pub gamma_q_end: ProjPoint,
}

/// The regulus through three pairwise disjoint lines of a common 3-space:
/// the lines meeting every transversal of the triple. None when the input
/// is not three skew cospatial lines.
pub fn regulus_through(
    t: &FieldTower,
    l1: &Subspace,
    l2: &Subspace,
    l3: &Subspace,
) -> Option<Vec<Subspace>> {
    let space = l1.join(t, l2);
    if space.dim() != 3 || !space.contains(t, l3) {
        return None;
    }
    if l1.meet(t, l2).dim() != -1 || l1.meet(t, l3).dim() != -1 || l2.meet(t, l3).dim() != -1 {
        return None;
    }
    // transversal through P ∈ l1: the meet of the planes ⟨P,l2⟩ and ⟨P,l3⟩
    let transversal = |p: &ProjPoint, a: &Subspace, b: &Subspace| -> Subspace {
        let pspan = Subspace::span(t, &[p.clone()]);
        pspan.join(t, a).meet(t, &pspan.join(t, b))
    };
    let transversals: Vec<Subspace> =
        l1.points(t).map(|p| transversal(&p, l2, l3)).collect();
    if transversals.iter().any(|tr| tr.dim() != 1) {
        return None;
    }
    // the regulus is the set of transversals of any three of the transversals
    let regulus: Vec<Subspace> = transversals[0]
        .points(t)
        .map(|p| transversal(&p, &transversals[1], &transversals[2]))
        .collect();
    if regulus.iter().any(|r| r.dim() != 1) {
        return None;
    }
    Some(regulus)
}

/// A Baer subline of a line of PG(2,q²), held by a parametrization
/// s·U + t·V whose rational parameters (s:t) ∈ PG(1,q) sweep the subline.
#[derive(Clone, Debug)]
pub struct BaerSubline {
    pub carrier: Subspace,
    /// 3×2 matrix with columns U, V.
    param: Mat,
    pub points: Vec<ProjPoint>,
}

impl BaerSubline {
    /// The unique Baer subline through three distinct collinear points.
    pub fn through(t: &FieldTower, x1: &ProjPoint, x2: &ProjPoint, x3: &ProjPoint)
        -> Result<BaerSubline, GeomError>
    {
        let (x1, x2, x3) =
            (x1.embed(t, Level::Quad), x2.embed(t, Level::Quad), x3.embed(t, Level::Quad));
        if x1 == x2 || x1 == x3 || x2 == x3 {
            return Err(GeomError::NotCollinear);
        }
        let carrier = Subspace::span(t, &[x1.clone(), x2.clone()]);
        if carrier.dim() != 1 || !carrier.contains_point(t, &x3) {
            return Err(GeomError::NotCollinear);
        }
        // scale x1, x2 so that x1 + x2 = x3
        let mut cols = Mat::zeros(t, Level::Quad, 3, 2);
        for r in 0..3 {
            cols.set(r, 0, x1.coords()[r]);
            cols.set(r, 1, x2.coords()[r]);
        }
        let lm = cols.solve(t, x3.coords()).ok_or(GeomError::NotCollinear)?;
        if lm[0].is_zero() || lm[1].is_zero() {
            return Err(GeomError::NotCollinear);
        }
        let mut param = Mat::zeros(t, Level::Quad, 3, 2);
        for r in 0..3 {
            param.set(r, 0, t.mul(lm[0], x1.coords()[r]));
            param.set(r, 1, t.mul(lm[1], x2.coords()[r]));
        }
        let mut points = Vec::new();
        for st in proj_points(t, Level::Base, 2) {
            let s = t.embed(st.coords()[0], Level::Quad);
            let tt = t.embed(st.coords()[1], Level::Quad);
            let coords: Vec<Fel> = (0..3)
                .map(|r| t.add(t.mul(param.at(r, 0), s), t.mul(param.at(r, 1), tt)))
                .collect();
            points.push(ProjPoint::new(t, coords).unwrap());
        }
        Ok(BaerSubline { carrier, param, points })
    }

    /// Parameter (s:t) of a carrier point.
    pub fn parameter(&self, t: &FieldTower, p: &ProjPoint) -> Option<ProjPoint> {
        let p = p.embed(t, Level::Quad);
        let st = self.param.solve(t, p.coords())?;
        ProjPoint::new(t, st)
    }

    pub fn contains(&self, t: &FieldTower, p: &ProjPoint) -> bool {
        match self.parameter(t, p) {
            None => false,
            Some(st) => st.try_section(t, Level::Base).is_some(),
        }
    }

    /// The involution c_b fixing the subline pointwise: parameter-wise
    /// q-power. Only defined for carrier points.
    pub fn conj(&self, t: &FieldTower, p: &ProjPoint) -> ProjPoint {
        let st = self.parameter(t, p).expect("point must lie on the carrier");
        let s = t.frob_q(st.coords()[0]);
        let tt = t.frob_q(st.coords()[1]);
        let coords: Vec<Fel> = (0..3)
            .map(|r| t.add(t.mul(self.param.at(r, 0), s), t.mul(self.param.at(r, 1), tt)))
            .collect();
        ProjPoint::new(t, coords).unwrap()
    }

    /// Canonical identity: the sorted point set.
    pub fn key(&self) -> Vec<ProjPoint> {
        let mut k = self.points.clone();
        k.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        k
    }
}

/// A Baer subplane of PG(2,q²) held by a 4-point frame and the homography
/// carrying the standard frame to it.
#[derive(Clone, Debug)]
pub struct BaerSubplane {
    pub frame: [ProjPoint; 4],
    h: Mat,
    h_inv: Mat,
    pub points: Vec<ProjPoint>,
}

impl BaerSubplane {
    /// The subplane generated by a frame (4 points, no 3 collinear).
    pub fn from_frame(t: &FieldTower, frame: [ProjPoint; 4]) -> Result<BaerSubplane, GeomError> {
        let f: Vec<ProjPoint> = frame.iter().map(|p| p.embed(t, Level::Quad)).collect();
        let mut cols = Mat::zeros(t, Level::Quad, 3, 3);
        for r in 0..3 {
            for c in 0..3 {
                cols.set(r, c, f[c].coords()[r]);
            }
        }
        if cols.det(t).is_zero() {
            return Err(GeomError::DegenerateFrame);
        }
        let lambda = cols.solve(t, f[3].coords()).ok_or(GeomError::DegenerateFrame)?;
        if lambda.iter().any(|l| l.is_zero()) {
            return Err(GeomError::DegenerateFrame);
        }
        let mut h = Mat::zeros(t, Level::Quad, 3, 3);
        for r in 0..3 {
            for c in 0..3 {
                h.set(r, c, t.mul(lambda[c], f[c].coords()[r]));
            }
        }
        let h_inv = h.inverse(t).expect("frame matrix invertible");
        let mut points = Vec::new();
        for r in proj_points(t, Level::Base, 3) {
            let v: Vec<Fel> = r.coords().iter().map(|&c| t.embed(c, Level::Quad)).collect();
            points.push(ProjPoint::new(t, h.mul_vec(t, &v)).unwrap());
        }
        Ok(BaerSubplane {
            frame: [f[0].clone(), f[1].clone(), f[2].clone(), f[3].clone()],
            h,
            h_inv,
            points,
        })
    }

    /// The standard subplane PG(2,q) on the standard frame.
    pub fn standard(t: &FieldTower) -> BaerSubplane {
        let e = |v: &[i64]| ProjPoint::from_ints(t, Level::Quad, v);
        BaerSubplane::from_frame(
            t,
            [e(&[1, 0, 0]), e(&[0, 1, 0]), e(&[0, 0, 1]), e(&[1, 1, 1])],
        )
        .unwrap()
    }

    /// A subplane tangent to the line z = 0, for any q: the image of the
    /// standard subplane under (x,y,z) ↦ (x, y, τx + z).
    pub fn standard_tangent(t: &FieldTower) -> BaerSubplane {
        let tau = t.tau();
        let one = t.one(Level::Quad);
        let p = |coords: Vec<Fel>| ProjPoint::new(t, coords).unwrap();
        let f1 = p(vec![one, t.zero(Level::Quad), tau]);
        let f2 = ProjPoint::from_ints(t, Level::Quad, &[0, 1, 0]);
        let f3 = ProjPoint::from_ints(t, Level::Quad, &[0, 0, 1]);
        let f4 = p(vec![one, one, t.add(one, tau)]);
        BaerSubplane::from_frame(t, [f1, f2, f3, f4]).unwrap()
    }

    pub fn h(&self) -> &Mat {
        &self.h
    }

    /// Frame coordinates of a subplane point (rational 3-tuple), or None if
    /// the point is off the subplane.
    pub fn to_frame_coords(&self, t: &FieldTower, p: &ProjPoint) -> Option<ProjPoint> {
        let p = p.embed(t, Level::Quad);
        let v = self.h_inv.mul_vec(t, p.coords());
        ProjPoint::new(t, v).unwrap().try_section(t, Level::Base)
    }

    /// Image of a frame-coordinate point in the subplane's plane.
    pub fn from_frame_coords(&self, t: &FieldTower, r: &ProjPoint) -> ProjPoint {
        let v: Vec<Fel> = r.coords().iter().map(|&c| t.embed(c, Level::Quad)).collect();
        ProjPoint::new(t, self.h.mul_vec(t, &v)).unwrap()
    }

    pub fn contains(&self, t: &FieldTower, p: &ProjPoint) -> bool {
        self.to_frame_coords(t, p).is_some()
    }

    /// The involution c_π fixing the subplane pointwise: frame-coordinate-wise
    /// q-power, extended to the whole plane.
    pub fn conj(&self, t: &FieldTower, p: &ProjPoint) -> ProjPoint {
        let p = p.embed(t, Level::Quad);
        let v = self.h_inv.mul_vec(t, p.coords());
        let vq: Vec<Fel> = v.iter().map(|&c| t.frob_q(c)).collect();
        ProjPoint::new(t, self.h.mul_vec(t, &vq)).unwrap()
    }

    /// Number of subplane points on a line of PG(2,q²): q+1 (secant) or 1
    /// (tangent).
    pub fn meet_count(&self, t: &FieldTower, line: &Subspace) -> usize {
        self.points.iter().filter(|p| line.contains_point(t, p)).count()
    }

    /// Canonical identity: the sorted point set.
    pub fn key(&self) -> Vec<ProjPoint> {
        let mut k = self.points.clone();
        k.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        k
    }
}

/// The regulus structure of a Baer subline's Bose image: the q+1 spread
/// lines, the 3-space Σ_b they span, and the hyperbolic quadric through
/// their points (10 coefficients in Σ_b-internal coordinates).
#[derive(Clone, Debug)]
pub struct SublineRegulus {
    pub line_indices: Vec<usize>,
    pub sigma: Subspace,
    /// 4×6 basis of Σ_b used for internal coordinates.
    pub basis: Mat,
    pub quadric: QuadForm,
}

impl SublineRegulus {
    /// Internal coordinates of an ambient point of Σ_b (any level).
    pub fn internal(&self, t: &FieldTower, p: &ProjPoint) -> Option<Vec<Fel>> {
        let level = p.level();
        let basis_t = self.basis.extend(t, level).transpose(t);
        basis_t.solve(t, p.coords())
    }
}

/// Computes the regulus data of a Baer subline of Γ (named by its PG(2,q²)
/// trace). The q+1 spread lines lie on one regulus of a hyperbolic quadric
/// in Σ_b = ⟨ℓ_b, ℓ_b^q⟩ ∩ PG(5,q).
pub fn subline_regulus(bose: &Bose, b: &BaerSubline) -> Result<SublineRegulus, GeomError> {
    let t = bose.t();
    let line_indices: Vec<usize> = b.points.iter().map(|p| bose.line_by_name(p)).collect();
    let sigma = bose.real_span_of_gamma_line(&b.carrier);
    if sigma.dim() != 3 {
        return Err(GeomError::Degenerate("subline span is not a 3-space".into()));
    }
    let basis = sigma.basis().clone();
    let basis_t = basis.transpose(t);
    let mut rows = Vec::new();
    for &li in &line_indices {
        for pt in bose.lines[li].line.points(t) {
            let internal = basis_t
                .solve(t, pt.coords())
                .ok_or_else(|| GeomError::Degenerate("regulus point outside Σ_b".into()))?;
            let mut row = Vec::with_capacity(10);
            for i in 0..4 {
                for j in i..4 {
                    row.push(t.mul(internal[i], internal[j]));
                }
            }
            rows.push(row);
        }
    }
    let m = Mat::from_rows(Level::Base, 10, rows);
    let ker = m.nullspace(t);
    if ker.rows != 1 {
        return Err(GeomError::Degenerate(format!(
            "expected a unique quadric through the regulus, kernel has dimension {}",
            ker.rows
        )));
    }
    let quadric = QuadForm::from_coeffs(Level::Base, 4, ker.row_vec(0));
    Ok(SublineRegulus { line_indices, sigma, basis, quadric })
}

/// The scroll lines X(X^{c_b})^q over all X on the subline's carrier:
/// for X ∈ b these are extended spread lines, otherwise lines disjoint from
/// PG(5,q).
pub fn subline_scroll_lines(
    bose: &Bose,
    b: &BaerSubline,
) -> Vec<(ProjPoint, Subspace)> {
    let t = bose.t();
    let mut out = Vec::new();
    for x in b.carrier.points(t) {
        let x6 = gamma6(t, &x);
        let conj = b.conj(t, &x);
        let other = gamma6(t, &conj).frob_q(t);
        let line = Subspace::span(t, &[x6, other]);
        out.push((x, line));
    }
    out
}

/// The Segre structure of a Baer subplane's Bose image: the q²+q+1 spread
/// lines (one maximal system), the q+1 planes of the other system, the full
/// point set, and three quadrics over GF(q) cutting exactly that point set.
#[derive(Clone, Debug)]
pub struct SubplaneSegre {
    pub line_indices: Vec<usize>,
    pub planes: Vec<Subspace>,
    pub points: Vec<ProjPoint>,
    pub quadrics: [QuadForm; 3],
}

/// The 6×6 GF(q)-matrix realizing a GF(q²)-linear map of (x,y,z)-space on
/// the split coordinates.
fn realify_map(t: &FieldTower, h: &Mat) -> Mat {
    let mut out = Mat::zeros(t, Level::Base, 6, 6);
    for k in 0..6 {
        let mut v = vec![t.zero(Level::Quad); 3];
        let (slot, part) = (k / 2, k % 2);
        v[slot] = if part == 0 { t.one(Level::Quad) } else { t.tau() };
        let image = h.mul_vec(t, &v);
        let real = realify(t, &image);
        for r in 0..6 {
            out.set(r, k, real[r]);
        }
    }
    out
}

pub fn subplane_segre(bose: &Bose, b: &BaerSubplane) -> SubplaneSegre {
    let t = bose.t();
    let line_indices: Vec<usize> = b.points.iter().map(|p| bose.line_by_name(p)).collect();
    let mut points = Vec::new();
    for &li in &line_indices {
        points.extend(bose.lines[li].line.points(t));
    }

    // the three 2×2 minors of [[c0,c1],[c2,c3],[c4,c5]] cut the standard
    // Segre point set exactly; transport them along the subplane's frame map
    let h_real = realify_map(t, b.h());
    let h_real_inv = h_real.inverse(t).expect("frame map invertible");
    let minor = |r1: usize, r2: usize| {
        let mut f = QuadForm::zero(t, Level::Base, 6);
        let one = t.one(Level::Base);
        f.set_coeff(2 * r1, 2 * r2 + 1, one);
        f.set_coeff(2 * r1 + 1, 2 * r2, t.neg(one));
        f.substitute(t, &h_real_inv)
    };
    let quadrics = [minor(0, 1), minor(0, 2), minor(1, 2)];

    // plane system: for λ over GF(q²)*/GF(q)*, the span of λV_i + (λV_i)^q
    // where V_i are the raw Γ-vectors of the frame-matrix columns. The three
    // vectors must share one λ, so no per-point normalization here.
    let tq = t.tau_conj();
    let g_vecs: Vec<Vec<Fel>> = (0..3)
        .map(|c| {
            let mut v = Vec::with_capacity(6);
            for r in 0..3 {
                let x = b.h().at(r, c);
                v.push(t.mul(x, tq));
                v.push(t.neg(x));
            }
            v
        })
        .collect();
    let mut planes: Vec<Subspace> = Vec::new();
    for lam in t.elements(Level::Quad).skip(1) {
        let mut gens = Vec::with_capacity(3);
        for vi in &g_vecs {
            let real: Vec<Fel> = vi
                .iter()
                .map(|&c| {
                    let w = t.mul(lam, c);
                    let s = t.add(w, t.frob_q(w));
                    t.try_section(s, Level::Base).expect("v + v^q is rational")
                })
                .collect();
            gens.push(ProjPoint::new(t, real).expect("transversal points are never real"));
        }
        let plane = Subspace::span(t, &gens);
        debug_assert_eq!(plane.dim(), 2);
        if !planes.contains(&plane) {
            planes.push(plane);
        }
    }
    assert_eq!(planes.len() as u64, bose.q() + 1);

    SubplaneSegre { line_indices, planes, points, quadrics }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(q: u64) -> Bose {
        Bose::build(Arc::new(FieldTower::default_for_q(q).unwrap()))
    }

    #[test]
    fn bose_line_examples() {
        let t = FieldTower::default_for_q(3).unwrap();
        // (1,0,0) → line through (1,0,0,0,0,0) and (0,1,0,0,0,0)
        let sl = bose_line(&t, &ProjPoint::from_ints(&t, Level::Quad, &[1, 0, 0]));
        assert_eq!(sl.p0, ProjPoint::from_ints(&t, Level::Base, &[1, 0, 0, 0, 0, 0]));
        assert_eq!(sl.p1, ProjPoint::from_ints(&t, Level::Base, &[0, 1, 0, 0, 0, 0]));
        // (τ,1,0) with t0 = t1 = 1 → the line through (0,1,1,0,0,0) and
        // (1,1,0,1,0,0); anchors depend on the representative, the line does not
        let p = ProjPoint::new(
            &t,
            vec![t.tau(), t.one(Level::Quad), t.zero(Level::Quad)],
        )
        .unwrap();
        let sl = bose_line(&t, &p);
        let expected = Subspace::span(
            &t,
            &[
                ProjPoint::from_ints(&t, Level::Base, &[0, 1, 1, 0, 0, 0]),
                ProjPoint::from_ints(&t, Level::Base, &[1, 1, 0, 1, 0, 0]),
            ],
        );
        assert_eq!(sl.line, expected);
    }

    #[test]
    fn bose_line_is_representative_independent() {
        let t = FieldTower::default_for_q(3).unwrap();
        let p = ProjPoint::new(&t, vec![t.tau(), t.one(Level::Quad), t.from_int(2, Level::Quad)])
            .unwrap();
        let reference = bose_line(&t, &p).line;
        for rho in t.elements(Level::Quad).skip(1) {
            let scaled: Vec<Fel> = p.coords().iter().map(|&c| t.mul(rho, c)).collect();
            let q = ProjPoint::new(&t, scaled).unwrap();
            assert_eq!(bose_line(&t, &q).line, reference);
        }
    }

    #[test]
    fn spread_partitions_pg5() {
        for q in [2u64, 3] {
            let bose = setup(q);
            let t = bose.t();
            let expect = q * q * q * q + q * q + 1;
            assert_eq!(bose.lines.len() as u64, expect);
            // partition: every point covered exactly once
            let mut seen = std::collections::HashSet::new();
            for sl in &bose.lines {
                for p in sl.line.points(t) {
                    assert!(seen.insert(p), "spread lines overlap at q={q}");
                }
            }
            assert_eq!(seen.len() as u64, expect * (q + 1));
        }
    }

    #[test]
    fn gamma_meets_every_line_extension_once() {
        let bose = setup(3);
        let t = bose.t();
        let mut gamma_hits = std::collections::HashSet::new();
        for sl in &bose.lines {
            let ext = sl.line.extend(t, Level::Quad);
            let meet = ext.meet(t, bose.gamma());
            assert_eq!(meet.dim(), 0);
            let pt = meet.basis_points().remove(0);
            assert_eq!(pt, sl.gamma_point);
            gamma_hits.insert(pt);
        }
        // the map line ↦ Γ-point is a bijection onto Γ
        assert_eq!(gamma_hits.len(), bose.lines.len());
        // Γ and Γ^q are disjoint conjugates off PG(5,q)
        assert_eq!(bose.gamma().meet(t, bose.gamma_q()).dim(), -1);
        for p in bose.gamma().points(t) {
            assert!(p.try_section(t, Level::Base).is_none());
            assert!(bose.gamma_q().contains_point(t, &p.frob_q(t)));
        }
    }

    #[test]
    fn gamma_point_formula() {
        let bose = setup(3);
        let t = bose.t();
        // (1,0,0) ↦ A₁, (0,1,0) ↦ A₂, (1,1,1) ↦ A₁+A₂+A₃ on the line extension
        let a = &bose.transversals.a_points;
        assert_eq!(gamma6(t, &ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0])), a[0]);
        assert_eq!(gamma6(t, &ProjPoint::from_ints(t, Level::Quad, &[0, 1, 0])), a[1]);
        let p = ProjPoint::from_ints(t, Level::Quad, &[1, 1, 1]);
        let g = gamma6(t, &p);
        let sl = &bose.lines[bose.line_by_name(&p)];
        assert!(sl.line.extend(t, Level::Quad).contains_point(t, &g));
        // name round-trip
        assert_eq!(gamma_name(t, &g), Some(p));
        // P = τ^q·P₀ − P₁
        let tq = t.tau_conj();
        let coords: Vec<Fel> = sl
            .p0
            .coords()
            .iter()
            .zip(sl.p1.coords())
            .map(|(&c0, &c1)| t.sub(t.mul(tq, t.embed(c0, Level::Quad)), t.embed(c1, Level::Quad)))
            .collect();
        assert_eq!(ProjPoint::new(t, coords).unwrap(), g);
    }

    #[test]
    fn three_spaces_and_dual_spread_q2() {
        let bose = setup(2);
        let t = bose.t();
        let q = 2u64;
        // ℓ∞ = {z = 0}: its 3-space contains q²+1 spread lines
        let ell = Subspace::span(
            t,
            &[
                ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0]),
                ProjPoint::from_ints(t, Level::Quad, &[0, 1, 0]),
            ],
        );
        let s3 = bose.three_space(&ell);
        let inside = bose
            .lines
            .iter()
            .filter(|sl| s3.contains(t, &sl.line))
            .count();
        assert_eq!(inside as u64, q * q + 1);

        // collect the whole dual family over all lines of PG(2,q²)
        let mut family = Vec::new();
        for a in proj_points(t, Level::Quad, 3) {
            for bpt in proj_points(t, Level::Quad, 3) {
                if bpt == a {
                    continue;
                }
                let line = Subspace::span(t, &[a.clone(), bpt.clone()]);
                if line.dim() == 1 && !family.contains(&bose.three_space(&line)) {
                    family.push(bose.three_space(&line));
                }
            }
        }
        assert_eq!(family.len() as u64, q * q * q * q + q * q + 1);
        // two distinct lines of PG(2,q²) give 3-spaces meeting in one spread line
        let m = family[0].meet(t, &family[1]);
        assert_eq!(m.dim(), 1);
        assert!(bose.lines.iter().any(|sl| sl.line == m));
        // dual spread: every 4-space of PG(5,2) contains exactly one member
        for dual_pt in proj_points(t, Level::Base, 6) {
            let dual = Mat::from_rows(Level::Base, 6, vec![dual_pt.coords().to_vec()]);
            let hyp = Subspace::from_rows(t, Level::Base, 6, {
                let ns = dual.nullspace(t);
                (0..ns.rows).map(|r| ns.row_vec(r)).collect()
            });
            assert_eq!(hyp.dim(), 4);
            let count = family.iter().filter(|s3| hyp.contains(t, s3)).count();
            assert_eq!(count, 1);
        }
    }

    #[test]
    fn t_lines_unique_through_off_points() {
        let bose = setup(2);
        let t = bose.t();
        // a rational point lies on its spread line's extension
        let p = ProjPoint::from_ints(t, Level::Base, &[1, 1, 0, 1, 0, 1]);
        let tl = bose.t_line_through(&p.embed(t, Level::Quad)).unwrap();
        let sl = &bose.lines[bose.line_covering(&p)];
        assert_eq!(tl.line, sl.line.extend(t, Level::Quad));
        // T-points rejected
        let a1 = bose.transversals.a_points[0].clone();
        assert_eq!(bose.t_line_through(&a1).unwrap_err(), GeomError::OnTransversal);
    }

    #[test]
    fn subline_machinery() {
        let bose = setup(3);
        let t = bose.t();
        let x1 = ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0]);
        let x2 = ProjPoint::from_ints(t, Level::Quad, &[0, 1, 0]);
        let x3 = ProjPoint::from_ints(t, Level::Quad, &[1, 1, 0]);
        let b = BaerSubline::through(t, &x1, &x2, &x3).unwrap();
        assert_eq!(b.points.len(), 4);
        for p in &b.points {
            assert!(b.contains(t, p));
            assert_eq!(b.conj(t, p), *p);
        }
        // carrier points off the subline are moved, with c_b an involution
        let mut moved = 0;
        for p in b.carrier.points(t) {
            let c = b.conj(t, &p);
            assert_eq!(b.conj(t, &c), p);
            if c != p {
                moved += 1;
            }
        }
        assert_eq!(moved, 10 - 4);

        let reg = subline_regulus(&bose, &b).unwrap();
        assert_eq!(reg.line_indices.len(), 4);
        assert_eq!(reg.sigma.dim(), 3);
        // the quadric vanishes on all 16 regulus points and nowhere else in Σ_b
        let mut on = 0;
        for p in reg.sigma.points(t) {
            let internal = reg.internal(t, &p).unwrap();
            if reg.quadric.eval(t, &internal).is_zero() {
                on += 1;
            }
        }
        assert_eq!(on, 16);
    }

    #[test]
    fn subplane_machinery() {
        let bose = setup(3);
        let t = bose.t();
        let b = BaerSubplane::standard(t);
        assert_eq!(b.points.len(), 13);
        for p in &b.points {
            assert!(b.contains(t, p));
            assert_eq!(b.conj(t, p), *p);
        }
        // c_π is the coordinate-wise q-power on the standard subplane
        for p in proj_points(t, Level::Quad, 3) {
            assert_eq!(b.conj(t, &p), p.frob_q(t));
            assert_eq!(b.conj(t, &b.conj(t, &p)), p);
        }
        // fixed points of conj are exactly the subplane
        let fixed = proj_points(t, Level::Quad, 3).filter(|p| b.conj(t, p) == *p).count();
        assert_eq!(fixed, 13);

        // tangent fixture: exactly one point on z = 0
        let tangent = BaerSubplane::standard_tangent(t);
        let z0 = Subspace::span(
            t,
            &[
                ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0]),
                ProjPoint::from_ints(t, Level::Quad, &[0, 1, 0]),
            ],
        );
        assert_eq!(tangent.meet_count(t, &z0), 1);
        assert_eq!(b.meet_count(t, &z0), 4);
    }

    #[test]
    fn segre_structure_q3() {
        let bose = setup(3);
        let t = bose.t();
        let b = BaerSubplane::standard(t);
        let segre = subplane_segre(&bose, &b);
        assert_eq!(segre.points.len(), 52); // (q+1)(q²+q+1)
        assert_eq!(segre.planes.len(), 4);
        // quadrics cut exactly the point set
        let pset: std::collections::HashSet<_> = segre.points.iter().cloned().collect();
        let mut zero_count = 0;
        for p in proj_points(t, Level::Base, 6) {
            let vanish = segre.quadrics.iter().all(|f| f.vanishes_at(t, &p));
            if vanish {
                zero_count += 1;
                assert!(pset.contains(&p));
            }
        }
        assert_eq!(zero_count, 52);
        // each plane meets each spread line of the system in one point
        for plane in &segre.planes {
            for &li in segre.line_indices.iter().take(5) {
                let m = plane.meet(t, &bose.lines[li].line);
                assert_eq!(m.dim(), 0);
            }
        }
        // the space of quadrics through the point set has dimension exactly 3
        let rows: Vec<Vec<Fel>> = segre
            .points
            .iter()
            .map(|p| {
                let c = p.coords();
                let mut row = Vec::with_capacity(21);
                for i in 0..6 {
                    for j in i..6 {
                        row.push(t.mul(c[i], c[j]));
                    }
                }
                row
            })
            .collect();
        let ker = Mat::from_rows(Level::Base, 21, rows).nullspace(t);
        assert_eq!(ker.rows, 3);
    }
}
