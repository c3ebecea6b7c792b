//! Conics, conics of Baer subplanes, the quadric pairs and quintuples their
//! Bose images satisfy, scrolls ruled by parameter homographies, and normal
//! rational curves with their hyperplane intersections over GF(q⁴).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bose::{subplane_segre, BaerSubplane, Bose};
use crate::field::{Fel, FieldTower, Level};
use crate::forms::{monomial_count, BForm, QuadForm};
use crate::linalg::Mat;
use crate::projective::{proj_points, ProjPoint, Subspace};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum VarietyError {
    #[error("degenerate conic")]
    DegenerateConic,
    #[error("points do not lie on a unique non-degenerate conic")]
    NoUniqueConic,
    #[error("point lies outside the subplane")]
    OutsideSubplane,
    #[error("expected {need} points spanning a {dim}-space")]
    BadSpan { need: usize, dim: usize },
    #[error("need at least {0} points for the fit")]
    NotEnoughPoints(usize),
    #[error("no admissible frame subset is in general position")]
    NotAnArc,
    #[error("a supplied point does not lie on the fitted curve")]
    PointOffCurve,
    #[error("carrier spaces intersect")]
    IntersectingCarriers,
    #[error("curve lies inside the hyperplane")]
    CurveInHyperplane,
}

/// A non-degenerate conic: a 3-variable quadratic form over a level together
/// with its rational point set at that level.
#[derive(Clone, Debug)]
pub struct Conic {
    pub form: QuadForm,
    pub points: Vec<ProjPoint>,
}

/// Non-degeneracy over the closure: no common zero of the form and its three
/// formal partials up to GF(q⁴). In odd characteristic this is the usual
/// determinant criterion; in characteristic 2, where that fails, the
/// singular point is searched for directly (it is forced down to GF(q⁴)
/// because a degenerate conic's singular locus is Galois-stable).
pub fn conic_form_is_nondegenerate(t: &FieldTower, form: &QuadForm) -> bool {
    assert_eq!(form.nvars, 3);
    if form.is_zero() {
        return false;
    }
    if t.p() != 2 {
        let two = t.from_int(2, form.level);
        let m = Mat::from_rows(
            form.level,
            3,
            vec![
                vec![t.mul(two, form.coeff(0, 0)), form.coeff(0, 1), form.coeff(0, 2)],
                vec![form.coeff(0, 1), t.mul(two, form.coeff(1, 1)), form.coeff(1, 2)],
                vec![form.coeff(0, 2), form.coeff(1, 2), t.mul(two, form.coeff(2, 2))],
            ],
        );
        return !m.det(t).is_zero();
    }
    let ext = form.extend(t, Level::Quartic);
    for p in proj_points(t, Level::Quartic, 3) {
        if !ext.eval_point(t, &p).is_zero() {
            continue;
        }
        if ext.partials(t, p.coords()).iter().all(|d| d.is_zero()) {
            return false;
        }
    }
    true
}

impl Conic {
    pub fn new(t: &FieldTower, form: QuadForm) -> Result<Conic, VarietyError> {
        assert_eq!(form.nvars, 3);
        if !conic_form_is_nondegenerate(t, &form) {
            return Err(VarietyError::DegenerateConic);
        }
        let level = form.level;
        let points: Vec<ProjPoint> =
            proj_points(t, level, 3).filter(|p| form.vanishes_at(t, p)).collect();
        assert_eq!(points.len() as u64, t.size(level) + 1);
        Ok(Conic { form, points })
    }

    /// A quadratic parametrization (s:t) ↦ point sweeping the conic
    /// bijectively: lines through a base point meet the conic once more.
    pub fn parametrize(&self, t: &FieldTower) -> CurveParam {
        let level = self.form.level;
        let p0 = &self.points[0];
        // a line missing p0, from a fixed candidate list
        let candidates = [
            ProjPoint::from_ints(t, level, &[1, 0, 0]),
            ProjPoint::from_ints(t, level, &[0, 1, 0]),
            ProjPoint::from_ints(t, level, &[0, 0, 1]),
            ProjPoint::from_ints(t, level, &[1, 1, 1]),
        ];
        let (u, v) = 'found: {
            for i in 0..candidates.len() {
                for j in i + 1..candidates.len() {
                    let line = Subspace::span(t, &[candidates[i].clone(), candidates[j].clone()]);
                    if line.dim() == 1 && !line.contains_point(t, p0) {
                        break 'found (candidates[i].clone(), candidates[j].clone());
                    }
                }
            }
            unreachable!("some candidate line misses p0");
        };
        // D(s,t) = sU + tV; point = F(D)·P₀ − B(P₀,D)·D
        let polar = |a: &[Fel], b: &[Fel]| -> Fel {
            let sum: Vec<Fel> = a.iter().zip(b).map(|(&x, &y)| t.add(x, y)).collect();
            t.sub(
                t.sub(self.form.eval(t, &sum), self.form.eval(t, a)),
                self.form.eval(t, b),
            )
        };
        // F(D) = F(U)s² + B(U,V)st + F(V)t²  and  B(P₀,D) = B(P₀,U)s + B(P₀,V)t
        let fu = self.form.eval(t, u.coords());
        let fv = self.form.eval(t, v.coords());
        let buv = polar(u.coords(), v.coords());
        let bpu = polar(p0.coords(), u.coords());
        let bpv = polar(p0.coords(), v.coords());
        let mut cols = vec![vec![t.zero(level); 3]; 3];
        for r in 0..3 {
            let p0r = p0.coords()[r];
            let ur = u.coords()[r];
            let vr = v.coords()[r];
            // s²: F(U)p₀ − B(P₀,U)U
            cols[0][r] = t.sub(t.mul(fu, p0r), t.mul(bpu, ur));
            // st: B(U,V)p₀ − B(P₀,U)V − B(P₀,V)U
            cols[1][r] = t.sub(
                t.sub(t.mul(buv, p0r), t.mul(bpu, vr)),
                t.mul(bpv, ur),
            );
            // t²: F(V)p₀ − B(P₀,V)V
            cols[2][r] = t.sub(t.mul(fv, p0r), t.mul(bpv, vr));
        }
        let param = CurveParam { level, ambient: 3, cols };
        debug_assert!({
            let swept: std::collections::HashSet<ProjPoint> =
                param.rational_points(t).into_iter().collect();
            swept.len() == self.points.len()
                && self.points.iter().all(|p| swept.contains(p))
        });
        param
    }
}

/// A conic of a Baer subplane: the GF(q) equation in the subplane's frame,
/// the q+1 points it carves out of the subplane, and the unique GF(q²) conic
/// of the ambient plane through them.
#[derive(Clone, Debug)]
pub struct FqConic {
    pub subplane: BaerSubplane,
    /// 3-variable base-level form in frame coordinates.
    pub base_form: QuadForm,
    /// 𝒞⁺: the extension, as a conic of PG(2,q²).
    pub plus: Conic,
    /// 𝒞 = 𝒞⁺ ∩ B: q+1 points of PG(2,q²).
    pub points: Vec<ProjPoint>,
}

impl FqConic {
    /// Builds the conic from its frame equation.
    pub fn new(
        t: &FieldTower,
        subplane: &BaerSubplane,
        base_form: QuadForm,
    ) -> Result<FqConic, VarietyError> {
        assert_eq!(base_form.nvars, 3);
        assert_eq!(base_form.level, Level::Base);
        if !conic_form_is_nondegenerate(t, &base_form) {
            return Err(VarietyError::DegenerateConic);
        }
        let points: Vec<ProjPoint> = proj_points(t, Level::Base, 3)
            .filter(|r| base_form.vanishes_at(t, r))
            .map(|r| subplane.from_frame_coords(t, &r))
            .collect();
        assert_eq!(points.len() as u64, t.q() + 1);
        // C⁺: the same equation read over GF(q²) and pushed through the frame
        let h_inv = subplane
            .h()
            .inverse(t)
            .expect("frame matrix invertible");
        let plus_form = base_form.extend(t, Level::Quad).substitute(t, &h_inv);
        let plus = Conic::new(t, plus_form)?;
        debug_assert!(points.iter().all(|p| plus.form.vanishes_at(t, p)));
        Ok(FqConic { subplane: subplane.clone(), base_form, plus, points })
    }
}

/// The unique GF(q²) conic of the plane through the q+1 points of a conic of
/// the subplane: the linear system is solved in the subplane's frame, where
/// enumeration of the kernel pencil isolates the single non-degenerate
/// member.
pub fn extend_conic(
    t: &FieldTower,
    subplane: &BaerSubplane,
    points: &[ProjPoint],
) -> Result<FqConic, VarietyError> {
    let frame_pts: Vec<ProjPoint> = points
        .iter()
        .map(|p| subplane.to_frame_coords(t, p).ok_or(VarietyError::OutsideSubplane))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<Fel>> = frame_pts
        .iter()
        .map(|r| {
            let c = r.coords();
            let mut row = Vec::with_capacity(6);
            for i in 0..3 {
                for j in i..3 {
                    row.push(t.mul(c[i], c[j]));
                }
            }
            row
        })
        .collect();
    let ker = Mat::from_rows(Level::Base, 6, rows).nullspace(t);
    if ker.rows == 0 {
        return Err(VarietyError::NoUniqueConic);
    }
    // scan the projective kernel for non-degenerate members
    let mut found: Option<QuadForm> = None;
    for coeffs in proj_points(t, Level::Base, ker.rows) {
        let mut form = QuadForm::zero(t, Level::Base, 3);
        for (k, &c) in coeffs.coords().iter().enumerate() {
            for m in 0..6 {
                form.coeffs[m] = t.add(form.coeffs[m], t.mul(c, ker.at(k, m)));
            }
        }
        if conic_form_is_nondegenerate(t, &form) {
            if found.is_some() {
                return Err(VarietyError::NoUniqueConic);
            }
            found = Some(form.normalize(t));
        }
    }
    let base_form = found.ok_or(VarietyError::NoUniqueConic)?;
    let fq = FqConic::new(t, subplane, base_form)?;
    // the fitted conic must cut exactly the supplied points
    let supplied: std::collections::HashSet<ProjPoint> =
        points.iter().map(|p| p.embed(t, Level::Quad)).collect();
    if supplied.len() != fq.points.len()
        || !fq.points.iter().all(|p| supplied.contains(p))
    {
        return Err(VarietyError::NoUniqueConic);
    }
    Ok(fq)
}

/// The two GF(q) quadrics of PG(5,q) cutting the Bose image of a GF(q²)
/// conic: substitute x = x₀+x₁τ, y = y₀+y₁τ, z = z₀+z₁τ into the conic form
/// and split into τ-components.
pub fn conic_bose_quadrics(t: &FieldTower, conic_form: &QuadForm) -> (QuadForm, QuadForm) {
    assert_eq!(conic_form.nvars, 3);
    let level = Level::Quad;
    let mut m = Mat::zeros(t, level, 3, 6);
    for r in 0..3 {
        m.set(r, 2 * r, t.one(level));
        m.set(r, 2 * r + 1, t.tau());
    }
    let six = conic_form.extend(t, level).substitute(t, &m);
    six.split_quad(t)
}

/// The cone pair from the pencil of the two Bose quadrics over GF(q²):
/// Q₃ = Q₁ + τ^q·Q₂ (vertex Γ, base the conjugate conic) and
/// Q₄ = Q₁ + τ·Q₂ (vertex Γ^q, base the conic).
pub fn extended_cone_structure(
    t: &FieldTower,
    q1: &QuadForm,
    q2: &QuadForm,
) -> (QuadForm, QuadForm) {
    let e1 = q1.extend(t, Level::Quad);
    let e2 = q2.extend(t, Level::Quad);
    let q3 = e1.add(t, &e2.scale(t, t.tau_conj()));
    let q4 = e1.add(t, &e2.scale(t, t.tau()));
    (q3, q4)
}

/// The five GF(q) quadrics of PG(5,q) whose common zero set is the Bose
/// image of a conic of a Baer subplane: the conic pair of 𝒞⁺ plus the three
/// Segre quadrics of the subplane.
pub fn fq_conic_quadrics(bose: &Bose, fq: &FqConic) -> [QuadForm; 5] {
    let segre = subplane_segre(bose, &fq.subplane);
    fq_conic_quadrics_with(bose, fq, &segre.quadrics)
}

/// Same, reusing precomputed Segre quadrics of the subplane.
pub fn fq_conic_quadrics_with(
    bose: &Bose,
    fq: &FqConic,
    segre_quadrics: &[QuadForm; 3],
) -> [QuadForm; 5] {
    let t = bose.t();
    let (q1, q2) = conic_bose_quadrics(t, &fq.plus.form);
    [
        q1,
        q2,
        segre_quadrics[0].clone(),
        segre_quadrics[1].clone(),
        segre_quadrics[2].clone(),
    ]
}

/// A parametrized rational curve of order r: point(s,t) = Σ c_k s^{r−k} t^k.
#[derive(Clone, Debug)]
pub struct CurveParam {
    pub level: Level,
    pub ambient: usize,
    pub cols: Vec<Vec<Fel>>,
}

impl CurveParam {
    pub fn order(&self) -> usize {
        self.cols.len() - 1
    }

    pub fn eval(&self, t: &FieldTower, s: Fel, tt: Fel) -> ProjPoint {
        let level = self.level.max(s.level).max(tt.level);
        let r = self.order();
        let mut spow = vec![t.one(level); r + 1];
        let mut tpow = vec![t.one(level); r + 1];
        for k in 1..=r {
            spow[k] = t.mul(spow[k - 1], s);
            tpow[k] = t.mul(tpow[k - 1], tt);
        }
        let mut coords = vec![t.zero(level); self.ambient];
        for (k, col) in self.cols.iter().enumerate() {
            let w = t.mul(spow[r - k], tpow[k]);
            if w.is_zero() {
                continue;
            }
            for (c, &v) in coords.iter_mut().zip(col) {
                *c = t.add(*c, t.mul(w, v));
            }
        }
        ProjPoint::new(t, coords).expect("parametrization never vanishes")
    }

    /// The curve's points over a level, one per parameter, deduplicated but
    /// order-preserving.
    pub fn points_over(&self, t: &FieldTower, level: Level) -> Vec<ProjPoint> {
        let mut out = Vec::new();
        for st in proj_points(t, level, 2) {
            let p = self.eval(t, st.coords()[0], st.coords()[1]);
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    pub fn rational_points(&self, t: &FieldTower) -> Vec<ProjPoint> {
        self.points_over(t, self.level)
    }

    /// Extends the parametrization to a higher level (the variety-extension
    /// of the curve, swept by extended parameters).
    pub fn extend(&self, t: &FieldTower, level: Level) -> CurveParam {
        CurveParam {
            level,
            ambient: self.ambient,
            cols: self
                .cols
                .iter()
                .map(|col| col.iter().map(|&c| t.embed(c, level)).collect())
                .collect(),
        }
    }

    /// A linear functional evaluated along the curve: a binary form of
    /// degree r in the parameters.
    pub fn compose_functional(&self, t: &FieldTower, functional: &[Fel]) -> BForm {
        assert_eq!(functional.len(), self.ambient);
        let level = self.level.max(functional.iter().map(|f| f.level).max().unwrap());
        let coeffs: Vec<Fel> = self
            .cols
            .iter()
            .map(|col| {
                let mut acc = t.zero(level);
                for (&f, &c) in functional.iter().zip(col) {
                    acc = t.add(acc, t.mul(f, c));
                }
                acc
            })
            .collect();
        BForm::new(level, coeffs)
    }

    /// Smallest subspace containing the curve.
    pub fn span(&self, t: &FieldTower) -> Subspace {
        let pts: Vec<ProjPoint> = self
            .cols
            .iter()
            .filter_map(|col| ProjPoint::new(t, col.clone()))
            .collect();
        Subspace::span(t, &pts)
    }
}

/// A normal rational curve of order r: a parametrization whose image spans
/// an r-space and is a (q+1)-arc there.
#[derive(Clone, Debug)]
pub struct Nrc {
    pub order: usize,
    pub param: CurveParam,
    pub ambient_space: Subspace,
}

impl Nrc {
    pub fn from_param(t: &FieldTower, param: CurveParam) -> Nrc {
        let ambient_space = param.span(t);
        assert_eq!(
            ambient_space.dim() as usize,
            param.order(),
            "a normal rational curve spans an r-space"
        );
        Nrc { order: param.order(), param, ambient_space }
    }

    pub fn rational_points(&self, t: &FieldTower) -> Vec<ProjPoint> {
        self.param.rational_points(t)
    }

    /// Arc property: every r+1 points among the given ones are independent.
    pub fn is_arc_on(&self, t: &FieldTower, points: &[ProjPoint]) -> bool {
        let r = self.order;
        subsets(points.len(), r + 1).into_iter().all(|idx| {
            let pts: Vec<ProjPoint> = idx.iter().map(|&i| points[i].clone()).collect();
            Subspace::span(t, &pts).dim() as usize == r
        })
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // advance lexicographically
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Fits the unique normal rational curve of order r through the supplied
/// points of an r-space.
///
/// With at least r+3 points, the first r+3-subset (in lexicographic input
/// order) in general position pins the curve. A conic (r = 2) can also be
/// fitted from fewer points when the pencil of conics through them has a
/// unique non-degenerate member; that is what determines conics of PG(2,q)
/// at very small q.
pub fn fit_nrc(t: &FieldTower, points: &[ProjPoint], r: usize) -> Result<Nrc, VarietyError> {
    assert!((1..=4).contains(&r), "orders 1..=4 are supported");
    let level = points.iter().map(|p| p.level()).max().unwrap();
    let mut pts: Vec<ProjPoint> = Vec::new();
    for p in points {
        let p = p.embed(t, level);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let span = Subspace::span(t, &pts);
    if span.dim() as usize != r {
        return Err(VarietyError::BadSpan { need: r + 3, dim: r });
    }
    // internal coordinates of the r-space
    let basis_t = span.basis().transpose(t);
    let internal: Vec<ProjPoint> = pts
        .iter()
        .map(|p| {
            ProjPoint::new(t, basis_t.solve(t, p.coords()).expect("point in span")).unwrap()
        })
        .collect();

    let param_internal = if pts.len() >= r + 3 {
        fit_frame_route(t, &internal, r)?
    } else if r == 2 && pts.len() >= 3 {
        fit_conic_pencil(t, &internal)?
    } else {
        return Err(VarietyError::NotEnoughPoints(r + 3));
    };
    // map internal columns back to ambient coordinates
    let cols: Vec<Vec<Fel>> = param_internal
        .cols
        .iter()
        .map(|col| basis_t.mul_vec(t, col))
        .collect();
    let param = CurveParam { level, ambient: pts[0].len(), cols };
    let curve_points: std::collections::HashSet<ProjPoint> =
        param.rational_points(t).into_iter().collect();
    if !pts.iter().all(|p| curve_points.contains(p)) {
        return Err(VarietyError::PointOffCurve);
    }
    Ok(Nrc::from_param(t, param))
}

/// r+3 points in general position: frame the first r+2, read the last as
/// (b₁,…,b_{r+1}); the unique curve through all of them is
/// x_i(s,t) = b_i ∏_{j≠i} (b_j t + s), mapped back through the frame.
fn fit_frame_route(
    t: &FieldTower,
    internal: &[ProjPoint],
    r: usize,
) -> Result<CurveParam, VarietyError> {
    let level = internal[0].level();
    let n = r + 1;
    for idx in subsets(internal.len(), r + 3) {
        let chosen: Vec<&ProjPoint> = idx.iter().map(|&i| &internal[i]).collect();
        // frame matrix from the first r+1 points
        let mut fmat = Mat::zeros(t, level, n, n);
        for c in 0..n {
            for row in 0..n {
                fmat.set(row, c, chosen[c].coords()[row]);
            }
        }
        let Some(finv) = fmat.inverse(t) else { continue };
        let lambda = finv.mul_vec(t, chosen[n].coords());
        if lambda.iter().any(|l| l.is_zero()) {
            continue;
        }
        let mut h = fmat.clone();
        for c in 0..n {
            for row in 0..n {
                h.set(row, c, t.mul(h.at(row, c), lambda[c]));
            }
        }
        let h_inv = h.inverse(t).expect("scaled frame stays invertible");
        let b = h_inv.mul_vec(t, chosen[n + 1].coords());
        if b.iter().any(|v| v.is_zero()) {
            continue;
        }
        let distinct = (0..n).all(|i| (i + 1..n).all(|j| b[i] != b[j]));
        if !distinct {
            continue;
        }
        // x_i(s,t) = b_i ∏_{j≠i} (b_j t + s)
        let mut std_cols = vec![vec![t.zero(level); n]; r + 1];
        for i in 0..n {
            let mut prod = BForm::new(level, vec![t.one(level)]);
            for (j, &bj) in b.iter().enumerate() {
                if j == i {
                    continue;
                }
                prod = prod.mul(t, &BForm::new(level, vec![t.one(level), bj]));
            }
            for (k, &c) in prod.coeffs.iter().enumerate() {
                std_cols[k][i] = t.mul(b[i], c);
            }
        }
        let cols: Vec<Vec<Fel>> = std_cols.iter().map(|col| h.mul_vec(t, col)).collect();
        return Ok(CurveParam { level, ambient: n, cols });
    }
    Err(VarietyError::NotAnArc)
}

/// Conic through few points: the kernel pencil must contain exactly one
/// non-degenerate member.
fn fit_conic_pencil(t: &FieldTower, internal: &[ProjPoint]) -> Result<CurveParam, VarietyError> {
    let level = internal[0].level();
    let rows: Vec<Vec<Fel>> = internal
        .iter()
        .map(|p| {
            let c = p.coords();
            let mut row = Vec::with_capacity(6);
            for i in 0..3 {
                for j in i..3 {
                    row.push(t.mul(c[i], c[j]));
                }
            }
            row
        })
        .collect();
    let ker = Mat::from_rows(level, 6, rows).nullspace(t);
    let mut found: Option<QuadForm> = None;
    for coeffs in proj_points(t, level, ker.rows) {
        let mut form = QuadForm::zero(t, level, 3);
        for (k, &c) in coeffs.coords().iter().enumerate() {
            for m in 0..6 {
                form.coeffs[m] = t.add(form.coeffs[m], t.mul(c, ker.at(k, m)));
            }
        }
        if conic_form_is_nondegenerate(t, &form) {
            if found.is_some() {
                return Err(VarietyError::NoUniqueConic);
            }
            found = Some(form);
        }
    }
    let form = found.ok_or(VarietyError::NoUniqueConic)?;
    Ok(Conic::new(t, form)?.parametrize(t))
}

/// Hyperplane intersection of a normal rational curve: roots over GF(q⁴) of
/// the degree-r parameter form, with multiplicity, mapped to curve points.
/// The total multiplicity is r unless some roots escape to degrees the tower
/// does not hold (an odd-degree factor).
pub fn nrc_infinity(
    t: &FieldTower,
    nrc: &Nrc,
    functional: &[Fel],
) -> Result<Vec<(ProjPoint, u32)>, VarietyError> {
    let bform = nrc.param.compose_functional(t, functional);
    if bform.is_zero() {
        return Err(VarietyError::CurveInHyperplane);
    }
    let ext = nrc.param.extend(t, Level::Quartic);
    let mut out = Vec::new();
    for ((s, tt), mult) in bform.roots(t, Level::Quartic) {
        out.push((ext.eval(t, s, tt), mult));
    }
    Ok(out)
}

/// A scroll: lines joining two parametrized curves in disjoint spaces
/// according to a parameter projectivity.
#[derive(Clone, Debug)]
pub struct Scroll {
    pub ruled: (CurveParam, CurveParam),
    pub sigma: Mat,
    pub lines: Vec<Subspace>,
    pub points: Vec<ProjPoint>,
}

/// Builds the scroll of two curves under a 2×2 parameter homography σ:
/// for each (s:t), the line joins U(s,t) to W(σ(s,t)).
pub fn scroll_build(
    t: &FieldTower,
    u: &CurveParam,
    w: &CurveParam,
    sigma: &Mat,
) -> Result<Scroll, VarietyError> {
    assert_eq!(u.ambient, w.ambient);
    assert_eq!(sigma.rows, 2);
    assert_eq!(sigma.cols, 2);
    let level = u.level.max(w.level).max(sigma.level);
    if !u.span(t).meet(t, &w.span(t)).dim().eq(&-1) {
        return Err(VarietyError::IntersectingCarriers);
    }
    let mut lines = Vec::new();
    let mut points = Vec::new();
    for st in proj_points(t, level, 2) {
        let a = u.eval(t, st.coords()[0], st.coords()[1]);
        let img = sigma.mul_vec(t, st.coords());
        let b = w.eval(t, img[0], img[1]);
        let line = Subspace::span(t, &[a, b]);
        assert_eq!(line.dim(), 1, "carriers are disjoint so ruling spans are lines");
        for p in line.points(t) {
            if !points.contains(&p) {
                points.push(p);
            }
        }
        lines.push(line);
    }
    // ruling lines of a scroll are pairwise disjoint
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if lines[i].meet(t, &lines[j]).dim() != -1 {
                return Err(VarietyError::IntersectingCarriers);
            }
        }
    }
    Ok(Scroll { ruled: (u.clone(), w.clone()), sigma: sigma.clone(), lines, points })
}

/// Scroll of two disjoint planes under a 3×3 homography on their internal
/// coordinates: the q²+q+1 lines joining matching points.
pub fn scroll_build_planes(
    t: &FieldTower,
    alpha: &Subspace,
    beta: &Subspace,
    sigma: &Mat,
) -> Result<Vec<Subspace>, VarietyError> {
    assert_eq!(alpha.dim(), 2);
    assert_eq!(beta.dim(), 2);
    assert_eq!(sigma.rows, 3);
    if alpha.meet(t, beta).dim() != -1 {
        return Err(VarietyError::IntersectingCarriers);
    }
    let a_t = alpha.basis().transpose(t);
    let b_t = beta.basis().transpose(t);
    let mut lines = Vec::new();
    for x in proj_points(t, alpha.level(), 3) {
        let pa = ProjPoint::new(t, a_t.mul_vec(t, x.coords())).unwrap();
        let img = sigma.mul_vec(t, x.coords());
        let pb = ProjPoint::new(t, b_t.mul_vec(t, &img)).unwrap();
        lines.push(Subspace::span(t, &[pa, pb]));
    }
    Ok(lines)
}

#[derive(Clone, Debug)]
pub struct ScrollOrderReport {
    pub quadric_space_dim: usize,
    pub trials_run: usize,
    pub admissible_hits: usize,
    pub max_rational_intersection: usize,
    pub extension_exactly_four: bool,
    pub seed: u64,
}

/// Samples random 3-spaces against a conic-conic scroll: admissible ones
/// (no ruling line inside, meeting neither carrier plane in a line) must
/// meet the point set in at most 4 points, and over the quadratic extension
/// some sampled 3-space meets the extended scroll in exactly 4.
pub fn scroll_order_check(
    t: &FieldTower,
    scroll: &Scroll,
    trials: usize,
    seed: u64,
) -> ScrollOrderReport {
    let level = scroll.ruled.0.level;
    let nvars = scroll.ruled.0.ambient;
    // dimension of the space of quadrics through the scroll points
    let rows: Vec<Vec<Fel>> = scroll
        .points
        .iter()
        .map(|p| {
            let c = p.coords();
            let mut row = Vec::with_capacity(monomial_count(nvars));
            for i in 0..nvars {
                for j in i..nvars {
                    row.push(t.mul(c[i], c[j]));
                }
            }
            row
        })
        .collect();
    let quadric_space_dim = Mat::from_rows(level, monomial_count(nvars), rows)
        .nullspace(t)
        .rows;

    let carrier_a = scroll.ruled.0.span(t);
    let carrier_b = scroll.ruled.1.span(t);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = t.size(level) as u32;
    let mut random_subspace = |lv: Level, sz: u32| -> Subspace {
        loop {
            let rows: Vec<Vec<Fel>> = (0..4)
                .map(|_| (0..nvars).map(|_| t.el(lv, rng.gen_range(0..sz))).collect())
                .collect();
            let s = Subspace::from_rows(t, lv, nvars, rows);
            if s.dim() == 3 {
                return s;
            }
        }
    };

    let mut admissible_hits = 0;
    let mut max_rational = 0;
    for _ in 0..trials {
        let s3 = random_subspace(level, size);
        let admissible = !scroll.lines.iter().any(|l| s3.contains(t, l))
            && s3.meet(t, &carrier_a).dim() < 1
            && s3.meet(t, &carrier_b).dim() < 1;
        if !admissible {
            continue;
        }
        admissible_hits += 1;
        let hits = scroll.points.iter().filter(|p| s3.contains_point(t, p)).count();
        max_rational = max_rational.max(hits);
    }

    // extension: sweep extended parameters, look for an exact-4 section
    let ext_u = scroll.ruled.0.extend(t, Level::Quad);
    let ext_w = scroll.ruled.1.extend(t, Level::Quad);
    let ext_sigma = scroll.sigma.extend(t, Level::Quad);
    let mut ext_points = std::collections::HashSet::new();
    let mut ext_lines = Vec::new();
    for st in proj_points(t, Level::Quad, 2) {
        let a = ext_u.eval(t, st.coords()[0], st.coords()[1]);
        let img = ext_sigma.mul_vec(t, st.coords());
        let b = ext_w.eval(t, img[0], img[1]);
        let line = Subspace::span(t, &[a, b]);
        for p in line.points(t) {
            ext_points.insert(p);
        }
        ext_lines.push(line);
    }
    let ext_ca = carrier_a.extend(t, Level::Quad);
    let ext_cb = carrier_b.extend(t, Level::Quad);
    let ext_size = t.size(Level::Quad) as u32;
    let mut extension_exactly_four = false;
    for _ in 0..trials.max(200) {
        let s3 = random_subspace(Level::Quad, ext_size);
        let admissible = !ext_lines.iter().any(|l| s3.contains(t, l))
            && s3.meet(t, &ext_ca).dim() < 1
            && s3.meet(t, &ext_cb).dim() < 1;
        if !admissible {
            continue;
        }
        let hits = ext_points.iter().filter(|p| s3.contains_point(t, p)).count();
        if hits == 4 {
            extension_exactly_four = true;
            break;
        }
    }

    ScrollOrderReport {
        quadric_space_dim,
        trials_run: trials,
        admissible_hits,
        max_rational_intersection: max_rational,
        extension_exactly_four,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> FieldTower {
        FieldTower::default_for_q(3).unwrap()
    }

    /// y² − zx as a 3-variable form.
    fn moment_conic_form(t: &FieldTower, level: Level) -> QuadForm {
        let mut f = QuadForm::zero(t, level, 3);
        f.set_coeff(1, 1, t.one(level));
        f.set_coeff(0, 2, t.neg(t.one(level)));
        f
    }

    #[test]
    fn nondegeneracy_criteria_agree() {
        // determinant route (odd q) versus singular-point search: same verdict
        // on every ternary form over GF(3)
        let t = q3();
        for coeffs in crate::projective::proj_points(&t, Level::Base, 6) {
            let form = QuadForm::from_coeffs(Level::Base, 3, coeffs.coords().to_vec());
            let by_det = conic_form_is_nondegenerate(&t, &form);
            let ext = form.extend(&t, Level::Quartic);
            let by_search = !crate::projective::proj_points(&t, Level::Quartic, 3).any(|p| {
                ext.eval_point(&t, &p).is_zero()
                    && ext.partials(&t, p.coords()).iter().all(|d| d.is_zero())
            });
            assert_eq!(by_det, by_search, "{:?}", form.coeffs);
        }
    }

    #[test]
    fn nondegeneracy_criterion() {
        let t = q3();
        assert!(conic_form_is_nondegenerate(&t, &moment_conic_form(&t, Level::Base)));
        // xy = 0 is a line pair
        let mut f = QuadForm::zero(&t, Level::Base, 3);
        f.set_coeff(0, 1, t.one(Level::Base));
        assert!(!conic_form_is_nondegenerate(&t, &f));
        // char 2: x² + yz is smooth, (x+y)² is a double line
        let t2 = FieldTower::default_for_q(2).unwrap();
        let mut g = QuadForm::zero(&t2, Level::Base, 3);
        g.set_coeff(0, 0, t2.one(Level::Base));
        g.set_coeff(1, 2, t2.one(Level::Base));
        assert!(conic_form_is_nondegenerate(&t2, &g));
        let mut h = QuadForm::zero(&t2, Level::Base, 3);
        h.set_coeff(0, 0, t2.one(Level::Base));
        h.set_coeff(1, 1, t2.one(Level::Base));
        h.set_coeff(0, 1, t2.zero(Level::Base));
        assert!(!conic_form_is_nondegenerate(&t2, &h));
    }

    #[test]
    fn conic_parametrization_sweeps() {
        for q in [2u64, 3, 4, 5] {
            let t = FieldTower::default_for_q(q).unwrap();
            for level in [Level::Base, Level::Quad] {
                let conic = Conic::new(&t, moment_conic_form(&t, level)).unwrap();
                assert_eq!(conic.points.len() as u64, t.size(level) + 1);
                let param = conic.parametrize(&t);
                let swept = param.rational_points(&t);
                assert_eq!(swept.len(), conic.points.len());
            }
        }
    }

    #[test]
    fn bose_quadrics_match_the_split_forms() {
        let t = q3();
        let (f1, f2) = conic_bose_quadrics(&t, &moment_conic_form(&t, Level::Quad));
        let lv = Level::Base;
        let t0 = t.t0();
        let t1 = t.t1();
        let one = t.one(lv);
        // f₁ = y₁² + t₀y₂² − z₁x₁ − t₀z₂x₂ in coordinates (x₁,x₂,y₁,y₂,z₁,z₂)
        let mut e1 = QuadForm::zero(&t, lv, 6);
        e1.set_coeff(2, 2, one);
        e1.set_coeff(3, 3, t0);
        e1.set_coeff(0, 4, t.neg(one));
        e1.set_coeff(1, 5, t.neg(t0));
        assert_eq!(f1, e1);
        // f₂ = t₁y₂² + 2y₁y₂ − z₂x₁ − z₁x₂ − t₁z₂x₂
        let mut e2 = QuadForm::zero(&t, lv, 6);
        e2.set_coeff(3, 3, t1);
        e2.set_coeff(2, 3, t.from_int(2, lv));
        e2.set_coeff(0, 5, t.neg(one));
        e2.set_coeff(1, 4, t.neg(one));
        e2.set_coeff(1, 5, t.neg(t1));
        assert_eq!(f2, e2);
    }

    #[test]
    fn extend_conic_recovers_frame_equation() {
        let t = q3();
        let b = BaerSubplane::standard(&t);
        let fq = FqConic::new(&t, &b, moment_conic_form(&t, Level::Base)).unwrap();
        assert_eq!(fq.points.len(), 4);
        let refit = extend_conic(&t, &b, &fq.points).unwrap();
        assert_eq!(refit.plus.form.normalize(&t), fq.plus.form.normalize(&t));
        // C⁺ has the same equation over GF(q²) for the standard subplane
        let big = Conic::new(&t, moment_conic_form(&t, Level::Quad)).unwrap();
        assert_eq!(fq.plus.form.normalize(&t), big.form.normalize(&t));
        // five points of C⁺ in general position re-determine it
        let five: Vec<ProjPoint> = big.points.iter().take(5).cloned().collect();
        let refit5 = fit_nrc(&t, &five, 2).unwrap();
        let all: std::collections::HashSet<ProjPoint> =
            refit5.param.rational_points(&t).into_iter().collect();
        assert_eq!(all.len(), big.points.len());
        assert!(big.points.iter().all(|p| all.contains(p)));
    }

    #[test]
    fn degenerate_conic_rejected() {
        let t = q3();
        let b = BaerSubplane::standard(&t);
        let mut f = QuadForm::zero(&t, Level::Base, 3);
        f.set_coeff(0, 1, t.one(Level::Base)); // xy = 0
        assert_eq!(
            FqConic::new(&t, &b, f).unwrap_err(),
            VarietyError::DegenerateConic
        );
    }

    #[test]
    fn fit_nrc_moment_conic_q3() {
        let t = q3();
        // the 4 rational points of (1,θ,θ²) determine the conic via the pencil
        let pts: Vec<ProjPoint> = (0..4)
            .map(|k| {
                if k == 3 {
                    ProjPoint::from_ints(&t, Level::Base, &[0, 0, 1])
                } else {
                    let th = t.el(Level::Base, k);
                    ProjPoint::new(&t, vec![t.one(Level::Base), th, t.mul(th, th)]).unwrap()
                }
            })
            .collect();
        let nrc = fit_nrc(&t, &pts, 2).unwrap();
        assert_eq!(nrc.order, 2);
        let swept: std::collections::HashSet<ProjPoint> =
            nrc.param.rational_points(&t).into_iter().collect();
        assert_eq!(swept.len(), 4);
        assert!(pts.iter().all(|p| swept.contains(p)));
        assert!(nrc.is_arc_on(&t, &pts));
    }

    #[test]
    fn fit_nrc_twisted_cubic_from_extension_points() {
        let t = q3();
        // twisted cubic over GF(3): take 6 points of its GF(9) extension,
        // refit over GF(9), and check all 4 rational points lie on the fit
        let cubic = CurveParam {
            level: Level::Base,
            ambient: 4,
            cols: vec![
                vec![t.one(Level::Base), t.zero(Level::Base), t.zero(Level::Base), t.zero(Level::Base)],
                vec![t.zero(Level::Base), t.one(Level::Base), t.zero(Level::Base), t.zero(Level::Base)],
                vec![t.zero(Level::Base), t.zero(Level::Base), t.one(Level::Base), t.zero(Level::Base)],
                vec![t.zero(Level::Base), t.zero(Level::Base), t.zero(Level::Base), t.one(Level::Base)],
            ],
        };
        let ext_pts: Vec<ProjPoint> =
            cubic.extend(&t, Level::Quad).points_over(&t, Level::Quad).into_iter().take(6).collect();
        let nrc = fit_nrc(&t, &ext_pts, 3).unwrap();
        assert_eq!(nrc.order, 3);
        let swept: std::collections::HashSet<ProjPoint> =
            nrc.param.rational_points(&t).into_iter().collect();
        for p in cubic.rational_points(&t) {
            assert!(swept.contains(&p.embed(&t, Level::Quad)));
        }
    }

    #[test]
    fn fit_nrc_failure_cases() {
        let t = q3();
        // 5 points of PG(3,q) spanning the space do not pin an order-3 curve
        let pts = vec![
            ProjPoint::from_ints(&t, Level::Base, &[1, 0, 0, 0]),
            ProjPoint::from_ints(&t, Level::Base, &[0, 1, 0, 0]),
            ProjPoint::from_ints(&t, Level::Base, &[0, 0, 1, 0]),
            ProjPoint::from_ints(&t, Level::Base, &[0, 0, 0, 1]),
            ProjPoint::from_ints(&t, Level::Base, &[1, 1, 1, 1]),
        ];
        assert_eq!(fit_nrc(&t, &pts, 3).unwrap_err(), VarietyError::NotEnoughPoints(6));
        // collinear triple has no conic
        let col = vec![
            ProjPoint::from_ints(&t, Level::Base, &[1, 0, 0]),
            ProjPoint::from_ints(&t, Level::Base, &[0, 1, 0]),
            ProjPoint::from_ints(&t, Level::Base, &[1, 1, 0]),
        ];
        assert!(fit_nrc(&t, &col, 2).is_err());
    }

    #[test]
    fn nrc_infinity_examples() {
        let t = q3();
        let lv = Level::Base;
        let conic = CurveParam {
            level: lv,
            ambient: 3,
            cols: vec![
                vec![t.one(lv), t.zero(lv), t.zero(lv)],
                vec![t.zero(lv), t.one(lv), t.zero(lv)],
                vec![t.zero(lv), t.zero(lv), t.one(lv)],
            ],
        };
        let nrc = Nrc::from_param(&t, conic);
        // conic (1,θ,θ²) vs x₂ = 0: θ = 0 doubled
        let f = vec![t.zero(lv), t.zero(lv), t.one(lv)];
        let roots = nrc_infinity(&t, &nrc, &f).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].1, 2);
        assert_eq!(
            roots[0].0,
            ProjPoint::from_ints(&t, Level::Quartic, &[1, 0, 0])
        );
        // vs x₀ = 0: θ = ∞ doubled
        let f = vec![t.one(lv), t.zero(lv), t.zero(lv)];
        let roots = nrc_infinity(&t, &nrc, &f).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].1, 2);
        assert_eq!(
            roots[0].0,
            ProjPoint::from_ints(&t, Level::Quartic, &[0, 0, 1])
        );
    }

    #[test]
    fn twisted_cubic_infinity_mass_over_quartic() {
        let t = q3();
        let lv = Level::Base;
        let zero = t.zero(lv);
        let one = t.one(lv);
        let cubic = CurveParam {
            level: lv,
            ambient: 4,
            cols: vec![
                vec![one, zero, zero, zero],
                vec![zero, one, zero, zero],
                vec![zero, zero, one, zero],
                vec![zero, zero, zero, one],
            ],
        };
        let nrc = Nrc::from_param(&t, cubic);
        // x₀ − x₁ + x₃: θ³ − θ + 1 is irreducible over GF(3), so the roots
        // live in GF(27), beyond the tower; the mass found in GF(81) is 0
        let f = vec![one, t.neg(one), zero, one];
        let roots = nrc_infinity(&t, &nrc, &f).unwrap();
        let mass: u32 = roots.iter().map(|r| r.1).sum();
        assert_eq!(mass, 0);
        // a split cubic reaches full mass 3: θ(θ−1)(θ+1) = θ³ − θ  is
        // x₁·(x₁−x₀)(x₁+x₀) evaluated along the curve: x₃ − x₁
        let f = vec![zero, t.neg(one), zero, one];
        let roots = nrc_infinity(&t, &nrc, &f).unwrap();
        let mass: u32 = roots.iter().map(|r| r.1).sum();
        assert_eq!(mass, 3);
        for (p, _) in roots {
            assert!(p.try_section(&t, Level::Base).is_some());
        }
    }

    #[test]
    fn scroll_of_two_conics() {
        let t = q3();
        let lv = Level::Base;
        let zero = t.zero(lv);
        let one = t.one(lv);
        let u = CurveParam {
            level: lv,
            ambient: 6,
            cols: vec![
                vec![one, zero, zero, zero, zero, zero],
                vec![zero, one, zero, zero, zero, zero],
                vec![zero, zero, one, zero, zero, zero],
            ],
        };
        let w = CurveParam {
            level: lv,
            ambient: 6,
            cols: vec![
                vec![zero, zero, zero, one, zero, zero],
                vec![zero, zero, zero, zero, one, zero],
                vec![zero, zero, zero, zero, zero, one],
            ],
        };
        let sigma = Mat::identity(&t, lv, 2);
        let scroll = scroll_build(&t, &u, &w, &sigma).unwrap();
        assert_eq!(scroll.lines.len(), 4);
        assert_eq!(scroll.points.len(), 16); // (q+1)² on disjoint lines
        // identity scroll joins (s²,st,t²,0,0,0) to (0,0,0,s²,st,t²)
        let line0 = &scroll.lines[0];
        assert!(line0.contains_point(&t, &ProjPoint::from_ints(&t, lv, &[1, 0, 0, 0, 0, 0])));
        assert!(line0.contains_point(&t, &ProjPoint::from_ints(&t, lv, &[0, 0, 0, 1, 0, 0])));

        let report = scroll_order_check(&t, &scroll, 150, 42);
        assert!(report.admissible_hits > 0);
        assert!(report.max_rational_intersection <= 4);
        assert!(report.extension_exactly_four);

        // a 3-space containing a ruling line meets the scroll in ≥ q+1 points
        let mut rows: Vec<Vec<Fel>> = (0..2).map(|r| scroll.lines[0].basis().row_vec(r)).collect();
        rows.push(ProjPoint::from_ints(&t, lv, &[0, 1, 0, 0, 0, 0]).coords().to_vec());
        rows.push(ProjPoint::from_ints(&t, lv, &[0, 0, 0, 0, 1, 0]).coords().to_vec());
        let s3 = Subspace::from_rows(&t, lv, 6, rows);
        assert_eq!(s3.dim(), 3);
        let hits = scroll.points.iter().filter(|p| s3.contains_point(&t, p)).count();
        assert!(hits >= 4);
    }

    #[test]
    fn regulus_is_a_two_line_scroll() {
        let t = q3();
        let lv = Level::Base;
        let zero = t.zero(lv);
        let one = t.one(lv);
        // two skew lines of PG(3,q) padded into 6 coordinates
        let ell = CurveParam {
            level: lv,
            ambient: 6,
            cols: vec![
                vec![one, zero, zero, zero, zero, zero],
                vec![zero, one, zero, zero, zero, zero],
            ],
        };
        let m = CurveParam {
            level: lv,
            ambient: 6,
            cols: vec![
                vec![zero, zero, one, zero, zero, zero],
                vec![zero, zero, zero, one, zero, zero],
            ],
        };
        let scroll = scroll_build(&t, &ell, &m, &Mat::identity(&t, lv, 2)).unwrap();
        assert_eq!(scroll.lines.len(), 4);
        // the q+1 lines pairwise disjoint and inside the 3-space x₄=x₅=0
        assert_eq!(scroll.points.len(), 16);
    }
}
