//! Classification of conics of Baer subplanes through the Bruck-Bose slice:
//! the quartic curve [C] decomposes into spread lines plus a residual normal
//! rational curve of order 2, 3 or 4, lands in one of five cases, and the
//! residual curve is 2-special (its infinity weights sum to 4). The reverse
//! direction reconstructs the subplane and conic from a 2-special curve.

use serde::Serialize;
use std::collections::HashSet;

use thiserror::Error;

use crate::bose::{gamma6, gamma_name, BaerSubline, BaerSubplane, Bose};
use crate::bruck_bose::{slice, InfinityFrame, Slice};
use crate::field::{Fel, FieldTower, Level};
use crate::forms::{BForm, QuadForm};
use crate::linalg::Mat;
use crate::projective::{proj_points, ProjPoint, Subspace};
use crate::varieties::{
    extend_conic, fq_conic_quadrics_with, CurveParam, FqConic, Nrc, VarietyError,
};

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub enum CaseTag {
    #[serde(rename = "1a")]
    OneA,
    #[serde(rename = "1b")]
    OneB,
    #[serde(rename = "1c")]
    OneC,
    #[serde(rename = "2a")]
    TwoA,
    #[serde(rename = "2b")]
    TwoB,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseTag::OneA => "1a",
            CaseTag::OneB => "1b",
            CaseTag::OneC => "1c",
            CaseTag::TwoA => "2a",
            CaseTag::TwoB => "2b",
        };
        write!(f, "{s}")
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("variety error: {0}")]
    Variety(#[from] VarietyError),
    #[error("sliced scroll parametrization vanished identically")]
    EmptySlice,
    #[error("residual component is not a normal rational curve: {0}")]
    ResidualNotNrc(String),
    #[error("incidence case {incidence} disagrees with component case {component}")]
    TagMismatch { incidence: String, component: String },
    #[error("component pattern matches no case: lines {lines:?}, residual order {order}")]
    UnknownPattern { lines: Vec<u32>, order: usize },
    #[error("structure check failed: {0}")]
    Structure(String),
    #[error("point is not at infinity")]
    NotAtInfinity,
    #[error("candidate rejected: {0}")]
    Rejected(String),
}

/// A point of Σ∞ (possibly in an extension) with its transversal weight.
#[derive(Clone, Debug)]
pub struct WeightedPoint {
    pub point: ProjPoint,
    pub weight: u8,
    pub multiplicity: u32,
}

#[derive(Clone, Debug)]
pub enum Component {
    SpreadLine { index: usize, multiplicity: u32 },
    Curve { order: usize },
}

#[derive(Clone, Debug)]
pub struct CaseChecks {
    pub cor_cplus_bb: bool,
    pub double_tag_agree: bool,
}

/// The classification outcome of one conic of a Baer subplane.
#[derive(Clone, Debug)]
pub struct CaseRecord {
    pub case_tag: CaseTag,
    pub q: u64,
    pub components: Vec<Component>,
    pub line_components: Vec<(usize, u32)>,
    pub residual: Nrc,
    pub infinity: Vec<WeightedPoint>,
    pub weight_sum: u32,
    pub checks: CaseChecks,
}

/// The weight of a point of Σ∞ (or its extensions): 1 on a transversal line
/// (or its extension), 2 otherwise.
pub fn weight(bose: &Bose, frame: &InfinityFrame, p: &ProjPoint) -> Result<u8, ClassifyError> {
    let t = bose.t();
    if !frame.at_infinity(t, p) {
        return Err(ClassifyError::NotAtInfinity);
    }
    let level = p.level().max(Level::Quad);
    let p = p.embed(t, level);
    let on_g = frame.g.extend(t, level).contains_point(t, &p)
        || frame.g_q.extend(t, level).contains_point(t, &p);
    Ok(if on_g { 1 } else { 2 })
}

/// The quartic slice of a conic's Bose image, before case analysis:
/// spread-line components with multiplicity (from the common factor of the
/// sliced scroll parametrization) and the residual curve.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub line_components: Vec<(usize, u32)>,
    pub residual: Nrc,
    /// Parameters of C⁺ ∩ ℓ∞ that are not rational: the scroll-line
    /// markers of case 1c, as points of C⁺ on ℓ∞ off the subplane.
    pub extension_markers: Vec<ProjPoint>,
    pub slice_points: Slice,
}

/// Decomposes [C] = ⟦C⟧ ∩ Π_g. The conic is parametrized in its subplane
/// frame; the two Bose anchors become polynomial in the parameter, and the
/// slice point φ(P₁)·P₀ − φ(P₀)·P₁ is a sextuple of binary quartics. The
/// gcd of its coordinates carries the spread-line components (rational
/// roots, with multiplicity); the quotient parametrizes the residual curve.
pub fn decompose_quartic(
    bose: &Bose,
    frame: &InfinityFrame,
    fq: &FqConic,
) -> Result<Decomposition, ClassifyError> {
    let t = bose.t();
    let base_conic = crate::varieties::Conic::new(t, fq.base_form.clone())?;
    let frame_param = base_conic.parametrize(t);

    // plane columns: frame parametrization pushed through the subplane map
    let h = fq.subplane.h();
    let plane_cols: Vec<Vec<Fel>> = frame_param
        .cols
        .iter()
        .map(|col| {
            let v: Vec<Fel> = col.iter().map(|&c| t.embed(c, Level::Quad)).collect();
            h.mul_vec(t, &v)
        })
        .collect();

    // anchor polynomials P₀(s,t), P₁(s,t): coordinate-wise binary quadratics
    let real_cols: Vec<Vec<Fel>> = plane_cols.iter().map(|col| realify3(t, col)).collect();
    let tau_cols: Vec<Vec<Fel>> = plane_cols
        .iter()
        .map(|col| {
            let scaled: Vec<Fel> = col.iter().map(|&c| t.mul(t.tau(), c)).collect();
            realify3(t, &scaled)
        })
        .collect();
    let coord_form = |cols: &[Vec<Fel>], i: usize| -> BForm {
        BForm::new(Level::Base, vec![cols[0][i], cols[1][i], cols[2][i]])
    };
    let functional_form = |cols: &[Vec<Fel>]| -> BForm {
        let apply = |col: &Vec<Fel>| frame.eval_functional(t, col);
        BForm::new(Level::Base, vec![apply(&cols[0]), apply(&cols[1]), apply(&cols[2])])
    };
    let phi0 = functional_form(&real_cols);
    let phi1 = functional_form(&tau_cols);

    // V_i = φ(P₁)·P₀_i − φ(P₀)·P₁_i, degree 4
    let zero4 = BForm::new(Level::Base, vec![t.zero(Level::Base); 5]);
    let mut v_forms: Vec<BForm> = Vec::with_capacity(6);
    for i in 0..6 {
        let p0i = coord_form(&real_cols, i);
        let p1i = coord_form(&tau_cols, i);
        let a = phi1.mul(t, &p0i);
        let b = phi0.mul(t, &p1i);
        let coeffs: Vec<Fel> =
            a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| t.sub(x, y)).collect();
        v_forms.push(BForm::new(Level::Base, coeffs));
    }
    if v_forms.iter().all(|f| f.is_zero()) {
        return Err(ClassifyError::EmptySlice);
    }
    let mut gcd: Option<BForm> = None;
    for f in v_forms.iter().filter(|f| !f.is_zero()) {
        gcd = Some(match gcd {
            None => f.clone(),
            Some(g) => g.gcd(t, f),
        });
    }
    let gcd = gcd.unwrap();

    // spread-line components: rational roots of the gcd
    let mut line_components = Vec::new();
    let mut extension_markers = Vec::new();
    let plane_param = CurveParam { level: Level::Quad, ambient: 3, cols: plane_cols };
    for ((s, tt), mult) in gcd.roots(t, Level::Quad) {
        let point_bar = plane_param.eval(t, s, tt);
        if s.level <= Level::Base && tt.level <= Level::Base
            || ProjPoint::new(t, vec![s, tt]).unwrap().try_section(t, Level::Base).is_some()
        {
            line_components.push((bose.line_by_name(&point_bar), mult));
        } else {
            extension_markers.push(point_bar);
        }
    }
    line_components.sort_unstable();

    // residual curve: the quotient parametrization
    let w_forms: Vec<BForm> = v_forms
        .iter()
        .map(|f| if f.is_zero() { zero4.clone() } else { f.div_exact(t, &gcd) })
        .collect();
    let r = 4 - gcd.degree();
    let mut cols = vec![vec![t.zero(Level::Base); 6]; r + 1];
    for (i, f) in w_forms.iter().enumerate() {
        for (k, &c) in f.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k > r {
                return Err(ClassifyError::ResidualNotNrc(
                    "quotient coordinate exceeds residual degree".into(),
                ));
            }
            cols[k][i] = c;
        }
    }
    let param = CurveParam { level: Level::Base, ambient: 6, cols };
    let span = param.span(t);
    if span.dim() as usize != r {
        return Err(ClassifyError::ResidualNotNrc(format!(
            "residual of order {r} spans dimension {}",
            span.dim()
        )));
    }
    let residual = Nrc { order: r, param, ambient_space: span };

    // cross-check against the set-wise slice of ⟦C⟧
    let mut union_points = Vec::new();
    for p in &fq.points {
        union_points.extend(bose.lines[bose.line_by_name(p)].line.points(t));
    }
    let slice_points = slice(bose, frame, &union_points);
    let full: HashSet<usize> = slice_points.full_lines.iter().copied().collect();
    let comp: HashSet<usize> = line_components.iter().map(|&(i, _)| i).collect();
    if full != comp {
        return Err(ClassifyError::Structure(
            "gcd line components disagree with the set-wise slice".into(),
        ));
    }
    let rational: Vec<ProjPoint> = residual.rational_points(t);
    if rational.len() as u64 != bose.q() + 1 {
        return Err(ClassifyError::ResidualNotNrc(format!(
            "residual has {} rational points",
            rational.len()
        )));
    }
    let slice_set: HashSet<ProjPoint> = slice_points.all_points(bose).into_iter().collect();
    if !rational.iter().all(|p| slice_set.contains(p)) {
        return Err(ClassifyError::Structure(
            "residual curve leaves the sliced point set".into(),
        ));
    }
    let affine_set: HashSet<&ProjPoint> = slice_points.affine.iter().collect();
    let residual_affine: HashSet<&ProjPoint> = rational
        .iter()
        .filter(|p| !frame.sigma_inf.contains_point(t, p))
        .collect();
    if affine_set.len() != residual_affine.len()
        || !affine_set.iter().all(|p| residual_affine.contains(*p))
    {
        return Err(ClassifyError::Structure(
            "residual curve misses affine slice points".into(),
        ));
    }

    Ok(Decomposition { line_components, residual, extension_markers, slice_points })
}

fn realify3(t: &FieldTower, col: &[Fel]) -> Vec<Fel> {
    let mut out = Vec::with_capacity(6);
    for &c in col {
        let (lo, hi) = t.split(t.embed(c, Level::Quad));
        out.push(lo);
        out.push(hi);
    }
    out
}

/// Infinity points of a curve inside Π_g against Σ∞, with weights: the
/// composed dual forms of Σ∞ reduce to scalar multiples of one binary form
/// of degree r, whose GF(q⁴) roots are the intersection.
pub fn curve_infinity(
    bose: &Bose,
    frame: &InfinityFrame,
    nrc: &Nrc,
) -> Result<Vec<WeightedPoint>, ClassifyError> {
    let t = bose.t();
    let duals = frame.sigma_inf.dual(t);
    let mut infinity_form: Option<BForm> = None;
    for r in 0..duals.rows {
        let f = nrc.param.compose_functional(t, &duals.row_vec(r));
        if !f.is_zero() {
            infinity_form = Some(f);
            break;
        }
    }
    let Some(form) = infinity_form else {
        return Err(ClassifyError::Rejected("curve lies inside Σ∞".into()));
    };
    let ext = nrc.param.extend(t, Level::Quartic);
    let mut out = Vec::new();
    for ((s, tt), mult) in form.roots(t, Level::Quartic) {
        let point = ext.eval(t, s, tt);
        if !frame.at_infinity(t, &point) {
            return Err(ClassifyError::Rejected(
                "curve is not contained in Π_g".into(),
            ));
        }
        let point = section_min(t, point);
        let w = weight(bose, frame, &point)?;
        out.push(WeightedPoint { point, weight: w, multiplicity: mult });
    }
    Ok(out)
}

/// Sections a point down to the smallest level holding it.
fn section_min(t: &FieldTower, p: ProjPoint) -> ProjPoint {
    for lv in [Level::Base, Level::Quad] {
        if let Some(down) = p.try_section(t, lv) {
            return down;
        }
    }
    p
}

/// Is the curve 2-special: inside Π_g, not inside Σ∞, and the infinity
/// weights (with multiplicity) sum to exactly 4. Returns the witnesses.
pub fn is_two_special(
    bose: &Bose,
    frame: &InfinityFrame,
    nrc: &Nrc,
) -> Result<(bool, Vec<WeightedPoint>), ClassifyError> {
    let t = bose.t();
    let pi_form = nrc.param.compose_functional(t, &frame.functional);
    if !pi_form.is_zero() {
        return Err(ClassifyError::Rejected("curve is not contained in Π_g".into()));
    }
    let witnesses = curve_infinity(bose, frame, nrc)?;
    let sum: u32 = witnesses.iter().map(|w| w.weight as u32 * w.multiplicity).sum();
    Ok((sum == 4, witnesses))
}

fn incidence_tag(
    bose: &Bose,
    frame: &InfinityFrame,
    fq: &FqConic,
) -> Result<CaseTag, ClassifyError> {
    let t = bose.t();
    let b_meet = fq.subplane.meet_count(t, &frame.ell_inf);
    let c_meet = fq
        .points
        .iter()
        .filter(|p| frame.ell_inf.contains_point(t, p))
        .count();
    let secant = b_meet as u64 == bose.q() + 1;
    let tangent = b_meet == 1;
    if !secant && !tangent {
        return Err(ClassifyError::Structure(format!(
            "subplane meets ℓ∞ in {b_meet} points"
        )));
    }
    Ok(match (secant, c_meet) {
        (true, 2) => CaseTag::OneA,
        (true, 1) => CaseTag::OneB,
        (true, 0) => CaseTag::OneC,
        (false, 1) => CaseTag::TwoA,
        (false, 0) => CaseTag::TwoB,
        _ => {
            return Err(ClassifyError::Structure(format!(
                "impossible incidence: secant={secant}, |C∩ℓ∞|={c_meet}"
            )))
        }
    })
}

fn component_tag(decomp: &Decomposition) -> Result<CaseTag, ClassifyError> {
    let mults: Vec<u32> = decomp.line_components.iter().map(|&(_, m)| m).collect();
    let order = decomp.residual.order;
    Ok(match (mults.as_slice(), order) {
        ([1, 1], 2) => CaseTag::OneA,
        ([2], 2) => CaseTag::OneB,
        ([], 2) => CaseTag::OneC,
        ([1], 3) => CaseTag::TwoA,
        ([], 4) => CaseTag::TwoB,
        _ => {
            return Err(ClassifyError::UnknownPattern { lines: mults, order })
        }
    })
}

/// Per-case structural requirements on the decomposition and infinity data.
fn structure_failures(
    bose: &Bose,
    frame: &InfinityFrame,
    fq: &FqConic,
    tag: CaseTag,
    decomp: &Decomposition,
    infinity: &[WeightedPoint],
) -> Vec<String> {
    let t = bose.t();
    let mut fails = Vec::new();
    let mut check = |ok: bool, msg: &str| {
        if !ok {
            fails.push(msg.to_string());
        }
    };
    let rational_infinity: Vec<&WeightedPoint> =
        infinity.iter().filter(|w| w.point.level() == Level::Base).collect();
    match tag {
        CaseTag::OneA => {
            check(decomp.line_components.len() == 2, "case 1a needs two spread lines");
            check(rational_infinity.len() == 2, "conic must meet Σ∞ in two real points");
            // one point on each component line
            for (li, _) in &decomp.line_components {
                let line = &bose.lines[*li].line;
                let on = rational_infinity
                    .iter()
                    .filter(|w| line.contains_point(t, &w.point))
                    .count();
                check(on == 1, "conic meets each component spread line once");
            }
            check(
                rational_infinity.iter().all(|w| w.weight == 2),
                "real infinity points weigh 2",
            );
        }
        CaseTag::OneB => {
            check(
                decomp.line_components.len() == 1 && decomp.line_components[0].1 == 2,
                "case 1b needs one doubled spread line",
            );
            check(
                rational_infinity.len() == 1 && rational_infinity[0].multiplicity == 2,
                "conic is tangent to Σ∞ at a repeated point",
            );
            if let Some(w) = rational_infinity.first() {
                let line = &bose.lines[decomp.line_components[0].0].line;
                check(line.contains_point(t, &w.point), "tangent point lies on [T]");
            }
        }
        CaseTag::OneC => {
            check(decomp.line_components.is_empty(), "case 1c has no spread lines");
            check(rational_infinity.is_empty(), "conic misses Σ∞");
            let quad_pts: Vec<&WeightedPoint> =
                infinity.iter().filter(|w| w.point.level() == Level::Quad).collect();
            check(quad_pts.len() == 2, "extension meets Σ∞ in two conjugate points");
            check(quad_pts.iter().all(|w| w.weight == 2), "both extension points weigh 2");
            if quad_pts.len() == 2 {
                check(
                    quad_pts[0].point.frob_q(t) == quad_pts[1].point,
                    "extension infinity points are conjugate",
                );
            }
            // the two markers X, X^{c_π} on ℓ∞ carry the scroll lines
            // X(X^{c_π})^q and X^{c_π}X^q; each infinity point lies on one
            check(decomp.extension_markers.len() == 2, "two ℓ∞ markers off the subplane");
            if decomp.extension_markers.len() == 2 {
                let x1 = &decomp.extension_markers[0];
                let x2 = &decomp.extension_markers[1];
                check(
                    fq.subplane.conj(t, x1) == *x2,
                    "ℓ∞ markers are conjugate with respect to the subplane",
                );
                check(
                    fq.plus.form.vanishes_at(t, x1) && fq.plus.form.vanishes_at(t, x2),
                    "ℓ∞ markers lie on C⁺",
                );
                let scroll1 =
                    Subspace::span(t, &[gamma6(t, x1), gamma6(t, x2).frob_q(t)]);
                let scroll2 =
                    Subspace::span(t, &[gamma6(t, x2), gamma6(t, x1).frob_q(t)]);
                for w in &quad_pts {
                    let on1 = scroll1.contains_point(t, &w.point);
                    let on2 = scroll2.contains_point(t, &w.point);
                    check(on1 ^ on2, "each extension point lies on exactly one scroll line");
                    let on_g = frame.g.contains_point(t, &w.point)
                        || frame.g_q.contains_point(t, &w.point);
                    check(!on_g, "extension points avoid g and g^q");
                }
            }
        }
        CaseTag::TwoA => {
            check(
                decomp.line_components.len() == 1 && decomp.line_components[0].1 == 1,
                "case 2a needs one simple spread line",
            );
            check(decomp.residual.order == 3, "residual is a twisted cubic");
            check(rational_infinity.len() == 1, "one real infinity point");
            if let Some(w) = rational_infinity.first() {
                check(w.weight == 2, "real infinity point weighs 2");
                let line = &bose.lines[decomp.line_components[0].0].line;
                check(line.contains_point(t, &w.point), "real point lies on [T]");
            }
            let pair: Vec<&WeightedPoint> =
                infinity.iter().filter(|w| w.point.level() != Level::Base).collect();
            check(pair.len() == 2, "a conjugate pair completes the cubic's infinity");
            if pair.len() == 2 {
                check(pair.iter().all(|w| w.weight == 1), "pair lies on the transversals");
                let lv = pair[0].point.level().max(pair[1].point.level());
                check(
                    pair[0].point.embed(t, lv).frob_q(t) == pair[1].point.embed(t, lv),
                    "transversal points are conjugate",
                );
            }
        }
        CaseTag::TwoB => {
            check(decomp.line_components.is_empty(), "case 2b has no spread lines");
            check(decomp.residual.order == 4, "residual has order 4");
            check(rational_infinity.is_empty(), "no real infinity points");
            let mass: u32 = infinity.iter().map(|w| w.multiplicity).sum();
            check(mass == 4, "four infinity points with multiplicity");
            check(infinity.iter().all(|w| w.weight == 1), "all infinity points weigh 1");
        }
    }
    fails
}

/// Σ∞ intersection of the five-quadric variety-extension with g, computed
/// by enumerating g's GF(q⁴) points against the extended forms.
pub fn variety_meets_g(
    bose: &Bose,
    frame: &InfinityFrame,
    quadrics: &[QuadForm; 5],
) -> Vec<ProjPoint> {
    let t = bose.t();
    let ext: Vec<QuadForm> = quadrics.iter().map(|f| f.extend(t, Level::Quartic)).collect();
    let gb = frame.g.basis_points();
    let g0 = gb[0].embed(t, Level::Quartic);
    let g1 = gb[1].embed(t, Level::Quartic);
    let mut out = Vec::new();
    for st in proj_points(t, Level::Quartic, 2) {
        let s = st.coords()[0];
        let tt = st.coords()[1];
        let coords: Vec<Fel> = (0..6)
            .map(|i| t.add(t.mul(s, g0.coords()[i]), t.mul(tt, g1.coords()[i])))
            .collect();
        let p = ProjPoint::new(t, coords).unwrap();
        if ext.iter().all(|f| f.vanishes_at(t, &p)) {
            out.push(p);
        }
    }
    out
}

/// C⁺ ∩ g over GF(q⁴), through the quadratic-root solver on the restricted
/// conic equation.
pub fn cplus_meets_g(bose: &Bose, frame: &InfinityFrame, fq: &FqConic) -> Vec<ProjPoint> {
    let t = bose.t();
    let names = frame.ell_inf.basis_points();
    let n0 = &names[0];
    let n1 = &names[1];
    // restrict C⁺ to the line s·n0 + t·n1: a binary quadratic over GF(q²)
    let form = &fq.plus.form;
    let eval_pair = |a: &ProjPoint, b: &ProjPoint| -> Fel {
        // polar form of C⁺ at (a, b)
        let sum: Vec<Fel> = a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(&x, &y)| t.add(x, y))
            .collect();
        t.sub(
            t.sub(form.eval(t, &sum), form.eval(t, a.coords())),
            form.eval(t, b.coords()),
        )
    };
    let c_ss = form.eval(t, n0.coords());
    let c_st = eval_pair(n0, n1);
    let c_tt = form.eval(t, n1.coords());
    // roots of c_ss·s² + c_st·st + c_tt·t² = 0 over GF(q⁴), as points on g✶
    let g0 = gamma6(t, n0).embed(t, Level::Quartic);
    let g1 = gamma6(t, n1).embed(t, Level::Quartic);
    let bform = BForm::new(Level::Quad, vec![c_ss, c_st, c_tt]);
    let mut out = Vec::new();
    for ((s, tt), _mult) in bform.roots(t, Level::Quartic) {
        let coords: Vec<Fel> = (0..6)
            .map(|i| t.add(t.mul(s, g0.coords()[i]), t.mul(tt, g1.coords()[i])))
            .collect();
        out.push(ProjPoint::new(t, coords).unwrap());
    }
    out
}

/// Full classification of one conic of a Baer subplane: decomposition, case
/// tag (derived twice and required to agree), infinity weights, and the
/// variety/extension consistency check on g.
pub fn classify_fq_conic(
    bose: &Bose,
    frame: &InfinityFrame,
    fq: &FqConic,
    segre_quadrics: &[QuadForm; 3],
) -> Result<CaseRecord, ClassifyError> {
    let tag_i = incidence_tag(bose, frame, fq)?;
    let decomp = decompose_quartic(bose, frame, fq)?;
    let tag_c = component_tag(&decomp)?;
    if tag_i != tag_c {
        return Err(ClassifyError::TagMismatch {
            incidence: tag_i.to_string(),
            component: tag_c.to_string(),
        });
    }
    let infinity = curve_infinity(bose, frame, &decomp.residual)?;
    let weight_sum: u32 = infinity.iter().map(|w| w.weight as u32 * w.multiplicity).sum();
    let fails = structure_failures(bose, frame, fq, tag_i, &decomp, &infinity);
    if let Some(f) = fails.first() {
        return Err(ClassifyError::Structure(f.clone()));
    }
    if weight_sum != 4 {
        return Err(ClassifyError::Structure(format!(
            "weights sum to {weight_sum}, not 4"
        )));
    }

    // the variety-extension meets g exactly where C⁺ meets ℓ∞
    let quadrics = fq_conic_quadrics_with(bose, fq, segre_quadrics);
    let lhs: HashSet<ProjPoint> = variety_meets_g(bose, frame, &quadrics).into_iter().collect();
    let rhs: HashSet<ProjPoint> = cplus_meets_g(bose, frame, fq).into_iter().collect();
    let cor_cplus_bb = lhs == rhs;

    let mut components: Vec<Component> = decomp
        .line_components
        .iter()
        .map(|&(index, multiplicity)| Component::SpreadLine { index, multiplicity })
        .collect();
    components.push(Component::Curve { order: decomp.residual.order });

    Ok(CaseRecord {
        case_tag: tag_i,
        q: bose.q(),
        components,
        line_components: decomp.line_components.clone(),
        residual: decomp.residual,
        infinity,
        weight_sum,
        checks: CaseChecks { cor_cplus_bb, double_tag_agree: true },
    })
}

/// Reconstructs the conic (and its Baer subplane) from a candidate curve of
/// PG(4,q) via the inverse slice: affine points name spread lines through
/// the point, extension points name scroll lines through their T-lines, and
/// the subplane is the fixed set of the conjugation the conic's rational
/// points induce on its GF(q²) extension.
pub fn reverse_check(
    bose: &Bose,
    frame: &InfinityFrame,
    nrc: &Nrc,
) -> Result<FqConic, ClassifyError> {
    let t = bose.t();
    // the curve must live in Π_g but not in Σ∞
    let (two_special, witnesses) = is_two_special(bose, frame, nrc)?;
    if !two_special {
        let ws: Vec<String> = witnesses
            .iter()
            .map(|w| format!("w={} m={}", w.weight, w.multiplicity))
            .collect();
        return Err(ClassifyError::Rejected(format!(
            "not 2-special: weights [{}]",
            ws.join(", ")
        )));
    }
    if nrc.order == 2 {
        // the carrier plane must not contain a spread line, else it is the
        // slice of a line of PG(2,q²) rather than of a Baer subplane
        let m = nrc.ambient_space.meet(t, &frame.sigma_inf);
        if m.dim() == 1 && bose.lines.iter().any(|sl| sl.line == m) {
            return Err(ClassifyError::Rejected(
                "carrier plane holds a spread line; it slices a line, not a subplane".into(),
            ));
        }
    }

    // name every GF(q²) point of the curve extension
    let ext = nrc.param.extend(t, Level::Quad);
    let mut names: Vec<ProjPoint> = Vec::new();
    let mut push_name = |n: ProjPoint| {
        if !names.contains(&n) {
            names.push(n);
        }
    };
    for st in proj_points(t, Level::Quad, 2) {
        let p = ext.eval(t, st.coords()[0], st.coords()[1]);
        if let Some(real) = p.try_section(t, Level::Base) {
            push_name(bose.name_of_covered(&real).clone());
        } else if bose.gamma().contains_point(t, &p) {
            push_name(gamma_name(t, &p).expect("point of Γ"));
        } else if bose.gamma_q().contains_point(t, &p) {
            push_name(gamma_name(t, &p.frob_q(t)).expect("conjugate point of Γ"));
        } else {
            let tl = bose
                .t_line_through(&p)
                .map_err(|e| ClassifyError::Rejected(format!("T-line naming failed: {e}")))?;
            push_name(gamma_name(t, &tl.gamma_end).expect("T-line meets Γ"));
        }
    }
    if names.len() < 5 {
        return Err(ClassifyError::Rejected(format!(
            "only {} distinct names; cannot pin a conic",
            names.len()
        )));
    }
    // unique conic of PG(2,q²) through the names
    let rows: Vec<Vec<Fel>> = names
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
    let ker = Mat::from_rows(Level::Quad, 6, rows).nullspace(t);
    if ker.rows != 1 {
        return Err(ClassifyError::Rejected(format!(
            "names lie on a {}-dimensional space of conics",
            ker.rows
        )));
    }
    let plus_form = QuadForm::from_coeffs(Level::Quad, 3, ker.row_vec(0));
    let plus = crate::varieties::Conic::new(t, plus_form)
        .map_err(|e| ClassifyError::Rejected(format!("named conic is degenerate: {e}")))?;

    // rational names: the q+1 points of the conic C̄
    let mut c_points: Vec<ProjPoint> = Vec::new();
    for p in nrc.rational_points(t) {
        let name = bose.name_of_covered(&p).clone();
        if !c_points.contains(&name) {
            c_points.push(name);
        }
    }
    if c_points.len() as u64 != bose.q() + 1 {
        return Err(ClassifyError::Rejected(format!(
            "rational points name {} plane points, expected q+1",
            c_points.len()
        )));
    }
    if !c_points.iter().all(|p| plus.form.vanishes_at(t, p)) {
        return Err(ClassifyError::Rejected(
            "rational names do not lie on the named conic".into(),
        ));
    }

    // the conjugation: rational names cut a Baer subline of the conic's
    // parameter line; its involution transports to the plane
    let plus_param = plus.parametrize(t);
    let param_of = |p: &ProjPoint| -> Option<ProjPoint> {
        for st in proj_points(t, Level::Quad, 2) {
            if &plus_param.eval(t, st.coords()[0], st.coords()[1]) == p {
                return Some(st);
            }
        }
        None
    };
    let mut c_params = Vec::new();
    for p in &c_points {
        let st = param_of(p).ok_or_else(|| {
            ClassifyError::Rejected("rational name escapes the conic parametrization".into())
        })?;
        c_params.push(pad3(t, &st));
    }
    let subline = BaerSubline::through(t, &c_params[0], &c_params[1], &c_params[2])
        .map_err(|e| ClassifyError::Rejected(format!("parameters are degenerate: {e}")))?;
    if !c_params.iter().all(|p| subline.contains(t, p)) {
        return Err(ClassifyError::Rejected(
            "rational parameters do not form a Baer subline".into(),
        ));
    }
    // four parameter/involution pairs determine σ = M ∘ frobenius
    let sample_params: Vec<ProjPoint> =
        proj_points(t, Level::Quad, 2).take(4).map(|st| pad3(t, &st)).collect();
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    for sp in &sample_params {
        let ip = subline.conj(t, sp);
        let src = plus_param.eval(t, sp.coords()[0], sp.coords()[1]);
        let dst = plus_param.eval(t, ip.coords()[0], ip.coords()[1]);
        sources.push(src.frob_q(t));
        targets.push(dst);
    }
    let m_src = frame_matrix(t, &sources)
        .ok_or_else(|| ClassifyError::Rejected("conjugated frame is degenerate".into()))?;
    let m_dst = frame_matrix(t, &targets)
        .ok_or_else(|| ClassifyError::Rejected("image frame is degenerate".into()))?;
    let m = m_dst.mul(t, &m_src.inverse(t).expect("frame matrices invertible"));
    let sigma = |p: &ProjPoint| -> ProjPoint {
        let pq: Vec<Fel> = p.coords().iter().map(|&c| t.frob_q(c)).collect();
        ProjPoint::new(t, m.mul_vec(t, &pq)).unwrap()
    };

    // fixed points of σ form the subplane
    let mut fixed = Vec::new();
    for p in proj_points(t, Level::Quad, 3) {
        let s = sigma(&p);
        if sigma(&s) != p {
            return Err(ClassifyError::Rejected("conjugation is not an involution".into()));
        }
        if s == p {
            fixed.push(p);
        }
    }
    let expect = (bose.q() * bose.q() + bose.q() + 1) as usize;
    if fixed.len() != expect {
        return Err(ClassifyError::Rejected(format!(
            "conjugation fixes {} points, expected {expect}",
            fixed.len()
        )));
    }
    let frame_pts = pick_frame(t, &fixed)
        .ok_or_else(|| ClassifyError::Rejected("fixed set holds no frame".into()))?;
    let subplane = BaerSubplane::from_frame(t, frame_pts)
        .map_err(|e| ClassifyError::Rejected(format!("fixed set is not a subplane: {e}")))?;
    let fixed_set: HashSet<&ProjPoint> = fixed.iter().collect();
    if !subplane.points.iter().all(|p| fixed_set.contains(p)) {
        return Err(ClassifyError::Rejected(
            "fixed set is not a Baer subplane".into(),
        ));
    }
    if !c_points.iter().all(|p| subplane.contains(t, p)) {
        return Err(ClassifyError::Rejected(
            "conic points leave the reconstructed subplane".into(),
        ));
    }
    let fq = extend_conic(t, &subplane, &c_points)
        .map_err(|e| ClassifyError::Rejected(format!("not a conic of the subplane: {e}")))?;
    Ok(fq)
}

fn pad3(t: &FieldTower, st: &ProjPoint) -> ProjPoint {
    let mut coords = st.coords().to_vec();
    coords.push(t.zero(st.level()));
    ProjPoint::new(t, coords).unwrap()
}

/// Matrix sending the standard frame to four points in general position.
fn frame_matrix(t: &FieldTower, pts: &[ProjPoint]) -> Option<Mat> {
    assert_eq!(pts.len(), 4);
    let level = pts.iter().map(|p| p.level()).max().unwrap();
    let mut cols = Mat::zeros(t, level, 3, 3);
    for c in 0..3 {
        for r in 0..3 {
            cols.set(r, c, t.embed(pts[c].coords()[r], level));
        }
    }
    if cols.det(t).is_zero() {
        return None;
    }
    let lambda = cols.solve(t, &pts[3].coords().iter().map(|&c| t.embed(c, level)).collect::<Vec<_>>())?;
    if lambda.iter().any(|l| l.is_zero()) {
        return None;
    }
    let mut m = cols;
    for c in 0..3 {
        for r in 0..3 {
            m.set(r, c, t.mul(m.at(r, c), lambda[c]));
        }
    }
    Some(m)
}

fn pick_frame(t: &FieldTower, pts: &[ProjPoint]) -> Option<[ProjPoint; 4]> {
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let tri = Subspace::span(t, &[pts[i].clone(), pts[j].clone(), pts[k].clone()]);
                if tri.dim() != 2 {
                    continue;
                }
                for l in 0..pts.len() {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    if frame_matrix(
                        t,
                        &[pts[i].clone(), pts[j].clone(), pts[k].clone(), pts[l].clone()],
                    )
                    .is_some()
                    {
                        return Some([
                            pts[i].clone(),
                            pts[j].clone(),
                            pts[k].clone(),
                            pts[l].clone(),
                        ]);
                    }
                }
            }
        }
    }
    None
}

/// Counts the intersection of a curve's GF(q⁴) extension with g✶, with
/// multiplicity: the gcd of g's dual forms composed along the curve.
pub fn g_intersection(
    bose: &Bose,
    frame: &InfinityFrame,
    nrc: &Nrc,
) -> Vec<(ProjPoint, u32)> {
    let t = bose.t();
    let duals = frame.g.dual(t);
    let mut gcd: Option<BForm> = None;
    for r in 0..duals.rows {
        let f = nrc
            .param
            .extend(t, Level::Quad)
            .compose_functional(t, &duals.row_vec(r));
        if f.is_zero() {
            continue;
        }
        gcd = Some(match gcd {
            None => f,
            Some(g) => g.gcd(t, &f),
        });
    }
    let Some(form) = gcd else { return Vec::new() };
    if form.degree() == 0 {
        return Vec::new();
    }
    let ext = nrc.param.extend(t, Level::Quartic);
    form.roots(t, Level::Quartic)
        .into_iter()
        .map(|((s, tt), m)| (ext.eval(t, s, tt), m))
        .collect()
}

/// JSON mirror of a case record, per the documented schema.
#[derive(Serialize)]
pub struct CaseRecordJson {
    pub case: String,
    pub q: u64,
    pub subplane_frame: Vec<String>,
    pub conic_coeffs: Vec<String>,
    pub components: Vec<ComponentJson>,
    pub infinity: Vec<InfinityJson>,
    pub weight_sum: u32,
    pub checks: ChecksJson,
}

#[derive(Serialize)]
pub struct ComponentJson {
    pub kind: String,
    pub order: usize,
    pub multiplicity: u32,
}

#[derive(Serialize)]
pub struct InfinityJson {
    pub coords: Vec<String>,
    pub field_level: String,
    pub weight: u8,
    pub multiplicity: u32,
}

#[derive(Serialize)]
pub struct ChecksJson {
    pub cor_cplus_bb: bool,
    pub double_tag_agree: bool,
}

impl CaseRecord {
    pub fn to_json(&self, t: &FieldTower, fq: &FqConic) -> CaseRecordJson {
        let frame_coords: Vec<String> = fq
            .subplane
            .frame
            .iter()
            .flat_map(|p| p.coords().iter().map(|&c| t.render(c)).collect::<Vec<_>>())
            .collect();
        let conic_coeffs: Vec<String> =
            fq.base_form.coeffs.iter().map(|&c| t.render(c)).collect();
        let components = self
            .components
            .iter()
            .map(|c| match c {
                Component::SpreadLine { multiplicity, .. } => ComponentJson {
                    kind: "spread_line".into(),
                    order: 1,
                    multiplicity: *multiplicity,
                },
                Component::Curve { order } => {
                    ComponentJson { kind: "curve".into(), order: *order, multiplicity: 1 }
                }
            })
            .collect();
        let infinity = self
            .infinity
            .iter()
            .map(|w| InfinityJson {
                coords: w.point.coords().iter().map(|&c| t.render(c)).collect(),
                field_level: match w.point.level() {
                    Level::Base => "GF(q)".into(),
                    Level::Quad => "GF(q^2)".into(),
                    Level::Quartic => "GF(q^4)".into(),
                },
                weight: w.weight,
                multiplicity: w.multiplicity,
            })
            .collect();
        CaseRecordJson {
            case: self.case_tag.to_string(),
            q: self.q,
            subplane_frame: frame_coords,
            conic_coeffs,
            components,
            infinity,
            weight_sum: self.weight_sum,
            checks: ChecksJson {
                cor_cplus_bb: self.checks.cor_cplus_bb,
                double_tag_agree: self.checks.double_tag_agree,
            },
        }
    }
}

/// All conics of a subplane, one per non-degenerate frame equation up to
/// scalar, in canonical coefficient order.
pub fn enumerate_fq_conics<'a>(
    t: &'a FieldTower,
    subplane: &'a BaerSubplane,
) -> impl Iterator<Item = FqConic> + 'a {
    proj_points(t, Level::Base, 6).filter_map(move |coeffs| {
        let form = QuadForm::from_coeffs(Level::Base, 3, coeffs.coords().to_vec());
        FqConic::new(t, subplane, form).ok()
    })
}

/// First conic of the subplane whose ℓ∞ incidence matches the requested
/// case, in canonical enumeration order: a deterministic fixture.
pub fn fixture_for_case(
    bose: &Bose,
    frame: &InfinityFrame,
    tag: CaseTag,
) -> FqConic {
    let t = bose.t();
    let subplane = match tag {
        CaseTag::OneA | CaseTag::OneB | CaseTag::OneC => BaerSubplane::standard(t),
        CaseTag::TwoA | CaseTag::TwoB => BaerSubplane::standard_tangent(t),
    };
    let want = match tag {
        CaseTag::OneA => 2,
        CaseTag::OneB | CaseTag::TwoA => 1,
        CaseTag::OneC | CaseTag::TwoB => 0,
    };
    let found = enumerate_fq_conics(t, &subplane).find(|fq| {
        fq.points.iter().filter(|p| frame.ell_inf.contains_point(t, p)).count() == want
    });
    found.expect("every case has a fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bose::subplane_segre;
    use std::sync::Arc;

    fn setup(q: u64) -> (Bose, InfinityFrame) {
        let bose = Bose::build(Arc::new(FieldTower::default_for_q(q).unwrap()));
        let frame = InfinityFrame::new(&bose, None).unwrap();
        (bose, frame)
    }

    fn form3(t: &FieldTower, coeffs: [i64; 6]) -> QuadForm {
        QuadForm::from_coeffs(
            Level::Base,
            3,
            coeffs.iter().map(|&c| t.from_int(c, Level::Base)).collect(),
        )
    }

    #[test]
    fn weight_examples() {
        let (bose, frame) = setup(3);
        let t = bose.t();
        // a point of g has weight 1
        let g_pt = frame.g.basis_points()[0].clone();
        assert_eq!(weight(&bose, &frame, &g_pt).unwrap(), 1);
        // a rational point of Σ∞ has weight 2
        let real = frame.sigma_inf.points(t).next().unwrap();
        assert_eq!(weight(&bose, &frame, &real).unwrap(), 2);
        // off Σ∞: error
        let off = ProjPoint::from_ints(t, Level::Base, &[0, 0, 0, 0, 1, 1]);
        assert!(weight(&bose, &frame, &off).is_err());
    }

    #[test]
    fn classify_standard_fixtures_q3() {
        let (bose, frame) = setup(3);
        let t = bose.t();
        let b = BaerSubplane::standard(t);
        let segre = subplane_segre(&bose, &b);
        // x² − y² − z² meets z = 0 in (1,±1,0): case 1a
        let fq = FqConic::new(t, &b, form3(t, [1, 0, 0, -1, 0, -1])).unwrap();
        let rec = classify_fq_conic(&bose, &frame, &fq, &segre.quadrics).unwrap();
        assert_eq!(rec.case_tag, CaseTag::OneA);
        assert_eq!(rec.weight_sum, 4);
        assert!(rec.checks.cor_cplus_bb);
        // y² − zx is tangent to z = 0 at (1,0,0): case 1b
        let fq = FqConic::new(t, &b, form3(t, [0, 0, -1, 1, 0, 0])).unwrap();
        let rec = classify_fq_conic(&bose, &frame, &fq, &segre.quadrics).unwrap();
        assert_eq!(rec.case_tag, CaseTag::OneB);
        assert_eq!(rec.line_components[0].1, 2);
        // x² + y² − z² misses z = 0: case 1c
        let fq = FqConic::new(t, &b, form3(t, [1, 0, 0, 1, 0, -1])).unwrap();
        let rec = classify_fq_conic(&bose, &frame, &fq, &segre.quadrics).unwrap();
        assert_eq!(rec.case_tag, CaseTag::OneC);
        assert_eq!(rec.residual.order, 2);
    }

    #[test]
    fn classify_tangent_fixtures_q3() {
        let (bose, frame) = setup(3);
        let t = bose.t();
        let b = BaerSubplane::standard_tangent(t);
        let segre = subplane_segre(&bose, &b);
        // T = B ∩ ℓ∞ is the image of (0,1,0); x² − yz contains it: case 2a
        let fq = FqConic::new(t, &b, form3(t, [1, 0, 0, 0, -1, 0])).unwrap();
        let rec = classify_fq_conic(&bose, &frame, &fq, &segre.quadrics).unwrap();
        assert_eq!(rec.case_tag, CaseTag::TwoA);
        assert_eq!(rec.residual.order, 3);
        assert_eq!(rec.weight_sum, 4);
        // y² − zx avoids (0,1,0): case 2b
        let fq = FqConic::new(t, &b, form3(t, [0, 0, -1, 1, 0, 0])).unwrap();
        let rec = classify_fq_conic(&bose, &frame, &fq, &segre.quadrics).unwrap();
        assert_eq!(rec.case_tag, CaseTag::TwoB);
        assert_eq!(rec.residual.order, 4);
        assert!(rec.infinity.iter().all(|w| w.weight == 1));
    }

    #[test]
    fn reverse_round_trip_on_fixtures() {
        let (bose, frame) = setup(3);
        for tag in [CaseTag::OneA, CaseTag::OneB, CaseTag::OneC, CaseTag::TwoA, CaseTag::TwoB] {
            let fq = fixture_for_case(&bose, &frame, tag);
            let segre = subplane_segre(&bose, &fq.subplane);
            let rec = classify_fq_conic(&bose, &frame, &fq, &segre.quadrics).unwrap();
            assert_eq!(rec.case_tag, tag);
            let back = reverse_check(&bose, &frame, &rec.residual).unwrap();
            let orig: HashSet<&ProjPoint> = fq.points.iter().collect();
            assert!(back.points.iter().all(|p| orig.contains(p)), "case {tag}");
            assert_eq!(back.subplane.key(), fq.subplane.key(), "case {tag}");
        }
    }

    #[test]
    fn reverse_rejects_line_plane_conic() {
        let (bose, frame) = setup(3);
        let t = bose.t();
        // a conic inside a plane spanned by a spread line of S and an affine
        // point: even if its weights sum to 4, it slices a line of PG(2,q²)
        let li = frame.spread_at_inf[0];
        let line = &bose.lines[li].line;
        let affine = frame
            .pi_g
            .points(t)
            .find(|p| !frame.sigma_inf.contains_point(t, p))
            .unwrap();
        let plane = line.join(t, &Subspace::span(t, &[affine.clone()]));
        assert_eq!(plane.dim(), 2);
        // the moment conic in the plane's internal coordinates
        let internal_conic = crate::varieties::Conic::new(
            t,
            {
                let mut f = QuadForm::zero(t, Level::Base, 3);
                f.set_coeff(1, 1, t.one(Level::Base));
                f.set_coeff(0, 2, t.neg(t.one(Level::Base)));
                f
            },
        )
        .unwrap();
        let param_internal = internal_conic.parametrize(t);
        let basis_t = plane.basis().transpose(t);
        let cols: Vec<Vec<Fel>> =
            param_internal.cols.iter().map(|c| basis_t.mul_vec(t, c)).collect();
        let param = CurveParam { level: Level::Base, ambient: 6, cols };
        let nrc = Nrc::from_param(t, param);
        let err = reverse_check(&bose, &frame, &nrc).unwrap_err();
        match err {
            ClassifyError::Rejected(msg) => {
                assert!(
                    msg.contains("spread line") || msg.contains("not 2-special"),
                    "unexpected rejection: {msg}"
                );
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn g_intersection_counts() {
        let (bose, frame) = setup(3);
        let fq = fixture_for_case(&bose, &frame, CaseTag::TwoA);
        let segre2 = subplane_segre(&bose, &fq.subplane);
        let rec = classify_fq_conic(&bose, &frame, &fq, &segre2.quadrics).unwrap();
        // order-3 residual meets g in one point
        let hits = g_intersection(&bose, &frame, &rec.residual);
        let distinct: HashSet<ProjPoint> = hits.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(distinct.len(), 1);
        // order-4 residual meets g (possibly extended) in two points
        let fq = fixture_for_case(&bose, &frame, CaseTag::TwoB);
        let rec = classify_fq_conic(&bose, &frame, &fq, &segre2.quadrics).unwrap();
        let hits = g_intersection(&bose, &frame, &rec.residual);
        let mass: u32 = hits.iter().map(|(_, m)| m).sum();
        assert_eq!(mass, 2);
    }
}
