//! Batch verification suites over the whole structure, with deterministic
//! JSON reports: each suite re-derives a family of structural claims by
//! construction plus brute-force enumeration at desk scale.

use std::collections::HashSet;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bose::{
    gamma6, regulus_through, subline_regulus, subline_scroll_lines, subplane_segre,
    BaerSubline, BaerSubplane, Bose,
};
use crate::bruck_bose::{bb_incidence_check, InfinityFrame};
use crate::classify::{
    classify_fq_conic, enumerate_fq_conics, fixture_for_case, g_intersection,
    is_two_special, reverse_check, CaseTag,
};
use crate::field::{Fel, FieldTower, Level};
use crate::forms::QuadForm;
use crate::linalg::Mat;
use crate::projective::{point_count, proj_points, ProjPoint, Subspace};
use crate::varieties::{
    conic_bose_quadrics, extended_cone_structure, fq_conic_quadrics_with, scroll_build,
    scroll_order_check, Conic, CurveParam, FqConic, Nrc,
};

#[derive(Error, Debug)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("suite `{suite}` does not support q={q} (supported: {supported}); pass --max-q-override to force")]
    UnsupportedQ { suite: String, q: u64, supported: String },
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum SuiteName {
    Fields,
    Spread,
    Sublines,
    Subplanes,
    ConicBose,
    FqConic,
    Classify,
    Scroll,
    Unify,
}

impl SuiteName {
    pub const ALL: [SuiteName; 9] = [
        SuiteName::Fields,
        SuiteName::Spread,
        SuiteName::Sublines,
        SuiteName::Subplanes,
        SuiteName::ConicBose,
        SuiteName::FqConic,
        SuiteName::Classify,
        SuiteName::Scroll,
        SuiteName::Unify,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Fields => "fields",
            SuiteName::Spread => "spread",
            SuiteName::Sublines => "sublines",
            SuiteName::Subplanes => "subplanes",
            SuiteName::ConicBose => "conic_bose",
            SuiteName::FqConic => "fqconic",
            SuiteName::Classify => "classify",
            SuiteName::Scroll => "scroll",
            SuiteName::Unify => "unify",
        }
    }

    /// The q values a suite runs at without an override.
    pub fn supported_q(&self) -> &'static [u64] {
        match self {
            SuiteName::Fields => &[2, 3, 4, 5, 7],
            SuiteName::Spread => &[2, 3, 4, 5],
            SuiteName::Sublines => &[2, 3],
            SuiteName::Subplanes => &[2, 3],
            SuiteName::ConicBose => &[2, 3, 5],
            SuiteName::FqConic => &[2, 3],
            // classification runs for odd q: characteristic-2 conic pencils
            // behave differently at infinity
            SuiteName::Classify => &[3, 5],
            SuiteName::Scroll => &[3, 5],
            SuiteName::Unify => &[2, 3],
        }
    }
}

impl FromStr for SuiteName {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<SuiteName, SuiteError> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| SuiteError::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub q: u64,
    pub seed: u64,
    pub field_spec: Option<String>,
    pub max_q_override: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { q: 3, seed: 0xB05E, field_spec: None, max_q_override: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub q: u64,
    pub field_spec: String,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<CheckRecord>,
    pub wall_ms: u128,
}

impl SuiteReport {
    fn new(suite: &str, q: u64, field_spec: String, seed: u64) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            q,
            field_spec,
            seed,
            passed: 0,
            failed: 0,
            skipped: 0,
            checks: Vec::new(),
            wall_ms: 0,
        }
    }

    fn push(&mut self, name: &str, outcome: Result<String, String>) {
        match outcome {
            Ok(detail) => {
                self.passed += 1;
                self.checks.push(CheckRecord { name: name.into(), ok: true, detail });
            }
            Err(detail) => {
                self.failed += 1;
                self.checks.push(CheckRecord { name: name.into(), ok: false, detail });
            }
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "suite {} (q={}): {} passed, {} failed, {} skipped in {} ms",
            self.suite, self.q, self.passed, self.failed, self.skipped, self.wall_ms
        )
    }
}

fn ok_if(cond: bool, detail: impl Into<String>) -> Result<String, String> {
    let d = detail.into();
    if cond {
        Ok(d)
    } else {
        Err(d)
    }
}

/// Builds the tower for a config (field spec wins over the default for q).
pub fn tower_for(cfg: &SuiteConfig) -> Result<FieldTower, SuiteError> {
    match &cfg.field_spec {
        Some(spec) => Ok(FieldTower::from_spec(spec)?),
        None => Ok(FieldTower::default_for_q(cfg.q)?),
    }
}

/// Runs one named suite and collects its report.
pub fn run_suite(name: SuiteName, cfg: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    if !name.supported_q().contains(&cfg.q) && !cfg.max_q_override {
        return Err(SuiteError::UnsupportedQ {
            suite: name.as_str().into(),
            q: cfg.q,
            supported: name
                .supported_q()
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(","),
        });
    }
    let start = Instant::now();
    let tower = Arc::new(tower_for(cfg)?);
    let mut report =
        SuiteReport::new(name.as_str(), tower.q(), tower.spec_string(), cfg.seed);
    match name {
        SuiteName::Fields => fields_suite(&tower, &mut report),
        SuiteName::Spread => {
            let bose = Bose::build(tower);
            spread_suite(&bose, cfg.seed, &mut report);
        }
        SuiteName::Sublines => {
            let bose = Bose::build(tower);
            sublines_suite(&bose, &mut report);
        }
        SuiteName::Subplanes => {
            let bose = Bose::build(tower);
            subplanes_suite(&bose, cfg.seed, &mut report);
        }
        SuiteName::ConicBose => {
            let bose = Bose::build(tower);
            conic_bose_suite(&bose, cfg.seed, &mut report);
        }
        SuiteName::FqConic => {
            let bose = Bose::build(tower);
            fqconic_suite(&bose, &mut report);
        }
        SuiteName::Classify => {
            let bose = Bose::build(tower);
            classify_suite(&bose, &mut report);
        }
        SuiteName::Scroll => {
            scroll_suite(&tower, cfg.seed, &mut report);
        }
        SuiteName::Unify => {
            let bose = Bose::build(tower);
            unify_suite(&bose, cfg.seed, &mut report);
        }
    }
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}

// ---------------------------------------------------------------------------
// fields
// ---------------------------------------------------------------------------

fn fields_suite(t: &FieldTower, report: &mut SuiteReport) {
    let q = t.q();
    let tau = t.tau();
    let tq = t.frob_q(tau);
    report.push(
        "fields.defining_identities",
        ok_if(
            t.add(tau, tq) == t.embed(t.t1(), Level::Quad)
                && t.mul(tau, tq) == t.neg(t.embed(t.t0(), Level::Quad))
                && t.order(tau) == q * q - 1,
            format!("τ+τ^q = t1, τ·τ^q = −t0, ord(τ) = {}", q * q - 1),
        ),
    );

    let mut axiom_fails = 0usize;
    let base: Vec<Fel> = t.elements(Level::Base).collect();
    for &a in &base {
        for &b in &base {
            if t.add(a, b) != t.add(b, a) || t.mul(a, b) != t.mul(b, a) {
                axiom_fails += 1;
            }
            for &c in &base {
                if t.add(t.add(a, b), c) != t.add(a, t.add(b, c))
                    || t.mul(t.mul(a, b), c) != t.mul(a, t.mul(b, c))
                    || t.mul(a, t.add(b, c)) != t.add(t.mul(a, b), t.mul(a, c))
                {
                    axiom_fails += 1;
                }
            }
        }
    }
    report.push(
        "fields.axioms_base_exhaustive",
        ok_if(axiom_fails == 0, format!("{} triples checked over GF({q})", q * q * q)),
    );

    let mut frob_fails = 0usize;
    let quad: Vec<Fel> = t.elements(Level::Quad).collect();
    for &a in &quad {
        for &b in &quad {
            if t.frob_q(t.add(a, b)) != t.add(t.frob_q(a), t.frob_q(b))
                || t.frob_q(t.mul(a, b)) != t.mul(t.frob_q(a), t.frob_q(b))
            {
                frob_fails += 1;
            }
        }
        if t.frob_q(t.frob_q(a)) != a {
            frob_fails += 1;
        }
    }
    let fixed = quad.iter().filter(|&&a| t.frob_q(a) == a).count() as u64;
    report.push(
        "fields.frobenius",
        ok_if(
            frob_fails == 0 && fixed == q,
            format!("homomorphism over GF({}), fixed field has {q} elements", q * q),
        ),
    );

    let mut rep_fails = 0usize;
    for &a in &quad {
        let (x0, x1) = t.split(a);
        if t.join(x0, x1, Level::Quad) != a {
            rep_fails += 1;
        }
    }
    report.push(
        "fields.unique_representation",
        ok_if(rep_fails == 0, "x₀ + x₁τ round-trips for every GF(q²) element"),
    );

    let one = t.one(Level::Quad);
    let zero = t.zero(Level::Quad);
    let r1 = t.solve_quadratic(one, zero, t.neg(one));
    let r2 = t.solve_quadratic(one, zero, t.neg(tau));
    let r3 = t.solve_quadratic(one, t.from_int(-2, Level::Quad), one);
    let quad_ok = match (&r1, &r2, &r3) {
        (Ok(a), Ok(b), Ok(c)) => {
            let squares_ok = b
                .iter()
                .all(|(r, _)| t.mul(*r, *r) == t.embed(tau, Level::Quartic));
            let mass =
                |v: &Vec<(Fel, u32)>| v.iter().map(|(_, m)| *m).sum::<u32>();
            mass(a) == 2 && mass(b) == 2 && mass(c) == 2 && squares_ok
        }
        _ => false,
    };
    report.push(
        "fields.solve_quadratic",
        ok_if(quad_ok, "x²−1, x²−τ, (x−1)² split over GF(q⁴) with the right masses"),
    );

    let quartic_count = t.size(Level::Quartic);
    let fixed_q2 = t
        .elements(Level::Quartic)
        .filter(|&a| t.frob_q2(a) == a)
        .count() as u64;
    report.push(
        "fields.tower_shape",
        ok_if(
            quartic_count == q * q * q * q && fixed_q2 == q * q,
            format!("GF(q⁴) has {quartic_count} elements; x↦x^q² fixes exactly GF(q²)"),
        ),
    );
}

// ---------------------------------------------------------------------------
// spread
// ---------------------------------------------------------------------------

fn spread_suite(bose: &Bose, seed: u64, report: &mut SuiteReport) {
    let t = bose.t();
    let q = bose.q();
    let expect_lines = q * q * q * q + q * q + 1;
    report.push(
        "spread.count",
        ok_if(
            bose.lines.len() as u64 == expect_lines,
            format!("{} spread lines", bose.lines.len()),
        ),
    );

    let mut cover: HashSet<ProjPoint> = HashSet::new();
    let mut overlap = false;
    for sl in &bose.lines {
        for p in sl.line.points(t) {
            if !cover.insert(p) {
                overlap = true;
            }
        }
    }
    report.push(
        "spread.partition",
        ok_if(
            !overlap && cover.len() as u64 == expect_lines * (q + 1),
            format!("{} points covered exactly once", cover.len()),
        ),
    );

    // Γ-meeting: exhaustive for q ≤ 3, sampled beyond
    let sample: Vec<&crate::bose::SpreadLine> = if q <= 3 {
        bose.lines.iter().collect()
    } else {
        bose.lines.iter().step_by(bose.lines.len() / 200 + 1).collect()
    };
    let mut gamma_hits: HashSet<ProjPoint> = HashSet::new();
    let mut gamma_fail = false;
    for sl in &sample {
        let meet = sl.line.extend(t, Level::Quad).meet(t, bose.gamma());
        if meet.dim() != 0 || meet.basis_points()[0] != sl.gamma_point {
            gamma_fail = true;
        }
        gamma_hits.insert(sl.gamma_point.clone());
    }
    report.push(
        "spread.transversal_meets",
        ok_if(
            !gamma_fail && gamma_hits.len() == sample.len(),
            format!("{} line extensions meet Γ once, all in distinct points", sample.len()),
        ),
    );

    // regularity: sampled collinear name-triples generate reguli inside 𝕊
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reg_fail = 0usize;
    let trials = 10;
    for _ in 0..trials {
        let i = rng.gen_range(0..bose.lines.len());
        let j = rng.gen_range(0..bose.lines.len());
        if i == j {
            continue;
        }
        let (n1, n2) = (&bose.lines[i].name, &bose.lines[j].name);
        if n1 == n2 {
            continue;
        }
        let carrier = Subspace::span(t, &[n1.clone(), n2.clone()]);
        let third = carrier
            .points(t)
            .find(|p| p != n1 && p != n2)
            .expect("a line has more than two points");
        let l3 = &bose.lines[bose.line_by_name(&third)].line;
        match regulus_through(t, &bose.lines[i].line, &bose.lines[j].line, l3) {
            Some(reg) => {
                for rl in &reg {
                    if !bose.lines.iter().any(|sl| &sl.line == rl) {
                        reg_fail += 1;
                    }
                }
            }
            None => reg_fail += 1,
        }
    }
    report.push(
        "spread.regularity",
        ok_if(reg_fail == 0, format!("{trials} sampled reguli lie inside the spread")),
    );

    // the frame, its sliced spread, and the incidence axioms
    let frame = InfinityFrame::new(bose, None).expect("default frame");
    let s_ok = frame.spread_at_inf.len() as u64 == q * q + 1
        && frame
            .spread_at_inf
            .iter()
            .all(|&li| frame.sigma_inf.contains(t, &bose.lines[li].line));
    let contained: Vec<usize> = (0..bose.lines.len())
        .filter(|&li| frame.sigma_inf.contains(t, &bose.lines[li].line))
        .collect();
    report.push(
        "spread.sliced_spread",
        ok_if(
            s_ok && contained == frame.spread_at_inf,
            format!("S = 𝕊 ∩ Σ∞ holds set-wise with {} lines", frame.spread_at_inf.len()),
        ),
    );
    let max_pairs = if q == 2 { usize::MAX } else { 500 };
    let bb = bb_incidence_check(bose, &frame, seed, max_pairs);
    report.push(
        "spread.bb_incidence",
        ok_if(
            bb.failures.is_empty(),
            format!(
                "{} points, {} lines, {} pairs joined uniquely",
                bb.points, bb.lines, bb.pairs_checked
            ),
        ),
    );

    // T-line uniqueness, exhaustive at q = 2 by line-coverage counting
    if q == 2 {
        report.push("spread.tline_uniqueness", tline_uniqueness_exhaustive(bose));
        report.push("spread.dual_spread", dual_spread_exhaustive(bose));
    } else {
        report.skipped += 2;
    }

    // 3-spaces of two distinct plane lines share one spread line
    let ell1 = Subspace::span(
        t,
        &[
            ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0]),
            ProjPoint::from_ints(t, Level::Quad, &[0, 1, 0]),
        ],
    );
    let ell2 = Subspace::span(
        t,
        &[
            ProjPoint::from_ints(t, Level::Quad, &[1, 0, 0]),
            ProjPoint::from_ints(t, Level::Quad, &[0, 0, 1]),
        ],
    );
    let s1 = bose.three_space(&ell1);
    let s2 = bose.three_space(&ell2);
    let m = s1.meet(t, &s2);
    report.push(
        "spread.three_space_meet",
        ok_if(
            m.dim() == 1 && bose.lines.iter().any(|sl| sl.line == m),
            "two plane lines give 3-spaces meeting in one spread line",
        ),
    );
}

/// Every point of PG(5,q²) off Γ ∪ Γ^q lies on exactly one T-line: counted
/// by sweeping all |Γ|² candidate lines and tallying their off-plane points.
pub fn tline_uniqueness_exhaustive(bose: &Bose) -> Result<String, String> {
    let t = bose.t();
    let q = bose.q();
    let gamma_pts: Vec<ProjPoint> = bose.gamma().points(t).collect();
    let mut covered: std::collections::HashMap<ProjPoint, usize> =
        std::collections::HashMap::new();
    for x in &gamma_pts {
        for y in &gamma_pts {
            let yq = y.frob_q(t);
            let line = Subspace::span(t, &[x.clone(), yq.clone()]);
            if line.dim() != 1 {
                return Err("degenerate T-line candidate".into());
            }
            for p in line.points(t) {
                if p == *x || p == yq {
                    continue;
                }
                if bose.on_transversal(&p) {
                    return Err("T-line re-enters a transversal plane".into());
                }
                *covered.entry(p).or_insert(0) += 1;
            }
        }
    }
    let total = point_count(q * q, 5);
    let off = total - 2 * point_count(q * q, 2);
    if covered.len() as u64 != off {
        return Err(format!("covered {} points, expected {off}", covered.len()));
    }
    if let Some((p, n)) = covered.iter().find(|(_, &n)| n != 1) {
        return Err(format!("point {p:?} lies on {n} T-lines"));
    }
    Ok(format!("all {off} off-transversal points lie on exactly one T-line"))
}

/// The 3-spaces of plane lines form a dual spread: each 4-space holds one.
pub fn dual_spread_exhaustive(bose: &Bose) -> Result<String, String> {
    let t = bose.t();
    let mut family: Vec<Subspace> = Vec::new();
    let mut seen_lines: HashSet<Subspace> = HashSet::new();
    for a in proj_points(t, Level::Quad, 3) {
        for b in proj_points(t, Level::Quad, 3) {
            if b == a {
                continue;
            }
            let line = Subspace::span(t, &[a.clone(), b.clone()]);
            if line.dim() == 1 && seen_lines.insert(line.clone()) {
                family.push(bose.three_space(&line));
            }
        }
    }
    family.sort_by(|x, y| format!("{x:?}").cmp(&format!("{y:?}")));
    family.dedup();
    let expect = bose.lines.len();
    if family.len() != expect {
        return Err(format!("{} distinct 3-spaces, expected {expect}", family.len()));
    }
    for dual_pt in proj_points(t, Level::Base, 6) {
        let duals = Mat::from_rows(Level::Base, 6, vec![dual_pt.coords().to_vec()]);
        let ns = duals.nullspace(t);
        let hyp = Subspace::from_rows(
            t,
            Level::Base,
            6,
            (0..ns.rows).map(|r| ns.row_vec(r)).collect(),
        );
        let inside = family.iter().filter(|s| hyp.contains(t, s)).count();
        if inside != 1 {
            return Err(format!("a 4-space holds {inside} members of the family"));
        }
    }
    Ok(format!("{expect} 3-spaces form a dual spread over all 4-spaces"))
}

// ---------------------------------------------------------------------------
// sublines
// ---------------------------------------------------------------------------

/// Distinct Baer sublines from 3-point generation: all q+1 through a fixed
/// pair on z = 0, then sweeps over a few more lines until `minimum` are
/// collected.
pub fn generate_sublines(bose: &Bose, minimum: usize) -> Vec<BaerSubline> {
    let t = bose.t();
    let mut out: Vec<BaerSubline> = Vec::new();
    let mut keys: HashSet<Vec<ProjPoint>> = HashSet::new();
    let mut push = |b: BaerSubline, out: &mut Vec<BaerSubline>| {
        if keys.insert(b.key()) {
            out.push(b);
        }
    };
    let lines = [
        [[1i64, 0, 0], [0, 1, 0]],
        [[0, 1, 0], [0, 0, 1]],
        [[1, 0, 0], [0, 0, 1]],
        [[1, 1, 0], [0, 0, 1]],
        [[1, 0, 1], [0, 1, 0]],
        [[1, 2, 0], [0, 1, 1]],
    ];
    for [u, v] in lines {
        let pu = ProjPoint::from_ints(t, Level::Quad, &u);
        let pv = ProjPoint::from_ints(t, Level::Quad, &v);
        let carrier = Subspace::span(t, &[pu, pv]);
        if carrier.dim() != 1 {
            continue;
        }
        let pts: Vec<ProjPoint> = carrier.points(t).collect();
        // all sublines through the first two points, then through other triples
        for k in 2..pts.len() {
            if let Ok(b) = BaerSubline::through(t, &pts[0], &pts[1], &pts[k]) {
                push(b, &mut out);
            }
        }
        'outer: for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for k in j + 1..pts.len() {
                    if out.len() >= minimum {
                        break 'outer;
                    }
                    if let Ok(b) = BaerSubline::through(t, &pts[i], &pts[j], &pts[k]) {
                        push(b, &mut out);
                    }
                }
            }
        }
        if out.len() >= minimum {
            break;
        }
    }
    out
}

fn sublines_suite(bose: &Bose, report: &mut SuiteReport) {
    let t = bose.t();
    let q = bose.q();
    let sublines = generate_sublines(bose, 50);
    report.push(
        "subline.generation",
        ok_if(
            sublines.len() >= 50 || q == 2,
            format!("{} distinct Baer sublines generated", sublines.len()),
        ),
    );

    let mut regulus_fail: Option<String> = None;
    let mut checked = 0usize;
    for b in &sublines {
        if let Err(e) = check_subline_regulus(bose, b) {
            regulus_fail = Some(e);
            break;
        }
        checked += 1;
    }
    report.push(
        "subline.regulus",
        match regulus_fail {
            None => Ok(format!(
                "{checked} sublines: regulus on a hyperbolic quadric of {} points, extended ruling covers the extension",
                (q + 1) * (q + 1)
            )),
            Some(e) => Err(e),
        },
    );

    // four-point pattern: X, X^{c_b} ∈ Γ and X^q, (X^{c_b})^q ∈ Γ^q
    let b = &sublines[0];
    let mut pattern_ok = true;
    for x in b.carrier.points(t) {
        let xc = b.conj(t, &x);
        let g_x = gamma6(t, &x);
        let g_xc = gamma6(t, &xc);
        if !bose.gamma().contains_point(t, &g_x)
            || !bose.gamma().contains_point(t, &g_xc)
            || !bose.gamma_q().contains_point(t, &g_x.frob_q(t))
            || !bose.gamma_q().contains_point(t, &g_xc.frob_q(t))
        {
            pattern_ok = false;
        }
    }
    report.push(
        "subline.four_point_pattern",
        ok_if(pattern_ok, "conjugate pairs land on the right transversal planes"),
    );
}

/// The full regulus/quadric/extension verification of a single subline.
pub fn check_subline_regulus(bose: &Bose, b: &BaerSubline) -> Result<(), String> {
    let t = bose.t();
    let q = bose.q();
    let reg = subline_regulus(bose, b).map_err(|e| format!("regulus data: {e}"))?;
    // pairwise disjoint lines
    for (ai, &i) in reg.line_indices.iter().enumerate() {
        for &j in reg.line_indices.iter().skip(ai + 1) {
            if bose.lines[i].line.meet(t, &bose.lines[j].line).dim() != -1 {
                return Err("regulus lines intersect".into());
            }
        }
    }
    // quadric point count over Σ_b
    let mut on = 0u64;
    for p in reg.sigma.points(t) {
        let internal = reg.internal(t, &p).ok_or("internal coordinates failed")?;
        if reg.quadric.eval(t, &internal).is_zero() {
            on += 1;
        }
    }
    if on != (q + 1) * (q + 1) {
        return Err(format!("quadric has {on} points, expected (q+1)²"));
    }
    // regulus points lie on the quadric
    for &i in &reg.line_indices {
        for p in bose.lines[i].line.points(t) {
            let internal = reg.internal(t, &p).ok_or("regulus point outside Σ_b")?;
            if !reg.quadric.eval(t, &internal).is_zero() {
                return Err("a regulus point misses the quadric".into());
            }
        }
    }
    // extension: the scroll lines X(X^{c_b})^q rule the extended quadric
    let scrolls = subline_scroll_lines(bose, b);
    if scrolls.len() as u64 != q * q + 1 {
        return Err("wrong number of scroll lines".into());
    }
    let ext_quadric = reg.quadric.extend(t, Level::Quad);
    let mut union: HashSet<ProjPoint> = HashSet::new();
    for (x, line) in &scrolls {
        let rational = b.contains(t, x);
        for p in line.points(t) {
            let internal = reg
                .internal(t, &p)
                .ok_or("scroll line leaves the extension of Σ_b")?;
            if !ext_quadric.eval(t, &internal).is_zero() {
                return Err("a scroll-line point misses the extended quadric".into());
            }
            if !rational && p.try_section(t, Level::Base).is_some() {
                return Err("a scroll line off the subline meets PG(5,q)".into());
            }
            union.insert(p);
        }
    }
    // the union covers the whole extended quadric
    let mut ext_on = 0u64;
    let sigma_ext = reg.sigma.extend(t, Level::Quad);
    for p in sigma_ext.points(t) {
        let internal = reg.internal(t, &p).ok_or("internal coordinates failed")?;
        if ext_quadric.eval(t, &internal).is_zero() {
            ext_on += 1;
            if !union.contains(&p) {
                return Err("an extended quadric point is on no scroll line".into());
            }
        }
    }
    if ext_on != (q * q + 1) * (q * q + 1) {
        return Err(format!("extended quadric has {ext_on} points"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// subplanes
// ---------------------------------------------------------------------------

fn subplanes_suite(bose: &Bose, seed: u64, report: &mut SuiteReport) {
    let t = bose.t();
    let q = bose.q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planes = vec![BaerSubplane::standard(t), BaerSubplane::standard_tangent(t)];
    // one random-frame subplane
    let quad_size = t.size(Level::Quad) as u32;
    loop {
        let mut pts = Vec::new();
        for _ in 0..4 {
            let coords: Vec<Fel> =
                (0..3).map(|_| t.el(Level::Quad, rng.gen_range(0..quad_size))).collect();
            match ProjPoint::new(t, coords) {
                Some(p) => pts.push(p),
                None => break,
            }
        }
        if pts.len() < 4 {
            continue;
        }
        if let Ok(b) = BaerSubplane::from_frame(t, [
            pts[0].clone(),
            pts[1].clone(),
            pts[2].clone(),
            pts[3].clone(),
        ]) {
            planes.push(b);
            break;
        }
    }

    for (k, b) in planes.iter().enumerate() {
        let segre = subplane_segre(bose, b);
        let expect = (q + 1) * (q * q + q + 1);
        let pset: HashSet<&ProjPoint> = segre.points.iter().collect();
        let mut zero_count = 0u64;
        let mut covered = true;
        for p in proj_points(t, Level::Base, 6) {
            if segre.quadrics.iter().all(|f| f.vanishes_at(t, &p)) {
                zero_count += 1;
                if !pset.contains(&p) {
                    covered = false;
                }
            }
        }
        report.push(
            &format!("subplane.segre_zero_set_{k}"),
            ok_if(
                covered && zero_count == expect && pset.len() as u64 == expect,
                format!("three quadrics cut exactly the {expect} Segre points"),
            ),
        );
        let plane_ok = segre.planes.len() as u64 == q + 1
            && segre.planes.iter().all(|plane| {
                segre
                    .line_indices
                    .iter()
                    .take(4)
                    .all(|&li| plane.meet(t, &bose.lines[li].line).dim() == 0)
            });
        report.push(
            &format!("subplane.segre_systems_{k}"),
            ok_if(plane_ok, format!("{} ruling planes each meet the line system", q + 1)),
        );
    }

    // quadric space dimension is exactly 3 at q = 3
    if q == 3 {
        let segre = subplane_segre(bose, &planes[0]);
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
        let dim = Mat::from_rows(Level::Base, 21, rows).nullspace(t).rows;
        report.push(
            "subplane.quadric_space_dim",
            ok_if(dim == 3, format!("space of quadrics through the points has dim {dim}")),
        );
    }

    // conjugation is an involution fixing exactly the subplane
    let b = &planes[2];
    let fixed = proj_points(t, Level::Quad, 3)
        .filter(|p| b.conj(t, p) == *p)
        .count() as u64;
    let involution = proj_points(t, Level::Quad, 3).all(|p| b.conj(t, &b.conj(t, &p)) == p);
    report.push(
        "subplane.conjugation",
        ok_if(
            involution && fixed == q * q + q + 1,
            format!("c_π is an involution fixing {fixed} points"),
        ),
    );

    // extension: scroll lines X(X^{c_π})^q rule the extended Segre variety
    if q == 3 {
        report.push("subplane.extension_ruling", segre_extension_ruling(bose, &planes[0]));
    } else {
        report.skipped += 1;
    }
}

/// The extended Segre zero set equals the union of the q⁴+q²+1 scroll lines
/// X(X^{c_π})^q over X ∈ Γ (named through the plane correspondence).
pub fn segre_extension_ruling(bose: &Bose, b: &BaerSubplane) -> Result<String, String> {
    let t = bose.t();
    let q = bose.q();
    let segre = subplane_segre(bose, b);
    let ext: Vec<QuadForm> =
        segre.quadrics.iter().map(|f| f.extend(t, Level::Quad)).collect();
    let mut union: HashSet<ProjPoint> = HashSet::new();
    for x in proj_points(t, Level::Quad, 3) {
        let xc = b.conj(t, &x);
        let line = Subspace::span(t, &[gamma6(t, &x), gamma6(t, &xc).frob_q(t)]);
        if line.dim() != 1 {
            return Err("a scroll line degenerated".into());
        }
        for p in line.points(t) {
            if !ext.iter().all(|f| f.vanishes_at(t, &p)) {
                return Err("a scroll-line point misses the extended Segre quadrics".into());
            }
            union.insert(p);
        }
    }
    let mut zero_count = 0u64;
    for p in proj_points(t, Level::Quad, 6) {
        if ext.iter().all(|f| f.vanishes_at(t, &p)) {
            zero_count += 1;
            if !union.contains(&p) {
                return Err("an extended Segre point lies on no scroll line".into());
            }
        }
    }
    let expect = (q * q + 1) * (q * q * q * q + q * q + 1);
    if zero_count != expect {
        return Err(format!("extended zero set has {zero_count} points, expected {expect}"));
    }
    Ok(format!("{expect} extension points all ruled by scroll lines"))
}

// ---------------------------------------------------------------------------
// conic_bose
// ---------------------------------------------------------------------------

fn moment_conic_form(t: &FieldTower, level: Level) -> QuadForm {
    let mut f = QuadForm::zero(t, level, 3);
    f.set_coeff(1, 1, t.one(level));
    f.set_coeff(0, 2, t.neg(t.one(level)));
    f
}

fn conic_bose_suite(bose: &Bose, seed: u64, report: &mut SuiteReport) {
    let t = bose.t();
    let q = bose.q();
    let conic = Conic::new(t, moment_conic_form(t, Level::Quad)).unwrap();
    let (f1, f2) = conic_bose_quadrics(t, &conic.form);

    // the expected coefficient patterns of the two split forms
    let mut e1 = QuadForm::zero(t, Level::Base, 6);
    e1.set_coeff(2, 2, t.one(Level::Base));
    e1.set_coeff(3, 3, t.t0());
    e1.set_coeff(0, 4, t.neg(t.one(Level::Base)));
    e1.set_coeff(1, 5, t.neg(t.t0()));
    let mut e2 = QuadForm::zero(t, Level::Base, 6);
    e2.set_coeff(3, 3, t.t1());
    e2.set_coeff(2, 3, t.from_int(2, Level::Base));
    e2.set_coeff(0, 5, t.neg(t.one(Level::Base)));
    e2.set_coeff(1, 4, t.neg(t.one(Level::Base)));
    e2.set_coeff(1, 5, t.neg(t.t1()));
    report.push(
        "conic_pair.split_forms",
        ok_if(f1 == e1 && f2 == e2, "f₁, f₂ match the coordinate expansion of y² − zx"),
    );

    // zero set = union of the conic's spread lines
    let mut union: HashSet<ProjPoint> = HashSet::new();
    for x in &conic.points {
        union.extend(bose.lines[bose.line_by_name(x)].line.points(t));
    }
    let mut zero = 0u64;
    let mut exact = true;
    for p in proj_points(t, Level::Base, 6) {
        let on = f1.vanishes_at(t, &p) && f2.vanishes_at(t, &p);
        if on != union.contains(&p) {
            exact = false;
        }
        if on {
            zero += 1;
        }
    }
    let expect = (q * q + 1) * (q + 1);
    report.push(
        "conic_pair.zero_set",
        ok_if(
            exact && zero == expect,
            format!("quadric pair cuts exactly the {expect} spread-line points"),
        ),
    );

    // cones of the extended pencil
    let (q3, q4) = extended_cone_structure(t, &f1, &f2);
    let a = &bose.transversals.a_points;
    let mut cone_ok = true;
    for ai in a {
        let aiq = ai.frob_q(t);
        if !q4.partials(t, aiq.coords()).iter().all(|d| d.is_zero()) {
            cone_ok = false;
        }
        if !q3.partials(t, ai.coords()).iter().all(|d| d.is_zero()) {
            cone_ok = false;
        }
    }
    report.push(
        "conic_pair.cone_vertices",
        ok_if(cone_ok, "partials of f₄ vanish on Γ^q, partials of f₃ on Γ"),
    );

    let mut q4_gamma = Vec::new();
    for x in proj_points(t, Level::Quad, 3) {
        let g = gamma6(t, &x);
        if q4.vanishes_at(t, &g) {
            q4_gamma.push(x);
        }
    }
    let conic_set: HashSet<&ProjPoint> = conic.points.iter().collect();
    let q4_ok = q4_gamma.len() == conic.points.len()
        && q4_gamma.iter().all(|x| conic_set.contains(x));
    let mut q3_gamma_q = 0usize;
    let mut q3_ok = true;
    for x in proj_points(t, Level::Quad, 3) {
        let gq = gamma6(t, &x).frob_q(t);
        if q3.vanishes_at(t, &gq) {
            q3_gamma_q += 1;
            if !conic_set.contains(&x.frob_q(t)) {
                q3_ok = false;
            }
        }
    }
    report.push(
        "conic_pair.cone_bases",
        ok_if(
            q4_ok && q3_ok && q3_gamma_q == conic.points.len(),
            "Q₄ ∩ Γ is the conic and Q₃ ∩ Γ^q its conjugate",
        ),
    );

    // sampled ruling lines XY^q lie in both cones
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ruling_ok = true;
    for _ in 0..10 {
        let x = &conic.points[rng.gen_range(0..conic.points.len())];
        let y = &conic.points[rng.gen_range(0..conic.points.len())];
        let line = Subspace::span(t, &[gamma6(t, x), gamma6(t, y).frob_q(t)]);
        if line.dim() != 1 {
            continue;
        }
        for p in line.points(t) {
            if !q3.vanishes_at(t, &p) || !q4.vanishes_at(t, &p) {
                ruling_ok = false;
            }
        }
    }
    report.push(
        "conic_pair.sampled_rulings",
        ok_if(ruling_ok, "sampled lines XY^q lie in Q₃ ∩ Q₄"),
    );

    // extension of the variety is ruled exactly by the lines XY^q
    if q <= 3 {
        let mut union_ext: HashSet<ProjPoint> = HashSet::new();
        for x in &conic.points {
            for y in &conic.points {
                let line = Subspace::span(t, &[gamma6(t, x), gamma6(t, y).frob_q(t)]);
                union_ext.extend(line.points(t));
            }
        }
        let ext1 = f1.extend(t, Level::Quad);
        let ext2 = f2.extend(t, Level::Quad);
        let mut exact = true;
        let mut count = 0u64;
        for p in proj_points(t, Level::Quad, 6) {
            let on = ext1.vanishes_at(t, &p) && ext2.vanishes_at(t, &p);
            if on {
                count += 1;
            }
            if on != union_ext.contains(&p) {
                exact = false;
            }
        }
        report.push(
            "conic_pair.extension_ruling",
            ok_if(exact, format!("extension has {count} points, all on lines XY^q")),
        );
    } else {
        report.skipped += 1;
    }
}

// ---------------------------------------------------------------------------
// fqconic
// ---------------------------------------------------------------------------

fn fqconic_suite(bose: &Bose, report: &mut SuiteReport) {
    let t = bose.t();
    let q = bose.q();
    let frame = InfinityFrame::new(bose, None).expect("default frame");
    let secant = BaerSubplane::standard(t);
    let tangent = BaerSubplane::standard_tangent(t);

    for (label, subplane) in [("secant", &secant), ("tangent", &tangent)] {
        let segre = subplane_segre(bose, subplane);
        let conics: Vec<FqConic> = if q == 2 {
            enumerate_fq_conics(t, subplane).collect()
        } else {
            // the five deterministic case fixtures live in these subplanes
            let mut v = Vec::new();
            for tag in [CaseTag::OneA, CaseTag::OneB, CaseTag::OneC, CaseTag::TwoA, CaseTag::TwoB] {
                let fx = fixture_for_case(bose, &frame, tag);
                if fx.subplane.key() == subplane.key() {
                    v.push(fx);
                }
            }
            v
        };
        let mut fail: Option<String> = None;
        for fq in &conics {
            if let Err(e) = check_five_quadrics(bose, fq, &segre.quadrics) {
                fail = Some(e);
                break;
            }
        }
        report.push(
            &format!("fq_conic.five_quadrics_{label}"),
            match fail {
                None => Ok(format!(
                    "{} conics: five quadrics cut exactly (q+1)² points; extension ruled by X(X^c)^q",
                    conics.len()
                )),
                Some(e) => Err(e),
            },
        );
    }

    // the space of all quadrics through the variety's points has dim ≥ 5
    if q == 3 {
        let fq = FqConic::new(t, &secant, moment_conic_form(t, Level::Base)).unwrap();
        let mut rows = Vec::new();
        for x in &fq.points {
            for p in bose.lines[bose.line_by_name(x)].line.points(t) {
                let c = p.coords();
                let mut row = Vec::with_capacity(21);
                for i in 0..6 {
                    for j in i..6 {
                        row.push(t.mul(c[i], c[j]));
                    }
                }
                rows.push(row);
            }
        }
        let dim = Mat::from_rows(Level::Base, 21, rows).nullspace(t).rows;
        report.push(
            "fq_conic.quadric_space_dim",
            ok_if(dim >= 5, format!("space of quadrics through the 16 points has dim {dim}")),
        );
    }
}

/// Criterion content for one conic: common zero set of the five quadrics is
/// exactly the union of its spread lines, and over GF(q²) exactly the union
/// of the scroll lines of 𝒞⁺.
pub fn check_five_quadrics(
    bose: &Bose,
    fq: &FqConic,
    segre_quadrics: &[QuadForm; 3],
) -> Result<(), String> {
    let t = bose.t();
    let q = bose.q();
    let quadrics = fq_conic_quadrics_with(bose, fq, segre_quadrics);
    let mut union: HashSet<ProjPoint> = HashSet::new();
    for x in &fq.points {
        union.extend(bose.lines[bose.line_by_name(x)].line.points(t));
    }
    if union.len() as u64 != (q + 1) * (q + 1) {
        return Err(format!("union of spread lines has {} points", union.len()));
    }
    let mut zero = 0u64;
    for p in proj_points(t, Level::Base, 6) {
        let on = quadrics.iter().all(|f| f.vanishes_at(t, &p));
        if on != union.contains(&p) {
            return Err("five-quadric zero set differs from the spread-line union".into());
        }
        if on {
            zero += 1;
        }
    }
    if zero != (q + 1) * (q + 1) {
        return Err(format!("zero set has {zero} points"));
    }
    // equation route: pair ∩ segre = same set
    let pair_zero = |p: &ProjPoint| quadrics[0].vanishes_at(t, p) && quadrics[1].vanishes_at(t, p);
    let segre_zero = |p: &ProjPoint| quadrics[2..].iter().all(|f| f.vanishes_at(t, p));
    for p in &union {
        if !(pair_zero(p) && segre_zero(p)) {
            return Err("⟦C⟧ ≠ ⟦C⁺⟧ ∩ ⟦B⟧ on some point".into());
        }
    }

    // extension: union of the scroll lines of 𝒞⁺
    let ext: Vec<QuadForm> = quadrics.iter().map(|f| f.extend(t, Level::Quad)).collect();
    let mut scroll_union: HashSet<ProjPoint> = HashSet::new();
    for x in &fq.plus.points {
        let xc = fq.subplane.conj(t, x);
        let line = Subspace::span(t, &[gamma6(t, x), gamma6(t, &xc).frob_q(t)]);
        if line.dim() != 1 {
            return Err("scroll line degenerated".into());
        }
        for p in line.points(t) {
            if !ext.iter().all(|f| f.vanishes_at(t, &p)) {
                return Err("a scroll-line point misses the extended quadrics".into());
            }
            scroll_union.insert(p);
        }
    }
    let mut ext_zero = 0u64;
    for p in proj_points(t, Level::Quad, 6) {
        if ext.iter().all(|f| f.vanishes_at(t, &p)) {
            ext_zero += 1;
            if !scroll_union.contains(&p) {
                return Err("an extension point lies on no scroll line".into());
            }
        }
    }
    if ext_zero != (q * q + 1) * (q * q + 1) {
        return Err(format!("extension zero set has {ext_zero} points"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn classify_suite(bose: &Bose, report: &mut SuiteReport) {
    let t = bose.t();
    let frame = InfinityFrame::new(bose, None).expect("default frame");

    // the five case fixtures, with full per-case structure
    for tag in [CaseTag::OneA, CaseTag::OneB, CaseTag::OneC, CaseTag::TwoA, CaseTag::TwoB] {
        let fq = fixture_for_case(bose, &frame, tag);
        let segre = subplane_segre(bose, &fq.subplane);
        let name = format!("classify.case_{tag}");
        match classify_fq_conic(bose, &frame, &fq, &segre.quadrics) {
            Ok(rec) => report.push(
                &name,
                ok_if(
                    rec.case_tag == tag && rec.weight_sum == 4 && rec.checks.cor_cplus_bb,
                    format!(
                        "residual order {}, {} line components, weights sum 4",
                        rec.residual.order,
                        rec.line_components.len()
                    ),
                ),
            ),
            Err(e) => report.push(&name, Err(format!("{e}"))),
        }
    }

    // exhaustive enumeration over both fixture subplanes
    let mut tallies: std::collections::BTreeMap<String, usize> = Default::default();
    let mut failures = 0usize;
    let mut total = 0usize;
    for subplane in [BaerSubplane::standard(t), BaerSubplane::standard_tangent(t)] {
        let segre = subplane_segre(bose, &subplane);
        for fq in enumerate_fq_conics(t, &subplane) {
            total += 1;
            match classify_fq_conic(bose, &frame, &fq, &segre.quadrics) {
                Ok(rec) => {
                    *tallies.entry(rec.case_tag.to_string()).or_insert(0) += 1;
                    if rec.weight_sum != 4 || !rec.checks.cor_cplus_bb {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    report.push(
        "classify.enumeration",
        ok_if(
            failures == 0 && tallies.len() == 5,
            format!("{total} conics classified; case tallies {tallies:?}"),
        ),
    );
}

// ---------------------------------------------------------------------------
// scroll
// ---------------------------------------------------------------------------

fn scroll_suite(t: &FieldTower, seed: u64, report: &mut SuiteReport) {
    let q = t.q();
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
    let mut sigmas = vec![Mat::identity(t, lv, 2)];
    let mut shear = Mat::identity(t, lv, 2);
    shear.set(0, 1, one);
    sigmas.push(shear);
    for (k, sigma) in sigmas.iter().enumerate() {
        let scroll = match scroll_build(t, &u, &w, sigma) {
            Ok(s) => s,
            Err(e) => {
                report.push(&format!("scroll.build_{k}"), Err(format!("{e}")));
                continue;
            }
        };
        report.push(
            &format!("scroll.build_{k}"),
            ok_if(
                scroll.points.len() as u64 == (q + 1) * (q + 1),
                format!("(q+1)² = {} points on q+1 disjoint lines", scroll.points.len()),
            ),
        );
        let rep = scroll_order_check(t, &scroll, 1000, seed);
        report.push(
            &format!("scroll.order_{k}"),
            ok_if(
                rep.max_rational_intersection <= 4
                    && rep.admissible_hits > 0
                    && rep.extension_exactly_four,
                format!(
                    "quadric space dim {}, {} admissible sections ≤ 4 points, extension reaches 4",
                    rep.quadric_space_dim, rep.admissible_hits
                ),
            ),
        );
    }

    report.push("scroll.cubic_correspondence", cubic_plane_correspondence(t, seed));

    // a regulus is the scroll of two lines
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
    let two_lines = scroll_build(t, &ell, &m, &Mat::identity(t, lv, 2));
    report.push(
        "scroll.regulus",
        match two_lines {
            Ok(s) => ok_if(
                s.lines.len() as u64 == q + 1 && s.points.len() as u64 == (q + 1) * (q + 1),
                "two ruled lines give a regulus's q+1 disjoint lines",
            ),
            Err(e) => Err(format!("{e}")),
        },
    );
}

/// The double-point bookkeeping behind the order-4 count: a 3-space cut by
/// two hyperplanes pulls back to two plane cubics through the correspondence
/// F(y₀,y₁,y₂) = (y₀³, y₀²y₁, y₀y₁², y₀²y₂, y₀y₁y₂, y₁²y₂); away from the
/// two kernel points, their common zeros map exactly onto the section of the
/// identity scroll.
pub fn cubic_plane_correspondence(t: &FieldTower, seed: u64) -> Result<String, String> {
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
    let scroll =
        scroll_build(t, &u, &w, &Mat::identity(t, lv, 2)).map_err(|e| format!("{e}"))?;
    let f_map = |y: &[Fel]| -> Vec<Fel> {
        let (y0, y1, y2) = (y[0], y[1], y[2]);
        vec![
            t.mul(y0, t.mul(y0, y0)),
            t.mul(y0, t.mul(y0, y1)),
            t.mul(y0, t.mul(y1, y1)),
            t.mul(y0, t.mul(y0, y2)),
            t.mul(y0, t.mul(y1, y2)),
            t.mul(y1, t.mul(y1, y2)),
        ]
    };
    let kernel1 = ProjPoint::from_ints(t, lv, &[0, 1, 0]);
    let kernel2 = ProjPoint::from_ints(t, lv, &[0, 0, 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = t.size(lv) as u32;
    let mut verified = 0;
    let mut attempts = 0;
    while verified < 5 && attempts < 500 {
        attempts += 1;
        let a: Vec<Fel> = (0..6).map(|_| t.el(lv, rng.gen_range(0..size))).collect();
        let b: Vec<Fel> = (0..6).map(|_| t.el(lv, rng.gen_range(0..size))).collect();
        let duals = Mat::from_rows(lv, 6, vec![a.clone(), b.clone()]);
        if duals.rank(t) != 2 {
            continue;
        }
        let ns = duals.nullspace(t);
        let s3 = Subspace::from_rows(t, lv, 6, (0..ns.rows).map(|r| ns.row_vec(r)).collect());
        if s3.dim() != 3 {
            continue;
        }
        // admissibility as in the order check
        if scroll.lines.iter().any(|l| s3.contains(t, l)) {
            continue;
        }
        let section: HashSet<ProjPoint> = scroll
            .points
            .iter()
            .filter(|p| s3.contains_point(t, p))
            .cloned()
            .collect();
        // the correspondence covers the scroll away from the second carrier
        // conic (u = 0) and the ruling at the infinite parameter (r = 0);
        // only the shared point (0,0,0,0,0,1) of those loci is reached, so a
        // faithful comparison needs sections avoiding the rest of them
        let covered_exception = ProjPoint::from_ints(t, lv, &[0, 0, 0, 0, 0, 1]);
        let misses_bad_locus = section.iter().all(|p| {
            let c = p.coords();
            let on_second_carrier = c[0].is_zero() && c[1].is_zero() && c[2].is_zero();
            let on_infinite_ruling =
                c[0].is_zero() && c[1].is_zero() && c[3].is_zero() && c[4].is_zero();
            (!on_second_carrier && !on_infinite_ruling) || *p == covered_exception
        });
        if !misses_bad_locus {
            continue;
        }
        // common zeros of the two pulled-back cubics, kernel points excluded
        let dot = |f: &[Fel], v: &[Fel]| {
            let mut acc = t.zero(lv);
            for (x, y) in f.iter().zip(v) {
                acc = t.add(acc, t.mul(*x, *y));
            }
            acc
        };
        let mut mapped: HashSet<ProjPoint> = HashSet::new();
        for y in proj_points(t, lv, 3) {
            if y == kernel1 || y == kernel2 {
                continue;
            }
            let img = f_map(y.coords());
            if dot(&a, &img).is_zero() && dot(&b, &img).is_zero() {
                if let Some(p) = ProjPoint::new(t, img) {
                    mapped.insert(p);
                }
            }
        }
        if mapped != section {
            return Err("plane cubic zeros disagree with the scroll section".into());
        }
        if section.len() > 4 {
            return Err(format!("a section reached {} points", section.len()));
        }
        verified += 1;
    }
    if verified == 0 {
        return Err("no admissible hyperplane pair sampled".into());
    }
    Ok(format!("{verified} sampled hyperplane pairs match the plane-cubic correspondence"))
}

// ---------------------------------------------------------------------------
// unify
// ---------------------------------------------------------------------------

fn unify_suite(bose: &Bose, seed: u64, report: &mut SuiteReport) {
    let t = bose.t();
    let frame = InfinityFrame::new(bose, None).expect("default frame");

    let mut forward_failures: Vec<String> = Vec::new();
    let mut reverse_failures: Vec<String> = Vec::new();
    let mut cplus_failures = 0usize;
    let mut total = 0usize;
    let mut tallies: std::collections::BTreeMap<String, usize> = Default::default();
    for subplane in [BaerSubplane::standard(t), BaerSubplane::standard_tangent(t)] {
        let segre = subplane_segre(bose, &subplane);
        for fq in enumerate_fq_conics(t, &subplane) {
            total += 1;
            let rec = match classify_fq_conic(bose, &frame, &fq, &segre.quadrics) {
                Ok(rec) => rec,
                Err(e) => {
                    forward_failures.push(format!("conic #{total}: {e}"));
                    continue;
                }
            };
            *tallies.entry(rec.case_tag.to_string()).or_insert(0) += 1;
            if rec.weight_sum != 4 {
                forward_failures.push(format!("conic #{total}: weight sum {}", rec.weight_sum));
            }
            if !rec.checks.cor_cplus_bb {
                cplus_failures += 1;
            }
            match reverse_check(bose, &frame, &rec.residual) {
                Ok(back) => {
                    let pts: HashSet<&ProjPoint> = fq.points.iter().collect();
                    if back.points.len() != fq.points.len()
                        || !back.points.iter().all(|p| pts.contains(p))
                        || back.subplane.key() != fq.subplane.key()
                    {
                        reverse_failures.push(format!("conic #{total}: round-trip differs"));
                    }
                }
                Err(e) => reverse_failures.push(format!("conic #{total}: {e}")),
            }
        }
    }
    report.push(
        "unify.forward",
        ok_if(
            forward_failures.is_empty(),
            format!("{total} conics classified with weight sum 4; tallies {tallies:?}"),
        ),
    );
    if let Some(f) = forward_failures.first() {
        report.checks.last_mut().unwrap().detail = f.clone();
    }
    report.push(
        "unify.reverse",
        match reverse_failures.first() {
            None => Ok(format!("{total} forward-then-reverse round-trips are the identity")),
            Some(f) => Err(f.clone()),
        },
    );
    report.push(
        "unify.cplus_on_g",
        ok_if(
            cplus_failures == 0,
            format!("variety extension meets g exactly in 𝒞⁺ ∩ g for all {total} conics"),
        ),
    );

    // seeded non-2-special candidates must be rejected
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejected = 0usize;
    let mut accepted_non_special = 0usize;
    let mut tried = 0usize;
    let pi_basis = frame.pi_g.basis().clone();
    let size = t.size(Level::Base) as u32;
    while rejected < 100 && tried < 4000 {
        tried += 1;
        let r = 2 + (tried % 3);
        let mut cols = Vec::with_capacity(r + 1);
        for _ in 0..=r {
            // a random point of Π_g
            let coeffs: Vec<Fel> =
                (0..pi_basis.rows).map(|_| t.el(Level::Base, rng.gen_range(0..size))).collect();
            let mut col = vec![t.zero(Level::Base); 6];
            for (k, &c) in coeffs.iter().enumerate() {
                for i in 0..6 {
                    col[i] = t.add(col[i], t.mul(c, pi_basis.at(k, i)));
                }
            }
            cols.push(col);
        }
        let param = CurveParam { level: Level::Base, ambient: 6, cols };
        let span = param.span(t);
        if span.dim() as usize != r {
            continue;
        }
        let nrc = Nrc { order: r, param, ambient_space: span };
        match is_two_special(bose, &frame, &nrc) {
            Ok((true, _)) => continue, // rare lucky candidate; not a counterexample
            Ok((false, _)) | Err(_) => match reverse_check(bose, &frame, &nrc) {
                Err(_) => rejected += 1,
                Ok(_) => accepted_non_special += 1,
            },
        }
    }
    report.push(
        "unify.perturbed_rejections",
        ok_if(
            rejected >= 100 && accepted_non_special == 0,
            format!("{rejected} non-2-special candidates rejected out of {tried} sampled"),
        ),
    );

    // g-intersection counts on the fixture residuals (orders 2, 3, 4)
    let fx2a = fixture_for_case(bose, &frame, CaseTag::TwoA);
    let fx2b = fixture_for_case(bose, &frame, CaseTag::TwoB);
    let segre_t = subplane_segre(bose, &fx2a.subplane);
    let rec2a = classify_fq_conic(bose, &frame, &fx2a, &segre_t.quadrics);
    let rec2b = classify_fq_conic(bose, &frame, &fx2b, &segre_t.quadrics);
    let g_ok = match (&rec2a, &rec2b) {
        (Ok(a), Ok(b)) => {
            let d3: HashSet<ProjPoint> =
                g_intersection(bose, &frame, &a.residual).into_iter().map(|(p, _)| p).collect();
            let m4: u32 =
                g_intersection(bose, &frame, &b.residual).iter().map(|(_, m)| m).sum();
            d3.len() == 1 && m4 == 2
        }
        _ => false,
    };
    report.push(
        "unify.g_special_counts",
        ok_if(g_ok, "order-3 residual meets g once; order-4 residual meets it twice"),
    );
}
