//! Quadratic forms in n variables (upper-triangular monomial coefficients)
//! and homogeneous binary forms in (s, t).
//!
//! Monomial order for quadratic forms: x_i x_j with i ≤ j, ordered
//! lexicographically — for six variables that is
//! x₀², x₀x₁, x₀x₂, x₀x₃, x₀x₄, x₀x₅, x₁², x₁x₂, …, x₅².
//! Upper-triangular coefficients never divide by 2, so every construction
//! stays valid verbatim in characteristic 2.

use crate::field::{Fel, FieldTower, Level};
use crate::linalg::Mat;
use crate::projective::ProjPoint;

/// Index of the monomial x_i x_j (i ≤ j) among n variables.
pub fn monomial_index(i: usize, j: usize, nvars: usize) -> usize {
    assert!(i <= j && j < nvars);
    // entries before row i: n + (n-1) + ... + (n-i+1)
    i * nvars - i * (i + 1) / 2 + i + (j - i)
}

/// Number of degree-2 monomials in n variables.
pub fn monomial_count(nvars: usize) -> usize {
    nvars * (nvars + 1) / 2
}

/// A quadratic form Σ c_{ij} x_i x_j, i ≤ j.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadForm {
    pub level: Level,
    pub nvars: usize,
    pub coeffs: Vec<Fel>,
}

impl QuadForm {
    pub fn zero(t: &FieldTower, level: Level, nvars: usize) -> QuadForm {
        QuadForm { level, nvars, coeffs: vec![t.zero(level); monomial_count(nvars)] }
    }

    pub fn from_coeffs(level: Level, nvars: usize, coeffs: Vec<Fel>) -> QuadForm {
        assert_eq!(coeffs.len(), monomial_count(nvars));
        assert!(coeffs.iter().all(|c| c.level == level));
        QuadForm { level, nvars, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn coeff(&self, i: usize, j: usize) -> Fel {
        self.coeffs[monomial_index(i, j, self.nvars)]
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, v: Fel) {
        self.coeffs[monomial_index(i, j, self.nvars)] = v;
    }

    pub fn eval(&self, t: &FieldTower, coords: &[Fel]) -> Fel {
        assert_eq!(coords.len(), self.nvars);
        let level = self.level.max(coords.iter().map(|c| c.level).max().unwrap());
        let mut acc = t.zero(level);
        let mut k = 0;
        for i in 0..self.nvars {
            for j in i..self.nvars {
                let c = self.coeffs[k];
                k += 1;
                if c.is_zero() {
                    continue;
                }
                acc = t.add(acc, t.mul(c, t.mul(coords[i], coords[j])));
            }
        }
        acc
    }

    pub fn eval_point(&self, t: &FieldTower, p: &ProjPoint) -> Fel {
        self.eval(t, p.coords())
    }

    pub fn vanishes_at(&self, t: &FieldTower, p: &ProjPoint) -> bool {
        self.eval_point(t, p).is_zero()
    }

    /// Formal partial derivatives at a point: ∂f/∂x_k = 2c_{kk}x_k + Σ_{j≠k} c_{kj}x_j.
    pub fn partials(&self, t: &FieldTower, coords: &[Fel]) -> Vec<Fel> {
        let level = self.level.max(coords.iter().map(|c| c.level).max().unwrap());
        let two = t.from_int(2, level);
        (0..self.nvars)
            .map(|k| {
                let mut acc = t.mul(two, t.mul(self.coeff(k, k), coords[k]));
                for j in 0..self.nvars {
                    if j == k {
                        continue;
                    }
                    let c = if j < k { self.coeff(j, k) } else { self.coeff(k, j) };
                    acc = t.add(acc, t.mul(c, coords[j]));
                }
                acc
            })
            .collect()
    }

    /// The variety-extension: same coefficients read over a higher level.
    pub fn extend(&self, t: &FieldTower, level: Level) -> QuadForm {
        QuadForm {
            level,
            nvars: self.nvars,
            coeffs: self.coeffs.iter().map(|&c| t.embed(c, level)).collect(),
        }
    }

    /// Scales the form (zero set unchanged for nonzero λ).
    pub fn scale(&self, t: &FieldTower, lambda: Fel) -> QuadForm {
        let level = self.level.max(lambda.level);
        QuadForm {
            level,
            nvars: self.nvars,
            coeffs: self.coeffs.iter().map(|&c| t.mul(c, lambda)).collect(),
        }
    }

    pub fn add(&self, t: &FieldTower, other: &QuadForm) -> QuadForm {
        assert_eq!(self.nvars, other.nvars);
        let level = self.level.max(other.level);
        QuadForm {
            level,
            nvars: self.nvars,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| t.add(a, b))
                .collect(),
        }
    }

    /// Substitution x = M·y: the form pulled back along the linear map M,
    /// valid in every characteristic.
    pub fn substitute(&self, t: &FieldTower, m: &Mat) -> QuadForm {
        assert_eq!(m.rows, self.nvars);
        let level = self.level.max(m.level);
        let ny = m.cols;
        let mut out = QuadForm::zero(t, level, ny);
        for i in 0..self.nvars {
            for j in i..self.nvars {
                let c = self.coeff(i, j);
                if c.is_zero() {
                    continue;
                }
                for k in 0..ny {
                    let mik = m.at(i, k);
                    if mik.is_zero() {
                        continue;
                    }
                    for l in 0..ny {
                        let mjl = m.at(j, l);
                        if mjl.is_zero() {
                            continue;
                        }
                        let term = t.mul(c, t.mul(mik, mjl));
                        let (a, b) = if k <= l { (k, l) } else { (l, k) };
                        let idx = monomial_index(a, b, ny);
                        out.coeffs[idx] = t.add(out.coeffs[idx], t.embed(term, level));
                    }
                }
            }
        }
        out
    }

    /// Splits a quad-level form into GF(q)-parts: f = f₀ + τ·f₁ with both
    /// parts over the base field.
    pub fn split_quad(&self, t: &FieldTower) -> (QuadForm, QuadForm) {
        assert_eq!(self.level, Level::Quad);
        let mut lo = Vec::with_capacity(self.coeffs.len());
        let mut hi = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            let (a, b) = t.split(c);
            lo.push(a);
            hi.push(b);
        }
        (
            QuadForm { level: Level::Base, nvars: self.nvars, coeffs: lo },
            QuadForm { level: Level::Base, nvars: self.nvars, coeffs: hi },
        )
    }

    /// First nonzero coefficient scaled to 1; canonical representative of
    /// the projective class.
    pub fn normalize(&self, t: &FieldTower) -> QuadForm {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            None => self.clone(),
            Some(&lead) => self.scale(t, t.inv(lead).unwrap()),
        }
    }
}

/// A homogeneous binary form Σ_k c_k s^{d−k} t^k; coeffs[k] is the
/// coefficient of s^{d−k} t^k.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BForm {
    pub level: Level,
    pub coeffs: Vec<Fel>,
}

impl BForm {
    pub fn new(level: Level, coeffs: Vec<Fel>) -> BForm {
        assert!(!coeffs.is_empty());
        assert!(coeffs.iter().all(|c| c.level == level));
        BForm { level, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, t: &FieldTower, s: Fel, tt: Fel) -> Fel {
        let level = self.level.max(s.level).max(tt.level);
        let d = self.degree();
        let mut acc = t.zero(level);
        // powers via running products
        let mut spow = vec![t.one(level); d + 1];
        let mut tpow = vec![t.one(level); d + 1];
        for k in 1..=d {
            spow[k] = t.mul(spow[k - 1], s);
            tpow[k] = t.mul(tpow[k - 1], tt);
        }
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = t.add(acc, t.mul(c, t.mul(spow[d - k], tpow[k])));
        }
        acc
    }

    pub fn extend(&self, t: &FieldTower, level: Level) -> BForm {
        BForm { level, coeffs: self.coeffs.iter().map(|&c| t.embed(c, level)).collect() }
    }

    pub fn mul(&self, t: &FieldTower, other: &BForm) -> BForm {
        let level = self.level.max(other.level);
        let mut coeffs = vec![t.zero(level); self.degree() + other.degree() + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = t.add(coeffs[i + j], t.mul(a, b));
            }
        }
        BForm { level, coeffs }
    }

    /// Multiplicity of the root at (0:1) (the parameter ∞): the number of
    /// trailing zero coefficients in t-degree, i.e. d − max{k : c_k ≠ 0}.
    fn s_multiplicity(&self) -> usize {
        let top = self.coeffs.iter().rposition(|c| !c.is_zero()).expect("nonzero form");
        self.degree() - top
    }

    /// Dehomogenized univariate part f(θ) = F(1, θ), trailing zeros trimmed.
    fn univariate(&self) -> Vec<Fel> {
        let top = self.coeffs.iter().rposition(|c| !c.is_zero()).expect("nonzero form");
        self.coeffs[..=top].to_vec()
    }

    /// Monic gcd (as a binary form) of two nonzero forms.
    pub fn gcd(&self, t: &FieldTower, other: &BForm) -> BForm {
        assert!(!self.is_zero() && !other.is_zero());
        let level = self.level.max(other.level);
        let sm = self.s_multiplicity().min(other.s_multiplicity());
        let ua: Vec<Fel> = self.univariate().iter().map(|&c| t.embed(c, level)).collect();
        let ub: Vec<Fel> = other.univariate().iter().map(|&c| t.embed(c, level)).collect();
        let ug = univariate_gcd(t, ua, ub);
        // re-homogenize at degree deg(ug) + sm: the s^sm factor carries the
        // common root at infinity
        let mut coeffs = ug;
        coeffs.extend(std::iter::repeat(t.zero(level)).take(sm));
        // coefficient vector semantics: c_k on s^{d-k} t^k, so appending
        // zeros on the high-k side multiplies by s^sm only if we *prepend*…
        // s^sm · Σ c_k s^{g-k} t^k = Σ c_k s^{g+sm-k} t^k: same coefficient
        // indices, larger degree — appending zeros at the top is wrong,
        // extending the length while keeping indices is right. The extend
        // above placed zeros at indices g+1..g+sm, which is exactly that.
        BForm { level, coeffs }
    }

    /// Exact division; panics if not divisible.
    pub fn div_exact(&self, t: &FieldTower, divisor: &BForm) -> BForm {
        let level = self.level.max(divisor.level);
        let sm_num = self.s_multiplicity();
        let sm_den = divisor.s_multiplicity();
        assert!(sm_den <= sm_num, "binary form division must be exact");
        let ua: Vec<Fel> = self.univariate().iter().map(|&c| t.embed(c, level)).collect();
        let ub: Vec<Fel> = divisor.univariate().iter().map(|&c| t.embed(c, level)).collect();
        let (quot, rem) = univariate_divmod(t, &ua, &ub);
        assert!(rem.iter().all(|c| c.is_zero()), "binary form division must be exact");
        let mut coeffs = quot;
        let target_len = self.degree() - divisor.degree() + 1;
        coeffs.resize(target_len, t.zero(level));
        BForm { level, coeffs }
    }

    /// All roots over the given level, as normalized (s:t) pairs with
    /// multiplicity. Multiplicities are found by repeated exact division.
    pub fn roots(&self, t: &FieldTower, level: Level) -> Vec<((Fel, Fel), u32)> {
        assert!(!self.is_zero());
        let mut out = Vec::new();
        let sm = self.s_multiplicity();
        if sm > 0 {
            out.push(((t.zero(level), t.one(level)), sm as u32));
        }
        let uni = self.univariate();
        let one = t.one(level);
        let mut poly: Vec<Fel> = uni.iter().map(|&c| t.embed(c, level)).collect();
        for theta in t.elements(level) {
            if poly.len() == 1 {
                break;
            }
            let mut mult = 0u32;
            loop {
                let val = eval_univariate(t, &poly, theta);
                if !val.is_zero() {
                    break;
                }
                poly = deflate(t, &poly, theta);
                mult += 1;
            }
            if mult > 0 {
                out.push(((one, theta), mult));
            }
        }
        out
    }

    /// Total multiplicity of roots over a level (≤ degree).
    pub fn root_mass(&self, t: &FieldTower, level: Level) -> u32 {
        self.roots(t, level).iter().map(|(_, m)| m).sum()
    }
}

fn eval_univariate(t: &FieldTower, poly: &[Fel], x: Fel) -> Fel {
    let mut acc = t.zero(poly[0].level.max(x.level));
    for &c in poly.iter().rev() {
        acc = t.add(t.mul(acc, x), c);
    }
    acc
}

/// Synthetic division by (θ − r); input must vanish at r.
fn deflate(t: &FieldTower, poly: &[Fel], r: Fel) -> Vec<Fel> {
    let d = poly.len() - 1;
    let mut out = vec![t.zero(poly[0].level.max(r.level)); d];
    let mut carry = t.zero(poly[0].level.max(r.level));
    for k in (0..d).rev() {
        carry = t.add(poly[k + 1], t.mul(carry, r));
        out[k] = carry;
    }
    out
}

fn univariate_divmod(t: &FieldTower, num: &[Fel], den: &[Fel]) -> (Vec<Fel>, Vec<Fel>) {
    let level = num[0].level.max(den[0].level);
    let dd = den.len() - 1;
    assert!(!den[dd].is_zero());
    let lead_inv = t.inv(den[dd]).unwrap();
    let mut rem: Vec<Fel> = num.to_vec();
    if rem.len() < den.len() {
        return (vec![t.zero(level)], rem);
    }
    let mut quot = vec![t.zero(level); rem.len() - dd];
    for k in (dd..rem.len()).rev() {
        let c = t.mul(rem[k], lead_inv);
        if c.is_zero() {
            continue;
        }
        quot[k - dd] = c;
        for i in 0..=dd {
            rem[k - dd + i] = t.sub(rem[k - dd + i], t.mul(c, den[i]));
        }
    }
    rem.truncate(dd.max(1));
    (quot, rem)
}

fn univariate_gcd(t: &FieldTower, mut a: Vec<Fel>, mut b: Vec<Fel>) -> Vec<Fel> {
    let trim = |v: &mut Vec<Fel>| {
        while v.len() > 1 && v.last().unwrap().is_zero() {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0].is_zero()) {
        let (_, mut r) = univariate_divmod(t, &a, &b);
        trim(&mut r);
        a = std::mem::replace(&mut b, r);
    }
    // monic normalization
    let lead = *a.last().unwrap();
    if !lead.is_zero() && lead != t.one(lead.level) {
        let inv = t.inv(lead).unwrap();
        for c in &mut a {
            *c = t.mul(*c, inv);
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> FieldTower {
        FieldTower::default_for_q(3).unwrap()
    }

    #[test]
    fn monomial_indexing() {
        assert_eq!(monomial_count(6), 21);
        assert_eq!(monomial_index(0, 0, 6), 0);
        assert_eq!(monomial_index(0, 5, 6), 5);
        assert_eq!(monomial_index(1, 1, 6), 6);
        assert_eq!(monomial_index(5, 5, 6), 20);
        // strictly increasing enumeration
        let mut seen = Vec::new();
        for i in 0..6 {
            for j in i..6 {
                seen.push(monomial_index(i, j, 6));
            }
        }
        assert_eq!(seen, (0..21).collect::<Vec<_>>());
    }

    #[test]
    fn eval_and_substitute_agree() {
        let t = q3();
        let lv = Level::Base;
        // f = x0² + 2 x0x2 + x1x2 in 3 variables
        let mut f = QuadForm::zero(&t, lv, 3);
        f.set_coeff(0, 0, t.from_int(1, lv));
        f.set_coeff(0, 2, t.from_int(2, lv));
        f.set_coeff(1, 2, t.from_int(1, lv));
        let m = Mat::from_rows(
            lv,
            3,
            vec![
                vec![t.from_int(1, lv), t.from_int(1, lv), t.from_int(0, lv)],
                vec![t.from_int(0, lv), t.from_int(1, lv), t.from_int(2, lv)],
                vec![t.from_int(1, lv), t.from_int(0, lv), t.from_int(1, lv)],
            ],
        );
        let g = f.substitute(&t, &m);
        for y in crate::projective::proj_points(&t, lv, 3) {
            let x = m.mul_vec(&t, y.coords());
            assert_eq!(g.eval(&t, y.coords()), f.eval(&t, &x));
        }
    }

    #[test]
    fn bform_gcd_and_roots() {
        let t = q3();
        let lv = Level::Base;
        let one = t.one(lv);
        let z = t.zero(lv);
        // F = (t − s)²·(t − 2s) = expanded in coeffs on s^{3-k} t^k
        let lin1 = BForm::new(lv, vec![t.neg(one), one]); // t − s
        let lin2 = BForm::new(lv, vec![t.from_int(-2, lv), one]); // t − 2s
        let f = lin1.mul(&t, &lin1).mul(&t, &lin2);
        let roots = f.roots(&t, lv);
        let mut mults: Vec<u32> = roots.iter().map(|&(_, m)| m).collect();
        mults.sort_unstable();
        assert_eq!(mults, vec![1, 2]);
        // root at infinity: s·(t − s)
        let s_factor = BForm::new(lv, vec![one, z]); // s
        let g = s_factor.mul(&t, &lin1);
        let roots = g.roots(&t, lv);
        assert!(roots.iter().any(|&((s, _), m)| s.is_zero() && m == 1));
        // gcd of F and s·(t−s)·(t−s) is (t−s)²
        let h = s_factor.mul(&t, &lin1).mul(&t, &lin1);
        let d = f.gcd(&t, &h);
        assert_eq!(d.degree(), 2);
        let exp = lin1.mul(&t, &lin1);
        // compare up to scalar: both monic by construction here
        assert_eq!(d, exp);
        // exact division
        let q = f.div_exact(&t, &exp);
        assert_eq!(q.degree(), 1);
        assert_eq!(q, lin2);
    }

    #[test]
    fn root_mass_over_extension() {
        let t = q3();
        // θ² − τ has no quad roots... it has: GF(9) contains sqrt(τ)? τ is a
        // primitive element, odd power of the generator, so no. Over GF(81)
        // the mass is 2.
        let f = BForm::new(
            Level::Quad,
            vec![t.neg(t.tau()), t.zero(Level::Quad), t.one(Level::Quad)],
        );
        assert_eq!(f.root_mass(&t, Level::Quad), 0);
        assert_eq!(f.root_mass(&t, Level::Quartic), 2);
    }
}
