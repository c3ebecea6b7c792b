//! Exact arithmetic in the field tower GF(q) ⊂ GF(q²) ⊂ GF(q⁴), q = p^e.
//!
//! GF(q²) is built as GF(q)[τ]/(τ² − t₁τ − t₀) where x² − t₁x − t₀ is a
//! primitive polynomial over GF(q), so τ + τ^q = t₁ and τ·τ^q = −t₀.
//! GF(q⁴) is a further quadratic extension GF(q²)[ω]/(ω² − s₁ω − s₀), so the
//! map x ↦ x^{q²} acts on the ω-coefficients like a conjugation.
//!
//! Elements are canonical coefficient codes (little-endian digit packing over
//! the level below). Multiplication runs through per-level log/antilog
//! tables; addition through digit tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which floor of the tower an element lives on.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Level {
    /// GF(q)
    Base,
    /// GF(q²)
    Quad,
    /// GF(q⁴)
    Quartic,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Base, Level::Quad, Level::Quartic];

    fn idx(self) -> usize {
        match self {
            Level::Base => 0,
            Level::Quad => 1,
            Level::Quartic => 2,
        }
    }
}

/// A field element: a canonical code together with its tower level.
///
/// Codes are canonical per level, so `==` and `Hash` agree with field
/// equality at equal levels. Embedding up the tower preserves codes.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Fel {
    pub level: Level,
    code: u32,
}

impl Fel {
    pub fn is_zero(self) -> bool {
        self.code == 0
    }

    pub fn code(self) -> u32 {
        self.code
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no shipped modulus for GF({p}^{e}); supported base fields: p prime with e=1, or GF(4), GF(8), GF(9), GF(16), GF(25), GF(49)")]
    UnsupportedBase { p: u64, e: u32 },
    #[error("polynomial is reducible over the base field")]
    Reducible,
    #[error("polynomial is irreducible but not primitive (root has order {order}, need {need})")]
    NotPrimitive { order: u64, need: u64 },
    #[error("quartic-step polynomial is reducible over GF(q^2)")]
    QuarticReducible,
    #[error("division by zero")]
    DivisionByZero,
    #[error("degenerate quadratic: both leading coefficients are zero")]
    DegenerateQuadratic,
    #[error("field too large: GF(q^4) would have {0} elements, table cap is {TABLE_CAP}")]
    TooLarge(u64),
    #[error("cannot parse field element: {0}")]
    Parse(String),
    #[error("bad field spec: {0}")]
    Spec(String),
}

const TABLE_CAP: u64 = 1 << 17;

/// Log/antilog, Frobenius, and addition tables for a single tower level.
#[derive(Debug)]
struct LevelData {
    size: u32,
    /// exp[k] = code of g^k, 0 <= k < size-1.
    exp: Vec<u32>,
    /// log[code] for code >= 1; entry 0 unused.
    log: Vec<u32>,
    /// x ↦ x^q permutation.
    frob_q: Vec<u32>,
    /// x ↦ x^{q²} permutation.
    frob_q2: Vec<u32>,
    neg: Vec<u32>,
    /// Dense addition table for Base and Quad; the Quartic level adds by
    /// splitting into two Quad components.
    add_table: Vec<u32>,
}

impl LevelData {
    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.size as u64 - 1;
        self.exp[((self.log[a as usize] as u64 + self.log[b as usize] as u64) % n) as usize]
    }

    fn inv(&self, a: u32) -> u32 {
        let n = self.size - 1;
        self.exp[((n - self.log[a as usize]) % n) as usize]
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        self.add_table[(a * self.size + b) as usize]
    }
}

/// The tower GF(q) ⊂ GF(q²) ⊂ GF(q⁴) with all arithmetic tables prebuilt.
///
/// Immutable after construction; every operation is pure, so one tower can be
/// shared across threads.
pub struct FieldTower {
    p: u64,
    e: u32,
    q: u64,
    t0: Fel,
    t1: Fel,
    s0: Fel,
    s1: Fel,
    levels: [LevelData; 3],
}

fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let e = modulus.len();
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    // x^e ≡ m_{e-1} x^{e-1} + ... + m_0 (modulus stores that right-hand side)
    for k in (e..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..e {
            prod[k - e + i] = (prod[k - e + i] + c * modulus[i]) % p;
        }
    }
    prod.truncate(e);
    prod
}

fn digits_to_code(digits: &[u64], p: u64) -> u32 {
    let mut code = 0u64;
    for &d in digits.iter().rev() {
        code = code * p + d;
    }
    code as u32
}

fn code_to_digits(code: u32, p: u64, ndigits: u32) -> Vec<u64> {
    let mut c = code as u64;
    let mut out = Vec::with_capacity(ndigits as usize);
    for _ in 0..ndigits {
        out.push(c % p);
        c /= p;
    }
    out
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Reduction rule x^e = Σ m_i x^i for the shipped base-field modulus
/// (a primitive polynomial over GF(p)).
fn default_base_reduction(p: u64, e: u32) -> Result<Vec<u64>, FieldError> {
    Ok(match (p, e) {
        (_, 1) => vec![0],
        (2, 2) => vec![1, 1],       // x^2 = x + 1
        (2, 3) => vec![1, 1, 0],    // x^3 = x + 1
        (2, 4) => vec![1, 1, 0, 0], // x^4 = x + 1
        (3, 2) => vec![1, 1],       // x^2 = x + 1
        (5, 2) => vec![3, 1],       // x^2 = x + 3
        (7, 2) => vec![4, 1],       // x^2 = x + 4
        _ => return Err(FieldError::UnsupportedBase { p, e }),
    })
}

fn build_level(
    p: u64,
    ndigits: u32,
    size: u32,
    gen: u32,
    mul: impl Fn(u32, u32) -> u32,
    with_add_table: bool,
) -> LevelData {
    let n = (size - 1) as usize;
    let mut exp = vec![0u32; n];
    let mut log = vec![0u32; size as usize];
    let mut x = 1u32;
    for (k, slot) in exp.iter_mut().enumerate() {
        *slot = x;
        log[x as usize] = k as u32;
        x = mul(x, gen);
    }
    assert_eq!(x, 1, "generator order mismatch");

    let mut neg = vec![0u32; size as usize];
    for a in 0..size {
        let da = code_to_digits(a, p, ndigits);
        let nd: Vec<u64> = da.iter().map(|&v| (p - v) % p).collect();
        neg[a as usize] = digits_to_code(&nd, p);
    }
    let add = if with_add_table {
        let mut t = vec![0u32; size as usize * size as usize];
        for a in 0..size {
            let da = code_to_digits(a, p, ndigits);
            for b in 0..size {
                let db = code_to_digits(b, p, ndigits);
                let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                t[(a * size + b) as usize] = digits_to_code(&sum, p);
            }
        }
        t
    } else {
        Vec::new()
    };
    LevelData { size, exp, log, frob_q: Vec::new(), frob_q2: Vec::new(), neg, add_table: add }
}

impl FieldTower {
    /// Builds the tower. `t0`/`t1` are base elements given as little-endian
    /// GF(p)-digit vectors; x² − t₁x − t₀ must be primitive over GF(q).
    /// The quartic step defaults to ω² = τ for odd q and to the first
    /// irreducible ω² − s₁ω − s₀ in code order for even q; pass `quartic`
    /// as (s0, s1) quad elements (each 2e digits) to override.
    pub fn build(
        p: u64,
        e: u32,
        t0_digits: &[u64],
        t1_digits: &[u64],
        quartic: Option<(&[u64], &[u64])>,
    ) -> Result<FieldTower, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::UnsupportedBase { p, e });
        }
        let q = p.pow(e);
        let q4 = q * q * q * q;
        if q4 > TABLE_CAP {
            return Err(FieldError::TooLarge(q4));
        }

        // ---- base level GF(q) ----
        let reduction = default_base_reduction(p, e)?;
        let base_mul = |a: u32, b: u32| -> u32 {
            let da = code_to_digits(a, p, e);
            let db = code_to_digits(b, p, e);
            digits_to_code(&poly_mul_mod(&da, &db, &reduction, p), p)
        };
        let qc = q as u32;
        let mut base_gen = None;
        'search: for cand in 1..qc {
            let mut x = cand;
            let mut ord = 1u64;
            while x != 1 {
                x = base_mul(x, cand);
                ord += 1;
                if ord > q {
                    // not a field: shipped modulus would have to be reducible
                    continue 'search;
                }
            }
            if ord == q - 1 {
                base_gen = Some(cand);
                break;
            }
        }
        let base = build_level(p, e, qc, base_gen.ok_or(FieldError::Reducible)?, base_mul, true);

        // ---- quad level GF(q²) ----
        let parse_base = |digits: &[u64]| -> Result<u32, FieldError> {
            if digits.len() > e as usize || digits.iter().any(|&d| d >= p) {
                return Err(FieldError::Spec(format!(
                    "digits {digits:?} out of range for GF({p}^{e})"
                )));
            }
            let mut padded = digits.to_vec();
            padded.resize(e as usize, 0);
            Ok(digits_to_code(&padded, p))
        };
        let t0 = parse_base(t0_digits)?;
        let t1 = parse_base(t1_digits)?;
        for x in 0..qc {
            // root test for x² − t₁x − t₀
            let v = base.add(
                base.add(base.mul(x, x), base.neg[base.mul(t1, x) as usize]),
                base.neg[t0 as usize],
            );
            if v == 0 {
                return Err(FieldError::Reducible);
            }
        }
        let q2c = (q * q) as u32;
        let quad_mul = |a: u32, b: u32| -> u32 {
            let (a0, a1) = (a % qc, a / qc);
            let (b0, b1) = (b % qc, b / qc);
            let a1b1 = base.mul(a1, b1);
            let lo = base.add(base.mul(a0, b0), base.mul(t0, a1b1));
            let hi = base.add(base.add(base.mul(a0, b1), base.mul(a1, b0)), base.mul(t1, a1b1));
            lo + hi * qc
        };
        // walking τ's powers verifies primitivity as a side effect
        let need = q * q - 1;
        let mut x = 1u32;
        for k in 1..need {
            x = quad_mul(x, qc);
            if x == 1 {
                return Err(FieldError::NotPrimitive { order: k, need });
            }
        }
        let quad = build_level(p, 2 * e, q2c, qc, quad_mul, true);

        // ---- quartic level GF(q⁴) ----
        let quad_irreducible = |s1: u32, s0: u32| -> bool {
            (0..q2c).all(|y| {
                let v = quad.add(
                    quad.add(quad.mul(y, y), quad.neg[quad.mul(s1, y) as usize]),
                    quad.neg[s0 as usize],
                );
                v != 0
            })
        };
        let (s0, s1) = match quartic {
            Some((s0d, s1d)) => {
                let parse_quad = |digits: &[u64]| -> Result<u32, FieldError> {
                    let mut padded = digits.to_vec();
                    padded.resize(2 * e as usize, 0);
                    if padded.len() != 2 * e as usize || padded.iter().any(|&d| d >= p) {
                        return Err(FieldError::Spec(format!("bad quartic digits {digits:?}")));
                    }
                    let lo = digits_to_code(&padded[..e as usize], p);
                    let hi = digits_to_code(&padded[e as usize..], p);
                    Ok(lo + hi * qc)
                };
                let pair = (parse_quad(s0d)?, parse_quad(s1d)?);
                if !quad_irreducible(pair.1, pair.0) {
                    return Err(FieldError::QuarticReducible);
                }
                pair
            }
            None => {
                if p != 2 && quad_irreducible(0, qc) {
                    (qc, 0) // ω² = τ
                } else {
                    let mut found = None;
                    'outer: for s1 in 0..q2c {
                        for s0 in 0..q2c {
                            if quad_irreducible(s1, s0) {
                                found = Some((s0, s1));
                                break 'outer;
                            }
                        }
                    }
                    found.ok_or(FieldError::QuarticReducible)?
                }
            }
        };
        let q4c = q4 as u32;
        let quartic_mul = |a: u32, b: u32| -> u32 {
            let (a0, a1) = (a % q2c, a / q2c);
            let (b0, b1) = (b % q2c, b / q2c);
            let a1b1 = quad.mul(a1, b1);
            let lo = quad.add(quad.mul(a0, b0), quad.mul(s0, a1b1));
            let hi = quad.add(quad.add(quad.mul(a0, b1), quad.mul(a1, b0)), quad.mul(s1, a1b1));
            lo + hi * q2c
        };
        // ω need not be primitive; search for a generator via the prime
        // factorization of q⁴ − 1
        let n = q4 - 1;
        let mut factors = Vec::new();
        {
            let mut m = n;
            let mut d = 2;
            while d * d <= m {
                if m % d == 0 {
                    factors.push(d);
                    while m % d == 0 {
                        m /= d;
                    }
                }
                d += 1;
            }
            if m > 1 {
                factors.push(m);
            }
        }
        let quartic_pow = |mut b: u32, mut k: u64| -> u32 {
            let mut acc = 1u32;
            while k > 0 {
                if k & 1 == 1 {
                    acc = quartic_mul(acc, b);
                }
                b = quartic_mul(b, b);
                k >>= 1;
            }
            acc
        };
        let gen = (2..q4c)
            .find(|&cand| factors.iter().all(|&f| quartic_pow(cand, n / f) != 1))
            .expect("GF(q^4) has a primitive element");
        let quartic_level = build_level(p, 4 * e, q4c, gen, quartic_mul, false);

        let mut tower = FieldTower {
            p,
            e,
            q,
            t0: Fel { level: Level::Base, code: t0 },
            t1: Fel { level: Level::Base, code: t1 },
            s0: Fel { level: Level::Quad, code: s0 },
            s1: Fel { level: Level::Quad, code: s1 },
            levels: [base, quad, quartic_level],
        };
        tower.fill_frobenius();

        // τ + τ^q = t₁ and τ·τ^q = −t₀
        let tau = tower.tau();
        let tq = tower.frob_q(tau);
        assert_eq!(tower.add(tau, tq), tower.embed(tower.t1, Level::Quad));
        assert_eq!(tower.mul(tau, tq), tower.neg(tower.embed(tower.t0, Level::Quad)));
        Ok(tower)
    }

    fn fill_frobenius(&mut self) {
        let q = self.q;
        for ld in &mut self.levels {
            let n = ld.size as u64 - 1;
            let mut fq = vec![0u32; ld.size as usize];
            let mut fq2 = vec![0u32; ld.size as usize];
            for code in 1..ld.size {
                let k = ld.log[code as usize] as u64;
                fq[code as usize] = ld.exp[((k * (q % n)) % n) as usize];
                fq2[code as usize] = ld.exp[((k * ((q * q) % n)) % n) as usize];
            }
            ld.frob_q = fq;
            ld.frob_q2 = fq2;
        }
    }

    /// The shipped default tower for q ∈ {2,3,4,5,7}.
    pub fn default_for_q(q: u64) -> Result<FieldTower, FieldError> {
        match q {
            2 => FieldTower::build(2, 1, &[1], &[1], None),
            3 => FieldTower::build(3, 1, &[1], &[1], None),
            4 => FieldTower::build(2, 2, &[0, 1], &[1], None),
            5 => FieldTower::build(5, 1, &[3], &[1], None),
            7 => FieldTower::build(7, 1, &[4], &[1], None),
            _ => Err(FieldError::Spec(format!(
                "no default field for q={q}; supported: 2,3,4,5,7 (or give a field spec)"
            ))),
        }
    }

    /// Parses `p=<int> e=<int> t0=<digits> t1=<digits> [quartic=<digits>]`
    /// with comma-separated little-endian GF(p) digits. The quartic entry
    /// has 4e digits: s₀'s 2e digits then s₁'s.
    pub fn from_spec(spec: &str) -> Result<FieldTower, FieldError> {
        let mut p = None;
        let mut e = None;
        let mut t0 = None;
        let mut t1 = None;
        let mut quartic = None;
        for tok in spec.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| FieldError::Spec(format!("expected key=value, got `{tok}`")))?;
            let nums: Result<Vec<u64>, _> =
                val.split(',').map(|s| s.trim().parse::<u64>()).collect();
            let nums = nums.map_err(|_| FieldError::Spec(format!("bad number list `{val}`")))?;
            match key {
                "p" => p = nums.first().copied(),
                "e" => e = nums.first().map(|&x| x as u32),
                "t0" => t0 = Some(nums),
                "t1" => t1 = Some(nums),
                "quartic" => quartic = Some(nums),
                _ => return Err(FieldError::Spec(format!("unknown key `{key}`"))),
            }
        }
        let p = p.ok_or_else(|| FieldError::Spec("missing p".into()))?;
        let e = e.ok_or_else(|| FieldError::Spec("missing e".into()))?;
        let t0 = t0.ok_or_else(|| FieldError::Spec("missing t0".into()))?;
        let t1 = t1.ok_or_else(|| FieldError::Spec("missing t1".into()))?;
        let quartic_parts = match &quartic {
            Some(d) => {
                let half = 2 * e as usize;
                if d.len() != 2 * half {
                    return Err(FieldError::Spec(format!(
                        "quartic needs {} digits (s0 then s1)",
                        2 * half
                    )));
                }
                Some((d[..half].to_vec(), d[half..].to_vec()))
            }
            None => None,
        };
        FieldTower::build(
            p,
            e,
            &t0,
            &t1,
            quartic_parts.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice())),
        )
    }

    /// Renders the tower in `from_spec` format.
    pub fn spec_string(&self) -> String {
        let base_digits = |f: Fel| -> String {
            code_to_digits(f.code, self.p, self.e)
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let quad_digits = |f: Fel| -> String {
            let mut d = code_to_digits(f.code % self.q as u32, self.p, self.e);
            d.extend(code_to_digits(f.code / self.q as u32, self.p, self.e));
            d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        };
        format!(
            "p={} e={} t0={} t1={} quartic={},{}",
            self.p,
            self.e,
            base_digits(self.t0),
            base_digits(self.t1),
            quad_digits(self.s0),
            quad_digits(self.s1),
        )
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// q = p^e.
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn size(&self, level: Level) -> u64 {
        self.levels[level.idx()].size as u64
    }

    pub fn zero(&self, level: Level) -> Fel {
        Fel { level, code: 0 }
    }

    pub fn one(&self, level: Level) -> Fel {
        Fel { level, code: 1 }
    }

    /// The adjoined root τ of x² − t₁x − t₀, a primitive element of GF(q²).
    pub fn tau(&self) -> Fel {
        Fel { level: Level::Quad, code: self.q as u32 }
    }

    /// τ^q = t₁ − τ.
    pub fn tau_conj(&self) -> Fel {
        self.frob_q(self.tau())
    }

    pub fn t0(&self) -> Fel {
        self.t0
    }

    pub fn t1(&self) -> Fel {
        self.t1
    }

    /// An integer reduced into the prime subfield of the given level.
    pub fn from_int(&self, n: i64, level: Level) -> Fel {
        Fel { level, code: n.rem_euclid(self.p as i64) as u32 }
    }

    /// Retags an element at a higher level (codes are embedding-stable).
    pub fn embed(&self, a: Fel, level: Level) -> Fel {
        assert!(level >= a.level, "embed only goes up the tower");
        Fel { level, code: a.code }
    }

    /// Sections down to `level` if the element lies in that subfield.
    pub fn try_section(&self, a: Fel, level: Level) -> Option<Fel> {
        if level >= a.level {
            return Some(a);
        }
        // membership in the subfield is exactly Frobenius-fixedness
        let fixed = match (a.level, level) {
            (Level::Quad, Level::Base) => self.frob_q(a) == a,
            (Level::Quartic, Level::Quad) => self.frob_q2(a) == a,
            (Level::Quartic, Level::Base) => self.frob_q(a) == a,
            _ => unreachable!(),
        };
        if !fixed {
            return None;
        }
        let bound = self.size(level) as u32;
        assert!(a.code < bound, "Frobenius-fixed element must have a low code");
        Some(Fel { level, code: a.code })
    }

    /// Splits into components over the generator of the level: quad x = x₀ + x₁τ
    /// gives (x₀, x₁); quartic gives quad components over ω.
    pub fn split(&self, a: Fel) -> (Fel, Fel) {
        match a.level {
            Level::Base => panic!("cannot split a base element"),
            Level::Quad => {
                let q = self.q as u32;
                (
                    Fel { level: Level::Base, code: a.code % q },
                    Fel { level: Level::Base, code: a.code / q },
                )
            }
            Level::Quartic => {
                let q2 = (self.q * self.q) as u32;
                (
                    Fel { level: Level::Quad, code: a.code % q2 },
                    Fel { level: Level::Quad, code: a.code / q2 },
                )
            }
        }
    }

    /// Inverse of `split`: a + b·τ (quad) or a + b·ω (quartic).
    pub fn join(&self, a: Fel, b: Fel, level: Level) -> Fel {
        match level {
            Level::Base => panic!("cannot join into the base level"),
            Level::Quad => {
                assert!(a.level == Level::Base && b.level == Level::Base);
                Fel { level, code: a.code + b.code * self.q as u32 }
            }
            Level::Quartic => {
                assert!(a.level <= Level::Quad && b.level <= Level::Quad);
                Fel { level, code: a.code + b.code * (self.q * self.q) as u32 }
            }
        }
    }

    fn lift_pair(&self, a: Fel, b: Fel) -> (u32, u32, usize) {
        let level = a.level.max(b.level);
        (a.code, b.code, level.idx())
    }

    pub fn add(&self, a: Fel, b: Fel) -> Fel {
        let (ac, bc, li) = self.lift_pair(a, b);
        let code = if li < 2 {
            self.levels[li].add(ac, bc)
        } else {
            let quad = &self.levels[1];
            let q2 = quad.size;
            quad.add(ac % q2, bc % q2) + quad.add(ac / q2, bc / q2) * q2
        };
        Fel { level: a.level.max(b.level), code }
    }

    pub fn neg(&self, a: Fel) -> Fel {
        Fel { level: a.level, code: self.levels[a.level.idx()].neg[a.code as usize] }
    }

    pub fn sub(&self, a: Fel, b: Fel) -> Fel {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fel, b: Fel) -> Fel {
        let (ac, bc, li) = self.lift_pair(a, b);
        Fel { level: a.level.max(b.level), code: self.levels[li].mul(ac, bc) }
    }

    pub fn inv(&self, a: Fel) -> Result<Fel, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Fel { level: a.level, code: self.levels[a.level.idx()].inv(a.code) })
    }

    pub fn div(&self, a: Fel, b: Fel) -> Result<Fel, FieldError> {
        let level = a.level.max(b.level);
        Ok(self.mul(self.embed(a, level), self.inv(self.embed(b, level))?))
    }

    pub fn pow(&self, a: Fel, n: u64) -> Fel {
        if a.is_zero() {
            return if n == 0 { self.one(a.level) } else { a };
        }
        let ld = &self.levels[a.level.idx()];
        let m = ld.size as u64 - 1;
        let k = (ld.log[a.code as usize] as u64 * (n % m)) % m;
        Fel { level: a.level, code: ld.exp[k as usize] }
    }

    /// x ↦ x^q: fixes GF(q) pointwise, an involution on GF(q²).
    pub fn frob_q(&self, a: Fel) -> Fel {
        Fel { level: a.level, code: self.levels[a.level.idx()].frob_q[a.code as usize] }
    }

    /// x ↦ x^{q²}: fixes GF(q²) pointwise, an involution on GF(q⁴).
    pub fn frob_q2(&self, a: Fel) -> Fel {
        Fel { level: a.level, code: self.levels[a.level.idx()].frob_q2[a.code as usize] }
    }

    /// Multiplicative order; 0 for the zero element.
    pub fn order(&self, a: Fel) -> u64 {
        if a.is_zero() {
            return 0;
        }
        let ld = &self.levels[a.level.idx()];
        let n = ld.size as u64 - 1;
        let k = ld.log[a.code as usize] as u64;
        n / gcd(n, k)
    }

    /// All elements of a level in canonical code order, zero first.
    pub fn elements(&self, level: Level) -> impl Iterator<Item = Fel> + '_ {
        let n = self.size(level) as u32;
        (0..n).map(move |code| Fel { level, code })
    }

    /// The element with the given canonical code.
    pub fn el(&self, level: Level, code: u32) -> Fel {
        assert!((code as u64) < self.size(level));
        Fel { level, code }
    }

    /// Roots in GF(q⁴) of ax² + bx + c with multiplicity; coefficients may
    /// live at any level up to Quad. Roots are re-verified by substitution.
    pub fn solve_quadratic(&self, a: Fel, b: Fel, c: Fel) -> Result<Vec<(Fel, u32)>, FieldError> {
        let a = self.embed(a, Level::Quartic);
        let b = self.embed(b, Level::Quartic);
        let c = self.embed(c, Level::Quartic);
        if a.is_zero() && b.is_zero() {
            return Err(FieldError::DegenerateQuadratic);
        }
        if a.is_zero() {
            return Ok(vec![(self.neg(self.div(c, b)?), 1)]);
        }
        let mut roots = Vec::new();
        for x in self.elements(Level::Quartic) {
            let v = self.add(self.mul(a, self.mul(x, x)), self.add(self.mul(b, x), c));
            if v.is_zero() {
                roots.push(x);
            }
        }
        Ok(match roots.len() {
            2 => vec![(roots[0], 1), (roots[1], 1)],
            1 => vec![(roots[0], 2)],
            n => panic!("quadratic over GF(q^2) must split in GF(q^4), found {n} roots"),
        })
    }

    /// Canonical text: base elements as integers (u-polynomials when e > 1),
    /// quad over τ written `t`, quartic over ω written `w`.
    pub fn render(&self, a: Fel) -> String {
        match a.level {
            Level::Base => {
                if self.e == 1 {
                    a.code.to_string()
                } else {
                    render_poly(&code_to_digits(a.code, self.p, self.e), "u")
                }
            }
            Level::Quad => {
                let (x0, x1) = self.split(a);
                render_ext(self.render(x0), self.render(x1), "t")
            }
            Level::Quartic => {
                let (x0, x1) = self.split(a);
                render_ext(self.render(x0), self.render(x1), "w")
            }
        }
    }

    /// Parses sums of `*`-separated factors in the generators u, t, w with
    /// integer coefficients and `^` powers, e.g. `2*t+1` or `(u+1)*t`.
    pub fn parse(&self, input: &str, level: Level) -> Result<Fel, FieldError> {
        let mut parser = ElemParser { tower: self, src: input.as_bytes(), pos: 0 };
        let v = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(FieldError::Parse(format!(
                "trailing input at byte {} in `{input}`",
                parser.pos
            )));
        }
        self.try_section(v, level)
            .ok_or_else(|| FieldError::Parse(format!("`{input}` does not lie in {level:?}")))
    }
}

impl std::fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FieldTower({})", self.spec_string())
    }
}

fn render_poly(digits: &[u64], var: &str) -> String {
    let mut s = String::new();
    for (i, &d) in digits.iter().enumerate().rev() {
        if d == 0 {
            continue;
        }
        if !s.is_empty() {
            s.push('+');
        }
        match (d, i) {
            (_, 0) => write!(s, "{d}").unwrap(),
            (1, 1) => write!(s, "{var}").unwrap(),
            (_, 1) => write!(s, "{d}*{var}").unwrap(),
            (1, _) => write!(s, "{var}^{i}").unwrap(),
            _ => write!(s, "{d}*{var}^{i}").unwrap(),
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn render_ext(lo: String, hi: String, var: &str) -> String {
    if hi == "0" {
        return lo;
    }
    let hi_part = if hi == "1" {
        var.to_string()
    } else if hi.contains('+') || hi.contains('-') {
        format!("({hi})*{var}")
    } else {
        format!("{hi}*{var}")
    };
    if lo == "0" {
        hi_part
    } else {
        format!("{hi_part}+{lo}")
    }
}

struct ElemParser<'a> {
    tower: &'a FieldTower,
    src: &'a [u8],
    pos: usize,
}

impl ElemParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Fel, FieldError> {
        let t = self.tower;
        let mut acc = t.zero(Level::Quartic);
        let mut negate = matches!(self.peek(), Some(b'-'));
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        loop {
            let term = self.term()?;
            acc = t.add(acc, if negate { t.neg(term) } else { term });
            match self.peek() {
                Some(b'+') => {
                    negate = false;
                    self.pos += 1;
                }
                Some(b'-') => {
                    negate = true;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Fel, FieldError> {
        let t = self.tower;
        let mut acc = t.one(Level::Quartic);
        loop {
            let f = self.factor()?;
            acc = t.mul(acc, f);
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Fel, FieldError> {
        let t = self.tower;
        let c = self.peek().ok_or_else(|| FieldError::Parse("unexpected end of input".into()))?;
        let base = match c {
            b'(' => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(FieldError::Parse("missing closing paren".into()));
                }
                self.pos += 1;
                v
            }
            b'0'..=b'9' => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let n: i64 = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| FieldError::Parse("bad integer".into()))?;
                t.from_int(n, Level::Quartic)
            }
            b'u' => {
                self.pos += 1;
                if t.e == 1 {
                    return Err(FieldError::Parse("`u` only exists when e > 1".into()));
                }
                Fel { level: Level::Quartic, code: t.p as u32 }
            }
            b't' => {
                self.pos += 1;
                t.embed(t.tau(), Level::Quartic)
            }
            b'w' => {
                self.pos += 1;
                Fel { level: Level::Quartic, code: (t.q * t.q) as u32 }
            }
            other => return Err(FieldError::Parse(format!("unexpected `{}`", other as char))),
        };
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let s = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if s == self.pos {
                return Err(FieldError::Parse("missing exponent".into()));
            }
            let n: u64 = std::str::from_utf8(&self.src[s..self.pos]).unwrap().parse().unwrap();
            return Ok(t.pow(base, n));
        }
        Ok(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> FieldTower {
        FieldTower::default_for_q(3).unwrap()
    }

    #[test]
    fn gf9_defining_relations() {
        let t = q3();
        let tau = t.tau();
        // τ² = τ + 1 from x² − x − 1
        assert_eq!(t.mul(tau, tau), t.add(tau, t.one(Level::Quad)));
        // τ³ = 2τ + 1
        let tau3 = t.pow(tau, 3);
        let two = t.from_int(2, Level::Quad);
        assert_eq!(tau3, t.add(t.mul(two, tau), t.one(Level::Quad)));
        // τ + τ³ = 1, τ·τ³ = 2 = −1
        assert_eq!(t.add(tau, tau3), t.one(Level::Quad));
        assert_eq!(t.mul(tau, tau3), two);
        // (τ+1)(τ+2) = τ
        let a = t.add(tau, t.one(Level::Quad));
        let b = t.add(tau, two);
        assert_eq!(t.mul(a, b), tau);
    }

    #[test]
    fn reducible_polynomials_rejected() {
        // x² − 1 = (x−1)(x+1) over GF(3)
        assert_eq!(FieldTower::build(3, 1, &[1], &[0], None).unwrap_err(), FieldError::Reducible);
        // x² − x − 2 = (x−2)(x+1) over GF(5)
        assert_eq!(FieldTower::build(5, 1, &[2], &[1], None).unwrap_err(), FieldError::Reducible);
        assert_eq!(FieldTower::build(4, 1, &[1], &[1], None).unwrap_err(), FieldError::NotPrime(4));
    }

    #[test]
    fn irreducible_but_imprimitive_rejected() {
        // x² + 1 over GF(3): irreducible, but the root has order 4 < 8
        let err = FieldTower::build(3, 1, &[2], &[0], None).unwrap_err();
        assert_eq!(err, FieldError::NotPrimitive { order: 4, need: 8 });
    }

    #[test]
    fn default_towers_have_primitive_tau() {
        for q in [2u64, 3, 4, 5, 7] {
            let t = FieldTower::default_for_q(q).unwrap();
            assert_eq!(t.q(), q);
            assert_eq!(t.order(t.tau()), q * q - 1, "q={q}");
        }
    }

    #[test]
    fn frobenius_structure() {
        let t = q3();
        let tau = t.tau();
        // GF(9): τ ↦ τ³ = 2τ + 1
        assert_eq!(t.frob_q(tau), t.pow(tau, 3));
        // base elements fixed
        for a in t.elements(Level::Base) {
            assert_eq!(t.frob_q(a), a);
        }
        // involution on GF(9); order-4 orbit closes on GF(81)
        for a in t.elements(Level::Quad) {
            assert_eq!(t.frob_q(t.frob_q(a)), a);
        }
        for a in t.elements(Level::Quartic) {
            let a4 = t.frob_q(t.frob_q(t.frob_q(t.frob_q(a))));
            assert_eq!(a4, a);
            assert_eq!(t.frob_q2(a), t.frob_q(t.frob_q(a)));
        }
        // fixed fields are exactly the lower levels
        let fixed_q = t.elements(Level::Quad).filter(|&a| t.frob_q(a) == a).count();
        assert_eq!(fixed_q as u64, t.q());
        let fixed_q2 = t.elements(Level::Quartic).filter(|&a| t.frob_q2(a) == a).count();
        assert_eq!(fixed_q2 as u64, t.q() * t.q());
    }

    #[test]
    fn frobenius_is_a_homomorphism() {
        let t = q3();
        let all: Vec<Fel> = t.elements(Level::Quad).collect();
        for &a in &all {
            for &b in &all {
                assert_eq!(t.frob_q(t.add(a, b)), t.add(t.frob_q(a), t.frob_q(b)));
                assert_eq!(t.frob_q(t.mul(a, b)), t.mul(t.frob_q(a), t.frob_q(b)));
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for q in [2u64, 3, 4, 5, 7] {
            let t = FieldTower::default_for_q(q).unwrap();
            let all: Vec<Fel> = t.elements(Level::Base).collect();
            for &a in &all {
                assert_eq!(t.add(a, t.zero(Level::Base)), a);
                assert_eq!(t.mul(a, t.one(Level::Base)), a);
                if !a.is_zero() {
                    assert_eq!(t.mul(a, t.inv(a).unwrap()), t.one(Level::Base));
                }
                for &b in &all {
                    assert_eq!(t.add(a, b), t.add(b, a));
                    assert_eq!(t.mul(a, b), t.mul(b, a));
                    for &c in &all {
                        assert_eq!(t.add(t.add(a, b), c), t.add(a, t.add(b, c)));
                        assert_eq!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
                        assert_eq!(
                            t.mul(a, t.add(b, c)),
                            t.add(t.mul(a, b), t.mul(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn quad_components_round_trip() {
        let t = q3();
        for x in t.elements(Level::Quad) {
            let (x0, x1) = t.split(x);
            assert_eq!(x0.level, Level::Base);
            assert_eq!(x1.level, Level::Base);
            // x = x0 + x1·τ
            let back = t.add(t.embed(x0, Level::Quad), t.mul(t.embed(x1, Level::Quad), t.tau()));
            assert_eq!(back, x);
            assert_eq!(t.join(x0, x1, Level::Quad), x);
        }
    }

    #[test]
    fn embed_then_section_is_identity() {
        let t = q3();
        for a in t.elements(Level::Base) {
            let up = t.embed(a, Level::Quartic);
            assert_eq!(t.try_section(up, Level::Base), Some(a));
        }
        // a genuinely quad element does not section to base
        assert_eq!(t.try_section(t.tau(), Level::Base), None);
    }

    #[test]
    fn solve_quadratic_cases() {
        let t = q3();
        let one = t.one(Level::Quad);
        let zero = t.zero(Level::Quad);
        // x² − 1 → {1, −1}
        let roots = t.solve_quadratic(one, zero, t.neg(one)).unwrap();
        let set: Vec<u32> = roots.iter().map(|(r, _)| r.code()).collect();
        assert!(set.contains(&t.embed(one, Level::Quartic).code()));
        assert!(set.contains(&t.embed(t.neg(one), Level::Quartic).code()));
        // x² − τ → two roots of GF(81) squaring to τ
        let roots = t.solve_quadratic(one, zero, t.neg(t.tau())).unwrap();
        assert_eq!(roots.len(), 2);
        for (r, m) in &roots {
            assert_eq!(*m, 1);
            assert_eq!(t.mul(*r, *r), t.embed(t.tau(), Level::Quartic));
            assert!(t.try_section(*r, Level::Quad).is_none());
        }
        // (x − 1)² = x² − 2x + 1 → {1} with multiplicity 2
        let roots = t.solve_quadratic(one, t.from_int(-2, Level::Quad), one).unwrap();
        assert_eq!(roots, vec![(t.one(Level::Quartic), 2)]);
        // degenerate
        assert_eq!(
            t.solve_quadratic(zero, zero, one).unwrap_err(),
            FieldError::DegenerateQuadratic
        );
    }

    #[test]
    fn render_parse_round_trip() {
        let t = q3();
        for lv in Level::ALL {
            for a in t.elements(lv) {
                let s = t.render(a);
                assert_eq!(t.parse(&s, lv).unwrap(), a, "level {lv:?} repr `{s}`");
            }
        }
        let t4 = FieldTower::default_for_q(4).unwrap();
        for a in t4.elements(Level::Quad) {
            let s = t4.render(a);
            assert_eq!(t4.parse(&s, Level::Quad).unwrap(), a, "`{s}`");
        }
    }

    #[test]
    fn spec_round_trip() {
        let t = q3();
        let spec = t.spec_string();
        let t2 = FieldTower::from_spec(&spec).unwrap();
        assert_eq!(t2.q(), 3);
        assert_eq!(t2.spec_string(), spec);
    }
}
