//! Independent oracles shared by the integration tests.
//!
//! Everything here is exact: tableau coefficients are held as elements of
//! `Q(√6) = { a + b√6 : a, b rational }`, which covers both builtin RKFD
//! methods, and order conditions are re-evaluated from a separately typed
//! list by a small parser over the condition ids. None of it calls the
//! library's condition code.

#![allow(dead_code)]

use std::ops::{Add, Mul, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `a + b√6` with rational `a`, `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Q6 {
    pub a: BigRational,
    pub b: BigRational,
}

impl Q6 {
    pub fn r(p: i64, q: i64) -> Self {
        Self { a: rat(p, q), b: BigRational::zero() }
    }

    /// `p/q + (s/t)√6`
    pub fn new(p: i64, q: i64, s: i64, t: i64) -> Self {
        Self { a: rat(p, q), b: rat(s, t) }
    }

    pub fn zero() -> Self {
        Self::r(0, 1)
    }

    pub fn one() -> Self {
        Self::r(1, 1)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Nearest double, computed so that cancellation between `a` and `b√6`
    /// does not lose the result: `a + b√6 = (a² - 6b²) / (a - b√6)`.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap();
        let b = self.b.to_f64().unwrap();
        let direct = a + b * 6f64.sqrt();
        let conj = a - b * 6f64.sqrt();
        if self.b.is_zero() || direct.abs() >= conj.abs() {
            return direct;
        }
        let norm = &self.a * &self.a - rat(6, 1) * &self.b * &self.b;
        norm.to_f64().unwrap() / conj
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }
}

impl Add for &Q6 {
    type Output = Q6;
    fn add(self, o: &Q6) -> Q6 {
        Q6 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for &Q6 {
    type Output = Q6;
    fn sub(self, o: &Q6) -> Q6 {
        Q6 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl Mul for &Q6 {
    type Output = Q6;
    fn mul(self, o: &Q6) -> Q6 {
        Q6 {
            a: &self.a * &o.a + rat(6, 1) * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

/// Exact RKFD tableau.
#[derive(Debug, Clone)]
pub struct ExactRkfd {
    pub c: Vec<Q6>,
    pub a_hat: Vec<Vec<Q6>>,
    pub b: Vec<Q6>,
    pub bp: Vec<Q6>,
    pub bpp: Vec<Q6>,
    pub bppp: Vec<Q6>,
}

fn rkfd4(bp3: i64) -> ExactRkfd {
    let r = Q6::r;
    ExactRkfd {
        c: vec![r(0, 1), r(4, 11), r(17, 20)],
        a_hat: vec![
            vec![r(0, 1), r(0, 1), r(0, 1)],
            vec![r(-1, 5), r(0, 1), r(0, 1)],
            vec![r(19, 125), r(19, 125), r(0, 1)],
        ],
        b: vec![r(17, 200), r(-7, 75), r(1, 20)],
        bp: vec![r(1, 18), r(209, 1926), r(bp3, 1926)],
        bpp: vec![r(47, 408), r(847, 2568), r(100, 1819)],
        bppp: vec![r(47, 408), r(1331, 2568), r(2000, 5457)],
    }
}

/// The fourth-order method with `b'_3 = 6/1926`.
pub fn exact_rkfd4_printed() -> ExactRkfd {
    rkfd4(6)
}

/// The fourth-order method with `b'_3 = 5/1926`.
pub fn exact_rkfd4_corrected() -> ExactRkfd {
    rkfd4(5)
}

/// The fifth-order method; `c_{2,3} = 3/5 ± √6/10`.
pub fn exact_rkfd5() -> ExactRkfd {
    let r = Q6::r;
    ExactRkfd {
        c: vec![r(0, 1), Q6::new(3, 5, 1, 10), Q6::new(3, 5, -1, 10)],
        a_hat: vec![
            vec![r(0, 1), r(0, 1), r(0, 1)],
            vec![r(4059, 187793), r(0, 1), r(0, 1)],
            vec![r(-1502, 532215), r(1826, 569317), r(0, 1)],
        ],
        b: vec![r(19, 1080), Q6::new(13, 1080, -11, 2160), Q6::new(13, 1080, 11, 2160)],
        bp: vec![r(1, 18), Q6::new(1, 18, -1, 48), Q6::new(1, 18, 1, 48)],
        bpp: vec![r(1, 9), Q6::new(7, 36, -1, 18), Q6::new(7, 36, 1, 18)],
        bppp: vec![r(1, 9), Q6::new(4, 9, -1, 36), Q6::new(4, 9, 1, 36)],
    }
}

/// Conditions `(order, id, p, q)` meaning `weightᵀvector = p/q`.
///
/// Typed out independently of the library's catalog; only the id spelling
/// is shared so results can be matched up.
pub const CONDITIONS: [(u32, &str, i64, i64); 32] = [
    (1, "bppp.e", 1, 1),
    (2, "bppp.c", 1, 2),
    (2, "bpp.e", 1, 2),
    (3, "bppp.c2", 1, 3),
    (3, "bpp.c", 1, 6),
    (3, "bp.e", 1, 6),
    (4, "bppp.c3", 1, 4),
    (4, "bpp.c2", 1, 12),
    (4, "bp.c", 1, 24),
    (4, "b.e", 1, 24),
    (5, "bppp.c4", 1, 5),
    (5, "bppp.Ahat.e", 1, 120),
    (5, "bpp.c3", 1, 20),
    (5, "bp.c2", 1, 60),
    (5, "b.c", 1, 120),
    (6, "bppp.c5", 1, 6),
    (6, "bppp.Ahat.c", 1, 720),
    (6, "bppp.(c.Ahat.e)", 1, 144),
    (6, "bpp.c4", 1, 30),
    (6, "bpp.Ahat.e", 1, 720),
    (6, "bp.c3", 1, 120),
    (6, "b.c2", 1, 360),
    (7, "bppp.c6", 1, 7),
    (7, "bppp.(c.Ahat.c)", 1, 840),
    (7, "bppp.(c2.Ahat.e)", 1, 168),
    (7, "bppp.Ahat.c2", 1, 2520),
    (7, "bpp.c5", 1, 42),
    (7, "bpp.Ahat.c", 1, 5040),
    (7, "bpp.(c.Ahat.e)", 1, 1008),
    (7, "bp.c4", 1, 210),
    (7, "bp.Ahat.e", 1, 5040),
    (7, "b.c3", 1, 840),
];

impl ExactRkfd {
    fn weight(&self, name: &str) -> &[Q6] {
        match name {
            "b" => &self.b,
            "bp" => &self.bp,
            "bpp" => &self.bpp,
            "bppp" => &self.bppp,
            other => panic!("unknown weight {other}"),
        }
    }

    /// Parses `e | c | cK | Ahat.V | (V.V)` from the front of `s`.
    fn vector<'s>(&self, s: &'s str) -> (Vec<Q6>, &'s str) {
        if let Some(rest) = s.strip_prefix("Ahat.") {
            let (v, rest) = self.vector(rest);
            let av = self
                .a_hat
                .iter()
                .map(|row| row.iter().zip(&v).fold(Q6::zero(), |acc, (a, x)| &acc + &(a * x)))
                .collect();
            return (av, rest);
        }
        if let Some(rest) = s.strip_prefix('(') {
            let (u, rest) = self.vector(rest);
            let rest = rest.strip_prefix('.').expect("'.' inside product");
            let (v, rest) = self.vector(rest);
            let rest = rest.strip_prefix(')').expect("closing ')'");
            return (u.iter().zip(&v).map(|(x, y)| x * y).collect(), rest);
        }
        if let Some(rest) = s.strip_prefix('e') {
            return (vec![Q6::one(); self.c.len()], rest);
        }
        let rest = s.strip_prefix('c').expect("vector starts with e, c, Ahat or (");
        let digits = rest.chars().take_while(char::is_ascii_digit).count();
        let k = if digits == 0 { 1 } else { rest[..digits].parse().unwrap() };
        (self.c.iter().map(|c| c.pow(k)).collect(), &rest[digits..])
    }

    /// Exact `lhs - rhs` for a condition id.
    pub fn residual(&self, id: &str) -> Q6 {
        let (_, _, p, q) = CONDITIONS
            .iter()
            .find(|(_, i, ..)| *i == id)
            .unwrap_or_else(|| panic!("no condition {id}"));
        let (w, v) = id.split_once('.').unwrap();
        let (vec, rest) = self.vector(v);
        assert!(rest.is_empty(), "trailing input in {id}: {rest}");
        let lhs = self.weight(w).iter().zip(&vec).fold(Q6::zero(), |acc, (a, x)| &acc + &(a * x));
        &lhs - &Q6::r(*p, *q)
    }

    /// Largest order whose conditions (and all lower ones) are within `tol`.
    pub fn attained_order(&self, tol: f64) -> u32 {
        CONDITIONS
            .iter()
            .filter(|(_, id, ..)| self.residual(id).to_f64().abs() > tol)
            .map(|(order, ..)| order - 1)
            .min()
            .unwrap_or(7)
    }
}

/// True when `x` is the double nearest to `p/q`, checked exactly.
pub fn is_correctly_rounded(x: f64, p: i64, q: i64) -> bool {
    let target = rat(p, q);
    let err = (BigRational::from_float(x).unwrap() - &target).abs();
    // The smaller of the two neighbouring gaps, so binade edges stay strict.
    let m = x.abs();
    let gap = (f64::from_bits(m.to_bits() + 1) - m).min(if m > 0.0 { m - f64::from_bits(m.to_bits() - 1) } else { f64::MAX });
    let ulp = BigRational::from_float(gap).unwrap();
    err * rat(2, 1) <= ulp
}

/// Seven-point fourth difference, truncation O(h⁴).
pub fn fd4(g: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let w = [-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0];
    let sum: f64 = w.iter().enumerate().map(|(i, c)| c * g(x + (i as f64 - 3.0) * h)).sum();
    sum / (6.0 * h.powi(4))
}

/// Largest relative finite-difference ODE residual of a problem's exact
/// solution over ten interior points, relative to the largest `|f|` seen.
pub fn exact_solution_fd_residual(p: &rkfd::problems::Ivp4) -> f64 {
    let exact = p.exact().expect("problem has an exact solution").clone();
    let span = p.x_end() - p.x0();
    let h = 1e-2 * span.min(1.0);
    let xs: Vec<f64> = (1..=10).map(|i| p.x0() + span * i as f64 / 11.0).collect();
    let rhs: Vec<Vec<f64>> = xs.iter().map(|&x| p.eval(x, &exact(x)).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for comp in 0..p.dim() {
        let scale = rhs.iter().map(|r| r[comp].abs()).fold(1.0, f64::max);
        for (x, r) in xs.iter().zip(&rhs) {
            let g = |t: f64| exact(t)[comp];
            worst = worst.max((fd4(&g, *x, h) - r[comp]).abs() / scale);
        }
    }
    worst
}

/// Writes one line past the test harness's output capture so it shows up in
/// the plain `cargo test` log.
pub fn report(line: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
