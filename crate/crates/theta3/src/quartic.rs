//! Exact and floating arithmetic on linear forms and plane quartics:
//! Riemann models, derived bitangents, the thirteen alternative
//! presentations, the scaling-factor solve, the closed determinant formula,
//! and the determinant-ratio relations between Steiner-complex pairs.
//!
//! Everything is generic over [`Scalar`], so the same formulas run exactly
//! over the rationals and approximately over complex floats.

use crate::scalar::{close, rel_err, Scalar};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Monomial order for quartic coefficient vectors:
/// X⁴, X³Y, X³Z, X²Y², X²YZ, X²Z², XY³, XY²Z, XYZ², XZ³, Y⁴, Y³Z, Y²Z², YZ³, Z⁴.
pub const MONOMIALS: [(u8, u8, u8); 15] = [
    (4, 0, 0),
    (3, 1, 0),
    (3, 0, 1),
    (2, 2, 0),
    (2, 1, 1),
    (2, 0, 2),
    (1, 3, 0),
    (1, 2, 1),
    (1, 1, 2),
    (1, 0, 3),
    (0, 4, 0),
    (0, 3, 1),
    (0, 2, 2),
    (0, 1, 3),
    (0, 0, 4),
];

/// Same ordering convention one degree down: X², XY, XZ, Y², YZ, Z².
pub const QUAD_MONOMIALS: [(u8, u8, u8); 6] =
    [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)];

const LIN_MONOMIALS: [(u8, u8, u8); 3] = [(1, 0, 0), (0, 1, 0), (0, 0, 1)];

#[derive(Debug, Error, PartialEq)]
pub enum QuarticError {
    #[error("linear form must not be identically zero")]
    ZeroLine,
    #[error("model violates the relation X1+X2+X3 = Y1+Y2+Y3")]
    SumRelation,
    #[error("degenerate model: {0} are concurrent")]
    DegenerateTriple(String),
    #[error("vanishing determinant ({0})")]
    VanishingDeterminant(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("construction failed after {0} attempts")]
    Exhausted(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm<S: Scalar> {
    pub c: [S; 3],
}

impl<S: Scalar> LinearForm<S> {
    pub fn new(a: S, b: S, c: S) -> Self {
        LinearForm { c: [a, b, c] }
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Self {
        LinearForm::new(S::from_int(a), S::from_int(b), S::from_int(c))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| v.near_zero(0.0))
    }

    pub fn eval(&self, p: &[S; 3]) -> S {
        self.c[0].clone() * p[0].clone()
            + self.c[1].clone() * p[1].clone()
            + self.c[2].clone() * p[2].clone()
    }

    pub fn scaled(&self, k: &S) -> Self {
        LinearForm {
            c: [
                self.c[0].clone() * k.clone(),
                self.c[1].clone() * k.clone(),
                self.c[2].clone() * k.clone(),
            ],
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        LinearForm {
            c: [
                self.c[0].clone() + o.c[0].clone(),
                self.c[1].clone() + o.c[1].clone(),
                self.c[2].clone() + o.c[2].clone(),
            ],
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        LinearForm {
            c: [
                self.c[0].clone() - o.c[0].clone(),
                self.c[1].clone() - o.c[1].clone(),
                self.c[2].clone() - o.c[2].clone(),
            ],
        }
    }

    pub fn neg(&self) -> Self {
        LinearForm {
            c: [
                -self.c[0].clone(),
                -self.c[1].clone(),
                -self.c[2].clone(),
            ],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.c.iter().map(Scalar::approx_abs).fold(0.0, f64::max)
    }

    /// Proportionality as projective lines: all three 2x2 minors vanish.
    pub fn proportional_to(&self, o: &Self, tol: f64) -> bool {
        let scale = 1f64.max(self.sup_norm() * o.sup_norm());
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let minor = self.c[i].clone() * o.c[j].clone() - self.c[j].clone() * o.c[i].clone();
            if !minor.near_zero(tol * scale) {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic<S: Scalar> {
    pub c: [S; 6],
}

impl<S: Scalar> Quadratic<S> {
    pub fn zero() -> Self {
        Quadratic {
            c: std::array::from_fn(|_| S::zero()),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Quadratic {
            c: std::array::from_fn(|i| self.c[i].clone() + o.c[i].clone()),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Quadratic {
            c: std::array::from_fn(|i| self.c[i].clone() - o.c[i].clone()),
        }
    }

    pub fn scaled(&self, k: &S) -> Self {
        Quadratic {
            c: std::array::from_fn(|i| self.c[i].clone() * k.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuarticForm<S: Scalar> {
    pub c: [S; 15],
}

impl<S: Scalar> QuarticForm<S> {
    pub fn zero() -> Self {
        QuarticForm {
            c: std::array::from_fn(|_| S::zero()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| v.near_zero(0.0))
    }

    pub fn add(&self, o: &Self) -> Self {
        QuarticForm {
            c: std::array::from_fn(|i| self.c[i].clone() + o.c[i].clone()),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        QuarticForm {
            c: std::array::from_fn(|i| self.c[i].clone() - o.c[i].clone()),
        }
    }

    pub fn scaled(&self, k: &S) -> Self {
        QuarticForm {
            c: std::array::from_fn(|i| self.c[i].clone() * k.clone()),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.c.iter().map(Scalar::approx_abs).fold(0.0, f64::max)
    }

    pub fn eval(&self, p: &[S; 3]) -> S {
        let mut acc = S::zero();
        for (idx, (i, j, k)) in MONOMIALS.iter().enumerate() {
            let mut term = self.c[idx].clone();
            for _ in 0..*i {
                term = term * p[0].clone();
            }
            for _ in 0..*j {
                term = term * p[1].clone();
            }
            for _ in 0..*k {
                term = term * p[2].clone();
            }
            acc = acc + term;
        }
        acc
    }
}

fn mono_index(table: &[(u8, u8, u8)], e: (u8, u8, u8)) -> usize {
    table
        .iter()
        .position(|&m| m == e)
        .expect("exponent triple outside monomial table")
}

pub fn mul_lin<S: Scalar>(a: &LinearForm<S>, b: &LinearForm<S>) -> Quadratic<S> {
    let mut out = Quadratic::<S>::zero();
    for (ia, ea) in LIN_MONOMIALS.iter().enumerate() {
        for (ib, eb) in LIN_MONOMIALS.iter().enumerate() {
            let e = (ea.0 + eb.0, ea.1 + eb.1, ea.2 + eb.2);
            let idx = mono_index(&QUAD_MONOMIALS, e);
            out.c[idx] = out.c[idx].clone() + a.c[ia].clone() * b.c[ib].clone();
        }
    }
    out
}

pub fn mul_quad<S: Scalar>(a: &Quadratic<S>, b: &Quadratic<S>) -> QuarticForm<S> {
    let mut out = QuarticForm::<S>::zero();
    for (ia, ea) in QUAD_MONOMIALS.iter().enumerate() {
        for (ib, eb) in QUAD_MONOMIALS.iter().enumerate() {
            let e = (ea.0 + eb.0, ea.1 + eb.1, ea.2 + eb.2);
            let idx = mono_index(&MONOMIALS, e);
            out.c[idx] = out.c[idx].clone() + a.c[ia].clone() * b.c[ib].clone();
        }
    }
    out
}

/// Determinant of the 3x3 matrix whose rows are the coefficient vectors.
pub fn det3<S: Scalar>(a: &LinearForm<S>, b: &LinearForm<S>, c: &LinearForm<S>) -> S {
    let minor =
        |i: usize, j: usize| b.c[i].clone() * c.c[j].clone() - b.c[j].clone() * c.c[i].clone();
    a.c[0].clone() * minor(1, 2) - a.c[1].clone() * minor(0, 2) + a.c[2].clone() * minor(0, 1)
}

fn argmax_abs<S: Scalar>(vals: &[S]) -> usize {
    let mut best = 0;
    let mut best_abs = vals[0].approx_abs();
    for (i, v) in vals.iter().enumerate().skip(1) {
        let a = v.approx_abs();
        if a > best_abs {
            best = i;
            best_abs = a;
        }
    }
    best
}

/// (A1B1 + A2B2 - A3B3)² - 4·A1B1·A2B2 expanded, with no preconditions.
fn riemann_expression<S: Scalar>(x: &[LinearForm<S>; 3], y: &[LinearForm<S>; 3]) -> QuarticForm<S> {
    let u1 = mul_lin(&x[0], &y[0]);
    let u2 = mul_lin(&x[1], &y[1]);
    let u3 = mul_lin(&x[2], &y[2]);
    let s = u1.add(&u2).sub(&u3);
    mul_quad(&s, &s).sub(&mul_quad(&u1, &u2).scaled(&S::from_int(4)))
}

/// A sextuple of bitangent representatives (X₁,Y₁),(X₂,Y₂),(X₃,Y₃)
/// normalized so that X₁+X₂+X₃ = Y₁+Y₂+Y₃ exactly and no choice of one line
/// per pair is concurrent.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannModel<S: Scalar> {
    pub x: [LinearForm<S>; 3],
    pub y: [LinearForm<S>; 3],
}

impl<S: Scalar> RiemannModel<S> {
    pub fn new(
        x1: LinearForm<S>,
        y1: LinearForm<S>,
        x2: LinearForm<S>,
        y2: LinearForm<S>,
        x3: LinearForm<S>,
        y3: LinearForm<S>,
        tol: f64,
    ) -> Result<Self, QuarticError> {
        let x = [x1, x2, x3];
        let y = [y1, y2, y3];
        for l in x.iter().chain(y.iter()) {
            if l.is_zero() {
                return Err(QuarticError::ZeroLine);
            }
        }
        let sum = x[0].add(&x[1]).add(&x[2]).sub(&y[0]).sub(&y[1]).sub(&y[2]);
        let scale = x.iter().chain(y.iter()).map(LinearForm::sup_norm).fold(0.0, f64::max);
        if !sum.c.iter().all(|v| v.near_zero(tol * scale.max(1.0))) {
            return Err(QuarticError::SumRelation);
        }
        for pick in 0..8u8 {
            let names = ["X", "Y"];
            let t: Vec<&LinearForm<S>> = (0..3)
                .map(|i| if pick >> i & 1 == 0 { &x[i] } else { &y[i] })
                .collect();
            let d = det3(t[0], t[1], t[2]);
            let dscale = t.iter().map(|l| l.sup_norm()).product::<f64>().max(1.0);
            if d.near_zero(tol * dscale) {
                let label = (0..3)
                    .map(|i| format!("{}{}", names[(pick >> i & 1) as usize], i + 1))
                    .collect::<Vec<_>>()
                    .join(",");
                return Err(QuarticError::DegenerateTriple(label));
            }
        }
        Ok(RiemannModel { x, y })
    }

    /// (X₁Y₁ + X₂Y₂ - X₃Y₃)² - 4·X₁Y₁·X₂Y₂, expanded.
    pub fn quartic(&self) -> QuarticForm<S> {
        riemann_expression(&self.x, &self.y)
    }

    /// The four derived bitangents W, Z₁, Z₂, Z₃.  Under the plus
    /// normalization enforced by `new`, the pair representatives Y_i must be
    /// negated inside the Z's (projectively the same pairs; the classical
    /// formulas presuppose the minus normalization):
    /// W = X₁+X₂+X₃, Z₁ = X₁-Y₂-Y₃, Z₂ = -Y₁+X₂-Y₃, Z₃ = -Y₁-Y₂+X₃.
    pub fn derived_bitangents(&self) -> [LinearForm<S>; 4] {
        let w = self.x[0].add(&self.x[1]).add(&self.x[2]);
        let z1 = self.x[0].sub(&self.y[1]).sub(&self.y[2]);
        let z2 = self.x[1].sub(&self.y[0]).sub(&self.y[2]);
        let z3 = self.x[2].sub(&self.y[0]).sub(&self.y[1]);
        [w, z1, z2, z3]
    }
}

pub fn riemann_quartic<S: Scalar>(
    x1: LinearForm<S>,
    y1: LinearForm<S>,
    x2: LinearForm<S>,
    y2: LinearForm<S>,
    x3: LinearForm<S>,
    y3: LinearForm<S>,
    tol: f64,
) -> Result<QuarticForm<S>, QuarticError> {
    Ok(RiemannModel::new(x1, y1, x2, y2, x3, y3, tol)?.quartic())
}

/// λ with Q₂ = λ·Q₁ when one exists (exact over rationals, within
/// `tol`-relative per coefficient over floats).
pub fn proportional<S: Scalar>(
    q1: &QuarticForm<S>,
    q2: &QuarticForm<S>,
    tol: f64,
) -> Option<S> {
    proportionality_error(q1, q2).and_then(|(lam, err, exact)| {
        if exact || err <= tol {
            Some(lam)
        } else {
            None
        }
    })
}

/// The best proportionality factor (pivoted at the largest coefficient of
/// `q1`) together with the relative sup-norm mismatch.  The `bool` reports
/// whether every coefficient matched under the backend's exact zero test.
pub fn proportionality_error<S: Scalar>(
    q1: &QuarticForm<S>,
    q2: &QuarticForm<S>,
) -> Option<(S, f64, bool)> {
    if q1.is_zero() {
        return None;
    }
    let p = argmax_abs(&q1.c);
    let lam = q2.c[p].clone() / q1.c[p].clone();
    let scale = q2
        .sup_norm()
        .max(lam.approx_abs() * q1.sup_norm())
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    let mut exact = true;
    for i in 0..15 {
        let diff = q2.c[i].clone() - lam.clone() * q1.c[i].clone();
        if !diff.near_zero(0.0) {
            exact = false;
        }
        worst = worst.max(diff.approx_abs() / scale);
    }
    Some((lam, worst, exact))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Tangency {
    Bitangent,
    NotBitangent,
    /// The restriction of the quartic to the line vanishes identically: the
    /// line is a component, not a bitangent.
    Component,
}

fn binmul<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    out
}

fn binpow<S: Scalar>(base: &[S], n: u8) -> Vec<S> {
    let mut out = vec![S::one()];
    for _ in 0..n {
        out = binmul(&out, base);
    }
    out
}

/// Restrict `q` to the line `l`: parameterize the line by two independent
/// points and expand into a binary quartic b₀s⁴ + b₁s³t + ... + b₄t⁴.
fn restrict_to_line<S: Scalar>(
    q: &QuarticForm<S>,
    l: &LinearForm<S>,
) -> Result<([S; 5], f64), QuarticError> {
    if l.is_zero() {
        return Err(QuarticError::ZeroLine);
    }
    let i0 = argmax_abs(&l.c);
    let others: Vec<usize> = (0..3).filter(|&i| i != i0).collect();
    // point_j = c_{i0}·e_j - c_j·e_{i0} lies on the line and stays in the ring
    let mut pts = [[S::zero(), S::zero(), S::zero()], [S::zero(), S::zero(), S::zero()]];
    for (slot, &j) in others.iter().enumerate() {
        pts[slot][j] = l.c[i0].clone();
        pts[slot][i0] = -l.c[j].clone();
    }
    // coordinate m restricted to the line is the binary linear form
    // pts[0][m]·s + pts[1][m]·t
    let coord: Vec<[S; 2]> = (0..3).map(|m| [pts[0][m].clone(), pts[1][m].clone()]).collect();
    let mut b = [S::zero(), S::zero(), S::zero(), S::zero(), S::zero()];
    for (idx, (i, j, k)) in MONOMIALS.iter().enumerate() {
        if q.c[idx].near_zero(0.0) {
            continue;
        }
        let term = binmul(
            &binmul(&binpow(&coord[0], *i), &binpow(&coord[1], *j)),
            &binpow(&coord[2], *k),
        );
        debug_assert_eq!(term.len(), 5);
        for (m, t) in term.into_iter().enumerate() {
            b[m] = b[m].clone() + q.c[idx].clone() * t;
        }
    }
    let point_scale = pts
        .iter()
        .flatten()
        .map(Scalar::approx_abs)
        .fold(0.0, f64::max)
        .max(1.0);
    Ok((b, q.sup_norm().max(1.0) * point_scale.powi(4)))
}

/// Is the restriction of `q` to `l` a nonzero scalar times the square of a
/// binary quadratic?  Exact over rationals; over floats the square-fit
/// residual must stay below `tol` times the sup norm of the normalized
/// restriction.
pub fn is_bitangent<S: Scalar>(
    q: &QuarticForm<S>,
    l: &LinearForm<S>,
    tol: f64,
) -> Result<Tangency, QuarticError> {
    let (b, zero_scale) = restrict_to_line(q, l)?;
    if b.iter().all(|v| v.near_zero(tol * zero_scale)) {
        return Ok(Tangency::Component);
    }
    // move a point where the restriction does not vanish to (s,t)=(1,0):
    // q(1,k) = sum_j b_j k^j, and a nonzero binary quartic has at most four
    // roots, so one of k = 0..4 works
    let vals: Vec<S> = (0..5i64)
        .map(|k| {
            let kk = S::from_int(k);
            let mut acc = S::zero();
            for j in (0..5usize).rev() {
                acc = acc * kk.clone() + b[j].clone();
            }
            acc
        })
        .collect();
    let k = argmax_abs(&vals) as i64;
    // substitute t -> t + k·s; the new leading coefficient is q(1,k) != 0
    let s_lin = [S::one(), S::zero()];
    let t_lin = [S::from_int(k), S::one()];
    let mut bt = [S::zero(), S::zero(), S::zero(), S::zero(), S::zero()];
    for (j, bj) in b.iter().enumerate() {
        let term = binmul(&binpow(&s_lin, (4 - j) as u8), &binpow(&t_lin, j as u8));
        for (m, t) in term.into_iter().enumerate() {
            bt[m] = bt[m].clone() + bj.clone() * t;
        }
    }
    let lead = bt[0].clone();
    if lead.near_zero(0.0) {
        // numerically possible only for restrictions below the component
        // threshold, which were already returned above
        return Ok(Tangency::NotBitangent);
    }
    let c: Vec<S> = bt.iter().map(|v| v.clone() / lead.clone()).collect();
    let two = S::from_int(2);
    let alpha = c[1].clone() / two.clone();
    let beta = (c[2].clone() - alpha.clone() * alpha.clone()) / two.clone();
    let r1 = c[3].clone() - two.clone() * alpha.clone() * beta.clone();
    let r2 = c[4].clone() - beta.clone() * beta.clone();
    let scale = c
        .iter()
        .map(Scalar::approx_abs)
        .chain([alpha.approx_abs(), beta.approx_abs() * beta.approx_abs()])
        .fold(1.0, f64::max);
    if r1.near_zero(tol * scale) && r2.near_zero(tol * scale) {
        Ok(Tangency::Bitangent)
    } else {
        Ok(Tangency::NotBitangent)
    }
}

/// Per-presentation outcome: the factor making the expansion proportional to
/// the model quartic (when it exists), both for the structurally forced
/// final term -4·AB·CD and, where the classical display differs, for the
/// displayed term.
#[derive(Clone, Debug)]
pub struct PresentationLine<S: Scalar> {
    pub index: usize,
    pub corrected_factor: Option<S>,
    pub printed_factor: Option<S>,
    pub printed_term_differs: bool,
}

#[derive(Clone, Debug)]
pub struct PresentationReport<S: Scalar> {
    pub lines: Vec<PresentationLine<S>>,
}

impl<S: Scalar> PresentationReport<S> {
    pub fn all_corrected_pass(&self) -> bool {
        self.lines.iter().all(|l| l.corrected_factor.is_some())
    }
}

/// Indices into the dictionary [X₁,X₂,X₃,Ỹ₁,Ỹ₂,Ỹ₃,W,Z₁,Z₂,Z₃] (Ỹ = -Y):
/// thirteen presentations ((A,B),(C,D),(E,F), displayed-term override).
#[allow(clippy::type_complexity)]
const PRESENTATIONS: [(
    (usize, usize),
    (usize, usize),
    (usize, usize),
    Option<(usize, usize, usize, usize)>,
); 13] = [
    ((0, 4), (1, 3), (6, 9), None),
    ((0, 5), (2, 3), (6, 8), None),
    ((1, 5), (2, 4), (6, 7), None),
    ((0, 1), (3, 4), (7, 8), None),
    ((0, 2), (3, 5), (7, 9), None),
    ((1, 2), (4, 5), (8, 9), Some((0, 2, 3, 5))),
    ((0, 6), (4, 9), (5, 8), None),
    ((1, 6), (3, 9), (5, 7), None),
    ((2, 6), (3, 8), (4, 7), None),
    ((0, 9), (4, 6), (2, 7), None),
    ((0, 8), (5, 6), (1, 7), None),
    ((0, 7), (1, 8), (2, 9), None),
    ((3, 7), (4, 8), (5, 9), Some((0, 3, 4, 8))),
];

/// Expand each of the thirteen alternative presentations
/// (AB + CD - EF)² - 4·AB·CD of the model quartic and test proportionality.
/// Lines 6 and 13 carry a displayed final term that differs from the forced
/// -4·AB·CD; both versions are reported.
pub fn verify_presentations<S: Scalar>(model: &RiemannModel<S>, tol: f64) -> PresentationReport<S> {
    let q = model.quartic();
    let [w, z1, z2, z3] = model.derived_bitangents();
    let dict: [LinearForm<S>; 10] = [
        model.x[0].clone(),
        model.x[1].clone(),
        model.x[2].clone(),
        model.y[0].neg(),
        model.y[1].neg(),
        model.y[2].neg(),
        w,
        z1,
        z2,
        z3,
    ];
    let four = S::from_int(4);
    let mut lines = Vec::with_capacity(13);
    for (i, ((a, b), (c, d), (e, f), printed)) in PRESENTATIONS.iter().enumerate() {
        let ab = mul_lin(&dict[*a], &dict[*b]);
        let cd = mul_lin(&dict[*c], &dict[*d]);
        let ef = mul_lin(&dict[*e], &dict[*f]);
        let sq = ab.add(&cd).sub(&ef);
        let square = mul_quad(&sq, &sq);
        let corrected = square.sub(&mul_quad(&ab, &cd).scaled(&four));
        let corrected_factor = proportional(&q, &corrected, tol);
        let printed_factor = match printed {
            None => corrected_factor.clone(),
            Some((p1, p2, p3, p4)) => {
                let t1 = mul_lin(&dict[*p1], &dict[*p2]);
                let t2 = mul_lin(&dict[*p3], &dict[*p4]);
                let displayed = square.sub(&mul_quad(&t1, &t2).scaled(&four));
                proportional(&q, &displayed, tol)
            }
        };
        lines.push(PresentationLine {
            index: i + 1,
            corrected_factor,
            printed_factor,
            printed_term_differs: printed.is_some(),
        });
    }
    PresentationReport { lines }
}

/// Rescaling factors turning six bitangent representatives into the
/// normalization adapted to a seventh line: ᾱ_iX_i sum to X₇ and β̄_iY_i to
/// -X₇.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleFactors<S: Scalar> {
    pub alpha: [S; 3],
    pub beta: [S; 3],
}

fn checked_det<S: Scalar>(
    a: &LinearForm<S>,
    b: &LinearForm<S>,
    c: &LinearForm<S>,
    label: &str,
    tol: f64,
) -> Result<S, QuarticError> {
    let d = det3(a, b, c);
    let scale = (a.sup_norm() * b.sup_norm() * c.sup_norm()).max(1.0);
    if d.near_zero(tol * scale) {
        return Err(QuarticError::VanishingDeterminant(label.to_string()));
    }
    Ok(d)
}

/// α₁ = (X₇X₂X₃)/(X₁X₂X₃), β₁ = -(X₇Y₂Y₃)/(Y₁Y₂Y₃), and cyclically, with
/// the seventh-line factor normalized to one.
pub fn rescale_factors<S: Scalar>(
    x: &[LinearForm<S>; 3],
    y: &[LinearForm<S>; 3],
    x7: &LinearForm<S>,
    tol: f64,
) -> Result<ScaleFactors<S>, QuarticError> {
    let dx = checked_det(&x[0], &x[1], &x[2], "X1 X2 X3", tol)?;
    let dy = checked_det(&y[0], &y[1], &y[2], "Y1 Y2 Y3", tol)?;
    let n1 = checked_det(x7, &x[1], &x[2], "X7 X2 X3", tol)?;
    let n2 = checked_det(&x[0], x7, &x[2], "X1 X7 X3", tol)?;
    let n3 = checked_det(&x[0], &x[1], x7, "X1 X2 X7", tol)?;
    let m1 = checked_det(x7, &y[1], &y[2], "X7 Y2 Y3", tol)?;
    let m2 = checked_det(&y[0], x7, &y[2], "Y1 X7 Y3", tol)?;
    let m3 = checked_det(&y[0], &y[1], x7, "Y1 Y2 X7", tol)?;
    Ok(ScaleFactors {
        alpha: [
            n1 / dx.clone(),
            n2 / dx.clone(),
            n3 / dx,
        ],
        beta: [
            -(m1 / dy.clone()),
            -(m2 / dy.clone()),
            -(m3 / dy),
        ],
    })
}

/// The closed determinant formula: with
/// λ_i = (X₇-replaced x-determinant)·(X₇-replaced y-determinant) /
/// ((X₁X₂X₃)(Y₁Y₂Y₃)), the quartic is
/// (λ₁X₁Y₁ + λ₂X₂Y₂ - λ₃X₃Y₃)² - 4λ₁λ₂·X₁Y₁·X₂Y₂.
pub fn quartic_from_bitangents<S: Scalar>(
    x: &[LinearForm<S>; 3],
    y: &[LinearForm<S>; 3],
    x7: &LinearForm<S>,
    tol: f64,
) -> Result<QuarticForm<S>, QuarticError> {
    let f = rescale_factors(x, y, x7, tol)?;
    let lam: [S; 3] = std::array::from_fn(|i| -(f.alpha[i].clone() * f.beta[i].clone()));
    let u1 = mul_lin(&x[0].scaled(&lam[0]), &y[0]);
    let u2 = mul_lin(&x[1].scaled(&lam[1]), &y[1]);
    let u3 = mul_lin(&x[2].scaled(&lam[2]), &y[2]);
    let s = u1.add(&u2).sub(&u3);
    Ok(mul_quad(&s, &s).sub(&mul_quad(&u1, &u2).scaled(&S::from_int(4))))
}

/// The four determinant-ratio products of the pair-ratio relation, one per
/// frame (X₁X₂), (X₁Y₂), (X₂Y₁), (Y₁Y₂), and whether they agree.
#[derive(Clone, Debug)]
pub struct DoblesReport<S: Scalar> {
    pub values: [S; 4],
    pub holds: bool,
    pub max_rel_err: f64,
}

/// Four pairs from one Steiner complex: check
/// (X₃f₁f₂)(Y₃f₁f₂) / (X₄f₁f₂)(Y₄f₁f₂) is the same for all four frames
/// f₁f₂ drawn from the first two pairs.
pub fn verify_dobles<S: Scalar>(
    pairs: &[[LinearForm<S>; 2]; 4],
    tol: f64,
) -> Result<DoblesReport<S>, QuarticError> {
    let frames = [
        (&pairs[0][0], &pairs[1][0], "X1 X2"),
        (&pairs[0][0], &pairs[1][1], "X1 Y2"),
        (&pairs[1][0], &pairs[0][1], "X2 Y1"),
        (&pairs[0][1], &pairs[1][1], "Y1 Y2"),
    ];
    let mut values = Vec::with_capacity(4);
    for (f1, f2, name) in frames {
        let num = det3(&pairs[2][0], f1, f2) * det3(&pairs[2][1], f1, f2);
        let d1 = checked_det(&pairs[3][0], f1, f2, &format!("X4 {name}"), tol)?;
        let d2 = checked_det(&pairs[3][1], f1, f2, &format!("Y4 {name}"), tol)?;
        values.push(num / (d1 * d2));
    }
    let values: [S; 4] = values.try_into().expect("four frames");
    let mut holds = true;
    let mut max_err = 0.0f64;
    for v in &values[1..] {
        if !close(&values[0], v, tol) {
            holds = false;
        }
        max_err = max_err.max(rel_err(&values[0], v));
    }
    Ok(DoblesReport {
        values,
        holds,
        max_rel_err: max_err,
    })
}

/// Both ratio relations tying a pair of one complex to a pair of a
/// syzygetic complex.
#[derive(Clone, Debug)]
pub struct SimplesReport<S: Scalar> {
    pub lhs1: S,
    pub rhs1: S,
    pub lhs2: S,
    pub rhs2: S,
    pub rel1_holds: bool,
    pub rel2_holds: bool,
}

impl<S: Scalar> SimplesReport<S> {
    pub fn pass(&self) -> bool {
        self.rel1_holds && self.rel2_holds
    }
}

/// (X₂X₃X₇)/(X₁X₃X₇) = (X₂Y₃Y₇)/(X₁Y₃Y₇) and
/// (Y₂X₃Y₇)/(Y₁X₃Y₇) = (Y₂Y₃X₇)/(Y₁Y₃X₇).
pub fn verify_simples<S: Scalar>(
    x: &[LinearForm<S>; 3],
    y: &[LinearForm<S>; 3],
    x7: &LinearForm<S>,
    y7: &LinearForm<S>,
    tol: f64,
) -> Result<SimplesReport<S>, QuarticError> {
    let d1 = checked_det(&x[0], &x[2], x7, "X1 X3 X7", tol)?;
    let d2 = checked_det(&x[0], &y[2], y7, "X1 Y3 Y7", tol)?;
    let d3 = checked_det(&y[0], &x[2], y7, "Y1 X3 Y7", tol)?;
    let d4 = checked_det(&y[0], &y[2], x7, "Y1 Y3 X7", tol)?;
    let lhs1 = det3(&x[1], &x[2], x7) / d1;
    let rhs1 = det3(&x[1], &y[2], y7) / d2;
    let lhs2 = det3(&y[1], &x[2], y7) / d3;
    let rhs2 = det3(&y[1], &y[2], x7) / d4;
    let rel1_holds = close(&lhs1, &rhs1, tol);
    let rel2_holds = close(&lhs2, &rhs2, tol);
    Ok(SimplesReport {
        lhs1,
        rhs1,
        lhs2,
        rhs2,
        rel1_holds,
        rel2_holds,
    })
}

type Rat = BigRational;

fn rat_line(rng: &mut ChaCha8Rng) -> LinearForm<Rat> {
    LinearForm::from_ints(
        rng.gen_range(-5..=5),
        rng.gen_range(-5..=5),
        rng.gen_range(-5..=5),
    )
}

/// Seeded random exact model: integer lines X₁,X₂,X₃,Y₁,Y₂ with
/// Y₃ = X₁+X₂+X₃-Y₁-Y₂, redrawn until the model validates and the
/// determinant denominators of the pair-ratio relations are nonzero.
pub fn random_model(seed: u64) -> RiemannModel<Rat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let x1 = rat_line(&mut rng);
        let x2 = rat_line(&mut rng);
        let x3 = rat_line(&mut rng);
        let y1 = rat_line(&mut rng);
        let y2 = rat_line(&mut rng);
        let y3 = x1.add(&x2).add(&x3).sub(&y1).sub(&y2);
        let Ok(model) = RiemannModel::new(
            x1.clone(),
            y1.clone(),
            x2.clone(),
            y2.clone(),
            x3.clone(),
            y3.clone(),
            0.0,
        ) else {
            continue;
        };
        // syzygetic-relation denominators for the companion pair
        // (X7, Y7) = (W, -Y1-Y2+X3)
        let x7 = x1.add(&x2).add(&x3);
        let y7 = x3.sub(&y1).sub(&y2);
        let dens_ok = [
            det3(&x1, &x3, &x7),
            det3(&x1, &y3, &y7),
            det3(&y1, &x3, &y7),
            det3(&y1, &y3, &x7),
        ]
        .iter()
        .all(|d| !d.is_zero());
        let derived_ok = model.derived_bitangents().iter().all(|l| !l.is_zero());
        if dens_ok && derived_ok {
            return model;
        }
    }
}

/// Reduced row echelon form over the rationals; returns the pivot columns.
/// Only the first `cols` columns are eliminated (extra columns ride along as
/// an augmented right-hand side).
fn rref(m: &mut [Vec<Rat>], cols: usize) -> Vec<usize> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].clone();
        for j in c..m[r].len() {
            m[r][j] = &m[r][j] / &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..m[i].len() {
                    let t = &m[r][j] * &f;
                    m[i][j] = &m[i][j] - &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// A designed Steiner configuration with a rational fourth pair: unit
/// X-lines, Y-lines solved so one member of the contact-conic family
/// degenerates into the rational line pair (X₄, Y₄).
#[derive(Clone, Debug)]
pub struct DoblesInstance {
    pub x: [LinearForm<Rat>; 3],
    pub y: [LinearForm<Rat>; 3],
    pub x4: LinearForm<Rat>,
    pub y4: LinearForm<Rat>,
}

impl DoblesInstance {
    pub fn pairs(&self) -> [[LinearForm<Rat>; 2]; 4] {
        [
            [self.x[0].clone(), self.y[0].clone()],
            [self.x[1].clone(), self.y[1].clone()],
            [self.x[2].clone(), self.y[2].clone()],
            [self.x4.clone(), self.y4.clone()],
        ]
    }

    pub fn quartic(&self) -> QuarticForm<Rat> {
        riemann_expression(&self.x, &self.y)
    }
}

fn cross3(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Symmetric matrix of the conic L·M as a 6-vector in `QUAD_MONOMIALS`
/// order converted to matrix entries (m00, m01, m02, m11, m12, m22).
fn conic_entries(q: &Quadratic<Rat>) -> [Rat; 6] {
    let half = Rat::new(1.into(), 2.into());
    [
        q.c[0].clone(),
        &q.c[1] * &half,
        &q.c[2] * &half,
        q.c[3].clone(),
        &q.c[4] * &half,
        q.c[5].clone(),
    ]
}

fn attempt_dobles(
    x0: i64,
    y0: i64,
    n: [i64; 3],
    p: [i64; 3],
    frees: [i64; 5],
) -> Option<DoblesInstance> {
    let x: [LinearForm<Rat>; 3] = [
        LinearForm::from_ints(1, 0, 0),
        LinearForm::from_ints(0, 1, 0),
        LinearForm::from_ints(0, 0, 1),
    ];
    let coef = [
        Rat::from_int(x0 * (x0 - y0)),
        Rat::from_int(y0 * (y0 - x0)),
        Rat::from_int(x0 * y0),
    ];
    // unknowns u0..u8 = coefficients of Y1, Y2, Y3; the conic matrix of
    // c1·X1Y1 + c2·X2Y2 + c3·X3Y3 is linear in them, giving four homogeneous
    // conditions: kernel vector n, and the point p on the conic
    let mut a = vec![vec![Rat::zero(); 9]; 4];
    for k in 0..9 {
        let mut y: [LinearForm<Rat>; 3] = [
            LinearForm::from_ints(0, 0, 0),
            LinearForm::from_ints(0, 0, 0),
            LinearForm::from_ints(0, 0, 0),
        ];
        y[k / 3].c[k % 3] = Rat::one();
        let mut quad = Quadratic::zero();
        for i in 0..3 {
            quad = quad.add(&mul_lin(&x[i], &y[i]).scaled(&coef[i]));
        }
        let e = conic_entries(&quad);
        let m = [
            [e[0].clone(), e[1].clone(), e[2].clone()],
            [e[1].clone(), e[3].clone(), e[4].clone()],
            [e[2].clone(), e[4].clone(), e[5].clone()],
        ];
        for r in 0..3 {
            a[r][k] = (0..3).map(|j| &m[r][j] * &Rat::from_int(n[j])).sum();
        }
        a[3][k] = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| &(&m[i][j] * &Rat::from_int(p[i])) * &Rat::from_int(p[j]))
            .sum();
    }
    let pivots = rref(&mut a, 9);
    if pivots.len() != 4 {
        return None;
    }
    let free_cols: Vec<usize> = (0..9).filter(|c| !pivots.contains(c)).collect();
    debug_assert_eq!(free_cols.len(), 5);
    let mut u = vec![Rat::zero(); 9];
    for (fc, val) in free_cols.iter().zip(frees.iter()) {
        u[*fc] = Rat::from_int(*val);
    }
    for (r, pc) in pivots.iter().enumerate() {
        let mut v = Rat::zero();
        for fc in &free_cols {
            v -= &a[r][*fc] * &u[*fc];
        }
        u[*pc] = v;
    }
    let y: [LinearForm<Rat>; 3] = std::array::from_fn(|i| {
        LinearForm::new(u[3 * i].clone(), u[3 * i + 1].clone(), u[3 * i + 2].clone())
    });
    if y.iter().any(LinearForm::is_zero) {
        return None;
    }
    // the solved conic: must have rank exactly 2 (rank <= 2 is forced by the
    // kernel condition)
    let mut quad = Quadratic::zero();
    for i in 0..3 {
        quad = quad.add(&mul_lin(&x[i], &y[i]).scaled(&coef[i]));
    }
    let e = conic_entries(&quad);
    let m = [
        [e[0].clone(), e[1].clone(), e[2].clone()],
        [e[1].clone(), e[3].clone(), e[4].clone()],
        [e[2].clone(), e[4].clone(), e[5].clone()],
    ];
    let mut rank2 = false;
    'minor: for i1 in 0..3 {
        for i2 in i1 + 1..3 {
            for j1 in 0..3 {
                for j2 in j1 + 1..3 {
                    let minor = &(&m[i1][j1] * &m[i2][j2]) - &(&m[i1][j2] * &m[i2][j1]);
                    if !minor.is_zero() {
                        rank2 = true;
                        break 'minor;
                    }
                }
            }
        }
    }
    if !rank2 {
        return None;
    }
    let x4c = cross3(n, p);
    if x4c == [0, 0, 0] {
        return None;
    }
    let x4 = LinearForm::<Rat>::from_ints(x4c[0], x4c[1], x4c[2]);
    // exact division quad = X4 · Y4: six linear equations in the three
    // coefficients of Y4, augmented solve with consistency check
    let (a4, b4, c4) = (x4.c[0].clone(), x4.c[1].clone(), x4.c[2].clone());
    let zero = Rat::zero();
    let mut sys = vec![
        vec![a4.clone(), zero.clone(), zero.clone(), quad.c[0].clone()],
        vec![b4.clone(), a4.clone(), zero.clone(), quad.c[1].clone()],
        vec![c4.clone(), zero.clone(), a4.clone(), quad.c[2].clone()],
        vec![zero.clone(), b4.clone(), zero.clone(), quad.c[3].clone()],
        vec![zero.clone(), c4.clone(), b4.clone(), quad.c[4].clone()],
        vec![zero.clone(), zero.clone(), c4.clone(), quad.c[5].clone()],
    ];
    let pivots = rref(&mut sys, 3);
    if pivots.len() != 3 {
        return None;
    }
    for row in &sys {
        if row[0].is_zero() && row[1].is_zero() && row[2].is_zero() && !row[3].is_zero() {
            return None;
        }
    }
    let mut y4c = [Rat::zero(), Rat::zero(), Rat::zero()];
    for (r, pc) in pivots.iter().enumerate() {
        y4c[*pc] = sys[r][3].clone();
    }
    let y4 = LinearForm::new(y4c[0].clone(), y4c[1].clone(), y4c[2].clone());
    if y4.is_zero() || x4.proportional_to(&y4, 0.0) {
        return None;
    }
    for l in x.iter().chain(y.iter()) {
        if x4.proportional_to(l, 0.0) || y4.proportional_to(l, 0.0) {
            return None;
        }
    }
    // every determinant appearing in the pair-ratio relation must be nonzero
    let frames = [
        (&x[0], &x[1]),
        (&x[0], &y[1]),
        (&x[1], &y[0]),
        (&y[0], &y[1]),
    ];
    for (f1, f2) in frames {
        for l in [&x[2], &y[2], &x4, &y4] {
            if det3(l, f1, f2).is_zero() {
                return None;
            }
        }
    }
    Some(DoblesInstance {
        x,
        y,
        x4,
        y4,
    })
}

/// Seeded construction of a Steiner configuration with an exact fourth pair.
/// Parameters (pencil member, demanded kernel vector, demanded point,
/// free coordinates) are drawn from a ChaCha8 stream and retried until every
/// nondegeneracy guard passes.
pub fn dobles_instance(seed: u64) -> Result<DoblesInstance, QuarticError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const MAX_ATTEMPTS: u32 = 256;
    for _ in 0..MAX_ATTEMPTS {
        let x0 = rng.gen_range(1..=3);
        let y0 = loop {
            let v = rng.gen_range(-4..=4);
            if v != 0 && v != x0 {
                break v;
            }
        };
        let n = loop {
            let v = [
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
            ];
            if v != [0, 0, 0] {
                break v;
            }
        };
        let p = loop {
            let v = [
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
            ];
            if v != [0, 0, 0] && cross3(n, v) != [0, 0, 0] {
                break v;
            }
        };
        let frees = [
            rng.gen_range(-4..=4),
            rng.gen_range(-4..=4),
            rng.gen_range(-4..=4),
            rng.gen_range(-4..=4),
            rng.gen_range(-4..=4),
        ];
        if let Some(inst) = attempt_dobles(x0, y0, n, p, frees) {
            return Ok(inst);
        }
    }
    Err(QuarticError::Exhausted(MAX_ATTEMPTS))
}

fn strip_comments(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
}

pub fn format_quartic<S: Scalar>(q: &QuarticForm<S>) -> String {
    let mut out = String::from("QUARTIC\n");
    for c in &q.c {
        out.push_str(&c.format_tokens());
        out.push('\n');
    }
    out
}

pub fn parse_quartic<S: Scalar>(text: &str) -> Result<QuarticForm<S>, QuarticError> {
    let mut tokens = strip_comments(text);
    match tokens.next() {
        Some("QUARTIC") => {}
        other => {
            return Err(QuarticError::Parse(format!(
                "expected QUARTIC header, found {other:?}"
            )))
        }
    }
    let mut c = Vec::with_capacity(15);
    for i in 0..15 {
        c.push(
            S::parse_tokens(&mut tokens)
                .map_err(|e| QuarticError::Parse(format!("coefficient {i}: {e}")))?,
        );
    }
    if tokens.next().is_some() {
        return Err(QuarticError::Parse("trailing tokens after 15 coefficients".into()));
    }
    let q = QuarticForm {
        c: c.try_into().expect("fifteen coefficients"),
    };
    if q.is_zero() {
        return Err(QuarticError::Parse("all 15 coefficients are zero".into()));
    }
    Ok(q)
}

pub fn format_line_form<S: Scalar>(l: &LinearForm<S>) -> String {
    format!(
        "LINE {} {} {}",
        l.c[0].format_tokens(),
        l.c[1].format_tokens(),
        l.c[2].format_tokens()
    )
}

/// Parse every `LINE a b c` record in a text block.
pub fn parse_line_forms<S: Scalar>(text: &str) -> Result<Vec<LinearForm<S>>, QuarticError> {
    let mut out = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("LINE") => {}
            other => {
                return Err(QuarticError::Parse(format!(
                    "expected LINE record, found {other:?}"
                )))
            }
        }
        let mut c = Vec::with_capacity(3);
        for i in 0..3 {
            c.push(
                S::parse_tokens(&mut tokens)
                    .map_err(|e| QuarticError::Parse(format!("line coefficient {i}: {e}")))?,
            );
        }
        if tokens.next().is_some() {
            return Err(QuarticError::Parse("trailing tokens in LINE record".into()));
        }
        let l = LinearForm {
            c: c.try_into().expect("three coefficients"),
        };
        if l.is_zero() {
            return Err(QuarticError::ZeroLine);
        }
        out.push(l);
    }
    if out.is_empty() {
        return Err(QuarticError::Parse("no LINE records found".into()));
    }
    Ok(out)
}
