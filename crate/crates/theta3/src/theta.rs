//! Numerical evaluation of genus-3 Riemann theta functions with
//! characteristics, their gradients at z = 0, and Jacobian Nullwerte.
//!
//! The series evaluated is
//!
//!   theta[w](z; Z) = sum over n in Z^3 of
//!       exp(pi i (n+e')^t Z (n+e') + 2 pi i (n+e')^t (z+e''))
//!
//! where w = (e', e'') is a characteristic with half-integer entries e'/2,
//! e''/2 (the `Char` bit vectors divided by two).  Truncation is certified:
//! the lattice is cut at an ellipsoid v^t Im(Z) v <= R^2 whose radius is grown
//! until an explicit tail bound drops below the requested tolerance, so every
//! returned value carries an absolute error at most `cfg.tol` plus rounding.

use crate::chars::Char;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use thiserror::Error;

/// Largest allowed relative asymmetry max|Z_ij - Z_ji| / max(1, max|Z_ij|)
/// when building a `SiegelPoint`; inputs within the bound are symmetrized by
/// averaging.  Period-matrix quotients computed in floating point are
/// symmetric only up to roundoff, which sits many orders below this.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Default absolute truncation tolerance for theta series.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Default cap on the ellipsoid radius (measured in the Im(Z) norm).  The
/// radius needed grows like sqrt(log(1/tol)) plus a term in |Im z|, so a cap
/// of 60 leaves room for lattice translates far beyond anything tested here.
pub const DEFAULT_MAX_RADIUS: f64 = 60.0;

#[derive(Debug, Error)]
pub enum ThetaError {
    #[error("matrix is not symmetric: relative residual {residual:.3e} exceeds {SYMMETRY_TOL:.0e}")]
    NotSymmetric { residual: f64 },
    #[error("imaginary part is not positive definite: smallest eigenvalue {lambda_min:.6e}")]
    NotPositiveDefinite { lambda_min: f64 },
    #[error(
        "theta series truncation failed: radius cap {max_radius} cannot reach tolerance \
         {tol:.1e} for lambda_min {lambda_min:.6e} and |Im z| {mu:.3e}"
    )]
    Truncation {
        max_radius: f64,
        tol: f64,
        lambda_min: f64,
        mu: f64,
    },
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("expected an odd characteristic, got even {0}")]
    NotOdd(Char),
    #[error("characteristics must be pairwise distinct, got a repeat of {0}")]
    Duplicate(Char),
}

/// A point of the Siegel upper half space H_3: a symmetric complex 3x3 matrix
/// with positive definite imaginary part.  Construction validates both
/// properties and records the diagnostics.
#[derive(Clone, Debug)]
pub struct SiegelPoint {
    z: [[Complex64; 3]; 3],
    y: [[f64; 3]; 3],
    lambda_min: f64,
    symmetry_residual: f64,
}

impl SiegelPoint {
    pub fn new(m: [[Complex64; 3]; 3]) -> Result<SiegelPoint, ThetaError> {
        let mut max_entry = 1f64;
        let mut residual = 0f64;
        for (i, row) in m.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                max_entry = max_entry.max(entry.norm());
                if j > i {
                    residual = residual.max((entry - m[j][i]).norm());
                }
            }
        }
        let residual = residual / max_entry;
        if !residual.is_finite() || residual > SYMMETRY_TOL {
            return Err(ThetaError::NotSymmetric { residual });
        }
        let z: [[Complex64; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| (m[i][j] + m[j][i]) / 2.0));
        let y: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| z[i][j].im));
        let lambda_min = sym3_eigenvalues(&y)[0];
        if lambda_min <= 0.0 || lambda_min.is_nan() {
            return Err(ThetaError::NotPositiveDefinite { lambda_min });
        }
        Ok(SiegelPoint { z, y, lambda_min, symmetry_residual: residual })
    }

    /// The symmetrized matrix actually used in evaluations.
    pub fn matrix(&self) -> &[[Complex64; 3]; 3] {
        &self.z
    }

    pub fn imag(&self) -> &[[f64; 3]; 3] {
        &self.y
    }

    /// Smallest eigenvalue of Im(Z); controls the series decay rate.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// Relative asymmetry of the matrix as supplied, before averaging.
    pub fn symmetry_residual(&self) -> f64 {
        self.symmetry_residual
    }
}

/// Tolerance and truncation budget for a theta evaluation.
#[derive(Clone, Copy, Debug)]
pub struct ThetaEvalConfig {
    /// Absolute bound on the truncation error of values and gradients.
    pub tol: f64,
    /// Cap on the ellipsoid radius; exceeding it is a `Truncation` error.
    pub max_radius: f64,
}

impl Default for ThetaEvalConfig {
    fn default() -> Self {
        ThetaEvalConfig { tol: DEFAULT_TOL, max_radius: DEFAULT_MAX_RADIUS }
    }
}

impl ThetaEvalConfig {
    pub fn with_tol(tol: f64) -> Self {
        ThetaEvalConfig { tol, ..ThetaEvalConfig::default() }
    }
}

/// Eigenvalues of a symmetric real 3x3 matrix, ascending, by the closed-form
/// trigonometric method for the characteristic cubic.
pub fn sym3_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| (a[i][j] - if i == j { q } else { 0.0 }) / p;
    let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    let mut eig = [lo, mid, hi];
    eig.sort_by(f64::total_cmp);
    eig
}

fn quad_form(y: &[[f64; 3]; 3], v: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += y[i][j] * v[i] * v[j];
        }
    }
    acc
}

/// Upper bound on the neglected mass (values and gradient components alike)
/// outside the ellipsoid of radius `r` in the Im(Z) norm.  Shell k holds the
/// lattice translates with norm in [k, k+1); their count is bounded by the
/// volume of a Euclidean ball of radius (k+1)/sqrt(lambda_min) fattened by a
/// unit-cell diagonal, each term by exp(-pi k^2 + 2 pi mu k / sqrt(lambda_min))
/// with mu = |Im z|, and the gradient prefactor |2 pi v_j| by
/// 2 pi (k+1)/sqrt(lambda_min).
fn tail_bound(r: f64, lambda_min: f64, mu: f64) -> f64 {
    let s = lambda_min.sqrt();
    let mut total = 0.0;
    let k0 = r.floor().max(0.0) as i64;
    for k in k0..k0 + 400 {
        let kk = k as f64;
        let count = (4.0 * PI / 3.0) * ((kk + 1.0) / s + 3f64.sqrt()).powi(3);
        let exponent = -PI * kk * kk + 2.0 * PI * mu * kk / s;
        let grad_factor = (2.0 * PI * (kk + 1.0) / s).max(1.0);
        let term = count * grad_factor * exponent.exp();
        total += term;
        if term < total * 1e-18 || term < 1e-300 {
            break;
        }
    }
    total
}

fn choose_radius(sp: &SiegelPoint, mu: f64, cfg: &ThetaEvalConfig) -> Result<f64, ThetaError> {
    if cfg.tol <= 0.0 || !cfg.tol.is_finite() {
        return Err(ThetaError::BadTolerance(cfg.tol));
    }
    let mut r = 2.0f64;
    while r <= cfg.max_radius {
        if tail_bound(r, sp.lambda_min, mu) <= cfg.tol {
            return Ok(r);
        }
        r += 0.5;
    }
    Err(ThetaError::Truncation {
        max_radius: cfg.max_radius,
        tol: cfg.tol,
        lambda_min: sp.lambda_min,
        mu,
    })
}

/// Theta value and gradient in one certified pass.  Summation runs in a fixed
/// lexicographic order over the integer box enclosing the ellipsoid, so
/// results are bit-for-bit deterministic for identical inputs.
pub fn theta_with_grad(
    w: &Char,
    z: &[Complex64; 3],
    sp: &SiegelPoint,
    cfg: &ThetaEvalConfig,
) -> Result<(Complex64, [Complex64; 3]), ThetaError> {
    let ep = [w.e[0] as f64 / 2.0, w.e[1] as f64 / 2.0, w.e[2] as f64 / 2.0];
    let epp = [w.d[0] as f64 / 2.0, w.d[1] as f64 / 2.0, w.d[2] as f64 / 2.0];
    let mu = (z[0].im * z[0].im + z[1].im * z[1].im + z[2].im * z[2].im).sqrt();
    let radius = choose_radius(sp, mu, cfg)?;
    let r2 = radius * radius;
    let bbox = radius / sp.lambda_min.sqrt();
    let lo = |i: usize| (-bbox - ep[i]).ceil() as i64;
    let hi = |i: usize| (bbox - ep[i]).floor() as i64;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let pi_i = Complex64::new(0.0, PI);
    let mut val = Complex64::new(0.0, 0.0);
    let mut grad = [Complex64::new(0.0, 0.0); 3];
    for n1 in lo(0)..=hi(0) {
        for n2 in lo(1)..=hi(1) {
            for n3 in lo(2)..=hi(2) {
                let v = [n1 as f64 + ep[0], n2 as f64 + ep[1], n3 as f64 + ep[2]];
                if quad_form(&sp.y, &v) > r2 {
                    continue;
                }
                let mut zvv = Complex64::new(0.0, 0.0);
                for i in 0..3 {
                    for j in 0..3 {
                        zvv += sp.z[i][j] * v[i] * v[j];
                    }
                }
                let mut expo = pi_i * zvv;
                for i in 0..3 {
                    expo += two_pi_i * v[i] * (z[i] + epp[i]);
                }
                let term = expo.exp();
                val += term;
                for i in 0..3 {
                    grad[i] += term * two_pi_i * v[i];
                }
            }
        }
    }
    Ok((val, grad))
}

pub fn theta(
    w: &Char,
    z: &[Complex64; 3],
    sp: &SiegelPoint,
    cfg: &ThetaEvalConfig,
) -> Result<Complex64, ThetaError> {
    theta_with_grad(w, z, sp, cfg).map(|(v, _)| v)
}

/// Thetanullwert theta[w](0; Z).
pub fn theta_null(w: &Char, sp: &SiegelPoint, cfg: &ThetaEvalConfig) -> Result<Complex64, ThetaError> {
    theta(w, &[Complex64::new(0.0, 0.0); 3], sp, cfg)
}

/// Gradient of theta[w] at z = 0.  Nonzero only for odd characteristics (the
/// value vanishes there instead); no parity check is made so that callers can
/// observe the vanishing for even ones.
pub fn grad_theta_null(
    w: &Char,
    sp: &SiegelPoint,
    cfg: &ThetaEvalConfig,
) -> Result<[Complex64; 3], ThetaError> {
    theta_with_grad(w, &[Complex64::new(0.0, 0.0); 3], sp, cfg).map(|(_, g)| g)
}

fn det3c(rows: &[[Complex64; 3]; 3]) -> Complex64 {
    let minor = |i: usize, j: usize| rows[1][i] * rows[2][j] - rows[1][j] * rows[2][i];
    rows[0][0] * minor(1, 2) - rows[0][1] * minor(0, 2) + rows[0][2] * minor(0, 1)
}

/// Jacobian Nullwert [w1, w2, w3](Z) = pi^3 det of the three gradient rows,
/// without parity checks; even rows simply contribute a (numerically tiny)
/// zero row.  Used by identity verification in its degenerate mode.
pub fn jacobian_nullwert_unchecked(
    ws: [&Char; 3],
    sp: &SiegelPoint,
    cfg: &ThetaEvalConfig,
) -> Result<Complex64, ThetaError> {
    if ws[0] == ws[1] || ws[0] == ws[2] {
        return Err(ThetaError::Duplicate(*ws[0]));
    }
    if ws[1] == ws[2] {
        return Err(ThetaError::Duplicate(*ws[1]));
    }
    let mut rows = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (row, w) in rows.iter_mut().zip(ws) {
        *row = grad_theta_null(w, sp, cfg)?;
    }
    Ok(det3c(&rows) * PI.powi(3))
}

/// Jacobian Nullwert of three distinct odd characteristics.
pub fn jacobian_nullwert(
    ws: [&Char; 3],
    sp: &SiegelPoint,
    cfg: &ThetaEvalConfig,
) -> Result<Complex64, ThetaError> {
    for w in ws {
        if !w.is_odd() {
            return Err(ThetaError::NotOdd(*w));
        }
    }
    jacobian_nullwert_unchecked(ws, sp, cfg)
}

/// Seeded sample of H_3 with Im(Z) = M^t M + 0.3 I, so lambda_min >= 0.3.
/// Draw order is fixed: the six upper-triangle real-part entries row by row
/// (diagonal included), then the nine entries of M row by row, all uniform in
/// [-1, 1].
#[allow(clippy::needless_range_loop)]
pub fn random_siegel(seed: u64) -> SiegelPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0f64..=1.0);
    let mut a = [[0f64; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let x = draw(&mut rng);
            a[i][j] = x;
            a[j][i] = x;
        }
    }
    let mut m = [[0f64; 3]; 3];
    for row in m.iter_mut() {
        for entry in row.iter_mut() {
            *entry = draw(&mut rng);
        }
    }
    let z: [[Complex64; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let gram: f64 = m.iter().map(|row| row[i] * row[j]).sum();
            let y = if i == j { gram + 0.3 } else { gram };
            Complex64::new(a[i][j], y)
        })
    });
    SiegelPoint::new(z).expect("construction guarantees a valid Siegel point")
}
