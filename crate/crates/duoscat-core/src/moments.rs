//! Half-line moments of oscillator eigenfunctions against exponentials.
//!
//! The mode-matching conditions project onto the oscillator basis and reduce
//! to the integrals
//!
//!   c(side=+) = int_0^inf  psi_m(x) e^{q x} psi_n(x)  dx
//!   c(side=-) = int_-inf^0 psi_m(x) e^{q x} psi_n(x)  dx
//!
//! and the same with psi_n' in place of psi_n (the d moments).  q is complex:
//! purely imaginary for open channels, real for closed ones.  A real q shifts
//! the Gaussian peak to x* = Re q / (2 a^2) and multiplies the integral by
//! roughly exp(Re(q)^2 / (4 a^2)), which for strongly asymmetric masses can
//! exceed f64 range by thousands of orders of magnitude.  Values are therefore
//! carried as `mantissa * exp(log_scale)` with the analytic peak exponent as
//! the scale; the quadrature works on the shifted integrand directly and never
//! forms the raw product.
//!
//! Arguments with large real *and* imaginary parts at once (which the solver
//! never produces) cancel destructively by about exp(Im(q)^2 / (4 a^2));
//! when that eats more digits than the requested tolerance allows, the
//! order-doubling guard reports `QuadratureAccuracy` instead of returning
//! noise.

use alloc::vec::Vec;
use core::cell::OnceCell;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Error;
use crate::fp;
use crate::oscillator::{poly_parts, OscillatorParams};
use crate::quadrature::GaussLegendre;
use crate::MAX_MODES;

/// Successive-order agreement target for the adaptive quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const ORDERS: [usize; 8] = [32, 64, 128, 256, 512, 1024, 2048, 4096];

/// Lazily built quadrature rules, shared across all q's of one table build.
struct RuleCache {
    slots: [OnceCell<GaussLegendre>; ORDERS.len()],
}

impl RuleCache {
    fn new() -> Self {
        RuleCache {
            slots: [const { OnceCell::new() }; ORDERS.len()],
        }
    }

    fn rule(&self, idx: usize) -> &GaussLegendre {
        self.slots[idx].get_or_init(|| GaussLegendre::new(ORDERS[idx]))
    }
}

/// Which half-line the moment integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLine {
    /// (-inf, 0]
    Negative,
    /// [0, inf)
    Positive,
}

/// Whether the right factor is psi_n or its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    Overlap,
    Derivative,
}

/// Full address of one moment integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentKey {
    pub m: usize,
    pub n: usize,
    pub q: Complex64,
    pub side: HalfLine,
    pub kind: MomentKind,
}

/// A moment as mantissa * exp(log_scale).
///
/// log_scale is 0 whenever the exponential cannot grow along the integration
/// half-line (in particular for every purely imaginary q), in which case
/// `value` is the plain integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentValue {
    pub value: Complex64,
    pub log_scale: f64,
}

impl MomentValue {
    /// The plain integral; may overflow to infinity for extreme scales.
    pub fn unscaled(&self) -> Complex64 {
        self.value * fp::exp(self.log_scale)
    }
}

/// Integration geometry for one (q, side) pair.
struct Geometry {
    lo: f64,
    hi: f64,
    /// Peak exponent rho^2 / (4 a^2), rho = growth rate along the half-line.
    log_scale: f64,
}

fn geometry(q: Complex64, side: HalfLine, a: f64, n_top: usize) -> Geometry {
    let rho = match side {
        HalfLine::Positive => fp_max(q.re, 0.0),
        HalfLine::Negative => fp_max(-q.re, 0.0),
    };
    let x_peak = rho / (2.0 * a * a);
    // Cover the shifted Gaussian peak and the classical turning point of the
    // highest basis state, with a tail margin that puts the integrand below
    // 1e-14 of its maximum at the cut.
    let turn = fp::sqrt(2.0 * n_top as f64 + 1.0) + 8.0;
    let reach = (x_peak + fp_max(12.0, turn) / a, rho * rho / (4.0 * a * a));
    match side {
        HalfLine::Positive => Geometry {
            lo: 0.0,
            hi: reach.0,
            log_scale: reach.1,
        },
        HalfLine::Negative => Geometry {
            lo: -reach.0,
            hi: 0.0,
            log_scale: reach.1,
        },
    }
}

fn fp_max(x: f64, y: f64) -> f64 {
    if x > y {
        x
    } else {
        y
    }
}

/// All overlap moments c_{mn}(q) for m <= m_top, n <= n_top at a fixed order,
/// already divided by exp(log_scale).  Row-major (m_top+1) x (n_top+1).
fn c_block_at_order(
    p: &OscillatorParams,
    q: Complex64,
    geom: &Geometry,
    m_top: usize,
    n_top: usize,
    rule: &GaussLegendre,
) -> Vec<Complex64> {
    let a = p.inv_length();
    let cols = n_top + 1;
    let mut acc = alloc::vec![Complex64::new(0.0, 0.0); (m_top + 1) * cols];
    let mut poly = Vec::with_capacity(cols);
    for (x, w) in rule.mapped(geom.lo, geom.hi) {
        let u = a * x;
        poly_parts(n_top, u, &mut poly);
        // psi_m psi_n e^{qx} = a p_m(u) p_n(u) exp(q x - u^2); keep the whole
        // real exponent in one exp() so nothing overflows on the way.
        let e_re = q.re * x - u * u - geom.log_scale;
        let amp = w * a * fp::exp(e_re);
        let phase = q.im * x;
        let wf = Complex64::new(amp * fp::cos(phase), amp * fp::sin(phase));
        for m in 0..=m_top {
            let pm = poly[m];
            let row = &mut acc[m * cols..(m + 1) * cols];
            for (n, slot) in row.iter_mut().enumerate() {
                *slot += wf * (pm * poly[n]);
            }
        }
    }
    acc
}

/// Adaptive order-doubling evaluation of the scaled c block.
fn c_block(
    p: &OscillatorParams,
    q: Complex64,
    side: HalfLine,
    m_top: usize,
    n_top: usize,
    tol: f64,
    cache: &RuleCache,
) -> Result<(Vec<Complex64>, f64), Error> {
    let a = p.inv_length();
    let geom = geometry(q, side, a, n_top);
    // Start high enough to resolve both the oscillation count of
    // e^{i Im(q) x} and the displaced Gaussian peak (width 1/a, possibly far
    // from the origin when Re(q) is large).
    let waves = fp::abs(q.im) * (geom.hi - geom.lo) / (2.0 * PI);
    let want = 2.0 * waves + 3.0 * (geom.hi - geom.lo) * a + 16.0;
    let mut start = 0;
    while start + 1 < ORDERS.len() && (ORDERS[start] as f64) < want {
        start += 1;
    }
    if start == ORDERS.len() - 1 {
        start -= 1; // always leave room for one doubling
    }

    let mut prev = c_block_at_order(p, q, &geom, m_top, n_top, cache.rule(start));
    let mut worst = f64::INFINITY;
    let mut worst_at = (0usize, 0usize);
    for idx in start + 1..ORDERS.len() {
        let cur = c_block_at_order(p, q, &geom, m_top, n_top, cache.rule(idx));
        worst = 0.0;
        for (idx, (new, old)) in cur.iter().zip(&prev).enumerate() {
            let rel = fp::cabs(new - old) / fp_max(1.0, fp::cabs(*new));
            if rel > worst {
                worst = rel;
                worst_at = (idx / (n_top + 1), idx % (n_top + 1));
            }
        }
        if worst <= tol {
            return Ok((cur, geom.log_scale));
        }
        prev = cur;
    }
    if worst > 10.0 * tol {
        return Err(Error::QuadratureAccuracy {
            m: worst_at.0,
            n: worst_at.1,
            q,
            disagreement: worst,
        });
    }
    Ok((prev, geom.log_scale))
}

/// Ladder combination turning an overlap row into the derivative moment:
/// d_{mn} = a (sqrt(n/2) c_{m,n-1} - sqrt((n+1)/2) c_{m,n+1}).
fn ladder(a: f64, c_row: &[Complex64], n: usize) -> Complex64 {
    let lower = if n == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        c_row[n - 1] * fp::sqrt(n as f64 / 2.0)
    };
    (lower - c_row[n + 1] * fp::sqrt((n as f64 + 1.0) / 2.0)) * a
}

/// One-off overlap moment c_{mn}(q) over the chosen half-line.
pub fn moment_c(
    m: usize,
    n: usize,
    q: Complex64,
    side: HalfLine,
    p: &OscillatorParams,
    tol: f64,
) -> Result<MomentValue, Error> {
    check_finite_q(q)?;
    let top = if m > n { m } else { n };
    let (block, log_scale) = c_block(p, q, side, top, top, tol, &RuleCache::new())?;
    Ok(MomentValue {
        value: block[m * (top + 1) + n],
        log_scale,
    })
}

/// One-off derivative moment d_{mn}(q), evaluated through the ladder identity
/// so it shares the overlap quadrature exactly.
pub fn moment_d(
    m: usize,
    n: usize,
    q: Complex64,
    side: HalfLine,
    p: &OscillatorParams,
    tol: f64,
) -> Result<MomentValue, Error> {
    check_finite_q(q)?;
    let top = if m > n + 1 { m } else { n + 1 };
    let (block, log_scale) = c_block(p, q, side, top, top, tol, &RuleCache::new())?;
    let a = p.inv_length();
    let row = &block[m * (top + 1)..(m + 1) * (top + 1)];
    Ok(MomentValue {
        value: ladder(a, row, n),
        log_scale,
    })
}

fn check_finite_q(q: Complex64) -> Result<(), Error> {
    if q.re.is_finite() && q.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("moment argument q must be finite"))
    }
}

struct HalfBlock {
    /// n_basis x (n_basis + 1): the extra column feeds the ladder.
    c: Vec<Complex64>,
    /// n_basis x n_basis.
    d: Vec<Complex64>,
    log_scale: f64,
}

/// Precomputed c and d moments for every basis pair and a fixed set of q's.
pub struct MomentTable {
    n_basis: usize,
    params: OscillatorParams,
    qs: Vec<Complex64>,
    /// blocks[qi][0] = negative half-line, blocks[qi][1] = positive.
    blocks: Vec<[HalfBlock; 2]>,
}

impl MomentTable {
    /// Evaluates every moment with m < n_basis, n < n_basis for each q in
    /// `qs` (duplicates are collapsed), on both half-lines.
    pub fn build(
        n_basis: usize,
        qs: &[Complex64],
        params: OscillatorParams,
        tol: f64,
    ) -> Result<Self, Error> {
        if n_basis == 0 {
            return Err(Error::InvalidParameter("moment table needs n_basis >= 1"));
        }
        if n_basis > MAX_MODES {
            return Err(Error::TruncationTooLarge {
                n_modes: n_basis,
                max: MAX_MODES,
            });
        }
        let mut unique: Vec<Complex64> = Vec::new();
        for &q in qs {
            check_finite_q(q)?;
            if !unique.iter().any(|u| same_complex(*u, q)) {
                unique.push(q);
            }
        }
        let a = params.inv_length();
        let cache = RuleCache::new();
        let mut blocks = Vec::with_capacity(unique.len());
        for &q in &unique {
            let mut pair = Vec::with_capacity(2);
            for side in [HalfLine::Negative, HalfLine::Positive] {
                let (c, log_scale) = c_block(&params, q, side, n_basis - 1, n_basis, tol, &cache)?;
                let cols = n_basis + 1;
                let mut d = alloc::vec![Complex64::new(0.0, 0.0); n_basis * n_basis];
                for m in 0..n_basis {
                    let row = &c[m * cols..(m + 1) * cols];
                    for n in 0..n_basis {
                        d[m * n_basis + n] = ladder(a, row, n);
                    }
                }
                pair.push(HalfBlock { c, d, log_scale });
            }
            let pos = pair.pop().expect("two sides");
            let neg = pair.pop().expect("two sides");
            blocks.push([neg, pos]);
        }
        Ok(MomentTable {
            n_basis,
            params,
            qs: unique,
            blocks,
        })
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    /// Index of q in the table, by exact floating-point identity.
    pub fn q_index(&self, q: Complex64) -> Option<usize> {
        self.qs.iter().position(|u| same_complex(*u, q))
    }

    /// Scaled c_{mn}(q) for a q already resolved with `q_index`.
    pub fn overlap(&self, side: HalfLine, qi: usize, m: usize, n: usize) -> MomentValue {
        let b = &self.blocks[qi][side_index(side)];
        MomentValue {
            value: b.c[m * (self.n_basis + 1) + n],
            log_scale: b.log_scale,
        }
    }

    /// Scaled d_{mn}(q) for a q already resolved with `q_index`.
    pub fn derivative(&self, side: HalfLine, qi: usize, m: usize, n: usize) -> MomentValue {
        let b = &self.blocks[qi][side_index(side)];
        MomentValue {
            value: b.d[m * self.n_basis + n],
            log_scale: b.log_scale,
        }
    }

    /// Keyed lookup with full validation.
    pub fn lookup(&self, key: &MomentKey) -> Result<MomentValue, Error> {
        let missing = Error::MissingMoment {
            m: key.m,
            n: key.n,
            q: key.q,
        };
        if key.m >= self.n_basis || key.n >= self.n_basis {
            return Err(missing);
        }
        let qi = self.q_index(key.q).ok_or(missing)?;
        Ok(match key.kind {
            MomentKind::Overlap => self.overlap(key.side, qi, key.m, key.n),
            MomentKind::Derivative => self.derivative(key.side, qi, key.m, key.n),
        })
    }
}

fn side_index(side: HalfLine) -> usize {
    match side {
        HalfLine::Negative => 0,
        HalfLine::Positive => 1,
    }
}

fn same_complex(x: Complex64, y: Complex64) -> bool {
    x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> OscillatorParams {
        OscillatorParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn c2(m: usize, n: usize, q: Complex64, p: &OscillatorParams) -> Complex64 {
        moment_c(m, n, q, HalfLine::Positive, p, DEFAULT_QUAD_TOL)
            .unwrap()
            .unscaled()
    }

    fn c1(m: usize, n: usize, q: Complex64, p: &OscillatorParams) -> Complex64 {
        moment_c(m, n, q, HalfLine::Negative, p, DEFAULT_QUAD_TOL)
            .unwrap()
            .unscaled()
    }

    #[test]
    fn zero_argument_reference_values() {
        let p = unit();
        let z = Complex64::new(0.0, 0.0);
        // Half of the normalization integral.
        assert_abs_diff_eq!(c2(0, 0, z, &p).re, 0.5, epsilon = 1e-12);
        // int_0^inf psi_0 psi_1 = 1/sqrt(2 pi).
        let expect = 1.0 / (2.0 * PI).sqrt();
        assert_abs_diff_eq!(c2(0, 1, z, &p).re, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(c1(0, 1, z, &p).re, -expect, epsilon = 1e-12);
        // d_{00}(0) = -psi_0(0)^2 / 2 = -1/(2 sqrt(pi)).
        let d = moment_d(0, 0, z, HalfLine::Positive, &p, DEFAULT_QUAD_TOL)
            .unwrap()
            .unscaled();
        assert_abs_diff_eq!(d.re, -0.28209479177387814, epsilon = 1e-12);
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_argument_completeness() {
        // c1 + c2 at q = 0 is the full-line orthonormality integral.
        let p = OscillatorParams::new(0.5, 3.0, 1.0).unwrap();
        let z = Complex64::new(0.0, 0.0);
        for m in 0..8 {
            for n in 0..8 {
                let total = c1(m, n, z, &p) + c2(m, n, z, &p);
                let expect = if m == n { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(total.re, expect, epsilon = 1e-10);
                assert_abs_diff_eq!(total.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn real_argument_closed_form_ground_state() {
        // c2_{00}(q) = (1/2) exp(q^2/4a^2) erfc(-q/2a) for real q.
        let p = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        let a = p.inv_length();
        for q in [-3.0, -0.7, 0.0, 0.9, 2.5, 6.0] {
            let closed = 0.5 * (q * q / (4.0 * a * a)).exp() * libm::erfc(-q / (2.0 * a));
            let got = c2(0, 0, Complex64::new(q, 0.0), &p);
            assert_abs_diff_eq!(got.re, closed, epsilon = 1e-10 * closed.max(1.0));
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn strongly_shifted_argument_stays_scaled() {
        // q = 30 a: the raw integral is ~exp(225); the mantissa must stay
        // modest and the scale carries the rest.
        let p = unit();
        let a = p.inv_length();
        let q = 30.0 * a;
        let v = moment_c(0, 0, Complex64::new(q, 0.0), HalfLine::Positive, &p, 1e-12).unwrap();
        assert_abs_diff_eq!(v.log_scale, q * q / (4.0 * a * a), epsilon = 1e-12);
        assert!(v.value.re.is_finite() && v.value.re > 0.0);
        let closed = 0.5 * libm::erfc(-q / (2.0 * a)); // scaled closed form
        assert_abs_diff_eq!(v.value.re, closed, epsilon = 1e-9);
    }

    #[test]
    fn huge_argument_mantissa_finite() {
        // Far beyond f64 range unscaled (exp(q^2/4a^2) ~ exp(3600)).
        let p = OscillatorParams::new(0.002, 2.0, 1.0).unwrap();
        let a = p.inv_length();
        let q = Complex64::new(7.6, 0.0);
        assert!(q.re * q.re / (4.0 * a * a) > 3000.0);
        for (m, n) in [(0, 0), (3, 7), (9, 9)] {
            let v = moment_c(m, n, q, HalfLine::Positive, &p, 1e-10).unwrap();
            assert!(v.value.is_finite(), "mantissa overflowed for ({m},{n})");
        }
    }

    #[test]
    fn derivative_ladder_against_direct_quadrature() {
        use crate::oscillator::{eval_psi, eval_psi_prime};
        use crate::quadrature::GaussLegendre;
        let p = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        let rule = GaussLegendre::new(400);
        let lim = 14.0 / p.inv_length();
        for (m, n) in [(0, 0), (1, 2), (4, 3), (5, 5)] {
            for q in [Complex64::new(0.4, 1.3), Complex64::new(-1.0, 2.0)] {
                let direct_re = rule.integrate(0.0, lim, |x| {
                    let w = (q.re * x).exp();
                    eval_psi(m, x, &p) * eval_psi_prime(n, x, &p) * w * (q.im * x).cos()
                });
                let direct_im = rule.integrate(0.0, lim, |x| {
                    let w = (q.re * x).exp();
                    eval_psi(m, x, &p) * eval_psi_prime(n, x, &p) * w * (q.im * x).sin()
                });
                let ladder = moment_d(m, n, q, HalfLine::Positive, &p, 1e-11)
                    .unwrap()
                    .unscaled();
                assert_abs_diff_eq!(ladder.re, direct_re, epsilon = 1e-10);
                assert_abs_diff_eq!(ladder.im, direct_im, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn table_matches_single_shot_lookups() {
        let p = OscillatorParams::new(0.5, 3.0, 1.0).unwrap();
        let qs = [
            Complex64::new(0.0, 2.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(1.5, 0.0),
            Complex64::new(-1.5, 0.75),
            Complex64::new(0.0, 2.0), // duplicate on purpose
        ];
        let table = MomentTable::build(6, &qs, p, DEFAULT_QUAD_TOL).unwrap();
        assert_eq!(table.q_index(qs[0]), table.q_index(qs[4]));
        for &q in &qs[..4] {
            let qi = table.q_index(q).unwrap();
            for side in [HalfLine::Negative, HalfLine::Positive] {
                for (m, n) in [(0, 0), (2, 5), (5, 1), (3, 3)] {
                    let got = table.overlap(side, qi, m, n);
                    let want = moment_c(m, n, q, side, &p, DEFAULT_QUAD_TOL).unwrap();
                    assert_abs_diff_eq!(got.unscaled().re, want.unscaled().re, epsilon = 1e-10);
                    assert_abs_diff_eq!(got.unscaled().im, want.unscaled().im, epsilon = 1e-10);
                    let got = table.derivative(side, qi, m, n);
                    let want = moment_d(m, n, q, side, &p, DEFAULT_QUAD_TOL).unwrap();
                    assert_abs_diff_eq!(got.unscaled().re, want.unscaled().re, epsilon = 1e-9);
                    assert_abs_diff_eq!(got.unscaled().im, want.unscaled().im, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn lookup_reports_missing_entries() {
        let p = unit();
        let q = Complex64::new(0.0, 1.0);
        let table = MomentTable::build(4, &[q], p, DEFAULT_QUAD_TOL).unwrap();
        let bad_q = MomentKey {
            m: 0,
            n: 0,
            q: Complex64::new(0.0, 1.0000001),
            side: HalfLine::Positive,
            kind: MomentKind::Overlap,
        };
        assert!(matches!(
            table.lookup(&bad_q),
            Err(Error::MissingMoment { .. })
        ));
        let bad_n = MomentKey {
            m: 0,
            n: 4,
            q,
            side: HalfLine::Positive,
            kind: MomentKind::Overlap,
        };
        assert!(matches!(
            table.lookup(&bad_n),
            Err(Error::MissingMoment { .. })
        ));
        let good = MomentKey {
            m: 3,
            n: 3,
            q,
            side: HalfLine::Negative,
            kind: MomentKind::Derivative,
        };
        assert!(table.lookup(&good).is_ok());
    }

    #[test]
    fn rejects_oversized_basis() {
        let p = unit();
        let err = MomentTable::build(65, &[Complex64::new(0.0, 1.0)], p, 1e-10);
        assert!(matches!(err, Err(Error::TruncationTooLarge { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn parity_relates_the_half_lines(
            m in 0usize..6,
            n in 0usize..6,
            re in -6.0f64..6.0,
            im in -6.0f64..6.0,
        ) {
            // c1_{mn}(q) = (-1)^{m+n} c2_{mn}(-q).
            let p = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
            let q = Complex64::new(re, im);
            let left = c1(m, n, q, &p);
            let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
            let right = c2(m, n, -q, &p) * sign;
            prop_assert!(fp::cabs(left - right) <= 1e-10 * fp_max(1.0, fp::cabs(right)));
        }

        #[test]
        fn derivative_parity_relates_the_half_lines(
            m in 0usize..5,
            n in 0usize..5,
            re in -6.0f64..6.0,
            im in -6.0f64..6.0,
        ) {
            // d1_{mn}(q) = (-1)^{m+n+1} d2_{mn}(-q).
            let p = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
            let q = Complex64::new(re, im);
            let left = moment_d(m, n, q, HalfLine::Negative, &p, 1e-10).unwrap().unscaled();
            let sign = if (m + n + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let right = moment_d(m, n, -q, HalfLine::Positive, &p, 1e-10).unwrap().unscaled() * sign;
            prop_assert!(fp::cabs(left - right) <= 1e-10 * fp_max(1.0, fp::cabs(right)));
        }

        #[test]
        fn conjugating_q_conjugates_the_moment(
            m in 0usize..6,
            n in 0usize..6,
            re in -8.0f64..8.0,
            im in 0.1f64..8.0,
        ) {
            let p = OscillatorParams::new(1.0, 1.5, 1.0).unwrap();
            let q = Complex64::new(re, im);
            let plain = c2(m, n, q, &p);
            let conj = c2(m, n, q.conj(), &p);
            prop_assert!(fp::cabs(conj - plain.conj()) <= 1e-12 * fp_max(1.0, fp::cabs(plain)));
        }

        #[test]
        fn overlap_is_symmetric_in_mn(
            m in 0usize..6,
            n in 0usize..6,
            re in -8.0f64..8.0,
            im in -8.0f64..8.0,
        ) {
            let p = OscillatorParams::new(1.0, 1.5, 1.0).unwrap();
            let q = Complex64::new(re, im);
            let lhs = c2(m, n, q, &p);
            let rhs = c2(n, m, q, &p);
            prop_assert!(fp::cabs(lhs - rhs) <= 1e-12 * fp_max(1.0, fp::cabs(lhs)));
        }

        #[test]
        fn real_arguments_keep_finite_mantissas(re in -80.0f64..80.0) {
            // Closed channels contribute purely real q; with a soft oscillator
            // (a^2 = 0.1) the raw moment reaches e^{re^2/0.4} ~ e^{16000}.
            let p = OscillatorParams::new(0.1, 1.0, 1.0).unwrap();
            let v = moment_c(2, 3, Complex64::new(re, 0.0), HalfLine::Positive, &p, 1e-9).unwrap();
            prop_assert!(v.value.is_finite());
        }

        #[test]
        fn imaginary_arguments_keep_finite_mantissas(im in -40.0f64..40.0) {
            // Open channels contribute purely imaginary q (no growth, pure
            // oscillation); the mantissa carries the whole value.
            let p = OscillatorParams::new(0.1, 1.0, 1.0).unwrap();
            let v = moment_c(2, 3, Complex64::new(0.0, im), HalfLine::Positive, &p, 1e-9).unwrap();
            prop_assert!(v.value.is_finite());
            prop_assert!(fp::abs(v.log_scale) < 1e-15);
        }

        #[test]
        fn mixed_arguments_keep_finite_mantissas(
            re in -30.0f64..30.0,
            im in -2.0f64..2.0,
        ) {
            // General complex q destructively cancels by e^{im^2/(4a^2)};
            // keep that factor within what f64 quadrature can certify (the
            // accuracy guard rejects anything it cannot).
            let p = OscillatorParams::new(0.1, 1.0, 1.0).unwrap();
            let v = moment_c(2, 3, Complex64::new(re, im), HalfLine::Positive, &p, 1e-9).unwrap();
            prop_assert!(v.value.is_finite());
        }
    }
}
