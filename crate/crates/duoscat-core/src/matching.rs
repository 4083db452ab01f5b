//! Mode matching across the two potential lines.
//!
//! The stationary state is expanded in channel waves separately on the four
//! quadrants of the (x1, x2) plane: incident plus reflected (alpha) in
//! x1<0, x2<0; right/left-moving pairs (mu, nu) in x1<0, x2>0 and (xi, eta)
//! in x1>0, x2<0; transmitted (beta) in x1>0, x2>0.  Continuity of the wave
//! function and the delta-induced derivative jumps across the four half-lines
//! x1 = 0 and x2 = 0, projected onto the oscillator basis, give eight blocks
//! of linear conditions in the six amplitude vectors.  With N basis states
//! that is an (8N) x (6N) overdetermined system solved in the least-squares
//! sense.
//!
//! Closed channels can couple through moments that are exponentially large in
//! the mass asymmetry; each amplitude column therefore carries an analytic
//! exponential scale (see `moments`), folded back into the amplitudes after
//! the solve.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dense::CMat;
use crate::error::Error;
use crate::fp;
use crate::kinematics::{channel_momenta, ChannelSet, IncidentSpec, SystemParams};
use crate::lstsq::solve_least_squares;
use crate::moments::{HalfLine, MomentTable};

/// The assembled, scaled linear system.
pub struct MatchSystem {
    pub matrix: CMat,
    pub rhs: Vec<Complex64>,
    /// Per-column log of the analytic amplitude scale.
    col_log_scale: Vec<f64>,
    n_modes: usize,
}

impl MatchSystem {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Per-column log of the analytic amplitude scale (six blocks of N).
    pub fn col_scales(&self) -> &[f64] {
        &self.col_log_scale
    }
}

/// The six amplitude vectors of the quadrant expansions, indexed by channel.
#[derive(Debug, Clone)]
pub struct AmplitudeSet {
    /// Reflected, incident quadrant.
    pub alpha: Vec<Complex64>,
    /// Right-moving, quadrant x1<0, x2>0.
    pub mu: Vec<Complex64>,
    /// Left-moving, quadrant x1<0, x2>0.
    pub nu: Vec<Complex64>,
    /// Right-moving, quadrant x1>0, x2<0.
    pub xi: Vec<Complex64>,
    /// Left-moving, quadrant x1>0, x2<0.
    pub eta: Vec<Complex64>,
    /// Transmitted, quadrant x1>0, x2>0.
    pub beta: Vec<Complex64>,
    /// Least-squares residual of the matching conditions.
    pub residual_norm: f64,
}

impl AmplitudeSet {
    pub fn n_modes(&self) -> usize {
        self.beta.len()
    }
}

/// The q arguments (exponential rates along the matching lines) that a table
/// must contain before `assemble` can run: +-i K_n r1 and +-i K_n r2 for every
/// channel, plus the same four for the incident momentum.
pub fn required_arguments(p: &SystemParams, inc: &IncidentSpec, ch: &ChannelSet) -> Vec<Complex64> {
    let (r1, r2) = (p.fraction1(), p.fraction2());
    let mut qs = Vec::with_capacity(4 * ch.n_modes() + 4);
    let mut push_all = |k: Complex64| {
        let (p1, m1) = line_args(k, r1);
        let (p2, m2) = line_args(k, r2);
        qs.extend_from_slice(&[p1, m1, p2, m2]);
    };
    for c in ch.iter() {
        push_all(c.momentum);
    }
    push_all(Complex64::new(inc.k0, 0.0));
    qs
}

/// (+i k r, -i k r), computed identically wherever they are needed so that
/// exact-match table lookups always succeed.
fn line_args(k: Complex64, r: f64) -> (Complex64, Complex64) {
    let ik = Complex64::new(-k.im, k.re);
    let plus = Complex64::new(ik.re * r, ik.im * r);
    (plus, -plus)
}

/// Table access for one (q, side) pair.
#[derive(Clone, Copy)]
struct Arg {
    side: HalfLine,
    qi: usize,
    log_scale: f64,
}

fn resolve(moments: &MomentTable, side: HalfLine, q: Complex64) -> Result<Arg, Error> {
    let qi = moments
        .q_index(q)
        .ok_or(Error::MissingMoment { m: 0, n: 0, q })?;
    // Scale is shared by the whole (q, side) block; probe any entry.
    let log_scale = moments.overlap(side, qi, 0, 0).log_scale;
    Ok(Arg {
        side,
        qi,
        log_scale,
    })
}

/// Builds the scaled (8N) x (6N) matching system for a precomputed moment
/// table.  The table must hold every argument from `required_arguments` and
/// share the truncation and oscillator parameters.
pub fn assemble(
    p: &SystemParams,
    inc: &IncidentSpec,
    ch: &ChannelSet,
    moments: &MomentTable,
) -> Result<MatchSystem, Error> {
    assemble_projected(p, inc, ch, moments, ch.n_modes())
}

/// As `assemble`, but projecting each condition onto `n_proj` basis states,
/// for an (8 n_proj) x (6N) system.  `8 n_proj >= 6 N` keeps the system
/// overdetermined or square; the moment table must cover both index ranges.
pub fn assemble_projected(
    p: &SystemParams,
    inc: &IncidentSpec,
    ch: &ChannelSet,
    moments: &MomentTable,
    n_proj: usize,
) -> Result<MatchSystem, Error> {
    let n = ch.n_modes();
    if 8 * n_proj < 6 * n || moments.n_basis() < n_proj.max(n) {
        return Err(Error::SizeMismatch {
            left: n_proj,
            right: moments.n_basis(),
        });
    }
    if *moments.params() != p.oscillator() {
        return Err(Error::InvalidParameter(
            "moment table was built for different oscillator parameters",
        ));
    }
    if inc.l >= n {
        return Err(Error::TruncationTooSmall {
            n_modes: n,
            n_cutoff: inc.l,
        });
    }

    let (r1, r2) = (p.fraction1(), p.fraction2());
    let hb2 = p.hbar * p.hbar;
    let g1 = 2.0 * p.m1 * p.gamma1 / hb2;
    let g2 = 2.0 * p.m2 * p.gamma2 / hb2;
    // Jump rows are normalized when the couplings are strong, which keeps the
    // row norms comparable to the continuity rows.
    let jump_scale = 1.0 / fp_max(1.0, 2.0 * fp_max(p.m1 * p.gamma1, p.m2 * p.gamma2) / hb2);

    let mut matrix = CMat::zeros(8 * n_proj, 6 * n);
    let mut rhs = alloc::vec![Complex64::new(0.0, 0.0); 8 * n_proj];
    let mut col_log_scale = alloc::vec![0.0_f64; 6 * n];

    let i_unit = Complex64::new(0.0, 1.0);

    for cn in 0..n {
        let k = ch.channel(cn).momentum;
        let ik = i_unit * k;
        let (q_r1_plus, q_r1_minus) = line_args(k, r1);
        let (q_r2_plus, q_r2_minus) = line_args(k, r2);

        // The eight (q, side) combinations this channel's columns touch.
        let pos_r1p = resolve(moments, HalfLine::Positive, q_r1_plus)?;
        let pos_r1m = resolve(moments, HalfLine::Positive, q_r1_minus)?;
        let pos_r2p = resolve(moments, HalfLine::Positive, q_r2_plus)?;
        let pos_r2m = resolve(moments, HalfLine::Positive, q_r2_minus)?;
        let neg_r1p = resolve(moments, HalfLine::Negative, q_r1_plus)?;
        let neg_r1m = resolve(moments, HalfLine::Negative, q_r1_minus)?;
        let neg_r2p = resolve(moments, HalfLine::Negative, q_r2_plus)?;
        let neg_r2m = resolve(moments, HalfLine::Negative, q_r2_minus)?;

        // Column layout: [alpha, mu, nu, xi, eta, beta], each N wide.
        let cols = [cn, n + cn, 2 * n + cn, 3 * n + cn, 4 * n + cn, 5 * n + cn];

        // Coefficient of the wave and its center-of-mass derivative on each
        // block row, per column.  `w` multiplies c, `dw` multiplies d.
        struct Term {
            block: usize,
            arg: Arg,
            w: Complex64,
            dw: f64,
        }
        let one = Complex64::new(1.0, 0.0);
        let col_terms: [(usize, [Term; 4]); 6] = [
            // alpha
            (
                cols[0],
                [
                    Term {
                        block: 0,
                        arg: pos_r1p,
                        w: one,
                        dw: 0.0,
                    },
                    Term {
                        block: 1,
                        arg: pos_r1p,
                        w: -ik * r2,
                        dw: 1.0,
                    },
                    Term {
                        block: 4,
                        arg: neg_r2m,
                        w: one,
                        dw: 0.0,
                    },
                    Term {
                        block: 5,
                        arg: neg_r2m,
                        w: -ik * r1,
                        dw: -1.0,
                    },
                ],
            ),
            // mu
            (
                cols[1],
                [
                    Term {
                        block: 0,
                        arg: pos_r1m,
                        w: -one,
                        dw: 0.0,
                    },
                    Term {
                        block: 1,
                        arg: pos_r1m,
                        w: Complex64::new(g2, 0.0) - ik * r2,
                        dw: -1.0,
                    },
                    Term {
                        block: 2,
                        arg: pos_r2p,
                        w: one,
                        dw: 0.0,
                    },
                    Term {
                        block: 3,
                        arg: pos_r2p,
                        w: ik * r1,
                        dw: -1.0,
                    },
                ],
            ),
            // nu
            (
                cols[2],
                [
                    Term {
                        block: 0,
                        arg: pos_r1p,
                        w: -one,
                        dw: 0.0,
                    },
                    Term {
                        block: 1,
                        arg: pos_r1p,
                        w: Complex64::new(g2, 0.0) + ik * r2,
                        dw: -1.0,
                    },
                    Term {
                        block: 2,
                        arg: pos_r2m,
                        w: one,
                        dw: 0.0,
                    },
                    Term {
                        block: 3,
                        arg: pos_r2m,
                        w: -ik * r1,
                        dw: -1.0,
                    },
                ],
            ),
            // xi
            (
                cols[3],
                [
                    Term {
                        block: 4,
                        arg: neg_r2p,
                        w: -one,
                        dw: 0.0,
                    },
                    Term {
                        block: 5,
                        arg: neg_r2p,
                        w: Complex64::new(g1, 0.0) - ik * r1,
                        dw: 1.0,
                    },
                    Term {
                        block: 6,
                        arg: neg_r1m,
                        w: one,
                        dw: 0.0,
                    },
                    Term {
                        block: 7,
                        arg: neg_r1m,
                        w: ik * r2,
                        dw: 1.0,
                    },
                ],
            ),
            // eta
            (
                cols[4],
                [
                    Term {
                        block: 4,
                        arg: neg_r2m,
                        w: -one,
                        dw: 0.0,
                    },
                    Term {
                        block: 5,
                        arg: neg_r2m,
                        w: Complex64::new(g1, 0.0) + ik * r1,
                        dw: 1.0,
                    },
                    Term {
                        block: 6,
                        arg: neg_r1p,
                        w: one,
                        dw: 0.0,
                    },
                    Term {
                        block: 7,
                        arg: neg_r1p,
                        w: -ik * r2,
                        dw: 1.0,
                    },
                ],
            ),
            // beta
            (
                cols[5],
                [
                    Term {
                        block: 2,
                        arg: pos_r2p,
                        w: -one,
                        dw: 0.0,
                    },
                    Term {
                        block: 3,
                        arg: pos_r2p,
                        w: Complex64::new(g1, 0.0) - ik * r1,
                        dw: 1.0,
                    },
                    Term {
                        block: 6,
                        arg: neg_r1m,
                        w: -one,
                        dw: 0.0,
                    },
                    Term {
                        block: 7,
                        arg: neg_r1m,
                        w: Complex64::new(g2, 0.0) - ik * r2,
                        dw: -1.0,
                    },
                ],
            ),
        ];

        for (col, terms) in &col_terms {
            let col_scale = terms
                .iter()
                .fold(0.0_f64, |acc, t| fp_max(acc, t.arg.log_scale));
            col_log_scale[*col] = col_scale;
            for t in terms {
                // Entries whose natural scale sits far below the column's are
                // flushed toward zero by this factor; that is the honest
                // relative magnitude, not a loss.
                let rescale = fp::exp(t.arg.log_scale - col_scale);
                let row_factor = if t.block % 2 == 1 { jump_scale } else { 1.0 };
                for m in 0..n_proj {
                    let c = moments.overlap(t.arg.side, t.arg.qi, m, cn).value;
                    let mut entry = t.w * c;
                    if t.dw != 0.0 {
                        let d = moments.derivative(t.arg.side, t.arg.qi, m, cn).value;
                        entry += d * t.dw;
                    }
                    let row = t.block * n_proj + m;
                    let old = matrix.get(row, *col);
                    matrix.set(row, *col, old + entry * (rescale * row_factor));
                }
            }
        }
    }

    // Incident wave: level l at momentum K0 on the right-hand side.
    let k0 = Complex64::new(inc.k0, 0.0);
    let ik0 = i_unit * k0;
    let (_, q0_r1_minus) = line_args(k0, r1);
    let (q0_r2_plus, _) = line_args(k0, r2);
    let inc_pos = resolve(moments, HalfLine::Positive, q0_r1_minus)?;
    let inc_neg = resolve(moments, HalfLine::Negative, q0_r2_plus)?;
    for m in 0..n_proj {
        let c2 = moments
            .overlap(inc_pos.side, inc_pos.qi, m, inc.l)
            .unscaled();
        let d2 = moments
            .derivative(inc_pos.side, inc_pos.qi, m, inc.l)
            .unscaled();
        let c1 = moments
            .overlap(inc_neg.side, inc_neg.qi, m, inc.l)
            .unscaled();
        let d1 = moments
            .derivative(inc_neg.side, inc_neg.qi, m, inc.l)
            .unscaled();
        rhs[m] = -c2;
        rhs[n_proj + m] = (-ik0 * r2 * c2 - d2) * jump_scale;
        rhs[4 * n_proj + m] = -c1;
        rhs[5 * n_proj + m] = (-ik0 * r1 * c1 + d1) * jump_scale;
    }

    if !matrix.is_finite() || rhs.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidParameter(
            "matching system picked up non-finite entries",
        ));
    }

    Ok(MatchSystem {
        matrix,
        rhs,
        col_log_scale,
        n_modes: n,
    })
}

/// Least-squares solve of the matching system, with the analytic column
/// scales folded back into the amplitudes.
pub fn solve(sys: &MatchSystem) -> Result<AmplitudeSet, Error> {
    let ls = solve_least_squares(&sys.matrix, &sys.rhs)?;
    let n = sys.n_modes;
    let mut parts: Vec<Vec<Complex64>> = Vec::with_capacity(6);
    for b in 0..6 {
        let mut v = Vec::with_capacity(n);
        for j in 0..n {
            let col = b * n + j;
            // May underflow to zero for strongly closed channels; their true
            // amplitudes are below anything representable.
            v.push(ls.solution[col] * fp::exp(-sys.col_log_scale[col]));
        }
        parts.push(v);
    }
    let beta = parts.pop().expect("six blocks");
    let eta = parts.pop().expect("six blocks");
    let xi = parts.pop().expect("six blocks");
    let nu = parts.pop().expect("six blocks");
    let mu = parts.pop().expect("six blocks");
    let alpha = parts.pop().expect("six blocks");
    Ok(AmplitudeSet {
        alpha,
        mu,
        nu,
        xi,
        eta,
        beta,
        residual_norm: ls.residual_norm,
    })
}

/// Full pipeline: channels, moment table, assembly, solve.
pub fn scattering_solution(
    p: &SystemParams,
    inc: &IncidentSpec,
    n_modes: usize,
    quad_tol: f64,
) -> Result<(ChannelSet, AmplitudeSet), Error> {
    let ch = channel_momenta(p, inc, n_modes)?;
    let qs = required_arguments(p, inc, &ch);
    let table = MomentTable::build(n_modes, &qs, p.oscillator(), quad_tol)?;
    let sys = assemble(p, inc, &ch, &table)?;
    let amps = solve(&sys)?;
    Ok((ch, amps))
}

fn fp_max(x: f64, y: f64) -> f64 {
    if x > y {
        x
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::DEFAULT_QUAD_TOL;
    use approx::assert_abs_diff_eq;

    fn fig_params(gamma1: f64, gamma2: f64) -> SystemParams {
        SystemParams::new(1.0, 1.0, gamma1, gamma2, 3.0, 1.0).unwrap()
    }

    #[test]
    fn free_propagation_is_pure_forward_motion() {
        // With both potentials off the exact solution keeps the incident wave:
        // beta_n = mu_n = xi_n = delta_{n,l}, everything else zero.
        let p = fig_params(0.0, 0.0);
        let inc = IncidentSpec::new(4.0, 0).unwrap();
        let (_, amps) = scattering_solution(&p, &inc, 6, DEFAULT_QUAD_TOL).unwrap();
        assert!(
            amps.residual_norm < 1e-10,
            "residual {}",
            amps.residual_norm
        );
        for j in 0..6 {
            let expect = if j == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(amps.beta[j].re, expect, epsilon = 1e-9);
            assert_abs_diff_eq!(amps.beta[j].im, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(amps.mu[j].re, expect, epsilon = 1e-9);
            assert_abs_diff_eq!(amps.xi[j].re, expect, epsilon = 1e-9);
            assert!(amps.alpha[j].norm_sqr() < 1e-18);
            assert!(amps.nu[j].norm_sqr() < 1e-18);
            assert!(amps.eta[j].norm_sqr() < 1e-18);
        }
    }

    #[test]
    fn free_propagation_holds_for_excited_incident_level() {
        let p = SystemParams::new(1.3, 0.7, 0.0, 0.0, 2.0, 1.0).unwrap();
        let inc = IncidentSpec::new(4.5, 1).unwrap();
        let (_, amps) = scattering_solution(&p, &inc, 7, DEFAULT_QUAD_TOL).unwrap();
        for j in 0..7 {
            let expect = if j == 1 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(amps.beta[j].re, expect, epsilon = 1e-8);
            assert!(amps.alpha[j].norm_sqr() < 1e-16);
        }
    }

    #[test]
    fn single_channel_system_has_expected_shape() {
        // N = 1 is valid here: K0^2/(2 M omega) < 1 at omega = 40, so only
        // the elastic channel is open.
        let p = SystemParams::new(1.0, 1.0, 1.0, 1.0, 40.0, 1.0).unwrap();
        let inc = IncidentSpec::new(4.0, 0).unwrap();
        let ch = channel_momenta(&p, &inc, 1).unwrap();
        let qs = required_arguments(&p, &inc, &ch);
        let table = MomentTable::build(1, &qs, p.oscillator(), DEFAULT_QUAD_TOL).unwrap();
        let sys = assemble(&p, &inc, &ch, &table).unwrap();
        assert_eq!(sys.matrix.rows(), 8);
        assert_eq!(sys.matrix.cols(), 6);
        assert!(solve(&sys).is_ok());
    }

    #[test]
    fn assemble_rejects_mismatched_table() {
        let p = fig_params(1.0, 0.0);
        let inc = IncidentSpec::new(4.0, 0).unwrap();
        let ch = channel_momenta(&p, &inc, 5).unwrap();
        let qs = required_arguments(&p, &inc, &ch);
        let table = MomentTable::build(4, &qs, p.oscillator(), DEFAULT_QUAD_TOL).unwrap();
        assert!(matches!(
            assemble(&p, &inc, &ch, &table),
            Err(Error::SizeMismatch { .. })
        ));
        let other = crate::oscillator::OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        let table = MomentTable::build(5, &qs, other, DEFAULT_QUAD_TOL).unwrap();
        assert!(assemble(&p, &inc, &ch, &table).is_err());
    }

    #[test]
    fn assemble_reports_missing_arguments() {
        let p = fig_params(1.0, 0.0);
        let inc = IncidentSpec::new(4.0, 0).unwrap();
        let ch = channel_momenta(&p, &inc, 5).unwrap();
        // Drop the incident arguments from the list.
        let qs = &required_arguments(&p, &inc, &ch)[..16];
        let table = MomentTable::build(5, qs, p.oscillator(), DEFAULT_QUAD_TOL).unwrap();
        // Channel 0 carries K = K0 up to rounding of sqrt(k0^2), so the only
        // possibly-missing entries are the incident ones; accept either
        // outcome but require a MissingMoment error if it fails.
        match assemble(&p, &inc, &ch, &table) {
            Ok(_) => {}
            Err(e) => assert!(matches!(e, Error::MissingMoment { .. })),
        }
    }

    #[test]
    fn symmetric_setup_suppresses_odd_channels() {
        // Equal masses and strengths leave the internal parity unchanged:
        // odd n - l amplitudes of the outer quadrants vanish.
        let p = SystemParams::new(1.0, 1.0, 1.2, 1.2, 3.0, 1.0).unwrap();
        let inc = IncidentSpec::new(4.0, 0).unwrap();
        let (_, amps) = scattering_solution(&p, &inc, 8, DEFAULT_QUAD_TOL).unwrap();
        for j in (1..8).step_by(2) {
            assert!(
                amps.alpha[j].norm_sqr().sqrt() < 1e-9,
                "alpha[{j}] = {:?}",
                amps.alpha[j]
            );
            assert!(amps.beta[j].norm_sqr().sqrt() < 1e-9);
        }
    }
}
