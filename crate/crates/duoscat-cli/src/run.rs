//! Drivers: single solves, parameter sweeps, convergence studies, and the
//! first-order-reference comparison.  Sweep points are independent and
//! evaluate in parallel; output order always follows the sweep grid.

use rayon::prelude::*;

use duoscat_core::{
    born, coefficients, critical_momentum, critical_omega, cutoff_index, scattering_solution,
    IncidentSpec, SystemParams,
};

use crate::config::{RunConfig, Scale, SweepParameter, SweepSpec};
use crate::error::CliError;

/// Whether a row met the conservation tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Unconverged,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Unconverged => "unconverged",
        }
    }
}

/// One evaluated point.  `j_re`/`j_tr` carry the open channels 0..=n_c; a
/// point whose solve failed outright keeps its kinematic n_c, NaN summary
/// fields, and empty coefficient vectors.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub n_c: usize,
    pub j_re: Vec<f64>,
    pub j_tr: Vec<f64>,
    pub j_total: f64,
    pub residual: f64,
    pub status: Status,
}

/// Evaluates one configuration into a row tagged with `value`.
fn evaluate(cfg: &RunConfig, value: f64) -> SweepRow {
    let n_c = cutoff_index(&cfg.system, &cfg.incident);
    let n_modes = cfg.resolved_modes();
    let attempt = (|| {
        let (ch, amps) =
            scattering_solution(&cfg.system, &cfg.incident, n_modes, cfg.quadrature_tol)?;
        let table = coefficients(&ch, &amps, &cfg.incident)?;
        Ok::<_, duoscat_core::Error>((table, amps.residual_norm))
    })();
    match attempt {
        Ok((table, residual)) => {
            let status = if (table.j_total - 1.0).abs() <= cfg.conservation_tol {
                Status::Converged
            } else {
                Status::Unconverged
            };
            SweepRow {
                value,
                n_c: table.n_cutoff,
                j_re: table.j_re,
                j_tr: table.j_tr,
                j_total: table.j_total,
                residual,
                status,
            }
        }
        Err(_) => SweepRow {
            value,
            n_c,
            j_re: Vec::new(),
            j_tr: Vec::new(),
            j_total: f64::NAN,
            residual: f64::NAN,
            status: Status::Unconverged,
        },
    }
}

/// One solve; solver errors surface (exit code 2) instead of becoming an
/// unconverged row.
pub fn run_single(cfg: &RunConfig) -> Result<SweepRow, CliError> {
    cfg.validate()?;
    let (ch, amps) = scattering_solution(
        &cfg.system,
        &cfg.incident,
        cfg.resolved_modes(),
        cfg.quadrature_tol,
    )?;
    let table = coefficients(&ch, &amps, &cfg.incident)?;
    let status = if (table.j_total - 1.0).abs() <= cfg.conservation_tol {
        Status::Converged
    } else {
        Status::Unconverged
    };
    Ok(SweepRow {
        value: cfg.incident.k0,
        n_c: table.n_cutoff,
        j_re: table.j_re,
        j_tr: table.j_tr,
        j_total: table.j_total,
        residual: amps.residual_norm,
        status,
    })
}

/// Builds the configuration for one sweep point.
fn point_config(
    base: &RunConfig,
    parameter: SweepParameter,
    value: f64,
) -> Result<RunConfig, CliError> {
    let s = &base.system;
    let mut cfg = base.clone();
    match parameter {
        SweepParameter::Gamma1 => {
            cfg.system = SystemParams::new(s.m1, s.m2, value, s.gamma2, s.omega, s.hbar)?;
        }
        SweepParameter::Gamma2 => {
            cfg.system = SystemParams::new(s.m1, s.m2, s.gamma1, value, s.omega, s.hbar)?;
        }
        SweepParameter::GammaBoth => {
            cfg.system = SystemParams::new(s.m1, s.m2, value, value, s.omega, s.hbar)?;
        }
        SweepParameter::Omega => {
            cfg.system = SystemParams::new(s.m1, s.m2, s.gamma1, s.gamma2, value, s.hbar)?;
        }
        SweepParameter::MassRatio => {
            let total = s.total_mass();
            cfg.system = SystemParams::new(
                value * total,
                (1.0 - value) * total,
                s.gamma1,
                s.gamma2,
                s.omega,
                s.hbar,
            )?;
        }
        SweepParameter::K0 => {
            cfg.incident = IncidentSpec::new(value, base.incident.l)?;
        }
        SweepParameter::NModes => {
            cfg.n_modes = Some(value as usize);
        }
    }
    Ok(cfg)
}

/// Evaluates the sweep grid in parallel, rows in grid order.  Points whose
/// configuration is invalid or whose solve fails become unconverged rows; the
/// sweep always completes.
pub fn run_sweep(base: &RunConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    base.validate()?;
    let values = spec.values();
    let rows = values
        .par_iter()
        .map(|&v| match point_config(base, spec.parameter, v) {
            Ok(cfg) if cfg.validate().is_ok() => evaluate(&cfg, v),
            _ => SweepRow {
                value: v,
                n_c: 0,
                j_re: Vec::new(),
                j_tr: Vec::new(),
                j_total: f64::NAN,
                residual: f64::NAN,
                status: Status::Unconverged,
            },
        })
        .collect();
    Ok(rows)
}

/// Truncation study: rows for N = n_c+1 ..= n_max on a fixed configuration,
/// `value` carrying N.
pub fn run_convergence(base: &RunConfig, n_max: usize) -> Result<Vec<SweepRow>, CliError> {
    let n_c = cutoff_index(&base.system, &base.incident);
    if n_max <= n_c + 1 {
        return Err(CliError::usage(format!(
            "convergence study needs --nmax above n_c + 1 = {}",
            n_c + 1
        )));
    }
    let rows = (n_c + 1..=n_max)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| {
            let cfg = RunConfig {
                n_modes: Some(n),
                ..base.clone()
            };
            evaluate(&cfg, n as f64)
        })
        .collect();
    Ok(rows)
}

/// Largest change in any coefficient between adjacent rows; index i holds the
/// change from row i to row i+1.  NaN rows propagate NaN.
pub fn successive_changes(rows: &[SweepRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if a.j_re.is_empty() || b.j_re.is_empty() || a.n_c != b.n_c {
                return f64::NAN;
            }
            let mut worst = 0.0_f64;
            for n in 0..=a.n_c {
                worst = worst.max((a.j_re[n] - b.j_re[n]).abs());
                worst = worst.max((a.j_tr[n] - b.j_tr[n]).abs());
            }
            worst
        })
        .collect()
}

/// One point of the first-order-vs-full comparison.
#[derive(Debug, Clone)]
pub struct BornRow {
    pub value: f64,
    pub n_c: usize,
    pub born_re: Vec<f64>,
    pub born_tr: Vec<f64>,
    pub match_re: Vec<f64>,
    pub match_tr: Vec<f64>,
}

/// First-order reference and full solve over a K0 grid (ground-state
/// incidence only).  Failed points keep NaN summary entries.
pub fn run_born(base: &RunConfig, spec: &SweepSpec) -> Result<Vec<BornRow>, CliError> {
    if base.incident.l != 0 {
        return Err(CliError::usage(
            "the first-order reference covers ground-state incidence only (l = 0)",
        ));
    }
    if spec.parameter != SweepParameter::K0 {
        return Err(CliError::usage("the first-order comparison sweeps k0 only"));
    }
    base.validate()?;
    let rows = spec
        .values()
        .par_iter()
        .map(|&k0| {
            let incident = match IncidentSpec::new(k0, 0) {
                Ok(inc) => inc,
                Err(_) => {
                    return BornRow {
                        value: k0,
                        n_c: 0,
                        born_re: Vec::new(),
                        born_tr: Vec::new(),
                        match_re: Vec::new(),
                        match_tr: Vec::new(),
                    }
                }
            };
            let cfg = RunConfig {
                incident,
                ..base.clone()
            };
            let n_c = cutoff_index(&cfg.system, &cfg.incident);
            let full = evaluate(&cfg, k0);
            let first =
                born::born_coefficients(&cfg.system, &cfg.incident, born::DEFAULT_THRESHOLD_GUARD);
            let (born_re, born_tr) = match first {
                Ok(t) => (t.j_re, t.j_tr),
                Err(_) => (Vec::new(), Vec::new()),
            };
            BornRow {
                value: k0,
                n_c,
                born_re,
                born_tr,
                match_re: full.j_re,
                match_tr: full.j_tr,
            }
        })
        .collect();
    Ok(rows)
}

/// Threshold values of the incident momentum inside [lo, hi] for the sweep's
/// incident level, in ascending order (for plot markers).
pub fn momentum_thresholds(system: &SystemParams, l: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut n = l + 1;
    while let Ok(kc) = critical_momentum(system, l, n) {
        if kc > hi {
            break;
        }
        if kc >= lo {
            out.push(kc);
        }
        n += 1;
    }
    out
}

/// Threshold values of the binding frequency inside [lo, hi], descending n.
pub fn omega_thresholds(
    system: &SystemParams,
    incident: &IncidentSpec,
    lo: f64,
    hi: f64,
) -> Vec<f64> {
    let mut out = Vec::new();
    for n in incident.l + 1..incident.l + 64 {
        let oc = match critical_omega(system, incident, n) {
            Ok(oc) => oc,
            Err(_) => continue,
        };
        if oc >= lo && oc <= hi {
            out.push(oc);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Marker positions for a sweep, if the swept axis has thresholds.
pub fn sweep_markers(base: &RunConfig, spec: &SweepSpec) -> Vec<f64> {
    match spec.parameter {
        SweepParameter::K0 => {
            momentum_thresholds(&base.system, base.incident.l, spec.from, spec.to)
        }
        SweepParameter::Omega => omega_thresholds(&base.system, &base.incident, spec.from, spec.to),
        _ => Vec::new(),
    }
}

/// Sweeps need their x-axis flagged as logarithmic for log-scaled grids.
pub fn is_log(spec: &SweepSpec) -> bool {
    spec.scale == Scale::Log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::defaults;

    fn base() -> RunConfig {
        RunConfig {
            system: SystemParams::new(
                defaults::M1,
                defaults::M2,
                defaults::GAMMA1,
                defaults::GAMMA2,
                defaults::OMEGA,
                1.0,
            )
            .unwrap(),
            incident: IncidentSpec::new(defaults::K0, defaults::L).unwrap(),
            n_modes: None,
            conservation_tol: defaults::CONSERVATION_TOL,
            quadrature_tol: defaults::QUADRATURE_TOL,
        }
    }

    #[test]
    fn single_solve_reports_open_channels_and_residual() {
        let row = run_single(&base()).unwrap();
        assert_eq!(row.n_c, 1);
        assert_eq!(row.j_re.len(), 2);
        assert!(row.residual > 0.0);
        assert!((row.j_total - 1.0).abs() < 1e-3);
        // The default tolerance is tighter than the truncation delivers.
        assert_eq!(row.status, Status::Unconverged);
    }

    #[test]
    fn sweep_rows_follow_grid_order_and_survive_bad_points() {
        let spec = SweepSpec::new(SweepParameter::Gamma1, 0.0, 2.0, 5, Scale::Linear).unwrap();
        let rows = run_sweep(&base(), &spec).unwrap();
        assert_eq!(rows.len(), 5);
        for (i, row) in rows.iter().enumerate() {
            assert!((row.value - 0.5 * i as f64).abs() < 1e-12);
        }
        // gamma = 0 point: free propagation, conserved to machine precision.
        assert_eq!(rows[0].status, Status::Converged);
        assert!((rows[0].j_tr[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mass_ratio_points_preserve_total_mass() {
        // Equal couplings, so mirroring the mass ratio is the exchange map
        // and r and 1 - r must give identical coefficients.
        let cfg = RunConfig {
            system: SystemParams::new(1.0, 1.0, 1.0, 1.0, 3.0, 1.0).unwrap(),
            ..base()
        };
        let spec = SweepSpec::new(SweepParameter::MassRatio, 0.2, 0.8, 3, Scale::Linear).unwrap();
        let rows = run_sweep(&cfg, &spec).unwrap();
        assert_eq!(rows.len(), 3);
        for n in 0..=rows[0].n_c {
            assert!((rows[0].j_re[n] - rows[2].j_re[n]).abs() < 1e-9);
            assert!((rows[0].j_tr[n] - rows[2].j_tr[n]).abs() < 1e-9);
        }
    }

    #[test]
    fn convergence_rows_start_just_above_cutoff() {
        let rows = run_convergence(&base(), 6).unwrap();
        assert_eq!(rows.first().unwrap().value, 2.0);
        assert_eq!(rows.last().unwrap().value, 6.0);
        let changes = successive_changes(&rows);
        assert_eq!(changes.len(), rows.len() - 1);
        assert!(changes.iter().all(|c| c.is_finite()));
        assert!(run_convergence(&base(), 2).is_err());
    }

    #[test]
    fn born_rows_cover_both_references() {
        let cfg = RunConfig {
            system: SystemParams::new(1.1, 0.9, 0.1, 0.05, 2.0, 1.0).unwrap(),
            ..base()
        };
        let spec = SweepSpec::new(SweepParameter::K0, 1.0, 3.4, 3, Scale::Linear).unwrap();
        let rows = run_born(&cfg, &spec).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!(row.born_re.len(), row.n_c + 1);
            assert_eq!(row.match_re.len(), row.n_c + 1);
        }
        // Weak couplings: the two references agree on the elastic channel.
        let last = rows.last().unwrap();
        assert!((last.born_re[0] - last.match_re[0]).abs() < 0.01);

        let bad = RunConfig {
            incident: IncidentSpec::new(4.0, 1).unwrap(),
            ..cfg
        };
        assert!(run_born(&bad, &spec).is_err());
    }

    #[test]
    fn threshold_markers_match_the_analytic_positions() {
        let cfg = base();
        // M = 2, omega = 3: channel n opens at sqrt(6 n * 2) = sqrt(12 n).
        let marks = momentum_thresholds(&cfg.system, 0, 1.0, 6.0);
        assert_eq!(marks.len(), 3);
        assert!((marks[0] - 12.0_f64.sqrt()).abs() < 1e-12);
        assert!((marks[2] - 36.0_f64.sqrt()).abs() < 1e-12);

        let spec = SweepSpec::new(SweepParameter::Omega, 1.0, 9.0, 5, Scale::Linear).unwrap();
        let marks = sweep_markers(&cfg, &spec);
        // K0 = 4, M = 2: omega_c(n) = 16 / (4 n) = 4 / n, down to 1.0 at n = 4.
        assert_eq!(marks, vec![1.0, 4.0 / 3.0, 2.0, 4.0]);
    }
}
