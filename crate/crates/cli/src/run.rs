//! Command implementations. Each run_* produces CSV text (17 significant
//! digits, '.' decimal, header row) and the caller decides where it goes.

use crate::config::{linspace, ConfigError, RunConfig};
use rayon::prelude::*;
use spinpulse::pulse::{field_from_angles, EulerTrajectory};
use spinpulse::sech::{SechPulse, SechPulseParams};
use spinpulse::su2::{euler_params_from_angles, evolution_from_r, Su2Propagator};
use spinpulse::validate::{run_suite, SuiteReport, ValidateOptions};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(e) => write!(f, "numerical error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

fn numerical(e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(e.to_string())
}

fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(rows.len() * header.len() * 26);
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v:.16e}"));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Swap probability curve: columns t_ns, P.
pub fn run_swap_prob(cfg: &RunConfig) -> Result<String, RunError> {
    let params = cfg.sech_params()?;
    let grid = cfg.time_grid()?;
    let pulse = SechPulse::new(params).map_err(numerical)?;
    let rows = grid
        .par_iter()
        .map(|&t| Ok(vec![t, pulse.swap_probability(t).map_err(numerical)?]))
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(render_csv(&["t_ns", "P"], &rows))
}

/// Parameter sweep of the Swap probability; variable one of omega | J | c | t.
pub fn run_sweep(cfg: &RunConfig) -> Result<String, RunError> {
    let var = cfg.get_str("sweep_var")?.to_string();
    let start = cfg.get_f64("sweep_start")?;
    let stop = cfg.get_f64("sweep_stop")?;
    let samples = cfg.get_usize("sweep_samples")?;
    if samples == 0 {
        return Err(ConfigError("key `sweep_samples`: must be at least 1".into()).into());
    }
    if samples > 1 && !(start.is_finite() && stop > start) {
        return Err(ConfigError(
            "keys `sweep_start`/`sweep_stop`: stop must exceed start".into(),
        )
        .into());
    }
    let values = linspace(start, stop, samples);
    let base = cfg.sech_params()?;

    let (header, rows): (&[&str; 2], Vec<Vec<f64>>) = match var.as_str() {
        "t" => {
            let pulse = SechPulse::new(base).map_err(numerical)?;
            let rows = values
                .par_iter()
                .map(|&t| Ok(vec![t, pulse.swap_probability(t).map_err(numerical)?]))
                .collect::<Result<Vec<_>, RunError>>()?;
            (&["t_ns", "P"], rows)
        }
        "omega" | "J" | "c" => {
            let t_eval = cfg.get_f64("t_eval")?;
            let rows = values
                .par_iter()
                .map(|&v| {
                    let p = match var.as_str() {
                        "omega" => SechPulseParams::new(base.a, base.c, v),
                        "J" => SechPulseParams::new(v, base.c, base.omega),
                        _ => SechPulseParams::new(base.a, v, base.omega),
                    }
                    .map_err(numerical)?;
                    let prob = SechPulse::new(p)
                        .map_err(numerical)?
                        .swap_probability(t_eval)
                        .map_err(numerical)?;
                    Ok(vec![v, prob])
                })
                .collect::<Result<Vec<_>, RunError>>()?;
            let header: &[&str; 2] = match var.as_str() {
                "omega" => &["omega_GHz", "P"],
                "J" => &["J_GHz", "P"],
                _ => &["c_GHz", "P"],
            };
            (header, rows)
        }
        other => {
            return Err(ConfigError(format!(
                "key `sweep_var`: `{other}` is not one of omega | J | c | t"
            ))
            .into())
        }
    };
    Ok(render_csv(header, &rows))
}

/// Field synthesis: columns t, theta, phi, alpha, F1, F2, F3.
pub fn run_synthesize(cfg: &RunConfig) -> Result<String, RunError> {
    let traj = EulerTrajectory {
        theta: cfg.angle_profile("theta")?,
        phi: cfg.angle_profile("phi")?,
        alpha: cfg.angle_profile("alpha")?,
    };
    let grid = cfg.time_grid()?;
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&t| {
            let p = traj.eval(t);
            let f = field_from_angles(&traj, t);
            vec![t, p.theta, p.phi, p.alpha, f.f1, f.f2, f.f3]
        })
        .collect();
    Ok(render_csv(&["t", "theta", "phi", "alpha", "F1", "F2", "F3"], &rows))
}

/// Evolution operator entries over time, as re/im pairs. `system = sech`
/// uses the closed form; `system = angles` uses the half-angle construction
/// û(t) = R(t)R₀⁻¹ for the configured pulses.
pub fn run_evolve(cfg: &RunConfig) -> Result<String, RunError> {
    let grid = cfg.time_grid()?;
    let system = if cfg.has("system") { cfg.get_str("system")? } else { "sech" };
    let header = [
        "t_ns", "u11_re", "u11_im", "u12_re", "u12_im", "u21_re", "u21_im", "u22_re", "u22_im",
    ];
    let rows: Vec<Vec<f64>> = match system {
        "sech" => {
            let pulse = SechPulse::new(cfg.sech_params()?).map_err(numerical)?;
            grid.par_iter()
                .map(|&t| {
                    let u = pulse.evolution(t).map_err(numerical)?;
                    Ok(matrix_row(t, &u))
                })
                .collect::<Result<Vec<_>, RunError>>()?
        }
        "angles" => {
            let traj = EulerTrajectory {
                theta: cfg.angle_profile("theta")?,
                phi: cfg.angle_profile("phi")?,
                alpha: cfg.angle_profile("alpha")?,
            };
            let at = |t: f64| -> Result<Su2Propagator, RunError> {
                let p = traj.eval(t);
                let ep = euler_params_from_angles(p.theta, p.phi, p.alpha).map_err(numerical)?;
                Su2Propagator::new(ep, t).map_err(numerical)
            };
            let r0 = at(grid[0])?;
            grid.iter()
                .map(|&t| {
                    let u = evolution_from_r(&at(t)?, &r0).map_err(numerical)?;
                    Ok(matrix_row(t, &u))
                })
                .collect::<Result<Vec<_>, RunError>>()?
        }
        other => {
            return Err(ConfigError(format!(
                "key `system`: `{other}` is not one of sech | angles"
            ))
            .into())
        }
    };
    Ok(render_csv(&header, &rows))
}

fn matrix_row(t: f64, u: &spinpulse::cmat::CMat) -> Vec<f64> {
    let mut row = vec![t];
    for i in 0..2 {
        for j in 0..2 {
            row.push(u[(i, j)].re);
            row.push(u[(i, j)].im);
        }
    }
    row
}

/// The validation suite; tolerance and (for tests) an injected perturbation
/// come from the options.
pub fn run_validate(opts: &ValidateOptions) -> SuiteReport {
    run_suite(opts)
}
