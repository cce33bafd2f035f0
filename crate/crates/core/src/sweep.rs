//! Convergence-rate sweeps over the alignment scale: run the kinetic solver
//! for each eps with matched well-prepared data, collect the worst relative
//! entropy against the reference, fit the log-log slope, and measure the
//! Lipschitz-observable defect with its own slope.

use crate::domain::Domain1D;
use crate::ensemble::{MomentField, ParticleEnsemble};
use crate::entropy::EntropyReport;
use crate::error::{Error, Result};
use crate::euler::{InitProfile, ReferenceSolution};
use crate::exec;
use crate::init::{build_ensemble, WellPreparedSpec};
use crate::solver::{run, RunSink, SimParams};

/// Ordinary least squares on (ln eps, ln err).
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit log err against log eps. All inputs must be strictly positive.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParam(format!(
            "rate fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    for &(eps, err) in points {
        if !eps.is_finite() || eps <= 0.0 || !err.is_finite() || err <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "rate fit needs positive values, got ({eps}, {err})"
            )));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xb = xs.iter().sum::<f64>() / n;
    let yb = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xb) * (x - xb)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xb) * (y - yb)).sum();
    let slope = sxy / sxx;
    let intercept = yb - slope * xb;
    let ss_tot: f64 = ys.iter().map(|y| (y - yb) * (y - yb)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let d = y - (intercept + slope * x);
            d * d
        })
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * (1.0 + yb * yb) {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Smooth space-time test function for the observable defect: vanishes at
/// t = 0 and t = T, single smooth bump in x.
fn bump(t: f64, x: f64, t_final: f64, length: f64) -> f64 {
    let st = (std::f64::consts::PI * t / t_final).sin();
    let sx = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * x / length).cos());
    st * st * sx
}

/// psi(v) = sqrt(1 + v^2), a Lipschitz velocity observable.
fn observable(v: f64) -> f64 {
    (1.0 + v * v).sqrt()
}

/// Collects sup Erel and the observable defect during a run.
struct SweepSink {
    t_final: f64,
    length: f64,
    /// (t, kinetic observable integral, fluid observable integral)
    series: Vec<(f64, f64, f64)>,
}

impl RunSink for SweepSink {
    fn on_output(
        &mut self,
        report: &EntropyReport,
        ens: &ParticleEnsemble,
        field: &MomentField,
        reference: &[(f64, f64)],
    ) {
        let t = report.t;
        let xs = ens.positions();
        let vs = ens.velocities();
        let ws = ens.weights();
        let (t_final, length) = (self.t_final, self.length);
        let kin = exec::sum_indexed(ens.len(), |i| {
            ws[i] * observable(vs[i]) * bump(t, xs[i], t_final, length)
        });
        let dom = field.domain();
        let mut fluid = 0.0;
        for (j, &(rho, u)) in reference.iter().enumerate() {
            fluid += rho * observable(u) * bump(t, dom.node(j), t_final, length);
        }
        fluid *= dom.dx();
        self.series.push((t, kin, fluid));
    }
}

impl SweepSink {
    /// |int_0^T (kinetic - fluid) dt| by trapezoidal quadrature over outputs.
    fn defect(&self) -> f64 {
        let mut acc = 0.0;
        for w in self.series.windows(2) {
            let dt = w[1].0 - w[0].0;
            acc += 0.5 * dt * ((w[1].1 - w[1].2) + (w[0].1 - w[0].2));
        }
        acc.abs()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepCase {
    pub eps: f64,
    pub sup_rel_entropy: f64,
    pub dissipation_budget: f64,
    pub energy_gap: f64,
    pub observable_defect: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cases: Vec<SweepCase>,
    /// Fit of sup Erel against eps; present when >= 4 eps values ran.
    pub rel_entropy_fit: Option<RateFit>,
    /// Fit of the observable defect against eps.
    pub observable_fit: Option<RateFit>,
    /// Largest eps at which the error curve stops decreasing while eps keeps
    /// shrinking: the discretization-error floor has been reached there and
    /// the fitted slope underestimates the physical rate.
    pub floor_from_eps: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub profile: InitProfile,
    pub dom: Domain1D,
    pub lambda: f64,
    pub cfl: f64,
    pub t_final: f64,
    pub output_interval: f64,
    pub spread_coeff: f64,
    pub quad: crate::init::QuadOrder,
    pub particles_per_cell: usize,
    pub velocity_guard: f64,
}

impl SweepConfig {
    fn params(&self, eps: f64) -> SimParams {
        SimParams {
            eps,
            lambda: self.lambda,
            cfl: self.cfl,
            t_final: self.t_final,
            output_interval: self.output_interval,
            rho_floor: None,
            velocity_guard: self.velocity_guard,
        }
    }
}

/// Run one sweep member and collect its summary.
pub fn run_sweep_case(config: &SweepConfig, eps: f64) -> Result<SweepCase> {
    let reference = ReferenceSolution::new(config.profile, config.dom.length(), config.lambda)?;
    let spec = WellPreparedSpec {
        eps,
        spread_coeff: config.spread_coeff,
        quad: config.quad,
        particles_per_cell: config.particles_per_cell,
    };
    let mut ens = build_ensemble(&spec, &config.profile, &config.dom, config.velocity_guard)?;
    let gaps = crate::init::verify_assumptions(
        &ens,
        &spec,
        &config.profile,
        &config.dom,
        1e-12 * ens.total_mass() / config.dom.length(),
    )?;
    let mut sink = SweepSink {
        t_final: config.t_final,
        length: config.dom.length(),
        series: Vec::new(),
    };
    let params = config.params(eps);
    let result = run(&mut ens, &config.dom, &params, &reference, &[], &mut sink)?;
    Ok(SweepCase {
        eps,
        sup_rel_entropy: result.sup_rel_entropy(),
        dissipation_budget: result.final_dissipation_budget(),
        energy_gap: gaps.energy_gap,
        observable_defect: sink.defect(),
    })
}

/// Run the sweep over the eps list. Members are independent; with the
/// parallel feature they run concurrently and the results are ordered by the
/// input list either way.
pub fn run_sweep(config: &SweepConfig, eps_list: &[f64]) -> Result<SweepResult> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParam("empty eps list".into()));
    }

    #[cfg(feature = "parallel")]
    let cases: Result<Vec<SweepCase>> = {
        use rayon::prelude::*;
        eps_list
            .par_iter()
            .map(|&eps| run_sweep_case(config, eps))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let cases: Result<Vec<SweepCase>> =
        eps_list.iter().map(|&eps| run_sweep_case(config, eps)).collect();
    let cases = cases?;

    let (rel_fit, obs_fit) = if cases.len() >= 4 {
        let rel_points: Vec<(f64, f64)> =
            cases.iter().map(|c| (c.eps, c.sup_rel_entropy)).collect();
        let obs_points: Vec<(f64, f64)> =
            cases.iter().map(|c| (c.eps, c.observable_defect)).collect();
        (Some(rate_fit(&rel_points)?), Some(rate_fit(&obs_points)?))
    } else {
        (None, None)
    };

    // floor detection: scan in order of decreasing eps and flag the first
    // place the error turns back up
    let mut ordered: Vec<&SweepCase> = cases.iter().collect();
    ordered.sort_by(|a, b| b.eps.partial_cmp(&a.eps).unwrap());
    let mut floor_from_eps = None;
    for w in ordered.windows(2) {
        if w[1].sup_rel_entropy >= w[0].sup_rel_entropy {
            floor_from_eps = Some(w[0].eps);
            break;
        }
    }

    Ok(SweepResult {
        cases,
        rel_entropy_fit: rel_fit,
        observable_fit: obs_fit,
        floor_from_eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_linear_law() {
        let pts: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&e| (e, 3.0 * e)).collect();
        let fit = rate_fit(&pts).unwrap();
        assert_relative_eq!(fit.slope, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 3.0f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_square_root_law() {
        let pts: Vec<(f64, f64)> = [1e-1f64, 3e-2, 1e-2, 3e-3, 1e-3]
            .iter()
            .map(|&e| (e, e.sqrt()))
            .collect();
        let fit = rate_fit(&pts).unwrap();
        assert_relative_eq!(fit.slope, 0.5, max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_points_interpolate_exactly() {
        let fit = rate_fit(&[(1e-1, 2e-2), (1e-2, 2e-3)]).unwrap();
        assert_relative_eq!(fit.slope, 1.0, max_relative = 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rate_fit(&[(1.0, 1.0)]).is_err());
        assert!(rate_fit(&[(1.0, 1.0), (0.5, -1.0)]).is_err());
        assert!(rate_fit(&[(0.0, 1.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn fits_absent_below_four_eps_values() {
        let config = SweepConfig {
            profile: crate::euler::InitProfile::Sine {
                a0: 1.0,
                a1: 0.5,
                b1: 0.2,
            },
            dom: crate::domain::Domain1D::new(1.0, 16).unwrap(),
            lambda: 0.0,
            cfl: 0.5,
            t_final: 0.05,
            output_interval: 0.025,
            spread_coeff: 1.0,
            quad: crate::init::QuadOrder::Three,
            particles_per_cell: 2,
            velocity_guard: 1e3,
        };
        let result = run_sweep(&config, &[1e-1, 1e-2]).unwrap();
        assert_eq!(result.cases.len(), 2);
        assert!(result.rel_entropy_fit.is_none());
        assert!(result.observable_fit.is_none());
    }
}
