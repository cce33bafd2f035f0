//! Particle representation of the kinetic distribution and the cloud-in-cell
//! deposition / gather pair linking particles to grid moments.
//!
//! Deposition and gather use the same periodic linear hat of width 2 dx, so
//! they are adjoint with respect to the particle weights. That adjointness is
//! what makes the alignment relaxation conserve total momentum exactly.

use crate::domain::Domain1D;
use crate::error::{Error, Result};
use crate::exec::{self, Exec};

/// Lagrangian carrier of the kinetic distribution: positions in [0, L),
/// velocities, and nonnegative weights (each weight is the mass of a
/// phase-space patch).
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    xs: Vec<f64>,
    vs: Vec<f64>,
    ws: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn new(xs: Vec<f64>, vs: Vec<f64>, ws: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::NoParticles);
        }
        if xs.len() != vs.len() || xs.len() != ws.len() {
            return Err(Error::InvalidParam(format!(
                "state length mismatch: {} positions, {} velocities, {} weights",
                xs.len(),
                vs.len(),
                ws.len()
            )));
        }
        let ens = Self { xs, vs, ws };
        ens.validate()?;
        let mass = ens.total_mass();
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "total mass must be finite and positive, got {mass}"
            )));
        }
        Ok(ens)
    }

    /// Check every particle for finite state and nonnegative weight.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.len() {
            if !self.xs[i].is_finite() || !self.vs[i].is_finite() || !self.ws[i].is_finite() {
                return Err(Error::NonFiniteParticle { index: i });
            }
            if self.ws[i] < 0.0 {
                return Err(Error::InvalidParam(format!(
                    "negative weight {} at index {i}",
                    self.ws[i]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.xs
    }

    pub fn velocities(&self) -> &[f64] {
        &self.vs
    }

    pub fn weights(&self) -> &[f64] {
        &self.ws
    }

    pub(crate) fn positions_mut(&mut self) -> (&mut [f64], &[f64]) {
        (&mut self.xs, &self.vs)
    }

    pub(crate) fn velocities_mut(&mut self) -> (&mut [f64], &[f64]) {
        (&mut self.vs, &self.xs)
    }

    /// Total mass, deterministic chunked sum.
    pub fn total_mass(&self) -> f64 {
        exec::sum_indexed(self.len(), |i| self.ws[i])
    }

    /// Total momentum, deterministic chunked sum.
    pub fn total_momentum(&self) -> f64 {
        exec::sum_indexed(self.len(), |i| self.ws[i] * self.vs[i])
    }

    pub fn max_abs_velocity(&self) -> f64 {
        exec::max_indexed(self.len(), |i| self.vs[i].abs())
    }
}

/// Grid moments of the ensemble on the cell centers: density, momentum
/// density, second velocity moment (all per unit length), and the local mean
/// velocity u_j = P_j / rho_j where rho_j >= rho_floor, zero otherwise.
#[derive(Debug, Clone)]
pub struct MomentField {
    dom: Domain1D,
    rho: Vec<f64>,
    mom: Vec<f64>,
    msq: Vec<f64>,
    vel: Vec<f64>,
    rho_floor: f64,
}

impl MomentField {
    pub fn domain(&self) -> &Domain1D {
        &self.dom
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn momentum_density(&self) -> &[f64] {
        &self.mom
    }

    /// Second velocity moment deposited on the same stencil as rho and P.
    pub fn second_moment(&self) -> &[f64] {
        &self.msq
    }

    pub fn velocity(&self) -> &[f64] {
        &self.vel
    }

    pub fn rho_floor(&self) -> f64 {
        self.rho_floor
    }

    pub fn is_floored(&self, j: usize) -> bool {
        self.rho[j] < self.rho_floor
    }

    /// Mass sitting in floored cells, excluded from relative-entropy sums.
    pub fn excluded_mass(&self) -> f64 {
        let mut m = 0.0;
        for j in 0..self.rho.len() {
            if self.is_floored(j) {
                m += self.rho[j] * self.dom.dx();
            }
        }
        m
    }

    /// Most negative cell value of (second moment - rho u^2). Nonnegative up
    /// to rounding: the deposited moments satisfy P_j^2 <= rho_j M2_j cell by
    /// cell (Cauchy-Schwarz with the shared hat weights).
    pub fn minimization_worst(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for j in 0..self.rho.len() {
            if self.is_floored(j) {
                continue;
            }
            worst = worst.min(self.msq[j] - self.mom[j] * self.mom[j] / self.rho[j]);
        }
        if worst == f64::INFINITY {
            0.0
        } else {
            worst
        }
    }
}

/// Periodic linear hat: node pair and weights for a position in [0, L).
/// The two weights sum to one for every x (partition of unity).
#[inline]
pub fn hat_weights(dom: &Domain1D, x: f64) -> (usize, usize, f64, f64) {
    debug_assert!(x.is_finite());
    let s = x / dom.dx() - 0.5;
    let j0 = s.floor();
    let frac = s - j0;
    let nx = dom.nx() as isize;
    let j0w = (j0 as isize).rem_euclid(nx) as usize;
    let j1w = (j0 as isize + 1).rem_euclid(nx) as usize;
    (j0w, j1w, 1.0 - frac, frac)
}

/// Deposit particle moments onto the grid with the periodic linear hat:
/// rho_j = sum_i w_i W_j(x_i) / dx, P_j = sum_i w_i v_i W_j(x_i) / dx, and the
/// second moment alike. Accumulation runs over fixed particle chunks folded
/// in ascending order, so the output is bitwise reproducible for any worker
/// count.
pub fn deposit_moments(
    ens: &ParticleEnsemble,
    dom: &Domain1D,
    rho_floor: f64,
) -> Result<MomentField> {
    deposit_moments_with(exec::default_exec(), ens, dom, rho_floor)
}

/// Explicit-strategy deposit, exposed for benches and determinism tests.
pub fn deposit_moments_with(
    exec: Exec,
    ens: &ParticleEnsemble,
    dom: &Domain1D,
    rho_floor: f64,
) -> Result<MomentField> {
    if ens.is_empty() {
        return Err(Error::NoParticles);
    }
    ens.validate()?;
    if !rho_floor.is_finite() || rho_floor < 0.0 {
        return Err(Error::InvalidParam(format!("rho_floor must be >= 0, got {rho_floor}")));
    }

    let nx = dom.nx();
    let xs = ens.positions();
    let vs = ens.velocities();
    let ws = ens.weights();

    struct Partial {
        rho: Vec<f64>,
        mom: Vec<f64>,
        msq: Vec<f64>,
    }

    let partials = exec::map_chunks_with(exec, ens.len(), |r| {
        let mut p = Partial {
            rho: vec![0.0; nx],
            mom: vec![0.0; nx],
            msq: vec![0.0; nx],
        };
        for i in r {
            let (j0, j1, w0, w1) = hat_weights(dom, xs[i]);
            let w = ws[i];
            let wv = w * vs[i];
            let wvv = wv * vs[i];
            p.rho[j0] += w0 * w;
            p.rho[j1] += w1 * w;
            p.mom[j0] += w0 * wv;
            p.mom[j1] += w1 * wv;
            p.msq[j0] += w0 * wvv;
            p.msq[j1] += w1 * wvv;
        }
        p
    });

    let mut rho = vec![0.0; nx];
    let mut mom = vec![0.0; nx];
    let mut msq = vec![0.0; nx];
    for p in partials {
        for j in 0..nx {
            rho[j] += p.rho[j];
            mom[j] += p.mom[j];
            msq[j] += p.msq[j];
        }
    }
    let inv_dx = 1.0 / dom.dx();
    for j in 0..nx {
        rho[j] *= inv_dx;
        mom[j] *= inv_dx;
        msq[j] *= inv_dx;
    }
    let vel = (0..nx)
        .map(|j| if rho[j] >= rho_floor { mom[j] / rho[j] } else { 0.0 })
        .collect();

    Ok(MomentField {
        dom: *dom,
        rho,
        mom,
        msq,
        vel,
        rho_floor,
    })
}

/// Evaluate the local mean velocity at x with the same hat stencil used by
/// deposition (the adjoint gather).
#[inline]
pub fn gather_velocity(field: &MomentField, x: f64) -> f64 {
    let (j0, j1, w0, w1) = hat_weights(&field.dom, x);
    w0 * field.vel[j0] + w1 * field.vel[j1]
}

/// Nearest-node gather. Not the adjoint of the deposit; kept as a negative
/// control for the check suite.
#[inline]
pub fn gather_velocity_nearest(field: &MomentField, x: f64) -> f64 {
    let (j0, j1, w0, _) = hat_weights(&field.dom, x);
    if w0 >= 0.5 {
        field.vel[j0]
    } else {
        field.vel[j1]
    }
}
