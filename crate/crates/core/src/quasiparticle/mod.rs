//! Quasiparticle densities, QP-limited decay, and gap-engineering rules.
//!
//! Temperatures and gaps are in kelvin unless a name says otherwise.

mod profile;

use alloc::vec::Vec;

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::numeric::{find_root, Quadrature};

pub use profile::{
    profile_from_stack, protected_stack, tc_from_thickness, unprotected_stack, GapProfile,
    GapSegment, SegmentGap, Side, StackSegment, ThicknessTcTable,
};

/// Material and nonequilibrium parameters of the film.
#[derive(Debug, Clone, PartialEq)]
pub struct QpEnvironment {
    /// Reduced nonequilibrium QP density.
    pub x_nqp: f64,
    /// Diffusion constant, m^2/s.
    pub diffusion_m2_s: f64,
    /// `(energy above the gap in K, tau_eps in s)`, tau decreasing.
    pub tau_anchors: Vec<(f64, f64)>,
    pub xi_um: f64,
    /// Density of states per spin, eV^-1 um^-3.
    pub nu0_per_ev_um3: f64,
    /// Effective temperature of the gap-edge QP distribution.
    pub t_qp_k: f64,
}

impl Default for QpEnvironment {
    fn default() -> Self {
        QpEnvironment {
            x_nqp: 8.0e-7,
            diffusion_m2_s: 0.01,
            tau_anchors: alloc::vec![(0.5, 1e-5), (14.0, 1e-11)],
            xi_um: 0.1,
            nu0_per_ev_um3: 1.72e10,
            t_qp_k: 0.04,
        }
    }
}

impl QpEnvironment {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.x_nqp >= 0.0 && self.x_nqp.is_finite(),
            Config,
            "x_nqp must be >= 0"
        );
        ensure!(
            self.diffusion_m2_s > 0.0,
            Config,
            "diffusion constant must be positive"
        );
        ensure!(
            self.xi_um > 0.0,
            Config,
            "coherence length must be positive"
        );
        ensure!(self.nu0_per_ev_um3 > 0.0, Config, "nu0 must be positive");
        ensure!(self.t_qp_k > 0.0, Config, "T_qp must be positive");
        ensure!(
            self.tau_anchors.len() >= 2,
            Config,
            "need at least two tau_eps anchors"
        );
        for &(e, t) in &self.tau_anchors {
            ensure!(
                e > 0.0 && t > 0.0,
                Config,
                "tau_eps anchors must be positive"
            );
        }
        for w in self.tau_anchors.windows(2) {
            ensure!(
                w[1].0 > w[0].0 && w[1].1 < w[0].1,
                Config,
                "tau_eps anchors must have increasing energy and decreasing tau"
            );
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure!(
        v > 0.0 && v.is_finite(),
        Domain,
        "{name} must be positive, got {v}"
    );
    Ok(())
}

/// Thermal part of the reduced density, `sqrt(2 pi T / Delta) exp(-Delta / T)`.
pub fn thermal_term(t_k: f64, delta_k: f64) -> Result<f64> {
    positive("temperature", t_k)?;
    positive("gap", delta_k)?;
    Ok((2.0 * core::f64::consts::PI * t_k / delta_k).sqrt() * (-delta_k / t_k).exp())
}

pub fn thermal_qp_fraction(t_k: f64, delta_k: f64, x_nqp: f64) -> Result<f64> {
    ensure!(x_nqp >= 0.0, Domain, "x_nqp must be non-negative");
    Ok(x_nqp + thermal_term(t_k, delta_k)?)
}

/// Temperature at which the thermal density equals `x_nqp`.
pub fn crossover_temperature(x_nqp: f64, delta_k: f64) -> Result<f64> {
    positive("x_nqp", x_nqp)?;
    positive("gap", delta_k)?;
    let target = x_nqp.ln();
    let g = |t: f64| 0.5 * (2.0 * core::f64::consts::PI * t / delta_k).ln() - delta_k / t - target;
    let (lo, hi) = (0.01, delta_k / 2.0);
    if lo >= hi || g(lo) * g(hi) > 0.0 {
        return Err(Error::Domain(alloc::format!(
            "no crossover for x_nqp = {x_nqp:e} in [{lo}, {hi}] K"
        )));
    }
    find_root(g, lo, hi)
}

/// `32 E_J sqrt(Delta / 2 f_ge) sqrt(E_C / 8 E_J)`: the decay rate per
/// unit reduced density, s^-1, for energies given in GHz.
fn nqp_rate_prefactor(ej_ghz: f64, ec_ghz: f64, f_ge_ghz: f64, delta_ghz: f64) -> Result<f64> {
    positive("E_J", ej_ghz)?;
    positive("E_C", ec_ghz)?;
    positive("f_ge", f_ge_ghz)?;
    positive("gap", delta_ghz)?;
    Ok(32.0
        * ej_ghz
        * 1e9
        * (delta_ghz / (2.0 * f_ge_ghz)).sqrt()
        * (ec_ghz / (8.0 * ej_ghz)).sqrt())
}

/// Decay rate (s^-1) from QP tunnelling at reduced density `x_qp`.
pub fn nqp_decay_rate(
    ej_ghz: f64,
    ec_ghz: f64,
    f_ge_ghz: f64,
    delta_ghz: f64,
    x_qp: f64,
) -> Result<f64> {
    ensure!(x_qp >= 0.0, Domain, "x_qp must be non-negative");
    Ok(nqp_rate_prefactor(ej_ghz, ec_ghz, f_ge_ghz, delta_ghz)? * x_qp)
}

/// Inverse of [`nqp_decay_rate`].
pub fn x_from_rate(
    ej_ghz: f64,
    ec_ghz: f64,
    f_ge_ghz: f64,
    delta_ghz: f64,
    rate_per_s: f64,
) -> Result<f64> {
    ensure!(rate_per_s >= 0.0, Domain, "rate must be non-negative");
    Ok(rate_per_s / nqp_rate_prefactor(ej_ghz, ec_ghz, f_ge_ghz, delta_ghz)?)
}

/// QPs per um^3: `n = 2 nu0 Delta x`.
pub fn volume_density(x_qp: f64, nu0_per_ev_um3: f64, delta_ev: f64) -> Result<f64> {
    ensure!(x_qp >= 0.0, Domain, "x_qp must be non-negative");
    positive("nu0", nu0_per_ev_um3)?;
    positive("gap", delta_ev)?;
    Ok(x_qp * 2.0 * nu0_per_ev_um3 * delta_ev)
}

pub fn x_from_volume_density(n_per_um3: f64, nu0_per_ev_um3: f64, delta_ev: f64) -> Result<f64> {
    ensure!(n_per_um3 >= 0.0, Domain, "density must be non-negative");
    positive("nu0", nu0_per_ev_um3)?;
    positive("gap", delta_ev)?;
    Ok(n_per_um3 / (2.0 * nu0_per_ev_um3 * delta_ev))
}

/// Energy relaxation time at `energy_k` above the gap: a power law in
/// log-log between neighbouring anchors, extended from the end pairs.
pub fn tau_eps(energy_k: f64, env: &QpEnvironment) -> Result<f64> {
    positive("energy above gap", energy_k)?;
    let a = &env.tau_anchors;
    ensure!(a.len() >= 2, Config, "need at least two tau_eps anchors");
    let i = a
        .partition_point(|&(e, _)| e <= energy_k)
        .clamp(1, a.len() - 1);
    let (e0, t0) = a[i - 1];
    let (e1, t1) = a[i];
    let p = (t0 / t1).ln() / (e1 / e0).ln();
    Ok(t0 * (energy_k / e0).powf(-p))
}

/// `sqrt(D tau_eps)` in um.
pub fn diffusion_length(energy_k: f64, env: &QpEnvironment) -> Result<f64> {
    Ok((env.diffusion_m2_s * tau_eps(energy_k, env)?).sqrt() * 1e6)
}

pub const DEFAULT_BARRIER_SAFETY: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideBarrier {
    pub protected: bool,
    pub height_k: f64,
    /// Contiguous junction-adjacent length at the top gap.
    pub width_um: f64,
    /// `width / (safety xi)`.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierVerdict {
    pub left: SideBarrier,
    pub right: SideBarrier,
}

impl BarrierVerdict {
    /// One protected side is enough.
    pub fn protected(&self) -> bool {
        self.left.protected || self.right.protected
    }

    pub fn side(&self, side: Side) -> &SideBarrier {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// Best margin over the protected sides, zero when unprotected.
    pub fn margin(&self) -> f64 {
        [self.left, self.right]
            .iter()
            .filter(|s| s.protected)
            .map(|s| s.margin)
            .fold(0.0, f64::max)
    }
}

/// A side is protected when the gap next to the junction is the highest
/// junction gap, stays there for at least `safety * xi`, and rises above
/// the side's minimum.
pub fn barrier_adequate(
    profile: &GapProfile,
    env: &QpEnvironment,
    safety: f64,
) -> Result<BarrierVerdict> {
    ensure!(
        (3.0..=5.0).contains(&safety),
        Domain,
        "barrier safety factor must lie in [3, 5], got {safety}"
    );
    positive("coherence length", env.xi_um)?;
    let top = profile.high_junction_delta();
    let judge = |side: Side| {
        let width_um: f64 = profile
            .side(side)
            .iter()
            .take_while(|s| s.delta_k >= top)
            .map(|s| s.length_um)
            .sum();
        let height_k = profile.barrier_height(side);
        let margin = width_um / (safety * env.xi_um);
        SideBarrier {
            protected: width_um > 0.0 && margin >= 1.0 && height_k > 0.0,
            height_k,
            width_um,
            margin,
        }
    };
    Ok(BarrierVerdict {
        left: judge(Side::Left),
        right: judge(Side::Right),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideTrap {
    /// Highest junction gap minus the deepest gap on this side.
    pub depth_k: f64,
    /// Total length at the deepest gap.
    pub length_um: f64,
    /// Diffusion length at the trap depth; infinite for a zero depth.
    pub required_um: f64,
}

impl SideTrap {
    pub fn adequate(&self) -> bool {
        self.depth_k > 0.0 && self.length_um >= self.required_um
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapVerdict {
    pub left: SideTrap,
    pub right: SideTrap,
}

impl TrapVerdict {
    /// Traps must work on both sides.
    pub fn adequate(&self) -> bool {
        self.left.adequate() && self.right.adequate()
    }
}

pub fn trap_adequate(profile: &GapProfile, env: &QpEnvironment) -> Result<TrapVerdict> {
    let top = profile.high_junction_delta();
    let judge = |side: Side| -> Result<SideTrap> {
        let floor = profile.side_min_delta(side);
        let depth_k = top - floor;
        let length_um = profile
            .side(side)
            .iter()
            .filter(|s| s.delta_k <= floor)
            .map(|s| s.length_um)
            .sum();
        let required_um = if depth_k > 0.0 {
            diffusion_length(depth_k, env)?
        } else {
            f64::INFINITY
        };
        Ok(SideTrap {
            depth_k,
            length_um,
            required_um,
        })
    };
    Ok(TrapVerdict {
        left: judge(Side::Left)?,
        right: judge(Side::Right)?,
    })
}

/// Fraction of a gap-edge Boltzmann QP population (temperature `t_qp_k`,
/// BCS density of states) lying more than `barrier_k` above the gap.
///
/// With `E = Delta cosh u` the weight `rho(E) dE` becomes
/// `Delta cosh u du`, which removes the edge singularity.
pub fn above_barrier_fraction(barrier_k: f64, t_qp_k: f64, delta_k: f64) -> Result<f64> {
    ensure!(
        barrier_k >= 0.0 && barrier_k.is_finite(),
        Domain,
        "barrier must be >= 0"
    );
    positive("T_qp", t_qp_k)?;
    positive("gap", delta_k)?;
    if barrier_k == 0.0 {
        return Ok(1.0);
    }
    // Boltzmann weights relative to the lower limit of each integral
    let tail = |u0: f64| -> Result<f64> {
        let e0 = delta_k * u0.cosh();
        // the integrand is below e^-60 of its start beyond u_max
        let u_max = ((e0 + 60.0 * t_qp_k) / delta_k).acosh();
        Quadrature::default().integrate(
            |u| {
                let excess = delta_k * u.cosh() - e0;
                if excess / t_qp_k > 700.0 {
                    0.0
                } else {
                    delta_k * u.cosh() * (-excess / t_qp_k).exp()
                }
            },
            u0,
            u_max,
        )
    };
    let u_b = (1.0 + barrier_k / delta_k).acosh();
    let ratio = tail(u_b)? / tail(0.0)? * (-barrier_k / t_qp_k).exp();
    ensure!(
        ratio.is_finite(),
        Numerical,
        "above-barrier fraction is not finite"
    );
    Ok(ratio.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests;
