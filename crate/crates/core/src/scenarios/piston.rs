use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clock::{make_clock, ClockModel};
use crate::config::hbar;
use crate::grid::GridSystem;
use crate::opalg::{hermitian_eig, Operator, StateVector};
use crate::pwframe::{
    build_history, constraint_residual, HamiltonianSpec, HistoryState, Interaction,
};
use crate::{Error, Result, C64};

/// Largest tolerated probability near the moving wall while it moves.
const WALL_MASS_TOL: f64 = 1e-6;
/// The near-wall zone extends this many wall widths inside the wall.
const WALL_ZONE_WIDTHS: f64 = 6.0;
/// Largest `(τ₂ − τ₁)/τ`.
const MAX_RAMP_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    Linear,
    /// Quintic smoothstep, `C²` at both ends.
    #[default]
    Smooth,
}

impl RampShape {
    fn eval(self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            RampShape::Linear => u,
            RampShape::Smooth => u * u * u * (10.0 + u * (6.0 * u - 15.0)),
        }
    }
}

/// Particle in a box with smooth walls; the right wall moves left by
/// `displacement` during `[ramp_start·τ, ramp_end·τ]`, `τ` being the
/// particle's revival period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PistonConfig {
    pub n: usize,
    pub dx: f64,
    pub mass: f64,
    pub wall_left: f64,
    pub wall_right: f64,
    pub wall_width: f64,
    pub wall_height: f64,
    pub packet_center: f64,
    pub packet_sigma: f64,
    pub p_mean: f64,
    pub displacement: f64,
    pub ramp_start: f64,
    pub ramp_end: f64,
    pub ramp_shape: RampShape,
    /// Clock ticks per particle period.
    pub ticks_per_period: usize,
    /// Extra clock ticks beyond one particle period.
    pub margin_ticks: usize,
}

impl Default for PistonConfig {
    fn default() -> Self {
        Self {
            n: 128,
            dx: 1.0,
            mass: 1.0,
            wall_left: 12.0,
            wall_right: 116.0,
            wall_width: 2.0,
            wall_height: 1.0,
            packet_center: 62.0,
            packet_sigma: 8.0,
            p_mean: -PI / 16.0,
            displacement: 2.0,
            ramp_start: 0.01,
            ramp_end: 0.05,
            ramp_shape: RampShape::Smooth,
            ticks_per_period: 160,
            margin_ticks: 20,
        }
    }
}

impl PistonConfig {
    /// Small box for checks that need dense `A ⊗ S` operators.
    pub fn compact() -> Self {
        Self {
            n: 12,
            wall_left: 2.0,
            wall_right: 10.0,
            wall_width: 1.0,
            packet_center: 5.0,
            packet_sigma: 1.0,
            p_mean: -PI / 4.0,
            displacement: 1.0,
            ramp_start: 0.1,
            ramp_end: 0.15,
            ticks_per_period: 64,
            margin_ticks: 8,
            ..Self::default()
        }
    }

    pub fn with_displacement(&self, displacement: f64) -> Self {
        Self {
            displacement,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("dx", self.dx),
            ("mass", self.mass),
            ("wall_width", self.wall_width),
            ("wall_height", self.wall_height),
            ("packet_sigma", self.packet_sigma),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        let length = self.n as f64 * self.dx;
        if !(0.0 < self.wall_left && self.wall_left < self.wall_right && self.wall_right < length) {
            return Err(Error::param(
                "wall_right",
                format!("walls must satisfy 0 < left < right < {length}"),
            ));
        }
        if !(self.wall_left < self.packet_center && self.packet_center < self.wall_right) {
            return Err(Error::param(
                "packet_center",
                "packet must start between the walls",
            ));
        }
        if !(self.p_mean != 0.0 && self.p_mean.is_finite()) {
            return Err(Error::param(
                "p_mean",
                "packet needs a nonzero finite momentum",
            ));
        }
        if !self.displacement.is_finite() || self.displacement < 0.0 {
            return Err(Error::param(
                "displacement",
                "must be finite and non-negative",
            ));
        }
        if !(0.0 <= self.ramp_start && self.ramp_start < self.ramp_end && self.ramp_end < 1.0) {
            return Err(Error::param(
                "ramp_end",
                "need 0 ≤ ramp_start < ramp_end < 1",
            ));
        }
        if self.ramp_end - self.ramp_start > MAX_RAMP_FRACTION + 1e-12 {
            return Err(Error::param(
                "ramp_end",
                format!("ramp must last at most {MAX_RAMP_FRACTION} of the particle period"),
            ));
        }
        if self.ticks_per_period < 2 {
            return Err(Error::param("ticks_per_period", "need at least 2"));
        }
        Ok(())
    }

    fn left_wall(&self, x: f64) -> f64 {
        self.wall_height / (1.0 + ((x - self.wall_left) / self.wall_width).exp())
    }

    fn right_wall(&self, x: f64) -> f64 {
        self.wall_height / (1.0 + (-(x - self.wall_right) / self.wall_width).exp())
    }
}

/// Box, static Hamiltonian, revival period and clock of a piston run.
#[derive(Clone, Debug)]
pub struct PistonSetup {
    pub cfg: PistonConfig,
    pub grid: GridSystem,
    pub h_s: Operator,
    pub psi0: StateVector,
    /// Particle period `τ`, on the clock lattice.
    pub period: f64,
    /// `|⟨ψ0|e^{−iH_Sτ/ħ}|ψ0⟩|` at the chosen period.
    pub revival: f64,
    pub clock: ClockModel,
}

impl PistonSetup {
    pub fn ticks_per_period(&self) -> usize {
        self.cfg.ticks_per_period
    }

    /// Wall displacement `f(t)`.
    pub fn displacement_at(&self, t: f64, displacement: f64) -> f64 {
        let t1 = self.cfg.ramp_start * self.period;
        let t2 = self.cfg.ramp_end * self.period;
        displacement * self.cfg.ramp_shape.eval((t - t1) / (t2 - t1))
    }

    /// Ticks `k` with `f(t_k) = 0` and `f(t_k + τ) = δℓ`, `k + q < d`.
    pub fn displacement_window(&self) -> Vec<usize> {
        let q = self.cfg.ticks_per_period;
        let t1 = self.cfg.ramp_start * self.period;
        let t2 = self.cfg.ramp_end * self.period;
        (0..self.clock.d().saturating_sub(q))
            .filter(|&k| self.clock.time(k) <= t1 && self.clock.time(k + q) >= t2)
            .collect()
    }

    /// `V_r(X + δℓ) − V_r(X)`.
    pub fn wall_step(&self, displacement: f64) -> Result<Operator> {
        let cfg = self.cfg.clone();
        let moved = self.grid.potential(|x| cfg.right_wall(x + displacement))?;
        moved
            .try_sub(&self.grid.potential(|x| cfg.right_wall(x))?)?
            .mark_hermitian()
    }
}

/// Builds the box and finds the revival period `τ` of the initial packet by
/// scanning `|Σ|c_n|²e^{−iE_nt/ħ}|` around the classical round-trip time.
pub fn piston_setup(cfg: &PistonConfig) -> Result<PistonSetup> {
    cfg.validate()?;
    let grid = GridSystem::new(cfg.n, cfg.n as f64 * cfg.dx, cfg.mass)?;
    let walls = cfg.clone();
    let h_s = grid.hamiltonian(|x| walls.left_wall(x) + walls.right_wall(x))?;
    let psi0 = grid.gaussian_packet(cfg.packet_center, cfg.packet_sigma, cfg.p_mean)?;
    let eig = hermitian_eig(&h_s)?;
    let weights: Vec<f64> = eig
        .coefficients(psi0.amplitudes())?
        .iter()
        .map(|c| c.norm_sqr())
        .collect();
    let h = hbar();
    let revival = |t: f64| -> f64 {
        weights
            .iter()
            .zip(eig.values())
            .map(|(&w, &e)| C64::from_polar(w, -e * t / h))
            .sum::<C64>()
            .norm()
    };
    let speed = cfg.p_mean.abs() / cfg.mass;
    let guess = 2.0 * (cfg.wall_right - cfg.wall_left) / speed;
    let samples = 4000;
    let (lo, hi) = (0.7 * guess, 1.3 * guess);
    let step = (hi - lo) / samples as f64;
    let mut best = (lo, revival(lo));
    for j in 1..=samples {
        let t = lo + j as f64 * step;
        let r = revival(t);
        if r > best.1 {
            best = (t, r);
        }
    }
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if revival(c) > revival(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let period = 0.5 * (a + b);
    let q = cfg.ticks_per_period;
    let clock = make_clock(q + cfg.margin_ticks, period / q as f64, 0.0)?;
    Ok(PistonSetup {
        cfg: cfg.clone(),
        grid,
        h_s,
        psi0,
        period,
        revival: revival(period),
        clock,
    })
}

/// Hamiltonian spec with `H_int(t) = V_r(X + f(t)) − V_r(X)` for the given displacement.
pub fn piston_spec(setup: &PistonSetup, displacement: f64) -> Result<HamiltonianSpec> {
    if !displacement.is_finite() {
        return Err(Error::param("displacement", "must be finite"));
    }
    let h_int = if displacement == 0.0 {
        None
    } else {
        let setup = setup.clone();
        let f: Interaction = Arc::new(move |t| {
            let shift = setup.displacement_at(t, displacement);
            let cfg = &setup.cfg;
            let diag: Vec<f64> = setup
                .grid
                .positions()
                .into_iter()
                .map(|x| cfg.right_wall(x + shift) - cfg.right_wall(x))
                .collect();
            Operator::real_diagonal(setup.grid.layout().clone(), &diag)
                .expect("diagonal matches the grid")
        });
        Some(f)
    };
    HamiltonianSpec::with_mirrored_clock(setup.clock.clone(), &setup.h_s, h_int)
}

#[derive(Clone, Debug, Serialize)]
pub struct PistonSample {
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PistonRun {
    pub period: f64,
    pub revival: f64,
    pub delta_t: f64,
    pub d: usize,
    pub displacement: f64,
    /// `⟨ψ(0)|ψ(τ)⟩` without and with piston motion.
    pub static_overlap: (f64, f64),
    pub moved_overlap: (f64, f64),
    /// `arg` of the moved overlap minus `arg` of the static one, in `(−π, π]`.
    pub delta_arg: f64,
    /// `−2|p̄|δℓ/ħ`.
    pub predicted: f64,
    /// Largest near-wall probability while the wall moves.
    pub wall_mass: f64,
    /// Largest interior constraint residual of the moved history.
    pub constraint: f64,
    /// `⟨ψ(t_k)|ψ(t_k + τ)⟩` along the moved history.
    pub series: Vec<PistonSample>,
    #[serde(skip)]
    pub history: HistoryState,
}

/// Propagates the packet for one particle period with and without the
/// piston stroke and extracts the phase shift of the revival overlap.
pub fn run_piston(cfg: &PistonConfig) -> Result<PistonRun> {
    let setup = piston_setup(cfg)?;
    let one = C64::new(1.0, 0.0);
    let q = cfg.ticks_per_period;
    let static_history = build_history(&piston_spec(&setup, 0.0)?, &setup.psi0, one)?;
    let spec = piston_spec(&setup, cfg.displacement)?;
    let history = build_history(&spec, &setup.psi0, one)?;
    let constraint = constraint_residual(&history, &spec)?.max_interior;

    let wall_mass = wall_mass(&setup, &history);
    if wall_mass > WALL_MASS_TOL {
        return Err(Error::Scenario(format!(
            "packet mass {wall_mass:.2e} near the moving wall exceeds {WALL_MASS_TOL:e}"
        )));
    }

    let s0 = &setup.psi0;
    let z_static = s0.inner(&static_history.states()[q])?;
    let z_moved = s0.inner(&history.states()[q])?;
    let delta_arg = wrap_angle(z_moved.arg() - z_static.arg());
    let predicted = -2.0 * cfg.p_mean.abs() * cfg.displacement / hbar();

    let clock = history.clock();
    let series = (0..clock.d() - q)
        .map(|k| {
            let z = history.states()[k].inner(&history.states()[k + q])?;
            Ok(PistonSample {
                t: clock.time(k),
                re: z.re,
                im: z.im,
            })
        })
        .collect::<Result<_>>()?;

    Ok(PistonRun {
        period: setup.period,
        revival: setup.revival,
        delta_t: clock.delta_t(),
        d: clock.d(),
        displacement: cfg.displacement,
        static_overlap: (z_static.re, z_static.im),
        moved_overlap: (z_moved.re, z_moved.im),
        delta_arg,
        predicted,
        wall_mass,
        constraint,
        series,
        history,
    })
}

fn wall_mass(setup: &PistonSetup, history: &HistoryState) -> f64 {
    let cfg = &setup.cfg;
    let edge = cfg.wall_right - cfg.displacement - WALL_ZONE_WIDTHS * cfg.wall_width;
    let t1 = cfg.ramp_start * setup.period;
    let t2 = cfg.ramp_end * setup.period;
    let dt = history.delta_t();
    let positions = setup.grid.positions();
    let clock = history.clock();
    (0..history.len())
        .filter(|&k| clock.time(k) >= t1 - dt && clock.time(k) <= t2 + dt)
        .map(|k| {
            positions
                .iter()
                .zip(history.states()[k].amplitudes())
                .filter(|(&x, _)| x >= edge && x <= cfg.wall_right)
                .map(|(_, z)| z.norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_shapes_hit_endpoints() {
        for shape in [RampShape::Linear, RampShape::Smooth] {
            assert_eq!(shape.eval(-1.0), 0.0);
            assert_eq!(shape.eval(0.0), 0.0);
            assert_eq!(shape.eval(1.0), 1.0);
            assert_eq!(shape.eval(3.0), 1.0);
            assert!((shape.eval(0.5) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        let good = PistonConfig::compact();
        assert!(good.validate().is_ok());
        let mut bad = good.clone();
        bad.ramp_end = bad.ramp_start + 0.2;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.packet_center = 11.5;
        assert!(bad.validate().is_err());
        let mut bad = good;
        bad.p_mean = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn compact_setup_period_lies_on_lattice() {
        let s = piston_setup(&PistonConfig::compact()).unwrap();
        assert_eq!(s.clock.ticks_in(s.period), Some(64));
        assert!(s.clock.period() >= s.period);
        assert!(!s.displacement_window().is_empty());
    }

    #[test]
    fn zero_displacement_has_no_interaction() {
        let s = piston_setup(&PistonConfig::compact()).unwrap();
        assert!(!piston_spec(&s, 0.0).unwrap().has_interaction());
        let spec = piston_spec(&s, 1.0).unwrap();
        let after = spec.interaction_at(s.period * 0.5).unwrap();
        assert_eq!(after.max_abs_diff(&s.wall_step(1.0).unwrap()).unwrap(), 0.0);
        assert_eq!(spec.interaction_at(0.0).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
