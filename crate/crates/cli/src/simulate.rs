//! Analytic and numerical trajectories for every sweep member.

use rayon::prelude::*;

use twocav::algebra::{
    build_generators, evolve_analytic_with, pure_state_decomposition, single_photon_ket, single_photon_solution,
    two_photon_ket, two_photon_solution, AlgebraGenerators,
};
use twocav::entanglement::{concurrence_2qubit, upper_bound_estar, QubitDensity};
use twocav::fock::{
    build_basis, check_density, number_state, pure_density, total_number, DensityMatrix, FockBasis, Ket, Operator,
};
use twocav::liouvillian::{build_gamma_two_mode, evolve_rk4, Propagator};

use crate::config::{custom_density, InitialState, Member, Quantity, ScenarioConfig};
use crate::error::CliError;

/// Slack allowed on `⟨n₁+n₂⟩` growing between grid points.
pub const PHOTON_NUMBER_SLACK: f64 = 1e-12;

/// One member's time series on the `ςt` grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub member: Member,
    pub sigma_t: Vec<f64>,
    /// Analytic states.
    pub states: Vec<DensityMatrix>,
    /// Largest element gap between analytic and matrix-exponential states.
    pub expm_gap: Vec<f64>,
    /// Largest element gap between matrix-exponential and RK4 states.
    pub rk4_gap: Vec<f64>,
    pub photon_number: Vec<f64>,
    pub concurrence: Option<Vec<f64>>,
    pub estar: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn max_expm_gap(&self) -> f64 {
        self.expm_gap.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_rk4_gap(&self) -> f64 {
        self.rk4_gap.iter().copied().fold(0.0, f64::max)
    }
}

struct Shared {
    basis: FockBasis,
    gens: AlgebraGenerators,
    propagator: Propagator,
    number: Operator,
}

/// Runs every member; members are independent and run concurrently, the
/// result keeps config order.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Vec<Trajectory>, CliError> {
    let basis = build_basis(cfg.truncation);
    let shared = Shared {
        basis,
        gens: build_generators(basis)?,
        propagator: Propagator::new(&build_gamma_two_mode(cfg.numeric_decay_rate, basis)?),
        number: total_number(basis),
    };
    cfg.members.par_iter().map(|m| simulate_member(cfg, m, &shared)).collect()
}

pub fn initial_density(initial: &InitialState, basis: FockBasis) -> Result<DensityMatrix, CliError> {
    match initial {
        InitialState::Custom(terms) => {
            let m = custom_density(terms, basis.max_total_photons()).map_err(CliError::Invariant)?;
            Ok(DensityMatrix::new(basis, m)?)
        }
        _ => Ok(pure_density(&initial_ket(initial, basis)?.expect("pure kinds have a ket"))?),
    }
}

fn initial_ket(initial: &InitialState, basis: FockBasis) -> Result<Option<Ket>, CliError> {
    Ok(match *initial {
        InitialState::SinglePhoton { a } => Some(single_photon_ket(a, basis)?),
        InitialState::TwoPhoton { a, b, c } => Some(two_photon_ket((a, b, c), basis)?.normalized()?),
        InitialState::Fock { n1, n2 } => Some(number_state(n1, n2, basis)?),
        InitialState::Custom(_) => None,
    })
}

fn simulate_member(cfg: &ScenarioConfig, member: &Member, shared: &Shared) -> Result<Trajectory, CliError> {
    let basis = shared.basis;
    let rate = cfg.decay_rate;
    let rho0 = initial_density(&member.initial, basis)?;
    let ket = initial_ket(&member.initial, basis)?;
    let case = member.initial.two_photon_case();
    let sigma_t = cfg.time_grid.points();
    let times: Vec<f64> = sigma_t.iter().map(|s| s / rate).collect();
    let rk4 = evolve_rk4(rho0.matrix(), basis, cfg.numeric_decay_rate, &times)?;

    let want_c = cfg.outputs.contains(&Quantity::Concurrence);
    let want_e = cfg.outputs.contains(&Quantity::Estar);
    let mut out = Trajectory {
        member: member.clone(),
        sigma_t: sigma_t.clone(),
        states: Vec::with_capacity(times.len()),
        expm_gap: Vec::with_capacity(times.len()),
        rk4_gap: Vec::with_capacity(times.len()),
        photon_number: Vec::with_capacity(times.len()),
        concurrence: want_c.then(Vec::new),
        estar: want_e.then(Vec::new),
    };

    for (k, &t) in times.iter().enumerate() {
        let analytic = match (&member.initial, case) {
            (InitialState::SinglePhoton { a }, _) => single_photon_solution(*a, rate, t)?.density(basis)?,
            (_, Some(case)) => two_photon_solution(case, rate, t, basis)?.density()?,
            _ => evolve_analytic_with(&rho0, rate, t, &shared.gens)?,
        };
        let numeric = shared.propagator.apply(rho0.matrix(), t);
        check_density(&numeric).map_err(|e| {
            CliError::Invariant(format!("numerical state at ςt = {} is unphysical: {e}", sigma_t[k]))
        })?;
        out.expm_gap.push(max_abs_diff(analytic.matrix(), &numeric));
        out.rk4_gap.push(max_abs_diff(&numeric, &rk4[k]));
        out.photon_number.push(analytic.expectation(&shared.number)?.re);

        if let Some(c) = out.concurrence.as_mut() {
            c.push(concurrence_2qubit(&QubitDensity::from_density(&analytic)?)?);
        }
        if let Some(e) = out.estar.as_mut() {
            let components = match case {
                Some(case) => two_photon_solution(case, rate, t, basis)?.components,
                None => {
                    let ket = ket.as_ref().expect("estar is rejected for mixed initial states");
                    pure_state_decomposition(ket, rate, t)?
                }
            };
            e.push(upper_bound_estar(&components)?);
        }
        out.states.push(analytic);
    }
    Ok(out)
}

fn max_abs_diff(a: &twocav::fock::CMatrix, b: &twocav::fock::CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn describe(t: &Trajectory) -> String {
    match &t.member.label {
        Some(l) => format!("{} [{l}]", t.member.initial.kind()),
        None => t.member.initial.kind().to_string(),
    }
}

/// Route agreement within `tolerance` and non-increasing photon number.
pub fn check_invariants(trajectories: &[Trajectory], tolerance: f64) -> Result<(), CliError> {
    for t in trajectories {
        for (k, (&g, &r)) in t.expm_gap.iter().zip(&t.rk4_gap).enumerate() {
            if !(g <= tolerance) {
                return Err(CliError::Invariant(format!(
                    "{}: analytic and numerical states differ by {g:.3e} at ςt = {} (tolerance {tolerance:e})",
                    describe(t),
                    t.sigma_t[k]
                )));
            }
            if !(r <= tolerance) {
                return Err(CliError::Invariant(format!(
                    "{}: matrix exponential and RK4 differ by {r:.3e} at ςt = {} (tolerance {tolerance:e})",
                    describe(t),
                    t.sigma_t[k]
                )));
            }
        }
        for (k, w) in t.photon_number.windows(2).enumerate() {
            if w[1] > w[0] + PHOTON_NUMBER_SLACK {
                return Err(CliError::Invariant(format!(
                    "{}: photon number grows from {} to {} at ςt = {}",
                    describe(t),
                    w[0],
                    w[1],
                    t.sigma_t[k + 1]
                )));
            }
        }
    }
    Ok(())
}
