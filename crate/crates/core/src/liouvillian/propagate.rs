//! Numerical propagation of `d rho/dt = Gamma rho`.
//!
//! Two independent routes:
//!
//! * [`Propagator`] exponentiates the superoperator, through its
//!   eigen-decomposition when that is well conditioned and through Padé
//!   scaling and squaring otherwise;
//! * [`evolve_rk4`] integrates the master equation in operator form with a
//!   fixed-step fourth-order Runge–Kutta scheme and never touches a
//!   superoperator.
//!
//! [`evolve_numeric`] runs both and refuses to return states on which they
//! disagree.

use super::{
    build_gamma_two_mode, cluster_eigenvalues, devectorize, vectorize, SuperOperator,
    CLUSTER_RADIUS,
};
use crate::error::{Error, Result};
use crate::fock::{annihilation, max_abs_diff, re, CMatrix, DensityMatrix, FockBasis, C64};

/// Largest RK4 step in units of `1/decay_rate`.
pub const RK4_MAX_STEP: f64 = 1e-3;

/// Element-wise agreement required between the exponential and RK4 routes.
pub const RK4_TOLERANCE: f64 = 1e-8;

/// Singular values of `Gamma - lambda I` below this (relative to `|Gamma|`)
/// count as null directions when building eigenvectors.
const EIGVEC_TOLERANCE: f64 = 1e-9;

/// Largest eigenvector condition number accepted before falling back to Padé.
const MAX_EIGVEC_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
enum Route {
    Spectral {
        vectors: CMatrix,
        inverse: CMatrix,
        values: Vec<C64>,
    },
    Pade {
        generator: CMatrix,
    },
}

/// `t -> exp(Gamma t)` for a fixed generator.
#[derive(Debug, Clone)]
pub struct Propagator {
    basis: FockBasis,
    route: Route,
}

impl Propagator {
    /// Uses the eigen-decomposition of `gamma` when it is diagonalizable at
    /// working precision, Padé scaling and squaring otherwise.
    pub fn new(gamma: &SuperOperator) -> Self {
        let route = spectral_route(gamma.matrix()).unwrap_or_else(|| Route::Pade {
            generator: gamma.matrix().clone(),
        });
        Self {
            basis: gamma.basis(),
            route,
        }
    }

    /// Always uses Padé scaling and squaring.
    pub fn pade(gamma: &SuperOperator) -> Self {
        Self {
            basis: gamma.basis(),
            route: Route::Pade {
                generator: gamma.matrix().clone(),
            },
        }
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.route, Route::Spectral { .. })
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    /// The superoperator matrix `exp(Gamma t)`.
    pub fn matrix_at(&self, t: f64) -> CMatrix {
        match &self.route {
            Route::Spectral {
                vectors,
                inverse,
                values,
            } => {
                let mut scaled = vectors.clone();
                for (j, lambda) in values.iter().enumerate() {
                    let f = (lambda * t).exp();
                    for z in scaled.column_mut(j).iter_mut() {
                        *z *= f;
                    }
                }
                scaled * inverse
            }
            Route::Pade { generator } => expm_pade(&(generator * re(t))),
        }
    }

    /// `exp(Gamma t) rho` for a raw matrix.
    pub fn apply(&self, rho: &CMatrix, t: f64) -> CMatrix {
        let d = self.basis.dim();
        let v = vectorize(rho);
        let out = match &self.route {
            Route::Spectral {
                vectors,
                inverse,
                values,
            } => {
                let mut coeffs = inverse * v;
                for (c, lambda) in coeffs.iter_mut().zip(values) {
                    *c *= (lambda * t).exp();
                }
                vectors * coeffs
            }
            Route::Pade { .. } => self.matrix_at(t) * v,
        };
        devectorize(&out, d)
    }
}

fn spectral_route(g: &CMatrix) -> Option<Route> {
    let n = g.nrows();
    let eigenvalues = super::spectral::eigenvalues(g).ok()?;
    let clusters = cluster_eigenvalues(&eigenvalues, CLUSTER_RADIUS);
    let scale = g.norm().max(1.0);

    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for cluster in &clusters {
        let mut shifted = g.clone();
        for i in 0..n {
            shifted[(i, i)] -= cluster.center;
        }
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        for &k in order.iter().take(cluster.multiplicity) {
            if svd.singular_values[k] > EIGVEC_TOLERANCE * scale {
                // geometric multiplicity below algebraic: not diagonalizable
                return None;
            }
            vectors
                .column_mut(values.len())
                .copy_from(&v_t.row(k).adjoint());
            values.push(cluster.center);
        }
    }
    if values.len() != n {
        return None;
    }
    let sv = vectors.singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if smin == 0.0 || smax / smin > MAX_EIGVEC_CONDITION {
        return None;
    }
    let inverse = vectors.clone().try_inverse()?;
    Some(Route::Spectral {
        vectors,
        inverse,
        values,
    })
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by degree-13 Padé approximation with scaling and
/// squaring.
pub fn expm_pade(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m * re(0.5f64.powi(squarings));
    let id = CMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| re(PADE13[k]);

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is nonsingular");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite time".into()));
    }
    if times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("time grid must start at t >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be ascending".into()));
    }
    Ok(())
}

/// `exp(Gamma t) rho0` at each grid time.
pub fn evolve_expm(rho0: &CMatrix, gamma: &SuperOperator, times: &[f64]) -> Result<Vec<CMatrix>> {
    check_times(times)?;
    let propagator = Propagator::new(gamma);
    Ok(times.iter().map(|&t| propagator.apply(rho0, t)).collect())
}

/// Right-hand side of the two-mode master equation in operator form.
struct OperatorForm {
    rate: f64,
    jump: CMatrix,
    jump_dag: CMatrix,
    hop: CMatrix,
}

impl OperatorForm {
    fn new(rate: f64, basis: FockBasis) -> Result<Self> {
        let a1 = annihilation(1, basis)?.into_matrix();
        let a2 = annihilation(2, basis)?.into_matrix();
        // sum over i, j of a_i rho a_j† = (a1 + a2) rho (a1 + a2)†
        let jump = &a1 + &a2;
        let jump_dag = jump.adjoint();
        // sum over i, j of a_j† a_i
        let hop = &jump_dag * &jump;
        Ok(Self {
            rate,
            jump,
            jump_dag,
            hop,
        })
    }

    fn eval(&self, rho: &CMatrix) -> CMatrix {
        // pair weight rate/4, see build_gamma_two_mode
        let gain = &self.jump * rho * &self.jump_dag;
        let loss = &self.hop * rho + rho * &self.hop;
        gain * re(self.rate / 2.0) - loss * re(self.rate / 4.0)
    }

    fn step(&self, rho: &CMatrix, h: f64) -> CMatrix {
        let half = re(h / 2.0);
        let k1 = self.eval(rho);
        let k2 = self.eval(&(rho + &k1 * half));
        let k3 = self.eval(&(rho + &k2 * half));
        let k4 = self.eval(&(rho + &k3 * re(h)));
        rho + (k1 + (k2 + k3) * re(2.0) + k4) * re(h / 6.0)
    }
}

/// Fixed-step RK4 integration from `t = 0`, sampled at each grid time.
/// Steps satisfy `decay_rate * h <= RK4_MAX_STEP`.
pub fn evolve_rk4(
    rho0: &CMatrix,
    basis: FockBasis,
    decay_rate: f64,
    times: &[f64],
) -> Result<Vec<CMatrix>> {
    check_times(times)?;
    let d = basis.dim();
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho0.nrows(),
        });
    }
    let rhs = OperatorForm::new(decay_rate, basis)?;
    let mut rho = rho0.clone();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span * decay_rate / RK4_MAX_STEP).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                rho = rhs.step(&rho, h);
            }
            now = t;
        }
        out.push(rho.clone());
    }
    Ok(out)
}

/// Propagates `rho0` with the matrix exponential of the two-mode generator,
/// cross-checked against RK4. Every returned state is validated.
pub fn evolve_numeric(
    rho0: &DensityMatrix,
    decay_rate: f64,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let basis = rho0.basis();
    let gamma = build_gamma_two_mode(decay_rate, basis)?;
    let by_expm = evolve_expm(rho0.matrix(), &gamma, times)?;
    let by_rk4 = evolve_rk4(rho0.matrix(), basis, decay_rate, times)?;
    let gap = by_expm
        .iter()
        .zip(&by_rk4)
        .map(|(a, b)| max_abs_diff(a, b))
        .fold(0.0, f64::max);
    if gap > RK4_TOLERANCE {
        return Err(Error::PropagatorMismatch {
            gap,
            tolerance: RK4_TOLERANCE,
        });
    }
    by_expm
        .into_iter()
        .map(|m| DensityMatrix::new(basis, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, number_state, pure_density, total_number, Ket};
    use crate::liouvillian::build_gamma_collective;
    use std::f64::consts::FRAC_1_SQRT_2;

    /// Plain Taylor series, summed until the terms are negligible.
    fn expm_taylor(m: &CMatrix) -> CMatrix {
        let n = m.nrows();
        let mut sum = CMatrix::identity(n, n);
        let mut term = CMatrix::identity(n, n);
        for k in 1..200 {
            term = &term * m * re(1.0 / k as f64);
            sum += &term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    }

    #[test]
    fn pade_matches_taylor() {
        let m = CMatrix::from_fn(6, 6, |i, j| C64::new(((i * 7 + j * 3) % 5) as f64 * 0.3 - 0.6, (i as f64 - j as f64) * 0.1));
        assert!(max_abs_diff(&expm_pade(&m), &expm_taylor(&m)) < 1e-12);
        // large norm triggers squaring
        let big = &m * re(4.0);
        let reference = {
            let e = expm_taylor(&(&big * re(1.0 / 16.0)));
            let mut r = e;
            for _ in 0..4 {
                r = &r * &r;
            }
            r
        };
        let got = expm_pade(&big);
        assert!(max_abs_diff(&got, &reference) / reference.norm() < 1e-12);
    }

    #[test]
    fn spectral_and_pade_routes_agree() {
        let b = build_basis(3);
        let g = build_gamma_collective(1.0, b).unwrap();
        let spectral = Propagator::new(&g);
        assert!(spectral.is_spectral());
        let pade = Propagator::pade(&g);
        for t in [0.0, 0.3, 1.0, 5.0, 12.0] {
            assert!(max_abs_diff(&spectral.matrix_at(t), &pade.matrix_at(t)) < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn vacuum_is_stationary() {
        let b = build_basis(2);
        let rho = pure_density(&number_state(0, 0, b).unwrap()).unwrap();
        let out = evolve_numeric(&rho, 1.0, &[0.0, 0.5, 3.0]).unwrap();
        for s in out {
            assert!(s.max_abs_diff(&rho) < 1e-12);
        }
    }

    #[test]
    fn dark_state_is_stationary() {
        let b = build_basis(1);
        let phi = Ket::from_terms(b, &[(1, 0, re(FRAC_1_SQRT_2)), (0, 1, re(-FRAC_1_SQRT_2))]).unwrap();
        let rho = pure_density(&phi).unwrap();
        let out = evolve_numeric(&rho, 2.0, &[0.0, 1.0, 4.0]).unwrap();
        for s in out {
            assert!(s.max_abs_diff(&rho) < 1e-12);
        }
    }

    #[test]
    fn bright_single_photon_offdiagonal() {
        // a = 1/sqrt2: |chi> = (|01> + |10>)/sqrt2, off-diagonal e^{-t}/2 at rate*t = 1
        let b = build_basis(1);
        let chi = Ket::from_terms(b, &[(0, 1, re(FRAC_1_SQRT_2)), (1, 0, re(FRAC_1_SQRT_2))]).unwrap();
        let rho = pure_density(&chi).unwrap();
        let out = evolve_numeric(&rho, 1.0, &[1.0]).unwrap();
        let off = out[0].element((1, 0), (0, 1));
        assert!((off.re - (-1.0f64).exp() / 2.0).abs() < 1e-12);
        assert!((off.re - 0.18394).abs() < 1e-5);
    }

    #[test]
    fn photon_number_is_non_increasing() {
        let b = build_basis(3);
        let psi = Ket::from_terms(
            b,
            &[(0, 2, re(0.6)), (1, 1, C64::new(0.0, 0.48)), (3, 0, re(0.64))],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let rho = pure_density(&psi).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let out = evolve_numeric(&rho, 1.0, &times).unwrap();
        let n = total_number(b);
        let counts: Vec<f64> = out.iter().map(|s| s.expectation(&n).unwrap().re).collect();
        for w in counts.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        for s in &out {
            assert!((s.trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let b = build_basis(1);
        let rho = pure_density(&number_state(0, 1, b).unwrap()).unwrap();
        assert!(evolve_numeric(&rho, 1.0, &[-1.0, 0.0]).is_err());
        assert!(evolve_numeric(&rho, 1.0, &[1.0, 0.5]).is_err());
    }
}
