//! Algebraic solution of the collective damping problem.
//!
//! On column-stacked density matrices the generator is a linear
//! combination of su(1,1) superoperators acting on the collective mode,
//!
//! ```text
//! K₋ ρ = A ρ A†      K₊ ρ = A† ρ A      K₀ ρ = (A†A ρ + ρ A†A + ρ)/2
//! Γ = ς K₋ − ς K₀ + ς/2
//! ```
//!
//! and, in the real-photon picture, of the u(2) set
//!
//! ```text
//! S₊ ρ = J₊ ρ + ρ J₊†      J₊ = a1† a2
//! S₋ ρ = J₋ ρ + ρ J₋†      J₋ = a2† a1
//! N_i ρ = n_i ρ + ρ n_i + ρ
//! S₀ = (N₁ − N₂)/2         N = (N₁ + N₂)/2
//! ```
//!
//! K₀ carries the `+1/2` shift so that `K₀ |n⟩⟨m| = (n+m+1)/2 |n⟩⟨m|` on
//! collective-mode dyads; with it `K₀ = (N₁ + N₂ + S₊ + S₋)/4` and
//! `Γ |0⟩⟨0| = 0`. A bare `(A†A ρ + ρ A†A)/2` would break both.
//!
//! Two gauge transformations diagonalize Γ:
//!
//! ```text
//! U₁ = exp(α₋ K₋)        U₂ = exp(β₊ S₊) exp(β₋ S₋)
//! ```
//!
//! For real β the second one factorizes into a conjugation,
//! `U₂ ρ = X ρ X†` with `X = exp(β₊ J₊) exp(β₋ J₋)`, whose operator series
//! terminate after at most `N + 1` terms on a truncation of `N` photons.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, SQRT_2};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, collective_mode, max_abs_diff, number_operator, number_state, pure_density, re,
    CMatrix, DensityMatrix, FockBasis, Ket, Operator, ZERO,
};
use crate::liouvillian::{dyad, dyad_index, lmul, rmul, sandwich, SuperOperator};

/// The su(1,1) and u(2) generators on one truncated basis, plus the
/// operator-level hopping terms `J₊ = a1† a2` and `J₋ = a2† a1`.
#[derive(Debug, Clone)]
pub struct AlgebraGenerators {
    pub k_minus: SuperOperator,
    pub k_plus: SuperOperator,
    pub k_zero: SuperOperator,
    pub s_plus: SuperOperator,
    pub s_minus: SuperOperator,
    pub s_zero: SuperOperator,
    pub n_total: SuperOperator,
    pub n1: SuperOperator,
    pub n2: SuperOperator,
    pub j_plus: Operator,
    pub j_minus: Operator,
}

impl AlgebraGenerators {
    pub fn basis(&self) -> FockBasis {
        self.k_minus.basis()
    }
}

pub fn build_generators(basis: FockBasis) -> Result<AlgebraGenerators> {
    let a = collective_mode(basis);
    let a_dag = a.dagger();
    let occ = &a_dag * &a;
    let half = re(0.5);

    let k_minus = sandwich(&a, &a_dag);
    let k_plus = sandwich(&a_dag, &a);
    let k_zero = (&lmul(&occ) + &rmul(&occ)).shifted(re(1.0)).scaled(half);

    let a1 = annihilation(1, basis)?;
    let a2 = annihilation(2, basis)?;
    let j_plus = &a1.dagger() * &a2;
    let j_minus = &a2.dagger() * &a1;
    let s_plus = &lmul(&j_plus) + &rmul(&j_plus.dagger());
    let s_minus = &lmul(&j_minus) + &rmul(&j_minus.dagger());

    let cartan = |op: &Operator| (&lmul(op) + &rmul(op)).shifted(re(1.0));
    let n1 = cartan(&number_operator(1, basis)?);
    let n2 = cartan(&number_operator(2, basis)?);
    let s_zero = (&n1 - &n2).scaled(half);
    let n_total = (&n1 + &n2).scaled(half);

    Ok(AlgebraGenerators {
        k_minus,
        k_plus,
        k_zero,
        s_plus,
        s_minus,
        s_zero,
        n_total,
        n1,
        n2,
        j_plus,
        j_minus,
    })
}

/// Largest element-wise gap between two superoperators, restricted to
/// their action on interior dyads (both sides below the truncation).
/// Raising terms are exact only there.
pub fn interior_gap(lhs: &SuperOperator, rhs: &SuperOperator) -> f64 {
    let basis = lhs.basis();
    let top = basis.max_total_photons();
    let interior: Vec<usize> = (0..basis.dim())
        .filter(|&i| basis.total_photons(i) < top)
        .collect();
    let mut gap = 0.0_f64;
    for &ket in &interior {
        for &bra in &interior {
            let col = dyad_index(basis, ket, bra);
            let a = lhs.matrix().column(col);
            let b = rhs.matrix().column(col);
            for (x, y) in a.iter().zip(b.iter()) {
                gap = gap.max((x - y).norm());
            }
        }
    }
    gap
}

/// `Γ = ς K₋ − ς K₀ + ς/2`.
pub fn gamma_from_generators(decay_rate: f64, gens: &AlgebraGenerators) -> Result<SuperOperator> {
    check_rate(decay_rate)?;
    let s = re(decay_rate);
    Ok((&gens.k_minus.scaled(s) - &gens.k_zero.scaled(s)).shifted(re(decay_rate / 2.0)))
}

fn check_rate(decay_rate: f64) -> Result<()> {
    if decay_rate > 0.0 && decay_rate.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "decay rate must be positive and finite, got {decay_rate}"
        )))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be finite and non-negative, got {t}")))
    }
}

/// Time-dependent gauge parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeParams {
    pub t: f64,
    pub alpha_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
}

impl GaugeParams {
    /// `1 + β₊ = 2/(1 + e^{ςt/2})`, free of the cancellation in
    /// `1 − tanh(ςt/4)` at late times.
    pub fn one_plus_beta_plus(&self, decay_rate: f64) -> f64 {
        2.0 / (1.0 + (decay_rate * self.t / 2.0).exp())
    }
}

/// `α₋ = e^{ςt} − 1`, `β₊ = −tanh(ςt/4)`, `β₋ = −sinh(ςt/2)/2`.
pub fn gauge_params(t: f64, decay_rate: f64) -> Result<GaugeParams> {
    check_rate(decay_rate)?;
    check_time(t)?;
    let x = decay_rate * t;
    Ok(GaugeParams {
        t,
        alpha_minus: x.exp_m1(),
        beta_plus: -(x / 4.0).tanh(),
        beta_minus: -(x / 2.0).sinh() / 2.0,
    })
}

/// Right-hand sides of the gauge conditions at the given parameters:
///
/// ```text
/// dα₋/dt = ς (1 + α₋)
/// dβ₊/dt = −(ς/4)(1 − β₊²)
/// dβ₋/dt = −(ς/4)(1 + 2 β₊ β₋)
/// ```
pub fn gauge_rhs(p: &GaugeParams, decay_rate: f64) -> [f64; 3] {
    let s = decay_rate;
    [
        s * (1.0 + p.alpha_minus),
        -s / 4.0 * (1.0 - p.beta_plus * p.beta_plus),
        -s / 4.0 * (1.0 + 2.0 * p.beta_plus * p.beta_minus),
    ]
}

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - LN_2
}

/// `∫₀ᵗ β₊(τ) dτ = −(4/ς) ln cosh(ςt/4)`.
pub fn integral_beta_plus(t: f64, decay_rate: f64) -> Result<f64> {
    check_rate(decay_rate)?;
    check_time(t)?;
    Ok(-4.0 / decay_rate * ln_cosh(decay_rate * t / 4.0))
}

/// `U₁ = exp(α K₋)` by its terminating series.
pub fn similarity_u1(alpha: f64, gens: &AlgebraGenerators) -> Result<SuperOperator> {
    gens.k_minus
        .exp_nilpotent(re(alpha), gens.basis().max_total_photons() + 1)
}

/// `X = exp(β₊ J₊) exp(β₋ J₋)`, the operator behind `U₂`.
pub fn transfer_operator(beta_plus: f64, beta_minus: f64, gens: &AlgebraGenerators) -> Result<Operator> {
    let terms = gens.basis().max_total_photons() + 1;
    let up = gens.j_plus.exp_nilpotent(re(beta_plus), terms)?;
    let down = gens.j_minus.exp_nilpotent(re(beta_minus), terms)?;
    Ok(&up * &down)
}

/// `U₂ = exp(β₊ S₊) exp(β₋ S₋)`, assembled as `ρ ↦ X ρ X†`.
pub fn similarity_u2(beta_plus: f64, beta_minus: f64, gens: &AlgebraGenerators) -> Result<SuperOperator> {
    let x = transfer_operator(beta_plus, beta_minus, gens)?;
    Ok(sandwich(&x, &x.dagger()))
}

/// The two stationary solutions of the gauge conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `β₊ = 1, β₋ = −1/2`
    Plus,
    /// `β₊ = −1, β₋ = 1/2`
    Minus,
}

impl Branch {
    pub fn betas(self) -> (f64, f64) {
        match self {
            Branch::Plus => (1.0, -0.5),
            Branch::Minus => (-1.0, 0.5),
        }
    }

    /// Eigenvalue attached to the real-photon dyad `|n1 n2⟩⟨m1 m2|`.
    pub fn eigenvalue(self, decay_rate: f64, ket: (usize, usize), bra: (usize, usize)) -> f64 {
        let (bp, _) = self.betas();
        let f2 = 1.0 - bp;
        let f3 = 1.0 + bp;
        let s1 = (ket.0 + bra.0 + 1) as f64;
        let s2 = (ket.1 + bra.1 + 1) as f64;
        -decay_rate / 4.0 * (f2 * s1 + f3 * s2) + decay_rate / 2.0
    }
}

/// `γ` and `ρ = exp(−K₋) exp(β₊S₊) exp(β₋S₋) |n1 n2⟩⟨m1 m2|`.
pub fn eigen_solution(
    ket: (usize, usize),
    bra: (usize, usize),
    branch: Branch,
    decay_rate: f64,
    gens: &AlgebraGenerators,
) -> Result<(f64, CMatrix)> {
    check_rate(decay_rate)?;
    let basis = gens.basis();
    let seed = dyad(basis, ket, bra)?;
    let (bp, bm) = branch.betas();
    let x = transfer_operator(bp, bm, gens)?;
    let rotated = x.matrix() * seed * x.matrix().adjoint();
    let rho = similarity_u1(-1.0, gens)?.apply(&rotated)?;
    Ok((branch.eigenvalue(decay_rate, ket, bra), rho))
}

/// Eigenvalues predicted for every admissible dyad label, descending.
pub fn predicted_spectrum(basis: FockBasis, decay_rate: f64, branch: Branch) -> Vec<f64> {
    let labels: Vec<(usize, usize)> = basis.iter().collect();
    let mut out = Vec::with_capacity(labels.len() * labels.len());
    for &ket in &labels {
        for &bra in &labels {
            out.push(branch.eigenvalue(decay_rate, ket, bra));
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// `|φ⟩ = (|10⟩ − |01⟩)/√2`.
pub fn phi_ket(basis: FockBasis) -> Result<Ket> {
    Ket::from_terms(basis, &[(1, 0, re(FRAC_1_SQRT_2)), (0, 1, re(-FRAC_1_SQRT_2))])
}

/// `|φ̃⟩ = (|02⟩ + |20⟩ − √2 |11⟩)/2`, phase fixed by a positive `|02⟩`
/// amplitude.
pub fn phi_tilde_ket(basis: FockBasis) -> Result<Ket> {
    Ket::from_terms(
        basis,
        &[(0, 2, re(0.5)), (2, 0, re(0.5)), (1, 1, re(-FRAC_1_SQRT_2))],
    )
}

/// Named zero-mode states for 0, 1 or 2 photons.
pub fn zero_mode_state(n_photons: usize, basis: FockBasis) -> Result<DensityMatrix> {
    match n_photons {
        0 => pure_density(&number_state(0, 0, basis)?),
        1 => pure_density(&phi_ket(basis)?),
        2 => pure_density(&phi_tilde_ket(basis)?),
        n => Err(Error::InvalidParameter(format!(
            "named zero-mode states stop at 2 photons, got {n}"
        ))),
    }
}

/// Diagonal weight `w(n1, n2) = e^{−u(n1+n2)} cosh^{n2−n1}(u)`, `u = ςt/4`.
///
/// The gauge-frame evolution factor of `|n1 n2⟩⟨m1 m2|` is
/// `exp ∫ [−(ς/4)((1−β₊)(n1+m1+1) + (1+β₊)(n2+m2+1)) + ς/2]`, which with
/// the closed-form integral of β₊ splits as `w(n) w(m)`.
fn gauge_weight(n1: usize, n2: usize, u: f64) -> f64 {
    let lc = ln_cosh(u);
    (-u * (n1 + n2) as f64 + lc * (n2 as f64 - n1 as f64)).exp()
}

/// `M = X W`, the ket-side factor of `U₂(t)` applied to the gauge-frame
/// evolution.
///
/// Since `X |00⟩ = |00⟩`, `M` is fixed by its action on the creation
/// operators. Conjugation by `X` sends `a1† ↦ (1+β₊β₋) a1† + β₋ a2†` and
/// `a2† ↦ a2† + β₊ a1†`; folding in `w` per quantum gives
///
/// ```text
/// a1† ↦ e^{−u}(cosh u a1† − sinh u a2†)
/// a2† ↦ e^{−u}(cosh u a2† − sinh u a1†)
/// ```
///
/// whose entries stay bounded, unlike those of `X` and `W` separately.
fn evolution_operator(decay_rate: f64, t: f64, basis: FockBasis) -> Result<(GaugeParams, Operator)> {
    let p = gauge_params(t, decay_rate)?;
    let u = decay_rate * t / 4.0;
    let e2 = (-2.0 * u).exp_m1();
    let c = 1.0 + e2 / 2.0;
    let s = -e2 / 2.0;
    Ok((p, mode_transform([[c, -s], [-s, c]], basis)))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Operator induced on the Fock space by the linear map of creation
/// operators whose columns are the images of `a1†` and `a2†`, fixing the
/// vacuum.
pub fn mode_transform(t: [[f64; 2]; 2], basis: FockBasis) -> Operator {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    let (p, q) = (t[0][0], t[1][0]);
    let (r, s) = (t[0][1], t[1][1]);
    for (col, (n1, n2)) in basis.iter().enumerate() {
        let total = n1 + n2;
        let norm = (factorial(n1) * factorial(n2)).sqrt();
        for i in 0..=n1 {
            let left = binomial(n1, i) * p.powi(i as i32) * q.powi((n1 - i) as i32);
            for j in 0..=n2 {
                let right = binomial(n2, j) * r.powi(j as i32) * s.powi((n2 - j) as i32);
                let k = i + j;
                let row = basis.index(k, total - k).expect("total photon number is conserved");
                let amp = left * right * (factorial(k) * factorial(total - k)).sqrt() / norm;
                m[(row, col)] += re(amp);
            }
        }
    }
    Operator::new(basis, m).expect("square matrix on the basis")
}

/// `Σ_k α^k/k! (A^k M) ρ (A^k M)†`, i.e. `exp(α K₋)` applied to `M ρ M†`.
///
/// Grouping `A^k M` before the sandwich keeps rounding proportional to the
/// (exponentially small) entries of `A^k M` rather than to those of `M`.
fn apply_u1_after(alpha: f64, m: &CMatrix, rho: &CMatrix, a: &CMatrix, max_terms: usize) -> Result<CMatrix> {
    let mut out = m * rho * m.adjoint();
    let mut lowered = m.clone();
    let mut coeff = 1.0;
    for k in 1..=max_terms {
        lowered = a * lowered;
        if lowered.iter().all(|z| *z == ZERO) {
            return Ok(out);
        }
        coeff *= alpha / k as f64;
        out += &lowered * rho * lowered.adjoint() * re(coeff);
    }
    Err(Error::SeriesNotTerminated { max_terms })
}

/// Closed-form evolution `ρ(t) = U₁(t) U₂(t) Σ C e^{∫…} |n⟩⟨m|`.
///
/// Exact in exact arithmetic; in floating point the gauge factors grow like
/// `e^{ςt}` and cancel, so agreement with the numerical propagators is held
/// to 1e-8 for `ςt ≤ 10`.
pub fn evolve_analytic(rho0: &DensityMatrix, decay_rate: f64, t: f64) -> Result<DensityMatrix> {
    let basis = rho0.basis();
    let gens = build_generators(basis)?;
    evolve_analytic_with(rho0, decay_rate, t, &gens)
}

/// [`evolve_analytic`] with prebuilt generators.
pub fn evolve_analytic_with(
    rho0: &DensityMatrix,
    decay_rate: f64,
    t: f64,
    gens: &AlgebraGenerators,
) -> Result<DensityMatrix> {
    let basis = rho0.basis();
    basis.check_same(&gens.basis())?;
    let (p, m) = evolution_operator(decay_rate, t, basis)?;
    let a = collective_mode(basis).into_matrix();
    let rho = apply_u1_after(p.alpha_minus, m.matrix(), rho0.matrix(), &a, basis.max_total_photons() + 1)?;
    let rho = (&rho + rho.adjoint()) * re(0.5);
    DensityMatrix::new(basis, rho)
}

/// The same solution as a superoperator `U₁(t) U₂(t) D(t)`, assembled
/// from the generator exponentials directly.
pub fn analytic_superoperator(decay_rate: f64, t: f64, gens: &AlgebraGenerators) -> Result<SuperOperator> {
    let p = gauge_params(t, decay_rate)?;
    let basis = gens.basis();
    let u = decay_rate * t / 4.0;
    let d = basis.dim();
    let mut diag = CMatrix::zeros(d * d, d * d);
    for (i, ket) in basis.iter().enumerate() {
        for (j, bra) in basis.iter().enumerate() {
            let k = dyad_index(basis, i, j);
            diag[(k, k)] = re(gauge_weight(ket.0, ket.1, u) * gauge_weight(bra.0, bra.1, u));
        }
    }
    let diag = SuperOperator::new(basis, diag)?;
    let u1 = similarity_u1(p.alpha_minus, gens)?;
    let u2 = similarity_u2(p.beta_plus, p.beta_minus, gens)?;
    Ok(&(&u1 * &u2) * &diag)
}

/// Pure-state form of the solution:
/// `ρ(t) = Σ_k (α₋^k/k!) |A^k ψ(t)⟩⟨A^k ψ(t)|` with `ψ(t) = X(t) W(t) ψ₀`.
/// Returns `(weight, normalized ket)` pairs, dropping empty terms.
pub fn pure_state_decomposition(psi0: &Ket, decay_rate: f64, t: f64) -> Result<Vec<(f64, Ket)>> {
    if !psi0.is_normalized() {
        return Err(Error::NotNormalized {
            norm_sq: psi0.norm_squared(),
        });
    }
    let basis = psi0.basis();
    let (p, m) = evolution_operator(decay_rate, t, basis)?;
    let a = collective_mode(basis);
    let mut v = m.apply(psi0)?;
    let mut coeff = 1.0;
    let mut out = Vec::new();
    for k in 0..=basis.max_total_photons() {
        if k > 0 {
            v = a.apply(&v)?;
            coeff *= p.alpha_minus / k as f64;
        }
        let weight = coeff * v.norm_squared();
        if weight > 0.0 {
            out.push((weight, v.normalized()?));
        }
    }
    Ok(out)
}

/// Coefficients of the single-photon solution for `|χ⟩ = a|01⟩ + √(1−a²)|10⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhotonSolution {
    pub a: f64,
    pub t: f64,
    pub rho_01_01: f64,
    pub rho_10_10: f64,
    pub rho_off: f64,
    pub rho_00_00: f64,
}

impl SinglePhotonSolution {
    /// The state on `basis` (truncation at least 1).
    pub fn density(&self, basis: FockBasis) -> Result<DensityMatrix> {
        let i00 = basis.try_index(0, 0)?;
        let i01 = basis.try_index(0, 1)?;
        let i10 = basis.try_index(1, 0)?;
        let d = basis.dim();
        let mut m = CMatrix::zeros(d, d);
        m[(i00, i00)] = re(self.rho_00_00);
        m[(i01, i01)] = re(self.rho_01_01);
        m[(i10, i10)] = re(self.rho_10_10);
        m[(i01, i10)] = re(self.rho_off);
        m[(i10, i01)] = re(self.rho_off);
        DensityMatrix::new(basis, m)
    }
}

/// Closed-form single-photon solution.
///
/// Time integrals are taken in closed form; `1 + β₊` uses
/// [`GaugeParams::one_plus_beta_plus`] so late times stay accurate.
pub fn single_photon_solution(a: f64, decay_rate: f64, t: f64) -> Result<SinglePhotonSolution> {
    if !(a.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("amplitude must satisfy |a| <= 1, got {a}")));
    }
    let p = gauge_params(t, decay_rate)?;
    let ib = integral_beta_plus(t, decay_rate)?;
    let s = decay_rate;
    // exp ∫ −ς(β₊+1)/2,  exp ∫ ς(β₊−1)/2,  exp(−ςt/2)
    let e1 = (-s / 2.0 * (ib + t)).exp();
    let e2 = (s / 2.0 * (ib - t)).exp();
    let e3 = (-s * t / 2.0).exp();

    let b = (1.0 - a * a).max(0.0).sqrt();
    let (aa, bb, ab) = (a * a, b * b, a * b);
    let bp = p.beta_plus;
    let bm = p.beta_minus;
    let opp = p.one_plus_beta_plus(s);
    let mix = 1.0 + bp * bm;
    let lower = 1.0 + bm * opp;

    Ok(SinglePhotonSolution {
        a,
        t,
        rho_01_01: aa * e1 + bb * bm * bm * e2 + 2.0 * ab * bm * e3,
        rho_10_10: aa * bp * bp * e1 + bb * mix * mix * e2 + 2.0 * ab * bp * mix * e3,
        rho_off: aa * bp * e1 + bb * mix * bm * e2 + ab * (1.0 + 2.0 * bp * bm) * e3,
        rho_00_00: p.alpha_minus / 2.0
            * (aa * opp * opp * e1 + bb * lower * lower * e2 + 2.0 * ab * opp * lower * e3),
    })
}

/// Two-photon initial states `a|02⟩ + b|11⟩ + c|20⟩` with closed-form
/// solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoPhotonCase {
    /// `|02⟩`
    Product,
    /// `|φ̃⟩`: `a = c = 1/2`, `b = −1/√2`
    DarkState,
    /// `(|02⟩ + √2|11⟩ + |20⟩)/2`: `a = c = 1/2`, `b = 1/√2`
    BrightState,
}

impl TwoPhotonCase {
    pub fn from_index(case: u8) -> Result<Self> {
        match case {
            1 => Ok(Self::Product),
            2 => Ok(Self::DarkState),
            3 => Ok(Self::BrightState),
            other => Err(Error::InvalidParameter(format!("two-photon case must be 1, 2 or 3, got {other}"))),
        }
    }

    /// `(a, b, c)` amplitudes of the initial state.
    pub fn amplitudes(self) -> (f64, f64, f64) {
        match self {
            Self::Product => (1.0, 0.0, 0.0),
            Self::DarkState => (0.5, -FRAC_1_SQRT_2, 0.5),
            Self::BrightState => (0.5, FRAC_1_SQRT_2, 0.5),
        }
    }

    pub fn initial_ket(self, basis: FockBasis) -> Result<Ket> {
        two_photon_ket(self.amplitudes(), basis)
    }
}

/// `a|01⟩ + √(1−a²)|10⟩`.
pub fn single_photon_ket(a: f64, basis: FockBasis) -> Result<Ket> {
    if !(a.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("amplitude must satisfy |a| <= 1, got {a}")));
    }
    Ket::from_terms(basis, &[(0, 1, re(a)), (1, 0, re((1.0 - a * a).max(0.0).sqrt()))])
}

/// `a|02⟩ + b|11⟩ + c|20⟩`.
pub fn two_photon_ket((a, b, c): (f64, f64, f64), basis: FockBasis) -> Result<Ket> {
    Ket::from_terms(basis, &[(0, 2, re(a)), (1, 1, re(b)), (2, 0, re(c))])
}

/// Mixture form of a two-photon solution: pure components with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonSolution {
    pub case: TwoPhotonCase,
    pub t: f64,
    pub components: Vec<(f64, Ket)>,
}

impl TwoPhotonSolution {
    pub fn density(&self) -> Result<DensityMatrix> {
        let basis = self
            .components
            .first()
            .map(|(_, k)| k.basis())
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let d = basis.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, k) in &self.components {
            m += k.outer(k) * re(*w);
        }
        DensityMatrix::new(basis, m)
    }
}

/// Closed-form two-photon solutions on `basis` (truncation at least 2).
pub fn two_photon_solution(case: TwoPhotonCase, decay_rate: f64, t: f64, basis: FockBasis) -> Result<TwoPhotonSolution> {
    check_rate(decay_rate)?;
    check_time(t)?;
    if basis.max_total_photons() < 2 {
        return Err(Error::OutOfRange {
            n1: 0,
            n2: 2,
            max_total_photons: basis.max_total_photons(),
        });
    }
    let s = (-decay_rate * t).exp();
    let h = (-decay_rate * t / 2.0).exp();
    let vacuum = number_state(0, 0, basis)?;
    let components = match case {
        TwoPhotonCase::Product => {
            let norm2 = 2.0 * (1.0 + s);
            let two = Ket::from_terms(
                basis,
                &[
                    (0, 2, re((1.0 + h).powi(2) / norm2)),
                    (1, 1, re(-SQRT_2 * (1.0 - s) / norm2)),
                    (2, 0, re((1.0 - h).powi(2) / norm2)),
                ],
            )?;
            let root = norm2.sqrt();
            let one = Ket::from_terms(basis, &[(0, 1, re((1.0 + h) / root)), (1, 0, re(-(1.0 - h) / root))])?;
            vec![
                ((1.0 + s).powi(2) / 4.0, two),
                ((1.0 - s * s) / 2.0, one),
                ((1.0 - s).powi(2) / 4.0, vacuum),
            ]
        }
        TwoPhotonCase::DarkState => vec![(1.0, phi_tilde_ket(basis)?)],
        TwoPhotonCase::BrightState => {
            let chi = case.initial_ket(basis)?;
            let upsilon = Ket::from_terms(basis, &[(0, 1, re(FRAC_1_SQRT_2)), (1, 0, re(FRAC_1_SQRT_2))])?;
            vec![
                (s * s, chi),
                (2.0 * (s - s * s), upsilon),
                ((1.0 - s).powi(2), vacuum),
            ]
        }
    };
    Ok(TwoPhotonSolution { case, t, components })
}

/// Largest element gap between the analytic and numerical routes; used by
/// comparison reports.
pub fn analytic_gap(analytic: &DensityMatrix, numeric: &DensityMatrix) -> f64 {
    max_abs_diff(analytic.matrix(), numeric.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, C64};
    use crate::liouvillian::{build_gamma_collective, build_gamma_two_mode, evolve_numeric};
    use std::f64::consts::E;

    fn gens(n: usize) -> AlgebraGenerators {
        build_generators(build_basis(n)).unwrap()
    }

    #[test]
    fn su11_commutators_on_interior() {
        let g = gens(3);
        let k0k_plus = g.k_zero.commutator(&g.k_plus);
        let k0k_minus = g.k_zero.commutator(&g.k_minus);
        assert!(interior_gap(&k0k_plus, &g.k_plus) <= 1e-12);
        assert!(interior_gap(&k0k_minus, &g.k_minus.scaled(re(-1.0))) <= 1e-12);
        let kk = g.k_minus.commutator(&g.k_plus);
        assert!(interior_gap(&kk, &g.k_zero.scaled(re(2.0))) <= 1e-12);
    }

    #[test]
    fn u2_commutators_on_interior() {
        let g = gens(3);
        let zero = SuperOperator::zero(g.basis());
        assert!(interior_gap(&g.s_zero.commutator(&g.s_plus), &g.s_plus) <= 1e-12);
        assert!(interior_gap(&g.s_zero.commutator(&g.s_minus), &g.s_minus.scaled(re(-1.0))) <= 1e-12);
        assert!(interior_gap(&g.s_minus.commutator(&g.s_plus), &g.s_zero.scaled(re(-2.0))) <= 1e-12);
        for op in [&g.s_plus, &g.s_minus, &g.s_zero] {
            assert!(interior_gap(&g.n_total.commutator(op), &zero) <= 1e-12);
        }
    }

    #[test]
    fn k0_in_real_photon_terms() {
        let g = gens(3);
        let sum = &(&(&g.n1 + &g.n2) + &g.s_plus) + &g.s_minus;
        assert!(max_abs_diff(g.k_zero.matrix(), sum.scaled(re(0.25)).matrix()) <= 1e-12);
    }

    #[test]
    fn collective_dyad_actions() {
        let b = build_basis(3);
        let g = build_generators(b).unwrap();
        let a_dag = collective_mode(b).dagger();
        let vac = number_state(0, 0, b).unwrap();
        let q1 = a_dag.apply(&vac).unwrap();
        let q2 = a_dag.apply(&q1).unwrap().scaled(re(FRAC_1_SQRT_2));
        // K₋ |2⟩⟨1| = √2 |1⟩⟨0|
        let out = g.k_minus.apply(&q2.outer(&q1)).unwrap();
        assert!(max_abs_diff(&out, &(q1.outer(&vac) * re(SQRT_2))) <= 1e-12);
        let out = g.k_zero.apply(&q1.outer(&q1)).unwrap();
        assert!(max_abs_diff(&out, &(q1.outer(&q1) * re(1.5))) <= 1e-12);
    }

    #[test]
    fn s_plus_moves_one_photon_on_the_ket() {
        let b = build_basis(2);
        let g = build_generators(b).unwrap();
        let out = g.s_plus.apply(&dyad(b, (0, 1), (0, 0)).unwrap()).unwrap();
        assert!(max_abs_diff(&out, &dyad(b, (1, 0), (0, 0)).unwrap()) <= 1e-15);
    }

    #[test]
    fn generator_forms_agree() {
        for n in [1, 2, 3] {
            let b = build_basis(n);
            let g = build_generators(b).unwrap();
            let from_gens = gamma_from_generators(0.7, &g).unwrap();
            assert!(max_abs_diff(from_gens.matrix(), build_gamma_collective(0.7, b).unwrap().matrix()) <= 1e-12);
            assert!(max_abs_diff(from_gens.matrix(), build_gamma_two_mode(0.7, b).unwrap().matrix()) <= 1e-12);
        }
    }

    #[test]
    fn gamma_on_collective_coherence() {
        let b = build_basis(2);
        let g = build_generators(b).unwrap();
        let gamma = gamma_from_generators(1.3, &g).unwrap();
        let vac = number_state(0, 0, b).unwrap();
        let q1 = collective_mode(b).dagger().apply(&vac).unwrap();
        let out = gamma.apply(&q1.outer(&vac)).unwrap();
        assert!(max_abs_diff(&out, &(q1.outer(&vac) * re(-0.65))) <= 1e-12);
        assert!(gamma.apply(&vac.outer(&vac)).unwrap().norm() <= 1e-15);
    }

    #[test]
    fn gauge_params_start_at_identity_and_saturate() {
        let p = gauge_params(0.0, 2.0).unwrap();
        assert_eq!((p.alpha_minus, p.beta_plus, p.beta_minus), (0.0, 0.0, 0.0));
        let p = gauge_params(4.0, 1.0).unwrap();
        assert!((p.beta_plus + 1.0_f64.tanh()).abs() < 1e-15);
        assert!((p.beta_plus + 0.761594).abs() < 1e-6);
        // 1 + β₊ = 2/(1 + e^{ςt/2}) is still about 6e-7 at ςt = 30
        let p = gauge_params(15.0, 2.0).unwrap();
        assert!(((p.beta_plus + 1.0) - 2.0 / (1.0 + 15.0_f64.exp())).abs() < 1e-15);
        assert!((p.one_plus_beta_plus(2.0) - 2.0 / (1.0 + 15.0_f64.exp())).abs() < 1e-22);
        let p = gauge_params(45.0, 1.0).unwrap();
        assert!((p.beta_plus + 1.0).abs() < 1e-9);
        assert!(gauge_params(-1.0, 1.0).is_err());
        assert!(gauge_params(1.0, 0.0).is_err());
    }

    #[test]
    fn gauge_odes_by_central_differences() {
        for rate in [0.5, 1.0, 3.0] {
            let h = 1e-4 / rate;
            for k in 1..=100 {
                let t = k as f64 * 0.1 / rate;
                let fwd = gauge_params(t + h, rate).unwrap();
                let bwd = gauge_params(t - h, rate).unwrap();
                let here = gauge_params(t, rate).unwrap();
                let rhs = gauge_rhs(&here, rate);
                let fd = [
                    (fwd.alpha_minus - bwd.alpha_minus) / (2.0 * h),
                    (fwd.beta_plus - bwd.beta_plus) / (2.0 * h),
                    (fwd.beta_minus - bwd.beta_minus) / (2.0 * h),
                ];
                let vals = [here.alpha_minus, here.beta_plus, here.beta_minus];
                for i in 0..3 {
                    let scale = rate * vals[i].abs().max(1.0);
                    assert!((fd[i] - rhs[i]).abs() / scale <= 1e-6, "rate {rate} t {t} component {i}");
                }
            }
        }
    }

    #[test]
    fn beta_plus_integral_matches_quadrature() {
        let rate = 1.7;
        for t in [0.0, 0.3, 2.0, 6.0, 20.0] {
            // composite Simpson
            let n = 4000;
            let h = t / n as f64;
            let f = |x: f64| -(rate * x / 4.0).tanh();
            let mut acc = f(0.0) + f(t);
            for i in 1..n {
                acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let quad = acc * h / 3.0;
            assert!((integral_beta_plus(t, rate).unwrap() - quad).abs() <= 1e-10);
        }
    }

    #[test]
    fn beta_plus_by_rk4() {
        // integrate the β ODEs to ςt = 4 and compare with the closed forms
        let rate = 1.0;
        let steps = 4000;
        let h = 4.0 / steps as f64;
        let f = |b: [f64; 2]| [-rate / 4.0 * (1.0 - b[0] * b[0]), -rate / 4.0 * (1.0 + 2.0 * b[0] * b[1])];
        let mut y = [0.0, 0.0];
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f([y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
            let k3 = f([y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
            let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        let p = gauge_params(4.0, rate).unwrap();
        assert!((y[0] - p.beta_plus).abs() < 1e-12);
        assert!((y[1] - p.beta_minus).abs() < 1e-12);
    }

    #[test]
    fn u1_identity_and_termination() {
        let g = gens(3);
        let u = similarity_u1(0.0, &g).unwrap();
        assert_eq!(u.matrix(), SuperOperator::identity(g.basis()).matrix());
        // K₋^N ≠ 0 while K₋^{N+1} = 0
        assert!(g.k_minus.exp_nilpotent(re(1.0), 3).is_err());
        assert!(g.k_minus.exp_nilpotent(re(1.0), 4).is_ok());
        assert!(g.j_plus.exp_nilpotent(re(1.0), 3).is_err());
        assert!(g.j_plus.exp_nilpotent(re(1.0), 4).is_ok());
    }

    #[test]
    fn u2_factorization_matches_superoperator_series() {
        // the direct series in S± needs up to 2N + 1 terms
        let g = gens(3);
        let (bp, bm) = (0.37, -1.2);
        let direct = &g.s_plus.exp_nilpotent(re(bp), 7).unwrap() * &g.s_minus.exp_nilpotent(re(bm), 7).unwrap();
        let factored = similarity_u2(bp, bm, &g).unwrap();
        assert!(max_abs_diff(direct.matrix(), factored.matrix()) <= 1e-12);
    }

    #[test]
    fn u1_leaves_dark_dyads_alone() {
        let b = build_basis(3);
        let g = build_generators(b).unwrap();
        let u1 = similarity_u1(-1.0, &g).unwrap();
        let u2 = similarity_u2(1.0, -0.5, &g).unwrap();
        for (n, m) in [(0, 0), (1, 1), (2, 1), (3, 0)] {
            let seed = dyad(b, (n, 0), (m, 0)).unwrap();
            let rotated = u2.apply(&seed).unwrap();
            let out = u1.apply(&rotated).unwrap();
            assert!(max_abs_diff(&out, &rotated) <= 1e-14);
        }
    }

    #[test]
    fn u2_maps_one_photon_to_phi() {
        let b = build_basis(2);
        let g = build_generators(b).unwrap();
        let out = similarity_u2(1.0, -0.5, &g).unwrap().apply(&dyad(b, (1, 0), (1, 0)).unwrap()).unwrap();
        let normalized = &out / out.trace();
        let phi = phi_ket(b).unwrap();
        assert!(max_abs_diff(&normalized, &phi.outer(&phi)) <= 1e-12);
    }

    #[test]
    fn eigen_relation_for_every_label() {
        let b = build_basis(3);
        let g = build_generators(b).unwrap();
        let rate = 0.8;
        let gamma = build_gamma_collective(rate, b).unwrap();
        let labels: Vec<_> = b.iter().collect();
        for branch in [Branch::Plus, Branch::Minus] {
            for &ket in &labels {
                for &bra in &labels {
                    let (gam, rho) = eigen_solution(ket, bra, branch, rate, &g).unwrap();
                    let lhs = gamma.apply(&rho).unwrap();
                    let gap = (lhs - &rho * re(gam)).norm();
                    assert!(gap <= 1e-9 * rho.norm(), "{branch:?} {ket:?} {bra:?}");
                }
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let g = gens(2);
        let (gam, rho) = eigen_solution((0, 0), (0, 0), Branch::Plus, 1.0, &g).unwrap();
        assert_eq!(gam, 0.0);
        assert!(max_abs_diff(&rho, &dyad(g.basis(), (0, 0), (0, 0)).unwrap()) <= 1e-15);
        assert_eq!(Branch::Plus.eigenvalue(1.0, (1, 0), (1, 0)), 0.0);
        assert_eq!(Branch::Plus.eigenvalue(1.0, (0, 1), (0, 1)), -1.0);
        assert!(eigen_solution((3, 0), (0, 0), Branch::Plus, 1.0, &g).is_err());
    }

    #[test]
    fn branches_predict_the_same_multiset() {
        let b = build_basis(3);
        assert_eq!(predicted_spectrum(b, 1.0, Branch::Plus), predicted_spectrum(b, 1.0, Branch::Minus));
    }

    #[test]
    fn zero_modes_are_stationary() {
        let b = build_basis(3);
        let gamma = build_gamma_collective(1.0, b).unwrap();
        for n in 0..=2 {
            let rho = zero_mode_state(n, b).unwrap();
            assert!(gamma.apply(rho.matrix()).unwrap().iter().all(|z| z.norm() <= 1e-12));
        }
        assert!(zero_mode_state(3, b).is_err());
    }

    #[test]
    fn analytic_equals_numeric_on_a_grid() {
        let b = build_basis(2);
        let rate = 1.0;
        let times = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];
        let g = build_generators(b).unwrap();
        for k in 0..=20 {
            let a = -1.0 + 0.1 * k as f64;
            let chi = single_photon_ket(a, b).unwrap();
            let rho0 = pure_density(&chi.normalized().unwrap()).unwrap();
            let numeric = evolve_numeric(&rho0, rate, &times).unwrap();
            for (t, num) in times.iter().zip(&numeric) {
                let ana = evolve_analytic_with(&rho0, rate, *t, &g).unwrap();
                assert!(analytic_gap(&ana, num) <= 1e-8, "a {a} t {t}");
            }
        }
    }

    #[test]
    fn analytic_superoperator_matches_operator_route() {
        let b = build_basis(2);
        let g = build_generators(b).unwrap();
        let rho0 = pure_density(&TwoPhotonCase::Product.initial_ket(b).unwrap()).unwrap();
        for t in [0.0, 0.7, 3.0] {
            let sup = analytic_superoperator(1.0, t, &g).unwrap();
            let via_sup = sup.apply(rho0.matrix()).unwrap();
            let via_ops = evolve_analytic_with(&rho0, 1.0, t, &g).unwrap();
            assert!(max_abs_diff(&via_sup, via_ops.matrix()) <= 1e-10);
        }
    }

    #[test]
    fn evolution_operator_equals_transfer_times_weights() {
        let b = build_basis(3);
        let g = build_generators(b).unwrap();
        for t in [0.0, 0.4, 2.0, 5.0] {
            let p = gauge_params(t, 1.0).unwrap();
            let mut xw = transfer_operator(p.beta_plus, p.beta_minus, &g).unwrap().into_matrix();
            for (j, (n1, n2)) in b.iter().enumerate() {
                let w = re(gauge_weight(n1, n2, t / 4.0));
                for z in xw.column_mut(j).iter_mut() {
                    *z *= w;
                }
            }
            let (_, m) = evolution_operator(1.0, t, b).unwrap();
            assert!(max_abs_diff(m.matrix(), &xw) <= 1e-10 * xw.norm().max(1.0), "t {t}");
        }
    }

    #[test]
    fn mode_transform_of_identity_and_swap() {
        let b = build_basis(3);
        assert_eq!(mode_transform([[1.0, 0.0], [0.0, 1.0]], b).matrix(), Operator::identity(b).matrix());
        let swap = mode_transform([[0.0, 1.0], [1.0, 0.0]], b);
        let out = swap.apply(&number_state(2, 1, b).unwrap()).unwrap();
        assert!((out.amplitude(1, 2) - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn analytic_at_zero_is_identity() {
        let b = build_basis(2);
        let rho0 = pure_density(&two_photon_ket((0.6, 0.0, 0.8), b).unwrap()).unwrap();
        let out = evolve_analytic(&rho0, 1.0, 0.0).unwrap();
        assert!(out.max_abs_diff(&rho0) <= 1e-15);
    }

    #[test]
    fn analytic_handles_cross_sector_superpositions() {
        let b = build_basis(3);
        let psi = Ket::from_terms(b, &[(0, 0, re(0.6)), (1, 1, re(0.48)), (2, 1, C64::new(0.0, 0.64))]).unwrap();
        let rho0 = pure_density(&psi).unwrap();
        let times = [0.0, 1.0, 4.0];
        let numeric = evolve_numeric(&rho0, 1.0, &times).unwrap();
        for (t, num) in times.iter().zip(&numeric) {
            assert!(analytic_gap(&evolve_analytic(&rho0, 1.0, *t).unwrap(), num) <= 1e-8);
        }
    }

    #[test]
    fn single_photon_closed_form_values() {
        let case3 = single_photon_solution(FRAC_1_SQRT_2, 1.0, 1.0).unwrap();
        assert!((case3.rho_off - 0.5 / E).abs() < 1e-12);
        assert!((case3.rho_00_00 - (1.0 - 1.0 / E)).abs() < 1e-12);
        assert!((case3.rho_01_01 - 0.5 / E).abs() < 1e-12);
        assert!((case3.rho_10_10 - 0.5 / E).abs() < 1e-12);

        let dark = single_photon_solution(-FRAC_1_SQRT_2, 1.0, 7.0).unwrap();
        for (x, want) in [(dark.rho_01_01, 0.5), (dark.rho_10_10, 0.5), (dark.rho_off, -0.5), (dark.rho_00_00, 0.0)] {
            assert!((x - want).abs() < 1e-12);
        }

        let late = single_photon_solution(0.0, 1.0, 80.0).unwrap();
        for (x, want) in [(late.rho_01_01, 0.25), (late.rho_10_10, 0.25), (late.rho_off, -0.25), (late.rho_00_00, 0.5)] {
            assert!((x - want).abs() < 1e-12);
        }
        assert!(single_photon_solution(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn single_photon_product_state_closed_form() {
        for t in [0.0, 0.4, 3.0, 12.0] {
            let sol = single_photon_solution(0.0, 1.0, t).unwrap();
            let h = (-t / 2.0).exp();
            assert!((sol.rho_01_01 - (1.0 - h).powi(2) / 4.0).abs() < 1e-13);
            assert!((sol.rho_10_10 - (1.0 + h).powi(2) / 4.0).abs() < 1e-13);
            assert!((sol.rho_off - ((-t).exp() - 1.0) / 4.0).abs() < 1e-13);
            assert!((sol.rho_00_00 - (1.0 - (-t).exp()) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn single_photon_matches_general_solution() {
        let b = build_basis(1);
        let g = build_generators(b).unwrap();
        for k in 0..=8 {
            let a = -1.0 + 0.25 * k as f64;
            let chi = single_photon_ket(a, b).unwrap();
            let rho0 = pure_density(&chi).unwrap();
            for t in [0.0, 0.5, 2.0, 8.0] {
                let closed = single_photon_solution(a, 1.0, t).unwrap().density(b).unwrap();
                let general = evolve_analytic_with(&rho0, 1.0, t, &g).unwrap();
                assert!(closed.max_abs_diff(&general) <= 1e-9);
            }
        }
    }

    #[test]
    fn two_photon_closed_forms_match_general_solution() {
        let b = build_basis(2);
        let g = build_generators(b).unwrap();
        for case in [TwoPhotonCase::Product, TwoPhotonCase::DarkState, TwoPhotonCase::BrightState] {
            let rho0 = pure_density(&case.initial_ket(b).unwrap()).unwrap();
            for t in [0.0, 0.5, 1.0, 4.0, 10.0] {
                let closed = two_photon_solution(case, 1.0, t, b).unwrap().density().unwrap();
                let general = evolve_analytic_with(&rho0, 1.0, t, &g).unwrap();
                assert!(closed.max_abs_diff(&general) <= 1e-9, "{case:?} t {t}");
            }
        }
    }

    #[test]
    fn two_photon_case_values() {
        let b = build_basis(2);
        let sol = two_photon_solution(TwoPhotonCase::BrightState, 1.0, 1.0, b).unwrap();
        assert!((sol.components[0].0 - 0.135335283).abs() < 1e-9);
        let late = two_photon_solution(TwoPhotonCase::Product, 1.0, 40.0, b).unwrap();
        let weights: Vec<f64> = late.components.iter().map(|c| c.0).collect();
        for (w, want) in weights.iter().zip([0.25, 0.5, 0.25]) {
            assert!((w - want).abs() < 1e-12);
        }
        let dark = phi_tilde_ket(b).unwrap();
        assert!((late.components[0].1.inner(&dark).norm() - 1.0).abs() < 1e-12);
        assert!(TwoPhotonCase::from_index(4).is_err());
    }

    #[test]
    fn pure_decomposition_reproduces_case_one() {
        let b = build_basis(2);
        let psi0 = TwoPhotonCase::Product.initial_ket(b).unwrap();
        for t in [0.3, 2.0, 6.0] {
            let generic = pure_state_decomposition(&psi0, 1.0, t).unwrap();
            let closed = two_photon_solution(TwoPhotonCase::Product, 1.0, t, b).unwrap();
            assert_eq!(generic.len(), 3);
            for ((w1, k1), (w2, k2)) in generic.iter().zip(&closed.components) {
                assert!((w1 - w2).abs() < 1e-10);
                assert!((k1.inner(k2).norm() - 1.0).abs() < 1e-10);
            }
        }
    }
}
