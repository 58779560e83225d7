//! A classical oscillator α and a quantum oscillator β at resonance with
//! bilinear coupling λ. The flow is linear, γ(t) = U(t)γ(0) for γ = (α, β),
//! with
//!
//! ```text
//! U(t) = [[cos λt, −i sin λt], [−i sin λt, cos λt]] e^{−it}
//! ```
//!
//! and the joint density is transported as W_t(γ) = W_0(U⁻¹(t)γ). At
//! λτ = π/2 the two subsystems have traded places.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::cartesian_wigner::{
    fock_diag_element, fock_wigner, gaussian_wigner, nonclassical_check, nonquantum_check, FockIndex, Grid,
    NonclassicalReport, NonquantumReport, PhaseSpaceFunction, DEFAULT_MAX_FOCK,
};
use crate::error::{domain, Result};
use crate::quadrature::{try_integrate_plane, IntegrationSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorPair {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl OscillatorPair {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    pub fn energy(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    lambda: f64,
    mu: f64,
}

impl CouplingParams {
    /// Only the resonant case μ = 1 is supported.
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if mu != 1.0 {
            return Err(domain(format!("only resonant coupling (mu = 1) is supported, got mu = {mu}")));
        }
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(domain(format!("coupling must be finite and non-zero, got {lambda}")));
        }
        Ok(Self { lambda, mu })
    }

    pub fn resonant(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// τ with λτ = π/2.
    pub fn swap_time(&self) -> f64 {
        FRAC_PI_2 / self.lambda
    }
}

pub type FlowMatrix = [[Complex64; 2]; 2];

/// Snap sin/cos of λt to exact zeros when within rounding of one, so the
/// factorized fast paths trigger at t = 0 and t = τ.
fn trig(params: &CouplingParams, t: f64) -> (f64, f64) {
    let (mut s, mut c) = (params.lambda * t).sin_cos();
    if s.abs() < 1e-14 {
        s = 0.0;
        c = c.signum();
    } else if c.abs() < 1e-14 {
        c = 0.0;
        s = s.signum();
    }
    (s, c)
}

pub fn flow_matrix(params: &CouplingParams, t: f64) -> FlowMatrix {
    let (s, c) = (params.lambda * t).sin_cos();
    let ph = Complex64::from_polar(1.0, -t);
    [[ph * c, ph * Complex64::new(0.0, -s)], [ph * Complex64::new(0.0, -s), ph * c]]
}

fn apply(m: &FlowMatrix, g: OscillatorPair) -> OscillatorPair {
    OscillatorPair {
        alpha: m[0][0] * g.alpha + m[0][1] * g.beta,
        beta: m[1][0] * g.alpha + m[1][1] * g.beta,
    }
}

pub fn pair_flow(g: OscillatorPair, params: &CouplingParams, t: f64) -> OscillatorPair {
    apply(&flow_matrix(params, t), g)
}

/// U⁻¹(t) = U(t)†, with exact zeros at the factorized times.
fn inverse_matrix(params: &CouplingParams, t: f64) -> FlowMatrix {
    let (s, c) = trig(params, t);
    let ph = Complex64::from_polar(1.0, t);
    [[ph * c, ph * Complex64::new(0.0, s)], [ph * Complex64::new(0.0, s), ph * c]]
}

/// Evolved joint density W_t(α, β) = W_c(α₀) W_q(β₀), (α₀, β₀) = U⁻¹(t)(α, β).
#[derive(Debug, Clone)]
pub struct PairWigner {
    classical: PhaseSpaceFunction,
    quantum: PhaseSpaceFunction,
    inverse: FlowMatrix,
    forward: FlowMatrix,
}

pub fn evolve_pair_wigner(
    classical: &PhaseSpaceFunction,
    quantum: &PhaseSpaceFunction,
    params: &CouplingParams,
    t: f64,
) -> PairWigner {
    PairWigner {
        classical: classical.clone(),
        quantum: quantum.clone(),
        inverse: inverse_matrix(params, t),
        forward: flow_matrix(params, t),
    }
}

impl PairWigner {
    pub fn evaluate(&self, alpha: Complex64, beta: Complex64) -> Result<f64> {
        let g0 = apply(&self.inverse, OscillatorPair { alpha, beta });
        Ok(self.classical.evaluate(g0.alpha)? * self.quantum.evaluate(g0.beta)?)
    }

    fn factorized(&self) -> bool {
        let m = &self.inverse;
        m[0][1] == Complex64::new(0.0, 0.0) || m[0][0] == Complex64::new(0.0, 0.0)
    }

    fn evolved_center(&self) -> OscillatorPair {
        apply(
            &self.forward,
            OscillatorPair {
                alpha: self.classical.decay_center(),
                beta: self.quantum.decay_center(),
            },
        )
    }

    fn scale(&self) -> f64 {
        self.classical.decay_scale().max(self.quantum.decay_scale())
    }

    /// Marginal over one plane; `keep_alpha` selects which variable survives.
    fn marginal(&self, keep_alpha: bool, spec: &IntegrationSpec) -> PhaseSpaceFunction {
        let center = self.evolved_center();
        let (keep_c, drop_c) = if keep_alpha { (center.alpha, center.beta) } else { (center.beta, center.alpha) };
        let label = format!("{}-marginal", if keep_alpha { "alpha" } else { "beta" });
        let scale = self.scale();
        if self.factorized() {
            // one row of U⁻¹ has a single non-zero entry: the dropped
            // variable's factor integrates to 1
            let me = self.clone();
            return PhaseSpaceFunction::new(label, keep_c, scale, move |z| {
                let g = if keep_alpha { OscillatorPair::new(z, Complex64::new(0.0, 0.0)) } else { OscillatorPair::new(Complex64::new(0.0, 0.0), z) };
                let g0 = apply(&me.inverse, g);
                let diagonal = me.inverse[0][0] != Complex64::new(0.0, 0.0);
                // α₀ depends on the kept variable for (diagonal, keep α) and
                // (anti-diagonal, keep β)
                if diagonal == keep_alpha {
                    me.classical.evaluate(g0.alpha)
                } else {
                    me.quantum.evaluate(g0.beta)
                }
            });
        }
        let me = self.clone();
        let spec = *spec;
        PhaseSpaceFunction::new(label, keep_c, scale, move |z| {
            me.marginal_by_quadrature_at(keep_alpha, z, drop_c, &spec)
        })
    }

    fn marginal_by_quadrature_at(&self, keep_alpha: bool, z: Complex64, center: Complex64, spec: &IntegrationSpec) -> Result<f64> {
        let r = try_integrate_plane(
            |w| if keep_alpha { self.evaluate(z, w) } else { self.evaluate(w, z) },
            center,
            2.0 * self.scale() + z.norm() / spec.radial_cutoff_sigmas(),
            spec,
        )?;
        Ok(r.value)
    }

    /// ∫ W_t d²β as a function of α.
    pub fn alpha_marginal(&self, spec: &IntegrationSpec) -> PhaseSpaceFunction {
        self.marginal(true, spec)
    }

    /// ∫ W_t d²α as a function of β.
    pub fn beta_marginal(&self, spec: &IntegrationSpec) -> PhaseSpaceFunction {
        self.marginal(false, spec)
    }

    /// The α-marginal at one point by 2D quadrature, bypassing the fast path.
    pub fn alpha_marginal_by_quadrature(&self, alpha: Complex64, spec: &IntegrationSpec) -> Result<f64> {
        self.marginal_by_quadrature_at(true, alpha, self.evolved_center().beta, spec)
    }

    pub fn beta_marginal_by_quadrature(&self, beta: Complex64, spec: &IntegrationSpec) -> Result<f64> {
        self.marginal_by_quadrature_at(false, beta, self.evolved_center().alpha, spec)
    }

    /// ∫∫ W_t d²α d²β.
    pub fn total(&self, spec: &IntegrationSpec) -> Result<f64> {
        let m = self.alpha_marginal(spec);
        Ok(try_integrate_plane(|a| m.evaluate(a), m.decay_center(), m.decay_scale() * 2.0, spec)?.value)
    }
}

#[derive(Debug, Clone)]
pub struct NonclassicalTransferReport {
    /// α-marginal at the origin at t = τ.
    pub value_at_origin: f64,
    pub initial: NonclassicalReport,
    pub swapped: NonclassicalReport,
}

/// Starts the quantum oscillator in Fock state 1 and looks for negativity in
/// the classical oscillator's marginal after the swap.
pub fn nonclassical_transfer_check(
    classical: &PhaseSpaceFunction,
    params: &CouplingParams,
    spec: &IntegrationSpec,
) -> Result<NonclassicalTransferReport> {
    let quantum = fock_wigner(FockIndex(1));
    let grid = Grid::new(Complex64::new(0.0, 0.0), 2.0, 21)?;
    let initial = nonclassical_check(&evolve_pair_wigner(classical, &quantum, params, 0.0).alpha_marginal(spec), &grid)?;
    let swapped_marginal = evolve_pair_wigner(classical, &quantum, params, params.swap_time()).alpha_marginal(spec);
    Ok(NonclassicalTransferReport {
        value_at_origin: swapped_marginal.evaluate(Complex64::new(0.0, 0.0))?,
        initial,
        swapped: nonclassical_check(&swapped_marginal, &grid)?,
    })
}

#[derive(Debug, Clone)]
pub struct NonquantumTransferReport {
    /// ⟨1|ρ|1⟩ of the quantum oscillator after the swap.
    pub fock1_element: f64,
    pub report: NonquantumReport,
}

/// Starts the classical oscillator in a sub-vacuum Gaussian of width σ and
/// tests whether the quantum oscillator's marginal after the swap is a
/// legitimate state.
pub fn nonquantum_transfer_check(
    sigma: f64,
    quantum: &PhaseSpaceFunction,
    params: &CouplingParams,
    spec: &IntegrationSpec,
) -> Result<NonquantumTransferReport> {
    let classical = gaussian_wigner(Complex64::new(0.0, 0.0), sigma)?;
    let marginal = evolve_pair_wigner(&classical, quantum, params, params.swap_time()).beta_marginal(spec);
    Ok(NonquantumTransferReport {
        fock1_element: fock_diag_element(&marginal, FockIndex(1), spec)?,
        report: nonquantum_check(&marginal, DEFAULT_MAX_FOCK, &[0.0, FRAC_PI_2], spec)?,
    })
}
