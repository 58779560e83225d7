//! Dispersive atom–field dynamics with the atom on the Bloch sphere and the
//! field mode on the complex plane, both carried by one joint phase-space
//! distribution.
//!
//! Under H = χ a†a σ_z and with α = r e^{−iφ}:
//!
//! ```text
//! r(t) = r,  φ(t) = φ + √3 χt cosθ,  θ(t) = θ,  φ_atom(t) = φ_atom + 2χ r² t
//! ```
//!
//! The joint density is transported along this flow, so the field picks up a
//! θ-dependent phase (the back-reaction) while the atom precesses at a rate
//! set by the field intensity.
//!
//! Integrating the atom's azimuth out of any symbol average leaves a weight on
//! u = cosθ ∈ [−1, 1]; every field-sector moment is an integral of that weight
//! against e^{±iκu} with κ = √3χt. Those integrals have closed forms, as do the
//! Gaussian field averages of e^{−2iχt|α|²}. [`hybrid_expectation`] uses the
//! closed forms; [`joint_average`] integrates the evolved joint density
//! directly and is the independent route.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cartesian_wigner::{gaussian_wigner, PhaseSpaceFunction};
use crate::error::{domain, Error, Result};
use crate::quadrature::{adaptive, periodic, try_integrate_plane, IntegrationSpec};
use crate::su2_wigner::{spin_wigner, BlochPoint, SphereFunction, SpinHalfState};

pub(crate) const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Ratio between the conventional unit-modulus normalization of ⟨σ_−⟩ for the
/// equal superposition (e.g. ⟨σ_−⟩ = e^{−2iχr₀²t}) and the phase-space
/// average, which reproduces tr(ρσ_−) = c_e c_g* = 1/2 at t = 0.
pub const SIGMA_MINUS_UNIT_SCALE: f64 = 2.0;

/// Initial distribution of the classical field mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldState {
    /// Perfectly defined amplitude α₀ = r₀ e^{−iφ₀} (a Dirac delta).
    DeltaAmplitude { r0: f64, phi0: f64 },
    /// (2/(πσ²)) e^{−2|α−r₀|²/σ²}; σ = 1 mimics a coherent state.
    GaussianAmplitude { r0: f64, sigma: f64 },
}

/// How the mean-field comparator defines ⟨r²⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanIntensity {
    /// r₀² + σ²/2, the second moment of the Gaussian.
    #[default]
    WithWidth,
    /// r₀² only.
    CenterOnly,
}

impl FieldState {
    pub fn delta(r0: f64, phi0: f64) -> Result<Self> {
        if !(r0 >= 0.0) || !r0.is_finite() || !phi0.is_finite() {
            return Err(domain(format!("delta field needs finite r0 >= 0, got r0 = {r0}")));
        }
        Ok(Self::DeltaAmplitude { r0, phi0 })
    }

    pub fn gaussian(r0: f64, sigma: f64) -> Result<Self> {
        if !(r0 >= 0.0) || !r0.is_finite() {
            return Err(domain(format!("Gaussian field needs finite r0 >= 0, got {r0}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(domain(format!("Gaussian field needs sigma > 0, got {sigma}")));
        }
        Ok(Self::GaussianAmplitude { r0, sigma })
    }

    pub fn r0(&self) -> f64 {
        match *self {
            Self::DeltaAmplitude { r0, .. } | Self::GaussianAmplitude { r0, .. } => r0,
        }
    }

    /// Mean initial amplitude.
    pub fn center(&self) -> Complex64 {
        match *self {
            Self::DeltaAmplitude { r0, phi0 } => Complex64::from_polar(r0, -phi0),
            Self::GaussianAmplitude { r0, .. } => Complex64::new(r0, 0.0),
        }
    }

    /// No density matrix has this Wigner function: every delta, and
    /// Gaussians narrower than the vacuum.
    pub fn nonquantum_by_construction(&self) -> bool {
        match *self {
            Self::DeltaAmplitude { .. } => true,
            Self::GaussianAmplitude { sigma, .. } => sigma < 1.0,
        }
    }

    pub fn mean_intensity(&self, rule: MeanIntensity) -> f64 {
        match (*self, rule) {
            (Self::DeltaAmplitude { r0, .. }, _) | (Self::GaussianAmplitude { r0, .. }, MeanIntensity::CenterOnly) => r0 * r0,
            (Self::GaussianAmplitude { r0, sigma }, MeanIntensity::WithWidth) => r0 * r0 + sigma * sigma / 2.0,
        }
    }

    pub fn initial_wigner(&self) -> Result<PhaseSpaceFunction> {
        match *self {
            Self::DeltaAmplitude { .. } => Err(Error::AnalyticPathRequired("a delta field has no Wigner density")),
            Self::GaussianAmplitude { r0, sigma } => gaussian_wigner(Complex64::new(r0, 0.0), sigma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridState {
    pub atom: SpinHalfState,
    pub field: FieldState,
    pub chi: f64,
    pub t: f64,
}

impl HybridState {
    pub fn new(atom: SpinHalfState, field: FieldState, chi: f64, t: f64) -> Result<Self> {
        if !chi.is_finite() {
            return Err(domain("coupling must be finite"));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(domain(format!("time must be finite and >= 0, got {t}")));
        }
        Ok(Self { atom, field, chi, t })
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.atom, self.field, self.chi, t)
    }

    pub fn chi_t(&self) -> f64 {
        self.chi * self.t
    }

    /// κ = √3χt, the largest field phase shift.
    pub fn kappa(&self) -> f64 {
        SQRT3 * self.chi * self.t
    }
}

/// A point of the joint phase space (r, φ_field, θ, φ_atom).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridPoint {
    pub r: f64,
    pub phi_field: f64,
    pub theta: f64,
    pub phi_atom: f64,
}

impl HybridPoint {
    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.r, -self.phi_field)
    }
}

/// Exact solution of the dispersive flow over time `t`.
pub fn flow_map(p: HybridPoint, chi: f64, t: f64) -> HybridPoint {
    HybridPoint {
        r: p.r,
        phi_field: p.phi_field + SQRT3 * chi * t * p.theta.cos(),
        theta: p.theta,
        phi_atom: p.phi_atom + 2.0 * chi * p.r * p.r * t,
    }
}

/// Evolved joint distribution W_t(Ω, α) for a Gaussian field.
#[derive(Debug, Clone)]
pub struct JointWigner {
    atom: SphereFunction,
    field: PhaseSpaceFunction,
    chi: f64,
    t: f64,
}

impl JointWigner {
    /// W_q(θ, φ_atom − 2χr²t) W_c(r, φ − √3χt cosθ).
    pub fn evaluate(&self, omega: &BlochPoint, alpha: Complex64) -> Result<f64> {
        self.evaluate_angles(omega.theta(), omega.phi(), alpha)
    }

    pub fn evaluate_angles(&self, theta: f64, phi_atom: f64, alpha: Complex64) -> Result<f64> {
        let shift = 2.0 * self.chi * alpha.norm_sqr() * self.t;
        let back = Complex64::from_polar(1.0, SQRT3 * self.chi * self.t * theta.cos());
        Ok(self.atom.evaluate_angles(theta, phi_atom - shift) * self.field.evaluate(alpha * back)?)
    }
}

pub fn joint_wigner(state: &HybridState) -> Result<JointWigner> {
    Ok(JointWigner {
        atom: spin_wigner(&state.atom),
        field: state.field.initial_wigner()?,
        chi: state.chi,
        t: state.t,
    })
}

/// Interior points of [−1, 1] where κu ≡ `phase` (mod 2π), padded by a few
/// multiples of `width` (in phase units); used to seed quadrature panels
/// around narrow rotated peaks.
fn rotation_breaks(phase: f64, kappa: f64, width: f64) -> Vec<f64> {
    let k = kappa.abs();
    if k == 0.0 || !(width / k < 0.25) {
        return Vec::new();
    }
    let p = phase * kappa.signum();
    let mut out = Vec::new();
    let n_lo = ((-k - p) / (2.0 * PI)).floor() as i64 - 1;
    let n_hi = ((k - p) / (2.0 * PI)).ceil() as i64 + 1;
    for n in n_lo..=n_hi {
        let centre = (p + 2.0 * PI * n as f64) / k;
        for d in [-8.0, -3.0, 0.0, 3.0, 8.0] {
            let u = centre + d * width / k;
            if u > -1.0 && u < 1.0 {
                out.push(u);
            }
        }
    }
    out
}

/// Weight on u = cosθ left after integrating the atom's azimuth out of W_q.
fn polar_weight(atom: &SpinHalfState, u: f64) -> f64 {
    (1.0 + SQRT3 * atom.bloch_vector()[2] * u) / 2.0
}

/// Field marginal W_t(α) of a Gaussian field.
pub fn field_marginal(state: &HybridState, spec: &IntegrationSpec) -> Result<PhaseSpaceFunction> {
    let FieldState::GaussianAmplitude { r0, sigma } = state.field else {
        return Err(Error::AnalyticPathRequired("field marginal of a delta field is a distribution on a circle"));
    };
    let wc = state.field.initial_wigner()?;
    let atom = state.atom;
    let kappa = state.kappa();
    let spec_c = *spec;
    let reach = (r0 * kappa.abs()).min(2.0 * r0);
    let scale = sigma + reach / spec.radial_cutoff_sigmas();
    Ok(PhaseSpaceFunction::new(
        format!("field marginal (kappa={kappa})"),
        Complex64::new(r0, 0.0),
        scale,
        move |alpha| {
            if kappa == 0.0 {
                return wc.evaluate(alpha);
            }
            let width = if alpha.norm() * r0 > 0.0 { sigma / (2.0 * (alpha.norm() * r0).sqrt()) } else { f64::INFINITY };
            let breaks = rotation_breaks(-alpha.arg(), kappa, width);
            let r = adaptive(
                |u| Ok(polar_weight(&atom, u) * wc.evaluate(alpha * Complex64::from_polar(1.0, kappa * u))?),
                -1.0,
                1.0,
                &breaks,
                &spec_c,
            )?;
            Ok(r.value)
        },
    ))
}

/// Atom state after averaging the precession rate over the field intensity:
/// the transverse Bloch component is multiplied by `factor`.
fn precessed(atom: &SpinHalfState, factor: Complex64) -> Result<SpinHalfState> {
    let [sx, sy, sz] = atom.bloch_vector();
    let transverse = Complex64::new(sx, -sy) * factor;
    SpinHalfState::new([transverse.re, -transverse.im, sz])
}

/// ⟨e^{−2iχt|α|²}⟩ over the initial field distribution, by plane quadrature.
fn precession_factor(field: &FieldState, chi: f64, t: f64, spec: &IntegrationSpec) -> Result<Complex64> {
    let c = 2.0 * chi * t;
    match *field {
        FieldState::DeltaAmplitude { r0, .. } => Ok(Complex64::from_polar(1.0, -c * r0 * r0)),
        FieldState::GaussianAmplitude { r0, sigma } => {
            let wc = field.initial_wigner()?;
            let r = try_integrate_plane(
                |a| Ok(Complex64::from_polar(wc.evaluate(a)?, -c * a.norm_sqr())),
                Complex64::new(r0, 0.0),
                sigma,
                spec,
            )?;
            Ok(r.value)
        }
    }
}

/// Atomic marginal W_t(Ω). The field's back-reaction leaves it untouched;
/// only intensity-dependent precession survives.
pub fn atom_marginal(state: &HybridState, spec: &IntegrationSpec) -> Result<SphereFunction> {
    let factor = precession_factor(&state.field, state.chi, state.t, spec)?;
    Ok(spin_wigner(&precessed(&state.atom, factor)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StandardVariant {
    /// Atom precesses at the rate of each field realization, field frozen.
    #[default]
    FieldAveraged,
    /// Atom precesses at the rate set by the mean intensity ⟨r²⟩.
    MeanField(MeanIntensity),
}

/// Atomic Wigner function of the standard semiclassical model (no
/// back-reaction on the field).
pub fn semiclassical_standard(
    atom: &SpinHalfState,
    field: &FieldState,
    chi: f64,
    t: f64,
    variant: StandardVariant,
    spec: &IntegrationSpec,
) -> Result<SphereFunction> {
    let factor = match variant {
        StandardVariant::FieldAveraged => precession_factor(field, chi, t, spec)?,
        StandardVariant::MeanField(rule) => Complex64::from_polar(1.0, -2.0 * chi * field.mean_intensity(rule) * t),
    };
    Ok(spin_wigner(&precessed(atom, factor)?))
}

/// Density of the field phase.
#[derive(Clone)]
pub struct PhaseDensity {
    eval: Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>,
    support: (f64, f64),
    periodic: bool,
    label: String,
}

impl PhaseDensity {
    fn new(label: String, support: (f64, f64), periodic: bool, f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            support,
            periodic,
            label,
        }
    }

    /// Zero outside the support (or reduced into one period when periodic).
    pub fn density(&self, phi: f64) -> Result<f64> {
        let (a, b) = self.support;
        if self.periodic {
            let w = b - a;
            return (self.eval)(a + (phi - a).rem_euclid(w));
        }
        if phi < a || phi > b {
            return Ok(0.0);
        }
        (self.eval)(phi)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// ∫ φᵏ W(φ) dφ over the support (one period when periodic).
    pub fn moment(&self, k: i32, spec: &IntegrationSpec) -> Result<f64> {
        let (a, b) = self.support;
        Ok(adaptive(|phi| Ok(phi.powi(k) * (self.eval)(phi)?), a, b, &[], spec)?.value)
    }
}

impl fmt::Debug for PhaseDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseDensity")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("periodic", &self.periodic)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum PhaseDistribution {
    /// All weight at a single phase (χt = 0 with a delta field).
    Point { phase: f64 },
    Density(PhaseDensity),
}

impl PhaseDistribution {
    pub fn as_density(&self) -> Option<&PhaseDensity> {
        match self {
            Self::Density(d) => Some(d),
            Self::Point { .. } => None,
        }
    }
}

/// Evolved phase distribution of a delta field: the linear density
/// (1 + √3 s_z (φ−φ₀)/κ)/(2|κ|) on [φ₀ − |κ|, φ₀ + |κ|]. For the ground
/// state this goes negative on (φ₀ + χt, φ₀ + √3χt].
pub fn phase_distribution_delta(atom: &SpinHalfState, chi_t: f64, phi0: f64) -> PhaseDistribution {
    let kappa = SQRT3 * chi_t;
    if kappa == 0.0 {
        return PhaseDistribution::Point { phase: phi0 };
    }
    let sz = atom.bloch_vector()[2];
    let k = kappa.abs();
    PhaseDistribution::Density(PhaseDensity::new(
        format!("delta-field phase (chi_t={chi_t})"),
        (phi0 - k, phi0 + k),
        false,
        move |phi| Ok((1.0 + SQRT3 * sz * (phi - phi0) / kappa) / (2.0 * k)),
    ))
}

/// Closed-form (⟨φ⟩ − φ₀, Δφ²) of [`phase_distribution_delta`]:
/// (s_z χt, (1 − s_z²)(χt)²).
pub fn delta_phase_moments(atom: &SpinHalfState, chi_t: f64) -> (f64, f64) {
    let sz = atom.bloch_vector()[2];
    (sz * chi_t, (1.0 - sz * sz) * chi_t * chi_t)
}

/// Phase distribution of an evolved Gaussian field, over one period [−π, π):
///
/// W_t(φ) = ∫ r dr ∫ du (1 + √3 s_z u)/2 · (2/(πσ²)) e^{−2(r−r₀)²/σ²} e^{−(8rr₀/σ²) sin²((φ − κu)/2)}.
pub fn phase_distribution_gaussian(
    atom: &SpinHalfState,
    field: &FieldState,
    chi_t: f64,
    spec: &IntegrationSpec,
) -> Result<PhaseDistribution> {
    let FieldState::GaussianAmplitude { r0, sigma } = *field else {
        return Err(domain("phase_distribution_gaussian needs a Gaussian field"));
    };
    if !(chi_t >= 0.0) {
        return Err(domain("chi_t must be >= 0"));
    }
    let atom = *atom;
    let kappa = SQRT3 * chi_t;
    let spec = *spec;
    let (s2, cut) = (sigma * sigma, spec.radial_cutoff_sigmas());
    let (r_lo, r_hi) = ((r0 - cut * sigma).max(0.0), r0 + cut * sigma);
    let kernel = move |psi: f64| -> Result<f64> {
        let s = (psi / 2.0).sin();
        let sin2 = s * s;
        let r = adaptive(
            |r: f64| Ok(r * (-2.0 * (r - r0) * (r - r0) / s2 - 8.0 * r * r0 * sin2 / s2).exp()),
            r_lo,
            r_hi,
            &[r0],
            &spec,
        )?;
        Ok(2.0 / (PI * s2) * r.value)
    };
    let width = if r0 > 0.0 { sigma / (2.0 * r0) } else { f64::INFINITY };
    Ok(PhaseDistribution::Density(PhaseDensity::new(
        format!("gaussian-field phase (chi_t={chi_t}, r0={r0}, sigma={sigma})"),
        (-PI, PI),
        true,
        move |phi| {
            if kappa == 0.0 {
                return kernel(phi);
            }
            let breaks = rotation_breaks(phi, kappa, width);
            Ok(adaptive(|u| Ok(polar_weight(&atom, u) * kernel(phi - kappa * u)?), -1.0, 1.0, &breaks, &spec)?.value)
        },
    )))
}

/// Y-quadrature statistics of the evolved field,
///
/// p(y) = (1/√(2πσ²)) ∫ du (1 + √3 s_z u) e^{−2[y + r₀ sin(κu)]²/σ²}.
#[derive(Debug, Clone)]
pub struct QuadratureDistribution {
    atom: SpinHalfState,
    r0: f64,
    sigma: f64,
    kappa: f64,
    spec: IntegrationSpec,
}

impl QuadratureDistribution {
    /// u-values where the Gaussian factor peaks, sin(κu) = −y/r₀.
    fn peaks(&self, y: f64) -> Vec<f64> {
        if self.r0 == 0.0 || self.kappa == 0.0 || (y / self.r0).abs() > 1.0 {
            return Vec::new();
        }
        let a = (-y / self.r0).asin();
        let width = self.sigma / (2.0 * self.r0);
        let mut out = rotation_breaks(a, self.kappa, width);
        out.extend(rotation_breaks(PI - a, self.kappa, width));
        out
    }

    pub fn density(&self, y: f64) -> Result<f64> {
        let s2 = self.sigma * self.sigma;
        let sz = self.atom.bloch_vector()[2];
        let r = adaptive(
            |u: f64| {
                let d = y + self.r0 * (self.kappa * u).sin();
                Ok((1.0 + SQRT3 * sz * u) * (-2.0 * d * d / s2).exp())
            },
            -1.0,
            1.0,
            &self.peaks(y),
            &self.spec,
        )?;
        Ok(r.value / (2.0 * PI * s2).sqrt())
    }

    /// ∫ₐᵇ p(y) dy.
    pub fn probability(&self, a: f64, b: f64) -> Result<f64> {
        Ok(adaptive(|y| self.density(y), a, b, &[], &self.spec)?.value)
    }

    /// Range of y outside which p is negligible.
    pub fn support_hint(&self) -> (f64, f64) {
        let reach = self.r0 + self.spec.radial_cutoff_sigmas() * self.sigma;
        (-reach, reach)
    }
}

pub fn quadrature_distribution(
    atom: &SpinHalfState,
    field: &FieldState,
    chi_t: f64,
    spec: &IntegrationSpec,
) -> Result<QuadratureDistribution> {
    let FieldState::GaussianAmplitude { r0, sigma } = *field else {
        return Err(domain("quadrature_distribution needs a Gaussian field"));
    };
    Ok(QuadratureDistribution {
        atom: *atom,
        r0,
        sigma,
        kappa: SQRT3 * chi_t,
        spec: *spec,
    })
}

/// Atomic factor of a product observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomFactor {
    Identity,
    SigmaZ,
    SigmaMinus,
}

/// Field factor of a product observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldFactor {
    Identity,
    A,
    ADag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableSymbol {
    A,
    ADag,
    SigmaZ,
    SigmaMinus,
    SigmaMinusADag,
    SigmaZA,
}

impl ObservableSymbol {
    pub const ALL: [ObservableSymbol; 6] = [
        Self::A,
        Self::ADag,
        Self::SigmaZ,
        Self::SigmaMinus,
        Self::SigmaMinusADag,
        Self::SigmaZA,
    ];

    pub fn factors(self) -> (AtomFactor, FieldFactor) {
        match self {
            Self::A => (AtomFactor::Identity, FieldFactor::A),
            Self::ADag => (AtomFactor::Identity, FieldFactor::ADag),
            Self::SigmaZ => (AtomFactor::SigmaZ, FieldFactor::Identity),
            Self::SigmaMinus => (AtomFactor::SigmaMinus, FieldFactor::Identity),
            Self::SigmaMinusADag => (AtomFactor::SigmaMinus, FieldFactor::ADag),
            Self::SigmaZA => (AtomFactor::SigmaZ, FieldFactor::A),
        }
    }

    pub fn from_factors(atom: AtomFactor, field: FieldFactor) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.factors() == (atom, field))
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::A => "a",
            Self::ADag => "adag",
            Self::SigmaZ => "sz",
            Self::SigmaMinus => "sm",
            Self::SigmaMinusADag => "sm_adag",
            Self::SigmaZA => "sz_a",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Weyl symbol on (Ω, α): σ_z ↦ √3 cosθ, σ_− ↦ (√3/2) sinθ e^{−iφ},
    /// a ↦ α, a† ↦ α*; cross-sector products multiply.
    pub fn symbol(self, theta: f64, phi_atom: f64, alpha: Complex64) -> Complex64 {
        let (a, f) = self.factors();
        atom_symbol(a, theta, phi_atom) * field_symbol(f, alpha)
    }
}

impl fmt::Display for ObservableSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn atom_symbol(a: AtomFactor, theta: f64, phi: f64) -> Complex64 {
    match a {
        AtomFactor::Identity => Complex64::new(1.0, 0.0),
        AtomFactor::SigmaZ => Complex64::new(SQRT3 * theta.cos(), 0.0),
        AtomFactor::SigmaMinus => Complex64::from_polar(SQRT3 / 2.0 * theta.sin(), -phi),
    }
}

fn field_symbol(f: FieldFactor, alpha: Complex64) -> Complex64 {
    match f {
        FieldFactor::Identity => Complex64::new(1.0, 0.0),
        FieldFactor::A => alpha,
        FieldFactor::ADag => alpha.conj(),
    }
}

/// ∫_{−1}^{1} uᵏ e^{iqu} du for k ≤ 2.
pub(crate) fn u_moment(k: u32, q: f64) -> Complex64 {
    if q.abs() < 0.5 {
        // Taylor series; avoids cancellation in the closed forms
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..40u32 {
            if n > 0 {
                term *= Complex64::new(0.0, q) / f64::from(n);
            }
            let j = n + k;
            if j % 2 == 0 {
                sum += term * (2.0 / f64::from(j + 1));
            }
        }
        return sum;
    }
    let (s, c) = q.sin_cos();
    match k {
        0 => Complex64::new(2.0 * s / q, 0.0),
        1 => Complex64::new(0.0, 2.0 * (s - q * c) / (q * q)),
        2 => Complex64::new(2.0 * ((q * q - 2.0) * s + 2.0 * q * c) / (q * q * q), 0.0),
        _ => unreachable!("u_moment only needs k <= 2"),
    }
}

/// ∫ du w_g(u) e^{iqu} for the polar weight attached to atomic factor g.
fn angular_integral(atom: &SpinHalfState, g: AtomFactor, q: f64) -> Complex64 {
    let [sx, sy, sz] = atom.bloch_vector();
    match g {
        AtomFactor::Identity => (u_moment(0, q) + u_moment(1, q) * (SQRT3 * sz)) / 2.0,
        AtomFactor::SigmaZ => (u_moment(1, q) * SQRT3 + u_moment(2, q) * (3.0 * sz)) / 2.0,
        AtomFactor::SigmaMinus => Complex64::new(sx, -sy) * (u_moment(0, q) - u_moment(2, q)) * (3.0 / 8.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Model {
    Hybrid,
    Standard(StandardVariant),
}

fn closed_form(state: &HybridState, g: AtomFactor, f: FieldFactor, model: Model) -> Complex64 {
    let center = state.field.center();
    let f0 = field_symbol(f, center);
    let c = 2.0 * state.chi * state.t;
    // field average, including the intensity-dependent precession for σ_−
    let field_avg = match (g, model) {
        (AtomFactor::SigmaMinus, Model::Standard(StandardVariant::MeanField(rule))) => {
            f0 * Complex64::from_polar(1.0, -c * state.field.mean_intensity(rule))
        }
        (AtomFactor::SigmaMinus, _) => match state.field {
            FieldState::DeltaAmplitude { r0, .. } => f0 * Complex64::from_polar(1.0, -c * r0 * r0),
            FieldState::GaussianAmplitude { sigma, .. } => {
                let d = Complex64::new(1.0, state.chi * sigma * sigma * state.t);
                let g0 = (Complex64::new(0.0, -c * center.norm_sqr()) / d).exp() / d;
                match f {
                    FieldFactor::Identity => g0,
                    _ => g0 * f0 / d,
                }
            }
        },
        _ => f0,
    };
    let q = match (model, f) {
        (Model::Standard(_), _) | (_, FieldFactor::Identity) => 0.0,
        (Model::Hybrid, FieldFactor::A) => -state.kappa(),
        (Model::Hybrid, FieldFactor::ADag) => state.kappa(),
    };
    field_avg * angular_integral(&state.atom, g, q)
}

/// Phase-space average of the observable's Weyl symbol over the evolved
/// joint distribution, from closed forms (valid for delta and Gaussian
/// fields and any Bloch vector).
pub fn hybrid_expectation(state: &HybridState, obs: ObservableSymbol) -> Complex64 {
    let (g, f) = obs.factors();
    closed_form(state, g, f, Model::Hybrid)
}

/// Same averages in the standard semiclassical model, where the field does
/// not evolve.
pub fn standard_expectation(state: &HybridState, obs: ObservableSymbol, variant: StandardVariant) -> Complex64 {
    let (g, f) = obs.factors();
    closed_form(state, g, f, Model::Standard(variant))
}

pub(crate) fn split_cross_sector(a: ObservableSymbol, b: ObservableSymbol) -> Result<(AtomFactor, FieldFactor)> {
    match (a.factors(), b.factors()) {
        ((g, FieldFactor::Identity), (AtomFactor::Identity, f)) if g != AtomFactor::Identity && f != FieldFactor::Identity => {
            Ok((g, f))
        }
        _ => Err(domain(format!(
            "correlation needs an atomic observable and a field observable, got {a} and {b}"
        ))),
    }
}

fn correlation_with(state: &HybridState, a: ObservableSymbol, b: ObservableSymbol, model: Model) -> Result<Complex64> {
    let (g, f) = split_cross_sector(a, b)?;
    let joint = closed_form(state, g, f, model);
    let ea = closed_form(state, g, FieldFactor::Identity, model);
    let eb = closed_form(state, AtomFactor::Identity, f, model);
    Ok(joint - ea * eb)
}

/// ⟨AB⟩ − ⟨A⟩⟨B⟩ for an atomic `a` and a field `b`.
pub fn correlation(state: &HybridState, a: ObservableSymbol, b: ObservableSymbol) -> Result<Complex64> {
    correlation_with(state, a, b, Model::Hybrid)
}

pub fn standard_correlation(
    state: &HybridState,
    a: ObservableSymbol,
    b: ObservableSymbol,
    variant: StandardVariant,
) -> Result<Complex64> {
    correlation_with(state, a, b, Model::Standard(variant))
}

/// Averages obtained by integrating the evolved joint density directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAverages {
    pub mass: f64,
    pub values: [(ObservableSymbol, Complex64); 6],
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl JointAverages {
    pub fn get(&self, obs: ObservableSymbol) -> Complex64 {
        self.values.iter().find(|(s, _)| *s == obs).map(|(_, v)| *v).expect("all symbols present")
    }
}

/// Normalization and all six symbol averages of W_t(Ω, α), by quadrature
/// over (θ, r) with the two azimuths innermost. W_q depends on the field only
/// through r, so its azimuthal integral is taken once per (θ, r).
pub fn joint_average(state: &HybridState, spec: &IntegrationSpec) -> Result<JointAverages> {
    let joint = joint_wigner(state)?;
    let (r0, sigma) = match state.field {
        FieldState::GaussianAmplitude { r0, sigma } => (r0, sigma),
        FieldState::DeltaAmplitude { .. } => unreachable!("joint_wigner rejects delta fields"),
    };
    let zero = Complex64::new(0.0, 0.0);
    let r_max = r0 + spec.radial_cutoff_sigmas() * sigma;
    let mut inner_evals = 0usize;
    let res = adaptive(
        |theta: f64| {
            let back = Complex64::from_polar(1.0, state.kappa() * theta.cos());
            let r_res = adaptive(
                |r: f64| {
                    let shift = 2.0 * joint.chi * r * r * joint.t;
                    let atom = periodic(
                        |pa| {
                            let w = joint.atom.evaluate_angles(theta, pa - shift);
                            Ok([
                                Complex64::new(w, 0.0),
                                atom_symbol(AtomFactor::SigmaZ, theta, pa) * w,
                                atom_symbol(AtomFactor::SigmaMinus, theta, pa) * w,
                            ])
                        },
                        0.0,
                        2.0 * PI,
                        spec,
                    )?;
                    let field = periodic(
                        |pf| {
                            let alpha = Complex64::from_polar(r, pf);
                            let w = joint.field.evaluate(alpha * back)?;
                            Ok([Complex64::new(w, 0.0), alpha * w, alpha.conj() * w])
                        },
                        0.0,
                        2.0 * PI,
                        spec,
                    )?;
                    inner_evals += atom.evaluations + field.evaluations;
                    let (a, f) = (atom.value, field.value);
                    let w = r * theta.sin();
                    Ok([
                        a[0] * f[0] * w,
                        a[0] * f[1] * w,
                        a[0] * f[2] * w,
                        a[1] * f[0] * w,
                        a[2] * f[0] * w,
                        a[2] * f[2] * w,
                        a[1] * f[1] * w,
                    ])
                },
                0.0,
                r_max,
                &[r0],
                spec,
            )?;
            Ok(r_res.value)
        },
        0.0,
        PI,
        &[],
        spec,
    )?;
    let v = res.value;
    let mut values = [(ObservableSymbol::A, zero); 6];
    for (k, s) in ObservableSymbol::ALL.iter().enumerate() {
        values[k] = (*s, v[k + 1]);
    }
    Ok(JointAverages {
        mass: v[0].re,
        values,
        error_estimate: res.error_estimate,
        evaluations: inner_evals,
    })
}

/// Weight P(δ) of the rotated coherent states |α₀e^{−iδ}⟩ making up the
/// field: the azimuth-integrated atomic Wigner function under δ = κ cosθ.
pub fn atomic_pfunction(atom: &SpinHalfState, chi_t: f64, spec: &IntegrationSpec) -> PhaseDistribution {
    let kappa = SQRT3 * chi_t;
    if kappa == 0.0 {
        return PhaseDistribution::Point { phase: 0.0 };
    }
    let w = spin_wigner(atom);
    let spec = *spec;
    let k = kappa.abs();
    PhaseDistribution::Density(PhaseDensity::new(
        format!("atomic P-function (chi_t={chi_t})"),
        (-k, k),
        false,
        move |delta| {
            let theta = (delta / kappa).clamp(-1.0, 1.0).acos();
            // dΩ = dφ du and du = dδ/|κ|
            let r = adaptive(|phi| Ok(w.evaluate_angles(theta, phi)), 0.0, 2.0 * PI, &[], &spec)?;
            Ok(r.value / k)
        },
    ))
}

/// Field moment of ρ = ∫ dδ P(δ) |α₀e^{−iδ}⟩⟨α₀e^{−iδ}|, i.e. ∫ P(δ) f(α₀e^{−iδ}) dδ.
pub fn pfunction_field_moment(
    p: &PhaseDensity,
    alpha0: Complex64,
    obs: ObservableSymbol,
    spec: &IntegrationSpec,
) -> Result<Complex64> {
    let (g, f) = obs.factors();
    if g != AtomFactor::Identity {
        return Err(Error::UnsupportedSymbol(format!("{obs} is not a field observable")));
    }
    let (a, b) = p.support();
    let r = adaptive(
        |delta| Ok(field_symbol(f, alpha0 * Complex64::from_polar(1.0, -delta)) * p.density(delta)?),
        a,
        b,
        &[],
        spec,
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartesian_wigner::quadrature_marginal;
    use crate::quadrature::{integrate_interval, try_integrate_sphere};

    fn spec() -> IntegrationSpec {
        IntegrationSpec::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sinc(x: f64) -> f64 {
        if x == 0.0 {
            1.0
        } else {
            x.sin() / x
        }
    }

    #[test]
    fn flow_map_examples() {
        let p = HybridPoint { r: 1.3, phi_field: 0.2, theta: 0.0, phi_atom: 1.0 };
        assert_eq!(flow_map(p, 2.0, 0.0), p);
        let q = flow_map(p, 1.0, 1.0);
        assert!((q.phi_field - (0.2 + SQRT3)).abs() < 1e-15);
        assert!((q.phi_atom - (1.0 + 2.0 * 1.69)).abs() < 1e-15);
        assert_eq!((q.r, q.theta), (p.r, p.theta));
        let eq = flow_map(HybridPoint { theta: PI / 2.0, ..p }, 3.0, 2.0);
        assert!((eq.phi_field - p.phi_field).abs() < 1e-14);
    }

    #[test]
    fn u_moment_series_matches_closed_form() {
        for q in [0.49, 0.5, -0.51] {
            for k in 0..3 {
                let direct = integrate_interval(|u: f64| Complex64::from_polar(u.powi(k as i32), q * u), -1.0, 1.0, &spec())
                    .unwrap()
                    .value;
                assert!((u_moment(k, q) - direct).norm() < 1e-14, "k={k} q={q}");
            }
        }
        for q in [0.0, 0.1, 3.0, -7.0] {
            for k in 0..3 {
                let direct = integrate_interval(|u: f64| Complex64::from_polar(u.powi(k as i32), q * u), -1.0, 1.0, &spec())
                    .unwrap()
                    .value;
                assert!((u_moment(k, q) - direct).norm() < 1e-13, "k={k} q={q}");
            }
        }
    }

    #[test]
    fn joint_wigner_at_t0_is_product() {
        let field = FieldState::gaussian(1.5, 0.8).unwrap();
        let s = HybridState::new(SpinHalfState::phase(), field, 1.0, 0.0).unwrap();
        let j = joint_wigner(&s).unwrap();
        let wq = spin_wigner(&SpinHalfState::phase());
        let wc = field.initial_wigner().unwrap();
        let p = BlochPoint::new(0.8, 2.0).unwrap();
        for a in [c(1.0, 0.2), c(2.0, -0.5)] {
            let expect = wq.evaluate(&p) * wc.evaluate(a).unwrap();
            assert!((j.evaluate(&p, a).unwrap() - expect).abs() < 1e-16);
        }
    }

    #[test]
    fn joint_wigner_negative_near_north_pole() {
        let s = HybridState::new(SpinHalfState::ground(), FieldState::gaussian(2.0, 1.0).unwrap(), 1.0, 0.7).unwrap();
        let j = joint_wigner(&s).unwrap();
        let north = BlochPoint::new(0.0, 0.0).unwrap();
        for a in [c(2.0, 0.0), c(1.0, 1.0), c(-0.3, 0.2)] {
            assert!(j.evaluate(&north, a).unwrap() < 0.0);
        }
    }

    #[test]
    fn delta_field_has_no_joint_density() {
        let s = HybridState::new(SpinHalfState::ground(), FieldState::delta(1.0, 0.0).unwrap(), 1.0, 0.5).unwrap();
        assert!(matches!(joint_wigner(&s), Err(Error::AnalyticPathRequired(_))));
        assert!(matches!(field_marginal(&s, &spec()), Err(Error::AnalyticPathRequired(_))));
    }

    #[test]
    fn field_marginal_examples() {
        let field = FieldState::gaussian(1.0, 1.0).unwrap();
        let s0 = HybridState::new(SpinHalfState::ground(), field, 1.0, 0.0).unwrap();
        let m0 = field_marginal(&s0, &spec()).unwrap();
        let wc = field.initial_wigner().unwrap();
        for a in [c(0.3, 0.1), c(1.7, -0.9)] {
            assert!((m0.evaluate(a).unwrap() - wc.evaluate(a).unwrap()).abs() < 1e-10);
        }
        for t in [0.4, 1.3] {
            let m = field_marginal(&s0.at_time(t).unwrap(), &spec()).unwrap();
            assert!((m.integral(&spec()).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn field_marginal_matches_sphere_integral_of_joint() {
        let s = HybridState::new(SpinHalfState::new([0.3, 0.4, -0.7]).unwrap(), FieldState::gaussian(1.2, 0.9).unwrap(), 1.0, 0.8)
            .unwrap();
        let j = joint_wigner(&s).unwrap();
        let m = field_marginal(&s, &spec()).unwrap();
        for a in [c(1.0, 0.3), c(0.2, -1.1)] {
            let direct = try_integrate_sphere(|p| j.evaluate(p, a), &spec()).unwrap().value;
            assert!((m.evaluate(a).unwrap() - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn field_marginal_phase_profile_matches_phase_distribution() {
        // √3χt = 1, r₀ = 10, σ = 1: integrate the marginal along a ray and
        // compare with the (u, r) quadrature of the phase density
        let spec = spec();
        let field = FieldState::gaussian(10.0, 1.0).unwrap();
        let chi = 1.0 / SQRT3;
        let s = HybridState::new(SpinHalfState::ground(), field, chi, 1.0).unwrap();
        let m = field_marginal(&s, &spec).unwrap();
        let pd = phase_distribution_gaussian(&SpinHalfState::ground(), &field, s.chi_t(), &spec).unwrap();
        let pd = pd.as_density().unwrap();
        for phi in [-0.6, 0.2, 0.95] {
            let ray = adaptive(|r: f64| Ok(r * m.evaluate(Complex64::from_polar(r, -phi))?), 0.0, 20.0, &[10.0], &spec)
                .unwrap()
                .value;
            assert!((ray - pd.density(phi).unwrap()).abs() < 1e-8, "φ={phi}");
        }
    }

    #[test]
    fn atom_marginal_examples() {
        let spec = spec();
        let delta = FieldState::delta(1.7, 0.3).unwrap();
        let g = spin_wigner(&SpinHalfState::ground());
        for t in [0.0, 0.4, 3.0] {
            let s = HybridState::new(SpinHalfState::ground(), delta, 1.0, t).unwrap();
            let m = atom_marginal(&s, &spec).unwrap();
            for (th, ph) in [(0.1, 0.2), (1.2, 4.0), (3.0, 1.0)] {
                assert!((m.evaluate_angles(th, ph) - g.evaluate_angles(th, ph)).abs() < 1e-10);
            }
        }
        // phase state: rotated by 2χr₀²t
        let (r0, chi, t) = (1.7, 0.6, 0.9);
        let s = HybridState::new(SpinHalfState::phase(), FieldState::delta(r0, 0.0).unwrap(), chi, t).unwrap();
        let m = atom_marginal(&s, &spec).unwrap();
        let w = spin_wigner(&SpinHalfState::phase());
        for (th, ph) in [(0.5, 0.2), (2.0, 5.0)] {
            let expect = w.evaluate_angles(th, ph - 2.0 * chi * r0 * r0 * t);
            assert!((m.evaluate_angles(th, ph) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn atom_marginal_matches_plane_integral_of_joint() {
        let spec = spec();
        let field = FieldState::gaussian(0.8, 1.0).unwrap();
        let s = HybridState::new(SpinHalfState::new([0.6, -0.2, 0.5]).unwrap(), field, 1.0, 0.7).unwrap();
        let j = joint_wigner(&s).unwrap();
        let m = atom_marginal(&s, &spec).unwrap();
        for (th, ph) in [(0.4, 0.3), (2.2, 3.5)] {
            let direct = try_integrate_plane(|a| j.evaluate_angles(th, ph, a), c(0.0, 0.0), 0.2 + 1.0, &spec).unwrap().value;
            assert!((m.evaluate_angles(th, ph) - direct).abs() < 1e-10, "{} vs {direct}", m.evaluate_angles(th, ph));
        }
        let back = crate::su2_wigner::wigner_to_spin(&m, &spec).unwrap();
        assert!((back.bloch_vector()[2] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn phase_distribution_delta_examples() {
        let ct = 0.8;
        let k = SQRT3 * ct;
        let PhaseDistribution::Density(d) = phase_distribution_delta(&SpinHalfState::ground(), ct, 0.0) else {
            panic!("expected density")
        };
        assert!((d.density(k).unwrap() - (1.0 - SQRT3) / (2.0 * k)).abs() < 1e-15);
        assert!(d.density(k).unwrap() < 0.0);
        assert_eq!(d.density(k + 1e-9).unwrap(), 0.0);
        assert_eq!(d.support(), (-k, k));
        let (mean, var) = delta_phase_moments(&SpinHalfState::ground(), ct);
        assert!((mean + ct).abs() < 1e-15 && var.abs() < 1e-15);
        let PhaseDistribution::Density(u) = phase_distribution_delta(&SpinHalfState::phase(), ct, 0.0) else {
            panic!("expected density")
        };
        for phi in [-1.0, 0.0, 1.3] {
            assert!((u.density(phi).unwrap() - 1.0 / (2.0 * k)).abs() < 1e-15);
        }
        assert!(matches!(phase_distribution_delta(&SpinHalfState::ground(), 0.0, 0.4), PhaseDistribution::Point { phase } if phase == 0.4));
    }

    #[test]
    fn phase_distribution_delta_matches_cdf_quadrature() {
        // P(φ ≤ x) = ∫_{−1}^{x/κ} (1 + √3 s_z u)/2 du, an independent route
        let atom = SpinHalfState::new([0.1, 0.0, -0.8]).unwrap();
        let ct = 1.3;
        let k = SQRT3 * ct;
        let d = phase_distribution_delta(&atom, ct, 0.0);
        let d = d.as_density().unwrap();
        let cdf = |x: f64| integrate_interval(|u| polar_weight(&atom, u), -1.0, x / k, &spec()).unwrap().value;
        for (a, b) in [(-k, -1.0), (-0.5, 0.7), (1.0, k)] {
            let direct = adaptive(|p| d.density(p), a, b, &[], &spec()).unwrap().value;
            assert!((direct - (cdf(b) - cdf(a))).abs() < 1e-12);
        }
        assert!((d.moment(0, &spec()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_distribution_gaussian_examples() {
        let spec = spec();
        let field = FieldState::gaussian(10.0, 1.0).unwrap();
        let ground = SpinHalfState::ground();
        let d0 = phase_distribution_gaussian(&ground, &field, 0.0, &spec).unwrap();
        let d0 = d0.as_density().unwrap();
        assert!(d0.density(0.0).unwrap() > d0.density(0.05).unwrap());
        assert!((d0.moment(0, &spec).unwrap() - 1.0).abs() < 1e-8);
        let d1 = phase_distribution_gaussian(&ground, &field, 1.0 / SQRT3, &spec).unwrap();
        let d1 = d1.as_density().unwrap();
        let min = (0..201).map(|k| d1.density(-PI + 2.0 * PI * k as f64 / 200.0).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(min < -1e-3, "min = {min}");
        assert!((d1.moment(0, &spec).unwrap() - 1.0).abs() < 1e-8);
        // periodic
        assert!((d1.density(0.4).unwrap() - d1.density(0.4 + 2.0 * PI).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn phase_distribution_gaussian_narrow_limit() {
        let spec = spec();
        let field = FieldState::gaussian(10.0, 1e-3).unwrap();
        let ct = 1.0 / SQRT3;
        for atom in [SpinHalfState::ground(), SpinHalfState::phase()] {
            let g = phase_distribution_gaussian(&atom, &field, ct, &spec).unwrap();
            let d = phase_distribution_delta(&atom, ct, 0.0);
            for phi in [-0.9, -0.3, 0.0, 0.5, 0.95] {
                let a = g.as_density().unwrap().density(phi).unwrap();
                let b = d.as_density().unwrap().density(phi).unwrap();
                assert!((a - b).abs() < 1e-3, "φ={phi}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn quadrature_distribution_examples() {
        let spec = spec();
        let field = FieldState::gaussian(10.0, 1.0).unwrap();
        let p0 = quadrature_distribution(&SpinHalfState::ground(), &field, 0.0, &spec).unwrap();
        for y in [0.0_f64, 0.4, -0.9] {
            let expect = (2.0 / PI).sqrt() * (-2.0 * y * y).exp();
            assert!((p0.density(y).unwrap() - expect).abs() < 1e-12);
        }
        let p = quadrature_distribution(&SpinHalfState::ground(), &field, 1.0 / SQRT3, &spec).unwrap();
        let (a, b) = p.support_hint();
        assert!((p.probability(a, b).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadrature_distribution_matches_marginal_route() {
        // Y statistics from the plane marginal, r₀ kept small so the 2D
        // quadrature stays cheap
        let spec = spec();
        let field = FieldState::gaussian(2.0, 1.0).unwrap();
        let s = HybridState::new(SpinHalfState::ground(), field, 1.0, 0.6).unwrap();
        let p = quadrature_distribution(&s.atom, &field, s.chi_t(), &spec).unwrap();
        let m = quadrature_marginal(&field_marginal(&s, &spec).unwrap(), PI / 2.0, &spec);
        for y in [-1.5, -0.2, 0.9] {
            assert!((p.density(y).unwrap() - m.density(y).unwrap()).abs() < 1e-9, "y={y}");
        }
    }

    #[test]
    fn expectation_examples_delta() {
        let r0 = 1.4;
        for ct in [0.3, 1.0, 4.2] {
            let s = HybridState::new(SpinHalfState::phase(), FieldState::delta(r0, 0.0).unwrap(), 1.0, ct).unwrap();
            let k = SQRT3 * ct;
            let adag = hybrid_expectation(&s, ObservableSymbol::ADag);
            assert!((adag - c(r0 * sinc(k), 0.0)).norm() < 1e-14);
            let sm = hybrid_expectation(&s, ObservableSymbol::SigmaMinus);
            let rot = Complex64::from_polar(1.0, -2.0 * r0 * r0 * ct);
            assert!((sm * SIGMA_MINUS_UNIT_SCALE - rot).norm() < 1e-14);
            let sma = hybrid_expectation(&s, ObservableSymbol::SigmaMinusADag);
            let quoted = rot / (ct * ct) * r0 * (sinc(k) - k.cos());
            assert!((sma * SIGMA_MINUS_UNIT_SCALE - quoted).norm() < 1e-12);
        }
        let s = HybridState::new(SpinHalfState::ground(), FieldState::delta(1.0, 0.0).unwrap(), 1.0, 2.0).unwrap();
        assert!((hybrid_expectation(&s, ObservableSymbol::SigmaZ) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn expectation_examples_gaussian() {
        let (r0, sigma, chi) = (1.0, 1.0, 1.0);
        for t in [0.1, 1.0, 2.5] {
            let s = HybridState::new(SpinHalfState::phase(), FieldState::gaussian(r0, sigma).unwrap(), chi, t).unwrap();
            let d = c(1.0, chi * sigma * sigma * t);
            let e = (c(0.0, -2.0 * chi * r0 * r0 * t) / d).exp();
            let k = SQRT3 * chi * t;
            let sm = hybrid_expectation(&s, ObservableSymbol::SigmaMinus) * SIGMA_MINUS_UNIT_SCALE;
            assert!((sm - e / d).norm() < 1e-14);
            let sma = hybrid_expectation(&s, ObservableSymbol::SigmaMinusADag) * SIGMA_MINUS_UNIT_SCALE;
            let quoted = e / (d * d * chi * chi * t * t) * r0 * (sinc(k) - k.cos());
            assert!((sma - quoted).norm() < 1e-13);
            let delta = s.field;
            let sd = HybridState { field: FieldState::delta(r0, 0.0).unwrap(), ..s };
            assert!((hybrid_expectation(&s, ObservableSymbol::ADag) - hybrid_expectation(&sd, ObservableSymbol::ADag)).norm() < 1e-14);
            let _ = delta;
        }
    }

    #[test]
    fn closed_forms_match_joint_quadrature() {
        let spec = IntegrationSpec::new(1e-9, 1e-11, 1 << 16, 10.0).unwrap();
        let s = HybridState::new(SpinHalfState::new([0.5, 0.3, -0.6]).unwrap(), FieldState::gaussian(0.7, 0.9).unwrap(), 0.8, 0.9)
            .unwrap();
        let avg = joint_average(&s, &spec).unwrap();
        assert!((avg.mass - 1.0).abs() < 1e-8);
        for obs in ObservableSymbol::ALL {
            let closed = hybrid_expectation(&s, obs);
            assert!((avg.get(obs) - closed).norm() < 1e-8, "{obs}: {} vs {closed}", avg.get(obs));
        }
    }

    #[test]
    fn correlation_examples() {
        let s = HybridState::new(SpinHalfState::ground(), FieldState::delta(1.0, 0.0).unwrap(), 1.0, 0.0).unwrap();
        assert!(correlation(&s, ObservableSymbol::SigmaZ, ObservableSymbol::A).unwrap().norm() < 1e-15);
        let s = s.at_time(0.7).unwrap();
        assert!(correlation(&s, ObservableSymbol::SigmaZ, ObservableSymbol::A).unwrap().norm() > 1e-3);
        assert!(correlation(&s, ObservableSymbol::A, ObservableSymbol::ADag).is_err());
        assert!(correlation(&s, ObservableSymbol::SigmaZ, ObservableSymbol::SigmaMinus).is_err());
        assert!(correlation(&s, ObservableSymbol::SigmaZA, ObservableSymbol::A).is_err());
        // the standard model keeps ground-state correlations at zero
        let z = standard_correlation(&s, ObservableSymbol::SigmaZ, ObservableSymbol::A, StandardVariant::FieldAveraged).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn correlation_ground_state_decays_like_inverse_time() {
        let base = HybridState::new(SpinHalfState::ground(), FieldState::delta(1.0, 0.0).unwrap(), 1.0, 0.0).unwrap();
        let corr = |t: f64| correlation(&base.at_time(t).unwrap(), ObservableSymbol::SigmaZ, ObservableSymbol::A).unwrap().norm();
        let envelope = (0..2000).map(|k| 20.0 + k as f64 * 0.1).map(|t| corr(t) * t).fold(0.0, f64::max);
        assert!(envelope < 2.0 / SQRT3 + 0.05, "{envelope}");
        assert!(envelope > 1.0);
    }

    #[test]
    fn correlation_phase_state_delta_field_decays_like_inverse_time() {
        // ⟨σ_−⟩ keeps unit modulus, so ⟨σ_−⟩⟨a†⟩ ~ sinc(κ) dominates
        let base = HybridState::new(SpinHalfState::phase(), FieldState::delta(1.0, 0.0).unwrap(), 1.0, 0.0).unwrap();
        let corr = |t: f64| correlation(&base.at_time(t).unwrap(), ObservableSymbol::SigmaMinus, ObservableSymbol::ADag).unwrap().norm();
        let envelope = (0..2000).map(|k| 20.0 + k as f64 * 0.1).map(|t| corr(t) * t).fold(0.0, f64::max);
        assert!((envelope - 0.5 / SQRT3).abs() < 0.02, "{envelope}");
    }

    #[test]
    fn semiclassical_standard_examples() {
        let spec = spec();
        let g = SpinHalfState::ground();
        let field = FieldState::gaussian(1.0, 1.0).unwrap();
        for variant in [StandardVariant::FieldAveraged, StandardVariant::MeanField(MeanIntensity::WithWidth)] {
            let w = semiclassical_standard(&g, &field, 1.0, 0.9, variant, &spec).unwrap();
            let w0 = spin_wigner(&g);
            assert!((w.evaluate_angles(0.7, 1.0) - w0.evaluate_angles(0.7, 1.0)).abs() < 1e-14);
        }
        let delta = FieldState::delta(1.3, 0.0).unwrap();
        let a = semiclassical_standard(&SpinHalfState::phase(), &delta, 0.7, 1.1, StandardVariant::FieldAveraged, &spec).unwrap();
        let b = semiclassical_standard(&SpinHalfState::phase(), &delta, 0.7, 1.1, StandardVariant::MeanField(MeanIntensity::WithWidth), &spec)
            .unwrap();
        assert_eq!(a.evaluate_angles(1.0, 2.0), b.evaluate_angles(1.0, 2.0));
        // mean-field shift 2χ(r₀² + σ²/2)t
        let (r0, sigma, chi, t) = (1.2, 0.8, 0.5, 1.7);
        let f = FieldState::gaussian(r0, sigma).unwrap();
        let mf = semiclassical_standard(&SpinHalfState::phase(), &f, chi, t, StandardVariant::MeanField(MeanIntensity::WithWidth), &spec)
            .unwrap();
        let shift = 2.0 * chi * (r0 * r0 + sigma * sigma / 2.0) * t;
        let w = spin_wigner(&SpinHalfState::phase());
        assert!((mf.evaluate_angles(1.0, 0.3) - w.evaluate_angles(1.0, 0.3 - shift)).abs() < 1e-14);
    }

    #[test]
    fn gaussian_intensity_second_moment() {
        // ⟨r²⟩ of the Gaussian by plane quadrature
        let f = FieldState::gaussian(1.2, 0.8).unwrap();
        let wc = f.initial_wigner().unwrap();
        let m2 = try_integrate_plane(|a| Ok(a.norm_sqr() * wc.evaluate(a)?), c(1.2, 0.0), 0.8, &spec()).unwrap().value;
        assert!((m2 - f.mean_intensity(MeanIntensity::WithWidth)).abs() < 1e-9);
    }

    #[test]
    fn field_averaged_standard_uses_gaussian_precession() {
        let spec = spec();
        let (r0, sigma, chi, t) = (0.9, 1.0, 0.7, 0.8);
        let f = FieldState::gaussian(r0, sigma).unwrap();
        let numeric = precession_factor(&f, chi, t, &spec).unwrap();
        let d = c(1.0, chi * sigma * sigma * t);
        let closed = (c(0.0, -2.0 * chi * r0 * r0 * t) / d).exp() / d;
        assert!((numeric - closed).norm() < 1e-10);
    }

    #[test]
    fn pfunction_examples() {
        let spec = spec();
        let ct = 0.9;
        let k = SQRT3 * ct;
        let p = atomic_pfunction(&SpinHalfState::ground(), ct, &spec);
        let p = p.as_density().unwrap();
        for delta in [-k, -0.3, 0.5, k] {
            let expect = (1.0 - delta / ct) / (2.0 * k);
            assert!((p.density(delta).unwrap() - expect).abs() < 1e-12);
        }
        assert!((p.moment(0, &spec).unwrap() - 1.0).abs() < 1e-12);
        let p = atomic_pfunction(&SpinHalfState::phase(), ct, &spec);
        assert!((p.as_density().unwrap().density(0.2).unwrap() - 1.0 / (2.0 * k)).abs() < 1e-12);
        assert!(matches!(atomic_pfunction(&SpinHalfState::phase(), 0.0, &spec), PhaseDistribution::Point { .. }));
    }

    #[test]
    fn pfunction_reconstructs_field_amplitude() {
        let spec = spec();
        let field = FieldState::gaussian(1.0, 1.0).unwrap();
        for atom in [SpinHalfState::ground(), SpinHalfState::phase()] {
            let s = HybridState::new(atom, field, 1.0, 1.3).unwrap();
            let p = atomic_pfunction(&atom, s.chi_t(), &spec);
            let m = pfunction_field_moment(p.as_density().unwrap(), field.center(), ObservableSymbol::ADag, &spec).unwrap();
            assert!((m - hybrid_expectation(&s, ObservableSymbol::ADag)).norm() < 1e-10);
        }
    }

    #[test]
    fn state_validation() {
        assert!(FieldState::delta(-1.0, 0.0).is_err());
        assert!(FieldState::gaussian(1.0, 0.0).is_err());
        assert!(HybridState::new(SpinHalfState::ground(), FieldState::delta(1.0, 0.0).unwrap(), 1.0, -0.1).is_err());
        assert!(FieldState::delta(1.0, 0.0).unwrap().nonquantum_by_construction());
        assert!(FieldState::gaussian(1.0, 0.5).unwrap().nonquantum_by_construction());
        assert!(!FieldState::gaussian(1.0, 1.0).unwrap().nonquantum_by_construction());
    }
}
