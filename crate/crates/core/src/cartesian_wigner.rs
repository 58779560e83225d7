//! Wigner functions of a single bosonic mode on the complex plane, with the
//! traciality-based witnesses for nonclassical and nonquantum distributions.
//!
//! Conventions: β = x + ip with the coherent state |β₀⟩ represented by
//! (2/π) e^{−2|β−β₀|²}, and tr(AB) = π ∫ W_A W_B d²β.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::quadrature::{adaptive, try_integrate_plane, IntegrationSpec};

/// A value counts as negative only below this threshold.
pub const NEGATIVITY_THRESHOLD: f64 = 1e-10;

/// Default Fock cutoff for [`nonquantum_check`].
pub const DEFAULT_MAX_FOCK: u32 = 4;

type Evaluator = dyn Fn(Complex64) -> Result<f64> + Send + Sync;

/// Real function on the single-mode phase space.
///
/// `decay_center` and `decay_scale` tell the plane integrator where the
/// function lives; evaluation may itself involve quadrature and is fallible.
#[derive(Clone)]
pub struct PhaseSpaceFunction {
    eval: Arc<Evaluator>,
    label: String,
    decay_scale: f64,
    decay_center: Complex64,
}

impl PhaseSpaceFunction {
    pub fn new(
        label: impl Into<String>,
        decay_center: Complex64,
        decay_scale: f64,
        f: impl Fn(Complex64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(f),
            label: label.into(),
            decay_scale,
            decay_center,
        }
    }

    pub fn evaluate(&self, beta: Complex64) -> Result<f64> {
        (self.eval)(beta)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn decay_scale(&self) -> f64 {
        self.decay_scale
    }

    pub fn decay_center(&self) -> Complex64 {
        self.decay_center
    }

    /// ∫ W d²β.
    pub fn integral(&self, spec: &IntegrationSpec) -> Result<f64> {
        Ok(try_integrate_plane(|b| self.evaluate(b), self.decay_center, self.decay_scale, spec)?.value)
    }
}

impl fmt::Debug for PhaseSpaceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseSpaceFunction")
            .field("label", &self.label)
            .field("decay_center", &self.decay_center)
            .field("decay_scale", &self.decay_scale)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockIndex(pub u32);

/// (2/(πσ²)) e^{−2|β−β₀|²/σ²}. σ = 1 is the coherent state |β₀⟩,
/// σ < 1 has no density-matrix counterpart.
pub fn gaussian_wigner(center: Complex64, sigma: f64) -> Result<PhaseSpaceFunction> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(domain(format!("Gaussian width must be positive, got {sigma}")));
    }
    let norm = 2.0 / (PI * sigma * sigma);
    let rate = 2.0 / (sigma * sigma);
    Ok(PhaseSpaceFunction::new(
        format!("gaussian(center={center}, sigma={sigma})"),
        center,
        sigma,
        move |b| Ok(norm * (-rate * (b - center).norm_sqr()).exp()),
    ))
}

/// Laguerre polynomial L_n(x) by the three-term recurrence.
pub fn laguerre(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// (2/π)(−1)ⁿ Lₙ(4|β|²) e^{−2|β|²}.
pub fn fock_wigner(n: FockIndex) -> PhaseSpaceFunction {
    let sign = if n.0 % 2 == 0 { 1.0 } else { -1.0 };
    // the Laguerre factor reaches out to |β| ~ √(n+1)
    let scale = f64::from(n.0 + 1).sqrt();
    PhaseSpaceFunction::new(format!("fock({})", n.0), Complex64::new(0.0, 0.0), scale, move |b| {
        let r2 = b.norm_sqr();
        Ok(2.0 / PI * sign * laguerre(n.0, 4.0 * r2) * (-2.0 * r2).exp())
    })
}

/// π ∫ W_A W_B d²β = tr(AB). Symmetric in its arguments bit for bit.
pub fn overlap_trace(a: &PhaseSpaceFunction, b: &PhaseSpaceFunction, spec: &IntegrationSpec) -> Result<f64> {
    // Gaussian-product heuristics for where the product lives; every
    // expression is commutative in (a, b).
    let (wa2, wb2) = (a.decay_scale * a.decay_scale, b.decay_scale * b.decay_scale);
    let center = (a.decay_center * wb2 + b.decay_center * wa2) / (wa2 + wb2);
    let width = (wa2 * wb2 / (wa2 + wb2)).sqrt().max(a.decay_scale.min(b.decay_scale) / 2.0)
        + 0.5 * (a.decay_center - b.decay_center).norm() / spec.radial_cutoff_sigmas();
    let r = try_integrate_plane(|z| Ok(a.evaluate(z)? * b.evaluate(z)?), center, width, spec)?;
    Ok(PI * r.value)
}

/// ⟨n|ρ|n⟩ of the operator whose Wigner function is `w`.
pub fn fock_diag_element(w: &PhaseSpaceFunction, n: FockIndex, spec: &IntegrationSpec) -> Result<f64> {
    overlap_trace(w, &fock_wigner(n), spec)
}

/// Statistics of the rotated quadrature X_θ = (a e^{−iθ} + a† e^{iθ})/2,
/// obtained by integrating W along lines of constant X_θ.
///
/// θ = π/2 is the Y = i(a† − a)/2 quadrature.
#[derive(Debug, Clone)]
pub struct QuadratureMarginal {
    w: PhaseSpaceFunction,
    rotation: Complex64,
    spec: IntegrationSpec,
}

impl QuadratureMarginal {
    pub fn axis_angle(&self) -> f64 {
        self.rotation.arg()
    }

    /// Line coordinate of the decay centre, and how far the marginal reaches.
    pub fn support_hint(&self) -> (f64, f64) {
        let c = self.w.decay_center() * self.rotation.conj();
        (c.re, self.spec.radial_cutoff_sigmas() * self.w.decay_scale())
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        let c = self.w.decay_center() * self.rotation.conj();
        let reach = self.spec.radial_cutoff_sigmas() * self.w.decay_scale();
        let r = adaptive(
            |v| self.w.evaluate(self.rotation * Complex64::new(x, v)),
            c.im - reach,
            c.im + reach,
            &[c.im],
            &self.spec,
        )?;
        Ok(r.value)
    }

    /// ∫ₐᵇ p(x) dx.
    pub fn probability(&self, a: f64, b: f64) -> Result<f64> {
        Ok(adaptive(|x| self.density(x), a, b, &[], &self.spec)?.value)
    }

    /// Total probability over the whole support.
    pub fn total(&self) -> Result<f64> {
        let (c, reach) = self.support_hint();
        Ok(adaptive(|x| self.density(x), c - reach, c + reach, &[c], &self.spec)?.value)
    }
}

pub fn quadrature_marginal(w: &PhaseSpaceFunction, axis_angle: f64, spec: &IntegrationSpec) -> QuadratureMarginal {
    QuadratureMarginal {
        w: w.clone(),
        rotation: Complex64::from_polar(1.0, axis_angle),
        spec: *spec,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonquantumReport {
    pub diag_elements: Vec<(FockIndex, f64)>,
    /// (axis angle, smallest sampled marginal density)
    pub marginal_minima: Vec<(f64, f64)>,
    pub nonquantum: bool,
}

const MARGINAL_SAMPLES: usize = 81;

/// Searches for evidence that ρ is not positive semidefinite: a negative
/// ⟨n|ρ|n⟩ for n ≤ `max_n`, or a negative quadrature density on any of the
/// given axes. A negative verdict proves nothing.
pub fn nonquantum_check(
    w: &PhaseSpaceFunction,
    max_n: u32,
    axes: &[f64],
    spec: &IntegrationSpec,
) -> Result<NonquantumReport> {
    let diag_elements = (0..=max_n)
        .map(|n| Ok((FockIndex(n), fock_diag_element(w, FockIndex(n), spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut marginal_minima = Vec::with_capacity(axes.len());
    for &axis in axes {
        let m = quadrature_marginal(w, axis, spec);
        let (c, reach) = m.support_hint();
        let mut lowest = f64::INFINITY;
        for k in 0..MARGINAL_SAMPLES {
            let x = c - reach + 2.0 * reach * k as f64 / (MARGINAL_SAMPLES - 1) as f64;
            lowest = lowest.min(m.density(x)?);
        }
        marginal_minima.push((axis, lowest));
    }
    let nonquantum = diag_elements.iter().any(|&(_, v)| v < -NEGATIVITY_THRESHOLD)
        || marginal_minima.iter().any(|&(_, v)| v < -NEGATIVITY_THRESHOLD);
    Ok(NonquantumReport {
        diag_elements,
        marginal_minima,
        nonquantum,
    })
}

/// Square sampling grid centred on `center`, `points` per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub center: Complex64,
    pub half_width: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(center: Complex64, half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) || points < 2 {
            return Err(domain("grid needs a positive half-width and at least 2 points"));
        }
        Ok(Self {
            center,
            half_width,
            points,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        let n = self.points;
        let step = 2.0 * self.half_width / (n - 1) as f64;
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| {
                self.center + Complex64::new(-self.half_width + step * i as f64, -self.half_width + step * j as f64)
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonclassicalReport {
    pub nonclassical: bool,
    pub witness: Complex64,
    pub value: f64,
}

/// Pointwise negativity of W on a sampling grid.
pub fn nonclassical_check(w: &PhaseSpaceFunction, grid: &Grid) -> Result<NonclassicalReport> {
    let mut witness = grid.center;
    let mut value = f64::INFINITY;
    for b in grid.points() {
        let v = w.evaluate(b)?;
        if v < value {
            value = v;
            witness = b;
        }
    }
    Ok(NonclassicalReport {
        nonclassical: value < -NEGATIVITY_THRESHOLD,
        witness,
        value,
    })
}
