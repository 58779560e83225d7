//! Fully quantum dispersive model in a truncated Fock space, in the
//! interaction picture:
//!
//! |Ψ(t)⟩ = c_e |e⟩ e^{−iχt a†a}|α⟩ + c_g |g⟩ e^{iχt a†a}|α⟩.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::hybrid_model::{split_cross_sector, AtomFactor, FieldFactor, ObservableSymbol};

/// Largest tail weight |c_{·,N}|² accepted at construction.
pub const TRUNCATION_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    pub alpha: Complex64,
}

/// Joint amplitudes, indexed by atomic level and photon number 0..=N.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFieldVector {
    excited: Vec<Complex64>,
    ground: Vec<Complex64>,
}

impl AtomFieldVector {
    pub fn truncation(&self) -> usize {
        self.excited.len() - 1
    }

    pub fn excited(&self) -> &[Complex64] {
        &self.excited
    }

    pub fn ground(&self) -> &[Complex64] {
        &self.ground
    }

    pub fn norm_sqr(&self) -> f64 {
        self.excited.iter().chain(&self.ground).map(|c| c.norm_sqr()).sum()
    }
}

/// ceil(|α|² + 10|α| + 20).
pub fn default_truncation(alpha: Complex64) -> usize {
    let r = alpha.norm();
    (r * r + 10.0 * r + 20.0).ceil() as usize
}

/// ⟨n|α⟩ for n = 0..=n_max.
pub fn coherent_amplitudes(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..=n_max {
        out.push(c);
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    out
}

pub fn evolve_quantum(c_e: Complex64, c_g: Complex64, alpha: Complex64, chi: f64, t: f64, n_max: usize) -> Result<AtomFieldVector> {
    let atom_norm = c_e.norm_sqr() + c_g.norm_sqr();
    if (atom_norm - 1.0).abs() > 1e-12 {
        return Err(domain(format!("atomic amplitudes must be normalized, |c_e|²+|c_g|² = {atom_norm}")));
    }
    if !(chi * t).is_finite() {
        return Err(domain("chi*t must be finite"));
    }
    let psi = coherent_amplitudes(alpha, n_max);
    let tail = psi[n_max].norm_sqr();
    let kept: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    if tail >= TRUNCATION_TAIL || 1.0 - kept > 1e-12 {
        return Err(Error::Truncation { n_max, tail: tail.max(1.0 - kept) });
    }
    let (excited, ground) = psi
        .iter()
        .enumerate()
        .map(|(n, &c)| {
            let rot = Complex64::from_polar(1.0, -chi * t * n as f64);
            (c_e * rot * c, c_g * rot.conj() * c)
        })
        .unzip();
    Ok(AtomFieldVector { excited, ground })
}

/// ⟨α|β⟩ = e^{−(|α|²+|β|²)/2 + α*β}.
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    (-(alpha.norm_sqr() + beta.norm_sqr()) / 2.0 + alpha.conj() * beta).exp()
}

/// Σ_n x_n* √(n+1) y_{n+1}, i.e. ⟨x|a|y⟩ for one atomic level.
fn lowering(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    (0..x.len() - 1).map(|n| x[n].conj() * ((n + 1) as f64).sqrt() * y[n + 1]).sum()
}

fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn factor_expectation(s: &AtomFieldVector, g: AtomFactor, f: FieldFactor) -> Complex64 {
    let (e, gr) = (&s.excited[..], &s.ground[..]);
    // ⟨Ψ| g ⊗ f |Ψ⟩ with σ_− = |g⟩⟨e|
    let block = |x: &[Complex64], y: &[Complex64]| match f {
        FieldFactor::Identity => inner(x, y),
        FieldFactor::A => lowering(x, y),
        FieldFactor::ADag => lowering(y, x).conj(),
    };
    match g {
        AtomFactor::Identity => block(e, e) + block(gr, gr),
        AtomFactor::SigmaZ => block(e, e) - block(gr, gr),
        AtomFactor::SigmaMinus => block(gr, e),
    }
}

/// Exact matrix element in the truncated space.
pub fn quantum_expectation(state: &AtomFieldVector, obs: ObservableSymbol) -> Complex64 {
    let (g, f) = obs.factors();
    factor_expectation(state, g, f)
}

/// ⟨AB⟩ − ⟨A⟩⟨B⟩ for an atomic `a` and a field `b`.
pub fn quantum_correlation(state: &AtomFieldVector, a: ObservableSymbol, b: ObservableSymbol) -> Result<Complex64> {
    let (g, f) = split_cross_sector(a, b)?;
    Ok(factor_expectation(state, g, f) - factor_expectation(state, g, FieldFactor::Identity) * factor_expectation(state, AtomFactor::Identity, f))
}
