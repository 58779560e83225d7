//! Acceptance criteria, each checked at its stated tolerance and runtime
//! budget.

use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hybridwigner_core::cartesian_wigner::{fock_diag_element, fock_wigner, gaussian_wigner, FockIndex};
use hybridwigner_core::hybrid_model::{
    atomic_pfunction, correlation, delta_phase_moments, hybrid_expectation, joint_average, phase_distribution_delta,
    pfunction_field_moment, quadrature_distribution, FieldState, HybridState, ObservableSymbol, SIGMA_MINUS_UNIT_SCALE,
};
use hybridwigner_core::oscillator_hybrid::{nonclassical_transfer_check, nonquantum_transfer_check, CouplingParams};
use hybridwigner_core::quantum_reference::{evolve_quantum, quantum_correlation, quantum_expectation};
use hybridwigner_core::su2_wigner::{
    spin_half_kernel, spin_wigner, su2_kernel, su2_traciality, wigner_to_spin, BlochPoint, HalfInteger, SpinHalfState,
};
use hybridwigner_core::IntegrationSpec;

use crate::config::parse_config;
use crate::scenario::{run_scenario, FIGURES};
use crate::table::emit_csv;

const SQRT3: f64 = 1.732_050_807_568_877_2;

type Check = Result<(bool, String), String>;

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub target: &'static str,
    pub budget: Duration,
    check: fn() -> Check,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub target: &'static str,
    pub passed: bool,
    pub measured: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {:<34} {:>8.3} s / {:>2} s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.measured
        )
    }
}

impl Criterion {
    pub fn run(&self) -> Outcome {
        let start = Instant::now();
        let result = (self.check)();
        let elapsed = start.elapsed();
        let (mut passed, mut measured) = match result {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if elapsed > self.budget {
            passed = false;
            measured.push_str("; over the runtime budget");
        }
        Outcome {
            id: self.id,
            name: self.name,
            target: self.target,
            passed,
            measured,
            elapsed,
            budget: self.budget,
        }
    }

    /// Matches the criterion id or a case-insensitive substring of its name.
    pub fn matches(&self, filter: &str) -> bool {
        filter.parse::<u8>().map_or(false, |id| id == self.id) || self.name.to_lowercase().contains(&filter.to_lowercase())
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "delta-field phase law", target: "pointwise 1e-9", budget: secs(1), check: phase_law },
        Criterion { id: 2, name: "formal phase moments", target: "1e-10", budget: secs(1), check: phase_moments },
        Criterion { id: 3, name: "integrated quadrature negativity", target: "-0.04 +/- 0.005", budget: secs(10), check: quadrature_negativity },
        Criterion { id: 4, name: "phase-state moments", target: "1e-8", budget: secs(5), check: phase_state_moments },
        Criterion { id: 5, name: "gaussian-field moments", target: "1e-6 rel; 1e-3 rel", budget: secs(30), check: gaussian_moments },
        Criterion { id: 6, name: "correlation decay", target: "max <= 3x value at 5", budget: secs(5), check: correlation_decay },
        Criterion { id: 7, name: "quantum oracle", target: "1e-10; 1e-10; 1e-12", budget: secs(1), check: quantum_oracle },
        Criterion { id: 8, name: "nonquantum witness", target: "1e-8", budget: secs(5), check: nonquantum_witness },
        Criterion { id: 9, name: "su2 representation", target: "1e-12; 1e-8; 1e-8", budget: secs(5), check: su2_representation },
        Criterion { id: 10, name: "oscillator swap", target: "1e-9; 1e-6", budget: secs(30), check: oscillator_swap },
        Criterion { id: 11, name: "p-function identification", target: "1e-12; 1e-6", budget: secs(5), check: pfunction_identification },
        Criterion { id: 12, name: "cli determinism and figures", target: "identical bytes; min < -1e-3", budget: secs(60), check: cli_figures },
    ]
}

pub fn run(filter: Option<&str>) -> Vec<Outcome> {
    criteria().iter().filter(|c| filter.map_or(true, |f| c.matches(f))).map(Criterion::run).collect()
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

fn delta_field(r0: f64) -> FieldState {
    FieldState::delta(r0, 0.0).expect("valid field")
}

fn gaussian_field(r0: f64, sigma: f64) -> FieldState {
    FieldState::gaussian(r0, sigma).expect("valid field")
}

fn state(atom: SpinHalfState, field: FieldState, chi: f64, t: f64) -> Result<HybridState, String> {
    HybridState::new(atom, field, chi, t).map_err(err)
}

/// |a − b| relative to |b|, or absolute when b vanishes.
fn rel(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if b.norm() > 1e-12 {
        d / b.norm()
    } else {
        d
    }
}

fn phase_law() -> Check {
    let ground = SpinHalfState::ground();
    let (mut worst, mut negative, mut zero) = (0.0f64, true, true);
    for ct in [0.5, 1.0, 2.0] {
        let k = SQRT3 * ct;
        let d = phase_distribution_delta(&ground, ct, 0.0);
        let d = d.as_density().ok_or("expected a density")?;
        let mut grid: Vec<f64> = (0..101).map(|i| -1.5 * k + 3.0 * k * f64::from(i) / 100.0).collect();
        grid.extend([ct + 1e-9, k]);
        for phi in grid {
            let v = d.density(phi).map_err(err)?;
            if phi.abs() <= k {
                let law = (1.0 - phi / ct) / (2.0 * SQRT3 * ct);
                worst = worst.max((v - law).abs());
            } else {
                zero &= v == 0.0;
            }
            if phi > ct && phi <= k {
                negative &= v < 0.0;
            }
        }
    }
    Ok((
        worst <= 1e-9 && negative && zero,
        format!("max deviation {worst:.2e}, negative on (chi t, sqrt3 chi t]: {negative}, zero outside: {zero}"),
    ))
}

fn phase_moments() -> Check {
    let spec = IntegrationSpec::default();
    let ground = SpinHalfState::ground();
    let (mut mean_err, mut var_err) = (0.0f64, 0.0f64);
    for ct in [0.5, 1.0, 2.0] {
        let (mean, var) = delta_phase_moments(&ground, ct);
        let d = phase_distribution_delta(&ground, ct, 0.0);
        let d = d.as_density().ok_or("expected a density")?;
        let (m1, m2) = (d.moment(1, &spec).map_err(err)?, d.moment(2, &spec).map_err(err)?);
        mean_err = mean_err.max((mean + ct).abs()).max((m1 + ct).abs());
        var_err = var_err.max(var.abs()).max((m2 - m1 * m1).abs());
    }
    Ok((
        mean_err <= 1e-10 && var_err <= 1e-10,
        format!("|<phi> + chi t| = {mean_err:.2e}, |dphi^2| = {var_err:.2e} (closed form and quadrature)"),
    ))
}

fn quadrature_negativity() -> Check {
    let spec = IntegrationSpec::default();
    let p = quadrature_distribution(&SpinHalfState::ground(), &gaussian_field(10.0, 1.0), 1.0 / SQRT3, &spec).map_err(err)?;
    let v = p.probability(-5.0, -1.0).map_err(err)?;
    Ok(((v + 0.04).abs() <= 0.005, format!("integral over [-5, -1] = {v:.6}")))
}

fn phase_state_moments() -> Check {
    let (r0, chi) = (1.0, 1.0);
    let (mut adag_err, mut display_err, mut ratio_spread) = (0.0f64, 0.0f64, 0.0f64);
    for k in 1..=50 {
        let t = 0.2 * f64::from(k);
        let s = state(SpinHalfState::phase(), delta_field(r0), chi, t)?;
        let kappa = SQRT3 * chi * t;
        let sinc = kappa.sin() / kappa;
        adag_err = adag_err.max((hybrid_expectation(&s, ObservableSymbol::ADag) - r0 * sinc).norm());
        let display = Complex64::from_polar(1.0, -2.0 * chi * r0 * r0 * t) * r0 * (sinc - kappa.cos()) / (chi * chi * t * t);
        let h = hybrid_expectation(&s, ObservableSymbol::SigmaMinusADag);
        display_err = display_err.max((display - h * SIGMA_MINUS_UNIT_SCALE).norm() / display.norm().max(1.0));
        if h.norm() > 1e-3 {
            let ratio = display / h;
            ratio_spread = ratio_spread.max((ratio - SIGMA_MINUS_UNIT_SCALE).norm());
        }
    }
    Ok((
        adag_err <= 1e-8 && display_err <= 1e-8 && ratio_spread <= 1e-8,
        format!(
            "<adag> error {adag_err:.2e}; <sm adag> vs display x {SIGMA_MINUS_UNIT_SCALE} error {display_err:.2e}, ratio spread {ratio_spread:.2e}"
        ),
    ))
}

fn gaussian_moments() -> Check {
    let spec = IntegrationSpec::default();
    let times = [0.1, 0.5, 1.0, 2.0];
    let (mut quad_err, mut limit_err) = (0.0f64, 0.0f64);
    for t in times {
        let s = state(SpinHalfState::phase(), gaussian_field(1.0, 1.0), 1.0, t)?;
        let avg = joint_average(&s, &spec).map_err(err)?;
        quad_err = quad_err.max((avg.mass - 1.0).abs());
        for obs in ObservableSymbol::ALL {
            quad_err = quad_err.max(rel(avg.get(obs), hybrid_expectation(&s, obs)));
        }
        let narrow = state(SpinHalfState::phase(), gaussian_field(1.0, 1e-3), 1.0, t)?;
        let delta = state(SpinHalfState::phase(), delta_field(1.0), 1.0, t)?;
        for obs in ObservableSymbol::ALL {
            limit_err = limit_err.max(rel(hybrid_expectation(&narrow, obs), hybrid_expectation(&delta, obs)));
        }
    }
    Ok((
        quad_err <= 1e-6 && limit_err <= 1e-3,
        format!("closed form vs joint quadrature {quad_err:.2e} rel; sigma = 1e-3 vs delta {limit_err:.2e} rel"),
    ))
}

/// (value at χt = 5, max over [5, 50]) of |corr|·tᵖ.
fn envelope(s: &HybridState, a: ObservableSymbol, b: ObservableSymbol, power: i32) -> Result<(f64, f64), String> {
    let mut first = None;
    let mut max = 0.0f64;
    for k in 0..=4500 {
        let t = 5.0 + 0.01 * f64::from(k);
        let v = correlation(&s.at_time(t).map_err(err)?, a, b).map_err(err)?.norm() * t.powi(power);
        first.get_or_insert(v);
        max = max.max(v);
    }
    Ok((first.unwrap_or(0.0), max))
}

fn correlation_decay() -> Check {
    let ground = state(SpinHalfState::ground(), delta_field(1.0), 1.0, 0.0)?;
    let (g5, gmax) = envelope(&ground, ObservableSymbol::SigmaZ, ObservableSymbol::A, 1)?;
    let phase = state(SpinHalfState::phase(), delta_field(1.0), 1.0, 0.0)?;
    let (p5, pmax) = envelope(&phase, ObservableSymbol::SigmaMinus, ObservableSymbol::ADag, 2)?;
    Ok((
        gmax <= 3.0 * g5 && pmax <= 3.0 * p5,
        format!("ground |corr| t: max {gmax:.4} vs 3 x {g5:.4}; phase |corr| t^2: max {pmax:.4} vs 3 x {p5:.4}"),
    ))
}

fn quantum_oracle() -> Check {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let (mut closed_err, mut period_err, mut corr_max) = (0.0f64, 0.0f64, 0.0f64);
    let period = std::f64::consts::PI;
    for k in 1..=50 {
        let t = 0.2 * f64::from(k);
        let s = evolve_quantum(h, h, one, 1.0, t, 40).map_err(err)?;
        let quoted = Complex64::from_polar(0.5 * (-2.0 * t.sin().powi(2)).exp(), t + (2.0 * t).sin());
        closed_err = closed_err.max((quantum_expectation(&s, ObservableSymbol::SigmaMinusADag) - quoted).norm());
        let later = evolve_quantum(h, h, one, 1.0, t + period, 40).map_err(err)?;
        for obs in ObservableSymbol::ALL {
            period_err = period_err.max((quantum_expectation(&s, obs) - quantum_expectation(&later, obs)).norm());
        }
        let g = evolve_quantum(zero, one, one, 1.0, t, 40).map_err(err)?;
        corr_max = corr_max.max(quantum_correlation(&g, ObservableSymbol::SigmaZ, ObservableSymbol::A).map_err(err)?.norm());
    }
    Ok((
        closed_err <= 1e-10 && period_err <= 1e-10 && corr_max <= 1e-12,
        format!("<sm adag> vs quoted form {closed_err:.2e}; pi/chi periodicity {period_err:.2e}; ground correlation {corr_max:.2e}"),
    ))
}

fn nonquantum_witness() -> Check {
    let spec = IntegrationSpec::default();
    let mut worst = 0.0f64;
    for sigma in [0.5f64, 0.8, 1.0] {
        let s2 = sigma * sigma;
        let v = fock_diag_element(&gaussian_wigner(Complex64::new(0.0, 0.0), sigma).map_err(err)?, FockIndex(1), &spec).map_err(err)?;
        worst = worst.max((v + 2.0 * (1.0 - s2) / ((1.0 + s2) * (1.0 + s2))).abs());
    }
    Ok((worst <= 1e-8, format!("max deviation from -2(1-s^2)/(1+s^2)^2: {worst:.2e}")))
}

fn random_state(rng: &mut ChaCha8Rng) -> Result<SpinHalfState, String> {
    let (u, phi, len): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..1.0));
    let st = (1.0 - u * u).sqrt();
    SpinHalfState::new([len * st * phi.cos(), len * st * phi.sin(), len * u]).map_err(err)
}

fn su2_representation() -> Check {
    let spec = IntegrationSpec::default();
    let half = HalfInteger::from_twice(1);
    let mut kernel_err = 0.0f64;
    for i in 0..20 {
        for j in 0..20 {
            let p = BlochPoint::new(std::f64::consts::PI * f64::from(i) / 19.0, std::f64::consts::TAU * f64::from(j) / 20.0).map_err(err)?;
            kernel_err = kernel_err.max(su2_kernel(half, &p).map_err(err)?.max_abs_diff(&spin_half_kernel(&p)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut round_err, mut trace_err) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let (a, b) = (random_state(&mut rng)?, random_state(&mut rng)?);
        let back = wigner_to_spin(&spin_wigner(&a), &spec).map_err(err)?;
        for (x, y) in back.bloch_vector().iter().zip(a.bloch_vector()) {
            round_err = round_err.max((x - y).abs());
        }
        let dot: f64 = a.bloch_vector().iter().zip(b.bloch_vector()).map(|(x, y)| x * y).sum();
        let tr = su2_traciality(&spin_wigner(&a), &spin_wigner(&b), half, &spec).map_err(err)?;
        trace_err = trace_err.max((tr - (1.0 + dot) / 2.0).abs());
    }
    Ok((
        kernel_err <= 1e-12 && round_err <= 1e-8 && trace_err <= 1e-8,
        format!("kernel {kernel_err:.2e}; round trip {round_err:.2e}; traciality {trace_err:.2e}"),
    ))
}

fn oscillator_swap() -> Check {
    let spec = IntegrationSpec::default();
    let params = CouplingParams::resonant(1.0).map_err(err)?;
    let classical = gaussian_wigner(Complex64::new(0.0, 0.0), 1.0).map_err(err)?;
    let nc = nonclassical_transfer_check(&classical, &params, &spec).map_err(err)?;
    let origin_err = (nc.value_at_origin + 2.0 / std::f64::consts::PI).abs();
    let nq = nonquantum_transfer_check(0.5, &fock_wigner(FockIndex(0)), &params, &spec).map_err(err)?;
    let fock_err = (nq.fock1_element + 0.96).abs();
    Ok((
        origin_err <= 1e-9 && nc.swapped.nonclassical && fock_err <= 1e-6 && nq.report.nonquantum,
        format!(
            "W(0) = {:.12} (nonclassical: {}); <1|rho|1> = {:.9} (nonquantum: {})",
            nc.value_at_origin, nc.swapped.nonclassical, nq.fock1_element, nq.report.nonquantum
        ),
    ))
}

fn pfunction_identification() -> Check {
    let spec = IntegrationSpec::default();
    let (mut law_err, mut moment_err) = (0.0f64, 0.0f64);
    for ct in [0.5, 1.0, 2.0] {
        let k = SQRT3 * ct;
        let p = atomic_pfunction(&SpinHalfState::ground(), ct, &spec);
        let p = p.as_density().ok_or("expected a density")?;
        for i in 0..=100 {
            let delta = -k + 2.0 * k * f64::from(i) / 100.0;
            let law = (1.0 - delta / ct) / (2.0 * SQRT3 * ct);
            law_err = law_err.max((p.density(delta).map_err(err)? - law).abs());
        }
        for atom in [SpinHalfState::ground(), SpinHalfState::phase()] {
            let s = state(atom, delta_field(1.0), 1.0, ct)?;
            let p = atomic_pfunction(&atom, ct, &spec);
            let p = p.as_density().ok_or("expected a density")?;
            let m = pfunction_field_moment(p, s.field.center(), ObservableSymbol::ADag, &spec).map_err(err)?;
            moment_err = moment_err.max((m - hybrid_expectation(&s, ObservableSymbol::ADag)).norm());
        }
    }
    Ok((law_err <= 1e-12 && moment_err <= 1e-6, format!("P vs linear law {law_err:.2e}; <adag> from P {moment_err:.2e}")))
}

fn cli_figures() -> Check {
    let dir = std::env::temp_dir().join(format!("hybridwigner-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let result = (|| -> Check {
        let mut identical = true;
        let mut fig3_min = f64::INFINITY;
        for (name, text) in FIGURES {
            let config = parse_config(text).map_err(err)?;
            let mut bytes = Vec::new();
            for run in 0..2 {
                let path = dir.join(format!("{run}-{name}.csv"));
                emit_csv(&run_scenario(&config).map_err(err)?, Some(&path)).map_err(err)?;
                bytes.push(std::fs::read(&path).map_err(err)?);
            }
            identical &= bytes[0] == bytes[1];
            if name == "fig3.ini" {
                let table = run_scenario(&config).map_err(err)?;
                let (t, d) = (table.numbers("t").ok_or("no t column")?, table.numbers("density").ok_or("no density column")?);
                fig3_min = t.iter().zip(&d).filter(|(t, _)| **t > 0.0).map(|(_, d)| *d).fold(fig3_min, f64::min);
            }
        }
        Ok((identical && fig3_min < -1e-3, format!("byte-identical reruns: {identical}; fig3 lower-panel minimum {fig3_min:.4e}")))
    })();
    let _ = std::fs::remove_dir_all(&dir);
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_sequential() {
        let ids: Vec<u8> = criteria().iter().map(|c| c.id).collect();
        assert_eq!(ids, (1..=12).collect::<Vec<_>>());
    }

    #[test]
    fn filter_by_id_and_name() {
        let c = criteria();
        assert!(c[6].matches("7") && c[6].matches("Quantum"));
        assert!(!c[6].matches("8"));
        assert_eq!(run(Some("nonquantum witness")).len(), 1);
    }
}
