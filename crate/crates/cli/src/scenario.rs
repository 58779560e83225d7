use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use hybridwigner_core::cartesian_wigner::{fock_wigner, gaussian_wigner, FockIndex};
use hybridwigner_core::hybrid_model::{
    atomic_pfunction, correlation, hybrid_expectation, phase_distribution_delta, phase_distribution_gaussian,
    quadrature_distribution, standard_correlation, standard_expectation, FieldState, HybridState, MeanIntensity,
    ObservableSymbol, PhaseDistribution, StandardVariant,
};
use hybridwigner_core::oscillator_hybrid::{evolve_pair_wigner, CouplingParams};
use hybridwigner_core::quantum_reference::{
    default_truncation, evolve_quantum, quantum_correlation, quantum_expectation, AtomFieldVector,
};

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::table::{complex_cells, complex_columns, Cell, ResultTable};
use crate::{verify, AppError};

/// Bundled configurations regenerating the figures, by file name.
pub const FIGURES: [(&str, &str); 5] = [
    ("fig1.ini", include_str!("../scenarios/fig1.ini")),
    ("fig2.ini", include_str!("../scenarios/fig2.ini")),
    ("fig3.ini", include_str!("../scenarios/fig3.ini")),
    ("fig4.ini", include_str!("../scenarios/fig4.ini")),
    ("fig5.ini", include_str!("../scenarios/fig5.ini")),
];

type Rows = Vec<Vec<Cell>>;

fn numeric(t: f64, e: impl std::fmt::Display) -> AppError {
    AppError::Numeric(format!("t = {t}: {e}"))
}

/// Runs the configured scenario. Time points are evaluated in parallel and
/// collected in order, so the table does not depend on the thread count.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ResultTable, AppError> {
    let (header, rows) = match config.scenario {
        ScenarioKind::Verify => return verify_table(config),
        ScenarioKind::PhaseDist => (strings(&["t", "phi", "density"]), per_time(config, phase_rows)?),
        ScenarioKind::QuadDist => (strings(&["t", "y", "density"]), per_time(config, quad_rows)?),
        ScenarioKind::PFunction => (strings(&["t", "delta", "density"]), per_time(config, pfunction_rows)?),
        ScenarioKind::Moments => (with_time(moment_header("")), per_time(config, |c, t| Ok(vec![moment_row(c, t, Model::Hybrid)?]))?),
        ScenarioKind::Correlations => (
            with_time(correlation_header(config, "")),
            per_time(config, |c, t| Ok(vec![correlation_row(c, t, Model::Hybrid)?]))?,
        ),
        ScenarioKind::Compare => (compare_header(config), per_time(config, |c, t| Ok(vec![compare_row(c, t)?]))?),
        ScenarioKind::Oscillators => (
            strings(&["t", "lambda_t", "alpha_marginal_origin", "beta_marginal_origin"]),
            per_time(config, oscillator_rows)?,
        ),
    };
    let mut table = ResultTable::new(header);
    table.metadata = metadata(config);
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

fn metadata(config: &ScenarioConfig) -> Vec<String> {
    let mut m = vec![format!("hybridwigner {}", env!("CARGO_PKG_VERSION")), format!("scenario {}", config.scenario.name())];
    m.extend(config.echo.iter().cloned());
    m
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn per_time(config: &ScenarioConfig, f: impl Fn(&ScenarioConfig, f64) -> Result<Rows, AppError> + Sync) -> Result<Rows, AppError> {
    let chunks: Vec<Result<Rows, AppError>> = config.times.par_iter().map(|&t| f(config, t)).collect();
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    Ok(rows)
}

fn state_at(config: &ScenarioConfig, t: f64) -> Result<HybridState, AppError> {
    HybridState::new(config.atom.state(), config.field, config.chi, t).map_err(|e| numeric(t, e))
}

fn density_rows(t: f64, d: &PhaseDistribution, grid: &[f64]) -> Result<Rows, AppError> {
    let PhaseDistribution::Density(d) = d else {
        return Err(numeric(t, "the distribution is a single point (no density at this time)"));
    };
    grid.iter().map(|&x| Ok(vec![Cell::Num(t), Cell::Num(x), Cell::Num(d.density(x).map_err(|e| numeric(t, e))?)])).collect()
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
}

fn phase_rows(config: &ScenarioConfig, t: f64) -> Result<Rows, AppError> {
    let atom = config.atom.state();
    let chi_t = config.chi * t;
    match config.field {
        FieldState::DeltaAmplitude { phi0, .. } => {
            let d = phase_distribution_delta(&atom, chi_t, phi0);
            let reach = 1.2 * 3f64.sqrt() * chi_t.abs();
            let grid = config.grid.clone().unwrap_or_else(|| uniform(phi0 - reach, phi0 + reach, 201));
            density_rows(t, &d, &grid)
        }
        FieldState::GaussianAmplitude { .. } => {
            let d = phase_distribution_gaussian(&atom, &config.field, chi_t, &config.quadrature).map_err(|e| numeric(t, e))?;
            let grid = config.grid.clone().unwrap_or_else(|| uniform(-PI, PI, 401));
            density_rows(t, &d, &grid)
        }
    }
}

fn quad_rows(config: &ScenarioConfig, t: f64) -> Result<Rows, AppError> {
    let p = quadrature_distribution(&config.atom.state(), &config.field, config.chi * t, &config.quadrature).map_err(|e| numeric(t, e))?;
    let grid = config.grid.clone().unwrap_or_else(|| {
        let FieldState::GaussianAmplitude { r0, sigma } = config.field else { unreachable!("validated at parse time") };
        uniform(-(r0 + 6.0 * sigma), r0 + 6.0 * sigma, 401)
    });
    grid.iter().map(|&y| Ok(vec![Cell::Num(t), Cell::Num(y), Cell::Num(p.density(y).map_err(|e| numeric(t, e))?)])).collect()
}

fn pfunction_rows(config: &ScenarioConfig, t: f64) -> Result<Rows, AppError> {
    let chi_t = config.chi * t;
    let p = atomic_pfunction(&config.atom.state(), chi_t, &config.quadrature);
    let k = 3f64.sqrt() * chi_t.abs();
    let grid = config.grid.clone().unwrap_or_else(|| uniform(-k, k, 201));
    density_rows(t, &p, &grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Model {
    Hybrid,
    Standard,
    MeanField,
}

fn expectation(state: &HybridState, obs: ObservableSymbol, model: Model) -> Complex64 {
    match model {
        Model::Hybrid => hybrid_expectation(state, obs),
        Model::Standard => standard_expectation(state, obs, StandardVariant::FieldAveraged),
        Model::MeanField => standard_expectation(state, obs, StandardVariant::MeanField(MeanIntensity::WithWidth)),
    }
}

fn model_correlation(state: &HybridState, a: ObservableSymbol, b: ObservableSymbol, model: Model) -> Result<Complex64, AppError> {
    let r = match model {
        Model::Hybrid => correlation(state, a, b),
        Model::Standard => standard_correlation(state, a, b, StandardVariant::FieldAveraged),
        Model::MeanField => standard_correlation(state, a, b, StandardVariant::MeanField(MeanIntensity::WithWidth)),
    };
    r.map_err(|e| numeric(state.t, e))
}

fn prefixed(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}_{name}")
    }
}

fn moment_header(prefix: &str) -> Vec<String> {
    let mut h = Vec::new();
    for obs in ObservableSymbol::ALL {
        h.extend(complex_columns(&prefixed(prefix, obs.name())));
    }
    h
}

fn with_time(columns: Vec<String>) -> Vec<String> {
    std::iter::once("t".to_string()).chain(columns).collect()
}

fn pair_name(a: ObservableSymbol, b: ObservableSymbol) -> String {
    format!("corr_{}_{}", a.name(), b.name())
}

fn correlation_header(config: &ScenarioConfig, prefix: &str) -> Vec<String> {
    let mut h = Vec::new();
    for &(a, b) in &config.pairs {
        h.extend(complex_columns(&prefixed(prefix, &pair_name(a, b))));
    }
    h
}

fn moment_cells(state: &HybridState, model: Model) -> Vec<Cell> {
    ObservableSymbol::ALL.into_iter().flat_map(|o| complex_cells(expectation(state, o, model))).collect()
}

fn correlation_cells(config: &ScenarioConfig, state: &HybridState, model: Model) -> Result<Vec<Cell>, AppError> {
    let mut out = Vec::new();
    for &(a, b) in &config.pairs {
        out.extend(complex_cells(model_correlation(state, a, b, model)?));
    }
    Ok(out)
}

fn moment_row(config: &ScenarioConfig, t: f64, model: Model) -> Result<Vec<Cell>, AppError> {
    let s = state_at(config, t)?;
    let mut row = vec![Cell::Num(t)];
    row.extend(moment_cells(&s, model));
    Ok(row)
}

fn correlation_row(config: &ScenarioConfig, t: f64, model: Model) -> Result<Vec<Cell>, AppError> {
    let s = state_at(config, t)?;
    let mut row = vec![Cell::Num(t)];
    row.extend(correlation_cells(config, &s, model)?);
    Ok(row)
}

/// Hybrid columns keep the single-model names; the comparators are prefixed.
fn compare_header(config: &ScenarioConfig) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(moment_header(""));
    h.extend(correlation_header(config, ""));
    for prefix in ["standard", "meanfield", "quantum"] {
        h.extend(moment_header(prefix));
        h.extend(correlation_header(config, prefix));
    }
    h
}

/// Quantum counterpart: the atom's pure state and a coherent field at the
/// classical field's centre.
fn quantum_state(config: &ScenarioConfig, t: f64) -> Result<AtomFieldVector, AppError> {
    let (ce, cg) = config.atom.state().amplitudes().map_err(|e| numeric(t, e))?;
    let alpha = config.field.center();
    evolve_quantum(ce, cg, alpha, config.chi, t, default_truncation(alpha)).map_err(|e| numeric(t, e))
}

fn compare_row(config: &ScenarioConfig, t: f64) -> Result<Vec<Cell>, AppError> {
    let s = state_at(config, t)?;
    let mut row = vec![Cell::Num(t)];
    row.extend(moment_cells(&s, Model::Hybrid));
    row.extend(correlation_cells(config, &s, Model::Hybrid)?);
    for model in [Model::Standard, Model::MeanField] {
        row.extend(moment_cells(&s, model));
        row.extend(correlation_cells(config, &s, model)?);
    }
    let q = quantum_state(config, t)?;
    row.extend(ObservableSymbol::ALL.into_iter().flat_map(|o| complex_cells(quantum_expectation(&q, o))));
    for &(a, b) in &config.pairs {
        row.extend(complex_cells(quantum_correlation(&q, a, b).map_err(|e| numeric(t, e))?));
    }
    Ok(row)
}

fn oscillator_rows(config: &ScenarioConfig, t: f64) -> Result<Rows, AppError> {
    let params = CouplingParams::resonant(config.lambda).map_err(|e| numeric(t, e))?;
    let wc = gaussian_wigner(Complex64::new(0.0, 0.0), config.classical_sigma).map_err(|e| numeric(t, e))?;
    let wq = fock_wigner(FockIndex(config.fock));
    let w = evolve_pair_wigner(&wc, &wq, &params, t);
    let origin = Complex64::new(0.0, 0.0);
    let a = w.alpha_marginal(&config.quadrature).evaluate(origin).map_err(|e| numeric(t, e))?;
    let b = w.beta_marginal(&config.quadrature).evaluate(origin).map_err(|e| numeric(t, e))?;
    Ok(vec![vec![Cell::Num(t), Cell::Num(config.lambda * t), Cell::Num(a), Cell::Num(b)]])
}

fn verify_table(config: &ScenarioConfig) -> Result<ResultTable, AppError> {
    let outcomes = verify::run(config.filter.as_deref());
    let mut table = ResultTable::new(strings(&["id", "criterion", "passed", "measured", "target"]));
    table.metadata = metadata(config);
    for o in &outcomes {
        table.push(vec![
            Cell::Num(f64::from(o.id)),
            Cell::Text(o.name.to_string()),
            Cell::Num(if o.passed { 1.0 } else { 0.0 }),
            Cell::Text(o.measured.clone()),
            Cell::Text(o.target.to_string()),
        ]);
    }
    Ok(table)
}
