//! Scenario configuration files.
//!
//! ```text
//! # comment
//! [scenario]
//! kind  = correlations          # phase-dist | quad-dist | moments | correlations
//!                               # | pfunction | compare | oscillators | verify
//! chi   = 1.0
//! times = range(0, 15, 301)     # or a list: 0, 0.5, 1
//! pairs = sz:a, sm:adag         # correlations / compare
//! grid  = range(-3.2, 3.2, 401) # abscissa for distributions
//!
//! [atom]
//! state = bloch                 # ground | phase | bloch
//! s     = 0.3, 0.0, -0.9
//!
//! [field]
//! kind  = gaussian              # delta (r0, phi0) | gaussian (r0, sigma)
//! r0    = 10
//! sigma = 1
//!
//! [quadrature]
//! relative_tolerance = 1e-10
//!
//! [output]
//! path = out.csv
//! ```
//!
//! Oscillator runs read `lambda`, `classical_sigma` and `fock` from
//! `[scenario]`; verify runs read `filter`.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use hybridwigner_core::hybrid_model::{FieldState, ObservableSymbol};
use hybridwigner_core::su2_wigner::SpinHalfState;
use hybridwigner_core::IntegrationSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    PhaseDist,
    QuadDist,
    Moments,
    Correlations,
    PFunction,
    Compare,
    Oscillators,
    Verify,
}

impl ScenarioKind {
    const ALL: [ScenarioKind; 8] = [
        Self::PhaseDist,
        Self::QuadDist,
        Self::Moments,
        Self::Correlations,
        Self::PFunction,
        Self::Compare,
        Self::Oscillators,
        Self::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PhaseDist => "phase-dist",
            Self::QuadDist => "quad-dist",
            Self::Moments => "moments",
            Self::Correlations => "correlations",
            Self::PFunction => "pfunction",
            Self::Compare => "compare",
            Self::Oscillators => "oscillators",
            Self::Verify => "verify",
        }
    }

    fn needs_physics(self) -> bool {
        !matches!(self, Self::Oscillators | Self::Verify)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomSpec {
    Ground,
    Phase,
    Bloch([f64; 3]),
}

impl AtomSpec {
    pub fn state(&self) -> SpinHalfState {
        match *self {
            Self::Ground => SpinHalfState::ground(),
            Self::Phase => SpinHalfState::phase(),
            Self::Bloch(s) => SpinHalfState::new(s).expect("validated at parse time"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub atom: AtomSpec,
    pub field: FieldState,
    pub chi: f64,
    pub times: Vec<f64>,
    pub grid: Option<Vec<f64>>,
    pub pairs: Vec<(ObservableSymbol, ObservableSymbol)>,
    pub quadrature: IntegrationSpec,
    pub output: Option<PathBuf>,
    pub lambda: f64,
    pub classical_sigma: f64,
    pub fock: u32,
    pub filter: Option<String>,
    /// `section.key = value` for every entry, in file order.
    pub echo: Vec<String>,
}

pub const DEFAULT_PAIRS: [(ObservableSymbol, ObservableSymbol); 2] = [
    (ObservableSymbol::SigmaZ, ObservableSymbol::A),
    (ObservableSymbol::SigmaMinus, ObservableSymbol::ADag),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based; 0 when the problem is a missing entry.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<Diagnostic>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SECTIONS: [(&str, &[&str]); 5] = [
    ("scenario", &["kind", "chi", "times", "grid", "pairs", "lambda", "classical_sigma", "fock", "filter"]),
    ("atom", &["state", "s"]),
    ("field", &["kind", "r0", "phi0", "sigma"]),
    ("quadrature", &["relative_tolerance", "absolute_tolerance", "max_subdivisions", "radial_cutoff_sigmas"]),
    ("output", &["path"]),
];

struct Entry {
    line: usize,
    raw: String,
}

struct Parser {
    entries: HashMap<(String, String), Entry>,
    section_lines: HashMap<String, usize>,
    errors: Vec<Diagnostic>,
}

impl Parser {
    fn error(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(Diagnostic { line, message: message.into() });
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn missing(&mut self, section: &str, key: &str) {
        let line = self.section_lines.get(section).copied().unwrap_or(0);
        self.error(line, format!("[{section}] missing required key `{key}`"));
    }

    fn number(&mut self, section: &str, key: &str) -> Option<f64> {
        let (line, raw) = {
            let e = self.get(section, key)?;
            (e.line, e.raw.clone())
        };
        match parse_number(&raw) {
            Some(v) => Some(v),
            None => {
                self.error(line, format!("[{section}] {key}: expected a number, got `{raw}`"));
                None
            }
        }
    }

    /// A number that must satisfy `ok`, described by `what` in diagnostics.
    fn checked(&mut self, section: &str, key: &str, what: &str, ok: impl Fn(f64) -> bool) -> Option<f64> {
        let v = self.number(section, key)?;
        if ok(v) {
            Some(v)
        } else {
            let line = self.get(section, key).map_or(0, |e| e.line);
            self.error(line, format!("[{section}] {key} must be {what}, got {v}"));
            None
        }
    }

    fn word(&self, section: &str, key: &str) -> Option<(usize, String)> {
        self.get(section, key).map(|e| (e.line, e.raw.trim().to_string()))
    }

    fn sequence(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let (line, raw) = {
            let e = self.get(section, key)?;
            (e.line, e.raw.clone())
        };
        match parse_sequence(&raw) {
            Ok(v) => {
                if v.windows(2).any(|w| !(w[1] > w[0])) {
                    self.error(line, format!("[{section}] {key} must be strictly increasing"));
                    return None;
                }
                Some(v)
            }
            Err(msg) => {
                self.error(line, format!("[{section}] {key}: {msg}"));
                None
            }
        }
    }
}

fn parse_number(raw: &str) -> Option<f64> {
    let v: f64 = raw.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// `range(start, stop, steps)` (inclusive, evenly spaced) or a comma list.
pub fn parse_sequence(raw: &str) -> Result<Vec<f64>, String> {
    let raw = raw.trim();
    if let Some(inner) = raw.strip_prefix("range(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("range needs (start, stop, steps), got `{raw}`"));
        }
        let (Some(a), Some(b)) = (parse_number(parts[0]), parse_number(parts[1])) else {
            return Err(format!("range bounds must be numbers, got `{raw}`"));
        };
        let steps: usize = parts[2].trim().parse().map_err(|_| format!("range steps must be an integer, got `{}`", parts[2].trim()))?;
        if steps < 1 {
            return Err("range steps must be >= 1".into());
        }
        if steps == 1 {
            return Ok(vec![a]);
        }
        if !(b > a) {
            return Err(format!("range needs stop > start, got `{raw}`"));
        }
        let h = (b - a) / (steps - 1) as f64;
        return Ok((0..steps).map(|k| if k == steps - 1 { b } else { a + h * k as f64 }).collect());
    }
    if raw.is_empty() {
        return Err("empty list".into());
    }
    raw.split(',')
        .map(|p| parse_number(p).ok_or_else(|| format!("expected a number, got `{}`", p.trim())))
        .collect()
}

fn parse_pair(raw: &str) -> Result<(ObservableSymbol, ObservableSymbol), String> {
    let (a, b) = raw.trim().split_once(':').ok_or_else(|| format!("expected atom:field, got `{}`", raw.trim()))?;
    let sym = |s: &str| ObservableSymbol::from_name(s.trim()).ok_or_else(|| format!("unknown observable `{}`", s.trim()));
    let (a, b) = (sym(a)?, sym(b)?);
    use hybridwigner_core::hybrid_model::{AtomFactor, FieldFactor};
    let ok = matches!(a.factors(), (g, FieldFactor::Identity) if g != AtomFactor::Identity)
        && matches!(b.factors(), (AtomFactor::Identity, f) if f != FieldFactor::Identity);
    if !ok {
        return Err(format!("`{}` is not an atomic:field pair", raw.trim()));
    }
    Ok((a, b))
}

fn tokenize(text: &str) -> Parser {
    let mut p = Parser {
        entries: HashMap::new(),
        section_lines: HashMap::new(),
        errors: Vec::new(),
    };
    let mut section: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|c| c.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                p.error(line, format!("unknown section [{name}]"));
                section = None;
                continue;
            }
            if p.section_lines.contains_key(&name) {
                p.error(line, format!("section [{name}] appears twice"));
            }
            p.section_lines.entry(name.clone()).or_insert(line);
            section = Some(name);
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            p.error(line, format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let key = key.trim().to_string();
        let Some(sec) = section.clone() else {
            p.error(line, format!("key `{key}` outside any section"));
            continue;
        };
        let allowed = SECTIONS.iter().find(|(s, _)| *s == sec).map_or(&[][..], |(_, k)| *k);
        if !allowed.contains(&key.as_str()) {
            p.error(line, format!("[{sec}] unknown key `{key}`"));
            continue;
        }
        let k = (sec.clone(), key.clone());
        if let Some(prev) = p.entries.get(&k) {
            let prev = prev.line;
            p.error(line, format!("[{sec}] duplicate key `{key}` (first set on line {prev})"));
            continue;
        }
        p.entries.insert(k, Entry { line, raw: value.trim().to_string() });
    }
    p
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let mut p = tokenize(text);

    let scenario = match p.word("scenario", "kind") {
        None => {
            p.missing("scenario", "kind");
            None
        }
        Some((line, w)) => {
            let k = ScenarioKind::ALL.into_iter().find(|k| k.name() == w);
            if k.is_none() {
                let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                p.error(line, format!("[scenario] kind: unknown scenario `{w}` (expected one of {})", names.join(", ")));
            }
            k
        }
    };
    let physics = scenario.is_none_or(|k| k.needs_physics());

    let chi = if p.get("scenario", "chi").is_some() {
        p.number("scenario", "chi")
    } else if physics {
        p.missing("scenario", "chi");
        None
    } else {
        Some(1.0)
    };

    let times = match p.get("scenario", "times") {
        Some(_) => p.sequence("scenario", "times").and_then(|t| {
            if t.iter().any(|x| *x < 0.0) {
                let line = p.get("scenario", "times").map_or(0, |e| e.line);
                p.error(line, "[scenario] times must be >= 0");
                None
            } else {
                Some(t)
            }
        }),
        None if scenario != Some(ScenarioKind::Verify) => {
            p.missing("scenario", "times");
            None
        }
        None => Some(Vec::new()),
    };
    let grid = if p.get("scenario", "grid").is_some() {
        p.sequence("scenario", "grid").map(Some)
    } else {
        Some(None)
    };

    let pairs = match p.get("scenario", "pairs").map(|e| (e.line, e.raw.clone())) {
        None => Some(DEFAULT_PAIRS.to_vec()),
        Some((line, raw)) => {
            let parsed: Result<Vec<_>, String> = raw.split(',').map(parse_pair).collect();
            match parsed {
                Ok(v) => Some(v),
                Err(msg) => {
                    p.error(line, format!("[scenario] pairs: {msg}"));
                    None
                }
            }
        }
    };

    let lambda = if p.get("scenario", "lambda").is_some() {
        p.checked("scenario", "lambda", "non-zero", |v| v != 0.0)
    } else if scenario == Some(ScenarioKind::Oscillators) {
        p.missing("scenario", "lambda");
        None
    } else {
        Some(1.0)
    };
    let classical_sigma = if p.get("scenario", "classical_sigma").is_some() {
        p.checked("scenario", "classical_sigma", "> 0", |v| v > 0.0)
    } else {
        Some(1.0)
    };
    let fock = match p.get("scenario", "fock").map(|e| (e.line, e.raw.clone())) {
        None => Some(1),
        Some((line, raw)) => match raw.trim().parse::<u32>() {
            Ok(n) if n <= 20 => Some(n),
            _ => {
                p.error(line, format!("[scenario] fock must be an integer in 0..=20, got `{raw}`"));
                None
            }
        },
    };
    let filter = p.word("scenario", "filter").map(|(_, w)| w);

    let atom = match p.word("atom", "state") {
        None if physics => {
            p.missing("atom", "state");
            None
        }
        None => Some(AtomSpec::Ground),
        Some((line, w)) => match w.as_str() {
            "ground" => Some(AtomSpec::Ground),
            "phase" => Some(AtomSpec::Phase),
            "bloch" => match p.get("atom", "s").map(|e| (e.line, e.raw.clone())) {
                None => {
                    p.missing("atom", "s");
                    None
                }
                Some((sl, raw)) => match parse_sequence_unordered(&raw) {
                    Some(v) if v.len() == 3 && (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() <= 1.0 + 1e-12 => {
                        Some(AtomSpec::Bloch([v[0], v[1], v[2]]))
                    }
                    _ => {
                        p.error(sl, format!("[atom] s must be three numbers with |s| <= 1, got `{raw}`"));
                        None
                    }
                },
            },
            other => {
                p.error(line, format!("[atom] state: expected ground, phase or bloch, got `{other}`"));
                None
            }
        },
    };
    if let (Some(e), Some(AtomSpec::Ground | AtomSpec::Phase)) = (p.get("atom", "s"), atom) {
        let line = e.line;
        p.error(line, "[atom] s is only used with state = bloch");
    }

    let field = match p.word("field", "kind") {
        None if physics => {
            p.missing("field", "kind");
            None
        }
        None => Some(FieldState::DeltaAmplitude { r0: 0.0, phi0: 0.0 }),
        Some((line, w)) => {
            let r0 = if p.get("field", "r0").is_some() {
                p.checked("field", "r0", ">= 0", |v| v >= 0.0)
            } else {
                p.missing("field", "r0");
                None
            };
            match w.as_str() {
                "delta" => {
                    if let Some(e) = p.get("field", "sigma") {
                        let l = e.line;
                        p.error(l, "[field] sigma is only used with kind = gaussian");
                    }
                    let phi0 = if p.get("field", "phi0").is_some() { p.number("field", "phi0") } else { Some(0.0) };
                    match (r0, phi0) {
                        (Some(r0), Some(phi0)) => Some(FieldState::DeltaAmplitude { r0, phi0 }),
                        _ => None,
                    }
                }
                "gaussian" => {
                    if let Some(e) = p.get("field", "phi0") {
                        let l = e.line;
                        p.error(l, "[field] phi0 is only used with kind = delta");
                    }
                    let sigma = if p.get("field", "sigma").is_some() {
                        p.checked("field", "sigma", "> 0", |v| v > 0.0)
                    } else {
                        p.missing("field", "sigma");
                        None
                    };
                    match (r0, sigma) {
                        (Some(r0), Some(sigma)) => Some(FieldState::GaussianAmplitude { r0, sigma }),
                        _ => None,
                    }
                }
                other => {
                    p.error(line, format!("[field] kind: expected delta or gaussian, got `{other}`"));
                    None
                }
            }
        }
    };
    if scenario == Some(ScenarioKind::QuadDist) && matches!(field, Some(FieldState::DeltaAmplitude { .. })) {
        let line = p.word("field", "kind").map_or(0, |(l, _)| l);
        p.error(line, "[field] quad-dist needs kind = gaussian");
    }

    let quadrature = {
        let d = IntegrationSpec::default();
        let rel = if p.get("quadrature", "relative_tolerance").is_some() {
            p.checked("quadrature", "relative_tolerance", "> 0", |v| v > 0.0)
        } else {
            Some(d.relative_tolerance())
        };
        let abs = if p.get("quadrature", "absolute_tolerance").is_some() {
            p.checked("quadrature", "absolute_tolerance", "> 0", |v| v > 0.0)
        } else {
            Some(d.absolute_tolerance())
        };
        let max_sub = match p.get("quadrature", "max_subdivisions").map(|e| (e.line, e.raw.clone())) {
            None => Some(d.max_subdivisions()),
            Some((line, raw)) => match raw.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Some(n),
                _ => {
                    p.error(line, format!("[quadrature] max_subdivisions must be a positive integer, got `{raw}`"));
                    None
                }
            },
        };
        let cutoff = if p.get("quadrature", "radial_cutoff_sigmas").is_some() {
            p.checked("quadrature", "radial_cutoff_sigmas", ">= 6", |v| v >= 6.0)
        } else {
            Some(d.radial_cutoff_sigmas())
        };
        match (rel, abs, max_sub, cutoff) {
            (Some(r), Some(a), Some(m), Some(c)) => IntegrationSpec::new(r, a, m, c).ok(),
            _ => None,
        }
    };

    let output = p.word("output", "path").map(|(_, w)| PathBuf::from(w));

    let mut echo: Vec<(usize, String)> = p.entries.iter().map(|((s, k), e)| (e.line, format!("{s}.{k} = {}", e.raw))).collect();
    echo.sort();

    if !p.errors.is_empty() {
        p.errors.sort_by_key(|d| d.line);
        return Err(ConfigErrors(p.errors));
    }
    match (scenario, atom, field, chi, times, grid, pairs, quadrature, lambda, classical_sigma, fock) {
        (Some(scenario), Some(atom), Some(field), Some(chi), Some(times), Some(grid), Some(pairs), Some(quadrature), Some(lambda), Some(classical_sigma), Some(fock)) => {
            Ok(ScenarioConfig {
                scenario,
                atom,
                field,
                chi,
                times,
                grid,
                pairs,
                quadrature,
                output,
                lambda,
                classical_sigma,
                fock,
                filter,
                echo: echo.into_iter().map(|(_, s)| s).collect(),
            })
        }
        _ => Err(ConfigErrors(vec![Diagnostic { line: 0, message: "invalid configuration".into() }])),
    }
}

fn parse_sequence_unordered(raw: &str) -> Option<Vec<f64>> {
    raw.split(',').map(parse_number).collect()
}
