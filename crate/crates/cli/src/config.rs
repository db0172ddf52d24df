//! Scenario files.
//!
//! The grammar is documented in `CONFIG.md` next to this crate's manifest.
//! Every semantic check reports the dotted field name and the line it came
//! from.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use twocav::algebra::TwoPhotonCase;
use twocav::fock::{build_basis, check_density, CMatrix, C64};

use crate::error::ConfigError;

pub const CONFIG_VERSION: i64 = 1;
pub const DEFAULT_TRUNCATION: usize = 3;
/// Largest truncation accepted; the generator has `dim²` rows.
pub const MAX_TRUNCATION: usize = 6;
pub const MAX_STEPS: usize = 100_000;
/// Normalization slack for `a² + b² + c² = 1`.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: Spanned<i64>,
    preset: Option<String>,
    decay_rate: Spanned<f64>,
    truncation: Option<Spanned<i64>>,
    initial_state: Spanned<RawInitial>,
    time_grid: Spanned<RawGrid>,
    outputs: Option<RawOutputs>,
    sweep: Option<Spanned<RawSweep>>,
    compare: Option<RawCompare>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Spanned<String>,
    a: Option<Spanned<f64>>,
    b: Option<Spanned<f64>>,
    c: Option<Spanned<f64>>,
    n1: Option<Spanned<i64>>,
    n2: Option<Spanned<i64>>,
    terms: Option<Spanned<Vec<[f64; 6]>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_max: Spanned<f64>,
    steps: Spanned<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    quantities: Spanned<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    a: Option<Spanned<Vec<f64>>>,
    abc: Option<Spanned<Vec<[f64; 3]>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompare {
    numeric_decay_rate: Option<Spanned<f64>>,
}

/// Requested output quantities, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    Density,
    Concurrence,
    Estar,
    Spectrum,
    Dfs,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Density => "density",
            Quantity::Concurrence => "concurrence",
            Quantity::Estar => "estar",
            Quantity::Spectrum => "spectrum",
            Quantity::Dfs => "dfs",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Quantity::Density,
            Quantity::Concurrence,
            Quantity::Estar,
            Quantity::Spectrum,
            Quantity::Dfs,
        ]
        .into_iter()
        .find(|q| q.name() == s)
    }
}

/// One density-matrix element `ρ[(n1,n2),(m1,m2)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CustomTerm {
    pub ket: (usize, usize),
    pub bra: (usize, usize),
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    SinglePhoton { a: f64 },
    TwoPhoton { a: f64, b: f64, c: f64 },
    Fock { n1: usize, n2: usize },
    Custom(Vec<CustomTerm>),
}

impl InitialState {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialState::SinglePhoton { .. } => "single_photon",
            InitialState::TwoPhoton { .. } => "two_photon",
            InitialState::Fock { .. } => "fock",
            InitialState::Custom(_) => "custom",
        }
    }

    /// Largest total photon number present initially.
    pub fn photons(&self) -> usize {
        match self {
            InitialState::SinglePhoton { .. } => 1,
            InitialState::TwoPhoton { .. } => 2,
            InitialState::Fock { n1, n2 } => n1 + n2,
            InitialState::Custom(terms) => terms
                .iter()
                .map(|t| (t.ket.0 + t.ket.1).max(t.bra.0 + t.bra.1))
                .max()
                .unwrap_or(0),
        }
    }

    /// Whether the state stays inside `{|00⟩, |01⟩, |10⟩}`. `|11⟩` does not:
    /// the damping couples it to `|20⟩` and `|02⟩`.
    pub fn is_two_qubit(&self) -> bool {
        self.photons() <= 1
    }

    /// The matching closed-form two-photon case, if any.
    pub fn two_photon_case(&self) -> Option<TwoPhotonCase> {
        let InitialState::TwoPhoton { a, b, c } = *self else {
            return None;
        };
        [TwoPhotonCase::Product, TwoPhotonCase::DarkState, TwoPhotonCase::BrightState]
            .into_iter()
            .find(|case| {
                let (x, y, z) = case.amplitudes();
                (a - x).abs() <= 1e-12 && (b - y).abs() <= 1e-12 && (c - z).abs() <= 1e-12
            })
    }
}

/// A single scenario inside a (possibly trivial) sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    /// Column suffix; `None` when there is no sweep.
    pub label: Option<String>,
    pub initial: InitialState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    /// Final dimensionless time `ςt`.
    pub t_max: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// `steps + 1` equally spaced values of `ςt` from 0 to `t_max`.
    pub fn points(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|k| k as f64 * self.t_max / self.steps as f64)
            .collect()
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub version: i64,
    pub preset: Option<String>,
    pub decay_rate: f64,
    pub truncation: usize,
    pub members: Vec<Member>,
    pub time_grid: TimeGrid,
    pub outputs: BTreeSet<Quantity>,
    /// Rate used by the numerical route; equals `decay_rate` unless a
    /// comparison fixture overrides it.
    pub numeric_decay_rate: f64,
}

struct Ctx<'a> {
    origin: &'a str,
    source: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.source.len());
        self.source[..end].matches('\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, field: &str, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError::new(self.origin, Some(self.line(span)), field, message))
    }
}

/// Parses and validates a scenario. `truncation_override` replaces the
/// file's `truncation` key.
pub fn parse(source: &str, origin: &str, truncation_override: Option<usize>) -> Result<ScenarioConfig, ConfigError> {
    let ctx = Ctx { origin, source };
    let raw: RawConfig = toml::from_str(source).map_err(|e| {
        let line = e.span().map(|s| ctx.line(s));
        ConfigError::new(origin, line, "", e.message().trim().to_string())
    })?;

    if *raw.version.get_ref() != CONFIG_VERSION {
        return ctx.err(
            raw.version.span(),
            "version",
            format!("unsupported version {}, expected {CONFIG_VERSION}", raw.version.get_ref()),
        );
    }

    let decay_rate = *raw.decay_rate.get_ref();
    if !(decay_rate > 0.0 && decay_rate.is_finite()) {
        return ctx.err(raw.decay_rate.span(), "decay_rate", format!("must be positive and finite, got {decay_rate}"));
    }

    let time_grid = grid(&ctx, raw.time_grid.get_ref())?;
    let base = initial_state(&ctx, &raw.initial_state)?;
    let members = match &raw.sweep {
        None => vec![Member {
            label: None,
            initial: base.ok_or_else(|| {
                ConfigError::new(origin, Some(ctx.line(raw.initial_state.span())), "initial_state", "amplitudes are required without a [sweep]")
            })?,
        }],
        Some(sweep) => sweep_members(&ctx, &raw.initial_state, sweep)?,
    };

    let photons = members.iter().map(|m| m.initial.photons()).max().unwrap_or(0);
    let truncation = match (truncation_override, &raw.truncation) {
        (Some(n), _) => {
            if n > MAX_TRUNCATION {
                return Err(ConfigError::new(origin, None, "--truncation", format!("must be at most {MAX_TRUNCATION}, got {n}")));
            }
            if n < photons {
                return Err(ConfigError::new(
                    origin,
                    None,
                    "--truncation",
                    format!("initial state has {photons} photons, truncation {n} is too small"),
                ));
            }
            n
        }
        (None, Some(t)) => {
            let n = *t.get_ref();
            if n < 0 || n as usize > MAX_TRUNCATION {
                return ctx.err(t.span(), "truncation", format!("must be in 0..={MAX_TRUNCATION}, got {n}"));
            }
            if (n as usize) < photons {
                return ctx.err(t.span(), "truncation", format!("initial state has {photons} photons, truncation {n} is too small"));
            }
            n as usize
        }
        (None, None) => DEFAULT_TRUNCATION.max(photons),
    };

    for m in &members {
        if let InitialState::Custom(terms) = &m.initial {
            custom_density(terms, truncation).map_err(|msg| {
                ConfigError::new(origin, Some(ctx.line(raw.initial_state.span())), "initial_state.terms", msg)
            })?;
        }
    }

    let outputs = match &raw.outputs {
        None => BTreeSet::from([Quantity::Density]),
        Some(o) => {
            let mut set = BTreeSet::new();
            for q in o.quantities.get_ref() {
                match Quantity::parse(q) {
                    Some(q) => {
                        set.insert(q);
                    }
                    None => {
                        return ctx.err(
                            o.quantities.span(),
                            "outputs.quantities",
                            format!("unknown quantity `{q}`; expected density, concurrence, estar, spectrum or dfs"),
                        )
                    }
                }
            }
            if set.is_empty() {
                return ctx.err(o.quantities.span(), "outputs.quantities", "at least one quantity is required");
            }
            if set.contains(&Quantity::Concurrence) && !members.iter().all(|m| m.initial.is_two_qubit()) {
                return ctx.err(
                    o.quantities.span(),
                    "outputs.quantities",
                    "concurrence needs states with at most one photon; use estar for two-photon states",
                );
            }
            if set.contains(&Quantity::Estar) && members.iter().any(|m| matches!(m.initial, InitialState::Custom(_))) {
                return ctx.err(o.quantities.span(), "outputs.quantities", "estar needs a pure initial state, not kind = \"custom\"");
            }
            set
        }
    };

    let numeric_decay_rate = match raw.compare.as_ref().and_then(|c| c.numeric_decay_rate.as_ref()) {
        None => decay_rate,
        Some(r) => {
            let v = *r.get_ref();
            if !(v > 0.0 && v.is_finite()) {
                return ctx.err(r.span(), "compare.numeric_decay_rate", format!("must be positive and finite, got {v}"));
            }
            v
        }
    };

    Ok(ScenarioConfig {
        version: *raw.version.get_ref(),
        preset: raw.preset,
        decay_rate,
        truncation,
        members,
        time_grid,
        outputs,
        numeric_decay_rate,
    })
}

fn grid(ctx: &Ctx, g: &RawGrid) -> Result<TimeGrid, ConfigError> {
    let t_max = *g.t_max.get_ref();
    if !(t_max > 0.0 && t_max.is_finite()) {
        return ctx.err(g.t_max.span(), "time_grid.t_max", format!("must be positive and finite, got {t_max}"));
    }
    let steps = *g.steps.get_ref();
    if steps < 1 || steps as usize > MAX_STEPS {
        return ctx.err(g.steps.span(), "time_grid.steps", format!("must be in 1..={MAX_STEPS}, got {steps}"));
    }
    Ok(TimeGrid {
        t_max,
        steps: steps as usize,
    })
}

fn amplitude(ctx: &Ctx, v: &Spanned<f64>, field: &str) -> Result<f64, ConfigError> {
    let x = *v.get_ref();
    if !x.is_finite() {
        return ctx.err(v.span(), field, format!("must be finite, got {x}"));
    }
    Ok(x)
}

fn photon_number(ctx: &Ctx, v: &Option<Spanned<i64>>, field: &str, table: Range<usize>) -> Result<usize, ConfigError> {
    let Some(v) = v else {
        return ctx.err(table, field, "is required for kind = \"fock\"");
    };
    let n = *v.get_ref();
    if n < 0 {
        return ctx.err(v.span(), field, format!("must be non-negative, got {n}"));
    }
    Ok(n as usize)
}

fn check_single(ctx: &Ctx, a: f64, span: Range<usize>, field: &str) -> Result<(), ConfigError> {
    if a.abs() > 1.0 {
        return ctx.err(span, field, format!("single_photon requires |a| <= 1, got {a}"));
    }
    Ok(())
}

fn check_abc(ctx: &Ctx, (a, b, c): (f64, f64, f64), span: Range<usize>, field: &str) -> Result<(), ConfigError> {
    let norm = a * a + b * b + c * c;
    if (norm - 1.0).abs() > AMPLITUDE_TOLERANCE {
        return ctx.err(span, field, format!("two_photon requires a² + b² + c² = 1, got {norm}"));
    }
    Ok(())
}

/// The `[initial_state]` table; `None` when amplitudes come from a sweep.
fn initial_state(ctx: &Ctx, raw: &Spanned<RawInitial>) -> Result<Option<InitialState>, ConfigError> {
    let table = raw.span();
    let r = raw.get_ref();
    let kind = r.kind.get_ref().as_str();
    let allowed: &[&str] = match kind {
        "single_photon" => &["a"],
        "two_photon" => &["a", "b", "c"],
        "fock" => &["n1", "n2"],
        "custom" => &["terms"],
        other => {
            return ctx.err(
                r.kind.span(),
                "initial_state.kind",
                format!("unknown kind `{other}`; expected single_photon, two_photon, fock or custom"),
            )
        }
    };
    let present = [
        ("a", r.a.as_ref().map(|s| s.span())),
        ("b", r.b.as_ref().map(|s| s.span())),
        ("c", r.c.as_ref().map(|s| s.span())),
        ("n1", r.n1.as_ref().map(|s| s.span())),
        ("n2", r.n2.as_ref().map(|s| s.span())),
        ("terms", r.terms.as_ref().map(|s| s.span())),
    ];
    for (key, span) in present {
        if let Some(span) = span {
            if !allowed.contains(&key) {
                return ctx.err(span, &format!("initial_state.{key}"), format!("not used by kind = \"{kind}\""));
            }
        }
    }
    match kind {
        "single_photon" => match &r.a {
            None => Ok(None),
            Some(a) => {
                let x = amplitude(ctx, a, "initial_state.a")?;
                check_single(ctx, x, a.span(), "initial_state.a")?;
                Ok(Some(InitialState::SinglePhoton { a: x }))
            }
        },
        "two_photon" => match (&r.a, &r.b, &r.c) {
            (None, None, None) => Ok(None),
            (Some(a), Some(b), Some(c)) => {
                let abc = (
                    amplitude(ctx, a, "initial_state.a")?,
                    amplitude(ctx, b, "initial_state.b")?,
                    amplitude(ctx, c, "initial_state.c")?,
                );
                check_abc(ctx, abc, a.span(), "initial_state.a")?;
                Ok(Some(InitialState::TwoPhoton {
                    a: abc.0,
                    b: abc.1,
                    c: abc.2,
                }))
            }
            _ => ctx.err(table, "initial_state", "two_photon needs all of a, b and c"),
        },
        "fock" => Ok(Some(InitialState::Fock {
            n1: photon_number(ctx, &r.n1, "initial_state.n1", table.clone())?,
            n2: photon_number(ctx, &r.n2, "initial_state.n2", table)?,
        })),
        _ => {
            let Some(terms) = &r.terms else {
                return ctx.err(table, "initial_state.terms", "is required for kind = \"custom\"");
            };
            let mut out = Vec::new();
            for row in terms.get_ref() {
                let mut labels = [0usize; 4];
                for (k, x) in row[..4].iter().enumerate() {
                    if !(*x >= 0.0 && x.fract() == 0.0 && *x <= 64.0) {
                        return ctx.err(terms.span(), "initial_state.terms", format!("photon labels must be small non-negative integers, got {x}"));
                    }
                    labels[k] = *x as usize;
                }
                if !(row[4].is_finite() && row[5].is_finite()) {
                    return ctx.err(terms.span(), "initial_state.terms", "coefficients must be finite");
                }
                out.push(CustomTerm {
                    ket: (labels[0], labels[1]),
                    bra: (labels[2], labels[3]),
                    value: C64::new(row[4], row[5]),
                });
            }
            if out.is_empty() {
                return ctx.err(terms.span(), "initial_state.terms", "at least one term is required");
            }
            Ok(Some(InitialState::Custom(out)))
        }
    }
}

fn sweep_members(ctx: &Ctx, initial: &Spanned<RawInitial>, sweep: &Spanned<RawSweep>) -> Result<Vec<Member>, ConfigError> {
    let kind = initial.get_ref().kind.get_ref().as_str();
    let s = sweep.get_ref();
    match (&s.a, &s.abc) {
        (Some(a), None) => {
            if kind != "single_photon" {
                return ctx.err(a.span(), "sweep.a", "requires initial_state.kind = \"single_photon\"");
            }
            if initial.get_ref().a.is_some() {
                return ctx.err(a.span(), "sweep.a", "initial_state.a must be omitted when sweeping a");
            }
            if a.get_ref().is_empty() {
                return ctx.err(a.span(), "sweep.a", "must not be empty");
            }
            a.get_ref()
                .iter()
                .map(|&x| {
                    if !x.is_finite() {
                        return ctx.err(a.span(), "sweep.a", format!("must be finite, got {x}"));
                    }
                    check_single(ctx, x, a.span(), "sweep.a")?;
                    Ok(Member {
                        label: Some(format!("a={x}")),
                        initial: InitialState::SinglePhoton { a: x },
                    })
                })
                .collect()
        }
        (None, Some(abc)) => {
            if kind != "two_photon" {
                return ctx.err(abc.span(), "sweep.abc", "requires initial_state.kind = \"two_photon\"");
            }
            let r = initial.get_ref();
            if r.a.is_some() || r.b.is_some() || r.c.is_some() {
                return ctx.err(abc.span(), "sweep.abc", "initial_state.a, b and c must be omitted when sweeping abc");
            }
            if abc.get_ref().is_empty() {
                return ctx.err(abc.span(), "sweep.abc", "must not be empty");
            }
            abc.get_ref()
                .iter()
                .map(|&[a, b, c]| {
                    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                        return ctx.err(abc.span(), "sweep.abc", "amplitudes must be finite");
                    }
                    check_abc(ctx, (a, b, c), abc.span(), "sweep.abc")?;
                    Ok(Member {
                        label: Some(format!("a={a} b={b} c={c}")),
                        initial: InitialState::TwoPhoton { a, b, c },
                    })
                })
                .collect()
        }
        (Some(_), Some(_)) => ctx.err(sweep.span(), "sweep", "set either a or abc, not both"),
        (None, None) => ctx.err(sweep.span(), "sweep", "needs a or abc"),
    }
}

/// Hermitian matrix from custom terms; each term also sets its mirror.
pub fn custom_density(terms: &[CustomTerm], truncation: usize) -> Result<CMatrix, String> {
    let basis = build_basis(truncation);
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    let mut set = vec![false; d * d];
    for t in terms {
        let i = basis
            .index(t.ket.0, t.ket.1)
            .ok_or_else(|| format!("label |{}{}⟩ exceeds truncation {truncation}", t.ket.0, t.ket.1))?;
        let j = basis
            .index(t.bra.0, t.bra.1)
            .ok_or_else(|| format!("label ⟨{}{}| exceeds truncation {truncation}", t.bra.0, t.bra.1))?;
        for (r, c, v) in [(i, j, t.value), (j, i, t.value.conj())] {
            if set[r * d + c] && (m[(r, c)] - v).norm() > 1e-12 {
                let (k, b) = (basis.labels(r), basis.labels(c));
                return Err(format!("conflicting values for ρ[({},{}),({},{})]", k.0, k.1, b.0, b.1));
            }
            m[(r, c)] = v;
            set[r * d + c] = true;
        }
    }
    check_density(&m).map_err(|e| e.to_string())?;
    Ok(m)
}
