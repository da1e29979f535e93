//! The experiment spec file: a flat `key = value` format with one
//! `[config <name>]` section per retrieval configuration.
//!
//! Global keys: `chi`, `ell`, `c`, `erasures`, `message_counts` (comma
//! list), `trials`, `seed`, `include_oracle`, `metric`. Config keys:
//! `dynamic`, `activation`, `alpha`, `beta`, `mu`, `gamma`, `criteria`
//! (comma list of iter/conv/eqsc/clq), `max_iters`. `#` starts a comment.
//!
//! Every parse or validation failure carries the offending line number.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use gbnn::{
    ActivationRule, Criterion, DynamicRule, GlskoParams, GwstaParams, NetworkShape,
    RetrievalConfig,
};
use thiserror::Error;

/// How a trial is judged against the probed message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// The final active set must equal the message's fanal set exactly;
    /// ambiguous output counts as an error.
    Strict,
    /// The final active set must contain the message's fanal set
    /// ("correct or ambiguous, but not wrong").
    Lenient,
}

/// A retrieval configuration plus its spec-file section name.
#[derive(Debug, Clone)]
pub struct NamedConfig {
    pub name: String,
    pub retrieval: RetrievalConfig,
}

/// A full benchmark specification.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub shape: NetworkShape,
    /// Order c of every stored message.
    pub order: usize,
    /// Segments erased from each probe.
    pub erasures: usize,
    /// Message counts to sweep, strictly increasing.
    pub message_counts: Vec<usize>,
    /// Monte Carlo trials per (config, count) point.
    pub trials: usize,
    /// Master seed; every stream below it is derived deterministically.
    pub seed: u64,
    pub configs: Vec<NamedConfig>,
    /// Also run the brute-force maximum-likelihood baseline.
    pub include_oracle: bool,
    pub metric: Metric,
}

impl ExperimentSpec {
    /// Non-fatal observations about the configs (e.g. a stopping criterion
    /// that can never fire under the chosen activation rule).
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for config in &self.configs {
            if let Ok(warnings) = config.retrieval.validate() {
                for w in warnings {
                    out.push(format!("config `{}`: {w}", config.name));
                }
            }
        }
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub struct SpecError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl SpecError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        SpecError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        SpecError { line: None, message: message.into() }
    }
}

/// Parses and validates a spec file.
pub fn parse_spec(path: &Path) -> Result<ExperimentSpec, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpecError::global(format!("cannot read {}: {e}", path.display())))?;
    parse_spec_str(&text)
}

const GLOBAL_KEYS: &[&str] = &[
    "chi", "ell", "c", "erasures", "message_counts", "trials", "seed", "include_oracle", "metric",
];
const CONFIG_KEYS: &[&str] =
    &["dynamic", "activation", "alpha", "beta", "mu", "gamma", "criteria", "max_iters"];

#[derive(Debug, Default)]
struct Section {
    name: String,
    line: usize,
    entries: HashMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }
}

/// Parses a spec from its text form; line numbers in errors are 1-based.
pub fn parse_spec_str(text: &str) -> Result<ExperimentSpec, SpecError> {
    let mut globals = Section::default();
    let mut sections: Vec<Section> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| SpecError::at(line_no, "unterminated section header"))?
                .trim();
            let name = inner
                .strip_prefix("config")
                .ok_or_else(|| {
                    SpecError::at(line_no, format!("unknown section `[{inner}]`, expected `[config <name>]`"))
                })?
                .trim();
            if name.is_empty() {
                return Err(SpecError::at(line_no, "config section needs a name"));
            }
            if !name.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)) {
                return Err(SpecError::at(
                    line_no,
                    format!("config name `{name}` may only use letters, digits, `.`, `_`, `-`"),
                ));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(SpecError::at(line_no, format!("duplicate config name `{name}`")));
            }
            sections.push(Section { name: name.to_string(), line: line_no, entries: HashMap::new() });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| SpecError::at(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        match sections.last_mut() {
            None => {
                if !GLOBAL_KEYS.contains(&key.as_str()) {
                    return Err(SpecError::at(line_no, format!("unknown key `{key}`")));
                }
                if globals.entries.insert(key.clone(), (line_no, value)).is_some() {
                    return Err(SpecError::at(line_no, format!("duplicate key `{key}`")));
                }
            }
            Some(section) => {
                if !CONFIG_KEYS.contains(&key.as_str()) {
                    return Err(SpecError::at(
                        line_no,
                        format!("unknown key `{key}` in config `{}`", section.name),
                    ));
                }
                if section.entries.insert(key.clone(), (line_no, value)).is_some() {
                    return Err(SpecError::at(line_no, format!("duplicate key `{key}`")));
                }
            }
        }
    }

    assemble(globals, sections)
}

fn assemble(mut globals: Section, sections: Vec<Section>) -> Result<ExperimentSpec, SpecError> {
    let missing: Vec<&str> = ["chi", "ell", "c", "erasures", "message_counts"]
        .into_iter()
        .filter(|k| !globals.entries.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(SpecError::global(format!("missing keys: {}", missing.join(", "))));
    }

    let (chi_line, chi) = parse_number::<usize>(globals.take("chi").unwrap())?;
    let (_, ell) = parse_number::<usize>(globals.take("ell").unwrap())?;
    let (order_line, order) = parse_number::<usize>(globals.take("c").unwrap())?;
    let (erasures_line, erasures) = parse_number::<usize>(globals.take("erasures").unwrap())?;

    let shape =
        NetworkShape::new(chi, ell).map_err(|e| SpecError::at(chi_line, e.to_string()))?;
    if order < 2 || order > shape.clusters() {
        return Err(SpecError::at(
            order_line,
            format!("c must lie in [2, chi]; got {order} with chi = {}", shape.clusters()),
        ));
    }
    if erasures >= order {
        return Err(SpecError::at(
            erasures_line,
            format!("erasures must be smaller than c ({order}), got {erasures}"),
        ));
    }

    let (counts_line, counts_raw) = globals.take("message_counts").unwrap();
    let mut message_counts = Vec::new();
    for piece in counts_raw.split(',') {
        let n: usize = piece.trim().parse().map_err(|_| {
            SpecError::at(counts_line, format!("bad message count `{}`", piece.trim()))
        })?;
        if n == 0 {
            return Err(SpecError::at(counts_line, "message counts must be positive"));
        }
        if let Some(&last) = message_counts.last() {
            if n <= last {
                return Err(SpecError::at(counts_line, "message counts must be strictly increasing"));
            }
        }
        message_counts.push(n);
    }
    if message_counts.is_empty() {
        return Err(SpecError::at(counts_line, "message_counts must not be empty"));
    }

    let trials = match globals.take("trials") {
        Some(entry) => {
            let (line, value) = parse_number::<usize>(entry)?;
            if value == 0 {
                return Err(SpecError::at(line, "trials must be at least 1"));
            }
            value
        }
        None => 2000,
    };
    let seed = match globals.take("seed") {
        Some(entry) => parse_number::<u64>(entry)?.1,
        None => 0,
    };
    let include_oracle = match globals.take("include_oracle") {
        Some((line, value)) => parse_bool(line, &value)?,
        None => false,
    };
    let metric = match globals.take("metric") {
        Some((line, value)) => match value.to_ascii_lowercase().as_str() {
            "strict" => Metric::Strict,
            "lenient" => Metric::Lenient,
            other => {
                return Err(SpecError::at(line, format!("metric must be strict or lenient, got `{other}`")))
            }
        },
        None => Metric::Strict,
    };

    let mut configs = Vec::new();
    for section in sections {
        configs.push(assemble_config(section)?);
    }
    if configs.is_empty() && !include_oracle {
        return Err(SpecError::global(
            "nothing to run: add a [config <name>] section or include_oracle = true",
        ));
    }

    Ok(ExperimentSpec {
        shape,
        order,
        erasures,
        message_counts,
        trials,
        seed,
        configs,
        include_oracle,
        metric,
    })
}

fn assemble_config(mut section: Section) -> Result<NamedConfig, SpecError> {
    let header = section.line;
    let name = section.name.clone();
    if name.eq_ignore_ascii_case("ml") {
        return Err(SpecError::at(header, "the name `ML` is reserved for the oracle row"));
    }

    let (dyn_line, dyn_raw) = section
        .take("dynamic")
        .ok_or_else(|| SpecError::at(header, format!("config `{name}` needs a dynamic rule")))?;
    let dynamic: DynamicRule =
        dyn_raw.parse().map_err(|e: String| SpecError::at(dyn_line, e))?;

    let (act_line, act_raw) = section
        .take("activation")
        .ok_or_else(|| SpecError::at(header, format!("config `{name}` needs an activation rule")))?;
    let alpha = section.take("alpha").map(parse_number::<usize>).transpose()?;
    let beta = section.take("beta").map(parse_number::<usize>).transpose()?;
    let mu = section.take("mu").map(parse_number::<usize>).transpose()?;

    let activation = match act_raw.to_ascii_lowercase().as_str() {
        "gwta" => {
            if let Some((line, _)) = alpha {
                return Err(SpecError::at(line, "gwta takes no alpha (it is gwsta with alpha = 1)"));
            }
            forbid(&name, "beta", &beta)?;
            forbid(&name, "mu", &mu)?;
            ActivationRule::Gwsta(GwstaParams::gwta())
        }
        "gwsta" => {
            let (_, alpha) = alpha
                .ok_or_else(|| SpecError::at(act_line, format!("config `{name}`: gwsta needs alpha")))?;
            forbid(&name, "beta", &beta)?;
            forbid(&name, "mu", &mu)?;
            ActivationRule::Gwsta(GwstaParams::new(alpha))
        }
        "glsko" => {
            let (_, beta) = beta
                .ok_or_else(|| SpecError::at(act_line, format!("config `{name}`: glsko needs beta")))?;
            if let Some((line, _)) = alpha {
                return Err(SpecError::at(line, "glsko takes beta/mu, not alpha"));
            }
            ActivationRule::Glsko(GlskoParams::new(beta, mu.map(|(_, m)| m)))
        }
        other => {
            return Err(SpecError::at(
                act_line,
                format!("unknown activation rule `{other}` (expected gwta, gwsta or glsko)"),
            ))
        }
    };

    let gamma = match section.take("gamma") {
        Some((line, value)) => value
            .parse::<f64>()
            .map_err(|_| SpecError::at(line, format!("bad gamma `{value}`")))?,
        None => 1.0,
    };

    let (crit_line, crit_raw) = section
        .take("criteria")
        .ok_or_else(|| SpecError::at(header, format!("config `{name}` needs stopping criteria")))?;
    let max_iters = section.take("max_iters").map(parse_number::<usize>).transpose()?;
    let mut criteria = Vec::new();
    for piece in crit_raw.split(',') {
        let criterion = match piece.trim().to_ascii_lowercase().as_str() {
            "iter" => {
                let (_, max) = max_iters.ok_or_else(|| {
                    SpecError::at(crit_line, format!("config `{name}`: iter needs max_iters"))
                })?;
                Criterion::Iter(max)
            }
            "conv" => Criterion::Conv,
            "eqsc" => Criterion::Eqsc,
            "clq" => Criterion::Clq,
            other => {
                return Err(SpecError::at(
                    crit_line,
                    format!("unknown criterion `{other}` (expected iter, conv, eqsc or clq)"),
                ))
            }
        };
        if !criteria.contains(&criterion) {
            criteria.push(criterion);
        }
    }
    if let Some((line, _)) = max_iters {
        if !criteria.iter().any(|c| matches!(c, Criterion::Iter(_))) {
            return Err(SpecError::at(line, "max_iters is set but iter is not among the criteria"));
        }
    }

    let retrieval = RetrievalConfig {
        dynamic,
        activation,
        criteria,
        gamma,
        seed: 0, // per-trial seeds are derived by the runner
        strict_clique: false,
    };
    retrieval
        .validate()
        .map_err(|e| SpecError::at(header, format!("config `{name}`: {e}")))?;
    Ok(NamedConfig { name, retrieval })
}

fn forbid(name: &str, key: &str, entry: &Option<(usize, usize)>) -> Result<(), SpecError> {
    match entry {
        Some((line, _)) => Err(SpecError::at(
            *line,
            format!("config `{name}`: `{key}` does not apply to this activation rule"),
        )),
        None => Ok(()),
    }
}

fn parse_number<T: std::str::FromStr>(entry: (usize, String)) -> Result<(usize, T), SpecError> {
    let (line, value) = entry;
    value
        .parse::<T>()
        .map(|v| (line, v))
        .map_err(|_| SpecError::at(line, format!("bad number `{value}`")))
}

fn parse_bool(line: usize, value: &str) -> Result<bool, SpecError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(SpecError::at(line, format!("expected a boolean, got `{other}`"))),
    }
}
