use std::path::PathBuf;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Norms,
    Ratios,
    Criterion,
    Certify,
    Penalty,
    Overlaps,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::Ratios => "ratios",
            Command::Criterion => "criterion",
            Command::Certify => "certify",
            Command::Penalty => "penalty",
            Command::Overlaps => "overlaps",
        }
    }

    /// Commands that only make sense for `0 < t < 1`.
    fn needs_unit_t(self) -> bool {
        matches!(self, Command::Criterion | Command::Certify)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Float,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One area weight as given on the command line and as a float.
#[derive(Debug, Clone, PartialEq)]
pub struct TValue {
    pub text: String,
    pub value: f64,
}

/// Parses `0.3`, `3/10` or `1e-1`.
pub fn parse_t(s: &str) -> Result<TValue, CliError> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("cannot parse t value {s:?}"));
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            let den: i64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            num as f64 / den as f64
        }
        None => s.parse::<f64>().map_err(|_| bad())?,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(TValue { text: s.to_string(), value })
}

/// Parses a comma-separated list of `t` values.
pub fn parse_t_list(s: &str) -> Result<Vec<TValue>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_t)
        .collect()
}

/// Parses `3`, `2,3,4` or `2..5` (inclusive).
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = |p: &str| CliError::Usage(format!("cannot parse integer list item {p:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: usize = a.parse().map_err(|_| bad(part))?;
                let b: usize = b.trim_start_matches('=').parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    Ok(out)
}

/// Parses `0,1;1,1` into `(p, q)` pairs.
pub fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let v = parse_usize_list(pair)?;
            match v.as_slice() {
                [p, q] => Ok((*p, *q)),
                _ => Err(CliError::Usage(format!("expected a p,q pair, got {pair:?}"))),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub t: Vec<TValue>,
    pub kmax: Option<usize>,
    pub k: Vec<usize>,
    pub n: Vec<usize>,
    pub mode: Mode,
    pub cutoff: Option<usize>,
    pub pairs: Vec<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            t: Vec::new(),
            kmax: None,
            k: Vec::new(),
            n: Vec::new(),
            mode: Mode::Float,
            cutoff: None,
            pairs: Vec::new(),
            out: None,
            format: Format::Csv,
            threads: None,
        }
    }

    /// Checks the `t` list against the command's regime.
    pub fn validate(&self) -> Result<(), CliError> {
        let exact_norms = self.command == Command::Norms && self.mode == Mode::Exact;
        if self.t.is_empty() && !exact_norms {
            return Err(CliError::Usage(format!("{} needs at least one --t value", self.command.name())));
        }
        if self.mode == Mode::Exact && self.command != Command::Norms {
            return Err(CliError::Usage("--mode exact applies to norms only".into()));
        }
        for t in &self.t {
            if !(t.value > 0.0) {
                return Err(CliError::Domain(format!("t must be positive, got {}", t.text)));
            }
            if self.command.needs_unit_t() && t.value >= 1.0 {
                return Err(CliError::Domain(format!(
                    "{} needs 0 < t < 1, got {}",
                    self.command.name(),
                    t.text
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        if self.cutoff == Some(0) {
            return Err(CliError::Usage("--cutoff must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_values() {
        assert_eq!(parse_t("3/10").unwrap().value, 0.3);
        assert_eq!(parse_t("0.5").unwrap().text, "0.5");
        assert!(parse_t("1/0").is_err());
        assert!(parse_t("x").is_err());
        assert_eq!(parse_t_list("0.1, 1/2").unwrap().len(), 2);
    }

    #[test]
    fn integer_lists() {
        assert_eq!(parse_usize_list("2..4,7").unwrap(), vec![2, 3, 4, 7]);
        assert_eq!(parse_usize_list("1..=2").unwrap(), vec![1, 2]);
        assert!(parse_usize_list("4..2").is_err());
        assert_eq!(parse_pairs("0,1;2,2").unwrap(), vec![(0, 1), (2, 2)]);
        assert!(parse_pairs("0,1,2").is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new(Command::Norms);
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
        c.mode = Mode::Exact;
        assert!(c.validate().is_ok());
        let mut c = RunConfig::new(Command::Certify);
        c.t = vec![parse_t("1.2").unwrap()];
        assert!(matches!(c.validate(), Err(CliError::Domain(_))));
        let mut c = RunConfig::new(Command::Penalty);
        c.t = vec![parse_t("1.2").unwrap()];
        assert!(c.validate().is_ok());
    }
}
