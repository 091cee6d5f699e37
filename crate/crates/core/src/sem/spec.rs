use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SemError;

/// The bundled climate-risk → nine flourishing dimensions model.
pub const DEFAULT_MODEL: &str = include_str!("../../assets/default_model.sem");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Latent {
    pub name: String,
    pub indicators: Vec<String>,
    /// Index into `indicators` of the loading fixed to 1.
    pub reference: usize,
}

impl Latent {
    pub fn new(name: impl Into<String>, indicators: &[&str]) -> Self {
        Self {
            name: name.into(),
            indicators: indicators.iter().map(|s| s.to_string()).collect(),
            reference: 0,
        }
    }

    pub fn with_reference(mut self, reference: usize) -> Self {
        self.reference = reference;
        self
    }
}

/// Validated model structure.
///
/// Latent 0 is the exogenous factor; latents `1..` are endogenous, each
/// regressed on latent 0, in declaration order. Observed variables are
/// ordered block by block following the latents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    latents: Vec<Latent>,
    observed: Vec<String>,
    owner: Vec<usize>,
    is_reference: Vec<bool>,
}

impl ModelSpec {
    pub fn new(exogenous: Latent, endogenous: Vec<Latent>) -> Result<Self, SemError> {
        let mut latents = Vec::with_capacity(endogenous.len() + 1);
        latents.push(exogenous);
        latents.extend(endogenous);

        let mut names = HashSet::new();
        let mut assigned: HashMap<&str, &str> = HashMap::new();
        let mut observed = Vec::new();
        let mut owner = Vec::new();
        let mut is_reference = Vec::new();
        for (k, lat) in latents.iter().enumerate() {
            if !names.insert(lat.name.as_str()) {
                return Err(SemError::DuplicateLatent(lat.name.clone()));
            }
            if lat.indicators.is_empty() {
                return Err(SemError::EmptyLatent(lat.name.clone()));
            }
            if lat.reference >= lat.indicators.len() {
                return Err(SemError::Structure(format!(
                    "latent {} has reference index {} but {} indicators",
                    lat.name,
                    lat.reference,
                    lat.indicators.len()
                )));
            }
            for (i, ind) in lat.indicators.iter().enumerate() {
                if let Some(first) = assigned.insert(ind, &lat.name) {
                    return Err(SemError::DuplicateIndicator {
                        indicator: ind.clone(),
                        first: first.to_string(),
                        second: lat.name.clone(),
                    });
                }
                observed.push(ind.clone());
                owner.push(k);
                is_reference.push(i == lat.reference);
            }
        }
        for ind in &observed {
            if names.contains(ind.as_str()) {
                return Err(SemError::Structure(format!(
                    "{ind} is used both as a latent and as an indicator"
                )));
            }
        }
        Ok(Self {
            latents,
            observed,
            owner,
            is_reference,
        })
    }

    /// Parse the line-oriented model syntax:
    ///
    /// ```text
    /// # comment
    /// climate_risk =~ heat fire drought inland coastal wind
    /// wellbeing    =~ happiness*free lifesat =1@lifesat
    /// wellbeing    ~  climate_risk
    /// ```
    ///
    /// The first indicator of a block is its reference unless it carries a
    /// `*free` suffix, in which case a `=1@name` marker must name the
    /// reference.
    pub fn parse(text: &str) -> Result<Self, SemError> {
        let mut blocks: Vec<(usize, Latent)> = Vec::new();
        let mut paths: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| SemError::Syntax {
                line: line_no,
                message,
            };
            if let Some((lhs, rhs)) = line.split_once("=~") {
                let name = lhs.trim();
                check_name(name).map_err(syntax)?;
                let latent = parse_block(name, rhs).map_err(syntax)?;
                if latent.indicators.is_empty() {
                    return Err(SemError::EmptyLatent(name.to_string()));
                }
                if blocks.iter().any(|(_, b)| b.name == name) {
                    return Err(SemError::DuplicateLatent(name.to_string()));
                }
                blocks.push((line_no, latent));
            } else if let Some((lhs, rhs)) = line.split_once('~') {
                let lhs = lhs.trim();
                let preds: Vec<&str> = rhs.split(['+', ' ', '\t']).filter(|s| !s.is_empty()).collect();
                check_name(lhs).map_err(syntax)?;
                match preds.as_slice() {
                    [one] => {
                        check_name(one).map_err(syntax)?;
                        paths.push((line_no, lhs.to_string(), one.to_string()));
                    }
                    [] => return Err(syntax("structural path without a predictor".into())),
                    _ => {
                        return Err(syntax(format!(
                            "{lhs} has {} predictors; each endogenous latent takes exactly one",
                            preds.len()
                        )))
                    }
                }
            } else {
                return Err(syntax(format!("expected `=~` or `~` in {line:?}")));
            }
        }

        let known: HashSet<&str> = blocks.iter().map(|(_, b)| b.name.as_str()).collect();
        let mut inbound: HashMap<&str, &str> = HashMap::new();
        for (line, lhs, rhs) in &paths {
            for name in [lhs, rhs] {
                if !known.contains(name.as_str()) {
                    return Err(SemError::UnknownLatent(name.clone()));
                }
            }
            if lhs == rhs {
                return Err(SemError::Syntax {
                    line: *line,
                    message: format!("{lhs} cannot predict itself"),
                });
            }
            if inbound.insert(lhs, rhs).is_some() {
                return Err(SemError::Structure(format!(
                    "{lhs} has more than one structural path"
                )));
            }
        }
        let exogenous: Vec<&Latent> = blocks
            .iter()
            .map(|(_, b)| b)
            .filter(|b| !inbound.contains_key(b.name.as_str()))
            .collect();
        let exo = match exogenous.as_slice() {
            [one] => (*one).clone(),
            [] => return Err(SemError::Structure("no exogenous latent".into())),
            many => {
                return Err(SemError::Structure(format!(
                    "expected one exogenous latent, found {}: {}",
                    many.len(),
                    many.iter().map(|l| l.name.as_str()).collect::<Vec<_>>().join(", ")
                )))
            }
        };
        for (lhs, rhs) in &inbound {
            if *rhs != exo.name {
                return Err(SemError::Structure(format!(
                    "{lhs} ~ {rhs}: only paths from the exogenous latent {} are allowed",
                    exo.name
                )));
            }
        }
        let endogenous = blocks
            .into_iter()
            .map(|(_, b)| b)
            .filter(|b| b.name != exo.name)
            .collect();
        Self::new(exo, endogenous)
    }

    /// Canonical text form; parsing it yields an equal spec.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for lat in &self.latents {
            let _ = write!(out, "{} =~", lat.name);
            for (i, ind) in lat.indicators.iter().enumerate() {
                let free = i == 0 && lat.reference != 0;
                let _ = write!(out, " {ind}{}", if free { "*free" } else { "" });
            }
            if lat.reference != 0 {
                let _ = write!(out, " =1@{}", lat.indicators[lat.reference]);
            }
            out.push('\n');
        }
        for lat in &self.latents[1..] {
            let _ = writeln!(out, "{} ~ {}", lat.name, self.latents[0].name);
        }
        out
    }

    /// Fails with [`SemError::UnknownIndicator`] for the first indicator not
    /// among `available`.
    pub fn check_observed<S: AsRef<str>>(&self, available: &[S]) -> Result<(), SemError> {
        let set: HashSet<&str> = available.iter().map(|s| s.as_ref()).collect();
        match self.observed.iter().find(|o| !set.contains(o.as_str())) {
            Some(missing) => Err(SemError::UnknownIndicator(missing.clone())),
            None => Ok(()),
        }
    }

    pub fn latents(&self) -> &[Latent] {
        &self.latents
    }

    pub fn exogenous(&self) -> &Latent {
        &self.latents[0]
    }

    pub fn endogenous(&self) -> &[Latent] {
        &self.latents[1..]
    }

    pub fn latent_names(&self) -> Vec<&str> {
        self.latents.iter().map(|l| l.name.as_str()).collect()
    }

    /// Observed variables in model order.
    pub fn observed(&self) -> &[String] {
        &self.observed
    }

    pub fn n_observed(&self) -> usize {
        self.observed.len()
    }

    pub fn n_latent(&self) -> usize {
        self.latents.len()
    }

    pub fn n_endogenous(&self) -> usize {
        self.latents.len() - 1
    }

    /// Number of observed indicators of the exogenous latent.
    pub fn n_exogenous_indicators(&self) -> usize {
        self.latents[0].indicators.len()
    }

    /// Latent index each observed variable loads on.
    pub fn owner(&self, observed: usize) -> usize {
        self.owner[observed]
    }

    pub fn is_reference(&self, observed: usize) -> bool {
        self.is_reference[observed]
    }

    /// Observed index of each latent's reference indicator.
    pub fn reference_indices(&self) -> Vec<usize> {
        let mut out = vec![0; self.latents.len()];
        for (a, &k) in self.owner.iter().enumerate() {
            if self.is_reference[a] {
                out[k] = a;
            }
        }
        out
    }

    /// Free parameters: loadings, paths, Φ, Ψ diagonal and Θ diagonal.
    pub fn n_free(&self) -> usize {
        let p = self.n_observed();
        let m = self.n_latent();
        (p - m) + (m - 1) + 1 + (m - 1) + p
    }

    /// Distinct moments minus free parameters; negative when unidentified.
    pub fn degrees_of_freedom(&self) -> i64 {
        let p = self.n_observed() as i64;
        p * (p + 1) / 2 - self.n_free() as i64
    }
}

fn check_name(name: &str) -> Result<(), String> {
    let mut chars = name.chars();
    let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
    if ok {
        Ok(())
    } else {
        Err(format!("invalid name {name:?}"))
    }
}

fn parse_block(name: &str, rhs: &str) -> Result<Latent, String> {
    let mut indicators = Vec::new();
    let mut first_free = false;
    let mut marker: Option<String> = None;
    for tok in rhs.split_whitespace() {
        if let Some(target) = tok.strip_prefix("=1@").or_else(|| tok.strip_prefix("1@")) {
            check_name(target)?;
            if marker.replace(target.to_string()).is_some() {
                return Err(format!("{name} has more than one reference marker"));
            }
        } else if let Some(ind) = tok.strip_suffix("*free") {
            check_name(ind)?;
            if indicators.is_empty() {
                first_free = true;
            }
            indicators.push(ind.to_string());
        } else {
            check_name(tok)?;
            indicators.push(tok.to_string());
        }
    }
    let reference = match (marker, first_free) {
        (None, false) => 0,
        (None, true) => {
            return Err(format!(
                "{name}: first indicator is marked *free but no =1@ reference is given"
            ))
        }
        (Some(target), _) => {
            let pos = indicators
                .iter()
                .position(|i| *i == target)
                .ok_or_else(|| format!("{name}: reference {target} is not among its indicators"))?;
            if pos != 0 && !first_free {
                return Err(format!(
                    "{name}: reference {target} given but the first indicator is not marked *free"
                ));
            }
            pos
        }
    };
    Ok(Latent {
        name: name.to_string(),
        indicators,
        reference,
    })
}
