//! Demographic classes, the occupation lexicon, stereotype associations,
//! and prompt templates, loaded from one TOML configuration file.
//!
//! The taxonomy is immutable after load and shared by every other module.
//! The config format round-trips losslessly (see README for the schema).

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

/// The two gender values the prompt templates use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Man,
    Woman,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Man => "man",
            Gender::Woman => "woman",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One (ethnicity, religion, gender) triple filling the template slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DemographicProfile {
    pub ethnicity: String,
    /// None when the taxonomy is configured without religions.
    pub religion: Option<String>,
    pub gender: Gender,
}

impl fmt::Display for DemographicProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.religion {
            Some(r) => write!(f, "{} {} {}", self.ethnicity, r, self.gender),
            None => write!(f, "{} {}", self.ethnicity, self.gender),
        }
    }
}

/// A lexicon entry: canonical id plus the surface strings that resolve to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occupation {
    pub id: String,
    pub display: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soc_code: Option<String>,
    /// Marks the intended odd-one-out choice for that task format.
    #[serde(default)]
    pub outlier: bool,
}

/// Any subset of the three profile fields; used for stereotype entries,
/// synthetic model distributions, and report filters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProfilePattern {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ethnicity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub religion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
}

impl ProfilePattern {
    pub fn matches(&self, profile: &DemographicProfile) -> bool {
        if let Some(e) = &self.ethnicity {
            if *e != profile.ethnicity {
                return false;
            }
        }
        if let Some(r) = &self.religion {
            if profile.religion.as_deref() != Some(r.as_str()) {
                return false;
            }
        }
        if let Some(g) = self.gender {
            if g != profile.gender {
                return false;
            }
        }
        true
    }

    /// Number of fields set; higher is more specific.
    pub fn specificity(&self) -> usize {
        self.ethnicity.is_some() as usize
            + self.religion.is_some() as usize
            + self.gender.is_some() as usize
    }
}

impl fmt::Display for ProfilePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(e) = &self.ethnicity {
            parts.push(format!("ethnicity={e}"));
        }
        if let Some(r) = &self.religion {
            parts.push(format!("religion={r}"));
        }
        if let Some(g) = self.gender {
            parts.push(format!("gender={g}"));
        }
        if parts.is_empty() {
            f.write_str("*")
        } else {
            f.write_str(&parts.join(";"))
        }
    }
}

impl std::str::FromStr for ProfilePattern {
    type Err = String;

    /// Parses `attr=value(;attr=value)*` or `*` for the empty pattern.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut pat = ProfilePattern::default();
        let s = s.trim();
        if s.is_empty() || s == "*" {
            return Ok(pat);
        }
        for part in s.split(';') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected attr=value, got {part:?}"))?;
            let value = value.trim().to_string();
            match key.trim() {
                "ethnicity" => pat.ethnicity = Some(value),
                "religion" => pat.religion = Some(value),
                "gender" => {
                    pat.gender = Some(match value.as_str() {
                        "man" => Gender::Man,
                        "woman" => Gender::Woman,
                        other => return Err(format!("unknown gender {other:?}")),
                    })
                }
                other => return Err(format!("unknown attribute {other:?}")),
            }
        }
        Ok(pat)
    }
}

/// Configured association from a profile pattern to the occupations treated
/// as stereotypical for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StereotypeEntry {
    pub occupations: BTreeSet<String>,
    pub pattern: ProfilePattern,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StereotypeMap {
    pub entries: Vec<StereotypeEntry>,
}

impl StereotypeMap {
    /// Union of the occupation sets of the most-specific matching patterns;
    /// more-specific patterns shadow less-specific ones.
    pub fn lookup(&self, profile: &DemographicProfile) -> BTreeSet<&str> {
        let best = self
            .entries
            .iter()
            .filter(|e| e.pattern.matches(profile))
            .map(|e| e.pattern.specificity())
            .max();
        match best {
            None => BTreeSet::new(),
            Some(spec) => self
                .entries
                .iter()
                .filter(|e| e.pattern.matches(profile) && e.pattern.specificity() == spec)
                .flat_map(|e| e.occupations.iter().map(String::as_str))
                .collect(),
        }
    }
}

/// Scaffolding phrases around the few-shot context listings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FspScaffold {
    pub avoid_prefix: String,
    pub debiased_prefix: String,
    pub follow_prefix: String,
    pub follow_after_pairs_prefix: String,
}

/// Prompt templates with `{ETH}` `{REL}` `{GEN}` slots; the option-bearing
/// ones also carry `{OPT_A}`..`{OPT_D}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub sentence_completion: String,
    pub mcq: String,
    /// The "cannot determine" MCQ used by the debiasing study.
    pub mcq_debias: String,
    pub odd_one_out: String,
    pub reprompt: String,
    pub fsp: FspScaffold,
}

/// One few-shot context example: a biased sentence, optionally with its
/// debiased rewrite and an unbiased counterpart sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextExample {
    pub biased: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debiased: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unbiased: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("config file not found or unreadable: {0}")]
    MissingFile(String),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("dangling reference to unknown id {0:?}")]
    DanglingReference(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("template {name:?}: {reason}")]
    BadTemplate { name: String, reason: String },
    #[error("unknown class {0:?}")]
    UnknownClass(String),
}

// On-disk layout of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyConfig {
    pub classes: ClassesSection,
    pub occupations: Vec<Occupation>,
    #[serde(default)]
    pub stereotypes: Vec<StereotypeEntry>,
    pub templates: TemplateSet,
    #[serde(default)]
    pub context_examples: Vec<ContextExample>,
    #[serde(default)]
    pub parsing: ParsingSection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassesSection {
    pub ethnicities: Vec<String>,
    #[serde(default)]
    pub religions: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsingSection {
    #[serde(default)]
    pub refusal_phrases: Vec<String>,
}

impl TaxonomyConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Validated, immutable taxonomy. Construct with [`load_taxonomy`] or
/// [`Taxonomy::builtin_default`].
#[derive(Debug, Clone)]
pub struct Taxonomy {
    config: TaxonomyConfig,
    stereotype_map: StereotypeMap,
    /// normalized alias -> index into config.occupations
    alias_index: HashMap<String, usize>,
    /// sha256 of the source text the taxonomy was loaded from
    digest: String,
}

/// Lowercases and collapses runs of whitespace.
pub fn normalize_surface(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

pub fn load_taxonomy(path: impl AsRef<Path>) -> Result<Taxonomy, TaxonomyError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| TaxonomyError::MissingFile(format!("{}: {e}", path.display())))?;
    Taxonomy::from_toml(&text)
}

impl Taxonomy {
    pub fn from_toml(text: &str) -> Result<Self, TaxonomyError> {
        let config: TaxonomyConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count()).unwrap_or(0);
            TaxonomyError::ParseError { line, message: e.message().to_string() }
        })?;
        let digest = crate::manifest::sha256_hex(text.as_bytes());
        Self::from_config(config, digest)
    }

    /// The default configuration shipped with the crate (the classes and
    /// templates observable in the published prompt boxes).
    pub fn builtin_default() -> Self {
        Self::from_toml(DEFAULT_CONFIG_TOML).expect("builtin config is valid")
    }

    /// The raw text of the builtin configuration, for `--taxonomy` defaults
    /// and for writing a starter file.
    pub fn builtin_default_toml() -> &'static str {
        DEFAULT_CONFIG_TOML
    }

    fn from_config(config: TaxonomyConfig, digest: String) -> Result<Self, TaxonomyError> {
        for list in [&config.classes.ethnicities, &config.classes.religions] {
            let mut seen = BTreeSet::new();
            for id in list {
                if !is_class_token(id) {
                    return Err(TaxonomyError::ParseError {
                        line: 0,
                        message: format!("class id {id:?} is not a lowercase ascii token"),
                    });
                }
                if !seen.insert(id.clone()) {
                    return Err(TaxonomyError::DuplicateId(id.clone()));
                }
            }
        }

        let mut alias_index: HashMap<String, usize> = HashMap::new();
        let mut ids = BTreeSet::new();
        for (i, occ) in config.occupations.iter().enumerate() {
            if !ids.insert(occ.id.clone()) {
                return Err(TaxonomyError::DuplicateId(occ.id.clone()));
            }
            let mut surfaces = vec![occ.id.replace('_', " "), occ.display.clone()];
            surfaces.extend(occ.aliases.iter().cloned());
            for surface in surfaces {
                let key = normalize_surface(&surface);
                if key.is_empty() {
                    continue;
                }
                if let Some(&prev) = alias_index.get(&key) {
                    if prev != i {
                        return Err(TaxonomyError::DuplicateId(key));
                    }
                }
                alias_index.insert(key, i);
            }
        }

        for entry in &config.stereotypes {
            for occ_id in &entry.occupations {
                if !ids.contains(occ_id) {
                    return Err(TaxonomyError::DanglingReference(occ_id.clone()));
                }
            }
            if let Some(e) = &entry.pattern.ethnicity {
                if !config.classes.ethnicities.contains(e) {
                    return Err(TaxonomyError::DanglingReference(e.clone()));
                }
            }
            if let Some(r) = &entry.pattern.religion {
                if !config.classes.religions.contains(r) {
                    return Err(TaxonomyError::DanglingReference(r.clone()));
                }
            }
        }

        validate_template("sentence_completion", &config.templates.sentence_completion, false)?;
        validate_template("mcq", &config.templates.mcq, true)?;
        validate_template("mcq_debias", &config.templates.mcq_debias, true)?;
        validate_template("odd_one_out", &config.templates.odd_one_out, true)?;
        if !config.templates.reprompt.contains("{ANSWER}") {
            return Err(TaxonomyError::BadTemplate {
                name: "reprompt".into(),
                reason: "missing {ANSWER} slot".into(),
            });
        }

        for ex in &config.context_examples {
            if ex.biased.trim().is_empty() {
                return Err(TaxonomyError::BadTemplate {
                    name: "context_examples".into(),
                    reason: "biased text must be nonempty".into(),
                });
            }
        }

        let stereotype_map = StereotypeMap { entries: config.stereotypes.clone() };
        Ok(Self { config, stereotype_map, alias_index, digest })
    }

    pub fn config(&self) -> &TaxonomyConfig {
        &self.config
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn ethnicities(&self) -> &[String] {
        &self.config.classes.ethnicities
    }

    pub fn religions(&self) -> &[String] {
        &self.config.classes.religions
    }

    pub fn occupations(&self) -> &[Occupation] {
        &self.config.occupations
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.config.templates
    }

    pub fn stereotypes(&self) -> &StereotypeMap {
        &self.stereotype_map
    }

    pub fn context_examples(&self) -> &[ContextExample] {
        &self.config.context_examples
    }

    pub fn refusal_phrases(&self) -> &[String] {
        &self.config.parsing.refusal_phrases
    }

    pub fn occupation(&self, id: &str) -> Option<&Occupation> {
        self.config.occupations.iter().find(|o| o.id == id)
    }

    /// Resolves a surface string (case-insensitive, whitespace-normalized)
    /// to its occupation.
    pub fn resolve_alias(&self, surface: &str) -> Option<&Occupation> {
        self.alias_index
            .get(&normalize_surface(surface))
            .map(|&i| &self.config.occupations[i])
    }

    /// Iterator over (normalized alias, occupation index) pairs.
    pub(crate) fn alias_entries(&self) -> impl Iterator<Item = (&str, &Occupation)> {
        self.alias_index
            .iter()
            .map(move |(k, &i)| (k.as_str(), &self.config.occupations[i]))
    }

    pub fn validate_profile(&self, profile: &DemographicProfile) -> Result<(), TaxonomyError> {
        if !self.config.classes.ethnicities.contains(&profile.ethnicity) {
            return Err(TaxonomyError::UnknownClass(profile.ethnicity.clone()));
        }
        match &profile.religion {
            Some(r) if !self.config.classes.religions.contains(r) => {
                return Err(TaxonomyError::UnknownClass(r.clone()));
            }
            None if !self.config.classes.religions.is_empty() => {
                return Err(TaxonomyError::UnknownClass("<no religion>".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Full Cartesian product ethnicity x religion x gender in lexicographic
/// order of class ids. An empty religion list yields profiles without a
/// religion component.
pub fn enumerate_profiles(taxonomy: &Taxonomy) -> Vec<DemographicProfile> {
    let mut ethnicities = taxonomy.ethnicities().to_vec();
    ethnicities.sort();
    let mut religions = taxonomy.religions().to_vec();
    religions.sort();
    let genders = [Gender::Man, Gender::Woman]; // "man" < "woman"

    let mut out = Vec::new();
    for e in &ethnicities {
        if religions.is_empty() {
            for g in genders {
                out.push(DemographicProfile {
                    ethnicity: e.clone(),
                    religion: None,
                    gender: g,
                });
            }
        } else {
            for r in &religions {
                for g in genders {
                    out.push(DemographicProfile {
                        ethnicity: e.clone(),
                        religion: Some(r.clone()),
                        gender: g,
                    });
                }
            }
        }
    }
    out
}

fn is_class_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn validate_template(name: &str, template: &str, with_options: bool) -> Result<(), TaxonomyError> {
    let mut slots = vec!["{ETH}", "{GEN}", "{REL}"];
    if with_options {
        slots.extend(["{OPT_A}", "{OPT_B}", "{OPT_C}", "{OPT_D}"]);
    }
    for slot in slots {
        let count = template.matches(slot).count();
        if count != 1 {
            return Err(TaxonomyError::BadTemplate {
                name: name.into(),
                reason: format!("slot {slot} appears {count} times, expected exactly once"),
            });
        }
    }
    Ok(())
}

const DEFAULT_CONFIG_TOML: &str = include_str!("../config/default_taxonomy.toml");
