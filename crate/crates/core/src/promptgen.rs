//! Prompt rendering for the three task formats under zero-shot and k-shot
//! prompting, the biased/debiased context blocks, and seeded dataset
//! generation.
//!
//! Generation is a pure function of (taxonomy, spec): the same seed yields
//! a byte-identical dataset.

use crate::taxonomy::{enumerate_profiles, ContextExample, DemographicProfile, Taxonomy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// The MCQ literal that represents the correct refusal in the debias study.
pub const CANNOT_DETERMINE: &str = "cannot determine";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptFormat {
    SentenceCompletion,
    Mcq,
    OddOneOut,
}

impl PromptFormat {
    /// Fixed order used for apportionment and reporting.
    pub const ALL: [PromptFormat; 3] =
        [PromptFormat::SentenceCompletion, PromptFormat::Mcq, PromptFormat::OddOneOut];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DebiasMode {
    None,
    /// "Avoid stereotypical responses such as ..." plus the unbiased-response clause.
    Explanation,
    /// Additionally inserts the debiased rewrite of every listed example.
    ExplanationWithDebiasedPairs,
    /// Second-pass prompt asking the model to strip bias from its own answer.
    Reprompt,
}

/// A rendered prompt with enough metadata to recover profile, format, and
/// shot count without re-parsing the text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    /// Deterministic given (seed, index).
    pub id: String,
    pub profile: DemographicProfile,
    pub format: PromptFormat,
    pub k: u32,
    pub debias_mode: DebiasMode,
    pub text: String,
    /// Exactly 4 entries for Mcq / OddOneOut, empty otherwise.
    #[serde(default)]
    pub options: Vec<String>,
    /// Index of the expected answer, when one exists (e.g. "cannot determine").
    #[serde(default)]
    pub gold: Option<usize>,
}

impl PromptRecord {
    pub fn is_cannot_determine_option(&self, index: usize) -> bool {
        self.options
            .get(index)
            .map(|o| o.eq_ignore_ascii_case(CANNOT_DETERMINE))
            .unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("expected exactly 4 options, got {0}")]
    WrongOptionCount(usize),
    #[error("cannot-determine flag set but no option is the literal")]
    MissingCannotDetermine,
    #[error("option set contains {0} configured outliers, expected exactly 1")]
    AmbiguousOutlier(usize),
    #[error("option set contains no configured outlier")]
    NoOutlier,
    #[error("context pool has {have} examples, need {need}")]
    NotEnoughExamples { need: usize, have: usize },
    #[error("context example {0} has no debiased counterpart")]
    MissingDebiasedCounterpart(usize),
    #[error("original answer is empty")]
    EmptyAnswer,
    #[error("taxonomy has no {0}")]
    EmptyTaxonomy(&'static str),
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
}

fn fill_profile_slots(template: &str, profile: &DemographicProfile) -> String {
    let filled = template
        .replace("{ETH}", &profile.ethnicity)
        .replace("{REL}", profile.religion.as_deref().unwrap_or(""))
        .replace("{GEN}", profile.gender.as_str());
    collapse_spaces(&filled)
}

fn fill_option_slots(template: &str, options: &[String]) -> String {
    template
        .replace("{OPT_A}", &options[0])
        .replace("{OPT_B}", &options[1])
        .replace("{OPT_C}", &options[2])
        .replace("{OPT_D}", &options[3])
}

// Collapses doubled spaces left behind by an empty religion slot.
fn collapse_spaces(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev_space = false;
    for ch in s.chars() {
        if ch == ' ' {
            if !prev_space {
                out.push(ch);
            }
            prev_space = true;
        } else {
            out.push(ch);
            prev_space = false;
        }
    }
    out
}

fn prompt_id(seed: u64, index: usize) -> String {
    let digest = Sha256::digest(format!("{seed}:{index}").as_bytes());
    hex::encode(&digest[..8])
}

/// Zero-shot sentence completion for one profile.
pub fn render_sentence_prompt(
    profile: &DemographicProfile,
    taxonomy: &Taxonomy,
) -> Result<PromptRecord, PromptError> {
    validate(profile, taxonomy)?;
    Ok(PromptRecord {
        id: format!("adhoc-{}", prompt_id(0, 0)),
        profile: profile.clone(),
        format: PromptFormat::SentenceCompletion,
        k: 0,
        debias_mode: DebiasMode::None,
        text: fill_profile_slots(&taxonomy.templates().sentence_completion, profile),
        options: Vec::new(),
        gold: None,
    })
}

/// Multiple-choice prompt. With `include_cannot_determine` the debias-study
/// template is used and gold is set to the literal's index.
pub fn render_mcq_prompt(
    profile: &DemographicProfile,
    options: &[String],
    taxonomy: &Taxonomy,
    include_cannot_determine: bool,
) -> Result<PromptRecord, PromptError> {
    validate(profile, taxonomy)?;
    if options.len() != 4 {
        return Err(PromptError::WrongOptionCount(options.len()));
    }
    let gold = if include_cannot_determine {
        let idx = options
            .iter()
            .position(|o| o.eq_ignore_ascii_case(CANNOT_DETERMINE))
            .ok_or(PromptError::MissingCannotDetermine)?;
        Some(idx)
    } else {
        None
    };
    let template = if include_cannot_determine {
        &taxonomy.templates().mcq_debias
    } else {
        &taxonomy.templates().mcq
    };
    Ok(PromptRecord {
        id: format!("adhoc-{}", prompt_id(0, 0)),
        profile: profile.clone(),
        format: PromptFormat::Mcq,
        k: 0,
        debias_mode: DebiasMode::None,
        text: fill_option_slots(&fill_profile_slots(template, profile), options),
        options: options.to_vec(),
        gold,
    })
}

/// Odd-one-out prompt: exactly one option must resolve to an occupation
/// flagged `outlier` in the lexicon; its index becomes gold.
pub fn render_odd_one_out_prompt(
    profile: &DemographicProfile,
    options: &[String],
    taxonomy: &Taxonomy,
) -> Result<PromptRecord, PromptError> {
    validate(profile, taxonomy)?;
    if options.len() != 4 {
        return Err(PromptError::WrongOptionCount(options.len()));
    }
    let outliers: Vec<usize> = options
        .iter()
        .enumerate()
        .filter(|(_, o)| taxonomy.resolve_alias(o).map(|occ| occ.outlier).unwrap_or(false))
        .map(|(i, _)| i)
        .collect();
    let gold = match outliers.len() {
        0 => return Err(PromptError::NoOutlier),
        1 => outliers[0],
        n => return Err(PromptError::AmbiguousOutlier(n)),
    };
    Ok(PromptRecord {
        id: format!("adhoc-{}", prompt_id(0, 0)),
        profile: profile.clone(),
        format: PromptFormat::OddOneOut,
        k: 0,
        debias_mode: DebiasMode::None,
        text: fill_option_slots(&fill_profile_slots(&taxonomy.templates().odd_one_out, profile), options),
        options: options.to_vec(),
        gold: Some(gold),
    })
}

fn quoted_list(items: &[&str]) -> String {
    match items.len() {
        0 => String::new(),
        1 => format!("\"{}\"", items[0]),
        2 => format!("\"{}\" or \"{}\"", items[0], items[1]),
        _ => {
            let head: Vec<String> =
                items[..items.len() - 1].iter().map(|s| format!("\"{s}\"")).collect();
            format!("{}, or \"{}\"", head.join(", "), items[items.len() - 1])
        }
    }
}

/// Builds the few-shot context block from the first `k` pool examples.
/// Mode `None` (zero-shot) yields an empty block; the other modes produce
/// the avoid/debiased/follow clauses with example order preserved.
pub fn build_context_block(
    examples: &[ContextExample],
    k: u32,
    debias_mode: DebiasMode,
    taxonomy: &Taxonomy,
) -> Result<String, PromptError> {
    if k == 0 || debias_mode == DebiasMode::None {
        return Ok(String::new());
    }
    let k = k as usize;
    if k > examples.len() {
        return Err(PromptError::NotEnoughExamples { need: k, have: examples.len() });
    }
    let selected = &examples[..k];
    let scaffold = &taxonomy.templates().fsp;

    let biased: Vec<&str> = selected.iter().map(|e| e.biased.as_str()).collect();
    let unbiased: Vec<&str> =
        selected.iter().filter_map(|e| e.unbiased.as_deref()).collect();

    let mut sentences: Vec<String> = Vec::new();
    sentences.push(format!("{}{}.", scaffold.avoid_prefix, quoted_list(&biased)));

    match debias_mode {
        DebiasMode::Explanation => {
            if !unbiased.is_empty() {
                sentences.push(format!("{}{}.", scaffold.follow_prefix, quoted_list(&unbiased)));
            }
        }
        DebiasMode::ExplanationWithDebiasedPairs => {
            let mut debiased = Vec::with_capacity(k);
            for (i, e) in selected.iter().enumerate() {
                match e.debiased.as_deref() {
                    Some(d) => debiased.push(d),
                    None => return Err(PromptError::MissingDebiasedCounterpart(i)),
                }
            }
            sentences.push(format!("{}{}.", scaffold.debiased_prefix, quoted_list(&debiased)));
            if !unbiased.is_empty() {
                sentences.push(format!(
                    "{}{}.",
                    scaffold.follow_after_pairs_prefix,
                    quoted_list(&unbiased)
                ));
            }
        }
        DebiasMode::None | DebiasMode::Reprompt => {
            return Err(PromptError::InvalidSpec(format!(
                "{debias_mode:?} does not take a context block"
            )));
        }
    }

    Ok(sentences.join(" ") + " ")
}

/// Second-pass prompt embedding the model's own answer with the
/// stereotype-removal instruction.
pub fn build_reprompt(
    original: &PromptRecord,
    original_answer: &str,
    taxonomy: &Taxonomy,
) -> Result<PromptRecord, PromptError> {
    let answer = original_answer.trim();
    if answer.is_empty() {
        return Err(PromptError::EmptyAnswer);
    }
    let text = taxonomy.templates().reprompt.replace("{ANSWER}", answer);
    Ok(PromptRecord {
        id: format!("{}-reprompt", original.id),
        profile: original.profile.clone(),
        format: original.format,
        k: original.k,
        debias_mode: DebiasMode::Reprompt,
        text,
        options: original.options.clone(),
        gold: original.gold,
    })
}

/// Everything that determines a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub seed: u64,
    pub n: usize,
    /// Weights over [SentenceCompletion, Mcq, OddOneOut]; must sum to 1.
    pub format_mix: [f64; 3],
    pub k: u32,
    pub debias_mode: DebiasMode,
    /// Generated MCQs carry a "cannot determine" option with gold set
    /// (the debias-study variant).
    pub mcq_cannot_determine: bool,
}

impl DatasetSpec {
    pub fn zero_shot(seed: u64, n: usize) -> Self {
        Self {
            seed,
            n,
            format_mix: [1.0 / 3.0; 3],
            k: 0,
            debias_mode: DebiasMode::None,
            mcq_cannot_determine: false,
        }
    }
}

/// Largest-remainder apportionment of `n` over the weights; ties broken by
/// position. Per-format counts differ from n*w by at most 1.
pub fn apportion(n: usize, weights: &[f64; 3]) -> [usize; 3] {
    let mut counts = [0usize; 3];
    let mut remainders = [0f64; 3];
    let mut assigned = 0;
    for i in 0..3 {
        let exact = n as f64 * weights[i];
        counts[i] = exact.floor() as usize;
        remainders[i] = exact - exact.floor();
        assigned += counts[i];
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        remainders[b].partial_cmp(&remainders[a]).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Seeded dataset generation: exactly n records with per-format counts from
/// largest-remainder apportionment, profiles and options sampled from the
/// seed alone. Same inputs, byte-identical output.
pub fn generate_dataset(
    taxonomy: &Taxonomy,
    spec: &DatasetSpec,
) -> Result<Vec<PromptRecord>, PromptError> {
    if spec.n == 0 {
        return Err(PromptError::InvalidSpec("n must be >= 1".into()));
    }
    let mix_sum: f64 = spec.format_mix.iter().sum();
    if (mix_sum - 1.0).abs() > 1e-9 || spec.format_mix.iter().any(|w| *w < 0.0) {
        return Err(PromptError::InvalidSpec(format!(
            "format mix must be nonnegative and sum to 1, got {:?}",
            spec.format_mix
        )));
    }
    if (spec.k == 0) != (spec.debias_mode == DebiasMode::None) {
        return Err(PromptError::InvalidSpec(format!(
            "k={} is inconsistent with debias mode {:?}",
            spec.k, spec.debias_mode
        )));
    }
    let profiles = enumerate_profiles(taxonomy);
    if profiles.is_empty() {
        return Err(PromptError::EmptyTaxonomy("demographic classes"));
    }
    let occupations = taxonomy.occupations();
    let regular: Vec<&str> =
        occupations.iter().filter(|o| !o.outlier).map(|o| o.display.as_str()).collect();
    let outliers: Vec<&str> =
        occupations.iter().filter(|o| o.outlier).map(|o| o.display.as_str()).collect();
    if regular.len() < 4 {
        return Err(PromptError::EmptyTaxonomy("occupation lexicon (need >= 4 non-outliers)"));
    }

    let counts = apportion(spec.n, &spec.format_mix);
    if counts[2] > 0 && outliers.is_empty() {
        return Err(PromptError::EmptyTaxonomy("outlier-flagged occupations"));
    }

    let context = build_context_block(
        taxonomy.context_examples(),
        spec.k,
        spec.debias_mode,
        taxonomy,
    )?;

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.n);
    let mut index = 0usize;
    for (fi, &format) in PromptFormat::ALL.iter().enumerate() {
        for _ in 0..counts[fi] {
            let profile = &profiles[rng.gen_range(0..profiles.len())];
            let mut record = match format {
                PromptFormat::SentenceCompletion => render_sentence_prompt(profile, taxonomy)?,
                PromptFormat::Mcq => {
                    let options = if spec.mcq_cannot_determine {
                        let mut opts = sample_distinct(&mut rng, &regular, 3);
                        opts.insert(rng.gen_range(0..4), CANNOT_DETERMINE.to_string());
                        opts
                    } else {
                        sample_distinct(&mut rng, &regular, 4)
                    };
                    render_mcq_prompt(profile, &options, taxonomy, spec.mcq_cannot_determine)?
                }
                PromptFormat::OddOneOut => {
                    let mut opts = sample_distinct(&mut rng, &regular, 3);
                    let outlier = outliers[rng.gen_range(0..outliers.len())];
                    opts.insert(rng.gen_range(0..4), outlier.to_string());
                    render_odd_one_out_prompt(profile, &opts, taxonomy)?
                }
            };
            record.id = prompt_id(spec.seed, index);
            record.k = spec.k;
            record.debias_mode = spec.debias_mode;
            if !context.is_empty() {
                record.text = format!("{context}{}", record.text);
            }
            records.push(record);
            index += 1;
        }
    }
    Ok(records)
}

fn sample_distinct(rng: &mut ChaCha20Rng, pool: &[&str], count: usize) -> Vec<String> {
    let mut picks: Vec<&str> = pool.to_vec();
    picks.shuffle(rng);
    picks.truncate(count);
    picks.into_iter().map(str::to_string).collect()
}

fn validate(profile: &DemographicProfile, taxonomy: &Taxonomy) -> Result<(), PromptError> {
    taxonomy
        .validate_profile(profile)
        .map_err(|e| match e {
            crate::taxonomy::TaxonomyError::UnknownClass(c) => PromptError::UnknownClass(c),
            other => PromptError::UnknownClass(other.to_string()),
        })
}
