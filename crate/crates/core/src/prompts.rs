//! Prompt templates and response parsing.
//!
//! Templates are plain text with `{{name}}` placeholders. Substitution is a
//! single pass, so braces inside substituted values are never expanded. An
//! empty `{{}}` is literal text (the templates ask for a thought "inside
//! within boxed {{}}").

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::GuestProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TemplateId {
    #[serde(rename = "I1_Analysis")]
    I1Analysis,
    #[serde(rename = "I2_Strategy")]
    I2Strategy,
    #[serde(rename = "I3_SeedImpl")]
    I3SeedImpl,
    #[serde(rename = "II1_MicroTune")]
    II1MicroTune,
    #[serde(rename = "II2_MacroMutate")]
    II2MacroMutate,
    #[serde(rename = "II3_Crossover")]
    II3Crossover,
    #[serde(rename = "II4_RoleAnalysis")]
    II4RoleAnalysis,
    #[serde(rename = "II5_DependencyRepair")]
    II5DependencyRepair,
}

impl TemplateId {
    pub const ALL: [TemplateId; 8] = [
        TemplateId::I1Analysis,
        TemplateId::I2Strategy,
        TemplateId::I3SeedImpl,
        TemplateId::II1MicroTune,
        TemplateId::II2MacroMutate,
        TemplateId::II3Crossover,
        TemplateId::II4RoleAnalysis,
        TemplateId::II5DependencyRepair,
    ];

    /// File stem and fixture tag.
    pub fn tag(self) -> &'static str {
        match self {
            TemplateId::I1Analysis => "I1_Analysis",
            TemplateId::I2Strategy => "I2_Strategy",
            TemplateId::I3SeedImpl => "I3_SeedImpl",
            TemplateId::II1MicroTune => "II1_MicroTune",
            TemplateId::II2MacroMutate => "II2_MacroMutate",
            TemplateId::II3Crossover => "II3_Crossover",
            TemplateId::II4RoleAnalysis => "II4_RoleAnalysis",
            TemplateId::II5DependencyRepair => "II5_DependencyRepair",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.tag() == tag)
    }
}

impl core::fmt::Display for TemplateId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("missing placeholder `{0}`")]
    MissingPlaceholder(String),
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("no code found in response")]
    NoCodeFound,
    #[error("unparsable role list")]
    UnparsableRoleList,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptContext(BTreeMap<String, String>);

impl PromptContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, value: impl Into<String>) -> &mut Self {
        self.0.insert(name.to_string(), value.into());
        self
    }

    pub fn with(mut self, name: &str, value: impl Into<String>) -> Self {
        self.insert(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptLibrary {
    templates: BTreeMap<TemplateId, String>,
}

const BUILTIN: [(TemplateId, &str); 8] = [
    (TemplateId::I1Analysis, include_str!("../templates/I1_Analysis.txt")),
    (TemplateId::I2Strategy, include_str!("../templates/I2_Strategy.txt")),
    (TemplateId::I3SeedImpl, include_str!("../templates/I3_SeedImpl.txt")),
    (TemplateId::II1MicroTune, include_str!("../templates/II1_MicroTune.txt")),
    (TemplateId::II2MacroMutate, include_str!("../templates/II2_MacroMutate.txt")),
    (TemplateId::II3Crossover, include_str!("../templates/II3_Crossover.txt")),
    (TemplateId::II4RoleAnalysis, include_str!("../templates/II4_RoleAnalysis.txt")),
    (TemplateId::II5DependencyRepair, include_str!("../templates/II5_DependencyRepair.txt")),
];

fn is_placeholder_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c == '_' || c.is_ascii_alphanumeric())
}

/// Placeholder names referenced by a template body, in order of first use.
pub fn placeholders(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("{{") {
        let after = &rest[open + 2..];
        match after.find("}}") {
            Some(close) if is_placeholder_name(&after[..close]) => {
                let name = after[..close].to_string();
                if !out.contains(&name) {
                    out.push(name);
                }
                rest = &after[close + 2..];
            }
            _ => rest = after,
        }
    }
    out
}

impl PromptLibrary {
    /// Templates shipped with the crate.
    pub fn builtin() -> Self {
        Self { templates: BUILTIN.iter().map(|(id, t)| (*id, t.to_string())).collect() }
    }

    /// Builds a library from (file stem, text) pairs; missing stems fall back
    /// to the shipped text.
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = (&'a str, String)>) -> Result<Self, PromptError> {
        let mut lib = Self::builtin();
        for (stem, text) in texts {
            let id = TemplateId::from_tag(stem).ok_or_else(|| PromptError::UnknownTemplate(stem.to_string()))?;
            lib.templates.insert(id, text);
        }
        Ok(lib)
    }

    pub fn text(&self, id: TemplateId) -> &str {
        &self.templates[&id]
    }

    pub fn render(&self, id: TemplateId, ctx: &PromptContext) -> Result<String, PromptError> {
        let text = self.templates.get(&id).ok_or_else(|| PromptError::UnknownTemplate(id.tag().to_string()))?;
        let mut out = String::with_capacity(text.len() + 256);
        let mut rest = text.as_str();
        while let Some(open) = rest.find("{{") {
            out.push_str(&rest[..open]);
            let after = &rest[open + 2..];
            match after.find("}}") {
                Some(close) if is_placeholder_name(&after[..close]) => {
                    let name = &after[..close];
                    let value = ctx.get(name).ok_or_else(|| PromptError::MissingPlaceholder(name.to_string()))?;
                    out.push_str(value);
                    rest = &after[close + 2..];
                }
                _ => {
                    out.push_str("{{");
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        Ok(out)
    }
}

fn fence_blocks(response: &str) -> Vec<(usize, usize)> {
    // byte ranges of fenced block contents
    let mut blocks = Vec::new();
    let mut open: Option<usize> = None;
    let mut offset = 0;
    for line in response.split_inclusive('\n') {
        if line.trim_start().starts_with("```") {
            match open {
                None => open = Some(offset + line.len()),
                Some(start) => {
                    blocks.push((start, offset));
                    open = None;
                }
            }
        }
        offset += line.len();
    }
    if let Some(start) = open {
        // unterminated fence: take the rest
        blocks.push((start, response.len()));
    }
    blocks
}

/// Guest source from a generator response: the first fenced block, else the
/// text from the first top-level import or definition line onward.
pub fn extract_code(response: &str, profile: &GuestProfile) -> Result<String, PromptError> {
    if let Some(&(s, e)) = fence_blocks(response).first() {
        let code = &response[s..e];
        if code.trim().is_empty() {
            return Err(PromptError::NoCodeFound);
        }
        return Ok(code.to_string());
    }
    let mut offset = 0;
    let mut start: Option<usize> = None;
    for line in response.split_inclusive('\n') {
        if line.starts_with(profile.function_definition_marker.as_str()) {
            start.get_or_insert(offset);
            break;
        }
        if profile.is_import_line(line) && !line.starts_with(char::is_whitespace) {
            start.get_or_insert(offset);
        } else if !line.trim().is_empty() {
            start = None;
        }
        offset += line.len();
    }
    match start {
        Some(s) if response[s..].contains(profile.function_definition_marker.as_str()) => Ok(response[s..].to_string()),
        _ => Err(PromptError::NoCodeFound),
    }
}

fn first_brace_group(text: &str) -> Option<&str> {
    let open = text.find("{{")?;
    let after = &text[open + 2..];
    let close = after.find("}}")?;
    Some(after[..close].trim())
}

fn boxed_group(text: &str) -> Option<&str> {
    let open = text.find("\\boxed{")?;
    let after = &text[open + 7..];
    let mut depth = 1;
    for (i, c) in after.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(after[..i].trim());
                }
            }
            _ => {}
        }
    }
    None
}

/// One-sentence thought from the first `{{...}}` group; text outside code
/// fences is searched first. Returns an empty string when there is none.
pub fn extract_thought(response: &str) -> String {
    let mut outside = String::new();
    let mut last = 0;
    for (s, e) in fence_blocks(response) {
        outside.push_str(&response[last..s]);
        outside.push('\n');
        last = e;
    }
    outside.push_str(&response[last.min(response.len())..]);
    let found = first_brace_group(&outside)
        .or_else(|| boxed_group(&outside))
        .or_else(|| first_brace_group(response));
    match found {
        Some(t) if !t.is_empty() => t.to_string(),
        _ => {
            log::warn!("response carries no boxed thought");
            String::new()
        }
    }
}

fn names_from_value(value: &serde_json::Value) -> Option<BTreeSet<String>> {
    let items = value.as_array()?;
    let mut out = BTreeSet::new();
    for item in items {
        match item {
            serde_json::Value::Object(map) => out.insert(map.get("name")?.as_str()?.trim().to_string()),
            serde_json::Value::String(s) => out.insert(s.trim().to_string()),
            _ => return None,
        };
    }
    Some(out)
}

/// Names from a role-analysis response: a JSON list of objects with a
/// `name` field, possibly wrapped in prose or fences.
pub fn parse_role_list(response: &str) -> Result<BTreeSet<String>, PromptError> {
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(response.trim()) {
        if let Some(names) = names_from_value(&v) {
            return Ok(names);
        }
    }
    for (i, _) in response.match_indices('[') {
        let mut stream = serde_json::Deserializer::from_str(&response[i..]).into_iter::<serde_json::Value>();
        if let Some(Ok(v)) = stream.next() {
            if let Some(names) = names_from_value(&v) {
                return Ok(names);
            }
        }
    }
    Err(PromptError::UnparsableRoleList)
}

/// Numbered list of prior strategy sentences for Template I-2.
pub fn history_summaries(thoughts: &[String]) -> String {
    if thoughts.is_empty() {
        return "None yet.".to_string();
    }
    thoughts
        .iter()
        .enumerate()
        .map(|(i, t)| alloc::format!("{}. {}", i + 1, t))
        .collect::<Vec<_>>()
        .join("\n")
}
