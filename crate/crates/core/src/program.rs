//! Structured representation of candidate solver programs.
//!
//! A program is a preface (imports, constants and any other top-level code
//! before the first definition) followed by a registry of top-level
//! functions. Nested definitions stay inside their parent's body. Each
//! registry entry carries a role that decides which operators may touch it.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("no function definition found in source")]
    NoFunctionsFound,
    #[error("could not resolve the entry function")]
    EntryUnresolved,
    #[error("source text is empty")]
    EmptySource,
    #[error("invalid guest profile: {0}")]
    InvalidProfile(String),
}

/// Describes the guest language well enough to split programs into
/// functions and to tell callable names apart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuestProfile {
    pub function_definition_marker: String,
    #[serde(alias = "import_line_marker")]
    pub import_line_markers: Vec<String>,
    pub builtin_symbols: BTreeSet<String>,
    /// Entry convention: first defined function whose name starts with this.
    pub entry_prefix: String,
    /// Reserved words that may precede `(` without being calls.
    #[serde(default = "default_keywords")]
    pub keywords: BTreeSet<String>,
}

const PYTHON_BUILTINS: &[&str] = &[
    "abs", "all", "any", "ascii", "bin", "bool", "bytearray", "bytes", "callable", "chr",
    "classmethod", "compile", "complex", "delattr", "dict", "dir", "divmod", "enumerate", "eval",
    "exec", "filter", "float", "format", "frozenset", "getattr", "globals", "hasattr", "hash",
    "hex", "id", "input", "int", "isinstance", "issubclass", "iter", "len", "list", "locals",
    "map", "max", "memoryview", "min", "next", "object", "oct", "open", "ord", "pow", "print",
    "property", "range", "repr", "reversed", "round", "set", "setattr", "slice", "sorted",
    "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip", "__import__",
    "BaseException", "Exception", "ArithmeticError", "AssertionError", "AttributeError",
    "IndexError", "KeyError", "LookupError", "NameError", "NotImplementedError", "OverflowError",
    "RuntimeError", "StopIteration", "TimeoutError", "TypeError", "ValueError",
    "ZeroDivisionError", "MemoryError", "RecursionError",
    // pinned numeric library, bound by its conventional alias
    "np", "numpy",
];

const PYTHON_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if",
    "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try",
    "while", "with", "yield", "match", "case",
];

fn default_keywords() -> BTreeSet<String> {
    PYTHON_KEYWORDS.iter().map(|s| s.to_string()).collect()
}

impl Default for GuestProfile {
    /// Profile for the Python guest runner.
    fn default() -> Self {
        Self {
            function_definition_marker: "def ".into(),
            import_line_markers: alloc::vec!["import ".into(), "from ".into()],
            builtin_symbols: PYTHON_BUILTINS.iter().map(|s| s.to_string()).collect(),
            entry_prefix: "solve".into(),
            keywords: default_keywords(),
        }
    }
}

impl GuestProfile {
    pub fn validate(&self) -> Result<(), ProgramError> {
        if self.function_definition_marker.is_empty() {
            return Err(ProgramError::InvalidProfile("empty function_definition_marker".into()));
        }
        if self.import_line_markers.is_empty() || self.import_line_markers.iter().any(String::is_empty) {
            return Err(ProgramError::InvalidProfile("empty import_line_marker".into()));
        }
        if self.builtin_symbols.is_empty() {
            return Err(ProgramError::InvalidProfile("builtin_symbols is empty".into()));
        }
        Ok(())
    }

    pub fn is_import_line(&self, line: &str) -> bool {
        let t = line.trim_start();
        self.import_line_markers.iter().any(|m| t.starts_with(m.as_str()))
    }

    /// Keyword that opens a definition, e.g. `def` for a `"def "` marker.
    pub fn definition_keyword(&self) -> &str {
        self.function_definition_marker.trim()
    }

    /// Name defined by a line starting with the definition marker.
    pub fn defined_name<'a>(&self, line: &'a str) -> Option<&'a str> {
        let rest = line.trim_start().strip_prefix(self.function_definition_marker.as_str())?;
        let rest = rest.trim_start();
        let end = rest.find(|c: char| !lexer::is_ident_char(c)).unwrap_or(rest.len());
        let name = &rest[..end];
        if name.is_empty() || !name.starts_with(lexer::is_ident_start) {
            return None;
        }
        Some(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Mutable,
    Immutable,
    Entry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionEntry {
    pub name: String,
    /// The definition line itself.
    pub signature: String,
    /// Full definition text, including leading decorators or comments,
    /// nested definitions and any top-level statements that follow the
    /// definition before the next one.
    pub body: String,
    pub role: Role,
}

impl FunctionEntry {
    /// Signature with whitespace collapsed, used for interface comparisons.
    pub fn normalized_signature(&self) -> String {
        self.signature.split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredProgram {
    pub preface: String,
    registry: Vec<FunctionEntry>,
    entry: String,
}

/// Definitions parsed out of a text that need not contain an entry function,
/// e.g. a generated helper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub preface: String,
    pub functions: Vec<FunctionEntry>,
}

fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

fn trim_trailing_blank_lines(lines: &[&str]) -> String {
    let mut end = lines.len();
    while end > 0 && is_blank(lines[end - 1]) {
        end -= 1;
    }
    let mut start = 0;
    while start < end && is_blank(lines[start]) {
        start += 1;
    }
    lines[start..end].join("\n")
}

/// Splits source text into a preface and top-level definitions.
pub fn parse_fragment(text: &str, profile: &GuestProfile) -> Result<Fragment, ProgramError> {
    if text.trim().is_empty() {
        return Err(ProgramError::EmptySource);
    }
    let text = text.replace("\r\n", "\n");
    let lines: Vec<&str> = text.split('\n').collect();
    let scan = lexer::scan(&text);
    let top_level = |i: usize| -> bool {
        let line = lines[i];
        scan.clean_start.get(i).copied().unwrap_or(false)
            && !line.is_empty()
            && !line.starts_with(char::is_whitespace)
    };

    // Lines that open a top-level definition, pulled upward over directly
    // attached decorators and comments.
    let mut starts: Vec<(usize, usize)> = Vec::new(); // (chunk start, def line)
    for i in 0..lines.len() {
        if top_level(i) && lines[i].starts_with(profile.function_definition_marker.as_str())
            && profile.defined_name(lines[i]).is_some()
        {
            let floor = starts.last().map(|&(_, d)| d + 1).unwrap_or(0);
            let mut s = i;
            while s > floor {
                let prev = lines[s - 1];
                let attached = top_level(s - 1) && prev.starts_with('@')
                    || (!prev.is_empty() && prev.starts_with('#'));
                if attached {
                    s -= 1;
                } else {
                    break;
                }
            }
            starts.push((s, i));
        }
    }
    if starts.is_empty() {
        return Err(ProgramError::NoFunctionsFound);
    }

    let preface = trim_trailing_blank_lines(&lines[..starts[0].0]);
    let mut functions: Vec<FunctionEntry> = Vec::new();
    for (k, &(s, d)) in starts.iter().enumerate() {
        let end = starts.get(k + 1).map(|&(n, _)| n).unwrap_or(lines.len());
        let body = trim_trailing_blank_lines(&lines[s..end]);
        let signature = lines[d].to_string();
        let name = profile.defined_name(lines[d]).unwrap_or_default().to_string();
        let entry = FunctionEntry { name, signature, body, role: Role::Mutable };
        if let Some(pos) = functions.iter().position(|f| f.name == entry.name) {
            log::warn!("function `{}` defined twice; keeping the later definition", entry.name);
            functions.remove(pos);
        }
        functions.push(entry);
    }
    Ok(Fragment { preface, functions })
}

/// Parses guest source into a structured program. The entry is the hinted
/// name when it is defined, else the first function matching the profile's
/// entry prefix. Fresh programs mark every non-entry function Mutable.
pub fn parse_source(
    text: &str,
    profile: &GuestProfile,
    entry_hint: Option<&str>,
) -> Result<StructuredProgram, ProgramError> {
    let fragment = parse_fragment(text, profile)?;
    StructuredProgram::from_fragment(fragment, profile, entry_hint)
}

/// Renders the program back to source: preface first, then every function
/// in registry order, separated by single blank lines.
pub fn render_source(program: &StructuredProgram) -> String {
    let mut parts: Vec<&str> = Vec::new();
    if !program.preface.trim().is_empty() {
        parts.push(program.preface.trim_end());
    }
    for f in &program.registry {
        parts.push(f.body.trim_end());
    }
    let mut out = parts.join("\n\n");
    out.push('\n');
    out
}

/// Marks the named functions Mutable, the entry Entry and everything else
/// Immutable. Unknown names are ignored; they are returned for reporting.
pub fn apply_role_partition(
    program: &StructuredProgram,
    mutable_names: &BTreeSet<String>,
) -> (StructuredProgram, Vec<String>) {
    let mut out = program.clone();
    for f in &mut out.registry {
        f.role = if f.name == out.entry {
            Role::Entry
        } else if mutable_names.contains(&f.name) {
            Role::Mutable
        } else {
            Role::Immutable
        };
    }
    let unknown: Vec<String> = mutable_names
        .iter()
        .filter(|n| !program.contains(n))
        .cloned()
        .collect();
    for name in &unknown {
        log::warn!("role analysis named unknown function `{name}`");
    }
    (out, unknown)
}

impl StructuredProgram {
    pub fn from_fragment(
        fragment: Fragment,
        profile: &GuestProfile,
        entry_hint: Option<&str>,
    ) -> Result<Self, ProgramError> {
        let Fragment { preface, mut functions } = fragment;
        let entry = entry_hint
            .filter(|h| functions.iter().any(|f| f.name == *h))
            .map(str::to_string)
            .or_else(|| {
                functions
                    .iter()
                    .find(|f| f.name.starts_with(profile.entry_prefix.as_str()))
                    .map(|f| f.name.clone())
            })
            .ok_or(ProgramError::EntryUnresolved)?;
        for f in &mut functions {
            f.role = if f.name == entry { Role::Entry } else { Role::Mutable };
        }
        Ok(Self { preface, registry: functions, entry })
    }

    pub fn entry(&self) -> &str {
        &self.entry
    }

    pub fn entry_function(&self) -> &FunctionEntry {
        self.get(&self.entry).expect("entry is always registered")
    }

    pub fn functions(&self) -> &[FunctionEntry] {
        &self.registry
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registry.iter().map(|f| f.name.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&FunctionEntry> {
        self.registry.iter().find(|f| f.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &FunctionEntry> {
        self.registry.iter().filter(move |f| f.role == role)
    }

    /// Replaces the text of an existing function, keeping its position and
    /// role. Returns false if the name is not registered.
    pub fn replace_function(&mut self, name: &str, signature: String, body: String) -> bool {
        match self.registry.iter_mut().find(|f| f.name == name) {
            Some(f) => {
                f.signature = signature;
                f.body = body;
                true
            }
            None => false,
        }
    }

    /// Installs `function` as the new entry. An existing function with the
    /// same name is replaced in place; otherwise the old entry's slot is
    /// reused and the previous entry is dropped.
    pub fn set_entry_function(&mut self, mut function: FunctionEntry) {
        function.role = Role::Entry;
        let old = core::mem::replace(&mut self.entry, function.name.clone());
        if let Some(pos) = self.registry.iter().position(|f| f.name == function.name) {
            self.registry[pos] = function;
            if old != self.entry {
                if let Some(old_pos) = self.registry.iter().position(|f| f.name == old) {
                    self.registry[old_pos].role = Role::Mutable;
                }
            }
        } else if let Some(pos) = self.registry.iter().position(|f| f.name == old) {
            self.registry[pos] = function;
        } else {
            self.registry.push(function);
        }
    }

    /// Appends a function if its name is free. Returns false otherwise.
    pub fn insert_function(&mut self, mut function: FunctionEntry, role: Role) -> bool {
        if self.contains(&function.name) {
            return false;
        }
        function.role = if role == Role::Entry { Role::Immutable } else { role };
        self.registry.push(function);
        true
    }

    /// Keeps only functions whose name satisfies `keep`; the entry always
    /// survives.
    pub fn retain_functions(&mut self, mut keep: impl FnMut(&str) -> bool) {
        let entry = self.entry.clone();
        self.registry.retain(|f| f.name == entry || keep(&f.name));
    }

    /// Appends import lines from `preface` that are not present yet.
    pub fn merge_imports(&mut self, preface: &str, profile: &GuestProfile) {
        for line in preface.lines() {
            if line.starts_with(char::is_whitespace) || !profile.is_import_line(line) {
                continue;
            }
            let present = self.preface.lines().any(|l| l.trim_end() == line.trim_end());
            if !present {
                if !self.preface.is_empty() && !self.preface.ends_with('\n') {
                    self.preface.push('\n');
                }
                self.preface.push_str(line.trim_end());
            }
        }
    }

    /// Signatures plus docstrings, the view given to role analysis.
    pub fn structure_summary(&self) -> String {
        let mut out = String::new();
        for f in &self.registry {
            out.push_str(&f.signature);
            out.push('\n');
            if let Some(doc) = docstring(&f.body) {
                out.push_str(&doc);
                out.push('\n');
            }
            out.push('\n');
        }
        out.trim_end().to_string()
    }
}

/// First triple-quoted string directly after the definition line.
fn docstring(body: &str) -> Option<String> {
    let mut lines = body.lines().skip_while(|l| l.starts_with('@') || l.starts_with('#'));
    lines.next()?;
    let mut out: Vec<&str> = Vec::new();
    let mut quote: Option<&str> = None;
    for line in lines {
        let t = line.trim();
        match quote {
            None => {
                if t.is_empty() {
                    continue;
                }
                let q = if t.starts_with("\"\"\"") {
                    "\"\"\""
                } else if t.starts_with("'''") {
                    "'''"
                } else {
                    return None;
                };
                out.push(line);
                if t.len() >= 6 && t[3..].contains(q) {
                    return Some(out.join("\n"));
                }
                quote = Some(q);
            }
            Some(q) => {
                out.push(line);
                if t.contains(q) {
                    return Some(out.join("\n"));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn normalize(text: &str) -> String {
        text.lines().map(str::trim_end).collect::<Vec<_>>().join("\n").trim_end().to_string()
    }

    const TWO_FUNCS: &str = "import math\n\ndef solve(n):\n    return helper(n)\n\ndef helper(n):\n    return math.sqrt(n)\n";

    #[test]
    fn parses_preface_and_registry() {
        let p = parse_source(TWO_FUNCS, &GuestProfile::default(), Some("solve")).unwrap();
        assert_eq!(p.preface, "import math");
        assert_eq!(p.functions().len(), 2);
        assert_eq!(p.entry(), "solve");
        assert_eq!(p.get("solve").unwrap().role, Role::Entry);
        assert_eq!(p.get("helper").unwrap().role, Role::Mutable);
        assert_eq!(p.get("helper").unwrap().signature, "def helper(n):");
    }

    #[test]
    fn round_trip_is_identity() {
        let p = parse_source(TWO_FUNCS, &GuestProfile::default(), Some("solve")).unwrap();
        assert_eq!(normalize(&render_source(&p)), normalize(TWO_FUNCS));
    }

    #[test]
    fn nested_definitions_stay_in_body() {
        let src = "def solve(x):\n    def inner(y):\n        return y\n    return inner(x)\n";
        let p = parse_source(src, &GuestProfile::default(), None).unwrap();
        assert_eq!(p.functions().len(), 1);
        assert!(p.entry_function().body.contains("def inner(y):"));
    }

    #[test]
    fn constants_belong_to_preface() {
        let src = "import random\nLIMIT = 10\nfrom math import sqrt\n\ndef solve_x():\n    return LIMIT\n";
        let p = parse_source(src, &GuestProfile::default(), None).unwrap();
        assert_eq!(p.preface, "import random\nLIMIT = 10\nfrom math import sqrt");
        assert_eq!(p.entry(), "solve_x");
    }

    #[test]
    fn empty_preface_renders_function_only() {
        let src = "def solve():\n    return 1\n";
        let p = parse_source(src, &GuestProfile::default(), None).unwrap();
        assert_eq!(render_source(&p), src);
    }

    #[test]
    fn two_functions_render_in_order() {
        let p = parse_source(TWO_FUNCS, &GuestProfile::default(), Some("solve")).unwrap();
        let out = render_source(&p);
        let a = out.find("def solve").unwrap();
        let b = out.find("def helper").unwrap();
        assert!(a < b);
    }

    #[test]
    fn missing_definitions_and_entry() {
        let profile = GuestProfile::default();
        assert_eq!(parse_source("x = 1\n", &profile, None), Err(ProgramError::NoFunctionsFound));
        assert_eq!(
            parse_source("def helper():\n    pass\n", &profile, None),
            Err(ProgramError::EntryUnresolved)
        );
        // an unknown hint falls back to the naming convention
        let p = parse_source("def helper():\n    pass\ndef solve():\n    pass\n", &profile, Some("nope")).unwrap();
        assert_eq!(p.entry(), "solve");
    }

    #[test]
    fn decorators_and_comments_attach_to_following_def() {
        let src = "import functools\n\n# cached distance\n@functools.lru_cache(None)\ndef dist(a):\n    return a\n\ndef solve():\n    return dist(1)\n";
        let p = parse_source(src, &GuestProfile::default(), None).unwrap();
        assert_eq!(p.preface, "import functools");
        let dist = p.get("dist").unwrap();
        assert!(dist.body.starts_with("# cached distance\n@functools"));
        assert_eq!(dist.signature, "def dist(a):");
        assert_eq!(normalize(&render_source(&p)), normalize(src));
    }

    #[test]
    fn docstring_with_column_zero_text_does_not_split() {
        let src = "def solve():\n    \"\"\"Doc\ndef not_a_function():\n\"\"\"\n    return 1\n";
        let p = parse_source(src, &GuestProfile::default(), None).unwrap();
        assert_eq!(p.functions().len(), 1);
    }

    #[test]
    fn role_partition() {
        let src = "def solve():\n    return helper() + dist()\n\ndef helper():\n    return 1\n\ndef dist():\n    return 2\n";
        let p = parse_source(src, &GuestProfile::default(), None).unwrap();
        let names: BTreeSet<String> = ["helper".to_string()].into_iter().collect();
        let (q, unknown) = apply_role_partition(&p, &names);
        assert!(unknown.is_empty());
        assert_eq!(q.get("helper").unwrap().role, Role::Mutable);
        assert_eq!(q.get("dist").unwrap().role, Role::Immutable);
        assert_eq!(q.get("solve").unwrap().role, Role::Entry);

        let (all_imm, _) = apply_role_partition(&p, &BTreeSet::new());
        assert_eq!(all_imm.with_role(Role::Mutable).count(), 0);

        let with_unknown: BTreeSet<String> = ["helper".to_string(), "ghost".to_string()].into_iter().collect();
        let (r, unknown) = apply_role_partition(&p, &with_unknown);
        assert_eq!(r, q);
        assert_eq!(unknown, vec!["ghost".to_string()]);
    }

    #[test]
    fn structure_summary_has_signatures_and_docstrings() {
        let src = "def solve():\n    \"\"\"Main.\"\"\"\n    return 1\n\ndef score(x):\n    '''Priority\n    rule.'''\n    return x\n";
        let p = parse_source(src, &GuestProfile::default(), None).unwrap();
        let s = p.structure_summary();
        assert!(s.contains("def solve():\n    \"\"\"Main.\"\"\""));
        assert!(s.contains("'''Priority\n    rule.'''"));
        assert!(!s.contains("return"));
    }

    #[test]
    fn set_entry_replaces_old_slot() {
        let mut p = parse_source(TWO_FUNCS, &GuestProfile::default(), Some("solve")).unwrap();
        let frag = parse_fragment("def solve_v2(n):\n    return 0\n", &GuestProfile::default()).unwrap();
        p.set_entry_function(frag.functions[0].clone());
        assert_eq!(p.entry(), "solve_v2");
        assert!(!p.contains("solve"));
        assert_eq!(p.functions()[0].name, "solve_v2");
    }

    #[test]
    fn merge_imports_appends_missing_only() {
        let mut p = parse_source(TWO_FUNCS, &GuestProfile::default(), Some("solve")).unwrap();
        p.merge_imports("import math\nimport random\nX = 3", &GuestProfile::default());
        assert_eq!(p.preface, "import math\nimport random");
    }

    #[test]
    fn profile_validation() {
        let mut profile = GuestProfile::default();
        assert!(profile.validate().is_ok());
        profile.function_definition_marker.clear();
        assert!(profile.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ident() -> impl Strategy<Value = String> {
            "[a-z][a-z0-9_]{0,6}"
        }

        fn body_line() -> impl Strategy<Value = String> {
            prop_oneof![
                Just("    return 1".to_string()),
                Just("    # comment ( with paren".to_string()),
                Just("    x = foo(1)".to_string()),
                Just("    s = 'def nope():'".to_string()),
                Just("    for i in range(3):\n        pass".to_string()),
            ]
        }

        prop_compose! {
            fn function()(name in ident(), lines in prop::collection::vec(body_line(), 1..4)) -> String {
                let mut out = alloc::format!("def f_{name}(a, b):");
                for l in lines {
                    out.push('\n');
                    out.push_str(&l);
                }
                out
            }
        }

        proptest! {
            #[test]
            fn render_parse_round_trip(
                imports in prop::collection::vec(prop_oneof![Just("import math"), Just("import random"), Just("LIMIT = 4")], 0..3),
                funcs in prop::collection::vec(function(), 1..5),
            ) {
                let mut names = BTreeSet::new();
                let funcs: Vec<String> = funcs.into_iter().filter(|f| names.insert(f.lines().next().unwrap().to_string())).collect();
                let mut parts: Vec<String> = Vec::new();
                if !imports.is_empty() {
                    parts.push(imports.join("\n"));
                }
                parts.push("def solve(x):\n    return x".to_string());
                parts.extend(funcs);
                let text = parts.join("\n\n") + "\n";
                let p = parse_source(&text, &GuestProfile::default(), None).unwrap();
                prop_assert_eq!(normalize(&render_source(&p)), normalize(&text));
            }

            #[test]
            fn parse_is_total_with_a_marker(prefix in "[ -~\n]{0,60}", suffix in "[ -~\n]{0,60}") {
                let text = alloc::format!("{prefix}\ndef solve():\n    pass\n{suffix}");
                // lines before the definition may open a bracket or string; the
                // only admissible failures are the documented ones
                match parse_source(&text, &GuestProfile::default(), None) {
                    Ok(p) => prop_assert!(p.contains(p.entry())),
                    Err(e) => prop_assert!(matches!(e, ProgramError::EntryUnresolved | ProgramError::NoFunctionsFound)),
                }
            }

            #[test]
            fn partition_covers_registry(mask in prop::collection::vec(any::<bool>(), 3)) {
                let src = "def solve():\n    pass\n\ndef a():\n    pass\n\ndef b():\n    pass\n\ndef c():\n    pass\n";
                let p = parse_source(src, &GuestProfile::default(), None).unwrap();
                let chosen: BTreeSet<String> = ["a", "b", "c"].iter().zip(&mask).filter(|(_, m)| **m).map(|(n, _)| n.to_string()).collect();
                let (q, _) = apply_role_partition(&p, &chosen);
                prop_assert_eq!(q.with_role(Role::Entry).count(), 1);
                prop_assert_eq!(q.functions().len(), p.functions().len());
                prop_assert_eq!(&q.preface, &p.preface);
                for (x, y) in p.functions().iter().zip(q.functions()) {
                    prop_assert_eq!(&x.body, &y.body);
                    prop_assert_eq!(&x.name, &y.name);
                }
            }
        }
    }
}
