//! Projects, declarations and invocations of the background corpus.
//!
//! A corpus is loaded once from a line-delimited JSON facts stream and is
//! immutable afterwards. Invocation strings are interned into a dense
//! vocabulary in first-appearance order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FACTS_FORMAT: &str = "focus-facts";
pub const SNIPPETS_FORMAT: &str = "focus-snippets";
pub const FORMAT_VERSION: u32 = 1;

/// Dense index of an invocation in a corpus vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InvocationId(pub u32);

impl InvocationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for InvocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Bijection between canonical invocation strings and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    canonical: Vec<String>,
    index: HashMap<String, InvocationId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, canonical: &str) -> InvocationId {
        if let Some(&id) = self.index.get(canonical) {
            return id;
        }
        let id = InvocationId(self.canonical.len() as u32);
        self.canonical.push(canonical.to_owned());
        self.index.insert(canonical.to_owned(), id);
        id
    }

    pub fn get(&self, canonical: &str) -> Option<InvocationId> {
        self.index.get(canonical).copied()
    }

    /// Canonical string of `id`, or `None` for ids outside the vocabulary
    /// (transient ids handed out to unknown query invocations).
    pub fn canonical(&self, id: InvocationId) -> Option<&str> {
        self.canonical.get(id.index()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (InvocationId, &str)> {
        self.canonical
            .iter()
            .enumerate()
            .map(|(i, s)| (InvocationId(i as u32), s.as_str()))
    }
}

/// A method declaration with its ordered invocation list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub name: String,
    pub param_types: Vec<String>,
    pub source_ref: Option<String>,
    invocations: Vec<InvocationId>,
    set: Vec<InvocationId>,
}

impl Declaration {
    pub fn new(
        name: impl Into<String>,
        param_types: Vec<String>,
        invocations: Vec<InvocationId>,
        source_ref: Option<String>,
    ) -> Self {
        let mut set = invocations.clone();
        set.sort_unstable();
        set.dedup();
        Self {
            name: name.into(),
            param_types,
            source_ref,
            invocations,
            set,
        }
    }

    /// Invocations in source order, repeats included.
    pub fn invocations(&self) -> &[InvocationId] {
        &self.invocations
    }

    /// Sorted, de-duplicated invocation set.
    pub fn invocation_set(&self) -> &[InvocationId] {
        &self.set
    }

    pub fn contains(&self, id: InvocationId) -> bool {
        self.set.binary_search(&id).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Project {
    pub id: String,
    pub category: Option<String>,
    pub declarations: Vec<Declaration>,
}

impl Project {
    pub fn new(id: impl Into<String>, category: Option<String>, declarations: Vec<Declaration>) -> Self {
        Self {
            id: id.into(),
            category,
            declarations,
        }
    }

    pub fn declaration(&self, name: &str) -> Option<&Declaration> {
        self.declarations.iter().find(|d| d.name == name)
    }

    /// Edge weights of the project→invocation graph: how many times the
    /// project performs each invocation. Sorted by id.
    pub fn invocation_frequencies(&self) -> Vec<(InvocationId, u32)> {
        let mut counts: BTreeMap<InvocationId, u32> = BTreeMap::new();
        for decl in &self.declarations {
            for &id in decl.invocations() {
                *counts.entry(id).or_default() += 1;
            }
        }
        counts.into_iter().collect()
    }

    /// Sorted set of every invocation the project makes.
    pub fn invocation_set(&self) -> Vec<InvocationId> {
        let mut ids: Vec<_> = self
            .declarations
            .iter()
            .flat_map(|d| d.invocation_set().iter().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Immutable background corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    projects: Vec<Project>,
    vocabulary: Vocabulary,
    snippets: BTreeMap<String, String>,
    project_index: HashMap<String, usize>,
    frequencies: Vec<Vec<(InvocationId, u32)>>,
    project_count: Vec<u32>,
    declaration_count: Vec<u32>,
}

impl Corpus {
    /// Builds a corpus from already-interned projects. Fails on an empty
    /// project list, duplicate project ids, duplicate declaration names, or
    /// invocation ids outside `vocabulary`.
    pub fn new(projects: Vec<Project>, vocabulary: Vocabulary) -> Result<Self> {
        if projects.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut project_index = HashMap::with_capacity(projects.len());
        let mut project_count = vec![0u32; vocabulary.len()];
        let mut declaration_count = vec![0u32; vocabulary.len()];
        let mut frequencies = Vec::with_capacity(projects.len());
        for (idx, project) in projects.iter().enumerate() {
            if project.id.is_empty() {
                return Err(Error::InvalidArgument("empty project id".into()));
            }
            if project.declarations.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "project `{}` has no declarations",
                    project.id
                )));
            }
            if project_index.insert(project.id.clone(), idx).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate project id `{}`",
                    project.id
                )));
            }
            let mut names = HashSet::new();
            for decl in &project.declarations {
                if !names.insert(decl.name.as_str()) {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate declaration `{}` in project `{}`",
                        decl.name, project.id
                    )));
                }
                for &id in decl.invocation_set() {
                    let slot = declaration_count.get_mut(id.index()).ok_or_else(|| {
                        Error::InvalidArgument(format!("invocation {id} outside vocabulary"))
                    })?;
                    *slot += 1;
                }
            }
            let freqs = project.invocation_frequencies();
            for &(id, _) in &freqs {
                project_count[id.index()] += 1;
            }
            frequencies.push(freqs);
        }
        Ok(Self {
            projects,
            vocabulary,
            snippets: BTreeMap::new(),
            project_index,
            frequencies,
            project_count,
            declaration_count,
        })
    }

    pub fn with_snippets(mut self, snippets: BTreeMap<String, String>) -> Self {
        self.snippets = snippets;
        self
    }

    pub fn projects(&self) -> &[Project] {
        &self.projects
    }

    pub fn project(&self, index: usize) -> &Project {
        &self.projects[index]
    }

    pub fn project_index(&self, id: &str) -> Option<usize> {
        self.project_index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.projects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projects.is_empty()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn declaration_total(&self) -> usize {
        self.projects.iter().map(|p| p.declarations.len()).sum()
    }

    /// Number of projects containing `id`.
    pub fn project_count(&self, id: InvocationId) -> u32 {
        self.project_count.get(id.index()).copied().unwrap_or(0)
    }

    /// Number of declarations containing `id`.
    pub fn declaration_count(&self, id: InvocationId) -> u32 {
        self.declaration_count.get(id.index()).copied().unwrap_or(0)
    }

    pub fn project_counts(&self) -> &[u32] {
        &self.project_count
    }

    pub fn declaration_counts(&self) -> &[u32] {
        &self.declaration_count
    }

    /// Precomputed [`Project::invocation_frequencies`] of the project at `index`.
    pub fn frequencies(&self, index: usize) -> &[(InvocationId, u32)] {
        &self.frequencies[index]
    }

    pub fn snippets(&self) -> &BTreeMap<String, String> {
        &self.snippets
    }

    pub fn snippet(&self, source_ref: &str) -> Option<&str> {
        self.snippets.get(source_ref).map(String::as_str)
    }

    pub fn canonical(&self, id: InvocationId) -> Option<&str> {
        self.vocabulary.canonical(id)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactRecord {
    project: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<String>,
    declaration: String,
    #[serde(default)]
    params: Vec<String>,
    #[serde(default)]
    invocations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_ref: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnippetRecord {
    key: String,
    body: String,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn check_header(line_no: usize, text: &str, expected: &str) -> Result<()> {
    let header: Header = serde_json::from_str(text)
        .map_err(|e| parse_error(line_no, format!("invalid header: {e}")))?;
    if header.format != expected {
        return Err(parse_error(
            line_no,
            format!("expected format `{expected}`, found `{}`", header.format),
        ));
    }
    if header.version != FORMAT_VERSION {
        return Err(parse_error(
            line_no,
            format!("unsupported version {}", header.version),
        ));
    }
    Ok(())
}

/// Non-blank lines with 1-based line numbers.
fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((i + 1, l))),
            Err(e) => Some(Err(Error::from(e))),
        })
}

/// Parses a FACTS stream into a corpus.
pub fn parse_facts<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut lines = content_lines(reader);
    match lines.next() {
        None => return Err(Error::EmptyCorpus),
        Some(first) => {
            let (line_no, text) = first?;
            check_header(line_no, &text, FACTS_FORMAT)?;
        }
    }

    let mut vocabulary = Vocabulary::new();
    let mut projects: Vec<Project> = Vec::new();
    let mut seen_projects: HashSet<String> = HashSet::new();
    let mut declaration_names: HashSet<String> = HashSet::new();

    for item in lines {
        let (line_no, text) = item?;
        let record: FactRecord =
            serde_json::from_str(&text).map_err(|e| parse_error(line_no, e.to_string()))?;
        if record.project.is_empty() {
            return Err(parse_error(line_no, "empty project id"));
        }
        if record.declaration.is_empty() {
            return Err(parse_error(line_no, "empty declaration name"));
        }
        if record.invocations.iter().any(String::is_empty) {
            return Err(parse_error(line_no, "empty invocation string"));
        }

        let continues = projects.last().is_some_and(|p| p.id == record.project);
        if !continues {
            if !seen_projects.insert(record.project.clone()) {
                return Err(Error::NonContiguousProject {
                    line: line_no,
                    project: record.project,
                });
            }
            declaration_names.clear();
            projects.push(Project::new(record.project.clone(), record.category.clone(), Vec::new()));
        }
        let project = projects.last_mut().expect("pushed above");
        match (&project.category, &record.category) {
            (Some(a), Some(b)) if a != b => {
                return Err(parse_error(
                    line_no,
                    format!("conflicting categories `{a}` and `{b}` for project `{}`", project.id),
                ))
            }
            (None, Some(c)) => {
                return Err(parse_error(
                    line_no,
                    format!("category `{c}` for project `{}` appears after its first record", project.id),
                ))
            }
            _ => {}
        }
        if !declaration_names.insert(record.declaration.clone()) {
            return Err(Error::DuplicateDeclaration {
                line: line_no,
                project: record.project,
                declaration: record.declaration,
            });
        }
        let invocations = record
            .invocations
            .iter()
            .map(|s| vocabulary.intern(s))
            .collect();
        project.declarations.push(Declaration::new(
            record.declaration,
            record.params,
            invocations,
            record.source_ref,
        ));
    }

    Corpus::new(projects, vocabulary)
}

/// Serializes a corpus back into the FACTS format.
pub fn write_facts<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    let header = Header {
        format: FACTS_FORMAT.into(),
        version: FORMAT_VERSION,
    };
    serde_json::to_writer(&mut writer, &header)?;
    writeln!(writer)?;
    for project in corpus.projects() {
        for decl in &project.declarations {
            let record = FactRecord {
                project: project.id.clone(),
                category: project.category.clone(),
                declaration: decl.name.clone(),
                params: decl.param_types.clone(),
                invocations: decl
                    .invocations()
                    .iter()
                    .map(|&id| corpus.canonical(id).unwrap_or_default().to_owned())
                    .collect(),
                source_ref: decl.source_ref.clone(),
            };
            serde_json::to_writer(&mut writer, &record)?;
            writeln!(writer)?;
        }
    }
    Ok(())
}

/// Parses a SNIPPETS stream. An empty stream yields an empty map.
pub fn load_snippets<R: BufRead>(reader: R) -> Result<BTreeMap<String, String>> {
    let mut lines = content_lines(reader);
    let mut map = BTreeMap::new();
    match lines.next() {
        None => return Ok(map),
        Some(first) => {
            let (line_no, text) = first?;
            check_header(line_no, &text, SNIPPETS_FORMAT)?;
        }
    }
    for item in lines {
        let (line_no, text) = item?;
        let record: SnippetRecord =
            serde_json::from_str(&text).map_err(|e| parse_error(line_no, e.to_string()))?;
        if map.contains_key(&record.key) {
            return Err(Error::DuplicateSnippet {
                line: line_no,
                key: record.key,
            });
        }
        map.insert(record.key, record.body);
    }
    Ok(map)
}

pub fn write_snippets<W: Write>(snippets: &BTreeMap<String, String>, mut writer: W) -> Result<()> {
    let header = Header {
        format: SNIPPETS_FORMAT.into(),
        version: FORMAT_VERSION,
    };
    serde_json::to_writer(&mut writer, &header)?;
    writeln!(writer)?;
    for (key, body) in snippets {
        serde_json::to_writer(
            &mut writer,
            &SnippetRecord {
                key: key.clone(),
                body: body.clone(),
            },
        )?;
        writeln!(writer)?;
    }
    Ok(())
}

/// Builds a corpus from string-level declarations; handy for fixtures and tests.
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    vocabulary: Vocabulary,
    projects: Vec<Project>,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn project(mut self, id: &str, category: Option<&str>) -> Self {
        self.projects
            .push(Project::new(id, category.map(str::to_owned), Vec::new()));
        self
    }

    /// Adds a declaration to the most recently added project.
    pub fn declaration(mut self, name: &str, invocations: &[&str]) -> Self {
        self.push_declaration(name, invocations, None);
        self
    }

    pub fn declaration_with_source(mut self, name: &str, invocations: &[&str], source_ref: &str) -> Self {
        self.push_declaration(name, invocations, Some(source_ref.to_owned()));
        self
    }

    fn push_declaration(&mut self, name: &str, invocations: &[&str], source_ref: Option<String>) {
        let ids = invocations.iter().map(|s| self.vocabulary.intern(s)).collect();
        let project = self
            .projects
            .last_mut()
            .expect("declaration added before any project");
        project
            .declarations
            .push(Declaration::new(name, Vec::new(), ids, source_ref));
    }

    pub fn build(self) -> Result<Corpus> {
        Corpus::new(self.projects, self.vocabulary)
    }
}
