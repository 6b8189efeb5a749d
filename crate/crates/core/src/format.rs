//! The market document: a TOML file naming workers and firms, each worker's
//! list, and each firm's choice function.
//!
//! ```toml
//! workers = ["w1", "w2"]
//! firms = ["f1", "f2"]
//!
//! [preferences]
//! w1 = ["f2", "f1"]
//! w2 = ["f1", "f2"]
//!
//! [choice.f1]
//! kind = "responsive"
//! ranking = ["w1", "w2"]
//! quota = 1
//!
//! [choice.f2]
//! kind = "table"
//! entries = [
//!     { set = [], choice = [] },
//!     { set = ["w1"], choice = [] },
//!     { set = ["w2"], choice = ["w2"] },
//!     { set = ["w1", "w2"], choice = ["w2"] },
//! ]
//! ```
//!
//! A third kind, `intersect`, takes `mu = [...]` and chooses `mu ∩ S`.
//! Emission is canonical: agents in market order, sets listed in worker order,
//! table entries in canonical subset order.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use serde::Deserialize;

use crate::choice::{ChoiceFunction, ChoiceSource};
use crate::error::{Error, Result};
use crate::games::FullGameProfile;
use crate::market::{FirmId, Market, WorkerId, WorkerPreference};
use crate::workerset::{canonical_subsets, WorkerSet, MAX_WORKERS};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarketDocument {
    workers: Vec<String>,
    firms: Vec<String>,
    #[serde(default)]
    preferences: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    choice: BTreeMap<String, ChoiceDocument>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDocument {
    preferences: BTreeMap<String, Vec<String>>,
    choice: Option<BTreeMap<String, ChoiceDocument>>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ChoiceDocument {
    Responsive { ranking: Vec<String>, quota: i64 },
    Table { entries: Vec<TableEntry> },
    Intersect { mu: Vec<String> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    set: Vec<String>,
    choice: Vec<String>,
}

fn syntax_error(text: &str, e: toml::de::Error) -> Error {
    let message = e.message().trim_end().to_owned();
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
            Error::Input(format!("line {line}, column {column}: {message}"))
        }
        None => Error::Input(message),
    }
}

fn semantic(path: &str, message: impl std::fmt::Display) -> Error {
    Error::Input(format!("{path}: {message}"))
}

struct Names {
    workers: HashMap<String, usize>,
    firms: HashMap<String, usize>,
}

impl Names {
    fn of(workers: &[String], firms: &[String]) -> Self {
        Names {
            workers: workers.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect(),
            firms: firms.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect(),
        }
    }

    fn worker_set(&self, path: &str, ids: &[String]) -> Result<WorkerSet> {
        let mut s = WorkerSet::EMPTY;
        for (i, id) in ids.iter().enumerate() {
            let w = *self
                .workers
                .get(id)
                .ok_or_else(|| semantic(&format!("{path}[{i}]"), format!("unknown worker {id:?}")))?;
            if s.contains(w) {
                return Err(semantic(&format!("{path}[{i}]"), format!("worker {id:?} listed twice")));
            }
            s.insert(w);
        }
        Ok(s)
    }

    fn preference(&self, path: &str, ids: &[String]) -> Result<WorkerPreference> {
        let mut list = Vec::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            let f = *self
                .firms
                .get(id)
                .ok_or_else(|| semantic(&format!("{path}[{i}]"), format!("unknown firm {id:?}")))?;
            if list.contains(&f) {
                return Err(semantic(&format!("{path}[{i}]"), format!("firm {id:?} listed twice")));
            }
            list.push(f);
        }
        WorkerPreference::new(list).map_err(|e| semantic(path, e))
    }

    fn preferences(&self, workers: &[String], doc: &BTreeMap<String, Vec<String>>) -> Result<Vec<WorkerPreference>> {
        if let Some(id) = doc.keys().find(|id| !self.workers.contains_key(*id)) {
            return Err(semantic(&format!("preferences.{id}"), "unknown worker"));
        }
        workers
            .iter()
            .map(|w| {
                let path = format!("preferences.{w}");
                let list = doc.get(w).ok_or_else(|| semantic(&path, "missing preference list"))?;
                self.preference(&path, list)
            })
            .collect()
    }

    fn choice(&self, path: &str, doc: &ChoiceDocument) -> Result<ChoiceFunction> {
        let ground = self.workers.len();
        match doc {
            ChoiceDocument::Responsive { ranking, quota } => {
                if *quota < 1 {
                    return Err(semantic(&format!("{path}.quota"), "quota must be at least 1"));
                }
                let mut order = Vec::with_capacity(ranking.len());
                let seen = self.worker_set(&format!("{path}.ranking"), ranking)?;
                debug_assert_eq!(seen.len(), ranking.len());
                for id in ranking {
                    order.push(self.workers[id]);
                }
                ChoiceFunction::responsive(order, *quota as usize, ground).map_err(|e| semantic(path, e))
            }
            ChoiceDocument::Intersect { mu } => {
                let target = self.worker_set(&format!("{path}.mu"), mu)?;
                ChoiceFunction::intersect(target, ground).map_err(|e| semantic(path, e))
            }
            ChoiceDocument::Table { entries } => {
                let mut table: Vec<Option<WorkerSet>> = vec![None; 1 << ground];
                for (i, entry) in entries.iter().enumerate() {
                    let at = format!("{path}.entries[{i}]");
                    let s = self.worker_set(&format!("{at}.set"), &entry.set)?;
                    let c = self.worker_set(&format!("{at}.choice"), &entry.choice)?;
                    if !c.is_subset(s) {
                        return Err(semantic(&at, "choice is not a subset of set"));
                    }
                    let slot = &mut table[s.bits() as usize];
                    if slot.is_some() {
                        return Err(semantic(&at, "set listed twice"));
                    }
                    *slot = Some(c);
                }
                if let Some(missing) = canonical_subsets(ground)
                    .into_iter()
                    .find(|s| table[s.bits() as usize].is_none())
                {
                    let ids: Vec<&str> = self.worker_ids(missing);
                    return Err(semantic(
                        &format!("{path}.entries"),
                        format!("incomplete table: no entry for [{}]", ids.join(", ")),
                    ));
                }
                let table = table.into_iter().map(|c| c.expect("checked complete")).collect();
                ChoiceFunction::from_table(ground, table).map_err(|e| semantic(path, e))
            }
        }
    }

    fn worker_ids(&self, s: WorkerSet) -> Vec<&str> {
        let mut by_index: Vec<(&usize, &String)> = self.workers.iter().map(|(k, v)| (v, k)).collect();
        by_index.sort();
        by_index
            .into_iter()
            .filter(|(i, _)| s.contains(**i))
            .map(|(_, id)| id.as_str())
            .collect()
    }

    fn choices(&self, firms: &[String], doc: &BTreeMap<String, ChoiceDocument>) -> Result<Vec<ChoiceFunction>> {
        if let Some(id) = doc.keys().find(|id| !self.firms.contains_key(*id)) {
            return Err(semantic(&format!("choice.{id}"), "unknown firm"));
        }
        firms
            .iter()
            .map(|f| {
                let path = format!("choice.{f}");
                let c = doc.get(f).ok_or_else(|| semantic(&path, "missing choice function"))?;
                self.choice(&path, c)
            })
            .collect()
    }
}

/// Parse a market document. Syntax errors carry a line and column, semantic
/// errors the path of the offending field.
pub fn parse_market(text: &str) -> Result<Market> {
    let doc: MarketDocument = toml::from_str(text).map_err(|e| syntax_error(text, e))?;
    if doc.workers.len() > MAX_WORKERS {
        return Err(Error::Capacity {
            what: "worker set",
            size: doc.workers.len(),
            bound: MAX_WORKERS,
        });
    }
    for (i, id) in doc.workers.iter().chain(&doc.firms).enumerate() {
        if id.is_empty() {
            return Err(semantic(&format!("agent {i}"), "empty id"));
        }
    }
    let names = Names::of(&doc.workers, &doc.firms);
    if names.workers.len() != doc.workers.len() {
        return Err(semantic("workers", "duplicate worker id"));
    }
    if names.firms.len() != doc.firms.len() {
        return Err(semantic("firms", "duplicate firm id"));
    }
    let preferences = names.preferences(&doc.workers, &doc.preferences)?;
    let choices = names.choices(&doc.firms, &doc.choice)?;
    Market::new(
        doc.workers.into_iter().map(WorkerId).collect(),
        doc.firms.into_iter().map(FirmId).collect(),
        preferences,
        choices,
    )
}

/// Parse a submitted profile against a market's agents. The `choice` section
/// may be omitted, in which case firms submit their true choice functions.
pub fn parse_profile(text: &str, mkt: &Market) -> Result<FullGameProfile> {
    let doc: ProfileDocument = toml::from_str(text).map_err(|e| syntax_error(text, e))?;
    let workers: Vec<String> = mkt.workers().iter().map(|w| w.0.clone()).collect();
    let firms: Vec<String> = mkt.firms().iter().map(|f| f.0.clone()).collect();
    let names = Names::of(&workers, &firms);
    let preferences = names.preferences(&workers, &doc.preferences)?;
    let choices = match &doc.choice {
        Some(choice) => names.choices(&firms, choice)?,
        None => mkt.choices().to_vec(),
    };
    Ok(FullGameProfile { preferences, choices })
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_owned()).to_string()
}

fn key(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        s.to_owned()
    } else {
        quote(s)
    }
}

fn list<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let quoted: Vec<String> = items.into_iter().map(quote).collect();
    format!("[{}]", quoted.join(", "))
}

fn set_list(mkt: &Market, s: WorkerSet) -> String {
    list(s.iter().map(|w| mkt.workers()[w].0.as_str()))
}

/// Canonical text of a market; `parse_market` inverts it exactly.
pub fn emit_market(mkt: &Market) -> String {
    let mut out = String::new();
    let workers = list(mkt.workers().iter().map(|w| w.0.as_str()));
    let firms = list(mkt.firms().iter().map(|f| f.0.as_str()));
    writeln!(out, "workers = {workers}").unwrap();
    writeln!(out, "firms = {firms}").unwrap();
    writeln!(out, "\n[preferences]").unwrap();
    for (w, p) in mkt.workers().iter().zip(mkt.preferences()) {
        let firms = list(p.acceptable().iter().map(|&f| mkt.firms()[f].0.as_str()));
        writeln!(out, "{} = {firms}", key(&w.0)).unwrap();
    }
    for (f, c) in mkt.firms().iter().zip(mkt.choices()) {
        writeln!(out, "\n[choice.{}]", key(&f.0)).unwrap();
        match c.source() {
            ChoiceSource::Responsive { ranking, quota } => {
                let ranking = list(ranking.iter().map(|&w| mkt.workers()[w].0.as_str()));
                writeln!(out, "kind = \"responsive\"\nranking = {ranking}\nquota = {quota}").unwrap();
            }
            ChoiceSource::Intersect { target } => {
                writeln!(out, "kind = \"intersect\"\nmu = {}", set_list(mkt, *target)).unwrap();
            }
            ChoiceSource::Table => {
                writeln!(out, "kind = \"table\"\nentries = [").unwrap();
                for s in canonical_subsets(c.ground_size()) {
                    writeln!(
                        out,
                        "    {{ set = {}, choice = {} }},",
                        set_list(mkt, s),
                        set_list(mkt, c.choose(s))
                    )
                    .unwrap();
                }
                writeln!(out, "]").unwrap();
            }
        }
    }
    out
}

/// A profile document over `mkt`'s agents, readable by [`parse_profile`].
pub fn emit_profile(mkt: &Market, profile: &FullGameProfile) -> Result<String> {
    let submitted = mkt
        .with_preferences(profile.preferences.clone())?
        .with_choices(profile.choices.clone())?;
    let text = emit_market(&submitted);
    let body = text.split_once("\n\n").map_or("", |(_, rest)| rest);
    Ok(body.to_owned())
}
