//! Flat key-value experiment configuration with `[section]` headers.
//! Parsing is strict: unknown sections or keys are errors, and every
//! diagnostic carries the offending line number.

use std::collections::HashMap;
use std::sync::Arc;

use idslab_core::lattice::{FolnerBoxes, LatticeGroup, Point, VertexSet};
use idslab_core::percolation::{PercolationModel, Profile};
use idslab_core::spectral::{CountConfig, FiniteGraph};
use idslab_core::{Error, Result};

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("group", &["dimension", "generators", "max_radius"]),
    ("model", &["profile", "a", "r", "beta", "s", "probs", "p_max", "tail_tol"]),
    ("boxes", &["side", "count"]),
    ("run", &["seed", "rmax", "trials"]),
    ("backend", &["dense_cutoff", "bisect_tol", "multiplicity_tol", "atom_tol"]),
    ("census", &["r", "delta", "delta_grid", "t_max"]),
    (
        "pattern",
        &["vertices", "edges", "mode", "isolation_radius", "block_side", "resamples"],
    ),
    ("tile", &["vertices", "mode", "samples"]),
    ("wset", &["max_vertices"]),
];

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed configuration plus the original text (embedded in manifests so a
/// run can be reproduced byte-for-byte from its manifest alone).
#[derive(Debug)]
pub struct ExperimentConfig {
    pub text: String,
    entries: HashMap<(String, String), Entry>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::Config(format!("config line {lineno}: unterminated section header"))
                })?;
                if !KNOWN_KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(Error::Config(format!(
                        "config line {lineno}: unknown section [{name}]"
                    )));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {lineno}: expected `key = value`"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if section.is_empty() {
                return Err(Error::Config(format!(
                    "config line {lineno}: key `{key}` appears before any section"
                )));
            }
            let allowed = KNOWN_KEYS.iter().find(|(s, _)| *s == section).unwrap().1;
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "config line {lineno}: unknown key `{key}` in [{section}]"
                )));
            }
            if entries
                .insert((section.clone(), key.clone()), Entry { value, line: lineno })
                .is_some()
            {
                return Err(Error::Config(format!(
                    "config line {lineno}: duplicate key `{key}` in [{section}]"
                )));
            }
        }
        Ok(ExperimentConfig { text: text.to_string(), entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn parse_with<T, F>(&self, section: &str, key: &str, default: T, f: F) -> Result<T>
    where
        F: Fn(&str) -> Option<T>,
    {
        match self.raw(section, key) {
            None => Ok(default),
            Some(e) => f(&e.value).ok_or_else(|| {
                Error::Config(format!(
                    "config line {}: [{section}] {key} = `{}` is not valid",
                    e.line, e.value
                ))
            }),
        }
    }

    pub fn get_u64(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        self.parse_with(section, key, default, |v| v.parse().ok())
    }

    pub fn get_usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        self.parse_with(section, key, default, |v| v.parse().ok())
    }

    pub fn get_u32(&self, section: &str, key: &str, default: u32) -> Result<u32> {
        self.parse_with(section, key, default, |v| v.parse().ok())
    }

    pub fn get_i64(&self, section: &str, key: &str, default: i64) -> Result<i64> {
        self.parse_with(section, key, default, |v| v.parse().ok())
    }

    pub fn get_f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        self.parse_with(section, key, default, |v| v.parse().ok())
    }

    pub fn get_str(&self, section: &str, key: &str, default: &str) -> String {
        self.raw(section, key)
            .map(|e| e.value.clone())
            .unwrap_or_else(|| default.to_string())
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.raw(section, key).map(|e| e.line).unwrap_or(0)
    }

    /// Semicolon-separated list of floats.
    pub fn get_f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::new();
                for part in e.value.split(';') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    out.push(part.parse().map_err(|_| {
                        Error::Config(format!(
                            "config line {}: [{section}] {key}: `{part}` is not a number",
                            e.line
                        ))
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    pub fn group(&self) -> Result<Arc<LatticeGroup>> {
        let dim = self.get_usize("group", "dimension", 1)?;
        let max_radius = self.get_u32("group", "max_radius", 64)?;
        let spec = self.get_str("group", "generators", "standard");
        let group = if spec == "standard" {
            LatticeGroup::standard(dim, max_radius)
        } else {
            let pts = parse_points(&spec).map_err(|e| {
                Error::Config(format!(
                    "config line {}: [group] generators: {e}",
                    self.line_of("group", "generators")
                ))
            })?;
            LatticeGroup::new(dim, pts, max_radius)
        };
        group
            .map(Arc::new)
            .map_err(|e| Error::Config(format!("[group]: {e}")))
    }

    pub fn model(&self, group: Arc<LatticeGroup>) -> Result<PercolationModel> {
        let p_max = self.get_f64("model", "p_max", 1.0)?;
        let tail_tol = self.get_f64("model", "tail_tol", 1e-6)?;
        let profile = match self.get_str("model", "profile", "").as_str() {
            "geometric" => Profile::Geometric {
                a: self.get_f64("model", "a", 0.25)?,
                r: self.get_f64("model", "r", 0.5)?,
            },
            "powerlaw" => Profile::PowerLaw {
                beta: self.get_f64("model", "beta", 0.1)?,
                s: self.get_f64("model", "s", 4.0)?,
            },
            "table" => Profile::Table {
                probs: self.get_f64_list("model", "probs")?.unwrap_or_default(),
            },
            "" => {
                return Err(Error::Config(
                    "[model] profile is required (geometric | powerlaw | table)".into(),
                ))
            }
            other => {
                return Err(Error::Config(format!(
                    "config line {}: [model] profile `{other}` is not one of geometric | powerlaw | table",
                    self.line_of("model", "profile")
                )))
            }
        };
        PercolationModel::new(group, profile, p_max, tail_tol)
            .map_err(|e| Error::Config(format!("[model]: {e}")))
    }

    pub fn boxes(&self) -> Result<FolnerBoxes> {
        FolnerBoxes::new(self.get_i64("boxes", "side", 100)?)
            .map_err(|e| Error::Config(format!("[boxes]: {e}")))
    }

    pub fn count_config(&self) -> Result<CountConfig> {
        Ok(CountConfig {
            dense_cutoff: self.get_usize("backend", "dense_cutoff", 2048)?,
            bisect_tol: self.get_f64("backend", "bisect_tol", 1e-10)?,
            multiplicity_tol: self.get_f64("backend", "multiplicity_tol", 1e-9)?,
            parallel: true,
        })
    }

    pub fn pattern(&self) -> Result<FiniteGraph> {
        let vspec = self.get_str("pattern", "vertices", "(0)");
        let pts = parse_points(&vspec).map_err(|e| {
            Error::Config(format!(
                "config line {}: [pattern] vertices: {e}",
                self.line_of("pattern", "vertices")
            ))
        })?;
        let vertices = VertexSet::from_points(pts);
        let espec = self.get_str("pattern", "edges", "");
        let edges = parse_index_pairs(&espec).map_err(|e| {
            Error::Config(format!(
                "config line {}: [pattern] edges: {e}",
                self.line_of("pattern", "edges")
            ))
        })?;
        FiniteGraph::from_index_edges(vertices, &edges)
            .map_err(|e| Error::Config(format!("[pattern]: {e}")))
    }

    pub fn tile(&self) -> Result<VertexSet> {
        let spec = self.get_str("tile", "vertices", "(0);(1);(2)");
        let pts = parse_points(&spec).map_err(|e| {
            Error::Config(format!(
                "config line {}: [tile] vertices: {e}",
                self.line_of("tile", "vertices")
            ))
        })?;
        Ok(VertexSet::from_points(pts))
    }
}

/// `(1,0);(-1,0)` style point lists.
pub fn parse_points(spec: &str) -> std::result::Result<Vec<Point>, String> {
    let mut out = Vec::new();
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let inner = part
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(|| format!("`{part}` is not a parenthesized point"))?;
        let mut coords = Vec::new();
        for c in inner.split(',') {
            coords.push(
                c.trim()
                    .parse::<i64>()
                    .map_err(|_| format!("`{c}` is not an integer coordinate"))?,
            );
        }
        out.push(Point::new(&coords).map_err(|e| e.to_string())?);
    }
    if out.is_empty() {
        return Err("empty point list".into());
    }
    Ok(out)
}

/// `0-1;1-2` style index pair lists.
pub fn parse_index_pairs(spec: &str) -> std::result::Result<Vec<(u32, u32)>, String> {
    let mut out = Vec::new();
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (a, b) = part
            .split_once('-')
            .ok_or_else(|| format!("`{part}` is not an `i-j` pair"))?;
        let a = a.trim().parse::<u32>().map_err(|_| format!("`{a}` is not an index"))?;
        let b = b.trim().parse::<u32>().map_err(|_| format!("`{b}` is not an index"))?;
        out.push((a, b));
    }
    Ok(out)
}
