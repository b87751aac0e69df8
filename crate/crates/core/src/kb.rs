//! Persistent knowledge base: a map from (function, scope) to a variable
//! signature and its safe region, serialized as a versioned, line-oriented
//! text format.
//!
//! The format is deterministic — entries, frontier points, vertices, and
//! facets are written in canonical order, rationals as `num/den` — so two
//! stores of the same snapshot are byte-identical and knowledge bases can
//! be diffed. Hull entries store the vertex coordinates, each facet's
//! vertex-index list, and its inward normal, so membership tests run at
//! load time without re-solving any geometry.
//!
//! ```text
//! checklang-kb 1 kind=hull c_max=4294967295 merges=2
//! entry func=escape scope=function samples=2 created=1 updated=2
//! vars n:+ s:+
//! point 1 855
//! point 16 60
//! hull dim=2 rank=2
//! anchor 0 0
//! pivot 0 1
//! basis 1/1 0/1
//! basis 0/1 1/1
//! vertex 0 0
//! vertex 0 855
//! ...
//! facet v=0,1 n=1,0 off=0
//! ...
//! end
//! ```

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::geometry::{Facet, Hull, Point};
use crate::interp::RegionQuerier;
use crate::region::{
    Correlation, HullRegion, OverflowSpec, RegionKind, UnionRegion, VariableSignature,
};
use crate::trace::{Scope, TraceRecord};

pub const KB_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KbError {
    /// Malformed input, with the 1-based line and the byte offset of that
    /// line's start.
    Parse {
        line: usize,
        offset: usize,
        message: String,
    },
    /// Unsupported format version.
    Version { found: String },
}

impl fmt::Display for KbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KbError::Parse {
                line,
                offset,
                message,
            } => write!(
                f,
                "knowledge base parse error at line {line} (byte offset {offset}): {message}"
            ),
            KbError::Version { found } => {
                write!(
                    f,
                    "unsupported knowledge base version `{found}` (expected {KB_FORMAT_VERSION})"
                )
            }
        }
    }
}

/// Safe-region payload of one entry.
#[derive(Clone, Debug)]
pub enum RegionData {
    Union(UnionRegion),
    Hull(HullRegion),
}

impl RegionData {
    pub fn signature(&self) -> &VariableSignature {
        match self {
            RegionData::Union(r) => r.signature(),
            RegionData::Hull(r) => r.signature(),
        }
    }

    pub fn query_point(&self, p: &Point) -> bool {
        match self {
            RegionData::Union(r) => r.query(p).map(|d| d.is_safe()).unwrap_or(false),
            RegionData::Hull(r) => r.query(p).map(|d| d.is_safe()).unwrap_or(false),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KbEntry {
    pub func: String,
    pub scope: Scope,
    pub region: RegionData,
    /// Trace points that entered the region (gating and guard included).
    pub sample_count: u64,
    /// Merge batch that created the entry.
    pub created: u64,
    /// Number of merge batches that changed the entry.
    pub updated: u64,
}

/// Immutable knowledge-base snapshot. Merging produces a new snapshot;
/// loads and stores round-trip byte-exactly.
#[derive(Clone, Debug, Default)]
pub struct KbSnapshot {
    pub kind: Option<RegionKind>,
    pub c_max: u64,
    pub merges: u64,
    pub entries: BTreeMap<(String, Scope), KbEntry>,
}

impl KbSnapshot {
    pub fn new(kind: RegionKind, c_max: u64) -> Self {
        KbSnapshot {
            kind: Some(kind),
            c_max,
            merges: 0,
            entries: BTreeMap::new(),
        }
    }

    pub fn entry(&self, func: &str, scope: Scope) -> Option<&KbEntry> {
        self.entries.get(&(func.to_string(), scope))
    }

    /// Functions that keep both a checked and a check-free execution path
    /// (the code-growth metric): those with at least one region entry.
    pub fn dual_functions(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.entries.keys().map(|(f, _)| f.as_str()).collect();
        names.dedup();
        names
    }

    /// Fold verified trace records into the snapshot. Records that did not
    /// pass all checks are skipped; records whose values cannot enter a
    /// region (missing variables, out-of-range values, wraparound index
    /// sums) are skipped with a warning. Returns the grown snapshot and
    /// the warnings.
    pub fn merge(&self, records: &[TraceRecord]) -> (KbSnapshot, Vec<String>) {
        let mut next = self.clone();
        next.merges += 1;
        let batch = next.merges;
        let mut warnings = Vec::new();
        let kind = match next.kind {
            Some(k) => k,
            None => {
                warnings.push("snapshot has no region kind; nothing merged".to_string());
                return (next, warnings);
            }
        };
        for rec in records {
            if !rec.all_checks_passed {
                continue;
            }
            if kind == RegionKind::Hull && !rec.linear {
                warnings.push(format!(
                    "{} {}: non-linear scope kept out of the hull store",
                    rec.func, rec.scope
                ));
                continue;
            }
            let key = (rec.func.clone(), rec.scope);
            let sig_vars: Vec<(String, Correlation)> = rec
                .vars
                .keys()
                .map(|name| {
                    let corr = rec
                        .correlations
                        .get(name)
                        .and_then(|s| s.chars().next())
                        .and_then(Correlation::from_symbol)
                        .unwrap_or(Correlation::Positive);
                    (name.clone(), corr)
                })
                .collect();
            let signature = match VariableSignature::new(sig_vars, next.c_max) {
                Ok(s) => s,
                Err(e) => {
                    warnings.push(format!(
                        "{} {}: unusable signature: {e}",
                        rec.func, rec.scope
                    ));
                    continue;
                }
            };

            // Integer-overflow guard: discard points whose index sums would
            // wrap the 32-bit range.
            let guard = OverflowSpec {
                term_lists: rec
                    .index_terms
                    .iter()
                    .filter(|terms| terms.iter().all(|&t| t >= 0))
                    .map(|terms| terms.iter().map(|&t| t as u64).collect())
                    .collect(),
            };
            if guard.rejects(next.c_max) {
                warnings.push(format!(
                    "{} {}: discarded wraparound data point",
                    rec.func, rec.scope
                ));
                continue;
            }

            let point = match signature.transform(&rec.vars) {
                Ok(p) => p,
                Err(e) => {
                    warnings.push(format!("{} {}: skipped record: {e}", rec.func, rec.scope));
                    continue;
                }
            };

            // Signature conflicts reset the entry (conservative).
            if let Some(existing) = next.entries.get(&key) {
                if existing.region.signature() != &signature {
                    warnings.push(format!(
                        "{} {}: signature changed; entry reset",
                        rec.func, rec.scope
                    ));
                    next.entries.remove(&key);
                }
            }

            match next.entries.get_mut(&key) {
                Some(entry) => {
                    let changed;
                    match &mut entry.region {
                        RegionData::Union(r) => {
                            let grown = match r.insert(&point) {
                                Ok(g) => g,
                                Err(e) => {
                                    warnings.push(format!(
                                        "{} {}: skipped record: {e}",
                                        rec.func, rec.scope
                                    ));
                                    continue;
                                }
                            };
                            changed = grown.frontier() != r.frontier();
                            *r = grown;
                        }
                        RegionData::Hull(r) => {
                            let grown = match r.update(&point, &guard) {
                                Ok(g) => g,
                                Err(e) => {
                                    warnings.push(format!(
                                        "{} {}: skipped record: {e}",
                                        rec.func, rec.scope
                                    ));
                                    continue;
                                }
                            };
                            changed = grown.samples() != r.samples();
                            *r = grown;
                        }
                    }
                    entry.sample_count += 1;
                    if changed && entry.updated != batch {
                        entry.updated = batch;
                    }
                }
                None => {
                    let region = match kind {
                        RegionKind::Union => match UnionRegion::empty(signature).insert(&point) {
                            Ok(r) => RegionData::Union(r),
                            Err(e) => {
                                warnings.push(format!(
                                    "{} {}: skipped record: {e}",
                                    rec.func, rec.scope
                                ));
                                continue;
                            }
                        },
                        RegionKind::Hull => {
                            match HullRegion::build(alloc::vec![point], signature) {
                                Ok(r) => RegionData::Hull(r),
                                Err(e) => {
                                    warnings.push(format!(
                                        "{} {}: skipped record: {e}",
                                        rec.func, rec.scope
                                    ));
                                    continue;
                                }
                            }
                        }
                    };
                    next.entries.insert(
                        key.clone(),
                        KbEntry {
                            func: key.0,
                            scope: rec.scope,
                            region,
                            sample_count: 1,
                            created: batch,
                            updated: batch,
                        },
                    );
                }
            }
        }
        (next, warnings)
    }

    // -- serialization ----------------------------------------------------

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            Some(RegionKind::Union) => "union",
            Some(RegionKind::Hull) => "hull",
            None => "none",
        };
        out.push_str(&format!(
            "checklang-kb {KB_FORMAT_VERSION} kind={kind} c_max={} merges={}\n",
            self.c_max, self.merges
        ));
        for entry in self.entries.values() {
            out.push_str(&format!(
                "entry func={} scope={} samples={} created={} updated={}\n",
                entry.func, entry.scope, entry.sample_count, entry.created, entry.updated
            ));
            let sig = entry.region.signature();
            let vars: Vec<String> = sig
                .vars()
                .map(|(n, c)| format!("{n}:{}", c.symbol()))
                .collect();
            out.push_str(&format!("vars {}\n", vars.join(" ")));
            match &entry.region {
                RegionData::Union(r) => {
                    for p in r.frontier() {
                        out.push_str(&format!("point {}\n", coords_line(p)));
                    }
                }
                RegionData::Hull(r) => {
                    for p in r.samples() {
                        out.push_str(&format!("point {}\n", coords_line(p)));
                    }
                    serialize_hull(&mut out, r.hull());
                }
            }
            out.push_str("end\n");
        }
        out
    }

    pub fn parse(text: &str) -> Result<KbSnapshot, KbError> {
        Parser::new(text).parse()
    }
}

fn coords_line(p: &Point) -> String {
    let parts: Vec<String> = p.coords().iter().map(u64::to_string).collect();
    parts.join(" ")
}

fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Write a hull in canonical form: vertices sorted by coordinates and
/// reindexed, facets with sorted vertex-id lists, sorted lexicographically.
fn serialize_hull(out: &mut String, hull: &Hull) {
    out.push_str(&format!("hull dim={} rank={}\n", hull.dim(), hull.rank()));
    let anchor: Vec<String> = hull.anchor().iter().map(i64::to_string).collect();
    out.push_str(&format!("anchor {}\n", anchor.join(" ")));
    let pivots: Vec<String> = hull.basis().pivots().iter().map(usize::to_string).collect();
    out.push_str(&format!("pivot {}\n", pivots.join(" ")));
    for row in hull.basis().rows() {
        let cells: Vec<String> = row.iter().map(rational_str).collect();
        out.push_str(&format!("basis {}\n", cells.join(" ")));
    }

    let mut vertices: Vec<(&usize, &Point)> = hull.vertices().iter().collect();
    vertices.sort_by_key(|(_, p)| p.coords());
    let remap: BTreeMap<usize, usize> = vertices
        .iter()
        .enumerate()
        .map(|(new, (old, _))| (**old, new))
        .collect();
    for (_, p) in &vertices {
        out.push_str(&format!("vertex {}\n", coords_line(p)));
    }
    let mut facets: Vec<(Vec<usize>, &Facet)> = hull
        .facets()
        .iter()
        .map(|f| {
            let mut ids: Vec<usize> = f.vertex_ids.iter().map(|id| remap[id]).collect();
            ids.sort_unstable();
            (ids, f)
        })
        .collect();
    facets.sort_by(|a, b| a.0.cmp(&b.0));
    for (ids, f) in facets {
        let ids: Vec<String> = ids.iter().map(usize::to_string).collect();
        let normal: Vec<String> = f.normal.iter().map(BigInt::to_string).collect();
        out.push_str(&format!(
            "facet v={} n={} off={}\n",
            ids.join(","),
            normal.join(","),
            f.offset
        ));
    }
}

struct Parser<'a> {
    lines: Vec<(usize, usize, &'a str)>, // (line number, byte offset, text)
    idx: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = Vec::new();
        let mut offset = 0;
        for (i, line) in text.split('\n').enumerate() {
            if !line.trim().is_empty() {
                lines.push((i + 1, offset, line.trim_end()));
            }
            offset += line.len() + 1;
        }
        Parser { lines, idx: 0 }
    }

    fn err(&self, message: impl Into<String>) -> KbError {
        let (line, offset) = self
            .lines
            .get(self.idx.min(self.lines.len().saturating_sub(1)))
            .map(|(l, o, _)| (*l, *o))
            .unwrap_or((0, 0));
        KbError::Parse {
            line,
            offset,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.idx).map(|(_, _, t)| *t)
    }

    fn next_line(&mut self) -> Option<&'a str> {
        let l = self.peek()?;
        self.idx += 1;
        Some(l)
    }

    fn parse(mut self) -> Result<KbSnapshot, KbError> {
        let header = self.next_line().ok_or_else(|| self.err("empty file"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("checklang-kb") {
            return Err(self.err("missing `checklang-kb` header"));
        }
        let version = parts.next().unwrap_or("");
        if version != KB_FORMAT_VERSION.to_string() {
            return Err(KbError::Version {
                found: version.to_string(),
            });
        }
        let mut kind = None;
        let mut c_max = crate::geometry::COORD_MAX;
        let mut merges = 0u64;
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| self.err(format!("malformed header field `{kv}`")))?;
            match k {
                "kind" => {
                    kind = match v {
                        "union" => Some(RegionKind::Union),
                        "hull" => Some(RegionKind::Hull),
                        "none" => None,
                        other => return Err(self.err(format!("unknown kind `{other}`"))),
                    }
                }
                "c_max" => {
                    c_max = v
                        .parse()
                        .map_err(|_| self.err(format!("bad c_max `{v}`")))?
                }
                "merges" => {
                    merges = v
                        .parse()
                        .map_err(|_| self.err(format!("bad merges `{v}`")))?
                }
                other => return Err(self.err(format!("unknown header field `{other}`"))),
            }
        }

        let mut snapshot = KbSnapshot {
            kind,
            c_max,
            merges,
            entries: BTreeMap::new(),
        };
        while self.peek().is_some() {
            let entry = self.entry(c_max, kind)?;
            snapshot
                .entries
                .insert((entry.func.clone(), entry.scope), entry);
        }
        Ok(snapshot)
    }

    fn entry(&mut self, c_max: u64, kind: Option<RegionKind>) -> Result<KbEntry, KbError> {
        let line = self.next_line().ok_or_else(|| self.err("expected entry"))?;
        let rest = line
            .strip_prefix("entry ")
            .ok_or_else(|| self.err("expected `entry` record"))?;
        let mut func = None;
        let mut scope = None;
        let mut samples = 0u64;
        let mut created = 0u64;
        let mut updated = 0u64;
        for kv in rest.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| self.err(format!("malformed entry field `{kv}`")))?;
            match k {
                "func" => func = Some(v.to_string()),
                "scope" => {
                    scope =
                        Some(Scope::parse(v).ok_or_else(|| self.err(format!("bad scope `{v}`")))?)
                }
                "samples" => samples = v.parse().map_err(|_| self.err("bad samples"))?,
                "created" => created = v.parse().map_err(|_| self.err("bad created"))?,
                "updated" => updated = v.parse().map_err(|_| self.err("bad updated"))?,
                other => return Err(self.err(format!("unknown entry field `{other}`"))),
            }
        }
        let func = func.ok_or_else(|| self.err("entry is missing func"))?;
        let scope = scope.ok_or_else(|| self.err("entry is missing scope"))?;

        let vars_line = self.next_line().ok_or_else(|| self.err("expected vars"))?;
        let vars_rest = vars_line
            .strip_prefix("vars ")
            .ok_or_else(|| self.err("expected `vars` record"))?;
        let mut vars = Vec::new();
        for spec in vars_rest.split_whitespace() {
            let (name, sym) = spec
                .rsplit_once(':')
                .ok_or_else(|| self.err(format!("malformed variable `{spec}`")))?;
            let corr = sym
                .chars()
                .next()
                .and_then(Correlation::from_symbol)
                .ok_or_else(|| self.err(format!("bad correlation `{sym}`")))?;
            vars.push((name.to_string(), corr));
        }
        let signature = VariableSignature::new(vars, c_max)
            .map_err(|e| self.err(format!("bad signature: {e}")))?;
        let dim = signature.dim();

        let mut points = Vec::new();
        while let Some(l) = self.peek() {
            let Some(rest) = l.strip_prefix("point ") else {
                break;
            };
            self.idx += 1;
            points.push(self.point(rest, dim)?);
        }

        let region = match kind {
            Some(RegionKind::Union) | None => {
                let region = UnionRegion::from_points(signature, points)
                    .map_err(|e| self.err(format!("bad union region: {e}")))?;
                RegionData::Union(region)
            }
            Some(RegionKind::Hull) => {
                let hull = self.hull(dim)?;
                RegionData::Hull(HullRegion::from_parts(signature, points, hull))
            }
        };
        // Hull entries must still contain all their samples.
        if let RegionData::Hull(r) = &region {
            for p in r.samples() {
                if !r.hull().contains(p).map_err(|e| self.err(format!("{e}")))? {
                    return Err(self.err("stored sample falls outside its hull"));
                }
            }
        }

        let end = self.next_line().ok_or_else(|| self.err("expected `end`"))?;
        if end != "end" {
            return Err(self.err(format!("expected `end`, found `{end}`")));
        }
        Ok(KbEntry {
            func,
            scope,
            region,
            sample_count: samples,
            created,
            updated,
        })
    }

    fn point(&self, rest: &str, dim: usize) -> Result<Point, KbError> {
        let coords: Result<Vec<u64>, _> = rest.split_whitespace().map(str::parse).collect();
        let coords = coords.map_err(|_| self.err("bad point coordinates"))?;
        if coords.len() != dim {
            return Err(self.err("point dimension mismatch"));
        }
        Point::new(coords).map_err(|e| self.err(format!("{e}")))
    }

    fn hull(&mut self, dim: usize) -> Result<Hull, KbError> {
        let line = self.next_line().ok_or_else(|| self.err("expected hull"))?;
        let rest = line
            .strip_prefix("hull ")
            .ok_or_else(|| self.err("expected `hull` record"))?;
        let mut hdim = 0usize;
        let mut rank = 0usize;
        for kv in rest.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| self.err(format!("malformed hull field `{kv}`")))?;
            match k {
                "dim" => hdim = v.parse().map_err(|_| self.err("bad dim"))?,
                "rank" => rank = v.parse().map_err(|_| self.err("bad rank"))?,
                other => return Err(self.err(format!("unknown hull field `{other}`"))),
            }
        }
        if hdim != dim {
            return Err(self.err("hull dimension does not match the signature"));
        }

        let anchor_line = self
            .next_line()
            .and_then(|l| l.strip_prefix("anchor "))
            .ok_or_else(|| self.err("expected `anchor`"))?;
        let anchor: Result<Vec<i64>, _> = anchor_line.split_whitespace().map(str::parse).collect();
        let anchor = anchor.map_err(|_| self.err("bad anchor"))?;

        let pivot_line = self
            .next_line()
            .and_then(|l| l.strip_prefix("pivot"))
            .ok_or_else(|| self.err("expected `pivot`"))?;
        let pivots: Result<Vec<usize>, _> = pivot_line.split_whitespace().map(str::parse).collect();
        let pivots = pivots.map_err(|_| self.err("bad pivots"))?;
        if pivots.len() != rank {
            return Err(self.err("pivot count does not match rank"));
        }

        let mut basis_rows = Vec::with_capacity(rank);
        for _ in 0..rank {
            let row_line = self
                .next_line()
                .and_then(|l| l.strip_prefix("basis "))
                .ok_or_else(|| self.err("expected `basis` row"))?;
            let mut row = Vec::new();
            for cell in row_line.split_whitespace() {
                row.push(self.rational(cell)?);
            }
            if row.len() != dim {
                return Err(self.err("basis row has the wrong width"));
            }
            basis_rows.push(row);
        }

        let mut vertices = BTreeMap::new();
        let mut next_id = 0usize;
        while let Some(l) = self.peek() {
            let Some(rest) = l.strip_prefix("vertex ") else {
                break;
            };
            self.idx += 1;
            vertices.insert(next_id, self.point(rest, dim)?);
            next_id += 1;
        }

        let mut facets = Vec::new();
        while let Some(l) = self.peek() {
            let Some(rest) = l.strip_prefix("facet ") else {
                break;
            };
            self.idx += 1;
            facets.push(self.facet(rest, rank)?);
        }

        Hull::from_parts(dim, anchor, basis_rows, pivots, vertices, facets)
            .map_err(|e| self.err(format!("{e}")))
    }

    fn facet(&self, rest: &str, rank: usize) -> Result<Facet, KbError> {
        let mut vertex_ids = None;
        let mut normal = None;
        let mut offset = None;
        for kv in rest.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| self.err(format!("malformed facet field `{kv}`")))?;
            match k {
                "v" => {
                    let ids: Result<Vec<usize>, _> = v.split(',').map(str::parse).collect();
                    vertex_ids = Some(ids.map_err(|_| self.err("bad facet vertex ids"))?);
                }
                "n" => {
                    let ns: Result<Vec<BigInt>, _> = v.split(',').map(BigInt::from_str).collect();
                    normal = Some(ns.map_err(|_| self.err("bad facet normal"))?);
                }
                "off" => {
                    offset = Some(BigInt::from_str(v).map_err(|_| self.err("bad facet offset"))?)
                }
                other => return Err(self.err(format!("unknown facet field `{other}`"))),
            }
        }
        let facet = Facet {
            vertex_ids: vertex_ids.ok_or_else(|| self.err("facet is missing vertex ids"))?,
            normal: normal.ok_or_else(|| self.err("facet is missing its normal"))?,
            offset: offset.ok_or_else(|| self.err("facet is missing its offset"))?,
        };
        if facet.normal.len() != rank {
            return Err(self.err("facet normal has the wrong dimension"));
        }
        Ok(facet)
    }

    fn rational(&self, s: &str) -> Result<BigRational, KbError> {
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n = BigInt::from_str(num).map_err(|_| self.err(format!("bad rational `{s}`")))?;
        let d = BigInt::from_str(den).map_err(|_| self.err(format!("bad rational `{s}`")))?;
        if d == BigInt::from(0) {
            return Err(self.err("rational with zero denominator"));
        }
        Ok(BigRational::new(n, d))
    }
}

/// Named halfspace of one facet: coefficients per signature variable and
/// the bound, in `Σ aᵢ·varᵢ <= c` form (the inward normal negated).
pub fn facet_inequality(
    sig: &VariableSignature,
    hull: &Hull,
    facet: &Facet,
) -> (BTreeMap<String, BigInt>, BigInt) {
    let (normal, offset) = hull.facet_in_ambient(facet);
    let coeffs = sig
        .names()
        .iter()
        .zip(&normal)
        .map(|(name, n)| (name.clone(), -n))
        .collect();
    (coeffs, offset)
}

/// Human-readable form of a facet inequality, e.g. `53*s + n <= 908`.
/// Terms are ordered by descending coefficient magnitude, then name.
pub fn render_inequality(coeffs: &BTreeMap<String, BigInt>, bound: &BigInt) -> String {
    use num_traits::{Signed, Zero};
    let mut ordered: Vec<(&String, &BigInt)> =
        coeffs.iter().filter(|(_, c)| !c.is_zero()).collect();
    ordered.sort_by(|(an, ac), (bn, bc)| bc.abs().cmp(&ac.abs()).then_with(|| an.cmp(bn)));
    let mut terms: Vec<String> = Vec::new();
    for (name, c) in ordered {
        if c.is_one() {
            terms.push(name.clone());
        } else if *c == BigInt::from(-1) {
            terms.push(format!("-{name}"));
        } else {
            terms.push(format!("{c}*{name}"));
        }
    }
    if terms.is_empty() {
        terms.push("0".to_string());
    }
    format!("{} <= {bound}", terms.join(" + "))
}

impl RegionQuerier for KbSnapshot {
    fn query(&self, func: &str, scope: Scope, raw: &BTreeMap<String, i64>) -> Option<bool> {
        let entry = self.entry(func, scope)?;
        let point = entry.region.signature().transform(raw).ok()?;
        Some(entry.region.query_point(&point))
    }

    fn region_kind(&self) -> Option<RegionKind> {
        self.kind
    }
}
