//! Simple iterated graph systems: a generator graph, the gluing injections
//! φ₊/φ₋ and an orientation of every generator edge.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::graph::{MultiGraph, DEFAULT_AUTOMORPHISM_BOUND};

#[derive(Debug, Clone, PartialEq)]
pub struct GluingRules {
    pub phi_plus: Vec<usize>,
    pub phi_minus: Vec<usize>,
    /// (e⁺, e⁻) for every generator edge.
    pub orientation: Vec<(usize, usize)>,
}

impl GluingRules {
    pub fn gluing_size(&self) -> usize {
        self.phi_plus.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Igs {
    pub name: String,
    generator: MultiGraph,
    gluing: GluingRules,
    /// Optional drawing coordinates, normalised so that I₊ sits near (0,0)
    /// and I₋ near (1,0).
    layout: Option<Vec<(f64, f64)>>,
}

impl Igs {
    /// `plus_endpoints[e]` names which end of edge `e` plays e⁺.
    pub fn new(
        name: impl Into<String>,
        generator: MultiGraph,
        phi_plus: Vec<usize>,
        phi_minus: Vec<usize>,
        plus_endpoints: Vec<usize>,
    ) -> Result<Self> {
        if phi_plus.is_empty() || phi_plus.len() != phi_minus.len() {
            return Err(Error::InvalidIgs(format!(
                "phi_plus and phi_minus must have the same positive length (got {} and {})",
                phi_plus.len(),
                phi_minus.len()
            )));
        }
        for &v in phi_plus.iter().chain(&phi_minus) {
            if v >= generator.vertex_count() {
                return Err(Error::UnknownVertex(v.to_string()));
            }
        }
        if plus_endpoints.len() != generator.edge_count() {
            return Err(Error::InvalidIgs(format!(
                "{} orientation entries for {} edges",
                plus_endpoints.len(),
                generator.edge_count()
            )));
        }
        let mut orientation = Vec::with_capacity(plus_endpoints.len());
        for (e, &p) in plus_endpoints.iter().enumerate() {
            let (a, b) = generator.endpoints(e);
            let pair = if p == a {
                (a, b)
            } else if p == b {
                (b, a)
            } else {
                return Err(Error::InvalidIgs(format!(
                    "plus endpoint of edge {e} is not one of its endpoints"
                )));
            };
            orientation.push(pair);
        }
        Ok(Igs {
            name: name.into(),
            generator,
            gluing: GluingRules {
                phi_plus,
                phi_minus,
                orientation,
            },
            layout: None,
        })
    }

    pub fn with_layout(mut self, layout: Vec<(f64, f64)>) -> Result<Self> {
        if layout.len() != self.generator.vertex_count() {
            return Err(Error::InvalidIgs("layout must cover every vertex".into()));
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn generator(&self) -> &MultiGraph {
        &self.generator
    }

    pub fn gluing(&self) -> &GluingRules {
        &self.gluing
    }

    pub fn layout(&self) -> Option<&[(f64, f64)]> {
        self.layout.as_deref()
    }

    pub fn gluing_size(&self) -> usize {
        self.gluing.gluing_size()
    }

    pub fn edge_count(&self) -> usize {
        self.generator.edge_count()
    }

    pub fn vertex_count(&self) -> usize {
        self.generator.vertex_count()
    }

    pub fn i_plus(&self) -> &[usize] {
        &self.gluing.phi_plus
    }

    pub fn i_minus(&self) -> &[usize] {
        &self.gluing.phi_minus
    }

    pub fn plus(&self, e: usize) -> usize {
        self.gluing.orientation[e].0
    }

    pub fn minus(&self, e: usize) -> usize {
        self.gluing.orientation[e].1
    }

    /// L_* = dist(I₊, I₋) in G₁.
    pub fn l_star(&self) -> Result<usize> {
        self.generator.graph_distance(self.i_plus(), self.i_minus())
    }

    pub fn q(&self) -> Result<f64> {
        let l = self.l_star()?;
        Ok((self.edge_count() as f64).ln() / (l as f64).ln())
    }

    pub fn validate(&self) -> ValidationReport {
        let g = &self.generator;
        let mut checks = CheckReport::new();

        let connected = g.is_connected();
        checks.push(
            "connectivity",
            connected,
            if connected { "generator is connected" } else { "generator is disconnected" },
        );
        // Loops cannot be constructed; the entry documents that they were checked.
        let loops = g.edges().iter().filter(|(a, b)| a == b).count();
        checks.push("no-loops", loops == 0, format!("{loops} loop edges"));

        for (name, phi) in [("phi_plus", self.i_plus()), ("phi_minus", self.i_minus())] {
            let dup = first_duplicate(phi);
            checks.push(
                format!("injective-{name}"),
                dup.is_none(),
                match dup {
                    None => format!("{name} is injective"),
                    Some(v) => format!("{name} hits vertex {} twice", g.label(v)),
                },
            );
        }
        for (name, set) in [("I_plus", self.i_plus()), ("I_minus", self.i_minus())] {
            let ok = g.is_independent(set);
            checks.push(
                format!("independent-{name}"),
                ok,
                if ok { "no edge inside the set" } else { "an edge joins two members" },
            );
        }
        let shared: Vec<&str> = self
            .i_plus()
            .iter()
            .filter(|v| self.i_minus().contains(v))
            .map(|&v| g.label(v))
            .collect();
        checks.push(
            "disjoint-images",
            shared.is_empty(),
            if shared.is_empty() {
                "I_plus and I_minus are disjoint".to_string()
            } else {
                format!("shared vertices {shared:?}")
            },
        );

        let dist = g.graph_distance(self.i_plus(), self.i_minus()).ok();
        checks.push(
            "non-degeneracy",
            dist.is_some_and(|d| d >= 2),
            match dist {
                Some(d) => format!("dist(I_plus, I_minus) = {d}"),
                None => "I_plus and I_minus are not connected".to_string(),
            },
        );
        let bad: Vec<&str> = self
            .i_plus()
            .iter()
            .chain(self.i_minus())
            .filter(|&&v| g.incident(v).len() != 1)
            .map(|&v| g.label(v))
            .collect();
        checks.push(
            "doubling",
            bad.is_empty(),
            if bad.is_empty() {
                "every gluing vertex has degree 1".to_string()
            } else {
                format!("gluing vertices of degree != 1: {bad:?}")
            },
        );

        let constants_preview = dist.filter(|&d| d >= 1).map(|l| ConstantsPreview {
            l_star: l,
            edge_count: self.edge_count(),
            q: if l >= 2 {
                Some((self.edge_count() as f64).ln() / (l as f64).ln())
            } else {
                None
            },
        });

        ValidationReport {
            passed: checks.passed(),
            checks,
            constants_preview,
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.passed {
            Ok(())
        } else {
            let failed: Vec<String> = report
                .checks
                .failures()
                .map(|c| format!("{} ({})", c.name, c.detail))
                .collect();
            Err(Error::InvalidIgs(failed.join("; ")))
        }
    }

    pub fn check_cup1(&self) -> bool {
        self.gluing_size() == 1
    }

    /// An automorphism exchanging φ₊(a) and φ₋(a) for every a.
    pub fn check_cup2(&self) -> Result<Option<Vec<usize>>> {
        let mut pinned = Vec::new();
        for (&p, &m) in self.i_plus().iter().zip(self.i_minus()) {
            pinned.push((p, m));
            pinned.push((m, p));
        }
        let found =
            self.generator
                .automorphisms_with(DEFAULT_AUTOMORPHISM_BOUND, &pinned, Some(1))?;
        Ok(found.into_iter().next())
    }

    /// Edge-disjoint family of geodesic I₊→I₋ paths covering every edge once.
    pub fn check_cup3(&self) -> Option<PathFamily> {
        let g = &self.generator;
        let l = self.l_star().ok()?;
        let k = self.gluing_size();
        // Every gluing vertex has degree one, so each I₊ vertex starts at most
        // one path and covering forces exactly |I| paths of length L_*.
        if g.edge_count() != k * l {
            return None;
        }
        let to_sink: Vec<Option<usize>> = g.bfs_distances(self.i_minus());
        let mut used = vec![false; g.edge_count()];
        let mut paths = Vec::new();
        if cup3_search(g, self.i_plus(), &to_sink, l, 0, &mut used, &mut paths) {
            Some(PathFamily { paths })
        } else {
            None
        }
    }
}

fn first_duplicate(xs: &[usize]) -> Option<usize> {
    for (i, x) in xs.iter().enumerate() {
        if xs[..i].contains(x) {
            return Some(*x);
        }
    }
    None
}

fn cup3_search(
    g: &MultiGraph,
    starts: &[usize],
    to_sink: &[Option<usize>],
    l: usize,
    idx: usize,
    used: &mut Vec<bool>,
    paths: &mut Vec<Vec<usize>>,
) -> bool {
    if idx == starts.len() {
        return used.iter().all(|&u| u);
    }
    let mut vertices = vec![starts[idx]];
    let mut edges = Vec::new();
    extend_geodesic(g, starts, to_sink, l, idx, used, paths, &mut vertices, &mut edges)
}

#[allow(clippy::too_many_arguments)]
fn extend_geodesic(
    g: &MultiGraph,
    starts: &[usize],
    to_sink: &[Option<usize>],
    l: usize,
    idx: usize,
    used: &mut Vec<bool>,
    paths: &mut Vec<Vec<usize>>,
    vertices: &mut Vec<usize>,
    edges: &mut Vec<usize>,
) -> bool {
    let here = *vertices.last().unwrap();
    if edges.len() == l {
        if to_sink[here] != Some(0) {
            return false;
        }
        paths.push(vertices.clone());
        if cup3_search(g, starts, to_sink, l, idx + 1, used, paths) {
            return true;
        }
        paths.pop();
        return false;
    }
    let remaining = l - edges.len();
    for &e in g.incident(here) {
        let next = g.other_end(e, here);
        if used[e] || to_sink[next] != Some(remaining - 1) {
            continue;
        }
        used[e] = true;
        vertices.push(next);
        edges.push(e);
        if extend_geodesic(g, starts, to_sink, l, idx, used, paths, vertices, edges) {
            return true;
        }
        edges.pop();
        vertices.pop();
        used[e] = false;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathFamily {
    /// Vertex sequences, one per gluing symbol, in the order of φ₊.
    pub paths: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsPreview {
    pub l_star: usize,
    pub edge_count: usize,
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: CheckReport,
    pub constants_preview: Option<ConstantsPreview>,
}

// ---------------------------------------------------------------------------
// presets

pub const PRESET_NAMES: &[&str] = &["path2", "diamond", "theta22", "theta(k,L)", "pendant", "lopsided"];

/// Fixed presets, plus one member of the theta family.
pub const CONCRETE_PRESETS: &[&str] = &["path2", "diamond", "theta22", "theta(3,2)", "pendant", "lopsided"];

pub fn preset(name: &str) -> Result<Igs> {
    let lower = name.trim().to_ascii_lowercase();
    match lower.as_str() {
        "path2" => Ok(path2()),
        "diamond" => Ok(diamond()),
        "theta22" => Ok(theta(2, 2)?.renamed("theta22")),
        "pendant" => Ok(pendant()),
        "lopsided" => Ok(lopsided()),
        _ => {
            if let Some(args) = lower.strip_prefix("theta(").and_then(|s| s.strip_suffix(')')) {
                let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                if let [k, l] = parts.as_slice() {
                    let k = k.parse().map_err(|_| Error::InvalidArgument(format!("bad k in {name}")))?;
                    let l = l.parse().map_err(|_| Error::InvalidArgument(format!("bad L in {name}")))?;
                    return theta(k, l);
                }
            }
            Err(Error::InvalidArgument(format!(
                "unknown preset {name:?} (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    }
}

impl Igs {
    fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

fn build(
    name: &str,
    labels: &[&str],
    edges: &[(&str, &str)],
    plus: &[&str],
    minus: &[&str],
    layout: &[(f64, f64)],
) -> Igs {
    let g = MultiGraph::from_labeled(labels, edges).expect("preset graph");
    let idx = |l: &str| g.index_of(l).expect("preset vertex");
    // every preset orients its edges as listed: first entry is e⁺
    let plus_end: Vec<usize> = edges.iter().map(|(a, _)| idx(a)).collect();
    let pp = plus.iter().map(|l| idx(l)).collect();
    let mm = minus.iter().map(|l| idx(l)).collect();
    Igs::new(name, g, pp, mm, plus_end)
        .and_then(|s| s.with_layout(layout.to_vec()))
        .expect("preset IGS")
}

/// The interval 0–1–2 glued at its two ends.
pub fn path2() -> Igs {
    build(
        "path2",
        &["0", "1", "2"],
        &[("0", "1"), ("1", "2")],
        &["0"],
        &["2"],
        &[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)],
    )
}

/// Laakso-type diamond: bridge, two parallel branches, bridge.
pub fn diamond() -> Igs {
    build(
        "diamond",
        &["1", "2", "3", "4", "5", "6"],
        &[("1", "2"), ("2", "3"), ("2", "4"), ("3", "5"), ("4", "5"), ("5", "6")],
        &["1"],
        &["6"],
        &[(0.0, 0.0), (0.25, 0.0), (0.5, 0.25), (0.5, -0.25), (0.75, 0.0), (1.0, 0.0)],
    )
}

/// `k` paths of length `l` from u_i to w_i whose interior vertices are
/// identified level by level. theta(2,2) is the two-cross THETA22.
pub fn theta(k: usize, l: usize) -> Result<Igs> {
    if k == 0 || l < 2 {
        return Err(Error::InvalidArgument(format!(
            "theta(k,L) needs k >= 1 and L >= 2 (got {k},{l})"
        )));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut layout = Vec::new();
    let spread = |i: usize| if k == 1 { 0.0 } else { 0.5 * (i as f64 / (k - 1) as f64 - 0.5) };
    for i in 0..k {
        labels.push(format!("u{}", i + 1));
        layout.push((0.0, spread(i)));
    }
    let interior: Vec<String> = if l == 2 {
        vec!["c".to_string()]
    } else {
        (1..l).map(|j| format!("c{j}")).collect()
    };
    for (j, c) in interior.iter().enumerate() {
        labels.push(c.clone());
        layout.push(((j + 1) as f64 / l as f64, 0.0));
    }
    for i in 0..k {
        labels.push(format!("w{}", i + 1));
        layout.push((1.0, spread(i)));
    }
    let idx = |s: &str| labels.iter().position(|x| x == s).unwrap();
    let mut edges = Vec::new();
    for i in 0..k {
        let mut chain = vec![format!("u{}", i + 1)];
        chain.extend(interior.iter().cloned());
        chain.push(format!("w{}", i + 1));
        for w in chain.windows(2) {
            edges.push((idx(&w[0]), idx(&w[1])));
        }
    }
    let plus_end = edges.iter().map(|e| e.0).collect();
    let g = MultiGraph::new(labels.clone(), edges)?;
    let pp = (0..k).map(|i| idx(&format!("u{}", i + 1))).collect();
    let mm = (0..k).map(|i| idx(&format!("w{}", i + 1))).collect();
    Igs::new(format!("theta({k},{l})"), g, pp, mm, plus_end)?.with_layout(layout)
}

/// Path of length three with a pendant edge hanging off vertex 1. Valid, but
/// it has no φ-reversing automorphism and the pendant edge carries zero
/// gradient for every p.
pub fn pendant() -> Igs {
    build(
        "pendant",
        &["0", "1", "2", "3", "4"],
        &[("0", "1"), ("1", "2"), ("2", "3"), ("1", "4")],
        &["0"],
        &["3"],
        &[(0.0, 0.0), (1.0 / 3.0, 0.0), (2.0 / 3.0, 0.0), (1.0, 0.0), (1.0 / 3.0, 0.3)],
    )
}

/// Two gluing symbols whose entry flows differ from their exit flows, so
/// conductive uniformity fails.
pub fn lopsided() -> Igs {
    build(
        "lopsided",
        &["u1", "u2", "d", "c", "w1", "w2"],
        &[("u1", "c"), ("u2", "d"), ("d", "c"), ("c", "w1"), ("c", "w2")],
        &["u1", "u2"],
        &["w1", "w2"],
        &[(0.0, 0.1), (0.0, -0.1), (0.25, -0.1), (0.5, 0.0), (1.0, 0.1), (1.0, -0.1)],
    )
}

// ---------------------------------------------------------------------------
// spec files

#[derive(Debug, Clone, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(untagged)]
enum VertexId {
    Int(i64),
    Str(String),
}

impl VertexId {
    fn text(&self) -> String {
        match self {
            VertexId::Int(i) => i.to_string(),
            VertexId::Str(s) => s.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: Option<String>,
    vertices: Spanned<Vec<VertexId>>,
    edges: Spanned<Vec<Spanned<Vec<VertexId>>>>,
    gluing_size: Spanned<i64>,
    phi_plus: Spanned<Vec<VertexId>>,
    phi_minus: Spanned<Vec<VertexId>>,
    layout: Option<BTreeMap<String, [f64; 2]>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn field_error(text: &str, span: std::ops::Range<usize>, field: &str, message: String) -> Error {
    Error::Parse {
        line: Some(line_of(text, span.start)),
        field: Some(field.to_string()),
        message,
    }
}

/// Parses the TOML spec format documented in the README.
pub fn parse_spec(text: &str) -> Result<Igs> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        field: None,
        message: e.message().to_string(),
    })?;

    let labels: Vec<String> = raw.vertices.get_ref().iter().map(VertexId::text).collect();
    let lookup = |id: &VertexId, span: std::ops::Range<usize>, field: &str| -> Result<usize> {
        let t = id.text();
        labels
            .iter()
            .position(|l| *l == t)
            .ok_or_else(|| field_error(text, span, field, format!("unknown vertex {t}")))
    };

    let mut edges = Vec::new();
    let mut plus_end = Vec::new();
    for entry in raw.edges.get_ref() {
        let span = entry.span();
        let items = entry.get_ref();
        if items.len() != 3 {
            return Err(field_error(
                text,
                span,
                "edges",
                "each edge must be [u, v, plus_endpoint]".into(),
            ));
        }
        let u = lookup(&items[0], span.clone(), "edges")?;
        let v = lookup(&items[1], span.clone(), "edges")?;
        let p = lookup(&items[2], span.clone(), "edges")?;
        if u == v {
            return Err(field_error(text, span, "edges", format!("loop edge at {}", labels[u])));
        }
        if p != u && p != v {
            return Err(field_error(
                text,
                span,
                "edges",
                "plus_endpoint must be one of the edge's endpoints".into(),
            ));
        }
        edges.push((u, v));
        plus_end.push(p);
    }

    let size = *raw.gluing_size.get_ref();
    if size < 1 {
        return Err(field_error(
            text,
            raw.gluing_size.span(),
            "gluing_size",
            "gluing_size must be positive".into(),
        ));
    }
    let mut phis = Vec::new();
    for (field, phi) in [("phi_plus", &raw.phi_plus), ("phi_minus", &raw.phi_minus)] {
        if phi.get_ref().len() as i64 != size {
            return Err(field_error(
                text,
                phi.span(),
                field,
                format!("expected {size} entries, found {}", phi.get_ref().len()),
            ));
        }
        let mut out = Vec::new();
        for id in phi.get_ref() {
            out.push(lookup(id, phi.span(), field)?);
        }
        phis.push(out);
    }
    let phi_minus = phis.pop().unwrap();
    let phi_plus = phis.pop().unwrap();

    let graph = MultiGraph::new(labels.clone(), edges).map_err(|e| {
        field_error(text, raw.vertices.span(), "vertices", e.to_string())
    })?;
    let mut igs = Igs::new(raw.name.unwrap_or_else(|| "spec".into()), graph, phi_plus, phi_minus, plus_end)?;
    if let Some(layout) = raw.layout {
        let mut coords = Vec::with_capacity(labels.len());
        for l in &labels {
            let xy = layout.get(l).ok_or_else(|| Error::Parse {
                line: None,
                field: Some("layout".into()),
                message: format!("layout is missing vertex {l}"),
            })?;
            coords.push((xy[0], xy[1]));
        }
        igs = igs.with_layout(coords)?;
    }
    Ok(igs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(igs: &Igs, l: &str) -> usize {
        igs.generator().index_of(l).unwrap()
    }

    #[test]
    fn diamond_adjacency() {
        let d = diamond();
        let g = d.generator();
        assert_eq!(g.degree(idx(&d, "2")).unwrap(), 3);
        assert_eq!(g.graph_distance(&[idx(&d, "1")], &[idx(&d, "6")]).unwrap(), 4);
        assert!(g.is_independent(&[idx(&d, "3"), idx(&d, "4")]));
    }

    #[test]
    fn validation_of_presets() {
        let r = path2().validate();
        assert!(r.passed);
        let c = r.constants_preview.unwrap();
        assert_eq!((c.l_star, c.edge_count), (2, 2));
        assert!((c.q.unwrap() - 1.0).abs() < 1e-15);

        let r = diamond().validate();
        assert!(r.passed);
        let c = r.constants_preview.unwrap();
        assert_eq!((c.l_star, c.edge_count), (4, 6));
        assert!((c.q.unwrap() - 6f64.ln() / 4f64.ln()).abs() < 1e-15);

        for igs in [theta(2, 2).unwrap(), pendant(), lopsided(), theta(3, 4).unwrap()] {
            assert!(igs.validate().passed, "{}", igs.name);
        }
    }

    #[test]
    fn adjacent_gluing_vertices_fail_non_degeneracy() {
        let g = MultiGraph::unlabeled(3, vec![(0, 1), (1, 2)]).unwrap();
        let bad = Igs::new("bad", g, vec![0], vec![1], vec![0, 1]).unwrap();
        let r = bad.validate();
        assert!(!r.passed);
        assert!(!r.checks.get("non-degeneracy").unwrap().passed);
        assert!(r.checks.get("connectivity").unwrap().passed);
    }

    #[test]
    fn cup_conditions_on_presets() {
        assert!(path2().check_cup1());
        assert!(diamond().check_cup1());
        assert!(!theta(2, 2).unwrap().check_cup1());

        assert_eq!(path2().check_cup2().unwrap(), Some(vec![2, 1, 0]));
        let eta = diamond().check_cup2().unwrap().unwrap();
        assert_eq!((eta[0], eta[1], eta[4], eta[5]), (5, 4, 1, 0));
        assert_eq!(pendant().check_cup2().unwrap(), None);

        let t = theta(2, 2).unwrap();
        let fam = t.check_cup3().unwrap();
        let names: Vec<Vec<&str>> = fam
            .paths
            .iter()
            .map(|p| p.iter().map(|&v| t.generator().label(v)).collect())
            .collect();
        assert_eq!(names, vec![vec!["u1", "c", "w1"], vec!["u2", "c", "w2"]]);
        assert!(diamond().check_cup3().is_none());
        assert_eq!(path2().check_cup3().unwrap().paths, vec![vec![0, 1, 2]]);
        assert!(lopsided().check_cup3().is_none());
    }

    #[test]
    fn presets_by_name() {
        assert_eq!(preset("theta(3,2)").unwrap().edge_count(), 6);
        assert_eq!(preset("THETA22").unwrap().name, "theta22");
        assert!(preset("nope").is_err());
        assert!(preset("theta(0,2)").is_err());
    }

    #[test]
    fn spec_roundtrip_and_errors() {
        let text = r#"
name = "diamond"
vertices = [1, 2, 3, 4, 5, 6]
edges = [[1, 2, 1], [2, 3, 2], [2, 4, 2], [3, 5, 3], [4, 5, 4], [5, 6, 5]]
gluing_size = 1
phi_plus = [1]
phi_minus = [6]
"#;
        let igs = parse_spec(text).unwrap();
        assert_eq!(igs.generator(), diamond().generator());
        assert_eq!(igs.gluing(), diamond().gluing());

        let looped = text.replace("[5, 6, 5]]", "[5, 6, 5], [3, 3, 3]]");
        match parse_spec(&looped) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, Some(4));
                assert_eq!(field.as_deref(), Some("edges"));
            }
            other => panic!("{other:?}"),
        }
        let short = text.replace("phi_minus = [6]", "phi_minus = []");
        assert!(matches!(parse_spec(&short), Err(Error::Parse { field: Some(f), .. }) if f == "phi_minus"));
        assert!(matches!(parse_spec("vertices = ["), Err(Error::Parse { line: Some(1), .. })));
    }
}
