//! Minimum-length rules for bundle segments.
//!
//! A segment joining a terminal to a branch point must be at least `l_min_tb`
//! long; one joining two branch points at least `l_min_bb`. Lengths are
//! physical (sum of Euclidean edge lengths). Violations are repaired greedily
//! by relocating a branch point or merging it into an adjacent one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::NodeId;
use crate::hrh::{reoriented, shared_edges, spoke_fields, spokes_of};
use crate::model::{derive_topology, evaluate, Instance, Path, Routing, Topology};
use crate::search::DistanceField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthRules {
    pub l_min_tb: f64,
    pub l_min_bb: f64,
}

impl LengthRules {
    pub fn new(l_min_tb: f64, l_min_bb: f64) -> Result<Self> {
        let r = LengthRules { l_min_tb, l_min_bb };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_min_tb >= 0.0 && self.l_min_bb >= 0.0) {
            return Err(Error::InvalidParameter("minimum lengths must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    TerminalBranch,
    BranchBranch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub segment: usize,
    pub kind: RuleKind,
    pub length: f64,
    pub required: f64,
}

impl Violation {
    pub fn amount(&self) -> f64 {
        self.required - self.length
    }
}

fn is_movable(topo: &Topology, n: NodeId) -> bool {
    topo.is_branch_point(n) && !topo.is_terminal(n)
}

/// Rule governing a segment between `a` and `b`, if any.
fn rule_between(topo: &Topology, rules: &LengthRules, a: NodeId, b: NodeId) -> Option<(RuleKind, f64)> {
    let (ma, mb) = (is_movable(topo, a), is_movable(topo, b));
    if !ma && !mb {
        None
    } else if ma && mb {
        Some((RuleKind::BranchBranch, rules.l_min_bb))
    } else {
        Some((RuleKind::TerminalBranch, rules.l_min_tb))
    }
}

/// Rule violations sorted by amount (largest first), then by smallest endpoint id.
pub fn violations(instance: &Instance, topo: &Topology, rules: &LengthRules) -> Vec<Violation> {
    let graph = instance.graph();
    let mut out: Vec<(Violation, NodeId)> = topo
        .bundle_segments
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let (kind, required) = rule_between(topo, rules, s.first(), s.last())?;
            let length = s.length(graph);
            (length < required).then(|| {
                (
                    Violation {
                        segment: i,
                        kind,
                        length,
                        required,
                    },
                    s.first().min(s.last()),
                )
            })
        })
        .collect();
    out.sort_by(|a, b| b.0.amount().total_cmp(&a.0.amount()).then_with(|| a.1.cmp(&b.1)));
    out.into_iter().map(|(v, _)| v).collect()
}

/// Lexicographic badness: number of violations, then their total amount.
fn score(v: &[Violation]) -> (usize, f64) {
    (v.len(), v.iter().map(Violation::amount).sum())
}

fn better(a: (usize, f64), b: (usize, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1 - 1e-12)
}

#[derive(Debug, Clone)]
pub struct MinLengthResult {
    pub routing: Routing,
    pub satisfied: bool,
    pub moves: usize,
}

/// Relocation sites tried per branch point, in order of spoke-cost sum.
const RELOCATION_TRIES: usize = 256;
const MOVE_CAP: usize = 10_000;

struct Candidate {
    routing: Routing,
    violations: usize,
    f: f64,
}

impl Candidate {
    fn preferred_to(&self, other: &Candidate) -> bool {
        (self.violations, self.f) < (other.violations, other.f)
    }
}

fn assess(
    instance: &Instance,
    topo: &Topology,
    rules: &LengthRules,
    segments: Vec<Path>,
    current: (usize, f64),
) -> Option<Candidate> {
    let routing = topo.assemble(instance.cables(), &segments).ok()?;
    let new_topo = derive_topology(instance, &routing).ok()?;
    let s = score(&violations(instance, &new_topo, rules));
    if !better(s, current) {
        return None;
    }
    let f = evaluate(instance, &routing).ok()?.f;
    Some(Candidate {
        routing,
        violations: s.0,
        f,
    })
}

/// Moves of branch point `b`: relocation to rule-respecting sites and merges
/// into adjacent branch points.
fn candidates_for(
    instance: &Instance,
    topo: &Topology,
    rules: &LengthRules,
    b: NodeId,
    current: (usize, f64),
) -> Vec<Candidate> {
    let Some(spokes) = spokes_of(topo, b) else {
        return Vec::new();
    };
    // Spokes that follow kept segments can create new short segments, so
    // paths that ignore the sharing discount are tried as well.
    let shared = shared_edges(instance, topo, &spokes);
    let unshared = vec![false; shared.len()];
    let mut out = Vec::new();
    for s in [&shared, &unshared] {
        let fields = spoke_fields(instance, topo, b, &spokes, s, f64::INFINITY);
        out.extend(candidates_with(instance, topo, rules, b, &spokes, &fields, current));
    }
    out
}

fn candidates_with(
    instance: &Instance,
    topo: &Topology,
    rules: &LengthRules,
    b: NodeId,
    spokes: &[usize],
    fields: &[(usize, DistanceField)],
    current: (usize, f64),
) -> Vec<Candidate> {
    let graph = instance.graph();
    let base: Vec<Path> = topo.bundle_segments.iter().map(|s| s.nodes.clone()).collect();
    let mut out = Vec::new();

    // Relocation: every spoke must meet its rule at the new site.
    let requirements: Vec<f64> = spokes
        .iter()
        .map(|&s| {
            let far = topo.bundle_segments[s].other_end(b);
            if is_movable(topo, far) {
                rules.l_min_bb
            } else {
                rules.l_min_tb
            }
        })
        .collect();
    let lengths: Vec<Vec<f64>> = fields
        .iter()
        .map(|(_, f)| f.accumulate_along_tree(graph, |e| graph.edge_length(e)))
        .collect();
    let mut sites: Vec<(f64, NodeId)> = graph
        .nodes()
        .filter(|v| {
            lengths
                .iter()
                .zip(&requirements)
                .all(|(l, &req)| l[v.index()].is_finite() && l[v.index()] >= req)
        })
        .map(|v| (fields.iter().map(|(_, f)| f.dist[v.index()]).sum::<f64>(), v))
        .collect();
    sites.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    for &(_, v) in sites.iter().take(RELOCATION_TRIES) {
        let mut segments = base.clone();
        for (s, f) in fields {
            let far = topo.bundle_segments[*s].other_end(b);
            segments[*s] = reoriented(topo, *s, far, f.path_to(v).expect("reached"));
        }
        if let Some(c) = assess(instance, topo, rules, segments, current) {
            out.push(c);
        }
    }

    // Merge into a neighbouring branch point: its link collapses to one node.
    for (i, &link) in spokes.iter().enumerate() {
        let a = topo.bundle_segments[link].other_end(b);
        if !is_movable(topo, a) {
            continue;
        }
        let mut segments = base.clone();
        segments[link] = vec![a];
        let mut ok = true;
        for (j, (s, f)) in fields.iter().enumerate() {
            if j == i {
                continue;
            }
            let far = topo.bundle_segments[*s].other_end(b);
            match f.path_to(a) {
                Some(p) => segments[*s] = reoriented(topo, *s, far, p),
                None => ok = false,
            }
        }
        if ok {
            if let Some(c) = assess(instance, topo, rules, segments, current) {
                out.push(c);
            }
        }
    }
    out
}

/// Greedily repairs minimum-length violations, most severe first. Among moves
/// that reduce the violation count or total, the one leaving the fewest
/// violations wins, then the one with the lowest objective.
pub fn enforce_min_lengths(instance: &Instance, routing: &Routing, rules: &LengthRules) -> Result<MinLengthResult> {
    rules.validate()?;
    let mut routing = routing.clone();
    let mut moves = 0;
    loop {
        let topo = derive_topology(instance, &routing)?;
        let viols = violations(instance, &topo, rules);
        if viols.is_empty() {
            return Ok(MinLengthResult {
                routing,
                satisfied: true,
                moves,
            });
        }
        if moves >= MOVE_CAP {
            break;
        }
        let current = score(&viols);
        let mut chosen: Option<Candidate> = None;
        for v in &viols {
            let seg = &topo.bundle_segments[v.segment];
            let mut ends = vec![seg.first(), seg.last()];
            ends.dedup();
            for b in ends.into_iter().filter(|&n| is_movable(&topo, n)) {
                for c in candidates_for(instance, &topo, rules, b, current) {
                    if chosen.as_ref().map_or(true, |x| c.preferred_to(x)) {
                        chosen = Some(c);
                    }
                }
            }
            if chosen.is_some() {
                break;
            }
        }
        match chosen {
            Some(c) => {
                routing = c.routing;
                moves += 1;
            }
            None => break,
        }
    }
    Ok(MinLengthResult {
        routing,
        satisfied: false,
        moves,
    })
}
