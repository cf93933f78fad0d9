//! Scene files: grid, zones, cables and solver parameter blocks in JSON.
//!
//! All coordinates and lengths are in meters.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use harness_core::asphrh::AsphrhParams;
use harness_core::exact::ExactLimits;
use harness_core::grid::{
    apply_terminal_direction_penalty, build_graph, make_terminal, GridSpec, Point3, Zone,
};
use harness_core::lagrangian::ShrhParams;
use harness_core::model::{Cable, Instance, Weights};
use harness_core::postprocess::LengthRules;
use harness_core::pso::{PsoParams, PsoProfile};
use serde::{Deserialize, Deserializer, Serialize};

use crate::SCHEMA_VERSION;

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(field: impl fmt::Display, message: impl fmt::Display) -> SceneError {
    SceneError::Schema {
        path: field.to_string(),
        message: message.to_string(),
    }
}

/// A bundle weight `w_B` in `[0, 1]`, checked while parsing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct BundleWeight(pub f64);

impl<'de> Deserialize<'de> for BundleWeight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = f64::deserialize(d)?;
        if !(0.0..=1.0).contains(&w) {
            return Err(serde::de::Error::custom(format!(
                "bundle weight must lie in [0, 1], got {w}"
            )));
        }
        Ok(BundleWeight(w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellSize {
    Uniform(f64),
    PerAxis(Point3),
}

impl CellSize {
    pub fn per_axis(self) -> Point3 {
        match self {
            CellSize::Uniform(c) => [c; 3],
            CellSize::PerAxis(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default)]
    pub origin: Point3,
    pub cell_size: CellSize,
    pub dims: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZoneSpec {
    Obstacle { min: Point3, max: Point3 },
    CostMultiplier { min: Point3, max: Point3, multiplier: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub start: Point3,
    pub end: Point3,
    /// Outward connector direction at the start terminal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_direction: Option<Point3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_direction: Option<Point3>,
}

/// Cost penalty behind directed terminals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectionPenalty {
    pub cone_half_angle_deg: f64,
    pub penalty: f64,
}

impl Default for DirectionPenalty {
    fn default() -> Self {
        DirectionPenalty {
            cone_half_angle_deg: 90.0,
            penalty: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoBlock {
    pub profile: PsoProfile,
    pub swarm_size: usize,
    pub iterations: usize,
}

impl Default for PsoBlock {
    fn default() -> Self {
        let p = PsoParams::default();
        PsoBlock {
            profile: PsoProfile::Constriction,
            swarm_size: p.swarm_size,
            iterations: p.iterations,
        }
    }
}

impl PsoBlock {
    pub fn params(&self, seed: u64) -> PsoParams {
        PsoParams {
            swarm_size: self.swarm_size,
            iterations: self.iterations,
            ..PsoParams::profile(self.profile, seed)
        }
    }
}

fn default_weights() -> Vec<BundleWeight> {
    vec![BundleWeight(0.5)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema_version: u32,
    pub grid: GridBlock,
    #[serde(default)]
    pub zones: Vec<ZoneSpec>,
    pub cables: Vec<CableSpec>,
    #[serde(default = "default_weights")]
    pub weights: Vec<BundleWeight>,
    #[serde(default)]
    pub direction_penalty: DirectionPenalty,
    #[serde(default)]
    pub shrh: ShrhParams,
    #[serde(default)]
    pub asphrh: AsphrhParams,
    #[serde(default)]
    pub pso: PsoBlock,
    #[serde(default)]
    pub exact: ExactLimits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_lengths: Option<LengthRules>,
    #[serde(default)]
    pub seed: u64,
}

/// Parses scene JSON; errors carry the path of the offending field.
pub fn parse_scene(text: &str) -> Result<SceneFile, SceneError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scene: SceneFile = serde_path_to_error::deserialize(de).map_err(|e| SceneError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if scene.schema_version != SCHEMA_VERSION {
        return Err(invalid(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", scene.schema_version),
        ));
    }
    Ok(scene)
}

pub fn read_scene(path: &Path) -> Result<SceneFile, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scene(&text)
}

impl SceneFile {
    pub fn grid_spec(&self) -> Result<GridSpec, SceneError> {
        let cell = self.grid.cell_size.per_axis();
        if cell.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(invalid("grid.cell_size", "cell size must be positive"));
        }
        GridSpec::new(self.grid.origin, cell, self.grid.dims).map_err(|e| invalid("grid", e))
    }

    pub fn zones(&self) -> Result<Vec<Zone>, SceneError> {
        self.zones
            .iter()
            .enumerate()
            .map(|(i, z)| {
                match *z {
                    ZoneSpec::Obstacle { min, max } => Zone::obstacle(min, max),
                    ZoneSpec::CostMultiplier { min, max, multiplier } => {
                        Zone::cost_multiplier(min, max, multiplier)
                    }
                }
                .map_err(|e| invalid(format!("zones[{i}]"), e))
            })
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.0).collect()
    }

    /// Builds the routing graph and cables. The instance carries the first
    /// listed weight.
    pub fn instance(&self) -> Result<Instance, SceneError> {
        if self.cables.is_empty() {
            return Err(invalid("cables", "at least one cable is required"));
        }
        if self.weights.is_empty() {
            return Err(invalid("weights", "at least one weight is required"));
        }
        let spec = self.grid_spec()?;
        let bounds = spec.bounds();
        let mut graph = build_graph(&spec, &self.zones()?).map_err(|e| SceneError::Invalid(e.to_string()))?;
        let mut cables = Vec::with_capacity(self.cables.len());
        let mut directed = Vec::new();
        for (i, c) in self.cables.iter().enumerate() {
            let mut ends = Vec::with_capacity(2);
            for (label, point, dir) in [("start", c.start, c.start_direction), ("end", c.end, c.end_direction)] {
                let field = format!("cables[{i}].{label}");
                if point.iter().any(|v| !v.is_finite()) || !bounds.contains(point) {
                    return Err(invalid(&field, format!("terminal {point:?} lies outside the grid bounds")));
                }
                let t = make_terminal(&graph, point, dir).map_err(|e| invalid(format!("{field}_direction"), e))?;
                ends.push(t.node);
                if t.direction.is_some() {
                    directed.push(t);
                }
            }
            cables.push(Cable::new(ends[0], ends[1]));
        }
        let p = self.direction_penalty;
        for t in &directed {
            graph = apply_terminal_direction_penalty(&graph, t, p.cone_half_angle_deg, p.penalty)
                .map_err(|e| invalid("direction_penalty", e))?;
        }
        let weights = Weights::from_bundle(self.weights[0].0).map_err(|e| invalid("weights[0]", e))?;
        Instance::new(Arc::new(graph), cables, weights).map_err(|e| SceneError::Invalid(e.to_string()))
    }
}

pub fn load_scene(path: &Path) -> Result<(SceneFile, Instance), SceneError> {
    let scene = read_scene(path)?;
    let instance = scene.instance()?;
    Ok((scene, instance))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "grid": { "cell_size": 0.1, "dims": [5, 4, 3] },
        "cables": [ { "start": [0.0, 0.0, 0.0], "end": [0.4, 0.3, 0.2] } ]
    }"#;

    #[test]
    fn minimal_scene_loads() {
        let scene = parse_scene(MINIMAL).unwrap();
        let inst = scene.instance().unwrap();
        assert_eq!(inst.cable_count(), 1);
        assert_eq!(inst.graph().node_count(), 60);
        assert_eq!(scene.weights(), vec![0.5]);
        assert_eq!(scene.shrh, ShrhParams::default());
    }

    #[test]
    fn case_a_sized_grid_has_11016_nodes() {
        let text = r#"{
            "schema_version": 1,
            "grid": { "cell_size": 0.05, "dims": [54, 17, 12] },
            "cables": [ { "start": [0.0, 0.0, 0.0], "end": [2.0, 0.5, 0.5] } ]
        }"#;
        let inst = parse_scene(text).unwrap().instance().unwrap();
        assert_eq!(inst.graph().node_count(), 11_016);
    }

    #[test]
    fn bad_weight_names_the_field() {
        let text = MINIMAL.replace("\"cables\"", "\"weights\": [0.2, 1.5],\n \"cables\"");
        match parse_scene(&text) {
            Err(SceneError::Schema { path, message }) => {
                assert_eq!(path, "weights[1]");
                assert!(message.contains("1.5"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_and_unknown_field_rejected() {
        let missing = r#"{ "schema_version": 1, "grid": { "cell_size": 0.1 }, "cables": [] }"#;
        let err = parse_scene(missing).unwrap_err().to_string();
        assert!(err.contains("grid") && err.contains("dims"), "{err}");
        let unknown = MINIMAL.replace("\"dims\"", "\"dimz\": 1, \"dims\"");
        assert!(parse_scene(&unknown).unwrap_err().to_string().contains("dimz"));
        let bad_block = MINIMAL.replace("\"cables\"", "\"shrh\": { \"i_hrh\": \"x\" },\n \"cables\"");
        assert!(parse_scene(&bad_block).unwrap_err().to_string().starts_with("shrh.i_hrh"));
    }

    #[test]
    fn nonpositive_cell_and_outside_terminal_rejected() {
        let zero = MINIMAL.replace("0.1", "0.0");
        let err = parse_scene(&zero).unwrap().instance().unwrap_err().to_string();
        assert!(err.starts_with("grid.cell_size"), "{err}");
        let outside = MINIMAL.replace("[0.4, 0.3, 0.2]", "[0.4, 0.3, 0.9]");
        let err = parse_scene(&outside).unwrap().instance().unwrap_err().to_string();
        assert!(err.starts_with("cables[0].end"), "{err}");
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let text = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(parse_scene(&text).unwrap_err().to_string().starts_with("schema_version"));
    }

    #[test]
    fn partial_parameter_blocks_fill_defaults() {
        let text = MINIMAL.replace(
            "\"cables\"",
            "\"shrh\": { \"i_hrh\": 5 }, \"pso\": { \"profile\": \"linear_decay\" },\n \"cables\"",
        );
        let scene = parse_scene(&text).unwrap();
        assert_eq!(scene.shrh.i_hrh, 5);
        assert_eq!(scene.shrh.i_stag, ShrhParams::default().i_stag);
        let p = scene.pso.params(4);
        assert_eq!(p, PsoParams::profile(PsoProfile::LinearDecay, 4));
    }

    #[test]
    fn zones_and_directions_shape_the_graph() {
        let text = r#"{
            "schema_version": 1,
            "grid": { "cell_size": 1.0, "dims": [5, 3, 1] },
            "zones": [
                { "kind": "obstacle", "min": [1.9, 0.9, -0.5], "max": [2.1, 1.1, 0.5] },
                { "kind": "cost_multiplier", "min": [0.0, 0.0, -0.5], "max": [0.5, 2.0, 0.5], "multiplier": 3.0 }
            ],
            "cables": [ { "start": [1.0, 1.0, 0.0], "end": [4.0, 1.0, 0.0], "start_direction": [1.0, 0.0, 0.0] } ]
        }"#;
        let inst = parse_scene(text).unwrap().instance().unwrap();
        let g = inst.graph();
        assert_eq!(g.node_count(), 14);
        let a = g.node_at([1, 1, 0]).unwrap();
        let behind = g.node_at([0, 1, 0]).unwrap();
        let ahead = g.node_at([2, 0, 0]).unwrap();
        // Behind the directed terminal: multiplier 3 on one end, times the penalty.
        let e = g.edge_between(a, behind).unwrap();
        assert!((g.edge_cost(e) - 10.0 * 2.0).abs() < 1e-12);
        let e = g.edge_between(a, ahead).unwrap();
        assert!((g.edge_cost(e) - 2f64.sqrt()).abs() < 1e-12);
    }
}
