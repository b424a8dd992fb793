//! The simulated shared world and deixis resolution against its ground plane.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Plane-equation tolerance for deixis locations.
pub const PLANE_TOLERANCE: f64 = 1e-9;

/// A point or direction in world coordinates, meters. `y` is up.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }

    pub fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    /// Distance in the x/z plane, ignoring height.
    pub fn horizontal_distance(&self, o: &Vec3) -> f64 {
        (self.x - o.x).hypot(self.z - o.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldObject {
    pub id: String,
    pub kind: String,
    #[serde(default)]
    pub attributes: BTreeSet<String>,
    pub position: Vec3,
    #[serde(default = "default_graspable")]
    pub graspable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub held_by: Option<String>,
}

fn default_graspable() -> bool {
    true
}

/// Where a pointing gesture lands, plus the objects bound to that region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeixisTarget {
    pub location: Vec3,
    pub objects_in_region: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("scene schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scene: {0}")]
    Validation(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum DeixisError {
    #[error("pointing direction is zero or not finite")]
    DegenerateDirection,
    #[error("pointing ray is parallel to the ground")]
    Parallel,
    #[error("pointing ray does not reach the ground in front of the origin")]
    Backward,
}

pub const DEFAULT_REGION_RADIUS: f64 = 0.5;
pub const DEFAULT_FRONT_OFFSET: f64 = 0.5;
pub const DEFAULT_EXTENT: f64 = 10.0;

/// On-disk form of a scene. Unknown fields are rejected.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default)]
    ground_plane_height: f64,
    agent_origin: Vec3,
    #[serde(default)]
    human_viewpoint: Option<Vec3>,
    #[serde(default = "default_radius")]
    deixis_region_radius: f64,
    #[serde(default = "default_front_offset")]
    front_offset: f64,
    #[serde(default = "default_extent")]
    extent: f64,
    #[serde(default)]
    objects: Vec<ObjectFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectFile {
    id: String,
    kind: String,
    #[serde(default)]
    attributes: BTreeSet<String>,
    position: Vec3,
    #[serde(default = "default_graspable")]
    graspable: bool,
}

fn default_radius() -> f64 {
    DEFAULT_REGION_RADIUS
}
fn default_front_offset() -> f64 {
    DEFAULT_FRONT_OFFSET
}
fn default_extent() -> f64 {
    DEFAULT_EXTENT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub objects: Vec<WorldObject>,
    pub ground_plane_height: f64,
    pub agent_origin: Vec3,
    /// Eye point of the human; rays for clicked ground points start here.
    pub human_viewpoint: Vec3,
    pub deixis_region_radius: f64,
    /// Distance from the agent toward the human that "in front of you" denotes.
    pub front_offset: f64,
    /// Half-width of the square of ground, centered at the origin, that
    /// actions may place objects in.
    pub extent: f64,
}

impl Scene {
    /// Builds a scene with default parameters around the given agent origin.
    pub fn new(agent_origin: Vec3, objects: Vec<WorldObject>) -> Result<Scene, SceneError> {
        let scene = Scene {
            objects,
            ground_plane_height: 0.0,
            agent_origin,
            human_viewpoint: default_viewpoint(agent_origin),
            deixis_region_radius: DEFAULT_REGION_RADIUS,
            front_offset: DEFAULT_FRONT_OFFSET,
            extent: DEFAULT_EXTENT,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Validation(m));
        if !(self.deixis_region_radius > 0.0) || !self.deixis_region_radius.is_finite() {
            return bad(format!(
                "deixis_region_radius must be positive, got {}",
                self.deixis_region_radius
            ));
        }
        if !self.ground_plane_height.is_finite() {
            return bad("ground_plane_height must be finite".into());
        }
        if !self.agent_origin.is_finite() || self.agent_origin.y <= self.ground_plane_height {
            return bad("agent_origin must be finite and above the ground plane".into());
        }
        if !self.human_viewpoint.is_finite() || self.human_viewpoint.y <= self.ground_plane_height {
            return bad("human_viewpoint must be finite and above the ground plane".into());
        }
        if !(self.extent > 0.0) || !(self.front_offset >= 0.0) {
            return bad("extent must be positive and front_offset non-negative".into());
        }
        let mut seen = BTreeSet::new();
        for o in &self.objects {
            if !seen.insert(o.id.as_str()) {
                return bad(format!("duplicate object id {:?}", o.id));
            }
            if !o.position.is_finite() {
                return bad(format!("object {:?} has a non-finite position", o.id));
            }
            if o.held_by.is_some() && !o.graspable {
                return bad(format!("object {:?} is held but not graspable", o.id));
            }
        }
        Ok(())
    }

    pub fn object(&self, id: &str) -> Option<&WorldObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_mut(&mut self, id: &str) -> Option<&mut WorldObject> {
        self.objects.iter_mut().find(|o| o.id == id)
    }

    /// True when `p` lies within the horizontal bounds of the scene.
    pub fn in_bounds(&self, p: &Vec3) -> bool {
        p.is_finite() && p.x.abs() <= self.extent && p.z.abs() <= self.extent
    }

    /// The ground point "in front of" the agent: `front_offset` meters from
    /// the agent's foot point toward the human.
    pub fn front_of_agent(&self) -> Vec3 {
        let foot = Vec3::new(self.agent_origin.x, self.ground_plane_height, self.agent_origin.z);
        let dx = self.human_viewpoint.x - foot.x;
        let dz = self.human_viewpoint.z - foot.z;
        let len = dx.hypot(dz);
        let (ux, uz) = if len > 0.0 { (dx / len, dz / len) } else { (0.0, 1.0) };
        Vec3::new(
            foot.x + ux * self.front_offset,
            self.ground_plane_height,
            foot.z + uz * self.front_offset,
        )
    }

    /// Intersects a pointing ray with the ground plane and binds the objects
    /// within `deixis_region_radius` of the hit, nearest first.
    pub fn resolve_deixis(&self, origin: Vec3, direction: Vec3) -> Result<DeixisTarget, DeixisError> {
        if direction.is_zero() || !direction.is_finite() || !origin.is_finite() {
            return Err(DeixisError::DegenerateDirection);
        }
        if direction.y == 0.0 {
            return Err(DeixisError::Parallel);
        }
        let t = (self.ground_plane_height - origin.y) / direction.y;
        if !(t > 0.0) || !t.is_finite() {
            return Err(DeixisError::Backward);
        }
        let mut location = origin.add(direction.scale(t));
        location.y = self.ground_plane_height;
        Ok(DeixisTarget {
            objects_in_region: self.objects_near(&location),
            location,
        })
    }

    /// Deixis for a clicked ground coordinate: a ray from the human's
    /// viewpoint through `(x, ground, z)`.
    pub fn resolve_click(&self, x: f64, z: f64) -> Result<DeixisTarget, DeixisError> {
        let target = Vec3::new(x, self.ground_plane_height, z);
        self.resolve_deixis(self.human_viewpoint, target.sub(self.human_viewpoint))
    }

    fn objects_near(&self, location: &Vec3) -> Vec<String> {
        let mut near: Vec<(f64, &str)> = self
            .objects
            .iter()
            .map(|o| (o.position.horizontal_distance(location), o.id.as_str()))
            .filter(|(d, _)| *d <= self.deixis_region_radius)
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        near.into_iter().map(|(_, id)| id.to_string()).collect()
    }

    /// Keeps the candidates whose kind equals `noun` (when given) and which
    /// carry every attribute in `attributes`. Order is preserved; ids not in
    /// the scene are dropped.
    pub fn filter_by_description(
        &self,
        candidates: &[String],
        noun: Option<&str>,
        attributes: &BTreeSet<String>,
    ) -> Vec<String> {
        candidates
            .iter()
            .filter(|id| {
                self.object(id).is_some_and(|o| {
                    noun.is_none_or(|n| o.kind == n) && attributes.is_subset(&o.attributes)
                })
            })
            .cloned()
            .collect()
    }

    /// Ids of every object, in scene order.
    pub fn object_ids(&self) -> Vec<String> {
        self.objects.iter().map(|o| o.id.clone()).collect()
    }
}

fn default_viewpoint(agent_origin: Vec3) -> Vec3 {
    Vec3::new(agent_origin.x, agent_origin.y.max(0.0) + 0.2, agent_origin.z + 2.0)
}

/// Parses and validates a scene document.
pub fn load_scene(description: &str) -> Result<Scene, SceneError> {
    let file: SceneFile = serde_json::from_str(description).map_err(|e| SceneError::Schema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let objects = file
        .objects
        .into_iter()
        .map(|o| WorldObject {
            id: o.id,
            kind: o.kind,
            attributes: o.attributes,
            position: o.position,
            graspable: o.graspable,
            held_by: None,
        })
        .collect();
    let scene = Scene {
        objects,
        ground_plane_height: file.ground_plane_height,
        agent_origin: file.agent_origin,
        human_viewpoint: file
            .human_viewpoint
            .unwrap_or_else(|| default_viewpoint(file.agent_origin)),
        deixis_region_radius: file.deixis_region_radius,
        front_offset: file.front_offset,
        extent: file.extent,
    };
    scene.validate()?;
    Ok(scene)
}
