use serde::{Deserialize, Serialize};

use crate::math::{shape_inertia, Vec3};
use crate::shape::Shape;
use crate::Error;

use super::{ArticulatedBodySpec, LinkSpec, DEFAULT_DENSITY};

/// On-disk body description. The rest pose is implicit (all joints identity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpecFile {
    pub name: String,
    pub links: Vec<LinkSpecFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpecFile {
    pub name: String,
    /// Index of the parent link, `null` for the root.
    pub parent: Option<usize>,
    #[serde(default)]
    pub anchor_p: Vec3,
    #[serde(default)]
    pub anchor_c: Vec3,
    pub shape: Shape,
    /// kg; derived from [`DEFAULT_DENSITY`] when absent.
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default = "yes")]
    pub collision: bool,
}

fn yes() -> bool {
    true
}

impl BodySpecFile {
    pub fn build(&self) -> Result<ArticulatedBodySpec, Error> {
        let mut links = Vec::with_capacity(self.links.len());
        for (i, l) in self.links.iter().enumerate() {
            let path = |field: &str| format!("links[{i}].{field}");
            l.shape.validate().map_err(|e| Error::schema(path("shape"), e.to_string()))?;
            let mass = match l.mass {
                Some(m) if !(m > 0.0 && m.is_finite()) => {
                    return Err(Error::schema(path("mass"), format!("must be positive, got {m}")))
                }
                Some(m) => m,
                None => DEFAULT_DENSITY * l.shape.volume(),
            };
            let inertia = shape_inertia(&l.shape, mass).map_err(|e| Error::schema(path("shape"), e.to_string()))?;
            links.push(LinkSpec {
                name: l.name.clone(),
                parent: l.parent,
                anchor_parent: l.anchor_p,
                anchor_child: l.anchor_c,
                shape: l.shape.clone(),
                inertia,
                collision_enabled: l.collision,
            });
        }
        ArticulatedBodySpec::new(self.name.clone(), links)
    }

    /// File form of an existing spec (masses kept, inertias re-derived on load).
    pub fn from_spec(spec: &ArticulatedBodySpec) -> Self {
        Self {
            name: spec.name().to_string(),
            links: spec
                .links()
                .iter()
                .map(|l| LinkSpecFile {
                    name: l.name.clone(),
                    parent: l.parent,
                    anchor_p: l.anchor_parent,
                    anchor_c: l.anchor_child,
                    shape: l.shape.clone(),
                    mass: Some(l.inertia.mass),
                    collision: l.collision_enabled,
                })
                .collect(),
        }
    }
}

/// Parses and validates a body spec JSON document.
pub fn parse_body_spec(bytes: &[u8]) -> Result<ArticulatedBodySpec, Error> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let file: BodySpecFile = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::schema(e.path().to_string(), e.inner().to_string()))?;
    file.build()
}
