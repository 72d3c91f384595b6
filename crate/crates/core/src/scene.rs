//! Scene JSON: a list of complementary components, each a circle or polygon,
//! optionally tagged with the level at which it was removed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, SceneComponent, Shape};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene {
    pub components: Vec<ComponentRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub index: usize,
    pub bounded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    pub shape: ShapeRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeRecord {
    Circle { cx: f64, cy: f64, r: f64 },
    Polygon(Vec<[f64; 2]>),
}

impl From<&Shape> for ShapeRecord {
    fn from(s: &Shape) -> Self {
        match s {
            Shape::Circle { center, radius } => ShapeRecord::Circle {
                cx: center.x,
                cy: center.y,
                r: *radius,
            },
            Shape::Polygon(v) => ShapeRecord::Polygon(v.iter().map(|p| [p.x, p.y]).collect()),
        }
    }
}

impl ShapeRecord {
    pub fn to_shape(&self) -> Result<Shape> {
        match self {
            ShapeRecord::Circle { cx, cy, r } => Shape::circle(Point::new(*cx, *cy), *r),
            ShapeRecord::Polygon(v) => {
                Shape::polygon(v.iter().map(|[x, y]| Point::new(*x, *y)).collect())
            }
        }
    }
}

impl Scene {
    pub fn from_components<'a>(
        items: impl IntoIterator<Item = (&'a SceneComponent, Option<u32>)>,
    ) -> Self {
        let components = items
            .into_iter()
            .map(|(c, level)| ComponentRecord {
                index: c.index,
                bounded: c.bounded,
                level,
                shape: (&c.shape).into(),
            })
            .collect();
        Scene { components }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validates every record and checks index uniqueness.
    pub fn components(&self) -> Result<Vec<SceneComponent>> {
        let mut seen = std::collections::BTreeSet::new();
        self.components
            .iter()
            .map(|r| {
                if !seen.insert(r.index) {
                    return Err(Error::InvalidInput(format!(
                        "duplicate component index {}",
                        r.index
                    )));
                }
                SceneComponent::new(r.index, r.shape.to_shape()?, r.bounded)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_layout() {
        let json = r#"{"components":[
            {"index":0,"bounded":false,"shape":{"circle":{"cx":0.0,"cy":0.0,"r":3.0}}},
            {"index":1,"bounded":true,"shape":{"polygon":[[0,0],[1,0],[0,1]]}}]}"#;
        let scene = Scene::from_json(json).unwrap();
        let comps = scene.components().unwrap();
        assert_eq!(comps.len(), 2);
        assert!(!comps[0].bounded);
        let back = Scene::from_json(&scene.to_json().unwrap()).unwrap();
        assert_eq!(back.components().unwrap(), comps);
    }

    #[test]
    fn rejects_duplicates_and_bad_flags() {
        let dup = r#"{"components":[
            {"index":1,"bounded":true,"shape":{"circle":{"cx":0,"cy":0,"r":1}}},
            {"index":1,"bounded":true,"shape":{"circle":{"cx":5,"cy":0,"r":1}}}]}"#;
        assert!(Scene::from_json(dup).unwrap().components().is_err());
        let flag = r#"{"components":[
            {"index":0,"bounded":true,"shape":{"circle":{"cx":0,"cy":0,"r":1}}}]}"#;
        assert!(Scene::from_json(flag).unwrap().components().is_err());
    }
}
