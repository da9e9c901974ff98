//! TOML documents for measures and BV functions.
//!
//! Every document carries a `kind` key (`measure1d`, `bv1d`, `mesh_field`,
//! `measure_nd`) and flat sections; see `docs/schema.md` in the repository.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::bv1d::{Jump, BV1D};
use crate::error::{RelaxError, Result};
use crate::measure1d::{Atom, Measure1D, SingularNode};
use crate::mesh::{FaceJump, Grid, MeasureND, MeshField, PointMass, PointNode};
use crate::step::StepFn;

/// Conversion between a value and its TOML document.
pub trait TomlDoc: Sized {
    const KIND: &'static str;
    type Doc: Serialize + DeserializeOwned;

    fn to_doc(&self) -> Self::Doc;
    fn from_doc(doc: Self::Doc) -> Result<Self>;

    fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&self.to_doc()).map_err(|e| RelaxError::Document(e.to_string()))
    }

    fn from_toml_str(text: &str) -> Result<Self> {
        let kind: KindOnly =
            toml::from_str(text).map_err(|e| RelaxError::Document(e.to_string()))?;
        if kind.kind != Self::KIND {
            return Err(RelaxError::Document(format!(
                "expected a document of kind {:?}, found {:?}",
                Self::KIND,
                kind.kind
            )));
        }
        let doc = toml::from_str(text).map_err(|e| RelaxError::Document(e.to_string()))?;
        Self::from_doc(doc)
    }

    fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RelaxError::Document(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
            .map_err(|e| RelaxError::Document(format!("{}: {e}", path.display())))
    }
}

#[derive(Deserialize)]
struct KindOnly {
    kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub breaks: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl StepDoc {
    fn of(s: &StepFn) -> Self {
        Self {
            breaks: s.breaks().to_vec(),
            values: s.values().to_vec(),
        }
    }

    fn build(self) -> Result<StepFn> {
        StepFn::new(self.breaks, self.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub x: f64,
    pub weight: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub x: f64,
    pub mass: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measure1DDoc {
    pub kind: String,
    pub lo: f64,
    pub hi: f64,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ac: Option<StepDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub singular: Vec<NodeDoc>,
}

fn node_doc(n: &SingularNode) -> NodeDoc {
    NodeDoc {
        x: n.x,
        mass: n.mass,
        direction: n.direction.clone(),
    }
}

fn node(n: NodeDoc) -> SingularNode {
    SingularNode {
        x: n.x,
        mass: n.mass,
        direction: n.direction,
    }
}

impl TomlDoc for Measure1D {
    const KIND: &'static str = "measure1d";
    type Doc = Measure1DDoc;

    fn to_doc(&self) -> Measure1DDoc {
        Measure1DDoc {
            kind: Self::KIND.into(),
            lo: self.lo,
            hi: self.hi,
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomDoc {
                    x: a.x,
                    weight: a.weight.clone(),
                })
                .collect(),
            ac: self.ac.as_ref().map(StepDoc::of),
            singular: self.singular.iter().map(node_doc).collect(),
        }
    }

    fn from_doc(d: Measure1DDoc) -> Result<Self> {
        Measure1D::new(
            d.lo,
            d.hi,
            d.dim,
            d.atoms
                .into_iter()
                .map(|a| Atom {
                    x: a.x,
                    weight: a.weight,
                })
                .collect(),
            d.ac.map(StepDoc::build).transpose()?,
            d.singular.into_iter().map(node).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorDoc {
    /// `u(lo+)`.
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpDoc {
    pub x: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BV1DDoc {
    pub kind: String,
    pub lo: f64,
    pub hi: f64,
    pub anchor: AnchorDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<StepDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<JumpDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cantor: Vec<NodeDoc>,
}

impl TomlDoc for BV1D {
    const KIND: &'static str = "bv1d";
    type Doc = BV1DDoc;

    fn to_doc(&self) -> BV1DDoc {
        BV1DDoc {
            kind: Self::KIND.into(),
            lo: self.lo,
            hi: self.hi,
            anchor: AnchorDoc {
                value: self.anchor.clone(),
            },
            slope: self.slope.as_ref().map(StepDoc::of),
            jumps: self
                .jumps
                .iter()
                .map(|j| JumpDoc {
                    x: j.x,
                    left: j.left.clone(),
                    right: j.right.clone(),
                })
                .collect(),
            cantor: self.cantor.iter().map(node_doc).collect(),
        }
    }

    fn from_doc(d: BV1DDoc) -> Result<Self> {
        BV1D::new(
            d.lo,
            d.hi,
            d.anchor.value,
            d.slope.map(StepDoc::build).transpose()?,
            d.jumps
                .into_iter()
                .map(|j| Jump {
                    x: j.x,
                    left: j.left,
                    right: j.right,
                })
                .collect(),
            d.cantor.into_iter().map(node).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl GridDoc {
    fn of(g: &Grid) -> Self {
        Self {
            lo: g.lo.clone(),
            hi: g.hi.clone(),
            cells: g.cells.clone(),
        }
    }

    fn build(self) -> Result<Grid> {
        Grid::new(self.lo, self.hi, self.cells)
    }
}

/// `u(x) = value + gradient (x - lo)`, gradient stored row-major (`m x n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineDoc {
    pub value: Vec<f64>,
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceJumpDoc {
    pub cell: Vec<usize>,
    pub axis: usize,
    pub jump: Vec<f64>,
}

/// Either `nodal` values (first axis fastest) or an `affine` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFieldDoc {
    pub kind: String,
    pub grid: GridDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodal: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<AffineDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub face_jumps: Vec<FaceJumpDoc>,
}

impl TomlDoc for MeshField {
    const KIND: &'static str = "mesh_field";
    type Doc = MeshFieldDoc;

    fn to_doc(&self) -> MeshFieldDoc {
        MeshFieldDoc {
            kind: Self::KIND.into(),
            grid: GridDoc::of(&self.grid),
            nodal: Some(self.nodal.clone()),
            affine: None,
            face_jumps: self
                .face_jumps
                .iter()
                .map(|f| FaceJumpDoc {
                    cell: f.cell.clone(),
                    axis: f.axis,
                    jump: f.jump.clone(),
                })
                .collect(),
        }
    }

    fn from_doc(d: MeshFieldDoc) -> Result<Self> {
        let grid = d.grid.build()?;
        let nodal = match (d.nodal, d.affine) {
            (Some(v), None) => v,
            (None, Some(a)) => {
                let n = grid.dim();
                let m = a.value.len();
                if a.gradient.len() != m * n {
                    return Err(RelaxError::Document(format!(
                        "affine gradient needs {} entries, found {}",
                        m * n,
                        a.gradient.len()
                    )));
                }
                (0..grid.num_nodes())
                    .map(|i| {
                        let x = grid.node_point(&grid.node_multi(i));
                        (0..m)
                            .map(|k| {
                                a.value[k]
                                    + (0..n)
                                        .map(|j| a.gradient[k * n + j] * (x[j] - grid.lo[j]))
                                        .sum::<f64>()
                            })
                            .collect()
                    })
                    .collect()
            }
            _ => {
                return Err(RelaxError::Document(
                    "give exactly one of `nodal` and `affine`".into(),
                ))
            }
        };
        let jumps = d
            .face_jumps
            .into_iter()
            .map(|f| FaceJump {
                cell: f.cell,
                axis: f.axis,
                jump: f.jump,
            })
            .collect();
        MeshField::new(grid, nodal, jumps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMassDoc {
    pub x: Vec<f64>,
    pub weight: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointNodeDoc {
    pub x: Vec<f64>,
    pub mass: f64,
    pub direction: Vec<f64>,
}

/// Cell densities: either per cell (first axis fastest) or one `constant`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDensityDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureNDDoc {
    pub kind: String,
    pub grid: GridDoc,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ac: Option<CellDensityDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<PointMassDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub singular: Vec<PointNodeDoc>,
}

impl TomlDoc for MeasureND {
    const KIND: &'static str = "measure_nd";
    type Doc = MeasureNDDoc;

    fn to_doc(&self) -> MeasureNDDoc {
        MeasureNDDoc {
            kind: Self::KIND.into(),
            grid: GridDoc::of(&self.grid),
            dim: self.dim,
            ac: self.ac.as_ref().map(|c| CellDensityDoc {
                cells: Some(c.clone()),
                constant: None,
            }),
            atoms: self
                .atoms
                .iter()
                .map(|a| PointMassDoc {
                    x: a.x.clone(),
                    weight: a.weight.clone(),
                })
                .collect(),
            singular: self
                .singular
                .iter()
                .map(|s| PointNodeDoc {
                    x: s.x.clone(),
                    mass: s.mass,
                    direction: s.direction.clone(),
                })
                .collect(),
        }
    }

    fn from_doc(d: MeasureNDDoc) -> Result<Self> {
        let grid = d.grid.build()?;
        let ac = match d.ac {
            None => None,
            Some(CellDensityDoc {
                cells: Some(c),
                constant: None,
            }) => Some(c),
            Some(CellDensityDoc {
                cells: None,
                constant: Some(c),
            }) => Some(vec![c; grid.num_cells()]),
            Some(_) => {
                return Err(RelaxError::Document(
                    "the [ac] section needs exactly one of `cells` and `constant`".into(),
                ))
            }
        };
        MeasureND::new(
            grid,
            d.dim,
            ac,
            d.atoms
                .into_iter()
                .map(|a| PointMass {
                    x: a.x,
                    weight: a.weight,
                })
                .collect(),
            d.singular
                .into_iter()
                .map(|s| PointNode {
                    x: s.x,
                    mass: s.mass,
                    direction: s.direction,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv1d::devils_staircase;
    use crate::measure1d::cantor_nodes;

    #[test]
    fn measure_round_trip() {
        let v = Measure1D::from_density(
            StepFn::new(
                vec![0.0, 0.1, 1.0],
                vec![vec![0.3, 1.0 / 3.0], vec![-2.5, 0.0]],
            )
            .unwrap(),
        )
        .unwrap()
        .with_atoms(vec![Atom {
            x: 1.0,
            weight: vec![0.1, 0.2],
        }])
        .unwrap()
        .with_singular(cantor_nodes(0.0, 1.0, 3, 0.7, vec![0.6, 0.8]))
        .unwrap();
        let text = v.to_toml_string().unwrap();
        assert_eq!(Measure1D::from_toml_str(&text).unwrap(), v);
    }

    #[test]
    fn bv_round_trip() {
        let c = devils_staircase(0.0, 2.0, 4, 1.5).unwrap();
        let slope = Some(StepFn::constant(0.0, 2.0, vec![0.1]).unwrap());
        let u = BV1D::from_increments(
            0.0,
            2.0,
            vec![0.25],
            slope,
            vec![(0.5, vec![7.0])],
            c.cantor,
        )
        .unwrap();
        let text = u.to_toml_string().unwrap();
        assert_eq!(BV1D::from_toml_str(&text).unwrap(), u);
    }

    #[test]
    fn mesh_documents() {
        let text = r#"
kind = "mesh_field"
[grid]
lo = [0.0, 0.0]
hi = [1.0, 2.0]
cells = [2, 4]
[affine]
value = [1.0]
gradient = [0.5, -1.0]
"#;
        let u = MeshField::from_toml_str(text).unwrap();
        let (val, grad) = u.value_and_gradient(&[0.25, 1.5]);
        assert!((val[0] - (1.0 + 0.125 - 1.5)).abs() < 1e-12);
        assert!((grad[0] - 0.5).abs() < 1e-12 && (grad[1] + 1.0).abs() < 1e-12);
        assert_eq!(
            MeshField::from_toml_str(&u.to_toml_string().unwrap()).unwrap(),
            u
        );

        let text = r#"
kind = "measure_nd"
dim = 1
[grid]
lo = [0.0, 0.0]
hi = [1.0, 1.0]
cells = [2, 2]
[ac]
constant = [0.5]
[[atoms]]
x = [0.5, 0.5]
weight = [1.0]
"#;
        let v = MeasureND::from_toml_str(text).unwrap();
        assert!((v.total()[0] - 1.5).abs() < 1e-12);
        assert_eq!(
            MeasureND::from_toml_str(&v.to_toml_string().unwrap()).unwrap(),
            v
        );
    }

    #[test]
    fn wrong_kind_and_unknown_keys_are_rejected() {
        let v = Measure1D::dirac(0.0, 1.0, 0.5, vec![1.0]).unwrap();
        let text = v.to_toml_string().unwrap();
        assert!(BV1D::from_toml_str(&text).is_err());
        assert!(Measure1D::from_toml_str(&format!("{text}\nextra = 1\n")).is_err());
    }
}
