//! Serializable body descriptions, as found in run configs.

use serde::{Deserialize, Serialize};

use super::{ConvexBody, Face, QuadraticLevelSet, Shape};
use crate::error::{Error, Result};
use crate::gaussian_space::{brownian_kl_eigenvalues, GaussianModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Ball {
        radius: f64,
    },
    Ellipsoid {
        semiaxes: Vec<f64>,
    },
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Polytope {
        faces: Vec<FaceSpec>,
    },
    /// `axis` must be a coordinate unit vector; `base` lives in the other coordinates.
    Cylinder {
        base: Box<BodySpec>,
        axis: Vec<f64>,
    },
    LevelSet {
        matrix: Vec<Vec<f64>>,
        linear: Vec<f64>,
        constant: f64,
    },
    /// Ellipsoid with semiaxes `radius * sqrt(lambda_k)` for the model's spectral profile
    /// (Brownian Karhunen-Loeve eigenvalues when the model has none).
    KlEllipsoid {
        radius: f64,
    },
}

/// A shape plus an optional dilation (applied first) and translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    #[serde(flatten)]
    pub shape: ShapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translate: Option<Vec<f64>>,
}

impl From<ShapeSpec> for BodySpec {
    fn from(shape: ShapeSpec) -> Self {
        Self { shape, scale: None, translate: None }
    }
}

fn spec_err(path: &str, message: impl Into<String>) -> Error {
    Error::Spec { path: path.to_string(), message: message.into() }
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

fn check_len(path: &str, v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(spec_err(path, format!("expected {dim} components, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(spec_err(path, "components must be finite"));
    }
    Ok(())
}

impl BodySpec {
    /// Builds the body in the model's dimension. Errors carry the offending field path
    /// relative to `prefix`.
    pub fn build(&self, model: &GaussianModel, prefix: &str) -> Result<ConvexBody> {
        let shape = self.shape_in(model.dim(), model.spectral_profile(), prefix)?;
        ConvexBody::new(shape).map_err(|e| match e {
            Error::Spec { path, message } => Error::Spec { path: join(prefix, &path), message },
            other => other,
        })
    }

    fn shape_in(&self, dim: usize, profile: Option<&[f64]>, prefix: &str) -> Result<Shape> {
        let mut shape = self.shape.shape_in(dim, profile, prefix)?;
        if let Some(s) = self.scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(spec_err(&join(prefix, "scale"), "scale must be positive"));
            }
            shape = Shape::Dilate { inner: Box::new(shape), factor: s };
        }
        if let Some(t) = &self.translate {
            check_len(&join(prefix, "translate"), t, dim)?;
            shape = Shape::Translate { inner: Box::new(shape), shift: t.clone() };
        }
        Ok(shape)
    }
}

impl ShapeSpec {
    fn shape_in(&self, dim: usize, profile: Option<&[f64]>, prefix: &str) -> Result<Shape> {
        Ok(match self {
            ShapeSpec::Ball { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(spec_err(&join(prefix, "radius"), "radius must be positive"));
                }
                Shape::Ball { dim, radius: *radius }
            }
            ShapeSpec::Ellipsoid { semiaxes } => {
                let path = join(prefix, "semiaxes");
                check_len(&path, semiaxes, dim)?;
                if semiaxes.iter().any(|a| *a <= 0.0) {
                    return Err(spec_err(&path, "semiaxes must be positive"));
                }
                Shape::Ellipsoid { semiaxes: semiaxes.clone() }
            }
            ShapeSpec::Halfspace { normal, offset } => Shape::Halfspace(face(
                &FaceSpec { normal: normal.clone(), offset: *offset },
                dim,
                &join(prefix, "normal"),
            )?),
            ShapeSpec::Polytope { faces } => {
                if faces.is_empty() {
                    return Err(spec_err(&join(prefix, "faces"), "polytope needs at least one face"));
                }
                let faces = faces
                    .iter()
                    .enumerate()
                    .map(|(i, f)| face(f, dim, &join(prefix, &format!("faces[{i}].normal"))))
                    .collect::<Result<Vec<_>>>()?;
                Shape::Polytope { faces }
            }
            ShapeSpec::Cylinder { base, axis } => {
                let path = join(prefix, "axis");
                check_len(&path, axis, dim)?;
                let nonzero: Vec<usize> = (0..dim).filter(|&i| axis[i] != 0.0).collect();
                if nonzero.len() != 1 || dim < 2 {
                    return Err(spec_err(&path, "axis must be a coordinate direction"));
                }
                let base_profile = profile.map(|p| {
                    p.iter().enumerate().filter(|(i, _)| *i != nonzero[0]).map(|(_, v)| *v).collect::<Vec<_>>()
                });
                let base = base.shape_in(dim - 1, base_profile.as_deref(), &join(prefix, "base"))?;
                Shape::Cylinder { base: Box::new(base), axis: nonzero[0] }
            }
            ShapeSpec::LevelSet { matrix, linear, constant } => {
                check_len(&join(prefix, "linear"), linear, dim)?;
                if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
                    return Err(spec_err(&join(prefix, "matrix"), format!("expected a {dim}x{dim} matrix")));
                }
                let q = QuadraticLevelSet::new(matrix.clone(), linear.clone(), *constant).map_err(|e| match e {
                    Error::Spec { path, message } => Error::Spec { path: join(prefix, &path), message },
                    other => spec_err(prefix, other.to_string()),
                })?;
                Shape::LevelSet(q)
            }
            ShapeSpec::KlEllipsoid { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(spec_err(&join(prefix, "radius"), "radius must be positive"));
                }
                let lambdas = match profile {
                    Some(p) => p.to_vec(),
                    None => brownian_kl_eigenvalues(dim),
                };
                Shape::Ellipsoid { semiaxes: lambdas.iter().map(|l| radius / l.sqrt()).collect() }
            }
        })
    }
}

fn face(f: &FaceSpec, dim: usize, path: &str) -> Result<Face> {
    check_len(path, &f.normal, dim)?;
    let l = crate::linalg::norm(&f.normal);
    if l == 0.0 || !f.offset.is_finite() {
        return Err(spec_err(path, "normal must be non-zero with a finite offset"));
    }
    Ok(Face { normal: f.normal.iter().map(|a| a / l).collect(), offset: f.offset / l })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> BodySpec {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn parses_documented_shapes() {
        let m = GaussianModel::new(2).unwrap();
        for s in [
            r#"{"shape":"ball","radius":1.0}"#,
            r#"{"shape":"halfspace","normal":[1,0],"offset":1}"#,
            r#"{"shape":"polytope","faces":[{"normal":[1,0],"offset":1},{"normal":[-1,0],"offset":1}]}"#,
            r#"{"shape":"ellipsoid","semiaxes":[1,2]}"#,
            r#"{"shape":"ellipsoid","semiaxes":[1,2],"translate":[0.5,0]}"#,
            r#"{"shape":"level_set","matrix":[[1,0],[0,0.25]],"linear":[0,0],"constant":-1}"#,
            r#"{"shape":"kl_ellipsoid","radius":0.5}"#,
        ] {
            parse(s).build(&m, "body").unwrap();
        }
        let m3 = GaussianModel::new(3).unwrap();
        let cyl = parse(r#"{"shape":"cylinder","base":{"shape":"ball","radius":1},"axis":[0,0,1]}"#)
            .build(&m3, "body")
            .unwrap();
        assert!(cyl.contains(&[0.5, 0.0, 30.0]));
    }

    #[test]
    fn empty_polytope_names_face_list() {
        let m = GaussianModel::new(2).unwrap();
        match parse(r#"{"shape":"polytope","faces":[]}"#).build(&m, "body") {
            Err(Error::Spec { path, .. }) => assert_eq!(path, "body.faces"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_lengths_report_paths() {
        let m = GaussianModel::new(3).unwrap();
        match parse(r#"{"shape":"polytope","faces":[{"normal":[1,0,0],"offset":1},{"normal":[1,0],"offset":1}]}"#)
            .build(&m, "body")
        {
            Err(Error::Spec { path, .. }) => assert_eq!(path, "body.faces[1].normal"),
            other => panic!("{other:?}"),
        }
        let bad_axis = parse(r#"{"shape":"cylinder","base":{"shape":"ball","radius":1},"axis":[1,1,0]}"#);
        assert!(matches!(bad_axis.build(&m, "body"), Err(Error::Spec { .. })));
    }

    #[test]
    fn infeasible_polytope_is_rejected() {
        let m = GaussianModel::new(1).unwrap();
        let s = parse(r#"{"shape":"polytope","faces":[{"normal":[1],"offset":-1},{"normal":[-1],"offset":-1}]}"#);
        assert!(matches!(s.build(&m, "body"), Err(Error::Spec { .. })));
    }
}
