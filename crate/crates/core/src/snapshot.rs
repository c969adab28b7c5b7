//! Plain-text field snapshots.
//!
//! ```text
//! dim 2
//! extents 64 32
//! spacing 0.1 0.2
//! origin 0 0
//! periodic true false
//! components 2
//! complex false
//! time 0.5
//! <one line per grid point, row-major, `components` numbers each>
//! ```
//!
//! `complex` and `time` are optional on input. Complex fields store
//! `components 1`, `complex true` and two columns (real, imaginary). A
//! one-component file reads back as a scalar field; [`FieldData::into_vector`]
//! accepts it on one-dimensional grids.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField, VectorField};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Scalar(ScalarField),
    Vector(VectorField),
    Complex(ComplexField),
}

impl FieldData {
    pub fn grid(&self) -> &Grid {
        match self {
            FieldData::Scalar(f) => f.grid(),
            FieldData::Vector(f) => f.grid(),
            FieldData::Complex(f) => f.grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: Option<f64>,
    pub field: FieldData,
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(" ")
}

impl Snapshot {
    pub fn scalar(field: ScalarField) -> Self {
        Self { time: None, field: FieldData::Scalar(field) }
    }

    pub fn vector(field: VectorField) -> Self {
        Self { time: None, field: FieldData::Vector(field) }
    }

    pub fn complex(field: ComplexField) -> Self {
        Self { time: None, field: FieldData::Complex(field) }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    pub fn to_text(&self) -> String {
        let grid = self.field.grid();
        let (components, complex) = match &self.field {
            FieldData::Scalar(_) => (1, false),
            FieldData::Vector(v) => (v.components().len(), false),
            FieldData::Complex(_) => (1, true),
        };
        let mut out = String::new();
        let _ = writeln!(out, "dim {}", grid.dim());
        let _ = writeln!(out, "extents {}", join(grid.extents(), |n| n.to_string()));
        let _ = writeln!(out, "spacing {}", join(grid.spacing(), |&h| fmt_num(h)));
        let _ = writeln!(out, "origin {}", join(grid.origin(), |&o| fmt_num(o)));
        let _ = writeln!(out, "periodic {}", join(grid.periodic(), |p| p.to_string()));
        let _ = writeln!(out, "components {components}");
        let _ = writeln!(out, "complex {complex}");
        if let Some(t) = self.time {
            let _ = writeln!(out, "time {}", fmt_num(t));
        }
        match &self.field {
            FieldData::Scalar(f) => {
                for v in f.values() {
                    let _ = writeln!(out, "{}", fmt_num(*v));
                }
            }
            FieldData::Vector(f) => {
                for p in 0..grid.len() {
                    let row: Vec<f64> = f.components().iter().map(|c| c.values()[p]).collect();
                    let _ = writeln!(out, "{}", join(&row, |&v| fmt_num(v)));
                }
            }
            FieldData::Complex(f) => {
                for z in f.values() {
                    let _ = writeln!(out, "{} {}", fmt_num(z.re), fmt_num(z.im));
                }
            }
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut extents = None;
        let mut spacing = None;
        let mut origin = None;
        let mut periodic = None;
        let mut components = None;
        let mut complex = false;
        let mut time = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Snapshot(format!("line {}: {msg}", lineno + 1));
            let mut tokens = line.split_whitespace();
            let key = tokens.next().unwrap_or_default();
            let rest: Vec<&str> = tokens.collect();
            let floats = |rest: &[&str]| -> Result<Vec<f64>> {
                rest.iter()
                    .map(|t| t.parse::<f64>().map_err(|e| err(format!("bad number {t:?}: {e}"))))
                    .collect()
            };
            match key {
                "dim" | "extents" | "components" => {
                    let ints = rest
                        .iter()
                        .map(|t| t.parse::<usize>().map_err(|e| err(format!("bad integer {t:?}: {e}"))))
                        .collect::<Result<Vec<_>>>()?;
                    match key {
                        "dim" => dim = ints.first().copied(),
                        "extents" => extents = Some(ints),
                        _ => components = ints.first().copied(),
                    }
                }
                "spacing" => spacing = Some(floats(&rest)?),
                "origin" => origin = Some(floats(&rest)?),
                "time" => time = floats(&rest)?.first().copied(),
                "periodic" | "complex" => {
                    let flags = rest
                        .iter()
                        .map(|t| t.parse::<bool>().map_err(|e| err(format!("bad flag {t:?}: {e}"))))
                        .collect::<Result<Vec<_>>>()?;
                    if key == "periodic" {
                        periodic = Some(flags);
                    } else {
                        complex = flags.first().copied().unwrap_or(false);
                    }
                }
                _ => {
                    let mut row = floats(&[key])?;
                    row.extend(floats(&rest)?);
                    rows.push(row);
                }
            }
        }

        let missing = |what: &str| Error::Snapshot(format!("missing `{what}` header"));
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let grid = Grid::new(
            extents.ok_or_else(|| missing("extents"))?,
            spacing.ok_or_else(|| missing("spacing"))?,
            origin.ok_or_else(|| missing("origin"))?,
            periodic.ok_or_else(|| missing("periodic"))?,
        )?;
        if grid.dim() != dim {
            return Err(Error::Snapshot(format!("dim {dim} disagrees with {} extents", grid.dim())));
        }
        let components = components.unwrap_or(1);
        if rows.len() != grid.len() {
            return Err(Error::Snapshot(format!(
                "expected {} data rows, found {}",
                grid.len(),
                rows.len()
            )));
        }
        let width = if complex { 2 } else { components };
        if let Some(i) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Snapshot(format!("data row {} has {} columns, expected {width}", i + 1, rows[i].len())));
        }

        let field = if complex {
            let values = rows.iter().map(|r| Complex64::new(r[0], r[1])).collect();
            FieldData::Complex(ComplexField::new(grid, values)?)
        } else if components == 1 {
            FieldData::Scalar(ScalarField::new(grid, rows.into_iter().map(|r| r[0]).collect())?)
        } else {
            let comps = (0..components)
                .map(|k| ScalarField::new(grid.clone(), rows.iter().map(|r| r[k]).collect()))
                .collect::<Result<Vec<_>>>()?;
            FieldData::Vector(VectorField::new(comps)?)
        };
        Ok(Self { time, field })
    }
}

impl FieldData {
    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            FieldData::Scalar(f) => Ok(f),
            FieldData::Vector(v) if v.components().len() == 1 => Ok(v.into_components().remove(0)),
            _ => Err(Error::Snapshot("expected a scalar field".into())),
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            FieldData::Vector(v) => Ok(v),
            FieldData::Scalar(f) if f.grid().dim() == 1 => VectorField::new(vec![f]),
            _ => Err(Error::Snapshot("expected a vector field".into())),
        }
    }

    pub fn into_complex(self) -> Result<ComplexField> {
        match self {
            FieldData::Complex(f) => Ok(f),
            _ => Err(Error::Snapshot("expected a complex field (`complex true`)".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complex_snapshot_has_two_columns() {
        let g = Grid::periodic_1d(4, 0.0, 1.0).unwrap();
        let f = ComplexField::from_fn(&g, |x| Complex64::new(x[0], -x[0]));
        let text = Snapshot::complex(f.clone()).at_time(0.25).to_text();
        assert!(text.contains("complex true"));
        assert!(text.lines().last().unwrap().split_whitespace().count() == 2);
        let back = Snapshot::parse(&text).unwrap();
        assert_eq!(back.time, Some(0.25));
        assert_eq!(back.field.into_complex().unwrap(), f);
    }

    #[test]
    fn rejects_short_data() {
        let text = "dim 1\nextents 4\nspacing 0.1\norigin 0\nperiodic true\ncomponents 1\n1\n2\n3\n";
        assert!(matches!(Snapshot::parse(text), Err(Error::Snapshot(_))));
    }

    #[test]
    fn one_dimensional_vector_reads_back_through_into_vector() {
        let g = Grid::open_1d(5, 0.0, 1.0).unwrap();
        let v = VectorField::from_fn(&g, |x, o| o[0] = x[0] * 2.0);
        let back = Snapshot::parse(&Snapshot::vector(v.clone()).to_text()).unwrap();
        assert_eq!(back.field.into_vector().unwrap(), v);
    }

    proptest! {
        #[test]
        fn scalar_and_vector_round_trip_bit_exact(
            values in prop::collection::vec(-1e6f64..1e6, 24),
            h in 1e-3f64..10.0,
            periodic in any::<bool>(),
        ) {
            let g = Grid::new(vec![4, 6], vec![h, 2.0 * h], vec![-1.0, 0.5], vec![periodic, !periodic]).unwrap();
            let s = ScalarField::new(g.clone(), values.clone()).unwrap();
            let back = Snapshot::parse(&Snapshot::scalar(s.clone()).to_text()).unwrap();
            prop_assert_eq!(back.field, FieldData::Scalar(s.clone()));
            let v = VectorField::new(vec![s.clone(), s.scale(-0.5)]).unwrap();
            let back = Snapshot::parse(&Snapshot::vector(v.clone()).to_text()).unwrap();
            prop_assert_eq!(back.field, FieldData::Vector(v));
        }
    }
}
