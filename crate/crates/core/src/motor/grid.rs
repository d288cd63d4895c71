//! Rectilinear speed × torque grids with bilinear interpolation and long-format
//! CSV storage. Missing nodes are NaN and mark points outside the envelope.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    speeds: Vec<f64>,
    torques: Vec<f64>,
    /// Row-major by speed: `values[i * torques.len() + j]`.
    values: Vec<f64>,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "{name} axis needs at least two nodes"
        )));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) || axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} axis must be finite and strictly increasing"
        )));
    }
    Ok(())
}

/// Cell index and fractional position of `x` on `axis`; `None` outside the hull.
fn locate(axis: &[f64], x: f64) -> Option<(usize, f64)> {
    let last = axis.len() - 1;
    if !(x >= axis[0] && x <= axis[last]) {
        return None;
    }
    let i = match axis.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => return Some((i.min(last - 1), if i == last { 1.0 } else { 0.0 })),
        Err(i) => i - 1,
    };
    Some((i, (x - axis[i]) / (axis[i + 1] - axis[i])))
}

impl Grid {
    pub fn new(speeds: Vec<f64>, torques: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis("speed", &speeds)?;
        check_axis("torque", &torques)?;
        if values.len() != speeds.len() * torques.len() {
            return Err(Error::InvalidParameter(format!(
                "grid has {} values for {}×{} nodes",
                values.len(),
                speeds.len(),
                torques.len()
            )));
        }
        Ok(Grid {
            speeds,
            torques,
            values,
        })
    }

    /// Grid filled by evaluating `f(speed, torque)` at every node.
    pub fn tabulate(
        speeds: Vec<f64>,
        torques: Vec<f64>,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        let values = speeds
            .iter()
            .flat_map(|&s| torques.iter().map(move |&t| (s, t)))
            .map(|(s, t)| f(s, t))
            .collect();
        Grid::new(speeds, torques, values)
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn torques(&self) -> &[f64] {
        &self.torques
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.torques.len() + j]
    }

    /// True when every populated node is non-negative.
    pub fn is_non_negative(&self) -> bool {
        self.values.iter().all(|v| !(*v < 0.0))
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn same_axes(&self, other: &Grid) -> bool {
        self.speeds == other.speeds && self.torques == other.torques
    }

    /// Bilinear interpolation. Exact at nodes; queries outside the hull or
    /// touching a missing node with non-zero weight are rejected.
    pub fn interpolate(&self, speed: f64, torque: f64) -> Result<f64> {
        let outside = || Error::OutsideMap { speed, torque };
        let (i, u) = locate(&self.speeds, speed).ok_or_else(outside)?;
        let (j, v) = locate(&self.torques, torque).ok_or_else(outside)?;
        let corners = [
            ((1.0 - u) * (1.0 - v), i, j),
            ((1.0 - u) * v, i, j + 1),
            (u * (1.0 - v), i + 1, j),
            (u * v, i + 1, j + 1),
        ];
        let mut acc = 0.0;
        for (w, ci, cj) in corners {
            if w == 0.0 {
                continue;
            }
            let value = self.node(ci, cj);
            if !value.is_finite() {
                return Err(outside());
            }
            acc += w * value;
        }
        Ok(acc)
    }

    /// Largest torque at `speed` below which every enclosing cell is fully
    /// populated. Zero outside the speed range.
    pub fn feasible_torque(&self, speed: f64) -> f64 {
        let column_limit = |i: usize| -> f64 {
            let n = (0..self.torques.len())
                .take_while(|&j| self.node(i, j).is_finite())
                .count();
            if n == 0 {
                f64::NEG_INFINITY
            } else {
                self.torques[n - 1]
            }
        };
        match locate(&self.speeds, speed) {
            None => 0.0,
            Some((i, 0.0)) => column_limit(i),
            Some((i, 1.0)) => column_limit(i + 1),
            Some((i, _)) => column_limit(i).min(column_limit(i + 1)),
        }
        .max(0.0)
    }

    /// Writes populated nodes as `speed_radps,torque_Nm,<columns>` rows. All
    /// grids must share axes; a node is written when every grid has it.
    pub fn write_long_csv(grids: &[(&str, &Grid)], writer: impl Write) -> Result<()> {
        let (_, first) = grids
            .first()
            .ok_or_else(|| Error::InvalidParameter("no grids to write".into()))?;
        if grids.iter().any(|(_, g)| !g.same_axes(first)) {
            return Err(Error::InvalidParameter("grids have different axes".into()));
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["speed_radps".to_string(), "torque_Nm".to_string()];
        header.extend(grids.iter().map(|(name, _)| name.to_string()));
        w.write_record(&header).map_err(csv_err)?;
        for (i, &s) in first.speeds.iter().enumerate() {
            for (j, &t) in first.torques.iter().enumerate() {
                let vals: Vec<f64> = grids.iter().map(|(_, g)| g.node(i, j)).collect();
                if vals.iter().all(|v| v.is_finite()) {
                    let mut rec = vec![s.to_string(), t.to_string()];
                    rec.extend(vals.iter().map(f64::to_string));
                    w.write_record(&rec).map_err(csv_err)?;
                }
            }
        }
        w.flush().map_err(|e| Error::Parse {
            context: "grid csv".into(),
            row: 0,
            message: e.to_string(),
        })
    }

    /// Reads a long-format grid file with `columns` value columns after the
    /// speed and torque keys. Nodes absent from the file are NaN.
    pub fn read_long_csv(context: &str, reader: impl Read, columns: usize) -> Result<Vec<Grid>> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<(f64, f64, Vec<f64>)> = Vec::new();
        for (idx, rec) in r.records().enumerate() {
            let row = idx + 2;
            let rec = rec.map_err(|e| Error::Parse {
                context: context.into(),
                row,
                message: e.to_string(),
            })?;
            if rec.len() != columns + 2 {
                return Err(Error::Parse {
                    context: context.into(),
                    row,
                    message: format!("expected {} columns, found {}", columns + 2, rec.len()),
                });
            }
            let nums = rec
                .iter()
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse {
                    context: context.into(),
                    row,
                    message: e.to_string(),
                })?;
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    context: context.into(),
                    row,
                    message: "values must be finite".into(),
                });
            }
            rows.push((nums[0], nums[1], nums[2..].to_vec()));
        }
        let axis = |key: fn(&(f64, f64, Vec<f64>)) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(key).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let speeds = axis(|r| r.0);
        let torques = axis(|r| r.1);
        let nt = torques.len();
        let mut values = vec![vec![f64::NAN; speeds.len() * nt]; columns];
        for (s, t, vals) in &rows {
            let i = speeds.binary_search_by(|v| v.total_cmp(s)).unwrap_or(0);
            let j = torques.binary_search_by(|v| v.total_cmp(t)).unwrap_or(0);
            for (c, &v) in vals.iter().enumerate() {
                values[c][i * nt + j] = v;
            }
        }
        values
            .into_iter()
            .map(|v| Grid::new(speeds.clone(), torques.clone(), v))
            .collect()
    }

    pub fn load(path: impl AsRef<Path>, columns: usize) -> Result<Vec<Grid>> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Grid::read_long_csv(&path.display().to_string(), file, columns)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse {
        context: "grid csv".into(),
        row: 0,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cell() -> Grid {
        Grid::new(
            vec![0.0, 10.0],
            vec![0.0, 100.0],
            vec![100.0, 200.0, 300.0, 400.0],
        )
        .unwrap()
    }

    #[test]
    fn midpoint_of_cell() {
        assert_eq!(cell().interpolate(5.0, 50.0).unwrap(), 250.0);
    }

    #[test]
    fn nodes_are_exact() {
        let g = cell();
        assert_eq!(g.interpolate(0.0, 0.0).unwrap(), 100.0);
        assert_eq!(g.interpolate(10.0, 100.0).unwrap(), 400.0);
        assert_eq!(g.interpolate(0.0, 100.0).unwrap(), 200.0);
    }

    #[test]
    fn no_extrapolation() {
        let g = cell();
        assert!(matches!(
            g.interpolate(10.1, 0.0),
            Err(Error::OutsideMap { .. })
        ));
        assert!(g.interpolate(5.0, -1.0).is_err());
        assert!(g.interpolate(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn missing_node_blocks_only_its_cells() {
        let g = Grid::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, f64::NAN],
        )
        .unwrap();
        assert!(g.interpolate(0.5, 0.5).is_ok());
        assert!(g.interpolate(1.5, 0.5).is_err());
        assert_eq!(g.interpolate(1.0, 1.0).unwrap(), 4.0);
        assert_eq!(g.interpolate(2.0, 0.0).unwrap(), 5.0);
        assert_eq!(g.feasible_torque(0.5), 1.0);
        assert_eq!(g.feasible_torque(1.5), 0.0);
        assert_eq!(g.feasible_torque(1.0), 1.0);
    }

    #[test]
    fn csv_round_trip_keeps_missing_nodes() {
        let g = Grid::new(
            vec![0.0, 1.5],
            vec![0.0, 2.0],
            vec![1.0, 2.5, 3.0, f64::NAN],
        )
        .unwrap();
        let mut buf = Vec::new();
        Grid::write_long_csv(&[("value", &g)], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("speed_radps,torque_Nm,value\n"));
        let back = Grid::read_long_csv("t", buf.as_slice(), 1)
            .unwrap()
            .remove(0);
        assert_eq!(back.speeds(), g.speeds());
        assert_eq!(back.node(0, 1), 2.5);
        assert!(back.node(1, 1).is_nan());
    }

    #[test]
    fn malformed_cell_reports_row() {
        let text = "speed_radps,torque_Nm,value\n0,0,1\n0,1,x\n";
        let err = Grid::read_long_csv("t", text.as_bytes(), 1).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }));
    }

    proptest! {
        #[test]
        fn interpolant_bounded_by_corners(
            v in proptest::collection::vec(0.0f64..1000.0, 4),
            s in 0.0f64..=10.0, t in 0.0f64..=100.0,
        ) {
            let g = Grid::new(vec![0.0, 10.0], vec![0.0, 100.0], v.clone()).unwrap();
            let x = g.interpolate(s, t).unwrap();
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(x >= lo - 1e-9 && x <= hi + 1e-9);
        }
    }
}
