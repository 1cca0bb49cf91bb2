//! CSV and JSON export.
//!
//! CSV numbers carry 17 significant digits. JSON uses the shortest
//! representation that round-trips exactly.

use std::io::{self, Write};

use serde::Serialize;

use crate::diagnostics::SectionPlot;
use crate::flow::Point3;
use crate::integrator::Trajectory;
use crate::shooting::SweepRow;

/// Formats with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Which trajectory points to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// The integrator's accepted step end points.
    Steps,
    /// `n` equally spaced times over the covered interval.
    Uniform(usize),
}

pub fn trajectory_rows(traj: &Trajectory<f64>, sampling: Sampling) -> Vec<(f64, Point3<f64>)> {
    match sampling {
        Sampling::Steps => traj.samples().to_vec(),
        Sampling::Uniform(n) => traj.resample(n),
    }
}

/// Writes `t,x,y,z` rows.
pub fn write_trajectory_csv<W: Write>(mut w: W, rows: &[(f64, Point3<f64>)]) -> io::Result<()> {
    writeln!(w, "t,x,y,z")?;
    for (t, p) in rows {
        writeln!(w, "{},{},{},{}", fmt17(*t), fmt17(p.x), fmt17(p.y), fmt17(p.z))?;
    }
    Ok(())
}

/// Writes `seed_index,t,u,v` rows.
pub fn write_section_csv<W: Write>(mut w: W, plot: &SectionPlot) -> io::Result<()> {
    writeln!(w, "seed_index,t,u,v")?;
    for p in &plot.points {
        writeln!(w, "{},{},{},{}", p.seed_index, fmt17(p.t), fmt17(p.u), fmt17(p.v))?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "A,B,C,ok,a_star,t_star,corner_residual,error")?;
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt17(r.params.a),
            fmt17(r.params.b),
            fmt17(r.params.c),
            r.ok,
            opt(r.a_star),
            opt(r.t_star),
            opt(r.corner_residual),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        )?;
    }
    Ok(())
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowParams;
    use crate::integrator::{integrate, IntegratorConfig};

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(-2.0), "-2.0000000000000000e0");
        let v = 1.0 / 3.0;
        assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn trajectory_csv_layout() {
        let traj = integrate(&FlowParams::default(), Point3::zero(), (0.0, 1.0), &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &trajectory_rows(&traj, Sampling::Uniform(11))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,x,y,z");
        assert_eq!(lines.len(), 12);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
        assert!(lines[11].starts_with("1.0000000000000000e0,"));
    }
}
