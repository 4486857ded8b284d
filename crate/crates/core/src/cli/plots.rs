//! SVG line plots. Presentational only.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::solver::{RunRecord, Snapshot};
use crate::steady::SteadyProfiles;

const SIZE: (u32, u32) = (720, 480);

struct Curve<'a> {
    points: Vec<(f64, f64)>,
    color: RGBColor,
    label: &'a str,
}

fn bounds(curves: &[Curve]) -> ((f64, f64), (f64, f64)) {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = (f64::INFINITY, f64::NEG_INFINITY);
    for &(px, py) in curves.iter().flat_map(|c| &c.points) {
        if px.is_finite() && py.is_finite() {
            x = (x.0.min(px), x.1.max(px));
            y = (y.0.min(py), y.1.max(py));
        }
    }
    let pad = |(lo, hi): (f64, f64)| {
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi + 0.05 * (hi - lo))
        }
    };
    (pad(x), pad(y))
}

fn draw(path: &Path, title: &str, x_label: &str, curves: &[Curve]) -> Result<()> {
    let plot_err =
        |e: &dyn std::fmt::Display| Error::Io(std::io::Error::other(format!("plot {}: {e}", path.display())));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let ((x0, x1), (y0, y1)) = bounds(curves);
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .draw()
        .map_err(|e| plot_err(&e))?;
    for curve in curves {
        let style = ShapeStyle::from(&curve.color).stroke_width(2);
        if curve.points.len() == 1 {
            chart
                .draw_series(curve.points.iter().map(|&p| Circle::new(p, 3, style.filled())))
                .map_err(|e| plot_err(&e))?;
        } else {
            chart
                .draw_series(LineSeries::new(curve.points.iter().copied(), style))
                .map_err(|e| plot_err(&e))?
                .label(curve.label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], style));
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(&e))?;
    root.present().map_err(|e| plot_err(&e))?;
    Ok(())
}

/// `s(t)` with a horizontal guide at `lambda`. An empty series is drawn as the
/// single point `(0, s0)`.
pub fn plot_front(record: &RunRecord, lambda: f64, path: &Path) -> Result<()> {
    let mut points: Vec<(f64, f64)> = record.series.iter().map(|p| (p.t, p.s)).collect();
    if points.is_empty() {
        points.push((0.0, record.params.s0));
    }
    let t_end = points.last().unwrap().0.max(record.grid.t_max.min(1.0));
    let guide = vec![(0.0, lambda), (t_end, lambda)];
    draw(
        path,
        "front position",
        "t",
        &[
            Curve {
                points,
                color: BLUE,
                label: "s(t)",
            },
            Curve {
                points: guide,
                color: RED,
                label: "Lambda",
            },
        ],
    )
}

fn profile_curves(snap: &Snapshot) -> [Curve<'static>; 2] {
    let xs = snap.xs();
    [
        Curve {
            points: xs.iter().copied().zip(snap.u.iter().copied()).collect(),
            color: BLUE,
            label: "u",
        },
        Curve {
            points: xs.iter().copied().zip(snap.v.iter().copied()).collect(),
            color: GREEN,
            label: "v",
        },
    ]
}

pub fn plot_profiles(snap: &Snapshot, path: &Path) -> Result<()> {
    draw(path, &format!("profiles at t = {}", snap.t), "x", &profile_curves(snap))
}

/// Barrier curves on `[0, x_max]`, overlaid with `snap` when given.
pub fn plot_barriers(barriers: &SteadyProfiles, snap: Option<&Snapshot>, x_max: f64, path: &Path) -> Result<()> {
    let xs = barriers.grid.nodes();
    let keep = |y: &[f64]| -> Vec<(f64, f64)> {
        xs.iter()
            .copied()
            .zip(y.iter().copied())
            .filter(|&(x, _)| x <= x_max)
            .collect()
    };
    let mut curves = vec![
        Curve {
            points: keep(&barriers.u_bar),
            color: MAGENTA,
            label: "u_bar",
        },
        Curve {
            points: keep(&barriers.u_low),
            color: CYAN,
            label: "u_low",
        },
        Curve {
            points: keep(&barriers.v_bar),
            color: RGBColor(160, 80, 0),
            label: "v_bar",
        },
        Curve {
            points: keep(&barriers.v_low),
            color: RGBColor(90, 90, 90),
            label: "v_low",
        },
    ];
    if let Some(snap) = snap {
        for mut c in profile_curves(snap) {
            c.points.retain(|&(x, _)| x <= x_max);
            curves.push(c);
        }
    }
    draw(path, "steady barriers", "x", &curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, ProblemKind};
    use crate::solver::{CeilingMonitor, GridSpec};

    #[test]
    fn empty_record_draws_a_point() {
        let record = RunRecord {
            params: ModelParams::default(),
            kind: ProblemKind::Nfb,
            grid: GridSpec::default(),
            series: Vec::new(),
            snapshots: Vec::new(),
            monitor: CeilingMonitor::default(),
            failure: None,
            stopped_early: false,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("front.svg");
        plot_front(&record, 1.5, &path).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.contains("<svg") && svg.contains("<circle"));
    }
}
