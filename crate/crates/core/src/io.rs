//! CSV persistence of street systems, devices, graphs and estimator
//! records.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cox::DeviceSet;
use crate::error::Result;
use crate::estimators::{CrossingCurvePoint, ThetaSample};
use crate::geometry::Point2;
use crate::graph::GilbertGraph;
use crate::tessellation::Tessellation;

#[derive(Debug, Serialize, Deserialize)]
struct SegmentRow {
    ax: f64,
    ay: f64,
    bx: f64,
    by: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DeviceRow {
    x: f64,
    y: f64,
    segment_index: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    i: usize,
    j: usize,
    shift_x: i8,
    shift_y: i8,
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>> {
    let mut input = csv::Reader::from_reader(r);
    let rows = input
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

/// `ax,ay,bx,by`, one row per street segment.
pub fn write_segments<W: Write>(w: W, t: &Tessellation) -> Result<()> {
    write_rows(
        w,
        t.segments().iter().map(|s| SegmentRow {
            ax: s.a.x,
            ay: s.a.y,
            bx: s.b.x,
            by: s.b.y,
        }),
    )
}

pub fn read_segments<R: Read>(r: R) -> Result<Vec<(Point2, Point2)>> {
    Ok(read_rows::<_, SegmentRow>(r)?
        .into_iter()
        .map(|s| (Point2::new(s.ax, s.ay), Point2::new(s.bx, s.by)))
        .collect())
}

/// `x,y,segment_index`.
pub fn write_devices<W: Write>(w: W, d: &DeviceSet) -> Result<()> {
    write_rows(
        w,
        d.positions
            .iter()
            .zip(&d.segment_index)
            .map(|(p, &segment_index)| DeviceRow {
                x: p.x,
                y: p.y,
                segment_index,
            }),
    )
}

pub fn read_devices<R: Read>(r: R) -> Result<DeviceSet> {
    let mut d = DeviceSet::default();
    for row in read_rows::<_, DeviceRow>(r)? {
        d.push(Point2::new(row.x, row.y), row.segment_index);
    }
    Ok(d)
}

/// `i,j,shift_x,shift_y` with `i < j`; the shift is the window offset of
/// `j`'s image as seen from `i`.
pub fn write_edges<W: Write>(w: W, g: &GilbertGraph) -> Result<()> {
    let rows = (0..g.len()).flat_map(|i| {
        g.neighbors(i)
            .iter()
            .filter(move |l| l.to as usize > i)
            .map(move |l| EdgeRow {
                i,
                j: l.to as usize,
                shift_x: l.shift[0],
                shift_y: l.shift[1],
            })
    });
    write_rows(w, rows)
}

/// `k,i,N,nu1,censored`.
pub fn write_theta_samples<W: Write>(w: W, samples: &[ThetaSample]) -> Result<()> {
    write_rows(w, samples)
}

pub fn read_theta_samples<R: Read>(r: R) -> Result<Vec<ThetaSample>> {
    read_rows(r)
}

/// `lambda,p_hat,runs`.
pub fn write_crossing_curve<W: Write>(w: W, points: &[CrossingCurvePoint]) -> Result<()> {
    write_rows(w, points)
}

pub fn read_crossing_curve<R: Read>(r: R) -> Result<Vec<CrossingCurvePoint>> {
    read_rows(r)
}
