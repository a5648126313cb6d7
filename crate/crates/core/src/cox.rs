//! Devices as a Cox point process on the street skeleton.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{poisson_count, Point2};
use crate::tessellation::Tessellation;

/// Cumulative segment lengths, for length-uniform segment selection by
/// binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthTable {
    cumulative: Vec<f64>,
}

impl LengthTable {
    pub fn new(t: &Tessellation) -> Result<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = t
            .segments()
            .iter()
            .map(|s| {
                acc += s.length;
                acc
            })
            .collect();
        if acc <= 0.0 {
            return Err(Error::InvalidState(
                "street system has zero total length".into(),
            ));
        }
        Ok(LengthTable { cumulative })
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("table is non-empty")
    }

    /// Segment whose cumulative interval contains `u ∈ [0, total)`.
    pub fn segment_at(&self, u: f64) -> usize {
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

/// A Cox sample: device positions with the segment carrying each, plus an
/// optional marked origin that is not one of the devices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviceSet {
    pub positions: Vec<Point2>,
    pub segment_index: Vec<usize>,
    pub origin: Option<Point2>,
}

impl DeviceSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn push(&mut self, p: Point2, segment: usize) {
        self.positions.push(p);
        self.segment_index.push(segment);
    }
}

fn draw<R: Rng + ?Sized>(t: &Tessellation, table: &LengthTable, rng: &mut R) -> (Point2, usize) {
    let seg = table.segment_at(rng.random::<f64>() * table.total());
    let p = t.segments()[seg].point_at(rng.random::<f64>());
    (p, seg)
}

/// One point uniform with respect to street length.
pub fn sample_uniform_on_streets<R: Rng + ?Sized>(t: &Tessellation, rng: &mut R) -> Result<Point2> {
    let table = LengthTable::new(t)?;
    Ok(draw(t, &table, rng).0)
}

/// Cox process with intensity `lambda` per km of street: a
/// Poisson(`lambda · ν₁`) number of i.i.d. length-uniform devices.
pub fn sample_cox<R: Rng + ?Sized>(
    t: &Tessellation,
    lambda: f64,
    rng: &mut R,
) -> Result<DeviceSet> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(
            "lambda",
            format!("must be finite and >= 0, got {lambda}"),
        ));
    }
    let n = poisson_count(lambda * t.nu1(), rng)?;
    let mut devices = DeviceSet::default();
    if n == 0 {
        return Ok(devices);
    }
    let table = LengthTable::new(t)?;
    devices.positions.reserve(n);
    devices.segment_index.reserve(n);
    for _ in 0..n {
        let (p, seg) = draw(t, &table, rng);
        devices.push(p, seg);
    }
    Ok(devices)
}

/// Endless stream of i.i.d. length-uniform points on the streets.
///
/// The first `j` items are `j` independent uniforms, so stopping the stream
/// at a Poisson count reproduces the Cox process.
pub struct StreetSampler<'a, R> {
    tessellation: &'a Tessellation,
    table: LengthTable,
    rng: R,
}

impl<'a, R: Rng> StreetSampler<'a, R> {
    pub fn new(tessellation: &'a Tessellation, rng: R) -> Result<Self> {
        Ok(StreetSampler {
            table: LengthTable::new(tessellation)?,
            tessellation,
            rng,
        })
    }

    /// Next point and the index of its segment.
    pub fn next_on_segment(&mut self) -> (Point2, usize) {
        draw(self.tessellation, &self.table, &mut self.rng)
    }

    pub fn into_rng(self) -> R {
        self.rng
    }
}

impl<R: Rng> Iterator for StreetSampler<'_, R> {
    type Item = Point2;

    fn next(&mut self) -> Option<Point2> {
        Some(self.next_on_segment().0)
    }
}

/// Starts a sequential sampler on `t`.
pub fn sequential_sampler<R: Rng>(t: &Tessellation, rng: R) -> Result<StreetSampler<'_, R>> {
    StreetSampler::new(t, rng)
}
