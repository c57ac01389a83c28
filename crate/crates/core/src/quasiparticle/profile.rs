//! Gap profiles along a one-dimensional cut through the junction.

use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::physcore::Constants;

/// Thickness (nm) to critical temperature (K), linear between anchors and
/// clamped outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessTcTable {
    anchors: Vec<(f64, f64)>,
}

impl ThicknessTcTable {
    /// Anchors must be sorted by strictly increasing thickness with
    /// non-increasing `T_c`.
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self> {
        ensure!(!anchors.is_empty(), Config, "thickness table is empty");
        for &(t, tc) in &anchors {
            ensure!(
                t > 0.0 && tc > 0.0 && t.is_finite() && tc.is_finite(),
                Config,
                "thickness table entries must be positive, got ({t}, {tc})"
            );
        }
        for w in anchors.windows(2) {
            ensure!(
                w[1].0 > w[0].0,
                Config,
                "thickness table must be sorted by thickness"
            );
            ensure!(
                w[1].1 <= w[0].1,
                Config,
                "T_c must not increase with thickness ({} nm -> {} nm)",
                w[0].0,
                w[1].0
            );
        }
        Ok(ThicknessTcTable { anchors })
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn tc(&self, thickness_nm: f64) -> Result<f64> {
        ensure!(
            thickness_nm > 0.0 && thickness_nm.is_finite(),
            Domain,
            "thickness must be positive, got {thickness_nm}"
        );
        let a = &self.anchors;
        let first = a[0];
        let last = a[a.len() - 1];
        if thickness_nm <= first.0 {
            return Ok(first.1);
        }
        if thickness_nm >= last.0 {
            return Ok(last.1);
        }
        let i = a.partition_point(|&(t, _)| t <= thickness_nm);
        let (t0, c0) = a[i - 1];
        let (t1, c1) = a[i];
        Ok(c0 + (c1 - c0) * (thickness_nm - t0) / (t1 - t0))
    }
}

impl Default for ThicknessTcTable {
    /// Thin strips (20-25 nm) at 1.6 K, films of 40 nm and more at 1.3 K.
    fn default() -> Self {
        ThicknessTcTable {
            anchors: alloc::vec![(20.0, 1.6), (25.0, 1.6), (40.0, 1.3)],
        }
    }
}

pub fn tc_from_thickness(thickness_nm: f64, table: &ThicknessTcTable) -> Result<f64> {
    table.tc(thickness_nm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSegment {
    pub length_um: f64,
    pub delta_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Segments before the junction coordinate.
    Left,
    /// Segments after it.
    Right,
}

/// Piecewise-constant gap `Delta(x)` with a junction on a segment boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    segments: Vec<GapSegment>,
    junction_um: f64,
    junction_index: usize,
}

impl GapProfile {
    pub fn new(segments: Vec<GapSegment>, junction_um: f64) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            ensure!(
                s.length_um > 0.0 && s.length_um.is_finite(),
                Geometry,
                "segment {i}: length must be positive, got {}",
                s.length_um
            );
            ensure!(
                s.delta_k > 0.0 && s.delta_k.is_finite(),
                Geometry,
                "segment {i}: gap must be positive, got {}",
                s.delta_k
            );
        }
        let total: f64 = segments.iter().map(|s| s.length_um).sum();
        let tol = 1e-9 * total.max(1.0);
        let mut x = 0.0;
        let mut junction_index = None;
        for i in 1..segments.len() {
            x += segments[i - 1].length_um;
            if (x - junction_um).abs() <= tol {
                junction_index = Some(i);
                break;
            }
        }
        let junction_index = junction_index.ok_or_else(|| {
            Error::Geometry(alloc::format!(
                "junction at {junction_um} um is not an interior segment boundary"
            ))
        })?;
        Ok(GapProfile {
            segments,
            junction_um,
            junction_index,
        })
    }

    pub fn segments(&self) -> &[GapSegment] {
        &self.segments
    }

    pub fn junction_um(&self) -> f64 {
        self.junction_um
    }

    /// Number of segments left of the junction.
    pub fn junction_index(&self) -> usize {
        self.junction_index
    }

    pub fn total_length_um(&self) -> f64 {
        self.segments.iter().map(|s| s.length_um).sum()
    }

    /// Segments of one side, ordered outward from the junction.
    pub fn side(&self, side: Side) -> Vec<GapSegment> {
        let (left, right) = self.segments.split_at(self.junction_index);
        match side {
            Side::Left => left.iter().rev().copied().collect(),
            Side::Right => right.to_vec(),
        }
    }

    pub fn adjacent_delta(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.segments[self.junction_index - 1].delta_k,
            Side::Right => self.segments[self.junction_index].delta_k,
        }
    }

    pub fn side_min_delta(&self, side: Side) -> f64 {
        self.side(side)
            .iter()
            .map(|s| s.delta_k)
            .fold(f64::INFINITY, f64::min)
    }

    /// Junction-adjacent gap minus the lowest gap on that side.
    pub fn barrier_height(&self, side: Side) -> f64 {
        self.adjacent_delta(side) - self.side_min_delta(side)
    }

    /// Gap of the junction, taken as the smaller electrode gap.
    pub fn junction_delta(&self) -> f64 {
        self.adjacent_delta(Side::Left)
            .min(self.adjacent_delta(Side::Right))
    }

    /// Gap of the higher junction electrode.
    pub fn high_junction_delta(&self) -> f64 {
        self.adjacent_delta(Side::Left)
            .max(self.adjacent_delta(Side::Right))
    }

    /// Smallest energy a gap-edge quasiparticle from either side must gain
    /// to reach the higher junction electrode.
    pub fn tunnelling_barrier(&self) -> f64 {
        let top = self.high_junction_delta();
        let floor = self
            .side_min_delta(Side::Left)
            .max(self.side_min_delta(Side::Right));
        top - floor
    }
}

/// Film thickness or an explicit gap for one stack segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentGap {
    ThicknessNm(f64),
    DeltaK(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackSegment {
    pub length_um: f64,
    pub gap: SegmentGap,
}

impl StackSegment {
    pub fn thickness(length_um: f64, thickness_nm: f64) -> Self {
        StackSegment {
            length_um,
            gap: SegmentGap::ThicknessNm(thickness_nm),
        }
    }

    pub fn delta(length_um: f64, delta_k: f64) -> Self {
        StackSegment {
            length_um,
            gap: SegmentGap::DeltaK(delta_k),
        }
    }
}

/// Maps thickness through the table to `T_c` and then to the BCS gap.
pub fn profile_from_stack(
    stack: &[StackSegment],
    junction_um: f64,
    table: &ThicknessTcTable,
    constants: &Constants,
) -> Result<GapProfile> {
    let segments = stack
        .iter()
        .map(|s| {
            let delta_k = match s.gap {
                SegmentGap::ThicknessNm(t) => constants.delta_from_tc(table.tc(t)?)?,
                SegmentGap::DeltaK(d) => d,
            };
            Ok(GapSegment {
                length_um: s.length_um,
                delta_k,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GapProfile::new(segments, junction_um)
}

/// Gap-engineered stack: 5 um of underlayer-backed electrode (40 nm), the
/// 3 um thin strip (25 nm), the junction, then 5 um of top electrode (60 nm).
pub fn protected_stack() -> (Vec<StackSegment>, f64) {
    (
        alloc::vec![
            StackSegment::thickness(5.0, 40.0),
            StackSegment::thickness(3.0, 25.0),
            StackSegment::thickness(5.0, 60.0),
        ],
        8.0,
    )
}

/// Same geometry without the underlayer: the whole bottom electrode is 25 nm.
pub fn unprotected_stack() -> (Vec<StackSegment>, f64) {
    (
        alloc::vec![
            StackSegment::thickness(5.0, 25.0),
            StackSegment::thickness(3.0, 25.0),
            StackSegment::thickness(5.0, 60.0),
        ],
        8.0,
    )
}
