//! Addressing architectures for nozzle arrays.
//!
//! A printhead with `Y` nozzles can expose its heaters through one line per
//! nozzle (1D), a row/column grid (2D), or a power/address/selection triple
//! (3D). The external data-access points (pads) for a multiplexed scheme are
//! the per-axis lines plus one shared common line:
//!
//! ```text
//! pads = sum(axes) + 1
//! ```
//!
//! which for equal axes reduces to the closed forms `Y + 1`, `2*sqrt(Y) + 1`
//! and `3*cbrt(Y) + 1`. This module holds the axis factorizations behind
//! those counts and the bijection between linear nozzle indices and
//! `(P, A, S)` coordinates.
//!
//! Axis order inside `axes` is `[P]` for 1D, `[A, P]` for 2D and
//! `[A, P, S]` for 3D. The nozzle layout is P-major with S varying fastest:
//!
//! ```text
//! n = ((p - 1) * a_lines + (a - 1)) * s_lines + s      (1-based)
//! ```
//!
//! so nozzle 1 sits at (P1, A1, S1) and, on a 16x8 grid, nozzle 125 at
//! (P8, A13).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to split a nozzle count into per-axis line counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorizationStrategy {
    /// Near-equal axes: start from `ceil(Y^(1/d))` per axis, then trim each
    /// axis front-to-back while the product still covers the nozzle count.
    Equal,
    /// Power-of-two axes with balanced exponents; the leftover bit goes to
    /// the earlier (address) axes.
    Pow2,
    /// Caller-supplied axes, validated against the nozzle count.
    Explicit(Vec<usize>),
}

/// One multiplexing topology: dimension, per-axis line counts, and the
/// number of logical nozzles actually used (cells beyond it are padding).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    dims: usize,
    axes: Vec<usize>,
    nozzle_count: usize,
}

impl Topology {
    pub fn new(dims: usize, axes: Vec<usize>, nozzle_count: usize) -> Result<Topology> {
        if !(1..=3).contains(&dims) {
            return Err(Error::InvalidDims(dims));
        }
        if axes.len() != dims {
            return Err(Error::AxisCount {
                dims,
                len: axes.len(),
            });
        }
        if axes.contains(&0) {
            return Err(Error::InvalidAxes { axes });
        }
        if nozzle_count == 0 {
            return Err(Error::Capacity {
                capacity: axes.iter().product(),
                axes,
                nozzles: 0,
            });
        }
        let capacity: usize = axes.iter().product();
        if capacity < nozzle_count {
            return Err(Error::Capacity {
                axes,
                capacity,
                nozzles: nozzle_count,
            });
        }
        Ok(Topology {
            dims,
            axes,
            nozzle_count,
        })
    }

    /// Factorizes `nozzles` with `strategy` and builds the topology.
    pub fn with_strategy(
        dims: usize,
        nozzles: usize,
        strategy: &FactorizationStrategy,
    ) -> Result<Topology> {
        let axes = factorize_axes(dims, nozzles, strategy)?;
        Topology::new(dims, axes, nozzles)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn nozzle_count(&self) -> usize {
        self.nozzle_count
    }

    /// Total cells in the scan space, padding included.
    pub fn capacity(&self) -> usize {
        self.axes.iter().product()
    }

    /// Number of address (A) lines; 1 when the scheme has no A axis.
    pub fn a_lines(&self) -> usize {
        if self.dims >= 2 {
            self.axes[0]
        } else {
            1
        }
    }

    /// Number of power (P) lines. In 1D every nozzle has its own P line.
    pub fn p_lines(&self) -> usize {
        match self.dims {
            1 => self.axes[0],
            _ => self.axes[1],
        }
    }

    /// Number of selection (S) lines; 1 below 3D.
    pub fn s_lines(&self) -> usize {
        if self.dims == 3 {
            self.axes[2]
        } else {
            1
        }
    }

    /// Data-access points: all scan lines plus the shared common line.
    pub fn pads(&self) -> usize {
        self.axes.iter().sum::<usize>() + 1
    }

    /// Linear cell index for a (p, a, s) triple, 1-based, padding included.
    pub(crate) fn cell_index(&self, p: usize, a: usize, s: usize) -> usize {
        ((p - 1) * self.a_lines() + (a - 1)) * self.s_lines() + s
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axes = self
            .axes
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join("x");
        write!(f, "{}D {} ({} nozzles)", self.dims, axes, self.nozzle_count)
    }
}

/// 1-based position of a nozzle on the scan axes. `a` and `s` are present
/// only when the topology has those axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coord {
    pub p: usize,
    pub a: Option<usize>,
    pub s: Option<usize>,
}

impl Coord {
    pub fn d1(p: usize) -> Coord {
        Coord {
            p,
            a: None,
            s: None,
        }
    }

    pub fn d2(p: usize, a: usize) -> Coord {
        Coord {
            p,
            a: Some(a),
            s: None,
        }
    }

    pub fn d3(p: usize, a: usize, s: usize) -> Coord {
        Coord {
            p,
            a: Some(a),
            s: Some(s),
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.p)?;
        if let Some(a) = self.a {
            write!(f, ",A{}", a)?;
        }
        if let Some(s) = self.s {
            write!(f, ",S{}", s)?;
        }
        Ok(())
    }
}

/// Pad count for one scheme, with the factorization behind it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadReport {
    pub dims: usize,
    pub nozzles: usize,
    pub pads: usize,
    pub axes_used: Vec<usize>,
    /// Cells provided by the factorization; exceeds `nozzles` when padded.
    pub capacity: usize,
}

/// Pads needed to address `nozzles` under a `dims`-dimensional scheme.
pub fn pad_count(
    dims: usize,
    nozzles: usize,
    strategy: &FactorizationStrategy,
) -> Result<PadReport> {
    let axes = factorize_axes(dims, nozzles, strategy)?;
    let pads = axes.iter().sum::<usize>() + 1;
    let capacity = axes.iter().product();
    Ok(PadReport {
        dims,
        nozzles,
        pads,
        axes_used: axes,
        capacity,
    })
}

/// Splits `nozzles` into `dims` axis sizes whose product covers it.
pub fn factorize_axes(
    dims: usize,
    nozzles: usize,
    strategy: &FactorizationStrategy,
) -> Result<Vec<usize>> {
    if !(1..=3).contains(&dims) {
        return Err(Error::InvalidDims(dims));
    }
    if nozzles == 0 {
        return Err(Error::Capacity {
            axes: vec![],
            capacity: 0,
            nozzles: 0,
        });
    }
    match strategy {
        FactorizationStrategy::Equal => Ok(equal_axes(dims, nozzles)),
        FactorizationStrategy::Pow2 => Ok(pow2_axes(dims, nozzles)),
        FactorizationStrategy::Explicit(axes) => {
            if axes.len() != dims {
                return Err(Error::AxisCount {
                    dims,
                    len: axes.len(),
                });
            }
            if axes.contains(&0) {
                return Err(Error::InvalidAxes { axes: axes.clone() });
            }
            let capacity: usize = axes.iter().product();
            if capacity < nozzles {
                return Err(Error::Capacity {
                    axes: axes.clone(),
                    capacity,
                    nozzles,
                });
            }
            Ok(axes.clone())
        }
    }
}

fn equal_axes(dims: usize, nozzles: usize) -> Vec<usize> {
    let root = int_root_ceil(nozzles, dims);
    let mut axes = vec![root; dims];
    // Trim front-to-back; the front axes are the cheap-to-scan ones and the
    // tail (S in 3D) keeps the parallel-fire width.
    for i in 0..dims {
        while axes[i] > 1 {
            axes[i] -= 1;
            let product: usize = axes.iter().product();
            if product < nozzles {
                axes[i] += 1;
                break;
            }
        }
    }
    axes
}

/// Smallest integer r with r^dims >= n.
fn int_root_ceil(n: usize, dims: usize) -> usize {
    let mut r = (n as f64).powf(1.0 / dims as f64).ceil() as usize;
    r = r.max(1);
    // Guard against float slop on either side.
    while r.pow(dims as u32) < n {
        r += 1;
    }
    while r > 1 && (r - 1).pow(dims as u32) >= n {
        r -= 1;
    }
    r
}

fn pow2_axes(dims: usize, nozzles: usize) -> Vec<usize> {
    let total_bits = usize::BITS - (nozzles - 1).leading_zeros(); // ceil(log2), 0 for n=1
    let total_bits = total_bits as usize;
    let base = total_bits / dims;
    let extra = total_bits % dims;
    (0..dims)
        .map(|i| 1usize << (base + usize::from(i < extra)))
        .collect()
}

/// Maps a linear cell index (1-based, padding cells included) to scan
/// coordinates. Indices above `nozzle_count` but within capacity address
/// padding cells, which exist on the die but never receive firing data.
pub fn nozzle_to_coords(t: &Topology, n: usize) -> Result<Coord> {
    if n == 0 || n > t.capacity() {
        return Err(Error::NozzleRange {
            index: n,
            limit: t.capacity(),
        });
    }
    let m = n - 1;
    let s = m % t.s_lines() + 1;
    let rest = m / t.s_lines();
    let a = rest % t.a_lines() + 1;
    let p = rest / t.a_lines() + 1;
    Ok(match t.dims() {
        1 => Coord::d1(p),
        2 => Coord::d2(p, a),
        _ => Coord::d3(p, a, s),
    })
}

/// Inverse of [`nozzle_to_coords`].
pub fn coords_to_nozzle(t: &Topology, c: &Coord) -> Result<usize> {
    let bad = || Error::CoordRange {
        coord: c.to_string(),
        dims: t.dims(),
    };
    let a = match (t.dims(), c.a) {
        (1, None) => 1,
        (2 | 3, Some(a)) => a,
        _ => return Err(bad()),
    };
    let s = match (t.dims(), c.s) {
        (1 | 2, None) => 1,
        (3, Some(s)) => s,
        _ => return Err(bad()),
    };
    if c.p == 0 || c.p > t.p_lines() || a == 0 || a > t.a_lines() || s == 0 || s > t.s_lines() {
        return Err(bad());
    }
    Ok(t.cell_index(c.p, a, s))
}

/// Continuous pad curve for a scheme, used for crossover analysis.
pub fn pad_curve(dims: usize, nozzles: f64) -> f64 {
    match dims {
        1 => nozzles + 1.0,
        2 => 2.0 * nozzles.sqrt() + 1.0,
        _ => 3.0 * nozzles.cbrt() + 1.0,
    }
}

/// A solved intersection of two continuous pad curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    /// The two scheme dimensions whose curves intersect, lower first.
    pub schemes: (usize, usize),
    /// Nozzle count at the intersection, on the real line.
    pub nozzles: f64,
}

/// One row of the pad-versus-nozzle table (continuous curve values).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PadCurveRow {
    pub nozzles: usize,
    pub pads_1d: f64,
    pub pads_2d: f64,
    pub pads_3d: f64,
}

/// Crossover analysis of the three pad curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub crossovers: Vec<Crossover>,
    /// Intersection nozzle counts reported for the reference design's pad
    /// chart. The solved values above differ; both are carried so the
    /// discrepancy stays visible.
    pub reference_reported: (f64, f64),
    pub table: Vec<PadCurveRow>,
}

const BISECTION_TOLERANCE: f64 = 1e-9;

/// Solves the pairwise crossovers of the pad curves by bisection and
/// tabulates the curves up to `max_nozzles`.
pub fn crossover_table(max_nozzles: usize) -> CrossoverReport {
    let max_nozzles = max_nozzles.max(2);
    let pairs: [(usize, usize, f64); 3] = [(1, 2, 16.0), (1, 3, 27.0), (2, 3, 64.0)];
    let crossovers = pairs
        .iter()
        .map(|&(lo_dims, hi_dims, hi)| Crossover {
            schemes: (lo_dims, hi_dims),
            nozzles: bisect_crossover(lo_dims, hi_dims, 1.0, hi),
        })
        .collect();
    let table = (1..=max_nozzles)
        .map(|y| PadCurveRow {
            nozzles: y,
            pads_1d: pad_curve(1, y as f64),
            pads_2d: pad_curve(2, y as f64),
            pads_3d: pad_curve(3, y as f64),
        })
        .collect();
    CrossoverReport {
        crossovers,
        reference_reported: (10.0, 30.0),
        table,
    }
}

fn bisect_crossover(d_lo: usize, d_hi: usize, mut lo: f64, mut hi: f64) -> f64 {
    let f = |y: f64| pad_curve(d_lo, y) - pad_curve(d_hi, y);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal() -> FactorizationStrategy {
        FactorizationStrategy::Equal
    }

    #[test]
    fn pad_counts_for_the_reference_cases() {
        let r = pad_count(2, 100, &equal()).unwrap();
        assert_eq!(r.pads, 21);
        assert_eq!(r.axes_used, vec![10, 10]);

        let r = pad_count(3, 1000, &equal()).unwrap();
        assert_eq!(r.pads, 31);
        assert_eq!(r.axes_used, vec![10, 10, 10]);

        let r = pad_count(1, 1000, &equal()).unwrap();
        assert_eq!(r.pads, 1001);

        let r = pad_count(2, 1024, &equal()).unwrap();
        assert_eq!(r.pads, 65);
        assert_eq!(r.axes_used, vec![32, 32]);

        let r = pad_count(1, 1, &equal()).unwrap();
        assert_eq!(r.pads, 2);
    }

    #[test]
    fn pad_count_rejects_bad_dims() {
        assert!(matches!(
            pad_count(0, 10, &equal()),
            Err(Error::InvalidDims(0))
        ));
        assert!(matches!(
            pad_count(4, 10, &equal()),
            Err(Error::InvalidDims(4))
        ));
    }

    #[test]
    fn factorize_reference_cases() {
        assert_eq!(
            factorize_axes(2, 125, &FactorizationStrategy::Pow2).unwrap(),
            vec![16, 8]
        );
        assert_eq!(factorize_axes(3, 125, &equal()).unwrap(), vec![5, 5, 5]);
        assert_eq!(factorize_axes(3, 1000, &equal()).unwrap(), vec![10, 10, 10]);
        assert_eq!(factorize_axes(1, 7, &equal()).unwrap(), vec![7]);
    }

    #[test]
    fn explicit_axes_must_cover_the_nozzles() {
        let err = factorize_axes(2, 125, &FactorizationStrategy::Explicit(vec![11, 11]));
        assert!(matches!(
            err,
            Err(Error::Capacity {
                capacity: 121,
                nozzles: 125,
                ..
            })
        ));
        assert_eq!(
            factorize_axes(2, 125, &FactorizationStrategy::Explicit(vec![16, 8])).unwrap(),
            vec![16, 8]
        );
        assert!(factorize_axes(2, 4, &FactorizationStrategy::Explicit(vec![0, 4])).is_err());
        assert!(factorize_axes(2, 4, &FactorizationStrategy::Explicit(vec![2, 2, 1])).is_err());
    }

    /// Walks the declared layout order with counting loops instead of
    /// arithmetic; the production mapping must agree with it everywhere.
    fn layout_by_enumeration(t: &Topology) -> Vec<Coord> {
        let mut cells = Vec::with_capacity(t.capacity());
        for p in 1..=t.p_lines() {
            for a in 1..=t.a_lines() {
                for s in 1..=t.s_lines() {
                    cells.push(match t.dims() {
                        1 => Coord::d1(p),
                        2 => Coord::d2(p, a),
                        _ => Coord::d3(p, a, s),
                    });
                }
            }
        }
        cells
    }

    #[test]
    fn coordinate_mapping_matches_enumeration_oracle() {
        for t in [
            Topology::new(3, vec![5, 5, 5], 125).unwrap(),
            Topology::new(2, vec![16, 8], 125).unwrap(),
            Topology::new(3, vec![10, 10, 10], 1000).unwrap(),
            Topology::new(1, vec![7], 7).unwrap(),
            Topology::new(3, vec![3, 4, 2], 20).unwrap(),
        ] {
            let oracle = layout_by_enumeration(&t);
            for n in 1..=t.capacity() {
                let c = nozzle_to_coords(&t, n).unwrap();
                assert_eq!(c, oracle[n - 1], "cell {n} of {t}");
                assert_eq!(coords_to_nozzle(&t, &c).unwrap(), n);
            }
        }
    }

    #[test]
    fn named_coordinate_cases() {
        let cube = Topology::new(3, vec![5, 5, 5], 125).unwrap();
        assert_eq!(nozzle_to_coords(&cube, 1).unwrap(), Coord::d3(1, 1, 1));
        assert_eq!(nozzle_to_coords(&cube, 125).unwrap(), Coord::d3(5, 5, 5));

        let grid = Topology::new(2, vec![16, 8], 125).unwrap();
        assert_eq!(nozzle_to_coords(&grid, 125).unwrap(), Coord::d2(8, 13));
        assert_eq!(coords_to_nozzle(&grid, &Coord::d2(1, 16)).unwrap(), 16);

        let big = Topology::new(3, vec![10, 10, 10], 1000).unwrap();
        assert_eq!(coords_to_nozzle(&big, &Coord::d3(1, 1, 1)).unwrap(), 1);
        assert_eq!(
            coords_to_nozzle(&big, &Coord::d3(10, 10, 10)).unwrap(),
            1000
        );
    }

    #[test]
    fn out_of_range_cells_are_rejected() {
        let t = Topology::new(2, vec![4, 4], 16).unwrap();
        assert!(nozzle_to_coords(&t, 0).is_err());
        assert!(nozzle_to_coords(&t, 17).is_err());
        assert!(coords_to_nozzle(&t, &Coord::d2(5, 1)).is_err());
        assert!(coords_to_nozzle(&t, &Coord::d2(1, 5)).is_err());
        // Coordinate shape must match the dimension.
        assert!(coords_to_nozzle(&t, &Coord::d1(1)).is_err());
        assert!(coords_to_nozzle(&t, &Coord::d3(1, 1, 1)).is_err());
    }

    #[test]
    fn crossovers_match_the_closed_forms() {
        let report = crossover_table(50);
        // Y = 2*sqrt(Y)       => Y = 4
        // Y = 3*cbrt(Y)       => Y = 3^(3/2)
        // 2*sqrt(Y) = 3*cbrt(Y) => Y = (3/2)^6
        let expect = [
            ((1, 2), 4.0),
            ((1, 3), 3.0f64.powf(1.5)),
            ((2, 3), 1.5f64.powi(6)),
        ];
        for (cross, (schemes, y)) in report.crossovers.iter().zip(expect) {
            assert_eq!(cross.schemes, schemes);
            assert!(
                (cross.nozzles - y).abs() < 1e-6,
                "{:?}: got {}, want {}",
                schemes,
                cross.nozzles,
                y
            );
        }
        assert_eq!(report.reference_reported, (10.0, 30.0));
        assert_eq!(report.table.len(), 50);
        assert_eq!(report.table[3].pads_1d, 5.0);
        assert_eq!(report.table[3].pads_2d, 5.0);
    }

    #[test]
    fn crossover_table_extends_to_requested_rows() {
        let report = crossover_table(1000);
        let row = &report.table[999];
        assert_eq!(row.nozzles, 1000);
        assert_eq!(row.pads_1d, 1001.0);
        assert!((row.pads_2d - 64.245553).abs() < 1e-5);
        assert!((row.pads_3d - 31.0).abs() < 1e-12);
    }
}
