//! Basepoints `z_Q, w_Q ∈ E1` per square and anchors `z_x, w_x` per E2 point.

use thiserror::Error;

use super::{DyadicSquare, SquareType};
use crate::embedding::PlanarSet;
use crate::geometry::Point;
use crate::math;

/// Grid indices of `z_x` and `w_x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Anchors {
    pub z: usize,
    pub w: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnchorError {
    #[error("anchors of ({x}, {y}) break the factor-4 comparability with the height: {detail}")]
    Geometry { x: f64, y: f64, detail: &'static str },
}

/// `z_x` = nearest grid point; `w_x` = grid point nearest `x⁽¹⁾ + x⁽²⁾`
/// (or `x⁽¹⁾ − x⁽²⁾` when that would leave `[0, 2)`).
pub fn e2_anchors(ps: &PlanarSet, x: Point) -> Result<Anchors, AnchorError> {
    let z = ps.nearest_e1_index(x);
    let h = x.y;
    let right = x.x + h;
    let mut w = if right < 2.0 { ps.nearest_e1_index(Point::new(right, 0.0)) } else { ps.nearest_e1_index(Point::new(x.x - h, 0.0)) };
    if w == z {
        w = if z + 1 < ps.e1_count() { z + 1 } else { z.saturating_sub(1) };
    }
    let (zp, wp) = (ps.e1_point(z), ps.e1_point(w));
    let fail = |detail| Err(AnchorError::Geometry { x: x.x, y: x.y, detail });
    let within = |d: f64| d >= 0.25 * h && d <= 4.0 * h;
    if !within(x.dist(zp)) {
        return fail("|x - z_x|");
    }
    if !within(x.dist(wp)) {
        return fail("|x - w_x|");
    }
    if !within(zp.dist(wp)) {
        return fail("|z_x - w_x|");
    }
    if z == w || h <= 0.0 {
        return fail("x, z_x, w_x colinear");
    }
    Ok(Anchors { z, w })
}

/// Basepoint rule per square type; returns grid indices `(z_Q, w_Q)`.
pub(super) fn assign(
    ps: &PlanarSet,
    sq: &DyadicSquare,
    kind: SquareType,
    witness: Option<usize>,
    boundary: bool,
    anchors: &[Anchors],
) -> (usize, usize) {
    let last = ps.e1_count() - 1;
    if boundary {
        return (0, last);
    }
    match kind {
        SquareType::I => {
            let k = witness.expect("type I has a witness");
            (k, if k < last { k + 1 } else { k - 1 })
        }
        SquareType::II => {
            let a = anchors[witness.expect("type II has a witness")];
            (a.z, a.w)
        }
        SquareType::III => {
            let z = ps.nearest_e1_index(sq.center());
            let steps = (math::round(sq.side() / ps.delta()) as usize).max(1);
            let w = if z + steps <= last {
                z + steps
            } else if z >= steps {
                z - steps
            } else if last - z >= z {
                last
            } else {
                0
            };
            (z, w)
        }
    }
}
