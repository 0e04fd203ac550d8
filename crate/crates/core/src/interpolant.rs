//! Affine pieces and the patched interpolant `F̃ = Σ θ_Q P_Q` (tail outside `Q⁰`).

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{Point, Rect};
use crate::math;
use crate::whitney::{PouTerm, WhitneyDecomposition};

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl Jet {
    pub const ZERO: Jet = Jet { value: 0.0, grad: [0.0; 2], hess: [[0.0; 2]; 2] };

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]],
            hess: [
                [self.hess[0][0] + o.hess[0][0], self.hess[0][1] + o.hess[0][1]],
                [self.hess[1][0] + o.hess[1][0], self.hess[1][1] + o.hess[1][1]],
            ],
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == Jet::ZERO
    }

    /// Frobenius norm of the Hessian.
    pub fn hess_norm(&self) -> f64 {
        let h = &self.hess;
        math::sqrt(h[0][0] * h[0][0] + h[0][1] * h[0][1] + h[1][0] * h[1][0] + h[1][1] * h[1][1])
    }
}

/// A scalar field on the plane with up to second derivatives.
pub trait Field: Sync {
    fn jet(&self, x: Point) -> Jet;

    fn value(&self, x: Point) -> f64 {
        self.jet(x).value
    }
}

/// `P(x) = a + b·x⁽¹⁾ + c·x⁽²⁾`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct AffinePolynomial {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpolantError {
    #[error("interpolation nodes are colinear (|det| = {det:e}, scale {scale:e})")]
    Colinear { det: f64, scale: f64 },
    #[error("interpolation residual {0:e} exceeds 1e-12 relative")]
    Residual(f64),
    #[error("horizontal nodes share the first coordinate {0}")]
    Coincident(f64),
}

impl AffinePolynomial {
    pub const ZERO: AffinePolynomial = AffinePolynomial { a: 0.0, b: 0.0, c: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.a + self.b * x.x + self.c * x.y
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.a, s * self.b, s * self.c)
    }

    /// `‖P‖_{L∞(r)}`, attained at a corner since `|P|` is convex.
    pub fn linf_on(&self, r: &Rect) -> f64 {
        r.corners().iter().map(|p| math::abs(self.eval(*p))).fold(0.0, f64::max)
    }
}

impl Field for AffinePolynomial {
    fn jet(&self, x: Point) -> Jet {
        Jet { value: self.eval(x), grad: [self.b, self.c], hess: [[0.0; 2]; 2] }
    }
}

/// The affine function taking values `v` at the three points `p`.
pub fn affine_through(p: [Point; 3], v: [f64; 3]) -> Result<AffinePolynomial, InterpolantError> {
    let (u1, u2) = (p[1].x - p[0].x, p[1].y - p[0].y);
    let (s1, s2) = (p[2].x - p[0].x, p[2].y - p[0].y);
    let scale = [u1, u2, s1, s2].iter().fold(0.0f64, |m, t| m.max(math::abs(*t)));
    let det = u1 * s2 - u2 * s1;
    if !(math::abs(det) > 1e-14 * scale * scale) {
        return Err(InterpolantError::Colinear { det, scale });
    }
    let (r1, r2) = (v[1] - v[0], v[2] - v[0]);
    let b = (r1 * s2 - r2 * u2) / det;
    let c = (u1 * r2 - s1 * r1) / det;
    let poly = AffinePolynomial::new(v[0] - b * p[0].x - c * p[0].y, b, c);
    let vmax = v.iter().fold(0.0f64, |m, t| m.max(math::abs(*t)));
    // Rounding in `a` scales with the size of the linear part at the nodes.
    let lin = p.iter().fold(0.0f64, |m, q| m.max(math::abs(b * q.x) + math::abs(c * q.y)));
    let res = (0..3).map(|i| math::abs(poly.eval(p[i]) - v[i])).fold(0.0, f64::max);
    if res > 1e-12 * (vmax + lin).max(f64::MIN_POSITIVE) {
        return Err(InterpolantError::Residual(res / (vmax + lin)));
    }
    Ok(poly)
}

/// Affine `L` with `∂₂L = 0`, `L(z) = fz`, `L(w) = fw`.
pub fn horizontal_affine(z: Point, w: Point, fz: f64, fw: f64) -> Result<AffinePolynomial, InterpolantError> {
    if z.x == w.x {
        return Err(InterpolantError::Coincident(z.x));
    }
    let b = (fz - fw) / (z.x - w.x);
    Ok(AffinePolynomial::new(fz - b * z.x, b, 0.0))
}

/// `F̃`: the partition-of-unity blend of one affine piece per square on
/// `Q⁰`, and the `tail` polynomial outside.
#[derive(Clone, Debug)]
pub struct PatchedInterpolant<'a> {
    wd: &'a WhitneyDecomposition,
    pieces: Vec<AffinePolynomial>,
    tail: AffinePolynomial,
}

impl<'a> PatchedInterpolant<'a> {
    pub fn new(wd: &'a WhitneyDecomposition, pieces: Vec<AffinePolynomial>, tail: AffinePolynomial) -> Self {
        assert_eq!(pieces.len(), wd.len(), "one piece per square");
        Self { wd, pieces, tail }
    }

    pub fn decomposition(&self) -> &'a WhitneyDecomposition {
        self.wd
    }

    pub fn pieces(&self) -> &[AffinePolynomial] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &AffinePolynomial {
        &self.pieces[i]
    }

    pub fn tail(&self) -> &AffinePolynomial {
        &self.tail
    }

    /// Evaluates with a caller-supplied scratch buffer.
    pub fn jet_with(&self, x: Point, terms: &mut Vec<PouTerm>) -> Jet {
        let Some(home) = self.wd.pou_terms(x, terms) else {
            return self.tail.jet(x);
        };
        self.combine(home, terms, x)
    }

    /// `F̃` at `x ∈ Q_home` from precomputed partition-of-unity terms.
    pub fn combine(&self, home: usize, terms: &[PouTerm], x: Point) -> Jet {
        // F = P_ref + Σ θ_Q (P_Q − P_ref), so only piece differences are
        // differentiated twice.
        let pref = self.pieces[home];
        let mut out = pref.jet(x);
        for t in terms.iter() {
            if t.square == home {
                continue;
            }
            let d = self.pieces[t.square].sub(&pref);
            if d == AffinePolynomial::ZERO {
                continue;
            }
            let dv = d.eval(x);
            let dg = [d.b, d.c];
            let th = &t.theta;
            out.value += th.value * dv;
            for a in 0..2 {
                out.grad[a] += th.grad[a] * dv + th.value * dg[a];
                for b in 0..2 {
                    out.hess[a][b] += th.hess[a][b] * dv + th.grad[a] * dg[b] + dg[a] * th.grad[b];
                }
            }
        }
        out
    }

    /// Whether every square adjacent to `i` (itself included) carries the
    /// same piece, in which case `F̃` is that affine function on square `i`.
    pub fn is_locally_affine(&self, i: usize) -> bool {
        let p = self.pieces[i];
        self.wd.neighbors(i).all(|j| self.pieces[j] == p)
    }
}

impl Field for PatchedInterpolant<'_> {
    fn jet(&self, x: Point) -> Jet {
        let mut terms = Vec::new();
        self.jet_with(x, &mut terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_reproduction() {
        let a = AffinePolynomial::new(1.0, 2.0, -1.0);
        let p = [Point::new(0.3, 0.01), Point::new(0.2, 0.0), Point::new(0.4, 0.0)];
        let got = affine_through(p, [a.eval(p[0]), a.eval(p[1]), a.eval(p[2])]).unwrap();
        assert!((got.a - 1.0).abs() < 1e-12 && (got.b - 2.0).abs() < 1e-12 && (got.c + 1.0).abs() < 1e-10);
        let z = affine_through(p, [0.0; 3]).unwrap();
        assert_eq!(z, AffinePolynomial::ZERO);
    }

    #[test]
    fn unit_triangle() {
        let p = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert_eq!(affine_through(p, [0.0, 1.0, 0.0]).unwrap(), AffinePolynomial::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn colinear_rejected() {
        let p = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(matches!(affine_through(p, [0.0, 1.0, 2.0]), Err(InterpolantError::Colinear { .. })));
    }

    #[test]
    fn horizontal_cases() {
        let (z, w) = (Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(horizontal_affine(z, w, 5.0, 5.0).unwrap(), AffinePolynomial::new(5.0, 0.0, 0.0));
        assert_eq!(horizontal_affine(z, w, 0.0, 1.0).unwrap(), AffinePolynomial::new(0.0, 1.0, 0.0));
        assert!(horizontal_affine(z, z, 0.0, 1.0).is_err());
    }

    #[test]
    fn linf_is_corner_max() {
        let p = AffinePolynomial::new(0.3, -2.0, 1.5);
        let r = Rect::new(-1.0, 0.5, 0.25, 2.0);
        let mut dense = 0.0f64;
        for i in 0..=50 {
            for j in 0..=50 {
                let x = Point::new(r.x0 + (r.x1 - r.x0) * i as f64 / 50.0, r.y0 + (r.y1 - r.y0) * j as f64 / 50.0);
                dense = dense.max(p.eval(x).abs());
            }
        }
        assert!((p.linf_on(&r) - dense).abs() < 1e-12);
    }
}
