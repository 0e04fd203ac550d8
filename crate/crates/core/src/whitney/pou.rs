//! C² partition of unity `θ_Q = ψ_Q / Σ ψ_{Q′}` subordinate to `{1.1Q}`.
//!
//! `ψ_Q(x) = g((x₁ − c₁)/δ_Q)·g((x₂ − c₂)/δ_Q)` where `g` is even, equal to
//! 1 on `[0, 0.5]`, 0 on `[0.55, ∞)`, and a quintic smoothstep in between.
//! `ψ_Q ≡ 1` on the closed square, so the denominator is at least 1 on `Q⁰`.

use alloc::vec::Vec;

use super::WhitneyDecomposition;
use crate::geometry::Point;
use crate::interpolant::Jet;

/// Inner edge of the transition band, in units of `δ_Q`.
pub const BAND_INNER: f64 = 0.5;
/// Outer edge of the transition band; `supp ψ_Q ⊂ 1.1Q`.
pub const BAND_OUTER: f64 = 0.55;

/// Profile `g` and its first two derivatives at `t`.
pub fn profile(t: f64) -> (f64, f64, f64) {
    let a = t.abs();
    if a <= BAND_INNER {
        return (1.0, 0.0, 0.0);
    }
    if a >= BAND_OUTER {
        return (0.0, 0.0, 0.0);
    }
    let w = BAND_OUTER - BAND_INNER;
    let s = (a - BAND_INNER) / w;
    let smooth = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    let d1 = 30.0 * s * s * (1.0 - s) * (1.0 - s);
    let d2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    (1.0 - smooth, -sign * d1 / w, -d2 / (w * w))
}

/// `θ_Q` (value and derivatives) for one square active at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PouTerm {
    pub square: usize,
    pub theta: Jet,
}

impl WhitneyDecomposition {
    /// `ψ_Q` jet at `x` for square `i`.
    pub fn psi_jet(&self, i: usize, x: Point) -> Jet {
        let sq = &self.squares[i].square;
        let c = sq.center();
        let d = sq.side();
        let (g1, d1, dd1) = profile((x.x - c.x) / d);
        let (g2, d2, dd2) = profile((x.y - c.y) / d);
        Jet {
            value: g1 * g2,
            grad: [d1 * g2 / d, g1 * d2 / d],
            hess: [[dd1 * g2 / (d * d), d1 * d2 / (d * d)], [d1 * d2 / (d * d), g1 * dd2 / (d * d)]],
        }
    }

    /// All squares whose `θ_Q` is not locally zero at `x`, with their jets.
    /// Returns the square containing `x`, or `None` (and leaves `out` empty)
    /// when `x ∉ Q⁰`.
    pub fn pou_terms(&self, x: Point, out: &mut Vec<PouTerm>) -> Option<usize> {
        out.clear();
        let home = self.locate(x)?;
        self.collect_terms(self.neighbors(home), x, out);
        Some(home)
    }

    /// As [`pou_terms`](Self::pou_terms) with the candidate squares given;
    /// `candidates` must include every square whose `ψ` is nonzero at `x`.
    pub fn pou_terms_among(&self, candidates: &[usize], x: Point, out: &mut Vec<PouTerm>) {
        out.clear();
        self.collect_terms(candidates.iter().copied(), x, out);
    }

    fn collect_terms(&self, candidates: impl Iterator<Item = usize>, x: Point, out: &mut Vec<PouTerm>) {
        let mut sum = Jet::ZERO;
        for j in candidates {
            let psi = self.psi_jet(j, x);
            if psi.is_zero() {
                continue;
            }
            sum = sum.add(&psi);
            out.push(PouTerm { square: j, theta: psi });
        }
        // θ = ψ·r with r = 1/S.
        let s = sum.value;
        let r = 1.0 / s;
        let gr = [-sum.grad[0] * r * r, -sum.grad[1] * r * r];
        let mut hr = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                hr[a][b] = -sum.hess[a][b] * r * r + 2.0 * sum.grad[a] * sum.grad[b] * r * r * r;
            }
        }
        for t in out.iter_mut() {
            let p = t.theta;
            let mut h = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    h[a][b] = p.hess[a][b] * r + p.grad[a] * gr[b] + gr[a] * p.grad[b] + p.value * hr[a][b];
                }
            }
            t.theta = Jet { value: p.value * r, grad: [p.grad[0] * r + p.value * gr[0], p.grad[1] * r + p.value * gr[1]], hess: h };
        }
    }

    /// `θ_Q` jet at `x` for square `i`; `None` when `x ∉ Q⁰`.
    pub fn pou_eval(&self, i: usize, x: Point) -> Option<Jet> {
        let mut terms = Vec::new();
        self.pou_terms(x, &mut terms)?;
        Some(terms.iter().find(|t| t.square == i).map_or(Jet::ZERO, |t| t.theta))
    }

    /// Coordinates where some `ψ_{Q′}` active on square `i` changes formula,
    /// clipped to the square and sorted, ends included.
    pub fn breakpoints(&self, i: usize) -> ([Vec<f64>; 2], usize) {
        let r = self.squares[i].square.rect();
        let mut xs = alloc::vec![r.x0, r.x1];
        let mut ys = alloc::vec![r.y0, r.y1];
        for j in self.neighbors(i) {
            let sq = &self.squares[j].square;
            let c = sq.center();
            let d = sq.side();
            for f in [-BAND_OUTER, -BAND_INNER, BAND_INNER, BAND_OUTER] {
                let bx = c.x + f * d;
                let by = c.y + f * d;
                if bx > r.x0 && bx < r.x1 {
                    xs.push(bx);
                }
                if by > r.y0 && by < r.y1 {
                    ys.push(by);
                }
            }
        }
        for v in [&mut xs, &mut ys] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        let cells = (xs.len() - 1) * (ys.len() - 1);
        ([xs, ys], cells)
    }
}
