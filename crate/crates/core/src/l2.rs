// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact L2 distances between step functions and cosine-series solutions.
//!
//! Every solution is split into pieces carrying a constant part plus an
//! optional zero-mean cosine series. The oscillatory energy is taken from
//! Parseval once per block, so only integrals over overlaps are needed.

use crate::solvers::{PiecewiseSolution, SpectralBlock};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Osc<'a> {
    origin: f64,
    len: f64,
    /// Coefficients of modes `1..`.
    coeffs: &'a [f64],
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct L2Piece<'a> {
    lo: f64,
    hi: f64,
    constant: f64,
    osc: Option<Osc<'a>>,
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// `int_u^v cos(w x + phase) dx`.
fn cos_integral(w: f64, phase: f64, u: f64, v: f64) -> f64 {
    let h = v - u;
    h * (w * 0.5 * (u + v) + phase).cos() * sinc(0.5 * w * h)
}

impl Osc<'_> {
    fn scale(&self) -> f64 {
        (2.0 / self.len).sqrt()
    }

    fn frequency(&self, s: usize) -> f64 {
        s as f64 * std::f64::consts::PI / self.len
    }

    fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    fn integral(&self, u: f64, v: f64) -> f64 {
        let (y0, y1) = (u - self.origin, v - self.origin);
        self.scale()
            * self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * cos_integral(self.frequency(i + 1), 0.0, y0, y1))
                .sum::<f64>()
    }

    fn covers(&self, u: f64, v: f64) -> bool {
        u == self.origin && v == self.origin + self.len
    }

    fn cross(&self, other: &Osc<'_>, u: f64, v: f64) -> f64 {
        if self.origin == other.origin && self.len == other.len && self.covers(u, v) {
            return self.coeffs.iter().zip(other.coeffs).map(|(a, b)| a * b).sum();
        }
        let mut acc = 0.0;
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            let wa = self.frequency(i + 1);
            for (j, b) in other.coeffs.iter().enumerate() {
                if *b == 0.0 {
                    continue;
                }
                let wb = other.frequency(j + 1);
                let diff = cos_integral(wa - wb, -wa * self.origin + wb * other.origin, u, v);
                let sum = cos_integral(wa + wb, -wa * self.origin - wb * other.origin, u, v);
                acc += a * b * 0.5 * (diff + sum);
            }
        }
        acc * self.scale() * other.scale()
    }
}

fn block_piece(b: &SpectralBlock) -> L2Piece<'_> {
    let len = b.length();
    L2Piece {
        lo: b.lo,
        hi: b.hi,
        constant: b.coefficients[0] / len.sqrt(),
        osc: (b.coefficients.len() > 1).then(|| Osc {
            origin: b.lo,
            len,
            coeffs: &b.coefficients[1..],
        }),
    }
}

pub(crate) fn pieces_of(sol: &PiecewiseSolution) -> Vec<L2Piece<'_>> {
    match sol {
        PiecewiseSolution::Discrete(d) => {
            let signal = d.values();
            let grid = signal.grid();
            let v = signal.values();
            let mut out: Vec<L2Piece<'_>> = Vec::new();
            for (k, &value) in v.iter().enumerate() {
                let (lo, hi) = grid.cell(k);
                match out.last_mut() {
                    Some(last) if last.constant == value => last.hi = hi,
                    _ => out.push(L2Piece {
                        lo,
                        hi,
                        constant: value,
                        osc: None,
                    }),
                }
            }
            out
        }
        PiecewiseSolution::Continuous(c) => c.blocks.iter().map(block_piece).collect(),
    }
}

/// Squared L2 distance between two piece lists covering `[0, 1]`.
pub(crate) fn distance_sq(a: &[L2Piece<'_>], b: &[L2Piece<'_>]) -> f64 {
    let mut acc: f64 = a
        .iter()
        .chain(b)
        .filter_map(|p| p.osc.as_ref().map(Osc::energy))
        .sum();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (pa, pb) = (&a[i], &b[j]);
        let u = pa.lo.max(pb.lo);
        let v = pa.hi.min(pb.hi);
        if v > u {
            let dc = pa.constant - pb.constant;
            let ia = pa.osc.map_or(0.0, |o| o.integral(u, v));
            let ib = pb.osc.map_or(0.0, |o| o.integral(u, v));
            acc += dc * dc * (v - u) + 2.0 * dc * (ia - ib);
            if let (Some(oa), Some(ob)) = (pa.osc, pb.osc) {
                acc -= 2.0 * oa.cross(&ob, u, v);
            }
        }
        if pa.hi <= pb.hi {
            i += 1;
        } else {
            j += 1;
        }
    }
    acc.max(0.0)
}
