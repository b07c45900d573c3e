//! Level sets of gridded surfaces and their intersections.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::Polyline;
use crate::math::sqrt;

/// Values on a rectangular grid, `z[i * ny + j]` at `(x[i], y[j])`.
#[derive(Debug, Clone, Copy)]
pub struct GridView<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub z: &'a [f64],
}

impl GridView<'_> {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.y.len() + j]
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, px: f64, py: f64) -> Option<f64> {
        let cell = |a: &[f64], v: f64| -> Option<(usize, f64)> {
            if a.len() < 2 || v < a[0] || v > a[a.len() - 1] {
                return None;
            }
            let k = a.windows(2).position(|w| v <= w[1]).unwrap_or(a.len() - 2);
            Some((k, (v - a[k]) / (a[k + 1] - a[k])))
        };
        let (i, s) = cell(self.x, px)?;
        let (j, t) = cell(self.y, py)?;
        Some(
            (1.0 - s) * (1.0 - t) * self.at(i, j)
                + s * (1.0 - t) * self.at(i + 1, j)
                + (1.0 - s) * t * self.at(i, j + 1)
                + s * t * self.at(i + 1, j + 1),
        )
    }
}

/// Edge identifiers: `(i, j, 0)` joins (i,j)–(i+1,j), `(i, j, 1)` joins (i,j)–(i,j+1).
type EdgeId = (usize, usize, u8);

/// Marching squares for `z = level`, chained into polylines.
pub fn contour_lines(g: &GridView<'_>, level: f64) -> Vec<Polyline> {
    let (nx, ny) = (g.x.len(), g.y.len());
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let f = |i: usize, j: usize| g.at(i, j) - level;
    let point = |e: EdgeId| -> (f64, f64) {
        let (i, j, d) = e;
        let (i2, j2) = if d == 0 { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (f(i, j), f(i2, j2));
        let t = if a == b { 0.5 } else { a / (a - b) };
        (
            g.x[i] + t * (g.x[i2] - g.x[i]),
            g.y[j] + t * (g.y[j2] - g.y[j]),
        )
    };
    let crosses = |a: f64, b: f64| (a < 0.0) != (b < 0.0);

    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let c = [f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)];
            // edges in cyclic order: bottom, right, top, left
            let edges: [(EdgeId, f64, f64); 4] = [
                ((i, j, 0), c[0], c[1]),
                ((i + 1, j, 1), c[1], c[2]),
                ((i, j + 1, 0), c[3], c[2]),
                ((i, j, 1), c[0], c[3]),
            ];
            let hit: Vec<EdgeId> = edges
                .iter()
                .filter(|(_, a, b)| crosses(*a, *b))
                .map(|e| e.0)
                .collect();
            match hit.len() {
                2 => segments.push((hit[0], hit[1])),
                4 => {
                    let centre = 0.25 * (c[0] + c[1] + c[2] + c[3]);
                    if (centre < 0.0) == (c[0] < 0.0) {
                        segments.push((hit[0], hit[1]));
                        segments.push((hit[2], hit[3]));
                    } else {
                        segments.push((hit[0], hit[3]));
                        segments.push((hit[1], hit[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let mut adj: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adj.entry(*a).or_default().push(k);
        adj.entry(*b).or_default().push(k);
    }
    let mut used = alloc::vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start: EdgeId, first: usize, used: &mut Vec<bool>| -> Vec<EdgeId> {
        let mut chain = alloc::vec![start];
        let (mut cur, mut seg) = (start, first);
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == cur { b } else { a };
            chain.push(next);
            cur = next;
            match adj[&cur].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        chain
    };
    // open lines start at boundary edges (one incident segment)
    for (&e, segs) in &adj {
        if segs.len() == 1 && !used[segs[0]] {
            let chain = walk(e, segs[0], &mut used);
            lines.push(chain.into_iter().map(point).collect());
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            let chain = walk(segments[k].0, k, &mut used);
            lines.push(chain.into_iter().map(point).collect());
        }
    }
    lines
}

/// All crossings of two sets of polylines; coordinates are scaled by
/// `(sx, sy)` for the parallelism test.
pub fn intersections(a: &[Polyline], b: &[Polyline], sx: f64, sy: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for la in a {
        for sa in la.windows(2) {
            for lb in b {
                for sb in lb.windows(2) {
                    if let Some(p) = segment_intersection(sa[0], sa[1], sb[0], sb[1], sx, sy) {
                        if !out.iter().any(|q: &(f64, f64)| {
                            {
                            let (dx, dy) = ((q.0 - p.0) / sx, (q.1 - p.1) / sy);
                            sqrt(dx * dx + dy * dy) < 1e-9
                        }
                        }) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

fn segment_intersection(
    p1: (f64, f64),
    p2: (f64, f64),
    q1: (f64, f64),
    q2: (f64, f64),
    sx: f64,
    sy: f64,
) -> Option<(f64, f64)> {
    let s = |p: (f64, f64)| (p.0 / sx, p.1 / sy);
    let (a, b, c, d) = (s(p1), s(p2), s(q1), s(q2));
    let r = (b.0 - a.0, b.1 - a.1);
    let q = (d.0 - c.0, d.1 - c.1);
    let den = r.0 * q.1 - r.1 * q.0;
    if crate::math::abs(den) < 1e-300 {
        return None;
    }
    let w = (c.0 - a.0, c.1 - a.1);
    let t = (w.0 * q.1 - w.1 * q.0) / den;
    let u = (w.0 * r.1 - w.1 * r.0) / den;
    let eps = 1e-12;
    if t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps {
        return None;
    }
    Some((p1.0 + t * (p2.0 - p1.0), p1.1 + t * (p2.1 - p1.1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn straight_level_sets_cross_at_the_right_point() {
        let x = grid(11);
        let y = grid(11);
        let mut za = Vec::new();
        let mut zb = Vec::new();
        for &xi in &x {
            for &yj in &y {
                za.push(xi + yj);
                zb.push(xi - yj);
            }
        }
        let ga = GridView { x: &x, y: &y, z: &za };
        let gb = GridView { x: &x, y: &y, z: &zb };
        let la = contour_lines(&ga, 1.03);
        let lb = contour_lines(&gb, 0.11);
        assert_eq!(la.len(), 1);
        assert_eq!(lb.len(), 1);
        let hits = intersections(&la, &lb, 1.0, 1.0);
        assert_eq!(hits.len(), 1);
        assert!((hits[0].0 - 0.57).abs() < 1e-12);
        assert!((hits[0].1 - 0.46).abs() < 1e-12);
        assert!((ga.interpolate(0.3, 0.45).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn closed_contour_of_a_bowl() {
        let x = grid(21);
        let y = grid(21);
        let mut z = Vec::new();
        for &xi in &x {
            for &yj in &y {
                z.push((xi - 0.5).powi(2) + (yj - 0.5).powi(2));
            }
        }
        let g = GridView { x: &x, y: &y, z: &z };
        let lines = contour_lines(&g, 0.09);
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert_eq!(l.first(), l.last());
        for p in l {
            let r = ((p.0 - 0.5).powi(2) + (p.1 - 0.5).powi(2)).sqrt();
            assert!((r - 0.3).abs() < 0.01);
        }
    }

    #[test]
    fn level_outside_range_has_no_contour() {
        let x = grid(3);
        let z = [0.0; 9];
        let g = GridView { x: &x, y: &x, z: &z };
        assert!(contour_lines(&g, 1.0).is_empty());
    }
}
