//! Upper convex hull of planar point sets (Andrew's monotone chain).
//!
//! The upper hull of a cloud of achievable `(P_I, P_S)` pairs is exactly the
//! set of strategies reachable by probabilistic mixing, so this is the
//! numerical counterpart of every closed-form "best mixture" statement.

/// Upper hull, vertices sorted by increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperHull {
    vertices: Vec<(f64, f64)>,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

impl UpperHull {
    /// Builds the upper hull. Non-finite points are ignored. Collinear
    /// points (relative turn below 1e-14) are dropped.
    pub fn new(points: &[(f64, f64)]) -> Self {
        let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.total_cmp(&p.1)));
        // keep the highest point per abscissa
        pts.dedup_by(|later, earlier| later.0 == earlier.0);

        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(64);
        for p in pts {
            while let [.., o, a] = hull[..] {
                let len = ((a.0 - o.0).hypot(a.1 - o.1)) * ((p.0 - o.0).hypot(p.1 - o.1));
                if cross(o, a, p) >= -1e-14 * len {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        Self { vertices: hull }
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Piecewise-linear hull value at `x`; `None` outside the hull's span.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let v = &self.vertices;
        let (first, last) = (v.first()?, v.last()?);
        if x < first.0 || x > last.0 {
            return None;
        }
        let idx = v.partition_point(|p| p.0 < x);
        if idx == 0 {
            return Some(first.1);
        }
        let (a, b) = (v[idx - 1], v[idx]);
        if b.0 == x {
            return Some(b.1);
        }
        let t = (x - a.0) / (b.0 - a.0);
        Some(a.1 + t * (b.1 - a.1))
    }
}
