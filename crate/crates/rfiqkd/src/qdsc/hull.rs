use nalgebra::Vector2;

use super::{QdscError, ReducedData};

/// Counterclockwise convex-hull vertices of the reduced 2-D point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    points: Vec<Vector2<f64>>,
}

impl BoundarySet {
    /// Hull of an arbitrary 2-D point set (used for ingesting external
    /// data); at least 5 hull vertices required.
    pub fn from_points(points: &[Vector2<f64>]) -> Result<Self, QdscError> {
        let hull = monotone_chain(points);
        if hull.len() < 5 {
            return Err(QdscError::DegenerateHull { vertices: hull.len() });
        }
        Ok(Self { points: hull })
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }

    /// Angular span of the boundary around a center: 360 degrees minus the
    /// largest angular gap between consecutive vertices.
    pub fn angular_span_deg(&self, cx: f64, cy: f64) -> f64 {
        let mut angles: Vec<f64> = self
            .points
            .iter()
            .map(|p| (p.y - cy).atan2(p.x - cx))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = angles.len();
        let mut max_gap = std::f64::consts::TAU - angles[n - 1] + angles[0];
        for w in angles.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        (std::f64::consts::TAU - max_gap).to_degrees()
    }
}

fn cross(o: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Andrew monotone-chain hull over columns of the reduced data (first two
/// rows), collinear points dropped. Needs at least 5 hull vertices.
pub fn convex_hull_boundary(reduced: &ReducedData) -> Result<BoundarySet, QdscError> {
    let pts: Vec<Vector2<f64>> = (0..reduced.a_tilde.ncols())
        .map(|j| Vector2::new(reduced.a_tilde[(0, j)], reduced.a_tilde[(1, j)]))
        .collect();
    let hull = monotone_chain(&pts);
    if hull.len() < 5 {
        return Err(QdscError::DegenerateHull { vertices: hull.len() });
    }
    Ok(BoundarySet { points: hull })
}

pub(crate) fn monotone_chain(points: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut pts: Vec<Vector2<f64>> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| (a.x - b.x).abs() < 1e-15 && (a.y - b.y).abs() < 1e-15);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut lower: Vec<Vector2<f64>> = Vec::with_capacity(n);
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vector2<f64>> = Vec::with_capacity(n);
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
