//! Point-in-polygon tests for closed polylines, bucketed by rows so that
//! repeated queries against long boundaries stay cheap.

use crate::C64;

#[derive(Clone, Debug)]
pub struct PolygonIndex {
    pts: Vec<C64>,
    ymin: f64,
    dy: f64,
    rows: Vec<Vec<u32>>,
    bbox: (f64, f64, f64, f64),
}

impl PolygonIndex {
    /// `pts` is a closed loop; the closing edge is implied.
    pub fn new(pts: Vec<C64>) -> Self {
        let n = pts.len();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        let nrows = ((n as f64).sqrt() as usize).clamp(1, 256);
        let dy = ((y1 - y0) / nrows as f64).max(f64::MIN_POSITIVE);
        let mut rows = vec![Vec::new(); nrows];
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let lo = ((a.im.min(b.im) - y0) / dy).floor().max(0.0) as usize;
            let hi = (((a.im.max(b.im) - y0) / dy).floor() as usize).min(nrows - 1);
            for row in rows.iter_mut().take(hi + 1).skip(lo) {
                row.push(i as u32);
            }
        }
        PolygonIndex { pts, ymin: y0, dy, rows, bbox: (x0, x1, y0, y1) }
    }

    pub fn points(&self) -> &[C64] {
        &self.pts
    }

    /// Even-odd containment.
    pub fn contains(&self, p: C64) -> bool {
        let (x0, x1, y0, y1) = self.bbox;
        if !(p.re >= x0 && p.re <= x1 && p.im >= y0 && p.im <= y1) {
            return false;
        }
        let row = (((p.im - self.ymin) / self.dy).floor() as usize).min(self.rows.len() - 1);
        let n = self.pts.len();
        let mut inside = false;
        for &i in &self.rows[row] {
            let a = self.pts[i as usize];
            let b = self.pts[(i as usize + 1) % n];
            if (a.im > p.im) != (b.im > p.im) {
                let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
                if p.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Signed area (positive for counter-clockwise loops).
    pub fn signed_area(&self) -> f64 {
        let n = self.pts.len();
        (0..n)
            .map(|i| {
                let a = self.pts[i];
                let b = self.pts[(i + 1) % n];
                a.re * b.im - b.re * a.im
            })
            .sum::<f64>()
            * 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_hole_free_queries() {
        let sq = PolygonIndex::new(vec![
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(2.0, 2.0),
            C64::new(0.0, 2.0),
        ]);
        assert!(sq.contains(C64::new(1.0, 1.0)));
        assert!(!sq.contains(C64::new(3.0, 1.0)));
        assert!(!sq.contains(C64::new(1.0, -0.5)));
        assert!((sq.signed_area() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn dense_circle_matches_radius_test() {
        let pts: Vec<C64> = (0..5000)
            .map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 5000.0))
            .collect();
        let poly = PolygonIndex::new(pts);
        for k in 0..400 {
            let p = C64::from_polar(0.5 + k as f64 * 0.0025 + 1e-4, k as f64 * 0.77);
            assert_eq!(poly.contains(p), p.norm() < 1.0, "{p}");
        }
    }
}
