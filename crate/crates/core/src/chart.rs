//! Coordinate charts on the Riemann sphere.
//!
//! Points carry a chart tag: `Finite` uses `z`, `Infinity` uses `xi = 1/z`.
//! [`MobiusChart`] is the auxiliary coordinate `w = 1/(z - p)` used to give
//! the complement of a petal around `p` a bounded planar picture.

use serde::{Deserialize, Serialize};

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    Finite,
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coord: C64,
}

impl ChartPoint {
    pub fn finite(z: C64) -> Self {
        ChartPoint {
            chart: Chart::Finite,
            coord: z,
        }
    }

    pub fn infinity(xi: C64) -> Self {
        ChartPoint {
            chart: Chart::Infinity,
            coord: xi,
        }
    }

    /// Finite-plane coordinate (infinite at `xi = 0`).
    pub fn to_z(&self) -> C64 {
        match self.chart {
            Chart::Finite => self.coord,
            Chart::Infinity => self.coord.inv(),
        }
    }

    /// Coordinate of the same point expressed in `chart`.
    pub fn coord_in(&self, chart: Chart) -> C64 {
        if chart == self.chart {
            self.coord
        } else {
            self.coord.inv()
        }
    }

    /// Re-tags the point so that it sits well inside its chart, with
    /// hysteresis between the two switch radii.
    pub fn normalized(&self, switch_radius: f64) -> Self {
        match self.chart {
            Chart::Finite if self.coord.norm() > switch_radius => {
                ChartPoint::infinity(self.coord.inv())
            }
            Chart::Infinity if self.coord.norm() > 2.0 / switch_radius => {
                ChartPoint::finite(self.coord.inv())
            }
            _ => *self,
        }
    }

    /// Picks whichever chart represents both points without blow-up.
    pub fn common_chart(a: &ChartPoint, b: &ChartPoint) -> Chart {
        if a.chart == b.chart {
            return a.chart;
        }
        let za = a.to_z().norm();
        let zb = b.to_z().norm();
        if za.max(zb) > 1.0 {
            Chart::Infinity
        } else {
            Chart::Finite
        }
    }
}

/// The chart `w = 1/(z - center)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusChart {
    pub center: C64,
}

impl MobiusChart {
    pub fn new(center: C64) -> Self {
        MobiusChart { center }
    }

    pub fn to_w(&self, p: &ChartPoint) -> C64 {
        match p.chart {
            Chart::Finite => (p.coord - self.center).inv(),
            Chart::Infinity => p.coord / (C64::new(1.0, 0.0) - self.center * p.coord),
        }
    }

    pub fn from_w(&self, w: C64) -> ChartPoint {
        let xi = w / (C64::new(1.0, 0.0) + self.center * w);
        if xi.norm() < 0.25 {
            ChartPoint::infinity(xi)
        } else {
            ChartPoint::finite(self.center + w.inv())
        }
    }

    pub fn z_from_w(&self, w: C64) -> C64 {
        self.center + w.inv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_round_trip_through_infinity() {
        let chart = MobiusChart::new(C64::new(0.5, -0.25));
        for p in [
            ChartPoint::finite(C64::new(3.0, 1.0)),
            ChartPoint::infinity(C64::new(0.0, 0.0)),
            ChartPoint::infinity(C64::new(0.01, -0.02)),
        ] {
            let w = chart.to_w(&p);
            let back = chart.from_w(w);
            let a = p.coord_in(Chart::Infinity);
            let b = back.coord_in(Chart::Infinity);
            assert!((a - b).norm() < 1e-14, "{p:?} -> {back:?}");
        }
    }

    #[test]
    fn normalization_has_hysteresis() {
        let p = ChartPoint::finite(C64::new(7.0, 0.0)).normalized(5.0);
        assert_eq!(p.chart, Chart::Infinity);
        // |z| = 3 is inside the switch radius but outside the return radius.
        let q = ChartPoint::infinity(C64::new(1.0 / 3.0, 0.0)).normalized(5.0);
        assert_eq!(q.chart, Chart::Infinity);
        let r = ChartPoint::infinity(C64::new(0.5, 0.0)).normalized(5.0);
        assert_eq!(r.chart, Chart::Finite);
    }
}
