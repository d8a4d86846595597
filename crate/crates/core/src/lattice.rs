//! Lattice families: beam directions, neighbour stencils and translation vectors.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FreqIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeFamily {
    Triangular,
    Rectangular,
}

impl std::str::FromStr for LatticeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" => Ok(LatticeFamily::Triangular),
            "rectangular" => Ok(LatticeFamily::Rectangular),
            other => Err(Error::invalid(
                "lattice",
                format!("expected `triangular` or `rectangular`, got `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for LatticeFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LatticeFamily::Triangular => "triangular",
            LatticeFamily::Rectangular => "rectangular",
        })
    }
}

/// One beam per periodic cell: it joins node `(i, j)` to `(i + shift.0, j + shift.1)`
/// and points along `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamFamily {
    pub direction: Vector2<f64>,
    pub shift: (i64, i64),
}

impl BeamFamily {
    /// Counter-clockwise rotation of the direction by a quarter turn.
    pub fn normal(&self) -> Vector2<f64> {
        perp(&self.direction)
    }

    /// Phase multiplier of this beam at `mode`: `shift . (i', j')`.
    pub fn phase(&self, mode: FreqIndex) -> f64 {
        (self.shift.0 * mode.ip + self.shift.1 * mode.jp) as f64
    }
}

pub fn perp(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub family: LatticeFamily,
    pub beams: Vec<BeamFamily>,
    pub t_x: Vector2<f64>,
    pub t_y: Vector2<f64>,
    pub rho_star: f64,
}

impl LatticeSpec {
    /// Triangular lattice: beams `l1 = [1/2, -sqrt3/2]`, `l2 = [1, 0]`, `l3 = [1/2, sqrt3/2]`
    /// with stencils `(1,0)`, `(1,1)`, `(0,1)`; translations `t_x = l1`, `t_y = l3`.
    pub fn triangular(rho_star: f64) -> Result<Self> {
        let h = 3f64.sqrt() / 2.0;
        let l1 = Vector2::new(0.5, -h);
        let l2 = Vector2::new(1.0, 0.0);
        let l3 = Vector2::new(0.5, h);
        Self::new(
            LatticeFamily::Triangular,
            vec![
                BeamFamily { direction: l1, shift: (1, 0) },
                BeamFamily { direction: l2, shift: (1, 1) },
                BeamFamily { direction: l3, shift: (0, 1) },
            ],
            l1,
            l3,
            rho_star,
        )
    }

    /// Rectangular lattice aligned with the Cartesian axes.
    pub fn rectangular(rho_star: f64) -> Result<Self> {
        let ex = Vector2::new(1.0, 0.0);
        let ey = Vector2::new(0.0, 1.0);
        Self::new(
            LatticeFamily::Rectangular,
            vec![
                BeamFamily { direction: ex, shift: (1, 0) },
                BeamFamily { direction: ey, shift: (0, 1) },
            ],
            ex,
            ey,
            rho_star,
        )
    }

    pub fn of_family(family: LatticeFamily, rho_star: f64) -> Result<Self> {
        match family {
            LatticeFamily::Triangular => Self::triangular(rho_star),
            LatticeFamily::Rectangular => Self::rectangular(rho_star),
        }
    }

    pub fn new(
        family: LatticeFamily,
        beams: Vec<BeamFamily>,
        t_x: Vector2<f64>,
        t_y: Vector2<f64>,
        rho_star: f64,
    ) -> Result<Self> {
        if !(rho_star.is_finite() && rho_star > 0.0) {
            return Err(Error::invalid("rho_star", format!("must be positive, got {rho_star}")));
        }
        let unit = |v: &Vector2<f64>| (v.norm() - 1.0).abs() < 1e-12;
        if !beams.iter().all(|b| unit(&b.direction)) || !unit(&t_x) || !unit(&t_y) {
            return Err(Error::invalid("directions", "beam and translation vectors must be unit"));
        }
        for (a, ba) in beams.iter().enumerate() {
            for bb in &beams[a + 1..] {
                let cross = ba.direction.x * bb.direction.y - ba.direction.y * bb.direction.x;
                if cross.abs() < 1e-12 {
                    return Err(Error::invalid("directions", "beam directions must be pairwise non-parallel"));
                }
            }
        }
        Ok(LatticeSpec {
            family,
            beams,
            t_x,
            t_y,
            rho_star,
        })
    }

    pub fn with_rho_star(&self, rho_star: f64) -> Result<Self> {
        Self::new(self.family, self.beams.clone(), self.t_x, self.t_y, rho_star)
    }

    /// Continuum rotation block, 12 per beam.
    pub fn rotation_stiffness(&self) -> f64 {
        12.0 * self.beams.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_geometry() {
        let t = LatticeSpec::triangular(1.0).unwrap();
        assert_eq!(t.beams.len(), 3);
        // l2 = t_x + t_y
        assert!((t.t_x + t.t_y - t.beams[1].direction).norm() < 1e-15);
        assert_eq!(t.rotation_stiffness(), 36.0);
        let m = FreqIndex::new(2, -5);
        let phases: Vec<f64> = t.beams.iter().map(|b| b.phase(m)).collect();
        assert_eq!(phases, vec![2.0, -3.0, -5.0]);
    }

    #[test]
    fn perp_is_counter_clockwise() {
        let p = perp(&Vector2::new(1.0, 0.0));
        assert_eq!(p, Vector2::new(0.0, 1.0));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(LatticeSpec::triangular(0.0).is_err());
        assert!(LatticeSpec::rectangular(-1.0).is_err());
        let ex = Vector2::new(1.0, 0.0);
        let parallel = vec![
            BeamFamily { direction: ex, shift: (1, 0) },
            BeamFamily { direction: -ex, shift: (0, 1) },
        ];
        assert!(LatticeSpec::new(LatticeFamily::Rectangular, parallel, ex, ex, 1.0).is_err());
        assert!("hexagonal".parse::<LatticeFamily>().is_err());
    }
}
