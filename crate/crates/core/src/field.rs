//! Nodal field pairs: a 2-vector (displacement or force) and a scalar (rotation or torque).

use ndarray::{Array2, Array3, Axis};

use crate::error::{Error, Result};
use crate::fourier::{dft, idft, Domain, GridFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub u: GridFunction,
    pub theta: GridFunction,
}

impl FieldGrid {
    pub fn new(u: GridFunction, theta: GridFunction) -> Result<Self> {
        if u.dim() != 2 || theta.dim() != 1 {
            return Err(Error::invalid("field", "vector part needs dim 2 and scalar part dim 1"));
        }
        if u.n() != theta.n() || u.domain() != theta.domain() {
            return Err(Error::SizeMismatch {
                left: format!("u: n = {}, {:?}", u.n(), u.domain()),
                right: format!("theta: n = {}, {:?}", theta.n(), theta.domain()),
            });
        }
        Ok(FieldGrid { u, theta })
    }

    pub fn zeros(n: usize, domain: Domain) -> Result<Self> {
        Self::new(GridFunction::zeros(n, 2, domain)?, GridFunction::zeros(n, 1, domain)?)
    }

    pub fn from_real(u: &Array3<f64>, theta: &Array2<f64>) -> Result<Self> {
        Self::new(GridFunction::from_real(u)?, GridFunction::from_real_scalar(theta)?)
    }

    pub fn n(&self) -> usize {
        self.u.n()
    }

    pub fn domain(&self) -> Domain {
        self.u.domain()
    }

    pub fn to_frequency(&self) -> Result<Self> {
        Self::new(dft(&self.u)?, dft(&self.theta)?)
    }

    pub fn to_spatial(&self) -> Result<Self> {
        Self::new(idft(&self.u)?, idft(&self.theta)?)
    }

    /// Real parts of a spatial field pair, checking the imaginary residue.
    pub fn to_real(&self, tol: f64) -> Result<(Array3<f64>, Array2<f64>)> {
        let u = self.u.to_real(tol)?;
        let theta = self.theta.to_real(tol)?.index_axis_move(Axis(2), 0);
        Ok((u, theta))
    }
}
