use crate::error::{Error, Result};

use super::field::MetricField;
use super::point::MetricAt;

/// Anything that yields pointwise metric data in a fixed chart.
pub trait MetricSource: Sync {
    fn dim(&self) -> usize;
    fn at(&self, x: &[f64]) -> Result<MetricAt>;
}

impl MetricSource for MetricField {
    fn dim(&self) -> usize {
        MetricField::dim(self)
    }

    fn at(&self, x: &[f64]) -> Result<MetricAt> {
        MetricField::at(self, x)
    }
}

/// The metric induced on the coordinate hyperplane `{x_axis = t}`, in the
/// remaining coordinates in increasing order.
///
/// Evaluates the ambient metric and restricts its jets, so no expression is
/// rebuilt per slice.
pub struct CoordinateSlice<'a, S: MetricSource + ?Sized> {
    ambient: &'a S,
    axis: usize,
    t: f64,
    axes: Vec<usize>,
}

impl<'a, S: MetricSource + ?Sized> CoordinateSlice<'a, S> {
    pub fn new(ambient: &'a S, axis: usize, t: f64) -> Result<Self> {
        let n = ambient.dim();
        if axis >= n || n < 2 {
            return Err(Error::Dimension(format!("cannot slice a {n}-metric along axis {}", axis + 1)));
        }
        Ok(CoordinateSlice {
            ambient,
            axis,
            t,
            axes: (0..n).filter(|&a| a != axis).collect(),
        })
    }

    /// Ambient point of slice coordinates `y`.
    pub fn embed(&self, y: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(y.len() + 1);
        x.extend_from_slice(&y[..self.axis]);
        x.push(self.t);
        x.extend_from_slice(&y[self.axis..]);
        x
    }
}

impl<S: MetricSource + ?Sized> MetricSource for CoordinateSlice<'_, S> {
    fn dim(&self) -> usize {
        self.axes.len()
    }

    fn at(&self, y: &[f64]) -> Result<MetricAt> {
        self.ambient.at(&self.embed(y))?.restrict(&self.axes)
    }
}
