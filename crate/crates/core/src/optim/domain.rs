use crate::error::{check_dim, Error, Result};

/// Feasible set for the iterate.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Unconstrained,
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Domain {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::InvalidParam(format!(
                "box bounds must satisfy lower < upper (coordinate {i}: {} vs {})",
                lower[i], upper[i]
            )));
        }
        Ok(Domain::Box { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo; dim], vec![hi; dim])
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self, Domain::Unconstrained)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        match self {
            Domain::Unconstrained => true,
            Domain::Box { lower, upper } => point
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(p, (lo, hi))| lo <= p && p <= hi),
        }
    }

    /// Projects in place.
    pub fn project_in_place(&self, point: &mut [f64]) -> Result<()> {
        if let Domain::Box { lower, upper } = self {
            check_dim(lower.len(), point.len())?;
            for ((p, lo), hi) in point.iter_mut().zip(lower).zip(upper) {
                *p = p.clamp(*lo, *hi);
            }
        }
        Ok(())
    }
}

/// Euclidean projection onto `domain`; element-wise clamping for boxes.
pub fn project(point: &[f64], domain: &Domain) -> Result<Vec<f64>> {
    let mut out = point.to_vec();
    domain.project_in_place(&mut out)?;
    Ok(out)
}
