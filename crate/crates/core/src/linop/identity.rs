use super::{LinearOperator, LinearOperatorHandle, OperatorKind};
use crate::field::Grid2D;

#[derive(Clone, Debug)]
pub struct Identity {
    grid: Grid2D,
}

impl LinearOperator for Identity {
    fn domain_grid(&self) -> &Grid2D {
        &self.grid
    }
    fn range_grid(&self) -> &Grid2D {
        &self.grid
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Identity
    }
    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(u);
    }
    fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        out.copy_from_slice(p);
    }
}

pub fn make_identity(grid: Grid2D) -> LinearOperatorHandle {
    LinearOperatorHandle::new(Identity { grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::linop::{adjoint_check, operator_norm};

    #[test]
    fn identity_maps_u_to_u() {
        let g = Grid2D::new(9, 7, 0.3, [0.0, 0.0]).unwrap();
        let u = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() + y * y).unwrap();
        let id = make_identity(g);
        assert_eq!(id.apply(&u).unwrap(), u);
        assert_eq!(adjoint_check(&id, 5, 3), 0.0);
        let n = operator_norm(&id, 1e-10, 100, 0);
        assert!((n.value - 1.0).abs() <= 1e-6);
    }
}
