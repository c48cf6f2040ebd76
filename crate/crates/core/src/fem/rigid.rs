use super::sparse::{axpy, dot, CsrMatrix};
use super::tensor::Mat3;

/// Rigid displacement `x ↦ b + A x` with antisymmetric `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidDisplacement {
    pub b: [f64; 3],
    pub a: Mat3,
}

impl RigidDisplacement {
    /// Builds `A` from the rotation vector `w` (`A x = w × x`).
    pub fn new(b: [f64; 3], w: [f64; 3]) -> Self {
        let a = [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]];
        RigidDisplacement { b, a }
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.b[i] + (0..3).map(|j| self.a[i][j] * x[j]).sum::<f64>())
    }

    /// The six canonical generators: three translations, three rotations.
    pub fn generators() -> [RigidDisplacement; 6] {
        let e = |i: usize| std::array::from_fn(|k| if k == i { 1.0 } else { 0.0 });
        [
            Self::new(e(0), [0.0; 3]),
            Self::new(e(1), [0.0; 3]),
            Self::new(e(2), [0.0; 3]),
            Self::new([0.0; 3], e(0)),
            Self::new([0.0; 3], e(1)),
            Self::new([0.0; 3], e(2)),
        ]
    }
}

/// Basis of rigid fields orthonormal with respect to `mass`, built by
/// Gram–Schmidt (applied twice) from the interpolated generators.
pub fn mass_orthonormal_basis(generators: Vec<Vec<f64>>, mass: &CsrMatrix) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in generators {
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &mass.matvec(&v));
                axpy(-c, q, &mut v);
            }
        }
        let nv = dot(&v, &mass.matvec(&v)).sqrt();
        if nv > 1e-12 {
            v.iter_mut().for_each(|t| *t /= nv);
            basis.push(v);
        }
    }
    basis
}

/// Removes the mass-orthogonal projection onto `basis`.
pub fn project_out(basis: &[Vec<f64>], mass: &CsrMatrix, x: &mut [f64]) {
    let mx = mass.matvec(x);
    let coeffs: Vec<f64> = basis.iter().map(|q| dot(q, &mx)).collect();
    for (q, c) in basis.iter().zip(coeffs) {
        axpy(-c, q, x);
    }
}
