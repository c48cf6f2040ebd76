//! Bogner–Fox–Schmit bicubic Hermite and bilinear rectangle elements.

/// Four-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss4() -> [(f64, f64); 4] {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30.0f64.sqrt()) / 36.0;
    let wb = (18.0 - 30.0f64.sqrt()) / 36.0;
    [(0.5 - 0.5 * b, 0.5 * wb), (0.5 - 0.5 * a, 0.5 * wa), (0.5 + 0.5 * a, 0.5 * wa), (0.5 + 0.5 * b, 0.5 * wb)]
}

/// Tensor 4×4 Gauss points on the unit square as `(ξ, weight)`.
pub fn gauss4x4() -> Vec<([f64; 2], f64)> {
    let g = gauss4();
    let mut out = Vec::with_capacity(16);
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            out.push(([s, t], ws * wt));
        }
    }
    out
}

/// Cubic Hermite functions on `[0, 1]` scaled for an interval of length
/// `len`: value/slope at the left end, value/slope at the right end.
/// Returns `[φ, φ', φ'']` with derivatives in physical units.
fn hermite_1d(s: f64, len: f64) -> [[f64; 3]; 4] {
    let (s2, s3) = (s * s, s * s * s);
    [
        [1.0 - 3.0 * s2 + 2.0 * s3, (-6.0 * s + 6.0 * s2) / len, (-6.0 + 12.0 * s) / (len * len)],
        [len * (s - 2.0 * s2 + s3), 1.0 - 4.0 * s + 3.0 * s2, (-4.0 + 6.0 * s) / len],
        [3.0 * s2 - 2.0 * s3, (6.0 * s - 6.0 * s2) / len, (6.0 - 12.0 * s) / (len * len)],
        [len * (-s2 + s3), -2.0 * s + 3.0 * s2, (-2.0 + 6.0 * s) / len],
    ]
}

/// Value, gradient and Hessian `[xx, yy, xy]` of one basis function.
#[derive(Debug, Clone, Copy, Default)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

/// The 16 BFS basis functions at local point `ξ` of an `hx × hy` element.
/// Local index `4a + d`: node `a = 2 i_x + i_y`, value kind
/// `d ∈ {w, w_x, w_y, w_xy}`.
pub fn bfs_basis(xi: [f64; 2], h: [f64; 2]) -> [Jet; 16] {
    let hx = hermite_1d(xi[0], h[0]);
    let hy = hermite_1d(xi[1], h[1]);
    let mut out = [Jet::default(); 16];
    for ix in 0..2 {
        for iy in 0..2 {
            let a = 2 * ix + iy;
            for d in 0..4 {
                let kx = 2 * ix + (d & 1);
                let ky = 2 * iy + (d >> 1);
                let (fx, fy) = (hx[kx], hy[ky]);
                out[4 * a + d] = Jet {
                    value: fx[0] * fy[0],
                    grad: [fx[1] * fy[0], fx[0] * fy[1]],
                    hess: [fx[2] * fy[0], fx[0] * fy[2], fx[1] * fy[1]],
                };
            }
        }
    }
    out
}

/// Bilinear shape values and physical gradients, nodes in `bfs_basis` order.
pub fn bilinear_basis(xi: [f64; 2], h: [f64; 2]) -> [(f64, [f64; 2]); 4] {
    let mut out = [(0.0, [0.0; 2]); 4];
    for ix in 0..2 {
        for iy in 0..2 {
            let (fx, dx) = if ix == 1 { (xi[0], 1.0) } else { (1.0 - xi[0], -1.0) };
            let (fy, dy) = if iy == 1 { (xi[1], 1.0) } else { (1.0 - xi[1], -1.0) };
            out[2 * ix + iy] = (fx * fy, [dx * fy / h[0], fx * dy / h[1]]);
        }
    }
    out
}
