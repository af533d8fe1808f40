//! Cube-averaged static dipole kernels.
//!
//! For uniformly polarised cubic cells the static interaction is the average
//! of A₀ over both cubes, which is minus Newell's demagnetising tensor N
//! divided by the cell volume. The self average is −I/3 per volume and is
//! already carried by the Clausius–Mossotti factor u, so only off-diagonal
//! pairs use the table. Evaluation points outside the body couple to a cell
//! through the average of A₀ over one cube, which has a closed form in terms
//! of the cube corners.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

fn f_newell(x: f64, y: f64, z: f64) -> f64 {
    let (x, y, z) = (x.abs(), y.abs(), z.abs());
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let r = (x2 + y2 + z2).sqrt();
    let mut s = (2.0 * x2 - y2 - z2) * r / 6.0;
    if y > 0.0 && x2 + z2 > 0.0 {
        s += 0.5 * y * (z2 - x2) * (y / (x2 + z2).sqrt()).asinh();
    }
    if z > 0.0 && x2 + y2 > 0.0 {
        s += 0.5 * z * (y2 - x2) * (z / (x2 + y2).sqrt()).asinh();
    }
    if x > 0.0 {
        s -= x * y * z * (y * z / (x * r)).atan();
    }
    s
}

fn g_newell(x: f64, y: f64, z: f64) -> f64 {
    let sign = x.signum() * y.signum();
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    let (x, y) = (x.abs(), y.abs());
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let r = (x2 + y2 + z2).sqrt();
    let mut s = x * y * z * (z / (x2 + y2).sqrt()).asinh();
    if y2 + z2 > 0.0 {
        s += y / 6.0 * (3.0 * z2 - y2) * (x / (y2 + z2).sqrt()).asinh();
    }
    if x2 + z2 > 0.0 {
        s += x / 6.0 * (3.0 * z2 - x2) * (y / (x2 + z2).sqrt()).asinh();
    }
    if z != 0.0 {
        s -= z * z2 / 6.0 * (x * y / (z * r)).atan();
    }
    s -= z * y2 / 2.0 * (x * z / (y * r)).atan();
    s -= z * x2 / 2.0 * (y * z / (x * r)).atan();
    s -= x * y * r / 3.0;
    sign * s
}

const W: [f64; 3] = [-1.0, 2.0, -1.0];

fn stencil(fun: fn(f64, f64, f64) -> f64, x: f64, y: f64, z: f64) -> f64 {
    let mut s = 0.0;
    for (a, wa) in W.iter().enumerate() {
        for (b, wb) in W.iter().enumerate() {
            for (c, wc) in W.iter().enumerate() {
                s += wa * wb * wc * fun(x + a as f64 - 1.0, y + b as f64 - 1.0, z + c as f64 - 1.0);
            }
        }
    }
    s
}

/// Newell's demagnetising tensor between two unit cubes offset by `o`
/// lattice steps.
pub fn newell_tensor(o: [i64; 3]) -> Matrix3<f64> {
    let (x, y, z) = (o[0] as f64, o[1] as f64, o[2] as f64);
    let xx = stencil(f_newell, x, y, z);
    let yy = stencil(f_newell, y, z, x);
    let zz = stencil(f_newell, z, x, y);
    let xy = stencil(g_newell, x, y, z);
    let xz = stencil(g_newell, x, z, y);
    let yz = stencil(g_newell, y, z, x);
    Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz) / (4.0 * PI)
}

/// Cube–cube averaged static kernels −N(o) for unit spacing, |o|∞ ≤ range.
#[derive(Debug, Clone)]
pub struct NearTable {
    range: i64,
    data: Vec<Matrix3<f64>>,
}

impl NearTable {
    pub fn new(range: usize) -> Self {
        let range = range as i64;
        let side = 2 * range + 1;
        let mut data = Vec::with_capacity((side * side * side) as usize);
        for i in -range..=range {
            for j in -range..=range {
                for k in -range..=range {
                    data.push(if (i, j, k) == (0, 0, 0) {
                        Matrix3::zeros()
                    } else {
                        -newell_tensor([i, j, k])
                    });
                }
            }
        }
        NearTable { range, data }
    }

    pub fn range(&self) -> usize {
        self.range as usize
    }

    /// Averaged kernel for a lattice offset, for unit spacing.
    pub fn get(&self, o: [i64; 3]) -> Option<&Matrix3<f64>> {
        let r = self.range;
        if o.iter().any(|v| v.abs() > r) {
            return None;
        }
        let side = 2 * r + 1;
        Some(&self.data[(((o[0] + r) * side + o[1] + r) * side + o[2] + r) as usize])
    }
}

/// Average of A₀(s − r) over the cube of side `d` centred at r + `rho`.
///
/// The evaluation point must lie outside the cube.
pub fn point_cube_static(rho: &Vector3<f64>, d: f64) -> Matrix3<f64> {
    let h = 0.5 * d;
    let lo = [rho.x - h, rho.y - h, rho.z - h];
    let hi = [rho.x + h, rho.y + h, rho.z + h];
    let mut m = Matrix3::zeros();
    for (ia, a) in [(lo[0], -1.0), (hi[0], 1.0)] {
        for (jb, b) in [(lo[1], -1.0), (hi[1], 1.0)] {
            for (kc, c) in [(lo[2], -1.0), (hi[2], 1.0)] {
                let s = a * b * c;
                let r = (ia * ia + jb * jb + kc * kc).sqrt();
                m[(0, 0)] -= s * atan_term(ia, jb, kc, r);
                m[(1, 1)] -= s * atan_term(jb, kc, ia, r);
                m[(2, 2)] -= s * atan_term(kc, ia, jb, r);
                m[(0, 1)] += s * log_term(ia, jb, kc, r);
                m[(0, 2)] += s * log_term(ia, kc, jb, r);
                m[(1, 2)] += s * log_term(jb, kc, ia, r);
            }
        }
    }
    m[(1, 0)] = m[(0, 1)];
    m[(2, 0)] = m[(0, 2)];
    m[(2, 1)] = m[(1, 2)];
    m / (4.0 * PI * d * d * d)
}

// atan(yz/(xr)); the x = 0 limit cancels between corners of an external point
fn atan_term(x: f64, y: f64, z: f64, r: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (y * z / (x * r)).atan()
    }
}

// ln(z + r) for the corner (x, y, z), written stably for z < 0; the
// ln(x² + y²) piece cancels in corner pairs when x = y = 0
fn log_term(x: f64, y: f64, z: f64, r: f64) -> f64 {
    if z >= 0.0 {
        (z + r).ln()
    } else {
        let p = x * x + y * y;
        let base = if p > 0.0 { p.ln() } else { 0.0 };
        base - (r - z).ln()
    }
}
