//! Dense solver for the scattering Green tensor of a voxelized body.
//!
//! The unknowns are the cell polarisations X_i produced by a unit dipole at r.
//! Mirror planes through r that map the body onto itself split the system into
//! independent symmetry blocks: for a source along e_b the polarisation obeys
//! X_{g·i} = χ_b(g) R_g X_i, so only one representative per orbit is solved.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor, solve};
use faer::perm::PermRef;
use faer::{Conj, Mat};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::cube::{point_cube_static, NearTable};
use super::kernel::{retarded_kernel, retarded_remainder, static_kernel};
use super::voxel::VoxelBody;
use crate::numerics::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Mean of 1/|s − s'| over pairs of points in a unit cube.
pub const CUBE_MEAN_INVERSE_DISTANCE: f64 = 1.882_312_644_389_660_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discretization {
    /// Point-dipole coupling between cell centres.
    Collocation,
    /// Cube-averaged coupling: exact static averages for near cells and the
    /// evaluation point, point coupling beyond `near_range` lattice steps.
    Galerkin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    DirectSolve,
    BornSeries { n_max: usize },
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub discretization: Discretization,
    pub near_range: usize,
    pub use_symmetry: bool,
    /// Byte budget for cached factorisations.
    pub cache_bytes: usize,
    /// Smallest accepted ratio of LU pivots min|U_ii|/max|U_ii|.
    pub min_pivot_ratio: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            discretization: Discretization::Galerkin,
            near_range: 5,
            use_symmetry: true,
            cache_bytes: 1 << 31,
            min_pivot_ratio: 1e-13,
        }
    }
}

pub(crate) trait Field: faer::traits::ComplexField + Copy + Send + Sync + 'static {
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn wrap(lu: Lu<Self>) -> Factored;
    fn factored(f: &Factored) -> &Lu<Self>;
}

impl Field for f64 {
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn wrap(lu: Lu<Self>) -> Factored {
        Factored::Real(lu)
    }
    fn factored(f: &Factored) -> &Lu<Self> {
        match f {
            Factored::Real(l) => l,
            Factored::Complex(_) => unreachable!("real block keyed to a complex factorisation"),
        }
    }
}

impl Field for Complex64 {
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn wrap(lu: Lu<Self>) -> Factored {
        Factored::Complex(lu)
    }
    fn factored(f: &Factored) -> &Lu<Self> {
        match f {
            Factored::Complex(l) => l,
            Factored::Real(_) => unreachable!("complex block keyed to a real factorisation"),
        }
    }
}

pub(crate) struct Lu<T> {
    lu: Mat<T>,
    fwd: Vec<usize>,
    bwd: Vec<usize>,
}

impl<T: Field> Lu<T> {
    fn factor(mut m: Mat<T>, min_ratio: f64) -> Result<Self> {
        let n = m.nrows();
        let mut fwd = vec![0usize; n];
        let mut bwd = vec![0usize; n];
        let par = faer::get_global_parallelism();
        let mut buf = MemBuffer::new(factor::lu_in_place_scratch::<usize, T>(n, n, par, Default::default()));
        factor::lu_in_place(m.as_mut(), &mut fwd, &mut bwd, par, MemStack::new(&mut buf), Default::default());
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let v = m[(i, i)].to_c64().norm();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if n > 0 && !(lo / hi >= min_ratio) {
            return Err(Error::Conditioning { pivot_ratio: lo / hi });
        }
        Ok(Lu { lu: m, fwd, bwd })
    }

    fn solve(&self, rhs: &mut Mat<T>) {
        let n = self.lu.nrows();
        if n == 0 {
            return;
        }
        let par = faer::get_global_parallelism();
        let perm = PermRef::new_checked(&self.fwd, &self.bwd, n);
        let mut buf = MemBuffer::new(solve::solve_in_place_scratch::<usize, T>(n, rhs.ncols(), par));
        solve::solve_in_place_with_conj(
            self.lu.as_ref(),
            self.lu.as_ref(),
            perm,
            Conj::No,
            rhs.as_mut(),
            par,
            MemStack::new(&mut buf),
        );
    }

    fn bytes(&self) -> usize {
        self.lu.nrows() * self.lu.ncols() * std::mem::size_of::<T>()
    }
}

pub(crate) enum Factored {
    Real(Lu<f64>),
    Complex(Lu<Complex64>),
}

impl Factored {
    fn bytes(&self) -> usize {
        match self {
            Factored::Real(l) => l.bytes(),
            Factored::Complex(l) => l.bytes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct FactorKey {
    planes: [Option<u64>; 3],
    class: u8,
    k: (u64, u64),
    u: Vec<(u64, u64)>,
}

#[derive(Default)]
struct FactorCache {
    map: HashMap<FactorKey, Arc<Factored>>,
    order: VecDeque<FactorKey>,
    bytes: usize,
}

/// Mirror planes x_a = r_a under which the body is invariant, and the
/// orbit of every representative cell.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub planes: [Option<f64>; 3],
    /// Diagonal of the reflection matrix for each group element.
    pub elements: Vec<[f64; 3]>,
    pub reps: Vec<usize>,
    pub orbit: Vec<Vec<usize>>,
}

impl Reduction {
    fn chi(&self, class: usize) -> Vec<f64> {
        self.elements
            .iter()
            .map(|g| if class < 3 { g[class] } else { 1.0 })
            .collect()
    }

    /// Column groups sharing one symmetry block: (class, columns).
    fn classes(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
        for b in 0..3 {
            let class = if self.planes[b].is_some() { b } else { 3 };
            match out.iter_mut().find(|(c, _)| *c == class) {
                Some((_, cols)) => cols.push(b),
                None => out.push((class, vec![b])),
            }
        }
        out
    }
}

pub fn symmetry_reduction(body: &VoxelBody, r: &Vector3<f64>, enabled: bool) -> Reduction {
    let d = body.spacing;
    let mut planes = [None; 3];
    if enabled && !body.is_empty() {
        for (a, plane) in planes.iter_mut().enumerate() {
            if mirror_invariant(body, a, r[a]) {
                *plane = Some(r[a]);
            }
        }
    }
    let axes: Vec<usize> = (0..3).filter(|a| planes[*a].is_some()).collect();
    let mut elements = Vec::new();
    for mask in 0..(1usize << axes.len()) {
        let mut g = [1.0; 3];
        for (bit, a) in axes.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                g[*a] = -1.0;
            }
        }
        elements.push(g);
    }
    let mut reps = Vec::new();
    let mut orbit = Vec::new();
    for (n, c) in body.cells.iter().enumerate() {
        if axes.iter().all(|&a| c.center[a] > r[a]) {
            reps.push(n);
            let row = elements
                .iter()
                .map(|g| {
                    let mut idx = c.index;
                    for a in 0..3 {
                        if g[a] < 0.0 {
                            let mirrored = 2.0 * r[a] - c.center[a];
                            idx[a] = ((mirrored - body.origin[a]) / d).round() as i64;
                        }
                    }
                    body.cell_at(idx).expect("mirror cell exists for an invariant body")
                })
                .collect();
            orbit.push(row);
        }
    }
    Reduction {
        planes,
        elements,
        reps,
        orbit,
    }
}

fn mirror_invariant(body: &VoxelBody, axis: usize, at: f64) -> bool {
    let d = body.spacing;
    for c in &body.cells {
        let mirrored = 2.0 * at - c.center[axis];
        if (c.center[axis] - at).abs() < 1e-9 * d {
            return false;
        }
        let t = (mirrored - body.origin[axis]) / d;
        if (t - t.round()).abs() > 1e-9 {
            return false;
        }
        let mut idx = c.index;
        idx[axis] = t.round() as i64;
        match body.cell_at(idx) {
            Some(j) => {
                let o = &body.cells[j];
                if o.material != c.material || (o.volume - c.volume).abs() > 1e-12 * c.volume {
                    return false;
                }
            }
            None => return false,
        }
    }
    true
}

/// Scattering Green tensor solver bound to one body.
pub struct GammaSolver {
    body: Arc<VoxelBody>,
    options: SolverOptions,
    table: Option<NearTable>,
    cache: Mutex<FactorCache>,
}

impl GammaSolver {
    pub fn new(body: Arc<VoxelBody>, options: SolverOptions) -> Self {
        let table = match options.discretization {
            Discretization::Galerkin => Some(NearTable::new(options.near_range)),
            Discretization::Collocation => None,
        };
        GammaSolver {
            body,
            options,
            table,
            cache: Mutex::new(FactorCache::default()),
        }
    }

    pub fn body(&self) -> &Arc<VoxelBody> {
        &self.body
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// Drops all cached factorisations.
    pub fn clear_cache(&self) {
        *self.cache.lock().expect("cache lock") = FactorCache::default();
    }

    /// Γ at r for wavenumber k (nm⁻¹; k = 0 is the static kernel) and
    /// per-material Born strengths u.
    pub fn gamma_with(
        &self,
        r: &Vector3<f64>,
        k: Complex64,
        u: &[Complex64],
        method: Method,
    ) -> Result<Matrix3<Complex64>> {
        if u.len() != self.body.materials.len() {
            return Err(Error::validation(format!(
                "expected {} Born strengths, got {}",
                self.body.materials.len(),
                u.len()
            )));
        }
        if u.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::validation("Born strengths must be finite"));
        }
        self.body.check_outside(r)?;
        let mut gamma = Matrix3::zeros();
        if self.body.is_empty() {
            return Ok(gamma);
        }
        let red = symmetry_reduction(&self.body, r, self.options.use_symmetry);
        let real = k.re == 0.0 && u.iter().all(|v| v.im == 0.0);
        let coupling: Vec<Complex64> = self.body.cells.iter().map(|c| u[c.material] * c.volume).collect();
        for (class, cols) in red.classes() {
            let chi = red.chi(class);
            let block = if real {
                self.solve_block::<f64>(&red, class, &chi, &cols, r, k, u, &coupling, method)?
            } else {
                self.solve_block::<Complex64>(&red, class, &chi, &cols, r, k, u, &coupling, method)?
            };
            for (b, v) in block {
                for a in 0..3 {
                    let weight: f64 = red.elements.iter().zip(chi.iter()).map(|(g, x)| x * g[a]).sum();
                    gamma[(a, b)] = v[a] * weight;
                }
            }
        }
        Ok(gamma)
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_block<T: Field>(
        &self,
        red: &Reduction,
        class: usize,
        chi: &[f64],
        cols: &[usize],
        r: &Vector3<f64>,
        k: Complex64,
        u: &[Complex64],
        coupling: &[Complex64],
        method: Method,
    ) -> Result<Vec<(usize, Vector3<Complex64>)>> {
        let n = red.reps.len();
        let out_k: Vec<Matrix3<Complex64>> = red.reps.iter().map(|&i| self.out_kernel(r, i, k)).collect();
        let mut rhs = Mat::<T>::zeros(3 * n, cols.len());
        for (ii, kern) in out_k.iter().enumerate() {
            for (cc, &b) in cols.iter().enumerate() {
                for a in 0..3 {
                    rhs[(3 * ii + a, cc)] = T::from_c64(kern[(a, b)]);
                }
            }
        }
        let x = match method {
            Method::DirectSolve => {
                let key = FactorKey {
                    planes: red.planes.map(|p| p.map(f64::to_bits)),
                    class: class as u8,
                    k: (k.re.to_bits(), k.im.to_bits()),
                    u: u.iter().map(|v| (v.re.to_bits(), v.im.to_bits())).collect(),
                };
                let cached = self.cache.lock().expect("cache lock").map.get(&key).cloned();
                let fac = match cached {
                    Some(f) => f,
                    None => {
                        let m = self.assemble::<T>(red, chi, k, coupling);
                        let f = Arc::new(T::wrap(Lu::factor(m, self.options.min_pivot_ratio)?));
                        self.store(key, f.clone());
                        f
                    }
                };
                let mut x = rhs;
                T::factored(&fac).solve(&mut x);
                x
            }
            Method::BornSeries { n_max } => self.born_series::<T>(red, chi, k, coupling, &out_k, rhs, n_max)?,
        };
        Ok(cols
            .iter()
            .enumerate()
            .map(|(cc, &b)| (b, output(&red.reps, coupling, &out_k, &x, cc)))
            .collect())
    }

    fn store(&self, key: FactorKey, f: Arc<Factored>) {
        let bytes = f.bytes();
        if bytes > self.options.cache_bytes {
            return;
        }
        let mut cache = self.cache.lock().expect("cache lock");
        while cache.bytes + bytes > self.options.cache_bytes {
            match cache.order.pop_front() {
                Some(old) => {
                    if let Some(v) = cache.map.remove(&old) {
                        cache.bytes -= v.bytes();
                    }
                }
                None => break,
            }
        }
        if cache.map.insert(key.clone(), f).is_none() {
            cache.bytes += bytes;
            cache.order.push_back(key);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn born_series<T: Field>(
        &self,
        red: &Reduction,
        chi: &[f64],
        k: Complex64,
        coupling: &[Complex64],
        out_k: &[Matrix3<Complex64>],
        rhs: Mat<T>,
        n_max: usize,
    ) -> Result<Mat<T>> {
        // C = I − M
        let mut c = self.assemble::<T>(red, chi, k, coupling);
        let dim = c.nrows();
        for i in 0..dim {
            for j in 0..dim {
                c[(i, j)] = if i == j { T::from_c64(Complex64::new(1.0, 0.0)) } else { T::from_c64(Complex64::new(0.0, 0.0)) }
                    - c[(i, j)];
            }
        }
        let term_norm = |x: &Mat<T>| -> f64 {
            (0..x.ncols())
                .map(|cc| output(&red.reps, coupling, out_k, x, cc).norm_squared())
                .sum::<f64>()
                .sqrt()
        };
        let mut total = rhs.clone();
        let mut term = rhs;
        let mut norms = vec![term_norm(&term)];
        let mut growth = 0;
        for _ in 1..n_max.max(1) {
            term = &c * &term;
            let nrm = term_norm(&term);
            if nrm > *norms.last().expect("non-empty") {
                growth += 1;
            } else {
                growth = 0;
            }
            norms.push(nrm);
            if growth >= 3 {
                return Err(Error::BornDivergent { norms });
            }
            total = &total + &term;
        }
        Ok(total)
    }

    fn assemble<T: Field>(&self, red: &Reduction, chi: &[f64], k: Complex64, coupling: &[Complex64]) -> Mat<T> {
        let n = red.reps.len();
        let mut m = Mat::<T>::zeros(3 * n, 3 * n);
        let self_term = self.self_remainder(k);
        for (jj, row) in red.orbit.iter().enumerate() {
            for (g, &cell) in row.iter().enumerate() {
                let w = coupling[cell] * chi[g];
                let refl = red.elements[g];
                for (ii, &i) in red.reps.iter().enumerate() {
                    let kern = if i == cell {
                        match self_term {
                            Some(s) => Matrix3::from_diagonal_element(s),
                            None => continue,
                        }
                    } else {
                        self.pair_kernel(i, cell, k)
                    };
                    for b in 0..3 {
                        let wb = w * refl[b];
                        for a in 0..3 {
                            let v = m[(3 * ii + a, 3 * jj + b)].to_c64() - kern[(a, b)] * wb;
                            m[(3 * ii + a, 3 * jj + b)] = T::from_c64(v);
                        }
                    }
                }
            }
        }
        for i in 0..3 * n {
            let v = m[(i, i)].to_c64() + 1.0;
            m[(i, i)] = T::from_c64(v);
        }
        m
    }

    /// Kernel coupling cell j to cell i (i ≠ j).
    fn pair_kernel(&self, i: usize, j: usize, k: Complex64) -> Matrix3<Complex64> {
        let ci = &self.body.cells[i];
        let cj = &self.body.cells[j];
        let rho = ci.center - cj.center;
        if let Some(table) = &self.table {
            let o = [ci.index[0] - cj.index[0], ci.index[1] - cj.index[1], ci.index[2] - cj.index[2]];
            if let Some(t) = table.get(o) {
                let d3 = self.body.spacing.powi(3);
                let base = (t / d3).map(|v| Complex64::new(v, 0.0));
                return if k == Complex64::new(0.0, 0.0) {
                    base
                } else {
                    base + retarded_remainder(&rho, k)
                };
            }
        }
        if k == Complex64::new(0.0, 0.0) {
            static_kernel(&rho).map(|v| Complex64::new(v, 0.0))
        } else {
            retarded_kernel(&rho, k)
        }
    }

    /// Kernel coupling cell j to the evaluation point.
    fn out_kernel(&self, r: &Vector3<f64>, j: usize, k: Complex64) -> Matrix3<Complex64> {
        let rho = self.body.cells[j].center - r;
        let zero = Complex64::new(0.0, 0.0);
        match self.options.discretization {
            Discretization::Galerkin => {
                let base = point_cube_static(&rho, self.body.spacing).map(|v| Complex64::new(v, 0.0));
                if k == zero {
                    base
                } else {
                    base + retarded_remainder(&rho, k)
                }
            }
            Discretization::Collocation => {
                if k == zero {
                    static_kernel(&rho).map(|v| Complex64::new(v, 0.0))
                } else {
                    retarded_kernel(&rho, k)
                }
            }
        }
    }

    /// Cube self-average of A_k − A₀, which is isotropic:
    /// k²/(6π)·⟨e^{ikρ}/ρ⟩ over pairs of points in one cell.
    fn self_remainder(&self, k: Complex64) -> Option<Complex64> {
        if self.options.discretization != Discretization::Galerkin || k == Complex64::new(0.0, 0.0) {
            return None;
        }
        let d = self.body.spacing;
        let (nodes, weights) = gauss_legendre(12);
        // offsets t ∈ [0,1]³ with density 8·Π(1 − t_a); smooth part (e^{ikdρ} − 1)/ρ
        let mut smooth = Complex64::new(0.0, 0.0);
        for (x, wx) in nodes.iter().zip(&weights) {
            for (y, wy) in nodes.iter().zip(&weights) {
                for (z, wz) in nodes.iter().zip(&weights) {
                    let (tx, ty, tz) = (0.5 * (x + 1.0), 0.5 * (y + 1.0), 0.5 * (z + 1.0));
                    let rho = (tx * tx + ty * ty + tz * tz).sqrt() * d;
                    let w = wx * wy * wz * (1.0 - tx) * (1.0 - ty) * (1.0 - tz);
                    let ikr = Complex64::i() * k * rho;
                    smooth += w * expm1_c(ikr) / rho;
                }
            }
        }
        let mean = smooth + CUBE_MEAN_INVERSE_DISTANCE / d;
        Some(k * k / (6.0 * PI) * mean)
    }
}

fn expm1_c(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        z * (1.0 + z * (0.5 + z / 6.0 * (1.0 + z / 4.0)))
    } else {
        z.exp() - 1.0
    }
}

fn output<T: Field>(
    reps: &[usize],
    coupling: &[Complex64],
    out_k: &[Matrix3<Complex64>],
    x: &Mat<T>,
    col: usize,
) -> Vector3<Complex64> {
    let mut v = Vector3::zeros();
    for (ii, &i) in reps.iter().enumerate() {
        let xi = Vector3::new(
            x[(3 * ii, col)].to_c64(),
            x[(3 * ii + 1, col)].to_c64(),
            x[(3 * ii + 2, col)].to_c64(),
        );
        v += out_k[ii] * xi * coupling[i];
    }
    v
}
