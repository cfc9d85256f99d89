//! Global degrees of freedom, local element matrices, static condensation
//! and assembly of the Poisson, Stokes and linear elasticity systems.
//!
//! The unknowns of both element families are edge-midpoint values. The
//! augmented parametric element carries an additional cell moment on every
//! cell that is not a parallelogram; by default that unknown is eliminated
//! cell by cell (static condensation) and recovered after the global solve.

use crate::error::{Error, Result};
use crate::geometry::{decompose, Mat2, Point2, Quadrilateral};
use crate::linsolve::{dense, CsrMatrix};
use crate::mesh::Mesh;
use crate::quadrature::{self, Rule2D};
use crate::refelem::{nodal_basis, ParametricBasis, ParametricElement};

/// Largest local scalar basis (augmented parametric element).
pub const MAX_LOCAL: usize = 5;

pub const DEFAULT_QUAD_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementKind {
    /// Four-DOF nonparametric element `Span{1, x₁, x₂, μ(·; c̃)}`.
    Nonparametric { c_tilde: f64 },
    /// Parametric DSSY element; when `augmented`, non-parallelogram cells
    /// get the extra `x̂₁x̂₂` function and its cell-moment DOF.
    Parametric { variant_l: i32, augmented: bool },
}

impl ElementKind {
    pub fn nonparametric(c_tilde: f64) -> Self {
        ElementKind::Nonparametric { c_tilde }
    }

    pub fn parametric() -> Self {
        ElementKind::Parametric {
            variant_l: 1,
            augmented: true,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ElementKind::Nonparametric { c_tilde } => format!("np(c={c_tilde})"),
            ElementKind::Parametric { variant_l, augmented } => {
                format!("p(l={variant_l}{})", if augmented { ",aug" } else { "" })
            }
        }
    }
}

/// The differential operator being discretized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Operator {
    /// `-Δu`
    Laplace,
    /// `-(λ+μ)∇(∇·u) - μΔu`
    Elasticity { mu: f64, lambda: f64 },
    /// `-Δu + ∇p`, `∇·u = 0` with piecewise-constant pressure
    Stokes,
}

impl Operator {
    pub fn components(&self) -> usize {
        match self {
            Operator::Laplace => 1,
            _ => 2,
        }
    }
}

/// Per-element precomputation shared by all cells of an assembly.
#[derive(Clone, Debug)]
pub struct ElementContext {
    pub kind: ElementKind,
    plain: Option<ParametricBasis>,
    augmented: Option<ParametricBasis>,
}

impl ElementContext {
    pub fn new(kind: ElementKind) -> Result<Self> {
        match kind {
            ElementKind::Nonparametric { .. } => Ok(ElementContext {
                kind,
                plain: None,
                augmented: None,
            }),
            ElementKind::Parametric { variant_l, augmented } => Ok(ElementContext {
                kind,
                plain: Some(ParametricBasis::new(ParametricElement::new(variant_l, false)?)?),
                augmented: if augmented {
                    Some(ParametricBasis::new(ParametricElement::new(variant_l, true)?)?)
                } else {
                    None
                },
            }),
        }
    }

    /// Whether `q` carries the extra cell DOF.
    pub fn has_cell_dof(&self, q: &Quadrilateral) -> Result<bool> {
        match self.kind {
            ElementKind::Parametric { augmented: true, .. } => {
                let dec = decompose(q)?;
                Ok(!is_parallelogram(dec.d, q.diameter()))
            }
            _ => Ok(false),
        }
    }
}

/// `‖d‖ ≤ 1e-12·diam`: the bilinear map is affine.
pub fn is_parallelogram(d: Point2, diam: f64) -> bool {
    d.norm() <= 1e-12 * diam
}

/// Basis values and physical gradients at the quadrature points of one cell.
#[derive(Clone, Debug, Default)]
pub struct CellBasis {
    pub dim: usize,
    pub points: Vec<Point2>,
    /// Quadrature weights times `|det DF|`.
    pub weights: Vec<f64>,
    pub values: Vec<[f64; MAX_LOCAL]>,
    pub grads: Vec<[Point2; MAX_LOCAL]>,
    pub s_tilde: Point2,
    pub det_min: f64,
    pub det_max: f64,
}

impl CellBasis {
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn reset(&mut self, n: usize) {
        self.points.clear();
        self.weights.clear();
        self.values.clear();
        self.grads.clear();
        self.points.reserve(n);
        self.det_min = f64::INFINITY;
        self.det_max = f64::NEG_INFINITY;
    }
}

/// Fills `out` with the nodal basis of `q` evaluated on `rule`.
///
/// Nonparametric functions are polynomials of `x̃ = S(x̂)` and their
/// gradients are pushed forward by `A⁻ᵀ`; parametric functions are
/// polynomials of `x̂` with gradients pushed forward by `DF⁻ᵀ`.
pub fn cell_basis(ctx: &ElementContext, q: &Quadrilateral, rule: &Rule2D, out: &mut CellBasis) -> Result<()> {
    let dec = decompose(q)?;
    out.reset(rule.len());
    out.s_tilde = dec.s_tilde;
    match ctx.kind {
        ElementKind::Nonparametric { c_tilde } => {
            let el = nodal_basis(dec.s_tilde, c_tilde)?;
            let a_inv_t = dec
                .a
                .inverse()
                .ok_or(Error::SingularMap { det: dec.a.det() })?
                .transpose();
            out.dim = 4;
            for (&xh, &w) in rule.points.iter().zip(&rule.weights) {
                let xt = dec.simple(xh);
                let det = dec.jacobian(xh).det();
                let (v, g) = el.eval(xt);
                let mut vals = [0.0; MAX_LOCAL];
                let mut grads = [Point2::ZERO; MAX_LOCAL];
                for i in 0..4 {
                    vals[i] = v[i];
                    grads[i] = a_inv_t.apply(g[i]);
                }
                out.points.push(dec.affine(xt));
                out.weights.push(w * det.abs());
                out.values.push(vals);
                out.grads.push(grads);
                out.det_min = out.det_min.min(det);
                out.det_max = out.det_max.max(det);
            }
        }
        ElementKind::Parametric { .. } => {
            let basis = match (&ctx.augmented, is_parallelogram(dec.d, q.diameter())) {
                (Some(aug), false) => aug,
                _ => ctx.plain.as_ref().expect("parametric context has a plain basis"),
            };
            let k = basis.dim();
            out.dim = k;
            let mut v = [0.0; MAX_LOCAL];
            let mut g = [Point2::ZERO; MAX_LOCAL];
            for (&xh, &w) in rule.points.iter().zip(&rule.weights) {
                let jac = dec.jacobian(xh);
                let det = jac.det();
                let j_inv_t = jac
                    .inverse()
                    .ok_or(Error::SingularMap { det })?
                    .transpose();
                basis.eval_into(xh, &mut v[..k], &mut g[..k])?;
                let mut grads = [Point2::ZERO; MAX_LOCAL];
                for i in 0..k {
                    grads[i] = j_inv_t.apply(g[i]);
                }
                out.points.push(dec.forward(xh));
                out.weights.push(w * det.abs());
                out.values.push(v);
                out.grads.push(grads);
                out.det_min = out.det_min.min(det);
                out.det_max = out.det_max.max(det);
            }
        }
    }
    Ok(())
}

/// Row-major dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(n: usize) -> Self {
        DenseMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let mut m = DenseMat::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            m.data[i * n..(i + 1) * n].copy_from_slice(r.as_ref());
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

/// Local matrices of one cell.
///
/// Vector-valued problems order local unknowns component-major:
/// index `c·dim + i` is component `c` of nodal function `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMatrices {
    /// Scalar basis size (4 or 5).
    pub dim: usize,
    pub components: usize,
    pub stiffness: DenseMat,
    /// Elasticity only: the `μ ∇bᵢ:∇bⱼ` part of `stiffness`.
    pub viscous: Option<DenseMat>,
    pub load: Vec<f64>,
    /// `-∫_K ∂_c bᵢ` per local unknown (vector problems, otherwise empty).
    pub divergence: Vec<f64>,
    pub area: f64,
    pub s_tilde: Point2,
    pub det_range: (f64, f64),
}

impl LocalMatrices {
    pub fn size(&self) -> usize {
        self.dim * self.components
    }

    /// Local indices of the cell (bubble) unknowns, if any.
    pub fn interior_indices(&self) -> Vec<usize> {
        if self.dim == 5 {
            (0..self.components).map(|c| c * self.dim + 4).collect()
        } else {
            Vec::new()
        }
    }
}

/// Vector-valued forcing; scalar problems read component 0.
pub type Forcing<'a> = &'a (dyn Fn(Point2) -> [f64; 2] + Sync);

/// Local stiffness, load and divergence for an already evaluated cell basis.
///
/// The elasticity divergence term is integrated against cellwise means,
/// `(λ+μ) |K|⁻¹ (∫_K ∇·bᵢ)(∫_K ∇·bⱼ)`.
pub fn local_from_basis(cb: &CellBasis, op: Operator, forcing: Option<Forcing<'_>>) -> LocalMatrices {
    let k = cb.dim;
    let nc = op.components();
    let n = k * nc;
    let (diffusion, vector) = match op {
        Operator::Laplace => (1.0, false),
        Operator::Stokes => (1.0, true),
        Operator::Elasticity { mu, .. } => (mu, true),
    };
    let mut stiff = DenseMat::zeros(n);
    let mut load = vec![0.0; n];
    let mut div = if vector { vec![0.0; n] } else { Vec::new() };
    for q in 0..cb.weights.len() {
        let w = cb.weights[q];
        let g = &cb.grads[q];
        for i in 0..k {
            for j in i..k {
                let val = diffusion * w * g[i].dot(g[j]);
                for c in 0..nc {
                    stiff.add(c * k + i, c * k + j, val);
                }
            }
        }
        if vector {
            for i in 0..k {
                div[i] -= w * g[i].x1;
                div[k + i] -= w * g[i].x2;
            }
        }
        if let Some(f) = forcing {
            let fv = f(cb.points[q]);
            let v = &cb.values[q];
            for c in 0..nc {
                for i in 0..k {
                    load[c * k + i] += w * fv[c] * v[i];
                }
            }
        }
    }
    for c in 0..nc {
        for i in 0..k {
            for j in 0..i {
                let v = stiff.get(c * k + j, c * k + i);
                stiff.set(c * k + i, c * k + j, v);
            }
        }
    }
    let area = cb.area();
    let viscous = match op {
        Operator::Elasticity { mu, lambda } => {
            let visc = stiff.clone();
            let scale = (lambda + mu) / area;
            for i in 0..n {
                for j in 0..n {
                    stiff.add(i, j, scale * div[i] * div[j]);
                }
            }
            Some(visc)
        }
        _ => None,
    };
    LocalMatrices {
        dim: k,
        components: nc,
        stiffness: stiff,
        viscous,
        load,
        divergence: div,
        area,
        s_tilde: cb.s_tilde,
        det_range: (cb.det_min, cb.det_max),
    }
}

/// Local matrices of cell `q` for element `kind` and operator `op`.
pub fn local_matrices(
    q: &Quadrilateral,
    kind: ElementKind,
    op: Operator,
    forcing: Option<Forcing<'_>>,
    quad_npts: usize,
) -> Result<LocalMatrices> {
    let ctx = ElementContext::new(kind)?;
    let rule = quadrature::tensor_rule(quad_npts)?;
    let mut cb = CellBasis::default();
    cell_basis(&ctx, q, &rule, &mut cb)?;
    Ok(local_from_basis(&cb, op, forcing))
}

/// Data needed to recover eliminated cell unknowns after the global solve.
#[derive(Clone, Debug, PartialEq)]
pub struct Condensation {
    /// `K_cc⁻¹`, `m × m` row-major.
    pub kcc_inv: Vec<f64>,
    /// `K_ce`, `m × n_e` row-major.
    pub kce: Vec<f64>,
    pub fc: Vec<f64>,
    /// Local indices of the retained (edge) unknowns.
    pub kept: Vec<usize>,
    /// Local indices of the eliminated unknowns.
    pub eliminated: Vec<usize>,
}

impl Condensation {
    /// `u_c = K_cc⁻¹ (f_c - K_ce u_e)`.
    pub fn recover(&self, u_edge: &[f64]) -> Vec<f64> {
        let m = self.eliminated.len();
        let ne = self.kept.len();
        let rhs: Vec<f64> = (0..m)
            .map(|a| self.fc[a] - (0..ne).map(|j| self.kce[a * ne + j] * u_edge[j]).sum::<f64>())
            .collect();
        (0..m)
            .map(|a| (0..m).map(|b| self.kcc_inv[a * m + b] * rhs[b]).sum())
            .collect()
    }
}

/// Eliminates the cell unknowns of `loc` by a Schur complement.
///
/// Returns the condensed matrices (on the edge unknowns, same
/// component-major order with `dim = 4`) and the recovery data. When `loc`
/// has no cell unknowns it is returned unchanged.
pub fn static_condense(loc: &LocalMatrices) -> Result<(LocalMatrices, Option<Condensation>)> {
    let elim = loc.interior_indices();
    if elim.is_empty() {
        return Ok((loc.clone(), None));
    }
    let n = loc.size();
    let kept: Vec<usize> = (0..n).filter(|i| !elim.contains(i)).collect();
    let m = elim.len();
    let ne = kept.len();
    let k = &loc.stiffness;
    let kcc: Vec<Vec<f64>> = elim.iter().map(|&a| elim.iter().map(|&b| k.get(a, b)).collect()).collect();
    let trace = k.trace().abs();
    for (a, row) in kcc.iter().enumerate() {
        if row[a].abs() < 1e-14 * trace {
            return Err(Error::SingularInterior);
        }
    }
    let inv = dense::invert(&kcc).ok_or(Error::SingularInterior)?;
    let kcc_inv: Vec<f64> = inv.into_iter().flatten().collect();
    let kce: Vec<f64> = elim
        .iter()
        .flat_map(|&a| kept.iter().map(move |&j| k.get(a, j)))
        .collect();
    let fc: Vec<f64> = elim.iter().map(|&a| loc.load[a]).collect();

    // X = K_cc⁻¹ K_ce (m × ne), y = K_cc⁻¹ f_c
    let mut x = vec![0.0; m * ne];
    let mut y = vec![0.0; m];
    for a in 0..m {
        for b in 0..m {
            let c = kcc_inv[a * m + b];
            for j in 0..ne {
                x[a * ne + j] += c * kce[b * ne + j];
            }
            y[a] += c * fc[b];
        }
    }
    let mut stiff = DenseMat::zeros(ne);
    let mut load = vec![0.0; ne];
    for (ii, &i) in kept.iter().enumerate() {
        for (jj, &j) in kept.iter().enumerate() {
            let mut v = k.get(i, j);
            for (a, &ea) in elim.iter().enumerate() {
                v -= k.get(i, ea) * x[a * ne + jj];
            }
            stiff.set(ii, jj, v);
        }
        let mut f = loc.load[i];
        for (a, &ea) in elim.iter().enumerate() {
            f -= k.get(i, ea) * y[a];
        }
        load[ii] = f;
    }
    // Exact symmetrization of roundoff.
    for i in 0..ne {
        for j in 0..i {
            let v = 0.5 * (stiff.get(i, j) + stiff.get(j, i));
            stiff.set(i, j, v);
            stiff.set(j, i, v);
        }
    }
    // The divergence and viscous blocks do not survive elimination.
    Ok((
        LocalMatrices {
            dim: 4,
            components: loc.components,
            stiffness: stiff,
            viscous: None,
            load,
            divergence: Vec::new(),
            area: loc.area,
            s_tilde: loc.s_tilde,
            det_range: loc.det_range,
        },
        Some(Condensation {
            kcc_inv,
            kce,
            fc,
            kept,
            eliminated: elim,
        }),
    ))
}

/// Global numbering of the scalar unknowns.
///
/// Interior edges are numbered first (`0..n_edge_dofs`), followed by one
/// unknown per cell that carries a cell DOF.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub edge_dof: Vec<Option<usize>>,
    pub cell_dof: Vec<Option<usize>>,
    pub n_edge_dofs: usize,
    pub n_dofs: usize,
    pub boundary_edges: Vec<usize>,
}

pub fn build_dofmap(mesh: &Mesh, kind: ElementKind) -> Result<DofMap> {
    let ctx = ElementContext::new(kind)?;
    let mut edge_dof = vec![None; mesh.edges.len()];
    let mut boundary_edges = Vec::new();
    let mut next = 0;
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.boundary {
            boundary_edges.push(e);
        } else {
            edge_dof[e] = Some(next);
            next += 1;
        }
    }
    let n_edge_dofs = next;
    let mut cell_dof = vec![None; mesh.n_cells()];
    for (k, slot) in cell_dof.iter_mut().enumerate() {
        if ctx.has_cell_dof(&mesh.quad(k))? {
            *slot = Some(next);
            next += 1;
        }
    }
    Ok(DofMap {
        edge_dof,
        cell_dof,
        n_edge_dofs,
        n_dofs: next,
        boundary_edges,
    })
}

impl DofMap {
    /// Global scalar DOF of each local function of `cell` (`None` on the boundary).
    pub fn local_dofs(&self, mesh: &Mesh, cell: usize) -> [Option<usize>; MAX_LOCAL] {
        let e = mesh.cell_edges[cell];
        [
            self.edge_dof[e[0]],
            self.edge_dof[e[1]],
            self.edge_dof[e[2]],
            self.edge_dof[e[3]],
            self.cell_dof[cell],
        ]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AssemblyOptions {
    pub quad_npts: usize,
    /// Eliminate cell unknowns locally (ignored when there are none).
    pub condense: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            quad_npts: DEFAULT_QUAD_POINTS,
            condense: true,
        }
    }
}

/// Prescribed midpoint values on boundary edges (per component).
pub type BoundaryValues<'a> = &'a (dyn Fn(Point2) -> [f64; 2] + Sync);

/// The assembled linear system.
///
/// Unknown `c·n_scalar + i` is component `c` of scalar unknown `i`, where
/// `n_scalar` is `n_edge_dofs` when cell unknowns were condensed and
/// `n_dofs` otherwise.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Vector problems without condensed unknowns: `B` (cells × unknowns),
    /// its lifted right-hand side, and the cell areas.
    pub divergence: Option<CsrMatrix>,
    pub divergence_rhs: Vec<f64>,
    pub pressure_weights: Vec<f64>,
    /// Elasticity only: the `μ`-weighted vector Laplacian, so that
    /// `matrix = viscous + penalty · Bᵀ diag(areas)⁻¹ B`.
    pub viscous: Option<CsrMatrix>,
    pub penalty: Option<f64>,
    pub components: usize,
    pub n_scalar: usize,
    pub condensed: Vec<Option<Condensation>>,
    /// Boundary-edge values used for lifting, `components × n_edges`.
    pub boundary_values: Vec<f64>,
}

impl SparseSystem {
    pub fn n_unknowns(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Clone, Debug)]
pub struct Assembled {
    pub system: SparseSystem,
    pub dofmap: DofMap,
    pub kind: ElementKind,
    pub operator: Operator,
}

impl Assembled {
    /// Reported number of unknowns: all scalar DOFs per component, plus
    /// `n_cells - 1` pressures for Stokes.
    pub fn reported_dofs(&self) -> usize {
        let base = self.dofmap.n_dofs * self.system.components;
        match self.operator {
            Operator::Stokes => base + self.system.pressure_weights.len() - 1,
            _ => base,
        }
    }
}

/// Assembles the global system for `op` on `mesh`.
///
/// Boundary-edge unknowns are excluded (homogeneous Dirichlet) unless
/// `boundary` prescribes their values, in which case they are lifted into
/// the right-hand side.
pub fn assemble(
    mesh: &Mesh,
    kind: ElementKind,
    op: Operator,
    forcing: Option<Forcing<'_>>,
    boundary: Option<BoundaryValues<'_>>,
    opts: AssemblyOptions,
) -> Result<Assembled> {
    let ctx = ElementContext::new(kind)?;
    let dofmap = build_dofmap(mesh, kind)?;
    let rule = quadrature::tensor_rule(opts.quad_npts)?;
    let nc = op.components();
    let condense = opts.condense && op != Operator::Stokes;
    let n_scalar = if condense { dofmap.n_edge_dofs } else { dofmap.n_dofs };
    let n = nc * n_scalar;
    let n_edges = mesh.edges.len();

    let mut boundary_values = vec![0.0; nc * n_edges];
    if let Some(g) = boundary {
        for &e in &dofmap.boundary_edges {
            let v = g(mesh.edges[e].midpoint);
            for c in 0..nc {
                boundary_values[c * n_edges + e] = v[c];
            }
        }
    }

    let mut triplets = Vec::with_capacity(mesh.n_cells() * 16 * nc * nc);
    let mut rhs = vec![0.0; n];
    let mut b_triplets = Vec::new();
    let mut v_triplets = Vec::new();
    let mut g = Vec::new();
    let mut areas = Vec::new();
    let mut condensed = Vec::with_capacity(mesh.n_cells());
    let mut cb = CellBasis::default();

    for cell in 0..mesh.n_cells() {
        let q = mesh.quad(cell);
        cell_basis(&ctx, &q, &rule, &mut cb)?;
        let full = local_from_basis(&cb, op, forcing);
        let (loc, cond) = if condense { static_condense(&full)? } else { (full, None) };
        condensed.push(cond);

        let scalar = dofmap.local_dofs(mesh, cell);
        let edges = mesh.cell_edges[cell];
        let k = loc.dim;
        // global unknown (or boundary value) of every local unknown
        let mut global: Vec<Option<usize>> = Vec::with_capacity(loc.size());
        let mut fixed: Vec<f64> = Vec::with_capacity(loc.size());
        for c in 0..nc {
            for i in 0..k {
                global.push(scalar[i].map(|d| c * n_scalar + d));
                fixed.push(if i < 4 { boundary_values[c * n_edges + edges[i]] } else { 0.0 });
            }
        }
        for (a, ga) in global.iter().enumerate() {
            let Some(ga) = *ga else { continue };
            rhs[ga] += loc.load[a];
            for (b, gb) in global.iter().enumerate() {
                let kab = loc.stiffness.get(a, b);
                match gb {
                    Some(gb) => triplets.push((ga, *gb, kab)),
                    None => rhs[ga] -= kab * fixed[b],
                }
            }
        }
        if let Some(visc) = &loc.viscous {
            for (a, ga) in global.iter().enumerate() {
                let Some(ga) = *ga else { continue };
                for (b, gb) in global.iter().enumerate() {
                    if let Some(gb) = gb {
                        v_triplets.push((ga, *gb, visc.get(a, b)));
                    }
                }
            }
        }
        if !loc.divergence.is_empty() {
            let mut gk = 0.0;
            for (a, ga) in global.iter().enumerate() {
                match *ga {
                    Some(ga) => b_triplets.push((cell, ga, loc.divergence[a])),
                    None => gk -= loc.divergence[a] * fixed[a],
                }
            }
            g.push(gk);
            areas.push(loc.area);
        }
    }
    let matrix = CsrMatrix::from_triplets(n, n, triplets);
    let mixed = areas.len() == mesh.n_cells() && mesh.n_cells() > 0;
    let divergence = mixed.then(|| CsrMatrix::from_triplets(mesh.n_cells(), n, b_triplets));
    let (viscous, penalty) = match op {
        Operator::Elasticity { mu, lambda } if mixed => (Some(CsrMatrix::from_triplets(n, n, v_triplets)), Some(lambda + mu)),
        _ => (None, None),
    };
    Ok(Assembled {
        system: SparseSystem {
            matrix,
            rhs,
            divergence,
            divergence_rhs: if mixed { g } else { Vec::new() },
            pressure_weights: if mixed { areas } else { Vec::new() },
            viscous,
            penalty,
            components: nc,
            n_scalar,
            condensed,
            boundary_values,
        },
        dofmap,
        kind,
        operator: op,
    })
}

/// A discrete field: midpoint values on every edge plus cell-moment values.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFunction {
    pub components: usize,
    /// `components × n_edges`, component-major.
    pub edge_values: Vec<f64>,
    /// `components × n_cells`; meaningful only where the cell has a cell DOF.
    pub cell_values: Vec<f64>,
}

impl DiscreteFunction {
    /// Local coefficient vector (component-major, `dim` per component).
    pub fn local_coefficients(&self, mesh: &Mesh, cell: usize, dim: usize) -> Vec<f64> {
        let ne = mesh.edges.len();
        let nk = mesh.n_cells();
        let edges = mesh.cell_edges[cell];
        let mut out = Vec::with_capacity(dim * self.components);
        for c in 0..self.components {
            for e in edges {
                out.push(self.edge_values[c * ne + e]);
            }
            if dim == 5 {
                out.push(self.cell_values[c * nk + cell]);
            }
        }
        out
    }

    /// Builds a discrete function from a full DOF vector (`components × n_dofs`).
    pub fn from_dofs(mesh: &Mesh, dofmap: &DofMap, components: usize, dofs: &[f64], boundary_values: &[f64]) -> Self {
        let ne = mesh.edges.len();
        let nk = mesh.n_cells();
        let nd = dofmap.n_dofs;
        let mut edge_values = vec![0.0; components * ne];
        let mut cell_values = vec![0.0; components * nk];
        for c in 0..components {
            for e in 0..ne {
                edge_values[c * ne + e] = match dofmap.edge_dof[e] {
                    Some(d) => dofs[c * nd + d],
                    None => boundary_values.get(c * ne + e).copied().unwrap_or(0.0),
                };
            }
            for k in 0..nk {
                if let Some(d) = dofmap.cell_dof[k] {
                    cell_values[c * nk + k] = dofs[c * nd + d];
                }
            }
        }
        DiscreteFunction {
            components,
            edge_values,
            cell_values,
        }
    }
}

impl Assembled {
    /// Full DOF vector (`components × n_dofs`) from a solution of the
    /// assembled system, recovering condensed cell unknowns.
    pub fn expand_solution(&self, mesh: &Mesh, x: &[f64]) -> Vec<f64> {
        let sys = &self.system;
        let nc = sys.components;
        let nd = self.dofmap.n_dofs;
        let ns = sys.n_scalar;
        let mut full = vec![0.0; nc * nd];
        for c in 0..nc {
            full[c * nd..c * nd + ns].copy_from_slice(&x[c * ns..(c + 1) * ns]);
        }
        let ne = mesh.edges.len();
        for (cell, cond) in sys.condensed.iter().enumerate() {
            let Some(cond) = cond else { continue };
            let scalar = self.dofmap.local_dofs(mesh, cell);
            let edges = mesh.cell_edges[cell];
            // retained local unknowns are component-major over the 4 edges
            let u_edge: Vec<f64> = cond
                .kept
                .iter()
                .enumerate()
                .map(|(idx, _)| {
                    let (c, i) = (idx / 4, idx % 4);
                    match scalar[i] {
                        Some(d) => x[c * ns + d],
                        None => sys.boundary_values[c * ne + edges[i]],
                    }
                })
                .collect();
            let uc = cond.recover(&u_edge);
            let d = self.dofmap.cell_dof[cell].expect("condensed cell has a cell DOF");
            for (c, v) in uc.into_iter().enumerate() {
                full[c * nd + d] = v;
            }
        }
        full
    }

    /// Discrete function for a solution of the assembled system.
    pub fn discrete_function(&self, mesh: &Mesh, x: &[f64]) -> DiscreteFunction {
        let full = self.expand_solution(mesh, x);
        DiscreteFunction::from_dofs(mesh, &self.dofmap, self.system.components, &full, &self.system.boundary_values)
    }
}

/// Interpolates `u` onto the element space: midpoint values on every edge
/// and, for cells with a cell DOF, the moment `∫_{K̂} (u∘F) x̂₁x̂₂`.
pub fn interpolate(
    mesh: &Mesh,
    dofmap: &DofMap,
    components: usize,
    u: &dyn Fn(Point2) -> [f64; 2],
) -> Result<DiscreteFunction> {
    let ne = mesh.edges.len();
    let nk = mesh.n_cells();
    let mut edge_values = vec![0.0; components * ne];
    let mut cell_values = vec![0.0; components * nk];
    for (e, edge) in mesh.edges.iter().enumerate() {
        let v = u(edge.midpoint);
        for c in 0..components {
            edge_values[c * ne + e] = v[c];
        }
    }
    let rule = quadrature::tensor_rule(DEFAULT_QUAD_POINTS)?;
    for k in 0..nk {
        if dofmap.cell_dof[k].is_none() {
            continue;
        }
        let dec = decompose(&mesh.quad(k))?;
        for (p, &w) in rule.points.iter().zip(&rule.weights) {
            let v = u(dec.forward(*p));
            for c in 0..components {
                cell_values[c * nk + k] += w * v[c] * p.x1 * p.x2;
            }
        }
    }
    Ok(DiscreteFunction {
        components,
        edge_values,
        cell_values,
    })
}

/// DOF vector (`n_dofs`, scalar) of the interpolant of `u`.
pub fn interpolate_midpoints(mesh: &Mesh, dofmap: &DofMap, u: &dyn Fn(Point2) -> f64) -> Result<Vec<f64>> {
    let f = interpolate(mesh, dofmap, 1, &|p| [u(p), 0.0])?;
    let ne = mesh.edges.len();
    let mut dofs = vec![0.0; dofmap.n_dofs];
    for e in 0..ne {
        if let Some(d) = dofmap.edge_dof[e] {
            dofs[d] = f.edge_values[e];
        }
    }
    for (k, cd) in dofmap.cell_dof.iter().enumerate() {
        if let Some(d) = cd {
            dofs[*d] = f.cell_values[k];
        }
    }
    Ok(dofs)
}

/// Evaluates a discrete function on the quadrature points of every cell.
///
/// `visit(cell, basis, coeffs)` receives the evaluated [`CellBasis`] and
/// the local coefficient vector.
pub fn for_each_cell(
    mesh: &Mesh,
    ctx: &ElementContext,
    rule: &Rule2D,
    u: &DiscreteFunction,
    mut visit: impl FnMut(usize, &CellBasis, &[f64]),
) -> Result<()> {
    let mut cb = CellBasis::default();
    for cell in 0..mesh.n_cells() {
        cell_basis(ctx, &mesh.quad(cell), rule, &mut cb)?;
        let coeffs = u.local_coefficients(mesh, cell, cb.dim);
        visit(cell, &cb, &coeffs);
    }
    Ok(())
}

/// Value and gradient of component `c` at quadrature point `q`.
pub fn eval_at(cb: &CellBasis, coeffs: &[f64], c: usize, q: usize) -> (f64, Point2) {
    let k = cb.dim;
    let mut v = 0.0;
    let mut g = Point2::ZERO;
    for i in 0..k {
        let a = coeffs[c * k + i];
        v += a * cb.values[q][i];
        g += cb.grads[q][i] * a;
    }
    (v, g)
}

/// Edge means (3-point Gauss) of the trace of `u` from `cell` on each of its edges.
pub fn cell_edge_means(mesh: &Mesh, ctx: &ElementContext, u: &DiscreteFunction, cell: usize, comp: usize) -> Result<[f64; 4]> {
    let q = mesh.quad(cell);
    let r = quadrature::gauss1d(3)?;
    // reference edge j runs from v̂_{j-1} to v̂_j
    let refv = crate::geometry::REF_VERTICES;
    let mut pts = Vec::with_capacity(12);
    let mut wts = Vec::with_capacity(12);
    for j in 0..4 {
        let (a, b) = (refv[(j + 3) % 4], refv[j]);
        for (&t, &w) in r.nodes.iter().zip(&r.weights) {
            pts.push(a.midpoint(b) + (b - a) * (0.5 * t));
            wts.push(w);
        }
    }
    let rule = Rule2D { points: pts, weights: wts };
    let mut cb = CellBasis::default();
    cell_basis(ctx, &q, &rule, &mut cb)?;
    let coeffs = u.local_coefficients(mesh, cell, cb.dim);
    let mut means = [0.0; 4];
    for j in 0..4 {
        for p in 0..3 {
            let idx = 3 * j + p;
            means[j] += 0.5 * r.weights[p] * eval_at(&cb, &coeffs, comp, idx).0;
        }
    }
    Ok(means)
}

/// `A⁻ᵀ` helper shared with tests.
pub fn inverse_transpose(m: &Mat2) -> Option<Mat2> {
    m.inverse().map(|i| i.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::mesh::theta_mesh;

    fn unit_square_cell() -> Quadrilateral {
        Quadrilateral::new([
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
        ])
    }

    fn skew_cell() -> Quadrilateral {
        Quadrilateral::new([
            Point2::new(1.1, 0.9),
            Point2::new(-0.2, 1.2),
            Point2::new(0.1, -0.1),
            Point2::new(0.9, 0.2),
        ])
    }

    #[test]
    fn dof_counts() {
        let m = theta_mesh(4, 0.7).unwrap();
        let np = build_dofmap(&m, ElementKind::nonparametric(0.0)).unwrap();
        assert_eq!(np.n_dofs, 24);
        let p = build_dofmap(&m, ElementKind::parametric()).unwrap();
        assert_eq!(p.n_dofs, 40);
        assert_eq!(p.n_edge_dofs, 24);
        // rectangles carry no cell DOF
        let sq = theta_mesh(4, 0.0).unwrap();
        assert_eq!(build_dofmap(&sq, ElementKind::parametric()).unwrap().n_dofs, 24);

        let single = crate::mesh::build_topology(unit_square_cell().v.to_vec(), vec![[0, 1, 2, 3]]).unwrap();
        assert_eq!(build_dofmap(&single, ElementKind::nonparametric(0.0)).unwrap().n_dofs, 0);
    }

    #[test]
    fn constants_are_in_the_kernel() {
        for kind in [ElementKind::nonparametric(0.0), ElementKind::nonparametric(1.0), ElementKind::parametric()] {
            let loc = local_matrices(&skew_cell(), kind, Operator::Laplace, None, 5).unwrap();
            // interpolant of 1: ones on midpoints, cell moment ∫x̂₁x̂₂ = 0
            let mut ones = vec![1.0; loc.dim];
            if loc.dim == 5 {
                ones[4] = 0.0;
            }
            for r in loc.stiffness.mul_vec(&ones) {
                assert!(r.abs() < 1e-12, "{kind:?}: {r}");
            }
            for i in 0..loc.size() {
                for j in 0..loc.size() {
                    assert!((loc.stiffness.get(i, j) - loc.stiffness.get(j, i)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn square_cell_matches_brute_force() {
        // ∫_{K̂} |∇ψ̂₁|² by 100×100 and 200×200 midpoint rules, Richardson-extrapolated.
        let midpoint = |n: usize| {
            let h = 2.0 / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let p = Point2::new(-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
                    let g = crate::refelem::psi_hat_grad(p, 1).unwrap();
                    acc += h * h * g.dot(g);
                }
            }
            acc
        };
        let (m100, m200) = (midpoint(100), midpoint(200));
        let brute = (4.0 * m200 - m100) / 3.0;
        let ctx = ElementContext::new(ElementKind::nonparametric(0.0)).unwrap();
        let rule = quadrature::tensor_rule(5).unwrap();
        let mut cb = CellBasis::default();
        cell_basis(&ctx, &Quadrilateral::reference(), &rule, &mut cb).unwrap();
        // ψ̂₁ = μ̃ for s̃ = 0; integrate its gradient directly
        let exact: f64 = (0..cb.weights.len())
            .map(|q| {
                let g = crate::refelem::mu_tilde_grad(rule.points[q], Point2::ZERO, 0.0);
                cb.weights[q] * g.dot(g)
            })
            .sum();
        assert!((exact - m100).abs() / exact < 1e-2);
        assert!((exact - brute).abs() / exact < 1e-6, "{exact} {brute}");
        // closed form: ∫(φ'(x))² dx·2 + ∫(φ'(y))² dy·2 = 4 ∫₋₁¹ (2t - 20t³/3)² dt
        let closed = 4.0 * (4.0 * 2.0 / 3.0 - 2.0 * 2.0 * 20.0 / 3.0 * 2.0 / 5.0 + 400.0 / 9.0 * 2.0 / 7.0);
        assert!((exact - closed).abs() < 1e-12);

        // Same cell through the full pipeline: the stiffness equals the
        // rectangle DSSY stiffness (parametric 4-DOF basis, affine map).
        let np = local_matrices(&unit_square_cell(), ElementKind::nonparametric(0.0), Operator::Laplace, None, 5).unwrap();
        let p = local_matrices(&unit_square_cell(), ElementKind::parametric(), Operator::Laplace, None, 5).unwrap();
        assert_eq!(p.dim, 4);
        for (a, b) in np.stiffness.data.iter().zip(&p.stiffness.data) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stokes_divergence_of_linear_field() {
        // interpolant of u = (x₁, 0) has divergence 1: B_loc·u = -|K|
        for kind in [ElementKind::nonparametric(0.0), ElementKind::nonparametric(1.0)] {
            let q = skew_cell();
            let loc = local_matrices(&q, kind, Operator::Stokes, None, 5).unwrap();
            let mut u = vec![0.0; 8];
            for j in 0..4 {
                u[j] = q.edge_midpoint(j).x1;
            }
            let bu: f64 = loc.divergence.iter().zip(&u).map(|(b, u)| b * u).sum();
            assert!((bu + q.area()).abs() < 1e-12, "{bu} vs {}", q.area());
            // divergence-free linear field (x₂, x₁)
            let mut w = vec![0.0; 8];
            for j in 0..4 {
                let m = q.edge_midpoint(j);
                w[j] = m.x2;
                w[4 + j] = m.x1;
            }
            let bw: f64 = loc.divergence.iter().zip(&w).map(|(b, u)| b * u).sum();
            assert!(bw.abs() < 1e-12);
        }
    }

    fn random_spd5(seed: u64) -> LocalMatrices {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<Vec<f64>> = (0..5).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut k = DenseMat::zeros(5);
        for i in 0..5 {
            for j in 0..5 {
                let v: f64 = (0..5).map(|l| g[i][l] * g[j][l]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
                k.set(i, j, v);
            }
        }
        LocalMatrices {
            dim: 5,
            components: 1,
            stiffness: k,
            viscous: None,
            load: (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            divergence: Vec::new(),
            area: 1.0,
            s_tilde: Point2::ZERO,
            det_range: (1.0, 1.0),
        }
    }

    #[test]
    fn condensation_matches_dense_solve() {
        for seed in 0..5 {
            let loc = random_spd5(seed);
            let full = dense::solve(loc.stiffness.rows(), loc.load.clone()).unwrap();
            let (red, cond) = static_condense(&loc).unwrap();
            let ue = dense::solve(red.stiffness.rows(), red.load.clone()).unwrap();
            for i in 0..4 {
                assert!((ue[i] - full[i]).abs() < 1e-12);
            }
            let uc = cond.unwrap().recover(&ue);
            assert!((uc[0] - full[4]).abs() < 1e-12);
        }
    }

    #[test]
    fn condensation_without_coupling() {
        let mut loc = random_spd5(11);
        for i in 0..4 {
            loc.stiffness.set(i, 4, 0.0);
            loc.stiffness.set(4, i, 0.0);
        }
        let (red, _) = static_condense(&loc).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(red.stiffness.get(i, j), loc.stiffness.get(i, j));
            }
        }
        let mut bad = loc.clone();
        bad.stiffness.set(4, 4, 0.0);
        assert!(matches!(static_condense(&bad), Err(Error::SingularInterior)));
    }

    #[test]
    fn interpolation_examples() {
        let m = theta_mesh(4, 0.7).unwrap();
        let dm = build_dofmap(&m, ElementKind::nonparametric(0.0)).unwrap();
        assert!(interpolate_midpoints(&m, &dm, &|_| 0.0).unwrap().iter().all(|&v| v == 0.0));
        let u = |p: Point2| (std::f64::consts::PI * p.x1).sin() * (std::f64::consts::PI * p.x2).sin();
        let dofs = interpolate_midpoints(&m, &dm, &u).unwrap();
        let e = m
            .edges
            .iter()
            .position(|e| e.midpoint.dist(Point2::new(0.5, 0.25)) < 1e-12 && !e.boundary);
        // the zigzag shifts horizontal-edge midpoints; pick a vertical edge at x=0.5
        if let Some(e) = e {
            let d = dm.edge_dof[e].unwrap();
            assert!((dofs[d] - 0.5_f64.sqrt()).abs() < 1e-15);
        }
        assert!(u(Point2::new(0.5, 0.25)) - 0.5_f64.sqrt() < 1e-15);
    }
}
