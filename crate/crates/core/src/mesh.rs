//! Structured quadrilateral meshes of the unit square and their edge topology.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{convexity_margin, decompose, Point2, Quadrilateral};

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub nodes: (usize, usize),
    pub midpoint: Point2,
    pub boundary: bool,
    /// Incident cells; the second entry is `None` on the boundary.
    pub cells: (usize, Option<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point2>,
    /// Node indices per cell, ordered like the reference vertices
    /// `(1,1), (-1,1), (-1,-1), (1,-1)` (counter-clockwise from the
    /// north-east corner on structured grids).
    pub cells: Vec<[usize; 4]>,
    pub edges: Vec<Edge>,
    /// `cell_edges[k][j]` is the global index of local edge `j`, which
    /// joins local vertices `j-1` and `j`.
    pub cell_edges: Vec<[usize; 4]>,
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn quad(&self, cell: usize) -> Quadrilateral {
        let c = self.cells[cell];
        Quadrilateral::new([self.nodes[c[0]], self.nodes[c[1]], self.nodes[c[2]], self.nodes[c[3]]])
    }

    pub fn quads(&self) -> impl Iterator<Item = Quadrilateral> + '_ {
        (0..self.n_cells()).map(|k| self.quad(k))
    }

    pub fn n_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| !e.boundary).count()
    }

    /// Mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.quads().map(|q| q.diameter()).fold(0.0, f64::max)
    }

    /// Plain-text serialization (`quadmesh v1` format).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "quadmesh v1 {} {}", self.nodes.len(), self.cells.len());
        for p in &self.nodes {
            let _ = writeln!(s, "n {:.16e} {:.16e}", p.x1, p.x2);
        }
        for c in &self.cells {
            let _ = writeln!(s, "c {} {} {} {}", c[0], c[1], c[2], c[3]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let bad = |msg: String| Error::MeshFormat(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "quadmesh" || h[1] != "v1" {
            return Err(bad(format!("bad header: {header:?}")));
        }
        let parse_usize = |t: &str| t.parse::<usize>().map_err(|e| bad(format!("{t:?}: {e}")));
        let parse_f64 = |t: &str| t.parse::<f64>().map_err(|e| bad(format!("{t:?}: {e}")));
        let n_nodes = parse_usize(h[2])?;
        let n_cells = parse_usize(h[3])?;
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut cells = Vec::with_capacity(n_cells);
        for line in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            match (t[0], t.len()) {
                ("n", 3) => nodes.push(Point2::new(parse_f64(t[1])?, parse_f64(t[2])?)),
                ("c", 5) => cells.push([
                    parse_usize(t[1])?,
                    parse_usize(t[2])?,
                    parse_usize(t[3])?,
                    parse_usize(t[4])?,
                ]),
                _ => return Err(bad(format!("unrecognized line: {line:?}"))),
            }
        }
        if nodes.len() != n_nodes || cells.len() != n_cells {
            return Err(bad(format!(
                "header announces {n_nodes} nodes / {n_cells} cells, found {} / {}",
                nodes.len(),
                cells.len()
            )));
        }
        build_topology(nodes, cells)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Derives edges, midpoints and boundary flags from cell connectivity.
pub fn build_topology(nodes: Vec<Point2>, cells: Vec<[usize; 4]>) -> Result<Mesh> {
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(2 * cells.len() + 8);
    let mut edges: Vec<Edge> = Vec::new();
    let mut cell_edges = Vec::with_capacity(cells.len());
    for (k, c) in cells.iter().enumerate() {
        for &i in c {
            if i >= nodes.len() {
                return Err(Error::MeshFormat(format!("cell {k} references missing node {i}")));
            }
        }
        let mut local = [0; 4];
        for j in 0..4 {
            let (a, b) = (c[(j + 3) % 4], c[j]);
            let key = (a.min(b), a.max(b));
            let idx = match lookup.get(&key) {
                Some(&idx) => {
                    let e = &mut edges[idx];
                    if e.cells.1.is_some() {
                        return Err(Error::NonManifold(key.0, key.1));
                    }
                    e.cells.1 = Some(k);
                    e.boundary = false;
                    idx
                }
                None => {
                    edges.push(Edge {
                        nodes: key,
                        midpoint: nodes[a].midpoint(nodes[b]),
                        boundary: true,
                        cells: (k, None),
                    });
                    lookup.insert(key, edges.len() - 1);
                    edges.len() - 1
                }
            };
            local[j] = idx;
        }
        cell_edges.push(local);
    }
    Ok(Mesh {
        nodes,
        cells,
        edges,
        cell_edges,
    })
}

fn grid_cells(n: usize) -> Vec<[usize; 4]> {
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push([id(i + 1, j + 1), id(i, j + 1), id(i, j), id(i + 1, j)]);
        }
    }
    cells
}

/// Uniform trapezoidal mesh of `(0,1)^2` with `n × n` cells, `n` even.
///
/// Horizontal grid lines stay straight. Even columns of nodes are flat; the
/// nodes of every odd column `i` are moved horizontally by `±θh` (`+` on
/// even rows), so all cells are trapezoids with horizontal parallel sides
/// of lengths `(1-θ)h` and `(1+θ)h`, congruent up to reflection. `θ = 0`
/// gives squares and cells degenerate to triangles as `θ → 1`.
pub fn theta_mesh(n: usize, theta: f64) -> Result<Mesh> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::BadParam(format!("n must be even and at least 2, got {n}")));
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::BadParam(format!("theta must lie in [0, 1), got {theta}")));
    }
    let nf = n as f64;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let delta = if i % 2 == 1 {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * theta / nf
            } else {
                0.0
            };
            nodes.push(Point2::new(i as f64 / nf + delta, j as f64 / nf));
        }
    }
    build_topology(nodes, grid_cells(n))
}

fn cell_is_convex(q: &Quadrilateral) -> bool {
    match decompose(q) {
        Ok(dec) => dec.a.det() > 0.0 && convexity_margin(dec.s_tilde) > 0.0,
        Err(_) => false,
    }
}

pub const RESAMPLE_ATTEMPTS: usize = 100;

/// Uniform grid with every interior node displaced by an independent
/// uniform sample from `[-α/n, α/n]^2`. Deterministic for a fixed seed.
pub fn random_mesh(n: usize, alpha: f64, seed: u64) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::BadParam(format!("n must be at least 2, got {n}")));
    }
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::BadParam(format!("alpha must lie in [0, 0.5), got {alpha}")));
    }
    let nf = n as f64;
    let amp = alpha / nf;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| {
        if amp == 0.0 {
            Point2::ZERO
        } else {
            Point2::new(rng.gen_range(-amp..=amp), rng.gen_range(-amp..=amp))
        }
    };
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let base = Point2::new(i as f64 / nf, j as f64 / nf);
            let interior = i > 0 && i < n && j > 0 && j < n;
            nodes.push(if interior { base + sample(&mut rng) } else { base });
        }
    }
    let cells = grid_cells(n);
    let quad = |nodes: &[Point2], c: &[usize; 4]| {
        Quadrilateral::new([nodes[c[0]], nodes[c[1]], nodes[c[2]], nodes[c[3]]])
    };
    // Resample the interior nodes of non-convex cells, sweeping until no
    // cell is left; a resampled node may spoil a neighbour already visited.
    let mut attempts = vec![0; cells.len()];
    loop {
        let mut clean = true;
        for (k, c) in cells.iter().enumerate() {
            while !cell_is_convex(&quad(&nodes, c)) {
                clean = false;
                if attempts[k] == RESAMPLE_ATTEMPTS {
                    return Err(Error::ConvexityFailure { attempts: attempts[k] });
                }
                attempts[k] += 1;
                let (i, j) = (k % n, k / n);
                for (ii, jj) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                    if ii > 0 && ii < n && jj > 0 && jj < n {
                        nodes[id(ii, jj)] = Point2::new(ii as f64 / nf, jj as f64 / nf) + sample(&mut rng);
                    }
                }
            }
        }
        if clean {
            break;
        }
    }
    build_topology(nodes, cells)
}
