//! Square-lattice geometry with qubits on edges.
//!
//! Edge numbering (stable, used by every CSV/hex dump):
//!
//! * horizontal edges `h(r, c)` for `r, c` in `0..L` get index `r * L + c`;
//! * vertical edges `v(r, c)` follow at `L*L + r * W + c`, with `W = L` on the
//!   torus and `W = L - 1` on the planar patch (`r` in `0..W` there too).
//!
//! `h(r, c)` joins vertices `(r, c-1)` and `(r, c)`; `v(r, c)` joins `(r, c)`
//! and `(r+1, c)`. Face `(r, c)` is bounded by `h(r, c)`, `h(r+1, c)`,
//! `v(r, c-1)` and `v(r, c)`. Indices wrap modulo `L` on the torus.
//!
//! The planar patch keeps vertices `(r, c)` with `c < L - 1` and faces with
//! `r < L - 1`. Horizontal edges in columns `0` and `L - 1` dangle off the
//! left/right (rough) boundary of the vertex lattice and the first/last rows
//! of horizontal edges close the top/bottom boundary of the face lattice, so
//! boundary stars and boundary plaquettes have three edges.
//!
//! The tracked logical qubit uses the same supports in both geometries:
//! Z-bar is row 0 of horizontal edges, X-bar is column 0 of horizontal edges.
//! They overlap on the single edge `h(0, 0)`.

use alloc::vec::Vec;

use crate::bits::BitField;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    #[default]
    Toric,
    Planar,
}

/// Which stabilizer family a syndrome or cooling problem refers to.
///
/// Vertex stars `B_v = prod X` detect Z errors; face plaquettes `A_f = prod Z`
/// detect X errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Vertex,
    Face,
}

/// Compressed incidence lists (check -> edges, edge -> checks) for one kind.
#[derive(Clone, Debug)]
struct Incidence {
    check_offsets: Vec<u32>,
    check_edges: Vec<u32>,
    edge_offsets: Vec<u32>,
    edge_checks: Vec<u32>,
}

impl Incidence {
    fn build(stars: &[Vec<usize>], edge_count: usize) -> Self {
        let mut check_offsets = Vec::with_capacity(stars.len() + 1);
        let mut check_edges = Vec::new();
        let mut per_edge: Vec<Vec<u32>> = (0..edge_count).map(|_| Vec::new()).collect();
        check_offsets.push(0);
        for (s, star) in stars.iter().enumerate() {
            for &e in star {
                check_edges.push(e as u32);
                per_edge[e].push(s as u32);
            }
            check_offsets.push(check_edges.len() as u32);
        }
        let mut edge_offsets = Vec::with_capacity(edge_count + 1);
        let mut edge_checks = Vec::new();
        edge_offsets.push(0);
        for list in per_edge {
            edge_checks.extend(list);
            edge_offsets.push(edge_checks.len() as u32);
        }
        Self {
            check_offsets,
            check_edges,
            edge_offsets,
            edge_checks,
        }
    }

    #[inline]
    fn edges(&self, check: usize) -> &[u32] {
        &self.check_edges[self.check_offsets[check] as usize..self.check_offsets[check + 1] as usize]
    }

    #[inline]
    fn checks(&self, edge: usize) -> &[u32] {
        &self.edge_checks[self.edge_offsets[edge] as usize..self.edge_offsets[edge + 1] as usize]
    }
}

/// Row/column view of one check family, used for routing correction paths.
///
/// Checks sit on a `rows x cols` grid. A *row link* `(r, c)` is the edge
/// between checks `(r, c-1)` and `(r, c)`; a *column link* `(r, c)` is the edge
/// between `(r-1, c)` and `(r, c)`. On the planar patch, links at the open
/// sides (`c = 0`, `c = cols` for vertices; `r = 0`, `r = rows` for faces)
/// connect a check to the boundary.
#[derive(Clone, Copy, Debug)]
pub struct CheckGrid {
    pub kind: CheckKind,
    pub l: usize,
    pub rows: usize,
    pub cols: usize,
    pub toric: bool,
}

impl CheckGrid {
    fn h(&self, r: usize, c: usize) -> usize {
        r * self.l + c
    }

    fn v(&self, r: usize, c: usize) -> usize {
        let w = if self.toric { self.l } else { self.l - 1 };
        self.l * self.l + r * w + c
    }

    /// Edge between `(r, c-1)` and `(r, c)`; `c` may be `0..=cols`.
    pub fn row_link(&self, r: usize, c: usize) -> Option<usize> {
        let l = self.l;
        match (self.kind, self.toric) {
            (CheckKind::Vertex, true) => Some(self.h(r, c % l)),
            (CheckKind::Vertex, false) => (c <= self.cols).then(|| self.h(r, c)),
            (CheckKind::Face, true) => Some(self.v(r, (c + l - 1) % l)),
            (CheckKind::Face, false) => (c >= 1 && c < self.cols).then(|| self.v(r, c - 1)),
        }
    }

    /// Edge between `(r-1, c)` and `(r, c)`; `r` may be `0..=rows`.
    pub fn col_link(&self, r: usize, c: usize) -> Option<usize> {
        let l = self.l;
        match (self.kind, self.toric) {
            (CheckKind::Vertex, true) => Some(self.v((r + l - 1) % l, c)),
            (CheckKind::Vertex, false) => (r >= 1 && r < self.rows).then(|| self.v(r - 1, c)),
            (CheckKind::Face, true) => Some(self.h(r % l, c)),
            (CheckKind::Face, false) => (r <= self.rows).then(|| self.h(r, c)),
        }
    }

    #[inline]
    pub fn coords(&self, check: usize) -> (usize, usize) {
        (check / self.cols, check % self.cols)
    }

    #[inline]
    pub fn index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }
}

#[derive(Clone, Debug)]
pub struct LatticeGeometry {
    l: usize,
    boundary: Boundary,
    edge_count: usize,
    vertex_grid: CheckGrid,
    face_grid: CheckGrid,
    vertices: Incidence,
    faces: Incidence,
    z_logical: BitField,
    x_logical: BitField,
}

impl LatticeGeometry {
    pub fn new(l: usize, boundary: Boundary) -> Result<Self> {
        if l < 2 {
            return Err(Error::LatticeTooSmall(l));
        }
        let toric = boundary == Boundary::Toric;
        let (edge_count, vertex_grid, face_grid) = if toric {
            let grid = |kind| CheckGrid {
                kind,
                l,
                rows: l,
                cols: l,
                toric,
            };
            (2 * l * l, grid(CheckKind::Vertex), grid(CheckKind::Face))
        } else {
            (
                l * l + (l - 1) * (l - 1),
                CheckGrid {
                    kind: CheckKind::Vertex,
                    l,
                    rows: l,
                    cols: l - 1,
                    toric,
                },
                CheckGrid {
                    kind: CheckKind::Face,
                    l,
                    rows: l - 1,
                    cols: l,
                    toric,
                },
            )
        };

        let stars = |grid: &CheckGrid| -> Vec<Vec<usize>> {
            let mut out = Vec::with_capacity(grid.rows * grid.cols);
            for r in 0..grid.rows {
                for c in 0..grid.cols {
                    let star: Vec<usize> = [
                        grid.row_link(r, c),
                        grid.row_link(r, c + 1),
                        grid.col_link(r, c),
                        grid.col_link(r + 1, c),
                    ]
                    .into_iter()
                    .flatten()
                    .collect();
                    out.push(star);
                }
            }
            out
        };
        let vertices = Incidence::build(&stars(&vertex_grid), edge_count);
        let faces = Incidence::build(&stars(&face_grid), edge_count);

        let z_logical = BitField::from_indices(edge_count, 0..l);
        let x_logical = BitField::from_indices(edge_count, (0..l).map(|r| r * l));

        Ok(Self {
            l,
            boundary,
            edge_count,
            vertex_grid,
            face_grid,
            vertices,
            faces,
            z_logical,
            x_logical,
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn is_toric(&self) -> bool {
        self.boundary == Boundary::Toric
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertex_grid.rows * self.vertex_grid.cols
    }

    #[inline]
    pub fn face_count(&self) -> usize {
        self.face_grid.rows * self.face_grid.cols
    }

    pub fn check_count(&self, kind: CheckKind) -> usize {
        match kind {
            CheckKind::Vertex => self.vertex_count(),
            CheckKind::Face => self.face_count(),
        }
    }

    pub fn grid(&self, kind: CheckKind) -> &CheckGrid {
        match kind {
            CheckKind::Vertex => &self.vertex_grid,
            CheckKind::Face => &self.face_grid,
        }
    }

    fn incidence(&self, kind: CheckKind) -> &Incidence {
        match kind {
            CheckKind::Vertex => &self.vertices,
            CheckKind::Face => &self.faces,
        }
    }

    /// Edges of check `index`, without bounds checking beyond a debug assert.
    #[inline]
    pub fn check_edges(&self, kind: CheckKind, index: usize) -> &[u32] {
        self.incidence(kind).edges(index)
    }

    /// Checks containing `edge`, without bounds checking beyond a debug assert.
    #[inline]
    pub fn edge_checks(&self, kind: CheckKind, edge: usize) -> &[u32] {
        self.incidence(kind).checks(edge)
    }

    pub fn edges_of_vertex(&self, v: usize) -> Result<Vec<usize>> {
        self.checked_edges(CheckKind::Vertex, v)
    }

    pub fn edges_of_face(&self, f: usize) -> Result<Vec<usize>> {
        self.checked_edges(CheckKind::Face, f)
    }

    fn checked_edges(&self, kind: CheckKind, index: usize) -> Result<Vec<usize>> {
        let count = self.check_count(kind);
        if index >= count {
            return Err(Error::IndexOutOfRange {
                what: check_name(kind),
                index,
                count,
            });
        }
        Ok(self.check_edges(kind, index).iter().map(|&e| e as usize).collect())
    }

    /// Vertices whose star contains `edge` (two on the torus, one or two on
    /// the planar patch).
    pub fn adjacent_plaquettes(&self, edge: usize) -> Result<Vec<usize>> {
        self.checks_of_edge(CheckKind::Vertex, edge)
    }

    pub fn adjacent_faces(&self, edge: usize) -> Result<Vec<usize>> {
        self.checks_of_edge(CheckKind::Face, edge)
    }

    pub fn checks_of_edge(&self, kind: CheckKind, edge: usize) -> Result<Vec<usize>> {
        if edge >= self.edge_count {
            return Err(Error::IndexOutOfRange {
                what: "edge",
                index: edge,
                count: self.edge_count,
            });
        }
        Ok(self.edge_checks(kind, edge).iter().map(|&c| c as usize).collect())
    }

    /// Star (vertex) or plaquette (face) of one check as an edge mask.
    pub fn check_mask(&self, kind: CheckKind, index: usize) -> Result<BitField> {
        let edges = self.checked_edges(kind, index)?;
        Ok(BitField::from_indices(self.edge_count, edges))
    }

    /// Support of the tracked Z-bar: row 0 of horizontal edges.
    pub fn z_logical(&self) -> &BitField {
        &self.z_logical
    }

    /// Support of the tracked X-bar: column 0 of horizontal edges.
    pub fn x_logical(&self) -> &BitField {
        &self.x_logical
    }

    /// Taxicab distance between two checks of the same kind, with wraparound
    /// on the torus.
    pub fn pairwise_distance(&self, kind: CheckKind, a: usize, b: usize) -> Result<usize> {
        let count = self.check_count(kind);
        for idx in [a, b] {
            if idx >= count {
                return Err(Error::IndexOutOfRange {
                    what: check_name(kind),
                    index: idx,
                    count,
                });
            }
        }
        Ok(self.distance_unchecked(kind, a, b))
    }

    pub(crate) fn distance_unchecked(&self, kind: CheckKind, a: usize, b: usize) -> usize {
        let grid = self.grid(kind);
        let (r1, c1) = grid.coords(a);
        let (r2, c2) = grid.coords(b);
        let dr = r1.abs_diff(r2);
        let dc = c1.abs_diff(c2);
        if grid.toric {
            dr.min(grid.rows - dr) + dc.min(grid.cols - dc)
        } else {
            dr + dc
        }
    }

    /// Shortest distance from a check to the open boundary of its lattice;
    /// `None` on the torus.
    pub fn boundary_distance(&self, kind: CheckKind, check: usize) -> Option<usize> {
        let grid = self.grid(kind);
        if grid.toric {
            return None;
        }
        let (r, c) = grid.coords(check);
        Some(match kind {
            CheckKind::Vertex => (c + 1).min(grid.cols - c),
            CheckKind::Face => (r + 1).min(grid.rows - r),
        })
    }

    /// XORs into `out` the edges of the row-then-column shortest path between
    /// two checks. Ties in wrap direction go the increasing way.
    pub fn route_path(&self, kind: CheckKind, a: usize, b: usize, out: &mut BitField) {
        let grid = *self.grid(kind);
        let (r1, c1) = grid.coords(a);
        let (r2, c2) = grid.coords(b);

        // along the row: change column from c1 to c2
        let (dc_fwd, dc_back) = if grid.toric {
            ((c2 + grid.cols - c1) % grid.cols, (c1 + grid.cols - c2) % grid.cols)
        } else if c2 >= c1 {
            (c2 - c1, usize::MAX)
        } else {
            (usize::MAX, c1 - c2)
        };
        let mut c = c1;
        if dc_fwd <= dc_back {
            for _ in 0..dc_fwd {
                let next = if grid.toric { (c + 1) % grid.cols } else { c + 1 };
                out.toggle(grid.row_link(r1, c + 1).expect("interior row link"));
                c = next;
            }
        } else {
            for _ in 0..dc_back {
                out.toggle(grid.row_link(r1, c).expect("interior row link"));
                c = if grid.toric {
                    (c + grid.cols - 1) % grid.cols
                } else {
                    c - 1
                };
            }
        }
        debug_assert_eq!(c, c2);

        // along the column: change row from r1 to r2
        let (dr_fwd, dr_back) = if grid.toric {
            ((r2 + grid.rows - r1) % grid.rows, (r1 + grid.rows - r2) % grid.rows)
        } else if r2 >= r1 {
            (r2 - r1, usize::MAX)
        } else {
            (usize::MAX, r1 - r2)
        };
        let mut r = r1;
        if dr_fwd <= dr_back {
            for _ in 0..dr_fwd {
                out.toggle(grid.col_link(r + 1, c2).expect("interior column link"));
                r = if grid.toric { (r + 1) % grid.rows } else { r + 1 };
            }
        } else {
            for _ in 0..dr_back {
                out.toggle(grid.col_link(r, c2).expect("interior column link"));
                r = if grid.toric {
                    (r + grid.rows - 1) % grid.rows
                } else {
                    r - 1
                };
            }
        }
        debug_assert_eq!(r, r2);
    }

    /// XORs into `out` the shortest straight path from a check to the open
    /// boundary (left/right for vertices, top/bottom for faces; ties go
    /// left/top). No-op on the torus.
    pub fn route_to_boundary(&self, kind: CheckKind, check: usize, out: &mut BitField) {
        let grid = *self.grid(kind);
        if grid.toric {
            return;
        }
        let (r, c) = grid.coords(check);
        match kind {
            CheckKind::Vertex => {
                if c < grid.cols - c {
                    for k in 0..=c {
                        out.toggle(grid.row_link(r, k).expect("row link"));
                    }
                } else {
                    for k in c + 1..=grid.cols {
                        out.toggle(grid.row_link(r, k).expect("row link"));
                    }
                }
            }
            CheckKind::Face => {
                if r < grid.rows - r {
                    for k in 0..=r {
                        out.toggle(grid.col_link(k, c).expect("column link"));
                    }
                } else {
                    for k in r + 1..=grid.rows {
                        out.toggle(grid.col_link(k, c).expect("column link"));
                    }
                }
            }
        }
    }
}

pub(crate) fn check_name(kind: CheckKind) -> &'static str {
    match kind {
        CheckKind::Vertex => "vertex",
        CheckKind::Face => "face",
    }
}

/// Builds the lattice; rejects `L < 2`.
pub fn build_lattice(l: usize, boundary: Boundary) -> Result<LatticeGeometry> {
    LatticeGeometry::new(l, boundary)
}
