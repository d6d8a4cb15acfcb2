//! Spin-configuration snapshots as PGM images and CSV tables.
//!
//! Pixel layout: edges and checks share a doubled grid. Horizontal edge
//! `h(r, c)` sits at `(2r, 2c)`, vertical edge `v(r, c)` at `(2r + 1, 2c + 1)`,
//! vertex `(r, c)` at `(2r, 2c + 1)` and face `(r, c)` at `(2r + 1, 2c)`.
//! The torus image is `2L x 2L`; the planar one `(2L - 1) x (2L - 1)`.

use std::io::Write;

use mftp_core::{CheckKind, LatticeGeometry};

use crate::error::Result;

pub const PIXEL_UP: u8 = 255;
pub const PIXEL_DOWN: u8 = 0;
pub const PIXEL_CHECK: u8 = 160;
pub const PIXEL_DEFECT: u8 = 80;
pub const PIXEL_EMPTY: u8 = 210;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Orientation and lattice coordinates of an edge in the stable numbering.
pub fn edge_position(geom: &LatticeGeometry, edge: usize) -> (Orientation, usize, usize) {
    let l = geom.size();
    if edge < l * l {
        (Orientation::Horizontal, edge / l, edge % l)
    } else {
        let w = if geom.is_toric() { l } else { l - 1 };
        let k = edge - l * l;
        (Orientation::Vertical, k / w, k % w)
    }
}

fn edge_pixel(geom: &LatticeGeometry, edge: usize) -> (usize, usize) {
    match edge_position(geom, edge) {
        (Orientation::Horizontal, r, c) => (2 * r, 2 * c),
        (Orientation::Vertical, r, c) => (2 * r + 1, 2 * c + 1),
    }
}

fn check_pixel(geom: &LatticeGeometry, kind: CheckKind, check: usize) -> (usize, usize) {
    let (r, c) = geom.grid(kind).coords(check);
    match kind {
        CheckKind::Vertex => (2 * r, 2 * c + 1),
        CheckKind::Face => (2 * r + 1, 2 * c),
    }
}

/// Grayscale raster `(width, height, row-major pixels)` of a spin state with
/// the checks of `kind` marked, defects (negative signs) darker.
pub fn spin_image(geom: &LatticeGeometry, kind: CheckKind, signs: &[i8], spins: &[i8]) -> (usize, usize, Vec<u8>) {
    let l = geom.size();
    let side = if geom.is_toric() { 2 * l } else { 2 * l - 1 };
    let mut px = vec![PIXEL_EMPTY; side * side];
    for (e, &u) in spins.iter().enumerate() {
        let (r, c) = edge_pixel(geom, e);
        px[r * side + c] = if u < 0 { PIXEL_DOWN } else { PIXEL_UP };
    }
    for (s, &sign) in signs.iter().enumerate() {
        let (r, c) = check_pixel(geom, kind, s);
        px[r * side + c] = if sign < 0 { PIXEL_DEFECT } else { PIXEL_CHECK };
    }
    (side, side, px)
}

/// Plain (`P2`) PGM.
pub fn write_pgm<W: Write>(mut w: W, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    writeln!(w, "P2\n{width} {height}\n255")?;
    for row in pixels.chunks(width) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// `edge,orientation,row,col,u` with orientation `h` or `v`.
pub fn write_spin_csv<W: Write>(w: W, geom: &LatticeGeometry, spins: &[i8]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["edge", "orientation", "row", "col", "u"])?;
    for (e, &u) in spins.iter().enumerate() {
        let (o, r, c) = edge_position(geom, e);
        let o = match o {
            Orientation::Horizontal => "h",
            Orientation::Vertical => "v",
        };
        out.write_record([e.to_string(), o.to_owned(), r.to_string(), c.to_string(), u.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
