//! Lattice domains, Dirichlet data and nodal fields.
//!
//! A [`GridDomain`] is an `nx × ny` lattice (`ny = 1` for one-dimensional
//! problems) with node `(i, j)` at `origin + h·(i, j)`. Every node is
//! [`NodeKind::Interior`] (inside Ω, free), [`NodeKind::Boundary`] (carries a
//! Dirichlet value and a [`SegmentTag`]) or [`NodeKind::Exterior`] (ignored).
//! Boundary nodes are exactly the masked-out nodes among the eight lattice
//! neighbours of interior nodes, so every lattice cell touching an interior
//! node has all four corners available.
//!
//! Each non-exterior node owns a cell of measure `h^N`; the positivity
//! measure counts interior nodes only.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

/// Label of a boundary segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentTag {
    Left,
    Right,
    Bottom,
    Top,
    Inner,
    Outer,
    /// Flat part `{x_N = 0}` of a half-disk.
    Base,
    /// Curved part of a half-disk.
    Arc,
}

impl SegmentTag {
    pub const ALL: [SegmentTag; 8] = [
        SegmentTag::Left,
        SegmentTag::Right,
        SegmentTag::Bottom,
        SegmentTag::Top,
        SegmentTag::Inner,
        SegmentTag::Outer,
        SegmentTag::Base,
        SegmentTag::Arc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SegmentTag::Left => "left",
            SegmentTag::Right => "right",
            SegmentTag::Bottom => "bottom",
            SegmentTag::Top => "top",
            SegmentTag::Inner => "inner",
            SegmentTag::Outer => "outer",
            SegmentTag::Base => "base",
            SegmentTag::Arc => "arc",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|t| t.name() == name)
    }
}

impl fmt::Display for SegmentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    kinds: Vec<NodeKind>,
    tags: Vec<Option<SegmentTag>>,
    boundary: Vec<(usize, SegmentTag)>,
    interior: Vec<usize>,
    /// `complete[c]`: the cell with lower-left corner `c` has all corners.
    complete: Vec<bool>,
}

impl GridDomain {
    /// Builds a domain from an interior mask (row-major, `j * nx + i`).
    ///
    /// Boundary nodes are derived from the mask and tagged by `tagger`,
    /// which receives the node position.
    pub fn from_mask(
        nx: usize,
        ny: usize,
        h: f64,
        origin: [f64; 2],
        mask: &[bool],
        tagger: impl Fn([f64; 2]) -> SegmentTag,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(invalid("lattice dimensions must be positive"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid("grid spacing h must be positive"));
        }
        if mask.len() != nx * ny {
            return Err(invalid("mask length does not match nx * ny"));
        }
        let mut kinds = vec![NodeKind::Exterior; nx * ny];
        let mut interior = Vec::new();
        for (idx, &m) in mask.iter().enumerate() {
            if m {
                kinds[idx] = NodeKind::Interior;
                interior.push(idx);
            }
        }
        if interior.is_empty() {
            return Err(invalid("domain has no interior nodes"));
        }
        let mut tags = vec![None; nx * ny];
        let mut boundary = Vec::new();
        for idx in 0..nx * ny {
            if mask[idx] {
                continue;
            }
            let (i, j) = (idx % nx, idx / nx);
            let touches = neighbours8(nx, ny, i, j).any(|n| mask[n]);
            if touches {
                kinds[idx] = NodeKind::Boundary;
                let pos = [origin[0] + h * i as f64, origin[1] + h * j as f64];
                let tag = tagger(pos);
                tags[idx] = Some(tag);
                boundary.push((idx, tag));
            }
        }
        let mut domain = Self {
            nx,
            ny,
            h,
            origin,
            kinds,
            tags,
            boundary,
            interior,
            complete: Vec::new(),
        };
        domain.complete = (0..nx * ny).map(|c| domain.compute_complete(c)).collect();
        for &n in &domain.interior {
            if domain.neighbours4(n).next().is_none() {
                return Err(invalid("interior node without lattice neighbour"));
            }
        }
        Ok(domain)
    }

    /// Full rectangle of `nx × ny` nodes, each owning an `h`-cell, so the
    /// lattice covers `[0, nx·h] × [0, ny·h]` with nodes at cell centres.
    /// The outer frame is Dirichlet boundary tagged left/right/bottom/top.
    /// `ny = 1` gives an interval with two boundary nodes.
    pub fn build_rectangle(nx: usize, ny: usize, h: f64) -> Result<Self> {
        check_dims(nx, ny, h)?;
        let one_d = ny == 1;
        let mask: Vec<bool> = (0..nx * ny)
            .map(|idx| {
                let (i, j) = (idx % nx, idx / nx);
                let inner_x = i > 0 && i + 1 < nx;
                inner_x && (one_d || (j > 0 && j + 1 < ny))
            })
            .collect();
        let (x_hi, y_hi) = ((nx - 1) as f64, (ny - 1) as f64);
        let origin = if one_d { [0.5 * h, 0.0] } else { [0.5 * h, 0.5 * h] };
        Self::from_mask(nx, ny, h, origin, &mask, move |pos| {
            let i = ((pos[0] - origin[0]) / h).round();
            let j = ((pos[1] - origin[1]) / h).round();
            if i == 0.0 {
                SegmentTag::Left
            } else if i == x_hi {
                SegmentTag::Right
            } else if j == 0.0 {
                SegmentTag::Bottom
            } else if j == y_hi {
                SegmentTag::Top
            } else {
                SegmentTag::Outer
            }
        })
    }

    /// Rectangle whose bottom and top rows are free (natural boundary):
    /// only the left and right columns carry Dirichlet data. Data that
    /// depends on `x` alone then has a `y`-independent minimizer.
    pub fn build_strip(nx: usize, ny: usize, h: f64) -> Result<Self> {
        check_dims(nx, ny, h)?;
        let mask: Vec<bool> = (0..nx * ny)
            .map(|idx| {
                let i = idx % nx;
                i > 0 && i + 1 < nx
            })
            .collect();
        let origin = if ny == 1 { [0.5 * h, 0.0] } else { [0.5 * h, 0.5 * h] };
        let mid = origin[0] + 0.5 * h * (nx - 1) as f64;
        Self::from_mask(nx, ny, h, origin, &mask, move |pos| {
            if pos[0] < mid {
                SegmentTag::Left
            } else {
                SegmentTag::Right
            }
        })
    }

    /// Ring `inner_radius < |x| < outer_radius` centred on a lattice node.
    pub fn build_annulus(inner_radius: f64, outer_radius: f64, h: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && outer_radius > inner_radius && outer_radius.is_finite()) {
            return Err(invalid("annulus radii must satisfy 0 < inner < outer"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid("grid spacing h must be positive"));
        }
        let half = (outer_radius / h).ceil() as usize + 1;
        let n = 2 * half + 1;
        let origin = [-(half as f64) * h, -(half as f64) * h];
        let mask: Vec<bool> = (0..n * n)
            .map(|idx| {
                let r = radius_of(idx, n, h, origin);
                r > inner_radius && r < outer_radius
            })
            .collect();
        Self::from_mask(n, n, h, origin, &mask, move |pos| {
            let r = pos[0].hypot(pos[1]);
            if r <= inner_radius {
                SegmentTag::Inner
            } else {
                SegmentTag::Outer
            }
        })
    }

    /// Unit ball `|x| < 1` sampled with `m` nodes per axis (`m` odd, ≥ 5),
    /// node spacing `2 / (m - 1)`. With `one_d` it is the interval `(-1, 1)`.
    pub fn build_unit_ball(m: usize, one_d: bool) -> Result<Self> {
        if m < 5 || m.is_multiple_of(2) {
            return Err(invalid("unit-ball resolution must be odd and at least 5"));
        }
        // one extra ring of nodes outside the sphere to hold boundary values
        let h = 2.0 / (m - 1) as f64;
        let n = m + 2;
        let origin = [-1.0 - h, if one_d { 0.0 } else { -1.0 - h }];
        let ny = if one_d { 1 } else { n };
        let mask: Vec<bool> = (0..n * ny)
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                let x = origin[0] + h * i as f64;
                let y = origin[1] + h * j as f64;
                x.hypot(y) < 1.0 - 1e-12
            })
            .collect();
        Self::from_mask(n, ny, h, origin, &mask, |_| SegmentTag::Outer)
    }

    /// Half-disk `{|x| < 1, x_N > 0}` with spacing `1 / n`; the row `x_N = 0`
    /// lies on the lattice and is tagged [`SegmentTag::Base`].
    pub fn build_halfdisk(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(invalid("half-disk resolution must be at least 4"));
        }
        let h = 1.0 / n as f64;
        let nx = 2 * (n + 1) + 1;
        let ny = n + 2;
        let origin = [-((n + 1) as f64) * h, 0.0];
        let mask: Vec<bool> = (0..nx * ny)
            .map(|idx| {
                let (i, j) = (idx % nx, idx / nx);
                let x = origin[0] + h * i as f64;
                let y = h * j as f64;
                j > 0 && x.hypot(y) < 1.0 - 1e-12
            })
            .collect();
        Self::from_mask(nx, ny, h, origin, &mask, |pos| {
            if pos[1] <= 0.0 {
                SegmentTag::Base
            } else {
                SegmentTag::Arc
            }
        })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Spatial dimension: 1 when `ny == 1`, otherwise 2.
    #[inline]
    pub fn dim(&self) -> usize {
        if self.ny == 1 {
            1
        } else {
            2
        }
    }

    #[inline]
    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    /// Number of lattice nodes, including exterior ones.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure `h^N` owned by one node.
    #[inline]
    pub fn cell_measure(&self) -> f64 {
        if self.is_1d() {
            self.h
        } else {
            self.h * self.h
        }
    }

    /// `|Ω|`: non-exterior node count times `h^N`.
    pub fn area(&self) -> f64 {
        let count = self.kinds.iter().filter(|k| **k != NodeKind::Exterior).count();
        count as f64 * self.cell_measure()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        [
            self.origin[0] + self.h * i as f64,
            self.origin[1] + self.h * j as f64,
        ]
    }

    #[inline]
    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kinds[idx]
    }

    #[inline]
    pub fn is_interior(&self, idx: usize) -> bool {
        self.kinds[idx] == NodeKind::Interior
    }

    /// Interior or boundary.
    #[inline]
    pub fn is_present(&self, idx: usize) -> bool {
        self.kinds[idx] != NodeKind::Exterior
    }

    pub fn tag(&self, idx: usize) -> Option<SegmentTag> {
        self.tags[idx]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[(usize, SegmentTag)] {
        &self.boundary
    }

    pub fn interior_mask(&self) -> Vec<bool> {
        self.kinds.iter().map(|k| *k == NodeKind::Interior).collect()
    }

    /// Present (non-exterior) 4-neighbours.
    pub fn neighbours4(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(idx);
        let (nx, ny) = (self.nx, self.ny);
        let cand = [
            (i > 0).then(|| idx - 1),
            (i + 1 < nx).then(|| idx + 1),
            (j > 0).then(|| idx - nx),
            (j + 1 < ny).then(|| idx + nx),
        ];
        cand.into_iter()
            .flatten()
            .filter(move |&n| self.kinds[n] != NodeKind::Exterior)
    }

    /// Lower-left corner index of every complete cell containing `idx`
    /// (segments in 1D). A cell is complete when all its corners are present.
    pub fn cells_of(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(idx);
        let one_d = self.is_1d();
        let nx = self.nx;
        let cand = [
            (i > 0 && (one_d || j > 0)).then(|| if one_d { idx - 1 } else { idx - nx - 1 }),
            (one_d || j > 0).then(|| if one_d { idx } else { idx - nx }),
            (!one_d && i > 0).then(|| idx - 1),
            (!one_d).then_some(idx),
        ];
        cand.into_iter()
            .flatten()
            .filter(move |&c| self.cell_complete(c))
    }

    /// Whether the cell with lower-left corner `c` exists and is complete.
    #[inline]
    pub fn cell_complete(&self, c: usize) -> bool {
        self.complete.get(c).copied().unwrap_or(false)
    }

    fn compute_complete(&self, c: usize) -> bool {
        let (i, j) = self.coords(c);
        if i + 1 >= self.nx {
            return false;
        }
        if self.is_1d() {
            return self.is_present(c) && self.is_present(c + 1);
        }
        if j + 1 >= self.ny {
            return false;
        }
        let nx = self.nx;
        self.is_present(c)
            && self.is_present(c + 1)
            && self.is_present(c + nx)
            && self.is_present(c + nx + 1)
    }

    /// All complete cells (lower-left corner indices), in index order.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&c| self.cell_complete(c))
    }

    /// Whether every node within Chebyshev distance `k - 1` of `idx`
    /// exists and is interior, i.e. `idx` lies at lattice distance ≥ `k`
    /// from ∂Ω (including the lattice edge).
    pub fn is_deep(&self, idx: usize, k: usize) -> bool {
        if k == 0 {
            return true;
        }
        let (i, j) = self.coords(idx);
        let r = k - 1;
        if i < r || i + r >= self.nx {
            return false;
        }
        let (j_lo, j_hi) = if self.is_1d() {
            (0, 0)
        } else {
            if j < r || j + r >= self.ny {
                return false;
            }
            (j - r, j + r)
        };
        for jj in j_lo..=j_hi {
            for ii in i - r..=i + r {
                if !self.is_interior(self.index(ii, jj)) {
                    return false;
                }
            }
        }
        true
    }

    /// Euclidean distance from every node to ∂Ω, where ∂Ω is represented by
    /// the boundary nodes and, for free lattice edges, the edge itself.
    pub fn boundary_distance_field(&self) -> Vec<f64> {
        let pos_b: Vec<[f64; 2]> = self.boundary.iter().map(|&(n, _)| self.position(n)).collect();
        let (free_x, free_y) = (self.edge_is_free_x(), self.edge_is_free_y());
        let mut out = vec![0.0; self.len()];
        for idx in 0..self.len() {
            if !self.is_interior(idx) {
                continue;
            }
            let p = self.position(idx);
            let mut best = f64::INFINITY;
            for b in &pos_b {
                best = best.min((p[0] - b[0]).hypot(p[1] - b[1]));
            }
            // a free lattice edge sits half a cell beyond the last node
            let (i, j) = self.coords(idx);
            if free_x {
                best = best.min((i.min(self.nx - 1 - i) as f64 + 0.5) * self.h);
            }
            if free_y {
                best = best.min((j.min(self.ny - 1 - j) as f64 + 0.5) * self.h);
            }
            out[idx] = best;
        }
        out
    }

    fn edge_is_free_x(&self) -> bool {
        (0..self.ny).any(|j| {
            self.is_interior(self.index(0, j)) || self.is_interior(self.index(self.nx - 1, j))
        })
    }

    fn edge_is_free_y(&self) -> bool {
        !self.is_1d()
            && (0..self.nx).any(|i| {
                self.is_interior(self.index(i, 0)) || self.is_interior(self.index(i, self.ny - 1))
            })
    }

    /// Locates the complete cell containing `point` and its local
    /// coordinates in `[0, 1]^N`.
    pub fn locate(&self, point: [f64; 2]) -> Option<(usize, f64, f64)> {
        let fx = (point[0] - self.origin[0]) / self.h;
        if !(fx >= 0.0 && fx <= (self.nx - 1) as f64) {
            return None;
        }
        let i = (fx.floor() as usize).min(self.nx - 2);
        let tx = fx - i as f64;
        if self.is_1d() {
            let c = i;
            return self.cell_complete(c).then_some((c, tx, 0.0));
        }
        let fy = (point[1] - self.origin[1]) / self.h;
        if !(fy >= 0.0 && fy <= (self.ny - 1) as f64) {
            return None;
        }
        let j = (fy.floor() as usize).min(self.ny - 2);
        let ty = fy - j as f64;
        let c = self.index(i, j);
        self.cell_complete(c).then_some((c, tx, ty))
    }
}

fn check_dims(nx: usize, ny: usize, h: f64) -> Result<()> {
    if nx == 0 || ny == 0 {
        return Err(invalid("nx and ny must be positive"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid("grid spacing h must be positive"));
    }
    if nx < 3 || (ny != 1 && ny < 3) {
        return Err(invalid("lattice too small to contain interior nodes"));
    }
    Ok(())
}

fn radius_of(idx: usize, n: usize, h: f64, origin: [f64; 2]) -> f64 {
    let (i, j) = (idx % n, idx / n);
    (origin[0] + h * i as f64).hypot(origin[1] + h * j as f64)
}

fn neighbours8(nx: usize, ny: usize, i: usize, j: usize) -> impl Iterator<Item = usize> {
    let (i, j) = (i as isize, j as isize);
    (-1isize..=1)
        .flat_map(move |dj| (-1isize..=1).map(move |di| (i + di, j + dj)))
        .filter(move |&(a, b)| {
            (a, b) != (i, j) && a >= 0 && b >= 0 && (a as usize) < nx && (b as usize) < ny
        })
        .map(move |(a, b)| b as usize * nx + a as usize)
}

/// Positive contact region `A` with its lower bound `c₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub tag: SegmentTag,
    pub c0: f64,
}

/// Dirichlet values `φ₀`, one per boundary node in
/// [`GridDomain::boundary_nodes`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    values: Vec<f64>,
    contact: Option<Contact>,
}

impl BoundaryData {
    /// Samples `φ₀(tag, position)` at every boundary node.
    pub fn from_fn(
        domain: &GridDomain,
        contact: Option<Contact>,
        f: impl Fn(SegmentTag, [f64; 2]) -> f64,
    ) -> Result<Self> {
        let values = domain
            .boundary_nodes()
            .iter()
            .map(|&(n, tag)| f(tag, domain.position(n)))
            .collect();
        Self::from_values(domain, contact, values)
    }

    /// Piecewise-constant data; segments not listed get 0.
    pub fn from_segments(
        domain: &GridDomain,
        contact: Option<Contact>,
        segments: &[(SegmentTag, f64)],
    ) -> Result<Self> {
        Self::from_fn(domain, contact, |tag, _| {
            segments
                .iter()
                .find(|(t, _)| *t == tag)
                .map_or(0.0, |(_, v)| *v)
        })
    }

    pub fn from_values(
        domain: &GridDomain,
        contact: Option<Contact>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != domain.boundary_nodes().len() {
            return Err(invalid("one boundary value per boundary node is required"));
        }
        if let Some(c) = contact {
            if !(c.c0 > 0.0) {
                return Err(invalid("contact lower bound c0 must be positive"));
            }
        }
        for (&(_, tag), &v) in domain.boundary_nodes().iter().zip(&values) {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid("boundary values must be finite and nonnegative"));
            }
            if let Some(c) = contact {
                if tag == c.tag && v < c.c0 {
                    return Err(invalid("boundary value on the contact segment is below c0"));
                }
            }
        }
        Ok(Self { values, contact })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contact(&self) -> Option<Contact> {
        self.contact
    }

    /// Largest boundary value (1 if all are zero); the natural value scale.
    pub fn scale(&self) -> f64 {
        let m = self.values.iter().copied().fold(0.0, f64::max);
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }
}

/// Nodal values of a candidate `u` on a [`GridDomain`]. Exterior nodes hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain: Arc<GridDomain>,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(domain: Arc<GridDomain>) -> Self {
        let data = vec![0.0; domain.len()];
        Self { domain, data }
    }

    pub fn from_data(domain: Arc<GridDomain>, data: Vec<f64>) -> Result<Self> {
        if data.len() != domain.len() {
            return Err(Error::DomainMismatch);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field entries must be finite"));
        }
        Ok(Self { domain, data })
    }

    /// Evaluates `f` at every present node.
    pub fn from_fn(domain: Arc<GridDomain>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let data = (0..domain.len())
            .map(|n| if domain.is_present(n) { f(domain.position(n)) } else { 0.0 })
            .collect();
        Self { domain, data }
    }

    /// Admissible candidate: `φ₀` on the boundary, `fill` inside.
    pub fn admissible(domain: Arc<GridDomain>, bdata: &BoundaryData, fill: f64) -> Self {
        let mut field = Self::zeros(domain);
        for &n in field.domain.interior_nodes() {
            field.data[n] = fill;
        }
        field.apply_boundary(bdata);
        field
    }

    pub fn apply_boundary(&mut self, bdata: &BoundaryData) {
        for (&(n, _), &v) in self.domain.boundary_nodes().iter().zip(bdata.values()) {
            self.data[n] = v;
        }
    }

    /// Whether boundary entries equal `bdata` exactly.
    pub fn matches_boundary(&self, bdata: &BoundaryData) -> bool {
        self.domain
            .boundary_nodes()
            .iter()
            .zip(bdata.values())
            .all(|(&(n, _), &v)| self.data[n] == v)
    }

    #[inline]
    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.data[idx]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: f64) {
        self.data[idx] = v;
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            domain: self.domain.clone(),
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn positivity_measure(&self) -> f64 {
        positivity_measure(self)
    }

    /// Interior nodes with `u > 0`.
    pub fn positive_interior(&self) -> Vec<usize> {
        self.domain
            .interior_nodes()
            .iter()
            .copied()
            .filter(|&n| self.data[n] > 0.0)
            .collect()
    }

    /// Largest `|u(a) - u(b)| / h` over present 4-adjacent pairs.
    pub fn lipschitz_estimate(&self) -> f64 {
        let d = &*self.domain;
        let mut best: f64 = 0.0;
        for a in 0..d.len() {
            if !d.is_present(a) {
                continue;
            }
            for b in d.neighbours4(a) {
                if b > a {
                    best = best.max((self.data[a] - self.data[b]).abs());
                }
            }
        }
        best / d.h()
    }

    /// Bilinear (linear in 1D) interpolation; `None` outside complete cells.
    pub fn interpolate(&self, point: [f64; 2]) -> Option<f64> {
        let d = &*self.domain;
        let (c, tx, ty) = d.locate(point)?;
        if d.is_1d() {
            return Some((1.0 - tx) * self.data[c] + tx * self.data[c + 1]);
        }
        let nx = d.nx();
        let (a, b, cc, dd) = (
            self.data[c],
            self.data[c + 1],
            self.data[c + nx],
            self.data[c + nx + 1],
        );
        Some(
            (1.0 - tx) * (1.0 - ty) * a
                + tx * (1.0 - ty) * b
                + (1.0 - tx) * ty * cc
                + tx * ty * dd,
        )
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `h^N` times the number of interior nodes with `u > 0` (strictly).
pub fn positivity_measure(u: &ScalarField) -> f64 {
    let d = u.domain();
    let count = d
        .interior_nodes()
        .iter()
        .filter(|&&n| u.data[n] > 0.0)
        .count();
    count as f64 * d.cell_measure()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_4x4_has_frame_of_twelve() {
        let d = GridDomain::build_rectangle(4, 4, 0.25).unwrap();
        assert_eq!(d.len(), 16);
        assert_eq!(d.boundary_nodes().len(), 12);
        assert_eq!(d.interior_nodes().len(), 4);
        let tags: Vec<_> = d.boundary_nodes().iter().map(|b| b.1).collect();
        assert!(tags.contains(&SegmentTag::Left));
        assert!(tags.contains(&SegmentTag::Right));
        assert!(tags.contains(&SegmentTag::Bottom));
        assert!(tags.contains(&SegmentTag::Top));
    }

    #[test]
    fn interval_has_two_boundary_nodes() {
        let d = GridDomain::build_rectangle(8, 1, 0.125).unwrap();
        assert!(d.is_1d());
        assert_eq!(d.dim(), 1);
        assert_eq!(d.boundary_nodes().len(), 2);
        assert_eq!(d.boundary_nodes()[0].1, SegmentTag::Left);
        assert_eq!(d.boundary_nodes()[1].1, SegmentTag::Right);
    }

    #[test]
    fn unit_square_area_is_one() {
        let d = GridDomain::build_rectangle(64, 64, 1.0 / 64.0).unwrap();
        assert!((d.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GridDomain::build_rectangle(0, 4, 0.1).is_err());
        assert!(GridDomain::build_rectangle(4, 4, 0.0).is_err());
        assert!(GridDomain::build_rectangle(4, 4, -1.0).is_err());
        assert!(GridDomain::build_annulus(2.0, 1.0, 0.1).is_err());
        assert!(GridDomain::build_annulus(0.0, 1.0, 0.1).is_err());
    }

    fn node_near(d: &GridDomain, p: [f64; 2]) -> usize {
        (0..d.len())
            .min_by(|&a, &b| {
                let pa = d.position(a);
                let pb = d.position(b);
                let da = (pa[0] - p[0]).hypot(pa[1] - p[1]);
                let db = (pb[0] - p[0]).hypot(pb[1] - p[1]);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
    }

    #[test]
    fn annulus_membership() {
        let d = GridDomain::build_annulus(1.0, 2.0, 0.05).unwrap();
        let n = node_near(&d, [1.5, 0.0]);
        assert!(d.is_interior(n));
        let n = node_near(&d, [0.5, 0.0]);
        assert_eq!(d.kind(n), NodeKind::Exterior);
        let n = node_near(&d, [0.0, 1.0]);
        assert_eq!(d.kind(n), NodeKind::Boundary);
        assert_eq!(d.tag(n), Some(SegmentTag::Inner));
    }

    #[test]
    fn coarse_annulus_interior_by_enumeration() {
        let d = GridDomain::build_annulus(1.0, 2.0, 0.5).unwrap();
        // lattice points (0.5 a, 0.5 b) with 1 < |.| < 2: enumerate directly
        let mut expected = 0;
        for a in -5i32..=5 {
            for b in -5i32..=5 {
                let r = (0.5 * a as f64).hypot(0.5 * b as f64);
                if r > 1.0 && r < 2.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(d.interior_nodes().len(), expected);
        assert!(expected > 0);
    }

    #[test]
    fn boundary_nodes_are_masked_out_neighbours_of_interior() {
        let d = GridDomain::build_annulus(1.0, 2.0, 0.2).unwrap();
        for idx in 0..d.len() {
            let (i, j) = d.coords(idx);
            let touches =
                neighbours8(d.nx(), d.ny(), i, j).any(|n| d.kind(n) == NodeKind::Interior);
            let expect_boundary = d.kind(idx) != NodeKind::Interior && touches;
            assert_eq!(d.kind(idx) == NodeKind::Boundary, expect_boundary);
        }
    }

    #[test]
    fn positivity_counts_strictly_positive_interior() {
        let d = Arc::new(GridDomain::build_rectangle(64, 64, 1.0 / 64.0).unwrap());
        let zero = ScalarField::zeros(d.clone());
        assert_eq!(positivity_measure(&zero), 0.0);
        let one = ScalarField::from_fn(d.clone(), |_| 1.0);
        let expect = (62.0f64 / 64.0).powi(2);
        assert!((positivity_measure(&one) - expect).abs() < 1e-12);
        assert!((expect - 0.938).abs() < 1e-3);
    }

    #[test]
    fn half_interval_ramp() {
        let d = Arc::new(GridDomain::build_rectangle(128, 1, 1.0 / 128.0).unwrap());
        let u = ScalarField::from_fn(d.clone(), |p| 0.5 - p[0]);
        let m = positivity_measure(&u);
        assert!((m - 0.5).abs() <= d.h() + 1e-12, "{m}");
    }

    #[test]
    fn bilinear_interpolation_reproduces_linear_fields() {
        let d = Arc::new(GridDomain::build_rectangle(10, 10, 0.1).unwrap());
        let u = ScalarField::from_fn(d.clone(), |p| 2.0 * p[0] - 3.0 * p[1] + 1.0);
        let v = u.interpolate([0.33, 0.71]).unwrap();
        assert!((v - (2.0 * 0.33 - 3.0 * 0.71 + 1.0)).abs() < 1e-12);
        assert!(u.interpolate([2.0, 0.5]).is_none());
    }

    #[test]
    fn contact_values_must_reach_c0() {
        let d = GridDomain::build_rectangle(6, 1, 0.2).unwrap();
        let contact = Some(Contact {
            tag: SegmentTag::Left,
            c0: 1.0,
        });
        assert!(BoundaryData::from_segments(&d, contact, &[(SegmentTag::Left, 0.5)]).is_err());
        assert!(BoundaryData::from_segments(&d, contact, &[(SegmentTag::Left, 1.0)]).is_ok());
        assert!(BoundaryData::from_segments(&d, None, &[(SegmentTag::Right, -1.0)]).is_err());
    }

    #[test]
    fn strip_rows_are_free() {
        let d = GridDomain::build_strip(16, 6, 1.0 / 16.0).unwrap();
        assert_eq!(d.boundary_nodes().len(), 12);
        assert!(d.is_interior(d.index(5, 0)));
        assert!(!d.is_deep(d.index(5, 0), 2));
        assert!(d.is_deep(d.index(5, 1), 2));
    }

    #[test]
    fn halfdisk_base_row_is_boundary() {
        let d = GridDomain::build_halfdisk(16).unwrap();
        let mid = d.index(d.nx() / 2, 0);
        assert_eq!(d.tag(mid), Some(SegmentTag::Base));
        assert!(d.position(mid)[0].abs() < 1e-12);
        let above = d.index(d.nx() / 2, 1);
        assert!(d.is_interior(above));
    }

    #[test]
    fn every_cell_touching_interior_is_complete() {
        for d in [
            GridDomain::build_annulus(1.0, 2.0, 0.13).unwrap(),
            GridDomain::build_halfdisk(12).unwrap(),
            GridDomain::build_unit_ball(9, false).unwrap(),
        ] {
            for &n in d.interior_nodes() {
                assert_eq!(d.cells_of(n).count(), 4);
            }
        }
    }
}
