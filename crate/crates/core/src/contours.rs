//! Peierls contours on the dual lattice.
//!
//! A contour is an edge-connected set of dual-lattice edges in which every
//! dual site has even degree; such sets are closed curves, possibly with
//! loops. Shapes are stored rooted: translated so that the lexicographically
//! smallest dual site (first coordinate, then second) sits at the origin.
//!
//! Dual sites are indexed by integers: site (i, j) stands for the point
//! (i + 1/2, j + 1/2). The dual edge of a primal horizontal edge
//! (a,b)-(a+1,b) is the vertical dual edge V(a, b-1); the dual edge of a
//! primal vertical edge (a,b)-(a,b+1) is the horizontal dual edge H(a-1, b).

use crate::error::OracleError;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

pub const DIR_H: u8 = 0;
pub const DIR_V: u8 = 1;

/// A dual edge anchored at its lower-left dual site.
pub type Edge = (i16, i16, u8);

fn endpoints(e: Edge) -> [(i16, i16); 2] {
    let (x, y, d) = e;
    if d == DIR_H {
        [(x, y), (x + 1, y)]
    } else {
        [(x, y), (x, y + 1)]
    }
}

/// Rooted contour shape: canonical edge set whose lexicographically smallest
/// site is the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContourShape {
    edges: Vec<Edge>,
    sites: Vec<(i16, i16)>,
}

impl ContourShape {
    /// Canonicalizes an absolute edge set into (root, shape); the edge set is
    /// not validated here.
    pub fn rooted(edges: &[(i64, i64, u8)]) -> ((i64, i64), ContourShape) {
        let mut sites: Vec<(i64, i64)> = Vec::new();
        for &(x, y, d) in edges {
            sites.push((x, y));
            sites.push(if d == DIR_H { (x + 1, y) } else { (x, y + 1) });
        }
        sites.sort_unstable();
        sites.dedup();
        let root = sites[0];
        let mut rel: Vec<Edge> = edges
            .iter()
            .map(|&(x, y, d)| ((x - root.0) as i16, (y - root.1) as i16, d))
            .collect();
        rel.sort_unstable();
        let rel_sites: Vec<(i16, i16)> = sites
            .iter()
            .map(|&(x, y)| ((x - root.0) as i16, (y - root.1) as i16))
            .collect();
        (
            root,
            ContourShape {
                edges: rel,
                sites: rel_sites,
            },
        )
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sites(&self) -> &[(i16, i16)] {
        &self.sites
    }

    /// Number of edges |gamma|.
    pub fn perimeter(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn edge_key(&self) -> Vec<(i16, i16, u8)> {
        self.edges.clone()
    }

    /// Absolute dual sites when the shape is rooted at `root`.
    pub fn absolute_sites(&self, root: (i64, i64)) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.sites
            .iter()
            .map(move |&(x, y)| (root.0 + x as i64, root.1 + y as i64))
    }

    /// Whether two rooted contours share a dual site.
    pub fn intersects(
        &self,
        root: (i64, i64),
        other: &ContourShape,
        other_root: (i64, i64),
    ) -> bool {
        // both site lists are sorted; merge-compare the translated lists
        let mut i = 0;
        let mut j = 0;
        while i < self.sites.len() && j < other.sites.len() {
            let a = (
                self.sites[i].0 as i64 + root.0,
                self.sites[i].1 as i64 + root.1,
            );
            let b = (
                other.sites[j].0 as i64 + other_root.0,
                other.sites[j].1 as i64 + other_root.1,
            );
            match a.cmp(&b) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Whether every site of the rooted contour lies in the given site set.
    pub fn confined_to(&self, root: (i64, i64), sites: &HashSet<(i64, i64)>) -> bool {
        self.absolute_sites(root).all(|s| sites.contains(&s))
    }

    pub fn encode(&self) -> String {
        self.edges
            .iter()
            .map(|&(x, y, d)| format!("{x}.{y}.{}", if d == DIR_H { 'h' } else { 'v' }))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn decode(text: &str) -> Option<ContourShape> {
        let mut edges = Vec::new();
        for part in text.split(';') {
            let mut fields = part.split('.');
            let x: i64 = fields.next()?.parse().ok()?;
            let y: i64 = fields.next()?.parse().ok()?;
            let d = match fields.next()? {
                "h" => DIR_H,
                "v" => DIR_V,
                _ => return None,
            };
            edges.push((x, y, d));
        }
        let (root, shape) = ContourShape::rooted(&edges);
        if root != (0, 0) {
            return None;
        }
        Some(shape)
    }
}

/// Checks that the edge set has even degree everywhere and is edge-connected.
pub fn is_single_contour(edges: &[Edge]) -> bool {
    if edges.is_empty() {
        return false;
    }
    let mut degree: HashMap<(i16, i16), u32> = HashMap::new();
    for &e in edges {
        for v in endpoints(e) {
            *degree.entry(v).or_insert(0) += 1;
        }
    }
    if degree.values().any(|&d| d % 2 != 0) {
        return false;
    }
    edge_components_relative(edges).len() == 1
}

fn edge_components_relative(edges: &[Edge]) -> Vec<Vec<Edge>> {
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let mut by_vertex: HashMap<(i16, i16), Vec<usize>> = HashMap::new();
    for (i, &e) in edges.iter().enumerate() {
        for v in endpoints(e) {
            by_vertex.entry(v).or_default().push(i);
        }
    }
    for group in by_vertex.values() {
        for w in group.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<Edge>> = BTreeMap::new();
    for i in 0..edges.len() {
        let r = find(&mut parent, i);
        comps.entry(r).or_default().push(edges[i]);
    }
    comps.into_values().collect()
}

/// Catalog of rooted contour shapes grouped by perimeter.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourCatalog {
    pub l_max: u32,
    by_perimeter: BTreeMap<u32, Vec<Arc<ContourShape>>>,
}

impl ContourCatalog {
    /// N_l: number of rooted shapes of perimeter l.
    pub fn count(&self, l: u32) -> u64 {
        self.by_perimeter.get(&l).map_or(0, |v| v.len() as u64)
    }

    pub fn counts(&self) -> Vec<(u32, u64)> {
        (4..=self.l_max)
            .step_by(2)
            .map(|l| (l, self.count(l)))
            .collect()
    }

    pub fn shapes(&self, l: u32) -> &[Arc<ContourShape>] {
        self.by_perimeter.get(&l).map_or(&[], |v| v.as_slice())
    }

    pub fn perimeters(&self) -> impl Iterator<Item = u32> + '_ {
        self.by_perimeter.keys().copied()
    }

    pub fn total_shapes(&self) -> usize {
        self.by_perimeter.values().map(|v| v.len()).sum()
    }

    /// Sum over shapes of perimeter l of their dual-site counts; the number
    /// of distinct contours of perimeter l through a fixed dual site.
    pub fn through_site_count(&self, l: u32) -> u64 {
        self.shapes(l).iter().map(|s| s.sites().len() as u64).sum()
    }

    /// Bounding box of site offsets over all shapes with perimeter <= l_max:
    /// (min_x, min_y, max_x, max_y).
    pub fn offset_bounds(&self) -> (i64, i64, i64, i64) {
        let mut b = (0i64, 0i64, 0i64, 0i64);
        for shapes in self.by_perimeter.values() {
            for s in shapes {
                for &(x, y) in s.sites() {
                    b.0 = b.0.min(x as i64);
                    b.1 = b.1.min(y as i64);
                    b.2 = b.2.max(x as i64);
                    b.3 = b.3.max(y as i64);
                }
            }
        }
        b
    }

    /// Shapes of perimeter l rooted somewhere such that the contour passes
    /// through the given absolute site; yields (root, shape) pairs.
    pub fn rooted_through(
        &self,
        l: u32,
        site: (i64, i64),
    ) -> impl Iterator<Item = ((i64, i64), Arc<ContourShape>)> + '_ {
        self.shapes(l).iter().flat_map(move |shape| {
            shape
                .sites()
                .iter()
                .map(move |&(dx, dy)| ((site.0 - dx as i64, site.1 - dy as i64), shape.clone()))
                .collect::<Vec<_>>()
        })
    }

    const CACHE_VERSION: &'static str = "contour-catalog-v1";

    pub fn to_cache_text(&self) -> String {
        let mut out = format!("{}\nl_max = {}\n", Self::CACHE_VERSION, self.l_max);
        for (l, shapes) in &self.by_perimeter {
            for s in shapes {
                out.push_str(&format!("{l} {}\n", s.encode()));
            }
        }
        out
    }

    pub fn from_cache_text(text: &str) -> Option<ContourCatalog> {
        let mut lines = text.lines();
        if lines.next()? != Self::CACHE_VERSION {
            return None;
        }
        let l_max: u32 = lines.next()?.strip_prefix("l_max = ")?.parse().ok()?;
        let mut by_perimeter: BTreeMap<u32, Vec<Arc<ContourShape>>> = BTreeMap::new();
        for line in lines {
            let (l, enc) = line.split_once(' ')?;
            let l: u32 = l.parse().ok()?;
            by_perimeter
                .entry(l)
                .or_default()
                .push(Arc::new(ContourShape::decode(enc)?));
        }
        Some(ContourCatalog {
            l_max,
            by_perimeter,
        })
    }
}

const L_MAX_SUPPORTED: u32 = 16;

/// Exhaustive catalog of rooted contour shapes with perimeter <= l_max.
///
/// Enumerates king-connected plaquette sets on the dual lattice and takes
/// their mod-2 boundaries, keeping those that form a single edge-connected
/// curve. Finite even edge sets are exactly the boundaries of plaquette sets,
/// so this enumeration is exhaustive.
pub fn enumerate_contours(l_max: u32) -> Result<ContourCatalog, OracleError> {
    assert!(
        l_max >= 4 && l_max % 2 == 0,
        "l_max must be even and at least 4"
    );
    if l_max > L_MAX_SUPPORTED {
        return Err(OracleError::CatalogTooLarge { l_max });
    }
    let mut by_perimeter: BTreeMap<u32, Vec<Arc<ContourShape>>> = BTreeMap::new();
    let mut seen: HashSet<Vec<Edge>> = HashSet::new();
    enumerate_polyplets(l_max, &mut |cells| {
        let boundary = cell_boundary(cells);
        if boundary.len() as u32 <= l_max && is_single_contour(&boundary) {
            let abs: Vec<(i64, i64, u8)> = boundary
                .iter()
                .map(|&(x, y, d)| (x as i64, y as i64, d))
                .collect();
            let (_, shape) = ContourShape::rooted(&abs);
            if seen.insert(shape.edge_key()) {
                by_perimeter
                    .entry(shape.perimeter())
                    .or_default()
                    .push(Arc::new(shape));
            }
        }
    });
    Ok(ContourCatalog {
        l_max,
        by_perimeter,
    })
}

/// Mod-2 boundary of a set of dual-lattice plaquettes. Cell (i, j) spans the
/// dual sites (i, j), (i+1, j), (i, j+1), (i+1, j+1).
fn cell_boundary(cells: &[(i16, i16)]) -> Vec<Edge> {
    let set: HashSet<(i16, i16)> = cells.iter().copied().collect();
    let mut boundary = Vec::new();
    for &(i, j) in cells {
        if !set.contains(&(i, j - 1)) {
            boundary.push((i, j, DIR_H));
        }
        if !set.contains(&(i, j + 1)) {
            boundary.push((i, j + 1, DIR_H));
        }
        if !set.contains(&(i - 1, j)) {
            boundary.push((i, j, DIR_V));
        }
        if !set.contains(&(i + 1, j)) {
            boundary.push((i + 1, j, DIR_V));
        }
    }
    boundary.sort_unstable();
    boundary
}

/// Redelmeier-style enumeration of fixed king-connected plaquette sets.
///
/// Anchored so the first cell is the lexicographically smallest in (row,
/// column) reading order; every fixed polyplet is visited exactly once. The
/// subtree is pruned once 2 * (occupied rows + occupied columns) exceeds
/// l_max, which lower-bounds the boundary length of every descendant.
fn enumerate_polyplets(l_max: u32, visit: &mut impl FnMut(&[(i16, i16)])) {
    // grid coordinates offset so the anchor row is 0 and columns fit
    let span = (l_max as i16) / 2 + 2;
    let mut state = PolypletState {
        cells: Vec::new(),
        blocked: HashSet::new(),
        rows: HashSet::new(),
        cols: HashSet::new(),
        l_max,
        span,
    };
    // anchor cell at (0, 0); cells below row 0, or left of column 0 in row 0,
    // are outside the canonical half-plane
    state.grow(vec![(0, 0)], visit);
}

struct PolypletState {
    cells: Vec<(i16, i16)>,
    blocked: HashSet<(i16, i16)>,
    rows: HashSet<i16>,
    cols: HashSet<i16>,
    l_max: u32,
    span: i16,
}

impl PolypletState {
    fn in_half_plane(&self, c: (i16, i16)) -> bool {
        (c.1 > 0 || (c.1 == 0 && c.0 >= 0)) && c.0.abs() <= self.span && c.1 <= self.span
    }

    fn grow(&mut self, untried: Vec<(i16, i16)>, visit: &mut impl FnMut(&[(i16, i16)])) {
        let mut untried = untried;
        let mut blocked_here = Vec::new();
        while let Some(cell) = untried.pop() {
            let new_row = !self.rows.contains(&cell.1);
            let new_col = !self.cols.contains(&cell.0);
            let bound = 2
                * (self.rows.len() + usize::from(new_row) + self.cols.len() + usize::from(new_col))
                    as u32;
            if bound <= self.l_max {
                self.cells.push(cell);
                if new_row {
                    self.rows.insert(cell.1);
                }
                if new_col {
                    self.cols.insert(cell.0);
                }
                visit(&self.cells);

                let mut next = untried.clone();
                for dx in -1..=1i16 {
                    for dy in -1..=1i16 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let n = (cell.0 + dx, cell.1 + dy);
                        if self.in_half_plane(n)
                            && !self.blocked.contains(&n)
                            && !self.cells.contains(&n)
                            && !next.contains(&n)
                            && !untried.contains(&n)
                        {
                            next.push(n);
                        }
                    }
                }
                self.grow(next, visit);

                self.cells.pop();
                if new_row {
                    self.rows.remove(&cell.1);
                }
                if new_col {
                    self.cols.remove(&cell.0);
                }
            }
            // exclude this cell from the rest of the branch
            self.blocked.insert(cell);
            blocked_here.push(cell);
        }
        for c in blocked_here {
            self.blocked.remove(&c);
        }
    }
}

/// Independent cross-check enumerator: depth-first search over closed trails
/// (edge-distinct walks) from the origin, recording every even edge set whose
/// lexicographically smallest site is the origin. Every connected even edge
/// set admits an Eulerian circuit through each of its sites, so this search
/// is exhaustive; it shares no machinery with the plaquette enumeration.
pub fn enumerate_contours_by_trails(l_max: u32) -> Result<ContourCatalog, OracleError> {
    assert!(l_max >= 4 && l_max % 2 == 0);
    if l_max > 12 {
        return Err(OracleError::CatalogTooLarge { l_max });
    }
    let mut by_perimeter: BTreeMap<u32, Vec<Arc<ContourShape>>> = BTreeMap::new();
    let mut seen: HashSet<Vec<Edge>> = HashSet::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut used: HashSet<Edge> = HashSet::new();
    walk(
        (0, 0),
        l_max,
        &mut edges,
        &mut used,
        &mut |edge_set: &[Edge]| {
            let abs: Vec<(i64, i64, u8)> = edge_set
                .iter()
                .map(|&(x, y, d)| (x as i64, y as i64, d))
                .collect();
            let (root, shape) = ContourShape::rooted(&abs);
            if root == (0, 0) && seen.insert(shape.edge_key()) {
                by_perimeter
                    .entry(shape.perimeter())
                    .or_default()
                    .push(Arc::new(shape));
            }
        },
    );
    for shapes in by_perimeter.values_mut() {
        shapes.sort_by(|a, b| a.edge_key().cmp(&b.edge_key()));
    }
    Ok(ContourCatalog {
        l_max,
        by_perimeter,
    })
}

fn walk(
    at: (i16, i16),
    budget: u32,
    edges: &mut Vec<Edge>,
    used: &mut HashSet<Edge>,
    record: &mut impl FnMut(&[Edge]),
) {
    if at == (0, 0) && !edges.is_empty() {
        let mut sorted = edges.clone();
        sorted.sort_unstable();
        record(&sorted);
        // the trail may keep extending through the origin
    }
    if budget == 0 {
        return;
    }
    let dist = (at.0.unsigned_abs() as u32) + (at.1.unsigned_abs() as u32);
    if dist > budget {
        return;
    }
    let candidates: [(Edge, (i16, i16)); 4] = [
        ((at.0, at.1, DIR_H), (at.0 + 1, at.1)),
        ((at.0 - 1, at.1, DIR_H), (at.0 - 1, at.1)),
        ((at.0, at.1, DIR_V), (at.0, at.1 + 1)),
        ((at.0, at.1 - 1, DIR_V), (at.0, at.1 - 1)),
    ];
    for (edge, next) in candidates {
        if !used.contains(&edge) {
            used.insert(edge);
            edges.push(edge);
            walk(next, budget - 1, edges, used, record);
            edges.pop();
            used.remove(&edge);
        }
    }
}

/// Spin assignment on a square volume; +1 outside.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinGrid {
    pub lo: (i64, i64),
    pub hi: (i64, i64),
    values: Vec<i8>,
}

impl SpinGrid {
    pub fn all_plus(lo: (i64, i64), hi: (i64, i64)) -> SpinGrid {
        let n = ((hi.0 - lo.0 + 1) * (hi.1 - lo.1 + 1)) as usize;
        SpinGrid {
            lo,
            hi,
            values: vec![1; n],
        }
    }

    fn index(&self, x: i64, y: i64) -> Option<usize> {
        if x < self.lo.0 || x > self.hi.0 || y < self.lo.1 || y > self.hi.1 {
            None
        } else {
            Some(((y - self.lo.1) * (self.hi.0 - self.lo.0 + 1) + (x - self.lo.0)) as usize)
        }
    }

    pub fn get(&self, x: i64, y: i64) -> i8 {
        self.index(x, y).map_or(1, |i| self.values[i])
    }

    pub fn set(&mut self, x: i64, y: i64, value: i8) {
        let i = self.index(x, y).expect("site outside volume");
        self.values[i] = value;
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (lo, hi) = (self.lo, self.hi);
        (lo.1..=hi.1).flat_map(move |y| (lo.0..=hi.0).map(move |x| (x, y)))
    }

    /// Grid decoded from the bits of `index`, sites in reading order.
    pub fn from_bits(lo: (i64, i64), hi: (i64, i64), index: u64) -> SpinGrid {
        let mut grid = SpinGrid::all_plus(lo, hi);
        let mut bit = 0;
        for y in lo.1..=hi.1 {
            for x in lo.0..=hi.0 {
                if (index >> bit) & 1 == 1 {
                    grid.set(x, y, -1);
                }
                bit += 1;
            }
        }
        grid
    }
}

/// A set of disjoint contours given by absolute rooted positions.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourSet {
    pub contours: Vec<((i64, i64), ContourShape)>,
}

impl ContourSet {
    pub fn total_length(&self) -> u64 {
        self.contours
            .iter()
            .map(|(_, s)| s.perimeter() as u64)
            .sum()
    }

    fn sorted(mut self) -> Self {
        self.contours
            .sort_by(|a, b| (a.0, a.1.edge_key()).cmp(&(b.0, b.1.edge_key())));
        self
    }
}

/// Dual edges separating disagreeing neighbor pairs, split into
/// edge-connected components.
pub fn spins_to_contours(grid: &SpinGrid) -> ContourSet {
    let mut dual_edges: Vec<(i64, i64, u8)> = Vec::new();
    let (lo, hi) = (grid.lo, grid.hi);
    // edges with at least one endpoint in the volume
    for y in lo.1 - 1..=hi.1 {
        for x in lo.0 - 1..=hi.0 {
            // horizontal primal edge (x,y)-(x+1,y): at least one endpoint inside
            let h_touches = (y >= lo.1 && y <= hi.1) && (x >= lo.0 - 1 && x <= hi.0);
            if h_touches && grid.get(x, y) != grid.get(x + 1, y) {
                dual_edges.push((x, y - 1, DIR_V));
            }
            // vertical primal edge (x,y)-(x,y+1)
            let v_touches = (x >= lo.0 && x <= hi.0) && (y >= lo.1 - 1 && y <= hi.1);
            if v_touches && grid.get(x, y) != grid.get(x, y + 1) {
                dual_edges.push((x - 1, y, DIR_H));
            }
        }
    }
    let rel: Vec<Edge> = dual_edges
        .iter()
        .map(|&(x, y, d)| (x as i16, y as i16, d))
        .collect();
    let components = edge_components_relative(&rel);
    let contours = components
        .into_iter()
        .map(|comp| {
            let abs: Vec<(i64, i64, u8)> = comp
                .iter()
                .map(|&(x, y, d)| (x as i64, y as i64, d))
                .collect();
            ContourShape::rooted(&abs)
        })
        .collect();
    ContourSet { contours }.sorted()
}

/// Unique spin assignment with + boundary whose contour set is the given
/// family; computed by parity flood fill across the dual edges.
pub fn contours_to_spins(
    contours: &ContourSet,
    lo: (i64, i64),
    hi: (i64, i64),
) -> Result<SpinGrid, OracleError> {
    let mut dual: HashSet<(i64, i64, u8)> = HashSet::new();
    for (root, shape) in &contours.contours {
        for &(x, y, d) in shape.edges() {
            if !dual.insert((root.0 + x as i64, root.1 + y as i64, d)) {
                return Err(OracleError::NotRealizable); // overlapping edges
            }
        }
    }
    // flood fill over sites of the volume plus a + ring
    let ring_lo = (lo.0 - 1, lo.1 - 1);
    let ring_hi = (hi.0 + 1, hi.1 + 1);
    let mut values: HashMap<(i64, i64), i8> = HashMap::new();
    let mut queue: Vec<(i64, i64)> = Vec::new();
    for x in ring_lo.0..=ring_hi.0 {
        for y in [ring_lo.1, ring_hi.1] {
            values.insert((x, y), 1);
            queue.push((x, y));
        }
    }
    for y in ring_lo.1..=ring_hi.1 {
        for x in [ring_lo.0, ring_hi.0] {
            values.insert((x, y), 1);
            queue.push((x, y));
        }
    }
    while let Some((x, y)) = queue.pop() {
        let v = values[&(x, y)];
        let neighbors = [
            ((x + 1, y), (x, y - 1, DIR_V)),
            ((x - 1, y), (x - 1, y - 1, DIR_V)),
            ((x, y + 1), (x - 1, y, DIR_H)),
            ((x, y - 1), (x - 1, y - 1, DIR_H)),
        ];
        for ((nx, ny), dual_edge) in neighbors {
            if nx < ring_lo.0 || nx > ring_hi.0 || ny < ring_lo.1 || ny > ring_hi.1 {
                continue;
            }
            // only primal edges with an endpoint in the volume carry contours
            let touches = point_in(lo, hi, (x, y)) || point_in(lo, hi, (nx, ny));
            let crossed = touches && dual.contains(&dual_edge);
            let nv = if crossed { -v } else { v };
            match values.get(&(nx, ny)) {
                Some(&existing) => {
                    if existing != nv {
                        return Err(OracleError::NotRealizable);
                    }
                }
                None => {
                    values.insert((nx, ny), nv);
                    queue.push((nx, ny));
                }
            }
        }
    }
    let mut grid = SpinGrid::all_plus(lo, hi);
    for (x, y) in grid.sites().collect::<Vec<_>>() {
        grid.set(x, y, values[&(x, y)]);
    }
    // outside sites must remain +
    for x in ring_lo.0..=ring_hi.0 {
        for y in ring_lo.1..=ring_hi.1 {
            if !point_in(lo, hi, (x, y)) && values.get(&(x, y)) == Some(&-1) {
                return Err(OracleError::NotRealizable);
            }
        }
    }
    // the reconstruction must reproduce the contour family exactly
    if spins_to_contours(&grid) != contours.clone().sorted() {
        return Err(OracleError::NotRealizable);
    }
    Ok(grid)
}

fn point_in(lo: (i64, i64), hi: (i64, i64), p: (i64, i64)) -> bool {
    p.0 >= lo.0 && p.0 <= hi.0 && p.1 >= lo.1 && p.1 <= hi.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_is_the_only_perimeter_four_shape() {
        let catalog = enumerate_contours(4).unwrap();
        assert_eq!(catalog.count(4), 1);
        let shape = &catalog.shapes(4)[0];
        assert_eq!(shape.perimeter(), 4);
        assert_eq!(shape.sites().len(), 4);
    }

    #[test]
    fn perimeter_six_has_two_domino_shapes() {
        let catalog = enumerate_contours(6).unwrap();
        assert_eq!(catalog.count(4), 1);
        assert_eq!(catalog.count(6), 2);
        assert_eq!(catalog.count(5), 0);
    }

    #[test]
    fn odd_and_small_perimeters_are_empty() {
        let catalog = enumerate_contours(8).unwrap();
        for l in [1, 2, 3, 5, 7] {
            assert_eq!(catalog.count(l), 0, "l = {l}");
        }
    }

    #[test]
    fn independent_enumerators_agree_up_to_twelve() {
        let a = enumerate_contours(12).unwrap();
        let b = enumerate_contours_by_trails(12).unwrap();
        for l in (4..=12).step_by(2) {
            assert_eq!(a.count(l), b.count(l), "N_{l}");
            let mut ka: Vec<_> = a.shapes(l).iter().map(|s| s.edge_key()).collect();
            let mut kb: Vec<_> = b.shapes(l).iter().map(|s| s.edge_key()).collect();
            ka.sort();
            kb.sort();
            assert_eq!(ka, kb, "shape sets at l = {l}");
        }
    }

    #[test]
    fn known_counts() {
        let catalog = enumerate_contours(10).unwrap();
        // perimeter 8: two diagonal plaquette pairs, two straight trominoes,
        // four L trominoes, one 2x2 square
        assert_eq!(catalog.count(8), 9);
        assert!(catalog.count(10) > catalog.count(8));
    }

    #[test]
    fn single_flipped_spin_produces_unit_square() {
        let mut grid = SpinGrid::all_plus((-1, -1), (1, 1));
        grid.set(0, 0, -1);
        let contours = spins_to_contours(&grid);
        assert_eq!(contours.contours.len(), 1);
        assert_eq!(contours.contours[0].1.perimeter(), 4);
        assert_eq!(contours.contours[0].0, (-1, -1));
    }

    #[test]
    fn domino_of_flipped_spins_produces_six_edges() {
        let mut grid = SpinGrid::all_plus((0, 0), (3, 3));
        grid.set(1, 1, -1);
        grid.set(2, 1, -1);
        let contours = spins_to_contours(&grid);
        assert_eq!(contours.contours.len(), 1);
        assert_eq!(contours.contours[0].1.perimeter(), 6);
    }

    #[test]
    fn all_plus_gives_empty_contour_set() {
        let grid = SpinGrid::all_plus((0, 0), (2, 2));
        assert!(spins_to_contours(&grid).contours.is_empty());
    }

    #[test]
    fn empty_contour_set_gives_all_plus() {
        let grid = contours_to_spins(&ContourSet { contours: vec![] }, (0, 0), (2, 2)).unwrap();
        assert_eq!(grid, SpinGrid::all_plus((0, 0), (2, 2)));
    }

    #[test]
    fn round_trip_on_all_three_by_three_assignments() {
        for index in 0..(1u64 << 9) {
            let grid = SpinGrid::from_bits((0, 0), (2, 2), index);
            let contours = spins_to_contours(&grid);
            let back = contours_to_spins(&contours, (0, 0), (2, 2)).unwrap();
            assert_eq!(grid, back, "assignment {index}");
        }
    }

    #[test]
    fn four_edge_square_inverts_to_single_flip() {
        let mut grid = SpinGrid::all_plus((0, 0), (2, 2));
        grid.set(1, 1, -1);
        let contours = spins_to_contours(&grid);
        let back = contours_to_spins(&contours, (0, 0), (2, 2)).unwrap();
        assert_eq!(back.get(1, 1), -1);
        assert_eq!(
            back.sites().filter(|&(x, y)| back.get(x, y) == -1).count(),
            1
        );
    }

    #[test]
    fn overlapping_contours_are_rejected() {
        let mut grid = SpinGrid::all_plus((0, 0), (2, 2));
        grid.set(1, 1, -1);
        let one = spins_to_contours(&grid);
        let double = ContourSet {
            contours: vec![one.contours[0].clone(), one.contours[0].clone()],
        };
        assert_eq!(
            contours_to_spins(&double, (0, 0), (2, 2)),
            Err(OracleError::NotRealizable)
        );
    }

    #[test]
    fn catalog_cache_round_trips() {
        let catalog = enumerate_contours(8).unwrap();
        let text = catalog.to_cache_text();
        let loaded = ContourCatalog::from_cache_text(&text).unwrap();
        assert_eq!(loaded.l_max, 8);
        for l in (4..=8).step_by(2) {
            assert_eq!(loaded.count(l), catalog.count(l));
        }
    }

    #[test]
    fn shape_encoding_round_trips() {
        let catalog = enumerate_contours(8).unwrap();
        for l in (4..=8).step_by(2) {
            for shape in catalog.shapes(l) {
                let decoded = ContourShape::decode(&shape.encode()).unwrap();
                assert_eq!(&decoded, shape.as_ref());
            }
        }
    }
}
