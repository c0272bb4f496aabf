//! Uniform voxelization of a scene into classified cells and faces.
//!
//! Blind walls are zero-thickness: they live on the faces between interior
//! and exterior cells. Every face carries a compact [`FaceTag`] that indexes
//! into a small palette of [`Surface`] records, so a 5M-cell grid costs a
//! couple of bytes per face.

use serde::Serialize;

use super::{OpenWindowModel, Point3, SceneSpec, ShellFace, WindowState};
use crate::acoustics::AirProperties;
use crate::bands::BandSpectrum;
use crate::error::{Error, Result};
use crate::materials::MaterialDb;

pub const EXTERIOR: u32 = 0;
pub const INTERIOR: u32 = 1;
pub const NO_SUBDOMAIN: u32 = u32::MAX;

const SNAP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CellClass {
    Exterior,
    Interior,
    /// Inside the occupancy absorber; not an unknown of the field.
    Solid,
}

impl CellClass {
    pub fn is_fluid(self) -> bool {
        self != CellClass::Solid
    }

    pub fn subdomain(self) -> u32 {
        match self {
            CellClass::Exterior => EXTERIOR,
            CellClass::Interior => INTERIOR,
            CellClass::Solid => NO_SUBDOMAIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(a: usize) -> Axis {
        Self::ALL[a]
    }
}

/// Uniform cell grid over the scene domain.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    pub h: f64,
    pub origin: Point3,
    pub dims: [usize; 3],
    class: Vec<CellClass>,
}

impl VoxelGrid {
    /// Grid with every cell exterior.
    pub fn uniform(h: f64, origin: Point3, dims: [usize; 3]) -> Self {
        Self {
            h,
            origin,
            dims,
            class: vec![CellClass::Exterior; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    /// Stride of a unit step along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        }
    }

    pub fn cell_center(&self, idx: usize) -> Point3 {
        let c = self.coords(idx);
        [0, 1, 2].map(|a| self.origin[a] + (c[a] as f64 + 0.5) * self.h)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn face_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn extent(&self) -> Point3 {
        [0, 1, 2].map(|a| self.dims[a] as f64 * self.h)
    }

    #[inline]
    pub fn class(&self, idx: usize) -> CellClass {
        self.class[idx]
    }

    pub fn classes(&self) -> &[CellClass] {
        &self.class
    }

    pub fn set_class(&mut self, idx: usize, class: CellClass) {
        self.class[idx] = class;
    }

    pub fn subdomain(&self, idx: usize) -> u32 {
        self.class[idx].subdomain()
    }

    /// Number of subdomain ids in use (exterior, plus interior when present).
    pub fn subdomain_count(&self) -> usize {
        if self.class.contains(&CellClass::Interior) {
            2
        } else {
            1
        }
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.class.iter().filter(|&&c| c == class).count()
    }

    /// Cell containing `p`; points on a grid plane belong to the upper cell.
    pub fn locate(&self, p: Point3) -> Option<usize> {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let t = (p[a] - self.origin[a]) / self.h;
            if !(t >= -SNAP_EPS) || t > self.dims[a] as f64 + SNAP_EPS {
                return None;
            }
            let t = (t + SNAP_EPS).floor().max(0.0) as usize;
            c[a] = t.min(self.dims[a] - 1);
        }
        Some(self.index(c[0], c[1], c[2]))
    }
}

/// What a boundary or partition face represents, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceGroup {
    Hull,
    Ground,
    Floor,
    Wall,
    Ceiling,
    Window,
    Door,
    Occupancy,
    /// Open window in absorber mode.
    Opening,
}

impl FaceGroup {
    pub fn name(self) -> &'static str {
        match self {
            FaceGroup::Hull => "hull",
            FaceGroup::Ground => "ground",
            FaceGroup::Floor => "floor",
            FaceGroup::Wall => "wall",
            FaceGroup::Ceiling => "ceiling",
            FaceGroup::Window => "window",
            FaceGroup::Door => "door",
            FaceGroup::Occupancy => "occupancy",
            FaceGroup::Opening => "opening",
        }
    }
}

/// Face data shared by many faces.
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    /// Absorbing face with a single fluid side.
    Boundary { group: FaceGroup, alpha: BandSpectrum },
    /// Zero-thickness wall between an interior and an exterior cell.
    /// `neg` is the side of the lower-index cell along the face normal.
    Partition {
        group: FaceGroup,
        alpha_neg: BandSpectrum,
        alpha_pos: BandSpectrum,
        tau: BandSpectrum,
        interior_is_neg: bool,
    },
}

impl Surface {
    pub fn group(&self) -> FaceGroup {
        match self {
            Surface::Boundary { group, .. } | Surface::Partition { group, .. } => *group,
        }
    }
}

/// Palette index of a face. The first three values are reserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaceTag(pub u16);

impl FaceTag {
    pub const FLUID: FaceTag = FaceTag(0);
    /// Hull or solid/solid face with no fluid neighbour.
    pub const INACTIVE: FaceTag = FaceTag(1);
    pub const APERTURE: FaceTag = FaceTag(2);
    const FIRST_SURFACE: u16 = 3;

    fn surface(index: usize) -> FaceTag {
        FaceTag(Self::FIRST_SURFACE + u16::try_from(index).expect("surface palette overflow"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceKind<'a> {
    Fluid,
    Inactive,
    Aperture,
    Surface(&'a Surface),
}

/// Classification of every face of a [`VoxelGrid`], hull faces included.
///
/// Faces normal to axis `a` are indexed by the cell coordinates with the
/// `a` component running over `0..=dims[a]`; face `i` lies on the low side
/// of cell `i`.
#[derive(Debug, Clone)]
pub struct FaceSet {
    dims: [usize; 3],
    tags: [Vec<FaceTag>; 3],
    surfaces: Vec<Surface>,
}

impl FaceSet {
    pub fn new(dims: [usize; 3]) -> Self {
        let tags = [0, 1, 2].map(|a| {
            let mut d = dims;
            d[a] += 1;
            vec![FaceTag::FLUID; d[0] * d[1] * d[2]]
        });
        Self { dims, tags, surfaces: Vec::new() }
    }

    #[inline]
    pub fn face_index(&self, axis: usize, c: [usize; 3]) -> usize {
        let mut d = self.dims;
        d[axis] += 1;
        c[0] + d[0] * (c[1] + d[1] * c[2])
    }

    #[inline]
    pub fn tag(&self, axis: usize, c: [usize; 3]) -> FaceTag {
        self.tags[axis][self.face_index(axis, c)]
    }

    pub fn tags(&self, axis: usize) -> &[FaceTag] {
        &self.tags[axis]
    }

    pub fn set_tag(&mut self, axis: usize, c: [usize; 3], tag: FaceTag) {
        let idx = self.face_index(axis, c);
        self.tags[axis][idx] = tag;
    }

    /// Adds a surface to the palette, reusing an identical entry.
    pub fn intern(&mut self, surface: Surface) -> FaceTag {
        let idx = match self.surfaces.iter().position(|s| *s == surface) {
            Some(i) => i,
            None => {
                self.surfaces.push(surface);
                self.surfaces.len() - 1
            }
        };
        FaceTag::surface(idx)
    }

    pub fn surfaces(&self) -> &[Surface] {
        &self.surfaces
    }

    #[inline]
    pub fn kind(&self, tag: FaceTag) -> FaceKind<'_> {
        match tag {
            FaceTag::FLUID => FaceKind::Fluid,
            FaceTag::INACTIVE => FaceKind::Inactive,
            FaceTag::APERTURE => FaceKind::Aperture,
            FaceTag(t) => FaceKind::Surface(&self.surfaces[(t - FaceTag::FIRST_SURFACE) as usize]),
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    fn count_where(&self, mut pred: impl FnMut(FaceKind<'_>) -> bool) -> usize {
        let mut per_tag = std::collections::HashMap::<FaceTag, usize>::new();
        for axis in 0..3 {
            for &t in &self.tags[axis] {
                *per_tag.entry(t).or_default() += 1;
            }
        }
        per_tag
            .into_iter()
            .filter(|(t, _)| pred(self.kind(*t)))
            .map(|(_, n)| n)
            .sum()
    }

    pub fn partition_count(&self) -> usize {
        self.count_where(|k| matches!(k, FaceKind::Surface(Surface::Partition { .. })))
    }

    pub fn aperture_count(&self) -> usize {
        self.count_where(|k| matches!(k, FaceKind::Aperture))
    }

    pub fn group_count(&self, group: FaceGroup) -> usize {
        self.count_where(|k| matches!(k, FaceKind::Surface(s) if s.group() == group))
    }
}

#[derive(Debug, Clone, Copy)]
enum Opening {
    Open,
    Window(FaceTag),
    Door(FaceTag),
}

/// Index box `[lo, hi)` of a snapped scene box.
type IndexBox = [[usize; 2]; 3];

struct Snapper {
    origin: Point3,
    h: f64,
    dims: [usize; 3],
}

impl Snapper {
    fn snap(&self, coord: f64, axis: usize, what: &str) -> Result<usize> {
        let t = (coord - self.origin[axis]) / self.h;
        let r = t.round();
        if (t - r).abs() > SNAP_EPS * t.abs().max(1.0) {
            log::info!("{what}: coordinate {coord} snapped to {}", self.origin[axis] + r * self.h);
        }
        if r < 0.0 || r > self.dims[axis] as f64 {
            return Err(Error::OutsideDomain(format!("{what} at {coord} on axis {axis}")));
        }
        Ok(r as usize)
    }

    fn snap_box(&self, b: &super::AxisBox, what: &str) -> Result<IndexBox> {
        let mut out = [[0; 2]; 3];
        for a in 0..3 {
            out[a] = [self.snap(b.min[a], a, what)?, self.snap(b.max[a], a, what)?];
            if out[a][0] >= out[a][1] {
                return Err(Error::RefinementRequired {
                    what: what.to_string(),
                    edge: b.max[a] - b.min[a],
                    h: self.h,
                });
            }
        }
        Ok(out)
    }
}

fn inside(b: &IndexBox, c: [usize; 3]) -> bool {
    (0..3).all(|a| c[a] >= b[a][0] && c[a] < b[a][1])
}

/// Caps α so absorbed plus transmitted energy does not exceed unity.
fn cap_alpha(alpha: BandSpectrum, tau: &BandSpectrum, what: &str) -> BandSpectrum {
    let mut out = alpha;
    for b in 0..out.0.len() {
        let cap = 1.0 - tau[b];
        if out[b] > cap {
            log::warn!("{what}: alpha {} + tau {:.4} exceeds 1 in band {b}; alpha capped at {cap:.4}", out[b], tau[b]);
            out[b] = cap;
        }
    }
    out
}

/// Discretizes a scene on a uniform grid of edge `h`.
///
/// Geometry is snapped to the nearest grid plane. Openings narrower than
/// `h` are rejected rather than silently dropped.
pub fn voxelize(scene: &SceneSpec, db: &MaterialDb, h: f64) -> Result<(VoxelGrid, FaceSet)> {
    scene.validate(db)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidScene(format!("mesh size must be positive, got {h}")));
    }
    let size = scene.domain.size();
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let n = (size[a] / h).round();
        if n < 1.0 {
            return Err(Error::RefinementRequired { what: "domain".into(), edge: size[a], h });
        }
        if (n * h - size[a]).abs() > SNAP_EPS * size[a] {
            log::info!("domain extent {} on axis {a} snapped to {}", size[a], n * h);
        }
        dims[a] = n as usize;
    }
    let snapper = Snapper { origin: scene.domain.min, h, dims };
    let mut grid = VoxelGrid::uniform(h, scene.domain.min, dims);
    let mut faces = FaceSet::new(dims);

    let hull = faces.intern(Surface::Boundary { group: FaceGroup::Hull, alpha: scene.outer_boundary_alpha });
    let ground = faces.intern(Surface::Boundary {
        group: FaceGroup::Ground,
        alpha: db.lookup(&scene.ground_material)?.alpha,
    });

    // Per-shell-face opening maps, indexed [u + nu * v].
    let mut openings: Vec<(ShellFace, usize, Vec<Option<Opening>>)> = Vec::new();
    let mut shell_box: Option<IndexBox> = None;
    let mut occ_box: Option<IndexBox> = None;
    let mut floor = FaceTag::INACTIVE;
    let mut occupancy = FaceTag::INACTIVE;
    let mut ceiling = FaceTag::INACTIVE;
    let mut walls = [FaceTag::INACTIVE; 2];

    if let Some(blind) = &scene.blind {
        let sb = snapper.snap_box(&blind.shell, "blind shell")?;
        if sb[0][0] == 0 || sb[1][0] == 0 || sb[0][1] == dims[0] || sb[1][1] == dims[1] || sb[2][1] >= dims[2] {
            return Err(Error::OutsideDomain("blind shell touches the domain hull after snapping".into()));
        }
        shell_box = Some(sb);
        if let Some(occ) = &blind.occupancy {
            occ_box = Some(snapper.snap_box(&occ.region, "occupancy box")?);
            occupancy = faces.intern(Surface::Boundary {
                group: FaceGroup::Occupancy,
                alpha: db.lookup(&occ.material)?.alpha,
            });
        }
        floor = faces.intern(Surface::Boundary {
            group: FaceGroup::Floor,
            alpha: db.lookup(&blind.floor_material)?.alpha,
        });

        let partition = |faces: &mut FaceSet, group, alpha_in: BandSpectrum, alpha_out: BandSpectrum, tau: BandSpectrum, interior_is_neg: bool| {
            let what = group_label(group);
            let alpha_in = cap_alpha(alpha_in, &tau, what);
            let alpha_out = cap_alpha(alpha_out, &tau, what);
            let (alpha_neg, alpha_pos) = if interior_is_neg { (alpha_in, alpha_out) } else { (alpha_out, alpha_in) };
            faces.intern(Surface::Partition { group, alpha_neg, alpha_pos, tau, interior_is_neg })
        };

        let wall_tau = db.lookup(&blind.wall_tl_material)?.tau();
        let wall_in = db.lookup(&blind.wall_indoor_material)?.alpha;
        let wall_out = db.lookup(&blind.wall_outdoor_material)?.alpha;
        // Index 0: interior on the positive side (min faces); 1: on the negative side.
        walls = [
            partition(&mut faces, FaceGroup::Wall, wall_in, wall_out, wall_tau, false),
            partition(&mut faces, FaceGroup::Wall, wall_in, wall_out, wall_tau, true),
        ];
        ceiling = partition(
            &mut faces,
            FaceGroup::Ceiling,
            db.lookup(&blind.ceiling_indoor_material)?.alpha,
            db.lookup(&blind.ceiling_outdoor_material)?.alpha,
            db.lookup(&blind.ceiling_tl_material)?.tau(),
            true,
        );

        for face in [ShellFace::XMin, ShellFace::XMax, ShellFace::YMin, ShellFace::YMax] {
            let ua = face.u_axis();
            let nu = sb[ua][1] - sb[ua][0];
            let nv = sb[2][1] - sb[2][0];
            openings.push((face, nu, vec![None; nu * nv]));
        }

        let mut place = |face: ShellFace, rect: &super::FaceRect, what: String, opening: Opening| -> Result<()> {
            if rect.short_edge() < h - SNAP_EPS {
                return Err(Error::RefinementRequired { what, edge: rect.short_edge(), h });
            }
            let ua = face.u_axis();
            let lo = blind.face_point(face, rect.u[0], rect.v[0]);
            let hi = blind.face_point(face, rect.u[1], rect.v[1]);
            let u = [snapper.snap(lo[ua], ua, &what)?, snapper.snap(hi[ua], ua, &what)?];
            let v = [snapper.snap(lo[2], 2, &what)?, snapper.snap(hi[2], 2, &what)?];
            if u[0] >= u[1] || v[0] >= v[1] {
                return Err(Error::RefinementRequired { what, edge: rect.short_edge(), h });
            }
            if u[0] < sb[ua][0] || u[1] > sb[ua][1] || v[0] < sb[2][0] || v[1] > sb[2][1] {
                return Err(Error::InvalidScene(format!("{what} leaves its face after snapping")));
            }
            let (_, nu, map) = openings.iter_mut().find(|(f, _, _)| *f == face).expect("all faces present");
            for vi in v[0]..v[1] {
                for ui in u[0]..u[1] {
                    let slot = &mut map[(ui - sb[ua][0]) + *nu * (vi - sb[2][0])];
                    if slot.is_some() {
                        return Err(Error::InvalidScene(format!("{what} overlaps another opening after snapping")));
                    }
                    *slot = Some(opening);
                }
            }
            Ok(())
        };

        for (i, w) in blind.windows.iter().enumerate() {
            let mat = db.lookup(&w.material)?;
            let opening = match (w.state, scene.open_window) {
                (WindowState::Open, OpenWindowModel::Aperture) => Opening::Open,
                (WindowState::Open, OpenWindowModel::Absorber) => Opening::Window(faces.intern(Surface::Partition {
                    group: FaceGroup::Opening,
                    alpha_neg: BandSpectrum::splat(1.0),
                    alpha_pos: BandSpectrum::splat(1.0),
                    tau: BandSpectrum::zeros(),
                    interior_is_neg: face_interior_is_neg(w.face),
                })),
                (WindowState::Closed, _) => Opening::Window(partition(
                    &mut faces,
                    FaceGroup::Window,
                    mat.alpha,
                    mat.alpha,
                    mat.tau(),
                    face_interior_is_neg(w.face),
                )),
            };
            place(w.face, &w.rect, format!("window {i}"), opening)?;
        }
        if let Some(d) = &blind.door {
            let mat = db.lookup(&d.material)?;
            let tag = partition(&mut faces, FaceGroup::Door, mat.alpha, mat.alpha, mat.tau(), face_interior_is_neg(d.face));
            place(d.face, &d.rect, "door".to_string(), Opening::Door(tag))?;
        }
    }

    // Cell classes.
    if let Some(sb) = &shell_box {
        for k in sb[2][0]..sb[2][1] {
            for j in sb[1][0]..sb[1][1] {
                for i in sb[0][0]..sb[0][1] {
                    let idx = grid.index(i, j, k);
                    let class = match &occ_box {
                        Some(ob) if inside(ob, [i, j, k]) => CellClass::Solid,
                        _ => CellClass::Interior,
                    };
                    grid.set_class(idx, class);
                }
            }
        }
    }

    // Face tags.
    for axis in 0..3 {
        let mut fd = dims;
        fd[axis] += 1;
        for k in 0..fd[2] {
            for j in 0..fd[1] {
                for i in 0..fd[0] {
                    let c = [i, j, k];
                    let n = c[axis];
                    let lo = (n > 0).then(|| {
                        let mut l = c;
                        l[axis] -= 1;
                        l
                    });
                    let hi = (n < dims[axis]).then_some(c);
                    let class_of = |cc: [usize; 3]| grid.class(grid.index(cc[0], cc[1], cc[2]));
                    let tag = match (lo, hi) {
                        (Some(l), Some(u)) => {
                            let (cl, cu) = (class_of(l), class_of(u));
                            match (cl, cu) {
                                (CellClass::Solid, CellClass::Solid) => FaceTag::INACTIVE,
                                (CellClass::Solid, CellClass::Exterior) | (CellClass::Exterior, CellClass::Solid) => {
                                    // Occupancy against the shell: outdoors sees the shell's outer side.
                                    let solid_is_neg = cl == CellClass::Solid;
                                    let solid = if solid_is_neg { l } else { u };
                                    let sb = shell_box.as_ref().expect("solid cells imply a shell");
                                    let shell = shell_face_tag(axis, solid_is_neg, solid, sb, &openings, ceiling, walls);
                                    exterior_side(&mut faces, shell, occupancy)
                                }
                                (CellClass::Solid, _) | (_, CellClass::Solid) => occupancy,
                                (a, b) if a == b => FaceTag::FLUID,
                                _ => {
                                    let interior_is_neg = cl == CellClass::Interior;
                                    let interior = if interior_is_neg { l } else { u };
                                    let sb = shell_box.as_ref().expect("interior cells imply a shell");
                                    shell_face_tag(axis, interior_is_neg, interior, sb, &openings, ceiling, walls)
                                }
                            }
                        }
                        (None, Some(cell)) | (Some(cell), None) => match class_of(cell) {
                            CellClass::Solid => FaceTag::INACTIVE,
                            CellClass::Interior if axis == 2 && n == 0 => floor,
                            CellClass::Exterior if axis == 2 && n == 0 => ground,
                            CellClass::Interior => {
                                return Err(Error::OutsideDomain("blind interior reaches the domain hull".into()))
                            }
                            CellClass::Exterior => hull,
                        },
                        (None, None) => unreachable!("every face has at least one cell"),
                    };
                    faces.set_tag(axis, c, tag);
                }
            }
        }
    }

    Ok((grid, faces))
}

/// One-sided view of a shell face from outdoors, for faces whose interior
/// side is solid.
fn exterior_side(faces: &mut FaceSet, shell: FaceTag, occupancy: FaceTag) -> FaceTag {
    let surface = match faces.kind(shell) {
        FaceKind::Surface(Surface::Partition { group, alpha_neg, alpha_pos, interior_is_neg, .. }) => Surface::Boundary {
            group: *group,
            alpha: if *interior_is_neg { *alpha_pos } else { *alpha_neg },
        },
        FaceKind::Aperture => return occupancy,
        _ => return shell,
    };
    faces.intern(surface)
}

fn group_label(group: FaceGroup) -> &'static str {
    group.name()
}

/// Interior cells sit on the negative side of max faces.
fn face_interior_is_neg(face: ShellFace) -> bool {
    face.is_max()
}

fn shell_face_tag(
    axis: usize,
    interior_is_neg: bool,
    interior: [usize; 3],
    sb: &IndexBox,
    openings: &[(ShellFace, usize, Vec<Option<Opening>>)],
    ceiling: FaceTag,
    walls: [FaceTag; 2],
) -> FaceTag {
    if axis == 2 {
        return ceiling;
    }
    let face = match (axis, interior_is_neg) {
        (0, true) => ShellFace::XMax,
        (0, false) => ShellFace::XMin,
        (_, true) => ShellFace::YMax,
        (_, false) => ShellFace::YMin,
    };
    let ua = face.u_axis();
    let (_, nu, map) = openings.iter().find(|(f, _, _)| *f == face).expect("all faces present");
    let slot = map[(interior[ua] - sb[ua][0]) + nu * (interior[2] - sb[2][0])];
    match slot {
        Some(Opening::Open) => FaceTag::APERTURE,
        Some(Opening::Window(t)) | Some(Opening::Door(t)) => t,
        None => walls[interior_is_neg as usize],
    }
}

/// Geometric and diffusion properties of one subdomain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubdomainStats {
    pub id: u32,
    pub cells: usize,
    /// m³
    pub volume: f64,
    /// Total bounding surface, m².
    pub surface: f64,
    /// Mean free path `4V/S`, m.
    pub mean_free_path: f64,
    /// Diffusion coefficient `λc/3`, m²/s.
    pub diffusion: f64,
}

/// Volume, bounding surface, mean free path and diffusion coefficient of
/// each subdomain, indexed by subdomain id.
pub fn subdomain_stats(grid: &VoxelGrid, faces: &FaceSet, air: &AirProperties) -> Result<Vec<SubdomainStats>> {
    let n_sub = grid.subdomain_count();
    let mut cells = vec![0usize; n_sub];
    for idx in 0..grid.len() {
        let s = grid.subdomain(idx);
        if s != NO_SUBDOMAIN {
            cells[s as usize] += 1;
        }
    }
    let mut face_count = vec![0usize; n_sub];
    let dims = grid.dims;
    for axis in 0..3 {
        let mut fd = dims;
        fd[axis] += 1;
        for k in 0..fd[2] {
            for j in 0..fd[1] {
                for i in 0..fd[0] {
                    let c = [i, j, k];
                    let tag = faces.tag(axis, c);
                    if tag == FaceTag::FLUID || tag == FaceTag::INACTIVE {
                        continue;
                    }
                    if c[axis] > 0 {
                        let mut l = c;
                        l[axis] -= 1;
                        let s = grid.subdomain(grid.index(l[0], l[1], l[2]));
                        if s != NO_SUBDOMAIN {
                            face_count[s as usize] += 1;
                        }
                    }
                    if c[axis] < dims[axis] {
                        let s = grid.subdomain(grid.index(i, j, k));
                        if s != NO_SUBDOMAIN {
                            face_count[s as usize] += 1;
                        }
                    }
                }
            }
        }
    }
    (0..n_sub)
        .map(|s| {
            let volume = cells[s] as f64 * grid.cell_volume();
            let surface = face_count[s] as f64 * grid.face_area();
            if surface <= 0.0 || cells[s] == 0 {
                return Err(Error::DegenerateSubdomain(s));
            }
            let mean_free_path = 4.0 * volume / surface;
            Ok(SubdomainStats {
                id: s as u32,
                cells: cells[s],
                volume,
                surface,
                mean_free_path,
                diffusion: mean_free_path * air.c / 3.0,
            })
        })
        .collect()
}

/// Number of connected fluid regions, joined through fluid and aperture faces.
pub fn fluid_components(grid: &VoxelGrid, faces: &FaceSet) -> usize {
    let mut seen = vec![false; grid.len()];
    let mut stack = Vec::new();
    let mut components = 0;
    for start in 0..grid.len() {
        if seen[start] || !grid.class(start).is_fluid() {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let c = grid.coords(idx);
            for axis in 0..3 {
                for up in [false, true] {
                    let (face_c, nb) = if up {
                        if c[axis] + 1 >= grid.dims[axis] {
                            continue;
                        }
                        let mut f = c;
                        f[axis] += 1;
                        (f, idx + grid.stride(axis))
                    } else {
                        if c[axis] == 0 {
                            continue;
                        }
                        (c, idx - grid.stride(axis))
                    };
                    let t = faces.tag(axis, face_c);
                    if (t == FaceTag::FLUID || t == FaceTag::APERTURE) && !seen[nb] && grid.class(nb).is_fluid() {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }
    }
    components
}
