//! Scene in, receiver profile out.

use crate::analysis::{crossing_distances, sample_line, CrossingReport, LineProfile};
use crate::error::Result;
use crate::materials::MaterialDb;
use crate::num::Real;
use crate::scene::SceneSpec;
use crate::solver::{solve_all_bands, FieldSolution, SceneMesh, SolveOptions};

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub mesh: SceneMesh,
    pub field: FieldSolution<T>,
    pub profile: LineProfile<T>,
    pub crossings: CrossingReport,
}

/// Voxelizes, solves and samples a scene. `h` overrides the scene's mesh size.
pub fn run_scene<T: Real>(scene: &SceneSpec, db: &MaterialDb, h: Option<f64>, options: &SolveOptions) -> Result<RunOutput<T>> {
    let h = h.unwrap_or(scene.mesh_h);
    let mesh = SceneMesh::build(scene, db, h)?;
    let field = solve_all_bands::<T>(&mesh, &scene.sources, &scene.air, scene.radiation, options)?;
    let profile = sample_line(&field, &scene.receiver, &scene.air)?;
    let crossings = crossing_distances(&profile, &scene.bnl);
    Ok(RunOutput { mesh, field, profile, crossings })
}
