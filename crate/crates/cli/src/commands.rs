use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wgmodes::crossval::{compare_spectra, trend_from_solutions, ComparisonReport, ConvergenceReport};
use wgmodes::mesh::{export_mesh, import_mesh, Mesh, Point2};
use wgmodes::vtk::mode_vtk;
use wgmodes::{
    generate_annulus, generate_rectangle, generate_rectilinear_region, mode_fields, solve_modes, Formulation, ModeSolution,
    ValidationReport, Verdict,
};

use crate::config::{Geometry, RunConfig};
use crate::CliError;

fn lib<E: Into<wgmodes::Error>>(e: E) -> CliError {
    CliError::Lib(e.into())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes to `out/name`, or to stdout without an output directory.
fn emit(out: Option<&Path>, name: &str, content: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => write(&dir.join(name), content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialization");
    s.push('\n');
    s
}

fn points(v: &[[f64; 2]]) -> Vec<Point2> {
    v.iter().map(|p| Point2::new(p[0], p[1])).collect()
}

fn base_mesh(cfg: &RunConfig) -> Result<Mesh, CliError> {
    let geometry = cfg
        .geometry
        .as_ref()
        .ok_or(CliError::Input("configuration has no geometry".into()))?;
    match geometry {
        Geometry::Rectangle { a, b, nx, ny } => generate_rectangle(*a, *b, *nx, *ny).map_err(lib),
        Geometry::Annulus { r1, r2, nr, ntheta } => generate_annulus(*r1, *r2, *nr, *ntheta).map_err(lib),
        Geometry::Polygon { vertices, holes, h } => {
            let holes: Vec<Vec<Point2>> = holes.iter().map(|h| points(h)).collect();
            generate_rectilinear_region(&points(vertices), &holes, *h).map_err(lib)
        }
        Geometry::File { path } => import_mesh(&read(&cfg.resolve(path))?).map_err(lib),
    }
}

fn family(cfg: &RunConfig) -> Result<Vec<Mesh>, CliError> {
    Ok(wgmodes::refinement_family(&base_mesh(cfg)?, cfg.refinements))
}

fn require_valid(cfg: &RunConfig) -> Result<(), CliError> {
    let r = cfg.medium.validate();
    if r.verdict != Verdict::IndependentModes {
        return Err(CliError::NotGuaranteed(format!(
            "medium does not guarantee independent TE/TM modes (condition I ok: {}, condition II residual {:e})",
            r.condition_i.ok, r.condition_ii_residual
        )));
    }
    Ok(())
}

pub fn medium_check(config: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let report: ValidationReport = cfg.medium.validate();
    print!("{}", json(&report));
    require_valid(&cfg)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MeshInfo {
    pub nodes: usize,
    pub edges: usize,
    pub triangles: usize,
    pub interior_nodes: usize,
    pub interior_edges: usize,
    pub boundary_components: usize,
    pub euler_characteristic: i64,
    pub h: f64,
    pub area: f64,
}

fn info(m: &Mesh) -> MeshInfo {
    MeshInfo {
        nodes: m.num_nodes(),
        edges: m.num_edges(),
        triangles: m.num_triangles(),
        interior_nodes: m.num_interior_nodes(),
        interior_edges: m.num_interior_edges(),
        boundary_components: m.boundary_components(),
        euler_characteristic: m.euler_characteristic(),
        h: m.h(),
        area: m.total_area(),
    }
}

pub fn mesh_gen(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let fam = family(&cfg)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let mut infos = Vec::new();
    for (level, m) in fam.iter().enumerate() {
        write(&dir.join(format!("mesh_level{level}.txt")), &export_mesh(m))?;
        infos.push(info(m));
    }
    print!("{}", json(&infos));
    Ok(())
}

pub fn mesh_refine(mesh: &Path, levels: usize, output: &Path) -> Result<(), CliError> {
    let mut m = import_mesh(&read(mesh)?).map_err(lib)?;
    for _ in 0..levels {
        m = m.refine_uniform();
    }
    write(output, &export_mesh(&m))?;
    print!("{}", json(&info(&m)));
    Ok(())
}

pub fn mesh_info(mesh: &Path) -> Result<(), CliError> {
    let m = import_mesh(&read(mesh)?).map_err(lib)?;
    print!("{}", json(&info(&m)));
    Ok(())
}

fn solve_one(cfg: &RunConfig, f: Formulation, mesh: &Mesh) -> Result<ModeSolution, CliError> {
    solve_modes(f, mesh, &cfg.medium, cfg.num_modes, &cfg.solver).map_err(lib)
}

pub fn solve(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    require_valid(&cfg)?;
    let fam = family(&cfg)?;
    let mut csv = String::from("formulation,mesh_h,mode_index,k_t_rad_per_m,is_tem\n");
    for &f in &cfg.formulations {
        for mesh in &fam {
            let s = solve_one(&cfg, f, mesh)?;
            for (i, (k, tem)) in s.cutoffs.iter().zip(&s.is_tem).enumerate() {
                let _ = writeln!(csv, "{},{:.16e},{},{:.16e},{}", f.name(), s.mesh_h, i, k, tem);
            }
        }
    }
    emit(out, &cfg.output.csv, &csv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelComparison {
    pub level: usize,
    pub mesh_h: f64,
    pub comparisons: Vec<ComparisonReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossvalOutput {
    pub rtol: f64,
    pub num_modes: usize,
    pub levels: Vec<LevelComparison>,
    pub convergence: Vec<ConvergenceReport>,
    pub pass: bool,
}

pub fn crossval(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    require_valid(&cfg)?;
    let pairs: Vec<(Formulation, Formulation)> = [
        (Formulation::ScalarTE, Formulation::VectorTE),
        (Formulation::ScalarTM, Formulation::VectorTM),
    ]
    .into_iter()
    .filter(|(a, b)| cfg.formulations.contains(a) && cfg.formulations.contains(b))
    .collect();
    if pairs.is_empty() {
        return Err(CliError::Input(
            "crossval needs a scalar/vector pair among the formulations".into(),
        ));
    }
    let fam = family(&cfg)?;
    let mut levels = Vec::new();
    let mut per_formulation: Vec<(Formulation, Vec<ModeSolution>)> =
        pairs.iter().flat_map(|(a, b)| [(*a, Vec::new()), (*b, Vec::new())]).collect();
    for (level, mesh) in fam.iter().enumerate() {
        let mut comparisons = Vec::new();
        for (a, b) in &pairs {
            let sa = solve_one(&cfg, *a, mesh)?;
            let sb = solve_one(&cfg, *b, mesh)?;
            comparisons.push(compare_spectra(&sa, &sb, cfg.num_modes, cfg.rtol).map_err(lib)?);
            for (f, list) in per_formulation.iter_mut() {
                if f == a {
                    list.push(sa.clone());
                } else if f == b {
                    list.push(sb.clone());
                }
            }
        }
        levels.push(LevelComparison {
            level,
            mesh_h: mesh.h(),
            comparisons,
        });
    }
    let convergence = if fam.len() >= 3 {
        per_formulation
            .iter()
            .map(|(_, sols)| trend_from_solutions(sols, cfg.num_modes).map_err(lib))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let pass = levels.iter().all(|l| l.comparisons.iter().all(|c| c.pass));
    let report = CrossvalOutput {
        rtol: cfg.rtol,
        num_modes: cfg.num_modes,
        levels,
        convergence,
        pass,
    };
    emit(out, &cfg.output.report, &json(&report))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed("scalar and vector spectra disagree beyond rtol".into()))
    }
}

pub fn fields(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    require_valid(&cfg)?;
    let omega = cfg
        .omega
        .ok_or(CliError::Input("omega is required for field reconstruction".into()))?;
    let fam = family(&cfg)?;
    let level = cfg.field_level.unwrap_or(cfg.refinements);
    let mesh = &fam[level];
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let mut written = Vec::new();
    for &f in &cfg.formulations {
        let s = solve_one(&cfg, f, mesh)?;
        for i in 0..s.len() {
            let fields = mode_fields(&s, i, mesh, &cfg.medium, omega).map_err(lib)?;
            let title = format!(
                "{} mode {i} k_t={:.16e} rad/m omega={omega:.16e} rad/s{}",
                f.name(),
                s.cutoffs[i],
                if s.is_tem[i] { " TEM" } else { "" }
            );
            let path = dir.join(format!("{}_{}_{i}.vtk", cfg.output.vtk_prefix, f.name()));
            write(&path, &mode_vtk(mesh, &fields, &title))?;
            written.push(path.display().to_string());
        }
    }
    print!("{}", json(&written));
    Ok(())
}
