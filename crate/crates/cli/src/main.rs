use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use handover::delivery::RejectedOrientation;
use handover::grasping::grasps_to_json;
use handover::harness::{
    bench, bundled_scene, failed_report, write_suite, AblationMode, PreparedScene, Scene,
    SyntheticObject,
};
use handover::voxel::{voxelize_mesh, TriangleMesh};

#[derive(Debug, Parser)]
#[command(name = "handover", version, about = "Robot-to-human handover planner")]
struct Cli {
    /// Worker threads for concurrent stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print per-run detail.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Voxelize an OBJ mesh into a VGRID file.
    Voxelize {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        dims: usize,
        #[arg(long, default_value_t = 0.05)]
        padding: f64,
    },
    /// Plan one handover and write its report.
    Plan {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value = "FULL")]
        mode: AblationMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the ergonomic candidate CSV and the rejected orientations.
        #[arg(long)]
        emit_diagnostics: bool,
    },
    /// Run every matching scene under every mode and seed and summarize.
    Bench {
        /// Glob of scene JSON files.
        #[arg(long)]
        scenes: String,
        #[arg(long, value_delimiter = ',', default_value = "FULL,A1,A2,A3,A4")]
        modes: Vec<AblationMode>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Parameter override applied to every scene, as `key=value`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Sample and rank grasps, writing them as JSON.
    Grasps {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the bundled objects, contact maps and scenes to a directory.
    Suite {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SceneArgs {
    /// Scene JSON file, or the name of a bundled object.
    #[arg(long)]
    scene: String,
    /// Parameter override, as `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

enum Failure {
    Config(String),
    Stage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            let usage = Cli::command().render_usage().to_string();
            if !e.to_string().contains(&usage) {
                eprintln!("\n{usage}");
            }
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Stage(m)) => {
            eprintln!("stage failure: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Voxelize {
            mesh,
            out,
            dims,
            padding,
        } => {
            let grid = voxelize_mesh(&TriangleMesh::read_obj(&mesh)?, [dims; 3], padding)?;
            grid.write_vgrid(&out)?;
            println!(
                "{}: {} occupied voxels",
                out.display(),
                grid.occupied_count()
            );
            Ok(())
        }
        Command::Plan {
            scene,
            mode,
            seed,
            out,
            emit_diagnostics,
        } => plan(
            &scene.load()?,
            mode,
            seed,
            &out,
            emit_diagnostics,
            cli.verbose,
        ),
        Command::Bench {
            scenes,
            modes,
            seeds,
            out,
            overrides,
        } => {
            let mut paths: Vec<PathBuf> = glob::glob(&scenes)?.collect::<Result<_, _>>()?;
            paths.sort();
            if paths.is_empty() {
                return Err(Failure::Config(format!("no scenes matched {scenes:?}")));
            }
            let mut loaded = Vec::with_capacity(paths.len());
            for p in &paths {
                let mut s = Scene::load(p)?;
                apply_overrides(&mut s, &overrides)?;
                loaded.push(s);
            }
            let (reports, summary) = bench(&loaded, &modes, &seeds, &out)?;
            if cli.verbose {
                for r in &reports {
                    println!("{} {}", r.scene, r.summary_line());
                }
            }
            let failed = reports.iter().filter(|r| r.failure.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} of {} runs failed a stage", reports.len());
            }
            print!("{}", summary.to_csv());
            Ok(())
        }
        Command::Grasps { scene, seed, out } => {
            let scene = scene.load()?;
            let prepared = PreparedScene::new(&scene).map_err(|f| Failure::Stage(f.to_string()))?;
            let ranked = prepared
                .ranked_grasps(scene.params.lambda, seed)
                .map_err(|e| Failure::Stage(e.to_string()))?;
            write(&out, &grasps_to_json(&ranked)?)?;
            println!("{}: {} grasps", out.display(), ranked.len());
            Ok(())
        }
        Command::Suite { out } => {
            for p in write_suite(&out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

impl SceneArgs {
    fn load(&self) -> Result<Scene, Failure> {
        let path = Path::new(&self.scene);
        let mut scene = match self.scene.parse::<SyntheticObject>() {
            Ok(object) if !path.exists() => bundled_scene(object),
            _ => Scene::load(path)?,
        };
        apply_overrides(&mut scene, &self.overrides)?;
        Ok(scene)
    }
}

fn apply_overrides(scene: &mut Scene, overrides: &[String]) -> CliResult {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("override {o:?} is not key=value")))?;
        scene.params.set(k.trim(), v)?;
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn plan(
    scene: &Scene,
    mode: AblationMode,
    seed: u64,
    out: &Path,
    emit_diagnostics: bool,
    verbose: bool,
) -> CliResult {
    std::fs::create_dir_all(out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
    let run = match PreparedScene::new(scene) {
        Ok(p) => p.run_detailed(mode, seed),
        Err(f) => handover::harness::PipelineRun {
            report: failed_report(scene, mode, seed, f),
            diagnostics: Default::default(),
        },
    };
    let report = &run.report;
    write(&out.join(report.file_name()), &report.to_json()?)?;
    if emit_diagnostics {
        let stem = format!("{}_{}_{}", report.scene, report.mode, report.seed);
        if let Some(position) = &run.diagnostics.position {
            write(
                &out.join(format!("ergonomics_{stem}.csv")),
                &position.diagnostics_csv(),
            )?;
        }
        if let Some(cands) = &run.diagnostics.orientations {
            let rejected: Vec<RejectedOrientation> = cands
                .iter()
                .filter(|c| !c.feasible())
                .map(|c| RejectedOrientation {
                    index: c.index,
                    feasibility: c.feasibility,
                })
                .collect();
            write(
                &out.join(format!("rejected_orientations_{stem}.json")),
                &serde_json::to_string_pretty(&rejected)?,
            )?;
        }
    }
    if verbose {
        let stages: Vec<String> = report.stages.iter().map(|s| s.to_string()).collect();
        println!("stages: {}", stages.join(" > "));
    }
    match &report.failure {
        Some(f) => Err(Failure::Stage(f.to_string())),
        None => {
            println!("{}", report.summary_line());
            Ok(())
        }
    }
}
