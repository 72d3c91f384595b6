//! `removable`: command-line front end for the fractal, Whitney,
//! quasihyperbolic, detour and certificate modules.
//!
//! Exit status: 0 when every requested certificate passes, 2 when one
//! fails, 1 on usage, input or resource errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use removable_core::certify::{
    carpet_counterexample, integrated_measure_bound, measure_zero_bound, removability_certificate,
    TestFunction,
};
use removable_core::detour::{detour_batch, sample_lines, structural_checks};
use removable_core::fractal::{
    apollonian, apollonian_depth, carpet_levels, gasket_levels, julia_raster,
    verify_nested_construction, JuliaGrid, JuliaMap, TangentCircleTriple,
};
use removable_core::qhyp::{default_basepoint, holder_fit, shadow_sum_check, shadows, QhGraph};
use removable_core::scene::Scene;
use removable_core::whitney::{refine_for_qh, whitney_decompose, ShapeDomain};
use removable_core::{Error, FractalApproximation, Point, Shape};

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "removable",
    version,
    about = "Detour sets, Whitney cubes and removability certificates"
)]
struct Cli {
    /// Directory for report files.
    #[arg(
        long,
        global = true,
        env = "REMOVABLE_OUTPUT_DIR",
        default_value = "removable-out"
    )]
    output_dir: PathBuf,
    /// Seed for line sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Build a fractal scene (gasket, carpet, apollonian) or a Julia raster.
    Generate {
        #[arg(long)]
        scene: String,
        #[arg(long, default_value_t = 4)]
        levels: u32,
        /// Apollonian radius cutoff; overrides --levels.
        #[arg(long)]
        min_radius: Option<f64>,
        /// Julia map: `cubic` or `quadratic` (with --lambda).
        #[arg(long, default_value = "cubic")]
        map: String,
        #[arg(long, default_value = "0,0", value_parser = parse_point)]
        lambda: Point,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 200)]
        max_iter: u32,
    },
    /// Whitney decomposition of a domain, optionally refined for distances.
    Whitney {
        #[arg(long, default_value = "disk")]
        domain: String,
        #[arg(long, default_value_t = 8)]
        cutoff: i32,
        #[arg(long)]
        refine: bool,
    },
    /// Hölder fit and shadow table from a basepoint.
    Qhyp {
        #[arg(long, default_value = "disk")]
        domain: String,
        #[arg(long, default_value_t = 9)]
        cutoff: i32,
        #[arg(long, default_value_t = 128)]
        samples: usize,
        /// Defaults to the centre of the cube with the largest δ.
        #[arg(long, value_parser = parse_point)]
        basepoint: Option<Point>,
    },
    /// Detour paths and their verification for sampled lines.
    Detour {
        #[arg(long, default_value = "gasket")]
        scene: String,
        #[arg(long, default_value_t = 6)]
        levels: u32,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        lines: usize,
    },
    /// Numerical certificates on a fractal scene.
    Certify {
        #[arg(long, default_value = "gasket")]
        scene: String,
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, default_value_t = 4)]
        m: u32,
        /// Construction depth; defaults to m + 4 (integrated measure), m + 6
        /// (measure zero) or m (removability).
        #[arg(long)]
        levels: Option<u32>,
        /// Test function for removability: const, x, x2+y, sinsin, expcos.
        #[arg(long, default_value = "x")]
        function: String,
        #[arg(long, default_value_t = 3.0)]
        p: f64,
        /// Sampled lines for measure-zero.
        #[arg(long, default_value_t = 20)]
        lines: usize,
    },
    /// The carpet counterexample f_S(x, y) = x + h(x)ψ(y).
    Carpet {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 8)]
        m: u32,
        #[arg(long, default_value_t = 0.5)]
        y0: f64,
    },
    /// Collect the pass flags of every report in the output directory.
    Report,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum What {
    IntegratedMeasure,
    MeasureZero,
    Removability,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let x: f64 = x.trim().parse().map_err(|e| format!("{e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Point::new(x, y))
}

type AppResult<T> = Result<T, Box<dyn std::error::Error>>;

struct Out {
    dir: PathBuf,
}

impl Out {
    fn json(&self, name: &str, v: &impl Serialize) -> AppResult<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        fs::write(self.dir.join(name), s)?;
        Ok(())
    }

    fn csv<R: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = R>) -> AppResult<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn text(&self, name: &str, s: &str) -> AppResult<()> {
        fs::write(self.dir.join(name), s)?;
        Ok(())
    }
}

fn fractal(scene: &str, levels: u32, min_radius: Option<f64>) -> AppResult<FractalApproximation> {
    Ok(match scene {
        "gasket" => gasket_levels(levels)?,
        "carpet" => carpet_levels(levels)?,
        "apollonian" => match min_radius {
            Some(r) => apollonian(&TangentCircleTriple::unit(), r)?,
            None => apollonian_depth(&TangentCircleTriple::unit(), levels)?,
        },
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown scene {scene:?}; expected gasket, carpet or apollonian"
            ))
            .into())
        }
    })
}

/// Built-in domain, or a scene JSON file whose first bounded component is
/// taken as the domain.
fn domain(name: &str) -> AppResult<ShapeDomain> {
    Ok(match name {
        "disk" => ShapeDomain::unit_disk(),
        "square" => ShapeDomain::unit_square(),
        "triangle" => ShapeDomain::equilateral_triangle(),
        "comb" => ShapeDomain::comb(5)?,
        path if Path::new(path).is_file() => {
            let scene = Scene::from_json(&fs::read_to_string(path)?)?;
            let c = scene
                .components()?
                .into_iter()
                .find(|c| c.bounded)
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "{path} has no bounded component to use as a domain"
                    ))
                })?;
            ShapeDomain(c.shape)
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown domain {name:?}; expected disk, square, triangle, comb or a scene file"
            ))
            .into())
        }
    })
}

fn svg(f: &FractalApproximation) -> String {
    let (lo, hi) = f.bbox();
    let pad = 0.02 * (hi.x - lo.x).max(hi.y - lo.y);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {w} {h}\">\n<g transform=\"matrix(1 0 0 -1 0 {})\">\n",
        lo.x - pad,
        lo.y - pad,
        2.0 * lo.y - 2.0 * pad + h
    );
    let stroke = 0.002 * w;
    let shape = |s: &mut String, sh: &Shape, fill: &str| match sh {
        Shape::Circle { center, radius } => {
            let _ = writeln!(
                s,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{radius}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"{stroke}\"/>",
                center.x, center.y
            );
        }
        Shape::Polygon(v) => {
            let pts: Vec<String> = v.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
            let _ = writeln!(
                s,
                "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"{stroke}\"/>",
                pts.join(" ")
            );
        }
    };
    shape(&mut s, &f.outer.shape, "black");
    for hole in &f.holes {
        shape(&mut s, &hole.component.shape, "white");
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[derive(Serialize)]
struct LevelRow {
    level: u32,
    solids: usize,
    holes: usize,
    max_solid_diameter: f64,
    max_hole_diameter: f64,
    solid_area: f64,
}

fn generate(
    out: &Out,
    scene: &str,
    levels: u32,
    min_radius: Option<f64>,
    julia: (&str, Point, usize, u32),
) -> AppResult<bool> {
    if scene == "julia" {
        let (map, lambda, size, max_iter) = julia;
        let map = match map {
            "cubic" => JuliaMap::CubicCritical,
            "quadratic" => JuliaMap::QuadraticPlusInverse {
                lambda_re: lambda.x,
                lambda_im: lambda.y,
            },
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown Julia map {map:?}; expected cubic or quadratic"
                ))
                .into())
            }
        };
        let grid = JuliaGrid {
            center_re: 0.0,
            center_im: 0.0,
            half_width: 2.0,
            width: size,
            height: size,
        };
        let r = julia_raster(map, grid, max_iter)?;
        let mut pgm = Vec::new();
        r.write_pgm(&mut pgm)?;
        fs::write(out.dir.join("julia.pgm"), pgm)?;
        out.csv(
            "julia.csv",
            (0..size)
                .flat_map(|j| (0..size).map(move |i| (i, j)))
                .map(|(i, j)| {
                    let z = grid.pixel(i, j);
                    (i, j, z.re, z.im, r.escape_iter[j * size + i])
                }),
        )?;
        let escaped = r.escape_iter.iter().filter(|&&n| n > 0).count();
        out.json(
            "julia.json",
            &json!({ "map": map, "grid": grid, "max_iter": max_iter, "escaped_pixels": escaped }),
        )?;
        return Ok(true);
    }
    let f = fractal(scene, levels, min_radius)?;
    out.text("scene.json", &(f.to_scene().to_json()? + "\n"))?;
    out.text("scene.svg", &svg(&f))?;
    let nested = verify_nested_construction(&f);
    out.json("nested.json", &nested)?;
    out.json("structure.json", &structural_checks(&f))?;
    out.csv(
        "levels.csv",
        nested.levels.iter().map(|l| LevelRow {
            level: l.level,
            solids: l.solids,
            holes: l.holes,
            max_solid_diameter: l.max_solid_diameter,
            max_hole_diameter: l.max_hole_diameter,
            solid_area: f.solid_area(l.level),
        }),
    )?;
    println!(
        "{scene}: {} components through level {}",
        f.holes.len() + 1,
        f.depth()
    );
    Ok(true)
}

#[derive(Serialize)]
struct CubeRow {
    id: usize,
    level: i32,
    ix: i64,
    iy: i64,
    side: f64,
    dist_lo: f64,
    dist_hi: f64,
}

fn whitney(out: &Out, name: &str, cutoff: i32, refine: bool) -> AppResult<bool> {
    let mut w = whitney_decompose(Arc::new(domain(name)?), cutoff)?;
    if refine {
        w = refine_for_qh(&w)?;
    }
    out.csv(
        "cubes.csv",
        w.cubes.iter().enumerate().map(|(i, q)| CubeRow {
            id: i,
            level: q.level,
            ix: q.ix,
            iy: q.iy,
            side: q.side(),
            dist_lo: w.dist_lo[i],
            dist_hi: w.dist_hi[i],
        }),
    )?;
    out.json(
        "whitney.json",
        &json!({
            "domain": name,
            "cutoff": cutoff,
            "refined": refine,
            "cubes": w.len(),
            "adjacent_pairs": w.adjacency.len(),
            "coarsest_level": w.coarsest_level(),
            "finest_level": w.finest_level(),
            "covered_area": w.covered_area,
            "uncovered_area": w.uncovered_area,
            "rows": w.rows(),
            "warnings": w.warnings,
        }),
    )?;
    println!("{name}: {} cubes at cutoff {cutoff}", w.len());
    Ok(true)
}

fn qhyp(
    out: &Out,
    name: &str,
    cutoff: i32,
    samples: usize,
    basepoint: Option<Point>,
) -> AppResult<bool> {
    let g = QhGraph::new(refine_for_qh(&whitney_decompose(
        Arc::new(domain(name)?),
        cutoff,
    )?)?);
    let x0 = match basepoint {
        Some(p) => p,
        None => default_basepoint(&g)
            .ok_or_else(|| Error::InvalidInput("empty decomposition".into()))?,
    };
    let fit = holder_fit(&g, x0, samples)?;
    let table = shadows(&g, x0, samples)?;
    let sum = shadow_sum_check(&g, &table);
    out.csv(
        "shadows.csv",
        table
            .entries()
            .into_iter()
            .map(|(q, marks, s)| (q, g.side(q), marks.len(), s, table.k_hat[q])),
    )?;
    out.json("qhyp.json", &json!({ "domain": name, "cutoff": cutoff, "cubes": g.len(), "fit": fit, "shadow_sum": sum }))?;
    match fit.fit() {
        Some(h) => println!("{name}: α = {:.4}, c = {:.4}", h.alpha, h.c),
        None => println!("{name}: not Hölder at this resolution"),
    }
    Ok(true)
}

#[derive(Serialize)]
struct LineRow {
    line: usize,
    status: &'static str,
    touched: Option<usize>,
    hausdorff: Option<f64>,
    pass: bool,
}

fn detour(out: &Out, scene: &str, levels: u32, eps: f64, n: usize, seed: u64) -> AppResult<bool> {
    let f = fractal(scene, levels, None)?;
    let lines = sample_lines(&f, n, seed);
    let batch = detour_batch(&f, &lines, eps)?;
    if n > 0 && batch.exceptional == n {
        return Err(Error::InvalidInput(format!("all {n} sampled lines are exceptional")).into());
    }
    use removable_core::detour::LineResult;
    out.csv(
        "detour_lines.csv",
        batch.lines.iter().enumerate().map(|(i, r)| match r {
            LineResult::Exceptional { .. } => LineRow {
                line: i,
                status: "exceptional",
                touched: None,
                hausdorff: None,
                pass: true,
            },
            LineResult::Failure { failure } => LineRow {
                line: i,
                status: "failure",
                touched: None,
                hausdorff: Some(failure.hausdorff),
                pass: false,
            },
            LineResult::Path { report, .. } => LineRow {
                line: i,
                status: "path",
                touched: Some(report.touched_count),
                hausdorff: Some(report.hausdorff),
                pass: report.pass,
            },
        }),
    )?;
    let pass = batch.pass();
    out.json(
        "detour.json",
        &json!({ "scene": scene, "levels": levels, "seed": seed, "pass": pass, "batch": batch }),
    )?;
    println!(
        "{scene}: {} lines, {} exceptional, {}/{} paths verified",
        n, batch.exceptional, batch.verified, batch.constructed
    );
    Ok(pass)
}

#[allow(clippy::too_many_arguments)]
fn certify(
    out: &Out,
    scene: &str,
    what: What,
    m: u32,
    levels: Option<u32>,
    function: &str,
    p: f64,
    n: usize,
    seed: u64,
) -> AppResult<bool> {
    let (name, reports) = match what {
        What::IntegratedMeasure => {
            let f = fractal(scene, levels.unwrap_or(m + 4), None)?;
            (
                "integrated-measure",
                vec![integrated_measure_bound(&f, Point::new(1.0, 0.0), m)?],
            )
        }
        What::MeasureZero => {
            let f = fractal(scene, levels.unwrap_or(m + 6), None)?;
            let mut reports = Vec::new();
            let mut skipped = 0;
            for line in sample_lines(&f, n, seed) {
                match measure_zero_bound(&f, &line, m) {
                    Err(Error::ExceptionalLine { .. } | Error::Resolution(_)) => skipped += 1,
                    r => reports.push(r?),
                }
            }
            if n > 0 && reports.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "all {n} sampled lines are exceptional or unresolved"
                ))
                .into());
            }
            if skipped > 0 {
                println!(
                    "{skipped} of {n} lines skipped as exceptional or unresolved at depth {}",
                    f.depth()
                );
            }
            ("measure-zero", reports)
        }
        What::Removability => {
            let f = fractal(scene, levels.unwrap_or(m), None)?;
            (
                "removability",
                vec![removability_certificate(
                    &f,
                    &TestFunction::by_name(function)?,
                    p,
                    m,
                )?],
            )
        }
    };
    let pass = reports.iter().all(|r| r.pass);
    out.csv(
        &format!("certify_{name}.csv"),
        reports.iter().map(|r| {
            (
                &r.name,
                &r.truncation,
                r.value,
                r.bound,
                r.tail,
                r.constant,
                r.pass,
            )
        }),
    )?;
    out.json(
        &format!("certify_{name}.json"),
        &json!({ "scene": scene, "pass": pass, "reports": reports }),
    )?;
    for r in &reports {
        let exact = r
            .exact
            .as_deref()
            .map(|e| format!(" (exact {e})"))
            .unwrap_or_default();
        println!(
            "{}: value {:.6}{exact}, bound {:.6}, {}",
            r.name,
            r.value,
            r.bound,
            if r.pass { "pass" } else { "fail" }
        );
    }
    Ok(pass)
}

fn carpet(out: &Out, p: f64, m: u32, y0: f64) -> AppResult<bool> {
    let r = carpet_counterexample(p, m, y0)?;
    out.csv(
        "carpet_energy.csv",
        r.energy_by_level
            .iter()
            .enumerate()
            .map(|(j, e)| (j + 1, e)),
    )?;
    out.json("carpet.json", &r)?;
    println!(
        "energy off S_{m}: {:.6}; image measure {} ≈ {:.6}",
        r.energy_offset, r.image_measure_exact, r.image_measure
    );
    Ok(r.pass)
}

fn report(out: &Out) -> AppResult<bool> {
    let mut names: Vec<String> = fs::read_dir(&out.dir)?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".json") && !n.ends_with(".meta.json") && n != "report.json")
        .collect();
    names.sort();
    let mut entries = Vec::new();
    for n in &names {
        let v: Value = serde_json::from_str(&fs::read_to_string(out.dir.join(n))?)?;
        entries.push(json!({ "file": n, "pass": v.get("pass").and_then(Value::as_bool) }));
    }
    let all = entries.iter().all(|e| e["pass"].as_bool() != Some(false));
    out.json("report.json", &json!({ "reports": entries, "pass": all }))?;
    println!(
        "{} reports, {}",
        entries.len(),
        if all { "all pass" } else { "some fail" }
    );
    Ok(all)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Generate { .. } => "generate",
        Command::Whitney { .. } => "whitney",
        Command::Qhyp { .. } => "qhyp",
        Command::Detour { .. } => "detour",
        Command::Certify { .. } => "certify",
        Command::Carpet { .. } => "carpet",
        Command::Report => "report",
    }
}

fn run(cli: &Cli) -> AppResult<bool> {
    fs::create_dir_all(&cli.output_dir)?;
    let out = Out {
        dir: cli.output_dir.clone(),
    };
    let pass = match &cli.command {
        Command::Generate {
            scene,
            levels,
            min_radius,
            map,
            lambda,
            size,
            max_iter,
        } => generate(
            &out,
            scene,
            *levels,
            *min_radius,
            (map, *lambda, *size, *max_iter),
        )?,
        Command::Whitney {
            domain,
            cutoff,
            refine,
        } => whitney(&out, domain, *cutoff, *refine)?,
        Command::Qhyp {
            domain,
            cutoff,
            samples,
            basepoint,
        } => qhyp(&out, domain, *cutoff, *samples, *basepoint)?,
        Command::Detour {
            scene,
            levels,
            epsilon,
            lines,
        } => detour(&out, scene, *levels, *epsilon, *lines, cli.seed)?,
        Command::Certify {
            scene,
            what,
            m,
            levels,
            function,
            p,
            lines,
        } => certify(
            &out, scene, *what, *m, *levels, function, *p, *lines, cli.seed,
        )?,
        Command::Carpet { p, m, y0 } => carpet(&out, *p, *m, *y0)?,
        Command::Report => report(&out)?,
    };
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    out.json(
        &format!("{}.meta.json", command_name(&cli.command)),
        &json!({ "unix_time": stamp, "version": env!("CARGO_PKG_VERSION"), "config": cli }),
    )?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
