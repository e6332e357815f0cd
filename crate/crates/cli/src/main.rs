//! Command-line front end: builds algebra files, runs growth and
//! certification jobs, drives seeded experiments, and checks golden files.
//!
//! Every run writes a manifest next to its outputs; identical manifests
//! reproduce identical output bytes. Exit codes: 0 success, 1 theorem-level
//! assertion failure, 2 usage/input error, 3 budget-inconclusive.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use liegrowth_core::algebra::{build_classical, AlgebraSpec, LieType};
use liegrowth_core::descent::{
    self, DimestMode, ExperimentCase, ExperimentConfig, PipelineOutcome,
};
use liegrowth_core::exec::Strategy;
use liegrowth_core::extremal;
use liegrowth_core::field::FieldCtx;
use liegrowth_core::growth::{
    diameter_lower_bound, fill_time, olson_dichotomy, two_pair_family, GrowthConfig,
    GrowthSet, Universe,
};
use liegrowth_core::linalg::{Coords, Subspace};
use liegrowth_core::sumprod;
use liegrowth_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "liegrowth", version, about = "growth and extremal-basis experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an algebra file (sl_n/so_n/sp_n/g2/f4/e6/e7/e8 over GF(p^k)).
    Build {
        /// Type label, e.g. sl2, so7, sp4, g2.
        ty: String,
        #[arg(long)]
        p: u64,
        /// Field extension degree.
        #[arg(long, default_value_t = 1)]
        ext: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grow a symmetric set and dump layers, fill time, or the growth
    /// dichotomy.
    Grow {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        set: PathBuf,
        /// Compute layers 1..=K and dump one JSON line per layer.
        #[arg(long)]
        layers: Option<usize>,
        /// Report the least k with A^k = g (or the proper closure).
        #[arg(long)]
        fill: bool,
        /// Growth dichotomy at the given k.
        #[arg(long)]
        olson: Option<usize>,
        /// Include full element lists in layer dumps.
        #[arg(long)]
        elements: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and certify an extremal basis; dump certificates as
    /// JSON-lines.
    Certify {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded experiment drivers; the config file must carry the seed.
    Experiment {
        #[arg(long)]
        algebra: PathBuf,
        /// JSON file mirroring the experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// dimest | pipeline | growth-curve | subfield-gap | covering |
        /// covering-sweep | diameter
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Random vector pairs per seeded generating set.
        #[arg(long, default_value_t = 2)]
        pairs: usize,
        /// Sumset fold count for covering-sweep.
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute golden values and compare byte-exactly; --bless rewrites
    /// them (a changelog note is then mandatory).
    VerifyGolden {
        #[arg(long, default_value = "golden")]
        dir: PathBuf,
        #[arg(long)]
        bless: bool,
        #[arg(long)]
        note: Option<String>,
    },
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    params: serde_json::Value,
    inputs: Vec<String>,
    seed: Option<u64>,
    tool_version: String,
    outputs: Vec<String>,
}

/// Set file: a reference to the algebra label plus coordinate vectors.
#[derive(Serialize, Deserialize)]
struct SetFile {
    algebra: String,
    elements: Vec<Coords>,
}

#[derive(Serialize)]
struct LayerLine<'a> {
    k: usize,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    elements: Option<&'a Vec<Coords>>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CoreError> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_manifest(
    out: &Path,
    command: &str,
    params: serde_json::Value,
    inputs: &[&Path],
    seed: Option<u64>,
) -> Result<(), CoreError> {
    let manifest = RunManifest {
        command: command.into(),
        params,
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        outputs: vec![out.display().to_string()],
    };
    let mut path = out.as_os_str().to_owned();
    path.push(".manifest.json");
    write_atomic(
        Path::new(&path),
        &serde_json::to_vec_pretty(&manifest).map_err(CoreError::from)?,
    )
}

fn load_algebra(path: &Path) -> Result<Arc<AlgebraSpec>, CoreError> {
    let text = std::fs::read_to_string(path)?;
    Ok(Arc::new(serde_json::from_str(&text)?))
}

fn load_set(path: &Path, g: &AlgebraSpec) -> Result<Vec<Coords>, CoreError> {
    let text = std::fs::read_to_string(path)?;
    let f: SetFile = serde_json::from_str(&text)?;
    let label = g.label().unwrap_or_default();
    if f.algebra != label {
        return Err(CoreError::BadInput(format!(
            "set file targets algebra {:?}, loaded {:?}",
            f.algebra, label
        )));
    }
    Ok(f.elements)
}

fn cmd_build(ty: &str, p: u64, ext: u32, out: &Path) -> Result<(), CoreError> {
    let lt = LieType::parse_label(ty)
        .ok_or_else(|| CoreError::BadInput(format!("unknown type label {ty:?}")))?;
    let ctx = Arc::new(FieldCtx::new(p, ext)?);
    let g = build_classical(lt, ctx)?;
    if g.not_simple_warning() {
        eprintln!("warning: {} over GF({p}) is not simple (char divides n)", lt.label());
    }
    write_atomic(out, &serde_json::to_vec_pretty(&g)?)?;
    write_manifest(
        out,
        "build",
        serde_json::json!({"type": ty, "p": p, "ext": ext}),
        &[],
        None,
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_grow(
    algebra: &Path,
    set: &Path,
    layers: Option<usize>,
    fill: bool,
    olson: Option<usize>,
    elements: bool,
    out: &Path,
) -> Result<(), CoreError> {
    let modes = layers.is_some() as u8 + fill as u8 + olson.is_some() as u8;
    if modes != 1 {
        return Err(CoreError::BadInput(
            "exactly one of --layers, --fill, --olson is required".into(),
        ));
    }
    let g = load_algebra(algebra)?;
    let elems = load_set(set, &g)?;
    let u = Arc::new(Universe::new(g));
    let mut a = GrowthSet::new(u.clone(), &elems, GrowthConfig::default())?;
    let mut buf = Vec::new();
    if let Some(k) = layers {
        a.grow_to(k)?;
        if a.computed() < k {
            return Err(CoreError::BudgetExceeded {
                what: format!("layer {k}"),
                limit: a.config().max_set_elements,
            });
        }
        for kk in 1..=k {
            let elems = elements.then(|| a.layer_elements(kk));
            let line = LayerLine {
                k: kk,
                size: a.layer(kk).len(),
                elements: elems.as_ref(),
            };
            serde_json::to_writer(&mut buf, &line)?;
            buf.push(b'\n');
        }
    } else if fill {
        let ft = fill_time(&mut a)?;
        serde_json::to_writer(&mut buf, &ft)?;
        buf.push(b'\n');
    } else if let Some(k) = olson {
        let rep = olson_dichotomy(&mut a, k)?;
        serde_json::to_writer(&mut buf, &rep)?;
        buf.push(b'\n');
    }
    write_atomic(out, &buf)?;
    write_manifest(
        out,
        "grow",
        serde_json::json!({"layers": layers, "fill": fill, "olson": olson, "elements": elements}),
        &[algebra, set],
        None,
    )
}

fn cmd_certify(algebra: &Path, out: &Path) -> Result<(), CoreError> {
    let g = load_algebra(algebra)?;
    let basis = extremal::build_extremal_basis(&g)?;
    let mut buf = Vec::new();
    basis.write_jsonl(&mut buf)?;
    write_atomic(out, &buf)?;
    write_manifest(out, "certify", serde_json::json!({}), &[algebra], None)
}

fn random_subspace(ctx: &FieldCtx, dim: usize, rng_seed: u64) -> Subspace {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    let target = rng.gen_range(0..=dim);
    let vectors: Vec<Coords> = (0..target)
        .map(|_| (0..dim).map(|_| rng.gen_range(0..ctx.size())).collect())
        .collect();
    Subspace::span(ctx, dim, vectors.iter())
}

fn cmd_experiment(
    algebra: &Path,
    config: &Path,
    case: &str,
    trials: usize,
    pairs: usize,
    d: usize,
    out: &Path,
) -> Result<(), CoreError> {
    let g = load_algebra(algebra)?;
    let cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(config)?)?;
    cfg.validate()?;
    let u = Arc::new(Universe::new(g.clone()));
    let mut buf = Vec::new();
    match case {
        "dimest" => {
            let mut failures = 0usize;
            for i in 0..trials {
                let seed = cfg.seed.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let set = descent::seeded_generating_set(&u, seed, pairs)?;
                let mut a = GrowthSet::new(u.clone(), &set, GrowthConfig::default())?;
                let v = random_subspace(g.ctx(), g.dim(), seed ^ 0xd1e5);
                let rep = descent::dimest_check(&mut a, &v, 1, DimestMode::Turrifiable, &cfg)?;
                failures += !rep.holds as usize;
                serde_json::to_writer(&mut buf, &serde_json::json!({"seed": seed, "report": rep}))?;
                buf.push(b'\n');
            }
            if failures > 0 {
                write_atomic(out, &buf)?;
                return Err(CoreError::LemmaViolation(format!(
                    "dimensional estimate failed on {failures} of {trials} trials"
                )));
            }
        }
        "pipeline" => {
            for i in 0..trials {
                let seed = cfg.seed.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let set = descent::seeded_generating_set(&u, seed, pairs)?;
                let mut a = GrowthSet::new(u.clone(), &set, GrowthConfig::default())?;
                let res = descent::onedim_pipeline(&mut a, &cfg)?;
                let kind = match &res.outcome {
                    PipelineOutcome::Growth { .. } => "growth",
                    PipelineOutcome::Line { .. } => "line",
                };
                serde_json::to_writer(
                    &mut buf,
                    &serde_json::json!({
                        "seed": seed,
                        "kind": kind,
                        "outcome": res.outcome,
                        "trace": res.trace.iter().map(|s| s.digest()).collect::<Vec<_>>(),
                    }),
                )?;
                buf.push(b'\n');
            }
        }
        "growth-curve" | "subfield-gap" | "covering" => {
            let ecase = match case {
                "growth-curve" => ExperimentCase::GrowthCurve,
                "subfield-gap" => ExperimentCase::SubfieldGap,
                _ => ExperimentCase::Covering,
            };
            let reports = descent::run_experiments(
                &u,
                &cfg,
                ecase,
                trials,
                pairs,
                Strategy::default(),
            )
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            descent::write_experiment_jsonl(&reports, &mut buf)?;
        }
        "covering-sweep" => {
            let rows = sumprod::covering_sweep(
                g.field(),
                d,
                trials,
                cfg.seed,
                Strategy::default(),
            )?;
            buf = sumprod::sweep_csv(&rows).into_bytes();
        }
        "diameter" => {
            let family = two_pair_family(&u);
            let scan = diameter_lower_bound(&u, &family, &GrowthConfig::default())?;
            serde_json::to_writer_pretty(
                &mut buf,
                &serde_json::json!({
                    "max_fill": scan.max_fill,
                    "argmax_index": scan.argmax_index,
                    "generating_members": scan.generating_members,
                    "family_size": scan.family_size,
                }),
            )?;
            buf.push(b'\n');
        }
        other => {
            return Err(CoreError::BadInput(format!("unknown experiment case {other:?}")));
        }
    }
    write_atomic(out, &buf)?;
    write_manifest(
        out,
        "experiment",
        serde_json::json!({"case": case, "trials": trials, "pairs": pairs, "d": d}),
        &[algebra, config],
        Some(cfg.seed),
    )
}

/// Golden values recomputed from scratch; byte-compared against the files.
fn golden_values() -> Result<Vec<(&'static str, Vec<u8>)>, CoreError> {
    let ctx5 = Arc::new(FieldCtx::prime(5)?);
    let sl2 = Arc::new(build_classical(LieType::Sl(2), ctx5)?);
    let u = Arc::new(Universe::new(sl2));
    let family = two_pair_family(&u);
    let scan = diameter_lower_bound(&u, &family, &GrowthConfig::default())?;
    let diameter = serde_json::to_vec_pretty(&serde_json::json!({
        "algebra": "sl2",
        "p": 5,
        "max_fill": scan.max_fill,
        "argmax_index": scan.argmax_index,
        "generating_members": scan.generating_members,
        "family_size": scan.family_size,
    }))?;

    let ctx7 = Arc::new(FieldCtx::prime(7)?);
    let rows = sumprod::covering_sweep(&ctx7, 2, 200, 0xc0ffee, Strategy::Sequential)?;
    let sweep = sumprod::sweep_csv(&rows).into_bytes();

    Ok(vec![
        ("diameter_sl2_f5.json", diameter),
        ("covering_sweep_q7_d2.csv", sweep),
    ])
}

fn cmd_verify_golden(dir: &Path, bless: bool, note: Option<&str>) -> Result<(), CoreError> {
    let values = golden_values()?;
    if bless {
        let Some(note) = note else {
            return Err(CoreError::BadInput(
                "--bless requires a --note changelog entry".into(),
            ));
        };
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &values {
            write_atomic(&dir.join(name), bytes)?;
        }
        let mut log = std::fs::read_to_string(dir.join("CHANGELOG.md")).unwrap_or_default();
        log.push_str(&format!("- {note}\n"));
        write_atomic(&dir.join("CHANGELOG.md"), log.as_bytes())?;
        return Ok(());
    }
    for (name, bytes) in &values {
        let path = dir.join(name);
        let stored = std::fs::read(&path)?;
        if stored != *bytes {
            return Err(CoreError::LemmaViolation(format!(
                "golden file {} differs from the recomputed value",
                path.display()
            )));
        }
    }
    println!("golden files verified: {}", values.len());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CoreError> {
    match cli.cmd {
        Cmd::Build { ty, p, ext, out } => cmd_build(&ty, p, ext, &out),
        Cmd::Grow { algebra, set, layers, fill, olson, elements, out } => {
            cmd_grow(&algebra, &set, layers, fill, olson, elements, &out)
        }
        Cmd::Certify { algebra, out } => cmd_certify(&algebra, &out),
        Cmd::Experiment { algebra, config, case, trials, pairs, d, out } => {
            cmd_experiment(&algebra, &config, &case, trials, pairs, d, &out)
        }
        Cmd::VerifyGolden { dir, bless, note } => {
            cmd_verify_golden(&dir, bless, note.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                CoreError::LemmaViolation(_) => 1,
                CoreError::BudgetExceeded { .. } => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
