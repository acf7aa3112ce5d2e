use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use gluing_core::algebra::Algebra;
use gluing_core::atlas::{gluing_data_from_file, validate_gluing_data, GluingData};
use gluing_core::builders::{
    catalog_atlas, catalog_text, doubled_origin_kit, plane_sample_report, projective_plane_kit, projective_space_kit, CATALOG,
    EMBED_KP1_KP2_F3,
};
use gluing_core::dot::epos_to_dot;
use gluing_core::dsl::{parse_gluing_file, parse_morphism_file, serialize, GluingFile};
use gluing_core::morphism::{fullness_gap, morphism_data_from_file, reconstruct_partial, validate_morphism_data};
use gluing_core::reconstruct::{glue, weil_transport};

#[derive(Parser)]
#[command(name = "gluing", version, about = "Validate, glue and inspect finite atlas data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Algebra descriptor overriding the kit's, e.g. `Fp:5` or `cd:Q:3`.
    #[arg(long)]
    algebra: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples drawn when the algebra is infinite.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Write output here instead of standard output.
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the e-pos laws and conditions 1 to 4.
    Validate {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print a kit: `kp1`..`kp4`, `plane`, `doubled_origin`, or a catalog kit.
    Build {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Glue and print the classes and charts of the model.
    Reconstruct {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the number of points of the glued model.
    Count {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the kit of the tangent bundle, over dual numbers.
    Tangent {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the e-pos as a Graphviz digraph.
    Dot {
        /// Draw the e-pos (the only diagram available).
        #[arg(long)]
        epos: bool,
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Validate morphism data and print the induced map.
    Morphism {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// List the bundled examples.
    Catalog {
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    /// Input was read but did not validate.
    Invalid(String),
    /// Usage, I/O or parse error.
    Usage(String),
}

type Run = Result<String, Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn parse_algebra(common: &Common) -> Result<Option<Algebra>, Failure> {
    common.algebra.as_deref().map(|d| d.parse::<Algebra>().map_err(usage)).transpose()
}

enum Source {
    Kit(GluingFile),
    Data(GluingData),
}

fn catalog_stem(input: &str) -> &str {
    input.strip_suffix(".kit").or_else(|| input.strip_suffix(".mor")).unwrap_or(input)
}

fn read_text(input: &str, base: Option<&Path>) -> Result<Option<String>, Failure> {
    let path = match base {
        Some(dir) if Path::new(input).is_relative() => dir.join(input),
        _ => PathBuf::from(input),
    };
    for p in [path.clone(), path.with_extension("kit")] {
        if p.is_file() {
            return fs::read_to_string(&p).map(Some).map_err(|e| usage(format!("{}: {e}", p.display())));
        }
    }
    Ok(None)
}

fn load(input: &str, base: Option<&Path>, algebra: Option<&Algebra>) -> Result<Source, Failure> {
    let text = match read_text(input, base)? {
        Some(t) => t,
        None => {
            let stem = catalog_stem(input);
            if let Some(t) = catalog_text(stem) {
                t.to_string()
            } else if let Some(a) = catalog_atlas(stem) {
                let g = gluing_core::atlas::extract_gluing_data(&a).map_err(|r| Failure::Invalid(r.to_string()))?;
                return Ok(Source::Data(g));
            } else {
                return Err(usage(format!("{input}: no such file or catalog entry")));
            }
        }
    };
    let mut kit = parse_gluing_file(&text).map_err(usage)?;
    if let Some(a) = algebra {
        kit.algebra = a.clone();
    }
    Ok(Source::Kit(kit))
}

fn data_of(src: Source) -> Result<GluingData, Failure> {
    match src {
        Source::Data(g) => Ok(g),
        Source::Kit(kit) => gluing_data_from_file(&kit).map_err(usage),
    }
}

fn load_data(input: &str, common: &Common) -> Result<GluingData, Failure> {
    data_of(load(input, None, parse_algebra(common)?.as_ref())?)
}

fn report_result(text: String, valid: bool) -> Run {
    if valid {
        Ok(text)
    } else {
        Err(Failure::Invalid(text))
    }
}

fn validate(input: &str, common: &Common) -> Run {
    let src = load(input, None, parse_algebra(common)?.as_ref())?;
    if let Source::Kit(kit) = &src {
        if !kit.algebra.is_finite() {
            if *kit != projective_plane_kit(&kit.algebra) {
                return Err(usage(format!("{}: only the projective plane can be sampled over an infinite algebra", kit.algebra)));
            }
            let r = plane_sample_report(&kit.algebra, common.samples, common.seed);
            return report_result(r.to_string(), r.is_valid());
        }
    }
    let g = data_of(src)?;
    let r = validate_gluing_data(&g);
    report_result(r.to_string(), r.is_valid())
}

fn build(name: &str, common: &Common) -> Run {
    let alg = parse_algebra(common)?;
    let kit = match name {
        "plane" => projective_plane_kit(&alg.unwrap_or(Algebra::Prime(2))),
        "doubled_origin" => match alg {
            Some(Algebra::Prime(p)) => doubled_origin_kit(p).map_err(usage)?,
            None => doubled_origin_kit(5).map_err(usage)?,
            Some(a) => return Err(usage(format!("doubled_origin needs a prime field, not {a}"))),
        },
        _ => match name.strip_prefix("kp").and_then(|n| n.parse::<usize>().ok()) {
            Some(n) => projective_space_kit(&alg.unwrap_or(Algebra::Prime(2)), n).map_err(usage)?,
            None => match load(name, None, alg.as_ref())? {
                Source::Kit(kit) => kit,
                Source::Data(_) => return Err(usage(format!("{name} is an atlas, not a kit"))),
            },
        },
    };
    Ok(serialize(&kit))
}

fn tangent(input: &str, common: &Common) -> Run {
    let Source::Kit(mut kit) = load(input, None, parse_algebra(common)?.as_ref())? else {
        return Err(usage(format!("{input}: tangent transport needs formula transitions")));
    };
    // rejects table transitions and invalid kits before rewriting the algebra
    weil_transport(&gluing_data_from_file(&kit).map_err(usage)?).map_err(usage)?;
    kit.algebra = Algebra::dual(kit.algebra);
    Ok(serialize(&kit))
}

fn morphism(input: &str) -> Run {
    let (text, base) = match read_text(input, None)? {
        Some(t) => (t, Path::new(input).parent().map(Path::to_path_buf)),
        None if catalog_stem(input) == "embed_kp1_kp2_f3" => (EMBED_KP1_KP2_F3.to_string(), None),
        None => return Err(usage(format!("{input}: no such file or catalog entry"))),
    };
    let file = parse_morphism_file(&text).map_err(usage)?;
    let side = |name: &str| -> Result<Arc<GluingData>, Failure> { Ok(Arc::new(data_of(load(name, base.as_deref(), None)?)?)) };
    let (src, tgt) = (side(&file.source)?, side(&file.target)?);
    let d = morphism_data_from_file(&file, src.clone(), tgt.clone()).map_err(|e| Failure::Invalid(e.to_string()))?;
    let r = validate_morphism_data(&d);
    let mut out = r.to_string();
    if !r.is_valid() {
        return Err(Failure::Invalid(out));
    }
    let (ms, mt) = (glue(&src).map_err(usage)?, glue(&tgt).map_err(usage)?);
    match fullness_gap(&d, &ms) {
        None => out.push_str("FULL: pass\n"),
        Some(w) => out.push_str(&format!("FULL: fail {w}\n")),
    }
    let p = reconstruct_partial(&d, &ms, &mt).map_err(|e| Failure::Invalid(e.to_string()))?;
    for (c, v) in p.values.iter().enumerate() {
        let image = v.map(|t| mt.fmt_class(t)).unwrap_or_else(|| "undefined".into());
        out.push_str(&format!("{} -> {image}\n", ms.fmt_class(c)));
    }
    Ok(out)
}

fn catalog() -> String {
    let mut out = String::new();
    for (name, what) in CATALOG {
        out.push_str(&format!("{name:<20} {what}\n"));
    }
    out.push_str(&format!("{:<20} {}\n", "embed_kp1_kp2_f3", "morphism: line into plane over F_3"));
    out
}

fn run(cli: Cli) -> (Run, Option<PathBuf>) {
    match cli.command {
        Command::Validate { input, common } => (validate(&input, &common), common.output),
        Command::Build { name, common } => (build(&name, &common), common.output),
        Command::Reconstruct { input, common } => {
            let r = load_data(&input, &common).and_then(|g| glue(&g).map(|m| m.to_string()).map_err(|e| Failure::Invalid(e.to_string())));
            (r, common.output)
        }
        Command::Count { input, common } => {
            let r = load_data(&input, &common)
                .and_then(|g| glue(&g).map(|m| format!("{}\n", m.count_points())).map_err(|e| Failure::Invalid(e.to_string())));
            (r, common.output)
        }
        Command::Tangent { input, common } => (tangent(&input, &common), common.output),
        Command::Dot { input, common, .. } => (load_data(&input, &common).map(|g| epos_to_dot(&g.epos)), common.output),
        Command::Morphism { input, common } => (morphism(&input), common.output),
        Command::Catalog { common } => (Ok(catalog()), common.output),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), String> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let (result, output) = run(Cli::parse());
    let (text, code) = match result {
        Ok(t) => (t, 0),
        Err(Failure::Invalid(t)) => (t, 1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&text, output.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
