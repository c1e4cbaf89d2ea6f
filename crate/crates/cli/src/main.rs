use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use serde_json::json;

use relcat_core::classify::{baut_certify, classification_diagram, segal_check};
use relcat_core::fincat::we_classes;
use relcat_core::harness::corpus;
use relcat_core::harness::{parse_diagram_file, parse_relcat, serialize_relcat, verify_theorem};
use relcat_core::hocolim_cat::hocolim_category;
use relcat_core::homology::simplicial_homology;
use relcat_core::{Budget, DiagramOfRelCats, Error, InsertDirection, RelativeCategory, VerifyConfig};

/// Finite relative categories, their classification diagrams and homotopy colimits.
///
/// Paths of the form `builtin:<name>` refer to the bundled fixtures.
#[derive(Parser, Debug)]
#[command(name = "relcat", version)]
struct Cli {
    /// Print results and errors as JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a relative category.
    Validate { file: PathBuf },
    /// Build L_C truncated to outer level N and inner degree M.
    Lcc {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Output file for the level summary, `-` for stdout.
        #[arg(long, default_value = "-")]
        emit: String,
    },
    /// Check the Segal maps of L_C at levels 2..=N.
    Segal {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        m: usize,
    },
    /// Compare levels 0 and 1 of L_C with the BAut model through H_K.
    Baut {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        hdeg: usize,
    },
    /// Build the homotopy colimit category of a diagram.
    Hocolim {
        diagram: PathBuf,
        #[arg(long, default_value = "forward")]
        insert_direction: InsertDirection,
        #[arg(long, default_value_t = 8)]
        max_word_length: usize,
        /// Output file for the colimit in relcat format, `-` for stdout.
        #[arg(long, default_value = "-")]
        emit: String,
    },
    /// Certify the comparison map from the homotopy colimit of L_C to L_C of the colimit.
    Verify {
        diagram: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        hdeg: usize,
        #[arg(long, default_value = "forward")]
        insert_direction: InsertDirection,
        #[arg(long, default_value_t = 8)]
        max_word_length: usize,
    },
}

enum Failure {
    Core(Error),
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    let s = path.to_string_lossy();
    if let Some(name) = s.strip_prefix("builtin:") {
        return corpus::relcat_source(name)
            .or_else(|| corpus::diagram_source(name))
            .map(str::to_string)
            .ok_or_else(|| {
                Failure::Core(Error::Unknown {
                    kind: "fixture",
                    name: name.to_string(),
                })
            });
    }
    fs::read_to_string(path).map_err(|source| {
        Failure::Core(Error::Io {
            path: s.into_owned(),
            source,
        })
    })
}

fn load_relcat(path: &Path) -> Result<RelativeCategory, Failure> {
    let text = read_source(path)?;
    Ok(parse_relcat(&text).map_err(|e| e.context(path.display().to_string()))?)
}

fn load_diagram(path: &Path) -> Result<DiagramOfRelCats, Failure> {
    let text = read_source(path)?;
    let file = parse_diagram_file(&text).map_err(|e| e.context(path.display().to_string()))?;
    let builtin = path.to_string_lossy().starts_with("builtin:");
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolved = file.resolve(|p| {
        if builtin {
            return corpus::relcat(p);
        }
        let full = dir.join(p);
        let text = fs::read_to_string(&full).map_err(|source| Error::Io {
            path: full.display().to_string(),
            source,
        })?;
        parse_relcat(&text).map_err(|e| e.context(full.display().to_string()))
    });
    Ok(resolved.map_err(|e| e.context(path.display().to_string()))?)
}

fn emit(target: &str, text: &str) -> Result<(), Failure> {
    if target == "-" {
        println!("{text}");
        Ok(())
    } else {
        fs::write(target, text).map_err(|source| {
            Failure::Core(Error::Io {
                path: target.to_string(),
                source,
            })
        })
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Runs one subcommand; `Ok(false)` means some certificate failed.
fn run(cli: &Cli) -> Result<bool, Failure> {
    let budget = Budget::from_env();
    match &cli.command {
        Command::Validate { file } => {
            let m = load_relcat(file)?;
            let c = m.base();
            let summary = json!({
                "objects": c.num_objects(),
                "morphisms": c.num_morphisms(),
                "marked": m.marked_morphisms().count(),
                "we_classes": we_classes(&m).len(),
            });
            if cli.json {
                println!("{}", pretty(&summary));
            } else {
                println!(
                    "ok: {} objects, {} morphisms, {} marked, {} we-classes",
                    summary["objects"], summary["morphisms"], summary["marked"], summary["we_classes"]
                );
            }
            Ok(true)
        }
        Command::Lcc { file, n, m, emit: out } => {
            let rc = load_relcat(file)?;
            let d = classification_diagram(&rc, *n, *m, budget)?;
            let mut levels = Vec::new();
            for k in 0..=*n {
                let x = d.level(k);
                levels.push(json!({
                    "n": k,
                    "objects": d.powers[k].category.base().num_objects(),
                    "counts": x.counts(),
                    "nondegenerate": x.nondegenerate_counts(),
                    "homology": simplicial_homology(x, m.saturating_sub(1))?,
                }));
            }
            emit(out, &pretty(&json!({ "outer_bound": n, "inner_bound": m, "levels": levels })))?;
            Ok(true)
        }
        Command::Segal { file, n, m } => {
            if *n < 2 {
                return Err(anyhow!("--n must be at least 2").into());
            }
            let rc = load_relcat(file)?;
            let d = classification_diagram(&rc, *n, *m, budget)?;
            let reports = (2..=*n).map(|k| segal_check(&d.spaces, k, budget)).collect::<Result<Vec<_>, _>>()?;
            let ok = reports.iter().all(|r| r.strict_iso);
            if cli.json {
                println!("{}", pretty(&reports));
            } else {
                for r in &reports {
                    match &r.counterexample {
                        None => println!("n={}: strict iso", r.n),
                        Some(c) => println!("n={}: not an iso: {c}", r.n),
                    }
                }
            }
            Ok(ok)
        }
        Command::Baut { file, hdeg } => {
            let rc = load_relcat(file)?;
            let report = baut_certify(&rc, *hdeg, hdeg + 1, budget)?;
            if cli.json {
                println!("{}", pretty(&report));
            } else {
                for l in &report.levels {
                    let hs: Vec<String> = l.homology_diagram.iter().map(|h| h.to_string()).collect();
                    println!(
                        "level {}: {} classes, pi0 {}, H = [{}]: {}",
                        l.level,
                        l.classes,
                        if l.pi0_bijective { "bijective" } else { "mismatch" },
                        hs.join(", "),
                        if l.passed { "pass" } else { "FAIL" }
                    );
                }
            }
            Ok(report.passed)
        }
        Command::Hocolim {
            diagram,
            insert_direction,
            max_word_length,
            emit: out,
        } => {
            let d = load_diagram(diagram)?;
            let config = VerifyConfig {
                max_word_length: *max_word_length,
                ..VerifyConfig::default()
            };
            let h = hocolim_category(&d, *insert_direction, config.rewrite_bounds())?;
            emit(out, serialize_relcat(&h.category).trim_end())?;
            Ok(true)
        }
        Command::Verify {
            diagram,
            n,
            m,
            hdeg,
            insert_direction,
            max_word_length,
        } => {
            let d = load_diagram(diagram)?;
            let config = VerifyConfig {
                outer: *n,
                inner: *m,
                hdeg: *hdeg,
                direction: *insert_direction,
                max_word_length: *max_word_length,
                budget: budget.max_items,
                ..VerifyConfig::default()
            };
            let report = verify_theorem(&diagram.display().to_string(), &d, &config)?;
            if cli.json {
                println!("{}", pretty(&report));
            } else {
                println!("{}", report.header.note);
                for l in &report.levels {
                    let c = &l.certificate;
                    println!(
                        "level {}: pi0 {} -> {}, cone trivial through H_{}: {}",
                        l.n,
                        c.components_source,
                        c.components_target,
                        c.degree_bound,
                        if c.passed { "pass" } else { "FAIL" }
                    );
                }
                let segal_ok = report.segal.hocolim.iter().chain(&report.segal.colimit).all(|s| s.strict_iso);
                println!("segal: {}", if segal_ok { "pass" } else { "FAIL" });
                println!("verdict: {} ({} ms)", if report.passed { "pass" } else { "FAIL" }, report.wall_clock_ms);
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            let (kind, message) = match &failure {
                Failure::Core(e) => (e.kind(), e.to_string()),
                Failure::Other(e) => ("usage", format!("{e:#}")),
            };
            if cli.json {
                println!("{}", pretty(&json!({ "error": { "kind": kind, "message": message } })));
            } else {
                eprintln!("error: {message}");
            }
            ExitCode::from(2)
        }
    }
}
