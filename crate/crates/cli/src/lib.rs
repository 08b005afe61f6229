//! Command-line front end for the `biforest` library.

use std::io::Write;
use std::path::PathBuf;

use biforest::gradedalg::AnyAlgebra;
use biforest::moduli::{boundary_faces, ModuliPoint, Space};
use biforest::multiindex::{enumerate_splittings, glue, stats};
use biforest::realize::henriques_graph;
use biforest::relgen::{generate_bimodule_r, generate_m, generate_r, relations_up_to};
use biforest::signs::{heartsuit, rho, spadesuit};
use biforest::{BimoduleIndex, MultiIndex};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "biforest", version, about = "Forest biassociahedra toolkit")]
pub struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Worker threads for `relations` and `verify`.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Size, trees, vertices and vertex set of a multi-index.
    Stats {
        #[arg(long)]
        k: MultiIndex,
    },
    /// `k1 ♯ k0`.
    Glue {
        #[arg(long)]
        k1: MultiIndex,
        #[arg(long)]
        k0: MultiIndex,
    },
    /// All splittings `k = k1 ♯ k0`.
    Splittings {
        #[arg(long)]
        k: MultiIndex,
    },
    /// Boundary faces of `K^k_l` or `J^k_l`.
    Faces {
        #[arg(long)]
        k: MultiIndex,
        #[arg(long)]
        l: MultiIndex,
        #[arg(long, default_value = "K")]
        space: Space,
    },
    /// Sign exponents.
    Sign {
        #[command(subcommand)]
        which: SignCommand,
    },
    /// Coherence relations, either all up to `--max` or a single one.
    Relations {
        #[arg(long, conflicts_with_all = ["k", "b"])]
        max: Option<usize>,
        #[arg(long, requires = "l")]
        k: Option<MultiIndex>,
        /// Bimodule index such as `2,0|1|2,1`.
        #[arg(long, requires = "l", conflicts_with = "k")]
        b: Option<BimoduleIndex>,
        #[arg(long)]
        l: Option<MultiIndex>,
        /// Morphism relations instead of algebra relations.
        #[arg(long, requires = "k")]
        morphism: bool,
    },
    /// Checks the relations of the dg f-bialgebra of a bialgebra file.
    Verify {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        /// Also check the identity morphism up to this bound.
        #[arg(long)]
        morphism_bound: Option<usize>,
    },
    /// Intersection graph of a biforest given as `{"k","l","heights"}`.
    Graph {
        #[arg(long)]
        biforest: PathBuf,
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SignCommand {
    /// `ρ`, `ρ₀`, `ρ₁` for `k = k1 ♯ k0`, `l = l0 ♯ l1`.
    Rho {
        #[arg(long)]
        k0: MultiIndex,
        #[arg(long)]
        l0: MultiIndex,
        #[arg(long)]
        k1: MultiIndex,
        #[arg(long)]
        l1: MultiIndex,
    },
    /// `♥` of the gluing `k1 ♯ k0`.
    Heart {
        #[arg(long)]
        k1: MultiIndex,
        #[arg(long)]
        k0: MultiIndex,
    },
    /// `♠(k)`.
    Spade {
        #[arg(long)]
        k: MultiIndex,
    },
}

/// How a command ended, mapped to the process exit code.
enum Failure {
    Invalid(String),
    Verification(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns 0 on success, 1 on invalid input and 2 when a verification fails.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                let mut buf = Vec::new();
                let r = pool.install(|| dispatch(&cli, &mut buf));
                out.write_all(&buf).map_err(Failure::from).and(r)
            }
            Err(e) => Err(Failure::from(e)),
        },
        None => dispatch(&cli, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(err, "{msg}");
            2
        }
    }
}

fn json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    writeln!(out, "{}", serde_json::to_string(value)?)?;
    Ok(())
}

fn lines<T: std::fmt::Display>(out: &mut dyn Write, items: &[T]) -> Result<(), Failure> {
    for item in items {
        writeln!(out, "{item}")?;
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let text = cli.format == Format::Text;
    match &cli.command {
        Command::Stats { k } => {
            let s = stats(k);
            if text {
                writeln!(out, "size {}", s.size)?;
                writeln!(out, "trees {}", s.trees)?;
                writeln!(out, "vertices {}", s.vertices)?;
                writeln!(out, "nonvertical {}", s.nonvertical)?;
                match &s.tilde {
                    Some(t) => writeln!(out, "tilde {t}")?,
                    None => writeln!(out, "tilde -")?,
                }
                writeln!(out, "vert {:?}", s.vert_set)?;
                Ok(())
            } else {
                json(out, &s)
            }
        }
        Command::Glue { k1, k0 } => {
            let k = glue(k1, k0)?;
            if text {
                writeln!(out, "{k}")?;
                Ok(())
            } else {
                json(out, &k)
            }
        }
        Command::Splittings { k } => {
            let all = enumerate_splittings(k);
            if text {
                for s in &all {
                    writeln!(out, "{} ♯ {} {:?}", s.k1, s.k0, s.lower)?;
                }
                Ok(())
            } else {
                json(out, &all)
            }
        }
        Command::Faces { k, l, space } => {
            let faces = boundary_faces(k, l, *space)?;
            if text {
                lines(out, &faces)
            } else {
                json(out, &faces)
            }
        }
        Command::Sign { which } => sign(which, text, out),
        Command::Relations {
            max,
            k,
            b,
            l,
            morphism,
        } => {
            let rels = match (max, k, b, l) {
                (Some(max), _, _, _) => relations_up_to(*max),
                (None, Some(k), None, Some(l)) if *morphism => vec![generate_m(k, l)],
                (None, Some(k), None, Some(l)) => vec![generate_r(k, l)],
                (None, None, Some(b), Some(l)) => vec![generate_bimodule_r(b, l)?],
                _ => {
                    return Err(Failure::Invalid(
                        "give --max, or --l with --k or --b".into(),
                    ))
                }
            };
            if text {
                lines(out, &rels)
            } else {
                json(out, &rels)
            }
        }
        Command::Verify {
            algebra,
            bound,
            morphism_bound,
        } => {
            let source = std::fs::read_to_string(algebra)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", algebra.display())))?;
            let alg = AnyAlgebra::from_json(&source)?;
            let report = alg.verify(*bound, *morphism_bound)?;
            if text {
                for a in &report.axiom_failures {
                    writeln!(
                        out,
                        "axiom {} fails at ({}, {}): {}",
                        a.axiom, a.row, a.col, a.value
                    )?;
                }
            } else {
                json(out, &report)?;
            }
            let failed: Vec<String> = report
                .relations
                .failures()
                .chain(report.identity_morphism.iter().flat_map(|r| r.failures()))
                .map(|c| format!("FAIL: {} {}", c.name(), c.op))
                .collect();
            if failed.is_empty() {
                if text {
                    writeln!(out, "OK: all relations hold")?;
                }
                Ok(())
            } else {
                Err(Failure::Verification(failed.join("\n")))
            }
        }
        Command::Graph { biforest, dot } => {
            let source = std::fs::read_to_string(biforest)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", biforest.display())))?;
            let point: ModuliPoint = serde_json::from_str(&source)?;
            let point = ModuliPoint::new(point.k, point.l, point.heights)?;
            let g = henriques_graph(&point.biforest()?);
            if *dot {
                write!(out, "{}", g.to_dot())?;
                Ok(())
            } else {
                json(out, &g)
            }
        }
    }
}

fn sign(which: &SignCommand, text: bool, out: &mut dyn Write) -> Result<(), Failure> {
    match which {
        SignCommand::Rho { k0, l0, k1, l1 } => {
            let r = rho(k0, l0, k1, l1)?;
            if text {
                writeln!(
                    out,
                    "rho {} rho0 {} rho1 {}",
                    r.rho.bit(),
                    r.rho0.bit(),
                    r.rho1.bit()
                )?;
                Ok(())
            } else {
                json(out, &r)
            }
        }
        SignCommand::Heart { k1, k0 } => {
            let s = heartsuit(k1, k0)?;
            writeln!(out, "{}", s.bit())?;
            Ok(())
        }
        SignCommand::Spade { k } => {
            writeln!(out, "{}", spadesuit(k).bit())?;
            Ok(())
        }
    }
}
