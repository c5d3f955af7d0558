use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ksmin_core::bounds::{self, BoundResult};
use ksmin_core::exact_linalg::{format_rational, scalar_identity_check};
use ksmin_core::exec::Execution;
use ksmin_core::graphs::{base_graph_9, export_dot, line_graph, Graph, GraphJson};
use ksmin_core::ks_assign::{self, KSConstraints};
use ksmin_core::quadform::{self, InequalityJson, QuadForm};
use ksmin_core::ray_sets::{self, RaySet};
use ksmin_core::realize::{self, RealizationReport};
use ksmin_core::report::{self, ReportOptions};

#[derive(Parser)]
#[command(
    name = "ksmin",
    version,
    about = "Kochen-Specker ray sets and their noncontextuality inequalities"
)]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for the parallel solvers (0 = all cores, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundMethod {
    Exhaustive,
    Bb,
    Blockdp,
}

#[derive(Subcommand)]
enum Command {
    /// Build the ray set of a dimension.
    Construct {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orthogonality graph of a ray set.
    Graph {
        #[arg(long)]
        dim: usize,
        /// Write Graphviz DOT here.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Use the line graph of the 9-vertex base graph instead (dimension 4 only).
        #[arg(long)]
        line: bool,
    },
    /// Check that each inequality's operator is a multiple of the identity.
    VerifyQuantum {
        #[arg(long)]
        dim: usize,
    },
    /// Exact classical maximum of the main inequality (or of `--form`).
    Bound {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "bb")]
        method: BoundMethod,
        /// Inequality JSON to maximize instead of the built-in form.
        #[arg(long)]
        form: Option<PathBuf>,
    },
    /// KS value assignments of the ray set.
    KsSearch {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Hexagon inequality for an independent vertex triple of the base graph.
    Hexagon {
        #[arg(long, value_delimiter = ',', default_value = "7,8,9")]
        triple: Vec<String>,
    },
    /// Numerical realizations of an orthogonality graph.
    Realize {
        /// Graph JSON ({"vertices": [...], "edges": [[a, b], ...]}).
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        #[arg(long, default_value_t = realize::SIGNATURE_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
    },
    /// Continuous-relaxation probe of the main inequality.
    Probe {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Recompute every claim for a dimension.
    Report {
        #[arg(long)]
        dim: usize,
        /// Include wall-clock timings (JSON then differs between runs).
        #[arg(long)]
        timings: bool,
    },
}

/// Either every check held, or some check was refuted.
enum Outcome {
    Verified,
    Refuted,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Verified) => ExitCode::SUCCESS,
        Ok(Outcome::Refuted) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execution(threads: usize) -> Execution {
    if threads == 1 {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    #[cfg(feature = "parallel")]
    if cli.threads > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()?;
    }
    let exec = execution(cli.threads);
    match &cli.command {
        Command::Construct { dim, out } => construct(cli, *dim, out.as_ref()),
        Command::Graph { dim, dot, line } => graph(cli, *dim, dot.as_ref(), *line),
        Command::VerifyQuantum { dim } => verify_quantum(cli, *dim),
        Command::Bound { dim, method, form } => bound(cli, *dim, *method, form.as_ref(), exec),
        Command::KsSearch { dim, limit } => ks_search(cli, *dim, *limit),
        Command::Hexagon { triple } => hexagon(cli, triple),
        Command::Realize {
            graph,
            dim,
            seeds,
            tol,
            max_iters,
        } => realize_cmd(cli, graph, *dim, *seeds, *tol, *max_iters, exec),
        Command::Probe { dim, samples } => probe(cli, *dim, *samples, exec),
        Command::Report { dim, timings } => {
            let options = ReportOptions {
                exec,
                seed: cli.seed,
                timings: *timings,
                ..ReportOptions::default()
            };
            let r = report::run_report(*dim, &options)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{r}");
            }
            Ok(if r.all_verified() {
                Outcome::Verified
            } else {
                Outcome::Refuted
            })
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn construct(cli: &Cli, dim: usize, out: Option<&PathBuf>) -> Result<Outcome> {
    let s = ray_sets::build_for_dimension(dim)?;
    let text = serde_json::to_string_pretty(&s.to_json())?;
    if let Some(path) = out {
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    } else if cli.json {
        println!("{text}");
    }
    if !cli.json || out.is_some() {
        println!("dimension {dim}: {} rays", s.len());
        if out.is_none() {
            for r in s.rays() {
                println!("  {:<10} {}", r.label, r.vector);
            }
        }
    }
    Ok(Outcome::Verified)
}

fn graph(cli: &Cli, dim: usize, dot: Option<&PathBuf>, line: bool) -> Result<Outcome> {
    let g = if line {
        if dim != 4 {
            bail!("--line is only defined for dimension 4");
        }
        line_graph(&base_graph_9()).relabel(|l| format!("v{l}"))?
    } else {
        ray_sets::orthogonality_graph(&ray_sets::build_for_dimension(dim)?)
    };
    if let Some(path) = dot {
        fs::write(path, export_dot(&g)).with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.json {
        print_json(&g.to_json())?;
    } else {
        println!("{} vertices, {} edges", g.len(), g.edge_count());
    }
    Ok(Outcome::Verified)
}

/// Inequalities whose operators live on the ray set of `dim`.
fn forms_for(dim: usize) -> Result<Vec<QuadForm>> {
    let mut forms = vec![report::primary_form(dim)?];
    match dim {
        4 => {
            let base = base_graph_9();
            for t in ksmin_core::graphs::independent_triples(&base) {
                forms.push(quadform::build_hexagon(t.map(|i| base.label(i)))?);
            }
        }
        5 => forms.push(quadform::build_L5prime()),
        _ => {}
    }
    Ok(forms)
}

fn verify_quantum(cli: &Cli, dim: usize) -> Result<Outcome> {
    let s = ray_sets::build_for_dimension(dim)?;
    let mut rows = Vec::new();
    let mut ok = true;
    for f in forms_for(dim)? {
        let scalar = scalar_identity_check(&quadform::quantum_operator(&f, &s)?);
        let verified = scalar.as_ref() == Some(f.quantum_value());
        ok &= verified;
        rows.push(serde_json::json!({
            "form": f.name(),
            "expected": format_rational(f.quantum_value()),
            "computed": scalar.as_ref().map(format_rational),
            "verified": verified,
        }));
        if !cli.json {
            let shown = scalar.as_ref().map_or_else(
                || "not a multiple of I".to_string(),
                |q| format!("{} I", format_rational(q)),
            );
            println!("[{}] {:<24} {}", if verified { "ok" } else { "FAIL" }, f.name(), shown);
        }
    }
    if cli.json {
        print_json(&rows)?;
    }
    Ok(if ok { Outcome::Verified } else { Outcome::Refuted })
}

fn read_form(path: &PathBuf) -> Result<QuadForm> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: InequalityJson = serde_json::from_str(&text).context("parsing inequality JSON")?;
    Ok(QuadForm::from_json(&json)?)
}

fn show_bound(cli: &Cli, f: &QuadForm, r: &BoundResult) -> Result<()> {
    if cli.json {
        return print_json(r);
    }
    println!(
        "{}: maximum {} over {} variables ({}, {} evaluations)",
        f.name(),
        format_rational(&r.maximum),
        f.len(),
        r.method.tag(),
        r.evaluations
    );
    let ones: Vec<&str> = r
        .argmax
        .values()
        .iter()
        .filter(|(_, v)| num_is_one(v))
        .map(|(k, _)| k.as_str())
        .collect();
    println!("  argmax ones: {}", ones.join(" "));
    Ok(())
}

fn num_is_one(v: &ksmin_core::exact_linalg::Rational) -> bool {
    *v == ksmin_core::exact_linalg::int(1)
}

fn bound(cli: &Cli, dim: usize, method: BoundMethod, form: Option<&PathBuf>, exec: Execution) -> Result<Outcome> {
    let f = match form {
        Some(path) => read_form(path)?,
        None => report::primary_form(dim)?,
    };
    let r = match method {
        BoundMethod::Exhaustive => bounds::max_exhaustive_with(&f, exec)?,
        BoundMethod::Bb => bounds::max_branch_bound_with(&f, exec)?,
        BoundMethod::Blockdp => {
            let s = ray_sets::build_for_dimension(dim)?;
            let layout = s
                .layout()
                .context("block DP needs a block-composed set (dimension >= 6)")?;
            bounds::max_block_dp_with(&f, layout, exec)?
        }
    };
    show_bound(cli, &f, &r)?;
    Ok(Outcome::Verified)
}

fn ks_search(cli: &Cli, dim: usize, limit: Option<usize>) -> Result<Outcome> {
    let s = ray_sets::build_for_dimension(dim)?;
    let found = ks_assign::find_ks_assignments(&s, limit);
    if cli.json {
        print_json(&found)?;
    } else {
        println!(
            "dimension {dim}: {} KS value assignment(s){}",
            found.len(),
            if limit.is_some() { " (limited)" } else { "" }
        );
        for a in &found {
            let ones: Vec<&str> = a
                .values()
                .iter()
                .filter(|(_, v)| num_is_one(v))
                .map(|(k, _)| k.as_str())
                .collect();
            println!("  {}", ones.join(" "));
        }
    }
    Ok(Outcome::Verified)
}

fn hexagon(cli: &Cli, triple: &[String]) -> Result<Outcome> {
    if triple.len() != 3 {
        bail!("--triple takes three vertices, e.g. 7,8,9");
    }
    let t: [&str; 3] = [&triple[0], &triple[1], &triple[2]];
    let f = quadform::build_hexagon(t)?;
    let s = ray_sets::build_18ray();
    let quantum = scalar_identity_check(&quadform::quantum_operator(&f, &s)?);
    let partial = KSConstraints::partial(&s, t.iter().map(|v| ks_assign::vertex_basis_18(v)).collect())?;
    let constrained = ks_assign::max_over_constrained(&f, &s, &partial)?;
    let all = KSConstraints::partial(
        &s,
        (1..=9).map(|v| ks_assign::vertex_basis_18(&v.to_string())).collect(),
    )?;
    let fully = ks_assign::max_over_constrained(&f, &s, &all)?;
    let unconstrained = bounds::max_exhaustive(&f)?;

    let verified = quantum.as_ref() == Some(f.quantum_value())
        && constrained.as_ref().map(|r| &r.maximum) == Some(f.classical_bound());
    if cli.json {
        print_json(&serde_json::json!({
            "triple": t,
            "rays": f.variables(),
            "quantum_value": quantum.as_ref().map(format_rational),
            "constrained_maximum": constrained.as_ref().map(|r| format_rational(&r.maximum)),
            "fully_constrained_maximum": fully.as_ref().map(|r| format_rational(&r.maximum)),
            "unconstrained_maximum": format_rational(&unconstrained.maximum),
            "verified": verified,
        }))?;
    } else {
        println!("hexagon {}: rays {}", t.join(","), f.variables().join(" "));
        println!(
            "  quantum value            {}",
            quantum.as_ref().map_or("not scalar".into(), format_rational)
        );
        println!(
            "  max, completeness at {}  {}",
            t.join(","),
            constrained
                .as_ref()
                .map_or("infeasible".into(), |r| format_rational(&r.maximum))
        );
        println!(
            "  max, completeness at all 9 {}",
            fully
                .as_ref()
                .map_or("infeasible".into(), |r| format_rational(&r.maximum))
        );
        println!("  unconstrained max        {}", format_rational(&unconstrained.maximum));
    }
    Ok(if verified { Outcome::Verified } else { Outcome::Refuted })
}

/// Reference set whose labels match the graph, possibly after adding the `v` prefix.
fn reference_for(g: &Graph, dim: usize) -> Option<(Graph, RaySet)> {
    let s = ray_sets::build_for_dimension(dim).ok()?;
    let mut want: Vec<String> = s.labels().into_iter().map(String::from).collect();
    want.sort();
    for prefix in ["", "v"] {
        let relabeled = g.relabel(|l| format!("{prefix}{l}")).ok()?;
        let mut have = relabeled.labels().to_vec();
        have.sort();
        if have == want {
            return Some((relabeled, s));
        }
    }
    None
}

fn realize_cmd(
    cli: &Cli,
    path: &PathBuf,
    dim: usize,
    seeds: usize,
    tol: f64,
    max_iters: usize,
    exec: Execution,
) -> Result<Outcome> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: GraphJson = serde_json::from_str(&text).context("parsing graph JSON")?;
    let mut g = Graph::from_json(&json)?;
    let reference = reference_for(&g, dim).map(|(relabeled, s)| {
        g = relabeled;
        s
    });
    let mut runs: Vec<RealizationReport> = realize::realize_seeds(&g, dim, cli.seed, seeds, max_iters, exec)?;
    let usable = runs.iter().filter(|r| r.converged && !r.degenerate).count();
    let mut matched = 0;
    if let Some(s) = &reference {
        for r in &mut runs {
            matched += r.match_against(s, tol)? as usize;
        }
    }
    let verified = reference.is_none() || (usable > 0 && matched == usable);
    if cli.json {
        print_json(&serde_json::json!({
            "dimension": dim,
            "seeds": seeds,
            "usable": usable,
            "matched": reference.as_ref().map(|_| matched),
            "runs": runs,
        }))?;
    } else {
        println!("{seeds} seeds: {usable} converged nondegenerate");
        match &reference {
            Some(s) => println!(
                "  {matched} of {usable} match the {}-ray reference within {tol:e}",
                s.len()
            ),
            None => println!("  no reference set with these labels"),
        }
        for r in &runs {
            println!(
                "  seed {:>3}: residual {:.3e} after {} sweeps{}{}",
                r.seed,
                r.residual,
                r.iterations,
                if r.degenerate { ", degenerate" } else { "" },
                if r.matched_reference { ", matches" } else { "" }
            );
        }
    }
    Ok(if verified { Outcome::Verified } else { Outcome::Refuted })
}

fn probe(cli: &Cli, dim: usize, samples: usize, exec: Execution) -> Result<Outcome> {
    let f = report::primary_form(dim)?;
    let value = bounds::continuous_probe_with(&f, samples, cli.seed, exec)?;
    let below = &value <= f.classical_bound();
    if cli.json {
        print_json(&serde_json::json!({
            "form": f.name(),
            "samples": samples,
            "seed": cli.seed,
            "best": format_rational(&value),
            "classical_bound": format_rational(f.classical_bound()),
        }))?;
    } else {
        println!(
            "{}: best rounded value {} from {samples} samples (classical bound {})",
            f.name(),
            format_rational(&value),
            format_rational(f.classical_bound())
        );
    }
    Ok(if below { Outcome::Verified } else { Outcome::Refuted })
}
