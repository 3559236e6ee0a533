use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nearlab::algebra::{check_nearlattice, describe, distributive_report, AlgebraClass, FiniteAlgebra};
use nearlab::consequence::{consequence, Mode, Query};
use nearlab::enumerate::{catalog_up_to, counts_by_size, enumerate_dn, enumerate_modal_size};
use nearlab::format::{load_algebra, load_class, write_catalog, write_hasse};
use nearlab::formulas::{parse_formula, Signature, Term};
use nearlab::gentzen::{
    check_proof, parse_certificate, parse_sequent, write_certificate, NotFound, Prover, SearchConfig, SearchOutcome,
    Sequent, DEFAULT_DEPTH, DEFAULT_MN_BOUND,
};
use nearlab::modal::{check_modal, ModalAlgebra};
use nearlab::Error;

/// Finite-model workbench for distributive nearlattices.
#[derive(Parser)]
#[command(name = "nearlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an algebra file and report each identity.
    Check { path: PathBuf },
    /// Decide a consequence over a class of algebras.
    Consequence {
        /// An algebra file, a directory of them, or a path missing its `.alg` suffix.
        #[arg(long)]
        class: PathBuf,
        /// Semicolon-separated formulas; may be empty.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        premises: String,
        #[arg(long)]
        conclusion: String,
        #[arg(long, default_value = "plain")]
        mode: Mode,
    },
    /// Search for a sequent calculus proof, e.g. "x0|x1 |- x1|x0".
    Prove {
        sequent: String,
        /// Largest admissible proof height.
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        /// Largest n for the m^n rule.
        #[arg(long, default_value_t = DEFAULT_MN_BOUND)]
        mn_bound: usize,
        /// Write the certificate here instead of standard output.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Check a proof certificate.
    Verify { certificate: PathBuf },
    /// List the distributive nearlattices of one size.
    Enumerate {
        #[arg(long)]
        size: usize,
        /// Include every admissible box operation.
        #[arg(long)]
        modal: bool,
        /// Write one algebra file per member plus index.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Status {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { path } => cmd_check(&path),
        Command::Consequence { class, premises, conclusion, mode } => {
            cmd_consequence(&class, &premises, &conclusion, mode)
        }
        Command::Prove { sequent, depth, mn_bound, certificate } => {
            cmd_prove(&sequent, depth, mn_bound, certificate.as_deref())
        }
        Command::Verify { certificate } => cmd_verify(&certificate),
        Command::Enumerate { size, modal, out } => cmd_enumerate(size, modal, out.as_deref()),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_check(path: &Path) -> Result<Status, Error> {
    let a = load_algebra(path)?;
    let near = check_nearlattice(&a);
    if !near.passed() {
        println!("nearlattice: {}", describe(&a, &near));
        return Ok(Status::Failed);
    }
    let r = distributive_report(&a)?;
    let dist_ok = r.p3.passed() && r.p4.passed() && r.upsets.passed();
    let dist = if dist_ok { "pass".to_string() } else { describe(&a, if r.p3.passed() { &r.p4 } else { &r.p3 }) };
    println!("nearlattice: pass; distributive: {dist}");
    println!("  (P3): {}", describe(&a, &r.p3));
    println!("  (P4): {}", describe(&a, &r.p4));
    println!("  upsets distributive: {}", describe(&a, &r.upsets));
    match a.greatest() {
        Some(g) => println!("greatest element: {}", a.name(g)),
        None => println!("greatest element: none"),
    }
    let mut ok = dist_ok;
    if a.box_table().is_some() {
        let verdict = check_modal(&ModalAlgebra::new(a.clone())?);
        println!("modal: {}", describe(&a, &verdict));
        ok &= verdict.passed();
    }
    Ok(if ok { Status::Ok } else { Status::Failed })
}

fn class_signature(members: &[FiniteAlgebra]) -> Result<Signature, Error> {
    let mut names: Vec<&str> = Vec::new();
    for a in members {
        for c in a.constants().keys() {
            if !names.contains(&c.as_str()) {
                names.push(c);
            }
        }
    }
    Signature::new(&names, members.iter().any(|a| a.box_table().is_some()))
}

fn cmd_consequence(class: &Path, premises: &str, conclusion: &str, mode: Mode) -> Result<Status, Error> {
    let class = AlgebraClass::nearlattices(load_class(class)?)?;
    let sig = class_signature(class.members())?;
    let premises = premises
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_formula(p, &sig))
        .collect::<Result<Vec<Term>, Error>>()?;
    let conclusion = parse_formula(conclusion, &sig)?;
    let outcome = consequence(&class, &Query::new(premises, conclusion, mode))?;
    match outcome.counterexample() {
        None => {
            println!("holds");
            Ok(Status::Ok)
        }
        Some(c) => {
            println!("fails");
            println!("witness: {}", c.render(&class));
            Ok(Status::Failed)
        }
    }
}

fn cmd_prove(text: &str, depth: usize, mn_bound: usize, out: Option<&Path>) -> Result<Status, Error> {
    let s = parse_sequent(text, &Signature::full())?;
    let config = SearchConfig { depth, mn_bound, ..SearchConfig::default() };
    match Prover::new(config).search(&s) {
        SearchOutcome::Proved(p) => {
            let cert = write_certificate(&p);
            println!("proved: height {}, {} nodes", p.height(), cert.lines().count());
            match out {
                Some(path) => fs::write(path, &cert).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                None => print!("{cert}"),
            }
            Ok(Status::Ok)
        }
        SearchOutcome::NotFound(why) => {
            println!("not found");
            report_not_found(&s, &why)?;
            Ok(Status::Failed)
        }
    }
}

fn report_not_found(s: &Sequent, why: &NotFound) -> Result<(), Error> {
    match why {
        NotFound::Invalid { valuation } => {
            if let Some((a, line)) = catalog_countermodel(s)? {
                println!("countermodel ({} elements): {line}", a.size());
                print!("{}", write_hasse(&a)?);
            } else {
                let vals: Vec<String> =
                    valuation.iter().map(|(t, v)| format!("{t}={}", if *v { "1" } else { "0" })).collect();
                println!("countermodel (two-element chain 0 < 1): {}", vals.join(", "));
            }
        }
        NotFound::TooTall { height, depth } => {
            println!("the proof found has height {height}, above the depth bound {depth}")
        }
        NotFound::MnBound => println!("search needs a larger --mn-bound"),
        NotFound::Budget => println!("search budget exhausted"),
        NotFound::TooManyAtoms(n) => println!("{n} distinct atoms is beyond the search limit"),
    }
    Ok(())
}

/// Smallest catalog member refuting the sequent in plain mode; only for sequents over variables and `m`.
fn catalog_countermodel(s: &Sequent) -> Result<Option<(FiniteAlgebra, String)>, Error> {
    let terms = || s.premises().iter().chain([s.conclusion()]);
    if terms().any(|t| !t.constants().is_empty() || t.uses_box()) {
        return Ok(None);
    }
    for size in 2..=4 {
        let class = AlgebraClass::nearlattices(catalog_up_to(size)?)?;
        let q = Query::new(s.premises().to_vec(), s.conclusion().clone(), Mode::Plain);
        if let Some(c) = consequence(&class, &q)?.counterexample() {
            let line = c.render(&class);
            return Ok(Some((class.members()[c.member].clone(), line)));
        }
    }
    Ok(None)
}

fn cmd_verify(path: &Path) -> Result<Status, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let proof = parse_certificate(&text, &Signature::full())?;
    match check_proof(&proof) {
        Ok(()) => {
            println!("valid: {}", proof.sequent);
            Ok(Status::Ok)
        }
        Err(e) => {
            println!("invalid: {e}");
            Ok(Status::Failed)
        }
    }
}

fn cmd_enumerate(size: usize, modal: bool, out: Option<&Path>) -> Result<Status, Error> {
    let algebras = if modal { enumerate_modal_size(size)? } else { enumerate_dn(size)? };
    if let Some(dir) = out {
        write_catalog(dir, &algebras)?;
    }
    let counts = counts_by_size(&algebras);
    println!("size {size} count {}", counts.get(&size).copied().unwrap_or(0));
    Ok(Status::Ok)
}
