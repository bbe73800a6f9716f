//! The `ocat` command-line driver.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::computad::{check, Cell, Computad, Sphere};
use crate::surface::{self, Binding, Elaborated, Event, Options, Printer};
use crate::{invert, pasting};

#[derive(Parser, Debug)]
#[command(name = "ocat", version, about = "Checker and invertibility synthesis for computad cells")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Print node count and DAG size of each cell.
    #[arg(long)]
    pub stats: bool,
    /// Reject any cell above this dimension.
    #[arg(long, value_name = "N")]
    pub max_dim: Option<usize>,
    /// Output syntax for cells.
    #[arg(long, value_enum, default_value_t = Format::Surface)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Surface,
    Debug,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Elaborate and check source files.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Print the elaborated program after checking.
        #[arg(long)]
        dump_elaborated: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the inverse of a named cell, or one of its cancellation witnesses.
    Invert {
        path: PathBuf,
        name: String,
        /// Print the unit witness instead of the inverse.
        #[arg(long, conflicts_with = "counit")]
        witness: bool,
        /// Print the counit witness instead of the inverse.
        #[arg(long)]
        counit: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the source and target of a named cell.
    Boundary {
        path: PathBuf,
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run an enumeration oracle.
    Oracle {
        kind: OracleKind,
        size: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Trees,
    Positions,
    Telescope,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTIC: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Runs the driver, writing results to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match cli.command {
        Command::Check { paths, dump_elaborated, common } => cmd_check(&paths, dump_elaborated, &common, out, err),
        Command::Invert { path, name, witness, counit, common } => {
            let mode = if witness {
                InvertMode::Unit
            } else if counit {
                InvertMode::Counit
            } else {
                InvertMode::Inverse
            };
            cmd_invert(&path, &name, mode, &common, out, err)
        }
        Command::Boundary { path, name, common } => cmd_boundary(&path, &name, &common, out, err),
        Command::Oracle { kind, size } => cmd_oracle(kind, size, out),
    }
}

fn options(common: &Common) -> Options {
    Options { max_dim: common.max_dim }
}

fn read(path: &PathBuf, err: &mut dyn Write) -> Option<String> {
    match std::fs::read_to_string(path) {
        Ok(t) => Some(t),
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            None
        }
    }
}

fn load(path: &PathBuf, common: &Common, err: &mut dyn Write) -> Result<Elaborated, i32> {
    let text = read(path, err).ok_or(EXIT_IO)?;
    match surface::load(&text, &options(common)) {
        Ok(e) => Ok(e),
        Err(e) => {
            let _ = writeln!(err, "{}:{e}", path.display());
            Err(EXIT_DIAGNOSTIC)
        }
    }
}

struct Show {
    format: Format,
    printer: Printer,
}

impl Show {
    fn new(format: Format) -> Self {
        Show { format, printer: Printer::new() }
    }

    fn cell(&mut self, c: &Cell) -> String {
        match self.format {
            Format::Surface => self.printer.expr(c),
            Format::Debug => c.to_string(),
        }
    }

    fn sphere(&mut self, s: &Option<Sphere>) -> String {
        match s {
            None => "*".into(),
            Some(s) => format!("{} => {}", self.cell(&s.src), self.cell(&s.tgt)),
        }
    }
}

fn stats_line(name: &str, c: &Cell) -> String {
    format!("# stats {name}: dim {} nodes {} dag {}", c.dim(), c.tree_size(), c.dag_size())
}

pub fn cmd_check(paths: &[PathBuf], dump: bool, common: &Common, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut code = EXIT_OK;
    for path in paths {
        let Some(text) = read(path, err) else {
            code = code.max(EXIT_IO);
            continue;
        };
        let file = match surface::parse(&text) {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(err, "{}:{e}", path.display());
                code = code.max(EXIT_DIAGNOSTIC);
                continue;
            }
        };
        let el = surface::elaborate(&file, &options(common));
        let mut show = Show::new(common.format);
        for ev in &el.events {
            match ev {
                Event::Generator { name, cell } => {
                    let _ = writeln!(out, "ok {name} : {}", show.sphere(&cell.boundary()));
                }
                Event::Let { name } => {
                    let b = el.get(name).expect("recorded let");
                    let _ = writeln!(out, "ok {name} : {}", show.sphere(&b.cell.boundary()));
                    if common.stats {
                        let _ = writeln!(out, "{}", stats_line(name, &b.cell));
                    }
                    show.printer.name(&b.cell, name);
                }
                Event::Assert { name } => {
                    let _ = writeln!(out, "ok assert {name}");
                }
                Event::Failed(e) => {
                    let _ = writeln!(err, "{}:{e}", path.display());
                    code = code.max(EXIT_DIAGNOSTIC);
                }
            }
        }
        if dump {
            let _ = write!(out, "{}", dump_program(&el, common.format));
        }
    }
    code
}

fn dump_program(el: &Elaborated, format: Format) -> String {
    let (ambient, derived): (Vec<&Binding>, Vec<&Binding>) =
        el.lets.iter().partition(|b| surface::elab::is_subcomputad(&b.ctx, &el.ambient));
    let mut text = match format {
        Format::Surface => {
            let lets: Vec<(String, Cell)> = ambient.iter().map(|b| (b.name.clone(), b.cell.clone())).collect();
            surface::print_program("ambient", &el.ambient, &lets)
        }
        Format::Debug => {
            let mut s = el.ambient.to_string();
            for b in &ambient {
                s.push_str(&format!("{} = {}\n", b.name, b.cell));
            }
            s
        }
    };
    for b in derived {
        text.push_str(&format!("# `{}` lives in a derived computad\n", b.name));
        text.push_str(&program_for(b, format));
    }
    text
}

fn program_for(b: &Binding, format: Format) -> String {
    match format {
        Format::Surface => surface::print_program(&format!("{}_ctx", b.name.replace(['.', '/'], "_")), &b.ctx, &[(
            b.name.clone(),
            b.cell.clone(),
        )]),
        Format::Debug => format!("{}{} = {}\n", b.ctx, b.name, b.cell),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvertMode {
    Inverse,
    Unit,
    Counit,
}

/// The synthesised cell for a named cell, checked in its computad.
pub fn synthesise(b: &Binding, mode: InvertMode) -> crate::computad::Result<Cell> {
    let c = match mode {
        InvertMode::Inverse => invert::inverse(&b.cell)?,
        InvertMode::Unit => invert::unit(&b.cell)?,
        InvertMode::Counit => invert::counit(&b.cell)?,
    };
    if let Err(d) = check(&c, &b.ctx) {
        return Err(d.error);
    }
    Ok(c)
}

fn binding(el: &Elaborated, name: &str) -> Option<Binding> {
    if let Some(b) = el.get(name) {
        return Some(b.clone());
    }
    el.ambient.get(name).map(|c| Binding {
        name: name.into(),
        cell: c.clone(),
        ctx: el.ambient.clone(),
        span: Default::default(),
    })
}

pub fn cmd_invert(
    path: &PathBuf,
    name: &str,
    mode: InvertMode,
    common: &Common,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let el = match load(path, common, err) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let Some(b) = binding(&el, name) else {
        let _ = writeln!(err, "{}: no cell named `{name}`", path.display());
        return EXIT_DIAGNOSTIC;
    };
    let c = match synthesise(&b, mode) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "{}: {name}: {e}", path.display());
            return EXIT_DIAGNOSTIC;
        }
    };
    let suffix = match mode {
        InvertMode::Inverse => "inv",
        InvertMode::Unit => "unit",
        InvertMode::Counit => "counit",
    };
    let result = Binding { name: format!("{name}.{suffix}"), cell: c.clone(), ctx: b.ctx.clone(), span: b.span };
    let _ = write!(out, "{}", program_for(&result, common.format));
    if common.stats {
        let _ = writeln!(out, "{}", stats_line(&result.name, &c));
    }
    EXIT_OK
}

pub fn cmd_boundary(path: &PathBuf, name: &str, common: &Common, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let el = match load(path, common, err) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let Some(b) = binding(&el, name) else {
        let _ = writeln!(err, "{}: no cell named `{name}`", path.display());
        return EXIT_DIAGNOSTIC;
    };
    let mut show = Show::new(common.format);
    for l in &el.lets {
        if l.name == name {
            break;
        }
        show.printer.name(&l.cell, &l.name);
    }
    let _ = writeln!(out, "{name} : {}", show.sphere(&b.cell.boundary()));
    if common.stats {
        let _ = writeln!(out, "{}", stats_line(name, &b.cell));
    }
    EXIT_OK
}

pub fn cmd_oracle(kind: OracleKind, size: usize, out: &mut dyn Write) -> i32 {
    let mut ok = true;
    match kind {
        OracleKind::Trees => {
            let trees = pasting::enumerate_trees(size);
            for t in &trees {
                let _ = writeln!(out, "{t}");
            }
            let _ = writeln!(out, "{} trees with {size} nodes", trees.len());
        }
        OracleKind::Positions => {
            for t in pasting::enumerate_trees(size) {
                let counts = t.positions().counts();
                let total: usize = counts.iter().sum();
                let good = total + 1 == 2 * size;
                ok &= good;
                let dims: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
                let _ = writeln!(out, "{t} ({}) total {total} {}", dims.join(","), if good { "ok" } else { "FAIL" });
            }
        }
        OracleKind::Telescope => {
            for k in 1..=size {
                let ctx: Computad = invert::telescope_computad(k);
                let r = invert::telescope_cell(k).map_err(|e| e.to_string()).and_then(|t| {
                    check(&t, &ctx).map_err(|d| d.to_string())?;
                    let x0 = ctx.get(&invert::tel_x(0)).expect("x0").clone();
                    let want = Sphere::new(invert::loop_composite(k), crate::stdops::identity(&x0));
                    if t.boundary() != Some(want) {
                        return Err("unexpected boundary".into());
                    }
                    Ok(t)
                });
                match r {
                    Ok(t) => {
                        let _ = writeln!(out, "tel_{k} ok dim {} nodes {} dag {}", t.dim(), t.tree_size(), t.dag_size());
                    }
                    Err(e) => {
                        ok = false;
                        let _ = writeln!(out, "tel_{k} FAIL {e}");
                    }
                }
            }
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTIC
    }
}

/// Runs `f` on a thread with a large stack.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(f)
        .expect("spawn worker thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}
