use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use crate::computad::{Cell, Computad, Kind};
use crate::pasting::{self, Tree};
use crate::stdops;

/// How a cell is written: sugar is used only when it elaborates back to the
/// same cell.
#[derive(Clone, Debug)]
enum View {
    Var(String),
    Id(Cell),
    Comp(Option<usize>, Vec<Cell>),
    Coh(Tree, Cell, Cell, Vec<(String, Cell)>),
}

impl View {
    fn children(&self) -> Vec<Cell> {
        match self {
            View::Var(_) => Vec::new(),
            View::Id(c) => vec![c.clone()],
            View::Comp(_, cs) => cs.clone(),
            View::Coh(_, _, _, args) => args.iter().map(|(_, c)| c.clone()).collect(),
        }
    }
}

fn view_of(c: &Cell) -> View {
    let Kind::Coh { tree, ty, args } = c.kind() else {
        return View::Var(c.var_name().unwrap().to_string());
    };
    let table = tree.positions();
    let at = |p: &pasting::Pos| args[table.index_of(p).unwrap()].clone();
    if tree.is_disk() && c.dim() == tree.dim() + 1 {
        let top = at(&stdops::disk_top(tree.dim()));
        if stdops::identity(&top) == *c {
            return View::Id(top);
        }
    }
    if c.dim() == tree.dim() && !tree.is_disk() {
        let spine = pasting::spine(tree);
        let cells: Vec<Cell> = spine.positions.iter().map(at).collect();
        if stdops::chain_comp(&cells, &spine.codims).ok().as_ref() == Some(c) {
            if spine.codims == stdops::default_codims(&cells) {
                return View::Comp(None, cells);
            }
            if spine.codims.iter().all(|&k| k == spine.codims[0]) {
                return View::Comp(Some(spine.codims[0]), cells);
            }
        }
    }
    let leaves = table.locally_maximal().into_iter().map(|p| (p.to_string(), at(&p))).collect();
    View::Coh(tree.clone(), ty.src.clone(), ty.tgt.clone(), leaves)
}

/// A printer that abbreviates named cells of the ambient computad.
#[derive(Default)]
pub struct Printer {
    names: HashMap<Cell, String>,
    views: HashMap<Cell, View>,
}

impl Printer {
    pub fn new() -> Printer {
        Printer::default()
    }

    pub fn name(&mut self, c: &Cell, name: &str) {
        if !c.is_var() {
            self.names.entry(c.clone()).or_insert_with(|| name.to_string());
        }
    }

    fn view(&mut self, c: &Cell) -> View {
        if let Some(v) = self.views.get(c) {
            return v.clone();
        }
        let v = view_of(c);
        self.views.insert(c.clone(), v.clone());
        v
    }

    /// Writes `c` as an expression of the ambient scope.
    pub fn expr(&mut self, c: &Cell) -> String {
        let mut out = String::new();
        self.write(c, true, &mut out);
        out
    }

    fn write(&mut self, c: &Cell, top: bool, out: &mut String) {
        if top {
            if let Some(n) = self.names.get(c) {
                out.push_str(n);
                return;
            }
        }
        match self.view(c) {
            View::Var(n) => out.push_str(&n),
            View::Id(a) => {
                out.push_str("id(");
                self.write(&a, top, out);
                out.push(')');
            }
            View::Comp(k, cs) => {
                match k {
                    Some(k) => write!(out, "comp_{k}(").unwrap(),
                    None => out.push_str("comp("),
                }
                for (i, a) in cs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.write(a, top, out);
                }
                out.push(')');
            }
            View::Coh(tree, s, t, args) => {
                write!(out, "coh[{tree}; ").unwrap();
                self.write(&s, false, out);
                out.push_str(" => ");
                self.write(&t, false, out);
                out.push_str("](");
                for (i, (p, a)) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write!(out, "{p} := ").unwrap();
                    self.write(a, top, out);
                }
                out.push(')');
            }
        }
    }

    /// Binds every unnamed subterm of `c` that occurs more than once and
    /// returns the auxiliary definitions in dependency order.
    pub fn share(&mut self, c: &Cell, prefix: &str, taken: &HashSet<String>) -> Vec<(String, Cell)> {
        let mut parents: HashMap<Cell, usize> = HashMap::new();
        let mut seen = HashSet::new();
        let mut stack = vec![c.clone()];
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) || (n != *c && self.names.contains_key(&n)) {
                continue;
            }
            for ch in self.view(&n).children() {
                *parents.entry(ch.clone()).or_default() += 1;
                stack.push(ch);
            }
        }
        let mut order = Vec::new();
        let mut done = HashSet::new();
        self.post_order(c, &mut done, &mut order);
        let mut out = Vec::new();
        let mut counter = 0;
        for n in order {
            if n == *c || n.is_var() || self.names.contains_key(&n) {
                continue;
            }
            if parents.get(&n).copied().unwrap_or(0) >= 2 && n.tree_size() > 16 {
                let name = loop {
                    counter += 1;
                    let candidate = format!("{prefix}.{counter}");
                    if !taken.contains(&candidate) {
                        break candidate;
                    }
                };
                self.name(&n, &name);
                out.push((name, n));
            }
        }
        out
    }

    fn post_order(&mut self, c: &Cell, done: &mut HashSet<Cell>, order: &mut Vec<Cell>) {
        if !done.insert(c.clone()) {
            return;
        }
        if !self.names.contains_key(c) {
            for ch in self.view(c).children() {
                self.post_order(&ch, done, order);
            }
        }
        order.push(c.clone());
    }
}

/// A cell as a standalone expression.
pub fn print_cell(c: &Cell) -> String {
    Printer::new().expr(c)
}

pub fn print_computad(name: &str, ctx: &Computad) -> String {
    let mut p = Printer::new();
    let mut out = format!("computad {name} {{\n");
    for (g, c) in ctx.generators() {
        match c.boundary() {
            None => writeln!(out, "  {g} : *;").unwrap(),
            Some(b) => writeln!(out, "  {g} : {} -> {};", p.expr(&b.src), p.expr(&b.tgt)).unwrap(),
        }
    }
    out.push_str("}\n");
    out
}

/// A complete source file declaring `ctx` and defining each cell, with shared
/// subterms bound by auxiliary `let`s.
pub fn print_program(name: &str, ctx: &Computad, lets: &[(String, Cell)]) -> String {
    let mut out = print_computad(name, ctx);
    let mut taken: HashSet<String> = ctx.generators().iter().map(|(n, _)| n.to_string()).collect();
    taken.extend(lets.iter().map(|(n, _)| n.clone()));
    let mut p = Printer::new();
    for (n, c) in lets {
        for (aux, cell) in p.share(c, n, &taken) {
            let text = {
                p.names.remove(&cell);
                let t = p.expr(&cell);
                p.name(&cell, &aux);
                t
            };
            writeln!(out, "let {aux} = {text}").unwrap();
            taken.insert(aux);
        }
        writeln!(out, "let {n} = {}", p.expr(c)).unwrap();
        p.name(c, n);
    }
    out
}
