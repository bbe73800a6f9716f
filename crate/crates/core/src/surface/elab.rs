use std::collections::{BTreeSet, HashMap};

use super::parser::{parse, Decl, Expr, ExprKind, SourceFile, TypeExpr};
use super::{Span, SurfaceError, SurfaceErrorKind};
use crate::computad::{check, pos_var, Cell, Computad, Diagnostic, Error, Kind, PdMorphism, Sphere};
use crate::pasting::{self, Pos, Tree};
use crate::{invert, stdops};

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub max_dim: Option<usize>,
}

/// A `let` together with the computad its cell lives in.
#[derive(Clone, Debug)]
pub struct Binding {
    pub name: String,
    pub cell: Cell,
    pub ctx: Computad,
    pub span: Span,
}

/// The outcome of one declaration, in source order.
#[derive(Clone, Debug)]
pub enum Event {
    Generator { name: String, cell: Cell },
    Let { name: String },
    Assert { name: String },
    Failed(SurfaceError),
}

#[derive(Clone, Debug)]
pub struct Elaborated {
    pub ambient: Computad,
    pub lets: Vec<Binding>,
    pub events: Vec<Event>,
}

impl Elaborated {
    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.lets.iter().find(|b| b.name == name)
    }

    pub fn errors(&self) -> impl Iterator<Item = &SurfaceError> {
        self.events.iter().filter_map(|e| match e {
            Event::Failed(err) => Some(err),
            _ => None,
        })
    }

    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn first_error(&self) -> Option<&SurfaceError> {
        self.errors().next()
    }
}

/// Parses and elaborates, failing on the first diagnostic.
pub fn load(text: &str, opts: &Options) -> Result<Elaborated, SurfaceError> {
    let e = elaborate(&parse(text)?, opts);
    match e.first_error() {
        Some(err) => Err(err.clone()),
        None => Ok(e),
    }
}

/// Elaborates every declaration, recording a diagnostic for each that fails
/// and carrying on with the rest.
pub fn elaborate(file: &SourceFile, opts: &Options) -> Elaborated {
    let mut el = Elaborator { opts: opts.clone(), ambient: Computad::empty(), lets: Vec::new(), index: HashMap::new() };
    let mut events = Vec::new();
    for decl in &file.decls {
        match decl {
            Decl::Computad { gens, .. } => {
                for g in gens {
                    match el.generator(&g.name, &g.ty, g.span) {
                        Ok(cell) => events.push(Event::Generator { name: g.name.clone(), cell }),
                        Err(e) => events.push(Event::Failed(e)),
                    }
                }
            }
            Decl::Let { name, expr, span } => match el.define(name, expr, *span) {
                Ok(()) => events.push(Event::Let { name: name.clone() }),
                Err(e) => events.push(Event::Failed(e)),
            },
            Decl::Assert { name, ty, span } => match el.assert(name, ty, *span) {
                Ok(()) => events.push(Event::Assert { name: name.clone() }),
                Err(e) => events.push(Event::Failed(e)),
            },
        }
    }
    Elaborated { ambient: el.ambient, lets: el.lets, events }
}

type Value = (Cell, Computad);

enum Scope<'a> {
    Top,
    Tree(&'a Tree),
}

struct Elaborator {
    opts: Options,
    ambient: Computad,
    lets: Vec<Binding>,
    index: HashMap<String, usize>,
}

fn err(span: Span, kind: SurfaceErrorKind) -> SurfaceError {
    SurfaceError::new(span, kind)
}

fn kernel(span: Span, e: Error) -> SurfaceError {
    err(span, SurfaceErrorKind::Kernel(Diagnostic { error: e, path: Vec::new() }))
}

fn diag(span: Span, d: Diagnostic) -> SurfaceError {
    err(span, SurfaceErrorKind::Kernel(d))
}

/// Whether every generator of `a` is a generator of `b`.
pub fn is_subcomputad(a: &Computad, b: &Computad) -> bool {
    a.id() == b.id() || (a.len() <= b.len() && a.generators().iter().all(|(n, c)| b.get(n) == Some(c)))
}

fn join(a: &Computad, b: &Computad) -> Option<Computad> {
    if is_subcomputad(a, b) {
        Some(b.clone())
    } else if is_subcomputad(b, a) {
        Some(a.clone())
    } else {
        None
    }
}

impl Elaborator {
    fn taken(&self, name: &str) -> bool {
        self.index.contains_key(name) || self.ambient.get(name).is_some()
    }

    fn generator(&mut self, name: &str, ty: &TypeExpr, span: Span) -> Result<Cell, SurfaceError> {
        if self.taken(name) {
            return Err(err(span, SurfaceErrorKind::Duplicate(name.into())));
        }
        let sphere = match ty {
            TypeExpr::Star => None,
            TypeExpr::Arrow(s, t) => {
                let (s, cs) = self.expr(s, &Scope::Top)?;
                let (t, ct) = self.expr(t, &Scope::Top)?;
                for c in [&cs, &ct] {
                    if !is_subcomputad(c, &self.ambient) {
                        return Err(err(span, SurfaceErrorKind::Context(format!(
                            "the type of `{name}` does not live in the ambient computad"
                        ))));
                    }
                }
                Some(Sphere::new(s, t))
            }
        };
        let (ctx, cell) = self.ambient.extend(name, sphere).map_err(|d| diag(span, d))?;
        self.limit(&cell, span)?;
        self.ambient = ctx;
        Ok(cell)
    }

    fn define(&mut self, name: &str, expr: &Expr, span: Span) -> Result<(), SurfaceError> {
        if self.taken(name) {
            return Err(err(span, SurfaceErrorKind::Duplicate(name.into())));
        }
        let (cell, ctx) = self.expr(expr, &Scope::Top)?;
        check(&cell, &ctx).map_err(|d| diag(expr.span, d))?;
        self.index.insert(name.into(), self.lets.len());
        self.lets.push(Binding { name: name.into(), cell, ctx, span });
        Ok(())
    }

    fn assert(&mut self, name: &str, ty: &TypeExpr, span: Span) -> Result<(), SurfaceError> {
        let (cell, _) = self.lookup(name, span)?;
        let ok = match (ty, cell.boundary()) {
            (TypeExpr::Star, b) => b.is_none(),
            (TypeExpr::Arrow(s, t), Some(b)) => {
                let (s, _) = self.expr(s, &Scope::Top)?;
                let (t, _) = self.expr(t, &Scope::Top)?;
                b == Sphere::new(s, t)
            }
            (TypeExpr::Arrow(..), None) => false,
        };
        if ok {
            Ok(())
        } else {
            Err(err(span, SurfaceErrorKind::Assertion(format!("`{name}` does not have the stated type"))))
        }
    }

    fn lookup(&self, name: &str, span: Span) -> Result<Value, SurfaceError> {
        if let Some(&i) = self.index.get(name) {
            let b = &self.lets[i];
            return Ok((b.cell.clone(), b.ctx.clone()));
        }
        if let Some(c) = self.ambient.get(name) {
            return Ok((c.clone(), self.ambient.clone()));
        }
        Err(err(span, SurfaceErrorKind::Unbound(name.into())))
    }

    fn limit(&self, c: &Cell, span: Span) -> Result<(), SurfaceError> {
        match self.opts.max_dim {
            Some(max) if c.dim() > max => Err(err(span, SurfaceErrorKind::MaxDim { dim: c.dim(), max })),
            _ => Ok(()),
        }
    }

    fn expr(&self, e: &Expr, scope: &Scope) -> Result<Value, SurfaceError> {
        let v = self.expr_inner(e, scope)?;
        self.limit(&v.0, e.span)?;
        Ok(v)
    }

    fn expr_inner(&self, e: &Expr, scope: &Scope) -> Result<Value, SurfaceError> {
        let span = e.span;
        let k = |r: crate::computad::Result<Cell>| r.map_err(|x| kernel(span, x));
        match &e.kind {
            ExprKind::Name(n) => match scope {
                Scope::Top => self.lookup(n, span),
                Scope::Tree(tree) => match n.parse::<Pos>() {
                    Ok(p) if p.is_valid_in(tree) => Ok((pos_var(&p), Computad::free(tree))),
                    _ => Err(err(span, SurfaceErrorKind::Unbound(format!("{n}` in the scope of tree `{tree}")))),
                },
            },
            ExprKind::Comp { k: idx, args } => {
                let vals = args.iter().map(|a| self.expr(a, scope)).collect::<Result<Vec<_>, _>>()?;
                let ctx = self.join_all(&vals, span)?;
                let cells: Vec<Cell> = vals.into_iter().map(|v| v.0).collect();
                let codims = match idx {
                    Some(i) => vec![*i; cells.len() - 1],
                    None => stdops::default_codims(&cells),
                };
                Ok((k(stdops::chain_comp(&cells, &codims))?, ctx))
            }
            ExprKind::Id(a) => {
                let (c, ctx) = self.expr(a, scope)?;
                Ok((stdops::identity(&c), ctx))
            }
            ExprKind::Coh { tree, src, tgt, args } => self.coh(tree, src, tgt, args.as_deref(), scope, span),
            ExprKind::Suspend(a) => {
                let (c, ctx) = self.expr(a, scope)?;
                Ok((stdops::suspend(&c), stdops::suspend_computad(&ctx)))
            }
            ExprKind::Opposite(a, w) => {
                let (c, ctx) = self.expr(a, scope)?;
                Ok((stdops::opposite(w, &c), stdops::opposite_computad(w, &ctx)))
            }
            ExprKind::Functorialise(a, marked) => {
                let (c, _) = self.expr(a, scope)?;
                let Kind::Coh { tree, args, .. } = c.kind() else {
                    return Err(err(span, SurfaceErrorKind::Invalid("`Fn` expects a coherence".into())));
                };
                if args.as_ref() != PdMorphism::identity(tree).cells.as_slice() {
                    return Err(err(span, SurfaceErrorKind::Invalid(
                        "`Fn` expects a coherence without arguments".into(),
                    )));
                }
                let marked: BTreeSet<Pos> = marked.iter().cloned().collect();
                let parts = stdops::split_composite(&c).map_err(|x| kernel(span, x))?;
                let f = k(stdops::functorialise_coh(tree, &marked, &parts.a, &parts.b))?;
                let grown = pasting::functorialise_tree(&marked, tree).map_err(|x| kernel(span, x.into()))?;
                Ok((f, Computad::free(&grown.tree)))
            }
            ExprKind::Rebias(a) => {
                let (c, ctx) = self.expr(a, scope)?;
                Ok((k(stdops::assoc_bias(&c))?, ctx))
            }
            ExprKind::Inverse(a) => {
                let (c, ctx) = self.expr(a, scope)?;
                Ok((k(invert::inverse(&c))?, ctx))
            }
            ExprKind::Unit(a) => {
                let (c, ctx) = self.expr(a, scope)?;
                Ok((k(invert::unit(&c))?, ctx))
            }
            ExprKind::Counit(a) => {
                let (c, ctx) = self.expr(a, scope)?;
                Ok((k(invert::counit(&c))?, ctx))
            }
        }
    }

    fn join_all(&self, vals: &[Value], span: Span) -> Result<Computad, SurfaceError> {
        let mut ctx = vals[0].1.clone();
        for (_, c) in &vals[1..] {
            ctx = join(&ctx, c).ok_or_else(|| {
                err(span, SurfaceErrorKind::Context("operands live in unrelated computads".into()))
            })?;
        }
        Ok(ctx)
    }

    fn coh(
        &self,
        tree: &Tree,
        src: &Expr,
        tgt: &Expr,
        args: Option<&[(Pos, Expr)]>,
        scope: &Scope,
        span: Span,
    ) -> Result<Value, SurfaceError> {
        let inner = Scope::Tree(tree);
        let (s, _) = self.expr(src, &inner)?;
        let (t, _) = self.expr(tgt, &inner)?;
        let sphere = Sphere::new(s, t);
        let Some(args) = args else {
            let free = Computad::free(tree);
            let c = Cell::coh_pd(tree, sphere, &PdMorphism::identity(tree)).map_err(|x| kernel(span, x))?;
            check(&c, &free).map_err(|d| diag(span, d))?;
            return Ok((c, free));
        };
        let mut given: HashMap<Pos, (Cell, Span)> = HashMap::new();
        let mut vals = Vec::new();
        for (p, e) in args {
            if !p.is_valid_in(tree) {
                return Err(err(e.span, SurfaceErrorKind::Invalid(format!("{p} is not a position of {tree}"))));
            }
            let v = self.expr(e, scope)?;
            if given.insert(p.clone(), (v.0.clone(), e.span)).is_some() {
                return Err(err(e.span, SurfaceErrorKind::Duplicate(p.to_string())));
            }
            vals.push(v);
        }
        let table = tree.positions();
        for p in table.locally_maximal() {
            if !given.contains_key(&p) {
                return Err(err(span, SurfaceErrorKind::Invalid(format!("no argument given for position {p}"))));
            }
        }
        let ctx = self.join_all(&vals, span)?;
        let f = PdMorphism::from_leaves(tree, |p| given[p].0.clone()).map_err(|x| kernel(span, x))?;
        for (p, (c, at)) in &given {
            if f.get(p) != Some(c) {
                return Err(err(*at, SurfaceErrorKind::Invalid(format!(
                    "argument at {p} disagrees with the boundaries of the other arguments"
                ))));
            }
        }
        let c = Cell::coh_pd(tree, sphere, &f).map_err(|x| kernel(span, x))?;
        check(&c, &ctx).map_err(|d| diag(span, d))?;
        Ok((c, ctx))
    }
}
