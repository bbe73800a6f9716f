//! Computads, cells and the well-formedness checker.
//!
//! Cells are hash-consed: structurally equal cells share one node, so equality
//! and hashing are pointer operations. A generator cell carries its attaching
//! sphere, which makes a cell self-describing independently of any computad.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock, Mutex, OnceLock};

use thiserror::Error;

use crate::pasting::{self, PastingError, Pos, PosMap, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unbound generator `{0}`")]
    UnboundGenerator(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("sphere is not full: {0}")]
    NotFull(String),
    #[error("arguments are not globular: {0}")]
    NonGlobularArgs(String),
    #[error("cell is not invertible: top-dimensional support {{{}}}", .0.join(", "))]
    NonInvertible(Vec<String>),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Pasting(#[from] PastingError),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A checker diagnostic: an error together with the path into the term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub error: Error,
    pub path: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.error)
        } else {
            write!(f, "{} (at {})", self.error, self.path.join("/"))
        }
    }
}

impl std::error::Error for Diagnostic {}

/// A parallel pair of cells.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Sphere {
    pub src: Cell,
    pub tgt: Cell,
}

impl Sphere {
    pub fn new(src: Cell, tgt: Cell) -> Sphere {
        Sphere { src, tgt }
    }

    pub fn dim(&self) -> usize {
        self.src.dim()
    }

    pub fn swap(&self) -> Sphere {
        Sphere::new(self.tgt.clone(), self.src.clone())
    }

    pub fn is_parallel(&self) -> bool {
        self.src.dim() == self.tgt.dim() && self.src.boundary() == self.tgt.boundary()
    }
}

pub enum Kind {
    Var { name: Arc<str>, ty: Option<Sphere> },
    Coh { tree: Tree, ty: Sphere, args: Arc<[Cell]> },
}

pub type Support = BTreeSet<(usize, Arc<str>)>;

pub struct Node {
    id: u64,
    dim: usize,
    kind: Kind,
    boundary: OnceLock<Option<Sphere>>,
    support: OnceLock<Arc<Support>>,
}

#[derive(Clone)]
pub struct Cell(Arc<Node>);

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Var(Arc<str>, Option<(u64, u64)>),
    Coh(u64, u64, u64, Vec<u64>),
}

static CELL_IDS: AtomicU64 = AtomicU64::new(0);
static CELLS: LazyLock<Mutex<HashMap<Key, Cell>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

fn intern(key: Key, dim: usize, kind: Kind) -> Cell {
    let mut table = CELLS.lock().unwrap();
    if let Some(c) = table.get(&key) {
        return c.clone();
    }
    let id = CELL_IDS.fetch_add(1, Ordering::Relaxed);
    let c = Cell(Arc::new(Node {
        id,
        dim,
        kind,
        boundary: OnceLock::new(),
        support: OnceLock::new(),
    }));
    table.insert(key, c.clone());
    c
}

impl Cell {
    /// A generator with the given attaching sphere (`None` in dimension 0).
    pub fn var(name: &str, ty: Option<Sphere>) -> Cell {
        let name: Arc<str> = Arc::from(name);
        let dim = ty.as_ref().map_or(0, |s| s.dim() + 1);
        let key = Key::Var(name.clone(), ty.as_ref().map(|s| (s.src.id(), s.tgt.id())));
        intern(key, dim, Kind::Var { name, ty })
    }

    /// A coherence `coh(tree, ty, args)` with `args` listed in canonical
    /// position order. Only the shape is validated here; `check` does the rest.
    pub fn coh(tree: &Tree, ty: Sphere, args: Vec<Cell>) -> Result<Cell> {
        let table = tree.positions();
        if args.len() != table.len() {
            return Err(Error::DimMismatch(format!(
                "tree {tree} has {} positions but {} arguments were given",
                table.len(),
                args.len()
            )));
        }
        if ty.src.dim() != ty.tgt.dim() {
            return Err(Error::DimMismatch(format!(
                "sphere sides have dimensions {} and {}",
                ty.src.dim(),
                ty.tgt.dim()
            )));
        }
        for side in [&ty.src, &ty.tgt] {
            if let Some((_, name)) = side.support().iter().find(|(_, n)| table.index_of_name(n).is_none()) {
                return Err(Error::UnboundGenerator(format!("{name} in a sphere over {tree}")));
            }
        }
        let key = Key::Coh(tree.id(), ty.src.id(), ty.tgt.id(), args.iter().map(Cell::id).collect());
        let dim = ty.dim() + 1;
        Ok(intern(key, dim, Kind::Coh { tree: tree.clone(), ty, args: args.into() }))
    }

    /// A coherence whose arguments are given by a position morphism.
    pub fn coh_pd(tree: &Tree, ty: Sphere, args: &PdMorphism) -> Result<Cell> {
        if args.tree != *tree {
            return Err(Error::DimMismatch(format!("arguments over {} for tree {tree}", args.tree)));
        }
        Cell::coh(tree, ty, args.cells.clone())
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn is_var(&self) -> bool {
        matches!(self.0.kind, Kind::Var { .. })
    }

    pub fn var_name(&self) -> Option<&Arc<str>> {
        match &self.0.kind {
            Kind::Var { name, .. } => Some(name),
            Kind::Coh { .. } => None,
        }
    }

    /// The source and target of a cell of positive dimension.
    pub fn boundary(&self) -> Option<Sphere> {
        self.0
            .boundary
            .get_or_init(|| match &self.0.kind {
                Kind::Var { ty, .. } => ty.clone(),
                Kind::Coh { tree, ty, args } => {
                    let f = Subst::from_pd(&PdMorphism { tree: tree.clone(), cells: args.to_vec() });
                    let src = f.apply(&ty.src).expect("coherence sphere lives over its tree");
                    let tgt = f.apply(&ty.tgt).expect("coherence sphere lives over its tree");
                    Some(Sphere::new(src, tgt))
                }
            })
            .clone()
    }

    pub fn src(&self) -> Option<Cell> {
        self.boundary().map(|s| s.src)
    }

    pub fn tgt(&self) -> Option<Cell> {
        self.boundary().map(|s| s.tgt)
    }

    /// The iterated `k`-source, for `k ≤ dim`.
    pub fn src_at(&self, k: usize) -> Cell {
        let mut c = self.clone();
        while c.dim() > k {
            c = c.src().expect("positive dimension");
        }
        c
    }

    pub fn tgt_at(&self, k: usize) -> Cell {
        let mut c = self.clone();
        while c.dim() > k {
            c = c.tgt().expect("positive dimension");
        }
        c
    }

    /// Every generator occurring in the cell, including those reached through
    /// attaching spheres, tagged with its dimension.
    pub fn support(&self) -> Arc<Support> {
        if let Some(s) = self.0.support.get() {
            return s.clone();
        }
        let s = match &self.0.kind {
            Kind::Var { name, ty } => {
                let mut s = Support::new();
                s.insert((self.dim(), name.clone()));
                if let Some(ty) = ty {
                    s.extend(ty.src.support().iter().cloned());
                    s.extend(ty.tgt.support().iter().cloned());
                }
                Arc::new(s)
            }
            Kind::Coh { args, .. } => {
                let mut s = Support::new();
                for a in args.iter() {
                    let sa = a.support();
                    if !sa.is_subset(&s) {
                        s.extend(sa.iter().cloned());
                    }
                }
                Arc::new(s)
            }
        };
        self.0.support.get_or_init(|| s).clone()
    }

    /// The names of the `k`-dimensional generators in the support.
    pub fn supp(&self, k: usize) -> BTreeSet<Arc<str>> {
        self.support().iter().filter(|(d, _)| *d == k).map(|(_, n)| n.clone()).collect()
    }

    /// Number of distinct nodes of the term. Generators are leaves.
    pub fn dag_size(&self) -> usize {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(c) = stack.pop() {
            if !seen.insert(c.id()) {
                continue;
            }
            match c.kind() {
                Kind::Var { .. } => {}
                Kind::Coh { ty, args, .. } => {
                    stack.push(ty.src.clone());
                    stack.push(ty.tgt.clone());
                    stack.extend(args.iter().cloned());
                }
            }
        }
        seen.len()
    }

    /// Size of the term as a tree, counting shared nodes once per occurrence.
    pub fn tree_size(&self) -> u128 {
        fn go(c: &Cell, memo: &mut HashMap<u64, u128>) -> u128 {
            if let Some(&n) = memo.get(&c.id()) {
                return n;
            }
            let n = match c.kind() {
                Kind::Var { .. } => 1,
                Kind::Coh { ty, args, .. } => {
                    let mut n = 1u128.saturating_add(go(&ty.src, memo)).saturating_add(go(&ty.tgt, memo));
                    for a in args.iter() {
                        n = n.saturating_add(go(a, memo));
                    }
                    n
                }
            };
            memo.insert(c.id(), n);
            n
        }
        go(self, &mut HashMap::new())
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Cell) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Cell {}

impl Hash for Cell {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

/// Prefix notation listing the locally maximal arguments of each coherence.
impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Var { name, .. } => f.write_str(name),
            Kind::Coh { tree, ty, args } => {
                write!(f, "coh[{tree}; {} => {}](", ty.src, ty.tgt)?;
                let table = tree.positions();
                let mut first = true;
                for (p, a) in table.positions.iter().zip(args.iter()) {
                    if pasting::is_locally_maximal(tree, p) {
                        if !first {
                            f.write_str(", ")?;
                        }
                        first = false;
                        write!(f, "{p} := {a}")?;
                    }
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An assignment of cells to generator names, applied by substitution.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Subst {
    map: HashMap<Arc<str>, Cell>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn insert(&mut self, name: &str, cell: Cell) {
        self.map.insert(Arc::from(name), cell);
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.map.get(name)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, &Cell)> {
        self.map.iter()
    }

    pub fn from_pd(f: &PdMorphism) -> Subst {
        let table = f.tree.positions();
        let map = table
            .positions
            .iter()
            .zip(&f.cells)
            .map(|(p, c)| (Arc::from(p.to_string().as_str()), c.clone()))
            .collect();
        Subst { map }
    }

    /// The substitution induced by a position map between free computads.
    pub fn from_pos_map(m: &PosMap) -> Subst {
        Subst::from_pd(&PdMorphism::from_pos_map(m))
    }

    pub fn identity(ctx: &Computad) -> Subst {
        Subst { map: ctx.generators().iter().map(|(n, c)| (n.clone(), c.clone())).collect() }
    }

    pub fn apply(&self, c: &Cell) -> Result<Cell> {
        self.apply_memo(c, &mut HashMap::new())
    }

    fn apply_memo(&self, c: &Cell, memo: &mut HashMap<u64, Cell>) -> Result<Cell> {
        if let Some(r) = memo.get(&c.id()) {
            return Ok(r.clone());
        }
        let r = match c.kind() {
            Kind::Var { name, .. } => {
                self.map.get(name).cloned().ok_or_else(|| Error::UnboundGenerator(name.to_string()))?
            }
            Kind::Coh { tree, ty, args } => {
                let args = args.iter().map(|a| self.apply_memo(a, memo)).collect::<Result<Vec<_>>>()?;
                Cell::coh(tree, ty.clone(), args)?
            }
        };
        memo.insert(c.id(), r.clone());
        Ok(r)
    }

    pub fn apply_sphere(&self, s: &Sphere) -> Result<Sphere> {
        let mut memo = HashMap::new();
        Ok(Sphere::new(self.apply_memo(&s.src, &mut memo)?, self.apply_memo(&s.tgt, &mut memo)?))
    }

    /// `self ∘ g`: apply `g` first, then `self`.
    pub fn after(&self, g: &Subst) -> Result<Subst> {
        let mut memo = HashMap::new();
        let map = g
            .map
            .iter()
            .map(|(n, c)| Ok((n.clone(), self.apply_memo(c, &mut memo)?)))
            .collect::<Result<_>>()?;
        Ok(Subst { map })
    }
}

/// A morphism out of the free computad on a tree, listed in canonical
/// position order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PdMorphism {
    pub tree: Tree,
    pub cells: Vec<Cell>,
}

impl PdMorphism {
    pub fn new(tree: &Tree, cells: Vec<Cell>) -> PdMorphism {
        assert_eq!(cells.len(), tree.positions().len(), "one cell per position");
        PdMorphism { tree: tree.clone(), cells }
    }

    pub fn from_fn(tree: &Tree, f: impl FnMut(&Pos) -> Cell) -> PdMorphism {
        let cells = tree.positions().positions.iter().map(f).collect();
        PdMorphism { tree: tree.clone(), cells }
    }

    pub fn try_from_fn(tree: &Tree, f: impl FnMut(&Pos) -> Result<Cell>) -> Result<PdMorphism> {
        let cells = tree.positions().positions.iter().map(f).collect::<Result<_>>()?;
        Ok(PdMorphism { tree: tree.clone(), cells })
    }

    /// The inclusion of `Free(tree)` into itself.
    pub fn identity(tree: &Tree) -> PdMorphism {
        PdMorphism::from_fn(tree, pos_var)
    }

    pub fn from_pos_map(m: &PosMap) -> PdMorphism {
        PdMorphism { tree: m.source.clone(), cells: m.images().iter().map(pos_var).collect() }
    }

    /// Builds a morphism from the images of the locally maximal positions,
    /// inferring the rest from boundaries.
    pub fn from_leaves(tree: &Tree, leaf: impl Fn(&Pos) -> Cell) -> Result<PdMorphism> {
        let table = tree.positions();
        let mut cells: Vec<Option<Cell>> = vec![None; table.len()];
        let mut order: Vec<usize> = (0..table.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(table.positions[i].dim()));
        for i in order {
            let p = &table.positions[i];
            if pasting::is_locally_maximal(tree, p) {
                let c = leaf(p);
                if c.dim() != p.dim() {
                    return Err(Error::DimMismatch(format!("{p} assigned a {}-cell", c.dim())));
                }
                set_slot(&mut cells, i, c, p)?;
            }
            let c = cells[i].clone().ok_or_else(|| {
                Error::Precondition(format!("position {p} is not determined by the leaves"))
            })?;
            if p.dim() > 0 {
                let b = c.boundary().expect("positive dimension");
                set_slot(&mut cells, table.index_of(&p.src()?).unwrap(), b.src, p)?;
                set_slot(&mut cells, table.index_of(&p.tgt()?).unwrap(), b.tgt, p)?;
            }
        }
        Ok(PdMorphism { tree: tree.clone(), cells: cells.into_iter().map(Option::unwrap).collect() })
    }

    pub fn get(&self, p: &Pos) -> Option<&Cell> {
        self.tree.positions().index_of(p).map(|i| &self.cells[i])
    }

    pub fn to_subst(&self) -> Subst {
        Subst::from_pd(self)
    }

    /// Composition with a position map into the source tree.
    pub fn precompose(&self, m: &PosMap) -> PdMorphism {
        assert!(m.target == self.tree, "position map lands in a different tree");
        let cells = m.images().iter().map(|q| self.get(q).expect("valid image").clone()).collect();
        PdMorphism { tree: m.source.clone(), cells }
    }

    /// Pushes every image along a substitution.
    pub fn then(&self, f: &Subst) -> Result<PdMorphism> {
        let mut memo = HashMap::new();
        let cells = self.cells.iter().map(|c| f.apply_memo(c, &mut memo)).collect::<Result<_>>()?;
        Ok(PdMorphism { tree: self.tree.clone(), cells })
    }

    pub fn apply(&self, c: &Cell) -> Result<Cell> {
        self.to_subst().apply(c)
    }

    pub fn check_globular(&self) -> Result<()> {
        let table = self.tree.positions();
        for (p, c) in table.positions.iter().zip(&self.cells) {
            if c.dim() != p.dim() {
                return Err(Error::DimMismatch(format!("position {p} assigned a {}-cell", c.dim())));
            }
            if p.dim() > 0 {
                let b = c.boundary().expect("positive dimension");
                let s = self.get(&p.src()?).unwrap();
                let t = self.get(&p.tgt()?).unwrap();
                if b.src != *s || b.tgt != *t {
                    return Err(Error::NonGlobularArgs(format!("boundary of the image of {p}")));
                }
            }
        }
        Ok(())
    }

    /// Whether every generator of `ctx` occurs in the support of some image.
    pub fn covers(&self, ctx: &Computad) -> bool {
        let mut seen = Support::new();
        for c in &self.cells {
            seen.extend(c.support().iter().cloned());
        }
        ctx.generators().iter().all(|(n, c)| seen.contains(&(c.dim(), n.clone())))
    }
}

fn set_slot(cells: &mut [Option<Cell>], i: usize, c: Cell, from: &Pos) -> Result<()> {
    match &cells[i] {
        Some(old) if *old != c => Err(Error::NonGlobularArgs(format!(
            "conflicting boundary cells forced by {from}: {old} and {c}"
        ))),
        _ => {
            cells[i] = Some(c);
            Ok(())
        }
    }
}

static POS_VARS: LazyLock<Mutex<HashMap<Pos, Cell>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// The generator of a free computad named after a position. Source and target
/// of a position depend only on the position itself, so the cell is shared by
/// every tree containing it.
pub fn pos_var(p: &Pos) -> Cell {
    if let Some(c) = POS_VARS.lock().unwrap().get(p) {
        return c.clone();
    }
    let ty = if p.dim() == 0 {
        None
    } else {
        Some(Sphere::new(pos_var(&p.src().unwrap()), pos_var(&p.tgt().unwrap())))
    };
    let c = Cell::var(&p.to_string(), ty);
    POS_VARS.lock().unwrap().insert(p.clone(), c.clone());
    c
}

struct ComputadData {
    id: u64,
    generators: Vec<(Arc<str>, Cell)>,
    index: HashMap<Arc<str>, usize>,
}

/// A finite computad: an ordered list of named generators.
#[derive(Clone)]
pub struct Computad(Arc<ComputadData>);

static COMPUTAD_IDS: AtomicU64 = AtomicU64::new(0);
static FREE: LazyLock<Mutex<HashMap<u64, Computad>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

impl Computad {
    pub fn empty() -> Computad {
        Computad::from_cells(Vec::new())
    }

    fn from_cells(generators: Vec<(Arc<str>, Cell)>) -> Computad {
        let index = generators.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
        let id = COMPUTAD_IDS.fetch_add(1, Ordering::Relaxed);
        Computad(Arc::new(ComputadData { id, generators, index }))
    }

    /// Extends the computad with a generator whose attaching sphere must be
    /// well formed in the current computad.
    pub fn extend(&self, name: &str, ty: Option<Sphere>) -> std::result::Result<(Computad, Cell), Diagnostic> {
        if self.0.index.contains_key(name) {
            return Err(Diagnostic {
                error: Error::Precondition(format!("generator `{name}` is declared twice")),
                path: vec![name.to_string()],
            });
        }
        if let Some(ty) = &ty {
            check_sphere(ty, self).map_err(|mut d| {
                d.path.insert(0, name.to_string());
                d
            })?;
        }
        let cell = Cell::var(name, ty);
        let mut generators = self.0.generators.clone();
        generators.push((Arc::from(name), cell.clone()));
        Ok((Computad::from_cells(generators), cell))
    }

    /// Builds a computad from generator declarations in order.
    pub fn build<'a>(
        decls: impl IntoIterator<Item = (&'a str, Option<(Cell, Cell)>)>,
    ) -> std::result::Result<Computad, Diagnostic> {
        let mut c = Computad::empty();
        for (name, ty) in decls {
            c = c.extend(name, ty.map(|(s, t)| Sphere::new(s, t)))?.0;
        }
        Ok(c)
    }

    /// The free computad on the positions of a tree.
    pub fn free(tree: &Tree) -> Computad {
        if let Some(c) = FREE.lock().unwrap().get(&tree.id()) {
            return c.clone();
        }
        let generators = tree
            .positions()
            .positions
            .iter()
            .map(|p| (Arc::from(p.to_string().as_str()), pos_var(p)))
            .collect();
        let c = Computad::from_cells(generators);
        FREE.lock().unwrap().insert(tree.id(), c.clone());
        c
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn generators(&self) -> &[(Arc<str>, Cell)] {
        &self.0.generators
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.0.index.get(name).map(|&i| &self.0.generators[i].1)
    }

    pub fn dim(&self) -> usize {
        self.0.generators.iter().map(|(_, c)| c.dim()).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.generators.is_empty()
    }
}

impl fmt::Display for Computad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, c) in self.generators() {
            match c.boundary() {
                None => writeln!(f, "{name} : *")?,
                Some(s) => writeln!(f, "{name} : {} => {}", s.src, s.tgt)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Computad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Computad#{} {{ {} generators }}", self.id(), self.len())
    }
}

/// Whether `a` and `b` form a full `n`-sphere over `tree`.
pub fn is_full(tree: &Tree, ty: &Sphere, n: usize) -> bool {
    if ty.src.dim() != n || ty.tgt.dim() != n || !ty.is_parallel() {
        return false;
    }
    let names = |m: PosMap| -> BTreeSet<Arc<str>> {
        m.images().iter().filter(|p| p.dim() == n).map(|p| Arc::from(p.to_string().as_str())).collect()
    };
    if ty.src.supp(n) != names(pasting::cosource(n, tree)) || ty.tgt.supp(n) != names(pasting::cotarget(n, tree)) {
        return false;
    }
    match ty.src.boundary() {
        Some(b) => is_full(tree, &b, n - 1),
        None => true,
    }
}

fn diag(error: Error, path: &[String]) -> Diagnostic {
    Diagnostic { error, path: path.to_vec() }
}

/// Checks that a cell is derivable in the given computad.
pub fn check(c: &Cell, ctx: &Computad) -> std::result::Result<(), Diagnostic> {
    Checker::default().cell(c, ctx, &mut Vec::new())
}

pub fn check_sphere(s: &Sphere, ctx: &Computad) -> std::result::Result<(), Diagnostic> {
    let mut ck = Checker::default();
    let mut path = vec!["src".to_string()];
    ck.cell(&s.src, ctx, &mut path)?;
    path[0] = "tgt".to_string();
    ck.cell(&s.tgt, ctx, &mut path)?;
    if !s.is_parallel() {
        return Err(diag(
            Error::BoundaryMismatch(format!("{} and {} are not parallel", s.src, s.tgt)),
            &[],
        ));
    }
    Ok(())
}

#[derive(Default)]
struct Checker {
    visited: HashSet<(u64, u64)>,
}

impl Checker {
    fn cell(&mut self, c: &Cell, ctx: &Computad, path: &mut Vec<String>) -> std::result::Result<(), Diagnostic> {
        if self.visited.contains(&(c.id(), ctx.id())) {
            return Ok(());
        }
        match c.kind() {
            Kind::Var { name, .. } => {
                if ctx.get(name) != Some(c) {
                    return Err(diag(Error::UnboundGenerator(name.to_string()), path));
                }
            }
            Kind::Coh { tree, ty, args } => {
                let n = ty.dim();
                if tree.dim() > n + 1 {
                    return Err(diag(
                        Error::DimMismatch(format!("tree {tree} has dimension above {}", n + 1)),
                        path,
                    ));
                }
                let free = Computad::free(tree);
                path.push("sphere.src".into());
                self.cell(&ty.src, &free, path)?;
                *path.last_mut().unwrap() = "sphere.tgt".into();
                self.cell(&ty.tgt, &free, path)?;
                path.pop();
                if !ty.is_parallel() {
                    return Err(diag(
                        Error::NotFull(format!("{} => {} is not a parallel pair", ty.src, ty.tgt)),
                        path,
                    ));
                }
                if !is_full(tree, ty, n) {
                    return Err(diag(Error::NotFull(format!("{} => {} over {tree}", ty.src, ty.tgt)), path));
                }
                let table = tree.positions();
                for (p, a) in table.positions.iter().zip(args.iter()) {
                    path.push(p.to_string());
                    if a.dim() != p.dim() {
                        return Err(diag(
                            Error::DimMismatch(format!("argument at {p} has dimension {}", a.dim())),
                            path,
                        ));
                    }
                    self.cell(a, ctx, path)?;
                    path.pop();
                }
                PdMorphism::new(tree, args.to_vec()).check_globular().map_err(|e| diag(e, path))?;
            }
        }
        self.visited.insert((c.id(), ctx.id()));
        Ok(())
    }
}

/// `supp_d(c)` rendered for diagnostics.
pub fn top_support_names(c: &Cell) -> Vec<String> {
    c.supp(c.dim()).iter().map(|n| n.to_string()).collect()
}
