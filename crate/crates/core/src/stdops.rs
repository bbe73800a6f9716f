//! The standard operations: unbiased composites and identities, unitors,
//! fillers, suspension, opposites, functorialised coherences and chain
//! reduction of cells.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, LazyLock, Mutex};

use crate::computad::{pos_var, Cell, Computad, Error, Kind, PdMorphism, Result, Sphere, Subst};
use crate::pasting::{self, Pos, PosMap, Tree};

static COMPS: LazyLock<Mutex<HashMap<(u64, usize), Cell>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// The top position of `D_n`.
pub fn disk_top(n: usize) -> Pos {
    Pos::new(vec![1; n], 0)
}

/// The unbiased composite `comp_{B,n}` over `Free(B)`, for `n ≥ dim B`.
pub fn comp(tree: &Tree, n: usize) -> Result<Cell> {
    if n < tree.dim() {
        return Err(Error::DimMismatch(format!("composite of {tree} at level {n} below its dimension")));
    }
    if let Some(c) = COMPS.lock().unwrap().get(&(tree.id(), n)) {
        return Ok(c.clone());
    }
    let c = if tree.is_disk() && tree.dim() == n {
        pos_var(&disk_top(n))
    } else {
        Cell::coh(tree, comp_sphere(tree, n - 1)?, PdMorphism::identity(tree).cells)?
    };
    COMPS.lock().unwrap().insert((tree.id(), n), c.clone());
    Ok(c)
}

/// The full sphere `A_{B,n}`.
pub fn comp_sphere(tree: &Tree, n: usize) -> Result<Sphere> {
    let bd = pasting::boundary(n, tree);
    let c = comp(&bd, n)?;
    let s = Subst::from_pos_map(&pasting::cosource(n, tree)).apply(&c)?;
    let t = Subst::from_pos_map(&pasting::cotarget(n, tree)).apply(&c)?;
    Ok(Sphere::new(s, t))
}

/// The morphism `Free(D_n) → C` classifying an `n`-cell.
pub fn disk_morphism(c: &Cell) -> PdMorphism {
    PdMorphism::from_leaves(&Tree::disk(c.dim()), |_| c.clone()).expect("a cell determines its disk")
}

pub fn identity(c: &Cell) -> Cell {
    let d = c.dim();
    let top = pos_var(&disk_top(d));
    Cell::coh(&Tree::disk(d), Sphere::new(top.clone(), top), disk_morphism(c).cells).expect("identity shape")
}

/// Assembles a morphism out of a grafted tree from morphisms on its pieces.
pub fn glue(target: &Tree, pieces: &[(PosMap, PdMorphism)]) -> Result<PdMorphism> {
    let table = target.positions();
    let mut cells: Vec<Option<Cell>> = vec![None; table.len()];
    for (inc, f) in pieces {
        assert!(inc.target == *target && inc.source == f.tree, "piece does not fit the grafted tree");
        for (i, q) in inc.images().iter().enumerate() {
            let j = table.index_of(q).expect("image inside target");
            let c = &f.cells[i];
            match &cells[j] {
                Some(old) if old != c => {
                    return Err(Error::BoundaryMismatch(format!("{old} and {c} meet at {q}")));
                }
                _ => cells[j] = Some(c.clone()),
            }
        }
    }
    let cells = cells
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| Error::Precondition(format!("position {} is not covered", table.positions[i])))
        })
        .collect::<Result<_>>()?;
    Ok(PdMorphism::new(target, cells))
}

/// The unbiased composite `x_0 *_{k_1} x_1 ... *_{k_m} x_m`.
pub fn chain_comp(cells: &[Cell], codims: &[usize]) -> Result<Cell> {
    if cells.is_empty() || codims.len() + 1 != cells.len() {
        return Err(Error::Precondition(format!("{} cells with {} codimensions", cells.len(), codims.len())));
    }
    for (w, &k) in cells.windows(2).zip(codims) {
        if k >= w[0].dim().max(w[1].dim()) || k > w[0].dim().min(w[1].dim()) {
            return Err(Error::DimMismatch(format!(
                "cannot compose a {}-cell and a {}-cell along dimension {k}",
                w[0].dim(),
                w[1].dim()
            )));
        }
    }
    let disks: Vec<Tree> = cells.iter().map(|c| Tree::disk(c.dim())).collect();
    let (tree, incs) = pasting::graft_sequence(&disks, codims)?;
    let pieces: Vec<(PosMap, PdMorphism)> = incs.into_iter().zip(cells.iter().map(disk_morphism)).collect();
    let f = glue(&tree, &pieces)?;
    f.apply(&comp(&tree, tree.dim())?)
}

pub fn binary_comp(k: usize, a: &Cell, b: &Cell) -> Result<Cell> {
    chain_comp(&[a.clone(), b.clone()], &[k])
}

/// One less than the smaller dimension of each adjacent pair.
pub fn default_codims(cells: &[Cell]) -> Vec<usize> {
    cells.windows(2).map(|w| w[0].dim().min(w[1].dim()).saturating_sub(1)).collect()
}

/// The common retraction `Free(B) → Free(∂_{d-1} B)` of the source and target
/// inclusions, sending top-dimensional positions to identities.
pub fn underline_id(tree: &Tree) -> Result<PdMorphism> {
    let d = tree.dim();
    if d == 0 {
        return Err(Error::DimMismatch("underline_id of a tree of dimension 0".into()));
    }
    let bd = pasting::boundary(d - 1, tree);
    let bd_table = bd.positions();
    let s = pasting::cosource(d - 1, tree);
    let lower = |p: &Pos| -> Result<Cell> {
        if p.dim() + 1 < d {
            return Ok(pos_var(p));
        }
        let mut found = None;
        for q in bd_table.of_dim(d - 1) {
            let sq = s.apply(q).expect("boundary position");
            let parallel = p.dim() == 0 || (sq.src()? == p.src()? && sq.tgt()? == p.tgt()?);
            if parallel {
                if found.is_some() {
                    panic!("two positions of {bd} are parallel to {p} in {tree}");
                }
                found = Some(q.clone());
            }
        }
        let q = found.unwrap_or_else(|| panic!("no position of {bd} is parallel to {p} in {tree}"));
        Ok(pos_var(&q))
    };
    PdMorphism::try_from_fn(tree, |p| {
        if p.dim() < d {
            lower(p)
        } else {
            Ok(identity(&lower(&p.src()?)?))
        }
    })
}

fn covers_free(c: &Cell, tree: &Tree) -> bool {
    let support = c.support();
    tree.positions()
        .positions
        .iter()
        .all(|p| support.contains(&(p.dim(), Arc::from(p.to_string().as_str()))))
}

/// The unbiased unitor `U(B, a)`, an invertible cell over `∂_{d-1} B`.
pub fn unitor(tree: &Tree, a: &Cell) -> Result<Cell> {
    let d = tree.dim();
    if d == 0 {
        return Err(Error::DimMismatch("unitor over a tree of dimension 0".into()));
    }
    let bd = pasting::boundary(d - 1, tree);
    if a.dim() != d - 1 || !covers_free(a, &bd) {
        return Err(Error::Precondition(format!("{a} does not cover {bd}")));
    }
    let sa = Subst::from_pos_map(&pasting::cosource(d - 1, tree)).apply(a)?;
    let ta = Subst::from_pos_map(&pasting::cotarget(d - 1, tree)).apply(a)?;
    let u = Cell::coh_pd(tree, Sphere::new(sa, ta), &underline_id(tree)?)?;
    Cell::coh(&bd, Sphere::new(u, identity(a)), PdMorphism::identity(&bd).cells)
}

/// The composite tree of a diagram of trees together with the morphism sending
/// each position to the unbiased composite of its tree.
pub fn substitution_morphism(tree: &Tree, shape: &[Tree]) -> Result<(Tree, PdMorphism)> {
    let table = tree.positions();
    let mu = pasting::substitute(tree, |p| shape[table.index_of(p).unwrap()].clone())?;
    let sp = pasting::spine(tree);
    let pieces: Vec<Tree> = sp.positions.iter().map(|p| shape[table.index_of(p).unwrap()].clone()).collect();
    let (_, incs) = pasting::graft_sequence(&pieces, &sp.codims)?;
    let mut leaves = HashMap::new();
    for ((p, piece), inc) in sp.positions.iter().zip(&pieces).zip(&incs) {
        let c = Subst::from_pos_map(inc).apply(&comp(piece, p.dim())?)?;
        leaves.insert(p.clone(), c);
    }
    let sigma = PdMorphism::from_leaves(tree, |p| leaves[p].clone())?;
    Ok((mu, sigma))
}

/// One side of a filler: a tree, its diagram of trees, a full sphere over it
/// and a covering morphism into the free computad on the composite tree.
#[derive(Clone, Debug)]
pub struct FillerSide {
    pub tree: Tree,
    pub shape: Vec<Tree>,
    pub sphere: Sphere,
    pub sigma: PdMorphism,
}

impl FillerSide {
    /// The side where every position stands for a disk.
    pub fn trivial(tree: &Tree, sphere: Sphere) -> FillerSide {
        let shape = tree.positions().positions.iter().map(|p| Tree::disk(p.dim())).collect();
        FillerSide { tree: tree.clone(), shape, sphere, sigma: PdMorphism::identity(tree) }
    }
}

/// The filler `coh(μ f_1, c_1 → c_2, id)` between two coherences that
/// substitute into the same tree.
pub fn filler(left: &FillerSide, right: &FillerSide) -> Result<Cell> {
    let table = |s: &FillerSide| s.tree.positions();
    let mu_l = pasting::substitute(&left.tree, |p| left.shape[table(left).index_of(p).unwrap()].clone())?;
    let mu_r = pasting::substitute(&right.tree, |p| right.shape[table(right).index_of(p).unwrap()].clone())?;
    if mu_l != mu_r {
        return Err(Error::Precondition(format!("the diagrams compose to different trees {mu_l} and {mu_r}")));
    }
    let free = Computad::free(&mu_l);
    for (side, name) in [(left, "first"), (right, "second")] {
        if side.sigma.tree != side.tree {
            return Err(Error::Precondition(format!("the {name} morphism has the wrong source")));
        }
        if !side.sigma.covers(&free) {
            return Err(Error::Precondition(format!("the {name} morphism does not cover {mu_l}")));
        }
    }
    let al = left.sigma.to_subst().apply_sphere(&left.sphere)?;
    let ar = right.sigma.to_subst().apply_sphere(&right.sphere)?;
    if al != ar {
        return Err(Error::BoundaryMismatch("the substituted spheres differ".into()));
    }
    let c1 = Cell::coh_pd(&left.tree, left.sphere.clone(), &left.sigma)?;
    let c2 = Cell::coh_pd(&right.tree, right.sphere.clone(), &right.sigma)?;
    Cell::coh(&mu_l, Sphere::new(c1, c2), PdMorphism::identity(&mu_l).cells)
}

/// The functorialised coherence `F_X(B, a → b)`.
pub fn functorialise_coh(tree: &Tree, marked: &BTreeSet<Pos>, a: &Cell, b: &Cell) -> Result<Cell> {
    let d = tree.dim();
    if d == 0 {
        return Err(Error::DimMismatch("functorialisation over a tree of dimension 0".into()));
    }
    let s = Subst::from_pos_map(&pasting::cosource(d - 1, tree)).apply(a)?;
    let t = Subst::from_pos_map(&pasting::cotarget(d - 1, tree)).apply(b)?;
    let c = Cell::coh(tree, Sphere::new(s, t), PdMorphism::identity(tree).cells)?;
    if marked.is_empty() {
        return Ok(c);
    }
    let f = pasting::functorialise_tree(marked, tree)?;
    let src = Subst::from_pos_map(&f.s_inc).apply(&c)?;
    let tgt = Subst::from_pos_map(&f.t_inc).apply(&c)?;
    Cell::coh(&f.tree, Sphere::new(src, tgt), PdMorphism::identity(&f.tree).cells)
}

/// The morphism `Free(red B) → Free(B)` sending each merged position to the
/// composite of its chain.
pub fn reduced_morphism(tree: &Tree) -> Result<PdMorphism> {
    let d = tree.dim();
    let red = pasting::chain_reduce(tree);
    if d == 0 {
        return Ok(PdMorphism::identity(tree));
    }
    let mut tops = HashMap::new();
    for p in red.positions().of_dim(d) {
        let (len, map) = pasting::chain_data(tree, p)?;
        let chain = Tree::chain(len).suspend_n(d - 1);
        tops.insert(p.clone(), Subst::from_pos_map(&map).apply(&comp(&chain, d)?)?);
    }
    PdMorphism::from_leaves(&red, |p| tops.get(p).cloned().unwrap_or_else(|| pos_var(p)))
}

/// A coherence of top dimension split as `coh(B, s(a) → t(b), σ)`.
pub struct Composite {
    pub tree: Tree,
    pub a: Cell,
    pub b: Cell,
    pub sigma: PdMorphism,
}

pub fn split_composite(c: &Cell) -> Result<Composite> {
    let Kind::Coh { tree, ty, args } = c.kind() else {
        return Err(Error::Precondition(format!("{c} is a generator, not a composite")));
    };
    let d = tree.dim();
    if d == 0 || d != c.dim() {
        return Err(Error::Precondition(format!("{c} is not a composite of top dimension")));
    }
    let retract = underline_id(tree)?.to_subst();
    let a = retract.apply(&ty.src)?;
    let b = retract.apply(&ty.tgt)?;
    let s = Subst::from_pos_map(&pasting::cosource(d - 1, tree)).apply(&a)?;
    let t = Subst::from_pos_map(&pasting::cotarget(d - 1, tree)).apply(&b)?;
    if s != ty.src || t != ty.tgt {
        return Err(Error::Precondition(format!("the sphere of {c} is not a source/target pair")));
    }
    Ok(Composite { tree: tree.clone(), a, b, sigma: PdMorphism::new(tree, args.to_vec()) })
}

/// The chain-reduced rebiasing `red(c)` of a composite.
pub fn reduce_cell(c: &Cell) -> Result<Cell> {
    let k = split_composite(c)?;
    let (red_tree, reduced) = reduced_sphere_and_morphism(&k)?;
    Cell::coh_pd(&red_tree.0, red_tree.1, &reduced.then(&k.sigma.to_subst())?)
}

fn reduced_sphere_and_morphism(k: &Composite) -> Result<((Tree, Sphere), PdMorphism)> {
    let d = k.tree.dim();
    let red = pasting::chain_reduce(&k.tree);
    let s = Subst::from_pos_map(&pasting::cosource(d - 1, &red)).apply(&k.a)?;
    let t = Subst::from_pos_map(&pasting::cotarget(d - 1, &red)).apply(&k.b)?;
    Ok(((red, Sphere::new(s, t)), reduced_morphism(&k.tree)?))
}

/// The invertible filler `assoc(c) : c → red(c)`.
pub fn assoc_bias(c: &Cell) -> Result<Cell> {
    let k = split_composite(c)?;
    let Kind::Coh { ty, .. } = c.kind() else { unreachable!() };
    let ((red, red_sphere), reduced) = reduced_sphere_and_morphism(&k)?;
    let c1 = Cell::coh(&k.tree, ty.clone(), PdMorphism::identity(&k.tree).cells)?;
    let c2 = Cell::coh_pd(&red, red_sphere, &reduced)?;
    let f = Cell::coh(&k.tree, Sphere::new(c1, c2), PdMorphism::identity(&k.tree).cells)?;
    k.sigma.apply(&f)
}

/// Suspended generator name: position names shift up one dimension.
pub fn suspend_name(name: &str) -> String {
    match name.parse::<Pos>() {
        Ok(p) => p.suspend().to_string(),
        Err(_) => name.to_string(),
    }
}

pub fn poles() -> (Cell, Cell) {
    (pos_var(&Pos::vertex(0)), pos_var(&Pos::vertex(1)))
}

static SUSPENSIONS: LazyLock<Mutex<HashMap<u64, Cell>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

pub fn suspend(c: &Cell) -> Cell {
    if let Some(s) = SUSPENSIONS.lock().unwrap().get(&c.id()) {
        return s.clone();
    }
    let s = match c.kind() {
        Kind::Var { name, ty } => {
            let ty = match ty {
                None => {
                    let (n, s) = poles();
                    Sphere::new(n, s)
                }
                Some(ty) => Sphere::new(suspend(&ty.src), suspend(&ty.tgt)),
            };
            Cell::var(&suspend_name(name), Some(ty))
        }
        Kind::Coh { tree, ty, args } => {
            let st = tree.suspend();
            let (n, s) = poles();
            let inner = tree.positions();
            let args = st
                .positions()
                .positions
                .iter()
                .map(|q| match q.path.split_first() {
                    None if q.slot == 0 => n.clone(),
                    None => s.clone(),
                    Some((_, rest)) => {
                        suspend(&args[inner.index_of(&Pos::new(rest.to_vec(), q.slot)).unwrap()])
                    }
                })
                .collect();
            let ty = Sphere::new(suspend(&ty.src), suspend(&ty.tgt));
            Cell::coh(&st, ty, args).expect("suspension preserves shape")
        }
    };
    SUSPENSIONS.lock().unwrap().insert(c.id(), s.clone());
    s
}

pub fn suspend_n(c: &Cell, n: usize) -> Cell {
    (0..n).fold(c.clone(), |c, _| suspend(&c))
}

pub fn suspend_computad(ctx: &Computad) -> Computad {
    let mut decls: Vec<(String, Option<(Cell, Cell)>)> = vec![("p/0".into(), None), ("p/1".into(), None)];
    for (name, c) in ctx.generators() {
        let sc = suspend(c);
        let b = sc.boundary().unwrap();
        decls.push((suspend_name(name), Some((b.src, b.tgt))));
    }
    Computad::build(decls.iter().map(|(n, t)| (n.as_str(), t.clone()))).expect("suspension of a valid computad")
}

/// The `w`-opposite of a cell. Generator names are kept.
pub fn opposite(w: &BTreeSet<usize>, c: &Cell) -> Cell {
    opposite_memo(w, c, &mut HashMap::new())
}

fn opposite_memo(w: &BTreeSet<usize>, c: &Cell, memo: &mut HashMap<u64, Cell>) -> Cell {
    if w.is_empty() {
        return c.clone();
    }
    if let Some(r) = memo.get(&c.id()) {
        return r.clone();
    }
    let flip = w.contains(&c.dim());
    let r = match c.kind() {
        Kind::Var { name, ty } => {
            let ty = ty.as_ref().map(|ty| {
                let s = Sphere::new(opposite_memo(w, &ty.src, memo), opposite_memo(w, &ty.tgt, memo));
                if flip { s.swap() } else { s }
            });
            Cell::var(name, ty)
        }
        Kind::Coh { tree, ty, args } => {
            let (op_tree, op_map) = pasting::opposite(w, tree);
            let mut rename = Subst::new();
            for p in &tree.positions().positions {
                rename.insert(&p.to_string(), pos_var(&pasting::opposite_pos(w, tree, p)));
            }
            let mut inner = HashMap::new();
            let src = rename.apply(&opposite_memo(w, &ty.src, &mut inner)).expect("renaming is total");
            let tgt = rename.apply(&opposite_memo(w, &ty.tgt, &mut inner)).expect("renaming is total");
            let s = Sphere::new(src, tgt);
            let table = tree.positions();
            let args = op_map
                .images()
                .iter()
                .map(|q| opposite_memo(w, &args[table.index_of(q).unwrap()], memo))
                .collect();
            Cell::coh(&op_tree, if flip { s.swap() } else { s }, args).expect("opposite preserves shape")
        }
    };
    memo.insert(c.id(), r.clone());
    r
}

pub fn opposite_computad(w: &BTreeSet<usize>, ctx: &Computad) -> Computad {
    let decls: Vec<(String, Option<(Cell, Cell)>)> = ctx
        .generators()
        .iter()
        .map(|(name, c)| (name.to_string(), opposite(w, c).boundary().map(|b| (b.src, b.tgt))))
        .collect();
    Computad::build(decls.iter().map(|(n, t)| (n.as_str(), t.clone()))).expect("opposite of a valid computad")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::computad::check;

    fn t(s: &str) -> Tree {
        s.parse().unwrap()
    }

    fn pv(s: &str) -> Cell {
        pos_var(&s.parse().unwrap())
    }

    fn free_ok(c: &Cell, tree: &Tree) {
        if let Err(e) = check(c, &Computad::free(tree)) {
            panic!("{c} fails in Free({tree}): {e}");
        }
    }

    #[test]
    fn composite_of_a_disk_is_its_top_variable() {
        for n in 0..4 {
            assert_eq!(comp(&Tree::disk(n), n).unwrap(), pos_var(&disk_top(n)));
        }
        assert!(comp(&Tree::chain(2), 0).is_err());
    }

    #[test]
    fn binary_composite_boundary() {
        let c2 = Tree::chain(2);
        let c = comp(&c2, 1).unwrap();
        assert_eq!(c.boundary().unwrap(), Sphere::new(pv("p/0"), pv("p/2")));
        free_ok(&c, &c2);
        let up = comp(&c2, 2).unwrap();
        assert_eq!(up.boundary().unwrap(), Sphere::new(c.clone(), c));
        free_ok(&up, &c2);
    }

    #[test]
    fn identities() {
        let x = Cell::var("x", None);
        let ctx = Computad::build([("x", None)]).unwrap();
        let i = identity(&x);
        assert_eq!(i.boundary().unwrap(), Sphere::new(x.clone(), x.clone()));
        assert!(check(&i, &ctx).is_ok());
        assert!(check(&identity(&i), &ctx).is_ok());
        assert!(i.supp(1).is_empty());
        assert_eq!(i, disk_morphism(&x).apply(&comp(&Tree::disk(0), 1).unwrap()).unwrap());
    }

    #[test]
    fn whiskering_and_vertical_composition() {
        let x = Cell::var("x", None);
        let y = Cell::var("y", None);
        let z = Cell::var("z", None);
        let f = Cell::var("f", Some(Sphere::new(x.clone(), y.clone())));
        let g = Cell::var("g", Some(Sphere::new(y.clone(), z.clone())));
        let h = Cell::var("h", Some(Sphere::new(y.clone(), z.clone())));
        let a = Cell::var("a", Some(Sphere::new(g.clone(), h.clone())));
        let ctx = Computad::build([
            ("x", None),
            ("y", None),
            ("z", None),
            ("f", Some((x.clone(), y.clone()))),
            ("g", Some((y.clone(), z.clone()))),
            ("h", Some((y, z))),
            ("a", Some((g.clone(), h.clone()))),
        ])
        .unwrap();
        let w = binary_comp(0, &f, &a).unwrap();
        assert!(check(&w, &ctx).is_ok());
        assert_eq!(w.src().unwrap(), binary_comp(0, &f, &g).unwrap());
        let v = binary_comp(1, &a, &identity(&h)).unwrap();
        assert!(check(&v, &ctx).is_ok());
        assert_eq!(v.src().unwrap(), g);
        assert!(binary_comp(0, &a, &f).is_err());
        assert_eq!(default_codims(&[f.clone(), a.clone(), a]), vec![0, 1]);
    }

    #[test]
    fn underline_id_examples() {
        let d1 = Tree::disk(1);
        let u = underline_id(&d1).unwrap();
        assert_eq!(u.get(&"p1/0".parse().unwrap()).unwrap(), &identity(&pv("p/0")));
        let c2 = Tree::chain(2);
        let u = underline_id(&c2).unwrap();
        assert_eq!(u.get(&"p2/0".parse().unwrap()).unwrap(), &identity(&pv("p/0")));
        let b = t("[[[],[]],[]]");
        let u = underline_id(&b).unwrap();
        let f = identity(&pv("p1/0"));
        assert_eq!(u.get(&"p1.1/0".parse().unwrap()).unwrap(), &f);
        assert_eq!(u.get(&"p1.2/0".parse().unwrap()).unwrap(), &f);
        assert_eq!(u.get(&"p1/2".parse().unwrap()).unwrap(), &pv("p1/0"));
        assert!(underline_id(&Tree::leaf()).is_err());
    }

    #[test]
    fn unitor_examples() {
        let c2 = Tree::chain(2);
        let x = pv("p/0");
        let u = unitor(&c2, &x).unwrap();
        free_ok(&u, &Tree::leaf());
        let b = u.boundary().unwrap();
        assert_eq!(b.tgt, identity(&x));
        let i = identity(&x);
        assert_eq!(b.src, binary_comp(0, &i, &i).unwrap());
        assert!(u.supp(2).is_empty());
        let d1 = unitor(&Tree::disk(1), &x).unwrap();
        free_ok(&d1, &Tree::leaf());
        assert!(unitor(&c2, &identity(&x)).is_err());
    }

    #[test]
    fn associator_as_filler() {
        let c2 = Tree::chain(2);
        let d1 = Tree::disk(1);
        let d0 = Tree::leaf();
        let shape1: Vec<Tree> = c2
            .positions()
            .positions
            .iter()
            .map(|p| match p.to_string().as_str() {
                "p1/0" => c2.clone(),
                "p2/0" => d1.clone(),
                _ => d0.clone(),
            })
            .collect();
        let shape2: Vec<Tree> = c2
            .positions()
            .positions
            .iter()
            .map(|p| match p.to_string().as_str() {
                "p1/0" => d1.clone(),
                "p2/0" => c2.clone(),
                _ => d0.clone(),
            })
            .collect();
        let sphere = Sphere::new(pv("p/0"), pv("p/2"));
        let (mu, s1) = substitution_morphism(&c2, &shape1).unwrap();
        let (mu2, s2) = substitution_morphism(&c2, &shape2).unwrap();
        assert_eq!(mu, Tree::chain(3));
        assert_eq!(mu2, mu);
        let left = FillerSide { tree: c2.clone(), shape: shape1, sphere: sphere.clone(), sigma: s1 };
        let right = FillerSide { tree: c2.clone(), shape: shape2, sphere, sigma: s2 };
        let a = filler(&left, &right).unwrap();
        free_ok(&a, &mu);
        let f = |i: u32| pv(&format!("p{i}/0"));
        let b = a.boundary().unwrap();
        let f12 = binary_comp(0, &f(1), &f(2)).unwrap();
        let f23 = binary_comp(0, &f(2), &f(3)).unwrap();
        assert_eq!(b.src, binary_comp(0, &f12, &f(3)).unwrap());
        assert_eq!(b.tgt, binary_comp(0, &f(1), &f23).unwrap());
        let mut bad = right.clone();
        bad.sphere = Sphere::new(pv("p/0"), pv("p/1"));
        assert!(matches!(filler(&left, &bad), Err(Error::BoundaryMismatch(_))));
        bad = right.clone();
        bad.shape[3] = Tree::chain(2);
        assert!(matches!(filler(&left, &bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn unitor_as_filler() {
        let tree = t("[[[],[]],[]]");
        let d = tree.dim();
        let bd = pasting::boundary(d - 1, &tree);
        let a = comp(&bd, d - 1).unwrap();
        let sa = Subst::from_pos_map(&pasting::cosource(d - 1, &tree)).apply(&a).unwrap();
        let ta = Subst::from_pos_map(&pasting::cotarget(d - 1, &tree)).apply(&a).unwrap();
        let shape1 = tree.positions().positions.iter().map(|p| Tree::disk(p.dim().min(d - 1))).collect();
        let left = FillerSide {
            tree: tree.clone(),
            shape: shape1,
            sphere: Sphere::new(sa, ta),
            sigma: underline_id(&tree).unwrap(),
        };
        let dd = Tree::disk(d - 1);
        let top = pos_var(&disk_top(d - 1));
        let shape2 = dd.positions().positions.iter().map(|p| pasting::boundary(p.dim(), &bd)).collect();
        let right = FillerSide {
            tree: dd.clone(),
            shape: shape2,
            sphere: Sphere::new(top.clone(), top),
            sigma: disk_morphism(&a),
        };
        let f = filler(&left, &right).unwrap();
        free_ok(&f, &bd);
        assert_eq!(f, unitor(&tree, &a).unwrap());
    }

    #[test]
    fn degenerate_filler_is_an_endo_coherence() {
        let tree = t("[[],[[]]]");
        let side = FillerSide::trivial(&tree, comp_sphere(&tree, tree.dim() - 1).unwrap());
        let f = filler(&side, &side).unwrap();
        free_ok(&f, &tree);
        let b = f.boundary().unwrap();
        assert_eq!(b.src, b.tgt);
    }

    #[test]
    fn functorialised_coherence_over_c2() {
        let c2 = Tree::chain(2);
        let a = pv("p/0");
        let marked: BTreeSet<Pos> = ["p2/0".parse().unwrap()].into();
        let f = functorialise_coh(&c2, &marked, &a, &a).unwrap();
        let grown = t("[[],[[]]]");
        free_ok(&f, &grown);
        let b = f.boundary().unwrap();
        assert_eq!(b.src, binary_comp(0, &pv("p1/0"), &pv("p2/0")).unwrap());
        assert_eq!(b.tgt, binary_comp(0, &pv("p1/0"), &pv("p2/1")).unwrap());
        assert_eq!(functorialise_coh(&c2, &BTreeSet::new(), &a, &a).unwrap(), comp(&c2, 1).unwrap());
    }

    #[test]
    fn reduced_morphism_examples() {
        for k in 1..5 {
            let ck = Tree::chain(k);
            let r = reduced_morphism(&ck).unwrap();
            assert_eq!(r.get(&"p1/0".parse().unwrap()).unwrap(), &comp(&ck, 1).unwrap());
            assert!(r.covers(&Computad::free(&ck)));
        }
        let d2 = Tree::disk(2);
        assert_eq!(reduced_morphism(&d2).unwrap(), PdMorphism::identity(&d2));
        let b = t("[[[],[]],[]]");
        let r = reduced_morphism(&b).unwrap();
        assert!(r.check_globular().is_ok());
        assert!(r.covers(&Computad::free(&b)));
    }

    #[test]
    fn chain_reduction_of_cells() {
        let b = Tree::chain(2).suspend();
        let c = comp(&b, 2).unwrap();
        let r = reduce_cell(&c).unwrap();
        free_ok(&r, &b);
        let Kind::Coh { tree, .. } = r.kind() else { panic!() };
        assert_eq!(*tree, Tree::disk(2));
        let a = assoc_bias(&c).unwrap();
        free_ok(&a, &b);
        assert_eq!(a.boundary().unwrap(), Sphere::new(c.clone(), r));
        let d = comp(&Tree::disk(2), 3).unwrap();
        assert!(split_composite(&d).is_err());
    }

    #[test]
    fn suspension_examples() {
        for k in 1..4 {
            let ck = Tree::chain(k);
            assert_eq!(suspend(&comp(&ck, 1).unwrap()), comp(&ck.suspend(), 2).unwrap());
        }
        let x = pv("p/0");
        assert_eq!(suspend(&identity(&x)), identity(&suspend(&x)));
        let u = unitor(&Tree::chain(2), &x).unwrap();
        free_ok(&suspend(&u), &Tree::disk(1));
        let ctx = Computad::build([("x", None)]).unwrap();
        let sc = suspend_computad(&ctx);
        assert_eq!(sc.len(), 3);
        assert!(check(&suspend(&identity(&Cell::var("x", None))), &sc).is_ok());
    }

    #[test]
    fn opposite_examples() {
        let w: BTreeSet<usize> = [1].into();
        let x = Cell::var("x", None);
        let y = Cell::var("y", None);
        let z = Cell::var("z", None);
        let f = Cell::var("f", Some(Sphere::new(x.clone(), y.clone())));
        let g = Cell::var("g", Some(Sphere::new(y.clone(), z.clone())));
        let h = Cell::var("h", Some(Sphere::new(y.clone(), z.clone())));
        let a = Cell::var("a", Some(Sphere::new(g.clone(), h.clone())));
        let ctx = Computad::build([
            ("x", None),
            ("y", None),
            ("z", None),
            ("f", Some((x.clone(), y.clone()))),
            ("g", Some((y.clone(), z.clone()))),
            ("h", Some((y, z))),
            ("a", Some((g, h))),
        ])
        .unwrap();
        let left = binary_comp(0, &f, &a).unwrap();
        let op_ctx = opposite_computad(&w, &ctx);
        let op_left = opposite(&w, &left);
        assert!(check(&op_left, &op_ctx).is_ok());
        let right = binary_comp(0, &opposite(&w, &a), &opposite(&w, &f)).unwrap();
        assert_eq!(op_left, right);
        assert_eq!(opposite(&w, &op_left), left);
        assert_eq!(opposite(&BTreeSet::new(), &left), left);
    }
}
