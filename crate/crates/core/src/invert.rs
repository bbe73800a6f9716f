//! Invertibility: pointwise inverses, telescopes, and synthesis of inverses
//! together with their cancellation witnesses.

use std::collections::{BTreeSet, HashMap};
use std::sync::{LazyLock, Mutex};

use crate::computad::{pos_var, top_support_names, Cell, Computad, Error, Kind, PdMorphism, Result, Sphere, Subst};
use crate::pasting::{self, Pos, PosMap, Tree};
use crate::stdops::{self, binary_comp, chain_comp, comp, glue, identity, suspend_n, unitor};

/// A cell with its inverse and the two cancellation witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseBundle {
    pub original: Cell,
    pub inverse: Cell,
    pub unit: Cell,
    pub counit: Cell,
}

/// Decides invertibility by structural recursion: generators are not
/// invertible, coherences over lower-dimensional trees are, and a composite is
/// exactly when each of its top-dimensional arguments is.
pub fn is_invertible(c: &Cell) -> bool {
    fn go(c: &Cell, memo: &mut HashMap<u64, bool>) -> bool {
        if let Some(&b) = memo.get(&c.id()) {
            return b;
        }
        let b = match c.kind() {
            Kind::Var { .. } => false,
            Kind::Coh { tree, args, .. } => {
                let d = c.dim();
                tree.dim() < d || {
                    let table = tree.positions();
                    table.positions.iter().zip(args.iter()).filter(|(p, _)| p.dim() == d).all(|(_, a)| go(a, memo))
                }
            }
        };
        memo.insert(c.id(), b);
        b
    }
    go(c, &mut HashMap::new())
}

/// The support criterion: no generator of the cell's own dimension occurs in it.
pub fn has_empty_top_support(c: &Cell) -> bool {
    c.supp(c.dim()).is_empty()
}

fn require_invertible(c: &Cell) -> Result<()> {
    if is_invertible(c) {
        Ok(())
    } else {
        Err(Error::NonInvertible(top_support_names(c)))
    }
}

/// The morphism `σ̄` with `σ̄(q) = inv σ(op q)` on top positions and
/// `σ(op q)` below, where `op` reverses dimension `d`.
pub fn pointwise_inverse(sigma: &PdMorphism, d: usize, inverses: &HashMap<Pos, Cell>) -> Result<PdMorphism> {
    let tree = &sigma.tree;
    if tree.dim() > d {
        return Err(Error::DimMismatch(format!("tree {tree} has dimension above {d}")));
    }
    let w: BTreeSet<usize> = [d].into();
    let (op_tree, op_map) = pasting::opposite(&w, tree);
    debug_assert!(op_tree == *tree);
    PdMorphism::try_from_fn(tree, |q| {
        let p = op_map.apply(q).expect("opposite is a bijection");
        let orig = sigma.get(p).expect("valid position");
        if q.dim() < d {
            return Ok(orig.clone());
        }
        let inv = inverses.get(p).ok_or_else(|| Error::Precondition(format!("no inverse given for {p}")))?;
        let (ob, ib) = (orig.boundary().unwrap(), inv.boundary().unwrap());
        if ob.src != ib.tgt || ob.tgt != ib.src {
            return Err(Error::BoundaryMismatch(format!("inverse at {p} does not swap the boundary")));
        }
        Ok(inv.clone())
    })
}

/// The morphism out of `B ∘_k B'` restricting to `f` and `g`.
pub fn glue_morphisms(k: usize, f: &PdMorphism, g: &PdMorphism) -> Result<(Tree, PdMorphism)> {
    let gr = pasting::graft(k, &f.tree, &g.tree)?;
    let m = glue(&gr.tree, &[(gr.inc_minus, f.clone()), (gr.inc_plus, g.clone())])?;
    Ok((gr.tree, m))
}

/// The morphism out of `F_X B` determined by `τ_-`, `τ_+` and a cell from
/// `τ_-(x)` to `τ_+(x)` for each marked `x`.
pub fn extend_functorial(
    tree: &Tree,
    marked: &BTreeSet<Pos>,
    minus: &PdMorphism,
    plus: &PdMorphism,
    fills: &HashMap<Pos, Cell>,
) -> Result<PdMorphism> {
    let f = pasting::functorialise_tree(marked, tree)?;
    if marked.is_empty() {
        if minus != plus {
            return Err(Error::BoundaryMismatch("the two morphisms differ with nothing marked".into()));
        }
        return Ok(minus.clone());
    }
    let mut pieces = vec![(f.s_inc.clone(), minus.clone()), (f.t_inc.clone(), plus.clone())];
    for (x, new) in &f.new_pos {
        let fill = fills.get(x).ok_or_else(|| Error::Precondition(format!("no cell given for {x}")))?;
        let b = fill.boundary().ok_or_else(|| Error::DimMismatch(format!("cell for {x} has dimension 0")))?;
        if Some(&b.src) != minus.get(x) || Some(&b.tgt) != plus.get(x) {
            return Err(Error::BoundaryMismatch(format!("cell for {x} does not connect the two images")));
        }
        let d = Tree::disk(new.dim());
        let inc = PosMap::from_fn(&d, &f.tree, |q| {
            let mut p = new.clone();
            while p.dim() > q.dim() {
                p = if q.slot == 0 { p.src().unwrap() } else { p.tgt().unwrap() };
            }
            p
        });
        pieces.push((inc, stdops::disk_morphism(fill)));
    }
    glue(&f.tree, &pieces)
}

pub fn tel_x(i: usize) -> String {
    format!("x{i}")
}

pub fn tel_f(i: usize) -> String {
    format!("f{i}")
}

pub fn tel_g(i: usize) -> String {
    format!("g{i}")
}

pub fn tel_alpha(i: usize) -> String {
    format!("alpha{i}")
}

static TEL_COMPUTADS: LazyLock<Mutex<HashMap<usize, Computad>>> = LazyLock::new(|| Mutex::new(HashMap::new()));
static TEL_CELLS: LazyLock<Mutex<HashMap<usize, Cell>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// The computad `Tel_k` of `k` one-sided invertible 1-cells.
pub fn telescope_computad(k: usize) -> Computad {
    if let Some(c) = TEL_COMPUTADS.lock().unwrap().get(&k) {
        return c.clone();
    }
    let mut ctx = Computad::empty();
    let mut xs = Vec::new();
    for i in 0..=k {
        let (next, x) = ctx.extend(&tel_x(i), None).expect("fresh name");
        ctx = next;
        xs.push(x);
    }
    for i in 1..=k {
        let (next, f) = ctx.extend(&tel_f(i), Some(Sphere::new(xs[i - 1].clone(), xs[i].clone()))).unwrap();
        let (next, g) = next.extend(&tel_g(i), Some(Sphere::new(xs[i].clone(), xs[i - 1].clone()))).unwrap();
        let fg = binary_comp(0, &f, &g).expect("composable");
        let (next, _) = next.extend(&tel_alpha(i), Some(Sphere::new(fg, identity(&xs[i - 1])))).unwrap();
        ctx = next;
    }
    TEL_COMPUTADS.lock().unwrap().insert(k, ctx.clone());
    ctx
}

fn tel_var(ctx: &Computad, name: &str) -> Cell {
    ctx.get(name).unwrap_or_else(|| panic!("telescope generator {name}")).clone()
}

/// The morphism `Free(C_{2k}) → Tel_k` tracing the loop `f_1 ... f_k g_k ... g_1`.
pub fn loopmap(k: usize) -> PdMorphism {
    let ctx = telescope_computad(k);
    PdMorphism::from_leaves(&Tree::chain(2 * k), |p| {
        let i = p.path[0] as usize;
        if i <= k {
            tel_var(&ctx, &tel_f(i))
        } else {
            tel_var(&ctx, &tel_g(2 * k - i + 1))
        }
    })
    .expect("loop is globular")
}

/// The loop composite `f_1 *_0 ... *_0 g_1` in `Tel_k`.
pub fn loop_composite(k: usize) -> Cell {
    loopmap(k).apply(&comp(&Tree::chain(2 * k), 1).unwrap()).unwrap()
}

fn chain_edge(i: usize) -> Pos {
    Pos::new(vec![i as u32], 0)
}

/// The telescope `tel_k : loop_k → id(x_0)` in `Tel_k`, for `k ≥ 1`.
pub fn telescope_cell(k: usize) -> Result<Cell> {
    if k == 0 {
        return Err(Error::Precondition("telescopes start at k = 1".into()));
    }
    if let Some(c) = TEL_CELLS.lock().unwrap().get(&k) {
        return Ok(c.clone());
    }
    let c = if k == 1 {
        tel_var(&telescope_computad(1), &tel_alpha(1))
    } else {
        let j = k - 1;
        let ctx = telescope_computad(k);
        let big = Tree::chain(2 * j + 2);
        let mid = Tree::chain(2 * j + 1);
        let small = Tree::chain(2 * j);

        let assoc = PdMorphism::from_leaves(&mid, |p| {
            let i = p.path[0] as usize;
            match i.cmp(&(j + 1)) {
                std::cmp::Ordering::Less => pos_var(&chain_edge(i)),
                std::cmp::Ordering::Equal => {
                    binary_comp(0, &pos_var(&chain_edge(j + 1)), &pos_var(&chain_edge(j + 2))).unwrap()
                }
                std::cmp::Ordering::Greater => pos_var(&chain_edge(i + 1)),
            }
        })?;
        let t1_tgt = assoc.apply(&comp(&mid, 1)?)?;
        let t1 = Cell::coh_pd(&big, Sphere::new(comp(&big, 1)?, t1_tgt), &loopmap(k))?;

        let marked: BTreeSet<Pos> = [chain_edge(j + 1)].into();
        let grown = pasting::functorialise_tree(&marked, &mid)?.tree;
        let fill = PdMorphism::from_leaves(&grown, |p| {
            let i = p.path[0] as usize;
            if i <= j {
                tel_var(&ctx, &tel_f(i))
            } else if i == j + 1 {
                tel_var(&ctx, &tel_alpha(j + 1))
            } else {
                tel_var(&ctx, &tel_g(2 * j + 2 - i))
            }
        })?;
        let t2 = fill.apply(&comp(&grown, 2)?)?;

        let unit_in = PdMorphism::from_leaves(&mid, |p| {
            let i = p.path[0] as usize;
            match i.cmp(&(j + 1)) {
                std::cmp::Ordering::Less => pos_var(&chain_edge(i)),
                std::cmp::Ordering::Equal => identity(&pos_var(&Pos::vertex(j as u32))),
                std::cmp::Ordering::Greater => pos_var(&chain_edge(i - 1)),
            }
        })?;
        let t3_src = unit_in.apply(&comp(&mid, 1)?)?;
        let t3 = Cell::coh_pd(&small, Sphere::new(t3_src, comp(&small, 1)?), &loopmap(j))?;

        chain_comp(&[t1, t2, t3, telescope_cell(j)?], &[1, 1, 1])?
    };
    TEL_CELLS.lock().unwrap().insert(k, c.clone());
    Ok(c)
}

static INVERSES: LazyLock<Mutex<HashMap<u64, Cell>>> = LazyLock::new(|| Mutex::new(HashMap::new()));
static UNITS: LazyLock<Mutex<HashMap<u64, Cell>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

fn memo_get(table: &Mutex<HashMap<u64, Cell>>, c: &Cell) -> Option<Cell> {
    table.lock().unwrap().get(&c.id()).cloned()
}

fn memo_put(table: &Mutex<HashMap<u64, Cell>>, c: &Cell, v: &Cell) {
    table.lock().unwrap().insert(c.id(), v.clone());
}

/// The data of a composite `c = coh(B, s(a) → t(b), σ)` with `dim B = dim c`.
struct Split {
    tree: Tree,
    a: Cell,
    b: Cell,
    sigma: PdMorphism,
    sigma_bar: PdMorphism,
}

fn split(c: &Cell) -> Result<Split> {
    let k = stdops::split_composite(c)?;
    let d = k.tree.dim();
    let mut inverses = HashMap::new();
    for p in k.tree.positions().of_dim(d) {
        inverses.insert(p.clone(), inverse(k.sigma.get(p).unwrap())?);
    }
    let sigma_bar = pointwise_inverse(&k.sigma, d, &inverses)?;
    Ok(Split { tree: k.tree, a: k.a, b: k.b, sigma: k.sigma, sigma_bar })
}

fn lower_coh(c: &Cell) -> Option<(&Tree, &Sphere, &[Cell])> {
    match c.kind() {
        Kind::Coh { tree, ty, args } if tree.dim() < c.dim() => Some((tree, ty, args)),
        _ => None,
    }
}

fn side(k: usize, tree: &Tree, cell: &Cell, target: bool) -> Result<Cell> {
    let m = if target { pasting::cotarget(k, tree) } else { pasting::cosource(k, tree) };
    Subst::from_pos_map(&m).apply(cell)
}

/// The chosen inverse of an invertible cell.
pub fn inverse(c: &Cell) -> Result<Cell> {
    require_invertible(c)?;
    if let Some(r) = memo_get(&INVERSES, c) {
        return Ok(r);
    }
    let r = if let Some((tree, ty, args)) = lower_coh(c) {
        Cell::coh(tree, ty.swap(), args.to_vec())?
    } else {
        let s = split(c)?;
        let d = s.tree.dim();
        let sphere = Sphere::new(side(d - 1, &s.tree, &s.b, false)?, side(d - 1, &s.tree, &s.a, true)?);
        Cell::coh_pd(&s.tree, sphere, &s.sigma_bar)?
    };
    memo_put(&INVERSES, c, &r);
    Ok(r)
}

/// The witness `unit_c : c *_{d-1} inv c → id(src c)`.
pub fn unit(c: &Cell) -> Result<Cell> {
    require_invertible(c)?;
    if let Some(r) = memo_get(&UNITS, c) {
        return Ok(r);
    }
    let r = if let Some((tree, ty, args)) = lower_coh(c) {
        let d = c.dim();
        let id = PdMorphism::identity(tree);
        let x = Cell::coh_pd(tree, ty.clone(), &id)?;
        let xi = Cell::coh_pd(tree, ty.swap(), &id)?;
        let sphere = Sphere::new(binary_comp(d - 1, &x, &xi)?, identity(&ty.src));
        Cell::coh(tree, sphere, args.to_vec())?
    } else {
        composite_unit(c)?
    };
    memo_put(&UNITS, c, &r);
    Ok(r)
}

/// The witness `counit_c : inv c *_{d-1} c → id(tgt c)`.
pub fn counit(c: &Cell) -> Result<Cell> {
    unit(&inverse(c)?)
}

pub fn bundle(c: &Cell) -> Result<InverseBundle> {
    Ok(InverseBundle { original: c.clone(), inverse: inverse(c)?, unit: unit(c)?, counit: counit(c)? })
}

fn composite_unit(c: &Cell) -> Result<Cell> {
    let s = split(c)?;
    let tree = &s.tree;
    let d = tree.dim();
    let id_b = PdMorphism::identity(tree);
    let c0 = Cell::coh_pd(
        tree,
        Sphere::new(side(d - 1, tree, &s.a, false)?, side(d - 1, tree, &s.b, true)?),
        &id_b,
    )?;
    let c0p = Cell::coh_pd(
        tree,
        Sphere::new(side(d - 1, tree, &s.b, false)?, side(d - 1, tree, &s.a, true)?),
        &id_b,
    )?;
    let gr = pasting::graft(d - 1, tree, tree)?;
    let bb = gr.tree.clone();
    let (_, both) = glue_morphisms(d - 1, &s.sigma, &s.sigma_bar)?;
    let both_subst = both.to_subst();
    let b2 = pasting::chain_reduce(&bb);
    let reduced = stdops::reduced_morphism(&bb)?;
    let a2 = Sphere::new(side(d - 1, &b2, &s.a, false)?, side(d - 1, &b2, &s.a, true)?);

    // associator
    let left = binary_comp(
        d - 1,
        &Subst::from_pos_map(&gr.inc_minus).apply(&c0)?,
        &Subst::from_pos_map(&gr.inc_plus).apply(&c0p)?,
    )?;
    let right = Cell::coh_pd(&b2, a2.clone(), &reduced)?;
    let m1_0 = Cell::coh(&bb, Sphere::new(left, right), PdMorphism::identity(&bb).cells)?;
    let m1 = both_subst.apply(&m1_0)?;

    // telescopes
    let s_bb = pasting::cosource(d - 1, &bb);
    let retract = stdops::underline_id(&b2)?;
    let along_source = both.precompose(&s_bb).to_subst();
    let tau_minus = reduced.then(&both_subst)?;
    let tau_plus = retract.then(&along_source)?;
    let marked: BTreeSet<Pos> = b2.positions().of_dim(d).cloned().collect();
    let fills: HashMap<Pos, Cell> = fills_of(&s)?.into_iter().collect();
    let tau = extend_functorial(&b2, &marked, &tau_minus, &tau_plus, &fills)?;
    let fun = stdops::functorialise_coh(&b2, &marked, &s.a, &s.a)?;
    let m2 = tau.apply(&fun)?;

    // unitor
    let m3 = along_source.apply(&unitor(&b2, &s.a)?)?;

    chain_comp(&[m1, m2, m3], &[d, d])
}

fn fills_of(s: &Split) -> Result<Vec<(Pos, Cell)>> {
    let red = pasting::chain_reduce(&s.tree);
    let d = s.tree.dim();
    red.positions().of_dim(d).map(|p| Ok((p.clone(), telescope_fill(&s.tree, p, &s.sigma)?))).collect()
}

/// The telescope fills `τ_p` used by the unit of a top-dimensional composite,
/// one per maximal position of its reduced tree.
pub fn unit_fills(c: &Cell) -> Result<Vec<(Pos, Cell)>> {
    require_invertible(c)?;
    if lower_coh(c).is_some() {
        return Err(Error::Precondition(format!("{c} is not a top-dimensional composite")));
    }
    fills_of(&split(c)?)
}

/// `τ_p`: the suspended telescope cancelling the chain merged into `p`.
fn telescope_fill(tree: &Tree, p: &Pos, sigma: &PdMorphism) -> Result<Cell> {
    let d = tree.dim();
    let (k, chain) = pasting::chain_data(tree, p)?;
    let mut cancel = Subst::new();
    for q in &chain.source.positions().positions {
        let image = sigma.get(chain.apply(q).unwrap()).unwrap().clone();
        if q.dim() + 1 < d {
            cancel.insert(&q.to_string(), image);
        } else if q.dim() + 1 == d {
            cancel.insert(&tel_x(q.slot as usize), image);
        } else {
            let i = q.path[d - 1] as usize;
            cancel.insert(&tel_f(i), image.clone());
            cancel.insert(&tel_g(i), inverse(&image)?);
            cancel.insert(&tel_alpha(i), unit(&image)?);
        }
    }
    cancel.apply(&suspend_n(&telescope_cell(k)?, d - 1))
}
