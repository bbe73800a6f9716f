//! Random computads and cells shared by the property and acceptance suites.
#![allow(dead_code)]

use ocat::computad::{Cell, Computad, PdMorphism, Sphere};
use ocat::invert;
use ocat::pasting::Tree;
use ocat::stdops::{self, binary_comp, disk_top, identity};
use rand::seq::SliceRandom;
use rand::Rng;

pub const MAX_DIM: usize = 3;

/// A k-boundary of `c`, or `c` itself at its own dimension.
pub fn side(c: &Cell, k: usize, target: bool) -> Cell {
    if target {
        c.tgt_at(k)
    } else {
        c.src_at(k)
    }
}

/// The right unitor coherence `c *_{n-1} id(tgt c) → c`.
pub fn right_unitor(c: &Cell) -> Cell {
    let n = c.dim();
    let d = Tree::disk(n);
    let top = ocat::computad::pos_var(&disk_top(n));
    let t = top.tgt().unwrap();
    let src = binary_comp(n - 1, &top, &identity(&t)).unwrap();
    let u = Cell::coh_pd(&d, Sphere::new(src, top), &PdMorphism::identity(&d)).unwrap();
    stdops::disk_morphism(c).apply(&u).unwrap()
}

fn parallel_candidates(pool: &[Cell], s: &Cell) -> Vec<Cell> {
    pool.iter().filter(|t| t.dim() == s.dim() && t.boundary() == s.boundary()).cloned().collect()
}

/// A finite computad with 1 to 3 objects and at most `per_dim` generators in
/// each positive dimension up to `max_dim`.
pub fn random_computad(rng: &mut impl Rng, max_dim: usize, per_dim: usize) -> Computad {
    let mut ctx = Computad::empty();
    let mut by_dim: Vec<Vec<Cell>> = vec![Vec::new(); max_dim + 1];
    for j in 0..rng.gen_range(1..=3) {
        let (next, c) = ctx.extend(&format!("x{j}"), None).unwrap();
        ctx = next;
        by_dim[0].push(c);
    }
    for d in 1..=max_dim {
        let mut lower = by_dim[d - 1].clone();
        if d >= 2 {
            lower.extend(by_dim[d - 2].iter().map(identity));
            for _ in 0..4 {
                let a = by_dim[d - 1].choose(rng).cloned();
                if let Some(a) = a {
                    let next: Vec<Cell> = by_dim[d - 1]
                        .iter()
                        .filter(|b| side(b, d - 2, false) == side(&a, d - 2, true))
                        .cloned()
                        .collect();
                    if let Some(b) = next.choose(rng) {
                        lower.push(binary_comp(d - 2, &a, b).unwrap());
                    }
                }
            }
        } else {
            lower.clear();
            lower.extend(by_dim[0].iter().cloned());
        }
        for j in 0..rng.gen_range(0..=per_dim) {
            let Some(s) = lower.choose(rng).cloned() else { break };
            let cands = parallel_candidates(&lower, &s);
            let t = cands.choose(rng).unwrap().clone();
            let (next, c) = ctx.extend(&format!("c{d}_{j}"), Some(Sphere::new(s, t))).unwrap();
            ctx = next;
            by_dim[d].push(c);
        }
    }
    ctx
}

/// Cells of `ctx` built from generators by identities, composites, unitors,
/// rebiasing and invertibility synthesis, nested at most `max_depth` deep and
/// of dimension at most `MAX_DIM`.
pub fn random_cells(rng: &mut impl Rng, ctx: &Computad, max_depth: usize, rounds: usize) -> Vec<Cell> {
    let mut pool: Vec<(Cell, usize)> = ctx.generators().iter().map(|(_, c)| (c.clone(), 0)).collect();
    for _ in 0..rounds {
        let (a, da) = pool.choose(rng).unwrap().clone();
        if da >= max_depth {
            continue;
        }
        let made: Option<(Cell, usize)> = match rng.gen_range(0..7) {
            0 if a.dim() < MAX_DIM => Some((identity(&a), da)),
            1 | 2 if a.dim() > 0 => {
                let k = rng.gen_range(0..a.dim());
                let cands: Vec<(Cell, usize)> = pool
                    .iter()
                    .filter(|(b, db)| {
                        *db < max_depth
                            && k <= b.dim()
                            && side(b, k, false) == side(&a, k, true)
                    })
                    .cloned()
                    .collect();
                cands.choose(rng).map(|(b, db)| (binary_comp(k, &a, b).unwrap(), da.max(*db)))
            }
            3 if a.dim() >= 1 && a.dim() < MAX_DIM => Some((right_unitor(&a), da)),
            4 => stdops::assoc_bias(&a).ok().filter(|c| c.dim() <= MAX_DIM).map(|c| (c, da)),
            5 if invert::is_invertible(&a) => invert::inverse(&a).ok().map(|c| (c, da)),
            6 if invert::is_invertible(&a) && a.dim() < MAX_DIM => invert::unit(&a).ok().map(|c| (c, da)),
            _ => None,
        };
        if let Some((c, d)) = made {
            pool.push((c, d + 1));
        }
    }
    let mut seen = std::collections::HashSet::new();
    pool.into_iter().map(|(c, _)| c).filter(|c| c.dim() <= MAX_DIM && seen.insert(c.clone())).collect()
}

pub fn run_big<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    ocat::cli::with_big_stack(f)
}
