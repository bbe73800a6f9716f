//! Property tests for the invariants of every module.

mod common;

use std::collections::BTreeSet;

use ocat::computad::{check, is_full, Cell, Computad, Kind, PdMorphism, Sphere};
use ocat::invert;
use ocat::pasting::{self, Pos, PosMap, Tree};
use ocat::stdops::{self, FillerSide};
use ocat::surface::{self, Options};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tree_upto(n: usize) -> impl Strategy<Value = Tree> {
    proptest::sample::select(pasting::trees_up_to(n))
}

/// A tree of positive dimension.
fn pos_tree_upto(n: usize) -> impl Strategy<Value = Tree> {
    proptest::sample::select(pasting::trees_up_to(n).into_iter().filter(|t| t.dim() > 0).collect::<Vec<_>>())
}

/// A tree that can be grafted onto `left` along its `k`-boundary, picked by `i`.
fn graftable(left: &Tree, k: usize, max: usize, i: usize) -> Option<Tree> {
    let bd = pasting::boundary(k, left);
    let c: Vec<Tree> = pasting::trees_up_to(max).into_iter().filter(|t| pasting::boundary(k, t) == bd).collect();
    (!c.is_empty()).then(|| c[i % c.len()].clone())
}

/// A random world: a computad and a batch of cells in it.
fn world(seed: u64) -> (Computad, Vec<Cell>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = common::random_computad(&mut rng, 3, 4);
    let cells = common::random_cells(&mut rng, &ctx, 3, 30);
    (ctx, cells)
}

fn big<F: FnOnce() -> Result<(), String> + Send + 'static>(f: F) -> Result<(), TestCaseError> {
    common::run_big(f).map_err(TestCaseError::fail)
}

/// Library cells over `tree` living in `Free(tree)`.
fn cells_over(tree: &Tree) -> Vec<Cell> {
    let d = tree.dim();
    let mut out = vec![stdops::comp(tree, d).unwrap(), stdops::comp(tree, d + 1).unwrap()];
    if d > 0 {
        let sphere = stdops::comp_sphere(tree, d - 1).unwrap();
        let side = FillerSide::trivial(tree, sphere);
        out.push(stdops::filler(&side, &side).unwrap());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn coglobular_inclusions(b in tree_upto(7)) {
        for k in 0..b.dim() {
            let inner = pasting::boundary(k + 1, &b);
            for first in [false, true] {
                let i = if first { pasting::cotarget(k, &inner) } else { pasting::cosource(k, &inner) };
                prop_assert_eq!(i.then(&pasting::cosource(k + 1, &b)), i.then(&pasting::cotarget(k + 1, &b)));
            }
        }
    }

    #[test]
    fn inclusions_are_globular_and_injective(b in tree_upto(7), k in 0usize..5) {
        for m in [pasting::cosource(k, &b), pasting::cotarget(k, &b)] {
            prop_assert!(m.is_globular());
            prop_assert!(m.is_injective());
        }
    }

    #[test]
    fn boundary_of_boundary(b in tree_upto(7), j in 0usize..6, k in 0usize..6) {
        prop_assert_eq!(pasting::boundary(j, &pasting::boundary(k, &b)), pasting::boundary(j.min(k), &b));
    }

    #[test]
    fn positions_and_dimension(b in tree_upto(7)) {
        let table = b.positions();
        prop_assert_eq!(table.len(), 2 * b.nodes() - 1);
        for p in &table.positions {
            prop_assert_eq!(p.dim(), p.path.len());
            prop_assert!(p.is_valid_in(&b));
            let hit = table.positions.iter().filter(|q| q.dim() > 0).any(|q| {
                pasting::src_pos(&b, q).ok().as_ref() == Some(p) || pasting::tgt_pos(&b, q).ok().as_ref() == Some(p)
            });
            prop_assert_eq!(pasting::is_locally_maximal(&b, p), !hit);
        }
        let want = b.branches().iter().map(|c| c.dim() + 1).max().unwrap_or(0);
        prop_assert_eq!(b.dim(), want);
    }

    #[test]
    fn graft_is_associative(a in tree_upto(4), k in 0usize..3, i in 0usize..64, j in 0usize..64) {
        let Some(b) = graftable(&a, k, 4, i) else { return Ok(()) };
        let Some(c) = graftable(&b, k, 4, j) else { return Ok(()) };
        let ab = pasting::graft(k, &a, &b).unwrap().tree;
        let bc = pasting::graft(k, &b, &c).unwrap().tree;
        let left = pasting::graft(k, &ab, &c).unwrap();
        let right = pasting::graft(k, &a, &bc).unwrap();
        prop_assert_eq!(&left.tree, &right.tree);
        let n = |t: &Tree| t.positions().len();
        let shared = n(&pasting::boundary(k, &a));
        prop_assert_eq!(n(&ab) + shared, n(&a) + n(&b));
        prop_assert_eq!(n(&left.tree) + 2 * shared, n(&a) + n(&b) + n(&c));
    }

    #[test]
    fn graft_inclusions_form_a_pushout_square(a in tree_upto(5), k in 0usize..4, i in 0usize..64) {
        let Some(b) = graftable(&a, k, 5, i) else { return Ok(()) };
        let g = pasting::graft(k, &a, &b).unwrap();
        let via_left = pasting::cotarget(k, &a).then(&g.inc_minus);
        let via_right = pasting::cosource(k, &b).then(&g.inc_plus);
        prop_assert_eq!(via_left, via_right);
        let mut hit: BTreeSet<Pos> = g.inc_minus.images().iter().cloned().collect();
        hit.extend(g.inc_plus.images().iter().cloned());
        prop_assert_eq!(hit.len(), g.tree.positions().len());
    }

    #[test]
    fn spine_recomposes(b in tree_upto(7)) {
        let sp = pasting::spine(&b);
        prop_assert_eq!(pasting::recompose(&sp).unwrap(), b.clone());
        prop_assert_eq!(sp.positions.clone(), b.positions().locally_maximal());
        for (w, k) in sp.positions.windows(2).zip(&sp.codims) {
            let common = w[0].path.iter().zip(&w[1].path).take_while(|(x, y)| x == y).count();
            prop_assert_eq!(*k, common);
        }
    }

    #[test]
    fn opposite_is_an_involution(b in tree_upto(7), mask in 0u32..64) {
        let w: BTreeSet<usize> = (0..6).filter(|i| mask & (1 << i) != 0).collect();
        let (op, m) = pasting::opposite(&w, &b);
        let (back, m2) = pasting::opposite(&w, &op);
        prop_assert_eq!(&back, &b);
        prop_assert_eq!(m2.then(&m), PosMap::identity(&b));
        prop_assert_eq!(m.then(&m2), PosMap::identity(&op));
        prop_assert_eq!(op.nodes(), b.nodes());
    }

    #[test]
    fn suspension_shifts_grafting(a in tree_upto(5), k in 0usize..4, i in 0usize..64) {
        prop_assert_eq!(a.suspend().dim(), a.dim() + 1);
        let Some(b) = graftable(&a, k, 5, i) else { return Ok(()) };
        let g = pasting::graft(k, &a, &b).unwrap().tree;
        prop_assert_eq!(g.suspend(), pasting::graft(k + 1, &a.suspend(), &b.suspend()).unwrap().tree);
    }

    #[test]
    fn chain_reduction(b in tree_upto(7)) {
        let red = pasting::chain_reduce(&b);
        prop_assert_eq!(pasting::chain_reduce(&red), red.clone());
        prop_assert_eq!(red.dim(), b.dim());
        if b.dim() > 0 {
            prop_assert_eq!(pasting::boundary(b.dim() - 1, &red), pasting::boundary(b.dim() - 1, &b));
        }
        let f = pasting::functorialise_tree(&BTreeSet::new(), &b).unwrap();
        prop_assert_eq!(&f.tree, &b);
        prop_assert_eq!(f.s_inc, PosMap::identity(&b));
        prop_assert_eq!(f.t_inc, PosMap::identity(&b));
    }

    #[test]
    fn composite_spheres_are_full(b in tree_upto(5), extra in 0usize..3) {
        let n = b.dim() + extra;
        let a = stdops::comp_sphere(&b, n).unwrap();
        prop_assert!(is_full(&b, &a, n));
        let c = stdops::comp(&b, n).unwrap();
        check(&c, &Computad::free(&b)).map_err(|d| TestCaseError::fail(d.to_string()))?;
    }

    #[test]
    fn underline_id_retracts_both_inclusions(b in pos_tree_upto(6)) {
        let d = b.dim();
        let u = stdops::underline_id(&b).unwrap();
        let bd = pasting::boundary(d - 1, &b);
        prop_assert_eq!(u.precompose(&pasting::cosource(d - 1, &b)), PdMorphism::identity(&bd));
        prop_assert_eq!(u.precompose(&pasting::cotarget(d - 1, &b)), PdMorphism::identity(&bd));
    }

    #[test]
    fn reduced_morphism_covers(b in tree_upto(6)) {
        let r = stdops::reduced_morphism(&b).unwrap();
        prop_assert!(r.covers(&Computad::free(&b)));
        prop_assert!(r.check_globular().is_ok());
    }

    #[test]
    fn suspension_and_opposite_commute_with_boundary(seed in any::<u64>(), mask in 0u32..16) {
        big(move || {
            let (ctx, cells) = world(seed);
            let sctx = stdops::suspend_computad(&ctx);
            let w: BTreeSet<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
            let octx = stdops::opposite_computad(&w, &ctx);
            for c in cells.iter().filter(|c| c.dim() > 0) {
                let s = stdops::suspend(c);
                check(&s, &sctx).map_err(|d| d.to_string())?;
                let b = c.boundary().unwrap();
                if s.boundary() != Some(Sphere::new(stdops::suspend(&b.src), stdops::suspend(&b.tgt))) {
                    return Err(format!("suspension of {c} has the wrong boundary"));
                }
                let o = stdops::opposite(&w, c);
                check(&o, &octx).map_err(|d| d.to_string())?;
                let ob = Sphere::new(stdops::opposite(&w, &b.src), stdops::opposite(&w, &b.tgt));
                let want = if w.contains(&c.dim()) { ob.swap() } else { ob };
                if o.boundary() != Some(want) {
                    return Err(format!("opposite {w:?} of {c} has the wrong boundary"));
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn naturality_and_support_under_apply(seed in any::<u64>()) {
        big(move || {
            let (ctx, cells) = world(seed);
            for c in &cells {
                check(c, &ctx).map_err(|d| d.to_string())?;
                let Kind::Coh { tree, args, .. } = c.kind() else { continue };
                let sigma = PdMorphism::new(tree, args.to_vec());
                for y in cells_over(tree) {
                    let image = sigma.apply(&y).map_err(|e| e.to_string())?;
                    let Some(b) = y.boundary() else { continue };
                    let pushed = Sphere::new(sigma.apply(&b.src).unwrap(), sigma.apply(&b.tgt).unwrap());
                    if image.boundary() != Some(pushed) {
                        return Err(format!("naturality fails for {y} along {c}"));
                    }
                    for k in 0..=image.dim() {
                        let mut want = BTreeSet::new();
                        for (_, name) in y.support().iter() {
                            let q: Pos = name.parse().unwrap();
                            want.extend(sigma.get(&q).unwrap().supp(k));
                        }
                        if image.supp(k) != want {
                            return Err(format!("support of {y} along {c} differs at {k}"));
                        }
                    }
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn checked_coherences_have_full_spheres(seed in any::<u64>()) {
        big(move || {
            let (ctx, cells) = world(seed);
            for c in &cells {
                if let Kind::Coh { tree, ty, args } = c.kind() {
                    if !is_full(tree, ty, c.dim() - 1) {
                        return Err(format!("{c} has a sphere that is not full"));
                    }
                    for a in args.iter() {
                        check(a, &ctx).map_err(|d| d.to_string())?;
                    }
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn empty_top_support_fixes_lower_support(seed in any::<u64>()) {
        big(move || {
            let (_, cells) = world(seed);
            for c in cells.iter().filter(|c| c.dim() > 0 && c.supp(c.dim()).is_empty()) {
                let d = c.dim();
                let (s, t) = (c.src().unwrap(), c.tgt().unwrap());
                if s.supp(d - 1) != c.supp(d - 1) || t.supp(d - 1) != c.supp(d - 1) {
                    return Err(format!("{c}: lower supports differ"));
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn invertibility_bundles(seed in any::<u64>()) {
        big(move || {
            let (ctx, cells) = world(seed);
            for c in &cells {
                let yes = invert::is_invertible(c);
                if yes != invert::has_empty_top_support(c) {
                    return Err(format!("decision disagrees on {c}"));
                }
                if !yes {
                    continue;
                }
                let b = invert::bundle(c).map_err(|e| e.to_string())?;
                for w in [&b.inverse, &b.unit, &b.counit] {
                    check(w, &ctx).map_err(|d| d.to_string())?;
                }
                let d = c.dim();
                let cb = c.boundary().unwrap();
                let unit = Sphere::new(stdops::binary_comp(d - 1, c, &b.inverse).unwrap(), stdops::identity(&cb.src));
                let counit = Sphere::new(stdops::binary_comp(d - 1, &b.inverse, c).unwrap(), stdops::identity(&cb.tgt));
                if b.inverse.boundary() != Some(cb.swap()) || b.unit.boundary() != Some(unit) || b.counit.boundary() != Some(counit) {
                    return Err(format!("{c}: witness boundaries"));
                }
                if invert::inverse(&b.inverse).ok().as_ref() != Some(c) {
                    return Err(format!("{c}: inverse is not involutive"));
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn telescope_fills_have_the_cancelling_boundary(seed in any::<u64>()) {
        big(move || {
            let (ctx, cells) = world(seed);
            for c in cells.iter().filter(|c| invert::is_invertible(c)) {
                let Ok(fills) = invert::unit_fills(c) else { continue };
                let k = stdops::split_composite(c).map_err(|e| e.to_string())?;
                let d = k.tree.dim();
                for (p, fill) in fills {
                    check(&fill, &ctx).map_err(|e| e.to_string())?;
                    let (_, chain) = pasting::chain_data(&k.tree, &p).map_err(|e| e.to_string())?;
                    let forward: Vec<Cell> = chain
                        .source
                        .positions()
                        .of_dim(d)
                        .map(|q| k.sigma.get(chain.apply(q).unwrap()).unwrap().clone())
                        .collect();
                    let mut seq = forward.clone();
                    for x in forward.iter().rev() {
                        seq.push(invert::inverse(x).map_err(|e| e.to_string())?);
                    }
                    let minus = stdops::chain_comp(&seq, &vec![d - 1; seq.len() - 1]).map_err(|e| e.to_string())?;
                    let plus = stdops::identity(&forward[0].src().unwrap());
                    if fill.boundary() != Some(Sphere::new(minus, plus)) {
                        return Err(format!("{c}: fill at {p} has the wrong boundary"));
                    }
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn printed_cells_round_trip(seed in any::<u64>()) {
        big(move || {
            let (ctx, cells) = world(seed);
            let lets: Vec<(String, Cell)> = cells.iter().enumerate().map(|(i, c)| (format!("c{i}"), c.clone())).collect();
            let text = surface::print_program("W", &ctx, &lets);
            let el = surface::load(&text, &Options::default()).map_err(|e| format!("{e}\n{text}"))?;
            for (name, c) in &lets {
                if el.get(name).map(|b| &b.cell) != Some(c) {
                    return Err(format!("{name} changed\n{text}"));
                }
            }
            if surface::print_program("W", &ctx, &lets) != text {
                return Err("printing is not deterministic".into());
            }
            Ok(())
        })?;
    }

    #[test]
    fn parser_and_elaborator_are_total(edits in proptest::collection::vec((any::<u16>(), 0u8..3, proptest::sample::select(FRAGMENTS.to_vec())), 0..6)) {
        let mut text = SEED_PROGRAM.to_string();
        for (at, op, frag) in edits {
            let mut cut = at as usize % (text.len() + 1);
            while !text.is_char_boundary(cut) {
                cut -= 1;
            }
            match op {
                0 => text.insert_str(cut, frag),
                1 => {
                    let mut end = (cut + frag.len()).min(text.len());
                    while !text.is_char_boundary(end) {
                        end += 1;
                    }
                    text.replace_range(cut..end, "");
                }
                _ => text.replace_range(cut..cut, &frag.chars().rev().collect::<String>()),
            }
        }
        let lines = text.lines().count().max(1) as u32;
        big(move || {
            let spans: Vec<surface::Span> = match surface::parse(&text) {
                Ok(file) => surface::elaborate(&file, &Options { max_dim: Some(6) }).errors().map(|e| e.span).collect(),
                Err(e) => vec![e.span],
            };
            if let Some(s) = spans.iter().find(|s| s.line == 0 || s.line > lines + 1) {
                return Err(format!("span {s} outside the input"));
            }
            Ok(())
        })?;
    }
}

const SEED_PROGRAM: &str = "# a small program
computad C {
  x : *;
  y : *;
  f : x -> y;
  g : x -> y;
  a : f -> g;
}
let i = id(f)
let w = comp(f, id(y))
let u = coh[[[]]; comp(p1/0, id(p/1)) => p1/0](p1/0 := f)
let v = I(u)
let s = S(a)
let o = O(a, {1})
let r = R(comp(f, id(y), id(y)))
assert v : f -> comp(f, id(y))
";

const FRAGMENTS: &[&str] = &[
    "(", ")", "[", "]", "{", "}", ",", ";", ":", ":=", "=>", "->", "*", "#", "comp", "comp_1", "id(", "coh[",
    "S(", "O(", "Fn(", "R(", "I(", "U(", "CU(", "let q = ", "assert ", "computad D { z : *; }", "p1/0", "f", "a",
    "[[]]", "\n", "é", "0", "_",
];
