//! Batanin trees and the combinatorics of their position sets.
//!
//! A tree `bt[B1,...,Bn]` indexes the pasting diagram obtained as the wedge of
//! the suspensions of the diagrams of its branches. Positions are encoded as a
//! path of 1-based branch indices followed by a 0-based vertex slot, so that
//! the dimension of a position is the length of its path.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock, Mutex};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PastingError {
    #[error("trees have different {k}-boundaries: {left} and {right}")]
    BoundaryMismatch { k: usize, left: Tree, right: Tree },
    #[error("position {pos} is not valid in tree {tree}")]
    InvalidPosition { pos: Pos, tree: Tree },
    #[error("position {pos} is not maximal in tree {tree}")]
    NotMaximal { pos: Pos, tree: Tree },
    #[error("position {0} has dimension 0 and no boundary")]
    DimensionZero(Pos),
    #[error("ill-formed substitution at position {pos}: {reason}")]
    IllFormedSubstitution { pos: Pos, reason: String },
    #[error("malformed spine: {0}")]
    MalformedSpine(String),
    #[error("cannot parse {what} from `{text}`")]
    Parse { what: &'static str, text: String },
}

pub type Result<T> = std::result::Result<T, PastingError>;

struct TreeNode {
    id: u64,
    branches: Vec<Tree>,
    dim: usize,
    nodes: usize,
}

/// A hash-consed Batanin tree. Equal trees share one allocation.
#[derive(Clone)]
pub struct Tree(Arc<TreeNode>);

static TREE_IDS: AtomicU64 = AtomicU64::new(0);
static TREES: LazyLock<Mutex<HashMap<Vec<u64>, Tree>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

impl Tree {
    pub fn new(branches: Vec<Tree>) -> Tree {
        let key: Vec<u64> = branches.iter().map(|b| b.0.id).collect();
        let mut table = TREES.lock().unwrap();
        if let Some(t) = table.get(&key) {
            return t.clone();
        }
        let dim = branches.iter().map(|b| b.dim() + 1).max().unwrap_or(0);
        let nodes = 1 + branches.iter().map(|b| b.nodes()).sum::<usize>();
        let id = TREE_IDS.fetch_add(1, Ordering::Relaxed);
        let t = Tree(Arc::new(TreeNode { id, branches, dim, nodes }));
        table.insert(key, t.clone());
        t
    }

    /// The tree `bt[]`, whose diagram is a single point.
    pub fn leaf() -> Tree {
        Tree::new(Vec::new())
    }

    pub fn disk(n: usize) -> Tree {
        (0..n).fold(Tree::leaf(), |t, _| t.suspend())
    }

    /// The chain `C_k` of `k` consecutive 1-cells.
    pub fn chain(k: usize) -> Tree {
        Tree::new(vec![Tree::leaf(); k])
    }

    pub fn suspend(&self) -> Tree {
        Tree::new(vec![self.clone()])
    }

    pub fn suspend_n(&self, n: usize) -> Tree {
        (0..n).fold(self.clone(), |t, _| t.suspend())
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn branches(&self) -> &[Tree] {
        &self.0.branches
    }

    pub fn is_leaf(&self) -> bool {
        self.0.branches.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn nodes(&self) -> usize {
        self.0.nodes
    }

    pub fn is_disk(&self) -> bool {
        match self.branches() {
            [] => true,
            [b] => b.is_disk(),
            _ => false,
        }
    }

    /// The subtree reached by following a path of 1-based branch indices.
    pub fn subtree(&self, path: &[u32]) -> Option<Tree> {
        let mut t = self.clone();
        for &i in path {
            let next = t.branches().get((i as usize).checked_sub(1)?)?.clone();
            t = next;
        }
        Some(t)
    }

    pub fn positions(&self) -> Arc<PosTable> {
        PosTable::of(self)
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Tree) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Tree {}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Tree) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Enumeration order: by node count, then lexicographically on branch lists.
impl Ord for Tree {
    fn cmp(&self, other: &Tree) -> std::cmp::Ordering {
        if self == other {
            return std::cmp::Ordering::Equal;
        }
        self.nodes()
            .cmp(&other.nodes())
            .then_with(|| self.branches().cmp(other.branches()))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, b) in self.branches().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Tree {
    type Err = PastingError;

    fn from_str(s: &str) -> Result<Tree> {
        let bytes: Vec<u8> = s.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let err = || PastingError::Parse { what: "tree", text: s.to_string() };
        let mut pos = 0;
        let t = parse_tree_bytes(&bytes, &mut pos).ok_or_else(err)?;
        if pos != bytes.len() {
            return Err(err());
        }
        Ok(t)
    }
}

fn parse_tree_bytes(bytes: &[u8], pos: &mut usize) -> Option<Tree> {
    if bytes.get(*pos) != Some(&b'[') {
        return None;
    }
    *pos += 1;
    let mut branches = Vec::new();
    if bytes.get(*pos) == Some(&b']') {
        *pos += 1;
        return Some(Tree::new(branches));
    }
    loop {
        branches.push(parse_tree_bytes(bytes, pos)?);
        match bytes.get(*pos) {
            Some(b',') => *pos += 1,
            Some(b']') => {
                *pos += 1;
                return Some(Tree::new(branches));
            }
            _ => return None,
        }
    }
}

/// All trees with exactly `n` nodes, in enumeration order.
pub fn enumerate_trees(n: usize) -> Vec<Tree> {
    fn forests(n: usize, memo: &mut HashMap<usize, Vec<Vec<Tree>>>) -> Vec<Vec<Tree>> {
        if let Some(f) = memo.get(&n) {
            return f.clone();
        }
        let mut out = Vec::new();
        if n == 0 {
            out.push(Vec::new());
        } else {
            for first in 1..=n {
                for head in trees(first, memo) {
                    for mut rest in forests(n - first, memo) {
                        rest.insert(0, head.clone());
                        out.push(rest);
                    }
                }
            }
        }
        memo.insert(n, out.clone());
        out
    }
    fn trees(n: usize, memo: &mut HashMap<usize, Vec<Vec<Tree>>>) -> Vec<Tree> {
        if n == 0 {
            return Vec::new();
        }
        forests(n - 1, memo).into_iter().map(Tree::new).collect()
    }
    let mut out = trees(n, &mut HashMap::new());
    out.sort();
    out
}

/// All trees with between 1 and `n` nodes.
pub fn trees_up_to(n: usize) -> Vec<Tree> {
    (1..=n).flat_map(enumerate_trees).collect()
}

/// A position of a tree: a branch path together with a vertex slot.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub path: Vec<u32>,
    pub slot: u32,
}

impl Pos {
    pub fn new(path: Vec<u32>, slot: u32) -> Pos {
        Pos { path, slot }
    }

    pub fn vertex(slot: u32) -> Pos {
        Pos { path: Vec::new(), slot }
    }

    pub fn dim(&self) -> usize {
        self.path.len()
    }

    /// The source position. It depends only on the path.
    pub fn src(&self) -> Result<Pos> {
        let (last, init) = self
            .path
            .split_last()
            .ok_or_else(|| PastingError::DimensionZero(self.clone()))?;
        Ok(Pos::new(init.to_vec(), last - 1))
    }

    pub fn tgt(&self) -> Result<Pos> {
        let (last, init) = self
            .path
            .split_last()
            .ok_or_else(|| PastingError::DimensionZero(self.clone()))?;
        Ok(Pos::new(init.to_vec(), *last))
    }

    /// The image of this position in the suspension of its tree.
    pub fn suspend(&self) -> Pos {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.push(1);
        path.extend_from_slice(&self.path);
        Pos::new(path, self.slot)
    }

    pub fn is_valid_in(&self, tree: &Tree) -> bool {
        tree.subtree(&self.path)
            .is_some_and(|t| (self.slot as usize) <= t.branches().len())
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("p")?;
        for (i, b) in self.path.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "/{}", self.slot)
    }
}

impl fmt::Debug for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Pos {
    type Err = PastingError;

    fn from_str(s: &str) -> Result<Pos> {
        let err = || PastingError::Parse { what: "position", text: s.to_string() };
        let body = s.strip_prefix('p').ok_or_else(err)?;
        let (path, slot) = body.split_once('/').ok_or_else(err)?;
        let slot: u32 = parse_digits(slot).ok_or_else(err)?;
        let path = if path.is_empty() {
            Vec::new()
        } else {
            path.split('.')
                .map(|x| parse_digits(x).filter(|&v| v > 0).ok_or_else(err))
                .collect::<Result<Vec<u32>>>()?
        };
        Ok(Pos::new(path, slot))
    }
}

fn parse_digits(s: &str) -> Option<u32> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return None;
    }
    s.parse().ok()
}

/// The position set of a tree, in canonical (lexicographic) order.
pub struct PosTable {
    pub tree: Tree,
    pub positions: Vec<Pos>,
    index: HashMap<Pos, usize>,
    names: HashMap<String, usize>,
}

static POS_TABLES: LazyLock<Mutex<HashMap<u64, Arc<PosTable>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

impl PosTable {
    fn of(tree: &Tree) -> Arc<PosTable> {
        if let Some(t) = POS_TABLES.lock().unwrap().get(&tree.id()) {
            return t.clone();
        }
        let mut positions = Vec::with_capacity(2 * tree.nodes() - 1);
        collect_positions(tree, &mut Vec::new(), &mut positions);
        positions.sort();
        let index = positions.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let names = positions.iter().enumerate().map(|(i, p)| (p.to_string(), i)).collect();
        let table = Arc::new(PosTable { tree: tree.clone(), positions, index, names });
        POS_TABLES.lock().unwrap().insert(tree.id(), table.clone());
        table
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn index_of(&self, p: &Pos) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn index_of_name(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn contains(&self, p: &Pos) -> bool {
        self.index.contains_key(p)
    }

    pub fn of_dim(&self, k: usize) -> impl Iterator<Item = &Pos> + '_ {
        self.positions.iter().filter(move |p| p.dim() == k)
    }

    pub fn count_of_dim(&self, k: usize) -> usize {
        self.of_dim(k).count()
    }

    /// Position counts indexed by dimension.
    pub fn counts(&self) -> Vec<usize> {
        (0..=self.tree.dim()).map(|k| self.count_of_dim(k)).collect()
    }

    /// Positions that are neither the source nor the target of any position.
    pub fn locally_maximal(&self) -> Vec<Pos> {
        self.positions
            .iter()
            .filter(|p| is_locally_maximal(&self.tree, p))
            .cloned()
            .collect()
    }

    pub fn maximal(&self) -> Vec<Pos> {
        self.of_dim(self.tree.dim()).cloned().collect()
    }
}

fn collect_positions(tree: &Tree, path: &mut Vec<u32>, out: &mut Vec<Pos>) {
    for slot in 0..=tree.branches().len() as u32 {
        out.push(Pos::new(path.clone(), slot));
    }
    for (i, b) in tree.branches().iter().enumerate() {
        path.push(i as u32 + 1);
        collect_positions(b, path, out);
        path.pop();
    }
}

pub fn is_locally_maximal(tree: &Tree, p: &Pos) -> bool {
    tree.subtree(&p.path).is_some_and(|t| t.is_leaf()) && p.slot == 0
}

pub fn src_pos(tree: &Tree, p: &Pos) -> Result<Pos> {
    check_valid(tree, p)?;
    p.src()
}

pub fn tgt_pos(tree: &Tree, p: &Pos) -> Result<Pos> {
    check_valid(tree, p)?;
    p.tgt()
}

fn check_valid(tree: &Tree, p: &Pos) -> Result<()> {
    if p.is_valid_in(tree) {
        Ok(())
    } else {
        Err(PastingError::InvalidPosition { pos: p.clone(), tree: tree.clone() })
    }
}

/// A map between the position sets of two trees.
#[derive(Clone, PartialEq, Eq)]
pub struct PosMap {
    pub source: Tree,
    pub target: Tree,
    images: Vec<Pos>,
}

impl PosMap {
    pub fn from_fn(source: &Tree, target: &Tree, f: impl Fn(&Pos) -> Pos) -> PosMap {
        let images = source.positions().positions.iter().map(f).collect();
        PosMap { source: source.clone(), target: target.clone(), images }
    }

    pub fn identity(tree: &Tree) -> PosMap {
        PosMap::from_fn(tree, tree, |p| p.clone())
    }

    pub fn apply(&self, p: &Pos) -> Option<&Pos> {
        let i = self.source.positions().index_of(p)?;
        Some(&self.images[i])
    }

    /// Image of the `i`-th position of the source in canonical order.
    pub fn image(&self, i: usize) -> &Pos {
        &self.images[i]
    }

    pub fn pairs(&self) -> Vec<(Pos, Pos)> {
        let table = self.source.positions();
        table.positions.iter().cloned().zip(self.images.iter().cloned()).collect()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PosMap) -> PosMap {
        assert!(self.target == other.source, "position maps are not composable");
        let images = self
            .images
            .iter()
            .map(|p| other.apply(p).expect("position outside map domain").clone())
            .collect();
        PosMap { source: self.source.clone(), target: other.target.clone(), images }
    }

    pub fn is_injective(&self) -> bool {
        let set: BTreeSet<&Pos> = self.images.iter().collect();
        set.len() == self.images.len()
    }

    /// Dimension-preserving and commuting with source and target.
    pub fn is_globular(&self) -> bool {
        let table = self.source.positions();
        table.positions.iter().zip(&self.images).all(|(p, q)| {
            if p.dim() != q.dim() || !self.target.positions().contains(q) {
                return false;
            }
            if p.dim() == 0 {
                return true;
            }
            let s = self.apply(&p.src().unwrap()).cloned();
            let t = self.apply(&p.tgt().unwrap()).cloned();
            s == q.src().ok() && t == q.tgt().ok()
        })
    }

    pub fn images(&self) -> &[Pos] {
        &self.images
    }
}

impl fmt::Debug for PosMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {{", self.source, self.target)?;
        let table = self.source.positions();
        for (i, (p, q)) in table.positions.iter().zip(&self.images).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p} ↦ {q}")?;
        }
        f.write_str("}")
    }
}

/// The `k`-boundary: the truncation of the tree at height `k`.
pub fn boundary(k: usize, tree: &Tree) -> Tree {
    if k >= tree.dim() {
        return tree.clone();
    }
    if k == 0 {
        return Tree::leaf();
    }
    Tree::new(tree.branches().iter().map(|b| boundary(k - 1, b)).collect())
}

fn co_boundary(k: usize, tree: &Tree, target_side: bool) -> PosMap {
    let bd = boundary(k, tree);
    PosMap::from_fn(&bd, tree, |q| {
        if q.dim() < k {
            q.clone()
        } else {
            let slot = if target_side {
                tree.subtree(&q.path).map(|t| t.branches().len() as u32).unwrap_or(0)
            } else {
                0
            };
            Pos::new(q.path.clone(), slot)
        }
    })
}

/// The source inclusion `s_k : Pos(∂_k B) → Pos(B)`.
pub fn cosource(k: usize, tree: &Tree) -> PosMap {
    co_boundary(k, tree, false)
}

/// The target inclusion `t_k : Pos(∂_k B) → Pos(B)`.
pub fn cotarget(k: usize, tree: &Tree) -> PosMap {
    co_boundary(k, tree, true)
}

/// A grafted tree with its two pushout inclusions.
#[derive(Clone, Debug)]
pub struct Graft {
    pub tree: Tree,
    pub inc_minus: PosMap,
    pub inc_plus: PosMap,
}

/// Composition of two trees along their common `k`-boundary.
pub fn graft(k: usize, left: &Tree, right: &Tree) -> Result<Graft> {
    if boundary(k, left) != boundary(k, right) {
        return Err(PastingError::BoundaryMismatch {
            k,
            left: boundary(k, left),
            right: boundary(k, right),
        });
    }
    let tree = graft_tree(k, left, right);
    let inc_minus = PosMap::identity_into(left, &tree);
    let inc_plus = PosMap::from_fn(right, &tree, |p| {
        if p.dim() < k {
            return p.clone();
        }
        let shift = left.subtree(&p.path[..k]).map(|t| t.branches().len() as u32).unwrap_or(0);
        let mut q = p.clone();
        if p.dim() == k {
            q.slot += shift;
        } else {
            q.path[k] += shift;
        }
        q
    });
    Ok(Graft { tree, inc_minus, inc_plus })
}

fn graft_tree(k: usize, left: &Tree, right: &Tree) -> Tree {
    if k == 0 {
        let mut branches = left.branches().to_vec();
        branches.extend_from_slice(right.branches());
        return Tree::new(branches);
    }
    Tree::new(
        left.branches()
            .iter()
            .zip(right.branches())
            .map(|(l, r)| graft_tree(k - 1, l, r))
            .collect(),
    )
}

impl PosMap {
    fn identity_into(source: &Tree, target: &Tree) -> PosMap {
        PosMap::from_fn(source, target, |p| p.clone())
    }
}

/// The locally maximal positions of a tree in planar order, together with the
/// codimension between each consecutive pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spine {
    pub positions: Vec<Pos>,
    pub codims: Vec<usize>,
}

pub fn spine(tree: &Tree) -> Spine {
    let positions = tree.positions().locally_maximal();
    let codims = positions
        .windows(2)
        .map(|w| w[0].path.iter().zip(&w[1].path).take_while(|(a, b)| a == b).count())
        .collect();
    Spine { positions, codims }
}

/// Grafts a sequence of trees along the given codimensions, splitting at the
/// smallest codimension first. Returns the composite together with the
/// inclusion of each piece.
pub fn graft_sequence(trees: &[Tree], codims: &[usize]) -> Result<(Tree, Vec<PosMap>)> {
    if trees.is_empty() || codims.len() + 1 != trees.len() {
        return Err(PastingError::MalformedSpine(format!(
            "{} pieces with {} codimensions",
            trees.len(),
            codims.len()
        )));
    }
    if trees.len() == 1 {
        return Ok((trees[0].clone(), vec![PosMap::identity(&trees[0])]));
    }
    let (split, &k) = codims
        .iter()
        .enumerate()
        .min_by_key(|&(i, k)| (*k, i))
        .expect("non-empty codimensions");
    let (lt, lmaps) = graft_sequence(&trees[..=split], &codims[..split])?;
    let (rt, rmaps) = graft_sequence(&trees[split + 1..], &codims[split + 1..])?;
    let g = graft(k, &lt, &rt)?;
    let mut maps: Vec<PosMap> = lmaps.iter().map(|m| m.then(&g.inc_minus)).collect();
    maps.extend(rmaps.iter().map(|m| m.then(&g.inc_plus)));
    Ok((g.tree, maps))
}

pub fn recompose(spine: &Spine) -> Result<Tree> {
    let disks: Vec<Tree> = spine.positions.iter().map(|p| Tree::disk(p.dim())).collect();
    Ok(graft_sequence(&disks, &spine.codims)?.0)
}

/// Substitutes a tree for each position and composes the result along the
/// spine of `tree`. The assignment must be globular: `f(p)` has dimension at
/// most `dim p` and its boundaries are the images of the source and target.
pub fn substitute(tree: &Tree, f: impl Fn(&Pos) -> Tree) -> Result<Tree> {
    let table = tree.positions();
    let images: Vec<Tree> = table.positions.iter().map(&f).collect();
    for (p, t) in table.positions.iter().zip(&images) {
        if t.dim() > p.dim() {
            return Err(PastingError::IllFormedSubstitution {
                pos: p.clone(),
                reason: format!("image {t} has dimension above {}", p.dim()),
            });
        }
        if p.dim() > 0 {
            let bd = boundary(p.dim() - 1, t);
            for q in [p.src()?, p.tgt()?] {
                let img = &images[table.index_of(&q).expect("boundary position")];
                if *img != bd {
                    return Err(PastingError::IllFormedSubstitution {
                        pos: p.clone(),
                        reason: format!("boundary {bd} differs from image {img} of {q}"),
                    });
                }
            }
        }
    }
    let sp = spine(tree);
    let pieces: Vec<Tree> = sp
        .positions
        .iter()
        .map(|p| images[table.index_of(p).unwrap()].clone())
        .collect();
    Ok(graft_sequence(&pieces, &sp.codims)?.0)
}

fn shift_set(w: &BTreeSet<usize>) -> BTreeSet<usize> {
    w.iter().filter(|&&j| j >= 2).map(|j| j - 1).collect()
}

/// The `w`-opposite tree: branch order is reversed at depth `j - 1` for each
/// `j ∈ w`.
pub fn opposite_tree(w: &BTreeSet<usize>, tree: &Tree) -> Tree {
    if tree.is_leaf() || w.is_empty() {
        return tree.clone();
    }
    let inner = shift_set(w);
    let mut branches: Vec<Tree> = tree.branches().iter().map(|b| opposite_tree(&inner, b)).collect();
    if w.contains(&1) {
        branches.reverse();
    }
    Tree::new(branches)
}

/// The image in `op_w(tree)` of a position of `tree`.
pub fn opposite_pos(w: &BTreeSet<usize>, tree: &Tree, p: &Pos) -> Pos {
    let n = tree.branches().len() as u32;
    let flip = w.contains(&1);
    match p.path.split_first() {
        None => Pos::vertex(if flip { n - p.slot } else { p.slot }),
        Some((&i, rest)) => {
            let sub = &tree.branches()[i as usize - 1];
            let q = opposite_pos(&shift_set(w), sub, &Pos::new(rest.to_vec(), p.slot));
            let mut path = vec![if flip { n + 1 - i } else { i }];
            path.extend(q.path);
            Pos::new(path, q.slot)
        }
    }
}

/// The opposite tree together with its position bijection
/// `Pos(op_w B) → Pos(B)`.
pub fn opposite(w: &BTreeSet<usize>, tree: &Tree) -> (Tree, PosMap) {
    let op = opposite_tree(w, tree);
    let map = PosMap::from_fn(&op, tree, |q| opposite_pos(w, &op, q));
    (op, map)
}

/// A functorialised tree with its cocone data.
#[derive(Clone, Debug)]
pub struct Functorialised {
    pub tree: Tree,
    pub s_inc: PosMap,
    pub t_inc: PosMap,
    /// For each marked position, the new position above it.
    pub new_pos: Vec<(Pos, Pos)>,
}

/// Grows one new branch on top of each marked maximal position.
pub fn functorialise_tree(marked: &BTreeSet<Pos>, tree: &Tree) -> Result<Functorialised> {
    let d = tree.dim();
    for x in marked {
        if !x.is_valid_in(tree) {
            return Err(PastingError::InvalidPosition { pos: x.clone(), tree: tree.clone() });
        }
        if x.dim() != d {
            return Err(PastingError::NotMaximal { pos: x.clone(), tree: tree.clone() });
        }
    }
    if marked.is_empty() {
        return Ok(Functorialised {
            tree: tree.clone(),
            s_inc: PosMap::identity(tree),
            t_inc: PosMap::identity(tree),
            new_pos: Vec::new(),
        });
    }
    let paths: BTreeSet<Vec<u32>> = marked.iter().map(|x| x.path.clone()).collect();
    let grown = grow(tree, &mut Vec::new(), &paths);
    let new_pos = marked
        .iter()
        .map(|x| {
            let mut path = x.path.clone();
            path.push(1);
            (x.clone(), Pos::new(path, 0))
        })
        .collect();
    Ok(Functorialised {
        s_inc: cosource(d, &grown),
        t_inc: cotarget(d, &grown),
        tree: grown,
        new_pos,
    })
}

fn grow(tree: &Tree, path: &mut Vec<u32>, marked: &BTreeSet<Vec<u32>>) -> Tree {
    if !marked.iter().any(|m| m.starts_with(path)) {
        return tree.clone();
    }
    if tree.is_leaf() {
        return Tree::disk(1);
    }
    let mut branches = Vec::with_capacity(tree.branches().len());
    for (i, b) in tree.branches().iter().enumerate() {
        path.push(i as u32 + 1);
        branches.push(grow(b, path, marked));
        path.pop();
    }
    Tree::new(branches)
}

/// Chain reduction: merges each chain of top-dimensional positions into one.
pub fn chain_reduce(tree: &Tree) -> Tree {
    if tree.dim() == 0 {
        return tree.clone();
    }
    reduce_at(tree.dim() - 1, tree)
}

fn reduce_at(i: usize, tree: &Tree) -> Tree {
    if tree.is_leaf() {
        return tree.clone();
    }
    if i == 0 {
        return Tree::disk(1);
    }
    Tree::new(tree.branches().iter().map(|b| reduce_at(i - 1, b)).collect())
}

/// The length of the chain merged into the maximal position `p` of the
/// reduced tree, and the map `Σ^{d-1} C_length → B` picking that chain.
pub fn chain_data(tree: &Tree, p: &Pos) -> Result<(usize, PosMap)> {
    let d = tree.dim();
    let red = chain_reduce(tree);
    if !p.is_valid_in(&red) {
        return Err(PastingError::InvalidPosition { pos: p.clone(), tree: red });
    }
    if p.dim() != d {
        return Err(PastingError::NotMaximal { pos: p.clone(), tree: red });
    }
    if d == 0 {
        return Ok((0, PosMap::identity(tree)));
    }
    let prefix = &p.path[..d - 1];
    let length = tree.subtree(prefix).map(|t| t.branches().len()).unwrap_or(0);
    let source = Tree::chain(length).suspend_n(d - 1);
    let map = PosMap::from_fn(&source, tree, |q| {
        let m = q.dim();
        if m < d - 1 {
            Pos::new(prefix[..m].to_vec(), prefix[m] - 1 + q.slot)
        } else {
            let mut path = prefix.to_vec();
            path.extend_from_slice(&q.path[d - 1..]);
            Pos::new(path, q.slot)
        }
    });
    Ok((length, map))
}
