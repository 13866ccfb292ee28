//! Rainbow atom structures.
//!
//! An atom is a surjection from the `n` positions onto a small coloured
//! graph, kept as the kernel of the surjection (first-occurrence class
//! numbers) together with the graph relabelled along it. Two surjections
//! that induce the same labelling of positions give the same atom.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomset::AtomSet;
use crate::error::{structural, Error, Result};
use crate::game::StrategyScript;
use crate::network::{Move, Network, Node};
use crate::structures::{cm_apply, AtomId, CaAtomStructure, CmOp, ValidationReport};

/// Binary colour of an edge, read from its first endpoint to its second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Colour {
    /// `g_i` for `1 <= i < n-1`.
    Green(usize),
    /// `g_0^t`.
    Tint(i64),
    White(usize),
    /// `r_kl`: the first endpoint carries `k`, the second `l`. `sup` is the
    /// superscript of a split red, zero otherwise.
    Red { k: usize, l: usize, sup: usize },
    Rho,
}

impl Colour {
    pub fn reversed(self) -> Colour {
        match self {
            Colour::Red { k, l, sup } => Colour::Red { k: l, l: k, sup },
            c => c,
        }
    }

    pub fn is_red(self) -> bool {
        matches!(self, Colour::Red { .. })
    }

    fn is_greenish(self) -> bool {
        matches!(self, Colour::Green(_) | Colour::Tint(_))
    }

    /// The colour with any red superscript dropped.
    pub fn unsplit(self) -> Colour {
        match self {
            Colour::Red { k, l, .. } => Colour::Red { k, l, sup: 0 },
            c => c,
        }
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Colour::Green(i) => write!(f, "g{i}"),
            Colour::Tint(t) => write!(f, "g0^{t}"),
            Colour::White(i) => write!(f, "w{i}"),
            Colour::Red { k, l, sup: 0 } => write!(f, "r{k}.{l}"),
            Colour::Red { k, l, sup } => write!(f, "r{k}.{l}^{sup}"),
            Colour::Rho => write!(f, "rho"),
        }
    }
}

/// Index family for the yellow labels on `(n-1)`-sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum YellowFamily {
    /// Only `y_S` with `S = n+1`.
    Full,
    /// `y_S` for every `S ⊆ n+1`.
    Subsets,
    /// `y_S` for finite `S ⊆ n+k-2`, plus `S = n+1`.
    FiniteSubsets { k: usize },
}

impl YellowFamily {
    pub fn count(self, n: usize) -> usize {
        match self {
            YellowFamily::Full => 1,
            YellowFamily::Subsets => 1 << (n + 1),
            YellowFamily::FiniteSubsets { k } => (1 << (n + k).saturating_sub(2)) + 1,
        }
    }
}

/// Which rule governs two tints at a vertex facing a red edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RainbowVariant {
    /// Complete graphs on both sides: the tints must differ.
    Base,
    /// As `Base`, with red superscripts ignored.
    SplitRed,
    /// Tints from `Z`, red indices from `N`: the map must preserve order.
    Zn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RainbowSignature {
    pub n: usize,
    /// Whether the greens `g_i` with `i >= 1` are present.
    pub indexed_greens: bool,
    pub tints: Vec<i64>,
    /// Reds are `r_kl` for distinct `k, l` below this bound.
    pub red_indices: usize,
    /// Number of superscripts per red; 1 for an unsplit signature.
    pub red_superscripts: usize,
    pub yellows: YellowFamily,
    pub shade_of_red: bool,
}

impl RainbowSignature {
    /// `G` tints `g_0^1 .. g_0^G` and reds over `R` indices.
    pub fn ca(n: usize, greens: usize, reds: usize) -> Self {
        RainbowSignature {
            n,
            indexed_greens: true,
            tints: (1..=greens as i64).collect(),
            red_indices: reds,
            red_superscripts: 1,
            yellows: YellowFamily::Full,
            shade_of_red: false,
        }
    }

    /// Tints `g_0^t` for `t` in `[-z, 0]`, listed from `0` downwards.
    pub fn zn(n: usize, z: usize, reds: usize) -> Self {
        RainbowSignature {
            tints: (0..=z as i64).map(|t| -t).collect(),
            ..Self::ca(n, 0, reds)
        }
    }

    /// Colours an edge may carry, in every orientation.
    pub fn palette(&self) -> Vec<Colour> {
        let mut out = Vec::new();
        if self.indexed_greens {
            out.extend((1..self.n.saturating_sub(1)).map(Colour::Green));
        }
        out.extend(self.tints.iter().map(|&t| Colour::Tint(t)));
        out.extend((0..self.n.saturating_sub(1)).map(Colour::White));
        for k in 0..self.red_indices {
            for l in 0..self.red_indices {
                if k != l {
                    for sup in 0..self.red_superscripts {
                        out.push(Colour::Red { k, l, sup });
                    }
                }
            }
        }
        if self.shade_of_red {
            out.push(Colour::Rho);
        }
        out
    }

    pub fn contains(&self, c: Colour) -> bool {
        match c {
            Colour::Green(i) => self.indexed_greens && i >= 1 && i + 1 < self.n,
            Colour::Tint(t) => self.tints.contains(&t),
            Colour::White(i) => i + 1 < self.n,
            Colour::Red { k, l, sup } => {
                k != l && k < self.red_indices && l < self.red_indices && sup < self.red_superscripts
            }
            Colour::Rho => self.shade_of_red,
        }
    }

    pub fn yellow_count(&self) -> usize {
        self.yellows.count(self.n)
    }
}

/// Complete graph with coloured edges and yellow labels on `(n-1)`-sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColouredGraph {
    vertices: usize,
    arity: usize,
    /// Indexed by `pair_index(x, y)` for `x < y`, read from `x` to `y`.
    edges: Vec<Option<Colour>>,
    /// Indexed by the rank of the subset in `subsets(vertices, arity)`.
    yellows: Vec<Option<usize>>,
}

fn pair_index(x: usize, y: usize) -> usize {
    debug_assert!(x < y);
    y * (y - 1) / 2 + x
}

/// `r`-subsets of `0..v` in lexicographic order.
pub fn subsets(v: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, v: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for x in start..v {
            cur.push(x);
            go(x + 1, v, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if r <= v {
        go(0, v, r, &mut Vec::new(), &mut out);
    }
    out
}

impl ColouredGraph {
    /// Uncoloured graph; yellow labels live on sets of `arity` vertices.
    pub fn new(vertices: usize, arity: usize) -> Self {
        ColouredGraph {
            vertices,
            arity,
            edges: vec![None; vertices * vertices.saturating_sub(1) / 2],
            yellows: vec![None; subsets(vertices, arity).len()],
        }
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn colour(&self, x: usize, y: usize) -> Option<Colour> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => self.edges[pair_index(x, y)],
            std::cmp::Ordering::Greater => self.edges[pair_index(y, x)].map(Colour::reversed),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn set_colour(&mut self, x: usize, y: usize, c: Colour) {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => self.edges[pair_index(x, y)] = Some(c),
            std::cmp::Ordering::Greater => self.edges[pair_index(y, x)] = Some(c.reversed()),
            std::cmp::Ordering::Equal => panic!("loop edge at {x}"),
        }
    }

    fn subset_rank(&self, set: &[usize]) -> Option<usize> {
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.arity || s.iter().any(|&x| x >= self.vertices) {
            return None;
        }
        subsets(self.vertices, self.arity).iter().position(|t| *t == s)
    }

    pub fn yellow(&self, set: &[usize]) -> Option<usize> {
        self.subset_rank(set).and_then(|r| self.yellows[r])
    }

    pub fn set_yellow(&mut self, set: &[usize], y: usize) -> Result<()> {
        let r = self
            .subset_rank(set)
            .ok_or_else(|| Error::Parameter(format!("{set:?} is not a yellow set")))?;
        self.yellows[r] = Some(y);
        Ok(())
    }

    /// Relabels vertex `x` as `perm[x]`.
    pub fn permuted(&self, perm: &[usize]) -> ColouredGraph {
        let mut g = ColouredGraph::new(self.vertices, self.arity);
        for y in 0..self.vertices {
            for x in 0..y {
                if let Some(c) = self.colour(x, y) {
                    g.set_colour(perm[x], perm[y], c);
                }
            }
        }
        for (r, set) in subsets(self.vertices, self.arity).iter().enumerate() {
            if let Some(y) = self.yellows[r] {
                let img: Vec<usize> = set.iter().map(|&x| perm[x]).collect();
                g.set_yellow(&img, y).expect("permutation keeps set sizes");
            }
        }
        g
    }
}

fn red_ends(c: Colour) -> Option<(usize, usize)> {
    match c {
        Colour::Red { k, l, .. } => Some((k, l)),
        _ => None,
    }
}

/// Name of the rule the triangle `x, y, z` breaks, if any.
fn triangle_violation(
    sig: &RainbowSignature,
    variant: RainbowVariant,
    col: &impl Fn(usize, usize) -> Colour,
    x: usize,
    y: usize,
    z: usize,
) -> Option<&'static str> {
    let e = [col(x, y), col(y, z), col(x, z)];
    if e.iter().all(|c| c.is_greenish()) {
        return Some("green triangle");
    }
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (0, 2, 1)] {
        match (e[a], e[b], e[c]) {
            (Colour::Green(i), Colour::Green(j), Colour::White(w)) if i == j && i == w => {
                return Some("g_i g_i w_i")
            }
            (Colour::Tint(_), Colour::Tint(_), Colour::White(0)) => return Some("g_0 g_0 w_0"),
            _ => {}
        }
    }
    for (c, a, b) in [(x, y, z), (y, z, x), (z, x, y)] {
        if let (Colour::Tint(s), Colour::Tint(t), Some((k, l))) = (col(c, a), col(c, b), red_ends(col(a, b))) {
            let ok = match variant {
                RainbowVariant::Base | RainbowVariant::SplitRed => s != t,
                RainbowVariant::Zn => (s < t && k < l) || (s > t && k > l),
            };
            if !ok {
                return Some("tints against red");
            }
        }
    }
    if let (Some((kx, ky)), Some((ky2, kz)), Some((kx2, kz2))) =
        (red_ends(e[0]), red_ends(e[1]), red_ends(e[2]))
    {
        if kx != kx2 || ky != ky2 || kz != kz2 {
            return Some("red indices");
        }
    }
    if sig.shade_of_red {
        let rhos = e.iter().filter(|&&c| c == Colour::Rho).count();
        let reds: Vec<Colour> = e.iter().copied().filter(|c| c.is_red()).collect();
        if rhos == 2 && reds.len() == 1 {
            return Some("r rho rho");
        }
        if rhos == 1 && reds.len() == 2 {
            let (a, b) = (red_ends(reds[0]).unwrap(), red_ends(reds[1]).unwrap());
            if a == b || a == (b.1, b.0) {
                return Some("r r* rho");
            }
        }
    }
    None
}

/// Checks every triangle of `g` against the forbidden patterns.
pub fn graph_consistent(
    g: &ColouredGraph,
    sig: &RainbowSignature,
    variant: RainbowVariant,
) -> Result<ValidationReport> {
    let v = g.vertices;
    for y in 0..v {
        for x in 0..y {
            match g.colour(x, y) {
                None => return structural(format!("edge ({x},{y}) has no colour")),
                Some(c) if !sig.contains(c) => {
                    return structural(format!("colour {c} is not in the signature"))
                }
                _ => {}
            }
        }
    }
    let yc = sig.yellow_count();
    if g.yellows.iter().flatten().any(|&y| y >= yc) {
        return structural("yellow label outside the signature");
    }
    let col = |a: usize, b: usize| g.colour(a, b).expect("checked above");
    let mut rep = ValidationReport::new();
    for z in 0..v {
        for y in 0..z {
            for x in 0..y {
                if let Some(rule) = triangle_violation(sig, variant, &col, x, y, z) {
                    rep.push(
                        rule,
                        vec![
                            format!("{x}-{y}:{}", col(x, y)),
                            format!("{y}-{z}:{}", col(y, z)),
                            format!("{x}-{z}:{}", col(x, z)),
                        ],
                    );
                }
            }
        }
    }
    Ok(rep)
}

/// Atom of a rainbow structure: the kernel of a surjection from the
/// positions and the graph it lands on, vertices numbered by first use.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RainbowAtom {
    pub kernel: Vec<usize>,
    pub graph: ColouredGraph,
}

impl RainbowAtom {
    /// Atom of the surjection `map` onto the vertices of `g`.
    pub fn from_map(map: &[usize], g: &ColouredGraph) -> Result<RainbowAtom> {
        let mut perm = vec![usize::MAX; g.vertices];
        let mut next = 0;
        let mut kernel = Vec::with_capacity(map.len());
        for &v in map {
            if v >= g.vertices {
                return Err(Error::Index {
                    index: v,
                    bound: g.vertices,
                });
            }
            if perm[v] == usize::MAX {
                perm[v] = next;
                next += 1;
            }
            kernel.push(perm[v]);
        }
        if next != g.vertices {
            return Err(Error::Parameter("map is not onto the graph".into()));
        }
        Ok(RainbowAtom {
            kernel,
            graph: g.permuted(&perm),
        })
    }

    pub fn with_reds_unsplit(&self) -> RainbowAtom {
        let mut a = self.clone();
        for e in a.graph.edges.iter_mut().flatten() {
            *e = e.unsplit();
        }
        a
    }

    pub fn red_edges(&self) -> usize {
        self.graph.edges.iter().flatten().filter(|c| c.is_red()).count()
    }

    fn name(&self, yellows: bool) -> String {
        let k: String = self.kernel.iter().map(|v| v.to_string()).collect();
        let e: Vec<String> = self.graph.edges.iter().flatten().map(|c| c.to_string()).collect();
        let mut s = format!("{k}/{}", e.join(","));
        if yellows {
            let y: Vec<String> = self.graph.yellows.iter().flatten().map(|y| format!("y{y}")).collect();
            s.push('/');
            s.push_str(&y.join(","));
        }
        s
    }

    /// What the atom says about the positions other than `i`.
    fn face_key(&self, i: usize) -> (Vec<Option<Colour>>, Option<usize>) {
        let n = self.kernel.len();
        let rest: Vec<usize> = (0..n).filter(|&p| p != i).collect();
        let mut key = Vec::new();
        for (a, &p) in rest.iter().enumerate() {
            for &q in &rest[a + 1..] {
                key.push(self.graph.colour(self.kernel[p], self.kernel[q]));
            }
        }
        let verts: Vec<usize> = rest.iter().map(|&p| self.kernel[p]).collect();
        (key, self.graph.yellow(&verts))
    }
}

/// Restricted growth strings of length `n`: the kernels of maps from `n`.
fn kernels(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, next: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..=next {
            cur.push(v);
            go(n, cur, next.max(v + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), 0, &mut out);
    out
}

/// Consistent edge colourings of the complete graph on `v` vertices.
fn colourings(sig: &RainbowSignature, variant: RainbowVariant, v: usize) -> Vec<ColouredGraph> {
    let palette = sig.palette();
    let pairs: Vec<(usize, usize)> = (0..v).flat_map(|y| (0..y).map(move |x| (x, y))).collect();
    let arity = sig.n - 1;
    fn go(
        sig: &RainbowSignature,
        variant: RainbowVariant,
        palette: &[Colour],
        pairs: &[(usize, usize)],
        k: usize,
        g: &mut ColouredGraph,
        out: &mut Vec<ColouredGraph>,
    ) {
        if k == pairs.len() {
            out.push(g.clone());
            return;
        }
        let (x, y) = pairs[k];
        for &c in palette {
            g.set_colour(x, y, c);
            // Pairs come ordered by larger endpoint, so the triangles closed
            // by this edge are exactly those through a vertex below `x`.
            let ok = (0..x).all(|w| {
                let col = |a: usize, b: usize| g.colour(a, b).unwrap();
                triangle_violation(sig, variant, &col, w, x, y).is_none()
            });
            if ok {
                go(sig, variant, palette, pairs, k + 1, g, out);
            }
        }
        g.edges[pair_index(x, y)] = None;
    }
    if pairs.is_empty() {
        return vec![ColouredGraph::new(v, arity)];
    }
    let (x0, y0) = pairs[0];
    palette
        .par_iter()
        .map(|&c| {
            let mut g = ColouredGraph::new(v, arity);
            g.set_colour(x0, y0, c);
            let mut out = Vec::new();
            go(sig, variant, &palette, &pairs, 1, &mut g, &mut out);
            out
        })
        .flatten()
        .collect()
}

/// Every way to put yellows on the `(n-1)`-sets of `g`.
fn with_yellows(g: &ColouredGraph, count: usize) -> Vec<ColouredGraph> {
    let mut out = vec![g.clone()];
    for r in 0..g.yellows.len() {
        out = out
            .into_iter()
            .flat_map(|h| {
                (0..count).map(move |y| {
                    let mut h = h.clone();
                    h.yellows[r] = Some(y);
                    h
                })
            })
            .collect();
    }
    out
}

pub const DEFAULT_ATOM_CAP: usize = 50_000;

/// Rainbow atom structure together with the graphs behind its atoms.
#[derive(Debug, Clone)]
pub struct Rainbow {
    pub sig: RainbowSignature,
    pub variant: RainbowVariant,
    pub structure: CaAtomStructure,
    pub atoms: Vec<RainbowAtom>,
    index: HashMap<RainbowAtom, AtomId>,
}

impl Rainbow {
    pub fn atom_id(&self, a: &RainbowAtom) -> Option<AtomId> {
        self.index.get(a).copied()
    }

    /// The cone on base positions `0..n-1` with apex at position `n-1`
    /// and tint `t` from base position 0.
    pub fn cone_atom(&self, t: i64) -> Option<AtomId> {
        let n = self.sig.n;
        let mut g = ColouredGraph::new(n, n - 1);
        for q in 0..n - 1 {
            for p in 0..q {
                g.set_colour(p, q, Colour::White(0));
            }
        }
        g.set_colour(0, n - 1, Colour::Tint(t));
        for p in 1..n - 1 {
            g.set_colour(p, n - 1, Colour::Green(p));
        }
        for r in 0..g.yellows.len() {
            g.yellows[r] = Some(0);
        }
        self.atom_id(&RainbowAtom {
            kernel: (0..n).collect(),
            graph: g,
        })
    }
}

/// Builds the rainbow atom structure of `sig`; fails once the atom count
/// would exceed `cap`.
pub fn build_rainbow_ca(sig: &RainbowSignature, variant: RainbowVariant, cap: usize) -> Result<Rainbow> {
    let n = sig.n;
    if n < 3 {
        return Err(Error::Parameter(format!("dimension {n} below 3")));
    }
    if sig.red_superscripts == 0 {
        return Err(Error::Parameter("red superscript count must be positive".into()));
    }
    let ycount = sig.yellow_count();
    let ks = kernels(n);
    let mut by_v: Vec<Vec<ColouredGraph>> = Vec::with_capacity(n + 1);
    let mut total = 0usize;
    for v in 0..=n {
        let gs = if v == 0 { Vec::new() } else { colourings(sig, variant, v) };
        let per = gs.len().saturating_mul(ycount.saturating_pow(subsets(v, n - 1).len() as u32));
        let mult = ks.iter().filter(|k| k.iter().max().map_or(0, |m| m + 1) == v).count();
        total = total.saturating_add(per.saturating_mul(mult));
        if total > cap {
            return Err(Error::AtomCap { count: total, cap });
        }
        by_v.push(gs);
    }
    let mut atoms: Vec<RainbowAtom> = Vec::with_capacity(total);
    for kernel in ks {
        let v = kernel.iter().max().map_or(0, |m| m + 1);
        for g in &by_v[v] {
            for h in with_yellows(g, ycount) {
                atoms.push(RainbowAtom {
                    kernel: kernel.clone(),
                    graph: h,
                });
            }
        }
    }
    atoms.par_sort();
    let names: Vec<String> = atoms.iter().map(|a| a.name(ycount > 1)).collect();
    let faces: Vec<Vec<_>> = atoms
        .par_iter()
        .map(|a| (0..n).map(|i| a.face_key(i)).collect())
        .collect();
    let structure = CaAtomStructure::from_classes(
        n,
        names,
        |a, i, j| atoms[a].kernel[i] == atoms[a].kernel[j],
        |a, i| faces[a][i].clone(),
    )?;
    let index = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    Ok(Rainbow {
        sig: sig.clone(),
        variant,
        structure,
        atoms,
        index,
    })
}

/// A base rainbow structure, its red-split refinement, and the map sending
/// each base atom to its copies.
#[derive(Debug, Clone)]
pub struct SplitReds {
    pub base: Rainbow,
    pub split: Rainbow,
    pub copy_map: Vec<AtomSet>,
}

/// Splits every red into `t` superscripted reds. A copy of an atom picks a
/// superscript for each of its red edges independently.
pub fn split_reds(sig: &RainbowSignature, t: usize, cap: usize) -> Result<SplitReds> {
    if t == 0 {
        return Err(Error::Parameter("truncation size must be at least 1".into()));
    }
    let base_sig = RainbowSignature {
        red_superscripts: 1,
        ..sig.clone()
    };
    let base = build_rainbow_ca(&base_sig, RainbowVariant::Base, cap)?;
    let split_sig = RainbowSignature {
        red_superscripts: t,
        ..sig.clone()
    };
    let split = build_rainbow_ca(&split_sig, RainbowVariant::SplitRed, cap)?;
    let mut copy_map = vec![AtomSet::empty(split.atoms.len()); base.atoms.len()];
    for (c, atom) in split.atoms.iter().enumerate() {
        let Some(b) = base.atom_id(&atom.with_reds_unsplit()) else {
            return structural(format!("split atom {} has no base atom", split.structure.name(c)));
        };
        copy_map[b].insert(c);
    }
    Ok(SplitReds { base, split, copy_map })
}

/// Checks that sending each base atom to the join of its copies is an
/// injective homomorphism of the complex algebras.
pub fn verify_theta_embedding(
    base: &CaAtomStructure,
    split: &CaAtomStructure,
    copy_map: &[AtomSet],
) -> Result<ValidationReport> {
    if copy_map.len() != base.len() {
        return structural(format!(
            "copy map covers {} of {} base atoms",
            copy_map.len(),
            base.len()
        ));
    }
    if base.dim() != split.dim() {
        return structural("base and split differ in dimension");
    }
    if copy_map.iter().any(|c| c.capacity() != split.len()) {
        return structural("copy map image outside the split atoms");
    }
    let n = base.dim();
    let theta = |x: &AtomSet| {
        let mut out = AtomSet::empty(split.len());
        for a in x.iter() {
            out.union_with(&copy_map[a]);
        }
        out
    };
    let mut rep = ValidationReport::new();
    let mut owner: Vec<Option<AtomId>> = vec![None; split.len()];
    let mut clashes = std::collections::BTreeSet::new();
    for a in 0..base.len() {
        if copy_map[a].is_empty() {
            rep.push("theta injective", vec![base.name(a).to_string()]);
        }
        for c in copy_map[a].iter() {
            match owner[c] {
                Some(b) => {
                    clashes.insert((b, a));
                }
                None => owner[c] = Some(a),
            }
        }
    }
    for (a, b) in clashes {
        rep.push(
            "theta injective",
            vec![base.name(a).to_string(), base.name(b).to_string()],
        );
    }
    let results: Vec<Vec<(String, Vec<String>)>> = (0..base.len())
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            let single = AtomSet::from_iter(base.len(), [a]);
            let img = theta(&single);
            let lhs = theta(&cm_apply(base, CmOp::Complement, &[single.clone()]).unwrap());
            let rhs = cm_apply(split, CmOp::Complement, &[img.clone()]).unwrap();
            if lhs != rhs {
                out.push(("theta complement".to_string(), vec![base.name(a).to_string()]));
            }
            for i in 0..n {
                let lhs = theta(&cm_apply(base, CmOp::Cyl(i), &[single.clone()]).unwrap());
                let rhs = cm_apply(split, CmOp::Cyl(i), &[img.clone()]).unwrap();
                if lhs != rhs {
                    out.push((format!("theta c{i}"), vec![base.name(a).to_string()]));
                }
            }
            out
        })
        .collect();
    for (rule, t) in results.into_iter().flatten() {
        rep.push(rule, t);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && theta(base.diag(i, j)) != *split.diag(i, j) {
                rep.push(format!("theta d{i}{j}"), vec![]);
            }
        }
    }
    Ok(rep)
}

/// ∀ bombards ∃ with cones on a fixed base: each round demands a cone of
/// the next scheduled tint, witnessed off the latest apex.
#[derive(Debug, Clone)]
pub struct ConeScript {
    n: usize,
    cones: Vec<AtomId>,
    reuse: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeState {
    /// Live apexes, oldest first.
    apexes: Vec<Node>,
    latest: Node,
    round: usize,
}

impl ConeScript {
    /// Plays the tints of `schedule` in order.
    pub fn new(rainbow: &Rainbow, schedule: &[i64], reuse: bool) -> Result<Self> {
        let cones = schedule
            .iter()
            .map(|&t| {
                rainbow
                    .cone_atom(t)
                    .ok_or_else(|| Error::Parameter(format!("no cone atom of tint {t}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if cones.is_empty() {
            return Err(Error::Parameter("empty tint schedule".into()));
        }
        Ok(ConeScript {
            n: rainbow.sig.n,
            cones,
            reuse,
        })
    }

    /// One cone per tint of the signature, in signature order.
    pub fn bombard(rainbow: &Rainbow, reuse: bool) -> Result<Self> {
        Self::new(rainbow, &rainbow.sig.tints, reuse)
    }

    /// `rounds + 1` cones cycling through the first `pool` tints.
    pub fn with_tint_pool(rainbow: &Rainbow, pool: usize, rounds: usize, reuse: bool) -> Result<Self> {
        let tints = &rainbow.sig.tints;
        if pool == 0 || pool > tints.len() {
            return Err(Error::Parameter(format!("tint pool {pool} out of range")));
        }
        let schedule: Vec<i64> = (0..=rounds).map(|r| tints[r % pool]).collect();
        Self::new(rainbow, &schedule, reuse)
    }

    fn face(&self, apex: Node) -> Vec<Node> {
        let mut t: Vec<Node> = (0..self.n - 1).collect();
        t.push(apex);
        t
    }
}

impl StrategyScript for ConeScript {
    type State = ConeState;

    fn opening(&self, _: &CaAtomStructure) -> Result<AtomId> {
        Ok(self.cones[0])
    }

    fn start(&self, _: &CaAtomStructure, _: &Network) -> ConeState {
        ConeState {
            apexes: vec![self.n - 1],
            latest: self.n - 1,
            round: 0,
        }
    }

    fn next_move(&self, _: &CaAtomStructure, net: &Network, st: &ConeState) -> Option<Move> {
        let atom = *self.cones.get(st.round + 1)?;
        let fresh = (0..net.budget()).find(|&x| !net.has_node(x));
        let target = match fresh {
            Some(z) => z,
            None if self.reuse => *st.apexes.iter().find(|&&z| z != st.latest)?,
            None => return None,
        };
        Some(Move {
            tuple: self.face(st.latest),
            index: self.n - 1,
            atom,
            target: Some(target),
        })
    }

    fn observe(&self, st: &ConeState, mv: &Move, response: &Network) -> ConeState {
        let z = mv.target.expect("cone moves name their target");
        let mut next = st.clone();
        next.round += 1;
        if response.get(&self.face(z)) == Some(mv.atom) {
            next.apexes.retain(|&a| a != z);
            next.apexes.push(z);
            next.latest = z;
        } else if let Some(w) = response
            .nodes()
            .find(|&w| response.get(&self.face(w)) == Some(mv.atom))
        {
            next.latest = w;
        }
        next
    }
}
