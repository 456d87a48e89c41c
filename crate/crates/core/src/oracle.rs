//! Brute-force ground truth: exhaustive enumeration of vertex-labelled networks,
//! classification, and leaf-labelled classes via canonical forms.
//!
//! A network on `n` vertices has one root (in 0, out 2), `l` leaves (in 1, out 0),
//! `t` tree vertices (in 1, out 2) and `k` reticulations (in 2, out 1). Degree
//! counting forces `n` odd, `l + k = (n+1)/2` and `t = (n-3)/2`.
//!
//! The main enumerator fixes which labels carry which type (0 = root, then leaves,
//! tree vertices, reticulations) and multiplies by `n!/(l! t! k!)`: relabelling acts
//! freely on labelled networks and preserves types, so every type assignment has
//! the same number of networks. Leaves are never enumerated there. Once the
//! in-edges of all tree vertices and reticulations are fixed, the remaining free
//! out-slots number exactly `l`, and the leaves can fill them in `l!/prod(free!)` ways.

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("time budget exceeded")]
    BudgetExceeded,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("size {0} outside the oracle range (max {1})")]
    OutOfRange(usize, usize),
}

/// Largest `n` accepted unless [`OracleConfig::max_n`] is raised.
pub const DEFAULT_MAX_N: usize = 9;

#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Whether the root may be the parent of a double edge.
    pub allow_root_double: bool,
    pub budget: Option<Duration>,
    pub max_n: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { allow_root_double: true, budget: None, max_n: DEFAULT_MAX_N }
    }
}

impl OracleConfig {
    fn check(&self, n: usize) -> Result<(), OracleError> {
        if n > self.max_n {
            Err(OracleError::OutOfRange(n, self.max_n))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VType {
    Root,
    Leaf,
    Tree,
    Ret,
}

/// A vertex-labelled network. Labels are `0..n`; parallel edges appear twice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Classification {
    pub k: usize,
    /// Reticulations entered by a double edge.
    pub r: usize,
    pub tree_child: bool,
    pub leaves: usize,
}

impl Network {
    pub fn types(&self) -> Result<Vec<VType>, OracleError> {
        let mut ind = vec![0usize; self.n];
        let mut outd = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            if u >= self.n || v >= self.n {
                return Err(OracleError::InvalidNetwork(format!("edge ({u},{v}) out of range")));
            }
            outd[u] += 1;
            ind[v] += 1;
        }
        let mut roots = 0;
        let ty = (0..self.n)
            .map(|v| match (ind[v], outd[v]) {
                (0, 2) => {
                    roots += 1;
                    Ok(VType::Root)
                }
                (1, 0) => Ok(VType::Leaf),
                (1, 2) => Ok(VType::Tree),
                (2, 1) => Ok(VType::Ret),
                (i, o) => Err(OracleError::InvalidNetwork(format!("vertex {v} has in {i}, out {o}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if roots != 1 {
            return Err(OracleError::InvalidNetwork(format!("{roots} roots")));
        }
        Ok(ty)
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            ch[u].push(v);
        }
        ch
    }

    /// Degree types, acyclicity and connectivity.
    pub fn validate(&self) -> Result<Vec<VType>, OracleError> {
        let ty = self.types()?;
        let root = ty.iter().position(|t| *t == VType::Root).unwrap();
        let ch = self.children();
        let mut ind = vec![0usize; self.n];
        for &(_, v) in &self.edges {
            ind[v] += 1;
        }
        let mut stack = vec![root];
        let mut seen = 0;
        while let Some(u) = stack.pop() {
            seen += 1;
            for &c in &ch[u] {
                ind[c] -= 1;
                if ind[c] == 0 {
                    stack.push(c);
                }
            }
        }
        if seen != self.n {
            return Err(OracleError::InvalidNetwork("cyclic or disconnected".into()));
        }
        Ok(ty)
    }
}

pub fn classify(g: &Network) -> Result<Classification, OracleError> {
    let ty = g.validate()?;
    let ch = g.children();
    let k = ty.iter().filter(|t| **t == VType::Ret).count();
    let leaves = ty.iter().filter(|t| **t == VType::Leaf).count();
    let mut par = vec![Vec::new(); g.n];
    for &(u, v) in &g.edges {
        par[v].push(u);
    }
    let r = (0..g.n).filter(|&v| ty[v] == VType::Ret && par[v][0] == par[v][1]).count();
    let tree_child = r == 0
        && (0..g.n).all(|u| ty[u] == VType::Leaf || ch[u].iter().any(|&c| ty[c] != VType::Ret));
    Ok(Classification { k, r, tree_child, leaves })
}

/// Vertex-labelled counts keyed by `(k, r, tree_child)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexCounts {
    pub n: usize,
    pub by_class: BTreeMap<(usize, usize, bool), BigUint>,
}

impl VertexCounts {
    pub fn total(&self, k: usize) -> BigUint {
        self.sum(|kk, _, _| kk == k)
    }

    pub fn no_mult(&self, k: usize) -> BigUint {
        self.sum(|kk, r, _| kk == k && r == 0)
    }

    pub fn mult(&self, k: usize) -> BigUint {
        self.sum(|kk, r, _| kk == k && r > 0)
    }

    pub fn tree_child(&self, k: usize) -> BigUint {
        self.sum(|kk, _, tc| kk == k && tc)
    }

    pub fn with_r(&self, k: usize, r: usize) -> BigUint {
        self.sum(|kk, rr, _| kk == k && rr == r)
    }

    pub fn all(&self) -> BigUint {
        self.sum(|_, _, _| true)
    }

    fn sum(&self, f: impl Fn(usize, usize, bool) -> bool) -> BigUint {
        self.by_class.iter().filter(|((k, r, tc), _)| f(*k, *r, *tc)).map(|(_, c)| c.clone()).sum()
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

/// Type layout for fixed `(n, k)`: 0 root, then leaves, tree vertices, reticulations.
#[derive(Clone, Debug)]
struct Layout {
    n: usize,
    l: usize,
    t: usize,
    k: usize,
    cap: Vec<u8>,
}

impl Layout {
    fn new(n: usize, k: usize) -> Option<Self> {
        if n % 2 == 0 || n < 3 {
            return None;
        }
        let lk = (n + 1) / 2;
        if k >= lk {
            return None;
        }
        let l = lk - k;
        let t = (n - 3) / 2;
        let mut cap = vec![2u8];
        cap.extend(std::iter::repeat(0).take(l));
        cap.extend(std::iter::repeat(2).take(t));
        cap.extend(std::iter::repeat(1).take(k));
        Some(Layout { n, l, t, k, cap })
    }

    fn is_ret(&self, v: usize) -> bool {
        v > self.l + self.t
    }

    fn is_leaf(&self, v: usize) -> bool {
        (1..=self.l).contains(&v)
    }

    /// Tree vertices then reticulations: the vertices whose in-edges are searched.
    fn vars(&self) -> Vec<usize> {
        (self.l + 1..self.n).collect()
    }
}

/// In-edge choice for one searched vertex: `(a, a)` is a double edge, `(a, NONE)` a single edge.
const NONE: usize = usize::MAX;

struct Search<'a> {
    lay: &'a Layout,
    allow_root_double: bool,
    out: Vec<u8>,
    children: Vec<Vec<usize>>,
    parents: Vec<(usize, usize)>,
    deadline: Option<Instant>,
    stop: &'a AtomicBool,
    ticks: u64,
}

impl<'a> Search<'a> {
    fn new(lay: &'a Layout, cfg: &OracleConfig, deadline: Option<Instant>, stop: &'a AtomicBool) -> Self {
        Search {
            lay,
            allow_root_double: cfg.allow_root_double,
            out: vec![0; lay.n],
            children: vec![Vec::with_capacity(2); lay.n],
            parents: vec![(NONE, NONE); lay.n],
            deadline,
            stop,
            ticks: 0,
        }
    }

    /// True if `target` is reachable from `from` along current edges.
    fn reaches(&self, from: usize, target: usize) -> bool {
        let mut stack = [0usize; 32];
        let mut sp = 1;
        stack[0] = from;
        while sp > 0 {
            sp -= 1;
            let u = stack[sp];
            if u == target {
                return true;
            }
            for &c in &self.children[u] {
                stack[sp] = c;
                sp += 1;
            }
        }
        false
    }

    fn choices(&self, v: usize) -> Vec<(usize, usize)> {
        let lay = self.lay;
        let free = |a: usize| lay.cap[a] - self.out[a];
        let ok = |a: usize| a != v && !lay.is_leaf(a) && free(a) > 0 && !self.reaches(v, a);
        let mut out = Vec::new();
        if lay.is_ret(v) {
            for a in 0..lay.n {
                if !ok(a) {
                    continue;
                }
                if free(a) >= 2 && (a != 0 || self.allow_root_double) {
                    out.push((a, a));
                }
                for b in a + 1..lay.n {
                    if ok(b) {
                        out.push((a, b));
                    }
                }
            }
        } else {
            for a in 0..lay.n {
                if ok(a) {
                    out.push((a, NONE));
                }
            }
        }
        out
    }

    fn push(&mut self, v: usize, (a, b): (usize, usize)) {
        self.out[a] += 1;
        self.children[a].push(v);
        if b != NONE {
            self.out[b] += 1;
            self.children[b].push(v);
        }
        self.parents[v] = (a, b);
    }

    fn pop(&mut self, v: usize) {
        let (a, b) = self.parents[v];
        self.out[a] -= 1;
        self.children[a].pop();
        if b != NONE {
            self.out[b] -= 1;
            self.children[b].pop();
        }
        self.parents[v] = (NONE, NONE);
    }

    fn timed_out(&mut self) -> bool {
        self.ticks += 1;
        if self.ticks % 4096 == 1 {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    self.stop.store(true, Ordering::Relaxed);
                }
            }
        }
        self.stop.load(Ordering::Relaxed)
    }

    fn run(&mut self, vars: &[usize], i: usize, f: &mut impl FnMut(&Self)) {
        if self.timed_out() {
            return;
        }
        if i == vars.len() {
            f(self);
            return;
        }
        let v = vars[i];
        for c in self.choices(v) {
            self.push(v, c);
            self.run(vars, i + 1, f);
            self.pop(v);
        }
    }

    fn free(&self, a: usize) -> u8 {
        self.lay.cap[a] - self.out[a]
    }

    fn classify_skeleton(&self) -> (usize, bool) {
        let lay = self.lay;
        let r = (lay.l + lay.t + 1..lay.n).filter(|&v| self.parents[v].0 == self.parents[v].1).count();
        let tc = r == 0
            && (0..lay.n)
                .filter(|&u| !lay.is_leaf(u))
                .all(|u| self.free(u) > 0 || self.children[u].iter().any(|&c| !lay.is_ret(c)));
        (r, tc)
    }

    /// Internal vertices all reachable from the root (implied by acyclicity, checked anyway).
    fn connected(&self) -> bool {
        let lay = self.lay;
        let mut seen = vec![false; lay.n];
        let mut stack = vec![0];
        let mut count = 0;
        while let Some(u) = stack.pop() {
            if seen[u] {
                continue;
            }
            seen[u] = true;
            count += 1;
            stack.extend(self.children[u].iter().copied());
        }
        count == 1 + lay.t + lay.k
    }

    fn leaf_ways(&self) -> u64 {
        let mut w: u64 = (1..=self.lay.l as u64).product();
        for a in 0..self.lay.n {
            if self.free(a) == 2 {
                w /= 2;
            }
        }
        w
    }

    /// Places leaves `1..=l` on the free slots in every possible way.
    fn for_each_leafing(&mut self, f: &mut impl FnMut(&Network)) {
        let lay = self.lay.clone();
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(lay.n + lay.k);
        for v in lay.vars() {
            let (a, b) = self.parents[v];
            edges.push((a, v));
            if b != NONE {
                edges.push((b, v));
            }
        }
        let base = edges.len();
        fn rec(s: &mut Search, leaf: usize, edges: &mut Vec<(usize, usize)>, f: &mut impl FnMut(&Network)) {
            let lay = s.lay;
            if leaf > lay.l {
                f(&Network { n: lay.n, edges: edges.clone() });
                return;
            }
            for a in 0..lay.n {
                if !lay.is_leaf(a) && s.free(a) > 0 {
                    s.out[a] += 1;
                    edges.push((a, leaf));
                    rec(s, leaf + 1, edges, f);
                    edges.pop();
                    s.out[a] -= 1;
                }
            }
        }
        rec(self, 1, &mut edges, f);
        edges.truncate(base);
    }
}

fn deadline(cfg: &OracleConfig) -> Option<Instant> {
    cfg.budget.map(|b| Instant::now() + b)
}

/// Vertex-labelled counts with exactly `k` reticulations on `n` vertices.
pub fn enumerate_k(n: usize, k: usize, cfg: &OracleConfig) -> Result<BTreeMap<(usize, bool), BigUint>, OracleError> {
    cfg.check(n)?;
    let Some(lay) = Layout::new(n, k) else { return Ok(BTreeMap::new()) };
    let stop = AtomicBool::new(false);
    let dl = deadline(cfg);
    let vars = lay.vars();
    let tally = |s: &mut Search, from: usize| {
        let mut acc: BTreeMap<(usize, bool), u128> = BTreeMap::new();
        s.run(&vars, from, &mut |s: &Search| {
            if s.connected() {
                *acc.entry(s.classify_skeleton()).or_default() += s.leaf_ways() as u128;
            }
        });
        acc
    };
    let parts: Vec<BTreeMap<(usize, bool), u128>> = match vars.first() {
        None => vec![tally(&mut Search::new(&lay, cfg, dl, &stop), 0)],
        Some(&v0) => Search::new(&lay, cfg, dl, &stop)
            .choices(v0)
            .into_par_iter()
            .map(|c| {
                let mut s = Search::new(&lay, cfg, dl, &stop);
                s.push(v0, c);
                tally(&mut s, 1)
            })
            .collect(),
    };
    if stop.load(Ordering::Relaxed) {
        return Err(OracleError::BudgetExceeded);
    }
    let mult = factorial(n) / (factorial(lay.l) * factorial(lay.t) * factorial(lay.k));
    let mut out = BTreeMap::new();
    for p in parts {
        for (key, c) in p {
            *out.entry(key).or_insert_with(BigUint::zero) += BigUint::from(c);
        }
    }
    for c in out.values_mut() {
        *c *= &mult;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// Coloured shape of the sparsened skeleton obtained by deleting, for each reticulation,
/// the in-edge from `removed[i]`. Pointer vertices are coloured `g` (one deleted out-edge),
/// `dg` (two) or `rg` (a reticulation); uncoloured branch points print as `.`.
fn skeleton_shape(s: &Search, rets: &[usize], removed: &[usize]) -> String {
    let lay = s.lay;
    let mut tpar = vec![NONE; lay.n];
    for v in lay.vars() {
        let (a, b) = s.parents[v];
        tpar[v] = if lay.is_ret(v) {
            let i = rets.iter().position(|&x| x == v).unwrap();
            if removed[i] == a { b } else { a }
        } else {
            a
        };
    }
    let mut colour: Vec<Option<&str>> = vec![None; lay.n];
    let mut deleted = vec![0u8; lay.n];
    for &p in removed {
        deleted[p] += 1;
    }
    for v in 0..lay.n {
        colour[v] = match (deleted[v], lay.is_ret(v)) {
            (0, _) => None,
            (_, true) => Some("rg"),
            (1, false) => Some("g"),
            _ => Some("dg"),
        };
    }
    let anc = |mut v: usize| {
        let mut a = vec![v];
        while tpar[v] != NONE {
            v = tpar[v];
            a.push(v);
        }
        a
    };
    let ptrs: Vec<usize> = (0..lay.n).filter(|&v| colour[v].is_some()).collect();
    let mut keep = vec![false; lay.n];
    for &p in &ptrs {
        keep[p] = true;
    }
    for (i, &a) in ptrs.iter().enumerate() {
        let aa = anc(a);
        for &b in &ptrs[i + 1..] {
            if let Some(x) = anc(b).into_iter().find(|x| aa.contains(x)) {
                keep[x] = true;
            }
        }
    }
    let mut kids = vec![Vec::new(); lay.n];
    let mut top = NONE;
    for v in (0..lay.n).filter(|&v| keep[v]) {
        match anc(v)[1..].iter().find(|&&x| keep[x]) {
            Some(&p) => kids[p].push(v),
            None => top = v,
        }
    }
    fn canon(v: usize, kids: &[Vec<usize>], colour: &[Option<&str>]) -> String {
        let mut c: Vec<String> = kids[v].iter().map(|&x| canon(x, kids, colour)).collect();
        c.sort();
        format!("({}{})", colour[v].unwrap_or("."), c.concat())
    }
    canon(top, &kids, &colour)
}

/// For every network with `k` reticulations on `n` vertices and every choice of one
/// deleted in-edge per reticulation, the coloured sparsened-skeleton shape; counts are
/// vertex-labelled and keyed by (has a double edge, shape). A diagnostic that splits the
/// stratum totals by skeleton family.
pub fn shape_census(n: usize, k: usize, cfg: &OracleConfig) -> Result<BTreeMap<(bool, String), BigUint>, OracleError> {
    cfg.check(n)?;
    let Some(lay) = Layout::new(n, k) else { return Ok(BTreeMap::new()) };
    let stop = AtomicBool::new(false);
    let mut s = Search::new(&lay, cfg, deadline(cfg), &stop);
    let vars = lay.vars();
    let rets: Vec<usize> = (lay.l + lay.t + 1..n).collect();
    let mut acc: BTreeMap<(bool, String), u128> = BTreeMap::new();
    s.run(&vars, 0, &mut |s: &Search| {
        if !s.connected() {
            return;
        }
        let w = s.leaf_ways() as u128;
        let (r, _) = s.classify_skeleton();
        let opts: Vec<Vec<usize>> = rets
            .iter()
            .map(|&v| {
                let (a, b) = s.parents[v];
                if a == b { vec![a] } else { vec![a, b] }
            })
            .collect();
        let mut idx = vec![0usize; rets.len()];
        loop {
            let removed: Vec<usize> = idx.iter().zip(&opts).map(|(&i, o)| o[i]).collect();
            *acc.entry((r > 0, skeleton_shape(s, &rets, &removed))).or_default() += w;
            let mut i = 0;
            while i < idx.len() {
                idx[i] += 1;
                if idx[i] < opts[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == idx.len() {
                break;
            }
        }
    });
    if stop.load(Ordering::Relaxed) {
        return Err(OracleError::BudgetExceeded);
    }
    let mult = factorial(n) / (factorial(lay.l) * factorial(lay.t) * factorial(lay.k));
    Ok(acc.into_iter().map(|(key, c)| (key, BigUint::from(c) * &mult)).collect())
}

/// All vertex-labelled networks on `n` vertices, by `(k, r, tree_child)`.
pub fn enumerate(n: usize, cfg: &OracleConfig) -> Result<VertexCounts, OracleError> {
    cfg.check(n)?;
    let mut vc = VertexCounts { n, by_class: BTreeMap::new() };
    if n % 2 == 0 || n < 3 {
        return Ok(vc);
    }
    for k in 0..(n + 1) / 2 {
        for ((r, tc), c) in enumerate_k(n, k, cfg)? {
            vc.by_class.insert((k, r, tc), c);
        }
    }
    Ok(vc)
}

/// Generate-and-filter over every labelling: each vertex picks a parent multiset of
/// size 0, 1 or 2, and the result is kept if it is a valid network. Independent of
/// the typed search above; feasible for `n <= 5`.
pub fn brute_force(n: usize) -> VertexCounts {
    assert!(n <= 5, "generate-and-filter is only feasible for n <= 5");
    let mut opts: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..n {
        opts.push(vec![a]);
        for b in a..n {
            opts.push(vec![a, b]);
        }
    }
    let mut by_class: BTreeMap<(usize, usize, bool), BigUint> = BTreeMap::new();
    let total = opts.len().pow(n as u32);
    for mut code in 0..total {
        let mut edges = Vec::new();
        for v in 0..n {
            for &p in &opts[code % opts.len()] {
                edges.push((p, v));
            }
            code /= opts.len();
        }
        let g = Network { n, edges };
        if let Ok(c) = classify(&g) {
            *by_class.entry((c.k, c.r, c.tree_child)).or_insert_with(BigUint::zero) += 1u32;
        }
    }
    VertexCounts { n, by_class }
}

/// Calls `f` on every network with the fixed type layout (root 0, leaves `1..=l`,
/// then tree vertices and reticulations). Each such network stands for
/// `n!/(l! t! k!)` vertex-labelled ones.
pub fn for_each_typed_network(
    n: usize,
    k: usize,
    cfg: &OracleConfig,
    mut f: impl FnMut(&Network),
) -> Result<(), OracleError> {
    cfg.check(n)?;
    let Some(lay) = Layout::new(n, k) else { return Ok(()) };
    let stop = AtomicBool::new(false);
    let mut s = Search::new(&lay, cfg, deadline(cfg), &stop);
    let vars = lay.vars();
    let mut skeletons: Vec<Vec<(usize, usize)>> = Vec::new();
    s.run(&vars, 0, &mut |s: &Search| {
        if s.connected() {
            skeletons.push(s.parents.clone());
        }
    });
    if stop.load(Ordering::Relaxed) {
        return Err(OracleError::BudgetExceeded);
    }
    for p in skeletons {
        for &v in &vars {
            s.push(v, p[v]);
        }
        s.for_each_leafing(&mut f);
        for &v in vars.iter().rev() {
            s.pop(v);
        }
    }
    Ok(())
}

/// Writes each typed network as a header `n k r` followed by one `u v` line per edge
/// (labels from 1), with a blank line between networks. Returns the number written.
pub fn write_edge_lists(n: usize, k: usize, cfg: &OracleConfig, w: &mut impl Write) -> std::io::Result<usize> {
    let mut count = 0;
    let mut err = None;
    let res = for_each_typed_network(n, k, cfg, |g| {
        if err.is_some() {
            return;
        }
        let c = classify(g).expect("enumerated networks are valid");
        let mut body = format!("{} {} {}\n", g.n, c.k, c.r);
        for (u, v) in &g.edges {
            body.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        body.push('\n');
        if let Err(e) = w.write_all(body.as_bytes()) {
            err = Some(e);
        }
        count += 1;
    });
    if let Some(e) = err {
        return Err(e);
    }
    res.map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(count)
}

/// Canonical edge list of a network up to relabelling of its non-leaf vertices,
/// with leaves `1..=l` kept fixed, together with the number of such relabellings
/// that preserve the network.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    pub edges: Vec<(u8, u8)>,
    pub aut: u64,
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.edges.iter().map(|(u, v)| format!("{u}>{v}")).collect();
        write!(f, "[{}] |Aut|={}", e.join(" "), self.aut)
    }
}

/// Leaves are identified by their label; every other vertex is anonymous.
/// `leaf_label[v]` is `Some(label)` for leaves.
pub fn canonical_form(g: &Network, leaf_label: &[Option<usize>]) -> Result<CanonicalForm, OracleError> {
    let ty = g.validate()?;
    let n = g.n;
    let ch = g.children();
    let mut par = vec![Vec::new(); n];
    for &(u, v) in &g.edges {
        par[v].push(u);
    }
    let internal: Vec<usize> = (0..n).filter(|&v| ty[v] != VType::Leaf).collect();
    let nleaves = n - internal.len();

    // Leaf set below each vertex, as a bitmask over labels.
    let mut below = vec![0u64; n];
    let mut order = topo_order(n, &ch, &ty);
    order.reverse();
    for &u in &order {
        if let Some(l) = leaf_label[u] {
            below[u] = 1 << l;
        }
        for &c in &ch[u] {
            below[u] |= below[c];
        }
    }

    let type_code = |t: VType| match t {
        VType::Root => 0u64,
        VType::Tree => 1,
        VType::Ret => 2,
        VType::Leaf => 3,
    };
    // Leaves keep a fixed colour per label; internal colours start from (type, leaves below).
    let mut colour: Vec<u64> = (0..n)
        .map(|v| match leaf_label[v] {
            Some(l) => l as u64,
            None => 0,
        })
        .collect();
    let rank = |keys: Vec<(usize, Vec<u64>)>, colour: &mut Vec<u64>| -> usize {
        let mut uniq: Vec<&Vec<u64>> = keys.iter().map(|(_, k)| k).collect();
        uniq.sort();
        uniq.dedup();
        let m = uniq.len();
        let base = nleaves as u64 + 1;
        let pos: HashMap<&Vec<u64>, u64> = uniq.into_iter().enumerate().map(|(i, k)| (k, i as u64)).collect();
        let upd: Vec<(usize, u64)> = keys.iter().map(|(v, k)| (*v, base + pos[k])).collect();
        for (v, c) in upd {
            colour[v] = c;
        }
        m
    };
    let init: Vec<(usize, Vec<u64>)> = internal.iter().map(|&v| (v, vec![type_code(ty[v]), below[v]])).collect();
    let mut classes = rank(init, &mut colour);
    loop {
        let keys: Vec<(usize, Vec<u64>)> = internal
            .iter()
            .map(|&v| {
                let mut c: Vec<u64> = ch[v].iter().map(|&x| colour[x]).collect();
                c.sort();
                let mut p: Vec<u64> = par[v].iter().map(|&x| colour[x]).collect();
                p.sort();
                let mut k = vec![colour[v], c.len() as u64];
                k.extend(c);
                k.push(u64::MAX);
                k.extend(p);
                (v, k)
            })
            .collect();
        let next = rank(keys, &mut colour);
        if next == classes {
            break;
        }
        classes = next;
    }

    let mut cells: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for &v in &internal {
        cells.entry(colour[v]).or_default().push(v);
    }
    let cells: Vec<Vec<usize>> = cells.into_values().collect();
    let mut pos = vec![0u8; n];
    for v in 0..n {
        if let Some(l) = leaf_label[v] {
            pos[v] = (internal.len() + l - 1) as u8;
        }
    }
    let mut best: Option<Vec<(u8, u8)>> = None;
    let mut aut = 0u64;
    let mut perms: Vec<Vec<Vec<usize>>> = cells.iter().map(|c| permutations(c)).collect();
    let mut idx = vec![0usize; cells.len()];
    loop {
        let mut next = 0u8;
        for (ci, p) in idx.iter().enumerate() {
            for &v in &perms[ci][*p] {
                pos[v] = next;
                next += 1;
            }
        }
        let mut key: Vec<(u8, u8)> = g.edges.iter().map(|&(u, v)| (pos[u], pos[v])).collect();
        key.sort_unstable();
        match &best {
            Some(b) if key > *b => {}
            Some(b) if key == *b => aut += 1,
            _ => {
                best = Some(key);
                aut = 1;
            }
        }
        // odometer over the cell permutations
        let mut i = 0;
        loop {
            if i == idx.len() {
                perms.clear();
                return Ok(CanonicalForm { edges: best.unwrap(), aut });
            }
            idx[i] += 1;
            if idx[i] < perms[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn topo_order(n: usize, ch: &[Vec<usize>], ty: &[VType]) -> Vec<usize> {
    let mut ind = vec![0usize; n];
    for c in ch.iter().flatten() {
        ind[*c] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| ty[v] == VType::Root).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(u) = stack.pop() {
        out.push(u);
        for &c in &ch[u] {
            ind[c] -= 1;
            if ind[c] == 0 {
                stack.push(c);
            }
        }
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// One leaf-labelled isomorphism class.
#[derive(Clone, Debug)]
pub struct LeafClass {
    pub form: CanonicalForm,
    pub class: Classification,
}

/// Leaf-labelled classes with `l` leaves and `k` reticulations.
#[derive(Clone, Debug)]
pub struct LeafClasses {
    pub l: usize,
    pub k: usize,
    pub n: usize,
    pub classes: Vec<LeafClass>,
    /// Networks visited with leaf labels and vertex types fixed.
    pub typed_networks: u64,
}

impl LeafClasses {
    pub fn count(&self, f: impl Fn(&Classification) -> bool) -> usize {
        self.classes.iter().filter(|c| f(&c.class)).count()
    }

    pub fn no_mult(&self) -> usize {
        self.count(|c| c.r == 0)
    }

    pub fn mult(&self) -> usize {
        self.count(|c| c.r > 0)
    }

    pub fn tree_child(&self) -> usize {
        self.count(|c| c.tree_child)
    }

    /// `sum binom(n, l) (n - l)! / |Aut|`, the vertex-labelled count these classes account for.
    pub fn orbit_sum(&self, f: impl Fn(&Classification) -> bool) -> BigUint {
        let per = factorial(self.n) / factorial(self.l);
        self.classes
            .iter()
            .filter(|c| f(&c.class))
            .map(|c| {
                assert!((&per % c.form.aut).is_zero(), "|Aut| must divide (n-l)!");
                &per / c.form.aut
            })
            .sum()
    }

    /// Number of classes per automorphism-group order, restricted by `f`.
    pub fn census(&self, f: impl Fn(&Classification) -> bool) -> BTreeMap<u64, usize> {
        let mut out = BTreeMap::new();
        for c in self.classes.iter().filter(|c| f(&c.class)) {
            *out.entry(c.form.aut).or_default() += 1;
        }
        out
    }
}

pub fn leaf_classes(l: usize, k: usize, cfg: &OracleConfig) -> Result<LeafClasses, OracleError> {
    let n = 2 * l + 2 * k - 1;
    cfg.check(n)?;
    let mut seen: HashMap<Vec<(u8, u8)>, LeafClass> = HashMap::new();
    let labels: Vec<Option<usize>> = (0..n).map(|v| if (1..=l).contains(&v) { Some(v) } else { None }).collect();
    let mut err = None;
    let mut visited = 0u64;
    for_each_typed_network(n, k, cfg, |g| {
        visited += 1;
        match canonical_form(g, &labels) {
            Ok(form) => {
                if !seen.contains_key(&form.edges) {
                    let class = classify(g).expect("valid");
                    seen.insert(form.edges.clone(), LeafClass { form, class });
                }
            }
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let mut classes: Vec<LeafClass> = seen.into_values().collect();
    classes.sort_by(|a, b| a.form.edges.cmp(&b.form.edges));
    Ok(LeafClasses { l, k, n, classes, typed_networks: visited })
}

/// Number of typed networks (leaf labels and vertex types fixed) the classes account for:
/// a class with automorphism group `A` has `t! k! / |A|` of them.
pub fn typed_representatives(classes: &LeafClasses) -> BigUint {
    let lay = Layout::new(classes.n, classes.k).expect("valid layout");
    let internal_perms = factorial(lay.t) * factorial(lay.k);
    classes.classes.iter().map(|c| &internal_perms / c.form.aut).sum::<BigUint>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    fn total(n: usize, k: usize) -> BigUint {
        enumerate_k(n, k, &cfg()).unwrap().into_values().sum()
    }

    #[test]
    fn smallest_sizes() {
        assert_eq!(total(3, 1), BigUint::from(6u32));
        assert_eq!(total(3, 0), BigUint::from(3u32));
        assert_eq!(enumerate(1, &cfg()).unwrap().all(), BigUint::zero());
    }

    #[test]
    fn even_sizes_are_empty() {
        for n in [4, 6, 8] {
            assert_eq!(enumerate(n, &cfg()).unwrap().all(), BigUint::zero(), "n={n}");
        }
    }

    #[test]
    fn typed_search_matches_generate_and_filter() {
        for n in [3, 5] {
            assert_eq!(enumerate(n, &cfg()).unwrap(), brute_force(n), "n={n}");
        }
    }

    #[test]
    fn leaves_and_reticulations_balance() {
        for k in 0..=3 {
            for_each_typed_network(7, k, &cfg(), |g| {
                let c = classify(g).unwrap();
                assert_eq!(c.leaves + c.k, 4);
            })
            .unwrap();
        }
    }

    #[test]
    fn double_edge_is_not_tree_child() {
        let g = Network { n: 3, edges: vec![(0, 1), (0, 1), (1, 2)] };
        let c = classify(&g).unwrap();
        assert_eq!((c.k, c.r, c.tree_child, c.leaves), (1, 1, false, 1));
        let g = Network { n: 5, edges: vec![(0, 1), (0, 4), (1, 2), (1, 2), (2, 3)] };
        let c = classify(&g).unwrap();
        assert_eq!((c.k, c.r, c.tree_child, c.leaves), (1, 1, false, 2));
    }

    #[test]
    fn stacked_reticulations_are_not_tree_child() {
        let g = Network { n: 5, edges: vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)] };
        let c = classify(&g).unwrap();
        assert_eq!((c.k, c.r, c.tree_child), (2, 0, false));
    }

    #[test]
    fn trees_are_tree_child() {
        for_each_typed_network(7, 0, &cfg(), |g| assert!(classify(g).unwrap().tree_child)).unwrap();
    }

    #[test]
    fn malformed_networks_rejected() {
        let cyc = Network { n: 3, edges: vec![(0, 1), (0, 2), (1, 2), (2, 1)] };
        assert!(matches!(classify(&cyc), Err(OracleError::InvalidNetwork(_))));
        let out = Network { n: 2, edges: vec![(0, 5)] };
        assert!(classify(&out).is_err());
    }

    #[test]
    fn range_and_budget() {
        assert_eq!(enumerate_k(11, 1, &cfg()), Err(OracleError::OutOfRange(11, 9)));
        let tight = OracleConfig { budget: Some(Duration::ZERO), ..cfg() };
        assert_eq!(enumerate_k(9, 2, &tight), Err(OracleError::BudgetExceeded));
    }

    #[test]
    fn leaf_classes_small() {
        assert_eq!(leaf_classes(1, 1, &cfg()).unwrap().classes.len(), 1);
        assert_eq!(leaf_classes(2, 0, &cfg()).unwrap().classes.len(), 1);
        assert_eq!(leaf_classes(2, 1, &cfg()).unwrap().classes.len(), 5);
    }

    #[test]
    fn no_internal_symmetry_without_pairs() {
        for l in 1..=4 {
            let cl = leaf_classes(l, 1, &cfg()).unwrap();
            assert_eq!(cl.census(|_| true).keys().copied().collect::<Vec<_>>(), vec![1], "l={l}");
            let tr = leaf_classes(l + 1, 0, &cfg()).unwrap();
            assert_eq!(tr.census(|_| true).keys().copied().collect::<Vec<_>>(), vec![1]);
        }
    }

    #[test]
    fn orbit_sum_recovers_vertex_counts() {
        for (l, k) in [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (1, 3)] {
            let cl = leaf_classes(l, k, &cfg()).unwrap();
            assert_eq!(cl.orbit_sum(|_| true), total(cl.n, k), "l={l} k={k}");
            let lay = Layout::new(cl.n, k).unwrap();
            assert_eq!(typed_representatives(&cl), BigUint::from(cl.typed_networks), "{}", lay.t);
        }
    }

    #[test]
    fn edge_list_output() {
        let mut buf = Vec::new();
        let m = write_edge_lists(3, 1, &cfg(), &mut buf).unwrap();
        assert_eq!(m, 1);
        assert_eq!(String::from_utf8(buf).unwrap(), "3 1 1\n1 3\n1 3\n3 2\n\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn canonical_form_ignores_internal_labels(pick in 0usize..1000, perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle()) {
            let mut nets = Vec::new();
            for_each_typed_network(7, 2, &cfg(), |g| nets.push(g.clone())).unwrap();
            let g = &nets[pick % nets.len()];
            // leaves are 1 and 2; everything else gets permuted
            let internal = [0usize, 3, 4, 5, 6];
            let mut map: Vec<usize> = (0..7).collect();
            for (i, &v) in internal.iter().enumerate() {
                map[v] = internal[perm[i]];
            }
            let h = Network { n: 7, edges: g.edges.iter().map(|&(u, v)| (map[u], map[v])).collect() };
            let labels: Vec<Option<usize>> = (0..7).map(|v| if v == 1 || v == 2 { Some(v) } else { None }).collect();
            prop_assert_eq!(canonical_form(g, &labels).unwrap(), canonical_form(&h, &labels).unwrap());
        }
    }
}
