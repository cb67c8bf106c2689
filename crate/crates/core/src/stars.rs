//! Rounding the redistributed opening values through stars.
//!
//! Every fractionally open location `i` (in `N̂2`) points at `s(i)`. The
//! resulting functional graph is a forest once each cycle loses the outgoing
//! edge of its lowest-index node. Each tree is peeled into one-level stars,
//! and each star opens at most `⌊R_t⌋` of its locations, pairing children
//! so that a closed child is served by an open location no farther from the
//! root.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::concentrate::ConcentratedSolution;
use crate::error::{Error, Result};
use crate::model::{Instance, IntegralSolution, Matrix, TOL};
use crate::redistribute::RedistributedSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct StarForest {
    pub alpha: f64,
    pub yhat: Vec<f64>,
    /// `N̂1 = {i : ŷ_i ∈ [1, 2)}`
    pub n1hat: Vec<usize>,
    /// `N̂2 = {i : ŷ_i ∈ ((α-2)/α, (α-1)/α]}`
    pub n2hat: Vec<usize>,
    pub nearest: Vec<Option<usize>>,
    /// Tree parent after cycle breaking.
    pub parent: Vec<Option<usize>>,
    /// Tree roots in index order.
    pub roots: Vec<usize>,
}

impl StarForest {
    pub fn is_fractional(&self, i: usize) -> bool {
        self.yhat[i] > 0.0 && self.yhat[i] < 1.0
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.yhat.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                ch[p].push(i);
            }
        }
        ch
    }
}

pub fn build_forest(red: &RedistributedSolution) -> Result<StarForest> {
    let alpha = red.alpha;
    let n = red.yhat.len();
    let low = (alpha - 2.0) / alpha;
    let high = (alpha - 1.0) / alpha;
    let mut n1hat = Vec::new();
    let mut n2hat = Vec::new();
    for (i, &v) in red.yhat.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        if (1.0..2.0).contains(&v) {
            n1hat.push(i);
        } else if v > low && v <= high {
            n2hat.push(i);
        } else {
            return Err(Error::Internal(format!(
                "ŷ[{i}] = {v} is outside ((α-2)/α, (α-1)/α] ∪ [1, 2)"
            )));
        }
    }

    let mut parent = vec![None; n];
    for &i in &n2hat {
        let s = red.nearest[i]
            .ok_or_else(|| Error::Internal(format!("no nearest neighbor for {i}")))?;
        parent[i] = Some(s);
    }

    // Walk each path; a path that runs into itself closes a new cycle.
    const UNSEEN: usize = usize::MAX;
    let mut stamp = vec![UNSEEN; n];
    for start in 0..n {
        if stamp[start] != UNSEEN {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if stamp[cur] != UNSEEN {
                if stamp[cur] == start {
                    let from = path.iter().position(|&p| p == cur).expect("on path");
                    let root = *path[from..].iter().min().expect("nonempty cycle");
                    parent[root] = None;
                }
                break;
            }
            stamp[cur] = start;
            path.push(cur);
            match parent[cur] {
                Some(p) => cur = p,
                None => break,
            }
        }
    }

    let roots = (0..n)
        .filter(|&i| red.yhat[i] > 0.0 && parent[i].is_none())
        .collect();
    Ok(StarForest {
        alpha,
        yhat: red.yhat.clone(),
        n1hat,
        n2hat,
        nearest: red.nearest.clone(),
        parent,
        roots,
    })
}

/// A one-level rooted star. Children are sorted by `(c(t, i), i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Star {
    pub root: usize,
    pub children: Vec<usize>,
    /// `R_t = Σ_{i ∈ Q_t} ŷ_i`
    pub mass: f64,
}

impl Star {
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        core::iter::once(self.root).chain(self.children.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub stars: Vec<Star>,
    /// `N̂1` locations outside every star; each is opened on its own.
    pub isolated: Vec<usize>,
}

fn sort_children(inst: &Instance, star: &mut Star, yhat: &[f64]) {
    let t = star.root;
    star.children
        .sort_by(|&a, &b| inst.cost(t, a).total_cmp(&inst.cost(t, b)).then(a.cmp(&b)));
    star.mass = star.members().map(|i| yhat[i]).sum();
}

/// Peels every tree of the forest into stars: the parent of the deepest
/// leaf (ties to the lowest index) and all of its children form a star and
/// are removed, until at most one node is left. A leftover fractional node
/// joins the star rooted at its nearest neighbor; a leftover `N̂1` node is
/// isolated.
pub fn decompose_to_stars(inst: &Instance, forest: &StarForest) -> Result<Decomposition> {
    let n = forest.yhat.len();
    let children = forest.children();
    let mut stars: Vec<Star> = Vec::new();
    let mut isolated = Vec::new();
    let mut alive = vec![false; n];
    let mut depth = vec![0usize; n];

    for &root in &forest.roots {
        let mut nodes = vec![root];
        let mut k = 0;
        while k < nodes.len() {
            let v = nodes[k];
            alive[v] = true;
            for &c in &children[v] {
                depth[c] = depth[v] + 1;
                nodes.push(c);
            }
            k += 1;
        }
        let mut left = nodes.len();
        while left >= 2 {
            let leaf = nodes
                .iter()
                .copied()
                .filter(|&v| alive[v] && !children[v].iter().any(|&c| alive[c]))
                .max_by(|&a, &b| depth[a].cmp(&depth[b]).then(b.cmp(&a)))
                .expect("a tree with two nodes has a leaf");
            let p = forest.parent[leaf].expect("the deepest leaf is not the root");
            let kids: Vec<usize> = children[p].iter().copied().filter(|&c| alive[c]).collect();
            alive[p] = false;
            for &c in &kids {
                alive[c] = false;
            }
            left -= 1 + kids.len();
            let mut star = Star {
                root: p,
                children: kids,
                mass: 0.0,
            };
            sort_children(inst, &mut star, &forest.yhat);
            stars.push(star);
        }
        if left == 1 {
            let last = nodes
                .iter()
                .copied()
                .find(|&v| alive[v])
                .expect("one node left");
            alive[last] = false;
            if forest.is_fractional(last) {
                let s = forest.nearest[last]
                    .ok_or_else(|| Error::Internal(format!("no nearest neighbor for {last}")))?;
                let star = stars.iter_mut().find(|st| st.root == s).ok_or_else(|| {
                    Error::Internal(format!("leftover {last} has no star rooted at s = {s}"))
                })?;
                star.children.push(last);
                sort_children(inst, star, &forest.yhat);
            } else {
                isolated.push(last);
            }
        }
    }
    Ok(Decomposition { stars, isolated })
}

/// The four rounding rules, by parity of the child count and the root value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarCase {
    /// Even, `1 ≤ ŷ_t < 2`.
    EvenHeavyRoot,
    /// Even, fractional root.
    EvenFractionalRoot,
    /// Odd, `1 + 2/α ≤ ŷ_t < 2`.
    OddHeavyRoot,
    /// Odd, fractional root or `1 ≤ ŷ_t < 1 + 2/α`.
    OddLightRoot,
}

impl StarCase {
    pub fn number(self) -> u8 {
        match self {
            StarCase::EvenHeavyRoot => 1,
            StarCase::EvenFractionalRoot => 2,
            StarCase::OddHeavyRoot => 3,
            StarCase::OddLightRoot => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarRounding {
    pub root: usize,
    pub case: StarCase,
    /// Opened locations, root first.
    pub opened: Vec<usize>,
    /// `(i, r(i))` for every closed member.
    pub reassign: Vec<(usize, usize)>,
    /// `Σ d'_i c(r(i), i)`
    pub cost: f64,
    /// `⌊R_t⌋`, with [`TOL`] slack.
    pub budget: usize,
}

pub fn round_star(
    inst: &Instance,
    star: &Star,
    yhat: &[f64],
    dprime: &[f64],
    alpha: f64,
) -> Result<StarRounding> {
    let t = star.root;
    let ch = &star.children;
    if ch.is_empty() {
        return Err(Error::Internal(format!(
            "star rooted at {t} has no children"
        )));
    }
    let heavy = yhat[t] >= 1.0;
    let case = match (ch.len().is_multiple_of(2), heavy) {
        (true, true) => StarCase::EvenHeavyRoot,
        (true, false) => StarCase::EvenFractionalRoot,
        (false, true) if yhat[t] >= 1.0 + 2.0 / alpha - TOL => StarCase::OddHeavyRoot,
        (false, _) => StarCase::OddLightRoot,
    };

    let mut opened = vec![t];
    let mut reassign = Vec::new();
    match case {
        StarCase::EvenHeavyRoot | StarCase::OddHeavyRoot => {
            for (m, &i) in ch.iter().enumerate() {
                if m % 2 == 0 {
                    opened.push(i);
                } else {
                    reassign.push((i, ch[m - 1]));
                }
            }
        }
        StarCase::EvenFractionalRoot | StarCase::OddLightRoot => {
            for (m, &i) in ch.iter().enumerate() {
                if m == 0 {
                    reassign.push((i, t));
                } else if m % 2 == 1 {
                    opened.push(i);
                } else {
                    reassign.push((i, ch[m - 1]));
                }
            }
        }
    }

    let budget = libm::floor(star.mass + TOL) as usize;
    if opened.len() > budget {
        return Err(Error::NumericalMargin(format!(
            "star rooted at {t} opens {} locations but ⌊R_t⌋ = {budget} (R_t = {})",
            opened.len(),
            star.mass
        )));
    }
    let cost = reassign
        .iter()
        .map(|&(i, r)| dprime[i] * inst.cost(r, i))
        .sum();
    Ok(StarRounding {
        root: t,
        case,
        opened,
        reassign,
        cost,
        budget,
    })
}

/// Opens every star's chosen locations and every isolated location, maps
/// each closed location to its server, and routes the original demand along
/// the concentrated assignment: `x̄[c][j] = Σ_{i ↦ c} x'_ij`.
pub fn assemble_integral(
    inst: &Instance,
    decomposition: &Decomposition,
    roundings: &[StarRounding],
    conc: &ConcentratedSolution,
) -> Result<IntegralSolution> {
    let n = inst.n();
    let mut server: Vec<Option<usize>> = vec![None; n];
    let mut open = vec![false; n];
    for &i in &decomposition.isolated {
        open[i] = true;
        server[i] = Some(i);
    }
    for r in roundings {
        for &i in &r.opened {
            open[i] = true;
            server[i] = Some(i);
        }
        for &(i, to) in &r.reassign {
            server[i] = Some(to);
        }
    }

    let mut assign = Matrix::zeros(n, n);
    for i in 0..n {
        match server[i] {
            Some(c) => {
                for (a, &v) in assign.row_mut(c).iter_mut().zip(conc.x.row(i)) {
                    *a += v;
                }
            }
            None if conc.x.row(i).iter().any(|&v| v > 0.0) => {
                return Err(Error::Internal(format!(
                    "location {i} serves demand but was not placed in any star"
                )));
            }
            None => {}
        }
    }
    IntegralSolution::new(inst, open, assign)
}
